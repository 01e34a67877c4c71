//! The model three-manifold: the unit sphere of quaternions with the Hopf
//! Reeb field `ξ(q) = i·q`.
//!
//! Tangent vectors are carried in two ways: as ambient 4-vectors, and as
//! coefficients on the invariant basis `(σ₀, jσ₀, ξ) = (j·q, k·q, i·q)`.
//! The invariant basis is orthonormal for the round metric and has exact
//! structure constants, so most geometry reduces to small constant tables.

mod contact;
mod frame;

pub use contact::{
    beta_operator, contact_residuals, lambda_at, levi_civita, levi_civita_koszul, ricci_xi,
    standard_ricci_xi, GeometryResiduals, LambdaReport, Metric, PerturbedMetric, RoundMetric,
};
pub use frame::{
    directional, frame_at, invariant_derivative, lie_bracket, lie_bracket_flow, Frame,
    FrameField, FramePolicy, Invariant, LiftChart, VectorField,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Quat = [f64; 4];

pub const UNIT_I: Quat = [0.0, 1.0, 0.0, 0.0];
pub const UNIT_J: Quat = [0.0, 0.0, 1.0, 0.0];
pub const UNIT_K: Quat = [0.0, 0.0, 0.0, 1.0];

/// Quaternion units generating the invariant basis, in frame order
/// `(σ₀, jσ₀, ξ)`.
pub const BASIS_UNITS: [Quat; 3] = [UNIT_J, UNIT_K, UNIT_I];

/// Default basepoint: on the Clifford torus, away from both coordinate fibres.
pub const DEFAULT_BASEPOINT: Quat = [0.5, 0.5, 0.5, 0.5];

pub const SIGMA: usize = 0;
pub const JSIGMA: usize = 1;
pub const XI: usize = 2;

pub fn qmul(a: &Quat, b: &Quat) -> Quat {
    [
        a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
        a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
        a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
        a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
    ]
}

pub fn dot4(a: &Quat, b: &Quat) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

pub fn norm4(a: &Quat) -> f64 {
    dot4(a, a).sqrt()
}

/// `exp(s·u)` for a unit imaginary quaternion `u`.
pub fn exp_unit(u: &Quat, s: f64) -> Quat {
    let (sn, cs) = s.sin_cos();
    [cs, sn * u[1], sn * u[2], sn * u[3]]
}

/// `[e_a, e_b]` on the invariant basis: `[σ₀, jσ₀] = −2ξ` and cyclic.
pub fn bracket_basis(a: usize, b: usize) -> [f64; 3] {
    let mut out = [0.0; 3];
    if a == b {
        return out;
    }
    let c = 3 - a - b;
    let sign = if (a + 1) % 3 == b { 1.0 } else { -1.0 };
    out[c] = -2.0 * sign;
    out
}

/// A point of the unit three-sphere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Quat", into = "Quat")]
pub struct SpherePoint {
    q: Quat,
}

impl TryFrom<Quat> for SpherePoint {
    type Error = Error;
    fn try_from(q: Quat) -> Result<Self> {
        SpherePoint::new(q)
    }
}

impl From<SpherePoint> for Quat {
    fn from(p: SpherePoint) -> Quat {
        p.q
    }
}

impl SpherePoint {
    pub const UNIT_TOL: f64 = 1e-12;

    /// Rejects inputs that are not unit vectors; nothing is renormalized here.
    pub fn new(q: Quat) -> Result<Self> {
        let dev = norm4(&q) - 1.0;
        if !dev.is_finite() || dev.abs() > Self::UNIT_TOL {
            return Err(Error::NotUnit(dev));
        }
        Ok(SpherePoint { q })
    }

    /// Explicit projection onto the sphere, for samplers and integrators.
    pub fn normalize(v: Quat) -> Result<Self> {
        let n = norm4(&v);
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::NotUnit(f64::NAN));
        }
        Ok(SpherePoint {
            q: [v[0] / n, v[1] / n, v[2] / n, v[3] / n],
        })
    }

    pub(crate) fn raw(q: Quat) -> Self {
        SpherePoint { q }
    }

    pub fn identity() -> Self {
        SpherePoint {
            q: [1.0, 0.0, 0.0, 0.0],
        }
    }

    pub fn q(&self) -> Quat {
        self.q
    }

    pub fn dot(&self, other: &SpherePoint) -> f64 {
        dot4(&self.q, &other.q)
    }

    /// `q = z₁ + z₂·j` with `z₁ = a + bi`, `z₂ = c + di`.
    pub fn complex(&self) -> (Complex64, Complex64) {
        (
            Complex64::new(self.q[0], self.q[1]),
            Complex64::new(self.q[2], self.q[3]),
        )
    }

    pub fn from_complex(z1: Complex64, z2: Complex64) -> Result<Self> {
        SpherePoint::new([z1.re, z1.im, z2.re, z2.im])
    }

    /// Left translate `u·q` for a unit quaternion `u`.
    pub fn left_mul(&self, u: &Quat) -> SpherePoint {
        SpherePoint::raw(qmul(u, &self.q))
    }

    /// Exact time-`s` flow of the invariant field `e_a`.
    pub fn flow_invariant(&self, a: usize, s: f64) -> SpherePoint {
        self.left_mul(&exp_unit(&BASIS_UNITS[a], s))
    }

    /// Exact Reeb flow.
    pub fn reeb_flow(&self, s: f64) -> SpherePoint {
        self.flow_invariant(XI, s)
    }

    /// Ambient vector `u_a·q` of the invariant field `e_a`.
    pub fn invariant_vector(&self, a: usize) -> Quat {
        qmul(&BASIS_UNITS[a], &self.q)
    }

    pub fn ambient(&self, coeffs: &[f64; 3]) -> Quat {
        let mut v = [0.0; 4];
        for (a, c) in coeffs.iter().enumerate() {
            let e = self.invariant_vector(a);
            for k in 0..4 {
                v[k] += c * e[k];
            }
        }
        v
    }

    pub fn coeffs_of(&self, v: &Quat) -> [f64; 3] {
        [0, 1, 2].map(|a| dot4(v, &self.invariant_vector(a)))
    }

    /// Geodesic exponential at this point.
    pub fn exp(&self, v: &Quat) -> SpherePoint {
        let r = norm4(v);
        if r == 0.0 {
            return *self;
        }
        let (sn, cs) = r.sin_cos();
        let mut out = [0.0; 4];
        for k in 0..4 {
            out[k] = cs * self.q[k] + sn * v[k] / r;
        }
        SpherePoint::raw(out)
    }
}

/// A tangent vector in ambient coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TangentVec {
    pub v: Quat,
    pub base: SpherePoint,
}

impl TangentVec {
    pub const TANGENT_TOL: f64 = 1e-10;

    pub fn new(v: Quat, base: SpherePoint) -> Result<Self> {
        let d = dot4(&v, &base.q);
        if d.abs() > Self::TANGENT_TOL {
            return Err(Error::NotTangent(d));
        }
        Ok(TangentVec { v, base })
    }

    pub fn from_coeffs(base: SpherePoint, coeffs: &[f64; 3]) -> Self {
        TangentVec {
            v: base.ambient(coeffs),
            base,
        }
    }

    pub fn coeffs(&self) -> [f64; 3] {
        self.base.coeffs_of(&self.v)
    }

    pub fn norm(&self) -> f64 {
        norm4(&self.v)
    }
}

/// Riemannian distance on the round unit sphere, in `[0, π]`.
pub fn geodesic_distance(p: &SpherePoint, q: &SpherePoint) -> f64 {
    let mut d = [0.0; 4];
    let mut s = [0.0; 4];
    for k in 0..4 {
        d[k] = p.q[k] - q.q[k];
        s[k] = p.q[k] + q.q[k];
    }
    2.0 * norm4(&d).atan2(norm4(&s))
}

/// Distance from `p` to the Hopf fibre through `f`.
pub fn fibre_distance(p: &SpherePoint, f: &SpherePoint) -> f64 {
    let along = p.dot(f);
    let across = dot4(&p.q, &f.invariant_vector(XI));
    along.hypot(across).min(1.0).acos()
}

/// Time-`s` flow of a smooth field given by invariant-basis coefficients,
/// integrated by step-doubling RK4.
pub fn flow_field(
    p: &SpherePoint,
    field: &dyn Fn(&SpherePoint) -> Result<[f64; 3]>,
    s: f64,
    tol: f64,
) -> Result<SpherePoint> {
    if s == 0.0 {
        return Ok(*p);
    }
    let rhs = |q: &Quat| -> Result<Quat> {
        let pt = SpherePoint::normalize(*q)?;
        let c = field(&pt)?;
        Ok(pt.ambient(&c))
    };
    let rk4 = |q: &Quat, h: f64| -> Result<Quat> {
        let add = |a: &Quat, b: &Quat, w: f64| [0, 1, 2, 3].map(|k| a[k] + w * b[k]);
        let k1 = rhs(q)?;
        let k2 = rhs(&add(q, &k1, h / 2.0))?;
        let k3 = rhs(&add(q, &k2, h / 2.0))?;
        let k4 = rhs(&add(q, &k3, h))?;
        Ok([0, 1, 2, 3].map(|k| q[k] + h / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k])))
    };
    let dir = s.signum();
    let mut remaining = s.abs();
    let mut h = remaining.min(0.05);
    let mut q = p.q;
    let mut guard = 0usize;
    while remaining > 0.0 {
        guard += 1;
        if guard > 1_000_000 || h < 1e-12 {
            return Err(Error::StepFailure { tol });
        }
        let step = h.min(remaining);
        let full = rk4(&q, dir * step)?;
        let half = rk4(&rk4(&q, dir * step / 2.0)?, dir * step / 2.0)?;
        let err = norm4(&[0, 1, 2, 3].map(|k| full[k] - half[k])) / 15.0;
        if err <= tol {
            q = SpherePoint::normalize(half)?.q;
            remaining -= step;
            if err < tol / 32.0 {
                h = step * 2.0;
            }
        } else {
            h = step / 2.0;
        }
    }
    Ok(SpherePoint::raw(q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: &Quat, b: &Quat, tol: f64) -> bool {
        (0..4).all(|k| (a[k] - b[k]).abs() < tol)
    }

    #[test]
    fn rejects_non_unit_points() {
        assert!(matches!(
            SpherePoint::new([1.0, 1e-5, 0.0, 0.0]),
            Err(Error::NotUnit(_))
        ));
    }

    #[test]
    fn reeb_flow_half_turn_is_antipode() {
        let p = SpherePoint::identity().reeb_flow(PI);
        assert!(close(&p.q(), &[-1.0, 0.0, 0.0, 0.0], 1e-15));
        let p = SpherePoint::identity().reeb_flow(PI / 2.0);
        assert!(close(&p.q(), &[0.0, 1.0, 0.0, 0.0], 1e-15));
    }

    #[test]
    fn zero_time_flow_is_identity() {
        let p = SpherePoint::normalize([0.3, -0.2, 0.5, 0.7]).unwrap();
        assert_eq!(p.flow_invariant(SIGMA, 0.0), p);
        let f = |_: &SpherePoint| Ok([0.3, 0.1, -0.4]);
        assert_eq!(flow_field(&p, &f, 0.0, 1e-12).unwrap(), p);
    }

    #[test]
    fn numeric_flow_matches_exact_exponential() {
        let p = SpherePoint::normalize([0.3, -0.2, 0.5, 0.7]).unwrap();
        let f = |_: &SpherePoint| Ok([0.0, 0.0, 1.0]);
        let num = flow_field(&p, &f, 1.3, 1e-13).unwrap();
        assert!(close(&num.q(), &p.reeb_flow(1.3).q(), 1e-10));
    }

    #[test]
    fn bracket_table() {
        assert_eq!(bracket_basis(SIGMA, JSIGMA), [0.0, 0.0, -2.0]);
        assert_eq!(bracket_basis(SIGMA, XI), [0.0, 2.0, 0.0]);
        assert_eq!(bracket_basis(JSIGMA, XI), [-2.0, 0.0, 0.0]);
        assert_eq!(bracket_basis(XI, XI), [0.0; 3]);
    }

    #[test]
    fn distances() {
        let e = SpherePoint::identity();
        let i = SpherePoint::new(UNIT_I).unwrap();
        let m = SpherePoint::new([-1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!((geodesic_distance(&e, &i) - PI / 2.0).abs() < 1e-15);
        assert_eq!(geodesic_distance(&e, &e), 0.0);
        assert!((geodesic_distance(&e, &m) - PI).abs() < 1e-15);
    }

    #[test]
    fn fibre_distance_vanishes_along_the_fibre() {
        let f = SpherePoint::normalize([0.3, -0.2, 0.5, 0.7]).unwrap();
        assert!(fibre_distance(&f.reeb_flow(2.0), &f) < 1e-7);
        let off = f.flow_invariant(SIGMA, 0.25);
        assert!((fibre_distance(&off, &f) - 0.25).abs() < 1e-12);
    }
}
