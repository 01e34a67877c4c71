use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{bracket_basis, dot4, flow_field, Quat, SpherePoint, TangentVec, JSIGMA, SIGMA, XI};
use crate::error::{Error, Result};
use crate::fd::Fd;
use crate::linalg::Coef;

/// Chart of the flow-invariant horizontal frame. The frame is defined where
/// the hermitian product `w = <basepoint, p>` stays away from zero, i.e. off
/// the Hopf fibre orthogonal to the basepoint's fibre.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiftChart {
    pub basepoint: SpherePoint,
    #[serde(default)]
    pub reference_angle: f64,
    #[serde(default = "default_margin")]
    pub margin: f64,
}

fn default_margin() -> f64 {
    0.05
}

impl LiftChart {
    pub fn at(basepoint: SpherePoint) -> Self {
        LiftChart {
            basepoint,
            reference_angle: 0.0,
            margin: default_margin(),
        }
    }

    fn hermitian(&self, p: &SpherePoint) -> Complex64 {
        let (a1, a2) = self.basepoint.complex();
        let (z1, z2) = p.complex();
        a1.conj() * z1 + a2.conj() * z2
    }

    /// `(cos θ, sin θ)` with `θ = 2·arg w + reference_angle`.
    fn rotation(&self, p: &SpherePoint) -> Result<(f64, f64)> {
        let w = self.hermitian(p);
        if w.norm() <= self.margin {
            return Err(Error::PolicyChartMiss);
        }
        let r = Complex64::from_polar(1.0, self.reference_angle) * w * w / w.norm_sqr();
        Ok((r.re, r.im))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum FramePolicy {
    LeftInvariant,
    #[serde(rename = "flow-lift")]
    FlowInvariantLift(LiftChart),
}

impl FramePolicy {
    pub fn flow_lift(basepoint: SpherePoint) -> Self {
        FramePolicy::FlowInvariantLift(LiftChart::at(basepoint))
    }

    /// Rows are the invariant-basis coefficients of `σ`, `jσ`, `ξ`.
    pub fn rows(&self, p: &SpherePoint) -> Result<[[f64; 3]; 3]> {
        match self {
            FramePolicy::LeftInvariant => {
                Ok([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
            }
            FramePolicy::FlowInvariantLift(chart) => {
                let (c, s) = chart.rotation(p)?;
                Ok([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]])
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FramePolicy::LeftInvariant => "left-invariant",
            FramePolicy::FlowInvariantLift(_) => "flow-lift",
        }
    }
}

/// Orthonormal frame `{σ, jσ, ξ}` at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frame {
    pub base: SpherePoint,
    pub policy: FramePolicy,
    pub rows: [[f64; 3]; 3],
}

pub fn frame_at(p: &SpherePoint, policy: &FramePolicy) -> Result<Frame> {
    Ok(Frame {
        base: *p,
        policy: *policy,
        rows: policy.rows(p)?,
    })
}

impl Frame {
    pub fn vector(&self, k: usize) -> TangentVec {
        TangentVec::from_coeffs(self.base, &self.rows[k])
    }

    pub fn sigma(&self) -> TangentVec {
        self.vector(SIGMA)
    }

    pub fn jsigma(&self) -> TangentVec {
        self.vector(JSIGMA)
    }

    pub fn xi(&self) -> TangentVec {
        self.vector(XI)
    }

    /// Frame coefficients to invariant coefficients.
    pub fn to_invariant(&self, c: &[f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for k in 0..3 {
            for a in 0..3 {
                out[a] += c[k] * self.rows[k][a];
            }
        }
        out
    }

    /// Invariant coefficients to frame coefficients (rows are orthonormal).
    pub fn from_invariant(&self, v: &[f64; 3]) -> [f64; 3] {
        self.rows
            .map(|r| r[0] * v[0] + r[1] * v[1] + r[2] * v[2])
    }

    /// `j` on frame coefficients: `σ ↦ jσ`, `jσ ↦ −σ`, `ξ ↦ 0`.
    pub fn apply_j(c: &[f64; 3]) -> [f64; 3] {
        [-c[1], c[0], 0.0]
    }

    /// `det[q, σ, jσ, ξ]` of the ambient 4×4 matrix.
    pub fn orientation(&self) -> f64 {
        let cols = [
            self.base.q(),
            self.sigma().v,
            self.jsigma().v,
            self.xi().v,
        ];
        let m = nalgebra::Matrix4::from_fn(|r, c| cols[c][r]);
        m.determinant()
    }

    /// Largest deviation of the ambient Gram matrix of `{σ, jσ, ξ}` from the
    /// identity, together with tangency to the base point.
    pub fn orthonormality_defect(&self) -> f64 {
        let v = [self.sigma().v, self.jsigma().v, self.xi().v];
        let q = self.base.q();
        let mut worst: f64 = 0.0;
        for a in 0..3 {
            worst = worst.max(dot4(&v[a], &q).abs());
            for b in 0..3 {
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((dot4(&v[a], &v[b]) - target).abs());
            }
        }
        worst
    }
}

/// A vector field given by its invariant-basis coefficients.
pub trait VectorField: Sync {
    fn coeffs(&self, p: &SpherePoint) -> Result<[f64; 3]>;

    /// Constant coefficients mark an invariant field; brackets then come from
    /// the structure constants alone.
    fn constant(&self) -> Option<[f64; 3]> {
        None
    }

    fn flow(&self, p: &SpherePoint, s: f64, tol: f64) -> Result<SpherePoint> {
        match self.constant() {
            Some(c) => {
                let n = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
                if n == 0.0 {
                    return Ok(*p);
                }
                let u = [0.0, c[2] / n, c[0] / n, c[1] / n];
                Ok(p.left_mul(&super::exp_unit(&u, s * n)))
            }
            None => flow_field(p, &|x| self.coeffs(x), s, tol),
        }
    }
}

/// A left-invariant field with constant coefficients.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Invariant(pub [f64; 3]);

impl Invariant {
    pub fn basis(a: usize) -> Self {
        let mut c = [0.0; 3];
        c[a] = 1.0;
        Invariant(c)
    }
}

impl VectorField for Invariant {
    fn coeffs(&self, _: &SpherePoint) -> Result<[f64; 3]> {
        Ok(self.0)
    }
    fn constant(&self) -> Option<[f64; 3]> {
        Some(self.0)
    }
}

/// One member of the frame selected by a policy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameField {
    pub policy: FramePolicy,
    pub index: usize,
}

impl FrameField {
    pub fn new(policy: FramePolicy, index: usize) -> Self {
        FrameField { policy, index }
    }
}

impl VectorField for FrameField {
    fn coeffs(&self, p: &SpherePoint) -> Result<[f64; 3]> {
        Ok(self.policy.rows(p)?[self.index])
    }
    fn constant(&self) -> Option<[f64; 3]> {
        match self.policy {
            FramePolicy::LeftInvariant => Some(self.policy.rows(&SpherePoint::identity()).ok()?[self.index]),
            // ξ is invariant under every policy
            FramePolicy::FlowInvariantLift(_) if self.index == XI => Some([0.0, 0.0, 1.0]),
            FramePolicy::FlowInvariantLift(_) => None,
        }
    }
}

/// Derivative of `f` along the invariant field `e_a`, through its exact flow.
pub fn invariant_derivative<T: Coef>(
    f: &dyn Fn(&SpherePoint) -> Result<T>,
    p: &SpherePoint,
    a: usize,
    fd: &Fd,
) -> Result<T> {
    fd.derivative(|s| f(&p.flow_invariant(a, s)))
}

/// `V(f)` for a tangent vector with invariant coefficients `v`.
pub fn directional<T: Coef>(
    f: &dyn Fn(&SpherePoint) -> Result<T>,
    p: &SpherePoint,
    v: &[f64; 3],
    fd: &Fd,
) -> Result<T> {
    let mut acc: Option<T> = None;
    for a in 0..3 {
        if v[a] == 0.0 {
            continue;
        }
        let d = invariant_derivative(f, p, a, fd)?.scaled(v[a]);
        acc = Some(match acc {
            None => d,
            Some(x) => x.plus(&d),
        });
    }
    match acc {
        Some(x) => Ok(x),
        None => Ok(f(p)?.scaled(0.0)),
    }
}

/// `[A, B]` at `p` in invariant coefficients: structure constants for the
/// algebraic part, finite differences for the coefficient derivatives.
pub fn lie_bracket(
    a: &dyn VectorField,
    b: &dyn VectorField,
    p: &SpherePoint,
    fd: &Fd,
) -> Result<[f64; 3]> {
    let va = a.coeffs(p)?;
    let vb = b.coeffs(p)?;
    let mut out = [0.0; 3];
    for i in 0..3 {
        for k in 0..3 {
            let w = va[i] * vb[k];
            if w != 0.0 {
                let c = bracket_basis(i, k);
                for m in 0..3 {
                    out[m] += w * c[m];
                }
            }
        }
    }
    if b.constant().is_none() {
        let d = directional(&|x| b.coeffs(x), p, &va, fd)?;
        out = out.plus(&d);
    }
    if a.constant().is_none() {
        let d = directional(&|x| a.coeffs(x), p, &vb, fd)?;
        out = out.minus(&d);
    }
    Ok(out)
}

/// Flow-commutator oracle for `[A, B]`, returned as an ambient vector:
/// flow along `A`, `B`, `−A`, `−B` for time `h`, symmetrized in `±h`.
pub fn lie_bracket_flow(
    a: &dyn VectorField,
    b: &dyn VectorField,
    p: &SpherePoint,
    h: f64,
    tol: f64,
) -> Result<Quat> {
    let loop_at = |h: f64| -> Result<Quat> {
        let x = a.flow(p, h, tol)?;
        let x = b.flow(&x, h, tol)?;
        let x = a.flow(&x, -h, tol)?;
        Ok(b.flow(&x, -h, tol)?.q())
    };
    let plus = loop_at(h)?;
    let minus = loop_at(-h)?;
    let q = p.q();
    let mut v = [0.0; 4];
    for k in 0..4 {
        v[k] = (plus[k] + minus[k] - 2.0 * q[k]) / (2.0 * h * h);
    }
    let n = dot4(&v, &q);
    for k in 0..4 {
        v[k] -= n * q[k];
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::norm4;

    fn sample() -> SpherePoint {
        SpherePoint::normalize([0.4, -0.3, 0.6, 0.2]).unwrap()
    }

    #[test]
    fn identity_frame_matches_quaternion_units() {
        let f = frame_at(&SpherePoint::identity(), &FramePolicy::LeftInvariant).unwrap();
        assert_eq!(f.xi().v, [0.0, 1.0, 0.0, 0.0]);
        assert_eq!(f.sigma().v, [0.0, 0.0, 1.0, 0.0]);
        assert_eq!(f.jsigma().v, [0.0, 0.0, 0.0, 1.0]);
        let i = SpherePoint::new([0.0, 1.0, 0.0, 0.0]).unwrap();
        let f = frame_at(&i, &FramePolicy::LeftInvariant).unwrap();
        assert_eq!(f.xi().v, [-1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn frames_are_oriented_and_orthonormal() {
        let p = sample();
        for policy in [FramePolicy::LeftInvariant, FramePolicy::flow_lift(SpherePoint::identity())] {
            let f = frame_at(&p, &policy).unwrap();
            assert!(f.orthonormality_defect() < 1e-14);
            assert!((f.orientation() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn chart_miss_on_the_orthogonal_fibre() {
        let policy = FramePolicy::flow_lift(SpherePoint::identity());
        let far = SpherePoint::new([0.0, 0.0, 1.0, 0.0]).unwrap();
        assert!(matches!(frame_at(&far, &policy), Err(Error::PolicyChartMiss)));
    }

    #[test]
    fn sigma_xi_bracket_at_identity() {
        let e = SpherePoint::identity();
        let s = Invariant::basis(SIGMA);
        let x = Invariant::basis(XI);
        let exact = lie_bracket(&s, &x, &e, &Fd::default()).unwrap();
        assert_eq!(e.ambient(&exact), [0.0, 0.0, 0.0, 2.0]);
        let oracle = lie_bracket_flow(&s, &x, &e, 1e-3, 1e-12).unwrap();
        assert!(norm4(&[0, 1, 2, 3].map(|k| oracle[k] - [0.0, 0.0, 0.0, 2.0][k])) < 1e-5);
        assert_eq!(lie_bracket(&x, &x, &e, &Fd::default()).unwrap(), [0.0; 3]);
    }

    #[test]
    fn flow_lift_commutes_with_reeb() {
        let policy = FramePolicy::flow_lift(SpherePoint::identity());
        let p = sample();
        let s = FrameField::new(policy, SIGMA);
        let x = FrameField::new(policy, XI);
        let b = lie_bracket(&s, &x, &p, &Fd::default()).unwrap();
        assert!(norm4(&[b[0], b[1], b[2], 0.0]) < 1e-9);
    }

    #[test]
    fn general_bracket_agrees_with_flow_oracle() {
        let policy = FramePolicy::flow_lift(SpherePoint::identity());
        let p = sample();
        let s = FrameField::new(policy, SIGMA);
        let js = FrameField::new(policy, JSIGMA);
        let b = p.ambient(&lie_bracket(&s, &js, &p, &Fd::default()).unwrap());
        let o = lie_bracket_flow(&s, &js, &p, 2e-3, 1e-13).unwrap();
        let gap = norm4(&[0, 1, 2, 3].map(|k| b[k] - o[k]));
        assert!(gap < 1e-4, "gap {gap}");
    }
}
