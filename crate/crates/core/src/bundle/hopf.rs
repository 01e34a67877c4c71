//! Reducible SU(2) fields invariant along the Hopf fibres.
//!
//! With `ρ = χ = arccos|z₁|` and `η` the unit horizontal coframe along the
//! base-angular direction, the ansatz
//! `φ = h(χ)·diag(i, −i)`, `A = (u(χ)ϑ + v(χ)η)·diag(i, −i)`
//! turns the Bogomolny equation into `h' = 0`, `u' = 0`,
//! `v' = 2u − 2v·cot 2χ`.

use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{bogomolny_residual, Domain, Exclusion, FieldKind, FieldSample, MonopoleField};
use crate::error::{Error, Result};
use crate::fd::Fd;
use crate::linalg::{sigma3i, Coef};
use crate::sphere::{dot4, FramePolicy, SpherePoint, UNIT_J};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HopfParams {
    /// Constant Higgs level `h`.
    pub higgs: f64,
    /// Constant fibre component `u` of the connection.
    pub charge: f64,
    /// `v(π/4)`.
    pub twist: f64,
    /// Exclusion radius around the two singular fibres.
    pub margin: f64,
    pub grid: usize,
    pub tol: f64,
}

impl Default for HopfParams {
    fn default() -> Self {
        HopfParams {
            higgs: 0.5,
            charge: 0.3,
            twist: 0.2,
            margin: 0.2,
            grid: 257,
            tol: 1e-5,
        }
    }
}

/// Profiles on a `χ`-grid with node slopes for cubic Hermite interpolation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HopfProfiles {
    pub rho: Vec<f64>,
    pub h: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub dh: Vec<f64>,
    pub du: Vec<f64>,
    pub dv: Vec<f64>,
    pub margin: f64,
    pub max_residual: f64,
}

fn v_slope(u: f64, v: f64, chi: f64) -> f64 {
    2.0 * u - 2.0 * v / (2.0 * chi).tan()
}

fn hermite(x: &[f64], y: &[f64], dy: &[f64], at: f64) -> Result<f64> {
    let n = x.len();
    if n < 2 || at < x[0] || at > x[n - 1] {
        return Err(Error::EvalDomain);
    }
    let k = match x.partition_point(|&xi| xi <= at) {
        0 => 0,
        i if i >= n => n - 2,
        i => i - 1,
    };
    let h = x[k + 1] - x[k];
    let s = (at - x[k]) / h;
    let (s2, s3) = (s * s, s * s * s);
    Ok((2.0 * s3 - 3.0 * s2 + 1.0) * y[k]
        + (s3 - 2.0 * s2 + s) * h * dy[k]
        + (-2.0 * s3 + 3.0 * s2) * y[k + 1]
        + (s3 - s2) * h * dy[k + 1])
}

/// Central-difference slopes, one-sided at the ends.
fn slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|k| {
            let (a, b) = (k.saturating_sub(1), (k + 1).min(n - 1));
            (y[b] - y[a]) / (x[b] - x[a])
        })
        .collect()
}

impl HopfProfiles {
    pub fn eval(&self, rho: f64) -> Result<(f64, f64, f64)> {
        Ok((
            hermite(&self.rho, &self.h, &self.dh, rho)?,
            hermite(&self.rho, &self.u, &self.du, rho)?,
            hermite(&self.rho, &self.v, &self.dv, rho)?,
        ))
    }

    /// Profiles read from a `(rho, h, u, v)` table.
    pub fn from_table(rows: &[[f64; 4]], margin: f64) -> Result<Self> {
        if rows.len() < 2 || rows.windows(2).any(|w| w[1][0] <= w[0][0]) {
            return Err(Error::BadParams("profile table needs increasing rho".into()));
        }
        let col = |k: usize| rows.iter().map(|r| r[k]).collect::<Vec<_>>();
        let rho = col(0);
        let (h, u, v) = (col(1), col(2), col(3));
        Ok(HopfProfiles {
            dh: slopes(&rho, &h),
            du: slopes(&rho, &u),
            dv: slopes(&rho, &v),
            rho,
            h,
            u,
            v,
            margin,
            max_residual: f64::NAN,
        })
    }
}

fn rk4_step(u: f64, v: f64, chi: f64, dx: f64) -> f64 {
    let k1 = v_slope(u, v, chi);
    let k2 = v_slope(u, v + 0.5 * dx * k1, chi + 0.5 * dx);
    let k3 = v_slope(u, v + 0.5 * dx * k2, chi + 0.5 * dx);
    let k4 = v_slope(u, v + dx * k3, chi + dx);
    v + dx / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// Point with `χ = rho` at fibre and base angles `(alpha, beta)`.
pub(crate) fn point_at(rho: f64, alpha: f64, beta: f64) -> SpherePoint {
    SpherePoint::normalize([
        rho.cos() * alpha.cos(),
        rho.cos() * alpha.sin(),
        rho.sin() * beta.cos(),
        rho.sin() * beta.sin(),
    ])
    .expect("nonzero")
}

pub fn solve_hopf_profiles(params: &HopfParams, grid: usize) -> Result<HopfProfiles> {
    if !(params.margin > 0.0 && params.margin < FRAC_PI_2 / 2.0) || grid < 5 {
        return Err(Error::BadParams("hopf profiles need 0 < margin < π/4 and grid ≥ 5".into()));
    }
    let n = grid | 1;
    let lo = 0.5 * params.margin;
    let hi = FRAC_PI_2 - 0.5 * params.margin;
    let dx = (hi - lo) / (n - 1) as f64;
    let rho: Vec<f64> = (0..n).map(|k| lo + k as f64 * dx).collect();
    let mid = n / 2;
    let mut v = vec![0.0; n];
    v[mid] = params.twist;
    for k in mid..n - 1 {
        v[k + 1] = rk4_step(params.charge, v[k], rho[k], dx);
    }
    for k in (1..=mid).rev() {
        v[k - 1] = rk4_step(params.charge, v[k], rho[k], -dx);
    }
    let dv = (0..n).map(|k| v_slope(params.charge, v[k], rho[k])).collect();
    let mut prof = HopfProfiles {
        h: vec![params.higgs; n],
        u: vec![params.charge; n],
        dh: vec![0.0; n],
        du: vec![0.0; n],
        v,
        dv,
        rho,
        margin: params.margin,
        max_residual: 0.0,
    };
    let field = field_from_profiles(Arc::new(prof.clone()));
    let fd = Fd::default();
    let mut worst: f64 = 0.0;
    let probes = 24;
    for k in 0..probes {
        let r = params.margin + (FRAC_PI_2 - 2.0 * params.margin) * (k as f64 + 0.5) / probes as f64;
        let p = point_at(r, 0.37 * k as f64, -0.81 * k as f64 + 0.2);
        worst = worst.max(bogomolny_residual(&field, &p, &FramePolicy::LeftInvariant, &fd)?);
    }
    prof.max_residual = worst;
    if !(worst <= params.tol) {
        return Err(Error::ReductionInconsistent {
            residual: worst,
            tol: params.tol,
        });
    }
    Ok(prof)
}

pub fn field_from_profiles(prof: Arc<HopfProfiles>) -> MonopoleField {
    let domain = Domain {
        excluded: vec![
            Exclusion::Fibre {
                through: SpherePoint::identity(),
                radius: prof.margin,
            },
            Exclusion::Fibre {
                through: SpherePoint::new(UNIT_J).expect("unit"),
                radius: prof.margin,
            },
        ],
    };
    let s3 = sigma3i();
    let eval = move |p: &SpherePoint| -> Result<FieldSample> {
        let (z1, z2) = p.complex();
        let (c, s) = (z1.norm(), z2.norm());
        if c == 0.0 || s == 0.0 {
            return Err(Error::EvalDomain);
        }
        let chi = s.atan2(c);
        let (h, u, v) = prof.eval(chi)?;
        let q = p.q();
        // E = (s/c)(i z₁, 0) − (c/s)(0, i z₂)
        let e = [-(s / c) * q[1], (s / c) * q[0], (c / s) * q[3], -(c / s) * q[2]];
        let eta = [
            dot4(&e, &p.invariant_vector(0)),
            dot4(&e, &p.invariant_vector(1)),
            dot4(&e, &p.invariant_vector(2)),
        ];
        Ok(FieldSample {
            a: [
                s3.scaled(v * eta[0]),
                s3.scaled(v * eta[1]),
                s3.scaled(u + v * eta[2]),
            ],
            phi: s3.scaled(h),
        })
    };
    MonopoleField::new(
        2,
        FieldKind::HopfInvariantAbelian,
        "hopf_invariant_abelian",
        domain,
        Arc::new(eval),
    )
}

pub fn hopf_invariant_abelian(params: &HopfParams) -> Result<MonopoleField> {
    let prof = solve_hopf_profiles(params, params.grid)?;
    Ok(field_from_profiles(Arc::new(prof)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::directional;

    #[test]
    fn profile_matches_closed_form() {
        let p = HopfParams::default();
        let prof = solve_hopf_profiles(&p, 257).unwrap();
        let worst = prof
            .rho
            .iter()
            .zip(&prof.v)
            .map(|(chi, v)| (v - (p.twist - p.charge * (2.0 * chi).cos()) / (2.0 * chi).sin()).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-7, "{worst}");
    }

    #[test]
    fn zero_charge_reduces_to_constant_higgs() {
        let p = HopfParams { charge: 0.0, twist: 0.0, ..HopfParams::default() };
        let prof = solve_hopf_profiles(&p, 33).unwrap();
        assert!(prof.v.iter().all(|v| *v == 0.0));
        assert!(prof.h.iter().all(|h| *h == p.higgs));
        assert_eq!(prof.max_residual, 0.0);
    }

    #[test]
    fn solved_profiles_satisfy_bogomolny() {
        let prof = solve_hopf_profiles(&HopfParams::default(), 257).unwrap();
        assert!(prof.max_residual < 1e-5, "{}", prof.max_residual);
    }

    #[test]
    fn refinement_lowers_the_residual() {
        let p = HopfParams { tol: 1.0, ..HopfParams::default() };
        let r: Vec<f64> = [9, 17, 33]
            .iter()
            .map(|&g| solve_hopf_profiles(&p, g).unwrap().max_residual)
            .collect();
        assert!(r[0] > r[1] && r[1] > r[2], "{r:?}");
    }

    #[test]
    fn fibre_invariance_of_phi() {
        let f = hopf_invariant_abelian(&HopfParams::default()).unwrap();
        let p = point_at(0.7, 0.3, 1.1);
        let d = directional(&|q| f.phi(q), &p, &[0.0, 0.0, 1.0], &Fd::default()).unwrap();
        assert!(d.magnitude_sq().sqrt() < 1e-8);
        assert!(matches!(f.sample(&point_at(0.05, 0.0, 0.0)), Err(Error::EvalDomain)));
    }
}
