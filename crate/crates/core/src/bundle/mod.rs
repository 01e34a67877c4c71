//! Monopole data `(E, ∇, φ)` on the trivial rank-`n` bundle: curvature, the
//! Bogomolny and anti-self-duality residuals, the lift to the cone, and gauge
//! transformations.
//!
//! A field is evaluated on the invariant basis `(σ₀, jσ₀, ξ)`; a frame policy
//! only enters when components are read off along `σ, jσ, ξ`.

mod builtins;
mod hopf;

pub use builtins::{
    constant_higgs, load_field_spec, make_builtin, radial_exp_gauge, random_smooth, singular_gauge, singular_higgs,
    zero, FieldSpec,
};
pub use hopf::{hopf_invariant_abelian, solve_hopf_profiles, HopfParams, HopfProfiles};

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cone::{hodge4, Calibration, ConePoint, Form4Components};
use crate::error::{Error, Result};
use crate::fd::Fd;
use crate::forms::{hodge3, FormComponents};
use crate::linalg::{commutator, det_abs, frob, inverse, zeros, Coef, Endo};
use crate::sphere::{bracket_basis, directional, fibre_distance, geodesic_distance, FramePolicy, SpherePoint};

/// Connection on the invariant basis and the Higgs field at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldSample {
    pub a: [Endo; 3],
    pub phi: Endo,
}

impl FieldSample {
    pub fn zero(n: usize) -> Self {
        FieldSample {
            a: [zeros(n), zeros(n), zeros(n)],
            phi: zeros(n),
        }
    }

    /// `A(V)` for invariant coefficients `v`.
    pub fn along(&self, v: &[f64; 3]) -> Endo {
        let mut out = self.a[0].scaled(v[0]);
        out += self.a[1].scaled(v[1]);
        out += self.a[2].scaled(v[2]);
        out
    }
}

impl Coef for FieldSample {
    fn scaled(&self, s: f64) -> Self {
        FieldSample {
            a: [self.a[0].scaled(s), self.a[1].scaled(s), self.a[2].scaled(s)],
            phi: self.phi.scaled(s),
        }
    }
    fn plus(&self, o: &Self) -> Self {
        FieldSample {
            a: [&self.a[0] + &o.a[0], &self.a[1] + &o.a[1], &self.a[2] + &o.a[2]],
            phi: &self.phi + &o.phi,
        }
    }
    fn magnitude_sq(&self) -> f64 {
        self.a.iter().map(|m| m.magnitude_sq()).sum::<f64>() + self.phi.magnitude_sq()
    }
}

pub trait FieldEval: Send + Sync {
    fn eval(&self, p: &SpherePoint) -> Result<FieldSample>;
}

impl<F> FieldEval for F
where
    F: Fn(&SpherePoint) -> Result<FieldSample> + Send + Sync,
{
    fn eval(&self, p: &SpherePoint) -> Result<FieldSample> {
        self(p)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Zero,
    ConstantHiggs,
    HopfInvariantAbelian,
    User,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Exclusion {
    Ball { center: SpherePoint, radius: f64 },
    Fibre { through: SpherePoint, radius: f64 },
}

/// Points where a field is not smooth, with exclusion radii.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub excluded: Vec<Exclusion>,
}

impl Domain {
    pub fn contains(&self, p: &SpherePoint) -> bool {
        self.excluded.iter().all(|e| match e {
            Exclusion::Ball { center, radius } => geodesic_distance(p, center) >= *radius,
            Exclusion::Fibre { through, radius } => fibre_distance(p, through) >= *radius,
        })
    }

    pub fn check(&self, p: &SpherePoint) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::EvalDomain)
        }
    }
}

#[derive(Clone)]
pub struct MonopoleField {
    pub rank: usize,
    pub kind: FieldKind,
    pub label: String,
    pub domain: Domain,
    eval: Arc<dyn FieldEval>,
}

impl std::fmt::Debug for MonopoleField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MonopoleField")
            .field("rank", &self.rank)
            .field("kind", &self.kind)
            .field("label", &self.label)
            .finish()
    }
}

/// Components along the policy frame `(σ, jσ, ξ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameSample {
    pub a: [Endo; 3],
    pub phi: Endo,
}

impl MonopoleField {
    pub fn new(
        rank: usize,
        kind: FieldKind,
        label: impl Into<String>,
        domain: Domain,
        eval: Arc<dyn FieldEval>,
    ) -> Self {
        MonopoleField {
            rank,
            kind,
            label: label.into(),
            domain,
            eval,
        }
    }

    pub fn sample(&self, p: &SpherePoint) -> Result<FieldSample> {
        self.domain.check(p)?;
        self.eval.eval(p)
    }

    pub fn in_frame(&self, p: &SpherePoint, policy: &FramePolicy) -> Result<FrameSample> {
        let s = self.sample(p)?;
        let rows = policy.rows(p)?;
        Ok(FrameSample {
            a: rows.map(|r| s.along(&r)),
            phi: s.phi,
        })
    }

    pub fn phi(&self, p: &SpherePoint) -> Result<Endo> {
        Ok(self.sample(p)?.phi)
    }

    pub fn is_abelian_at(&self, p: &SpherePoint) -> Result<bool> {
        let s = self.sample(p)?;
        let all = [&s.a[0], &s.a[1], &s.a[2], &s.phi];
        let off = all
            .iter()
            .flat_map(|m| (0..m.nrows()).flat_map(move |r| (0..m.ncols()).filter(move |c| *c != r).map(move |c| m[(r, c)])))
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        Ok(off == 0.0)
    }
}

/// `∇_V f = V(f) + [A(V), f]` for an endomorphism-valued `f`.
pub fn covariant(
    field: &MonopoleField,
    f: &dyn Fn(&SpherePoint) -> Result<Endo>,
    p: &SpherePoint,
    v: &[f64; 3],
    fd: &Fd,
) -> Result<Endo> {
    let d = directional(f, p, v, fd)?;
    let a = field.sample(p)?.along(v);
    Ok(d + commutator(&a, &f(p)?))
}

/// Derivatives of the whole sample along `e₀, e₁, e₂`.
fn sample_derivatives(field: &MonopoleField, p: &SpherePoint, fd: &Fd) -> Result<[FieldSample; 3]> {
    let d = |a: usize| {
        let mut v = [0.0; 3];
        v[a] = 1.0;
        directional(&|q| field.sample(q), p, &v, fd)
    };
    Ok([d(0)?, d(1)?, d(2)?])
}

/// `F(e_a, e_b)` on the invariant basis, pairs `(0,1), (0,2), (1,2)`.
pub fn curvature_invariant(field: &MonopoleField, p: &SpherePoint, fd: &Fd) -> Result<[Endo; 3]> {
    let s = field.sample(p)?;
    let d = sample_derivatives(field, p, fd)?;
    let f = |a: usize, b: usize| -> Endo {
        let c = bracket_basis(a, b);
        let mut out = &d[a].a[b] - &d[b].a[a];
        out -= s.along(&c);
        out += commutator(&s.a[a], &s.a[b]);
        out
    };
    Ok([f(0, 1), f(0, 2), f(1, 2)])
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureComponents {
    pub f12: Endo,
    pub f13: Endo,
    pub f23: Endo,
}

impl CurvatureComponents {
    pub fn as_form(&self) -> FormComponents<Endo> {
        FormComponents::two([self.f12.clone(), self.f13.clone(), self.f23.clone()])
    }

    /// `F(X_k, X_l)` with antisymmetry.
    pub fn get(&self, k: usize, l: usize) -> Endo {
        let n = self.f12.nrows();
        match (k, l) {
            (0, 1) => self.f12.clone(),
            (0, 2) => self.f13.clone(),
            (1, 2) => self.f23.clone(),
            (1, 0) => -self.f12.clone(),
            (2, 0) => -self.f13.clone(),
            (2, 1) => -self.f23.clone(),
            _ => zeros(n),
        }
    }
}

fn tensorial(inv: &[Endo; 3], rows: &[[f64; 3]; 3], k: usize, l: usize) -> Endo {
    let n = inv[0].nrows();
    let mut out = zeros(n);
    for (idx, (a, b)) in [(0, 1), (0, 2), (1, 2)].into_iter().enumerate() {
        let w = rows[k][a] * rows[l][b] - rows[k][b] * rows[l][a];
        if w != 0.0 {
            out += inv[idx].scaled(w);
        }
    }
    out
}

pub fn curvature_components(
    field: &MonopoleField,
    p: &SpherePoint,
    policy: &FramePolicy,
    fd: &Fd,
) -> Result<CurvatureComponents> {
    let inv = curvature_invariant(field, p, fd)?;
    let rows = policy.rows(p)?;
    Ok(CurvatureComponents {
        f12: tensorial(&inv, &rows, 0, 1),
        f13: tensorial(&inv, &rows, 0, 2),
        f23: tensorial(&inv, &rows, 1, 2),
    })
}

/// `(∇_σ φ, ∇_{jσ} φ, ∇_ξ φ)`.
pub fn nabla_phi(field: &MonopoleField, p: &SpherePoint, policy: &FramePolicy, fd: &Fd) -> Result<[Endo; 3]> {
    let rows = policy.rows(p)?;
    let phi = |q: &SpherePoint| field.phi(q);
    Ok([
        covariant(field, &phi, p, &rows[0], fd)?,
        covariant(field, &phi, p, &rows[1], fd)?,
        covariant(field, &phi, p, &rows[2], fd)?,
    ])
}

/// Components of `∇φ − ½⋆F` on the frame.
pub fn bogomolny_defect(
    field: &MonopoleField,
    p: &SpherePoint,
    policy: &FramePolicy,
    fd: &Fd,
) -> Result<[Endo; 3]> {
    let np = nabla_phi(field, p, policy, fd)?;
    let star = hodge3(&curvature_components(field, p, policy, fd)?.as_form(), 1.0)?;
    Ok([0, 1, 2].map(|k| &np[k] - star.c[k].scaled(0.5)))
}

pub fn bogomolny_residual(field: &MonopoleField, p: &SpherePoint, policy: &FramePolicy, fd: &Fd) -> Result<f64> {
    let d = bogomolny_defect(field, p, policy, fd)?;
    Ok(d.iter().map(|m| m.magnitude_sq()).sum::<f64>().sqrt())
}

/// The connection and curvature of `∇′ = d + π*A + φ/(t√c) dt`.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftedSample {
    pub connection: [Endo; 4],
    pub curvature: Form4Components<Endo>,
    /// `F′` rebuilt as `π*F − ⋆′(π*F)`, which equals `F′` on solutions.
    pub from_bogomolny: Form4Components<Endo>,
}

pub fn lift_curvature(
    field: &MonopoleField,
    cp: &ConePoint,
    policy: &FramePolicy,
    cal: &Calibration,
    fd: &Fd,
) -> Result<LiftedSample> {
    let fs = field.in_frame(&cp.p, policy)?;
    let k = 1.0 / (cp.t * cal.c.sqrt());
    let curv = curvature_components(field, &cp.p, policy, fd)?;
    let np = nabla_phi(field, &cp.p, policy, fd)?;
    let [a0, a1, a2] = fs.a;
    let connection = [a0, a1, a2, fs.phi.scaled(k)];
    let curvature = Form4Components {
        c: [
            curv.f12.clone(),
            curv.f13.clone(),
            np[0].scaled(k),
            curv.f23.clone(),
            np[1].scaled(k),
            np[2].scaled(k),
        ],
    };
    let pull = Form4Components::pullback(&curv.as_form());
    let from_bogomolny = pull.minus(&hodge4(cal, cp.t, &pull));
    Ok(LiftedSample {
        connection,
        curvature,
        from_bogomolny,
    })
}

/// `‖F′ + ⋆′F′‖` in the `ḡ`-norm.
pub fn asd_residual(
    field: &MonopoleField,
    cp: &ConePoint,
    policy: &FramePolicy,
    cal: &Calibration,
    fd: &Fd,
) -> Result<f64> {
    let l = lift_curvature(field, cp, policy, cal, fd)?;
    Ok(l.curvature.plus(&hodge4(cal, cp.t, &l.curvature)).norm(cp.t, cal.c))
}

/// `‖d_∇F‖` over the invariant basis triple.
pub fn bianchi_residual(field: &MonopoleField, p: &SpherePoint, fd: &Fd) -> Result<f64> {
    let f = |q: &SpherePoint| curvature_invariant(field, q, fd);
    let f0 = f(p)?;
    let s = field.sample(p)?;
    let get = |m: &[Endo; 3], a: usize, b: usize| -> Endo {
        match (a, b) {
            (0, 1) => m[0].clone(),
            (0, 2) => m[1].clone(),
            (1, 2) => m[2].clone(),
            (1, 0) => -m[0].clone(),
            (2, 0) => -m[1].clone(),
            (2, 1) => -m[2].clone(),
            _ => zeros(field.rank),
        }
    };
    let cov = |x: usize, a: usize, b: usize| -> Result<Endo> {
        let mut v = [0.0; 3];
        v[x] = 1.0;
        let d = directional(&|q| Ok(get(&f(q)?, a, b)), p, &v, fd)?;
        Ok(d + commutator(&s.a[x], &get(&f0, a, b)))
    };
    let on = |br: [f64; 3], z: usize| -> Endo {
        let mut out = zeros(field.rank);
        for k in 0..3 {
            if br[k] != 0.0 {
                out += get(&f0, k, z).scaled(br[k]);
            }
        }
        out
    };
    let (x, y, z) = (0, 1, 2);
    let d = cov(x, y, z)? - cov(y, x, z)? + cov(z, x, y)? - on(bracket_basis(x, y), z)
        + on(bracket_basis(x, z), y)
        - on(bracket_basis(y, z), x);
    Ok(frob(&d))
}

/// A pointwise invertible change of frame.
pub trait Gauge: Send + Sync {
    fn at(&self, p: &SpherePoint) -> Result<Endo>;
}

impl<F> Gauge for F
where
    F: Fn(&SpherePoint) -> Result<Endo> + Send + Sync,
{
    fn at(&self, p: &SpherePoint) -> Result<Endo> {
        self(p)
    }
}

pub const SINGULAR_GAUGE_TOL: f64 = 1e-12;

fn checked_inverse(tau: &Endo) -> Result<Endo> {
    let d = det_abs(tau);
    if !(d > SINGULAR_GAUGE_TOL) {
        return Err(Error::SingularGauge(d));
    }
    inverse(tau).ok_or(Error::SingularGauge(d))
}

/// Pointwise inverse of a gauge.
pub fn inverse_gauge(tau: Arc<dyn Gauge>) -> Arc<dyn Gauge> {
    Arc::new(move |p: &SpherePoint| checked_inverse(&tau.at(p)?))
}

/// `A ↦ τ⁻¹Aτ + τ⁻¹dτ`, `φ ↦ τ⁻¹φτ`.
pub fn gauge_transform(field: &MonopoleField, tau: Arc<dyn Gauge>, fd: Fd) -> MonopoleField {
    let base = field.clone();
    let t = tau.clone();
    let eval = move |p: &SpherePoint| -> Result<FieldSample> {
        let s = base.sample(p)?;
        let g = t.at(p)?;
        let gi = checked_inverse(&g)?;
        let mut a = s.a.clone();
        for k in 0..3 {
            let mut v = [0.0; 3];
            v[k] = 1.0;
            let dg = directional(&|q| t.at(q), p, &v, &fd)?;
            a[k] = &gi * &s.a[k] * &g + &gi * dg;
        }
        Ok(FieldSample {
            a,
            phi: &gi * &s.phi * &g,
        })
    };
    MonopoleField::new(
        field.rank,
        FieldKind::User,
        format!("{}+gauge", field.label),
        field.domain.clone(),
        Arc::new(eval),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{mat_exp, sigma3i, su_defect};
    use crate::rng;

    fn pts() -> Vec<SpherePoint> {
        (0..4).map(|k| rng::sphere_sample(11, k)).collect()
    }

    fn unitary_gauge(seed: u64) -> Arc<dyn Gauge> {
        let mut r = rng::stream(seed, 99);
        let gens: Vec<Endo> = (0..5).map(|_| rng::su(&mut r, 2, 0.4)).collect();
        Arc::new(move |p: &SpherePoint| {
            let q = p.q();
            let mut x = gens[0].clone();
            for k in 0..4 {
                x += gens[k + 1].scaled(q[k]);
            }
            Ok(mat_exp(&x))
        })
    }

    #[test]
    fn trivial_fields_have_no_curvature_and_solve_bogomolny() {
        let fd = Fd::default();
        for f in [zero(2), constant_higgs(1.3)] {
            for p in pts() {
                let c = curvature_components(&f, &p, &FramePolicy::LeftInvariant, &fd).unwrap();
                assert_eq!(frob(&c.f12) + frob(&c.f13) + frob(&c.f23), 0.0);
                assert!(bogomolny_residual(&f, &p, &FramePolicy::LeftInvariant, &fd).unwrap() < 1e-12);
                let np = nabla_phi(&f, &p, &FramePolicy::LeftInvariant, &fd).unwrap();
                assert!(np.iter().all(|m| frob(m) == 0.0));
            }
        }
        let p = pts()[0];
        assert_eq!(constant_higgs(1.0).phi(&p).unwrap(), sigma3i());
    }

    #[test]
    fn curvature_converges_at_second_order() {
        let f = random_smooth(2, 5, 0.7);
        let p = pts()[1];
        let exact = curvature_invariant(&f, &p, &Fd::fourth(1e-3)).unwrap();
        let e1 = curvature_invariant(&f, &p, &Fd::second(2e-2)).unwrap();
        let e2 = curvature_invariant(&f, &p, &Fd::second(1e-2)).unwrap();
        let g1 = frob(&(&e1[0] - &exact[0]));
        let g2 = frob(&(&e2[0] - &exact[0]));
        assert!((g1 / g2 - 4.0).abs() < 0.2, "{}", g1 / g2);
    }

    #[test]
    fn curvature_and_higgs_derivatives_stay_in_su() {
        let f = random_smooth(2, 3, 0.8);
        let p = pts()[2];
        let fd = Fd::default();
        let c = curvature_components(&f, &p, &FramePolicy::LeftInvariant, &fd).unwrap();
        for m in [&c.f12, &c.f13, &c.f23] {
            assert!(su_defect(m) < 1e-8);
        }
        for m in nabla_phi(&f, &p, &FramePolicy::LeftInvariant, &fd).unwrap() {
            assert!(su_defect(&m) < 1e-8);
        }
    }

    #[test]
    fn residuals_are_gauge_invariant() {
        let f = random_smooth(2, 8, 0.6);
        let g = gauge_transform(&f, unitary_gauge(4), Fd::default());
        let fd = Fd::default();
        let cal = Calibration::ROUND;
        for p in pts() {
            let a = bogomolny_residual(&f, &p, &FramePolicy::LeftInvariant, &fd).unwrap();
            let b = bogomolny_residual(&g, &p, &FramePolicy::LeftInvariant, &fd).unwrap();
            assert!((a - b).abs() < 1e-7, "{a} {b}");
            let cp = ConePoint::new(p, 1.4).unwrap();
            let a = asd_residual(&f, &cp, &FramePolicy::LeftInvariant, &cal, &fd).unwrap();
            let b = asd_residual(&g, &cp, &FramePolicy::LeftInvariant, &cal, &fd).unwrap();
            assert!((a - b).abs() < 1e-7);
        }
    }

    #[test]
    fn gauge_round_trip_and_identity() {
        let f = random_smooth(2, 9, 0.6);
        let tau = unitary_gauge(5);
        let back = gauge_transform(&gauge_transform(&f, tau.clone(), Fd::default()), inverse_gauge(tau), Fd::default());
        let id = gauge_transform(&f, Arc::new(|_: &SpherePoint| Ok(crate::linalg::identity(2))), Fd::default());
        for p in pts() {
            let (x, y, z) = (f.sample(&p).unwrap(), back.sample(&p).unwrap(), id.sample(&p).unwrap());
            assert!(x.minus(&y).magnitude_sq().sqrt() < 1e-9);
            assert_eq!(x, z);
        }
    }

    #[test]
    fn singular_gauge_is_rejected() {
        let g = gauge_transform(&zero(2), Arc::new(|_: &SpherePoint| Ok(zeros(2))), Fd::default());
        assert!(matches!(g.sample(&pts()[0]), Err(Error::SingularGauge(_))));
    }

    #[test]
    fn higgs_covariance_under_gauge() {
        let f = random_smooth(2, 10, 0.5);
        let tau = unitary_gauge(6);
        let g = gauge_transform(&f, tau.clone(), Fd::default());
        let fd = Fd::default();
        let p = pts()[3];
        let t = tau.at(&p).unwrap();
        let ti = inverse(&t).unwrap();
        let a = nabla_phi(&f, &p, &FramePolicy::LeftInvariant, &fd).unwrap();
        let b = nabla_phi(&g, &p, &FramePolicy::LeftInvariant, &fd).unwrap();
        for k in 0..3 {
            assert!(frob(&(&ti * &a[k] * &t - &b[k])) < 1e-8);
        }
    }

    #[test]
    fn lift_and_asd_chain() {
        let f = random_smooth(2, 12, 0.7);
        let fd = Fd::default();
        let cal = Calibration::ROUND;
        for (p, t) in pts().into_iter().zip([1.0, 1.3, 1.7, 2.0]) {
            let cp = ConePoint::new(p, t).unwrap();
            let b = bogomolny_residual(&f, &p, &FramePolicy::LeftInvariant, &fd).unwrap();
            let asd = asd_residual(&f, &cp, &FramePolicy::LeftInvariant, &cal, &fd).unwrap();
            assert!((asd - 2f64.sqrt() * 2.0 * b / (t * t)).abs() < 1e-6, "{asd} {b}");
        }
        let cp = ConePoint::new(pts()[0], 2.0).unwrap();
        let l = lift_curvature(&constant_higgs(1.0), &cp, &FramePolicy::LeftInvariant, &cal, &fd).unwrap();
        assert_eq!(l.connection[3], sigma3i().scaled(0.5));
        assert!(asd_residual(&constant_higgs(1.0), &cp, &FramePolicy::LeftInvariant, &cal, &fd).unwrap() < 1e-10);
    }

    #[test]
    fn bianchi_identity_holds() {
        let fd = Fd::default();
        for f in [random_smooth(2, 2, 0.5), hopf_invariant_abelian(&HopfParams::default()).unwrap()] {
            let p = SpherePoint::normalize([0.6, 0.2, 0.5, -0.4]).unwrap();
            assert!(bianchi_residual(&f, &p, &fd).unwrap() < 1e-6);
        }
    }
}
