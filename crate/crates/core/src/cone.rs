//! The cone `N = S³ × (0, ∞)` with metric `ḡ = t²g + dt²/(4c)`, its complex
//! structure, hermitian forms, four-dimensional Hodge star, the embedding
//! into `ℂ² ∖ {0}`, and the convention calibration.
//!
//! Tangent vectors are carried as coordinate components on `(σ, jσ, ξ, ∂t)`.
//! 2-forms are carried on the coframe `(σ*, (jσ)*, ϑ, dt)` in the pair order
//! `01, 02, 03, 12, 13, 23`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fd::Fd;
use crate::forms::{hodge3, FormComponents};
use crate::linalg::Coef;
use crate::sphere::{
    frame_at, lie_bracket, ricci_xi, FrameField, FramePolicy, RoundMetric, SpherePoint, JSIGMA,
    SIGMA, XI,
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConePoint {
    pub p: SpherePoint,
    pub t: f64,
}

impl ConePoint {
    pub fn new(p: SpherePoint, t: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::BadParams(format!("cone radius must be positive, got {t}")));
        }
        Ok(ConePoint { p, t })
    }
}

pub type ConeVec = [f64; 4];

/// Sign and normalization conventions fixed by [`calibrate_conventions`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Calibration {
    pub c: f64,
    pub mu: f64,
    pub orient_sign: f64,
    pub omega_sign: f64,
    /// Sign in `J(ξ/t) = reeb_sign · 2√c ∂t`.
    pub reeb_sign: f64,
}

impl Default for Calibration {
    fn default() -> Self {
        Calibration::ROUND
    }
}

pub const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

fn pair_index(a: usize, b: usize) -> Option<(usize, f64)> {
    if a == b {
        return None;
    }
    let (lo, hi, s) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    PAIRS.iter().position(|&pq| pq == (lo, hi)).map(|k| (k, s))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Form4Components<T> {
    pub c: [T; 6],
}

impl<T: Coef> Form4Components<T> {
    pub fn from_fn(f: impl Fn(usize, usize) -> T) -> Self {
        Form4Components {
            c: PAIRS.map(|(a, b)| f(a, b)),
        }
    }

    /// `F(X_a, X_b)` with antisymmetry.
    pub fn get(&self, a: usize, b: usize) -> Option<T> {
        pair_index(a, b).map(|(k, s)| self.c[k].scaled(s))
    }

    pub fn minus(&self, other: &Self) -> Self {
        Form4Components {
            c: [0, 1, 2, 3, 4, 5].map(|k| self.c[k].minus(&other.c[k])),
        }
    }

    pub fn plus(&self, other: &Self) -> Self {
        Form4Components {
            c: [0, 1, 2, 3, 4, 5].map(|k| self.c[k].plus(&other.c[k])),
        }
    }

    /// Components on the `ḡ`-orthonormal frame `{σ/t, jσ/t, ξ/t, 2√c ∂t}`.
    pub fn orthonormal(&self, t: f64, c: f64) -> Self {
        let s = unit_scales(t, c);
        Form4Components {
            c: [0, 1, 2, 3, 4, 5].map(|k| {
                let (a, b) = PAIRS[k];
                self.c[k].scaled(s[a] * s[b])
            }),
        }
    }

    pub fn from_orthonormal(&self, t: f64, c: f64) -> Self {
        let s = unit_scales(t, c);
        Form4Components {
            c: [0, 1, 2, 3, 4, 5].map(|k| {
                let (a, b) = PAIRS[k];
                self.c[k].scaled(1.0 / (s[a] * s[b]))
            }),
        }
    }

    /// Pointwise `ḡ`-norm.
    pub fn norm(&self, t: f64, c: f64) -> f64 {
        self.orthonormal(t, c)
            .c
            .iter()
            .map(|x| x.magnitude_sq())
            .sum::<f64>()
            .sqrt()
    }

    /// Pullback of a 2-form on the sphere.
    pub fn pullback(f: &FormComponents<T>) -> Self {
        let z = f.c[0].scaled(0.0);
        Form4Components {
            c: [
                f.c[0].clone(),
                f.c[1].clone(),
                z.clone(),
                f.c[2].clone(),
                z.clone(),
                z,
            ],
        }
    }

    /// `α ∧ dt` for a 1-form `α` on the sphere.
    pub fn wedge_dt(alpha: &FormComponents<T>) -> Self {
        let z = alpha.c[0].scaled(0.0);
        Form4Components {
            c: [
                z.clone(),
                z.clone(),
                alpha.c[0].clone(),
                z,
                alpha.c[1].clone(),
                alpha.c[2].clone(),
            ],
        }
    }
}

impl Form4Components<f64> {
    /// Coefficient of `σ*∧(jσ)*∧ϑ∧dt` in `α ∧ β`.
    pub fn wedge_top(&self, other: &Self) -> f64 {
        let (a, b) = (&self.c, &other.c);
        a[0] * b[5] - a[1] * b[4] + a[2] * b[3] + a[3] * b[2] - a[4] * b[1] + a[5] * b[0]
    }
}

fn unit_scales(t: f64, c: f64) -> [f64; 4] {
    [1.0 / t, 1.0 / t, 1.0 / t, 2.0 * c.sqrt()]
}

impl Calibration {
    pub const ROUND: Calibration = Calibration {
        c: 1.0,
        mu: 0.5,
        orient_sign: 1.0,
        omega_sign: -1.0,
        reeb_sign: -1.0,
    };

    /// Diagonal of `ḡ` on `(σ, jσ, ξ, ∂t)`.
    pub fn metric(&self, t: f64) -> [f64; 4] {
        [t * t, t * t, t * t, 0.25 / self.c]
    }

    pub fn inner(&self, t: f64, u: &ConeVec, v: &ConeVec) -> f64 {
        let g = self.metric(t);
        (0..4).map(|k| g[k] * u[k] * v[k]).sum()
    }

    pub fn j(&self, t: f64, v: &ConeVec) -> ConeVec {
        let r = self.reeb_sign * 2.0 * t * self.c.sqrt();
        [-v[1], v[0], -v[3] / r, v[2] * r]
    }

    /// The calibrated closed form `t²ω + omega_sign·(t/√c)ϑ∧dt`.
    pub fn omega_tilde(&self, t: f64) -> Form4Components<f64> {
        Form4Components {
            c: [t * t, 0.0, 0.0, 0.0, 0.0, self.omega_sign * t / self.c.sqrt()],
        }
    }

    /// The defining contraction `Ω(u, v) = ḡ(Ju, v)`.
    pub fn omega_def(&self, t: f64) -> Form4Components<f64> {
        let e = |a: usize| {
            let mut v = [0.0; 4];
            v[a] = 1.0;
            v
        };
        Form4Components::from_fn(|a, b| self.inner(t, &self.j(t, &e(a)), &e(b)))
    }

    /// Sign of `½Ω̃∧Ω̃` against `σ*∧(jσ)*∧ϑ∧dt`; fixes the 4-orientation.
    pub fn volume_sign(&self) -> f64 {
        let w = self.omega_tilde(1.0);
        (0.5 * w.wedge_top(&w)).signum()
    }

    pub fn embed(&self, cp: &ConePoint) -> [Complex64; 2] {
        let (z1, z2) = cp.p.complex();
        let r = cp.t.powf(self.mu);
        [z1 * r, z2 * r]
    }

    pub fn unembed(&self, x: &[Complex64; 2]) -> Result<ConePoint> {
        let r = (x[0].norm_sqr() + x[1].norm_sqr()).sqrt();
        if r == 0.0 || !r.is_finite() {
            return Err(Error::OriginNotInCone);
        }
        let p = SpherePoint::normalize([x[0].re, x[0].im, x[1].re, x[1].im])?;
        ConePoint::new(p, r.powf(1.0 / self.mu))
    }

    /// `J` on an ambient vector `(v ∈ T_qℝ⁴ tangent to S³, dt-component)`.
    pub fn j_apply(&self, cp: &ConePoint, v: &[f64; 5]) -> [f64; 5] {
        let coeffs = cp.p.coeffs_of(&[v[0], v[1], v[2], v[3]]);
        let w = self.j(cp.t, &[coeffs[0], coeffs[1], coeffs[2], v[4]]);
        let a = cp.p.ambient(&[w[0], w[1], w[2]]);
        [a[0], a[1], a[2], a[3], w[3]]
    }
}

/// `⋆′` for `ḡ` with the orientation of `½Ω̃∧Ω̃`.
pub fn hodge4<T: Coef>(cal: &Calibration, t: f64, f: &Form4Components<T>) -> Form4Components<T> {
    let e = cal.volume_sign();
    let o = f.orthonormal(t, cal.c);
    let c = &o.c;
    let star = Form4Components {
        c: [
            c[5].scaled(e),
            c[4].scaled(-e),
            c[3].scaled(e),
            c[2].scaled(e),
            c[1].scaled(-e),
            c[0].scaled(e),
        ],
    };
    star.from_orthonormal(t, cal.c)
}

/// `‖⋆′(π*F) + (1/(2t√c))(⋆F)∧dt‖`.
pub fn star_identity_residual<T: Coef>(cal: &Calibration, t: f64, f: &FormComponents<T>) -> Result<f64> {
    if f.degree != 2 {
        return Err(Error::BadDegree(f.degree));
    }
    let lhs = hodge4(cal, t, &Form4Components::pullback(f));
    let star = hodge3(f, cal.orient_sign)?;
    let rhs = Form4Components::wedge_dt(&star).c.map(|x| x.scaled(-1.0 / (2.0 * t * cal.c.sqrt())));
    Ok(lhs.minus(&Form4Components { c: rhs }).norm(t, cal.c))
}

/// `½Ω̃∧Ω̃` evaluated on the positively oriented orthonormal frame.
pub fn unit_frame_volume(cal: &Calibration, t: f64) -> f64 {
    let w = cal.omega_tilde(t).orthonormal(t, cal.c);
    (0.5 * w.wedge_top(&w)).abs()
}

/// Gap between `ι_n(½Ω̃∧Ω̃)` at `t = 1` (with `n = 2√c ∂t`) and
/// `orient_sign·(1/√c)dϑ∧ϑ`, both as multiples of `σ*∧(jσ)*∧ϑ`.
pub fn induced_volume_gap(cal: &Calibration, p: &SpherePoint, policy: &FramePolicy, fd: &Fd) -> Result<f64> {
    let w = cal.omega_tilde(1.0);
    let top = 0.5 * w.wedge_top(&w);
    // ι_∂t(σ*∧(jσ)*∧ϑ∧dt) = −σ*∧(jσ)*∧ϑ
    let lhs = -2.0 * cal.c.sqrt() * top;
    // dϑ(σ, jσ) = −ϑ([σ, jσ]) since ϑ is constant on the frame
    let frame = frame_at(p, policy)?;
    let br = frame.from_invariant(&lie_bracket(
        &FrameField::new(*policy, SIGMA),
        &FrameField::new(*policy, JSIGMA),
        p,
        fd,
    )?);
    let dtheta = -br[XI];
    let rhs = cal.orient_sign / cal.c.sqrt() * dtheta;
    Ok((lhs - rhs).abs())
}

/// Largest `|dΩ̃(X_a, X_b, X_c)|` over frame triples, by the invariant formula
/// with finite differences along the frame flows and in `t`.
pub fn closure_residual(cal: &Calibration, cp: &ConePoint, policy: &FramePolicy, fd: &Fd) -> Result<f64> {
    let frame = frame_at(&cp.p, policy)?;
    let fields = [0, 1, 2].map(|k| FrameField::new(*policy, k));
    let omega = |q: &SpherePoint, t: f64, a: usize, b: usize| -> Result<f64> {
        // components on the local frame are the same at every point of the chart
        frame_at(q, policy)?;
        Ok(cal.omega_tilde(t).get(a, b).unwrap_or(0.0))
    };
    let deriv = |x: usize, a: usize, b: usize| -> Result<f64> {
        if x == 3 {
            fd.derivative(|s| omega(&cp.p, cp.t + s, a, b))
        } else {
            let v = frame.rows[x];
            crate::sphere::directional(&|q: &SpherePoint| omega(q, cp.t, a, b), &cp.p, &v, fd)
        }
    };
    let mut br = [[[0.0; 4]; 4]; 4];
    for a in 0..3 {
        for b in 0..3 {
            if a != b {
                let v = frame.from_invariant(&lie_bracket(&fields[a], &fields[b], &cp.p, fd)?);
                br[a][b] = [v[0], v[1], v[2], 0.0];
            }
        }
    }
    let om = cal.omega_tilde(cp.t);
    let on = |v: &[f64; 4], z: usize| -> f64 { (0..4).map(|k| v[k] * om.get(k, z).unwrap_or(0.0)).sum() };
    let mut worst: f64 = 0.0;
    for (x, y, z) in [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)] {
        let d = deriv(x, y, z)? - deriv(y, x, z)? + deriv(z, x, y)? - on(&br[x][y], z) + on(&br[x][z], y)
            - on(&br[y][z], x);
        worst = worst.max(d.abs());
    }
    Ok(worst)
}

fn c2_to_real(x: &[Complex64; 2]) -> [f64; 4] {
    [x[0].re, x[0].im, x[1].re, x[1].im]
}

/// Pushforward of the coordinate frame through the embedding, by finite
/// differences (column `k` is the image of `X_k`).
fn pushforward(cal: &Calibration, cp: &ConePoint, fd: &Fd) -> Result<nalgebra::Matrix4<f64>> {
    let mut m = nalgebra::Matrix4::zeros();
    for k in 0..4 {
        let col: [f64; 4] = if k == 3 {
            fd.derivative(|s| Ok(c2_to_real(&cal.embed(&ConePoint::new(cp.p, cp.t + s)?))))?
        } else {
            fd.derivative(|s| {
                let q = cp.p.flow_invariant(k, s);
                Ok(c2_to_real(&cal.embed(&ConePoint { p: q, t: cp.t })))
            })?
        };
        for r in 0..4 {
            m[(r, k)] = col[r];
        }
    }
    Ok(m)
}

/// Largest entry of `P⁻¹ J₀ P − J` on the invariant coordinate frame, where
/// `J₀` is multiplication by `i` on `ℂ²`.
pub fn pullback_gap(cal: &Calibration, cp: &ConePoint, fd: &Fd) -> Result<f64> {
    let p = pushforward(cal, cp, fd)?;
    let j0 = nalgebra::Matrix4::new(
        0.0, -1.0, 0.0, 0.0, //
        1.0, 0.0, 0.0, 0.0, //
        0.0, 0.0, 0.0, -1.0, //
        0.0, 0.0, 1.0, 0.0,
    );
    let inv = p.try_inverse().ok_or(Error::FrameDegenerate)?;
    let pulled = inv * j0 * p;
    let mut worst: f64 = 0.0;
    for k in 0..4 {
        let mut e = [0.0; 4];
        e[k] = 1.0;
        let jk = cal.j(cp.t, &e);
        for r in 0..4 {
            worst = worst.max((pulled[(r, k)] - jk[r]).abs());
        }
    }
    Ok(worst)
}

/// `J² + id` and `ḡ(J·, J·) − ḡ` on the coordinate basis.
pub fn complex_structure_defects(cal: &Calibration, t: f64) -> (f64, f64) {
    let mut j2: f64 = 0.0;
    let mut inv: f64 = 0.0;
    for a in 0..4 {
        let mut e = [0.0; 4];
        e[a] = 1.0;
        let jj = cal.j(t, &cal.j(t, &e));
        for k in 0..4 {
            j2 = j2.max((jj[k] + e[k]).abs());
        }
        for b in 0..4 {
            let mut f = [0.0; 4];
            f[b] = 1.0;
            let lhs = cal.inner(t, &cal.j(t, &e), &cal.j(t, &f));
            inv = inv.max((lhs - cal.inner(t, &e, &f)).abs());
        }
    }
    (j2, inv)
}

/// `min_u Ω̃(u, Ju)` over the coordinate basis; positive for a Kähler pair.
pub fn positivity(cal: &Calibration, t: f64) -> f64 {
    let om = cal.omega_tilde(t);
    (0..4)
        .map(|a| {
            let mut e = [0.0; 4];
            e[a] = 1.0;
            let je = cal.j(t, &e);
            (0..4).map(|b| je[b] * om.get(a, b).unwrap_or(0.0)).sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationTolerances {
    pub closure: f64,
    pub j_squared: f64,
    pub pullback: f64,
    pub star_identity: f64,
}

impl Default for CalibrationTolerances {
    fn default() -> Self {
        CalibrationTolerances {
            closure: 1e-6,
            j_squared: 1e-12,
            pullback: 1e-8,
            star_identity: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeRow {
    pub calibration: Calibration,
    pub closure: f64,
    pub j_squared: f64,
    pub metric_invariance: f64,
    pub positivity: f64,
    pub pullback: f64,
    pub star_identity: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationOutcome {
    pub calibration: Calibration,
    pub rows: Vec<LatticeRow>,
}

/// Scans the finite convention lattice and returns the unique passing point.
pub fn calibrate_conventions(
    tol: &CalibrationTolerances,
    probes: &[ConePoint],
    fd: &Fd,
) -> Result<CalibrationOutcome> {
    if probes.is_empty() {
        return Err(Error::Empty);
    }
    let policy = FramePolicy::LeftInvariant;
    let c = ricci_xi(&RoundMetric, &probes[0].p, &policy, fd)?;
    let forms = [
        FormComponents::two([1.0, 0.0, 0.0]),
        FormComponents::two([0.0, 1.0, 0.0]),
        FormComponents::two([0.0, 0.0, 1.0]),
        FormComponents::two([0.3, -0.7, 1.1]),
    ];
    let mut rows = Vec::new();
    for mu in [-1.0, -0.5, -0.25, 0.25, 0.5, 1.0] {
        for orient_sign in [1.0, -1.0] {
            for omega_sign in [1.0, -1.0] {
                for reeb_sign in [1.0, -1.0] {
                    let cal = Calibration { c, mu, orient_sign, omega_sign, reeb_sign };
                    let mut row = LatticeRow {
                        calibration: cal,
                        closure: 0.0,
                        j_squared: 0.0,
                        metric_invariance: 0.0,
                        positivity: f64::INFINITY,
                        pullback: 0.0,
                        star_identity: 0.0,
                        pass: false,
                    };
                    for cp in probes {
                        row.closure = row.closure.max(closure_residual(&cal, cp, &policy, fd)?);
                        let (j2, inv) = complex_structure_defects(&cal, cp.t);
                        row.j_squared = row.j_squared.max(j2);
                        row.metric_invariance = row.metric_invariance.max(inv);
                        row.positivity = row.positivity.min(positivity(&cal, cp.t));
                        row.pullback = row.pullback.max(pullback_gap(&cal, cp, fd)?);
                        for f in &forms {
                            row.star_identity = row.star_identity.max(star_identity_residual(&cal, cp.t, f)?);
                        }
                    }
                    row.pass = row.closure <= tol.closure
                        && row.j_squared <= tol.j_squared
                        && row.metric_invariance <= tol.j_squared
                        && row.positivity > 0.0
                        && row.pullback <= tol.pullback
                        && row.star_identity <= tol.star_identity;
                    rows.push(row);
                }
            }
        }
    }
    let passing: Vec<&LatticeRow> = rows.iter().filter(|r| r.pass).collect();
    if passing.len() != 1 {
        let table = rows
            .iter()
            .map(|r| format!("{:?}", r))
            .collect::<Vec<_>>()
            .join("\n");
        return Err(Error::CalibrationFailed(format!(
            "{} passing lattice points\n{table}",
            passing.len()
        )));
    }
    Ok(CalibrationOutcome {
        calibration: passing[0].calibration,
        rows,
    })
}

/// `Z = σ − i·jσ` as a complex ambient vector.
pub fn z_at(p: &SpherePoint, policy: &FramePolicy) -> Result<[Complex64; 4]> {
    let frame = frame_at(p, policy).map_err(|e| match e {
        Error::PolicyChartMiss => Error::FrameDegenerate,
        e => e,
    })?;
    let (s, js) = (frame.sigma().v, frame.jsigma().v);
    Ok([0, 1, 2, 3].map(|k| Complex64::new(s[k], -js[k])))
}

/// Frobenius norm of the `z̄`-derivatives of the `(1,0)`-components of `Z`
/// pushed into `ℂ²`.
pub fn dbar_z_residual(cal: &Calibration, cp: &ConePoint, policy: &FramePolicy, fd: &Fd) -> Result<f64> {
    let x0 = cal.embed(cp);
    let comps = |x: &[Complex64; 2]| -> Result<[f64; 4]> {
        let q = cal.unembed(x)?;
        let frame = frame_at(&q.p, policy).map_err(|_| Error::FrameDegenerate)?;
        let s = frame.sigma().v;
        let r = 2.0 * q.t.powf(cal.mu);
        Ok([r * s[0], r * s[1], r * s[2], r * s[3]])
    };
    let mut total = 0.0;
    for k in 0..2 {
        let shift = |dz: Complex64| {
            let mut x = x0;
            x[k] += dz;
            x
        };
        let dre = fd.derivative(|h| comps(&shift(Complex64::new(h, 0.0))))?;
        let dim = fd.derivative(|h| comps(&shift(Complex64::new(0.0, h))))?;
        for m in 0..2 {
            let d_re = Complex64::new(dre[2 * m], dre[2 * m + 1]);
            let d_im = Complex64::new(dim[2 * m], dim[2 * m + 1]);
            let dbar = 0.5 * (d_re + Complex64::new(0.0, 1.0) * d_im);
            total += dbar.norm_sqr();
        }
    }
    Ok(total.sqrt())
}
