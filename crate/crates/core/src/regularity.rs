//! Sampled regularity: admissibility `inf|det ρ|`, Hölder constants and
//! exponents, `C^{1,α}` constants of gauges, Higgs fields and connections on
//! punctured balls, and the Lipschitz bound for `[A_ζ, A_η]`.
//!
//! Suprema over open sets are sampled maxima. Blow-up near the centre is
//! detected by shrinking the inner radius twice and comparing constants.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bundle::{covariant, Gauge, MonopoleField};
use crate::error::{Error, Result};
use crate::fd::Fd;
use crate::linalg::{ad_norm, commutator, det_abs, frob, inverse, op_norm, Endo};
use crate::rng;
use crate::sphere::{directional, geodesic_distance, FramePolicy, SpherePoint};

#[derive(Clone, Debug, PartialEq)]
pub struct GaugeSample {
    pub p: SpherePoint,
    pub rho: Endo,
}

/// Samples of a matrix-valued map on a punctured ball.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeSampleSet {
    pub samples: Vec<GaugeSample>,
    pub center: Option<SpherePoint>,
    pub inner_radius: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Region {
    pub center: SpherePoint,
    pub inner: f64,
    pub outer: f64,
    pub samples: usize,
    pub seed: u64,
}

impl Region {
    /// `k`-th point: geodesic radius log-uniform in `[inner, outer]`, uniform
    /// direction.
    pub fn point(&self, k: u64) -> SpherePoint {
        let mut r = rng::stream(self.seed, k);
        let u = rng::sphere_point(&mut r);
        let dir = self.center.coeffs_of(&u.q());
        let n = (dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]).sqrt().max(1e-300);
        let rad = self.inner * (self.outer / self.inner).powf(rng::uniform(&mut r, 0.0, 1.0));
        let v = self.center.ambient(&dir.map(|x| x * rad / n));
        self.center.exp(&v)
    }

    pub fn points(&self) -> Vec<SpherePoint> {
        (0..self.samples as u64).map(|k| self.point(k)).collect()
    }

    pub fn with_inner(&self, inner: f64) -> Region {
        Region { inner, ..*self }
    }

    fn validate(&self) -> Result<()> {
        if !(self.inner > 0.0 && self.outer > self.inner && self.outer < std::f64::consts::PI) || self.samples < 2 {
            return Err(Error::BadParams(format!("invalid region {self:?}")));
        }
        Ok(())
    }
}

impl GaugeSampleSet {
    pub fn from_gauge(gauge: &dyn Gauge, region: &Region) -> Result<Self> {
        region.validate()?;
        let samples = region
            .points()
            .into_par_iter()
            .map(|p| Ok(GaugeSample { rho: gauge.at(&p)?, p }))
            .collect::<Result<Vec<_>>>()?;
        Ok(GaugeSampleSet {
            samples,
            center: Some(region.center),
            inner_radius: region.inner,
        })
    }

    /// `ρ ↦ ρ·ρ(P)⁻¹`, so that the translated gauge is the identity at `P`.
    pub fn right_translate(&self, rho_at_base: &Endo) -> Result<Self> {
        let inv = inverse(rho_at_base).ok_or(Error::SingularGauge(det_abs(rho_at_base)))?;
        Ok(GaugeSampleSet {
            samples: self
                .samples
                .iter()
                .map(|s| GaugeSample { p: s.p, rho: &s.rho * &inv })
                .collect(),
            ..self.clone()
        })
    }

    pub fn map(&self, f: impl Fn(&Endo) -> Result<Endo>) -> Result<Self> {
        Ok(GaugeSampleSet {
            samples: self
                .samples
                .iter()
                .map(|s| Ok(GaugeSample { p: s.p, rho: f(&s.rho)? }))
                .collect::<Result<_>>()?,
            ..self.clone()
        })
    }

    /// Columns `q0..q3` then `re_rc, im_rc` row-major.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut rd = csv::Reader::from_path(path)?;
        let mut samples = Vec::new();
        for rec in rd.records() {
            let rec = rec?;
            let vals: Vec<f64> = rec
                .iter()
                .map(|s| s.trim().parse::<f64>().map_err(|e| Error::BadParams(format!("{path:?}: {e}"))))
                .collect::<Result<_>>()?;
            let m = vals.len().checked_sub(4).ok_or(Error::BadParams("short sample row".into()))?;
            let n = ((m / 2) as f64).sqrt().round() as usize;
            if n == 0 || 2 * n * n != m {
                return Err(Error::BadParams(format!("{path:?}: {m} matrix columns is not 2n²")));
            }
            let p = SpherePoint::normalize([vals[0], vals[1], vals[2], vals[3]])?;
            let rho = Endo::from_fn(n, n, |r, c| Complex64::new(vals[4 + 2 * (r * n + c)], vals[5 + 2 * (r * n + c)]));
            samples.push(GaugeSample { p, rho });
        }
        if samples.is_empty() {
            return Err(Error::Empty);
        }
        Ok(GaugeSampleSet { samples, center: None, inner_radius: 0.0 })
    }

    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let n = self.samples.first().map_or(0, |s| s.rho.nrows());
        let mut header: Vec<String> = ["q0", "q1", "q2", "q3"].map(String::from).to_vec();
        for r in 0..n {
            for c in 0..n {
                header.push(format!("re_{r}{c}"));
                header.push(format!("im_{r}{c}"));
            }
        }
        wr.write_record(&header)?;
        for s in &self.samples {
            let mut rec: Vec<f64> = s.p.q().to_vec();
            for r in 0..n {
                for c in 0..n {
                    rec.push(s.rho[(r, c)].re);
                    rec.push(s.rho[(r, c)].im);
                }
            }
            wr.write_record(rec.iter().map(|x| format!("{x:e}")))?;
        }
        wr.flush()?;
        Ok(())
    }
}

pub fn admissibility_margin(set: &GaugeSampleSet) -> Result<f64> {
    set.samples
        .iter()
        .map(|s| det_abs(&s.rho))
        .reduce(f64::min)
        .ok_or(Error::Empty)
}

fn pair_max(n: usize, f: impl Fn(usize, usize) -> f64 + Sync) -> f64 {
    (0..n)
        .into_par_iter()
        .map(|i| (i + 1..n).map(|j| f(i, j)).fold(0.0, f64::max))
        .reduce(|| 0.0, f64::max)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::BadAlpha(alpha))
    }
}

/// `max ‖ρ(p) − ρ(q)‖ / d(p,q)^α` over sample pairs (operator norm).
pub fn hoelder_constant(set: &GaugeSampleSet, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if set.samples.len() < 2 {
        return Err(Error::Empty);
    }
    let s = &set.samples;
    Ok(pair_max(s.len(), |i, j| {
        let d = geodesic_distance(&s[i].p, &s[j].p);
        if d == 0.0 {
            0.0
        } else {
            op_norm(&(&s[i].rho - &s[j].rho)) / d.powf(alpha)
        }
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub alpha: f64,
    pub bins_used: usize,
    /// RMS log defect of the fitted envelope at `alpha`.
    pub defect: f64,
}

pub const FIT_BINS: usize = 24;

/// Binned envelope `(log δ, max ‖ρ(p) − ρ(q)‖)` over logarithmic distance
/// bins between two quantiles of the pair distances.
fn envelope(set: &GaugeSampleSet, q_lo: f64, q_hi: f64) -> Result<Vec<(f64, f64)>> {
    let s = &set.samples;
    if s.len() < 3 {
        return Err(Error::Empty);
    }
    let mut pairs: Vec<(f64, f64)> = (0..s.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            (i + 1..s.len()).map(move |j| (geodesic_distance(&s[i].p, &s[j].p), op_norm(&(&s[i].rho - &s[j].rho))))
        })
        .filter(|(d, _)| *d > 0.0)
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let at = |q: f64| pairs[((pairs.len() - 1) as f64 * q) as usize].0.ln();
    let (lo, hi) = (at(q_lo), at(q_hi));
    if !(hi > lo) {
        return Err(Error::Empty);
    }
    let mut best = vec![(0.0f64, 0.0f64); FIT_BINS];
    for (d, v) in &pairs {
        let x = (d.ln() - lo) / (hi - lo);
        if (0.0..1.0).contains(&x) {
            let b = (x * FIT_BINS as f64) as usize;
            if *v > best[b].1 {
                best[b] = (*d, *v);
            }
        }
    }
    Ok(best.into_iter().filter(|(_, v)| *v > 0.0).collect())
}

/// Exponent of the envelope `C·((δ + ε)^α − ε^α)`, `ε` the smallest
/// distance of a sample to the centre (0 without a centre): the `α` whose
/// log defect is smallest, `C` fitted in closed form.
pub fn fit_exponent(set: &GaugeSampleSet) -> Result<ExponentFit> {
    let env = envelope(set, 0.01, 0.5)?;
    if env.len() < 3 {
        return Err(Error::Empty);
    }
    let eps = set
        .center
        .map(|c| set.samples.iter().map(|s| geodesic_distance(&s.p, &c)).fold(f64::INFINITY, f64::min))
        .unwrap_or(0.0);
    let defect = |a: f64| -> f64 {
        let r: Vec<f64> = env.iter().map(|(d, v)| v.ln() - ((d + eps).powf(a) - eps.powf(a)).ln()).collect();
        let m = r.iter().sum::<f64>() / r.len() as f64;
        (r.iter().map(|x| (x - m).powi(2)).sum::<f64>() / r.len() as f64).sqrt()
    };
    let mut alpha = (1..=300).map(|k| k as f64 * 0.005).min_by(|a, b| defect(*a).total_cmp(&defect(*b))).expect("nonempty");
    let mut h = 0.005;
    while h > 1e-6 {
        for cand in [alpha - h, alpha + h] {
            if cand > 0.0 && defect(cand) < defect(alpha) {
                alpha = cand;
            }
        }
        h *= 0.5;
    }
    Ok(ExponentFit {
        alpha,
        bins_used: env.len(),
        defect: defect(alpha),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Inconclusive,
    Fail,
}

impl Verdict {
    pub fn worst(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Fail, _) | (_, Fail) => Fail,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => Pass,
        }
    }
}

#[derive(Clone)]
pub enum RegularityObject {
    Gauge(Arc<dyn Gauge>),
    Higgs(MonopoleField),
    Connection(MonopoleField),
}

impl RegularityObject {
    pub fn name(&self) -> &'static str {
        match self {
            RegularityObject::Gauge(_) => "gauge",
            RegularityObject::Higgs(_) => "higgs",
            RegularityObject::Connection(_) => "connection",
        }
    }

    /// The matrices whose Hölder constants make up the `C^{1,α}` constant at
    /// `p`, with labels.
    fn quantities(&self, p: &SpherePoint, policy: &FramePolicy, fd: &Fd) -> Result<Vec<(String, Endo)>> {
        let rows = policy.rows(p)?;
        let names = ["sigma", "jsigma", "xi"];
        let mut out = Vec::new();
        match self {
            RegularityObject::Gauge(g) => {
                for (k, r) in rows.iter().enumerate() {
                    out.push((format!("d rho({})", names[k]), directional(&|q| g.at(q), p, r, fd)?));
                }
            }
            RegularityObject::Higgs(f) => {
                out.push(("phi".into(), f.phi(p)?));
                let phi = |q: &SpherePoint| f.phi(q);
                for (k, r) in rows.iter().enumerate() {
                    out.push((format!("nabla_{} phi", names[k]), covariant(f, &phi, p, r, fd)?));
                }
            }
            RegularityObject::Connection(f) => {
                let s = f.sample(p)?;
                for (k, r) in rows.iter().enumerate() {
                    out.push((format!("A({})", names[k]), s.along(r)));
                }
                for (a, ra) in rows.iter().enumerate() {
                    for (b, rb) in rows.iter().enumerate() {
                        let d = directional(&|q| Ok(f.sample(q)?.along(rb)), p, ra, fd)?;
                        out.push((format!("d_{} A({})", names[a], names[b]), d));
                    }
                }
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionConstant {
    pub quantity: String,
    pub sup: f64,
    pub hoelder: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct C1AlphaSection {
    pub object: String,
    pub alpha: f64,
    pub per_direction: Vec<DirectionConstant>,
    /// Largest sup or Hölder constant at the requested inner radius.
    pub constant: f64,
    pub inner_radii: [f64; 3],
    pub constants: [f64; 3],
    /// `constants[2] / constants[0]`.
    pub divergence_factor: f64,
    pub verdict: Verdict,
}

pub const DIVERGENCE_FAIL: f64 = 10.0;
pub const DIVERGENCE_WARN: f64 = 2.0;

fn c1alpha_once(
    object: &RegularityObject,
    region: &Region,
    alpha: f64,
    policy: &FramePolicy,
    fd: &Fd,
) -> Result<Vec<DirectionConstant>> {
    let pts = region.points();
    let vals = pts
        .par_iter()
        .map(|p| object.quantities(p, policy, fd))
        .collect::<Result<Vec<_>>>()?;
    let labels: Vec<String> = vals.first().ok_or(Error::Empty)?.iter().map(|(l, _)| l.clone()).collect();
    Ok(labels
        .iter()
        .enumerate()
        .map(|(k, label)| {
            let set = GaugeSampleSet {
                samples: pts.iter().zip(&vals).map(|(p, v)| GaugeSample { p: *p, rho: v[k].1.clone() }).collect(),
                center: Some(region.center),
                inner_radius: region.inner,
            };
            DirectionConstant {
                quantity: label.clone(),
                sup: set.samples.iter().map(|s| op_norm(&s.rho)).fold(0.0, f64::max),
                hoelder: hoelder_constant(&set, alpha).unwrap_or(0.0),
            }
        })
        .collect())
}

fn aggregate(d: &[DirectionConstant]) -> f64 {
    d.iter().map(|c| c.sup.max(c.hoelder)).fold(0.0, f64::max)
}

/// `C^{1,α}` constants at inner radii `r, r/2, r/4`. The verdict is `FAIL`
/// when the constant grows by more than 10 and `INCONCLUSIVE` above 2.
pub fn c1alpha_report(
    object: &RegularityObject,
    region: &Region,
    alpha: f64,
    policy: &FramePolicy,
    fd: &Fd,
) -> Result<C1AlphaSection> {
    check_alpha(alpha)?;
    region.validate()?;
    let radii = [region.inner, region.inner / 2.0, region.inner / 4.0];
    let runs = radii
        .iter()
        .map(|r| c1alpha_once(object, &region.with_inner(*r), alpha, policy, fd))
        .collect::<Result<Vec<_>>>()?;
    let constants = [aggregate(&runs[0]), aggregate(&runs[1]), aggregate(&runs[2])];
    let factor = if constants[0] > 0.0 {
        constants[2] / constants[0]
    } else if constants[2] > 1e-12 {
        f64::INFINITY
    } else {
        1.0
    };
    let verdict = if !factor.is_finite() || factor > DIVERGENCE_FAIL {
        Verdict::Fail
    } else if factor > DIVERGENCE_WARN {
        Verdict::Inconclusive
    } else {
        Verdict::Pass
    };
    Ok(C1AlphaSection {
        object: object.name().into(),
        alpha,
        constant: constants[0],
        per_direction: runs.into_iter().next().expect("three runs"),
        inner_radii: radii,
        constants,
        divergence_factor: factor,
        verdict,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LipschitzCheck {
    /// Largest `Lip([A_ζ, A_η])` over frame pairs.
    pub measured: f64,
    /// `sup‖ad A_ζ‖·Lip(A_η) + sup‖ad A_η‖·Lip(A_ζ)` for the same pair.
    pub bound: f64,
    /// Largest `measured − bound` over all pairs and sample pairs.
    pub worst_excess: f64,
    pub holds: bool,
}

pub const LIPSCHITZ_SLACK: f64 = 1e-9;

/// Frobenius norms with the Frobenius-induced `ad` norm, checked pairwise.
pub fn curvature_lipschitz_check(field: &MonopoleField, region: &Region, policy: &FramePolicy) -> Result<LipschitzCheck> {
    region.validate()?;
    let pts = region.points();
    let comps = pts
        .par_iter()
        .map(|p| Ok(field.in_frame(p, policy)?.a))
        .collect::<Result<Vec<_>>>()?;
    let n = pts.len();
    let lip = |f: &(dyn Fn(usize) -> Endo + Sync)| -> f64 {
        pair_max(n, |i, j| frob(&(f(i) - f(j))) / geodesic_distance(&pts[i], &pts[j]).max(1e-300))
    };
    let sup_ad = |k: usize| comps.iter().map(|a| ad_norm(&a[k])).fold(0.0, f64::max);
    let mut worst = LipschitzCheck { measured: 0.0, bound: 0.0, worst_excess: f64::NEG_INFINITY, holds: true };
    for (z, e) in [(0, 1), (0, 2), (1, 2)] {
        let measured = lip(&|i| commutator(&comps[i][z], &comps[i][e]));
        let bound = sup_ad(z) * lip(&|i| comps[i][e].clone()) + sup_ad(e) * lip(&|i| comps[i][z].clone());
        let excess = measured - bound;
        if excess > worst.worst_excess {
            worst = LipschitzCheck { measured, bound, worst_excess: excess, holds: excess <= LIPSCHITZ_SLACK };
        }
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub admissibility_margin: Option<f64>,
    pub hoelder: Option<(f64, f64, usize)>,
    pub exponent: Option<ExponentFit>,
    pub c1alpha: Vec<C1AlphaSection>,
    pub curvature: Option<LipschitzCheck>,
}

impl RegularityReport {
    pub fn verdict(&self) -> Verdict {
        let mut v = self.c1alpha.iter().fold(Verdict::Pass, |v, s| v.worst(s.verdict));
        if let Some(c) = &self.curvature {
            if !c.holds {
                v = Verdict::Fail;
            }
        }
        if matches!(self.admissibility_margin, Some(m) if m <= 0.0) {
            v = Verdict::Fail;
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::{constant_higgs, radial_exp_gauge, random_smooth, singular_gauge, singular_higgs, zero};
    use crate::linalg::{identity, mat_exp, sigma3i, Coef};

    fn p0() -> SpherePoint {
        SpherePoint::normalize([0.2, -0.4, 0.5, 0.7]).unwrap()
    }

    fn region(n: usize, inner: f64) -> Region {
        Region { center: p0(), inner, outer: 0.5, samples: n, seed: 3 }
    }

    #[test]
    fn region_samples_lie_in_the_annulus() {
        let r = region(200, 1e-3);
        for p in r.points() {
            let d = geodesic_distance(&p, &p0());
            assert!(d >= 1e-3 * (1.0 - 1e-9) && d <= 0.5 * (1.0 + 1e-9));
        }
    }

    #[test]
    fn admissibility_examples() {
        let id: Arc<dyn Gauge> = Arc::new(|_: &SpherePoint| Ok(identity(2)));
        let set = GaugeSampleSet::from_gauge(id.as_ref(), &region(50, 0.1)).unwrap();
        assert_eq!(admissibility_margin(&set).unwrap(), 1.0);
        assert_eq!(hoelder_constant(&set, 0.5).unwrap(), 0.0);
        let unitary = GaugeSampleSet::from_gauge(radial_exp_gauge(p0(), 0.5).as_ref(), &region(50, 0.1)).unwrap();
        assert!((admissibility_margin(&unitary).unwrap() - 1.0).abs() < 1e-12);
        let c = p0();
        let shrink = |inner: f64| {
            let g = move |p: &SpherePoint| {
                let mut m = identity(2);
                m[(0, 0)] = Complex64::new(geodesic_distance(p, &c), 0.0);
                Ok(m)
            };
            admissibility_margin(&GaugeSampleSet::from_gauge(&g, &region(100, inner)).unwrap()).unwrap()
        };
        assert!(shrink(1e-4) < shrink(1e-2) && shrink(1e-4) < 2e-4);
        assert!(matches!(hoelder_constant(&set, 0.0), Err(Error::BadAlpha(_))));
        let empty = GaugeSampleSet { samples: vec![], center: None, inner_radius: 0.0 };
        assert!(matches!(admissibility_margin(&empty), Err(Error::Empty)));
    }

    #[test]
    fn exponent_recovery() {
        for e in [0.5, 0.2, 0.3, 0.8, 1.0] {
            let set = GaugeSampleSet::from_gauge(radial_exp_gauge(p0(), e).as_ref(), &region(1000, 1e-5)).unwrap();
            let fit = fit_exponent(&set).unwrap();
            assert!((fit.alpha - e).abs() < 0.05, "{e} {fit:?}");
        }
    }

    #[test]
    fn smooth_lipschitz_constant_matches_derivative() {
        let x = sigma3i();
        let c = p0();
        let g = move |p: &SpherePoint| Ok(mat_exp(&x.scaled(3.0 * p.q()[1])));
        let set = GaugeSampleSet::from_gauge(&g, &region(400, 1e-3)).unwrap();
        let h = hoelder_constant(&set, 1.0).unwrap();
        // ‖dρ‖ = 3·|∇q₁| ≤ 3, attained where ∇q₁ is tangent and of unit length
        let sup = set
            .samples
            .iter()
            .map(|s| {
                let q = s.p.q();
                3.0 * (1.0 - q[1] * q[1]).sqrt()
            })
            .fold(0.0, f64::max);
        let _ = c;
        assert!((h - sup).abs() < 0.2 * sup, "{h} {sup}");
    }

    #[test]
    fn constant_higgs_has_zero_constants() {
        let s = c1alpha_report(&RegularityObject::Higgs(constant_higgs(1.0)), &region(60, 0.1), 0.5, &FramePolicy::LeftInvariant, &Fd::default())
            .unwrap();
        assert!(s.constant - 1.0 < 1e-10);
        assert!(s.per_direction.iter().skip(1).all(|d| d.sup < 1e-10 && d.hoelder < 1e-10));
        assert_eq!(s.verdict, Verdict::Pass);
    }

    #[test]
    fn singular_connection_diverges() {
        let f = singular_gauge(p0(), 0.2);
        let s = c1alpha_report(&RegularityObject::Connection(f), &region(150, 0.08), 0.5, &FramePolicy::LeftInvariant, &Fd::default())
            .unwrap();
        assert!(s.divergence_factor > 10.0, "{s:?}");
        assert_eq!(s.verdict, Verdict::Fail);
        let smooth = c1alpha_report(&RegularityObject::Connection(random_smooth(2, 1, 0.5)), &region(150, 0.08), 0.5, &FramePolicy::LeftInvariant, &Fd::default())
            .unwrap();
        assert_eq!(smooth.verdict, Verdict::Pass, "{smooth:?}");
        let h = c1alpha_report(&RegularityObject::Higgs(singular_higgs(p0(), 0.5)), &region(150, 0.08), 0.9, &FramePolicy::LeftInvariant, &Fd::default())
            .unwrap();
        assert!(h.divergence_factor > 2.0, "{h:?}");
    }

    #[test]
    fn lipschitz_inequality() {
        let z = curvature_lipschitz_check(&zero(2), &region(40, 0.1), &FramePolicy::LeftInvariant).unwrap();
        assert_eq!((z.measured, z.bound), (0.0, 0.0));
        let r = curvature_lipschitz_check(&random_smooth(2, 4, 0.8), &region(120, 0.05), &FramePolicy::LeftInvariant).unwrap();
        assert!(r.holds && r.measured > 0.0, "{r:?}");
    }

    #[test]
    fn csv_round_trip() {
        let set = GaugeSampleSet::from_gauge(radial_exp_gauge(p0(), 0.5).as_ref(), &region(10, 0.1)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        set.write_csv(std::fs::File::create(&path).unwrap()).unwrap();
        let back = GaugeSampleSet::read_csv(&path).unwrap();
        for (a, b) in set.samples.iter().zip(&back.samples) {
            assert!(frob(&(&a.rho - &b.rho)) < 1e-15 && geodesic_distance(&a.p, &b.p) < 1e-7);
        }
    }
}


