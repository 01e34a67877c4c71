//! Holonomy near the puncture fibre. An adapted unitary chart `(z, w)` on
//! `ℂ²∖{0}` sends the fibre over `P₀` into `{z = 0}`; loops `|z − z₀| = r` at
//! fixed `w` are transported with `df/dθ = −B(γ(θ))·(dz/dθ)·f`.
//!
//! Two readings of `B` ship. `Literal` contracts the lifted `(1,0)`-connection
//! minus `Ψ·ζ*` with `Z`, which gives `A_σ − iA_{jσ} − ψ`; `Coordinate`
//! contracts the same form with `∂/∂z` of the chart.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bundle::MonopoleField;
use crate::cone::{Calibration, ConePoint};
use crate::error::{Error, Result};
use crate::fd::Fd;
use crate::linalg::{cscale, det_abs, eigenvalues, frob, identity, inverse, op_norm, zeros, Coef, Endo, I};
use crate::sphere::{frame_at, FramePolicy, SpherePoint};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChartRadii {
    pub eps_z: f64,
    pub eps_w: f64,
    pub annulus_inner: f64,
    pub disc_center: [f64; 2],
    pub disc_radius: f64,
}

impl Default for ChartRadii {
    fn default() -> Self {
        ChartRadii {
            eps_z: 0.2,
            eps_w: 1.2,
            annulus_inner: 0.8,
            disc_center: [1.0, 0.0],
            disc_radius: 0.1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaptedChart {
    pub p0: SpherePoint,
    /// Row-major `U ∈ SU(2)`.
    pub u: [[Complex64; 2]; 2],
    pub radii: ChartRadii,
    pub cal: Calibration,
}

pub fn adapted_coordinates(p0: &SpherePoint, radii: ChartRadii, cal: Calibration) -> AdaptedChart {
    let (a, b) = p0.complex();
    AdaptedChart {
        p0: *p0,
        u: [[b, -a], [a.conj(), b.conj()]],
        radii,
        cal,
    }
}

impl AdaptedChart {
    pub fn to_chart(&self, cp: &ConePoint) -> [Complex64; 2] {
        let x = self.cal.embed(cp);
        let u = &self.u;
        [u[0][0] * x[0] + u[0][1] * x[1], u[1][0] * x[0] + u[1][1] * x[1]]
    }

    pub fn from_chart(&self, zw: [Complex64; 2]) -> Result<ConePoint> {
        let u = &self.u;
        let x = [
            u[0][0].conj() * zw[0] + u[1][0].conj() * zw[1],
            u[0][1].conj() * zw[0] + u[1][1].conj() * zw[1],
        ];
        self.cal.unembed(&x)
    }

    /// `∂/∂x` and `∂/∂y` (`z = x + iy`) at `(z, w)` on the coordinate frame
    /// `(σ, jσ, ξ, ∂t)` of `policy`.
    fn z_partials(&self, zw: [Complex64; 2], policy: &FramePolicy, fd: &Fd) -> Result<[[f64; 4]; 2]> {
        let cp = self.from_chart(zw)?;
        let frame = frame_at(&cp.p, policy)?;
        let along = |dir: Complex64| -> Result<[f64; 4]> {
            let d = fd.derivative(|h| {
                let q = self.from_chart([zw[0] + dir * h, zw[1]])?;
                let qq = q.p.q();
                Ok([qq[0], qq[1], qq[2], qq[3], q.t].to_vec())
            })?;
            let inv = cp.p.coeffs_of(&[d[0], d[1], d[2], d[3]]);
            let f = frame.from_invariant(&inv);
            Ok([f[0], f[1], f[2], d[4]])
        };
        Ok([along(Complex64::new(1.0, 0.0))?, along(I)?])
    }
}

impl Coef for Vec<f64> {
    fn scaled(&self, s: f64) -> Self {
        self.iter().map(|x| x * s).collect()
    }
    fn plus(&self, o: &Self) -> Self {
        self.iter().zip(o).map(|(a, b)| a + b).collect()
    }
    fn magnitude_sq(&self) -> f64 {
        self.iter().map(|x| x * x).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransportMode {
    Literal,
    CoordinateContracted,
}

impl TransportMode {
    pub fn name(&self) -> &'static str {
        match self {
            TransportMode::Literal => "literal",
            TransportMode::CoordinateContracted => "coordinate-contracted",
        }
    }
}

pub type PsiFn<'a> = &'a (dyn Fn(&SpherePoint) -> Result<Endo> + Sync);

/// A loop `θ ↦ (z₀ + r·e^{iθ}, w)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZLoop {
    pub z0: Complex64,
    pub radius: f64,
    pub w: Complex64,
    pub turns: f64,
}

impl ZLoop {
    pub fn at(&self, theta: f64) -> [Complex64; 2] {
        [self.z0 + Complex64::from_polar(self.radius, theta), self.w]
    }

    pub fn dz(&self, theta: f64) -> Complex64 {
        I * Complex64::from_polar(self.radius, theta)
    }
}

pub struct Transport<'a> {
    pub field: &'a MonopoleField,
    pub psi: PsiFn<'a>,
    pub chart: &'a AdaptedChart,
    pub policy: FramePolicy,
    pub mode: TransportMode,
    pub fd: Fd,
    pub steps: usize,
}

fn domain_err(e: Error) -> Error {
    match e {
        Error::EvalDomain
        | Error::DomainExcluded
        | Error::StencilOutOfBox
        | Error::OriginNotInCone
        | Error::PolicyChartMiss
        | Error::FrameDegenerate => Error::LoopExitsDomain,
        e => e,
    }
}

impl Transport<'_> {
    /// `B` at a chart point, before the factor `dz/dθ`.
    pub fn generator(&self, zw: [Complex64; 2]) -> Result<Endo> {
        let run = || -> Result<Endo> {
            let cp = self.chart.from_chart(zw)?;
            let fs = self.field.in_frame(&cp.p, &self.policy)?;
            let psi = (self.psi)(&cp.p)?;
            let cal = &self.chart.cal;
            let a4 = [
                fs.a[0].clone(),
                fs.a[1].clone(),
                fs.a[2].clone(),
                fs.phi.scaled(1.0 / (cp.t * cal.c.sqrt())),
            ];
            let a_of = |v: &[f64; 4]| -> Endo {
                let mut out = zeros(self.field.rank);
                for k in 0..4 {
                    if v[k] != 0.0 {
                        out += a4[k].scaled(v[k]);
                    }
                }
                out
            };
            // A^{1,0}(V) = ½(A(V) − iA(JV)), ζ*(V) = ½(V_σ + iV_{jσ}), both
            // extended complex-linearly from real vectors.
            let form = |v: &[f64; 4]| -> Endo {
                let a10 = (a_of(v) - cscale(&a_of(&cal.j(cp.t, v)), I)).scaled(0.5);
                let zeta = Complex64::new(0.5 * v[0], 0.5 * v[1]);
                a10 - cscale(&psi, zeta)
            };
            match self.mode {
                TransportMode::Literal => {
                    let (re, im) = ([1.0, 0.0, 0.0, 0.0], [0.0, -1.0, 0.0, 0.0]);
                    Ok(form(&re) + cscale(&form(&im), I))
                }
                TransportMode::CoordinateContracted => {
                    let [x, y] = self.chart.z_partials(zw, &self.policy, &self.fd)?;
                    Ok((form(&x) - cscale(&form(&y), I)).scaled(0.5))
                }
            }
        };
        run().map_err(domain_err)
    }

    /// `B(γ(θ))·dz/dθ` sampled at `m` equispaced angles over `turns`.
    fn loop_generator(&self, lp: &ZLoop) -> impl Fn(f64) -> Result<Endo> + '_ {
        let lp = *lp;
        move |theta| Ok(cscale(&self.generator(lp.at(theta))?, lp.dz(theta)))
    }

    pub fn holonomy(&self, lp: &ZLoop) -> Result<Endo> {
        let g = self.loop_generator(lp);
        integrate_loop(&g, self.field.rank, 2.0 * std::f64::consts::PI * lp.turns, self.steps)
    }

    /// Holonomy after the single-valued gauge `g(θ)` along the loop:
    /// `G ↦ g⁻¹Gg + g⁻¹g′`.
    pub fn holonomy_gauged(
        &self,
        lp: &ZLoop,
        g: &dyn Fn(f64) -> Endo,
        dg: &dyn Fn(f64) -> Endo,
    ) -> Result<Endo> {
        let gen = self.loop_generator(lp);
        let gauged = |theta: f64| -> Result<Endo> {
            let gi = inverse(&g(theta)).ok_or(Error::SingularGauge(0.0))?;
            Ok(&gi * gen(theta)? * g(theta) + &gi * dg(theta))
        };
        integrate_loop(&gauged, self.field.rank, 2.0 * std::f64::consts::PI * lp.turns, self.steps)
    }

    /// `exp(−∮ tr B dz)` by the periodic trapezoid rule.
    pub fn abel_oracle(&self, lp: &ZLoop, m: usize) -> Result<Complex64> {
        let gen = self.loop_generator(lp);
        let span = 2.0 * std::f64::consts::PI * lp.turns;
        let h = span / m as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..m {
            acc += gen(k as f64 * h)?.trace();
        }
        Ok((-acc * h).exp())
    }
}

/// RK4 for `df/dθ = −G(θ)f`, `f(0) = I`, over `[0, span]`.
pub fn integrate_loop(g: &dyn Fn(f64) -> Result<Endo>, n: usize, span: f64, steps: usize) -> Result<Endo> {
    let h = span / steps as f64;
    let mut f = identity(n);
    let mut g0 = g(0.0)?;
    for k in 0..steps {
        let th = k as f64 * h;
        let gm = g(th + 0.5 * h)?;
        let g1 = g(th + h)?;
        let k1 = -(&g0 * &f);
        let k2 = -(&gm * (&f + k1.scaled(0.5 * h)));
        let k3 = -(&gm * (&f + k2.scaled(0.5 * h)));
        let k4 = -(&g1 * (&f + k3.scaled(h)));
        f += (k1 + k2.scaled(2.0) + k3.scaled(2.0) + k4).scaled(h / 6.0);
        if !f.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::StepFailure { tol: h });
        }
        g0 = g1;
    }
    Ok(f)
}

/// Observed order of the loop integrator from three step halvings.
pub fn transport_order(t: &Transport, lp: &ZLoop) -> Result<f64> {
    let gen = t.loop_generator(lp);
    let span = 2.0 * std::f64::consts::PI * lp.turns;
    let run = |n: usize| integrate_loop(&gen, t.field.rank, span, n);
    let (a, b, c) = (run(t.steps)?, run(2 * t.steps)?, run(4 * t.steps)?);
    Ok((frob(&(&a - &b)) / frob(&(&b - &c))).log2())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolonomySample {
    pub w: [f64; 2],
    pub region: String,
    /// Row-major `(re, im)` entries.
    pub alpha: Vec<Vec<[f64; 2]>>,
    pub deviation: f64,
    pub eigenvalues: Vec<[f64; 2]>,
    /// `‖∂α/∂w̄‖` by centred differences in `w`.
    pub holomorphy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolonomyReport {
    pub mode: TransportMode,
    pub z0: [f64; 2],
    pub radius: f64,
    pub samples: Vec<HolonomySample>,
    pub max_deviation_disc: f64,
    pub max_deviation_annulus: f64,
    pub max_holomorphy: f64,
    /// The inference "trivial on D and holomorphic in w, hence trivial on V"
    /// stated as indicator values.
    pub narrative: String,
}

pub fn endo_entries(m: &Endo) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HolonomyGrid {
    pub radius: f64,
    pub z0: [f64; 2],
    /// Points per side of the square grid over `D`.
    pub disc_points: usize,
    /// Radial × angular points in the annulus `annulus_inner ≤ |w| ≤ eps_w`.
    pub annulus_points: [usize; 2],
    pub steps: usize,
    pub w_step: f64,
}

impl Default for HolonomyGrid {
    fn default() -> Self {
        HolonomyGrid {
            radius: 0.05,
            z0: [0.0, 0.0],
            disc_points: 3,
            annulus_points: [2, 7],
            steps: 64,
            w_step: 1e-3,
        }
    }
}

impl HolonomyGrid {
    pub fn points(&self, radii: &ChartRadii) -> Vec<(Complex64, &'static str)> {
        let mut out = Vec::new();
        let c0 = Complex64::new(radii.disc_center[0], radii.disc_center[1]);
        let n = self.disc_points.max(1);
        for a in 0..n {
            for b in 0..n {
                let f = |k: usize| if n == 1 { 0.0 } else { 2.0 * k as f64 / (n - 1) as f64 - 1.0 };
                let d = Complex64::new(f(a), f(b)) * (radii.disc_radius / std::f64::consts::SQRT_2);
                out.push((c0 + d, "disc"));
            }
        }
        let [nr, na] = self.annulus_points;
        for a in 0..nr {
            let r = if nr == 1 {
                0.5 * (radii.annulus_inner + radii.eps_w)
            } else {
                radii.annulus_inner + (radii.eps_w - radii.annulus_inner) * a as f64 / (nr - 1) as f64
            };
            for b in 0..na {
                let th = 2.0 * std::f64::consts::PI * b as f64 / na as f64;
                out.push((Complex64::from_polar(r, th), "annulus"));
            }
        }
        out
    }
}

pub fn holonomy_map(t: &Transport, grid: &HolonomyGrid) -> Result<HolonomyReport> {
    let z0 = Complex64::new(grid.z0[0], grid.z0[1]);
    let lp = |w: Complex64| ZLoop { z0, radius: grid.radius, w, turns: 1.0 };
    let t = Transport { steps: grid.steps, ..*t };
    let mut samples = Vec::new();
    for (w, region) in grid.points(&t.chart.radii) {
        let alpha = t.holonomy(&lp(w))?;
        let h = grid.w_step;
        let fd = Fd::second(h);
        let du = fd.derivative(|s| t.holonomy(&lp(w + s)))?;
        let dv = fd.derivative(|s| t.holonomy(&lp(w + I * s)))?;
        let dbar = (du + cscale(&dv, I)).scaled(0.5);
        let n = alpha.nrows();
        samples.push(HolonomySample {
            w: [w.re, w.im],
            region: region.to_string(),
            deviation: op_norm(&(&alpha - identity(n))),
            eigenvalues: eigenvalues(&alpha).iter().map(|z| [z.re, z.im]).collect(),
            alpha: endo_entries(&alpha),
            holomorphy: op_norm(&dbar),
        });
    }
    let max_of = |reg: &str| samples.iter().filter(|s| s.region == reg).map(|s| s.deviation).fold(0.0, f64::max);
    let (dd, da) = (max_of("disc"), max_of("annulus"));
    let hol = samples.iter().map(|s| s.holomorphy).fold(0.0, f64::max);
    Ok(HolonomyReport {
        mode: t.mode,
        z0: grid.z0,
        radius: grid.radius,
        narrative: format!(
            "max |alpha - I| on D = {dd:e}; max |d alpha/d wbar| = {hol:e}; max |alpha - I| on the annulus = {da:e}"
        ),
        samples,
        max_deviation_disc: dd,
        max_deviation_annulus: da,
        max_holomorphy: hol,
    })
}

impl HolonomyReport {
    /// Rows `(Re w, Im w, deviation, holomorphy, eigenvalues as re;im pairs)`.
    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["re_w", "im_w", "deviation", "holomorphy", "eigenvalues"])?;
        for s in &self.samples {
            let eig = s.eigenvalues.iter().map(|z| format!("{:e};{:e}", z[0], z[1])).collect::<Vec<_>>().join(" ");
            wr.write_record([
                format!("{:e}", s.w[0]),
                format!("{:e}", s.w[1]),
                format!("{:e}", s.deviation),
                format!("{:e}", s.holomorphy),
                eig,
            ])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// `|det α − exp(−∮ tr B dz)|`.
pub fn abel_gap(t: &Transport, lp: &ZLoop, quadrature_points: usize) -> Result<f64> {
    let alpha = t.holonomy(lp)?;
    let det = alpha.determinant();
    Ok((det - t.abel_oracle(lp, quadrature_points)?).norm())
}

/// `‖α(two turns) − α²‖`.
pub fn multiplicativity_gap(t: &Transport, lp: &ZLoop) -> Result<f64> {
    let a = t.holonomy(lp)?;
    let twice = Transport { steps: 2 * t.steps, ..*t };
    let a2 = twice.holonomy(&ZLoop { turns: 2.0 * lp.turns, ..*lp })?;
    Ok(frob(&(a2 - &a * &a)))
}

/// Largest eigenvalue mismatch under `g(θ) = I + ε(X cos θ + Y sin θ)`,
/// after matching eigenvalues greedily.
pub fn gauge_eigen_gap(t: &Transport, lp: &ZLoop, x: &Endo, y: &Endo, eps: f64) -> Result<f64> {
    let n = t.field.rank;
    let g = |th: f64| identity(n) + (x.scaled(th.cos()) + y.scaled(th.sin())).scaled(eps);
    let dg = |th: f64| (y.scaled(th.cos()) - x.scaled(th.sin())).scaled(eps);
    if det_abs(&g(0.0)) < 1e-6 {
        return Err(Error::SingularGauge(det_abs(&g(0.0))));
    }
    let a = eigenvalues(&t.holonomy(lp)?);
    let mut b = eigenvalues(&t.holonomy_gauged(lp, &g, &dg)?);
    let mut worst: f64 = 0.0;
    for z in a {
        let (k, d) = b
            .iter()
            .enumerate()
            .map(|(k, w)| (k, (z - w).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .expect("same size");
        worst = worst.max(d);
        b.remove(k);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::{constant_higgs, random_smooth, zero};
    use crate::linalg::c;
    use crate::rng;

    fn chart() -> AdaptedChart {
        let p0 = SpherePoint::normalize([0.3, 0.5, -0.2, 0.7]).unwrap();
        adapted_coordinates(&p0, ChartRadii::default(), Calibration::ROUND)
    }

    #[test]
    fn chart_sends_the_fibre_to_the_w_axis() {
        let ch = chart();
        let x = ch.to_chart(&ConePoint::new(ch.p0, 1.0).unwrap());
        assert!(x[0].norm() < 1e-15 && (x[1] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let x = ch.to_chart(&ConePoint::new(ch.p0.reeb_flow(0.4), 2.25).unwrap());
        assert!(x[0].norm() < 1e-12 && (x[1] - Complex64::from_polar(1.5, 0.4)).norm() < 1e-12);
        let cp = ConePoint::new(SpherePoint::normalize([0.1, -0.4, 0.8, 0.2]).unwrap(), 0.7).unwrap();
        let back = ch.from_chart(ch.to_chart(&cp)).unwrap();
        assert!((back.t - cp.t).abs() < 1e-12 && crate::sphere::geodesic_distance(&back.p, &cp.p) < 1e-12);
    }

    fn zero_psi(n: usize) -> impl Fn(&SpherePoint) -> Result<Endo> + Sync {
        move |_| Ok(zeros(n))
    }

    #[test]
    fn zero_field_has_trivial_holonomy() {
        let f = zero(2);
        let psi = zero_psi(2);
        let ch = chart();
        for mode in [TransportMode::Literal, TransportMode::CoordinateContracted] {
            let t = Transport { field: &f, psi: &psi, chart: &ch, policy: FramePolicy::LeftInvariant, mode, fd: Fd::default(), steps: 32 };
            let rep = holonomy_map(&t, &HolonomyGrid::default()).unwrap();
            assert!(rep.max_deviation_disc < 1e-9 && rep.max_deviation_annulus < 1e-9);
        }
    }

    #[test]
    fn loop_checks_on_a_random_field() {
        let f = random_smooth(2, 11, 0.5);
        let g = random_smooth(2, 12, 0.5);
        let psi = |q: &SpherePoint| g.phi(q);
        let ch = chart();
        let t = Transport {
            field: &f,
            psi: &psi,
            chart: &ch,
            policy: FramePolicy::LeftInvariant,
            mode: TransportMode::CoordinateContracted,
            fd: Fd::default(),
            steps: 128,
        };
        let lp = ZLoop { z0: c(0.0, 0.0), radius: 0.2, w: c(0.9, 0.2), turns: 1.0 };
        let alpha = t.holonomy(&lp).unwrap();
        assert!(op_norm(&(&alpha - identity(2))) > 1e-4);
        assert!(multiplicativity_gap(&t, &lp).unwrap() < 1e-8);
        assert!(abel_gap(&t, &lp, 256).unwrap() < 1e-7);
        let mut r = rng::stream(4, 0);
        let (x, y) = (rng::gl(&mut r, 2, 1.0), rng::gl(&mut r, 2, 1.0));
        assert!(gauge_eigen_gap(&t, &lp, &x, &y, 0.1).unwrap() < 1e-7);
        assert!(transport_order(&Transport { steps: 16, ..t }, &lp).unwrap() > 3.8);
    }

    #[test]
    fn literal_mode_is_a_minus_i_a_minus_psi() {
        let f = random_smooth(2, 2, 0.5);
        let psi = |q: &SpherePoint| f.phi(q);
        let ch = chart();
        let t = Transport { field: &f, psi: &psi, chart: &ch, policy: FramePolicy::LeftInvariant, mode: TransportMode::Literal, fd: Fd::default(), steps: 8 };
        let zw = [c(0.1, 0.05), c(0.95, 0.1)];
        let cp = ch.from_chart(zw).unwrap();
        let fs = f.in_frame(&cp.p, &FramePolicy::LeftInvariant).unwrap();
        let expect = &fs.a[0] - cscale(&fs.a[1], I) - &fs.phi;
        assert!(frob(&(t.generator(zw).unwrap() - expect)) < 1e-14);
    }

    #[test]
    fn constant_higgs_literal_holonomy_is_scalar_exponential() {
        // B = −ψ is constant along the loop, so α = exp(ψ∮dz) = I.
        let f = constant_higgs(1.0);
        let psi = |q: &SpherePoint| f.phi(q);
        let ch = chart();
        let t = Transport { field: &f, psi: &psi, chart: &ch, policy: FramePolicy::LeftInvariant, mode: TransportMode::Literal, fd: Fd::default(), steps: 64 };
        let a = t.holonomy(&ZLoop { z0: c(0.0, 0.0), radius: 0.1, w: c(1.0, 0.0), turns: 1.0 }).unwrap();
        assert!(frob(&(a - identity(2))) < 1e-9);
    }
}
