//! The Higgs potential: `∇_ξΦ − 2i[φ, Φ] = φ` integrated along Reeb orbits
//! from a transversal disc on which `Φ = 0`, and `ψ = −2i∇_ZΦ`.
//!
//! Along an orbit the equation reads `dΦ/ds = φ − [A_ξ, Φ] + 2i[φ, Φ]`.
//! Grid values are kept for export and checks; `Φ` at an arbitrary point of
//! the box is recomputed from the disc with a fixed number of steps, which
//! keeps it smooth enough to differentiate.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bundle::MonopoleField;
use crate::error::{Error, Result};
use crate::fd::Fd;
use crate::linalg::{c, commutator, cscale, frob, zeros, Coef, Endo, I};
use crate::sphere::{dot4, geodesic_distance, directional, FramePolicy, SpherePoint, UNIT_I, UNIT_J, UNIT_K};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowBoxParams {
    pub radius: f64,
    pub eps: f64,
    #[serde(default)]
    pub delta: f64,
    pub resolution: usize,
}

impl Default for FlowBoxParams {
    fn default() -> Self {
        FlowBoxParams {
            radius: 0.3,
            eps: 0.5,
            delta: 0.0,
            resolution: 5,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscNode {
    pub y: [f64; 2],
    pub point: SpherePoint,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowBox {
    pub p0: SpherePoint,
    pub params: FlowBoxParams,
    pub disc: Vec<DiscNode>,
    /// `|g(disc normal, ξ)|` at `P₀`.
    pub transversality: f64,
}

/// Disc point `exp_{P₀}(y₁·jP₀ + y₂·kP₀)`.
fn disc_point(p0: &SpherePoint, y: [f64; 2]) -> SpherePoint {
    let (a, b) = (p0.left_mul(&UNIT_J).q(), p0.left_mul(&UNIT_K).q());
    p0.exp(&[0, 1, 2, 3].map(|k| y[0] * a[k] + y[1] * b[k]))
}

pub fn flow_box(p0: &SpherePoint, params: FlowBoxParams) -> Result<FlowBox> {
    let FlowBoxParams { radius, eps, delta, resolution } = params;
    if !(radius > 0.0 && radius < 1.5 && eps > 0.0 && eps < 2.0 * std::f64::consts::PI && delta >= 0.0)
        || resolution == 0
    {
        return Err(Error::BadParams(format!("invalid flow box {params:?}")));
    }
    let n = resolution as i64;
    let mut disc = Vec::new();
    for a in -n..=n {
        for b in -n..=n {
            let y = [radius * a as f64 / n as f64, radius * b as f64 / n as f64];
            if y[0].hypot(y[1]) > radius * (1.0 + 1e-12) {
                continue;
            }
            let point = disc_point(p0, y);
            disc.push(DiscNode { y, point });
        }
    }
    let normal = p0.left_mul(&UNIT_I).q();
    let transversality = dot4(&normal, &p0.invariant_vector(crate::sphere::XI)).abs();
    Ok(FlowBox {
        p0: *p0,
        params,
        disc,
        transversality,
    })
}

impl FlowBox {
    /// Flow-box coordinates `(y, s)` with `p = flow(disc(y), ξ, s)`.
    pub fn coordinates(&self, p: &SpherePoint) -> ([f64; 2], f64) {
        let p0 = self.p0;
        let s = dot4(&p.q(), &p0.left_mul(&UNIT_I).q()).atan2(p.dot(&p0));
        let x = p.reeb_flow(-s);
        let r = x.dot(&p0).clamp(-1.0, 1.0).acos();
        let (a, b) = (
            dot4(&x.q(), &p0.left_mul(&UNIT_J).q()),
            dot4(&x.q(), &p0.left_mul(&UNIT_K).q()),
        );
        let sr = r.sin();
        let y = if sr == 0.0 { [0.0, 0.0] } else { [r * a / sr, r * b / sr] };
        (y, s)
    }

    pub fn point(&self, y: [f64; 2], s: f64) -> SpherePoint {
        disc_point(&self.p0, y).reeb_flow(s)
    }

    pub fn contains(&self, p: &SpherePoint) -> bool {
        let (y, s) = self.coordinates(p);
        y[0].hypot(y[1]) <= self.params.radius && s.abs() <= self.params.eps
    }

    pub fn excluded(&self, p: &SpherePoint) -> bool {
        geodesic_distance(p, &self.p0) < self.params.delta
    }
}

pub const DEFAULT_STEP: f64 = 0.0025;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorStats {
    pub step: f64,
    pub steps_per_side: usize,
    /// Observed order from step halving on the central orbit, when the
    /// differences are above roundoff.
    pub order_estimate: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct PotentialSolution {
    pub flowbox: FlowBox,
    pub s_grid: Vec<f64>,
    /// `values[node][k]` is `Φ` at `(disc[node], s_grid[k])`.
    pub values: Vec<Vec<Option<Endo>>>,
    pub interpolation: &'static str,
    pub stats: IntegratorStats,
    field: MonopoleField,
}

fn rhs(field: &MonopoleField, p: &SpherePoint, phi_pot: &Endo) -> Result<Endo> {
    let s = field.sample(p).map_err(|e| match e {
        Error::EvalDomain => Error::DomainExcluded,
        e => e,
    })?;
    let mut out = s.phi.clone();
    out -= commutator(&s.a[2], phi_pot);
    out += cscale(&commutator(&s.phi, phi_pot), c(0.0, 2.0));
    Ok(out)
}

/// RK4 along the orbit of `x` from `s = 0` to `s = n·h`, returning every node.
fn integrate(field: &MonopoleField, x: &SpherePoint, h: f64, n: usize) -> Result<Vec<Endo>> {
    let mut y = zeros(field.rank);
    let mut out = vec![y.clone()];
    for k in 0..n {
        let s = k as f64 * h;
        let (p0, pm, p1) = (x.reeb_flow(s), x.reeb_flow(s + 0.5 * h), x.reeb_flow(s + h));
        let k1 = rhs(field, &p0, &y)?;
        let k2 = rhs(field, &pm, &(&y + k1.scaled(0.5 * h)))?;
        let k3 = rhs(field, &pm, &(&y + k2.scaled(0.5 * h)))?;
        let k4 = rhs(field, &p1, &(&y + k3.scaled(h)))?;
        y += (k1 + k2.scaled(2.0) + k3.scaled(2.0) + k4).scaled(h / 6.0);
        if !y.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::StepFailure { tol: h });
        }
        out.push(y.clone());
    }
    Ok(out)
}

pub fn solve_potential(field: &MonopoleField, fb: &FlowBox, step: f64) -> Result<PotentialSolution> {
    if !(step > 0.0) {
        return Err(Error::BadParams("ode step must be positive".into()));
    }
    let eps = fb.params.eps;
    let n = (eps / step).ceil() as usize;
    let h = eps / n as f64;
    let s_grid: Vec<f64> = (0..=2 * n).map(|k| (k as f64 - n as f64) * h).collect();
    let values = fb
        .disc
        .iter()
        .map(|node| -> Result<Vec<Option<Endo>>> {
            let fwd = integrate(field, &node.point, h, n)?;
            let bwd = integrate(field, &node.point, -h, n)?;
            let mut row: Vec<Endo> = bwd.into_iter().rev().collect();
            row.extend(fwd.into_iter().skip(1));
            Ok(row
                .into_iter()
                .zip(&s_grid)
                .map(|(v, &s)| (!fb.excluded(&node.point.reeb_flow(s))).then_some(v))
                .collect())
        })
        .collect::<Result<Vec<_>>>()?;
    let order_estimate = {
        let centre = fb.disc.iter().min_by(|a, b| a.y[0].hypot(a.y[1]).total_cmp(&b.y[0].hypot(b.y[1])));
        match centre {
            Some(node) => {
                let end = |k: usize| -> Result<Endo> {
                    Ok(integrate(field, &node.point, h * 4.0 / k as f64, n * k / 4)?.pop().expect("nonempty"))
                };
                let (a, b, c4) = (end(4)?, end(8)?, end(16)?);
                let (d1, d2) = (frob(&(&a - &b)), frob(&(&b - &c4)));
                (d2 > 1e-13).then(|| (d1 / d2).log2())
            }
            None => None,
        }
    };
    Ok(PotentialSolution {
        flowbox: fb.clone(),
        s_grid,
        values,
        interpolation: "re-integration from the disc",
        stats: IntegratorStats {
            step: h,
            steps_per_side: n,
            order_estimate,
        },
        field: field.clone(),
    })
}

/// Step-halving order estimate of the orbit integrator on one orbit.
pub fn order_by_halving(field: &MonopoleField, x: &SpherePoint, s: f64, step: f64) -> Result<f64> {
    let (d1, d2) = halving_differences(field, x, s, step)?;
    Ok((d1 / d2).log2())
}

/// `‖Φ_h − Φ_{h/2}‖` and `‖Φ_{h/2} − Φ_{h/4}‖` at flow time `s`.
pub fn halving_differences(field: &MonopoleField, x: &SpherePoint, s: f64, step: f64) -> Result<(f64, f64)> {
    let n = (s.abs() / step).ceil().max(1.0) as usize;
    let h = s / n as f64;
    let end = |k: usize| -> Result<Endo> { Ok(integrate(field, x, h / k as f64, n * k)?.pop().expect("nonempty")) };
    let (a, b, c4) = (end(1)?, end(2)?, end(4)?);
    Ok((frob(&(&a - &b)), frob(&(&b - &c4))))
}

impl PotentialSolution {
    pub fn field(&self) -> &MonopoleField {
        &self.field
    }

    /// `Φ(p)` for a point of the box.
    pub fn eval(&self, p: &SpherePoint) -> Result<Endo> {
        let (y, s) = self.flowbox.coordinates(p);
        let prm = &self.flowbox.params;
        if y[0].hypot(y[1]) > prm.radius * (1.0 + 1e-9) + 1e-12 || s.abs() > prm.eps * (1.0 + 1e-9) {
            return Err(Error::StencilOutOfBox);
        }
        let x = p.reeb_flow(-s);
        let n = self.stats.steps_per_side;
        Ok(integrate(&self.field, &x, s / n as f64, n)?.pop().expect("nonempty"))
    }

    /// Largest `‖Φ‖` on the `s = 0` slice.
    pub fn initial_slice_defect(&self) -> f64 {
        let k0 = self.s_grid.len() / 2;
        self.values
            .iter()
            .filter_map(|row| row[k0].as_ref().map(frob))
            .fold(0.0, f64::max)
    }

    /// `‖ξ(Φ) + [A_ξ, Φ] − 2i[φ, Φ] − φ‖` with the sixth-order difference
    /// on the stored grid, at every interior node.
    pub fn grid_residuals(&self) -> Result<Vec<f64>> {
        let h = self.stats.step;
        let mut out = Vec::new();
        for (node, row) in self.flowbox.disc.iter().zip(&self.values) {
            for k in 3..row.len().saturating_sub(3) {
                let Some(win) = (k - 3..=k + 3).map(|i| row[i].clone()).collect::<Option<Vec<_>>>() else {
                    continue;
                };
                let d = (&win[4] - &win[2]).scaled(0.75 / h) - (&win[5] - &win[1]).scaled(0.15 / h)
                    + (&win[6] - &win[0]).scaled(1.0 / (60.0 * h));
                let p = node.point.reeb_flow(self.s_grid[k]);
                let r = d - rhs(&self.field, &p, &win[3])?;
                out.push(frob(&r));
            }
        }
        Ok(out)
    }

    /// Defining-equation residual at a point, differentiating the point
    /// evaluator along the exact Reeb flow.
    pub fn point_residual(&self, p: &SpherePoint, fd: &Fd) -> Result<f64> {
        let d = directional(&|q| self.eval(q), p, &[0.0, 0.0, 1.0], fd)?;
        Ok(frob(&(d - rhs(&self.field, p, &self.eval(p)?)?)))
    }

    /// Largest second difference `|Δ²Φ|/h²` and fourth difference `|Δ⁴Φ|`
    /// along the grid; the latter exposes integrator ringing.
    pub fn smoothness(&self) -> (f64, f64) {
        let h = self.stats.step;
        let (mut d2, mut d4): (f64, f64) = (0.0, 0.0);
        for row in &self.values {
            for k in 2..row.len().saturating_sub(2) {
                let Some(w) = (k - 2..=k + 2).map(|i| row[i].clone()).collect::<Option<Vec<_>>>() else {
                    continue;
                };
                let s2 = &w[3] - w[2].scaled(2.0) + &w[1];
                let s4 = &w[4] - w[3].scaled(4.0) + w[2].scaled(6.0) - w[1].scaled(4.0) + &w[0];
                d2 = d2.max(frob(&s2) / (h * h));
                d4 = d4.max(frob(&s4));
            }
        }
        (d2, d4)
    }

    /// Rows `(y1, y2, s, Re/Im of the entries row-major)`.
    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let n = self.field.rank;
        let mut header = vec!["x1".to_string(), "x2".to_string(), "s".to_string()];
        for r in 0..n {
            for c in 0..n {
                header.push(format!("re_{r}{c}"));
                header.push(format!("im_{r}{c}"));
            }
        }
        wr.write_record(&header)?;
        for (node, row) in self.flowbox.disc.iter().zip(&self.values) {
            for (s, v) in self.s_grid.iter().zip(row) {
                let Some(v) = v else { continue };
                let mut rec = vec![node.y[0], node.y[1], *s];
                for r in 0..n {
                    for c in 0..n {
                        rec.push(v[(r, c)].re);
                        rec.push(v[(r, c)].im);
                    }
                }
                wr.write_record(rec.iter().map(|x| format!("{x:e}")))?;
            }
        }
        wr.flush()?;
        Ok(())
    }
}

/// `Φ(x, s) = ∫₀ˢ φ(flow(x, ξ, r)) dr` by composite Simpson; valid when
/// `φ`, `A_ξ` and `Φ` commute.
pub fn quadrature_oracle(field: &MonopoleField, x: &SpherePoint, s: f64, panels: usize) -> Result<Endo> {
    let m = 2 * panels.max(1);
    let h = s / m as f64;
    let mut acc = zeros(field.rank);
    for k in 0..=m {
        let w = if k == 0 || k == m { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += field.phi(&x.reeb_flow(k as f64 * h))?.scaled(w);
    }
    Ok(acc.scaled(h / 3.0))
}

/// `Z(f)` for `Z = σ − i·jσ` of the policy frame.
pub fn z_derivative(
    f: &dyn Fn(&SpherePoint) -> Result<Endo>,
    p: &SpherePoint,
    policy: &FramePolicy,
    fd: &Fd,
    conj: bool,
) -> Result<Endo> {
    let rows = policy.rows(p)?;
    let a = directional(f, p, &rows[0], fd)?;
    let b = directional(f, p, &rows[1], fd)?;
    let sign = if conj { I } else { -I };
    Ok(a + cscale(&b, sign))
}

/// `A_Z = A_σ − i·A_{jσ}` (or `A_Z̄` when `conj`).
pub fn a_z(field: &MonopoleField, p: &SpherePoint, policy: &FramePolicy, conj: bool) -> Result<Endo> {
    let fs = field.in_frame(p, policy)?;
    let sign: Complex64 = if conj { I } else { -I };
    Ok(&fs.a[0] + cscale(&fs.a[1], sign))
}

/// `∇_Z f = Z(f) + [A_Z, f]`.
pub fn nabla_z(
    field: &MonopoleField,
    f: &dyn Fn(&SpherePoint) -> Result<Endo>,
    p: &SpherePoint,
    policy: &FramePolicy,
    fd: &Fd,
    conj: bool,
) -> Result<Endo> {
    Ok(z_derivative(f, p, policy, fd, conj)? + commutator(&a_z(field, p, policy, conj)?, &f(p)?))
}

/// `ψ = −2i∇_ZΦ`.
pub struct PsiField<'a> {
    pub sol: &'a PotentialSolution,
    pub policy: FramePolicy,
    pub fd: Fd,
}

impl PsiField<'_> {
    pub fn eval(&self, p: &SpherePoint) -> Result<Endo> {
        let phi_pot = |q: &SpherePoint| self.sol.eval(q);
        let d = nabla_z(self.sol.field(), &phi_pot, p, &self.policy, &self.fd, false)?;
        Ok(cscale(&d, c(0.0, -2.0)))
    }
}

pub fn psi_field<'a>(sol: &'a PotentialSolution, policy: FramePolicy, fd: Fd) -> PsiField<'a> {
    PsiField { sol, policy, fd }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::{constant_higgs, random_smooth, singular_higgs, zero};
    use crate::linalg::sigma3i;

    fn fb(delta: f64) -> FlowBox {
        flow_box(
            &SpherePoint::identity(),
            FlowBoxParams { radius: 0.3, eps: 0.5, delta, resolution: 2 },
        )
        .unwrap()
    }

    #[test]
    fn disc_is_spanned_by_sigma_and_jsigma() {
        let b = fb(0.0);
        assert!((b.transversality - 1.0).abs() < 1e-15);
        let p = b.point([0.1, 0.0], 0.0);
        assert!((p.q()[2] - 0.1f64.sin()).abs() < 1e-15 && p.q()[1] == 0.0);
        let q = b.point([0.05, -0.2], 0.3);
        let (y, s) = b.coordinates(&q);
        assert!((y[0] - 0.05).abs() < 1e-12 && (y[1] + 0.2).abs() < 1e-12 && (s - 0.3).abs() < 1e-12);
    }

    #[test]
    fn exclusion_radius() {
        let sol = solve_potential(&zero(2), &fb(0.1), 0.05).unwrap();
        let k0 = sol.s_grid.len() / 2;
        let centre = sol.flowbox.disc.iter().position(|n| n.y == [0.0, 0.0]).unwrap();
        assert!(sol.values[centre][k0].is_none());
        assert!(sol.values[centre][0].is_some());
    }

    #[test]
    fn zero_and_constant_higgs() {
        let sol = solve_potential(&zero(2), &fb(0.0), 0.05).unwrap();
        assert!(sol.values.iter().flatten().all(|v| frob(v.as_ref().unwrap()) == 0.0));
        let sol = solve_potential(&constant_higgs(1.0), &fb(0.0), 0.05).unwrap();
        let p = SpherePoint::identity().reeb_flow(0.3);
        let phi = sol.eval(&p).unwrap();
        assert!(frob(&(phi - sigma3i().scaled(0.3))) < 1e-10);
        assert_eq!(sol.initial_slice_defect(), 0.0);
    }

    #[test]
    fn non_abelian_potential_solves_its_equation() {
        let f = random_smooth(2, 21, 0.6);
        let sol = solve_potential(&f, &fb(0.0), DEFAULT_STEP).unwrap();
        let worst = sol.grid_residuals().unwrap().into_iter().fold(0.0, f64::max);
        assert!(worst < 1e-8, "{worst}");
        let p = sol.flowbox.point([0.1, 0.05], 0.2);
        assert!(sol.point_residual(&p, &Fd::default()).unwrap() < 1e-8);
        let order = order_by_halving(&f, &SpherePoint::identity(), 0.5, 0.05).unwrap();
        assert!(order > 3.8, "{order}");
        let (_, ringing) = sol.smoothness();
        assert!(ringing < 1e-6);
    }

    #[test]
    fn quadrature_matches_commuting_case() {
        let f = singular_higgs(SpherePoint::new([0.0, 0.0, 1.0, 0.0]).unwrap(), 0.5);
        let sol = solve_potential(&f, &fb(0.0), 0.01).unwrap();
        let x = sol.flowbox.point([0.2, -0.1], 0.0);
        let q = quadrature_oracle(&f, &x, 0.4, 400).unwrap();
        let v = sol.eval(&x.reeb_flow(0.4)).unwrap();
        assert!(frob(&(q - v)) < 1e-9);
    }

    #[test]
    fn psi_scales_linearly_for_constant_higgs() {
        let policy = FramePolicy::LeftInvariant;
        let p = fb(0.0).point([0.05, 0.1], 0.2);
        let s1 = solve_potential(&constant_higgs(1.0), &fb(0.0), 0.05).unwrap();
        let s3 = solve_potential(&constant_higgs(3.0), &fb(0.0), 0.05).unwrap();
        let a = psi_field(&s1, policy, Fd::default()).eval(&p).unwrap();
        let b = psi_field(&s3, policy, Fd::default()).eval(&p).unwrap();
        assert!(frob(&(a.scaled(3.0) - b)) < 1e-8);
        // ψ = −2i Z(s) φ
        let ds = z_derivative(&|q| Ok(zeros(1).add_scalar(c(s1.flowbox.coordinates(q).1, 0.0))), &p, &policy, &Fd::default(), false)
            .unwrap()[(0, 0)];
        let expect = cscale(&sigma3i(), c(0.0, -2.0) * ds);
        assert!(frob(&(a - expect)) < 1e-8);
        assert!(matches!(
            psi_field(&s1, policy, Fd::default()).eval(&SpherePoint::new([0.0, 0.0, 1.0, 0.0]).unwrap()),
            Err(Error::StencilOutOfBox)
        ));
    }
}
