//! Command orchestration: each command turns a config into a report and
//! optional CSV payloads.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bundle::{
    asd_residual, bianchi_residual, bogomolny_residual, random_smooth, FieldKind, MonopoleField,
};
use crate::cone::{
    calibrate_conventions, closure_residual, complex_structure_defects, dbar_z_residual, hodge4,
    star_identity_residual, unit_frame_volume, Calibration, CalibrationOutcome, CalibrationTolerances,
    ConePoint, Form4Components,
};
use crate::config::ToolConfig;
use crate::error::{Error, Result};
use crate::forms::{hodge3, FormComponents};
use crate::hartogs::{
    abel_gap, adapted_coordinates, gauge_eigen_gap, holonomy_map, multiplicativity_gap, Transport, ZLoop,
};
use crate::linalg::{c, frob, Coef, Endo};
use crate::obstruction::{
    commutator_identity_residual, coupled_residuals, equivalence_gap, obstruction_residuals,
    write_sweep_csv, CommutatorIdentity, CoupledResiduals, PotentialResiduals, SweepRow,
};
use crate::potential::{
    flow_box, halving_differences, order_by_halving, psi_field, quadrature_oracle, solve_potential, FlowBox, FlowBoxParams,
    PotentialSolution,
};
use crate::regularity::{
    admissibility_margin, c1alpha_report, curvature_lipschitz_check, fit_exponent, hoelder_constant,
    GaugeSampleSet, Region, RegularityObject, Verdict,
};
use crate::report::{Condition, ResidualReport, SuiteEntry};
use crate::rng;
use crate::sphere::{
    beta_operator, contact_residuals, frame_at, lambda_at, ricci_xi, standard_ricci_xi, FramePolicy,
    GeometryResiduals, RoundMetric, SpherePoint,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Calibrate,
    VerifyGeometry,
    VerifyCone,
    FieldCheck,
    SolvePotential,
    Obstruction,
    Equivalence,
    Holonomy,
    Regularity,
    CheckTheorem,
    DumpSamples,
}

impl Command {
    pub const ALL: [Command; 11] = [
        Command::Calibrate,
        Command::VerifyGeometry,
        Command::VerifyCone,
        Command::FieldCheck,
        Command::SolvePotential,
        Command::Obstruction,
        Command::Equivalence,
        Command::Holonomy,
        Command::Regularity,
        Command::CheckTheorem,
        Command::DumpSamples,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Command::Calibrate => "calibrate",
            Command::VerifyGeometry => "verify-geometry",
            Command::VerifyCone => "verify-cone",
            Command::FieldCheck => "field-check",
            Command::SolvePotential => "solve-potential",
            Command::Obstruction => "obstruction",
            Command::Equivalence => "equivalence",
            Command::Holonomy => "holonomy",
            Command::Regularity => "regularity",
            Command::CheckTheorem => "check-theorem",
            Command::DumpSamples => "dump-samples",
        }
    }
}

impl std::str::FromStr for Command {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::ConfigInvalid(format!("unknown command {s:?}")))
    }
}

/// A finished command: the report and named CSV files.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: ResidualReport,
    pub csv: Vec<(String, String)>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        self.report.exit_code()
    }
}

// Stream offsets so each suite draws its own points from the seed.
const SALT_CAL: u64 = 0x100;
const SALT_GEOMETRY: u64 = 0x200;
const SALT_CONE: u64 = 0x300;
const SALT_FIELD: u64 = 0x400;
const SALT_ASD: u64 = 0x500;
const SALT_SWEEP: u64 = 0x600;
const SALT_REGION: u64 = 0x700;
const SALT_HOLONOMY: u64 = 0x800;

fn seed(cfg: &ToolConfig, salt: u64) -> u64 {
    cfg.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(salt)
}

pub fn run(command: Command, cfg: &ToolConfig) -> Result<Outcome> {
    cfg.validate()?;
    let cal = calibration(cfg)?;
    let mut report = ResidualReport::new(command.name(), cal.calibration, cfg);
    let mut csv = Vec::new();
    match command {
        Command::Calibrate => calibrate(cfg, &cal, &mut report)?,
        Command::VerifyGeometry => verify_geometry(cfg, &mut report)?,
        Command::VerifyCone => verify_cone(cfg, &cal.calibration, &mut report)?,
        Command::FieldCheck => field_check(cfg, &cal.calibration, &mut report)?,
        Command::SolvePotential => solve(cfg, &mut report, &mut csv)?,
        Command::Obstruction => obstruction(cfg, &mut report, &mut csv)?,
        Command::Equivalence => equivalence(cfg, &cal.calibration, &mut report)?,
        Command::Holonomy => holonomy(cfg, &cal.calibration, &mut report, &mut csv)?,
        Command::Regularity => regularity(cfg, &mut report)?,
        Command::CheckTheorem => check_theorem(cfg, &cal.calibration, &mut report)?,
        Command::DumpSamples => dump_samples(cfg, &mut report, &mut csv)?,
    }
    Ok(Outcome { report, csv })
}

fn par_collect<T: Send>(n: usize, f: impl Fn(usize) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    (0..n).into_par_iter().map(f).collect()
}

fn column<T>(rows: &[T], f: impl Fn(&T) -> f64) -> Vec<f64> {
    rows.iter().map(f).collect()
}

fn calibration(cfg: &ToolConfig) -> Result<CalibrationOutcome> {
    let t = &cfg.tolerances;
    let tol = CalibrationTolerances {
        closure: t.closure,
        j_squared: t.j_squared,
        pullback: t.pullback,
        star_identity: t.star_identity,
    };
    calibrate_conventions(&tol, &calibration_probes(cfg)?, &cfg.fd()).map_err(|e| e.in_suite("calibration"))
}

fn calibration_probes(cfg: &ToolConfig) -> Result<Vec<ConePoint>> {
    (0..4)
        .map(|k| ConePoint::new(rng::sphere_sample(seed(cfg, SALT_CAL), k), 0.6 + 0.3 * k as f64))
        .collect()
}

fn calibrate(cfg: &ToolConfig, out: &CalibrationOutcome, report: &mut ResidualReport) -> Result<()> {
    let t = &cfg.tolerances;
    let row = out.rows.iter().find(|r| r.pass).expect("calibration found a passing row");
    let passing = out.rows.iter().filter(|r| r.pass).count();
    report.suite("calibration.passing_points_minus_one", &[(passing as f64 - 1.0).abs()], 0.5);
    report.suite("calibration.closure", &[row.closure], t.closure);
    report.suite("calibration.j_squared", &[row.j_squared.max(row.metric_invariance)], t.j_squared);
    report.suite("calibration.pullback", &[row.pullback], t.pullback);
    report.suite("calibration.star_identity", &[row.star_identity], t.star_identity);
    let probes = calibration_probes(cfg)?;
    let cal = out.calibration;
    let vol = column(&probes, |cp| (unit_frame_volume(&cal, cp.t) - 1.0).abs());
    report.suite("calibration.unit_frame_volume", &vol, t.volume);
    let flipped = Calibration { omega_sign: -cal.omega_sign, ..cal };
    let fd = cfg.fd();
    let mut broken: f64 = 0.0;
    for cp in &probes {
        broken = broken.max(closure_residual(&flipped, cp, &FramePolicy::LeftInvariant, &fd)?);
    }
    report.suite("calibration.omega_flip_ratio", &[t.omega_flip / broken], 1.0);
    report.note(format!(
        "calibration.omega_flip_ratio is {:e} / closure residual with omega_sign flipped ({broken:e}); it passes when the flip breaks closure by at least {:e}",
        t.omega_flip, t.omega_flip
    ));
    report.note(format!(
        "lattice: {} points scanned, {passing} passing; unit frame volume |1/2 Omega^Omega| = {:.12}",
        out.rows.len(),
        unit_frame_volume(&cal, probes[0].t)
    ));
    let dbar = probes
        .iter()
        .map(|cp| dbar_z_residual(&cal, cp, &FramePolicy::LeftInvariant, &fd))
        .collect::<Result<Vec<_>>>()?;
    report.note(format!(
        "dbar of the embedding coordinates along the cone: max {:e}",
        dbar.iter().copied().fold(0.0, f64::max)
    ));
    Ok(())
}

fn region_points(cfg: &ToolConfig, n: usize, outer: f64, salt: u64) -> Vec<SpherePoint> {
    Region { center: cfg.basepoint, inner: 1e-3, outer, samples: n, seed: seed(cfg, salt) }.points()
}

fn verify_geometry(cfg: &ToolConfig, report: &mut ResidualReport) -> Result<()> {
    let t = &cfg.tolerances;
    let fd = cfg.fd();
    let policy = FramePolicy::LeftInvariant;
    struct Row {
        ortho: f64,
        res: GeometryResiduals,
        beta: f64,
        f: f64,
        lambda: f64,
        z: f64,
    }
    let rows = par_collect(cfg.samples, |k| {
        let p = rng::sphere_sample(seed(cfg, SALT_GEOMETRY), k as u64);
        let frame = frame_at(&p, &policy)?;
        let f = ricci_xi(&RoundMetric, &p, &policy, &fd)?;
        let b = beta_operator(&RoundMetric, &p, &policy, &fd)?;
        let j = [[0.0, -1.0], [1.0, 0.0]];
        let beta = (0..4).map(|e| (b[e / 2][e % 2] - f.sqrt() * j[e / 2][e % 2]).abs()).fold(0.0, f64::max);
        let lam = lambda_at(&p, &policy, &fd)?;
        Ok(Row {
            ortho: frame.orthonormality_defect().max((frame.orientation() - 1.0).abs()),
            res: contact_residuals(&RoundMetric, &p, &policy, &fd)?,
            beta,
            f,
            lambda: (lam.lambda - 0.5).abs(),
            z: lam.z_residual,
        })
    })
    .map_err(|e| e.in_suite("geometry"))?;
    report.suite("geometry.orthonormality", &column(&rows, |r| r.ortho), t.geometry);
    report.suite("geometry.geodesibility", &column(&rows, |r| r.res.geodesibility), t.geometry);
    report.suite("geometry.killing", &column(&rows, |r| r.res.killing), t.geometry);
    report.suite("geometry.integrability", &column(&rows, |r| r.res.integrability), t.geometry);
    report.suite("geometry.divergence", &column(&rows, |r| r.res.divergence), t.geometry);
    report.suite("geometry.beta_is_sqrt_f_j", &column(&rows, |r| r.beta), t.beta);
    let fs = column(&rows, |r| r.f);
    let (lo, hi) = fs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    report.suite("geometry.f_spread", &[hi - lo], t.f_spread);
    report.suite("geometry.f_minus_one", &column(&rows, |r| (r.f - 1.0).abs()), t.f_spread);
    report.suite("contact.identity", &column(&rows, |r| r.res.contact_identity), t.contact);
    report.suite("contact.cross_check", &column(&rows, |r| r.res.contact_cross_check), t.contact);
    report.suite("lambda.left_invariant", &column(&rows, |r| r.lambda), t.lambda);
    report.suite("lambda.z_bracket_left_invariant", &column(&rows, |r| r.z), t.bracket);

    let lift = FramePolicy::flow_lift(cfg.basepoint);
    let n = cfg.samples.min(1000);
    let pts = region_points(cfg, n, 1.0, SALT_GEOMETRY + 1);
    let lifts = par_collect(n, |k| lambda_at(&pts[k], &lift, &fd)).map_err(|e| e.in_suite("lambda.flow_lift"))?;
    report.suite("lambda.flow_lift", &column(&lifts, |l| l.lambda.abs()), t.flow_lambda);
    report.suite("lambda.z_bracket_flow_lift", &column(&lifts, |l| l.z_residual), t.bracket);
    report.note(format!(
        "f from the trace identity is {:.12}; Ric(xi, xi) of the round metric is {:.12}",
        fs.first().copied().unwrap_or(f64::NAN),
        standard_ricci_xi()
    ));
    report.note("lambda = g([sigma, xi], jsigma) / 4, so [Z, xi] = i(4 lambda) Z");
    Ok(())
}

fn random_coeffs(r: &mut rand_chacha::ChaCha8Rng) -> [f64; 3] {
    [0, 1, 2].map(|_| rng::uniform(r, -1.0, 1.0))
}

fn verify_cone(cfg: &ToolConfig, cal: &Calibration, report: &mut ResidualReport) -> Result<()> {
    let t = &cfg.tolerances;
    let fd = cfg.fd();
    let (n_forms, n_points) = (100, 100);
    let s = seed(cfg, SALT_CONE);
    let points = (0..n_points)
        .map(|k| {
            let mut r = rng::stream(s, k as u64);
            let p = rng::sphere_point(&mut r);
            ConePoint::new(p, rng::uniform(&mut r, 0.5, 2.0))
        })
        .collect::<Result<Vec<_>>>()?;
    let forms: Vec<[f64; 3]> = (0..n_forms).map(|k| random_coeffs(&mut rng::stream(s + 1, k as u64))).collect();
    let star = par_collect(n_points, |i| {
        let mut worst: f64 = 0.0;
        for f in &forms {
            worst = worst.max(star_identity_residual(cal, points[i].t, &FormComponents::two(*f))?);
        }
        Ok(worst)
    })
    .map_err(|e| e.in_suite("cone.star_identity"))?;
    report.suite("cone.star_identity", &star, t.star_identity);

    let mut inv3 = Vec::new();
    let mut inv4 = Vec::new();
    for (k, f) in forms.iter().enumerate() {
        let two = FormComponents::two(*f);
        inv3.push(hodge3(&hodge3(&two, cal.orient_sign)?, cal.orient_sign)?.minus(&two).norm());
        let mut r = rng::stream(s + 2, k as u64);
        let vals: Vec<f64> = (0..6).map(|_| rng::uniform(&mut r, -1.0, 1.0)).collect();
        let w = Form4Components { c: [vals[0], vals[1], vals[2], vals[3], vals[4], vals[5]] };
        let tt = points[k % n_points].t;
        inv4.push(hodge4(cal, tt, &hodge4(cal, tt, &w)).minus(&w).norm(tt, cal.c));
    }
    report.suite("cone.star3_involution", &inv3, t.involution);
    report.suite("cone.star4_involution", &inv4, t.involution);

    let closure = par_collect(n_points, |i| closure_residual(cal, &points[i], &FramePolicy::LeftInvariant, &fd))
        .map_err(|e| e.in_suite("cone.closure"))?;
    report.suite("cone.closure", &closure, t.closure);
    let j2 = column(&points, |cp| {
        let (a, b) = complex_structure_defects(cal, cp.t);
        a.max(b)
    });
    report.suite("cone.j_squared", &j2, t.j_squared);
    let vol = column(&points, |cp| (unit_frame_volume(cal, cp.t) - 1.0).abs());
    report.suite("cone.unit_frame_volume", &vol, t.volume);
    Ok(())
}

/// Sample points inside the field's domain, drawn where the frame policy is
/// defined.
fn field_points(cfg: &ToolConfig, field: &MonopoleField, n: usize, salt: u64) -> Vec<SpherePoint> {
    let raw: Vec<SpherePoint> = match cfg.policy() {
        FramePolicy::LeftInvariant => (0..4 * n as u64).map(|k| rng::sphere_sample(seed(cfg, salt), k)).collect(),
        _ => region_points(cfg, 4 * n, 1.0, salt),
    };
    raw.into_iter().filter(|p| interior(field, p, 0.05)).take(n).collect()
}

/// `p` and its neighbours at distance `r` along the invariant directions lie
/// in the field's domain.
fn interior(field: &MonopoleField, p: &SpherePoint, r: f64) -> bool {
    field.domain.contains(p)
        && (0..3).all(|k| [r, -r].iter().all(|&s| field.domain.contains(&p.flow_invariant(k, s))))
}

fn field_check(cfg: &ToolConfig, cal: &Calibration, report: &mut ResidualReport) -> Result<()> {
    let t = &cfg.tolerances;
    let fd = cfg.fd();
    let policy = cfg.policy();
    let field = cfg.load_field()?;
    let pts = field_points(cfg, &field, cfg.field_points, SALT_FIELD);
    let bog = par_collect(pts.len(), |k| bogomolny_residual(&field, &pts[k], &policy, &fd)).map_err(|e| e.in_suite("field.bogomolny"))?;
    let tol = if field.kind == FieldKind::HopfInvariantAbelian { t.hopf_profile } else { t.bogomolny };
    report.suite("field.bogomolny", &bog, tol);
    let bianchi = par_collect(pts.len(), |k| bianchi_residual(&field, &pts[k], &fd)).map_err(|e| e.in_suite("field.bianchi"))?;
    report.suite("field.bianchi", &bianchi, if field.kind == FieldKind::HopfInvariantAbelian { t.hopf_profile } else { t.bianchi });

    // ‖F′ + ⋆′F′‖ ≤ K·‖∇φ − ½⋆F‖ on a corpus of non-solutions.
    let s = seed(cfg, SALT_ASD);
    let ratios = par_collect(64, |k| {
        let f = random_smooth(2, s.wrapping_add((k / 16) as u64), 0.5);
        let mut r = rng::stream(s, k as u64);
        let p = rng::sphere_point(&mut r);
        let cp = ConePoint::new(p, rng::uniform(&mut r, 0.7, 1.5))?;
        let b = bogomolny_residual(&f, &p, &FramePolicy::LeftInvariant, &fd)?;
        let a = asd_residual(&f, &cp, &FramePolicy::LeftInvariant, cal, &fd)?;
        Ok(if b > 1e-9 { a / b } else { 0.0 })
    })
    .map_err(|e| e.in_suite("field.asd_constant"))?;
    report.suite("field.asd_constant", &ratios, t.asd_constant);
    report.note(format!("field `{}` (rank {}), {} points in the domain", field.label, field.rank, pts.len()));
    Ok(())
}

fn potential_for(cfg: &ToolConfig, field: &MonopoleField) -> Result<PotentialSolution> {
    let fb = cfg.flow_box()?;
    solve_potential(field, &fb, cfg.ode_step).map_err(|e| e.in_suite("potential"))
}

fn solve(cfg: &ToolConfig, report: &mut ResidualReport, csv: &mut Vec<(String, String)>) -> Result<()> {
    let t = &cfg.tolerances;
    let field = cfg.load_field()?;
    let sol = potential_for(cfg, &field)?;
    let fb = &sol.flowbox;
    report.suite("potential.residual", &sol.grid_residuals()?, t.potential);
    report.suite("potential.initial_slice", &[sol.initial_slice_defect()], t.initial_slice);
    let (d2, d4) = sol.smoothness();
    report.suite("potential.ringing", &[d4], t.ringing);
    report.note(format!("potential: max second difference {d2:e}, max fourth difference {d4:e}"));

    let x = fb.disc[0].point;
    let (d1, _) = halving_differences(&field, &x, fb.params.eps, 4.0 * cfg.ode_step)?;
    let mut order = order_by_halving(&field, &x, fb.params.eps, 4.0 * cfg.ode_step)?;
    if d1 < 1e-13 * (1.0 + frob(&sol.eval(&fb.point(fb.disc[0].y, fb.params.eps))?)) {
        let oracle = random_smooth(field.rank.max(2), cfg.seed, 0.5);
        order = order_by_halving(&oracle, &x, fb.params.eps, 4.0 * cfg.ode_step)?;
        report.note("RK4 is exact to roundoff for this field; the integrator order is measured on a random smooth field");
    }
    report.suite("potential.order_ratio", &[t.order / order], 1.0);
    report.note(format!("potential.order_ratio is {} / observed order {order:.4}", t.order));

    if matches!(field.kind, FieldKind::Zero | FieldKind::ConstantHiggs) {
        let mut gaps = Vec::new();
        for (node, row) in fb.disc.iter().zip(&sol.values) {
            let phi = field.phi(&node.point)?;
            for (s, v) in sol.s_grid.iter().zip(row) {
                if let Some(v) = v {
                    gaps.push(frob(&(v - phi.scaled(*s))));
                }
            }
        }
        report.suite("potential.closed_form", &gaps, t.closed_form);
    }
    let abelian = fb.disc.iter().map(|n| field.is_abelian_at(&n.point)).collect::<Result<Vec<_>>>()?;
    if abelian.iter().all(|a| *a) {
        let mut gaps = Vec::new();
        for node in &fb.disc {
            for s in [-0.5 * fb.params.eps, 0.3 * fb.params.eps, 0.9 * fb.params.eps] {
                let p = fb.point(node.y, s);
                gaps.push(frob(&(sol.eval(&p)? - quadrature_oracle(&field, &node.point, s, 64)?)));
            }
        }
        report.suite("potential.quadrature", &gaps, t.quadrature);
    } else {
        report.note("field is not abelian on the flow box; quadrature oracle skipped");
    }
    let mut buf = Vec::new();
    sol.write_csv(&mut buf)?;
    csv.push(("potential.csv".into(), String::from_utf8(buf).expect("csv is utf-8")));
    Ok(())
}

/// Interior points of the flow box, far enough from its faces for nested
/// stencils.
fn sweep_points(cfg: &ToolConfig, fb: &FlowBox) -> Vec<SpherePoint> {
    let s = seed(cfg, SALT_SWEEP);
    (0..cfg.obstruction.points as u64)
        .map(|k| {
            let mut r = rng::stream(s, k);
            let rad = 0.5 * fb.params.radius * rng::uniform(&mut r, 0.0, 1.0).sqrt();
            let th = rng::uniform(&mut r, 0.0, 2.0 * std::f64::consts::PI);
            let sv = rng::uniform(&mut r, -0.5, 0.5) * fb.params.eps;
            fb.point([rad * th.cos(), rad * th.sin()], sv)
        })
        .collect()
}

struct SweepPoint {
    p: SpherePoint,
    coupled: CoupledResiduals,
    potential: PotentialResiduals,
    identity: CommutatorIdentity,
    bogomolny: f64,
}

fn sweep(cfg: &ToolConfig, sol: &PotentialSolution) -> Result<Vec<SweepPoint>> {
    let policy = cfg.policy();
    let fd = cfg.fd();
    let field = sol.field();
    let pts = sweep_points(cfg, &sol.flowbox);
    let psi = psi_field(sol, policy, fd);
    par_collect(pts.len(), |k| {
        let p = pts[k];
        let psi_fn = |q: &SpherePoint| psi.eval(q);
        let pot = |q: &SpherePoint| sol.eval(q);
        Ok(SweepPoint {
            p,
            coupled: coupled_residuals(field, &psi_fn, &p, &policy, &fd)?,
            potential: obstruction_residuals(sol, &p, &policy, &fd, cfg.corollary_mode)?,
            identity: commutator_identity_residual(field, &pot, &p, &policy, &fd)?,
            bogomolny: bogomolny_residual(field, &p, &policy, &fd)?,
        })
    })
    .map_err(|e| e.in_suite("obstruction"))
}

/// Largest `R/E` over points where `E` is resolvable.
fn implication_constant(rows: &[SweepPoint]) -> Option<f64> {
    let mut k: Option<f64> = None;
    for r in rows {
        for (num, den) in [(r.coupled.r1, r.potential.e1), (r.coupled.r2, r.potential.e2)] {
            if den > 1e-9 {
                k = Some(k.unwrap_or(0.0).max(num / den));
            }
        }
    }
    k
}

fn obstruction(cfg: &ToolConfig, report: &mut ResidualReport, csv: &mut Vec<(String, String)>) -> Result<()> {
    let t = &cfg.tolerances;
    let field = cfg.load_field()?;
    let sol = potential_for(cfg, &field)?;
    let rows = sweep(cfg, &sol)?;
    report.suite("obstruction.e1", &column(&rows, |r| r.potential.e1), t.e1);
    report.suite("obstruction.e2", &column(&rows, |r| r.potential.e2), t.e2);
    report.suite("obstruction.concise_gap", &column(&rows, |r| r.coupled.concise_gap), t.coupled_concise);
    report.suite("obstruction.lambda_relation", &column(&rows, |r| r.potential.lambda_relation_gap), t.lambda_relation);
    match implication_constant(&rows) {
        Some(k) => {
            report.suite("obstruction.implication_constant", &[k], t.implication_constant);
        }
        None => report.note("E1 and E2 vanish at every sweep point; the implication constant is not resolvable"),
    }
    report.suite("identity5.residual", &column(&rows, |r| r.identity.residual), t.eq5);
    report.suite("identity5.bracket", &column(&rows, |r| r.identity.bracket), t.bracket);
    let solutions: Vec<&SweepPoint> = rows.iter().filter(|r| r.bogomolny <= cfg.obstruction.bogomolny_tol).collect();
    if solutions.len() == rows.len() {
        report.suite("identity5.sub_identity", &solutions.iter().map(|r| r.identity.sub_identity).collect::<Vec<_>>(), t.sub_identity);
        report.suite("identity5.rewritten", &solutions.iter().map(|r| r.identity.rewritten).collect::<Vec<_>>(), t.eq5);
    } else {
        report.note("field is not a Bogomolny solution on the sweep; the sub-identity and rewritten form are not checked");
    }
    let lam = rows.first().map(|r| r.potential.lambda).unwrap_or(f64::NAN);
    let alt = rows.iter().map(|r| r.potential.e2_alt).fold(0.0, f64::max);
    report.note(format!("lambda = {lam:.12} in the {} frame; E2 with lambda = 2 peaks at {alt:e}", cfg.policy().name()));
    if cfg.corollary_mode {
        report.note("corollary mode: E2 omits the lambda term");
    }
    let sweep_rows: Vec<SweepRow> = rows
        .iter()
        .map(|r| SweepRow {
            point: r.p,
            r1: r.coupled.r1,
            r2: r.coupled.r2,
            e1: r.potential.e1,
            e2: r.potential.e2,
            eq5: r.identity.residual,
            equivalence_gap: f64::NAN,
        })
        .collect();
    let mut buf = Vec::new();
    write_sweep_csv(&sweep_rows, &mut buf)?;
    csv.push(("obstruction.csv".into(), String::from_utf8(buf).expect("csv is utf-8")));
    Ok(())
}

fn equivalence(cfg: &ToolConfig, cal: &Calibration, report: &mut ResidualReport) -> Result<()> {
    let t = &cfg.tolerances;
    let field = cfg.load_field()?;
    let sol = potential_for(cfg, &field)?;
    let policy = cfg.policy();
    let fd = cfg.fd();
    let pts = sweep_points(cfg, &sol.flowbox);
    let psi = psi_field(&sol, policy, fd);
    let rows = par_collect(pts.len(), |k| {
        let psi_fn = |q: &SpherePoint| psi.eval(q);
        let tt = 0.7 + 0.8 * k as f64 / pts.len().max(2).saturating_sub(1) as f64;
        equivalence_gap(&field, &psi_fn, &ConePoint::new(pts[k], tt)?, &policy, cal, &fd, cfg.obstruction.bogomolny_tol)
    })
    .map_err(|e| e.in_suite("equivalence"))?;
    report.suite("equivalence.gap", &column(&rows, |r| r.gap), t.equivalence);
    report.suite("equivalence.slot_gap", &column(&rows, |r| r.slot_gap), t.equivalence);
    report.suite("equivalence.slot_coincidence", &column(&rows, |r| r.slot_coincidence), t.slot_coincidence);
    Ok(())
}

fn holonomy(
    cfg: &ToolConfig,
    cal: &Calibration,
    report: &mut ResidualReport,
    csv: &mut Vec<(String, String)>,
) -> Result<()> {
    let t = &cfg.tolerances;
    let h = &cfg.holonomy;
    let field = cfg.load_field()?;
    let policy = cfg.policy();
    let fd = cfg.fd();
    let fb = flow_box(
        &cfg.basepoint,
        FlowBoxParams { radius: cfg.flow_box.radius, eps: h.flow_eps, delta: 0.0, resolution: 1 },
    )?;
    let sol = solve_potential(&field, &fb, h.ode_step).map_err(|e| e.in_suite("holonomy"))?;
    let psi = psi_field(&sol, policy, fd);
    let psi_fn = |q: &SpherePoint| psi.eval(q);
    let chart = adapted_coordinates(&cfg.basepoint, cfg.chart, *cal);
    let tr = Transport { field: &field, psi: &psi_fn, chart: &chart, policy, mode: h.mode, fd, steps: h.grid.steps };
    let map = holonomy_map(&tr, &h.grid).map_err(|e| e.in_suite("holonomy"))?;
    report.suite("holonomy.deviation_disc", &[map.max_deviation_disc], t.holonomy_deviation);
    report.suite("holonomy.deviation_annulus", &[map.max_deviation_annulus], t.holonomy_deviation);
    report.note(map.narrative.clone());

    let c0 = cfg.chart.disc_center;
    let lp = ZLoop { z0: c(h.grid.z0[0], h.grid.z0[1]), radius: h.grid.radius, w: c(c0[0], c0[1]), turns: 1.0 };
    let checks = || -> Result<(f64, f64, f64)> {
        let mut r = rng::stream(seed(cfg, SALT_HOLONOMY), 0);
        let (x, y): (Endo, Endo) = (rng::gl(&mut r, field.rank, 1.0), rng::gl(&mut r, field.rank, 1.0));
        Ok((
            multiplicativity_gap(&tr, &lp)?,
            abel_gap(&tr, &lp, h.quadrature_points)?,
            gauge_eigen_gap(&tr, &lp, &x, &y, h.gauge_eps)?,
        ))
    };
    let (mult, abel, eig) = checks().map_err(|e| e.in_suite("holonomy"))?;
    report.suite("holonomy.multiplicativity", &[mult], t.multiplicativity);
    report.suite("holonomy.abel", &[abel], t.abel);
    report.suite("holonomy.gauge_eigenvalues", &[eig], t.gauge_eigenvalues);
    report.note(format!("holonomy transport mode: {}", h.mode.name()));
    let mut buf = Vec::new();
    map.write_csv(&mut buf)?;
    csv.push(("holonomy.csv".into(), String::from_utf8(buf).expect("csv is utf-8")));
    Ok(())
}

fn region(cfg: &ToolConfig) -> Region {
    let r = &cfg.regularity;
    Region { center: cfg.basepoint, inner: r.inner, outer: r.outer, samples: r.samples, seed: seed(cfg, SALT_REGION) }
}

/// `C^{1,α}` sections for the Higgs field and the connection, the curvature
/// Lipschitz check, and the raw sample file when configured.
fn regularity_suites(cfg: &ToolConfig, report: &mut ResidualReport) -> Result<Vec<String>> {
    let t = &cfg.tolerances;
    let r = &cfg.regularity;
    let field = cfg.load_field()?;
    let policy = cfg.policy();
    let fd = cfg.fd();
    let reg = region(cfg);
    let mut names = Vec::new();
    for obj in [RegularityObject::Higgs(field.clone()), RegularityObject::Connection(field.clone())] {
        let name = format!("regularity.{}.divergence_factor", obj.name());
        let s = c1alpha_report(&obj, &reg, r.alpha, &policy, &fd).map_err(|e| e.in_suite(&name))?;
        report.push(
            SuiteEntry::from_samples(&name, &[s.divergence_factor], crate::regularity::DIVERGENCE_FAIL).with_verdict(s.verdict),
        );
        report.note(format!(
            "{}: C^(1,{}) constants {:?} at inner radii {:?}",
            obj.name(),
            r.alpha,
            s.constants,
            s.inner_radii
        ));
        names.push(name);
    }
    let lip = curvature_lipschitz_check(&field, &reg, &policy).map_err(|e| e.in_suite("regularity.curvature_lipschitz"))?;
    report.suite("regularity.curvature_lipschitz_excess", &[lip.worst_excess.max(0.0)], t.lipschitz_slack);
    report.note(format!("curvature commutator: measured Lipschitz {:e}, bound {:e}", lip.measured, lip.bound));
    names.push("regularity.curvature_lipschitz_excess".into());
    if let Some(path) = &r.sample_file {
        let set = GaugeSampleSet::read_csv(path).map_err(|e| e.in_suite("regularity.samples"))?;
        let margin = admissibility_margin(&set)?;
        report.suite("regularity.samples.inverse_admissibility_margin", &[1.0 / margin], 1e12);
        let fit = fit_exponent(&set)?;
        report.suite("regularity.samples.exponent_shortfall", &[(r.alpha - fit.alpha).max(0.0)], t.exponent);
        report.note(format!(
            "samples: {} points, admissibility margin {margin:e}, Hoelder constant {:e} at alpha {}, fitted exponent {:.4}",
            set.samples.len(),
            hoelder_constant(&set, r.alpha)?,
            r.alpha,
            fit.alpha
        ));
        names.push("regularity.samples.inverse_admissibility_margin".into());
        names.push("regularity.samples.exponent_shortfall".into());
    }
    report.note(format!(
        "sampled U has radius {}; the framing domain U' has radius {}",
        r.outer,
        r.outer / r.inner_outer_ratio
    ));
    Ok(names)
}

fn regularity(cfg: &ToolConfig, report: &mut ResidualReport) -> Result<()> {
    regularity_suites(cfg, report).map(|_| ())
}

fn check_theorem(cfg: &ToolConfig, cal: &Calibration, report: &mut ResidualReport) -> Result<()> {
    let t = &cfg.tolerances;
    let field = cfg.load_field()?;
    let sol = potential_for(cfg, &field)?;
    let rows = sweep(cfg, &sol)?;
    report.suite("theorem.e1", &column(&rows, |r| r.potential.e1), t.condition_i);
    report.suite("theorem.e2", &column(&rows, |r| r.potential.e2), t.condition_i);
    let cond = |report: &ResidualReport, name: &str, suites: Vec<String>| Condition {
        name: name.into(),
        verdict: suites
            .iter()
            .filter_map(|s| report.get(s))
            .fold(Verdict::Pass, |v, s| v.worst(s.verdict)),
        suites,
    };
    let c1 = cond(report, "(i) potential equations", vec!["theorem.e1".into(), "theorem.e2".into()]);
    let names = regularity_suites(cfg, report)?;
    let c2 = cond(report, "(ii) uniform C^(1,alpha) regularity", names);
    report.conditions.push(c1);
    report.conditions.push(c2);
    if cfg.holonomy.in_theorem {
        let mut csv = Vec::new();
        let mut sub = ResidualReport::new("holonomy", *cal, cfg);
        holonomy(cfg, cal, &mut sub, &mut csv)?;
        let names: Vec<String> = sub.suites.iter().map(|s| s.name.clone()).collect();
        report.suites.extend(sub.suites);
        report.notes.extend(sub.notes);
        let c3 = cond(report, "holonomy triviality", names);
        report.conditions.push(c3);
    }
    if cfg.corollary_mode {
        report.note("corollary mode: the flow of xi is the Hopf fibration and E2 omits the lambda term");
    }
    Ok(())
}

fn dump_samples(cfg: &ToolConfig, report: &mut ResidualReport, csv: &mut Vec<(String, String)>) -> Result<()> {
    let field = cfg.load_field()?;
    let policy = cfg.policy();
    let reg = region(cfg);
    let quantities: [(&str, Box<dyn Fn(&SpherePoint) -> Result<Endo> + Send + Sync>); 4] = [
        ("phi", Box::new({
            let f = field.clone();
            move |p: &SpherePoint| f.phi(p)
        })),
        ("a_sigma", Box::new(component(&field, policy, 0))),
        ("a_jsigma", Box::new(component(&field, policy, 1))),
        ("a_xi", Box::new(component(&field, policy, 2))),
    ];
    for (name, q) in quantities {
        let g: Arc<dyn crate::bundle::Gauge> = Arc::new(q);
        let set = GaugeSampleSet::from_gauge(g.as_ref(), &reg).map_err(|e| e.in_suite("dump-samples"))?;
        let mut buf = Vec::new();
        set.write_csv(&mut buf)?;
        csv.push((format!("samples_{name}.csv"), String::from_utf8(buf).expect("csv is utf-8")));
    }
    report.note(format!(
        "{} samples of phi and A in the frame `{}` around the basepoint, radii [{}, {}]",
        reg.samples,
        policy.name(),
        reg.inner,
        reg.outer
    ));
    Ok(())
}

fn component(field: &MonopoleField, policy: FramePolicy, k: usize) -> impl Fn(&SpherePoint) -> Result<Endo> + Send + Sync {
    let f = field.clone();
    move |p: &SpherePoint| Ok(f.in_frame(p, &policy)?.a[k].clone())
}

