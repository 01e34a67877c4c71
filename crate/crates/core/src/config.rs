//! Tool configuration. Every key has a default; unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bundle::{load_field_spec, make_builtin, FieldSpec, MonopoleField};
use crate::error::{Error, Result};
use crate::fd::Fd;
use crate::hartogs::{ChartRadii, HolonomyGrid, TransportMode};
use crate::potential::{FlowBox, FlowBoxParams, DEFAULT_STEP};
use crate::sphere::{FramePolicy, SpherePoint, DEFAULT_BASEPOINT, SIGMA};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrameChoice {
    #[default]
    LeftInvariant,
    FlowLift,
}

impl std::str::FromStr for FrameChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left-invariant" => Ok(FrameChoice::LeftInvariant),
            "flow-lift" => Ok(FrameChoice::FlowLift),
            _ => Err(Error::ConfigInvalid(format!("unknown frame {s:?}"))),
        }
    }
}

/// A builtin name, a path to a spec file, or an inline spec.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldChoice {
    Named(String),
    Inline(FieldSpec),
}

impl Default for FieldChoice {
    fn default() -> Self {
        FieldChoice::Named("zero".into())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub geometry: f64,
    pub beta: f64,
    pub f_spread: f64,
    pub contact: f64,
    pub lambda: f64,
    pub bracket: f64,
    pub flow_lambda: f64,
    pub closure: f64,
    pub j_squared: f64,
    pub pullback: f64,
    pub volume: f64,
    pub omega_flip: f64,
    pub star_identity: f64,
    pub involution: f64,
    pub bogomolny: f64,
    pub hopf_profile: f64,
    pub asd_constant: f64,
    pub bianchi: f64,
    pub potential: f64,
    pub initial_slice: f64,
    pub closed_form: f64,
    pub order: f64,
    pub quadrature: f64,
    pub ringing: f64,
    pub coupled_concise: f64,
    pub e1: f64,
    pub e2: f64,
    pub eq5: f64,
    pub sub_identity: f64,
    pub lambda_relation: f64,
    pub equivalence: f64,
    pub slot_coincidence: f64,
    pub implication_constant: f64,
    pub holonomy_deviation: f64,
    pub multiplicativity: f64,
    pub abel: f64,
    pub gauge_eigenvalues: f64,
    pub condition_i: f64,
    pub lipschitz_slack: f64,
    pub exponent: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            geometry: 1e-6,
            beta: 1e-8,
            f_spread: 1e-8,
            contact: 1e-6,
            lambda: 1e-10,
            bracket: 1e-6,
            flow_lambda: 1e-6,
            closure: 1e-6,
            j_squared: 1e-12,
            pullback: 1e-8,
            volume: 1e-8,
            omega_flip: 1e-2,
            star_identity: 1e-8,
            involution: 1e-12,
            bogomolny: 1e-12,
            hopf_profile: 1e-5,
            asd_constant: 10.0,
            bianchi: 1e-6,
            potential: 1e-8,
            initial_slice: 1e-14,
            closed_form: 1e-10,
            order: 3.8,
            quadrature: 1e-9,
            ringing: 1e-6,
            coupled_concise: 1e-10,
            e1: 1e-6,
            e2: 1e-7,
            eq5: 1e-5,
            sub_identity: 1e-6,
            lambda_relation: 1e-12,
            equivalence: 1e-5,
            slot_coincidence: 1e-8,
            implication_constant: 20.0,
            holonomy_deviation: 1e-3,
            multiplicativity: 1e-8,
            abel: 1e-7,
            gauge_eigenvalues: 1e-7,
            condition_i: 1e-6,
            lipschitz_slack: 1e-9,
            exponent: 0.05,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlowBoxConfig {
    pub radius: f64,
    pub eps: f64,
    pub delta: f64,
    pub resolution: usize,
    /// Distance from the basepoint along `σ` to the centre of the box.
    pub offset: f64,
}

impl Default for FlowBoxConfig {
    fn default() -> Self {
        FlowBoxConfig {
            radius: 0.2,
            eps: 0.5,
            delta: 0.0,
            resolution: 2,
            offset: 0.3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ObstructionConfig {
    pub points: usize,
    pub bogomolny_tol: f64,
}

impl Default for ObstructionConfig {
    fn default() -> Self {
        ObstructionConfig {
            points: 4,
            bogomolny_tol: 1e-4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HolonomyConfig {
    pub grid: HolonomyGrid,
    /// Half-length of the flow box carrying `ψ` around the puncture fibre.
    pub flow_eps: f64,
    pub ode_step: f64,
    pub gauge_eps: f64,
    pub quadrature_points: usize,
    pub mode: TransportMode,
    /// Add holonomy triviality to `check-theorem`.
    pub in_theorem: bool,
}

impl Default for HolonomyConfig {
    fn default() -> Self {
        HolonomyConfig {
            grid: HolonomyGrid::default(),
            flow_eps: 3.0,
            ode_step: 0.05,
            gauge_eps: 0.1,
            quadrature_points: 256,
            mode: TransportMode::Literal,
            in_theorem: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RegularityConfig {
    pub alpha: f64,
    pub inner: f64,
    pub outer: f64,
    pub samples: usize,
    /// Ratio of the sampled ball to the ball carrying the unit fields.
    pub inner_outer_ratio: f64,
    /// Raw gauge samples (CSV) to analyse alongside the field.
    pub sample_file: Option<PathBuf>,
}

impl Default for RegularityConfig {
    fn default() -> Self {
        RegularityConfig {
            alpha: 0.5,
            inner: 0.08,
            outer: 0.5,
            samples: 150,
            inner_outer_ratio: 0.5,
            sample_file: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub report: Option<PathBuf>,
    pub csv_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToolConfig {
    pub fd_step: f64,
    pub ode_step: f64,
    pub seed: u64,
    /// Random points for the geometry and cone suites.
    pub samples: usize,
    /// Points for the field suites.
    pub field_points: usize,
    pub basepoint: SpherePoint,
    pub frame: FrameChoice,
    pub field: FieldChoice,
    pub corollary_mode: bool,
    pub flow_box: FlowBoxConfig,
    pub obstruction: ObstructionConfig,
    pub chart: ChartRadii,
    pub holonomy: HolonomyConfig,
    pub regularity: RegularityConfig,
    pub tolerances: Tolerances,
    pub output: OutputConfig,
}

impl Default for ToolConfig {
    fn default() -> Self {
        ToolConfig {
            fd_step: 1e-3,
            ode_step: DEFAULT_STEP,
            seed: 0,
            samples: 10_000,
            field_points: 200,
            basepoint: SpherePoint::new(DEFAULT_BASEPOINT).expect("unit"),
            frame: FrameChoice::LeftInvariant,
            field: FieldChoice::default(),
            corollary_mode: false,
            flow_box: FlowBoxConfig::default(),
            obstruction: ObstructionConfig::default(),
            chart: ChartRadii::default(),
            holonomy: HolonomyConfig::default(),
            regularity: RegularityConfig::default(),
            tolerances: Tolerances::default(),
            output: OutputConfig::default(),
        }
    }
}

impl ToolConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: ToolConfig = serde_json::from_str(&text).map_err(|e| Error::ConfigInvalid(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::ConfigInvalid(what.to_string()));
        let fb = &self.flow_box;
        let r = &self.regularity;
        if !(self.fd_step > 0.0 && self.ode_step > 0.0) {
            return bad("fd_step and ode_step must be positive");
        }
        if !(fb.radius > 0.0 && fb.eps > 0.0 && fb.eps < 2.0 * std::f64::consts::PI && fb.delta >= 0.0 && fb.offset >= 0.0)
            || fb.resolution == 0
        {
            return bad("flow_box: radius, eps positive with eps < 2π; delta, offset non-negative");
        }
        if !(self.holonomy.flow_eps > 0.0 && self.holonomy.flow_eps < 2.0 * std::f64::consts::PI && self.holonomy.ode_step > 0.0) {
            return bad("holonomy: flow_eps in (0, 2π), ode_step positive");
        }
        let c = &self.chart;
        if !(c.eps_z > 0.0 && c.eps_w > c.annulus_inner && c.annulus_inner > 0.0 && c.disc_radius > 0.0) {
            return bad("chart radii must be positive with annulus_inner < eps_w");
        }
        if !(r.alpha > 0.0 && r.alpha <= 1.0 && r.inner > 0.0 && r.outer > r.inner && r.inner_outer_ratio > 0.0 && r.inner_outer_ratio < 1.0) {
            return bad("regularity: 0 < alpha ≤ 1, 0 < inner < outer, 0 < inner_outer_ratio < 1");
        }
        let t = serde_json::to_value(&self.tolerances)?;
        if t.as_object().is_some_and(|m| m.values().any(|v| !(v.as_f64().unwrap_or(0.0) > 0.0))) {
            return bad("tolerances must be positive");
        }
        if self.samples == 0 || self.field_points == 0 || self.obstruction.points == 0 || self.regularity.samples < 2 {
            return bad("sample counts must be positive");
        }
        Ok(())
    }

    pub fn fd(&self) -> Fd {
        Fd::default().with_step(self.fd_step)
    }

    pub fn policy(&self) -> FramePolicy {
        match self.frame {
            FrameChoice::LeftInvariant => FramePolicy::LeftInvariant,
            FrameChoice::FlowLift => FramePolicy::flow_lift(self.basepoint),
        }
    }

    pub fn load_field(&self) -> Result<MonopoleField> {
        match &self.field {
            FieldChoice::Named(name) => load_field_spec(name),
            FieldChoice::Inline(spec) => make_builtin(spec, None),
        }
    }

    /// The flow box used by the potential, obstruction and theorem commands.
    pub fn flow_box(&self) -> Result<FlowBox> {
        let fb = &self.flow_box;
        let v = self.basepoint.ambient(&unit(SIGMA, fb.offset));
        let centre = self.basepoint.exp(&v);
        crate::potential::flow_box(
            &centre,
            FlowBoxParams {
                radius: fb.radius,
                eps: fb.eps,
                delta: fb.delta,
                resolution: fb.resolution,
            },
        )
    }
}

fn unit(k: usize, s: f64) -> [f64; 3] {
    let mut v = [0.0; 3];
    v[k] = s;
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_and_unknown_keys_fail() {
        let cfg = ToolConfig::default();
        cfg.validate().unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        let back: ToolConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
        let partial: ToolConfig = serde_json::from_str(r#"{"seed": 4, "frame": "flow-lift"}"#).unwrap();
        assert_eq!((partial.seed, partial.frame), (4, FrameChoice::FlowLift));
        assert!(serde_json::from_str::<ToolConfig>(r#"{"sed": 4}"#).is_err());
        assert!(serde_json::from_str::<ToolConfig>(r#"{"flow_box": {"radius": 0.1, "epsilon": 1}}"#).is_err());
    }

    #[test]
    fn invalid_values_are_rejected() {
        let mut cfg = ToolConfig::default();
        cfg.flow_box.eps = 7.0;
        assert!(matches!(cfg.validate(), Err(Error::ConfigInvalid(_))));
        let mut cfg = ToolConfig::default();
        cfg.tolerances.e2 = 0.0;
        assert!(matches!(cfg.validate(), Err(Error::ConfigInvalid(_))));
    }

    #[test]
    fn inline_field_spec() {
        let cfg: ToolConfig = serde_json::from_str(r#"{"field": {"kind": "constant_higgs", "params": {"m": 2.0}}}"#).unwrap();
        let f = cfg.load_field().unwrap();
        assert_eq!(f.rank, 2);
    }
}
