//! Residual reports and exit codes.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cone::Calibration;
use crate::config::ToolConfig;
use crate::error::Result;
use crate::regularity::Verdict;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EXIT_PASS: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FAIL: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;

/// Neumaier-compensated sum, accumulated in input order.
pub fn compensated_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteEntry {
    pub name: String,
    pub sup: f64,
    pub mean_square: f64,
    pub n_samples: usize,
    pub tolerance: f64,
    pub pass: bool,
    pub verdict: Verdict,
}

impl SuiteEntry {
    /// `pass ⇔ sup ≤ tolerance`; a NaN sup fails.
    pub fn from_samples(name: &str, samples: &[f64], tolerance: f64) -> Self {
        let sup = samples.iter().fold(0.0f64, |m, &x| if x.is_nan() || m.is_nan() { f64::NAN } else { m.max(x) });
        let n = samples.len();
        let mean_square = if n == 0 { 0.0 } else { compensated_sum(samples.iter().map(|x| x * x)) / n as f64 };
        let pass = sup <= tolerance;
        SuiteEntry {
            name: name.to_string(),
            sup,
            mean_square,
            n_samples: n,
            tolerance,
            pass,
            verdict: if pass { Verdict::Pass } else { Verdict::Fail },
        }
    }

    /// An entry whose verdict is decided elsewhere (e.g. a divergence detector).
    pub fn with_verdict(mut self, verdict: Verdict) -> Self {
        self.verdict = verdict;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    pub verdict: Verdict,
    pub suites: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub version: String,
    pub command: String,
    pub calibration: Calibration,
    pub config: ToolConfig,
    pub suites: Vec<SuiteEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub conditions: Vec<Condition>,
    pub notes: Vec<String>,
}

impl ResidualReport {
    pub fn new(command: &str, calibration: Calibration, config: &ToolConfig) -> Self {
        ResidualReport {
            version: TOOL_VERSION.to_string(),
            command: command.to_string(),
            calibration,
            config: config.clone(),
            suites: Vec::new(),
            conditions: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn push(&mut self, entry: SuiteEntry) {
        self.suites.push(entry);
    }

    pub fn suite(&mut self, name: &str, samples: &[f64], tolerance: f64) -> &SuiteEntry {
        self.suites.push(SuiteEntry::from_samples(name, samples, tolerance));
        self.suites.last().expect("pushed")
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn get(&self, name: &str) -> Option<&SuiteEntry> {
        self.suites.iter().find(|s| s.name == name)
    }

    /// Worst verdict over suites and conditions.
    pub fn verdict(&self) -> Verdict {
        self.suites
            .iter()
            .map(|s| s.verdict)
            .chain(self.conditions.iter().map(|c| c.verdict))
            .fold(Verdict::Pass, Verdict::worst)
    }

    pub fn exit_code(&self) -> i32 {
        exit_code(self.verdict())
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_json()?.as_bytes())?;
        Ok(())
    }

    /// One line per suite.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for s in &self.suites {
            out.push_str(&format!(
                "{:<13} {:<40} sup={:<12.4e} tol={:.1e} n={}\n",
                format!("{:?}", s.verdict).to_uppercase(),
                s.name,
                s.sup,
                s.tolerance,
                s.n_samples
            ));
        }
        for c in &self.conditions {
            out.push_str(&format!("{:<13} condition {}\n", format!("{:?}", c.verdict).to_uppercase(), c.name));
        }
        out
    }
}

pub fn exit_code(v: Verdict) -> i32 {
    match v {
        Verdict::Pass => EXIT_PASS,
        Verdict::Fail => EXIT_FAIL,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_beats_naive() {
        let xs: Vec<f64> = std::iter::once(1e16).chain(std::iter::repeat_n(1.0, 1000)).chain(std::iter::once(-1e16)).collect();
        assert_eq!(compensated_sum(xs.iter().copied()), 1000.0);
    }

    #[test]
    fn pass_iff_sup_below_tolerance() {
        let e = SuiteEntry::from_samples("s", &[1e-9, 3e-9], 3e-9);
        assert!(e.pass);
        assert!((e.mean_square - 5e-18).abs() < 1e-30);
        assert!(!SuiteEntry::from_samples("s", &[1e-9, f64::NAN], 1.0).pass);
        assert!(!SuiteEntry::from_samples("s", &[2.0], 1.0).pass);
    }

    #[test]
    fn exit_codes() {
        let mut r = ResidualReport::new("x", Calibration::ROUND, &ToolConfig::default());
        r.suite("a", &[0.0], 1.0);
        assert_eq!(r.exit_code(), EXIT_PASS);
        r.push(SuiteEntry::from_samples("b", &[0.0], 1.0).with_verdict(Verdict::Inconclusive));
        assert_eq!(r.exit_code(), EXIT_INCONCLUSIVE);
        r.suite("c", &[2.0], 1.0);
        assert_eq!(r.exit_code(), EXIT_FAIL);
    }
}
