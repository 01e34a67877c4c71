//! Central finite differences along exact flows.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::Coef;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FdOrder {
    Second,
    Fourth,
}

/// Step and stencil order for every directional derivative in the crate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fd {
    pub step: f64,
    pub order: FdOrder,
}

impl Default for Fd {
    fn default() -> Self {
        Fd {
            step: 1e-3,
            order: FdOrder::Fourth,
        }
    }
}

// antisymmetric stencils: weight w at +k, −w at −k
const SECOND: [(f64, f64); 1] = [(1.0, 0.5)];
const FOURTH: [(f64, f64); 2] = [(1.0, 8.0 / 12.0), (2.0, -1.0 / 12.0)];

impl Fd {
    pub fn second(step: f64) -> Self {
        Fd {
            step,
            order: FdOrder::Second,
        }
    }

    pub fn fourth(step: f64) -> Self {
        Fd {
            step,
            order: FdOrder::Fourth,
        }
    }

    pub fn with_step(self, step: f64) -> Self {
        Fd { step, ..self }
    }

    /// Positive offsets (in units of `step`) and weights.
    pub fn stencil(&self) -> &'static [(f64, f64)] {
        match self.order {
            FdOrder::Second => &SECOND,
            FdOrder::Fourth => &FOURTH,
        }
    }

    /// Largest offset reached by the stencil, in parameter units.
    pub fn reach(&self) -> f64 {
        match self.order {
            FdOrder::Second => self.step,
            FdOrder::Fourth => 2.0 * self.step,
        }
    }

    /// d/ds f(s) at s = 0.
    pub fn derivative<T: Coef>(&self, mut f: impl FnMut(f64) -> Result<T>) -> Result<T> {
        let mut acc: Option<T> = None;
        for &(k, w) in self.stencil() {
            let lo = f(-k * self.step)?;
            let v = f(k * self.step)?.minus(&lo).scaled(w / self.step);
            acc = Some(match acc {
                None => v,
                Some(a) => a.plus(&v),
            });
        }
        Ok(acc.expect("stencil is never empty"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fourth_order_is_exact_on_quartics() {
        let fd = Fd::fourth(0.1);
        let d = fd
            .derivative(|s| Ok(1.0 + 2.0 * s + s * s * s + 0.5 * s.powi(4)))
            .unwrap();
        assert!((d - 2.0).abs() < 1e-12);
    }

    #[test]
    fn second_order_error_quarters_on_halving() {
        let f = |s: f64| Ok((s + 0.3).sin());
        let exact = 0.3f64.cos();
        let e1 = (Fd::second(0.1).derivative(f).unwrap() - exact).abs();
        let e2 = (Fd::second(0.05).derivative(f).unwrap() - exact).abs();
        assert!((e1 / e2 - 4.0).abs() < 0.05);
    }
}
