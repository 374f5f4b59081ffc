use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Truncation policy shared by every series evaluator.
///
/// A series either reports a tail bound within tolerance or returns
/// [`Error::NonConvergence`]; it never truncates silently.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesControl {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_terms: usize,
}

impl Default for SeriesControl {
    fn default() -> Self {
        SeriesControl {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_terms: 10_000,
        }
    }
}

impl SeriesControl {
    pub fn new(abs_tol: f64, rel_tol: f64, max_terms: usize) -> Result<Self> {
        let ctrl = SeriesControl {
            abs_tol,
            rel_tol,
            max_terms,
        };
        ctrl.validate()?;
        Ok(ctrl)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) || self.max_terms == 0 {
            return Err(Error::InvalidParams(format!(
                "series control needs abs_tol > 0, rel_tol > 0, max_terms >= 1 (got {}, {}, {})",
                self.abs_tol, self.rel_tol, self.max_terms
            )));
        }
        Ok(())
    }

    /// Same control with both tolerances replaced.
    pub fn with_tolerance(self, tol: f64) -> Self {
        SeriesControl {
            abs_tol: tol,
            rel_tol: tol,
            ..self
        }
    }
}
