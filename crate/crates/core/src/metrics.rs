//! Estimation accuracy: MMRE, PRED(p) and MMRE improvement.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatePair {
    pub project_id: String,
    pub estimated: f64,
    pub actual: f64,
}

impl EstimatePair {
    pub fn new(project_id: impl Into<String>, estimated: f64, actual: f64) -> Self {
        Self {
            project_id: project_id.into(),
            estimated,
            actual,
        }
    }

    /// Magnitude of relative error `|est − actual| / actual`.
    pub fn mre(&self) -> f64 {
        (self.estimated - self.actual).abs() / self.actual
    }
}

fn check(pairs: &[EstimatePair]) -> Result<()> {
    if pairs.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    if let Some(p) = pairs.iter().find(|p| !(p.actual > 0.0)) {
        return Err(Error::Domain(format!(
            "actual effort of {} must be positive, got {}",
            p.project_id, p.actual
        )));
    }
    Ok(())
}

pub fn mmre(pairs: &[EstimatePair]) -> Result<f64> {
    check(pairs)?;
    Ok(pairs.iter().map(EstimatePair::mre).sum::<f64>() / pairs.len() as f64)
}

/// Fraction of pairs whose relative error is at most `p` percent (inclusive).
pub fn pred(pairs: &[EstimatePair], p: f64) -> Result<f64> {
    check(pairs)?;
    let level = p / 100.0;
    let k = pairs.iter().filter(|x| x.mre() <= level).count();
    Ok(k as f64 / pairs.len() as f64)
}

/// Relative MMRE reduction in percent.
pub fn improvement(mmre_original: f64, mmre_calibrated: f64) -> Result<f64> {
    if mmre_original == 0.0 {
        return Err(Error::UndefinedImprovement);
    }
    if !(mmre_original > 0.0) {
        return Err(Error::Domain(format!(
            "original MMRE must be positive, got {mmre_original}"
        )));
    }
    Ok((mmre_original - mmre_calibrated) / mmre_original * 100.0)
}

/// Rounds half away from zero to an integer percent, as printed in reports.
pub fn round_percent(pct: f64) -> i64 {
    pct.round() as i64
}
