//! Power-law effort model `effort = A · ufp^B`, fitted by least squares on
//! the log-log pairs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffortModel {
    /// Multiplicative coefficient (hours per UFP^B).
    pub a: f64,
    /// Exponent.
    pub b: f64,
}

impl EffortModel {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() || !b.is_finite() {
            return Err(Error::Domain(format!(
                "effort model needs A > 0 and finite B, got A={a}, B={b}"
            )));
        }
        Ok(Self { a, b })
    }

    pub fn predict(&self, ufp: f64) -> Result<f64> {
        if !(ufp > 0.0) {
            return Err(Error::Domain(format!("UFP must be positive, got {ufp}")));
        }
        Ok(self.a * ufp.powf(self.b))
    }

    /// `ln A + B ln ufp`, no domain check.
    pub(crate) fn ln_predict(&self, ufp: f64) -> f64 {
        self.a.ln() + self.b * ufp.ln()
    }
}

/// Moments of the log-scale residuals `ln effort − ln predict`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionDiagnostics {
    pub mean_log_residual: f64,
    /// Sample standard deviation (n − 1 denominator).
    pub std_log_residual: f64,
    /// Adjusted Fisher–Pearson skewness G1.
    pub skewness_log_residual: f64,
    /// Coefficient of determination on the log scale.
    pub r2: f64,
    pub n: usize,
}

fn check_points(points: &[(f64, f64)]) -> Result<()> {
    if points.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: points.len(),
        });
    }
    if let Some((u, e)) = points
        .iter()
        .find(|(u, e)| !(*u > 0.0 && *e > 0.0 && u.is_finite() && e.is_finite()))
    {
        return Err(Error::Domain(format!(
            "UFP and effort must be positive and finite, got ({u}, {e})"
        )));
    }
    Ok(())
}

/// Ordinary least squares of ln effort on ln ufp.
pub fn fit(points: &[(f64, f64)]) -> Result<EffortModel> {
    check_points(points)?;
    let n = points.len() as f64;
    let (mx, my) = points
        .iter()
        .fold((0.0, 0.0), |(sx, sy), (u, e)| (sx + u.ln(), sy + e.ln()));
    let (mx, my) = (mx / n, my / n);
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (u, e) in points {
        let dx = u.ln() - mx;
        sxx += dx * dx;
        sxy += dx * (e.ln() - my);
    }
    if sxx <= f64::EPSILON * n * mx.abs().max(1.0) {
        return Err(Error::SingularDesign);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    EffortModel::new(intercept.exp(), slope)
}

pub fn predict(model: &EffortModel, ufp: f64) -> Result<f64> {
    model.predict(ufp)
}

pub fn log_residuals(model: &EffortModel, points: &[(f64, f64)]) -> Vec<f64> {
    points
        .iter()
        .map(|(u, e)| e.ln() - model.ln_predict(*u))
        .collect()
}

pub fn diagnostics(model: &EffortModel, points: &[(f64, f64)]) -> Result<RegressionDiagnostics> {
    check_points(points)?;
    let res = log_residuals(model, points);
    let n = res.len() as f64;
    let mean = res.iter().sum::<f64>() / n;
    let m2 = res.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n;
    let m3 = res.iter().map(|r| (r - mean).powi(3)).sum::<f64>() / n;
    let skew = if m2 > 0.0 {
        (n * (n - 1.0)).sqrt() / (n - 2.0) * m3 / m2.powf(1.5)
    } else {
        0.0
    };

    let ly: Vec<f64> = points.iter().map(|(_, e)| e.ln()).collect();
    let my = ly.iter().sum::<f64>() / n;
    let ss_tot: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = res.iter().map(|r| r * r).sum();
    let r2 = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        1.0
    };

    Ok(RegressionDiagnostics {
        mean_log_residual: mean,
        std_log_residual: (m2 * n / (n - 1.0)).sqrt(),
        skewness_log_residual: skew,
        r2,
        n: res.len(),
    })
}
