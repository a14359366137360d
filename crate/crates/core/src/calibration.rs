//! Gradient calibration of the 15 UFP weights.
//!
//! The effort model is a single neuron: `ln est = ln A + B ln(Σ_k n_k w_k)`,
//! with A and B frozen. Weights are trained by full-batch projected gradient
//! descent on the mean squared log-effort error. After every step the weights
//! are clamped to `min_weight` and each kind's Low/Average/High triple is
//! projected back onto the ordered cone.

use serde::{Deserialize, Serialize};

use crate::data::ProjectRecord;
use crate::effort::EffortModel;
use crate::error::{Error, Result};
use crate::fp::WeightTable;

/// Consecutive epochs without a new best loss tolerated before giving up.
pub const DIVERGENCE_PATIENCE: usize = 10;

/// Absolute log residuals below this are treated as exact fits.
const EXACT_RESIDUAL: f64 = 1e-9;

/// Training loss at or below this counts as an exact fit (RMS log error 1e-12).
const EXACT_LOSS: f64 = 1e-24;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainingConfig {
    /// Step size in log-weight units: each weight moves by
    /// `-learning_rate · w² · ∂loss/∂w`.
    pub learning_rate: f64,
    pub max_epochs: usize,
    /// Stop once the relative loss decrease of an epoch falls below this.
    pub convergence_tol: f64,
    /// Outlier threshold in standard deviations of the log residuals;
    /// `f64::INFINITY` disables exclusion.
    pub outlier_sigma: f64,
    pub min_weight: f64,
    pub seed: u64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1.0,
            max_epochs: 5000,
            convergence_tol: 1e-9,
            outlier_sigma: 2.0,
            min_weight: 0.1,
            seed: 42,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && !v.is_nan() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive, got {v}")))
            }
        };
        positive("learning_rate", self.learning_rate)?;
        positive("convergence_tol", self.convergence_tol)?;
        positive("outlier_sigma", self.outlier_sigma)?;
        positive("min_weight", self.min_weight)?;
        if self.max_epochs == 0 {
            return Err(Error::Config("max_epochs must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub weights: WeightTable,
    /// Loss before the first step followed by the loss after each epoch.
    pub loss_history: Vec<f64>,
    pub excluded_outliers: Vec<String>,
    pub epochs_run: usize,
    pub converged: bool,
}

impl CalibrationResult {
    pub fn initial_loss(&self) -> f64 {
        self.loss_history[0]
    }

    pub fn final_loss(&self) -> f64 {
        *self.loss_history.last().expect("history is never empty")
    }
}

/// A project reduced to what the loss needs.
struct Observation<'a> {
    id: &'a str,
    counts: [f64; 15],
    ln_effort: f64,
}

fn observations(data: &[ProjectRecord]) -> Result<Vec<Observation<'_>>> {
    if data.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    data.iter()
        .map(|r| {
            Ok(Observation {
                id: &r.id,
                counts: r.breakdown()?.to_vector(),
                ln_effort: r.effort()?.ln(),
            })
        })
        .collect()
}

fn dot(a: &[f64; 15], b: &[f64; 15]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Per-project size and log residual `ln est − ln effort`.
fn residuals(
    w: &[f64; 15],
    model: &EffortModel,
    obs: &[Observation<'_>],
) -> Result<Vec<(f64, f64)>> {
    obs.iter()
        .map(|o| {
            let size = dot(&o.counts, w);
            if !(size > 0.0) {
                return Err(Error::DegenerateProject {
                    id: o.id.to_string(),
                });
            }
            Ok((size, model.ln_predict(size) - o.ln_effort))
        })
        .collect()
}

fn loss_of(w: &[f64; 15], model: &EffortModel, obs: &[Observation<'_>]) -> Result<f64> {
    let r = residuals(w, model, obs)?;
    Ok(r.iter().map(|(_, e)| e * e).sum::<f64>() / r.len() as f64)
}

fn gradient_of(w: &[f64; 15], model: &EffortModel, obs: &[Observation<'_>]) -> Result<[f64; 15]> {
    let r = residuals(w, model, obs)?;
    let n = obs.len() as f64;
    let mut g = [0.0; 15];
    for (o, (size, e)) in obs.iter().zip(&r) {
        let scale = 2.0 * e * model.b / (size * n);
        for (gk, nk) in g.iter_mut().zip(&o.counts) {
            *gk += scale * nk;
        }
    }
    Ok(g)
}

/// Mean squared log-effort error of `model` over `data` sized with `weights`.
pub fn loss(weights: &WeightTable, model: &EffortModel, data: &[ProjectRecord]) -> Result<f64> {
    loss_of(&weights.to_vector(), model, &observations(data)?)
}

/// Analytic gradient of [`loss`] with respect to the 15 weights
/// (`index = kind * 3 + level`).
pub fn gradient(
    weights: &WeightTable,
    model: &EffortModel,
    data: &[ProjectRecord],
) -> Result<[f64; 15]> {
    gradient_of(&weights.to_vector(), model, &observations(data)?)
}

/// Ids of projects whose absolute log residual exceeds `k_sigma` sample
/// standard deviations of all log residuals.
pub fn detect_outliers(
    model: &EffortModel,
    weights: &WeightTable,
    data: &[ProjectRecord],
    k_sigma: f64,
) -> Result<Vec<String>> {
    if data.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: data.len(),
        });
    }
    let obs = observations(data)?;
    let res: Vec<f64> = residuals(&weights.to_vector(), model, &obs)?
        .into_iter()
        .map(|(_, e)| e)
        .collect();
    let n = res.len() as f64;
    let mean = res.iter().sum::<f64>() / n;
    let std = (res.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let threshold = k_sigma * std;
    Ok(obs
        .iter()
        .zip(&res)
        .filter(|(_, r)| r.abs() > threshold && r.abs() > EXACT_RESIDUAL)
        .map(|(o, _)| o.id.to_string())
        .collect())
}

/// Least-squares projection of a triple onto `x0 <= x1 <= x2`
/// (pool adjacent violators, equal weights).
pub fn isotonic3(v: [f64; 3]) -> [f64; 3] {
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(3);
    for x in v {
        blocks.push((x, 1));
        while blocks.len() > 1 {
            let (m2, c2) = blocks[blocks.len() - 1];
            let (m1, c1) = blocks[blocks.len() - 2];
            if m1 <= m2 {
                break;
            }
            blocks.truncate(blocks.len() - 2);
            blocks.push((
                (m1 * c1 as f64 + m2 * c2 as f64) / (c1 + c2) as f64,
                c1 + c2,
            ));
        }
    }
    let mut out = [0.0; 3];
    let mut i = 0;
    for (m, c) in blocks {
        for _ in 0..c {
            out[i] = m;
            i += 1;
        }
    }
    out
}

fn project(w: &mut [f64; 15], min_weight: f64) {
    for row in w.chunks_exact_mut(3) {
        let clamped = [row[0], row[1], row[2]].map(|x| x.max(min_weight));
        row.copy_from_slice(&isotonic3(clamped));
    }
}

/// Calibrates weights against `data` with the effort model held fixed.
///
/// Outliers (relative to `start`) are excluded first. Returns the weights
/// with the lowest training loss seen, so the final loss never exceeds the
/// initial one.
pub fn calibrate(
    data: &[ProjectRecord],
    model: &EffortModel,
    start: &WeightTable,
    config: &TrainingConfig,
) -> Result<CalibrationResult> {
    config.validate()?;
    let excluded = if data.len() >= 3 && config.outlier_sigma.is_finite() {
        detect_outliers(model, start, data, config.outlier_sigma)?
    } else {
        Vec::new()
    };
    let kept: Vec<ProjectRecord> = data
        .iter()
        .filter(|r| !excluded.contains(&r.id))
        .cloned()
        .collect();
    let obs = observations(&kept)?;

    let mut w = start.to_vector();
    let mut current = loss_of(&w, model, &obs)?;
    let mut history = vec![current];
    let (mut best_w, mut best_loss) = (w, current);
    let mut rising = 0;
    let mut converged = current <= EXACT_LOSS;
    let mut epochs = 0;

    while !converged && epochs < config.max_epochs {
        let g = gradient_of(&w, model, &obs)?;
        for (wk, gk) in w.iter_mut().zip(&g) {
            *wk -= config.learning_rate * *wk * *wk * gk;
        }
        project(&mut w, config.min_weight);
        epochs += 1;

        let next = loss_of(&w, model, &obs)?;
        history.push(next);
        if !next.is_finite() {
            return Err(Error::Divergence {
                epochs: rising + 1,
                epoch: epochs,
                loss: next,
                learning_rate: config.learning_rate,
            });
        }
        if next < best_loss {
            rising = 0;
            converged = next <= EXACT_LOSS || (current - next) / current < config.convergence_tol;
            best_loss = next;
            best_w = w;
        } else {
            rising += 1;
            if rising >= DIVERGENCE_PATIENCE {
                return Err(Error::Divergence {
                    epochs: rising,
                    epoch: epochs,
                    loss: next,
                    learning_rate: config.learning_rate,
                });
            }
        }
        current = next;
    }

    Ok(CalibrationResult {
        weights: WeightTable::from_vector(&best_w)?,
        loss_history: history,
        excluded_outliers: excluded,
        epochs_run: epochs,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{synthesize, QualityRating, SynthConfig};
    use crate::fp::{ComplexityLevel, ComponentKind, UfpBreakdown};

    fn record(id: &str, breakdown: UfpBreakdown, effort: f64) -> ProjectRecord {
        ProjectRecord {
            id: id.into(),
            quality_rating: QualityRating::A,
            counting_method: "IFPUG".into(),
            resource_level: 1,
            development_type: "New Development".into(),
            breakdown: Some(breakdown),
            normalized_effort: Some(effort),
            gsc: Some([3; 14]),
        }
    }

    fn exact_data(model: &EffortModel, weights: &WeightTable, n: usize) -> Vec<ProjectRecord> {
        let cfg = SynthConfig {
            n_projects: n,
            true_weights: *weights,
            true_a: model.a,
            true_b: model.b,
            noise_sigma: 0.0,
            ..SynthConfig::default()
        };
        synthesize(&cfg).unwrap()
    }

    #[test]
    fn exact_fit_has_zero_loss_and_gradient() {
        let model = EffortModel::new(10.0, 0.9).unwrap();
        let data = exact_data(&model, &WeightTable::ORIGINAL, 30);
        assert!(loss(&WeightTable::ORIGINAL, &model, &data).unwrap() < 1e-25);
        let g = gradient(&WeightTable::ORIGINAL, &model, &data).unwrap();
        assert!(g.iter().all(|x| x.abs() < 1e-12), "{g:?}");
    }

    #[test]
    fn single_project_off_by_e_has_unit_loss() {
        let mut b = UfpBreakdown::default();
        b.set(
            ComponentKind::InternalLogicalFile,
            ComplexityLevel::Average,
            3,
        );
        let model = EffortModel::new(2.0, 1.0).unwrap();
        let est = model.predict(30.0).unwrap();
        let data = [record("p", b, est / std::f64::consts::E)];
        let l = loss(&WeightTable::ORIGINAL, &model, &data).unwrap();
        assert!((l - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_ufp_project_is_degenerate() {
        let model = EffortModel::new(2.0, 1.0).unwrap();
        let data = [record("empty", UfpBreakdown::default(), 10.0)];
        assert!(matches!(
            loss(&WeightTable::ORIGINAL, &model, &data),
            Err(Error::DegenerateProject { .. })
        ));
        assert!(matches!(
            loss(&WeightTable::ORIGINAL, &model, &[]),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn unused_cell_has_zero_gradient() {
        let model = EffortModel::new(3.0, 0.8).unwrap();
        let mut data = synthesize(&SynthConfig {
            n_projects: 20,
            ..SynthConfig::default()
        })
        .unwrap();
        for r in &mut data {
            let mut b = r.breakdown.unwrap();
            b.set(ComponentKind::ExternalOutput, ComplexityLevel::High, 0);
            r.breakdown = Some(b);
        }
        let g = gradient(&WeightTable::ORIGINAL, &model, &data).unwrap();
        assert_eq!(
            g[crate::fp::cell_index(ComponentKind::ExternalOutput, ComplexityLevel::High)],
            0.0
        );
        assert!(g.iter().any(|x| *x != 0.0));
    }

    #[test]
    fn isotonic_projection() {
        assert_eq!(isotonic3([1.0, 2.0, 3.0]), [1.0, 2.0, 3.0]);
        assert_eq!(isotonic3([2.0, 1.0, 3.0]), [1.5, 1.5, 3.0]);
        assert_eq!(isotonic3([1.0, 3.0, 2.0]), [1.0, 2.5, 2.5]);
        assert_eq!(isotonic3([3.0, 2.0, 1.0]), [2.0, 2.0, 2.0]);
        assert_eq!(isotonic3([3.0, 1.0, 1.0]), [5.0 / 3.0; 3]);
    }

    #[test]
    fn outliers() {
        let model = EffortModel::new(10.0, 0.9).unwrap();
        let mut data = exact_data(&model, &WeightTable::ORIGINAL, 20);
        assert!(detect_outliers(&model, &WeightTable::ORIGINAL, &data, 2.0)
            .unwrap()
            .is_empty());

        data[7].normalized_effort = data[7].normalized_effort.map(|e| e * 10.0);
        let found = detect_outliers(&model, &WeightTable::ORIGINAL, &data, 2.0).unwrap();
        assert_eq!(found, vec![data[7].id.clone()]);
        assert!(
            detect_outliers(&model, &WeightTable::ORIGINAL, &data, f64::INFINITY)
                .unwrap()
                .is_empty()
        );
        assert!(matches!(
            detect_outliers(&model, &WeightTable::ORIGINAL, &data[..2], 2.0),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn calibrate_from_global_minimum_returns_start() {
        let model = EffortModel::new(10.0, 0.9).unwrap();
        let data = exact_data(&model, &WeightTable::ORIGINAL, 40);
        let res = calibrate(
            &data,
            &model,
            &WeightTable::ORIGINAL,
            &TrainingConfig::default(),
        )
        .unwrap();
        assert_eq!(res.weights, WeightTable::ORIGINAL);
        assert_eq!(res.epochs_run, 0);
        assert!(res.loss_history[0] < 1e-25);
    }

    #[test]
    fn huge_learning_rate_reports_divergence() {
        let model = EffortModel::new(10.0, 0.9).unwrap();
        let data = synthesize(&SynthConfig {
            n_projects: 60,
            ..SynthConfig::default()
        })
        .unwrap();
        let start = WeightTable::new([[1.0, 2.0, 3.0]; 5]).unwrap();
        let cfg = TrainingConfig {
            learning_rate: 1e4,
            outlier_sigma: f64::INFINITY,
            ..TrainingConfig::default()
        };
        match calibrate(&data, &model, &start, &cfg) {
            Err(Error::Divergence { .. }) => {}
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn config_validation() {
        let bad = TrainingConfig {
            min_weight: 0.0,
            ..TrainingConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = TrainingConfig {
            max_epochs: 0,
            ..TrainingConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
