//! Repeated random train/test experiments comparing original and calibrated
//! weights by MMRE and PRED.
//!
//! Each experiment fits the effort model on its training split with the
//! starting weights, calibrates (outliers excluded from training only), and
//! scores both weight tables on the full test split.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibration::{calibrate, TrainingConfig};
use crate::data::ProjectRecord;
use crate::effort::{fit, EffortModel};
use crate::error::{Error, Result};
use crate::fp::{ufp, WeightTable};
use crate::metrics::{improvement, mmre, pred, round_percent, EstimatePair};

pub const PRED_LEVELS: [u32; 4] = [25, 50, 75, 100];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredRow {
    pub p: u32,
    pub original: f64,
    pub calibrated: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    /// 1-based.
    pub experiment_index: usize,
    pub seed: u64,
    pub model: EffortModel,
    pub calibrated_weights: WeightTable,
    pub excluded_outliers: Vec<String>,
    pub epochs_run: usize,
    pub mmre_original: f64,
    pub mmre_calibrated: f64,
    pub improvement_pct: f64,
    pub improvement_pct_rounded: i64,
    pub pred: Vec<PredRow>,
    pub train_ids: Vec<String>,
    pub test_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AverageRow {
    pub mmre_original: f64,
    pub mmre_calibrated: f64,
    /// Mean of the per-experiment improvements.
    pub improvement_pct: f64,
    pub improvement_pct_rounded: i64,
    pub pred: Vec<PredRow>,
    /// Element-wise mean of the calibrated weight tables.
    pub calibrated_weights: WeightTable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub master_seed: u64,
    pub train_size: usize,
    pub test_size: usize,
    pub start_weights: WeightTable,
    pub config: TrainingConfig,
    pub experiments: Vec<ExperimentReport>,
    pub average: AverageRow,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentPlan {
    pub n_experiments: usize,
    pub train_size: usize,
    /// Run experiments on the rayon pool; results are identical either way.
    pub parallel: bool,
}

/// Seed of experiment `index` (0-based) under `master`.
pub fn experiment_seed(master: u64, index: usize) -> u64 {
    master.wrapping_add(index as u64)
}

/// Seeded shuffle split into `(train, test)` index lists.
pub fn split_indices(n: usize, train_size: usize, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let test = idx.split_off(train_size.min(n));
    (idx, test)
}

fn size_effort(r: &ProjectRecord, weights: &WeightTable) -> Result<(f64, f64)> {
    Ok((ufp(r.breakdown()?, weights), r.effort()?))
}

pub fn estimates(
    data: &[&ProjectRecord],
    model: &EffortModel,
    weights: &WeightTable,
) -> Result<Vec<EstimatePair>> {
    data.iter()
        .map(|r| {
            let (size, actual) = size_effort(r, weights)?;
            if !(size > 0.0) {
                return Err(Error::DegenerateProject { id: r.id.clone() });
            }
            Ok(EstimatePair::new(
                r.id.clone(),
                model.predict(size)?,
                actual,
            ))
        })
        .collect()
}

fn run_one(
    data: &[ProjectRecord],
    index: usize,
    train_size: usize,
    start: &WeightTable,
    config: &TrainingConfig,
) -> Result<ExperimentReport> {
    let seed = experiment_seed(config.seed, index);
    let (train_idx, test_idx) = split_indices(data.len(), train_size, seed);
    let train: Vec<ProjectRecord> = train_idx.iter().map(|&i| data[i].clone()).collect();
    let test: Vec<&ProjectRecord> = test_idx.iter().map(|&i| &data[i]).collect();

    let points = train
        .iter()
        .map(|r| size_effort(r, start))
        .collect::<Result<Vec<_>>>()?;
    let model = fit(&points)?;
    let cal = calibrate(&train, &model, start, config)?;

    let before = estimates(&test, &model, start)?;
    let after = estimates(&test, &model, &cal.weights)?;
    let mmre_original = mmre(&before)?;
    let mmre_calibrated = mmre(&after)?;
    let improvement_pct = improvement(mmre_original, mmre_calibrated)?;
    let pred_rows = PRED_LEVELS
        .iter()
        .map(|&p| {
            Ok(PredRow {
                p,
                original: pred(&before, f64::from(p))?,
                calibrated: pred(&after, f64::from(p))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ExperimentReport {
        experiment_index: index + 1,
        seed,
        model,
        calibrated_weights: cal.weights,
        excluded_outliers: cal.excluded_outliers,
        epochs_run: cal.epochs_run,
        mmre_original,
        mmre_calibrated,
        improvement_pct,
        improvement_pct_rounded: round_percent(improvement_pct),
        pred: pred_rows,
        train_ids: train_idx.iter().map(|&i| data[i].id.clone()).collect(),
        test_ids: test.iter().map(|r| r.id.clone()).collect(),
    })
}

fn average(experiments: &[ExperimentReport]) -> Result<AverageRow> {
    let n = experiments.len() as f64;
    let mean = |f: &dyn Fn(&ExperimentReport) -> f64| experiments.iter().map(f).sum::<f64>() / n;
    let improvement_pct = mean(&|e| e.improvement_pct);
    let pred = PRED_LEVELS
        .iter()
        .enumerate()
        .map(|(j, &p)| PredRow {
            p,
            original: mean(&|e| e.pred[j].original),
            calibrated: mean(&|e| e.pred[j].calibrated),
        })
        .collect();
    let mut w = [0.0; 15];
    for e in experiments {
        for (acc, x) in w.iter_mut().zip(e.calibrated_weights.to_vector()) {
            *acc += x / n;
        }
    }
    Ok(AverageRow {
        mmre_original: mean(&|e| e.mmre_original),
        mmre_calibrated: mean(&|e| e.mmre_calibrated),
        improvement_pct,
        improvement_pct_rounded: round_percent(improvement_pct),
        pred,
        calibrated_weights: WeightTable::from_vector(&w)?,
    })
}

/// Runs `plan.n_experiments` seeded experiments. Experiment `i` uses seed
/// `config.seed + i`; report order follows the experiment index.
pub fn run_experiments(
    data: &[ProjectRecord],
    plan: &ExperimentPlan,
    start: &WeightTable,
    config: &TrainingConfig,
) -> Result<ValidationReport> {
    config.validate()?;
    if plan.n_experiments == 0 {
        return Err(Error::Config("at least one experiment is required".into()));
    }
    if plan.train_size < 3 || data.len() < plan.train_size + 1 {
        return Err(Error::InsufficientData {
            needed: plan.train_size.max(3) + 1,
            got: data.len(),
        });
    }
    let run = |i: usize| run_one(data, i, plan.train_size, start, config);
    let experiments = if plan.parallel {
        (0..plan.n_experiments)
            .into_par_iter()
            .map(run)
            .collect::<Result<Vec<_>>>()?
    } else {
        (0..plan.n_experiments)
            .map(run)
            .collect::<Result<Vec<_>>>()?
    };
    let average = average(&experiments)?;
    Ok(ValidationReport {
        master_seed: config.seed,
        train_size: plan.train_size,
        test_size: data.len() - plan.train_size,
        start_weights: *start,
        config: *config,
        experiments,
        average,
    })
}
