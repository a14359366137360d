//! Runs the five-experiment protocol on a synthetic repository whose true
//! weights are the originals perturbed by ±40%.
//!
//! cargo run --release -p fpcal-core --example synthetic_benchmark [seed] [learning_rate]

use fpcal::data::{perturbed_weights, synthesize, SynthConfig};
use fpcal::validation::{run_experiments, ExperimentPlan};
use fpcal::{TrainingConfig, WeightTable};

fn main() -> fpcal::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(42);
    let learning_rate: f64 = args
        .next()
        .and_then(|s| s.parse().ok())
        .unwrap_or(TrainingConfig::default().learning_rate);

    let synth = SynthConfig {
        true_weights: perturbed_weights(&WeightTable::ORIGINAL, 0.4, seed)?,
        seed,
        ..SynthConfig::default()
    };
    let data = synthesize(&synth)?;
    let config = TrainingConfig {
        seed,
        learning_rate,
        ..TrainingConfig::default()
    };
    let plan = ExperimentPlan {
        n_experiments: 5,
        train_size: 100,
        parallel: true,
    };
    let report = run_experiments(&data, &plan, &WeightTable::ORIGINAL, &config)?;

    println!("exp  A        B      epochs  outliers  MMRE orig  MMRE cal  improvement");
    for e in &report.experiments {
        println!(
            "{:>3}  {:<8.3} {:<6.3} {:>6}  {:>8}  {:>9.4}  {:>8.4}  {:>9.2}%",
            e.experiment_index,
            e.model.a,
            e.model.b,
            e.epochs_run,
            e.excluded_outliers.len(),
            e.mmre_original,
            e.mmre_calibrated,
            e.improvement_pct
        );
    }
    let avg = &report.average;
    println!(
        "avg  MMRE {:.4} -> {:.4}, improvement {:.2}%",
        avg.mmre_original, avg.mmre_calibrated, avg.improvement_pct
    );
    for row in &avg.pred {
        println!(
            "Pred {:>3}: {:.3} -> {:.3}",
            row.p, row.original, row.calibrated
        );
    }
    Ok(())
}
