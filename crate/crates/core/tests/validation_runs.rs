use fpcal::data::{synthesize, SynthConfig};
use fpcal::metrics::round_percent;
use fpcal::validation::PRED_LEVELS;
use fpcal::{improvement, run_experiments, ExperimentPlan, TrainingConfig, WeightTable};

fn plan(parallel: bool) -> ExperimentPlan {
    ExperimentPlan {
        n_experiments: 5,
        train_size: 100,
        parallel,
    }
}

#[test]
fn published_improvements_round_as_printed() {
    let rows = [
        ((1.38, 1.10), 20),
        ((1.58, 1.28), 19),
        ((1.57, 1.17), 25),
        ((1.39, 1.03), 26),
        ((1.42, 1.11), 22),
    ];
    let mut sum = 0.0;
    for ((o, c), want) in rows {
        let pct = improvement(o, c).unwrap();
        assert_eq!(round_percent(pct), want, "({o}, {c})");
        sum += pct;
    }
    assert_eq!(round_percent(sum / 5.0), 22);
}

#[test]
fn five_experiments_on_the_default_dataset() {
    let data = synthesize(&SynthConfig::default()).unwrap();
    let cfg = TrainingConfig {
        max_epochs: 400,
        ..TrainingConfig::default()
    };
    let rep = run_experiments(&data, &plan(false), &WeightTable::ORIGINAL, &cfg).unwrap();
    assert_eq!(rep.experiments.len(), 5);
    assert_eq!((rep.train_size, rep.test_size), (100, 84));
    let seeds: Vec<u64> = rep.experiments.iter().map(|e| e.seed).collect();
    assert_eq!(seeds, [42, 43, 44, 45, 46]);
    let mean = rep.experiments.iter().map(|e| e.mmre_original).sum::<f64>() / 5.0;
    assert!((rep.average.mmre_original - mean).abs() < 1e-12);
    assert_eq!(rep.average.pred.len(), PRED_LEVELS.len());
    for e in &rep.experiments {
        let mut ids: Vec<&String> = e.train_ids.iter().chain(&e.test_ids).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), 184);
    }

    let again = run_experiments(&data, &plan(true), &WeightTable::ORIGINAL, &cfg).unwrap();
    assert_eq!(
        serde_json::to_string(&rep).unwrap(),
        serde_json::to_string(&again).unwrap()
    );

    let other = run_experiments(
        &data,
        &plan(false),
        &WeightTable::ORIGINAL,
        &TrainingConfig { seed: 7, ..cfg },
    )
    .unwrap();
    assert_ne!(other.experiments[0].test_ids, rep.experiments[0].test_ids);
}
