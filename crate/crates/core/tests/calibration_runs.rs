use fpcal::data::{perturbed_weights, synthesize, ProjectRecord, QualityRating, SynthConfig};
use fpcal::validation::estimates;
use fpcal::{
    calibrate, detect_outliers, fit, loss, mmre, ufp, EffortModel, Error, TrainingConfig,
    UfpBreakdown, WeightTable,
};
use proptest::prelude::*;

fn noisy(n: usize, seed: u64, sigma: f64) -> Vec<ProjectRecord> {
    synthesize(&SynthConfig {
        n_projects: n,
        true_weights: perturbed_weights(&WeightTable::ORIGINAL, 0.4, seed).unwrap(),
        noise_sigma: sigma,
        seed,
        ..SynthConfig::default()
    })
    .unwrap()
}

fn fitted(data: &[ProjectRecord], weights: &WeightTable) -> EffortModel {
    let pts: Vec<(f64, f64)> = data
        .iter()
        .map(|r| (ufp(r.breakdown().unwrap(), weights), r.effort().unwrap()))
        .collect();
    fit(&pts).unwrap()
}

fn ordered(w: &WeightTable, min_weight: f64) -> bool {
    w.as_array()
        .iter()
        .all(|r| min_weight <= r[0] && r[0] <= r[1] && r[1] <= r[2])
}

#[test]
fn three_project_loss_matches_hand_sum() {
    let mk = |id: &str, counts: [[u32; 3]; 5], effort: f64| ProjectRecord {
        id: id.into(),
        quality_rating: QualityRating::A,
        counting_method: "IFPUG".into(),
        resource_level: 1,
        development_type: "New Development".into(),
        breakdown: Some(UfpBreakdown::new(counts)),
        normalized_effort: Some(effort),
        gsc: None,
    };
    let z = [0, 0, 0];
    let data = [
        mk("a", [[2, 0, 0], z, z, z, z], 100.0), // UFP 6
        mk("b", [z, z, z, [0, 1, 0], z], 40.0),  // UFP 10
        mk("c", [z, [1, 0, 1], z, z, z], 300.0), // UFP 11
    ];
    let model = EffortModel::new(5.0, 1.2).unwrap();
    let hand: f64 = [(6.0f64, 100.0f64), (10.0, 40.0), (11.0, 300.0)]
        .iter()
        .map(|(u, e)| ((5.0 * u.powf(1.2)).ln() - e.ln()).powi(2))
        .sum::<f64>()
        / 3.0;
    let got = loss(&WeightTable::ORIGINAL, &model, &data).unwrap();
    assert!((got - hand).abs() < 1e-12 * hand);
}

#[test]
fn calibration_beats_original_weights_on_held_out_data() {
    // Sparse compositions (0 or 1 per cell) give the weights enough leverage
    // on UFP for a large sample to reveal them through the noise.
    let seed = 3;
    let data = synthesize(&SynthConfig {
        n_projects: 4000,
        true_weights: perturbed_weights(&WeightTable::ORIGINAL, 0.4, seed).unwrap(),
        count_ranges: [[(0, 1); 3]; 5],
        seed,
        ..SynthConfig::default()
    })
    .unwrap();
    let (train, test) = data.split_at(2000);
    let model = fitted(train, &WeightTable::ORIGINAL);
    let cal = calibrate(
        train,
        &model,
        &WeightTable::ORIGINAL,
        &TrainingConfig::default(),
    )
    .unwrap();
    let test: Vec<&ProjectRecord> = test.iter().collect();
    let before = mmre(&estimates(&test, &model, &WeightTable::ORIGINAL).unwrap()).unwrap();
    let after = mmre(&estimates(&test, &model, &cal.weights).unwrap()).unwrap();
    assert!(after < before, "test MMRE {before} -> {after}");
    assert!(ordered(&cal.weights, 0.1));
}

#[test]
fn calibration_is_deterministic() {
    let data = noisy(120, 11, 0.3);
    let model = fitted(&data, &WeightTable::ORIGINAL);
    let cfg = TrainingConfig {
        max_epochs: 300,
        ..TrainingConfig::default()
    };
    let a = calibrate(&data, &model, &WeightTable::ORIGINAL, &cfg).unwrap();
    let b = calibrate(&data, &model, &WeightTable::ORIGINAL, &cfg).unwrap();
    assert_eq!(a, b);
}

#[test]
fn every_epoch_respects_the_constraints() {
    let data = noisy(80, 5, 0.4);
    let model = fitted(&data, &WeightTable::ORIGINAL);
    let min_weight = 2.5;
    let full = calibrate(
        &data,
        &model,
        &WeightTable::ORIGINAL,
        &TrainingConfig {
            max_epochs: 40,
            min_weight,
            ..TrainingConfig::default()
        },
    )
    .unwrap();
    for k in 1..=40 {
        let cfg = TrainingConfig {
            max_epochs: k,
            min_weight,
            ..TrainingConfig::default()
        };
        let r = calibrate(&data, &model, &WeightTable::ORIGINAL, &cfg).unwrap();
        assert!(
            ordered(&r.weights, min_weight),
            "epoch {k}: {:?}",
            r.weights
        );
        assert_eq!(
            r.loss_history[..],
            full.loss_history[..r.loss_history.len()]
        );
    }
}

#[test]
fn small_steps_descend_monotonically() {
    let data = noisy(100, 8, 0.3);
    let model = fitted(&data, &WeightTable::ORIGINAL);
    let cfg = TrainingConfig {
        learning_rate: 0.05,
        max_epochs: 500,
        convergence_tol: 1e-15,
        ..TrainingConfig::default()
    };
    let r = calibrate(&data, &model, &WeightTable::ORIGINAL, &cfg).unwrap();
    assert!(r.loss_history.len() > 100);
    for w in r.loss_history.windows(2) {
        assert!(w[1] <= w[0], "{} -> {}", w[0], w[1]);
    }
}

#[test]
fn inflated_project_is_the_only_outlier() {
    let mut data = synthesize(&SynthConfig {
        n_projects: 40,
        noise_sigma: 0.0,
        ..SynthConfig::default()
    })
    .unwrap();
    let model = EffortModel::new(10.0, 0.9).unwrap();
    assert!(detect_outliers(&model, &WeightTable::ORIGINAL, &data, 2.0)
        .unwrap()
        .is_empty());
    let victim = data[17].id.clone();
    data[17].normalized_effort = data[17].normalized_effort.map(|e| e * 10.0);
    assert_eq!(
        detect_outliers(&model, &WeightTable::ORIGINAL, &data, 2.0).unwrap(),
        vec![victim.clone()]
    );
    assert!(
        detect_outliers(&model, &WeightTable::ORIGINAL, &data, f64::INFINITY)
            .unwrap()
            .is_empty()
    );

    let r = calibrate(
        &data,
        &model,
        &WeightTable::ORIGINAL,
        &TrainingConfig {
            max_epochs: 5,
            ..TrainingConfig::default()
        },
    )
    .unwrap();
    assert_eq!(r.excluded_outliers, vec![victim]);
    assert!(matches!(
        detect_outliers(&model, &WeightTable::ORIGINAL, &data[..2], 2.0),
        Err(Error::InsufficientData { .. })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn returned_weights_never_lose_ground(seed in 0u64..1000, lr in 0.05f64..3.0, sigma in 0.05f64..0.8) {
        let data = noisy(60, seed, sigma);
        let model = fitted(&data, &WeightTable::ORIGINAL);
        let cfg = TrainingConfig { learning_rate: lr, max_epochs: 200, ..TrainingConfig::default() };
        match calibrate(&data, &model, &WeightTable::ORIGINAL, &cfg) {
            Ok(r) => {
                let trained: Vec<ProjectRecord> = data
                    .iter()
                    .filter(|p| !r.excluded_outliers.contains(&p.id))
                    .cloned()
                    .collect();
                prop_assert!(loss(&r.weights, &model, &trained).unwrap() <= r.initial_loss());
                prop_assert!(ordered(&r.weights, cfg.min_weight));
            }
            Err(e) => prop_assert!(matches!(e, Error::Divergence { .. }), "{e}"),
        }
    }
}
