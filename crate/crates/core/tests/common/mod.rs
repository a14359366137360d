//! Independent oracles and fixtures shared by the integration tests.

#![allow(dead_code)]

use fpcal::data::{ProjectRecord, QualityRating, SynthConfig};
use fpcal::fuzzy::{FuzzyWeightSystem, MembershipFunction};
use fpcal::{UfpBreakdown, WeightTable};

/// Trapezoid degree evaluated straight from its corner points.
fn trap(mf: &MembershipFunction, x: f64) -> f64 {
    let rise = if mf.b > mf.a {
        (x - mf.a) / (mf.b - mf.a)
    } else if x >= mf.a {
        1.0
    } else {
        0.0
    };
    let fall = if mf.d > mf.c {
        (mf.d - x) / (mf.d - mf.c)
    } else if x <= mf.d {
        1.0
    } else {
        0.0
    };
    rise.min(fall).clamp(0.0, 1.0)
}

/// Midpoint-rule centroid of the min/max aggregate over `n` samples.
pub fn sampled_centroid(sys: &FuzzyWeightSystem, det: f64, records: f64, n: usize) -> f64 {
    let det = det.min(sys.det_var.domain_max);
    let records = records.min(sys.record_var.domain_max);
    let lo = sys
        .output_sets
        .iter()
        .map(|s| s.a)
        .fold(f64::INFINITY, f64::min);
    let hi = sys
        .output_sets
        .iter()
        .map(|s| s.d)
        .fold(f64::NEG_INFINITY, f64::max);
    let dy = (hi - lo) / n as f64;
    let (mut area, mut moment) = (0.0, 0.0);
    for i in 0..n {
        let y = lo + (i as f64 + 0.5) * dy;
        let mut m = 0.0f64;
        for rule in &sys.rules {
            let fire = trap(&sys.det_var.sets[rule.det_band], det)
                .min(trap(&sys.record_var.sets[rule.record_band], records));
            m = m.max(fire.min(trap(&sys.output_sets[rule.consequent.index()], y)));
        }
        area += m;
        moment += m * y;
    }
    moment / area
}

/// OLS of `y` on `x` by Cramer's rule on the raw-sum normal equations.
/// Returns `(intercept, slope)`.
pub fn normal_equations(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let det = n * sxx - sx * sx;
    ((sy * sxx - sx * sxy) / det, (n * sxy - sx * sy) / det)
}

pub fn record(
    id: &str,
    rating: QualityRating,
    method: &str,
    level: u32,
    dev: &str,
    breakdown: Option<UfpBreakdown>,
    gsc: Option<[u8; 14]>,
) -> ProjectRecord {
    ProjectRecord {
        id: id.to_string(),
        quality_rating: rating,
        counting_method: method.to_string(),
        resource_level: level,
        development_type: dev.to_string(),
        breakdown,
        normalized_effort: Some(1000.0),
        gsc,
    }
}

/// Ten records, each failing at most one filter criterion. Qualifying ids
/// start with `keep`.
pub fn filter_fixture() -> Vec<ProjectRecord> {
    let b = Some(UfpBreakdown::new([
        [1, 2, 0],
        [0, 1, 1],
        [2, 0, 0],
        [1, 1, 0],
        [0, 0, 1],
    ]));
    let g = Some([3u8; 14]);
    use QualityRating::*;
    vec![
        record("keep-1", A, "IFPUG", 1, "New Development", b, g),
        record("drop-rating-c", C, "IFPUG", 1, "New Development", b, g),
        record("keep-2", B, "IFPUG", 1, "Re-development", b, g),
        record("drop-cosmic", A, "COSMIC", 1, "New Development", b, g),
        record("drop-level-2", A, "IFPUG", 2, "New Development", b, g),
        record("keep-3", B, "ifpug", 1, "new development", b, g),
        record("drop-enhancement", A, "IFPUG", 1, "Enhancement", b, g),
        record("drop-no-gsc", A, "IFPUG", 1, "New Development", b, None),
        record("keep-4", A, "IFPUG", 1, "Redevelopment", b, g),
        record(
            "drop-no-breakdown",
            B,
            "IFPUG",
            1,
            "Re-development",
            None,
            g,
        ),
    ]
}

/// The end-to-end benchmark dataset: 184 projects from perturbed weights.
pub fn benchmark_config(seed: u64) -> SynthConfig {
    SynthConfig {
        true_weights: fpcal::data::perturbed_weights(&WeightTable::ORIGINAL, 0.4, seed).unwrap(),
        seed,
        ..SynthConfig::default()
    }
}
