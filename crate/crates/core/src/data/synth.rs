//! Seeded synthetic project repository.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::records::{ProjectRecord, QualityRating, GSC_COUNT};
use crate::error::{Error, Result};
use crate::fp::{ufp, ComplexityLevel, ComponentKind, UfpBreakdown, WeightTable};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_projects: usize,
    pub true_weights: WeightTable,
    pub true_a: f64,
    pub true_b: f64,
    /// Standard deviation of the multiplicative lognormal effort noise.
    pub noise_sigma: f64,
    /// Inclusive `(min, max)` count per breakdown cell, `[kind][level]`.
    pub count_ranges: [[(u32, u32); 3]; 5],
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_projects: 184,
            true_weights: WeightTable::ORIGINAL,
            true_a: 10.0,
            true_b: 0.9,
            noise_sigma: 0.3,
            count_ranges: [[(0, 20); 3]; 5],
            seed: 42,
        }
    }
}

impl SynthConfig {
    fn validate(&self) -> Result<()> {
        if self.n_projects == 0 {
            return Err(Error::Config("n_projects must be at least 1".into()));
        }
        if !(self.noise_sigma >= 0.0) || !self.noise_sigma.is_finite() {
            return Err(Error::Config(format!(
                "noise_sigma must be >= 0, got {}",
                self.noise_sigma
            )));
        }
        if !(self.true_a > 0.0) || !self.true_b.is_finite() {
            return Err(Error::Config(
                "true_a must be positive and true_b finite".into(),
            ));
        }
        if let Some((lo, hi)) = self.count_ranges.iter().flatten().find(|(lo, hi)| lo > hi) {
            return Err(Error::Config(format!("count range {lo}..={hi} is empty")));
        }
        if self.count_ranges.iter().flatten().all(|(_, hi)| *hi == 0) {
            return Err(Error::Config(
                "every count range is 0..=0; UFP would be zero".into(),
            ));
        }
        Ok(())
    }
}

/// Scales every weight by an independent factor drawn uniformly from
/// `[1 - spread, 1 + spread]`. A kind's three factors are redrawn until the
/// scaled row keeps Low <= Average <= High.
pub fn perturbed_weights(base: &WeightTable, spread: f64, seed: u64) -> Result<WeightTable> {
    if !(0.0..1.0).contains(&spread) {
        return Err(Error::Config(format!(
            "spread must lie in [0, 1), got {spread}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let mut rows = *base.as_array();
    for row in rows.iter_mut() {
        let orig = *row;
        loop {
            let scaled = orig.map(|w| w * rng.random_range(1.0 - spread..=1.0 + spread));
            if scaled[0] <= scaled[1] && scaled[1] <= scaled[2] {
                *row = scaled;
                break;
            }
        }
    }
    WeightTable::new(rows)
}

pub fn synthesize(config: &SynthConfig) -> Result<Vec<ProjectRecord>> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let width = (config.n_projects.max(1) as f64).log10().floor() as usize + 1;
    let mut out = Vec::with_capacity(config.n_projects);

    for i in 0..config.n_projects {
        let (breakdown, size) = loop {
            let mut b = UfpBreakdown::default();
            for kind in ComponentKind::ALL {
                for level in ComplexityLevel::ALL {
                    let (lo, hi) = config.count_ranges[kind.index()][level.index()];
                    b.set(kind, level, rng.random_range(lo..=hi));
                }
            }
            let size = ufp(&b, &config.true_weights);
            if size > 0.0 {
                break (b, size);
            }
        };
        let z: f64 = rng.sample(StandardNormal);
        let effort = config.true_a * size.powf(config.true_b) * (config.noise_sigma * z).exp();
        let gsc: [u8; GSC_COUNT] = std::array::from_fn(|_| rng.random_range(0..=5));

        out.push(ProjectRecord {
            id: format!("SYN-{:0width$}", i + 1),
            quality_rating: if rng.random_bool(0.5) {
                QualityRating::A
            } else {
                QualityRating::B
            },
            counting_method: "IFPUG".into(),
            resource_level: 1,
            development_type: if rng.random_bool(0.7) {
                "New Development".into()
            } else {
                "Re-development".into()
            },
            breakdown: Some(breakdown),
            normalized_effort: Some(effort),
            gsc: Some(gsc),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::records::passes_isbsg_filter;

    #[test]
    fn noise_free_records_follow_the_power_law() {
        let cfg = SynthConfig {
            noise_sigma: 0.0,
            n_projects: 50,
            ..SynthConfig::default()
        };
        for r in synthesize(&cfg).unwrap() {
            let size = ufp(r.breakdown.as_ref().unwrap(), &cfg.true_weights);
            assert_eq!(
                r.normalized_effort.unwrap(),
                cfg.true_a * size.powf(cfg.true_b)
            );
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let cfg = SynthConfig::default();
        assert_eq!(synthesize(&cfg).unwrap(), synthesize(&cfg).unwrap());
        let other = SynthConfig {
            seed: 43,
            ..cfg.clone()
        };
        assert_ne!(synthesize(&cfg).unwrap(), synthesize(&other).unwrap());
    }

    #[test]
    fn default_size_and_filter() {
        let recs = synthesize(&SynthConfig::default()).unwrap();
        assert_eq!(recs.len(), 184);
        assert!(recs.iter().all(passes_isbsg_filter));
        assert_eq!(recs[0].id, "SYN-001");
    }

    #[test]
    fn counts_respect_ranges() {
        let mut ranges = [[(0, 20); 3]; 5];
        ranges[3][2] = (5, 6);
        let cfg = SynthConfig {
            count_ranges: ranges,
            ..SynthConfig::default()
        };
        for r in synthesize(&cfg).unwrap() {
            let b = r.breakdown.unwrap();
            let n = b.get(ComponentKind::InternalLogicalFile, ComplexityLevel::High);
            assert!((5..=6).contains(&n));
            assert!(b.as_array().iter().flatten().all(|n| *n <= 20));
        }
    }

    #[test]
    fn invalid_configs() {
        assert!(synthesize(&SynthConfig {
            n_projects: 0,
            ..SynthConfig::default()
        })
        .is_err());
        assert!(synthesize(&SynthConfig {
            noise_sigma: -1.0,
            ..SynthConfig::default()
        })
        .is_err());
        assert!(synthesize(&SynthConfig {
            count_ranges: [[(0, 0); 3]; 5],
            ..SynthConfig::default()
        })
        .is_err());
    }

    #[test]
    fn perturbation_stays_in_band_and_ordered() {
        let w = perturbed_weights(&WeightTable::ORIGINAL, 0.4, 42).unwrap();
        for (p, o) in w.to_vector().iter().zip(WeightTable::ORIGINAL.to_vector()) {
            assert!(*p >= 0.6 * o - 1e-12 && *p <= 1.4 * o + 1e-12);
        }
        assert_eq!(
            w,
            perturbed_weights(&WeightTable::ORIGINAL, 0.4, 42).unwrap()
        );
        assert_ne!(w, WeightTable::ORIGINAL);
    }
}
