//! Completely random measures: parameters, simulation and transformations.

mod intensity;
mod params;
mod size_biased;
mod transform;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use intensity::{IntensityTable, LevyIntensity, TruncationReport, DEFAULT_EPSILON};
pub use params::{
    BaseMeasure, BpFixedAtom, BpParams, GapFixedAtom, GapParams, RbpFixedAtom, RbpParams,
};
pub use size_biased::{expected_dropped_mass, sample_bp_size_biased, Round, SizeBiasedDraw};
pub use transform::{
    beta_prime_to_bp, bp_to_beta_prime, gamma_ratio_to_beta_prime, gammas_to_bp, normalize_to_dp,
};

use crate::error::Result;
use crate::measure::{Atom, AtomicMeasure, Location};
use crate::special::{gamma_variate, ln_beta_variate};

/// Law of a fixed atom's weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FixedLaw {
    Beta { a: f64, b: f64 },
    Gamma { shape: f64, rate: f64 },
    BetaPrime { a: f64, b: f64 },
}

impl FixedLaw {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            FixedLaw::Beta { a, b } => {
                let (ln_w, ln_1mw) = ln_beta_variate(rng, a, b);
                if ln_w < ln_1mw {
                    ln_w.exp()
                } else {
                    -ln_1mw.exp_m1()
                }
            }
            FixedLaw::Gamma { shape, rate } => gamma_variate(rng, shape, rate),
            FixedLaw::BetaPrime { a, b } => {
                // Ratio of independent unit-rate gammas.
                let (ln_w, ln_1mw) = ln_beta_variate(rng, a, b);
                (ln_w - ln_1mw).exp()
            }
        }
    }
}

/// Reusable threshold sampler: the intensity table is built once and shared
/// across replicates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThresholdSampler {
    table: IntensityTable,
    fixed: Vec<(Location, FixedLaw)>,
}

impl ThresholdSampler {
    pub fn new(
        intensity: LevyIntensity,
        epsilon: f64,
        fixed: Vec<(Location, FixedLaw)>,
    ) -> Result<Self> {
        Ok(Self {
            table: IntensityTable::build(intensity, epsilon)?,
            fixed,
        })
    }

    /// Beta or three-parameter beta process.
    pub fn beta_process(params: &BpParams, epsilon: f64) -> Result<Self> {
        params.validate()?;
        let intensity = LevyIntensity::Beta {
            mass: params.mass,
            concentration: params.concentration,
            discount: params.discount,
        };
        let fixed = params
            .fixed_atoms
            .iter()
            .map(|f| {
                let (a, b) = params.fixed_atom_beta(f.rho);
                (f.location, FixedLaw::Beta { a, b })
            })
            .collect();
        Self::new(intensity, epsilon, fixed)
    }

    pub fn reparameterized_beta_process(params: &RbpParams, epsilon: f64) -> Result<Self> {
        params.validate()?;
        let fixed = params
            .fixed_atoms
            .iter()
            .map(|f| {
                (
                    f.location,
                    FixedLaw::Beta {
                        a: f.rho,
                        b: f.sigma,
                    },
                )
            })
            .collect();
        Self::new(
            LevyIntensity::beta(params.mass, params.concentration),
            epsilon,
            fixed,
        )
    }

    pub fn gamma_process(params: &GapParams, epsilon: f64) -> Result<Self> {
        params.validate()?;
        let fixed = params
            .fixed_atoms
            .iter()
            .map(|f| {
                (
                    f.location,
                    FixedLaw::Gamma {
                        shape: params.concentration * f.rho,
                        rate: params.rate,
                    },
                )
            })
            .collect();
        let intensity = LevyIntensity::Gamma {
            concentration: params.concentration,
            rate: params.rate,
        };
        Self::new(intensity, epsilon, fixed)
    }

    /// Beta prime process with fixed atoms BetaPrime(θγρ, θ(1 - γρ)).
    pub fn beta_prime_process(
        mass: f64,
        concentration: f64,
        fixed: &[BpFixedAtom],
        epsilon: f64,
    ) -> Result<Self> {
        let laws = fixed
            .iter()
            .map(|f| {
                let gr = mass * f.rho;
                (
                    f.location,
                    FixedLaw::BetaPrime {
                        a: concentration * gr,
                        b: concentration * (1.0 - gr),
                    },
                )
            })
            .collect();
        Self::new(
            LevyIntensity::BetaPrime {
                mass,
                concentration,
            },
            epsilon,
            laws,
        )
    }

    pub fn table(&self) -> &IntensityTable {
        &self.table
    }

    pub fn truncation_report(&self) -> Result<TruncationReport> {
        self.table.truncation_report()
    }

    /// Ordinary-component weights only, without locations.
    pub fn sample_ordinary_weights<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.table.sample_weights(rng)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> AtomicMeasure {
        let mut atoms: Vec<Atom> = self
            .fixed
            .iter()
            .map(|(location, law)| Atom {
                location: *location,
                weight: law.sample(rng),
            })
            .collect();
        for weight in self.table.sample_weights(rng) {
            atoms.push(Atom {
                location: Location::Point(rng.random()),
                weight,
            });
        }
        AtomicMeasure::from_sampled(atoms)
    }
}

/// Threshold simulation of a beta or three-parameter beta process.
pub fn sample_bp_threshold<R: Rng + ?Sized>(
    params: &BpParams,
    epsilon: f64,
    rng: &mut R,
) -> Result<AtomicMeasure> {
    Ok(ThresholdSampler::beta_process(params, epsilon)?.sample(rng))
}

pub fn sample_rbp_threshold<R: Rng + ?Sized>(
    params: &RbpParams,
    epsilon: f64,
    rng: &mut R,
) -> Result<AtomicMeasure> {
    Ok(ThresholdSampler::reparameterized_beta_process(params, epsilon)?.sample(rng))
}

pub fn sample_gap<R: Rng + ?Sized>(
    params: &GapParams,
    epsilon: f64,
    rng: &mut R,
) -> Result<AtomicMeasure> {
    Ok(ThresholdSampler::gamma_process(params, epsilon)?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fixed_atom_laws_have_expected_means() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 40_000;
        let mean = |law: FixedLaw, rng: &mut ChaCha8Rng| {
            (0..n).map(|_| law.sample(rng)).sum::<f64>() / n as f64
        };
        assert!((mean(FixedLaw::Beta { a: 1.0, b: 1.0 }, &mut rng) - 0.5).abs() < 0.01);
        assert!(
            (mean(
                FixedLaw::Gamma {
                    shape: 2.0,
                    rate: 1.0
                },
                &mut rng
            ) - 2.0)
                .abs()
                < 0.05
        );
        // BetaPrime(a, b) mean a/(b - 1)
        assert!((mean(FixedLaw::BetaPrime { a: 2.0, b: 6.0 }, &mut rng) - 0.4).abs() < 0.02);
    }

    #[test]
    fn seeded_draws_are_deterministic() {
        let params = BpParams::new(3.0, 3.0).unwrap();
        let a = sample_bp_threshold(&params, 1e-4, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = sample_bp_threshold(&params, 1e-4, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_mass_gives_empty_ordinary_component() {
        let params = BpParams::new(0.0, 3.0).unwrap();
        let m = sample_bp_threshold(&params, 1e-6, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert!(m.is_empty());
    }

    #[test]
    fn epsilon_out_of_range_rejected() {
        let params = BpParams::new(3.0, 3.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(sample_bp_threshold(&params, 0.0, &mut rng).is_err());
        assert!(sample_bp_threshold(&params, 1.0, &mut rng).is_err());
    }
}
