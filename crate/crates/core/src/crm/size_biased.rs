//! Size-biased (round-indexed) construction of the beta process.
//!
//! Round i contributes C_i ~ Poisson(θγ/(θ + i)) atoms with independent
//! Beta(1, θ + i) weights. The expected weight in round i is
//! θγ/((θ + i)(θ + i + 1)), which telescopes: the rounds from R onwards carry
//! expected total weight exactly θγ/(θ + R).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Result};
use crate::measure::{Atom, AtomicMeasure, Location};
use crate::special::{beta_variate, poisson_variate};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Round {
    pub index: usize,
    pub atoms: Vec<Atom>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeBiasedDraw {
    pub rounds: Vec<Round>,
    /// Expected total weight of the rounds not simulated.
    pub dropped_mass_bound: f64,
}

impl SizeBiasedDraw {
    pub fn to_measure(&self) -> AtomicMeasure {
        AtomicMeasure::from_sampled(
            self.rounds
                .iter()
                .flat_map(|r| r.atoms.iter().copied())
                .collect(),
        )
    }

    /// Round label of every atom, aligned with `to_measure().atoms()`.
    pub fn round_labels(&self) -> Vec<usize> {
        self.rounds
            .iter()
            .flat_map(|r| r.atoms.iter().filter(|a| a.weight > 0.0).map(|_| r.index))
            .collect()
    }
}

/// Expected total weight of rounds `max_rounds, max_rounds + 1, ...`.
pub fn expected_dropped_mass(mass: f64, concentration: f64, max_rounds: usize) -> f64 {
    mass * concentration / (concentration + max_rounds as f64)
}

/// Simulates rounds `0..max_rounds` of the size-biased construction.
pub fn sample_bp_size_biased<R: Rng + ?Sized>(
    mass: f64,
    concentration: f64,
    max_rounds: usize,
    rng: &mut R,
) -> Result<SizeBiasedDraw> {
    ensure_positive("mass", mass)?;
    ensure_positive("concentration", concentration)?;
    let rounds = (0..max_rounds)
        .map(|i| {
            let shift = concentration + i as f64;
            let count = poisson_variate(rng, concentration * mass / shift);
            let atoms = (0..count)
                .map(|_| Atom {
                    location: Location::Point(rng.random()),
                    weight: beta_variate(rng, 1.0, shift),
                })
                .collect();
            Round { index: i, atoms }
        })
        .collect();
    Ok(SizeBiasedDraw {
        rounds,
        dropped_mass_bound: expected_dropped_mass(mass, concentration, max_rounds),
    })
}
