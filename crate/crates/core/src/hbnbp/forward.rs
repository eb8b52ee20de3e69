//! Forward simulation from the joint law of a model with a fixed number of
//! instantiated components, used for joint-distribution tests of the
//! sampler.

use rand::Rng;

use super::config::{SamplerConfig, SamplerMode};
use super::state::{HbnbpData, HbnbpState};
use crate::error::{Error, Result};
use crate::special::{categorical_from_logs, ln_poisson_pmf, log_sum_exp, open_unit};

#[derive(Debug, Clone, PartialEq)]
pub struct ForwardSpec {
    pub vocab_sizes: Vec<usize>,
    /// Fixed length of every document; the joint is conditioned on it.
    pub doc_lengths: Vec<usize>,
    pub shapes: Vec<f64>,
    /// Number of components (all instantiated).
    pub components: usize,
    /// Rejection attempts before giving up.
    pub max_attempts: usize,
}

/// Draws (data, state) from the joint law conditioned on the document
/// lengths, by rejection on the Poisson row totals.
pub fn sample_joint<R: Rng + ?Sized>(
    spec: &ForwardSpec,
    config: &SamplerConfig,
    rng: &mut R,
) -> Result<(HbnbpData, HbnbpState)> {
    let f = spec.vocab_sizes.len();
    let docs: Vec<Vec<Vec<u32>>> = spec
        .doc_lengths
        .iter()
        .map(|&n| vec![vec![0; f]; n])
        .collect();
    let mut data =
        HbnbpData::from_observations(spec.vocab_sizes.clone(), docs, spec.shapes.clone())?;
    for _ in 0..spec.max_attempts {
        let mut state = HbnbpState::empty(&data, config);
        for _ in 0..spec.components {
            state.push_prior_component(&data, config, rng);
        }
        // The row total is Poisson(Λ_d); accept with probability
        // Pois(N_d; Λ_d)/Pois(N_d; N_d), then the assignments are iid
        // categorical with probabilities λ_dk/Λ_d.
        let ln_accept: f64 = state
            .ln_lambda
            .iter()
            .zip(&spec.doc_lengths)
            .map(|(row, &n)| {
                let total = log_sum_exp(row).exp();
                match n {
                    0 => -total,
                    _ => ln_poisson_pmf(n as u64, total) - ln_poisson_pmf(n as u64, n as f64),
                }
            })
            .sum();
        if !(open_unit(rng).ln() < ln_accept) {
            continue;
        }
        for (d, &n) in spec.doc_lengths.iter().enumerate() {
            state.z[d] = (0..n)
                .map(|_| categorical_from_logs(rng, &state.ln_lambda[d]))
                .collect();
        }
        data = resample_observations(&state, &data, rng)?;
        rebuild_counts(&mut state, &data);
        if config.mode == SamplerMode::ExactSlice {
            for d in 0..data.num_docs() {
                for n in 0..data.doc_len(d) {
                    state.u[d][n] = open_unit(rng) * config.zeta_doc(state.z[d][n]);
                }
            }
        }
        return Ok((data, state));
    }
    Err(Error::numeric(format!(
        "no joint draw matched the document lengths in {} attempts",
        spec.max_attempts
    )))
}

/// Redraws every observation from its component's topic, keeping the
/// assignments: x_dn ~ F(φ_{z_dn}).
pub fn resample_observations<R: Rng + ?Sized>(
    state: &HbnbpState,
    data: &HbnbpData,
    rng: &mut R,
) -> Result<HbnbpData> {
    let docs: Vec<Vec<Vec<u32>>> = (0..data.num_docs())
        .map(|d| {
            (0..data.doc_len(d))
                .map(|n| {
                    let k = state.z[d][n];
                    state.ln_phi[k]
                        .iter()
                        .map(|row| categorical_from_logs(rng, row) as u32)
                        .collect()
                })
                .collect()
        })
        .collect();
    HbnbpData::from_observations(data.vocab_sizes.clone(), docs, data.shapes.clone())
}

/// Recomputes the cached count tables from the assignments.
pub fn rebuild_counts(state: &mut HbnbpState, data: &HbnbpData) {
    let k = state.num_components();
    state.doc_counts = vec![vec![0; k]; data.num_docs()];
    state.topic_counts = vec![data.vocab_sizes.iter().map(|&v| vec![0; v]).collect(); k];
    for d in 0..data.num_docs() {
        for n in 0..data.doc_len(d) {
            let z = state.z[d][n];
            state.add_observation(data, d, n, z);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn joint_draw_is_consistent() {
        for mode in [SamplerMode::ExactSlice, SamplerMode::FiniteK] {
            let config = SamplerConfig {
                mode,
                finite_k: 4,
                initial_components: 4,
                max_components: 4,
                ..Default::default()
            };
            let spec = ForwardSpec {
                vocab_sizes: vec![5],
                doc_lengths: vec![8, 8],
                shapes: vec![2.0, 2.0],
                components: 4,
                max_attempts: 100_000,
            };
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            let (data, state) = sample_joint(&spec, &config, &mut rng).unwrap();
            state.check_invariants(&data).unwrap();
            assert_eq!(data.doc_len(0), 8);
            assert!(state.log_joint(&data, &config).is_finite());
        }
    }
}
