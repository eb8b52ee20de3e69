//! Running a chain: seeding, traces, retained samples and checkpoints.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::SamplerConfig;
use super::state::{HbnbpData, HbnbpState};
use crate::corpus::Corpus;
use crate::error::{Error, Result};

/// One row of the per-iteration trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub num_components: usize,
    pub used_components: usize,
    pub log_joint: f64,
}

/// Retained posterior draw of the global quantities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSample {
    pub iteration: usize,
    pub b0: Vec<f64>,
    /// φ_k per field: `phi[k][f][v]`.
    pub phi: Vec<Vec<Vec<f64>>>,
}

impl PosteriorSample {
    pub fn from_state(iteration: usize, state: &HbnbpState) -> Self {
        let phi = state
            .ln_phi
            .iter()
            .map(|fields| {
                fields
                    .iter()
                    .map(|row| row.iter().map(|l| l.exp()).collect())
                    .collect()
            })
            .collect();
        Self {
            iteration,
            b0: state.b0.clone(),
            phi,
        }
    }

    pub fn num_components(&self) -> usize {
        self.b0.len()
    }
}

/// A chain bundling data, configuration, state and generator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Sampler {
    pub config: SamplerConfig,
    pub data: HbnbpData,
    pub state: HbnbpState,
    pub rng: ChaCha8Rng,
    /// Completed sweeps.
    pub iteration: usize,
}

impl Sampler {
    pub fn new(corpus: &Corpus, config: SamplerConfig) -> Result<Self> {
        config.validate()?;
        let data = HbnbpData::from_corpus(corpus, &config)?;
        Self::from_data(data, config)
    }

    pub fn from_data(data: HbnbpData, config: SamplerConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let state = HbnbpState::initialize(&data, &config, &mut rng)?;
        Ok(Self {
            config,
            data,
            state,
            rng,
            iteration: 0,
        })
    }

    pub fn sweep(&mut self) {
        self.state.sweep(&self.data, &self.config, &mut self.rng);
        self.iteration += 1;
    }

    pub fn trace_row(&self) -> TraceRow {
        TraceRow {
            iteration: self.iteration,
            num_components: self.state.num_components(),
            used_components: self.state.used_components(self.config.used_threshold),
            log_joint: self.state.log_joint(&self.data, &self.config),
        }
    }

    /// Whether the sample after the current sweep is retained.
    pub fn is_retained(&self) -> bool {
        self.config.is_retained(self.iteration)
    }

    /// Runs until `config.iterations` sweeps are complete, calling
    /// `observe` after each sweep with the trace row and, for retained
    /// iterations, the posterior sample.
    pub fn run<F>(&mut self, mut observe: F) -> Result<()>
    where
        F: FnMut(&Sampler, TraceRow, Option<PosteriorSample>) -> Result<()>,
    {
        while self.iteration < self.config.iterations {
            self.sweep();
            let row = self.trace_row();
            if !row.log_joint.is_finite() {
                return Err(Error::numeric(format!(
                    "log joint is not finite at iteration {}",
                    self.iteration
                )));
            }
            let sample = self
                .is_retained()
                .then(|| PosteriorSample::from_state(self.iteration, &self.state));
            observe(self, row, sample)?;
        }
        Ok(())
    }

    /// Serializes the full chain (state and generator) for resumption.
    pub fn checkpoint(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn restore(json: &str) -> Result<Self> {
        let s: Self = serde_json::from_str(json)?;
        s.config.validate()?;
        s.state.check_invariants(&s.data)?;
        Ok(s)
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.state.mh_proposed == 0 {
            return 0.0;
        }
        self.state.mh_accepted as f64 / self.state.mh_proposed as f64
    }
}
