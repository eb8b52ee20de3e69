//! Sampler state: data view, latent variables and their consistency checks.

use log::warn;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::{SamplerConfig, SamplerMode};
use super::rounds::{RoundCursor, RoundPrior};
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::special::{
    categorical_from_logs, ln_beta, ln_beta_variate, ln_dirichlet_variate, ln_gamma,
    ln_gamma_variate, log_add_exp,
};

/// Documents flattened for the sampler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HbnbpData {
    pub vocab_sizes: Vec<usize>,
    /// Per document, observation `n` occupies `[n*F, (n+1)*F)`.
    observations: Vec<Vec<u32>>,
    /// Negative binomial shape r_d of each document.
    pub shapes: Vec<f64>,
}

impl HbnbpData {
    pub fn from_corpus(corpus: &Corpus, config: &SamplerConfig) -> Result<Self> {
        corpus.validate()?;
        let mut observations = Vec::with_capacity(corpus.documents.len());
        let mut shapes = Vec::with_capacity(corpus.documents.len());
        for doc in &corpus.documents {
            observations.push(doc.observations().into_iter().flatten().collect());
            shapes.push(config.shape_for(doc.len())?);
        }
        Ok(Self {
            vocab_sizes: corpus.vocab_sizes.clone(),
            observations,
            shapes,
        })
    }

    /// Builds data from explicit observations, e.g. for forward simulation.
    pub fn from_observations(
        vocab_sizes: Vec<usize>,
        docs: Vec<Vec<Vec<u32>>>,
        shapes: Vec<f64>,
    ) -> Result<Self> {
        if docs.len() != shapes.len() {
            return Err(Error::data("one shape per document is required"));
        }
        let f = vocab_sizes.len();
        let mut observations = Vec::with_capacity(docs.len());
        for doc in docs {
            let mut flat = Vec::with_capacity(doc.len() * f);
            for obs in doc {
                if obs.len() != f || obs.iter().zip(&vocab_sizes).any(|(&v, &s)| v as usize >= s) {
                    return Err(Error::data("observation does not match the vocabulary"));
                }
                flat.extend(obs);
            }
            observations.push(flat);
        }
        Ok(Self {
            vocab_sizes,
            observations,
            shapes,
        })
    }

    pub fn num_docs(&self) -> usize {
        self.observations.len()
    }

    pub fn num_fields(&self) -> usize {
        self.vocab_sizes.len()
    }

    pub fn doc_len(&self, d: usize) -> usize {
        self.observations[d].len() / self.num_fields()
    }

    pub fn observation(&self, d: usize, n: usize) -> &[u32] {
        let f = self.num_fields();
        &self.observations[d][n * f..(n + 1) * f]
    }
}

/// Latent state of the hierarchical sampler. Probabilities are held in log
/// space; `K` is the number of instantiated components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HbnbpState {
    pub mode: SamplerMode,
    /// Top-level weights b₀ₖ.
    pub b0: Vec<f64>,
    /// Round increments g_k (exact mode only).
    pub rounds: Vec<u64>,
    /// ln φ_k per field: `ln_phi[k][f][v]`.
    pub ln_phi: Vec<Vec<Vec<f64>>>,
    /// ln b_dk and ln(1 - b_dk).
    pub ln_b: Vec<Vec<f64>>,
    pub ln_1mb: Vec<Vec<f64>>,
    /// ln λ_dk.
    pub ln_lambda: Vec<Vec<f64>>,
    /// Component of each observation.
    pub z: Vec<Vec<usize>>,
    /// Slice variables (exact mode only).
    pub u: Vec<Vec<f64>>,
    /// n_dk.
    pub doc_counts: Vec<Vec<u64>>,
    /// Observation counts per component, field and value.
    pub topic_counts: Vec<Vec<Vec<u64>>>,
    pub mh_proposed: u64,
    pub mh_accepted: u64,
}

/// Document-level beta parameters (γθb₀, θ(1 - γb₀)).
pub(crate) fn doc_beta_params(config: &SamplerConfig, b0: f64) -> (f64, f64) {
    let a = config.gamma_d * config.theta_d * b0;
    (a, config.theta_d - a)
}

pub(crate) fn ln_beta_density(ln_x: f64, ln_1mx: f64, a: f64, b: f64) -> f64 {
    (a - 1.0) * ln_x + (b - 1.0) * ln_1mx - ln_beta(a, b)
}

impl HbnbpState {
    pub fn num_components(&self) -> usize {
        self.b0.len()
    }

    pub fn round_prior(config: &SamplerConfig) -> RoundPrior {
        RoundPrior {
            gamma0: config.gamma0,
            theta0: config.theta0,
        }
    }

    /// Round m_k of every component (exact mode).
    pub fn round_indices(&self) -> Vec<u64> {
        let mut m = 0;
        self.rounds
            .iter()
            .map(|&g| {
                m += g;
                m
            })
            .collect()
    }

    /// Empty state: no components and no assignments.
    pub(crate) fn empty(data: &HbnbpData, config: &SamplerConfig) -> Self {
        let d = data.num_docs();
        Self {
            mode: config.mode,
            b0: Vec::new(),
            rounds: Vec::new(),
            ln_phi: Vec::new(),
            ln_b: vec![Vec::new(); d],
            ln_1mb: vec![Vec::new(); d],
            ln_lambda: vec![Vec::new(); d],
            z: (0..d).map(|i| vec![0; data.doc_len(i)]).collect(),
            u: match config.mode {
                SamplerMode::ExactSlice => (0..d).map(|i| vec![0.0; data.doc_len(i)]).collect(),
                SamplerMode::FiniteK => vec![Vec::new(); d],
            },
            doc_counts: vec![Vec::new(); d],
            topic_counts: Vec::new(),
            mh_proposed: 0,
            mh_accepted: 0,
        }
    }

    /// Draws an initial state: components from the prior, then assignments
    /// from their conditional given those components.
    pub fn initialize<R: Rng + ?Sized>(
        data: &HbnbpData,
        config: &SamplerConfig,
        rng: &mut R,
    ) -> Result<Self> {
        config.validate()?;
        let mut state = Self::empty(data, config);
        let k = match config.mode {
            SamplerMode::ExactSlice => config.initial_components,
            SamplerMode::FiniteK => config.finite_k,
        };
        for _ in 0..k {
            state.push_prior_component(data, config, rng);
        }
        for d in 0..data.num_docs() {
            for n in 0..data.doc_len(d) {
                let logs: Vec<f64> = (0..k)
                    .map(|c| state.ln_lambda[d][c] + state.ln_likelihood(data.observation(d, n), c))
                    .collect();
                let c = categorical_from_logs(rng, &logs);
                state.z[d][n] = c;
                state.add_observation(data, d, n, c);
            }
        }
        if config.mode == SamplerMode::ExactSlice {
            for d in 0..data.num_docs() {
                for n in 0..data.doc_len(d) {
                    let z = state.z[d][n];
                    state.u[d][n] = rng.random::<f64>() * config.zeta_doc(z);
                }
            }
        }
        Ok(state)
    }

    /// ln F(x | φ_k): product over fields.
    pub fn ln_likelihood(&self, obs: &[u32], k: usize) -> f64 {
        obs.iter()
            .enumerate()
            .map(|(f, &v)| self.ln_phi[k][f][v as usize])
            .sum()
    }

    pub(crate) fn add_observation(&mut self, data: &HbnbpData, d: usize, n: usize, k: usize) {
        self.doc_counts[d][k] += 1;
        for (f, &v) in data.observation(d, n).iter().enumerate() {
            self.topic_counts[k][f][v as usize] += 1;
        }
    }

    pub(crate) fn remove_observation(&mut self, data: &HbnbpData, d: usize, n: usize, k: usize) {
        self.doc_counts[d][k] -= 1;
        for (f, &v) in data.observation(d, n).iter().enumerate() {
            self.topic_counts[k][f][v as usize] -= 1;
        }
    }

    /// Draws the top-level weight (and round, in exact mode) of a new
    /// component from its prior given the components before it.
    fn draw_top_level<R: Rng + ?Sized>(&self, config: &SamplerConfig, rng: &mut R) -> (u64, f64) {
        match config.mode {
            SamplerMode::FiniteK => {
                let (a, b) = config.finite_prior();
                (0, clamp_b0(ln_beta_variate(rng, a, b).0.exp()))
            }
            SamplerMode::ExactSlice => {
                let prior = Self::round_prior(config);
                let cursor = RoundCursor::after(&self.rounds);
                let g = prior.sample_increment(cursor, rng);
                let m = cursor.advance(g).round;
                let (ln_b0, _) = ln_beta_variate(rng, 1.0, config.theta0 + m as f64);
                (g, clamp_b0(ln_b0.exp()))
            }
        }
    }

    /// Appends a component with top-level weight, topic and document
    /// weights all drawn from the prior.
    pub(crate) fn push_prior_component<R: Rng + ?Sized>(
        &mut self,
        data: &HbnbpData,
        config: &SamplerConfig,
        rng: &mut R,
    ) {
        let (g, b0) = self.draw_top_level(config, rng);
        self.push_component(data, config, g, b0, false, rng);
    }

    /// Appends a component that no observation uses, drawn from its
    /// conditional given that every document has zero count on it.
    ///
    /// The top-level weight is drawn by rejection: propose from the prior
    /// given the earlier components, accept with probability
    /// Π_d P(n_dk = 0 | b₀ₖ).
    pub(crate) fn push_empty_component<R: Rng + ?Sized>(
        &mut self,
        data: &HbnbpData,
        config: &SamplerConfig,
        rng: &mut R,
    ) {
        const MAX_ATTEMPTS: usize = 10_000;
        let mut proposal = self.draw_top_level(config, rng);
        for attempt in 0.. {
            let ln_accept: f64 = data
                .shapes
                .iter()
                .map(|&r| ln_zero_count_probability(config, proposal.1, r))
                .sum();
            if rng.random::<f64>().ln() < ln_accept {
                break;
            }
            if attempt + 1 == MAX_ATTEMPTS {
                warn!("new-component rejection sampler gave up after {MAX_ATTEMPTS} proposals");
                break;
            }
            proposal = self.draw_top_level(config, rng);
        }
        self.push_component(data, config, proposal.0, proposal.1, true, rng);
    }

    pub(crate) fn push_component<R: Rng + ?Sized>(
        &mut self,
        data: &HbnbpData,
        config: &SamplerConfig,
        g: u64,
        b0: f64,
        given_zero_counts: bool,
        rng: &mut R,
    ) {
        if config.mode == SamplerMode::ExactSlice {
            self.rounds.push(g);
        }
        self.b0.push(b0);
        let phi: Vec<Vec<f64>> = data
            .vocab_sizes
            .iter()
            .map(|&v| ln_dirichlet_variate(rng, &vec![config.eta; v]))
            .collect();
        self.ln_phi.push(phi);
        self.topic_counts
            .push(data.vocab_sizes.iter().map(|&v| vec![0; v]).collect());
        let (a, c) = doc_beta_params(config, b0);
        for d in 0..data.num_docs() {
            let r = data.shapes[d];
            // Given n_dk = 0: b ~ Beta(a, c + r), λ ~ Gamma(r, rate 1/b).
            // Otherwise from the prior: b ~ Beta(a, c), λ ~ Gamma(r, rate (1-b)/b).
            let (ln_b, ln_1mb) = ln_beta_variate(rng, a, if given_zero_counts { c + r } else { c });
            let ln_g = ln_gamma_variate(rng, r);
            let ln_lambda = if given_zero_counts {
                ln_g + ln_b
            } else {
                ln_g + ln_b - ln_1mb
            };
            self.ln_b[d].push(ln_b);
            self.ln_1mb[d].push(ln_1mb);
            self.ln_lambda[d].push(ln_lambda);
            self.doc_counts[d].push(0);
        }
    }

    /// Checks that cached counts agree with assignments and every parameter
    /// is in range.
    pub fn check_invariants(&self, data: &HbnbpData) -> Result<()> {
        let k = self.num_components();
        let bad = |msg: String| Err(Error::numeric(format!("sampler state inconsistent: {msg}")));
        if self.ln_phi.len() != k || self.topic_counts.len() != k {
            return bad("component arrays differ in length".into());
        }
        if self.mode == SamplerMode::ExactSlice && self.rounds.len() != k {
            return bad("round array length".into());
        }
        for (i, &b) in self.b0.iter().enumerate() {
            if !(b > 0.0 && b < 1.0) {
                return bad(format!("b0[{i}] = {b}"));
            }
        }
        let mut topic = vec![
            data.vocab_sizes
                .iter()
                .map(|&v| vec![0u64; v])
                .collect::<Vec<_>>();
            k
        ];
        for d in 0..data.num_docs() {
            if self.ln_b[d].len() != k
                || self.ln_lambda[d].len() != k
                || self.doc_counts[d].len() != k
            {
                return bad(format!("document {d} arrays"));
            }
            let mut counts = vec![0u64; k];
            for n in 0..data.doc_len(d) {
                let z = self.z[d][n];
                if z >= k {
                    return bad(format!("assignment {z} >= K = {k}"));
                }
                counts[z] += 1;
                for (f, &v) in data.observation(d, n).iter().enumerate() {
                    topic[z][f][v as usize] += 1;
                }
            }
            if counts != self.doc_counts[d] {
                return bad(format!("document {d} counts"));
            }
            for c in 0..k {
                let (lb, l1) = (self.ln_b[d][c], self.ln_1mb[d][c]);
                if !(lb.is_finite() && l1.is_finite() && self.ln_lambda[d][c].is_finite()) {
                    return bad(format!("non-finite document weight ({d}, {c})"));
                }
                if (log_add_exp(lb, l1)).abs() > 1e-9 {
                    return bad(format!("b and 1 - b disagree at ({d}, {c})"));
                }
            }
        }
        if topic != self.topic_counts {
            return bad("topic counts".into());
        }
        for (c, fields) in self.ln_phi.iter().enumerate() {
            for row in fields {
                let total: f64 = row.iter().map(|l| l.exp()).sum();
                if (total - 1.0).abs() > 1e-9 || row.iter().any(|l| !l.is_finite()) {
                    return bad(format!("topic {c} is not a distribution"));
                }
            }
        }
        Ok(())
    }

    /// Joint log density of all latent variables and the data, up to
    /// constants that do not depend on the state.
    pub fn log_joint(&self, data: &HbnbpData, config: &SamplerConfig) -> f64 {
        let k = self.num_components();
        let mut total = 0.0;
        match self.mode {
            SamplerMode::FiniteK => {
                let (a, b) = config.finite_prior();
                for &b0 in &self.b0 {
                    total += ln_beta_density(b0.ln(), (-b0).ln_1p(), a, b);
                }
            }
            SamplerMode::ExactSlice => {
                total += Self::round_prior(config).ln_sequence(&self.rounds);
                for (&b0, m) in self.b0.iter().zip(self.round_indices()) {
                    total += ln_beta_density(b0.ln(), (-b0).ln_1p(), 1.0, config.theta0 + m as f64);
                }
            }
        }
        for d in 0..data.num_docs() {
            let r = data.shapes[d];
            for c in 0..k {
                let (a, bb) = doc_beta_params(config, self.b0[c]);
                let (lb, l1, ll) = (self.ln_b[d][c], self.ln_1mb[d][c], self.ln_lambda[d][c]);
                total += ln_beta_density(lb, l1, a, bb);
                // λ ~ Gamma(r, rate (1-b)/b).
                let ln_rate = l1 - lb;
                total += r * ln_rate - ln_gamma(r) + (r - 1.0) * ll - (ln_rate + ll).exp();
                // Poisson counts, arranged over the document's observations.
                total += self.doc_counts[d][c] as f64 * ll - ll.exp();
            }
            for n in 0..data.doc_len(d) {
                total += self.ln_likelihood(data.observation(d, n), self.z[d][n]);
            }
        }
        for fields in &self.ln_phi {
            for row in fields {
                let v = row.len() as f64;
                total += ln_gamma(config.eta * v) - v * ln_gamma(config.eta)
                    + (config.eta - 1.0) * row.iter().sum::<f64>();
            }
        }
        total
    }

    /// Number of components with b₀ above `threshold`.
    pub fn used_components(&self, threshold: f64) -> usize {
        used_components(&self.b0, threshold)
    }
}

pub fn used_components(b0: &[f64], threshold: f64) -> usize {
    b0.iter().filter(|&&b| b > threshold).count()
}

/// Bounds kept away from 0 and 1 so that logs and beta parameters stay
/// finite.
pub(crate) const B0_MIN: f64 = 1e-12;
pub(crate) const B0_MAX: f64 = 1.0 - 1e-12;

fn clamp_b0(b0: f64) -> f64 {
    b0.clamp(B0_MIN, B0_MAX)
}

/// ln P(n_dk = 0 | b₀) with b_dk and λ_dk integrated out:
/// Γ(c + r)Γ(θ) / (Γ(c)Γ(θ + r)) with c = θ(1 - γb₀).
pub(crate) fn ln_zero_count_probability(config: &SamplerConfig, b0: f64, r: f64) -> f64 {
    let (_, c) = doc_beta_params(config, b0);
    let theta = config.theta_d;
    ln_gamma(c + r) - ln_gamma(c) + ln_gamma(theta) - ln_gamma(theta + r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{make_toy_bars, ToyBarsSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn toy(mode: SamplerMode) -> (HbnbpData, SamplerConfig, HbnbpState) {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let corpus = make_toy_bars(
            ToyBarsSpec {
                documents: 6,
                words_per_document: 20,
            },
            &mut rng,
        )
        .unwrap();
        let config = SamplerConfig {
            mode,
            finite_k: 12,
            initial_components: 5,
            ..SamplerConfig::default()
        };
        let data = HbnbpData::from_corpus(&corpus, &config).unwrap();
        let state = HbnbpState::initialize(&data, &config, &mut rng).unwrap();
        (data, config, state)
    }

    #[test]
    fn initial_state_is_consistent() {
        for mode in [SamplerMode::ExactSlice, SamplerMode::FiniteK] {
            let (data, config, state) = toy(mode);
            state.check_invariants(&data).unwrap();
            assert!(state.log_joint(&data, &config).is_finite());
        }
    }

    #[test]
    fn zero_count_probability_matches_monte_carlo() {
        let config = SamplerConfig::default();
        let (b0, r) = (0.3, 2.5);
        let (a, c) = doc_beta_params(&config, b0);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 200_000;
        // E[(1 - b)^r] for b ~ Beta(a, c).
        let mc: f64 = (0..n)
            .map(|_| (r * ln_beta_variate(&mut rng, a, c).1).exp())
            .sum::<f64>()
            / n as f64;
        let exact = ln_zero_count_probability(&config, b0, r).exp();
        assert!((mc - exact).abs() < 0.005, "{mc} vs {exact}");
    }

    #[test]
    fn used_component_threshold() {
        assert_eq!(used_components(&[0.5, 0.005, 0.02], 0.01), 2);
        assert_eq!(used_components(&[0.5, 0.005], 0.0), 2);
        assert_eq!(used_components(&[0.5, 0.005], 1.0), 0);
    }
}
