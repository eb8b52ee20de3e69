//! Conditional updates of the hierarchical sampler.

use log::{debug, warn};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::config::{SamplerConfig, SamplerMode};
use super::rounds::RoundCursor;
use super::state::{doc_beta_params, ln_beta_density, HbnbpData, HbnbpState, B0_MAX, B0_MIN};
use crate::special::{
    categorical_from_logs, ln_beta_variate, ln_dirichlet_variate, ln_gamma, ln_gamma_variate,
    ln_sigmoid_pair, logit, open_unit,
};

impl HbnbpState {
    /// Draws every slice variable u_dn ~ U(0, ζ_{z_dn}) and returns the number
    /// of components the next assignment step may use.
    pub fn sample_slices<R: Rng + ?Sized>(
        &mut self,
        data: &HbnbpData,
        config: &SamplerConfig,
        rng: &mut R,
    ) -> usize {
        let mut needed = 0;
        for d in 0..data.num_docs() {
            for n in 0..data.doc_len(d) {
                let u = open_unit(rng) * config.zeta_doc(self.z[d][n]);
                self.u[d][n] = u;
                needed = needed.max(config.active_count(u).max(self.z[d][n] + 1));
            }
        }
        needed
    }

    /// Instantiates components until `needed` exist (capped by
    /// `max_components`), each drawn given zero counts in every document.
    pub fn grow<R: Rng + ?Sized>(
        &mut self,
        data: &HbnbpData,
        config: &SamplerConfig,
        needed: usize,
        rng: &mut R,
    ) {
        if needed > config.max_components {
            warn!(
                "slice level needs {needed} components; capped at max_components = {}",
                config.max_components
            );
        }
        let target = needed.min(config.max_components);
        while self.num_components() < target {
            self.push_empty_component(data, config, rng);
        }
    }

    /// Reassigns every observation. In exact mode the candidates are the
    /// components whose slice level exceeds u_dn, weighted by λF/ζ; in
    /// finite mode all components, weighted by λF.
    pub fn sample_assignments<R: Rng + ?Sized>(
        &mut self,
        data: &HbnbpData,
        config: &SamplerConfig,
        rng: &mut R,
    ) {
        let k_all = self.num_components();
        let mut logs = Vec::with_capacity(k_all);
        for d in 0..data.num_docs() {
            for n in 0..data.doc_len(d) {
                let old = self.z[d][n];
                self.remove_observation(data, d, n, old);
                let obs = data.observation(d, n);
                logs.clear();
                match self.mode {
                    SamplerMode::FiniteK => {
                        logs.extend(
                            (0..k_all).map(|k| self.ln_lambda[d][k] + self.ln_likelihood(obs, k)),
                        );
                    }
                    SamplerMode::ExactSlice => {
                        let active = config.active_count(self.u[d][n]).max(old + 1).min(k_all);
                        logs.extend((0..active).map(|k| {
                            self.ln_lambda[d][k] + self.ln_likelihood(obs, k)
                                - config.ln_zeta_doc(k)
                        }));
                    }
                }
                let new = categorical_from_logs(rng, &logs);
                self.z[d][n] = new;
                self.add_observation(data, d, n, new);
            }
        }
    }

    /// λ_dk ~ Gamma(r_d + n_dk, rate 1/b_dk) for every document and component.
    pub fn sample_lambdas<R: Rng + ?Sized>(&mut self, data: &HbnbpData, rng: &mut R) {
        for d in 0..data.num_docs() {
            let r = data.shapes[d];
            for k in 0..self.num_components() {
                let n = self.doc_counts[d][k] as f64;
                self.ln_lambda[d][k] = self.ln_b[d][k] + ln_gamma_variate(rng, r + n);
            }
        }
    }

    /// Joint draw of (b_dk, λ_dk) given the counts: b_dk from its
    /// conditional with λ integrated out, then λ_dk given b_dk.
    pub fn sample_doc_weights<R: Rng + ?Sized>(
        &mut self,
        data: &HbnbpData,
        config: &SamplerConfig,
        rng: &mut R,
    ) {
        for d in 0..data.num_docs() {
            let r = data.shapes[d];
            for k in 0..self.num_components() {
                let n = self.doc_counts[d][k] as f64;
                let (a, c) = doc_beta_params(config, self.b0[k]);
                let (ln_b, ln_1mb) = ln_beta_variate(rng, a + n, c + r);
                self.ln_b[d][k] = ln_b;
                self.ln_1mb[d][k] = ln_1mb;
                // λ | b, n ~ Gamma(r + n, rate 1/b).
                self.ln_lambda[d][k] = ln_b + ln_gamma_variate(rng, r + n);
            }
        }
    }

    /// φ_k ~ Dir(η + counts) independently per field.
    pub fn sample_topics<R: Rng + ?Sized>(&mut self, config: &SamplerConfig, rng: &mut R) {
        for k in 0..self.num_components() {
            for f in 0..self.ln_phi[k].len() {
                let alpha: Vec<f64> = self.topic_counts[k][f]
                    .iter()
                    .map(|&c| config.eta + c as f64)
                    .collect();
                self.ln_phi[k][f] = ln_dirichlet_variate(rng, &alpha);
            }
        }
    }

    /// Unnormalized log conditional density of b₀ₖ at `b0`. `round` is m_k
    /// (ignored in finite mode). With `collapsed`, the document weights
    /// are integrated out and the target depends on the counts n_dk only.
    pub fn ln_b0_target(
        &self,
        data: &HbnbpData,
        config: &SamplerConfig,
        k: usize,
        b0: f64,
        round: u64,
        collapsed: bool,
    ) -> f64 {
        let ln_1mb0 = (-b0).ln_1p();
        let mut total = match self.mode {
            SamplerMode::ExactSlice => (config.theta0 + round as f64 - 1.0) * ln_1mb0,
            SamplerMode::FiniteK => {
                let (a, c) = config.finite_prior();
                (a - 1.0) * b0.ln() + (c - 1.0) * ln_1mb0
            }
        };
        let (a, c) = doc_beta_params(config, b0);
        let (ln_g_a, ln_g_c) = (ln_gamma(a), ln_gamma(c));
        for d in 0..data.num_docs() {
            if collapsed {
                let n = self.doc_counts[d][k] as f64;
                let r = data.shapes[d];
                total += ln_gamma(n + a) - ln_g_a + ln_gamma(r + c) - ln_g_c;
            } else {
                total += -ln_g_a - ln_g_c + a * self.ln_b[d][k] + c * self.ln_1mb[d][k];
            }
        }
        total
    }

    /// Random-walk Metropolis–Hastings on logit(b₀ₖ) for every component.
    pub fn sample_b0<R: Rng + ?Sized>(
        &mut self,
        data: &HbnbpData,
        config: &SamplerConfig,
        rng: &mut R,
    ) {
        let rounds = self.round_indices();
        let collapsed = config.collapsed_b0;
        for k in 0..self.num_components() {
            let round = rounds.get(k).copied().unwrap_or(0);
            let current = self.b0[k];
            let x = logit(current);
            let step: f64 = StandardNormal.sample(rng);
            let x_new = x + config.mh_step * step;
            let (ln_p, ln_q) = ln_sigmoid_pair(x_new);
            let proposal = ln_p.exp();
            self.mh_proposed += 1;
            if !(B0_MIN..=B0_MAX).contains(&proposal) {
                continue;
            }
            // Jacobian of the logit transform: b(1 - b).
            let ln_ratio =
                self.ln_b0_target(data, config, k, proposal, round, collapsed) + ln_p + ln_q
                    - self.ln_b0_target(data, config, k, current, round, collapsed)
                    - current.ln()
                    - (-current).ln_1p();
            if ln_ratio.is_nan() {
                debug!("b0 proposal {proposal} for component {k} gave a NaN ratio; rejected");
                continue;
            }
            if open_unit(rng).ln() < ln_ratio {
                self.b0[k] = proposal;
                self.mh_accepted += 1;
            }
        }
    }

    /// Log full conditional of the round increment of component `k`, up to
    /// a constant: the increment prior of every component from `k` on, and
    /// the Beta(1, θ₀ + m_j) densities of their top-level weights.
    fn ln_round_target(&self, config: &SamplerConfig, k: usize, prefix: RoundCursor) -> f64 {
        let prior = Self::round_prior(config);
        let mut cursor = prefix;
        let mut total = 0.0;
        for j in k..self.num_components() {
            let g = self.rounds[j];
            total += prior.ln_increment(cursor, g);
            cursor = cursor.advance(g);
            let b0 = self.b0[j];
            total += ln_beta_density(
                b0.ln(),
                (-b0).ln_1p(),
                1.0,
                config.theta0 + cursor.round as f64,
            );
        }
        total
    }

    /// Slice-within-Gibbs update of each round increment. For component k an
    /// auxiliary v ~ U(0, w(g_k)) with w(g) = ζ₀(g)(1 - b₀ₖ)^g restricts g to
    /// a finite set, on which g is drawn ∝ conditional / w(g).
    pub fn sample_rounds<R: Rng + ?Sized>(&mut self, config: &SamplerConfig, rng: &mut R) {
        let mut prefix = RoundCursor::default();
        let mut logs = Vec::new();
        for k in 0..self.num_components() {
            let ln_1mb0 = (-self.b0[k]).ln_1p();
            let ln_w = |g: u64| config.ln_zeta_round(g) + g as f64 * ln_1mb0;
            let current = self.rounds[k];
            let ln_v = ln_w(current) + open_unit(rng).ln();
            let decay = config.zeta0_base.ln() - ln_1mb0;
            let g_max = ((-ln_v / decay).floor() as u64).max(current);
            logs.clear();
            for g in 0..=g_max {
                self.rounds[k] = g;
                logs.push(self.ln_round_target(config, k, prefix) - ln_w(g));
            }
            let g = categorical_from_logs(rng, &logs) as u64;
            self.rounds[k] = g;
            prefix = prefix.advance(g);
        }
    }

    /// One full sweep over all latent variables.
    pub fn sweep<R: Rng + ?Sized>(
        &mut self,
        data: &HbnbpData,
        config: &SamplerConfig,
        rng: &mut R,
    ) {
        if self.mode == SamplerMode::ExactSlice {
            let needed = self.sample_slices(data, config, rng);
            self.grow(data, config, needed, rng);
        }
        self.sample_lambdas(data, rng);
        self.sample_assignments(data, config, rng);
        self.sample_doc_weights(data, config, rng);
        self.sample_topics(config, rng);
        self.sample_b0(data, config, rng);
        if config.collapsed_b0 {
            self.sample_doc_weights(data, config, rng);
        }
        if self.mode == SamplerMode::ExactSlice {
            self.sample_rounds(config, rng);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;
    use crate::special::{log_sum_exp, sigmoid};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small_problem(mode: SamplerMode) -> (HbnbpData, SamplerConfig, HbnbpState, ChaCha8Rng) {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let docs = vec![vec![vec![0], vec![1], vec![1]], vec![vec![2], vec![0]]];
        let data = HbnbpData::from_observations(vec![3], docs, vec![2.0, 1.5]).unwrap();
        let config = SamplerConfig {
            mode,
            finite_k: 4,
            initial_components: 4,
            ..SamplerConfig::default()
        };
        let state = HbnbpState::initialize(&data, &config, &mut rng).unwrap();
        (data, config, state, rng)
    }

    #[test]
    fn document_weight_conditional_example() {
        // γ=1, θ=10, b₀=0.5, n=2, r=5: b ~ Beta(5 + 2, 5 + 5) = Beta(7, 10).
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let data =
            HbnbpData::from_observations(vec![1], vec![vec![vec![0], vec![0]]], vec![5.0]).unwrap();
        let config = SamplerConfig {
            mode: SamplerMode::FiniteK,
            finite_k: 4,
            ..SamplerConfig::default()
        };
        let mut state = HbnbpState::initialize(&data, &config, &mut rng).unwrap();
        state.b0 = vec![0.5; 4];
        let reps = 40_000;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        let k = state.z[0][0];
        assert_eq!(state.doc_counts[0][k], 2);
        for _ in 0..reps {
            state.sample_doc_weights(&data, &config, &mut rng);
            let b = state.ln_b[0][k].exp();
            sum += b;
            sum_sq += b * b;
        }
        let mean = sum / reps as f64;
        let var = sum_sq / reps as f64 - mean * mean;
        let (a, c) = (7.0, 10.0);
        let exact_mean = a / (a + c);
        let exact_var = a * c / ((a + c) * (a + c) * (a + c + 1.0));
        assert!((mean - exact_mean).abs() < 4.0 * (exact_var / reps as f64).sqrt());
        assert!((var - exact_var).abs() < 0.05 * exact_var);
    }

    #[test]
    fn lambda_conditional_mean() {
        // E[λ | n, b] = (r + n)·b.
        let (data, config, mut state, mut rng) = small_problem(SamplerMode::FiniteK);
        let (d, k) = (0, state.z[0][0]);
        let n = state.doc_counts[d][k] as f64;
        let b = state.ln_b[d][k].exp();
        let reps = 40_000;
        let mut sum = 0.0;
        for _ in 0..reps {
            state.sample_lambdas(&data, &mut rng);
            sum += state.ln_lambda[d][k].exp();
        }
        let r = data.shapes[d];
        let exact = (r + n) * b;
        let sd = ((r + n) * b * b).sqrt();
        assert!((sum / reps as f64 - exact).abs() < 4.0 * sd / (reps as f64).sqrt());
        let _ = config;
    }

    #[test]
    fn topic_conditional_example() {
        // η = 0.1, counts (2, 0, 1): φ ~ Dir(2.1, 0.1, 1.1).
        let (data, config, mut state, mut rng) = small_problem(SamplerMode::FiniteK);
        let k = 0;
        state.topic_counts[k][0] = vec![2, 0, 1];
        let reps = 40_000;
        let mut mean = [0.0; 3];
        for _ in 0..reps {
            state.sample_topics(&config, &mut rng);
            for (m, lp) in mean.iter_mut().zip(&state.ln_phi[k][0]) {
                *m += lp.exp() / reps as f64;
            }
        }
        let alpha = [2.1, 0.1, 1.1];
        for v in 0..3 {
            let p = alpha[v] / 3.3;
            let var = p * (1.0 - p) / 4.3;
            assert!(
                (mean[v] - p).abs() < 4.0 * (var / reps as f64).sqrt(),
                "v={v}"
            );
        }
        let _ = data;
    }

    #[test]
    fn assignment_conditional_matches_brute_force() {
        for mode in [SamplerMode::FiniteK, SamplerMode::ExactSlice] {
            let (data, config, mut state, mut rng) = small_problem(mode);
            let (d, n) = (0, 1);
            let obs = data.observation(d, n).to_vec();
            if mode == SamplerMode::ExactSlice {
                state.z[d][n] = 0;
                state.u[d][n] = 0.3;
                state.doc_counts = vec![vec![0; 4]; 2];
                for t in &mut state.topic_counts {
                    t[0].fill(0);
                }
                for dd in 0..2 {
                    for nn in 0..data.doc_len(dd) {
                        let z = state.z[dd][nn];
                        state.add_observation(&data, dd, nn, z);
                    }
                }
            }
            // Brute-force conditional of z_dn.
            let active = match mode {
                SamplerMode::FiniteK => 4,
                SamplerMode::ExactSlice => config.active_count(0.3),
            };
            let logs: Vec<f64> = (0..active)
                .map(|k| {
                    let base = state.ln_lambda[d][k] + state.ln_likelihood(&obs, k);
                    if mode == SamplerMode::ExactSlice {
                        base - config.ln_zeta_doc(k)
                    } else {
                        base
                    }
                })
                .collect();
            let norm = log_sum_exp(&logs);
            let reps = 40_000;
            let mut counts = [0usize; 4];
            // Only observation (d, n) may move: freeze the rest by saving them.
            let saved = state.clone();
            for _ in 0..reps {
                let mut s = saved.clone();
                s.sample_assignments(&data, &config, &mut rng);
                counts[s.z[d][n]] += 1;
            }
            for k in 0..active {
                let p = (logs[k] - norm).exp();
                let se = (p * (1.0 - p) / reps as f64).sqrt();
                assert!(
                    (counts[k] as f64 / reps as f64 - p).abs() < 5.0 * se + 1e-3,
                    "{mode:?} k={k}"
                );
            }
            assert!(counts[active..].iter().all(|&c| c == 0));
        }
    }

    #[test]
    fn b0_chain_matches_quadrature() {
        for collapsed in [true, false] {
            for mode in [SamplerMode::FiniteK, SamplerMode::ExactSlice] {
                let (data, mut config, state, mut rng) = small_problem(mode);
                config.collapsed_b0 = collapsed;
                let k = 1;
                let round = state.round_indices().get(k).copied().unwrap_or(0);
                let target = |b: f64| state.ln_b0_target(&data, &config, k, b, round, collapsed);
                // Reference mean on the logit scale, which keeps the integrand smooth.
                let dens = |x: f64| {
                    let b = sigmoid(x);
                    (target(b) + b.ln() + (-b).ln_1p()).exp()
                };
                let z = integrate(dens, -27.0, 27.0, 1e-10).unwrap();
                let mean = integrate(|x| sigmoid(x) * dens(x), -27.0, 27.0, 1e-10).unwrap() / z;
                let second =
                    integrate(|x| sigmoid(x).powi(2) * dens(x), -27.0, 27.0, 1e-10).unwrap() / z;
                let sd = (second - mean * mean).sqrt();
                let iters = 60_000;
                let mut samples = Vec::with_capacity(iters);
                let probe = state.clone();
                let mut s = probe;
                for _ in 0..iters {
                    s.sample_b0(&data, &config, &mut rng);
                    samples.push(s.b0[k]);
                }
                let mc = samples.iter().sum::<f64>() / iters as f64;
                // Batch-means standard error.
                let batches = 60;
                let size = iters / batches;
                let means: Vec<f64> = samples
                    .chunks(size)
                    .map(|c| c.iter().sum::<f64>() / size as f64)
                    .collect();
                let var =
                    means.iter().map(|m| (m - mc).powi(2)).sum::<f64>() / (batches - 1) as f64;
                let se = (var / batches as f64).sqrt();
                assert!(
                    (mc - mean).abs() < 4.0 * se + 1e-3 * sd,
                    "{mode:?} collapsed={collapsed}: {mc} vs {mean} (se {se})"
                );
            }
        }
    }

    #[test]
    fn rounds_keep_length_and_state_consistent() {
        let (data, config, mut state, mut rng) = small_problem(SamplerMode::ExactSlice);
        for _ in 0..50 {
            state.sweep(&data, &config, &mut rng);
            state.check_invariants(&data).unwrap();
        }
        assert_eq!(state.rounds.len(), state.num_components());
        assert!(state.log_joint(&data, &config).is_finite());
    }

    #[test]
    fn round_update_preserves_prior() {
        // With no data, rounds and top-level weights alternate between
        // conditionals of the prior: the number in round 0 stays Poisson(γ₀)
        // (restricted to the instantiated prefix, which rarely binds).
        let data = HbnbpData::from_observations(vec![2], vec![], vec![]).unwrap();
        let config = SamplerConfig {
            initial_components: 30,
            max_components: 30,
            ..SamplerConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut state = HbnbpState::initialize(&data, &config, &mut rng).unwrap();
        let iters = 20_000;
        let mut in_first = Vec::with_capacity(iters);
        for _ in 0..iters {
            state.sample_b0(&data, &config, &mut rng);
            state.sample_rounds(&config, &mut rng);
            in_first.push(state.round_indices().iter().filter(|&&m| m == 0).count() as f64);
        }
        let mean = in_first.iter().sum::<f64>() / iters as f64;
        let batches = 50;
        let size = iters / batches;
        let means: Vec<f64> = in_first
            .chunks(size)
            .map(|c| c.iter().sum::<f64>() / size as f64)
            .collect();
        let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (batches - 1) as f64;
        let se = (var / batches as f64).sqrt();
        assert!((mean - 3.0).abs() < 4.0 * se + 0.02, "{mean} (se {se})");
    }
}
