//! Shared statistical helpers for integration and acceptance tests.
#![allow(dead_code)]

use bnbp::hbnbp::forward::{rebuild_counts, resample_observations, sample_joint, ForwardSpec};
use bnbp::hbnbp::{HbnbpData, HbnbpState, SamplerConfig, SamplerMode};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Mean and standard error of independent draws.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

/// Mean and batch-means standard error of a correlated series.
pub fn batch_mean_se(xs: &[f64], batches: usize) -> (f64, f64) {
    let size = xs.len() / batches;
    let means: Vec<f64> = xs
        .chunks_exact(size)
        .map(|c| c.iter().sum::<f64>() / size as f64)
        .collect();
    let (m, se) = mean_se(&means);
    (m, se)
}

/// Statistics tracked by the joint-distribution test.
pub const GEWEKE_STATS: [&str; 6] = [
    "mean_b0",
    "mean_lambda",
    "usage_entropy",
    "mean_b0_sq",
    "mean_lambda_sq",
    "usage_entropy_sq",
];

fn geweke_stats(state: &HbnbpState) -> [f64; 6] {
    let k = state.num_components();
    let mean_b0 = state.b0.iter().sum::<f64>() / k as f64;
    let lambdas: Vec<f64> = state.ln_lambda.iter().flatten().map(|l| l.exp()).collect();
    let mean_lambda = lambdas.iter().sum::<f64>() / lambdas.len() as f64;
    let totals: Vec<f64> = (0..k)
        .map(|c| state.doc_counts.iter().map(|r| r[c] as f64).sum())
        .collect();
    let n: f64 = totals.iter().sum();
    let entropy = -totals
        .iter()
        .filter(|&&t| t > 0.0)
        .map(|t| t / n * (t / n).ln())
        .sum::<f64>();
    [
        mean_b0,
        mean_lambda,
        entropy,
        mean_b0 * mean_b0,
        mean_lambda * mean_lambda,
        entropy * entropy,
    ]
}

pub fn geweke_config(mode: SamplerMode) -> SamplerConfig {
    SamplerConfig {
        mode,
        finite_k: 4,
        initial_components: 4,
        max_components: 4,
        ..SamplerConfig::default()
    }
}

pub fn geweke_spec() -> ForwardSpec {
    ForwardSpec {
        vocab_sizes: vec![5],
        doc_lengths: vec![8, 8],
        shapes: vec![2.0, 2.0],
        components: 4,
        max_attempts: 1_000_000,
    }
}

/// Joint-distribution test: z-scores comparing forward draws of (data,
/// state) with a chain alternating sampler sweeps and data redraws.
pub fn geweke_z_scores(
    config: &SamplerConfig,
    rounds: usize,
    seed: u64,
) -> Vec<(&'static str, f64)> {
    let spec = geweke_spec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let forward: Vec<[f64; 6]> = (0..rounds)
        .map(|_| geweke_stats(&sample_joint(&spec, config, &mut rng).unwrap().1))
        .collect();

    let (mut data, mut state): (HbnbpData, HbnbpState) =
        sample_joint(&spec, config, &mut rng).unwrap();
    let mut chain = Vec::with_capacity(rounds);
    for _ in 0..rounds {
        state.sweep(&data, config, &mut rng);
        data = resample_observations(&state, &data, &mut rng).unwrap();
        rebuild_counts(&mut state, &data);
        chain.push(geweke_stats(&state));
    }
    state.check_invariants(&data).unwrap();

    (0..GEWEKE_STATS.len())
        .map(|i| {
            let f: Vec<f64> = forward.iter().map(|s| s[i]).collect();
            let c: Vec<f64> = chain.iter().map(|s| s[i]).collect();
            let (mf, sef) = mean_se(&f);
            let (mc, sec) = batch_mean_se(&c, 50);
            (GEWEKE_STATS[i], (mf - mc) / (sef * sef + sec * sec).sqrt())
        })
        .collect()
}
