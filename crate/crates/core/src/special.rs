//! Special functions and low-level random variate helpers.
//!
//! Everything here works in log space where it matters: beta and gamma
//! variates with very small shape parameters underflow to zero in linear
//! space long before their logarithms stop being meaningful.

use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson};
pub use statrs::function::gamma::{digamma, ln_gamma};

pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// `ln(Γ(x + a) / Γ(x + b))`.
pub fn ln_gamma_ratio(x: f64, a: f64, b: f64) -> f64 {
    ln_gamma(x + a) - ln_gamma(x + b)
}

pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

pub fn logit(p: f64) -> f64 {
    p.ln() - (-p).ln_1p()
}

/// Returns `(ln σ(x), ln(1 - σ(x)))` for the logistic function σ.
pub fn ln_sigmoid_pair(x: f64) -> (f64, f64) {
    let ln_p = -softplus(-x);
    let ln_q = -softplus(x);
    (ln_p, ln_q)
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn softplus(x: f64) -> f64 {
    if x > 35.0 {
        x
    } else if x < -35.0 {
        x.exp()
    } else {
        x.exp().ln_1p()
    }
}

pub fn ln_poisson_pmf(k: u64, mean: f64) -> f64 {
    if mean == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    let kf = k as f64;
    kf * mean.ln() - mean - ln_gamma(kf + 1.0)
}

/// `P(X >= c)` for `X ~ Poisson(mean)`.
pub fn poisson_tail(c: u64, mean: f64) -> f64 {
    if c == 0 {
        return 1.0;
    }
    // P(X >= c) = P(c, mean), the regularized lower incomplete gamma function.
    statrs::function::gamma::gamma_lr(c as f64, mean)
}

/// `ln P(X >= c)` for `X ~ Poisson(mean)`, accurate deep in the upper tail.
pub fn ln_poisson_tail(c: u64, mean: f64) -> f64 {
    if c == 0 {
        return 0.0;
    }
    if mean <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if (c as f64) <= mean + 1.0 {
        return poisson_tail(c, mean).ln();
    }
    // Σ_{j>=c} pmf(j) = pmf(c)·(1 + μ/(c+1) + μ²/((c+1)(c+2)) + ...), ratios < 1.
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut j = c;
    loop {
        j += 1;
        term *= mean / j as f64;
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    ln_poisson_pmf(c, mean) + sum.ln()
}

/// Uniform draw on the half-open interval (0, 1].
pub fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

/// Log of a Gamma(shape, 1) variate. Valid for any positive shape.
pub fn ln_gamma_variate<R: Rng + ?Sized>(rng: &mut R, shape: f64) -> f64 {
    debug_assert!(shape > 0.0);
    if shape >= 1.0 {
        let g = Gamma::new(shape, 1.0).expect("positive shape").sample(rng);
        g.ln()
    } else {
        // Gamma(a) = Gamma(a + 1) * U^(1/a)
        let g = Gamma::new(shape + 1.0, 1.0)
            .expect("positive shape")
            .sample(rng);
        g.ln() + open_unit(rng).ln() / shape
    }
}

/// Gamma variate in the shape-rate parameterization.
pub fn gamma_variate<R: Rng + ?Sized>(rng: &mut R, shape: f64, rate: f64) -> f64 {
    (ln_gamma_variate(rng, shape) - rate.ln()).exp()
}

/// Log-space beta variate: returns `(ln b, ln(1 - b))` for `b ~ Beta(a, b)`.
pub fn ln_beta_variate<R: Rng + ?Sized>(rng: &mut R, a: f64, b: f64) -> (f64, f64) {
    let x = ln_gamma_variate(rng, a);
    let y = ln_gamma_variate(rng, b);
    let total = log_add_exp(x, y);
    (x - total, y - total)
}

pub fn beta_variate<R: Rng + ?Sized>(rng: &mut R, a: f64, b: f64) -> f64 {
    let (ln_b, ln_1mb) = ln_beta_variate(rng, a, b);
    if ln_b < ln_1mb {
        ln_b.exp()
    } else {
        -ln_1mb.exp_m1()
    }
}

pub fn poisson_variate<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    if !(mean > 0.0) {
        return 0;
    }
    if mean > 1e15 {
        // Relative spread below 1e-7: the normal approximation is exact to
        // the resolution of f64.
        let z: f64 = rng.sample(rand_distr::StandardNormal);
        return (mean + z * mean.sqrt()).min(u64::MAX as f64) as u64;
    }
    let x: f64 = Poisson::new(mean)
        .expect("finite positive mean")
        .sample(rng);
    x as u64
}

/// Dirichlet variate with the given concentration vector.
pub fn dirichlet_variate<R: Rng + ?Sized>(rng: &mut R, alpha: &[f64]) -> Vec<f64> {
    let logs: Vec<f64> = alpha.iter().map(|&a| ln_gamma_variate(rng, a)).collect();
    let total = log_sum_exp(&logs);
    logs.iter().map(|l| (l - total).exp()).collect()
}

/// Log-space Dirichlet variate: entries are `ln p_i`, finite even when some
/// `p_i` underflow.
pub fn ln_dirichlet_variate<R: Rng + ?Sized>(rng: &mut R, alpha: &[f64]) -> Vec<f64> {
    let logs: Vec<f64> = alpha.iter().map(|&a| ln_gamma_variate(rng, a)).collect();
    let total = log_sum_exp(&logs);
    logs.iter().map(|l| l - total).collect()
}

/// Draws an index with probability proportional to `exp(log_weights[i])`.
pub fn categorical_from_logs<R: Rng + ?Sized>(rng: &mut R, log_weights: &[f64]) -> usize {
    let max = log_weights
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = log_weights.iter().map(|l| (l - max).exp()).collect();
    categorical(rng, &weights)
}

/// Draws an index with probability proportional to `weights[i]` (all >= 0,
/// not all zero).
pub fn categorical<R: Rng + ?Sized>(rng: &mut R, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut target = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if target < *w {
            return i;
        }
        target -= w;
    }
    // Rounding: fall back to the last index with positive weight.
    weights
        .iter()
        .rposition(|w| *w > 0.0)
        .unwrap_or(weights.len() - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn poisson_tail_matches_direct_sum() {
        let mean = 2.5;
        for c in 0..8u64 {
            let direct: f64 = 1.0 - (0..c).map(|k| ln_poisson_pmf(k, mean).exp()).sum::<f64>();
            assert!((poisson_tail(c, mean) - direct).abs() < 1e-12, "c={c}");
        }
    }

    #[test]
    fn ln_poisson_tail_agrees_with_direct_tail() {
        for &mean in &[0.01, 0.7, 3.0, 25.0] {
            for c in 0..60u64 {
                let direct = poisson_tail(c, mean);
                if direct > 1e-250 {
                    let got = ln_poisson_tail(c, mean);
                    assert!(
                        (got - direct.ln()).abs() < 1e-9 * direct.ln().abs().max(1.0),
                        "μ={mean} c={c}"
                    );
                }
            }
        }
        assert!(ln_poisson_tail(400, 0.01).is_finite());
    }

    #[test]
    fn log_sum_exp_handles_neg_infinity() {
        assert_eq!(
            log_sum_exp(&[f64::NEG_INFINITY, f64::NEG_INFINITY]),
            f64::NEG_INFINITY
        );
        assert!((log_sum_exp(&[0.0, 0.0]) - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn sigmoid_pair_is_consistent() {
        for &x in &[-800.0, -30.0, -1.0, 0.0, 2.0, 40.0, 800.0] {
            let (lp, lq) = ln_sigmoid_pair(x);
            assert!(lp <= 0.0 && lq <= 0.0);
            assert!((log_add_exp(lp, lq)).abs() < 1e-12, "x={x}");
            assert!((lp - lq - x).abs() < 1e-9 * x.abs().max(1.0));
        }
    }

    #[test]
    fn tiny_shape_beta_stays_finite_in_log_space() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let (lb, l1mb) = ln_beta_variate(&mut rng, 1e-3, 5.0);
            assert!(lb.is_finite() && l1mb.is_finite());
            assert!(lb <= 0.0 && l1mb <= 0.0);
        }
    }

    #[test]
    fn beta_variate_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 200_000;
        let (a, b) = (2.0, 5.0);
        let mean = (0..n).map(|_| beta_variate(&mut rng, a, b)).sum::<f64>() / n as f64;
        let sd = (a * b / ((a + b) * (a + b) * (a + b + 1.0))).sqrt() / (n as f64).sqrt();
        assert!((mean - a / (a + b)).abs() < 4.0 * sd);
    }
}
