//! Prior on the round indices of the top-level components.
//!
//! Components are listed in order of their size-biased round. Round `m`
//! holds Poisson(γ₀θ₀/(θ₀ + m)) atoms, each with weight Beta(1, θ₀ + m).
//! Component `k` stores the increment `g_k = m_k - m_{k-1}` (with
//! `m_{-1} = 0`), so a run of zeros means several atoms share a round.

use rand::Rng;

use crate::special::{digamma, ln_poisson_pmf, ln_poisson_tail, open_unit};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundPrior {
    pub gamma0: f64,
    pub theta0: f64,
}

/// Position after a prefix of components: current round and how many of the
/// prefix fell in it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RoundCursor {
    pub round: u64,
    pub in_round: u64,
}

impl RoundCursor {
    pub fn advance(self, g: u64) -> Self {
        if g == 0 {
            Self {
                round: self.round,
                in_round: self.in_round + 1,
            }
        } else {
            Self {
                round: self.round + g,
                in_round: 1,
            }
        }
    }

    /// Cursor after the given increments, starting from the empty prefix.
    pub fn after(increments: &[u64]) -> Self {
        increments
            .iter()
            .fold(Self::default(), |c, &g| c.advance(g))
    }
}

impl RoundPrior {
    /// Expected number of atoms in round `m`.
    pub fn round_mean(&self, m: u64) -> f64 {
        self.gamma0 * self.theta0 / (self.theta0 + m as f64)
    }

    /// Σ_{i=1}^{h} mean(m + i), in closed form via the digamma function.
    fn cumulative_mean(&self, m: u64, h: u64) -> f64 {
        if h == 0 {
            return 0.0;
        }
        let base = self.theta0 + m as f64;
        if h <= 32 {
            return (1..=h).map(|i| self.round_mean(m + i)).sum();
        }
        self.gamma0 * self.theta0 * (digamma(base + h as f64 + 1.0) - digamma(base + 1.0))
    }

    /// ln P(next increment = g | cursor).
    pub fn ln_increment(&self, cursor: RoundCursor, g: u64) -> f64 {
        let mu = self.round_mean(cursor.round);
        let c = cursor.in_round;
        let ln_tail = ln_poisson_tail(c, mu);
        if g == 0 {
            return ln_poisson_tail(c + 1, mu) - ln_tail;
        }
        let last = self.round_mean(cursor.round + g);
        ln_poisson_pmf(c, mu) - ln_tail - self.cumulative_mean(cursor.round, g - 1)
            + (-(-last).exp_m1()).ln()
    }

    /// ln P(increments[from..] | increments[..from]).
    pub fn ln_suffix(&self, increments: &[u64], from: usize) -> f64 {
        let mut cursor = RoundCursor::after(&increments[..from]);
        let mut total = 0.0;
        for &g in &increments[from..] {
            total += self.ln_increment(cursor, g);
            cursor = cursor.advance(g);
        }
        total
    }

    pub fn ln_sequence(&self, increments: &[u64]) -> f64 {
        self.ln_suffix(increments, 0)
    }

    /// Draws the next increment given the cursor.
    pub fn sample_increment<R: Rng + ?Sized>(&self, cursor: RoundCursor, rng: &mut R) -> u64 {
        let p_stay = self.ln_increment(cursor, 0).exp();
        if rng.random::<f64>() < p_stay {
            return 0;
        }
        // First nonempty later round: smallest h with Σ_{i<=h} mean(m+i) >= E.
        let e = -open_unit(rng).ln();
        let mut hi = 1u64;
        while self.cumulative_mean(cursor.round, hi) < e {
            hi = hi.saturating_mul(2);
            if hi == u64::MAX {
                return hi;
            }
        }
        let mut lo = hi / 2;
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if self.cumulative_mean(cursor.round, mid) < e {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::log_sum_exp;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const PRIOR: RoundPrior = RoundPrior {
        gamma0: 3.0,
        theta0: 3.0,
    };

    #[test]
    fn first_component_in_round_zero() {
        let p = PRIOR.ln_increment(RoundCursor::default(), 0).exp();
        assert!((p - (1.0 - (-3.0f64).exp())).abs() < 1e-14);
    }

    #[test]
    fn increments_normalize() {
        for cursor in [
            RoundCursor::default(),
            RoundCursor {
                round: 0,
                in_round: 4,
            },
            RoundCursor {
                round: 7,
                in_round: 1,
            },
            RoundCursor {
                round: 2,
                in_round: 12,
            },
        ] {
            let logs: Vec<f64> = (0..4000).map(|g| PRIOR.ln_increment(cursor, g)).collect();
            let total = log_sum_exp(&logs).exp();
            // γ₀θ₀ = 9 makes the tail beyond 4000 rounds negligible.
            assert!((total - 1.0).abs() < 1e-9, "{cursor:?}: {total}");
        }
    }

    #[test]
    fn closed_form_cumulative_mean() {
        let direct: f64 = (1..=500).map(|i| PRIOR.round_mean(10 + i)).sum();
        assert!((PRIOR.cumulative_mean(10, 500) - direct).abs() < 1e-10);
    }

    #[test]
    fn sampled_increments_match_pmf() {
        let cursor = RoundCursor {
            round: 1,
            in_round: 2,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 200_000;
        let mut counts = [0usize; 6];
        for _ in 0..n {
            let g = PRIOR.sample_increment(cursor, &mut rng) as usize;
            if g < 6 {
                counts[g] += 1;
            }
        }
        for (g, &c) in counts.iter().enumerate() {
            let p = PRIOR.ln_increment(cursor, g as u64).exp();
            let se = (p * (1.0 - p) / n as f64).sqrt();
            assert!((c as f64 / n as f64 - p).abs() < 5.0 * se + 1e-4, "g={g}");
        }
    }

    #[test]
    fn mean_number_in_round_zero() {
        // The number of components with m = 0 is Poisson(γ₀).
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let reps = 20_000;
        let mut total = 0u64;
        for _ in 0..reps {
            let mut cursor = RoundCursor::default();
            loop {
                let g = PRIOR.sample_increment(cursor, &mut rng);
                cursor = cursor.advance(g);
                if cursor.round > 0 {
                    break;
                }
                total += 1;
            }
        }
        let mean = total as f64 / reps as f64;
        assert!(
            (mean - 3.0).abs() < 4.0 * (3.0 / reps as f64).sqrt(),
            "{mean}"
        );
    }
}
