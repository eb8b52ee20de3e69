//! Likelihood processes over discrete base measures: Bernoulli, negative
//! binomial and Poisson, plus negative binomial pmf utilities.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_open_unit, ensure_positive, Error, Result};
use crate::measure::{AtomicMeasure, CountMeasure};
use crate::special::{gamma_variate, ln_gamma, poisson_variate};

/// Negative binomial with shape r and success probability b: mean rb/(1 - b).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NegBinParams {
    pub r: f64,
    pub b: f64,
}

impl NegBinParams {
    pub fn new(r: f64, b: f64) -> Result<Self> {
        ensure_positive("r", r)?;
        ensure_open_unit("b", b)?;
        Ok(Self { r, b })
    }

    pub fn mean(&self) -> f64 {
        self.r * self.b / (1.0 - self.b)
    }

    pub fn ln_pmf(&self, k: u64) -> f64 {
        let kf = k as f64;
        let mut v = ln_gamma(kf + self.r) - ln_gamma(kf + 1.0) - ln_gamma(self.r)
            + self.r * (-self.b).ln_1p();
        if k > 0 {
            v += kf * self.b.ln();
        }
        v
    }
}

/// Log pmf Γ(k + r)/(Γ(k + 1)Γ(r))·(1 - b)^r·b^k.
pub fn negbin_ln_pmf(k: u64, r: f64, b: f64) -> Result<f64> {
    Ok(NegBinParams::new(r, b)?.ln_pmf(k))
}

pub fn negbin_pmf(k: u64, r: f64, b: f64) -> Result<f64> {
    negbin_ln_pmf(k, r, b).map(f64::exp)
}

/// One negative binomial variate through its gamma-Poisson mixture.
pub fn negbin_variate<R: Rng + ?Sized>(rng: &mut R, r: f64, b: f64) -> u64 {
    draw_negbin_augmented_unchecked(r, b, rng).1
}

fn draw_negbin_augmented_unchecked<R: Rng + ?Sized>(r: f64, b: f64, rng: &mut R) -> (f64, u64) {
    // λ ~ Gamma(r, rate (1 - b)/b), i.e. scale b/(1 - b)
    let lambda = gamma_variate(rng, r, (1.0 - b) / b);
    (lambda, poisson_variate(rng, lambda))
}

/// Draws (λ, k) with λ ~ Gamma(r, rate (1 - b)/b) and k | λ ~ Poisson(λ); the
/// marginal of k is NegBin(r, b).
pub fn draw_negbin_augmented<R: Rng + ?Sized>(r: f64, b: f64, rng: &mut R) -> Result<(f64, u64)> {
    NegBinParams::new(r, b)?;
    Ok(draw_negbin_augmented_unchecked(r, b, rng))
}

fn check_unit_weights(base: &AtomicMeasure, allow_one: bool) -> Result<()> {
    for a in base.atoms() {
        let ok = if allow_one {
            a.weight <= 1.0
        } else {
            a.weight < 1.0
        };
        if !ok {
            return Err(Error::param(format!(
                "atom at {} has weight {} outside the unit interval",
                a.location, a.weight
            )));
        }
    }
    Ok(())
}

/// Independent NegBin(r, b_k) counts at every atom; zeros are dropped.
pub fn draw_nbp<R: Rng + ?Sized>(
    r: f64,
    base: &AtomicMeasure,
    rng: &mut R,
) -> Result<CountMeasure> {
    ensure_positive("r", r)?;
    check_unit_weights(base, false)?;
    Ok(CountMeasure::from_sampled(
        base.atoms()
            .iter()
            .map(|a| (a.location, negbin_variate(rng, r, a.weight)))
            .collect(),
    ))
}

/// Independent Bernoulli(b_k) indicators at every atom.
pub fn draw_bernoulli_process<R: Rng + ?Sized>(
    base: &AtomicMeasure,
    rng: &mut R,
) -> Result<CountMeasure> {
    check_unit_weights(base, true)?;
    Ok(CountMeasure::from_sampled(
        base.atoms()
            .iter()
            .map(|a| (a.location, u64::from(rng.random::<f64>() < a.weight)))
            .collect(),
    ))
}

/// Independent Poisson(g_k) counts at every atom.
pub fn draw_plp<R: Rng + ?Sized>(base: &AtomicMeasure, rng: &mut R) -> CountMeasure {
    CountMeasure::from_sampled(
        base.atoms()
            .iter()
            .map(|a| (a.location, poisson_variate(rng, a.weight)))
            .collect(),
    )
}
