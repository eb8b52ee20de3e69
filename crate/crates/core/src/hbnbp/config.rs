//! Sampler configuration.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerMode {
    /// Slice sampler over the infinite representation with round indices.
    ExactSlice,
    /// Fixed number of components with the finite beta approximation.
    FiniteK,
}

/// Negative binomial shape used for each document.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShapeRule {
    /// r_d = N_d(θ₀ - 1)/(θ₀γ₀): the expected count under a single-level
    /// process with the top-level parameters matches the document length.
    Heuristic,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// Top-level mass γ₀.
    pub gamma0: f64,
    /// Top-level concentration θ₀.
    pub theta0: f64,
    /// Document-level mass γ_d (must satisfy γ_d ≤ 1 so that γ_d·b₀ < 1).
    pub gamma_d: f64,
    /// Document-level concentration θ_d.
    pub theta_d: f64,
    /// Symmetric Dirichlet concentration of the topic base measure.
    pub eta: f64,
    pub shape: ShapeRule,
    pub mode: SamplerMode,
    /// Number of components in finite mode.
    pub finite_k: usize,
    /// Per-document slice sequence ζ_{d,k} = zeta_base^{-(k+1)}, k = 0, 1, ...
    pub zeta_base: f64,
    /// Round slice sequence ζ_{0,g} = zeta0_base^{-g}, g = 0, 1, ...
    pub zeta0_base: f64,
    /// Random-walk standard deviation on logit(b₀).
    pub mh_step: f64,
    /// Integrate out the document weights when updating b₀.
    pub collapsed_b0: bool,
    /// Components instantiated at initialization in exact mode.
    pub initial_components: usize,
    /// Hard cap on instantiated components in exact mode.
    pub max_components: usize,
    pub iterations: usize,
    /// Defaults to 20% of `iterations` when absent.
    pub burn_in: Option<usize>,
    pub thin: usize,
    pub seed: u64,
    /// b₀ threshold for counting used components in traces.
    pub used_threshold: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            gamma0: 3.0,
            theta0: 3.0,
            gamma_d: 1.0,
            theta_d: 10.0,
            eta: 0.1,
            shape: ShapeRule::Heuristic,
            mode: SamplerMode::ExactSlice,
            finite_k: 100,
            zeta_base: 1.5,
            zeta0_base: 1.5,
            mh_step: 0.5,
            collapsed_b0: true,
            initial_components: 20,
            max_components: 1000,
            iterations: 1000,
            burn_in: None,
            thin: 1,
            seed: 0,
            used_threshold: 0.01,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("gamma0", self.gamma0)?;
        ensure_positive("theta0", self.theta0)?;
        ensure_positive("gamma_d", self.gamma_d)?;
        ensure_positive("theta_d", self.theta_d)?;
        ensure_positive("eta", self.eta)?;
        ensure_positive("mh_step", self.mh_step)?;
        if self.gamma_d > 1.0 {
            return Err(Error::param(format!(
                "gamma_d must be <= 1 so that document-level beta parameters stay positive, got {}",
                self.gamma_d
            )));
        }
        if !(self.zeta_base > 1.0 && self.zeta0_base > 1.0) {
            return Err(Error::param(
                "slice sequence bases must exceed 1 so that the sequences decrease to 0",
            ));
        }
        match self.shape {
            ShapeRule::Heuristic if self.theta0 <= 1.0 => {
                return Err(Error::param(
                    "the heuristic document shape needs theta0 > 1",
                ));
            }
            ShapeRule::Fixed(r) => ensure_positive("r", r)?,
            _ => {}
        }
        match self.mode {
            SamplerMode::FiniteK => {
                if !(self.finite_k as f64 > self.gamma0) {
                    return Err(Error::param(format!(
                        "finite K = {} must exceed gamma0 = {}",
                        self.finite_k, self.gamma0
                    )));
                }
            }
            SamplerMode::ExactSlice => {
                if self.initial_components == 0 || self.max_components < self.initial_components {
                    return Err(Error::param(
                        "need 1 <= initial_components <= max_components",
                    ));
                }
            }
        }
        if self.thin == 0 {
            return Err(Error::param("thin must be at least 1"));
        }
        if self.burn_in.is_some_and(|b| b >= self.iterations) && self.iterations > 0 {
            return Err(Error::param(
                "burn-in must be smaller than the number of iterations",
            ));
        }
        Ok(())
    }

    pub fn burn_in(&self) -> usize {
        self.burn_in.unwrap_or(self.iterations / 5)
    }

    /// Whether the sample after sweep `iteration` is kept.
    pub fn is_retained(&self, iteration: usize) -> bool {
        iteration > self.burn_in() && (iteration - self.burn_in()).is_multiple_of(self.thin)
    }

    /// Shape r_d for a document of length `n_d`.
    pub fn shape_for(&self, n_d: usize) -> Result<f64> {
        match self.shape {
            ShapeRule::Fixed(r) => Ok(r),
            ShapeRule::Heuristic => heuristic_r(n_d, self.gamma0, self.theta0),
        }
    }

    /// Finite-mode prior Beta(θ₀γ₀/K, θ₀(1 - γ₀/K)) parameters.
    pub fn finite_prior(&self) -> (f64, f64) {
        let k = self.finite_k as f64;
        (
            self.theta0 * self.gamma0 / k,
            self.theta0 * (1.0 - self.gamma0 / k),
        )
    }

    pub fn zeta_doc(&self, k: usize) -> f64 {
        self.zeta_base.powf(-((k + 1) as f64))
    }

    pub fn ln_zeta_doc(&self, k: usize) -> f64 {
        -((k + 1) as f64) * self.zeta_base.ln()
    }

    pub fn ln_zeta_round(&self, g: u64) -> f64 {
        -(g as f64) * self.zeta0_base.ln()
    }

    /// Number of components whose document slice level is at least `u`:
    /// the active indices are 0..count.
    pub fn active_count(&self, u: f64) -> usize {
        if u <= 0.0 {
            return usize::MAX;
        }
        (-u.ln() / self.zeta_base.ln()).floor().max(0.0) as usize
    }
}

/// r_d = N_d(θ₀ - 1)/(θ₀γ₀).
pub fn heuristic_r(n_d: usize, gamma0: f64, theta0: f64) -> Result<f64> {
    if n_d == 0 {
        return Err(Error::domain("documents must be nonempty"));
    }
    ensure_positive("gamma0", gamma0)?;
    if !(theta0 > 1.0) {
        return Err(Error::param(format!(
            "heuristic shape needs theta0 > 1, got {theta0}"
        )));
    }
    Ok(n_d as f64 * (theta0 - 1.0) / (theta0 * gamma0))
}
