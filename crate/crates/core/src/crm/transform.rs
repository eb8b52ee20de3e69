//! Maps between process families: normalization to a Dirichlet process,
//! the odds map from beta to beta prime, and constructions of beta and beta
//! prime processes from independent gamma variables.

use rand::Rng;

use super::params::BpFixedAtom;
use crate::error::{ensure_positive, Error, Result};
use crate::measure::{Atom, AtomicMeasure, Location};
use crate::special::ln_gamma_variate;

/// Divides every weight by the total mass.
pub fn normalize_to_dp(g: &AtomicMeasure) -> Result<AtomicMeasure> {
    let total = g.total_mass();
    if g.is_empty() || !(total > 0.0) || !total.is_finite() {
        return Err(Error::domain(
            "cannot normalize a measure with zero or non-finite total mass",
        ));
    }
    Ok(AtomicMeasure::from_sampled(
        g.atoms()
            .iter()
            .map(|a| Atom {
                location: a.location,
                weight: a.weight / total,
            })
            .collect(),
    ))
}

/// Maps each weight b to its odds b/(1 - b).
pub fn bp_to_beta_prime(b: &AtomicMeasure) -> Result<AtomicMeasure> {
    let atoms = b
        .atoms()
        .iter()
        .map(|a| {
            if a.weight >= 1.0 {
                Err(Error::domain(format!(
                    "weight {} at {} has infinite odds",
                    a.weight, a.location
                )))
            } else {
                Ok(Atom {
                    location: a.location,
                    weight: a.weight / (1.0 - a.weight),
                })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AtomicMeasure::from_sampled(atoms))
}

/// Inverse of [`bp_to_beta_prime`]: w ↦ w/(1 + w).
pub fn beta_prime_to_bp(w: &AtomicMeasure) -> AtomicMeasure {
    AtomicMeasure::from_sampled(
        w.atoms()
            .iter()
            .map(|a| Atom {
                location: a.location,
                weight: a.weight / (1.0 + a.weight),
            })
            .collect(),
    )
}

/// ln τ_k with τ_k ~ Gamma(θ(1 - γρ), rate) at fixed atoms and
/// Gamma(θ, rate) elsewhere.
fn ln_tau<R: Rng + ?Sized>(
    location: &Location,
    concentration: f64,
    mass: f64,
    rate: f64,
    fixed: &[BpFixedAtom],
    rng: &mut R,
) -> Result<f64> {
    let shape = match fixed.iter().find(|f| f.location == *location) {
        Some(f) => concentration * (1.0 - mass * f.rho),
        None => concentration,
    };
    if !(shape > 0.0) {
        return Err(Error::param(format!(
            "fixed atom at {location} gives non-positive gamma shape {shape}"
        )));
    }
    let v = ln_gamma_variate(rng, shape) - rate.ln();
    if !v.is_finite() {
        return Err(Error::numeric("gamma auxiliary underflowed"));
    }
    Ok(v)
}

/// Given a draw from GaP(γθ, rate) (fixed atoms Gamma(θγρ, rate)), returns
/// the beta prime process with weights g_k/τ_k.
pub fn gamma_ratio_to_beta_prime<R: Rng + ?Sized>(
    g: &AtomicMeasure,
    concentration: f64,
    mass: f64,
    rate: f64,
    fixed: &[BpFixedAtom],
    rng: &mut R,
) -> Result<AtomicMeasure> {
    ensure_positive("concentration", concentration)?;
    ensure_positive("rate", rate)?;
    let mut atoms = Vec::with_capacity(g.len());
    for a in g.atoms() {
        let lt = ln_tau(&a.location, concentration, mass, rate, fixed, rng)?;
        atoms.push(Atom {
            location: a.location,
            weight: (a.weight.ln() - lt).exp(),
        });
    }
    Ok(AtomicMeasure::from_sampled(atoms))
}

/// Given a draw from GaP(γθ, rate), returns the beta process with weights
/// g_k/(g_k + τ_k).
pub fn gammas_to_bp<R: Rng + ?Sized>(
    g: &AtomicMeasure,
    concentration: f64,
    mass: f64,
    rate: f64,
    fixed: &[BpFixedAtom],
    rng: &mut R,
) -> Result<AtomicMeasure> {
    ensure_positive("concentration", concentration)?;
    ensure_positive("rate", rate)?;
    let mut atoms = Vec::with_capacity(g.len());
    for a in g.atoms() {
        let lt = ln_tau(&a.location, concentration, mass, rate, fixed, rng)?;
        // g/(g + τ) = 1/(1 + exp(ln τ - ln g))
        let weight = crate::special::sigmoid(a.weight.ln() - lt);
        atoms.push(Atom {
            location: a.location,
            weight,
        });
    }
    Ok(AtomicMeasure::from_sampled(atoms))
}
