//! Exact posterior updates of beta-process priors under Bernoulli and
//! negative binomial process likelihoods.
//!
//! The update arithmetic is generic over the scalar type so that it can be
//! checked with exact rational numbers as well as run on `f64`.

use std::collections::HashMap;
use std::fmt::{self, Debug, Display};
use std::str::FromStr;

use num_traits::{FromPrimitive, Num};
use serde::{Deserialize, Serialize};

use crate::crm::{BpFixedAtom, BpParams, RbpFixedAtom, RbpParams};
use crate::error::{ensure_positive, Error, Result};
use crate::measure::{CountMeasure, Location};

/// Field of scalars the updates are computed in.
pub trait Scalar: Clone + Num + PartialOrd + FromPrimitive + Debug + Display {}

impl<T: Clone + Num + PartialOrd + FromPrimitive + Debug + Display> Scalar for T {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    /// A prior fixed atom that received observations.
    OldRepeated,
    /// A prior fixed atom with no observations.
    OldUnrepeated,
    /// An atom first seen in the data (from the ordinary component).
    New,
}

impl Provenance {
    fn as_str(self) -> &'static str {
        match self {
            Provenance::OldRepeated => "old-repeated",
            Provenance::OldUnrepeated => "old-unrepeated",
            Provenance::New => "new",
        }
    }
}

impl FromStr for Provenance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "old-repeated" => Ok(Provenance::OldRepeated),
            "old-unrepeated" => Ok(Provenance::OldUnrepeated),
            "new" => Ok(Provenance::New),
            _ => Err(Error::data(format!("unknown provenance {s:?}"))),
        }
    }
}

/// Posterior fixed atom. `sigma` is present for reparameterized-beta
/// posteriors (Beta(ρ, σ) law) and absent for beta-process-style ρ values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorAtom<T = f64> {
    pub location: Location,
    pub rho: T,
    pub sigma: Option<T>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorUpdateReport<T = f64> {
    pub concentration: T,
    pub mass: T,
    pub fixed_atoms: Vec<PosteriorAtom<T>>,
}

impl<T: Scalar> PosteriorUpdateReport<T> {
    /// Same parameters, ignoring provenance labels.
    pub fn same_parameters(&self, other: &Self) -> bool {
        self.concentration == other.concentration
            && self.mass == other.mass
            && self.fixed_atoms.len() == other.fixed_atoms.len()
            && self
                .fixed_atoms
                .iter()
                .zip(&other.fixed_atoms)
                .all(|(a, b)| a.location == b.location && a.rho == b.rho && a.sigma == b.sigma)
    }

    /// Reparameterized-beta prior given by explicit (ρ, σ) fixed atoms.
    pub fn rbp_prior(mass: T, concentration: T, atoms: Vec<(Location, T, T)>) -> Self {
        Self {
            concentration,
            mass,
            fixed_atoms: atoms
                .into_iter()
                .map(|(location, rho, sigma)| PosteriorAtom {
                    location,
                    rho,
                    sigma: Some(sigma),
                    provenance: Provenance::OldUnrepeated,
                })
                .collect(),
        }
    }
}

fn count<T: Scalar>(n: u64) -> T {
    T::from_u64(n).expect("count representable in scalar type")
}

/// Totals per location across draws, split into prior fixed atoms and novel
/// locations (in first-seen order).
struct Totals {
    fixed: Vec<u64>,
    novel: Vec<(Location, u64)>,
}

fn tally(fixed_locations: &[Location], draws: &[CountMeasure], binary: bool) -> Result<Totals> {
    let index: HashMap<Location, usize> = fixed_locations
        .iter()
        .enumerate()
        .map(|(i, l)| (*l, i))
        .collect();
    let mut fixed = vec![0u64; fixed_locations.len()];
    let mut novel: Vec<(Location, u64)> = Vec::new();
    let mut novel_index: HashMap<Location, usize> = HashMap::new();
    for (n, draw) in draws.iter().enumerate() {
        for &(loc, c) in draw.atoms() {
            if binary && c > 1 {
                return Err(Error::domain(format!(
                    "draw {n} has count {c} at {loc}; Bernoulli draws must be binary"
                )));
            }
            if let Some(&i) = index.get(&loc) {
                fixed[i] += c;
            } else if let Some(&j) = novel_index.get(&loc) {
                novel[j].1 += c;
            } else {
                novel_index.insert(loc, novel.len());
                novel.push((loc, c));
            }
        }
    }
    if let Some((loc, _)) = novel.iter().find(|(_, c)| *c == 0) {
        return Err(Error::domain(format!(
            "novel location {loc} has zero total count"
        )));
    }
    Ok(Totals { fixed, novel })
}

fn provenance(total: u64) -> Provenance {
    if total > 0 {
        Provenance::OldRepeated
    } else {
        Provenance::OldUnrepeated
    }
}

/// Beta-process prior under N Bernoulli process draws: θ ← θ + N,
/// γ ← γθ/(θ + N); ρ gains Σi/(θ_post γ_post) at old atoms and equals it at
/// new ones.
pub fn bp_update_bernoulli<T: Scalar>(
    prior: &PosteriorUpdateReport<T>,
    draws: &[CountMeasure],
) -> Result<PosteriorUpdateReport<T>> {
    let locations: Vec<Location> = prior.fixed_atoms.iter().map(|a| a.location).collect();
    let totals = tally(&locations, draws, true)?;
    let n: T = count(draws.len() as u64);
    let product = prior.mass.clone() * prior.concentration.clone();
    let concentration = prior.concentration.clone() + n;
    let mass = product.clone() / concentration.clone();
    let mut fixed_atoms: Vec<PosteriorAtom<T>> = prior
        .fixed_atoms
        .iter()
        .zip(&totals.fixed)
        .map(|(a, &s)| PosteriorAtom {
            location: a.location,
            rho: a.rho.clone() + count::<T>(s) / product.clone(),
            sigma: None,
            provenance: provenance(s),
        })
        .collect();
    fixed_atoms.extend(totals.novel.iter().map(|&(location, s)| PosteriorAtom {
        location,
        rho: count::<T>(s) / product.clone(),
        sigma: None,
        provenance: Provenance::New,
    }));
    Ok(PosteriorUpdateReport {
        concentration,
        mass,
        fixed_atoms,
    })
}

/// Reparameterized-beta prior under N Bernoulli draws: old atoms
/// (ρ + Σi, σ + N - Σi); new atoms (Σi, θ + N - Σi).
pub fn rbp_update_bernoulli<T: Scalar>(
    prior: &PosteriorUpdateReport<T>,
    draws: &[CountMeasure],
) -> Result<PosteriorUpdateReport<T>> {
    rbp_update(prior, draws, None)
}

/// Reparameterized-beta prior under N negative binomial draws sharing shape
/// r: θ ← θ + Nr, γ ← γθ/(θ + Nr); old atoms (ρ + Σi, σ + rN); new atoms
/// (Σi, θ + rN).
pub fn rbp_update_negbin<T: Scalar>(
    prior: &PosteriorUpdateReport<T>,
    r: T,
    draws: &[CountMeasure],
) -> Result<PosteriorUpdateReport<T>> {
    if !(r > T::zero()) {
        return Err(Error::param(format!("shape r must be positive, got {r}")));
    }
    rbp_update(prior, draws, Some(r))
}

fn rbp_update<T: Scalar>(
    prior: &PosteriorUpdateReport<T>,
    draws: &[CountMeasure],
    r: Option<T>,
) -> Result<PosteriorUpdateReport<T>> {
    let locations: Vec<Location> = prior.fixed_atoms.iter().map(|a| a.location).collect();
    let totals = tally(&locations, draws, r.is_none())?;
    let n: T = count(draws.len() as u64);
    // Bernoulli: σ gains N - Σi; negative binomial: σ gains rN.
    let trials = match &r {
        Some(r) => r.clone() * n.clone(),
        None => n.clone(),
    };
    let concentration = prior.concentration.clone() + trials.clone();
    let mass = prior.mass.clone() * prior.concentration.clone() / concentration.clone();
    let sigma_gain = |s: u64| -> T {
        match r {
            Some(_) => trials.clone(),
            None => trials.clone() - count::<T>(s),
        }
    };
    let mut fixed_atoms = Vec::with_capacity(prior.fixed_atoms.len() + totals.novel.len());
    for (a, &s) in prior.fixed_atoms.iter().zip(&totals.fixed) {
        let sigma = a.sigma.clone().ok_or_else(|| {
            Error::param(format!("fixed atom {} lacks a sigma parameter", a.location))
        })?;
        fixed_atoms.push(PosteriorAtom {
            location: a.location,
            rho: a.rho.clone() + count::<T>(s),
            sigma: Some(sigma + sigma_gain(s)),
            provenance: provenance(s),
        });
    }
    for &(location, s) in &totals.novel {
        fixed_atoms.push(PosteriorAtom {
            location,
            rho: count::<T>(s),
            sigma: Some(prior.concentration.clone() + sigma_gain(s)),
            provenance: Provenance::New,
        });
    }
    Ok(PosteriorUpdateReport {
        concentration,
        mass,
        fixed_atoms,
    })
}

impl From<&RbpParams> for PosteriorUpdateReport<f64> {
    fn from(p: &RbpParams) -> Self {
        PosteriorUpdateReport::rbp_prior(
            p.mass,
            p.concentration,
            p.fixed_atoms
                .iter()
                .map(|a| (a.location, a.rho, a.sigma))
                .collect(),
        )
    }
}

impl PosteriorUpdateReport<f64> {
    pub fn to_rbp_params(&self) -> Result<RbpParams> {
        let atoms = self
            .fixed_atoms
            .iter()
            .map(|a| {
                let sigma = a.sigma.ok_or_else(|| {
                    Error::param(format!("atom {} has no sigma parameter", a.location))
                })?;
                Ok(RbpFixedAtom {
                    location: a.location,
                    rho: a.rho,
                    sigma,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        RbpParams::new(self.mass, self.concentration, atoms)
    }

    /// Serializes as `key = value` lines.
    pub fn to_key_value(&self) -> String {
        self.to_string()
    }

    pub fn from_key_value(text: &str) -> Result<Self> {
        let mut map = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::data(format!("line {}: expected key = value", i + 1)))?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        let get = |k: &str| {
            map.get(k)
                .ok_or_else(|| Error::data(format!("missing key {k}")))
        };
        let num = |k: &str| -> Result<f64> {
            get(k)?
                .parse()
                .map_err(|_| Error::data(format!("key {k}: not a number")))
        };
        let n: usize = get("atoms")?
            .parse()
            .map_err(|_| Error::data("key atoms: not a count"))?;
        let mut fixed_atoms = Vec::with_capacity(n);
        for i in 0..n {
            let sigma = match map.get(&format!("atom.{i}.sigma")) {
                Some(s) => Some(
                    s.parse()
                        .map_err(|_| Error::data(format!("atom {i}: bad sigma")))?,
                ),
                None => None,
            };
            fixed_atoms.push(PosteriorAtom {
                location: get(&format!("atom.{i}.location"))?.parse()?,
                rho: num(&format!("atom.{i}.rho"))?,
                sigma,
                provenance: get(&format!("atom.{i}.provenance"))?.parse()?,
            });
        }
        Ok(Self {
            concentration: num("concentration")?,
            mass: num("mass")?,
            fixed_atoms,
        })
    }
}

impl<T: Display> Display for PosteriorUpdateReport<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "concentration = {}", self.concentration)?;
        writeln!(f, "mass = {}", self.mass)?;
        writeln!(f, "atoms = {}", self.fixed_atoms.len())?;
        for (i, a) in self.fixed_atoms.iter().enumerate() {
            writeln!(f, "atom.{i}.location = {}", a.location)?;
            writeln!(f, "atom.{i}.rho = {}", a.rho)?;
            if let Some(sigma) = &a.sigma {
                writeln!(f, "atom.{i}.sigma = {sigma}")?;
            }
            writeln!(f, "atom.{i}.provenance = {}", a.provenance.as_str())?;
        }
        Ok(())
    }
}

/// Beta-process posterior under Bernoulli draws (classic beta process only).
pub fn bp_posterior_bernoulli(
    prior: &BpParams,
    draws: &[CountMeasure],
) -> Result<PosteriorUpdateReport> {
    prior.validate()?;
    if prior.discount != 0.0 {
        return Err(Error::param("Bernoulli conjugacy requires a zero discount"));
    }
    if prior.mass == 0.0 {
        return Err(Error::param("Bernoulli conjugacy requires a positive mass"));
    }
    let report = PosteriorUpdateReport {
        concentration: prior.concentration,
        mass: prior.mass,
        fixed_atoms: prior
            .fixed_atoms
            .iter()
            .map(|a: &BpFixedAtom| PosteriorAtom {
                location: a.location,
                rho: a.rho,
                sigma: None,
                provenance: Provenance::OldUnrepeated,
            })
            .collect(),
    };
    bp_update_bernoulli(&report, draws)
}

pub fn rbp_posterior_bernoulli(prior: &RbpParams, draws: &[CountMeasure]) -> Result<RbpParams> {
    prior.validate()?;
    rbp_update_bernoulli(&PosteriorUpdateReport::from(prior), draws)?.to_rbp_params()
}

pub fn rbp_posterior_negbin(
    prior: &RbpParams,
    r: f64,
    draws: &[CountMeasure],
) -> Result<RbpParams> {
    prior.validate()?;
    ensure_positive("r", r)?;
    rbp_update_negbin(&PosteriorUpdateReport::from(prior), r, draws)?.to_rbp_params()
}

/// Negative binomial update from draws that each carry their own shape; all
/// shapes must be equal.
pub fn rbp_posterior_negbin_shaped(
    prior: &RbpParams,
    draws: &[(f64, CountMeasure)],
) -> Result<RbpParams> {
    let Some(&(r, _)) = draws.first() else {
        return Ok(prior.clone());
    };
    if let Some((other, _)) = draws.iter().find(|(s, _)| *s != r) {
        return Err(Error::param(format!(
            "negative binomial draws must share one shape; found {r} and {other}"
        )));
    }
    let counts: Vec<CountMeasure> = draws.iter().map(|(_, c)| c.clone()).collect();
    rbp_posterior_negbin(prior, r, &counts)
}
