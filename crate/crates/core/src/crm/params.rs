//! Parameter sets for the beta, reparameterized beta and gamma processes.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Error, Result};
use crate::measure::Location;

/// Continuous part of the base measure.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub enum BaseMeasure {
    /// Uniform on [0, 1]; used for simulation.
    #[default]
    Uniform,
    /// Symmetric Dirichlet over a vocabulary; used for topic models.
    Dirichlet {
        dimension: usize,
        concentration: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BpFixedAtom {
    pub location: Location,
    pub rho: f64,
}

/// Beta process (α = 0) or three-parameter beta process (α ∈ (0, 1)).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BpParams {
    pub mass: f64,
    pub concentration: f64,
    pub discount: f64,
    pub fixed_atoms: Vec<BpFixedAtom>,
    pub base: BaseMeasure,
}

impl BpParams {
    pub fn new(mass: f64, concentration: f64) -> Result<Self> {
        let p = Self {
            mass,
            concentration,
            discount: 0.0,
            fixed_atoms: Vec::new(),
            base: BaseMeasure::Uniform,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn three_parameter(mass: f64, concentration: f64, discount: f64) -> Result<Self> {
        let p = Self {
            mass,
            concentration,
            discount,
            fixed_atoms: Vec::new(),
            base: BaseMeasure::Uniform,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_fixed_atoms(mut self, atoms: Vec<BpFixedAtom>) -> Result<Self> {
        self.fixed_atoms = atoms;
        self.validate()?;
        Ok(self)
    }

    /// Beta parameters of a fixed atom's weight: Beta(θγρ - α, θ(1 - γρ) + α).
    pub fn fixed_atom_beta(&self, rho: f64) -> (f64, f64) {
        let (g, t, a) = (self.mass, self.concentration, self.discount);
        (t * g * rho - a, t * (1.0 - g * rho) + a)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass.is_finite() && self.mass >= 0.0) {
            return Err(Error::param(format!(
                "mass must be finite and >= 0, got {}",
                self.mass
            )));
        }
        if !(0.0..1.0).contains(&self.discount) {
            return Err(Error::param(format!(
                "discount must lie in [0, 1), got {}",
                self.discount
            )));
        }
        ensure_positive("concentration", self.concentration)?;
        check_distinct(self.fixed_atoms.iter().map(|a| a.location))?;
        for atom in &self.fixed_atoms {
            let gr = self.mass * atom.rho;
            if !(atom.rho > 0.0 && gr > 0.0 && gr < 1.0) {
                return Err(Error::param(format!(
                    "fixed atom {} needs rho > 0 and mass*rho in (0, 1), got rho = {}",
                    atom.location, atom.rho
                )));
            }
            let (a, b) = self.fixed_atom_beta(atom.rho);
            if !(a > 0.0 && b > 0.0) {
                return Err(Error::param(format!(
                    "fixed atom {} has degenerate beta law Beta({a}, {b})",
                    atom.location
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RbpFixedAtom {
    pub location: Location,
    pub rho: f64,
    pub sigma: f64,
}

/// Reparameterized beta process: ordinary component as in the beta process,
/// fixed atoms with free Beta(ρ, σ) weight laws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RbpParams {
    pub mass: f64,
    pub concentration: f64,
    pub fixed_atoms: Vec<RbpFixedAtom>,
    pub base: BaseMeasure,
}

impl RbpParams {
    pub fn new(mass: f64, concentration: f64, fixed_atoms: Vec<RbpFixedAtom>) -> Result<Self> {
        let p = Self {
            mass,
            concentration,
            fixed_atoms,
            base: BaseMeasure::Uniform,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass.is_finite() && self.mass >= 0.0) {
            return Err(Error::param(format!(
                "mass must be finite and >= 0, got {}",
                self.mass
            )));
        }
        ensure_positive("concentration", self.concentration)?;
        check_distinct(self.fixed_atoms.iter().map(|a| a.location))?;
        for atom in &self.fixed_atoms {
            if !(atom.rho > 0.0
                && atom.sigma > 0.0
                && atom.rho.is_finite()
                && atom.sigma.is_finite())
            {
                return Err(Error::param(format!(
                    "fixed atom {} needs rho, sigma > 0, got ({}, {})",
                    atom.location, atom.rho, atom.sigma
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapFixedAtom {
    pub location: Location,
    pub rho: f64,
}

/// Gamma process with concentration c and rate β; fixed atoms ~ Gamma(cρ, β).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapParams {
    pub concentration: f64,
    pub rate: f64,
    pub fixed_atoms: Vec<GapFixedAtom>,
    pub base: BaseMeasure,
}

impl GapParams {
    pub fn new(concentration: f64, rate: f64) -> Result<Self> {
        let p = Self {
            concentration,
            rate,
            fixed_atoms: Vec::new(),
            base: BaseMeasure::Uniform,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_fixed_atoms(mut self, atoms: Vec<GapFixedAtom>) -> Result<Self> {
        self.fixed_atoms = atoms;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.concentration.is_finite() && self.concentration >= 0.0) {
            return Err(Error::param(format!(
                "concentration must be finite and >= 0, got {}",
                self.concentration
            )));
        }
        ensure_positive("rate", self.rate)?;
        check_distinct(self.fixed_atoms.iter().map(|a| a.location))?;
        for atom in &self.fixed_atoms {
            if !(atom.rho > 0.0 && self.concentration * atom.rho > 0.0) {
                return Err(Error::param(format!(
                    "fixed atom {} needs concentration*rho > 0, got rho = {}",
                    atom.location, atom.rho
                )));
            }
        }
        Ok(())
    }
}

fn check_distinct(locations: impl Iterator<Item = Location>) -> Result<()> {
    let mut seen = std::collections::HashSet::new();
    for loc in locations {
        if !seen.insert(loc) {
            return Err(Error::param(format!("duplicate fixed atom location {loc}")));
        }
    }
    Ok(())
}
