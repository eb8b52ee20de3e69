//! Lévy intensities and the quadrature-tabulated samplers built from them.
//!
//! Every intensity here is infinite near zero, so ordinary components are
//! simulated above a weight floor ε: the number of atoms above ε is Poisson
//! with mean ν[ε, ∞) and each weight is drawn from the restricted, normalized
//! intensity. The restricted intensity is tabulated on cells of a
//! logarithmic coordinate; a cell is chosen by its integrated mass and the
//! weight within it by rejection against a monotone-factor envelope.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Error, Result};
use crate::quadrature::{integrate, DEFAULT_REL_TOL};
use crate::special::ln_gamma;

/// Default weight floor for threshold simulation.
pub const DEFAULT_EPSILON: f64 = 1e-6;

const CELL_WIDTH: f64 = 0.25;
const MIN_CELLS: usize = 8;
/// Largest value of -ln(1 - b) tabulated for unit-interval intensities;
/// beyond it 1 - b is below double precision resolution.
const MAX_NEG_LOG_ONE_MINUS: f64 = 36.0;

/// Lévy density of a homogeneous CRM ordinary component (the base measure
/// is a probability measure, so only the weight part matters).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LevyIntensity {
    /// Beta process with discount: c·b^{-1-α}(1-b)^{θ+α-1} on (0, 1), where
    /// c = γΓ(1+θ)/(Γ(1-α)Γ(θ+α)). α = 0 gives the classic beta process.
    Beta {
        mass: f64,
        concentration: f64,
        discount: f64,
    },
    /// Gamma process: c·g^{-1}e^{-βg} on (0, ∞).
    Gamma { concentration: f64, rate: f64 },
    /// Beta prime process: γθ·w^{-1}(1+w)^{-θ} on (0, ∞).
    BetaPrime { mass: f64, concentration: f64 },
}

impl LevyIntensity {
    pub fn beta(mass: f64, concentration: f64) -> Self {
        LevyIntensity::Beta {
            mass,
            concentration,
            discount: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            LevyIntensity::Beta {
                mass,
                concentration,
                discount,
            } => {
                check_mass(mass)?;
                if !(0.0..1.0).contains(&discount) {
                    return Err(Error::param(format!(
                        "discount must lie in [0, 1), got {discount}"
                    )));
                }
                if !(concentration.is_finite() && concentration > -discount) {
                    return Err(Error::param(format!(
                        "concentration must exceed -discount ({}), got {concentration}",
                        -discount
                    )));
                }
                Ok(())
            }
            LevyIntensity::Gamma {
                concentration,
                rate,
            } => {
                check_mass(concentration)?;
                ensure_positive("rate", rate)
            }
            LevyIntensity::BetaPrime {
                mass,
                concentration,
            } => {
                check_mass(mass)?;
                ensure_positive("concentration", concentration)
            }
        }
    }

    /// True when weights live in (0, 1).
    pub fn unit_support(&self) -> bool {
        matches!(self, LevyIntensity::Beta { .. })
    }

    fn is_null(&self) -> bool {
        match *self {
            LevyIntensity::Beta { mass, .. } | LevyIntensity::BetaPrime { mass, .. } => mass == 0.0,
            LevyIntensity::Gamma { concentration, .. } => concentration == 0.0,
        }
    }

    /// Log of the multiplicative constant of the density.
    fn ln_constant(&self) -> f64 {
        match *self {
            LevyIntensity::Beta {
                mass,
                concentration: t,
                discount: a,
            } => mass.ln() + ln_gamma(1.0 + t) - ln_gamma(1.0 - a) - ln_gamma(t + a),
            LevyIntensity::Gamma { concentration, .. } => concentration.ln(),
            LevyIntensity::BetaPrime {
                mass,
                concentration,
            } => (mass * concentration).ln(),
        }
    }

    /// Log Lévy density ln(ν(dx)/dx).
    pub fn ln_density(&self, x: f64) -> f64 {
        if x <= 0.0 || self.is_null() {
            return f64::NEG_INFINITY;
        }
        let c = self.ln_constant();
        match *self {
            LevyIntensity::Beta {
                concentration: t,
                discount: a,
                ..
            } => {
                if x >= 1.0 {
                    return f64::NEG_INFINITY;
                }
                c - (1.0 + a) * x.ln() + (t + a - 1.0) * (-x).ln_1p()
            }
            LevyIntensity::Gamma { rate, .. } => c - x.ln() - rate * x,
            LevyIntensity::BetaPrime { concentration, .. } => {
                c - x.ln() - concentration * x.ln_1p()
            }
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        self.ln_density(x).exp()
    }

    /// Monotone factorization of the density in a tabulation coordinate:
    /// returns two log-factors, each monotone in `u`, whose sum is the log
    /// density with respect to `du`.
    fn ln_factors(&self, coord: Coord, u: f64) -> (f64, f64) {
        let c = self.ln_constant();
        match (*self, coord) {
            (
                LevyIntensity::Beta {
                    concentration: t,
                    discount: a,
                    ..
                },
                Coord::LogX,
            ) => {
                // x = e^u: ν(x)·x = c·x^{-α}(1-x)^{θ+α-1}
                let ln_1mx = (-u.exp()).ln_1p();
                (c - a * u, (t + a - 1.0) * ln_1mx)
            }
            (
                LevyIntensity::Beta {
                    concentration: t,
                    discount: a,
                    ..
                },
                Coord::NegLogOneMinusX,
            ) => {
                // x = 1 - e^{-u}: ν(x)·e^{-u} = c·x^{-1-α}e^{-(θ+α)u}
                let ln_x = (-(-u).exp_m1()).ln();
                (c - (1.0 + a) * ln_x, -(t + a) * u)
            }
            (LevyIntensity::Gamma { rate, .. }, Coord::LogX) => (c - rate * u.exp(), 0.0),
            (LevyIntensity::BetaPrime { concentration, .. }, Coord::LogX) => {
                (c - concentration * u.exp().ln_1p(), 0.0)
            }
            _ => unreachable!("coordinate not used for this intensity"),
        }
    }

    /// ∫_ε^∞ ν(dx): expected number of atoms with weight above ε.
    pub fn tail_mass(&self, epsilon: f64) -> Result<f64> {
        Ok(IntensityTable::build(*self, epsilon)?.total_mass())
    }

    /// ∫_lo^hi ν(dx) by quadrature in logarithmic coordinates.
    pub fn mass_between(&self, lo: f64, hi: f64) -> Result<f64> {
        if !(lo > 0.0 && hi > lo) {
            return Err(Error::param(format!("need 0 < lo < hi, got [{lo}, {hi}]")));
        }
        if self.is_null() {
            return Ok(0.0);
        }
        let hi = if self.unit_support() { hi.min(1.0) } else { hi };
        if self.unit_support() && lo >= 1.0 {
            return Ok(0.0);
        }
        let mut total = 0.0;
        // Use ln x below 1/2 and -ln(1 - x) above it for unit support.
        let split = if self.unit_support() {
            0.5f64.min(hi).max(lo)
        } else {
            hi
        };
        if split > lo {
            total += integrate(
                |u| self.ln_du(Coord::LogX, u).exp(),
                lo.ln(),
                split.ln(),
                DEFAULT_REL_TOL,
            )?;
        }
        if hi > split {
            let a = -(-split).ln_1p();
            let b = if hi >= 1.0 {
                MAX_NEG_LOG_ONE_MINUS
            } else {
                -(-hi).ln_1p()
            };
            total += integrate(
                |u| self.ln_du(Coord::NegLogOneMinusX, u).exp(),
                a,
                b,
                DEFAULT_REL_TOL,
            )?;
        }
        Ok(total)
    }

    fn ln_du(&self, coord: Coord, u: f64) -> f64 {
        let (f1, f2) = self.ln_factors(coord, u);
        f1 + f2
    }

    /// Expected total weight of the atoms below ε, ∫_0^ε x ν(dx).
    pub fn dropped_mass(&self, epsilon: f64) -> Result<f64> {
        if self.is_null() {
            return Ok(0.0);
        }
        integrate(|x| x * self.density(x), 0.0, epsilon, DEFAULT_REL_TOL)
    }

    /// Expected number of negative binomial counts per unit shape generated
    /// by atoms below ε, ∫_0^ε x/(1-x) ν(dx). Only meaningful for unit
    /// support; for positive support it is the Poisson analogue ∫_0^ε x ν(dx).
    pub fn dropped_counts_per_shape(&self, epsilon: f64) -> Result<f64> {
        if self.is_null() {
            return Ok(0.0);
        }
        if self.unit_support() {
            integrate(
                |x| x / (1.0 - x) * self.density(x),
                0.0,
                epsilon,
                DEFAULT_REL_TOL,
            )
        } else {
            self.dropped_mass(epsilon)
        }
    }
}

fn check_mass(mass: f64) -> Result<()> {
    if mass.is_finite() && mass >= 0.0 {
        Ok(())
    } else {
        Err(Error::param(format!(
            "mass must be finite and >= 0, got {mass}"
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
enum Coord {
    /// x = e^u
    LogX,
    /// x = 1 - e^{-u}
    NegLogOneMinusX,
}

impl Coord {
    fn to_weight(self, u: f64) -> f64 {
        match self {
            Coord::LogX => u.exp(),
            Coord::NegLogOneMinusX => -(-u).exp_m1(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Cell {
    coord: Coord,
    lo: f64,
    hi: f64,
    ln_envelope: f64,
}

/// Accounting of what the weight floor leaves out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationReport {
    pub epsilon: f64,
    /// Expected number of simulated atoms, ν[ε, ∞).
    pub expected_atoms: f64,
    /// Expected total weight of atoms below ε.
    pub dropped_mass: f64,
    /// Expected likelihood-process counts per unit shape from atoms below ε.
    pub dropped_counts_per_shape: f64,
    /// Upper bound on the expected number of atoms beyond the tabulated
    /// upper limit.
    pub upper_tail_atoms: f64,
}

/// Quadrature-tabulated restricted intensity on [ε, upper limit].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntensityTable {
    intensity: LevyIntensity,
    epsilon: f64,
    cells: Vec<Cell>,
    cumulative: Vec<f64>,
    upper_tail_atoms: f64,
}

impl IntensityTable {
    pub fn build(intensity: LevyIntensity, epsilon: f64) -> Result<Self> {
        intensity.validate()?;
        if intensity.unit_support() {
            if !(epsilon > 0.0 && epsilon < 1.0) {
                return Err(Error::param(format!(
                    "weight floor must lie in (0, 1), got {epsilon}"
                )));
            }
        } else {
            ensure_positive("weight floor", epsilon)?;
        }
        let mut table = IntensityTable {
            intensity,
            epsilon,
            cells: Vec::new(),
            cumulative: Vec::new(),
            upper_tail_atoms: 0.0,
        };
        if intensity.is_null() {
            return Ok(table);
        }
        let c = intensity.ln_constant().exp();
        match intensity {
            LevyIntensity::Beta {
                concentration: t,
                discount: a,
                ..
            } => {
                if epsilon < 0.5 {
                    table.add_piece(Coord::LogX, epsilon.ln(), 0.5f64.ln())?;
                }
                let lo = -(-epsilon.max(0.5)).ln_1p();
                let hi = MAX_NEG_LOG_ONE_MINUS.min(lo + 40.0 / (t + a)).max(lo + 1.0);
                table.add_piece(Coord::NegLogOneMinusX, lo, hi)?;
                // Beyond hi: x^{-1-α} <= 2^{1+α} and the rest integrates exactly.
                table.upper_tail_atoms = c * 2f64.powf(1.0 + a) * (-(t + a) * hi).exp() / (t + a);
            }
            LevyIntensity::Gamma { rate, .. } => {
                let top = (40.0 / rate).max(epsilon * 2.0);
                table.add_piece(Coord::LogX, epsilon.ln(), top.ln())?;
                table.upper_tail_atoms = c * (-rate * top).exp() / (rate * top);
            }
            LevyIntensity::BetaPrime {
                mass,
                concentration,
            } => {
                let ln_top = ((mass.ln() + 32.0) / concentration).clamp(epsilon.ln() + 1.0, 700.0);
                table.add_piece(Coord::LogX, epsilon.ln(), ln_top)?;
                // w^{-1}(1+w)^{-θ} <= w^{-1-θ}
                table.upper_tail_atoms = mass * (-concentration * ln_top).exp();
            }
        }
        Ok(table)
    }

    fn add_piece(&mut self, coord: Coord, lo: f64, hi: f64) -> Result<()> {
        let n = (((hi - lo) / CELL_WIDTH).ceil() as usize).max(MIN_CELLS);
        let h = (hi - lo) / n as f64;
        let intensity = self.intensity;
        for i in 0..n {
            let a = lo + h * i as f64;
            let b = if i + 1 == n { hi } else { a + h };
            let mass = integrate(|u| intensity.ln_du(coord, u).exp(), a, b, DEFAULT_REL_TOL)?;
            let (f1a, f2a) = intensity.ln_factors(coord, a);
            let (f1b, f2b) = intensity.ln_factors(coord, b);
            let ln_envelope = f1a.max(f1b) + f2a.max(f2b);
            let prev = self.cumulative.last().copied().unwrap_or(0.0);
            self.cells.push(Cell {
                coord,
                lo: a,
                hi: b,
                ln_envelope,
            });
            self.cumulative.push(prev + mass);
        }
        Ok(())
    }

    pub fn intensity(&self) -> LevyIntensity {
        self.intensity
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// ν[ε, upper limit]: the Poisson rate of the simulated atom count.
    pub fn total_mass(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    pub fn truncation_report(&self) -> Result<TruncationReport> {
        Ok(TruncationReport {
            epsilon: self.epsilon,
            expected_atoms: self.total_mass(),
            dropped_mass: self.intensity.dropped_mass(self.epsilon)?,
            dropped_counts_per_shape: self.intensity.dropped_counts_per_shape(self.epsilon)?,
            upper_tail_atoms: self.upper_tail_atoms,
        })
    }

    /// Draws one weight from the normalized restricted intensity.
    pub fn sample_weight<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let total = self.total_mass();
        debug_assert!(total > 0.0);
        let target = rng.random::<f64>() * total;
        let idx = self
            .cumulative
            .partition_point(|&c| c <= target)
            .min(self.cells.len() - 1);
        let cell = &self.cells[idx];
        loop {
            let u = cell.lo + (cell.hi - cell.lo) * rng.random::<f64>();
            let ln_f = self.intensity.ln_du(cell.coord, u);
            if rng.random::<f64>().ln() < ln_f - cell.ln_envelope {
                let x = cell.coord.to_weight(u);
                if x > 0.0 && (!self.intensity.unit_support() || x < 1.0) {
                    return x;
                }
            }
        }
    }

    /// Draws the ordinary-component weights: a Poisson number of atoms, each
    /// from the restricted intensity.
    pub fn sample_weights<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let n = crate::special::poisson_variate(rng, self.total_mass());
        (0..n).map(|_| self.sample_weight(rng)).collect()
    }
}
