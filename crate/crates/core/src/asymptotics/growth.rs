//! Monte-Carlo growth experiments: for each negative binomial shape r, draw
//! a (three-parameter) beta process, mark it with a negative binomial process
//! and record the number of data points N, clusters K and clusters of each
//! size K_j.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{phi_3bnbp, phi_bnbp};
use crate::counts::negbin_variate;
use crate::crm::{IntensityTable, LevyIntensity, TruncationReport, DEFAULT_EPSILON};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthConfig {
    pub mass: f64,
    pub concentration: f64,
    pub discount: f64,
    pub epsilon: f64,
    pub replicates: usize,
    pub seed: u64,
    /// Warn when the bound on expected clusters lost to the weight floor
    /// exceeds this fraction of the expected cluster count.
    pub truncation_tolerance: f64,
}

impl Default for GrowthConfig {
    fn default() -> Self {
        Self {
            mass: 3.0,
            concentration: 3.0,
            discount: 0.0,
            epsilon: DEFAULT_EPSILON,
            replicates: 100,
            seed: 0,
            truncation_tolerance: 0.01,
        }
    }
}

/// One simulated (r, N, K) triple with its cluster-size profile.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrowthTriple {
    pub grid_index: usize,
    pub replicate: usize,
    pub r_bits: u64,
    pub n: u64,
    pub k: u64,
    /// (j, K_j) pairs with K_j > 0, sorted by j.
    pub size_counts: Vec<(u64, u64)>,
}

impl GrowthTriple {
    pub fn r(&self) -> f64 {
        f64::from_bits(self.r_bits)
    }

    /// K = Σ_j K_j and N = Σ_j j·K_j.
    pub fn is_consistent(&self) -> bool {
        let k: u64 = self.size_counts.iter().map(|(_, c)| c).sum();
        let n: u64 = self.size_counts.iter().map(|(j, c)| j * c).sum();
        k == self.k && n == self.n
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrowthRun {
    pub config: GrowthConfig,
    pub r_grid: Vec<f64>,
    pub triples: Vec<GrowthTriple>,
    pub truncation: TruncationReport,
    pub warnings: Vec<String>,
}

/// Per-r averages over replicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthPointSummary {
    pub r: f64,
    pub replicates: usize,
    pub mean_n: f64,
    pub se_n: f64,
    pub mean_k: f64,
    pub se_k: f64,
    /// (j, mean K_j) for every j observed at this r.
    pub mean_size_counts: Vec<(u64, f64)>,
}

fn validate(r_grid: &[f64], config: &GrowthConfig) -> Result<()> {
    if let Some(r) = r_grid.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
        return Err(Error::param(format!(
            "grid values of r must be positive, got {r}"
        )));
    }
    if config.replicates == 0 {
        return Err(Error::param("replicates must be at least 1"));
    }
    Ok(())
}

/// Runs the growth experiment. Grid points are simulated in parallel, each
/// from its own stream of a ChaCha generator seeded with `config.seed`, so
/// the output does not depend on scheduling.
pub fn simulate_growth(r_grid: &[f64], config: &GrowthConfig) -> Result<GrowthRun> {
    validate(r_grid, config)?;
    let intensity = LevyIntensity::Beta {
        mass: config.mass,
        concentration: config.concentration,
        discount: config.discount,
    };
    let table = IntensityTable::build(intensity, config.epsilon)?;
    let truncation = table.truncation_report()?;

    let mut warnings = Vec::new();
    if config.mass > 0.0 {
        for &r in r_grid {
            let expected_k = if config.discount > 0.0 {
                phi_3bnbp(r, config.mass, config.concentration, config.discount)?.exact
            } else {
                phi_bnbp(r, config.mass, config.concentration)?.exact
            };
            // 1 - (1-b)^r <= r·b/(1-b), so this bounds the lost clusters.
            let lost = r * truncation.dropped_counts_per_shape;
            if lost > config.truncation_tolerance * expected_k {
                let msg = format!(
                    "r = {r}: up to {lost:.4} expected clusters lost below weight floor {} ({:.3}% of {expected_k:.3})",
                    config.epsilon,
                    100.0 * lost / expected_k
                );
                log::warn!("{msg}");
                warnings.push(msg);
            }
        }
    }

    let per_point: Vec<Vec<GrowthTriple>> = r_grid
        .par_iter()
        .enumerate()
        .map(|(idx, &r)| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(idx as u64);
            (0..config.replicates)
                .map(|rep| {
                    let mut sizes: BTreeMap<u64, u64> = BTreeMap::new();
                    let (mut n, mut k) = (0u64, 0u64);
                    for b in table.sample_weights(&mut rng) {
                        let c = negbin_variate(&mut rng, r, b);
                        if c > 0 {
                            n += c;
                            k += 1;
                            *sizes.entry(c).or_default() += 1;
                        }
                    }
                    GrowthTriple {
                        grid_index: idx,
                        replicate: rep,
                        r_bits: r.to_bits(),
                        n,
                        k,
                        size_counts: sizes.into_iter().collect(),
                    }
                })
                .collect()
        })
        .collect();

    Ok(GrowthRun {
        config: config.clone(),
        r_grid: r_grid.to_vec(),
        triples: per_point.into_iter().flatten().collect(),
        truncation,
        warnings,
    })
}

fn mean_se(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    if n < 2.0 {
        return (mean, f64::NAN);
    }
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Averages the triples of each grid point.
pub fn summarize(run: &GrowthRun) -> Vec<GrowthPointSummary> {
    run.r_grid
        .iter()
        .enumerate()
        .map(|(idx, &r)| {
            let pts: Vec<&GrowthTriple> =
                run.triples.iter().filter(|t| t.grid_index == idx).collect();
            let (mean_n, se_n) = mean_se(pts.iter().map(|t| t.n as f64));
            let (mean_k, se_k) = mean_se(pts.iter().map(|t| t.k as f64));
            let mut sizes: BTreeMap<u64, u64> = BTreeMap::new();
            for t in &pts {
                for &(j, c) in &t.size_counts {
                    *sizes.entry(j).or_default() += c;
                }
            }
            let reps = pts.len();
            GrowthPointSummary {
                r,
                replicates: reps,
                mean_n,
                se_n,
                mean_k,
                se_k,
                mean_size_counts: sizes
                    .into_iter()
                    .map(|(j, c)| (j, c as f64 / reps as f64))
                    .collect(),
            }
        })
        .collect()
}

impl GrowthRun {
    /// One `r,N,K` row per replicate.
    pub fn write_triples_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "r,N,K")?;
        for t in &self.triples {
            writeln!(out, "{},{},{}", t.r(), t.n, t.k)?;
        }
        Ok(())
    }

    /// Mean number of clusters of each size, one `r,j,K_j` row per observed
    /// (r, j).
    pub fn write_size_counts_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "r,j,K_j")?;
        for s in summarize(self) {
            for (j, kj) in &s.mean_size_counts {
                writeln!(out, "{},{},{}", s.r, j, kj)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GrowthModel {
    /// K = intercept + slope·ln x
    LogLinear,
    /// ln K = intercept + slope·ln x
    PowerLaw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GrowthAxis {
    R,
    N,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthLawFit {
    pub model: GrowthModel,
    pub axis: GrowthAxis,
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual on the fitted (transformed) scale.
    pub residual: f64,
}

impl fmt::Display for GrowthLawFit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let model = match self.model {
            GrowthModel::LogLinear => "log-linear",
            GrowthModel::PowerLaw => "power-law",
        };
        let axis = match self.axis {
            GrowthAxis::R => "r",
            GrowthAxis::N => "N",
        };
        writeln!(f, "model = {model}")?;
        writeln!(f, "axis = {axis}")?;
        writeln!(f, "slope = {}", self.slope)?;
        writeln!(f, "intercept = {}", self.intercept)?;
        writeln!(f, "residual = {}", self.residual)
    }
}

/// Ordinary least squares y = intercept + slope·x; returns
/// (slope, intercept, RMS residual).
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::domain(
            "need at least two (x, y) pairs of equal length",
        ));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::domain("all x values are equal; slope undefined"));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    Ok((slope, intercept, (rss / n).sqrt()))
}

/// Fits a growth law to per-r mean cluster counts against ln r or ln(mean N).
pub fn fit_growth_law(
    points: &[GrowthPointSummary],
    model: GrowthModel,
    axis: GrowthAxis,
) -> Result<GrowthLawFit> {
    let mut xs = Vec::with_capacity(points.len());
    let mut ys = Vec::with_capacity(points.len());
    for p in points {
        let x = match axis {
            GrowthAxis::R => p.r,
            GrowthAxis::N => p.mean_n,
        };
        if !(x > 0.0) {
            return Err(Error::domain(format!(
                "cannot take the log of axis value {x}"
            )));
        }
        let y = match model {
            GrowthModel::LogLinear => p.mean_k,
            GrowthModel::PowerLaw => {
                if !(p.mean_k > 0.0) {
                    return Err(Error::domain(format!(
                        "power-law fit needs positive mean K, got {}",
                        p.mean_k
                    )));
                }
                p.mean_k.ln()
            }
        };
        xs.push(x.ln());
        ys.push(y);
    }
    let (slope, intercept, residual) = fit_line(&xs, &ys)?;
    Ok(GrowthLawFit {
        model,
        axis,
        slope,
        intercept,
        residual,
    })
}

/// Prefactor C of K ≈ C·x^exponent with the exponent held fixed: the
/// geometric mean of K/x^exponent over the points.
pub fn power_law_prefactor(
    points: &[GrowthPointSummary],
    exponent: f64,
    axis: GrowthAxis,
) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::domain(
            "need at least one point to estimate a prefactor",
        ));
    }
    let mut total = 0.0;
    for p in points {
        let x = match axis {
            GrowthAxis::R => p.r,
            GrowthAxis::N => p.mean_n,
        };
        if !(x > 0.0 && p.mean_k > 0.0) {
            return Err(Error::domain(format!(
                "prefactor needs positive axis value and mean K, got {x} and {}",
                p.mean_k
            )));
        }
        total += p.mean_k.ln() - exponent * x.ln();
    }
    Ok((total / points.len() as f64).exp())
}
