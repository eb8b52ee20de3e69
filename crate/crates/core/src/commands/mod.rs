//! Implementations of the command-line subcommands. Each command writes its
//! outputs and a `manifest.json` describing the run.

pub mod manifest;
pub mod settings;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use log::{info, warn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{
    fit_growth_law, phi_3bnbp, phi_bnbp, phi_vs_xi_constant_3bnbp, power_law_prefactor,
    simulate_growth, summarize, xi_3bnbp, xi_bnbp, GrowthAxis, GrowthConfig, GrowthModel,
};
use crate::corpus::{make_toy_bars, read_vocab_size, Corpus, ToyBarsSpec};
use crate::error::{Error, Result};
use crate::hbnbp::predictive::ESTIMATOR_DESCRIPTION;
use crate::hbnbp::store::{self, ModelInfo, ModelWriter};
use crate::hbnbp::{
    classify as classify_documents, Classification, ConfusionMatrix, GroupModel, Sampler,
};
use crate::special::ln_gamma;
use manifest::ManifestBuilder;

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })?;
    Ok(BufWriter::new(f))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticsOptions {
    pub mass: f64,
    pub concentration: f64,
    pub discounts: Vec<f64>,
    pub r_min: f64,
    pub r_max: f64,
    pub points: usize,
    pub replicates: usize,
    pub epsilon: f64,
    pub seed: u64,
    pub out_dir: PathBuf,
}

impl Default for AsymptoticsOptions {
    fn default() -> Self {
        Self {
            mass: 3.0,
            concentration: 3.0,
            discounts: vec![0.0, 0.5],
            r_min: 1.0,
            r_max: 1001.0,
            points: 51,
            replicates: 10,
            epsilon: crate::crm::DEFAULT_EPSILON,
            seed: 0,
            out_dir: PathBuf::from("asymptotics"),
        }
    }
}

/// Evenly spaced grid from `lo` to `hi` inclusive.
pub fn even_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..points)
            .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
            .collect(),
    }
}

/// Fitted growth law next to its theoretical target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRow {
    pub discount: f64,
    pub axis: GrowthAxis,
    pub model: GrowthModel,
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
    pub target_slope: f64,
    /// Prefactor with the exponent fixed at its theoretical value
    /// (power-law fits only).
    pub fitted_prefactor: Option<f64>,
    /// Theoretical prefactor of the power law (power-law fits only).
    pub target_prefactor: Option<f64>,
}

fn validate_asymptotics(opts: &AsymptoticsOptions) -> Result<()> {
    let usage = |m: String| Err(Error::Usage(m));
    if !(opts.mass > 0.0) {
        return usage(format!("mass must be positive, got {}", opts.mass));
    }
    for &a in &opts.discounts {
        if !(0.0..1.0).contains(&a) {
            return usage(format!("discount must lie in [0, 1), got {a}"));
        }
        if !(opts.concentration > -a) {
            return usage(format!(
                "concentration must exceed -discount, got {} with discount {a}",
                opts.concentration
            ));
        }
    }
    if !(opts.r_min > 0.0 && opts.r_max >= opts.r_min) {
        return usage(format!(
            "need 0 < r_min <= r_max, got {} and {}",
            opts.r_min, opts.r_max
        ));
    }
    if opts.points == 0 || opts.replicates == 0 {
        return usage("points and replicates must be at least 1".into());
    }
    if !(opts.epsilon > 0.0 && opts.epsilon < 0.5) {
        return usage(format!(
            "epsilon must lie in (0, 0.5), got {}",
            opts.epsilon
        ));
    }
    Ok(())
}

/// Runs the growth experiment for every discount and writes, per discount,
/// the (r, N, K) triples, mean K_j tables and per-r summaries with exact
/// expectations; `fits.csv` holds fitted growth laws beside their targets.
pub fn simulate_asymptotics(opts: &AsymptoticsOptions) -> Result<Vec<FitRow>> {
    validate_asymptotics(opts)?;
    std::fs::create_dir_all(&opts.out_dir)?;
    let mut manifest = ManifestBuilder::new("simulate-asymptotics", opts, opts.seed)?;
    let grid = even_grid(opts.r_min, opts.r_max, opts.points);
    let mut fits = Vec::new();
    for &discount in &opts.discounts {
        let config = GrowthConfig {
            mass: opts.mass,
            concentration: opts.concentration,
            discount,
            epsilon: opts.epsilon,
            replicates: opts.replicates,
            seed: opts.seed,
            ..GrowthConfig::default()
        };
        info!(
            "simulating discount {discount} over {} grid points",
            grid.len()
        );
        let run = simulate_growth(&grid, &config)?;
        for w in &run.warnings {
            manifest.note("warning", w.clone());
        }
        let tag = format!("discount_{discount}");
        let triples = opts.out_dir.join(format!("triples_{tag}.csv"));
        run.write_triples_csv(create(&triples)?)?;
        manifest.output(&triples);
        let sizes = opts.out_dir.join(format!("size_counts_{tag}.csv"));
        run.write_size_counts_csv(create(&sizes)?)?;
        manifest.output(&sizes);

        let points = summarize(&run);
        let summary = opts.out_dir.join(format!("summary_{tag}.csv"));
        let mut out = create(&summary)?;
        writeln!(out, "r,mean_N,se_N,mean_K,se_K,expected_N,expected_K")?;
        for p in &points {
            let (xi, phi) = if discount == 0.0 {
                (
                    xi_bnbp(p.r, opts.mass, opts.concentration),
                    phi_bnbp(p.r, opts.mass, opts.concentration),
                )
            } else {
                (
                    xi_3bnbp(p.r, opts.mass, opts.concentration, discount),
                    phi_3bnbp(p.r, opts.mass, opts.concentration, discount),
                )
            };
            let show = |v: Result<crate::asymptotics::Asymptotic>| {
                v.map(|a| a.exact).unwrap_or(f64::INFINITY)
            };
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                p.r,
                p.mean_n,
                p.se_n,
                p.mean_k,
                p.se_k,
                show(xi),
                show(phi)
            )?;
        }
        out.flush()?;
        manifest.output(&summary);

        if points.len() >= 2 {
            let (t, g) = (opts.concentration, opts.mass);
            for axis in [GrowthAxis::R, GrowthAxis::N] {
                let (model, target_slope, target_prefactor) = if discount == 0.0 {
                    (GrowthModel::LogLinear, g * t, None)
                } else {
                    let pref = match axis {
                        GrowthAxis::R => {
                            g / discount * (ln_gamma(t + 1.0) - ln_gamma(t + discount)).exp()
                        }
                        GrowthAxis::N => phi_vs_xi_constant_3bnbp(g, t, discount),
                    };
                    (GrowthModel::PowerLaw, discount, Some(pref))
                };
                let fit = fit_growth_law(&points, model, axis)?;
                let fitted_prefactor = match model {
                    GrowthModel::PowerLaw => Some(power_law_prefactor(&points, discount, axis)?),
                    GrowthModel::LogLinear => None,
                };
                fits.push(FitRow {
                    discount,
                    axis,
                    model,
                    slope: fit.slope,
                    intercept: fit.intercept,
                    residual: fit.residual,
                    target_slope,
                    fitted_prefactor,
                    target_prefactor,
                });
            }
        }
    }
    let fits_path = opts.out_dir.join("fits.csv");
    let mut out = create(&fits_path)?;
    writeln!(out, "discount,axis,model,slope,target_slope,intercept,fitted_prefactor,target_prefactor,residual")?;
    for f in &fits {
        let show = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let (fitted, target) = (show(f.fitted_prefactor), show(f.target_prefactor));
        let axis = match f.axis {
            GrowthAxis::R => "r",
            GrowthAxis::N => "N",
        };
        let model = match f.model {
            GrowthModel::LogLinear => "log-linear",
            GrowthModel::PowerLaw => "power-law",
        };
        writeln!(
            out,
            "{},{axis},{model},{},{},{},{fitted},{target},{}",
            f.discount, f.slope, f.target_slope, f.intercept, f.residual
        )?;
    }
    out.flush()?;
    manifest.output(&fits_path);
    manifest.write(&opts.out_dir)?;
    Ok(fits)
}

pub fn read_corpus(path: &Path, vocab: Option<&Path>) -> Result<Corpus> {
    let size = vocab.map(read_vocab_size).transpose()?;
    Corpus::read_path(path, size)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainOptions {
    pub corpus: PathBuf,
    pub vocab: Option<PathBuf>,
    /// Settings from the config file followed by command-line overrides.
    pub settings: Vec<(String, String)>,
    /// Train only on documents carrying this group label.
    pub group: Option<String>,
    pub out_dir: PathBuf,
    /// Continue from the checkpoint in `out_dir`.
    pub resume: bool,
    pub checkpoint_every: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub iterations: usize,
    pub retained: usize,
    pub final_components: usize,
    pub final_used_components: usize,
    pub acceptance_rate: f64,
}

/// Trains a model and writes samples, trace, checkpoint and manifest.
pub fn train(opts: &TrainOptions) -> Result<TrainSummary> {
    let (mut sampler, info) = if opts.resume {
        let mut sampler = store::read_checkpoint(&opts.out_dir)?;
        let mut info = store::read_model_info(&opts.out_dir)?;
        for (k, v) in &opts.settings {
            if k != "iterations" {
                return Err(Error::Usage(format!(
                    "only iterations may change on resume, got {k}"
                )));
            }
            sampler.config.iterations = v
                .parse()
                .map_err(|_| Error::Usage(format!("iterations: bad value {v:?}")))?;
        }
        let missing =
            store::truncate_for_resume(&opts.out_dir, sampler.iteration, &sampler.config)?;
        if missing > 0 {
            warn!("{missing} samples retained under the new schedule predate the checkpoint and were not stored");
        }
        info.config.iterations = sampler.config.iterations;
        (sampler, info)
    } else {
        let config = settings::sampler_config(&opts.settings)?;
        let mut corpus = read_corpus(&opts.corpus, opts.vocab.as_deref())?;
        if let Some(g) = &opts.group {
            corpus = corpus.filter_group(g);
        }
        if corpus.documents.is_empty() {
            return Err(Error::data(
                "no training documents (check the group filter)",
            ));
        }
        let lengths: f64 = corpus.documents.iter().map(|d| d.len() as f64).sum();
        let info = ModelInfo {
            config: config.clone(),
            vocab_sizes: corpus.vocab_sizes.clone(),
            group: opts.group.clone(),
            num_documents: corpus.documents.len(),
            mean_document_length: lengths / corpus.documents.len() as f64,
        };
        (Sampler::new(&corpus, config)?, info)
    };
    let mut manifest = ManifestBuilder::new("train", &sampler.config, sampler.config.seed)?;
    manifest.note("burn_in", sampler.config.burn_in().to_string());
    manifest.note("thin", sampler.config.thin.to_string());
    let mut writer = ModelWriter::create(&opts.out_dir, &info, opts.resume)?;
    let every = opts.checkpoint_every.max(1);
    let mut retained = 0;
    sampler.run(|s, row, sample| {
        writer.write_trace(&row)?;
        if let Some(p) = sample {
            writer.write_sample(&p)?;
            retained += 1;
        }
        if s.iteration % every == 0 {
            writer.checkpoint(s)?;
        }
        if s.iteration % 100 == 0 {
            info!(
                "iteration {}: K = {}, used = {}",
                s.iteration, row.num_components, row.used_components
            );
        }
        Ok(())
    })?;
    writer.checkpoint(&sampler)?;
    writer.finish()?;
    for f in [
        store::MODEL_FILE,
        store::SAMPLES_FILE,
        store::TRACE_FILE,
        store::CHECKPOINT_FILE,
    ] {
        manifest.output(opts.out_dir.join(f));
    }
    let summary = TrainSummary {
        iterations: sampler.iteration,
        retained,
        final_components: sampler.state.num_components(),
        final_used_components: sampler.state.used_components(sampler.config.used_threshold),
        acceptance_rate: sampler.acceptance_rate(),
    };
    manifest.note("b0_acceptance_rate", summary.acceptance_rate.to_string());
    manifest.write(&opts.out_dir)?;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    pub models: Vec<PathBuf>,
    pub corpus: PathBuf,
    pub vocab: Option<PathBuf>,
    /// Document-weight draws per posterior sample.
    pub inner_samples: usize,
    /// Use at most this many retained samples per model, evenly spaced.
    pub max_samples: Option<usize>,
    pub seed: u64,
    pub out_dir: PathBuf,
}

/// Keeps at most `max` evenly spaced elements, always including the last.
fn thin_evenly<T: Clone>(items: &[T], max: usize) -> Vec<T> {
    if max == 0 || items.len() <= max {
        return items.to_vec();
    }
    (0..max)
        .map(|i| {
            items[(items.len() - 1) - (max - 1 - i) * (items.len() - 1) / (max - 1).max(1)].clone()
        })
        .collect()
}

/// Scores every test document under every model, writes per-document
/// predictions and the confusion matrix.
pub fn classify(opts: &ClassifyOptions) -> Result<(Vec<Classification>, ConfusionMatrix)> {
    if opts.models.is_empty() {
        return Err(Error::Usage(
            "at least one --model directory is required".into(),
        ));
    }
    if opts.inner_samples == 0 {
        return Err(Error::Usage("inner_samples must be at least 1".into()));
    }
    let mut models: Vec<GroupModel> = opts
        .models
        .iter()
        .map(|d| store::load_group_model(d))
        .collect::<Result<_>>()?;
    if let Some(max) = opts.max_samples {
        for m in &mut models {
            m.samples = thin_evenly(&m.samples, max);
        }
    }
    let corpus = read_corpus(&opts.corpus, opts.vocab.as_deref())?;
    let info = store::read_model_info(&opts.models[0])?;
    if corpus.vocab_sizes.len() != info.vocab_sizes.len()
        || corpus
            .vocab_sizes
            .iter()
            .zip(&info.vocab_sizes)
            .any(|(c, m)| c > m)
    {
        return Err(Error::data(
            "test corpus vocabulary does not fit the trained models",
        ));
    }
    let labels: Vec<String> = models.iter().map(|m| m.label.clone()).collect();
    let results = classify_documents(&models, &corpus, opts.inner_samples, opts.seed)?;
    let matrix = ConfusionMatrix::new(&labels, &results);

    std::fs::create_dir_all(&opts.out_dir)?;
    let mut manifest = ManifestBuilder::new("classify", opts, opts.seed)?;
    manifest.note("estimator", ESTIMATOR_DESCRIPTION);
    let pred_path = opts.out_dir.join("predictions.csv");
    let mut out = create(&pred_path)?;
    let score_cols: Vec<String> = labels.iter().map(|l| format!("loglik_{l}")).collect();
    writeln!(out, "doc_id,true,predicted,{}", score_cols.join(","))?;
    for r in &results {
        let scores: Vec<String> = r.scores.iter().map(|s| s.to_string()).collect();
        writeln!(
            out,
            "{},{},{},{}",
            r.doc_id,
            r.truth.as_deref().unwrap_or(""),
            r.predicted,
            scores.join(",")
        )?;
    }
    out.flush()?;
    manifest.output(&pred_path);
    let conf_path = opts.out_dir.join("confusion.csv");
    let mut out = create(&conf_path)?;
    matrix.write_csv(&mut out)?;
    out.flush()?;
    manifest.output(&conf_path);
    manifest.note("accuracy", matrix.accuracy().to_string());
    manifest.write(&opts.out_dir)?;
    Ok((results, matrix))
}

/// Writes a toy-bars corpus to `out`, with a manifest beside it.
pub fn make_toy_bars_file(spec: ToyBarsSpec, seed: u64, out: &Path) -> Result<Corpus> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let corpus = make_toy_bars(spec, &mut rng)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    let mut w = create(out)?;
    corpus.write(&mut w)?;
    w.flush()?;
    let mut manifest = ManifestBuilder::new("make-toy-bars", &spec, seed)?;
    manifest.output(out);
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    manifest.write_at(Path::new(&name))?;
    Ok(corpus)
}
