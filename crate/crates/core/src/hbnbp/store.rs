//! On-disk layout of a trained model.
//!
//! A model directory holds `model.json` (configuration and corpus summary),
//! `samples.jsonl` (one retained sample per line, topics as sparse rows),
//! `trace.csv` and `checkpoint.json` (full chain state for resumption).

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::chain::{PosteriorSample, Sampler, TraceRow};
use super::config::SamplerConfig;
use super::predictive::GroupModel;
use crate::error::{Error, Result};

pub const MODEL_FILE: &str = "model.json";
pub const SAMPLES_FILE: &str = "samples.jsonl";
pub const TRACE_FILE: &str = "trace.csv";
pub const CHECKPOINT_FILE: &str = "checkpoint.json";

/// Topic probabilities below this are omitted from stored rows.
pub const SPARSE_CUTOFF: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelInfo {
    pub config: SamplerConfig,
    pub vocab_sizes: Vec<usize>,
    /// Group the model was trained on, if the corpus was filtered.
    pub group: Option<String>,
    pub num_documents: usize,
    pub mean_document_length: f64,
}

impl ModelInfo {
    /// Label used when classifying with this model.
    pub fn label(&self, dir: &Path) -> String {
        self.group.clone().unwrap_or_else(|| {
            dir.file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| "model".into())
        })
    }

    /// Document shape for held-out documents: the configured rule applied
    /// to the mean training document length.
    pub fn test_shape(&self) -> Result<f64> {
        self.config
            .shape_for(self.mean_document_length.round().max(1.0) as usize)
    }
}

/// Sparse stored form of a [`PosteriorSample`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct StoredSample {
    iteration: usize,
    #[serde(rename = "K")]
    k: usize,
    b0: Vec<f64>,
    /// `phi[k][f]` = list of (value, probability) entries.
    phi: Vec<Vec<Vec<(u32, f64)>>>,
}

impl StoredSample {
    fn from_sample(s: &PosteriorSample) -> Self {
        let phi = s
            .phi
            .iter()
            .map(|fields| {
                fields
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|(_, &p)| p >= SPARSE_CUTOFF)
                            .map(|(v, &p)| (v as u32, p))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Self {
            iteration: s.iteration,
            k: s.b0.len(),
            b0: s.b0.clone(),
            phi,
        }
    }

    /// Dense form; omitted entries share the missing mass equally.
    fn into_sample(self, vocab_sizes: &[usize]) -> Result<PosteriorSample> {
        if self.k != self.b0.len() || self.k != self.phi.len() {
            return Err(Error::data(format!(
                "stored sample {} has inconsistent K",
                self.iteration
            )));
        }
        let mut phi = Vec::with_capacity(self.k);
        for fields in self.phi {
            if fields.len() != vocab_sizes.len() {
                return Err(Error::data("stored topic has the wrong number of fields"));
            }
            let mut dense_fields = Vec::with_capacity(fields.len());
            for (row, &v) in fields.into_iter().zip(vocab_sizes) {
                let mut dense = vec![f64::NAN; v];
                let mut kept = 0.0;
                for (w, p) in row {
                    let slot = dense.get_mut(w as usize).ok_or_else(|| {
                        Error::data(format!("stored topic entry {w} outside vocabulary"))
                    })?;
                    *slot = p;
                    kept += p;
                }
                let missing = dense.iter().filter(|p| p.is_nan()).count();
                if missing > 0 {
                    let fill = ((1.0 - kept).max(0.0) / missing as f64).max(f64::MIN_POSITIVE);
                    dense
                        .iter_mut()
                        .filter(|p| p.is_nan())
                        .for_each(|p| *p = fill);
                }
                let total: f64 = dense.iter().sum();
                dense.iter_mut().for_each(|p| *p /= total);
                dense_fields.push(dense);
            }
            phi.push(dense_fields);
        }
        Ok(PosteriorSample {
            iteration: self.iteration,
            b0: self.b0,
            phi,
        })
    }
}

/// Writer for a model directory during training.
pub struct ModelWriter {
    dir: PathBuf,
    samples: BufWriter<File>,
    trace: BufWriter<File>,
}

impl ModelWriter {
    /// Creates (or, with `append`, reopens) the model directory files.
    pub fn create(dir: &Path, info: &ModelInfo, append: bool) -> Result<Self> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(MODEL_FILE), serde_json::to_string_pretty(info)?)?;
        let open = |name: &str| -> Result<File> {
            Ok(OpenOptions::new()
                .create(true)
                .write(true)
                .append(append)
                .truncate(!append)
                .open(dir.join(name))?)
        };
        let samples = BufWriter::new(open(SAMPLES_FILE)?);
        let trace_exists = append && dir.join(TRACE_FILE).exists();
        let mut trace = BufWriter::new(open(TRACE_FILE)?);
        if !trace_exists {
            writeln!(trace, "iteration,num_components,used_components,log_joint")?;
        }
        Ok(Self {
            dir: dir.to_path_buf(),
            samples,
            trace,
        })
    }

    pub fn write_trace(&mut self, row: &TraceRow) -> Result<()> {
        writeln!(
            self.trace,
            "{},{},{},{}",
            row.iteration, row.num_components, row.used_components, row.log_joint
        )?;
        Ok(())
    }

    pub fn write_sample(&mut self, sample: &PosteriorSample) -> Result<()> {
        serde_json::to_writer(&mut self.samples, &StoredSample::from_sample(sample))?;
        writeln!(self.samples)?;
        Ok(())
    }

    /// Flushes outputs and writes the chain checkpoint atomically.
    pub fn checkpoint(&mut self, sampler: &Sampler) -> Result<()> {
        self.samples.flush()?;
        self.trace.flush()?;
        let tmp = self.dir.join(format!("{CHECKPOINT_FILE}.tmp"));
        fs::write(&tmp, sampler.checkpoint()?)?;
        fs::rename(tmp, self.dir.join(CHECKPOINT_FILE))?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.samples.flush()?;
        self.trace.flush()?;
        Ok(())
    }
}

/// Prepares a model directory for resumption from the checkpoint taken after
/// sweep `iteration`: drops trace rows and samples newer than it, and stored
/// samples that `config` would not retain (a longer run has a longer
/// burn-in). Returns the number of earlier iterations `config` retains but
/// which are missing from the store.
pub fn truncate_for_resume(dir: &Path, iteration: usize, config: &SamplerConfig) -> Result<usize> {
    let mut stored_iterations = Vec::new();
    let samples_path = dir.join(SAMPLES_FILE);
    if samples_path.exists() {
        let text = fs::read_to_string(&samples_path)?;
        let mut kept = String::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let stored: StoredSample = serde_json::from_str(line)?;
            if stored.iteration <= iteration && config.is_retained(stored.iteration) {
                stored_iterations.push(stored.iteration);
                kept.push_str(line);
                kept.push('\n');
            }
        }
        fs::write(&samples_path, kept)?;
    }
    let trace_path = dir.join(TRACE_FILE);
    if trace_path.exists() {
        let text = fs::read_to_string(&trace_path)?;
        let mut kept = String::new();
        for (i, line) in text.lines().enumerate() {
            let keep = i == 0
                || line
                    .split(',')
                    .next()
                    .and_then(|v| v.parse::<usize>().ok())
                    .is_some_and(|it| it <= iteration);
            if keep {
                kept.push_str(line);
                kept.push('\n');
            }
        }
        fs::write(&trace_path, kept)?;
    }
    let expected = (1..=iteration).filter(|&i| config.is_retained(i)).count();
    Ok(expected.saturating_sub(stored_iterations.len()))
}

pub fn read_model_info(dir: &Path) -> Result<ModelInfo> {
    let path = dir.join(MODEL_FILE);
    let text = fs::read_to_string(&path)
        .map_err(|e| Error::data(format!("cannot read {}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn read_samples(dir: &Path, vocab_sizes: &[usize]) -> Result<Vec<PosteriorSample>> {
    let path = dir.join(SAMPLES_FILE);
    let f = File::open(&path)
        .map_err(|e| Error::data(format!("cannot read {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let stored: StoredSample = serde_json::from_str(&line)
            .map_err(|e| Error::data(format!("{} line {}: {e}", path.display(), i + 1)))?;
        out.push(stored.into_sample(vocab_sizes)?);
    }
    Ok(out)
}

pub fn read_checkpoint(dir: &Path) -> Result<Sampler> {
    let path = dir.join(CHECKPOINT_FILE);
    let text = fs::read_to_string(&path)
        .map_err(|e| Error::data(format!("cannot read {}: {e}", path.display())))?;
    Sampler::restore(&text)
}

/// Loads a model directory for classification.
pub fn load_group_model(dir: &Path) -> Result<GroupModel> {
    let info = read_model_info(dir)?;
    let samples = read_samples(dir, &info.vocab_sizes)?;
    if samples.is_empty() {
        return Err(Error::data(format!(
            "model {} has no retained samples",
            dir.display()
        )));
    }
    Ok(GroupModel {
        label: info.label(dir),
        test_shape: info.test_shape()?,
        config: info.config,
        samples,
    })
}
