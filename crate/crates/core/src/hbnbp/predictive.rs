//! Held-out document likelihood and likelihood-based classification.
//!
//! For each retained posterior sample the document weights are drawn from
//! their prior given b₀ (b_dk ~ Beta(γθb₀ₖ, θ(1 - γb₀ₖ)), λ_dk ~
//! Gamma(r, rate (1-b)/b)); the document's count vector then has
//! probability Pois(N; Λ)·Mult(c | N, p) with Λ = Σ_k λ_k and
//! p_t = Σ_k (λ_k/Λ) F(t | φ_k). The estimate is the log of the average of
//! these probabilities over samples and inner draws.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::chain::PosteriorSample;
use super::config::SamplerConfig;
use super::state::doc_beta_params;
use crate::corpus::{Corpus, Document};
use crate::error::{Error, Result};
use crate::special::{ln_beta_variate, ln_gamma, ln_gamma_variate, log_sum_exp};

/// Describes the estimator in output metadata.
pub const ESTIMATOR_DESCRIPTION: &str = "prior-predictive Monte Carlo: document weights drawn from their prior given \
     posterior top-level weights and topics, Poisson total times multinomial counts, log-mean-exp over samples and \
     inner draws";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LikelihoodEstimate {
    pub log_likelihood: f64,
    /// Delta-method standard error of `log_likelihood`.
    pub std_error: f64,
    pub draws: usize,
}

/// Estimates ln p(doc) under the posterior samples. `shape` is the
/// negative binomial shape r used for the document; `inner` is the number
/// of document-weight draws per sample.
pub fn predictive_loglik<R: Rng + ?Sized>(
    samples: &[PosteriorSample],
    doc: &Document,
    config: &SamplerConfig,
    shape: f64,
    inner: usize,
    rng: &mut R,
) -> Result<LikelihoodEstimate> {
    if doc.is_empty() {
        return Err(Error::domain(format!("document {:?} is empty", doc.id)));
    }
    if samples.is_empty() || inner == 0 {
        return Err(Error::param(
            "need at least one posterior sample and one inner draw",
        ));
    }
    if !(shape > 0.0) {
        return Err(Error::param(format!(
            "document shape must be positive, got {shape}"
        )));
    }
    let n_total = doc.len() as f64;
    let ln_count_factorials: f64 = doc
        .tokens
        .iter()
        .map(|(_, c)| ln_gamma(*c as f64 + 1.0))
        .sum();
    let mut terms = Vec::with_capacity(samples.len() * inner);
    for sample in samples {
        let k = sample.num_components();
        // ln F(t | φ_k) for every distinct token.
        let ln_f: Vec<Vec<f64>> = doc
            .tokens
            .iter()
            .map(|(t, _)| {
                (0..k)
                    .map(|c| {
                        t.iter()
                            .enumerate()
                            .map(|(f, &v)| sample.phi[c][f][v as usize].ln())
                            .sum()
                    })
                    .collect()
            })
            .collect();
        let mut ln_lambda = vec![0.0; k];
        for _ in 0..inner {
            for (c, slot) in ln_lambda.iter_mut().enumerate() {
                let (a, b) = doc_beta_params(config, sample.b0[c]);
                let (ln_b, ln_1mb) = ln_beta_variate(rng, a, b);
                *slot = ln_gamma_variate(rng, shape) + ln_b - ln_1mb;
            }
            let ln_total = log_sum_exp(&ln_lambda);
            let mut term = n_total * ln_total - ln_total.exp() - ln_count_factorials;
            let mut mix = vec![0.0; k];
            for ((_, count), row) in doc.tokens.iter().zip(&ln_f) {
                for c in 0..k {
                    mix[c] = ln_lambda[c] - ln_total + row[c];
                }
                term += *count as f64 * log_sum_exp(&mix);
            }
            terms.push(term);
        }
    }
    Ok(log_mean_exp(&terms))
}

fn log_mean_exp(terms: &[f64]) -> LikelihoodEstimate {
    let n = terms.len() as f64;
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scaled: Vec<f64> = terms.iter().map(|t| (t - max).exp()).collect();
    let mean = scaled.iter().sum::<f64>() / n;
    let std_error = if terms.len() > 1 {
        let var = scaled.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt() / mean
    } else {
        f64::INFINITY
    };
    LikelihoodEstimate {
        log_likelihood: max + mean.ln(),
        std_error,
        draws: terms.len(),
    }
}

/// Trained model of one group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupModel {
    pub label: String,
    pub config: SamplerConfig,
    pub samples: Vec<PosteriorSample>,
    /// Shape r used for test documents scored under this model.
    pub test_shape: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub doc_id: String,
    pub truth: Option<String>,
    pub predicted: String,
    /// Log-likelihood under each model, in model order.
    pub scores: Vec<f64>,
}

/// Labels every document with the model of largest estimated likelihood;
/// ties go to the earliest model. Documents are scored in parallel, each
/// with its own generator stream derived from `seed`.
pub fn classify(
    models: &[GroupModel],
    corpus: &Corpus,
    inner: usize,
    seed: u64,
) -> Result<Vec<Classification>> {
    if models.is_empty() {
        return Err(Error::param("classification needs at least one model"));
    }
    corpus
        .documents
        .par_iter()
        .enumerate()
        .map(|(i, doc)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let scores = models
                .iter()
                .map(|m| {
                    predictive_loglik(&m.samples, doc, &m.config, m.test_shape, inner, &mut rng)
                        .map(|e| e.log_likelihood)
                })
                .collect::<Result<Vec<f64>>>()?;
            let mut best = 0;
            for (j, s) in scores.iter().enumerate() {
                if *s > scores[best] {
                    best = j;
                }
            }
            Ok(Classification {
                doc_id: doc.id.clone(),
                truth: doc.group.clone(),
                predicted: models[best].label.clone(),
                scores,
            })
        })
        .collect()
}

/// Counts of (true label, predicted label). Rows are the model labels
/// followed by any further true labels seen in the test set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub row_labels: Vec<String>,
    pub column_labels: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(model_labels: &[String], results: &[Classification]) -> Self {
        let mut rows: Vec<String> = model_labels.to_vec();
        for r in results {
            if let Some(t) = &r.truth {
                if !rows.contains(t) {
                    rows.push(t.clone());
                }
            }
        }
        let mut counts = vec![vec![0u64; model_labels.len()]; rows.len()];
        for r in results {
            let Some(t) = &r.truth else { continue };
            let row = rows
                .iter()
                .position(|l| l == t)
                .expect("row label registered");
            let col = model_labels
                .iter()
                .position(|l| *l == r.predicted)
                .expect("prediction is a model label");
            counts[row][col] += 1;
        }
        Self {
            row_labels: rows,
            column_labels: model_labels.to_vec(),
            counts,
        }
    }

    /// Fraction of labelled documents classified correctly.
    pub fn accuracy(&self) -> f64 {
        let mut correct = 0;
        let mut total = 0;
        for (i, row) in self.counts.iter().enumerate() {
            total += row.iter().sum::<u64>();
            if let Some(j) = self
                .column_labels
                .iter()
                .position(|l| *l == self.row_labels[i])
            {
                correct += row[j];
            }
        }
        if total == 0 {
            return f64::NAN;
        }
        correct as f64 / total as f64
    }

    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "true\\predicted,{}", self.column_labels.join(","))?;
        for (label, row) in self.row_labels.iter().zip(&self.counts) {
            let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
            writeln!(out, "{label},{}", cells.join(","))?;
        }
        Ok(())
    }
}
