//! Bag-of-words corpora: parsing, writing and the toy-bars generator.
//!
//! File format: optional `#vocab_sizes=V` (or `#vocab_sizes=V1,V2,...` for
//! multi-field tokens) header, then one document per line:
//!
//! ```text
//! doc_id<TAB>group<TAB>word:count word:count ...
//! ```
//!
//! Multi-field tokens join their field values with `|`, e.g. `3|0|7:2`. The
//! group field may be empty.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{categorical, dirichlet_variate};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub group: Option<String>,
    /// (token field values, count) pairs, sorted by token, counts >= 1.
    pub tokens: Vec<(Vec<u32>, u64)>,
}

impl Document {
    pub fn new(
        id: impl Into<String>,
        group: Option<String>,
        tokens: impl IntoIterator<Item = (Vec<u32>, u64)>,
    ) -> Self {
        let mut merged: BTreeMap<Vec<u32>, u64> = BTreeMap::new();
        for (t, c) in tokens {
            if c > 0 {
                *merged.entry(t).or_default() += c;
            }
        }
        Self {
            id: id.into(),
            group,
            tokens: merged.into_iter().collect(),
        }
    }

    /// Number of observations N_d.
    pub fn len(&self) -> usize {
        self.tokens.iter().map(|(_, c)| *c as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Observations in token order, each repeated `count` times.
    pub fn observations(&self) -> Vec<Vec<u32>> {
        self.tokens
            .iter()
            .flat_map(|(t, c)| std::iter::repeat_n(t.clone(), *c as usize))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    /// Vocabulary size of each token field.
    pub vocab_sizes: Vec<usize>,
    pub documents: Vec<Document>,
}

impl Corpus {
    pub fn new(vocab_sizes: Vec<usize>, documents: Vec<Document>) -> Result<Self> {
        let c = Self {
            vocab_sizes,
            documents,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn num_fields(&self) -> usize {
        self.vocab_sizes.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.vocab_sizes.is_empty() || self.vocab_sizes.contains(&0) {
            return Err(Error::data(
                "vocabulary sizes must be nonempty and positive",
            ));
        }
        for doc in &self.documents {
            if doc.is_empty() {
                return Err(Error::data(format!("document {:?} is empty", doc.id)));
            }
            for (t, c) in &doc.tokens {
                if *c == 0 {
                    return Err(Error::data(format!(
                        "document {:?} has a zero count",
                        doc.id
                    )));
                }
                if t.len() != self.vocab_sizes.len() {
                    return Err(Error::data(format!(
                        "document {:?}: token has {} fields, expected {}",
                        doc.id,
                        t.len(),
                        self.vocab_sizes.len()
                    )));
                }
                for (f, (&v, &size)) in t.iter().zip(&self.vocab_sizes).enumerate() {
                    if v as usize >= size {
                        return Err(Error::data(format!(
                            "document {:?}: field {f} value {v} outside vocabulary of size {size}",
                            doc.id
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Distinct group labels in order of first appearance.
    pub fn groups(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for d in &self.documents {
            if let Some(g) = &d.group {
                if !out.contains(g) {
                    out.push(g.clone());
                }
            }
        }
        out
    }

    /// Sub-corpus of the documents carrying `group`.
    pub fn filter_group(&self, group: &str) -> Corpus {
        Corpus {
            vocab_sizes: self.vocab_sizes.clone(),
            documents: self
                .documents
                .iter()
                .filter(|d| d.group.as_deref() == Some(group))
                .cloned()
                .collect(),
        }
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        let sizes: Vec<String> = self.vocab_sizes.iter().map(|v| v.to_string()).collect();
        writeln!(out, "#vocab_sizes={}", sizes.join(","))?;
        for d in &self.documents {
            let tokens: Vec<String> = d
                .tokens
                .iter()
                .map(|(t, c)| {
                    let fields: Vec<String> = t.iter().map(|v| v.to_string()).collect();
                    format!("{}:{c}", fields.join("|"))
                })
                .collect();
            writeln!(
                out,
                "{}\t{}\t{}",
                d.id,
                d.group.as_deref().unwrap_or(""),
                tokens.join(" ")
            )?;
        }
        Ok(())
    }

    /// Reads a corpus. Without a header, a single field is assumed with
    /// vocabulary size one more than the largest id (or `vocab_size` when
    /// given, e.g. from a vocabulary file).
    pub fn read<R: BufRead>(input: R, vocab_size: Option<usize>) -> Result<Self> {
        let mut sizes: Option<Vec<usize>> = None;
        let mut documents = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let lineno = i + 1;
            let line = line?;
            let line = line.trim_end_matches(['\r', '\n']);
            if line.trim().is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(v) = rest.trim().strip_prefix("vocab_sizes=") {
                    let parsed = v
                        .split(',')
                        .map(|s| s.trim().parse::<usize>())
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map_err(|_| {
                            Error::data(format!("line {lineno}: bad vocab_sizes header"))
                        })?;
                    sizes = Some(parsed);
                }
                continue;
            }
            let mut parts = line.splitn(3, '\t');
            let id = parts.next().unwrap_or_default().to_string();
            let group = parts
                .next()
                .ok_or_else(|| Error::data(format!("line {lineno}: missing group field")))?;
            let body = parts
                .next()
                .ok_or_else(|| Error::data(format!("line {lineno}: missing token field")))?;
            let mut tokens = Vec::new();
            for item in body.split_whitespace() {
                let (tok, count) = item.rsplit_once(':').ok_or_else(|| {
                    Error::data(format!("line {lineno}: token {item:?} lacks ':count'"))
                })?;
                let count: u64 = count
                    .parse()
                    .map_err(|_| Error::data(format!("line {lineno}: bad count in {item:?}")))?;
                if count == 0 {
                    return Err(Error::data(format!(
                        "line {lineno}: zero count in {item:?}"
                    )));
                }
                let fields = tok
                    .split('|')
                    .map(|f| f.parse::<u32>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| Error::data(format!("line {lineno}: bad token {tok:?}")))?;
                tokens.push((fields, count));
            }
            let group = if group.is_empty() {
                None
            } else {
                Some(group.to_string())
            };
            documents.push(Document::new(id, group, tokens));
        }
        let sizes = match (sizes, vocab_size) {
            (Some(s), _) => s,
            (None, Some(v)) => vec![v],
            (None, None) => {
                let max = documents
                    .iter()
                    .flat_map(|d| {
                        d.tokens
                            .iter()
                            .map(|(t, _)| t.first().copied().unwrap_or(0))
                    })
                    .max()
                    .ok_or_else(|| Error::data("corpus has no tokens"))?;
                vec![max as usize + 1]
            }
        };
        Corpus::new(sizes, documents)
    }

    pub fn read_path(path: &std::path::Path, vocab_size: Option<usize>) -> Result<Self> {
        let f = std::fs::File::open(path)
            .map_err(|e| Error::data(format!("cannot open corpus {}: {e}", path.display())))?;
        Self::read(std::io::BufReader::new(f), vocab_size)
    }
}

/// Number of lines of a vocabulary file (one token per line).
pub fn read_vocab_size(path: &std::path::Path) -> Result<usize> {
    let text = std::fs::read_to_string(path)?;
    Ok(text.lines().count())
}

/// Toy-bars layout: a 5×5 grid of words whose 5 rows and 5 columns are the
/// ten ground-truth topics, each uniform over its five words.
pub fn toy_bar_topics() -> Vec<Vec<f64>> {
    let mut topics = Vec::with_capacity(10);
    for row in 0..5 {
        let mut t = vec![0.0; 25];
        for col in 0..5 {
            t[row * 5 + col] = 0.2;
        }
        topics.push(t);
    }
    for col in 0..5 {
        let mut t = vec![0.0; 25];
        for row in 0..5 {
            t[row * 5 + col] = 0.2;
        }
        topics.push(t);
    }
    topics
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToyBarsSpec {
    pub documents: usize,
    pub words_per_document: usize,
}

impl Default for ToyBarsSpec {
    fn default() -> Self {
        Self {
            documents: 50,
            words_per_document: 100,
        }
    }
}

/// Generates a toy-bars corpus. Each document draws topic proportions from a
/// flat Dirichlet over the ten bars, then each word's topic from those
/// proportions and the word uniformly within the bar.
pub fn make_toy_bars<R: Rng + ?Sized>(spec: ToyBarsSpec, rng: &mut R) -> Result<Corpus> {
    if spec.documents == 0 || spec.words_per_document == 0 {
        return Err(Error::param(
            "toy bars need at least one document and one word per document",
        ));
    }
    let topics = toy_bar_topics();
    let docs = (0..spec.documents)
        .map(|d| {
            let weights = dirichlet_variate(rng, &[1.0; 10]);
            let mut counts = [0u64; 25];
            for _ in 0..spec.words_per_document {
                let t = categorical(rng, &weights);
                counts[categorical(rng, &topics[t])] += 1;
            }
            let tokens = counts.iter().enumerate().map(|(w, &c)| (vec![w as u32], c));
            Document::new(format!("doc{d}"), None, tokens)
        })
        .collect();
    Corpus::new(vec![25], docs)
}
