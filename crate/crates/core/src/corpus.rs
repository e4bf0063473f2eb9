//! Text corpora: JSONL loading, tokenization, deterministic splits, and a
//! synthetic-corpus generator used as a test and benchmark fixture.
//!
//! Gold labels are carried alongside documents but exist only for evaluation
//! and for simulated oracles; every training-path operation in this crate
//! works with all golds absent.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A single text item, optionally carrying a gold class label.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub text: String,
    /// Gold class id, absent for unlabelled documents. Serialized as `label`.
    #[serde(rename = "label", default, skip_serializing_if = "Option::is_none")]
    pub gold: Option<u32>,
}

/// An ordered collection of documents over a fixed class set.
///
/// Document order is stable: index `i` identifies the same document across
/// every operation. Immutable after construction.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub documents: Vec<Document>,
    pub class_names: Vec<String>,
}

impl Corpus {
    /// Validates ids (non-empty, unique) and gold labels (`< num_classes`).
    pub fn new(documents: Vec<Document>, class_names: Vec<String>) -> Result<Self> {
        if class_names.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 classes, got {}",
                class_names.len()
            )));
        }
        let k = class_names.len() as u32;
        let mut seen = HashSet::with_capacity(documents.len());
        for doc in &documents {
            if doc.id.is_empty() {
                return Err(Error::InvalidArgument(
                    "document with empty id".to_string(),
                ));
            }
            if !seen.insert(doc.id.as_str()) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate document id `{}`",
                    doc.id
                )));
            }
            if let Some(gold) = doc.gold {
                if gold >= k {
                    return Err(Error::InvalidArgument(format!(
                        "document `{}` has label {} but the corpus has {} classes",
                        doc.id, gold, k
                    )));
                }
            }
        }
        Ok(Corpus {
            documents,
            class_names,
        })
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn doc_ids(&self) -> Vec<String> {
        self.documents.iter().map(|d| d.id.clone()).collect()
    }

    /// Gold labels in document order; `None` where a document is unlabelled.
    pub fn golds(&self) -> Vec<Option<u32>> {
        self.documents.iter().map(|d| d.gold).collect()
    }

    /// Loads a corpus from a JSONL file: one object per line with fields
    /// `id`, `text`, and optional integer `label`.
    pub fn load_jsonl(path: &Path, class_names: Vec<String>) -> Result<Self> {
        if class_names.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 classes, got {}",
                class_names.len()
            )));
        }
        let k = class_names.len() as i64;
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let reader = BufReader::new(file);

        #[derive(Deserialize)]
        struct Record {
            id: String,
            text: String,
            #[serde(default)]
            label: Option<i64>,
        }

        let mut documents = Vec::new();
        let mut seen: HashSet<String> = HashSet::new();
        for (lineno, line) in reader.lines().enumerate() {
            let lineno = lineno + 1;
            let line = line.map_err(|e| Error::io(path, e))?;
            let record: Record = serde_json::from_str(&line)
                .map_err(|e| Error::parse(path, lineno, e.to_string()))?;
            if record.id.is_empty() {
                return Err(Error::parse(path, lineno, "empty document id"));
            }
            if !seen.insert(record.id.clone()) {
                return Err(Error::parse(
                    path,
                    lineno,
                    format!("duplicate document id `{}`", record.id),
                ));
            }
            let gold = match record.label {
                None => None,
                Some(l) if (0..k).contains(&l) => Some(l as u32),
                Some(l) => {
                    return Err(Error::parse(
                        path,
                        lineno,
                        format!("label {} out of range for {} classes", l, k),
                    ))
                }
            };
            documents.push(Document {
                id: record.id,
                text: record.text,
                gold,
            });
        }
        Ok(Corpus {
            documents,
            class_names,
        })
    }

    /// Writes the corpus back out as JSONL. `load_jsonl` of the result
    /// round-trips document text byte-identically.
    pub fn save_jsonl(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        for doc in &self.documents {
            let line = serde_json::to_string(doc).expect("document serialization");
            writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// Deterministic shuffle-split into `(train, test)` with
    /// `|test| = round(n * test_fraction)`. Both halves keep the original
    /// document order.
    pub fn split(&self, test_fraction: f64, seed: u64) -> Result<(Corpus, Corpus)> {
        if !(test_fraction > 0.0 && test_fraction < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "test_fraction must be in (0, 1), got {test_fraction}"
            )));
        }
        if self.documents.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let n = self.documents.len();
        let test_size = (n as f64 * test_fraction).round() as usize;
        let mut order: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        order.shuffle(&mut rng);
        let mut test_idx = order[..test_size].to_vec();
        let mut train_idx = order[test_size..].to_vec();
        test_idx.sort_unstable();
        train_idx.sort_unstable();
        let pick = |idx: &[usize]| Corpus {
            documents: idx.iter().map(|&i| self.documents[i].clone()).collect(),
            class_names: self.class_names.clone(),
        };
        Ok((pick(&train_idx), pick(&test_idx)))
    }
}

/// Loads a class-name manifest: a JSON list of strings.
pub fn load_class_names(path: &Path) -> Result<Vec<String>> {
    let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let names: Vec<String> =
        serde_json::from_str(&content).map_err(|e| Error::parse(path, 1, e.to_string()))?;
    Ok(names)
}

pub fn save_class_names(path: &Path, names: &[String]) -> Result<()> {
    let mut content = serde_json::to_string_pretty(names).expect("class-name serialization");
    content.push('\n');
    std::fs::write(path, content).map_err(|e| Error::io(path, e))
}

/// Lowercases and splits on non-alphanumeric boundaries, preserving
/// apostrophes that sit inside a word (`don't` stays one token). Empty
/// tokens are dropped; the result is deterministic and idempotent under
/// re-tokenization of the space-joined output.
pub fn tokenize(text: &str) -> Vec<String> {
    let lower = text.to_lowercase();
    let chars: Vec<char> = lower.chars().collect();
    let mut tokens = Vec::new();
    let mut current = String::new();
    for (i, &c) in chars.iter().enumerate() {
        let keep = c.is_alphanumeric()
            || (c == '\''
                && !current.is_empty()
                && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric()));
        if keep {
            current.push(c);
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Recipe for a synthetic corpus with planted per-class keywords.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthSpec {
    pub num_classes: usize,
    pub docs_per_class: usize,
    /// One keyword pool per class; disjoint from `noise_words`.
    pub keyword_pools: Vec<Vec<String>>,
    /// Shared vocabulary mixed into every document.
    pub noise_words: Vec<String>,
    pub keywords_per_doc: usize,
    pub noise_words_per_doc: usize,
    /// Probability that a drawn keyword comes from a wrong class's pool.
    pub keyword_flip_prob: f64,
    pub seed: u64,
}

impl SynthSpec {
    fn validate(&self) -> Result<()> {
        if self.num_classes < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 classes, got {}",
                self.num_classes
            )));
        }
        if self.keyword_pools.len() != self.num_classes {
            return Err(Error::InvalidArgument(format!(
                "{} keyword pools for {} classes",
                self.keyword_pools.len(),
                self.num_classes
            )));
        }
        if self.keyword_pools.iter().any(|p| p.is_empty()) {
            return Err(Error::InvalidArgument(
                "empty keyword pool".to_string(),
            ));
        }
        if !(0.0..=1.0).contains(&self.keyword_flip_prob) {
            return Err(Error::InvalidArgument(format!(
                "keyword_flip_prob must be in [0, 1], got {}",
                self.keyword_flip_prob
            )));
        }
        if self.noise_words_per_doc > 0 && self.noise_words.is_empty() {
            return Err(Error::InvalidArgument(
                "noise_words_per_doc > 0 but noise_words is empty".to_string(),
            ));
        }
        let noise: HashSet<&str> = self.noise_words.iter().map(String::as_str).collect();
        for pool in &self.keyword_pools {
            if let Some(w) = pool.iter().find(|w| noise.contains(w.as_str())) {
                return Err(Error::InvalidArgument(format!(
                    "keyword `{w}` also appears in noise_words"
                )));
            }
        }
        Ok(())
    }
}

/// Generates a corpus whose documents are bags of sampled keywords plus
/// noise words; each document's gold label is its generating class.
/// Deterministic in `spec.seed`.
pub fn generate_synthetic(spec: &SynthSpec) -> Result<Corpus> {
    spec.validate()?;
    let k = spec.num_classes;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut documents = Vec::with_capacity(k * spec.docs_per_class);
    for class in 0..k {
        for i in 0..spec.docs_per_class {
            let mut words = Vec::with_capacity(spec.keywords_per_doc + spec.noise_words_per_doc);
            for _ in 0..spec.keywords_per_doc {
                let flip = spec.keyword_flip_prob > 0.0 && rng.gen_bool(spec.keyword_flip_prob);
                let pool = if flip {
                    let mut other = rng.gen_range(0..k - 1);
                    if other >= class {
                        other += 1;
                    }
                    other
                } else {
                    class
                };
                words.push(spec.keyword_pools[pool].choose(&mut rng).unwrap().clone());
            }
            for _ in 0..spec.noise_words_per_doc {
                words.push(spec.noise_words.choose(&mut rng).unwrap().clone());
            }
            words.shuffle(&mut rng);
            documents.push(Document {
                id: format!("synth-{class}-{i}"),
                text: words.join(" "),
                gold: Some(class as u32),
            });
        }
    }
    let class_names = (0..k).map(|c| format!("class{c}")).collect();
    Corpus::new(documents, class_names)
}
