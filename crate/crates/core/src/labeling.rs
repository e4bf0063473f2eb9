//! Keyword labeling functions: induction from frequent unigrams (via a
//! valence lexicon or embedding similarity), application over a corpus into a
//! vote matrix, and LF health diagnostics.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{tokenize, Corpus};
use crate::error::{Error, Result};

/// A rule that votes `class_id` whenever `keyword` appears among a
/// document's tokens, and abstains otherwise.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct KeywordLF {
    pub keyword: String,
    #[serde(rename = "class")]
    pub class_id: u32,
    #[serde(default)]
    pub name: String,
}

impl KeywordLF {
    pub fn new(keyword: impl Into<String>, class_id: u32) -> Self {
        let keyword = keyword.into();
        let name = format!("kw:{keyword}");
        KeywordLF {
            keyword,
            class_id,
            name,
        }
    }
}

/// The n x m matrix of LF votes over a corpus: each cell is a class id or
/// `None` for an abstention. Row order follows the corpus, column order the
/// LF list. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct VoteMatrix {
    votes: Vec<Option<u32>>,
    pub lf_names: Vec<String>,
    pub doc_ids: Vec<String>,
    pub num_classes: usize,
}

impl VoteMatrix {
    pub fn new(
        votes: Vec<Option<u32>>,
        lf_names: Vec<String>,
        doc_ids: Vec<String>,
        num_classes: usize,
    ) -> Result<Self> {
        let (n, m) = (doc_ids.len(), lf_names.len());
        if votes.len() != n * m {
            return Err(Error::DimensionMismatch(format!(
                "{} votes for a {n} x {m} matrix",
                votes.len()
            )));
        }
        if let Some(v) = votes.iter().flatten().find(|&&v| v as usize >= num_classes) {
            return Err(Error::InvalidArgument(format!(
                "vote {v} out of range for {num_classes} classes"
            )));
        }
        Ok(VoteMatrix {
            votes,
            lf_names,
            doc_ids,
            num_classes,
        })
    }

    pub fn num_docs(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn num_lfs(&self) -> usize {
        self.lf_names.len()
    }

    pub fn get(&self, doc: usize, lf: usize) -> Option<u32> {
        self.votes[doc * self.num_lfs() + lf]
    }

    pub fn row(&self, doc: usize) -> &[Option<u32>] {
        let m = self.num_lfs();
        &self.votes[doc * m..(doc + 1) * m]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Option<u32>]> {
        self.votes.chunks(self.num_lfs().max(1)).take(self.num_docs())
    }

    /// Keeps the rows at `indices`, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> VoteMatrix {
        let m = self.num_lfs();
        let mut votes = Vec::with_capacity(indices.len() * m);
        let mut doc_ids = Vec::with_capacity(indices.len());
        for &i in indices {
            votes.extend_from_slice(self.row(i));
            doc_ids.push(self.doc_ids[i].clone());
        }
        VoteMatrix {
            votes,
            lf_names: self.lf_names.clone(),
            doc_ids,
            num_classes: self.num_classes,
        }
    }

    /// CSV form: header `doc_id` followed by the LF names; one row per
    /// document with class ids in cells and the empty string for abstains.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
        let mut header = vec!["doc_id".to_string()];
        header.extend(self.lf_names.iter().cloned());
        w.write_record(&header).map_err(|e| csv_error(path, e))?;
        for (i, id) in self.doc_ids.iter().enumerate() {
            let mut record = vec![id.clone()];
            for v in self.row(i) {
                record.push(v.map(|c| c.to_string()).unwrap_or_default());
            }
            w.write_record(&record).map_err(|e| csv_error(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path, num_classes: usize) -> Result<Self> {
        let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
        let header = r.headers().map_err(|e| csv_error(path, e))?.clone();
        if header.is_empty() || &header[0] != "doc_id" {
            return Err(Error::parse(path, 1, "expected `doc_id` header column"));
        }
        let lf_names: Vec<String> = header.iter().skip(1).map(String::from).collect();
        let mut votes = Vec::new();
        let mut doc_ids = Vec::new();
        for (i, record) in r.records().enumerate() {
            let record = record.map_err(|e| csv_error(path, e))?;
            if record.len() != lf_names.len() + 1 {
                return Err(Error::parse(path, i + 2, "wrong number of columns"));
            }
            doc_ids.push(record[0].to_string());
            for cell in record.iter().skip(1) {
                if cell.is_empty() {
                    votes.push(None);
                } else {
                    let v: u32 = cell
                        .parse()
                        .map_err(|_| Error::parse(path, i + 2, format!("bad vote `{cell}`")))?;
                    votes.push(Some(v));
                }
            }
        }
        VoteMatrix::new(votes, lf_names, doc_ids, num_classes)
    }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line: 0,
        msg: e.to_string(),
    }
}

/// Token-to-valence map, e.g. a sentiment lexicon.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    pub entries: HashMap<String, f64>,
}

impl Lexicon {
    /// Loads a TSV of `token<TAB>score` rows. Extra columns after the score
    /// are tolerated so stock lexicon files load unmodified.
    pub fn load_tsv(path: &Path) -> Result<Self> {
        let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut entries = HashMap::new();
        for (i, line) in content.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split('\t');
            let token = parts
                .next()
                .filter(|t| !t.is_empty())
                .ok_or_else(|| Error::parse(path, i + 1, "missing token"))?;
            let score: f64 = parts
                .next()
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::parse(path, i + 1, "missing or non-numeric score"))?;
            if entries.insert(token.to_string(), score).is_some() {
                return Err(Error::parse(path, i + 1, format!("duplicate token `{token}`")));
            }
        }
        Ok(Lexicon { entries })
    }
}

/// Token-to-vector map with one fixed dimension.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    vectors: HashMap<String, Vec<f64>>,
    dimension: usize,
}

impl EmbeddingTable {
    pub fn new(vectors: HashMap<String, Vec<f64>>) -> Result<Self> {
        let mut dimension = 0;
        for (token, v) in &vectors {
            if dimension == 0 {
                dimension = v.len();
            }
            if v.is_empty() || v.len() != dimension {
                return Err(Error::InvalidArgument(format!(
                    "embedding for `{token}` has dimension {}, expected {dimension}",
                    v.len()
                )));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "embedding for `{token}` has a non-finite entry"
                )));
            }
        }
        Ok(EmbeddingTable { vectors, dimension })
    }

    /// Loads a text file of `token v1 v2 ... vd` lines, space-separated.
    pub fn load_text(path: &Path) -> Result<Self> {
        let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut vectors = HashMap::new();
        for (i, line) in content.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let token = parts.next().unwrap().to_string();
            let values: std::result::Result<Vec<f64>, _> = parts.map(str::parse).collect();
            let values =
                values.map_err(|_| Error::parse(path, i + 1, "non-numeric vector entry"))?;
            if values.is_empty() {
                return Err(Error::parse(path, i + 1, "token without vector"));
            }
            vectors.insert(token, values);
        }
        EmbeddingTable::new(vectors)
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.vectors.get(token).map(Vec::as_slice)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// LF health metrics over a vote matrix.
#[derive(Debug, Clone)]
pub struct LFDiagnostics {
    /// Fraction of documents each LF votes on.
    pub coverage: Vec<f64>,
    /// Distinct classes each LF emitted, ascending (length <= 1 for keyword LFs).
    pub polarity: Vec<Vec<u32>>,
    /// Fraction correct among non-abstain votes on gold-labelled documents;
    /// absent without gold or without votes.
    pub accuracy: Vec<Option<f64>>,
    /// Fraction of documents with at least two non-abstain votes.
    pub overlap: f64,
    /// Fraction of documents with two non-abstain votes for different classes.
    pub conflict: f64,
}

/// Returns `(token, document_frequency)` pairs for every non-stopword token
/// whose document frequency reaches the nearest-rank `percentile` of the
/// document-frequency distribution; sorted by frequency descending, ties by
/// token ascending. `percentile` = 0 keeps everything.
pub fn extract_frequent_unigrams(
    corpus: &Corpus,
    percentile: f64,
    stopwords: &HashSet<String>,
) -> Result<Vec<(String, usize)>> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if !(0.0..100.0).contains(&percentile) {
        return Err(Error::InvalidArgument(format!(
            "percentile must be in [0, 100), got {percentile}"
        )));
    }
    let mut df: HashMap<String, usize> = HashMap::new();
    for doc in &corpus.documents {
        let distinct: HashSet<String> = tokenize(&doc.text).into_iter().collect();
        for token in distinct {
            if !stopwords.contains(&token) {
                *df.entry(token).or_insert(0) += 1;
            }
        }
    }
    if df.is_empty() {
        return Ok(Vec::new());
    }
    let mut freqs: Vec<usize> = df.values().copied().collect();
    freqs.sort_unstable();
    let rank = ((percentile / 100.0) * freqs.len() as f64).ceil() as usize;
    let threshold = freqs[rank.clamp(1, freqs.len()) - 1];

    let mut kept: Vec<(String, usize)> = df.into_iter().filter(|(_, f)| *f >= threshold).collect();
    kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(kept)
}

/// Turns candidates into binary LFs by lexicon valence: score at or above
/// `pos_threshold` votes class 1, at or below `neg_threshold` votes class 0,
/// anything else (including tokens absent from the lexicon) is dropped.
pub fn assign_by_lexicon(
    candidates: &[String],
    lexicon: &Lexicon,
    pos_threshold: f64,
    neg_threshold: f64,
) -> Result<Vec<KeywordLF>> {
    if pos_threshold <= neg_threshold {
        return Err(Error::InvalidArgument(format!(
            "pos_threshold {pos_threshold} must exceed neg_threshold {neg_threshold}"
        )));
    }
    let mut lfs = Vec::new();
    for candidate in candidates {
        let Some(&score) = lexicon.entries.get(candidate) else {
            continue;
        };
        if score >= pos_threshold {
            lfs.push(KeywordLF::new(candidate.clone(), 1));
        } else if score <= neg_threshold {
            lfs.push(KeywordLF::new(candidate.clone(), 0));
        }
    }
    Ok(lfs)
}

/// Assigns each candidate to the class whose name-vector is closest in
/// cosine similarity, keeping it only when the best similarity reaches
/// `threshold`. Ties break toward the lowest class index; candidates absent
/// from the table are dropped.
pub fn assign_by_similarity(
    candidates: &[String],
    class_names: &[String],
    table: &EmbeddingTable,
    threshold: f64,
) -> Result<Vec<KeywordLF>> {
    let class_vectors: Vec<&[f64]> = class_names
        .iter()
        .map(|name| {
            table
                .get(name)
                .ok_or_else(|| Error::MissingClassVector(name.clone()))
        })
        .collect::<Result<_>>()?;

    let mut lfs = Vec::new();
    for candidate in candidates {
        let Some(vector) = table.get(candidate) else {
            continue;
        };
        let mut best_class = 0usize;
        let mut best_sim = f64::NEG_INFINITY;
        for (c, class_vec) in class_vectors.iter().enumerate() {
            let sim = cosine(vector, class_vec);
            if sim > best_sim {
                best_sim = sim;
                best_class = c;
            }
        }
        if best_sim >= threshold {
            lfs.push(KeywordLF::new(candidate.clone(), best_class as u32));
        }
    }
    Ok(lfs)
}

/// Applies every LF to every document: cell `(i, j)` is `lfs[j].class_id`
/// when the keyword occurs among the document's tokens, abstain otherwise.
pub fn apply_lfs(lfs: &[KeywordLF], corpus: &Corpus) -> Result<VoteMatrix> {
    let k = corpus.num_classes();
    for lf in lfs {
        if lf.class_id as usize >= k {
            return Err(Error::InvalidArgument(format!(
                "LF `{}` votes class {} but the corpus has {k} classes",
                lf.name, lf.class_id
            )));
        }
        if tokenize(&lf.keyword) != [lf.keyword.clone()] {
            return Err(Error::InvalidArgument(format!(
                "LF keyword `{}` is not a single token",
                lf.keyword
            )));
        }
    }
    let mut votes = Vec::with_capacity(corpus.len() * lfs.len());
    for doc in &corpus.documents {
        let tokens: HashSet<String> = tokenize(&doc.text).into_iter().collect();
        for lf in lfs {
            votes.push(tokens.contains(&lf.keyword).then_some(lf.class_id));
        }
    }
    VoteMatrix::new(
        votes,
        lfs.iter().map(|lf| lf.name.clone()).collect(),
        corpus.doc_ids(),
        k,
    )
}

/// Computes per-LF coverage/polarity/accuracy and the global overlap and
/// conflict fractions. `gold` must have one entry per document when given.
pub fn diagnostics(votes: &VoteMatrix, gold: Option<&[Option<u32>]>) -> Result<LFDiagnostics> {
    let (n, m) = (votes.num_docs(), votes.num_lfs());
    if let Some(gold) = gold {
        if gold.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} gold labels for {n} documents",
                gold.len()
            )));
        }
    }
    let mut covered = vec![0usize; m];
    let mut correct = vec![0usize; m];
    let mut judged = vec![0usize; m];
    let mut classes: Vec<HashSet<u32>> = vec![HashSet::new(); m];
    let mut overlap_rows = 0usize;
    let mut conflict_rows = 0usize;
    for (i, row) in votes.rows().enumerate() {
        let mut non_abstain = 0usize;
        let mut first_class: Option<u32> = None;
        let mut conflicting = false;
        for (j, &vote) in row.iter().enumerate() {
            let Some(class) = vote else { continue };
            non_abstain += 1;
            covered[j] += 1;
            classes[j].insert(class);
            match first_class {
                None => first_class = Some(class),
                Some(c) if c != class => conflicting = true,
                _ => {}
            }
            if let Some(gold) = gold {
                if let Some(g) = gold[i] {
                    judged[j] += 1;
                    if g == class {
                        correct[j] += 1;
                    }
                }
            }
        }
        if non_abstain >= 2 {
            overlap_rows += 1;
        }
        if conflicting {
            conflict_rows += 1;
        }
    }
    let coverage = covered.iter().map(|&c| c as f64 / n as f64).collect();
    let accuracy = judged
        .iter()
        .zip(&correct)
        .map(|(&j, &c)| (j > 0).then(|| c as f64 / j as f64))
        .collect();
    let polarity = classes
        .into_iter()
        .map(|set| {
            let mut v: Vec<u32> = set.into_iter().collect();
            v.sort_unstable();
            v
        })
        .collect();
    Ok(LFDiagnostics {
        coverage,
        polarity,
        accuracy,
        overlap: overlap_rows as f64 / n as f64,
        conflict: conflict_rows as f64 / n as f64,
    })
}

/// Loads an LF set file: a JSON list of `{"keyword", "class", "name"}`
/// objects (`name` defaults to `kw:<keyword>`).
pub fn load_lfs(path: &Path) -> Result<Vec<KeywordLF>> {
    let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lfs: Vec<KeywordLF> =
        serde_json::from_str(&content).map_err(|e| Error::parse(path, 1, e.to_string()))?;
    for lf in &mut lfs {
        if lf.name.is_empty() {
            lf.name = format!("kw:{}", lf.keyword);
        }
    }
    Ok(lfs)
}

pub fn save_lfs(path: &Path, lfs: &[KeywordLF]) -> Result<()> {
    let mut content = serde_json::to_string_pretty(lfs).expect("LF serialization");
    content.push('\n');
    std::fs::write(path, content).map_err(|e| Error::io(path, e))
}

/// Loads a stopword file: one token per line, blank lines ignored.
pub fn load_stopwords(path: &Path) -> Result<HashSet<String>> {
    let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(content
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect())
}

/// Grammatical English stopwords applied before percentile filtering.
/// Deliberately excludes negations ("not", "don't") and gradable words
/// ("well", "top", "like"), which are legitimate sentiment keywords.
pub fn default_stopwords() -> HashSet<String> {
    DEFAULT_STOPWORDS.iter().map(|s| s.to_string()).collect()
}

const DEFAULT_STOPWORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "all", "am", "an", "and", "any", "are", "as", "at",
    "be", "because", "been", "before", "being", "below", "between", "both", "but", "by", "could",
    "did", "do", "does", "doing", "down", "during", "each", "few", "for", "from", "further",
    "had", "has", "have", "having", "he", "her", "here", "hers", "herself", "him", "himself",
    "his", "how", "i", "if", "in", "into", "is", "it", "its", "itself", "just", "me", "more",
    "most", "my", "myself", "nor", "now", "of", "off", "on", "once", "or", "other", "our",
    "ours", "ourselves", "out", "over", "own", "same", "she", "should", "so", "some", "such",
    "than", "that", "the", "their", "theirs", "them", "themselves", "then", "there", "these",
    "they", "this", "those", "through", "to", "under", "until", "up", "was", "we", "were",
    "what", "when", "where", "which", "while", "who", "whom", "why", "will", "with", "would",
    "you", "your", "yours", "yourself", "yourselves",
];
