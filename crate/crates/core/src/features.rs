//! Tokenization, vocabularies, sparse bag-of-words vectors and lexicon
//! weights.

use std::collections::hash_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, BufReader, Read};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::Polarity;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("min_count must be at least 1")]
    InvalidMinCount,
    #[error("vocabulary is empty")]
    EmptyVocabulary,
    #[error("duplicate vocabulary token '{0}'")]
    DuplicateToken(String),
    #[error("lexicon line {line}: {message}")]
    MalformedLexicon { line: usize, message: String },
    #[error("lexicon line {line}: '{word}' listed as both positive and negative")]
    ConflictingPolarity { line: usize, word: String },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

/// Lowercases, splits on whitespace, and trims non-alphanumeric characters
/// from both ends of every token. Empty tokens are dropped.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split_whitespace()
        .map(|t| t.trim_matches(|c: char| !c.is_alphanumeric()))
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

/// A frozen token ↔ index bijection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    /// Builds a vocabulary from an explicit token list, indexed in order.
    pub fn from_tokens<I, S>(tokens: I) -> Result<Vocabulary, FeatureError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut vocab = Vocabulary { tokens: Vec::new(), index: HashMap::new() };
        for token in tokens {
            let token = token.into();
            match vocab.index.entry(token.clone()) {
                Entry::Occupied(_) => return Err(FeatureError::DuplicateToken(token)),
                Entry::Vacant(slot) => {
                    slot.insert(vocab.tokens.len());
                    vocab.tokens.push(token);
                }
            }
        }
        Ok(vocab)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token(&self, index: usize) -> Option<&str> {
        self.tokens.get(index).map(String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Hex SHA-256 over the newline-joined token list; identifies the
    /// feature space a weight vector belongs to.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        for token in &self.tokens {
            hasher.update(token.as_bytes());
            hasher.update(b"\n");
        }
        hex::encode(hasher.finalize())
    }
}

/// Keeps tokens seen at least `min_count` times, indexed in order of first
/// occurrence.
pub fn build_vocab<I, D>(docs: I, min_count: usize) -> Result<Vocabulary, FeatureError>
where
    I: IntoIterator<Item = D>,
    D: AsRef<[String]>,
{
    if min_count == 0 {
        return Err(FeatureError::InvalidMinCount);
    }
    let mut order: Vec<String> = Vec::new();
    let mut counts: HashMap<String, usize> = HashMap::new();
    for doc in docs {
        for token in doc.as_ref() {
            match counts.get_mut(token) {
                Some(c) => *c += 1,
                None => {
                    counts.insert(token.clone(), 1);
                    order.push(token.clone());
                }
            }
        }
    }
    let kept = order.into_iter().filter(|t| counts[t] >= min_count);
    let vocab = Vocabulary::from_tokens(kept)?;
    if vocab.is_empty() {
        return Err(FeatureError::EmptyVocabulary);
    }
    Ok(vocab)
}

/// Sparse token counts, sorted by index.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BowVector {
    entries: Vec<(usize, u32)>,
}

impl BowVector {
    /// From `(index, count)` pairs; repeated indices are summed and zero
    /// counts dropped.
    pub fn from_counts<I: IntoIterator<Item = (usize, u32)>>(pairs: I) -> BowVector {
        let mut map: BTreeMap<usize, u32> = BTreeMap::new();
        for (i, c) in pairs {
            *map.entry(i).or_default() += c;
        }
        BowVector { entries: map.into_iter().filter(|&(_, c)| c > 0).collect() }
    }

    pub fn entries(&self) -> &[(usize, u32)] {
        &self.entries
    }

    pub fn get(&self, index: usize) -> u32 {
        self.entries
            .binary_search_by_key(&index, |&(i, _)| i)
            .map(|pos| self.entries[pos].1)
            .unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total token count.
    pub fn l1(&self) -> u64 {
        self.entries.iter().map(|&(_, c)| c as u64).sum()
    }

    pub fn add(&self, other: &BowVector) -> BowVector {
        BowVector::from_counts(self.entries.iter().chain(other.entries.iter()).copied())
    }

    pub fn sum<'a, I: IntoIterator<Item = &'a BowVector>>(vectors: I) -> BowVector {
        BowVector::from_counts(vectors.into_iter().flat_map(|v| v.entries.iter().copied()))
    }
}

/// Counts of in-vocabulary tokens; out-of-vocabulary tokens are dropped.
pub fn vectorize<S: AsRef<str>>(tokens: &[S], vocab: &Vocabulary) -> BowVector {
    BowVector::from_counts(tokens.iter().filter_map(|t| vocab.get(t.as_ref())).map(|i| (i, 1)))
}

/// Real-valued sparse feature vector, sorted by index.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureVec {
    entries: Vec<(usize, f64)>,
}

impl FeatureVec {
    pub fn from_pairs<I: IntoIterator<Item = (usize, f64)>>(pairs: I) -> FeatureVec {
        let mut map: BTreeMap<usize, f64> = BTreeMap::new();
        for (i, v) in pairs {
            *map.entry(i).or_default() += v;
        }
        FeatureVec { entries: map.into_iter().collect() }
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.entries.iter().map(|&(i, v)| dense[i] * v).sum()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.entries.last().map(|&(i, _)| i)
    }
}

impl From<&BowVector> for FeatureVec {
    fn from(bow: &BowVector) -> FeatureVec {
        FeatureVec { entries: bow.entries.iter().map(|&(i, c)| (i, c as f64)).collect() }
    }
}

/// `Σ_i weight_i · w_i` over per-unit bag-of-words vectors.
pub fn weighted_sum(vectors: &[BowVector], weights: &[f64]) -> FeatureVec {
    FeatureVec::from_pairs(
        vectors
            .iter()
            .zip(weights)
            .flat_map(|(v, &w)| v.entries.iter().map(move |&(i, c)| (i, w * c as f64))),
    )
}

/// Dense per-token weights θ.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn zeros(len: usize) -> WeightVector {
        WeightVector(vec![0.0; len])
    }

    pub fn from_vec(values: Vec<f64>) -> WeightVector {
        WeightVector(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// θᵀw. Indices outside θ contribute nothing.
    pub fn dot(&self, bow: &BowVector) -> f64 {
        bow.entries.iter().map(|&(i, c)| self.0.get(i).copied().unwrap_or(0.0) * c as f64).sum()
    }

    pub fn scaled(&self, factor: f64) -> WeightVector {
        WeightVector(self.0.iter().map(|v| v * factor).collect())
    }
}

/// Lexicon weights together with how many lexicon words were not in the
/// vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct LexiconWeights {
    pub theta: WeightVector,
    pub out_of_vocabulary: usize,
}

/// Parses `word<TAB>positive|negative` lines into a word → polarity map.
/// Blank lines and lines starting with `#` are skipped; words are
/// lowercased.
pub fn parse_lexicon<R: Read>(input: R) -> Result<BTreeMap<String, Polarity>, FeatureError> {
    let mut entries: BTreeMap<String, Polarity> = BTreeMap::new();
    for (n, line) in BufReader::new(input).lines().enumerate() {
        let line_no = n + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [word, polarity] = fields.as_slice() else {
            return Err(FeatureError::MalformedLexicon {
                line: line_no,
                message: format!("expected 2 tab-separated fields, found {}", fields.len()),
            });
        };
        let word = word.trim().to_lowercase();
        if word.is_empty() {
            return Err(FeatureError::MalformedLexicon { line: line_no, message: "empty word".into() });
        }
        let polarity = match polarity.trim() {
            "positive" => Polarity::Positive,
            "negative" => Polarity::Negative,
            other => {
                return Err(FeatureError::MalformedLexicon {
                    line: line_no,
                    message: format!("polarity must be 'positive' or 'negative', found '{other}'"),
                })
            }
        };
        match entries.get(&word) {
            Some(&existing) if existing != polarity => {
                return Err(FeatureError::ConflictingPolarity { line: line_no, word });
            }
            _ => {
                entries.insert(word, polarity);
            }
        }
    }
    Ok(entries)
}

/// θ_j = +1 for positive words, −1 for negative words, 0 elsewhere.
pub fn load_lexicon<R: Read>(input: R, vocab: &Vocabulary) -> Result<LexiconWeights, FeatureError> {
    let entries = parse_lexicon(input)?;
    Ok(lexicon_weights(&entries, vocab))
}

pub fn lexicon_weights(entries: &BTreeMap<String, Polarity>, vocab: &Vocabulary) -> LexiconWeights {
    let mut theta = WeightVector::zeros(vocab.len());
    let mut out_of_vocabulary = 0;
    for (word, polarity) in entries {
        match vocab.get(word) {
            Some(i) => theta.0[i] = polarity.sign(),
            None => out_of_vocabulary += 1,
        }
    }
    LexiconWeights { theta, out_of_vocabulary }
}
