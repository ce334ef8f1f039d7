//! Labeled documents, manifest loading, fold plans and accuracy.
//!
//! Manifest lines are tab-separated:
//!
//! ```text
//! id <TAB> score:<1-10> | label:<-1|1> <TAB> tree.rst.sexp | - <TAB> text.txt | -
//! ```
//!
//! Paths are relative to the tree root directory. A text file holds one EDU
//! per line and overrides the leaf texts of the tree; with no tree (`-`) it
//! is the document's only content, which is enough for flat scoring.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::features::{tokenize, vectorize, BowVector, Vocabulary};
use crate::rst::{parse_rst, RstTree};
use crate::Polarity;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("score {0} is outside 1..=10")]
    ScoreOutOfRange(i64),
    #[error("manifest line {line}: {message}")]
    MalformedManifest { line: usize, message: String },
    #[error("document '{id}': {path}: {message}")]
    BadDocument { id: String, path: PathBuf, message: String },
    #[error("duplicate document id '{0}'")]
    DuplicateId(String),
    #[error("cannot make {k} folds from {docs} documents")]
    TooManyFolds { k: usize, docs: usize },
    #[error("fold count must be at least 2, got {0}")]
    TooFewFolds(usize),
    #[error("prediction and gold id sets differ (first mismatch: '{0}')")]
    IdMismatch(String),
    #[error("nothing to evaluate")]
    EmptyEvaluation,
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

/// ≤ 4 → negative, ≥ 7 → positive, 5–6 → excluded.
pub fn binarize_score(score: i64) -> Result<Option<Polarity>, CorpusError> {
    match score {
        1..=4 => Ok(Some(Polarity::Negative)),
        5 | 6 => Ok(None),
        7..=10 => Ok(Some(Polarity::Positive)),
        _ => Err(CorpusError::ScoreOutOfRange(score)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Score(i64),
    Label(Polarity),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestRecord {
    pub line: usize,
    pub id: String,
    pub target: Target,
    pub tree_path: Option<PathBuf>,
    pub text_path: Option<PathBuf>,
}

/// Parses manifest records. Blank lines and `#` comments are skipped.
pub fn parse_manifest<R: Read>(input: R) -> Result<Vec<ManifestRecord>, CorpusError> {
    let mut records = Vec::new();
    for (n, line) in BufReader::new(input).lines().enumerate() {
        let line_no = n + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |message: String| CorpusError::MalformedManifest { line: line_no, message };
        let fields: Vec<&str> = line.split('\t').collect();
        let [id, target, tree, text] = fields.as_slice() else {
            return Err(bad(format!("expected 4 tab-separated fields, found {}", fields.len())));
        };
        if id.is_empty() {
            return Err(bad("empty document id".into()));
        }
        let target = if let Some(s) = target.strip_prefix("score:") {
            let score: i64 = s.parse().map_err(|_| bad(format!("invalid score '{s}'")))?;
            if !(1..=10).contains(&score) {
                return Err(bad(format!("score {score} is outside 1..=10")));
            }
            Target::Score(score)
        } else if let Some(l) = target.strip_prefix("label:") {
            let label = l.parse().ok().and_then(Polarity::from_i64).ok_or_else(|| bad(format!("invalid label '{l}'")))?;
            Target::Label(label)
        } else {
            return Err(bad(format!("expected 'score:N' or 'label:±1', found '{target}'")));
        };
        let path = |p: &str| (p != "-" && !p.is_empty()).then(|| PathBuf::from(p));
        let (tree_path, text_path) = (path(tree), path(text));
        if tree_path.is_none() && text_path.is_none() {
            return Err(bad("a document needs a tree file, a text file, or both".into()));
        }
        records.push(ManifestRecord { line: line_no, id: id.to_string(), target, tree_path, text_path });
    }
    Ok(records)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub id: String,
    pub label: Polarity,
    pub tree: Option<RstTree>,
    /// EDU texts in document order.
    pub edus: Vec<String>,
}

impl Document {
    pub fn from_tree(id: impl Into<String>, label: Polarity, tree: RstTree) -> Document {
        let edus = tree.edus().iter().map(|e| e.text.clone()).collect();
        Document { id: id.into(), label, tree: Some(tree), edus }
    }

    pub fn edu_tokens(&self) -> Vec<Vec<String>> {
        self.edus.iter().map(|t| tokenize(t)).collect()
    }

    pub fn all_tokens(&self) -> Vec<String> {
        self.edus.iter().flat_map(|t| tokenize(t)).collect()
    }

    pub fn edu_vectors(&self, vocab: &Vocabulary) -> Vec<BowVector> {
        self.edus.iter().map(|t| vectorize(&tokenize(t), vocab)).collect()
    }
}

#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    /// Skip documents whose files are missing or unparseable instead of
    /// failing.
    pub skip_bad: bool,
}

#[derive(Debug, Clone, Default)]
pub struct LoadedCorpus {
    pub documents: Vec<Document>,
    pub skipped_neutral: usize,
    /// `(id, reason)` for documents dropped under `skip_bad`.
    pub skipped_bad: Vec<(String, String)>,
}

pub fn load_corpus<R: Read>(manifest: R, root: &Path, options: &LoadOptions) -> Result<LoadedCorpus, CorpusError> {
    let records = parse_manifest(manifest)?;
    let mut out = LoadedCorpus::default();
    let mut seen = HashSet::new();
    for record in records {
        if !seen.insert(record.id.clone()) {
            return Err(CorpusError::DuplicateId(record.id));
        }
        let label = match record.target {
            Target::Label(l) => l,
            Target::Score(s) => match binarize_score(s)? {
                Some(l) => l,
                None => {
                    out.skipped_neutral += 1;
                    continue;
                }
            },
        };
        match load_document(&record, label, root) {
            Ok(doc) => out.documents.push(doc),
            Err(err) if options.skip_bad => out.skipped_bad.push((record.id.clone(), err.to_string())),
            Err(err) => return Err(err),
        }
    }
    Ok(out)
}

fn load_document(record: &ManifestRecord, label: Polarity, root: &Path) -> Result<Document, CorpusError> {
    let bad = |path: &Path, message: String| CorpusError::BadDocument {
        id: record.id.clone(),
        path: path.to_path_buf(),
        message,
    };
    let tree = match &record.tree_path {
        Some(rel) => {
            let path = root.join(rel);
            let file = fs::File::open(&path).map_err(|e| bad(&path, e.to_string()))?;
            Some(parse_rst(file).map_err(|e| bad(&path, e.to_string()))?)
        }
        None => None,
    };
    let texts = match &record.text_path {
        Some(rel) => {
            let path = root.join(rel);
            let content = fs::read_to_string(&path).map_err(|e| bad(&path, e.to_string()))?;
            Some((path, content.lines().map(str::to_string).collect::<Vec<_>>()))
        }
        None => None,
    };
    match (tree, texts) {
        (Some(tree), None) => Ok(Document::from_tree(&record.id, label, tree)),
        (Some(tree), Some((path, lines))) => {
            let tree = tree.with_texts(&lines).map_err(|e| bad(&path, e.to_string()))?;
            Ok(Document::from_tree(&record.id, label, tree))
        }
        (None, Some((_, lines))) => Ok(Document { id: record.id.clone(), label, tree: None, edus: lines }),
        (None, None) => unreachable!("manifest parsing requires a tree or a text"),
    }
}

/// Assignment of documents to `k` folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    /// Fold of each document, by document id.
    pub assignment: BTreeMap<String, usize>,
    order: Vec<String>,
}

impl FoldPlan {
    pub fn fold_of(&self, id: &str) -> Option<usize> {
        self.assignment.get(id).copied()
    }

    /// Document positions (in the original id order) of each fold.
    pub fn folds(&self) -> Vec<Vec<usize>> {
        let mut folds = vec![Vec::new(); self.k];
        for (i, id) in self.order.iter().enumerate() {
            folds[self.assignment[id]].push(i);
        }
        folds
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        self.folds().iter().map(Vec::len).collect()
    }
}

/// Seeded shuffle, then round-robin over `k` folds.
pub fn make_folds<S: AsRef<str>>(doc_ids: &[S], k: usize, seed: u64) -> Result<FoldPlan, CorpusError> {
    if k < 2 {
        return Err(CorpusError::TooFewFolds(k));
    }
    if k > doc_ids.len() {
        return Err(CorpusError::TooManyFolds { k, docs: doc_ids.len() });
    }
    let order: Vec<String> = doc_ids.iter().map(|s| s.as_ref().to_string()).collect();
    let mut seen = HashSet::new();
    if let Some(dup) = order.iter().find(|id| !seen.insert(id.as_str())) {
        return Err(CorpusError::DuplicateId(dup.clone()));
    }
    let mut shuffled: Vec<usize> = (0..order.len()).collect();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let assignment = shuffled.iter().enumerate().map(|(pos, &i)| (order[i].clone(), pos % k)).collect();
    Ok(FoldPlan { k, seed, assignment, order })
}

/// Fraction of documents whose predicted label matches the gold label.
pub fn evaluate(predictions: &[(String, Polarity)], gold: &[(String, Polarity)]) -> Result<f64, CorpusError> {
    if gold.is_empty() {
        return Err(CorpusError::EmptyEvaluation);
    }
    let gold_map: BTreeMap<&str, Polarity> = gold.iter().map(|(id, l)| (id.as_str(), *l)).collect();
    let pred_map: BTreeMap<&str, Polarity> = predictions.iter().map(|(id, l)| (id.as_str(), *l)).collect();
    if gold_map.len() != gold.len() {
        let mut seen = HashSet::new();
        let dup = gold.iter().find(|(id, _)| !seen.insert(id.as_str())).map(|(id, _)| id.clone());
        return Err(CorpusError::DuplicateId(dup.unwrap_or_default()));
    }
    if pred_map.len() != predictions.len() {
        let mut seen = HashSet::new();
        let dup = predictions.iter().find(|(id, _)| !seen.insert(id.as_str())).map(|(id, _)| id.clone());
        return Err(CorpusError::DuplicateId(dup.unwrap_or_default()));
    }
    if let Some(id) = gold_map
        .keys()
        .find(|id| !pred_map.contains_key(*id))
        .or_else(|| pred_map.keys().find(|id| !gold_map.contains_key(*id)))
    {
        return Err(CorpusError::IdMismatch(id.to_string()));
    }
    let correct = gold_map.iter().filter(|(id, l)| pred_map[*id] == **l).count();
    Ok(correct as f64 / gold.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvReport {
    pub fold_accuracies: Vec<f64>,
    pub mean: f64,
}

/// Runs `train_and_predict(train, test)` once per fold, where both are
/// document positions, and scores its predictions for the test positions.
pub fn cross_validate<E, F>(labels: &[(String, Polarity)], plan: &FoldPlan, mut train_and_predict: F) -> Result<CvReport, E>
where
    F: FnMut(&[usize], &[usize]) -> Result<Vec<Polarity>, E>,
    E: From<CorpusError>,
{
    let folds = plan.folds();
    let mut fold_accuracies = Vec::with_capacity(folds.len());
    for (f, test) in folds.iter().enumerate() {
        let train: Vec<usize> = folds.iter().enumerate().filter(|(g, _)| *g != f).flat_map(|(_, v)| v.iter().copied()).collect();
        let predicted = train_and_predict(&train, test)?;
        let preds: Vec<(String, Polarity)> = test.iter().zip(predicted).map(|(&i, p)| (labels[i].0.clone(), p)).collect();
        let gold: Vec<(String, Polarity)> = test.iter().map(|&i| labels[i].clone()).collect();
        fold_accuracies.push(evaluate(&preds, &gold)?);
    }
    let mean = fold_accuracies.iter().sum::<f64>() / fold_accuracies.len() as f64;
    Ok(CvReport { fold_accuracies, mean })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn binarize_examples() {
        assert_eq!(binarize_score(4).unwrap(), Some(Polarity::Negative));
        assert_eq!(binarize_score(7).unwrap(), Some(Polarity::Positive));
        assert_eq!(binarize_score(5).unwrap(), None);
        assert_eq!(binarize_score(6).unwrap(), None);
        assert!(matches!(binarize_score(0), Err(CorpusError::ScoreOutOfRange(0))));
        assert!(matches!(binarize_score(11), Err(CorpusError::ScoreOutOfRange(11))));
    }

    #[test]
    fn binarize_is_monotone() {
        let as_num = |s| binarize_score(s).unwrap().map_or(0, |p: Polarity| p.as_i8());
        for s in 1..10 {
            assert!(as_num(s) <= as_num(s + 1));
        }
    }

    fn write(dir: &Path, name: &str, content: &str) {
        let mut f = fs::File::create(dir.join(name)).unwrap();
        f.write_all(content.as_bytes()).unwrap();
    }

    #[test]
    fn load_skips_neutral() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "a.rst.sexp", r#"(edu 1 "bad film")"#);
        write(dir.path(), "b.rst.sexp", r#"(edu 1 "meh")"#);
        write(dir.path(), "c.rst.sexp", r#"(ns elaboration (n (edu 1 "great")) (s (edu 2 "really")))"#);
        let manifest = "a\tscore:2\ta.rst.sexp\t-\nb\tscore:5\tb.rst.sexp\t-\nc\tscore:9\tc.rst.sexp\t-\n";
        let corpus = load_corpus(manifest.as_bytes(), dir.path(), &LoadOptions::default()).unwrap();
        assert_eq!(corpus.documents.len(), 2);
        assert_eq!(corpus.skipped_neutral, 1);
        assert_eq!(corpus.documents[0].label, Polarity::Negative);
        assert_eq!(corpus.documents[1].label, Polarity::Positive);
        assert_eq!(corpus.documents[1].edus, vec!["great", "really"]);
    }

    #[test]
    fn missing_tree_aborts_unless_skipping() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "ok.rst.sexp", r#"(edu 1 "fine")"#);
        let manifest = "ok\tlabel:1\tok.rst.sexp\t-\ngone\tlabel:-1\tgone.rst.sexp\t-\n";
        let err = load_corpus(manifest.as_bytes(), dir.path(), &LoadOptions::default()).unwrap_err();
        assert!(err.to_string().contains("gone.rst.sexp"), "{err}");
        let corpus = load_corpus(manifest.as_bytes(), dir.path(), &LoadOptions { skip_bad: true }).unwrap();
        assert_eq!(corpus.documents.len(), 1);
        assert_eq!(corpus.skipped_bad.len(), 1);
        assert_eq!(corpus.skipped_bad[0].0, "gone");
    }

    #[test]
    fn text_files_override_and_replace_trees() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "t.rst.sexp", r#"(multi list (edu 1 "") (edu 2 ""))"#);
        write(dir.path(), "t.txt", "first unit\nsecond unit\n");
        write(dir.path(), "only.txt", "just text\n");
        let manifest = "t\tlabel:1\tt.rst.sexp\tt.txt\nonly\tlabel:-1\t-\tonly.txt\n";
        let corpus = load_corpus(manifest.as_bytes(), dir.path(), &LoadOptions::default()).unwrap();
        assert_eq!(corpus.documents[0].edus, vec!["first unit", "second unit"]);
        assert_eq!(corpus.documents[0].tree.as_ref().unwrap().edus()[1].text, "second unit");
        assert!(corpus.documents[1].tree.is_none());

        write(dir.path(), "short.txt", "one line\n");
        let mismatch = "t\tlabel:1\tt.rst.sexp\tshort.txt\n";
        assert!(load_corpus(mismatch.as_bytes(), dir.path(), &LoadOptions::default()).is_err());
    }

    #[test]
    fn manifest_errors_carry_line_numbers() {
        let cases = [
            "a\tscore:3\ta.rst.sexp\n",
            "# header\na\tscore:11\ta\t-\n",
            "a\tlabel:0\ta\t-\n",
            "a\tstars:4\ta\t-\n",
            "a\tlabel:1\t-\t-\n",
        ];
        for (i, src) in cases.iter().enumerate() {
            let err = parse_manifest(src.as_bytes()).unwrap_err();
            let expected_line = if i == 1 { 2 } else { 1 };
            assert!(
                matches!(err, CorpusError::MalformedManifest { line, .. } if line == expected_line),
                "{src:?}: {err:?}"
            );
        }
    }

    #[test]
    fn duplicate_ids_rejected() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "a.txt", "x\n");
        let manifest = "a\tlabel:1\t-\ta.txt\na\tlabel:1\t-\ta.txt\n";
        assert!(matches!(
            load_corpus(manifest.as_bytes(), dir.path(), &LoadOptions::default()),
            Err(CorpusError::DuplicateId(_))
        ));
    }

    #[test]
    fn fold_shapes() {
        let ids: Vec<String> = (0..10).map(|i| format!("d{i}")).collect();
        let plan = make_folds(&ids, 10, 3).unwrap();
        assert!(plan.fold_sizes().iter().all(|&s| s == 1));

        let ids: Vec<String> = (0..23).map(|i| format!("d{i}")).collect();
        let plan = make_folds(&ids, 10, 3).unwrap();
        let mut sizes = plan.fold_sizes();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        assert_eq!(sizes, vec![3, 3, 3, 2, 2, 2, 2, 2, 2, 2]);
        assert_eq!(plan, make_folds(&ids, 10, 3).unwrap());
        assert_ne!(plan.assignment, make_folds(&ids, 10, 4).unwrap().assignment);

        assert!(matches!(make_folds(&ids[..3], 4, 0), Err(CorpusError::TooManyFolds { k: 4, docs: 3 })));
        assert!(matches!(make_folds(&ids, 1, 0), Err(CorpusError::TooFewFolds(1))));
    }

    #[test]
    fn evaluate_examples() {
        let gold: Vec<(String, Polarity)> =
            (0..4).map(|i| (format!("d{i}"), if i % 2 == 0 { Polarity::Positive } else { Polarity::Negative })).collect();
        assert_eq!(evaluate(&gold, &gold).unwrap(), 1.0);
        let flipped: Vec<_> = gold.iter().map(|(id, l)| (id.clone(), l.flipped())).collect();
        assert_eq!(evaluate(&flipped, &gold).unwrap(), 0.0);
        let mut reordered = gold.clone();
        reordered.reverse();
        reordered[0].1 = reordered[0].1.flipped();
        assert_eq!(evaluate(&reordered, &gold).unwrap(), 0.75);
        let wrong_ids = vec![("x".to_string(), Polarity::Positive)];
        assert!(matches!(evaluate(&wrong_ids, &gold[..1]), Err(CorpusError::IdMismatch(_))));
        assert!(matches!(evaluate(&[], &[]), Err(CorpusError::EmptyEvaluation)));
    }

    #[test]
    fn cross_validation_means_folds() {
        let labels: Vec<(String, Polarity)> = (0..20).map(|i| (format!("d{i}"), Polarity::Positive)).collect();
        let ids: Vec<&str> = labels.iter().map(|(id, _)| id.as_str()).collect();
        let plan = make_folds(&ids, 4, 0).unwrap();
        // Predict positive only for even positions.
        let report = cross_validate::<CorpusError, _>(&labels, &plan, |train, test| {
            assert_eq!(train.len() + test.len(), 20);
            Ok(test.iter().map(|&i| if i % 2 == 0 { Polarity::Positive } else { Polarity::Negative }).collect())
        })
        .unwrap();
        assert_eq!(report.fold_accuracies.len(), 4);
        assert!((report.mean - 0.5).abs() < 1e-12);
    }
}
