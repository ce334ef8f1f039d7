mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use discsent::depdt::to_depdt;
use discsent::synth::{self, SynthConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

fn discsent(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_discsent")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

/// Tree-less toy corpus: one text file per document, one EDU per line.
fn toy_corpus() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    let docs = [
        ("a", 9, "a lovely film\ntruly great"),
        ("b", 2, "a dreadful film\ntruly awful"),
        ("c", 8, "great acting\nlovely score"),
        ("d", 1, "awful acting\ndreadful score"),
        ("e", 10, "great and lovely"),
        ("f", 3, "awful and dreadful"),
    ];
    let mut manifest = String::new();
    for (id, score, text) in docs {
        fs::write(dir.path().join(format!("{id}.txt")), text).unwrap();
        manifest.push_str(&format!("{id}\tscore:{score}\t-\t{id}.txt\n"));
    }
    fs::write(dir.path().join("manifest.tsv"), manifest).unwrap();
    fs::write(dir.path().join("lexicon.tsv"), "great\tpositive\nlovely\tpositive\nawful\tnegative\n").unwrap();
    dir
}

#[test]
fn lexicon_flat_scores_one_document() {
    let dir = toy_corpus();
    fs::write(dir.path().join("one.tsv"), "a\tscore:9\t-\ta.txt\n").unwrap();
    let out = stdout(&discsent(&["score", "--manifest", &p(dir.path(), "one.tsv"), "--lexicon", &p(dir.path(), "lexicon.tsv")]));
    assert_eq!(out, "a\t2\t1\n");
}

#[test]
fn depth_mode_without_trees_is_a_data_error() {
    let dir = toy_corpus();
    let out = discsent(&[
        "score",
        "--manifest",
        &p(dir.path(), "manifest.tsv"),
        "--lexicon",
        &p(dir.path(), "lexicon.tsv"),
        "--mode",
        "depth",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no tree"));
}

#[test]
fn logreg_fits_separable_toy_set() {
    let dir = toy_corpus();
    let manifest = p(dir.path(), "manifest.tsv");
    let model = p(dir.path(), "model.json");
    let out = discsent(&["train", "--manifest", &manifest, "--model-out", &model, "--min-count", "1", "--reg-grid", "0.001"]);
    stdout(&out);
    assert!(String::from_utf8_lossy(&out.stderr).contains("heldout_accuracy"));
    assert_eq!(stdout(&discsent(&["eval", "--manifest", &manifest, "--model-in", &model])), "accuracy\t1\n");
}

#[test]
fn cv_reports_folds_and_their_mean() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SynthConfig { docs: 100, seed: 3, ..SynthConfig::default() };
    synth::write_corpus(dir.path(), &synth::generate(&cfg), &synth::lexicon(&cfg)).unwrap();
    let out = stdout(&discsent(&["eval", "--cv", "10", "--manifest", &p(dir.path(), "manifest.tsv"), "--mode", "flat"]));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 11);
    let accs: Vec<f64> = lines[..10]
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let f: Vec<&str> = l.split('\t').collect();
            assert_eq!(&f[..2], ["fold", i.to_string().as_str()]);
            f[2].parse().unwrap()
        })
        .collect();
    let mean: f64 = lines[10].strip_prefix("mean\t").unwrap().parse().unwrap();
    assert!((mean - accs.iter().sum::<f64>() / 10.0).abs() < 1e-12);
}

#[test]
fn depdt_dumps_the_worked_example() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/last_samurai.rst.sexp");
    let out = stdout(&discsent(&["depdt", "--tree", path]));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 8);
    let roots: Vec<&&str> = lines.iter().filter(|l| l.split('\t').nth(1) == Some("-")).collect();
    assert_eq!(roots, [&"8\t-\t0\t-"]);
}

#[test]
fn depdt_single_edu() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("t.rst"), "(edu 1 \"only\")").unwrap();
    assert_eq!(stdout(&discsent(&["depdt", "--tree", &p(dir.path(), "t.rst")])), "1\t-\t0\t-\n");
}

#[test]
fn depdt_cli_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in [2, 7, 19, 40] {
        let tree = common::random_tree(&mut rng, n, 4);
        let path = p(dir.path(), &format!("{n}.rst"));
        fs::write(&path, tree.to_sexp()).unwrap();
        let out = stdout(&discsent(&["depdt", "--tree", &path]));
        let depths: Vec<usize> = out.lines().map(|l| l.split('\t').nth(2).unwrap().parse().unwrap()).collect();
        assert_eq!(depths, to_depdt(&tree).depths());
    }
}

#[test]
fn r2n2_beats_logreg_on_nucleus_dominant_data() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SynthConfig { docs: 1200, seed: 12, ..SynthConfig::default() };
    let docs = synth::generate(&cfg);
    let (train, test) = docs.split_at(1000);
    synth::write_corpus(&dir.path().join("train"), train, &synth::lexicon(&cfg)).unwrap();
    synth::write_corpus(&dir.path().join("test"), test, &synth::lexicon(&cfg)).unwrap();
    let test_manifest = p(dir.path(), "test/manifest.tsv");
    let mut acc = Vec::new();
    for mode in ["flat", "r2n2"] {
        let model = p(dir.path(), &format!("{mode}.json"));
        stdout(&discsent(&["train", "--manifest", &p(dir.path(), "train/manifest.tsv"), "--mode", mode, "--model-out", &model]));
        let out = stdout(&discsent(&["eval", "--manifest", &test_manifest, "--model-in", &model]));
        acc.push(out.trim().strip_prefix("accuracy\t").unwrap().parse::<f64>().unwrap());
    }
    assert!(acc[1] > acc[0], "r2n2 {} vs logreg {}", acc[1], acc[0]);
}

#[test]
fn exit_codes() {
    let dir = toy_corpus();
    let manifest = p(dir.path(), "manifest.tsv");
    assert_eq!(discsent(&["--help"]).status.code(), Some(0));
    assert_eq!(discsent(&["score", "--bogus"]).status.code(), Some(2));
    assert_eq!(discsent(&["score", "--manifest", &manifest]).status.code(), Some(2));
    assert_eq!(discsent(&["eval", "--cv", "2", "--manifest", &manifest, "--model-in", "m.json"]).status.code(), Some(2));
    assert_eq!(discsent(&["eval", "--cv", "1", "--manifest", &manifest]).status.code(), Some(2));
    let missing = p(dir.path(), "missing.tsv");
    assert_eq!(discsent(&["score", "--manifest", &missing, "--lexicon", &missing]).status.code(), Some(3));
    fs::write(dir.path().join("bad.json"), "{\"format\": \"nope\"}").unwrap();
    let bad = p(dir.path(), "bad.json");
    assert_eq!(discsent(&["score", "--manifest", &manifest, "--model-in", &bad]).status.code(), Some(3));
}

#[test]
fn skip_bad_drops_broken_documents() {
    let dir = toy_corpus();
    let mut manifest = fs::read_to_string(dir.path().join("manifest.tsv")).unwrap();
    manifest.push_str("broken\tscore:9\tnowhere.rst\t-\n");
    fs::write(dir.path().join("manifest.tsv"), manifest).unwrap();
    let args = ["score", "--manifest", &p(dir.path(), "manifest.tsv"), "--lexicon", &p(dir.path(), "lexicon.tsv")];
    assert_eq!(discsent(&args).status.code(), Some(3));
    let mut with_skip = args.to_vec();
    with_skip.push("--skip-bad");
    let out = discsent(&with_skip);
    assert_eq!(stdout(&out).lines().count(), 6);
    assert!(String::from_utf8_lossy(&out.stderr).contains("broken"));
}
