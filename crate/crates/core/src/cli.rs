//! Command-line front end.
//!
//! TSV goes to standard output, diagnostics to standard error. Exit codes:
//! 0 success, 2 usage or configuration error, 3 data or I/O error, 4
//! numeric failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::corpus::{self, cross_validate, make_folds, CorpusError, Document, LoadOptions};
use crate::depdt::to_depdt;
use crate::features::{build_vocab, load_lexicon, weighted_sum, FeatureError, Vocabulary, WeightVector};
use crate::logreg::{train_logreg, LogRegConfig, TrainError};
use crate::model::{Mode, ModelError, ModelFile, ModelKind};
use crate::r2n2::{init_params, train_r2n2, R2n2Config, R2n2Example, R2n2Params, RelationMode};
use crate::rst::{parse_rst, RstError};
use crate::scoring::{depth_weights, LinearScorer, ScoringError};
use crate::synth::{self, SynthConfig};
use crate::Polarity;

#[derive(Debug, Parser)]
#[command(name = "discsent", version, about = "Discourse-aware document sentiment scoring")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score every document in a manifest: `id<TAB>psi<TAB>label`.
    Score(RunConfig),
    /// Train a logistic-regression or recursive-network model.
    Train(RunConfig),
    /// Report accuracy on a labeled manifest, or cross-validate with --cv.
    Eval(RunConfig),
    /// Dump the dependency discourse tree of one tree file.
    Depdt(DepdtArgs),
    /// Write a synthetic corpus (manifest, trees, lexicon) to a directory.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

impl Switch {
    pub fn is_on(self) -> bool {
        self == Switch::On
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// Manifest of documents (id, score/label, tree path, text path).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Directory manifest paths are relative to [default: the manifest's directory].
    #[arg(long)]
    pub trees: Option<PathBuf>,
    /// Polarity lexicon (`word<TAB>positive|negative`).
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    #[arg(long = "model-in")]
    pub model_in: Option<PathBuf>,
    #[arg(long = "model-out")]
    pub model_out: Option<PathBuf>,
    /// Scoring mode [default: the model's own, or flat for a lexicon].
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Separate composition weights for contrastive relations (r2n2).
    #[arg(long, value_enum, default_value = "on")]
    pub relations: Switch,
    /// Train depth-mode classifiers on depth-weighted features.
    #[arg(long = "weight-train", value_enum, default_value = "on")]
    pub weight_train: Switch,
    /// Update word weights during r2n2 training.
    #[arg(long = "train-theta", value_enum, default_value = "on")]
    pub train_theta: Switch,
    /// Cross-validate with this many folds.
    #[arg(long)]
    pub cv: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.01)]
    pub lr: f64,
    #[arg(long, default_value_t = 30)]
    pub epochs: usize,
    #[arg(long, default_value_t = 5)]
    pub patience: usize,
    /// Comma-separated L2 coefficients tried on held-out data.
    #[arg(long = "reg-grid", value_delimiter = ',', default_values_t = [0.001, 0.01, 0.1, 1.0])]
    pub reg_grid: Vec<f64>,
    /// Minimum token frequency [default: 1 with a lexicon, 2 otherwise].
    #[arg(long = "min-count")]
    pub min_count: Option<usize>,
    /// Skip documents with missing or unparseable files.
    #[arg(long = "skip-bad")]
    pub skip_bad: bool,
}

#[derive(Debug, Clone, Args)]
pub struct DepdtArgs {
    /// RST tree file.
    #[arg(long)]
    pub tree: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 2000)]
    pub docs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Data(String),
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Data(m) | CliError::Numeric(m) => m,
        }
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        match e {
            CorpusError::TooManyFolds { .. } | CorpusError::TooFewFolds(_) => CliError::Config(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<FeatureError> for CliError {
    fn from(e: FeatureError) -> Self {
        match e {
            FeatureError::InvalidMinCount => CliError::Config(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<RstError> for CliError {
    fn from(e: RstError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Data(format!("model file: {e}"))
    }
}

impl From<ScoringError> for CliError {
    fn from(e: ScoringError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<TrainError> for CliError {
    fn from(e: TrainError) -> Self {
        match e {
            TrainError::NonFinite(_) => CliError::Numeric(e.to_string()),
            TrainError::EmptyRegGrid | TrainError::InvalidConfig(_) => CliError::Config(e.to_string()),
            TrainError::EmptyCorpus | TrainError::SingleClass => CliError::Data(e.to_string()),
        }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Score(config) => cmd_score(config, out, err),
        Command::Train(config) => cmd_train(config, err),
        Command::Eval(config) => cmd_eval(config, out, err),
        Command::Depdt(args) => cmd_depdt(args, out),
        Command::Synth(args) => cmd_synth(args, err),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message());
            e.exit_code()
        }
    }
}

fn write_out(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes()).map_err(|e| CliError::Data(format!("writing output: {e}")))
}

fn log(err: &mut dyn Write, text: &str) {
    let _ = writeln!(err, "{text}");
}

fn load_documents(config: &RunConfig, err: &mut dyn Write) -> Result<Vec<Document>, CliError> {
    let manifest = config.manifest.as_ref().ok_or_else(|| CliError::Config("--manifest is required".into()))?;
    let root = match &config.trees {
        Some(dir) => dir.clone(),
        None => manifest.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    let file = fs::File::open(manifest).map_err(|e| io_error(manifest, e))?;
    let loaded = corpus::load_corpus(file, &root, &LoadOptions { skip_bad: config.skip_bad })?;
    if loaded.skipped_neutral > 0 {
        log(err, &format!("skipped {} neutral document(s)", loaded.skipped_neutral));
    }
    for (id, reason) in &loaded.skipped_bad {
        log(err, &format!("skipped document '{id}': {reason}"));
    }
    if loaded.documents.is_empty() {
        return Err(CliError::Data("manifest yields no documents".into()));
    }
    Ok(loaded.documents)
}

/// Anything that maps a document to `(Ψ, label)`.
#[derive(Debug, Clone)]
pub enum Predictor {
    Linear { vocab: Vocabulary, theta: WeightVector, bias: f64, mode: Mode },
    Recursive { vocab: Vocabulary, params: R2n2Params },
}

impl Predictor {
    pub fn predict(&self, doc: &Document) -> Result<(f64, Polarity), CliError> {
        let (psi, label) = match self {
            Predictor::Linear { vocab, theta, bias, mode } => {
                let vectors = doc.edu_vectors(vocab);
                let scorer = LinearScorer::new(theta, *bias);
                let score = match mode {
                    Mode::Flat => scorer.flat(&vectors),
                    _ => {
                        let tree = require_tree(doc, *mode)?;
                        scorer.depth_weighted(&vectors, to_depdt(tree).depths())?
                    }
                };
                (score.psi, score.label)
            }
            Predictor::Recursive { vocab, params } => {
                let tree = require_tree(doc, Mode::R2n2)?;
                params.predict(tree, &doc.edu_vectors(vocab))
            }
        };
        if !psi.is_finite() {
            return Err(CliError::Numeric(format!("document '{}' scored {psi}", doc.id)));
        }
        Ok((psi, label))
    }
}

fn require_tree(doc: &Document, mode: Mode) -> Result<&crate::rst::RstTree, CliError> {
    doc.tree
        .as_ref()
        .ok_or_else(|| CliError::Data(format!("document '{}' has no tree file; {mode} mode needs one", doc.id)))
}

fn lexicon_predictor(config: &RunConfig, docs: &[&Document], err: &mut dyn Write) -> Result<Predictor, CliError> {
    let path = config.lexicon.as_ref().expect("caller checked");
    let mode = config.mode.unwrap_or(Mode::Flat);
    if mode == Mode::R2n2 {
        return Err(CliError::Config("r2n2 mode needs a trained model (--model-in)".into()));
    }
    let vocab = build_vocab(docs.iter().map(|d| d.all_tokens()), config.min_count.unwrap_or(1))?;
    let file = fs::File::open(path).map_err(|e| io_error(path, e))?;
    let lexicon = load_lexicon(file, &vocab)?;
    if lexicon.out_of_vocabulary > 0 {
        log(err, &format!("{} lexicon word(s) not in the corpus vocabulary", lexicon.out_of_vocabulary));
    }
    Ok(Predictor::Linear { vocab, theta: lexicon.theta, bias: 0.0, mode })
}

fn model_predictor(config: &RunConfig, path: &Path) -> Result<Predictor, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let file = ModelFile::from_json(&text)?;
    let mode = config.mode.unwrap_or(file.mode);
    let vocab = file.vocabulary()?;
    match (file.kind, mode) {
        (ModelKind::R2n2, Mode::R2n2) => Ok(Predictor::Recursive { vocab, params: file.r2n2_params()? }),
        (ModelKind::Logreg, Mode::R2n2) => Err(CliError::Config("r2n2 mode needs an r2n2 model".into())),
        // The recursive model's θ also works as a plain linear scorer.
        (_, mode) => Ok(Predictor::Linear { vocab, theta: file.theta(), bias: file.bias, mode }),
    }
}

fn fixed_predictor(config: &RunConfig, docs: &[&Document], err: &mut dyn Write) -> Result<Predictor, CliError> {
    match (&config.model_in, &config.lexicon) {
        (Some(path), _) => model_predictor(config, path),
        (None, Some(_)) => lexicon_predictor(config, docs, err),
        (None, None) => Err(CliError::Config("--model-in or --lexicon is required".into())),
    }
}

/// A freshly trained model and its on-disk form.
struct Trained {
    predictor: Predictor,
    file: ModelFile,
    summary: String,
}

fn logreg_config(config: &RunConfig) -> LogRegConfig {
    LogRegConfig { reg_grid: config.reg_grid.clone(), seed: config.seed, ..LogRegConfig::default() }
}

fn train_model(config: &RunConfig, docs: &[&Document], err: &mut dyn Write) -> Result<Trained, CliError> {
    let mode = config.mode.unwrap_or(Mode::Flat);
    let lexicon_init = mode == Mode::R2n2 && config.lexicon.is_some();
    let min_count = config.min_count.unwrap_or(if lexicon_init { 1 } else { 2 });
    let vocab = build_vocab(docs.iter().map(|d| d.all_tokens()), min_count)?;
    let vectors: Vec<_> = docs.iter().map(|d| d.edu_vectors(&vocab)).collect();

    let weighted = mode == Mode::Depth && config.weight_train.is_on();
    let mut examples = Vec::with_capacity(docs.len());
    for (doc, v) in docs.iter().zip(&vectors) {
        let features = if weighted {
            let tree = require_tree(doc, mode)?;
            weighted_sum(v, &depth_weights(to_depdt(tree).depths()))
        } else {
            weighted_sum(v, &vec![1.0; v.len()])
        };
        examples.push((features, doc.label));
    }

    if mode != Mode::R2n2 {
        let model = train_logreg(&examples, vocab.len(), &logreg_config(config))?;
        let mut file = ModelFile::linear(&vocab, &model.theta, model.bias, Some(model.reg_coef), mode);
        file.weight_train = weighted;
        file.seed = config.seed;
        file.min_count = min_count;
        file.heldout_accuracy = model.heldout_accuracy;
        let summary = format!(
            "trained logreg ({mode}): reg={} heldout_accuracy={} iterations={}",
            model.reg_coef,
            fmt_opt(model.heldout_accuracy),
            model.iterations
        );
        let predictor = Predictor::Linear { vocab, theta: model.theta, bias: model.bias, mode };
        return Ok(Trained { predictor, file, summary });
    }

    let init_theta = if let Some(path) = &config.lexicon {
        let file = fs::File::open(path).map_err(|e| io_error(path, e))?;
        let lexicon = load_lexicon(file, &vocab)?;
        log(err, &format!("initializing word weights from lexicon ({} out of vocabulary)", lexicon.out_of_vocabulary));
        lexicon.theta
    } else {
        let warm = train_logreg(&examples, vocab.len(), &logreg_config(config))?;
        log(err, &format!("initialized word weights from logreg (reg={})", warm.reg_coef));
        warm.theta
    };
    let relation_mode = if config.relations.is_on() { RelationMode::WithRelations } else { RelationMode::NoRelations };
    let init = init_params(relation_mode, vocab.len(), Some(init_theta), config.seed);
    let r2n2_examples: Vec<R2n2Example> = docs
        .iter()
        .zip(vectors)
        .map(|(doc, edu_vectors)| {
            Ok(R2n2Example { tree: require_tree(doc, mode)?.clone(), edu_vectors, label: doc.label })
        })
        .collect::<Result<_, CliError>>()?;
    let r2n2_config = R2n2Config {
        lr: config.lr,
        epochs: config.epochs,
        patience: config.patience,
        seed: config.seed,
        train_theta: config.train_theta.is_on(),
        ..R2n2Config::default()
    };
    let training = train_r2n2(&r2n2_examples, init, &r2n2_config)?;
    let section = ModelFile::r2n2_section(
        &training.params,
        config.lr,
        config.epochs,
        config.patience,
        r2n2_config.train_theta,
        training.best_epoch,
    );
    let mut file = ModelFile::recursive(&vocab, &training.params, section);
    file.seed = config.seed;
    file.min_count = min_count;
    file.heldout_accuracy = training.heldout_accuracy;
    let summary = format!(
        "trained r2n2 ({relation_mode}): heldout_accuracy={} epochs={} best_epoch={}",
        fmt_opt(training.heldout_accuracy),
        training.history.len(),
        training.best_epoch
    );
    Ok(Trained { predictor: Predictor::Recursive { vocab, params: training.params }, file, summary })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| v.to_string())
}

pub fn cmd_score(config: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    if config.model_in.is_none() && config.lexicon.is_none() {
        return Err(CliError::Config("--model-in or --lexicon is required".into()));
    }
    let docs = load_documents(config, err)?;
    let refs: Vec<&Document> = docs.iter().collect();
    let predictor = fixed_predictor(config, &refs, err)?;
    let mut text = String::new();
    for doc in &docs {
        let (psi, label) = predictor.predict(doc)?;
        text.push_str(&format!("{}\t{}\t{}\n", doc.id, psi, label));
    }
    write_out(out, &text)
}

pub fn cmd_train(config: &RunConfig, err: &mut dyn Write) -> Result<(), CliError> {
    let out_path = config.model_out.as_ref().ok_or_else(|| CliError::Config("--model-out is required".into()))?;
    let docs = load_documents(config, err)?;
    let refs: Vec<&Document> = docs.iter().collect();
    let trained = train_model(config, &refs, err)?;
    let json = trained.file.to_json().map_err(|e| CliError::Numeric(e.to_string()))?;
    fs::write(out_path, json).map_err(|e| io_error(out_path, e))?;
    log(err, &trained.summary);
    Ok(())
}

pub fn cmd_eval(config: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let Some(k) = config.cv else {
        if config.model_in.is_none() && config.lexicon.is_none() {
            return Err(CliError::Config("--model-in or --lexicon is required (or use --cv)".into()));
        }
        let docs = load_documents(config, err)?;
        let refs: Vec<&Document> = docs.iter().collect();
        let predictor = fixed_predictor(config, &refs, err)?;
        let accuracy = accuracy_of(&predictor, &refs)?;
        return write_out(out, &format!("accuracy\t{accuracy}\n"));
    };
    if config.model_in.is_some() {
        return Err(CliError::Config("--cv trains a model per fold; drop --model-in".into()));
    }
    let docs = load_documents(config, err)?;
    let labels: Vec<(String, Polarity)> = docs.iter().map(|d| (d.id.clone(), d.label)).collect();
    let plan = make_folds(&labels.iter().map(|(id, _)| id.as_str()).collect::<Vec<_>>(), k, config.seed)?;
    let lexicon_only = config.lexicon.is_some() && config.mode != Some(Mode::R2n2);
    let refs: Vec<&Document> = docs.iter().collect();
    let shared = if lexicon_only { Some(lexicon_predictor(config, &refs, err)?) } else { None };

    let report = cross_validate::<CliError, _>(&labels, &plan, |train, test| {
        let predictor = match &shared {
            Some(p) => p.clone(),
            None => {
                let train_docs: Vec<&Document> = train.iter().map(|&i| &docs[i]).collect();
                let trained = train_model(config, &train_docs, err)?;
                log(err, &trained.summary);
                trained.predictor
            }
        };
        test.iter().map(|&i| predictor.predict(&docs[i]).map(|(_, label)| label)).collect()
    })?;
    let mut text = String::new();
    for (i, acc) in report.fold_accuracies.iter().enumerate() {
        text.push_str(&format!("fold\t{i}\t{acc}\n"));
    }
    text.push_str(&format!("mean\t{}\n", report.mean));
    write_out(out, &text)
}

fn accuracy_of(predictor: &Predictor, docs: &[&Document]) -> Result<f64, CliError> {
    let mut preds = Vec::with_capacity(docs.len());
    for doc in docs {
        preds.push((doc.id.clone(), predictor.predict(doc)?.1));
    }
    let gold: Vec<(String, Polarity)> = docs.iter().map(|d| (d.id.clone(), d.label)).collect();
    Ok(corpus::evaluate(&preds, &gold)?)
}

pub fn cmd_depdt(args: &DepdtArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let file = fs::File::open(&args.tree).map_err(|e| io_error(&args.tree, e))?;
    let tree = parse_rst(file).map_err(|e| CliError::Data(format!("{}: {e}", args.tree.display())))?;
    write_out(out, &to_depdt(&tree).to_tsv())
}

pub fn cmd_synth(args: &SynthArgs, err: &mut dyn Write) -> Result<(), CliError> {
    let config = SynthConfig { docs: args.docs, seed: args.seed, ..SynthConfig::default() };
    let docs = synth::generate(&config);
    synth::write_corpus(&args.out, &docs, &synth::lexicon(&config)).map_err(|e| io_error(&args.out, e))?;
    log(err, &format!("wrote {} documents to {}", docs.len(), args.out.display()));
    Ok(())
}
