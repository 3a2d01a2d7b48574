//! Command-line front end: `synth`, `features`, `train`, `classify`,
//! `evaluate` and `sweep`.
//!
//! A word scores `(1/6) sum_t log p(f_t | model)` against each script. With the
//! default `--frames per-position` the model for frame `t` is that script's
//! mixture for position `t`; with `--frames pooled` every frame is scored by a
//! single per-script mixture. The model index therefore follows the script,
//! not the frame, in the pooled reading.
//!
//! Exit codes are 0 on success, 1 on pipeline failure and 2 on bad arguments.
//! Every random choice derives from `--seed`, so identical flags give
//! byte-identical artifacts.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::classifier::{self, FrameModeling, ScriptModelSet, TrainConfig};
use crate::dataset;
use crate::error::{Error, Result};
use crate::features::extract_word_features;
use crate::gmm::EmConfig;
use crate::imaging::load_word_matrix;
use crate::synth;

pub const DEFAULT_ORDERS: [usize; 7] = [2, 4, 8, 16, 32, 64, 128];

#[derive(Debug, Parser)]
#[command(name = "scriptid", version, about = "Handwritten word script identification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Canonical side N that every word is normalized to.
    #[arg(long, global = true, default_value_t = 64, value_parser = clap::value_parser!(u64).range(8..))]
    pub side: u64,
    /// Mixture components per script model.
    #[arg(long, global = true, default_value_t = 128, value_parser = clap::value_parser!(u64).range(1..))]
    pub order: u64,
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Dataset root laid out as <root>/<script>/*.pgm.
    #[arg(long, global = true)]
    pub data: Option<PathBuf>,
    /// Model file (JSON) to write or read.
    #[arg(long, global = true)]
    pub model: Option<PathBuf>,
    /// Output file, or output directory for `synth`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Explicit `path,split` manifest instead of the filename-parity split.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    /// Comma-separated mixture orders for `sweep`.
    #[arg(long, global = true, value_delimiter = ',', default_values_t = DEFAULT_ORDERS)]
    pub orders: Vec<usize>,
    /// One mixture per frame position, or one mixture for all six frames.
    #[arg(long, global = true, value_enum, default_value_t = FrameModeling::PerPosition)]
    pub frames: FrameModeling,
    #[arg(long, global = true, default_value_t = 200)]
    pub max_iter: usize,
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub rel_tol: f64,
    #[arg(long, global = true, default_value_t = crate::gmm::DEFAULT_VARIANCE_FLOOR)]
    pub variance_floor: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic four-class corpus of PGM word images.
    Synth {
        #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
        per_class: u64,
    },
    /// Print the six feature vectors of one image as CSV.
    Features { image: PathBuf },
    /// Fit one mixture per script on the train split.
    Train,
    /// Score one image against every script model.
    Classify { image: PathBuf },
    /// Classify the test split and report the confusion matrix.
    Evaluate,
    /// Train and evaluate at several mixture orders.
    Sweep,
}

/// Resolved settings shared by every subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub side: usize,
    pub order: usize,
    pub seed: u64,
    pub em: EmConfig,
    pub frames: FrameModeling,
    pub data: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
    pub orders: Vec<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            side: 64,
            order: 128,
            seed: 42,
            em: EmConfig::default(),
            frames: FrameModeling::default(),
            data: None,
            model: None,
            out: None,
            manifest: None,
            orders: DEFAULT_ORDERS.to_vec(),
        }
    }
}

impl RunConfig {
    pub fn from_args(args: &CommonArgs) -> Result<Self> {
        if !(args.variance_floor > 0.0 && args.variance_floor.is_finite()) {
            return Err(Error::Usage("--variance-floor must be positive".into()));
        }
        if !(args.rel_tol >= 0.0) {
            return Err(Error::Usage("--rel-tol must be non-negative".into()));
        }
        if args.orders.is_empty() || args.orders.contains(&0) {
            return Err(Error::Usage("--orders must list positive integers".into()));
        }
        Ok(Self {
            side: args.side as usize,
            order: args.order as usize,
            seed: args.seed,
            em: EmConfig {
                max_iter: args.max_iter,
                rel_tol: args.rel_tol,
                variance_floor: args.variance_floor,
            },
            frames: args.frames,
            data: args.data.clone(),
            model: args.model.clone(),
            out: args.out.clone(),
            manifest: args.manifest.clone(),
            orders: args.orders.clone(),
        })
    }

    fn train_config(&self, order: usize) -> TrainConfig {
        TrainConfig {
            order,
            seed: self.seed,
            em: self.em,
            frames: self.frames,
        }
    }

    fn require<'a>(&self, value: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
        value
            .as_deref()
            .ok_or_else(|| Error::Usage(format!("--{flag} is required")))
    }

    fn split(&self) -> Result<dataset::DatasetSplit> {
        let root = self.require(&self.data, "data")?;
        dataset::load_split(root, self.manifest.as_deref())
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Writes the default four-class corpus under `out`.
pub fn cmd_synth(cfg: &RunConfig, per_class: usize) -> Result<String> {
    let out = cfg.require(&cfg.out, "out")?;
    let corpus = synth::generate_corpus(&synth::default_four_class(), cfg.side, per_class, cfg.seed)?;
    let written = dataset::write_corpus(out, &corpus)?;
    Ok(format!(
        "wrote {} images for {} scripts to {}\n",
        written.len(),
        corpus.len(),
        out.display()
    ))
}

pub fn cmd_features(cfg: &RunConfig, image: &Path) -> Result<String> {
    let m = load_word_matrix(image, cfg.side).map_err(|e| Error::in_file(image, e))?;
    Ok(extract_word_features(&m)?.to_csv())
}

pub fn cmd_train(cfg: &RunConfig) -> Result<String> {
    let model_path = cfg.require(&cfg.model, "model")?;
    let split = cfg.split()?;
    if split.train.len() < 2 {
        return Err(Error::TooFewScripts(split.train.len()));
    }
    let train = dataset::featurize(&split.train, cfg.side)?;
    let (models, report) = classifier::train(&train, &cfg.train_config(cfg.order))?;
    models.save(model_path)?;

    let mut out = String::new();
    for w in &report.warnings {
        out.push_str(&format!("warning: {w}\n"));
    }
    for (label, fits) in &report.fits {
        let iterations: Vec<String> = fits.iter().map(|f| f.iterations.to_string()).collect();
        let unconverged = fits.iter().filter(|f| !f.converged).count();
        out.push_str(&format!(
            "{label}: {} words, order {}, EM iterations [{}]{}\n",
            train[label].len(),
            report.effective_orders[label],
            iterations.join(","),
            if unconverged > 0 { format!(" ({unconverged} not converged)") } else { String::new() },
        ));
    }
    out.push_str(&format!("model written to {}\n", model_path.display()));
    Ok(out)
}

/// `label=<winner>` followed by one `score,<label>,<value>` line per script.
pub fn cmd_classify(cfg: &RunConfig, image: &Path) -> Result<String> {
    let models = ScriptModelSet::load(cfg.require(&cfg.model, "model")?)?;
    let m = load_word_matrix(image, models.side()).map_err(|e| Error::in_file(image, e))?;
    let result = models.classify(&extract_word_features(&m)?)?;
    let mut out = format!("label={}\n", result.label);
    for (label, score) in &result.scores {
        out.push_str(&format!("score,{label},{score}\n"));
    }
    Ok(out)
}

fn evaluate_csv(cfg: &RunConfig, models: &ScriptModelSet) -> Result<classifier::EvalReport> {
    let split = cfg.split()?;
    if split.test.values().all(Vec::is_empty) {
        return Err(Error::NoTestSamples);
    }
    let test = dataset::featurize(&split.test, models.side())?;
    classifier::evaluate(models, &test)
}

/// Writes the confusion CSV to `--out` (or includes it in the returned text)
/// and returns the accuracy table.
pub fn cmd_evaluate(cfg: &RunConfig) -> Result<String> {
    let models = ScriptModelSet::load(cfg.require(&cfg.model, "model")?)?;
    let report = evaluate_csv(cfg, &models)?;
    let csv = report.to_csv();
    let mut out = String::new();
    match &cfg.out {
        Some(path) => write_file(path, &csv)?,
        None => {
            out.push_str(&csv);
            out.push('\n');
        }
    }
    out.push_str(&report.to_table());
    Ok(out)
}

/// One `order,<M>` block per order, each followed by the same CSV that
/// `evaluate` writes for a model of that order.
pub fn cmd_sweep(cfg: &RunConfig) -> Result<String> {
    let split = cfg.split()?;
    if split.train.len() < 2 {
        return Err(Error::TooFewScripts(split.train.len()));
    }
    if split.test.values().all(Vec::is_empty) {
        return Err(Error::NoTestSamples);
    }
    let train = dataset::featurize(&split.train, cfg.side)?;
    let test = dataset::featurize(&split.test, cfg.side)?;
    let results = classifier::sweep_orders(&train, &test, &cfg.orders, &cfg.train_config(cfg.order))?;

    let mut csv = String::new();
    for (i, r) in results.iter().enumerate() {
        if i > 0 {
            csv.push('\n');
        }
        csv.push_str(&format!("order,{}\n", r.order));
        csv.push_str(&r.report.to_csv());
    }
    let mut out = String::new();
    match &cfg.out {
        Some(path) => write_file(path, &csv)?,
        None => {
            out.push_str(&csv);
            out.push('\n');
        }
    }
    out.push_str(&classifier::sweep_table_csv(&results));
    Ok(out)
}

pub fn run(cli: &Cli, stdout: &mut impl Write) -> Result<()> {
    let cfg = RunConfig::from_args(&cli.common)?;
    let text = match &cli.command {
        Command::Synth { per_class } => cmd_synth(&cfg, *per_class as usize)?,
        Command::Features { image } => cmd_features(&cfg, image)?,
        Command::Train => cmd_train(&cfg)?,
        Command::Classify { image } => cmd_classify(&cfg, image)?,
        Command::Evaluate => cmd_evaluate(&cfg)?,
        Command::Sweep => cmd_sweep(&cfg)?,
    };
    stdout
        .write_all(text.as_bytes())
        .map_err(|e| Error::io("<stdout>", e))
}

/// Parses `args`, runs, and maps the outcome to an exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut impl Write, stderr: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = write!(stderr, "{}", e.render());
            return code;
        }
    };
    match run(&cli, stdout) {
        Ok(()) => 0,
        Err(e @ Error::Usage(_)) => {
            let _ = writeln!(stderr, "error: {e}");
            2
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}
