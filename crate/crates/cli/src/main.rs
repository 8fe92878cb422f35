//! `navdex` — batch pipeline for turning two-channel EOG recordings into
//! spatial-navigation subscore estimates. Subcommands mirror the pipeline
//! stages: synth, preprocess, features, derive, score, evaluate, correlate,
//! report.

mod commands;
mod manifest;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use navdex_core::{
    DeriveError, FeatureError, IndexError, MetricsError, ModelError, PreprocessError, ReportError,
    SynthError,
};

/// Exit code 1: the inputs or flags were rejected. Exit code 2: the
/// filesystem failed us.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Io(String),
}

impl CliError {
    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Io(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(msg) => write!(f, "{msg}"),
            CliError::Io(msg) => write!(f, "I/O error: {msg}"),
        }
    }
}

impl From<ModelError> for CliError {
    fn from(err: ModelError) -> Self {
        match err {
            ModelError::Io { .. } => CliError::Io(err.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

macro_rules! validation_error {
    ($($ty:ty),*) => {$(
        impl From<$ty> for CliError {
            fn from(err: $ty) -> Self {
                CliError::Validation(err.to_string())
            }
        }
    )*};
}
validation_error!(
    PreprocessError,
    FeatureError,
    DeriveError,
    IndexError,
    MetricsError,
    ReportError
);

impl From<SynthError> for CliError {
    fn from(err: SynthError) -> Self {
        match err {
            SynthError::Model(ModelError::Io { .. }) => CliError::Io(err.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(err: serde_json::Error) -> Self {
        CliError::Validation(format!("bad JSON: {err}"))
    }
}

#[derive(Parser)]
#[command(name = "navdex", version, about = "EOG spatial-navigation index toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic recordings with ground-truth event logs.
    Synth {
        /// Output directory for recording CSVs, manifests, and truth files.
        #[arg(long)]
        out: PathBuf,
        /// Generator config JSON (SynthConfig fields).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Base seed; overrides the config value.
        #[arg(long)]
        seed: Option<u64>,
        /// Cohort size. With 1, emits a single recording.
        #[arg(long, default_value_t = 1)]
        cohort: usize,
        /// Cohort sweep as `parameter:lo:hi`, e.g. `blink_rate_hz:0.05:0.8`.
        #[arg(long)]
        sweep: Option<String>,
    },
    /// Run the conditioning chain over a directory of recordings.
    Preprocess {
        /// Input directory of recording CSV + manifest pairs.
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Conditioning config JSON (PreprocessConfig fields).
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Extract the 44-column feature table from a directory of recordings.
    Features {
        /// Input directory of recording CSV + manifest pairs.
        #[arg(long = "in")]
        input: PathBuf,
        /// Output feature CSV path.
        #[arg(long)]
        out: PathBuf,
        /// Feature config JSON (FeatureConfig fields).
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Derive an index for one subscale from features and subscores.
    Derive {
        /// Feature CSV produced by `features`.
        #[arg(long)]
        features: PathBuf,
        /// Ground-truth subscore CSV.
        #[arg(long)]
        subscores: PathBuf,
        /// Target subscale (canonical name).
        #[arg(long)]
        subscale: String,
        /// Regularization weight.
        #[arg(long)]
        lambda: Option<f64>,
        /// Cross-validation fold count.
        #[arg(long)]
        folds: Option<usize>,
        /// Stop threshold on CV-MSE improvement.
        #[arg(long)]
        threshold: Option<f64>,
        /// Optional fold-shuffle seed (folds follow subject order when absent).
        #[arg(long)]
        seed: Option<u64>,
        /// Output model JSON path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Score feature rows with published indices and/or model files.
    Score {
        /// Feature CSV produced by `features`.
        #[arg(long)]
        features: PathBuf,
        /// Published index name (NO, SA, LR, PS, PR); repeatable.
        #[arg(long)]
        index: Vec<String>,
        /// Derived model JSON path; repeatable.
        #[arg(long)]
        model: Vec<PathBuf>,
        /// Output estimate CSV (subject_id + one column per scorer).
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare estimates against ground truth for one subscale.
    Evaluate {
        /// Estimate CSV (subject_id + subscale-named columns).
        #[arg(long)]
        estimates: PathBuf,
        /// Ground-truth subscore CSV.
        #[arg(long)]
        actuals: PathBuf,
        /// Subscale to evaluate (canonical name).
        #[arg(long)]
        subscale: String,
        /// Output report JSON path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Spearman-correlate every feature with every event measure.
    Correlate {
        /// Feature CSV produced by `features`.
        #[arg(long)]
        features: PathBuf,
        /// Event-count CSV (from `synth` or an annotation pipeline).
        #[arg(long)]
        events: PathBuf,
        /// Output correlation grid CSV.
        #[arg(long)]
        out: PathBuf,
    },
    /// Emit scatter/bar figures plus feature-importance charts as SVG+CSV.
    Report {
        /// Estimate CSV (subject_id + subscale-named columns).
        #[arg(long)]
        estimates: PathBuf,
        /// Ground-truth subscore CSV.
        #[arg(long)]
        actuals: PathBuf,
        /// Feature CSV (for importance standard deviations).
        #[arg(long)]
        features: PathBuf,
        /// Derived model JSON; repeatable. Defaults to the five published
        /// scorers when omitted.
        #[arg(long)]
        model: Vec<PathBuf>,
        /// Output directory for the figure bundle.
        #[arg(long)]
        out: PathBuf,
    },
}

fn configure_threads() {
    if let Ok(value) = std::env::var("NAVDEX_THREADS") {
        if let Ok(threads) = value.parse::<usize>() {
            if threads >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
        }
    }
}

fn main() -> ExitCode {
    configure_threads();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth {
            out,
            config,
            seed,
            cohort,
            sweep,
        } => commands::cmd_synth(&out, config.as_deref(), seed, cohort, sweep.as_deref()),
        Command::Preprocess { input, out, config } => {
            commands::cmd_preprocess(&input, &out, config.as_deref())
        }
        Command::Features { input, out, config } => {
            commands::cmd_features(&input, &out, config.as_deref())
        }
        Command::Derive {
            features,
            subscores,
            subscale,
            lambda,
            folds,
            threshold,
            seed,
            out,
        } => commands::cmd_derive(
            &features, &subscores, &subscale, lambda, folds, threshold, seed, &out,
        ),
        Command::Score {
            features,
            index,
            model,
            out,
        } => commands::cmd_score(&features, &index, &model, &out),
        Command::Evaluate {
            estimates,
            actuals,
            subscale,
            out,
        } => commands::cmd_evaluate(&estimates, &actuals, &subscale, &out),
        Command::Correlate {
            features,
            events,
            out,
        } => commands::cmd_correlate(&features, &events, &out),
        Command::Report {
            estimates,
            actuals,
            features,
            model,
            out,
        } => commands::cmd_report(&estimates, &actuals, &features, &model, &out),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("navdex: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
