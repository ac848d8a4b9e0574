//! `layerfuse`: sentence embeddings from layer-wise word representations.

mod args;
mod commands;
mod manifest;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use layerfuse::ErrorClass;

use args::FusionArgs;

#[derive(Debug, Parser)]
#[command(name = "layerfuse", version, about)]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "LAYERFUSE_THREADS")]
    threads: Option<usize>,
    /// Seed for generated fixtures. The fusion pipeline is deterministic and
    /// ignores it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write one sentence embedding per LWE sentence (EMB1 format).
    Embed {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Also write per-token importance weights as TSV.
        #[arg(long, value_name = "TSV")]
        dump_token_weights: Option<PathBuf>,
        #[command(flatten)]
        fusion: FusionArgs,
    },
    /// Correlate pair cosine similarities with gold scores.
    EvalSts {
        /// LWE file; repeat together with --gold for several datasets.
        #[arg(long, required = true)]
        input: Vec<PathBuf>,
        /// Gold TSV matching each --input, in order.
        #[arg(long, required = true)]
        gold: Vec<PathBuf>,
        /// JSON report path.
        #[arg(long)]
        output: PathBuf,
        /// Grid axis, e.g. omega=0,0.5,1 or window=1..4 or start-layer=0..6.
        #[arg(long, value_parser = args::parse_sweep)]
        sweep: Vec<args::Sweep>,
        #[command(flatten)]
        fusion: FusionArgs,
    },
    /// Layer similarity maps, offset curves and word variance rankings.
    Analyze {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output_dir: PathBuf,
        /// Minimum occurrences for a word to enter the variance table.
        #[arg(long, default_value_t = layerfuse::analysis::DEFAULT_MIN_OCCURRENCES)]
        min_occurrences: usize,
    },
    /// Per-sentence fusion time for the QR and SVD novelty backends.
    Bench {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 5)]
        trials: usize,
        /// Optional JSON report path.
        #[arg(long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        fusion: FusionArgs,
    },
    /// Generate a synthetic LWE file (and gold TSV for pairs).
    Synth {
        #[arg(long)]
        output: PathBuf,
        /// Emit this many STS pairs and a gold TSV.
        #[arg(
            long,
            conflicts_with = "sentences",
            required_unless_present = "sentences"
        )]
        pairs: Option<usize>,
        /// Emit this many unpaired sentences.
        #[arg(long)]
        sentences: Option<usize>,
        /// Gold TSV path for --pairs (default: output with .tsv extension).
        #[arg(long)]
        gold: Option<PathBuf>,
        #[arg(long, default_value_t = 13)]
        layers: usize,
        #[arg(long, default_value_t = 768)]
        dim: usize,
        #[arg(long, default_value_t = 200)]
        vocabulary: usize,
    },
}

/// Exit status for a failure of the given class.
fn exit_status(class: ErrorClass) -> u8 {
    match class {
        ErrorClass::Usage => 2,
        ErrorClass::Data => 3,
        ErrorClass::Numerical => 4,
    }
}

fn report(err: &anyhow::Error) -> u8 {
    let (code, class) = err
        .chain()
        .find_map(|e| {
            if let Some(e) = e.downcast_ref::<layerfuse::Error>() {
                Some((e.code(), e.class()))
            } else {
                e.downcast_ref::<commands::UsageError>()
                    .map(|_| ("USAGE", ErrorClass::Usage))
            }
        })
        .unwrap_or(("IO_FAILURE", ErrorClass::Data));
    let msg = format!("{err:#}").replace('\n', " ");
    let _ = writeln!(std::io::stderr(), "error[{code}]: {msg}");
    exit_status(class)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.kind().to_string();
            let _ = writeln!(std::io::stderr(), "error[USAGE]: {msg}");
            let _ = e.print();
            return ExitCode::from(2);
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            let _ = writeln!(std::io::stderr(), "error[USAGE]: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Embed {
            input,
            output,
            dump_token_weights,
            fusion,
        } => commands::embed(
            &input,
            &output,
            dump_token_weights.as_deref(),
            &fusion.config(),
        ),
        Command::EvalSts {
            input,
            gold,
            output,
            sweep,
            fusion,
        } => commands::eval_sts(&input, &gold, &output, &sweep, &fusion.config()),
        Command::Analyze {
            input,
            output_dir,
            min_occurrences,
        } => commands::analyze(&input, &output_dir, min_occurrences),
        Command::Bench {
            input,
            trials,
            output,
            fusion,
        } => commands::bench(&input, trials, output.as_deref(), &fusion.config()),
        Command::Synth {
            output,
            pairs,
            sentences,
            gold,
            layers,
            dim,
            vocabulary,
        } => commands::synth(&commands::SynthArgs {
            output,
            pairs,
            sentences,
            gold,
            layers,
            dim,
            vocabulary,
            seed: cli.seed,
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => ExitCode::from(report(&e)),
    }
}
