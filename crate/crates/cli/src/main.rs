use std::collections::BTreeMap;
use std::io::{self, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use morphforge::pipeline::{
    evaluate_task, extract, read_analyzer, serve, train_task, PipelineConfig, PipelineError,
    Session, EXIT_OK, EXIT_USAGE,
};
use morphforge::seq2seq::load_checkpoint;
use morphforge::Model;

#[derive(Parser, Debug)]
#[command(
    name = "morphforge",
    version,
    about = "Morphological models from finite-state transducers"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Flat `key = value` configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Training profile: desk or faithful
    #[arg(long, global = true)]
    profile: Option<String>,
    /// Analyzer transducer in AT&T format
    #[arg(long, global = true)]
    fst: Option<PathBuf>,
    /// Task: analyze, lemmatize or generate
    #[arg(long, global = true)]
    task: Option<String>,
    /// Number of hypotheses for eval candidates and run mode
    #[arg(long = "n-best", global = true)]
    n_best: Option<usize>,
    /// Any configuration key, as `key=value`; repeatable
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the task datasets from the analyzer and lexicon
    Extract,
    /// Train one model per configured task, or only `--task`
    Train,
    /// Evaluate trained models on the test split
    Eval,
    /// Answer words read from stdin, one JSON line each
    Run {
        /// Checkpoint for the task model (default: the trained one)
        #[arg(long)]
        model: Option<PathBuf>,
    },
}

fn resolve(common: &Common) -> Result<PipelineConfig, PipelineError> {
    let cwd = Path::new(".");
    let mut config = match &common.config {
        Some(path) => PipelineConfig::from_file(path)?,
        None => PipelineConfig::default(),
    };
    for pair in &common.set {
        let (key, value) = pair.split_once('=').ok_or_else(|| {
            PipelineError::Usage(format!("--set expects KEY=VALUE, got {pair:?}"))
        })?;
        config.set(key.trim(), value.trim(), cwd)?;
    }
    if let Some(seed) = common.seed {
        config.set("seed", &seed.to_string(), cwd)?;
    }
    if let Some(profile) = &common.profile {
        config.set("profile", profile, cwd)?;
    }
    if let Some(fst) = &common.fst {
        config.analyzer = Some(fst.clone());
    }
    if let Some(task) = &common.task {
        config.set("tasks", task, cwd)?;
    }
    if let Some(n) = common.n_best {
        config.set("n_best", &n.to_string(), cwd)?;
    }
    Ok(config)
}

fn run_mode(config: &PipelineConfig, model: Option<&Path>) -> Result<(), PipelineError> {
    let [task] = config.tasks[..] else {
        return Err(PipelineError::Usage("run needs exactly one --task".into()));
    };
    let analyzer_path = config.analyzer.as_deref().ok_or_else(|| {
        PipelineError::Usage("run needs --fst or `analyzer` in the config".into())
    })?;
    let analyzer = read_analyzer(analyzer_path)?;
    let checkpoint = match model {
        Some(path) => Some(path.to_path_buf()),
        None => {
            let path = config.checkpoint_path(task);
            if path.exists() {
                Some(path)
            } else {
                warn!(
                    "no {task} model at {}; answering from the transducer only",
                    path.display()
                );
                None
            }
        }
    };
    let mut models = BTreeMap::new();
    if let Some(path) = checkpoint {
        let m: Model = load_checkpoint(&path)?;
        if m.task() != task {
            return Err(PipelineError::Data(format!(
                "{} holds a {} model, expected {task}",
                path.display(),
                m.task()
            )));
        }
        models.insert(task, m);
    }
    let session = Session::new(analyzer, models);
    let stdin = io::stdin();
    let stdout = io::stdout();
    let n = serve(
        &session,
        task,
        config.n_best,
        stdin.lock(),
        BufWriter::new(stdout.lock()),
    )?;
    info!("answered {n} queries");
    Ok(())
}

fn execute(cli: &Cli) -> Result<(), PipelineError> {
    let config = resolve(&cli.common)?;
    match &cli.command {
        Command::Extract => {
            let manifest = extract(&config)?;
            for w in &manifest.warnings {
                warn!("{w}");
            }
            Ok(())
        }
        Command::Train => {
            for &task in &config.tasks {
                train_task(&config, task, None)?;
            }
            Ok(())
        }
        Command::Eval => {
            for &task in &config.tasks {
                let report = evaluate_task(&config, task)?;
                println!(
                    "{task}\taccuracy {}\t{} {}",
                    report.accuracy_display, report.error_metric, report.error_rate_display
                );
            }
            Ok(())
        }
        Command::Run { model } => run_mode(&config, model.as_deref()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                EXIT_USAGE as u8
            } else {
                EXIT_OK as u8
            });
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::from(EXIT_OK as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
