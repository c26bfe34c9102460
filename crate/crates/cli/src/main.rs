use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use qnn_core::bench::{self, Checkpoint, ExperimentConfig, Sweep, DATA_ROOT_ENV};
use qnn_core::data::Task;

#[derive(Parser)]
#[command(name = "qnn", version, about = "Train and benchmark quantum neural networks on a simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Experiment config (TOML).
    #[arg(short, long, conflicts_with = "task")]
    config: Option<PathBuf>,
    /// Use the defaults for a task instead of a config file.
    #[arg(short, long)]
    task: Option<Task>,
    /// Override a config key, e.g. `--set pruning.ratio=0.7`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Dataset root; takes precedence over the config and the environment.
    #[arg(long, env = DATA_ROOT_ENV)]
    data_root: Option<PathBuf>,
}

impl ConfigArgs {
    fn load(&self) -> Result<ExperimentConfig> {
        let text = match (&self.config, self.task) {
            (Some(path), _) => std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?,
            (None, Some(task)) => format!("task = \"{task}\"\n"),
            (None, None) => bail!("pass --config FILE or --task NAME"),
        };
        let overrides = self
            .overrides
            .iter()
            .map(|kv| {
                kv.split_once('=')
                    .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                    .with_context(|| format!("override `{kv}` is not KEY=VALUE"))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut config = ExperimentConfig::from_toml_with_overrides(&text, &overrides)?;
        if let Some(root) = &self.data_root {
            config.data_root = Some(root.clone());
        }
        Ok(config)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Train every seed of an experiment and write traces and a summary.
    Train {
        #[command(flatten)]
        config: ConfigArgs,
        /// Output directory (overrides `output_dir`).
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Sweep pruning or optimizer settings and report mean ± std accuracy.
    Ablate {
        #[command(flatten)]
        config: ConfigArgs,
        /// Sweep axis, e.g. `ratio=0,0.3,0.5` or `optimizer=sgd,momentum,adam`.
        /// Repeat for a cartesian product.
        #[arg(short, long = "sweep", required = true)]
        sweeps: Vec<String>,
        /// Write the table here instead of stdout.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Time noise-free statevector execution against qubit count.
    Scale {
        #[arg(short, long, value_delimiter = ',', default_value = "4,6,8,10,12,14,16,18,20")]
        qubits: Vec<usize>,
        #[arg(short, long, default_value_t = bench::DEFAULT_REPETITIONS)]
        repetitions: usize,
        /// Statevector memory budget in MiB; larger registers are skipped.
        #[arg(long, default_value_t = bench::DEFAULT_MEMORY_BUDGET >> 20)]
        memory_mib: u64,
    },
    /// Recompute validation accuracy from a parameter checkpoint.
    Eval {
        checkpoint: PathBuf,
        #[arg(long, env = DATA_ROOT_ENV, default_value = bench::DEFAULT_DATA_ROOT)]
        data_root: PathBuf,
    },
}

fn train(config: ConfigArgs, out: Option<PathBuf>) -> Result<()> {
    let mut config = config.load()?;
    if out.is_some() {
        config.output_dir = out;
    }
    if config.output_dir.is_none() {
        config.output_dir = Some(PathBuf::from("runs").join(config.task.name()));
    }
    let records = bench::run_experiment(&config)?;
    print!("{}", bench::summary_tsv(&records));
    if let Some(dir) = &config.output_dir {
        eprintln!("wrote {}", dir.display());
    }
    Ok(())
}

fn ablate(config: ConfigArgs, sweeps: &[String], out: Option<&Path>) -> Result<()> {
    let config = config.load()?;
    let sweeps = sweeps.iter().map(|s| Sweep::parse(s)).collect::<Result<Vec<_>, _>>()?;
    let table = bench::ablation_suite(&config, &sweeps)?;
    match out {
        Some(path) => {
            std::fs::write(path, table.to_tsv())?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{}", table.to_tsv()),
    }
    Ok(())
}

fn scale(qubits: &[usize], repetitions: usize, memory_mib: u64) -> Result<()> {
    let rows = bench::scaling_bench(qubits, repetitions, memory_mib << 20)?;
    for r in rows.iter().filter(|r| r.mean_secs.is_none()) {
        eprintln!("skipping {} qubits: {} bytes exceeds the memory budget", r.qubits, r.memory_bytes);
    }
    print!("{}", bench::scaling_tsv(&rows));
    Ok(())
}

fn eval(path: &Path, data_root: &Path) -> Result<()> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let ckpt: Checkpoint = serde_json::from_str(&text)?;
    let e = bench::evaluate_checkpoint(&ckpt, data_root)?;
    println!("val_acc\tval_acc_noise_free");
    println!("{:.4}\t{:.4}", e.val_accuracy, e.val_accuracy_noise_free);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train { config, out } => train(config, out),
        Command::Ablate { config, sweeps, out } => ablate(config, &sweeps, out.as_deref()),
        Command::Scale {
            qubits,
            repetitions,
            memory_mib,
        } => scale(&qubits, repetitions, memory_mib),
        Command::Eval { checkpoint, data_root } => eval(&checkpoint, &data_root),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
