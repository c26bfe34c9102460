use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::run::{run_prepared, Prepared, RunRecord};
use crate::error::{Error, Result};
use crate::optim::{OptimizerKind, PruningMode};

/// One axis of an ablation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sweep {
    Ratio(Vec<f64>),
    AccumulationWindow(Vec<u32>),
    PruningWindow(Vec<u32>),
    Optimizer(Vec<OptimizerKind>),
    Mode(Vec<PruningMode>),
}

impl Sweep {
    pub fn name(&self) -> &'static str {
        match self {
            Sweep::Ratio(_) => "ratio",
            Sweep::AccumulationWindow(_) => "accumulation_window",
            Sweep::PruningWindow(_) => "pruning_window",
            Sweep::Optimizer(_) => "optimizer",
            Sweep::Mode(_) => "mode",
        }
    }

    fn len(&self) -> usize {
        match self {
            Sweep::Ratio(v) => v.len(),
            Sweep::AccumulationWindow(v) | Sweep::PruningWindow(v) => v.len(),
            Sweep::Optimizer(v) => v.len(),
            Sweep::Mode(v) => v.len(),
        }
    }

    /// Applies value `i` to `config` and returns its label.
    fn apply(&self, i: usize, config: &mut ExperimentConfig) -> String {
        match self {
            Sweep::Ratio(v) => {
                config.pruning.ratio = Some(v[i]);
                v[i].to_string()
            }
            Sweep::AccumulationWindow(v) => {
                config.pruning.accumulation_window = Some(v[i]);
                v[i].to_string()
            }
            Sweep::PruningWindow(v) => {
                config.pruning.pruning_window = Some(v[i]);
                v[i].to_string()
            }
            Sweep::Optimizer(v) => {
                config.optimizer.kind = v[i];
                v[i].to_string()
            }
            Sweep::Mode(v) => {
                config.pruning.mode = Some(v[i]);
                v[i].to_string()
            }
        }
    }

    /// Parses `name=v1,v2,...`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (name, values) = spec
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("sweep `{spec}` is not name=v1,v2,...")))?;
        let items: Vec<&str> = values.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
        let num = |s: &str| s.parse::<f64>().map_err(|e| Error::Config(format!("sweep value `{s}`: {e}")));
        let int = |s: &str| s.parse::<u32>().map_err(|e| Error::Config(format!("sweep value `{s}`: {e}")));
        let sweep = match name.trim() {
            "ratio" | "r" => Sweep::Ratio(items.iter().map(|s| num(s)).collect::<Result<_>>()?),
            "accumulation_window" | "w_a" => {
                Sweep::AccumulationWindow(items.iter().map(|s| int(s)).collect::<Result<_>>()?)
            }
            "pruning_window" | "w_p" => Sweep::PruningWindow(items.iter().map(|s| int(s)).collect::<Result<_>>()?),
            "optimizer" => Sweep::Optimizer(items.iter().map(|s| s.parse()).collect::<Result<_>>()?),
            "mode" => Sweep::Mode(items.iter().map(|s| s.parse()).collect::<Result<_>>()?),
            other => return Err(Error::Config(format!("unknown sweep axis `{other}`"))),
        };
        if sweep.len() == 0 {
            return Err(Error::Config(format!("sweep `{spec}` has no values")));
        }
        Ok(sweep)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    /// One label per sweep axis, in sweep order.
    pub values: Vec<String>,
    pub mean_val_accuracy: f64,
    pub std_val_accuracy: f64,
    pub mean_circuit_runs: f64,
    pub runs: Vec<RunRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationTable {
    pub axes: Vec<String>,
    pub rows: Vec<AblationRow>,
}

impl AblationTable {
    pub fn to_tsv(&self) -> String {
        let mut out = self.axes.join("\t");
        out.push_str("\tmean_val_acc\tstd_val_acc\tmean_circuit_runs\tseeds\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{}\t{:.4}\t{:.4}\t{:.0}\t{}",
                r.values.join("\t"),
                r.mean_val_accuracy,
                r.std_val_accuracy,
                r.mean_circuit_runs,
                r.runs.len()
            );
        }
        out
    }
}

/// Sample mean and standard deviation (N − 1).
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub const MIN_ABLATION_SEEDS: usize = 3;

/// Runs the cartesian product of `sweeps` over every seed of `base`.
pub fn ablation_suite(base: &ExperimentConfig, sweeps: &[Sweep]) -> Result<AblationTable> {
    let prepared = Prepared::load(base)?;
    ablation_on(base, sweeps, &prepared)
}

pub fn ablation_on(base: &ExperimentConfig, sweeps: &[Sweep], prepared: &Prepared) -> Result<AblationTable> {
    if base.seeds.len() < MIN_ABLATION_SEEDS {
        return Err(Error::Config(format!(
            "ablations need at least {MIN_ABLATION_SEEDS} seeds, got {}",
            base.seeds.len()
        )));
    }
    let mut rows = Vec::new();
    let total: usize = sweeps.iter().map(Sweep::len).product();
    for combo in 0..total {
        let mut config = base.clone();
        config.output_dir = None;
        let mut rest = combo;
        let mut values = Vec::with_capacity(sweeps.len());
        for s in sweeps.iter().rev() {
            values.push(s.apply(rest % s.len(), &mut config));
            rest /= s.len();
        }
        values.reverse();
        config.validate()?;
        let runs = run_prepared(&config, prepared)?;
        let accs: Vec<f64> = runs.iter().map(|r| r.final_val_accuracy).collect();
        let (mean, std) = mean_std(&accs);
        let mean_runs = runs.iter().map(|r| r.circuit_runs as f64).sum::<f64>() / runs.len() as f64;
        rows.push(AblationRow {
            values,
            mean_val_accuracy: mean,
            std_val_accuracy: std,
            mean_circuit_runs: mean_runs,
            runs,
        });
    }
    Ok(AblationTable {
        axes: sweeps.iter().map(|s| s.name().to_string()).collect(),
        rows,
    })
}
