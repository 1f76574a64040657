use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use selfbackhaul::experiment::{self, presets, ExperimentSpec, ResultTable};

/// Monte Carlo experiments for full-duplex self-backhauled small-cell networks.
#[derive(Parser)]
#[command(name = "selfbackhaul", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON spec file.
    Run {
        spec: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run a partial-CSI comparison and write percentages.csv.
    CompareCsi {
        spec: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run a built-in spec: desk, desk-csi or reference (slow).
    Preset {
        name: String,
        /// Print the spec as JSON instead of running it.
        #[arg(long)]
        dump: bool,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Master seed (overrides network.seed).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory (overrides output_dir).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn apply(&self, spec: &mut ExperimentSpec) {
        if let Some(s) = self.seed {
            spec.network.seed = s;
        }
        if let Some(w) = self.workers {
            spec.workers = w;
        }
        if let Some(o) = &self.out {
            spec.output_dir = o.clone();
        }
    }
}

fn load(path: &PathBuf, common: &Common) -> Result<ExperimentSpec> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut spec: ExperimentSpec = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    common.apply(&mut spec);
    spec.validate()?;
    Ok(spec)
}

fn print_table(table: &ResultTable) {
    println!("{:<18} {:>7} {:>7} {:>9} {:>5} {:>12} {:>10} {:>8}", "algorithm", "P^M", "P^S", "cluster", "runs", "rate(b/s/Hz)", "stderr", "iters");
    for r in &table.rows {
        println!(
            "{:<18} {:>7} {:>7} {:>9} {:>5} {:>12.4} {:>10.4} {:>8.2}",
            r.algorithm.name(),
            r.mbs_power_dbm,
            r.sbs_power_dbm,
            r.cluster,
            r.runs,
            r.mean_rate,
            r.std_error,
            r.mean_iterations
        );
    }
}

fn finish(table: &ResultTable, spec: &ExperimentSpec) -> ExitCode {
    print_table(table);
    let failed = table.failure_fraction();
    log::info!("outputs written to {}", spec.output_dir.display());
    if failed > 0.01 {
        eprintln!("{:.1}% of runs failed", 100.0 * failed);
        return ExitCode::FAILURE;
    }
    ExitCode::SUCCESS
}

fn compare(spec: &ExperimentSpec) -> Result<ExitCode> {
    let (table, rows) = experiment::compare_partial_csi(spec)?;
    let code = finish(&table, spec);
    println!();
    for r in rows {
        let pct = r.percentage.map_or_else(|| "n/a".to_string(), |p| format!("{p:.2}%"));
        println!("{:<18} C={:<3} P^M={:<5} {}", r.algorithm.name(), r.cluster, r.mbs_power_dbm, pct);
    }
    Ok(code)
}

fn main() -> Result<ExitCode> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Run { spec, common } => {
            let spec = load(&spec, &common)?;
            let table = experiment::run_experiment(&spec)?;
            Ok(finish(&table, &spec))
        }
        Command::CompareCsi { spec, common } => compare(&load(&spec, &common)?),
        Command::Preset { name, dump, common } => {
            let Some(mut spec) = presets::by_name(&name) else {
                bail!("unknown preset {name:?}; choose one of {}", presets::NAMES.join(", "));
            };
            common.apply(&mut spec);
            if dump {
                println!("{}", serde_json::to_string_pretty(&spec)?);
                return Ok(ExitCode::SUCCESS);
            }
            spec.validate()?;
            if name == "reference" {
                log::warn!("the reference preset is slow; expect minutes per trial");
            }
            if presets::is_comparison(&name) {
                compare(&spec)
            } else {
                let table = experiment::run_experiment(&spec)?;
                Ok(finish(&table, &spec))
            }
        }
    }
}
