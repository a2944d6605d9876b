use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ioeco_cli::panel::{run_panel, PanelConfig};
use ioeco_cli::run::{run_ensemble, run_single, write_metadata, Inputs};
use ioeco_cli::{exit, CliError, Overrides, RunConfig};

/// Agent-based input-output economy: calibrate against a social accounting
/// matrix and forecast real GDP growth.
///
/// Exit codes: 0 success, 1 I/O error, 2 invalid config or input,
/// 3 calibration timeout, 4 every ensemble seed excluded, 5 internal error.
#[derive(Debug, Parser)]
#[command(name = "ioeco", version)]
struct Cli {
    /// Directory under which run directories are created.
    #[arg(long, env = "IOECO_OUTPUT_ROOT", default_value = "runs", global = true)]
    output_root: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Calibrate and run one seed.
    ///
    /// Example: ioeco run --config fixtures/synthetic4.toml --seed 5489
    Run {
        #[command(flatten)]
        common: Common,
        /// Seed to run; defaults to the first seed of the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run every seed and summarize the filtered ensemble.
    ///
    /// Example: ioeco ensemble --config fixtures/synthetic4.toml --jobs 4
    Ensemble {
        #[command(flatten)]
        common: Common,
        /// Seeds to run instead of the config's list; repeatable.
        #[arg(long = "seed")]
        seeds: Vec<u64>,
        #[arg(long, default_value_t = default_jobs())]
        jobs: usize,
    },
    /// Join per-year forecasts to observed growth and score them.
    ///
    /// Example: ioeco panel --config fixtures/austria_panel.toml
    Panel {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = default_jobs())]
        jobs: usize,
    },
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Calibration months before giving up.
    #[arg(long)]
    timeout_months: Option<i64>,
    /// Workers per sector.
    #[arg(long)]
    scale: Option<usize>,
    /// Exclude seeds whose growth exceeds this many percent in magnitude.
    #[arg(long)]
    outlier_filter: Option<f64>,
}

impl Common {
    fn overrides(&self, seeds: Vec<u64>) -> Overrides {
        Overrides {
            seeds,
            timeout_months: self.timeout_months,
            scale: self.scale,
            outlier_filter: self.outlier_filter,
        }
    }
}

fn default_jobs() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

fn load(common: &Common, seeds: Vec<u64>) -> Result<Inputs, CliError> {
    let mut config = RunConfig::load(&common.config)?;
    config.apply(&common.overrides(seeds), &common.config)?;
    Inputs::load(config)
}

fn fmt_pct(v: Option<f64>) -> String {
    v.map(|g| format!("{g:+.2}%"))
        .unwrap_or_else(|| "n/a".into())
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { common, seed } => {
            let inputs = load(&common, seed.into_iter().collect())?;
            let seed = inputs.config.seeds[0];
            let root = cli.output_root.join(&inputs.config.name);
            let result = run_single(&inputs, seed, &root);
            write_metadata(&root, "run", &common.config)?;
            let run = result?;
            let fit = run.growth().ok();
            println!(
                "seed {seed}: free market from month {}, growth {} (r2 {})",
                run.free_market_month.unwrap_or_default(),
                fmt_pct(fit.map(|f| f.growth)),
                fit.map(|f| format!("{:.3}", f.r2))
                    .unwrap_or_else(|| "n/a".into()),
            );
            println!("output: {}", root.display());
            Ok(())
        }
        Command::Ensemble {
            common,
            seeds,
            jobs,
        } => {
            let inputs = load(&common, seeds)?;
            let root = cli.output_root.join(&inputs.config.name);
            let outcome = run_ensemble(&inputs, jobs, &root)?;
            write_metadata(&root, "ensemble", &common.config)?;
            let s = &outcome.summary;
            for e in &s.filter.excluded {
                let rules: Vec<&str> = e.reasons.iter().map(|r| r.rule()).collect();
                println!("seed {} excluded: {}", e.seed, rules.join(", "));
            }
            let Some(stats) = &s.stats else {
                return Err(CliError::EmptyEnsemble);
            };
            println!(
                "{} of {} seeds kept; mean growth {} (sd {}, sem {})",
                stats.growths.len(),
                s.seeds.len(),
                fmt_pct(Some(stats.mean_growth)),
                stats
                    .sd
                    .map(|v| format!("{v:.2}"))
                    .unwrap_or_else(|| "n/a".into()),
                stats
                    .sem
                    .map(|v| format!("{v:.2}"))
                    .unwrap_or_else(|| "n/a".into()),
            );
            println!("output: {}", root.display());
            Ok(())
        }
        Command::Panel { common, jobs } => {
            let panel = PanelConfig::load(&common.config)?;
            let root = cli.output_root.join(&panel.name);
            let report = run_panel(
                &panel,
                &common.config,
                &common.overrides(Vec::new()),
                jobs,
                &root,
            )?;
            print!("{}", report.render());
            println!("output: {}", root.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::from(exit::OK),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
