//! Single runs and seed ensembles.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use ioeco_core::economy::ModelConstants;
use ioeco_core::engine::write_reports_csv;
use ioeco_core::forecast::{
    ensemble_stats, filter_seeds, point_to_point_growth, run_seed, EnsembleResult, ExcludedSeed,
    Exclusion, FilterPolicy, FilterReport, GrowthFit, SeedRun, SizeDistribution, GROWTH_WINDOW,
};
use ioeco_core::io_table::{
    gdp_target, parse_country_params, parse_figaro_csv, parse_sam_csv, repair_params, repair_sam,
    FigaroOptions,
};
use ioeco_core::{CountryParams, Model, RepairReport, SocialAccountingMatrix};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{RunConfig, SamFormat};
use crate::error::CliError;

/// Everything a run needs, loaded and validated before any output is
/// written.
pub struct Inputs {
    pub config: RunConfig,
    pub sam: SocialAccountingMatrix,
    pub params: CountryParams,
    pub repairs: RepairReport,
    pub model: Arc<Model>,
}

impl Inputs {
    pub fn load(config: RunConfig) -> Result<Self, CliError> {
        let sam = match config.sam_format {
            SamFormat::Sam => parse_sam_csv(&config.sam_path),
            SamFormat::Figaro => parse_figaro_csv(
                &config.sam_path,
                config.country.as_deref().unwrap_or_default(),
                &FigaroOptions::default(),
            ),
        }
        .map_err(|e| CliError::input(&config.sam_path, e))?;
        let params = parse_country_params(&config.params_path)
            .map_err(|e| CliError::input(&config.params_path, e))?;
        let (sam, mut repairs) = repair_sam(sam, &config.repair);
        let (params, param_repairs) = repair_params(params);
        repairs.merge(param_repairs);
        params
            .validate()
            .map_err(|e| CliError::input(&config.params_path, e))?;
        let constants = ModelConstants::with_scale(config.scale);
        let model = Model::new(&sam, &params, &constants)
            .map_err(|e| CliError::input(&config.sam_path, e))?;
        Ok(Inputs {
            config,
            sam,
            params,
            repairs,
            model: Arc::new(model),
        })
    }

    pub fn gdp_target(&self) -> f64 {
        gdp_target(&self.sam)
    }

    pub fn filter_policy(&self) -> FilterPolicy {
        FilterPolicy {
            outlier_growth: self.config.outlier_filter,
            ..FilterPolicy::default()
        }
    }
}

/// Contents of a seed's `summary.json`.
#[derive(Debug, Serialize)]
pub struct RunSummary<'a> {
    pub name: &'a str,
    pub seed: u64,
    pub scale: usize,
    pub converged: bool,
    pub collapsed: bool,
    pub free_market_month: Option<i64>,
    pub calibration_months: usize,
    pub free_market_months: usize,
    pub growth: Option<GrowthFit>,
    pub point_to_point_growth: Option<f64>,
    pub mean_annual_nominal_gdp: Option<f64>,
    pub gdp_target: f64,
    pub mean_unemployment: Option<f64>,
    pub initial_micro_firm_share: Option<f64>,
    pub final_micro_firm_share: Option<f64>,
    pub firm_sizes: Option<SizeDistribution>,
    pub exclusions: Vec<Exclusion>,
    pub repairs: &'a RepairReport,
}

pub fn seed_dir(root: &Path, seed: u64) -> PathBuf {
    root.join(format!("seed-{seed}"))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

fn create_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

fn csv_bytes(
    f: impl FnOnce(&mut Vec<u8>) -> csv::Result<()>,
    path: &Path,
) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    f(&mut buf).map_err(|e| CliError::io(path, std::io::Error::other(e)))?;
    Ok(buf)
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("summaries serialize");
    out.push(b'\n');
    out
}

/// Writes the trace, monthly reports and summary of one seed.
pub fn write_seed(
    inputs: &Inputs,
    run: &SeedRun,
    exclusions: Vec<Exclusion>,
    dir: &Path,
) -> Result<(), CliError> {
    create_dir(dir)?;
    let trace_path = dir.join("calibration_trace.csv");
    let trace = csv_bytes(|b| run.trace.write_csv(b), &trace_path)?;
    write_file(&trace_path, &trace)?;

    let monthly_path = dir.join("monthly.csv");
    let reports: Vec<_> = run
        .calibration
        .iter()
        .chain(&run.monthly)
        .cloned()
        .collect();
    let monthly = csv_bytes(
        |b| write_reports_csv(&reports, &inputs.sam.sectors, b),
        &monthly_path,
    )?;
    write_file(&monthly_path, &monthly)?;

    let real = run.real_gdp();
    let has_fm = !run.monthly.is_empty();
    let summary = RunSummary {
        name: &inputs.config.name,
        seed: run.seed,
        scale: inputs.config.scale,
        converged: run.converged,
        collapsed: run.collapsed,
        free_market_month: run.free_market_month,
        calibration_months: run.trace.len(),
        free_market_months: run.monthly.len(),
        growth: run.growth().ok(),
        point_to_point_growth: point_to_point_growth(&real, GROWTH_WINDOW).ok(),
        mean_annual_nominal_gdp: has_fm.then(|| run.mean_annual_nominal_gdp()),
        gdp_target: inputs.gdp_target(),
        mean_unemployment: has_fm.then(|| run.mean_unemployment()),
        initial_micro_firm_share: run.trace.initial_micro_firm_share,
        final_micro_firm_share: run.trace.rows.last().and_then(|r| r.micro_firm_share),
        firm_sizes: run.firm_sizes,
        exclusions,
        repairs: &inputs.repairs,
    };
    write_file(&dir.join("summary.json"), &to_json(&summary))
}

#[derive(Debug, Serialize)]
struct Metadata<'a> {
    command: &'a str,
    config: &'a str,
    version: &'a str,
    unix_time: u64,
}

/// Records when and how a run directory was produced. The only output
/// that varies between identical runs.
pub fn write_metadata(root: &Path, command: &str, config_path: &Path) -> Result<(), CliError> {
    let unix_time = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let meta = Metadata {
        command,
        config: &config_path.display().to_string(),
        version: env!("CARGO_PKG_VERSION"),
        unix_time,
    };
    write_file(&root.join("metadata.json"), &to_json(&meta))
}

fn exclusions_of(report: &FilterReport, seed: u64) -> Vec<Exclusion> {
    report
        .excluded
        .iter()
        .find(|e| e.seed == seed)
        .map(|e| e.reasons.clone())
        .unwrap_or_default()
}

/// Runs one seed and writes its directory under `root`. A calibration
/// timeout still writes the trace before failing with `Timeout`.
pub fn run_single(inputs: &Inputs, seed: u64, root: &Path) -> Result<SeedRun, CliError> {
    let c = &inputs.config;
    let run = run_seed(
        inputs.model.clone(),
        seed,
        &c.schedule,
        c.free_market_months,
        c.timeline.clone(),
    )
    .map_err(|e| CliError::Internal(format!("seed {seed}: {e}")))?;
    let (_, report) = filter_seeds(
        std::slice::from_ref(&run),
        inputs.gdp_target(),
        &inputs.filter_policy(),
    );
    write_seed(
        inputs,
        &run,
        exclusions_of(&report, seed),
        &seed_dir(root, seed),
    )?;
    if !run.converged {
        return Err(CliError::Timeout {
            seed,
            months: run.trace.len() as i64,
        });
    }
    Ok(run)
}

/// Contents of `ensemble.json`.
#[derive(Debug, Serialize)]
pub struct EnsembleSummary {
    pub name: String,
    pub scale: usize,
    pub seeds: Vec<u64>,
    pub gdp_target: f64,
    pub policy: FilterPolicy,
    pub filter: FilterReport,
    pub stats: Option<EnsembleResult>,
}

pub struct EnsembleOutcome {
    pub runs: Vec<SeedRun>,
    pub summary: EnsembleSummary,
}

/// Runs every configured seed on up to `jobs` threads, writes per-seed
/// directories and the ensemble summary. A seed that fails is recorded in
/// the filter report; the others still run.
pub fn run_ensemble(
    inputs: &Inputs,
    jobs: usize,
    root: &Path,
) -> Result<EnsembleOutcome, CliError> {
    let c = &inputs.config;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    let results: Vec<Result<SeedRun, String>> = pool.install(|| {
        c.seeds
            .par_iter()
            .map(|&seed| {
                run_seed(
                    inputs.model.clone(),
                    seed,
                    &c.schedule,
                    c.free_market_months,
                    c.timeline.clone(),
                )
                .map_err(|e| e.to_string())
            })
            .collect()
    });

    let mut runs = Vec::new();
    let mut failed = Vec::new();
    for (seed, r) in c.seeds.iter().zip(results) {
        match r {
            Ok(run) => runs.push(run),
            Err(message) => failed.push(ExcludedSeed {
                seed: *seed,
                reasons: vec![Exclusion::Failed { message }],
            }),
        }
    }
    let policy = inputs.filter_policy();
    let (kept, mut filter) = filter_seeds(&runs, inputs.gdp_target(), &policy);
    let stats = ensemble_stats(&kept).ok();
    filter.excluded.extend(failed);
    filter
        .excluded
        .sort_by_key(|e| c.seeds.iter().position(|s| *s == e.seed));

    pool.install(|| {
        runs.par_iter()
            .map(|run| {
                write_seed(
                    inputs,
                    run,
                    exclusions_of(&filter, run.seed),
                    &seed_dir(root, run.seed),
                )
            })
            .collect::<Result<Vec<()>, CliError>>()
    })?;

    let summary = EnsembleSummary {
        name: c.name.clone(),
        scale: c.scale,
        seeds: c.seeds.clone(),
        gdp_target: inputs.gdp_target(),
        policy,
        filter,
        stats,
    };
    write_ensemble_files(&summary, &runs, root)?;
    Ok(EnsembleOutcome { runs, summary })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn write_ensemble_files(
    summary: &EnsembleSummary,
    runs: &[SeedRun],
    root: &Path,
) -> Result<(), CliError> {
    create_dir(root)?;
    write_file(&root.join("ensemble.json"), &to_json(summary))?;

    let path = root.join("ensemble.csv");
    let bytes = csv_bytes(
        |buf| {
            let mut w = csv::Writer::from_writer(buf);
            w.write_record([
                "seed",
                "converged",
                "collapsed",
                "kept",
                "growth",
                "r2",
                "point_to_point_growth",
                "mean_annual_nominal_gdp",
                "mean_unemployment",
                "excluded_by",
            ])?;
            for &seed in &summary.seeds {
                let run = runs.iter().find(|r| r.seed == seed);
                let fit = run.and_then(|r| r.growth().ok());
                let has_fm = run.is_some_and(|r| !r.monthly.is_empty());
                let reasons: Vec<String> = exclusions_of(&summary.filter, seed)
                    .iter()
                    .map(|e| e.rule().to_string())
                    .collect();
                w.write_record([
                    seed.to_string(),
                    run.is_some_and(|r| r.converged).to_string(),
                    run.is_some_and(|r| r.collapsed).to_string(),
                    summary.filter.kept.contains(&seed).to_string(),
                    fmt_opt(fit.map(|f| f.growth)),
                    fmt_opt(fit.map(|f| f.r2)),
                    fmt_opt(
                        run.and_then(|r| point_to_point_growth(&r.real_gdp(), GROWTH_WINDOW).ok()),
                    ),
                    fmt_opt(run.filter(|_| has_fm).map(|r| r.mean_annual_nominal_gdp())),
                    fmt_opt(run.filter(|_| has_fm).map(|r| r.mean_unemployment())),
                    reasons.join(";"),
                ])?;
            }
            w.flush()?;
            Ok(())
        },
        &path,
    )?;
    write_file(&path, &bytes)?;

    let path = root.join("ensemble_stats.csv");
    let bytes = csv_bytes(
        |buf| {
            let mut w = csv::Writer::from_writer(buf);
            w.write_record(["statistic", "value"])?;
            let s = summary.stats.as_ref();
            w.write_record([
                "n".to_string(),
                s.map(|s| s.growths.len()).unwrap_or(0).to_string(),
            ])?;
            w.write_record(["mean_growth".to_string(), fmt_opt(s.map(|s| s.mean_growth))])?;
            w.write_record(["sd".to_string(), fmt_opt(s.and_then(|s| s.sd))])?;
            w.write_record(["sem".to_string(), fmt_opt(s.and_then(|s| s.sem))])?;
            w.flush()?;
            Ok(())
        },
        &path,
    )?;
    write_file(&path, &bytes)?;

    let path = root.join("running_mean.csv");
    let bytes = csv_bytes(
        |buf| {
            let mut w = csv::Writer::from_writer(buf);
            w.write_record(["k", "seed", "growth", "running_mean"])?;
            if let Some(s) = &summary.stats {
                for (k, ((seed, g), m)) in s
                    .kept_seeds
                    .iter()
                    .zip(&s.growths)
                    .zip(&s.running_mean)
                    .enumerate()
                {
                    w.write_record([
                        (k + 1).to_string(),
                        seed.to_string(),
                        g.to_string(),
                        m.to_string(),
                    ])?;
                }
            }
            w.flush()?;
            Ok(())
        },
        &path,
    )?;
    write_file(&path, &bytes)
}
