//! Subcommand implementations. Each one is a thin wrapper over a library
//! call; printed and written numbers come straight from its result.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;

use clap::Args;
use seqclass::divergence::{chernoff, gjs};
use seqclass::exponents::{
    bayes_multiclass_gutman_with_pair, compare_sequential_vs_gutman, COMPARISON_CSV_HEADER,
};
use seqclass::fixedpoint::{exponent_report, min_pairwise_chernoff, multiclass_thetas, solve_fixed_point};
use seqclass::simulator::{estimate, estimate_with_workers, run_trial, ExperimentConfig, TestKind};
use seqclass::{Distribution, Error};

use crate::config::{parse_weights, ConfigFile};
use crate::{CliError, Common, Pair};

/// Scalars that may override the config in `simulate` and `trace`.
#[derive(Debug, Clone, Args)]
pub struct Overrides {
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub n_train: Option<u64>,
    #[arg(long)]
    pub trials: Option<u64>,
}

/// Header of the binary `exponents` table.
pub const EXPONENTS_CSV_HEADER: &str = "gamma,beta_star,theta_star,exponent_type1,exponent_type2,bayes_exponent,chernoff,near_cap,alpha_used,gutman_exponent,margin";

/// Header of the multiclass `exponents` table.
pub const MULTICLASS_CSV_HEADER: &str =
    "gamma,min_theta,seq_exponent,gutman_exponent,margin,pair_first,pair_second";

/// Formats with 12 significant digits.
pub fn sig12(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return v.to_string();
    }
    let magnitude = v.abs().log10().floor();
    if (-4.0..12.0).contains(&magnitude) {
        let decimals = (11.0 - magnitude).max(0.0) as usize;
        format!("{v:.decimals$}")
    } else {
        format!("{v:.11e}")
    }
}

fn load_config(common: &Common) -> Result<ConfigFile, CliError> {
    match &common.config {
        Some(path) => ConfigFile::load(path),
        None => Ok(ConfigFile::default()),
    }
}

fn pair_from(common: &Common, pair: &Pair) -> Result<(ConfigFile, Distribution, Distribution), CliError> {
    let cfg = load_config(common)?;
    match (&pair.p, &pair.q) {
        (Some(p), Some(q)) => {
            let p = Distribution::from_weights(&parse_weights("--p", p)?)
                .map_err(|e| CliError::library("--p", e))?;
            let q = Distribution::new(p.alphabet().clone(), parse_weights("--q", q)?)
                .map_err(|e| CliError::library("--q", e))?;
            Ok((cfg, p, q))
        }
        (Some(_), None) => Err(CliError::validation("--q", "required with --p")),
        (None, Some(_)) => Err(CliError::validation("--p", "required with --q")),
        (None, None) => {
            if common.config.is_none() {
                return Err(CliError::validation("--p", "give --p/--q or a --config"));
            }
            let (_, mut dists) = cfg.distributions()?;
            if dists.len() < 2 {
                return Err(CliError::validation("distributions", "need at least two"));
            }
            let q = dists.swap_remove(1);
            let p = dists.swap_remove(0);
            Ok((cfg, p, q))
        }
    }
}

fn open_out(common: &Common) -> Result<Box<dyn Write>, CliError> {
    Ok(match &common.out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn finish(mut out: Box<dyn Write>) -> Result<(), CliError> {
    out.flush()?;
    Ok(())
}

fn print_value(common: &Common, value: f64) -> Result<(), CliError> {
    let mut out = open_out(common)?;
    writeln!(out, "{}", sig12(value))?;
    finish(out)
}

pub fn gjs_value(common: &Common, pair: &Pair, alpha: Option<f64>) -> Result<(), CliError> {
    let (cfg, p, q) = pair_from(common, pair)?;
    let alpha = alpha
        .or(cfg.alpha)
        .ok_or_else(|| CliError::validation("--alpha", "required"))?;
    let value = gjs(&p, &q, alpha).map_err(|e| match e {
        Error::NegativeAlpha(_) => CliError::library("--alpha", e),
        other => CliError::library("--q", other),
    })?;
    print_value(common, value)
}

pub fn chernoff_information(common: &Common, pair: &Pair) -> Result<(), CliError> {
    let (_, p, q) = pair_from(common, pair)?;
    let value = chernoff(&p, &q).map_err(|e| CliError::library("--q", e))?;
    print_value(common, value)
}

pub fn fixed_point(common: &Common, pair: &Pair, gamma: Option<f64>) -> Result<(), CliError> {
    let (cfg, p, q) = pair_from(common, pair)?;
    let gamma = gamma
        .or(cfg.gamma)
        .ok_or_else(|| CliError::validation("--gamma", "required"))?;
    let root = solve_fixed_point(&p, &q, gamma).map_err(|e| CliError::library("--gamma", e))?;
    print_value(common, root.theta_star)
}

/// Explicit grid, single gamma, config grid, config gamma, or ten evenly
/// spaced points in `(0, cap]`, in that order of preference.
fn gamma_grid(cfg: &ConfigFile, gamma: Option<f64>, grid: Option<&str>, cap: f64) -> Result<Vec<f64>, CliError> {
    if let Some(text) = grid {
        return parse_weights("--gamma-grid", text);
    }
    if let Some(g) = gamma {
        return Ok(vec![g]);
    }
    if let Some(grid) = &cfg.gamma_grid {
        return Ok(grid.clone());
    }
    if let Some(g) = cfg.gamma {
        return Ok(vec![g]);
    }
    Ok((1..=10).map(|k| cap * k as f64 / 10.0).collect())
}

pub fn exponents(common: &Common, pair: &Pair, gamma: Option<f64>, grid: Option<&str>) -> Result<(), CliError> {
    if pair.p.is_none() && pair.q.is_none() {
        let cfg = load_config(common)?;
        let (_, dists) = cfg.distributions()?;
        if dists.len() > 2 {
            return exponents_multiclass(common, &cfg, &dists, gamma, grid);
        }
    }
    let (cfg, p, q) = pair_from(common, pair)?;
    let cap = chernoff(&p, &q).map_err(|e| CliError::library("--q", e))?;
    let grid = gamma_grid(&cfg, gamma, grid, cap)?;
    let reports = grid
        .iter()
        .map(|&g| exponent_report(&p, &q, g))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::library("gamma", e))?;
    let rows = compare_sequential_vs_gutman(&p, &q, &grid).map_err(|e| CliError::library("gamma", e))?;
    let mut out = open_out(common)?;
    writeln!(out, "{EXPONENTS_CSV_HEADER}")?;
    for (r, c) in reports.iter().zip(&rows) {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.gamma,
            r.beta_star,
            r.theta_star,
            r.exponent_type1,
            r.exponent_type2,
            r.bayes_exponent,
            r.chernoff,
            r.near_cap,
            c.alpha_used,
            c.gutman_bayes,
            c.margin
        )?;
    }
    finish(out)
}

fn exponents_multiclass(
    common: &Common,
    cfg: &ConfigFile,
    dists: &[Distribution],
    gamma: Option<f64>,
    grid: Option<&str>,
) -> Result<(), CliError> {
    let cap = min_pairwise_chernoff(dists).map_err(|e| CliError::library("distributions", e))?;
    let grid = gamma_grid(cfg, gamma, grid, cap)?;
    let mut lines = Vec::with_capacity(grid.len());
    for &g in &grid {
        let thetas = multiclass_thetas(dists, g).map_err(|e| CliError::library("gamma", e))?;
        let alpha = thetas.min();
        let (lambda, (i, j)) =
            bayes_multiclass_gutman_with_pair(dists, alpha).map_err(|e| CliError::library("gamma", e))?;
        lines.push(format!("{g},{alpha},{g},{lambda},{},{},{}", g - lambda, i + 1, j + 1));
    }
    let mut out = open_out(common)?;
    writeln!(out, "{MULTICLASS_CSV_HEADER}")?;
    for line in lines {
        writeln!(out, "{line}")?;
    }
    finish(out)
}

pub fn compare_gutman(common: &Common, pair: &Pair, gamma: Option<f64>, grid: Option<&str>) -> Result<(), CliError> {
    let (cfg, p, q) = pair_from(common, pair)?;
    let cap = chernoff(&p, &q).map_err(|e| CliError::library("--q", e))?;
    let grid = gamma_grid(&cfg, gamma, grid, cap)?;
    let rows = compare_sequential_vs_gutman(&p, &q, &grid).map_err(|e| CliError::library("gamma", e))?;
    let mut out = open_out(common)?;
    writeln!(out, "{COMPARISON_CSV_HEADER}")?;
    for row in rows {
        writeln!(out, "{}", row.csv_record())?;
    }
    finish(out)
}

/// Builds the experiment from the config plus flag overrides, with names.
fn experiment(common: &Common, overrides: &Overrides) -> Result<(Vec<String>, ExperimentConfig), CliError> {
    if common.config.is_none() {
        return Err(CliError::validation("--config", "required"));
    }
    let cfg = load_config(common)?;
    let (names, dists) = cfg.distributions()?;
    let seed = common
        .seed
        .or(cfg.seed)
        .ok_or_else(|| CliError::validation("--seed", "a seed is required (flag or config) for reproducibility"))?;
    let gamma = overrides
        .gamma
        .or(cfg.gamma)
        .ok_or_else(|| CliError::validation("gamma", "required"))?;
    let n_train = overrides
        .n_train
        .or(cfg.n_train)
        .ok_or_else(|| CliError::validation("n_train", "required"))?;
    let trials = overrides.trials.or(cfg.trials).unwrap_or(1);
    let true_class = cfg
        .true_class
        .as_deref()
        .map(|name| cfg.class_index(&names, name))
        .transpose()?;
    let experiment = ExperimentConfig {
        distributions: dists,
        true_class,
        gamma,
        n_train,
        cap: cfg.cap,
        trials,
        priors: cfg.priors.clone(),
        master_seed: seed,
        test_kind: cfg.test.unwrap_or(TestKind::Sequential),
    };
    experiment
        .validate()
        .map_err(|e| CliError::library("config", e))?;
    Ok((names, experiment))
}

pub fn simulate(
    common: &Common,
    overrides: &Overrides,
    trace_dir: Option<&Path>,
    trace_limit: u64,
) -> Result<(), CliError> {
    let (names, experiment) = experiment(common, overrides)?;
    let workers = match common.workers {
        Some(w) => Some(w),
        None => load_config(common)?.workers,
    };
    let report = match workers {
        Some(0) => return Err(CliError::validation("--workers", "must be at least 1")),
        Some(w) => estimate_with_workers(&experiment, w),
        None => estimate(&experiment),
    }
    .map_err(|e| CliError::library("config", e))?;

    let mut out = open_out(common)?;
    report.write_csv(&mut out)?;
    finish(out)?;

    let mut err = io::stderr().lock();
    for row in &report.rows {
        writeln!(
            err,
            "{}: error rate {} ({} no-decision), mean T {} vs predicted {}, exponent per test sample {}, per training sample {}",
            names[row.hypothesis],
            row.error_rate,
            row.nodecisions,
            row.mean_t,
            row.predicted_t.map_or("n/a".into(), |v| v.to_string()),
            row.exponent_per_sample.map_or("n/a".into(), |v| v.to_string()),
            row.exponent_per_train.map_or("n/a".into(), |v| v.to_string()),
        )?;
    }
    writeln!(err, "bayesian error {}", report.bayes_error())?;

    if let Some(dir) = trace_dir {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        let hypotheses: Vec<usize> = match experiment.true_class {
            Some(h) => vec![h],
            None => (0..experiment.classes()).collect(),
        };
        for h in hypotheses {
            let mut single = experiment.clone();
            single.true_class = Some(h);
            for trial in 0..experiment.trials.min(trace_limit) {
                let trace = run_trial(&single, trial).map_err(|e| CliError::library("config", e))?;
                let path = dir.join(format!("trace_{}_{trial}.csv", names[h]));
                let file = File::create(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                let mut w = BufWriter::new(file);
                trace.write_csv(&mut w)?;
                w.flush()?;
            }
        }
    }
    Ok(())
}

pub fn trace(common: &Common, overrides: &Overrides, hypothesis: Option<&str>, trial: u64) -> Result<(), CliError> {
    let (names, mut experiment) = experiment(common, overrides)?;
    if experiment.test_kind != TestKind::Sequential {
        return Err(CliError::validation("test", "traces are only defined for the sequential test"));
    }
    if let Some(name) = hypothesis {
        experiment.true_class = Some(
            names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| CliError::validation("--hypothesis", format!("no distribution named {name:?}")))?,
        );
    }
    if experiment.true_class.is_none() {
        return Err(CliError::validation("--hypothesis", "name the true distribution (flag or true_class)"));
    }
    let trace = run_trial(&experiment, trial).map_err(|e| CliError::library("--trial", e))?;
    let mut out = open_out(common)?;
    trace.write_csv(&mut out)?;
    finish(out)
}
