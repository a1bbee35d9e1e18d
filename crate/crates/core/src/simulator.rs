//! Deterministic, parallel Monte Carlo harness.
//!
//! Every trial redraws its training sequences and its test stream. Each
//! draw comes from its own ChaCha8 stream, keyed by the master seed and
//! positioned by `(hypothesis, trial, role)`, so a trial's randomness does
//! not depend on which worker runs it or in what order. Results are
//! gathered in trial order before any floating-point reduction, which makes
//! reports identical for every worker count.

use std::io::{self, Write};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{
    gutman_binary, gutman_multiclass, gutman_statistic, run_sequential, GutmanConfig,
    SequentialConfig, SequentialState, ThresholdMode, TrialTrace, Verdict,
};
use crate::error::{Error, Result};
use crate::exponents::{bayes_multiclass_gutman, gutman_bayes_exponent};
use crate::fixedpoint::{check_distinct, solve_fixed_point};
use crate::probability::{Alphabet, Distribution, EmpiricalType, Sampler, SeedSpec};

/// Largest number of trials addressable by the stream layout.
pub const MAX_TRIALS: u64 = 1 << 40;
/// Largest number of classes addressable by the stream layout.
pub const MAX_CLASSES: usize = 255;

/// Stream position of one random role within one trial. Roles `0..M` draw
/// the training sequences and role `M` draws the test samples.
pub fn stream_index(hypothesis: usize, trial: u64, role: usize) -> u64 {
    ((hypothesis as u64) << 48) | (trial << 8) | role as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum TestKind {
    Sequential,
    /// Fixed-length test on exactly `n_test` samples, length ratio `N / n_test`.
    Gutman {
        n_test: u64,
        lambda: f64,
        mode: ThresholdMode,
    },
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub distributions: Vec<Distribution>,
    /// Hypothesis generating the test samples; `None` sweeps all of them.
    pub true_class: Option<usize>,
    pub gamma: f64,
    pub n_train: u64,
    /// Sequential cap; `None` means `n_train^2`.
    pub cap: Option<u64>,
    pub trials: u64,
    /// Prior weights for the Bayesian average; `None` means uniform.
    pub priors: Option<Vec<f64>>,
    pub master_seed: u64,
    pub test_kind: TestKind,
}

impl ExperimentConfig {
    /// Sequential experiment sweeping every hypothesis with uniform priors.
    pub fn sequential(
        distributions: Vec<Distribution>,
        gamma: f64,
        n_train: u64,
        trials: u64,
        master_seed: u64,
    ) -> Self {
        Self {
            distributions,
            true_class: None,
            gamma,
            n_train,
            cap: None,
            trials,
            priors: None,
            master_seed,
            test_kind: TestKind::Sequential,
        }
    }

    pub fn with_true_class(mut self, class: usize) -> Self {
        self.true_class = Some(class);
        self
    }

    pub fn classes(&self) -> usize {
        self.distributions.len()
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.classes();
        if m < 2 {
            return Err(Error::TooFewDistributions { needed: 2, got: m });
        }
        if m > MAX_CLASSES {
            return Err(Error::InvalidParameter(format!("at most {MAX_CLASSES} classes supported")));
        }
        for d in &self.distributions[1..] {
            self.distributions[0].check_same_alphabet(d)?;
        }
        if let Some(i) = self.true_class {
            if i >= m {
                return Err(Error::InvalidParameter(format!(
                    "true_class {i} out of range for {m} classes"
                )));
            }
        }
        if self.trials == 0 || self.trials > MAX_TRIALS {
            return Err(Error::InvalidParameter(format!(
                "trials must be in 1..={MAX_TRIALS}, got {}",
                self.trials
            )));
        }
        self.sequential_config()?;
        if let Some(priors) = &self.priors {
            if priors.len() != m {
                return Err(Error::SizeMismatch {
                    expected: m,
                    got: priors.len(),
                });
            }
            if priors.iter().any(|&p| !(p >= 0.0 && p.is_finite())) {
                return Err(Error::InvalidParameter("priors must be nonnegative".into()));
            }
            let sum: f64 = priors.iter().sum();
            if (sum - 1.0).abs() > crate::probability::INPUT_SUM_TOLERANCE {
                return Err(Error::NotNormalized { sum });
            }
        }
        if let TestKind::Gutman { n_test, lambda, mode } = self.test_kind {
            if n_test == 0 {
                return Err(Error::InvalidParameter("n_test must be at least 1".into()));
            }
            GutmanConfig::new(self.n_train as f64 / n_test as f64, lambda, mode)?;
        }
        Ok(())
    }

    pub fn sequential_config(&self) -> Result<SequentialConfig> {
        let cfg = SequentialConfig::new(self.gamma, self.n_train)?;
        match self.cap {
            Some(cap) => cfg.with_cap(cap),
            None => Ok(cfg),
        }
    }

    pub fn prior_weights(&self) -> Vec<f64> {
        self.priors
            .clone()
            .unwrap_or_else(|| vec![1.0 / self.classes() as f64; self.classes()])
    }

    fn hypotheses(&self) -> Vec<usize> {
        match self.true_class {
            Some(i) => vec![i],
            None => (0..self.classes()).collect(),
        }
    }
}

/// Predicted `E_i[T] = N / min_{j != i} theta*_{i(j)}`; `None` when some
/// fixed point does not exist.
pub fn predicted_stopping_time(dists: &[Distribution], gamma: f64, n_train: u64, i: usize) -> Option<f64> {
    let mut theta = f64::INFINITY;
    for (j, pj) in dists.iter().enumerate() {
        if j != i {
            theta = theta.min(solve_fixed_point(pj, &dists[i], gamma).ok()?.theta_star);
        }
    }
    theta.is_finite().then(|| n_train as f64 / theta)
}

/// Shared per-experiment data: samplers and the classifier settings.
struct Harness<'a> {
    cfg: &'a ExperimentConfig,
    alphabet: Arc<Alphabet>,
    samplers: Vec<Sampler>,
    sequential: SequentialConfig,
}

impl<'a> Harness<'a> {
    fn new(cfg: &'a ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            alphabet: cfg.distributions[0].alphabet().clone(),
            samplers: cfg.distributions.iter().map(Sampler::new).collect(),
            sequential: cfg.sequential_config()?,
        })
    }

    fn draw_type(&self, class: usize, len: u64, seed: SeedSpec) -> EmpiricalType {
        let mut rng = seed.rng();
        let mut counts = vec![0u64; self.alphabet.size()];
        for _ in 0..len {
            counts[self.samplers[class].sample(&mut rng)] += 1;
        }
        EmpiricalType::from_counts(self.alphabet.clone(), counts)
            .expect("lengths are at least one")
    }

    fn trial(&self, hypothesis: usize, trial: u64, record: bool) -> Result<TrialTrace> {
        let m = self.cfg.classes();
        let seed = |role: usize| SeedSpec::new(self.cfg.master_seed, stream_index(hypothesis, trial, role));
        let training: Vec<EmpiricalType> = (0..m)
            .map(|j| self.draw_type(j, self.cfg.n_train, seed(j)))
            .collect();
        match self.cfg.test_kind {
            TestKind::Sequential => {
                let state = SequentialState::from_training_types(training, self.sequential)?;
                let sampler = &self.samplers[hypothesis];
                let mut rng = seed(m).rng();
                let stream = std::iter::repeat_with(move || sampler.sample(&mut rng));
                run_sequential(state, stream, record)
            }
            TestKind::Gutman { n_test, lambda, mode } => {
                let alpha = self.cfg.n_train as f64 / n_test as f64;
                let gcfg = GutmanConfig::new(alpha, lambda, mode)?;
                let test = self.draw_type(hypothesis, n_test, seed(m));
                let verdict = if m == 2 {
                    gutman_binary(&training[0], &test, &gcfg)?
                } else {
                    gutman_multiclass(&training, &test, &gcfg)?
                };
                let scores = training
                    .iter()
                    .map(|t| gutman_statistic(t, &test, alpha))
                    .collect::<Result<Vec<_>>>()?;
                Ok(TrialTrace {
                    classes: m,
                    threshold: gcfg.threshold(),
                    scores,
                    stopping_time: n_test,
                    verdict,
                    crossing_times: vec![None; m],
                })
            }
        }
    }
}

/// One recorded realization under `cfg.true_class` (required).
pub fn run_trial(cfg: &ExperimentConfig, trial_index: u64) -> Result<TrialTrace> {
    let hypothesis = cfg.true_class.ok_or_else(|| {
        Error::InvalidParameter("run_trial needs a true_class".into())
    })?;
    let harness = Harness::new(cfg)?;
    if trial_index >= MAX_TRIALS {
        return Err(Error::InvalidParameter(format!("trial index {trial_index} too large")));
    }
    harness.trial(hypothesis, trial_index, true)
}

/// Aggregates for one true hypothesis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisStats {
    /// Zero-based class index.
    pub hypothesis: usize,
    pub trials: u64,
    /// Trials whose verdict was not the true class, `NoDecision` and `Reject` included.
    pub errors: u64,
    /// Trials ending in `NoDecision` or `Reject`.
    pub nodecisions: u64,
    pub error_rate: f64,
    /// Normal-approximation 95% half-width of `error_rate`.
    pub error_rate_ci95: f64,
    pub mean_t: f64,
    pub stddev_t: f64,
    pub min_t: u64,
    pub max_t: u64,
    pub predicted_t: Option<f64>,
    /// `-ln(error_rate) / mean_t`: exponent per test sample.
    pub exponent_per_sample: Option<f64>,
    /// `-ln(error_rate) / N`: exponent per training sample.
    pub exponent_per_train: Option<f64>,
}

impl HypothesisStats {
    fn from_outcomes(hypothesis: usize, n_train: u64, predicted_t: Option<f64>, outcomes: &[(Verdict, u64)]) -> Self {
        let trials = outcomes.len() as u64;
        let errors = outcomes
            .iter()
            .filter(|(v, _)| *v != Verdict::Class(hypothesis))
            .count() as u64;
        let nodecisions = outcomes
            .iter()
            .filter(|(v, _)| matches!(v, Verdict::NoDecision | Verdict::Reject))
            .count() as u64;
        let total: u128 = outcomes.iter().map(|&(_, t)| t as u128).sum();
        let mean_t = total as f64 / trials as f64;
        let stddev_t = if trials > 1 {
            let ss: f64 = outcomes
                .iter()
                .map(|&(_, t)| (t as f64 - mean_t).powi(2))
                .sum();
            (ss / (trials - 1) as f64).sqrt()
        } else {
            0.0
        };
        let error_rate = errors as f64 / trials as f64;
        let exponent = |scale: f64| (errors > 0).then(|| -error_rate.ln() / scale);
        Self {
            hypothesis,
            trials,
            errors,
            nodecisions,
            error_rate,
            error_rate_ci95: 1.96 * (error_rate * (1.0 - error_rate) / trials as f64).sqrt(),
            mean_t,
            stddev_t,
            min_t: outcomes.iter().map(|o| o.1).min().unwrap_or(0),
            max_t: outcomes.iter().map(|o| o.1).max().unwrap_or(0),
            predicted_t,
            exponent_per_sample: exponent(mean_t),
            exponent_per_train: exponent(n_train as f64),
        }
    }
}

/// Report CSV columns, in order.
pub const REPORT_CSV_HEADER: &str =
    "hypothesis,trials,errors,nodecisions,error_rate,mean_T,stddev_T,min_T,max_T,predicted_T,seed";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationReport {
    pub seed: u64,
    pub gamma: f64,
    pub n_train: u64,
    pub test_kind: TestKind,
    pub priors: Vec<f64>,
    pub rows: Vec<HypothesisStats>,
    /// Elapsed time; excluded from comparisons of report content.
    #[serde(skip)]
    pub wall_time: Duration,
}

impl SimulationReport {
    /// Prior-weighted error over the simulated hypotheses, priors
    /// renormalized to the ones present.
    pub fn bayes_error(&self) -> f64 {
        let weight: f64 = self.rows.iter().map(|r| self.priors[r.hypothesis]).sum();
        if weight == 0.0 {
            return f64::NAN;
        }
        self.rows
            .iter()
            .map(|r| self.priors[r.hypothesis] * r.error_rate)
            .sum::<f64>()
            / weight
    }

    pub fn row(&self, hypothesis: usize) -> Option<&HypothesisStats> {
        self.rows.iter().find(|r| r.hypothesis == hypothesis)
    }

    /// Content equality ignoring wall time.
    pub fn same_content(&self, other: &SimulationReport) -> bool {
        let mut a = self.clone();
        a.wall_time = other.wall_time;
        a == *other
    }

    /// Writes the report CSV. Hypotheses are numbered from one; an unknown
    /// prediction is left empty.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{REPORT_CSV_HEADER}")?;
        for r in &self.rows {
            let predicted = r.predicted_t.map(|v| v.to_string()).unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.hypothesis + 1,
                r.trials,
                r.errors,
                r.nodecisions,
                r.error_rate,
                r.mean_t,
                r.stddev_t,
                r.min_t,
                r.max_t,
                predicted,
                self.seed
            )?;
        }
        Ok(())
    }
}

fn collect_outcomes(harness: &Harness<'_>, hypothesis: usize) -> Result<Vec<(Verdict, u64)>> {
    (0..harness.cfg.trials)
        .into_par_iter()
        .map(|trial| {
            harness
                .trial(hypothesis, trial, false)
                .map(|t| (t.verdict, t.stopping_time))
        })
        .collect()
}

/// Runs `cfg.trials` trials under each requested hypothesis on the global
/// rayon pool.
pub fn estimate(cfg: &ExperimentConfig) -> Result<SimulationReport> {
    let start = Instant::now();
    let harness = Harness::new(cfg)?;
    let mut rows = Vec::new();
    for h in cfg.hypotheses() {
        let outcomes = collect_outcomes(&harness, h)?;
        let predicted = match cfg.test_kind {
            TestKind::Sequential => predicted_stopping_time(&cfg.distributions, cfg.gamma, cfg.n_train, h),
            TestKind::Gutman { n_test, .. } => Some(n_test as f64),
        };
        rows.push(HypothesisStats::from_outcomes(h, cfg.n_train, predicted, &outcomes));
    }
    Ok(SimulationReport {
        seed: cfg.master_seed,
        gamma: cfg.gamma,
        n_train: cfg.n_train,
        test_kind: cfg.test_kind,
        priors: cfg.prior_weights(),
        rows,
        wall_time: start.elapsed(),
    })
}

/// [`estimate`] on a dedicated pool of `workers` threads.
pub fn estimate_with_workers(cfg: &ExperimentConfig, workers: usize) -> Result<SimulationReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    pool.install(|| estimate(cfg))
}

/// Threshold used for the matched-budget Gutman comparison: the Bayesian
/// crossing `lambda*` at `alpha`, to be applied in scaled mode.
pub fn gutman_default_lambda(dists: &[Distribution], alpha: f64) -> Result<f64> {
    check_distinct(dists)?;
    if dists.len() == 2 {
        gutman_bayes_exponent(alpha, &dists[0], &dists[1])
    } else {
        bayes_multiclass_gutman(dists, alpha)
    }
}

/// Same harness with Gutman's fixed-length test on `n_test` samples. The
/// configured test kind is kept when it is already Gutman with this
/// `n_test`; otherwise the threshold is [`gutman_default_lambda`] at
/// `alpha = N / n_test` in scaled mode.
pub fn gutman_reference_run(cfg: &ExperimentConfig, n_test: u64) -> Result<SimulationReport> {
    if n_test == 0 {
        return Err(Error::InvalidParameter("n_test must be at least 1".into()));
    }
    let mut cfg = cfg.clone();
    let keep = matches!(cfg.test_kind, TestKind::Gutman { n_test: k, .. } if k == n_test);
    if !keep {
        let alpha = cfg.n_train as f64 / n_test as f64;
        cfg.test_kind = TestKind::Gutman {
            n_test,
            lambda: gutman_default_lambda(&cfg.distributions, alpha)?,
            mode: ThresholdMode::Scaled,
        };
    }
    estimate(&cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeRow {
    pub n_train: u64,
    pub trials: u64,
    pub errors: u64,
    pub error_rate: f64,
    pub mean_t: f64,
    /// `-ln(error_rate)`; `None` when no error was observed.
    pub neg_log_rate: Option<f64>,
    pub exponent_per_sample: Option<f64>,
    pub exponent_per_train: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeTable {
    pub rows: Vec<ProbeRow>,
    /// Least-squares slope of `-ln(error_rate)` against `N` over rows with errors.
    pub slope: f64,
    /// Grid points with zero observed errors, left out of the fit.
    pub insufficient: Vec<u64>,
}

/// Error rate as a function of `N`. For a single true class the rate is
/// that class's; when sweeping it is the prior-weighted average. Each grid
/// point uses the default cap `N^2`.
pub fn exponent_probe(template: &ExperimentConfig, n_grid: &[u64]) -> Result<ProbeTable> {
    if n_grid.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "exponent probe needs at least 3 grid points, got {}",
            n_grid.len()
        )));
    }
    let mut rows = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let mut cfg = template.clone();
        cfg.n_train = n;
        cfg.cap = None;
        let report = estimate(&cfg)?;
        let error_rate = report.bayes_error();
        let errors: u64 = report.rows.iter().map(|r| r.errors).sum();
        let trials: u64 = report.rows.iter().map(|r| r.trials).sum();
        let mean_t = report.rows.iter().map(|r| r.mean_t * r.trials as f64).sum::<f64>() / trials as f64;
        let neg_log_rate = (errors > 0).then(|| -error_rate.ln());
        rows.push(ProbeRow {
            n_train: n,
            trials,
            errors,
            error_rate,
            mean_t,
            neg_log_rate,
            exponent_per_sample: neg_log_rate.map(|v| v / mean_t),
            exponent_per_train: neg_log_rate.map(|v| v / n as f64),
        });
    }
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.neg_log_rate.map(|y| (r.n_train as f64, y)))
        .collect();
    if points.len() < 2 {
        return Err(Error::InsufficientErrors {
            usable: points.len(),
        });
    }
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("exponent probe grid needs distinct N values".into()));
    }
    Ok(ProbeTable {
        insufficient: rows
            .iter()
            .filter(|r| r.neg_log_rate.is_none())
            .map(|r| r.n_train)
            .collect(),
        rows,
        slope: sxy / sxx,
    })
}
