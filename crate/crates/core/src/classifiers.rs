//! Decision procedures: Gutman's fixed-length tests and the sequential test.
//!
//! Classes are indexed from zero in the API (`Verdict::Class(0)` is the
//! first hypothesis). Human-facing output (trace CSV, [`Verdict`]'s
//! `Display`) numbers them from one.
//!
//! The sequential test keeps the symbol counts of the test stream and,
//! after every sample, recomputes each class score
//!
//! ```text
//! score_i(n) = n * GJS(T_i, T_Y^n, N / n)
//! ```
//!
//! directly from counts. A class is *crossed* once its score reaches
//! `gamma * N`, and it stays crossed.

use std::fmt;
use std::io::{self, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::divergence::gjs_of;
use crate::error::{Error, Result};
use crate::probability::{Alphabet, EmpiricalType, Symbol};

/// Outcome of a test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Class(usize),
    /// Fixed-length multiclass only: no unique acceptor.
    Reject,
    /// Sequential only: the cap was reached, or the last classes crossed together.
    NoDecision,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Class(i) => write!(f, "class_{}", i + 1),
            Verdict::Reject => f.write_str("reject"),
            Verdict::NoDecision => f.write_str("no_decision"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdMode {
    /// Accept when `GJS <= lambda`.
    Raw,
    /// Accept when `GJS <= lambda * alpha`.
    Scaled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GutmanConfig {
    /// Length ratio `N / n`.
    pub alpha: f64,
    pub lambda: f64,
    pub mode: ThresholdMode,
}

impl GutmanConfig {
    pub fn new(alpha: f64, lambda: f64, mode: ThresholdMode) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be nonnegative, got {lambda}"
            )));
        }
        Ok(Self { alpha, lambda, mode })
    }

    pub fn threshold(&self) -> f64 {
        match self.mode {
            ThresholdMode::Raw => self.lambda,
            ThresholdMode::Scaled => self.lambda * self.alpha,
        }
    }
}

/// `GJS(T_train, T_test, alpha)` on the two types.
pub fn gutman_statistic(train: &EmpiricalType, test: &EmpiricalType, alpha: f64) -> Result<f64> {
    train.check_same_alphabet(test)?;
    Ok(gjs_of(
        train.to_distribution().weights(),
        test.to_distribution().weights(),
        alpha,
    ))
}

/// Class 0 when the test type is within the threshold of `t1`, class 1 otherwise.
pub fn gutman_binary(t1: &EmpiricalType, ty: &EmpiricalType, cfg: &GutmanConfig) -> Result<Verdict> {
    let stat = gutman_statistic(t1, ty, cfg.alpha)?;
    Ok(if stat <= cfg.threshold() {
        Verdict::Class(0)
    } else {
        Verdict::Class(1)
    })
}

/// Accepts the unique class whose statistic is within the threshold and
/// rejects when none or several are.
pub fn gutman_multiclass(
    types: &[EmpiricalType],
    ty: &EmpiricalType,
    cfg: &GutmanConfig,
) -> Result<Verdict> {
    if types.len() < 2 {
        return Err(Error::TooFewDistributions {
            needed: 2,
            got: types.len(),
        });
    }
    let threshold = cfg.threshold();
    let mut accepted = None;
    for (i, t) in types.iter().enumerate() {
        if gutman_statistic(t, ty, cfg.alpha)? <= threshold {
            if accepted.is_some() {
                return Ok(Verdict::Reject);
            }
            accepted = Some(i);
        }
    }
    Ok(accepted.map_or(Verdict::Reject, Verdict::Class))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SequentialConfig {
    pub gamma: f64,
    pub train_len: u64,
    /// Largest number of test samples; `train_len^2` by default.
    pub cap: u64,
}

impl SequentialConfig {
    pub fn new(gamma: f64, train_len: u64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::NonPositiveGamma(gamma));
        }
        if train_len == 0 {
            return Err(Error::InvalidParameter("train_len must be at least 1".into()));
        }
        let cap = train_len.checked_mul(train_len).ok_or_else(|| {
            Error::InvalidParameter(format!("train_len {train_len} is too large"))
        })?;
        Ok(Self {
            gamma,
            train_len,
            cap,
        })
    }

    pub fn with_cap(mut self, cap: u64) -> Result<Self> {
        if cap < self.train_len {
            return Err(Error::InvalidParameter(format!(
                "cap {cap} is below train_len {}",
                self.train_len
            )));
        }
        self.cap = cap;
        Ok(self)
    }

    /// The crossing level `gamma * N`.
    pub fn threshold(&self) -> f64 {
        self.gamma * self.train_len as f64
    }
}

/// `n * GJS(T_train, T_test, N / n)` from raw counts; zero when `n = 0`.
///
/// Each term is written as `ln_1p` of an exactly representable integer
/// difference, so identical count vectors give exactly zero.
pub(crate) fn score_counts(train: &[u64], train_total: u64, test: &[u64], n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let big_n = train_total as f64;
    let small_n = n as f64;
    let total = big_n + small_n;
    let mut acc = 0.0;
    for (&c1, &cy) in train.iter().zip(test) {
        let (c1, cy) = (c1 as f64, cy as f64);
        let d = big_n * cy - small_n * c1;
        if c1 > 0.0 {
            acc -= c1 * (d / (c1 * total)).ln_1p();
        }
        if cy > 0.0 {
            acc -= cy * (-d / (cy * total)).ln_1p();
        }
    }
    acc.max(0.0)
}

/// Sequential score of a training type against a test type.
pub fn score(t_train: &EmpiricalType, t_test: &EmpiricalType) -> Result<f64> {
    t_train.check_same_alphabet(t_test)?;
    Ok(score_counts(
        t_train.counts(),
        t_train.total(),
        t_test.counts(),
        t_test.total(),
    ))
}

/// Running state of a sequential test.
#[derive(Debug, Clone, PartialEq)]
pub struct SequentialState {
    cfg: SequentialConfig,
    alphabet: Arc<Alphabet>,
    training: Vec<EmpiricalType>,
    test_counts: Vec<u64>,
    n: u64,
    scores: Vec<f64>,
    crossed: Vec<Option<u64>>,
    verdict: Option<Verdict>,
}

impl SequentialState {
    /// Freezes the training types. Every sequence must have length `cfg.train_len`.
    pub fn new<S: AsRef<[Symbol]>>(
        training: &[S],
        alphabet: &Arc<Alphabet>,
        cfg: SequentialConfig,
    ) -> Result<Self> {
        if training.len() < 2 {
            return Err(Error::TooFewDistributions {
                needed: 2,
                got: training.len(),
            });
        }
        let mut types = Vec::with_capacity(training.len());
        for (index, seq) in training.iter().enumerate() {
            let seq = seq.as_ref();
            if seq.len() as u64 != cfg.train_len {
                return Err(Error::LengthMismatch {
                    index,
                    expected: cfg.train_len as usize,
                    got: seq.len(),
                });
            }
            types.push(crate::probability::empirical_type(seq, alphabet)?);
        }
        Ok(Self::from_types(types, cfg))
    }

    /// Starts from precomputed training types (at least two, shared
    /// alphabet, each of total `cfg.train_len`).
    pub fn from_training_types(training: Vec<EmpiricalType>, cfg: SequentialConfig) -> Result<Self> {
        if training.len() < 2 {
            return Err(Error::TooFewDistributions {
                needed: 2,
                got: training.len(),
            });
        }
        for (index, t) in training.iter().enumerate() {
            training[0].check_same_alphabet(t)?;
            if t.total() != cfg.train_len {
                return Err(Error::LengthMismatch {
                    index,
                    expected: cfg.train_len as usize,
                    got: t.total() as usize,
                });
            }
        }
        Ok(Self::from_types(training, cfg))
    }

    fn from_types(training: Vec<EmpiricalType>, cfg: SequentialConfig) -> Self {
        let m = training.len();
        let alphabet = training[0].alphabet().clone();
        Self {
            cfg,
            test_counts: vec![0; alphabet.size()],
            alphabet,
            training,
            n: 0,
            scores: vec![0.0; m],
            crossed: vec![None; m],
            verdict: None,
        }
    }

    pub fn config(&self) -> &SequentialConfig {
        &self.cfg
    }

    pub fn classes(&self) -> usize {
        self.training.len()
    }

    pub fn training_types(&self) -> &[EmpiricalType] {
        &self.training
    }

    /// Number of test samples absorbed so far.
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn test_counts(&self) -> &[u64] {
        &self.test_counts
    }

    /// The test type, once at least one sample arrived.
    pub fn test_type(&self) -> Option<EmpiricalType> {
        EmpiricalType::from_counts(self.alphabet.clone(), self.test_counts.clone()).ok()
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    /// First step at which each class crossed, if it has.
    pub fn crossing_times(&self) -> &[Option<u64>] {
        &self.crossed
    }

    pub fn crossed_count(&self) -> usize {
        self.crossed.iter().filter(|c| c.is_some()).count()
    }

    pub fn verdict(&self) -> Option<Verdict> {
        self.verdict
    }

    pub fn is_stopped(&self) -> bool {
        self.verdict.is_some()
    }

    /// Absorbs one sample and refreshes scores and crossings.
    fn absorb(&mut self, y: Symbol) -> Result<()> {
        if self.verdict.is_some() {
            return Err(Error::SteppedAfterStop);
        }
        match self.test_counts.get_mut(y) {
            Some(c) => *c += 1,
            None => return Err(Error::UnknownSymbol(y.to_string())),
        }
        self.n += 1;
        let threshold = self.cfg.threshold();
        for (i, t) in self.training.iter().enumerate() {
            let s = score_counts(t.counts(), t.total(), &self.test_counts, self.n);
            self.scores[i] = s;
            if self.crossed[i].is_none() && s >= threshold {
                self.crossed[i] = Some(self.n);
            }
        }
        Ok(())
    }

    /// Binary rule: stop at the first crossing and declare the other class.
    /// When both cross on the same step the smaller score wins.
    fn step_binary(&mut self, y: Symbol) -> Result<Option<Verdict>> {
        self.absorb(y)?;
        let verdict = match (self.crossed[0].is_some(), self.crossed[1].is_some()) {
            (true, false) => Some(Verdict::Class(1)),
            (false, true) => Some(Verdict::Class(0)),
            (true, true) => Some(if self.scores[0] < self.scores[1] {
                Verdict::Class(0)
            } else if self.scores[1] < self.scores[0] {
                Verdict::Class(1)
            } else {
                Verdict::NoDecision
            }),
            (false, false) if self.n >= self.cfg.cap => Some(Verdict::NoDecision),
            (false, false) => None,
        };
        self.verdict = verdict;
        Ok(verdict)
    }

    /// Multiclass rule: stop once all classes but at most one have crossed
    /// and declare the survivor, if any.
    fn step_multiclass(&mut self, y: Symbol) -> Result<Option<Verdict>> {
        self.absorb(y)?;
        let m = self.classes();
        let crossed = self.crossed_count();
        let verdict = if crossed + 1 == m {
            let survivor = self.crossed.iter().position(|c| c.is_none());
            Some(survivor.map_or(Verdict::NoDecision, Verdict::Class))
        } else if crossed == m || self.n >= self.cfg.cap {
            Some(Verdict::NoDecision)
        } else {
            None
        };
        self.verdict = verdict;
        Ok(verdict)
    }
}

/// Initial state of the binary sequential test.
pub fn seq_binary_start(
    x1: &[Symbol],
    x2: &[Symbol],
    alphabet: &Arc<Alphabet>,
    cfg: SequentialConfig,
) -> Result<SequentialState> {
    SequentialState::new(&[x1, x2], alphabet, cfg)
}

/// Feeds one test sample to the binary sequential test.
pub fn seq_binary_step(
    mut state: SequentialState,
    y: Symbol,
) -> Result<(SequentialState, Option<Verdict>)> {
    if state.classes() != 2 {
        return Err(Error::InvalidParameter(format!(
            "binary step on a {}-class state",
            state.classes()
        )));
    }
    let verdict = state.step_binary(y)?;
    Ok((state, verdict))
}

/// Complete record of one sequential trial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialTrace {
    pub classes: usize,
    /// The crossing level `gamma * N`.
    pub threshold: f64,
    /// Row-major `stopping_time x classes` score matrix; empty when the
    /// run was not recorded.
    pub scores: Vec<f64>,
    pub stopping_time: u64,
    pub verdict: Verdict,
    pub crossing_times: Vec<Option<u64>>,
}

impl TrialTrace {
    /// Number of test samples consumed.
    pub fn steps(&self) -> u64 {
        self.stopping_time
    }

    pub fn is_recorded(&self) -> bool {
        !self.scores.is_empty() || self.stopping_time == 0
    }

    /// Scores after sample `step` (1-based), when recorded.
    pub fn score_row(&self, step: u64) -> Option<&[f64]> {
        if step == 0 {
            return None;
        }
        let start = (step as usize - 1) * self.classes;
        self.scores.get(start..start + self.classes)
    }

    /// Writes `step, score_1..score_M, threshold, crossed, verdict`.
    ///
    /// `crossed` holds one `0`/`1` flag per class; `verdict` reads
    /// `pending` until the final row.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let mut header = String::from("step");
        for i in 1..=self.classes {
            header.push_str(&format!(",score_{i}"));
        }
        writeln!(out, "{header},threshold,crossed,verdict")?;
        for step in 1..=self.stopping_time {
            let Some(row) = self.score_row(step) else {
                return Err(io::Error::new(
                    io::ErrorKind::InvalidInput,
                    "trace was run without recording scores",
                ));
            };
            let mut line = step.to_string();
            for s in row {
                line.push_str(&format!(",{s}"));
            }
            let flags: String = self
                .crossing_times
                .iter()
                .map(|c| if matches!(c, Some(t) if *t <= step) { '1' } else { '0' })
                .collect();
            let verdict = if step == self.stopping_time {
                self.verdict.to_string()
            } else {
                "pending".to_string()
            };
            writeln!(out, "{line},{},{flags},{verdict}", self.threshold)?;
        }
        Ok(())
    }
}

/// Drives a multiclass state until it stops, the cap is hit, or the stream ends.
///
/// With `record` unset the per-step score matrix is skipped, which keeps
/// long Monte Carlo runs cheap.
pub fn run_sequential<I>(mut state: SequentialState, stream: I, record: bool) -> Result<TrialTrace>
where
    I: IntoIterator<Item = Symbol>,
{
    let m = state.classes();
    let mut scores = Vec::new();
    let mut stream = stream.into_iter();
    let verdict = loop {
        let Some(y) = stream.next() else {
            let partial = TrialTrace {
                classes: m,
                threshold: state.cfg.threshold(),
                scores,
                stopping_time: state.n,
                verdict: Verdict::NoDecision,
                crossing_times: state.crossed.clone(),
            };
            return Err(Error::StreamExhausted(Box::new(partial)));
        };
        let verdict = state.step_multiclass(y)?;
        if record {
            scores.extend_from_slice(&state.scores);
        }
        if let Some(v) = verdict {
            break v;
        }
    };
    Ok(TrialTrace {
        classes: m,
        threshold: state.cfg.threshold(),
        scores,
        stopping_time: state.n,
        verdict,
        crossing_times: state.crossed,
    })
}

/// Runs the multiclass sequential test over a symbol stream, recording every step.
pub fn seq_multiclass_run<S, I>(
    training: &[S],
    alphabet: &Arc<Alphabet>,
    stream: I,
    cfg: SequentialConfig,
) -> Result<TrialTrace>
where
    S: AsRef<[Symbol]>,
    I: IntoIterator<Item = Symbol>,
{
    let state = SequentialState::new(training, alphabet, cfg)?;
    run_sequential(state, stream, true)
}
