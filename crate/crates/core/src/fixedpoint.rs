//! Threshold fixed points `GJS(p, q, theta) = gamma * theta`.
//!
//! `f(theta) = GJS(p, q, theta) - gamma * theta` is concave with `f(0) = 0`
//! and `f'(0) = D(p || q) - gamma`, so a positive root exists iff
//! `gamma < D(p || q)` and it is unique. The solver brackets that root by
//! doubling and then bisects.

use serde::Serialize;

use crate::divergence::{chernoff, gjs, gjs_of};
use crate::error::{Error, Result};
use crate::probability::{kl, kl_of, Distribution, EmpiricalType};

/// Left end of the initial bracket; excludes the trivial root at zero.
pub const BRACKET_LOW: f64 = 1e-12;
/// Relative bracket width at which bisection stops.
pub const RELATIVE_WIDTH: f64 = 1e-13;
/// Fallback used by [`empirical_fixed_point`] when no root exists.
pub const DEFAULT_FALLBACK: f64 = 1.0;
/// Distance to the Chernoff cap below which a report is flagged.
pub const CAP_FLAG_TOLERANCE: f64 = 1e-9;

const MAX_DOUBLINGS: usize = 1100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedPointResult {
    pub theta_star: f64,
    pub residual: f64,
    pub bracket_low: f64,
    pub bracket_high: f64,
    pub iterations: usize,
}

fn solve_weights(p: &[f64], q: &[f64], gamma: f64) -> Result<FixedPointResult> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::NonPositiveGamma(gamma));
    }
    let divergence = kl_of(p, q);
    if gamma >= divergence {
        return Err(Error::NoSolution {
            gamma,
            kl: divergence,
        });
    }
    let f = |theta: f64| gjs_of(p, q, theta) - gamma * theta;

    let mut lo = BRACKET_LOW;
    if f(lo) <= 0.0 {
        return Err(Error::NonConvergence(format!(
            "root lies below {BRACKET_LOW} (gamma {gamma} too close to D(p||q) = {divergence})"
        )));
    }
    let mut hi = 1.0;
    let mut iterations = 0;
    while f(hi) >= 0.0 {
        lo = hi;
        hi *= 2.0;
        iterations += 1;
        if iterations > MAX_DOUBLINGS || !hi.is_finite() {
            return Err(Error::NonConvergence("root bracket diverged".into()));
        }
    }
    while hi - lo > RELATIVE_WIDTH * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let theta_star = 0.5 * (lo + hi);
    Ok(FixedPointResult {
        theta_star,
        residual: f(theta_star).abs(),
        bracket_low: lo,
        bracket_high: hi,
        iterations,
    })
}

/// Unique positive root of `GJS(p, q, theta) = gamma * theta`.
pub fn solve_fixed_point(p: &Distribution, q: &Distribution, gamma: f64) -> Result<FixedPointResult> {
    p.check_same_alphabet(q)?;
    solve_weights(p.weights(), q.weights(), gamma)
}

/// Fixed points and achievable exponents of the sequential binary test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentReport {
    pub gamma: f64,
    /// Root of `GJS(p2, p1, beta) = gamma beta`; `N / beta_star` predicts E_1[T].
    pub beta_star: f64,
    /// Root of `GJS(p1, p2, theta) = gamma theta`; `N / theta_star` predicts E_2[T].
    pub theta_star: f64,
    pub exponent_type1: f64,
    pub exponent_type2: f64,
    pub bayes_exponent: f64,
    pub chernoff: f64,
    /// Set when `gamma` is within [`CAP_FLAG_TOLERANCE`] of the Chernoff cap.
    pub near_cap: bool,
}

/// Checks `0 < gamma <= cap`, returning the gate error otherwise.
pub(crate) fn gate_gamma(gamma: f64, cap: f64) -> Result<()> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::NonPositiveGamma(gamma));
    }
    if gamma > cap {
        return Err(Error::GammaOutOfRange {
            gamma,
            chernoff: cap,
        });
    }
    Ok(())
}

pub fn exponent_report(p1: &Distribution, p2: &Distribution, gamma: f64) -> Result<ExponentReport> {
    let cap = chernoff(p1, p2)?;
    gate_gamma(gamma, cap)?;
    let beta = solve_fixed_point(p2, p1, gamma)?;
    let theta = solve_fixed_point(p1, p2, gamma)?;
    Ok(ExponentReport {
        gamma,
        beta_star: beta.theta_star,
        theta_star: theta.theta_star,
        exponent_type1: gjs(p2, p1, beta.theta_star)?,
        exponent_type2: gjs(p1, p2, theta.theta_star)?,
        bayes_exponent: gamma,
        chernoff: cap,
        near_cap: cap - gamma <= CAP_FLAG_TOLERANCE,
    })
}

/// `M x M` table of multiclass fixed points; entry `(i, j)` for `i != j`
/// solves `GJS(P_j, P_i, theta) = gamma theta`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThetaMatrix {
    size: usize,
    entries: Vec<Option<f64>>,
}

impl ThetaMatrix {
    pub fn size(&self) -> usize {
        self.size
    }

    /// `None` on the diagonal.
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.entries[i * self.size + j]
    }

    /// `min_{j != i} theta*_{i(j)}`; `N` over this predicts `E_i[T]`.
    pub fn row_min(&self, i: usize) -> f64 {
        (0..self.size)
            .filter_map(|j| self.get(i, j))
            .fold(f64::INFINITY, f64::min)
    }

    /// Minimum over all ordered pairs.
    pub fn min(&self) -> f64 {
        self.entries
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Rejects lists with fewer than two entries or with (near-)identical members.
pub(crate) fn check_distinct(dists: &[Distribution]) -> Result<()> {
    if dists.len() < 2 {
        return Err(Error::TooFewDistributions {
            needed: 2,
            got: dists.len(),
        });
    }
    for i in 0..dists.len() {
        for j in (i + 1)..dists.len() {
            dists[i].check_same_alphabet(&dists[j])?;
            if dists[i].approx_eq(&dists[j]) {
                return Err(Error::DuplicateDistribution(i, j));
            }
        }
    }
    Ok(())
}

/// Smallest pairwise Chernoff information.
pub fn min_pairwise_chernoff(dists: &[Distribution]) -> Result<f64> {
    let mut cap = f64::INFINITY;
    for i in 0..dists.len() {
        for j in (i + 1)..dists.len() {
            cap = cap.min(chernoff(&dists[i], &dists[j])?);
        }
    }
    Ok(cap)
}

pub fn multiclass_thetas(dists: &[Distribution], gamma: f64) -> Result<ThetaMatrix> {
    check_distinct(dists)?;
    gate_gamma(gamma, min_pairwise_chernoff(dists)?)?;
    let size = dists.len();
    let mut entries = vec![None; size * size];
    for i in 0..size {
        for j in 0..size {
            if i != j {
                let root = solve_fixed_point(&dists[j], &dists[i], gamma)?;
                entries[i * size + j] = Some(root.theta_star);
            }
        }
    }
    Ok(ThetaMatrix { size, entries })
}

/// Fixed point for `(type-as-distribution, q)` when `D(T || q) > gamma`,
/// otherwise `fallback`.
pub fn empirical_fixed_point(t: &EmpiricalType, q: &Distribution, gamma: f64, fallback: f64) -> f64 {
    let tp = t.to_distribution();
    match kl(&tp, q) {
        Ok(divergence) if divergence > gamma => solve_fixed_point(&tp, q, gamma)
            .map(|r| r.theta_star)
            .unwrap_or(fallback),
        _ => fallback,
    }
}
