//! Constrained KL minimizations over pairs of simplices and the Gutman
//! exponent functions built on them.
//!
//! Every program here has the shape
//!
//! ```text
//! minimize   w1 D(Q1 || A) + w2 D(Q2 || B)
//! subject to GJS(Q1, Q2, alpha) <= t
//! ```
//!
//! which is jointly convex. For a multiplier `nu > 0` the Lagrangian term
//! `nu GJS(Q1, Q2, alpha)` equals `min_M nu [alpha D(Q1||M) + D(Q2||M)]`,
//! and for fixed `M` both `Q`s have closed forms (geometric mixtures). What
//! remains is a smooth, strictly convex function of `M` alone:
//!
//! ```text
//! phi(M) = -(w1 + nu alpha) ln sum A^a1 M^(1-a1) - (w2 + nu) ln sum B^a2 M^(1-a2)
//! a1 = w1 / (w1 + nu alpha),  a2 = w2 / (w2 + nu)
//! ```
//!
//! minimized with equality-constrained Newton steps. The multiplier is then
//! bisected until the constraint is active, and the reported value is the
//! dual bound `min phi - nu t`.

use serde::Serialize;

use crate::divergence::{gjs, gjs_of};
use crate::error::{Error, Result};
use crate::fixedpoint::{check_distinct, exponent_report, gate_gamma};
use crate::divergence::chernoff;
use crate::probability::{kl_of, Distribution};

const NEWTON_MAX_ITER: usize = 200;
const MULTIPLIER_MAX: f64 = 1e15;
const MULTIPLIER_REL_WIDTH: f64 = 1e-12;
const START_SPREAD_TOLERANCE: f64 = 1e-9;
/// Mixture-consistency tolerance for the inner stationarity check.
const STATIONARITY_TOLERANCE: f64 = 1e-8;

/// Which exponent function a [`SimplexOptProblem`] encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Objective {
    /// `alpha D(Q1||P1) + D(Q2||P2)` s.t. `GJS(Q1,Q2,alpha) <= lambda`.
    GutmanF,
    /// `D(Q1||P1) + D(Q2||P2)/alpha` s.t. `GJS(Q1,Q2,alpha)/alpha <= lambda`.
    GutmanF1,
    /// `D(V1||P2) + D(V2||P1)/alpha` s.t. `GJS(V1,V2,alpha)/alpha <= lambda`.
    GutmanF2,
    /// Caller-supplied weights and raw GJS threshold.
    Custom,
}

#[derive(Debug, Clone)]
pub struct SimplexOptProblem {
    pub objective: Objective,
    /// Reference for the first decision variable.
    pub first: Distribution,
    /// Reference for the second decision variable.
    pub second: Distribution,
    pub first_weight: f64,
    pub second_weight: f64,
    pub alpha: f64,
    /// Bound on `GJS(Q1, Q2, alpha)` (already rescaled).
    pub threshold: f64,
}

impl SimplexOptProblem {
    pub fn custom(
        first: Distribution,
        second: Distribution,
        first_weight: f64,
        second_weight: f64,
        alpha: f64,
        threshold: f64,
    ) -> Result<Self> {
        first.check_same_alphabet(&second)?;
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
        }
        if !(threshold >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "threshold must be nonnegative, got {threshold}"
            )));
        }
        if !(first_weight > 0.0 && second_weight > 0.0) {
            return Err(Error::InvalidParameter("objective weights must be positive".into()));
        }
        Ok(Self {
            objective: Objective::Custom,
            first,
            second,
            first_weight,
            second_weight,
            alpha,
            threshold,
        })
    }

    pub fn gutman_f(alpha: f64, lambda: f64, p1: &Distribution, p2: &Distribution) -> Result<Self> {
        let mut p = Self::custom(p1.clone(), p2.clone(), alpha, 1.0, alpha, lambda)?;
        p.objective = Objective::GutmanF;
        Ok(p)
    }

    pub fn gutman_f1(alpha: f64, lambda: f64, p1: &Distribution, p2: &Distribution) -> Result<Self> {
        let mut p = Self::custom(p1.clone(), p2.clone(), 1.0, 1.0 / alpha, alpha, alpha * lambda)?;
        p.objective = Objective::GutmanF1;
        Ok(p)
    }

    pub fn gutman_f2(alpha: f64, lambda: f64, p1: &Distribution, p2: &Distribution) -> Result<Self> {
        let mut p = Self::custom(p2.clone(), p1.clone(), 1.0, 1.0 / alpha, alpha, alpha * lambda)?;
        p.objective = Objective::GutmanF2;
        Ok(p)
    }

}

#[derive(Debug, Clone)]
pub struct SimplexSolution {
    /// Optimal value (dual bound at the final multiplier).
    pub value: f64,
    pub q1: Distribution,
    pub q2: Distribution,
    /// Lagrange multiplier of the GJS constraint (0 when inactive).
    pub multiplier: f64,
    /// `GJS(q1, q2, alpha)` at the returned point.
    pub constraint: f64,
    /// Objective at a feasible point minus `value`; bounds the error.
    pub duality_gap: f64,
}

/// Inner state at a fixed multiplier.
#[derive(Debug, Clone)]
struct Inner {
    m: Vec<f64>,
    q1: Vec<f64>,
    q2: Vec<f64>,
    phi: f64,
}

/// Evaluates phi and the two geometric mixtures at `m` (support-restricted).
struct Phi<'a> {
    log_a: &'a [f64],
    log_b: &'a [f64],
    a1: f64,
    a2: f64,
    c1: f64,
    c2: f64,
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

impl Phi<'_> {
    fn tilt(&self, log_ref: &[f64], weight: f64, log_m: &[f64]) -> (f64, Vec<f64>) {
        let logs: Vec<f64> = log_ref
            .iter()
            .zip(log_m)
            .map(|(&r, &m)| {
                if r == f64::NEG_INFINITY {
                    f64::NEG_INFINITY
                } else {
                    weight * r + (1.0 - weight) * m
                }
            })
            .collect();
        let log_z = log_sum_exp(logs.iter().copied());
        let q = logs.iter().map(|&l| (l - log_z).exp()).collect();
        (log_z, q)
    }

    fn eval(&self, m: &[f64]) -> (f64, Vec<f64>, Vec<f64>) {
        let log_m: Vec<f64> = m.iter().map(|x| x.ln()).collect();
        let (z1, q1) = self.tilt(self.log_a, self.a1, &log_m);
        let (z2, q2) = self.tilt(self.log_b, self.a2, &log_m);
        (-self.c1 * z1 - self.c2 * z2, q1, q2)
    }
}

/// Solves `(H + H^T)/2 x = rhs` for symmetric positive definite `h` by Cholesky.
fn cholesky_solve(h: &[f64], n: usize, rhs: &[f64]) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = h[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = rhs[i];
        for k in 0..i {
            s -= l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[k * n + i] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    Some(x)
}

/// The support-restricted problem shared by all multiplier evaluations.
struct Reduced<'a> {
    problem: &'a SimplexOptProblem,
    support: Vec<usize>,
    log_a: Vec<f64>,
    log_b: Vec<f64>,
}

impl<'a> Reduced<'a> {
    fn new(problem: &'a SimplexOptProblem) -> Self {
        let a = problem.first.weights();
        let b = problem.second.weights();
        let support: Vec<usize> = (0..a.len()).filter(|&x| a[x] > 0.0 || b[x] > 0.0).collect();
        let ln0 = |w: f64| if w > 0.0 { w.ln() } else { f64::NEG_INFINITY };
        let log_a = support.iter().map(|&x| ln0(a[x])).collect();
        let log_b = support.iter().map(|&x| ln0(b[x])).collect();
        Self {
            problem,
            support,
            log_a,
            log_b,
        }
    }

    fn phi(&self, nu: f64) -> Phi<'_> {
        let p = self.problem;
        let c1 = p.first_weight + nu * p.alpha;
        let c2 = p.second_weight + nu;
        Phi {
            log_a: &self.log_a,
            log_b: &self.log_b,
            a1: p.first_weight / c1,
            a2: p.second_weight / c2,
            c1,
            c2,
        }
    }

    fn default_start(&self) -> Vec<f64> {
        let alpha = self.problem.alpha;
        let a = self.problem.first.weights();
        let b = self.problem.second.weights();
        self.support
            .iter()
            .map(|&x| (alpha * a[x] + b[x]) / (1.0 + alpha))
            .collect()
    }

    /// Deterministic list of interior starting mixtures.
    fn starts(&self) -> Vec<Vec<f64>> {
        let k = self.support.len();
        let a = self.problem.first.weights();
        let b = self.problem.second.weights();
        let uniform = vec![1.0 / k as f64; k];
        let smooth = |v: Vec<f64>| -> Vec<f64> {
            let v: Vec<f64> = v.iter().zip(&uniform).map(|(x, u)| 0.9 * x + 0.1 * u).collect();
            let s: f64 = v.iter().sum();
            v.into_iter().map(|x| x / s).collect()
        };
        let pick = |w: &[f64]| self.support.iter().map(|&x| w[x]).collect::<Vec<f64>>();
        let geometric: Vec<f64> = self.support.iter().map(|&x| (a[x] * b[x]).sqrt()).collect();
        let mut starts = vec![self.default_start(), uniform.clone()];
        starts.push(smooth(pick(a)));
        starts.push(smooth(pick(b)));
        starts.push(smooth(geometric));
        // vertex-leaning starts
        for corner in 0..k {
            let mut v = vec![0.5 / (k - 1).max(1) as f64; k];
            v[corner] = 0.5;
            let s: f64 = v.iter().sum();
            starts.push(v.into_iter().map(|x| x / s).collect());
        }
        starts
    }

    /// Newton's method on phi over the simplex, warm-started at `start`.
    fn minimize(&self, nu: f64, start: &[f64]) -> Result<Inner> {
        let phi = self.phi(nu);
        let alpha = self.problem.alpha;
        let n = self.support.len();
        let mut m = start.to_vec();
        let (mut value, mut q1, mut q2) = phi.eval(&m);
        for _ in 0..NEWTON_MAX_ITER {
            let grad: Vec<f64> = (0..n)
                .map(|x| -nu * (alpha * q1[x] + q2[x]) / m[x])
                .collect();
            let stationary = (0..n).all(|x| {
                ((alpha * q1[x] + q2[x]) / ((1.0 + alpha) * m[x]) - 1.0).abs() <= 1e-13
            });
            if stationary {
                break;
            }
            let mut h = vec![0.0; n * n];
            let c1 = nu * alpha;
            for x in 0..n {
                let s1x = q1[x] / m[x];
                let s2x = q2[x] / m[x];
                for y in 0..n {
                    let s1y = q1[y] / m[y];
                    let s2y = q2[y] / m[y];
                    h[x * n + y] = c1 * (1.0 - phi.a1) * s1x * s1y + nu * (1.0 - phi.a2) * s2x * s2y;
                }
                h[x * n + x] += c1 * phi.a1 * s1x / m[x] + nu * phi.a2 * s2x / m[x];
            }
            let ones = vec![1.0; n];
            // constant shifts of the gradient are absorbed by the simplex
            // multiplier; removing the mean avoids cancellation in the step
            let mean = grad.iter().sum::<f64>() / n as f64;
            let grad: Vec<f64> = grad.iter().map(|g| g - mean).collect();
            let neg_grad: Vec<f64> = grad.iter().map(|g| -g).collect();
            let (hg, h1) = match (cholesky_solve(&h, n, &neg_grad), cholesky_solve(&h, n, &ones)) {
                (Some(a), Some(b)) => (a, b),
                _ => return Err(Error::NonConvergence("singular Newton system".into())),
            };
            let mu = hg.iter().sum::<f64>() / h1.iter().sum::<f64>();
            let mut dir: Vec<f64> = hg.iter().zip(&h1).map(|(a, b)| a - mu * b).collect();
            let drift = dir.iter().sum::<f64>() / n as f64;
            dir.iter_mut().for_each(|d| *d -= drift);
            let slope: f64 = grad.iter().zip(&dir).map(|(g, d)| g * d).sum();
            if slope >= 0.0 || -slope < 1e-30 {
                break;
            }
            let mut step = 1.0f64;
            for (mx, dx) in m.iter().zip(&dir) {
                if *dx < 0.0 {
                    step = step.min(-0.99 * mx / dx);
                }
            }
            if -slope < 1e-8 && step >= 1.0 {
                // quadratic-convergence region: phi differences are below
                // rounding here, so take the pure Newton step
                let mut trial: Vec<f64> = m.iter().zip(&dir).map(|(a, d)| a + d).collect();
                let s: f64 = trial.iter().sum();
                trial.iter_mut().for_each(|v| *v /= s);
                (value, q1, q2) = phi.eval(&trial);
                m = trial;
                continue;
            }
            let mut accepted = false;
            for _ in 0..60 {
                let mut trial: Vec<f64> = m.iter().zip(&dir).map(|(a, d)| a + step * d).collect();
                let s: f64 = trial.iter().sum();
                trial.iter_mut().for_each(|v| *v /= s);
                let (tv, tq1, tq2) = phi.eval(&trial);
                if tv <= value + 1e-4 * step * slope || (tv <= value && step < 1e-6) {
                    m = trial;
                    value = tv;
                    q1 = tq1;
                    q2 = tq2;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                // No representable decrease left: we are at the floating-point floor.
                break;
            }
        }
        let worst = (0..n)
            .map(|x| ((alpha * q1[x] + q2[x]) / ((1.0 + alpha) * m[x]) - 1.0).abs())
            .fold(0.0, f64::max);
        if !(worst <= STATIONARITY_TOLERANCE) {
            return Err(Error::NonConvergence(format!(
                "inner Newton stalled at stationarity error {worst:e} (nu = {nu})"
            )));
        }
        Ok(Inner { m, q1, q2, phi: value })
    }

    fn lift(&self, reduced: &[f64]) -> Distribution {
        let mut full = vec![0.0; self.problem.first.len()];
        for (&x, &v) in self.support.iter().zip(reduced) {
            full[x] = v;
        }
        Distribution::from_trusted(self.problem.first.alphabet().clone(), full)
    }

    fn constraint(&self, inner: &Inner) -> f64 {
        gjs_of(&inner.q1, &inner.q2, self.problem.alpha)
    }

    fn objective(&self, inner: &Inner) -> f64 {
        let a: Vec<f64> = self.support.iter().map(|&x| self.problem.first.weights()[x]).collect();
        let b: Vec<f64> = self.support.iter().map(|&x| self.problem.second.weights()[x]).collect();
        self.problem.first_weight * kl_of(&inner.q1, &a)
            + self.problem.second_weight * kl_of(&inner.q2, &b)
    }
}

/// Solves a [`SimplexOptProblem`] to a certified optimum.
pub fn minimize_over_simplices(problem: &SimplexOptProblem) -> Result<SimplexSolution> {
    let a = &problem.first;
    let b = &problem.second;
    let t = problem.threshold;
    let alpha = problem.alpha;
    let unconstrained = gjs_of(a.weights(), b.weights(), alpha);
    if unconstrained <= t {
        return Ok(SimplexSolution {
            value: 0.0,
            q1: a.clone(),
            q2: b.clone(),
            multiplier: 0.0,
            constraint: unconstrained,
            duality_gap: 0.0,
        });
    }
    let (w1, w2) = (problem.first_weight, problem.second_weight);
    if t == 0.0 {
        // Q1 = Q2 = Q, the normalized geometric mixture.
        let s = w1 / (w1 + w2);
        let raw: Vec<f64> = a
            .weights()
            .iter()
            .zip(b.weights())
            .map(|(&x, &y)| if x > 0.0 && y > 0.0 { x.powf(s) * y.powf(1.0 - s) } else { 0.0 })
            .collect();
        let z: f64 = raw.iter().sum();
        if z <= 0.0 {
            return Err(Error::Infeasible);
        }
        let q = Distribution::from_trusted(a.alphabet().clone(), raw.iter().map(|v| v / z).collect());
        return Ok(SimplexSolution {
            value: -(w1 + w2) * z.ln(),
            q1: q.clone(),
            q2: q,
            multiplier: f64::INFINITY,
            constraint: 0.0,
            duality_gap: 0.0,
        });
    }

    let reduced = Reduced::new(problem);
    let mut warm = reduced.default_start();
    let eval = |nu: f64, warm: &mut Vec<f64>| -> Result<(Inner, f64)> {
        let inner = reduced.minimize(nu, warm)?;
        *warm = inner.m.clone();
        let g = reduced.constraint(&inner);
        Ok((inner, g))
    };

    // bracket the multiplier: g(nu) is nonincreasing, g(0) > t
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    let (mut hi_inner, g_hi) = eval(hi, &mut warm)?;
    let mut g_hi = g_hi;
    while g_hi > t {
        lo = hi;
        hi *= 4.0;
        if hi > MULTIPLIER_MAX {
            return Err(Error::NonConvergence(format!(
                "multiplier exceeded {MULTIPLIER_MAX:e} for threshold {t:e}"
            )));
        }
        (hi_inner, g_hi) = eval(hi, &mut warm)?;
    }
    for _ in 0..200 {
        if hi - lo <= MULTIPLIER_REL_WIDTH * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let (inner, g) = eval(mid, &mut warm)?;
        if g > t {
            lo = mid;
        } else {
            hi = mid;
            hi_inner = inner;
        }
    }
    let nu = hi;

    // multi-start certification at the final multiplier
    let mut best = hi_inner;
    let mut spread_lo = best.phi;
    let mut spread_hi = best.phi;
    for start in reduced.starts() {
        let candidate = reduced.minimize(nu, &start)?;
        spread_lo = spread_lo.min(candidate.phi);
        spread_hi = spread_hi.max(candidate.phi);
        if candidate.phi < best.phi {
            best = candidate;
        }
    }
    if spread_hi - spread_lo > START_SPREAD_TOLERANCE * (1.0 + spread_hi.abs()) {
        return Err(Error::NonConvergence(format!(
            "multi-start disagreement {:e}",
            spread_hi - spread_lo
        )));
    }
    let dual = best.phi - nu * t;
    let feasible_objective = reduced.objective(&best);
    let constraint = reduced.constraint(&best);
    Ok(SimplexSolution {
        value: dual.max(0.0),
        q1: reduced.lift(&best.q1),
        q2: reduced.lift(&best.q2),
        multiplier: nu,
        constraint,
        duality_gap: (feasible_objective - dual).max(0.0),
    })
}

fn check_alpha_lambda(alpha: f64, lambda: f64) -> Result<()> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    if !(lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!("lambda must be nonnegative, got {lambda}")));
    }
    Ok(())
}

/// Gutman's type-II exponent function
/// `min alpha D(Q1||P1) + D(Q2||P2)` s.t. `GJS(Q1,Q2,alpha) <= lambda`.
pub fn big_f(alpha: f64, lambda: f64, p1: &Distribution, p2: &Distribution) -> Result<f64> {
    check_alpha_lambda(alpha, lambda)?;
    Ok(minimize_over_simplices(&SimplexOptProblem::gutman_f(alpha, lambda, p1, p2)?)?.value)
}

/// `min D(Q1||P1) + D(Q2||P2)/alpha` s.t. `GJS(Q1,Q2,alpha)/alpha <= lambda`.
pub fn f1(alpha: f64, lambda: f64, p1: &Distribution, p2: &Distribution) -> Result<f64> {
    check_alpha_lambda(alpha, lambda)?;
    Ok(minimize_over_simplices(&SimplexOptProblem::gutman_f1(alpha, lambda, p1, p2)?)?.value)
}

/// Mirror of [`f1`] for the test built on the second training sequence.
pub fn f2(alpha: f64, lambda: f64, p1: &Distribution, p2: &Distribution) -> Result<f64> {
    check_alpha_lambda(alpha, lambda)?;
    Ok(minimize_over_simplices(&SimplexOptProblem::gutman_f2(alpha, lambda, p1, p2)?)?.value)
}

/// Bayesian exponent of Gutman's test at length ratio `alpha`: the crossing
/// `lambda*` of `lambda` and `F1(alpha, lambda)`, found by bisection on
/// `[0, GJS(p1,p2,alpha)/alpha]`. Identical sources give 0.
pub fn gutman_bayes_exponent(alpha: f64, p1: &Distribution, p2: &Distribution) -> Result<f64> {
    check_alpha_lambda(alpha, 0.0)?;
    p1.check_same_alphabet(p2)?;
    if p1.approx_eq(p2) {
        return Ok(0.0);
    }
    let upper = gjs(p1, p2, alpha)? / alpha;
    let (mut lo, mut hi) = (0.0f64, upper);
    while hi - lo > 1e-13 * upper {
        let mid = 0.5 * (lo + hi);
        if f1(alpha, mid, p1, p2)? > mid {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `min D(V || p_obj)` over the KL ball `D(V || p_center) <= radius`.
///
/// The minimizer lies on the geometric path
/// `V_s ∝ p_obj^(1-s) p_center^s`, `s in [0, 1]`, along which
/// `D(V_s || p_center)` decreases from `D(p_obj || p_center)` to 0; `s` is
/// bisected to meet the radius.
pub fn constrained_kl_min(p_center: &Distribution, p_obj: &Distribution, radius: f64) -> Result<f64> {
    p_center.check_same_alphabet(p_obj)?;
    if !(radius >= 0.0) {
        return Err(Error::InvalidParameter(format!("radius must be nonnegative, got {radius}")));
    }
    let c = p_center.weights();
    let o = p_obj.weights();
    if kl_of(o, c) <= radius {
        return Ok(0.0);
    }
    if radius == 0.0 {
        return Ok(kl_of(c, o));
    }
    let path = |s: f64| -> Vec<f64> {
        let raw: Vec<f64> = o
            .iter()
            .zip(c)
            .map(|(&a, &b)| {
                if (a == 0.0 && s < 1.0) || (b == 0.0 && s > 0.0) {
                    0.0
                } else {
                    a.powf(1.0 - s) * b.powf(s)
                }
            })
            .collect();
        let z: f64 = raw.iter().sum();
        raw.into_iter().map(|v| v / z).collect()
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        if hi - lo <= 1e-15 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if kl_of(&path(mid), c) > radius {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(kl_of(&path(hi), o))
}

/// Closed form of `min sum w_i e_i` s.t. `sum |e_i| <= delta`, `sum e_i = 0`:
/// `(delta / 2) (min w - max w)`.
pub fn lp_closed_form(w: &[f64], delta: f64) -> Result<f64> {
    if w.is_empty() {
        return Err(Error::EmptyWeights);
    }
    if !(delta >= 0.0) {
        return Err(Error::InvalidParameter(format!("delta must be nonnegative, got {delta}")));
    }
    let min = w.iter().copied().fold(f64::INFINITY, f64::min);
    let max = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(0.5 * delta * (min - max))
}

/// Minimum of `GJS(P_i, P_j, alpha) / alpha` over ordered distinct pairs,
/// with the lexicographically first minimizing pair.
pub fn bayes_multiclass_gutman_with_pair(
    dists: &[Distribution],
    alpha: f64,
) -> Result<(f64, (usize, usize))> {
    check_alpha_lambda(alpha, 0.0)?;
    check_distinct(dists)?;
    let mut best = (f64::INFINITY, (0, 0));
    for i in 0..dists.len() {
        for j in 0..dists.len() {
            if i != j {
                let v = gjs(&dists[i], &dists[j], alpha)? / alpha;
                if v < best.0 {
                    best = (v, (i, j));
                }
            }
        }
    }
    Ok(best)
}

/// Bayesian exponent of Gutman's multiclass test (with rejection).
pub fn bayes_multiclass_gutman(dists: &[Distribution], alpha: f64) -> Result<f64> {
    Ok(bayes_multiclass_gutman_with_pair(dists, alpha)?.0)
}

/// One row of the sequential-vs-Gutman Bayesian exponent comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub gamma: f64,
    pub theta_star: f64,
    pub beta_star: f64,
    /// `min(theta_star, beta_star)`: Gutman's length ratio at matched budget.
    pub alpha_used: f64,
    pub sequential_bayes: f64,
    pub gutman_bayes: f64,
    pub margin: f64,
}

/// Column header of the comparison CSV.
pub const COMPARISON_CSV_HEADER: &str =
    "gamma,theta_star,beta_star,alpha_used,seq_exponent,gutman_exponent,margin";

impl ComparisonRow {
    pub fn csv_record(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.gamma,
            self.theta_star,
            self.beta_star,
            self.alpha_used,
            self.sequential_bayes,
            self.gutman_bayes,
            self.margin
        )
    }
}

pub fn compare_sequential_vs_gutman(
    p1: &Distribution,
    p2: &Distribution,
    gamma_grid: &[f64],
) -> Result<Vec<ComparisonRow>> {
    let cap = chernoff(p1, p2)?;
    for &gamma in gamma_grid {
        gate_gamma(gamma, cap)?;
    }
    gamma_grid
        .iter()
        .map(|&gamma| {
            let report = exponent_report(p1, p2, gamma)?;
            let alpha_used = report.theta_star.min(report.beta_star);
            let gutman = gutman_bayes_exponent(alpha_used, p1, p2)?;
            Ok(ComparisonRow {
                gamma,
                theta_star: report.theta_star,
                beta_star: report.beta_star,
                alpha_used,
                sequential_bayes: gamma,
                gutman_bayes: gutman,
                margin: gamma - gutman,
            })
        })
        .collect()
}
