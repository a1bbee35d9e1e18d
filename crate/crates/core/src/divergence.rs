//! Generalized Jensen-Shannon (GJS) divergence and its calculus.
//!
//! For a length ratio `alpha >= 0`,
//!
//! ```text
//! GJS(p, q, alpha) = alpha * D(p || m) + D(q || m),   m = (alpha p + q) / (1 + alpha)
//! ```
//!
//! The primary evaluation uses the KL form with `ln_1p` on the ratio
//! `m / p`, which keeps full relative accuracy both as `alpha -> 0` (where
//! the value is `O(alpha)`) and for very large `alpha`. The entropy form
//! `(1 + alpha) H(m) - alpha H(p) - H(q)` and the mutual-information form
//! are exposed separately so the routes can be cross-checked.

use crate::error::{Error, Result};
use crate::probability::{entropy_of, Distribution, EmpiricalType};

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha >= 0.0 {
        Ok(())
    } else {
        Err(Error::NegativeAlpha(alpha))
    }
}

/// GJS on raw weight slices (no validation).
pub(crate) fn gjs_of(p: &[f64], q: &[f64], alpha: f64) -> f64 {
    if alpha == 0.0 {
        return 0.0;
    }
    let s = 1.0 + alpha;
    let mut total = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        // m / a = 1 + (b - a) / (s a),  m / b = 1 + alpha (a - b) / (s b)
        if a > 0.0 {
            total -= alpha * a * ((b - a) / (s * a)).ln_1p();
        }
        if b > 0.0 {
            total -= b * (alpha * (a - b) / (s * b)).ln_1p();
        }
    }
    total.max(0.0)
}

fn mixture_of(p: &[f64], q: &[f64], alpha: f64) -> Vec<f64> {
    let s = 1.0 + alpha;
    p.iter()
        .zip(q)
        .map(|(&a, &b)| (alpha * a + b) / s)
        .collect()
}

/// The `alpha`-mixture `(alpha p + q) / (1 + alpha)`.
pub fn mixture(p: &Distribution, q: &Distribution, alpha: f64) -> Result<Distribution> {
    p.check_same_alphabet(q)?;
    check_alpha(alpha)?;
    Ok(Distribution::from_trusted(
        p.alphabet().clone(),
        mixture_of(p.weights(), q.weights(), alpha),
    ))
}

/// GJS divergence in nats. Finite for every pair of distributions.
pub fn gjs(p: &Distribution, q: &Distribution, alpha: f64) -> Result<f64> {
    p.check_same_alphabet(q)?;
    check_alpha(alpha)?;
    Ok(gjs_of(p.weights(), q.weights(), alpha))
}

/// GJS through entropies: `(1 + alpha) H(m) - alpha H(p) - H(q)`.
pub fn gjs_entropy_form(p: &Distribution, q: &Distribution, alpha: f64) -> Result<f64> {
    p.check_same_alphabet(q)?;
    check_alpha(alpha)?;
    let m = mixture_of(p.weights(), q.weights(), alpha);
    Ok((1.0 + alpha) * entropy_of(&m) - alpha * entropy_of(p.weights()) - entropy_of(q.weights()))
}

/// `(1 + alpha) I(Z; W)` where `W ~ Bern(1 / (1 + alpha))` selects whether
/// `Z` is drawn from `q` (W = 1) or from `p` (W = 0).
pub fn gjs_mutual_info_form(p: &Distribution, q: &Distribution, alpha: f64) -> Result<f64> {
    p.check_same_alphabet(q)?;
    check_alpha(alpha)?;
    let w0 = alpha / (1.0 + alpha);
    let w1 = 1.0 / (1.0 + alpha);
    let m = mixture_of(p.weights(), q.weights(), alpha);
    let h_z = entropy_of(&m);
    let h_z_given_w = w0 * entropy_of(p.weights()) + w1 * entropy_of(q.weights());
    Ok((1.0 + alpha) * (h_z - h_z_given_w))
}

/// `d GJS / d alpha = D(p || m)`. Defined for interior distributions only.
pub fn gjs_alpha_derivative(p: &Distribution, q: &Distribution, alpha: f64) -> Result<f64> {
    p.check_same_alphabet(q)?;
    check_alpha(alpha)?;
    p.require_interior()?;
    q.require_interior()?;
    let s = 1.0 + alpha;
    let value: f64 = p
        .weights()
        .iter()
        .zip(q.weights())
        .map(|(&a, &b)| -a * ((b - a) / (s * a)).ln_1p())
        .sum();
    Ok(value.max(0.0))
}

/// Log of the Chernoff integrand restricted to the joint support, and its
/// derivative in `eta`.
fn chernoff_log_sum(pairs: &[(f64, f64, f64)], eta: f64) -> (f64, f64) {
    let mut sum = 0.0;
    let mut dsum = 0.0;
    for &(p, q, log_ratio) in pairs {
        let t = p.powf(eta) * q.powf(1.0 - eta);
        sum += t;
        dsum += t * log_ratio;
    }
    (sum.ln(), dsum / sum)
}

/// Chernoff information `-min_{eta in [0,1]} ln sum p^eta q^(1-eta)`.
///
/// The inner function is convex in `eta`; its minimizer is located by
/// bisection on the sign of the analytic derivative to a bracket of 1e-12.
/// Symbols outside the joint support contribute nothing for `eta` in
/// `(0, 1)` and are dropped, which yields the continuous extension at the
/// endpoints. Disjoint supports give `+inf`.
pub fn chernoff(p: &Distribution, q: &Distribution) -> Result<f64> {
    p.check_same_alphabet(q)?;
    Ok(chernoff_with_argmin(p.weights(), q.weights()).0)
}

/// Returns `(C, eta*)`.
pub(crate) fn chernoff_with_argmin(p: &[f64], q: &[f64]) -> (f64, f64) {
    let pairs: Vec<(f64, f64, f64)> = p
        .iter()
        .zip(q)
        .filter(|(&a, &b)| a > 0.0 && b > 0.0)
        .map(|(&a, &b)| (a, b, (a / b).ln()))
        .collect();
    if pairs.is_empty() {
        return (f64::INFINITY, 0.5);
    }
    let slope = |eta: f64| chernoff_log_sum(&pairs, eta).1;
    let eta = if slope(0.0) >= 0.0 {
        0.0
    } else if slope(1.0) <= 0.0 {
        1.0
    } else {
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        while hi - lo > 1e-12 {
            let mid = 0.5 * (lo + hi);
            if slope(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let value = -chernoff_log_sum(&pairs, eta).0;
    (value.max(0.0), eta)
}

/// `-(1/n) ln W^{N+n}(v^N, w^n)` for sequences with types `t1` (length N)
/// and `t2` (length n), i.e. `(N/n)[D(T1||w) + H(T1)] + D(T2||w) + H(T2)`.
pub fn joint_sequence_exponent(
    t1: &EmpiricalType,
    t2: &EmpiricalType,
    w: &Distribution,
) -> Result<f64> {
    t1.check_same_alphabet(t2)?;
    if !std::sync::Arc::ptr_eq(t1.alphabet(), w.alphabet()) && **t1.alphabet() != **w.alphabet()
    {
        return Err(Error::AlphabetMismatch);
    }
    let n = t2.total() as f64;
    let mut log_prob = 0.0;
    for ((&c1, &c2), &wx) in t1.counts().iter().zip(t2.counts()).zip(w.weights()) {
        let c = (c1 + c2) as f64;
        if c > 0.0 {
            if wx <= 0.0 {
                return Ok(f64::INFINITY);
            }
            log_prob += c * wx.ln();
        }
    }
    Ok(-log_prob / n)
}

/// Twice the ordinary Jensen-Shannon divergence, evaluated with `m = (p+q)/2`.
#[cfg(test)]
pub(crate) fn twice_jsd(p: &[f64], q: &[f64]) -> f64 {
    use crate::probability::kl_of;
    let m: Vec<f64> = p.iter().zip(q).map(|(a, b)| 0.5 * (a + b)).collect();
    kl_of(p, &m) + kl_of(q, &m)
}
