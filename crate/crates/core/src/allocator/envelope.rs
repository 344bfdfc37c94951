use std::f64::consts::E;

use super::AllocInstance;

/// `c · exp(-s / x)` for `x > 0`, and 0 at `x <= 0`.
#[inline]
pub fn g_value(x: f64, c: f64, s: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        c * (-s / x).exp()
    }
}

/// Concave upper envelope of [`g_value`]: the tangent line through the
/// origin on `[0, s)`, the original curve on `[s, ∞)`.
#[inline]
pub fn g_tilde(x: f64, c: f64, s: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x < s {
        c * x / (E * s)
    } else {
        c * (-s / x).exp()
    }
}

/// Derivative of [`g_tilde`]; continuous at the tangency point `x = s`.
#[inline]
pub fn g_tilde_slope(x: f64, c: f64, s: f64) -> f64 {
    if x < s {
        c / (E * s)
    } else {
        c * s / (x * x) * (-s / x).exp()
    }
}

/// Largest slope of `g_value` over `x > 0`, attained at `x = s/2`.
pub fn g_max_slope(c: f64, s: f64) -> f64 {
    4.0 * c / (E * E * s)
}

/// `Σ_k g̃_k(p̂_k)`.
pub fn envelope_objective(hat: &[f64], inst: &AllocInstance) -> f64 {
    hat.iter()
        .zip(inst.coefficients())
        .zip(inst.scales())
        .map(|((&x, &c), &s)| g_tilde(x, c, s))
        .sum()
}

/// Expected weighted age drop (without the constant `-1`) of the served
/// set under transformed powers `hat`:
/// `Σ_k c_k exp(-s_k · max_{t ≤ k} 1/p̂_t)`.
///
/// A non-positive `p̂_t` zeroes every term from position `t` on. For
/// nonincreasing `hat` this is `Σ_k g(p̂_k)`.
pub fn evaluate_true_objective(hat: &[f64], inst: &AllocInstance) -> f64 {
    let mut total = 0.0;
    let mut prefix_min = f64::INFINITY;
    for ((&x, &c), &s) in hat.iter().zip(inst.coefficients()).zip(inst.scales()) {
        prefix_min = prefix_min.min(x);
        if prefix_min <= 0.0 {
            break;
        }
        total += g_value(prefix_min, c, s);
    }
    total
}

/// Upper bound `e^{-2} Σ_k c_k` on the loss from optimizing the envelope
/// instead of the true objective.
pub fn gap_bound(inst: &AllocInstance) -> f64 {
    inst.coefficients().iter().sum::<f64>() / (E * E)
}
