//! Dawson's integral `F(x) = e^{-x²} ∫₀ˣ e^{s²} ds`.
//!
//! `e^{-x²/2}·erfi(x/√2)` overflows/underflows term by term for large `x`;
//! expressed through Dawson it is `(2/√π)·F(x/√2)` and stays bounded.

use std::f64::consts::PI;

const SERIES_LIMIT: f64 = 0.2;
const ASYMPTOTIC_LIMIT: f64 = 10.0;
/// Sampling step of the Rybicki sum; aliasing error is of order `exp(-(π/2h)²)`.
const RYBICKI_STEP: f64 = 0.2;
/// Gaussian tails beyond this many e-folds are dropped (`exp(-43) < 1e-18`).
const RYBICKI_SPAN: f64 = 6.6;

pub fn dawson(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let ax = x.abs();
    let v = if ax < SERIES_LIMIT {
        series(ax)
    } else if ax <= ASYMPTOTIC_LIMIT {
        rybicki(ax)
    } else {
        asymptotic(ax)
    };
    v.copysign(x)
}

/// `F'(x) = 1 − 2x F(x)`.
pub fn dawson_derivative(x: f64) -> f64 {
    1.0 - 2.0 * x * dawson(x)
}

// Σ (−1)ⁿ 2ⁿ x^{2n+1} / (2n+1)!!
fn series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    for n in 1..40 {
        term *= -2.0 * x2 / (2 * n + 1) as f64;
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

// F(x) = lim_{h→0} π^{-1/2} Σ_{n odd} e^{-(x-nh)²}/n, summed in ± pairs.
fn rybicki(x: f64) -> f64 {
    let h = RYBICKI_STEP;
    let n_max = ((x + RYBICKI_SPAN) / h).ceil() as i64 | 1;
    let mut sum = 0.0;
    let mut n = 1i64;
    while n <= n_max {
        let nh = n as f64 * h;
        let arg = 2.0 * nh * x;
        let pair = if arg < 0.5 {
            2.0 * (-(x * x) - nh * nh).exp() * arg.sinh()
        } else {
            (-(x - nh) * (x - nh)).exp() - (-(x + nh) * (x + nh)).exp()
        };
        sum += pair / n as f64;
        n += 2;
    }
    sum / PI.sqrt()
}

// F(x) ~ (1/2x) Σ (2k−1)!! / (2x²)^k
fn asymptotic(x: f64) -> f64 {
    let inv = 1.0 / (2.0 * x * x);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        let next = term * (2 * k - 1) as f64 * inv;
        if next >= term {
            break;
        }
        term = next;
        sum += term;
        if term < 1e-18 {
            break;
        }
    }
    sum / (2.0 * x)
}
