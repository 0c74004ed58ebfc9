//! Gauss–Legendre rules and an adaptive bisection driver.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use crate::error::{Error, Result};

/// Nodes and weights on [-1, 1], computed by Newton iteration on Pₙ.
pub fn legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        // re-evaluate the derivative at the converged node
        let (mut p0, mut p1) = (1.0, 0.0);
        for j in 0..n {
            let p2 = p1;
            p1 = p0;
            p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
        }
        if z * z != 1.0 {
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

type Rule = &'static (Vec<f64>, Vec<f64>);

/// Cached rule; rules are leaked once per order and live for the process.
pub fn cached_rule(n: usize) -> Rule {
    static CACHE: OnceLock<Mutex<HashMap<usize, Rule>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("rule cache poisoned");
    *guard
        .entry(n)
        .or_insert_with(|| Box::leak(Box::new(legendre_rule(n))))
}

pub fn gauss_legendre<F: Fn(f64) -> f64>(a: f64, b: f64, n: usize, f: F) -> f64 {
    let (x, w) = cached_rule(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    x.iter()
        .zip(w)
        .map(|(xi, wi)| wi * f(mid + half * xi))
        .sum::<f64>()
        * half
}

const PANEL_ORDER: usize = 16;
const MAX_DEPTH: u32 = 40;

/// Adaptive panel quadrature: a 16-point panel is accepted once it agrees
/// with the sum over its two halves to `tol` (scaled by panel width).
pub fn adaptive<F: Fn(f64) -> f64>(a: f64, b: f64, tol: f64, f: &F) -> Result<f64> {
    let whole = gauss_legendre(a, b, PANEL_ORDER, f);
    let mut residual = 0.0;
    let v = refine(a, b, whole, tol, 0, f, &mut residual);
    if residual > tol.max(1e-300) {
        Err(Error::Quadrature { residual })
    } else {
        Ok(v)
    }
}

fn refine<F: Fn(f64) -> f64>(
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    f: &F,
    residual: &mut f64,
) -> f64 {
    let m = 0.5 * (a + b);
    let left = gauss_legendre(a, m, PANEL_ORDER, f);
    let right = gauss_legendre(m, b, PANEL_ORDER, f);
    let split = left + right;
    let err = (split - whole).abs();
    if err <= tol || !err.is_finite() {
        if !err.is_finite() {
            *residual = f64::INFINITY;
        }
        return split;
    }
    if depth >= MAX_DEPTH {
        *residual = residual.max(err);
        return split;
    }
    refine(a, m, left, 0.5 * tol, depth + 1, f, residual)
        + refine(m, b, right, 0.5 * tol, depth + 1, f, residual)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        for n in [1, 2, 5, 16, 64] {
            let (x, w) = legendre_rule(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            for deg in 0..(2 * n) {
                let q: f64 = x
                    .iter()
                    .zip(&w)
                    .map(|(xi, wi)| wi * xi.powi(deg as i32))
                    .sum();
                let exact = if deg % 2 == 1 {
                    0.0
                } else {
                    2.0 / (deg + 1) as f64
                };
                assert!((q - exact).abs() < 1e-13, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        let f = |x: f64| 1.0 / (1e-4 + x * x);
        let exact = 2.0 * (1.0 / 1e-2) * (1.0 / 1e-2f64).atan();
        let v = adaptive(-1.0, 1.0, 1e-10, &f).unwrap();
        assert!((v - exact).abs() < 1e-8);
    }

    #[test]
    fn adaptive_reports_nonconvergence() {
        let f = |x: f64| if x > 0.3 { f64::NAN } else { 1.0 };
        assert!(matches!(
            adaptive(0.0, 1.0, 1e-12, &f),
            Err(Error::Quadrature { .. })
        ));
    }
}
