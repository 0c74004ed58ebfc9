//! Radial part `P(ω)` of a separable ensemble and its expectations
//! `⟨f(ω)⟩_P = ∫ f(ω) P(ω) ω² dω`.
//!
//! Everything is expressed through the effective measure `P(ω) ω² dω`, which
//! is finite even where `P` itself is not (the reciprocal-square model).

use std::f64::consts::{FRAC_2_SQRT_PI, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::{adaptive, gauss_legendre};
use crate::special::dawson;

const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;

#[derive(Clone, Debug, PartialEq)]
pub enum RadialModel {
    /// `P = √(2/π) e^{−ω²/2ω_c²} / ω_c³` (Maxwell effective measure).
    Gaussian {
        cutoff: f64,
    },
    /// `P = ω e^{−ω/ω_c} / 6ω_c⁴` (Gamma(4) effective measure).
    ExpCutoff {
        cutoff: f64,
    },
    /// `P = 1/(ω_c ω²)` on `[0, ω_c]` (uniform effective measure).
    ReciprocalSquare {
        cutoff: f64,
    },
    Tabulated(RadialTable),
}

/// Sampled `P(ω)` on a grid; the effective measure `P ω²` is interpolated
/// linearly between nodes and vanishes outside the grid.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialTable {
    omega: Vec<f64>,
    density: Vec<f64>,
    effective: Vec<f64>,
    norm: f64,
}

impl RadialTable {
    pub fn new(omega: Vec<f64>, density: Vec<f64>) -> Result<Self> {
        if omega.is_empty() {
            return Err(Error::Model("radial table is empty".into()));
        }
        if omega.len() != density.len() {
            return Err(Error::Model("radial table columns differ in length".into()));
        }
        if omega.len() < 2 {
            return Err(Error::Model("radial table needs at least two nodes".into()));
        }
        if omega.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Model(
                "radial grid must be finite and nonnegative".into(),
            ));
        }
        if omega.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Model(
                "radial grid must be strictly increasing".into(),
            ));
        }
        if density.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::Model(
                "radial density must be finite and nonnegative".into(),
            ));
        }
        let effective: Vec<f64> = omega.iter().zip(&density).map(|(w, p)| p * w * w).collect();
        let norm = omega
            .windows(2)
            .zip(effective.windows(2))
            .map(|(w, g)| 0.5 * (w[1] - w[0]) * (g[0] + g[1]))
            .sum::<f64>();
        if !(norm > 0.0) {
            return Err(Error::Model("radial table has zero mass".into()));
        }
        Ok(Self {
            omega,
            density,
            effective,
            norm,
        })
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    /// Node values of `P(ω) ω²`.
    pub fn effective(&self) -> &[f64] {
        &self.effective
    }

    fn effective_at(&self, w: f64) -> f64 {
        let n = self.omega.len();
        if w < self.omega[0] || w > self.omega[n - 1] {
            return 0.0;
        }
        let k = match self.omega.partition_point(|x| *x <= w) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        };
        let (a, b) = (self.omega[k], self.omega[k + 1]);
        let s = (w - a) / (b - a);
        self.effective[k] * (1.0 - s) + self.effective[k + 1] * s
    }

    /// `∫ h(ω) g(ω) dω` for the interpolated effective measure `g`, with
    /// panels short enough that `h` varies by at most about one radian of
    /// phase at frequency `rate`.
    fn integrate<H: Fn(f64) -> f64>(&self, rate: f64, h: H) -> f64 {
        let mut total = 0.0;
        for k in 0..self.omega.len() - 1 {
            let (a, b) = (self.omega[k], self.omega[k + 1]);
            let (ga, gb) = (self.effective[k], self.effective[k + 1]);
            let panels = ((b - a) * rate.abs()).ceil().max(1.0) as usize;
            let width = (b - a) / panels as f64;
            for p in 0..panels {
                let lo = a + p as f64 * width;
                total += gauss_legendre(lo, lo + width, 8, |w| {
                    let s = (w - a) / (b - a);
                    (ga * (1.0 - s) + gb * s) * h(w)
                });
            }
        }
        total
    }
}

impl RadialModel {
    pub fn gaussian(cutoff: f64) -> Result<Self> {
        check_cutoff(cutoff)?;
        Ok(Self::Gaussian { cutoff })
    }

    pub fn exp_cutoff(cutoff: f64) -> Result<Self> {
        check_cutoff(cutoff)?;
        Ok(Self::ExpCutoff { cutoff })
    }

    pub fn reciprocal_square(cutoff: f64) -> Result<Self> {
        check_cutoff(cutoff)?;
        Ok(Self::ReciprocalSquare { cutoff })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Gaussian { .. } => "gaussian",
            Self::ExpCutoff { .. } => "exp-cutoff",
            Self::ReciprocalSquare { .. } => "reciprocal-square",
            Self::Tabulated(_) => "tabulated",
        }
    }

    pub fn is_builtin(&self) -> bool {
        !matches!(self, Self::Tabulated(_))
    }

    /// Characteristic frequency; for tables, the largest grid frequency.
    pub fn cutoff(&self) -> f64 {
        match self {
            Self::Gaussian { cutoff }
            | Self::ExpCutoff { cutoff }
            | Self::ReciprocalSquare { cutoff } => *cutoff,
            Self::Tabulated(t) => *t.omega.last().expect("validated non-empty"),
        }
    }

    /// `∫ P ω² dω`, i.e. `1/ξ`.
    pub fn normalization(&self) -> f64 {
        match self {
            Self::Tabulated(t) => t.norm,
            _ => 1.0,
        }
    }

    pub fn density(&self, w: f64) -> f64 {
        if w < 0.0 {
            return 0.0;
        }
        match *self {
            Self::Gaussian { cutoff } => {
                SQRT_2_OVER_PI * (-0.5 * (w / cutoff).powi(2)).exp() / cutoff.powi(3)
            }
            Self::ExpCutoff { cutoff } => w * (-w / cutoff).exp() / (6.0 * cutoff.powi(4)),
            Self::ReciprocalSquare { cutoff } => {
                if w <= cutoff {
                    1.0 / (cutoff * w * w)
                } else {
                    0.0
                }
            }
            Self::Tabulated(ref t) => {
                if w == 0.0 {
                    t.density[0]
                } else {
                    t.effective_at(w) / (w * w)
                }
            }
        }
    }

    /// `P(ω) ω²`.
    pub fn effective_density(&self, w: f64) -> f64 {
        if w < 0.0 {
            return 0.0;
        }
        match *self {
            Self::Gaussian { cutoff } => {
                let x = w / cutoff;
                SQRT_2_OVER_PI * x * x * (-0.5 * x * x).exp() / cutoff
            }
            Self::ExpCutoff { cutoff } => {
                let x = w / cutoff;
                x * x * x * (-x).exp() / (6.0 * cutoff)
            }
            Self::ReciprocalSquare { cutoff } => {
                if w <= cutoff {
                    1.0 / cutoff
                } else {
                    0.0
                }
            }
            Self::Tabulated(ref t) => t.effective_at(w),
        }
    }

    /// Upper end of the support (infinite for Gaussian and exponential cutoff).
    pub fn support_end(&self) -> f64 {
        match self {
            Self::Gaussian { .. } | Self::ExpCutoff { .. } => f64::INFINITY,
            Self::ReciprocalSquare { cutoff } => *cutoff,
            Self::Tabulated(t) => *t.omega.last().expect("validated non-empty"),
        }
    }

    /// `⟨cos ωt⟩_P`.
    pub fn cos_expectation(&self, t: f64) -> f64 {
        match *self {
            Self::Gaussian { cutoff } => {
                let x = cutoff * t;
                (-0.5 * x * x).exp() * (1.0 - x * x)
            }
            Self::ExpCutoff { cutoff } => exp_cutoff_characteristic(cutoff * t).re,
            Self::ReciprocalSquare { cutoff } => sinc(cutoff * t),
            Self::Tabulated(ref tab) => tab.integrate(t, |w| (w * t).cos()),
        }
    }

    /// `⟨sin ωt⟩_P`.
    pub fn sin_expectation(&self, t: f64) -> f64 {
        match *self {
            Self::Gaussian { cutoff } => {
                let x = cutoff * t;
                SQRT_2_OVER_PI * x
                    + FRAC_2_SQRT_PI * (1.0 - x * x) * dawson(x / std::f64::consts::SQRT_2)
            }
            Self::ExpCutoff { cutoff } => exp_cutoff_characteristic(cutoff * t).im,
            Self::ReciprocalSquare { cutoff } => versinc(cutoff * t),
            Self::Tabulated(ref tab) => tab.integrate(t, |w| (w * t).sin()),
        }
    }

    /// `d/dt ⟨cos ωt⟩_P = −⟨ω sin ωt⟩_P`.
    pub fn cos_derivative(&self, t: f64) -> f64 {
        match *self {
            Self::Gaussian { cutoff } => {
                let x = cutoff * t;
                cutoff * (-0.5 * x * x).exp() * x * (x * x - 3.0)
            }
            Self::ExpCutoff { cutoff } => {
                cutoff * exp_cutoff_characteristic_derivative(cutoff * t).re
            }
            Self::ReciprocalSquare { cutoff } => cutoff * sinc_derivative(cutoff * t),
            Self::Tabulated(ref tab) => -tab.integrate(t, |w| w * (w * t).sin()),
        }
    }

    /// `d/dt ⟨sin ωt⟩_P = ⟨ω cos ωt⟩_P`.
    pub fn sin_derivative(&self, t: f64) -> f64 {
        match *self {
            Self::Gaussian { cutoff } => {
                let x = cutoff * t;
                cutoff
                    * (SQRT_2_OVER_PI * (2.0 - x * x)
                        - FRAC_2_SQRT_PI * x * (3.0 - x * x) * dawson(x / std::f64::consts::SQRT_2))
            }
            Self::ExpCutoff { cutoff } => {
                cutoff * exp_cutoff_characteristic_derivative(cutoff * t).im
            }
            Self::ReciprocalSquare { cutoff } => cutoff * versinc_derivative(cutoff * t),
            Self::Tabulated(ref tab) => tab.integrate(t, |w| w * (w * t).cos()),
        }
    }

    /// `⟨ω⟩_P`, the initial slope of `⟨sin ωt⟩_P`.
    pub fn mean_omega(&self) -> Result<f64> {
        let v = match *self {
            Self::Gaussian { cutoff } => 2.0 * SQRT_2_OVER_PI * cutoff,
            Self::ExpCutoff { cutoff } => 4.0 * cutoff,
            Self::ReciprocalSquare { cutoff } => 0.5 * cutoff,
            Self::Tabulated(ref tab) => tab.integrate(0.0, |w| w),
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Quadrature { residual: v })
        }
    }

    /// `∫ f(ωt) P(ω) ω² dω` by adaptive panel quadrature, independent of the
    /// closed forms above. Panels are at most half a period of `f(ωt)` wide;
    /// infinite tails are cut once the effective measure falls below 1e-14.
    pub fn expectation_quadrature<F: Fn(f64) -> f64>(&self, f: F, t: f64) -> Result<f64> {
        let g = |w: f64| f(w * t) * self.effective_density(w);
        let scale = self.cutoff();
        let half_period = if t.abs() > 0.0 {
            PI / t.abs()
        } else {
            f64::INFINITY
        };
        let tol = 1e-15;

        match self {
            Self::Tabulated(tab) => {
                let mut total = 0.0;
                for w in tab.omega.windows(2) {
                    let panels = ((w[1] - w[0]) / half_period).ceil().max(1.0) as usize;
                    let h = (w[1] - w[0]) / panels as f64;
                    for p in 0..panels {
                        let a = w[0] + p as f64 * h;
                        total += adaptive(a, a + h, tol, &g)?;
                    }
                }
                Ok(total)
            }
            Self::ReciprocalSquare { cutoff } => {
                let panels = (cutoff / half_period).ceil().max(1.0) as usize;
                let h = cutoff / panels as f64;
                (0..panels).try_fold(0.0, |acc, p| {
                    let a = p as f64 * h;
                    Ok(acc + adaptive(a, a + h, tol, &g)?)
                })
            }
            Self::Gaussian { .. } | Self::ExpCutoff { .. } => {
                let width = half_period.min(0.5 * scale);
                let mut total = 0.0;
                let mut a = 0.0;
                loop {
                    let b = a + width;
                    total += adaptive(a, b, tol, &g)?;
                    a = b;
                    if a > 4.0 * scale && self.effective_density(a) * scale < 1e-14 {
                        break;
                    }
                    if a > 1e4 * scale {
                        return Err(Error::Quadrature {
                            residual: self.effective_density(a) * scale,
                        });
                    }
                }
                Ok(total)
            }
        }
    }
}

fn check_cutoff(cutoff: f64) -> Result<()> {
    if cutoff.is_finite() && cutoff > 0.0 {
        Ok(())
    } else {
        Err(Error::Model(format!(
            "cutoff must be positive, got {cutoff}"
        )))
    }
}

/// `(1 − ix)^{-4}`: real part is `⟨cos⟩`, imaginary part `⟨sin⟩` for ω_c = 1.
fn exp_cutoff_characteristic(x: f64) -> Complex64 {
    Complex64::new(1.0, -x).powi(-4)
}

/// `d/dx (1 − ix)^{-4} = 4i (1 − ix)^{-5}`.
fn exp_cutoff_characteristic_derivative(x: f64) -> Complex64 {
    Complex64::new(0.0, 4.0) * Complex64::new(1.0, -x).powi(-5)
}

const SMALL_ARG: f64 = 0.1;

// sin x / x
fn sinc(x: f64) -> f64 {
    if x.abs() < SMALL_ARG {
        let x2 = x * x;
        1.0 - x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0)))
    } else {
        x.sin() / x
    }
}

// (x cos x − sin x)/x²
fn sinc_derivative(x: f64) -> f64 {
    if x.abs() < SMALL_ARG {
        let x2 = x * x;
        -x / 3.0 * (1.0 - x2 / 10.0 * (1.0 - x2 / 28.0 * (1.0 - x2 / 54.0 * (1.0 - x2 / 88.0))))
    } else {
        (x * x.cos() - x.sin()) / (x * x)
    }
}

// (1 − cos x)/x
fn versinc(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if x.abs() < SMALL_ARG {
        let x2 = x * x;
        x / 2.0 * (1.0 - x2 / 12.0 * (1.0 - x2 / 30.0 * (1.0 - x2 / 56.0 * (1.0 - x2 / 90.0))))
    } else {
        (1.0 - x.cos()) / x
    }
}

// (x sin x − 1 + cos x)/x²
fn versinc_derivative(x: f64) -> f64 {
    if x.abs() < SMALL_ARG {
        let x2 = x * x;
        0.5 * (1.0 - x2 / 4.0 * (1.0 - x2 / 18.0 * (1.0 - x2 / 40.0 * (1.0 - x2 / 70.0))))
    } else {
        (x * x.sin() - 1.0 + x.cos()) / (x * x)
    }
}
