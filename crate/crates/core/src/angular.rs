//! Solid-angle part `Θ(θ, φ)` of a separable ensemble and its directional
//! moments `⟨n_j⟩_Θ`, `⟨n_j n_k⟩_Θ`.

use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::quadrature::cached_rule;

#[derive(Clone, Debug, PartialEq)]
pub enum AngularModel {
    /// `1/4π`
    Sphere,
    /// `sin θ / π²`
    Bagel,
    /// `(3/4π) cos² θ`
    Dumbbell,
    /// `(1 − cos θ)/4π`
    Cardioid,
    /// `(1 − cos θ)(1 + a cos 2φ)/4π`, lateral asymmetry `a ∈ [0, 1]`.
    KneadedCardioid {
        asymmetry: f64,
    },
    Tabulated(AngularTable),
}

/// First and second directional moments.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DirectionalMoments {
    pub first: Vector3<f64>,
    pub second: Matrix3<f64>,
}

impl DirectionalMoments {
    pub fn new(first: Vector3<f64>, second: Matrix3<f64>) -> Self {
        Self { first, second }
    }

    pub fn diagonal(first: Vector3<f64>, second: [f64; 3]) -> Self {
        Self {
            first,
            second: Matrix3::from_diagonal(&Vector3::from(second)),
        }
    }

    /// `∫Θ dΩ`, since `Σ n_j² = 1`.
    pub fn xi(&self) -> f64 {
        self.second.trace()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.first - other.first)
            .amax()
            .max((self.second - other.second).amax())
    }
}

impl AngularModel {
    pub fn kneaded_cardioid(asymmetry: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&asymmetry) {
            return Err(Error::Model(format!(
                "lateral asymmetry must lie in [0, 1], got {asymmetry}"
            )));
        }
        Ok(Self::KneadedCardioid { asymmetry })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Sphere => "sphere",
            Self::Bagel => "bagel",
            Self::Dumbbell => "dumbbell",
            Self::Cardioid => "cardioid",
            Self::KneadedCardioid { .. } => "kneaded",
            Self::Tabulated(_) => "tabulated",
        }
    }

    pub fn is_builtin(&self) -> bool {
        !matches!(self, Self::Tabulated(_))
    }

    pub fn density(&self, theta: f64, phi: f64) -> f64 {
        match self {
            Self::Sphere => 1.0 / (4.0 * PI),
            Self::Bagel => theta.sin().max(0.0) / (PI * PI),
            Self::Dumbbell => 3.0 / (4.0 * PI) * theta.cos().powi(2),
            Self::Cardioid => (1.0 - theta.cos()) / (4.0 * PI),
            Self::KneadedCardioid { asymmetry } => {
                (1.0 - theta.cos()) * (1.0 + asymmetry * (2.0 * phi).cos()) / (4.0 * PI)
            }
            Self::Tabulated(t) => t.interpolate(theta, phi),
        }
    }

    /// `ξ = ∫Θ dΩ`; exactly one for the built-ins.
    pub fn normalization(&self) -> Result<f64> {
        match self {
            Self::Tabulated(t) => Ok(t.moments()?.xi()),
            _ => Ok(1.0),
        }
    }

    /// Closed-form moments of the built-in geometries.
    pub fn analytic_moments(&self) -> Option<DirectionalMoments> {
        let zero = Vector3::zeros();
        let third = 1.0 / 3.0;
        Some(match self {
            Self::Sphere => DirectionalMoments::diagonal(zero, [third; 3]),
            Self::Bagel => DirectionalMoments::diagonal(zero, [0.375, 0.375, 0.25]),
            Self::Dumbbell => DirectionalMoments::diagonal(zero, [0.2, 0.2, 0.6]),
            Self::Cardioid => {
                DirectionalMoments::diagonal(Vector3::new(0.0, 0.0, -third), [third; 3])
            }
            Self::KneadedCardioid { asymmetry: a } => DirectionalMoments::diagonal(
                Vector3::new(0.0, 0.0, -third),
                [(2.0 + a) / 6.0, (2.0 - a) / 6.0, third],
            ),
            Self::Tabulated(_) => return None,
        })
    }

    pub fn directional_moments(&self) -> Result<DirectionalMoments> {
        match self {
            Self::Tabulated(t) => t.moments(),
            m => Ok(m.analytic_moments().expect("built-in")),
        }
    }

    /// Moments by direct 2D quadrature of the density: Gauss–Legendre in θ
    /// (with the `sin θ` Jacobian) times the trapezoid rule in φ, both
    /// doubled until successive results differ by less than 1e-11.
    pub fn quadrature_moments(&self) -> Result<DirectionalMoments> {
        if let Self::Tabulated(t) = self {
            return t.moments();
        }
        let (mut n_theta, mut n_phi) = (64, 128);
        let mut prev = product_rule_moments(self, n_theta, n_phi);
        for _ in 0..5 {
            n_theta *= 2;
            n_phi *= 2;
            let next = product_rule_moments(self, n_theta, n_phi);
            let diff = next.max_abs_diff(&prev);
            if diff < 1e-11 {
                return Ok(next);
            }
            prev = next;
        }
        Err(Error::Quadrature {
            residual: product_rule_moments(self, n_theta * 2, n_phi * 2).max_abs_diff(&prev),
        })
    }
}

fn product_rule_moments(model: &AngularModel, n_theta: usize, n_phi: usize) -> DirectionalMoments {
    let (x, w) = cached_rule(n_theta);
    let dphi = TAU / n_phi as f64;
    let mut first = Vector3::zeros();
    let mut second = Matrix3::zeros();
    for (xi, wi) in x.iter().zip(w) {
        let theta = 0.5 * PI * (xi + 1.0);
        let (st, ct) = theta.sin_cos();
        let wt = wi * 0.5 * PI * st;
        for k in 0..n_phi {
            let phi = k as f64 * dphi;
            let n = Vector3::new(st * phi.cos(), st * phi.sin(), ct);
            let weight = wt * dphi * model.density(theta, phi);
            first += n * weight;
            second += n * n.transpose() * weight;
        }
    }
    DirectionalMoments { first, second }
}

/// `Θ` sampled on a rectangular (θ, φ) grid. θ nodes span `[0, π]`; φ nodes
/// start at 0 and are periodic, the last cell wrapping back to `2π`.
/// Interpolation is bilinear in (θ, φ).
#[derive(Clone, Debug, PartialEq)]
pub struct AngularTable {
    theta: Vec<f64>,
    phi: Vec<f64>,
    /// `values[i * phi.len() + k]` at `(theta[i], phi[k])`.
    values: Vec<f64>,
}

impl AngularTable {
    pub fn new(theta: Vec<f64>, phi: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if theta.len() < 2 || phi.is_empty() {
            return Err(Error::Model(
                "angular table needs ≥2 θ nodes and ≥1 φ node".into(),
            ));
        }
        if values.len() != theta.len() * phi.len() {
            return Err(Error::Model(
                "angular table is not a full (θ, φ) grid".into(),
            ));
        }
        if theta.windows(2).any(|w| w[1] <= w[0]) || phi.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Model(
                "angular grid nodes must be strictly increasing".into(),
            ));
        }
        if theta[0].abs() > 1e-12 || (theta[theta.len() - 1] - PI).abs() > 1e-12 {
            return Err(Error::Model("θ nodes must span [0, π]".into()));
        }
        if phi[0].abs() > 1e-12 || phi[phi.len() - 1] >= TAU - 1e-12 {
            return Err(Error::Model(
                "φ nodes must start at 0 and stay below 2π".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Model(
                "angular density must be finite and nonnegative".into(),
            ));
        }
        Ok(Self { theta, phi, values })
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn n_theta_cells(&self) -> usize {
        self.theta.len() - 1
    }

    pub fn n_phi_cells(&self) -> usize {
        self.phi.len()
    }

    pub(crate) fn value(&self, i: usize, k: usize) -> f64 {
        self.values[i * self.phi.len() + k % self.phi.len()]
    }

    pub(crate) fn phi_bounds(&self, k: usize) -> (f64, f64) {
        let lo = self.phi[k];
        let hi = if k + 1 < self.phi.len() {
            self.phi[k + 1]
        } else {
            TAU
        };
        (lo, hi)
    }

    pub(crate) fn theta_bounds(&self, i: usize) -> (f64, f64) {
        (self.theta[i], self.theta[i + 1])
    }

    /// Corner values `(v00, v01, v10, v11)` of cell `(i, k)`; first index θ.
    pub(crate) fn corners(&self, i: usize, k: usize) -> (f64, f64, f64, f64) {
        (
            self.value(i, k),
            self.value(i, k + 1),
            self.value(i + 1, k),
            self.value(i + 1, k + 1),
        )
    }

    pub fn interpolate(&self, theta: f64, phi: f64) -> f64 {
        let theta = theta.clamp(0.0, PI);
        let phi = phi.rem_euclid(TAU);
        let i = (self.theta.partition_point(|x| *x <= theta).max(1) - 1).min(self.theta.len() - 2);
        let k = self.phi.partition_point(|x| *x <= phi).max(1) - 1;
        let (t0, t1) = self.theta_bounds(i);
        let (p0, p1) = self.phi_bounds(k);
        let s = (theta - t0) / (t1 - t0);
        let u = (phi - p0) / (p1 - p0);
        let (v00, v01, v10, v11) = self.corners(i, k);
        (1.0 - s) * ((1.0 - u) * v00 + u * v01) + s * ((1.0 - u) * v10 + u * v11)
    }

    /// Moments of the bilinear interpolant, integrated cell by cell.
    /// Each cell is smooth, so an 8- and a 16-point product rule must agree.
    pub fn moments(&self) -> Result<DirectionalMoments> {
        let coarse = self.cellwise_moments(8);
        let fine = self.cellwise_moments(16);
        let diff = fine.max_abs_diff(&coarse);
        if diff < 1e-11 {
            Ok(fine)
        } else {
            Err(Error::Quadrature { residual: diff })
        }
    }

    fn cellwise_moments(&self, order: usize) -> DirectionalMoments {
        let (x, w) = cached_rule(order);
        let mut first = Vector3::zeros();
        let mut second = Matrix3::zeros();
        for i in 0..self.n_theta_cells() {
            let (t0, t1) = self.theta_bounds(i);
            for k in 0..self.n_phi_cells() {
                let (p0, p1) = self.phi_bounds(k);
                let (v00, v01, v10, v11) = self.corners(i, k);
                for (xa, wa) in x.iter().zip(w) {
                    let s = 0.5 * (xa + 1.0);
                    let theta = t0 + s * (t1 - t0);
                    let (st, ct) = theta.sin_cos();
                    for (xb, wb) in x.iter().zip(w) {
                        let u = 0.5 * (xb + 1.0);
                        let phi = p0 + u * (p1 - p0);
                        let val = (1.0 - s) * ((1.0 - u) * v00 + u * v01)
                            + s * ((1.0 - u) * v10 + u * v11);
                        let weight = wa * wb * 0.25 * (t1 - t0) * (p1 - p0) * st * val;
                        let n = Vector3::new(st * phi.cos(), st * phi.sin(), ct);
                        first += n * weight;
                        second += n * n.transpose() * weight;
                    }
                }
            }
        }
        DirectionalMoments { first, second }
    }
}
