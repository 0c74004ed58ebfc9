//! Monte-Carlo ensemble averaging: draw `(ω, n)` from the separable
//! distribution, rotate the initial Bloch vector exactly, average.
//!
//! Samples are split into chunks of fixed size; chunk `k` draws from the
//! ChaCha8 stream `k` of the seed, and chunk statistics are merged in chunk
//! order, so estimates do not depend on the thread count.

use std::f64::consts::{PI, TAU};

use nalgebra::Vector3;
use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::angular::{AngularModel, AngularTable};
use crate::ensemble::SeparableEnsemble;
use crate::error::{Error, Result};
use crate::radial::{RadialModel, RadialTable};
use crate::su2::{rotate_bloch, DensityMatrix, UnitVector};

pub const DEFAULT_CHUNK: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SamplerConfig {
    pub seed: u64,
    pub n_samples: usize,
    pub chunk: usize,
}

impl SamplerConfig {
    pub fn new(seed: u64, n_samples: usize) -> Self {
        Self {
            seed,
            n_samples,
            chunk: DEFAULT_CHUNK,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_samples == 0 || self.chunk == 0 {
            return Err(Error::Model(
                "sample count and chunk size must be positive".into(),
            ));
        }
        Ok(())
    }

    fn stream(&self, chunk: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(chunk as u64);
        rng
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MCEstimate {
    pub bloch_mean: Vector3<f64>,
    pub bloch_stderr: Vector3<f64>,
    pub n: usize,
}

/// Streaming mean and centered second moment (Welford), mergeable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Welford<const N: usize> {
    n: usize,
    mean: [f64; N],
    m2: [f64; N],
}

impl<const N: usize> Default for Welford<N> {
    fn default() -> Self {
        Self {
            n: 0,
            mean: [0.0; N],
            m2: [0.0; N],
        }
    }
}

impl<const N: usize> Welford<N> {
    pub fn push(&mut self, x: &[f64; N]) {
        self.n += 1;
        let inv = 1.0 / self.n as f64;
        for i in 0..N {
            let delta = x[i] - self.mean[i];
            self.mean[i] += delta * inv;
            self.m2[i] += delta * (x[i] - self.mean[i]);
        }
    }

    pub fn merge(&mut self, other: &Self) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let (na, nb) = (self.n as f64, other.n as f64);
        for i in 0..N {
            let delta = other.mean[i] - self.mean[i];
            self.mean[i] += delta * nb / n as f64;
            self.m2[i] += other.m2[i] + delta * delta * na * nb / n as f64;
        }
        self.n = n;
    }

    pub fn count(&self) -> usize {
        self.n
    }

    pub fn mean(&self) -> [f64; N] {
        self.mean
    }

    /// Sample standard deviation over `√n`.
    pub fn stderr(&self) -> [f64; N] {
        let mut out = [0.0; N];
        if self.n > 1 {
            let n = self.n as f64;
            for i in 0..N {
                out[i] = (self.m2[i].max(0.0) / (n - 1.0)).sqrt() / n.sqrt();
            }
        }
        out
    }
}

/// Inverse-CDF sampler for the effective radial measure `P(ω)ω² dω`.
#[derive(Clone, Debug)]
pub enum RadialSampler {
    Maxwell {
        scale: f64,
    },
    Gamma4 {
        scale: f64,
    },
    Uniform {
        end: f64,
    },
    Table {
        table: RadialTable,
        cumulative: Vec<f64>,
    },
}

impl RadialSampler {
    pub fn new(r: &RadialModel) -> Self {
        match r {
            RadialModel::Gaussian { cutoff } => Self::Maxwell { scale: *cutoff },
            RadialModel::ExpCutoff { cutoff } => Self::Gamma4 { scale: *cutoff },
            RadialModel::ReciprocalSquare { cutoff } => Self::Uniform { end: *cutoff },
            RadialModel::Tabulated(t) => {
                let (w, g) = (t.omega(), t.effective());
                let mut cumulative = Vec::with_capacity(w.len());
                let mut acc = 0.0;
                cumulative.push(0.0);
                for k in 0..w.len() - 1 {
                    acc += 0.5 * (w[k + 1] - w[k]) * (g[k] + g[k + 1]);
                    cumulative.push(acc);
                }
                Self::Table {
                    table: t.clone(),
                    cumulative,
                }
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Maxwell { scale } => {
                let g: [f64; 3] = [
                    rng.sample(StandardNormal),
                    rng.sample(StandardNormal),
                    rng.sample(StandardNormal),
                ];
                scale * (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt()
            }
            Self::Gamma4 { scale } => {
                let u: [f64; 4] = [
                    rng.sample(Open01),
                    rng.sample(Open01),
                    rng.sample(Open01),
                    rng.sample(Open01),
                ];
                -scale * (u[0] * u[1] * u[2] * u[3]).ln()
            }
            Self::Uniform { end } => end * rng.random::<f64>(),
            Self::Table { table, cumulative } => {
                let total = *cumulative.last().expect("non-empty table");
                let target = total * rng.random::<f64>();
                let k = (cumulative.partition_point(|c| *c <= target).max(1) - 1)
                    .min(cumulative.len() - 2);
                let (w, g) = (table.omega(), table.effective());
                let width = w[k + 1] - w[k];
                let s = linear_inverse(g[k], g[k + 1], (target - cumulative[k]) / width);
                w[k] + width * s
            }
        }
    }
}

/// Solves `∫₀ˢ (a(1−x) + b x) dx = m` for `s ∈ [0, 1]`.
fn linear_inverse(a: f64, b: f64, m: f64) -> f64 {
    let m = m.max(0.0);
    let disc = (a * a + 2.0 * (b - a) * m).max(0.0);
    let denom = a + disc.sqrt();
    if denom <= 0.0 {
        return 0.0;
    }
    (2.0 * m / denom).clamp(0.0, 1.0)
}

/// Bisection inverse of a monotone CDF on `[lo, hi]`.
fn invert_monotone<F: Fn(f64) -> f64>(cdf: F, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    let tol = 1e-12 * hi.abs().max(1.0);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Sampler for `Θ(θ, φ) sin θ dθ dφ`, normalized.
#[derive(Clone, Debug)]
pub enum AngularSampler {
    Sphere,
    Bagel,
    Dumbbell,
    Cardioid,
    Kneaded { asymmetry: f64 },
    Table(TableSampler),
}

/// Cell-then-coordinate sampler for the bilinear interpolant of a table.
#[derive(Clone, Debug)]
pub struct TableSampler {
    table: AngularTable,
    cumulative: Vec<f64>,
}

impl TableSampler {
    fn new(table: &AngularTable) -> Self {
        let mut cumulative = Vec::with_capacity(table.n_theta_cells() * table.n_phi_cells() + 1);
        let mut acc = 0.0;
        cumulative.push(0.0);
        for i in 0..table.n_theta_cells() {
            for k in 0..table.n_phi_cells() {
                let (a, b) = Self::theta_weights(table, i, k);
                let (t0, t1) = table.theta_bounds(i);
                acc += theta_cdf(a, b, t0, t1, t1);
                cumulative.push(acc);
            }
        }
        Self {
            table: table.clone(),
            cumulative,
        }
    }

    // After integrating over φ the cell density is (A + B s) sin θ,
    // s = (θ − θ₀)/Δθ.
    fn theta_weights(table: &AngularTable, i: usize, k: usize) -> (f64, f64) {
        let (p0, p1) = table.phi_bounds(k);
        let (v00, v01, v10, v11) = table.corners(i, k);
        let dphi = p1 - p0;
        let low = 0.5 * (v00 + v01) * dphi;
        let high = 0.5 * (v10 + v11) * dphi;
        (low, high - low)
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> UnitVector {
        let total = *self.cumulative.last().expect("non-empty table");
        let target = total * rng.random::<f64>();
        let cell = (self.cumulative.partition_point(|c| *c <= target).max(1) - 1)
            .min(self.cumulative.len() - 2);
        let nk = self.table.n_phi_cells();
        let (i, k) = (cell / nk, cell % nk);
        let (t0, t1) = self.table.theta_bounds(i);
        let (a, b) = Self::theta_weights(&self.table, i, k);
        let local = target - self.cumulative[cell];
        let theta = invert_monotone(|th| theta_cdf(a, b, t0, t1, th), local, t0, t1);
        // conditional φ density is linear in u = (φ − φ₀)/Δφ
        let s = (theta - t0) / (t1 - t0);
        let (v00, v01, v10, v11) = self.table.corners(i, k);
        let at0 = (1.0 - s) * v00 + s * v10;
        let at1 = (1.0 - s) * v01 + s * v11;
        let (p0, p1) = self.table.phi_bounds(k);
        let mass = 0.5 * (at0 + at1);
        let u = if mass > 0.0 {
            linear_inverse(at0, at1, mass * rng.random::<f64>())
        } else {
            rng.random::<f64>()
        };
        UnitVector::new(theta, p0 + (p1 - p0) * u)
    }
}

// ∫_{θ₀}^{θ} (A + B (x − θ₀)/Δθ) sin x dx
fn theta_cdf(a: f64, b: f64, t0: f64, t1: f64, theta: f64) -> f64 {
    let dt = t1 - t0;
    let plain = t0.cos() - theta.cos();
    let ramp = -(theta - t0) * theta.cos() + theta.sin() - t0.sin();
    a * plain + b * ramp / dt
}

impl AngularSampler {
    pub fn new(a: &AngularModel) -> Self {
        match a {
            AngularModel::Sphere => Self::Sphere,
            AngularModel::Bagel => Self::Bagel,
            AngularModel::Dumbbell => Self::Dumbbell,
            AngularModel::Cardioid => Self::Cardioid,
            AngularModel::KneadedCardioid { asymmetry } => Self::Kneaded {
                asymmetry: *asymmetry,
            },
            AngularModel::Tabulated(t) => Self::Table(TableSampler::new(t)),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> UnitVector {
        let uniform_phi = |rng: &mut R| TAU * rng.random::<f64>();
        match self {
            Self::Sphere => {
                let c = 2.0 * rng.random::<f64>() - 1.0;
                UnitVector::from_cos_theta(c, uniform_phi(rng))
            }
            Self::Bagel => {
                let v = rng.random::<f64>();
                let theta = invert_monotone(|th| (th - th.sin() * th.cos()) / PI, v, 0.0, PI);
                UnitVector::new(theta, uniform_phi(rng))
            }
            Self::Dumbbell => {
                let v = 2.0 * rng.random::<f64>() - 1.0;
                UnitVector::from_cos_theta(v.cbrt(), uniform_phi(rng))
            }
            Self::Cardioid => {
                let c = 1.0 - 2.0 * rng.random::<f64>().sqrt();
                UnitVector::from_cos_theta(c, uniform_phi(rng))
            }
            Self::Kneaded { asymmetry } => {
                let c = 1.0 - 2.0 * rng.random::<f64>().sqrt();
                let v = rng.random::<f64>();
                let a = *asymmetry;
                let phi = invert_monotone(|p| (p + 0.5 * a * (2.0 * p).sin()) / TAU, v, 0.0, TAU);
                UnitVector::from_cos_theta(c, phi)
            }
            Self::Table(t) => t.sample(rng),
        }
    }
}

/// One draw of ω from a radial model. Prefer [`RadialSampler`] in loops:
/// tables rebuild their cumulative weights on every call here.
pub fn sample_radial<R: Rng + ?Sized>(r: &RadialModel, rng: &mut R) -> f64 {
    RadialSampler::new(r).sample(rng)
}

/// One draw of a direction. See [`sample_radial`] about tables.
pub fn sample_angular<R: Rng + ?Sized>(a: &AngularModel, rng: &mut R) -> UnitVector {
    AngularSampler::new(a).sample(rng)
}

/// Mean and standard error of `f(ω, n)` over the ensemble.
pub fn ensemble_statistics<const N: usize, F>(
    e: &SeparableEnsemble,
    cfg: &SamplerConfig,
    f: F,
) -> Result<Welford<N>>
where
    F: Fn(f64, &UnitVector) -> [f64; N] + Sync,
{
    cfg.validate()?;
    let radial = RadialSampler::new(e.radial());
    let angular = AngularSampler::new(e.angular());
    let chunks = cfg.n_samples.div_ceil(cfg.chunk);
    let parts: Vec<Welford<N>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = cfg.stream(c);
            let len = cfg.chunk.min(cfg.n_samples - c * cfg.chunk);
            let mut acc = Welford::default();
            for _ in 0..len {
                let omega = radial.sample(&mut rng);
                let n = angular.sample(&mut rng);
                acc.push(&f(omega, &n));
            }
            acc
        })
        .collect();
    let mut total = Welford::default();
    for p in &parts {
        total.merge(p);
    }
    Ok(total)
}

/// `∫ p U ρ₀ U† d³λ` estimated from `cfg.n_samples` exact rotations.
pub fn mc_average(
    e: &SeparableEnsemble,
    rho0: &DensityMatrix,
    t: f64,
    cfg: &SamplerConfig,
) -> Result<MCEstimate> {
    let r0 = rho0.bloch();
    let stats = ensemble_statistics(e, cfg, |omega, n| {
        let r = rotate_bloch(&r0, &n.cartesian(), omega * t);
        [r.x, r.y, r.z]
    })?;
    Ok(MCEstimate {
        bloch_mean: Vector3::from(stats.mean()),
        bloch_stderr: Vector3::from(stats.stderr()),
        n: stats.count(),
    })
}
