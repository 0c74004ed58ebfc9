//! Time-local generators of the averaged dynamics.
//!
//! Convention (carries the factor ½ on every rate):
//!
//! ```text
//! dρ/dt = −i[H, ρ] + Σ_{jk} (γ_jk/2)(σ_j ρ σ_k − ½{σ_k σ_j, ρ}),   H = h·σ/2
//! ```
//!
//! On Bloch vectors this is `dr/dt = A r` with `A = [h]_× − (Tr K·I − K)`,
//! `K = [γ_jk]`. Isotropic depolarization therefore contracts every
//! component at rate `2γ`.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::map::{check_grid, cross_matrix, MapFamily};
use crate::radial::RadialModel;
use crate::su2::{pauli, Axis, ComplexMatrix2};

/// Denominators below this magnitude are treated as poles.
pub const POLE_THRESHOLD: f64 = 1e-8;
/// Kossakowski eigenvalues above `-DIVISIBILITY_TOLERANCE` count as nonnegative.
pub const DIVISIBILITY_TOLERANCE: f64 = 1e-12;

const SCAN_STEP: f64 = 2e-3;
const ROOT_RTOL: f64 = 1e-10;
const MOMENT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LindbladGenerator {
    time: f64,
    hamiltonian: Vector3<f64>,
    kossakowski: Matrix3<f64>,
}

impl LindbladGenerator {
    pub fn new(time: f64, hamiltonian: Vector3<f64>, kossakowski: Matrix3<f64>) -> Self {
        Self {
            time,
            hamiltonian,
            kossakowski,
        }
    }

    pub fn zero(time: f64) -> Self {
        Self::new(time, Vector3::zeros(), Matrix3::zeros())
    }

    /// Diagonal (Pauli-channel) generator with level spacing along z.
    pub fn pauli_channels(time: f64, hz: f64, rates: [f64; 3]) -> Self {
        Self::new(
            time,
            Vector3::new(0.0, 0.0, hz),
            Matrix3::from_diagonal(&Vector3::from(rates)),
        )
    }

    /// Inverse of [`bloch_generator`](Self::bloch_generator); the symmetric
    /// part of `a` is symmetrized exactly, so `K = Kᵀ` bit for bit.
    pub fn from_bloch_generator(a: &Matrix3<f64>, time: f64) -> Self {
        let s = (a + a.transpose()) * 0.5;
        let k = s - Matrix3::identity() * (0.5 * s.trace());
        let h = Vector3::new(
            0.5 * (a[(2, 1)] - a[(1, 2)]),
            0.5 * (a[(0, 2)] - a[(2, 0)]),
            0.5 * (a[(1, 0)] - a[(0, 1)]),
        );
        Self::new(time, h, k)
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn hamiltonian(&self) -> &Vector3<f64> {
        &self.hamiltonian
    }

    /// Effective level spacing ω̄ (the σ_z/2 coefficient).
    pub fn hz(&self) -> f64 {
        self.hamiltonian.z
    }

    pub fn kossakowski(&self) -> &Matrix3<f64> {
        &self.kossakowski
    }

    /// Diagonal rates `γ_x, γ_y, γ_z`.
    pub fn rates(&self) -> [f64; 3] {
        [
            self.kossakowski[(0, 0)],
            self.kossakowski[(1, 1)],
            self.kossakowski[(2, 2)],
        ]
    }

    pub fn gamma_xy(&self) -> f64 {
        self.kossakowski[(0, 1)]
    }

    pub fn bloch_generator(&self) -> Matrix3<f64> {
        cross_matrix(&self.hamiltonian) - Matrix3::identity() * self.kossakowski.trace()
            + self.kossakowski
    }

    /// Eigenvalues of `K` in ascending order.
    pub fn kossakowski_eigenvalues(&self) -> [f64; 3] {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.kossakowski)
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        [ev[0], ev[1], ev[2]]
    }

    pub fn kossakowski_eigen(&self) -> SymmetricEigen<f64, nalgebra::U3> {
        SymmetricEigen::new(self.kossakowski)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.kossakowski_eigenvalues()[0]
    }

    pub fn is_positive(&self) -> bool {
        self.min_eigenvalue() >= -DIVISIBILITY_TOLERANCE
    }

    /// Same generator expressed after the frame change `r ↦ u r` (`u` proper
    /// orthogonal).
    pub fn rotated(&self, u: &Matrix3<f64>) -> Self {
        Self::new(
            self.time,
            u * self.hamiltonian,
            u * self.kossakowski * u.transpose(),
        )
    }

    /// Right-hand side of the master equation applied to an operator.
    pub fn apply_to_operator(&self, rho: &ComplexMatrix2) -> ComplexMatrix2 {
        let i = Complex64::i();
        let mut h = ComplexMatrix2::zeros();
        for axis in Axis::ALL {
            h += pauli(axis) * Complex64::from(0.5 * self.hamiltonian[axis.index()]);
        }
        let mut out = (h * rho - rho * h) * (-i);
        for j in Axis::ALL {
            for k in Axis::ALL {
                let g = self.kossakowski[(j.index(), k.index())];
                if g == 0.0 {
                    continue;
                }
                let (sj, sk) = (pauli(j), pauli(k));
                let kj = sk * sj;
                out += (sj * rho * sk - (kj * rho + rho * kj) * Complex64::from(0.5))
                    * Complex64::from(0.5 * g);
            }
        }
        out
    }
}

fn pole_error(t: f64, denominator: f64) -> Error {
    Error::PoleProximity { t, denominator }
}

fn guard(t: f64, denominator: f64) -> Result<f64> {
    if !(denominator.abs() >= POLE_THRESHOLD) {
        return Err(pole_error(t, denominator));
    }
    Ok(denominator)
}

/// `γ = −ẇ/2w` for isotropic depolarization, `w = (2⟨cos ωt⟩_P + 1)/3`.
///
/// Built-in radial models use their rational/exponential closed forms;
/// tables differentiate under the integral.
pub fn isotropic_rate(r: &RadialModel, t: f64) -> Result<f64> {
    let c = r.cos_expectation(t);
    guard(t, (2.0 * c + 1.0) / 3.0)?;
    let wc = r.cutoff();
    let x = wc * t;
    Ok(match r {
        RadialModel::Gaussian { .. } => wc * gaussian_ratio(1.0, 2.0, 1.0, x),
        RadialModel::ExpCutoff { .. } => wc * exp_cutoff_ratio(4.0, 2.0, 1.0, x),
        RadialModel::ReciprocalSquare { .. } => wc * reciprocal_square_ratio(1.0, 2.0, 1.0, x),
        RadialModel::Tabulated(_) => -r.cos_derivative(t) / (2.0 * c + 1.0),
    })
}

// num·x(3−x²) / (a(1−x²) + b e^{x²/2}), scaled by e^{−x²/2} to stay finite
fn gaussian_ratio(num: f64, a: f64, b: f64, x: f64) -> f64 {
    let e = (-0.5 * x * x).exp();
    num * x * (3.0 - x * x) * e / (a * (1.0 - x * x) * e + b)
}

// num·x·Q / (a N (1+x²) + b (1+x²)⁵), Q = (3−x²)(1+x²) + 2N, N = 1 − 6x² + x⁴
fn exp_cutoff_ratio(num: f64, a: f64, b: f64, x: f64) -> f64 {
    let x2 = x * x;
    let n = 1.0 - 6.0 * x2 + x2 * x2;
    let p = 1.0 + x2;
    let q = (3.0 - x2) * p + 2.0 * n;
    num * x * q / (a * n * p + b * p.powi(5))
}

// num(sin x − x cos x) / (a x sin x + b x²)
fn reciprocal_square_ratio(num: f64, a: f64, b: f64, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    // divide through by x²
    let sinc = if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    };
    num * sin_minus_x_cos(x) / (x * x) / (a * sinc + b)
}

fn sin_minus_x_cos(x: f64) -> f64 {
    if x.abs() < 0.1 {
        // Σ (−1)^{k+1} 2k x^{2k+1} / (2k+1)!
        let x2 = x * x;
        let mut term = x * x2 / 3.0;
        let mut sum = term;
        for k in 2..12 {
            let kf = k as f64;
            term *= -x2 * kf / ((kf - 1.0) * (2.0 * kf) * (2.0 * kf + 1.0));
            sum += term;
        }
        sum
    } else {
        x.sin() - x * x.cos()
    }
}

/// Pauli-channel rates `γ_j = ḟ_j/2f_j − Σ_{k≠j} ḟ_k/2f_k` for geometries
/// without a first moment.
pub fn anisotropic_rates(fam: &MapFamily, t: f64) -> Result<[f64; 3]> {
    if fam.moments().first.amax() > MOMENT_TOL {
        return Err(Error::Symmetry(
            "anisotropic rates need vanishing first moments".into(),
        ));
    }
    let f = fam.f_all(t);
    let df = fam.f_derivative_all(t);
    let mut half = [0.0; 3];
    for j in 0..3 {
        half[j] = df[j] / (2.0 * guard(t, f[j])?);
    }
    let total: f64 = half.iter().sum();
    Ok([
        2.0 * half[0] - total,
        2.0 * half[1] - total,
        2.0 * half[2] - total,
    ])
}

/// Closed forms `(γ_x = γ_y, γ_z)` for the bagel `Θ = sin θ/π²`.
pub fn bagel_rates(r: &RadialModel, t: f64) -> Result<[f64; 2]> {
    let c = r.cos_expectation(t);
    guard(t, (3.0 * c + 1.0) / 4.0)?;
    guard(t, (5.0 * c + 3.0) / 8.0)?;
    axial_closed_form(
        r,
        t,
        [(3.0, 6.0, 2.0), (5.0, 5.0, 3.0)],
        [(6.0, 3.0, 1.0), (20.0, 5.0, 3.0)],
    )
}

/// Closed forms `(γ_x = γ_y, γ_z)` for the dumbbell `Θ = 3cos²θ/4π`.
pub fn dumbbell_rates(r: &RadialModel, t: f64) -> Result<[f64; 2]> {
    let c = r.cos_expectation(t);
    guard(t, (2.0 * c + 3.0) / 5.0)?;
    guard(t, (4.0 * c + 1.0) / 5.0)?;
    axial_closed_form(
        r,
        t,
        [(1.0, 2.0, 3.0), (4.0, 4.0, 1.0)],
        [(4.0, 2.0, 3.0), (16.0, 4.0, 1.0)],
    )
}

type Coefficients = [(f64, f64, f64); 2];

// Gaussian and reciprocal-square forms share coefficients; the exponential
// cutoff has its own.
fn axial_closed_form(
    r: &RadialModel,
    t: f64,
    common: Coefficients,
    exp: Coefficients,
) -> Result<[f64; 2]> {
    let wc = r.cutoff();
    let x = wc * t;
    let eval = |(n, a, b): (f64, f64, f64)| -> Result<f64> {
        Ok(match r {
            RadialModel::Gaussian { .. } => wc * gaussian_ratio(n, a, b, x),
            RadialModel::ReciprocalSquare { .. } => wc * reciprocal_square_ratio(n, a, b, x),
            RadialModel::ExpCutoff { .. } => unreachable!(),
            RadialModel::Tabulated(_) => {
                return Err(Error::Model(
                    "closed forms exist only for built-in radial models".into(),
                ))
            }
        })
    };
    let (gx, gz) = match r {
        RadialModel::ExpCutoff { .. } => (
            wc * exp_cutoff_ratio(exp[0].0, exp[0].1, exp[0].2, x),
            wc * exp_cutoff_ratio(exp[1].0, exp[1].1, exp[1].2, x),
        ),
        _ => (eval(common[0])?, eval(common[1])?),
    };
    Ok([gx, gz - gx])
}

fn require_axial_first_moment(fam: &MapFamily) -> Result<f64> {
    let n = &fam.moments().first;
    if n.x.abs() > MOMENT_TOL || n.y.abs() > MOMENT_TOL {
        return Err(Error::Symmetry(
            "first moment must lie along the principal z axis".into(),
        ));
    }
    Ok(n.z)
}

/// Generator for azimuthally symmetric geometries: level spacing ω̄ along z,
/// `γ_x = γ_y = −ḟ_z/2f_z`, and `γ_z` altered by the first moment.
pub fn azimuthal_generator(fam: &MapFamily, t: f64) -> Result<LindbladGenerator> {
    let nz = require_axial_first_moment(fam)?;
    let m = &fam.moments().second;
    if (m[(0, 0)] - m[(1, 1)]).abs() > 1e-10 * m.trace() {
        return Err(Error::Symmetry(
            "azimuthal generator needs ⟨n_x²⟩ = ⟨n_y²⟩".into(),
        ));
    }
    let (fx, fz) = (fam.f_component(Axis::X, t), fam.f_component(Axis::Z, t));
    let (dfx, dfz) = (fam.f_derivative(Axis::X, t), fam.f_derivative(Axis::Z, t));
    let r = fam.radial();
    let (s, ds) = (r.sin_expectation(t), r.sin_derivative(t));
    let d = guard(t, fx * fx + nz * nz * s * s)?;
    guard(t, fz)?;
    let gx = -dfz / (2.0 * fz);
    let omega_bar = nz * (fx * ds - dfx * s) / d;
    let gz = -fx * dfx / d - gx - nz * nz * s * ds / d;
    Ok(LindbladGenerator::pauli_channels(
        t,
        omega_bar,
        [gx, gx, gz],
    ))
}

/// `D = f_x f_y + ⟨n_z⟩²⟨sin ωt⟩²`, the determinant of the x–y block.
pub fn xy_denominator(fam: &MapFamily, t: f64) -> f64 {
    let nz = fam.moments().first.z;
    let s = fam.radial().sin_expectation(t);
    fam.f_component(Axis::X, t) * fam.f_component(Axis::Y, t) + nz * nz * s * s
}

/// Off-diagonal rate
/// `γ_xy = ⟨n_z⟩[(ḟ_x − ḟ_y)⟨sin⟩ − (f_x − f_y) d⟨sin⟩/dt] / 2D`
/// for geometries reflection-symmetric about the x–z and y–z planes.
pub fn offdiagonal_rate(fam: &MapFamily, t: f64) -> Result<f64> {
    let nz = require_axial_first_moment(fam)?;
    let d = guard(t, xy_denominator(fam, t))?;
    let r = fam.radial();
    let (s, ds) = (r.sin_expectation(t), r.sin_derivative(t));
    let dfx_minus_dfy =
        r.cos_derivative(t) * (fam.moments().second[(1, 1)] - fam.moments().second[(0, 0)]);
    let fx_minus_fy = fam.f_component(Axis::X, t) - fam.f_component(Axis::Y, t);
    Ok(nz * (dfx_minus_dfy * s - fx_minus_fy * ds) / (2.0 * d))
}

/// Level spacing for a first moment along z with `f_x ≠ f_y` allowed:
/// `ω̄ = ⟨n_z⟩[(f_x + f_y) d⟨sin⟩/dt − (ḟ_x + ḟ_y)⟨sin⟩] / 2D`.
pub fn level_spacing(fam: &MapFamily, t: f64) -> Result<f64> {
    let nz = require_axial_first_moment(fam)?;
    let d = guard(t, xy_denominator(fam, t))?;
    let r = fam.radial();
    let (s, ds) = (r.sin_expectation(t), r.sin_derivative(t));
    let f_sum = fam.f_component(Axis::X, t) + fam.f_component(Axis::Y, t);
    let df_sum = fam.f_derivative(Axis::X, t) + fam.f_derivative(Axis::Y, t);
    Ok(nz * (f_sum * ds - df_sum * s) / (2.0 * d))
}

/// Symmetry class of a family, deciding which denominators can vanish.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymmetryClass {
    /// No first moment: `M` is diagonal.
    Reflection,
    /// First moment along z only: x–y block plus isolated `f_z`.
    Axial,
    General,
}

pub fn symmetry_class(fam: &MapFamily) -> SymmetryClass {
    let n = &fam.moments().first;
    if n.x.abs() > MOMENT_TOL || n.y.abs() > MOMENT_TOL {
        SymmetryClass::General
    } else if n.z.abs() > MOMENT_TOL {
        SymmetryClass::Axial
    } else {
        SymmetryClass::Reflection
    }
}

/// Which denominator vanishes at a pole.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PoleSource {
    F(Axis),
    XyBlock,
    Determinant,
}

impl PoleSource {
    pub fn label(&self) -> &'static str {
        match self {
            Self::F(Axis::X) => "f_x",
            Self::F(Axis::Y) => "f_y",
            Self::F(Axis::Z) => "f_z",
            Self::XyBlock => "D",
            Self::Determinant => "det",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pole {
    pub t: f64,
    pub source: PoleSource,
}

fn denominators(fam: &MapFamily, t: f64) -> Vec<(PoleSource, f64)> {
    match symmetry_class(fam) {
        SymmetryClass::Reflection => Axis::ALL
            .iter()
            .map(|&a| (PoleSource::F(a), fam.f_component(a, t)))
            .collect(),
        SymmetryClass::Axial => vec![
            (PoleSource::F(Axis::Z), fam.f_component(Axis::Z, t)),
            (PoleSource::XyBlock, xy_denominator(fam, t)),
        ],
        SymmetryClass::General => {
            vec![(
                PoleSource::Determinant,
                fam.map_at(t).matrix().determinant(),
            )]
        }
    }
}

/// Smallest denominator magnitude at `t` together with its source.
pub fn nearest_pole_denominator(fam: &MapFamily, t: f64) -> (PoleSource, f64) {
    denominators(fam, t)
        .into_iter()
        .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .expect("at least one denominator")
}

/// General generator `A = Ṁ M⁻¹`, converted to level spacing and
/// Kossakowski matrix. Works in the principal frame of the family.
pub fn extract_generator(fam: &MapFamily, t: f64) -> Result<LindbladGenerator> {
    let (_, d) = nearest_pole_denominator(fam, t);
    let m = fam.map_at(t);
    if d.abs() < POLE_THRESHOLD {
        return Err(Error::SingularMap {
            t,
            det: m.matrix().determinant(),
        });
    }
    let inv = m.matrix().try_inverse().ok_or(Error::SingularMap {
        t,
        det: m.matrix().determinant(),
    })?;
    let a = fam.map_derivative(t) * inv;
    Ok(LindbladGenerator::from_bloch_generator(&a, t))
}

/// Roots of every relevant denominator inside `window`, bracketed on a grid
/// of step `2·10⁻³/ω_c` and refined by bisection.
pub fn pole_scan(fam: &MapFamily, window: (f64, f64)) -> Vec<Pole> {
    let (t0, t1) = window;
    assert!(
        t0.is_finite() && t1.is_finite(),
        "pole window must be finite"
    );
    if t1 <= t0 {
        return Vec::new();
    }
    let h = SCAN_STEP * fam.time_scale();
    let n = ((t1 - t0) / h).ceil().max(1.0) as usize;
    let grid: Vec<f64> = (0..=n)
        .map(|i| t0 + (t1 - t0) * i as f64 / n as f64)
        .collect();
    let values: Vec<Vec<(PoleSource, f64)>> =
        grid.par_iter().map(|&t| denominators(fam, t)).collect();
    let mut poles = Vec::new();
    for (i, w) in values.windows(2).enumerate() {
        for (k, &(source, a)) in w[0].iter().enumerate() {
            let b = w[1][k].1;
            if a == 0.0 && i == 0 {
                poles.push(Pole { t: grid[i], source });
            }
            if b == 0.0 || a * b < 0.0 {
                let root = bisect(|t| denominators(fam, t)[k].1, grid[i], grid[i + 1]);
                poles.push(Pole { t: root, source });
            }
        }
    }
    poles.sort_by(|a, b| a.t.total_cmp(&b.t));
    // identical components (f_x = f_y, ...) share a root
    poles.dedup_by(|b, a| (b.t - a.t).abs() <= 1e-9 * a.t.abs().max(fam.time_scale()));
    poles
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    if f(b) == 0.0 {
        return b;
    }
    while (b - a) > ROOT_RTOL * a.abs().max(b.abs()) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
        if m == a && m == b {
            break;
        }
    }
    0.5 * (a + b)
}

/// Generators along a grid; entries are `None` inside pole windows.
#[derive(Clone, Debug)]
pub struct RateTrajectory {
    pub grid: Vec<f64>,
    pub generators: Vec<Option<LindbladGenerator>>,
    pub poles: Vec<Pole>,
}

impl RateTrajectory {
    pub fn compute(fam: &MapFamily, grid: &[f64]) -> Result<Self> {
        check_grid(grid)?;
        let generators = grid
            .par_iter()
            .map(|&t| extract_generator(fam, t).ok())
            .collect();
        let poles = match (grid.first(), grid.last()) {
            (Some(&a), Some(&b)) => pole_scan(fam, (a, b)),
            _ => Vec::new(),
        };
        Ok(Self {
            grid: grid.to_vec(),
            generators,
            poles,
        })
    }

    pub fn rate_series(&self, f: impl Fn(&LindbladGenerator) -> f64) -> Vec<f64> {
        self.generators
            .iter()
            .map(|g| g.as_ref().map_or(f64::NAN, &f))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Divisibility {
    /// Kossakowski matrix positive semidefinite (random-unitary divisible).
    Divisible,
    Indivisible,
    /// Inside a pole window.
    Undefined,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DivisibilityInterval {
    pub start: f64,
    pub end: f64,
    pub label: Divisibility,
}

pub fn classify(g: &LindbladGenerator) -> Divisibility {
    let k = g.kossakowski();
    let diagonal = k[(0, 1)] == 0.0 && k[(0, 2)] == 0.0 && k[(1, 2)] == 0.0;
    let ok = if diagonal {
        g.rates().iter().all(|&r| r >= -DIVISIBILITY_TOLERANCE)
    } else {
        g.is_positive()
    };
    if ok {
        Divisibility::Divisible
    } else {
        Divisibility::Indivisible
    }
}

/// Maximal runs of grid points sharing a label. Interval ends are grid
/// points, so a label flips between the last point of one run and the first
/// point of the next.
pub fn divisibility_flags(traj: &RateTrajectory) -> Vec<DivisibilityInterval> {
    let mut out: Vec<DivisibilityInterval> = Vec::new();
    for (t, g) in traj.grid.iter().zip(&traj.generators) {
        let label = g.as_ref().map_or(Divisibility::Undefined, classify);
        match out.last_mut() {
            Some(last) if last.label == label => last.end = *t,
            _ => out.push(DivisibilityInterval {
                start: *t,
                end: *t,
                label,
            }),
        }
    }
    out
}
