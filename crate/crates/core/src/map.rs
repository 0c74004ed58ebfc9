//! The ensemble-averaged channel `E_t` as a 3×3 matrix on Bloch vectors.
//!
//! In the principal frame of the second moments the channel acts on the
//! Pauli operators as
//!
//! ```text
//! E_t{σ_j} = f_j(t) σ_j + Σ_{k,l} ε_{jkl} ⟨sin ωt⟩_P ⟨n_l⟩_Θ σ_k
//! f_j(t)   = ⟨cos ωt⟩_P (ξ − ⟨n_j²⟩_Θ) + ⟨n_j²⟩_Θ / ξ
//! ```
//!
//! Column `j` of the Bloch matrix is the image of `σ_j`, so
//! `M = diag(f) + ⟨sin ωt⟩_P [⟨n⟩_Θ]_×` where `[v]_× r = v × r`.

use nalgebra::{Matrix3, Matrix4, SymmetricEigen, Vector3};
use num_complex::Complex64;

use crate::angular::DirectionalMoments;
use crate::ensemble::{principal_frame, SeparableEnsemble};
use crate::error::{Error, Result};
use crate::radial::RadialModel;
use crate::su2::{identity2, pauli, Axis, ComplexMatrix2, DensityMatrix};

/// Unital qubit channel on Bloch vectors at a given time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochAffineMap {
    m: Matrix3<f64>,
    time: f64,
}

impl BlochAffineMap {
    pub fn new(m: Matrix3<f64>, time: f64) -> Self {
        Self { m, time }
    }

    pub fn identity(time: f64) -> Self {
        Self::new(Matrix3::identity(), time)
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.m
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// `r(t) = M r(0)`. Fails only if `M` pushes the state out of the Bloch
    /// ball, which cannot happen for completely positive maps.
    pub fn apply(&self, rho0: &DensityMatrix) -> Result<DensityMatrix> {
        DensityMatrix::new(self.m * rho0.bloch())
    }

    /// `E(X)` for an arbitrary 2×2 operator, by linearity over `{I, σ_j}`.
    pub fn apply_operator(&self, x: &ComplexMatrix2) -> ComplexMatrix2 {
        let half = Complex64::from(0.5);
        let mut out = identity2() * ((x[(0, 0)] + x[(1, 1)]) * half);
        for j in Axis::ALL {
            let cj = (pauli(j) * x).trace() * half;
            for k in Axis::ALL {
                let mkj = self.m[(k.index(), j.index())];
                if mkj != 0.0 {
                    out += pauli(k) * (cj * mkj);
                }
            }
        }
        out
    }

    /// Unit-trace Choi matrix `½ Σ_{ij} |i⟩⟨j| ⊗ E(|i⟩⟨j|)`.
    pub fn choi(&self) -> Matrix4<Complex64> {
        let mut c = Matrix4::zeros();
        for i in 0..2 {
            for j in 0..2 {
                let mut eij = ComplexMatrix2::zeros();
                eij[(i, j)] = Complex64::from(1.0);
                let img = self.apply_operator(&eij);
                for a in 0..2 {
                    for b in 0..2 {
                        c[(2 * i + a, 2 * j + b)] = img[(a, b)] * 0.5;
                    }
                }
            }
        }
        c
    }

    /// Smallest eigenvalue of the Choi matrix; nonnegative iff the map is CP.
    pub fn choi_min_eigenvalue(&self) -> f64 {
        let c = self.choi();
        let herm = (c + c.adjoint()) * Complex64::from(0.5);
        SymmetricEigen::new(herm).eigenvalues.min()
    }

    pub fn operator_norm(&self) -> f64 {
        self.m.singular_values().max()
    }
}

pub fn choi_check(map: &BlochAffineMap) -> f64 {
    map.choi_min_eigenvalue()
}

/// Exact averaged dynamics for one separable ensemble, evaluated in the
/// principal frame of its second moments.
#[derive(Clone, Debug)]
pub struct MapFamily {
    radial: RadialModel,
    xi: f64,
    moments: DirectionalMoments,
    frame: Matrix3<f64>,
}

impl MapFamily {
    pub fn new(ensemble: &SeparableEnsemble) -> Result<Self> {
        Self::from_moments(
            ensemble.radial().clone(),
            ensemble.xi(),
            &ensemble.moments()?,
        )
    }

    /// Family from explicit (lab-frame) moments; used for perturbed or
    /// synthetic geometries that have no angular model behind them.
    pub fn from_moments(radial: RadialModel, xi: f64, lab: &DirectionalMoments) -> Result<Self> {
        if !(xi.is_finite() && xi > 0.0) {
            return Err(Error::Model(format!("ξ must be positive, got {xi}")));
        }
        let (frame, moments) = principal_frame(lab);
        Ok(Self {
            radial,
            xi,
            moments,
            frame,
        })
    }

    pub fn radial(&self) -> &RadialModel {
        &self.radial
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    /// Moments in the principal frame (second moment diagonal).
    pub fn moments(&self) -> &DirectionalMoments {
        &self.moments
    }

    /// Columns are the principal axes in lab coordinates.
    pub fn frame(&self) -> &Matrix3<f64> {
        &self.frame
    }

    /// Time scale `1/ω_c` of the radial part.
    pub fn time_scale(&self) -> f64 {
        1.0 / self.radial.cutoff()
    }

    fn second(&self, axis: Axis) -> f64 {
        self.moments.second[(axis.index(), axis.index())]
    }

    pub fn f_component(&self, axis: Axis, t: f64) -> f64 {
        let m = self.second(axis);
        self.radial.cos_expectation(t) * (self.xi - m) + m / self.xi
    }

    pub fn f_derivative(&self, axis: Axis, t: f64) -> f64 {
        self.radial.cos_derivative(t) * (self.xi - self.second(axis))
    }

    pub fn f_all(&self, t: f64) -> Vector3<f64> {
        let c = self.radial.cos_expectation(t);
        Vector3::from_fn(|j, _| {
            let m = self.moments.second[(j, j)];
            c * (self.xi - m) + m / self.xi
        })
    }

    pub fn f_derivative_all(&self, t: f64) -> Vector3<f64> {
        let dc = self.radial.cos_derivative(t);
        Vector3::from_fn(|j, _| dc * (self.xi - self.moments.second[(j, j)]))
    }

    pub fn map_at(&self, t: f64) -> BlochAffineMap {
        let s = self.radial.sin_expectation(t);
        let m = Matrix3::from_diagonal(&self.f_all(t)) + cross_matrix(&self.moments.first) * s;
        BlochAffineMap::new(m, t)
    }

    /// `dM/dt`, differentiated in closed form.
    pub fn map_derivative(&self, t: f64) -> Matrix3<f64> {
        let ds = self.radial.sin_derivative(t);
        Matrix3::from_diagonal(&self.f_derivative_all(t)) + cross_matrix(&self.moments.first) * ds
    }

    /// The same channel expressed on lab-frame Bloch vectors.
    pub fn map_at_lab(&self, t: f64) -> BlochAffineMap {
        let m = self.map_at(t);
        BlochAffineMap::new(self.frame * m.m * self.frame.transpose(), t)
    }

    pub fn to_principal(&self, lab: &Vector3<f64>) -> Vector3<f64> {
        self.frame.transpose() * lab
    }

    pub fn to_lab(&self, principal: &Vector3<f64>) -> Vector3<f64> {
        self.frame * principal
    }

    /// `Tr ρ̄²(t) = ½(1 + |M(t) r₀|²)` on a strictly increasing grid.
    pub fn purity_trajectory(&self, rho0: &DensityMatrix, grid: &[f64]) -> Result<Vec<f64>> {
        check_grid(grid)?;
        Ok(grid
            .iter()
            .map(|&t| 0.5 * (1.0 + (self.map_at(t).m * rho0.bloch()).norm_squared()))
            .collect())
    }
}

pub fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::Model("time grid has non-finite entries".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Model("time grid must be strictly increasing".into()));
    }
    Ok(())
}

/// `[v]_×`, so that `[v]_× r = v × r`.
pub fn cross_matrix(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}
