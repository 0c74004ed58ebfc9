//! Two-level algebra: Pauli matrices, Bloch vectors and single unitary
//! realizations generated by `(ω/2) n·σ`.
//!
//! States are carried as Bloch vectors; 2×2 matrices are only built at the
//! edges (conversion, explicit propagators, Choi matrices).

use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix2, Vector3};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexMatrix2 = Matrix2<Complex64>;

const NORM_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn from_index(i: usize) -> Axis {
        match i {
            0 => Axis::X,
            1 => Axis::Y,
            2 => Axis::Z,
            _ => panic!("axis index {i} out of range"),
        }
    }
}

pub fn identity2() -> ComplexMatrix2 {
    ComplexMatrix2::identity()
}

/// Pauli matrix for the given axis.
pub fn pauli(axis: Axis) -> ComplexMatrix2 {
    let o = Complex64::new(0.0, 0.0);
    let l = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    match axis {
        Axis::X => ComplexMatrix2::new(o, l, l, o),
        Axis::Y => ComplexMatrix2::new(o, -i, i, o),
        Axis::Z => ComplexMatrix2::new(l, o, o, -l),
    }
}

/// `v·σ` for a real 3-vector.
pub fn pauli_dot(v: &Vector3<f64>) -> ComplexMatrix2 {
    pauli(Axis::X) * Complex64::from(v.x)
        + pauli(Axis::Y) * Complex64::from(v.y)
        + pauli(Axis::Z) * Complex64::from(v.z)
}

/// Direction on the unit sphere in the single (θ, φ) chart used throughout:
/// θ is clamped to [0, π] and φ wrapped into [0, 2π).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitVector {
    theta: f64,
    phi: f64,
    cart: Vector3<f64>,
}

impl UnitVector {
    pub fn new(theta: f64, phi: f64) -> Self {
        let theta = theta.clamp(0.0, PI);
        let mut phi = phi.rem_euclid(TAU);
        if phi >= TAU {
            phi = 0.0;
        }
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Self {
            theta,
            phi,
            cart: Vector3::new(st * cp, st * sp, ct),
        }
    }

    /// Builds the direction from `cos θ` and φ without going through `acos`
    /// for the Cartesian components.
    pub fn from_cos_theta(cos_theta: f64, phi: f64) -> Self {
        let ct = cos_theta.clamp(-1.0, 1.0);
        let st = (1.0 - ct * ct).max(0.0).sqrt();
        let mut phi = phi.rem_euclid(TAU);
        if phi >= TAU {
            phi = 0.0;
        }
        let (sp, cp) = phi.sin_cos();
        Self {
            theta: ct.acos(),
            phi,
            cart: Vector3::new(st * cp, st * sp, ct),
        }
    }

    pub fn from_cartesian(v: Vector3<f64>) -> Result<Self> {
        let n = v.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::Model(format!("cannot normalize direction {v:?}")));
        }
        let u = v / n;
        Ok(Self {
            theta: u.z.clamp(-1.0, 1.0).acos(),
            phi: u.y.atan2(u.x).rem_euclid(TAU),
            cart: u,
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn cartesian(&self) -> Vector3<f64> {
        self.cart
    }
}

/// One member `(ω/2) n·σ` of the ensemble. The identity component is dropped.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MemberHamiltonian {
    omega: f64,
    direction: UnitVector,
}

impl MemberHamiltonian {
    pub fn new(omega: f64, direction: UnitVector) -> Result<Self> {
        if !(omega.is_finite() && omega >= 0.0) {
            return Err(Error::Model(format!(
                "radial coordinate must be finite and nonnegative, got {omega}"
            )));
        }
        Ok(Self { omega, direction })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn direction(&self) -> &UnitVector {
        &self.direction
    }

    pub fn matrix(&self) -> ComplexMatrix2 {
        pauli_dot(&self.direction.cart) * Complex64::from(0.5 * self.omega)
    }
}

/// Qubit state `(I + r·σ)/2`, stored as its Bloch vector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix {
    bloch: Vector3<f64>,
}

impl DensityMatrix {
    pub fn new(bloch: Vector3<f64>) -> Result<Self> {
        let n = bloch.norm();
        if !n.is_finite() || n > 1.0 + NORM_SLACK {
            return Err(Error::Model(format!(
                "Bloch vector norm {n} exceeds the unit ball"
            )));
        }
        Ok(Self { bloch })
    }

    pub fn maximally_mixed() -> Self {
        Self {
            bloch: Vector3::zeros(),
        }
    }

    /// Pure state `(sin ϑ, 0, cos ϑ)` in the x–z plane.
    pub fn from_polar(theta0: f64) -> Self {
        Self {
            bloch: Vector3::new(theta0.sin(), 0.0, theta0.cos()),
        }
    }

    /// Reads the Bloch vector off a Hermitian, unit-trace matrix.
    pub fn from_matrix(m: &ComplexMatrix2) -> Result<Self> {
        let tr = m[(0, 0)] + m[(1, 1)];
        if (tr - Complex64::from(1.0)).norm() > 1e-10 {
            return Err(Error::Model(format!("trace {tr} is not one")));
        }
        if (m - m.adjoint()).norm() > 1e-10 {
            return Err(Error::Model("matrix is not Hermitian".into()));
        }
        let r = Vector3::new(
            2.0 * m[(0, 1)].re,
            -2.0 * m[(0, 1)].im,
            (m[(0, 0)] - m[(1, 1)]).re,
        );
        Self::new(r)
    }

    pub fn bloch(&self) -> Vector3<f64> {
        self.bloch
    }

    pub fn matrix(&self) -> ComplexMatrix2 {
        (identity2() + pauli_dot(&self.bloch)) * Complex64::from(0.5)
    }

    /// `Tr ρ² = (1 + |r|²)/2`.
    pub fn purity(&self) -> f64 {
        0.5 * (1.0 + self.bloch.norm_squared())
    }
}

pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.purity()
}

/// `U = cos(ωt/2) I − i sin(ωt/2) n·σ`.
pub fn unitary_at(h: &MemberHamiltonian, t: f64) -> ComplexMatrix2 {
    let half = 0.5 * h.omega * t;
    let (s, c) = half.sin_cos();
    identity2() * Complex64::from(c) - pauli_dot(&h.direction.cart) * Complex64::new(0.0, s)
}

/// Rotation of a Bloch vector by angle `ωt` about `n`, equal to `U ρ U†`.
pub fn rotate_bloch(r: &Vector3<f64>, n: &Vector3<f64>, angle: f64) -> Vector3<f64> {
    let (s, c) = angle.sin_cos();
    r * c + n.cross(r) * s + n * (n.dot(r) * (1.0 - c))
}

pub fn evolve_single(rho0: &DensityMatrix, h: &MemberHamiltonian, t: f64) -> DensityMatrix {
    DensityMatrix {
        bloch: rotate_bloch(&rho0.bloch, &h.direction.cart, h.omega * t),
    }
}
