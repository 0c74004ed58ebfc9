//! Separable distributions `p(ω, θ, φ) = P(ω) Θ(θ, φ)` and the orthogonal
//! change of axes that removes the crossing second moments.

use std::sync::Once;

use nalgebra::{Matrix3, SymmetricEigen, Vector3};

use crate::angular::{AngularModel, DirectionalMoments};
use crate::error::{Error, Result};
use crate::radial::RadialModel;

/// Tolerance on `(∫Pω²dω)·(∫ΘdΩ) = 1`.
const JOINT_NORM_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct SeparableEnsemble {
    radial: RadialModel,
    angular: AngularModel,
    xi: f64,
}

impl SeparableEnsemble {
    pub fn new(radial: RadialModel, angular: AngularModel) -> Result<Self> {
        check_builtin_normalization();
        let xi = angular.normalization()?;
        let joint = radial.normalization() * xi;
        if (joint - 1.0).abs() > JOINT_NORM_TOL {
            return Err(Error::Model(format!(
                "joint normalization is {joint}, expected 1 (∫Pω²dω = {}, ∫ΘdΩ = {xi})",
                radial.normalization()
            )));
        }
        Ok(Self {
            radial,
            angular,
            xi,
        })
    }

    pub fn radial(&self) -> &RadialModel {
        &self.radial
    }

    pub fn angular(&self) -> &AngularModel {
        &self.angular
    }

    /// Split normalization constant `ξ = ∫ΘdΩ = 1/∫Pω²dω`.
    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn moments(&self) -> Result<DirectionalMoments> {
        self.angular.directional_moments()
    }
}

/// Built-ins carry ξ = 1 by construction; confirm it once per process.
fn check_builtin_normalization() {
    static CHECK: Once = Once::new();
    CHECK.call_once(|| {
        for m in [
            AngularModel::Sphere,
            AngularModel::Bagel,
            AngularModel::Dumbbell,
            AngularModel::Cardioid,
            AngularModel::KneadedCardioid { asymmetry: 0.5 },
        ] {
            let q = m.quadrature_moments().expect("built-in angular quadrature");
            assert!(
                (q.xi() - 1.0).abs() < 1e-10,
                "{} is not normalized",
                m.name()
            );
        }
        for r in [
            RadialModel::Gaussian { cutoff: 1.0 },
            RadialModel::ExpCutoff { cutoff: 1.0 },
            RadialModel::ReciprocalSquare { cutoff: 1.0 },
        ] {
            let q = r
                .expectation_quadrature(|_| 1.0, 0.0)
                .expect("built-in radial quadrature");
            assert!((q - 1.0).abs() < 1e-10, "{} is not normalized", r.name());
        }
    });
}

/// Off-diagonal second moments below this (relative to the trace) count as zero.
const DIAGONAL_TOL: f64 = 1e-14;
/// Eigenvalues closer than this (relative to the trace) are treated as degenerate.
const DEGENERACY_TOL: f64 = 1e-10;

/// Orthogonal `u` (det +1) with `uᵀ·second·u` diagonal, and the moments
/// expressed in that frame (first moment co-rotated by `uᵀ`).
///
/// Input that is already diagonal keeps its axes (`u = I`). Otherwise the
/// eigenvalues are sorted in descending order; inside a degenerate
/// eigenspace the basis nearest to the input axes is chosen, and each
/// eigenvector's largest-magnitude component is made positive.
pub fn principal_frame(m: &DirectionalMoments) -> (Matrix3<f64>, DirectionalMoments) {
    let sym = 0.5 * (m.second + m.second.transpose());
    let scale = sym.trace().abs().max(f64::MIN_POSITIVE);
    let off = sym[(0, 1)]
        .abs()
        .max(sym[(0, 2)].abs())
        .max(sym[(1, 2)].abs());
    if off <= DIAGONAL_TOL * scale {
        let second = Matrix3::from_diagonal(&sym.diagonal());
        return (
            Matrix3::identity(),
            DirectionalMoments::new(m.first, second),
        );
    }

    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors: Vec<Vector3<f64>> = order
        .iter()
        .map(|&i| eig.eigenvectors.column(i).into_owned())
        .collect();

    let mut columns: Vec<Vector3<f64>> = Vec::with_capacity(3);
    let mut start = 0;
    while start < 3 {
        let mut end = start + 1;
        while end < 3 && (values[start] - values[end]).abs() <= DEGENERACY_TOL * scale {
            end += 1;
        }
        columns.extend(nearest_basis(&vectors[start..end]));
        start = end;
    }
    for c in columns.iter_mut() {
        let imax = c.iamax();
        if c[imax] < 0.0 {
            *c = -*c;
        }
    }
    let mut u = Matrix3::from_columns(&columns);
    if u.determinant() < 0.0 {
        let last = -u.column(2).into_owned();
        u.set_column(2, &last);
    }

    let rotated = u.transpose() * sym * u;
    let second = Matrix3::from_diagonal(&rotated.diagonal());
    let first = u.transpose() * m.first;
    (u, DirectionalMoments::new(first, second))
}

/// Orthonormal basis of `span(vs)` built from the projections of the
/// coordinate axes, largest projection first.
fn nearest_basis(vs: &[Vector3<f64>]) -> Vec<Vector3<f64>> {
    if vs.len() == 1 {
        return vec![vs[0]];
    }
    let project = |e: &Vector3<f64>| -> Vector3<f64> {
        vs.iter()
            .fold(Vector3::zeros(), |acc, v| acc + v * v.dot(e))
    };
    let mut basis: Vec<Vector3<f64>> = Vec::with_capacity(vs.len());
    let mut used = [false; 3];
    while basis.len() < vs.len() {
        let mut best: Option<(usize, Vector3<f64>)> = None;
        for (j, taken) in used.iter().enumerate() {
            if *taken {
                continue;
            }
            let mut p = project(&Vector3::ith(j, 1.0));
            for b in &basis {
                p -= b * b.dot(&p);
            }
            if best
                .as_ref()
                .is_none_or(|(_, q)| p.norm() > q.norm() + 1e-12)
            {
                best = Some((j, p));
            }
        }
        let (j, p) = best.expect("a free axis remains");
        used[j] = true;
        basis.push(p.normalize());
    }
    basis
}
