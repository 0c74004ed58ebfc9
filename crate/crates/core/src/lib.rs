//! Averaged qubit dynamics for separable Hamiltonian ensembles and the
//! time-local generators behind them.

pub mod angular;
pub mod ensemble;
pub mod error;
pub mod generator;
pub mod map;
pub mod montecarlo;
pub mod propagation;
pub mod quadrature;
pub mod radial;
pub mod special;
pub mod su2;
pub mod table;
pub mod validation;

pub use angular::{AngularModel, AngularTable, DirectionalMoments};
pub use ensemble::{principal_frame, SeparableEnsemble};
pub use error::{Error, Result};
pub use map::{BlochAffineMap, MapFamily};
pub use radial::{RadialModel, RadialTable};
pub use su2::{Axis, DensityMatrix, MemberHamiltonian, UnitVector};
