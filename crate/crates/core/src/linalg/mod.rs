//! Dense complex linear algebra over labeled tensor-product spaces.
//!
//! Storage is row-major. Composite indices are mixed-radix with the last
//! factor varying fastest, so on the canonical `[a-slit, b-slit, env]`
//! layout the basis state `|R_i L_j ε_e⟩` sits at `6 i + 3 j + e`.

mod density;
mod eigen;
mod layout;
mod state;

pub use density::{dm_from_state, partial_trace, purity, trace, DensityOperator};
pub use eigen::eig_hermitian;
pub use layout::{Factor, HilbertLayout, A_SLIT, B_SLIT, ENV};
pub use state::StateVector;

use crate::error::Result;

/// Tensor product of two objects of the same kind.
pub trait Kron: Sized {
    fn kron(&self, other: &Self) -> Result<Self>;
}

/// Free-function form of [`Kron::kron`].
pub fn kron<K: Kron>(x: &K, y: &K) -> Result<K> {
    x.kron(y)
}

/// Norm squared tolerance applied when a state is handed to an operation.
pub const NORM_TOL: f64 = 1e-9;
/// Hermiticity bound for stored density operators.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Trace bound for stored density operators.
pub const TRACE_TOL: f64 = 1e-12;
/// Smallest admissible eigenvalue of a density operator.
pub const POSITIVITY_TOL: f64 = -1e-10;
