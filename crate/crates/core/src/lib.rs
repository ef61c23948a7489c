//! Simulation of a two-particle double-slit interferometer coupled to a
//! photon environment.
//!
//! The pipeline is: build the entangled slit state, attach an environment
//! record, apply one of the coupling models, trace the environment out and
//! project the two-particle operator onto the detector screens. Fringe
//! visibility of the resulting coincidence map quantifies how much
//! time-correlation coherence survives.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below are what the command-line tool uses.

pub mod channels;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod montecarlo;
pub mod observables;
pub mod scalar;
pub mod validation;

pub use error::{Error, Result};
pub use scalar::Real;

pub type StateVector64 = linalg::StateVector<f64>;
pub type DensityOperator64 = linalg::DensityOperator<f64>;
pub type Geometry64 = geometry::Geometry<f64>;
pub type ScreenGrid64 = geometry::ScreenGrid<f64>;
pub type EnvironmentModel64 = channels::EnvironmentModel<f64>;
pub type PartialWhichPath64 = channels::PartialWhichPath<f64>;
pub type DensityMap1D64 = observables::DensityMap1D<f64>;
pub type DensityMap2D64 = observables::DensityMap2D<f64>;

pub type StateVector32 = linalg::StateVector<f32>;
pub type DensityOperator32 = linalg::DensityOperator<f32>;
pub type Geometry32 = geometry::Geometry<f32>;
pub type ScreenGrid32 = geometry::ScreenGrid<f32>;
