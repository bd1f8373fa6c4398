//! Stochastic dynamics of a trimer of discs that either slide or roll
//! against each other.
//!
//! The configuration is `x = (x₁, y₁, x₂, y₂, x₃, y₃, θ₁, θ₂, θ₃)`: three disc
//! centres followed by three spin angles. Neighbouring discs are bonded at
//! unit distance, the centroid is pinned at the origin, and in rolling mode
//! the contact points move together.
//!
//! - [`model`] builds the constraint rows and projections.
//! - [`langevin`] integrates the underdamped equations.
//! - [`overdamped`] integrates the overdamped equations, in Cartesian and in
//!   reduced `(ω, φ, θ)` coordinates.
//! - [`analytics`] holds the closed-form densities and geometric identities.
//! - [`stats`] compares sampled angles with those laws.

pub mod analytics;
pub mod error;
pub mod langevin;
pub mod model;
pub mod overdamped;
pub mod rng;
pub mod stats;
pub mod trajectory;
pub mod trimer;

pub use error::{Error, Result};
pub use langevin::{BondMode, PhaseState, SimParams};
pub use model::{
    assemble, ConstraintMode, ConstraintSet, ContactModel, Configuration, Matrix9, Pair,
    ProjectionBundle, Vector9,
};
pub use overdamped::{Boundary, ReducedCoefficients, ReducedState};
pub use rng::{SimRng, RNG_IDENTITY};
pub use trajectory::Frame;
pub use trimer::{extract_omega, parameterize, AngleTracker};
