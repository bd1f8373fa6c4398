//! Closed-form results for the trimer: equilibrium densities, the
//! Fokker–Planck flux, geometric identities and tail probabilities.

pub mod densities;
pub mod fokker_planck;
pub mod geometry;
pub mod jet;
pub mod quadrature;
pub mod tails;

pub use densities::{density, DensityKind, DensityModel, Domain, InverseCdf};
pub use fokker_planck::{fp_flux, fp_residual, inverse_noise_density};
pub use geometry::{
    conserved_quantities, fixman_factor, subspace_overlap, tangent_map_check, TangentMapReport,
};
pub use jet::Jet;
pub use quadrature::integrate;
pub use tails::{tail_probability, tail_sweep, AngleVariable, TailRow};
