//! Double-null characteristic evolution of the coupled semilinear wave
//! system `-□φ = (∂_tψ)²`, `-□ψ = Q₀(φ, φ)`, with radiation-field
//! extraction, late-time profile comparison and energy diagnostics.

pub mod asympt;
pub mod energetics;
pub mod error;
pub mod evolve;
pub mod profiles;
pub mod quadrature;
pub mod sphharm;
pub mod stats;

pub use error::{Error, Result};
