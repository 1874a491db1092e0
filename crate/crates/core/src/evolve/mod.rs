//! Double-null characteristic solver.
//!
//! Nodes sit at `u = i·h`, `v = j·h` with `j ≥ i`; the row `i` is the
//! outgoing cone `u = u_i`. Each spherical-harmonic mode of `Φ = rφ` and
//! `Ψ = rψ` obeys `UVΦ_ℓm + ℓ(ℓ+1) r⁻² Φ_ℓm = S_ℓm`, integrated one row at a
//! time with the diamond rule.

mod convergence;
mod data;
mod grid;
mod run;
mod scheme;
mod slices;
mod source;

pub use convergence::{convergence_order, restrict, ConvergenceReport};
pub use data::{bump, init_cone_data, AngularComponent, FieldData, InitialDataSpec};
pub use grid::{Level, NullGridSpec};
pub use run::{
    run, HyperboloidSample, ReportPlan, RunOptions, RunOutput, RunStatus,
};
pub use scheme::{diamond_cell, diamond_step, potential_table, potential_weight, DIVERGENCE_THRESHOLD};
pub use slices::{Diagonal, Field, NodeDerivs, Slice};
pub use source::{q0_null, SourceAssembler, SourceWorkspace};
