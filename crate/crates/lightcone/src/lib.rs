//! Rigorous scrambling bounds and exact operator dynamics for one-dimensional
//! spin chains with power-law interactions `|h_{ij}| <= h / |i-j|^alpha`.
//!
//! The crate has three layers:
//!
//! * **Bound side** — [`scale`] decomposes the couplings inside a dyadic
//!   window into scale blocks, [`seq`] provides the combinatorics of block
//!   sequences (creeping/forward classification, irreducible-skeleton
//!   counting, exhaustive coverage and resummation checks), and [`bound`]
//!   assembles the case constants and the certified commutator-growth curve
//!   and scrambling-time lower bound.
//! * **Dynamics side** — [`pauli`] is a bit-packed Pauli-string algebra,
//!   [`model`] builds the concrete Hamiltonian families, and [`dynamics`]
//!   performs exact Heisenberg evolution on short chains to measure true
//!   commutator growth against the bound.
//! * **Reporting** — [`report`] renders byte-deterministic CSV/JSON records.
//!
//! All enumeration-heavy routines run data-parallel when the `parallel`
//! feature (default) is enabled and fall back to sequential loops otherwise;
//! results are identical either way.

pub mod bound;
pub mod dynamics;
pub mod error;
pub mod exec;
pub mod linalg;
pub mod model;
pub mod pauli;
pub mod report;
pub mod scale;
pub mod seq;

pub use error::{Error, Result};

/// Version string embedded in every emitted report.
pub const VERSION: &str = concat!("lightcone ", env!("CARGO_PKG_VERSION"));

/// Default cap on the number of sites for which explicit dense matrices are
/// constructed (`2^cap`-dimensional). Norm routines switch to matrix-free
/// iteration above 10 sites regardless, but refuse supports above the cap.
pub const DEFAULT_DENSE_CAP: usize = 12;

/// Default node budget for exhaustive sequence enumeration.
pub const DEFAULT_ENUM_BUDGET: u64 = 10_000_000;
