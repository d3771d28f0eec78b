//! obslab: a numerical laboratory for band-limited observability on
//! discretized tori.
//!
//! The crate measures how much mass a band-limited function must leave on a
//! given observation set: spectral concentration eigenvalues and the
//! observability constants they induce, geometric control estimates for the
//! observation sets themselves, damped fractional wave evolution with decay
//! fitting, and resolvent-family lower bounds tying the two sides together.
//!
//! Start with the `examples/` directory; each example exercises one module
//! end to end on a small grid. The `obslab` binary exposes the same
//! experiments as subcommands with TOML configs and CSV/JSON outputs.

pub mod eig;
pub mod error;
pub mod geometry;
pub mod lattice;
pub mod observability;
pub mod spectra;
pub mod tol;
pub mod waves;

pub use error::{Error, Result};
