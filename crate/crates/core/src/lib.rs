//! Exact-diagonalization simulator of the two-dimensional vibron model in its
//! spin-1 condensate realization.

pub mod algebra;
pub mod basis;
pub mod dynamics;
pub mod error;
pub mod meanfield;
pub mod model;
pub mod numeric;
pub mod phasespace;
pub mod protocol;
pub mod sparse;
pub mod states;

pub use error::{Error, Result};

/// Library version, echoed into run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
