//! Beamforming for cognitive spectrum sharing between a GEO satellite, an
//! aerial base station and multi-cell terrestrial networks.

// `!(x > 0.0)` guards are written to reject NaN; index loops walk several
// per-terminal arrays in step.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

// Links the system OpenBLAS used by the SDP backend.
extern crate openblas_src;

pub mod channel;
pub mod convex;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod lowcomplexity;
pub mod network;
pub mod pibf;
pub mod scheme;

pub use error::{Error, Result};
