//! Finite-constellation bosonic codes built on the binary tetrahedral group, exact loss and
//! dephasing channels on their spans, and entanglement-fidelity optimization by alternating SDPs.

pub mod channels;
pub mod codes;
pub mod coherent;
pub mod error;
pub mod fidelity;
pub mod group;
pub mod la;
pub mod operators;
pub mod sdp;

pub use error::{Error, Result};
pub use faer::c64;
