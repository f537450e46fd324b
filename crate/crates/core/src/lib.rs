//! Numerics for a modulated Lambda-type three-level atom in a two-mode
//! cavity: Bessel sidebands, drive-renormalized parameters, dressed-block
//! ground-state phase diagrams and truncated Fock-space dynamics.

pub mod dynamics;
pub mod effective;
pub mod eigen3;
pub mod error;
pub mod specfun;
pub mod spectrum;
pub mod sweep;

pub use error::{Error, Result};
