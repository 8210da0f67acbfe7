//! Numerics for second-order Fuchsian equations on the sphere with four real
//! punctures `{0, a, 1, oo}`: real-monodromy accessory parameters, monodromy
//! representations, and the (possibly singular) Liouville fields they define.

pub mod action;
pub mod equation;
pub mod dd;
pub mod error;
pub mod frobenius;
pub mod liouville;
pub mod monodromy;
pub mod path;
pub mod spectra;
pub mod taylor;

pub use error::{Error, Result};
