//! Numerics for complex powers of Lorentzian wave operators: Hadamard
//! transport coefficients, the elementary family F_α(z), contour-integral
//! complex powers and their residues, spectral-action expansions, exact
//! ultrastatic spectral sums and the bicharacteristic flow.

pub mod error;
pub mod num;
pub mod elemfam;
pub mod contour;
pub mod specpowers;
pub mod geomkit;
pub mod hadamard;
pub mod ultrastatic;
pub mod scflow;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
