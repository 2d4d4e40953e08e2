//! Independent reference computations.
//!
//! Everything here is deliberately written differently from the library
//! code it checks (finite differences instead of jets, brute-force
//! enumeration instead of closed forms, direct quadrature instead of
//! contour deformation) and depends only on plain closures.

pub mod curvature;
pub mod spectra;
