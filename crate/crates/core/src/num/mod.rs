//! Numerical infrastructure shared by the algorithm modules.

pub mod cheb;
pub mod jet;
pub mod ode;
pub mod quad;
pub mod special;

pub use jet::{Jet2, Scalar, MAXD};

use num_complex::Complex64 as C64;

/// Principal complex power a^b = exp(b·Log a).
pub fn cpow(a: C64, b: C64) -> C64 {
    if a.norm() == 0.0 {
        return C64::new(0.0, 0.0);
    }
    (b * a.ln()).exp()
}

/// Complex power with the logarithm's argument taken in (lo, lo + 2π].
pub fn cpow_branch(a: C64, b: C64, lo: f64) -> C64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut arg = a.arg();
    while arg <= lo {
        arg += two_pi;
    }
    while arg > lo + two_pi {
        arg -= two_pi;
    }
    let log = C64::new(a.norm().ln(), arg);
    (b * log).exp()
}

/// Richardson extrapolation to h → 0 of samples f(h), f(h/2), f(h/4) for
/// an error expansion in integer powers h, h², ….
pub fn richardson3<T>(f0: T, f1: T, f2: T) -> T
where
    T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Sub<Output = T> + std::ops::Add<Output = T>,
{
    // Eliminates the h and h² terms: (8 f(h/4) − 6 f(h/2) + f(h)) / 3.
    f2 * (8.0 / 3.0) - f1 * 2.0 + f0 * (1.0 / 3.0)
}
