//! The elementary family F_α(z, x): the Lorentz-invariant distribution whose
//! Fourier transform is Γ(α+1)(Q(ξ) − z)^{−α−1}, Q(ξ) = −ξ₀² + Σ ξᵢ².
//!
//! Diagonal values come from the Wick-rotated closed form
//! F_α(z, 0) = ±i (4π)^{−n/2} Γ(α+1−n/2) (−z)^{n/2−α−1}, with +i for
//! Im z > 0 and −i for Im z < 0. Off-diagonal values use the Schwinger
//! representation
//! F_α(z, x) = (4π)^{−n/2} e^{iπ(α+1)/2} e^{−iπ(n−2)/4} ∫₀^∞ u^{α−n/2} e^{iuz + iq/(4u)} du,
//! q = Q(x), integrated along a rotated ray so that both ends decay.

use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::num::quad;
use crate::num::special::{factorial, gamma, gamma_pole_distance, rgamma};
use crate::num::cpow;

/// Distance below which an evaluation point counts as sitting on a pole.
pub const POLE_GUARD: f64 = 1e-8;

/// A meromorphic evaluation: analytic part plus a simple-pole residue.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeroValue {
    pub analytic_part: C64,
    pub pole_order: u8,
    pub residue: C64,
}

impl MeroValue {
    pub fn regular(v: C64) -> Self {
        MeroValue { analytic_part: v, pole_order: 0, residue: C64::new(0.0, 0.0) }
    }
}

/// A complex evaluation of F_α(z, q) with pole bookkeeping in α.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElemValue {
    pub alpha: C64,
    pub z: C64,
    pub q: f64,
    pub value: C64,
    pub pole_distance: f64,
}

/// How to treat an α that lies on a pole.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalMode {
    /// Fail with `PoleError` on a pole.
    Value,
    /// Return the residue and the finite part of the Laurent expansion.
    Laurent,
}

fn check_even(n: u32) -> Result<()> {
    if n % 2 == 1 || n < 2 {
        return Err(Error::Dimension(format!("n = {n} must be even and at least 2")));
    }
    Ok(())
}

/// Finite part of a function with at most a simple pole at `a0`:
/// the mean over a small circle is the constant Laurent coefficient.
pub fn laurent_constant<F: Fn(C64) -> C64>(f: F, a0: C64, radius: f64) -> C64 {
    let m = 64;
    let mut s = C64::new(0.0, 0.0);
    for j in 0..m {
        let th = 2.0 * PI * (j as f64 + 0.5) / m as f64;
        s += f(a0 + C64::from_polar(radius, th));
    }
    s / m as f64
}

/// Residue by the trapezoid rule on a circle of `radius` with `nodes` points.
pub fn circle_residue<F: Fn(C64) -> C64>(f: F, a0: C64, radius: f64, nodes: usize) -> C64 {
    let mut s = C64::new(0.0, 0.0);
    for j in 0..nodes {
        let w = C64::from_polar(radius, 2.0 * PI * (j as f64 + 0.5) / nodes as f64);
        s += f(a0 + w) * w;
    }
    s / nodes as f64
}

/// Closed form π^{n/2} Γ(β−n/2)(−z)^{n/2−β}/Γ(β), no pole handling.
fn euclid_closed(beta: C64, z: C64, n: u32) -> C64 {
    let h = n as f64 / 2.0;
    PI.powf(h) * gamma(beta - h) * rgamma(beta) * cpow(-z, C64::new(h, 0.0) - beta)
}

fn check_cut(z: C64) -> Result<()> {
    if z.im == 0.0 && z.re >= 0.0 {
        return Err(Error::Branch(format!("z = {z} lies on the cut [0, ∞)")));
    }
    Ok(())
}

/// Meromorphic continuation of ∫_{ℝⁿ}(‖ξ‖² − z)^{−α} dξ.
///
/// Poles sit at α ∈ {1, …, n/2}; at a pole the residue is
/// z^{n/2−k} π^{n/2} / ((n/2−k)! Γ(k)) and the analytic part is the finite
/// Laurent coefficient.
pub fn euclid_integral(alpha: C64, z: C64, n: u32) -> Result<MeroValue> {
    check_even(n)?;
    if n > 8 {
        return Err(Error::Dimension(format!("n = {n} exceeds 8")));
    }
    check_cut(z)?;
    let h = n / 2;
    let nearest = alpha.re.round();
    let on_pole = nearest >= 1.0
        && nearest <= h as f64
        && (alpha - C64::new(nearest, 0.0)).norm() < POLE_GUARD;
    if !on_pole {
        return Ok(MeroValue::regular(euclid_closed(alpha, z, n)));
    }
    let k = nearest as u32;
    let j = h - k;
    let residue = cpow(z, C64::new(j as f64, 0.0)) * PI.powf(h as f64)
        / (factorial(j) * gamma(C64::new(k as f64, 0.0)));
    let a0 = C64::new(k as f64, 0.0);
    let analytic_part = laurent_constant(|a| euclid_closed(a, z, n), a0, 1e-2);
    Ok(MeroValue { analytic_part, pole_order: 1, residue })
}

/// Independent split-series evaluation of the Euclidean integral (needs Re z < 0):
/// (π^{n/2}/Γ(α)) [Σ_k z^k/(k!(α−n/2+k)) + ∫₁^∞ t^{α−n/2−1} e^{tz} dt].
pub fn euclid_split_series(alpha: C64, z: C64, n: u32) -> Result<C64> {
    check_even(n)?;
    if z.re >= 0.0 {
        return Err(Error::Domain("split series needs Re z < 0".into()));
    }
    let h = n as f64 / 2.0;
    let s = alpha - h;
    let mut series = C64::new(0.0, 0.0);
    let mut term = C64::new(1.0, 0.0);
    for k in 0..400 {
        if k > 0 {
            term *= z / k as f64;
        }
        let add = term / (s + k as f64);
        series += add;
        if k > 10 && add.norm() < 1e-18 * series.norm().max(1e-300) {
            break;
        }
    }
    // Tail on [1, T]: beyond T the factor e^{t Re z} is negligible.
    let t_end = 1.0 + (60.0 + s.re.abs() * 5.0) / (-z.re);
    let f = |t: f64| cpow(C64::new(t, 0.0), s - 1.0) * (z * t).exp();
    let tail = quad::adaptive(&f, 1.0, t_end, 1e-16, 1e-14, 20_000)?;
    Ok(PI.powf(h) * rgamma(alpha) * (series + tail.value))
}

/// Wick factor: +i above the real axis (and on it), −i below.
fn wick(z: C64) -> C64 {
    if z.im < 0.0 {
        C64::new(0.0, -1.0)
    } else {
        C64::new(0.0, 1.0)
    }
}

fn fa_diag_closed(alpha: C64, z: C64, n: u32) -> C64 {
    let h = n as f64 / 2.0;
    wick(z) * (4.0 * PI).powf(-h) * gamma(alpha + 1.0 - h) * cpow(-z, C64::new(h - 1.0, 0.0) - alpha)
}

/// Distance from α to the nearest pole of the diagonal continuation.
pub fn fa_pole_distance(alpha: C64, n: u32) -> f64 {
    gamma_pole_distance(alpha + 1.0 - n as f64 / 2.0)
}

/// Diagonal value F_α(z, 0).
///
/// Poles sit at α = n/2 − 1 − j, j = 0, 1, …, with residue
/// ±i (4π)^{−n/2} z^j / j!.
pub fn fa_diag(alpha: C64, z: C64, n: u32, mode: EvalMode) -> Result<MeroValue> {
    check_even(n)?;
    if z.norm() == 0.0 {
        return Err(Error::Domain("z = 0".into()));
    }
    check_cut(z)?;
    let dist = fa_pole_distance(alpha, n);
    if dist >= POLE_GUARD {
        return Ok(MeroValue::regular(fa_diag_closed(alpha, z, n)));
    }
    if mode == EvalMode::Value {
        return Err(Error::Pole(format!("α = {alpha} is a pole of F_α(z, 0) for n = {n}")));
    }
    let h = n as f64 / 2.0;
    let j = (h - 1.0 - alpha.re).round() as u32;
    let a0 = C64::new(h - 1.0 - j as f64, 0.0);
    // Γ contributes (−1)^j/j!, and (−z)^j turns it into z^j/j!.
    let residue = wick(z) * (4.0 * PI).powf(-h) * cpow(z, C64::new(j as f64, 0.0)) / factorial(j);
    let analytic_part = laurent_constant(|a| fa_diag_closed(a, z, n), a0, 1e-2);
    Ok(MeroValue { analytic_part, pole_order: 1, residue })
}

/// Off-diagonal value with its IR (inner) and UV (outer) halves.
#[derive(Clone, Copy, Debug)]
pub struct OffDiag {
    pub value: C64,
    pub ir: C64,
    pub uv: C64,
    pub error: f64,
}

/// F_α(z, x) at a point with Minkowski square q = −x₀² + |x'|² ≠ 0, Im z > 0.
///
/// The Schwinger integral is taken along u = e^{iφ}e^{v}, with φ chosen so
/// that e^{iuz} decays as v → ∞ and e^{iq/(4u)} decays as v → −∞; the
/// integrand in v then decays doubly exponentially and the trapezoid rule
/// converges geometrically. The split at v = 0 gives the IR/UV halves.
pub fn fa_offdiag(alpha: C64, z: C64, q: f64, n: u32) -> Result<OffDiag> {
    check_even(n)?;
    if z.im <= 0.0 {
        return Err(Error::Domain(format!("Im z = {} must be positive", z.im)));
    }
    if q == 0.0 {
        return Err(Error::Domain("q = 0 is the diagonal; use fa_diag".into()));
    }
    let h = n as f64 / 2.0;
    let argz = z.arg();
    let phi = if q > 0.0 { -0.5 * argz } else { 0.5 * (PI - argz) };
    let rot = C64::from_polar(1.0, phi);
    let s = alpha - h + 1.0;
    let a = C64::new(0.0, 1.0) * rot * z; // exponent coefficient of e^v, Re a < 0
    let b = C64::new(0.0, 0.25 * q) / rot; // exponent coefficient of e^{−v}, Re b < 0
    let logf = |v: f64| -> C64 { s * v + a * v.exp() + b * (-v).exp() };
    // Locate the bulk: maximum of Re log f, then walk out until 45 e-folds down.
    let mut vpk = 0.0;
    let mut best = f64::NEG_INFINITY;
    let mut v = -60.0;
    while v <= 60.0 {
        let r = logf(v).re;
        if r > best {
            best = r;
            vpk = v;
        }
        v += 0.25;
    }
    let mut lo = vpk;
    while logf(lo).re > best - 45.0 {
        lo -= 0.25;
        if lo < -800.0 {
            return Err(Error::Convergence("IR end does not decay".into()));
        }
    }
    let mut hi = vpk;
    while logf(hi).re > best - 45.0 {
        hi += 0.25;
        if hi > 800.0 {
            return Err(Error::Convergence("UV end does not decay".into()));
        }
    }
    // Returns the IR and UV halves and Σ|terms|, the scale of the roundoff.
    let trap = |step: f64| -> (C64, C64, f64) {
        let mut ir = C64::new(0.0, 0.0);
        let mut uv = C64::new(0.0, 0.0);
        let mut mass = 0.0;
        let k0 = (lo / step).floor() as i64;
        let k1 = (hi / step).ceil() as i64;
        for k in k0..=k1 {
            let v = k as f64 * step;
            let val = logf(v).exp() * step;
            mass += val.norm();
            // The v = 0 node is shared equally between the halves.
            if k < 0 {
                ir += val;
            } else if k > 0 {
                uv += val;
            } else {
                ir += val * 0.5;
                uv += val * 0.5;
            }
        }
        (ir, uv, mass)
    };
    let pref = (4.0 * PI).powf(-h)
        * (C64::new(0.0, PI / 2.0) * (alpha + 1.0)).exp()
        * C64::from_polar(1.0, -PI * (n as f64 - 2.0) / 4.0)
        * cpow(rot, s);
    let mut step = 0.1;
    let (mut ir, mut uv, _) = trap(step);
    for _ in 0..8 {
        step *= 0.5;
        let (ir2, uv2, mass) = trap(step);
        let diff = (ir2 + uv2 - ir - uv).norm();
        ir = ir2;
        uv = uv2;
        // Oscillation near the real axis cancels the sum well below its
        // terms; below 64·ε·Σ|terms| the difference is roundoff.
        if diff <= (1e-14 * (ir + uv).norm()).max(64.0 * f64::EPSILON * mass) {
            let value = pref * (ir + uv);
            return Ok(OffDiag {
                value,
                ir: pref * ir,
                uv: pref * uv,
                error: pref.norm() * diff,
            });
        }
    }
    Err(Error::Convergence(format!(
        "trapezoid on the rotated ray did not converge for α = {alpha}, z = {z}, q = {q}"
    )))
}

/// Minkowski square −x₀² + Σ xᵢ².
pub fn minkowski_square(x: &[f64]) -> f64 {
    -x[0] * x[0] + x[1..].iter().map(|v| v * v).sum::<f64>()
}

/// F_α(z, x) as a function of the point x.
pub fn fa_at(alpha: C64, z: C64, x: &[f64], n: u32) -> Result<C64> {
    Ok(fa_offdiag(alpha, z, minkowski_square(x), n)?.value)
}

/// Applies □_η = ∂₀² − Σ∂ᵢ² to `f` at x with fourth-order central differences.
pub fn box_fd<F: Fn(&[f64]) -> Result<C64>>(f: &F, x: &[f64], h: f64) -> Result<C64> {
    let c = f(x)?;
    let mut acc = C64::new(0.0, 0.0);
    for mu in 0..x.len() {
        let mut y = x.to_vec();
        let mut at = |d: f64| -> Result<C64> {
            y[mu] = x[mu] + d;
            f(&y)
        };
        let d2 = (-at(2.0 * h)? + at(h)? * 16.0 - c * 30.0 + at(-h)? * 16.0 - at(-2.0 * h)?) / (12.0 * h * h);
        acc += if mu == 0 { d2 } else { -d2 };
    }
    Ok(acc)
}

/// Fourth-order central first derivative along axis `mu`.
pub fn grad_fd<F: Fn(&[f64]) -> Result<C64>>(f: &F, x: &[f64], mu: usize, h: f64) -> Result<C64> {
    let mut y = x.to_vec();
    let mut at = |d: f64| -> Result<C64> {
        y[mu] = x[mu] + d;
        f(&y)
    };
    Ok((-at(2.0 * h)? + at(h)? * 8.0 - at(-h)? * 8.0 + at(-2.0 * h)?) / (12.0 * h))
}

#[derive(Clone, Copy, Debug)]
pub struct PdeReport {
    /// max |(□ − z)F_α − αF_{α−1}| over the grid.
    pub max_residual: f64,
    /// max |αF_{α−1}| (or max |F_α| when α = 0) over the grid.
    pub scale: f64,
    pub relative: f64,
    /// max |2∂_μF_α − η_{μν}x^νF_{α−1}| over grid and μ.
    pub gradient_residual: f64,
    pub gradient_scale: f64,
}

/// Checks (□_η − z)F_α = αF_{α−1} and 2∂_μF_α = η_{μν}x^νF_{α−1} by finite
/// differences at grid points off the light cone.
pub fn pde_check(alpha: C64, z: C64, grid: &[Vec<f64>], n: u32, margin: f64) -> Result<PdeReport> {
    let h = 1e-2;
    let f = |x: &[f64]| fa_at(alpha, z, x, n);
    let fm = |x: &[f64]| fa_at(alpha - 1.0, z, x, n);
    let mut rep = PdeReport { max_residual: 0.0, scale: 0.0, relative: 0.0, gradient_residual: 0.0, gradient_scale: 0.0 };
    for x in grid {
        if x.len() != n as usize {
            return Err(Error::Dimension(format!("grid point has {} coordinates, n = {n}", x.len())));
        }
        if minkowski_square(x).abs() < margin {
            return Err(Error::Domain(format!("grid point {x:?} is within {margin} of the light cone")));
        }
        let lhs = box_fd(&f, x, h)? - z * f(x)?;
        let lower = fm(x)?;
        let rhs = alpha * lower;
        rep.max_residual = rep.max_residual.max((lhs - rhs).norm());
        rep.scale = rep.scale.max(if alpha.norm() == 0.0 { f(x)?.norm() } else { rhs.norm() });
        for mu in 0..x.len() {
            let eta_x = if mu == 0 { x[0] } else { -x[mu] };
            let g = grad_fd(&f, x, mu, h)? * 2.0;
            rep.gradient_residual = rep.gradient_residual.max((g - lower * eta_x).norm());
            rep.gradient_scale = rep.gradient_scale.max((lower * eta_x).norm());
        }
    }
    rep.relative = if rep.scale > 0.0 { rep.max_residual / rep.scale } else { rep.max_residual };
    Ok(rep)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BernsteinStatus {
    Checked,
    /// The operator's denominator 4(α+2)z vanishes.
    Degenerate,
}

#[derive(Clone, Copy, Debug)]
pub struct BernsteinReport {
    pub status: BernsteinStatus,
    pub lhs: C64,
    pub direct: C64,
    pub relative: f64,
}

/// Checks the functional equation
/// F_{α+1} = [−(□−z)(Q F_α) + (2n(α+1) − 4(α+1)(α+2)) F_α] / (4(α+2)z)
/// at a point x off the light cone, with □ applied by finite differences.
pub fn bernstein_check(alpha: C64, z: C64, x: &[f64], n: u32) -> Result<BernsteinReport> {
    let direct = fa_at(alpha + 1.0, z, x, n)?;
    let denom = (alpha + 2.0) * z * 4.0;
    if denom.norm() == 0.0 {
        return Ok(BernsteinReport { status: BernsteinStatus::Degenerate, lhs: C64::new(0.0, 0.0), direct, relative: 0.0 });
    }
    let qf = |y: &[f64]| -> Result<C64> { Ok(fa_at(alpha, z, y, n)? * minkowski_square(y)) };
    let fa = fa_at(alpha, z, x, n)?;
    let op = box_fd(&qf, x, 1e-2)? - z * qf(x)?;
    let nn = n as f64;
    let lhs = (-op + fa * ((alpha + 1.0) * 2.0 * nn - (alpha + 1.0) * (alpha + 2.0) * 4.0)) / denom;
    Ok(BernsteinReport {
        status: BernsteinStatus::Checked,
        lhs,
        direct,
        relative: (lhs - direct).norm() / direct.norm(),
    })
}

/// Value record for reporting.
pub fn elem_value(alpha: C64, z: C64, q: f64, n: u32) -> Result<ElemValue> {
    let value = if q == 0.0 {
        fa_diag(alpha, z, n, EvalMode::Value)?.analytic_part
    } else {
        fa_offdiag(alpha, z, q, n)?.value
    };
    Ok(ElemValue { alpha, z, q, value, pole_distance: fa_pole_distance(alpha, n) })
}
