//! Diagonal kernels of the complex powers (P ∓ iε)^{−α}, their poles and
//! residues, and the spectral-action expansion.
//!
//! With Hadamard diagonal values u_m and z₀ = −m² ± iε,
//! (P ∓ iε)^{−α}(x, x) ≈ Σ_m u_m · pochhammer(α, m)/Γ(α+m) · F_{α+m−1}(z₀, 0).
//! The Gamma ratio Γ(α+m−n/2)/Γ(α+m) is the finite rational
//! 1/∏_{j=1}^{n/2}(α+m−j), which keeps every term exact near the poles.

use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use crate::contour::Regulator;
use crate::elemfam::{circle_residue, laurent_constant, MeroValue, POLE_GUARD};
use crate::error::{Error, Result};
use crate::num::special::gamma;
use crate::num::{cpow, quad};

/// (−1)^m Γ(1−α)/Γ(1−α−m) = (−1)^m ∏_{j<m}(−α−j), pole-free in α.
pub fn pochhammer_factor(alpha: C64, m: u32) -> C64 {
    let mut p = C64::new(1.0, 0.0);
    for j in 0..m {
        p *= -alpha - j as f64;
    }
    if m % 2 == 1 {
        -p
    } else {
        p
    }
}

/// Exp-bump profile f̂(t) = A·exp(−1/(1 − ((t−c)/h)²)) on (c−h, c+h).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchwartzProfile {
    pub center: f64,
    pub halfwidth: f64,
    pub amplitude: f64,
}

impl SchwartzProfile {
    pub fn bump(center: f64, halfwidth: f64) -> Result<Self> {
        Self::new(center, halfwidth, 1.0)
    }

    pub fn new(center: f64, halfwidth: f64, amplitude: f64) -> Result<Self> {
        if !(halfwidth > 0.0 && center - halfwidth > 0.0) {
            return Err(Error::Domain(format!(
                "bump support [{}, {}] must lie inside (0, ∞)",
                center - halfwidth,
                center + halfwidth
            )));
        }
        Ok(SchwartzProfile { center, halfwidth, amplitude })
    }

    /// Parses `bump:center:halfwidth[:amplitude]`.
    pub fn parse(spec: &str) -> Result<Self> {
        let parts: Vec<&str> = spec.split(':').collect();
        let num = |s: &str| s.parse::<f64>().map_err(|_| Error::Format(format!("bad number '{s}' in profile '{spec}'")));
        match parts.as_slice() {
            ["bump", c, h] => Self::new(num(c)?, num(h)?, 1.0),
            ["bump", c, h, a] => Self::new(num(c)?, num(h)?, num(a)?),
            _ => Err(Error::Format(format!("unknown profile '{spec}' (expected bump:c:h[:a])"))),
        }
    }

    pub fn support(&self) -> (f64, f64) {
        (self.center - self.halfwidth, self.center + self.halfwidth)
    }

    pub fn fhat(&self, t: f64) -> f64 {
        let x = (t - self.center) / self.halfwidth;
        if x.abs() >= 1.0 {
            0.0
        } else {
            self.amplitude * (-1.0 / (1.0 - x * x)).exp()
        }
    }

    /// ∫ f̂(t) g(t) dt by tanh-sinh on the support.
    pub fn integrate<G: Fn(f64) -> C64>(&self, g: G) -> C64 {
        let (a, b) = self.support();
        let h = |t: f64| g(t) * self.fhat(t);
        match quad::tanh_sinh(&h, a, b, 1e-14) {
            Ok(r) => r.value,
            // Highly oscillatory weights: fall back to a fine Gauss rule.
            Err(_) => quad::composite_gl(&h, a, b, 400, 20),
        }
    }

    /// ∫ f̂(t) t^p dt.
    pub fn moment(&self, p: f64) -> f64 {
        self.integrate(|t| C64::new(t.powf(p), 0.0)).re
    }

    /// f(w) = ∫ f̂(t) e^{iwt} dt.
    pub fn f(&self, w: C64) -> C64 {
        let (a, b) = self.support();
        let panels = 8 + ((b - a) * w.re.abs() / 2.0) as usize;
        quad::composite_gl(&|t: f64| (C64::new(0.0, t) * w).exp() * self.fhat(t), a, b, panels, 24)
    }

    /// Mellin-type transform ∫ t^{−α} f̂(t) dt matching e^{iwt} = Mellin–Barnes of Γ.
    pub fn mellin(&self, alpha: C64) -> C64 {
        let (a, b) = self.support();
        let panels = 8 + (alpha.im.abs() * (b / a).ln() / 2.0) as usize;
        quad::composite_gl(&|t: f64| cpow(C64::new(t, 0.0), -alpha) * self.fhat(t), a, b, panels, 24)
    }
}

/// Spectral-action coefficient c_k = ∫₀^∞ f̂(t) t^{k−n/2} dt.
///
/// This is the exponent produced by the Gaussian ξ-integral of the flat
/// kernel; the Mellin variable pairs with t^{−α}, so the pole at α = n/2−k
/// picks up ∫ f̂ t^{k−n/2}.
pub fn ck_coefficient(profile: &SchwartzProfile, n: u32, k: u32) -> f64 {
    profile.moment(k as f64 - n as f64 / 2.0)
}

/// The alternative exponent t^{n/2−k−1}, kept as a diagnostic only.
pub fn ck_coefficient_alt(profile: &SchwartzProfile, n: u32, k: u32) -> f64 {
    profile.moment(n as f64 / 2.0 - k as f64 - 1.0)
}

/// Diagonal data of (P ∓ iε)^{−α}.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerDiagonal {
    pub n: u32,
    pub mass: f64,
    pub eps: f64,
    /// `Minus` is (P − iε)^{−α}, `Plus` is (P + iε)^{−α}.
    pub reg: Regulator,
    /// u_0(0), …, u_N(0).
    pub u: Vec<f64>,
}

impl PowerDiagonal {
    pub fn new(n: u32, mass: f64, eps: f64, reg: Regulator, u: Vec<f64>) -> Result<Self> {
        if n % 2 == 1 || n < 2 {
            return Err(Error::Dimension(format!("n = {n} must be even")));
        }
        if eps <= 0.0 || mass < 0.0 {
            return Err(Error::Domain("need ε > 0 and m ≥ 0".into()));
        }
        if u.is_empty() {
            return Err(Error::Domain("need at least u_0".into()));
        }
        Ok(PowerDiagonal { n, mass, eps, reg, u })
    }

    /// The spectral point z₀ = −m² ± iε at which F is evaluated.
    pub fn z0(&self) -> C64 {
        C64::new(-self.mass * self.mass, self.reg.sign() * self.eps)
    }

    /// ∓i: the Wick factor of F at z₀ (+i for P − iε).
    pub fn wick(&self) -> C64 {
        C64::new(0.0, self.reg.sign())
    }

    fn half(&self) -> u32 {
        self.n / 2
    }

    /// The m-th term of the expansion (no pole handling).
    pub fn term(&self, alpha: C64, m: usize) -> C64 {
        let h = self.half();
        let mut den = C64::new(1.0, 0.0);
        for j in 1..=h {
            den *= alpha + (m as f64 - j as f64);
        }
        let mz = -self.z0();
        self.u[m] * pochhammer_factor(alpha, m as u32) * self.wick() * (4.0 * PI).powf(-(h as f64))
            * cpow(mz, C64::new(h as f64 - m as f64, 0.0) - alpha)
            / den
    }

    /// Σ_m term_m(α).
    pub fn eval(&self, alpha: C64) -> C64 {
        (0..self.u.len()).map(|m| self.term(alpha, m)).sum()
    }

    /// Poles: α ∈ {1, …, n/2}.
    pub fn poles(&self) -> Vec<f64> {
        (1..=self.half()).rev().map(|j| j as f64).collect()
    }

    /// Analytic residue at the integer α₀ (zero off the pole set).
    pub fn residue_analytic(&self, alpha0: i64) -> C64 {
        let h = self.half() as i64;
        if alpha0 < 1 || alpha0 > h {
            return C64::new(0.0, 0.0);
        }
        let a = C64::new(alpha0 as f64, 0.0);
        let mz = -self.z0();
        let mut total = C64::new(0.0, 0.0);
        for m in 0..self.u.len() {
            let jstar = alpha0 + m as i64;
            if jstar > h {
                continue;
            }
            let mut den = 1.0;
            for j in 1..=h {
                if j != jstar {
                    den *= (alpha0 + m as i64 - j) as f64;
                }
            }
            total += self.u[m] * pochhammer_factor(a, m as u32) * self.wick() * (4.0 * PI).powf(-(h as f64))
                * cpow(mz, C64::new((h - alpha0 - m as i64) as f64, 0.0))
                / den;
        }
        total
    }
}

/// Circle-quadrature parameters of record.
pub const RESIDUE_RADIUS: f64 = 1e-3;
pub const RESIDUE_NODES: usize = 64;

/// (P ∓ iε)^{−α}(x, x) with pole bookkeeping.
pub fn cpower_diag(pd: &PowerDiagonal, alpha: C64, mode: crate::elemfam::EvalMode) -> Result<MeroValue> {
    let nearest = alpha.re.round();
    let on_pole = nearest >= 1.0
        && nearest <= pd.half() as f64
        && (alpha - C64::new(nearest, 0.0)).norm() < POLE_GUARD;
    if !on_pole {
        return Ok(MeroValue::regular(pd.eval(alpha)));
    }
    if mode == crate::elemfam::EvalMode::Value {
        return Err(Error::Pole(format!("α = {alpha} is a pole of the complex power")));
    }
    let a0 = C64::new(nearest, 0.0);
    Ok(MeroValue {
        analytic_part: laurent_constant(|a| pd.eval(a), a0, 1e-2),
        pole_order: 1,
        residue: pd.residue_analytic(nearest as i64),
    })
}

/// Residue of (P ∓ iε)^{−α}(x, x) at α₀ by the trapezoid rule on a circle
/// of radius 1e−3 with 64 nodes.
pub fn cpower_residue_circle(pd: &PowerDiagonal, alpha0: f64) -> C64 {
    circle_residue(|a| pd.eval(a), C64::new(alpha0, 0.0), RESIDUE_RADIUS, RESIDUE_NODES)
}

/// Res_{α=n/2−k} Γ(α)(P ∓ iε)^{−α}(x, x) for k ∈ {0, 1, 2}:
/// ±i(4π)^{−n/2} × {1, z₀+u₁, z₀²/2 + z₀u₁ + u₂}, z₀ = −m² ± iε.
pub fn gamma_weighted_residues(pd: &PowerDiagonal, k: u32) -> Result<C64> {
    let h = pd.half();
    if k > 2 {
        return Err(Error::Dimension(format!("k = {k} is outside {{0, 1, 2}}")));
    }
    if k >= h {
        return Err(Error::Dimension(format!(
            "n = {} and k = {k}: the pole α = {} meets the pole of Γ(α)",
            pd.n,
            h as i64 - k as i64
        )));
    }
    let z0 = pd.z0();
    let u = |m: usize| pd.u.get(m).copied().unwrap_or(0.0);
    let poly = match k {
        0 => C64::new(1.0, 0.0) * u(0),
        1 => z0 * u(0) + u(1),
        _ => z0 * z0 * 0.5 * u(0) + z0 * u(1) + u(2),
    };
    Ok(pd.wick() * (4.0 * PI).powf(-(h as f64)) * poly)
}

/// Circle-quadrature oracle for `gamma_weighted_residues`.
pub fn gamma_weighted_residue_circle(pd: &PowerDiagonal, k: u32) -> C64 {
    let a0 = C64::new(pd.half() as f64 - k as f64, 0.0);
    circle_residue(|a| gamma(a) * pd.eval(a), a0, RESIDUE_RADIUS, RESIDUE_NODES)
}

/// The three terms of the large-Λ expansion of f((P+iε)/Λ²)(x, x).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Expansion {
    /// Coefficients of Λⁿ, Λ^{n−2}, Λ^{n−4}.
    pub coeffs: [C64; 3],
    pub value: C64,
}

/// e^{i(n−2k)π/4} c_k P_k / (i 2ⁿ π^{n/2}) Λ^{n−2k} summed over k = 0, 1, 2, with
/// P_0 = 1, P_1 = w + u₁, P_2 = w²/2 + w u₁ + u₂ and w = −m² − iε.
pub fn predicted_expansion(profile: &SchwartzProfile, n: u32, mass: f64, eps: f64, u1: f64, u2: f64, lambda: f64) -> Result<Expansion> {
    if lambda <= 0.0 {
        return Err(Error::Domain("Λ must be positive".into()));
    }
    let nn = n as f64;
    let w = C64::new(-mass * mass, -eps);
    let polys = [C64::new(1.0, 0.0), w + u1, w * w * 0.5 + w * u1 + u2];
    let mut coeffs = [C64::new(0.0, 0.0); 3];
    let mut value = C64::new(0.0, 0.0);
    for k in 0..3u32 {
        let phase = C64::from_polar(1.0, (nn - 2.0 * k as f64) * PI / 4.0);
        let ck = ck_coefficient(profile, n, k);
        let c = phase * ck * polys[k as usize] / (C64::new(0.0, 1.0) * 2f64.powf(nn) * PI.powf(nn / 2.0));
        coeffs[k as usize] = c;
        value += c * lambda.powf(nn - 2.0 * k as f64);
    }
    Ok(Expansion { coeffs, value })
}

/// f((P+iε)/Λ²)(x, x) from the Mellin representation
/// (1/2πi)∫_{Re α=c} e^{iπα/2} Γ(α) Λ^{2α} (P+iε)^{−α}(x, x) M f̂(α) dα,
/// with M f̂(α) = ∫ t^{−α} f̂(t) dt.
pub fn f_of_operator_diag(pd: &PowerDiagonal, profile: &SchwartzProfile, lambda: f64, c: f64) -> Result<C64> {
    if pd.reg != Regulator::Plus {
        return Err(Error::Domain("the Mellin route is set up for P + iε".into()));
    }
    if c <= pd.n as f64 / 2.0 {
        return Err(Error::Domain(format!("abscissa c = {c} must exceed n/2")));
    }
    let ln_l2 = 2.0 * lambda.ln();
    let integrand = |y: f64| -> C64 {
        let a = C64::new(c, y);
        (C64::new(0.0, PI / 2.0) * a).exp() * gamma(a) * (a * ln_l2).exp() * pd.eval(a) * profile.mellin(a)
    };
    // dα = i dy, so (1/2πi)∫ dα = (1/2π)∫ dy.
    let mut total = C64::new(0.0, 0.0);
    let width = 1.0;
    let mut y = 0.0;
    let panel = |a: f64, b: f64| quad::adaptive(&integrand, a, b, 1e-300, 1e-12, 200).map(|r| r.value);
    loop {
        let v = panel(y, y + width)? + panel(-y - width, -y)?;
        total += v;
        y += width;
        let edge = integrand(y).norm() + integrand(-y).norm();
        if y > 8.0 && v.norm() < 1e-15 * total.norm() && edge < 1e-15 * total.norm() {
            break;
        }
        if y > 400.0 {
            return Err(Error::Tail(format!("Mellin integrand not negligible at |Im α| = {y}")));
        }
    }
    Ok(total / (2.0 * PI))
}
