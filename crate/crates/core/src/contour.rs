//! Contours γ_ε, γ₀, η_δ and certified quadrature along them.
//!
//! γ_ε = iε + γ̃_ε where γ̃_ε runs in from ∞·e^{i(π−θ)} to radius ε/2, goes
//! once around the centre through its lowest point, and leaves along
//! e^{iθ}·[ε/2, ∞). Traversal is left to right. The mirror contour (complex
//! conjugate, traversed right to left) carries the opposite regulator.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::elemfam::{fa_diag, EvalMode, MeroValue};
use crate::error::{Error, Result};
use crate::num::special::{gamma, gamma_residue};
use crate::num::{cpow, cpow_branch, quad};
use crate::specpowers::pochhammer_factor;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ContourKind {
    GammaEps,
    Gamma0,
    EtaDelta,
}

/// Sign of the regulator in (z ∓ iε)^{−α}.
///
/// `Minus` pairs with γ_ε in the upper half-plane and reproduces
/// (λ − iε)^{−α}; `Plus` pairs with the mirror contour in the lower
/// half-plane and reproduces (λ + iε)^{−α}.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regulator {
    Minus,
    Plus,
}

impl Regulator {
    /// The sign s with (z − s·iε).
    pub fn sign(self) -> f64 {
        match self {
            Regulator::Minus => 1.0,
            Regulator::Plus => -1.0,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ContourSpec {
    pub kind: ContourKind,
    /// ε for γ-kinds, δ for η_δ.
    pub eps: f64,
    /// In (0, π/2) for γ-kinds and (π/2, π) for η_δ.
    pub theta: f64,
    /// Mirror the γ-contour into the lower half-plane (right to left).
    pub mirrored: bool,
    /// Relative tolerance for the panel quadratures and the tail certificate.
    pub tol: f64,
    /// Upper bound on the truncation radius.
    pub zmax_cap: f64,
    /// Radius beyond which the integrand is expected to follow its power law.
    pub scale: f64,
}

impl ContourSpec {
    pub fn gamma_eps(eps: f64) -> Self {
        ContourSpec { kind: ContourKind::GammaEps, eps, theta: PI / 4.0, mirrored: false, tol: 1e-11, zmax_cap: 1e14, scale: 1.0 }
    }

    pub fn gamma_0() -> Self {
        ContourSpec { kind: ContourKind::Gamma0, eps: 0.0, theta: PI / 4.0, mirrored: false, tol: 1e-11, zmax_cap: 1e14, scale: 1.0 }
    }

    pub fn eta_delta(delta: f64) -> Self {
        ContourSpec { kind: ContourKind::EtaDelta, eps: delta, theta: 3.0 * PI / 4.0, mirrored: false, tol: 1e-11, zmax_cap: 1e14, scale: 1.0 }
    }

    /// The contour matching a regulator: γ_ε for `Minus`, its mirror for `Plus`.
    pub fn for_regulator(eps: f64, reg: Regulator) -> Self {
        let mut c = ContourSpec::gamma_eps(eps);
        c.mirrored = reg == Regulator::Plus;
        c
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    fn validate(&self) -> Result<()> {
        let ok = match self.kind {
            ContourKind::GammaEps => self.eps > 0.0 && self.theta > 0.0 && self.theta < PI / 2.0,
            ContourKind::Gamma0 => self.theta > 0.0 && self.theta < PI / 2.0,
            ContourKind::EtaDelta => self.eps > 0.0 && self.theta > PI / 2.0 && self.theta < PI,
        };
        if !ok {
            return Err(Error::Domain(format!("invalid contour {self:?}")));
        }
        Ok(())
    }

    fn segments(&self) -> Vec<Segment> {
        let e = self.eps;
        let th = self.theta;
        let ei = |a: f64| C64::from_polar(1.0, a);
        let mut segs = match self.kind {
            ContourKind::GammaEps => {
                let c = C64::new(0.0, e);
                vec![
                    Segment::Ray { origin: c, dir: ei(PI - th), s0: e / 2.0, outward: false },
                    Segment::Arc { center: c, radius: e / 2.0, phi0: PI - th, phi1: 2.0 * PI + th },
                    Segment::Ray { origin: c, dir: ei(th), s0: e / 2.0, outward: true },
                ]
            }
            ContourKind::Gamma0 => {
                let c = C64::new(0.0, 0.0);
                vec![
                    Segment::Ray { origin: c, dir: ei(PI - th), s0: 0.0, outward: false },
                    Segment::Ray { origin: c, dir: ei(th), s0: 0.0, outward: true },
                ]
            }
            ContourKind::EtaDelta => {
                let c = C64::new(0.0, 0.0);
                vec![
                    Segment::Ray { origin: c, dir: ei(th), s0: e, outward: false },
                    Segment::Arc { center: c, radius: e, phi0: th, phi1: -th },
                    Segment::Ray { origin: c, dir: ei(-th), s0: e, outward: true },
                ]
            }
        };
        if self.mirrored && self.kind != ContourKind::EtaDelta {
            // Conjugate every point and reverse the traversal.
            segs = segs
                .into_iter()
                .rev()
                .map(|s| match s {
                    Segment::Ray { origin, dir, s0, outward } => {
                        Segment::Ray { origin: origin.conj(), dir: dir.conj(), s0, outward: !outward }
                    }
                    Segment::Arc { center, radius, phi0, phi1 } => {
                        Segment::Arc { center: center.conj(), radius, phi0: -phi1, phi1: -phi0 }
                    }
                })
                .collect();
        }
        segs
    }

    /// Sample points along the contour (for plotting and tests).
    pub fn sample(&self, per_segment: usize, reach: f64) -> Vec<C64> {
        let mut out = Vec::new();
        for s in self.segments() {
            for j in 0..per_segment {
                let u = j as f64 / (per_segment - 1).max(1) as f64;
                out.push(match s {
                    Segment::Ray { origin, dir, s0, outward } => {
                        let r = if outward { s0 + u * (reach - s0) } else { reach - u * (reach - s0) };
                        origin + dir * r
                    }
                    Segment::Arc { center, radius, phi0, phi1 } => {
                        center + C64::from_polar(radius, phi0 + u * (phi1 - phi0))
                    }
                });
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug)]
enum Segment {
    /// origin + s·dir for s ∈ [s0, ∞); `outward` means traversed towards ∞.
    Ray { origin: C64, dir: C64, s0: f64, outward: bool },
    /// center + radius·e^{iφ}, φ from phi0 to phi1.
    Arc { center: C64, radius: f64, phi0: f64, phi1: f64 },
}

#[derive(Clone, Copy, Debug)]
pub struct ContourResult {
    pub value: C64,
    /// Quadrature error estimate plus the certified truncation bound.
    pub error: f64,
    pub tail_bound: f64,
    pub zmax: f64,
}

/// ∫_contour f(z) dz.
///
/// `beta` is the caller's decay exponent: |f(z)| ≤ C|z|^{−1−β} for large
/// |z|. Rays are integrated on geometric panels; the truncation radius is
/// doubled until the tail bound C·zmax^{−β}/β per ray falls below the
/// tolerance. A constant C that keeps growing under doubling means the
/// declared decay is wrong and yields `TailError`.
pub fn quadrature<F>(f: &F, spec: &ContourSpec, beta: f64) -> Result<ContourResult>
where
    F: Fn(C64) -> C64 + Sync,
{
    spec.validate()?;
    if beta <= 0.0 {
        return Err(Error::Tail(format!("decay exponent β = {beta} must be positive")));
    }
    let segs = spec.segments();
    // Scale of the problem: radius of the finite part of the contour.
    let base = match spec.kind {
        ContourKind::Gamma0 => 1.0,
        _ => spec.eps.max(1e-300),
    };
    let rough = segs
        .iter()
        .map(|s| segment_piece(f, s, 0.0, 4.0 * base.max(1.0), 1e-6, 1e-6).map(|r| r.0))
        .collect::<Result<Vec<_>>>()?;
    let scale = rough.iter().map(|v| v.norm()).sum::<f64>().max(1e-300);
    let abs_tol = spec.tol * scale * 1e-2;

    let results: Vec<Result<(C64, f64, f64, f64, f64)>> = segs
        .par_iter()
        .map(|s| integrate_segment(f, s, spec, beta, abs_tol, base))
        .collect();
    let mut value = C64::new(0.0, 0.0);
    let mut err = 0.0;
    let mut tail = 0.0;
    let mut zmax: f64 = 0.0;
    for r in results {
        let (v, e, t, zm, _) = r?;
        value += v;
        err += e;
        tail += t;
        zmax = zmax.max(zm);
    }
    Ok(ContourResult { value, error: err + tail, tail_bound: tail, zmax })
}

/// Integral of one segment restricted to the parameter window [a, b]
/// (radius for rays, fraction of the sweep for arcs).
fn segment_piece<F: Fn(C64) -> C64>(
    f: &F,
    s: &Segment,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<(C64, f64)> {
    match *s {
        Segment::Ray { origin, dir, s0, outward } => {
            let lo = s0.max(a);
            if b <= lo {
                return Ok((C64::new(0.0, 0.0), 0.0));
            }
            let g = |r: f64| f(origin + dir * r) * dir;
            let q = quad::adaptive(&g, lo, b, abs_tol, rel_tol, 4000)?;
            let sign = if outward { 1.0 } else { -1.0 };
            Ok((q.value * sign, q.error))
        }
        Segment::Arc { center, radius, phi0, phi1 } => {
            if a > 0.0 {
                return Ok((C64::new(0.0, 0.0), 0.0));
            }
            let g = |phi: f64| {
                let w = C64::from_polar(radius, phi);
                f(center + w) * C64::new(0.0, 1.0) * w
            };
            let (lo, hi, sign) = if phi1 >= phi0 { (phi0, phi1, 1.0) } else { (phi1, phi0, -1.0) };
            let q = quad::adaptive(&g, lo, hi, abs_tol, rel_tol, 4000)?;
            Ok((q.value * sign, q.error))
        }
    }
}

fn integrate_segment<F: Fn(C64) -> C64>(
    f: &F,
    s: &Segment,
    spec: &ContourSpec,
    beta: f64,
    abs_tol: f64,
    base: f64,
) -> Result<(C64, f64, f64, f64, f64)> {
    match *s {
        Segment::Arc { .. } => {
            let (v, e) = segment_piece(f, s, 0.0, 0.0, abs_tol, spec.tol)?;
            Ok((v, e, 0.0, 0.0, 0.0))
        }
        Segment::Ray { origin, dir, s0, outward } => {
            let sign = if outward { 1.0 } else { -1.0 };
            let scale = spec.scale.max(base).max(1.0);
            let mut value = C64::new(0.0, 0.0);
            let mut err = 0.0;
            // Inner panel, possibly down to a singular endpoint at s0 = 0.
            let mut a = s0;
            let mut b = if s0 > 0.0 { 2.0 * s0 } else { base };
            let g = |r: f64| f(origin + dir * r) * dir;
            let q = quad::adaptive(&g, a, b, abs_tol, spec.tol, 4000)?;
            value += q.value * sign;
            err += q.error;
            let cmag = |r: f64| f(origin + dir * r).norm() * r.powf(1.0 + beta);
            let mut c_prev = f64::NAN;
            let mut growth = 0;
            let mut prev_total: Option<C64> = None;
            loop {
                a = b;
                b = 2.0 * a;
                let q = quad::adaptive(&g, a, b, abs_tol, spec.tol, 4000)?;
                value += q.value * sign;
                err += q.error;
                // Envelope constant sampled on the outer part of the panel.
                let c = [0.6, 0.8, 1.0].iter().map(|t| cmag(a + t * (b - a))).fold(0.0, f64::max);
                if a > 64.0 * scale {
                    if c_prev.is_finite() && c > 1.2 * c_prev && c > 1e-300 {
                        growth += 1;
                    } else {
                        growth = 0;
                    }
                }
                if growth >= 6 {
                    return Err(Error::Tail(format!(
                        "|f(z)|·|z|^(1+β) keeps growing along the ray (β = {beta} overstates the decay)"
                    )));
                }
                c_prev = c;
                // Power-law tail ∫_b^∞ A r^{−1−β} dr = g(b)·b/β, added to the
                // truncated value; its drift between doublings bounds the error.
                let total = value + g(b) * (b / beta) * sign;
                let bound = c * b.powf(-beta) / beta;
                if b > 64.0 * scale {
                    if let Some(prev) = prev_total {
                        let drift: f64 = (total - prev).norm();
                        let target = spec.tol * total.norm().max(abs_tol / spec.tol);
                        if bound <= target {
                            return Ok((value, err, bound, b, c));
                        }
                        if drift <= target {
                            return Ok((total, err, drift, b, c));
                        }
                    }
                }
                prev_total = Some(total);
                if b >= spec.zmax_cap {
                    return Err(Error::Tail(format!(
                        "tail bound {bound:.3e} still above tolerance at zmax = {b:.3e}"
                    )));
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct PowerCheck {
    pub quadrature: C64,
    pub closed_form: C64,
    pub rel_err: f64,
    pub error_estimate: f64,
}

/// Closed form (−1)^k (−α)(−α−1)⋯(−α−k+1) (λ ∓ iε)^{−α−k}.
pub fn power_identity_closed(alpha: C64, k: u32, eps: f64, xi_q: f64, reg: Regulator) -> C64 {
    let mut fac = C64::new(1.0, 0.0);
    for j in 0..k {
        fac *= -alpha - j as f64;
    }
    if k % 2 == 1 {
        fac = -fac;
    }
    fac * cpow(C64::new(xi_q, -reg.sign() * eps), -alpha - k as f64)
}

/// (z ∓ iε)^{−α} on the contour side where it is continuous: the branch of
/// arg(z ∓ iε) that is continuous through the half-plane the contour
/// separates from its regulator point.
pub fn regulated_power(z: C64, alpha: C64, eps: f64, reg: Regulator) -> C64 {
    let w = z - C64::new(0.0, reg.sign() * eps);
    match reg {
        Regulator::Minus => cpow_branch(w, -alpha, -1.5 * PI),
        Regulator::Plus => cpow_branch(w, -alpha, -0.5 * PI),
    }
}

/// Scalar contour-power identity:
/// (1/2πi)∫ (z ∓ iε)^{−α} k!(λ − z)^{−k−1} dz = (−1)^k(−α)⋯(−α−k+1)(λ ∓ iε)^{−α−k}.
pub fn power_identity_check(alpha: C64, k: u32, eps: f64, xi_q: f64, reg: Regulator, theta: f64) -> Result<PowerCheck> {
    if alpha.re <= 0.0 {
        return Err(Error::Domain("Re α must be positive".into()));
    }
    if eps <= 0.0 {
        return Err(Error::Domain("ε must be positive".into()));
    }
    let kfact = crate::num::special::factorial(k);
    let lam = C64::new(xi_q, 0.0);
    let f = |z: C64| regulated_power(z, alpha, eps, reg) * kfact * cpow(lam - z, C64::new(-(k as f64) - 1.0, 0.0));
    let spec = ContourSpec::for_regulator(eps, reg).with_theta(theta).with_scale(xi_q.abs() + eps);
    let r = quadrature(&f, &spec, alpha.re + k as f64)?;
    let lhs = r.value / C64::new(0.0, 2.0 * PI);
    let rhs = power_identity_closed(alpha, k, eps, xi_q, reg);
    Ok(PowerCheck {
        quadrature: lhs,
        closed_form: rhs,
        rel_err: (lhs - rhs).norm() / rhs.norm(),
        error_estimate: r.error / (2.0 * PI),
    })
}

#[derive(Clone, Copy, Debug)]
pub struct ContourPower {
    pub value: MeroValue,
    /// Quadrature of the left side, when verification was requested.
    pub verified: Option<C64>,
    pub gap: Option<f64>,
}

/// (1/2πi)∫ (z ∓ iε)^{−α} F_k(z − m², 0) dz
///   = pochhammer(α, k)/Γ(α+k) · F_{α+k−1}(−m² ± iε, 0).
///
/// With `verify` the left side is also integrated along the contour. When
/// F_k(·, 0) itself sits on a pole (k + 1 − n/2 a non-positive integer) only
/// its logarithmic Laurent term survives the contour integral and that term
/// is used as the integrand.
pub fn fa_contour_power(alpha: C64, k: u32, eps: f64, mass: f64, n: u32, reg: Regulator, verify: bool) -> Result<ContourPower> {
    if alpha.re <= 0.0 {
        return Err(Error::Domain("Re α must be positive".into()));
    }
    if eps <= 0.0 {
        return Err(Error::Domain("ε must be positive".into()));
    }
    let kk = C64::new(k as f64, 0.0);
    let zpt = C64::new(-mass * mass, reg.sign() * eps);
    let fd = fa_diag(alpha + kk - 1.0, zpt, n, EvalMode::Laurent)?;
    let fac = pochhammer_factor(alpha, k) / gamma(alpha + kk);
    let value = MeroValue { analytic_part: fd.analytic_part * fac, pole_order: fd.pole_order, residue: fd.residue * fac };
    if !verify {
        return Ok(ContourPower { value, verified: None, gap: None });
    }
    if fd.pole_order != 0 {
        return Err(Error::Pole("verification needs α + k − 1 off the poles".into()));
    }
    let h = n as f64 / 2.0;
    let s0 = k as f64 + 1.0 - h;
    let m2 = C64::new(mass * mass, 0.0);
    let wick = C64::new(0.0, reg.sign());
    let c = wick * (4.0 * PI).powf(-h);
    let on_pole = s0 <= 0.0;
    let f = |z: C64| {
        let minus_w = m2 - z;
        let kernel = if on_pole {
            let j = (-s0) as u32;
            -c * gamma_residue(j) * cpow(minus_w, C64::new(-s0, 0.0)) * minus_w.ln()
        } else {
            c * gamma(C64::new(s0, 0.0)) * cpow(minus_w, C64::new(-s0, 0.0))
        };
        regulated_power(z, alpha, eps, reg) * kernel
    };
    // Decay |z|^{−Re α − s0}, less a margin for the logarithm.
    let beta = alpha.re + s0 - 1.0 - if on_pole { 0.1 } else { 0.0 };
    if beta <= 0.0 {
        return Err(Error::Tail(format!("integrand decays too slowly (β = {beta})")));
    }
    let spec = ContourSpec::for_regulator(eps, reg).with_scale(mass * mass + eps);
    let r = quadrature(&f, &spec, beta)?;
    let lhs = r.value / C64::new(0.0, 2.0 * PI);
    let gap = (lhs - value.analytic_part).norm() / value.analytic_part.norm();
    Ok(ContourPower { value, verified: Some(lhs), gap: Some(gap) })
}
