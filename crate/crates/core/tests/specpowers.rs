use lspec_core::contour::Regulator;
use lspec_core::elemfam::{fa_diag, EvalMode};
use lspec_core::num::quad;
use lspec_core::num::special::{factorial, gamma};
use lspec_core::specpowers::*;
use lspec_core::{Error, C64};
use proptest::prelude::*;
use std::f64::consts::PI;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm()
}

#[test]
fn pochhammer_matches_gamma_ratio() {
    for &a in &[c(0.3, 0.2), c(2.5, -1.0), c(-1.7, 0.4)] {
        for m in 0..5 {
            let g = gamma(a + m as f64) / gamma(a);
            assert!(rel(pochhammer_factor(a, m), g) < 1e-12);
        }
    }
}

#[test]
fn term_matches_elementary_family() {
    // Independent assembly from F_{α+m−1} and Γ.
    let pd = PowerDiagonal::new(4, 0.6, 0.2, Regulator::Minus, vec![1.0, 0.7, -0.3]).unwrap();
    let a = c(2.6, 0.3);
    for m in 0..3 {
        let f = fa_diag(a + m as f64 - 1.0, pd.z0(), 4, EvalMode::Value).unwrap().analytic_part;
        let expect = pd.u[m] * pochhammer_factor(a, m as u32) / gamma(a + m as f64) * f;
        assert!(rel(pd.term(a, m), expect) < 1e-12);
    }
}

fn residue_formula(pd: &PowerDiagonal, m: usize) -> C64 {
    // ±i u_m / (2ⁿ π^{n/2} (n/2 − m − 1)!) at α = n/2 − m, up to the z₀ powers of the other terms.
    let h = pd.n / 2;
    pd.wick() * pd.u[m] / (2f64.powi(pd.n as i32) * PI.powi(h as i32) * factorial(h - m as u32 - 1))
}

#[test]
fn residues_of_complex_power() {
    let u = vec![1.0, -0.8, 0.25];
    for reg in [Regulator::Minus, Regulator::Plus] {
        let pd = PowerDiagonal::new(4, 0.0, 0.1, reg, u.clone()).unwrap();
        let r2 = cpower_residue_circle(&pd, 2.0);
        assert!(rel(r2, residue_formula(&pd, 0)) < 1e-8);
        // At α = 1 the u₀ term contributes ±i z₀/(16π²) on top of the u₁ term.
        let r1 = cpower_residue_circle(&pd, 1.0);
        let expect = residue_formula(&pd, 1) + pd.wick() * pd.z0() * u[0] / (16.0 * PI * PI);
        assert!(rel(r1, expect) < 1e-8, "{r1} vs {expect}");
        for a0 in [0.0, -1.0] {
            assert!(cpower_residue_circle(&pd, a0).norm() < 1e-10);
            assert_eq!(pd.residue_analytic(a0 as i64), c(0.0, 0.0));
        }
        for a0 in [1i64, 2] {
            let circ = cpower_residue_circle(&pd, a0 as f64);
            assert!(rel(pd.residue_analytic(a0), circ) < 1e-8);
        }
    }
}

#[test]
fn residue_at_one_with_mass() {
    // Res_{α=1} (P − iε)^{−α} = i(u₁ − m² + iε)/(16π²).
    let pd = PowerDiagonal::new(4, 0.5, 0.1, Regulator::Minus, vec![1.0, 0.4]).unwrap();
    let expect = C64::i() * (c(0.4 - 0.25, 0.1)) / (16.0 * PI * PI);
    assert!(rel(pd.residue_analytic(1), expect) < 1e-12);
    assert!(rel(cpower_residue_circle(&pd, 1.0), expect) < 1e-8);
}

#[test]
fn cpower_pole_modes() {
    let pd = PowerDiagonal::new(4, 0.3, 0.1, Regulator::Minus, vec![1.0, 0.2]).unwrap();
    assert!(matches!(cpower_diag(&pd, c(2.0, 0.0), EvalMode::Value), Err(Error::Pole(_))));
    let l = cpower_diag(&pd, c(2.0, 0.0), EvalMode::Laurent).unwrap();
    assert_eq!(l.pole_order, 1);
    // The finite part is the limit of f(α) − Res/(α − 2).
    let d = 1e-5;
    let near = pd.eval(c(2.0 + d, 0.0)) - l.residue / d;
    assert!((near - l.analytic_part).norm() < 1e-3 * l.analytic_part.norm().max(1e-3));
    // α = 0 is regular: (P − iε)^0 has diagonal value 0 in this expansion.
    let z = cpower_diag(&pd, c(0.0, 0.0), EvalMode::Value).unwrap();
    assert_eq!(z.pole_order, 0);
}

#[test]
fn gamma_weighted_residues_match_circle() {
    let pd = PowerDiagonal::new(6, 0.4, 0.2, Regulator::Plus, vec![1.0, 0.3, -0.5]).unwrap();
    for k in 0..3 {
        let a = gamma_weighted_residues(&pd, k).unwrap();
        let b = gamma_weighted_residue_circle(&pd, k);
        assert!(rel(a, b) < 1e-8, "k={k}: {a} vs {b}");
    }
    let pd4 = PowerDiagonal::new(4, 0.4, 0.2, Regulator::Minus, vec![1.0, 0.3, -0.5]).unwrap();
    for k in 0..2 {
        let a = gamma_weighted_residues(&pd4, k).unwrap();
        let b = gamma_weighted_residue_circle(&pd4, k);
        assert!(rel(a, b) < 1e-8);
    }
    assert!(matches!(gamma_weighted_residues(&pd4, 2), Err(Error::Dimension(_))));
}

#[test]
fn profile_parsing_and_moments() {
    let p = SchwartzProfile::parse("bump:1:0.5").unwrap();
    assert_eq!(p.support(), (0.5, 1.5));
    assert!(SchwartzProfile::parse("bump:0.2:0.5").is_err());
    assert!(SchwartzProfile::parse("gauss:1:1").is_err());
    // Moment by an independent composite Gauss rule.
    let g = quad::composite_gl(&|t: f64| c(p.fhat(t) * t.powf(-2.0), 0.0), 0.5, 1.5, 200, 20).re;
    assert!((ck_coefficient(&p, 4, 0) - g).abs() < 1e-12 * g.abs());
    let g1 = quad::composite_gl(&|t: f64| c(p.fhat(t) / t, 0.0), 0.5, 1.5, 200, 20).re;
    assert!((ck_coefficient(&p, 4, 1) - g1).abs() < 1e-12 * g1.abs());
    // Ratios: c_{k+1}/c_k lies in [1/1.5, 1/0.5] for support [0.5, 1.5].
    for k in 0..2 {
        let r = ck_coefficient(&p, 4, k + 1) / ck_coefficient(&p, 4, k);
        assert!((0.5..=1.5).contains(&r));
    }
}

/// Flat-space kernel by direct t-quadrature:
/// f((P+iε)/Λ²)(x,x) = iΛ⁴/(16π²) ∫ f̂(t) t^{−2} e^{it(m²+iε)/Λ²} dt.
fn flat_kernel(p: &SchwartzProfile, mass: f64, eps: f64, lambda: f64) -> C64 {
    let l2 = lambda * lambda;
    let (a, b) = p.support();
    let v = quad::composite_gl(
        &|t: f64| p.fhat(t) * t.powi(-2) * (C64::i() * t * c(mass * mass, eps) / l2).exp(),
        a,
        b,
        200,
        20,
    );
    C64::i() * l2 * l2 / (16.0 * PI * PI) * v
}

#[test]
fn mellin_route_matches_flat_kernel() {
    let p = SchwartzProfile::bump(1.0, 0.5).unwrap();
    for &(mass, eps, lambda) in &[(0.0, 1e-2, 10.0), (0.5, 0.1, 4.0), (0.0, 1e-2, 40.0)] {
        let pd = PowerDiagonal::new(4, mass, eps, Regulator::Plus, vec![1.0]).unwrap();
        let m = f_of_operator_diag(&pd, &p, lambda, 2.25).unwrap();
        let o = flat_kernel(&p, mass, eps, lambda);
        assert!(rel(m, o) < 1e-8, "Λ={lambda}: {m} vs {o}");
    }
}

#[test]
fn expansion_matches_flat_kernel() {
    let p = SchwartzProfile::bump(1.0, 0.5).unwrap();
    let lambda = 30.0;
    let e = predicted_expansion(&p, 4, 0.3, 0.05, 0.0, 0.0, lambda).unwrap();
    let o = flat_kernel(&p, 0.3, 0.05, lambda);
    // Remainder is O(Λ^{−2}) relative to the Λ⁰ term.
    assert!((e.value - o).norm() < 1e-3 * e.coeffs[2].norm() + 1e-12 * o.norm());
    // Leading phase: e^{iπ}c_0/(i·16π²).
    let c0 = ck_coefficient(&p, 4, 0);
    assert!(rel(e.coeffs[0], c(0.0, c0 / (16.0 * PI * PI))) < 1e-14);
}

#[test]
fn mellin_rejects_bad_input() {
    let p = SchwartzProfile::bump(1.0, 0.5).unwrap();
    let pd = PowerDiagonal::new(4, 0.0, 0.01, Regulator::Minus, vec![1.0]).unwrap();
    assert!(f_of_operator_diag(&pd, &p, 10.0, 2.25).is_err());
    let pd = PowerDiagonal::new(4, 0.0, 0.01, Regulator::Plus, vec![1.0]).unwrap();
    assert!(f_of_operator_diag(&pd, &p, 10.0, 1.5).is_err());
    assert!(PowerDiagonal::new(3, 0.0, 0.01, Regulator::Plus, vec![1.0]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn residues_vanish_below_one(u1 in -2.0f64..2.0, u2 in -2.0f64..2.0, mass in 0.0f64..1.0, eps in 0.01f64..1.0) {
        let pd = PowerDiagonal::new(4, mass, eps, Regulator::Minus, vec![1.0, u1, u2]).unwrap();
        for a0 in [0.0, -1.0, -2.0] {
            prop_assert!(cpower_residue_circle(&pd, a0).norm() < 1e-10);
        }
    }

    #[test]
    fn regulators_conjugate(a in 0.2f64..3.0, u1 in -2.0f64..2.0, mass in 0.0f64..1.0, eps in 0.01f64..1.0) {
        // For real u and real α, (P + iε)^{−α} is the conjugate of (P − iε)^{−α}.
        let m = PowerDiagonal::new(4, mass, eps, Regulator::Minus, vec![1.0, u1]).unwrap();
        let p = PowerDiagonal::new(4, mass, eps, Regulator::Plus, vec![1.0, u1]).unwrap();
        let x = c(a + 0.013, 0.0);
        prop_assert!((m.eval(x).conj() - p.eval(x)).norm() <= 1e-12 * m.eval(x).norm());
    }
}
