use lspec_core::elemfam::*;
use lspec_core::num::special::{factorial, gamma};
use lspec_core::num::{cpow, quad};
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
fn euclid_residues_match_closed_form() {
    for &z in &[c(-1.0, 0.0), c(-1.0, 2.0)] {
        for k in 1..=2u32 {
            let j = 2 - k;
            let expect = cpow(z, c(j as f64, 0.0)) * PI * PI / (factorial(j) * gamma(c(k as f64, 0.0)));
            let v = euclid_integral(c(k as f64, 0.0), z, 4).unwrap();
            assert_eq!(v.pole_order, 1);
            assert!(rel(v.residue, expect) < 1e-12);
            // Independent: trapezoid on a circle around the pole using off-pole values.
            let r = circle_residue(|a| euclid_integral(a, z, 4).unwrap().analytic_part, c(k as f64, 0.0), 1e-3, 64);
            assert!(rel(r, expect) < 1e-8, "k={k} z={z}: {r} vs {expect}");
        }
    }
}

#[test]
fn euclid_matches_split_series() {
    for &(a, z) in &[(c(2.7, 0.0), c(-1.0, 0.5)), (c(0.3, 1.0), c(-2.0, -1.0)), (c(3.5, -0.2), c(-0.5, 0.0))] {
        let closed = euclid_integral(a, z, 4).unwrap().analytic_part;
        let series = euclid_split_series(a, z, 4).unwrap();
        assert!(rel(closed, series) < 1e-10, "{closed} vs {series}");
    }
}

#[test]
fn euclid_convergent_region_matches_radial_integral() {
    // ∫_{ℝ⁴}(‖ξ‖²+1)^{−3} dξ = 2π² ∫ r³ (r²+1)^{−3} dr = π²/2.
    let v = euclid_integral(c(3.0, 0.0), c(-1.0, 0.0), 4).unwrap().analytic_part;
    let f = |t: f64| {
        // r = t/(1−t)
        let r = t / (1.0 - t);
        c(2.0 * PI * PI * r.powi(3) / (r * r + 1.0).powi(3) / (1.0 - t).powi(2), 0.0)
    };
    let num = quad::adaptive(&f, 0.0, 1.0, 1e-14, 1e-13, 2000).unwrap().value;
    assert!(rel(v, num) < 1e-10);
    assert!((v.re - PI * PI / 2.0).abs() < 1e-12);
}

#[test]
fn euclid_rejects_cut() {
    assert!(matches!(euclid_integral(c(2.5, 0.0), c(1.0, 0.0), 4), Err(Error::Branch(_))));
    assert!(matches!(euclid_integral(c(2.5, 0.0), c(-1.0, 0.0), 3), Err(Error::Dimension(_))));
}

#[test]
fn diagonal_example_value() {
    // n = 4, α = 2, z = i: i(4π)^{−2}Γ(1)(−i)^{−1} = −1/(16π²).
    let v = fa_diag(c(2.0, 0.0), c(0.0, 1.0), 4, EvalMode::Value).unwrap();
    assert!((v.analytic_part - c(-1.0 / (16.0 * PI * PI), 0.0)).norm() < 1e-15);
}

#[test]
fn diagonal_poles() {
    let z = c(0.3, 1.1);
    assert!(matches!(fa_diag(c(1.0, 0.0), z, 4, EvalMode::Value), Err(Error::Pole(_))));
    for j in 0..3u32 {
        let a0 = 1.0 - j as f64;
        let v = fa_diag(c(a0, 0.0), z, 4, EvalMode::Laurent).unwrap();
        let r = circle_residue(|a| fa_diag(a, z, 4, EvalMode::Value).unwrap().analytic_part, c(a0, 0.0), 1e-3, 64);
        assert!(rel(v.residue, r) < 1e-9);
        let expect = c(0.0, 1.0) / (16.0 * PI * PI) * cpow(z, c(j as f64, 0.0)) / factorial(j);
        assert!(rel(v.residue, expect) < 1e-12);
    }
}

#[test]
fn diagonal_wick_sign_flips_below_axis() {
    let a = c(2.5, 0.0);
    let up = fa_diag(a, c(-1.0, 1e-9), 4, EvalMode::Value).unwrap().analytic_part;
    let dn = fa_diag(a, c(-1.0, -1e-9), 4, EvalMode::Value).unwrap().analytic_part;
    assert!((up + dn).norm() < 1e-8 * up.norm());
}

/// Schwinger integral along an independent ray by adaptive quadrature.
fn schwinger_oracle(alpha: C64, z: C64, q: f64, n: u32) -> C64 {
    let h = n as f64 / 2.0;
    let phi = if q > 0.0 { -0.25 * z.arg() } else { 0.25 * (PI - z.arg()) };
    let rot = C64::from_polar(1.0, phi);
    let s = alpha - h + 1.0;
    let f = |t: f64| {
        let u = rot * t.exp();
        cpow(u, s) * (C64::i() * u * z + C64::i() * q / (4.0 * u)).exp()
    };
    let mut total = C64::new(0.0, 0.0);
    for k in -40..40 {
        total += quad::adaptive(&f, k as f64, k as f64 + 1.0, 1e-18, 1e-13, 5000).unwrap().value;
    }
    (4.0 * PI).powf(-h) * (C64::i() * PI / 2.0 * (alpha + 1.0)).exp() * C64::from_polar(1.0, -PI * (n as f64 - 2.0) / 4.0) * total
}

#[test]
fn offdiag_matches_independent_ray() {
    for &(a, z, q) in &[
        (c(2.0, 0.0), c(0.0, 2.0), 0.7),
        (c(3.5, 0.0), c(1.0, 2.0), -0.4),
        (c(1.3, 0.4), c(-1.0, 0.5), 2.0),
        (c(0.5, 0.0), c(2.0, 1.0), -3.0),
    ] {
        let v = fa_offdiag(a, z, q, 4).unwrap();
        let o = schwinger_oracle(a, z, q, 4);
        assert!(rel(v.value, o) < 1e-10, "{a} {z} {q}: {} vs {o}", v.value);
        assert!(rel(v.ir + v.uv, v.value) < 1e-14);
    }
}

#[test]
fn offdiag_tends_to_diagonal() {
    // Re α > n/2 − 1 so the diagonal is continuous.
    let a = c(2.5, 0.0);
    let z = c(0.5, 1.5);
    let d = fa_diag(a, z, 4, EvalMode::Value).unwrap().analytic_part;
    let v = fa_offdiag(a, z, 1e-8, 4).unwrap().value;
    assert!(rel(v, d) < 1e-6, "{v} vs {d}");
}

#[test]
fn offdiag_domain_errors() {
    assert!(matches!(fa_offdiag(c(2.0, 0.0), c(1.0, -1.0), 1.0, 4), Err(Error::Domain(_))));
    assert!(matches!(fa_offdiag(c(2.0, 0.0), c(1.0, 1.0), 0.0, 4), Err(Error::Domain(_))));
}

fn spacelike_grid() -> Vec<Vec<f64>> {
    vec![
        vec![0.1, 0.8, 0.2, -0.3],
        vec![-0.2, 0.5, 0.6, 0.1],
        vec![0.3, -0.4, 0.7, 0.9],
        vec![0.0, 1.0, 0.0, 0.0],
    ]
}

#[test]
fn pde_identity_holds() {
    for &a in &[2.0, 3.5] {
        for &z in &[c(0.0, 2.0), c(1.0, 2.0)] {
            let r = pde_check(c(a, 0.0), z, &spacelike_grid(), 4, 1e-2).unwrap();
            assert!(r.relative < 1e-3, "α={a} z={z}: {}", r.relative);
            assert!(r.gradient_residual < 1e-5 * r.gradient_scale.max(1e-30));
        }
    }
}

#[test]
fn pde_identity_timelike() {
    let grid = vec![vec![0.9, 0.2, 0.1, 0.3], vec![-1.2, 0.3, 0.0, 0.4]];
    let r = pde_check(c(2.5, 0.0), c(0.5, 1.0), &grid, 4, 1e-2).unwrap();
    assert!(r.relative < 1e-3);
}

#[test]
fn pde_rejects_light_cone() {
    let grid = vec![vec![1.0, 1.0, 0.0, 0.0]];
    assert!(matches!(pde_check(c(2.0, 0.0), c(0.0, 1.0), &grid, 4, 1e-2), Err(Error::Domain(_))));
}

#[test]
fn bernstein_functional_equation() {
    for &(a, z) in &[(c(0.0, 0.0), c(0.0, 2.0)), (c(1.5, 0.0), c(1.0, 1.0)), (c(2.2, 0.3), c(-0.5, 1.5))] {
        let r = bernstein_check(a, z, &[0.2, 0.7, -0.3, 0.4], 4).unwrap();
        assert_eq!(r.status, BernsteinStatus::Checked);
        assert!(r.relative < 1e-5, "α={a}: {}", r.relative);
    }
    let r = bernstein_check(c(-2.0, 0.0), c(0.0, 2.0), &[0.2, 0.7, -0.3, 0.4], 4).unwrap();
    assert_eq!(r.status, BernsteinStatus::Degenerate);
}

#[test]
fn other_dimensions() {
    // n = 2 and n = 6 diagonal values against the Schwinger integral at tiny q.
    for &n in &[2u32, 6] {
        let a = c(n as f64 / 2.0 + 0.4, 0.0);
        let z = c(0.3, 1.0);
        let d = fa_diag(a, z, n, EvalMode::Value).unwrap().analytic_part;
        let v = fa_offdiag(a, z, 1e-9, n).unwrap().value;
        assert!(rel(v, d) < 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gradient_identity(a in 1.0f64..4.0, zr in -2.0f64..2.0, zi in 0.3f64..3.0, x1 in 0.5f64..1.5, x0 in -0.3f64..0.3) {
        let z = c(zr, zi);
        let x = [x0, x1, 0.2, -0.1];
        let f = |y: &[f64]| fa_at(c(a, 0.0), z, y, 4);
        let lower = fa_at(c(a - 1.0, 0.0), z, &x, 4).unwrap();
        for mu in 0..4 {
            let g = grad_fd(&f, &x, mu, 1e-3).unwrap() * 2.0;
            let eta_x = if mu == 0 { x[0] } else { -x[mu] };
            prop_assert!((g - lower * eta_x).norm() <= 1e-6 * lower.norm().max(1e-30) + 1e-12);
        }
    }

    #[test]
    fn q_derivative_lowers_alpha(a in 1.0f64..4.0, zi in 0.3f64..3.0, q in 0.2f64..2.0) {
        // dF_α/dq = −F_{α−1}/4 in the Schwinger form (i/(4u) · e^{iπ/2} shift).
        let z = c(0.4, zi);
        let h = 1e-4;
        let d = (fa_offdiag(c(a, 0.0), z, q + h, 4).unwrap().value - fa_offdiag(c(a, 0.0), z, q - h, 4).unwrap().value) / (2.0 * h);
        let lower = fa_offdiag(c(a - 1.0, 0.0), z, q, 4).unwrap().value;
        prop_assert!((d + lower / 4.0).norm() <= 1e-6 * lower.norm());
    }
}

#[test]
fn offdiag_converges_near_the_real_axis() {
    // Small arg z leaves a narrow decay window and a strongly cancelling sum.
    let z = c(1.641842373072947, 0.5592096575353621);
    let a = c(3.6499018663678857, 0.0);
    for q in [0.6522630604600724, -0.6522630604600724] {
        let v = fa_offdiag(a, z, q, 4).unwrap().value;
        let o = schwinger_oracle(a, z, q, 4);
        assert!(rel(v, o) < 1e-9, "{q}: {v} vs {o}");
    }
}
