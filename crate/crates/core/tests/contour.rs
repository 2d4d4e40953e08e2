use lspec_core::contour::*;
use lspec_core::elemfam::{fa_diag, EvalMode};
use lspec_core::num::cpow;
use lspec_core::num::special::gamma;
use lspec_core::specpowers::pochhammer_factor;
use lspec_core::{Error, C64};
use proptest::prelude::*;
use std::f64::consts::PI;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[test]
fn power_identity_grid() {
    for &a in &[1.5, 2.3, 3.7] {
        for k in 0..3 {
            for &eps in &[0.1, 1.0] {
                for reg in [Regulator::Minus, Regulator::Plus] {
                    let r = power_identity_check(c(a, 0.0), k, eps, 1.3, reg, PI / 4.0).unwrap();
                    assert!(r.rel_err < 1e-6, "α={a} k={k} ε={eps} {reg:?}: {}", r.rel_err);
                }
            }
        }
    }
}

#[test]
fn plus_regulator_example() {
    // α = 1.5, k = 0, ε = 1, λ = 2 gives (2 + i)^{−1.5}.
    let r = power_identity_check(c(1.5, 0.0), 0, 1.0, 2.0, Regulator::Plus, PI / 4.0).unwrap();
    let expect = cpow(c(2.0, 1.0), c(-1.5, 0.0));
    assert!((r.quadrature - expect).norm() < 1e-8 * expect.norm());
    // Hand value: |2+i|^{−1.5} e^{−1.5 i atan(1/2)}.
    let hand = C64::from_polar(5f64.powf(-0.75), -1.5 * 0.5f64.atan());
    assert!((expect - hand).norm() < 1e-14);
}

#[test]
fn negative_spectral_point() {
    // λ < 0 is where the branch of the regulated power matters most.
    for reg in [Regulator::Minus, Regulator::Plus] {
        let r = power_identity_check(c(2.3, 0.4), 1, 0.5, -2.0, reg, PI / 3.0).unwrap();
        assert!(r.rel_err < 1e-6, "{reg:?}: {}", r.rel_err);
    }
}

#[test]
fn theta_independence() {
    let a = power_identity_check(c(1.7, 0.0), 2, 0.3, 0.8, Regulator::Minus, 0.3).unwrap();
    let b = power_identity_check(c(1.7, 0.0), 2, 0.3, 0.8, Regulator::Minus, 1.2).unwrap();
    assert!((a.quadrature - b.quadrature).norm() < 1e-8 * a.quadrature.norm());
}

#[test]
fn simple_pole_residue_example() {
    // A circle around 3i picks up 2πi · Res 1/(3(z − 3i))… here via η_δ with f = z^{−1}/(z − λ).
    let lam = 3.0;
    let spec = ContourSpec::eta_delta(0.5);
    let r = quadrature(&|z: C64| cpow(z, c(-1.0, 0.0)) / (z - lam), &spec, 1.0).unwrap();
    let v = r.value / C64::new(0.0, 2.0 * PI);
    assert!((v - c(1.0 / lam, 0.0)).norm() < 1e-9);
}

#[test]
fn eta_delta_power() {
    // (1/2πi)∫_η z^{−α}(z − λ)^{−1} dz = λ^{−α}.
    for &(a, lam) in &[(0.5, 2.0), (1.3, 0.7), (2.5, 5.0)] {
        let spec = ContourSpec::eta_delta(lam / 4.0);
        let r = quadrature(&|z: C64| cpow(z, c(-a, 0.0)) / (z - lam), &spec, a).unwrap();
        let v = r.value / C64::new(0.0, 2.0 * PI);
        assert!((v.re - lam.powf(-a)).abs() < 1e-9 && v.im.abs() < 1e-9, "{v}");
    }
}

#[test]
fn gamma0_contour_on_decaying_function() {
    // ∫_{γ₀} z^{−2}·e^{...}: use (z + i)^{−2}, whose pole lies below γ₀; the integral is
    // [−(z+i)^{−1}] from ∞e^{i(π−θ)} to ∞e^{iθ} = 0.
    let r = quadrature(&|z: C64| (z + C64::i()).powi(-2), &ContourSpec::gamma_0(), 1.0).unwrap();
    assert!(r.value.norm() < 1e-9);
}

#[test]
fn tail_error_on_wrong_decay() {
    // f ~ |z|^{−1/2} is not integrable; any β > 0 overstates the decay.
    let r = quadrature(&|z: C64| cpow(z + C64::new(0.0, 2.0), c(-0.5, 0.0)), &ContourSpec::gamma_eps(0.5), 0.5);
    assert!(matches!(r, Err(Error::Tail(_))));
}

#[test]
fn invalid_contours() {
    assert!(matches!(
        quadrature(&|z: C64| z, &ContourSpec::gamma_eps(1.0).with_theta(2.0), 1.0),
        Err(Error::Domain(_))
    ));
    assert!(matches!(power_identity_check(c(-1.0, 0.0), 0, 1.0, 1.0, Regulator::Minus, 0.5), Err(Error::Domain(_))));
}

#[test]
fn contour_passes_below_its_centre() {
    let pts = ContourSpec::gamma_eps(1.0).sample(50, 10.0);
    let lowest = pts.iter().map(|z| z.im).fold(f64::INFINITY, f64::min);
    assert!((lowest - 0.5).abs() < 1e-3);
    let mirror = ContourSpec::for_regulator(1.0, Regulator::Plus).sample(50, 10.0);
    let highest = mirror.iter().map(|z| z.im).fold(f64::NEG_INFINITY, f64::max);
    assert!((highest + 0.5).abs() < 1e-3);
    // Mirror runs right to left.
    assert!(mirror.first().unwrap().re > mirror.last().unwrap().re);
}

#[test]
fn contour_power_of_elementary_family() {
    for reg in [Regulator::Minus, Regulator::Plus] {
        for &(a, k) in &[(1.5, 2u32), (2.2, 3), (1.8, 2), (3.0, 1)] {
            let r = fa_contour_power(c(a, 0.0), k, 0.3, 0.7, 4, reg, true).unwrap();
            assert!(r.gap.unwrap() < 1e-6, "α={a} k={k} {reg:?}: {:?}", r.gap);
            // Independent closed form.
            let z0 = c(-0.49, reg.sign() * 0.3);
            let expect = pochhammer_factor(c(a, 0.0), k) / gamma(c(a + k as f64, 0.0))
                * fa_diag(c(a + k as f64 - 1.0, 0.0), z0, 4, EvalMode::Value).unwrap().analytic_part;
            assert!((r.value.analytic_part - expect).norm() < 1e-12 * expect.norm());
        }
    }
}

#[test]
fn contour_power_with_pole_of_kernel() {
    // k = 1, n = 4: F_1(·, 0) sits on a pole; only its logarithm survives.
    let r = fa_contour_power(c(2.5, 0.0), 1, 0.4, 0.5, 4, Regulator::Minus, true).unwrap();
    assert!(r.gap.unwrap() < 1e-6, "{:?}", r.gap);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn power_identity_random(a in 1.1f64..4.0, k in 0u32..3, eps in 0.05f64..2.0, lam in -3.0f64..3.0) {
        for reg in [Regulator::Minus, Regulator::Plus] {
            let r = power_identity_check(c(a, 0.0), k, eps, lam, reg, PI / 4.0).unwrap();
            prop_assert!(r.rel_err < 1e-6);
        }
    }
}
