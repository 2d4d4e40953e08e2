use lspec_core::geomkit::MetricField;
use lspec_core::scflow::*;
use lspec_core::Error;
use proptest::prelude::*;

fn mink() -> MetricField {
    MetricField::minkowski(4).unwrap()
}

fn null(future: bool, dir: [f64; 3]) -> Vec<f64> {
    let r = (dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]).sqrt();
    let t = if future { 1.0 } else { -1.0 };
    let s = 1.0 / 2f64.sqrt();
    vec![t * s, s * dir[0] / r, s * dir[1] / r, s * dir[2] / r]
}

#[test]
fn minkowski_ray_is_straight_and_captured() {
    let m = mink();
    let x0 = vec![0.3, -0.2, 0.5, 0.1];
    let xi = null(true, [1.0, 2.0, -0.5]);
    let p = ScPhasePoint::new(x0.clone(), xi.clone()).unwrap();
    let r = hamilton_step(&m, &p, FlowDirection::Forward, &FlowOptions::default()).unwrap();
    // Straight-line oracle: x(s) = x0 − 2s η^{−1}ξ, η^{−1}ξ = (ξ₀, −ξ').
    let v = [-2.0 * xi[0], 2.0 * xi[1], 2.0 * xi[2], 2.0 * xi[3]];
    let vn = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    for smp in r.samples.iter().step_by(7) {
        let rho = smp.rho;
        let radius = (1.0 / (rho * rho) - 1.0).max(0.0).sqrt();
        let x: Vec<f64> = smp.base.iter().map(|b| b * radius).collect();
        // Distance of x from the line through x0 along v.
        let d: Vec<f64> = x.iter().zip(&x0).map(|(a, b)| a - b).collect();
        let along: f64 = d.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>() / vn;
        let perp2 = d.iter().map(|a| a * a).sum::<f64>() - along * along;
        assert!(perp2.max(0.0).sqrt() < 1e-7 * (1.0 + radius), "off the line by {}", perp2.sqrt());
        assert!(along >= -1e-9, "ray runs backwards");
    }
    // ξ is constant on flat space.
    for smp in &r.samples {
        for (a, b) in smp.fiber.iter().zip(&xi) {
            assert!((a - b).abs() < 1e-12);
        }
    }
    // v⁰ = −2ξ₀ < 0: forward flow runs to the past.
    assert_eq!(r.terminal, Terminal::ReachedLMinus);
    assert!(r.closest_minus < 1e-3);
    assert!(r.max_abs_p0 < 1e-6);
}

#[test]
fn reversal_swaps_terminal_sets() {
    let m = mink();
    for future in [true, false] {
        let p = ScPhasePoint::new(vec![1.0, 0.0, -1.0, 0.5], null(future, [0.2, -1.0, 0.4])).unwrap();
        let f = hamilton_step(&m, &p, FlowDirection::Forward, &FlowOptions::default()).unwrap();
        let b = hamilton_step(&m, &p, FlowDirection::Backward, &FlowOptions::default()).unwrap();
        let swap = |t: Terminal| match t {
            Terminal::ReachedLPlus => Terminal::ReachedLMinus,
            Terminal::ReachedLMinus => Terminal::ReachedLPlus,
            t => t,
        };
        assert_eq!(f.terminal, swap(b.terminal));
        assert!(matches!(f.terminal, Terminal::ReachedLPlus | Terminal::ReachedLMinus));
    }
}

#[test]
fn fiber_scaling_does_not_change_the_curve() {
    let m = MetricField::index_bump(4, 1.0, 1.0).unwrap();
    let x = vec![0.0, 0.4, 0.3, -0.2];
    let xi = null_covector(&m, &x, &[0.6, 0.0, 0.8], true).unwrap();
    let xi2: Vec<f64> = xi.iter().map(|a| 2.0 * a).collect();
    let opts = FlowOptions::default();
    let a = hamilton_step(&m, &ScPhasePoint::new(x.clone(), xi).unwrap(), FlowDirection::Forward, &opts).unwrap();
    let b = hamilton_step(&m, &ScPhasePoint::new(x, xi2).unwrap(), FlowDirection::Forward, &opts).unwrap();
    let last_a = a.samples.last().unwrap();
    let last_b = b.samples.last().unwrap();
    assert_eq!(a.terminal, b.terminal);
    // Compare the fiber direction at matching ρ along both runs.
    for sa in a.samples.iter().step_by(5) {
        let sb = b.samples.iter().min_by(|p, q| (p.rho - sa.rho).abs().partial_cmp(&(q.rho - sa.rho).abs()).unwrap()).unwrap();
        if (sb.rho - sa.rho).abs() < 1e-12 * sa.rho.max(1e-300) || sa.sigma == 0.0 {
            for (u, v) in sa.fiber.iter().zip(&sb.fiber) {
                assert!((u - v).abs() < 1e-8);
            }
        }
    }
    for (u, v) in last_a.fiber.iter().zip(&last_b.fiber) {
        assert!((u - v).abs() < 1e-8);
    }
}

#[test]
fn time_translation_equivariance() {
    let m = mink();
    let xi = null(false, [1.0, 0.0, 1.0]);
    let opts = FlowOptions::default();
    let a = hamilton_step(&m, &ScPhasePoint::new(vec![0.0, 0.5, 0.5, 0.0], xi.clone()).unwrap(), FlowDirection::Forward, &opts).unwrap();
    let b = hamilton_step(&m, &ScPhasePoint::new(vec![3.0, 0.5, 0.5, 0.0], xi).unwrap(), FlowDirection::Forward, &opts).unwrap();
    assert_eq!(a.terminal, b.terminal);
    // The limit points over infinity agree.
    let (la, lb) = (a.samples.last().unwrap(), b.samples.last().unwrap());
    for (u, v) in la.base.iter().zip(&lb.base) {
        assert!((u - v).abs() < 2e-3);
    }
}

#[test]
fn characteristic_set_is_preserved_on_the_bump() {
    let m = MetricField::index_bump(4, 1.0, 1.0).unwrap();
    let x = vec![0.0, -0.5, 0.2, 0.1];
    let xi = null_covector(&m, &x, &[0.0, 1.0, 0.0], false).unwrap();
    let r = hamilton_step(&m, &ScPhasePoint::new(x, xi).unwrap(), FlowDirection::Forward, &FlowOptions::default()).unwrap();
    assert!(r.max_abs_p0 < 1e-6, "{}", r.max_abs_p0);
}

#[test]
fn rejects_non_characteristic_points_and_foreign_metrics() {
    let m = mink();
    let p = ScPhasePoint::new(vec![0.0; 4], vec![1.0, 0.0, 0.0, 0.0]).unwrap();
    assert!(matches!(hamilton_step(&m, &p, FlowDirection::Forward, &FlowOptions::default()), Err(Error::Characteristic(_))));
    let s = MetricField::ultrastatic_sphere(4, 1.0).unwrap();
    let q = ScPhasePoint::new(s.default_point(), null(true, [1.0, 0.0, 0.0])).unwrap();
    assert!(matches!(hamilton_step(&s, &q, FlowDirection::Forward, &FlowOptions::default()), Err(Error::Domain(_))));
    assert!(ScPhasePoint::new(vec![0.0; 4], vec![0.0; 4]).is_err());
    assert!(ScPhasePoint::new(vec![0.0; 3], vec![1.0; 4]).is_err());
}

#[test]
fn compactified_coordinates() {
    let p = ScPhasePoint::new(vec![3.0, 0.0, 4.0, 0.0], vec![0.0, 2.0, 0.0, 0.0]).unwrap();
    assert!((p.rho() - 1.0 / 26f64.sqrt()).abs() < 1e-15);
    assert_eq!(p.base_dir(), vec![0.6, 0.0, 0.8, 0.0]);
    assert_eq!(p.fiber_dir(), vec![0.0, 1.0, 0.0, 0.0]);
    assert!((p.fiber_scale() - 1.0 / 5f64.sqrt()).abs() < 1e-15);
}

#[test]
fn minkowski_certificate_passes() {
    let r = nontrapping_certificate(&mink(), 100, 7, 2.0, &FlowOptions::default()).unwrap();
    assert_eq!(r.classified, 100);
    assert!(r.pass);
    assert!(r.worst_closest_approach < 1e-3);
    // Both time orientations occur.
    assert!(r.outcomes.iter().any(|o| o.forward == Some(Terminal::ReachedLPlus)));
    assert!(r.outcomes.iter().any(|o| o.forward == Some(Terminal::ReachedLMinus)));
    // Same seed, same samples.
    let again = nontrapping_certificate(&mink(), 100, 7, 2.0, &FlowOptions::default()).unwrap();
    assert_eq!(r, again);
}

#[test]
fn empty_certificate_is_trivial() {
    let r = nontrapping_certificate(&mink(), 0, 1, 2.0, &FlowOptions::default()).unwrap();
    assert!(r.pass);
    assert!(r.outcomes.is_empty());
}

#[test]
fn trapping_bump_fails_the_certificate() {
    // r·n(r) with n = 1 + 4e^{−r²} has a local maximum and minimum, so rays
    // with angular momentum between the two values stay in a ball and only
    // wind around it, exhausting the step budget.
    let m = MetricField::index_bump(4, 4.0, 1.0).unwrap();
    let r = nontrapping_certificate(&m, 40, 3, 1.5, &FlowOptions::default()).unwrap();
    assert!(!r.pass);
    let trapped = r
        .outcomes
        .iter()
        .filter(|o| o.forward == Some(Terminal::BudgetExhausted) || o.backward == Some(Terminal::BudgetExhausted))
        .count();
    assert!(trapped > 0);
    // A circular orbit started inside the well.
    let x = vec![0.0, 1.0, 0.0, 0.0];
    let xi = null_covector(&m, &x, &[0.0, 1.0, 0.0], true).unwrap();
    let f = hamilton_step(&m, &ScPhasePoint::new(x, xi).unwrap(), FlowDirection::Forward, &FlowOptions::default()).unwrap();
    assert_eq!(f.terminal, Terminal::BudgetExhausted);
    assert!(f.samples.last().unwrap().rho > 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn minkowski_rays_connect_the_radial_sets(
        x in prop::array::uniform4(-3.0f64..3.0),
        d in prop::array::uniform3(-1.0f64..1.0),
        future in any::<bool>(),
    ) {
        prop_assume!(d.iter().map(|a| a * a).sum::<f64>() > 1e-2);
        let p = ScPhasePoint::new(x.to_vec(), null(future, d)).unwrap();
        let f = hamilton_step(&mink(), &p, FlowDirection::Forward, &FlowOptions::default()).unwrap();
        let b = hamilton_step(&mink(), &p, FlowDirection::Backward, &FlowOptions::default()).unwrap();
        let expect = if future { Terminal::ReachedLMinus } else { Terminal::ReachedLPlus };
        prop_assert_eq!(f.terminal, expect);
        prop_assert_ne!(b.terminal, expect);
        prop_assert!(f.max_abs_p0 < 1e-6);
    }
}

#[test]
fn negated_covector_reverses_the_flow() {
    let r = nontrapping_certificate(&mink(), 12, 11, 2.0, &FlowOptions::default()).unwrap();
    for o in &r.outcomes {
        assert!(reversal_swaps(&mink(), o, &FlowOptions::default()).unwrap());
    }
}
