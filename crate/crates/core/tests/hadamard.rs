use lspec_core::geomkit::*;
use lspec_core::hadamard::*;
use lspec_core::Error;
use std::sync::OnceLock;

fn sphere() -> MetricField {
    MetricField::ultrastatic_sphere(4, 1.0).unwrap()
}

fn sphere_seq() -> &'static HadamardSequence {
    static SEQ: OnceLock<HadamardSequence> = OnceLock::new();
    SEQ.get_or_init(|| {
        let m = sphere();
        let chart = normal_chart(&m, &m.default_point()).unwrap();
        hadamard_sequence(&chart, 2).unwrap()
    })
}

#[test]
fn sphere_u1_is_minus_r_over_six() {
    let m = sphere();
    let r = curvature(&m, &m.default_point()).unwrap().scalar;
    let seq = sphere_seq();
    assert_eq!(seq.diag[0], 1.0);
    assert!((seq.diag[1] + r / 6.0).abs() <= 1e-3 * r.abs().max(1.0));
}

#[test]
fn sphere_u2_matches_heat_kernel_of_s3() {
    // On the unit S³ the heat kernel diagonal is (4πt)^{−3/2}e^{t} up to
    // exponentially small terms, so the coefficients are 1/k!; the static
    // factor ℝ contributes nothing.
    let seq = sphere_seq();
    assert!((seq.diag[2] - 0.5).abs() < 1e-4, "{}", seq.diag[2]);
}

#[test]
fn sphere_residuals_and_direction_independence() {
    let seq = sphere_seq();
    assert_eq!(seq.directions.len(), 24);
    for (k, r) in seq.residuals.iter().enumerate() {
        assert!(*r <= 1e-3, "k={}: {r}", k + 1);
    }
    for s in &seq.direction_spread {
        assert!(*s <= 1e-3);
    }
}

#[test]
fn u0_closed_form_and_normalization() {
    let m = sphere();
    let x = m.default_point();
    let chart = normal_chart(&m, &x).unwrap();
    assert_eq!(u0(&chart, &[0.0; 4]).unwrap(), 1.0);
    let curv = curvature(&m, &x).unwrap();
    let e = &chart.frame.vectors;
    let y = [4e-3, 5e-3, -6e-3, 3e-3];
    let mut q = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            let mut ric = 0.0;
            for c in 0..4 {
                for d in 0..4 {
                    ric += curv.ric(c, d) * e[(c, a)] * e[(d, b)];
                }
            }
            q += ric * y[a] * y[b];
        }
    }
    let v = u0(&chart, &y).unwrap();
    assert!((v - (1.0 + q / 12.0)).abs() < 1e-5 * 1e-2);
    // Grid invariant: u_0 |g̃|^{1/4} = 1.
    let seq = sphere_seq();
    for (u, d) in seq.values[0].iter().zip(&seq.dens_quarter) {
        assert!((u * d - 1.0).abs() < 1e-8);
    }
}

#[test]
fn h_function_matches_divergence_form() {
    let seq = sphere_seq();
    let chart = &seq.chart;
    for y in [[0.02, 0.03, -0.01, 0.04], [-0.05, 0.01, 0.02, -0.03], [0.0, 0.06, 0.0, 0.0]] {
        let h = h_function(chart, &y).unwrap();
        let b = seq.b_dot_y(&y);
        assert!((h - b).abs() < 1e-6, "{h} vs {b}");
    }
    assert_eq!(h_function(chart, &[0.0; 4]).unwrap(), 0.0);
}

#[test]
fn minkowski_coefficients_vanish() {
    let m = MetricField::minkowski(4).unwrap();
    let chart = normal_chart_with_radius(&m, &[0.0; 4], 0.5).unwrap();
    let seq = HadamardSequence::build(&chart, HadamardConfig { order: 3, cheb_nodes: 6, ..Default::default() }).unwrap();
    assert_eq!(seq.diag.len(), 4);
    assert_eq!(seq.diag[0], 1.0);
    for k in 1..4 {
        assert!(seq.diag[k].abs() < 1e-8, "k={k}: {}", seq.diag[k]);
    }
    let seq0 = HadamardSequence::build(&chart, HadamardConfig { order: 0, cheb_nodes: 6, ..Default::default() }).unwrap();
    assert_eq!(seq0.diag, vec![1.0]);
}

#[test]
fn expanding_u1() {
    let m = MetricField::expanding(4, 1.0).unwrap();
    let x = m.default_point();
    let r = curvature(&m, &x).unwrap().scalar;
    let chart = normal_chart(&m, &x).unwrap();
    let seq = hadamard_sequence(&chart, 1).unwrap();
    assert!((seq.diag[1] + r / 6.0).abs() <= 1e-3 * r.abs().max(1.0), "{} vs {}", seq.diag[1], -r / 6.0);
}

#[test]
fn bad_configurations() {
    let m = MetricField::minkowski(4).unwrap();
    let chart = normal_chart_with_radius(&m, &[0.0; 4], 0.5).unwrap();
    assert!(matches!(HadamardSequence::build(&chart, HadamardConfig { order: 4, ..Default::default() }), Err(Error::Domain(_))));
    assert!(matches!(HadamardSequence::build(&chart, HadamardConfig { cheb_nodes: 5, ..Default::default() }), Err(Error::Grid(_))));
    assert!(matches!(h_function(&chart, &[1.0, 0.0, 0.0, 0.0]), Err(Error::Domain(_))));
}
