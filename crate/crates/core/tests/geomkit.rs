use lspec_core::geomkit::*;
use lspec_core::num::ode::OdeOptions;
use lspec_core::Error;
use lspec_oracles::curvature::ricci_scalar_fd;
use proptest::prelude::*;
use std::f64::consts::PI;

fn sphere() -> MetricField {
    MetricField::ultrastatic_sphere(4, 1.0).unwrap()
}

fn fd_scalar(m: &MetricField, x: &[f64]) -> (Vec<f64>, f64) {
    let g = |y: &[f64]| m.components(y);
    ricci_scalar_fd(&g, x, 1e-3, 1e-3)
}

#[test]
fn minkowski_is_flat() {
    let m = MetricField::minkowski(4).unwrap();
    let c = curvature(&m, &[0.3, -1.0, 2.0, 0.5]).unwrap();
    assert!(c.scalar.abs() < 1e-10);
    assert!(c.riemann.iter().all(|v| v.abs() < 1e-14));
}

#[test]
fn sphere_curvature_matches_fd_oracle() {
    let m = sphere();
    for x in [[0.0, 1.2, 1.1, 0.4], [0.3, PI / 2.0, PI / 2.0, 0.0], [-0.5, 0.7, 2.0, -2.0]] {
        let c = curvature(&m, &x).unwrap();
        let (ric, s) = fd_scalar(&m, &x);
        assert!((c.scalar - s).abs() < 1e-5, "{} vs {s}", c.scalar);
        assert!((c.scalar + 6.0).abs() < 1e-10);
        for i in 0..16 {
            assert!((c.ricci[i] - ric[i]).abs() < 1e-5);
        }
        assert!(c.symmetry_defect() < 1e-8);
    }
}

#[test]
fn sphere_radius_scaling() {
    let m = MetricField::ultrastatic_sphere(4, 2.0).unwrap();
    let c = curvature(&m, &[0.0, 1.0, 1.3, 0.2]).unwrap();
    assert!((c.scalar + 6.0 / 4.0).abs() < 1e-10);
}

#[test]
fn expanding_curvature_matches_fd_oracle() {
    let m = MetricField::expanding(4, 1.0).unwrap();
    let x = [0.0, 0.1, -0.2, 0.3];
    let c = curvature(&m, &x).unwrap();
    let (_, s) = fd_scalar(&m, &x);
    assert!((c.scalar - s).abs() < 1e-5);
    // de Sitter in flat slicing: R = −12H² in this signature.
    assert!((c.scalar + 12.0).abs() < 1e-10);
    assert!(c.symmetry_defect() < 1e-8);
}

#[test]
fn index_bump_curvature_matches_fd_oracle() {
    let m = MetricField::index_bump(4, 0.5, 1.0).unwrap();
    let x = [0.0, 0.4, -0.3, 0.2];
    let c = curvature(&m, &x).unwrap();
    let (_, s) = fd_scalar(&m, &x);
    assert!((c.scalar - s).abs() < 1e-5 * s.abs().max(1.0));
}

#[test]
fn signature_and_domain_errors() {
    let m = sphere();
    assert!(matches!(curvature(&m, &[0.0, 0.0, 1.0, 0.0]), Err(Error::Domain(_))));
    let mut g = nalgebra::DMatrix::identity(4, 4);
    g[(1, 1)] = 1.0;
    assert!(matches!(check_signature(&g), Err(Error::Signature(_))));
}

#[test]
fn exp_map_flat_is_translation() {
    let m = MetricField::minkowski(4).unwrap();
    let x = [0.1, 0.2, 0.3, 0.4];
    let v = [1.0, -2.0, 0.5, 3.0];
    let p = exp_map(&m, &x, &v, OdeOptions::default()).unwrap();
    for i in 0..4 {
        assert!((p[i] - x[i] - v[i]).abs() < 1e-12);
    }
}

#[test]
fn exp_map_sphere_arclength() {
    // Spatial geodesic with h(v, v) = ℓ²: arclength by trapezoid on the path.
    let m = sphere();
    let x = [0.0, 1.3, 1.2, 0.1];
    let v0 = [0.0, 0.3, 0.2, -0.25];
    let g = m.g(&x).unwrap();
    let vv = nalgebra::DVector::from_row_slice(&v0);
    let ell = (-(vv.transpose() * &g * &vv)[(0, 0)]).sqrt();
    let opts = OdeOptions { atol: 1e-12, rtol: 1e-12, h0: 1e-3, max_steps: 100_000 };
    let path = geodesic_path(&m, &x, &v0, opts).unwrap();
    // Dense resampling with a fixed step to make the arclength quadrature independent.
    let mut len = 0.0;
    for w in path.windows(2) {
        let mid: Vec<f64> = (0..4).map(|i| 0.5 * (w[0].x[i] + w[1].x[i])).collect();
        let gm = m.g(&mid).unwrap();
        let dx = nalgebra::DVector::from_iterator(4, (0..4).map(|i| w[1].x[i] - w[0].x[i]));
        len += (-(dx.transpose() * &gm * &dx)[(0, 0)]).sqrt();
    }
    // Midpoint chords converge at second order in the step; the steps are small.
    assert!((len - ell).abs() < 1e-4 * ell, "{len} vs {ell}");
    // Geodesic distance on S³: angle between base and endpoint unit vectors.
    let p = exp_map(&m, &x, &v0, opts).unwrap();
    let emb = |q: &[f64]| {
        let (a, b, c) = (q[1], q[2], q[3]);
        [a.cos(), a.sin() * b.cos(), a.sin() * b.sin() * c.cos(), a.sin() * b.sin() * c.sin()]
    };
    let (e0, e1) = (emb(&x), emb(&p));
    let dot: f64 = (0..4).map(|i| e0[i] * e1[i]).sum();
    assert!((dot.acos() - ell).abs() < 1e-8, "{} vs {ell}", dot.acos());
}

#[test]
fn exp_map_affine_scaling() {
    // exp(x, v/2) is the midpoint of the geodesic with velocity v: continuing
    // from there with the (halved) velocity reaches exp(x, v).
    let m = sphere();
    let x = [0.0, 1.3, 1.2, 0.1];
    let v = [0.2, 0.3, 0.2, -0.25];
    let opts = OdeOptions { atol: 1e-12, rtol: 1e-12, ..Default::default() };
    let half: Vec<f64> = v.iter().map(|a| a * 0.5).collect();
    let mid = geodesic_path(&m, &x, &half, opts).unwrap().pop().unwrap();
    assert_eq!(mid.s, 1.0);
    let p = exp_map(&m, &mid.x, &mid.v, opts).unwrap();
    let q = exp_map(&m, &x, &v, opts).unwrap();
    for i in 0..4 {
        assert!((p[i] - q[i]).abs() < 1e-10);
    }
}

#[test]
fn exp_map_escape() {
    let m = sphere();
    assert!(matches!(exp_map(&m, &[0.0, 1.0, 1.0, 0.0], &[5.0, 0.0, 0.0, 0.0], OdeOptions::default()), Err(Error::Escape(_))));
}

#[test]
fn jacobian_matches_finite_differences() {
    let m = sphere();
    let x = [0.0, 1.3, 1.2, 0.1];
    let v = [0.1, 0.2, -0.1, 0.15];
    let opts = OdeOptions { atol: 1e-13, rtol: 1e-13, ..Default::default() };
    let (_, j) = exp_map_jac(&m, &x, &v, opts).unwrap();
    let h = 1e-5;
    for i in 0..4 {
        let mut vp = v;
        let mut vm = v;
        vp[i] += h;
        vm[i] -= h;
        let a = exp_map(&m, &x, &vp, opts).unwrap();
        let b = exp_map(&m, &x, &vm, opts).unwrap();
        for r in 0..4 {
            assert!(((a[r] - b[r]) / (2.0 * h) - j[(r, i)]).abs() < 1e-7);
        }
    }
}

#[test]
fn frame_is_orthonormal_and_future_directed() {
    for m in [sphere(), MetricField::expanding(4, 1.0).unwrap(), MetricField::index_bump(4, 2.0, 1.0).unwrap()] {
        let x = m.default_point();
        let f = Frame::build(&m, &x).unwrap();
        assert!(f.orthonormality_defect(&m).unwrap() < 1e-10);
        assert!(f.vectors[(0, 0)] > 0.0);
    }
}

#[test]
fn minkowski_chart_is_flat() {
    let m = MetricField::minkowski(4).unwrap();
    let c = normal_chart(&m, &[0.0; 4]).unwrap();
    let g = c.pulled_metric(&[0.3, 0.1, -0.2, 0.5]).unwrap();
    assert!((g - chart_eta()).amax() < 1e-12);
    let t = metric_taylor2(&c).unwrap();
    assert!(t.coeffs.iter().all(|v| v.abs() < 1e-8));
}

fn chart_eta() -> nalgebra::DMatrix<f64> {
    let mut e = nalgebra::DMatrix::identity(4, 4) * -1.0;
    e[(0, 0)] = 1.0;
    e
}

#[test]
fn chart_origin_is_eta() {
    let m = sphere();
    let c = normal_chart(&m, &m.default_point()).unwrap();
    assert_eq!(c.pulled_metric(&[0.0; 4]).unwrap(), chart_eta());
}

#[test]
fn sphere_chart_quadratic_expansion() {
    let m = sphere();
    let x = m.default_point();
    let c = normal_chart(&m, &x).unwrap();
    let curv = curvature(&m, &x).unwrap();
    // Riemann in the frame basis.
    let e = &c.frame.vectors;
    let n = 4;
    let rf = |i: usize, k: usize, j: usize, l: usize| {
        let mut s = 0.0;
        for a in 0..n {
            for b in 0..n {
                for cc in 0..n {
                    for d in 0..n {
                        s += curv.r(a, b, cc, d) * e[(a, i)] * e[(b, k)] * e[(cc, j)] * e[(d, l)];
                    }
                }
            }
        }
        s
    };
    let y = [3e-3, 5e-3, -4e-3, 6e-3];
    let g = c.pulled_metric(&y).unwrap();
    let eta = chart_eta();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let mut q = 0.0;
            for k in 0..n {
                for l in 0..n {
                    q += rf(i, k, j, l) * y[k] * y[l] / 3.0;
                }
            }
            worst = worst.max((g[(i, j)] - eta[(i, j)] - q).abs());
        }
    }
    assert!(worst < 1e-5, "{worst}");
}

#[test]
fn radial_identity_on_samples() {
    let m = sphere();
    let c = normal_chart(&m, &m.default_point()).unwrap();
    let mut s: u64 = 12345;
    let mut next = || {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (s >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    };
    for _ in 0..30 {
        let y: Vec<f64> = (0..4).map(|_| next() * c.radius / 2.0).collect();
        let r: f64 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(c.radial_defect(&y).unwrap() < 1e-7 * (1.0 + r));
    }
}

#[test]
fn taylor_jet_matches_curvature_in_frame() {
    for m in [sphere(), MetricField::expanding(4, 1.0).unwrap()] {
        let x = m.default_point();
        let c = normal_chart(&m, &x).unwrap();
        let fit = metric_taylor2(&c).unwrap();
        // Curvature of the pulled metric at 0 equals the frame components;
        // for these diagonal models the frame is a rescaled coordinate basis.
        let curv = curvature(&m, &x).unwrap();
        let e = &c.frame.vectors;
        let n = 4;
        // Brute-force rotation, the oracle for `in_frame`.
        let mut rf = curv.clone();
        for i in 0..n {
            for k in 0..n {
                for j in 0..n {
                    for l in 0..n {
                        let mut s = 0.0;
                        for a in 0..n {
                            for b in 0..n {
                                for cc in 0..n {
                                    for d in 0..n {
                                        s += curv.r(a, b, cc, d) * e[(a, i)] * e[(b, k)] * e[(cc, j)] * e[(d, l)];
                                    }
                                }
                            }
                        }
                        rf.riemann[((i * n + k) * n + j) * n + l] = s;
                    }
                }
            }
        }
        let fast = curv.in_frame(e);
        assert!(fast.riemann.iter().zip(&rf.riemann).all(|(a, b)| (a - b).abs() < 1e-12));
        let expect = taylor2_from_curvature(&rf);
        assert!(fit.max_diff(&expect) < 1e-4, "{}", fit.max_diff(&expect));
        // Trace: η^{ij}T_{ijkl} = −⅓ Ric_{kl} in the frame.
        for k in 0..n {
            for l in 0..n {
                let tr: f64 = (0..n).map(|i| if i == 0 { 1.0 } else { -1.0 } * fit.t(i, i, k, l)).sum();
                let mut ric = 0.0;
                for a in 0..n {
                    for b in 0..n {
                        ric += curv.ric(a, b) * e[(a, k)] * e[(b, l)];
                    }
                }
                assert!((tr + ric / 3.0).abs() < 1e-4);
            }
        }
    }
}

#[test]
fn inverse_exponential() {
    let m = sphere();
    let c = normal_chart(&m, &m.default_point()).unwrap();
    let y = [0.05, -0.04, 0.06, 0.03];
    let p = c.point(&y).unwrap();
    let back = c.inverse(&p).unwrap();
    let q = c.point(&back).unwrap();
    for i in 0..4 {
        assert!((q[i] - p[i]).abs() < 1e-8);
        assert!((back[i] - y[i]).abs() < 1e-8);
    }
}

#[test]
fn chart_radius_halves_near_patch_edge() {
    let m = sphere();
    // Close to the χ edge of the patch a radius-1 chart escapes.
    let c = normal_chart_with_radius(&m, &[0.0, 0.5, 1.5, 0.0], 1.0).unwrap();
    assert!(c.radius < 1.0);
}

#[test]
fn table_roundtrip_and_interpolation() {
    let m = sphere();
    let lower = vec![-0.6, 0.9, 0.9, -0.6];
    let spacing = vec![0.1; 4];
    let t = MetricTable::sample(&m, lower, spacing, vec![13; 4]).unwrap();
    let text = MetricTable::from_text(&t.to_text()).unwrap();
    assert_eq!(text.values.len(), t.values.len());
    for (a, b) in text.values.iter().zip(&t.values) {
        assert!((a - b).abs() <= 1e-15 * a.abs().max(1.0));
    }
    let bin = MetricTable::from_bytes(&t.to_bytes()).unwrap();
    assert_eq!(bin, t);
    assert!(MetricTable::from_bytes(b"not a table at all").is_err());
    let tm = MetricField::from_table(t).unwrap();
    let x = [0.0, 1.5, 1.52, 0.03];
    let c = curvature(&tm, &x).unwrap();
    assert!((c.scalar + 6.0).abs() < 1e-3, "{}", c.scalar);
    let g0 = m.g(&x).unwrap();
    let g1 = tm.g(&x).unwrap();
    assert!((g0 - g1).amax() < 1e-7);
}

#[test]
fn table_file_load() {
    let m = MetricField::minkowski(2).unwrap();
    let t = MetricTable::sample(&m, vec![-1.0, -1.0], vec![0.25, 0.25], vec![9, 9]).unwrap();
    let dir = std::env::temp_dir().join(format!("lspec-table-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p1 = dir.join("m.txt");
    let p2 = dir.join("m.bin");
    std::fs::write(&p1, t.to_text()).unwrap();
    std::fs::write(&p2, t.to_bytes()).unwrap();
    for p in [&p1, &p2] {
        let f = MetricField::parse(p.to_str().unwrap(), 2).unwrap();
        assert!(f.g(&[0.1, 0.2]).is_ok());
    }
    std::fs::remove_dir_all(&dir).ok();
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn curvature_symmetries_random_points(t in -0.5f64..0.5, a in 0.5f64..2.6, b in 0.5f64..2.6, c in -3.0f64..3.0) {
        let m = sphere();
        let k = curvature(&m, &[t, a, b, c]).unwrap();
        prop_assert!(k.symmetry_defect() < 1e-8);
        prop_assert!((k.scalar + 6.0).abs() < 1e-9);
    }

    #[test]
    fn jet_derivatives_match_fd(t in -0.5f64..0.5, a in 0.5f64..2.6, b in 0.5f64..2.6) {
        let m = MetricField::index_bump(4, 1.0, 1.0).unwrap();
        let x = [t, a - 1.5, b - 1.5, 0.2];
        let jet = m.jet(&x).unwrap();
        let h = 1e-5;
        for e in 0..4 {
            let mut xp = x; xp[e] += h;
            let mut xm = x; xm[e] -= h;
            let gp = m.components(&xp);
            let gm = m.components(&xm);
            for i in 0..4 {
                for j in 0..4 {
                    let fd = (gp[i * 4 + j] - gm[i * 4 + j]) / (2.0 * h);
                    prop_assert!((fd - jet.d(e, i, j)).abs() <= 1e-5 * fd.abs().max(1.0));
                }
            }
        }
    }
}
