//! The acceptance suite: twelve numbered checks, each with an independent
//! reference value and a runtime budget where one applies.

use lspec_core::contour::{power_identity_check, Regulator};
use lspec_core::elemfam::{circle_residue, euclid_integral, pde_check};
use lspec_core::geomkit::{curvature, metric_taylor2, normal_chart, taylor2_from_curvature, MetricField, NormalChart};
use lspec_core::hadamard::{HadamardConfig, HadamardSequence};
use lspec_core::num::special::{factorial, gamma};
use lspec_core::num::cpow;
use lspec_core::scflow::{nontrapping_certificate, reversal_swaps, FlowOptions};
use lspec_core::specpowers::{cpower_residue_circle, f_of_operator_diag, predicted_expansion, PowerDiagonal, SchwartzProfile};
use lspec_core::ultrastatic::{build_model, fit_expansion, kernel_diag, SpectralKind, SpectralModel};
use lspec_core::{Result, C64};
use lspec_oracles::curvature::ricci_scalar_fd;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use std::f64::consts::PI;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

#[derive(Clone, Debug)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub pass: bool,
    /// One-line summary of the measured quantities.
    pub detail: String,
    /// Measured quantities for the JSON report.
    pub metrics: Value,
    pub elapsed: Duration,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {} {}: {} ({:.2} s)",
            self.id,
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.detail,
            self.elapsed.as_secs_f64()
        )
    }
}

pub const NAMES: [&str; 12] = [
    "curvature engine",
    "normal-chart identities",
    "hadamard u1 identity",
    "euclidean residues",
    "contour identity",
    "pde identity",
    "complex-power residues",
    "scalar-curvature residue",
    "spectral action, torus",
    "spectral action, sphere",
    "mellin vs spectral",
    "non-trapping certificate",
];

struct Check {
    pass: bool,
    detail: String,
    metrics: Value,
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm()
}

fn sphere() -> MetricField {
    MetricField::ultrastatic_sphere(4, 1.0).expect("valid model")
}

/// The ℝ×S³ Hadamard solve shared by criteria 3, 7 and 8.
fn sphere_sequence() -> Result<&'static HadamardSequence> {
    static SEQ: OnceLock<std::result::Result<HadamardSequence, lspec_core::Error>> = OnceLock::new();
    SEQ.get_or_init(|| {
        let m = sphere();
        let chart = normal_chart(&m, &m.default_point())?;
        HadamardSequence::build(&chart, HadamardConfig { order: 1, ..HadamardConfig::default() })
    })
    .as_ref()
    .map_err(Clone::clone)
}

fn profile() -> SchwartzProfile {
    SchwartzProfile::bump(1.5, 0.5).expect("valid profile")
}

fn lambda_grid() -> Vec<f64> {
    (1..=6).map(|i| 10.0 * i as f64).collect()
}

fn c1_curvature() -> Result<Check> {
    let t0 = Instant::now();
    let mk = MetricField::minkowski(4)?;
    let flat = curvature(&mk, &[0.3, -1.0, 2.0, 0.5])?.scalar.abs();
    let s = sphere();
    let mut worst: f64 = 0.0;
    let base = s.default_point();
    for off in [[0.0; 4], [0.7, 0.3, -0.2, 0.4], [-0.8, -0.25, 0.3, -0.6]] {
        let x: Vec<f64> = base.iter().zip(off).map(|(b, o)| b + o).collect();
        let c = curvature(&s, &x)?;
        let g = |y: &[f64]| s.components(y);
        let (ric, r) = ricci_scalar_fd(&g, &x, 1e-3, 1e-3);
        worst = worst.max((c.scalar - r).abs());
        for (a, b) in c.ricci.iter().zip(&ric) {
            worst = worst.max((a - b).abs());
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    Ok(Check {
        pass: flat <= 1e-10 && worst <= 1e-5 && secs < 5.0,
        detail: format!("|R_minkowski| = {flat:.1e}, sphere vs fd oracle {worst:.1e} (tol 1e-5)"),
        metrics: json!({ "minkowski_scalar": flat, "sphere_fd_gap": worst }),
    })
}

fn frame_taylor_gap(chart: &NormalChart) -> Result<f64> {
    let fit = metric_taylor2(chart)?;
    let c = curvature(&chart.metric, &chart.base)?.in_frame(&chart.frame.vectors);
    Ok(fit.max_diff(&taylor2_from_curvature(&c)))
}

fn c2_normal_chart() -> Result<Check> {
    let t0 = Instant::now();
    let s = sphere();
    let chart = normal_chart(&s, &s.default_point())?;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut radial: f64 = 0.0;
    for _ in 0..100 {
        let y: Vec<f64> = (0..4).map(|_| rng.random_range(-0.5..0.5) * chart.radius).collect();
        radial = radial.max(chart.radial_defect(&y)?);
    }
    let mut jet: f64 = 0.0;
    for m in [sphere(), MetricField::expanding(4, 1.0)?] {
        jet = jet.max(frame_taylor_gap(&normal_chart(&m, &m.default_point())?)?);
    }
    let secs = t0.elapsed().as_secs_f64();
    Ok(Check {
        pass: radial <= 1e-7 && jet <= 1e-4 && secs < 30.0,
        detail: format!("radial defect {radial:.1e} (tol 1e-7), quadratic jet gap {jet:.1e} (tol 1e-4)"),
        metrics: json!({ "radial_defect": radial, "jet_gap": jet }),
    })
}

fn c3_hadamard() -> Result<Check> {
    let t0 = Instant::now();
    let mut rows = Vec::new();
    let mut pass = true;
    let e = MetricField::expanding(4, 1.0)?;
    let e_chart = normal_chart(&e, &e.default_point())?;
    let e_seq = HadamardSequence::build(&e_chart, HadamardConfig { order: 1, ..HadamardConfig::default() })?;
    for (name, seq) in [("ultrastatic-sphere", sphere_sequence()?), ("expanding", &e_seq)] {
        let r = curvature(&seq.chart.metric, &seq.chart.base)?.scalar;
        let gap = (seq.diag[1] + r / 6.0).abs() / r.abs().max(1.0);
        pass &= gap <= 1e-3;
        rows.push(json!({ "metric": name, "u1": seq.diag[1], "scalar": r, "gap": gap }));
    }
    let secs = t0.elapsed().as_secs_f64();
    let worst = rows.iter().filter_map(|r| r["gap"].as_f64()).fold(0.0, f64::max);
    Ok(Check {
        pass: pass && secs < 120.0,
        detail: format!("max |u1 + R/6|/max(1,|R|) = {worst:.1e} on 2 metrics (tol 1e-3)"),
        metrics: json!({ "metrics": rows }),
    })
}

fn c4_euclid() -> Result<Check> {
    let mut worst: f64 = 0.0;
    for z in [C64::new(-1.0, 0.0), C64::new(-1.0, 2.0)] {
        for k in 1..=2u32 {
            let j = 2 - k;
            let expect = cpow(z, C64::new(j as f64, 0.0)) * PI * PI / (factorial(j) * gamma(C64::new(k as f64, 0.0)));
            // Off-pole failures surface as NaN and are reported below.
            let r = circle_residue(
                |a| euclid_integral(a, z, 4).map(|v| v.analytic_part).unwrap_or(C64::new(f64::NAN, f64::NAN)),
                C64::new(k as f64, 0.0),
                1e-3,
                64,
            );
            if r.is_nan() {
                return Err(lspec_core::Error::Domain(format!("euclid_integral failed near α = {k}")));
            }
            worst = worst.max(rel(r, expect));
        }
    }
    Ok(Check {
        pass: worst <= 1e-8,
        detail: format!("max relative residue error {worst:.1e} (tol 1e-8)"),
        metrics: json!({ "max_rel_err": worst }),
    })
}

fn c5_contour() -> Result<Check> {
    let t0 = Instant::now();
    let mut worst: f64 = 0.0;
    for a in [1.5, 2.3, 3.7] {
        for k in 0..3 {
            for eps in [0.1, 1.0] {
                for reg in [Regulator::Minus, Regulator::Plus] {
                    let r = power_identity_check(C64::new(a, 0.0), k, eps, 1.3, reg, PI / 4.0)?;
                    worst = worst.max(r.rel_err);
                }
            }
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    Ok(Check {
        pass: worst <= 1e-6 && secs < 60.0,
        detail: format!("max relative error {worst:.1e} over 36 cases (tol 1e-6)"),
        metrics: json!({ "max_rel_err": worst }),
    })
}

fn c6_pde() -> Result<Check> {
    let grid = vec![
        vec![0.1, 0.8, 0.2, -0.3],
        vec![-0.2, 0.5, 0.6, 0.1],
        vec![0.3, -0.4, 0.7, 0.9],
        vec![0.0, 1.0, 0.0, 0.0],
    ];
    let mut worst: f64 = 0.0;
    for a in [2.0, 3.5] {
        for z in [C64::new(0.0, 2.0), C64::new(1.0, 2.0)] {
            worst = worst.max(pde_check(C64::new(a, 0.0), z, &grid, 4, 1e-2)?.relative);
        }
    }
    Ok(Check {
        pass: worst <= 1e-3,
        detail: format!("max relative residual {worst:.1e} (tol 1e-3)"),
        metrics: json!({ "max_rel_residual": worst }),
    })
}

/// ±i u_m/(2ⁿπ^{n/2}(n/2−m−1)!) for n = 4, with +i for P − iε.
fn theorem_residue(reg: Regulator, u_m: f64, m: u32) -> C64 {
    C64::new(0.0, reg.sign()) * u_m / (16.0 * PI * PI * factorial(1 - m))
}

fn c7_residues() -> Result<Check> {
    let seq = sphere_sequence()?;
    let r = curvature(&seq.chart.metric, &seq.chart.base)?.scalar;
    let exact = [1.0, -r / 6.0];
    let mut worst: f64 = 0.0;
    let mut vanish: f64 = 0.0;
    for reg in [Regulator::Minus, Regulator::Plus] {
        let pd = PowerDiagonal::new(4, 0.0, 1e-6, reg, seq.diag.clone())?;
        for (alpha, m) in [(2.0, 0u32), (1.0, 1)] {
            worst = worst.max(rel(cpower_residue_circle(&pd, alpha), theorem_residue(reg, exact[m as usize], m)));
        }
        for alpha in [0.0, -1.0] {
            vanish = vanish.max(cpower_residue_circle(&pd, alpha).norm());
        }
    }
    Ok(Check {
        pass: worst <= 1e-3 && vanish <= 1e-10,
        detail: format!("residues at 2, 1 within {worst:.1e} (tol 1e-3); at 0, -1 below {vanish:.1e} (tol 1e-10)"),
        metrics: json!({ "max_rel_err": worst, "max_vanishing": vanish }),
    })
}

/// Value at 0 of the polynomial through the three points (Neville).
fn extrapolate_to_zero(xs: [f64; 3], ys: [C64; 3]) -> C64 {
    let mut p = ys;
    for level in 1..3 {
        for i in 0..3 - level {
            let (xa, xb) = (xs[i], xs[i + level]);
            p[i] = (p[i] * (-xb) - p[i + 1] * (-xa)) / (xa - xb);
        }
    }
    p[0]
}

fn c8_kkw() -> Result<Check> {
    let seq = sphere_sequence()?;
    let r = curvature(&seq.chart.metric, &seq.chart.base)?.scalar;
    let eps = [1e-1, 1e-2, 1e-3];
    let mut vals = [C64::new(0.0, 0.0); 3];
    for (v, &e) in vals.iter_mut().zip(&eps) {
        let pd = PowerDiagonal::new(4, 0.0, e, Regulator::Minus, seq.diag.clone())?;
        *v = cpower_residue_circle(&pd, 1.0);
    }
    let limit = extrapolate_to_zero(eps, vals);
    let expect = C64::new(r, 0.0) / (C64::new(0.0, 6.0) * 16.0 * PI * PI * gamma(C64::new(1.0, 0.0)));
    let err = rel(limit, expect);
    Ok(Check {
        pass: err <= 2e-3,
        detail: format!("extrapolated residue {:.6e}{:+.6e}i vs R/(6i(4pi)^2), rel {err:.1e} (tol 2e-3)", limit.re, limit.im),
        metrics: json!({ "limit": [limit.re, limit.im], "expected": [expect.re, expect.im], "rel_err": err }),
    })
}

fn model(kind: SpectralKind) -> Result<SpectralModel> {
    build_model(kind, 3, 10.0)
}

fn samples(m: &SpectralModel, p: &SchwartzProfile) -> Result<Vec<(f64, C64)>> {
    lambda_grid().into_iter().map(|l| Ok((l, kernel_diag(m, p, l, 0.0, 1e-2)?.value))).collect()
}

fn c9_torus() -> Result<Check> {
    let t0 = Instant::now();
    let p = profile();
    let m = model(SpectralKind::Torus { side: 2.0 * PI })?;
    let fit = fit_expansion(&samples(&m, &p)?, 4, 3)?;
    let c0 = lspec_core::specpowers::ck_coefficient(&p, 4, 0);
    let expect = C64::from_polar(1.0, PI) * c0 / (C64::new(0.0, 16.0 * PI * PI));
    let lead = fit.coeffs[0];
    let modulus = (lead.norm() - expect.norm()).abs() / expect.norm();
    let phase = (lead / expect).arg().abs();
    let ratio = fit.coeffs[1].norm() / lead.norm();
    let secs = t0.elapsed().as_secs_f64();
    Ok(Check {
        pass: modulus <= 0.02 && phase <= 0.02 && ratio <= 0.02 && secs < 300.0,
        detail: format!("Lambda^4 modulus {modulus:.1e}, phase {phase:.1e} rad; |Lambda^2|/|Lambda^4| = {ratio:.1e} (tol 2e-2)"),
        metrics: json!({
            "fit": fit.coeffs.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>(),
            "expected_leading": [expect.re, expect.im],
            "modulus_rel": modulus, "phase_abs": phase, "subleading_ratio": ratio, "condition": fit.condition,
        }),
    })
}

fn c10_sphere() -> Result<Check> {
    let t0 = Instant::now();
    let p = profile();
    let m = model(SpectralKind::Sphere { radius: 1.0 })?;
    let fit = fit_expansion(&samples(&m, &p)?, 4, 3)?;
    // −R/6 for ℝ×S³ of unit radius, from the curvature module.
    let r = curvature(&sphere(), &sphere().default_point())?.scalar;
    let pred = predicted_expansion(&p, 4, 0.0, 1e-2, -r / 6.0, 0.0, 1.0)?;
    let err = rel(fit.coeffs[1], pred.coeffs[1]);
    let secs = t0.elapsed().as_secs_f64();
    Ok(Check {
        pass: err <= 0.05 && secs < 600.0,
        detail: format!("Lambda^2 coefficient rel error {err:.1e} (tol 5e-2)"),
        metrics: json!({
            "fit": fit.coeffs.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>(),
            "predicted_subleading": [pred.coeffs[1].re, pred.coeffs[1].im],
            "rel_err": err, "condition": fit.condition,
        }),
    })
}

fn c11_mellin() -> Result<Check> {
    let p = profile();
    let m = model(SpectralKind::Torus { side: 2.0 * PI })?;
    let spectral = kernel_diag(&m, &p, 40.0, 0.0, 1e-2)?.value;
    let pd = PowerDiagonal::new(4, 0.0, 1e-2, Regulator::Plus, vec![1.0, 0.0, 0.0])?;
    let mellin = f_of_operator_diag(&pd, &p, 40.0, 2.5)?;
    let err = rel(mellin, spectral);
    Ok(Check {
        pass: err <= 0.02,
        detail: format!("relative gap {err:.1e} at Lambda = 40 (tol 2e-2)"),
        metrics: json!({ "spectral": [spectral.re, spectral.im], "mellin": [mellin.re, mellin.im], "rel_err": err }),
    })
}

fn c12_flow() -> Result<Check> {
    let m = MetricField::minkowski(4)?;
    let opts = FlowOptions::default();
    let rep = nontrapping_certificate(&m, 100, 7, 2.0, &opts)?;
    let mut swapped = 0;
    for o in &rep.outcomes {
        if reversal_swaps(&m, o, &opts)? {
            swapped += 1;
        }
    }
    Ok(Check {
        pass: rep.pass && rep.classified == 100 && swapped == 100,
        detail: format!(
            "{}/100 classified, worst closest approach {:.3e} (tol 1e-3), {swapped}/100 swap under reversal",
            rep.classified, rep.worst_closest_approach
        ),
        metrics: json!({ "classified": rep.classified, "worst_closest_approach": rep.worst_closest_approach, "reversal_swaps": swapped }),
    })
}

/// Runs one criterion; computation errors count as failures.
pub fn run_criterion(id: usize) -> CriterionResult {
    let t0 = Instant::now();
    let out = match id {
        1 => c1_curvature(),
        2 => c2_normal_chart(),
        3 => c3_hadamard(),
        4 => c4_euclid(),
        5 => c5_contour(),
        6 => c6_pde(),
        7 => c7_residues(),
        8 => c8_kkw(),
        9 => c9_torus(),
        10 => c10_sphere(),
        11 => c11_mellin(),
        12 => c12_flow(),
        _ => panic!("criteria are numbered 1 to 12"),
    };
    let check = out.unwrap_or_else(|e| Check {
        pass: false,
        detail: format!("{}: {e}", e.kind()),
        metrics: json!({ "error": { "kind": e.kind(), "message": e.to_string() } }),
    });
    CriterionResult { id, name: NAMES[id - 1], pass: check.pass, detail: check.detail, metrics: check.metrics, elapsed: t0.elapsed() }
}

/// Runs the given criteria in order, calling `each` after every one.
pub fn run_suite(ids: &[usize], mut each: impl FnMut(&CriterionResult)) -> Vec<CriterionResult> {
    ids.iter()
        .map(|&id| {
            let r = run_criterion(id);
            each(&r);
            r
        })
        .collect()
}
