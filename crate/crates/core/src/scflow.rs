//! Rescaled bicharacteristic flow on the radially compactified phase space
//! of Minkowski-type metrics, and an empirical non-trapping certificate.
//!
//! We integrate in interior coordinates (x, ξ) the Hamilton field of
//! p = −g^{−1}(x)(ξ, ξ) multiplied by ⟨x⟩ = ρ^{−1} and made homogeneous of
//! degree zero in ξ: ξ is kept on its sphere by projecting out the radial
//! fiber component. The compactified picture is read off from
//! ρ = ⟨x⟩^{−1}, the base direction x̂ = x/|x| and the fiber direction ξ̂.
//!
//! The radial sets are those of the model at infinity: the flow is radial
//! where x̂ = ±v̂, v̂ the unit direction of ∂_ξ p. L₊ is the part over future
//! null infinity (x̂⁰ > 0), L₋ the part over past null infinity.
//!
//! A trajectory ends as reached_L± once its distance to the set is below the
//! capture radius and has been decreasing over the last quarter of the run,
//! as escaped when ρ falls under the floor anywhere else, and as
//! budget_exhausted when it runs out of parameter or steps.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geomkit::{MetricField, MetricKind};
use crate::num::ode::{self, Control, OdeOptions};

#[derive(Clone, Debug, PartialEq)]
pub struct ScPhasePoint {
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn unit(v: &[f64]) -> Vec<f64> {
    let r = norm(v);
    v.iter().map(|a| a / r).collect()
}

impl ScPhasePoint {
    pub fn new(x: Vec<f64>, xi: Vec<f64>) -> Result<Self> {
        if x.len() != xi.len() || x.len() < 2 {
            return Err(Error::Dimension(format!("x and ξ must have the same dimension ≥ 2 ({} vs {})", x.len(), xi.len())));
        }
        if !(norm(&xi) > 0.0) || x.iter().chain(&xi).any(|v| !v.is_finite()) {
            return Err(Error::Domain("ξ must be finite and non-zero".into()));
        }
        Ok(ScPhasePoint { x, xi })
    }
    /// ρ = ⟨x⟩^{−1} ∈ (0, 1].
    pub fn rho(&self) -> f64 {
        1.0 / (1.0 + self.x.iter().map(|a| a * a).sum::<f64>()).sqrt()
    }
    /// x/|x|, or zero at the origin.
    pub fn base_dir(&self) -> Vec<f64> {
        let r = norm(&self.x);
        if r == 0.0 {
            vec![0.0; self.x.len()]
        } else {
            self.x.iter().map(|a| a / r).collect()
        }
    }
    pub fn fiber_dir(&self) -> Vec<f64> {
        unit(&self.xi)
    }
    /// ⟨ξ⟩^{−1}.
    pub fn fiber_scale(&self) -> f64 {
        1.0 / (1.0 + self.xi.iter().map(|a| a * a).sum::<f64>()).sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlowDirection {
    Forward,
    Backward,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Terminal {
    ReachedLPlus,
    ReachedLMinus,
    /// Reached ρ below the floor away from both radial sets.
    Escaped,
    BudgetExhausted,
}

impl Terminal {
    pub fn name(&self) -> &'static str {
        match self {
            Terminal::ReachedLPlus => "reached_L_plus",
            Terminal::ReachedLMinus => "reached_L_minus",
            Terminal::Escaped => "escaped",
            Terminal::BudgetExhausted => "budget_exhausted",
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct FlowOptions {
    pub capture: f64,
    /// Largest |σ| of the rescaled flow parameter.
    pub budget: f64,
    pub rho_floor: f64,
    /// Accepted-step budget. Rays caught near a trapped set wind faster and
    /// faster in σ and end here instead of reaching the ρ floor.
    pub max_steps: usize,
    pub ode: OdeOptions,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions {
            capture: 1e-3,
            budget: 1e4,
            rho_floor: 1e-12,
            max_steps: 20_000,
            ode: OdeOptions { atol: 1e-11, rtol: 1e-11, h0: 1e-3, max_steps: usize::MAX },
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowSample {
    pub sigma: f64,
    pub rho: f64,
    pub base: Vec<f64>,
    pub fiber: Vec<f64>,
    pub dist_plus: f64,
    pub dist_minus: f64,
    /// p(x, ξ̂).
    pub p0: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowResult {
    pub samples: Vec<FlowSample>,
    pub terminal: Terminal,
    pub closest_plus: f64,
    pub closest_minus: f64,
    pub max_abs_p0: f64,
}

fn check_model(metric: &MetricField) -> Result<()> {
    match metric.kind {
        MetricKind::Minkowski | MetricKind::IndexBump { .. } => Ok(()),
        _ => Err(Error::Domain(format!(
            "{} is not a Minkowski-type model at infinity",
            metric.name()
        ))),
    }
}

/// g^{−1} and ∂_e g^{−1} = −g^{−1}(∂_e g)g^{−1}.
fn inverse_jet(metric: &MetricField, x: &[f64]) -> Result<(DMatrix<f64>, Vec<DMatrix<f64>>)> {
    let n = metric.dim;
    let jet = metric.jet_unchecked(x);
    let ginv = jet.metric().try_inverse().ok_or_else(|| Error::Step(format!("degenerate metric at {x:?}")))?;
    let d = (0..n)
        .map(|e| {
            let de = DMatrix::from_fn(n, n, |i, j| jet.d(e, i, j));
            -(&ginv * de * &ginv)
        })
        .collect();
    Ok((ginv, d))
}

fn quad_form(a: &DMatrix<f64>, v: &[f64]) -> f64 {
    let n = v.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += a[(i, j)] * v[i] * v[j];
        }
    }
    s
}

/// p(x, ξ) = −g^{−1}(x)(ξ, ξ).
pub fn symbol(metric: &MetricField, x: &[f64], xi: &[f64]) -> Result<f64> {
    let (ginv, _) = inverse_jet(metric, x)?;
    Ok(-quad_form(&ginv, xi))
}

/// Rescaled field at state y = (x, ξ).
fn rhs(metric: &MetricField, y: &[f64], dy: &mut [f64], sign: f64) -> Result<()> {
    let n = metric.dim;
    let (x, xi) = y.split_at(n);
    let xh = unit(xi);
    let (ginv, dginv) = inverse_jet(metric, x)?;
    let w = sign * (1.0 + x.iter().map(|a| a * a).sum::<f64>()).sqrt();
    for a in 0..n {
        let mut s = 0.0;
        for b in 0..n {
            s += ginv[(a, b)] * xh[b];
        }
        dy[a] = -2.0 * w * s;
    }
    // ξ̇ = ξ̂·∂_x g^{−1}·ξ̂, minus its component along ξ̂.
    let f: Vec<f64> = dginv.iter().map(|de| quad_form(de, &xh)).collect();
    let radial: f64 = f.iter().zip(&xh).map(|(a, b)| a * b).sum();
    let r = norm(xi);
    for a in 0..n {
        dy[n + a] = w * r * (f[a] - radial * xh[a]);
    }
    Ok(())
}

fn sample_at(metric: &MetricField, sigma: f64, y: &[f64]) -> Result<FlowSample> {
    let n = metric.dim;
    let pt = ScPhasePoint { x: y[..n].to_vec(), xi: y[n..].to_vec() };
    let fiber = pt.fiber_dir();
    let (ginv, _) = inverse_jet(metric, &pt.x)?;
    let v: Vec<f64> = (0..n).map(|a| -(0..n).map(|b| ginv[(a, b)] * fiber[b]).sum::<f64>()).collect();
    let vh = unit(&v);
    let base = pt.base_dir();
    let rho = pt.rho();
    // Orient ±v̂ so that the L₊ candidate points to the future.
    let s = if vh[0] >= 0.0 { 1.0 } else { -1.0 };
    let dist = |sg: f64| rho + base.iter().zip(&vh).map(|(b, v)| (b - sg * v).powi(2)).sum::<f64>().sqrt();
    Ok(FlowSample {
        sigma,
        rho,
        dist_plus: dist(s),
        dist_minus: dist(-s),
        p0: -quad_form(&ginv, &fiber),
        base,
        fiber,
    })
}

/// Whether the distance series ends below `capture` and did not increase
/// over the last quarter of the samples.
fn captured(d: &[f64], capture: f64) -> bool {
    let n = d.len();
    if n < 4 || d[n - 1] >= capture {
        return false;
    }
    let start = n - n / 4 - 1;
    d[start..].windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9))
}

/// Integrates the rescaled flow from `p` until capture at L±, escape to
/// ρ < floor, or the parameter budget.
pub fn hamilton_step(metric: &MetricField, p: &ScPhasePoint, direction: FlowDirection, opts: &FlowOptions) -> Result<FlowResult> {
    check_model(metric)?;
    let n = metric.dim;
    if p.x.len() != n {
        return Err(Error::Dimension(format!("point has dimension {}, metric {n}", p.x.len())));
    }
    let p0 = symbol(metric, &p.x, &p.fiber_dir())?;
    if p0.abs() >= 1e-8 {
        return Err(Error::Characteristic(format!("|p(x, ξ̂)| = {:e} ≥ 1e−8", p0.abs())));
    }
    let sign = if direction == FlowDirection::Forward { 1.0 } else { -1.0 };
    let mut y: Vec<f64> = p.x.iter().chain(&p.xi).cloned().collect();
    let mut samples = vec![sample_at(metric, 0.0, &y)?];
    let mut terminal = Terminal::BudgetExhausted;
    let mut dp = vec![samples[0].dist_plus];
    let mut dm = vec![samples[0].dist_minus];
    let stats = ode::integrate(
        |_, y, dy| rhs(metric, y, dy, sign),
        0.0,
        opts.budget,
        &mut y,
        opts.ode,
        |s, y| {
            let smp = sample_at(metric, sign * s, y)?;
            dp.push(smp.dist_plus);
            dm.push(smp.dist_minus);
            let rho = smp.rho;
            samples.push(smp);
            if captured(&dp, opts.capture) {
                terminal = Terminal::ReachedLPlus;
                return Ok(Control::Stop);
            }
            if captured(&dm, opts.capture) {
                terminal = Terminal::ReachedLMinus;
                return Ok(Control::Stop);
            }
            if rho < opts.rho_floor {
                terminal = if captured(&dp, opts.capture) {
                    Terminal::ReachedLPlus
                } else if captured(&dm, opts.capture) {
                    Terminal::ReachedLMinus
                } else {
                    Terminal::Escaped
                };
                return Ok(Control::Stop);
            }
            if samples.len() > opts.max_steps {
                return Ok(Control::Stop);
            }
            Ok(Control::Continue)
        },
    );
    match stats {
        Ok(_) => {}
        Err(Error::Step(m)) | Err(Error::Convergence(m)) => return Err(Error::Step(m)),
        Err(e) => return Err(e),
    }
    let closest_plus = dp.iter().cloned().fold(f64::INFINITY, f64::min);
    let closest_minus = dm.iter().cloned().fold(f64::INFINITY, f64::min);
    let max_abs_p0 = samples.iter().map(|s| s.p0.abs()).fold(0.0, f64::max);
    Ok(FlowResult { samples, terminal, closest_plus, closest_minus, max_abs_p0 })
}

/// A null covector at x: spatial part uniform on the sphere, time part from
/// g^{−1}(ξ, ξ) = 0 with the requested sign; returned Euclidean-normalized.
pub fn null_covector(metric: &MetricField, x: &[f64], spatial: &[f64], future: bool) -> Result<Vec<f64>> {
    let (ginv, _) = inverse_jet(metric, x)?;
    let n = metric.dim;
    let mut xi = vec![0.0; n];
    xi[1..].copy_from_slice(spatial);
    // g^{00} ξ₀² + 2 g^{0i} ξ₀ ξ_i + g^{ij} ξ_i ξ_j = 0.
    let a = ginv[(0, 0)];
    let b: f64 = (1..n).map(|i| 2.0 * ginv[(0, i)] * xi[i]).sum();
    let c = quad_form(&ginv, &xi);
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 || a == 0.0 {
        return Err(Error::Characteristic("no real null covector with this spatial part".into()));
    }
    let roots = [(-b + disc.sqrt()) / (2.0 * a), (-b - disc.sqrt()) / (2.0 * a)];
    xi[0] = if future { roots[0].max(roots[1]) } else { roots[0].min(roots[1]) };
    Ok(unit(&xi))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleOutcome {
    pub point: ScPhasePoint,
    pub backward: Option<Terminal>,
    pub forward: Option<Terminal>,
    pub closest: f64,
    pub error: Option<String>,
}

impl SampleOutcome {
    /// L∓ → L± along the forward parameter.
    pub fn is_transition(&self) -> bool {
        matches!(
            (self.backward, self.forward),
            (Some(Terminal::ReachedLMinus), Some(Terminal::ReachedLPlus)) | (Some(Terminal::ReachedLPlus), Some(Terminal::ReachedLMinus))
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertificateReport {
    pub samples: usize,
    pub classified: usize,
    pub fraction: f64,
    /// Largest over samples of the closest approach to the terminal sets.
    pub worst_closest_approach: f64,
    pub pass: bool,
    pub outcomes: Vec<SampleOutcome>,
}

/// Flows `sample_count` random characteristic points of the box |x_i| ≤
/// `half_width` both ways and counts L∓ → L± transitions.
pub fn nontrapping_certificate(
    metric: &MetricField,
    sample_count: usize,
    seed: u64,
    half_width: f64,
    opts: &FlowOptions,
) -> Result<CertificateReport> {
    check_model(metric)?;
    let n = metric.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(sample_count);
    for _ in 0..sample_count {
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-half_width..half_width)).collect();
        // Gaussian spatial direction via Box–Muller keeps the sphere uniform.
        let g: Vec<f64> = (1..n)
            .map(|_| {
                let u1: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
                let u2: f64 = rng.random();
                (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
            })
            .collect();
        let future = rng.random_bool(0.5);
        let xi = null_covector(metric, &x, &unit(&g), future)?;
        points.push(ScPhasePoint::new(x, xi)?);
    }
    let outcomes: Vec<SampleOutcome> = points
        .into_par_iter()
        .map(|pt| {
            let run = |dir| hamilton_step(metric, &pt, dir, opts);
            match (run(FlowDirection::Backward), run(FlowDirection::Forward)) {
                (Ok(b), Ok(f)) => {
                    let end = |r: &FlowResult| match r.terminal {
                        Terminal::ReachedLPlus => r.closest_plus,
                        Terminal::ReachedLMinus => r.closest_minus,
                        _ => r.closest_plus.min(r.closest_minus),
                    };
                    SampleOutcome { closest: end(&b).max(end(&f)), backward: Some(b.terminal), forward: Some(f.terminal), point: pt, error: None }
                }
                (b, f) => {
                    let msg = [b.err(), f.err()].into_iter().flatten().map(|e| e.to_string()).collect::<Vec<_>>().join("; ");
                    SampleOutcome { point: pt, backward: None, forward: None, closest: f64::INFINITY, error: Some(msg) }
                }
            }
        })
        .collect();
    let classified = outcomes.iter().filter(|o| o.is_transition()).count();
    let worst = outcomes.iter().map(|o| o.closest).fold(0.0, f64::max);
    let fraction = if sample_count == 0 { 1.0 } else { classified as f64 / sample_count as f64 };
    Ok(CertificateReport {
        samples: sample_count,
        classified,
        fraction,
        worst_closest_approach: worst,
        pass: classified == sample_count && worst < opts.capture,
        outcomes,
    })
}

/// Flow reversal: (x, −ξ) traces the same base curve with the parameter
/// reversed, so its forward and backward terminals must be the backward and
/// forward terminals of (x, ξ).
pub fn reversal_swaps(metric: &MetricField, outcome: &SampleOutcome, opts: &FlowOptions) -> Result<bool> {
    let (Some(b), Some(f)) = (outcome.backward, outcome.forward) else {
        return Ok(false);
    };
    let neg: Vec<f64> = outcome.point.xi.iter().map(|v| -v).collect();
    let q = ScPhasePoint::new(outcome.point.x.clone(), neg)?;
    let rf = hamilton_step(metric, &q, FlowDirection::Forward, opts)?;
    let rb = hamilton_step(metric, &q, FlowDirection::Backward, opts)?;
    Ok(rf.terminal == b && rb.terminal == f)
}
