//! Run configuration shared by the command line and TOML config files.
//!
//! A config file names one command as a table:
//!
//! ```toml
//! seed = 7
//! out = "results"
//!
//! [command.flow]
//! metric = "minkowski"
//! samples = 100
//! ```
//!
//! Unknown keys anywhere are rejected.

use clap::{Args, Subcommand};
use lspec_core::C64;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

use crate::CliError;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Worker threads; `LSPEC_THREADS` overrides it.
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Directory for JSON/CSV artifacts and the manifest.
    #[serde(default)]
    pub out: Option<PathBuf>,
    pub command: Command,
}

fn default_seed() -> u64 {
    7
}

#[derive(Clone, Debug, Subcommand, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum Command {
    /// Riemann, Ricci and scalar curvature at a point, with a finite-difference cross-check.
    Curvature(CurvatureArgs),
    /// Hadamard coefficients u_k on the diagonal.
    Hadamard(HadamardArgs),
    /// One value of the elementary family F_α(z, q).
    Elem(ElemArgs),
    /// Contour-power identity: quadrature against closed form.
    ContourCheck(ContourArgs),
    /// Poles and residues of (P ∓ iε)^{−α}(x, x).
    Residues(ResiduesArgs),
    /// Three-term expansion against the Mellin-assembled kernel.
    SpectralAction(SpectralArgs),
    /// Spectral kernel on an ultrastatic model and its Λ-fit.
    UltrastaticFit(FitArgs),
    /// Non-trapping certificate of the rescaled Hamilton flow.
    Flow(FlowArgs),
    /// The acceptance suite.
    Accept(AcceptArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Curvature(_) => "curvature",
            Command::Hadamard(_) => "hadamard",
            Command::Elem(_) => "elem",
            Command::ContourCheck(_) => "contour-check",
            Command::Residues(_) => "residues",
            Command::SpectralAction(_) => "spectral-action",
            Command::UltrastaticFit(_) => "ultrastatic-fit",
            Command::Flow(_) => "flow",
            Command::Accept(_) => "accept",
        }
    }
}

#[derive(Clone, Debug, Args, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CurvatureArgs {
    #[arg(long, default_value = "ultrastatic-sphere")]
    #[serde(default = "d_sphere")]
    pub metric: String,
    #[arg(long, default_value_t = 4)]
    #[serde(default = "d_dim")]
    pub dim: usize,
    /// Comma-separated coordinates; defaults to the model's base point.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(default)]
    pub point: Option<Vec<f64>>,
    /// Allowed gap to the finite-difference oracle, relative to max(1, |R|).
    #[arg(long, default_value_t = 1e-5)]
    #[serde(default = "d_tol_curv")]
    pub tol: f64,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct HadamardArgs {
    #[arg(long, default_value = "ultrastatic-sphere")]
    #[serde(default = "d_sphere")]
    pub metric: String,
    #[arg(long, default_value_t = 4)]
    #[serde(default = "d_dim")]
    pub dim: usize,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(default)]
    pub point: Option<Vec<f64>>,
    #[arg(long, default_value_t = 2)]
    #[serde(default = "d_order")]
    pub order: usize,
    /// Chebyshev nodes per axis.
    #[arg(long, default_value_t = 10)]
    #[serde(default = "d_cheb")]
    pub cheb_nodes: usize,
    /// Direction (normal coordinates) of the ray written to the CSV.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(default)]
    pub ray: Option<Vec<f64>>,
    /// Bound on transport residuals and direction spread.
    #[arg(long, default_value_t = 1e-3)]
    #[serde(default = "d_tol_had")]
    pub tol: f64,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ElemArgs {
    #[arg(long, default_value_t = 4)]
    #[serde(default = "d_n")]
    pub n: u32,
    /// Complex number such as `2.5`, `1+2i` or `-0.5i`.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: String,
    #[arg(long, allow_hyphen_values = true)]
    pub z: String,
    /// Minkowski square of the evaluation point; 0 is the diagonal.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    #[serde(default)]
    pub q: f64,
    #[arg(long, default_value_t = 1e-3)]
    #[serde(default = "d_tol_had")]
    pub tol: f64,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ContourArgs {
    #[arg(long, value_delimiter = ',', default_value = "1.5,2.3,3.7")]
    #[serde(default = "d_alphas")]
    pub alpha: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
    #[serde(default = "d_ks")]
    pub k: Vec<u32>,
    #[arg(long, value_delimiter = ',', default_value = "0.1,1")]
    #[serde(default = "d_epss")]
    pub eps: Vec<f64>,
    /// Spectral points λ.
    #[arg(long, value_delimiter = ',', default_value = "1.3", allow_hyphen_values = true)]
    #[serde(default = "d_qs")]
    pub q: Vec<f64>,
    /// Opening angle of the contour rays.
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_4)]
    #[serde(default = "d_theta")]
    pub theta: f64,
    #[arg(long, default_value_t = 1e-6)]
    #[serde(default = "d_tol_contour")]
    pub tol: f64,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ResiduesArgs {
    #[arg(long, default_value = "minkowski")]
    #[serde(default = "d_mink")]
    pub metric: String,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(default)]
    pub point: Option<Vec<f64>>,
    #[arg(long, default_value_t = 4)]
    #[serde(default = "d_n")]
    pub n: u32,
    #[arg(long, default_value_t = 1e-2)]
    #[serde(default = "d_eps")]
    pub eps: f64,
    #[arg(long, default_value_t = 0.0)]
    #[serde(default)]
    pub mass: f64,
    /// `minus` for (P − iε)^{−α}, `plus` for (P + iε)^{−α}.
    #[arg(long, default_value = "minus")]
    #[serde(default = "d_minus")]
    pub regulator: String,
    /// Bound on residues that must vanish.
    #[arg(long, default_value_t = 1e-10)]
    #[serde(default = "d_tol_zero")]
    pub tol: f64,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SpectralArgs {
    #[arg(long, default_value = "bump:1.5:0.5")]
    #[serde(default = "d_profile")]
    pub profile: String,
    /// `start:stop:step`.
    #[arg(long = "Lambda-grid", default_value = "10:60:10")]
    #[serde(default = "d_lgrid", rename = "Lambda-grid")]
    pub lambda_grid: String,
    #[arg(long, default_value_t = 4)]
    #[serde(default = "d_n")]
    pub n: u32,
    #[arg(long, default_value_t = 0.0)]
    #[serde(default)]
    pub mass: f64,
    #[arg(long, default_value_t = 1e-2)]
    #[serde(default = "d_eps")]
    pub eps: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    #[serde(default)]
    pub u1: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    #[serde(default)]
    pub u2: f64,
    /// Allowed relative gap at the largest Λ.
    #[arg(long, default_value_t = 0.02)]
    #[serde(default = "d_tol_fit")]
    pub tol: f64,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FitArgs {
    /// `torus:d[:side]` or `sphere:d[:radius]`.
    #[arg(long, default_value = "sphere:3:1")]
    #[serde(default = "d_model")]
    pub model: String,
    #[arg(long, default_value = "bump:1.5:0.5")]
    #[serde(default = "d_profile")]
    pub profile: String,
    #[arg(long, default_value_t = 0.0)]
    #[serde(default)]
    pub mass: f64,
    #[arg(long, default_value_t = 1e-2)]
    #[serde(default = "d_eps")]
    pub eps: f64,
    /// `start:stop:count`.
    #[arg(long = "Lambda", default_value = "10:60:6")]
    #[serde(default = "d_lfit", rename = "Lambda")]
    pub lambda: String,
    /// Number of fitted powers Λⁿ, Λ^{n−2}, Λ^{n−4}.
    #[arg(long, default_value_t = 3)]
    #[serde(default = "d_terms")]
    pub terms: usize,
    /// Relative tolerance on the Λⁿ coefficient.
    #[arg(long, default_value_t = 0.02)]
    #[serde(default = "d_tol_fit")]
    pub tol_leading: f64,
    /// Relative tolerance on the Λ^{n−2} coefficient.
    #[arg(long, default_value_t = 0.05)]
    #[serde(default = "d_tol_sub")]
    pub tol_subleading: f64,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FlowArgs {
    /// `minkowski` or `index-bump[:A[:s]]`.
    #[arg(long, default_value = "minkowski")]
    #[serde(default = "d_mink")]
    pub metric: String,
    #[arg(long, default_value_t = 100)]
    #[serde(default = "d_samples")]
    pub samples: usize,
    /// Samples are drawn from the box |x_i| ≤ half-width.
    #[arg(long, default_value_t = 2.0)]
    #[serde(default = "d_half")]
    pub half_width: f64,
    #[arg(long, default_value_t = 1e-3)]
    #[serde(default = "d_tol_had")]
    pub capture: f64,
    /// Also check that (x, −ξ) swaps the terminal sets.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    #[serde(default = "d_true")]
    pub reversal: bool,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct AcceptArgs {
    /// `full` runs every criterion.
    #[arg(long, default_value = "full")]
    #[serde(default = "d_full")]
    pub suite: String,
    /// Comma-separated subset of criteria.
    #[arg(long, value_delimiter = ',')]
    #[serde(default)]
    pub only: Option<Vec<usize>>,
}

fn d_sphere() -> String {
    "ultrastatic-sphere".into()
}
fn d_mink() -> String {
    "minkowski".into()
}
fn d_dim() -> usize {
    4
}
fn d_n() -> u32 {
    4
}
fn d_order() -> usize {
    2
}
fn d_cheb() -> usize {
    10
}
fn d_tol_curv() -> f64 {
    1e-5
}
fn d_tol_had() -> f64 {
    1e-3
}
fn d_tol_contour() -> f64 {
    1e-6
}
fn d_tol_zero() -> f64 {
    1e-10
}
fn d_tol_fit() -> f64 {
    0.02
}
fn d_tol_sub() -> f64 {
    0.05
}
fn d_alphas() -> Vec<f64> {
    vec![1.5, 2.3, 3.7]
}
fn d_ks() -> Vec<u32> {
    vec![0, 1, 2]
}
fn d_epss() -> Vec<f64> {
    vec![0.1, 1.0]
}
fn d_qs() -> Vec<f64> {
    vec![1.3]
}
fn d_theta() -> f64 {
    std::f64::consts::FRAC_PI_4
}
fn d_eps() -> f64 {
    1e-2
}
fn d_minus() -> String {
    "minus".into()
}
fn d_profile() -> String {
    "bump:1.5:0.5".into()
}
fn d_lgrid() -> String {
    "10:60:10".into()
}
fn d_lfit() -> String {
    "10:60:6".into()
}
fn d_model() -> String {
    "sphere:3:1".into()
}
fn d_terms() -> usize {
    3
}
fn d_samples() -> usize {
    100
}
fn d_half() -> f64 {
    2.0
}
fn d_true() -> bool {
    true
}
fn d_full() -> String {
    "full".into()
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Thread count after the environment override.
    pub fn resolved_threads(&self) -> Result<Option<usize>, CliError> {
        match std::env::var("LSPEC_THREADS") {
            Ok(s) => match s.trim().parse::<usize>() {
                Ok(n) if n > 0 => Ok(Some(n)),
                _ => Err(CliError::Config(format!("LSPEC_THREADS = '{s}' is not a positive integer"))),
            },
            Err(_) => Ok(self.threads),
        }
    }

    /// Checks every field that can be checked without computing.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.threads == Some(0) {
            return Err(cfg("threads must be positive"));
        }
        match &self.command {
            Command::Curvature(a) => {
                positive("tol", a.tol)?;
                metric_spec(&a.metric, a.dim)?;
            }
            Command::Hadamard(a) => {
                positive("tol", a.tol)?;
                metric_spec(&a.metric, a.dim)?;
                if a.order > 3 {
                    return Err(cfg("order must be at most 3"));
                }
                if let Some(r) = &a.ray {
                    if r.len() != a.dim || r.iter().all(|v| *v == 0.0) {
                        return Err(cfg("ray must be a nonzero vector of length dim"));
                    }
                }
            }
            Command::Elem(a) => {
                positive("tol", a.tol)?;
                parse_complex(&a.alpha)?;
                parse_complex(&a.z)?;
            }
            Command::ContourCheck(a) => {
                positive("tol", a.tol)?;
                if a.alpha.is_empty() || a.k.is_empty() || a.eps.is_empty() || a.q.is_empty() {
                    return Err(cfg("contour-check needs at least one value per list"));
                }
                for &e in &a.eps {
                    positive("eps", e)?;
                }
                for &al in &a.alpha {
                    positive("alpha", al)?;
                }
            }
            Command::Residues(a) => {
                positive("tol", a.tol)?;
                positive("eps", a.eps)?;
                metric_spec(&a.metric, a.n as usize)?;
                regulator(&a.regulator)?;
            }
            Command::SpectralAction(a) => {
                positive("tol", a.tol)?;
                positive("eps", a.eps)?;
                profile(&a.profile)?;
                step_grid(&a.lambda_grid)?;
            }
            Command::UltrastaticFit(a) => {
                positive("tol-leading", a.tol_leading)?;
                positive("tol-subleading", a.tol_subleading)?;
                positive("eps", a.eps)?;
                profile(&a.profile)?;
                lspec_core::ultrastatic::parse_model(&a.model).map_err(|e| cfg(&e.to_string()))?;
                count_grid(&a.lambda)?;
                if !(2..=3).contains(&a.terms) {
                    return Err(cfg("terms must be 2 or 3"));
                }
            }
            Command::Flow(a) => {
                positive("half-width", a.half_width)?;
                positive("capture", a.capture)?;
                let name = a.metric.split(':').next().unwrap_or("");
                if !matches!(name, "minkowski" | "index-bump") {
                    return Err(cfg("flow supports minkowski and index-bump"));
                }
                metric_spec(&a.metric, 4)?;
            }
            Command::Accept(a) => {
                if a.suite != "full" {
                    return Err(cfg(&format!("unknown suite '{}'", a.suite)));
                }
                if let Some(only) = &a.only {
                    if only.iter().any(|c| !(1..=12).contains(c)) {
                        return Err(cfg("criteria are numbered 1 to 12"));
                    }
                }
            }
        }
        Ok(())
    }
}

fn cfg(msg: &str) -> CliError {
    CliError::Config(msg.to_string())
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(cfg(&format!("{name} must be positive, got {v}")))
    }
}

fn metric_spec(spec: &str, n: usize) -> Result<(), CliError> {
    lspec_core::geomkit::MetricField::parse(spec, n).map(|_| ()).map_err(|e| cfg(&e.to_string()))
}

fn profile(spec: &str) -> Result<(), CliError> {
    lspec_core::specpowers::SchwartzProfile::parse(spec).map(|_| ()).map_err(|e| cfg(&e.to_string()))
}

pub fn regulator(s: &str) -> Result<lspec_core::contour::Regulator, CliError> {
    match s {
        "minus" => Ok(lspec_core::contour::Regulator::Minus),
        "plus" => Ok(lspec_core::contour::Regulator::Plus),
        _ => Err(cfg(&format!("regulator must be 'minus' or 'plus', got '{s}'"))),
    }
}

/// Parses `a`, `bi`, `a+bi`, `a-bi` (also with `j`).
pub fn parse_complex(s: &str) -> Result<C64, CliError> {
    let bad = || cfg(&format!("cannot read '{s}' as a complex number"));
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix('i').or_else(|| t.strip_suffix('j')) else {
        return t.parse::<f64>().map(|r| C64::new(r, 0.0)).map_err(|_| bad());
    };
    // Split at the last sign that is not part of an exponent or the leading sign.
    let bytes = body.as_bytes();
    let mut split = None;
    for i in (1..bytes.len()).rev() {
        if (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E') {
            split = Some(i);
            break;
        }
    }
    let imag = |p: &str| -> Result<f64, CliError> {
        match p {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => p.parse::<f64>().map_err(|_| bad()),
        }
    };
    match split {
        Some(i) => {
            let re = body[..i].parse::<f64>().map_err(|_| bad())?;
            Ok(C64::new(re, imag(&body[i..])?))
        }
        None => Ok(C64::new(0.0, imag(body)?)),
    }
}

fn three(spec: &str) -> Result<(f64, f64, f64), CliError> {
    let p: Vec<&str> = spec.split(':').collect();
    let bad = || cfg(&format!("grid '{spec}' must look like a:b:c"));
    if p.len() != 3 {
        return Err(bad());
    }
    let v: Vec<f64> = p.iter().map(|s| s.parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
    Ok((v[0], v[1], v[2]))
}

/// `start:stop:step`, both ends included.
pub fn step_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let (a, b, h) = three(spec)?;
    if !(a > 0.0 && b >= a && h > 0.0) {
        return Err(cfg(&format!("grid '{spec}' needs 0 < start ≤ stop and step > 0")));
    }
    let n = ((b - a) / h + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| a + h * i as f64).collect())
}

/// `start:stop:count`, evenly spaced.
pub fn count_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let (a, b, c) = three(spec)?;
    if !(a > 0.0 && b > a && c >= 2.0 && c.fract() == 0.0) {
        return Err(cfg(&format!("grid '{spec}' needs 0 < start < stop and an integer count ≥ 2")));
    }
    let n = c as usize;
    Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect())
}
