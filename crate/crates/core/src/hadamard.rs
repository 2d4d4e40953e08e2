//! Hadamard coefficients u_k from the transport hierarchy
//! 2k u_k + h u_k + 2ρ u_k + 2P u_{k−1} = 0 in a normal chart.
//!
//! With D = |g̃|^{1/4} and h = ρ log|g̃|^{1/2} = 2ρ log D, the radial ODE has
//! the integrating-factor solution
//! u_k(y) = −D(y)^{−1} ∫₀¹ σ^{k−1} D(σy) (P u_{k−1})(σy) dσ.
//! Everything lives on a tensor Chebyshev grid over the box |y_i| ≤ a,
//! a = radius/√n, so P is applied by spectral differentiation and values
//! at σy come from barycentric interpolation.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geomkit::NormalChart;
use crate::num::cheb::ChebGrid;
use crate::num::quad::gauss_legendre_on;
use crate::num::richardson3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HadamardConfig {
    /// Highest k (at most 3).
    pub order: usize,
    /// Chebyshev nodes per axis.
    pub cheb_nodes: usize,
    /// Gauss–Legendre nodes for the σ-integral.
    pub gl_nodes: usize,
    /// Richardson base step as a fraction of the chart radius.
    pub richardson_fraction: f64,
}

impl Default for HadamardConfig {
    fn default() -> Self {
        HadamardConfig { order: 2, cheb_nodes: 10, gl_nodes: 16, richardson_fraction: 0.05 }
    }
}

/// |g̃(y)|^{−1/4}, with |g̃(0)| = 1 by construction of the chart.
pub fn u0(chart: &NormalChart, y: &[f64]) -> Result<f64> {
    Ok(chart.pulled_metric(y)?.determinant().abs().powf(-0.25))
}

/// h(y) = t d/dt log|g̃(tv)|^{1/2} at y = tv, by a fourth-order central
/// difference of the density along the ray.
pub fn h_function(chart: &NormalChart, y: &[f64]) -> Result<f64> {
    let r: f64 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    if r == 0.0 {
        return Ok(0.0);
    }
    if r > chart.radius {
        return Err(Error::Domain(format!("|y| = {r} exceeds the chart radius")));
    }
    let d = 1e-3 * chart.radius;
    let dir: Vec<f64> = y.iter().map(|v| v / r).collect();
    let at = |t: f64| -> Result<f64> {
        let p: Vec<f64> = dir.iter().map(|v| v * t).collect();
        Ok(chart.density(&p)?.ln())
    };
    let (t2, t1) = (r + 2.0 * d, r + d);
    let (s1, s2) = (r - d, r - 2.0 * d);
    let deriv = if t2 <= chart.radius {
        (-at(t2)? + 8.0 * at(t1)? - 8.0 * at(s1)? + at(s2)?) / (12.0 * d)
    } else {
        // One-sided near the chart boundary.
        (3.0 * at(r)? - 4.0 * at(s1)? + at(s2)?) / (2.0 * d)
    };
    Ok(r * deriv)
}

/// The grid, metric data and coefficient tables of a Hadamard solve.
#[derive(Clone, Debug)]
pub struct HadamardSequence {
    pub chart: NormalChart,
    pub config: HadamardConfig,
    pub grid: ChebGrid,
    /// D = |g̃|^{1/4} on the grid.
    pub dens_quarter: Vec<f64>,
    /// √|g̃| g̃^{jk} on the grid, index [j*n + k][node].
    weighted_inverse: Vec<Vec<f64>>,
    /// u_k on the grid.
    pub values: Vec<Vec<f64>>,
    /// u_k(0) by Richardson extrapolation along rays, averaged over directions.
    pub diag: Vec<f64>,
    /// u_k(0) straight from the grid interpolant.
    pub diag_grid: Vec<f64>,
    /// Max transport residual on interior nodes, k = 1..=N.
    pub residuals: Vec<f64>,
    /// Relative spread of the per-direction extrapolated u_k(0).
    pub direction_spread: Vec<f64>,
    pub directions: Vec<Vec<f64>>,
}

/// Directions (±e_i ± e_j)/√2, i < j: 2n(n−1) of them.
pub fn default_directions(n: usize) -> Vec<Vec<f64>> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for (a, b) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                let mut d = vec![0.0; n];
                d[i] = a * s;
                d[j] = b * s;
                out.push(d);
            }
        }
    }
    out
}

impl HadamardSequence {
    pub fn build(chart: &NormalChart, config: HadamardConfig) -> Result<Self> {
        if config.order > 3 {
            return Err(Error::Domain(format!("order {} exceeds the cap of 3", config.order)));
        }
        if config.cheb_nodes < 6 {
            return Err(Error::Grid(format!("{} Chebyshev nodes cannot carry second derivatives", config.cheb_nodes)));
        }
        if config.gl_nodes < 4 {
            return Err(Error::Grid("need at least 4 Gauss–Legendre nodes".into()));
        }
        let n = chart.metric.dim;
        let half = chart.radius / (n as f64).sqrt() * (1.0 - 1e-9);
        let grid = ChebGrid::new(n, config.cheb_nodes, half);
        let pts = grid.points();
        let metrics: Vec<DMatrix<f64>> = pts.par_iter().map(|y| chart.pulled_metric(y)).collect::<Result<_>>()?;
        let mut dens_quarter = Vec::with_capacity(pts.len());
        let mut weighted_inverse = vec![vec![0.0; pts.len()]; n * n];
        for (idx, g) in metrics.iter().enumerate() {
            let det = g.determinant().abs();
            dens_quarter.push(det.powf(0.25));
            let gi = g.clone().try_inverse().ok_or_else(|| Error::Conditioning("singular pulled metric".into()))?;
            let sq = det.sqrt();
            for j in 0..n {
                for k in 0..n {
                    weighted_inverse[j * n + k][idx] = sq * gi[(j, k)];
                }
            }
        }
        let mut seq = HadamardSequence {
            chart: chart.clone(),
            config,
            grid,
            dens_quarter,
            weighted_inverse,
            values: Vec::new(),
            diag: Vec::new(),
            diag_grid: Vec::new(),
            residuals: Vec::new(),
            direction_spread: Vec::new(),
            directions: default_directions(n),
        };
        let u0: Vec<f64> = seq.dens_quarter.iter().map(|d| 1.0 / d).collect();
        seq.values.push(u0);
        for k in 1..=config.order {
            let next = seq.transport_step(k)?;
            seq.values.push(next);
        }
        for k in 0..=config.order {
            let (d, spread) = seq.extrapolate_diag(k)?;
            seq.diag.push(d);
            seq.direction_spread.push(spread);
            let z = vec![0.0; n];
            seq.diag_grid.push(seq.grid.interp(&seq.values[k], &z));
        }
        // u_0(0) = 1 exactly.
        seq.diag[0] = 1.0;
        for k in 1..=config.order {
            seq.residuals.push(seq.transport_residual(k));
        }
        Ok(seq)
    }

    /// P f = |g̃|^{−1/2} ∂_j(√|g̃| g̃^{jk} ∂_k f) on the grid.
    pub fn apply_p(&self, f: &[f64]) -> Vec<f64> {
        let n = self.chart.metric.dim;
        let df: Vec<Vec<f64>> = (0..n).map(|k| self.grid.diff(f, k)).collect();
        let mut out = vec![0.0; f.len()];
        for j in 0..n {
            let mut w = vec![0.0; f.len()];
            for k in 0..n {
                let wi = &self.weighted_inverse[j * n + k];
                for i in 0..f.len() {
                    w[i] += wi[i] * df[k][i];
                }
            }
            let dw = self.grid.diff(&w, j);
            for i in 0..f.len() {
                out[i] += dw[i];
            }
        }
        for i in 0..f.len() {
            out[i] /= self.dens_quarter[i] * self.dens_quarter[i];
        }
        out
    }

    fn transport_integrand(&self, k: usize) -> Vec<f64> {
        let pu = self.apply_p(&self.values[k - 1]);
        pu.iter().zip(&self.dens_quarter).map(|(p, d)| p * d).collect()
    }

    fn transport_at(&self, k: usize, integrand: &[f64], y: &[f64], nodes: &(Vec<f64>, Vec<f64>)) -> f64 {
        let (sig, w) = nodes;
        let mut s = 0.0;
        for q in 0..sig.len() {
            let p: Vec<f64> = y.iter().map(|v| v * sig[q]).collect();
            s += w[q] * sig[q].powi(k as i32 - 1) * self.grid.interp(integrand, &p);
        }
        let d = self.grid.interp(&self.dens_quarter, y);
        -s / d
    }

    /// u_k on the grid from u_{k−1}.
    pub fn transport_step(&self, k: usize) -> Result<Vec<f64>> {
        if k == 0 || k > self.values.len() {
            return Err(Error::Domain(format!("transport step {k} needs u_{}", k.saturating_sub(1))));
        }
        let integrand = self.transport_integrand(k);
        let nodes = gauss_legendre_on(self.config.gl_nodes, 0.0, 1.0);
        let pts = self.grid.points();
        let out: Vec<f64> = pts.par_iter().map(|y| self.transport_at(k, &integrand, y, &nodes)).collect();
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::Singularity(format!("non-finite u_{k} on the grid")));
        }
        Ok(out)
    }

    /// u_k at an arbitrary y in the grid box.
    pub fn u(&self, k: usize, y: &[f64]) -> Result<f64> {
        if k >= self.values.len() {
            return Err(Error::Domain(format!("u_{k} was not computed")));
        }
        if y.iter().any(|v| v.abs() > self.grid.half_width) {
            return Err(Error::Domain("point outside the Hadamard grid box".into()));
        }
        Ok(self.grid.interp(&self.values[k], y))
    }

    /// u_k(0) by Richardson on t ∈ {r, r/2, r/4}, evaluating the transport
    /// integral directly at the ray points; also checks the σ-quadrature
    /// against a coarser rule.
    fn extrapolate_diag(&self, k: usize) -> Result<(f64, f64)> {
        let r = self.config.richardson_fraction * self.chart.radius;
        let integrand = if k > 0 { Some(self.transport_integrand(k)) } else { None };
        let nodes = gauss_legendre_on(self.config.gl_nodes, 0.0, 1.0);
        let coarse = gauss_legendre_on(self.config.gl_nodes - 2, 0.0, 1.0);
        let eval = |y: &[f64], nd: &(Vec<f64>, Vec<f64>)| -> f64 {
            match &integrand {
                None => 1.0 / self.grid.interp(&self.dens_quarter, y),
                Some(f) => self.transport_at(k, f, y, nd),
            }
        };
        let mut per_dir = Vec::with_capacity(self.directions.len());
        for d in &self.directions {
            let at = |t: f64| -> Vec<f64> { d.iter().map(|v| v * t).collect() };
            let f0 = eval(&at(r), &nodes);
            let f1 = eval(&at(r / 2.0), &nodes);
            let f2 = eval(&at(r / 4.0), &nodes);
            let c = eval(&at(r), &coarse);
            if (c - f0).abs() > 1e-6 * f0.abs().max(1.0) {
                return Err(Error::Singularity(format!("σ-quadrature for u_{k} unconverged ({c} vs {f0})")));
            }
            per_dir.push(richardson3(f0, f1, f2));
        }
        let mean = per_dir.iter().sum::<f64>() / per_dir.len() as f64;
        let spread = per_dir.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max) / mean.abs().max(1.0);
        Ok((mean, spread))
    }

    /// max over interior nodes of |2k u_k + h u_k + 2ρu_k + 2P u_{k−1}| / max(1, |u_k|).
    pub fn transport_residual(&self, k: usize) -> f64 {
        let n = self.chart.metric.dim;
        let pts = self.grid.points();
        let uk = &self.values[k];
        let pu = self.apply_p(&self.values[k - 1]);
        let logd: Vec<f64> = self.dens_quarter.iter().map(|d| d.ln()).collect();
        let du: Vec<Vec<f64>> = (0..n).map(|a| self.grid.diff(uk, a)).collect();
        let dl: Vec<Vec<f64>> = (0..n).map(|a| self.grid.diff(&logd, a)).collect();
        let p = self.grid.p;
        let mut worst: f64 = 0.0;
        for (i, y) in pts.iter().enumerate() {
            // Skip the box faces.
            let mut r = i;
            let mut interior = true;
            for _ in 0..n {
                let c = r % p;
                if c == 0 || c == p - 1 {
                    interior = false;
                }
                r /= p;
            }
            if !interior {
                continue;
            }
            let rho_u: f64 = (0..n).map(|a| y[a] * du[a][i]).sum();
            let h: f64 = 2.0 * (0..n).map(|a| y[a] * dl[a][i]).sum::<f64>();
            let res = 2.0 * k as f64 * uk[i] + h * uk[i] + 2.0 * rho_u + 2.0 * pu[i];
            worst = worst.max(res.abs() / uk[i].abs().max(1.0));
        }
        worst
    }

    /// b^j η_{jk} y^k with b^j = |g̃|^{−1/2} g̃^{jk} ∂_k|g̃|^{1/2}, from the grid.
    pub fn b_dot_y(&self, y: &[f64]) -> f64 {
        let n = self.chart.metric.dim;
        let dens: Vec<f64> = self.dens_quarter.iter().map(|d| d * d).collect();
        let mut bj = vec![0.0; n];
        let ddens: Vec<f64> = (0..n).map(|k| self.grid.interp(&self.grid.diff(&dens, k), y)).collect();
        let sq = self.grid.interp(&dens, y);
        for (j, b) in bj.iter_mut().enumerate() {
            for (k, dd) in ddens.iter().enumerate() {
                // weighted_inverse = √|g̃| g̃^{jk}
                let gi = self.grid.interp(&self.weighted_inverse[j * n + k], y) / sq;
                *b += gi * dd / sq;
            }
        }
        (0..n).map(|j| bj[j] * if j == 0 { y[0] } else { -y[j] }).sum()
    }

    /// u_k along the ray t·dir for t in `ts`.
    pub fn along_ray(&self, dir: &[f64], ts: &[f64]) -> Result<Vec<Vec<f64>>> {
        ts.iter()
            .map(|&t| {
                let y: Vec<f64> = dir.iter().map(|v| v * t).collect();
                (0..self.values.len()).map(|k| self.u(k, &y)).collect()
            })
            .collect()
    }
}

/// Convenience wrapper with default grid settings.
pub fn hadamard_sequence(chart: &NormalChart, order: usize) -> Result<HadamardSequence> {
    HadamardSequence::build(chart, HadamardConfig { order, ..HadamardConfig::default() })
}
