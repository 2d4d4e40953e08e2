//! Orthonormal frames, normal charts and the quadratic jet of g̃.

use nalgebra::{DMatrix, DVector};

use super::curvature::CurvaturePack;
use super::geodesic::{exp_map, exp_map_jac};
use super::MetricField;
use crate::error::{Error, Result};
use crate::num::ode::OdeOptions;

/// Time-oriented orthonormal frame: columns e_0, …, e_{n−1} with
/// g(e_μ, e_ν) = η_{μν} and e_0 future-directed.
#[derive(Clone, Debug)]
pub struct Frame {
    pub base: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl Frame {
    /// Gram–Schmidt against g(base), time axis first.
    pub fn build(metric: &MetricField, base: &[f64]) -> Result<Frame> {
        let g = metric.g(base)?;
        let n = metric.dim;
        let ip = |a: &DVector<f64>, b: &DVector<f64>| (a.transpose() * &g * b)[(0, 0)];
        let mut cols: Vec<DVector<f64>> = Vec::with_capacity(n);
        let mut t = DVector::from_element(n, 0.0);
        t[0] = 1.0;
        if ip(&t, &t) <= 0.0 {
            // ∂_t is not timelike here; use the positive eigenvector instead.
            let eig = nalgebra::SymmetricEigen::new(g.clone());
            let k = (0..n).find(|&i| eig.eigenvalues[i] > 0.0).ok_or_else(|| Error::Signature("no timelike direction".into()))?;
            t = eig.eigenvectors.column(k).into_owned();
        }
        if t[0] < 0.0 {
            t = -t;
        }
        let nt = ip(&t, &t).sqrt();
        cols.push(t / nt);
        let eta = |m: usize| if m == 0 { 1.0 } else { -1.0 };
        for i in 1..n {
            let mut best: Option<DVector<f64>> = None;
            // Try coordinate axes in order until one gives a spacelike remainder.
            for axis in (1..n).chain(std::iter::once(0)) {
                let mut v = DVector::from_element(n, 0.0);
                v[axis] = 1.0;
                for (m, e) in cols.iter().enumerate() {
                    let c = ip(&v, e) * eta(m);
                    v -= e * c;
                }
                let nn = ip(&v, &v);
                if nn < -1e-10 {
                    best = Some(v / (-nn).sqrt());
                    break;
                }
            }
            let _ = i;
            cols.push(best.ok_or_else(|| Error::Signature("Gram–Schmidt found no spacelike complement".into()))?);
        }
        Ok(Frame { base: base.to_vec(), vectors: DMatrix::from_columns(&cols) })
    }

    /// max |g(e_μ, e_ν) − η_{μν}|.
    pub fn orthonormality_defect(&self, metric: &MetricField) -> Result<f64> {
        let g = metric.g(&self.base)?;
        let m = self.vectors.transpose() * g * &self.vectors;
        Ok((m - eta(self.vectors.nrows())).amax())
    }
}

pub fn eta(n: usize) -> DMatrix<f64> {
    let mut e = DMatrix::from_element(n, n, 0.0);
    e[(0, 0)] = 1.0;
    for i in 1..n {
        e[(i, i)] = -1.0;
    }
    e
}

/// Geodesic normal coordinates y ↦ exp_base(y^μ e_μ).
#[derive(Clone, Debug)]
pub struct NormalChart {
    pub metric: MetricField,
    pub base: Vec<f64>,
    pub frame: Frame,
    pub radius: f64,
    pub ode: OdeOptions,
}

pub fn chart_ode() -> OdeOptions {
    OdeOptions { atol: 1e-13, rtol: 1e-13, h0: 1e-2, max_steps: 200_000 }
}

impl NormalChart {
    fn check(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.metric.dim {
            return Err(Error::Dimension("normal coordinate has the wrong length".into()));
        }
        let r = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r > self.radius * (1.0 + 1e-12) {
            return Err(Error::Domain(format!("|y| = {r} exceeds the chart radius {}", self.radius)));
        }
        Ok(())
    }

    fn velocity(&self, y: &[f64]) -> Vec<f64> {
        (&self.frame.vectors * DVector::from_column_slice(y)).iter().copied().collect()
    }

    /// The manifold point with normal coordinates y.
    pub fn point(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.check(y)?;
        exp_map(&self.metric, &self.base, &self.velocity(y), self.ode)
    }

    /// The point and ∂x/∂y.
    pub fn point_jac(&self, y: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
        self.check(y)?;
        let (p, x) = exp_map_jac(&self.metric, &self.base, &self.velocity(y), self.ode)?;
        Ok((p, x * &self.frame.vectors))
    }

    /// g̃_{ij}(y) = g(∂_i, ∂_j) in normal coordinates.
    pub fn pulled_metric(&self, y: &[f64]) -> Result<DMatrix<f64>> {
        if y.iter().all(|v| *v == 0.0) {
            return Ok(eta(self.metric.dim));
        }
        let (p, j) = self.point_jac(y)?;
        let g = self.metric.g_unchecked(&p);
        let m = j.transpose() * g * &j;
        Ok((&m + m.transpose()) * 0.5)
    }

    /// |g̃(y)|^{1/2}.
    pub fn density(&self, y: &[f64]) -> Result<f64> {
        Ok(self.pulled_metric(y)?.determinant().abs().sqrt())
    }

    /// max_j |g̃_{jk}(y)y^k − η_{jk}y^k|.
    pub fn radial_defect(&self, y: &[f64]) -> Result<f64> {
        let g = self.pulled_metric(y)?;
        let yv = DVector::from_column_slice(y);
        Ok((&g * &yv - eta(self.metric.dim) * &yv).amax())
    }

    /// Normal coordinates of p by damped Newton on y ↦ exp(y), starting from
    /// the flat guess E^{−1}(p − base).
    pub fn inverse(&self, p: &[f64]) -> Result<Vec<f64>> {
        let n = self.metric.dim;
        let einv = self.frame.vectors.clone().try_inverse().ok_or_else(|| Error::Conditioning("singular frame".into()))?;
        let target = DVector::from_column_slice(p);
        let mut y = &einv * (&target - DVector::from_column_slice(&self.base));
        let scale = y.norm().max(1e-3);
        let resid = |y: &DVector<f64>| -> Result<(DVector<f64>, DMatrix<f64>)> {
            let (q, j) = self.point_jac(y.as_slice())?;
            Ok((&target - DVector::from_vec(q), j))
        };
        let (mut r, mut j) = resid(&y)?;
        for _ in 0..50 {
            if r.norm() <= 1e-12 * scale.max(1.0) {
                return Ok(y.iter().copied().collect());
            }
            let step = j.clone().lu().solve(&r).ok_or_else(|| Error::Conditioning("singular exponential Jacobian".into()))?;
            let mut lam = 1.0;
            loop {
                let cand = &y + &step * lam;
                if cand.norm() <= self.radius * (1.0 + 1e-12) {
                    if let Ok((rc, jc)) = resid(&cand) {
                        if rc.norm() < r.norm() {
                            y = cand;
                            r = rc;
                            j = jc;
                            break;
                        }
                    }
                }
                lam *= 0.5;
                if lam < 1e-6 {
                    return Err(Error::Convergence("inverse exponential: damping failed".into()));
                }
            }
        }
        if r.norm() <= 1e-9 * scale.max(1.0) {
            return Ok(y.iter().copied().take(n).collect());
        }
        Err(Error::Convergence(format!("inverse exponential stalled at residual {:.3e}", r.norm())))
    }
}

/// Chart at `base` with the default radius 0.1 × patch scale.
pub fn normal_chart(metric: &MetricField, base: &[f64]) -> Result<NormalChart> {
    normal_chart_with_radius(metric, base, 0.1 * metric.patch.scale())
}

/// Chart with a requested radius, halved (up to eight times) until the
/// exponential Jacobian is well conditioned on a sample of directions.
pub fn normal_chart_with_radius(metric: &MetricField, base: &[f64], radius: f64) -> Result<NormalChart> {
    if !(radius > 0.0) {
        return Err(Error::Radius("chart radius must be positive".into()));
    }
    let frame = Frame::build(metric, base)?;
    let n = metric.dim;
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    for i in 0..n {
        for s in [1.0, -1.0] {
            let mut d = vec![0.0; n];
            d[i] = s;
            dirs.push(d);
        }
        for j in i + 1..n {
            for (si, sj) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                let mut d = vec![0.0; n];
                d[i] = si / 2f64.sqrt();
                d[j] = sj / 2f64.sqrt();
                dirs.push(d);
            }
        }
    }
    let det0 = frame.vectors.determinant();
    let mut r = radius;
    for _ in 0..=8 {
        let chart = NormalChart { metric: metric.clone(), base: base.to_vec(), frame: frame.clone(), radius: r, ode: chart_ode() };
        let ok = dirs.iter().all(|d| {
            let y: Vec<f64> = d.iter().map(|v| v * r).collect();
            match chart.point_jac(&y) {
                Ok((_, j)) => {
                    let sv = j.singular_values();
                    let (mx, mn) = (sv.max(), sv.min());
                    j.determinant() * det0 > 0.0 && mn > 1e-3 * mx
                }
                Err(_) => false,
            }
        });
        if ok {
            return Ok(chart);
        }
        r *= 0.5;
    }
    Err(Error::Radius(format!("no injective normal chart down to radius {r:.3e}")))
}

/// Coefficients T_{ijkl}, symmetric in (k, l), with
/// g̃_{ij}(y) − η_{ij} ≈ Σ_{kl} T_{ijkl} y^k y^l.
#[derive(Clone, Debug)]
pub struct Taylor2 {
    pub dim: usize,
    pub coeffs: Vec<f64>,
    pub residual: f64,
    pub step: f64,
}

impl Taylor2 {
    #[inline]
    pub fn t(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let n = self.dim;
        self.coeffs[((i * n + j) * n + k) * n + l]
    }

    pub fn max_diff(&self, other: &Taylor2) -> f64 {
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// ⅓ R_{ikjl} symmetrized in (k, l).
pub fn taylor2_from_curvature(c: &CurvaturePack) -> Taylor2 {
    let n = c.dim;
    let mut coeffs = vec![0.0; n * n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    coeffs[((i * n + j) * n + k) * n + l] = (c.r(i, k, j, l) + c.r(i, l, j, k)) / 6.0;
                }
            }
        }
    }
    Taylor2 { dim: n, coeffs, residual: 0.0, step: 0.0 }
}

/// Least-squares fit of the even part of g̃ − η on a symmetric stencil of
/// step δ = min(5e−3, radius/4); odd orders cancel, so the fit error is O(δ²).
pub fn metric_taylor2(chart: &NormalChart) -> Result<Taylor2> {
    let n = chart.metric.dim;
    let d = (5e-3f64).min(chart.radius / 4.0);
    let mut pts: Vec<Vec<f64>> = Vec::new();
    for k in 0..n {
        let mut y = vec![0.0; n];
        y[k] = d;
        pts.push(y);
        for l in k + 1..n {
            for s in [1.0, -1.0] {
                let mut y = vec![0.0; n];
                y[k] = d;
                y[l] = s * d;
                pts.push(y);
            }
        }
    }
    let monos: Vec<(usize, usize)> = (0..n).flat_map(|k| (k..n).map(move |l| (k, l))).collect();
    let a = DMatrix::from_fn(pts.len(), monos.len(), |p, m| {
        let (k, l) = monos[m];
        pts[p][k] * pts[p][l]
    });
    let e = eta(n);
    let mut rhs = vec![DMatrix::from_element(n, n, 0.0); pts.len()];
    for (p, y) in pts.iter().enumerate() {
        let ym: Vec<f64> = y.iter().map(|v| -v).collect();
        rhs[p] = (chart.pulled_metric(y)? + chart.pulled_metric(&ym)?) * 0.5 - &e;
    }
    let svd = a.clone().svd(true, true);
    let mut coeffs = vec![0.0; n * n * n * n];
    let mut residual: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let b = DVector::from_fn(pts.len(), |p, _| rhs[p][(i, j)]);
            let c = svd.solve(&b, 1e-14).map_err(|e| Error::Fit(e.to_string()))?;
            residual = residual.max((&a * &c - &b).amax());
            scale = scale.max(b.amax());
            for (m, &(k, l)) in monos.iter().enumerate() {
                if k == l {
                    coeffs[((i * n + j) * n + k) * n + l] = c[m];
                } else {
                    coeffs[((i * n + j) * n + k) * n + l] = 0.5 * c[m];
                    coeffs[((i * n + j) * n + l) * n + k] = 0.5 * c[m];
                }
            }
        }
    }
    if residual > 1e-3 * scale + 1e-12 {
        return Err(Error::Fit(format!("quadratic fit residual {residual:.3e} against data scale {scale:.3e}")));
    }
    Ok(Taylor2 { dim: n, coeffs, residual, step: d })
}
