//! Geodesics and the exponential map.
//!
//! The Jacobian of exp_x is integrated alongside the geodesic through the
//! variational (Jacobi) equations, using ∂Γ from the exact metric jet.

use nalgebra::DMatrix;

use super::curvature::christoffel;
use super::MetricField;
use crate::error::{Error, Result};
use crate::num::ode::{integrate, Control, OdeOptions};

fn escape_guard(metric: &MetricField, x: &[f64]) -> Result<()> {
    if x.iter().any(|v| !v.is_finite()) || !metric.patch.contains(x) {
        return Err(Error::Escape(format!("geodesic left the patch near {x:?}")));
    }
    Ok(())
}

fn geodesic_rhs(metric: &MetricField, y: &[f64], dy: &mut [f64]) -> Result<()> {
    let n = metric.dim;
    let x = &y[..n];
    escape_guard(metric, x)?;
    let v = &y[n..2 * n];
    let jet = metric.jet_unchecked(x);
    let ginv = jet.inverse();
    let (gam, _) = christoffel(&jet, &ginv);
    for a in 0..n {
        dy[a] = v[a];
        let mut s = 0.0;
        for b in 0..n {
            for c in 0..n {
                s += gam[(a * n + b) * n + c] * v[b] * v[c];
            }
        }
        dy[n + a] = -s;
    }
    Ok(())
}

/// State layout: x, v, X (n×n, row a = component, column i = seed), V.
///
/// Only ∂_eΓ^a_{bc}v^b v^c enters, so v is contracted before anything else:
/// ∂_eΓ^a_{bc}v^b v^c = g^{ad}(∂_eΓ_{dbc}v^b v^c) − (g^{−1}∂_e g)^a_q Γ^q_{bc}v^b v^c.
fn variational_rhs(metric: &MetricField, y: &[f64], dy: &mut [f64]) -> Result<()> {
    let n = metric.dim;
    let x = &y[..n];
    escape_guard(metric, x)?;
    let v = &y[n..2 * n];
    let xm = &y[2 * n..2 * n + n * n];
    let vm = &y[2 * n + n * n..];
    let jet = metric.jet_unchecked(x);
    let ginv = jet.inverse();
    let (gam, _) = christoffel(&jet, &ginv);
    let g = |a: usize, b: usize, c: usize| gam[(a * n + b) * n + c];
    let mut gvv = vec![0.0; n];
    for a in 0..n {
        dy[a] = v[a];
        let mut s = 0.0;
        for b in 0..n {
            for c in 0..n {
                s += g(a, b, c) * v[b] * v[c];
            }
        }
        gvv[a] = s;
        dy[n + a] = -s;
    }
    // (∂_e ∂_b g_dc v^b) and friends contracted with v.
    let mut dgvv = vec![0.0; n * n];
    let mut lowvv = vec![0.0; n];
    for e in 0..n {
        for (d, lv) in lowvv.iter_mut().enumerate() {
            let mut s = 0.0;
            for b in 0..n {
                let mut t = 0.0;
                for c in 0..n {
                    t += (2.0 * jet.dd(e, b, d, c) - jet.dd(e, d, b, c)) * v[c];
                }
                s += t * v[b];
            }
            *lv = 0.5 * s;
        }
        // ∂_e g · Γvv
        let mut dg_gvv = vec![0.0; n];
        for (p, out) in dg_gvv.iter_mut().enumerate() {
            *out = (0..n).map(|q| jet.d(e, p, q) * gvv[q]).sum();
        }
        for a in 0..n {
            let mut s = 0.0;
            for d in 0..n {
                s += ginv[(a, d)] * (lowvv[d] - dg_gvv[d]);
            }
            dgvv[e * n + a] = s;
        }
    }
    // Γ^a_{bc} v^b as an n×n matrix.
    let mut gv = vec![0.0; n * n];
    for a in 0..n {
        for c in 0..n {
            gv[a * n + c] = (0..n).map(|b| g(a, b, c) * v[b]).sum();
        }
    }
    for a in 0..n {
        for i in 0..n {
            dy[2 * n + a * n + i] = vm[a * n + i];
            let mut s = 0.0;
            for e in 0..n {
                s += dgvv[e * n + a] * xm[e * n + i];
            }
            for c in 0..n {
                s += 2.0 * gv[a * n + c] * vm[c * n + i];
            }
            dy[2 * n + n * n + a * n + i] = -s;
        }
    }
    Ok(())
}

fn check_input(metric: &MetricField, x: &[f64], v: &[f64]) -> Result<()> {
    if x.len() != metric.dim || v.len() != metric.dim {
        return Err(Error::Dimension("point and vector must match the metric dimension".into()));
    }
    if !metric.patch.contains(x) {
        return Err(Error::Domain(format!("base point {x:?} outside the patch")));
    }
    Ok(())
}

/// exp_x(v): the geodesic with initial velocity v at parameter 1.
pub fn exp_map(metric: &MetricField, x: &[f64], v: &[f64], opts: OdeOptions) -> Result<Vec<f64>> {
    check_input(metric, x, v)?;
    let n = metric.dim;
    let mut y = [x, v].concat();
    integrate(|_, y: &[f64], d: &mut [f64]| geodesic_rhs(metric, y, d), 0.0, 1.0, &mut y, opts, |_, _| Ok(Control::Continue))?;
    escape_guard(metric, &y[..n])?;
    Ok(y[..n].to_vec())
}

/// exp_x(v) together with its Jacobian ∂exp_x(v)/∂v.
pub fn exp_map_jac(metric: &MetricField, x: &[f64], v: &[f64], opts: OdeOptions) -> Result<(Vec<f64>, DMatrix<f64>)> {
    check_input(metric, x, v)?;
    let n = metric.dim;
    let mut y = vec![0.0; 2 * n + 2 * n * n];
    y[..n].copy_from_slice(x);
    y[n..2 * n].copy_from_slice(v);
    for i in 0..n {
        y[2 * n + n * n + i * n + i] = 1.0;
    }
    integrate(|_, y: &[f64], d: &mut [f64]| variational_rhs(metric, y, d), 0.0, 1.0, &mut y, opts, |_, _| Ok(Control::Continue))?;
    escape_guard(metric, &y[..n])?;
    let jac = DMatrix::from_row_slice(n, n, &y[2 * n..2 * n + n * n]);
    Ok((y[..n].to_vec(), jac))
}

#[derive(Clone, Debug)]
pub struct GeodesicSample {
    pub s: f64,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

/// The geodesic sampled at the accepted integrator steps on [0, 1].
pub fn geodesic_path(metric: &MetricField, x: &[f64], v: &[f64], opts: OdeOptions) -> Result<Vec<GeodesicSample>> {
    check_input(metric, x, v)?;
    let n = metric.dim;
    let mut y = [x, v].concat();
    let mut out = vec![GeodesicSample { s: 0.0, x: x.to_vec(), v: v.to_vec() }];
    integrate(
        |_, y: &[f64], d: &mut [f64]| geodesic_rhs(metric, y, d),
        0.0,
        1.0,
        &mut y,
        opts,
        |s, y| {
            out.push(GeodesicSample { s, x: y[..n].to_vec(), v: y[n..].to_vec() });
            Ok(Control::Continue)
        },
    )?;
    Ok(out)
}
