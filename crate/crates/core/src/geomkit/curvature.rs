//! Christoffel symbols and curvature from exact second-order jets of g.
//!
//! Internally R_{abcd} follows MTW, R^a_{bcd} = ∂_cΓ^a_{db} − ∂_dΓ^a_{cb} + …,
//! with Ric_{bd} = R^a_{bad}. The exported Riemann tensor is −R^{MTW}, the
//! sign for which normal coordinates read g̃_{ij} = η_{ij} + ⅓R_{ikjl}y^k y^l.
//! Ricci and scalar curvature are the MTW ones, so ℝ×S³ of radius r has
//! R_g = −6/r² in signature (+,−,−,−).

use nalgebra::DMatrix;

use super::MetricField;
use crate::error::Result;
use crate::num::Jet2;

/// g, ∂_e g and ∂_e∂_f g at a point, flattened.
#[derive(Clone, Debug)]
pub struct MetricJet {
    pub n: usize,
    /// g[i*n + j]
    pub g: Vec<f64>,
    /// dg[(e*n + i)*n + j] = ∂_e g_ij
    pub dg: Vec<f64>,
    /// ddg[((e*n + f)*n + i)*n + j] = ∂_e∂_f g_ij
    pub ddg: Vec<f64>,
}

impl MetricJet {
    pub fn from_jets(n: usize, comps: &[Jet2]) -> Self {
        let mut g = vec![0.0; n * n];
        let mut dg = vec![0.0; n * n * n];
        let mut ddg = vec![0.0; n * n * n * n];
        for i in 0..n {
            for j in 0..n {
                let c = &comps[i * n + j];
                g[i * n + j] = c.v;
                for e in 0..n {
                    dg[(e * n + i) * n + j] = c.g[e];
                    for f in 0..n {
                        ddg[((e * n + f) * n + i) * n + j] = c.h[e][f];
                    }
                }
            }
        }
        MetricJet { n, g, dg, ddg }
    }

    pub fn metric(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n, self.n, &self.g)
    }

    #[inline]
    pub fn d(&self, e: usize, i: usize, j: usize) -> f64 {
        self.dg[(e * self.n + i) * self.n + j]
    }

    #[inline]
    pub fn dd(&self, e: usize, f: usize, i: usize, j: usize) -> f64 {
        self.ddg[((e * self.n + f) * self.n + i) * self.n + j]
    }

    pub fn inverse(&self) -> DMatrix<f64> {
        self.metric().try_inverse().expect("Lorentzian metric is invertible")
    }
}

/// Γ^a_{bc} as gam[(a*n + b)*n + c], and the lowered Γ_{dbc}.
pub fn christoffel(jet: &MetricJet, ginv: &DMatrix<f64>) -> (Vec<f64>, Vec<f64>) {
    let n = jet.n;
    let mut low = vec![0.0; n * n * n];
    for d in 0..n {
        for b in 0..n {
            for c in 0..n {
                low[(d * n + b) * n + c] = 0.5 * (jet.d(b, d, c) + jet.d(c, d, b) - jet.d(d, b, c));
            }
        }
    }
    let mut up = vec![0.0; n * n * n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let mut s = 0.0;
                for d in 0..n {
                    s += ginv[(a, d)] * low[(d * n + b) * n + c];
                }
                up[(a * n + b) * n + c] = s;
            }
        }
    }
    (up, low)
}

#[derive(Clone, Debug)]
pub struct CurvaturePack {
    pub dim: usize,
    /// R_{ikjl} at riemann[((i*n + k)*n + j)*n + l], sign as in the module docs.
    pub riemann: Vec<f64>,
    /// Ric_{kl}
    pub ricci: Vec<f64>,
    pub scalar: f64,
}

impl CurvaturePack {
    #[inline]
    pub fn r(&self, i: usize, k: usize, j: usize, l: usize) -> f64 {
        let n = self.dim;
        self.riemann[((i * n + k) * n + j) * n + l]
    }

    #[inline]
    pub fn ric(&self, k: usize, l: usize) -> f64 {
        self.ricci[k * self.dim + l]
    }

    /// Largest violation of antisymmetry and the first Bianchi identity.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for k in 0..n {
                for j in 0..n {
                    for l in 0..n {
                        let r = self.r(i, k, j, l);
                        worst = worst.max((r + self.r(k, i, j, l)).abs());
                        worst = worst.max((r + self.r(i, k, l, j)).abs());
                        worst = worst.max((r - self.r(j, l, i, k)).abs());
                        worst = worst.max((r + self.r(i, j, l, k) + self.r(i, l, k, j)).abs());
                    }
                }
            }
        }
        worst
    }

    /// Components in the basis whose μ-th vector is column μ of `e`.
    pub fn in_frame(&self, e: &DMatrix<f64>) -> CurvaturePack {
        let n = self.dim;
        // Contract one index at a time: n⁵ instead of n⁸.
        let mut cur = self.riemann.clone();
        for slot in 0..4 {
            let stride = n.pow(3 - slot as u32);
            let mut next = vec![0.0; cur.len()];
            for (idx, out) in next.iter_mut().enumerate() {
                let m = (idx / stride) % n;
                let base = idx - m * stride;
                *out = (0..n).map(|a| cur[base + a * stride] * e[(a, m)]).sum();
            }
            cur = next;
        }
        let mut ricci = vec![0.0; n * n];
        for k in 0..n {
            for l in 0..n {
                ricci[k * n + l] = (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).map(|(a, b)| self.ric(a, b) * e[(a, k)] * e[(b, l)]).sum();
            }
        }
        CurvaturePack { dim: n, riemann: cur, ricci, scalar: self.scalar }
    }
}

/// Curvature at x from exact derivatives of g.
pub fn curvature(metric: &MetricField, x: &[f64]) -> Result<CurvaturePack> {
    metric.g(x)?;
    let jet = metric.jet(x)?;
    Ok(curvature_from_jet(&jet))
}

pub fn curvature_from_jet(jet: &MetricJet) -> CurvaturePack {
    let n = jet.n;
    let ginv = jet.inverse();
    let (gam, _) = christoffel(jet, &ginv);
    let gm = |a: usize, b: usize| jet.g[a * n + b];
    let up = |a: usize, b: usize, c: usize| gam[(a * n + b) * n + c];
    // MTW R_{abcd}.
    let mut mtw = vec![0.0; n * n * n * n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut v = 0.5 * (jet.dd(b, c, a, d) + jet.dd(a, d, b, c) - jet.dd(a, c, b, d) - jet.dd(b, d, a, c));
                    for e in 0..n {
                        for f in 0..n {
                            v += gm(e, f) * (up(e, b, c) * up(f, a, d) - up(e, b, d) * up(f, a, c));
                        }
                    }
                    mtw[((a * n + b) * n + c) * n + d] = v;
                }
            }
        }
    }
    let mut ricci = vec![0.0; n * n];
    for b in 0..n {
        for d in 0..n {
            let mut s = 0.0;
            for a in 0..n {
                for c in 0..n {
                    s += ginv[(a, c)] * mtw[((a * n + b) * n + c) * n + d];
                }
            }
            ricci[b * n + d] = s;
        }
    }
    let mut scalar = 0.0;
    for b in 0..n {
        for d in 0..n {
            scalar += ginv[(b, d)] * ricci[b * n + d];
        }
    }
    let riemann = mtw.iter().map(|v| -v).collect();
    CurvaturePack { dim: n, riemann, ricci, scalar }
}
