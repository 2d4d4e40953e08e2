//! Lorentzian metric fields, curvature, geodesics and normal charts.
//!
//! Metrics are written once against [`Scalar`] and evaluated on second-order
//! jets, so curvature uses exact derivatives of g. Signature is (+,−,…,−)
//! with coordinate 0 timelike and future-increasing.

mod chart;
mod curvature;
mod geodesic;
mod table;

pub use chart::{eta, chart_ode, metric_taylor2, normal_chart, normal_chart_with_radius, taylor2_from_curvature, Frame, NormalChart, Taylor2};
pub use curvature::{christoffel, curvature, curvature_from_jet, CurvaturePack, MetricJet};
pub use geodesic::{exp_map, exp_map_jac, geodesic_path, GeodesicSample};
pub use table::MetricTable;

use nalgebra::DMatrix;
use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::num::{Jet2, Scalar, MAXD};

/// Axis-aligned open box.
#[derive(Clone, Debug, PartialEq)]
pub struct Patch {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Patch {
    pub fn cube(n: usize, half: f64) -> Self {
        Patch { lo: vec![-half; n], hi: vec![half; n] }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (l, h))| *v > *l && *v < *h)
    }

    /// Smallest side length.
    pub fn scale(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).fold(f64::INFINITY, f64::min)
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(l, h)| 0.5 * (l + h)).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum MetricKind {
    Minkowski,
    /// Flat ℝ × T^{n−1}; locally Minkowski.
    UltrastaticTorus { side: f64 },
    /// dt² − r²·(round S^{n−1} metric in hyperspherical angles).
    UltrastaticSphere { radius: f64 },
    /// dt² − e^{2Ht}|dx|².
    Expanding { rate: f64 },
    /// dt² − n(r)²|dx|² with n = 1 + A e^{−r²/s²}: a lens with trapped rays.
    IndexBump { amplitude: f64, width: f64 },
    /// Sampled components with local degree-5 Lagrange interpolation.
    Table(Arc<MetricTable>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricField {
    pub dim: usize,
    pub kind: MetricKind,
    pub patch: Patch,
}

impl MetricField {
    fn check_dim(n: usize) -> Result<()> {
        if !(2..=MAXD).contains(&n) {
            return Err(Error::Dimension(format!("dimension {n} outside 2..={MAXD}")));
        }
        Ok(())
    }

    pub fn minkowski(n: usize) -> Result<Self> {
        Self::check_dim(n)?;
        Ok(MetricField { dim: n, kind: MetricKind::Minkowski, patch: Patch::cube(n, 10.0) })
    }

    pub fn ultrastatic_torus(n: usize, side: f64) -> Result<Self> {
        Self::check_dim(n)?;
        if side <= 0.0 {
            return Err(Error::Domain("torus side must be positive".into()));
        }
        Ok(MetricField { dim: n, kind: MetricKind::UltrastaticTorus { side }, patch: Patch::cube(n, side / 2.0) })
    }

    /// Angles ψ₁, …, ψ_{n−2} ∈ (0.2, π−0.2) and ψ_{n−1} ∈ (−π, π).
    pub fn ultrastatic_sphere(n: usize, radius: f64) -> Result<Self> {
        Self::check_dim(n)?;
        if n < 3 {
            return Err(Error::Dimension("the sphere model needs n ≥ 3".into()));
        }
        if radius <= 0.0 {
            return Err(Error::Domain("sphere radius must be positive".into()));
        }
        let mut lo = vec![-1.0];
        let mut hi = vec![1.0];
        for _ in 1..n - 1 {
            lo.push(0.2);
            hi.push(PI - 0.2);
        }
        lo.push(-PI);
        hi.push(PI);
        Ok(MetricField { dim: n, kind: MetricKind::UltrastaticSphere { radius }, patch: Patch { lo, hi } })
    }

    pub fn expanding(n: usize, rate: f64) -> Result<Self> {
        Self::check_dim(n)?;
        let mut lo = vec![-5.0; n];
        let mut hi = vec![5.0; n];
        lo[0] = -1.0;
        hi[0] = 1.0;
        Ok(MetricField { dim: n, kind: MetricKind::Expanding { rate }, patch: Patch { lo, hi } })
    }

    pub fn index_bump(n: usize, amplitude: f64, width: f64) -> Result<Self> {
        Self::check_dim(n)?;
        if width <= 0.0 || amplitude <= -1.0 {
            return Err(Error::Domain("need width > 0 and amplitude > −1".into()));
        }
        Ok(MetricField { dim: n, kind: MetricKind::IndexBump { amplitude, width }, patch: Patch::cube(n, 1e6) })
    }

    pub fn from_table(table: MetricTable) -> Result<Self> {
        let n = table.dim;
        Self::check_dim(n)?;
        let patch = table.patch();
        Ok(MetricField { dim: n, kind: MetricKind::Table(Arc::new(table)), patch })
    }

    /// Parses `name[:param…]` with names minkowski, ultrastatic-torus,
    /// ultrastatic-sphere, expanding and index-bump; anything else is
    /// read as a table file.
    pub fn parse(spec: &str, n: usize) -> Result<Self> {
        let parts: Vec<&str> = spec.split(':').collect();
        let num = |i: usize, default: f64| -> Result<f64> {
            match parts.get(i) {
                None => Ok(default),
                Some(s) => s.parse::<f64>().map_err(|_| Error::Format(format!("bad parameter '{s}' in metric '{spec}'"))),
            }
        };
        match parts[0] {
            "minkowski" => Self::minkowski(n),
            "ultrastatic-torus" | "torus" => Self::ultrastatic_torus(n, num(1, 2.0 * PI)?),
            "ultrastatic-sphere" | "sphere" => Self::ultrastatic_sphere(n, num(1, 1.0)?),
            "expanding" => Self::expanding(n, num(1, 1.0)?),
            "index-bump" => Self::index_bump(n, num(1, 4.0)?, num(2, 1.0)?),
            _ => {
                let table = MetricTable::load(std::path::Path::new(spec))?;
                if table.dim != n {
                    return Err(Error::Dimension(format!("table has dimension {}, expected {n}", table.dim)));
                }
                Self::from_table(table)
            }
        }
    }

    /// Short name for reports.
    pub fn name(&self) -> String {
        match &self.kind {
            MetricKind::Minkowski => "minkowski".into(),
            MetricKind::UltrastaticTorus { side } => format!("ultrastatic-torus:{side}"),
            MetricKind::UltrastaticSphere { radius } => format!("ultrastatic-sphere:{radius}"),
            MetricKind::Expanding { rate } => format!("expanding:{rate}"),
            MetricKind::IndexBump { amplitude, width } => format!("index-bump:{amplitude}:{width}"),
            MetricKind::Table(_) => "table".into(),
        }
    }

    /// Default base point: the patch centre (the origin for unbounded models).
    pub fn default_point(&self) -> Vec<f64> {
        self.patch.center()
    }

    /// Highest derivative order computed exactly (jets); higher orders are
    /// not used anywhere.
    pub fn deriv_order(&self) -> usize {
        2
    }

    /// Whether the model is flat with zero curvature identically.
    pub fn is_flat(&self) -> bool {
        matches!(self.kind, MetricKind::Minkowski | MetricKind::UltrastaticTorus { .. })
    }

    /// Components g_{μν}(x), row-major, in any scalar type.
    pub fn components<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let n = self.dim;
        let mut g = vec![S::cst(0.0); n * n];
        match &self.kind {
            MetricKind::Minkowski | MetricKind::UltrastaticTorus { .. } => {
                g[0] = S::cst(1.0);
                for i in 1..n {
                    g[i * n + i] = S::cst(-1.0);
                }
            }
            MetricKind::UltrastaticSphere { radius } => {
                g[0] = S::cst(1.0);
                let mut w = S::cst(radius * radius);
                for i in 1..n {
                    g[i * n + i] = -w;
                    w = w * x[i].sin().sq();
                }
            }
            MetricKind::Expanding { rate } => {
                g[0] = S::cst(1.0);
                let a2 = (x[0] * (2.0 * rate)).exp();
                for i in 1..n {
                    g[i * n + i] = -a2;
                }
            }
            MetricKind::IndexBump { amplitude, width } => {
                g[0] = S::cst(1.0);
                let mut r2 = S::cst(0.0);
                for xi in &x[1..] {
                    r2 = r2 + xi.sq();
                }
                let idx = (-(r2 / (width * width))).exp() * *amplitude + 1.0;
                let n2 = idx.sq();
                for i in 1..n {
                    g[i * n + i] = -n2;
                }
            }
            MetricKind::Table(t) => return t.interpolate(x),
        }
        g
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::Dimension(format!("point has {} coordinates, metric has {}", x.len(), self.dim)));
        }
        if !self.patch.contains(x) {
            return Err(Error::Domain(format!("point {x:?} outside the patch")));
        }
        Ok(())
    }

    /// g(x) with patch and signature checks.
    pub fn g(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check_point(x)?;
        let g = DMatrix::from_row_slice(self.dim, self.dim, &self.components(x));
        check_signature(&g)?;
        Ok(g)
    }

    /// g(x) without the signature check (inner loops).
    pub fn g_unchecked(&self, x: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.components(x))
    }

    /// g, ∂g and ∂²g at x.
    pub fn jet(&self, x: &[f64]) -> Result<MetricJet> {
        self.check_point(x)?;
        Ok(self.jet_unchecked(x))
    }

    pub fn jet_unchecked(&self, x: &[f64]) -> MetricJet {
        let seeded = Jet2::seed(x);
        MetricJet::from_jets(self.dim, &self.components(&seeded))
    }
}

/// Signature (1, n−1) from the eigenvalue signs.
pub fn check_signature(g: &DMatrix<f64>) -> Result<()> {
    let n = g.nrows();
    let asym = (g - g.transpose()).amax();
    if asym > 1e-12 * g.amax().max(1.0) {
        return Err(Error::Signature(format!("metric not symmetric (|g − gᵀ| = {asym:.3e})")));
    }
    let eig = nalgebra::SymmetricEigen::new(g.clone()).eigenvalues;
    let pos = eig.iter().filter(|&&e| e > 0.0).count();
    let neg = eig.iter().filter(|&&e| e < 0.0).count();
    if pos != 1 || neg != n - 1 {
        return Err(Error::Signature(format!("signature ({pos}, {neg}) is not (1, {})", n - 1)));
    }
    Ok(())
}
