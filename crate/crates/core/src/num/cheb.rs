//! Tensor-product Chebyshev–Lobatto grids on a centred box [−a, a]ⁿ with
//! spectral differentiation and barycentric interpolation.

use std::f64::consts::PI;

#[derive(Clone, Debug)]
pub struct ChebGrid {
    pub dim: usize,
    pub p: usize,
    pub half_width: f64,
    pub nodes: Vec<f64>,
    /// Row-major p×p differentiation matrix on [−a, a].
    dmat: Vec<f64>,
    bary: Vec<f64>,
}

impl ChebGrid {
    pub fn new(dim: usize, p: usize, half_width: f64) -> Self {
        assert!(p >= 3, "need at least three Chebyshev points");
        let m = p - 1;
        let nodes: Vec<f64> = (0..p).map(|j| half_width * (PI * j as f64 / m as f64).cos()).collect();
        let c = |j: usize| if j == 0 || j == m { 2.0 } else { 1.0 };
        let sgn = |j: usize| if j % 2 == 0 { 1.0 } else { -1.0 };
        let mut dmat = vec![0.0; p * p];
        for i in 0..p {
            let mut row = 0.0;
            for j in 0..p {
                if i != j {
                    let v = c(i) / c(j) * sgn(i + j) / (nodes[i] - nodes[j]);
                    dmat[i * p + j] = v;
                    row += v;
                }
            }
            // Negative-sum trick for the diagonal.
            dmat[i * p + i] = -row;
        }
        let bary = (0..p).map(|j| sgn(j) / c(j)).collect();
        ChebGrid { dim, p, half_width, nodes, dmat, bary }
    }

    pub fn len(&self) -> usize {
        self.p.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinates of flat index `idx` (axis 0 varies slowest).
    pub fn point(&self, idx: usize) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        let mut r = idx;
        for ax in (0..self.dim).rev() {
            y[ax] = self.nodes[r % self.p];
            r /= self.p;
        }
        y
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    /// Flat-index stride of `axis`.
    pub fn stride(&self, axis: usize) -> usize {
        self.p.pow((self.dim - 1 - axis) as u32)
    }

    /// ∂f/∂y_axis on the grid.
    pub fn diff(&self, f: &[f64], axis: usize) -> Vec<f64> {
        let p = self.p;
        let st = self.stride(axis);
        let mut out = vec![0.0; f.len()];
        let outer = f.len() / (st * p);
        for o in 0..outer {
            for inner in 0..st {
                let base = o * st * p + inner;
                for i in 0..p {
                    let mut s = 0.0;
                    for j in 0..p {
                        s += self.dmat[i * p + j] * f[base + j * st];
                    }
                    out[base + i * st] = s;
                }
            }
        }
        out
    }

    /// Barycentric weights of the 1-D interpolant at x.
    pub fn weights(&self, x: f64) -> Vec<f64> {
        let mut w = vec![0.0; self.p];
        for j in 0..self.p {
            if x == self.nodes[j] {
                w[j] = 1.0;
                return w;
            }
        }
        let mut s = 0.0;
        for j in 0..self.p {
            let v = self.bary[j] / (x - self.nodes[j]);
            w[j] = v;
            s += v;
        }
        for v in &mut w {
            *v /= s;
        }
        w
    }

    /// Tensor interpolation of grid data at y.
    pub fn interp(&self, f: &[f64], y: &[f64]) -> f64 {
        let p = self.p;
        // Contract the fastest axis first.
        let contract = |src: &[f64], w: &[f64]| -> Vec<f64> {
            src.chunks_exact(p).map(|c| c.iter().zip(w).map(|(a, b)| a * b).sum()).collect()
        };
        let last = self.dim - 1;
        let mut cur = contract(f, &self.weights(y[last]));
        for ax in (0..last).rev() {
            cur = contract(&cur, &self.weights(y[ax]));
        }
        cur[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn differentiates_smooth_function() {
        let g = ChebGrid::new(2, 14, 0.5);
        let f: Vec<f64> = g.points().iter().map(|y| (y[0] + 2.0 * y[1]).sin()).collect();
        let d1 = g.diff(&f, 1);
        for (i, y) in g.points().iter().enumerate() {
            assert!((d1[i] - 2.0 * (y[0] + 2.0 * y[1]).cos()).abs() < 1e-10);
        }
        let v = g.interp(&f, &[0.123, -0.31]);
        assert!((v - (0.123f64 - 0.62).sin()).abs() < 1e-12);
    }
}
