//! Sampled metric tables: a regular grid of g_{μν} samples.
//!
//! Each node stores the n(n+1)/2 upper-triangle components (i ≤ j, row-major);
//! nodes are row-major with axis 0 slowest. Text files look like
//!
//! ```text
//! dim 2
//! shape 8 8
//! lower -1 -1
//! spacing 0.25 0.25
//! values
//! 1 0 -1
//! ...
//! ```
//!
//! Binary files start with the 16-byte magic `LSPEC-METRIC\0\0\0\0`, then
//! u32 dim, u32 shape[dim], f64 lower[dim], f64 spacing[dim] and the f64
//! values, all little-endian.

use std::path::Path;

use super::MetricField;
use super::Patch;
use crate::error::{Error, Result};
use crate::num::Scalar;

pub const MAGIC: &[u8; 16] = b"LSPEC-METRIC\0\0\0\0";

/// Interpolation stencil width per axis (degree 5).
const STENCIL: usize = 6;

#[derive(Clone, Debug, PartialEq)]
pub struct MetricTable {
    pub dim: usize,
    pub shape: Vec<usize>,
    pub lower: Vec<f64>,
    pub spacing: Vec<f64>,
    pub values: Vec<f64>,
}

fn ncomp(n: usize) -> usize {
    n * (n + 1) / 2
}

impl MetricTable {
    pub fn new(dim: usize, shape: Vec<usize>, lower: Vec<f64>, spacing: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if shape.len() != dim || lower.len() != dim || spacing.len() != dim {
            return Err(Error::Format("shape/lower/spacing must have one entry per axis".into()));
        }
        if shape.iter().any(|&s| s < STENCIL) {
            return Err(Error::Format(format!("every axis needs at least {STENCIL} samples")));
        }
        if spacing.iter().any(|&h| !(h > 0.0)) {
            return Err(Error::Format("spacing must be positive".into()));
        }
        let nodes: usize = shape.iter().product();
        if values.len() != nodes * ncomp(dim) {
            return Err(Error::Format(format!(
                "expected {} values ({} nodes × {} components), found {}",
                nodes * ncomp(dim),
                nodes,
                ncomp(dim),
                values.len()
            )));
        }
        Ok(MetricTable { dim, shape, lower, spacing, values })
    }

    /// Samples an analytic metric on a grid.
    pub fn sample(metric: &MetricField, lower: Vec<f64>, spacing: Vec<f64>, shape: Vec<usize>) -> Result<Self> {
        let n = metric.dim;
        let nodes: usize = shape.iter().product();
        let mut values = Vec::with_capacity(nodes * ncomp(n));
        let mut idx = vec![0usize; n];
        for _ in 0..nodes {
            let x: Vec<f64> = (0..n).map(|a| lower[a] + idx[a] as f64 * spacing[a]).collect();
            let g = metric.components(&x);
            for i in 0..n {
                for j in i..n {
                    values.push(g[i * n + j]);
                }
            }
            for a in (0..n).rev() {
                idx[a] += 1;
                if idx[a] < shape[a] {
                    break;
                }
                idx[a] = 0;
            }
        }
        MetricTable::new(n, shape, lower, spacing, values)
    }

    pub fn patch(&self) -> Patch {
        let lo = self.lower.clone();
        let hi = (0..self.dim).map(|a| self.lower[a] + (self.shape[a] - 1) as f64 * self.spacing[a]).collect();
        Patch { lo, hi }
    }

    /// Tensor-product Lagrange interpolation on the 6 nearest nodes per axis.
    pub fn interpolate<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let n = self.dim;
        let nc = ncomp(n);
        let mut starts = vec![0usize; n];
        let mut weights: Vec<[S; STENCIL]> = Vec::with_capacity(n);
        for a in 0..n {
            let u = (x[a].re() - self.lower[a]) / self.spacing[a];
            let i0 = (u.floor() as i64 - 2).clamp(0, (self.shape[a] - STENCIL) as i64) as usize;
            starts[a] = i0;
            let s = (x[a] - self.lower[a]) / self.spacing[a] - i0 as f64;
            let mut w = [S::cst(0.0); STENCIL];
            for (j, wj) in w.iter_mut().enumerate() {
                let mut p = S::cst(1.0);
                for m in 0..STENCIL {
                    if m != j {
                        p = p * (s - m as f64) / (j as f64 - m as f64);
                    }
                }
                *wj = p;
            }
            weights.push(w);
        }
        let mut acc = vec![S::cst(0.0); nc];
        let total = STENCIL.pow(n as u32);
        let mut loc = vec![0usize; n];
        for _ in 0..total {
            let mut w = S::cst(1.0);
            let mut flat = 0usize;
            for a in 0..n {
                w = w * weights[a][loc[a]];
                flat = flat * self.shape[a] + starts[a] + loc[a];
            }
            let base = flat * nc;
            for (c, v) in acc.iter_mut().enumerate() {
                *v = *v + w * self.values[base + c];
            }
            for a in (0..n).rev() {
                loc[a] += 1;
                if loc[a] < STENCIL {
                    break;
                }
                loc[a] = 0;
            }
        }
        let mut g = vec![S::cst(0.0); n * n];
        let mut c = 0;
        for i in 0..n {
            for j in i..n {
                g[i * n + j] = acc[c];
                g[j * n + i] = acc[c];
                c += 1;
            }
        }
        g
    }

    pub fn to_text(&self) -> String {
        let join = |v: &[f64]| v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(" ");
        let mut s = format!(
            "dim {}\nshape {}\nlower {}\nspacing {}\nvalues\n",
            self.dim,
            self.shape.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" "),
            join(&self.lower),
            join(&self.spacing)
        );
        for row in self.values.chunks(ncomp(self.dim)) {
            s.push_str(&join(row));
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut dim = None;
        let mut shape = None;
        let mut lower = None;
        let mut spacing = None;
        let mut values = Vec::new();
        let mut in_values = false;
        let floats = |it: std::str::SplitWhitespace| -> Result<Vec<f64>> {
            it.map(|t| t.parse::<f64>().map_err(|_| Error::Format(format!("bad number '{t}'")))).collect()
        };
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if in_values {
                values.extend(floats(line.split_whitespace())?);
                continue;
            }
            let mut it = line.split_whitespace();
            let key = it.next().unwrap_or("");
            match key {
                "dim" => dim = Some(it.next().and_then(|t| t.parse::<usize>().ok()).ok_or_else(|| Error::Format("bad dim".into()))?),
                "shape" => {
                    shape = Some(
                        it.map(|t| t.parse::<usize>().map_err(|_| Error::Format(format!("bad shape entry '{t}'"))))
                            .collect::<Result<Vec<_>>>()?,
                    )
                }
                "lower" => lower = Some(floats(it)?),
                "spacing" => spacing = Some(floats(it)?),
                "values" => in_values = true,
                other => return Err(Error::Format(format!("unknown table key '{other}'"))),
            }
        }
        let missing = |k: &str| Error::Format(format!("table is missing '{k}'"));
        MetricTable::new(
            dim.ok_or_else(|| missing("dim"))?,
            shape.ok_or_else(|| missing("shape"))?,
            lower.ok_or_else(|| missing("lower"))?,
            spacing.ok_or_else(|| missing("spacing"))?,
            values,
        )
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut b = Vec::with_capacity(16 + 4 + self.dim * 20 + self.values.len() * 8);
        b.extend_from_slice(MAGIC);
        b.extend_from_slice(&(self.dim as u32).to_le_bytes());
        for &s in &self.shape {
            b.extend_from_slice(&(s as u32).to_le_bytes());
        }
        for v in self.lower.iter().chain(&self.spacing).chain(&self.values) {
            b.extend_from_slice(&v.to_le_bytes());
        }
        b
    }

    pub fn from_bytes(b: &[u8]) -> Result<Self> {
        if b.len() < 20 || &b[..16] != MAGIC {
            return Err(Error::Format("missing LSPEC-METRIC magic header".into()));
        }
        let short = || Error::Format("binary table truncated".into());
        let u32_at = |o: usize| -> Result<u32> { Ok(u32::from_le_bytes(b.get(o..o + 4).ok_or_else(short)?.try_into().unwrap())) };
        let f64_at = |o: usize| -> Result<f64> { Ok(f64::from_le_bytes(b.get(o..o + 8).ok_or_else(short)?.try_into().unwrap())) };
        let dim = u32_at(16)? as usize;
        if dim == 0 || dim > crate::num::MAXD {
            return Err(Error::Format(format!("bad dimension {dim}")));
        }
        let mut off = 20;
        let mut shape = Vec::with_capacity(dim);
        for _ in 0..dim {
            shape.push(u32_at(off)? as usize);
            off += 4;
        }
        let mut read = |count: usize| -> Result<Vec<f64>> {
            let mut v = Vec::with_capacity(count);
            for _ in 0..count {
                v.push(f64_at(off)?);
                off += 8;
            }
            Ok(v)
        };
        let lower = read(dim)?;
        let spacing = read(dim)?;
        let nodes: usize = shape.iter().product();
        let values = read(nodes * ncomp(dim))?;
        if off != b.len() {
            return Err(Error::Format(format!("{} trailing bytes after the values", b.len() - off)));
        }
        MetricTable::new(dim, shape, lower, spacing, values)
    }

    /// Reads a binary table if the magic header is present, text otherwise.
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::Format(format!("cannot read {}: {e}", path.display())))?;
        if bytes.starts_with(MAGIC) {
            MetricTable::from_bytes(&bytes)
        } else {
            let text = String::from_utf8(bytes).map_err(|_| Error::Format("table is neither binary nor UTF-8 text".into()))?;
            MetricTable::from_text(&text)
        }
    }
}
