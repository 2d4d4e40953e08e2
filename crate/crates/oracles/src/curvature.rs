//! Curvature by nested fourth-order central differences.

/// A metric as a closure returning g_{μν}(x) row-major.
pub type MetricFn<'a> = &'a dyn Fn(&[f64]) -> Vec<f64>;

fn d4<F: Fn(f64) -> Vec<f64>>(f: F, h: f64) -> Vec<f64> {
    let (a, b, c, d) = (f(2.0 * h), f(h), f(-h), f(-2.0 * h));
    (0..a.len()).map(|i| (-a[i] + 8.0 * b[i] - 8.0 * c[i] + d[i]) / (12.0 * h)).collect()
}

fn inverse(n: usize, m: &[f64]) -> Vec<f64> {
    // Gauss–Jordan with partial pivoting.
    let mut a = m.to_vec();
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    for col in 0..n {
        let piv = (col..n).max_by(|&p, &q| a[p * n + col].abs().total_cmp(&a[q * n + col].abs())).unwrap();
        for k in 0..n {
            a.swap(col * n + k, piv * n + k);
            inv.swap(col * n + k, piv * n + k);
        }
        let p = a[col * n + col];
        for k in 0..n {
            a[col * n + k] /= p;
            inv[col * n + k] /= p;
        }
        for r in 0..n {
            if r != col {
                let f = a[r * n + col];
                for k in 0..n {
                    a[r * n + k] -= f * a[col * n + k];
                    inv[r * n + k] -= f * inv[col * n + k];
                }
            }
        }
    }
    inv
}

/// Γ^a_{bc} at x, index (a*n + b)*n + c, from differences of g.
pub fn christoffel_fd(g: MetricFn, x: &[f64], h: f64) -> Vec<f64> {
    let n = x.len();
    let mut dg = Vec::with_capacity(n);
    for e in 0..n {
        dg.push(d4(
            |s| {
                let mut y = x.to_vec();
                y[e] += s;
                g(&y)
            },
            h,
        ));
    }
    let gi = inverse(n, &g(x));
    let mut out = vec![0.0; n * n * n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let mut s = 0.0;
                for d in 0..n {
                    s += 0.5 * gi[a * n + d] * (dg[b][d * n + c] + dg[c][d * n + b] - dg[d][b * n + c]);
                }
                out[(a * n + b) * n + c] = s;
            }
        }
    }
    out
}

/// Ricci tensor and scalar curvature with R^a_{bcd} = ∂_cΓ^a_{db} − ∂_dΓ^a_{cb}
/// + Γ^a_{ce}Γ^e_{db} − Γ^a_{de}Γ^e_{cb} and Ric_{bd} = R^a_{bad}.
pub fn ricci_scalar_fd(g: MetricFn, x: &[f64], h_outer: f64, h_inner: f64) -> (Vec<f64>, f64) {
    let n = x.len();
    let gam = christoffel_fd(g, x, h_inner);
    let mut dgam = Vec::with_capacity(n);
    for e in 0..n {
        dgam.push(d4(
            |s| {
                let mut y = x.to_vec();
                y[e] += s;
                christoffel_fd(g, &y, h_inner)
            },
            h_outer,
        ));
    }
    let gm = |a: usize, b: usize, c: usize| gam[(a * n + b) * n + c];
    let dgm = |e: usize, a: usize, b: usize, c: usize| dgam[e][(a * n + b) * n + c];
    let mut ric = vec![0.0; n * n];
    for b in 0..n {
        for d in 0..n {
            let mut s = 0.0;
            for a in 0..n {
                // c = a
                s += dgm(a, a, d, b) - dgm(d, a, a, b);
                for e in 0..n {
                    s += gm(a, a, e) * gm(e, d, b) - gm(a, d, e) * gm(e, a, b);
                }
            }
            ric[b * n + d] = s;
        }
    }
    let gi = inverse(n, &g(x));
    let scalar = (0..n * n).map(|i| gi[i] * ric[i]).sum();
    (ric, scalar)
}
