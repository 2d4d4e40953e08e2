//! Brute-force spectra of the flat torus and the round sphere.

use std::collections::BTreeMap;

/// Levels |k|² (k ∈ ℤᵈ, |k|² ≤ max_norm2) with multiplicities by direct
/// lattice enumeration.
pub fn lattice_levels(d: usize, max_norm2: i64) -> BTreeMap<i64, u64> {
    let r = (max_norm2 as f64).sqrt().floor() as i64;
    let mut out = BTreeMap::new();
    let mut k = vec![-r; d];
    loop {
        let s: i64 = k.iter().map(|v| v * v).sum();
        if s <= max_norm2 {
            *out.entry(s).or_insert(0) += 1;
        }
        let mut a = 0;
        loop {
            if a == d {
                return out;
            }
            k[a] += 1;
            if k[a] <= r {
                break;
            }
            k[a] = -r;
            a += 1;
        }
    }
}

/// Dimension of degree-ℓ spherical harmonics on S^d by counting homogeneous
/// polynomials: dim P_ℓ(ℝ^{d+1}) − dim P_{ℓ−2}(ℝ^{d+1}).
pub fn harmonic_dimension(d: usize, l: u64) -> u64 {
    fn binom(n: u64, k: u64) -> u64 {
        let mut r: u128 = 1;
        for i in 0..k {
            r = r * (n - i) as u128 / (i + 1) as u128;
        }
        r as u64
    }
    let p = |deg: u64| binom(deg + d as u64, d as u64);
    if l < 2 {
        p(l)
    } else {
        p(l) - p(l - 2)
    }
}
