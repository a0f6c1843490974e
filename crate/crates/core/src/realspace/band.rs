//! Symmetric band storage, Sylvester inertia counts and banded LU.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

/// Accumulates symmetric entries before fixing the bandwidth.
#[derive(Debug, Default, Clone)]
pub struct SymBuilder {
    n: usize,
    entries: BTreeMap<(usize, usize), f64>,
}

impl SymBuilder {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            entries: BTreeMap::new(),
        }
    }

    /// Adds `v` to (i, j) and, for i ≠ j, to (j, i).
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.n && j < self.n);
        let key = if i >= j { (i, j) } else { (j, i) };
        *self.entries.entry(key).or_insert(0.0) += v;
    }

    pub fn build(self) -> SymBand {
        let kd = self.entries.keys().map(|&(i, j)| i - j).max().unwrap_or(0);
        let mut band = SymBand::zeros(self.n, kd);
        for ((i, j), v) in self.entries {
            band.data[i * (kd + 1) + (i - j)] = v;
        }
        band
    }
}

/// Symmetric matrix with half-bandwidth `kd`, lower triangle stored by row.
#[derive(Debug, Clone, PartialEq)]
pub struct SymBand {
    n: usize,
    kd: usize,
    data: Vec<f64>,
}

impl SymBand {
    pub fn zeros(n: usize, kd: usize) -> Self {
        Self {
            n,
            kd,
            data: vec![0.0; n * (kd + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.kd
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if i - j > self.kd {
            0.0
        } else {
            self.data[i * (self.kd + 1) + (i - j)]
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let lo = i.saturating_sub(self.kd);
            for j in lo..i {
                let a = self.data[i * (self.kd + 1) + (i - j)];
                y[i] += a * x[j];
                y[j] += a * x[i];
            }
            y[i] += self.data[i * (self.kd + 1)] * x[i];
        }
        y
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    /// Largest absolute row sum, an upper bound on the spectral radius.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kd);
                let hi = (i + self.kd).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j).abs()).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Number of eigenvalues strictly below `sigma`, from the signs of the
    /// LDLᵀ pivots of A − σI.
    pub fn count_below(&self, sigma: f64) -> usize {
        let w = self.kd + 1;
        let mut l = self.data.clone();
        for i in 0..self.n {
            l[i * w] -= sigma;
        }
        let tiny = f64::EPSILON * self.norm_inf().max(f64::MIN_POSITIVE);
        let mut d = vec![0.0; self.n];
        let mut negatives = 0;
        for i in 0..self.n {
            let lo = i.saturating_sub(self.kd);
            // row i of L: l_ij = (a_ij − Σ_k l_ik d_k l_jk) / d_j
            for j in lo..i {
                let mut s = l[i * w + (i - j)];
                let klo = lo.max(j.saturating_sub(self.kd));
                for k in klo..j {
                    s -= l[i * w + (i - k)] * d[k] * l[j * w + (j - k)];
                }
                l[i * w + (i - j)] = s / d[j];
            }
            let mut piv = l[i * w];
            for k in lo..i {
                let lik = l[i * w + (i - k)];
                piv -= lik * lik * d[k];
            }
            if piv.abs() < tiny {
                piv = -tiny;
            }
            if piv < 0.0 {
                negatives += 1;
            }
            d[i] = piv;
        }
        negatives
    }

    /// LU factorization of A − σI with partial pivoting.
    pub fn shifted_lu(&self, sigma: f64) -> BandLu {
        BandLu::factor(self, sigma)
    }
}

/// Banded LU with row pivoting (upper bandwidth grows to 2·kd).
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    /// Row-major band: entry (i, j) at i·width + (j + kl − i).
    ab: Vec<f64>,
    pivots: Vec<usize>,
}

impl BandLu {
    fn factor(a: &SymBand, sigma: f64) -> Self {
        let n = a.n;
        let kl = a.kd;
        let ku = 2 * a.kd;
        let width = kl + ku + 1;
        let mut ab = vec![0.0; n * width];
        let idx = |i: usize, j: usize| i * width + (j + kl - i);
        for i in 0..n {
            let lo = i.saturating_sub(kl);
            let hi = (i + kl).min(n - 1);
            for j in lo..=hi {
                ab[idx(i, j)] = a.get(i, j) - if i == j { sigma } else { 0.0 };
            }
        }
        let floor = f64::EPSILON * a.norm_inf().max(f64::MIN_POSITIVE);
        let mut pivots = vec![0; n];
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = ab[idx(k, k)].abs();
            for r in k + 1..=last {
                let v = ab[idx(r, k)].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            pivots[k] = p;
            let jmax = (k + ku).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    ab.swap(idx(k, j), idx(p, j));
                }
            }
            if ab[idx(k, k)].abs() < floor {
                ab[idx(k, k)] = floor;
            }
            let pivot = ab[idx(k, k)];
            for r in k + 1..=last {
                let m = ab[idx(r, k)] / pivot;
                ab[idx(r, k)] = m;
                if m != 0.0 {
                    for j in k + 1..=jmax {
                        ab[idx(r, j)] -= m * ab[idx(k, j)];
                    }
                }
            }
        }
        Self {
            n,
            kl,
            ku,
            ab,
            pivots,
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let width = self.kl + self.ku + 1;
        let idx = |i: usize, j: usize| i * width + (j + self.kl - i);
        let mut x = b.to_vec();
        for k in 0..self.n {
            x.swap(k, self.pivots[k]);
            let last = (k + self.kl).min(self.n - 1);
            for r in k + 1..=last {
                x[r] -= self.ab[idx(r, k)] * x[k];
            }
        }
        for k in (0..self.n).rev() {
            let jmax = (k + self.ku).min(self.n - 1);
            let mut s = x[k];
            for j in k + 1..=jmax {
                s -= self.ab[idx(k, j)] * x[j];
            }
            x[k] = s / self.ab[idx(k, k)];
        }
        x
    }
}

/// Eigenvalues of `a` in [lo, hi) by bisection on the inertia count, each
/// refined with inverse iteration. Returns (λ, unit eigenvector) pairs.
pub fn eigenpairs_in_range(a: &SymBand, lo: f64, hi: f64) -> Vec<(f64, DVector<f64>)> {
    let c_lo = a.count_below(lo);
    let c_hi = a.count_below(hi);
    let scale = a.norm_inf().max(lo.abs()).max(hi.abs());
    let tol = 4.0 * f64::EPSILON * scale;
    let mut values = Vec::with_capacity(c_hi.saturating_sub(c_lo));
    for target in c_lo..c_hi {
        // smallest x with count_below(x) > target
        let (mut a_lo, mut a_hi) = (lo, hi);
        while a_hi - a_lo > tol {
            let mid = 0.5 * (a_lo + a_hi);
            if mid <= a_lo || mid >= a_hi {
                break;
            }
            if a.count_below(mid) > target {
                a_hi = mid;
            } else {
                a_lo = mid;
            }
        }
        values.push(0.5 * (a_lo + a_hi));
    }
    let gap_floor = 1e3 * tol;
    let mut pairs: Vec<(f64, DVector<f64>)> = Vec::with_capacity(values.len());
    let mut cluster_start = 0;
    for (i, &lambda) in values.iter().enumerate() {
        if i > 0 && lambda - values[i - 1] > gap_floor {
            cluster_start = i;
        }
        let previous: Vec<DVector<f64>> = pairs[cluster_start..i].iter().map(|p| p.1.clone()).collect();
        let v = inverse_iteration(a, lambda, &previous, i);
        let av = DVector::from_vec(a.mul_vec(v.as_slice()));
        let rq = v.dot(&av);
        pairs.push((rq, v));
    }
    pairs
}

/// Inverse iteration at shift σ, orthogonalized against `deflate` (earlier
/// members of a cluster).
fn inverse_iteration(a: &SymBand, sigma: f64, deflate: &[DVector<f64>], seed: usize) -> DVector<f64> {
    let n = a.dim();
    let lu = a.shifted_lu(sigma);
    let mut state = 0x9E37_79B9_7F4A_7C15u64 ^ (seed as u64).wrapping_mul(0xD1B5_4A32_D192_ED03);
    let mut v = DVector::from_fn(n, |_, _| {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    });
    let project = |v: &mut DVector<f64>| {
        for d in deflate {
            let c = d.dot(v);
            v.axpy(-c, d, 1.0);
        }
        let norm = v.norm();
        *v /= norm;
    };
    project(&mut v);
    for _ in 0..6 {
        v = DVector::from_vec(lu.solve(v.as_slice()));
        project(&mut v);
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(n: usize) -> SymBand {
        let mut b = SymBuilder::new(n);
        for i in 0..n {
            b.add(i, i, 2.0);
            if i + 1 < n {
                b.add(i + 1, i, -1.0);
            }
        }
        b.build()
    }

    #[test]
    fn inertia_matches_known_spectrum() {
        let n = 50;
        let a = laplacian(n);
        let exact: Vec<f64> = (1..=n)
            .map(|m| 2.0 - 2.0 * (m as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos())
            .collect();
        for sigma in [0.0, 0.5, 1.3, 2.0, 3.9, 4.1] {
            let expected = exact.iter().filter(|&&l| l < sigma).count();
            assert_eq!(a.count_below(sigma), expected, "σ = {sigma}");
        }
    }

    #[test]
    fn windowed_eigenpairs_match_dense() {
        let mut b = SymBuilder::new(40);
        for i in 0..40 {
            b.add(i, i, 2.0 + (i as f64 * 0.37).sin());
            if i + 1 < 40 {
                b.add(i + 1, i, -0.7);
            }
            if i + 3 < 40 {
                b.add(i + 3, i, 0.2);
            }
        }
        let a = b.build();
        let dense = nalgebra::SymmetricEigen::new(a.to_dense());
        let mut exact: Vec<f64> = dense.eigenvalues.iter().copied().collect();
        exact.sort_by(f64::total_cmp);
        let pairs = eigenpairs_in_range(&a, 1.0, 2.5);
        let inside: Vec<f64> = exact.into_iter().filter(|&l| (1.0..2.5).contains(&l)).collect();
        assert_eq!(pairs.len(), inside.len());
        for ((l, v), e) in pairs.iter().zip(&inside) {
            assert!((l - e).abs() < 1e-12);
            let r = DVector::from_vec(a.mul_vec(v.as_slice())) - v * *l;
            assert!(r.norm() < 1e-11);
        }
    }

    #[test]
    fn band_lu_solves() {
        let a = laplacian(30);
        let x: Vec<f64> = (0..30).map(|i| (i as f64).cos()).collect();
        let b = a.mul_vec(&x);
        let lu = a.shifted_lu(0.0);
        let y = lu.solve(&b);
        for (p, q) in x.iter().zip(&y) {
            assert!((p - q).abs() < 1e-11);
        }
    }
}
