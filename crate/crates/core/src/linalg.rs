//! Banded matrices: symmetric storage with LDL^T (solves and inertia) and a
//! general banded LU with partial pivoting for indefinite Newton systems.

use crate::error::{Error, Result};

/// Symmetric banded matrix storing the lower triangle, `bw` sub-diagonals.
#[derive(Debug, Clone)]
pub struct SymBand {
    n: usize,
    bw: usize,
    // row i holds columns i-bw ..= i at offsets 0 ..= bw
    data: Vec<f64>,
}

impl SymBand {
    pub fn zeros(n: usize, bw: usize) -> Self {
        SymBand {
            n,
            bw,
            data: vec![0.0; n * (bw + 1)],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.bw);
        i * (self.bw + 1) + (j + self.bw - i)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if i - j > self.bw {
            0.0
        } else {
            self.data[self.idx(i, j)]
        }
    }

    /// Adds `v` at `(i, j)`; for `i != j` the symmetric entry is implied.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        assert!(i - j <= self.bw, "entry ({i},{j}) outside band {}", self.bw);
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn add_diagonal(&mut self, d: &[f64]) {
        for (i, v) in d.iter().enumerate() {
            let k = self.idx(i, i);
            self.data[k] += v;
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= s);
        out
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bw);
            let mut acc = 0.0;
            for j in lo..i {
                let a = self.data[self.idx(i, j)];
                acc += a * x[j];
                y[j] += a * x[i];
            }
            acc += self.data[self.idx(i, i)] * x[i];
            y[i] += acc;
        }
        y
    }

    /// Principal submatrix on the rows/columns flagged `keep`, in order.
    pub fn restrict(&self, keep: &[usize]) -> Self {
        let mut pos = vec![usize::MAX; self.n];
        for (k, &i) in keep.iter().enumerate() {
            pos[i] = k;
        }
        // bandwidth can only shrink under deletion of rows
        let mut out = SymBand::zeros(keep.len(), self.bw);
        for (k, &i) in keep.iter().enumerate() {
            let lo = i.saturating_sub(self.bw);
            for j in lo..=i {
                let p = pos[j];
                if p != usize::MAX {
                    let v = self.data[self.idx(i, j)];
                    if v != 0.0 {
                        out.add(k, p, v);
                    }
                }
            }
        }
        out
    }

    /// Dense copy (tests and small oracles).
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; self.n]; self.n];
        for i in 0..self.n {
            for j in i.saturating_sub(self.bw)..=i {
                let v = self.data[self.idx(i, j)];
                m[i][j] = v;
                m[j][i] = v;
            }
        }
        m
    }

    pub fn ldlt(&self) -> Result<Ldlt> {
        let n = self.n;
        let bw = self.bw;
        let mut l = self.data.clone();
        let mut d = vec![0.0; n];
        let scale = (0..n)
            .map(|i| self.data[self.idx(i, i)].abs())
            .fold(0.0, f64::max)
            .max(1e-300);
        for j in 0..n {
            let lo = j.saturating_sub(bw);
            let mut dj = l[self.idx(j, j)];
            for k in lo..j {
                let ljk = l[self.idx(j, k)];
                dj -= ljk * ljk * d[k];
            }
            if dj.abs() <= 1e-14 * scale {
                return Err(Error::Singular { row: j, pivot: dj });
            }
            d[j] = dj;
            let hi = (j + bw).min(n - 1);
            for i in j + 1..=hi {
                let lo_i = i.saturating_sub(bw).max(lo);
                let mut a = l[self.idx(i, j)];
                for k in lo_i..j {
                    a -= l[self.idx(i, k)] * l[self.idx(j, k)] * d[k];
                }
                let k = self.idx(i, j);
                l[k] = a / dj;
            }
        }
        Ok(Ldlt {
            n,
            bw,
            l,
            d,
        })
    }
}

/// `A = L D L^T` factorisation of a [`SymBand`].
#[derive(Debug, Clone)]
pub struct Ldlt {
    n: usize,
    bw: usize,
    l: Vec<f64>,
    d: Vec<f64>,
}

impl Ldlt {
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.l[i * (self.bw + 1) + (j + self.bw - i)]
    }

    /// Number of negative pivots, i.e. negative eigenvalues (Sylvester).
    pub fn negative_count(&self) -> usize {
        self.d.iter().filter(|&&v| v < 0.0).count()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x = b.to_vec();
        for i in 0..n {
            let lo = i.saturating_sub(self.bw);
            let mut s = x[i];
            for k in lo..i {
                s -= self.at(i, k) * x[k];
            }
            x[i] = s;
        }
        for i in 0..n {
            x[i] /= self.d[i];
        }
        for i in (0..n).rev() {
            let hi = (i + self.bw).min(n - 1);
            let mut s = x[i];
            for k in i + 1..=hi {
                s -= self.at(k, i) * x[k];
            }
            x[i] = s;
        }
        x
    }
}

/// General banded LU with partial pivoting.
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    width: usize,
    data: Vec<f64>,
    piv: Vec<usize>,
}

impl BandLu {
    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        // columns i-kl ..= i+kl+ku stored at offsets 0..width
        i * self.width + (j + self.kl - i)
    }

    pub fn factor(a: &SymBand) -> Result<Self> {
        let n = a.n;
        let kl = a.bw;
        let ku = a.bw;
        let width = 2 * kl + ku + 1;
        let mut lu = BandLu {
            n,
            kl,
            width,
            data: vec![0.0; n * width],
            piv: vec![0; n],
        };
        for i in 0..n {
            let lo = i.saturating_sub(kl);
            let hi = (i + ku).min(n - 1);
            for j in lo..=hi {
                let k = lu.idx(i, j);
                lu.data[k] = a.get(i, j);
            }
        }
        let scale = lu.data.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = lu.data[lu.idx(k, k)].abs();
            for i in k + 1..=last_row {
                let v = lu.data[lu.idx(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= 1e-14 * scale {
                return Err(Error::Singular { row: k, pivot: best });
            }
            lu.piv[k] = p;
            let last_col = (k + kl + ku).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    let a1 = lu.idx(k, j);
                    let a2 = lu.idx(p, j);
                    lu.data.swap(a1, a2);
                }
            }
            let pivot = lu.data[lu.idx(k, k)];
            for i in k + 1..=last_row {
                let li = lu.idx(i, k);
                let m = lu.data[li] / pivot;
                lu.data[li] = m;
                if m != 0.0 {
                    for j in k + 1..=last_col {
                        let src = lu.data[lu.idx(k, j)];
                        let dst = lu.idx(i, j);
                        lu.data[dst] -= m * src;
                    }
                }
            }
        }
        Ok(lu)
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x = b.to_vec();
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                x.swap(k, p);
            }
            let last_row = (k + self.kl).min(n - 1);
            let xk = x[k];
            for i in k + 1..=last_row {
                x[i] -= self.data[self.idx(i, k)] * xk;
            }
        }
        let ku_total = self.width - self.kl - 1;
        for i in (0..n).rev() {
            let last_col = (i + ku_total).min(n - 1);
            let mut s = x[i];
            for j in i + 1..=last_col {
                s -= self.data[self.idx(i, j)] * x[j];
            }
            x[i] = s / self.data[self.idx(i, i)];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize, bw: usize, shift: f64) -> SymBand {
        let mut a = SymBand::zeros(n, bw);
        for i in 0..n {
            a.add(i, i, 4.0 + shift + (i as f64 * 0.37).sin());
            for k in 1..=bw {
                if i >= k {
                    a.add(i, i - k, -1.0 / (k as f64 + 0.5) + 0.1 * (i as f64).cos());
                }
            }
        }
        a
    }

    fn residual(a: &SymBand, x: &[f64], b: &[f64]) -> f64 {
        a.mul_vec(x)
            .iter()
            .zip(b)
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn ldlt_and_lu_solve_spd() {
        let a = sample(40, 3, 0.0);
        let b: Vec<f64> = (0..40).map(|i| (i as f64).sqrt()).collect();
        let x1 = a.ldlt().unwrap().solve(&b);
        let x2 = BandLu::factor(&a).unwrap().solve(&b);
        assert!(residual(&a, &x1, &b) < 1e-12);
        assert!(residual(&a, &x2, &b) < 1e-12);
    }

    #[test]
    fn lu_handles_indefinite_and_inertia_counts() {
        let a = sample(30, 2, -4.2);
        let b: Vec<f64> = (0..30).map(|i| 1.0 + i as f64).collect();
        let x = BandLu::factor(&a).unwrap().solve(&b);
        assert!(residual(&a, &x, &b) < 1e-10);
        let dense = a.to_dense();
        let m = nalgebra::DMatrix::from_fn(30, 30, |i, j| dense[i][j]);
        let eig = nalgebra::SymmetricEigen::new(m);
        let neg = eig.eigenvalues.iter().filter(|v| **v < 0.0).count();
        assert_eq!(a.ldlt().unwrap().negative_count(), neg);
    }

    #[test]
    fn restrict_keeps_entries() {
        let a = sample(10, 2, 0.0);
        let keep = [0, 2, 3, 5, 9];
        let r = a.restrict(&keep);
        for (p, &i) in keep.iter().enumerate() {
            for (q, &j) in keep.iter().enumerate() {
                assert_eq!(r.get(p, q), a.get(i, j));
            }
        }
    }
}
