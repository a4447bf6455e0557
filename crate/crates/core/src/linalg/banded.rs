//! Banded LU factorization with partial pivoting.
//!
//! Row-major band storage: row `i` holds columns `[i-kl, i+kl+ku]`, the extra
//! `kl` superdiagonals absorb pivoting fill. Covers everything from the
//! tridiagonal radial operators to the 2D bi-axial Jacobians.

use crate::scalar::Scalar;

use super::csr::SparseSym;

#[derive(Debug, Clone)]
pub struct BandedLU<S> {
    n: usize,
    kl: usize,
    width: usize,
    band: Vec<S>,
    piv: Vec<usize>,
    pub min_pivot: S,
}

impl<S: Scalar> BandedLU<S> {
    fn idx(&self, i: usize, j: usize) -> usize {
        // column window of row i starts at i - kl
        i * self.width + (j + self.kl - i)
    }

    fn at(&self, i: usize, j: usize) -> S {
        self.band[self.idx(i, j)]
    }

    fn window(&self, i: usize) -> (usize, usize) {
        let lo = i.saturating_sub(self.kl);
        let hi = (i + 2 * self.kl).min(self.n - 1);
        (lo, hi)
    }

    /// Factor `A + diag(extra)`, where `A` is symmetric with bandwidth `kl`.
    pub fn factor(a: &SparseSym<S>, extra_diag: Option<&[S]>) -> BandedLU<S> {
        let n = a.n();
        let kl = a.bandwidth();
        let width = 3 * kl + 1;
        let mut lu = BandedLU {
            n,
            kl,
            width,
            band: vec![S::zero(); n * width],
            piv: vec![0; n],
            min_pivot: S::infinity(),
        };
        for i in 0..n {
            for (j, v) in a.row(i) {
                let k = lu.idx(i, j);
                lu.band[k] += v;
            }
            if let Some(d) = extra_diag {
                let k = lu.idx(i, i);
                lu.band[k] += d[i];
            }
        }
        lu.decompose();
        lu
    }

    fn decompose(&mut self) {
        let n = self.n;
        let kl = self.kl;
        for k in 0..n {
            // pivot search in column k, rows k..k+kl
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.at(k, k).abs();
            for i in (k + 1)..=last {
                let v = self.at(i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if p != k {
                let (_, hi) = self.window(k);
                for j in k..=hi {
                    let a = self.idx(k, j);
                    let b = self.idx(p, j);
                    self.band.swap(a, b);
                }
                self.piv[k] = p;
            } else {
                self.piv[k] = k;
            }
            let pivot = self.at(k, k);
            if pivot.abs() < self.min_pivot {
                self.min_pivot = pivot.abs();
            }
            if pivot == S::zero() {
                continue; // exactly singular; solve() reports via min_pivot
            }
            let (_, hi) = self.window(k);
            for i in (k + 1)..=last {
                let l = self.at(i, k) / pivot;
                let li = self.idx(i, k);
                self.band[li] = l;
                if l != S::zero() {
                    for j in (k + 1)..=hi {
                        let v = self.at(k, j);
                        if v != S::zero() {
                            let t = self.idx(i, j);
                            self.band[t] -= l * v;
                        }
                    }
                }
            }
        }
    }

    pub fn solve(&self, rhs: &mut [S]) {
        let n = self.n;
        let kl = self.kl;
        // forward
        for k in 0..n {
            if self.piv[k] != k {
                rhs.swap(k, self.piv[k]);
            }
            let last = (k + kl).min(n - 1);
            for i in (k + 1)..=last {
                let l = self.at(i, k);
                if l != S::zero() {
                    rhs[i] = rhs[i] - l * rhs[k];
                }
            }
        }
        // backward
        for k in (0..n).rev() {
            let (_, hi) = self.window(k);
            let mut acc = rhs[k];
            for j in (k + 1)..=hi {
                let v = self.at(k, j);
                if v != S::zero() {
                    acc -= v * rhs[j];
                }
            }
            rhs[k] = acc / self.at(k, k);
        }
    }

    pub fn solve_vec(&self, rhs: &[S]) -> Vec<S> {
        let mut x = rhs.to_vec();
        self.solve(&mut x);
        x
    }
}
