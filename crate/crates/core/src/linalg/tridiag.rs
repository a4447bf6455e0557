//! Symmetric tridiagonal eigensolver: Sturm-sequence bisection for the
//! eigenvalues, inverse iteration for the eigenvectors. Fully deterministic,
//! which makes it the workhorse for every 1D radial operator.

use crate::rng::Rng;
use crate::scalar::Scalar;

use super::banded::BandedLU;
use super::csr::Triplets;

#[derive(Debug, Clone)]
pub struct SymTridiag<S> {
    pub diag: Vec<S>,
    pub off: Vec<S>, // length n-1
}

impl<S: Scalar> SymTridiag<S> {
    pub fn n(&self) -> usize {
        self.diag.len()
    }

    /// Number of eigenvalues strictly below `x` (LDL' sign count).
    pub fn count_below(&self, x: S) -> usize {
        let n = self.n();
        let tiny = S::min_positive_value() * S::of(1e4);
        let mut count = 0usize;
        let mut d = self.diag[0] - x;
        if d < S::zero() {
            count += 1;
        }
        for i in 1..n {
            let mut dd = d;
            if dd.abs() < tiny {
                dd = if dd < S::zero() { -tiny } else { tiny };
            }
            d = (self.diag[i] - x) - self.off[i - 1] * self.off[i - 1] / dd;
            if d < S::zero() {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (S, S) {
        let n = self.n();
        let mut lo = S::infinity();
        let mut hi = S::neg_infinity();
        for i in 0..n {
            let mut r = S::zero();
            if i > 0 {
                r += self.off[i - 1].abs();
            }
            if i + 1 < n {
                r += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// The `k` smallest eigenvalues by bisection.
    pub fn smallest_eigenvalues(&self, k: usize) -> Vec<S> {
        let k = k.min(self.n());
        let (glo, ghi) = self.gershgorin();
        let mut out = Vec::with_capacity(k);
        for idx in 0..k {
            let (mut lo, mut hi) = (glo, ghi);
            // invariant: count_below(lo) <= idx < count_below(hi)
            for _ in 0..200 {
                let mid = (lo + hi) * S::of(0.5);
                if mid <= lo || mid >= hi {
                    break;
                }
                if self.count_below(mid) > idx {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            out.push((lo + hi) * S::of(0.5));
        }
        out
    }

    /// Inverse iteration for the eigenvector of eigenvalue `lam`;
    /// orthogonalizes against `prev` (same-cluster vectors).
    pub fn eigenvector(&self, lam: S, prev: &[Vec<S>]) -> Vec<S> {
        let n = self.n();
        let mut t = Triplets::new(n);
        let scale = self
            .diag
            .iter()
            .fold(S::zero(), |a, &b| a.max(b.abs()))
            .max(S::one());
        let shift = lam + scale * S::epsilon() * S::of(32.0);
        for i in 0..n {
            t.push(i, i, self.diag[i] - shift);
            if i + 1 < n {
                t.push(i, i + 1, self.off[i]);
                t.push(i + 1, i, self.off[i]);
            }
        }
        let lu = BandedLU::factor(&t.into_csr(), None);
        let mut rng = Rng::new(0x715D_0001);
        let mut v: Vec<S> = (0..n)
            .map(|_| rng.uniform_in(-S::one(), S::one()))
            .collect();
        for _ in 0..4 {
            for p in prev {
                let c = dot(&v, p);
                for i in 0..n {
                    v[i] -= c * p[i];
                }
            }
            let nv = dot(&v, &v).sqrt();
            if nv > S::zero() {
                for x in v.iter_mut() {
                    *x /= nv;
                }
            }
            lu.solve(&mut v);
            let nv = dot(&v, &v).sqrt();
            if nv > S::zero() {
                for x in v.iter_mut() {
                    *x /= nv;
                }
            }
        }
        for p in prev {
            let c = dot(&v, p);
            for i in 0..n {
                v[i] -= c * p[i];
            }
        }
        let nv = dot(&v, &v).sqrt();
        if nv > S::zero() {
            for x in v.iter_mut() {
                *x /= nv;
            }
        }
        v
    }
}

fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    let mut acc = S::zero();
    for i in 0..a.len() {
        acc += a[i] * b[i];
    }
    acc
}
