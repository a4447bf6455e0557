//! Small dense symmetric eigensolver (cyclic Jacobi). Used for the
//! Rayleigh-Ritz projections inside the subspace iteration; sizes stay tiny.

use crate::scalar::Scalar;

/// Eigen-decomposition of a symmetric matrix given in row-major order.
/// Returns eigenvalues ascending and matching eigenvectors as rows.
pub fn sym_eig<S: Scalar>(a: &[S], n: usize) -> (Vec<S>, Vec<Vec<S>>) {
    let mut m = a.to_vec();
    let mut v = vec![S::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = S::one();
    }
    let tol = S::epsilon() * S::of(4.0);
    for _sweep in 0..64 {
        let mut off = S::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[i * n + j] * m[i * n + j];
            }
        }
        if off.sqrt() <= tol * frob(&m, n) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq == S::zero() {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (S::of(2.0) * apq);
                let t = if theta >= S::zero() {
                    S::one() / (theta + (S::one() + theta * theta).sqrt())
                } else {
                    -S::one() / (-theta + (S::one() + theta * theta).sqrt())
                };
                let c = S::one() / (S::one() + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<S> = (0..n).map(|i| m[i * n + i]).collect();
    order.sort_by(|&a, &b| diag[a].partial_cmp(&diag[b]).unwrap());
    let eigenvalues: Vec<S> = order.iter().map(|&i| diag[i]).collect();
    let eigenvectors: Vec<Vec<S>> = order
        .iter()
        .map(|&col| (0..n).map(|row| v[row * n + col]).collect())
        .collect();
    (eigenvalues, eigenvectors)
}

fn frob<S: Scalar>(a: &[S], n: usize) -> S {
    let mut acc = S::zero();
    for i in 0..n * n {
        acc += a[i] * a[i];
    }
    acc.sqrt().max(S::min_positive_value())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonalizes_small_matrix() {
        // eigenvalues of [[2,1,0],[1,2,1],[0,1,2]] are 2-sqrt2, 2, 2+sqrt2
        let a = [2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0];
        let (w, vecs) = sym_eig(&a, 3);
        let s2 = std::f64::consts::SQRT_2;
        assert!((w[0] - (2.0 - s2)).abs() < 1e-12);
        assert!((w[1] - 2.0).abs() < 1e-12);
        assert!((w[2] - (2.0 + s2)).abs() < 1e-12);
        // residual check A v = w v
        for (k, v) in vecs.iter().enumerate() {
            for i in 0..3 {
                let mut av = 0.0;
                for j in 0..3 {
                    av += a[i * 3 + j] * v[j];
                }
                assert!((av - w[k] * v[i]).abs() < 1e-11);
            }
        }
    }
}
