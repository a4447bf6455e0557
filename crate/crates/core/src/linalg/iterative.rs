//! Krylov solvers: Jacobi-preconditioned CG for SPD systems and MINRES for
//! symmetric indefinite ones (Newton steps on unstructured meshes).

use crate::scalar::Scalar;

/// Matrix-free symmetric operator.
pub trait SymOp<S> {
    fn n(&self) -> usize;
    fn apply(&self, x: &[S], y: &mut [S]);
    /// Diagonal for Jacobi preconditioning.
    fn diag(&self) -> Vec<S>;
}

fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    let mut acc = S::zero();
    for i in 0..a.len() {
        acc += a[i] * b[i];
    }
    acc
}

fn norm<S: Scalar>(a: &[S]) -> S {
    dot(a, a).sqrt()
}

pub struct IterStats<S> {
    pub iters: usize,
    pub rel_residual: S,
}

/// Preconditioned conjugate gradient; `op` must be SPD.
pub fn cg<S: Scalar, O: SymOp<S>>(
    op: &O,
    b: &[S],
    x0: Option<&[S]>,
    rel_tol: S,
    max_iter: usize,
) -> (Vec<S>, IterStats<S>) {
    let n = op.n();
    let mut x = x0.map(|v| v.to_vec()).unwrap_or_else(|| vec![S::zero(); n]);
    let mut r = vec![S::zero(); n];
    op.apply(&x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let bnorm = norm(b).max(S::min_positive_value());
    let inv_diag: Vec<S> = op
        .diag()
        .iter()
        .map(|&d| {
            if d.abs() > S::zero() {
                S::one() / d.abs()
            } else {
                S::one()
            }
        })
        .collect();
    let mut z: Vec<S> = (0..n).map(|i| r[i] * inv_diag[i]).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![S::zero(); n];
    let mut stats = IterStats {
        iters: 0,
        rel_residual: norm(&r) / bnorm,
    };
    for it in 0..max_iter {
        if norm(&r) / bnorm <= rel_tol {
            break;
        }
        op.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= S::zero() {
            break; // not SPD along p; bail with current iterate
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        stats.iters = it + 1;
    }
    stats.rel_residual = norm(&r) / bnorm;
    (x, stats)
}

/// MINRES for symmetric (possibly indefinite) systems.
pub fn minres<S: Scalar, O: SymOp<S>>(
    op: &O,
    b: &[S],
    rel_tol: S,
    max_iter: usize,
) -> (Vec<S>, IterStats<S>) {
    let n = op.n();
    let mut x = vec![S::zero(); n];
    let bnorm = norm(b);
    if bnorm == S::zero() {
        return (
            x,
            IterStats {
                iters: 0,
                rel_residual: S::zero(),
            },
        );
    }

    let mut v_prev = vec![S::zero(); n];
    let mut v = b.to_vec();
    for i in 0..n {
        v[i] = v[i] / bnorm;
    }
    // Lanczos subdiagonal entering the current column (beta_1 = 0: no column yet)
    let mut beta = S::zero();
    let mut tau_bar = bnorm;
    let (mut c_km1, mut s_km1) = (S::one(), S::zero());
    let (mut c_km2, mut s_km2) = (S::one(), S::zero());
    let mut w = vec![S::zero(); n];
    let mut w_prev = vec![S::zero(); n];
    let mut av = vec![S::zero(); n];
    let mut stats = IterStats {
        iters: 0,
        rel_residual: S::one(),
    };

    for it in 0..max_iter {
        op.apply(&v, &mut av);
        for i in 0..n {
            av[i] -= beta * v_prev[i];
        }
        let alpha = dot(&v, &av);
        for i in 0..n {
            av[i] -= alpha * v[i];
        }
        let beta_next = norm(&av);

        // QR of the tridiagonal, two trailing rotations then a new one
        let eps = s_km2 * beta;
        let delta_bar = c_km2 * beta;
        let delta = c_km1 * delta_bar + s_km1 * alpha;
        let alpha_bar = -s_km1 * delta_bar + c_km1 * alpha;
        let gamma = (alpha_bar * alpha_bar + beta_next * beta_next)
            .sqrt()
            .max(S::min_positive_value());
        let c_k = alpha_bar / gamma;
        let s_k = beta_next / gamma;
        let tau = c_k * tau_bar;
        tau_bar = -s_k * tau_bar;

        for i in 0..n {
            let wi = (v[i] - delta * w[i] - eps * w_prev[i]) / gamma;
            w_prev[i] = w[i];
            w[i] = wi;
            x[i] += tau * wi;
        }

        stats.iters = it + 1;
        stats.rel_residual = tau_bar.abs() / bnorm;
        if stats.rel_residual <= rel_tol || beta_next == S::zero() {
            break;
        }
        c_km2 = c_km1;
        s_km2 = s_km1;
        c_km1 = c_k;
        s_km1 = s_k;
        std::mem::swap(&mut v_prev, &mut v);
        for i in 0..n {
            v[i] = av[i] / beta_next;
        }
        beta = beta_next;
    }
    (x, stats)
}

/// CSR plus a diagonal correction, the shape of every linearized operator here.
pub struct ShiftedOp<'a, S> {
    pub mat: &'a super::csr::SparseSym<S>,
    pub diag_add: Vec<S>,
}

impl<'a, S: Scalar> SymOp<S> for ShiftedOp<'a, S> {
    fn n(&self) -> usize {
        self.mat.n()
    }
    fn apply(&self, x: &[S], y: &mut [S]) {
        self.mat.matvec(x, y);
        for i in 0..x.len() {
            y[i] += self.diag_add[i] * x[i];
        }
    }
    fn diag(&self) -> Vec<S> {
        let mut d = self.mat.diag();
        for i in 0..d.len() {
            d[i] += self.diag_add[i];
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::csr::Triplets;

    fn laplace_1d(n: usize) -> crate::linalg::csr::SparseSym<f64> {
        let mut t = Triplets::new(n);
        for i in 0..n - 1 {
            t.push_sym_pair(i, i + 1, -1.0);
        }
        t.push(0, 0, 1.0);
        t.push(n - 1, n - 1, 1.0);
        t.into_csr()
    }

    #[test]
    fn cg_matches_direct() {
        let a = laplace_1d(80);
        let op = ShiftedOp {
            mat: &a,
            diag_add: vec![0.1; 80],
        };
        let x_true: Vec<f64> = (0..80).map(|i| (0.05 * i as f64).cos()).collect();
        let mut b = vec![0.0; 80];
        op.apply(&x_true, &mut b);
        let (x, st) = cg(&op, &b, None, 1e-12, 10_000);
        assert!(st.rel_residual < 1e-11);
        for i in 0..80 {
            assert!((x[i] - x_true[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn minres_handles_indefinite() {
        let a = laplace_1d(60);
        // strong negative shift makes it indefinite
        let op = ShiftedOp {
            mat: &a,
            diag_add: vec![-1.7; 60],
        };
        let x_true: Vec<f64> = (0..60).map(|i| ((i % 5) as f64) - 2.0).collect();
        let mut b = vec![0.0; 60];
        op.apply(&x_true, &mut b);
        let (x, st) = minres(&op, &b, 1e-12, 10_000);
        assert!(st.rel_residual < 1e-10, "rel={}", st.rel_residual);
        let mut r = vec![0.0; 60];
        op.apply(&x, &mut r);
        for i in 0..60 {
            assert!((r[i] - b[i]).abs() < 1e-7);
        }
    }
}
