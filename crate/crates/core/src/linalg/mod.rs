//! Sparse/banded linear algebra shared by the solver and spectral modules.

pub mod banded;
pub mod csr;
pub mod dense;
pub mod iterative;
pub mod subspace;
pub mod tridiag;

pub use banded::BandedLU;
pub use csr::{SparseSym, Triplets};
pub use iterative::{cg, minres, ShiftedOp, SymOp};

use crate::scalar::Scalar;

pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    let mut acc = S::zero();
    for i in 0..a.len() {
        acc += a[i] * b[i];
    }
    acc
}

/// Weighted inner product sum_i w_i a_i b_i.
pub fn wdot<S: Scalar>(w: &[S], a: &[S], b: &[S]) -> S {
    let mut acc = S::zero();
    for i in 0..a.len() {
        acc += w[i] * a[i] * b[i];
    }
    acc
}

pub fn wnorm<S: Scalar>(w: &[S], a: &[S]) -> S {
    wdot(w, a, a).sqrt()
}

pub fn axpy<S: Scalar>(y: &mut [S], alpha: S, x: &[S]) {
    for i in 0..y.len() {
        y[i] += alpha * x[i];
    }
}

pub fn sup_norm<S: Scalar>(a: &[S]) -> S {
    a.iter().fold(S::zero(), |m, &v| m.max(v.abs()))
}

/// Lowest `k` eigenpairs of (A + diag(q)) v = lambda M v with M = diag(mass).
///
/// Tridiagonal systems (all 1D radial operators) go through deterministic
/// Sturm bisection + inverse iteration; everything else through seeded block
/// shift-invert subspace iteration.
pub struct EigOpts<S> {
    pub k: usize,
    pub tol: S,
    pub max_outer: usize,
    pub seed: u64,
}

impl<S: Scalar> Default for EigOpts<S> {
    fn default() -> Self {
        EigOpts {
            k: 6,
            tol: S::of(1e-10),
            max_outer: 400,
            seed: 1,
        }
    }
}

pub struct Eigs<S> {
    pub values: Vec<S>,
    /// M-orthonormal eigenvectors.
    pub vectors: Vec<Vec<S>>,
    pub converged: bool,
}

pub fn lowest_eigenpairs<S: Scalar>(
    a: &SparseSym<S>,
    q: &[S],
    mass: &[S],
    opts: &EigOpts<S>,
) -> Eigs<S> {
    let n = a.n();
    let k = opts.k.min(n);
    if a.bandwidth() <= 1 {
        // pencil -> standard tridiagonal via the diagonal mass similarity
        let mut diag = Vec::with_capacity(n);
        let mut off = Vec::with_capacity(n.saturating_sub(1));
        for i in 0..n {
            diag.push((a.get(i, i) + q[i]) / mass[i]);
            if i + 1 < n {
                off.push(a.get(i, i + 1) / (mass[i] * mass[i + 1]).sqrt());
            }
        }
        let tri = tridiag::SymTridiag { diag, off };
        let values = tri.smallest_eigenvalues(k);
        let scale = values.iter().fold(S::one(), |m, v| m.max(v.abs()));
        let cluster = scale * S::of(1e-9);
        let mut std_vecs: Vec<Vec<S>> = Vec::with_capacity(k);
        for (j, &lam) in values.iter().enumerate() {
            let prev: Vec<Vec<S>> = (0..j)
                .filter(|&i| (values[i] - lam).abs() <= cluster * S::of(1e3))
                .map(|i| std_vecs[i].clone())
                .collect();
            std_vecs.push(tri.eigenvector(lam, &prev));
        }
        // undo the similarity: v = D^{-1/2} w is automatically M-orthonormal
        let vectors: Vec<Vec<S>> = std_vecs
            .into_iter()
            .map(|w| (0..n).map(|i| w[i] / mass[i].sqrt()).collect())
            .collect();
        Eigs {
            values,
            vectors,
            converged: true,
        }
    } else {
        let out = subspace::lowest_pencil_eigs(a, q, mass, k, opts.tol, opts.max_outer, opts.seed);
        Eigs {
            values: out.values,
            vectors: out.vectors,
            converged: out.converged,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pencil_tridiag_matches_dense_expectation() {
        // (A + q) v = lambda M v with A = 1D Neumann Laplacian-like stiffness
        let n = 120usize;
        let h = 1.0 / n as f64;
        let mut t = Triplets::<f64>::new(n);
        for i in 0..n - 1 {
            t.push_sym_pair(i, i + 1, -1.0 / h);
        }
        let a = t.into_csr();
        let mass = vec![h; n];
        let q = vec![0.0; n];
        let eigs = lowest_eigenpairs(
            &a,
            &q,
            &mass,
            &EigOpts {
                k: 3,
                ..Default::default()
            },
        );
        // Neumann Laplacian on (0,1): 0, pi^2, 4 pi^2
        assert!(eigs.values[0].abs() < 1e-8);
        let pi = std::f64::consts::PI;
        assert!((eigs.values[1] - pi * pi).abs() < 0.01 * pi * pi);
        assert!((eigs.values[2] - 4.0 * pi * pi).abs() < 0.02 * 4.0 * pi * pi);
        // M-orthonormality
        for i in 0..3 {
            for j in 0..3 {
                let g = wdot(&mass, &eigs.vectors[i], &eigs.vectors[j]);
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g - want).abs() < 1e-8, "gram {i}{j} = {g}");
            }
        }
    }
}
