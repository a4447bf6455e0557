//! Block shift-invert subspace iteration for the generalized symmetric
//! eigenproblem (A + diag(q)) v = lambda M v with diagonal positive mass.
//!
//! The shift is placed below the whole spectrum, so the shifted matrix is
//! SPD and can be factored (banded) or solved by CG (unstructured). A seeded
//! start block makes runs reproducible; the block form resolves the
//! degenerate clusters that rotational symmetry produces.

use crate::rng::Rng;
use crate::scalar::Scalar;

use super::banded::BandedLU;
use super::csr::SparseSym;
use super::dense::sym_eig;
use super::iterative::{cg, ShiftedOp, SymOp};

pub struct PencilEigs<S> {
    pub values: Vec<S>,
    /// M-orthonormal eigenvectors, one per value.
    pub vectors: Vec<Vec<S>>,
    pub iterations: usize,
    pub converged: bool,
}

const BANDED_LIMIT: usize = 400;

enum Inner<'a, S: Scalar> {
    Direct(BandedLU<S>),
    Krylov(ShiftedOp<'a, S>),
}

impl<'a, S: Scalar> Inner<'a, S> {
    fn solve(&self, rhs: &[S]) -> Vec<S> {
        match self {
            Inner::Direct(lu) => lu.solve_vec(rhs),
            Inner::Krylov(op) => cg(op, rhs, None, S::of(1e-12), 40 * rhs.len().max(100)).0,
        }
    }
}

pub fn lowest_pencil_eigs<S: Scalar>(
    a: &SparseSym<S>,
    q: &[S],
    mass: &[S],
    k: usize,
    tol: S,
    max_outer: usize,
    seed: u64,
) -> PencilEigs<S> {
    let n = a.n();
    let k = k.min(n);
    let p = (k + (k / 3).max(4)).min(n);

    // spectrum floor: v'Av >= 0 and q_i v_i^2 >= (q_i/m_i) m_i v_i^2
    let mut floor = S::infinity();
    for i in 0..n {
        floor = floor.min(q[i] / mass[i]);
    }
    if !floor.is_finite() {
        floor = S::zero();
    }
    let sigma = floor - S::one().max(floor.abs() * S::of(0.01));
    let shifted_diag: Vec<S> = (0..n).map(|i| q[i] - sigma * mass[i]).collect();

    let inner = if a.bandwidth() <= BANDED_LIMIT {
        Inner::Direct(BandedLU::factor(a, Some(&shifted_diag)))
    } else {
        Inner::Krylov(ShiftedOp {
            mat: a,
            diag_add: shifted_diag.clone(),
        })
    };

    let mut rng = Rng::new(seed ^ 0x5EED_B10C);
    let mut x: Vec<Vec<S>> = (0..p)
        .map(|_| {
            (0..n)
                .map(|_| rng.uniform_in(-S::one(), S::one()))
                .collect()
        })
        .collect();
    m_orthonormalize(&mut x, mass);

    let op_full = ShiftedOp {
        mat: a,
        diag_add: q.to_vec(),
    };
    let mut values = vec![S::zero(); p];
    let mut iterations = 0;
    let mut converged = false;

    for outer in 0..max_outer {
        iterations = outer + 1;
        // Y = S^{-1} M X
        let mut y: Vec<Vec<S>> = Vec::with_capacity(p);
        for xj in &x {
            let rhs: Vec<S> = (0..n).map(|i| mass[i] * xj[i]).collect();
            y.push(inner.solve(&rhs));
        }
        m_orthonormalize(&mut y, mass);
        // Rayleigh-Ritz on span(Y)
        let mut h = vec![S::zero(); p * p];
        let ay: Vec<Vec<S>> = y
            .iter()
            .map(|v| {
                let mut out = vec![S::zero(); n];
                op_full.apply(v, &mut out);
                out
            })
            .collect();
        for i in 0..p {
            for j in i..p {
                let mut acc = S::zero();
                for t in 0..n {
                    acc += y[i][t] * ay[j][t];
                }
                h[i * p + j] = acc;
                h[j * p + i] = acc;
            }
        }
        let (w, vecs) = sym_eig(&h, p);
        let mut x_new: Vec<Vec<S>> = Vec::with_capacity(p);
        for col in 0..p {
            let mut v = vec![S::zero(); n];
            for (j, yj) in y.iter().enumerate() {
                let c = vecs[col][j];
                for t in 0..n {
                    v[t] += c * yj[t];
                }
            }
            x_new.push(v);
        }
        x = x_new;
        values = w;

        // residuals of the k lowest in the M^{-1} dual norm
        let mut ok = true;
        for j in 0..k {
            let mut av = vec![S::zero(); n];
            op_full.apply(&x[j], &mut av);
            let mut res = S::zero();
            for t in 0..n {
                let r = av[t] - values[j] * mass[t] * x[j][t];
                res += r * r / mass[t];
            }
            let res = res.sqrt();
            if res > tol * S::one().max(values[j].abs()) {
                ok = false;
                break;
            }
        }
        if ok {
            converged = true;
            break;
        }
    }

    PencilEigs {
        values: values[..k].to_vec(),
        vectors: x.into_iter().take(k).collect(),
        iterations,
        converged,
    }
}

fn m_orthonormalize<S: Scalar>(x: &mut [Vec<S>], mass: &[S]) {
    let n = mass.len();
    for j in 0..x.len() {
        for _pass in 0..2 {
            for i in 0..j {
                let mut c = S::zero();
                for t in 0..n {
                    c += x[i][t] * mass[t] * x[j][t];
                }
                let (head, tail) = x.split_at_mut(j);
                let xi = &head[i];
                let xj = &mut tail[0];
                for t in 0..n {
                    xj[t] -= c * xi[t];
                }
            }
        }
        let mut nrm = S::zero();
        for t in 0..n {
            nrm += x[j][t] * mass[t] * x[j][t];
        }
        let nrm = nrm.sqrt();
        if nrm > S::zero() {
            for t in 0..n {
                x[j][t] /= nrm;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::csr::Triplets;

    /// 2D Dirichlet Laplacian on a unit square grid: lowest eigenvalues
    /// pi^2 (p^2 + q^2), with a degenerate pair at (1,2)/(2,1).
    #[test]
    fn square_laplacian_with_multiplicity() {
        let m = 24usize;
        let h = 1.0 / (m as f64 + 1.0);
        let n = m * m;
        let idx = |i: usize, j: usize| i * m + j;
        let mut t = Triplets::<f64>::new(n);
        let w = 1.0 / (h * h);
        for i in 0..m {
            for j in 0..m {
                let me = idx(i, j);
                t.push(me, me, 4.0 * w);
                if i + 1 < m {
                    t.push(me, idx(i + 1, j), -w);
                    t.push(idx(i + 1, j), me, -w);
                }
                if j + 1 < m {
                    t.push(me, idx(i, j + 1), -w);
                    t.push(idx(i, j + 1), me, -w);
                }
            }
        }
        let a = t.into_csr();
        let q = vec![0.0; n];
        let mass = vec![1.0; n];
        let out = lowest_pencil_eigs(&a, &q, &mass, 4, 1e-9, 300, 7);
        assert!(out.converged);
        let pi = std::f64::consts::PI;
        // discrete eigenvalues of the 5-point stencil
        let lam = |p: f64| 4.0 / (h * h) * (p * pi * h / 2.0).sin().powi(2);
        let exact = [
            lam(1.0) + lam(1.0),
            lam(1.0) + lam(2.0),
            lam(2.0) + lam(1.0),
            lam(2.0) + lam(2.0),
        ];
        for i in 0..4 {
            assert!(
                (out.values[i] - exact[i]).abs() < 1e-6 * exact[i],
                "i={i} got {} want {}",
                out.values[i],
                exact[i]
            );
        }
    }
}
