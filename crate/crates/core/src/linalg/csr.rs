//! Compressed sparse row storage for symmetric operators.
//!
//! Both triangles are stored so `matvec` is a plain row sweep. Builders
//! accumulate duplicate entries, which keeps the assembly loops simple.

use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct SparseSym<S> {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<S>,
}

#[derive(Debug, Clone)]
pub struct Triplets<S> {
    n: usize,
    entries: Vec<(usize, usize, S)>,
}

impl<S: Scalar> Triplets<S> {
    pub fn new(n: usize) -> Self {
        Triplets {
            n,
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, i: usize, j: usize, v: S) {
        debug_assert!(i < self.n && j < self.n);
        self.entries.push((i, j, v));
    }

    /// Add `v` to (i,j) and (j,i), and subtract from both diagonals.
    /// This is the stiffness pattern of an edge with conductance `-v`.
    pub fn push_sym_pair(&mut self, i: usize, j: usize, v: S) {
        self.push(i, j, v);
        self.push(j, i, v);
        self.push(i, i, -v);
        self.push(j, j, -v);
    }

    pub fn into_csr(mut self) -> SparseSym<S> {
        self.entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; self.n + 1];
        let mut col_idx = Vec::new();
        let mut vals: Vec<S> = Vec::new();
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in self.entries {
            if last == Some((i, j)) {
                let k = vals.len() - 1;
                vals[k] += v;
            } else {
                col_idx.push(j);
                vals.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for r in 0..self.n {
            row_ptr[r + 1] += row_ptr[r];
        }
        SparseSym {
            n: self.n,
            row_ptr,
            col_idx,
            vals,
        }
    }
}

impl<S: Scalar> SparseSym<S> {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matvec(&self, x: &[S], y: &mut [S]) {
        debug_assert_eq!(x.len(), self.n);
        for i in 0..self.n {
            let mut acc = S::zero();
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.col_idx[k]];
            }
            y[i] = acc;
        }
    }

    pub fn apply(&self, x: &[S]) -> Vec<S> {
        let mut y = vec![S::zero(); self.n];
        self.matvec(x, &mut y);
        y
    }

    pub fn get(&self, i: usize, j: usize) -> S {
        for k in self.row_ptr[i]..self.row_ptr[i + 1] {
            if self.col_idx[k] == j {
                return self.vals[k];
            }
        }
        S::zero()
    }

    pub fn diag(&self) -> Vec<S> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, S)> + '_ {
        (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (self.col_idx[k], self.vals[k]))
    }

    pub fn bandwidth(&self) -> usize {
        let mut b = 0usize;
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k];
                b = b.max(i.abs_diff(j));
            }
        }
        b
    }

    /// Quadratic form x' A x.
    pub fn quad(&self, x: &[S]) -> S {
        let mut acc = S::zero();
        for i in 0..self.n {
            let mut row = S::zero();
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                row += self.vals[k] * x[self.col_idx[k]];
            }
            acc += x[i] * row;
        }
        acc
    }

    /// Max over stored entries of |A(i,j) - A(j,i)|; 0 for exactly symmetric.
    pub fn symmetry_defect(&self) -> S {
        let mut d = S::zero();
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k];
                let e = (self.vals[k] - self.get(j, i)).abs();
                if e > d {
                    d = e;
                }
            }
        }
        d
    }

    /// Extract the principal submatrix on `keep` (indices must be sorted).
    pub fn submatrix(&self, keep: &[usize]) -> SparseSym<S> {
        let mut inv = vec![usize::MAX; self.n];
        for (new, &old) in keep.iter().enumerate() {
            inv[old] = new;
        }
        let mut t = Triplets::new(keep.len());
        for (new_i, &old_i) in keep.iter().enumerate() {
            for k in self.row_ptr[old_i]..self.row_ptr[old_i + 1] {
                let j = self.col_idx[k];
                if inv[j] != usize::MAX {
                    t.push(new_i, inv[j], self.vals[k]);
                }
            }
        }
        t.into_csr()
    }
}
