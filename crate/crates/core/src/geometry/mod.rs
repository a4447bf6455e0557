//! Discretized domains: geodesic-radial grids on S^N and balls, the
//! SO(2)xSO(2)-invariant reduction of S^3, the bi-axial reduction of S^3, and
//! the triangulated S^2 — each bundled with a symmetric stiffness operator,
//! quadrature weights and boundary bookkeeping.
//!
//! Sign conventions: `stiffness` is the positive-semidefinite weak-form matrix
//! A with u'Au ~ int |grad u|^2, and the geometric Laplacian acts as
//! `Lap u = -(Au) / w` nodewise. Neumann ends are natural (no rows pinned);
//! Dirichlet boundaries keep their nodes but solves and spectra run on the
//! interior block.

pub mod biaxial;
#[path = "trisphere.rs"]
mod trisphere_impl;

pub use biaxial::{biaxial, biaxial_quarter};
pub use trisphere_impl::trisphere;

use crate::linalg::{SparseSym, Triplets};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bc {
    Neumann,
    Dirichlet,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DomainKind<S> {
    SphereRadial {
        dim: usize,
        n: usize,
    },
    BallRadial {
        dim: usize,
        radius: S,
        n: usize,
        geodesic: bool,
    },
    CliffordReduced {
        n: usize,
    },
    /// Reduced solid torus {s in [pi/4, pi/2]}, Dirichlet at the torus.
    CliffordHalf {
        n: usize,
    },
    BiAxial {
        n_rho: usize,
        n_phi: usize,
    },
    /// {x3 > 0, x4 > 0} slice, Dirichlet walls at phi = 0 and pi/2.
    BiAxialQuarter {
        n_rho: usize,
        m_phi: usize,
    },
    TriSphere {
        subdiv: usize,
    },
    /// Equatorial band {dist(x, {x_{N+1}=0}) < h} of S^N, Dirichlet rims.
    SphericalSegment {
        dim: usize,
        h: S,
        n: usize,
    },
}

/// A mesh reflection stored as a node permutation.
#[derive(Debug, Clone)]
pub struct Reflection<S> {
    pub label: String,
    /// Ambient unit normal of the fixed hyperplane when meaningful.
    pub normal: Option<Vec<S>>,
    pub perm: Vec<usize>,
    /// +1 on the kept halfspace H, -1 on the mirror side, 0 on the interface.
    pub side: Vec<i8>,
}

#[derive(Debug, Clone)]
pub struct Domain<S> {
    pub kind: DomainKind<S>,
    /// Intrinsic node coordinates (1 value for radial grids, 2 for bi-axial,
    /// 3 ambient values for the triangulated sphere).
    pub coords: Vec<Vec<S>>,
    /// Quadrature weights; their sum approximates `total_volume`.
    pub weights: Vec<S>,
    pub boundary: Vec<usize>,
    pub diameter: S,
    pub total_volume: S,
}

#[derive(Debug, Clone)]
pub struct Laplacian<S> {
    pub stiffness: SparseSym<S>,
    pub bc: Bc,
}

#[derive(Debug, Clone)]
pub struct Grid<S> {
    pub domain: Domain<S>,
    pub lap: Laplacian<S>,
    pub reflections: Vec<Reflection<S>>,
    /// Element connectivity for mesh export (segments, quads or triangles).
    pub elements: Vec<Vec<usize>>,
}

#[derive(Debug, thiserror::Error)]
pub enum GeometryError {
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("argument out of range: {0}")]
    OutOfRange(String),
}

impl<S: Scalar> Grid<S> {
    pub fn n_nodes(&self) -> usize {
        self.domain.weights.len()
    }

    pub fn mass(&self) -> &[S] {
        &self.domain.weights
    }

    pub fn is_dirichlet(&self) -> bool {
        self.lap.bc == Bc::Dirichlet
    }

    pub fn boundary_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.n_nodes()];
        for &b in &self.domain.boundary {
            mask[b] = true;
        }
        mask
    }

    /// Nodes that carry degrees of freedom (all, except Dirichlet boundaries).
    pub fn active(&self) -> Vec<usize> {
        if self.is_dirichlet() {
            let mask = self.boundary_mask();
            (0..self.n_nodes()).filter(|&i| !mask[i]).collect()
        } else {
            (0..self.n_nodes()).collect()
        }
    }

    /// Nodewise geometric Laplacian; zero on Dirichlet boundary rows.
    pub fn laplacian_apply(&self, u: &[S]) -> Vec<S> {
        let au = self.lap.stiffness.apply(u);
        let mut out: Vec<S> = (0..self.n_nodes())
            .map(|i| -au[i] / self.domain.weights[i])
            .collect();
        if self.is_dirichlet() {
            for &b in &self.domain.boundary {
                out[b] = S::zero();
            }
        }
        out
    }

    /// Reduced pencil (A_sub, q_sub, mass_sub, map) on the active nodes for
    /// the operator A + diag(w f'(u)).
    pub fn reduced_pencil(&self, q_full: &[S]) -> (SparseSym<S>, Vec<S>, Vec<S>, Vec<usize>) {
        let act = self.active();
        let a = self.lap.stiffness.submatrix(&act);
        let q = act.iter().map(|&i| q_full[i]).collect();
        let mass = act.iter().map(|&i| self.domain.weights[i]).collect();
        (a, q, mass, act)
    }

    /// Geodesic distance between two nodes (orbit distance on reduced grids).
    pub fn distance(&self, i: usize, j: usize) -> S {
        match &self.kind() {
            DomainKind::SphereRadial { .. }
            | DomainKind::BallRadial { .. }
            | DomainKind::CliffordReduced { .. }
            | DomainKind::CliffordHalf { .. }
            | DomainKind::SphericalSegment { .. } => {
                (self.domain.coords[i][0] - self.domain.coords[j][0]).abs()
            }
            DomainKind::TriSphere { .. } => {
                let a = &self.domain.coords[i];
                let b = &self.domain.coords[j];
                let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
                dot.min(S::one()).max(-S::one()).acos()
            }
            DomainKind::BiAxial { .. } | DomainKind::BiAxialQuarter { .. } => {
                let (r1, p1) = (self.domain.coords[i][0], self.domain.coords[i][1]);
                let (r2, p2) = (self.domain.coords[j][0], self.domain.coords[j][1]);
                let c = (S::one() - r1 * r1).max(S::zero()).sqrt()
                    * (S::one() - r2 * r2).max(S::zero()).sqrt()
                    + r1 * r2 * (p1 - p2).cos();
                c.min(S::one()).max(-S::one()).acos()
            }
        }
    }

    pub fn kind(&self) -> &DomainKind<S> {
        &self.domain.kind
    }

    /// Representative grid spacing (used for grid-aware tolerances).
    pub fn spacing(&self) -> S {
        match *self.kind() {
            DomainKind::SphereRadial { n, .. } => S::PI() / S::of_usize(n),
            DomainKind::BallRadial { radius, n, .. } => radius / S::of_usize(n),
            DomainKind::CliffordReduced { n } => S::FRAC_PI_2() / S::of_usize(n),
            DomainKind::CliffordHalf { n } => S::FRAC_PI_4() / S::of_usize(n),
            DomainKind::BiAxial { n_rho, n_phi } => {
                (S::one() / S::of_usize(n_rho)).max(S::of(2.0) * S::PI() / S::of_usize(n_phi))
            }
            DomainKind::BiAxialQuarter { n_rho, m_phi } => {
                (S::one() / S::of_usize(n_rho)).max(S::FRAC_PI_2() / S::of_usize(m_phi))
            }
            DomainKind::TriSphere { subdiv } => {
                // icosahedron edge ~1.1071 halved per subdivision
                S::of(1.1071) / S::of_usize(1 << subdiv)
            }
            DomainKind::SphericalSegment { h, n, .. } => S::of(2.0) * h / S::of_usize(n),
        }
    }

    /// Locate the node matching `target` coordinates within `tol` (brute force;
    /// used when gluing half-domain solutions).
    pub fn find_node(&self, target: &[S], tol: S) -> Option<usize> {
        'outer: for (i, c) in self.domain.coords.iter().enumerate() {
            if c.len() != target.len() {
                return None;
            }
            for k in 0..c.len() {
                if (c[k] - target[k]).abs() > tol {
                    continue 'outer;
                }
            }
            return Some(i);
        }
        None
    }
}

/// Volume of the round N-sphere, beta_N = |S^N|.
pub fn sphere_volume<S: Scalar>(n_dim: usize) -> S {
    // beta_0 = 2, beta_1 = 2 pi, beta_N = beta_{N-2} * 2 pi / (N - 1)
    let mut even = S::of(2.0);
    let mut odd = S::of(2.0) * S::PI();
    if n_dim == 0 {
        return even;
    }
    if n_dim == 1 {
        return odd;
    }
    let mut k = 2;
    loop {
        if k % 2 == 0 {
            even = even * S::of(2.0) * S::PI() / S::of_usize(k - 1);
            if k == n_dim {
                return even;
            }
        } else {
            odd = odd * S::of(2.0) * S::PI() / S::of_usize(k - 1);
            if k == n_dim {
                return odd;
            }
        }
        k += 1;
    }
}

/// Assemble the weak-form stiffness and lumped mass for a 1D operator
/// (rho u')' / rho on a uniform grid with midpoint-sampled weight rho.
fn assemble_1d<S: Scalar>(
    xs: &[S],
    rho: impl Fn(S) -> S,
    total_volume: Option<S>,
) -> (Vec<S>, SparseSym<S>) {
    let n = xs.len();
    let mut t = Triplets::new(n);
    let mut w = vec![S::zero(); n];
    for i in 0..n - 1 {
        let h = xs[i + 1] - xs[i];
        let r = rho((xs[i] + xs[i + 1]) * S::of(0.5));
        t.push_sym_pair(i, i + 1, -r / h);
        w[i] += h * r * S::of(0.5);
        w[i + 1] += h * r * S::of(0.5);
    }
    if let Some(total) = total_volume {
        let sum: S = w.iter().copied().sum();
        let c = total / sum;
        for wi in w.iter_mut() {
            *wi *= c;
        }
    }
    (w, t.into_csr())
}

/// Geodesic-radial grid on S^N about a pole: theta in [0, pi], weight
/// proportional to sin^{N-1}, renormalized to beta_N. Neumann (natural) ends.
pub fn sphere_radial<S: Scalar>(dim: usize, n: usize) -> Result<Grid<S>, GeometryError> {
    if dim < 2 {
        return Err(GeometryError::BadParameter(
            "sphere dimension must be >= 2".into(),
        ));
    }
    if n < 16 {
        return Err(GeometryError::BadParameter(
            "sphere grid needs n >= 16".into(),
        ));
    }
    let area = sphere_volume::<S>(dim - 1);
    let xs: Vec<S> = (0..=n)
        .map(|i| S::PI() * S::of_usize(i) / S::of_usize(n))
        .collect();
    let p = dim as i32 - 1;
    let (w, a) = assemble_1d(
        &xs,
        |th: S| area * th.sin().powi(p),
        Some(sphere_volume(dim)),
    );
    let perm: Vec<usize> = (0..=n).map(|i| n - i).collect();
    let side: Vec<i8> = (0..=n)
        .map(|i| {
            if 2 * i < n {
                1
            } else if 2 * i > n {
                -1
            } else {
                0
            }
        })
        .collect();
    Ok(Grid {
        domain: Domain {
            kind: DomainKind::SphereRadial { dim, n },
            coords: xs.iter().map(|&t| vec![t]).collect(),
            weights: w,
            boundary: vec![],
            diameter: S::PI(),
            total_volume: sphere_volume(dim),
        },
        lap: Laplacian {
            stiffness: a,
            bc: Bc::Neumann,
        },
        reflections: vec![Reflection {
            label: "equator".into(),
            // reflection across {x_{N+1} = 0} in the ambient R^{N+1}
            normal: Some({
                let mut nu = vec![S::zero(); dim + 1];
                nu[dim] = S::one();
                nu
            }),
            perm,
            side,
        }],
        elements: (0..n).map(|i| vec![i, i + 1]).collect(),
    })
}

/// Radial ball: Euclidean (weight r^{N-1}) or geodesic in S^N (weight
/// sin^{N-1} r). Dirichlet or Neumann at the outer radius; for N = 1 the
/// domain is the plain interval and `bc` applies at both ends.
pub fn ball_radial<S: Scalar>(
    dim: usize,
    radius: S,
    n: usize,
    bc: Bc,
    geodesic: bool,
) -> Result<Grid<S>, GeometryError> {
    if dim < 1 {
        return Err(GeometryError::BadParameter(
            "ball dimension must be >= 1".into(),
        ));
    }
    if n < 16 {
        return Err(GeometryError::BadParameter(
            "ball grid needs n >= 16".into(),
        ));
    }
    if radius <= S::zero() || (geodesic && radius > S::PI()) {
        return Err(GeometryError::BadParameter(
            "ball radius out of range".into(),
        ));
    }
    let xs: Vec<S> = (0..=n)
        .map(|i| radius * S::of_usize(i) / S::of_usize(n))
        .collect();
    let p = dim as i32 - 1;
    let (volume, weight): (S, Box<dyn Fn(S) -> S>) = if dim == 1 {
        (radius, Box::new(|_r: S| S::one()))
    } else {
        let area = sphere_volume::<S>(dim - 1);
        if geodesic {
            (
                spherical_cap_volume(dim, radius)?,
                Box::new(move |r: S| area * r.sin().powi(p)),
            )
        } else {
            (
                area * radius.powi(dim as i32) / S::of_usize(dim),
                Box::new(move |r: S| area * r.powi(p)),
            )
        }
    };
    let (w, a) = assemble_1d(&xs, weight, Some(volume));
    let boundary = match (bc, dim) {
        (Bc::Dirichlet, 1) => vec![0, n],
        _ => vec![n],
    };
    let diameter = if geodesic {
        (radius * S::of(2.0)).min(S::PI())
    } else {
        radius * S::of(2.0)
    };
    Ok(Grid {
        domain: Domain {
            kind: DomainKind::BallRadial {
                dim,
                radius,
                n,
                geodesic,
            },
            coords: xs.iter().map(|&t| vec![t]).collect(),
            weights: w,
            boundary,
            diameter,
            total_volume: volume,
        },
        lap: Laplacian { stiffness: a, bc },
        reflections: vec![],
        elements: (0..n).map(|i| vec![i, i + 1]).collect(),
    })
}

/// SO(2)xSO(2)-invariant reduction of S^3: s in [0, pi/2], operator
/// u'' + (cot s - tan s) u' in weak form with weight cos(s) sin(s), Neumann
/// ends. The Clifford torus sits at s = pi/4.
pub fn clifford_reduced<S: Scalar>(n: usize) -> Result<Grid<S>, GeometryError> {
    if n < 32 {
        return Err(GeometryError::BadParameter(
            "clifford grid needs n >= 32".into(),
        ));
    }
    if n % 2 != 0 {
        return Err(GeometryError::BadParameter(
            "clifford grid needs even n (node at pi/4)".into(),
        ));
    }
    let xs: Vec<S> = (0..=n)
        .map(|i| S::FRAC_PI_2() * S::of_usize(i) / S::of_usize(n))
        .collect();
    let four_pi2 = S::of(4.0) * S::PI() * S::PI();
    let (w, a) = assemble_1d(
        &xs,
        |s: S| four_pi2 * s.cos() * s.sin(),
        Some(sphere_volume(3)),
    );
    let perm: Vec<usize> = (0..=n).map(|i| n - i).collect();
    let side: Vec<i8> = (0..=n)
        .map(|i| {
            if 2 * i < n {
                1
            } else if 2 * i > n {
                -1
            } else {
                0
            }
        })
        .collect();
    Ok(Grid {
        domain: Domain {
            kind: DomainKind::CliffordReduced { n },
            coords: xs.iter().map(|&t| vec![t]).collect(),
            weights: w,
            boundary: vec![],
            diameter: S::PI(),
            total_volume: sphere_volume(3),
        },
        lap: Laplacian {
            stiffness: a,
            bc: Bc::Neumann,
        },
        reflections: vec![Reflection {
            label: "torus_swap".into(),
            normal: None,
            perm,
            side,
        }],
        elements: (0..n).map(|i| vec![i, i + 1]).collect(),
    })
}

/// Reduced solid torus {s in [pi/4, pi/2]} with Dirichlet condition on the
/// Clifford torus; first Dirichlet eigenvalue is lambda_2(S^3) = 8.
pub fn clifford_half<S: Scalar>(n: usize) -> Result<Grid<S>, GeometryError> {
    if n < 16 {
        return Err(GeometryError::BadParameter(
            "clifford half grid needs n >= 16".into(),
        ));
    }
    let xs: Vec<S> = (0..=n)
        .map(|i| S::FRAC_PI_4() + S::FRAC_PI_4() * S::of_usize(i) / S::of_usize(n))
        .collect();
    let four_pi2 = S::of(4.0) * S::PI() * S::PI();
    let half_volume = S::PI() * S::PI();
    let (w, a) = assemble_1d(&xs, |s: S| four_pi2 * s.cos() * s.sin(), Some(half_volume));
    Ok(Grid {
        domain: Domain {
            kind: DomainKind::CliffordHalf { n },
            coords: xs.iter().map(|&t| vec![t]).collect(),
            weights: w,
            boundary: vec![0],
            diameter: S::PI(),
            total_volume: half_volume,
        },
        lap: Laplacian {
            stiffness: a,
            bc: Bc::Dirichlet,
        },
        reflections: vec![],
        elements: (0..n).map(|i| vec![i, i + 1]).collect(),
    })
}

/// Equatorial band of S^N at geodesic distance < h from {x_{N+1} = 0}, with
/// Dirichlet conditions on both rims; its first eigenvalue is
/// (pi/(2h))^2 - 1 for N = 3 (sin-substitution plus the string spectrum).
pub fn spherical_segment<S: Scalar>(dim: usize, h: S, n: usize) -> Result<Grid<S>, GeometryError> {
    if dim < 2 {
        return Err(GeometryError::BadParameter(
            "segment dimension must be >= 2".into(),
        ));
    }
    if n < 16 {
        return Err(GeometryError::BadParameter(
            "segment grid needs n >= 16".into(),
        ));
    }
    if h <= S::zero() || h >= S::FRAC_PI_2() {
        return Err(GeometryError::BadParameter(
            "segment half-width must lie in (0, pi/2)".into(),
        ));
    }
    let lo = S::FRAC_PI_2() - h;
    let hi = S::FRAC_PI_2() + h;
    let xs: Vec<S> = (0..=n)
        .map(|i| lo + (hi - lo) * S::of_usize(i) / S::of_usize(n))
        .collect();
    let area = sphere_volume::<S>(dim - 1);
    let p = dim as i32 - 1;
    let volume = area * gauss_integral(lo, hi, |t: S| t.sin().powi(p));
    let (w, a) = assemble_1d(&xs, |t: S| area * t.sin().powi(p), Some(volume));
    Ok(Grid {
        domain: Domain {
            kind: DomainKind::SphericalSegment { dim, h, n },
            coords: xs.iter().map(|&t| vec![t]).collect(),
            weights: w,
            boundary: vec![0, n],
            diameter: (S::of(2.0) * h).min(S::PI()),
            total_volume: volume,
        },
        lap: Laplacian {
            stiffness: a,
            bc: Bc::Dirichlet,
        },
        reflections: vec![],
        elements: (0..n).map(|i| vec![i, i + 1]).collect(),
    })
}

const CAP_PANELS: usize = 64;

/// |B_r| in S^N: beta_{N-1} * int_0^r sin^{N-1} t dt by composite Gauss quadrature.
pub fn spherical_cap_volume<S: Scalar>(n_dim: usize, r: S) -> Result<S, GeometryError> {
    if r < S::zero() || r > S::PI() {
        return Err(GeometryError::OutOfRange(format!(
            "cap radius {} not in [0, pi]",
            r.as_f64()
        )));
    }
    let area = sphere_volume::<S>(n_dim - 1);
    Ok(area * gauss_integral(S::zero(), r, |t: S| t.sin().powi(n_dim as i32 - 1)))
}

/// Inverse of [`spherical_cap_volume`] by monotone bisection.
pub fn cap_radius<S: Scalar>(n_dim: usize, v: S) -> Result<S, GeometryError> {
    let total = sphere_volume::<S>(n_dim);
    if v < S::zero() || v > total {
        return Err(GeometryError::OutOfRange(format!(
            "cap volume {} not in [0, beta_N = {}]",
            v.as_f64(),
            total.as_f64()
        )));
    }
    let (mut lo, mut hi) = (S::zero(), S::PI());
    for _ in 0..200 {
        let mid = (lo + hi) * S::of(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        if spherical_cap_volume(n_dim, mid)? < v {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) * S::of(0.5))
}

/// Composite 8-point Gauss-Legendre on CAP_PANELS panels.
fn gauss_integral<S: Scalar>(a: S, b: S, f: impl Fn(S) -> S) -> S {
    const NODES: [f64; 4] = [
        0.1834346424956498,
        0.5255324099163290,
        0.7966664774136267,
        0.9602898564975363,
    ];
    const WEIGHTS: [f64; 4] = [
        0.3626837833783620,
        0.3137066458778873,
        0.2223810344533745,
        0.1012285362903763,
    ];
    let mut total = S::zero();
    let hp = (b - a) / S::of_usize(CAP_PANELS);
    for p in 0..CAP_PANELS {
        let lo = a + hp * S::of_usize(p);
        let mid = lo + hp * S::of(0.5);
        let half = hp * S::of(0.5);
        for k in 0..4 {
            let x = S::of(NODES[k]) * half;
            total += S::of(WEIGHTS[k]) * half * (f(mid + x) + f(mid - x));
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{lowest_eigenpairs, wdot, EigOpts};

    #[test]
    fn sphere_volumes() {
        assert!((sphere_volume::<f64>(2) - 4.0 * std::f64::consts::PI).abs() < 1e-12);
        let b3 = 2.0 * std::f64::consts::PI.powi(2);
        assert!((sphere_volume::<f64>(3) - b3).abs() < 1e-12);
    }

    #[test]
    fn sphere_radial_volume_and_kernel() {
        let g = sphere_radial::<f64>(2, 64).unwrap();
        let sum: f64 = g.domain.weights.iter().sum();
        assert!((sum - 4.0 * std::f64::consts::PI).abs() < 1e-6 * sum);
        // constants in the Neumann kernel
        let ones = vec![1.0; g.n_nodes()];
        let au = g.lap.stiffness.apply(&ones);
        for v in au {
            assert!(v.abs() < 1e-12);
        }
        assert_eq!(g.lap.stiffness.symmetry_defect(), 0.0);
    }

    #[test]
    fn sphere3_low_spectrum() {
        // lowest -Lap eigenvalues on S^3 are l(l+2): 0, 3, 8
        let g = sphere_radial::<f64>(3, 400).unwrap();
        let q = vec![0.0; g.n_nodes()];
        let eigs = lowest_eigenpairs(
            &g.lap.stiffness,
            &q,
            &g.domain.weights,
            &EigOpts {
                k: 3,
                ..Default::default()
            },
        );
        assert!(eigs.values[0].abs() < 1e-8);
        assert!(
            (eigs.values[1] - 3.0).abs() < 0.005 * 3.0,
            "{}",
            eigs.values[1]
        );
        assert!(
            (eigs.values[2] - 8.0).abs() < 0.005 * 8.0,
            "{}",
            eigs.values[2]
        );
    }

    #[test]
    fn sphere_eigenvalue_refinement_order() {
        let mut errs = Vec::new();
        for n in [100usize, 200] {
            let g = sphere_radial::<f64>(3, n).unwrap();
            let q = vec![0.0; g.n_nodes()];
            let eigs = lowest_eigenpairs(
                &g.lap.stiffness,
                &q,
                &g.domain.weights,
                &EigOpts {
                    k: 2,
                    ..Default::default()
                },
            );
            errs.push((eigs.values[1] - 3.0).abs());
        }
        let order = (errs[0] / errs[1]).log2();
        assert!(order >= 1.8, "observed order {order}");
    }

    #[test]
    fn geodesic_ball_dirichlet_eigenvalue() {
        // lambda_1(B_tau in S^3) = (pi/tau)^2 - 1
        for (tau, expect) in [
            (std::f64::consts::PI / 2.0, 3.0),
            (std::f64::consts::PI / 3.0, 8.0),
        ] {
            let g = ball_radial::<f64>(3, tau, 400, Bc::Dirichlet, true).unwrap();
            let q = vec![0.0; g.n_nodes()];
            let (a, qs, ms, _) = g.reduced_pencil(&q);
            let eigs = lowest_eigenpairs(
                &a,
                &qs,
                &ms,
                &EigOpts {
                    k: 1,
                    ..Default::default()
                },
            );
            assert!(
                (eigs.values[0] - expect).abs() < 0.01 * expect,
                "tau={tau}: {} vs {expect}",
                eigs.values[0]
            );
        }
    }

    #[test]
    fn interval_dirichlet_eigenvalue() {
        let g = ball_radial::<f64>(1, 1.0, 400, Bc::Dirichlet, false).unwrap();
        assert_eq!(g.domain.boundary, vec![0, 400]);
        let q = vec![0.0; g.n_nodes()];
        let (a, qs, ms, _) = g.reduced_pencil(&q);
        let eigs = lowest_eigenpairs(
            &a,
            &qs,
            &ms,
            &EigOpts {
                k: 1,
                ..Default::default()
            },
        );
        let pi2 = std::f64::consts::PI.powi(2);
        assert!((eigs.values[0] - pi2).abs() < 0.005 * pi2);
    }

    #[test]
    fn clifford_operator_on_harmonic() {
        // cos(2s) is the degree-2 harmonic of the reduction; eigenvalue 8
        let g = clifford_reduced::<f64>(400).unwrap();
        let u: Vec<f64> = g.domain.coords.iter().map(|c| (2.0 * c[0]).cos()).collect();
        let lap = g.laplacian_apply(&u);
        for i in 10..g.n_nodes() - 10 {
            let want = -8.0 * u[i];
            if u[i].abs() > 0.2 {
                assert!((lap[i] - want).abs() < 0.005 * want.abs().max(1.0), "i={i}");
            }
        }
        let sum: f64 = g.domain.weights.iter().sum();
        let b3 = sphere_volume::<f64>(3);
        assert!((sum - b3).abs() < 1e-6 * b3);
        // constant in the kernel
        let ones = vec![1.0; g.n_nodes()];
        for v in g.lap.stiffness.apply(&ones) {
            assert!(v.abs() < 1e-10);
        }
    }

    #[test]
    fn clifford_half_dirichlet_eigenvalue() {
        let g = clifford_half::<f64>(200).unwrap();
        let q = vec![0.0; g.n_nodes()];
        let (a, qs, ms, _) = g.reduced_pencil(&q);
        let eigs = lowest_eigenpairs(
            &a,
            &qs,
            &ms,
            &EigOpts {
                k: 1,
                ..Default::default()
            },
        );
        assert!(
            (eigs.values[0] - 8.0).abs() < 0.01 * 8.0,
            "{}",
            eigs.values[0]
        );
    }

    #[test]
    fn cap_volume_closed_forms() {
        let pi = std::f64::consts::PI;
        // hemisphere of S^2 and full S^2
        let h = spherical_cap_volume::<f64>(2, pi / 2.0).unwrap();
        assert!((h - 2.0 * pi).abs() < 1e-10);
        let f = spherical_cap_volume::<f64>(2, pi).unwrap();
        assert!((f - 4.0 * pi).abs() < 1e-10);
        // half of beta_3 = pi^2 inverts to pi/2
        let r = cap_radius::<f64>(3, pi * pi).unwrap();
        assert!((r - pi / 2.0).abs() < 1e-10);
        // round trips
        for i in 1..20 {
            let rr = pi * i as f64 / 20.0;
            let v = spherical_cap_volume::<f64>(3, rr).unwrap();
            let back = cap_radius::<f64>(3, v).unwrap();
            assert!((back - rr).abs() < 1e-10);
        }
        assert!(spherical_cap_volume::<f64>(2, -0.1).is_err());
        assert!(cap_radius::<f64>(2, 100.0).is_err());
    }

    #[test]
    fn quadrature_of_degree_two_polynomials() {
        // int_{S^3} x4^2 = beta_3 / 4 with x4 = cos(theta)
        let g = sphere_radial::<f64>(3, 300).unwrap();
        let vals: Vec<f64> = g.domain.coords.iter().map(|c| c[0].cos().powi(2)).collect();
        let got = wdot(&g.domain.weights, &vals, &vec![1.0; g.n_nodes()]);
        let want = sphere_volume::<f64>(3) / 4.0;
        assert!((got - want).abs() < 1e-4 * want);
    }

    #[test]
    fn equator_reflection_is_involution() {
        let g = sphere_radial::<f64>(3, 64).unwrap();
        let r = &g.reflections[0];
        for i in 0..g.n_nodes() {
            assert_eq!(r.perm[r.perm[i]], i);
            // weights symmetric along the orbit
            assert!((g.domain.weights[i] - g.domain.weights[r.perm[i]]).abs() < 1e-12);
        }
    }

    #[test]
    fn parameter_validation() {
        assert!(sphere_radial::<f64>(1, 100).is_err());
        assert!(sphere_radial::<f64>(3, 8).is_err());
        assert!(ball_radial::<f64>(3, -1.0, 100, Bc::Dirichlet, false).is_err());
        assert!(ball_radial::<f64>(3, 4.0, 100, Bc::Dirichlet, true).is_err());
        assert!(clifford_reduced::<f64>(31).is_err());
    }
}
