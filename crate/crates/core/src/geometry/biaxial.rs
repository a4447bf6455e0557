//! Bi-axial reduction of S^3 via x3 = rho cos(phi), x4 = rho sin(phi): fields
//! invariant under rotation of (x1, x2) live on (rho, phi) in (0,1] x [0,2pi)
//! with volume weight rho and operator
//! (1/rho) d_rho(rho (1-rho^2) d_rho u) + (1/rho^2) d^2_phi u.
//!
//! Finite-volume on a rho-staggered grid: the degenerate coefficients at
//! rho = 0 (the (x1,x2) circle) and rho = 1 (the (x3,x4) circle) zero out the
//! end fluxes exactly, so both coordinate singularities are natural.

use crate::linalg::Triplets;
use crate::scalar::Scalar;

use super::{Bc, Domain, DomainKind, GeometryError, Grid, Laplacian};

/// Full periodic reduction; Neumann (closed manifold), no boundary.
pub fn biaxial<S: Scalar>(n_rho: usize, n_phi: usize) -> Result<Grid<S>, GeometryError> {
    if n_rho < 24 || n_phi < 24 {
        return Err(GeometryError::BadParameter(
            "biaxial grid sizes must be >= 24".into(),
        ));
    }
    if n_phi % 4 != 0 {
        return Err(GeometryError::BadParameter(
            "biaxial needs n_phi divisible by 4 (odd reflections across the axes)".into(),
        ));
    }
    let h_r = S::one() / S::of_usize(n_rho);
    let h_p = S::of(2.0) * S::PI() / S::of_usize(n_phi);
    let two_pi = S::of(2.0) * S::PI();
    let n = n_rho * n_phi;
    let idx = |i: usize, j: usize| (i - 1) * n_phi + (j % n_phi);

    let mut t = Triplets::new(n);
    let mut w = vec![S::zero(); n];
    let mut coords = vec![vec![S::zero(); 2]; n];
    for i in 1..=n_rho {
        let rho = (S::of_usize(i) - S::of(0.5)) * h_r;
        for j in 0..n_phi {
            let me = idx(i, j);
            coords[me] = vec![rho, S::of_usize(j) * h_p];
            w[me] = two_pi * rho * h_r * h_p;
            // radial face between ring i and i+1
            if i < n_rho {
                let rf = S::of_usize(i) * h_r;
                let c = two_pi * rf * (S::one() - rf * rf) * h_p / h_r;
                t.push_sym_pair(me, idx(i + 1, j), -c);
            }
            // angular face between j and j+1 (periodic)
            let c = two_pi * (S::one() / rho) * h_r / h_p;
            t.push_sym_pair(me, idx(i, j + 1), -c);
        }
    }
    let mut elements = Vec::new();
    for i in 1..n_rho {
        for j in 0..n_phi {
            elements.push(vec![
                idx(i, j),
                idx(i, j + 1),
                idx(i + 1, j + 1),
                idx(i + 1, j),
            ]);
        }
    }
    Ok(Grid {
        domain: Domain {
            kind: DomainKind::BiAxial { n_rho, n_phi },
            coords,
            weights: w,
            boundary: vec![],
            diameter: S::PI(),
            total_volume: super::sphere_volume(3),
        },
        lap: Laplacian {
            stiffness: t.into_csr(),
            bc: Bc::Neumann,
        },
        reflections: vec![],
        elements,
    })
}

/// Dirichlet slice {x3 > 0, x4 > 0}: phi in [0, pi/2] with walls at both ends
/// (m_phi cells, nodes at the walls included and pinned).
pub fn biaxial_quarter<S: Scalar>(n_rho: usize, m_phi: usize) -> Result<Grid<S>, GeometryError> {
    if n_rho < 24 || m_phi < 6 {
        return Err(GeometryError::BadParameter(
            "biaxial quarter needs n_rho >= 24, m_phi >= 6".into(),
        ));
    }
    let h_r = S::one() / S::of_usize(n_rho);
    let h_p = S::FRAC_PI_2() / S::of_usize(m_phi);
    let two_pi = S::of(2.0) * S::PI();
    let cols = m_phi + 1;
    let n = n_rho * cols;
    let idx = |i: usize, j: usize| (i - 1) * cols + j;

    let mut t = Triplets::new(n);
    let mut w = vec![S::zero(); n];
    let mut coords = vec![vec![S::zero(); 2]; n];
    let mut boundary = Vec::new();
    for i in 1..=n_rho {
        let rho = (S::of_usize(i) - S::of(0.5)) * h_r;
        for j in 0..=m_phi {
            let me = idx(i, j);
            coords[me] = vec![rho, S::of_usize(j) * h_p];
            let cell = if j == 0 || j == m_phi {
                S::of(0.5)
            } else {
                S::one()
            };
            w[me] = two_pi * rho * h_r * h_p * cell;
            if j == 0 || j == m_phi {
                boundary.push(me);
            }
            if i < n_rho {
                let rf = S::of_usize(i) * h_r;
                let c = two_pi * rf * (S::one() - rf * rf) * h_p / h_r * cell;
                t.push_sym_pair(me, idx(i + 1, j), -c);
            }
            if j < m_phi {
                let c = two_pi * (S::one() / rho) * h_r / h_p;
                t.push_sym_pair(me, idx(i, j + 1), -c);
            }
        }
    }
    let mut elements = Vec::new();
    for i in 1..n_rho {
        for j in 0..m_phi {
            elements.push(vec![
                idx(i, j),
                idx(i, j + 1),
                idx(i + 1, j + 1),
                idx(i + 1, j),
            ]);
        }
    }
    let quarter_volume = super::sphere_volume::<S>(3) / S::of(4.0);
    Ok(Grid {
        domain: Domain {
            kind: DomainKind::BiAxialQuarter { n_rho, m_phi },
            coords,
            weights: w,
            boundary,
            diameter: S::PI(),
            total_volume: quarter_volume,
        },
        lap: Laplacian {
            stiffness: t.into_csr(),
            bc: Bc::Dirichlet,
        },
        reflections: vec![],
        elements,
    })
}
