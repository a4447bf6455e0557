//! Linearized operator L_u = -Lap + f'(u) (Allen-Cahn scale: -eps^2 Lap + W''),
//! lowest eigenpairs, Morse index and nullity.
//!
//! Spectra are computed in the function class of the stored domain. On
//! `SphereRadial` grids the operator separates over spherical harmonics of
//! S^{N-1}, so the full-sphere spectrum is assembled from per-mode radial
//! problems with their multiplicities; everywhere else the reduced pencil is
//! solved directly.

use std::sync::Arc;

use crate::field::Field;
use crate::geometry::{DomainKind, Grid};
use crate::linalg::{lowest_eigenpairs, wdot, EigOpts, Triplets};
use crate::potential::Potential;
use crate::scalar::Scalar;

#[derive(Debug, thiserror::Error)]
pub enum SpectralError {
    #[error("eigensolver did not converge")]
    EigensolverNoConvergence,
    #[error("operation needs a SphereRadial domain, got {0}")]
    NotRadialSphere(String),
    #[error("invalid input: {0}")]
    BadInput(String),
}

#[derive(Debug, Clone)]
pub struct SpectrumReport<S> {
    /// Ascending, in the reported scale (Allen-Cahn: -eps^2 Lap + W'').
    pub eigenvalues: Vec<S>,
    /// Matching eigenfields; for mode-decomposed spectra these are the radial
    /// profiles of each mode, repeated per multiplicity.
    pub eigenfields: Vec<Field<S>>,
    pub morse_index: usize,
    pub nullity: usize,
    pub zero_tol: S,
    /// Per-mode breakdown when the spectrum was assembled by separation.
    pub modes: Option<Vec<ModeSpectrum<S>>>,
}

#[derive(Debug, Clone)]
pub struct ModeSpectrum<S> {
    pub ell: usize,
    /// l (l + N - 2): the S^{N-1} angular eigenvalue.
    pub angular_eigenvalue: S,
    pub multiplicity: usize,
    /// Reported-scale radial eigenvalues, ascending.
    pub radial_eigenvalues: Vec<S>,
}

/// Dimension of the degree-l spherical harmonics on S^{N-1}.
pub fn harmonic_multiplicity(n_dim: usize, ell: usize) -> usize {
    if ell == 0 {
        return 1;
    }
    match n_dim {
        2 => 2,
        _ => {
            // (2l + N - 2) * prod_{j=1}^{N-3} (l + j) / (N - 2)!
            let mut num = 2 * ell + n_dim - 2;
            let mut den = 1usize;
            for j in 1..=(n_dim - 3) {
                num *= ell + j;
                den *= j + 1;
            }
            num / den
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpectralOpts<S> {
    pub k: usize,
    /// Eigenvalues in [-zero_tol, zero_tol] count as kernel; `None` selects
    /// the grid-aware default.
    pub zero_tol: Option<S>,
    pub ell_max: usize,
    pub radial_per_ell: usize,
    pub seed: u64,
}

impl<S: Scalar> Default for SpectralOpts<S> {
    fn default() -> Self {
        SpectralOpts {
            k: 12,
            zero_tol: None,
            ell_max: 6,
            radial_per_ell: 8,
            seed: 1,
        }
    }
}

/// Grid-aware kernel tolerance: ten times the discrete defect of a known
/// analytic eigenvalue on this grid, floored at 1e-4 (reported scale).
pub fn default_zero_tol<S: Scalar>(grid: &Grid<S>, pot: &Potential<S>) -> S {
    let scale = pot.index_scale();
    let err = calibration_error(grid);
    scale * (S::of(10.0) * err).max(S::of(1e-4))
}

/// Discrete-vs-analytic defect of a reference Laplace eigenvalue.
fn calibration_error<S: Scalar>(grid: &Grid<S>) -> S {
    let reference: Option<(S, usize)> = match *grid.kind() {
        // lowest l = 1 radial eigenvalue of -Lap is N (coordinate functions)
        DomainKind::SphereRadial { dim, .. } => Some((S::of_usize(dim), 1)),
        DomainKind::CliffordReduced { .. } => Some((S::of(8.0), 0)),
        DomainKind::TriSphere { .. } => Some((S::of(2.0), 0)),
        _ => None,
    };
    match (reference, grid.kind()) {
        (Some((exact, ell)), DomainKind::SphereRadial { .. }) => {
            let zero = vec![S::zero(); grid.n_nodes()];
            let vals = radial_mode_eigs(grid, &zero, ell, 1, S::one());
            (vals[0] - exact).abs()
        }
        (Some((exact, _)), DomainKind::CliffordReduced { .. })
        | (Some((exact, _)), DomainKind::TriSphere { .. }) => {
            let q = vec![S::zero(); grid.n_nodes()];
            let (a, qs, ms, _) = grid.reduced_pencil(&q);
            let eigs = lowest_eigenpairs(
                &a,
                &qs,
                &ms,
                &EigOpts {
                    k: 2,
                    ..Default::default()
                },
            );
            (eigs.values[1] - exact).abs()
        }
        _ => {
            // no closed-form reference: second-order heuristic
            let h = grid.spacing();
            h * h * S::of(10.0)
        }
    }
}

/// Radial eigenvalues (internal scale) of the pencil for harmonic mode `ell`,
/// with the potential term q(u) already per node. Dirichlet rows at the poles
/// for ell >= 1 absorb the sin^{-2} angular term.
fn radial_mode_eigs<S: Scalar>(
    grid: &Grid<S>,
    fprime: &[S],
    ell: usize,
    k: usize,
    _scale: S,
) -> Vec<S> {
    let DomainKind::SphereRadial { dim, n } = *grid.kind() else {
        panic!("radial_mode_eigs needs SphereRadial");
    };
    let w = grid.mass();
    let lam_ang = S::of_usize(ell * (ell + dim - 2));
    if ell == 0 {
        let q: Vec<S> = (0..grid.n_nodes()).map(|i| w[i] * fprime[i]).collect();
        let eigs = lowest_eigenpairs(
            &grid.lap.stiffness,
            &q,
            w,
            &EigOpts {
                k,
                ..Default::default()
            },
        );
        eigs.values
    } else {
        let keep: Vec<usize> = (1..n).collect();
        let a = grid.lap.stiffness.submatrix(&keep);
        let mut q = Vec::with_capacity(keep.len());
        let mut mass = Vec::with_capacity(keep.len());
        for &i in &keep {
            let th = grid.domain.coords[i][0];
            let s2 = th.sin() * th.sin();
            q.push(w[i] * (fprime[i] + lam_ang / s2));
            mass.push(w[i]);
        }
        let eigs = lowest_eigenpairs(
            &a,
            &q,
            &mass,
            &EigOpts {
                k,
                ..Default::default()
            },
        );
        eigs.values
    }
}

/// Radial eigenpair (internal scale) for mode `ell`; the eigenfield is the
/// radial profile scattered back to the full grid.
fn radial_mode_eigpairs<S: Scalar>(
    grid: &Arc<Grid<S>>,
    fprime: &[S],
    ell: usize,
    k: usize,
) -> (Vec<S>, Vec<Field<S>>) {
    let DomainKind::SphereRadial { dim, n } = *grid.kind() else {
        panic!("radial_mode_eigpairs needs SphereRadial");
    };
    let w = grid.mass();
    let lam_ang = S::of_usize(ell * (ell + dim - 2));
    let (keep, a, q, mass): (Vec<usize>, _, Vec<S>, Vec<S>) = if ell == 0 {
        let keep: Vec<usize> = (0..=n).collect();
        let q = (0..grid.n_nodes()).map(|i| w[i] * fprime[i]).collect();
        (keep, grid.lap.stiffness.clone(), q, w.to_vec())
    } else {
        let keep: Vec<usize> = (1..n).collect();
        let a = grid.lap.stiffness.submatrix(&keep);
        let mut q = Vec::with_capacity(keep.len());
        let mut mass = Vec::with_capacity(keep.len());
        for &i in &keep {
            let th = grid.domain.coords[i][0];
            let s2 = th.sin() * th.sin();
            q.push(w[i] * (fprime[i] + lam_ang / s2));
            mass.push(w[i]);
        }
        (keep, a, q, mass)
    };
    let eigs = lowest_eigenpairs(
        &a,
        &q,
        &mass,
        &EigOpts {
            k,
            ..Default::default()
        },
    );
    let fields = eigs
        .vectors
        .iter()
        .map(|v| {
            let mut full = vec![S::zero(); grid.n_nodes()];
            for (j, &i) in keep.iter().enumerate() {
                full[i] = v[j];
            }
            Field::new(grid.clone(), full)
        })
        .collect();
    (eigs.values, fields)
}

/// Per-harmonic-mode spectra of L_u for a radial state on S^N.
pub fn mode_spectrum<S: Scalar>(
    u: &Field<S>,
    pot: &Potential<S>,
    opts: &SpectralOpts<S>,
) -> Result<Vec<ModeSpectrum<S>>, SpectralError> {
    let DomainKind::SphereRadial { dim, .. } = *u.grid.kind() else {
        return Err(SpectralError::NotRadialSphere(format!(
            "{:?}",
            u.grid.kind()
        )));
    };
    if opts.ell_max > 10 {
        return Err(SpectralError::BadInput("ell_max must be <= 10".into()));
    }
    let scale = pot.index_scale();
    let fprime: Vec<S> = u.values.iter().map(|&v| pot.d2(v)).collect();
    let mut out = Vec::new();
    for ell in 0..=opts.ell_max {
        let vals = radial_mode_eigs(&u.grid, &fprime, ell, opts.radial_per_ell, scale);
        out.push(ModeSpectrum {
            ell,
            angular_eigenvalue: S::of_usize(ell * (ell + dim - 2)),
            multiplicity: harmonic_multiplicity(dim, ell),
            radial_eigenvalues: vals.iter().map(|&v| scale * v).collect(),
        });
    }
    Ok(out)
}

/// Lowest-k spectrum of L_u with Morse index and nullity. SphereRadial
/// domains assemble the full spectrum by separation of variables; other
/// domains solve the reduced pencil by shift-invert iteration with a seeded
/// start block.
pub fn spectrum<S: Scalar>(
    u: &Field<S>,
    pot: &Potential<S>,
    opts: &SpectralOpts<S>,
) -> Result<SpectrumReport<S>, SpectralError> {
    if opts.k > 50 {
        return Err(SpectralError::BadInput("k must be <= 50".into()));
    }
    let zero_tol = opts
        .zero_tol
        .unwrap_or_else(|| default_zero_tol(&u.grid, pot));
    let scale = pot.index_scale();

    if matches!(u.grid.kind(), DomainKind::SphereRadial { .. }) {
        let fprime: Vec<S> = u.values.iter().map(|&v| pot.d2(v)).collect();
        // expand modes until everything at or below the k-th value is covered
        let mut entries: Vec<(S, usize, usize)> = Vec::new(); // (value, ell, which)
        let mut ell = 0usize;
        let mut highest_needed = S::infinity();
        while ell <= 10 {
            let vals = radial_mode_eigs(&u.grid, &fprime, ell, opts.radial_per_ell, scale);
            let lowest = vals[0];
            for (j, &v) in vals.iter().enumerate() {
                entries.push((v, ell, j));
            }
            entries.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            let mut count = 0usize;
            for e in &entries {
                count += harmonic_multiplicity(
                    match *u.grid.kind() {
                        DomainKind::SphereRadial { dim, .. } => dim,
                        _ => unreachable!(),
                    },
                    e.1,
                );
                if count >= opts.k {
                    highest_needed = e.0;
                    break;
                }
            }
            if lowest > highest_needed && ell >= 2 {
                break;
            }
            ell += 1;
        }
        // assemble the k lowest with eigenfields
        let mut values = Vec::new();
        let mut fields = Vec::new();
        let mut cache: Vec<(usize, Vec<S>, Vec<Field<S>>)> = Vec::new();
        let dim = match *u.grid.kind() {
            DomainKind::SphereRadial { dim, .. } => dim,
            _ => unreachable!(),
        };
        for (v, ell, which) in entries {
            if values.len() >= opts.k {
                break;
            }
            let pos = match cache.iter().position(|(l, _, _)| *l == ell) {
                Some(p) => p,
                None => {
                    let (vals, flds) =
                        radial_mode_eigpairs(&u.grid, &fprime, ell, opts.radial_per_ell);
                    cache.push((ell, vals, flds));
                    cache.len() - 1
                }
            };
            let mult = harmonic_multiplicity(dim, ell);
            for _ in 0..mult {
                if values.len() >= opts.k {
                    break;
                }
                values.push(scale * v);
                fields.push(cache[pos].2[which].clone());
            }
        }
        let morse_index = values.iter().filter(|&&v| v < -zero_tol).count();
        let nullity = values.iter().filter(|&&v| v.abs() <= zero_tol).count();
        let modes = mode_spectrum(u, pot, opts)?;
        Ok(SpectrumReport {
            eigenvalues: values,
            eigenfields: fields,
            morse_index,
            nullity,
            zero_tol,
            modes: Some(modes),
        })
    } else {
        let w = u.grid.mass();
        let q_full: Vec<S> = (0..u.n()).map(|i| w[i] * pot.d2(u.values[i])).collect();
        let (a, q, mass, map) = u.grid.reduced_pencil(&q_full);
        let eigs = lowest_eigenpairs(
            &a,
            &q,
            &mass,
            &EigOpts {
                k: opts.k,
                seed: opts.seed,
                ..Default::default()
            },
        );
        if !eigs.converged && a.bandwidth() > 1 {
            return Err(SpectralError::EigensolverNoConvergence);
        }
        let values: Vec<S> = eigs.values.iter().map(|&v| scale * v).collect();
        let fields = eigs
            .vectors
            .iter()
            .map(|v| {
                let mut full = vec![S::zero(); u.n()];
                for (j, &i) in map.iter().enumerate() {
                    full[i] = v[j];
                }
                Field::new(u.grid.clone(), full)
            })
            .collect();
        let morse_index = values.iter().filter(|&&v| v < -zero_tol).count();
        let nullity = values.iter().filter(|&&v| v.abs() <= zero_tol).count();
        Ok(SpectrumReport {
            eigenvalues: values,
            eigenfields: fields,
            morse_index,
            nullity,
            zero_tol,
            modes: None,
        })
    }
}

/// Stability report of a constant critical point: eigenvalues are the
/// discrete Laplace eigenvalues shifted by f'(c).
pub fn constant_stability<S: Scalar>(
    c: S,
    pot: &Potential<S>,
    grid: &Arc<Grid<S>>,
    opts: &SpectralOpts<S>,
) -> Result<SpectrumReport<S>, SpectralError> {
    if pot.d1(c).abs() > S::of(1e-8) {
        return Err(SpectralError::BadInput(format!(
            "{} is not a critical point of {}",
            c.as_f64(),
            pot.name
        )));
    }
    spectrum(&Field::constant(grid, c), pot, opts)
}

/// Rayleigh-quotient defect of a reported eigenpair, relative to max(1, |lambda|).
pub fn rayleigh_defect<S: Scalar>(
    u_field: &Field<S>,
    pot: &Potential<S>,
    eigenfield: &Field<S>,
    lambda_reported: S,
    ell: Option<usize>,
) -> S {
    let grid = &u_field.grid;
    let w = grid.mass();
    let scale = pot.index_scale();
    let lam_int = lambda_reported / scale;
    let v = &eigenfield.values;
    let mut quad = grid.lap.stiffness.quad(v);
    for i in 0..v.len() {
        let mut q = pot.d2(u_field.values[i]);
        if let Some(l) = ell {
            if l > 0 {
                let th = grid.domain.coords[i][0];
                let s2 = th.sin() * th.sin();
                if v[i] != S::zero() {
                    q += S::of_usize(l * (l + 1)) / s2;
                }
            }
        }
        quad += w[i] * q * v[i] * v[i];
    }
    let norm2 = wdot(w, v, v);
    ((quad / norm2) - lam_int).abs() / S::one().max(lam_int.abs())
}

/// Helper used by tests: tridiagonal operator sanity for a custom pencil.
#[doc(hidden)]
pub fn _pencil_from_parts<S: Scalar>(diag: Vec<S>, off: Vec<S>) -> crate::linalg::SparseSym<S> {
    let n = diag.len();
    let mut t = Triplets::new(n);
    for i in 0..n {
        t.push(i, i, diag[i]);
        if i + 1 < n {
            t.push(i, i + 1, off[i]);
            t.push(i + 1, i, off[i]);
        }
    }
    t.into_csr()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::newton_solve;
    use crate::geometry::sphere_radial;

    fn s3(n: usize) -> Arc<Grid<f64>> {
        Arc::new(sphere_radial::<f64>(3, n).unwrap())
    }

    #[test]
    fn multiplicities() {
        // S^2 harmonics: 2l + 1
        for l in 0..5 {
            assert_eq!(harmonic_multiplicity(3, l), 2 * l + 1);
        }
        // N = 4 gives dim H_l(S^3) = (l+1)^2
        for l in 0..5 {
            assert_eq!(harmonic_multiplicity(4, l), (l + 1) * (l + 1));
        }
        // sum over l <= 3 for N = 3 equals dim H_3(S^3) = 16
        let total: usize = (0..=3).map(|l| harmonic_multiplicity(3, l)).sum();
        assert_eq!(total, 16);
    }

    #[test]
    fn index_of_zero_state_is_five() {
        let grid = s3(400);
        let pot = Potential::allen_cahn(0.45);
        let u = Field::constant(&grid, 0.0);
        let rep = spectrum(
            &u,
            &pot,
            &SpectralOpts {
                k: 16,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(
            rep.morse_index,
            5,
            "eigenvalues {:?}",
            &rep.eigenvalues[..8]
        );
        assert_eq!(rep.nullity, 0);
        // mode examples: l = 0 lowest is -1, l = 1 lowest is 3 eps^2 - 1
        let modes = rep.modes.as_ref().unwrap();
        assert!((modes[0].radial_eigenvalues[0] + 1.0).abs() < 1e-6);
        let want = 3.0 * 0.45f64.powi(2) - 1.0;
        assert!((modes[1].radial_eigenvalues[0] - want).abs() < 1e-3 * want.abs());
    }

    #[test]
    fn stable_well_bottom() {
        let grid = s3(200);
        let pot = Potential::allen_cahn(0.7);
        let rep = constant_stability(
            1.0,
            &pot,
            &grid,
            &SpectralOpts {
                k: 6,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(rep.morse_index, 0);
        // lowest eigenvalue is W''(1) = 2 (constant mode), eps-independent
        assert!(
            (rep.eigenvalues[0] - 2.0).abs() < 1e-8,
            "{}",
            rep.eigenvalues[0]
        );
    }

    #[test]
    fn nullity_four_at_first_threshold() {
        let grid = s3(400);
        let eps1 = 1.0 / 3.0f64.sqrt();
        let pot = Potential::allen_cahn(eps1);
        let rep = constant_stability(
            0.0,
            &pot,
            &grid,
            &SpectralOpts {
                k: 10,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(rep.nullity, 4, "eigenvalues {:?}", &rep.eigenvalues[..6]);
        assert_eq!(rep.morse_index, 1);
    }

    #[test]
    fn ground_state_index_one_nullity_three() {
        let grid = s3(400);
        let pot = Potential::allen_cahn(0.4);
        let seed = Field::from_fn(&grid, |c| 0.9 * (c[0].cos() / 0.4).tanh());
        let u = newton_solve(&seed, &pot, 1e-11, 80).unwrap();
        let rep = spectrum(
            &u,
            &pot,
            &SpectralOpts {
                k: 10,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(
            rep.morse_index,
            1,
            "eigenvalues {:?}",
            &rep.eigenvalues[..6]
        );
        assert_eq!(
            rep.nullity,
            3,
            "zero_tol {} eigs {:?}",
            rep.zero_tol,
            &rep.eigenvalues[..6]
        );
        // kernel profile is proportional to u'(theta)
        let modes = rep.modes.as_ref().unwrap();
        assert!(modes[1].radial_eigenvalues[0].abs() <= rep.zero_tol);
        let (_, fields) = {
            let fprime: Vec<f64> = u.values.iter().map(|&v| pot.d2(v)).collect();
            radial_mode_eigpairs(&grid, &fprime, 1, 2)
        };
        let kernel = &fields[0];
        // compare with centered differences of u
        let n = grid.n_nodes() - 1;
        let mut du = vec![0.0; n + 1];
        for i in 1..n {
            let h = grid.domain.coords[i + 1][0] - grid.domain.coords[i - 1][0];
            du[i] = (u.values[i + 1] - u.values[i - 1]) / h;
        }
        let dot: f64 = (1..n).map(|i| du[i] * kernel.values[i]).sum();
        let na: f64 = (1..n).map(|i| du[i] * du[i]).sum::<f64>().sqrt();
        let nb: f64 = (1..n)
            .map(|i| kernel.values[i] * kernel.values[i])
            .sum::<f64>()
            .sqrt();
        assert!(
            dot.abs() / (na * nb) > 0.999,
            "cosine {}",
            dot.abs() / (na * nb)
        );
    }

    #[test]
    fn rayleigh_consistency() {
        let grid = s3(300);
        let pot = Potential::allen_cahn(0.5);
        let u = Field::constant(&grid, 0.0);
        let rep = spectrum(
            &u,
            &pot,
            &SpectralOpts {
                k: 6,
                ..Default::default()
            },
        )
        .unwrap();
        // l = 0 eigenfields are genuine radial eigenfunctions of the pencil
        let d = rayleigh_defect(&u, &pot, &rep.eigenfields[0], rep.eigenvalues[0], Some(0));
        assert!(d < 1e-8, "defect {d}");
    }
}
