//! Epsilon sweeps of the Allen-Cahn solution families on S^3: threshold
//! detection, natural-parameter continuation of the ground, Clifford-torus
//! and cross-equators branches, the energy-gap table, and symmetry
//! certificates for the stored branch fields.

use std::sync::Arc;

use crate::field::{energy, residual, Field};
use crate::flow::{dirichlet_positive_solve, newton_solve, reflect_odd, FlowError, OddReflection};
use crate::geometry::{
    ball_radial, biaxial, biaxial_quarter, clifford_half, clifford_reduced, sphere_radial, Bc,
    DomainKind, GeometryError, Grid,
};
use crate::linalg::{lowest_eigenpairs, EigOpts};
use crate::potential::Potential;
use crate::scalar::Scalar;
use crate::spectral::{spectrum, SpectralError, SpectralOpts};

#[derive(Debug, thiserror::Error)]
pub enum BifurcationError {
    #[error("branch lost at eps = {eps}: {reason}")]
    BranchLost { eps: f64, reason: String },
    #[error("no branch point stored at eps = {0}")]
    MissingBranch(f64),
    #[error("invalid input: {0}")]
    BadInput(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Ground,
    Clifford,
    CrossEquators,
    ConstantZero,
}

impl Family {
    pub fn label(&self) -> &'static str {
        match self {
            Family::Ground => "ground",
            Family::Clifford => "clifford",
            Family::CrossEquators => "cross_equators",
            Family::ConstantZero => "constant_zero",
        }
    }

    pub fn parse(s: &str) -> Option<Family> {
        match s {
            "ground" => Some(Family::Ground),
            "clifford" => Some(Family::Clifford),
            "cross_equators" => Some(Family::CrossEquators),
            "constant_zero" => Some(Family::ConstantZero),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BranchPoint<S> {
    pub eps: S,
    /// E_eps of the stored solution.
    pub energy: S,
    pub morse_index: usize,
    pub nullity: usize,
    pub sup_norm: S,
    /// Family-specific reflection defect (sup norm).
    pub symmetry_defect: S,
    /// Distance of the nodal locus from its expected position (grid units
    /// are radians; None for the constant family).
    pub nodal_defect: Option<S>,
    pub residual: S,
    pub field: Field<S>,
}

#[derive(Debug, Clone)]
pub struct Branch<S> {
    pub family: Family,
    pub points: Vec<BranchPoint<S>>,
    /// Existence threshold detected from the discrete spectrum.
    pub detected_threshold: Option<S>,
}

#[derive(Debug, Clone, Copy)]
pub struct Thresholds<S> {
    pub lambda1: S,
    pub lambda2: S,
    pub eps1: S,
    pub eps2: S,
    pub eps1_analytic: Option<S>,
    pub eps2_analytic: Option<S>,
}

/// eps_k = sqrt(-W''(0) / lambda_k) from the first two nonzero Laplace
/// eigenvalues of the domain (in its symmetry class), with the closed-form
/// values alongside for round spheres.
pub fn thresholds<S: Scalar>(
    grid: &Arc<Grid<S>>,
    base_pot: &Potential<S>,
) -> Result<Thresholds<S>, BifurcationError> {
    let w2 = base_pot.d2(S::zero());
    if w2 >= S::zero() {
        return Err(BifurcationError::BadInput(
            "thresholds need an unstable origin: W''(0) < 0".into(),
        ));
    }
    let q = vec![S::zero(); grid.n_nodes()];
    let (a, qs, ms, _) = grid.reduced_pencil(&q);
    let eigs = lowest_eigenpairs(
        &a,
        &qs,
        &ms,
        &EigOpts {
            k: 4,
            ..Default::default()
        },
    );
    // first two nonzero eigenvalues (drop the Neumann kernel if present)
    let mut nonzero = eigs
        .values
        .iter()
        .copied()
        .filter(|v| v.abs() > S::of(1e-6));
    let lambda1 = nonzero
        .next()
        .ok_or_else(|| BifurcationError::BadInput("no nonzero eigenvalue found".into()))?;
    let lambda2 = nonzero
        .next()
        .ok_or_else(|| BifurcationError::BadInput("only one nonzero eigenvalue found".into()))?;
    let eps1 = (-w2 / lambda1).sqrt();
    let eps2 = (-w2 / lambda2).sqrt();
    let (eps1_analytic, eps2_analytic) = match *grid.kind() {
        DomainKind::SphereRadial { dim, .. } => {
            let l1 = S::of_usize(dim);
            let l2 = S::of_usize(2 * (dim + 1));
            (Some((-w2 / l1).sqrt()), Some((-w2 / l2).sqrt()))
        }
        _ => (None, None),
    };
    Ok(Thresholds {
        lambda1,
        lambda2,
        eps1,
        eps2,
        eps1_analytic,
        eps2_analytic,
    })
}

/// Grid bundle for the three solution families on S^3.
pub struct S3Grids<S> {
    pub sphere: Arc<Grid<S>>,
    pub hemisphere: Arc<Grid<S>>,
    pub clifford: Arc<Grid<S>>,
    pub clifford_half: Arc<Grid<S>>,
    pub biaxial: Arc<Grid<S>>,
    pub biaxial_quarter: Arc<Grid<S>>,
}

impl<S: Scalar> S3Grids<S> {
    pub fn build(n_radial: usize, n_rho: usize, n_phi: usize) -> Result<Self, BifurcationError> {
        Ok(S3Grids {
            sphere: Arc::new(sphere_radial(3, n_radial)?),
            hemisphere: Arc::new(ball_radial(
                3,
                S::FRAC_PI_2(),
                n_radial / 2,
                Bc::Dirichlet,
                true,
            )?),
            clifford: Arc::new(clifford_reduced(n_radial)?),
            clifford_half: Arc::new(clifford_half(n_radial / 2)?),
            biaxial: Arc::new(biaxial(n_rho, n_phi)?),
            biaxial_quarter: Arc::new(biaxial_quarter(n_rho, n_phi / 4)?),
        })
    }
}

/// First Dirichlet eigenvalue of a reduced half domain.
fn lambda1_of<S: Scalar>(grid: &Grid<S>) -> S {
    let q = vec![S::zero(); grid.n_nodes()];
    let (a, qs, ms, _) = grid.reduced_pencil(&q);
    lowest_eigenpairs(
        &a,
        &qs,
        &ms,
        &EigOpts {
            k: 1,
            ..Default::default()
        },
    )
    .values[0]
}

/// Existence check for the nonconstant ground state at a given eps.
///
/// The ground family is odd under the equator reflection, and the constant 0
/// is unstable within the odd class exactly for eps < eps_1, so a projected
/// (odd-constrained) flow from a small odd seed converges to the ground state
/// when it exists and to 0 otherwise. Round-off breaking of the odd symmetry
/// would otherwise feed the even unstable mode and drain the flow to +-1.
pub fn ground_state_at<S: Scalar>(
    grid: &Arc<Grid<S>>,
    eps: S,
    seed: Option<&Field<S>>,
) -> Result<Option<Field<S>>, BifurcationError> {
    let pot = Potential::allen_cahn(eps);
    let start = match seed {
        Some(f) => f.clone(),
        None => Field::from_fn(grid, |c| S::of(0.05) * c[0].cos()),
    };
    let dt = eps * eps * S::of(0.25);
    let flowed = odd_class_flow(&start, &pot, dt, S::of(1e-7), 40_000)?;
    let u = newton_solve(&flowed, &pot, S::of(1e-10), 80)?;
    if u.sup_norm() < S::of(1e-3) {
        return Ok(None);
    }
    // a nonconstant ground state stays strictly inside the wells
    if u.sup_norm() >= S::one() - S::of(1e-10) {
        return Err(BifurcationError::BranchLost {
            eps: eps.as_f64(),
            reason: "flow left the odd class and reached a well bottom".into(),
        });
    }
    Ok(Some(u))
}

/// Semi-implicit flow constrained to the odd symmetry class of the radial
/// sphere grid (the equator-reflection projection is applied after each step).
pub fn odd_class_flow<S: Scalar>(
    u0: &Field<S>,
    pot: &Potential<S>,
    dt: S,
    tol: S,
    max_steps: usize,
) -> Result<Field<S>, BifurcationError> {
    let grid = u0.grid.clone();
    let n = grid.n_nodes() - 1;
    let scaled: Vec<S> = grid.mass().iter().map(|&w| w / dt).collect();
    let lu = crate::linalg::BandedLU::factor(&grid.lap.stiffness, Some(&scaled));
    let mut u = u0.values.clone();
    for i in 0..=n {
        // start odd
        let v = (u[i] - u[n - i]) * S::of(0.5);
        u[i] = v;
    }
    for step in 0..max_steps {
        let rhs: Vec<S> = (0..=n)
            .map(|i| grid.mass()[i] * (u[i] / dt - pot.d1(u[i])))
            .collect();
        u = lu.solve_vec(&rhs);
        for i in 0..=(n / 2) {
            let v = (u[i] - u[n - i]) * S::of(0.5);
            u[i] = v;
            u[n - i] = -v;
        }
        if step % 25 == 24 {
            let f = Field::new(grid.clone(), u.clone());
            if residual(&f, pot).mass_norm() < tol {
                return Ok(f);
            }
        }
    }
    Ok(Field::new(grid, u))
}

/// Bisection of the ground-family birth threshold over the existence
/// predicate; the bracket must straddle the threshold.
pub fn bisect_ground_birth<S: Scalar>(
    grid: &Arc<Grid<S>>,
    mut lo: S,
    mut hi: S,
    iters: usize,
) -> Result<S, BifurcationError> {
    if ground_state_at(grid, lo, None)?.is_none() {
        return Err(BifurcationError::BadInput(
            "lower bracket has no ground state".into(),
        ));
    }
    if ground_state_at(grid, hi, None)?.is_some() {
        return Err(BifurcationError::BadInput(
            "upper bracket still has a ground state".into(),
        ));
    }
    for _ in 0..iters {
        let mid = (lo + hi) * S::of(0.5);
        if ground_state_at(grid, mid, None)?.is_some() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) * S::of(0.5))
}

/// Bisection of a Dirichlet-family birth threshold over the positive-solve
/// outcome on the reduced half domain.
pub fn bisect_dirichlet_birth<S: Scalar>(
    half: &Arc<Grid<S>>,
    mut lo: S,
    mut hi: S,
    iters: usize,
) -> Result<S, BifurcationError> {
    let exists = |eps: S| -> Result<bool, BifurcationError> {
        Ok(dirichlet_positive_solve(half, &Potential::allen_cahn(eps))?.is_some())
    };
    if !exists(lo)? || exists(hi)? {
        return Err(BifurcationError::BadInput(
            "bracket does not straddle the threshold".into(),
        ));
    }
    for _ in 0..iters {
        let mid = (lo + hi) * S::of(0.5);
        if exists(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) * S::of(0.5))
}

fn eps_grid<S: Scalar>(eps_start: S, eps_end: S, steps: usize) -> Vec<S> {
    let steps = steps.max(1);
    (0..=steps)
        .map(|k| eps_start + (eps_end - eps_start) * S::of_usize(k) / S::of_usize(steps))
        .collect()
}

/// Natural-parameter continuation of one family from eps_start down to
/// eps_end; the previous solution seeds the next Newton solve. Returns the
/// detected threshold and an empty point list when eps_start sits above the
/// family's birth threshold.
pub fn continue_branch<S: Scalar>(
    grids: &S3Grids<S>,
    family: Family,
    eps_start: S,
    eps_end: S,
    steps: usize,
) -> Result<Branch<S>, BifurcationError> {
    if eps_end > eps_start {
        return Err(BifurcationError::BadInput(
            "continuation runs downward in eps".into(),
        ));
    }
    match family {
        Family::ConstantZero => {
            let mut points = Vec::new();
            for eps in eps_grid(eps_start, eps_end, steps) {
                let pot = Potential::allen_cahn(eps);
                let u = Field::constant(&grids.sphere, S::zero());
                let rep = spectrum(
                    &u,
                    &pot,
                    &SpectralOpts {
                        k: 16,
                        ..Default::default()
                    },
                )?;
                points.push(BranchPoint {
                    eps,
                    energy: energy(&u, &pot).energy,
                    morse_index: rep.morse_index,
                    nullity: rep.nullity,
                    sup_norm: S::zero(),
                    symmetry_defect: S::zero(),
                    nodal_defect: None,
                    residual: S::zero(),
                    field: u,
                });
            }
            Ok(Branch {
                family,
                points,
                detected_threshold: None,
            })
        }
        Family::Ground => {
            let thr = thresholds(&grids.sphere, &Potential::double_well())?;
            if eps_start >= thr.eps1 {
                return Ok(Branch {
                    family,
                    points: Vec::new(),
                    detected_threshold: Some(thr.eps1),
                });
            }
            let mut points = Vec::new();
            let mut seed: Option<Field<S>> = None;
            for eps in eps_grid(eps_start, eps_end, steps) {
                let pot = Potential::allen_cahn(eps);
                let u = match (
                    seed.as_ref(),
                    ground_state_at(&grids.sphere, eps, seed.as_ref())?,
                ) {
                    (_, Some(u)) => u,
                    (Some(prev), None) => {
                        // continuation seed collapsed; retry from scratch
                        let _ = prev;
                        ground_state_at(&grids.sphere, eps, None)?.ok_or(
                            BifurcationError::BranchLost {
                                eps: eps.as_f64(),
                                reason: "no nonconstant solution found below the threshold".into(),
                            },
                        )?
                    }
                    (None, None) => {
                        return Err(BifurcationError::BranchLost {
                            eps: eps.as_f64(),
                            reason: "no nonconstant solution found below the threshold".into(),
                        })
                    }
                };
                points.push(ground_point(&u, eps, &pot)?);
                seed = Some(points.last().unwrap().field.clone());
            }
            Ok(Branch {
                family,
                points,
                detected_threshold: Some(thr.eps1),
            })
        }
        Family::Clifford => {
            let lam1 = lambda1_of(&grids.clifford_half);
            let thr = S::one() / lam1.sqrt();
            if eps_start >= thr {
                return Ok(Branch {
                    family,
                    points: Vec::new(),
                    detected_threshold: Some(thr),
                });
            }
            let mut points = Vec::new();
            let mut seed: Option<Field<S>> = None;
            for eps in eps_grid(eps_start, eps_end, steps) {
                let pot = Potential::allen_cahn(eps);
                let u = match seed.as_ref() {
                    Some(prev) => newton_solve(prev, &pot, S::of(1e-10), 80)?,
                    None => {
                        let half = dirichlet_positive_solve(&grids.clifford_half, &pot)?.ok_or(
                            BifurcationError::BranchLost {
                                eps: eps.as_f64(),
                                reason: "positive half solve failed below the threshold".into(),
                            },
                        )?;
                        let glued = reflect_odd(
                            &half,
                            &grids.clifford,
                            OddReflection::CliffordMid,
                            S::of(1e-9),
                        )?;
                        newton_solve(&glued, &pot, S::of(1e-10), 80)?
                    }
                };
                if u.sup_norm() < S::of(1e-3) {
                    return Err(BifurcationError::BranchLost {
                        eps: eps.as_f64(),
                        reason: "clifford continuation collapsed to zero".into(),
                    });
                }
                points.push(clifford_point(&u, eps, &pot)?);
                seed = Some(points.last().unwrap().field.clone());
            }
            Ok(Branch {
                family,
                points,
                detected_threshold: Some(thr),
            })
        }
        Family::CrossEquators => {
            let lam1 = lambda1_of(&grids.biaxial_quarter);
            let thr = S::one() / lam1.sqrt();
            if eps_start >= thr {
                return Ok(Branch {
                    family,
                    points: Vec::new(),
                    detected_threshold: Some(thr),
                });
            }
            let mut points = Vec::new();
            let mut seed: Option<Field<S>> = None;
            for eps in eps_grid(eps_start, eps_end, steps) {
                let pot = Potential::allen_cahn(eps);
                let quarter = match seed.as_ref() {
                    Some(prev) => newton_solve(prev, &pot, S::of(1e-10), 80)?,
                    None => dirichlet_positive_solve(&grids.biaxial_quarter, &pot)?.ok_or(
                        BifurcationError::BranchLost {
                            eps: eps.as_f64(),
                            reason: "positive quarter solve failed below the threshold".into(),
                        },
                    )?,
                };
                let glued = reflect_odd(
                    &quarter,
                    &grids.biaxial,
                    OddReflection::BiaxialAxes,
                    S::of(1e-9),
                )?;
                points.push(cross_point(&glued, &quarter, eps, &pot)?);
                seed = Some(quarter);
            }
            Ok(Branch {
                family,
                points,
                detected_threshold: Some(thr),
            })
        }
    }
}

fn ground_point<S: Scalar>(
    u: &Field<S>,
    eps: S,
    pot: &Potential<S>,
) -> Result<BranchPoint<S>, BifurcationError> {
    let rep = spectrum(
        u,
        pot,
        &SpectralOpts {
            k: 10,
            ..Default::default()
        },
    )?;
    let n = u.n() - 1;
    let odd_defect = (0..=n)
        .map(|i| (u.values[i] + u.values[n - i]).abs())
        .fold(S::zero(), |a, b| a.max(b));
    // nodal radius: first sign change of the profile
    let mut nodal = None;
    for i in 0..n {
        if u.values[i] * u.values[i + 1] < S::zero() {
            let t = u.values[i] / (u.values[i] - u.values[i + 1]);
            let th =
                u.grid.domain.coords[i][0] * (S::one() - t) + u.grid.domain.coords[i + 1][0] * t;
            nodal = Some((th - S::FRAC_PI_2()).abs());
            break;
        }
    }
    Ok(BranchPoint {
        eps,
        energy: energy(u, pot).energy,
        morse_index: rep.morse_index,
        nullity: rep.nullity,
        sup_norm: u.sup_norm(),
        symmetry_defect: odd_defect,
        nodal_defect: nodal,
        residual: residual(u, pot).mass_norm(),
        field: u.clone(),
    })
}

fn clifford_point<S: Scalar>(
    u: &Field<S>,
    eps: S,
    pot: &Potential<S>,
) -> Result<BranchPoint<S>, BifurcationError> {
    let rep = spectrum(
        u,
        pot,
        &SpectralOpts {
            k: 6,
            ..Default::default()
        },
    )?;
    let n = u.n() - 1;
    let swap_defect = (0..=n)
        .map(|i| (u.values[i] + u.values[n - i]).abs())
        .fold(S::zero(), |a, b| a.max(b));
    let nodal = first_zero(u).map(|s0| (s0 - S::FRAC_PI_4()).abs());
    Ok(BranchPoint {
        eps,
        energy: energy(u, pot).energy,
        morse_index: rep.morse_index,
        nullity: rep.nullity,
        sup_norm: u.sup_norm(),
        symmetry_defect: swap_defect,
        nodal_defect: nodal,
        residual: residual(u, pot).mass_norm(),
        field: u.clone(),
    })
}

fn cross_point<S: Scalar>(
    glued: &Field<S>,
    _quarter: &Field<S>,
    eps: S,
    pot: &Potential<S>,
) -> Result<BranchPoint<S>, BifurcationError> {
    let rep = spectrum(
        glued,
        pot,
        &SpectralOpts {
            k: 6,
            ..Default::default()
        },
    )?;
    // quarter-turn antisymmetry: u(rho, phi + pi/2) = -u(rho, phi)
    let DomainKind::BiAxial { n_rho, n_phi } = *glued.grid.kind() else {
        return Err(BifurcationError::BadInput(
            "cross point needs the full bi-axial grid".into(),
        ));
    };
    let quarter_shift = n_phi / 4;
    let mut defect = S::zero();
    for i in 0..n_rho {
        for j in 0..n_phi {
            let a = glued.values[i * n_phi + j];
            let b = glued.values[i * n_phi + (j + quarter_shift) % n_phi];
            defect = defect.max((a + b).abs());
        }
    }
    Ok(BranchPoint {
        eps,
        energy: energy(glued, pot).energy,
        morse_index: rep.morse_index,
        nullity: rep.nullity,
        sup_norm: glued.sup_norm(),
        symmetry_defect: defect,
        nodal_defect: None,
        residual: residual(glued, pot).mass_norm(),
        field: glued.clone(),
    })
}

/// Interpolated location of the first zero of a 1D profile (exact node zeros
/// included).
fn first_zero<S: Scalar>(u: &Field<S>) -> Option<S> {
    let n = u.n();
    for i in 0..n {
        if u.values[i] == S::zero() {
            return Some(u.grid.domain.coords[i][0]);
        }
        if i + 1 < n && u.values[i] * u.values[i + 1] < S::zero() {
            let t = u.values[i] / (u.values[i] - u.values[i + 1]);
            return Some(
                u.grid.domain.coords[i][0] * (S::one() - t) + u.grid.domain.coords[i + 1][0] * t,
            );
        }
    }
    None
}

#[derive(Debug, Clone)]
pub struct GapRow<S> {
    pub eps: S,
    pub a: S,
    pub a_family: Family,
    pub b_candidate: Option<S>,
    pub b_family: Option<Family>,
    pub gap: Option<S>,
    pub degenerate: bool,
    /// b is searched over the computed families only.
    pub is_upper_bound: bool,
}

#[derive(Debug, Clone)]
pub struct GapTable<S> {
    pub rows: Vec<GapRow<S>>,
}

/// Assemble the first and second critical levels from the computed branches:
/// a = least nonconstant level (or the zero constant when none exists),
/// b = next-lowest computed level above a, flagged as an upper bound.
pub fn gap_table<S: Scalar>(
    branches: &[Branch<S>],
    eps_list: &[S],
) -> Result<GapTable<S>, BifurcationError> {
    let mut rows = Vec::new();
    for &eps in eps_list {
        let mut levels: Vec<(S, Family)> = Vec::new();
        for b in branches {
            if let Some(p) = b
                .points
                .iter()
                .find(|p| (p.eps - eps).abs() < S::of(1e-9) * S::one().max(eps.abs()))
            {
                levels.push((p.energy, b.family));
            }
        }
        if levels.is_empty() {
            return Err(BifurcationError::MissingBranch(eps.as_f64()));
        }
        let nonconstant: Vec<&(S, Family)> = levels
            .iter()
            .filter(|(_, f)| *f != Family::ConstantZero)
            .collect();
        let (a, a_family) = match nonconstant
            .iter()
            .min_by(|x, y| x.0.partial_cmp(&y.0).unwrap())
        {
            Some(&&(e, f)) => (e, f),
            None => {
                let zero = levels
                    .iter()
                    .find(|(_, f)| *f == Family::ConstantZero)
                    .ok_or(BifurcationError::MissingBranch(eps.as_f64()))?;
                (zero.0, zero.1)
            }
        };
        let margin = S::of(1e-9) * S::one().max(a.abs());
        let b_pair = levels
            .iter()
            .filter(|(e, f)| {
                *e > a + margin || (*f != a_family && *e > a - margin && *e > a + margin)
            })
            .min_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        let (b_candidate, b_family) = match b_pair {
            Some(&(e, f)) => (Some(e), Some(f)),
            None => (None, None),
        };
        let gap = b_candidate.map(|b| b - a);
        rows.push(GapRow {
            eps,
            a,
            a_family,
            b_candidate,
            b_family,
            gap,
            degenerate: b_candidate.is_none() || a_family == Family::ConstantZero,
            is_upper_bound: true,
        });
    }
    Ok(GapTable { rows })
}

/// Symmetry certificates recomputed from the stored branch fields.
#[derive(Debug, Clone)]
pub struct Certificate<S> {
    pub eps: S,
    pub symmetry_defect: S,
    pub nodal_defect: Option<S>,
}

pub fn symmetry_certificates<S: Scalar>(branch: &Branch<S>) -> Vec<Certificate<S>> {
    branch
        .points
        .iter()
        .map(|p| Certificate {
            eps: p.eps,
            symmetry_defect: p.symmetry_defect,
            nodal_defect: p.nodal_defect,
        })
        .collect()
}
