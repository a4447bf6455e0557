//! Discrete functions on a grid, the energy functional and its gradient,
//! the P-function diagnostic, and the a priori bounds for unstable solutions.

use std::sync::Arc;

use crate::geometry::{DomainKind, Grid};
use crate::linalg::wnorm;
use crate::potential::{CriticalPointList, Potential};
use crate::rng::Rng;
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct Field<S> {
    pub values: Vec<S>,
    pub grid: Arc<Grid<S>>,
}

impl<S: Scalar> Field<S> {
    pub fn new(grid: Arc<Grid<S>>, values: Vec<S>) -> Self {
        assert_eq!(values.len(), grid.n_nodes());
        debug_assert!(values.iter().all(|v| v.is_finite()));
        Field { values, grid }
    }

    pub fn constant(grid: &Arc<Grid<S>>, c: S) -> Self {
        let mut values = vec![c; grid.n_nodes()];
        if grid.is_dirichlet() {
            for &b in &grid.domain.boundary {
                values[b] = S::zero();
            }
        }
        Field {
            values,
            grid: grid.clone(),
        }
    }

    pub fn from_fn(grid: &Arc<Grid<S>>, f: impl Fn(&[S]) -> S) -> Self {
        let values = grid.domain.coords.iter().map(|c| f(c)).collect();
        Field::new(grid.clone(), values)
    }

    /// Seeded random field with nodewise values in (lo, hi); zero on
    /// Dirichlet boundaries.
    pub fn random_in(grid: &Arc<Grid<S>>, rng: &mut Rng, lo: S, hi: S) -> Self {
        let mut values: Vec<S> = (0..grid.n_nodes())
            .map(|_| rng.uniform_in(lo, hi))
            .collect();
        if grid.is_dirichlet() {
            for &b in &grid.domain.boundary {
                values[b] = S::zero();
            }
        }
        Field {
            values,
            grid: grid.clone(),
        }
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn min(&self) -> S {
        self.values.iter().fold(S::infinity(), |m, &v| m.min(v))
    }

    pub fn max(&self) -> S {
        self.values.iter().fold(S::neg_infinity(), |m, &v| m.max(v))
    }

    pub fn sup_norm(&self) -> S {
        self.values.iter().fold(S::zero(), |m, &v| m.max(v.abs()))
    }

    pub fn mass_norm(&self) -> S {
        wnorm(self.grid.mass(), &self.values)
    }

    pub fn integrate(&self) -> S {
        let mut acc = S::zero();
        for i in 0..self.n() {
            acc += self.grid.mass()[i] * self.values[i];
        }
        acc
    }

    pub fn l2_distance(&self, other: &Field<S>) -> S {
        let d: Vec<S> = (0..self.n())
            .map(|i| self.values[i] - other.values[i])
            .collect();
        wnorm(self.grid.mass(), &d)
    }

    pub fn sup_distance(&self, other: &Field<S>) -> S {
        (0..self.n()).fold(S::zero(), |m, i| {
            m.max((self.values[i] - other.values[i]).abs())
        })
    }

    pub fn scaled_add(&mut self, alpha: S, other: &Field<S>) {
        for i in 0..self.values.len() {
            self.values[i] += alpha * other.values[i];
        }
    }

    /// Linear interpolation (1-t) self + t other.
    pub fn lerp(&self, other: &Field<S>, t: S) -> Field<S> {
        let values = (0..self.n())
            .map(|i| self.values[i] * (S::one() - t) + other.values[i] * t)
            .collect();
        Field {
            values,
            grid: self.grid.clone(),
        }
    }
}

/// Energy report in the reported scale: for Allen-Cahn potentials every entry
/// carries the eps-scaling (E_eps = eps * E_internal), so `energy` is E_eps.
#[derive(Debug, Clone, Copy)]
pub struct EnergyReport<S> {
    pub energy: S,
    pub dirichlet: S,
    pub potential: S,
    pub grad_norm: S,
}

/// E(u) = int |grad u|^2 / 2 + F(u), with the gradient norm of the residual
/// in the mass-weighted dual norm.
pub fn energy<S: Scalar>(u: &Field<S>, pot: &Potential<S>) -> EnergyReport<S> {
    let grid = &u.grid;
    let dirichlet = grid.lap.stiffness.quad(&u.values) * S::of(0.5);
    let mut pot_part = S::zero();
    for i in 0..u.n() {
        pot_part += grid.mass()[i] * pot.eval(u.values[i]);
    }
    let r = residual(u, pot);
    let scale = pot.energy_scale();
    EnergyReport {
        energy: scale * (dirichlet + pot_part),
        dirichlet: scale * dirichlet,
        potential: scale * pot_part,
        grad_norm: scale * r.mass_norm(),
    }
}

/// r = Lap u - f(u) nodewise (zero on Dirichlet boundaries); r = 0
/// characterizes discrete solutions.
pub fn residual<S: Scalar>(u: &Field<S>, pot: &Potential<S>) -> Field<S> {
    let lap = u.grid.laplacian_apply(&u.values);
    let mut values: Vec<S> = (0..u.n()).map(|i| lap[i] - pot.d1(u.values[i])).collect();
    if u.grid.is_dirichlet() {
        for &b in &u.grid.domain.boundary {
            values[b] = S::zero();
        }
    }
    Field {
        values,
        grid: u.grid.clone(),
    }
}

/// Recovered |grad u|^2 per node (centered differences on structured grids,
/// area-averaged face gradients on the triangulated sphere).
pub fn grad_squared<S: Scalar>(u: &Field<S>) -> Vec<S> {
    let grid = &u.grid;
    let v = &u.values;
    match *grid.kind() {
        DomainKind::SphereRadial { .. }
        | DomainKind::BallRadial { .. }
        | DomainKind::CliffordReduced { .. }
        | DomainKind::CliffordHalf { .. }
        | DomainKind::SphericalSegment { .. } => {
            let n = u.n();
            let x = |i: usize| grid.domain.coords[i][0];
            (0..n)
                .map(|i| {
                    let d = if i == 0 {
                        (v[1] - v[0]) / (x(1) - x(0))
                    } else if i == n - 1 {
                        (v[n - 1] - v[n - 2]) / (x(n - 1) - x(n - 2))
                    } else {
                        (v[i + 1] - v[i - 1]) / (x(i + 1) - x(i - 1))
                    };
                    d * d
                })
                .collect()
        }
        DomainKind::BiAxial { n_rho, n_phi } => biaxial_grad_sq(v, n_rho, n_phi, true),
        DomainKind::BiAxialQuarter { n_rho, m_phi } => biaxial_grad_sq(v, n_rho, m_phi + 1, false),
        DomainKind::TriSphere { .. } => {
            let n = u.n();
            let mut acc = vec![S::zero(); n];
            let mut area_acc = vec![S::zero(); n];
            for f in &grid.elements {
                let (a, b, c) = (f[0], f[1], f[2]);
                let pa = &grid.domain.coords[a];
                let pb = &grid.domain.coords[b];
                let pc = &grid.domain.coords[c];
                // flat P1 gradient: g = (u_b - u_a) g1 + (u_c - u_a) g2
                let e1: Vec<S> = (0..3).map(|k| pb[k] - pa[k]).collect();
                let e2: Vec<S> = (0..3).map(|k| pc[k] - pa[k]).collect();
                let g11 = dot3(&e1, &e1);
                let g12 = dot3(&e1, &e2);
                let g22 = dot3(&e2, &e2);
                let det = g11 * g22 - g12 * g12;
                let du1 = v[b] - v[a];
                let du2 = v[c] - v[a];
                // |grad u|^2 = (du)' Ginv (du)
                let gsq = (g22 * du1 * du1 - S::of(2.0) * g12 * du1 * du2 + g11 * du2 * du2) / det;
                let area = (det).max(S::zero()).sqrt() * S::of(0.5);
                for &i in &[a, b, c] {
                    acc[i] += gsq * area;
                    area_acc[i] += area;
                }
            }
            (0..n).map(|i| acc[i] / area_acc[i]).collect()
        }
    }
}

fn dot3<S: Scalar>(a: &[S], b: &[S]) -> S {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn biaxial_grad_sq<S: Scalar>(v: &[S], n_rho: usize, cols: usize, periodic: bool) -> Vec<S> {
    let h_r = S::one() / S::of_usize(n_rho);
    let h_p = if periodic {
        S::of(2.0) * S::PI() / S::of_usize(cols)
    } else {
        S::FRAC_PI_2() / S::of_usize(cols - 1)
    };
    let idx = |i: usize, j: usize| (i - 1) * cols + j;
    let mut out = vec![S::zero(); n_rho * cols];
    for i in 1..=n_rho {
        let rho = (S::of_usize(i) - S::of(0.5)) * h_r;
        for j in 0..cols {
            let me = idx(i, j);
            let du_r = if i == 1 {
                (v[idx(2, j)] - v[me]) / h_r
            } else if i == n_rho {
                (v[me] - v[idx(n_rho - 1, j)]) / h_r
            } else {
                (v[idx(i + 1, j)] - v[idx(i - 1, j)]) / (S::of(2.0) * h_r)
            };
            let du_p = if periodic {
                let jp = (j + 1) % cols;
                let jm = (j + cols - 1) % cols;
                (v[idx(i, jp)] - v[idx(i, jm)]) / (S::of(2.0) * h_p)
            } else if j == 0 {
                (v[idx(i, 1)] - v[me]) / h_p
            } else if j == cols - 1 {
                (v[me] - v[idx(i, cols - 2)]) / h_p
            } else {
                (v[idx(i, j + 1)] - v[idx(i, j - 1)]) / (S::of(2.0) * h_p)
            };
            out[me] =
                (S::one() - rho * rho).max(S::zero()) * du_r * du_r + du_p * du_p / (rho * rho);
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct PReport<S> {
    pub p: Field<S>,
    pub argmax: usize,
    /// Node where the recovered gradient is locally minimal, nearest to argmax.
    pub nearest_critical: usize,
    pub distance: S,
}

/// P = |grad u|^2 / 2 - F(u); on convex/closed domains its maximum sits at a
/// critical point of u.
pub fn p_function<S: Scalar>(u: &Field<S>, pot: &Potential<S>) -> PReport<S> {
    let gsq = grad_squared(u);
    let values: Vec<S> = (0..u.n())
        .map(|i| gsq[i] * S::of(0.5) - pot.eval(u.values[i]))
        .collect();
    let p = Field {
        values,
        grid: u.grid.clone(),
    };
    let argmax = (0..u.n())
        .max_by(|&a, &b| p.values[a].partial_cmp(&p.values[b]).unwrap())
        .unwrap();
    // local minima of |grad u| over the stiffness adjacency graph
    let mut crit = Vec::new();
    for i in 0..u.n() {
        let mut is_min = true;
        for (j, _) in u.grid.lap.stiffness.row(i) {
            if j != i && gsq[j] < gsq[i] {
                is_min = false;
                break;
            }
        }
        if is_min {
            crit.push(i);
        }
    }
    let nearest_critical = crit
        .iter()
        .copied()
        .min_by(|&a, &b| {
            u.grid
                .distance(argmax, a)
                .partial_cmp(&u.grid.distance(argmax, b))
                .unwrap()
        })
        .unwrap_or(argmax);
    let distance = u.grid.distance(argmax, nearest_critical);
    PReport {
        p,
        argmax,
        nearest_critical,
        distance,
    }
}

#[derive(Debug, thiserror::Error)]
pub enum BoundError {
    #[error("no delta in (0,1) makes the denominator delta log(delta)^2 + delta (delta-2) d^2 C positive")]
    NoValidDelta,
}

#[derive(Debug, Clone, Copy)]
pub struct AprioriBound<S> {
    pub c: S,
    pub k: S,
    pub d: S,
    pub delta: S,
    pub r0: S,
    pub b0: S,
    pub m0: S,
}

/// Gradient and sup bounds for unstable solutions under the linear-decay
/// hypothesis: the largest grid delta with positive denominator gives
/// R0 = k+ + 2 d^2 C (1+k+) / (delta log(delta)^2 + delta (delta-2) d^2 C),
/// B0 = sqrt(|k+ - k-| max|f| + C R0 (1+R0)), and the solution bound
/// M0 = max(|k-|, k+) + (2 + d) B0.
pub fn apriori_bound<S: Scalar>(
    c: S,
    k: S,
    d: S,
    kplus: S,
    kminus: S,
    fmax: S,
) -> Result<AprioriBound<S>, BoundError> {
    const GRID: usize = 1000;
    let denom = |delta: S| {
        let l = delta.ln();
        delta * l * l + delta * (delta - S::of(2.0)) * d * d * c
    };
    let mut chosen = None;
    for i in (1..GRID).rev() {
        let delta = S::of_usize(i) / S::of_usize(GRID);
        if denom(delta) > S::zero() {
            chosen = Some(delta);
            break;
        }
    }
    let delta = chosen.ok_or(BoundError::NoValidDelta)?;
    let r0 = kplus + S::of(2.0) * d * d * c * (S::one() + kplus) / denom(delta);
    let b0 = ((kplus - kminus).abs() * fmax + c * r0 * (S::one() + r0)).sqrt();
    let m0 = kminus.abs().max(kplus) + (S::of(2.0) + d) * b0;
    Ok(AprioriBound {
        c,
        k,
        d,
        delta,
        r0,
        b0,
        m0,
    })
}

/// Range check for unstable solutions: the value range must meet an unstable
/// critical point, and F on the range is dominated by the unstable levels.
#[derive(Debug, Clone, Copy)]
pub struct RangeCheck {
    pub intersects_unstable: bool,
    pub below_max_level: bool,
}

impl RangeCheck {
    pub fn holds(&self) -> bool {
        self.intersects_unstable && self.below_max_level
    }
}

pub fn unstable_range_check<S: Scalar>(
    u: &Field<S>,
    pot: &Potential<S>,
    cps: &CriticalPointList<S>,
) -> RangeCheck {
    let (umin, umax) = (u.min(), u.max());
    // tolerance absorbs root-finding error in the critical points
    let tol = S::of(1e-9) * S::one().max(umin.abs()).max(umax.abs());
    let intersects_unstable = cps
        .unstable
        .iter()
        .any(|&c| umin - tol <= c && c <= umax + tol);
    let mut range_max = S::neg_infinity();
    for i in 0..=2000 {
        let t = umin + (umax - umin) * S::of_usize(i) / S::of(2000.0);
        range_max = range_max.max(pot.eval(t));
    }
    let level_max = cps
        .unstable
        .iter()
        .map(|&c| pot.eval(c))
        .fold(S::neg_infinity(), |m, v| m.max(v));
    let slack = S::of(1e-12) * range_max.abs().max(S::one());
    RangeCheck {
        intersects_unstable,
        below_max_level: range_max <= level_max + slack,
    }
}

/// Palais-Smale boundedness diagnostic under the superlinear-decay
/// hypothesis: with exponent constants (rho, R0),
///   (1/2 - rho) ||u||_W^2 + int_{u <= R0} (-rho u f(u) + F(u) - u^2)
///     <= E(u) + rho ||E'(u)|| (1 + ||u||_W^2),
/// so a bounded energy and vanishing gradient force a W^{1,2} bound.
#[derive(Debug, Clone, Copy)]
pub struct PsDiagnostic<S> {
    pub lhs: S,
    pub rhs: S,
    pub w_norm_sq: S,
    pub holds: bool,
}

pub fn ps_diagnostic<S: Scalar>(
    u: &Field<S>,
    pot: &Potential<S>,
    rho: S,
    r0: S,
) -> PsDiagnostic<S> {
    let grid = &u.grid;
    let dirichlet2 = grid.lap.stiffness.quad(&u.values);
    let mut mass2 = S::zero();
    let mut tail = S::zero();
    let mut pot_part = S::zero();
    for i in 0..u.n() {
        let w = grid.mass()[i];
        let v = u.values[i];
        mass2 += w * v * v;
        pot_part += w * pot.eval(v);
        if v <= r0 {
            tail += w * (-rho * v * pot.d1(v) + pot.eval(v) - v * v);
        }
    }
    let w_norm_sq = dirichlet2 + mass2;
    let e = dirichlet2 * S::of(0.5) + pot_part;
    let grad = residual(u, pot).mass_norm();
    let lhs = (S::of(0.5) - rho) * w_norm_sq + tail;
    let rhs = e + rho * grad * (S::one() + w_norm_sq);
    PsDiagnostic {
        lhs,
        rhs,
        w_norm_sq,
        holds: lhs <= rhs + S::of(1e-10) * rhs.abs().max(S::one()),
    }
}

/// Relative defect of the Allen-Cahn solution identity
/// E_eps(u) = (1/(4 eps)) int (1 - u^4), derived by multiplying the equation
/// by u and integrating by parts. Only meaningful at converged solutions.
pub fn ac_identity_defect<S: Scalar>(u: &Field<S>, pot: &Potential<S>) -> S {
    let eps = pot.ac_epsilon.expect("Allen-Cahn potential required");
    let report = energy(u, pot);
    let mut q = S::zero();
    for i in 0..u.n() {
        let v = u.values[i];
        q += u.grid.mass()[i] * (S::one() - v * v * v * v);
    }
    let rhs = q / (S::of(4.0) * eps);
    ((report.energy - rhs) / report.energy).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{sphere_radial, sphere_volume};

    fn s3(n: usize) -> Arc<Grid<f64>> {
        Arc::new(sphere_radial::<f64>(3, n).unwrap())
    }

    #[test]
    fn ac_energy_of_zero_state() {
        // E_eps(0) = |S^3| / (4 eps) = pi^2 at eps = 0.5
        let grid = s3(200);
        let pot = Potential::allen_cahn(0.5);
        let u = Field::constant(&grid, 0.0);
        let e = energy(&u, &pot);
        let want = std::f64::consts::PI.powi(2);
        assert!(
            (e.energy - want).abs() < 1e-8 * want,
            "{} vs {want}",
            e.energy
        );
        assert!((e.energy - (e.dirichlet + e.potential)).abs() < 1e-12 * want);
    }

    #[test]
    fn well_bottom_has_zero_energy() {
        let grid = s3(100);
        let pot = Potential::double_well();
        let u = Field::constant(&grid, 1.0);
        let e = energy(&u, &pot);
        assert!(e.energy.abs() < 1e-12);
        assert!(e.grad_norm.abs() < 1e-12);
    }

    #[test]
    fn dirichlet_part_of_cos_theta_on_s2() {
        // int_{S^2} |grad cos(theta)|^2 = 8 pi / 3 (1D quadrature oracle:
        // 2 pi int sin^3 = 8 pi / 3), so the half-Dirichlet part is 4 pi / 3
        let grid = Arc::new(sphere_radial::<f64>(2, 400).unwrap());
        let pot = Potential::zero();
        let u = Field::from_fn(&grid, |c| c[0].cos());
        let e = energy(&u, &pot);
        let want = 4.0 * std::f64::consts::PI / 3.0;
        assert!(
            (e.dirichlet - want).abs() < 1e-4 * want,
            "{} vs {want}",
            e.dirichlet
        );
        assert!(e.potential.abs() < 1e-14);
    }

    #[test]
    fn residual_of_constants() {
        let grid = s3(100);
        let pot = Potential::double_well();
        for c in [-1.0, 0.0, 1.0] {
            let u = Field::constant(&grid, c);
            let r = residual(&u, &pot);
            assert!(r.sup_norm() < 1e-12, "c={c}");
        }
        let u = Field::constant(&grid, 0.5);
        let r = residual(&u, &pot);
        for v in &r.values {
            assert!((v - 0.375).abs() < 1e-12);
        }
    }

    #[test]
    fn p_function_of_constant() {
        let grid = s3(100);
        let pot = Potential::double_well();
        let u = Field::constant(&grid, 0.5);
        let rep = p_function(&u, &pot);
        let want = -pot.eval(0.5);
        for v in &rep.p.values {
            assert!((v - want).abs() < 1e-12);
        }
    }

    #[test]
    fn apriori_c_to_zero_limit() {
        // only the |k+ - k-| max|f| term survives
        let b = apriori_bound(1e-14, 0.5, std::f64::consts::PI, 1.0, -1.0, 0.3849).unwrap();
        assert!((b.b0 * b.b0 - 2.0 * 0.3849).abs() < 1e-6);
        assert!(b.m0 > 0.0);
    }

    #[test]
    fn apriori_r0_finite_positive() {
        let b = apriori_bound(1.0, 0.0, std::f64::consts::PI, 0.0, 0.0, 0.0).unwrap();
        assert!(b.r0.is_finite() && b.r0 > 0.0);
        assert!(b.b0 > 0.0 && b.m0 > 0.0);
        assert!(b.delta > 0.0 && b.delta < 1.0);
        // the Claim-3 denominator is positive at the selected delta
        let l = b.delta.ln();
        let den = b.delta * l * l + b.delta * (b.delta - 2.0) * b.d * b.d * b.c;
        assert!(den > 0.0);
    }

    #[test]
    fn range_check_constants() {
        let grid = s3(64);
        let pot = Potential::double_well();
        let cps = crate::potential::find_critical_points(&pot, 1e-9).unwrap();
        let zero = Field::constant(&grid, 0.0);
        assert!(unstable_range_check(&zero, &pot, &cps).holds());
        let one = Field::constant(&grid, 1.0);
        let rc = unstable_range_check(&one, &pot, &cps);
        assert!(
            !rc.intersects_unstable,
            "stable constant: lemma not applicable"
        );
    }

    #[test]
    fn volume_from_field_integration() {
        let grid = s3(128);
        let one = Field::constant(&grid, 1.0);
        let v = one.integrate();
        assert!((v - sphere_volume::<f64>(3)).abs() < 1e-8 * v);
    }
}
