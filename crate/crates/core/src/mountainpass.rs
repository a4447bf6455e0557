//! Discrete paths in field space joining two stable constants, the min-max
//! deformation that realizes the mountain-pass level, and construction and
//! verification of optimal paths through an unstable solution.

use std::sync::Arc;

use crate::field::{energy, residual, Field};
use crate::flow::{gradient_flow, FlowError, FlowOpts};
use crate::geometry::Grid;
use crate::linalg::BandedLU;
use crate::potential::{CriticalPointList, Potential};
use crate::scalar::Scalar;
use crate::spectral::{spectrum, SpectralError, SpectralOpts};

#[derive(Debug, thiserror::Error)]
pub enum MpError {
    #[error("endpoint {0} is not a stable critical point of the potential")]
    NotStableEndpoint(f64),
    #[error("path needs at least 17 samples, got {0}")]
    TooFewSamples(usize),
    #[error("mountain-pass barrier lost: interior max {max:.6e} does not exceed the endpoint level {end:.6e}")]
    BarrierLost { max: f64, end: f64 },
    #[error("state is not unstable (lowest eigenvalue {0:.3e} >= 0)")]
    NotUnstable(f64),
    #[error(
        "flow from the path shoulder did not reach a stable constant (final sup distance {0:.3e})"
    )]
    FlowDidNotReachConstant(f64),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

#[derive(Debug, Clone)]
pub struct Path<S> {
    pub samples: Vec<Field<S>>,
    /// Uniform parameters in [-1, 1].
    pub ts: Vec<S>,
    /// The stable constants at t = -1 and t = +1.
    pub endpoints: (S, S),
}

impl<S: Scalar> Path<S> {
    pub fn m(&self) -> usize {
        self.samples.len()
    }

    pub fn energies(&self, pot: &Potential<S>) -> Vec<S> {
        self.samples.iter().map(|u| energy(u, pot).energy).collect()
    }

    /// Index of the sample nearest to t = 0.
    pub fn center(&self) -> usize {
        (0..self.m())
            .min_by(|&a, &b| self.ts[a].abs().partial_cmp(&self.ts[b].abs()).unwrap())
            .unwrap()
    }
}

fn is_stable_constant<S: Scalar>(pot: &Potential<S>, s: S) -> bool {
    pot.d1(s).abs() < S::of(1e-8) && pot.d2(s) > S::of(1e-8)
}

/// Linear interpolation between the stable constants, optionally detouring
/// through `seed` at t = 0.
pub fn initial_path<S: Scalar>(
    s_minus: S,
    s_plus: S,
    seed: Option<&Field<S>>,
    grid: &Arc<Grid<S>>,
    m: usize,
    pot: &Potential<S>,
) -> Result<Path<S>, MpError> {
    if m < 17 {
        return Err(MpError::TooFewSamples(m));
    }
    for s in [s_minus, s_plus] {
        if !is_stable_constant(pot, s) {
            return Err(MpError::NotStableEndpoint(s.as_f64()));
        }
    }
    let lo = Field::constant(grid, s_minus);
    let hi = Field::constant(grid, s_plus);
    let ts: Vec<S> = (0..m)
        .map(|k| -S::one() + S::of(2.0) * S::of_usize(k) / S::of_usize(m - 1))
        .collect();
    let samples = match seed {
        None => ts
            .iter()
            .map(|&t| lo.lerp(&hi, (t + S::one()) * S::of(0.5)))
            .collect(),
        Some(mid) => ts
            .iter()
            .map(|&t| {
                if t <= S::zero() {
                    lo.lerp(mid, t + S::one())
                } else {
                    mid.lerp(&hi, t)
                }
            })
            .collect(),
    };
    Ok(Path {
        samples,
        ts,
        endpoints: (s_minus, s_plus),
    })
}

#[derive(Debug, Clone)]
pub struct MinMaxOpts<S> {
    pub iters: usize,
    /// Mass-norm residual at the peak that counts as converged.
    pub tol: S,
    pub dt0: S,
    pub reparam_every: usize,
}

impl<S: Scalar> Default for MinMaxOpts<S> {
    fn default() -> Self {
        MinMaxOpts {
            iters: 4000,
            tol: S::of(1e-8),
            dt0: S::of(0.05),
            reparam_every: 10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MinMaxResult<S> {
    /// Max energy over the converged path: an upper bound for the discrete
    /// min-max value.
    pub level: S,
    pub argmax_field: Field<S>,
    pub residual_at_peak: S,
    pub iterations: usize,
    /// Peak-over-path history (non-increasing).
    pub max_history: Vec<S>,
    /// Diagnostic: the converged peak has Morse index >= 2 in its domain class.
    pub index_two_flag: bool,
}

/// One damped, mass-preconditioned descent step (semi-implicit flow step of
/// size dt) on the active nodes.
fn descent_step<S: Scalar>(
    u: &Field<S>,
    pot: &Potential<S>,
    dt: S,
    lu: &BandedLU<S>,
    active: &[usize],
) -> Field<S> {
    let mut rhs = Vec::with_capacity(active.len());
    for &i in active {
        let w = u.grid.mass()[i];
        rhs.push(w * (u.values[i] / dt - pot.d1(u.values[i])));
    }
    let red = lu.solve_vec(&rhs);
    let mut vals = u.values.clone();
    for (k, &i) in active.iter().enumerate() {
        vals[i] = red[k];
    }
    Field::new(u.grid.clone(), vals)
}

/// Min-max deformation: the peak sample and its neighbors move along damped
/// gradient descent with Gaussian weights (width 2 samples), tangentially
/// projected in the mass inner product; the path is reparametrized by L2
/// arclength periodically. The max over the path never increases.
pub fn minmax_deform<S: Scalar>(
    path: &mut Path<S>,
    pot: &Potential<S>,
    opts: &MinMaxOpts<S>,
) -> Result<MinMaxResult<S>, MpError> {
    let m = path.m();
    let grid = path.samples[0].grid.clone();
    let active = grid.active();
    let a_sub = grid.lap.stiffness.submatrix(&active);
    let mass_sub: Vec<S> = active.iter().map(|&i| grid.mass()[i]).collect();

    let mut energies = path.energies(pot);
    let end_level = energies[0].max(energies[m - 1]);
    let mut dt = opts.dt0;
    let mut factor_cache: Vec<(S, BandedLU<S>)> = Vec::new();
    let mut max_history = Vec::new();
    let mut iterations = 0;

    for it in 0..opts.iters {
        iterations = it + 1;
        let peak = (1..m - 1)
            .max_by(|&a, &b| energies[a].partial_cmp(&energies[b]).unwrap())
            .unwrap();
        let peak_energy = energies[peak];
        if peak_energy <= end_level + S::of(1e-12) * (S::one() + end_level.abs()) {
            return Err(MpError::BarrierLost {
                max: peak_energy.as_f64(),
                end: end_level.as_f64(),
            });
        }
        max_history.push(peak_energy);

        let r_peak = residual(&path.samples[peak], pot).mass_norm();
        if r_peak < opts.tol {
            break;
        }

        // factor (M/dt + A) for the current dt
        let idx = match factor_cache.iter().position(|(d, _)| *d == dt) {
            Some(p) => p,
            None => {
                let scaled: Vec<S> = mass_sub.iter().map(|&w| w / dt).collect();
                factor_cache.push((dt, BandedLU::factor(&a_sub, Some(&scaled))));
                factor_cache.len() - 1
            }
        };

        let mut any_accepted = false;
        let lo = peak.saturating_sub(4).max(1);
        let hi = (peak + 4).min(m - 2);
        for k in lo..=hi {
            let d = S::of_usize(k.abs_diff(peak));
            let weight = (-d * d / S::of(8.0)).exp();
            let moved = descent_step(
                &path.samples[k],
                pot,
                dt * weight,
                &factor_cache[idx].1,
                &active,
            );
            // mass-orthogonal projection against the local tangent
            let mut step: Vec<S> = (0..moved.n())
                .map(|i| moved.values[i] - path.samples[k].values[i])
                .collect();
            let tangent: Vec<S> = (0..moved.n())
                .map(|i| path.samples[k + 1].values[i] - path.samples[k - 1].values[i])
                .collect();
            let mut st = S::zero();
            let mut tt = S::zero();
            for i in 0..step.len() {
                st += grid.mass()[i] * step[i] * tangent[i];
                tt += grid.mass()[i] * tangent[i] * tangent[i];
            }
            if tt > S::zero() {
                let c = st / tt;
                for i in 0..step.len() {
                    step[i] -= c * tangent[i];
                }
            }
            let mut cand_vals = path.samples[k].values.clone();
            for i in 0..cand_vals.len() {
                cand_vals[i] += step[i];
            }
            let cand = Field::new(grid.clone(), cand_vals);
            let e_cand = energy(&cand, pot).energy;
            let slack = S::epsilon().powf(S::of(0.75)) * (S::one() + energies[k].abs());
            if e_cand <= energies[k] + slack {
                path.samples[k] = cand;
                energies[k] = e_cand;
                any_accepted = true;
            } else {
                // projection spoiled the descent; take the raw flow step
                let e_moved = energy(&moved, pot).energy;
                if e_moved <= energies[k] + slack {
                    path.samples[k] = moved;
                    energies[k] = e_moved;
                    any_accepted = true;
                }
            }
        }
        if !any_accepted {
            dt = dt * S::of(0.5);
            if dt < opts.dt0 * S::of(1e-12) {
                break;
            }
            continue;
        }

        if opts.reparam_every > 0 && (it + 1) % opts.reparam_every == 0 {
            let old_max = (1..m - 1)
                .map(|k| energies[k])
                .fold(S::neg_infinity(), |a, b| a.max(b));
            let backup: Vec<Field<S>> = path.samples.clone();
            reparametrize(path);
            let new_energies = path.energies(pot);
            let new_max = (1..m - 1)
                .map(|k| new_energies[k])
                .fold(S::neg_infinity(), |a, b| a.max(b));
            if new_max <= old_max + S::of(1e-10) * (S::one() + old_max.abs()) {
                energies = new_energies;
            } else {
                path.samples = backup;
            }
        }
    }

    let energies = path.energies(pot);
    let peak = (0..m)
        .max_by(|&a, &b| energies[a].partial_cmp(&energies[b]).unwrap())
        .unwrap();
    let argmax_field = path.samples[peak].clone();
    let residual_at_peak = residual(&argmax_field, pot).mass_norm();
    let index_two_flag = if residual_at_peak < opts.tol * S::of(10.0) {
        let rep = spectrum(
            &argmax_field,
            pot,
            &SpectralOpts {
                k: 3,
                ..Default::default()
            },
        )?;
        rep.morse_index >= 2
    } else {
        false
    };
    Ok(MinMaxResult {
        level: energies[peak],
        argmax_field,
        residual_at_peak,
        iterations,
        max_history,
        index_two_flag,
    })
}

/// Redistribute the samples uniformly in L2 arclength (endpoints fixed).
fn reparametrize<S: Scalar>(path: &mut Path<S>) {
    let m = path.m();
    let mut cum = vec![S::zero(); m];
    for k in 1..m {
        cum[k] = cum[k - 1] + path.samples[k].l2_distance(&path.samples[k - 1]);
    }
    let total = cum[m - 1];
    if total <= S::zero() {
        return;
    }
    let mut out = Vec::with_capacity(m);
    out.push(path.samples[0].clone());
    let mut seg = 1usize;
    for j in 1..m - 1 {
        let target = total * S::of_usize(j) / S::of_usize(m - 1);
        while seg < m - 1 && cum[seg] < target {
            seg += 1;
        }
        let denom = cum[seg] - cum[seg - 1];
        let t = if denom > S::zero() {
            (target - cum[seg - 1]) / denom
        } else {
            S::zero()
        };
        out.push(path.samples[seg - 1].lerp(&path.samples[seg], t));
    }
    out.push(path.samples[m - 1].clone());
    path.samples = out;
}

/// Optimal path through an unstable solution u: a straight segment along the
/// first eigenfunction near t = 0, extended by gradient-flow trajectories
/// down to stable constants, reparametrized to [-1, 1] with h(0) = u exactly.
pub fn build_optimal_path<S: Scalar>(
    u: &Field<S>,
    pot: &Potential<S>,
    cps: &CriticalPointList<S>,
    m: usize,
) -> Result<Path<S>, MpError> {
    let grid = u.grid.clone();
    let rep = spectrum(
        u,
        pot,
        &SpectralOpts {
            k: 1,
            ..Default::default()
        },
    )?;
    if rep.eigenvalues[0] >= S::zero() {
        return Err(MpError::NotUnstable(rep.eigenvalues[0].as_f64()));
    }
    let mut phi = rep.eigenfields[0].clone();
    let sup = phi.sup_norm();
    let total: S = phi.integrate();
    let sign = if total >= S::zero() {
        S::one()
    } else {
        -S::one()
    };
    for v in phi.values.iter_mut() {
        *v = *v * sign / sup;
    }
    let e_u = energy(u, pot).energy;

    // largest delta in {2^-k, k >= 3} with E(u +/- delta phi) strictly below
    // E(u); the cap keeps the straight segment inside the quadratic regime
    let mut delta = S::of(0.125);
    let mut found = false;
    for _ in 0..40 {
        let mut up = u.clone();
        up.scaled_add(delta, &phi);
        let mut dn = u.clone();
        dn.scaled_add(-delta, &phi);
        let margin = S::of(1e-10);
        if energy(&up, pot).energy < e_u - margin && energy(&dn, pot).energy < e_u - margin {
            found = true;
            break;
        }
        delta = delta * S::of(0.5);
    }
    if !found {
        return Err(MpError::NotUnstable(rep.eigenvalues[0].as_f64()));
    }

    // flow the two shoulders down to stable constants
    let run_down = |start: Field<S>| -> Result<(Vec<Field<S>>, S), MpError> {
        let opts = FlowOpts {
            dt0: S::of(0.05) * pot.energy_scale() * pot.energy_scale(),
            t_end: S::of(2000.0),
            tol: S::of(1e-9),
            max_steps: 400_000,
            barrier: None,
        };
        // light-weight trajectory: checkpoints at geometrically spaced times
        let mut snaps = vec![start.clone()];
        let mut cur = start;
        let mut horizon = S::of(0.5);
        loop {
            let mut o = opts.clone();
            o.t_end = horizon;
            let tr = gradient_flow(&cur, pot, &o)?;
            cur = tr.final_field.clone();
            snaps.push(cur.clone());
            if tr.converged_to_stationary {
                break;
            }
            horizon = horizon * S::of(1.7);
            if horizon > opts.t_end {
                break;
            }
        }
        // the reached state must be a stable constant
        let mean = cur.integrate() / cur.grid.domain.total_volume;
        let target = cps
            .stable()
            .into_iter()
            .min_by(|a, b| (*a - mean).abs().partial_cmp(&(*b - mean).abs()).unwrap())
            .ok_or(MpError::FlowDidNotReachConstant(f64::INFINITY))?;
        let cdist = cur.sup_distance(&Field::constant(&grid, target));
        if cdist > S::of(1e-5) {
            return Err(MpError::FlowDidNotReachConstant(cdist.as_f64()));
        }
        snaps.push(Field::constant(&grid, target));
        Ok((snaps, target))
    };

    let mut up0 = u.clone();
    up0.scaled_add(delta, &phi);
    let mut dn0 = u.clone();
    dn0.scaled_add(-delta, &phi);
    let (snaps_up, s_up) = run_down(up0)?;
    let (snaps_dn, s_dn) = run_down(dn0)?;

    // segment chains: s_dn <- ... <- u - delta phi <- u -> u + delta phi -> ... -> s_up
    let seg_steps = 8usize;
    let mut left: Vec<Field<S>> = snaps_dn.clone();
    left.reverse(); // from the constant up to u - delta phi
    for j in 1..=seg_steps {
        let t = -delta + delta * S::of_usize(j) / S::of_usize(seg_steps);
        let mut f = u.clone();
        f.scaled_add(t, &phi);
        left.push(f);
    }
    // left now ends exactly at u
    let mut right: Vec<Field<S>> = Vec::new();
    for j in 1..=seg_steps {
        let t = delta * S::of_usize(j) / S::of_usize(seg_steps);
        let mut f = u.clone();
        f.scaled_add(t, &phi);
        right.push(f);
    }
    right.extend(snaps_up);

    // resample each half by arclength; u stays pinned at t = 0
    let half = m / 2;
    let left_rs = resample_chain(&left, half + 1);
    let right_rs = resample_chain(&right, half);
    let mut samples = left_rs;
    samples.extend(right_rs);
    let mm = samples.len();
    let ts: Vec<S> = (0..mm)
        .map(|k| -S::one() + S::of(2.0) * S::of_usize(k) / S::of_usize(mm - 1))
        .collect();
    let (e_lo, e_hi) = if s_dn <= s_up {
        (s_dn, s_up)
    } else {
        (s_up, s_dn)
    };
    let _ = e_lo;
    let _ = e_hi;
    Ok(Path {
        samples,
        ts,
        endpoints: (s_dn, s_up),
    })
}

/// Resample a chain of fields at `count` uniform arclength positions,
/// keeping both ends.
fn resample_chain<S: Scalar>(chain: &[Field<S>], count: usize) -> Vec<Field<S>> {
    let n = chain.len();
    let mut cum = vec![S::zero(); n];
    for k in 1..n {
        cum[k] = cum[k - 1] + chain[k].l2_distance(&chain[k - 1]);
    }
    let total = cum[n - 1].max(S::min_positive_value());
    let mut out = Vec::with_capacity(count);
    for j in 0..count {
        if j == 0 {
            out.push(chain[0].clone());
            continue;
        }
        if j == count - 1 {
            out.push(chain[n - 1].clone());
            continue;
        }
        let target = total * S::of_usize(j) / S::of_usize(count - 1);
        let mut seg = 1usize;
        while seg < n - 1 && cum[seg] < target {
            seg += 1;
        }
        let denom = cum[seg] - cum[seg - 1];
        let t = if denom > S::zero() {
            (target - cum[seg - 1]) / denom
        } else {
            S::zero()
        };
        out.push(chain[seg - 1].lerp(&chain[seg], t));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimalityFailure {
    NotThroughU,
    NoStrictInteriorMax,
    PoorSmoothness,
    NoNegativeCurvature,
}

/// Checks the four optimality conditions at u: the path passes through u at
/// t = 0, has a strict interior max there, the energy profile is smooth near
/// zero (quadratic fit quality), and its second difference is negative.
pub fn verify_optimal<S: Scalar>(
    path: &Path<S>,
    pot: &Potential<S>,
    u: &Field<S>,
) -> (bool, Vec<OptimalityFailure>) {
    let mut reasons = Vec::new();
    let c = path.center();
    let scale = u.mass_norm().max(S::one());
    if path.samples[c].l2_distance(u) > S::of(1e-8) * scale {
        reasons.push(OptimalityFailure::NotThroughU);
    }
    let energies = path.energies(pot);
    let e0 = energies[c];
    let mut strict = c != 0 && c != path.m() - 1;
    for (k, &e) in energies.iter().enumerate() {
        if k != c && e >= e0 {
            strict = false;
        }
    }
    if !strict {
        reasons.push(OptimalityFailure::NoStrictInteriorMax);
    }
    // quadratic fit of E(h(t)) over the samples nearest t = 0
    let win: Vec<usize> = (c.saturating_sub(2)..=(c + 2).min(path.m() - 1)).collect();
    if win.len() >= 5 {
        let (mut s0, mut s1, mut s2, mut s3, mut s4) =
            (S::zero(), S::zero(), S::zero(), S::zero(), S::zero());
        let (mut b0, mut b1, mut b2) = (S::zero(), S::zero(), S::zero());
        for &k in &win {
            let t = path.ts[k];
            let e = energies[k];
            s0 += S::one();
            s1 += t;
            s2 += t * t;
            s3 += t * t * t;
            s4 += t * t * t * t;
            b0 += e;
            b1 += e * t;
            b2 += e * t * t;
        }
        // solve the 3x3 normal equations by elimination
        let mut m3 = [[s0, s1, s2, b0], [s1, s2, s3, b1], [s2, s3, s4, b2]];
        for col in 0..3 {
            let piv = (col..3)
                .max_by(|&a, &b| m3[a][col].abs().partial_cmp(&m3[b][col].abs()).unwrap())
                .unwrap();
            m3.swap(col, piv);
            for row in 0..3 {
                if row != col && m3[col][col] != S::zero() {
                    let f = m3[row][col] / m3[col][col];
                    for j in col..4 {
                        let v = m3[col][j];
                        m3[row][j] -= f * v;
                    }
                }
            }
        }
        let coef: Vec<S> = (0..3).map(|i| m3[i][3] / m3[i][i]).collect();
        let mut worst = S::zero();
        let mut spread = S::zero();
        let e_min = win
            .iter()
            .map(|&k| energies[k])
            .fold(S::infinity(), |a, b| a.min(b));
        let e_max = win
            .iter()
            .map(|&k| energies[k])
            .fold(S::neg_infinity(), |a, b| a.max(b));
        spread = spread.max(e_max - e_min).max(S::of(1e-14));
        for &k in &win {
            let t = path.ts[k];
            let fit = coef[0] + coef[1] * t + coef[2] * t * t;
            worst = worst.max((fit - energies[k]).abs());
        }
        if worst > S::of(0.1) * spread {
            reasons.push(OptimalityFailure::PoorSmoothness);
        }
    }
    // negative second difference at the center
    if c == 0 || c == path.m() - 1 {
        reasons.push(OptimalityFailure::NoNegativeCurvature);
    } else {
        let d2 = energies[c + 1] - S::of(2.0) * energies[c] + energies[c - 1];
        if d2 >= S::zero() {
            reasons.push(OptimalityFailure::NoNegativeCurvature);
        }
    }
    (reasons.is_empty(), reasons)
}
