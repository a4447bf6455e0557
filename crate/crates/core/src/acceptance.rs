//! The acceptance suite: twelve numbered criteria with pinned grids and
//! tolerances, shared by the `reproduce` command and the integration tests.
//! Every criterion returns a pass/fail record with a one-line detail string.

use std::sync::Arc;
use std::time::Instant;

use crate::bifurcation::{
    bisect_dirichlet_birth, bisect_ground_birth, continue_branch, gap_table, ground_state_at,
    Family, S3Grids,
};
use crate::field::{ac_identity_defect, energy, grad_squared, unstable_range_check, Field};
use crate::flow::{gradient_flow, newton_solve, FlowOpts};
use crate::geometry::{ball_radial, sphere_radial, trisphere, Bc, Grid};
use crate::linalg::{lowest_eigenpairs, EigOpts};
use crate::mountainpass::{
    build_optimal_path, initial_path, minmax_deform, verify_optimal, MinMaxOpts,
};
use crate::potential::{
    classify_hypothesis, find_critical_points, truncate_potential, HypTag, Potential,
};
use crate::rearrange::{
    grad_norm, halfspaces_fixing, integral_of, polarization_sequence, polarize_with, symmetrize,
    SequenceMode,
};
use crate::rng::Rng;
use crate::spectral::{spectrum, SpectralOpts};

#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub details: String,
    pub seconds: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "[{}] criterion {:2} {:<22} ({:6.1}s)  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.details
        )
    }
}

pub const CRITERIA: [(usize, &str); 12] = [
    (1, "threshold_eps1"),
    (2, "threshold_eps2"),
    (3, "morse_data"),
    (4, "mountain_pass"),
    (5, "energy_identity"),
    (6, "gap_table"),
    (7, "dirichlet_eigenvalue"),
    (8, "rearrangement"),
    (9, "symmetry_certificates"),
    (10, "flow_contract"),
    (11, "apriori_bound"),
    (12, "determinism"),
];

fn run_one(
    id: usize,
    name: &'static str,
    f: impl FnOnce() -> Result<(bool, String), String>,
) -> CriterionResult {
    let start = Instant::now();
    let (passed, details) = match f() {
        Ok(ok) => ok,
        Err(e) => (false, format!("error: {e}")),
    };
    CriterionResult {
        id,
        name,
        passed,
        details,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Run the criteria whose name contains `filter` (all when empty).
/// `seed` drives every random ingredient; `scratch` receives the determinism
/// check's artifacts.
pub fn run(filter: &str, seed: u64, scratch: &std::path::Path) -> Vec<CriterionResult> {
    let mut out = Vec::new();
    for (id, name) in CRITERIA {
        if !filter.is_empty() && !name.contains(filter) && filter != id.to_string() {
            continue;
        }
        let r = match id {
            1 => run_one(id, name, c1_threshold_eps1),
            2 => run_one(id, name, c2_threshold_eps2),
            3 => run_one(id, name, c3_morse_data),
            4 => run_one(id, name, c4_mountain_pass),
            5 => run_one(id, name, c5_energy_identity),
            6 => run_one(id, name, c6_gap_table),
            7 => run_one(id, name, c7_dirichlet_eigenvalue),
            8 => run_one(id, name, move || c8_rearrangement(seed)),
            9 => run_one(id, name, c9_symmetry_certificates),
            10 => run_one(id, name, move || c10_flow_contract(seed)),
            11 => run_one(id, name, c11_apriori_bound),
            12 => {
                let scratch = scratch.to_path_buf();
                run_one(id, name, move || c12_determinism(seed, &scratch))
            }
            _ => unreachable!(),
        };
        out.push(r);
    }
    out
}

fn s3(n: usize) -> Result<Arc<Grid<f64>>, String> {
    Ok(Arc::new(
        sphere_radial::<f64>(3, n).map_err(|e| e.to_string())?,
    ))
}

pub fn c1_threshold_eps1() -> Result<(bool, String), String> {
    let grid = s3(400)?;
    let hat = bisect_ground_birth(&grid, 0.52, 0.64, 12).map_err(|e| e.to_string())?;
    let exact = 1.0 / 3.0f64.sqrt();
    let rel = (hat - exact).abs() / exact;
    Ok((
        rel <= 0.01,
        format!("eps1_hat = {hat:.6}, exact 3^-1/2 = {exact:.6}, rel err {rel:.2e}"),
    ))
}

pub fn c2_threshold_eps2() -> Result<(bool, String), String> {
    let half = Arc::new(crate::geometry::clifford_half::<f64>(200).map_err(|e| e.to_string())?);
    let hat = bisect_dirichlet_birth(&half, 0.30, 0.40, 14).map_err(|e| e.to_string())?;
    let exact = 1.0 / (2.0 * 2.0f64.sqrt());
    let rel = (hat - exact).abs() / exact;
    Ok((
        rel <= 0.01,
        format!("eps2_hat = {hat:.6}, exact (2 sqrt2)^-1 = {exact:.6}, rel err {rel:.2e}"),
    ))
}

pub fn c3_morse_data() -> Result<(bool, String), String> {
    let grid = s3(400)?;
    let pot45 = Potential::allen_cahn(0.45);
    let zero = Field::constant(&grid, 0.0);
    let rep0 = spectrum(
        &zero,
        &pot45,
        &SpectralOpts {
            k: 16,
            ..Default::default()
        },
    )
    .map_err(|e| e.to_string())?;
    let ground = ground_state_at(&grid, 0.4, None)
        .map_err(|e| e.to_string())?
        .ok_or("no ground state at eps = 0.4")?;
    let pot40 = Potential::allen_cahn(0.4);
    let repg = spectrum(
        &ground,
        &pot40,
        &SpectralOpts {
            k: 10,
            ..Default::default()
        },
    )
    .map_err(|e| e.to_string())?;
    let ok = rep0.morse_index == 5 && repg.morse_index == 1 && repg.nullity == 3;
    Ok((
        ok,
        format!(
            "index(0; eps=0.45) = {} (want 5), ground: index {} (want 1), nullity {} (want 3, zero_tol {:.1e})",
            rep0.morse_index, repg.morse_index, repg.nullity, repg.zero_tol
        ),
    ))
}

pub fn c4_mountain_pass() -> Result<(bool, String), String> {
    let grid = s3(400)?;
    let pot = Potential::allen_cahn(0.4);
    let ground = ground_state_at(&grid, 0.4, None)
        .map_err(|e| e.to_string())?
        .ok_or("no ground state at eps = 0.4")?;
    let e_ground = energy(&ground, &pot).energy;
    // symmetry-breaking detour (not a solution) so the deformation can leave
    // the constants subspace
    let detour = Field::from_fn(&grid, |c| 0.9 * c[0].cos());
    let mut path =
        initial_path(-1.0, 1.0, Some(&detour), &grid, 33, &pot).map_err(|e| e.to_string())?;
    let opts = MinMaxOpts {
        iters: 8000,
        tol: 1e-6,
        dt0: 0.04,
        ..Default::default()
    };
    let mm = minmax_deform(&mut path, &pot, &opts).map_err(|e| e.to_string())?;
    let rel = (mm.level - e_ground).abs() / e_ground;
    // index of the critical point the deformation found (peak polished to a
    // solution first: its raw residual ~tol smears the kernel eigenvalues)
    let peak = newton_solve(&mm.argmax_field, &pot, 1e-10, 40).map_err(|e| e.to_string())?;
    let peak_rep = spectrum(
        &peak,
        &pot,
        &SpectralOpts {
            k: 6,
            ..Default::default()
        },
    )
    .map_err(|e| e.to_string())?;
    let cps = find_critical_points(&pot, 1e-9).map_err(|e| e.to_string())?;
    let opt_path = build_optimal_path(&ground, &pot, &cps, 65).map_err(|e| e.to_string())?;
    let (verified, reasons) = verify_optimal(&opt_path, &pot, &ground);
    let ok = rel <= 0.01 && verified && peak_rep.morse_index == 1;
    Ok((
        ok,
        format!(
            "minmax level {:.6} vs ground energy {:.6} (rel {:.2e}), peak index {} (want 1); optimal-path verifier: {} {:?}",
            mm.level, e_ground, rel, peak_rep.morse_index, verified, reasons
        ),
    ))
}

pub fn c5_energy_identity() -> Result<(bool, String), String> {
    // E_eps(u) = (1/(4 eps)) int (1 - u^4) at solutions (by-parts route)
    let mut worst = 0.0f64;
    let mut variant_defect = 0.0f64;
    let grid = s3(800)?;
    for eps in [0.4, 0.5] {
        let u = ground_state_at(&grid, eps, None)
            .map_err(|e| e.to_string())?
            .ok_or("missing ground state")?;
        let pot = Potential::allen_cahn(eps);
        worst = worst.max(ac_identity_defect(&u, &pot));
        // the stronger displayed variant E = E(0) - (1/eps) int u^4 misses by
        // the factor between the two constants; record it for the log
        let e = energy(&u, &pot).energy;
        let e0 = 2.0 * std::f64::consts::PI.powi(2) / (4.0 * eps);
        let q4: f64 = (0..u.n())
            .map(|i| u.grid.mass()[i] * u.values[i].powi(4))
            .sum();
        variant_defect = variant_defect.max(((e - (e0 - q4 / eps)) / e).abs());
    }
    // Clifford-torus solution on its reduced grid
    let gs = S3Grids::<f64>::build(800, 64, 96).map_err(|e| e.to_string())?;
    let cb = continue_branch(&gs, Family::Clifford, 0.30, 0.30, 1).map_err(|e| e.to_string())?;
    worst = worst.max(ac_identity_defect(
        &cb.points[0].field,
        &Potential::allen_cahn(0.30),
    ));
    let xb =
        continue_branch(&gs, Family::CrossEquators, 0.30, 0.30, 1).map_err(|e| e.to_string())?;
    worst = worst.max(ac_identity_defect(
        &xb.points[0].field,
        &Potential::allen_cahn(0.30),
    ));
    Ok((
        worst <= 1e-4,
        format!(
            "max relative defect {worst:.2e} over ground/clifford/cross solutions with constant 1/(4 eps); the 1/eps-constant variant misses by {variant_defect:.2} (logged)"
        ),
    ))
}

pub fn c6_gap_table() -> Result<(bool, String), String> {
    let gs = S3Grids::<f64>::build(400, 48, 48).map_err(|e| e.to_string())?;
    let eps_list = [0.40, 0.45, 0.50];
    let ground = continue_branch(&gs, Family::Ground, 0.50, 0.40, 2).map_err(|e| e.to_string())?;
    let zero =
        continue_branch(&gs, Family::ConstantZero, 0.50, 0.40, 2).map_err(|e| e.to_string())?;
    let table = gap_table(&[ground, zero], &eps_list).map_err(|e| e.to_string())?;
    let mut ok = true;
    let mut notes = Vec::new();
    for r in &table.rows {
        let good = r.a_family == Family::Ground
            && r.b_candidate.is_some()
            && r.gap.unwrap_or(-1.0) > 0.0
            && !r.degenerate;
        ok &= good;
        notes.push(format!(
            "eps {:.2}: a {:.4} < b {:.4}",
            r.eps,
            r.a,
            r.b_candidate.unwrap_or(f64::NAN)
        ));
    }
    // above eps_1 the table degenerates
    let zero7 =
        continue_branch(&gs, Family::ConstantZero, 0.70, 0.70, 1).map_err(|e| e.to_string())?;
    let ground7 = continue_branch(&gs, Family::Ground, 0.70, 0.70, 1).map_err(|e| e.to_string())?;
    let t7 = gap_table(&[ground7, zero7], &[0.70]).map_err(|e| e.to_string())?;
    let row7 = &t7.rows[0];
    ok &= row7.degenerate && row7.a_family == Family::ConstantZero;
    notes.push(format!("eps 0.70: degenerate = {}", row7.degenerate));
    Ok((ok, notes.join("; ")))
}

pub fn c7_dirichlet_eigenvalue() -> Result<(bool, String), String> {
    let pi = std::f64::consts::PI;
    let mut ok = true;
    let mut notes = Vec::new();
    for tau in [pi / 3.0, pi / 2.0, 2.0 * pi / 3.0] {
        let grid =
            ball_radial::<f64>(3, tau, 400, Bc::Dirichlet, true).map_err(|e| e.to_string())?;
        let q = vec![0.0; grid.n_nodes()];
        let (a, qs, ms, _) = grid.reduced_pencil(&q);
        let lam = lowest_eigenpairs(
            &a,
            &qs,
            &ms,
            &EigOpts {
                k: 1,
                ..Default::default()
            },
        )
        .values[0];
        let exact = (pi / tau).powi(2) - 1.0;
        let rel = (lam - exact).abs() / exact;
        ok &= rel <= 0.01;
        notes.push(format!(
            "tau {:.3}: {:.4} vs {:.4} (rel {:.1e})",
            tau, lam, exact, rel
        ));
    }
    Ok((ok, notes.join("; ")))
}

pub fn c8_rearrangement(seed: u64) -> Result<(bool, String), String> {
    let grid = Arc::new(trisphere::<f64>(4).map_err(|e| e.to_string())?);
    let h_max = 1.1071 / 16.0;
    let mut rng = Rng::new(seed ^ 0x8EA2);
    let family = halfspaces_fixing(&grid, 0);
    let mut worst_equi = 0.0f64;
    let mut worst_ps = f64::NEG_INFINITY;
    let mut idem_exact = true;
    for _ in 0..100 {
        let u = Field::random_in(&grid, &mut rng, -1.0, 1.0);
        // polarization: exact equimeasurability and idempotence
        let h = &family[rng.index(family.len())];
        let uh = polarize_with(&u, h);
        for phi in [|t: f64| t, |t: f64| t * t] {
            let d = (integral_of(&u, phi) - integral_of(&uh, phi)).abs()
                / integral_of(&u, |t| 1.0 + t.abs());
            worst_equi = worst_equi.max(d);
        }
        let uhh = polarize_with(&uh, h);
        idem_exact &= uh.sup_distance(&uhh) == 0.0;
        // Polya-Szego with the pinned mesh term 2 h_max ||grad u||
        let star = symmetrize(&u, 0).map_err(|e| e.to_string())?;
        let (gu, gs) = (grad_norm(&u), grad_norm(&star));
        worst_ps = worst_ps.max(gs - gu * (1.0 + 1e-6) - 2.0 * h_max * gu);
    }
    // a short mesh-plane polarization sequence stays exactly equimeasurable
    let u = Field::random_in(&grid, &mut rng, -1.0, 1.0);
    let mut srng = rng.fork(3);
    let trace = polarization_sequence(&u, 0, 30, &mut srng, SequenceMode::MeshPlanes)
        .map_err(|e| e.to_string())?;
    for uk in &trace.fields {
        let d = (integral_of(&u, |t| t * t) - integral_of(uk, |t| t * t)).abs()
            / integral_of(&u, |t| 1.0 + t * t);
        worst_equi = worst_equi.max(d);
    }
    let ok = worst_equi <= 1e-8 && worst_ps <= 0.0 && idem_exact;
    Ok((
        ok,
        format!(
            "equimeasurability defect {worst_equi:.2e} (<= 1e-8), Polya-Szego margin {worst_ps:.2e} (<= 0), idempotence exact: {idem_exact}"
        ),
    ))
}

pub fn c9_symmetry_certificates() -> Result<(bool, String), String> {
    let gs = S3Grids::<f64>::build(400, 48, 48).map_err(|e| e.to_string())?;
    let gb = continue_branch(&gs, Family::Ground, 0.40, 0.40, 1).map_err(|e| e.to_string())?;
    let gp = &gb.points[0];
    let cell = std::f64::consts::PI / 400.0;
    let cb = continue_branch(&gs, Family::Clifford, 0.30, 0.30, 1).map_err(|e| e.to_string())?;
    let cp = &cb.points[0];
    let ok = gp.symmetry_defect <= 1e-6
        && gp.nodal_defect.unwrap_or(f64::INFINITY) <= cell
        && cp.symmetry_defect <= 1e-6;
    Ok((
        ok,
        format!(
            "ground oddness {:.1e} (<= 1e-6), nodal defect {:.1e} (<= cell {:.1e}); clifford antisymmetry {:.1e} (<= 1e-6)",
            gp.symmetry_defect,
            gp.nodal_defect.unwrap_or(f64::INFINITY),
            cell,
            cp.symmetry_defect
        ),
    ))
}

pub fn c10_flow_contract(seed: u64) -> Result<(bool, String), String> {
    let grid = s3(200)?;
    let pot = Potential::double_well();
    let mut rng = Rng::new(seed ^ 0xF10A);
    let mut monotone = true;
    let mut inside = true;
    for _ in 0..50 {
        let u0 = Field::random_in(&grid, &mut rng, -1.0, 1.0);
        let opts = FlowOpts {
            dt0: 0.05,
            t_end: 20.0,
            tol: 1e-9,
            max_steps: 100_000,
            barrier: Some((-1.0, 1.0)),
        };
        let tr = gradient_flow(&u0, &pot, &opts).map_err(|e| e.to_string())?;
        for w in tr.energies.windows(2) {
            if w[1] > w[0] + crate::flow::energy_slack(w[0]) {
                monotone = false;
            }
        }
        for v in &tr.final_field.values {
            if *v <= -1.0 || *v >= 1.0 {
                inside = false;
            }
        }
    }
    // stationary starts stay fixed
    let one = Field::constant(&grid, 1.0);
    let opts = FlowOpts {
        dt0: 0.1,
        t_end: 5.0,
        tol: 1e-10,
        ..Default::default()
    };
    let tr1 = gradient_flow(&one, &pot, &opts).map_err(|e| e.to_string())?;
    let fixed_const = tr1.final_field.values == one.values;
    let ground = ground_state_at(&grid, 0.45, None)
        .map_err(|e| e.to_string())?
        .ok_or("missing ground state")?;
    let pot45 = Potential::allen_cahn(0.45);
    let opts45 = FlowOpts {
        dt0: 0.05,
        t_end: 3.0,
        tol: 1e-14,
        ..Default::default()
    };
    let trg = gradient_flow(&ground, &pot45, &opts45).map_err(|e| e.to_string())?;
    let drift = trg.final_field.sup_distance(&ground);
    let fixed_ground = drift < 1e-9;
    let ok = monotone && inside && fixed_const && fixed_ground;
    Ok((
        ok,
        format!(
            "50 barrier flows: energies non-increasing {monotone}, iterates inside {inside}; stationary starts fixed: constant {fixed_const}, ground drift {drift:.1e}"
        ),
    ))
}

pub fn c11_apriori_bound() -> Result<(bool, String), String> {
    let grid = s3(200)?;
    let d = std::f64::consts::PI;
    let mut ok = true;
    let mut notes = Vec::new();
    // (A2) variants of F = -t^2/2: the plain one (only u = 0 solves) and the
    // bumped one (nonconstant unstable solutions exist)
    for pot in [
        Potential::<f64>::neg_quadratic(),
        Potential::neg_quadratic_bump(),
    ] {
        let cps = find_critical_points(&pot, 1e-8).map_err(|e| e.to_string())?;
        let hyp = classify_hypothesis(&pot, &cps, 3).map_err(|e| e.to_string())?;
        if hyp.tag != HypTag::A2 {
            return Err(format!(
                "{} classified as {:?}, expected A2",
                pot.name, hyp.tag
            ));
        }
        let mut fmax = 0.0f64;
        for i in 0..=1000 {
            let t = cps.k_minus + (cps.k_plus - cps.k_minus) * i as f64 / 1000.0;
            fmax = fmax.max(pot.d1(t).abs());
        }
        let bound = crate::field::apriori_bound(hyp.c, hyp.k, d, cps.k_plus, cps.k_minus, fmax)
            .map_err(|e| e.to_string())?;
        // gather unstable solutions: u = 0 always; a nonconstant one for the bump
        let mut sols = vec![Field::constant(&grid, 0.0)];
        if pot.name == "neg_quadratic_bump" {
            // the odd class sees 0 as unstable (f'(0) = -5 < -lambda_1), so the
            // projected flow lands on the nonconstant odd solution
            let seed = Field::from_fn(&grid, |c| 0.05 * c[0].cos());
            let flowed = crate::bifurcation::odd_class_flow(&seed, &pot, 0.15, 1e-7, 60_000)
                .map_err(|e| e.to_string())?;
            let u = newton_solve(&flowed, &pot, 1e-10, 80).map_err(|e| e.to_string())?;
            if u.sup_norm() < 1e-3 {
                return Err("bump potential: expected a nonconstant unstable solution".into());
            }
            sols.push(u);
        }
        for u in &sols {
            let gmax = grad_squared(u).iter().fold(0.0f64, |a, &b| a.max(b)).sqrt();
            let total = u.sup_norm() + gmax;
            if total > bound.m0 {
                ok = false;
            }
            // the truncation at M > M0 reproduces the same unstable solution
            let star = truncate_potential(&pot, &cps, bound.m0 + 1.0).map_err(|e| e.to_string())?;
            let u_star = newton_solve(u, &star, 1e-10, 40).map_err(|e| e.to_string())?;
            let dist = u.l2_distance(&u_star);
            if dist > 1e-6 {
                ok = false;
            }
            // range bounds of the unstable-solution lemma
            if !unstable_range_check(u, &pot, &cps).holds() {
                ok = false;
            }
            notes.push(format!(
                "{}: sup+grad {:.3} <= M0 {:.3e}, F* re-solve distance {:.1e}",
                pot.name, total, bound.m0, dist
            ));
        }
    }
    Ok((ok, notes.join("; ")))
}

pub fn c12_determinism(seed: u64, scratch: &std::path::Path) -> Result<(bool, String), String> {
    use crate::driver::{run_config, RunSpec};
    let specs = vec![
        RunSpec::thresholds(200),
        RunSpec::flow_random(64, seed, 0.05, 3.0),
        RunSpec::rearrange(3, seed, 40),
        RunSpec::spectrum_zero(200, 0.45),
    ];
    let mut identical = true;
    let mut compared = 0usize;
    for (k, spec) in specs.iter().enumerate() {
        let dir_a = scratch.join(format!("det_a_{k}"));
        let dir_b = scratch.join(format!("det_b_{k}"));
        run_config(spec, &dir_a).map_err(|e| e.to_string())?;
        run_config(spec, &dir_b).map_err(|e| e.to_string())?;
        let mut names: Vec<String> = std::fs::read_dir(&dir_a)
            .map_err(|e| e.to_string())?
            .filter_map(|e| e.ok())
            .map(|e| e.file_name().to_string_lossy().into_owned())
            .filter(|n| n.ends_with(".csv") || n.ends_with(".json"))
            .filter(|n| n != "manifest.json")
            .collect();
        names.sort();
        for n in names {
            let a = std::fs::read(dir_a.join(&n)).map_err(|e| e.to_string())?;
            let b = std::fs::read(dir_b.join(&n)).map_err(|e| e.to_string())?;
            identical &= a == b;
            compared += 1;
        }
    }
    Ok((
        identical && compared > 0,
        format!("{compared} artifacts compared byte-for-byte across repeated runs: identical = {identical}"),
    ))
}
