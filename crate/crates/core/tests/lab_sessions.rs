//! End-to-end sessions across modules: P-function diagnostics at computed
//! solutions, the stability-index jump of the zero state, symmetry
//! certificates on the triangulated sphere, and driver artifact round trips.

use std::sync::Arc;

use semilab::bifurcation::{continue_branch, ground_state_at, Family, S3Grids};
use semilab::config::DomainSpec;
use semilab::driver::{run_config, Command, RunSpec};
use semilab::field::{energy, p_function, unstable_range_check, Field};
use semilab::geometry::{sphere_radial, trisphere};
use semilab::potential::{find_critical_points, Potential};
use semilab::rearrange::{grad_norm, symmetrize};
use semilab::spectral::{constant_stability, SpectralOpts};

#[test]
fn p_function_at_the_ground_state() {
    let grid = Arc::new(sphere_radial::<f64>(3, 400).unwrap());
    let eps = 0.4;
    let u = ground_state_at(&grid, eps, None).unwrap().unwrap();
    let pot = Potential::allen_cahn(eps);
    let rep = p_function(&u, &pot);
    // the max of P sits at a critical point of u (poles of the odd profile)
    let spacing = std::f64::consts::PI / 400.0;
    assert!(
        rep.distance <= 2.0 * spacing,
        "argmax-to-critical distance {} vs spacing {}",
        rep.distance,
        spacing
    );
    // max P <= -min(F(u_min), F(u_max)) + O(h)
    let bound = -pot.eval(u.min()).min(pot.eval(u.max()));
    let pmax = rep.p.values[rep.argmax];
    assert!(
        pmax <= bound + 10.0 * spacing,
        "P max {pmax} vs bound {bound}"
    );
    // the range lemma holds at the unstable solution
    let cps = find_critical_points(&pot, 1e-9).unwrap();
    assert!(unstable_range_check(&u, &pot, &cps).holds());
}

#[test]
fn zero_state_index_jump_across_eps1() {
    let grid = Arc::new(sphere_radial::<f64>(3, 300).unwrap());
    // above eps_1 only the constant direction is unstable
    let above = constant_stability(
        0.0,
        &Potential::allen_cahn(0.7),
        &grid,
        &SpectralOpts {
            k: 8,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(above.morse_index, 1);
    // between the thresholds the l = 1 block joins: 1 + 4
    let between = constant_stability(
        0.0,
        &Potential::allen_cahn(0.45),
        &grid,
        &SpectralOpts {
            k: 12,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(between.morse_index, 5);
}

#[test]
fn nonconstant_solutions_are_unstable_in_class() {
    let gs = S3Grids::<f64>::build(200, 48, 48).unwrap();
    let gb = continue_branch(&gs, Family::Ground, 0.5, 0.5, 1).unwrap();
    assert!(gb.points[0].morse_index >= 1);
    let cb = continue_branch(&gs, Family::Clifford, 0.3, 0.3, 1).unwrap();
    assert!(cb.points[0].morse_index >= 1);
    let xb = continue_branch(&gs, Family::CrossEquators, 0.3, 0.3, 1).unwrap();
    assert!(xb.points[0].morse_index >= 1);
    // nonconstant solution energies sit below the zero level
    for b in [&gb, &cb, &xb] {
        for p in &b.points {
            let e0 = 2.0 * std::f64::consts::PI.powi(2) / (4.0 * p.eps);
            assert!(p.energy < e0);
        }
    }
}

#[test]
fn schwarz_certificate_on_the_triangulated_sphere() {
    // radial S^2 ground-state profile carried onto the triangulated sphere
    // about a mesh node: the symmetrization certificate must accept it
    let radial = Arc::new(sphere_radial::<f64>(2, 400).unwrap());
    let eps = 0.5; // < eps_1(S^2) = 1/sqrt(2)
    let u_rad = ground_state_at(&radial, eps, None).unwrap().unwrap();
    let tri = Arc::new(trisphere::<f64>(4).unwrap());
    let pole: Vec<f64> = tri.domain.coords[0].clone();
    let profile = |theta: f64| {
        // linear interpolation of the radial profile
        let h = std::f64::consts::PI / 400.0;
        let k = ((theta / h).floor() as usize).min(399);
        let t = theta / h - k as f64;
        u_rad.values[k] * (1.0 - t) + u_rad.values[k + 1] * t
    };
    let g = Field::from_fn(&tri, |c| {
        let cosd = (c[0] * pole[0] + c[1] * pole[1] + c[2] * pole[2]).clamp(-1.0, 1.0);
        profile(cosd.acos())
    });
    let g_star = symmetrize(&g, 0).unwrap();
    let defect = g.l2_distance(&g_star) / g.mass_norm();
    let mesh_tol = 2.0 * 1.1071 / 16.0; // two max edge lengths
    assert!(defect <= mesh_tol, "certificate defect {defect}");
    // symmetrization does not raise the energy (mesh term allowed)
    let pot = Potential::allen_cahn(eps);
    let e_g = energy(&g, &pot).energy;
    let e_star = energy(&g_star, &pot).energy;
    assert!(e_star <= e_g + 2.0 * (1.1071 / 16.0) * eps * grad_norm(&g).powi(2) + 0.05 * e_g.abs());
}

#[test]
fn driver_branch_and_gap_artifacts() {
    let dir = std::env::temp_dir().join("semilab_session_branch");
    let _ = std::fs::remove_dir_all(&dir);
    let mut spec = RunSpec::new(Command::Branch);
    spec.domain = DomainSpec::SphereRadial { dim: 3, n: 200 };
    spec.family = Some(Family::Ground);
    spec.eps_start = Some(0.5);
    spec.eps_end = Some(0.45);
    spec.steps = 1;
    run_config(&spec, &dir).unwrap();
    let csv = std::fs::read_to_string(dir.join("branch.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "epsilon,energy,index,nullity,sup_norm,symmetry_defect,nodal_defect,residual"
    );
    assert_eq!(csv.lines().count(), 3);
    // index column is 1 on the ground branch
    for line in csv.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[2], "1");
        assert_eq!(cols[3], "3");
    }

    let dir2 = std::env::temp_dir().join("semilab_session_gap");
    let _ = std::fs::remove_dir_all(&dir2);
    let mut gspec = RunSpec::new(Command::Gap);
    gspec.domain = DomainSpec::SphereRadial { dim: 3, n: 200 };
    gspec.eps_list = vec![0.45];
    run_config(&gspec, &dir2).unwrap();
    let gap = std::fs::read_to_string(dir2.join("gap.csv")).unwrap();
    assert!(
        gap.starts_with("epsilon,a,b_candidate,gap,a_family,b_family,degenerate,is_upper_bound")
    );
    let row = gap.lines().nth(1).unwrap();
    assert!(row.contains("ground"));
    assert!(row.ends_with("true"), "upper-bound flag recorded: {row}");
}

#[test]
fn driver_solve_writes_index_one_spectrum() {
    let dir = std::env::temp_dir().join("semilab_session_solve");
    let _ = std::fs::remove_dir_all(&dir);
    let mut spec = RunSpec::new(Command::Solve);
    spec.domain = DomainSpec::SphereRadial { dim: 3, n: 200 };
    spec.potential.eps = Some(0.4);
    run_config(&spec, &dir).unwrap();
    let spec_json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("spectrum.json")).unwrap()).unwrap();
    assert_eq!(spec_json["morse_index"], 1);
    assert_eq!(spec_json["nullity"], 3);
    assert!(dir.join("field.csv").exists());
    assert!(dir.join("energy.json").exists());
    assert!(dir.join("manifest.json").exists());
}

#[test]
fn mesh_export_round_trip_counts() {
    let tri = trisphere::<f64>(2).unwrap();
    let text = semilab::io::mesh_text(&tri);
    let nodes = text.lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(nodes, tri.n_nodes() + tri.elements.len());
}

#[test]
fn generic_scalar_grid_smoke() {
    let g = sphere_radial::<f32>(2, 64).unwrap();
    let sum: f32 = g.domain.weights.iter().sum();
    assert!((sum - 4.0 * std::f32::consts::PI).abs() < 1e-3);
    let pot = Potential::<f32>::double_well();
    let u = Field::constant(&Arc::new(g), 0.5f32);
    let e = energy(&u, &pot);
    assert!((e.energy - 4.0 * std::f32::consts::PI * 0.140625).abs() < 1e-3);
}

#[test]
fn gap_below_second_threshold_orders_all_families() {
    use semilab::bifurcation::gap_table;
    let gs = S3Grids::<f64>::build(200, 48, 48).unwrap();
    let eps = 0.30;
    let branches: Vec<_> = [
        Family::Ground,
        Family::ConstantZero,
        Family::Clifford,
        Family::CrossEquators,
    ]
    .into_iter()
    .map(|f| continue_branch(&gs, f, eps, eps, 1).unwrap())
    .collect();
    let table = gap_table(&branches, &[eps]).unwrap();
    let row = &table.rows[0];
    assert_eq!(row.a_family, Family::Ground);
    let b = row.b_candidate.unwrap();
    assert!(b > row.a);
    // the second level is the least of the torus/cross/zero levels
    let clifford_level = branches[2].points[0].energy;
    let cross_level = branches[3].points[0].energy;
    let zero_level = branches[1].points[0].energy;
    let expected_b = clifford_level.min(cross_level).min(zero_level);
    assert!((b - expected_b).abs() < 1e-12 * expected_b.abs());
    assert!(row.is_upper_bound);
}

#[test]
fn full_mesh_and_mode_spectra_agree() {
    use semilab::spectral::spectrum;
    // same closed-form radial state on S^2, discretized two ways
    let eps = 0.6;
    let pot = Potential::allen_cahn(eps);
    let state = |z: f64| (z / 0.6).tanh();
    let radial = Arc::new(sphere_radial::<f64>(2, 400).unwrap());
    let u_rad = Field::from_fn(&radial, |c| state(c[0].cos()));
    let rep_rad = spectrum(
        &u_rad,
        &pot,
        &SpectralOpts {
            k: 4,
            ..Default::default()
        },
    )
    .unwrap();
    let tri = Arc::new(trisphere::<f64>(4).unwrap());
    let u_tri = Field::from_fn(&tri, |c| state(c[2]));
    let rep_tri = spectrum(
        &u_tri,
        &pot,
        &SpectralOpts {
            k: 4,
            ..Default::default()
        },
    )
    .unwrap();
    for k in 0..4 {
        let (a, b) = (rep_rad.eigenvalues[k], rep_tri.eigenvalues[k]);
        assert!(
            (a - b).abs() <= 0.01 * a.abs().max(1.0),
            "k={k}: mode {a} vs mesh {b}"
        );
    }
}

#[test]
fn palais_smale_bound_diagnostic() {
    use semilab::field::ps_diagnostic;
    use semilab::potential::{classify_hypothesis, HypTag};
    let pot = Potential::<f64>::quartic_decay();
    let cps = find_critical_points(&pot, 1e-9).unwrap();
    let hyp = classify_hypothesis(&pot, &cps, 3).unwrap();
    assert_eq!(hyp.tag, HypTag::A3);
    let grid = Arc::new(sphere_radial::<f64>(3, 128).unwrap());
    let mut rng = semilab::rng::Rng::new(6);
    for _ in 0..10 {
        let u = Field::random_in(&grid, &mut rng, -2.0, 2.0);
        let d = ps_diagnostic(&u, &pot, hyp.rho, hyp.r0);
        assert!(d.holds, "lhs {} rhs {}", d.lhs, d.rhs);
        assert!(d.w_norm_sq.is_finite());
    }
}

#[test]
fn index_plus_nullity_bounded_between_thresholds() {
    use semilab::spectral::spectrum;
    // for eps in (eps_2, eps_1): Ind(u) + dim ker(L_u) <= 5 at every solution
    let grid = Arc::new(sphere_radial::<f64>(3, 300).unwrap());
    for eps in [0.40f64, 0.45, 0.50] {
        let pot = Potential::allen_cahn(eps);
        let zero = Field::constant(&grid, 0.0);
        let rz = spectrum(
            &zero,
            &pot,
            &SpectralOpts {
                k: 16,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(rz.morse_index + rz.nullity <= 5, "zero at {eps}");
        let g = ground_state_at(&grid, eps, None).unwrap().unwrap();
        let rg = spectrum(
            &g,
            &pot,
            &SpectralOpts {
                k: 10,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(rg.morse_index + rg.nullity <= 5, "ground at {eps}");
        for c in [-1.0, 1.0] {
            let f = Field::constant(&grid, c);
            let rc = spectrum(
                &f,
                &pot,
                &SpectralOpts {
                    k: 6,
                    ..Default::default()
                },
            )
            .unwrap();
            assert!(rc.morse_index + rc.nullity <= 5);
        }
    }
}

#[test]
fn radial_sweep_finds_only_the_known_families() {
    use semilab::field::residual;
    use semilab::flow::newton_solve;
    // between the thresholds, radial Newton runs land on constants or the
    // ground family only
    let grid = Arc::new(sphere_radial::<f64>(3, 200).unwrap());
    let eps = 0.45;
    let pot = Potential::allen_cahn(eps);
    let ground = ground_state_at(&grid, eps, None).unwrap().unwrap();
    let mut rng = semilab::rng::Rng::new(77);
    let mut hits = 0;
    for _ in 0..12 {
        let seed = Field::random_in(&grid, &mut rng, -0.9, 0.9);
        let Ok(u) = newton_solve(&seed, &pot, 1e-9, 120) else {
            continue;
        };
        if residual(&u, &pot).mass_norm() > 1e-9 {
            continue;
        }
        hits += 1;
        let is_const = [-1.0, 0.0, 1.0]
            .iter()
            .any(|&c| u.sup_distance(&Field::constant(&grid, c)) < 1e-6);
        let is_ground = {
            let mut neg = ground.clone();
            for v in neg.values.iter_mut() {
                *v = -*v;
            }
            u.l2_distance(&ground).min(u.l2_distance(&neg)) < 1e-5
        };
        // radial profiles centered off the pole appear as reflected/shifted
        // copies; identify them by energy instead
        let e = energy(&u, &pot).energy;
        let e_ground = energy(&ground, &pot).energy;
        let e_zero = 2.0 * std::f64::consts::PI.powi(2) / (4.0 * eps);
        let known_level = e.abs() < 1e-9
            || (e - e_ground).abs() < 1e-6 * e_ground
            || (e - e_zero).abs() < 1e-6 * e_zero;
        assert!(
            is_const || is_ground || known_level,
            "unknown radial solution, energy {e}"
        );
    }
    assert!(hits >= 6, "Newton succeeded only {hits} times");
}
