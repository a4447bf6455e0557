//! Command driver: validated run specifications, artifact writing, and the
//! reproduce entry point. The CLI binary is a thin argv adapter over this.

use std::fs;
use std::path::Path as FsPath;
use std::sync::Arc;
use std::time::Instant;

use serde_json::{json, Value};

use crate::acceptance;
use crate::bifurcation::{
    continue_branch, gap_table, ground_state_at, thresholds, Family, S3Grids,
};
use crate::config::{ConfigError, DomainSpec, PotentialSpec};
use crate::field::{energy, Field};
use crate::flow::{
    dirichlet_positive_solve, gradient_flow, newton_solve, reflect_odd, FlowOpts, OddReflection,
};
use crate::geometry::{self, Grid};
use crate::io;
use crate::mountainpass::{initial_path, minmax_deform, MinMaxOpts};
use crate::potential::Potential;
use crate::rearrange::{polarization_sequence, symmetrize, SequenceMode};
use crate::rng::Rng;
use crate::spectral::{spectrum, SpectralOpts};

#[derive(Debug, thiserror::Error)]
pub enum DriverError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{failed} of {total} acceptance criteria failed")]
    CriteriaFailed { failed: usize, total: usize },
}

impl DriverError {
    /// Exit codes: 2 validation, 3 solver failure, 1 failed criteria.
    pub fn exit_code(&self) -> i32 {
        match self {
            DriverError::Config(_) => 2,
            DriverError::Solver(_) | DriverError::Io(_) => 3,
            DriverError::CriteriaFailed { .. } => 1,
        }
    }
}

impl From<ConfigError> for DriverError {
    fn from(e: ConfigError) -> Self {
        DriverError::Config(e.to_string())
    }
}

macro_rules! solver_err {
    ($t:ty) => {
        impl From<$t> for DriverError {
            fn from(e: $t) -> Self {
                DriverError::Solver(e.to_string())
            }
        }
    };
}
solver_err!(crate::flow::FlowError);
solver_err!(crate::spectral::SpectralError);
solver_err!(crate::bifurcation::BifurcationError);
solver_err!(crate::mountainpass::MpError);
solver_err!(crate::rearrange::RearrangeError);
solver_err!(crate::potential::PotentialError);
solver_err!(crate::geometry::GeometryError);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Flow,
    Mpass,
    Spectrum,
    Rearrange,
    Branch,
    Gap,
    Thresholds,
    Reproduce,
}

impl Command {
    pub fn parse(s: &str) -> Option<Command> {
        Some(match s {
            "solve" => Command::Solve,
            "flow" => Command::Flow,
            "mpass" => Command::Mpass,
            "spectrum" => Command::Spectrum,
            "rearrange" => Command::Rearrange,
            "branch" => Command::Branch,
            "gap" => Command::Gap,
            "thresholds" => Command::Thresholds,
            "reproduce" => Command::Reproduce,
            _ => return None,
        })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Flow => "flow",
            Command::Mpass => "mpass",
            Command::Spectrum => "spectrum",
            Command::Rearrange => "rearrange",
            Command::Branch => "branch",
            Command::Gap => "gap",
            Command::Thresholds => "thresholds",
            Command::Reproduce => "reproduce",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunSpec {
    pub command: Command,
    pub domain: DomainSpec,
    pub potential: PotentialSpec,
    pub seed: u64,
    pub tol: f64,
    pub dt0: Option<f64>,
    pub t_end: f64,
    /// Initial state: `constant:<v>`, `random:<lo>,<hi>`, `cosine:<amp>`.
    pub initial: String,
    pub barrier: Option<(f64, f64)>,
    pub m: usize,
    pub iters: usize,
    pub max_iter: usize,
    pub k: usize,
    pub k_max: usize,
    pub family: Option<Family>,
    pub eps_start: Option<f64>,
    pub eps_end: Option<f64>,
    pub steps: usize,
    pub eps_list: Vec<f64>,
    pub filter: String,
}

impl RunSpec {
    pub fn new(command: Command) -> RunSpec {
        RunSpec {
            command,
            domain: DomainSpec::SphereRadial { dim: 3, n: 400 },
            potential: PotentialSpec {
                name: "double_well".into(),
                eps: None,
                coeffs: None,
            },
            seed: 1,
            tol: 1e-10,
            dt0: None,
            t_end: 50.0,
            initial: "constant:0".into(),
            barrier: None,
            m: 33,
            iters: 6000,
            max_iter: 400_000,
            k: 12,
            k_max: 200,
            family: None,
            eps_start: None,
            eps_end: None,
            steps: 4,
            eps_list: Vec::new(),
            filter: String::new(),
        }
    }

    pub fn thresholds(n: usize) -> RunSpec {
        let mut s = RunSpec::new(Command::Thresholds);
        s.domain = DomainSpec::SphereRadial { dim: 3, n };
        s
    }

    pub fn flow_random(n: usize, seed: u64, dt0: f64, t_end: f64) -> RunSpec {
        let mut s = RunSpec::new(Command::Flow);
        s.domain = DomainSpec::SphereRadial { dim: 3, n };
        s.seed = seed;
        s.dt0 = Some(dt0);
        s.t_end = t_end;
        s.initial = "random:-0.9,0.9".into();
        s.barrier = Some((-1.0, 1.0));
        s.tol = 1e-9;
        s
    }

    pub fn rearrange(subdiv: usize, seed: u64, k_max: usize) -> RunSpec {
        let mut s = RunSpec::new(Command::Rearrange);
        s.domain = DomainSpec::TriSphere { subdiv };
        s.seed = seed;
        s.k_max = k_max;
        s
    }

    pub fn spectrum_zero(n: usize, eps: f64) -> RunSpec {
        let mut s = RunSpec::new(Command::Spectrum);
        s.domain = DomainSpec::SphereRadial { dim: 3, n };
        s.potential = PotentialSpec {
            name: "double_well".into(),
            eps: Some(eps),
            coeffs: None,
        };
        s.k = 12;
        s
    }

    fn inputs_json(&self) -> Value {
        json!({
            "command": self.command.label(),
            "domain": format!("{:?}", self.domain),
            "potential": format!("{:?}", self.potential),
            "seed": self.seed,
            "tol": self.tol,
            "dt0": self.dt0,
            "t_end": self.t_end,
            "initial": self.initial,
            "barrier": self.barrier,
            "m": self.m,
            "iters": self.iters,
            "max_iter": self.max_iter,
            "k": self.k,
            "k_max": self.k_max,
            "family": self.family.map(|f| f.label()),
            "eps_start": self.eps_start,
            "eps_end": self.eps_end,
            "steps": self.steps,
            "eps_list": self.eps_list,
            "filter": self.filter,
        })
    }
}

pub fn build_grid(spec: &DomainSpec) -> Result<Arc<Grid<f64>>, DriverError> {
    Ok(Arc::new(match *spec {
        DomainSpec::SphereRadial { dim, n } => geometry::sphere_radial(dim, n)?,
        DomainSpec::BallRadial {
            dim,
            radius,
            n,
            dirichlet,
            geodesic,
        } => geometry::ball_radial(
            dim,
            radius,
            n,
            if dirichlet {
                geometry::Bc::Dirichlet
            } else {
                geometry::Bc::Neumann
            },
            geodesic,
        )?,
        DomainSpec::Clifford { n } => geometry::clifford_reduced(n)?,
        DomainSpec::CliffordHalf { n } => geometry::clifford_half(n)?,
        DomainSpec::BiAxial { n_rho, n_phi } => geometry::biaxial(n_rho, n_phi)?,
        DomainSpec::BiAxialQuarter { n_rho, m_phi } => geometry::biaxial_quarter(n_rho, m_phi)?,
        DomainSpec::TriSphere { subdiv } => geometry::trisphere(subdiv)?,
        DomainSpec::Segment { dim, h, n } => geometry::spherical_segment(dim, h, n)?,
    }))
}

fn initial_field(
    spec: &RunSpec,
    grid: &Arc<Grid<f64>>,
    rng: &mut Rng,
) -> Result<Field<f64>, DriverError> {
    let (kind, rest) = spec
        .initial
        .split_once(':')
        .unwrap_or((spec.initial.as_str(), ""));
    match kind {
        "constant" => {
            let v: f64 = rest
                .parse()
                .map_err(|_| DriverError::Config(format!("bad constant initial '{rest}'")))?;
            Ok(Field::constant(grid, v))
        }
        "random" => {
            let (lo, hi) = rest
                .split_once(',')
                .and_then(|(a, b)| Some((a.parse::<f64>().ok()?, b.parse::<f64>().ok()?)))
                .ok_or_else(|| DriverError::Config(format!("bad random initial '{rest}'")))?;
            Ok(Field::random_in(grid, rng, lo, hi))
        }
        "cosine" => {
            let amp: f64 = rest
                .parse()
                .map_err(|_| DriverError::Config(format!("bad cosine initial '{rest}'")))?;
            Ok(Field::from_fn(grid, |c| amp * c[0].cos()))
        }
        other => Err(DriverError::Config(format!(
            "unknown initial state '{other}'"
        ))),
    }
}

fn require_eps(spec: &RunSpec) -> Result<f64, DriverError> {
    spec.potential
        .eps
        .ok_or_else(|| DriverError::Config("this command needs an Allen-Cahn eps".into()))
}

fn pot_of(spec: &RunSpec) -> Result<Potential<f64>, DriverError> {
    Ok(spec.potential.build::<f64>()?)
}

/// Execute a validated run, writing artifacts plus manifest.json into out_dir.
pub fn run_config(spec: &RunSpec, out_dir: &FsPath) -> Result<(), DriverError> {
    fs::create_dir_all(out_dir)?;
    let start = Instant::now();
    match spec.command {
        Command::Thresholds => {
            let grid = build_grid(&spec.domain)?;
            let base = Potential::double_well();
            let t = thresholds(&grid, &base)?;
            fs::write(
                out_dir.join("thresholds.json"),
                io::pretty(&io::thresholds_json(&t)),
            )?;
        }
        Command::Solve => {
            let eps = require_eps(spec)?;
            let pot = Potential::allen_cahn(eps);
            let u = match &spec.domain {
                DomainSpec::SphereRadial { .. } => {
                    let grid = build_grid(&spec.domain)?;
                    ground_state_at(&grid, eps, None)?.ok_or_else(|| {
                        DriverError::Solver(format!("no nonconstant solution at eps = {eps}"))
                    })?
                }
                DomainSpec::Clifford { n } => {
                    let full = build_grid(&spec.domain)?;
                    let half = Arc::new(geometry::clifford_half(n / 2)?);
                    let h = dirichlet_positive_solve(&half, &pot)?.ok_or_else(|| {
                        DriverError::Solver(format!("no torus solution at eps = {eps}"))
                    })?;
                    let glued = reflect_odd(&h, &full, OddReflection::CliffordMid, 1e-9)?;
                    newton_solve(&glued, &pot, spec.tol, 80)?
                }
                DomainSpec::BiAxial { n_rho, n_phi } => {
                    let full = build_grid(&spec.domain)?;
                    let quarter = Arc::new(geometry::biaxial_quarter(*n_rho, n_phi / 4)?);
                    let q = dirichlet_positive_solve(&quarter, &pot)?.ok_or_else(|| {
                        DriverError::Solver(format!("no cross-equators solution at eps = {eps}"))
                    })?;
                    reflect_odd(&q, &full, OddReflection::BiaxialAxes, 1e-9)?
                }
                _ => {
                    let grid = build_grid(&spec.domain)?;
                    if grid.is_dirichlet() {
                        match dirichlet_positive_solve(&grid, &pot)? {
                            Some(u) => u,
                            None => {
                                let summary = json!({"exists": false, "eps": eps});
                                fs::write(out_dir.join("solve.json"), io::pretty(&summary))?;
                                write_manifest(spec, out_dir, start)?;
                                return Ok(());
                            }
                        }
                    } else {
                        return Err(DriverError::Config(
                            "solve on this domain needs a Dirichlet boundary or a sphere".into(),
                        ));
                    }
                }
            };
            fs::write(out_dir.join("field.csv"), io::field_csv(&u))?;
            let rep = spectrum(
                &u,
                &pot,
                &SpectralOpts {
                    k: spec.k,
                    ..Default::default()
                },
            )?;
            fs::write(
                out_dir.join("spectrum.json"),
                io::pretty(&io::spectrum_json(&rep)),
            )?;
            fs::write(
                out_dir.join("energy.json"),
                io::pretty(&io::energy_json(&energy(&u, &pot))),
            )?;
        }
        Command::Flow => {
            let grid = build_grid(&spec.domain)?;
            let pot = pot_of(spec)?;
            let mut rng = Rng::new(spec.seed);
            let u0 = initial_field(spec, &grid, &mut rng)?;
            let opts = FlowOpts {
                dt0: spec.dt0.unwrap_or(0.05),
                t_end: spec.t_end,
                tol: spec.tol.max(1e-12),
                max_steps: spec.max_iter,
                barrier: spec.barrier,
            };
            let tr = gradient_flow(&u0, &pot, &opts)?;
            fs::write(out_dir.join("trace.csv"), io::flow_trace_csv(&tr))?;
            fs::write(out_dir.join("final.csv"), io::field_csv(&tr.final_field))?;
        }
        Command::Mpass => {
            let eps = require_eps(spec)?;
            let grid = build_grid(&spec.domain)?;
            let pot = Potential::allen_cahn(eps);
            let detour = Field::from_fn(&grid, |c| 0.9 * c[0].cos());
            let mut path = initial_path(-1.0, 1.0, Some(&detour), &grid, spec.m, &pot)?;
            let opts = MinMaxOpts {
                iters: spec.iters,
                tol: spec.tol.max(1e-8),
                dt0: spec.dt0.unwrap_or(0.04),
                ..Default::default()
            };
            let mm = minmax_deform(&mut path, &pot, &opts)?;
            let energies = path.energies(&pot);
            io::write_path(&out_dir.join("path"), &path, &energies)?;
            fs::write(
                out_dir.join("minmax.json"),
                io::pretty(&io::minmax_json(&mm)),
            )?;
            fs::write(out_dir.join("argmax.csv"), io::field_csv(&mm.argmax_field))?;
        }
        Command::Spectrum => {
            let grid = build_grid(&spec.domain)?;
            let pot = pot_of(spec)?;
            let mut rng = Rng::new(spec.seed);
            let u = initial_field(spec, &grid, &mut rng)?;
            let rep = spectrum(
                &u,
                &pot,
                &SpectralOpts {
                    k: spec.k,
                    seed: spec.seed,
                    ..Default::default()
                },
            )?;
            fs::write(
                out_dir.join("spectrum.json"),
                io::pretty(&io::spectrum_json(&rep)),
            )?;
        }
        Command::Rearrange => {
            let grid = build_grid(&spec.domain)?;
            let mut rng = Rng::new(spec.seed);
            let u = Field::random_in(&grid, &mut rng, -1.0, 1.0);
            let star = symmetrize(&u, 0)?;
            let mut srng = rng.fork(1);
            let trace =
                polarization_sequence(&u, 0, spec.k_max, &mut srng, SequenceMode::MeshPlanes)?;
            fs::write(out_dir.join("u.csv"), io::field_csv(&u))?;
            fs::write(out_dir.join("star.csv"), io::field_csv(&star))?;
            fs::write(
                out_dir.join("final.csv"),
                io::field_csv(trace.fields.last().unwrap()),
            )?;
            let report = json!({
                "initial_distance": trace.distances[0],
                "final_distance": trace.distances.last().unwrap(),
                "distances": trace.distances,
                "grad_norm_u": crate::rearrange::grad_norm(&u),
                "grad_norm_star": crate::rearrange::grad_norm(&star),
                "seed": spec.seed,
            });
            fs::write(out_dir.join("report.json"), io::pretty(&report))?;
        }
        Command::Branch => {
            let family = spec
                .family
                .ok_or_else(|| DriverError::Config("branch needs a family".into()))?;
            let (e0, e1) = match (spec.eps_start, spec.eps_end) {
                (Some(a), Some(b)) => (a, b),
                _ => {
                    return Err(DriverError::Config(
                        "branch needs eps_start and eps_end".into(),
                    ))
                }
            };
            let (n, n_rho, n_phi) = branch_grid_sizes(&spec.domain);
            let gs = S3Grids::build(n, n_rho, n_phi)?;
            let b = continue_branch(&gs, family, e0, e1, spec.steps)?;
            fs::write(out_dir.join("branch.csv"), io::branch_csv(&b))?;
            if let Some(thr) = b.detected_threshold {
                let v = json!({"family": family.label(), "detected_threshold": thr, "points": b.points.len()});
                fs::write(out_dir.join("branch.json"), io::pretty(&v))?;
            }
        }
        Command::Gap => {
            if spec.eps_list.is_empty() {
                return Err(DriverError::Config("gap needs eps_list".into()));
            }
            let (n, n_rho, n_phi) = branch_grid_sizes(&spec.domain);
            let gs = S3Grids::build(n, n_rho, n_phi)?;
            let mut branches = Vec::new();
            for family in [
                Family::Ground,
                Family::ConstantZero,
                Family::Clifford,
                Family::CrossEquators,
            ] {
                let mut pts = Vec::new();
                for &eps in &spec.eps_list {
                    let b = continue_branch(&gs, family, eps, eps, 1)?;
                    pts.extend(b.points);
                }
                branches.push(crate::bifurcation::Branch {
                    family,
                    points: pts,
                    detected_threshold: None,
                });
            }
            let table = gap_table(&branches, &spec.eps_list)?;
            fs::write(out_dir.join("gap.csv"), io::gap_csv(&table))?;
        }
        Command::Reproduce => {
            let results = acceptance::run(&spec.filter, spec.seed, out_dir);
            let mut lines = String::new();
            for r in &results {
                println!("{}", r.line());
                lines.push_str(&r.line());
                lines.push('\n');
            }
            let failed = results.iter().filter(|r| !r.passed).count();
            let summary = json!({
                "total": results.len(),
                "failed": failed,
                "criteria": results.iter().map(|r| json!({
                    "id": r.id, "name": r.name, "passed": r.passed,
                    "details": r.details, "seconds": r.seconds,
                })).collect::<Vec<_>>(),
            });
            fs::write(out_dir.join("acceptance.txt"), lines)?;
            fs::write(out_dir.join("acceptance.json"), io::pretty(&summary))?;
            write_manifest(spec, out_dir, start)?;
            if failed > 0 {
                return Err(DriverError::CriteriaFailed {
                    failed,
                    total: results.len(),
                });
            }
            return Ok(());
        }
    }
    write_manifest(spec, out_dir, start)?;
    Ok(())
}

fn branch_grid_sizes(domain: &DomainSpec) -> (usize, usize, usize) {
    match *domain {
        DomainSpec::SphereRadial { n, .. } => (n, 64, 96),
        DomainSpec::BiAxial { n_rho, n_phi } => (400, n_rho, n_phi),
        _ => (400, 64, 96),
    }
}

fn write_manifest(spec: &RunSpec, out_dir: &FsPath, start: Instant) -> Result<(), DriverError> {
    let manifest = json!({
        "inputs": spec.inputs_json(),
        "version": env!("CARGO_PKG_VERSION"),
        "seed": spec.seed,
        "elapsed_ms": start.elapsed().as_millis() as u64,
    });
    fs::write(out_dir.join("manifest.json"), io::pretty(&manifest))?;
    Ok(())
}

/// Build a RunSpec from a parsed config map (CLI flags are merged into the
/// map before this call).
pub fn spec_from_map(map: &crate::config::ConfigMap) -> Result<RunSpec, DriverError> {
    use crate::config::{get, get_f64, get_usize};
    let cmd_str = get(map, "run", "command")
        .ok_or_else(|| DriverError::Config("missing [run] command".into()))?;
    let command = Command::parse(cmd_str)
        .ok_or_else(|| DriverError::Config(format!("unknown command '{cmd_str}'")))?;
    let mut spec = RunSpec::new(command);
    spec.domain = DomainSpec::from_map(map)?;
    spec.potential = PotentialSpec::from_map(map)?;
    if let Some(seed) = get_usize(map, "run", "seed")? {
        spec.seed = seed as u64;
    }
    if let Some(v) = get_f64(map, "solver", "tol")? {
        spec.tol = v;
    }
    if let Some(v) = get_f64(map, "solver", "dt0")? {
        spec.dt0 = Some(v);
    }
    if let Some(v) = get_f64(map, "solver", "t_end")? {
        spec.t_end = v;
    }
    if let Some(v) = get(map, "solver", "initial") {
        spec.initial = v.to_string();
    }
    if let (Some(lo), Some(hi)) = (
        get_f64(map, "solver", "barrier_lo")?,
        get_f64(map, "solver", "barrier_hi")?,
    ) {
        spec.barrier = Some((lo, hi));
    }
    if let Some(v) = get_usize(map, "solver", "m")? {
        spec.m = v;
    }
    if let Some(v) = get_usize(map, "solver", "iters")? {
        spec.iters = v;
    }
    if let Some(v) = get_usize(map, "solver", "max_iter")? {
        spec.max_iter = v;
    }
    if let Some(v) = get_usize(map, "solver", "k")? {
        spec.k = v;
    }
    if let Some(v) = get_usize(map, "solver", "k_max")? {
        spec.k_max = v;
    }
    if let Some(v) = get(map, "branch", "family") {
        spec.family = Family::parse(v);
        if spec.family.is_none() {
            return Err(DriverError::Config(format!("unknown family '{v}'")));
        }
    }
    spec.eps_start = get_f64(map, "branch", "eps_start")?;
    spec.eps_end = get_f64(map, "branch", "eps_end")?;
    if let Some(v) = get_usize(map, "branch", "steps")? {
        spec.steps = v;
    }
    if let Some(list) = get(map, "gap", "eps_list") {
        let parsed: Result<Vec<f64>, _> = list.split(',').map(|t| t.trim().parse()).collect();
        spec.eps_list =
            parsed.map_err(|_| DriverError::Config(format!("bad eps_list '{list}'")))?;
    }
    if let Some(v) = get(map, "run", "filter") {
        spec.filter = v.to_string();
    }
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thresholds_run_writes_expected_values() {
        let dir = std::env::temp_dir().join("semilab_driver_thresholds");
        let _ = fs::remove_dir_all(&dir);
        run_config(&RunSpec::thresholds(300), &dir).unwrap();
        let text = fs::read_to_string(dir.join("thresholds.json")).unwrap();
        let v: Value = serde_json::from_str(&text).unwrap();
        let e1 = v["eps1"].as_f64().unwrap();
        let e2 = v["eps2"].as_f64().unwrap();
        assert!((e1 - 0.57735).abs() < 1e-3);
        assert!((e2 - 0.35355).abs() < 1e-3);
        assert!(dir.join("manifest.json").exists());
    }

    #[test]
    fn missing_eps_is_a_config_error() {
        let mut spec = RunSpec::new(Command::Solve);
        spec.domain = DomainSpec::SphereRadial { dim: 3, n: 64 };
        spec.potential.eps = None;
        let dir = std::env::temp_dir().join("semilab_driver_noeps");
        let err = run_config(&spec, &dir).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn spec_from_config_text() {
        let map = crate::config::parse(
            "[run]\ncommand = flow\nseed = 9\n[domain]\nkind = sphere3\nn = 64\n[solver]\ndt0 = 0.01\ninitial = constant:0.5\n",
        )
        .unwrap();
        let spec = spec_from_map(&map).unwrap();
        assert_eq!(spec.command, Command::Flow);
        assert_eq!(spec.seed, 9);
        assert_eq!(spec.dt0, Some(0.01));
    }
}
