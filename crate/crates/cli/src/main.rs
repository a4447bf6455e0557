//! semilab: compute ground states, min-max levels, spectra, rearrangements
//! and bifurcation branches of semilinear elliptic equations on spheres.
//!
//! Flags override keys from an optional `--config` file; every run writes a
//! manifest.json (inputs, seed, version, timing) next to its artifacts.
//! Exit codes: 0 success, 1 failed acceptance criteria, 2 invalid
//! configuration, 3 solver failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use semilab::config::ConfigMap;
use semilab::driver::{run_config, spec_from_map, DriverError};

#[derive(Parser)]
#[command(name = "semilab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Default)]
struct Common {
    /// Flat key-value config file with [section] headers; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default: out/<command>).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master RNG seed recorded in every manifest.
    #[arg(long)]
    seed: Option<u64>,
    /// Domain kind: sphere3, sphere2, ball, clifford, clifford-half,
    /// biaxial, biaxial-quarter, trisphere.
    #[arg(long)]
    domain: Option<String>,
    /// Radial grid cells (spheres, balls, clifford).
    #[arg(long)]
    n: Option<usize>,
    /// Icosphere subdivision level (trisphere).
    #[arg(long)]
    subdiv: Option<usize>,
    #[arg(long)]
    n_rho: Option<usize>,
    #[arg(long)]
    n_phi: Option<usize>,
    /// Allen-Cahn epsilon.
    #[arg(long)]
    eps: Option<f64>,
    /// Potential name: double_well, neg_quadratic, neg_quadratic_bump,
    /// quartic_decay, zero (or use --coeffs).
    #[arg(long)]
    potential: Option<String>,
    /// Polynomial coefficients c0,c1,c2,...
    #[arg(long)]
    coeffs: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    dt0: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    /// Initial state: constant:<v>, random:<lo>,<hi>, cosine:<amp>.
    #[arg(long)]
    initial: Option<String>,
    /// Flow barrier as lo,hi (stationary constants).
    #[arg(long, allow_hyphen_values = true)]
    barrier: Option<String>,
    /// Path sample count (mpass).
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    iters: Option<usize>,
    /// Newton / flow step budget.
    #[arg(long)]
    max_iter: Option<usize>,
    /// Number of eigenpairs (spectrum / solve reports).
    #[arg(long)]
    k: Option<usize>,
    /// Polarization sequence length (rearrange).
    #[arg(long)]
    k_max: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve for the distinguished solution on the chosen domain.
    Solve(Common),
    /// Run the semi-implicit gradient flow from an initial state.
    Flow(Common),
    /// Mountain-pass deformation between the stable constants.
    Mpass(Common),
    /// Spectrum of the linearized operator at an initial state.
    Spectrum(Common),
    /// Symmetrization and polarization experiment on the triangulated sphere.
    Rearrange(Common),
    /// Continue a solution family over an epsilon range.
    Branch {
        #[command(flatten)]
        common: Common,
        /// ground, clifford, cross_equators or constant_zero.
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        eps_start: Option<f64>,
        #[arg(long)]
        eps_end: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// First/second critical level table over a list of epsilons.
    Gap {
        #[command(flatten)]
        common: Common,
        /// Comma-separated epsilon values.
        #[arg(long)]
        eps_list: Option<String>,
    },
    /// Bifurcation thresholds eps_1, eps_2 of the domain.
    Thresholds(Common),
    /// Run the acceptance suite and write a pass/fail table.
    Reproduce {
        #[command(flatten)]
        common: Common,
        /// Run only criteria whose name (or id) matches.
        #[arg(long)]
        filter: Option<String>,
    },
}

fn set(map: &mut ConfigMap, section: &str, key: &str, value: String) {
    map.entry(section.to_string())
        .or_default()
        .insert(key.to_string(), value);
}

fn merge_common(map: &mut ConfigMap, c: &Common) -> Result<(), String> {
    if let Some(seed) = c.seed {
        set(map, "run", "seed", seed.to_string());
    }
    if let Some(d) = &c.domain {
        set(map, "domain", "kind", d.clone());
    }
    if let Some(n) = c.n {
        set(map, "domain", "n", n.to_string());
    }
    if let Some(s) = c.subdiv {
        set(map, "domain", "kind", "trisphere".into());
        set(map, "domain", "subdiv", s.to_string());
    }
    if let Some(v) = c.n_rho {
        set(map, "domain", "n_rho", v.to_string());
    }
    if let Some(v) = c.n_phi {
        set(map, "domain", "n_phi", v.to_string());
    }
    if let Some(p) = &c.potential {
        set(map, "potential", "name", p.clone());
    }
    if let Some(e) = c.eps {
        set(map, "potential", "eps", e.to_string());
    }
    if let Some(cc) = &c.coeffs {
        set(map, "potential", "coeffs", cc.clone());
    }
    if let Some(v) = c.tol {
        set(map, "solver", "tol", v.to_string());
    }
    if let Some(v) = c.dt0 {
        set(map, "solver", "dt0", v.to_string());
    }
    if let Some(v) = c.t_end {
        set(map, "solver", "t_end", v.to_string());
    }
    if let Some(v) = &c.initial {
        set(map, "solver", "initial", v.clone());
    }
    if let Some(b) = &c.barrier {
        let (lo, hi) = b
            .split_once(',')
            .ok_or_else(|| format!("bad --barrier '{b}', expected lo,hi"))?;
        set(map, "solver", "barrier_lo", lo.trim().to_string());
        set(map, "solver", "barrier_hi", hi.trim().to_string());
    }
    if let Some(v) = c.m {
        set(map, "solver", "m", v.to_string());
    }
    if let Some(v) = c.iters {
        set(map, "solver", "iters", v.to_string());
    }
    if let Some(v) = c.max_iter {
        set(map, "solver", "max_iter", v.to_string());
    }
    if let Some(v) = c.k {
        set(map, "solver", "k", v.to_string());
    }
    if let Some(v) = c.k_max {
        set(map, "solver", "k_max", v.to_string());
    }
    Ok(())
}

fn execute() -> Result<(), DriverError> {
    let cli = Cli::parse();
    let (name, common, extra): (&str, &Common, Vec<(&str, &str, String)>) = match &cli.command {
        Cmd::Solve(c) => ("solve", c, vec![]),
        Cmd::Flow(c) => ("flow", c, vec![]),
        Cmd::Mpass(c) => ("mpass", c, vec![]),
        Cmd::Spectrum(c) => ("spectrum", c, vec![]),
        Cmd::Rearrange(c) => ("rearrange", c, vec![]),
        Cmd::Thresholds(c) => ("thresholds", c, vec![]),
        Cmd::Branch {
            common,
            family,
            eps_start,
            eps_end,
            steps,
        } => {
            let mut extra = Vec::new();
            if let Some(f) = family {
                extra.push(("branch", "family", f.clone()));
            }
            if let Some(v) = eps_start {
                extra.push(("branch", "eps_start", v.to_string()));
            }
            if let Some(v) = eps_end {
                extra.push(("branch", "eps_end", v.to_string()));
            }
            if let Some(v) = steps {
                extra.push(("branch", "steps", v.to_string()));
            }
            ("branch", common, extra)
        }
        Cmd::Gap { common, eps_list } => {
            let mut extra = Vec::new();
            if let Some(v) = eps_list {
                extra.push(("gap", "eps_list", v.clone()));
            }
            ("gap", common, extra)
        }
        Cmd::Reproduce { common, filter } => {
            let mut extra = Vec::new();
            if let Some(f) = filter {
                extra.push(("run", "filter", f.clone()));
            }
            ("reproduce", common, extra)
        }
    };

    let mut map: ConfigMap = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| DriverError::Config(format!("cannot read config: {e}")))?;
            semilab::config::parse(&text).map_err(|e| DriverError::Config(e.to_string()))?
        }
        None => ConfigMap::new(),
    };
    set(&mut map, "run", "command", name.to_string());
    merge_common(&mut map, common).map_err(DriverError::Config)?;
    for (s, k, v) in extra {
        set(&mut map, s, k, v);
    }

    let spec = spec_from_map(&map)?;
    let out = common
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("out").join(name));
    run_config(&spec, &out)?;
    println!("wrote artifacts to {}", out.display());
    Ok(())
}

fn main() -> ExitCode {
    match execute() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("semilab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
