//! Data artifacts: CSV and JSON writers with deterministic formatting
//! (identical config and seed produce byte-identical files).

use std::fmt::Write as _;
use std::fs;
use std::path::Path as FsPath;

use serde_json::{json, Map, Value};

use crate::bifurcation::{Branch, GapTable, Thresholds};
use crate::field::{EnergyReport, Field};
use crate::flow::FlowTrace;
use crate::geometry::Grid;
use crate::mountainpass::{MinMaxResult, Path};
use crate::scalar::Scalar;
use crate::spectral::SpectrumReport;

fn fmt<S: Scalar>(v: S) -> String {
    // shortest round-trip formatting of the f64 value: deterministic
    format!("{}", v.as_f64())
}

pub fn field_csv<S: Scalar>(u: &Field<S>) -> String {
    let dim = u.grid.domain.coords.first().map(|c| c.len()).unwrap_or(0);
    let mut out = String::from("node_index");
    for k in 0..dim {
        let _ = write!(out, ",coord_{k}");
    }
    out.push_str(",value\n");
    for i in 0..u.n() {
        let _ = write!(out, "{i}");
        for c in &u.grid.domain.coords[i] {
            let _ = write!(out, ",{}", fmt(*c));
        }
        let _ = writeln!(out, ",{}", fmt(u.values[i]));
    }
    out
}

pub fn energy_json<S: Scalar>(e: &EnergyReport<S>) -> Value {
    json!({
        "energy": e.energy.as_f64(),
        "dirichlet": e.dirichlet.as_f64(),
        "potential": e.potential.as_f64(),
        "grad_norm": e.grad_norm.as_f64(),
    })
}

pub fn spectrum_json<S: Scalar>(rep: &SpectrumReport<S>) -> Value {
    let mut m = Map::new();
    m.insert(
        "eigenvalues".into(),
        Value::Array(rep.eigenvalues.iter().map(|v| json!(v.as_f64())).collect()),
    );
    m.insert("morse_index".into(), json!(rep.morse_index));
    m.insert("nullity".into(), json!(rep.nullity));
    m.insert("zero_tol".into(), json!(rep.zero_tol.as_f64()));
    if let Some(modes) = &rep.modes {
        m.insert(
            "modes".into(),
            Value::Array(
                modes
                    .iter()
                    .map(|md| {
                        json!({
                            "ell": md.ell,
                            "angular_eigenvalue": md.angular_eigenvalue.as_f64(),
                            "multiplicity": md.multiplicity,
                            "radial_eigenvalues":
                                md.radial_eigenvalues.iter().map(|v| v.as_f64()).collect::<Vec<_>>(),
                        })
                    })
                    .collect(),
            ),
        );
    }
    Value::Object(m)
}

pub fn flow_trace_csv<S: Scalar>(trace: &FlowTrace<S>) -> String {
    let mut out = String::from("t,energy,residual_norm\n");
    for k in 0..trace.times.len() {
        let _ = writeln!(
            out,
            "{},{},{}",
            fmt(trace.times[k]),
            fmt(trace.energies[k]),
            fmt(trace.residuals[k])
        );
    }
    out
}

pub fn branch_csv<S: Scalar>(branch: &Branch<S>) -> String {
    let mut out = String::from(
        "epsilon,energy,index,nullity,sup_norm,symmetry_defect,nodal_defect,residual\n",
    );
    for p in &branch.points {
        let nodal = p.nodal_defect.map(|v| fmt(v)).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            fmt(p.eps),
            fmt(p.energy),
            p.morse_index,
            p.nullity,
            fmt(p.sup_norm),
            fmt(p.symmetry_defect),
            nodal,
            fmt(p.residual)
        );
    }
    out
}

pub fn gap_csv<S: Scalar>(table: &GapTable<S>) -> String {
    let mut out =
        String::from("epsilon,a,b_candidate,gap,a_family,b_family,degenerate,is_upper_bound\n");
    for r in &table.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            fmt(r.eps),
            fmt(r.a),
            r.b_candidate.map(|v| fmt(v)).unwrap_or_default(),
            r.gap.map(|v| fmt(v)).unwrap_or_default(),
            r.a_family.label(),
            r.b_family.map(|f| f.label()).unwrap_or(""),
            r.degenerate,
            r.is_upper_bound
        );
    }
    out
}

pub fn thresholds_json<S: Scalar>(t: &Thresholds<S>) -> Value {
    json!({
        "lambda1": t.lambda1.as_f64(),
        "lambda2": t.lambda2.as_f64(),
        "eps1": t.eps1.as_f64(),
        "eps2": t.eps2.as_f64(),
        "eps1_analytic": t.eps1_analytic.map(|v| v.as_f64()),
        "eps2_analytic": t.eps2_analytic.map(|v| v.as_f64()),
    })
}

pub fn minmax_json<S: Scalar>(r: &MinMaxResult<S>) -> Value {
    json!({
        "level": r.level.as_f64(),
        "residual_at_peak": r.residual_at_peak.as_f64(),
        "iterations": r.iterations,
        "index_two_flag": r.index_two_flag,
    })
}

/// Node/element text format: one node per line (coordinates + weight), one
/// element per line (node indices).
pub fn mesh_text<S: Scalar>(grid: &Grid<S>) -> String {
    let mut out = format!("# nodes {}\n", grid.n_nodes());
    for i in 0..grid.n_nodes() {
        for c in &grid.domain.coords[i] {
            let _ = write!(out, "{} ", fmt(*c));
        }
        let _ = writeln!(out, "{}", fmt(grid.domain.weights[i]));
    }
    let _ = writeln!(out, "# elements {}", grid.elements.len());
    for e in &grid.elements {
        let parts: Vec<String> = e.iter().map(|i| i.to_string()).collect();
        let _ = writeln!(out, "{}", parts.join(" "));
    }
    out
}

/// Path export: one CSV per sample plus a JSON manifest of parameters and
/// energies.
pub fn write_path<S: Scalar>(dir: &FsPath, path: &Path<S>, energies: &[S]) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    for (k, s) in path.samples.iter().enumerate() {
        fs::write(dir.join(format!("sample_{k:03}.csv")), field_csv(s))?;
    }
    let manifest = json!({
        "t": path.ts.iter().map(|t| t.as_f64()).collect::<Vec<_>>(),
        "energies": energies.iter().map(|e| e.as_f64()).collect::<Vec<_>>(),
        "endpoints": [path.endpoints.0.as_f64(), path.endpoints.1.as_f64()],
    });
    fs::write(dir.join("path_manifest.json"), pretty(&manifest))
}

pub fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json serialization");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::sphere_radial;
    use std::sync::Arc;

    #[test]
    fn csv_shapes() {
        let grid = Arc::new(sphere_radial::<f64>(2, 16).unwrap());
        let u = Field::constant(&grid, 0.5);
        let csv = field_csv(&u);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "node_index,coord_0,value");
        assert_eq!(csv.lines().count(), 18);
        let mesh = mesh_text(&grid);
        assert!(mesh.starts_with("# nodes 17\n"));
    }

    #[test]
    fn deterministic_formatting() {
        let grid = Arc::new(sphere_radial::<f64>(2, 16).unwrap());
        let u = Field::from_fn(&grid, |c| (c[0] * 3.7).sin());
        assert_eq!(field_csv(&u), field_csv(&u.clone()));
    }
}
