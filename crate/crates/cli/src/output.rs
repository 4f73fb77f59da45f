use std::fs::File;
use std::path::Path;

use anyhow::{Context, Result};
use levyspec::{Backend, SolverConfig, SpectralResult};
use serde::Serialize;

use crate::config::RunConfig;

#[derive(Debug, Serialize)]
pub struct GridNote {
    pub a: f64,
    pub requested_dx: f64,
    pub dx: f64,
    pub n_points: usize,
    pub adjusted: bool,
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub program: &'static str,
    pub version: &'static str,
    pub config: &'a RunConfig,
    pub resolved: &'a SolverConfig,
    pub grid: GridNote,
    pub backend_used: Option<Backend>,
    pub threads: usize,
    pub iterations_used: usize,
    pub converged: &'a [bool],
    pub bound: Option<Vec<bool>>,
}

/// `energies.csv`, `eigenfunctions.csv`, `history.csv` and `manifest.json`.
pub fn write_run(
    dir: &Path,
    config: &RunConfig,
    solver: &SolverConfig,
    backend_used: Option<Backend>,
    result: &SpectralResult,
) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let bound = config
        .depth()
        .map(|v0| result.bound_flags(v0, solver.convergence_tol));

    let mut w = csv_writer(&dir.join("energies.csv"))?;
    let mut header = vec!["n", "energy", "converged"];
    if bound.is_some() {
        header.push("bound");
    }
    w.write_record(&header)?;
    for (i, (e, c)) in result.energies.iter().zip(&result.converged).enumerate() {
        let mut row = vec![(i + 1).to_string(), e.to_string(), c.to_string()];
        if let Some(b) = &bound {
            row.push(b[i].to_string());
        }
        w.write_record(&row)?;
    }
    w.flush()?;

    let grid = solver.grid;
    let mut w = csv_writer(&dir.join("eigenfunctions.csv"))?;
    let mut header = vec!["x".to_string()];
    header.extend((1..=result.eigenfunctions.len()).map(|i| format!("psi{i}")));
    w.write_record(&header)?;
    for (j, x) in grid.points().enumerate() {
        let mut row = vec![x.to_string()];
        row.extend(result.eigenfunctions.iter().map(|f| f.values()[j].to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;

    let mut w = csv_writer(&dir.join("history.csv"))?;
    w.write_record(energy_header("k", result.energies.len()))?;
    for k in 0..result.iterations_used {
        let mut row = vec![k.to_string()];
        row.extend(result.history.iter().map(|h| h[k].to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;

    let manifest = Manifest {
        program: "levyspec",
        version: env!("CARGO_PKG_VERSION"),
        config,
        resolved: solver,
        grid: GridNote {
            a: grid.half_width(),
            requested_dx: grid.requested_dx(),
            dx: grid.dx(),
            n_points: grid.len(),
            adjusted: grid.dx_adjusted(),
        },
        backend_used,
        threads: rayon::current_num_threads(),
        iterations_used: result.iterations_used,
        converged: &result.converged,
        bound,
    };
    let file = File::create(dir.join("manifest.json"))?;
    serde_json::to_writer_pretty(file, &manifest)?;
    Ok(())
}

pub fn energy_header(first: &str, n: usize) -> Vec<String> {
    let mut header = vec![first.to_string()];
    header.extend((1..=n).map(|i| format!("E{i}")));
    header
}

pub fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(csv::Writer::from_writer(file))
}
