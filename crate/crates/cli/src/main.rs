mod config;
mod output;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use levyspec::analysis::{
    bound_state_count, fit_line, fit_power, operator_limit_report, oscillator_label_from_intercept,
    scaled_reduced_compton, well_unit_scales_with, CauchyReferenceTable, OscillatorScaling,
    HBAR_C_EV_M,
};
use levyspec::oracle::{assemble_dense, dense_eigensolve};
use levyspec::{
    run_spectrum_with, tabulate_kernel, Backend, Exterior, Grid, GridFunction, Hamiltonian,
    KernelSpec, NonlocalOperator, SolverConfig, SpectralResult,
};
use rayon::prelude::*;
use serde::Serialize;

use config::RunConfig;

/// Environment variable overriding the worker count.
const THREADS_VAR: &str = "LEVYSPEC_THREADS";

#[derive(Parser)]
#[command(name = "levyspec", version, about = "Spectra of nonlocal Schrodinger operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration and write its outputs.
    Solve {
        config: PathBuf,
        #[arg(short, long, default_value = "out")]
        out: PathBuf,
        /// Stream `k,E1,..,En` rows to stdout.
        #[arg(long)]
        progress: bool,
    },
    /// Run a configuration for several values of one parameter.
    Sweep {
        config: PathBuf,
        /// One of mass, V0, a, dx, h, tol, n_states, k_max, window.
        #[arg(long)]
        param: String,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(short, long, default_value = "sweep")]
        out: PathBuf,
    },
    /// Fits, counts and reference tables.
    #[command(subcommand)]
    Analyze(Analyze),
    /// Conversion to physical units.
    #[command(subcommand)]
    Units(Units),
    /// Compare the propagator with dense diagonalization on a small grid.
    OracleCompare { config: PathBuf },
    /// Time the convolution backends.
    Bench(Bench),
}

#[derive(Subcommand)]
enum Analyze {
    /// Least-squares line through columns `x`, `y` of a CSV file.
    LineFit {
        input: PathBuf,
        #[arg(long, default_value = "x")]
        x: String,
        #[arg(long, default_value = "y")]
        y: String,
    },
    /// Fit `E = c n^beta` to columns `n`, `E` of a CSV file.
    PowerFit {
        input: PathBuf,
        #[arg(long, default_value = "n")]
        n: String,
        #[arg(long, default_value = "E")]
        e: String,
    },
    /// Smallest bound-state count allowed for a nonrelativistic well.
    Count {
        #[arg(long)]
        mass: f64,
        #[arg(long = "V0")]
        v0: f64,
    },
    /// Distance of `T_m g` from its massless and nonrelativistic limits for a Gaussian `g`.
    Limits {
        #[arg(long, value_delimiter = ',', required = true)]
        masses: Vec<f64>,
        #[arg(long, default_value_t = 10.0)]
        a: f64,
        #[arg(long, default_value_t = 0.001)]
        dx: f64,
        #[arg(long, value_enum, default_value = "regional")]
        exterior: ExteriorArg,
    },
    /// Exact and asymptotic Cauchy oscillator levels.
    Reference,
}

#[derive(Subcommand)]
enum Units {
    /// Energy unit `hbar c / b` of a well of half-width `b` meters.
    Well {
        #[arg(long)]
        b: f64,
        /// Reduced Compton wavelength in meters.
        #[arg(long)]
        compton: Option<f64>,
        /// Use the electron value scaled by this mass ratio instead.
        #[arg(long, conflicts_with = "compton")]
        lighter_by: Option<f64>,
        #[arg(long, default_value_t = HBAR_C_EV_M)]
        hbar_c: f64,
        /// Dimensionless energies to convert.
        #[arg(long, value_delimiter = ',')]
        energy: Vec<f64>,
    },
    /// Scales of the oscillator with spring constant `k` in eV/m^2.
    Oscillator {
        #[arg(long)]
        k: f64,
        #[arg(long, default_value_t = HBAR_C_EV_M)]
        hbar_c: f64,
        #[arg(long, value_delimiter = ',')]
        energy: Vec<f64>,
    },
}

#[derive(Args)]
struct Bench {
    #[arg(long, default_value_t = 100_001)]
    n: usize,
    /// Kernel mass; 0 is Cauchy.
    #[arg(long, default_value_t = 0.0)]
    mass: f64,
    #[arg(long, default_value_t = 0.001)]
    dx: f64,
    #[arg(long, default_value_t = 3)]
    repeats: usize,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum ExteriorArg {
    Regional,
    ZeroExtended,
}

impl From<ExteriorArg> for Exterior {
    fn from(e: ExteriorArg) -> Self {
        match e {
            ExteriorArg::Regional => Exterior::Regional,
            ExteriorArg::ZeroExtended => Exterior::ZeroExtended,
        }
    }
}

/// Exit statuses.
const OK: u8 = 0;
const CONFIG_ERROR: u8 = 1;
const UNCONVERGED: u8 = 2;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { CONFIG_ERROR } else { OK });
        }
    };
    if let Err(e) = init_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(CONFIG_ERROR);
    }
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(CONFIG_ERROR)
        }
    }
}

fn init_threads() -> Result<()> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .with_context(|| format!("{THREADS_VAR} must be a positive integer, got {value:?}"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn run(command: Command) -> Result<u8> {
    match command {
        Command::Solve {
            config,
            out,
            progress,
        } => solve(&config, &out, progress),
        Command::Sweep {
            config,
            param,
            values,
            out,
        } => sweep(&config, &param, &values, &out),
        Command::Analyze(a) => analyze(a).map(|_| OK),
        Command::Units(u) => units(u).map(|_| OK),
        Command::OracleCompare { config } => oracle_compare(&config),
        Command::Bench(b) => bench(b).map(|_| OK),
    }
}

fn execute(
    config: &RunConfig,
    observer: impl FnMut(usize, &[f64]),
) -> Result<(SolverConfig, Option<Backend>, SpectralResult)> {
    let solver = config.solver()?;
    let backend_used = Hamiltonian::new(&solver.hamiltonian, &solver.grid, solver.backend)?.backend();
    let result = run_spectrum_with(&solver, observer)?;
    Ok((solver, backend_used, result))
}

fn solve(path: &Path, out: &Path, progress: bool) -> Result<u8> {
    let config = RunConfig::load(path)?;
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    let mut write_err = None;
    if progress {
        writeln!(lock, "{}", output::energy_header("k", config.n_states).join(","))?;
    }
    let (solver, backend, result) = execute(&config, |k, energies| {
        if progress && write_err.is_none() {
            let mut line = k.to_string();
            for e in energies {
                line.push(',');
                line.push_str(&e.to_string());
            }
            if let Err(e) = writeln!(lock, "{line}") {
                write_err = Some(e);
            }
        }
    })?;
    if let Some(e) = write_err {
        return Err(e.into());
    }
    drop(lock);
    output::write_run(out, &config, &solver, backend, &result)?;
    if !progress {
        for (i, (e, c)) in result.energies.iter().zip(&result.converged).enumerate() {
            let note = if *c { "" } else { " (not converged)" };
            println!("E{} = {e}{note}", i + 1);
        }
    }
    Ok(if result.all_converged() { OK } else { UNCONVERGED })
}

fn sweep(path: &Path, param: &str, values: &[f64], out: &Path) -> Result<u8> {
    let base = RunConfig::load(path)?;
    let configs: Vec<RunConfig> = values
        .iter()
        .map(|&v| base.with_param(param, v))
        .collect::<Result<_>>()?;
    for c in &configs {
        c.solver()?;
    }
    let results: Vec<_> = configs
        .par_iter()
        .map(|c| execute(c, |_, _| {}))
        .collect::<Result<_>>()?;

    std::fs::create_dir_all(out)?;
    let n = base.n_states;
    let mut w = output::csv_writer(&out.join("sweep.csv"))?;
    let mut header = output::energy_header(param, n);
    header.push("all_converged".into());
    w.write_record(&header)?;
    let mut all = true;
    for (i, ((config, (solver, backend, result)), v)) in
        configs.iter().zip(&results).zip(values).enumerate()
    {
        output::write_run(&out.join(format!("run_{i:03}")), config, solver, *backend, result)?;
        let mut row = vec![v.to_string()];
        row.extend(result.energies.iter().map(f64::to_string));
        row.push(result.all_converged().to_string());
        w.write_record(&row)?;
        all &= result.all_converged();
    }
    w.flush()?;
    Ok(if all { OK } else { UNCONVERGED })
}

fn read_columns(path: &Path, x: &str, y: &str) -> Result<Vec<(f64, f64)>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let headers = r.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .with_context(|| format!("no column `{name}` in {}", path.display()))
    };
    let (ix, iy) = (find(x)?, find(y)?);
    let mut points = Vec::new();
    for (row, record) in r.records().enumerate() {
        let record = record?;
        let parse = |i: usize| -> Result<f64> {
            let s = record.get(i).unwrap_or("").trim();
            s.parse()
                .with_context(|| format!("row {}: cannot parse {s:?}", row + 2))
        };
        points.push((parse(ix)?, parse(iy)?));
    }
    Ok(points)
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn analyze(a: Analyze) -> Result<()> {
    match a {
        Analyze::LineFit { input, x, y } => {
            #[derive(Serialize)]
            struct Out {
                #[serde(flatten)]
                fit: levyspec::analysis::FitResult,
                /// `n` recovered from `intercept = ln(2n - 1)`.
                oscillator_label: f64,
            }
            let fit = fit_line(&read_columns(&input, &x, &y)?)?;
            print_json(&Out {
                fit,
                oscillator_label: oscillator_label_from_intercept(fit.intercept),
            })
        }
        Analyze::PowerFit { input, n, e } => print_json(&fit_power(&read_columns(&input, &n, &e)?)?),
        Analyze::Count { mass, v0 } => {
            println!("{}", bound_state_count(mass, v0)?);
            Ok(())
        }
        Analyze::Limits {
            masses,
            a,
            dx,
            exterior,
        } => {
            let grid = Grid::new(a, dx)?;
            let g = GridFunction::from_fn(grid, |x| (-x * x / 2.0).exp())?;
            let rows = operator_limit_report(&masses, &g, exterior.into())?;
            let mut w = csv::Writer::from_writer(std::io::stdout());
            w.write_record(["mass", "r_nr", "r_ur"])?;
            for row in rows {
                w.write_record([
                    row.mass.to_string(),
                    row.r_nr.map_or(String::new(), |v| v.to_string()),
                    row.r_ur.to_string(),
                ])?;
            }
            w.flush()?;
            Ok(())
        }
        Analyze::Reference => Ok(CauchyReferenceTable::write_csv(std::io::stdout())?),
    }
}

fn units(u: Units) -> Result<()> {
    match u {
        Units::Well {
            b,
            compton,
            lighter_by,
            hbar_c,
            energy,
        } => {
            let compton = match lighter_by {
                Some(ratio) => Some(scaled_reduced_compton(
                    levyspec::analysis::ELECTRON_REDUCED_COMPTON_M,
                    ratio,
                )?),
                None => compton,
            };
            let s = well_unit_scales_with(b, compton, hbar_c)?;
            #[derive(Serialize)]
            struct Out {
                #[serde(flatten)]
                scales: levyspec::analysis::UnitScales,
                energies_ev: Vec<f64>,
            }
            print_json(&Out {
                scales: s,
                energies_ev: energy.iter().map(|&e| s.energy_to_physical(e)).collect(),
            })
        }
        Units::Oscillator { k, hbar_c, energy } => {
            let s = OscillatorScaling::new(k, hbar_c)?;
            #[derive(Serialize)]
            struct Out {
                hbar_c: f64,
                k: f64,
                inverse_length: f64,
                energy_unit: f64,
                energies_ev: Vec<f64>,
            }
            print_json(&Out {
                hbar_c,
                k,
                inverse_length: s.inverse_length(),
                energy_unit: s.energy_unit(),
                energies_ev: energy.iter().map(|&e| s.energy_to_physical(e)).collect(),
            })
        }
    }
}

fn oracle_compare(path: &Path) -> Result<u8> {
    let config = RunConfig::load(path)?;
    let (solver, _, result) = execute(&config, |_, _| {})?;
    let dense = dense_eigensolve(
        &assemble_dense(&solver.hamiltonian, &solver.grid)?,
        solver.n_states,
    )?;
    let mut w = csv::Writer::from_writer(std::io::stdout());
    w.write_record(["n", "propagator", "dense", "difference", "allowed", "within"])?;
    let mut all = true;
    for (i, (p, d)) in result.energies.iter().zip(&dense.values).enumerate() {
        let allowed = f64::max(1e-2, 5.0 * solver.h * d * d);
        let diff = (p - d).abs();
        all &= diff <= allowed;
        w.write_record([
            (i + 1).to_string(),
            p.to_string(),
            d.to_string(),
            diff.to_string(),
            allowed.to_string(),
            (diff <= allowed).to_string(),
        ])?;
    }
    w.flush()?;
    if !all {
        eprintln!("propagator and dense spectra disagree beyond the allowed gap");
    }
    Ok(if result.all_converged() && all {
        OK
    } else {
        UNCONVERGED
    })
}

fn bench(b: Bench) -> Result<()> {
    if b.n < 3 || b.n % 2 == 0 {
        bail!("--n must be odd and at least 3");
    }
    if b.repeats == 0 {
        bail!("--repeats must be positive");
    }
    let grid = Grid::new((b.n - 1) as f64 / 2.0 * b.dx, b.dx)?;
    let table = tabulate_kernel(&KernelSpec::with_mass(b.mass)?, &grid)?;
    let f = GridFunction::from_fn(grid, |x| (x * 1.3).sin() * (-x * x / 50.0).exp())?;
    let mut w = csv::Writer::from_writer(std::io::stdout());
    w.write_record(["backend", "n", "offsets", "seconds_per_apply"])?;
    for backend in [Backend::Direct, Backend::Transform, Backend::Auto] {
        let op = NonlocalOperator::new(&table, Exterior::Regional, backend);
        op.apply(&f)?;
        let start = Instant::now();
        for _ in 0..b.repeats {
            std::hint::black_box(op.apply(&f)?);
        }
        let per = start.elapsed().as_secs_f64() / b.repeats as f64;
        let name = match backend {
            Backend::Auto => format!("auto({})", op.backend()),
            other => other.to_string(),
        };
        w.write_record([
            name,
            grid.len().to_string(),
            table.weights().len().to_string(),
            per.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
