//! Imaginary-time block iteration with the Strang-split shift
//! `S(h) = exp(-hV/2) (1 - hT) exp(-hV/2)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, require_positive, Error, Result};
use crate::grid::{check_same, dot, trial_basis, Grid, GridFunction};
use crate::operators::{Backend, Hamiltonian, HamiltonianSpec, PotentialKind};

pub const DEFAULT_H: f64 = 0.001;
pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_WINDOW: usize = 100;
pub const DEFAULT_K_MAX_HARMONIC: usize = 2500;
pub const DEFAULT_K_MAX_WELL: usize = 5000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub hamiltonian: HamiltonianSpec,
    pub grid: Grid,
    pub h: f64,
    pub n_states: usize,
    pub k_max: usize,
    pub convergence_tol: f64,
    pub convergence_window: usize,
    #[serde(default)]
    pub backend: Backend,
}

impl SolverConfig {
    /// Defaults: `h = 0.001`, `tol = 1e-6`, `window = 100`, and
    /// `k_max = 5000` for wells, `2500` otherwise.
    pub fn new(hamiltonian: HamiltonianSpec, grid: Grid, n_states: usize) -> Self {
        let k_max = match hamiltonian.potential.kind() {
            PotentialKind::FiniteWell => DEFAULT_K_MAX_WELL,
            _ => DEFAULT_K_MAX_HARMONIC,
        };
        Self {
            hamiltonian,
            grid,
            h: DEFAULT_H,
            n_states,
            k_max,
            convergence_tol: DEFAULT_TOL,
            convergence_window: DEFAULT_WINDOW,
            backend: Backend::Auto,
        }
    }

    pub fn with_h(mut self, h: f64) -> Self {
        self.h = h;
        self
    }

    pub fn with_k_max(mut self, k_max: usize) -> Self {
        self.k_max = k_max;
        self
    }

    pub fn with_tolerance(mut self, tol: f64, window: usize) -> Self {
        self.convergence_tol = tol;
        self.convergence_window = window;
        self
    }

    pub fn with_backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.hamiltonian.validate()?;
        require_positive("h", self.h)?;
        require_positive("tol", self.convergence_tol)?;
        if self.n_states == 0 {
            return Err(invalid("n_states", "must be at least 1"));
        }
        if self.n_states > self.grid.len() {
            return Err(invalid("n_states", "exceeds the number of grid points"));
        }
        if self.convergence_window == 0 {
            return Err(invalid("window", "must be at least 1"));
        }
        if self.k_max < self.convergence_window {
            return Err(invalid(
                "k_max",
                format!(
                    "{} is smaller than the convergence window {}",
                    self.k_max, self.convergence_window
                ),
            ));
        }
        if self.grid.half_width() < 1.0 {
            return Err(Error::DomainTooSmall {
                a: self.grid.half_width(),
                required: 1.0,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralResult {
    /// Last recorded `E_i^{(k)}`, in trial-label order.
    pub energies: Vec<f64>,
    /// Orthonormal set after the last iteration.
    pub eigenfunctions: Vec<GridFunction>,
    /// `history[i][k] = E_i^{(k)}`.
    pub history: Vec<Vec<f64>>,
    pub converged: Vec<bool>,
    pub iterations_used: usize,
}

impl SpectralResult {
    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|&c| c)
    }

    /// A state is bound when it converged below `V0 - 10 tol`.
    pub fn bound_flags(&self, depth: f64, tol: f64) -> Vec<bool> {
        self.energies
            .iter()
            .zip(&self.converged)
            .map(|(&e, &c)| c && e < depth - 10.0 * tol)
            .collect()
    }

    pub fn bound_count(&self, depth: f64, tol: f64) -> usize {
        self.bound_flags(depth, tol).iter().filter(|&&b| b).count()
    }
}

/// `exp(-hV/2) (1 - hT) exp(-hV/2) f`.
pub fn strang_shift(ham: &Hamiltonian, h: f64, f: &GridFunction) -> Result<GridFunction> {
    require_positive("h", h)?;
    check_same(ham.grid(), f.grid())?;
    let half = half_step(ham, h);
    let mut out = vec![0.0; f.values().len()];
    let mut work = vec![0.0; f.values().len()];
    shift_into(ham, h, &half, f.values(), &mut work, &mut out);
    Ok(GridFunction::from_raw(*ham.grid(), out))
}

fn half_step(ham: &Hamiltonian, h: f64) -> Vec<f64> {
    ham.potential().iter().map(|v| (-0.5 * h * v).exp()).collect()
}

fn shift_into(
    ham: &Hamiltonian,
    h: f64,
    half: &[f64],
    f: &[f64],
    g: &mut [f64],
    out: &mut [f64],
) {
    for ((gi, &fi), &e) in g.iter_mut().zip(f).zip(half) {
        *gi = e * fi;
    }
    ham.kinetic_slice(g, out);
    for ((o, &gi), &e) in out.iter_mut().zip(g.iter()).zip(half) {
        *o = e * (gi - h * *o);
    }
}

/// `-ln <phi, S phi> / h`.
pub fn energy_estimate(phi: &GridFunction, s_phi: &GridFunction, h: f64) -> Result<f64> {
    require_positive("h", h)?;
    check_same(phi.grid(), s_phi.grid())?;
    let e = dot(phi.values(), s_phi.values(), phi.grid().dx());
    energy_from_expectation(e, h).ok_or(Error::SpectralBreakdown {
        state: 0,
        iteration: 0,
        value: e,
    })
}

fn energy_from_expectation(e: f64, h: f64) -> Option<f64> {
    (e > 0.0 && e.is_finite()).then(|| -e.ln() / h)
}

/// Modified Gram-Schmidt with a second pass for vectors that lost more than
/// half their norm.
pub fn gram_schmidt(vs: &[GridFunction]) -> Result<Vec<GridFunction>> {
    let Some(first) = vs.first() else {
        return Ok(Vec::new());
    };
    let grid = *first.grid();
    for v in vs {
        check_same(&grid, v.grid())?;
    }
    let mut raw: Vec<Vec<f64>> = vs.iter().map(|v| v.values().to_vec()).collect();
    orthonormalize(&mut raw, grid.dx())?;
    Ok(raw
        .into_iter()
        .map(|v| GridFunction::from_raw(grid, v))
        .collect())
}

fn orthonormalize(vs: &mut [Vec<f64>], dx: f64) -> Result<()> {
    for i in 0..vs.len() {
        let (done, rest) = vs.split_at_mut(i);
        let v = &mut rest[0];
        let original = dot(v, v, dx).sqrt();
        if !(original > 0.0) || !original.is_finite() {
            return Err(Error::RankDeficient { index: i });
        }
        let mut norm = original;
        for pass in 0..2 {
            for q in done.iter() {
                let c = dot(q, v, dx);
                for (x, &y) in v.iter_mut().zip(q) {
                    *x -= c * y;
                }
            }
            let before = norm;
            norm = dot(v, v, dx).sqrt();
            if pass == 1 || norm >= 0.5 * before {
                break;
            }
        }
        if !(norm > 1e-12 * original) {
            return Err(Error::RankDeficient { index: i });
        }
        let s = 1.0 / norm;
        v.iter_mut().for_each(|x| *x *= s);
    }
    Ok(())
}

/// `flag_i` is true when the last `window` steps of `history[i]` stay within
/// `tol` of the value `window` steps back.
pub fn convergence_check(history: &[Vec<f64>], tol: f64, window: usize) -> Vec<bool> {
    history
        .iter()
        .map(|h| {
            if window == 0 || h.len() <= window {
                return false;
            }
            let base = h[h.len() - 1 - window];
            h[h.len() - window..]
                .iter()
                .all(|e| (e - base).abs() < tol)
        })
        .collect()
}

pub fn run_spectrum(config: &SolverConfig) -> Result<SpectralResult> {
    run_spectrum_with(config, |_, _| {})
}

/// As [`run_spectrum`], calling `observer(k, energies)` after each iteration.
pub fn run_spectrum_with(
    config: &SolverConfig,
    mut observer: impl FnMut(usize, &[f64]),
) -> Result<SpectralResult> {
    config.validate()?;
    let grid = config.grid;
    let ham = Hamiltonian::new(&config.hamiltonian, &grid, config.backend)?;
    let h = config.h;
    let dx = grid.dx();
    let n = config.n_states;
    let half = half_step(&ham, h);

    let mut phi: Vec<Vec<f64>> = trial_basis(n, &grid)?
        .into_iter()
        .map(GridFunction::into_values)
        .collect();
    let mut psi = vec![vec![0.0; grid.len()]; n];
    let mut work = vec![vec![0.0; grid.len()]; n];
    let mut history: Vec<Vec<f64>> = vec![Vec::with_capacity(config.k_max); n];
    let mut energies = vec![0.0; n];
    let mut iterations = 0;

    for k in 0..config.k_max {
        let expectations: Vec<f64> = phi
            .par_iter()
            .zip(psi.par_iter_mut())
            .zip(work.par_iter_mut())
            .map(|((p, s), w)| {
                shift_into(&ham, h, &half, p, w, s);
                dot(p, s, dx)
            })
            .collect();
        for (i, &e) in expectations.iter().enumerate() {
            energies[i] = energy_from_expectation(e, h).ok_or(Error::SpectralBreakdown {
                state: i,
                iteration: k,
                value: e,
            })?;
            history[i].push(energies[i]);
        }
        observer(k, &energies);
        orthonormalize(&mut psi, dx)?;
        std::mem::swap(&mut phi, &mut psi);
        iterations = k + 1;
        if convergence_check(&history, config.convergence_tol, config.convergence_window)
            .iter()
            .all(|&c| c)
        {
            break;
        }
    }

    let converged = convergence_check(&history, config.convergence_tol, config.convergence_window);
    Ok(SpectralResult {
        energies,
        eigenfunctions: phi
            .into_iter()
            .map(|v| GridFunction::from_raw(grid, v))
            .collect(),
        history,
        converged,
        iterations_used: iterations,
    })
}
