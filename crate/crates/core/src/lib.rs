//! Bound states of nonlocal Schrödinger operators `H = T + V` on a line.
//!
//! The kinetic term is the Cauchy operator `|d/dx|`, the quasirelativistic
//! `sqrt(-d^2/dx^2 + m^2) - m`, or `-d^2/dx^2 / 2m`; the potential is `x^2` or
//! a finite well on `|x| < 1`. Spectra come from imaginary-time block
//! iteration with `S(h) = exp(-hV/2) (1 - hT) exp(-hV/2)` and Gram-Schmidt
//! after every step. A dense eigensolver on small grids serves as an
//! independent check.
//!
//! ```no_run
//! use levyspec::{Grid, HamiltonianSpec, KernelSpec, Kinetic, PotentialSpec, SolverConfig};
//!
//! let grid = Grid::new(20.0, 0.001)?;
//! let kinetic = Kinetic::Nonlocal(KernelSpec::quasirelativistic(1.0)?);
//! let ham = HamiltonianSpec::new(kinetic, PotentialSpec::harmonic());
//! let result = levyspec::run_spectrum(&SolverConfig::new(ham, grid, 2))?;
//! println!("{:?}", result.energies);
//! # Ok::<(), levyspec::Error>(())
//! ```

pub mod analysis;
pub mod error;
pub mod grid;
pub mod kernels;
pub mod operators;
pub mod oracle;
pub mod propagator;

pub use error::{Error, Result};
pub use grid::{inner_product, normalize, trial_basis, Grid, GridFunction};
pub use kernels::{bessel_k1, levy_density, tabulate_kernel, KernelFamily, KernelSpec, KernelTable};
pub use operators::{
    apply_hamiltonian, apply_local_kinetic, apply_nonlocal, apply_nonlocal_with, potential_values,
    Backend, Exterior, Hamiltonian, HamiltonianSpec, Kinetic, NonlocalOperator, PotentialKind,
    PotentialSpec,
};
pub use propagator::{
    convergence_check, energy_estimate, gram_schmidt, run_spectrum, run_spectrum_with,
    strang_shift, SolverConfig, SpectralResult,
};
