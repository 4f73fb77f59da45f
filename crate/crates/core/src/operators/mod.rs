//! Kinetic terms, potentials and the Hamiltonian action on grid functions.

mod convolution;

use serde::{Deserialize, Serialize};

pub use convolution::Backend;
use convolution::Convolver;

use crate::error::{invalid, require_positive, Result};
use crate::grid::{check_same, Grid, GridFunction};
use crate::kernels::{tabulate_kernel, KernelSpec, KernelTable};

/// How jumps that leave `[-a, a]` are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exterior {
    /// Jumps out of the box are suppressed: only pairs of lattice points
    /// interact, so constants are annihilated.
    #[default]
    Regional,
    /// Samples outside the box are zero and the full jump mass, including
    /// the analytic tail beyond the truncation radius, acts on `f(x)`.
    ZeroExtended,
}

/// The lattice form of `p.v. int [f(x) - f(x+z)] nu(dz)`.
///
/// Off-diagonal entries are `-w_|i-k|`; the origin cell enters as
/// `c0 (2 f_i - f_{i+2} - f_{i-2}) / (4 dx^2)`, a second difference over
/// `2 dx`.
pub struct NonlocalOperator {
    grid: Grid,
    exterior: Exterior,
    diagonal: Vec<f64>,
    conv: Convolver,
}

impl NonlocalOperator {
    pub fn new(table: &KernelTable, exterior: Exterior, backend: Backend) -> Self {
        let grid = *table.grid();
        let n = grid.len();
        let dx = grid.dx();
        let mut stencil = table.weights().to_vec();
        if stencil.len() < 2 {
            stencil.resize(2, 0.0);
        }
        stencil[1] += table.singular_coeff() / (4.0 * dx * dx);

        let mut prefix = Vec::with_capacity(stencil.len() + 1);
        prefix.push(0.0);
        let mut s = 0.0;
        for &w in &stencil {
            s += w;
            prefix.push(s);
        }
        let j = stencil.len();
        let diagonal = match exterior {
            Exterior::Regional => (0..n)
                .map(|i| prefix[i.min(j)] + prefix[(n - 1 - i).min(j)])
                .collect(),
            Exterior::ZeroExtended => vec![2.0 * (prefix[j] + table.tail_mass()); n],
        };
        Self {
            grid,
            exterior,
            diagonal,
            conv: Convolver::new(&stencil, n, backend),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn exterior(&self) -> Exterior {
        self.exterior
    }

    /// The backend actually in use after resolving [`Backend::Auto`].
    pub fn backend(&self) -> Backend {
        self.conv.backend()
    }

    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        check_same(&self.grid, f.grid())?;
        let mut out = vec![0.0; f.values().len()];
        self.apply_slice(f.values(), &mut out);
        Ok(GridFunction::from_raw(self.grid, out))
    }

    pub(crate) fn apply_slice(&self, f: &[f64], out: &mut [f64]) {
        self.conv.apply(f, out);
        for ((o, &d), &v) in out.iter_mut().zip(&self.diagonal).zip(f) {
            *o = d * v - *o;
        }
    }
}

/// Nonlocal kinetic action with zero extension, any backend.
pub fn apply_nonlocal(table: &KernelTable, f: &GridFunction) -> Result<GridFunction> {
    apply_nonlocal_with(table, Exterior::ZeroExtended, f)
}

pub fn apply_nonlocal_with(
    table: &KernelTable,
    exterior: Exterior,
    f: &GridFunction,
) -> Result<GridFunction> {
    NonlocalOperator::new(table, exterior, Backend::Auto).apply(f)
}

/// `-(f_{i+1} - 2 f_i + f_{i-1}) / (2 m dx^2)` with zeros beyond the ends.
pub fn apply_local_kinetic(m: f64, f: &GridFunction) -> Result<GridFunction> {
    require_positive("mass", m)?;
    let mut out = vec![0.0; f.values().len()];
    local_kinetic(m, f.grid().dx(), f.values(), &mut out);
    Ok(GridFunction::from_raw(*f.grid(), out))
}

fn local_kinetic(m: f64, dx: f64, f: &[f64], out: &mut [f64]) {
    let c = 1.0 / (2.0 * m * dx * dx);
    let n = f.len();
    for i in 0..n {
        let left = if i > 0 { f[i - 1] } else { 0.0 };
        let right = if i + 1 < n { f[i + 1] } else { 0.0 };
        out[i] = c * (2.0 * f[i] - left - right);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKind {
    Harmonic,
    FiniteWell,
    None,
}

/// `x^2`, a unit-half-width well of depth `V0`, or nothing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    kind: PotentialKind,
    depth: f64,
}

impl PotentialSpec {
    pub fn harmonic() -> Self {
        Self {
            kind: PotentialKind::Harmonic,
            depth: 0.0,
        }
    }

    pub fn finite_well(depth: f64) -> Result<Self> {
        if !(depth >= 0.0) || !depth.is_finite() {
            return Err(invalid("V0", format!("must be finite and >= 0, got {depth}")));
        }
        Ok(Self {
            kind: PotentialKind::FiniteWell,
            depth,
        })
    }

    pub fn none() -> Self {
        Self {
            kind: PotentialKind::None,
            depth: 0.0,
        }
    }

    pub fn kind(&self) -> PotentialKind {
        self.kind
    }

    pub fn depth(&self) -> f64 {
        self.depth
    }

    fn at(&self, x: f64, edge: f64) -> f64 {
        match self.kind {
            PotentialKind::Harmonic => x * x,
            PotentialKind::FiniteWell if x.abs() >= edge => self.depth,
            PotentialKind::FiniteWell | PotentialKind::None => 0.0,
        }
    }
}

/// `V(x_j)`; the well edge `|x| = 1` carries the barrier value.
pub fn potential_values(spec: &PotentialSpec, grid: &Grid) -> GridFunction {
    let edge = 1.0 - 1e-9 * grid.dx();
    GridFunction::from_raw(*grid, grid.points().map(|x| spec.at(x, edge)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kinetic {
    Nonlocal(KernelSpec),
    Nonrelativistic { mass: f64 },
    /// `T = 0`; only useful for testing.
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianSpec {
    pub kinetic: Kinetic,
    pub potential: PotentialSpec,
    #[serde(default)]
    pub exterior: Exterior,
}

impl HamiltonianSpec {
    pub fn new(kinetic: Kinetic, potential: PotentialSpec) -> Self {
        Self {
            kinetic,
            potential,
            exterior: Exterior::default(),
        }
    }

    pub fn with_exterior(mut self, exterior: Exterior) -> Self {
        self.exterior = exterior;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if let Kinetic::Nonrelativistic { mass } = self.kinetic {
            require_positive("mass", mass)?;
        }
        if let Kinetic::Nonlocal(spec) = self.kinetic {
            KernelSpec::with_mass(spec.mass())?;
        }
        if self.potential.kind == PotentialKind::FiniteWell {
            PotentialSpec::finite_well(self.potential.depth)?;
        }
        Ok(())
    }
}

enum KineticOp {
    Zero,
    Local(f64),
    Nonlocal(NonlocalOperator),
}

/// `H = T + V` prepared on one grid.
pub struct Hamiltonian {
    grid: Grid,
    kinetic: KineticOp,
    potential: Vec<f64>,
}

impl Hamiltonian {
    pub fn new(spec: &HamiltonianSpec, grid: &Grid, backend: Backend) -> Result<Self> {
        spec.validate()?;
        let kinetic = match spec.kinetic {
            Kinetic::Zero => KineticOp::Zero,
            Kinetic::Nonrelativistic { mass } => KineticOp::Local(mass),
            Kinetic::Nonlocal(k) => {
                let table = tabulate_kernel(&k, grid)?;
                KineticOp::Nonlocal(NonlocalOperator::new(&table, spec.exterior, backend))
            }
        };
        Ok(Self {
            grid: *grid,
            kinetic,
            potential: potential_values(&spec.potential, grid).into_values(),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    /// Convolution backend of the kinetic term, if it is nonlocal.
    pub fn backend(&self) -> Option<Backend> {
        match &self.kinetic {
            KineticOp::Nonlocal(op) => Some(op.backend()),
            _ => None,
        }
    }

    pub fn apply_kinetic(&self, f: &GridFunction) -> Result<GridFunction> {
        check_same(&self.grid, f.grid())?;
        let mut out = vec![0.0; f.values().len()];
        self.kinetic_slice(f.values(), &mut out);
        Ok(GridFunction::from_raw(self.grid, out))
    }

    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        let mut out = self.apply_kinetic(f)?.into_values();
        for ((o, &v), &x) in out.iter_mut().zip(&self.potential).zip(f.values()) {
            *o += v * x;
        }
        Ok(GridFunction::from_raw(self.grid, out))
    }

    pub(crate) fn kinetic_slice(&self, f: &[f64], out: &mut [f64]) {
        match &self.kinetic {
            KineticOp::Zero => out.fill(0.0),
            KineticOp::Local(m) => local_kinetic(*m, self.grid.dx(), f, out),
            KineticOp::Nonlocal(op) => op.apply_slice(f, out),
        }
    }
}

/// `Hf = Tf + V f`. Builds the operator on every call; keep a
/// [`Hamiltonian`] around for repeated use.
pub fn apply_hamiltonian(spec: &HamiltonianSpec, f: &GridFunction) -> Result<GridFunction> {
    Hamiltonian::new(spec, f.grid(), Backend::Auto)?.apply(f)
}
