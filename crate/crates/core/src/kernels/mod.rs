//! Lévy densities of the Cauchy and quasirelativistic generators and their
//! lattice discretization.

mod bessel;

use std::f64::consts::PI;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

pub use bessel::bessel_k1;

use crate::error::{invalid, require_positive, Error, Result};
use crate::grid::Grid;

/// Relative density level below which the kernel is cut off.
const DENSITY_CUTOFF: f64 = 1e-16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    Cauchy,
    Quasirelativistic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    family: KernelFamily,
    mass: f64,
}

impl KernelSpec {
    /// `T_0 = |d/dx|`, density `1/(pi z^2)`.
    pub fn cauchy() -> Self {
        Self {
            family: KernelFamily::Cauchy,
            mass: 0.0,
        }
    }

    /// `T_m = sqrt(-d^2/dx^2 + m^2) - m` with `m > 0`.
    pub fn quasirelativistic(mass: f64) -> Result<Self> {
        require_positive("mass", mass)?;
        Ok(Self {
            family: KernelFamily::Quasirelativistic,
            mass,
        })
    }

    /// Quasirelativistic kernel for `m > 0`, Cauchy for `m = 0`.
    pub fn with_mass(mass: f64) -> Result<Self> {
        if mass == 0.0 {
            Ok(Self::cauchy())
        } else {
            Self::quasirelativistic(mass)
        }
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    fn validate(&self) -> Result<()> {
        match self.family {
            KernelFamily::Cauchy => Ok(()),
            KernelFamily::Quasirelativistic => require_positive("mass", self.mass),
        }
    }

    fn density(&self, z: f64) -> f64 {
        let z = z.abs();
        match self.family {
            KernelFamily::Cauchy => 1.0 / (PI * z * z),
            KernelFamily::Quasirelativistic => {
                let u = self.mass * z;
                // K1 underflows far before u overflows, so the unwrap cannot fire
                self.mass / PI * bessel_k1(u).unwrap_or(0.0) / z
            }
        }
    }
}

/// `nu(z)`: `1/(pi z^2)` or `(m/pi) K1(m|z|)/|z|`.
pub fn levy_density(spec: &KernelSpec, z: f64) -> Result<f64> {
    spec.validate()?;
    if z == 0.0 {
        return Err(Error::SingularPoint);
    }
    if !z.is_finite() {
        return Err(invalid("z", format!("must be finite, got {z}")));
    }
    Ok(spec.density(z))
}

/// Lattice weights `w_j = nu(j dx) dx`, `j = 1..=J`, plus the coefficient of
/// the origin cell and the mass of the discarded tail.
#[derive(Debug, Clone)]
pub struct KernelTable {
    spec: KernelSpec,
    grid: Grid,
    weights: Vec<f64>,
    singular_coeff: f64,
    tail_mass: f64,
}

impl KernelTable {
    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// `weights()[j - 1]` is the weight at offset `j`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `c0 = int_0^{dx/2} z^2 nu(z) dz`.
    pub fn singular_coeff(&self) -> f64 {
        self.singular_coeff
    }

    pub fn truncation_radius(&self) -> f64 {
        self.weights.len() as f64 * self.grid.dx()
    }

    /// `int_{z_max}^inf nu(z) dz`.
    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// Writes `z,weight` rows; the `z = 0` row carries `c0`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["z", "weight"])?;
        w.write_record(["0".to_string(), self.singular_coeff.to_string()])?;
        let dx = self.grid.dx();
        for (j, wj) in self.weights.iter().enumerate() {
            w.write_record([((j + 1) as f64 * dx).to_string(), wj.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a table written by [`KernelTable::write_csv`] for `spec` on `grid`.
    pub fn read_csv<R: Read>(input: R, spec: KernelSpec, grid: Grid) -> Result<Self> {
        spec.validate()?;
        let mut r = csv::Reader::from_reader(input);
        let headers = r.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["z", "weight"] {
            return Err(Error::Table(format!("unexpected header {headers:?}")));
        }
        let dx = grid.dx();
        let mut singular_coeff = None;
        let mut weights = Vec::new();
        for (row, record) in r.records().enumerate() {
            let record = record?;
            let parse = |i: usize| -> Result<f64> {
                record
                    .get(i)
                    .and_then(|s| s.trim().parse::<f64>().ok())
                    .ok_or_else(|| Error::Table(format!("row {}: bad number", row + 2)))
            };
            let (z, w) = (parse(0)?, parse(1)?);
            let offset = row as f64 * dx;
            if (z - offset).abs() > 1e-9 * dx.max(offset) {
                return Err(Error::Table(format!(
                    "row {}: offset {z} does not match lattice value {offset}",
                    row + 2
                )));
            }
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::Table(format!("row {}: negative weight", row + 2)));
            }
            if row == 0 {
                singular_coeff = Some(w);
            } else {
                weights.push(w);
            }
        }
        let singular_coeff =
            singular_coeff.ok_or_else(|| Error::Table("table has no rows".into()))?;
        if weights.len() > grid.len() - 1 {
            return Err(Error::Table("table is longer than the grid".into()));
        }
        let z_max = weights.len().max(1) as f64 * dx;
        Ok(Self {
            spec,
            grid,
            tail_mass: tail_mass(&spec, z_max),
            weights,
            singular_coeff,
        })
    }
}

pub fn tabulate_kernel(spec: &KernelSpec, grid: &Grid) -> Result<KernelTable> {
    spec.validate()?;
    let dx = grid.dx();
    let full = grid.len() - 1;
    let cutoff = DENSITY_CUTOFF * spec.density(dx);
    // largest offset whose density is still above the cutoff
    let j_max = if spec.density(full as f64 * dx) >= cutoff {
        full
    } else {
        let (mut lo, mut hi) = (1usize, full);
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if spec.density(mid as f64 * dx) >= cutoff {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    let weights: Vec<f64> = (1..=j_max)
        .map(|j| spec.density(j as f64 * dx) * dx)
        .collect();
    Ok(KernelTable {
        spec: *spec,
        grid: *grid,
        singular_coeff: singular_coeff(spec, dx),
        tail_mass: tail_mass(spec, j_max as f64 * dx),
        weights,
    })
}

fn singular_coeff(spec: &KernelSpec, dx: f64) -> f64 {
    let leading = dx / (2.0 * PI);
    match spec.family {
        KernelFamily::Cauchy => leading,
        KernelFamily::Quasirelativistic => {
            // z^2 nu(z) - 1/pi = (u K1(u) - 1)/pi with u = m z, vanishing at 0
            let m = spec.mass;
            let rest = simpson(
                |z| {
                    if z == 0.0 {
                        0.0
                    } else {
                        let u = m * z;
                        (u * bessel_k1(u).unwrap_or(0.0) - 1.0) / PI
                    }
                },
                0.0,
                0.5 * dx,
                256,
            );
            leading + rest
        }
    }
}

fn tail_mass(spec: &KernelSpec, z_max: f64) -> f64 {
    match spec.family {
        KernelFamily::Cauchy => 1.0 / (PI * z_max),
        KernelFamily::Quasirelativistic => {
            // (m/pi) int_{u0}^inf K1(u)/u du, with u = exp(s)
            let u0 = spec.mass * z_max;
            let s0 = u0.ln();
            let s1 = (u0 + 60.0).ln();
            simpson(
                |s| bessel_k1(s.exp()).unwrap_or(0.0),
                s0,
                s1,
                4096,
            ) * spec.mass
                / PI
        }
    }
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let n = intervals + intervals % 2;
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h);
    }
    sum * h / 3.0
}
