//! Uniform symmetric lattice on [-a, a] and the functions sampled on it.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, require_positive, Error, Result};

/// Largest supported value of `round(a/dx)`.
const MAX_HALF_POINTS: f64 = (1u64 << 40) as f64;

/// A uniform lattice `x_j = -a + j*dx` with an odd number of points.
///
/// `x = 0` and both endpoints are always lattice points. When `a/dx` is not
/// an integer the spacing is shrunk to `a / round(a/dx)`; the requested
/// value is kept so callers can report the adjustment.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Grid {
    a: f64,
    dx: f64,
    half: usize,
    requested_dx: f64,
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.half == other.half && self.a == other.a && self.dx == other.dx
    }
}

impl Grid {
    pub fn new(a: f64, dx: f64) -> Result<Self> {
        require_positive("a", a)?;
        require_positive("dx", dx)?;
        let ratio = (a / dx).round();
        if !ratio.is_finite() || ratio > MAX_HALF_POINTS {
            return Err(invalid("dx", format!("a/dx = {} is out of range", a / dx)));
        }
        if ratio < 1.0 {
            return Err(invalid("dx", format!("spacing {dx} exceeds the half-width {a}")));
        }
        let half = ratio as usize;
        Ok(Self {
            a,
            dx: a / ratio,
            half,
            requested_dx: dx,
        })
    }

    pub fn half_width(&self) -> f64 {
        self.a
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn requested_dx(&self) -> f64 {
        self.requested_dx
    }

    /// True when the spacing differs from the requested one.
    pub fn dx_adjusted(&self) -> bool {
        self.dx != self.requested_dx
    }

    pub fn len(&self) -> usize {
        2 * self.half + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Index of the origin.
    pub fn center(&self) -> usize {
        self.half
    }

    pub fn x(&self, j: usize) -> f64 {
        if j == 0 {
            -self.a
        } else if j == 2 * self.half {
            self.a
        } else {
            (j as f64 - self.half as f64) * self.dx
        }
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |j| self.x(j))
    }
}

/// Real samples on a [`Grid`], implicitly zero outside `[-a, a]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(invalid(
                "values",
                format!("expected {} samples, got {}", grid.len(), values.len()),
            ));
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid("values", format!("sample {j} is not finite")));
        }
        Ok(Self { grid, values })
    }

    /// Wraps samples that are known to be finite and of the right length.
    pub(crate) fn from_raw(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.points().map(f).collect())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn norm(&self) -> f64 {
        dot(&self.values, &self.values, self.grid.dx).sqrt()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::from_raw(self.grid, self.values.iter().map(|v| v * s).collect())
    }
}

pub(crate) fn dot(f: &[f64], g: &[f64], dx: f64) -> f64 {
    f.iter().zip(g).map(|(a, b)| a * b).sum::<f64>() * dx
}

pub(crate) fn check_same(f: &Grid, g: &Grid) -> Result<()> {
    if f == g {
        Ok(())
    } else {
        Err(Error::IncompatibleGrids)
    }
}

/// Rectangle-rule inner product `sum f_j g_j dx`.
pub fn inner_product(f: &GridFunction, g: &GridFunction) -> Result<f64> {
    check_same(&f.grid, &g.grid)?;
    Ok(dot(&f.values, &g.values, f.grid.dx))
}

pub fn normalize(f: &GridFunction) -> Result<GridFunction> {
    let norm = f.norm();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::DegenerateVector);
    }
    Ok(f.scaled(1.0 / norm))
}

/// Box modes on `|x| < 1`: `cos(n pi x/2)` for odd labels, `sin(n pi x/2)`
/// for even ones, normalized, with amplitude sign +1.
pub fn trial_basis(n: usize, grid: &Grid) -> Result<Vec<GridFunction>> {
    if n == 0 {
        return Err(invalid("n", "need at least one trial function"));
    }
    if grid.a < 1.0 {
        return Err(Error::DomainTooSmall {
            a: grid.a,
            required: 1.0,
        });
    }
    let edge = 1.0 - 1e-9 * grid.dx;
    (1..=n)
        .map(|label| {
            let k = label as f64 * PI / 2.0;
            let mode = GridFunction::from_fn(*grid, |x| {
                if x.abs() >= edge {
                    0.0
                } else if label % 2 == 1 {
                    (k * x).cos()
                } else {
                    (k * x).sin()
                }
            })?;
            normalize(&mode)
        })
        .collect()
}
