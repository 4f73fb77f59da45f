use std::path::Path;

use anyhow::{bail, Context, Result};
use levyspec::propagator::{DEFAULT_H, DEFAULT_TOL, DEFAULT_WINDOW};
use levyspec::{
    Backend, Exterior, Grid, HamiltonianSpec, KernelSpec, Kinetic, PotentialSpec, SolverConfig,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Cauchy,
    Quasirelativistic,
    Nonrelativistic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Potential {
    Harmonic,
    FiniteWell,
    None,
}

/// One run, as read from a JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: Model,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
    pub potential: Potential,
    #[serde(rename = "V0", default, skip_serializing_if = "Option::is_none")]
    pub v0: Option<f64>,
    pub a: f64,
    pub dx: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    pub n_states: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<usize>,
    #[serde(default)]
    pub backend: Backend,
    #[serde(default)]
    pub exterior: Exterior,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn kinetic(&self) -> Result<Kinetic> {
        Ok(match self.model {
            Model::Cauchy => {
                if self.mass.is_some_and(|m| m != 0.0) {
                    bail!("model `cauchy` takes no mass (got {})", self.mass.unwrap());
                }
                Kinetic::Nonlocal(KernelSpec::cauchy())
            }
            Model::Quasirelativistic => {
                let m = self.mass.context("model `quasirelativistic` needs `mass`")?;
                Kinetic::Nonlocal(KernelSpec::quasirelativistic(m)?)
            }
            Model::Nonrelativistic => {
                let mass = self.mass.context("model `nonrelativistic` needs `mass`")?;
                Kinetic::Nonrelativistic { mass }
            }
        })
    }

    pub fn potential_spec(&self) -> Result<PotentialSpec> {
        Ok(match self.potential {
            Potential::Harmonic => PotentialSpec::harmonic(),
            Potential::FiniteWell => {
                PotentialSpec::finite_well(self.v0.context("potential `finite_well` needs `V0`")?)?
            }
            Potential::None => PotentialSpec::none(),
        })
    }

    pub fn grid(&self) -> Result<Grid> {
        Ok(Grid::new(self.a, self.dx)?)
    }

    pub fn hamiltonian(&self) -> Result<HamiltonianSpec> {
        let spec = HamiltonianSpec::new(self.kinetic()?, self.potential_spec()?)
            .with_exterior(self.exterior);
        spec.validate()?;
        Ok(spec)
    }

    pub fn solver(&self) -> Result<SolverConfig> {
        let mut config = SolverConfig::new(self.hamiltonian()?, self.grid()?, self.n_states)
            .with_h(self.h.unwrap_or(DEFAULT_H))
            .with_tolerance(
                self.tol.unwrap_or(DEFAULT_TOL),
                self.window.unwrap_or(DEFAULT_WINDOW),
            )
            .with_backend(self.backend);
        if let Some(k) = self.k_max {
            config = config.with_k_max(k);
        }
        config.validate()?;
        Ok(config)
    }

    /// Well depth, for bound-state flags.
    pub fn depth(&self) -> Option<f64> {
        match self.potential {
            Potential::FiniteWell => self.v0,
            _ => None,
        }
    }

    /// Copy with one numeric field replaced.
    pub fn with_param(&self, name: &str, value: f64) -> Result<Self> {
        let mut c = self.clone();
        let count = |v: f64| -> Result<usize> {
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                bail!("`{name}` must be a non-negative integer, got {v}")
            }
        };
        match name {
            "mass" => c.mass = Some(value),
            "V0" => c.v0 = Some(value),
            "a" => c.a = value,
            "dx" => c.dx = value,
            "h" => c.h = Some(value),
            "tol" => c.tol = Some(value),
            "n_states" => c.n_states = count(value)?,
            "k_max" => c.k_max = Some(count(value)?),
            "window" => c.window = Some(count(value)?),
            other => bail!("cannot sweep over `{other}`"),
        }
        Ok(c)
    }
}
