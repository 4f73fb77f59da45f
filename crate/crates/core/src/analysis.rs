//! Closed-form spectra, least-squares fits, bound-state counting, unit
//! scaling and operator-limit diagnostics.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, require_positive, Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::kernels::KernelSpec;
use crate::operators::{apply_local_kinetic, Backend, Exterior, NonlocalOperator};

/// Cauchy oscillator `|d/dx| + x^2`: eigenvalues from Airy zeros.
pub const CAUCHY_EXACT: [f64; 19] = [
    1.0188, 2.3381, 3.2482, 4.0879, 4.8201, 5.5206, 6.1633, 6.7867, 7.3721, 7.9440, 8.4884,
    9.0226, 9.5354, 10.0402, 10.5276, 11.0085, 11.4751, 11.9360, 12.3848,
];

/// Semiclassical values tabulated next to [`CAUCHY_EXACT`].
pub const CAUCHY_APPROX: [f64; 19] = [
    1.11546, 2.32025, 3.26163, 4.08181, 4.82632, 5.51716, 6.16712, 6.78445, 7.37485, 7.94248,
    8.49050, 9.02137, 9.53705, 10.03914, 10.52897, 11.00776, 11.4762, 11.93532, 12.3857,
];

/// Lowest five Cauchy oscillator levels to six decimals.
pub const CAUCHY_LOWEST: [f64; 5] = [1.018792, 2.338107, 3.248197, 4.087949, 4.820099];

pub const HBAR_C_EV_M: f64 = 1.975e-6;
pub const ELECTRON_REDUCED_COMPTON_M: f64 = 386e-15;
/// Electron mass over electron-neutrino mass.
pub const ELECTRON_NEUTRINO_MASS_RATIO: f64 = 232.3e3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRow {
    pub n: usize,
    pub exact: f64,
    pub approx: f64,
}

pub struct CauchyReferenceTable;

impl CauchyReferenceTable {
    pub fn rows() -> impl Iterator<Item = ReferenceRow> {
        (0..CAUCHY_EXACT.len()).map(|i| ReferenceRow {
            n: i + 1,
            exact: CAUCHY_EXACT[i],
            approx: CAUCHY_APPROX[i],
        })
    }

    pub fn write_csv<W: Write>(out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "exact", "approx"])?;
        for row in Self::rows() {
            w.write_record([row.n.to_string(), row.exact.to_string(), row.approx.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `E_n = (3 pi (2n - 1) / 8)^{2/3}`.
pub fn cauchy_oscillator_asymptotic(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(invalid("n", "labels start at 1"));
    }
    Ok((3.0 * PI * (2 * n - 1) as f64 / 8.0).powf(2.0 / 3.0))
}

/// `E_n = (2n - 1) / sqrt(2m)` for `-d^2/dx^2 / 2m + x^2`.
pub fn nonrel_oscillator_energy(m: f64, n: usize) -> Result<f64> {
    require_positive("mass", m)?;
    if n == 0 {
        return Err(invalid("n", "labels start at 1"));
    }
    Ok((2 * n - 1) as f64 / (2.0 * m).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub slope_err: f64,
    pub intercept_err: f64,
    pub n_points: usize,
}

/// `E = prefactor * n^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub prefactor: f64,
    pub exponent: f64,
    pub prefactor_err: f64,
    pub exponent_err: f64,
    pub n_points: usize,
}

/// Ordinary least squares `y = slope x + intercept`.
pub fn fit_line(points: &[(f64, f64)]) -> Result<FitResult> {
    let n = points.len();
    if n < 2 {
        return Err(invalid("points", "need at least two points"));
    }
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(invalid("points", "coordinates must be finite"));
    }
    let nf = n as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let spread = points.iter().fold(0.0f64, |m, p| m.max(p.0.abs()));
    if sxx <= (1e-12 * spread).powi(2) * nf {
        return Err(Error::RankDeficient { index: 1 });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let (slope_err, intercept_err) = if n > 2 {
        let ssr: f64 = points
            .iter()
            .map(|p| (p.1 - slope * p.0 - intercept).powi(2))
            .sum();
        let s2 = ssr / (nf - 2.0);
        ((s2 / sxx).sqrt(), (s2 * (1.0 / nf + mx * mx / sxx)).sqrt())
    } else {
        (0.0, 0.0)
    };
    Ok(FitResult {
        slope,
        intercept,
        slope_err,
        intercept_err,
        n_points: n,
    })
}

/// Least squares on `(ln n, ln E)`.
pub fn fit_power(points: &[(f64, f64)]) -> Result<PowerFit> {
    for &(n, e) in points {
        if !(n >= 1.0) {
            return Err(invalid("n", format!("labels must be >= 1, got {n}")));
        }
        if !(e > 0.0) {
            return Err(invalid("E", format!("energies must be positive, got {e}")));
        }
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(n, e)| (n.ln(), e.ln())).collect();
    let line = fit_line(&logs)?;
    let prefactor = line.intercept.exp();
    Ok(PowerFit {
        prefactor,
        exponent: line.slope,
        prefactor_err: prefactor * line.intercept_err,
        exponent_err: line.slope_err,
        n_points: line.n_points,
    })
}

/// Label recovered from the intercept of `ln E_n = -ln(2m)/2 + ln(2n - 1)`.
pub fn oscillator_label_from_intercept(intercept: f64) -> f64 {
    (intercept.exp() + 1.0) / 2.0
}

/// Smallest `N >= 1` with `m <= pi^2 N^2 / (8 V0)`.
pub fn bound_state_count(m: f64, depth: f64) -> Result<usize> {
    require_positive("mass", m)?;
    require_positive("V0", depth)?;
    let limit = |n: usize| PI * PI * (n * n) as f64 / (8.0 * depth);
    let mut n = ((8.0 * depth * m).sqrt() / PI).ceil().max(1.0) as usize;
    while m > limit(n) {
        n += 1;
    }
    while n > 1 && m <= limit(n - 1) {
        n -= 1;
    }
    Ok(n)
}

/// `(n pi/2 - pi/8) / b`, measured from the rest energy `m`.
pub fn infinite_well_asymptotic(n: usize, b: f64, m: f64) -> Result<f64> {
    if n == 0 {
        return Err(invalid("n", "labels start at 1"));
    }
    require_positive("b", b)?;
    if !(m >= 0.0) || !m.is_finite() {
        return Err(invalid("mass", format!("must be finite and >= 0, got {m}")));
    }
    Ok((n as f64 * PI / 2.0 - PI / 8.0) / b)
}

/// `(pi^2 n^2 / 8m) (1 - 4/(pi sqrt(V0)))`.
pub fn deep_well_nonrel(n: usize, m: f64, depth: f64) -> Result<f64> {
    if n == 0 {
        return Err(invalid("n", "labels start at 1"));
    }
    require_positive("mass", m)?;
    if !(depth > 16.0 / (PI * PI)) || !depth.is_finite() {
        return Err(invalid("V0", format!("must exceed 16/pi^2, got {depth}")));
    }
    let n = n as f64;
    Ok(PI * PI * n * n / (8.0 * m) * (1.0 - 4.0 / (PI * depth.sqrt())))
}

/// Scales of the dimensionless oscillator `T + x^2` for a spring constant
/// `k` (eV/m^2) and `hbar c` (eV m).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatorScaling {
    pub hbar_c: f64,
    pub k: f64,
}

impl OscillatorScaling {
    pub fn new(k: f64, hbar_c: f64) -> Result<Self> {
        require_positive("k", k)?;
        require_positive("hbar_c", hbar_c)?;
        Ok(Self { hbar_c, k })
    }

    /// `(k / 2 hbar c)^{1/3}` in 1/m.
    pub fn inverse_length(&self) -> f64 {
        (self.k / (2.0 * self.hbar_c)).cbrt()
    }

    /// `c^2 kappa^{1/3} = hbar c (k / 2 hbar c)^{1/3}` in eV.
    pub fn energy_unit(&self) -> f64 {
        self.hbar_c * self.inverse_length()
    }

    pub fn energy_to_physical(&self, e: f64) -> f64 {
        e * self.energy_unit()
    }

    pub fn energy_from_physical(&self, e: f64) -> f64 {
        e / self.energy_unit()
    }

    /// Dimensionless coordinate of a physical position.
    pub fn length_from_physical(&self, x: f64) -> f64 {
        x * self.inverse_length()
    }

    /// Physical position of a dimensionless coordinate, e.g. the
    /// integration bound `a = (2 hbar c / k)^{1/3} a_check`.
    pub fn length_to_physical(&self, x: f64) -> f64 {
        x / self.inverse_length()
    }
}

/// Physical energy of a dimensionless oscillator level.
pub fn oscillator_to_dimensional(e_check: f64, k: f64, hbar_c: f64) -> Result<f64> {
    Ok(OscillatorScaling::new(k, hbar_c)?.energy_to_physical(e_check))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitScales {
    pub hbar_c: f64,
    /// Well half-width in meters.
    pub half_width: f64,
    /// `hbar c / b` in eV.
    pub energy_unit: f64,
    /// Reduced Compton wavelength in meters, if a particle was given.
    pub reduced_compton: Option<f64>,
    /// `b / reduced_compton`.
    pub mass_parameter: Option<f64>,
}

impl UnitScales {
    pub fn energy_to_physical(&self, e: f64) -> f64 {
        e * self.energy_unit
    }

    pub fn energy_from_physical(&self, e: f64) -> f64 {
        e / self.energy_unit
    }
}

pub fn well_unit_scales(b: f64, reduced_compton: Option<f64>) -> Result<UnitScales> {
    well_unit_scales_with(b, reduced_compton, HBAR_C_EV_M)
}

pub fn well_unit_scales_with(b: f64, reduced_compton: Option<f64>, hbar_c: f64) -> Result<UnitScales> {
    require_positive("b", b)?;
    require_positive("hbar_c", hbar_c)?;
    if let Some(l) = reduced_compton {
        require_positive("compton", l)?;
    }
    Ok(UnitScales {
        hbar_c,
        half_width: b,
        energy_unit: hbar_c / b,
        reduced_compton,
        mass_parameter: reduced_compton.map(|l| b / l),
    })
}

/// Reduced Compton wavelength of a particle lighter by `mass_ratio`.
pub fn scaled_reduced_compton(reference: f64, mass_ratio: f64) -> Result<f64> {
    require_positive("compton", reference)?;
    require_positive("ratio", mass_ratio)?;
    Ok(reference * mass_ratio)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitRow {
    pub mass: f64,
    /// `||(T_m + Delta/2m) g|| / ||Delta g / 2m||`; undefined at `m = 0`.
    pub r_nr: Option<f64>,
    /// `||(T_m - T_0) g|| / ||T_0 g||`.
    pub r_ur: f64,
}

/// Distance of `T_m g` from the massless and nonrelativistic limits.
pub fn operator_limit_report(
    masses: &[f64],
    g: &GridFunction,
    exterior: Exterior,
) -> Result<Vec<LimitRow>> {
    let grid: Grid = *g.grid();
    let apply = |spec: KernelSpec| -> Result<GridFunction> {
        let table = crate::kernels::tabulate_kernel(&spec, &grid)?;
        NonlocalOperator::new(&table, exterior, Backend::Auto).apply(g)
    };
    let t0 = apply(KernelSpec::cauchy())?;
    let t0_norm = t0.norm();
    masses
        .iter()
        .map(|&m| {
            if !(m >= 0.0) || !m.is_finite() {
                return Err(invalid("mass", format!("must be finite and >= 0, got {m}")));
            }
            if m == 0.0 {
                return Ok(LimitRow {
                    mass: m,
                    r_nr: None,
                    r_ur: 0.0,
                });
            }
            let tm = apply(KernelSpec::quasirelativistic(m)?)?;
            let local = apply_local_kinetic(m, g)?;
            let diff_norm = |a: &GridFunction, b: &GridFunction| -> f64 {
                let d: f64 = a
                    .values()
                    .iter()
                    .zip(b.values())
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum();
                (d * grid.dx()).sqrt()
            };
            Ok(LimitRow {
                mass: m,
                r_nr: Some(diff_norm(&tm, &local) / local.norm()),
                r_ur: diff_norm(&tm, &t0) / t0_norm,
            })
        })
        .collect()
}
