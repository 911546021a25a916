//! Steady-state parameter sweeps with the selective-condition binding
//! Ω₃₁ = Ω₃₂Ω₂₁/Δ re-solved per point.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lindblad::DecoherenceParams;
use crate::model::{build_hamiltonian, check_selective_condition, mhz, to_mhz, ModelParams};
use crate::observables::enantiomeric_excess;
use crate::steadystate::steady_state;

/// γ₀ = 2π·1 MHz, quoted as 1 MHz in linear units.
pub const GAMMA0_MHZ: f64 = 1.0;
pub const POINTS_PER_DECADE: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    /// γ₃₁ = γ₃₂ = γ₂₁ = γ.
    GammaUniform,
    GammaDephase,
    Delta,
    Gamma34,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::GammaUniform => "gamma_uniform",
            SweepParam::GammaDephase => "gamma_dephase",
            SweepParam::Delta => "delta",
            SweepParam::Gamma34 => "gamma34",
        }
    }

    pub fn is_rate(self) -> bool {
        self != SweepParam::Delta
    }

    /// Sets the parameter from a linear frequency in MHz.
    pub fn apply(self, value_mhz: f64, model: &mut ModelParams, deco: &mut DecoherenceParams) {
        let w = mhz(value_mhz);
        match self {
            SweepParam::GammaUniform => {
                deco.gamma31 = w;
                deco.gamma32 = w;
                deco.gamma21 = w;
            }
            SweepParam::GammaDephase => deco.gamma_dephase = w,
            SweepParam::Delta => model.delta = w,
            SweepParam::Gamma34 => deco.gamma34 = w,
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParam {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gamma_uniform" | "gamma" => Ok(SweepParam::GammaUniform),
            "gamma_dephase" => Ok(SweepParam::GammaDephase),
            "delta" => Ok(SweepParam::Delta),
            "gamma34" => Ok(SweepParam::Gamma34),
            other => Err(Error::InvalidSweep(format!(
                "unknown sweep parameter {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub axis: SweepParam,
    /// Axis values, MHz.
    pub grid: Vec<f64>,
    pub family_param: SweepParam,
    /// One curve per value, MHz.
    pub families: Vec<f64>,
    pub bind_omega31: bool,
    pub base_model: ModelParams,
    pub base_decoherence: DecoherenceParams,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::InvalidSweep("empty grid".into()));
        }
        if self.families.is_empty() {
            return Err(Error::InvalidSweep("no families".into()));
        }
        if self.axis == self.family_param {
            return Err(Error::InvalidSweep(
                "axis and family parameter must differ".into(),
            ));
        }
        if self
            .grid
            .windows(2)
            .any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater))
        {
            return Err(Error::InvalidSweep(
                "grid must be strictly increasing".into(),
            ));
        }
        for (param, values) in [(self.axis, &self.grid), (self.family_param, &self.families)] {
            for &v in values.iter() {
                if !v.is_finite() {
                    return Err(Error::InvalidSweep(format!("non-finite {param} value")));
                }
                if param.is_rate() && v <= 0.0 {
                    return Err(Error::InvalidSweep(format!(
                        "{param} values must be positive, got {v}"
                    )));
                }
                if param == SweepParam::Delta && v == 0.0 {
                    return Err(Error::InvalidSweep("delta must be nonzero".into()));
                }
            }
        }
        self.base_decoherence.validate()?;
        Ok(())
    }

    /// Model and decoherence parameters at one (axis value, family value) point.
    pub fn point(
        &self,
        axis_value: f64,
        family_value: f64,
    ) -> Result<(ModelParams, DecoherenceParams)> {
        let mut model = self.base_model;
        let mut deco = self.base_decoherence;
        self.family_param.apply(family_value, &mut model, &mut deco);
        self.axis.apply(axis_value, &mut model, &mut deco);
        if self.bind_omega31 {
            model = model.bound_omega31()?;
        }
        Ok((model, deco))
    }
}

/// Logarithmic grid from `start` to `stop` (inclusive) with the given density.
pub fn log_grid(start: f64, stop: f64, per_decade: usize) -> Vec<f64> {
    let (a, b) = (start.log10(), stop.log10());
    let n = ((b - a) * per_decade as f64).round() as usize + 1;
    if n < 2 {
        return vec![start];
    }
    let mut out: Vec<f64> = (0..n)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64))
        .collect();
    out[0] = start;
    out[n - 1] = stop;
    out
}

pub fn linear_grid(start: f64, stop: f64, points: usize) -> Vec<f64> {
    if points < 2 {
        return vec![start];
    }
    (0..points)
        .map(|i| start + (stop - start) * i as f64 / (points - 1) as f64)
        .collect()
}

pub const SWEEP_PRESETS: [&str; 5] = ["fig4a", "fig4b", "fig5", "fig6a", "fig6b"];

/// Default axis range in MHz: [10⁻³, 10²]·γ₀ for rates, [10, 200] MHz for Δ.
pub fn default_range(param: SweepParam) -> (f64, f64) {
    if param.is_rate() {
        (1e-3 * GAMMA0_MHZ, 1e2 * GAMMA0_MHZ)
    } else {
        (10.0, 200.0)
    }
}

fn rate_axis() -> Vec<f64> {
    let (a, b) = default_range(SweepParam::GammaUniform);
    log_grid(a, b, POINTS_PER_DECADE)
}

fn delta_axis() -> Vec<f64> {
    let (a, b) = default_range(SweepParam::Delta);
    log_grid(a, b, POINTS_PER_DECADE)
}

/// Base model and rates shared by the leakage presets.
pub fn leakage_base() -> (ModelParams, DecoherenceParams) {
    let model = ModelParams::reference().with_extended(true);
    let deco = DecoherenceParams {
        gamma34: mhz(GAMMA0_MHZ),
        gamma41: mhz(1e-5),
        ..DecoherenceParams::reference()
    };
    (model, deco)
}

/// Named sweep presets. γ₀ = 2π·1 MHz throughout.
pub fn preset(name: &str) -> Result<SweepSpec> {
    let g0 = GAMMA0_MHZ;
    let spec = match name {
        "fig4a" => SweepSpec {
            axis: SweepParam::GammaUniform,
            grid: rate_axis(),
            family_param: SweepParam::GammaDephase,
            families: vec![0.01 * g0, 0.1 * g0, g0],
            bind_omega31: false,
            base_model: ModelParams::reference(),
            base_decoherence: DecoherenceParams::reference(),
        },
        "fig4b" => SweepSpec {
            axis: SweepParam::GammaDephase,
            grid: rate_axis(),
            family_param: SweepParam::GammaUniform,
            families: vec![0.1 * g0, g0, 10.0 * g0],
            bind_omega31: false,
            base_model: ModelParams::reference(),
            base_decoherence: DecoherenceParams::reference(),
        },
        "fig5" => SweepSpec {
            axis: SweepParam::Delta,
            grid: delta_axis(),
            family_param: SweepParam::GammaUniform,
            families: vec![g0, 10.0 * g0, 100.0 * g0],
            bind_omega31: true,
            base_model: ModelParams::reference(),
            base_decoherence: DecoherenceParams::uniform(mhz(g0), mhz(g0)),
        },
        "fig6a" => {
            let (model, deco) = leakage_base();
            SweepSpec {
                axis: SweepParam::Gamma34,
                grid: rate_axis(),
                family_param: SweepParam::Delta,
                families: vec![20.0, 40.0, 80.0],
                bind_omega31: true,
                base_model: model,
                base_decoherence: deco,
            }
        }
        "fig6b" => {
            let (model, deco) = leakage_base();
            SweepSpec {
                axis: SweepParam::Delta,
                grid: delta_axis(),
                family_param: SweepParam::Gamma34,
                families: vec![g0, 10.0 * g0, 100.0 * g0],
                bind_omega31: true,
                base_model: model,
                base_decoherence: deco,
            }
        }
        other => return Err(Error::UnknownPreset(other.to_string())),
    };
    Ok(spec)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCell {
    /// ε, or the error that prevented computing it.
    pub epsilon: std::result::Result<f64, String>,
    pub omega31_mhz: f64,
    pub selective_residual: f64,
    pub steady_residual: Option<f64>,
    pub null_dim: Option<usize>,
}

impl SweepCell {
    pub fn status(&self) -> String {
        match &self.epsilon {
            Ok(_) => "ok".to_string(),
            Err(e) => e.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub axis: SweepParam,
    pub family_param: SweepParam,
    pub grid: Vec<f64>,
    pub families: Vec<f64>,
    /// `cells[i][j]` belongs to `grid[i]` and `families[j]`.
    pub cells: Vec<Vec<SweepCell>>,
}

impl SweepTable {
    /// ε of family `j` along the axis; NaN where the point failed.
    pub fn family_curve(&self, j: usize) -> Vec<f64> {
        self.cells
            .iter()
            .map(|row| row[j].epsilon.clone().unwrap_or(f64::NAN))
            .collect()
    }

    pub fn failures(&self) -> usize {
        self.cells
            .iter()
            .flatten()
            .filter(|c| c.epsilon.is_err())
            .count()
    }
}

fn evaluate(spec: &SweepSpec, axis_value: f64, family_value: f64) -> SweepCell {
    let (model, deco) = match spec.point(axis_value, family_value) {
        Ok(p) => p,
        Err(e) => {
            return SweepCell {
                epsilon: Err(e.to_string()),
                omega31_mhz: f64::NAN,
                selective_residual: f64::NAN,
                steady_residual: None,
                null_dim: None,
            }
        }
    };
    let selective_residual = to_mhz(check_selective_condition(&model).omega31_residual);
    let mut cell = SweepCell {
        epsilon: Err(String::new()),
        omega31_mhz: to_mhz(model.omega31),
        selective_residual,
        steady_residual: None,
        null_dim: None,
    };
    let result = build_hamiltonian(&model).and_then(|h| steady_state(&h, &deco));
    match result {
        Ok(ss) => {
            cell.steady_residual = Some(ss.residual);
            cell.null_dim = Some(ss.null_dim);
            cell.epsilon = enantiomeric_excess(ss.rho.operator()).map_err(|e| e.to_string());
        }
        Err(e) => {
            if let Error::Degenerate { null_dim } = e {
                cell.null_dim = Some(null_dim);
            }
            cell.epsilon = Err(e.to_string());
        }
    }
    cell
}

/// Evaluates every (point, family) pair. Points run in parallel; the table
/// order follows the grid and family order.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepTable> {
    spec.validate()?;
    let nf = spec.families.len();
    let flat: Vec<SweepCell> = (0..spec.grid.len() * nf)
        .into_par_iter()
        .map(|k| evaluate(spec, spec.grid[k / nf], spec.families[k % nf]))
        .collect();
    let cells = flat.chunks(nf).map(|c| c.to_vec()).collect();
    Ok(SweepTable {
        axis: spec.axis,
        family_param: spec.family_param,
        grid: spec.grid.clone(),
        families: spec.families.clone(),
        cells,
    })
}
