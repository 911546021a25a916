//! Scenario configuration: named presets, TOML config files and `key=value`
//! overrides.
//!
//! Config files have `[model]`, `[decoherence]`, `[grid]` and `[sweep]`
//! sections. Frequencies are linear in MHz, times in μs, phases in radians.
//! Numeric values may be written as products of numbers and the symbols
//! `gamma0` (1 MHz) and `pi`, e.g. `"100*gamma0"` or `"pi"`.
//!
//! ```toml
//! preset = "fig3"
//!
//! [model]
//! delta = 40
//! bind_omega31 = true
//!
//! [grid]
//! t_end = 200
//! ```

use std::path::Path;

use serde::Serialize;

use crate::dynamics::{TimeGrid, DEFAULT_DT, DEFAULT_SAMPLES};
use crate::error::{Error, Result};
use crate::lindblad::DecoherenceParams;
use crate::model::{mhz, to_mhz, ModelParams};
use crate::sweep::{self, default_range, linear_grid, log_grid, SweepParam, SweepSpec, GAMMA0_MHZ};

pub const PRESETS: [&str; 7] = ["fig2", "fig3", "fig4a", "fig4b", "fig5", "fig6a", "fig6b"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridConfig {
    pub t_start: f64,
    pub t_end: f64,
    pub dt: f64,
    pub samples: usize,
}

impl GridConfig {
    pub fn to_grid(&self) -> Result<TimeGrid> {
        TimeGrid::with_samples(self.t_start, self.t_end, self.dt, self.samples)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum AxisGrid {
    Log {
        start: f64,
        stop: f64,
        per_decade: usize,
    },
    Linear {
        start: f64,
        stop: f64,
        points: usize,
    },
    Explicit(Vec<f64>),
}

impl AxisGrid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            AxisGrid::Log {
                start,
                stop,
                per_decade,
            } => log_grid(*start, *stop, *per_decade),
            AxisGrid::Linear {
                start,
                stop,
                points,
            } => linear_grid(*start, *stop, *points),
            AxisGrid::Explicit(v) => v.clone(),
        }
    }

    fn default_for(param: SweepParam) -> Self {
        let (start, stop) = default_range(param);
        AxisGrid::Log {
            start,
            stop,
            per_decade: sweep::POINTS_PER_DECADE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub axis: SweepParam,
    pub grid: AxisGrid,
    pub family: SweepParam,
    pub families: Vec<f64>,
}

/// Everything a command needs: model, rates, integration grid and an
/// optional sweep definition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub preset: Option<String>,
    pub model: ModelParams,
    pub decoherence: DecoherenceParams,
    /// Re-solve Ω₃₁ = Ω₃₂Ω₂₁/Δ after all settings are applied.
    pub bind_omega31: bool,
    pub grid: GridConfig,
    pub sweep: Option<SweepConfig>,
}

impl Default for Scenario {
    /// Reference parameters with the reference decoherence rates.
    fn default() -> Self {
        Self {
            preset: None,
            model: ModelParams::reference(),
            decoherence: DecoherenceParams::reference(),
            bind_omega31: false,
            grid: GridConfig {
                t_start: 0.0,
                t_end: 140.0,
                dt: DEFAULT_DT,
                samples: DEFAULT_SAMPLES,
            },
            sweep: None,
        }
    }
}

impl Scenario {
    pub fn preset(name: &str) -> Result<Self> {
        let mut s = Scenario {
            preset: Some(name.to_string()),
            ..Scenario::default()
        };
        match name {
            "fig2" => {
                s.decoherence = DecoherenceParams::none();
                s.grid.t_end = 50.0;
            }
            "fig3" => {}
            _ => {
                let spec = sweep::preset(name)?;
                s.model = spec.base_model;
                s.decoherence = spec.base_decoherence;
                s.bind_omega31 = spec.bind_omega31;
                s.sweep = Some(SweepConfig {
                    axis: spec.axis,
                    grid: AxisGrid::default_for(spec.axis),
                    family: spec.family_param,
                    families: spec.families,
                });
            }
        }
        Ok(s)
    }

    /// Model parameters with the Ω₃₁ binding applied if requested.
    pub fn resolved_model(&self) -> Result<ModelParams> {
        if self.bind_omega31 {
            self.model.bound_omega31()
        } else {
            Ok(self.model)
        }
    }

    pub fn sweep_spec(&self) -> Result<SweepSpec> {
        let cfg = self
            .sweep
            .as_ref()
            .ok_or_else(|| Error::Config("no [sweep] section or sweep preset given".into()))?;
        Ok(SweepSpec {
            axis: cfg.axis,
            grid: cfg.grid.values(),
            family_param: cfg.family,
            families: cfg.families.clone(),
            bind_omega31: self.bind_omega31,
            base_model: self.model,
            base_decoherence: self.decoherence,
        })
    }

    fn sweep_mut(&mut self) -> &mut SweepConfig {
        self.sweep.get_or_insert_with(|| SweepConfig {
            axis: SweepParam::GammaUniform,
            grid: AxisGrid::default_for(SweepParam::GammaUniform),
            family: SweepParam::GammaDephase,
            families: vec![GAMMA0_MHZ],
        })
    }

    /// Applies one setting. `key` may be section-qualified (`model.delta`)
    /// or bare when the name is unambiguous (`delta`).
    pub fn set(&mut self, key: &str, value: &Value) -> Result<()> {
        let key = qualify(key)?;
        let (section, name) = key.split_once('.').expect("qualified key");
        match (section, name) {
            ("model", "delta") => self.model.delta = mhz(value.number()?),
            ("model", "omega21") => self.model.omega21 = mhz(value.number()?),
            ("model", "omega32") => self.model.omega32 = mhz(value.number()?),
            ("model", "omega31") => self.model.omega31 = mhz(value.number()?),
            ("model", "phi") => self.model.phi = value.number()?,
            ("model", "extended") => self.model.extended = value.boolean()?,
            ("model", "bind_omega31") | ("sweep", "bind_omega31") => {
                self.bind_omega31 = value.boolean()?
            }
            ("decoherence", "gamma") => {
                let g = mhz(value.number()?);
                self.decoherence.gamma31 = g;
                self.decoherence.gamma32 = g;
                self.decoherence.gamma21 = g;
            }
            ("decoherence", "gamma31") => self.decoherence.gamma31 = mhz(value.number()?),
            ("decoherence", "gamma32") => self.decoherence.gamma32 = mhz(value.number()?),
            ("decoherence", "gamma21") => self.decoherence.gamma21 = mhz(value.number()?),
            ("decoherence", "gamma_dephase") => {
                self.decoherence.gamma_dephase = mhz(value.number()?)
            }
            ("decoherence", "gamma34") => self.decoherence.gamma34 = mhz(value.number()?),
            ("decoherence", "gamma41") => self.decoherence.gamma41 = mhz(value.number()?),
            ("grid", "t_start") => self.grid.t_start = value.number()?,
            ("grid", "t_end") => self.grid.t_end = value.number()?,
            ("grid", "dt") => self.grid.dt = value.number()?,
            ("grid", "samples") => self.grid.samples = value.count()?,
            ("sweep", "axis") => {
                let axis: SweepParam = value.text()?.parse()?;
                let sweep = self.sweep_mut();
                sweep.axis = axis;
                sweep.grid = AxisGrid::default_for(axis);
            }
            ("sweep", "family") => self.sweep_mut().family = value.text()?.parse()?,
            ("sweep", "families") => self.sweep_mut().families = value.numbers()?,
            ("sweep", "grid") => self.sweep_mut().grid = AxisGrid::Explicit(value.numbers()?),
            ("sweep", "start")
            | ("sweep", "stop")
            | ("sweep", "points_per_decade")
            | ("sweep", "points")
            | ("sweep", "scale") => self.set_axis_range(name, value)?,
            _ => unreachable!("qualify() only returns known keys"),
        }
        Ok(())
    }

    fn set_axis_range(&mut self, name: &str, value: &Value) -> Result<()> {
        let sweep = self.sweep_mut();
        let (mut start, mut stop) = default_range(sweep.axis);
        let mut per_decade = sweep::POINTS_PER_DECADE;
        let mut points = 2 * sweep::POINTS_PER_DECADE;
        let mut linear = false;
        match &sweep.grid {
            AxisGrid::Log {
                start: a,
                stop: b,
                per_decade: n,
            } => {
                (start, stop, per_decade) = (*a, *b, *n);
            }
            AxisGrid::Linear {
                start: a,
                stop: b,
                points: n,
            } => {
                (start, stop, points, linear) = (*a, *b, *n, true);
            }
            AxisGrid::Explicit(_) => {}
        }
        match name {
            "start" => start = value.number()?,
            "stop" => stop = value.number()?,
            "points_per_decade" => per_decade = value.count()?,
            "points" => points = value.count()?,
            "scale" => {
                linear = match value.text()? {
                    "log" => false,
                    "linear" => true,
                    other => return Err(Error::Config(format!("unknown scale {other:?}"))),
                }
            }
            _ => unreachable!(),
        }
        sweep.grid = if linear {
            AxisGrid::Linear {
                start,
                stop,
                points,
            }
        } else {
            AxisGrid::Log {
                start,
                stop,
                per_decade,
            }
        };
        Ok(())
    }

    /// Applies every key of a parsed TOML document. A top-level `preset`
    /// key must be handled by the caller before this.
    pub fn apply_table(&mut self, table: &toml::Table) -> Result<()> {
        for (section, body) in table {
            if section == "preset" {
                continue;
            }
            let body = body
                .as_table()
                .ok_or_else(|| Error::Config(format!("expected a [{section}] table")))?;
            for (name, v) in body {
                self.set(&format!("{section}.{name}"), &Value::from_toml(v)?)?;
            }
        }
        Ok(())
    }

    /// Parses a `key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, raw) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override {assignment:?} is not key=value")))?;
        self.set(key.trim(), &Value::Text(raw.trim().to_string()))
    }

    /// Preset (if any), then config file, then overrides.
    pub fn load(preset: Option<&str>, config: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let table = match config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                Some(
                    text.parse::<toml::Table>()
                        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?,
                )
            }
            None => None,
        };
        let file_preset = match table.as_ref().and_then(|t| t.get("preset")) {
            Some(v) => Some(
                v.as_str()
                    .ok_or_else(|| Error::Config("preset must be a string".into()))?
                    .to_string(),
            ),
            None => None,
        };
        let mut scenario = match preset.map(str::to_string).or(file_preset) {
            Some(name) => Scenario::preset(&name)?,
            None => Scenario::default(),
        };
        if let Some(t) = &table {
            scenario.apply_table(t)?;
        }
        for o in overrides {
            scenario.apply_override(o)?;
        }
        Ok(scenario)
    }

    /// Parameter listing in MHz, phases in radians.
    pub fn describe(&self) -> Vec<(String, f64)> {
        let m = &self.model;
        let d = &self.decoherence;
        let mut out = vec![
            ("delta_mhz".to_string(), to_mhz(m.delta)),
            ("omega21_mhz".to_string(), to_mhz(m.omega21)),
            ("omega32_mhz".to_string(), to_mhz(m.omega32)),
            ("omega31_mhz".to_string(), to_mhz(m.omega31)),
            ("phi_rad".to_string(), m.phi),
            ("gamma31_mhz".to_string(), to_mhz(d.gamma31)),
            ("gamma32_mhz".to_string(), to_mhz(d.gamma32)),
            ("gamma21_mhz".to_string(), to_mhz(d.gamma21)),
            ("gamma_dephase_mhz".to_string(), to_mhz(d.gamma_dephase)),
        ];
        if m.extended {
            out.push(("gamma34_mhz".to_string(), to_mhz(d.gamma34)));
            out.push(("gamma41_mhz".to_string(), to_mhz(d.gamma41)));
        }
        out
    }
}

const KEYS: &[&str] = &[
    "model.delta",
    "model.omega21",
    "model.omega32",
    "model.omega31",
    "model.phi",
    "model.extended",
    "model.bind_omega31",
    "decoherence.gamma",
    "decoherence.gamma31",
    "decoherence.gamma32",
    "decoherence.gamma21",
    "decoherence.gamma_dephase",
    "decoherence.gamma34",
    "decoherence.gamma41",
    "grid.t_start",
    "grid.t_end",
    "grid.dt",
    "grid.samples",
    "sweep.axis",
    "sweep.family",
    "sweep.families",
    "sweep.grid",
    "sweep.start",
    "sweep.stop",
    "sweep.points_per_decade",
    "sweep.points",
    "sweep.scale",
    "sweep.bind_omega31",
];

/// Qualified-only spellings, skipped when resolving bare keys.
const ALIASES: &[&str] = &["sweep.bind_omega31"];

fn qualify(key: &str) -> Result<String> {
    if key.contains('.') {
        return if KEYS.contains(&key) {
            Ok(key.to_string())
        } else {
            Err(Error::Config(format!("unknown key {key:?}")))
        };
    }
    let matches: Vec<&&str> = KEYS
        .iter()
        .filter(|k| !ALIASES.contains(k))
        .filter(|k| k.split_once('.').map(|(_, n)| n) == Some(key))
        .collect();
    match matches.as_slice() {
        [one] => Ok(one.to_string()),
        [] => Err(Error::Config(format!("unknown key {key:?}"))),
        many => Err(Error::Config(format!(
            "ambiguous key {key:?}; use one of {}",
            many.iter()
                .map(|k| k.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        ))),
    }
}

/// A raw setting before interpretation.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Number(f64),
    Bool(bool),
    Text(String),
    List(Vec<Value>),
}

impl Value {
    fn from_toml(v: &toml::Value) -> Result<Self> {
        Ok(match v {
            toml::Value::Integer(i) => Value::Number(*i as f64),
            toml::Value::Float(f) => Value::Number(*f),
            toml::Value::Boolean(b) => Value::Bool(*b),
            toml::Value::String(s) => Value::Text(s.clone()),
            toml::Value::Array(a) => {
                Value::List(a.iter().map(Value::from_toml).collect::<Result<_>>()?)
            }
            other => return Err(Error::Config(format!("unsupported value {other}"))),
        })
    }

    pub fn number(&self) -> Result<f64> {
        match self {
            Value::Number(x) => Ok(*x),
            Value::Text(s) => parse_expr(s),
            other => Err(Error::Config(format!("expected a number, got {other:?}"))),
        }
    }

    fn count(&self) -> Result<usize> {
        let x = self.number()?;
        if x >= 1.0 && x.fract() == 0.0 {
            Ok(x as usize)
        } else {
            Err(Error::Config(format!(
                "expected a positive integer, got {x}"
            )))
        }
    }

    fn boolean(&self) -> Result<bool> {
        match self {
            Value::Bool(b) => Ok(*b),
            Value::Text(s) if s == "true" => Ok(true),
            Value::Text(s) if s == "false" => Ok(false),
            other => Err(Error::Config(format!("expected true/false, got {other:?}"))),
        }
    }

    fn text(&self) -> Result<&str> {
        match self {
            Value::Text(s) => Ok(s.trim_matches('"')),
            other => Err(Error::Config(format!("expected a string, got {other:?}"))),
        }
    }

    fn numbers(&self) -> Result<Vec<f64>> {
        match self {
            Value::List(items) => items.iter().map(Value::number).collect(),
            Value::Text(s) => s
                .trim_matches(|c| c == '[' || c == ']')
                .split(',')
                .filter(|t| !t.trim().is_empty())
                .map(parse_expr)
                .collect(),
            Value::Number(x) => Ok(vec![*x]),
            other => Err(Error::Config(format!("expected a list, got {other:?}"))),
        }
    }
}

/// Product of factors, each a number, `gamma0`, or `pi`, with an optional
/// leading minus sign.
pub fn parse_expr(s: &str) -> Result<f64> {
    let s = s.trim();
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, s),
    };
    if body.is_empty() {
        return Err(Error::Config(format!("empty value {s:?}")));
    }
    body.split('*').try_fold(sign, |acc, factor| {
        let f = factor.trim();
        let v = match f {
            "gamma0" => GAMMA0_MHZ,
            "pi" => std::f64::consts::PI,
            _ => f
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("cannot parse {f:?} in {s:?}")))?,
        };
        Ok(acc * v)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expressions() {
        assert_eq!(parse_expr("100*gamma0").unwrap(), 100.0);
        assert_eq!(parse_expr("gamma0").unwrap(), 1.0);
        assert_eq!(parse_expr("pi").unwrap(), std::f64::consts::PI);
        assert_eq!(
            parse_expr("-0.5 * pi").unwrap(),
            -0.5 * std::f64::consts::PI
        );
        assert_eq!(parse_expr("1e-5").unwrap(), 1e-5);
        assert!(parse_expr("abc").is_err());
        assert!(parse_expr("").is_err());
    }

    #[test]
    fn key_resolution() {
        assert_eq!(qualify("delta").unwrap(), "model.delta");
        assert_eq!(qualify("gamma34").unwrap(), "decoherence.gamma34");
        assert!(qualify("nope").is_err());
        assert_eq!(qualify("bind_omega31").unwrap(), "model.bind_omega31");
        assert_eq!(qualify("sweep.bind_omega31").unwrap(), "sweep.bind_omega31");
        assert!(qualify("model.gamma34").is_err());
    }

    #[test]
    fn fig3_preset_parameters() {
        let s = Scenario::preset("fig3").unwrap();
        let d: std::collections::BTreeMap<_, _> = s.describe().into_iter().collect();
        let close = |k: &str, v: f64| (d[k] - v).abs() < 1e-12;
        assert!(close("delta_mhz", 20.0));
        assert!(close("omega21_mhz", 1.0));
        assert!(close("omega32_mhz", 1.0));
        assert!(close("omega31_mhz", 0.05));
        assert!(close("phi_rad", 0.0));
        assert!(close("gamma31_mhz", 0.1));
        assert!(close("gamma32_mhz", 0.1));
        assert!(close("gamma21_mhz", 1.0));
        assert!(close("gamma_dephase_mhz", 1.0));
        assert_eq!(s.grid.t_end, 140.0);
    }

    #[test]
    fn fig2_preset_has_no_decoherence() {
        let s = Scenario::preset("fig2").unwrap();
        assert_eq!(s.decoherence, DecoherenceParams::none());
        assert_eq!(s.grid.t_end, 50.0);
    }

    #[test]
    fn sweep_presets_match_sweep_module() {
        for name in sweep::SWEEP_PRESETS {
            let from_config = Scenario::preset(name).unwrap().sweep_spec().unwrap();
            assert_eq!(from_config, sweep::preset(name).unwrap(), "{name}");
        }
    }

    #[test]
    fn unknown_preset_rejected() {
        assert!(matches!(
            Scenario::preset("fig9"),
            Err(Error::UnknownPreset(_))
        ));
    }

    #[test]
    fn overrides_apply() {
        let mut s = Scenario::preset("fig6a").unwrap();
        s.apply_override("gamma34=100*gamma0").unwrap();
        assert!((s.decoherence.gamma34 - mhz(100.0)).abs() < 1e-12);
        s.apply_override("phi=pi").unwrap();
        assert_eq!(s.model.phi, std::f64::consts::PI);
        s.apply_override("model.bind_omega31=false").unwrap();
        assert!(!s.bind_omega31);
        assert!(s.apply_override("delta").is_err());
        assert!(s.apply_override("extended=maybe").is_err());
    }

    #[test]
    fn toml_document_applies() {
        let doc: toml::Table = r#"
            [model]
            delta = 40
            bind_omega31 = true

            [decoherence]
            gamma = "10*gamma0"

            [sweep]
            axis = "gamma_dephase"
            start = 0.01
            stop = 1
            points_per_decade = 2
            family = "gamma_uniform"
            families = [1, "10*gamma0"]
        "#
        .parse()
        .unwrap();
        let mut s = Scenario::default();
        s.apply_table(&doc).unwrap();
        assert!((s.resolved_model().unwrap().omega31 - mhz(1.0 / 40.0)).abs() < 1e-12);
        assert_eq!(s.decoherence.gamma21, mhz(10.0));
        let spec = s.sweep_spec().unwrap();
        assert_eq!(spec.axis, SweepParam::GammaDephase);
        assert_eq!(spec.grid.len(), 5);
        assert_eq!(spec.families, vec![1.0, 10.0]);
    }

    #[test]
    fn bad_section_rejected() {
        let doc: toml::Table = "[model]\nnonsense = 1\n".parse().unwrap();
        assert!(Scenario::default().apply_table(&doc).is_err());
        let doc: toml::Table = "model = 3\n".parse().unwrap();
        assert!(Scenario::default().apply_table(&doc).is_err());
    }
}
