//! `enantio` command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value as Json};

use crate::config::Scenario;
use crate::dynamics::{evolve_master, evolve_unitary, TimeSeries};
use crate::error::{Error, Result};
use crate::hilbert::{DensityMatrix, Operator, StateLabel};
use crate::lindblad::DecoherenceParams;
use crate::model::{
    build_hamiltonian, check_selective_condition, frohlich_nakajima_transform, to_mhz, Handedness,
};
use crate::observables::{enantiomeric_excess, populations};
use crate::output::{fmt_sig, sweep_csv, timeseries_csv};
use crate::steadystate::{steady_state, steady_state_projected, SteadyState};
use crate::sweep::run_sweep;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_PHYSICS: i32 = 3;
pub const EXIT_DEGENERATE: i32 = 4;

/// ε threshold reported as "time to target" in summaries.
pub const TARGET_EPSILON: f64 = 0.99;

#[derive(Debug, Parser)]
#[command(
    name = "enantio",
    version,
    about = "Optical-pumping enantio-conversion simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the master equation from a racemic mixture.
    Evolve {
        #[command(flatten)]
        common: Common,
        /// Drop all relaxation and dephasing (unitary evolution).
        #[arg(long)]
        no_decoherence: bool,
    },
    /// Solve for the stationary state.
    Steady {
        #[command(flatten)]
        common: Common,
        /// On a degenerate null space, integrate over the configured grid and
        /// project the final state onto the null space.
        #[arg(long)]
        allow_degenerate: bool,
    },
    /// Steady-state ε over a parameter grid.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Print regime checks and effective parameters.
    Report {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// One of fig2, fig3, fig4a, fig4b, fig5, fig6a, fig6b.
    #[arg(long)]
    pub preset: Option<String>,
    /// Override a setting, e.g. `--set gamma34=100*gamma0`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

impl Common {
    fn scenario(&self) -> Result<Scenario> {
        Scenario::load(
            self.preset.as_deref(),
            self.config.as_deref(),
            &self.overrides,
        )
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::UnknownPreset(_) | Error::InvalidSweep(_) => EXIT_CONFIG,
        Error::Degenerate { .. } => EXIT_DEGENERATE,
        _ => EXIT_PHYSICS,
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(stderr, "{}", e.render())
            } else {
                write!(stdout, "{}", e.render())
            };
            return code;
        }
    };
    match dispatch(&cli, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cli: &Cli, stdout: &mut dyn Write) -> Result<i32> {
    match &cli.command {
        Command::Evolve {
            common,
            no_decoherence,
        } => cmd_evolve(common, *no_decoherence),
        Command::Steady {
            common,
            allow_degenerate,
        } => cmd_steady(common, *allow_degenerate),
        Command::Sweep { common } => cmd_sweep(common),
        Command::Report { common } => cmd_report(common, stdout),
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    std::fs::create_dir_all(dir)
        .and_then(|_| std::fs::write(dir.join(name), contents))
        .map_err(|e| Error::Config(format!("cannot write {}: {e}", dir.join(name).display())))
}

fn meta(command: &str, scenario: &Scenario) -> Json {
    json!({
        "program": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "preset": scenario.preset,
    })
}

fn parameters_json(scenario: &Scenario) -> Json {
    let map: serde_json::Map<String, Json> = scenario
        .describe()
        .into_iter()
        .map(|(k, v)| (k, json!(v)))
        .collect();
    Json::Object(map)
}

fn finite(x: f64) -> Json {
    if x.is_finite() {
        json!(x)
    } else {
        Json::Null
    }
}

fn extremum(v: &[f64], pick: fn(f64, f64) -> f64, init: f64) -> Json {
    finite(v.iter().cloned().fold(init, pick))
}

fn abs_max(v: &[f64]) -> Json {
    finite(v.iter().map(|x| x.abs()).fold(0.0, f64::max))
}

fn summary_json(scenario: &Scenario, ts: &TimeSeries, unitary: bool) -> Json {
    let final_populations: serde_json::Map<String, Json> = ts
        .labels
        .iter()
        .zip(&ts.populations)
        .map(|(s, p)| {
            (
                format!("P_{}", s.ket()),
                finite(*p.last().unwrap_or(&f64::NAN)),
            )
        })
        .collect();
    json!({
        "mode": if unitary { "unitary" } else { "master" },
        "final_time_us": finite(*ts.times.last().unwrap_or(&f64::NAN)),
        "final_epsilon": finite(ts.final_epsilon()),
        "time_to_epsilon_0.99_us": ts.first_time_reaching(TARGET_EPSILON).map(finite),
        "final_populations": final_populations,
        "diagnostics": {
            "max_trace_drift": abs_max(&ts.trace_drift),
            "max_hermiticity_drift": abs_max(&ts.hermiticity_drift),
            "min_eigenvalue": extremum(&ts.min_eigenvalue, f64::min, f64::INFINITY),
            "min_purity": extremum(&ts.purity, f64::min, f64::INFINITY),
            "max_purity": extremum(&ts.purity, f64::max, f64::NEG_INFINITY),
            "samples": ts.len(),
        },
        "parameters": parameters_json(scenario),
        "meta": meta("evolve", scenario),
    })
}

fn to_pretty(v: &Json) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn cmd_evolve(common: &Common, no_decoherence: bool) -> Result<i32> {
    let mut scenario = common.scenario()?;
    if no_decoherence {
        scenario.decoherence = DecoherenceParams::none();
    }
    let model = scenario.resolved_model()?;
    let grid = scenario.grid.to_grid()?;
    let h = build_hamiltonian(&model)?;
    let rho0 = DensityMatrix::racemic(model.dim());
    let unitary = !scenario.decoherence.is_dissipative(model.dim());
    let ts = if unitary {
        evolve_unitary(&rho0, &h, &grid)?
    } else {
        evolve_master(&rho0, &h, &scenario.decoherence, &grid)?
    };
    write_file(&common.out, "timeseries.csv", &timeseries_csv(&ts))?;
    write_file(
        &common.out,
        "summary.json",
        &to_pretty(&summary_json(&scenario, &ts, unitary)),
    )?;
    Ok(EXIT_OK)
}

fn matrix_json(op: &Operator) -> Json {
    let m = op.matrix();
    let part = |f: fn(&crate::hilbert::C64) -> f64| -> Json {
        (0..m.nrows())
            .map(|i| {
                (0..m.ncols())
                    .map(|j| json!(f(&m[(i, j)])))
                    .collect::<Json>()
            })
            .collect()
    };
    json!({ "re": part(|z| z.re), "im": part(|z| z.im) })
}

fn steady_json(scenario: &Scenario, ss: &SteadyState) -> Result<Json> {
    let op = ss.rho.operator();
    let pops = populations(op)?;
    let labels = StateLabel::basis(op.dim());
    let pop_map: serde_json::Map<String, Json> = labels
        .iter()
        .zip(pops)
        .map(|(s, p)| (format!("P_{}", s.ket()), json!(p)))
        .collect();
    let eps = enantiomeric_excess(op).map(finite).unwrap_or(Json::Null);
    Ok(json!({
        "epsilon": eps,
        "residual": ss.residual,
        "null_dim": ss.null_dim,
        "degenerate": ss.degenerate,
        "populations": pop_map,
        "basis": labels.iter().map(|s| s.ket()).collect::<Vec<_>>(),
        "rho": matrix_json(op),
        "parameters": parameters_json(scenario),
    }))
}

fn cmd_steady(common: &Common, allow_degenerate: bool) -> Result<i32> {
    let scenario = common.scenario()?;
    let model = scenario.resolved_model()?;
    let h = build_hamiltonian(&model)?;
    let d = &scenario.decoherence;
    match steady_state(&h, d) {
        Ok(ss) => {
            write_file(
                &common.out,
                "steady.json",
                &to_pretty(&steady_json(&scenario, &ss)?),
            )?;
            Ok(EXIT_OK)
        }
        Err(Error::Degenerate { null_dim }) if allow_degenerate => {
            let grid = scenario.grid.to_grid()?;
            let rho0 = DensityMatrix::racemic(model.dim());
            let ts = if d.is_dissipative(model.dim()) {
                evolve_master(&rho0, &h, d, &grid)?
            } else {
                evolve_unitary(&rho0, &h, &grid)?
            };
            let reference = ts.final_state.expect("evolution keeps the final state");
            let ss = steady_state_projected(&h, d, &reference)?;
            debug_assert_eq!(ss.null_dim, null_dim);
            write_file(
                &common.out,
                "steady.json",
                &to_pretty(&steady_json(&scenario, &ss)?),
            )?;
            Ok(EXIT_OK)
        }
        Err(Error::Degenerate { null_dim }) => {
            let report = json!({
                "epsilon": Json::Null,
                "null_dim": null_dim,
                "degenerate": true,
                "error": Error::Degenerate { null_dim }.to_string(),
                "parameters": parameters_json(&scenario),
            });
            write_file(&common.out, "steady.json", &to_pretty(&report))?;
            Err(Error::Degenerate { null_dim })
        }
        Err(e) => Err(e),
    }
}

fn cmd_sweep(common: &Common) -> Result<i32> {
    let scenario = common.scenario()?;
    let spec = scenario.sweep_spec()?;
    let table = run_sweep(&spec)?;
    write_file(&common.out, "sweep.csv", &sweep_csv(&table))?;
    Ok(EXIT_OK)
}

fn complex_str(z: crate::hilbert::C64, scale: fn(f64) -> f64) -> String {
    format!(
        "{} {:+}i",
        fmt_sig(scale(z.re)),
        fmt_sig(scale(z.im)).parse::<f64>().unwrap_or(f64::NAN)
    )
}

fn cmd_report(common: &Common, out: &mut dyn Write) -> Result<i32> {
    let scenario = common.scenario()?;
    let model = scenario.resolved_model()?;
    let regime = check_selective_condition(&model);
    let eff = frohlich_nakajima_transform(&model)?;
    let id = |x: f64| x;

    let mut text = String::new();
    let mut line = |s: String| {
        text.push_str(&s);
        text.push('\n');
    };
    line(format!(
        "preset: {}",
        scenario.preset.as_deref().unwrap_or("(none)")
    ));
    line("parameters (MHz, phases in rad):".into());
    for (k, v) in scenario.describe() {
        line(format!("  {k:<20} {}", fmt_sig(v)));
    }
    line("regime:".into());
    line(format!(
        "  large_detuning_ok    {}",
        regime.large_detuning_ok
    ));
    line(format!(
        "  |delta|/omega32      {}",
        fmt_sig(regime.delta_over_omega32)
    ));
    line(format!(
        "  |delta|/omega21      {}",
        fmt_sig(regime.delta_over_omega21)
    ));
    line(format!(
        "  omega21/omega31      {}",
        fmt_sig(regime.omega21_over_omega31)
    ));
    line(format!(
        "  phase_residual_rad   {}",
        fmt_sig(regime.phase_residual)
    ));
    line(format!(
        "  omega31_residual_mhz {}",
        fmt_sig(to_mhz(regime.omega31_residual))
    ));
    for w in &regime.rwa_warnings {
        line(format!("  warning: {w}"));
    }
    line("effective parameters:          MHz | rad/us".into());
    for (name, v) in [
        ("lambda", eff.lambda),
        ("lambda_tilde", eff.lambda_tilde),
        ("delta_tilde", eff.delta_tilde),
    ] {
        line(format!(
            "  {name:<20} {} | {}",
            fmt_sig(to_mhz(v)),
            fmt_sig(v)
        ));
    }
    for q in Handedness::BOTH {
        let z = eff.omega_tilde(q);
        line(format!(
            "  omega_tilde_{:<8} {} | {}",
            match q {
                Handedness::L => "L",
                Handedness::R => "R",
            },
            complex_str(z, to_mhz),
            complex_str(z, id)
        ));
    }
    out.write_all(text.as_bytes())
        .map_err(|e| Error::Config(format!("cannot write report: {e}")))?;
    Ok(EXIT_OK)
}
