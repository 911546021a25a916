//! Fixed-step time evolution of ρ under the commutator flow or the full
//! master equation.
//!
//! Both drivers share one classic fourth-order Runge-Kutta stepper acting on
//! column-major vec(ρ). The unitary path evaluates −i[H, ρ] with explicit
//! matrix products; the master path multiplies by the dense Liouvillian.

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{hermitian_eigenvalues, BasisDim, DensityMatrix, Operator, StateLabel, C64};
use crate::lindblad::{build_liouvillian, unvectorize, vectorize, DecoherenceParams};
use crate::model::{assemble_parts, build_reduced_hamiltonian, ModelParams};
use crate::observables::enantiomeric_excess;

pub const DEFAULT_DT: f64 = 5e-4;
pub const DEFAULT_SAMPLES: usize = 500;
/// dt · (‖H‖₂ + Σγ) must stay below this.
pub const STABILITY_BOUND: f64 = 0.1;
/// Tolerance for the mid-run physicality check of the master equation.
pub const RUN_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub dt: f64,
    pub sample_every: usize,
}

impl TimeGrid {
    /// Grid with roughly [`DEFAULT_SAMPLES`] evenly spaced records.
    pub fn new(t_start: f64, t_end: f64, dt: f64) -> Result<Self> {
        Self::with_samples(t_start, t_end, dt, DEFAULT_SAMPLES)
    }

    pub fn with_samples(t_start: f64, t_end: f64, dt: f64, samples: usize) -> Result<Self> {
        let mut grid = Self {
            t_start,
            t_end,
            dt,
            sample_every: 1,
        };
        let steps = grid.steps()?;
        grid.sample_every = (steps / samples.max(1)).max(1);
        Ok(grid)
    }

    pub fn steps(&self) -> Result<usize> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if self.t_end.partial_cmp(&self.t_start) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::InvalidGrid(format!(
                "t_end ({}) must exceed t_start ({})",
                self.t_end, self.t_start
            )));
        }
        if self.sample_every == 0 {
            return Err(Error::InvalidGrid("sample_every must be at least 1".into()));
        }
        let exact = (self.t_end - self.t_start) / self.dt;
        let steps = exact.round();
        if (exact - steps).abs() > 1e-6 * steps.max(1.0) {
            return Err(Error::InvalidGrid(format!(
                "span {} is not a whole number of steps of {}",
                self.t_end - self.t_start,
                self.dt
            )));
        }
        Ok(steps as usize)
    }

    pub fn time_at(&self, step: usize) -> f64 {
        self.t_start + step as f64 * self.dt
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeSeries {
    pub labels: Vec<StateLabel>,
    pub times: Vec<f64>,
    /// `populations[k][i]` is the population of `labels[k]` at `times[i]`.
    pub populations: Vec<Vec<f64>>,
    /// NaN where both ground states are empty.
    pub epsilon: Vec<f64>,
    pub trace_drift: Vec<f64>,
    pub hermiticity_drift: Vec<f64>,
    pub min_eigenvalue: Vec<f64>,
    pub purity: Vec<f64>,
    #[serde(skip)]
    pub final_state: Option<Operator>,
}

impl TimeSeries {
    fn new(dim: BasisDim) -> Self {
        let labels = StateLabel::basis(dim).to_vec();
        Self {
            populations: vec![Vec::new(); labels.len()],
            labels,
            times: Vec::new(),
            epsilon: Vec::new(),
            trace_drift: Vec::new(),
            hermiticity_drift: Vec::new(),
            min_eigenvalue: Vec::new(),
            purity: Vec::new(),
            final_state: None,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn population(&self, s: StateLabel) -> Option<&[f64]> {
        self.labels
            .iter()
            .position(|&l| l == s)
            .map(|k| self.populations[k].as_slice())
    }

    pub fn final_epsilon(&self) -> f64 {
        self.epsilon.last().copied().unwrap_or(f64::NAN)
    }

    /// First recorded time with ε ≥ threshold.
    pub fn first_time_reaching(&self, threshold: f64) -> Option<f64> {
        self.epsilon
            .iter()
            .position(|&e| e >= threshold)
            .map(|i| self.times[i])
    }

    fn record(&mut self, t: f64, rho: &Operator) -> Sample {
        let tr = rho.trace();
        let herm = rho.hermiticity_defect();
        let min_eig = hermitian_eigenvalues(rho.matrix())[0];
        let purity = (rho.matrix() * rho.matrix()).trace().re;
        self.times.push(t);
        for (k, &s) in self.labels.iter().enumerate() {
            self.populations[k].push(rho.get(s, s).re);
        }
        self.epsilon
            .push(enantiomeric_excess(rho).unwrap_or(f64::NAN));
        let trace_drift = (tr - C64::new(1.0, 0.0)).norm();
        self.trace_drift.push(trace_drift);
        self.hermiticity_drift.push(herm);
        self.min_eigenvalue.push(min_eig);
        self.purity.push(purity);
        Sample {
            trace_drift,
            hermiticity_drift: herm,
            min_eigenvalue: min_eig,
        }
    }
}

struct Sample {
    trace_drift: f64,
    hermiticity_drift: f64,
    min_eigenvalue: f64,
}

/// Classic RK4 with fixed step on a complex vector.
fn rk4<F, S>(y0: DVector<C64>, grid: &TimeGrid, mut rhs: F, mut sample: S) -> Result<DVector<C64>>
where
    F: FnMut(&DVector<C64>, &mut DVector<C64>),
    S: FnMut(usize, &DVector<C64>) -> Result<()>,
{
    let steps = grid.steps()?;
    let n = y0.len();
    let h = C64::new(grid.dt, 0.0);
    let half = h * 0.5;
    let sixth = h / 6.0;
    let mut y = y0;
    let mut k1 = DVector::zeros(n);
    let mut k2 = DVector::zeros(n);
    let mut k3 = DVector::zeros(n);
    let mut k4 = DVector::zeros(n);
    let mut tmp = DVector::zeros(n);

    sample(0, &y)?;
    for step in 1..=steps {
        rhs(&y, &mut k1);
        tmp.copy_from(&y);
        tmp.axpy(half, &k1, C64::new(1.0, 0.0));
        rhs(&tmp, &mut k2);
        tmp.copy_from(&y);
        tmp.axpy(half, &k2, C64::new(1.0, 0.0));
        rhs(&tmp, &mut k3);
        tmp.copy_from(&y);
        tmp.axpy(h, &k3, C64::new(1.0, 0.0));
        rhs(&tmp, &mut k4);

        k2 += &k3;
        k1.axpy(C64::new(2.0, 0.0), &k2, C64::new(1.0, 0.0));
        k1 += &k4;
        y.axpy(sixth, &k1, C64::new(1.0, 0.0));

        if step % grid.sample_every == 0 || step == steps {
            sample(step, &y)?;
        }
    }
    Ok(y)
}

fn check_stability(dt: f64, h_norm: f64, rate_sum: f64) -> Result<()> {
    let product = dt * (h_norm + rate_sum);
    if product >= STABILITY_BOUND {
        return Err(Error::Unstable {
            product,
            bound: STABILITY_BOUND,
        });
    }
    Ok(())
}

/// −i[H, ρ] on column-major vec(ρ).
fn commutator_rhs(h: &Operator) -> impl FnMut(&DVector<C64>, &mut DVector<C64>) + '_ {
    let n = h.size();
    let hm = h.matrix();
    move |y, out| {
        let rho = y.as_slice();
        let out = out.as_mut_slice();
        for c in 0..n {
            for r in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..n {
                    acc += hm[(r, k)] * rho[c * n + k] - rho[k * n + r] * hm[(k, c)];
                }
                out[c * n + r] = C64::new(acc.im, -acc.re);
            }
        }
    }
}

/// Integrates ρ̇ = −i[H, ρ].
pub fn evolve_unitary(rho0: &DensityMatrix, h: &Operator, grid: &TimeGrid) -> Result<TimeSeries> {
    h.check_same_dim(rho0.operator())?;
    check_stability(grid.dt, h.norm2(), 0.0)?;
    let dim = h.dim();
    let mut series = TimeSeries::new(dim);
    let last = rk4(
        vectorize(rho0.operator()),
        grid,
        commutator_rhs(h),
        |step, y| {
            let rho = unvectorize(y, dim)?;
            series.record(grid.time_at(step), &rho);
            Ok(())
        },
    )?;
    series.final_state = Some(unvectorize(&last, dim)?);
    Ok(series)
}

/// Integrates dρ/dt = −i[H, ρ] + L ρ, aborting if the state leaves the
/// physical set by more than [`RUN_TOL`].
pub fn evolve_master(
    rho0: &DensityMatrix,
    h: &Operator,
    d: &DecoherenceParams,
    grid: &TimeGrid,
) -> Result<TimeSeries> {
    h.check_same_dim(rho0.operator())?;
    d.validate()?;
    let dim = h.dim();
    check_stability(grid.dt, h.norm2(), d.total_rate(dim))?;
    let liouvillian = build_liouvillian(h, d)?;
    let l = liouvillian.matrix();
    let mut series = TimeSeries::new(dim);
    let last = rk4(
        vectorize(rho0.operator()),
        grid,
        |y, out| out.gemv(C64::new(1.0, 0.0), l, y, C64::new(0.0, 0.0)),
        |step, y| {
            let rho = unvectorize(y, dim)?;
            let t = grid.time_at(step);
            let s = series.record(t, &rho);
            if s.trace_drift > RUN_TOL
                || s.hermiticity_drift > RUN_TOL
                || s.min_eigenvalue < -RUN_TOL
            {
                return Err(Error::Unphysical {
                    time: t,
                    detail: format!(
                        "trace drift {:.3e}, hermiticity drift {:.3e}, min eigenvalue {:.3e}",
                        s.trace_drift, s.hermiticity_drift, s.min_eigenvalue
                    ),
                });
            }
            Ok(())
        },
    )?;
    series.final_state = Some(unvectorize(&last, dim)?);
    Ok(series)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeviationReport {
    pub ground_left: f64,
    pub ground_right: f64,
    pub excited: f64,
}

impl DeviationReport {
    pub fn max(&self) -> f64 {
        self.ground_left.max(self.ground_right).max(self.excited)
    }
}

/// Largest population difference over time between the full Hamiltonian and
/// the reduced three-level Hamiltonian, both started from the racemic state.
pub fn compare_full_vs_effective(p: &ModelParams, grid: &TimeGrid) -> Result<DeviationReport> {
    p.check_nonnegative_couplings()?;
    let full = assemble_parts(p).total();
    let reduced = build_reduced_hamiltonian(p)?;
    let rho0 = DensityMatrix::racemic(p.dim());
    let a = evolve_unitary(&rho0, &full, grid)?;
    let b = evolve_unitary(&rho0, &reduced, grid)?;
    let dev = |s: StateLabel| {
        let pa = a.population(s).unwrap_or_default();
        let pb = b.population(s).unwrap_or_default();
        pa.iter()
            .zip(pb)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    };
    Ok(DeviationReport {
        ground_left: dev(StateLabel::GL),
        ground_right: dev(StateLabel::GR),
        excited: dev(StateLabel::E),
    })
}
