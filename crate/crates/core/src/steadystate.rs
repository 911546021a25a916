//! Stationary states from the null space of the Liouvillian.

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{validate_operator, DensityMatrix, Operator, C64};
use crate::lindblad::{build_liouvillian, unvectorize, vectorize, DecoherenceParams, Liouvillian};
use crate::model::{build_hamiltonian, ModelParams};
use crate::observables::enantiomeric_excess;

/// Singular values below this fraction of the largest span the null space.
pub const NULL_SPACE_RTOL: f64 = 1e-10;
/// Validity tolerance for the extracted steady state.
pub const STEADY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    pub rho: DensityMatrix,
    /// ‖L vec(ρ_ss)‖_max.
    pub residual: f64,
    pub null_dim: usize,
    /// True only for results of [`steady_state_projected`] on a degenerate generator.
    pub degenerate: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct NullSpace {
    pub singular_values: Vec<f64>,
    pub threshold: f64,
    #[serde(skip)]
    pub basis: Vec<DVector<C64>>,
}

impl NullSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// Right null space of the Liouvillian by SVD.
pub fn null_space(l: &Liouvillian) -> NullSpace {
    let svd = l.matrix().clone().svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let singular_values: Vec<f64> = svd.singular_values.iter().cloned().collect();
    let largest = singular_values.iter().cloned().fold(0.0, f64::max);
    let threshold = NULL_SPACE_RTOL * largest;
    let basis = singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s < threshold || largest == 0.0)
        .map(|(i, _)| v_t.row(i).adjoint())
        .collect();
    NullSpace {
        singular_values,
        threshold,
        basis,
    }
}

fn physical_from_vector(v: &DVector<C64>, l: &Liouvillian) -> Result<Operator> {
    let raw = unvectorize(v, l.dim())?;
    let tr = raw.trace();
    if tr.norm() < 1e-12 {
        return Err(Error::NoPhysicalSteadyState(
            "null vector is traceless".to_string(),
        ));
    }
    let scaled = raw.scale(tr.inv());
    let herm = (&scaled + &scaled.adjoint()).scale(C64::new(0.5, 0.0));
    let tr = herm.trace();
    Ok(herm.scale(tr.inv()))
}

fn finish(
    rho: Operator,
    l: &Liouvillian,
    null_dim: usize,
    degenerate: bool,
) -> Result<SteadyState> {
    let report = validate_operator(&rho, STEADY_TOL);
    if !report.passed {
        return Err(Error::NoPhysicalSteadyState(report.to_string()));
    }
    let residual = l.apply(&rho)?.max_abs();
    Ok(SteadyState {
        rho: DensityMatrix::new_unchecked(rho),
        residual,
        null_dim,
        degenerate,
    })
}

/// Unique steady state of −i[H, ρ] + L ρ = 0.
///
/// A null space of dimension other than one is reported as
/// [`Error::Degenerate`].
pub fn steady_state(h: &Operator, d: &DecoherenceParams) -> Result<SteadyState> {
    let l = build_liouvillian(h, d)?;
    steady_state_of(&l)
}

pub fn steady_state_of(l: &Liouvillian) -> Result<SteadyState> {
    let ns = null_space(l);
    if ns.dim() != 1 {
        return Err(Error::Degenerate { null_dim: ns.dim() });
    }
    let rho = physical_from_vector(&ns.basis[0], l)?;
    finish(rho, l, 1, false)
}

/// Steady state closest to `reference` (typically a long-time integrated
/// state) within the null space. Works for any null-space dimension ≥ 1.
pub fn steady_state_projected(
    h: &Operator,
    d: &DecoherenceParams,
    reference: &Operator,
) -> Result<SteadyState> {
    let l = build_liouvillian(h, d)?;
    let ns = null_space(&l);
    if ns.dim() == 0 {
        return Err(Error::Degenerate { null_dim: 0 });
    }
    // The SVD basis is orthonormal, so the projection is Σ v v† r.
    let r = vectorize(reference);
    let mut proj = DVector::zeros(r.len());
    for v in &ns.basis {
        let coeff = v.dotc(&r);
        proj.axpy(coeff, v, C64::new(1.0, 0.0));
    }
    let rho = physical_from_vector(&proj, &l)?;
    finish(rho, &l, ns.dim(), ns.dim() > 1)
}

/// ε of the steady state for the given model.
pub fn steady_epsilon(p: &ModelParams, d: &DecoherenceParams) -> Result<f64> {
    let h = build_hamiltonian(p)?;
    let ss = steady_state(&h, d)?;
    enantiomeric_excess(ss.rho.operator())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{swap_chirality, validate_density, BasisDim, StateLabel};
    use crate::model::mhz;
    use std::f64::consts::PI;

    #[test]
    fn reference_steady_state_is_physical_with_small_residual() {
        let h = build_hamiltonian(&ModelParams::reference()).unwrap();
        let ss = steady_state(&h, &DecoherenceParams::reference()).unwrap();
        assert!(ss.residual <= 1e-9);
        assert_eq!(ss.null_dim, 1);
        assert!(validate_density(&ss.rho, 1e-8).passed);
    }

    #[test]
    fn decoupled_blocks_are_degenerate() {
        let h = Operator::zeros(BasisDim::Five);
        let d = DecoherenceParams {
            gamma31: mhz(0.1),
            ..Default::default()
        };
        match steady_state(&h, &d) {
            Err(Error::Degenerate { null_dim }) => assert!(null_dim > 1),
            other => panic!("expected degeneracy, got {other:?}"),
        }
    }

    #[test]
    fn no_dissipation_is_degenerate() {
        let h = build_hamiltonian(&ModelParams::reference()).unwrap();
        assert!(matches!(
            steady_state(&h, &DecoherenceParams::none()),
            Err(Error::Degenerate { .. })
        ));
    }

    #[test]
    fn projection_override_picks_reference_component() {
        let h = Operator::zeros(BasisDim::Five);
        let d = DecoherenceParams {
            gamma31: mhz(0.1),
            ..Default::default()
        };
        let reference = DensityMatrix::racemic(BasisDim::Five);
        let ss = steady_state_projected(&h, &d, reference.operator()).unwrap();
        assert!(ss.degenerate);
        assert!(ss.null_dim > 1);
        assert!((&ss.rho.operator().clone() - reference.operator()).max_abs() < 1e-12);
    }

    #[test]
    fn mirror_phase_mirrors_steady_state() {
        let d = DecoherenceParams::reference();
        let a = steady_state(&build_hamiltonian(&ModelParams::reference()).unwrap(), &d).unwrap();
        let b = steady_state(
            &build_hamiltonian(&ModelParams::reference().with_phi(PI)).unwrap(),
            &d,
        )
        .unwrap();
        let diff = &swap_chirality(a.rho.operator()) - b.rho.operator();
        assert!(diff.max_abs() <= 1e-9);
    }

    #[test]
    fn right_handed_state_dominates_at_phi_zero() {
        let eps =
            steady_epsilon(&ModelParams::reference(), &DecoherenceParams::reference()).unwrap();
        assert!(eps > 0.98);
        let h = build_hamiltonian(&ModelParams::reference()).unwrap();
        let ss = steady_state(&h, &DecoherenceParams::reference()).unwrap();
        let op = ss.rho.operator();
        assert!(
            op.get(StateLabel::GL, StateLabel::GL).re > op.get(StateLabel::GR, StateLabel::GR).re
        );
    }
}
