//! Double-delta Hamiltonian and its adiabatic-elimination hierarchy.
//!
//! All frequencies are angular, in rad/μs. Use [`mhz`] to convert a linear
//! frequency quoted in MHz.

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{BasisDim, CMatrix, Operator, StateLabel, C64};

/// Linear frequency in MHz to angular frequency in rad/μs.
pub fn mhz(f: f64) -> f64 {
    TAU * f
}

/// Angular frequency in rad/μs back to MHz.
pub fn to_mhz(w: f64) -> f64 {
    w / TAU
}

/// Coupling bound above which the drive is flagged as beyond typical
/// experimentally available strengths (2π·10 MHz).
pub const AVAILABLE_COUPLING_LIMIT: f64 = TAU * 10.0;

/// Minimum ratio for each step of |Δ| ≫ Ω₃₂ ∼ Ω₂₁ ≫ Ω₃₁ to count as satisfied.
pub const LARGE_DETUNING_RATIO: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    /// Δ = Δ₂₁ = −Δ₃₂.
    pub delta: f64,
    pub omega21: f64,
    pub omega32: f64,
    pub omega31: f64,
    /// Loop phase for the left-handed enantiomer; the right-handed one sees φ + π.
    pub phi: f64,
    /// Include the leakage states |4_L⟩, |4_R⟩.
    pub extended: bool,
}

impl ModelParams {
    /// Parameters given as linear frequencies in MHz.
    pub fn from_mhz(delta: f64, omega21: f64, omega32: f64, omega31: f64, phi: f64) -> Self {
        Self {
            delta: mhz(delta),
            omega21: mhz(omega21),
            omega32: mhz(omega32),
            omega31: mhz(omega31),
            phi,
            extended: false,
        }
    }

    /// Δ = 2π·20, Ω₂₁ = Ω₃₂ = 2π·1, Ω₃₁ = 2π·0.05 MHz, φ = 0.
    pub fn reference() -> Self {
        Self::from_mhz(20.0, 1.0, 1.0, 0.05, 0.0)
    }

    pub fn with_phi(mut self, phi: f64) -> Self {
        self.phi = phi;
        self
    }

    pub fn with_extended(mut self, extended: bool) -> Self {
        self.extended = extended;
        self
    }

    pub fn dim(&self) -> BasisDim {
        if self.extended {
            BasisDim::Seven
        } else {
            BasisDim::Five
        }
    }

    /// Ω₃₂Ω₂₁/Δ, the value of Ω₃₁ that makes the left enantiomer dark at φ = 0.
    pub fn selective_omega31(&self) -> Result<f64> {
        self.require_detuning()?;
        Ok(self.omega32 * self.omega21 / self.delta)
    }

    /// Copy with Ω₃₁ re-solved from the selective condition.
    pub fn bound_omega31(mut self) -> Result<Self> {
        self.omega31 = self.selective_omega31()?;
        Ok(self)
    }

    /// φ_Q: φ for L, φ + π for R.
    pub fn phase_factor(&self, q: Handedness) -> C64 {
        let base = C64::from_polar(1.0, self.phi);
        match q {
            Handedness::L => base,
            Handedness::R => -base,
        }
    }

    fn require_detuning(&self) -> Result<()> {
        if self.delta == 0.0 {
            return Err(Error::ZeroDetuning);
        }
        Ok(())
    }

    fn check_finite(&self) -> Result<()> {
        for (name, value) in [
            ("delta", self.delta),
            ("omega21", self.omega21),
            ("omega32", self.omega32),
            ("omega31", self.omega31),
            ("phi", self.phi),
        ] {
            if !value.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be finite",
                });
            }
        }
        Ok(())
    }

    pub(crate) fn check_nonnegative_couplings(&self) -> Result<()> {
        self.check_finite()?;
        for (name, value) in [
            ("omega21", self.omega21),
            ("omega32", self.omega32),
            ("omega31", self.omega31),
        ] {
            if value < 0.0 {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "coupling strengths must be non-negative",
                });
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.check_finite()?;
        for (name, value) in [
            ("omega21", self.omega21),
            ("omega32", self.omega32),
            ("omega31", self.omega31),
        ] {
            if value <= 0.0 {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "coupling strengths must be positive",
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Handedness {
    L,
    R,
}

impl Handedness {
    pub const BOTH: [Handedness; 2] = [Handedness::L, Handedness::R];

    pub fn ground(self) -> StateLabel {
        match self {
            Handedness::L => StateLabel::GL,
            Handedness::R => StateLabel::GR,
        }
    }

    pub fn mediate(self) -> StateLabel {
        match self {
            Handedness::L => StateLabel::ML,
            Handedness::R => StateLabel::MR,
        }
    }

    pub fn leakage(self) -> StateLabel {
        match self {
            Handedness::L => StateLabel::XL,
            Handedness::R => StateLabel::XR,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectiveParams {
    /// Λ = −Ω₃₂²/Δ.
    pub lambda: f64,
    /// Λ̃ = −Ω₂₁²/Δ.
    pub lambda_tilde: f64,
    /// Δ̃ = Δ − Λ − Λ̃.
    pub delta_tilde: f64,
    #[serde(serialize_with = "serialize_complex")]
    pub omega_tilde_l: C64,
    #[serde(serialize_with = "serialize_complex")]
    pub omega_tilde_r: C64,
}

impl EffectiveParams {
    pub fn omega_tilde(&self, q: Handedness) -> C64 {
        match q {
            Handedness::L => self.omega_tilde_l,
            Handedness::R => self.omega_tilde_r,
        }
    }
}

fn serialize_complex<S: serde::Serializer>(z: &C64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(2))?;
    seq.serialize_element(&z.re)?;
    seq.serialize_element(&z.im)?;
    seq.end()
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn add_hermitian_pair(op: &mut Operator, row: StateLabel, col: StateLabel, value: C64) {
    let a = op.get(row, col);
    op.set(row, col, a + value);
    let b = op.get(col, row);
    op.set(col, row, b + value.conj());
}

/// Drive terms of the full Hamiltonian, split into the zeroth-order detuning,
/// the far-detuned couplings and the direct |1_Q⟩-|3⟩ coupling.
#[derive(Debug, Clone)]
pub struct HamiltonianParts {
    pub h0: Operator,
    pub h1: Operator,
    pub h2: Operator,
}

impl HamiltonianParts {
    pub fn total(&self) -> Operator {
        &(&self.h0 + &self.h1) + &self.h2
    }
}

pub(crate) fn assemble_parts(p: &ModelParams) -> HamiltonianParts {
    let dim = p.dim();
    let mut h0 = Operator::zeros(dim);
    let mut h1 = Operator::zeros(dim);
    let mut h2 = Operator::zeros(dim);
    for q in Handedness::BOTH {
        h0.set(q.mediate(), q.mediate(), real(p.delta));
        add_hermitian_pair(&mut h1, q.ground(), q.mediate(), real(p.omega21));
        add_hermitian_pair(&mut h1, q.mediate(), StateLabel::E, real(p.omega32));
        add_hermitian_pair(
            &mut h2,
            q.ground(),
            StateLabel::E,
            p.phase_factor(q) * p.omega31,
        );
    }
    HamiltonianParts { h0, h1, h2 }
}

/// Split Hamiltonian H = H₀ + H₁ + H₂ at the given parameters.
pub fn hamiltonian_parts(p: &ModelParams) -> Result<HamiltonianParts> {
    p.check_nonnegative_couplings()?;
    Ok(assemble_parts(p))
}

/// Interaction-picture Hamiltonian of the double-delta model under the
/// rotating-wave approximation. Leakage states carry no drive.
pub fn build_hamiltonian(p: &ModelParams) -> Result<Operator> {
    p.validate()?;
    Ok(assemble_parts(p).total())
}

/// Anti-Hermitian generator of the Fröhlich-Nakajima transformation,
/// chosen so that [H₀, S] + H₁ = 0.
pub fn build_s_operator(p: &ModelParams) -> Result<Operator> {
    p.check_nonnegative_couplings()?;
    p.require_detuning()?;
    let mut s = Operator::zeros(p.dim());
    for q in Handedness::BOTH {
        let a = real(p.omega21 / p.delta);
        let b = real(p.omega32 / p.delta);
        s.set(q.ground(), q.mediate(), a);
        s.set(q.mediate(), q.ground(), -a);
        s.set(StateLabel::E, q.mediate(), b);
        s.set(q.mediate(), StateLabel::E, -b);
    }
    Ok(s)
}

pub fn frohlich_nakajima_transform(p: &ModelParams) -> Result<EffectiveParams> {
    p.check_nonnegative_couplings()?;
    p.require_detuning()?;
    let lambda = -p.omega32 * p.omega32 / p.delta;
    let lambda_tilde = -p.omega21 * p.omega21 / p.delta;
    let two_photon = p.omega32 * p.omega21 / p.delta;
    Ok(EffectiveParams {
        lambda,
        lambda_tilde,
        delta_tilde: p.delta - lambda - lambda_tilde,
        omega_tilde_l: p.phase_factor(Handedness::L) * p.omega31 - two_photon,
        omega_tilde_r: p.phase_factor(Handedness::R) * p.omega31 - two_photon,
    })
}

fn add_low_block(h: &mut Operator, eff: &EffectiveParams) {
    h.set(StateLabel::E, StateLabel::E, real(2.0 * eff.lambda));
    for q in Handedness::BOTH {
        h.set(q.ground(), q.ground(), real(eff.lambda_tilde));
        add_hermitian_pair(h, q.ground(), StateLabel::E, eff.omega_tilde(q));
    }
}

/// Closed-form second-order transformed Hamiltonian H' ≈ e^{−S} H e^{S}.
///
/// The |2_L⟩⟨2_R| exchange term is +Ω₃₂²/Δ (that is, −Λ), the value produced
/// by H₀ + [H₁, S]/2 + H₂.
pub fn build_transformed_hamiltonian(p: &ModelParams) -> Result<Operator> {
    let eff = frohlich_nakajima_transform(p)?;
    let mut h = Operator::zeros(p.dim());
    for q in Handedness::BOTH {
        h.set(q.mediate(), q.mediate(), real(eff.delta_tilde));
    }
    add_hermitian_pair(&mut h, StateLabel::ML, StateLabel::MR, real(-eff.lambda));
    add_low_block(&mut h, &eff);
    Ok(h)
}

/// Reduced Hamiltonian over {1_L, 1_R, 3} after eliminating the |2_Q⟩
/// block, embedded in the full basis with zero |2_Q⟩ (and |4_Q⟩) rows and
/// columns.
pub fn build_reduced_hamiltonian(p: &ModelParams) -> Result<Operator> {
    let eff = frohlich_nakajima_transform(p)?;
    let mut h = Operator::zeros(p.dim());
    add_low_block(&mut h, &eff);
    Ok(h)
}

/// Indices of the block retained by adiabatic elimination.
pub const RETAINED: [StateLabel; 3] = [StateLabel::GL, StateLabel::GR, StateLabel::E];

/// The 3×3 block of an operator over {1_L, 1_R, 3}.
pub fn reduced_block(op: &Operator) -> CMatrix {
    CMatrix::from_fn(3, 3, |r, c| op.get(RETAINED[r], RETAINED[c]))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeReport {
    pub large_detuning_ok: bool,
    /// |Δ|/Ω₃₂.
    pub delta_over_omega32: f64,
    /// |Δ|/Ω₂₁.
    pub delta_over_omega21: f64,
    /// Ω₂₁/Ω₃₁.
    pub omega21_over_omega31: f64,
    /// |φ| folded into [0, π].
    pub phase_residual: f64,
    /// |Ω₃₁ − Ω₃₂Ω₂₁/Δ| in rad/μs; infinite when Δ = 0.
    pub omega31_residual: f64,
    pub rwa_warnings: Vec<String>,
}

impl RegimeReport {
    pub fn selective(&self, tol: f64) -> bool {
        self.phase_residual <= tol && self.omega31_residual <= tol
    }
}

/// Distance of φ from the nearest multiple of 2π.
pub fn wrapped_phase(phi: f64) -> f64 {
    let r = phi.rem_euclid(TAU);
    if r > PI {
        TAU - r
    } else {
        r
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

pub fn check_selective_condition(p: &ModelParams) -> RegimeReport {
    let delta_over_omega32 = ratio(p.delta.abs(), p.omega32);
    let delta_over_omega21 = ratio(p.delta.abs(), p.omega21);
    let omega21_over_omega31 = ratio(p.omega21, p.omega31);
    let large_detuning_ok = [delta_over_omega32, delta_over_omega21, omega21_over_omega31]
        .iter()
        .all(|&r| r >= LARGE_DETUNING_RATIO);
    let omega31_residual = match p.selective_omega31() {
        Ok(target) => (p.omega31 - target).abs(),
        Err(_) => f64::INFINITY,
    };
    let mut rwa_warnings = Vec::new();
    for (name, value) in [
        ("omega21", p.omega21),
        ("omega32", p.omega32),
        ("omega31", p.omega31),
    ] {
        if value > AVAILABLE_COUPLING_LIMIT {
            rwa_warnings.push(format!(
                "{name} = 2pi x {:.6} MHz exceeds the typical available coupling of 2pi x 10 MHz",
                to_mhz(value)
            ));
        }
    }
    if p.delta == 0.0 {
        rwa_warnings.push("delta = 0: effective parameters are singular".to_string());
    }
    RegimeReport {
        large_detuning_ok,
        delta_over_omega32,
        delta_over_omega21,
        omega21_over_omega31,
        phase_residual: wrapped_phase(p.phi),
        omega31_residual,
        rwa_warnings,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::swap_chirality;
    use StateLabel::*;

    const TIGHT: f64 = 1e-12;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn reference_couplings_carry_chirality_sign() {
        let h = build_hamiltonian(&ModelParams::reference()).unwrap();
        let w = mhz(0.05);
        assert!((h.get(GL, E) - C64::new(w, 0.0)).norm() < TIGHT);
        assert!((h.get(GR, E) - C64::new(-w, 0.0)).norm() < TIGHT);
        assert!(close(h.get(ML, ML).re, mhz(20.0), TIGHT));
        assert!(close(h.get(GL, ML).re, mhz(1.0), TIGHT));
        assert!(close(h.get(MR, E).re, mhz(1.0), TIGHT));
        assert!(h.get(GL, GR).norm() == 0.0);
        assert!(h.get(ML, MR).norm() == 0.0);
        assert!(h.is_hermitian(0.0));
    }

    #[test]
    fn vanishing_drive_gives_zero_matrix() {
        let p = ModelParams::from_mhz(0.0, 1e-300, 1e-300, 1e-300, 0.0);
        let h = build_hamiltonian(&p).unwrap();
        assert!(h.max_abs() < 1e-290);
    }

    #[test]
    fn nonpositive_coupling_rejected() {
        let mut p = ModelParams::reference();
        p.omega21 = 0.0;
        assert!(matches!(
            build_hamiltonian(&p),
            Err(Error::InvalidParameter {
                name: "omega21",
                ..
            })
        ));
        p.omega21 = -1.0;
        assert!(build_hamiltonian(&p).is_err());
    }

    #[test]
    fn mirror_phase_matches_swapped_hamiltonian() {
        let p = ModelParams::reference();
        let h0 = build_hamiltonian(&p).unwrap();
        let hpi = build_hamiltonian(&p.with_phi(PI)).unwrap();
        assert!((&swap_chirality(&h0) - &hpi).max_abs() < 1e-15);
    }

    #[test]
    fn extended_hamiltonian_embeds_five_level_block() {
        let p = ModelParams::reference();
        let h5 = build_hamiltonian(&p).unwrap();
        let h7 = build_hamiltonian(&p.with_extended(true)).unwrap();
        assert_eq!(h7.size(), 7);
        for &r in StateLabel::basis(BasisDim::Five) {
            for &c in StateLabel::basis(BasisDim::Five) {
                assert_eq!(h5.get(r, c), h7.get(r, c));
            }
        }
        for x in [XL, XR] {
            for &s in StateLabel::basis(BasisDim::Seven) {
                assert_eq!(h7.get(x, s).norm(), 0.0);
                assert_eq!(h7.get(s, x).norm(), 0.0);
            }
        }
    }

    #[test]
    fn s_operator_is_anti_hermitian_and_kills_first_order() {
        let p = ModelParams::reference();
        let s = build_s_operator(&p).unwrap();
        assert!((&s.adjoint() + &s).max_abs() == 0.0);
        let parts = hamiltonian_parts(&p).unwrap();
        let residual = &parts.h0.commutator(&s) + &parts.h1;
        assert!(residual.max_abs() <= 1e-12);
    }

    #[test]
    fn s_operator_vanishes_without_far_detuned_couplings() {
        let mut p = ModelParams::reference();
        p.omega21 = 0.0;
        p.omega32 = 0.0;
        assert_eq!(build_s_operator(&p).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn zero_detuning_is_singular() {
        let mut p = ModelParams::reference();
        p.delta = 0.0;
        assert_eq!(build_s_operator(&p), Err(Error::ZeroDetuning));
        assert_eq!(frohlich_nakajima_transform(&p), Err(Error::ZeroDetuning));
        assert!(build_transformed_hamiltonian(&p).is_err());
        assert!(build_reduced_hamiltonian(&p).is_err());
    }

    #[test]
    fn reference_effective_couplings() {
        let p = ModelParams::reference();
        let eff = frohlich_nakajima_transform(&p).unwrap();
        assert!(eff.omega_tilde_l.norm() < TIGHT);
        assert!((eff.omega_tilde_r - C64::new(-2.0 * mhz(0.05), 0.0)).norm() < TIGHT);
        // Λ = Λ̃ = −(2π)²/(2π·20) = −2π·0.05
        assert!(close(eff.lambda, -mhz(0.05), TIGHT));
        assert!(close(eff.lambda_tilde, -mhz(0.05), TIGHT));
        assert!(close(eff.delta_tilde, mhz(20.1), TIGHT));
    }

    #[test]
    fn mirrored_phase_swaps_effective_couplings() {
        let p = ModelParams::reference().with_phi(PI);
        let eff = frohlich_nakajima_transform(&p).unwrap();
        assert!(eff.omega_tilde_r.norm() < TIGHT);
        assert!((eff.omega_tilde_l - C64::new(-2.0 * mhz(0.05), 0.0)).norm() < TIGHT);
    }

    #[test]
    fn effective_coupling_formula_is_recomputable() {
        let p = ModelParams::from_mhz(-13.0, 0.7, 1.9, 0.2, 0.83);
        let eff = frohlich_nakajima_transform(&p).unwrap();
        for q in Handedness::BOTH {
            let phase = match q {
                Handedness::L => p.phi,
                Handedness::R => p.phi + PI,
            };
            let want = C64::from_polar(p.omega31, phase) - p.omega32 * p.omega21 / p.delta;
            assert!((eff.omega_tilde(q) - want).norm() < 1e-12);
        }
    }

    #[test]
    fn transformed_hamiltonian_entries() {
        let p = ModelParams::reference();
        let h = build_transformed_hamiltonian(&p).unwrap();
        assert!(h.is_hermitian(0.0));
        // +Ω₃₂²/Δ = 2π·0.05
        assert!(close(h.get(ML, MR).re, mhz(0.05), TIGHT));
        assert!(close(h.get(E, E).re, -2.0 * mhz(0.05), TIGHT));
        assert!(close(h.get(MR, MR).re, mhz(20.1), TIGHT));
    }

    #[test]
    fn reduced_hamiltonian_under_selective_condition() {
        let p = ModelParams::reference();
        let h = build_reduced_hamiltonian(&p).unwrap();
        assert!(h.get(GL, E).norm() < TIGHT);
        assert!((h.get(GR, E) - C64::new(-2.0 * p.omega31, 0.0)).norm() < TIGHT);
        // |1_L⟩ is an eigenvector with eigenvalue Λ̃
        let block = reduced_block(&h);
        let v = nalgebra::DVector::from_vec(vec![real(1.0), real(0.0), real(0.0)]);
        let hv = &block * &v;
        let lambda_tilde = -mhz(1.0) * mhz(1.0) / mhz(20.0);
        assert!((hv - v * real(lambda_tilde)).norm() < TIGHT);
        for m in [ML, MR] {
            for s in RETAINED {
                assert_eq!(h.get(m, s).norm(), 0.0);
            }
        }
    }

    #[test]
    fn generic_phase_couples_both_grounds() {
        let p = ModelParams::reference().with_phi(0.3);
        let h = build_reduced_hamiltonian(&p).unwrap();
        assert!(h.get(GL, E).norm() > 1e-3);
        assert!(h.get(GR, E).norm() > 1e-3);
    }

    #[test]
    fn regime_report_for_reference_parameters() {
        let r = check_selective_condition(&ModelParams::reference());
        assert!(r.large_detuning_ok);
        assert!(close(r.phase_residual, 0.0, 0.0));
        assert!(r.omega31_residual < 1e-15);
        assert!(close(r.delta_over_omega32, 20.0, 1e-12));
        assert!(close(r.delta_over_omega21, 20.0, 1e-12));
        assert!(close(r.omega21_over_omega31, 20.0, 1e-12));
        assert!(r.rwa_warnings.is_empty());
    }

    #[test]
    fn omega31_residual_is_absolute_difference() {
        let p = ModelParams::from_mhz(20.0, 1.0, 1.0, 0.06, 0.0);
        let r = check_selective_condition(&p);
        assert!(close(r.omega31_residual, mhz(0.01), 1e-12));
    }

    #[test]
    fn strong_coupling_raises_warning() {
        let p = ModelParams::from_mhz(20.0, 50.0, 1.0, 0.05, 0.0);
        let r = check_selective_condition(&p);
        assert_eq!(r.rwa_warnings.len(), 1);
        assert!(r.rwa_warnings[0].contains("omega21"));
        assert!(!r.large_detuning_ok);
    }

    #[test]
    fn phase_residual_wraps() {
        assert!(close(wrapped_phase(TAU - 0.1), 0.1, 1e-12));
        assert!(close(wrapped_phase(-0.2), 0.2, 1e-12));
        assert!(close(wrapped_phase(PI), PI, 1e-12));
    }

    #[test]
    fn binding_solves_selective_condition() {
        let p = ModelParams::from_mhz(57.0, 1.0, 1.0, 0.3, 0.0)
            .bound_omega31()
            .unwrap();
        assert!(check_selective_condition(&p).omega31_residual <= 1e-12);
        let eff = frohlich_nakajima_transform(&p).unwrap();
        assert!(eff.omega_tilde_l.norm() < 1e-12);
    }
}
