//! Dissipative part of the master equation and the vectorized Liouvillian.
//!
//! Relaxation channels use the convention
//! `γ (A ρ A† − A†A ρ) + H.c. = γ (2 A ρ A† − A†A ρ − ρ A†A)`,
//! i.e. twice the usual `γ D[A]`. Rates are used exactly as quoted, with no
//! factor of ½ folded in.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{basis_projector, BasisDim, CMatrix, Operator, StateLabel, C64};
use crate::model::{mhz, Handedness};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct DecoherenceParams {
    pub gamma31: f64,
    pub gamma32: f64,
    pub gamma21: f64,
    pub gamma_dephase: f64,
    /// |3⟩ → |4_Q⟩, extended basis only.
    pub gamma34: f64,
    /// |4_Q⟩ → |1_Q⟩, extended basis only.
    pub gamma41: f64,
}

impl DecoherenceParams {
    pub fn none() -> Self {
        Self::default()
    }

    /// γ₃₁ = γ₃₂ = 2π·0.1 MHz, γ₂₁ = γ̃ = 2π·1 MHz.
    pub fn reference() -> Self {
        Self {
            gamma31: mhz(0.1),
            gamma32: mhz(0.1),
            gamma21: mhz(1.0),
            gamma_dephase: mhz(1.0),
            gamma34: 0.0,
            gamma41: 0.0,
        }
    }

    /// γ₃₁ = γ₃₂ = γ₂₁ = γ.
    pub fn uniform(gamma: f64, gamma_dephase: f64) -> Self {
        Self {
            gamma31: gamma,
            gamma32: gamma,
            gamma21: gamma,
            gamma_dephase,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("gamma31", self.gamma31),
            ("gamma32", self.gamma32),
            ("gamma21", self.gamma21),
            ("gamma_dephase", self.gamma_dephase),
            ("gamma34", self.gamma34),
            ("gamma41", self.gamma41),
        ] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "rates must be finite and non-negative",
                });
            }
        }
        Ok(())
    }

    /// Sum of all rates active in the given basis.
    pub fn total_rate(&self, dim: BasisDim) -> f64 {
        let mut total = self.gamma31 + self.gamma32 + self.gamma21 + self.gamma_dephase;
        if dim.is_extended() {
            total += self.gamma34 + self.gamma41;
        }
        total
    }

    pub fn is_dissipative(&self, dim: BasisDim) -> bool {
        self.total_rate(dim) > 0.0
    }
}

/// A population-transfer channel `upper → lower` with jump operator |lower⟩⟨upper|.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Channel {
    pub rate: f64,
    pub lower: StateLabel,
    pub upper: StateLabel,
}

pub fn relaxation_channels(d: &DecoherenceParams) -> Vec<Channel> {
    let mut out = Vec::with_capacity(6);
    for q in Handedness::BOTH {
        out.push(Channel {
            rate: d.gamma21,
            lower: q.ground(),
            upper: q.mediate(),
        });
        out.push(Channel {
            rate: d.gamma31,
            lower: q.ground(),
            upper: StateLabel::E,
        });
        out.push(Channel {
            rate: d.gamma32,
            lower: q.mediate(),
            upper: StateLabel::E,
        });
    }
    out
}

pub fn leakage_channels(d: &DecoherenceParams) -> Vec<Channel> {
    let mut out = Vec::with_capacity(4);
    for q in Handedness::BOTH {
        out.push(Channel {
            rate: d.gamma34,
            lower: q.leakage(),
            upper: StateLabel::E,
        });
        out.push(Channel {
            rate: d.gamma41,
            lower: q.ground(),
            upper: q.leakage(),
        });
    }
    out
}

/// γ (σ_lu ρ σ_ul − σ_ul σ_lu ρ) + H.c., written with explicit projectors.
fn apply_channel(rho: &Operator, ch: &Channel) -> Result<Operator> {
    let dim = rho.dim();
    let down = basis_projector(ch.lower, ch.upper, dim)?;
    let up = basis_projector(ch.upper, ch.lower, dim)?;
    let occupied = &up * &down;
    let gain = &(&down * rho) * &up;
    let loss = &(&occupied * rho) + &(rho * &occupied);
    Ok((&gain.scale(C64::new(2.0, 0.0)) - &loss).scale(C64::new(ch.rate, 0.0)))
}

fn sum_channels(rho: &Operator, channels: &[Channel]) -> Result<Operator> {
    let mut out = Operator::zeros(rho.dim());
    for ch in channels.iter().filter(|c| c.rate != 0.0) {
        out = &out + &apply_channel(rho, ch)?;
    }
    Ok(out)
}

/// Population relaxation |2_Q⟩→|1_Q⟩ (γ₂₁) and |3⟩→|n_Q⟩ (γ₃ₙ).
pub fn apply_relaxation(rho: &Operator, d: &DecoherenceParams) -> Result<Operator> {
    sum_channels(rho, &relaxation_channels(d))
}

/// Pure dephasing: every off-diagonal entry decays at γ̃, populations untouched.
pub fn apply_dephasing(rho: &Operator, gamma_dephase: f64) -> Result<Operator> {
    if !(gamma_dephase.is_finite() && gamma_dephase >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "gamma_dephase",
            value: gamma_dephase,
            reason: "rates must be finite and non-negative",
        });
    }
    let dim = rho.dim();
    let labels = StateLabel::basis(dim);
    let mut out = Operator::zeros(dim);
    for &p in labels {
        let pp = basis_projector(p, p, dim)?;
        for &q in labels.iter().filter(|&&q| q != p) {
            let qq = basis_projector(q, q, dim)?;
            out = &out - &(&(&pp * rho) * &qq);
        }
    }
    Ok(out.scale(C64::new(gamma_dephase, 0.0)))
}

/// Leakage through |4_Q⟩: |3⟩→|4_Q⟩ at γ₃₄, |4_Q⟩→|1_Q⟩ at γ₄₁.
pub fn apply_leakage(rho: &Operator, d: &DecoherenceParams) -> Result<Operator> {
    if !rho.dim().is_extended() {
        return Err(Error::LeakageNeedsExtended);
    }
    sum_channels(rho, &leakage_channels(d))
}

/// The full dissipator L ρ, including leakage in the extended basis.
pub fn apply_dissipator(rho: &Operator, d: &DecoherenceParams) -> Result<Operator> {
    let mut out = &apply_relaxation(rho, d)? + &apply_dephasing(rho, d.gamma_dephase)?;
    if rho.dim().is_extended() {
        out = &out + &apply_leakage(rho, d)?;
    }
    Ok(out)
}

/// −i[H, ρ] + L ρ evaluated directly on matrices.
pub fn apply_generator(h: &Operator, d: &DecoherenceParams, rho: &Operator) -> Result<Operator> {
    h.check_same_dim(rho)?;
    let coherent = h.commutator(rho).scale(C64::new(0.0, -1.0));
    Ok(&coherent + &apply_dissipator(rho, d)?)
}

/// Column-major vectorization.
pub fn vectorize(op: &Operator) -> nalgebra::DVector<C64> {
    let m = op.matrix();
    nalgebra::DVector::from_iterator(m.len(), m.iter().cloned())
}

pub fn unvectorize(v: &nalgebra::DVector<C64>, dim: BasisDim) -> Result<Operator> {
    let n = dim.size();
    if v.len() != n * n {
        return Err(Error::DimMismatch {
            expected: n * n,
            found: v.len(),
        });
    }
    Operator::from_matrix(CMatrix::from_column_slice(n, n, v.as_slice()))
}

/// Generator of the master equation acting on column-major vec(ρ).
#[derive(Debug, Clone, PartialEq)]
pub struct Liouvillian {
    dim: BasisDim,
    matrix: CMatrix,
}

impl Liouvillian {
    pub fn dim(&self) -> BasisDim {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn apply(&self, rho: &Operator) -> Result<Operator> {
        if rho.dim() != self.dim {
            return Err(Error::DimMismatch {
                expected: self.dim.size(),
                found: rho.size(),
            });
        }
        unvectorize(&(&self.matrix * vectorize(rho)), self.dim)
    }

    /// ‖vec(I)† L‖_max; zero for a trace-preserving generator.
    pub fn trace_defect(&self) -> f64 {
        let n = self.dim.size();
        (0..self.matrix.ncols())
            .map(|col| {
                (0..n)
                    .map(|i| self.matrix[(i * n + i, col)])
                    .sum::<C64>()
                    .norm()
            })
            .fold(0.0, f64::max)
    }
}

fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

fn add_channel_superop(l: &mut CMatrix, ch: &Channel, dim: BasisDim) -> Result<()> {
    if ch.rate == 0.0 {
        return Ok(());
    }
    let n = dim.size();
    let id = CMatrix::identity(n, n);
    let a = basis_projector(ch.lower, ch.upper, dim)?.into_matrix();
    let ada = a.adjoint() * &a;
    // vec(AρB) = (Bᵀ ⊗ A) vec(ρ)
    let gain = kron(&a.conjugate(), &a) * C64::new(2.0, 0.0);
    let loss = kron(&id, &ada) + kron(&ada.transpose(), &id);
    *l += (gain - loss) * C64::new(ch.rate, 0.0);
    Ok(())
}

pub fn build_liouvillian(h: &Operator, d: &DecoherenceParams) -> Result<Liouvillian> {
    d.validate()?;
    let dim = h.dim();
    let n = dim.size();
    let id = CMatrix::identity(n, n);
    let hm = h.matrix();
    let mut l = (kron(&id, hm) - kron(&hm.transpose(), &id)) * C64::new(0.0, -1.0);
    for ch in relaxation_channels(d) {
        add_channel_superop(&mut l, &ch, dim)?;
    }
    if dim.is_extended() {
        for ch in leakage_channels(d) {
            add_channel_superop(&mut l, &ch, dim)?;
        }
    }
    if d.gamma_dephase != 0.0 {
        for col in 0..n {
            for row in (0..n).filter(|&r| r != col) {
                let k = col * n + row;
                l[(k, k)] -= C64::new(d.gamma_dephase, 0.0);
            }
        }
    }
    Ok(Liouvillian { dim, matrix: l })
}
