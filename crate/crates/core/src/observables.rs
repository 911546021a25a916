//! Populations and enantiomeric excess.

use crate::error::{Error, Result};
use crate::hilbert::{Operator, StateLabel};

/// Imaginary residue below which a diagonal entry is accepted as real.
pub const IMAG_RESIDUE_LIMIT: f64 = 1e-10;

/// Ground-state population below which ε is undefined.
pub const EXCESS_DENOMINATOR_FLOOR: f64 = 1e-12;

pub fn population(rho: &Operator, s: StateLabel) -> Result<f64> {
    if !s.in_basis(rho.dim()) {
        return Err(Error::LabelOutsideBasis {
            label: s,
            dim: rho.size(),
        });
    }
    let z = rho.get(s, s);
    if z.im.abs() > IMAG_RESIDUE_LIMIT {
        return Err(Error::ComplexPopulation {
            label: s,
            residue: z.im.abs(),
        });
    }
    Ok(z.re)
}

/// All populations in basis order.
pub fn populations(rho: &Operator) -> Result<Vec<f64>> {
    StateLabel::basis(rho.dim())
        .iter()
        .map(|&s| population(rho, s))
        .collect()
}

/// ε = |P₁L − P₁R| / (P₁L + P₁R).
pub fn enantiomeric_excess(rho: &Operator) -> Result<f64> {
    let left = population(rho, StateLabel::GL)?;
    let right = population(rho, StateLabel::GR)?;
    excess_from_populations(left, right)
}

pub fn excess_from_populations(left: f64, right: f64) -> Result<f64> {
    let total = left + right;
    if total <= EXCESS_DENOMINATOR_FLOOR {
        return Err(Error::UndefinedExcess(total));
    }
    Ok((left - right).abs() / total)
}
