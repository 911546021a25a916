//! Basis labels, dense operators and density matrices for the 5-level
//! double-delta system and its 7-level leakage extension.
//!
//! Basis order is fixed as `[1_L, 1_R, 2_L, 2_R, 3, 4_L, 4_R]`. The chiral
//! partners sit next to each other so that mirror symmetry is the product of
//! the transpositions (0 1)(2 3)(5 6).

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const POSITIVITY_FLOOR: f64 = -1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Chirality {
    Left,
    Right,
    Achiral,
}

impl Chirality {
    pub fn mirror(self) -> Self {
        match self {
            Chirality::Left => Chirality::Right,
            Chirality::Right => Chirality::Left,
            Chirality::Achiral => Chirality::Achiral,
        }
    }
}

/// One of the working states.
///
/// `G` is the chiral ground manifold |1_Q⟩, `M` the mediate-energy states
/// |2_Q⟩, `E` the achiral excited state |3⟩ and `X` the leakage states |4_Q⟩.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StateLabel {
    GL,
    GR,
    ML,
    MR,
    E,
    XL,
    XR,
}

impl StateLabel {
    pub const ALL: [StateLabel; 7] = [
        StateLabel::GL,
        StateLabel::GR,
        StateLabel::ML,
        StateLabel::MR,
        StateLabel::E,
        StateLabel::XL,
        StateLabel::XR,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn chirality(self) -> Chirality {
        match self {
            StateLabel::GL | StateLabel::ML | StateLabel::XL => Chirality::Left,
            StateLabel::GR | StateLabel::MR | StateLabel::XR => Chirality::Right,
            StateLabel::E => Chirality::Achiral,
        }
    }

    /// Mirror image under L <-> R.
    pub fn swap(self) -> Self {
        match self {
            StateLabel::GL => StateLabel::GR,
            StateLabel::GR => StateLabel::GL,
            StateLabel::ML => StateLabel::MR,
            StateLabel::MR => StateLabel::ML,
            StateLabel::E => StateLabel::E,
            StateLabel::XL => StateLabel::XR,
            StateLabel::XR => StateLabel::XL,
        }
    }

    pub fn in_basis(self, dim: BasisDim) -> bool {
        self.index() < dim.size()
    }

    /// Labels present in a basis of the given dimension, in matrix order.
    pub fn basis(dim: BasisDim) -> &'static [StateLabel] {
        &Self::ALL[..dim.size()]
    }

    /// Ket notation used in reports and column headers.
    pub fn ket(self) -> &'static str {
        match self {
            StateLabel::GL => "1L",
            StateLabel::GR => "1R",
            StateLabel::ML => "2L",
            StateLabel::MR => "2R",
            StateLabel::E => "3",
            StateLabel::XL => "4L",
            StateLabel::XR => "4R",
        }
    }
}

impl fmt::Display for StateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{}>", self.ket())
    }
}

impl serde::Serialize for StateLabel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.ket())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisDim {
    Five,
    Seven,
}

impl BasisDim {
    pub fn size(self) -> usize {
        match self {
            BasisDim::Five => 5,
            BasisDim::Seven => 7,
        }
    }

    pub fn from_size(n: usize) -> Result<Self> {
        match n {
            5 => Ok(BasisDim::Five),
            7 => Ok(BasisDim::Seven),
            other => Err(Error::UnsupportedDim(other)),
        }
    }

    pub fn is_extended(self) -> bool {
        self == BasisDim::Seven
    }
}

/// Dense complex operator on the 5- or 7-level basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    dim: BasisDim,
    matrix: CMatrix,
}

impl Operator {
    pub fn zeros(dim: BasisDim) -> Self {
        let n = dim.size();
        Self {
            dim,
            matrix: CMatrix::zeros(n, n),
        }
    }

    pub fn identity(dim: BasisDim) -> Self {
        let n = dim.size();
        Self {
            dim,
            matrix: CMatrix::identity(n, n),
        }
    }

    pub fn from_matrix(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        let dim = BasisDim::from_size(matrix.nrows())?;
        Ok(Self { dim, matrix })
    }

    /// Diagonal operator from real entries.
    pub fn diagonal(values: &[f64]) -> Result<Self> {
        let dim = BasisDim::from_size(values.len())?;
        let mut op = Self::zeros(dim);
        for (i, &v) in values.iter().enumerate() {
            op.matrix[(i, i)] = C64::new(v, 0.0);
        }
        Ok(op)
    }

    pub fn dim(&self) -> BasisDim {
        self.dim
    }

    pub fn size(&self) -> usize {
        self.dim.size()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn get(&self, row: StateLabel, col: StateLabel) -> C64 {
        self.matrix[(row.index(), col.index())]
    }

    /// Sets a single entry; panics if a label is outside the basis.
    pub fn set(&mut self, row: StateLabel, col: StateLabel, value: C64) {
        self.matrix[(row.index(), col.index())] = value;
    }

    pub fn adjoint(&self) -> Self {
        Self {
            dim: self.dim,
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            dim: self.dim,
            matrix: &self.matrix * s,
        }
    }

    pub fn commutator(&self, other: &Self) -> Self {
        Self {
            dim: self.dim,
            matrix: &self.matrix * &other.matrix - &other.matrix * &self.matrix,
        }
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.matrix)
    }

    /// Largest entrywise deviation from the adjoint.
    pub fn hermiticity_defect(&self) -> f64 {
        max_abs(&(&self.matrix - self.matrix.adjoint()))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    /// Spectral norm.
    pub fn norm2(&self) -> f64 {
        self.matrix
            .clone()
            .singular_values()
            .iter()
            .cloned()
            .fold(0.0, f64::max)
    }

    pub fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimMismatch {
                expected: self.size(),
                found: other.size(),
            });
        }
        Ok(())
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator {
            dim: self.dim,
            matrix: &self.matrix + &rhs.matrix,
        }
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        Operator {
            dim: self.dim,
            matrix: &self.matrix - &rhs.matrix,
        }
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        Operator {
            dim: self.dim,
            matrix: &self.matrix * &rhs.matrix,
        }
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        Operator {
            dim: self.dim,
            matrix: -&self.matrix,
        }
    }
}

pub(crate) fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub(crate) fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let herm = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let mut ev: Vec<f64> = SymmetricEigen::new(herm)
        .eigenvalues
        .iter()
        .cloned()
        .collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// σ_pq = |p⟩⟨q|.
pub fn basis_projector(p: StateLabel, q: StateLabel, dim: BasisDim) -> Result<Operator> {
    for label in [p, q] {
        if !label.in_basis(dim) {
            return Err(Error::LabelOutsideBasis {
                label,
                dim: dim.size(),
            });
        }
    }
    let mut op = Operator::zeros(dim);
    op.set(p, q, C64::new(1.0, 0.0));
    Ok(op)
}

/// Conjugation P·A·P by the L <-> R permutation.
pub fn swap_chirality(a: &Operator) -> Operator {
    let labels = StateLabel::basis(a.dim);
    let mut out = Operator::zeros(a.dim);
    for &r in labels {
        for &c in labels {
            out.set(r.swap(), c.swap(), a.get(r, c));
        }
    }
    out
}

/// A Hermitian, unit-trace, positive semidefinite operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    op: Operator,
}

impl DensityMatrix {
    /// Validates against the default tolerances.
    pub fn new(op: Operator) -> Result<Self> {
        let report = validate_operator(&op, HERMITICITY_TOL);
        if report.hermiticity_defect > HERMITICITY_TOL
            || report.trace_defect > TRACE_TOL
            || report.min_eigenvalue < POSITIVITY_FLOOR
        {
            return Err(Error::Unphysical {
                time: f64::NAN,
                detail: report.to_string(),
            });
        }
        Ok(Self { op })
    }

    /// Wraps an operator without checking; used for intermediate states
    /// that are validated separately.
    pub fn new_unchecked(op: Operator) -> Self {
        Self { op }
    }

    /// Pure state |s⟩⟨s|.
    pub fn pure(s: StateLabel, dim: BasisDim) -> Result<Self> {
        Ok(Self {
            op: basis_projector(s, s, dim)?,
        })
    }

    /// I/dim.
    pub fn maximally_mixed(dim: BasisDim) -> Self {
        let n = dim.size() as f64;
        Self {
            op: Operator::identity(dim).scale(C64::new(1.0 / n, 0.0)),
        }
    }

    /// (|1_L⟩⟨1_L| + |1_R⟩⟨1_R|)/2.
    pub fn racemic(dim: BasisDim) -> Self {
        let mut op = Operator::zeros(dim);
        op.set(StateLabel::GL, StateLabel::GL, C64::new(0.5, 0.0));
        op.set(StateLabel::GR, StateLabel::GR, C64::new(0.5, 0.0));
        Self { op }
    }

    pub fn operator(&self) -> &Operator {
        &self.op
    }

    pub fn into_operator(self) -> Operator {
        self.op
    }

    pub fn dim(&self) -> BasisDim {
        self.op.dim()
    }
}

impl AsRef<Operator> for DensityMatrix {
    fn as_ref(&self) -> &Operator {
        &self.op
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidityReport {
    pub hermiticity_defect: f64,
    pub trace_defect: f64,
    pub min_eigenvalue: f64,
    pub tol: f64,
    pub passed: bool,
}

impl fmt::Display for ValidityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} (hermiticity defect {:.3e}, trace defect {:.3e}, min eigenvalue {:.3e}, tol {:.1e})",
            if self.passed { "valid" } else { "invalid" },
            self.hermiticity_defect,
            self.trace_defect,
            self.min_eigenvalue,
            self.tol
        )
    }
}

/// Report-only validity check of a density matrix.
pub fn validate_density(rho: &DensityMatrix, tol: f64) -> ValidityReport {
    validate_operator(rho.operator(), tol)
}

pub fn validate_operator(op: &Operator, tol: f64) -> ValidityReport {
    let hermiticity_defect = op.hermiticity_defect();
    let trace_defect = (op.trace() - C64::new(1.0, 0.0)).norm();
    let min_eigenvalue = op.hermitian_eigenvalues()[0];
    let passed = hermiticity_defect <= tol && trace_defect <= tol && min_eigenvalue >= -tol;
    ValidityReport {
        hermiticity_defect,
        trace_defect,
        min_eigenvalue,
        tol,
        passed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use StateLabel::*;

    fn one() -> C64 {
        C64::new(1.0, 0.0)
    }

    #[test]
    fn projector_ground_ground() {
        let p = basis_projector(GL, GL, BasisDim::Five).unwrap();
        let expected = Operator::diagonal(&[1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(p, expected);
    }

    #[test]
    fn projector_off_diagonal_position() {
        let p = basis_projector(GR, E, BasisDim::Five).unwrap();
        for r in 0..5 {
            for c in 0..5 {
                let want = if (r, c) == (1, 4) {
                    one()
                } else {
                    C64::default()
                };
                assert_eq!(p.matrix()[(r, c)], want);
            }
        }
    }

    #[test]
    fn projector_rejects_leakage_label_in_five_levels() {
        let err = basis_projector(XL, GL, BasisDim::Five).unwrap_err();
        assert!(err.to_string().contains("label outside basis"));
        assert!(basis_projector(XL, GL, BasisDim::Seven).is_ok());
    }

    #[test]
    fn projector_adjoint_swaps_indices() {
        for dim in [BasisDim::Five, BasisDim::Seven] {
            for &p in StateLabel::basis(dim) {
                for &q in StateLabel::basis(dim) {
                    let a = basis_projector(p, q, dim).unwrap();
                    let b = basis_projector(q, p, dim).unwrap();
                    assert_eq!(a.adjoint(), b);
                }
            }
        }
    }

    #[test]
    fn labels_have_one_achiral_state_and_swap_is_involution() {
        let achiral: Vec<_> = StateLabel::ALL
            .iter()
            .filter(|s| s.chirality() == Chirality::Achiral)
            .collect();
        assert_eq!(achiral, vec![&E]);
        for s in StateLabel::ALL {
            assert_eq!(s.swap().swap(), s);
            assert_eq!(s.swap().chirality(), s.chirality().mirror());
        }
        assert_eq!(E.swap(), E);
    }

    #[test]
    fn swap_moves_left_projector_to_right() {
        let a = basis_projector(GL, GL, BasisDim::Five).unwrap();
        let b = basis_projector(GR, GR, BasisDim::Five).unwrap();
        assert_eq!(swap_chirality(&a), b);
    }

    #[test]
    fn maximally_mixed_is_valid() {
        let rho = DensityMatrix::maximally_mixed(BasisDim::Five);
        let r = validate_density(&rho, 1e-10);
        assert!(r.passed);
        assert!((r.min_eigenvalue - 0.2).abs() < 1e-14);
    }

    #[test]
    fn short_trace_fails() {
        let op = Operator::diagonal(&[0.3, 0.3, 0.1, 0.1, 0.1]).unwrap();
        let r = validate_operator(&op, 1e-8);
        assert!(!r.passed);
        assert!((r.trace_defect - 0.1).abs() < 1e-12);
        assert!(DensityMatrix::new(op).is_err());
    }

    #[test]
    fn negative_eigenvalue_fails() {
        let op = Operator::diagonal(&[0.6, 0.5, -0.1, 0.0, 0.0]).unwrap();
        let r = validate_operator(&op, 1e-8);
        assert!(!r.passed);
        assert!((r.min_eigenvalue + 0.1).abs() < 1e-12);
    }

    #[test]
    fn non_hermitian_fails() {
        let mut op = Operator::diagonal(&[0.5, 0.5, 0.0, 0.0, 0.0]).unwrap();
        op.set(GL, E, C64::new(0.0, 0.01));
        assert!(!validate_operator(&op, 1e-8).passed);
    }

    #[test]
    fn wrong_dimension_rejected() {
        assert!(Operator::from_matrix(CMatrix::zeros(4, 4)).is_err());
        assert!(Operator::from_matrix(CMatrix::zeros(5, 7)).is_err());
    }
}
