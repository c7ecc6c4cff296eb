//! Density operators, unitaries and computational-basis labels.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermiticity_error, max_abs, trace, unitarity_error, CMatrix};
use crate::spin::{self, Axis};

pub const HERMITICITY_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = 1e-10;
pub const UNITARITY_TOL: f64 = 1e-10;

/// Computational basis state of a register, spin 0 first. Serialized in
/// compact form ("01").
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct BasisLabel(Vec<u8>);

impl From<BasisLabel> for String {
    fn from(label: BasisLabel) -> Self {
        label.compact()
    }
}

impl TryFrom<String> for BasisLabel {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl BasisLabel {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        spin::check_register(bits.len())?;
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::InvalidParameter {
                name: "label",
                reason: "bits must be 0 or 1".into(),
            });
        }
        Ok(Self(bits))
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn n_spins(&self) -> usize {
        self.0.len()
    }

    /// Row index in the tensor-product basis.
    pub fn index(&self) -> usize {
        self.0.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
    }

    /// Compact form such as `01`.
    pub fn compact(&self) -> String {
        self.0.iter().map(|b| char::from(b'0' + b)).collect()
    }

    /// All 2^n labels in index order.
    pub fn all(n_spins: usize) -> Vec<Self> {
        (0..spin::dimension(n_spins))
            .map(|idx| {
                Self((0..n_spins).rev().map(|k| ((idx >> k) & 1) as u8).collect())
            })
            .collect()
    }
}

impl FromStr for BasisLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .filter(|ch| !matches!(ch, '|' | '⟩' | '>' | ' '))
            .map(|ch| match ch {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::InvalidParameter {
                    name: "label",
                    reason: format!("unexpected character {other:?}"),
                }),
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::new(bits)
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "|{b}⟩")?;
        }
        Ok(())
    }
}

/// Density operator on a 2^N-dimensional register.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    rho: CMatrix,
    n_spins: usize,
}

impl QuantumState {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(rho: CMatrix) -> Result<Self> {
        let n_spins = register_size(rho.nrows())?;
        if rho.ncols() != rho.nrows() {
            return Err(Error::InvalidState("matrix is not square".into()));
        }
        let herm = hermiticity_error(&rho);
        if herm > HERMITICITY_TOL {
            return Err(Error::InvalidState(format!("not Hermitian ({herm:e})")));
        }
        let tr = trace(&rho);
        if (tr - C64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace is {tr}")));
        }
        let sym = (&rho + rho.adjoint()).scale(0.5);
        let min_eig = sym.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min);
        if min_eig < -POSITIVITY_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(Self { rho, n_spins })
    }

    pub fn basis(label: &BasisLabel) -> Self {
        let dim = spin::dimension(label.n_spins());
        let mut rho = CMatrix::zeros(dim, dim);
        rho[(label.index(), label.index())] = C64::new(1.0, 0.0);
        Self { rho, n_spins: label.n_spins() }
    }

    pub fn maximally_mixed(n_spins: usize) -> Result<Self> {
        spin::check_register(n_spins)?;
        let dim = spin::dimension(n_spins);
        let rho = CMatrix::identity(dim, dim).scale(1.0 / dim as f64);
        Ok(Self { rho, n_spins })
    }

    pub fn rho(&self) -> &CMatrix {
        &self.rho
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn expectation(&self, op: &CMatrix) -> C64 {
        trace(&(&self.rho * op))
    }

    /// ⟨I_z⟩ of every spin.
    pub fn polarizations(&self) -> Vec<f64> {
        (0..self.n_spins)
            .map(|k| {
                let z = spin::spin_operator(self.n_spins, k, Axis::Z)
                    .expect("index within register");
                self.expectation(&z).re
            })
            .collect()
    }

    pub fn population(&self, label: &BasisLabel) -> f64 {
        self.rho[(label.index(), label.index())].re
    }

    /// ρ → UρU†.
    pub fn evolve(&self, u: &GateMatrix) -> Self {
        let u = u.matrix();
        Self { rho: u * &self.rho * u.adjoint(), n_spins: self.n_spins }
    }

    /// Largest violation of Hermiticity and unit trace.
    pub fn hygiene_error(&self) -> f64 {
        let tr = trace(&self.rho) - C64::new(1.0, 0.0);
        hermiticity_error(&self.rho).max(tr.norm())
    }
}

/// Unitary on the register space.
#[derive(Debug, Clone, PartialEq)]
pub struct GateMatrix(CMatrix);

impl GateMatrix {
    pub fn new(u: CMatrix) -> Result<Self> {
        Self::with_tolerance(u, UNITARITY_TOL)
    }

    pub fn with_tolerance(u: CMatrix, tol: f64) -> Result<Self> {
        if u.nrows() != u.ncols() {
            return Err(Error::Dimension { expected: u.nrows(), found: u.ncols() });
        }
        register_size(u.nrows())?;
        let err = unitarity_error(&u);
        if !(err <= tol) {
            return Err(Error::NotUnitary(err));
        }
        Ok(Self(u))
    }

    pub(crate) fn from_trusted(u: CMatrix) -> Self {
        Self(u)
    }

    pub fn identity(n_spins: usize) -> Self {
        let dim = spin::dimension(n_spins);
        Self(CMatrix::identity(dim, dim))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn n_spins(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn unitarity_error(&self) -> f64 {
        unitarity_error(&self.0)
    }

    /// `self` applied after `first`.
    pub fn after(&self, first: &GateMatrix) -> GateMatrix {
        GateMatrix(&self.0 * &first.0)
    }

    pub fn adjoint(&self) -> GateMatrix {
        GateMatrix(self.0.adjoint())
    }

    pub fn distance(&self, other: &GateMatrix) -> f64 {
        max_abs(&(&self.0 - &other.0))
    }

    /// Row-major `[re, im]` pairs.
    pub fn to_pairs(&self) -> Vec<Vec<[f64; 2]>> {
        self.0
            .row_iter()
            .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
            .collect()
    }
}

fn register_size(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::Dimension { expected: dim.next_power_of_two(), found: dim });
    }
    let n = dim.trailing_zeros() as usize;
    spin::check_register(n)?;
    Ok(n)
}
