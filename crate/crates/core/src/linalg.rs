//! Dense complex matrix helpers shared by the simulator.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

pub type CMatrix = DMatrix<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn zeros(dim: usize) -> CMatrix {
    CMatrix::zeros(dim, dim)
}

/// Builds a matrix from row-major real/imaginary pairs.
pub fn from_rows(dim: usize, entries: &[C64]) -> CMatrix {
    assert_eq!(entries.len(), dim * dim, "expected {} entries", dim * dim);
    CMatrix::from_row_slice(dim, dim, entries)
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn hermiticity_error(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// `‖U†U − 1‖_max`.
pub fn unitarity_error(u: &CMatrix) -> f64 {
    let dim = u.nrows();
    max_abs(&(u.adjoint() * u - identity(dim)))
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// `exp(−i·t·H)` for Hermitian `H` through its eigendecomposition. The
/// anti-Hermitian part of `H`, if any, is discarded.
pub fn expm_hermitian(h: &CMatrix, t: f64) -> CMatrix {
    let herm = (h + h.adjoint()).scale(0.5);
    let eig = herm.symmetric_eigen();
    let v = &eig.eigenvectors;
    let phases = eig.eigenvalues.map(|lambda| C64::from_polar(1.0, -lambda * t));
    let mut scaled = v.clone();
    for (k, mut col) in scaled.column_iter_mut().enumerate() {
        col *= phases[k];
    }
    scaled * v.adjoint()
}

/// Kronecker product of a list of factors, leftmost factor most significant.
pub fn kron_all(factors: &[CMatrix]) -> CMatrix {
    factors
        .iter()
        .skip(1)
        .fold(factors[0].clone(), |acc, f| acc.kronecker(f))
}

/// Max-norm distance between `u` and `v` after removing the best global phase.
pub fn phase_aligned_distance(u: &CMatrix, v: &CMatrix) -> f64 {
    let overlap = trace(&(v.adjoint() * u));
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        C64::new(1.0, 0.0)
    };
    max_abs(&(u - v.map(|z| z * phase)))
}

/// `|tr(U†V)| / d`, equal to 1 exactly when the gates agree up to phase.
pub fn operator_fidelity(u: &CMatrix, v: &CMatrix) -> f64 {
    trace(&(u.adjoint() * v)).norm() / u.nrows() as f64
}
