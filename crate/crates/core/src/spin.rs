//! Spin-1/2 operators embedded in an N-spin register.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, from_rows, identity, kron_all, CMatrix};

pub const MAX_SPINS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
    Plus,
    Minus,
}

fn single_spin(axis: Axis) -> CMatrix {
    let z = c(0.0, 0.0);
    let half = c(0.5, 0.0);
    match axis {
        Axis::X => from_rows(2, &[z, half, half, z]),
        Axis::Y => from_rows(2, &[z, c(0.0, -0.5), c(0.0, 0.5), z]),
        Axis::Z => from_rows(2, &[half, z, z, -half]),
        // |0⟩ is spin up, so I+ maps |1⟩ to |0⟩.
        Axis::Plus => from_rows(2, &[z, c(1.0, 0.0), z, z]),
        Axis::Minus => from_rows(2, &[z, z, c(1.0, 0.0), z]),
    }
}

pub fn check_register(n_spins: usize) -> Result<()> {
    if n_spins == 0 || n_spins > MAX_SPINS {
        return Err(Error::RegisterSize(n_spins));
    }
    Ok(())
}

pub fn dimension(n_spins: usize) -> usize {
    1 << n_spins
}

/// Single-spin operator `axis` acting on spin `index`, identity elsewhere.
pub fn spin_operator(n_spins: usize, index: usize, axis: Axis) -> Result<CMatrix> {
    check_register(n_spins)?;
    if index >= n_spins {
        return Err(Error::SpinIndex { index, n_spins });
    }
    let factors: Vec<CMatrix> = (0..n_spins)
        .map(|k| if k == index { single_spin(axis) } else { identity(2) })
        .collect();
    Ok(kron_all(&factors))
}

/// Σ_k I_z^(k).
pub fn total_z(n_spins: usize) -> Result<CMatrix> {
    let mut acc = CMatrix::zeros(dimension(n_spins), dimension(n_spins));
    for k in 0..n_spins {
        acc += spin_operator(n_spins, k, Axis::Z)?;
    }
    Ok(acc)
}

/// Product of single-spin operators on two different spins.
pub fn bilinear(n_spins: usize, i: usize, a: Axis, j: usize, b: Axis) -> Result<CMatrix> {
    if i == j {
        return Err(Error::SamePair(i));
    }
    Ok(spin_operator(n_spins, i, a)? * spin_operator(n_spins, j, b)?)
}

/// Weighted sum Σ w_k I_axis^(k) over a set of target spins.
pub fn collective(n_spins: usize, targets: &[usize], axis: Axis) -> Result<CMatrix> {
    let dim = dimension(n_spins);
    let mut acc = CMatrix::zeros(dim, dim);
    for &k in targets {
        acc += spin_operator(n_spins, k, axis)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{commutator, max_abs, I};

    fn diag(values: &[f64]) -> CMatrix {
        let n = values.len();
        let mut m = CMatrix::zeros(n, n);
        for (k, v) in values.iter().enumerate() {
            m[(k, k)] = c(*v, 0.0);
        }
        m
    }

    #[test]
    fn single_spin_z() {
        let z = spin_operator(1, 0, Axis::Z).unwrap();
        assert_eq!(z, diag(&[0.5, -0.5]));
    }

    #[test]
    fn embedded_z_on_first_spin() {
        let z = spin_operator(2, 0, Axis::Z).unwrap();
        assert_eq!(z, diag(&[0.5, 0.5, -0.5, -0.5]));
    }

    #[test]
    fn raising_operator_on_second_spin() {
        let sp = spin_operator(2, 1, Axis::Plus).unwrap();
        // |01⟩ is index 1, |00⟩ index 0, |11⟩ index 3, |10⟩ index 2.
        let apply = |k: usize| sp.column(k).into_owned();
        assert!(apply(0).iter().all(|z| z.norm() == 0.0));
        let from_01 = apply(1);
        assert_eq!(from_01[0], c(1.0, 0.0));
        assert_eq!(from_01.iter().filter(|z| z.norm() > 0.0).count(), 1);
        let from_11 = apply(3);
        assert_eq!(from_11[2], c(1.0, 0.0));
        assert!(apply(2).iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn index_out_of_range() {
        assert_eq!(
            spin_operator(2, 2, Axis::X),
            Err(Error::SpinIndex { index: 2, n_spins: 2 })
        );
        assert_eq!(spin_operator(9, 0, Axis::X), Err(Error::RegisterSize(9)));
        assert_eq!(spin_operator(0, 0, Axis::X), Err(Error::RegisterSize(0)));
    }

    #[test]
    fn angular_momentum_algebra() {
        for n in 1..=3 {
            for k in 0..n {
                let x = spin_operator(n, k, Axis::X).unwrap();
                let y = spin_operator(n, k, Axis::Y).unwrap();
                let z = spin_operator(n, k, Axis::Z).unwrap();
                assert!(max_abs(&(commutator(&x, &y) - z.map(|e| e * I))) < 1e-12);
                let p = spin_operator(n, k, Axis::Plus).unwrap();
                let m = spin_operator(n, k, Axis::Minus).unwrap();
                assert_eq!(p, &x + y.map(|e| e * I));
                assert_eq!(m, &x - y.map(|e| e * I));
            }
        }
    }

    #[test]
    fn distinct_spins_commute() {
        let axes = [Axis::X, Axis::Y, Axis::Z, Axis::Plus, Axis::Minus];
        for a in axes {
            for b in axes {
                let p = spin_operator(3, 0, a).unwrap();
                let q = spin_operator(3, 2, b).unwrap();
                assert_eq!(max_abs(&commutator(&p, &q)), 0.0);
            }
        }
    }
}
