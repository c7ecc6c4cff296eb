//! Two-qubit gate layer: the ISWAP family produced by flip-flop evolution,
//! the CNS gate, Makhlin local invariants, canonical (Weyl chamber) angles
//! and the universality classifier.
//!
//! Canonical angles use the Pauli convention
//! `U ≅ exp[i(θx σx⊗σx + θy σy⊗σy + θz σz⊗σz)]`, so SWAP sits at
//! (π/4, π/4, π/4) and ISWAP at (π/4, π/4, 0). In spin-operator form the
//! same gate reads exp[i·4(θx I_xS_x + θy I_yS_y + θz I_zS_z)].

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI};

use nalgebra::Matrix3;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, expm_hermitian, from_rows, hermiticity_error, max_abs, trace, unitarity_error, CMatrix, I};
use crate::state::GateMatrix;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

pub fn iswap() -> GateMatrix {
    GateMatrix::from_trusted(from_rows(
        4,
        &[ONE, ZERO, ZERO, ZERO, ZERO, ZERO, I, ZERO, ZERO, I, ZERO, ZERO, ZERO, ZERO, ZERO, ONE],
    ))
}

/// Half-period flip-flop evolution at rotor phase φ: ISWAP with the
/// off-diagonal phases e^{i(π/2 − 2φ)} (row |01⟩) and e^{i(π/2 + 2φ)} (row |10⟩).
pub fn u_flip(phi: f64) -> GateMatrix {
    // i·e^{∓2iφ}, written out so that φ = 0 gives ISWAP exactly.
    let (s, c) = (2.0 * phi).sin_cos();
    let upper = C64::new(s, c);
    let lower = C64::new(-s, c);
    GateMatrix::from_trusted(from_rows(
        4,
        &[ONE, ZERO, ZERO, ZERO, ZERO, ZERO, upper, ZERO, ZERO, lower, ZERO, ZERO, ZERO, ZERO, ZERO, ONE],
    ))
}

pub fn swap() -> GateMatrix {
    GateMatrix::from_trusted(from_rows(
        4,
        &[ONE, ZERO, ZERO, ZERO, ZERO, ZERO, ONE, ZERO, ZERO, ONE, ZERO, ZERO, ZERO, ZERO, ZERO, ONE],
    ))
}

/// CNOT with spin 0 (I) as control.
pub fn cnot() -> GateMatrix {
    GateMatrix::from_trusted(from_rows(
        4,
        &[ONE, ZERO, ZERO, ZERO, ZERO, ONE, ZERO, ZERO, ZERO, ZERO, ZERO, ONE, ZERO, ZERO, ONE, ZERO],
    ))
}

/// SWAP applied after CNOT (control I).
pub fn cns() -> GateMatrix {
    swap().after(&cnot())
}

fn magic_basis() -> CMatrix {
    let s = FRAC_1_SQRT_2;
    from_rows(
        4,
        &[
            c(s, 0.),
            c(0., 0.),
            c(0., 0.),
            c(0., s),
            c(0., 0.),
            c(0., s),
            c(s, 0.),
            c(0., 0.),
            c(0., 0.),
            c(0., s),
            c(-s, 0.),
            c(0., 0.),
            c(s, 0.),
            c(0., 0.),
            c(0., 0.),
            c(0., -s),
        ],
    )
}

/// Makhlin invariants (G1, G2) of a two-qubit unitary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MakhlinInvariants {
    pub g1: C64,
    pub g2: f64,
}

impl MakhlinInvariants {
    pub fn distance(&self, other: &Self) -> f64 {
        (self.g1 - other.g1).norm().max((self.g2 - other.g2).abs())
    }
}

pub fn makhlin_invariants(u: &CMatrix) -> Result<MakhlinInvariants> {
    if u.nrows() != 4 || u.ncols() != 4 {
        return Err(Error::Dimension { expected: 4, found: u.nrows() });
    }
    let err = unitarity_error(u);
    if !(err <= 1e-8) {
        return Err(Error::NotUnitary(err));
    }
    let q = magic_basis();
    let ub = q.adjoint() * u * &q;
    let m = ub.transpose() * &ub;
    let det = u.determinant();
    let tr = trace(&m);
    let tr2 = trace(&(&m * &m));
    let g1 = tr * tr / (det * 16.0);
    let g2 = (tr * tr - tr2) / (det * 4.0);
    Ok(MakhlinInvariants { g1, g2: g2.re })
}

pub const DEFAULT_EQUIVALENCE_TOL: f64 = 1e-9;

pub fn locally_equivalent(u: &CMatrix, v: &CMatrix, tol: f64) -> Result<bool> {
    Ok(makhlin_invariants(u)?.distance(&makhlin_invariants(v)?) <= tol)
}

/// Canonical coordinates, reduced to the Weyl chamber
/// π/4 ≥ θx ≥ θy ≥ |θz| (θz ≥ 0 when θx = π/4).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanonicalAngles {
    pub theta_x: f64,
    pub theta_y: f64,
    pub theta_z: f64,
}

const CHAMBER_EPS: f64 = 1e-12;

impl CanonicalAngles {
    pub fn new(theta_x: f64, theta_y: f64, theta_z: f64) -> Self {
        Self { theta_x, theta_y, theta_z }.reduced()
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.theta_x, self.theta_y, self.theta_z]
    }

    /// Weyl-chamber representative under local equivalence.
    pub fn reduced(&self) -> Self {
        let half = PI / 2.0;
        let mut v = self.as_array().map(|x| {
            let mut y = x - half * (x / half).round();
            if y <= -FRAC_PI_4 + CHAMBER_EPS {
                y += half;
            }
            y
        });
        v.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
        if v[0] < 0.0 {
            v[0] = -v[0];
            v[2] = -v[2];
        }
        if v[1] < 0.0 {
            v[1] = -v[1];
            v[2] = -v[2];
        }
        if (v[0] - FRAC_PI_4).abs() < CHAMBER_EPS && v[2] < 0.0 {
            v[2] = -v[2];
        }
        Self { theta_x: v[0], theta_y: v[1], theta_z: v[2] }
    }

    /// exp[i(θx XX + θy YY + θz ZZ)].
    pub fn gate(&self) -> GateMatrix {
        let [x, y, z] = [pauli_pair(0), pauli_pair(1), pauli_pair(2)];
        let h = x.scale(self.theta_x) + y.scale(self.theta_y) + z.scale(self.theta_z);
        GateMatrix::from_trusted(expm_hermitian(&h, -1.0))
    }
}

fn pauli(k: usize) -> CMatrix {
    match k {
        0 => from_rows(2, &[ZERO, ONE, ONE, ZERO]),
        1 => from_rows(2, &[ZERO, -I, I, ZERO]),
        2 => from_rows(2, &[ONE, ZERO, ZERO, -ONE]),
        _ => CMatrix::identity(2, 2),
    }
}

fn pauli_pair(k: usize) -> CMatrix {
    pauli(k).kronecker(&pauli(k))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UniversalityClass {
    Universal,
    NonEntangling,
    ExcludedSwapClass,
}

pub fn universality_class(angles: &CanonicalAngles) -> UniversalityClass {
    const TOL: f64 = 1e-9;
    let r = angles.reduced().as_array();
    if r.iter().all(|x| x.abs() < TOL) {
        UniversalityClass::NonEntangling
    } else if r.iter().all(|x| (x - FRAC_PI_4).abs() < TOL) {
        UniversalityClass::ExcludedSwapClass
    } else {
        UniversalityClass::Universal
    }
}

/// Class of a gate from its Makhlin invariants: identity's (1, 3) is
/// non-entangling, SWAP's (−1, −3) is the excluded class.
pub fn universality_class_of_gate(u: &CMatrix, tol: f64) -> Result<UniversalityClass> {
    let g = makhlin_invariants(u)?;
    let near = |g1: f64, g2: f64| g.distance(&MakhlinInvariants { g1: C64::new(g1, 0.0), g2 }) <= tol;
    Ok(if near(1.0, 3.0) {
        UniversalityClass::NonEntangling
    } else if near(-1.0, -3.0) {
        UniversalityClass::ExcludedSwapClass
    } else {
        UniversalityClass::Universal
    })
}

/// Canonical angles of exp(−iht) for a purely bilinear two-spin `h`.
///
/// The 3×3 coupling matrix C_ab = tr(h σ_a⊗σ_b)/4 is brought to diagonal
/// form by proper rotations on each spin (signed SVD); local rotations never
/// change the nonlocal content, so exp(−iht) ≅ exp[i Σ (−d_k t) σ_k⊗σ_k].
pub fn canonical_angles(h: &CMatrix, t: f64) -> Result<CanonicalAngles> {
    if h.nrows() != 4 || h.ncols() != 4 {
        return Err(Error::Dimension { expected: 4, found: h.nrows() });
    }
    let scale = max_abs(h).max(f64::MIN_POSITIVE);
    if hermiticity_error(h) > 1e-12 * scale.max(1.0) {
        return Err(Error::InvalidParameter { name: "h", reason: "not Hermitian".into() });
    }
    let id = CMatrix::identity(2, 2);
    let mut local: f64 = 0.0;
    for k in 0..3 {
        let a = pauli(k).kronecker(&id);
        let b = id.kronecker(&pauli(k));
        local = local.max(trace(&(h * a)).norm() / 4.0).max(trace(&(h * b)).norm() / 4.0);
    }
    if local > 1e-9 * scale {
        return Err(Error::NotBilinear(local));
    }
    let mut coupling = Matrix3::zeros();
    for a in 0..3 {
        for b in 0..3 {
            let op = pauli(a).kronecker(&pauli(b));
            coupling[(a, b)] = trace(&(h * op)).re / 4.0;
        }
    }
    let svd = coupling.svd(true, true);
    let (u, vt) = (svd.u.expect("requested"), svd.v_t.expect("requested"));
    let mut d = svd.singular_values;
    // Proper rotations only: push reflections into the smallest singular value.
    if u.determinant() * vt.determinant() < 0.0 {
        d[2] = -d[2];
    }
    Ok(CanonicalAngles::new(-d[0] * t, -d[1] * t, -d[2] * t))
}

/// Phase α of exp(−iα(I_z − S_z)) that makes `exp(−iα(I_z−S_z))·u` match
/// `target` in the |01⟩/|10⟩ block.
pub fn align_flip_phase(u: &CMatrix, target: &CMatrix) -> f64 {
    let upper = (u[(1, 2)] / target[(1, 2)]).arg();
    let lower = (u[(2, 1)] / target[(2, 1)]).arg();
    0.5 * (upper - lower)
}

/// exp(−iα(I_z − S_z)) = diag(1, e^{−iα}, e^{iα}, 1).
pub fn flip_phase_gate(alpha: f64) -> GateMatrix {
    let mut m = CMatrix::identity(4, 4);
    m[(1, 1)] = C64::from_polar(1.0, -alpha);
    m[(2, 2)] = C64::from_polar(1.0, alpha);
    GateMatrix::from_trusted(m)
}

/// Local dressing turning U_F(φ) into CNS:
/// `(A₁⊗B₁)·U_F(φ)·(A₂⊗B₂) = e^{iδ}·CNS`.
#[derive(Debug, Clone, PartialEq)]
pub struct CnsCircuit {
    pub phi: f64,
    pub a1: CMatrix,
    pub b1: CMatrix,
    pub a2: CMatrix,
    pub b2: CMatrix,
    /// Angles θ of the exp(−iθ I_z), exp(−iθ S_z) corrections that absorb
    /// the rotor-phase factors of U_F.
    pub z_angles: (f64, f64),
    /// δ.
    pub global_phase: f64,
}

impl CnsCircuit {
    pub fn compose(&self) -> GateMatrix {
        let pre = self.a1.kronecker(&self.b1);
        let post = self.a2.kronecker(&self.b2);
        GateMatrix::from_trusted(pre * u_flip(self.phi).matrix() * post)
    }
}

fn rz(theta: f64) -> CMatrix {
    // exp(−iθ σz/2)
    from_rows(2, &[C64::from_polar(1.0, -theta / 2.0), ZERO, ZERO, C64::from_polar(1.0, theta / 2.0)])
}

fn hadamard() -> CMatrix {
    pauli(0).scale(FRAC_1_SQRT_2) + pauli(2).scale(FRAC_1_SQRT_2)
}

/// CNS from a single U_F(φ).
///
/// SWAP·CZ = i·(S†⊗S†)·ISWAP·(Z⊗Z) up to the phases of S† = e^{−iπZ/4},
/// CNOT = (1⊗H)·CZ·(1⊗H), and ISWAP = exp(+2iφ(I_z − S_z))·U_F(φ). The
/// rotor phase therefore only shifts the two z corrections, by −2φ on I and
/// +2φ on S.
pub fn cns_circuit(phi: f64) -> Result<CnsCircuit> {
    let (zi, zs) = (-2.0 * phi, 2.0 * phi);
    let s_dag = rz(PI / 2.0);
    let a1 = hadamard() * &s_dag * rz(zi);
    let b1 = s_dag * rz(zs);
    let a2 = pauli(2);
    let b2 = pauli(2) * hadamard();
    // rz(π/2) = e^{−iπ/4}·S†-type phase; collect the global phase numerically.
    let mut circuit = CnsCircuit { phi, a1, b1, a2, b2, z_angles: (zi, zs), global_phase: 0.0 };
    let composed = circuit.compose();
    let overlap = trace(&(cns().matrix().adjoint() * composed.matrix()));
    circuit.global_phase = overlap.arg();
    let fidelity = overlap.norm() / 4.0;
    if !(fidelity >= 1.0 - 1e-9) {
        return Err(Error::InvalidParameter {
            name: "phi",
            reason: format!("CNS construction reached fidelity {fidelity}"),
        });
    }
    Ok(circuit)
}
