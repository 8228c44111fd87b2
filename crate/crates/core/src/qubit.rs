//! Qubit constants and Bloch-vector helpers.
//!
//! Basis ordering: index 0 is the ground state, index 1 the excited state.
//! With this ordering the Pauli set is
//!
//!   sigma_x = [[0,1],[1,0]],  sigma_y = [[0,i],[-i,0]],  sigma_z = [[-1,0],[0,1]],
//!
//! a right-handed algebra (sigma_x sigma_y = i sigma_z) in which
//! sigma_- = (sigma_x - i sigma_y)/2 = |0><1| de-excites the qubit and
//! sigma_+ = sigma_-^dagger excites it. It is the standard Pauli set
//! conjugated by the basis swap, so all algebraic identities hold verbatim.
//!
//! Bloch components are r_i = Re tr(rho sigma_i); the ground state has
//! r_z = -1.

use ndarray::array;
use num_complex::Complex64 as C64;

use crate::superop::Operator;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn sigma_x() -> Operator {
    Operator::new(array![[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]]).unwrap()
}

pub fn sigma_y() -> Operator {
    Operator::new(array![[c(0.0, 0.0), c(0.0, 1.0)], [c(0.0, -1.0), c(0.0, 0.0)]]).unwrap()
}

pub fn sigma_z() -> Operator {
    Operator::new(array![[c(-1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]]).unwrap()
}

/// Lowering operator |0><1|.
pub fn sigma_minus() -> Operator {
    Operator::new(array![[c(0.0, 0.0), c(1.0, 0.0)], [c(0.0, 0.0), c(0.0, 0.0)]]).unwrap()
}

/// Raising operator |1><0|.
pub fn sigma_plus() -> Operator {
    Operator::new(array![[c(0.0, 0.0), c(0.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]]).unwrap()
}

pub fn identity2() -> Operator {
    Operator::identity(2)
}

/// Ground-state projector |0><0|.
pub fn ground() -> Operator {
    Operator::new(array![[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, 0.0)]]).unwrap()
}

/// Excited-state projector |1><1|.
pub fn excited() -> Operator {
    Operator::new(array![[c(0.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]]).unwrap()
}

/// Bloch vector (r_x, r_y, r_z) of a qubit operator.
pub fn bloch_vector(rho: &Operator) -> [f64; 3] {
    assert_eq!(rho.dim(), 2, "bloch_vector expects a qubit operator");
    let m = rho.mat();
    // r_i = tr(rho sigma_i), written out entrywise.
    let rx = (m[[0, 1]] + m[[1, 0]]).re;
    let ry = (C64::i() * (m[[1, 0]] - m[[0, 1]])).re;
    let rz = (m[[1, 1]] - m[[0, 0]]).re;
    [rx, ry, rz]
}

/// Density matrix (I + r . sigma)/2 from a Bloch vector.
pub fn state_from_bloch(r: [f64; 3]) -> Operator {
    let [rx, ry, rz] = r;
    Operator::new(array![
        [c(0.5 * (1.0 - rz), 0.0), c(0.5 * rx, 0.5 * ry)],
        [c(0.5 * rx, -0.5 * ry), c(0.5 * (1.0 + rz), 0.0)]
    ])
    .unwrap()
}

/// Pure state |psi><psi| from amplitudes (a0, a1), normalized.
pub fn pure_state(a0: C64, a1: C64) -> Operator {
    let n = (a0.norm_sqr() + a1.norm_sqr()).sqrt();
    let (a0, a1) = (a0 / n, a1 / n);
    Operator::new(array![
        [a0 * a0.conj(), a0 * a1.conj()],
        [a1 * a0.conj(), a1 * a1.conj()]
    ])
    .unwrap()
}
