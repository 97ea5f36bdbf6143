//! Dense-matrix reference simulator. Every gate is written as a sum of
//! Kronecker products of single-qubit operators over the whole register,
//! independently of the simulator's index arithmetic.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use qfeo_core::statevec::Gate;

pub type CMat = DMatrix<Complex64>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn m2(a: [[Complex64; 2]; 2]) -> CMat {
    DMatrix::from_row_slice(2, 2, &[a[0][0], a[0][1], a[1][0], a[1][1]])
}

pub fn id2() -> CMat {
    CMat::identity(2, 2)
}
pub fn pauli_x() -> CMat {
    m2([[c(0., 0.), c(1., 0.)], [c(1., 0.), c(0., 0.)]])
}
pub fn pauli_y() -> CMat {
    m2([[c(0., 0.), c(0., -1.)], [c(0., 1.), c(0., 0.)]])
}
pub fn pauli_z() -> CMat {
    m2([[c(1., 0.), c(0., 0.)], [c(0., 0.), c(-1., 0.)]])
}
fn proj0() -> CMat {
    m2([[c(1., 0.), c(0., 0.)], [c(0., 0.), c(0., 0.)]])
}
fn proj1() -> CMat {
    m2([[c(0., 0.), c(0., 0.)], [c(0., 0.), c(1., 0.)]])
}

/// `exp(-i theta/2 P)` for a Pauli matrix `P`.
fn pauli_rotation(p: &CMat, theta: f64) -> CMat {
    id2() * c((theta / 2.0).cos(), 0.0) - p * c(0.0, (theta / 2.0).sin())
}

fn phase(lambda: f64) -> CMat {
    m2([[c(1., 0.), c(0., 0.)], [c(0., 0.), Complex64::from_polar(1.0, lambda)]])
}

fn hadamard() -> CMat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    m2([[c(s, 0.), c(s, 0.)], [c(s, 0.), c(-s, 0.)]])
}

fn u3(theta: f64, phi: f64, lambda: f64) -> CMat {
    let (ct, st) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    m2([
        [c(ct, 0.), -Complex64::from_polar(st, lambda)],
        [Complex64::from_polar(st, phi), Complex64::from_polar(ct, phi + lambda)],
    ])
}

/// Kronecker product over the register with `ops` placed on the given
/// qubits and identities elsewhere. Qubit 0 is the least significant bit,
/// so it is the rightmost factor.
pub fn embed(n: usize, ops: &[(usize, CMat)]) -> CMat {
    let mut full = CMat::identity(1, 1);
    for q in (0..n).rev() {
        let f = ops
            .iter()
            .find(|(k, _)| *k == q)
            .map(|(_, m)| m.clone())
            .unwrap_or_else(id2);
        full = full.kronecker(&f);
    }
    full
}

pub fn gate_matrix(n: usize, gate: &Gate) -> CMat {
    let dim = 1 << n;
    let eye = CMat::identity(dim, dim);
    match *gate {
        Gate::Rx { qubit, theta } => embed(n, &[(qubit, pauli_rotation(&pauli_x(), theta))]),
        Gate::Ry { qubit, theta } => embed(n, &[(qubit, pauli_rotation(&pauli_y(), theta))]),
        Gate::Rz { qubit, theta } => embed(n, &[(qubit, pauli_rotation(&pauli_z(), theta))]),
        Gate::H { qubit } => embed(n, &[(qubit, hadamard())]),
        Gate::P { qubit, lambda } => embed(n, &[(qubit, phase(lambda))]),
        Gate::U3 { qubit, theta, phi, lambda } => embed(n, &[(qubit, u3(theta, phi, lambda))]),
        Gate::Cx { control, target } => {
            embed(n, &[(control, proj0())]) + embed(n, &[(control, proj1()), (target, pauli_x())])
        }
        Gate::Cp { control, target, lambda } => {
            embed(n, &[(control, proj0())]) + embed(n, &[(control, proj1()), (target, phase(lambda))])
        }
        Gate::Rxx { a, b, theta } => two_axis(n, a, b, theta, pauli_x(), &eye),
        Gate::Ryy { a, b, theta } => two_axis(n, a, b, theta, pauli_y(), &eye),
        Gate::Rzz { a, b, theta } => two_axis(n, a, b, theta, pauli_z(), &eye),
    }
}

fn two_axis(n: usize, a: usize, b: usize, theta: f64, p: CMat, eye: &CMat) -> CMat {
    eye * c((theta / 2.0).cos(), 0.0) - embed(n, &[(a, p.clone()), (b, p)]) * c(0.0, (theta / 2.0).sin())
}

pub fn run(n: usize, gates: &[Gate]) -> DVector<Complex64> {
    let mut state = DVector::from_element(1 << n, c(0., 0.));
    state[0] = c(1., 0.);
    for g in gates {
        state = gate_matrix(n, g) * state;
    }
    state
}

/// `<psi| P_q |psi>` with the Pauli embedded on qubit `q`.
pub fn expectation(n: usize, state: &DVector<Complex64>, q: usize, p: CMat) -> f64 {
    (state.adjoint() * embed(n, &[(q, p)]) * state)[(0, 0)].re
}
