//! Dense statevector simulation.
//!
//! Basis ordering: qubit 0 is the least-significant bit of the basis index,
//! so amplitude `k` belongs to the computational state whose qubit `q` is
//! `(k >> q) & 1`.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QfeoError, Result};

/// Largest register the simulator will allocate.
pub const MAX_QUBITS: usize = 24;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn from_char(c: char) -> Option<Axis> {
        match c.to_ascii_uppercase() {
            'X' => Some(Axis::X),
            'Y' => Some(Axis::Y),
            'Z' => Some(Axis::Z),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    Rx,
    Ry,
    Rz,
    H,
    P,
    U3,
    Cx,
    Rxx,
    Ryy,
    Rzz,
    Cp,
}

/// One gate application. Rotation conventions: `R_A(t) = exp(-i t A / 2)` and
/// `R_AA(t) = exp(-i t A⊗A / 2)`; `P(l) = diag(1, e^{il})`; `CP(l)` applies the
/// phase to `|11>`; `U3(t, p, l)` is the usual `RZ(p) RY(t) RZ(l)` up to a
/// global phase.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    Rx { qubit: usize, theta: f64 },
    Ry { qubit: usize, theta: f64 },
    Rz { qubit: usize, theta: f64 },
    H { qubit: usize },
    P { qubit: usize, lambda: f64 },
    U3 { qubit: usize, theta: f64, phi: f64, lambda: f64 },
    Cx { control: usize, target: usize },
    Rxx { a: usize, b: usize, theta: f64 },
    Ryy { a: usize, b: usize, theta: f64 },
    Rzz { a: usize, b: usize, theta: f64 },
    Cp { control: usize, target: usize, lambda: f64 },
}

impl Gate {
    pub fn kind(&self) -> GateKind {
        match self {
            Gate::Rx { .. } => GateKind::Rx,
            Gate::Ry { .. } => GateKind::Ry,
            Gate::Rz { .. } => GateKind::Rz,
            Gate::H { .. } => GateKind::H,
            Gate::P { .. } => GateKind::P,
            Gate::U3 { .. } => GateKind::U3,
            Gate::Cx { .. } => GateKind::Cx,
            Gate::Rxx { .. } => GateKind::Rxx,
            Gate::Ryy { .. } => GateKind::Ryy,
            Gate::Rzz { .. } => GateKind::Rzz,
            Gate::Cp { .. } => GateKind::Cp,
        }
    }

    /// Rotation about a single-qubit Pauli axis.
    pub fn rotation(axis: Axis, qubit: usize, theta: f64) -> Gate {
        match axis {
            Axis::X => Gate::Rx { qubit, theta },
            Axis::Y => Gate::Ry { qubit, theta },
            Axis::Z => Gate::Rz { qubit, theta },
        }
    }

    /// Target qubits in matrix order: `(first, second)` for two-qubit gates,
    /// where `first` is the more significant factor of the 4x4 matrix.
    pub fn qubits(&self) -> (usize, Option<usize>) {
        match *self {
            Gate::Rx { qubit, .. }
            | Gate::Ry { qubit, .. }
            | Gate::Rz { qubit, .. }
            | Gate::H { qubit }
            | Gate::P { qubit, .. }
            | Gate::U3 { qubit, .. } => (qubit, None),
            Gate::Cx { control, target } | Gate::Cp { control, target, .. } => {
                (control, Some(target))
            }
            Gate::Rxx { a, b, .. } | Gate::Ryy { a, b, .. } | Gate::Rzz { a, b, .. } => {
                (a, Some(b))
            }
        }
    }

    pub fn angles(&self) -> Vec<f64> {
        match *self {
            Gate::H { .. } | Gate::Cx { .. } => vec![],
            Gate::Rx { theta, .. } | Gate::Ry { theta, .. } | Gate::Rz { theta, .. } => {
                vec![theta]
            }
            Gate::P { lambda, .. } | Gate::Cp { lambda, .. } => vec![lambda],
            Gate::Rxx { theta, .. } | Gate::Ryy { theta, .. } | Gate::Rzz { theta, .. } => {
                vec![theta]
            }
            Gate::U3 {
                theta, phi, lambda, ..
            } => vec![theta, phi, lambda],
        }
    }

    /// Checks qubit indices against a register size and angles for finiteness.
    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        let (a, b) = self.qubits();
        for q in std::iter::once(a).chain(b) {
            if q >= n_qubits {
                return Err(QfeoError::QubitIndex {
                    index: q,
                    n_qubits,
                });
            }
        }
        if b == Some(a) {
            return Err(QfeoError::InvalidGate(format!(
                "{:?} acts twice on qubit {a}",
                self.kind()
            )));
        }
        if self.angles().iter().any(|t| !t.is_finite()) {
            return Err(QfeoError::InvalidGate(format!(
                "{:?} has a non-finite angle",
                self.kind()
            )));
        }
        Ok(())
    }

    /// 2x2 unitary of a single-qubit gate, row-major.
    pub fn single_matrix(&self) -> Option<[[Complex64; 2]; 2]> {
        let m = match *self {
            Gate::Rx { theta, .. } => {
                let (c, s) = half_angle(theta);
                [[c.into(), -I * s], [-I * s, c.into()]]
            }
            Gate::Ry { theta, .. } => {
                let (c, s) = half_angle(theta);
                [[c.into(), (-s).into()], [s.into(), c.into()]]
            }
            Gate::Rz { theta, .. } => {
                let e = Complex64::from_polar(1.0, -theta / 2.0);
                [[e, ZERO], [ZERO, e.conj()]]
            }
            Gate::H { .. } => {
                let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
                [[h, h], [h, -h]]
            }
            Gate::P { lambda, .. } => [[ONE, ZERO], [ZERO, Complex64::from_polar(1.0, lambda)]],
            Gate::U3 {
                theta, phi, lambda, ..
            } => {
                let (c, s) = half_angle(theta);
                [
                    [c.into(), -Complex64::from_polar(s, lambda)],
                    [
                        Complex64::from_polar(s, phi),
                        Complex64::from_polar(c, phi + lambda),
                    ],
                ]
            }
            _ => return None,
        };
        Some(m)
    }

    /// 4x4 unitary of a two-qubit gate in the basis `|first second>`, with
    /// `first` the high bit of the row/column index.
    pub fn two_qubit_matrix(&self) -> Option<[[Complex64; 4]; 4]> {
        let mut m = [[ZERO; 4]; 4];
        match *self {
            Gate::Cx { .. } => {
                m[0][0] = ONE;
                m[1][1] = ONE;
                m[2][3] = ONE;
                m[3][2] = ONE;
            }
            Gate::Cp { lambda, .. } => {
                m[0][0] = ONE;
                m[1][1] = ONE;
                m[2][2] = ONE;
                m[3][3] = Complex64::from_polar(1.0, lambda);
            }
            Gate::Rzz { theta, .. } => {
                let e = Complex64::from_polar(1.0, -theta / 2.0);
                m[0][0] = e;
                m[1][1] = e.conj();
                m[2][2] = e.conj();
                m[3][3] = e;
            }
            Gate::Rxx { theta, .. } => {
                let (c, s) = half_angle(theta);
                let off = -I * s;
                for k in 0..4 {
                    m[k][k] = c.into();
                    m[k][3 - k] = off;
                }
            }
            Gate::Ryy { theta, .. } => {
                let (c, s) = half_angle(theta);
                for k in 0..4 {
                    m[k][k] = c.into();
                }
                // Y⊗Y maps |00> -> -|11> and |01> -> |10>.
                m[0][3] = I * s;
                m[3][0] = I * s;
                m[1][2] = -I * s;
                m[2][1] = -I * s;
            }
            _ => return None,
        }
        Some(m)
    }
}

fn half_angle(theta: f64) -> (f64, f64) {
    let (s, c) = (theta / 2.0).sin_cos();
    (c, s)
}

/// An ordered gate list bound to a register size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Result<Self> {
        check_register(n_qubits)?;
        Ok(Self {
            n_qubits,
            gates: Vec::new(),
        })
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn count(&self, kind: GateKind) -> usize {
        self.gates.iter().filter(|g| g.kind() == kind).count()
    }
}

fn check_register(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(QfeoError::Capacity(format!(
            "register of {n_qubits} qubits outside 1..={MAX_QUBITS}"
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl Statevector {
    /// `|0...0>` on `n_qubits` qubits.
    pub fn zero_state(n_qubits: usize) -> Result<Self> {
        check_register(n_qubits)?;
        let mut amplitudes = vec![ZERO; 1 << n_qubits];
        amplitudes[0] = ONE;
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Applies `gate` in place.
    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        match *gate {
            Gate::Cx { control, target } => self.apply_cx(control, target),
            Gate::Rzz { a, b, theta } => {
                let (ma, mb) = (1usize << a, 1usize << b);
                let even = Complex64::from_polar(1.0, -theta / 2.0);
                let odd = even.conj();
                for (k, amp) in self.amplitudes.iter_mut().enumerate() {
                    let parity = ((k & ma) != 0) ^ ((k & mb) != 0);
                    *amp *= if parity { odd } else { even };
                }
            }
            Gate::Cp {
                control,
                target,
                lambda,
            } => {
                let mask = (1usize << control) | (1usize << target);
                let phase = Complex64::from_polar(1.0, lambda);
                for (k, amp) in self.amplitudes.iter_mut().enumerate() {
                    if k & mask == mask {
                        *amp *= phase;
                    }
                }
            }
            Gate::Rxx { .. } | Gate::Ryy { .. } => {
                let (a, b) = gate.qubits();
                // Both matrices were checked to exist for these variants.
                let m = gate.two_qubit_matrix().expect("two-qubit gate");
                self.apply_two(a, b.expect("two-qubit gate"), &m);
            }
            _ => {
                let m = gate.single_matrix().expect("single-qubit gate");
                self.apply_single(gate.qubits().0, &m);
            }
        }
        Ok(())
    }

    fn apply_single(&mut self, qubit: usize, m: &[[Complex64; 2]; 2]) {
        let stride = 1usize << qubit;
        for base in (0..self.amplitudes.len()).step_by(stride << 1) {
            for k in base..base + stride {
                let a0 = self.amplitudes[k];
                let a1 = self.amplitudes[k + stride];
                self.amplitudes[k] = m[0][0] * a0 + m[0][1] * a1;
                self.amplitudes[k + stride] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    fn apply_cx(&mut self, control: usize, target: usize) {
        let (mc, mt) = (1usize << control, 1usize << target);
        for k in 0..self.amplitudes.len() {
            if k & mc != 0 && k & mt == 0 {
                self.amplitudes.swap(k, k | mt);
            }
        }
    }

    fn apply_two(&mut self, first: usize, second: usize, m: &[[Complex64; 4]; 4]) {
        let (mf, ms) = (1usize << first, 1usize << second);
        for k in 0..self.amplitudes.len() {
            if k & (mf | ms) != 0 {
                continue;
            }
            let idx = [k, k | ms, k | mf, k | mf | ms];
            let v = idx.map(|i| self.amplitudes[i]);
            for (r, &i) in idx.iter().enumerate() {
                self.amplitudes[i] = m[r][0] * v[0] + m[r][1] * v[1] + m[r][2] * v[2] + m[r][3] * v[3];
            }
        }
    }

    /// Exact single-qubit Pauli expectation.
    ///
    /// Pairs amplitudes `(a0, a1)` that differ only in `qubit`:
    /// `<Z> = sum |a0|^2 - |a1|^2`, `<X> = 2 Re(conj(a0) a1)`,
    /// `<Y> = 2 Im(conj(a0) a1)`.
    pub fn pauli_expectation(&self, qubit: usize, axis: Axis) -> Result<f64> {
        if qubit >= self.n_qubits {
            return Err(QfeoError::QubitIndex {
                index: qubit,
                n_qubits: self.n_qubits,
            });
        }
        let stride = 1usize << qubit;
        let mut acc = 0.0;
        for base in (0..self.amplitudes.len()).step_by(stride << 1) {
            for k in base..base + stride {
                let a0 = self.amplitudes[k];
                let a1 = self.amplitudes[k + stride];
                acc += match axis {
                    Axis::Z => a0.norm_sqr() - a1.norm_sqr(),
                    Axis::X => 2.0 * (a0.conj() * a1).re,
                    Axis::Y => 2.0 * (a0.conj() * a1).im,
                };
            }
        }
        // Round-off can land a hair outside the physical range.
        Ok(acc.clamp(-1.0, 1.0))
    }

    /// `(<X>, <Y>, <Z>)` for every qubit, flattened in qubit order.
    pub fn bloch_vectors(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(3 * self.n_qubits);
        for q in 0..self.n_qubits {
            for axis in Axis::ALL {
                out.push(self.pauli_expectation(q, axis).expect("qubit in range"));
            }
        }
        out
    }
}

/// Functional form of [`Statevector::apply`].
pub fn apply_gate(mut state: Statevector, gate: &Gate) -> Result<Statevector> {
    state.apply(gate)?;
    Ok(state)
}

/// Runs `circuit` from `|0...0>`.
pub fn run_circuit(circuit: &Circuit) -> Result<Statevector> {
    let mut state = Statevector::zero_state(circuit.n_qubits())?;
    for gate in circuit.gates() {
        state.apply(gate)?;
    }
    Ok(state)
}

pub fn pauli_expectation(state: &Statevector, qubit: usize, axis: Axis) -> Result<f64> {
    state.pauli_expectation(qubit, axis)
}
