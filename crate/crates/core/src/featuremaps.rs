//! Feature-map circuit builders.
//!
//! Three families are supported:
//!
//! - **Separate Entangled**: per block, `density` rotation layers that assign
//!   features round-robin across qubits, rotation axes cycling through the
//!   configured Pauli list, with a CNOT entanglement layer between blocks.
//! - **Heisenberg Hamiltonian**: a frozen random `U3` layer, then one feature
//!   per qubit pair in brickwork order, each encoded as `RZZ, RYY, RXX`.
//! - **Repeated Pauli**: Pauli feature-map blocks repeated over consecutive
//!   chunks of `n_qubits` features, with phase gates `P(a x_i)` and
//!   `P(a x_i x_j)` on entangled pairs.
//!
//! Every builder encodes `alpha * multiplier_i * x_i` for feature `i`; the
//! multipliers are all ones unless data reloading is enabled.

use std::f64::consts::{FRAC_PI_2, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QfeoError, Result};
use crate::seed;
use crate::statevec::{Axis, Circuit, Gate};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    SeparateEntangled,
    HeisenbergHamiltonian,
    RepeatedPauli,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Entanglement {
    Linear,
    Pairwise,
    Circular,
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// Qubit pairs of one entanglement pattern.
///
/// `parity` only matters for `Pairwise`, which alternates between the even
/// bonds `(0,1),(2,3),...` and the odd bonds `(1,2),(3,4),...`. The circular
/// wrap-around bond `(n-1, 0)` comes first, as in the usual ring layout, and
/// is dropped when it duplicates `(0,1)`.
pub fn entanglement_pairs(
    pattern: Entanglement,
    n_qubits: usize,
    parity: Parity,
) -> Vec<(usize, usize)> {
    if n_qubits < 2 {
        return Vec::new();
    }
    let linear = || (0..n_qubits - 1).map(|q| (q, q + 1));
    match pattern {
        Entanglement::Linear => linear().collect(),
        Entanglement::Pairwise => {
            let start = match parity {
                Parity::Even => 0,
                Parity::Odd => 1,
            };
            (start..n_qubits - 1).step_by(2).map(|q| (q, q + 1)).collect()
        }
        Entanglement::Circular => {
            if n_qubits == 2 {
                linear().collect()
            } else {
                std::iter::once((n_qubits - 1, 0)).chain(linear()).collect()
            }
        }
        Entanglement::Full => (0..n_qubits)
            .flat_map(|i| (i + 1..n_qubits).map(move |j| (i, j)))
            .collect(),
    }
}

/// A full entanglement layer: for `Pairwise` the even bonds followed by the
/// odd bonds, otherwise the pattern's pairs.
pub fn entanglement_layer(pattern: Entanglement, n_qubits: usize) -> Vec<(usize, usize)> {
    let mut pairs = entanglement_pairs(pattern, n_qubits, Parity::Even);
    if pattern == Entanglement::Pairwise {
        pairs.extend(entanglement_pairs(pattern, n_qubits, Parity::Odd));
    }
    pairs
}

/// Nearest-neighbour brickwork sweep used by the Heisenberg map.
pub fn brickwork_sweep(n_qubits: usize) -> Vec<(usize, usize)> {
    entanglement_layer(Entanglement::Pairwise, n_qubits)
}

/// A Pauli operator string such as `Y` or `XZ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PauliTerm(Vec<Axis>);

impl PauliTerm {
    pub fn parse(label: &str) -> Result<Self> {
        let axes: Option<Vec<Axis>> = label.chars().map(Axis::from_char).collect();
        match axes {
            Some(a) if !a.is_empty() => Ok(Self(a)),
            _ => Err(QfeoError::Config(format!("invalid Pauli label {label:?}"))),
        }
    }

    pub fn axes(&self) -> &[Axis] {
        &self.0
    }
}

fn default_reload_factor() -> f64 {
    2.0
}

fn default_entanglement() -> Entanglement {
    Entanglement::Pairwise
}

fn default_one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureMapConfig {
    pub family: Family,
    pub n_qubits: usize,
    #[serde(default = "default_one")]
    pub blocks: usize,
    #[serde(default = "default_one")]
    pub density: usize,
    #[serde(default = "default_entanglement")]
    pub entanglement: Entanglement,
    pub alpha: f64,
    #[serde(default)]
    pub paulis: Vec<String>,
    #[serde(default)]
    pub u3_seed: u64,
    #[serde(default)]
    pub reload: bool,
    #[serde(default = "default_reload_factor")]
    pub reload_alpha_factor: f64,
}

impl FeatureMapConfig {
    /// Named configurations. Qubit count defaults to 9, the low end of the
    /// reference sweep; callers override it.
    pub fn preset(name: &str) -> Option<Self> {
        let yxz = || vec!["Y".to_string(), "X".to_string(), "Z".to_string()];
        let se = |density, entanglement, alpha| FeatureMapConfig {
            family: Family::SeparateEntangled,
            n_qubits: 9,
            blocks: 9,
            density,
            entanglement,
            alpha,
            paulis: yxz(),
            u3_seed: 0,
            reload: false,
            reload_alpha_factor: 2.0,
        };
        let hh = |alpha| FeatureMapConfig {
            family: Family::HeisenbergHamiltonian,
            n_qubits: 9,
            blocks: 1,
            density: 1,
            entanglement: Entanglement::Pairwise,
            alpha,
            paulis: Vec::new(),
            u3_seed: 0,
            reload: false,
            reload_alpha_factor: 2.0,
        };
        Some(match name {
            "se-0" => se(3, Entanglement::Full, 0.1),
            "se-1" => se(3, Entanglement::Pairwise, 0.1),
            "se-2" => se(2, Entanglement::Pairwise, 0.3),
            "hh-0" => hh(0.1),
            "hh-1" => hh(0.3),
            "rp-0" => FeatureMapConfig {
                family: Family::RepeatedPauli,
                n_qubits: 9,
                blocks: 16,
                density: 1,
                entanglement: Entanglement::Pairwise,
                alpha: 0.1,
                paulis: vec!["Y".to_string(), "XZ".to_string()],
                u3_seed: 0,
                reload: false,
                reload_alpha_factor: 2.0,
            },
            _ => return None,
        })
    }

    pub const PRESETS: [&'static str; 6] = ["se-0", "se-1", "se-2", "hh-0", "hh-1", "rp-0"];

    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(QfeoError::Config(m));
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return err(format!("alpha must be positive, got {}", self.alpha));
        }
        if self.blocks == 0 || self.density == 0 {
            return err("blocks and density must be at least 1".into());
        }
        if self.n_qubits < 2 {
            return err(format!(
                "entangling feature maps need at least 2 qubits, got {}",
                self.n_qubits
            ));
        }
        if self.n_qubits > crate::statevec::MAX_QUBITS {
            return Err(QfeoError::Capacity(format!(
                "{} qubits exceeds the simulator limit",
                self.n_qubits
            )));
        }
        if self.reload && !(self.reload_alpha_factor > 0.0 && self.reload_alpha_factor.is_finite())
        {
            return err("reload_alpha_factor must be positive".into());
        }
        let terms = self.pauli_terms()?;
        match self.family {
            Family::SeparateEntangled => {
                if terms.is_empty() || terms.iter().any(|t| t.axes().len() != 1) {
                    return err("separate entangled paulis must be single axes".into());
                }
            }
            Family::RepeatedPauli => {
                if terms.is_empty() || terms.iter().any(|t| t.axes().len() > 2) {
                    return err("repeated Pauli terms must act on one or two qubits".into());
                }
            }
            Family::HeisenbergHamiltonian => {}
        }
        Ok(())
    }

    pub fn pauli_terms(&self) -> Result<Vec<PauliTerm>> {
        self.paulis.iter().map(|p| PauliTerm::parse(p)).collect()
    }

    /// Maximum number of encoded features (after reloading), or `None` when
    /// the family keeps sweeping until the features run out.
    pub fn capacity(&self) -> Option<usize> {
        match self.family {
            Family::SeparateEntangled => Some(self.blocks * self.density * self.n_qubits),
            Family::HeisenbergHamiltonian => None,
            Family::RepeatedPauli => Some(self.blocks * self.n_qubits),
        }
    }

    /// Capacity in raw features, accounting for reloading doubling the input.
    pub fn feature_capacity(&self) -> Option<usize> {
        self.capacity()
            .map(|c| if self.reload { c / 2 } else { c })
    }
}

/// Frozen `U3` angles for the Heisenberg map, one `(theta, phi, lambda)`
/// triple per qubit drawn uniformly from `[0, 2pi)`.
#[derive(Clone, Debug, PartialEq)]
pub struct U3AngleBank {
    angles: Vec<[f64; 3]>,
}

impl U3AngleBank {
    pub fn new(u3_seed: u64, n_qubits: usize) -> Self {
        let mut rng = seed::rng(u3_seed);
        let angles = (0..n_qubits)
            .map(|_| {
                [
                    rng.random_range(0.0..TAU),
                    rng.random_range(0.0..TAU),
                    rng.random_range(0.0..TAU),
                ]
            })
            .collect();
        Self { angles }
    }

    pub fn angles(&self) -> &[[f64; 3]] {
        &self.angles
    }
}

/// Tiles `x` after itself; the second copy gets `factor` as its angle
/// multiplier.
pub fn apply_data_reloading(x: &[f64], factor: f64) -> (Vec<f64>, Vec<f64>) {
    let mut values = Vec::with_capacity(2 * x.len());
    values.extend_from_slice(x);
    values.extend_from_slice(x);
    let mut multipliers = vec![1.0; x.len()];
    multipliers.resize(2 * x.len(), factor);
    (values, multipliers)
}

fn check_multipliers(x: &[f64], multipliers: Option<&[f64]>) -> Result<Vec<f64>> {
    match multipliers {
        None => Ok(vec![1.0; x.len()]),
        Some(m) if m.len() == x.len() => Ok(m.to_vec()),
        Some(m) => Err(QfeoError::Shape(format!(
            "{} multipliers for {} features",
            m.len(),
            x.len()
        ))),
    }
}

fn check_capacity(cfg: &FeatureMapConfig, len: usize) -> Result<()> {
    if let Some(cap) = cfg.capacity() {
        if len > cap {
            return Err(QfeoError::Encoding(format!(
                "{len} features exceed the capacity {cap} of the {:?} map on {} qubits",
                cfg.family, cfg.n_qubits
            )));
        }
    }
    Ok(())
}

fn check_family(cfg: &FeatureMapConfig, family: Family) -> Result<()> {
    cfg.validate()?;
    if cfg.family != family {
        return Err(QfeoError::Config(format!(
            "builder for {family:?} called with a {:?} config",
            cfg.family
        )));
    }
    Ok(())
}

pub fn build_separate_entangled(
    cfg: &FeatureMapConfig,
    x: &[f64],
    multipliers: Option<&[f64]>,
) -> Result<Circuit> {
    check_family(cfg, Family::SeparateEntangled)?;
    check_capacity(cfg, x.len())?;
    let mult = check_multipliers(x, multipliers)?;
    let axes: Vec<Axis> = cfg.pauli_terms()?.iter().map(|t| t.axes()[0]).collect();
    let n = cfg.n_qubits;
    let layer = entanglement_layer(cfg.entanglement, n);

    let mut circuit = Circuit::new(n)?;
    let mut next = 0;
    let mut rotation_layer = 0;
    for block in 0..cfg.blocks {
        if next >= x.len() {
            break;
        }
        if block > 0 {
            for &(c, t) in &layer {
                circuit.push(Gate::Cx {
                    control: c,
                    target: t,
                })?;
            }
        }
        for _ in 0..cfg.density {
            let axis = axes[rotation_layer % axes.len()];
            rotation_layer += 1;
            for q in 0..n {
                if next >= x.len() {
                    break;
                }
                circuit.push(Gate::rotation(axis, q, cfg.alpha * mult[next] * x[next]))?;
                next += 1;
            }
        }
    }
    Ok(circuit)
}

pub fn build_heisenberg(
    cfg: &FeatureMapConfig,
    x: &[f64],
    multipliers: Option<&[f64]>,
    bank: &U3AngleBank,
) -> Result<Circuit> {
    check_family(cfg, Family::HeisenbergHamiltonian)?;
    let mult = check_multipliers(x, multipliers)?;
    let n = cfg.n_qubits;
    if bank.angles().len() != n {
        return Err(QfeoError::Shape(format!(
            "U3 bank holds {} qubits, map has {n}",
            bank.angles().len()
        )));
    }
    let sweep = brickwork_sweep(n);

    let mut circuit = Circuit::new(n)?;
    for (q, &[theta, phi, lambda]) in bank.angles().iter().enumerate() {
        circuit.push(Gate::U3 {
            qubit: q,
            theta,
            phi,
            lambda,
        })?;
    }
    for _ in 0..cfg.blocks {
        for (i, &xi) in x.iter().enumerate() {
            let (a, b) = sweep[i % sweep.len()];
            let theta = cfg.alpha * mult[i] * xi;
            circuit.push(Gate::Rzz { a, b, theta })?;
            circuit.push(Gate::Ryy { a, b, theta })?;
            circuit.push(Gate::Rxx { a, b, theta })?;
        }
    }
    Ok(circuit)
}

fn push_basis_change(circuit: &mut Circuit, axis: Axis, q: usize, inverse: bool) -> Result<()> {
    match axis {
        Axis::X => circuit.push(Gate::H { qubit: q }),
        Axis::Y => circuit.push(Gate::Rx {
            qubit: q,
            theta: if inverse { -FRAC_PI_2 } else { FRAC_PI_2 },
        }),
        Axis::Z => Ok(()),
    }
}

pub fn build_repeated_pauli(
    cfg: &FeatureMapConfig,
    x: &[f64],
    multipliers: Option<&[f64]>,
) -> Result<Circuit> {
    check_family(cfg, Family::RepeatedPauli)?;
    check_capacity(cfg, x.len())?;
    let mult = check_multipliers(x, multipliers)?;
    let terms = cfg.pauli_terms()?;
    let n = cfg.n_qubits;
    let pairs = entanglement_layer(cfg.entanglement, n);

    // Range of every product angle is checked before any gate is emitted.
    let mut products = Vec::new();
    for (chunk_idx, chunk) in x.chunks(n).enumerate() {
        let offset = chunk_idx * n;
        for &(a, b) in pairs.iter().filter(|&&(a, b)| a < chunk.len() && b < chunk.len()) {
            let (ia, ib) = (offset + a, offset + b);
            let angle = cfg.alpha * x[ia] * x[ib] * (mult[ia] * mult[ib]).sqrt();
            if !(0.0..TAU).contains(&angle) {
                return Err(QfeoError::AngleRange(format!(
                    "product angle {angle:.6} for features {ia} and {ib} outside [0, 2pi)"
                )));
            }
            products.push((chunk_idx, a, b, angle));
        }
    }

    let mut circuit = Circuit::new(n)?;
    for (chunk_idx, chunk) in x.chunks(n).enumerate() {
        let offset = chunk_idx * n;
        let width = chunk.len();
        for q in 0..width {
            circuit.push(Gate::H { qubit: q })?;
        }
        for term in &terms {
            match term.axes() {
                [axis] => {
                    for q in 0..width {
                        let i = offset + q;
                        push_basis_change(&mut circuit, *axis, q, false)?;
                        circuit.push(Gate::P {
                            qubit: q,
                            lambda: cfg.alpha * mult[i] * x[i],
                        })?;
                        push_basis_change(&mut circuit, *axis, q, true)?;
                    }
                }
                [on_second, on_first] => {
                    // Labels read right to left: the last character acts on
                    // the first qubit of the pair.
                    for &(_, a, b, angle) in products.iter().filter(|p| p.0 == chunk_idx) {
                        push_basis_change(&mut circuit, *on_first, a, false)?;
                        push_basis_change(&mut circuit, *on_second, b, false)?;
                        circuit.push(Gate::Cx {
                            control: a,
                            target: b,
                        })?;
                        circuit.push(Gate::P {
                            qubit: b,
                            lambda: angle,
                        })?;
                        circuit.push(Gate::Cx {
                            control: a,
                            target: b,
                        })?;
                        push_basis_change(&mut circuit, *on_second, b, true)?;
                        push_basis_change(&mut circuit, *on_first, a, true)?;
                    }
                }
                _ => unreachable!("validated term width"),
            }
        }
    }
    Ok(circuit)
}

/// Anything that turns one manipulated sample into a circuit.
pub trait Encoder: Sync {
    fn n_qubits(&self) -> usize;
    fn encode(&self, x: &[f64]) -> Result<Circuit>;
}

/// A validated configuration together with its frozen `U3` bank.
#[derive(Clone, Debug)]
pub struct FeatureMap {
    cfg: FeatureMapConfig,
    bank: U3AngleBank,
}

impl FeatureMap {
    pub fn new(cfg: FeatureMapConfig) -> Result<Self> {
        cfg.validate()?;
        let bank = U3AngleBank::new(cfg.u3_seed, cfg.n_qubits);
        Ok(Self { cfg, bank })
    }

    pub fn config(&self) -> &FeatureMapConfig {
        &self.cfg
    }

    pub fn bank(&self) -> &U3AngleBank {
        &self.bank
    }

    fn build(&self, x: &[f64], multipliers: Option<&[f64]>) -> Result<Circuit> {
        match self.cfg.family {
            Family::SeparateEntangled => build_separate_entangled(&self.cfg, x, multipliers),
            Family::HeisenbergHamiltonian => build_heisenberg(&self.cfg, x, multipliers, &self.bank),
            Family::RepeatedPauli => build_repeated_pauli(&self.cfg, x, multipliers),
        }
    }
}

impl Encoder for FeatureMap {
    fn n_qubits(&self) -> usize {
        self.cfg.n_qubits
    }

    fn encode(&self, x: &[f64]) -> Result<Circuit> {
        if self.cfg.reload {
            let (values, multipliers) = apply_data_reloading(x, self.cfg.reload_alpha_factor);
            self.build(&values, Some(&multipliers))
        } else {
            self.build(x, None)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statevec::{run_circuit, GateKind};

    fn se_cfg(n: usize, blocks: usize, density: usize) -> FeatureMapConfig {
        FeatureMapConfig {
            family: Family::SeparateEntangled,
            n_qubits: n,
            blocks,
            density,
            entanglement: Entanglement::Pairwise,
            alpha: 0.1,
            paulis: vec!["Y".into(), "X".into(), "Z".into()],
            u3_seed: 0,
            reload: false,
            reload_alpha_factor: 2.0,
        }
    }

    fn hh_cfg(n: usize) -> FeatureMapConfig {
        FeatureMapConfig {
            family: Family::HeisenbergHamiltonian,
            alpha: 0.1,
            paulis: vec![],
            blocks: 1,
            ..se_cfg(n, 1, 1)
        }
    }

    fn rp_cfg(n: usize) -> FeatureMapConfig {
        FeatureMapConfig {
            family: Family::RepeatedPauli,
            paulis: vec!["Y".into(), "XZ".into()],
            blocks: 8,
            ..se_cfg(n, 1, 1)
        }
    }

    #[test]
    fn pattern_examples() {
        assert_eq!(
            entanglement_pairs(Entanglement::Pairwise, 4, Parity::Even),
            vec![(0, 1), (2, 3)]
        );
        assert_eq!(
            entanglement_pairs(Entanglement::Pairwise, 5, Parity::Odd),
            vec![(1, 2), (3, 4)]
        );
        assert_eq!(
            entanglement_pairs(Entanglement::Full, 3, Parity::Even),
            vec![(0, 1), (0, 2), (1, 2)]
        );
        assert_eq!(
            entanglement_pairs(Entanglement::Circular, 2, Parity::Even),
            vec![(0, 1)]
        );
        assert_eq!(
            entanglement_pairs(Entanglement::Circular, 4, Parity::Even),
            vec![(3, 0), (0, 1), (1, 2), (2, 3)]
        );
        assert_eq!(
            entanglement_pairs(Entanglement::Linear, 4, Parity::Odd),
            vec![(0, 1), (1, 2), (2, 3)]
        );
    }

    #[test]
    fn separate_entangled_two_qubit_layout() {
        let cfg = se_cfg(2, 2, 3);
        let x: Vec<f64> = (0..12).map(|i| i as f64 + 1.0).collect();
        let c = build_separate_entangled(&cfg, &x, None).unwrap();
        let a = |i: usize| 0.1 * x[i];
        let expected = vec![
            Gate::Ry { qubit: 0, theta: a(0) },
            Gate::Ry { qubit: 1, theta: a(1) },
            Gate::Rx { qubit: 0, theta: a(2) },
            Gate::Rx { qubit: 1, theta: a(3) },
            Gate::Rz { qubit: 0, theta: a(4) },
            Gate::Rz { qubit: 1, theta: a(5) },
            Gate::Cx { control: 0, target: 1 },
            Gate::Ry { qubit: 0, theta: a(6) },
            Gate::Ry { qubit: 1, theta: a(7) },
            Gate::Rx { qubit: 0, theta: a(8) },
            Gate::Rx { qubit: 1, theta: a(9) },
            Gate::Rz { qubit: 0, theta: a(10) },
            Gate::Rz { qubit: 1, theta: a(11) },
        ];
        assert_eq!(c.gates(), expected.as_slice());
    }

    #[test]
    fn separate_entangled_zero_input_keeps_ground_state() {
        let cfg = se_cfg(3, 3, 2);
        let c = build_separate_entangled(&cfg, &[0.0; 18], None).unwrap();
        let s = run_circuit(&c).unwrap();
        for q in 0..3 {
            assert!((s.pauli_expectation(q, Axis::Z).unwrap() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn separate_entangled_capacity_guard() {
        let cfg = se_cfg(2, 2, 3);
        assert!(matches!(
            build_separate_entangled(&cfg, &[0.5; 13], None),
            Err(QfeoError::Encoding(_))
        ));
    }

    #[test]
    fn separate_entangled_skips_empty_blocks() {
        let cfg = se_cfg(4, 9, 1);
        let c = build_separate_entangled(&cfg, &[0.5; 4], None).unwrap();
        assert_eq!(c.len(), 4);
        assert_eq!(c.count(GateKind::Cx), 0);
        let c = build_separate_entangled(&cfg, &[0.5; 6], None).unwrap();
        // One pairwise layer on 4 qubits: (0,1),(2,3),(1,2).
        assert_eq!(c.count(GateKind::Cx), 3);
        // Axes cycle across blocks when density is 1.
        assert_eq!(c.gates()[7], Gate::Rx { qubit: 0, theta: 0.05 });
    }

    #[test]
    fn heisenberg_brickwork_assignment() {
        let cfg = hh_cfg(4);
        let bank = U3AngleBank::new(cfg.u3_seed, 4);
        let x = [1.0, 2.0, 3.0, 4.0];
        let c = build_heisenberg(&cfg, &x, None, &bank).unwrap();
        assert_eq!(c.count(GateKind::U3), 4);
        let pairs: Vec<(usize, usize, f64)> = c
            .gates()
            .iter()
            .filter_map(|g| match *g {
                Gate::Rzz { a, b, theta } => Some((a, b, theta)),
                _ => None,
            })
            .collect();
        assert_eq!(
            pairs,
            vec![(0, 1, 0.1), (2, 3, 0.2), (1, 2, 0.1 * 3.0), (0, 1, 0.4)]
        );
        // Each feature is a RZZ, RYY, RXX triple on the same pair.
        for (k, chunk) in c.gates()[4..].chunks(3).enumerate() {
            let (a, b, t) = pairs[k];
            assert_eq!(
                chunk,
                &[
                    Gate::Rzz { a, b, theta: t },
                    Gate::Ryy { a, b, theta: t },
                    Gate::Rxx { a, b, theta: t }
                ]
            );
        }
    }

    #[test]
    fn heisenberg_empty_input_and_determinism() {
        let cfg = hh_cfg(4);
        let m1 = FeatureMap::new(cfg.clone()).unwrap();
        let m2 = FeatureMap::new(cfg).unwrap();
        let c = m1.encode(&[]).unwrap();
        assert_eq!(c.len(), 4);
        assert!(c.gates().iter().all(|g| g.kind() == GateKind::U3));
        let x = [0.3, 1.2, 2.8, 0.9, 1.7];
        assert_eq!(m1.encode(&x).unwrap(), m2.encode(&x).unwrap());
    }

    #[test]
    fn repeated_pauli_two_blocks() {
        let cfg = rp_cfg(2);
        let x = [1.0, 2.0, 3.0, 4.0];
        let c = build_repeated_pauli(&cfg, &x, None).unwrap();
        let h = |q| Gate::H { qubit: q };
        let rx = |q, t| Gate::Rx { qubit: q, theta: t };
        let p = |q, l| Gate::P { qubit: q, lambda: l };
        let cx = Gate::Cx { control: 0, target: 1 };
        let block = |x0: f64, x1: f64| {
            vec![
                h(0),
                h(1),
                rx(0, FRAC_PI_2),
                p(0, 0.1 * x0),
                rx(0, -FRAC_PI_2),
                rx(1, FRAC_PI_2),
                p(1, 0.1 * x1),
                rx(1, -FRAC_PI_2),
                h(1),
                cx.clone(),
                p(1, 0.1 * x0 * x1),
                cx.clone(),
                h(1),
            ]
        };
        let mut expected = block(1.0, 2.0);
        expected.extend(block(3.0, 4.0));
        assert_eq!(c.gates(), expected.as_slice());
    }

    #[test]
    fn repeated_pauli_angle_range() {
        let cfg = rp_cfg(3);
        let x = [2.8, 2.8, 0.3, 1.0, 2.8, 2.8];
        assert!(build_repeated_pauli(&cfg, &x, None).is_ok());
        let big = FeatureMapConfig { alpha: 1.0, ..rp_cfg(3) };
        assert!(matches!(
            build_repeated_pauli(&big, &x, None),
            Err(QfeoError::AngleRange(_))
        ));
        let small = FeatureMapConfig { blocks: 1, ..rp_cfg(3) };
        assert!(matches!(
            build_repeated_pauli(&small, &x, None),
            Err(QfeoError::Encoding(_))
        ));
    }

    #[test]
    fn reloading_tiles_and_scales() {
        let x: Vec<f64> = (0..67).map(|i| i as f64).collect();
        let (v, m) = apply_data_reloading(&x, 2.0);
        assert_eq!(v.len(), 134);
        assert_eq!(&v[67..], x.as_slice());
        assert!(m[..67].iter().all(|&k| k == 1.0) && m[67..].iter().all(|&k| k == 2.0));
        let (v, m) = apply_data_reloading(&[0.4], 2.0);
        assert_eq!((v, m), (vec![0.4, 0.4], vec![1.0, 2.0]));
    }

    #[test]
    fn reload_factor_one_matches_plain_tiling() {
        let cfg = FeatureMapConfig {
            reload: true,
            reload_alpha_factor: 1.0,
            ..hh_cfg(4)
        };
        let map = FeatureMap::new(cfg.clone()).unwrap();
        let x = [0.5, 1.5, 2.5];
        let tiled = [0.5, 1.5, 2.5, 0.5, 1.5, 2.5];
        let plain = build_heisenberg(&cfg, &tiled, None, map.bank()).unwrap();
        assert_eq!(map.encode(&x).unwrap(), plain);
    }

    #[test]
    fn reload_doubles_second_copy_angles() {
        let cfg = FeatureMapConfig { reload: true, ..hh_cfg(4) };
        let map = FeatureMap::new(cfg).unwrap();
        let c = map.encode(&[1.0, 2.0, 3.0]).unwrap();
        let rzz: Vec<(usize, usize, f64)> = c
            .gates()
            .iter()
            .filter_map(|g| match *g {
                Gate::Rzz { a, b, theta } => Some((a, b, theta)),
                _ => None,
            })
            .collect();
        let expected = [
            (0, 1, 0.1),
            (2, 3, 0.2),
            (1, 2, 0.1 * 3.0),
            (0, 1, 0.2),
            (2, 3, 0.4),
            (1, 2, 0.2 * 3.0),
        ];
        for (got, want) in rzz.iter().zip(expected.iter()) {
            assert_eq!((got.0, got.1), (want.0, want.1));
            assert!((got.2 - want.2).abs() < 1e-15);
        }
    }

    #[test]
    fn config_validation() {
        assert!(FeatureMapConfig { alpha: 0.0, ..se_cfg(2, 1, 1) }.validate().is_err());
        assert!(FeatureMapConfig { blocks: 0, ..se_cfg(2, 1, 1) }.validate().is_err());
        assert!(se_cfg(1, 1, 1).validate().is_err());
        assert!(FeatureMapConfig { paulis: vec!["XZ".into()], ..se_cfg(2, 1, 1) }
            .validate()
            .is_err());
        assert!(FeatureMapConfig { paulis: vec!["Q".into()], ..rp_cfg(2) }.validate().is_err());
        for name in FeatureMapConfig::PRESETS {
            FeatureMapConfig::preset(name).unwrap().validate().unwrap();
        }
        assert!(FeatureMapConfig::preset("se-9").is_none());
    }

    #[test]
    fn builder_rejects_wrong_family() {
        assert!(build_repeated_pauli(&se_cfg(2, 1, 1), &[1.0], None).is_err());
    }
}
