#![allow(dead_code)]

pub mod oracle;

use qfeo_core::statevec::Gate;
use rand::Rng;

/// A uniformly chosen gate from the full gate set with random angles.
pub fn random_gate<R: Rng>(n: usize, rng: &mut R) -> Gate {
    let angle = |rng: &mut R| rng.random_range(-std::f64::consts::TAU..std::f64::consts::TAU);
    let q = rng.random_range(0..n);
    let kinds = if n >= 2 { 11 } else { 6 };
    let pair = |rng: &mut R| {
        let a = rng.random_range(0..n);
        let mut b = rng.random_range(0..n - 1);
        if b >= a {
            b += 1;
        }
        (a, b)
    };
    match rng.random_range(0..kinds) {
        0 => Gate::Rx { qubit: q, theta: angle(rng) },
        1 => Gate::Ry { qubit: q, theta: angle(rng) },
        2 => Gate::Rz { qubit: q, theta: angle(rng) },
        3 => Gate::H { qubit: q },
        4 => Gate::P { qubit: q, lambda: angle(rng) },
        5 => Gate::U3 { qubit: q, theta: angle(rng), phi: angle(rng), lambda: angle(rng) },
        6 => {
            let (control, target) = pair(rng);
            Gate::Cx { control, target }
        }
        7 => {
            let (a, b) = pair(rng);
            Gate::Rxx { a, b, theta: angle(rng) }
        }
        8 => {
            let (a, b) = pair(rng);
            Gate::Ryy { a, b, theta: angle(rng) }
        }
        9 => {
            let (a, b) = pair(rng);
            Gate::Rzz { a, b, theta: angle(rng) }
        }
        _ => {
            let (control, target) = pair(rng);
            Gate::Cp { control, target, lambda: angle(rng) }
        }
    }
}
