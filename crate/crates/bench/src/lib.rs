//! Fixtures shared by the benchmarks.

use std::sync::Arc;

pub use iproj;
use iproj::{Constraint, DensityVector, DiscreteMeasure, EngineOptions, GridSpec, Problem};

/// Uniform base on [0,1] with `E[X] >= 0.7` and `E[X^2] >= 0.7`.
pub fn two_moment_problem(n: usize) -> Problem {
    let g = Arc::new(GridSpec::unit_interval(n).expect("n > 0"));
    let q = DiscreteMeasure::uniform(g.clone());
    let c1 = Constraint::moment_inequality(DensityVector::from_fn(g.clone(), |p| p[0] - 0.7).expect("finite"));
    let c2 = Constraint::moment_inequality(DensityVector::from_fn(g, |p| p[0] * p[0] - 0.7).expect("finite"));
    Problem::new(q, vec![c1, c2], EngineOptions::default()).expect("valid problem")
}

/// A smooth, strictly positive probability measure on the unit square.
pub fn smooth_square(n: usize) -> DiscreteMeasure {
    let g = Arc::new(GridSpec::unit_square(n).expect("n > 0"));
    let m = DiscreteMeasure::from_density(g, |p| 1.0 + 0.5 * (6.0 * p[0]).sin() * p[1]).expect("positive");
    iproj::normalize(&m).expect("positive mass").0
}

/// Deterministic pseudo-random values in `[-1, 1)`.
pub fn wobble(n: usize) -> Vec<f64> {
    let mut x = 0x9e37_79b9_7f4a_7c15_u64;
    (0..n)
        .map(|_| {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            (x >> 11) as f64 / (1u64 << 52) as f64 - 1.0
        })
        .collect()
}
