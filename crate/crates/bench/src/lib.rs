//! Fixtures shared by the benchmarks.

use cluster_virial::{Configuration, PairPotential};

pub fn square_well() -> PairPotential {
    PairPotential::square_well(1.0, 1.5, 1.0, 1).expect("valid fixture")
}

/// A connected `k`-particle chain with gaps alternating inside the well.
pub fn chain(k: usize) -> Configuration {
    let xs: Vec<f64> = (0..k)
        .map(|i| 1.2 * i as f64 + 0.1 * (i % 2) as f64)
        .collect();
    Configuration::from_1d(&xs)
}

/// Mayer coefficients `b_1..b_n` with `b_1 = 1` and alternating magnitudes.
pub fn mayer_vector(n: usize) -> Vec<f64> {
    (1..=n)
        .map(|j| {
            if j == 1 {
                1.0
            } else {
                (-0.7f64).powi(j as i32) / j as f64
            }
        })
        .collect()
}
