//! One-dimensional potentials with range below twice the core only couple
//! nearest neighbours. Then `beta p = s` solves `s = z phi(s)` with
//! `phi(s) = s int_0^inf exp(-s r - beta v(r)) dr`, and Lagrange inversion
//! gives `b_n = [s^(n-1)] phi(s)^n / n`. For piecewise-constant `v`,
//! `phi(s) = sum_i w_i exp(-s L_i)`.

use cluster_virial::mayer::{b_k_quadrature, QuadratureSettings};
use cluster_virial::{PairPotential, Piece};

/// `(weight, length)` pairs of `phi` for a potential made of constant pieces.
fn exponentials(p: &PairPotential, beta: f64) -> Vec<(f64, f64)> {
    let mut out = vec![(1.0, p.range())];
    for piece in p.pieces() {
        let w = (-beta * piece.value_at(piece.r_lo)).exp();
        out.push((w, piece.r_lo));
        out.push((-w, piece.r_hi));
    }
    out
}

fn series_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len()];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate().take(a.len() - i) {
            out[i + j] += x * y;
        }
    }
    out
}

fn lagrange_b(p: &PairPotential, beta: f64, n: usize) -> f64 {
    let terms = exponentials(p, beta);
    let mut phi = vec![0.0; n];
    let mut fact = 1.0;
    for (m, c) in phi.iter_mut().enumerate() {
        if m > 0 {
            fact *= m as f64;
        }
        *c = terms
            .iter()
            .map(|(w, l)| w * (-l).powi(m as i32))
            .sum::<f64>()
            / fact;
    }
    let mut power = vec![0.0; n];
    power[0] = 1.0;
    for _ in 0..n {
        power = series_mul(&power, &phi);
    }
    power[n - 1] / n as f64
}

fn fixtures() -> Vec<(&'static str, PairPotential)> {
    vec![
        (
            "square_well",
            PairPotential::square_well(1.0, 1.5, 1.0, 1).unwrap(),
        ),
        (
            "two_step_well",
            PairPotential::new(
                1.0,
                vec![
                    Piece::constant(1.0, 1.2, -2.0),
                    Piece::constant(1.2, 1.8, -1.0),
                ],
                1,
            )
            .unwrap(),
        ),
        (
            "shoulder",
            PairPotential::new(
                1.0,
                vec![
                    Piece::constant(1.0, 1.3, 0.5),
                    Piece::constant(1.3, 1.6, -0.7),
                ],
                1,
            )
            .unwrap(),
        ),
        ("hard_rods", PairPotential::hard_core(1.0, 1).unwrap()),
    ]
}

#[test]
fn square_well_b2_matches_inversion() {
    let p = PairPotential::square_well(1.0, 1.5, 1.0, 1).unwrap();
    for beta in [0.5, 1.0, 3.0] {
        let exact = -1.0 + 0.5 * (f64::exp(beta) - 1.0);
        assert!((lagrange_b(&p, beta, 2) - exact).abs() < 1e-12 * exact.abs().max(1.0));
    }
}

#[test]
fn hard_rods_follow_tonks() {
    let p = PairPotential::hard_core(1.0, 1).unwrap();
    for n in 1..=6usize {
        let fact: f64 = (1..=n).map(|i| i as f64).product();
        let tonks = (-(n as f64)).powi(n as i32 - 1) / fact;
        assert!((lagrange_b(&p, 1.0, n) - tonks).abs() < 1e-12 * tonks.abs());
    }
}

#[test]
fn quadrature_matches_lagrange_inversion() {
    let settings = QuadratureSettings::default();
    for (name, p) in fixtures() {
        for beta in [0.5, 1.0, 2.0, 4.0] {
            for n in 2..=5 {
                let expected = lagrange_b(&p, beta, n);
                let got = b_k_quadrature(&p, n, beta, &settings).unwrap();
                let scale = expected.abs().max(1e-3);
                assert!(
                    (got.value - expected).abs() <= 1e-9 * scale,
                    "{name} n={n} beta={beta}: quadrature {} vs inversion {expected}",
                    got.value
                );
            }
        }
    }
}
