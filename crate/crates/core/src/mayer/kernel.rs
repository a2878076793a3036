//! Integrands of the cluster integrals: the Ursell weight (sum over connected
//! graphs of products of Mayer factors) and the connected Boltzmann weight.

use crate::configuration::Configuration;
use crate::error::{Error, Result};
use crate::graphs::{self, MAX_VERTICES};
use crate::potential::PairPotential;

/// `exp(-beta v(r))`, zero inside the hard core.
#[inline]
pub(crate) fn boltzmann(p: &PairPotential, r: f64, beta: f64) -> f64 {
    let v = p.value(r);
    if v.is_infinite() {
        0.0
    } else {
        (-beta * v).exp()
    }
}

/// `exp(-beta v(r)) - 1`, `-1` inside the hard core, exactly `0` beyond the range.
#[inline]
pub(crate) fn mayer_factor(p: &PairPotential, r: f64, beta: f64) -> f64 {
    let v = p.value(r);
    if v.is_infinite() {
        -1.0
    } else {
        (-beta * v).exp_m1()
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(crate::error::precondition(format!(
            "beta must be positive, got {beta}"
        )))
    }
}

/// Ursell weight by explicit summation over the labeled connected graphs.
///
/// Returns exactly zero when the range graph of `x` is disconnected.
pub fn ursell_weight(p: &PairPotential, x: &Configuration, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let k = x.len();
    let graphs = graphs::connected_graphs(k).and_then(|g| {
        if k < 2 {
            Err(Error::OutOfRange {
                what: "k",
                value: k,
                min: 2,
                max: graphs::DEFAULT_K_MAX,
            })
        } else {
            Ok(g)
        }
    })?;
    if !x.is_range_connected(p.range()) {
        return Ok(0.0);
    }
    let mut f = Vec::with_capacity(graphs::edge_count(k));
    for j in 1..k {
        for i in 0..j {
            f.push(mayer_factor(p, x.distance(i, j), beta));
        }
    }
    let mut total = 0.0;
    for g in graphs {
        let mut term = 1.0;
        let mut mask = g.mask();
        while mask != 0 {
            let e = mask.trailing_zeros() as usize;
            term *= f[e];
            mask &= mask - 1;
        }
        total += term;
    }
    Ok(total)
}

/// Ursell weight through the subset recursion of [`UrsellKernel`].
pub fn ursell_weight_fast(p: &PairPotential, x: &Configuration, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let k = x.len();
    if !(2..=MAX_VERTICES).contains(&k) {
        return Err(Error::OutOfRange {
            what: "k",
            value: k,
            min: 2,
            max: MAX_VERTICES,
        });
    }
    if !x.is_range_connected(p.range()) {
        return Ok(0.0);
    }
    let mut kernel = UrsellKernel::new(k);
    let boltz = kernel.boltz_mut();
    for j in 1..k {
        for i in 0..j {
            boltz[i * k + j] = boltzmann(p, x.distance(i, j), beta);
        }
    }
    Ok(kernel.connected_sum())
}

/// `exp(-beta U(x))` times the indicator that the range graph of `x` is connected.
pub fn connected_boltzmann_weight(p: &PairPotential, x: &Configuration, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    if !x.is_range_connected(p.range()) {
        return Ok(0.0);
    }
    let u = crate::groundstate::total_energy(p, x);
    Ok(if u.is_infinite() {
        0.0
    } else {
        (-beta * u).exp()
    })
}

/// Connected sum over a `k`-vertex pair-weight matrix in `O(3^k)`.
///
/// With `W(S)` the product of `1 + f_ij` over pairs inside `S`, the sum over
/// connected graphs on `S` satisfies
/// `C(S) = W(S) - sum_{min S in T, T strict subset of S} C(T) W(S \ T)`.
/// Only sets containing vertex 0 need `C`.
#[derive(Debug, Clone)]
pub struct UrsellKernel {
    k: usize,
    boltz: Vec<f64>,
    w: Vec<f64>,
    c: Vec<f64>,
}

impl UrsellKernel {
    pub fn new(k: usize) -> Self {
        assert!((1..=MAX_VERTICES).contains(&k), "kernel size out of range");
        Self {
            k,
            boltz: vec![1.0; k * k],
            w: vec![0.0; 1 << k],
            c: vec![0.0; 1 << k],
        }
    }

    pub fn size(&self) -> usize {
        self.k
    }

    /// Row-major `k x k` matrix of `1 + f_ij`; only entries with `i < j` are read.
    pub fn boltz_mut(&mut self) -> &mut [f64] {
        &mut self.boltz
    }

    /// Product of `1 + f_ij` over all pairs, i.e. `exp(-beta U)`.
    pub fn full_product(&self) -> f64 {
        let k = self.k;
        let mut prod = 1.0;
        for j in 1..k {
            for i in 0..j {
                prod *= self.boltz[i * k + j];
            }
        }
        prod
    }

    /// Sum over connected graphs on all `k` vertices of the products of `f_ij`.
    pub fn connected_sum(&mut self) -> f64 {
        let k = self.k;
        let full = (1usize << k) - 1;
        self.w[0] = 1.0;
        for s in 1..=full {
            let top = usize::BITS as usize - 1 - s.leading_zeros() as usize;
            let rest = s & !(1 << top);
            let mut prod = self.w[rest];
            let mut m = rest;
            while m != 0 {
                let i = m.trailing_zeros() as usize;
                prod *= self.boltz[i * k + top];
                m &= m - 1;
            }
            self.w[s] = prod;
        }
        // sets containing vertex 0, in increasing order so every proper subset is ready
        for s in (1..=full).step_by(2) {
            let rest = s & !1;
            let mut acc = self.w[s];
            // proper subsets `sub` of `rest`; T = sub + {0}
            let mut sub = (rest.wrapping_sub(1)) & rest;
            if rest != 0 {
                loop {
                    acc -= self.c[sub | 1] * self.w[rest & !sub];
                    if sub == 0 {
                        break;
                    }
                    sub = (sub - 1) & rest;
                }
            }
            self.c[s] = acc;
        }
        self.c[full]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::two_well;

    fn square_well() -> PairPotential {
        PairPotential::square_well(1.0, 1.5, 1.0, 1).unwrap()
    }

    #[test]
    fn spec_examples() {
        let p = square_well();
        let w = ursell_weight(&p, &Configuration::from_1d(&[0.0, 1.2]), 1.0).unwrap();
        assert!((w - (1f64.exp() - 1.0)).abs() < 1e-15);
        assert_eq!(
            ursell_weight(&p, &Configuration::from_1d(&[0.0, 5.0]), 1.0).unwrap(),
            0.0
        );
        assert_eq!(
            ursell_weight(&p, &Configuration::from_1d(&[0.0, 1.2, 10.0]), 1.0).unwrap(),
            0.0
        );
        assert!(ursell_weight(&p, &Configuration::from_1d(&[0.0; 7]), 1.0).is_err());
        assert!(ursell_weight(&p, &Configuration::from_1d(&[0.0]), 1.0).is_err());
    }

    #[test]
    fn three_point_closed_form() {
        // f12 f23 + f12 f13 + f13 f23 + f12 f13 f23
        let p = two_well();
        let x = Configuration::from_1d(&[0.0, 1.05, 2.5]);
        let f = |a: f64| mayer_factor(&p, a, 0.7);
        let (a, b, c) = (f(1.05), f(1.45), f(2.5));
        let expect = a * b + a * c + b * c + a * b * c;
        let got = ursell_weight(&p, &x, 0.7).unwrap();
        assert!((got - expect).abs() < 1e-12 * expect.abs());
    }

    #[test]
    fn k2_equals_mayer_f() {
        let p = two_well();
        for r in [0.3, 0.95, 1.05, 2.0, 2.5, 3.0] {
            let w = ursell_weight(&p, &Configuration::from_1d(&[0.0, r]), 2.0).unwrap();
            assert_eq!(w, p.mayer_f(r, 2.0).unwrap());
        }
    }

    #[test]
    fn small_beta_limit_vanishes() {
        let p = PairPotential::new(
            0.0,
            vec![crate::potential::Piece::constant(0.0, 1.0, -1.0)],
            1,
        )
        .unwrap();
        let x = Configuration::from_1d(&[0.0, 0.3, 0.7, 0.9]);
        let w = ursell_weight(&p, &x, 1e-6).unwrap();
        assert!(w.abs() < 1e-15, "{w}");
    }

    #[test]
    fn connected_boltzmann_examples() {
        let p = square_well();
        let w = connected_boltzmann_weight(&p, &Configuration::from_1d(&[0.0, 1.2]), 1.0).unwrap();
        assert!((w - 1f64.exp()).abs() < 1e-15);
        assert_eq!(
            connected_boltzmann_weight(&p, &Configuration::from_1d(&[0.0, 3.0]), 1.0).unwrap(),
            0.0
        );
        assert_eq!(
            connected_boltzmann_weight(&p, &Configuration::from_1d(&[0.0, 0.5]), 1.0).unwrap(),
            0.0
        );
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn fast_kernel_matches_graph_sum(
                xs in prop::collection::vec(0.0f64..6.0, 2..=6),
                beta in 0.05f64..3.0,
            ) {
                let p = two_well();
                let x = Configuration::from_1d(&xs);
                let slow = ursell_weight(&p, &x, beta).unwrap();
                let fast = ursell_weight_fast(&p, &x, beta).unwrap();
                let scale = slow.abs().max(1.0);
                prop_assert!((slow - fast).abs() <= 1e-9 * scale, "{} vs {}", slow, fast);
            }

            #[test]
            fn fast_kernel_matches_graph_sum_2d(
                pts in prop::collection::vec((0.0f64..3.0, 0.0f64..3.0), 2..=5),
                beta in 0.05f64..2.0,
            ) {
                let p = PairPotential::square_well(0.5, 1.4, 1.0, 2).unwrap();
                let x = Configuration::from_points(&pts.iter().map(|&(a, b)| vec![a, b]).collect::<Vec<_>>());
                let slow = ursell_weight(&p, &x, beta).unwrap();
                let fast = ursell_weight_fast(&p, &x, beta).unwrap();
                prop_assert!((slow - fast).abs() <= 1e-9 * slow.abs().max(1.0));
            }

            #[test]
            fn ursell_weight_is_permutation_invariant(
                xs in prop::collection::vec(0.0f64..5.0, 3..=5),
                rot in 0usize..5,
            ) {
                let p = two_well();
                let mut ys = xs.clone();
                let r = rot % ys.len();
                ys.rotate_left(r);
                let a = ursell_weight(&p, &Configuration::from_1d(&xs), 1.0).unwrap();
                let b = ursell_weight(&p, &Configuration::from_1d(&ys), 1.0).unwrap();
                prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
            }
        }
    }
}
