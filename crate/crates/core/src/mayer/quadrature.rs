//! Deterministic cluster integrals in one dimension.
//!
//! The rooted integral `(1/k!) int w(0, x_2, .., x_k) dx` of a symmetric,
//! translation-invariant weight `w` equals the integral of `w` over ordered
//! configurations `0 = y_1 <= y_2 <= .. <= y_k` (the `k!` orderings cancel
//! the prefactor). Both integrands vanish unless every consecutive gap is at
//! most the range `b`, so each `y_j` runs over `[y_{j-1}, y_{j-1} + b]`.
//!
//! After integrating out `y_{j+1}..y_k`, the integrand in `y_j` is smooth
//! between points `y_i + s` where `i < j` and `s` is a signed sum of
//! `k - j + 1` breakpoint radii. The nested Gauss-Legendre rule splits every
//! level at those points. For piecewise-constant potentials the integrand is
//! then a polynomial of degree `k - j` on each sub-interval, and a rule with
//! `ceil((k - j + 1) / 2)` nodes is exact.

use gauss_quad::GaussLegendre;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernel::{boltzmann, UrsellKernel};
use super::Estimate;
use crate::error::{precondition, Error, Result};
use crate::potential::PairPotential;

/// Breakpoints closer than this are merged.
const CUT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSettings {
    /// Nodes per sub-interval when some piece is not constant.
    pub nodes: usize,
    /// Largest cluster size accepted.
    pub max_k: usize,
    /// Relative error bound above which the result is rejected.
    pub tolerance: Option<f64>,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self {
            nodes: 8,
            max_k: 5,
            tolerance: None,
        }
    }
}

/// Ursell integral `b_k` and connected partition function `Z_k^cl` from one sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterIntegrals {
    pub b: Estimate,
    pub z_cluster: Estimate,
}

#[derive(Debug, Clone, Copy, Default)]
struct Sums {
    ursell: f64,
    ursell_abs: f64,
    boltz: f64,
}

impl Sums {
    fn add_scaled(&mut self, o: &Sums, w: f64) {
        self.ursell += w * o.ursell;
        self.ursell_abs += w * o.ursell_abs;
        self.boltz += w * o.boltz;
    }
}

struct Rule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Rule {
    fn new(n: usize) -> Self {
        let gl = GaussLegendre::new(n.try_into().expect("positive node count"));
        Self {
            nodes: gl.nodes().copied().collect(),
            weights: gl.weights().copied().collect(),
        }
    }
}

struct Integrator<'a> {
    p: &'a PairPotential,
    k: usize,
    beta: f64,
    range: f64,
    /// `shifts[l]`: sorted signed sums of `l` radii.
    shifts: Vec<Vec<f64>>,
    /// Rule per particle index `1..k`.
    rules: Vec<Rule>,
}

impl<'a> Integrator<'a> {
    fn new(p: &'a PairPotential, k: usize, beta: f64, smooth_nodes: Option<usize>) -> Self {
        let range = p.range();
        let mut radii = vec![0.0];
        radii.extend(p.breakpoints());
        let mut shifts: Vec<Vec<f64>> = vec![vec![0.0]];
        for l in 1..k {
            let limit = l as f64 * range + CUT_TOL;
            let mut next: Vec<f64> = shifts[l - 1]
                .iter()
                .flat_map(|s| radii.iter().flat_map(move |r| [s + r, s - r]))
                .filter(|s| s.abs() <= limit)
                .collect();
            sort_dedup(&mut next);
            shifts.push(next);
        }
        let rules = (0..k)
            .map(|t| {
                let n = match smooth_nodes {
                    Some(n) => n,
                    None => (k - t.max(1)).div_ceil(2).max(1),
                };
                Rule::new(n)
            })
            .collect();
        Self {
            p,
            k,
            beta,
            range,
            shifts,
            rules,
        }
    }

    /// Sub-interval endpoints for particle `t` given `y[0..t]`.
    fn cuts(&self, t: usize, y: &[f64], out: &mut Vec<f64>) {
        let lo = y[t - 1];
        let hi = lo + self.range;
        out.clear();
        out.push(lo);
        out.push(hi);
        let shifts = &self.shifts[self.k - t];
        for &anchor in &y[..t] {
            let from = shifts.partition_point(|&s| anchor + s <= lo);
            for &s in &shifts[from..] {
                let c = anchor + s;
                if c >= hi {
                    break;
                }
                out.push(c);
            }
        }
        sort_dedup(out);
    }

    fn place(&self, t: usize, y: &mut [f64], kernel: &mut UrsellKernel, pos: f64) {
        y[t] = pos;
        let k = self.k;
        let boltz = kernel.boltz_mut();
        for i in 0..t {
            boltz[i * k + t] = boltzmann(self.p, pos - y[i], self.beta);
        }
    }

    fn level(
        &self,
        t: usize,
        y: &mut [f64],
        kernel: &mut UrsellKernel,
        cut_buf: &mut [Vec<f64>],
    ) -> Sums {
        if t == self.k {
            let w = kernel.connected_sum();
            return Sums {
                ursell: w,
                ursell_abs: w.abs(),
                boltz: kernel.full_product(),
            };
        }
        let (head, tail) = cut_buf.split_at_mut(1);
        let cuts = &mut head[0];
        self.cuts(t, y, cuts);
        let rule = &self.rules[t];
        let mut acc = Sums::default();
        for w in cuts.windows(2) {
            let half = 0.5 * (w[1] - w[0]);
            let mid = 0.5 * (w[1] + w[0]);
            for (x, wt) in rule.nodes.iter().zip(&rule.weights) {
                self.place(t, y, kernel, mid + half * x);
                let inner = self.level(t + 1, y, kernel, tail);
                acc.add_scaled(&inner, half * wt);
            }
        }
        acc
    }

    fn run(&self) -> Sums {
        let k = self.k;
        let mut y = vec![0.0; k];
        let mut top_cuts = Vec::new();
        self.cuts(1, &y, &mut top_cuts);
        let rule = &self.rules[1];
        let tasks: Vec<(f64, f64)> = top_cuts
            .windows(2)
            .flat_map(|w| {
                let half = 0.5 * (w[1] - w[0]);
                let mid = 0.5 * (w[1] + w[0]);
                rule.nodes
                    .iter()
                    .zip(&rule.weights)
                    .map(move |(x, wt)| (mid + half * x, half * wt))
            })
            .collect();
        let parts: Vec<Sums> = tasks
            .par_iter()
            .map(|&(pos, wt)| {
                let mut y = vec![0.0; k];
                let mut kernel = UrsellKernel::new(k);
                let mut bufs = vec![Vec::new(); k];
                self.place(1, &mut y, &mut kernel, pos);
                let mut s = Sums::default();
                s.add_scaled(&self.level(2, &mut y, &mut kernel, &mut bufs), wt);
                s
            })
            .collect();
        y.clear();
        let mut total = Sums::default();
        for s in &parts {
            total.add_scaled(s, 1.0);
        }
        total
    }
}

fn sort_dedup(v: &mut Vec<f64>) {
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() <= CUT_TOL);
}

fn check(p: &PairPotential, k: usize, beta: f64, settings: &QuadratureSettings) -> Result<()> {
    if p.dimension() != 1 {
        return Err(Error::UnsupportedDimension(p.dimension()));
    }
    if !(1..=settings.max_k).contains(&k) {
        return Err(Error::OutOfRange {
            what: "k",
            value: k,
            min: 1,
            max: settings.max_k,
        });
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(precondition(format!("beta must be positive, got {beta}")));
    }
    if settings.nodes == 0 {
        return Err(precondition("quadrature needs at least one node"));
    }
    Ok(())
}

/// `b_k(beta)` and `Z_k^cl(beta)` for a one-dimensional potential.
///
/// The error is a round-off estimate for piecewise-constant potentials (the
/// rule is exact there) and the difference to a rule with doubled node count
/// otherwise.
pub fn cluster_integrals_quadrature(
    p: &PairPotential,
    k: usize,
    beta: f64,
    settings: &QuadratureSettings,
) -> Result<ClusterIntegrals> {
    check(p, k, beta, settings)?;
    if k == 1 {
        let one = Estimate {
            value: 1.0,
            error: 0.0,
        };
        return Ok(ClusterIntegrals {
            b: one,
            z_cluster: one,
        });
    }
    let result = if p.is_piecewise_constant() {
        let s = Integrator::new(p, k, beta, None).run();
        let roundoff = 64.0 * f64::EPSILON * k as f64;
        ClusterIntegrals {
            b: Estimate {
                value: s.ursell,
                error: roundoff * s.ursell_abs.max(s.boltz),
            },
            z_cluster: Estimate {
                value: s.boltz,
                error: roundoff * s.boltz,
            },
        }
    } else {
        let coarse = Integrator::new(p, k, beta, Some(settings.nodes)).run();
        let fine = Integrator::new(p, k, beta, Some(2 * settings.nodes)).run();
        ClusterIntegrals {
            b: Estimate {
                value: fine.ursell,
                error: (fine.ursell - coarse.ursell).abs(),
            },
            z_cluster: Estimate {
                value: fine.boltz,
                error: (fine.boltz - coarse.boltz).abs(),
            },
        }
    };
    if let Some(tol) = settings.tolerance {
        for (what, e) in [("b_k", result.b), ("Z_k^cl", result.z_cluster)] {
            if e.error > tol * e.value.abs() {
                return Err(Error::Numerical(format!(
                    "mesh too coarse for {what} at k = {k}, beta = {beta}: error bound {:.3e} above {:.1e} relative",
                    e.error, tol
                )));
            }
        }
    }
    Ok(result)
}

/// `b_k(beta)` by nested quadrature; see [`cluster_integrals_quadrature`].
pub fn b_k_quadrature(
    p: &PairPotential,
    k: usize,
    beta: f64,
    settings: &QuadratureSettings,
) -> Result<Estimate> {
    Ok(cluster_integrals_quadrature(p, k, beta, settings)?.b)
}

/// `Z_k^cl(beta)` by nested quadrature; see [`cluster_integrals_quadrature`].
pub fn z_cluster_quadrature(
    p: &PairPotential,
    k: usize,
    beta: f64,
    settings: &QuadratureSettings,
) -> Result<Estimate> {
    Ok(cluster_integrals_quadrature(p, k, beta, settings)?.z_cluster)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{two_well, Piece};

    fn square_well() -> PairPotential {
        PairPotential::square_well(1.0, 1.5, 1.0, 1).unwrap()
    }

    fn closed_b2(beta: f64) -> f64 {
        -1.0 + 0.5 * beta.exp_m1()
    }

    #[test]
    fn b2_matches_closed_form() {
        let s = QuadratureSettings::default();
        for beta in [1.0, 2.0, 4.0, 8.0] {
            let e = b_k_quadrature(&square_well(), 2, beta, &s).unwrap();
            assert!(
                (e.value - closed_b2(beta)).abs() <= 1e-12 * closed_b2(beta).abs(),
                "{beta}"
            );
        }
        let e = b_k_quadrature(&square_well(), 2, 1.0, &s).unwrap();
        assert!((e.value + 0.140_859_1).abs() < 1e-7);
    }

    #[test]
    fn hard_rods() {
        let s = QuadratureSettings::default();
        let p = PairPotential::hard_core(1.0, 1).unwrap();
        assert!((b_k_quadrature(&p, 2, 3.0, &s).unwrap().value + 1.0).abs() < 1e-14);
        // Tonks gas: b_3 = 3/2, b_4 = -8/3 for unit rods
        assert!((b_k_quadrature(&p, 3, 1.0, &s).unwrap().value - 1.5).abs() < 1e-12);
        assert!((b_k_quadrature(&p, 4, 1.0, &s).unwrap().value + 8.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn z2_closed_form() {
        let s = QuadratureSettings::default();
        let z = z_cluster_quadrature(&square_well(), 2, 1.0, &s).unwrap();
        assert!((z.value - 0.5 * 1f64.exp()).abs() < 1e-13);
        let z = z_cluster_quadrature(&square_well(), 1, 1.0, &s).unwrap();
        assert_eq!(z.value, 1.0);
    }

    #[test]
    fn ramp_b2_closed_form() {
        // v(r) = -depth (b - r)/(b - r_hc) on [r_hc, b)
        let p = PairPotential::ramp_well(1.0, 1.5, 1.0, 1.0, 1).unwrap();
        let beta = 2.0_f64;
        let exact = -1.0 + (beta.exp() - 1.0) / (beta / 0.5) - 0.5;
        let e = b_k_quadrature(&p, 2, beta, &QuadratureSettings::default()).unwrap();
        assert!(
            (e.value - exact).abs() < 1e-10 * exact.abs(),
            "{} vs {}",
            e.value,
            exact
        );
        assert!(e.error < 1e-10);
    }

    #[test]
    fn guards() {
        let s = QuadratureSettings::default();
        assert!(b_k_quadrature(&square_well(), 6, 1.0, &s).is_err());
        assert!(b_k_quadrature(&square_well().with_dimension(2).unwrap(), 2, 1.0, &s).is_err());
        assert!(b_k_quadrature(&square_well(), 2, 0.0, &s).is_err());
        let p = PairPotential::new(1.0, vec![Piece::linear(1.0, 2.0, -3.0, 0.0)], 1).unwrap();
        let strict = QuadratureSettings {
            nodes: 1,
            tolerance: Some(1e-14),
            ..s
        };
        assert!(b_k_quadrature(&p, 3, 4.0, &strict).is_err());
    }

    #[test]
    fn two_well_b3_is_finite() {
        let e = b_k_quadrature(&two_well(), 3, 2.0, &QuadratureSettings::default()).unwrap();
        assert!(e.value.is_finite());
    }
}
