//! Plain Monte Carlo estimates of the rooted cluster integrals.
//!
//! Points `x_2..x_k` are drawn uniformly from the ball of radius `(k-1) b`,
//! which contains every connected configuration rooted at the origin. Samples
//! are split into fixed-size chunks; chunk `i` draws from ChaCha stream `i`
//! of the seed, and chunk statistics are merged in chunk order, so results
//! are identical for any number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernel::{boltzmann, UrsellKernel};
use super::Estimate;
use crate::configuration::Configuration;
use crate::error::{precondition, Error, Result};
use crate::graphs::DEFAULT_K_MAX;
use crate::potential::{ball_volume, PairPotential};

pub const MIN_SAMPLES: u64 = 10_000;
/// Samples per chunk (one RNG stream each).
pub const CHUNK_SIZE: u64 = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloSettings {
    pub samples: u64,
    pub seed: u64,
    pub max_k: usize,
}

impl Default for MonteCarloSettings {
    fn default() -> Self {
        Self {
            samples: 1_000_000,
            seed: 1,
            max_k: DEFAULT_K_MAX,
        }
    }
}

/// Which cluster integrand to average.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrand {
    /// Ursell weight, giving `b_k`.
    Ursell,
    /// Connected Boltzmann factor, giving `Z_k^cl`.
    ConnectedBoltzmann,
}

/// Running mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, o: Moments) -> Moments {
        if o.n == 0 {
            return self;
        }
        if self.n == 0 {
            return o;
        }
        let n = self.n + o.n;
        let delta = o.mean - self.mean;
        Moments {
            n,
            mean: self.mean + delta * o.n as f64 / n as f64,
            m2: self.m2 + o.m2 + delta * delta * self.n as f64 * o.n as f64 / n as f64,
        }
    }
}

fn sample_ball(rng: &mut ChaCha8Rng, d: usize, radius: f64, out: &mut [f64]) {
    loop {
        let mut r2 = 0.0;
        for c in out.iter_mut() {
            *c = rng.random_range(-1.0..1.0);
            r2 += *c * *c;
        }
        if r2 <= 1.0 || d == 1 {
            break;
        }
    }
    out.iter_mut().for_each(|c| *c *= radius);
}

fn run_chunk(
    p: &PairPotential,
    k: usize,
    beta: f64,
    integrand: Integrand,
    seed: u64,
    chunk: u64,
    count: u64,
) -> Moments {
    let d = p.dimension();
    let radius = (k - 1) as f64 * p.range();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    let mut x = Configuration::new(d, vec![0.0; k * d]);
    let mut kernel = UrsellKernel::new(k);
    let mut m = Moments::default();
    for _ in 0..count {
        for i in 1..k {
            sample_ball(&mut rng, d, radius, x.point_mut(i));
        }
        let w = if x.is_range_connected(p.range()) {
            let boltz = kernel.boltz_mut();
            for j in 1..k {
                for i in 0..j {
                    boltz[i * k + j] = boltzmann(p, x.distance(i, j), beta);
                }
            }
            match integrand {
                Integrand::Ursell => kernel.connected_sum(),
                Integrand::ConnectedBoltzmann => kernel.full_product(),
            }
        } else {
            0.0
        };
        m.push(w);
    }
    m
}

/// `(1/k!) int w(0, x_2, .., x_k) dx` for the chosen integrand.
pub fn cluster_integral_monte_carlo(
    p: &PairPotential,
    k: usize,
    beta: f64,
    integrand: Integrand,
    settings: &MonteCarloSettings,
) -> Result<Estimate> {
    if !(2..=settings.max_k).contains(&k) {
        return Err(Error::OutOfRange {
            what: "k",
            value: k,
            min: 2,
            max: settings.max_k,
        });
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(precondition(format!("beta must be positive, got {beta}")));
    }
    if settings.samples < MIN_SAMPLES {
        return Err(precondition(format!(
            "Monte Carlo needs at least {MIN_SAMPLES} samples, got {}",
            settings.samples
        )));
    }
    let chunks = settings.samples.div_ceil(CHUNK_SIZE);
    let parts: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let count = CHUNK_SIZE.min(settings.samples - c * CHUNK_SIZE);
            run_chunk(p, k, beta, integrand, settings.seed, c, count)
        })
        .collect();
    let m = parts.into_iter().fold(Moments::default(), Moments::merge);
    if m.mean == 0.0 && m.m2 == 0.0 {
        return Err(Error::Numerical(format!(
            "degenerate sampling: no sample of {} hit the support of the integrand",
            m.n
        )));
    }
    let volume = ball_volume(p.dimension(), (k - 1) as f64 * p.range());
    let factorial: f64 = (1..=k).map(|i| i as f64).product();
    let scale = volume.powi(k as i32 - 1) / factorial;
    let variance = m.m2 / (m.n - 1) as f64;
    Ok(Estimate {
        value: scale * m.mean,
        error: scale * (variance / m.n as f64).sqrt(),
    })
}

/// `b_k(beta)` by Monte Carlo; the error is one standard error.
pub fn b_k_monte_carlo(
    p: &PairPotential,
    k: usize,
    beta: f64,
    settings: &MonteCarloSettings,
) -> Result<Estimate> {
    cluster_integral_monte_carlo(p, k, beta, Integrand::Ursell, settings)
}

/// `Z_k^cl(beta)` by Monte Carlo; the error is one standard error.
pub fn z_cluster_monte_carlo(
    p: &PairPotential,
    k: usize,
    beta: f64,
    settings: &MonteCarloSettings,
) -> Result<Estimate> {
    cluster_integral_monte_carlo(p, k, beta, Integrand::ConnectedBoltzmann, settings)
}
