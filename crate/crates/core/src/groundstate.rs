//! Ground-state energies `E_k`, the thresholds derived from them and the
//! structural inequalities they satisfy.
//!
//! Energies from [`find_ground_state`] are best-found values, not certified
//! minima. In one dimension [`oracle_ground_state_1d`] provides an
//! independent exhaustive search over gap sequences on a grid.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::configuration::Configuration;
use crate::error::{precondition, Error, Result};
use crate::potential::{PairPotential, Shape};

/// Default tolerance for identities that hold exactly on a table.
pub const EXACT_TOL: f64 = 1e-9;
/// Default tolerance for comparisons against optimizer output.
pub const OPTIMIZER_TOL: f64 = 1e-6;
/// Largest `k` accepted by the one-dimensional oracle.
pub const ORACLE_K_MAX: usize = 8;

/// Offset of the oracle grid inside each cell, kept away from rational
/// fractions so sums of grid gaps avoid piece boundaries.
const GRID_PHASE: f64 = 0.381_966_011_250_105;

/// `U(x) = sum_{i<j} v(|x_i - x_j|)`, `+inf` on any hard-core overlap.
pub fn total_energy(p: &PairPotential, x: &Configuration) -> f64 {
    let k = x.len();
    let mut u = 0.0;
    for j in 1..k {
        for i in 0..j {
            u += p.value(x.distance(i, j));
            if u == f64::INFINITY {
                return u;
            }
        }
    }
    u
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroundStateMethod {
    Oracle1d,
    Optimizer,
}

/// Best configuration found for `k` particles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundState {
    pub k: usize,
    pub energy: f64,
    pub config: Configuration,
    pub method: GroundStateMethod,
    /// Range graph of `config` is connected.
    pub connected: bool,
}

/// Budget for the multistart optimizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerSettings {
    /// Random restarts in addition to the deterministic seeds.
    pub starts: usize,
    /// Basin-hopping moves per restart.
    pub hops: usize,
    pub seed: u64,
    pub min_step: f64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            starts: 32,
            hops: 40,
            seed: 0x5eed,
            min_step: 1e-9,
        }
    }
}

/// Distances worth seeding with: the inner edge and middle of every attractive piece.
fn attractive_distances(p: &PairPotential) -> Vec<f64> {
    let mut out = Vec::new();
    for piece in p.pieces() {
        let width = piece.r_hi - piece.r_lo;
        match piece.shape {
            Shape::Constant { value } if value < 0.0 => {
                out.push(piece.r_lo + 1e-3 * width);
                out.push(piece.r_lo + 0.5 * width);
            }
            Shape::Linear { start, end } if start.min(end) < 0.0 => {
                out.push(if start <= end {
                    piece.r_lo
                } else {
                    piece.r_hi - 1e-6 * width
                });
                out.push(piece.r_lo + 0.5 * width);
            }
            _ => {}
        }
    }
    out
}

fn seed_configurations(p: &PairPotential, k: usize) -> Vec<Configuration> {
    let d = p.dimension();
    let dists = attractive_distances(p);
    let mut seeds = Vec::new();
    let chain = |gaps: &[f64]| -> Vec<f64> {
        let mut x = vec![0.0];
        for i in 1..k {
            x.push(x[i - 1] + gaps[(i - 1) % gaps.len()]);
        }
        x
    };
    let embed = |xs: Vec<f64>| -> Configuration {
        let mut coords = vec![0.0; k * d];
        for (i, x) in xs.into_iter().enumerate() {
            coords[i * d] = x;
        }
        Configuration::new(d, coords)
    };
    for &s in &dists {
        seeds.push(embed(chain(&[s])));
        // dimer packings: alternate two bond lengths
        for &t in &dists {
            if t != s {
                seeds.push(embed(chain(&[s, t])));
            }
        }
        if d >= 2 {
            seeds.push(lattice_patch(k, d, s, true));
            seeds.push(lattice_patch(k, d, s, false));
        }
    }
    if seeds.is_empty() {
        let s = p.range().max(p.hard_core_radius() * 1.01);
        seeds.push(embed(chain(&[s])));
    }
    seeds
}

/// `k` sites of a triangular (or square) lattice closest to the origin, lying in the xy-plane.
fn lattice_patch(k: usize, d: usize, spacing: f64, triangular: bool) -> Configuration {
    let n = (k as f64).sqrt().ceil() as i64 + 2;
    let mut sites = Vec::new();
    for a in -n..=n {
        for c in -n..=n {
            let (x, y) = if triangular {
                (a as f64 + 0.5 * c as f64, c as f64 * 3f64.sqrt() / 2.0)
            } else {
                (a as f64, c as f64)
            };
            sites.push((x * spacing, y * spacing));
        }
    }
    sites.sort_by(|u, v| {
        let ru = u.0 * u.0 + u.1 * u.1;
        let rv = v.0 * v.0 + v.1 * v.1;
        ru.partial_cmp(&rv)
            .unwrap()
            .then(u.1.atan2(u.0).partial_cmp(&v.1.atan2(v.0)).unwrap())
    });
    let mut coords = vec![0.0; k * d];
    for (i, (x, y)) in sites.into_iter().take(k).enumerate() {
        coords[i * d] = x;
        coords[i * d + 1] = y;
    }
    Configuration::new(d, coords)
}

fn particle_energy(p: &PairPotential, x: &Configuration, i: usize, pos: &[f64]) -> f64 {
    let mut u = 0.0;
    for j in 0..x.len() {
        if j != i {
            u += p.value(crate::configuration::distance(pos, x.point(j)));
        }
    }
    u
}

/// Compass search: try `±step` along every axis of every particle, halve the
/// step when a full sweep brings no improvement.
fn polish(
    p: &PairPotential,
    x: &mut Configuration,
    energy: &mut f64,
    initial_step: f64,
    min_step: f64,
) {
    let d = x.dimension();
    let mut step = initial_step;
    let mut trial = vec![0.0; d];
    while step >= min_step {
        let mut improved = false;
        for i in 0..x.len() {
            let old = particle_energy(p, x, i, x.point(i));
            for axis in 0..d {
                for sign in [1.0, -1.0] {
                    trial.copy_from_slice(x.point(i));
                    trial[axis] += sign * step;
                    let new = particle_energy(p, x, i, &trial);
                    if new < old - 1e-14 {
                        x.point_mut(i).copy_from_slice(&trial);
                        *energy += new - old;
                        improved = true;
                        break;
                    }
                }
                if improved {
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    // re-sum to drop accumulated rounding
    *energy = total_energy(p, x);
}

fn random_hop(
    p: &PairPotential,
    x: &Configuration,
    rng: &mut ChaCha8Rng,
    dists: &[f64],
) -> Configuration {
    let d = x.dimension();
    let k = x.len();
    let mut y = x.clone();
    let i = rng.random_range(0..k);
    let mut j = rng.random_range(0..k);
    if j == i {
        j = (j + 1) % k;
    }
    let r = if dists.is_empty() {
        p.range()
    } else {
        dists[rng.random_range(0..dists.len())]
    };
    // place particle i at distance r from particle j in a random direction
    let mut dir: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
    let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
    dir.iter_mut().for_each(|v| *v /= norm);
    let anchor = x.point(j).to_vec();
    for (a, (t, u)) in y.point_mut(i).iter_mut().zip(anchor.iter().zip(&dir)) {
        *a = t + r * u;
    }
    y
}

/// Multistart search for the `k`-particle ground state.
///
/// Deterministic seeds (chains, alternating dimer chains, lattice patches)
/// are polished first; random restarts then basin-hop from the best seeds.
/// Every task draws from its own ChaCha stream and the results are reduced
/// by (energy, task index), so the output does not depend on thread count.
pub fn find_ground_state(
    p: &PairPotential,
    k: usize,
    settings: &OptimizerSettings,
) -> Result<GroundState> {
    if k == 0 {
        return Err(precondition("k must be at least 1"));
    }
    if !p.has_attractive_tail() {
        return Err(Error::NoAttractiveTail);
    }
    if p.dimension() > 2 {
        return Err(Error::UnsupportedDimension(p.dimension()));
    }
    let d = p.dimension();
    if k == 1 {
        return Ok(GroundState {
            k,
            energy: 0.0,
            config: Configuration::new(d, vec![0.0; d]),
            method: GroundStateMethod::Optimizer,
            connected: true,
        });
    }
    let step0 = 0.05 * (p.range() - p.hard_core_radius()).max(1e-3);
    let mut polished: Vec<(f64, Configuration)> = seed_configurations(p, k)
        .into_par_iter()
        .map(|mut x| {
            let mut e = total_energy(p, &x);
            if e.is_finite() {
                polish(p, &mut x, &mut e, step0, settings.min_step);
            }
            (e, x)
        })
        .collect();
    polished.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n_seeds = polished.len();
    let dists = attractive_distances(p);

    let hopped: Vec<(f64, Configuration)> = (0..settings.starts)
        .into_par_iter()
        .map(|task| {
            let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
            rng.set_stream(task as u64);
            let (mut best_e, mut best) = polished[task % n_seeds.min(4)].clone();
            let (mut cur_e, mut cur) = (best_e, best.clone());
            for _ in 0..settings.hops {
                let mut y = random_hop(p, &cur, &mut rng, &dists);
                let mut e = total_energy(p, &y);
                if !e.is_finite() {
                    continue;
                }
                polish(p, &mut y, &mut e, step0, settings.min_step.max(1e-7));
                if e <= cur_e || rng.random::<f64>() < 0.1 {
                    cur_e = e;
                    cur = y;
                }
                if cur_e < best_e {
                    best_e = cur_e;
                    best = cur.clone();
                }
            }
            (best_e, best)
        })
        .collect();

    let (energy, config) = polished
        .into_iter()
        .chain(hopped)
        .enumerate()
        .min_by(|(i, a), (j, b)| a.0.total_cmp(&b.0).then(i.cmp(j)))
        .map(|(_, r)| r)
        .expect("at least one seed");
    if !energy.is_finite() {
        return Err(Error::Numerical(format!(
            "no finite-energy configuration found for k = {k}"
        )));
    }
    let config = config.rooted();
    let connected = config.is_range_connected(p.range());
    Ok(GroundState {
        k,
        energy,
        config,
        method: GroundStateMethod::Optimizer,
        connected,
    })
}

/// Exhaustive one-dimensional ground-state search.
///
/// Configurations are ordered point sets described by their consecutive
/// gaps. Gaps range over a grid in `[r_hc, b)` plus the separator gap `b`,
/// and a dynamic program over the last `m` gaps (pairs further apart than `m`
/// gaps are beyond the range) finds the exact grid minimum. The best grid
/// configuration is then refined by a continuous coordinate search on the gaps.
pub fn oracle_ground_state_1d(p: &PairPotential, k: usize, grid_step: f64) -> Result<GroundState> {
    if p.dimension() != 1 {
        return Err(Error::UnsupportedDimension(p.dimension()));
    }
    if k == 0 || k > ORACLE_K_MAX {
        return Err(Error::OutOfRange {
            what: "k",
            value: k,
            min: 1,
            max: ORACLE_K_MAX,
        });
    }
    let r_hc = p.hard_core_radius();
    if r_hc <= 0.0 {
        return Err(precondition("the 1-D oracle needs a hard core"));
    }
    if !(grid_step > 0.0) {
        return Err(precondition("grid step must be positive"));
    }
    if k == 1 {
        return Ok(GroundState {
            k,
            energy: 0.0,
            config: Configuration::from_1d(&[0.0]),
            method: GroundStateMethod::Oracle1d,
            connected: true,
        });
    }
    let b = p.range();
    let mut gaps: Vec<f64> = (0..)
        .map(|i| r_hc + (i as f64 + GRID_PHASE) * grid_step)
        .take_while(|&g| g < b)
        .collect();
    if gaps.is_empty() {
        return Err(Error::Numerical(format!(
            "grid step {grid_step} too coarse: no gap inside [{r_hc}, {b})"
        )));
    }
    gaps.push(b);
    let g_count = gaps.len();
    let window = ((b / r_hc).ceil() as usize)
        .saturating_sub(1)
        .max(1)
        .min(k - 1);
    let states = g_count
        .checked_pow(window as u32)
        .filter(|s| s.saturating_mul(g_count) <= 200_000_000)
        .ok_or_else(|| {
            Error::Numerical(format!(
                "oracle grid too large: {g_count} gaps with a window of {window}"
            ))
        })?;

    // pair energy of every gap sum that can occur inside the window
    let gap_energy: Vec<f64> = gaps.iter().map(|&g| p.value(g)).collect();

    // layer t holds the best energy of t+2 particles ending in each state
    let mut layers: Vec<Vec<u32>> = Vec::with_capacity(k - 1);
    let mut best: Vec<f64> = vec![f64::INFINITY; states];
    for (g, &e) in gap_energy.iter().enumerate() {
        best[g] = e;
    }
    layers.push(Vec::new());
    for placed in 2..k {
        let len_old = (placed - 1).min(window);
        let mut next = vec![f64::INFINITY; states];
        let mut back = vec![u32::MAX; states];
        let modulus = g_count.pow(window as u32);
        let old_states = g_count.pow(len_old as u32);
        for s in 0..old_states {
            let base = best[s];
            if !base.is_finite() {
                continue;
            }
            for g in 0..g_count {
                let mut e = base + gap_energy[g];
                let mut dist = gaps[g];
                let mut rest = s;
                for _ in 0..len_old {
                    dist += gaps[rest % g_count];
                    rest /= g_count;
                    if dist >= b {
                        break;
                    }
                    e += p.value(dist);
                }
                let t = (s * g_count + g) % modulus;
                if e < next[t] {
                    next[t] = e;
                    back[t] = s as u32;
                }
            }
        }
        best = next;
        layers.push(back);
    }
    let (mut state, grid_energy) = best
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
        .map(|(s, &e)| (s, e))
        .expect("non-empty state space");
    if !grid_energy.is_finite() {
        return Err(Error::Numerical(
            "no finite-energy grid configuration".into(),
        ));
    }
    let mut seq = vec![0usize; k - 1];
    for t in (0..k - 1).rev() {
        seq[t] = state % g_count;
        if t > 0 {
            state = layers[t][state] as usize;
        }
    }
    let mut gap_values: Vec<f64> = seq.iter().map(|&g| gaps[g]).collect();
    let energy = refine_gaps(p, &mut gap_values, grid_energy, grid_step);
    let config = Configuration::from_1d(&positions_from_gaps(&gap_values));
    let connected = config.is_range_connected(b);
    Ok(GroundState {
        k,
        energy,
        config,
        method: GroundStateMethod::Oracle1d,
        connected,
    })
}

fn positions_from_gaps(gaps: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0];
    for g in gaps {
        x.push(x.last().unwrap() + g);
    }
    x
}

fn refine_gaps(p: &PairPotential, gaps: &mut [f64], start: f64, initial: f64) -> f64 {
    let r_hc = p.hard_core_radius();
    let energy_of = |g: &[f64]| total_energy(p, &Configuration::from_1d(&positions_from_gaps(g)));
    let mut energy = energy_of(gaps).min(start);
    let mut step = initial;
    while step > 1e-11 {
        let mut improved = false;
        for i in 0..gaps.len() {
            for sign in [-1.0, 1.0] {
                let old = gaps[i];
                gaps[i] = (old + sign * step).max(r_hc);
                let e = energy_of(gaps);
                if e < energy - 1e-14 {
                    energy = e;
                    improved = true;
                } else {
                    gaps[i] = old;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    energy_of(gaps)
}

/// Quantities derived from a finite table `E_1..E_K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub k_max: usize,
    /// Estimate used downstream: `min(e_inf_fit, e_inf_raw)`.
    pub e_inf: f64,
    /// Slope of a fit `E_k = e k + c k^((d-1)/d)` over the upper half of the table.
    pub e_inf_fit: f64,
    /// `min_k E_k / k` over the table.
    pub e_inf_raw: f64,
    /// `min_k (E_k - k e_inf)`.
    pub nu_star: f64,
    /// `min_{k >= 2} E_k / (k - 1)`.
    pub mu_one: f64,
    pub nu_one: f64,
    /// Every `k` attaining `mu_one` within `tol`, smallest first.
    pub mu_one_minimizers: Vec<usize>,
    /// Gap between the best and second-best `E_k / (k - 1)`.
    pub mu_one_gap: f64,
    /// `mu_one < e_inf - tol`: a monatomic-polyatomic cross-over exists.
    pub polyatomic: bool,
    /// `nu_star > tol`; false flags a table with no attractive-tail behaviour.
    pub attractive_behavior: bool,
    pub tol: f64,
}

impl Thresholds {
    /// The minimizer of `E_k / (k - 1)` if it is unique (gap above `tol`).
    pub fn unique_mu_one_minimizer(&self) -> Option<usize> {
        (self.mu_one_minimizers.len() == 1 && self.mu_one_gap > self.tol)
            .then(|| self.mu_one_minimizers[0])
    }

    /// Either `mu_1 = e_inf` and `nu* = -e_inf = nu_1`, or `mu_1 < e_inf` and
    /// `nu* < -e_inf < nu_1`.
    pub fn trichotomy_holds(&self) -> bool {
        let tol = self.tol;
        let equal = (self.mu_one - self.e_inf).abs() <= tol
            && (self.nu_star + self.e_inf).abs() <= tol
            && (self.nu_one + self.e_inf).abs() <= tol;
        let strict = self.mu_one < self.e_inf - tol
            && self.nu_star < -self.e_inf - tol
            && -self.e_inf < self.nu_one - tol;
        equal || strict
    }
}

/// Lower convex hull of `(k, E_k)`, keeping collinear points.
fn lower_hull(energies: &[f64]) -> Vec<usize> {
    let mut hull: Vec<usize> = Vec::new();
    for k in 0..energies.len() {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            let cross = (b - a) as f64 * (energies[k] - energies[a])
                - (k - a) as f64 * (energies[b] - energies[a]);
            // remove b only if it lies strictly above segment a-k
            if cross < -1e-12 * (1.0 + energies[k].abs()) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(k);
    }
    hull
}

/// Computes `e_inf`, `nu*`, `mu_1`, `nu_1` from `E_1..E_K` (`energies[0] = E_1`).
///
/// In one dimension the straight-line fit uses only lower-convex-hull points
/// of the upper half of the table, which removes the parity oscillation of
/// molecular ground states. The estimate is capped by `min_k E_k / k`, which
/// is an upper bound for `inf_N E_N / N`.
pub fn derive_thresholds(energies: &[f64], dimension: usize, tol: f64) -> Result<Thresholds> {
    let k_max = energies.len();
    if k_max < 4 {
        return Err(precondition(format!(
            "threshold derivation needs K >= 4, got {k_max}"
        )));
    }
    if energies.iter().any(|e| !e.is_finite()) {
        return Err(precondition("energy table has non-finite entries"));
    }
    let e_inf_raw = energies
        .iter()
        .enumerate()
        .map(|(i, e)| e / (i + 1) as f64)
        .fold(f64::INFINITY, f64::min);

    let lower_half = k_max.div_ceil(2).max(2);
    let candidates: Vec<usize> = if dimension == 1 {
        lower_hull(energies)
            .into_iter()
            .filter(|&i| i + 1 >= lower_half)
            .collect()
    } else {
        (lower_half - 1..k_max).collect()
    };
    let candidates = if candidates.len() >= 2 {
        candidates
    } else {
        vec![k_max - 2, k_max - 1]
    };
    let e_inf_fit = fit_bulk_energy(energies, &candidates, dimension)?;
    let e_inf = e_inf_fit.min(e_inf_raw);

    let nu_star = energies
        .iter()
        .enumerate()
        .map(|(i, e)| e - (i + 1) as f64 * e_inf)
        .fold(f64::INFINITY, f64::min);
    let ratios: Vec<(usize, f64)> = (2..=k_max)
        .map(|k| (k, energies[k - 1] / (k - 1) as f64))
        .collect();
    let mu_one = ratios.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let mu_one_minimizers: Vec<usize> = ratios
        .iter()
        .filter(|r| r.1 <= mu_one + tol)
        .map(|r| r.0)
        .collect();
    let mu_one_gap = ratios
        .iter()
        .filter(|r| r.0 != mu_one_minimizers[0])
        .map(|r| r.1 - mu_one)
        .fold(f64::INFINITY, f64::min);
    Ok(Thresholds {
        k_max,
        e_inf,
        e_inf_fit,
        e_inf_raw,
        nu_star,
        mu_one,
        nu_one: -mu_one,
        mu_one_minimizers,
        mu_one_gap,
        polyatomic: mu_one < e_inf - tol,
        attractive_behavior: nu_star > tol,
        tol,
    })
}

fn fit_bulk_energy(energies: &[f64], idx: &[usize], dimension: usize) -> Result<f64> {
    let surface = |k: f64| {
        if dimension == 1 {
            1.0
        } else {
            k.powf((dimension as f64 - 1.0) / dimension as f64)
        }
    };
    // normal equations for E = e k + c s(k)
    let (mut skk, mut sks, mut sss, mut ske, mut sse) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &i in idx {
        let k = (i + 1) as f64;
        let s = surface(k);
        let e = energies[i];
        skk += k * k;
        sks += k * s;
        sss += s * s;
        ske += k * e;
        sse += s * e;
    }
    let det = skk * sss - sks * sks;
    if det.abs() <= 1e-12 * skk * sss {
        return Err(Error::Numerical("degenerate bulk-energy fit".into()));
    }
    Ok((ske * sss - sse * sks) / det)
}

/// One tested instance of `E_{m+n+1} <= E_{m+1} + E_{n+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GluingWitness {
    pub m: usize,
    pub n: usize,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GluingReport {
    pub holds: bool,
    /// Every tested inequality is strict by more than `tol`.
    pub strict: bool,
    pub tested: usize,
    pub violations: Vec<GluingWitness>,
    /// Tested instance with the smallest slack `rhs - lhs`.
    pub tightest: Option<GluingWitness>,
}

/// Tests the gluing inequality for all `m, n >= 1` with `m + n + 1 <= K`.
pub fn gluing_check(energies: &[f64], tol: f64) -> GluingReport {
    let k_max = energies.len();
    let e = |k: usize| energies[k - 1];
    let mut report = GluingReport {
        holds: true,
        strict: true,
        tested: 0,
        violations: Vec::new(),
        tightest: None,
    };
    for m in 1..k_max {
        for n in m..k_max {
            if m + n + 1 > k_max {
                break;
            }
            let w = GluingWitness {
                m,
                n,
                lhs: e(m + n + 1),
                rhs: e(m + 1) + e(n + 1),
            };
            report.tested += 1;
            if w.lhs > w.rhs + tol {
                report.holds = false;
                report.violations.push(w);
            }
            if w.lhs >= w.rhs - tol {
                report.strict = false;
            }
            if report
                .tightest
                .is_none_or(|t| w.rhs - w.lhs < t.rhs - t.lhs)
            {
                report.tightest = Some(w);
            }
        }
    }
    report
}

/// Pairs `(m, n)` with `E_{m+n} > E_m + E_n + tol`.
pub fn subadditivity_violations(energies: &[f64], tol: f64) -> Vec<(usize, usize)> {
    let k_max = energies.len();
    let mut out = Vec::new();
    for m in 1..k_max {
        for n in m..=k_max - m {
            if energies[m + n - 1] > energies[m - 1] + energies[n - 1] + tol {
                out.push((m, n));
            }
        }
    }
    out
}

/// One row of a ground-state table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundStateEntry {
    pub k: usize,
    pub energy: f64,
    pub method: GroundStateMethod,
    pub connected: bool,
    pub coords: Vec<f64>,
}

/// `E_1..E_K` with minimizing configurations and derived thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundStateTable {
    pub dimension: usize,
    pub entries: Vec<GroundStateEntry>,
    pub thresholds: Option<Thresholds>,
}

impl GroundStateTable {
    fn from_states(dimension: usize, states: Vec<GroundState>, tol: f64) -> Result<Self> {
        let entries: Vec<GroundStateEntry> = states
            .into_iter()
            .map(|s| GroundStateEntry {
                k: s.k,
                energy: s.energy,
                method: s.method,
                connected: s.connected,
                coords: s.config.coords().to_vec(),
            })
            .collect();
        let mut table = Self {
            dimension,
            entries,
            thresholds: None,
        };
        if table.entries.len() >= 4 {
            table.thresholds = Some(derive_thresholds(&table.energies(), dimension, tol)?);
        }
        Ok(table)
    }

    /// Table of `E_1..E_K` from the one-dimensional oracle.
    pub fn oracle_1d(p: &PairPotential, k_max: usize, grid_step: f64) -> Result<Self> {
        let states = (1..=k_max)
            .into_par_iter()
            .map(|k| oracle_ground_state_1d(p, k, grid_step))
            .collect::<Result<Vec<_>>>()?;
        Self::from_states(1, states, EXACT_TOL)
    }

    /// Table of `E_1..E_K` from the multistart optimizer.
    pub fn optimized(
        p: &PairPotential,
        k_max: usize,
        settings: &OptimizerSettings,
    ) -> Result<Self> {
        let states = (1..=k_max)
            .map(|k| find_ground_state(p, k, settings))
            .collect::<Result<Vec<_>>>()?;
        Self::from_states(p.dimension(), states, OPTIMIZER_TOL)
    }

    /// Table from bare energies (no configurations), e.g. for closed-form fixtures.
    pub fn from_energies(dimension: usize, energies: &[f64], tol: f64) -> Result<Self> {
        let entries = energies
            .iter()
            .enumerate()
            .map(|(i, &energy)| GroundStateEntry {
                k: i + 1,
                energy,
                method: GroundStateMethod::Oracle1d,
                connected: true,
                coords: Vec::new(),
            })
            .collect();
        let mut table = Self {
            dimension,
            entries,
            thresholds: None,
        };
        if energies.len() >= 4 {
            table.thresholds = Some(derive_thresholds(energies, dimension, tol)?);
        }
        Ok(table)
    }

    pub fn energies(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.energy).collect()
    }

    pub fn k_max(&self) -> usize {
        self.entries.len()
    }

    /// Thresholds, or an error for tables shorter than four entries.
    pub fn require_thresholds(&self) -> Result<&Thresholds> {
        self.thresholds
            .as_ref()
            .ok_or_else(|| precondition("ground-state table has no thresholds (K < 4)"))
    }

    pub fn write_json(&self, path: &std::path::Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(std::io::BufWriter::new(file), self)?;
        Ok(())
    }

    pub fn read_json(path: &std::path::Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Ok(serde_json::from_reader(std::io::BufReader::new(file))?)
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
    fn total_energy_examples() {
        let p = square_well();
        assert_eq!(total_energy(&p, &Configuration::from_1d(&[0.0, 1.2])), -1.0);
        assert_eq!(
            total_energy(&p, &Configuration::from_1d(&[0.0, 0.5])),
            f64::INFINITY
        );
        assert_eq!(
            total_energy(&p, &Configuration::from_1d(&[0.0, 1.2, 2.4])),
            -2.0
        );
    }

    #[test]
    fn oracle_square_well() {
        let p = square_well();
        for k in 1..=8 {
            let gs = oracle_ground_state_1d(&p, k, 0.02).unwrap();
            assert_eq!(gs.energy, -((k - 1) as f64), "k={k}");
            assert!(gs.connected);
        }
    }

    #[test]
    fn oracle_two_well() {
        let p = two_well();
        let e: Vec<f64> = (1..=5)
            .map(|k| oracle_ground_state_1d(&p, k, 0.02).unwrap().energy)
            .collect();
        assert_eq!(e, vec![0.0, -4.0, -6.0, -8.25, -10.25]);
    }

    #[test]
    fn oracle_refines_ramp_minimum() {
        // minimum of the ramp is at the hard core; the grid misses it, refinement finds it
        let p = PairPotential::ramp_well(1.0, 1.5, 1.0, 1.0, 1).unwrap();
        let gs = oracle_ground_state_1d(&p, 3, 0.05).unwrap();
        assert!((gs.energy + 2.0).abs() < 1e-9, "{}", gs.energy);
    }

    #[test]
    fn oracle_errors() {
        let p = square_well();
        assert!(oracle_ground_state_1d(&p, 9, 0.02).is_err());
        assert!(oracle_ground_state_1d(&p, 3, 2.0).is_err());
        assert!(oracle_ground_state_1d(&p.with_dimension(2).unwrap(), 3, 0.02).is_err());
    }

    #[test]
    fn optimizer_examples() {
        let settings = OptimizerSettings::default();
        let gs = find_ground_state(&square_well(), 3, &settings).unwrap();
        assert!((gs.energy + 2.0).abs() < 1e-12);
        assert!(gs.connected);
        assert_eq!(
            find_ground_state(&square_well(), 1, &settings)
                .unwrap()
                .energy,
            0.0
        );
        let gs = find_ground_state(&two_well(), 2, &settings).unwrap();
        assert_eq!(gs.energy, -4.0);
        let hard = PairPotential::hard_core(1.0, 1).unwrap();
        assert!(matches!(
            find_ground_state(&hard, 3, &settings),
            Err(Error::NoAttractiveTail)
        ));
    }

    #[test]
    fn optimizer_matches_oracle_in_one_dimension() {
        let settings = OptimizerSettings::default();
        for p in [square_well(), two_well()] {
            for k in 2..=6 {
                let opt = find_ground_state(&p, k, &settings).unwrap();
                let oracle = oracle_ground_state_1d(&p, k, 0.02).unwrap();
                assert!(
                    opt.energy <= oracle.energy + OPTIMIZER_TOL,
                    "k={k}: {} vs {}",
                    opt.energy,
                    oracle.energy
                );
            }
        }
    }

    #[test]
    fn optimizer_two_dimensional_square_well() {
        // hexagonal patch: 3 particles form a triangle with three bonds
        let p = PairPotential::square_well(1.0, 1.5, 1.0, 2).unwrap();
        let settings = OptimizerSettings::default();
        assert_eq!(find_ground_state(&p, 3, &settings).unwrap().energy, -3.0);
        // rhombus of four particles: five bonds at spacing ~1, and the long diagonal is sqrt(3) > 1.5
        let gs = find_ground_state(&p, 4, &settings).unwrap();
        assert!(gs.energy <= -5.0, "{}", gs.energy);
        assert!(gs.connected);
    }

    #[test]
    fn optimizer_is_deterministic() {
        let s = OptimizerSettings {
            starts: 8,
            hops: 10,
            ..Default::default()
        };
        let a = find_ground_state(&two_well(), 4, &s).unwrap();
        let b = find_ground_state(&two_well(), 4, &s).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn thresholds_square_well() {
        let e: Vec<f64> = (1..=8).map(|k| -((k - 1) as f64)).collect();
        let t = derive_thresholds(&e, 1, EXACT_TOL).unwrap();
        assert!((t.e_inf + 1.0).abs() < 1e-12);
        assert!((t.nu_star - 1.0).abs() < 1e-12);
        assert!((t.mu_one + 1.0).abs() < 1e-12);
        assert!((t.nu_one - 1.0).abs() < 1e-12);
        assert!(!t.polyatomic);
        assert!(t.trichotomy_holds());
        assert!((t.e_inf_raw + 7.0 / 8.0).abs() < 1e-12);
    }

    #[test]
    fn thresholds_two_well() {
        let e = [0.0, -4.0, -6.0, -8.25, -10.25, -12.5, -14.5, -16.75];
        let t = derive_thresholds(&e, 1, EXACT_TOL).unwrap();
        assert!((t.e_inf + 2.125).abs() < 1e-12);
        assert_eq!(t.mu_one, -4.0);
        assert_eq!(t.unique_mu_one_minimizer(), Some(2));
        assert!(t.polyatomic);
        assert!((t.nu_star - 0.25).abs() < 1e-12);
        assert!(t.trichotomy_holds());
    }

    #[test]
    fn thresholds_degenerate_table() {
        let t = derive_thresholds(&[0.0; 6], 1, EXACT_TOL).unwrap();
        assert_eq!(t.e_inf, 0.0);
        assert_eq!(t.nu_star, 0.0);
        assert!(!t.attractive_behavior);
        assert!(derive_thresholds(&[0.0, -1.0, -2.0], 1, EXACT_TOL).is_err());
    }

    #[test]
    fn thresholds_two_dimensional_fit() {
        // E_k = -3k + 2 sqrt(k) exactly: the surface fit recovers the bulk term
        let e: Vec<f64> = (1..=10)
            .map(|k| -3.0 * k as f64 + 2.0 * (k as f64).sqrt() - 2.0 + 3.0 * (k == 1) as i32 as f64)
            .collect();
        let e: Vec<f64> = e
            .iter()
            .enumerate()
            .map(|(i, &v)| if i == 0 { 0.0 } else { v + 2.0 })
            .collect();
        let t = derive_thresholds(&e, 2, EXACT_TOL).unwrap();
        assert!((t.e_inf_fit + 3.0).abs() < 1e-9, "{}", t.e_inf_fit);
    }

    #[test]
    fn gluing_examples() {
        let sq: Vec<f64> = (1..=6).map(|k| -((k - 1) as f64)).collect();
        let r = gluing_check(&sq, EXACT_TOL);
        assert!(r.holds && !r.strict);
        let tw = [0.0, -4.0, -6.0, -8.25, -10.25, -12.5, -14.5, -16.75];
        let r = gluing_check(&tw, EXACT_TOL);
        assert!(!r.holds);
        assert!(r.violations.iter().any(|w| w.m == 1 && w.n == 1));
        let r = gluing_check(&[0.0, -1.0], EXACT_TOL);
        assert!(r.holds && r.tested == 0);
    }

    #[test]
    fn oracle_tables_are_subadditive() {
        for p in [square_well(), two_well()] {
            let t = GroundStateTable::oracle_1d(&p, 8, 0.02).unwrap();
            assert!(subadditivity_violations(&t.energies(), EXACT_TOL).is_empty());
            assert_eq!(t.entries[0].energy, 0.0);
            // adding a particle gains at most the deepest pair energy
            let e = t.energies();
            for k in 1..e.len() {
                assert!(e[k] <= e[k - 1] + p.min_value().min(0.0) + EXACT_TOL || e[k] <= e[k - 1]);
            }
        }
    }

    #[test]
    fn table_json_round_trip() {
        let t = GroundStateTable::oracle_1d(&square_well(), 4, 0.05).unwrap();
        let dir = std::env::temp_dir().join(format!("gs-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("table.json");
        t.write_json(&path).unwrap();
        assert_eq!(GroundStateTable::read_json(&path).unwrap(), t);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn energy_is_permutation_and_translation_invariant(
                xs in prop::collection::vec(-4.0f64..4.0, 2..7),
                shift in -10.0f64..10.0,
            ) {
                let p = two_well();
                let e = total_energy(&p, &Configuration::from_1d(&xs));
                let mut rev: Vec<f64> = xs.iter().rev().map(|x| x + shift).collect();
                rev.rotate_left(1);
                let f = total_energy(&p, &Configuration::from_1d(&rev));
                if e.is_finite() {
                    prop_assert!((e - f).abs() < 1e-9);
                } else {
                    prop_assert!(f.is_infinite());
                }
            }
        }
    }
}
