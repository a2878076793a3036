//! Variational problems built on a ground-state table, phase-region labels,
//! the truncated equation of state and low-temperature scans.
//!
//! `nu(mu) = min_k (E_k - k mu)` and `mu(nu) = inf_k (E_k - nu) / k`, taken
//! over the finite table. Minimizers are reported as sets; ties are values
//! within `tol` of the minimum.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{precondition, Result};
use crate::groundstate::{GroundStateTable, Thresholds};
use crate::potential::PairPotential;
use crate::virial::mayer_radius_lower_bound;

/// Finite-table minimum with its minimizers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Minimum {
    pub value: f64,
    /// All `k` within `tol` of the minimum, smallest first.
    pub minimizers: Vec<usize>,
    /// Distance from the minimum to the best value outside the minimizer set.
    pub gap: f64,
}

impl Minimum {
    pub fn unique(&self) -> Option<usize> {
        (self.minimizers.len() == 1).then(|| self.minimizers[0])
    }
}

fn minimize(values: impl Iterator<Item = (usize, f64)>, tol: f64) -> Result<Minimum> {
    let all: Vec<(usize, f64)> = values.collect();
    if all.is_empty() {
        return Err(precondition("empty energy table"));
    }
    let value = all.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
    let minimizers: Vec<usize> = all
        .iter()
        .filter(|v| v.1 <= value + tol)
        .map(|v| v.0)
        .collect();
    let gap = all
        .iter()
        .filter(|v| v.1 > value + tol)
        .map(|v| v.1 - value)
        .fold(f64::INFINITY, f64::min);
    Ok(Minimum {
        value,
        minimizers,
        gap,
    })
}

/// `nu(mu) = min_k (E_k - k mu)`; `energies[0] = E_1`.
pub fn nu_of_mu(energies: &[f64], mu: f64, tol: f64) -> Result<Minimum> {
    minimize(
        energies
            .iter()
            .enumerate()
            .map(|(i, e)| (i + 1, e - (i + 1) as f64 * mu)),
        tol,
    )
}

/// Value of `mu(nu)` with its minimizers, or the infimum `e_inf` when no finite `k` attains it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuOfNu {
    pub value: f64,
    /// `None` when `nu < nu*`: the infimum is approached as `k -> inf`.
    pub minimum: Option<Minimum>,
}

/// `mu(nu) = inf_k (E_k - nu) / k` for `nu > 0`.
///
/// Below `nu*` every `(E_k - nu) / k` exceeds `e_inf` while their infimum
/// equals it, so no finite minimizer exists and `e_inf` is returned.
pub fn mu_of_nu(energies: &[f64], thresholds: &Thresholds, nu: f64, tol: f64) -> Result<MuOfNu> {
    if !(nu > 0.0) {
        return Err(precondition(format!("mu(nu) needs nu > 0, got {nu}")));
    }
    if nu < thresholds.nu_star - tol {
        return Ok(MuOfNu {
            value: thresholds.e_inf,
            minimum: None,
        });
    }
    let m = minimize(
        energies
            .iter()
            .enumerate()
            .map(|(i, e)| (i + 1, (e - nu) / (i + 1) as f64)),
        tol,
    )?;
    Ok(MuOfNu {
        value: m.value.min(thresholds.e_inf),
        minimum: Some(m),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    /// Unique minimizer `k = 1`.
    Monatomic,
    /// Every minimizer is finite and at least 2.
    Polyatomic,
    /// `mu > e_inf`, beyond the range of the Mayer series.
    CondensedSide,
    /// `nu < nu*`.
    NoFiniteMinimizer,
    /// Within `tol` of a threshold.
    Boundary,
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Region::Monatomic => "monatomic",
            Region::Polyatomic => "polyatomic",
            Region::CondensedSide => "condensed_side",
            Region::NoFiniteMinimizer => "no_finite_minimizer",
            Region::Boundary => "boundary",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Point {
    Mu(f64),
    Nu(f64),
}

/// Phase region of a chemical potential or of a density exponent `nu`.
pub fn classify_region(t: &Thresholds, point: Point, tol: f64) -> Region {
    match point {
        Point::Mu(mu) => {
            if (mu - t.mu_one).abs() <= tol || (mu - t.e_inf).abs() <= tol {
                Region::Boundary
            } else if mu < t.mu_one {
                Region::Monatomic
            } else if mu < t.e_inf {
                Region::Polyatomic
            } else {
                Region::CondensedSide
            }
        }
        Point::Nu(nu) => {
            if (nu - t.nu_star).abs() <= tol || (nu - t.nu_one).abs() <= tol {
                Region::Boundary
            } else if nu < t.nu_star {
                Region::NoFiniteMinimizer
            } else if nu > t.nu_one {
                Region::Monatomic
            } else {
                Region::Polyatomic
            }
        }
    }
}

/// Grid checks of concavity, monotonicity and reciprocity of `nu(mu)` and `mu(nu)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationalReport {
    pub points: usize,
    pub nu_strictly_decreasing: bool,
    pub nu_concave: bool,
    pub mu_flat_below_nu_star: bool,
    pub mu_strictly_decreasing_above_nu_star: bool,
    pub reciprocity: bool,
}

impl VariationalReport {
    pub fn all(&self) -> bool {
        self.nu_strictly_decreasing
            && self.nu_concave
            && self.mu_flat_below_nu_star
            && self.mu_strictly_decreasing_above_nu_star
            && self.reciprocity
    }
}

/// Evaluates `nu(mu)` on `points` values of `mu <= e_inf` and `mu(nu)` on
/// `points` values of `nu > 0`, checking the structural properties within `tol`.
pub fn variational_check(
    gs: &GroundStateTable,
    points: usize,
    tol: f64,
) -> Result<VariationalReport> {
    let t = gs.require_thresholds()?;
    let e = gs.energies();
    if points < 3 {
        return Err(precondition("grid check needs at least three points"));
    }
    let span = 2.0 * (t.e_inf - t.mu_one).abs().max(1.0);
    let mus: Vec<f64> = (0..points)
        .map(|i| t.e_inf - span + span * i as f64 / (points - 1) as f64)
        .collect();
    let nus: Vec<f64> = mus
        .iter()
        .map(|&m| nu_of_mu(&e, m, tol).map(|r| r.value))
        .collect::<Result<_>>()?;
    let nu_strictly_decreasing = nus.windows(2).all(|w| w[1] < w[0]);
    let nu_concave = nus.windows(3).all(|w| w[0] - 2.0 * w[1] + w[2] <= tol);

    let nu_top = t.nu_one.max(t.nu_star) + span;
    let grid_nu: Vec<f64> = (1..=points)
        .map(|i| nu_top * i as f64 / points as f64)
        .collect();
    let mut flat = true;
    let mut decreasing = true;
    let mut prev: Option<f64> = None;
    for &nu in &grid_nu {
        let m = mu_of_nu(&e, t, nu, tol)?.value;
        if nu <= t.nu_star {
            flat &= (m - t.e_inf).abs() <= tol;
        } else {
            if let Some(p) = prev {
                decreasing &= m < p;
            }
            prev = Some(m);
        }
    }
    let mut reciprocity = true;
    for (&mu, &nu) in mus.iter().zip(&nus) {
        if nu >= t.nu_star && nu > 0.0 {
            let back = mu_of_nu(&e, t, nu, tol)?.value;
            reciprocity &= (back - mu).abs() <= tol * mu.abs().max(1.0);
        }
    }
    Ok(VariationalReport {
        points,
        nu_strictly_decreasing,
        nu_concave,
        mu_flat_below_nu_star: flat,
        mu_strictly_decreasing_above_nu_star: decreasing,
        reciprocity,
    })
}

/// Truncated Mayer sums at one `(beta, mu)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquationOfState {
    pub beta: f64,
    pub mu: f64,
    pub z: f64,
    pub rho: f64,
    /// `beta p`.
    pub pressure: f64,
    pub k_trunc: usize,
    /// Certified lower bound on the Mayer radius.
    pub radius_lower: f64,
    /// `z` lies in the certified disk.
    pub certified: bool,
    /// Bound `z (z / R)^K (e - 1) exp(-beta e_inf)` on the truncation error of
    /// both sums, present when certified.
    pub remainder: Option<f64>,
}

/// `rho = sum_{k<=K} k b_k z^k` and `beta p = sum_{k<=K} b_k z^k` with `z = exp(beta mu)`.
///
/// `mayer[j - 1] = b_j`. With `require_certified` an activity outside the
/// certified disk is an error; otherwise the result is flagged.
pub fn eos_from_series(
    mayer: &[f64],
    p: &PairPotential,
    e_inf: f64,
    beta: f64,
    mu: f64,
    k_trunc: usize,
    require_certified: bool,
) -> Result<EquationOfState> {
    if k_trunc == 0 || k_trunc > mayer.len() {
        return Err(precondition(format!(
            "truncation order {k_trunc} outside 1..={}",
            mayer.len()
        )));
    }
    let z = (beta * mu).exp();
    let radius = mayer_radius_lower_bound(p.v_norm(), e_inf, beta)?;
    let certified = z <= radius;
    if require_certified && !certified {
        return Err(precondition(format!(
            "z = {z:.6e} lies outside the certified disk of radius {radius:.6e}"
        )));
    }
    let (mut rho, mut pressure) = (0.0, 0.0);
    for k in 1..=k_trunc {
        let term = mayer[k - 1] * z.powi(k as i32);
        rho += k as f64 * term;
        pressure += term;
    }
    let remainder = certified.then(|| {
        let log = z.ln() + k_trunc as f64 * (z / radius).ln() + (std::f64::consts::E - 1.0).ln()
            - beta * e_inf;
        log.exp()
    });
    Ok(EquationOfState {
        beta,
        mu,
        z,
        rho,
        pressure,
        k_trunc,
        radius_lower: radius,
        certified,
        remainder,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossoverRow {
    pub beta: f64,
    pub eos: EquationOfState,
    /// `beta^-1 log rho`, target `-nu(mu)`.
    pub scaled_log_rho: f64,
    /// `k(mu) beta p / rho`, target 1; absent when `k(mu)` is not unique.
    pub pressure_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossoverReport {
    pub mu: f64,
    pub nu: f64,
    pub minimizers: Vec<usize>,
    /// Table size and gap to the second-best `k`, to judge saturation.
    pub k_max: usize,
    pub gap: f64,
    pub rows: Vec<CrossoverRow>,
    /// `|beta^-1 log rho + nu|` is non-increasing along the grid.
    pub density_trend_ok: bool,
    /// `|k(mu) beta p / rho - 1|` is non-increasing along the grid.
    pub pressure_trend_ok: Option<bool>,
    pub note: Option<String>,
}

/// Density and pressure along a `beta` grid at fixed `mu < e_inf`.
///
/// `columns` yields `b_1..b_K` for each grid point.
pub fn crossover_scan(
    columns: &[(f64, Vec<f64>)],
    p: &PairPotential,
    gs: &GroundStateTable,
    mu: f64,
    tol: f64,
) -> Result<CrossoverReport> {
    let t = gs.require_thresholds()?;
    if mu >= t.e_inf {
        return Err(precondition(format!(
            "mu = {mu} is not below e_inf = {}: the Mayer series does not describe that side",
            t.e_inf
        )));
    }
    let energies = gs.energies();
    let nm = nu_of_mu(&energies, mu, tol)?;
    let k_mu = nm.unique();
    let mut rows = Vec::new();
    for (beta, mayer) in columns {
        let eos = eos_from_series(mayer, p, t.e_inf, *beta, mu, mayer.len(), false)?;
        rows.push(CrossoverRow {
            beta: *beta,
            scaled_log_rho: eos.rho.ln() / beta,
            pressure_ratio: k_mu.map(|k| k as f64 * eos.pressure / eos.rho),
            eos,
        });
    }
    let dens: Vec<f64> = rows
        .iter()
        .map(|r| (r.scaled_log_rho + nm.value).abs())
        .collect();
    let press: Option<Vec<f64>> = rows
        .iter()
        .map(|r| r.pressure_ratio.map(|x| (x - 1.0).abs()))
        .collect();
    Ok(CrossoverReport {
        mu,
        nu: nm.value,
        note: k_mu
            .is_none()
            .then(|| "k(mu) is not unique; pressure ratio skipped".to_string()),
        minimizers: nm.minimizers,
        k_max: energies.len(),
        gap: nm.gap,
        density_trend_ok: dens.windows(2).all(|w| w[1] <= w[0]),
        pressure_trend_ok: press.map(|v| v.windows(2).all(|w| w[1] <= w[0])),
        rows,
    })
}

/// Low-temperature free-energy density with an uncertainty band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeEnergy {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub minimizer: usize,
}

/// `rho min_k (E_k + beta^-1 log rho) / k` with a band `+- c rho beta^-1 log beta`.
pub fn free_energy_low_t(energies: &[f64], beta: f64, rho: f64, band: f64) -> Result<FreeEnergy> {
    if !(rho > 0.0 && beta > 0.0) {
        return Err(precondition("free energy needs rho > 0 and beta > 0"));
    }
    let shift = rho.ln() / beta;
    let m = minimize(
        energies
            .iter()
            .enumerate()
            .map(|(i, e)| (i + 1, (e + shift) / (i + 1) as f64)),
        0.0,
    )?;
    let value = rho * m.value;
    let width = band * rho * beta.ln().abs() / beta;
    Ok(FreeEnergy {
        value,
        lower: value - width,
        upper: value + width,
        minimizer: m.minimizers[0],
    })
}

/// Estimate of the density reached at the Mayer radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoMayEstimate {
    pub z: f64,
    pub rho: f64,
    pub radius_estimate: f64,
    pub method: String,
}

/// `rho` at `z = (1 - delta) R`, with `R` a radius estimate from [`crate::virial::radius_bounds`].
pub fn rho_may_estimate(
    mayer: &[f64],
    radius_estimate: f64,
    method: &str,
    delta: f64,
) -> Result<RhoMayEstimate> {
    if !(0.0..1.0).contains(&delta) || !(radius_estimate > 0.0) {
        return Err(precondition(
            "rho^May estimate needs 0 <= delta < 1 and a positive radius",
        ));
    }
    let z = (1.0 - delta) * radius_estimate;
    let rho = mayer
        .iter()
        .enumerate()
        .map(|(i, b)| (i + 1) as f64 * b * z.powi(i as i32 + 1))
        .sum();
    Ok(RhoMayEstimate {
        z,
        rho,
        radius_estimate,
        method: method.to_string(),
    })
}

/// One line of a scan output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub beta: f64,
    pub mu_or_nu: f64,
    pub value: f64,
    pub target: f64,
    pub label: String,
}

/// CSV with columns `beta,mu_or_nu,value,target,label`.
pub fn write_scan_csv<W: Write>(rows: &[ScanRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

/// `nu(mu)` on a grid of `mu`, labelled `nu_of_mu:<region>` with the smallest
/// minimizer as target; `beta` is `0` (table-only).
pub fn nu_scan(gs: &GroundStateTable, mus: &[f64], tol: f64) -> Result<Vec<ScanRow>> {
    let t = gs.require_thresholds()?;
    let e = gs.energies();
    mus.iter()
        .map(|&mu| {
            let m = nu_of_mu(&e, mu, tol)?;
            Ok(ScanRow {
                beta: 0.0,
                mu_or_nu: mu,
                value: m.value,
                target: m.minimizers[0] as f64,
                label: format!("nu_of_mu:{}", classify_region(t, Point::Mu(mu), tol)),
            })
        })
        .collect()
}

/// Rows of a crossover report: `beta^-1 log rho` against `-nu(mu)` and the pressure ratio against 1.
pub fn crossover_rows(report: &CrossoverReport) -> Vec<ScanRow> {
    let mut out = Vec::new();
    for r in &report.rows {
        out.push(ScanRow {
            beta: r.beta,
            mu_or_nu: report.mu,
            value: r.scaled_log_rho,
            target: -report.nu,
            label: "scaled_log_density".into(),
        });
        if let Some(x) = r.pressure_ratio {
            out.push(ScanRow {
                beta: r.beta,
                mu_or_nu: report.mu,
                value: x,
                target: 1.0,
                label: "pressure_ratio".into(),
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groundstate::EXACT_TOL;

    fn square_table() -> GroundStateTable {
        let e: Vec<f64> = (1..=8).map(|k| -((k - 1) as f64)).collect();
        GroundStateTable::from_energies(1, &e, EXACT_TOL).unwrap()
    }

    fn two_well_table() -> GroundStateTable {
        GroundStateTable::from_energies(
            1,
            &[0.0, -4.0, -6.0, -8.25, -10.25, -12.5, -14.5, -16.75],
            EXACT_TOL,
        )
        .unwrap()
    }

    #[test]
    fn nu_of_mu_examples() {
        let e = square_table().energies();
        let m = nu_of_mu(&e, -2.0, 1e-12).unwrap();
        assert_eq!(m.value, 2.0);
        assert_eq!(m.minimizers, vec![1]);
        let m = nu_of_mu(&e, -1.0, 1e-12).unwrap();
        assert_eq!(m.value, 1.0);
        assert_eq!(m.minimizers, (1..=8).collect::<Vec<_>>());
        let m = nu_of_mu(&two_well_table().energies(), -3.0, 1e-12).unwrap();
        assert_eq!(m.minimizers, vec![2]);
        assert!(nu_of_mu(&[], -1.0, 0.0).is_err());
    }

    #[test]
    fn mu_of_nu_examples() {
        let gs = square_table();
        let t = gs.thresholds.as_ref().unwrap();
        let e = gs.energies();
        let m = mu_of_nu(&e, t, 2.0, 1e-12).unwrap();
        assert_eq!(m.value, -2.0);
        assert_eq!(m.minimum.unwrap().minimizers, vec![1]);
        let m = mu_of_nu(&e, t, 0.5, 1e-12).unwrap();
        assert_eq!(m.value, -1.0);
        assert!(m.minimum.is_none());
        assert!(mu_of_nu(&e, t, 0.0, 1e-12).is_err());
    }

    #[test]
    fn regions() {
        let sq = square_table();
        let t = sq.thresholds.as_ref().unwrap();
        assert_eq!(
            classify_region(t, Point::Mu(-1.5), 1e-12),
            Region::Monatomic
        );
        assert_eq!(classify_region(t, Point::Mu(-1.0), 1e-12), Region::Boundary);
        assert_eq!(
            classify_region(t, Point::Nu(0.5), 1e-12),
            Region::NoFiniteMinimizer
        );
        let tw = two_well_table();
        let t = tw.thresholds.as_ref().unwrap();
        let mid = 0.5 * (t.mu_one + t.e_inf);
        assert_eq!(
            classify_region(t, Point::Mu(mid), 1e-12),
            Region::Polyatomic
        );
        assert_eq!(
            classify_region(t, Point::Mu(-5.0), 1e-12),
            Region::Monatomic
        );
        assert_eq!(
            classify_region(t, Point::Mu(-1.0), 1e-12),
            Region::CondensedSide
        );
        assert_eq!(
            classify_region(t, Point::Nu(t.nu_star / 2.0), 1e-12),
            Region::NoFiniteMinimizer
        );
        assert_eq!(
            classify_region(t, Point::Nu(2.0), 1e-12),
            Region::Polyatomic
        );
    }

    #[test]
    fn variational_checks_hold_on_fixture_tables() {
        for gs in [square_table(), two_well_table()] {
            let r = variational_check(&gs, 200, 1e-12).unwrap();
            assert!(r.all(), "{r:?}");
        }
    }

    #[test]
    fn eos_examples() {
        let p = PairPotential::square_well(1.0, 1.5, 1.0, 1).unwrap();
        let b2 = 0.3;
        let eos = eos_from_series(&[1.0, b2], &p, -1.0, 1.0, -6.0, 2, true).unwrap();
        let z = (-6.0f64).exp();
        assert!((eos.rho - (z + 2.0 * b2 * z * z)).abs() < 1e-18);
        assert!((eos.pressure - (z + b2 * z * z)).abs() < 1e-18);
        assert!(eos.certified);
        let ideal = eos_from_series(&[1.0, 0.0, 0.0], &p, -1.0, 1.0, -6.0, 3, true).unwrap();
        assert_eq!(ideal.rho, ideal.pressure);
        assert!(eos_from_series(&[1.0, b2], &p, -1.0, 1.0, 0.0, 2, true).is_err());
        let flagged = eos_from_series(&[1.0, b2], &p, -1.0, 1.0, 0.0, 2, false).unwrap();
        assert!(!flagged.certified && flagged.remainder.is_none());
    }

    #[test]
    fn square_well_eos_certificate() {
        use crate::mayer::{compute_table, MayerRequest};
        let p = PairPotential::square_well(1.0, 1.5, 1.0, 1).unwrap();
        let grid = vec![4.0, 8.0];
        let table = compute_table(&p, &MayerRequest::new(5, grid)).unwrap();
        let (mayer, _) = table.column(8.0).unwrap();
        // e_inf - 0.5 sits outside the certified disk at beta = 8
        let outside = eos_from_series(&mayer, &p, -1.0, 8.0, -1.5, 5, false).unwrap();
        assert!(!outside.certified);
        assert!(eos_from_series(&mayer, &p, -1.0, 8.0, -1.5, 5, true).is_err());
        let inside = eos_from_series(&mayer, &p, -1.0, 8.0, -2.5, 5, true).unwrap();
        assert!(inside.remainder.unwrap() < 0.1 * inside.z);
        assert!((inside.rho / inside.z - 1.0).abs() < 1e-3);
        for beta in [4.0, 8.0] {
            let (mayer, _) = table.column(beta).unwrap();
            assert!(mayer.iter().all(|&b| b >= 0.0));
            let radius = mayer_radius_lower_bound(p.v_norm(), -1.0, beta).unwrap();
            let mut last = (0.0, 0.0);
            for i in 1..20 {
                let mu = (radius * i as f64 / 20.0).ln() / beta;
                let e = eos_from_series(&mayer, &p, -1.0, beta, mu, 5, true).unwrap();
                assert!(e.rho > last.0 && e.pressure > last.1);
                last = (e.rho, e.pressure);
            }
        }
    }

    #[test]
    fn free_energy_examples() {
        let e = square_table().energies();
        let beta = 10.0;
        let rho = (-beta * 2.0f64).exp();
        let f = free_energy_low_t(&e, beta, rho, 1.0).unwrap();
        assert_eq!(f.minimizer, 1);
        assert!((f.value + rho * 2.0).abs() < 1e-15 * rho);
        let rho = (-beta * 0.5f64).exp();
        let f = free_energy_low_t(&e, beta, rho, 1.0).unwrap();
        assert_eq!(f.minimizer, 8);
        assert!(f.value > -rho);
    }

    #[test]
    fn crossover_rejects_condensed_side() {
        let p = PairPotential::square_well(1.0, 1.5, 1.0, 1).unwrap();
        let cols = vec![(1.0, vec![1.0, 0.1])];
        assert!(crossover_scan(&cols, &p, &square_table(), -0.5, 1e-12).is_err());
    }

    #[test]
    fn scan_csv_layout() {
        let rows = nu_scan(&square_table(), &[-2.0, -1.5], 1e-12).unwrap();
        let mut buf = Vec::new();
        write_scan_csv(&rows, &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("beta,mu_or_nu,value,target,label\n"));
        assert!(s.contains("monatomic"));
    }

    proptest::proptest! {
        #[test]
        fn variational_invariants(steps in proptest::collection::vec(0.1f64..3.0, 4..8), t in 0.0f64..1.0) {
            let mut energies = vec![0.0];
            for s in &steps {
                energies.push(energies.last().unwrap() - s);
            }
            let gs = GroundStateTable::from_energies(1, &energies, 1e-9).unwrap();
            let th = gs.thresholds.as_ref().unwrap();
            let mu = th.e_inf - 3.0 * t;
            let nu = nu_of_mu(&energies, mu, 1e-12).unwrap();
            let back = mu_of_nu(&energies, th, nu.value, 1e-12).unwrap();
            proptest::prop_assert!((back.value - mu).abs() <= 1e-9 * mu.abs().max(1.0));
            let h = 0.01;
            let lo = nu_of_mu(&energies, mu - h, 1e-12).unwrap().value;
            let hi = nu_of_mu(&energies, mu + h, 1e-12).unwrap().value;
            proptest::prop_assert!(lo - 2.0 * nu.value + hi <= 1e-9);
            proptest::prop_assert!(lo > nu.value && nu.value > hi);
            if mu < th.mu_one - 1e-9 {
                proptest::prop_assert_eq!(nu.minimizers, vec![1]);
            }
        }
    }
}
