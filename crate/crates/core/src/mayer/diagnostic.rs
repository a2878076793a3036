use serde::{Deserialize, Serialize};

use super::MayerTable;
use crate::error::{precondition, Result};
use crate::groundstate::GroundStateTable;

/// Two-point slope of `log b_k` between consecutive grid points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeSample {
    pub beta_lo: f64,
    pub beta_hi: f64,
    pub slope: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MayltStatus {
    Positive,
    /// `b_k <= 0` at every grid point; no logarithmic slope available.
    NotYetPositive,
}

/// Low-temperature behaviour of one `b_k` along the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MayltRow {
    pub k: usize,
    /// `-E_k`, the limit of `beta^-1 log b_k`.
    pub target: f64,
    pub status: MayltStatus,
    /// Smallest grid `beta` from which `b_k > 0` through the top of the grid.
    pub positive_from: Option<f64>,
    pub slopes: Vec<SlopeSample>,
    /// `|slope - target|` is non-increasing along the grid.
    pub slopes_approach_target: bool,
    /// `|last slope - target| / |target|`.
    pub final_slope_rel_error: Option<f64>,
    /// `(beta, |b_k - Z_k^cl| / Z_k^cl)`.
    pub residuals: Vec<(f64, f64)>,
    /// Residual strictly decreasing over the whole grid.
    pub residual_decreasing: Option<bool>,
    /// Residual strictly decreasing over the top half of the grid.
    pub residual_decreasing_top_half: Option<bool>,
}

fn strictly_decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

/// Slopes of `log b_k` against `-E_k` and the relative gap between `b_k` and `Z_k^cl`.
pub fn maylt_diagnostic(table: &MayerTable, gs: &GroundStateTable) -> Result<Vec<MayltRow>> {
    let mut grid = table.beta_grid.clone();
    grid.sort_by(f64::total_cmp);
    if grid.len() < 3 {
        return Err(precondition(
            "the diagnostic needs at least three beta values",
        ));
    }
    let energies = gs.energies();
    let k_top = table.max_k().min(energies.len());
    let mut rows = Vec::new();
    for k in 2..=k_top {
        let target = -energies[k - 1];
        let values: Vec<Option<f64>> = grid
            .iter()
            .map(|&b| table.get(k, b).map(|e| e.value))
            .collect();
        let positive_from = (0..grid.len())
            .rev()
            .take_while(|&i| values[i].is_some_and(|v| v > 0.0))
            .last()
            .map(|i| grid[i]);
        let mut slopes = Vec::new();
        for i in 1..grid.len() {
            if let (Some(a), Some(b)) = (values[i - 1], values[i]) {
                if a > 0.0 && b > 0.0 {
                    slopes.push(SlopeSample {
                        beta_lo: grid[i - 1],
                        beta_hi: grid[i],
                        slope: (b.ln() - a.ln()) / (grid[i] - grid[i - 1]),
                    });
                }
            }
        }
        let gaps: Vec<f64> = slopes.iter().map(|s| (s.slope - target).abs()).collect();
        let residuals: Vec<(f64, f64)> = grid
            .iter()
            .filter_map(|&beta| {
                let b = table.get(k, beta)?.value;
                let z = table.z_cluster(k, beta)?.value;
                (z > 0.0).then(|| (beta, (b - z).abs() / z))
            })
            .collect();
        let ratios: Vec<f64> = residuals.iter().map(|r| r.1).collect();
        let any_positive = values.iter().any(|v| v.is_some_and(|v| v > 0.0));
        rows.push(MayltRow {
            k,
            target,
            status: if any_positive {
                MayltStatus::Positive
            } else {
                MayltStatus::NotYetPositive
            },
            positive_from,
            slopes_approach_target: !gaps.is_empty() && gaps.windows(2).all(|w| w[1] <= w[0]),
            final_slope_rel_error: gaps.last().map(|g| g / target.abs().max(f64::MIN_POSITIVE)),
            slopes,
            residual_decreasing: (ratios.len() >= 2).then(|| strictly_decreasing(&ratios)),
            residual_decreasing_top_half: (ratios.len() >= 2)
                .then(|| strictly_decreasing(&ratios[(ratios.len() - 1) / 2..])),
            residuals,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mayer::{compute_table, MayerRequest};
    use crate::potential::PairPotential;

    #[test]
    fn square_well_k2_slope_tends_to_depth() {
        let p = PairPotential::square_well(1.0, 1.5, 1.0, 1).unwrap();
        let table = compute_table(&p, &MayerRequest::new(2, vec![4.0, 6.0, 8.0, 10.0])).unwrap();
        let gs = GroundStateTable::from_energies(1, &[0.0, -1.0, -2.0, -3.0], 1e-9).unwrap();
        let rows = maylt_diagnostic(&table, &gs).unwrap();
        let r = &rows[0];
        assert_eq!(r.status, MayltStatus::Positive);
        assert_eq!(r.positive_from, Some(4.0));
        assert!(r.slopes_approach_target);
        assert!(r.final_slope_rel_error.unwrap() < 0.01);
        // |b_2 - Z_2| / Z_2 = 3 e^-beta exactly
        for &(beta, ratio) in &r.residuals {
            assert!((ratio - 3.0 * (-beta).exp()).abs() < 1e-12);
        }
        assert_eq!(r.residual_decreasing, Some(true));
    }

    #[test]
    fn negative_coefficients_are_reported() {
        let p = PairPotential::hard_core(1.0, 1).unwrap();
        let table = compute_table(&p, &MayerRequest::new(2, vec![1.0, 2.0, 3.0])).unwrap();
        let gs = GroundStateTable::from_energies(1, &[0.0, 0.0, 0.0, 0.0], 1e-9).unwrap();
        let rows = maylt_diagnostic(&table, &gs).unwrap();
        assert_eq!(rows[0].status, MayltStatus::NotYetPositive);
        assert!(rows[0].slopes.is_empty());
        let short = compute_table(&p, &MayerRequest::new(2, vec![1.0, 2.0])).unwrap();
        assert!(maylt_diagnostic(&short, &gs).is_err());
    }
}
