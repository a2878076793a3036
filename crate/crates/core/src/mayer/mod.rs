//! Mayer coefficients `b_k(beta)` and cluster partition functions `Z_k^cl(beta)`.

mod diagnostic;
pub mod kernel;
pub mod monte_carlo;
pub mod quadrature;

use std::io::{Read, Write};
use std::path::Path;

use gauss_quad::GaussLegendre;
use serde::{Deserialize, Serialize};

pub use diagnostic::{maylt_diagnostic, MayltRow, MayltStatus, SlopeSample};
pub use kernel::{connected_boltzmann_weight, ursell_weight, ursell_weight_fast, UrsellKernel};
pub use monte_carlo::{b_k_monte_carlo, z_cluster_monte_carlo, MonteCarloSettings};
pub use quadrature::{
    b_k_quadrature, cluster_integrals_quadrature, z_cluster_quadrature, QuadratureSettings,
};

use crate::error::{precondition, Error, Result};
use crate::potential::{ball_volume, PairPotential, Shape};

/// A value with an absolute error (standard error or error bound).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

fn radial_integral(p: &PairPotential, beta: f64, minus_one: bool) -> f64 {
    let d = p.dimension();
    let offset = if minus_one { 1.0 } else { 0.0 };
    let gl = GaussLegendre::new(32.try_into().unwrap());
    let mut total = 0.0;
    for piece in p.pieces() {
        let (lo, hi) = (piece.r_lo, piece.r_hi);
        total += match piece.shape {
            Shape::Constant { value } => {
                let g = if minus_one {
                    (-beta * value).exp_m1()
                } else {
                    (-beta * value).exp()
                };
                g * (ball_volume(d, hi) - ball_volume(d, lo))
            }
            Shape::Linear { start, end } if d == 1 => {
                let slope = (end - start) / (hi - lo);
                let width = hi - lo;
                let exp_part = if slope == 0.0 {
                    (-beta * start).exp() * width
                } else {
                    (-beta * start).exp() * -(-beta * slope * width).exp_m1() / (beta * slope)
                };
                2.0 * (exp_part - offset * width)
            }
            Shape::Linear { .. } => {
                let surface = d as f64 * ball_volume(d, 1.0);
                let parts = 16;
                let h = (hi - lo) / parts as f64;
                (0..parts)
                    .map(|i| {
                        let a = lo + i as f64 * h;
                        gl.integrate(a, a + h, |r| {
                            let v = piece.value_at(r);
                            let g = if minus_one {
                                (-beta * v).exp_m1()
                            } else {
                                (-beta * v).exp()
                            };
                            g * surface * r.powi(d as i32 - 1)
                        })
                    })
                    .sum()
            }
        };
    }
    total
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(precondition(format!("beta must be positive, got {beta}")))
    }
}

/// `b_2 = (1/2) int f(|x|) dx`: exact for constant pieces and 1-D ramps,
/// 32-point Gauss-Legendre on 16 panels for ramps in higher dimension.
pub fn b2_analytic(p: &PairPotential, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let core = -ball_volume(p.dimension(), p.hard_core_radius());
    Ok(0.5 * (core + radial_integral(p, beta, true)))
}

/// `Z_2^cl = (1/2) int_{r_hc <= |x| <= b} exp(-beta v(|x|)) dx`.
pub fn z2_analytic(p: &PairPotential, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    Ok(0.5 * radial_integral(p, beta, false))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MayerMethod {
    Analytic,
    Quadrature,
    MonteCarlo,
}

impl std::fmt::Display for MayerMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Analytic => "analytic",
            Self::Quadrature => "quadrature",
            Self::MonteCarlo => "monte_carlo",
        })
    }
}

/// One row of a Mayer table. `std_err` is a standard error for Monte Carlo
/// rows, the error bound for quadrature rows and zero for closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MayerEntry {
    pub k: usize,
    pub beta: f64,
    pub value: f64,
    pub std_err: f64,
    pub method: MayerMethod,
}

fn same_beta(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(1.0)
}

/// `b_k(beta)` and optionally `Z_k^cl(beta)` over a grid of `beta`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MayerTable {
    pub beta_grid: Vec<f64>,
    pub entries: Vec<MayerEntry>,
    pub zcl: Vec<MayerEntry>,
}

fn best(rows: &[MayerEntry], k: usize, beta: f64) -> Option<&MayerEntry> {
    rows.iter()
        .filter(|e| e.k == k && same_beta(e.beta, beta))
        .min_by_key(|e| e.method)
}

impl MayerTable {
    /// Preferred `b_k(beta)` entry: closed form, then quadrature, then Monte Carlo.
    pub fn get(&self, k: usize, beta: f64) -> Option<&MayerEntry> {
        best(&self.entries, k, beta)
    }

    pub fn get_method(&self, k: usize, beta: f64, method: MayerMethod) -> Option<&MayerEntry> {
        self.entries
            .iter()
            .find(|e| e.k == k && e.method == method && same_beta(e.beta, beta))
    }

    pub fn z_cluster(&self, k: usize, beta: f64) -> Option<&MayerEntry> {
        best(&self.zcl, k, beta)
    }

    pub fn max_k(&self) -> usize {
        self.entries.iter().map(|e| e.k).max().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `b_1..b_K` at `beta` (index 0 is `b_1 = 1`), with their errors.
    pub fn column(&self, beta: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let k_max = self.max_k();
        if k_max == 0 {
            return Err(precondition("empty Mayer table"));
        }
        let mut values = Vec::with_capacity(k_max);
        let mut errors = Vec::with_capacity(k_max);
        for k in 1..=k_max {
            match (k, self.get(k, beta)) {
                (_, Some(e)) => {
                    values.push(e.value);
                    errors.push(e.std_err);
                }
                (1, None) => {
                    values.push(1.0);
                    errors.push(0.0);
                }
                _ => {
                    return Err(precondition(format!(
                        "Mayer table has no b_{k} at beta = {beta}"
                    )));
                }
            }
        }
        Ok((values, errors))
    }

    fn write_rows<W: Write>(rows: &[MayerEntry], w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for r in rows {
            out.serialize(r)?;
        }
        out.flush()?;
        Ok(())
    }

    fn read_rows<R: Read>(r: R) -> Result<Vec<MayerEntry>> {
        let mut rdr = csv::Reader::from_reader(r);
        Ok(rdr
            .deserialize()
            .collect::<std::result::Result<Vec<MayerEntry>, _>>()?)
    }

    /// CSV with columns `k,beta,value,std_err,method`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        Self::write_rows(&self.entries, w)
    }

    /// `Z_k^cl` rows in the same CSV layout.
    pub fn write_zcl_csv<W: Write>(&self, w: W) -> Result<()> {
        Self::write_rows(&self.zcl, w)
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let entries = Self::read_rows(r)?;
        let mut beta_grid: Vec<f64> = entries.iter().map(|e| e.beta).collect();
        beta_grid.sort_by(f64::total_cmp);
        beta_grid.dedup_by(|a, b| same_beta(*a, *b));
        Ok(Self {
            beta_grid,
            entries,
            zcl: Vec::new(),
        })
    }

    pub fn read_zcl_csv<R: Read>(&mut self, r: R) -> Result<()> {
        self.zcl = Self::read_rows(r)?;
        Ok(())
    }

    pub fn write_csv_file(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    pub fn read_csv_file(path: &Path) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodChoice {
    /// Closed form at `k = 2`, quadrature in one dimension, Monte Carlo otherwise.
    Auto,
    Quadrature,
    MonteCarlo,
    /// Quadrature and Monte Carlo rows side by side.
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MayerRequest {
    pub k_max: usize,
    pub beta_grid: Vec<f64>,
    pub method: MethodChoice,
    pub quadrature: QuadratureSettings,
    pub monte_carlo: MonteCarloSettings,
    pub z_cluster: bool,
}

impl MayerRequest {
    pub fn new(k_max: usize, beta_grid: Vec<f64>) -> Self {
        Self {
            k_max,
            beta_grid,
            method: MethodChoice::Auto,
            quadrature: QuadratureSettings::default(),
            monte_carlo: MonteCarloSettings::default(),
            z_cluster: true,
        }
    }
}

fn entry(k: usize, beta: f64, e: Estimate, method: MayerMethod) -> MayerEntry {
    MayerEntry {
        k,
        beta,
        value: e.value,
        std_err: e.error,
        method,
    }
}

/// Builds a Mayer table for `k = 1..=k_max` on the requested grid.
pub fn compute_table(p: &PairPotential, req: &MayerRequest) -> Result<MayerTable> {
    if req.beta_grid.is_empty() {
        return Err(precondition("empty beta grid"));
    }
    if req.k_max == 0 {
        return Err(precondition("k_max must be at least 1"));
    }
    let one_d = p.dimension() == 1;
    let mut table = MayerTable {
        beta_grid: req.beta_grid.clone(),
        ..Default::default()
    };
    for &beta in &req.beta_grid {
        check_beta(beta)?;
        table.entries.push(entry(
            1,
            beta,
            Estimate {
                value: 1.0,
                error: 0.0,
            },
            MayerMethod::Analytic,
        ));
        if req.z_cluster {
            table.zcl.push(entry(
                1,
                beta,
                Estimate {
                    value: 1.0,
                    error: 0.0,
                },
                MayerMethod::Analytic,
            ));
        }
        for k in 2..=req.k_max {
            let use_quad = match req.method {
                MethodChoice::Auto => one_d && k <= req.quadrature.max_k,
                MethodChoice::Quadrature | MethodChoice::Both => true,
                MethodChoice::MonteCarlo => false,
            };
            let use_mc = match req.method {
                MethodChoice::Auto => !use_quad,
                MethodChoice::MonteCarlo | MethodChoice::Both => true,
                MethodChoice::Quadrature => false,
            };
            if req.method == MethodChoice::Auto && k == 2 {
                let b = b2_analytic(p, beta)?;
                table.entries.push(entry(
                    2,
                    beta,
                    Estimate {
                        value: b,
                        error: 0.0,
                    },
                    MayerMethod::Analytic,
                ));
                if req.z_cluster {
                    let z = z2_analytic(p, beta)?;
                    table.zcl.push(entry(
                        2,
                        beta,
                        Estimate {
                            value: z,
                            error: 0.0,
                        },
                        MayerMethod::Analytic,
                    ));
                }
                continue;
            }
            if use_quad {
                let q = cluster_integrals_quadrature(p, k, beta, &req.quadrature)?;
                table
                    .entries
                    .push(entry(k, beta, q.b, MayerMethod::Quadrature));
                if req.z_cluster {
                    table
                        .zcl
                        .push(entry(k, beta, q.z_cluster, MayerMethod::Quadrature));
                }
            }
            if use_mc {
                let b = b_k_monte_carlo(p, k, beta, &req.monte_carlo)?;
                table
                    .entries
                    .push(entry(k, beta, b, MayerMethod::MonteCarlo));
                if req.z_cluster {
                    let z = z_cluster_monte_carlo(p, k, beta, &req.monte_carlo)?;
                    table.zcl.push(entry(k, beta, z, MayerMethod::MonteCarlo));
                }
            }
        }
    }
    if table.entries.iter().any(|e| !e.value.is_finite()) {
        return Err(Error::Numerical("non-finite Mayer coefficient".into()));
    }
    Ok(table)
}
