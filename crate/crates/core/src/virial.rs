//! Mayer-to-virial transform, series inversion, radius estimates and the
//! sign structure of virial coefficients at low temperature.
//!
//! With `rho = sum_n n b_n z^n` and `beta p = sum_n b_n z^n`, the virial
//! coefficients are
//! `d_n = sum_m (-1)^(|m| - 1) a(m) prod_j b_j^(m_j)` over vectors `m` with
//! `sum_j (j - 1) m_j = n - 1`, where
//! `a(m) = ((n - 2 + |m|)! / n!) prod_j j^(m_j) / m_j!`,
//! and `beta p = sum_n c_n rho^n` with `c_1 = 1`, `c_n = -(n - 1) d_n`.

use std::io::Write;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{precondition, Error, Result};
use crate::groundstate::{gluing_check, GroundStateTable};
use crate::mayer::{MayerMethod, MayerTable};
use crate::potential::PairPotential;

/// Largest order with precomputed transform coefficients.
pub const MAX_ORDER: usize = 16;

/// `(m_2, .., m_n)` with `sum_j (j - 1) m_j = n - 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CompositionVector {
    pub n: usize,
    /// `m[i]` is the multiplicity of `b_{i+2}`.
    pub m: Vec<u32>,
}

impl CompositionVector {
    /// Multiplicity of `b_j`.
    pub fn get(&self, j: usize) -> u32 {
        if j < 2 {
            0
        } else {
            self.m.get(j - 2).copied().unwrap_or(0)
        }
    }

    /// `sum_j m_j`.
    pub fn total(&self) -> u32 {
        self.m.iter().sum()
    }

    pub fn is_valid(&self) -> bool {
        self.n >= 2
            && self.m.len() == self.n - 1
            && self
                .m
                .iter()
                .enumerate()
                .map(|(i, &c)| (i + 1) * c as usize)
                .sum::<usize>()
                == self.n - 1
    }
}

/// All composition vectors of order `n`, in decreasing lexicographic order of `m`.
pub fn composition_vectors(n: usize) -> Result<Vec<CompositionVector>> {
    if n < 2 {
        return Err(precondition(format!(
            "composition vectors need n >= 2, got {n}"
        )));
    }
    fn rec(
        j: usize,
        n: usize,
        remaining: usize,
        m: &mut Vec<u32>,
        out: &mut Vec<CompositionVector>,
    ) {
        if j > n {
            if remaining == 0 {
                out.push(CompositionVector { n, m: m.clone() });
            }
            return;
        }
        let part = j - 1;
        for c in (0..=remaining / part).rev() {
            m.push(c as u32);
            rec(j + 1, n, remaining - c * part, m, out);
            m.pop();
        }
    }
    let mut out = Vec::new();
    rec(2, n, n - 1, &mut Vec::with_capacity(n - 1), &mut out);
    Ok(out)
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * i)
}

/// `a(m) = ((n - 2 + |m|)! / n!) prod_j j^(m_j) / m_j!`, exactly.
pub fn a_coefficient(m: &CompositionVector) -> BigRational {
    let n = m.n;
    let total = m.total() as usize;
    let mut num = factorial(n - 2 + total);
    let mut den = factorial(n);
    for j in 2..=n {
        let c = m.get(j) as usize;
        num *= BigInt::from(j).pow(c as u32);
        den *= factorial(c);
    }
    BigRational::new(num, den)
}

/// One term of the transform for fixed `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub m: CompositionVector,
    pub a: BigRational,
    /// `(-1)^(|m| - 1) a(m)` rounded once.
    pub signed: f64,
}

/// Transform coefficients for `n = 2..=n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct VirialTransform {
    terms: Vec<Vec<Term>>,
}

impl VirialTransform {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 2 {
            return Err(precondition("transform order must be at least 2"));
        }
        let mut terms = vec![Vec::new(), Vec::new()];
        for n in 2..=n_max {
            let row = composition_vectors(n)?
                .into_iter()
                .map(|m| {
                    let a = a_coefficient(&m);
                    let sign = if m.total() % 2 == 1 { 1.0 } else { -1.0 };
                    let signed = sign * a.to_f64().expect("finite coefficient");
                    Term { m, a, signed }
                })
                .collect();
            terms.push(row);
        }
        Ok(Self { terms })
    }

    /// Shared transform up to [`MAX_ORDER`].
    pub fn standard() -> &'static Self {
        static STANDARD: OnceLock<VirialTransform> = OnceLock::new();
        STANDARD.get_or_init(|| Self::new(MAX_ORDER).expect("valid order"))
    }

    pub fn n_max(&self) -> usize {
        self.terms.len() - 1
    }

    pub fn terms(&self, n: usize) -> &[Term] {
        &self.terms[n]
    }

    /// Replaces the coefficient of one term; used to check that the test
    /// suites notice a wrong transform.
    pub fn with_coefficient(mut self, n: usize, index: usize, a: BigRational) -> Self {
        let t = &mut self.terms[n][index];
        let sign = if t.m.total() % 2 == 1 { 1.0 } else { -1.0 };
        t.signed = sign * a.to_f64().expect("finite coefficient");
        t.a = a;
        self
    }

    fn check(&self, mayer: &[f64], n: usize) -> Result<()> {
        if n < 2 || n > self.n_max() {
            return Err(Error::OutOfRange {
                what: "n",
                value: n,
                min: 2,
                max: self.n_max(),
            });
        }
        if mayer.len() < n {
            return Err(precondition(format!(
                "d_{n} needs b_2..b_{n}, got {} coefficients",
                mayer.len()
            )));
        }
        if mayer[..n].iter().any(|b| !b.is_finite()) {
            return Err(precondition("Mayer coefficients must be finite"));
        }
        Ok(())
    }

    /// `d_n` from `mayer[j - 1] = b_j` (`b_1` is not read).
    pub fn d(&self, mayer: &[f64], n: usize) -> Result<f64> {
        self.check(mayer, n)?;
        Ok(self.terms[n]
            .iter()
            .map(|t| t.signed * monomial(mayer, &t.m))
            .sum())
    }

    /// `d_n` and the first-order propagated error `sum_j |dd_n/db_j| err_j`.
    pub fn d_with_error(&self, mayer: &[f64], errors: &[f64], n: usize) -> Result<(f64, f64)> {
        let d = self.d(mayer, n)?;
        let mut grad = vec![0.0; n + 1];
        for t in &self.terms[n] {
            for j in 2..=n {
                let c = t.m.get(j);
                if c == 0 {
                    continue;
                }
                let mut rest = t.m.clone();
                rest.m[j - 2] -= 1;
                grad[j] += t.signed * c as f64 * monomial(mayer, &rest);
            }
        }
        let err = (2..=n)
            .map(|j| grad[j].abs() * errors.get(j - 1).copied().unwrap_or(0.0))
            .sum();
        Ok((d, err))
    }
}

fn monomial(mayer: &[f64], m: &CompositionVector) -> f64 {
    m.m.iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(i, &c)| mayer[i + 1].powi(c as i32))
        .product()
}

/// `d_n` with the standard transform; `mayer[j - 1] = b_j`.
pub fn virial_from_mayer(mayer: &[f64], n: usize) -> Result<f64> {
    VirialTransform::standard().d(mayer, n)
}

/// Truncated power-series product `a * b` up to `z^len`.
fn series_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let len = a.len();
    let mut out = vec![0.0; len];
    for (i, &x) in a.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate().take(len - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// `c_1..c_N` of `beta p = sum c_n rho^n`, by reverting `rho(z)` and
/// substituting into `beta p(z)`. `mayer[j - 1] = b_j` with `b_1 = 1`.
pub fn invert_density_series(mayer: &[f64]) -> Result<Vec<f64>> {
    let n = mayer.len();
    if n == 0 || mayer[0] != 1.0 {
        return Err(precondition("series inversion needs b_1 = 1"));
    }
    // coefficient vectors indexed by power, entries 0..=n
    // z(rho) from the fixed point z = rho - sum_{j>=2} j b_j z^j; each pass fixes one more order
    let mut z = vec![0.0; n + 1];
    z[1] = 1.0;
    for _ in 1..n {
        let mut next = vec![0.0; n + 1];
        next[1] = 1.0;
        let mut power = z.clone();
        for j in 2..=n {
            power = series_mul(&power, &z);
            let w = j as f64 * mayer[j - 1];
            for (q, p) in next.iter_mut().zip(&power) {
                *q -= w * p;
            }
        }
        z = next;
    }
    let mut pressure = vec![0.0; n + 1];
    let mut power = z.clone();
    for j in 1..=n {
        if j > 1 {
            power = series_mul(&power, &z);
        }
        for (q, p) in pressure.iter_mut().zip(&power) {
            *q += mayer[j - 1] * p;
        }
    }
    Ok(pressure[1..].to_vec())
}

/// One row of a virial table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VirialEntry {
    pub n: usize,
    pub beta: f64,
    pub d_n: f64,
    pub c_n: f64,
    /// Least exact Mayer method among `b_2..b_n`.
    pub provenance: MayerMethod,
    /// First-order propagation of the Mayer errors into `d_n`.
    pub propagated_error: f64,
}

/// `d_n` (transform) and `c_n` (series inversion) over a `beta` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VirialTable {
    pub beta_grid: Vec<f64>,
    pub entries: Vec<VirialEntry>,
}

impl VirialTable {
    pub fn from_mayer(table: &MayerTable, n_max: usize) -> Result<Self> {
        Self::from_mayer_with(table, n_max, VirialTransform::standard())
    }

    pub fn from_mayer_with(
        table: &MayerTable,
        n_max: usize,
        transform: &VirialTransform,
    ) -> Result<Self> {
        if table.is_empty() {
            return Err(precondition("empty Mayer table"));
        }
        if n_max < 2 || n_max > table.max_k() {
            return Err(precondition(format!(
                "virial order {n_max} needs Mayer coefficients up to k = {n_max}, table has {}",
                table.max_k()
            )));
        }
        let mut entries = Vec::new();
        for &beta in &table.beta_grid {
            let (values, errors) = table.column(beta)?;
            let c = invert_density_series(&values[..n_max])?;
            let mut provenance = MayerMethod::Analytic;
            for n in 2..=n_max {
                provenance = provenance.max(
                    table
                        .get(n, beta)
                        .map_or(MayerMethod::Analytic, |e| e.method),
                );
                let (d, err) = transform.d_with_error(&values, &errors, n)?;
                entries.push(VirialEntry {
                    n,
                    beta,
                    d_n: d,
                    c_n: c[n - 1],
                    provenance,
                    propagated_error: err,
                });
            }
        }
        Ok(Self {
            beta_grid: table.beta_grid.clone(),
            entries,
        })
    }

    pub fn get(&self, n: usize, beta: f64) -> Option<&VirialEntry> {
        self.entries
            .iter()
            .find(|e| e.n == n && (e.beta - beta).abs() <= 1e-12 * beta.abs().max(1.0))
    }

    pub fn n_max(&self) -> usize {
        self.entries.iter().map(|e| e.n).max().unwrap_or(0)
    }

    /// Entries where `c_n` and `-(n - 1) d_n` differ by more than `rel_tol`.
    pub fn inconsistencies(&self, rel_tol: f64) -> Vec<&VirialEntry> {
        self.entries
            .iter()
            .filter(|e| {
                let expect = -((e.n - 1) as f64) * e.d_n;
                (e.c_n - expect).abs()
                    > rel_tol * expect.abs().max(e.c_n.abs()).max(f64::MIN_POSITIVE)
            })
            .collect()
    }

    /// CSV with columns `n,beta,d_n,c_n,provenance,propagated_error`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for e in &self.entries {
            out.serialize(e)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Radius-of-convergence bounds and estimates for the Mayer series at one `beta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusBounds {
    pub beta: f64,
    /// Certified lower bound `exp(beta e_inf) / (beta e |||v|||)`.
    pub lower: f64,
    /// `(k, (k exp(-beta e_inf) / ((k - 1) |b_k|))^(1 / (k - 1)))` for every nonzero `b_k`.
    /// Stated for finite-volume coefficients; here applied to the infinite-volume ones.
    pub penrose_upper: Vec<(usize, f64)>,
    pub penrose_min: f64,
    /// Root-test estimate `|b_K|^(-1 / (K - 1))` at the largest `K` with `b_K != 0`.
    pub ratio_estimate: f64,
    pub estimator: String,
    /// Plain coefficient ratio `|b_{K-1} / b_K|`, when available.
    pub coefficient_ratio: Option<f64>,
    pub penrose_is_heuristic_transplant: bool,
}

/// `exp(beta e_inf) / (beta e |||v|||)`.
pub fn mayer_radius_lower_bound(v_norm: f64, e_inf: f64, beta: f64) -> Result<f64> {
    if !(beta > 0.0) || !(v_norm > 0.0) {
        return Err(precondition("radius bound needs beta > 0 and |||v||| > 0"));
    }
    Ok((beta * e_inf).exp() / (beta * std::f64::consts::E * v_norm))
}

/// Radius bounds from `mayer[j - 1] = b_j`.
pub fn radius_bounds(mayer: &[f64], v_norm: f64, e_inf: f64, beta: f64) -> Result<RadiusBounds> {
    let lower = mayer_radius_lower_bound(v_norm, e_inf, beta)?;
    let penrose_upper: Vec<(usize, f64)> = (2..=mayer.len())
        .filter(|&k| mayer[k - 1] != 0.0)
        .map(|k| {
            let kf = k as f64;
            // in logs: exp(-beta e_inf) can overflow for large beta
            let log = (kf / (kf - 1.0)).ln() - beta * e_inf - mayer[k - 1].abs().ln();
            (k, (log / (kf - 1.0)).exp())
        })
        .collect();
    let Some(&(k_top, _)) = penrose_upper.last() else {
        return Err(Error::Numerical(
            "all b_k vanish for k >= 2: radius undetermined".into(),
        ));
    };
    let penrose_min = penrose_upper
        .iter()
        .map(|p| p.1)
        .fold(f64::INFINITY, f64::min);
    let ratio_estimate = (-mayer[k_top - 1].abs().ln() / (k_top as f64 - 1.0)).exp();
    let coefficient_ratio = (k_top >= 3 && mayer[k_top - 2] != 0.0)
        .then(|| (mayer[k_top - 2] / mayer[k_top - 1]).abs());
    Ok(RadiusBounds {
        beta,
        lower,
        penrose_upper,
        penrose_min,
        ratio_estimate,
        estimator: format!("root_test_k{k_top}"),
        coefficient_ratio,
        penrose_is_heuristic_transplant: true,
    })
}

/// `(e - 1) exp(-beta e_inf)`, the bound on `sum_{n>=2} n |b_n| z^(n-1)` inside the certified disk.
pub fn remainder_bound(p: &PairPotential, e_inf: f64, beta: f64, z: f64) -> Result<f64> {
    let radius = mayer_radius_lower_bound(p.v_norm(), e_inf, beta)?;
    if !(0.0..=radius).contains(&z) {
        return Err(precondition(format!(
            "activity {z:.6e} outside the certified disk [0, {radius:.6e}]"
        )));
    }
    Ok((std::f64::consts::E - 1.0) * (-beta * e_inf).exp())
}

/// Zero of `d rho / dz` near `-1 / (4 b_2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoZeroRoot {
    pub z0: f64,
    /// `-1 / (4 b_2)`.
    pub predicted: f64,
    /// `|4 b_2 z0 + 1|`.
    pub deviation: f64,
    /// `rho(z0) = sum_k k b_k z0^k`.
    pub rho_at_root: f64,
}

/// Solves `1 + sum_{k>=2} k^2 b_k z^(k-1) = 0` near `-1 / (4 b_2)`.
///
/// Works in `delta = 4 b_2 z + 1`, where the equation reads
/// `delta + sum_{k>=3} (k^2 b_k / b_2^(k-1)) ((delta - 1) / 4)^(k-1) = 0`,
/// and brackets `delta` in `[-1/2, 1/2]`. Small deviations stay at full
/// relative precision this way.
pub fn find_drho_dz_root(mayer: &[f64]) -> Result<RhoZeroRoot> {
    if mayer.len() < 2 {
        return Err(precondition("root search needs b_2"));
    }
    let b2 = mayer[1];
    if !(b2 > 0.0) {
        return Err(precondition(format!("root search needs b_2 > 0, got {b2}")));
    }
    // log-scaled coefficients avoid overflow of b_2^(k-1)
    let coeffs: Vec<(f64, i32)> = (3..=mayer.len())
        .filter(|&k| mayer[k - 1] != 0.0)
        .map(|k| {
            let kf = k as f64;
            let mag = (2.0 * kf.ln() + mayer[k - 1].abs().ln() - (kf - 1.0) * b2.ln()).exp();
            (mayer[k - 1].signum() * mag, k as i32 - 1)
        })
        .collect();
    let g = |delta: f64| -> f64 {
        let u = (delta - 1.0) / 4.0;
        delta + coeffs.iter().map(|&(a, p)| a * u.powi(p)).sum::<f64>()
    };
    let (mut lo, mut hi) = (-0.5, 0.5);
    let (g_lo, g_hi) = (g(lo), g(hi));
    if !(g_lo.is_finite() && g_hi.is_finite()) || g_lo.signum() == g_hi.signum() {
        return Err(Error::Numerical(format!(
            "no sign change of drho/dz in the bracket z in [{:.6e}, {:.6e}]",
            (lo - 1.0) / (4.0 * b2),
            (hi - 1.0) / (4.0 * b2)
        )));
    }
    let lo_negative = g_lo < 0.0;
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let gm = g(mid);
        if gm == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if (gm < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let delta = if g(lo).abs() <= g(hi).abs() { lo } else { hi };
    let z0 = (delta - 1.0) / (4.0 * b2);
    let rho_at_root = mayer
        .iter()
        .enumerate()
        .map(|(i, b)| (i + 1) as f64 * b * z0.powi(i as i32 + 1))
        .sum();
    Ok(RhoZeroRoot {
        z0,
        predicted: -1.0 / (4.0 * b2),
        deviation: delta.abs(),
        rho_at_root,
    })
}

/// Which low-temperature statement applies to a ground-state table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignRegime {
    /// Gluing inequality holds: `limsup beta^-1 log |d_k| <= -E_k`.
    Gluing,
    /// `E_k / (k - 1)` uniquely minimized at `k = 2` with `mu_1 < e_inf`:
    /// `d_k` has sign `(-1)^k` and `beta^-1 log |d_k| -> -(k - 1) E_2`.
    Diatomic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignRow {
    pub n: usize,
    pub sign_at_top: f64,
    pub expected_sign: Option<f64>,
    /// Two-point slope of `log |d_n|` at the top of the grid.
    pub slope: Option<f64>,
    /// `beta^-1 log |d_n|` at the top of the grid.
    pub scaled_log: f64,
    pub target: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignReport {
    pub regime: SignRegime,
    pub beta_top: f64,
    pub rows: Vec<SignRow>,
    pub composition_bound: InequalityReport,
    pub diatomic_bound: Option<InequalityReport>,
}

/// Outcome of checking an inequality over all composition vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub holds: bool,
    pub checked: usize,
    pub equalities: usize,
    pub violations: Vec<(usize, Vec<u32>)>,
    /// Equalities found away from the allowed case (only for the diatomic check).
    pub unexpected_equalities: Vec<(usize, Vec<u32>)>,
}

fn composition_energy(energies: &[f64], m: &CompositionVector) -> f64 {
    (2..=m.n).map(|j| m.get(j) as f64 * energies[j - 1]).sum()
}

/// `E_n <= sum_j m_j E_j` for every composition vector with `n <= n_max`.
pub fn composition_bound_check(
    energies: &[f64],
    n_max: usize,
    tol: f64,
) -> Result<InequalityReport> {
    inequality_check(energies, n_max, tol, |e, m| (e[m.n - 1], true))
}

/// `(n - 1) E_2 <= sum_j m_j E_j`, with equality expected only at `m_2 = n - 1`.
pub fn diatomic_bound_check(energies: &[f64], n_max: usize, tol: f64) -> Result<InequalityReport> {
    inequality_check(energies, n_max, tol, |e, m| {
        ((m.n - 1) as f64 * e[1], m.get(2) as usize == m.n - 1)
    })
}

fn inequality_check(
    energies: &[f64],
    n_max: usize,
    tol: f64,
    lhs: impl Fn(&[f64], &CompositionVector) -> (f64, bool),
) -> Result<InequalityReport> {
    if energies.len() < n_max {
        return Err(precondition(format!(
            "need E_1..E_{n_max}, got {}",
            energies.len()
        )));
    }
    let mut report = InequalityReport {
        holds: true,
        checked: 0,
        equalities: 0,
        violations: Vec::new(),
        unexpected_equalities: Vec::new(),
    };
    for n in 2..=n_max {
        for m in composition_vectors(n)? {
            let (left, equality_allowed) = lhs(energies, &m);
            let right = composition_energy(energies, &m);
            report.checked += 1;
            if left > right + tol {
                report.holds = false;
                report.violations.push((n, m.m.clone()));
            } else if (left - right).abs() <= tol {
                report.equalities += 1;
                if !equality_allowed {
                    report.unexpected_equalities.push((n, m.m.clone()));
                }
            }
        }
    }
    Ok(report)
}

/// Signs and growth rates of `d_n` at the top of the grid against the
/// prediction for the regime of the ground-state table.
///
/// `tol` is absolute for the gluing regime (`beta^-1 log |d_n| <= -E_n + tol`)
/// and relative for the slope in the diatomic regime.
pub fn sign_pattern(table: &VirialTable, gs: &GroundStateTable, tol: f64) -> Result<SignReport> {
    let energies = gs.energies();
    let thresholds = gs.require_thresholds()?;
    let gluing = gluing_check(&energies, thresholds.tol);
    let regime = if gluing.holds {
        SignRegime::Gluing
    } else if thresholds.polyatomic && thresholds.unique_mu_one_minimizer() == Some(2) {
        SignRegime::Diatomic
    } else {
        return Err(precondition(
            "sign regime undeterminable: gluing fails and k = 2 is not the unique minimizer of E_k/(k-1)",
        ));
    };
    let mut grid = table.beta_grid.clone();
    grid.sort_by(f64::total_cmp);
    let beta_top = *grid
        .last()
        .ok_or_else(|| precondition("empty virial table"))?;
    let n_max = table.n_max().min(energies.len());
    let mut rows = Vec::new();
    for n in 2..=n_max {
        let top = table
            .get(n, beta_top)
            .ok_or_else(|| precondition(format!("missing d_{n} at beta = {beta_top}")))?;
        let scaled_log = top.d_n.abs().ln() / beta_top;
        let slope = (grid.len() >= 2)
            .then(|| {
                let b0 = grid[grid.len() - 2];
                table
                    .get(n, b0)
                    .map(|e| (top.d_n.abs().ln() - e.d_n.abs().ln()) / (beta_top - b0))
            })
            .flatten();
        let (target, expected_sign, pass) = match regime {
            SignRegime::Gluing => {
                let target = -energies[n - 1];
                (target, None, scaled_log <= target + tol)
            }
            SignRegime::Diatomic => {
                let target = -((n - 1) as f64) * energies[1];
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                let slope_ok = slope.is_some_and(|s| (s - target).abs() <= tol * target.abs());
                (target, Some(sign), slope_ok && top.d_n.signum() == sign)
            }
        };
        rows.push(SignRow {
            n,
            sign_at_top: top.d_n.signum(),
            expected_sign,
            slope,
            scaled_log,
            target,
            pass,
        });
    }
    let composition_bound = composition_bound_check(&energies, n_max, thresholds.tol)?;
    let diatomic_bound = match regime {
        SignRegime::Diatomic => Some(diatomic_bound_check(&energies, n_max, thresholds.tol)?),
        SignRegime::Gluing => None,
    };
    Ok(SignReport {
        regime,
        beta_top,
        rows,
        composition_bound,
        diatomic_bound,
    })
}
