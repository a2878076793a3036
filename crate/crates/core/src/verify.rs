//! Acceptance checks on the two one-dimensional fixtures.
//!
//! Each criterion returns a pass flag and one line per sub-check. Heavy
//! tables are computed once per process and shared between criteria.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_rational::BigRational;
use num_traits::{One, Signed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{precondition, Error, Result};
use crate::groundstate::{gluing_check, GroundStateTable, EXACT_TOL};
use crate::mayer::{
    b_k_monte_carlo, b_k_quadrature, compute_table, maylt_diagnostic, MayerMethod, MayerRequest,
    MayerTable, MethodChoice, MonteCarloSettings, QuadratureSettings,
};
use crate::potential::{two_well, PairPotential, Piece};
use crate::thermo::{
    classify_region, eos_from_series, mu_of_nu, nu_of_mu, variational_check, Point, Region,
};
use crate::virial::{
    a_coefficient, composition_bound_check, composition_vectors, find_drho_dz_root,
    invert_density_series, mayer_radius_lower_bound, radius_bounds, sign_pattern, SignRegime,
    VirialTable, VirialTransform,
};

/// Grid step of the 1-D ground-state oracle used by every check.
pub const ORACLE_STEP: f64 = 0.02;
/// Largest table size handed to the oracle.
pub const ORACLE_K: usize = 8;

const SQUARE_GRID: [f64; 6] = [1.0, 2.0, 4.0, 6.0, 8.0, 10.0];
const TWO_WELL_GRID: [f64; 8] = [6.0, 8.0, 10.0, 12.0, 14.0, 16.0, 18.0, 20.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    ClosedFormB2,
    QuadratureVsMonteCarlo,
    LowTemperatureTrend,
    VirialIdentities,
    Thermo,
    Gluing,
    DiatomicSigns,
    GluingSigns,
    RadiusOrdering,
    RhoZero,
    Crossover,
    Determinism,
}

impl Criterion {
    pub const ALL: [Criterion; 12] = [
        Criterion::ClosedFormB2,
        Criterion::QuadratureVsMonteCarlo,
        Criterion::LowTemperatureTrend,
        Criterion::VirialIdentities,
        Criterion::Thermo,
        Criterion::Gluing,
        Criterion::DiatomicSigns,
        Criterion::GluingSigns,
        Criterion::RadiusOrdering,
        Criterion::RhoZero,
        Criterion::Crossover,
        Criterion::Determinism,
    ];

    pub fn number(self) -> usize {
        Self::ALL.iter().position(|&c| c == self).unwrap() + 1
    }

    pub fn name(self) -> &'static str {
        match self {
            Criterion::ClosedFormB2 => "closed_form_b2",
            Criterion::QuadratureVsMonteCarlo => "quadrature_vs_monte_carlo",
            Criterion::LowTemperatureTrend => "low_temperature_trend",
            Criterion::VirialIdentities => "virial_identities",
            Criterion::Thermo => "thermo",
            Criterion::Gluing => "gluing",
            Criterion::DiatomicSigns => "diatomic_signs",
            Criterion::GluingSigns => "gluing_signs",
            Criterion::RadiusOrdering => "radius_ordering",
            Criterion::RhoZero => "rho_zero",
            Criterion::Crossover => "crossover",
            Criterion::Determinism => "determinism",
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:>2} {}", self.number(), self.name())
    }
}

/// A comma-separated list of criterion numbers, names or groups
/// (`all`, `identities`, `mayer`, `virial`, `thermo`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selection(pub BTreeSet<Criterion>);

impl Default for Selection {
    fn default() -> Self {
        Self(Criterion::ALL.into_iter().collect())
    }
}

impl FromStr for Selection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        use Criterion::*;
        let mut out = BTreeSet::new();
        for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let group: &[Criterion] = match item {
                "all" => &Criterion::ALL,
                "identities" => &[VirialIdentities],
                "mayer" => &[ClosedFormB2, QuadratureVsMonteCarlo, LowTemperatureTrend],
                "virial" => &[
                    VirialIdentities,
                    DiatomicSigns,
                    GluingSigns,
                    RadiusOrdering,
                    RhoZero,
                ],
                _ => {
                    let found = match item.parse::<usize>() {
                        Ok(n) => Criterion::ALL.get(n.wrapping_sub(1)).copied(),
                        Err(_) => Criterion::ALL.into_iter().find(|c| c.name() == item),
                    };
                    out.insert(
                        found.ok_or_else(|| precondition(format!("unknown criterion `{item}`")))?,
                    );
                    continue;
                }
            };
            out.extend(group.iter().copied());
        }
        if out.is_empty() {
            return Err(precondition("empty criterion selection"));
        }
        Ok(Self(out))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub selection: Vec<Criterion>,
    /// Samples per Monte Carlo estimate.
    pub samples: u64,
    pub seed: u64,
    /// Corrupts one transform coefficient before running the identity checks.
    pub inject_fault: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            selection: Criterion::ALL.to_vec(),
            samples: 1_000_000,
            seed: 1,
            inject_fault: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub criterion: Criterion,
    pub number: usize,
    pub pass: bool,
    pub details: Vec<String>,
    /// Set when a computation failed instead of a check.
    pub error: Option<String>,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.criterion
        )?;
        if let Some(e) = &self.error {
            write!(f, ": {e}")?;
        }
        Ok(())
    }
}

/// Collects sub-checks of one criterion.
#[derive(Default)]
struct Checks {
    pass: bool,
    lines: Vec<String>,
}

impl Checks {
    fn new() -> Self {
        Self {
            pass: true,
            lines: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, line: impl Into<String>) {
        self.pass &= ok;
        let tag = if ok { "ok" } else { "FAILED" };
        self.lines.push(format!("{tag}: {}", line.into()));
    }

    fn note(&mut self, line: impl Into<String>) {
        self.lines.push(format!("note: {}", line.into()));
    }
}

pub fn square_well_fixture() -> PairPotential {
    PairPotential::square_well(1.0, 1.5, 1.0, 1).expect("valid fixture")
}

fn cached<T>(
    cell: &'static OnceLock<std::result::Result<T, String>>,
    f: impl FnOnce() -> Result<T>,
) -> Result<&'static T> {
    cell.get_or_init(|| f().map_err(|e| e.to_string()))
        .as_ref()
        .map_err(|e| Error::Numerical(e.clone()))
}

pub fn square_well_ground_states() -> Result<&'static GroundStateTable> {
    static CELL: OnceLock<std::result::Result<GroundStateTable, String>> = OnceLock::new();
    cached(&CELL, || {
        GroundStateTable::oracle_1d(&square_well_fixture(), ORACLE_K, ORACLE_STEP)
    })
}

pub fn two_well_ground_states() -> Result<&'static GroundStateTable> {
    static CELL: OnceLock<std::result::Result<GroundStateTable, String>> = OnceLock::new();
    cached(&CELL, || {
        GroundStateTable::oracle_1d(&two_well(), ORACLE_K, ORACLE_STEP)
    })
}

/// Square-well `b_1..b_5` on `{1, 2, 4, 6, 8, 10}`.
pub fn square_well_mayer() -> Result<&'static MayerTable> {
    static CELL: OnceLock<std::result::Result<MayerTable, String>> = OnceLock::new();
    cached(&CELL, || {
        compute_table(
            &square_well_fixture(),
            &MayerRequest::new(5, SQUARE_GRID.to_vec()),
        )
    })
}

/// two_well `b_1..b_5` on `{6, 8, ..., 20}`.
pub fn two_well_mayer() -> Result<&'static MayerTable> {
    static CELL: OnceLock<std::result::Result<MayerTable, String>> = OnceLock::new();
    cached(&CELL, || {
        compute_table(&two_well(), &MayerRequest::new(5, TWO_WELL_GRID.to_vec()))
    })
}

fn restrict(table: &MayerTable, grid: &[f64]) -> MayerTable {
    MayerTable {
        beta_grid: grid.to_vec(),
        entries: table
            .entries
            .iter()
            .filter(|e| grid.contains(&e.beta))
            .cloned()
            .collect(),
        zcl: table
            .zcl
            .iter()
            .filter(|e| grid.contains(&e.beta))
            .cloned()
            .collect(),
    }
}

/// Runs the selected criteria in order.
pub fn run(opts: &VerifyOptions) -> Vec<CriterionResult> {
    let mut selection = opts.selection.clone();
    selection.sort();
    selection.dedup();
    selection.into_iter().map(|c| run_one(c, opts)).collect()
}

pub fn run_one(criterion: Criterion, opts: &VerifyOptions) -> CriterionResult {
    let outcome = match criterion {
        Criterion::ClosedFormB2 => closed_form_b2(opts),
        Criterion::QuadratureVsMonteCarlo => quadrature_vs_monte_carlo(opts),
        Criterion::LowTemperatureTrend => low_temperature_trend(),
        Criterion::VirialIdentities => virial_identities(opts),
        Criterion::Thermo => thermo(),
        Criterion::Gluing => gluing(),
        Criterion::DiatomicSigns => diatomic_signs(),
        Criterion::GluingSigns => gluing_signs(),
        Criterion::RadiusOrdering => radius_ordering(),
        Criterion::RhoZero => rho_zero(),
        Criterion::Crossover => crossover(),
        Criterion::Determinism => determinism(opts),
    };
    match outcome {
        Ok(c) => CriterionResult {
            criterion,
            number: criterion.number(),
            pass: c.pass,
            details: c.lines,
            error: None,
        },
        Err(e) => CriterionResult {
            criterion,
            number: criterion.number(),
            pass: false,
            details: Vec::new(),
            error: Some(e.to_string()),
        },
    }
}

fn mc_settings(opts: &VerifyOptions) -> MonteCarloSettings {
    MonteCarloSettings {
        samples: opts.samples,
        seed: opts.seed,
        ..Default::default()
    }
}

fn closed_form_b2(opts: &VerifyOptions) -> Result<Checks> {
    let p = square_well_fixture();
    let mut c = Checks::new();
    for beta in [1.0, 2.0, 4.0, 8.0] {
        let exact = -1.0 + 0.5 * (f64::exp(beta) - 1.0);
        let q = b_k_quadrature(&p, 2, beta, &QuadratureSettings::default())?;
        let rel = (q.value - exact).abs() / exact.abs();
        c.check(
            rel <= 1e-10,
            format!(
                "beta={beta}: quadrature {:.12e}, relative error {rel:.2e}",
                q.value
            ),
        );
        let mc = b_k_monte_carlo(&p, 2, beta, &mc_settings(opts))?;
        let z = (mc.value - exact).abs() / mc.error;
        c.check(
            z <= 3.0,
            format!(
                "beta={beta}: Monte Carlo {:.6e} +- {:.1e}, {z:.2} sigma",
                mc.value, mc.error
            ),
        );
    }
    Ok(c)
}

fn quadrature_vs_monte_carlo(opts: &VerifyOptions) -> Result<Checks> {
    let p = square_well_fixture();
    let mut c = Checks::new();
    let mut agree = 0;
    let mut total = 0;
    for k in [3, 4] {
        for beta in [1.0, 2.0, 4.0, 8.0] {
            let q = b_k_quadrature(&p, k, beta, &QuadratureSettings::default())?;
            let mc = b_k_monte_carlo(&p, k, beta, &mc_settings(opts))?;
            let combined = (q.error.powi(2) + mc.error.powi(2)).sqrt();
            let z = (q.value - mc.value).abs() / combined;
            total += 1;
            if z <= 3.0 {
                agree += 1;
            }
            c.note(format!(
                "k={k} beta={beta}: quadrature {:.6e}, Monte Carlo {:.6e} +- {:.1e}, {z:.2} sigma",
                q.value, mc.value, mc.error
            ));
        }
    }
    let frac = agree as f64 / total as f64;
    c.check(
        frac >= 0.95,
        format!("{agree}/{total} grid points within 3 combined errors"),
    );
    Ok(c)
}

fn low_temperature_trend() -> Result<Checks> {
    let table = restrict(square_well_mayer()?, &[4.0, 6.0, 8.0, 10.0]);
    let gs = square_well_ground_states()?;
    let rows = maylt_diagnostic(&table, gs)?;
    let mut c = Checks::new();
    for row in rows.iter().filter(|r| r.k <= 3) {
        let k = row.k;
        c.check(
            row.positive_from == Some(4.0),
            format!("k={k}: b_k > 0 for beta >= 4"),
        );
        let slopes: Vec<String> = row
            .slopes
            .iter()
            .map(|s| format!("{:.4}", s.slope))
            .collect();
        c.check(
            row.slopes_approach_target,
            format!(
                "k={k}: slopes [{}] approach {} monotonically",
                slopes.join(", "),
                row.target
            ),
        );
        let err = row.final_slope_rel_error.unwrap_or(f64::INFINITY);
        c.check(
            err <= 0.05,
            format!("k={k}: final slope relative error {err:.4}"),
        );
        let res: Vec<String> = row
            .residuals
            .iter()
            .map(|r| format!("{:.3e}", r.1))
            .collect();
        c.check(
            row.residual_decreasing == Some(true),
            format!("k={k}: |b_k - Z_k| / Z_k = [{}] decreasing", res.join(", ")),
        );
    }
    Ok(c)
}

fn virial_identities(opts: &VerifyOptions) -> Result<Checks> {
    let mut transform = VirialTransform::new(12)?;
    if opts.inject_fault {
        let a = transform.terms(4)[0].a.clone() + BigRational::one();
        transform = transform.with_coefficient(4, 0, a);
    }
    let mut c = Checks::new();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let mut mayer = vec![1.0];
        mayer.extend((1..8).map(|_| rng.random_range(-2.0..=2.0)));
        let c_series = invert_density_series(&mayer)?;
        for n in 2..=8 {
            let d = transform.d(&mayer, n)?;
            let expected = -((n - 1) as f64) * d;
            let rel =
                (c_series[n - 1] - expected).abs() / c_series[n - 1].abs().max(f64::MIN_POSITIVE);
            worst = worst.max(rel);
        }
    }
    c.check(
        worst <= 1e-9,
        format!("c_n = -(n-1) d_n on 100 random vectors, n <= 8: worst relative error {worst:.2e}"),
    );
    let mut positive = true;
    let mut leading = true;
    let mut matches_formula = true;
    let mut count = 0;
    for n in 2..=12 {
        for t in transform.terms(n) {
            count += 1;
            positive &= t.a.is_positive();
            matches_formula &= t.a == a_coefficient(&t.m);
            if t.m.get(n) == 1 {
                leading &= t.a.is_one();
            }
        }
        let expected = composition_vectors(n)?.len();
        matches_formula &= transform.terms(n).len() == expected;
    }
    c.check(
        positive,
        format!("all {count} coefficients for n <= 12 positive"),
    );
    c.check(leading, "a(m) = 1 for m_n = 1");
    c.check(
        matches_formula,
        "coefficients equal the exact rational formula",
    );
    Ok(c)
}

fn thermo() -> Result<Checks> {
    const TOL: f64 = 1e-12;
    let mut c = Checks::new();
    for (name, table) in [
        ("square_well", square_well_ground_states()?),
        ("two_well", two_well_ground_states()?),
    ] {
        let gs = GroundStateTable::from_energies(1, &table.energies(), TOL)?;
        let t = gs.require_thresholds()?;
        let energies = gs.energies();
        let aux = variational_check(&gs, 200, TOL)?;
        c.check(
            aux.nu_strictly_decreasing && aux.nu_concave,
            format!("{name}: nu(mu) decreasing and concave"),
        );
        c.check(
            aux.mu_flat_below_nu_star && aux.mu_strictly_decreasing_above_nu_star,
            format!("{name}: mu(nu) = e_inf below nu* and decreasing above"),
        );
        c.check(aux.reciprocity, format!("{name}: mu(nu(mu)) = mu"));
        c.check(
            t.trichotomy_holds(),
            format!(
                "{name}: trichotomy (e_inf {}, nu* {}, mu1 {}, nu1 {})",
                t.e_inf, t.nu_star, t.mu_one, t.nu_one
            ),
        );
        let below = t.mu_one - 1.0;
        let m = nu_of_mu(&energies, below, TOL)?;
        c.check(
            classify_region(t, Point::Mu(below), TOL) == Region::Monatomic && m.minimizers == [1],
            format!("{name}: monatomic at mu = {below}"),
        );
        let nu = 0.5 * t.nu_star;
        let r = mu_of_nu(&energies, t, nu, TOL)?;
        c.check(
            classify_region(t, Point::Nu(nu), TOL) == Region::NoFiniteMinimizer
                && r.minimum.is_none(),
            format!("{name}: no finite minimizer at nu = {nu}"),
        );
        if t.polyatomic {
            let mid = 0.5 * (t.mu_one + t.e_inf);
            let m = nu_of_mu(&energies, mid, TOL)?;
            c.check(
                classify_region(t, Point::Mu(mid), TOL) == Region::Polyatomic
                    && m.minimizers.iter().all(|&k| k >= 2),
                format!(
                    "{name}: polyatomic at mu = {mid} with k(mu) = {:?}",
                    m.minimizers
                ),
            );
        }
    }
    Ok(c)
}

/// Three 1-D potentials with `v <= 0` outside a hard core and range below `2 r_hc`.
pub fn attractive_fixtures() -> Vec<(&'static str, PairPotential)> {
    vec![
        ("square_well", square_well_fixture()),
        (
            "ramp_well",
            PairPotential::ramp_well(1.0, 1.5, 1.0, 1.2, 1).expect("valid fixture"),
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
            .expect("valid fixture"),
        ),
    ]
}

fn gluing() -> Result<Checks> {
    let mut c = Checks::new();
    for (name, p) in attractive_fixtures() {
        let gs = GroundStateTable::oracle_1d(&p, ORACLE_K, ORACLE_STEP)?;
        let energies = gs.energies();
        let report = gluing_check(&energies, EXACT_TOL);
        c.check(
            report.holds,
            format!(
                "{name}: gluing holds on {} pairs with m+n+1 <= {ORACLE_K}",
                report.tested
            ),
        );
        let t = gs.require_thresholds()?;
        let gap = (t.mu_one - t.e_inf).abs();
        c.check(gap <= 1e-9, format!("{name}: |mu1 - e_inf| = {gap:.2e}"));
    }
    c.note("finite table: e_inf is estimated from E_1..E_8, and the range is below 2 r_hc so only nearest neighbours interact");
    Ok(c)
}

fn diatomic_signs() -> Result<Checks> {
    let gs = two_well_ground_states()?;
    let t = gs.require_thresholds()?;
    let mut c = Checks::new();
    let verified = t.unique_mu_one_minimizer() == Some(2) && t.polyatomic;
    c.check(
        verified,
        format!(
            "fixture: unique minimizer {:?} of E_k/(k-1), mu1 {} < e_inf {}",
            t.mu_one_minimizers, t.mu_one, t.e_inf
        ),
    );
    if !verified {
        return Ok(c);
    }
    let full = two_well_mayer()?;
    let virial = VirialTable::from_mayer(full, 5)?;
    let top = sign_pattern(&virial, gs, 0.1)?;
    let at_ten = sign_pattern(
        &VirialTable::from_mayer(&restrict(full, &[8.0, 10.0]), 5)?,
        gs,
        0.1,
    )?;
    c.check(top.regime == SignRegime::Diatomic, "regime diatomic");
    for (row_top, row_ten) in top.rows.iter().zip(&at_ten.rows) {
        let n = row_top.n;
        c.check(
            Some(row_top.sign_at_top) == row_top.expected_sign,
            format!(
                "d_{n} sign {} at beta = {}",
                row_top.sign_at_top, top.beta_top
            ),
        );
        let slope = row_ten.slope.unwrap_or(f64::NAN);
        let rel = (slope - row_ten.target).abs() / row_ten.target.abs();
        c.check(
            rel <= 0.1,
            format!(
                "d_{n}: slope of log|d| at beta = 10 is {slope:.4}, target {}, relative {rel:.2e}",
                row_ten.target
            ),
        );
        let half: Vec<f64> = TWO_WELL_GRID[TWO_WELL_GRID.len() / 2..].to_vec();
        let ratios: Vec<f64> = half
            .iter()
            .map(|&b| {
                let d = virial.get(n, b).map_or(f64::NAN, |e| e.d_n);
                let bk = full.get(n, b).map_or(f64::NAN, |e| e.value);
                d.abs() / bk
            })
            .collect();
        let increasing = ratios.iter().all(|r| *r > 0.0) && ratios.windows(2).all(|w| w[1] > w[0]);
        c.check(
            n == 2 || increasing,
            format!("|d_{n}| / b_{n} over beta {half:?}: {}", fmt_list(&ratios)),
        );
    }
    if let Some(v) = &top.diatomic_bound {
        c.check(
            v.holds && v.unexpected_equalities.is_empty(),
            format!(
                "diatomic_bound inequality on {} composition vectors",
                v.checked
            ),
        );
    }
    c.note("|d_2| / b_2 = 1 identically, so the growth check starts at n = 3");
    Ok(c)
}

fn fmt_list(xs: &[f64]) -> String {
    let items: Vec<String> = xs.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", items.join(", "))
}

fn gluing_signs() -> Result<Checks> {
    let gs = square_well_ground_states()?;
    let energies = gs.energies();
    let virial = VirialTable::from_mayer(&restrict(square_well_mayer()?, &[8.0, 10.0]), 3)?;
    let mut c = Checks::new();
    for n in [2, 3] {
        let d = virial
            .get(n, 10.0)
            .ok_or_else(|| precondition("missing d_n"))?
            .d_n;
        let scaled = d.abs().ln() / 10.0;
        let bound = -energies[n - 1] + 0.1;
        c.check(
            scaled <= bound,
            format!(
                "n={n}: beta^-1 log|d_n| = {scaled:.4} <= {bound:.4} at beta = 10 (d_n = {d:.4e})"
            ),
        );
    }
    let composition_bound = composition_bound_check(&energies, 8, 0.0)?;
    c.check(
        composition_bound.holds,
        format!(
            "E_n <= sum m_j E_j on {} composition vectors, {} equalities",
            composition_bound.checked, composition_bound.equalities
        ),
    );
    c.note("log|d_n| is used because d_3 < 0 on this fixture");
    Ok(c)
}

fn radius_ordering() -> Result<Checks> {
    let p = square_well_fixture();
    let e_inf = square_well_ground_states()?.require_thresholds()?.e_inf;
    let table = square_well_mayer()?;
    let mut c = Checks::new();
    for beta in [2.0, 4.0, 8.0] {
        let (mayer, _) = table.column(beta)?;
        let r = radius_bounds(&mayer, p.v_norm(), e_inf, beta)?;
        c.check(
            r.lower <= r.ratio_estimate,
            format!(
                "beta={beta}: lower bound {:.4e} <= {} estimate {:.4e}",
                r.lower, r.estimator, r.ratio_estimate
            ),
        );
        c.check(
            r.ratio_estimate <= 1.5 * r.penrose_min,
            format!(
                "beta={beta}: {:.4e} <= 1.5 x Penrose minimum {:.4e}",
                r.ratio_estimate, r.penrose_min
            ),
        );
    }
    let lower = mayer_radius_lower_bound(p.v_norm(), -1.0, 1.0)?;
    let expected = 1.0 / (3.0 * std::f64::consts::E.powi(2));
    c.check(
        (lower - expected).abs() <= 1e-12,
        format!("lower bound at beta = 1 is {lower:.15}, 1/(3e^2) = {expected:.15}"),
    );
    c.note("Penrose estimate applied to infinite-volume coefficients (heuristic transplant)");
    Ok(c)
}

fn rho_zero() -> Result<Checks> {
    let table = two_well_mayer()?;
    let mut c = Checks::new();
    let mut deviations = Vec::new();
    for beta in [6.0, 8.0, 10.0] {
        let (mayer, _) = table.column(beta)?;
        let root = find_drho_dz_root(&mayer)?;
        c.check(
            root.rho_at_root != 0.0,
            format!(
                "beta={beta}: z0 = {:.6e}, rho(z0) = {:.4e}",
                root.z0, root.rho_at_root
            ),
        );
        deviations.push(root.deviation);
    }
    c.check(
        deviations.windows(2).all(|w| w[1] < w[0]),
        format!("|4 b_2 z0 + 1| = {} decreasing", fmt_list(&deviations)),
    );
    Ok(c)
}

fn crossover() -> Result<Checks> {
    let mut c = Checks::new();
    let beta = 10.0;

    let sq = square_well_fixture();
    let sq_gs = square_well_ground_states()?;
    let e_inf = sq_gs.require_thresholds()?.e_inf;
    let nu = nu_of_mu(&sq_gs.energies(), -2.0, EXACT_TOL)?.value;
    let (mayer, _) = square_well_mayer()?.column(beta)?;
    let eos = eos_from_series(&mayer, &sq, e_inf, beta, -2.0, mayer.len(), true)?;
    let scaled = eos.rho.ln() / beta;
    let rel = (scaled + nu).abs() / nu.abs();
    c.check(
        rel <= 0.05 && eos.certified,
        format!(
            "square_well mu=-2: beta^-1 log rho = {scaled:.6}, target {}, relative {rel:.2e}, remainder {:.2e}",
            -nu,
            eos.remainder.unwrap_or(f64::NAN)
        ),
    );

    let tw = two_well();
    let tw_gs = two_well_ground_states()?;
    let t = tw_gs.require_thresholds()?;
    let mu = -3.0;
    let region = classify_region(t, Point::Mu(mu), EXACT_TOL);
    let k_mu = nu_of_mu(&tw_gs.energies(), mu, EXACT_TOL)?;
    c.check(
        region == Region::Polyatomic && k_mu.unique() == Some(2),
        format!(
            "two_well mu={mu} in ({}, {}), k(mu) = {:?}",
            t.mu_one, t.e_inf, k_mu.minimizers
        ),
    );
    let (mayer, _) = two_well_mayer()?.column(beta)?;
    let eos = eos_from_series(&mayer, &tw, t.e_inf, beta, mu, mayer.len(), true)?;
    let ratio = 2.0 * eos.pressure / eos.rho;
    c.check(
        (ratio - 1.0).abs() <= 0.05,
        format!(
            "two_well: k(mu) beta p / rho = {ratio:.6} at beta = 10 (certified, z = {:.3e})",
            eos.z
        ),
    );
    Ok(c)
}

fn determinism(opts: &VerifyOptions) -> Result<Checks> {
    let p = square_well_fixture();
    let settings = MonteCarloSettings {
        samples: opts.samples.min(200_000),
        seed: opts.seed,
        ..Default::default()
    };
    let in_pool = |threads: usize| -> Result<(u64, u64)> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Numerical(e.to_string()))?;
        pool.install(|| {
            let e = b_k_monte_carlo(&p, 3, 2.0, &settings)?;
            Ok((e.value.to_bits(), e.error.to_bits()))
        })
    };
    let mut c = Checks::new();
    let first = in_pool(2)?;
    c.check(
        first == in_pool(2)?,
        "Monte Carlo rerun with the same seed and thread count is bit-identical",
    );
    c.check(
        first == in_pool(1)? && first == in_pool(4)?,
        "Monte Carlo result independent of thread count",
    );

    let mut req = MayerRequest::new(3, vec![1.0, 2.0]);
    req.method = MethodChoice::Both;
    req.monte_carlo = settings;
    let csv = || -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        compute_table(&p, &req)?.write_csv(&mut buf)?;
        Ok(buf)
    };
    let a = csv()?;
    c.check(a == csv()?, "Mayer table CSV rerun is byte-identical");
    let mc_rows = String::from_utf8_lossy(&a)
        .matches(&MayerMethod::MonteCarlo.to_string())
        .count();
    c.note(format!("{mc_rows} Monte Carlo rows compared"));
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selection_parsing() {
        let s: Selection = "1, thermo,rho_zero".parse().unwrap();
        assert_eq!(
            s.0.into_iter().collect::<Vec<_>>(),
            vec![
                Criterion::ClosedFormB2,
                Criterion::Thermo,
                Criterion::RhoZero
            ]
        );
        assert_eq!("all".parse::<Selection>().unwrap(), Selection::default());
        assert!("13".parse::<Selection>().is_err());
        assert!("0".parse::<Selection>().is_err());
        assert!("bogus".parse::<Selection>().is_err());
        assert!("".parse::<Selection>().is_err());
    }

    #[test]
    fn numbering() {
        for (i, c) in Criterion::ALL.iter().enumerate() {
            assert_eq!(c.number(), i + 1);
        }
    }

    #[test]
    fn fault_injection_breaks_identities() {
        let opts = VerifyOptions {
            inject_fault: true,
            ..Default::default()
        };
        assert!(!run_one(Criterion::VirialIdentities, &opts).pass);
        assert!(run_one(Criterion::VirialIdentities, &VerifyOptions::default()).pass);
    }

    #[test]
    fn thermo_passes() {
        let r = run_one(Criterion::Thermo, &VerifyOptions::default());
        assert!(r.pass, "{:#?}", r);
    }
}
