//! Radial pair potentials with a hard core and compact support.
//!
//! A [`PairPotential`] is `+inf` on `[0, r_hc)`, piecewise constant or
//! piecewise linear on `[r_hc, b)` and identically zero on `[b, inf)`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used when checking that pieces tile `[r_hc, b)`.
const TILING_TOL: f64 = 1e-12;

/// Shape of the potential on one piece.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Shape {
    Constant {
        value: f64,
    },
    /// Linear ramp from `start` at `r_lo` to `end` at `r_hi`.
    Linear {
        start: f64,
        end: f64,
    },
}

/// One interval `[r_lo, r_hi)` of a piecewise potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub r_lo: f64,
    pub r_hi: f64,
    #[serde(flatten)]
    pub shape: Shape,
}

impl Piece {
    pub fn constant(r_lo: f64, r_hi: f64, value: f64) -> Self {
        Self {
            r_lo,
            r_hi,
            shape: Shape::Constant { value },
        }
    }

    pub fn linear(r_lo: f64, r_hi: f64, start: f64, end: f64) -> Self {
        Self {
            r_lo,
            r_hi,
            shape: Shape::Linear { start, end },
        }
    }

    /// Value at `r`, assumed to lie in the piece.
    #[inline]
    pub fn value_at(&self, r: f64) -> f64 {
        match self.shape {
            Shape::Constant { value } => value,
            Shape::Linear { start, end } => {
                start + (end - start) * (r - self.r_lo) / (self.r_hi - self.r_lo)
            }
        }
    }

    /// Limit of the value as `r -> r_hi` from below.
    pub fn left_limit(&self) -> f64 {
        match self.shape {
            Shape::Constant { value } => value,
            Shape::Linear { end, .. } => end,
        }
    }

    pub fn right_value(&self) -> f64 {
        match self.shape {
            Shape::Constant { value } => value,
            Shape::Linear { start, .. } => start,
        }
    }

    fn min_value(&self) -> f64 {
        match self.shape {
            Shape::Constant { value } => value,
            Shape::Linear { start, end } => start.min(end),
        }
    }
}

/// Volume of the `d`-dimensional ball of radius `r`.
pub fn ball_volume(dimension: usize, r: f64) -> f64 {
    match dimension {
        1 => 2.0 * r,
        2 => PI * r * r,
        3 => 4.0 / 3.0 * PI * r * r * r,
        _ => f64::NAN,
    }
}

/// Radial pair potential `v(r)` with hard core radius `r_hc` and range `b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairPotential {
    hard_core_radius: f64,
    pieces: Vec<Piece>,
    dimension: usize,
}

impl PairPotential {
    /// Builds a potential from its pieces, which must tile `[r_hc, b)` in order.
    pub fn new(hard_core_radius: f64, pieces: Vec<Piece>, dimension: usize) -> Result<Self> {
        if !(1..=3).contains(&dimension) {
            return Err(Error::UnsupportedDimension(dimension));
        }
        if !(hard_core_radius.is_finite() && hard_core_radius >= 0.0) {
            return Err(Error::InvalidPotential(format!(
                "hard core radius {hard_core_radius} must be finite and non-negative"
            )));
        }
        let mut expected_lo = hard_core_radius;
        for (i, piece) in pieces.iter().enumerate() {
            if (piece.r_lo - expected_lo).abs() > TILING_TOL {
                return Err(Error::InvalidPotential(format!(
                    "piece {i} starts at {} but the previous one ends at {expected_lo}",
                    piece.r_lo
                )));
            }
            if !(piece.r_hi > piece.r_lo) || !piece.r_hi.is_finite() {
                return Err(Error::InvalidPotential(format!(
                    "piece {i} has an empty or unbounded interval [{}, {})",
                    piece.r_lo, piece.r_hi
                )));
            }
            let finite = match piece.shape {
                Shape::Constant { value } => value.is_finite(),
                Shape::Linear { start, end } => start.is_finite() && end.is_finite(),
            };
            if !finite {
                return Err(Error::InvalidPotential(format!(
                    "piece {i} has a non-finite value"
                )));
            }
            expected_lo = piece.r_hi;
        }
        let mut pieces = pieces;
        // snap boundaries so lookups never fall in a rounding gap
        for i in 0..pieces.len() {
            pieces[i].r_lo = if i == 0 {
                hard_core_radius
            } else {
                pieces[i - 1].r_hi
            };
        }
        Ok(Self {
            hard_core_radius,
            pieces,
            dimension,
        })
    }

    /// Pure hard core of radius `r_hc`.
    pub fn hard_core(r_hc: f64, dimension: usize) -> Result<Self> {
        Self::new(r_hc, Vec::new(), dimension)
    }

    /// Square well: `-depth` on `[r_hc, b)`.
    pub fn square_well(r_hc: f64, b: f64, depth: f64, dimension: usize) -> Result<Self> {
        check_core_below_range(r_hc, b)?;
        Self::new(r_hc, vec![Piece::constant(r_hc, b, -depth)], dimension)
    }

    /// Continuous well: flat `-depth` on `[r_hc, r_flat)`, then a linear ramp to zero at `b`.
    pub fn ramp_well(r_hc: f64, b: f64, depth: f64, r_flat: f64, dimension: usize) -> Result<Self> {
        check_core_below_range(r_hc, b)?;
        if !(r_flat >= r_hc && r_flat < b) {
            return Err(Error::InvalidPotential(format!(
                "ramp start {r_flat} must lie in [{r_hc}, {b})"
            )));
        }
        let mut pieces = Vec::new();
        if r_flat > r_hc {
            pieces.push(Piece::constant(r_hc, r_flat, -depth));
        }
        pieces.push(Piece::linear(r_flat, b, -depth, 0.0));
        Self::new(r_hc, pieces, dimension)
    }

    pub fn hard_core_radius(&self) -> f64 {
        self.hard_core_radius
    }

    /// Support bound `b`: `v(r) = 0` for `r >= b`.
    pub fn range(&self) -> f64 {
        self.pieces.last().map_or(self.hard_core_radius, |p| p.r_hi)
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Same potential in another dimension.
    pub fn with_dimension(&self, dimension: usize) -> Result<Self> {
        Self::new(self.hard_core_radius, self.pieces.clone(), dimension)
    }

    /// `v(r)`, `+inf` exactly on `[0, r_hc)`.
    pub fn evaluate(&self, r: f64) -> Result<f64> {
        if r < 0.0 || r.is_nan() {
            return Err(Error::NegativeDistance(r));
        }
        Ok(self.value(r))
    }

    /// Unchecked `v(r)` for `r >= 0`.
    #[inline]
    pub fn value(&self, r: f64) -> f64 {
        match self.piece_index(r) {
            PieceLookup::Core => f64::INFINITY,
            PieceLookup::Outside => 0.0,
            PieceLookup::Piece(i) => self.pieces[i].value_at(r),
        }
    }

    #[inline]
    pub(crate) fn piece_index(&self, r: f64) -> PieceLookup {
        if r < self.hard_core_radius {
            return PieceLookup::Core;
        }
        // pieces are few; a linear scan beats binary search here
        for (i, p) in self.pieces.iter().enumerate() {
            if r < p.r_hi {
                return PieceLookup::Piece(i);
            }
        }
        PieceLookup::Outside
    }

    /// Mayer function `exp(-beta v(r)) - 1`, equal to `-1` inside the hard core.
    pub fn mayer_f(&self, r: f64, beta: f64) -> Result<f64> {
        if !(beta > 0.0) {
            return Err(crate::error::precondition(format!(
                "beta must be positive, got {beta}"
            )));
        }
        let v = self.evaluate(r)?;
        Ok(if v.is_infinite() {
            -1.0
        } else {
            (-beta * v).exp_m1()
        })
    }

    /// Smallest finite value of `v` (zero if `v >= 0` outside the core).
    pub fn min_value(&self) -> f64 {
        self.pieces.iter().map(Piece::min_value).fold(0.0, f64::min)
    }

    /// True if `v(r) < 0` on some interval `(b - delta, b)`.
    pub fn has_attractive_tail(&self) -> bool {
        match self.pieces.last().map(|p| p.shape) {
            Some(Shape::Constant { value }) => value < 0.0,
            Some(Shape::Linear { start, end }) => end < 0.0 || (end == 0.0 && start < 0.0),
            None => false,
        }
    }

    /// True if `v` is continuous on `[r_hc, inf)`.
    pub fn is_continuous_outside_core(&self) -> bool {
        let mut prev: Option<f64> = None;
        for p in &self.pieces {
            if let Some(l) = prev {
                if (l - p.right_value()).abs() > TILING_TOL {
                    return false;
                }
            }
            prev = Some(p.left_limit());
        }
        prev.is_none_or(|l| l.abs() <= TILING_TOL)
    }

    pub fn is_piecewise_constant(&self) -> bool {
        self.pieces
            .iter()
            .all(|p| matches!(p.shape, Shape::Constant { .. }))
    }

    /// Sorted radii where `v` changes piece: `r_hc`, interior boundaries and `b`.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut radii = vec![self.hard_core_radius];
        radii.extend(self.pieces.iter().map(|p| p.r_hi));
        radii.dedup_by(|a, b| (*a - *b).abs() <= TILING_TOL);
        radii
    }

    /// `|B(0, r_hc)| + int_{|x| > r_hc} |v(|x|)| dx`, integrated exactly piece by piece.
    pub fn v_norm(&self) -> f64 {
        let d = self.dimension;
        let mut total = ball_volume(d, self.hard_core_radius);
        for p in &self.pieces {
            total += match p.shape {
                Shape::Constant { value } => {
                    value.abs() * (ball_volume(d, p.r_hi) - ball_volume(d, p.r_lo))
                }
                Shape::Linear { start, end } => {
                    let slope = (end - start) / (p.r_hi - p.r_lo);
                    let intercept = start - slope * p.r_lo;
                    // split at a sign change so |v| is linear on each part
                    let mut cuts = vec![p.r_lo];
                    if start * end < 0.0 {
                        cuts.push(-intercept / slope);
                    }
                    cuts.push(p.r_hi);
                    cuts.windows(2)
                        .map(|w| radial_linear_integral(d, intercept, slope, w[0], w[1]).abs())
                        .sum()
                }
            };
        }
        total
    }

    /// Summary flags and norms.
    ///
    /// `e_inf`, when known from a ground-state table, gives the stability
    /// constant estimate `B = -e_inf`.
    pub fn report(&self, e_inf: Option<f64>) -> PotentialReport {
        PotentialReport {
            has_hard_core: self.hard_core_radius > 0.0,
            attractive_tail: self.has_attractive_tail(),
            continuous_on_core_boundary: self.is_continuous_outside_core(),
            v_norm: self.v_norm(),
            stability_constant_estimate: e_inf.map(|e| -e),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum PieceLookup {
    Core,
    Piece(usize),
    Outside,
}

/// `int_lo^hi (a + s r) |S^{d-1}| r^{d-1} dr`.
fn radial_linear_integral(d: usize, a: f64, s: f64, lo: f64, hi: f64) -> f64 {
    let di = d as i32;
    let surface = ball_volume(d, 1.0) * d as f64;
    let antiderivative = |r: f64| a * r.powi(di) / d as f64 + s * r.powi(di + 1) / (d as f64 + 1.0);
    surface * (antiderivative(hi) - antiderivative(lo))
}

fn check_core_below_range(r_hc: f64, b: f64) -> Result<()> {
    if r_hc >= b {
        return Err(Error::InvalidPotential(format!(
            "hard core radius {r_hc} must be below the range {b}"
        )));
    }
    Ok(())
}

/// Flags and norms describing a potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialReport {
    pub has_hard_core: bool,
    pub attractive_tail: bool,
    /// `v` is continuous on `[r_hc, inf)`.
    pub continuous_on_core_boundary: bool,
    pub v_norm: f64,
    /// Heuristic `B = -e_inf`; only available once a ground-state table exists.
    pub stability_constant_estimate: Option<f64>,
}

/// Built-in potential families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuiltinKind {
    SquareWell,
    RampWell,
    TwoWell,
    /// Hard disk with an attractive linear shoulder. Illustrative only.
    SoftDisk,
}

impl FromStr for BuiltinKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "square_well" => Ok(Self::SquareWell),
            "ramp_well" => Ok(Self::RampWell),
            "two_well" => Ok(Self::TwoWell),
            "soft_disk" => Ok(Self::SoftDisk),
            other => Err(Error::InvalidPotential(format!(
                "unknown builtin `{other}`"
            ))),
        }
    }
}

impl fmt::Display for BuiltinKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::SquareWell => "square_well",
            Self::RampWell => "ramp_well",
            Self::TwoWell => "two_well",
            Self::SoftDisk => "soft_disk",
        })
    }
}

/// Default parameters of the one-dimensional diatomic fixture.
pub mod two_well_defaults {
    pub const R_HC: f64 = 0.9;
    pub const DEEP_LO: f64 = 1.0;
    pub const DEEP_HI: f64 = 1.1;
    pub const DEEP_DEPTH: f64 = 4.0;
    pub const BARRIER_HI: f64 = 2.4;
    pub const BARRIER_HEIGHT: f64 = 2.0;
    pub const SHALLOW_HI: f64 = 2.6;
    pub const SHALLOW_DEPTH: f64 = 0.25;
}

struct Params<'a> {
    map: &'a BTreeMap<String, f64>,
}

impl Params<'_> {
    fn required(&self, key: &str) -> Result<f64> {
        self.map
            .get(key)
            .copied()
            .ok_or_else(|| Error::MissingParameter(key.to_owned()))
    }

    fn or(&self, key: &str, default: f64) -> f64 {
        self.map.get(key).copied().unwrap_or(default)
    }

    fn dimension(&self, default: usize) -> Result<usize> {
        match self.map.get("dim") {
            None => Ok(default),
            Some(&d) if d.fract() == 0.0 && (1.0..=3.0).contains(&d) => Ok(d as usize),
            Some(&d) => Err(Error::InvalidPotential(format!("bad dimension {d}"))),
        }
    }

    fn only(&self, allowed: &[&str]) -> Result<()> {
        match self
            .map
            .keys()
            .find(|k| *k != "dim" && !allowed.contains(&k.as_str()))
        {
            Some(k) => Err(Error::UnknownParameter(k.clone())),
            None => Ok(()),
        }
    }
}

/// Builds one of the built-in potentials from a parameter map.
///
/// Every kind accepts `dim` (default 1, `soft_disk` defaults to 2).
///
/// | kind          | parameters                                              |
/// |---------------|---------------------------------------------------------|
/// | `square_well` | `r_hc`, `b`, `depth` (all required)                     |
/// | `ramp_well`   | `r_hc`, `b`, `depth` required; `r_flat` (default `r_hc`)|
/// | `two_well`    | all optional, see [`two_well_defaults`]                 |
/// | `soft_disk`   | `r_hc` = 1, `b` = 1.3, `depth` = 1                      |
pub fn make_builtin(kind: BuiltinKind, params: &BTreeMap<String, f64>) -> Result<PairPotential> {
    let p = Params { map: params };
    match kind {
        BuiltinKind::SquareWell => {
            p.only(&["r_hc", "b", "depth"])?;
            PairPotential::square_well(
                p.required("r_hc")?,
                p.required("b")?,
                p.required("depth")?,
                p.dimension(1)?,
            )
        }
        BuiltinKind::RampWell => {
            p.only(&["r_hc", "b", "depth", "r_flat"])?;
            let r_hc = p.required("r_hc")?;
            PairPotential::ramp_well(
                r_hc,
                p.required("b")?,
                p.required("depth")?,
                p.or("r_flat", r_hc),
                p.dimension(1)?,
            )
        }
        BuiltinKind::TwoWell => {
            use two_well_defaults as dflt;
            p.only(&[
                "r_hc",
                "deep_lo",
                "deep_hi",
                "deep_depth",
                "barrier_hi",
                "barrier_height",
                "b",
                "shallow_depth",
            ])?;
            let r_hc = p.or("r_hc", dflt::R_HC);
            let deep_lo = p.or("deep_lo", dflt::DEEP_LO);
            let deep_hi = p.or("deep_hi", dflt::DEEP_HI);
            let barrier_hi = p.or("barrier_hi", dflt::BARRIER_HI);
            let b = p.or("b", dflt::SHALLOW_HI);
            check_core_below_range(r_hc, b)?;
            if !(r_hc <= deep_lo && deep_lo < deep_hi && deep_hi < barrier_hi && barrier_hi < b) {
                return Err(Error::InvalidPotential(
                    "two_well radii must satisfy r_hc <= deep_lo < deep_hi < barrier_hi < b".into(),
                ));
            }
            let mut pieces = Vec::new();
            if deep_lo > r_hc {
                pieces.push(Piece::constant(r_hc, deep_lo, 0.0));
            }
            pieces.push(Piece::constant(
                deep_lo,
                deep_hi,
                -p.or("deep_depth", dflt::DEEP_DEPTH),
            ));
            pieces.push(Piece::constant(
                deep_hi,
                barrier_hi,
                p.or("barrier_height", dflt::BARRIER_HEIGHT),
            ));
            pieces.push(Piece::constant(
                barrier_hi,
                b,
                -p.or("shallow_depth", dflt::SHALLOW_DEPTH),
            ));
            PairPotential::new(r_hc, pieces, p.dimension(1)?)
        }
        BuiltinKind::SoftDisk => {
            p.only(&["r_hc", "b", "depth"])?;
            let r_hc = p.or("r_hc", 1.0);
            PairPotential::ramp_well(
                r_hc,
                p.or("b", 1.3),
                p.or("depth", 1.0),
                r_hc,
                p.dimension(2)?,
            )
        }
    }
}

/// The diatomic fixture with its default parameters.
pub fn two_well() -> PairPotential {
    make_builtin(BuiltinKind::TwoWell, &BTreeMap::new()).expect("defaults are consistent")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    fn fixture() -> PairPotential {
        PairPotential::square_well(1.0, 1.5, 1.0, 1).unwrap()
    }

    #[test]
    fn square_well_builtin_is_piecewise() {
        let p = make_builtin(
            BuiltinKind::SquareWell,
            &params(&[("r_hc", 1.0), ("b", 1.5), ("depth", 1.0)]),
        )
        .unwrap();
        assert_eq!(p, fixture());
        assert_eq!(p.range(), 1.5);
        assert_eq!(p.pieces().len(), 1);
    }

    #[test]
    fn core_above_range_is_rejected() {
        let err = make_builtin(
            BuiltinKind::SquareWell,
            &params(&[("r_hc", 1.0), ("b", 0.5), ("depth", 1.0)]),
        );
        assert!(matches!(err, Err(Error::InvalidPotential(_))));
    }

    #[test]
    fn missing_and_unknown_parameters() {
        let err = make_builtin(BuiltinKind::SquareWell, &params(&[("r_hc", 1.0)]));
        assert!(matches!(err, Err(Error::MissingParameter(_))));
        let err = make_builtin(
            BuiltinKind::SquareWell,
            &params(&[("r_hc", 1.0), ("b", 2.0), ("depth", 1.0), ("width", 3.0)]),
        );
        assert!(matches!(err, Err(Error::UnknownParameter(_))));
    }

    #[test]
    fn evaluate_square_well() {
        let p = fixture();
        assert_eq!(p.evaluate(0.5).unwrap(), f64::INFINITY);
        assert_eq!(p.evaluate(1.2).unwrap(), -1.0);
        assert_eq!(p.evaluate(2.0).unwrap(), 0.0);
        assert_eq!(p.evaluate(1.0).unwrap(), -1.0);
        assert_eq!(p.evaluate(1.5).unwrap(), 0.0);
        assert!(matches!(p.evaluate(-0.1), Err(Error::NegativeDistance(_))));
    }

    #[test]
    fn mayer_f_values() {
        let p = fixture();
        assert_eq!(p.mayer_f(0.5, 3.0).unwrap(), -1.0);
        let f = p.mayer_f(1.2, 2.0).unwrap();
        assert!((f - 6.389_056_098_930_65).abs() < 1e-12);
        assert_eq!(p.mayer_f(2.0, 5.0).unwrap(), 0.0);
        assert!(p.mayer_f(1.2, 0.0).is_err());
    }

    #[test]
    fn v_norm_one_dimensional() {
        assert!((fixture().v_norm() - 3.0).abs() < 1e-15);
        assert!((PairPotential::hard_core(1.0, 1).unwrap().v_norm() - 2.0).abs() < 1e-15);
        let deep = PairPotential::square_well(1.0, 1.5, 2.0, 1).unwrap();
        assert!((deep.v_norm() - 4.0).abs() < 1e-15);
    }

    #[test]
    fn v_norm_of_ramp_with_sign_change() {
        // v goes from -1 to +1 over [1, 3]: |v| integrates to 1 on each side of r = 2
        let p = PairPotential::new(1.0, vec![Piece::linear(1.0, 3.0, -1.0, 1.0)], 1).unwrap();
        assert!((p.v_norm() - (2.0 + 2.0)).abs() < 1e-14);
        // two dimensions: annulus of a constant piece
        let p = PairPotential::square_well(1.0, 2.0, 1.0, 2).unwrap();
        assert!((p.v_norm() - (PI + 3.0 * PI)).abs() < 1e-12);
    }

    #[test]
    fn ramp_well_is_continuous_square_well_is_not() {
        let ramp = PairPotential::ramp_well(1.0, 1.5, 1.0, 1.2, 1).unwrap();
        assert!(ramp.is_continuous_outside_core());
        assert!(ramp.has_attractive_tail());
        assert!((ramp.value(1.35) + 0.5).abs() < 1e-12);
        assert!(!fixture().is_continuous_outside_core());
    }

    #[test]
    fn two_well_defaults_and_report() {
        let p = two_well();
        assert_eq!(p.value(1.05), -4.0);
        assert_eq!(p.value(1.5), 2.0);
        assert_eq!(p.value(2.5), -0.25);
        assert_eq!(p.value(0.95), 0.0);
        assert_eq!(p.range(), 2.6);
        let report = p.report(Some(-2.125));
        assert!(report.attractive_tail);
        assert!(report.has_hard_core);
        assert!(report.v_norm > ball_volume(1, 0.9));
        assert_eq!(report.stability_constant_estimate, Some(2.125));
    }

    #[test]
    fn pieces_must_tile() {
        let gap = PairPotential::new(
            1.0,
            vec![
                Piece::constant(1.0, 1.2, -1.0),
                Piece::constant(1.3, 1.5, -1.0),
            ],
            1,
        );
        assert!(gap.is_err());
        let start = PairPotential::new(1.0, vec![Piece::constant(0.9, 1.2, -1.0)], 1);
        assert!(start.is_err());
    }

    #[test]
    fn builtin_names_round_trip() {
        for kind in [
            BuiltinKind::SquareWell,
            BuiltinKind::RampWell,
            BuiltinKind::TwoWell,
            BuiltinKind::SoftDisk,
        ] {
            assert_eq!(kind.to_string().parse::<BuiltinKind>().unwrap(), kind);
        }
    }

    #[test]
    fn soft_disk_defaults() {
        let p = make_builtin(BuiltinKind::SoftDisk, &BTreeMap::new()).unwrap();
        assert_eq!(p.dimension(), 2);
        assert!(p.has_attractive_tail());
        assert_eq!(p.value(1.0), -1.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn mayer_f_vanishes_beyond_range(r in 1.5f64..100.0, beta in 0.01f64..50.0) {
                prop_assert_eq!(fixture().mayer_f(r, beta).unwrap(), 0.0);
            }

            #[test]
            fn mayer_f_bounded(r in 0.0f64..3.0, beta in 0.01f64..20.0) {
                let p = two_well();
                let f = p.mayer_f(r, beta).unwrap();
                let upper = (-beta * p.min_value()).exp_m1();
                prop_assert!(f >= -1.0 && f <= upper * (1.0 + 1e-12));
            }

            #[test]
            fn mayer_f_decreasing_in_v(v1 in -5.0f64..5.0, v2 in -5.0f64..5.0, beta in 0.01f64..10.0) {
                let (lo, hi) = if v1 < v2 { (v1, v2) } else { (v2, v1) };
                let p_lo = PairPotential::square_well(1.0, 2.0, -lo, 1).unwrap();
                let p_hi = PairPotential::square_well(1.0, 2.0, -hi, 1).unwrap();
                prop_assert!(p_lo.mayer_f(1.5, beta).unwrap() >= p_hi.mayer_f(1.5, beta).unwrap());
            }

            #[test]
            fn v_norm_invariant_under_refinement(cut in 1.01f64..1.49, dim in 1usize..=3) {
                let p = PairPotential::square_well(1.0, 1.5, 1.0, dim).unwrap();
                let split = PairPotential::new(1.0, vec![
                    Piece::constant(1.0, cut, -1.0),
                    Piece::constant(cut, 1.5, -1.0),
                ], dim).unwrap();
                prop_assert!((p.v_norm() - split.v_norm()).abs() < 1e-12 * p.v_norm());
            }

            #[test]
            fn attractive_tail_is_witnessed(depth in 0.1f64..5.0, b in 1.1f64..3.0) {
                let p = PairPotential::ramp_well(1.0, b, depth, 1.0, 1).unwrap();
                prop_assert!(p.report(None).attractive_tail);
                prop_assert!(p.value(b - 1e-6) < 0.0);
                prop_assert!(p.v_norm() > ball_volume(1, 1.0));
            }
        }
    }
}
