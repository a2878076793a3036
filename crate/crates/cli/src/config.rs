//! Run configuration: an optional TOML file with `[potential]`, `[grid]`,
//! `[sampler]` and `[output]` sections, overridden by command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context};
use cluster_virial::potential::make_builtin;
use cluster_virial::{BuiltinKind, MethodChoice, PairPotential};

use crate::failure::{usage, Failure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Values read from a config file; every field is optional.
#[derive(Debug, Default, Clone)]
pub struct FileConfig {
    pub potential: Option<PotentialSource>,
    pub beta_grid: Option<Vec<f64>>,
    pub mu_grid: Option<Vec<f64>>,
    pub kmax: Option<usize>,
    pub order: Option<usize>,
    pub method: Option<MethodChoice>,
    pub samples: Option<u64>,
    pub seed: Option<u64>,
    pub nodes: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

/// Where a potential comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSource {
    Builtin(BuiltinKind, BTreeMap<String, f64>),
    File(PathBuf),
}

impl PotentialSource {
    pub fn build(&self) -> anyhow::Result<PairPotential> {
        match self {
            Self::Builtin(kind, params) => Ok(make_builtin(*kind, params)?),
            Self::File(path) => load_potential_file(path),
        }
    }
}

impl FromStr for PotentialSource {
    type Err = anyhow::Error;

    /// `kind`, `kind:key=value,...`, or a path to a `.toml` / `.json` file.
    fn from_str(s: &str) -> anyhow::Result<Self> {
        let s = s.trim();
        if s.ends_with(".toml") || s.ends_with(".json") || Path::new(s).is_file() {
            return Ok(Self::File(PathBuf::from(s)));
        }
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let kind: BuiltinKind = kind.parse()?;
        let mut params = BTreeMap::new();
        for pair in rest.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| anyhow!("expected key=value, got `{pair}`"))?;
            let v: f64 = v
                .trim()
                .parse()
                .with_context(|| format!("bad number for `{k}`"))?;
            params.insert(k.trim().to_string(), v);
        }
        Ok(Self::Builtin(kind, params))
    }
}

/// JSON holds a serialized potential; TOML holds `kind` plus parameters,
/// either at top level or under `[potential]`.
fn load_potential_file(path: &Path) -> anyhow::Result<PairPotential> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read potential file {}", path.display()))?;
    if path.extension().is_some_and(|e| e == "json") {
        let raw: PairPotential = serde_json::from_str(&text)
            .with_context(|| format!("bad potential JSON in {}", path.display()))?;
        // re-validate: deserialization bypasses the constructor
        return Ok(PairPotential::new(
            raw.hard_core_radius(),
            raw.pieces().to_vec(),
            raw.dimension(),
        )?);
    }
    let table: toml::Table = text
        .parse()
        .with_context(|| format!("bad TOML in {}", path.display()))?;
    let section = match table.get("potential") {
        Some(toml::Value::Table(t)) => t.clone(),
        _ => table,
    };
    match potential_from_table(&section)? {
        Some(PotentialSource::File(p)) if p == path => {
            bail!("potential file {} refers to itself", path.display())
        }
        Some(src) => src.build(),
        None => bail!("no potential `kind` in {}", path.display()),
    }
}

fn number(v: &toml::Value, key: &str) -> anyhow::Result<f64> {
    match v {
        toml::Value::Float(x) => Ok(*x),
        toml::Value::Integer(i) => Ok(*i as f64),
        _ => bail!("`{key}` must be a number"),
    }
}

fn numbers(v: &toml::Value, key: &str) -> anyhow::Result<Vec<f64>> {
    match v {
        toml::Value::Array(items) => items.iter().map(|x| number(x, key)).collect(),
        toml::Value::String(s) => parse_grid(s),
        _ => bail!("`{key}` must be an array of numbers or a grid string"),
    }
}

fn count(v: &toml::Value, key: &str) -> anyhow::Result<u64> {
    match v {
        toml::Value::Integer(i) if *i >= 0 => Ok(*i as u64),
        _ => bail!("`{key}` must be a non-negative integer"),
    }
}

fn string<'a>(v: &'a toml::Value, key: &str) -> anyhow::Result<&'a str> {
    v.as_str()
        .ok_or_else(|| anyhow!("`{key}` must be a string"))
}

fn potential_from_table(t: &toml::Table) -> anyhow::Result<Option<PotentialSource>> {
    if let Some(f) = t.get("file") {
        return Ok(Some(PotentialSource::File(PathBuf::from(string(
            f, "file",
        )?))));
    }
    let Some(kind) = t.get("kind") else {
        return Ok(None);
    };
    let kind: BuiltinKind = string(kind, "kind")?.parse()?;
    let mut params = BTreeMap::new();
    for (k, v) in t.iter().filter(|(k, _)| k.as_str() != "kind") {
        params.insert(k.clone(), number(v, k)?);
    }
    Ok(Some(PotentialSource::Builtin(kind, params)))
}

fn section<'a>(t: &'a toml::Table, name: &str) -> anyhow::Result<Option<&'a toml::Table>> {
    match t.get(name) {
        None => Ok(None),
        Some(toml::Value::Table(s)) => Ok(Some(s)),
        Some(_) => bail!("`{name}` must be a section"),
    }
}

fn reject_unknown(t: &toml::Table, name: &str, allowed: &[&str]) -> anyhow::Result<()> {
    match t.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => bail!("unknown key `{k}` in [{name}]"),
        None => Ok(()),
    }
}

pub fn parse_method(s: &str) -> anyhow::Result<MethodChoice> {
    Ok(match s {
        "auto" => MethodChoice::Auto,
        "quadrature" => MethodChoice::Quadrature,
        "monte_carlo" | "mc" => MethodChoice::MonteCarlo,
        "both" => MethodChoice::Both,
        other => bail!("unknown method `{other}` (auto, quadrature, monte_carlo, both)"),
    })
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))
            .map_err(usage)?;
        Self::parse(&text)
            .with_context(|| format!("in config {}", path.display()))
            .map_err(usage)
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let t: toml::Table = text.parse()?;
        reject_unknown(&t, "top level", &["potential", "grid", "sampler", "output"])?;
        let mut c = Self::default();
        if let Some(p) = section(&t, "potential")? {
            c.potential = potential_from_table(p)?;
        }
        if let Some(g) = section(&t, "grid")? {
            reject_unknown(g, "grid", &["beta", "mu", "kmax", "order"])?;
            c.beta_grid = g.get("beta").map(|v| numbers(v, "beta")).transpose()?;
            c.mu_grid = g.get("mu").map(|v| numbers(v, "mu")).transpose()?;
            c.kmax = g
                .get("kmax")
                .map(|v| count(v, "kmax").map(|x| x as usize))
                .transpose()?;
            c.order = g
                .get("order")
                .map(|v| count(v, "order").map(|x| x as usize))
                .transpose()?;
        }
        if let Some(s) = section(&t, "sampler")? {
            reject_unknown(s, "sampler", &["method", "samples", "seed", "nodes"])?;
            c.method = s
                .get("method")
                .map(|v| string(v, "method").and_then(parse_method))
                .transpose()?;
            c.samples = s.get("samples").map(|v| count(v, "samples")).transpose()?;
            c.seed = s.get("seed").map(|v| count(v, "seed")).transpose()?;
            c.nodes = s
                .get("nodes")
                .map(|v| count(v, "nodes").map(|x| x as usize))
                .transpose()?;
        }
        if let Some(o) = section(&t, "output")? {
            reject_unknown(o, "output", &["dir", "format"])?;
            c.out = o
                .get("dir")
                .map(|v| string(v, "dir").map(PathBuf::from))
                .transpose()?;
            c.format = o
                .get("format")
                .map(|v| match string(v, "format")? {
                    "csv" => Ok(Format::Csv),
                    "json" => Ok(Format::Json),
                    other => bail!("unknown format `{other}`"),
                })
                .transpose()?;
        }
        Ok(c)
    }
}

/// `1,2,4,8` or `start:stop:step` (inclusive of `stop` up to rounding).
pub fn parse_grid(s: &str) -> anyhow::Result<Vec<f64>> {
    let s = s.trim();
    let grid: Vec<f64> = if s.contains(':') {
        let parts: Vec<f64> = s
            .split(':')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .with_context(|| format!("bad range `{s}`"))?;
        let [start, stop, step] = parts[..] else {
            bail!("range must be start:stop:step, got `{s}`");
        };
        if step.is_nan() || step <= 0.0 || stop < start {
            bail!("range `{s}` needs step > 0 and stop >= start");
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        (0..=n).map(|i| start + i as f64 * step).collect()
    } else {
        s.split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .with_context(|| format!("bad list `{s}`"))?
    };
    if grid.is_empty() {
        bail!("empty grid");
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("1, 2,4").unwrap(), vec![1.0, 2.0, 4.0]);
        assert_eq!(parse_grid("6:10:2").unwrap(), vec![6.0, 8.0, 10.0]);
        assert!(parse_grid("1:0:1").is_err());
        assert!(parse_grid("a").is_err());
    }

    #[test]
    fn potential_strings() {
        let p: PotentialSource = "square_well:r_hc=1,b=1.5,depth=1".parse().unwrap();
        assert_eq!(
            p.build().unwrap(),
            PairPotential::square_well(1.0, 1.5, 1.0, 1).unwrap()
        );
        assert!(matches!(
            "two_well".parse::<PotentialSource>().unwrap(),
            PotentialSource::Builtin(..)
        ));
        assert!("nonsense".parse::<PotentialSource>().is_err());
        assert!("square_well:r_hc".parse::<PotentialSource>().is_err());
        assert!(matches!(
            "pot.toml".parse::<PotentialSource>().unwrap(),
            PotentialSource::File(_)
        ));
    }

    #[test]
    fn config_sections() {
        let c = FileConfig::parse(
            r#"
            [potential]
            kind = "square_well"
            r_hc = 1
            b = 1.5
            depth = 1
            [grid]
            beta = [1, 2, 4.0]
            kmax = 3
            [sampler]
            method = "both"
            seed = 9
            [output]
            dir = "out"
            format = "json"
            "#,
        )
        .unwrap();
        assert_eq!(c.beta_grid, Some(vec![1.0, 2.0, 4.0]));
        assert_eq!(c.kmax, Some(3));
        assert_eq!(c.method, Some(MethodChoice::Both));
        assert_eq!(c.seed, Some(9));
        assert_eq!(c.format, Some(Format::Json));
        assert!(c.potential.unwrap().build().is_ok());
        assert!(FileConfig::parse("[grid]\nbogus = 1").is_err());
        assert!(FileConfig::parse("[extra]\n").is_err());
    }
}
