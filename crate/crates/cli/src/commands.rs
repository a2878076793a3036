use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context as _};
use cluster_virial::groundstate::{GroundStateTable, OptimizerSettings, ORACLE_K_MAX};
use cluster_virial::mayer::{compute_table, maylt_diagnostic};
use cluster_virial::thermo::{
    classify_region, crossover_rows, crossover_scan, mu_of_nu, nu_scan, write_scan_csv, Point,
    ScanRow,
};
use cluster_virial::verify::{run as run_criteria, VerifyOptions};
use cluster_virial::virial::{find_drho_dz_root, radius_bounds, sign_pattern};
use cluster_virial::{
    MayerRequest, MayerTable, MethodChoice, MonteCarloSettings, PairPotential, QuadratureSettings,
    Selection, VirialTable,
};
use serde::Serialize;

use crate::config::{parse_grid, parse_method, FileConfig, Format, PotentialSource};
use crate::failure::{criteria, usage, Context, Failure};
use crate::{Cli, Command, GroundStateMethodArg, ThermoCommand};

/// File values overridden by flags.
struct RunConfig {
    potential: Option<PotentialSource>,
    beta_grid: Option<Vec<f64>>,
    mu_grid: Option<Vec<f64>>,
    kmax: Option<usize>,
    order: Option<usize>,
    method: Option<MethodChoice>,
    samples: Option<u64>,
    seed: Option<u64>,
    nodes: Option<usize>,
    out: PathBuf,
    out_given: bool,
    format: Format,
}

impl RunConfig {
    fn resolve(cli: &Cli) -> Result<Self, Failure> {
        let file = match &cli.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let potential = match &cli.potential {
            Some(s) => Some(s.parse().map_err(usage)?),
            None => file.potential,
        };
        let beta_grid = match &cli.beta_grid {
            Some(s) => Some(parse_grid(s).context("--beta-grid").map_err(usage)?),
            None => file.beta_grid,
        };
        Ok(Self {
            potential,
            beta_grid,
            mu_grid: file.mu_grid,
            kmax: cli.kmax.or(file.kmax),
            order: cli.order.or(file.order),
            method: file.method,
            samples: cli.samples.or(file.samples),
            seed: cli.seed.or(file.seed),
            nodes: file.nodes,
            out_given: cli.out.is_some() || file.out.is_some(),
            out: cli
                .out
                .clone()
                .or(file.out)
                .unwrap_or_else(|| PathBuf::from(".")),
            format: cli.format.or(file.format).unwrap_or(Format::Csv),
        })
    }

    fn potential(&self) -> Result<PairPotential, Failure> {
        self.potential
            .as_ref()
            .ok_or_else(|| {
                usage(anyhow!(
                    "no potential given (--potential or [potential] in the config)"
                ))
            })?
            .build()
            .map_err(usage)
    }

    fn beta_grid(&self) -> Result<Vec<f64>, Failure> {
        self.beta_grid
            .clone()
            .ok_or_else(|| usage(anyhow!("no beta grid given (--beta-grid or [grid] beta)")))
    }

    fn output(&self, name: &str) -> Result<PathBuf, Failure> {
        std::fs::create_dir_all(&self.out)
            .with_context(|| format!("cannot create {}", self.out.display()))
            .map_err(usage)?;
        Ok(self.out.join(name))
    }

    fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf, Failure> {
        let path = self.output(name)?;
        let write = || -> anyhow::Result<()> {
            let mut w = BufWriter::new(File::create(&path)?);
            serde_json::to_writer_pretty(&mut w, value)?;
            writeln!(w)?;
            w.flush()?;
            Ok(())
        };
        write()
            .with_context(|| format!("cannot write {}", path.display()))
            .map_err(usage)?;
        Ok(path)
    }

    fn write_with(
        &self,
        name: &str,
        f: impl FnOnce(&mut BufWriter<File>) -> cluster_virial::Result<()>,
    ) -> Result<PathBuf, Failure> {
        let path = self.output(name)?;
        let file = File::create(&path)
            .with_context(|| format!("cannot write {}", path.display()))
            .map_err(usage)?;
        let mut w = BufWriter::new(file);
        f(&mut w).context_for(format!("writing {}", path.display()))?;
        w.flush().map_err(usage)?;
        Ok(path)
    }
}

pub fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = RunConfig::resolve(&cli)?;
    match cli.command {
        Command::Groundstate {
            method,
            grid_step,
            starts,
        } => groundstate(&cfg, method, grid_step, starts),
        Command::Mayer {
            method,
            ground_states,
        } => mayer(&cfg, method.as_deref(), ground_states.as_deref()),
        Command::Virial {
            mayer,
            ground_states,
            check_consistency,
            tol,
        } => virial(
            &cfg,
            &mayer,
            ground_states.as_deref(),
            check_consistency,
            tol,
        ),
        Command::Verify {
            criteria,
            inject_fault,
        } => verify(&cfg, &criteria, inject_fault),
        Command::Thermo {
            command:
                ThermoCommand::Scan {
                    ground_states,
                    mu_grid,
                    nu_grid,
                    mu,
                },
        } => thermo_scan(
            &cfg,
            ground_states.as_deref(),
            mu_grid.as_deref(),
            nu_grid.as_deref(),
            mu,
        ),
    }
}

fn announce(path: &Path) {
    println!("wrote {}", path.display());
}

fn compute_ground_states(
    cfg: &RunConfig,
    p: &PairPotential,
    method: Option<GroundStateMethodArg>,
    grid_step: f64,
    starts: Option<usize>,
) -> Result<GroundStateTable, Failure> {
    let k_max = cfg.kmax.unwrap_or(ORACLE_K_MAX);
    if k_max == 0 {
        return Err(usage(anyhow!("--kmax must be at least 1")));
    }
    let method = method.unwrap_or(if p.dimension() == 1 {
        GroundStateMethodArg::Oracle
    } else {
        GroundStateMethodArg::Optimizer
    });
    match method {
        GroundStateMethodArg::Oracle => {
            GroundStateTable::oracle_1d(p, k_max, grid_step).context_for("ground-state oracle")
        }
        GroundStateMethodArg::Optimizer => {
            let mut settings = OptimizerSettings::default();
            if let Some(seed) = cfg.seed {
                settings.seed = seed;
            }
            if let Some(s) = starts {
                settings.starts = s;
            }
            GroundStateTable::optimized(p, k_max, &settings).context_for("ground-state optimizer")
        }
    }
}

fn read_ground_states(path: &Path) -> Result<GroundStateTable, Failure> {
    GroundStateTable::read_json(path).context_for(format!("reading {}", path.display()))
}

fn groundstate(
    cfg: &RunConfig,
    method: Option<GroundStateMethodArg>,
    grid_step: f64,
    starts: Option<usize>,
) -> Result<(), Failure> {
    let p = cfg.potential()?;
    let table = compute_ground_states(cfg, &p, method, grid_step, starts)?;
    for e in &table.entries {
        println!("E_{} = {}", e.k, e.energy);
    }
    if let Some(t) = &table.thresholds {
        println!(
            "e_inf = {}, nu* = {}, mu1 = {}, nu1 = {}",
            t.e_inf, t.nu_star, t.mu_one, t.nu_one
        );
    }
    announce(&cfg.write_json("groundstate.json", &table)?);
    if cfg.format == Format::Csv {
        let path = cfg.write_with("groundstate.csv", |w| {
            let mut out = csv::Writer::from_writer(w);
            out.write_record(["k", "energy", "method", "connected"])?;
            for e in &table.entries {
                let method = serde_json::to_value(e.method)?;
                out.write_record([
                    e.k.to_string(),
                    e.energy.to_string(),
                    method.as_str().unwrap_or_default().to_string(),
                    e.connected.to_string(),
                ])?;
            }
            out.flush()?;
            Ok(())
        })?;
        announce(&path);
    }
    Ok(())
}

fn mayer(
    cfg: &RunConfig,
    method: Option<&str>,
    ground_states: Option<&Path>,
) -> Result<(), Failure> {
    let p = cfg.potential()?;
    let mut req = MayerRequest::new(cfg.kmax.unwrap_or(4), cfg.beta_grid()?);
    req.method = match method {
        Some(m) => parse_method(m).map_err(usage)?,
        None => cfg.method.unwrap_or(MethodChoice::Auto),
    };
    if let Some(nodes) = cfg.nodes {
        req.quadrature = QuadratureSettings {
            nodes,
            ..req.quadrature
        };
    }
    let uses_mc = match req.method {
        MethodChoice::MonteCarlo | MethodChoice::Both => req.k_max >= 2,
        MethodChoice::Quadrature => false,
        MethodChoice::Auto => {
            (p.dimension() > 1 && req.k_max >= 3) || req.k_max > req.quadrature.max_k
        }
    };
    if uses_mc {
        let seed = cfg.seed.ok_or_else(|| {
            usage(anyhow!(
                "Monte Carlo selected: a seed is required (--seed or [sampler] seed)"
            ))
        })?;
        req.monte_carlo = MonteCarloSettings {
            seed,
            samples: cfg.samples.unwrap_or(req.monte_carlo.samples),
            ..req.monte_carlo
        };
    }
    let table = compute_table(&p, &req).context_for("Mayer coefficients")?;
    match cfg.format {
        Format::Csv => {
            announce(&cfg.write_with("mayer.csv", |w| table.write_csv(w))?);
            announce(&cfg.write_with("zcl.csv", |w| table.write_zcl_csv(w))?);
        }
        Format::Json => announce(&cfg.write_json("mayer.json", &table)?),
    }
    if let Some(path) = ground_states {
        let gs = read_ground_states(path)?;
        let rows = maylt_diagnostic(&table, &gs).context_for("low-temperature diagnostic")?;
        announce(&cfg.write_json("maylt.json", &rows)?);
    }
    Ok(())
}

fn read_mayer(path: &Path) -> Result<MayerTable, Failure> {
    if path.extension().is_some_and(|e| e == "json") {
        let file = File::open(path)
            .with_context(|| format!("cannot open {}", path.display()))
            .map_err(usage)?;
        serde_json::from_reader(std::io::BufReader::new(file))
            .with_context(|| format!("bad Mayer table {}", path.display()))
            .map_err(usage)
    } else {
        MayerTable::read_csv_file(path).context_for(format!("reading {}", path.display()))
    }
}

/// Per-`beta` report that may fail independently of the others.
#[derive(Serialize)]
struct PerBeta<T> {
    beta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    result: Option<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

impl<T> PerBeta<T> {
    fn new(beta: f64, r: cluster_virial::Result<T>) -> Self {
        match r {
            Ok(v) => Self {
                beta,
                result: Some(v),
                error: None,
            },
            Err(e) => Self {
                beta,
                result: None,
                error: Some(e.to_string()),
            },
        }
    }
}

fn virial(
    cfg: &RunConfig,
    mayer_path: &Path,
    ground_states: Option<&Path>,
    check_consistency: bool,
    tol: f64,
) -> Result<(), Failure> {
    let mayer = read_mayer(mayer_path)?;
    if mayer.is_empty() {
        return Err(usage(anyhow!(
            "Mayer table {} is empty",
            mayer_path.display()
        )));
    }
    let k_max = mayer.max_k();
    let order = cfg.order.unwrap_or(k_max);
    if order > k_max {
        return Err(usage(anyhow!(
            "virial order {order} exceeds the available b_k (K = {k_max})"
        )));
    }
    let table = VirialTable::from_mayer(&mayer, order).context_for("virial coefficients")?;
    match cfg.format {
        Format::Csv => announce(&cfg.write_with("virial.csv", |w| table.write_csv(w))?),
        Format::Json => announce(&cfg.write_json("virial.json", &table)?),
    }

    let roots: Vec<_> = mayer
        .beta_grid
        .iter()
        .map(|&beta| {
            PerBeta::new(
                beta,
                mayer.column(beta).and_then(|(m, _)| find_drho_dz_root(&m)),
            )
        })
        .collect();
    announce(&cfg.write_json("rhozero.json", &roots)?);

    if let Some(path) = ground_states {
        let gs = read_ground_states(path)?;
        let report = sign_pattern(&table, &gs, 0.1).context_for("sign pattern")?;
        announce(&cfg.write_json("sign_pattern.json", &report)?);
        match (&cfg.potential, gs.require_thresholds()) {
            (Some(_), Ok(t)) => {
                let p = cfg.potential()?;
                let bounds: Vec<_> = mayer
                    .beta_grid
                    .iter()
                    .map(|&beta| {
                        PerBeta::new(
                            beta,
                            mayer
                                .column(beta)
                                .and_then(|(m, _)| radius_bounds(&m, p.v_norm(), t.e_inf, beta)),
                        )
                    })
                    .collect();
                announce(&cfg.write_json("radius.json", &bounds)?);
            }
            _ => eprintln!(
                "note: radius bounds need --potential and a table with thresholds (K >= 4)"
            ),
        }
    }

    if check_consistency {
        let bad = table.inconsistencies(tol);
        if !bad.is_empty() {
            let list: Vec<String> = bad
                .iter()
                .map(|e| format!("n={} beta={}", e.n, e.beta))
                .collect();
            return Err(criteria(anyhow!(
                "c_n != -(n-1) d_n beyond relative tolerance {tol} at {}",
                list.join(", ")
            )));
        }
        println!(
            "consistency: c_n = -(n-1) d_n on {} rows",
            table.entries.len()
        );
    }
    Ok(())
}

fn verify(cfg: &RunConfig, selection: &str, inject_fault: bool) -> Result<(), Failure> {
    let selection: Selection = selection.parse().map_err(usage)?;
    let defaults = VerifyOptions::default();
    let opts = VerifyOptions {
        selection: selection.0.into_iter().collect(),
        samples: cfg.samples.unwrap_or(defaults.samples),
        seed: cfg.seed.unwrap_or(defaults.seed),
        inject_fault,
    };
    let results = run_criteria(&opts);
    match cfg.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&results).map_err(usage)?),
        Format::Csv => {
            for r in &results {
                println!("{r}");
                for line in &r.details {
                    println!("      {line}");
                }
            }
        }
    }
    if cfg.out_given {
        announce(&cfg.write_json("verify.json", &results)?);
    }
    let failed: Vec<String> = results
        .iter()
        .filter(|r| !r.pass)
        .map(|r| r.criterion.name().to_string())
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(criteria(anyhow!("failed criteria: {}", failed.join(", "))))
    }
}

fn thermo_scan(
    cfg: &RunConfig,
    ground_states: Option<&Path>,
    mu_grid: Option<&str>,
    nu_grid: Option<&str>,
    mu: Option<f64>,
) -> Result<(), Failure> {
    let gs = match ground_states {
        Some(path) => read_ground_states(path)?,
        None => compute_ground_states(cfg, &cfg.potential()?, None, 0.02, None)?,
    };
    let t = gs.require_thresholds().context_for("thermo scan")?.clone();
    let tol = t.tol;
    let mus = match mu_grid {
        Some(s) => parse_grid(s).context("--mu-grid").map_err(usage)?,
        None => cfg.mu_grid.clone().unwrap_or_else(|| {
            let (lo, hi) = (t.mu_one - 1.0, t.e_inf + 1.0);
            (0..=200)
                .map(|i| lo + (hi - lo) * i as f64 / 200.0)
                .collect()
        }),
    };
    let mut rows = nu_scan(&gs, &mus, tol).context_for("nu(mu) scan")?;
    if let Some(s) = nu_grid {
        let energies = gs.energies();
        for nu in parse_grid(s).context("--nu-grid").map_err(usage)? {
            let m = mu_of_nu(&energies, &t, nu, tol).context_for("mu(nu) scan")?;
            rows.push(ScanRow {
                beta: 0.0,
                mu_or_nu: nu,
                value: m.value,
                // no finite minimizer: the dominant size runs off to infinity
                target: m.minimum.map_or(f64::INFINITY, |m| m.minimizers[0] as f64),
                label: format!("mu_of_nu:{}", classify_region(&t, Point::Nu(nu), tol)),
            });
        }
    }
    if let Some(mu) = mu {
        let p = cfg.potential()?;
        let grid = cfg.beta_grid()?;
        let table = compute_table(
            &p,
            &MayerRequest::new(cfg.kmax.unwrap_or(4).min(5), grid.clone()),
        )
        .context_for("Mayer coefficients")?;
        let columns = grid
            .iter()
            .map(|&b| table.column(b).map(|(m, _)| (b, m)))
            .collect::<cluster_virial::Result<Vec<_>>>()
            .context_for("Mayer columns")?;
        let report = crossover_scan(&columns, &p, &gs, mu, tol).context_for("cross-over scan")?;
        rows.extend(crossover_rows(&report));
        announce(&cfg.write_json("crossover.json", &report)?);
    }
    match cfg.format {
        Format::Csv => announce(&cfg.write_with("thermo_scan.csv", |w| write_scan_csv(&rows, w))?),
        Format::Json => announce(&cfg.write_json("thermo_scan.json", &rows)?),
    }
    Ok(())
}
