//! Subcommands behind the `grushin` binary.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::calculus::{hormander_check, ScalarSymbol};
use crate::config::{ProbeConfig, ProbeKind, RunConfig};
use crate::error::{Error, Result};
use crate::gfunc::{g_isometry_constant, g_k_eval, g_norm_equivalence_report, GFunctionSpec};
use crate::grid::{GridFunction, GridSpec};
use crate::io::{load_grid_function, save_grid_function, to_json, write_atomic, write_report};
use crate::lab::{
    fefferman_stein_probe, lp_norm_abs, make_test_function, operator_norm_probe, r_bound_probe, random_slice,
    trial_rng, GridInfo,
};
use crate::transform::{forward_transform, inverse_transform};
use crate::verify::run_selftest;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_INVARIANT: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "grushin", version, about = "Spectral multipliers, Riesz transforms and norm probes for the Grushin operator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Args)]
pub struct CommonArgs {
    /// TOML run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fourier–Hermite coefficients of the input.
    Transform(CommonArgs),
    /// Applies the operator pipeline (or g-function) to the input.
    Apply(CommonArgs),
    /// Runs the configured norm, R-bound, maximal, Hörmander or equivalence probe.
    Probe(CommonArgs),
    /// Runs the invariant suites.
    Selftest(CommonArgs),
}

/// Process exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. } | Error::Input(_) | Error::Capability(_) | Error::UnsupportedExponent(_) => EXIT_CONFIG,
        _ => EXIT_DATA,
    }
}

fn output_dir(args: &CommonArgs, cfg: &RunConfig) -> PathBuf {
    args.output
        .clone()
        .or_else(|| cfg.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("grushin-out"))
}

fn stem(cfg: &RunConfig, default: &str) -> String {
    cfg.output.stem.clone().unwrap_or_else(|| default.to_string())
}

fn load_config(path: &Path) -> Result<RunConfig> {
    RunConfig::load(path).map_err(|e| match e {
        Error::Io { path, source } => Error::config("--config", format!("{}: {source}", path.display())),
        other => other,
    })
}

fn input_function(cfg: &RunConfig) -> Result<GridFunction> {
    match &cfg.input.path {
        Some(p) => {
            let f = load_grid_function(p)?;
            if *f.spec() != cfg.grid {
                return Err(Error::data(format!(
                    "{} holds grid {:?}, config declares {:?}",
                    p.display(),
                    f.spec(),
                    cfg.grid
                )));
            }
            Ok(f)
        }
        None => make_test_function(cfg.grid, &cfg.test_function),
    }
}

#[derive(Serialize)]
struct SliceSummary {
    m: i64,
    lambda: f64,
    energy: f64,
    coefficients: Vec<[f64; 2]>,
}

#[derive(Serialize)]
struct TransformReport {
    grid: GridInfo,
    #[serde(rename = "K")]
    k: usize,
    energy: f64,
    zero_mode_energy: f64,
    truncation_indicator: f64,
    slices: Vec<SliceSummary>,
    version: String,
}

fn run_transform(cfg: &RunConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    let f = input_function(cfg)?;
    let c = forward_transform(&f, cfg.k)?;
    let t = cfg.grid.t_extent;
    let slices: Vec<SliceSummary> = c
        .slices()
        .iter()
        .map(|(&m, s)| SliceSummary {
            m,
            lambda: s.lambda(),
            energy: s.norm_sqr() / t,
            coefficients: s.coeffs().iter().map(|v| [v.re, v.im]).collect(),
        })
        .collect();
    let mut csv = String::from("m,lambda,energy\n");
    for s in &slices {
        csv.push_str(&format!("{},{:.17e},{:.17e}\n", s.m, s.lambda, s.energy));
    }
    let report = TransformReport {
        grid: cfg.grid.into(),
        k: cfg.k,
        energy: c.energy(),
        zero_mode_energy: c.zero_mode_energy(),
        truncation_indicator: c.truncation_indicator(),
        slices,
        version: env!("CARGO_PKG_VERSION").into(),
    };
    let name = stem(cfg, "transform");
    let json = dir.join(format!("{name}.json"));
    let csv_path = dir.join(format!("{name}.csv"));
    let json_text = to_json(&report)?;
    create_dir(dir)?;
    write_atomic(&json, json_text.as_bytes())?;
    write_atomic(&csv_path, csv.as_bytes())?;
    Ok(vec![json, csv_path])
}

#[derive(Serialize)]
struct ApplyReport {
    operator: String,
    grid: GridInfo,
    #[serde(rename = "K")]
    k: usize,
    input_truncation_indicator: f64,
    zero_mode_energy: f64,
    input_norm: f64,
    output_norm: f64,
    output: String,
    version: String,
}

#[derive(Serialize)]
struct GSliceRatio {
    m: i64,
    lambda: f64,
    ratio: f64,
}

#[derive(Serialize)]
struct GFunctionReport {
    k: usize,
    grid: GridInfo,
    #[serde(rename = "K")]
    max_degree: usize,
    /// ‖g_k f_m‖₂ / ‖f_m‖₂ per frequency slice; the exact value is `expected`.
    slices: Vec<GSliceRatio>,
    expected: f64,
    version: String,
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn run_apply(cfg: &RunConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    let f = input_function(cfg)?;
    let c = forward_transform(&f, cfg.k)?;
    let name = stem(cfg, "apply");
    if let Some(g) = cfg.gfunc {
        if !cfg.operator.is_empty() {
            return Err(Error::config("gfunc", "give either an operator pipeline or a g-function"));
        }
        let sp = cfg.grid.spatial();
        let cell = sp.cell_volume();
        let axis = sp.axis_points();
        let mut slices = Vec::new();
        let mut csv = String::from("m,x_index,value\n");
        for (&m, s) in c.slices() {
            let vals = g_k_eval(&GFunctionSpec::for_slice(g.k, s)?, s, &sp)?;
            let den = lp_norm_abs(s.synthesize_tensor(&axis).iter().map(|v| v.norm()), cell, 2.0)?;
            if den > 1e-14 {
                slices.push(GSliceRatio {
                    m,
                    lambda: s.lambda(),
                    ratio: lp_norm_abs(vals.iter().copied(), cell, 2.0)? / den,
                });
                for (i, v) in vals.iter().enumerate() {
                    csv.push_str(&format!("{m},{i},{v:.17e}\n"));
                }
            }
        }
        let report = GFunctionReport {
            k: g.k,
            grid: cfg.grid.into(),
            max_degree: cfg.k,
            slices,
            expected: g_isometry_constant(g.k).sqrt(),
            version: env!("CARGO_PKG_VERSION").into(),
        };
        let json_text = to_json(&report)?;
        create_dir(dir)?;
        let json = dir.join(format!("{name}.json"));
        let csv_path = dir.join(format!("{name}.csv"));
        write_atomic(&json, json_text.as_bytes())?;
        write_atomic(&csv_path, csv.as_bytes())?;
        return Ok(vec![json, csv_path]);
    }
    if cfg.operator.is_empty() {
        return Err(Error::config("operator", "apply needs an operator pipeline or a g-function"));
    }
    let op = cfg.pipeline()?;
    let out = inverse_transform(&op.apply(&c)?);
    let grid_path = dir.join(format!("{name}.grid"));
    let report = ApplyReport {
        operator: op.to_string(),
        grid: cfg.grid.into(),
        k: cfg.k,
        input_truncation_indicator: c.truncation_indicator(),
        zero_mode_energy: c.zero_mode_energy(),
        input_norm: f.norm_sqr().sqrt(),
        output_norm: out.norm_sqr().sqrt(),
        output: format!("{name}.grid"),
        version: env!("CARGO_PKG_VERSION").into(),
    };
    let json_text = to_json(&report)?;
    create_dir(dir)?;
    save_grid_function(&out, &grid_path)?;
    let json = dir.join(format!("{name}.json"));
    write_atomic(&json, json_text.as_bytes())?;
    Ok(vec![grid_path, json])
}

#[derive(Serialize)]
struct HormanderOut {
    #[serde(flatten)]
    report: crate::calculus::HormanderReport,
    version: String,
}

fn run_probe(cfg: &RunConfig, probe: &ProbeConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    let tf = crate::lab::TestFunctionSpec {
        seed: probe.seed,
        ..cfg.test_function
    };
    let name = |kind: &str| stem(cfg, &format!("probe-{kind}"));
    let spatial = cfg.grid.spatial();
    match probe.kind {
        ProbeKind::Norm => {
            let rep = operator_norm_probe(&cfg.pipeline()?, cfg.grid, cfg.k, probe.p, probe.trials, &tf)?;
            Ok(vec![write_report(&rep, &rep.ratios, dir, &name("norm"))?])
        }
        ProbeKind::Rbound => {
            let rep = r_bound_probe(&cfg.pipeline()?, &probe.lambda_set(), spatial, probe.p, probe.trials, &tf)?;
            Ok(vec![write_report(&rep, &rep.ratios, dir, &name("rbound"))?])
        }
        ProbeKind::Maximal => {
            let rep = fefferman_stein_probe(&probe.lambda_set(), spatial, probe.p, probe.trials, &tf)?;
            Ok(vec![write_report(&rep, &rep.ratios, dir, &name("maximal"))?])
        }
        ProbeKind::Hormander => {
            let symbol = ScalarSymbol::parse(probe.symbol.as_deref().unwrap_or("one"))?;
            let order = probe.order.unwrap_or(2);
            let [lo, hi] = probe.mu_range;
            let rep = hormander_check(&symbol, order, (lo, hi), probe.samples)?;
            let sup = rep.sup.clone();
            let out = HormanderOut {
                report: rep,
                version: env!("CARGO_PKG_VERSION").into(),
            };
            Ok(vec![write_report(&out, &sup, dir, &name("hormander"))?])
        }
        ProbeKind::Equivalence => {
            let lambdas = probe.lambda_set();
            let mut family = Vec::new();
            for trial in 0..probe.trials as u64 {
                let base = random_slice(spatial.n, 1.0, &tf, &mut trial_rng(tf.seed, trial))?;
                for &lam in &lambdas {
                    family.push(base.with_lambda(lam)?);
                }
            }
            let rep = g_norm_equivalence_report(&family, &spatial, probe.p)?;
            let ratios: Vec<f64> = rep.per_lambda.iter().map(|c| c.c2).collect();
            Ok(vec![write_report(&rep, &ratios, dir, &name("equivalence"))?])
        }
    }
}

fn run_selftest_cmd(cfg: &RunConfig, dir: Option<&Path>) -> Result<bool> {
    let rep = run_selftest(cfg.selftest.scale, &cfg.selftest.suites, |s| println!("{}", s.line()));
    println!("{} selftest ({} suites)", if rep.passed { "PASS" } else { "FAIL" }, rep.suites.len());
    if let Some(dir) = dir {
        create_dir(dir)?;
        write_atomic(&dir.join(format!("{}.json", stem(cfg, "selftest"))), to_json(&rep)?.as_bytes())?;
    }
    Ok(rep.passed)
}

fn grid_check(grid: &GridSpec, k: usize) -> Result<()> {
    if !grid.resolves(k) {
        return Err(Error::config(
            "K",
            format!("grid half-width {} cannot hold degree {k} at the lowest frequency", grid.x_extent),
        ));
    }
    Ok(())
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = (|| -> Result<i32> {
        match &cli.command {
            Command::Transform(a) => {
                let cfg = load_config(&a.config)?;
                grid_check(&cfg.grid, cfg.k)?;
                for p in run_transform(&cfg, &output_dir(a, &cfg))? {
                    println!("wrote {}", p.display());
                }
            }
            Command::Apply(a) => {
                let cfg = load_config(&a.config)?;
                grid_check(&cfg.grid, cfg.k)?;
                for p in run_apply(&cfg, &output_dir(a, &cfg))? {
                    println!("wrote {}", p.display());
                }
            }
            Command::Probe(a) => {
                let cfg = load_config(&a.config)?;
                let probe = cfg.probe.clone().ok_or_else(|| Error::config("probe", "missing [probe] table"))?;
                for p in run_probe(&cfg, &probe, &output_dir(a, &cfg))? {
                    println!("wrote {}", p.display());
                }
            }
            Command::Selftest(a) => {
                let cfg = load_config(&a.config)?;
                let dir = a.output.clone().or_else(|| cfg.output.dir.clone());
                if !run_selftest_cmd(&cfg, dir.as_deref())? {
                    return Ok(EXIT_INVARIANT);
                }
            }
        }
        Ok(EXIT_OK)
    })();
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("grushin: {e}");
            exit_code(&e)
        }
    }
}
