use std::path::{Path, PathBuf};

use levy_dividend::dividend::{barrier_sweep, hjb_verify, DividendSolution, ExpSum, HjbReport, SweepTable};
use levy_dividend::mc::{self, SimConfig, SimEstimate};
use levy_dividend::model::{LevyModel, ModelConfig};
use levy_dividend::roots::lundberg_r;
use levy_dividend::ruin::{ruin_probability, ExpMixture};
use levy_dividend::Error;
use serde::Serialize;
use serde_json::json;

use crate::error::CliError;
use crate::manifest::RunManifest;
use crate::output::{emit_csv, emit_json};
use crate::{Cli, Format, OnOff, RuinArgs, SimulateArgs, SweepArgs, VerifyArgs};

struct Loaded {
    path: PathBuf,
    bytes: Vec<u8>,
    model: LevyModel,
}

fn load_model(cli: &Cli) -> Result<Loaded, CliError> {
    let path = cli.model.clone().ok_or_else(|| CliError::Config("--model <file> is required".into()))?;
    let bytes = std::fs::read(&path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|e| CliError::Config(format!("{}: not valid UTF-8: {e}", path.display())))?;
    let model = LevyModel::from_json_str(text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Ok(Loaded { path, bytes, model })
}

fn require_delta(cli: &Cli) -> Result<f64, CliError> {
    match cli.delta {
        Some(d) if d.is_finite() && d > 0.0 => Ok(d),
        Some(d) => Err(CliError::Config(format!("--delta must be > 0, got {d}"))),
        None => Err(CliError::Config("--delta is required".into())),
    }
}

fn json_only(cli: &Cli, command: &str) -> Result<(), CliError> {
    match cli.format {
        Some(Format::Csv) => Err(CliError::Config(format!("{command} only supports --format json"))),
        _ => Ok(()),
    }
}

fn manifest(cli: &Cli, command: &str, format: Format, loaded: &Loaded, parameters: serde_json::Value) -> RunManifest {
    let mut params = json!({ "delta": cli.delta, "format": format });
    if let (Some(base), serde_json::Value::Object(extra)) = (params.as_object_mut(), parameters) {
        base.extend(extra);
    }
    RunManifest::new(command, &loaded.path, &loaded.bytes, params)
}

fn out(cli: &Cli) -> Option<&Path> {
    cli.out.as_deref()
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Shortest round-trip form; scientific notation only for extreme magnitudes.
fn fmt(v: f64) -> String {
    format!("{v:?}")
}

#[derive(Serialize)]
struct SolveOutput<'a> {
    delta: f64,
    rho: f64,
    #[serde(rename = "R")]
    lundberg_r: Option<f64>,
    mean: f64,
    tilted_model: ModelConfig,
    psi_tilde: &'a ExpMixture,
    h: &'a ExpSum,
    b_star: f64,
    warnings: Vec<String>,
}

pub fn solve(cli: &Cli) -> Result<(), CliError> {
    json_only(cli, "solve")?;
    let loaded = load_model(cli)?;
    let delta = require_delta(cli)?;
    let model = &loaded.model;
    let mean = model.mean();
    if mean <= 0.0 {
        return Err(Error::NetProfit { mean }.into());
    }
    let sol = DividendSolution::new(model, delta)?;
    let mut warnings = Vec::new();
    let r = match lundberg_r(model) {
        Ok(r) => Some(r),
        Err(Error::CramerFails) => {
            warnings.push("Cramér condition fails: no Lundberg coefficient".to_string());
            None
        }
        Err(e) => return Err(e.into()),
    };
    if sol.b_star_warning() {
        warnings.push("h' has several local minima on the search grid; b_star is the global minimiser".to_string());
    }
    let result = SolveOutput {
        delta,
        rho: sol.rho(),
        lundberg_r: r,
        mean,
        tilted_model: sol.tilted().to_config(),
        psi_tilde: sol.tilted_ruin(),
        h: sol.h(),
        b_star: sol.b_star(),
        warnings,
    };
    let mut m = manifest(cli, "solve", Format::Json, &loaded, json!({}));
    emit_json(out(cli), &mut m, &result)
}

#[derive(Serialize)]
struct VerifyOutput<'a> {
    b_star: f64,
    two_sided_report: bool,
    report: &'a HjbReport,
}

pub fn verify(cli: &Cli, args: &VerifyArgs) -> Result<(), CliError> {
    let format = cli.format.unwrap_or(Format::Csv);
    let loaded = load_model(cli)?;
    let delta = require_delta(cli)?;
    let sol = DividendSolution::new(&loaded.model, delta)?;
    let b = args.barrier.unwrap_or(sol.b_star());
    if !(b.is_finite() && b >= 0.0) {
        return Err(CliError::Config(format!("--barrier must be >= 0, got {b}")));
    }
    let grid_max = args.grid_max.unwrap_or(3.0 * b.max(1.0));
    if !(grid_max.is_finite() && grid_max > 0.0) || args.grid_points == 0 {
        return Err(CliError::Config("verification grid needs --grid-max > 0 and --grid-points >= 1".into()));
    }
    let n = args.grid_points;
    let grid: Vec<f64> = (1..=n).map(|i| grid_max * i as f64 / n as f64).collect();
    let report = hjb_verify(&sol, b, &grid)?;

    let mut m = manifest(cli, "verify-hjb", format, &loaded, serde_json::to_value(args).expect("args serialize"));
    m.parameters["barrier"] = json!(b);
    m.parameters["grid_max"] = json!(grid_max);
    let outcome = if report.two_sided {
        "two_sided_report"
    } else if report.pass {
        "pass"
    } else {
        "fail"
    };
    m.outcome = Some(outcome.to_string());

    match format {
        Format::Json => {
            let result = VerifyOutput { b_star: sol.b_star(), two_sided_report: report.two_sided, report: &report };
            emit_json(out(cli), &mut m, &result)?;
        }
        Format::Csv => emit_csv(out(cli), &mut m, |w| {
            w.write_record(["x", "b", "V", "Vprime", "residual", "violation", "two_sided_report"])?;
            for i in 0..report.grid.len() {
                let bad = report.violations.binary_search(&i).is_ok();
                w.write_record([
                    fmt(report.grid[i]),
                    fmt(b),
                    fmt(report.value[i]),
                    fmt(report.vprime[i]),
                    fmt(report.residual[i]),
                    bad.to_string(),
                    report.two_sided.to_string(),
                ])?;
            }
            Ok(())
        })?,
    }

    if report.two_sided {
        eprintln!(
            "two_sided_report: max |residual| on (0, b) = {:.3e}, max residual above b = {:.3e}, min V'-1 = {:.3e}",
            report.max_abs_residual_below, report.max_residual_above, report.min_vprime_minus_one
        );
        Ok(())
    } else if report.pass {
        Ok(())
    } else {
        Err(CliError::Verification(format!(
            "{} of {} grid points violate the conditions (b = {b}, b* = {})",
            report.violations.len(),
            report.grid.len(),
            sol.b_star()
        )))
    }
}

#[derive(Serialize)]
struct SweepOutput<'a> {
    b_star: f64,
    #[serde(flatten)]
    table: &'a SweepTable,
}

pub fn sweep(cli: &Cli, args: &SweepArgs) -> Result<(), CliError> {
    let format = cli.format.unwrap_or(Format::Csv);
    let loaded = load_model(cli)?;
    let delta = require_delta(cli)?;
    let sol = DividendSolution::new(&loaded.model, delta)?;
    let b_grid = match &args.b {
        Some(list) => list.clone(),
        None => linspace(args.b_min, args.b_max.unwrap_or(3.0 * sol.b_star()), args.b_points),
    };
    if b_grid.is_empty() || args.x.is_empty() {
        return Err(CliError::Config("barrier and capital grids must be non-empty".into()));
    }
    if b_grid.iter().chain(&args.x).any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(CliError::Config("barrier and capital grids must be finite and >= 0".into()));
    }
    let table = barrier_sweep(&sol, &args.x, &b_grid)?;
    let mut m = manifest(cli, "barrier-sweep", format, &loaded, serde_json::to_value(args).expect("args serialize"));
    m.parameters["b_grid"] = json!(b_grid);

    match format {
        Format::Json => emit_json(out(cli), &mut m, &SweepOutput { b_star: sol.b_star(), table: &table }),
        Format::Csv => emit_csv(out(cli), &mut m, |w| {
            let mut header = vec!["b".to_string()];
            header.extend(table.x_eval.iter().map(|x| format!("V(x={x})")));
            w.write_record(&header)?;
            for (b, row) in table.b_grid.iter().zip(&table.values) {
                w.write_record(std::iter::once(fmt(*b)).chain(row.iter().map(|v| fmt(*v))))?;
            }
            w.write_record(std::iter::once("argmax".to_string()).chain(table.argmax.iter().map(|v| fmt(*v))))
        }),
    }
}

#[derive(Serialize)]
struct RuinOutput<'a> {
    #[serde(rename = "R")]
    lundberg_r: Option<f64>,
    mixture: &'a ExpMixture,
    x: Vec<f64>,
    psi: Vec<f64>,
    exp_rx_psi: Vec<Option<f64>>,
}

pub fn ruin(cli: &Cli, args: &RuinArgs) -> Result<(), CliError> {
    let format = cli.format.unwrap_or(Format::Csv);
    let loaded = load_model(cli)?;
    let mix = ruin_probability(&loaded.model)?;
    let r = match lundberg_r(&loaded.model) {
        Ok(r) => Some(r),
        Err(Error::CramerFails) => None,
        Err(e) => return Err(e.into()),
    };
    let xs = match &args.x {
        Some(list) => list.clone(),
        None => linspace(0.0, args.x_max, args.points),
    };
    if xs.is_empty() || xs.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(CliError::Config("capital grid must be non-empty, finite and >= 0".into()));
    }
    let psi: Vec<f64> = xs.iter().map(|&x| mix.eval(x)).collect();
    let scaled: Vec<Option<f64>> = xs.iter().map(|&x| r.map(|r| mix.scaled_tail(x, r))).collect();
    let mut m = manifest(cli, "ruin", format, &loaded, serde_json::to_value(args).expect("args serialize"));

    match format {
        Format::Json => {
            let result = RuinOutput { lundberg_r: r, mixture: &mix, x: xs, psi, exp_rx_psi: scaled };
            emit_json(out(cli), &mut m, &result)
        }
        Format::Csv => emit_csv(out(cli), &mut m, |w| {
            w.write_record(["x", "psi", "exp_Rx_psi"])?;
            for ((x, p), s) in xs.iter().zip(&psi).zip(&scaled) {
                w.write_record([fmt(*x), fmt(*p), s.map(fmt).unwrap_or_default()])?;
            }
            Ok(())
        }),
    }
}

#[derive(Serialize)]
struct SimulateOutput {
    quantity: &'static str,
    #[serde(flatten)]
    estimate: SimEstimate,
    #[serde(skip_serializing_if = "Option::is_none")]
    transform: Option<SimEstimate>,
    config: SimConfig,
}

pub fn simulate(cli: &Cli, args: &SimulateArgs) -> Result<(), CliError> {
    json_only(cli, "simulate")?;
    let loaded = load_model(cli)?;
    let cfg = SimConfig {
        n_paths: args.paths,
        dt: args.dt,
        t_max: args.tmax,
        seed: cli.seed.unwrap_or(0),
        bridge_correction: args.bridge == OnOff::On,
        workers: args.workers,
    };
    let model = &loaded.model;
    let result = match (args.barrier, args.q) {
        (Some(b), Some(q)) => SimulateOutput {
            quantity: "barrier_ruin_transform",
            estimate: mc::estimate_barrier_ruin_transform(model, args.x0, b, q, &cfg)?,
            transform: None,
            config: cfg.clone(),
        },
        (Some(b), None) => {
            let delta = require_delta(cli)?;
            SimulateOutput {
                quantity: "dividends",
                estimate: mc::simulate_dividends(model, args.x0, b, delta, &cfg)?,
                transform: None,
                config: cfg.clone(),
            }
        }
        (None, q) => {
            let est = mc::estimate_ruin(model, args.x0, q, &cfg)?;
            SimulateOutput {
                quantity: "ruin_probability",
                estimate: est.probability,
                transform: est.transform,
                config: cfg.clone(),
            }
        }
    };
    let mut m = manifest(cli, "simulate", Format::Json, &loaded, serde_json::to_value(args).expect("args serialize"));
    m.seed = Some(cfg.seed);
    emit_json(out(cli), &mut m, &result)
}
