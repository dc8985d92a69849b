//! `spin-ent`: field sweeps, factorizing-field and critical-field detection
//! for the XYZ model in a field, from a TOML run manifest.

mod config;
mod plot;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::{json, Value};
use spin_ent::scan::{field_sweep, locate_critical_dip, locate_factorizing_field};
use spin_ent::{
    factorizing_field, free_fermion_solution, lanczos_ground, CorrelatorSet, Error, LatticeKind,
    Sweep,
};

use config::{Overrides, RunConfig};

/// Environment variable capping the number of worker threads.
const THREADS_VAR: &str = "SPIN_ENT_THREADS";

#[derive(Parser)]
#[command(name = "spin-ent", version, about = "Entanglement estimators for the XYZ model in a field")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ground-state estimators over a field grid; writes rows.csv.
    Sweep(Common),
    /// Locates the factorizing field inside [bracket] and certifies it.
    Factorize(Common),
    /// Locates the entanglement-ratio dip above the factorizing field.
    Critical(Common),
    /// Compares exact diagonalization with the free-fermion solution.
    OracleCheck(Common),
}

#[derive(Args)]
struct Common {
    /// Run manifest (TOML).
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Also write sweep.svg.
    #[arg(long)]
    emit_plots: bool,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Config(String),
    Solver(String),
    Inconclusive(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Solver(_) => 3,
            Failure::Inconclusive(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Solver(m) | Failure::Inconclusive(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NotConverged { .. } | Error::InvalidState(_) | Error::InvalidDensityMatrix(_) => {
                Failure::Solver(e.to_string())
            }
            Error::Detector(_) => Failure::Inconclusive(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(f) = init_threads() {
        eprintln!("error: {}", f.message());
        return ExitCode::from(f.code());
    }
    let result = match &cli.command {
        Command::Sweep(c) => load(c).and_then(|cfg| cmd_sweep(&cfg)),
        Command::Factorize(c) => load(c).and_then(|cfg| cmd_factorize(&cfg)),
        Command::Critical(c) => load(c).and_then(|cfg| cmd_critical(&cfg)),
        Command::OracleCheck(c) => load(c).and_then(|cfg| cmd_oracle_check(&cfg)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn init_threads() -> Outcome {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Config(format!("{THREADS_VAR} must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Config(e.to_string()))
}

fn load(c: &Common) -> Result<RunConfig, Failure> {
    let text = fs::read_to_string(&c.config)
        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", c.config.display())))?;
    let mut cfg = RunConfig::from_toml(&text).map_err(Failure::Config)?;
    cfg.apply(&Overrides {
        tol: c.tol,
        max_iter: c.max_iter,
        seed: c.seed,
        emit_plots: c.emit_plots,
        out: c.out.clone(),
    });
    cfg.validate().map_err(Failure::Config)?;
    Ok(cfg)
}

fn write(dir: &Path, name: &str, contents: &str) -> Outcome {
    fs::create_dir_all(dir)
        .map_err(|e| Failure::Config(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display())))
}

fn write_report(cfg: &RunConfig, command: &str, body: Value) -> Outcome {
    let mut report = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": cfg,
    });
    if let (Value::Object(dst), Value::Object(src)) = (&mut report, body) {
        dst.extend(src);
    }
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    println!("{text}");
    write(&cfg.output.dir, "config.toml", &cfg.to_toml())?;
    write(&cfg.output.dir, "report.json", &(text + "\n"))
}

fn config_err(m: String) -> Failure {
    Failure::Config(m)
}

fn run_sweep(cfg: &RunConfig) -> Result<Sweep, Failure> {
    let lattice = cfg.lattice().map_err(config_err)?;
    let params = cfg.params().map_err(config_err)?;
    let opts = cfg.solver().map_err(config_err)?;
    let grid = cfg.grid().map_err(config_err)?;
    Ok(field_sweep(&params, &lattice, &grid, &opts, cfg.detector.tau1)?)
}

fn closed_form_hf(cfg: &RunConfig) -> Option<f64> {
    (cfg.lattice.kind == LatticeKind::Chain && cfg.model.delta_z == 1.0)
        .then(|| factorizing_field(cfg.model.delta_y).ok())
        .flatten()
}

fn emit_plot(cfg: &RunConfig, sweep: &Sweep, markers: plot::Markers) -> Outcome {
    if !cfg.output.emit_plots {
        return Ok(());
    }
    let title = format!(
        "{} L={}, delta_y={}, delta_z={}",
        cfg.lattice.kind, cfg.lattice.length, cfg.model.delta_y, cfg.model.delta_z
    );
    let svg = plot::sweep_svg(&title, &sweep.rows, cfg.detector.tau1, &markers);
    write(&cfg.output.dir, "sweep.svg", &svg)
}

fn failed_rows(sweep: &Sweep) -> Vec<Value> {
    sweep
        .rows
        .iter()
        .filter(|r| !r.is_valid())
        .map(|r| json!({ "h": r.h, "error": r.error }))
        .collect()
}

fn cmd_sweep(cfg: &RunConfig) -> Outcome {
    let sweep = run_sweep(cfg)?;
    write(&cfg.output.dir, "rows.csv", &sweep.to_csv())?;
    emit_plot(cfg, &sweep, plot::Markers { h_f: closed_form_hf(cfg), h_c: None })?;
    let failed = failed_rows(&sweep);
    let ckw: Vec<f64> = sweep
        .rows
        .iter()
        .filter(|r| r.is_valid() && !r.ckw_ok)
        .map(|r| r.h)
        .collect();
    write_report(
        cfg,
        "sweep",
        json!({
            "meta": sweep.meta,
            "rows": sweep.rows.len(),
            "failed": failed,
            "ckw_violations": ckw,
        }),
    )?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Solver(format!("{} grid points failed", failed.len())))
    }
}

fn cmd_factorize(cfg: &RunConfig) -> Outcome {
    let lattice = cfg.lattice().map_err(config_err)?;
    let params = cfg.params().map_err(config_err)?;
    let opts = cfg.solver().map_err(config_err)?;
    let bracket = cfg.bracket().map_err(config_err)?;
    let body = match locate_factorizing_field(&params, &lattice, bracket, &opts) {
        Ok(r) => serde_json::to_value(&r).expect("report serializes"),
        Err(Error::Detector(reason)) => json!({ "certified": false, "reason": reason }),
        Err(e) => return Err(e.into()),
    };
    let certified = body["certified"].as_bool() == Some(true);
    let mut body = body;
    if let Value::Object(m) = &mut body {
        m.retain(|_, v| !v.is_null());
    }
    write_report(cfg, "factorize", body)?;
    if certified {
        Ok(())
    } else {
        Err(Failure::Inconclusive("factorization not certified".into()))
    }
}

fn resolve_hf(cfg: &RunConfig) -> Result<f64, Failure> {
    if let Some(h) = cfg.detector.h_f.or_else(|| closed_form_hf(cfg)) {
        return Ok(h);
    }
    let lattice = cfg.lattice().map_err(config_err)?;
    let params = cfg.params().map_err(config_err)?;
    let opts = cfg.solver().map_err(config_err)?;
    let bracket = cfg.bracket().map_err(|_| {
        Failure::Config("critical needs detector.h_f or a [bracket] to locate the factorizing field".into())
    })?;
    Ok(locate_factorizing_field(&params, &lattice, bracket, &opts)?.h_f_estimate)
}

fn cmd_critical(cfg: &RunConfig) -> Outcome {
    let h_f = resolve_hf(cfg)?;
    let sweep = run_sweep(cfg)?;
    write(&cfg.output.dir, "rows.csv", &sweep.to_csv())?;
    let dip = locate_critical_dip(&sweep.rows, h_f, cfg.detector.mask_radius);
    let h_c = dip.as_ref().ok().filter(|d| !d.inconclusive).map(|d| d.h_c_estimate);
    emit_plot(cfg, &sweep, plot::Markers { h_f: Some(h_f), h_c })?;
    let dip = match dip {
        Ok(d) => d,
        Err(e) => {
            write_report(cfg, "critical", json!({ "h_f": h_f, "inconclusive": true, "reason": e.to_string() }))?;
            return Err(e.into());
        }
    };
    write_report(
        cfg,
        "critical",
        json!({
            "h_f": h_f,
            "h_c_estimate": dip.h_c_estimate,
            "R_min": dip.r_min,
            "magnetization_inflection": dip.magnetization_inflection,
            "inconclusive": dip.inconclusive,
            "failed": failed_rows(&sweep),
        }),
    )?;
    if dip.inconclusive {
        Err(Failure::Inconclusive("ratio minimum lies on the edge of the window".into()))
    } else {
        Ok(())
    }
}

const ORACLE_TOL: (f64, f64, f64) = (1e-9, 1e-8, 1e-8);

fn cmd_oracle_check(cfg: &RunConfig) -> Outcome {
    if cfg.model.delta_z != 0.0 {
        return Err(Failure::Config("oracle requires Δ_z = 0".into()));
    }
    if cfg.lattice.kind != LatticeKind::Chain {
        return Err(Failure::Config("oracle requires a chain".into()));
    }
    let lattice = cfg.lattice().map_err(config_err)?;
    let params = cfg.params().map_err(config_err)?;
    let opts = cfg.solver().map_err(config_err)?;
    let grid = cfg.grid().map_err(config_err)?;
    let dy = cfg.model.delta_y;
    let rows = grid
        .par_iter()
        .map(|&h| -> Result<Value, Failure> {
            let ff = free_fermion_solution(dy, h, lattice.length())?;
            let gs = lanczos_ground(&params.with_field(h), &lattice, &opts)?;
            let v = if gs.parity == ff.parity_sector { &gs.vector } else { &gs.partner.vector };
            let corr = CorrelatorSet::compute(v, &lattice, cfg.model.frame)?;
            let de = (gs.energy - ff.energy).abs();
            let dm = (corr.mz - ff.mz).abs();
            let dg = corr
                .classes
                .iter()
                .zip(&ff.gzz)
                .map(|(c, g)| (c.gzz - g).abs())
                .fold(0.0, f64::max);
            let pass = de <= ORACLE_TOL.0 && dm <= ORACLE_TOL.1 && dg <= ORACLE_TOL.2;
            Ok(json!({ "h": h, "d_energy": de, "d_mz": dm, "d_gzz": dg, "pass": pass }))
        })
        .collect::<Result<Vec<Value>, Failure>>()?;
    let all_pass = rows.iter().all(|r| r["pass"] == json!(true));
    write_report(
        cfg,
        "oracle-check",
        json!({
            "tolerances": { "energy": ORACLE_TOL.0, "mz": ORACLE_TOL.1, "gzz": ORACLE_TOL.2 },
            "rows": rows,
            "pass": all_pass,
        }),
    )?;
    if all_pass {
        Ok(())
    } else {
        Err(Failure::Solver("exact diagonalization disagrees with the free-fermion solution".into()))
    }
}
