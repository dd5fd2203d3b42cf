//! Subcommand dispatch: each run writes `<subcommand>.csv|json` and
//! `<subcommand>.manifest.json` into the output directory.

use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;
use serde_json::{json, Value};

use super::config::{OutputFormat, RunConfig};
use super::manifest::{to_json, Cell, RunManifest, Table};
use crate::cell::{CellSolver, PeriodicGrid};
use crate::coeffs::{DEFAULT_RESOLUTION_1D, DEFAULT_RESOLUTION_2D};
use crate::defect::{Boundary, DefectSolver, TruncatedDomain};
use crate::error::{Error, Result};
use crate::homog::convergence_study;
use crate::ineq::run_battery;
use crate::oned::{table_sweep, Problem1D, Rhs};

/// Exit code on success.
pub const EXIT_OK: i32 = 0;
/// Any failure not covered below.
pub const EXIT_ERROR: i32 = 1;
/// Structural assumption on the coefficient violated.
pub const EXIT_ASSUMPTION: i32 = 2;
/// An iterative solver did not reach its tolerance.
pub const EXIT_NO_CONVERGENCE: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Subcommand {
    Validate,
    Ineq,
    Oned,
    Cell,
    Defect,
    Homog,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Validate => "validate",
            Subcommand::Ineq => "ineq",
            Subcommand::Oned => "oned",
            Subcommand::Cell => "cell",
            Subcommand::Defect => "defect",
            Subcommand::Homog => "homog",
        }
    }
}

impl FromStr for Subcommand {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "validate" => Subcommand::Validate,
            "ineq" => Subcommand::Ineq,
            "oned" => Subcommand::Oned,
            "cell" => Subcommand::Cell,
            "defect" => Subcommand::Defect,
            "homog" => Subcommand::Homog,
            _ => return Err(Error::InvalidInput(format!("unknown subcommand {s:?}"))),
        })
    }
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e.root() {
        Error::AssumptionViolated(_) => EXIT_ASSUMPTION,
        Error::NoConvergence { .. } => EXIT_NO_CONVERGENCE,
        _ => EXIT_ERROR,
    }
}

/// Numeric payload of a subcommand: a table for CSV and a structured value for JSON.
pub struct Payload {
    pub table: Table,
    pub json: Value,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub manifest: RunManifest,
    pub data_path: Option<PathBuf>,
    pub manifest_path: PathBuf,
    pub error: Option<String>,
}

/// Runs `sub` and writes its artifacts. `config_bytes` feeds the manifest hash.
pub fn run(sub: Subcommand, cfg: &RunConfig, config_bytes: &[u8]) -> Result<RunOutcome> {
    let mut manifest = RunManifest::new(sub.name(), config_bytes, cfg.solver.seed);
    let result = compute(sub, cfg, &mut manifest);
    let dir = &cfg.output.path;
    std::fs::create_dir_all(dir)?;
    let mut data_path = None;
    let mut error = None;
    match result {
        Ok(payload) => {
            let (ext, text) = match cfg.output.format {
                OutputFormat::Csv => ("csv", payload.table.to_csv(cfg.output.precision)),
                OutputFormat::Json => ("json", to_json(&payload.json)? + "\n"),
            };
            let path = dir.join(format!("{}.{ext}", sub.name()));
            std::fs::write(&path, text)?;
            manifest.artifacts.push(path.display().to_string());
            data_path = Some(path);
        }
        Err(e) => {
            manifest.exit_code = exit_code(&e);
            let msg = e.to_string();
            manifest.error = Some(msg.clone());
            error = Some(msg);
        }
    }
    let manifest_path = dir.join(format!("{}.manifest.json", sub.name()));
    std::fs::write(&manifest_path, to_json(&manifest)? + "\n")?;
    Ok(RunOutcome { exit_code: manifest.exit_code, manifest, data_path, manifest_path, error })
}

fn compute(sub: Subcommand, cfg: &RunConfig, m: &mut RunManifest) -> Result<Payload> {
    let stage = |e: Error| e.in_stage(format!("{}: setup", sub.name()));
    let coef = m.stage("coefficient", || cfg.build_coefficient()).map_err(stage)?;
    match sub {
        Subcommand::Validate => {
            let res = if coef.dim() == 1 { DEFAULT_RESOLUTION_1D } else { DEFAULT_RESOLUTION_2D };
            let r = m.stage("validate", || coef.validate(res)).map_err(|e| e.in_stage("coeffs: validate"))?;
            m.warn(r.warnings.clone());
            let mut t = Table::new(&["quantity", "value"]);
            for (k, v) in [
                ("lambda", r.lambda),
                ("a_per_min", r.a_per_min),
                ("a_per_max", r.a_per_max),
                ("a_min", r.a_min),
                ("a_max", r.a_max),
                ("periodicity_residual", r.periodicity_residual),
            ] {
                t.push(vec![Cell::Text(k.into()), Cell::Num(v)]);
            }
            if let Some(d) = &coef.defect {
                t.push(vec![Cell::Text("defect_lp_prime_norm".into()), Cell::Num(d.lp_prime_norm_estimate)]);
            }
            Ok(Payload { table: t, json: serde_json::to_value(&r)? })
        }
        Subcommand::Ineq => {
            let r = m.stage("battery", || run_battery(cfg.solver.samples, cfg.solver.seed));
            if !r.passed() {
                m.warn(["inequality battery recorded violations".to_string()]);
            }
            let mut t = Table::new(&["name", "samples", "skipped", "min_ratio", "max_ratio", "reference", "violations"]);
            for s in &r.ratios {
                t.push(vec![
                    Cell::Text(s.name.clone()),
                    Cell::Int(s.samples as i64),
                    Cell::Int(s.skipped as i64),
                    Cell::Num(s.min_ratio),
                    Cell::Num(s.max_ratio),
                    Cell::Num(s.reference.unwrap_or(f64::NAN)),
                    Cell::Int(s.violations as i64),
                ]);
            }
            for l in &r.lemma51 {
                t.push(vec![
                    Cell::Text(format!("lower_bound_p{}", l.p)),
                    Cell::Int(l.samples as i64),
                    Cell::Int(0),
                    Cell::Num(l.gamma.unwrap_or(f64::NAN)),
                    Cell::Num(l.c.unwrap_or(f64::NAN)),
                    Cell::Num(f64::NAN),
                    Cell::Int(i64::from(!l.passed)),
                ]);
            }
            Ok(Payload { table: t, json: serde_json::to_value(&r)? })
        }
        Subcommand::Oned => {
            let template = problem_1d(cfg, &coef)?;
            let rows = m.stage("sweep", || table_sweep(&template, &cfg.problem.eps)).map_err(|e| e.in_stage("oned: sweep"))?;
            let mut t = Table::new(&["eps", "R_per_Linf", "R_Linf", "R_per_L2", "R_L2", "C_eps", "C_star"]);
            for r in &rows {
                m.warn(r.warnings.clone());
                t.push(
                    [r.eps, r.periodic.linf, r.full.linf, r.periodic.l2, r.full.l2, r.c_eps, r.c_star]
                        .map(Cell::Num)
                        .to_vec(),
                );
            }
            Ok(Payload { table: t, json: serde_json::to_value(&rows)? })
        }
        Subcommand::Cell => {
            let d = coef.dim();
            let grid = match cfg.solver.cell_grid {
                Some(n) => PeriodicGrid::new(d, n)?,
                None => PeriodicGrid::default_for(d)?,
            };
            let solver = CellSolver::new(&coef.periodic, coef.p, grid)?.with_tolerance(cfg.solver.tol, cfg.solver.max_iter);
            let mut header: Vec<String> = (1..=d).map(|k| format!("xi_{k}")).collect();
            header.extend((1..=d).map(|k| format!("a_star_{k}")));
            header.extend(["c_est", "energy", "residual", "iterations"].map(String::from));
            let mut t = Table { header, rows: Vec::new() };
            let mut out = Vec::new();
            for xi in cfg.directions() {
                let s = m.stage("cell solve", || solver.solve(&xi)).map_err(|e| e.in_stage("cell: solve"))?;
                let a = s.a_star();
                let c_est = s.min_gradient_ratio();
                let mut row: Vec<Cell> = xi.iter().chain(&a).map(|v| Cell::Num(*v)).collect();
                row.extend([Cell::Num(c_est), Cell::Num(s.energy), Cell::Num(s.residual), Cell::Int(s.iterations as i64)]);
                t.push(row);
                out.push(json!({
                    "xi": xi, "a_star": a, "c_est": c_est, "energy": s.energy,
                    "residual": s.residual, "iterations": s.iterations, "grid": grid.n,
                }));
            }
            Ok(Payload { table: t, json: Value::Array(out) })
        }
        Subcommand::Defect => {
            if !coef.has_defect() {
                return Err(Error::InvalidInput("defect subcommand needs coefficient.defect".into()).in_stage("defect: setup"));
            }
            let cpu = cfg.solver.cells_per_unit;
            let domain = match cfg.solver.radius {
                Some(r) => TruncatedDomain::new(coef.dim(), r, cpu, Boundary::Natural)?,
                None => TruncatedDomain::default_for(&coef, cpu)?,
            };
            let solver = m
                .stage("assemble", || DefectSolver::new(&coef, domain))
                .and_then(|s| s.with_tolerance(cfg.solver.tol, cfg.solver.max_iter))
                .map_err(|e| e.in_stage("defect: setup"))?;
            let mut t = Table::new(&[
                "xi_norm",
                "Lp",
                "Wu",
                "Lp_prime",
                "Lp_prime_over_xi",
                "last_tail_ratio",
                "truncation_share",
                "residual",
                "iterations",
            ]);
            let mut out = Vec::new();
            for xi in cfg.directions() {
                let s = m.stage("defect solve", || solver.solve(&xi)).map_err(|e| e.in_stage("defect: solve"))?;
                m.warn(s.warnings.clone());
                t.push(vec![
                    Cell::Num(crate::num::norm(&xi)),
                    Cell::Num(s.norms.lp),
                    Cell::Num(s.norms.wu),
                    Cell::Num(s.norms.lp_prime),
                    Cell::Num(s.tail.lp_prime_over_xi),
                    Cell::Num(s.tail.tail_ratios.last().copied().unwrap_or(f64::NAN)),
                    Cell::Num(s.truncation_share),
                    Cell::Num(s.residual),
                    Cell::Int(s.iterations as i64),
                ]);
                out.push(json!({
                    "xi": xi, "radius": domain.r, "cells_per_unit": cpu, "norms": s.norms, "tail": s.tail,
                    "truncation_share": s.truncation_share, "energy": s.energy, "residual": s.residual,
                    "iterations": s.iterations,
                }));
            }
            Ok(Payload { table: t, json: Value::Array(out) })
        }
        Subcommand::Homog => {
            let template = problem_1d(cfg, &coef)?;
            let s = m
                .stage("convergence", || convergence_study(&template, &cfg.problem.eps, cfg.problem.corrector, cfg.problem.nu))
                .map_err(|e| e.in_stage("homog: convergence"))?;
            m.warn(s.warnings.clone());
            let mut t = Table::new(&[
                "eps",
                "L2_u_err",
                "flux_res_1",
                "flux_res_x",
                "flux_res_sin",
                "R_Linf",
                "R_L2",
                "two_scale_Lp",
            ]);
            for r in &s.records {
                t.push(
                    [
                        r.eps,
                        r.l2_u_err,
                        r.flux_residuals[0],
                        r.flux_residuals[1],
                        r.flux_residuals[2],
                        r.r_linf,
                        r.r_l2,
                        r.two_scale_lp,
                    ]
                    .map(Cell::Num)
                    .to_vec(),
                );
            }
            Ok(Payload { table: t, json: serde_json::to_value(&s)? })
        }
    }
}

fn problem_1d(cfg: &RunConfig, coef: &crate::coeffs::Coefficient) -> Result<Problem1D> {
    if coef.dim() != 1 {
        return Err(Error::InvalidInput("this subcommand needs a 1D coefficient".into()).in_stage("setup"));
    }
    Problem1D::new(coef.clone(), Rhs::Catalog(cfg.problem.rhs.clone()), cfg.problem.eps[0], cfg.solver.quadrature)
}
