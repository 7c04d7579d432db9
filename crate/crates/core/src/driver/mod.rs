//! Batch workflows behind the `qes` command-line tool: solve, verify,
//! scan and oracle comparison, with JSON/CSV output.

pub mod config;
pub mod record;

use std::path::Path;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;

pub use config::{
    AxisTarget, Command, Degrees, GridOverrides, JobConfig, OutputFormat, ScanAxis,
    SolverOverrides, VerifyMode,
};
pub use record::{
    records_from_csv, records_from_json, records_from_str, to_csv, to_json, ComparisonRow,
    RecordStatus, ResultRecord, Tabular,
};

use crate::bethe::{BetheSolution, QesFamily, SolverConfig};
use crate::models::{energy_of, reduce, solve_level, ModelSpec, Param, QesLevel};
use crate::verifier::{verify_energy, verify_energy_on, FdCheck};
use crate::{oracle, QesError, Result};

/// Relative tolerance on `c₀` against the invariant-matrix spectrum.
pub const ORACLE_C0_TOL: f64 = 1e-8;
/// Relative tolerance on root positions against the invariant-matrix roots.
pub const ORACLE_ROOT_TOL: f64 = 1e-7;
/// Relative tolerance when re-deriving stored quantities.
pub const STORED_TOL: f64 = 1e-9;
/// Absolute tolerance on the joint constraint for stored records.
pub const CONSTRAINT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    ConfigError = 1,
    Mismatch = 2,
    Internal = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }

    pub fn of_error(e: &QesError) -> Self {
        match e {
            QesError::Config { .. }
            | QesError::UnknownParameter { .. }
            | QesError::InvalidModel(_)
            | QesError::SolverConfig(_)
            | QesError::Json(_)
            | QesError::Csv(_) => ExitStatus::ConfigError,
            _ => ExitStatus::Internal,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Output {
    Records(Vec<ResultRecord>),
    Comparison(Vec<ComparisonRow>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub output: Output,
    pub status: ExitStatus,
}

impl RunReport {
    pub fn render(&self, format: OutputFormat) -> Result<String> {
        match (&self.output, format) {
            (Output::Records(r), OutputFormat::Json) => Ok(to_json(r)),
            (Output::Records(r), OutputFormat::Csv) => to_csv(r),
            (Output::Comparison(r), OutputFormat::Json) => Ok(to_json(r)),
            (Output::Comparison(r), OutputFormat::Csv) => to_csv(r),
        }
    }

    pub fn records(&self) -> &[ResultRecord] {
        match &self.output {
            Output::Records(r) => r,
            Output::Comparison(_) => &[],
        }
    }
}

/// Run a validated job. Scan cells and re-checks run on `workers` threads;
/// output order never depends on completion order.
pub fn run(cfg: &JobConfig) -> Result<RunReport> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.unwrap_or(0))
        .build()
        .map_err(|e| QesError::config("workers", e.to_string()))?;
    pool.install(|| match cfg.command {
        Command::Solve => solve(cfg),
        Command::Scan => scan(cfg),
        Command::Verify => verify(cfg),
        Command::OracleCompare => oracle_compare(cfg),
    })
}

/// Run, render and write to `cfg.output` (stdout when absent).
pub fn execute(cfg: &JobConfig) -> ExitStatus {
    let report = match run(cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitStatus::of_error(&e);
        }
    };
    let text = match report.render(cfg.format) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitStatus::Internal;
        }
    };
    let written = match &cfg.output {
        Some(path) => std::fs::write(path, text),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(text.as_bytes())
        }
    };
    if let Err(e) = written.or_else(|e| match e.kind() {
        std::io::ErrorKind::BrokenPipe => Ok(()),
        _ => Err(e),
    }) {
        eprintln!("error: cannot write output: {e}");
        return ExitStatus::Internal;
    }
    report.status
}

fn status_of(records: &[ResultRecord]) -> ExitStatus {
    if records.iter().any(|r| r.status == RecordStatus::Mismatch) {
        ExitStatus::Mismatch
    } else {
        ExitStatus::Success
    }
}

fn fd_check(spec: &ModelSpec, energy: f64, index: usize, cfg: &JobConfig) -> Result<FdCheck> {
    match &cfg.grid {
        Some(g) => verify_energy_on(spec, energy, index, &g.grid(spec.ell)?),
        None => verify_energy(spec, energy, index),
    }
}

fn unsolved(index: usize, spec: &ModelSpec, n: usize, free: Param, reason: String) -> ResultRecord {
    ResultRecord {
        index,
        status: RecordStatus::Unsolved,
        reason: Some(reason),
        model: spec.kind,
        ell: spec.ell,
        n,
        free_param: free,
        free_value: None,
        params: spec.params.clone(),
        energy: None,
        roots: Vec::new(),
        c0: None,
        bae_residual: None,
        constraint_residual: None,
        oracle_c0_deviation: None,
        fd_energy: None,
        fd_deviation: None,
        fd_refined_deviation: None,
        fd_node_count: None,
        node_count: None,
        checks: "none".into(),
        wall_time: None,
    }
}

fn record_of_level(index: usize, level: &QesLevel, cfg: &JobConfig) -> ResultRecord {
    let mut reasons = Vec::new();
    let mut r = ResultRecord {
        index,
        status: RecordStatus::Ok,
        reason: None,
        model: level.model.kind,
        ell: level.model.ell,
        n: level.n,
        free_param: level.free_param,
        free_value: Some(level.free_param_value),
        params: level.model.params.clone(),
        energy: Some(level.energy),
        roots: level.bethe.roots.clone(),
        c0: Some(level.bethe.c0),
        bae_residual: Some(level.bethe.bae_residual_norm),
        constraint_residual: Some(level.constraint_residual),
        oracle_c0_deviation: None,
        fd_energy: None,
        fd_deviation: None,
        fd_refined_deviation: None,
        fd_node_count: None,
        node_count: Some(level.node_roots),
        checks: cfg.verify.label().into(),
        wall_time: None,
    };
    if cfg.verify.oracle() {
        let dev = level.oracle_c0_deviation;
        r.oracle_c0_deviation = Some(dev);
        if !(dev <= ORACLE_C0_TOL * (1.0 + level.bethe.c0.abs())) {
            reasons.push(format!("oracle c0 deviation {dev:e}"));
        }
    }
    if cfg.verify.fd() {
        apply_fd(
            &mut r,
            &level.model,
            level.energy,
            level.node_roots,
            cfg,
            &mut reasons,
        );
    }
    finish(&mut r, reasons, level.notes.clone());
    r
}

fn apply_fd(
    r: &mut ResultRecord,
    spec: &ModelSpec,
    energy: f64,
    nodes: usize,
    cfg: &JobConfig,
    reasons: &mut Vec<String>,
) {
    match fd_check(spec, energy, nodes, cfg) {
        Ok(fd) => {
            r.fd_energy = Some(fd.fd_energy);
            r.fd_deviation = Some(fd.deviation);
            r.fd_refined_deviation = Some(fd.refined_deviation);
            r.fd_node_count = Some(fd.node_count);
            if !fd.passed() {
                reasons.push(format!(
                    "finite-difference energy {} differs by {:e}",
                    fd.fd_energy, fd.deviation
                ));
            }
            if fd.node_count != nodes {
                reasons.push(format!(
                    "finite-difference state has {} nodes, roots predict {nodes}",
                    fd.node_count
                ));
            }
        }
        Err(e) => reasons.push(format!("finite-difference check failed: {e}")),
    }
}

fn finish(r: &mut ResultRecord, reasons: Vec<String>, notes: Vec<String>) {
    if !reasons.is_empty() {
        r.status = RecordStatus::Mismatch;
    }
    let all: Vec<String> = reasons.into_iter().chain(notes).collect();
    r.reason = (!all.is_empty()).then(|| all.join("; "));
}

fn solve(cfg: &JobConfig) -> Result<RunReport> {
    let spec = cfg.base_spec()?;
    let free = cfg.free()?;
    let solver = cfg.solver_config();
    let mut records = Vec::new();
    for n in cfg.degrees() {
        let start = Instant::now();
        match solve_level(&spec, n, free, &solver) {
            Ok(levels) if !levels.is_empty() => {
                let mut recs: Vec<ResultRecord> = levels
                    .par_iter()
                    .map(|l| record_of_level(0, l, cfg))
                    .collect();
                let elapsed = start.elapsed().as_secs_f64();
                for mut r in recs.drain(..) {
                    r.index = records.len();
                    if cfg.record_timing {
                        r.wall_time = Some(elapsed);
                    }
                    records.push(r);
                }
            }
            Ok(_) => records.push(unsolved(
                records.len(),
                &spec,
                n,
                free,
                "no level in the search range".into(),
            )),
            Err(e) => records.push(unsolved(records.len(), &spec, n, free, e.to_string())),
        }
    }
    let status = status_of(&records);
    Ok(RunReport {
        output: Output::Records(records),
        status,
    })
}

fn scan_cell(
    index: usize,
    cell: &[(AxisTarget, f64)],
    base: &ModelSpec,
    cfg: &JobConfig,
    solver: &SolverConfig,
) -> ResultRecord {
    let start = Instant::now();
    let free = cfg.free().expect("validated");
    let mut spec = base.clone();
    let mut n = cfg.degrees()[0];
    for &(target, x) in cell {
        match target {
            AxisTarget::Ell => spec.ell = x as i32,
            AxisTarget::Degree => n = x as usize,
            AxisTarget::Param(p) => spec = spec.with_param(p, x),
        }
    }
    let mut r = match solve_level(&spec, n, free, solver) {
        Ok(levels) => match levels.get(cfg.level) {
            Some(level) => record_of_level(index, level, cfg),
            None => unsolved(
                index,
                &spec,
                n,
                free,
                format!(
                    "{} level(s) found, level {} requested",
                    levels.len(),
                    cfg.level
                ),
            ),
        },
        Err(e) => unsolved(index, &spec, n, free, e.to_string()),
    };
    if cfg.record_timing {
        r.wall_time = Some(start.elapsed().as_secs_f64());
    }
    r
}

fn scan(cfg: &JobConfig) -> Result<RunReport> {
    let base = cfg.base_spec()?;
    let solver = cfg.solver_config();
    let cells = cfg.scan_cells()?;
    let records: Vec<ResultRecord> = cells
        .par_iter()
        .enumerate()
        .map(|(i, cell)| scan_cell(i, cell, &base, cfg, &solver))
        .collect();
    let status = status_of(&records);
    Ok(RunReport {
        output: Output::Records(records),
        status,
    })
}

fn close(a: f64, b: f64, rtol: f64) -> bool {
    (a - b).abs() <= rtol * (1.0 + a.abs().max(b.abs()))
}

/// Re-derive every stored quantity of a record from its parameters and roots.
pub fn recheck(stored: &ResultRecord, cfg: &JobConfig) -> ResultRecord {
    let mut r = stored.clone();
    r.checks = cfg.verify.label().into();
    r.reason = None;
    r.status = RecordStatus::Ok;
    if stored.status == RecordStatus::Unsolved {
        r.status = RecordStatus::Unsolved;
        r.reason = stored.reason.clone();
        r.checks = "none".into();
        return r;
    }
    let mut reasons = Vec::new();
    let result = (|| -> Result<()> {
        let params: Vec<(Param, f64)> = stored.params.iter().map(|(&p, &v)| (p, v)).collect();
        let spec = ModelSpec::new(stored.model, stored.ell, &params)?;
        let p = stored
            .free_value
            .ok_or_else(|| QesError::config("free_value", "missing on a solved record"))?;
        if spec.params.get(&stored.free_param) != Some(&p) {
            reasons.push(format!("free_value {p} disagrees with params"));
        }
        let family = reduce(&spec, stored.n, stored.free_param)?;
        let coeffs = family.coefficients(p);
        let eq = coeffs.equation()?;
        if stored.roots.len() != stored.n {
            reasons.push(format!(
                "{} roots stored for degree {}",
                stored.roots.len(),
                stored.n
            ));
            return Ok(());
        }
        let sol = BetheSolution::from_roots(&eq, stored.roots.clone())?;
        r.bae_residual = Some(sol.bae_residual_norm);
        if !sol.is_valid() {
            reasons.push(format!("Bethe residual {:e}", sol.bae_residual_norm));
        }
        let constraint = sol.c0 - coeffs.target_c0;
        r.constraint_residual = Some(constraint);
        if !(constraint.abs() <= CONSTRAINT_TOL * (1.0 + sol.c0.abs())) {
            reasons.push(format!("constraint residual {constraint:e}"));
        }
        if stored.c0.is_none_or(|c| !close(c, sol.c0, STORED_TOL)) {
            reasons.push(format!("stored c0 differs from {}", sol.c0));
        }
        let energy = energy_of(&spec, stored.n)?;
        match stored.energy {
            Some(e) if close(e, energy, STORED_TOL) => {}
            Some(e) => reasons.push(format!("stored energy {e} differs from {energy}")),
            None => reasons.push("energy missing".into()),
        }
        let map = family.variable_map(p);
        let nodes = sol
            .roots
            .iter()
            .filter(|&&t| map.radius_of(t).is_some())
            .count();
        if stored.node_count != Some(nodes) {
            reasons.push(format!("node count should be {nodes}"));
        }
        r.node_count = Some(nodes);
        if cfg.verify.oracle() {
            let dev = oracle::oracle_solutions(&eq, stored.n)?
                .iter()
                .filter(|l| l.has_real_c0())
                .map(|l| (l.c0.re - sol.c0).abs())
                .fold(f64::INFINITY, f64::min);
            r.oracle_c0_deviation = Some(dev);
            if !(dev <= ORACLE_C0_TOL * (1.0 + sol.c0.abs())) {
                reasons.push(format!("oracle c0 deviation {dev:e}"));
            }
        } else {
            r.oracle_c0_deviation = None;
        }
        (
            r.fd_energy,
            r.fd_deviation,
            r.fd_refined_deviation,
            r.fd_node_count,
        ) = (None, None, None, None);
        if cfg.verify.fd() {
            let e = stored.energy.unwrap_or(energy);
            apply_fd(&mut r, &spec, e, nodes, cfg, &mut reasons);
        }
        Ok(())
    })();
    if let Err(e) = result {
        reasons.push(e.to_string());
    }
    finish(&mut r, reasons, Vec::new());
    r
}

fn read_records(path: &Path) -> Result<Vec<ResultRecord>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| QesError::config("input", format!("{}: {e}", path.display())))?;
    records_from_str(&text)
}

fn verify(cfg: &JobConfig) -> Result<RunReport> {
    let input = cfg.input.as_ref().expect("validated");
    let stored = read_records(input)?;
    let records: Vec<ResultRecord> = stored.par_iter().map(|r| recheck(r, cfg)).collect();
    let status = status_of(&records);
    Ok(RunReport {
        output: Output::Records(records),
        status,
    })
}

/// Largest distance from a real root to its nearest unused complex root.
pub fn root_distance(real: &[f64], complex: &[Complex64]) -> f64 {
    let mut used = vec![false; complex.len()];
    let mut worst = 0.0_f64;
    for &t in real {
        let best = complex
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, z)| (j, (z - t).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        match best {
            Some((j, d)) => {
                used[j] = true;
                worst = worst.max(d);
            }
            None => return f64::INFINITY,
        }
    }
    worst
}

fn oracle_compare(cfg: &JobConfig) -> Result<RunReport> {
    let spec = cfg.base_spec()?;
    let free = cfg.free()?;
    let solver = cfg.solver_config();
    let mut rows = Vec::new();
    let mut all_matched = true;
    for n in cfg.degrees() {
        let levels = match solve_level(&spec, n, free, &solver) {
            Ok(l) => l,
            Err(QesError::NoRealLevel(_)) => Vec::new(),
            Err(e) => return Err(e),
        };
        for (li, level) in levels.iter().enumerate() {
            let eq = reduce(&spec, n, free)?.equation_at(level.free_param_value)?;
            let oracle = oracle::oracle_solutions(&eq, n)?;
            let c0 = level.bethe.c0;
            let best = oracle
                .iter()
                .enumerate()
                .min_by(|a, b| (a.1.c0 - c0).norm().total_cmp(&(b.1.c0 - c0).norm()))
                .map(|(j, _)| j);
            let scale = 1.0
                + level
                    .bethe
                    .roots
                    .iter()
                    .fold(0.0_f64, |m, t| m.max(t.abs()));
            let mut matched_any = false;
            for (j, ol) in oracle.iter().enumerate() {
                let dev = (ol.c0 - c0).norm();
                let is_best = Some(j) == best;
                let dist = is_best.then(|| root_distance(&level.bethe.roots, &ol.roots));
                let matched = is_best
                    && dev <= ORACLE_C0_TOL * (1.0 + c0.abs())
                    && dist.is_some_and(|d| d <= ORACLE_ROOT_TOL * scale);
                matched_any |= matched;
                rows.push(ComparisonRow {
                    model: spec.kind,
                    ell: spec.ell,
                    n,
                    level: li,
                    free_param: free,
                    free_value: level.free_param_value,
                    bae_c0: c0,
                    oracle_index: j,
                    oracle_c0_re: ol.c0.re,
                    oracle_c0_im: ol.c0.im,
                    c0_deviation: dev,
                    root_distance: dist,
                    oracle_all_real: ol.all_real,
                    matched,
                });
            }
            all_matched &= matched_any;
        }
    }
    Ok(RunReport {
        output: Output::Comparison(rows),
        status: if all_matched {
            ExitStatus::Success
        } else {
            ExitStatus::Mismatch
        },
    })
}
