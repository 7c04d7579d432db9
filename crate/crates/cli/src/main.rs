//! `qes`: solve, scan and verify quasi-exactly solvable radial models.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use qes_core::bethe::SolverConfig;
use qes_core::driver::{
    execute, Command, Degrees, ExitStatus, GridOverrides, JobConfig, OutputFormat, ScanAxis,
    VerifyMode,
};
use qes_core::models::{soft_core_arbitration, ModelKind, Param};
use qes_core::QesError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CliCommand {
    Solve,
    Verify,
    Scan,
    OracleCompare,
    /// Compare candidate soft-core drift constants against finite differences.
    Arbitrate,
}

#[derive(Debug, Parser)]
#[command(name = "qes", version, about = "Exact levels of quasi-exactly solvable radial potentials")]
struct Cli {
    /// Workflow to run; may instead come from --config.
    #[arg(value_enum)]
    command: Option<CliCommand>,

    /// JSON job file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,

    /// anharmonic, isotonic, soft-core-coulomb or non-polynomial.
    #[arg(long)]
    model: Option<String>,

    #[arg(long, allow_hyphen_values = true)]
    ell: Option<i32>,

    /// Degree: N, LO..HI or N,N,...
    #[arg(long)]
    n: Option<String>,

    /// Parameter solved for.
    #[arg(long)]
    free: Option<String>,

    /// Fixed parameter, k=v (repeatable).
    #[arg(long = "param", value_name = "K=V", allow_hyphen_values = true)]
    params: Vec<String>,

    /// Scan axis, k=lo:hi:steps or k=v1,v2,... (repeatable).
    #[arg(long = "scan", value_name = "AXIS", allow_hyphen_values = true)]
    scans: Vec<String>,

    /// Level kept per scan cell, counted from the lowest energy.
    #[arg(long)]
    level: Option<usize>,

    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long)]
    format: Option<String>,

    #[arg(long)]
    seed: Option<u64>,

    /// bae, oracle, fd or all.
    #[arg(long)]
    verify: Option<String>,

    #[arg(long)]
    workers: Option<usize>,

    /// Record file to re-check (verify).
    #[arg(long)]
    input: Option<PathBuf>,

    /// Fixed finite-difference grid: number of points.
    #[arg(long, requires = "grid_rmax")]
    grid_points: Option<usize>,

    /// Fixed finite-difference grid: outer radius.
    #[arg(long, requires = "grid_points")]
    grid_rmax: Option<f64>,

    /// Store wall-clock times in the records.
    #[arg(long)]
    timing: bool,

    /// Print the assembled job configuration and exit.
    #[arg(long)]
    print_config: bool,
}

fn parse_kv(s: &str) -> Result<(Param, f64), QesError> {
    let bad = || QesError::Config {
        field: "param".into(),
        message: format!("expected k=v, got `{s}`"),
    };
    let (k, v) = s.split_once('=').ok_or_else(bad)?;
    let p: Param = k.trim().parse()?;
    let v: f64 = v.trim().parse().map_err(|_| bad())?;
    Ok((p, v))
}

fn job(cli: &Cli) -> Result<JobConfig, QesError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| QesError::Config {
                field: "config".into(),
                message: format!("{}: {e}", path.display()),
            })?;
            JobConfig::parse_json(&text)?
        }
        None => {
            let command = match cli.command {
                Some(c) => to_command(c),
                None => {
                    return Err(QesError::Config {
                        field: "command".into(),
                        message: "give a command or --config".into(),
                    })
                }
            };
            JobConfig::new(command)
        }
    };
    if let Some(c) = cli.command {
        cfg.command = to_command(c);
    }
    if let Some(m) = &cli.model {
        cfg.model = Some(m.parse::<ModelKind>()?);
    }
    if let Some(l) = cli.ell {
        cfg.ell = l;
    }
    if let Some(n) = &cli.n {
        cfg.n = Some(n.parse::<Degrees>()?);
    }
    if let Some(f) = &cli.free {
        cfg.free = Some(f.parse::<Param>()?);
    }
    for kv in &cli.params {
        let (p, v) = parse_kv(kv)?;
        cfg.params.insert(p, v);
    }
    for s in &cli.scans {
        cfg.scan.push(s.parse::<ScanAxis>()?);
    }
    if let Some(l) = cli.level {
        cfg.level = l;
    }
    if let Some(o) = &cli.out {
        cfg.output = Some(o.clone());
    }
    if let Some(f) = &cli.format {
        cfg.format = f.parse::<OutputFormat>()?;
    }
    if let Some(s) = cli.seed {
        cfg.seed = Some(s);
    }
    if let Some(v) = &cli.verify {
        cfg.verify = v.parse::<VerifyMode>()?;
    }
    if let Some(w) = cli.workers {
        cfg.workers = Some(w);
    }
    if let Some(i) = &cli.input {
        cfg.input = Some(i.clone());
    }
    if let (Some(num_points), Some(r_max)) = (cli.grid_points, cli.grid_rmax) {
        cfg.grid = Some(GridOverrides {
            r_min: None,
            r_max,
            num_points,
        });
    }
    cfg.record_timing |= cli.timing;
    cfg.validate()?;
    Ok(cfg)
}

fn to_command(c: CliCommand) -> Command {
    match c {
        CliCommand::Solve => Command::Solve,
        CliCommand::Verify => Command::Verify,
        CliCommand::Scan => Command::Scan,
        CliCommand::OracleCompare | CliCommand::Arbitrate => Command::OracleCompare,
    }
}

fn arbitrate(cli: &Cli) -> Result<ExitStatus, QesError> {
    let mut beta = 1.0;
    let mut big_g = 0.5;
    for kv in &cli.params {
        match parse_kv(kv)? {
            (Param::Beta, v) => beta = v,
            (Param::BigG, v) => big_g = v,
            (p, _) => {
                return Err(QesError::Config {
                    field: "param".into(),
                    message: format!("arbitrate takes beta and G, not `{p}`"),
                })
            }
        }
    }
    let mut solver = SolverConfig::default();
    if let Some(s) = cli.seed {
        solver.seed = s;
    }
    let report = soft_core_arbitration(cli.ell.unwrap_or(0), beta, big_g, &solver)?;
    let text = report.to_markdown();
    match &cli.out {
        Some(path) => std::fs::write(path, text)?,
        None => emit(&text),
    }
    let supported = report.supported();
    Ok(if supported.len() == 1 {
        ExitStatus::Success
    } else {
        ExitStatus::Mismatch
    })
}

/// Write to stdout; a closed pipe is not an error.
fn emit(text: &str) {
    use std::io::Write;
    let _ = std::io::stdout().write_all(text.as_bytes());
}

fn exit(status: ExitStatus) -> ExitCode {
    ExitCode::from(status.code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if cli.command == Some(CliCommand::Arbitrate) {
        return match arbitrate(&cli) {
            Ok(s) => exit(s),
            Err(e) => {
                eprintln!("error: {e}");
                exit(ExitStatus::of_error(&e))
            }
        };
    }
    let cfg = match job(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return exit(ExitStatus::of_error(&e));
        }
    };
    if cli.print_config {
        emit(&format!("{}\n", cfg.to_json()));
        return exit(ExitStatus::Success);
    }
    exit(execute(&cfg))
}
