//! Job configuration: a single JSON document, optionally assembled from
//! command-line flags.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bethe::SolverConfig;
use crate::models::{ModelKind, ModelSpec, Param};
use crate::verifier::{RadialGrid, MIN_POINTS};
use crate::{QesError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Solve,
    Verify,
    Scan,
    OracleCompare,
}

impl FromStr for Command {
    type Err = QesError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "solve" => Ok(Command::Solve),
            "verify" => Ok(Command::Verify),
            "scan" => Ok(Command::Scan),
            "oracle-compare" => Ok(Command::OracleCompare),
            other => Err(QesError::config(
                "command",
                format!("unknown command `{other}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = QesError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(QesError::config(
                "format",
                format!("expected json or csv, got `{other}`"),
            )),
        }
    }
}

/// Which independent checks accompany each solved level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerifyMode {
    Bae,
    Oracle,
    Fd,
    #[default]
    All,
}

impl VerifyMode {
    pub fn oracle(self) -> bool {
        matches!(self, VerifyMode::Oracle | VerifyMode::All)
    }

    pub fn fd(self) -> bool {
        matches!(self, VerifyMode::Fd | VerifyMode::All)
    }

    /// Label stored in the `checks` column.
    pub fn label(self) -> &'static str {
        match self {
            VerifyMode::Bae => "bae",
            VerifyMode::Oracle => "bae+oracle",
            VerifyMode::Fd => "bae+fd",
            VerifyMode::All => "bae+oracle+fd",
        }
    }
}

impl FromStr for VerifyMode {
    type Err = QesError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bae" => Ok(VerifyMode::Bae),
            "oracle" => Ok(VerifyMode::Oracle),
            "fd" => Ok(VerifyMode::Fd),
            "all" => Ok(VerifyMode::All),
            other => Err(QesError::config(
                "verify",
                format!("expected bae, oracle, fd or all, got `{other}`"),
            )),
        }
    }
}

/// A single degree or a list of degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Degrees {
    One(usize),
    Many(Vec<usize>),
}

impl Degrees {
    pub fn to_vec(&self) -> Vec<usize> {
        match self {
            Degrees::One(n) => vec![*n],
            Degrees::Many(v) => v.clone(),
        }
    }
}

impl FromStr for Degrees {
    type Err = QesError;

    /// `3`, `0..2` (inclusive) or `0,2,5`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || QesError::config("n", format!("expected N, LO..HI or N,N,..., got `{s}`"));
        let int = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
        if let Some((lo, hi)) = s.split_once("..") {
            let (lo, hi) = (int(lo)?, int(hi)?);
            if lo > hi {
                return Err(bad());
            }
            Ok(Degrees::Many((lo..=hi).collect()))
        } else if s.contains(',') {
            Ok(Degrees::Many(s.split(',').map(int).collect::<Result<_>>()?))
        } else {
            Ok(Degrees::One(int(s)?))
        }
    }
}

/// One scan axis: `ell`, `n` or a model parameter, sampled either at
/// explicit values or at `steps` equally spaced points on `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanAxis {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
}

/// What a scan axis varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum AxisTarget {
    Ell,
    Degree,
    Param(Param),
}

impl ScanAxis {
    pub fn linspace(name: &str, lo: f64, hi: f64, steps: usize) -> Self {
        ScanAxis {
            name: name.into(),
            values: None,
            lo: Some(lo),
            hi: Some(hi),
            steps: Some(steps),
        }
    }

    pub fn list(name: &str, values: Vec<f64>) -> Self {
        ScanAxis {
            name: name.into(),
            values: Some(values),
            lo: None,
            hi: None,
            steps: None,
        }
    }

    pub fn target(&self) -> Result<AxisTarget> {
        match self.name.as_str() {
            "ell" | "l" => Ok(AxisTarget::Ell),
            "n" => Ok(AxisTarget::Degree),
            other => Param::from_str(other)
                .map(AxisTarget::Param)
                .map_err(|_| QesError::config("scan", format!("unknown scan axis `{other}`"))),
        }
    }

    pub fn points(&self) -> Result<Vec<f64>> {
        let field = format!("scan.{}", self.name);
        let pts = match (&self.values, self.lo, self.hi, self.steps) {
            (Some(v), None, None, None) => v.clone(),
            (None, Some(lo), Some(hi), Some(steps)) => {
                if steps == 0 {
                    return Err(QesError::config(field, "steps must be positive"));
                }
                if steps == 1 {
                    vec![lo]
                } else {
                    let h = (hi - lo) / (steps - 1) as f64;
                    (0..steps)
                        .map(|k| {
                            if k + 1 == steps {
                                hi
                            } else {
                                lo + h * k as f64
                            }
                        })
                        .collect()
                }
            }
            _ => {
                return Err(QesError::config(
                    field,
                    "give either `values` or all of `lo`, `hi`, `steps`",
                ))
            }
        };
        if pts.is_empty() {
            return Err(QesError::config(field, "scan grid is empty"));
        }
        if let Some(x) = pts.iter().find(|x| !x.is_finite()) {
            return Err(QesError::config(
                field,
                format!("non-finite grid value {x}"),
            ));
        }
        if matches!(self.target()?, AxisTarget::Ell | AxisTarget::Degree) {
            if let Some(x) = pts.iter().find(|x| x.fract() != 0.0) {
                return Err(QesError::config(field, format!("{x} is not an integer")));
            }
        }
        Ok(pts)
    }
}

impl FromStr for ScanAxis {
    type Err = QesError;

    /// `k=lo:hi:steps` or `k=v1,v2,...`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |m: String| QesError::config("scan", m);
        let (name, rest) = s
            .split_once('=')
            .ok_or_else(|| bad(format!("expected k=lo:hi:steps or k=v1,v2,..., got `{s}`")))?;
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| bad(format!("`{t}` is not a number in `{s}`")))
        };
        let axis = if rest.contains(':') {
            let parts: Vec<&str> = rest.split(':').collect();
            if parts.len() != 3 {
                return Err(bad(format!("expected lo:hi:steps, got `{rest}`")));
            }
            let steps = parts[2]
                .trim()
                .parse::<usize>()
                .map_err(|_| bad(format!("steps `{}` is not a count", parts[2])))?;
            ScanAxis::linspace(name.trim(), num(parts[0])?, num(parts[1])?, steps)
        } else {
            ScanAxis::list(
                name.trim(),
                rest.split(',').map(num).collect::<Result<_>>()?,
            )
        };
        axis.target()?;
        Ok(axis)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverOverrides {
    pub max_newton_iters: Option<usize>,
    pub newton_tol: Option<f64>,
    pub num_starts: Option<usize>,
    pub damping: Option<f64>,
}

/// Fixed finite-difference grid replacing the automatic one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridOverrides {
    /// Omit to anchor the grid at the origin.
    pub r_min: Option<f64>,
    pub r_max: f64,
    pub num_points: usize,
}

impl GridOverrides {
    pub fn grid(&self, ell: i32) -> Result<RadialGrid> {
        match self.r_min {
            None => RadialGrid::from_origin(self.r_max, self.num_points, ell),
            Some(r_min) => RadialGrid::new(
                r_min,
                self.r_max,
                self.num_points,
                crate::verifier::InnerBoundary::Regular { ell },
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub command: Command,
    #[serde(default)]
    pub model: Option<ModelKind>,
    #[serde(default)]
    pub ell: i32,
    #[serde(default)]
    pub n: Option<Degrees>,
    #[serde(default)]
    pub free: Option<Param>,
    #[serde(default)]
    pub params: BTreeMap<Param, f64>,
    #[serde(default)]
    pub scan: Vec<ScanAxis>,
    /// Level kept per scan cell, counted from the lowest energy.
    #[serde(default)]
    pub level: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub verify: VerifyMode,
    #[serde(default)]
    pub workers: Option<usize>,
    /// Records to re-check (`verify`).
    #[serde(default)]
    pub input: Option<PathBuf>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default)]
    pub solver: SolverOverrides,
    #[serde(default)]
    pub grid: Option<GridOverrides>,
    /// Store wall-clock times; breaks byte-for-byte reproducibility.
    #[serde(default)]
    pub record_timing: bool,
}

impl JobConfig {
    pub fn new(command: Command) -> Self {
        JobConfig {
            command,
            model: None,
            ell: 0,
            n: None,
            free: None,
            params: BTreeMap::new(),
            scan: Vec::new(),
            level: 0,
            seed: None,
            verify: VerifyMode::All,
            workers: None,
            input: None,
            output: None,
            format: OutputFormat::Json,
            solver: SolverOverrides::default(),
            grid: None,
            record_timing: false,
        }
    }

    /// Parse and validate. Syntax errors carry line and column.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg = Self::parse_json(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parse without validating, e.g. before applying overrides.
    pub fn parse_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            QesError::config(
                format!("line {}, column {}", e.line(), e.column()),
                e.to_string(),
            )
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.n.as_ref().map_or_else(|| vec![0], Degrees::to_vec)
    }

    pub fn model(&self) -> Result<ModelKind> {
        self.model
            .ok_or_else(|| QesError::config("model", "a model is required"))
    }

    pub fn free(&self) -> Result<Param> {
        Ok(self.free.unwrap_or(self.model()?.default_free()))
    }

    /// Base model: every fixed parameter, possibly missing scanned ones.
    pub fn base_spec(&self) -> Result<ModelSpec> {
        let params: Vec<(Param, f64)> = self.params.iter().map(|(&p, &v)| (p, v)).collect();
        ModelSpec::partial(self.model()?, self.ell, &params)
            .map_err(|e| QesError::config("params", e.to_string()))
    }

    pub fn solver_config(&self) -> SolverConfig {
        let d = SolverConfig::default();
        let o = &self.solver;
        SolverConfig {
            max_newton_iters: o.max_newton_iters.unwrap_or(d.max_newton_iters),
            newton_tol: o.newton_tol.unwrap_or(d.newton_tol),
            num_starts: o.num_starts.unwrap_or(d.num_starts),
            seed: self.seed.unwrap_or(d.seed),
            damping: o.damping.unwrap_or(d.damping),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.solver_config()
            .validate()
            .map_err(|e| QesError::config("solver", e.to_string()))?;
        if self.workers == Some(0) {
            return Err(QesError::config("workers", "must be at least 1"));
        }
        if let Some(g) = &self.grid {
            g.grid(self.ell.max(-1))
                .map_err(|e| QesError::config("grid", e.to_string()))?;
            if g.num_points < MIN_POINTS {
                return Err(QesError::config(
                    "grid.num_points",
                    format!("must be >= {MIN_POINTS}"),
                ));
            }
        }
        if self.command == Command::Verify {
            if self.input.is_none() {
                return Err(QesError::config(
                    "input",
                    "verify needs an input record file",
                ));
            }
            return Ok(());
        }
        let kind = self.model()?;
        let free = self.free()?;
        if !kind.params().contains(&free) {
            return Err(QesError::config(
                "free",
                format!("`{free}` is not a parameter of {kind}"),
            ));
        }
        let spec = self.base_spec()?;
        if let Some(Degrees::Many(v)) = &self.n {
            if v.is_empty() {
                return Err(QesError::config("n", "degree list is empty"));
            }
        }
        match (self.command, self.scan.is_empty()) {
            (Command::Scan, true) => {
                return Err(QesError::config("scan", "scan needs at least one axis"))
            }
            (Command::Solve | Command::OracleCompare, false) => {
                return Err(QesError::config(
                    "scan",
                    "scan axes are only valid for `scan`",
                ))
            }
            _ => {}
        }
        let mut seen = BTreeSet::new();
        for axis in &self.scan {
            let target = axis.target()?;
            axis.points()?;
            if !seen.insert(target) {
                return Err(QesError::config(
                    "scan",
                    format!("axis `{}` given twice", axis.name),
                ));
            }
            if let AxisTarget::Param(p) = target {
                if p == free {
                    return Err(QesError::config(
                        "scan",
                        format!("cannot scan the free parameter `{p}`"),
                    ));
                }
                if !kind.params().contains(&p) {
                    return Err(QesError::config(
                        "scan",
                        format!("`{p}` is not a parameter of {kind}"),
                    ));
                }
            }
        }
        for &p in kind.params() {
            if p != free && !spec.params.contains_key(&p) && !seen.contains(&AxisTarget::Param(p)) {
                return Err(QesError::config(
                    format!("params.{p}"),
                    format!("{kind} needs a value for `{p}`"),
                ));
            }
        }
        if self.scan.is_empty() {
            spec.validate(Some(free))
                .map_err(|e| QesError::config("params", e.to_string()))?;
        }
        Ok(())
    }

    /// Cartesian product of the scan axes, first axis slowest.
    pub fn scan_cells(&self) -> Result<Vec<Vec<(AxisTarget, f64)>>> {
        let mut cells: Vec<Vec<(AxisTarget, f64)>> = vec![Vec::new()];
        for axis in &self.scan {
            let target = axis.target()?;
            let pts = axis.points()?;
            cells = cells
                .into_iter()
                .flat_map(|c| {
                    pts.iter().map(move |&x| {
                        let mut c = c.clone();
                        c.push((target, x));
                        c
                    })
                })
                .collect();
        }
        Ok(cells)
    }
}
