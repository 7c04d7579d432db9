//! Result records and their JSON/CSV encodings.
//!
//! Both encodings are written by hand so that key order is fixed and
//! every float carries 17 significant digits.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::Deserialize;

use crate::models::{ModelKind, Param};
use crate::{QesError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordStatus {
    Ok,
    /// No level was produced; `reason` says why.
    Unsolved,
    /// A level was produced but failed a check.
    Mismatch,
}

impl RecordStatus {
    pub fn name(self) -> &'static str {
        match self {
            RecordStatus::Ok => "ok",
            RecordStatus::Unsolved => "unsolved",
            RecordStatus::Mismatch => "mismatch",
        }
    }
}

impl FromStr for RecordStatus {
    type Err = QesError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ok" => Ok(RecordStatus::Ok),
            "unsolved" => Ok(RecordStatus::Unsolved),
            "mismatch" => Ok(RecordStatus::Mismatch),
            other => Err(QesError::config(
                "status",
                format!("unknown status `{other}`"),
            )),
        }
    }
}

/// One solved (or unsolvable) level. Optional fields are `null` when the
/// corresponding check did not run; `checks` lists the ones that did.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultRecord {
    pub index: usize,
    pub status: RecordStatus,
    pub reason: Option<String>,
    pub model: ModelKind,
    pub ell: i32,
    pub n: usize,
    pub free_param: Param,
    pub free_value: Option<f64>,
    pub params: BTreeMap<Param, f64>,
    pub energy: Option<f64>,
    pub roots: Vec<f64>,
    pub c0: Option<f64>,
    pub bae_residual: Option<f64>,
    pub constraint_residual: Option<f64>,
    pub oracle_c0_deviation: Option<f64>,
    pub fd_energy: Option<f64>,
    pub fd_deviation: Option<f64>,
    pub fd_refined_deviation: Option<f64>,
    pub fd_node_count: Option<usize>,
    pub node_count: Option<usize>,
    pub checks: String,
    pub wall_time: Option<f64>,
}

/// One BAE level next to one invariant-matrix eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub model: ModelKind,
    pub ell: i32,
    pub n: usize,
    pub level: usize,
    pub free_param: Param,
    pub free_value: f64,
    pub bae_c0: f64,
    pub oracle_index: usize,
    pub oracle_c0_re: f64,
    pub oracle_c0_im: f64,
    pub c0_deviation: f64,
    pub root_distance: Option<f64>,
    pub oracle_all_real: bool,
    pub matched: bool,
}

/// A typed cell shared by both encoders.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Null,
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
    Floats(Vec<f64>),
    Params(BTreeMap<Param, f64>),
}

pub trait Tabular {
    const COLUMNS: &'static [&'static str];
    fn cells(&self) -> Vec<Cell>;
}

fn opt_f(x: Option<f64>) -> Cell {
    x.map_or(Cell::Null, Cell::Float)
}

fn opt_u(x: Option<usize>) -> Cell {
    x.map_or(Cell::Null, |v| Cell::Int(v as i64))
}

impl Tabular for ResultRecord {
    const COLUMNS: &'static [&'static str] = &[
        "index",
        "status",
        "reason",
        "model",
        "ell",
        "n",
        "free_param",
        "free_value",
        "params",
        "energy",
        "roots",
        "c0",
        "bae_residual",
        "constraint_residual",
        "oracle_c0_deviation",
        "fd_energy",
        "fd_deviation",
        "fd_refined_deviation",
        "fd_node_count",
        "node_count",
        "checks",
        "wall_time",
    ];

    fn cells(&self) -> Vec<Cell> {
        vec![
            Cell::Int(self.index as i64),
            Cell::Str(self.status.name().into()),
            self.reason.clone().map_or(Cell::Null, Cell::Str),
            Cell::Str(self.model.name().into()),
            Cell::Int(self.ell as i64),
            Cell::Int(self.n as i64),
            Cell::Str(self.free_param.name().into()),
            opt_f(self.free_value),
            Cell::Params(self.params.clone()),
            opt_f(self.energy),
            Cell::Floats(self.roots.clone()),
            opt_f(self.c0),
            opt_f(self.bae_residual),
            opt_f(self.constraint_residual),
            opt_f(self.oracle_c0_deviation),
            opt_f(self.fd_energy),
            opt_f(self.fd_deviation),
            opt_f(self.fd_refined_deviation),
            opt_u(self.fd_node_count),
            opt_u(self.node_count),
            Cell::Str(self.checks.clone()),
            opt_f(self.wall_time),
        ]
    }
}

impl Tabular for ComparisonRow {
    const COLUMNS: &'static [&'static str] = &[
        "model",
        "ell",
        "n",
        "level",
        "free_param",
        "free_value",
        "bae_c0",
        "oracle_index",
        "oracle_c0_re",
        "oracle_c0_im",
        "c0_deviation",
        "root_distance",
        "oracle_all_real",
        "matched",
    ];

    fn cells(&self) -> Vec<Cell> {
        vec![
            Cell::Str(self.model.name().into()),
            Cell::Int(self.ell as i64),
            Cell::Int(self.n as i64),
            Cell::Int(self.level as i64),
            Cell::Str(self.free_param.name().into()),
            Cell::Float(self.free_value),
            Cell::Float(self.bae_c0),
            Cell::Int(self.oracle_index as i64),
            Cell::Float(self.oracle_c0_re),
            Cell::Float(self.oracle_c0_im),
            Cell::Float(self.c0_deviation),
            opt_f(self.root_distance),
            Cell::Bool(self.oracle_all_real),
            Cell::Bool(self.matched),
        ]
    }
}

/// 17 significant digits, enough to recover every double exactly.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn json_float(x: f64) -> String {
    if x.is_finite() {
        format_float(x)
    } else {
        "null".into()
    }
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("strings serialize")
}

fn json_cell(c: &Cell) -> String {
    match c {
        Cell::Null => "null".into(),
        Cell::Bool(b) => b.to_string(),
        Cell::Int(i) => i.to_string(),
        Cell::Float(x) => json_float(*x),
        Cell::Str(s) => json_string(s),
        Cell::Floats(v) => {
            let items: Vec<String> = v.iter().map(|&x| json_float(x)).collect();
            format!("[{}]", items.join(", "))
        }
        Cell::Params(m) => {
            let items: Vec<String> = m
                .iter()
                .map(|(p, &v)| format!("{}: {}", json_string(p.name()), json_float(v)))
                .collect();
            format!("{{{}}}", items.join(", "))
        }
    }
}

/// A JSON array with one object per line.
pub fn to_json<T: Tabular>(rows: &[T]) -> String {
    if rows.is_empty() {
        return "[]\n".into();
    }
    let mut out = String::from("[\n");
    for (i, row) in rows.iter().enumerate() {
        let fields: Vec<String> = T::COLUMNS
            .iter()
            .zip(row.cells())
            .map(|(k, c)| format!("{}: {}", json_string(k), json_cell(&c)))
            .collect();
        let sep = if i + 1 == rows.len() { "" } else { "," };
        let _ = writeln!(out, "  {{{}}}{sep}", fields.join(", "));
    }
    out.push_str("]\n");
    out
}

fn csv_cell(c: &Cell) -> String {
    match c {
        Cell::Null => String::new(),
        Cell::Bool(b) => b.to_string(),
        Cell::Int(i) => i.to_string(),
        Cell::Float(x) => format_float(*x),
        Cell::Str(s) => s.clone(),
        Cell::Floats(v) => v
            .iter()
            .map(|&x| format_float(x))
            .collect::<Vec<_>>()
            .join(";"),
        Cell::Params(m) => m
            .iter()
            .map(|(p, &v)| format!("{}={}", p.name(), format_float(v)))
            .collect::<Vec<_>>()
            .join(";"),
    }
}

/// Header row followed by one row per record, columns in field order.
pub fn to_csv<T: Tabular>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(T::COLUMNS)?;
    for row in rows {
        w.write_record(row.cells().iter().map(csv_cell))?;
    }
    let bytes = w.into_inner().map_err(|e| QesError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn records_from_json(text: &str) -> Result<Vec<ResultRecord>> {
    serde_json::from_str(text).map_err(|e| {
        QesError::config(
            format!("records line {}, column {}", e.line(), e.column()),
            e.to_string(),
        )
    })
}

pub fn records_from_csv(text: &str) -> Result<Vec<ResultRecord>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr.headers()?.clone();
    if header.iter().ne(ResultRecord::COLUMNS.iter().copied()) {
        return Err(QesError::config("records header", "unexpected CSV columns"));
    }
    let mut out = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = row + 2;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let err = |i: usize, m: String| {
            QesError::config(
                format!("records line {line}, column `{}`", ResultRecord::COLUMNS[i]),
                m,
            )
        };
        let parse_f = |i: usize, s: &str| {
            s.parse::<f64>()
                .map_err(|_| err(i, format!("`{s}` is not a number")))
        };
        let opt_f = |i: usize| -> Result<Option<f64>> {
            let s = field(i);
            if s.is_empty() {
                Ok(None)
            } else {
                parse_f(i, s).map(Some)
            }
        };
        let int = |i: usize| -> Result<i64> {
            field(i)
                .parse::<i64>()
                .map_err(|_| err(i, format!("`{}` is not an integer", field(i))))
        };
        let opt_u = |i: usize| -> Result<Option<usize>> {
            if field(i).is_empty() {
                Ok(None)
            } else {
                Ok(Some(int(i)? as usize))
            }
        };
        let roots = if field(10).is_empty() {
            Vec::new()
        } else {
            field(10)
                .split(';')
                .map(|s| parse_f(10, s))
                .collect::<Result<_>>()?
        };
        let mut params = BTreeMap::new();
        if !field(8).is_empty() {
            for kv in field(8).split(';') {
                let (k, v) = kv
                    .split_once('=')
                    .ok_or_else(|| err(8, format!("`{kv}` is not k=v")))?;
                let p = Param::from_str(k).map_err(|e| err(8, e.to_string()))?;
                params.insert(p, parse_f(8, v)?);
            }
        }
        out.push(ResultRecord {
            index: int(0)? as usize,
            status: field(1)
                .parse()
                .map_err(|e: QesError| err(1, e.to_string()))?,
            reason: Some(field(2).to_string()).filter(|s| !s.is_empty()),
            model: field(3)
                .parse()
                .map_err(|e: QesError| err(3, e.to_string()))?,
            ell: int(4)? as i32,
            n: int(5)? as usize,
            free_param: Param::from_str(field(6)).map_err(|e| err(6, e.to_string()))?,
            free_value: opt_f(7)?,
            params,
            energy: opt_f(9)?,
            roots,
            c0: opt_f(11)?,
            bae_residual: opt_f(12)?,
            constraint_residual: opt_f(13)?,
            oracle_c0_deviation: opt_f(14)?,
            fd_energy: opt_f(15)?,
            fd_deviation: opt_f(16)?,
            fd_refined_deviation: opt_f(17)?,
            fd_node_count: opt_u(18)?,
            node_count: opt_u(19)?,
            checks: field(20).to_string(),
            wall_time: opt_f(21)?,
        });
    }
    Ok(out)
}

/// JSON if the text starts with `[`, CSV otherwise.
pub fn records_from_str(text: &str) -> Result<Vec<ResultRecord>> {
    if text.trim_start().starts_with('[') {
        records_from_json(text)
    } else {
        records_from_csv(text)
    }
}
