use std::io::Write;

use clap::ValueEnum;
use serde::Serialize;

use crate::bayes_factor::{BfMethod, BfResult};
use crate::error::{Error, Result};
use crate::evaluation::{ConsistencyRow, ErrorRow, Scenario};
use crate::linear::Dataset;
use crate::selection::{Method, PosteriorRow, Scheme};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

pub const SELECT_HEADER: &[&str] = &["rank", "model", "log_score", "probability"];
pub const BF_HEADER: &[&str] = &[
    "method",
    "i",
    "j",
    "n",
    "b",
    "log_bf_ij",
    "quad_nodes",
    "est_abs_error",
];
pub const SEARCH_HEADER: &[&str] = &["rank", "model", "log_score", "visits"];
pub const ERRORS_HEADER: &[&str] = &["j", "n", "method", "type1", "power", "lambda"];
pub const CONSISTENCY_HEADER: &[&str] = &["n", "median_posterior", "frac_top", "seed"];

fn num(v: f64) -> String {
    format!("{v}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn join_model(names: &[String]) -> String {
    names.join("+")
}

fn write_csv(out: &mut dyn Write, header: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(&r).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

#[derive(Serialize)]
struct ErrorRecord<'a> {
    kind: &'a str,
    message: &'a str,
    exit_code: i32,
}

#[derive(Serialize)]
struct ErrorEnvelope<'a> {
    error: ErrorRecord<'a>,
}

/// One-line JSON error record.
pub fn write_error(err: &mut dyn Write, kind: &str, message: &str, exit_code: i32) {
    let rec = ErrorEnvelope {
        error: ErrorRecord {
            kind,
            message,
            exit_code,
        },
    };
    if let Ok(s) = serde_json::to_string(&rec) {
        let _ = writeln!(err, "{s}");
    }
}

#[derive(Serialize)]
pub struct SelectRecord {
    pub rank: usize,
    pub model: Vec<String>,
    pub indices: Vec<usize>,
    pub log_score: f64,
    pub probability: f64,
}

impl SelectRecord {
    pub fn new(rank: usize, ds: &Dataset, row: &PosteriorRow) -> Self {
        SelectRecord {
            rank,
            model: ds.model_names(&row.model).iter().map(|s| s.to_string()).collect(),
            indices: row.model.indices().to_vec(),
            log_score: row.log_score,
            probability: row.probability,
        }
    }
}

#[derive(Serialize)]
pub struct SelectOutput {
    pub command: &'static str,
    pub scheme: Scheme,
    pub method: Method,
    pub n: usize,
    pub k: usize,
    pub rows: Vec<SelectRecord>,
}

impl SelectOutput {
    pub fn write(&self, format: Format, out: &mut dyn Write) -> Result<()> {
        match format {
            Format::Json => write_json(out, self),
            Format::Csv => write_csv(
                out,
                SELECT_HEADER,
                self.rows
                    .iter()
                    .map(|r| {
                        vec![
                            r.rank.to_string(),
                            join_model(&r.model),
                            num(r.log_score),
                            num(r.probability),
                        ]
                    })
                    .collect(),
            ),
        }
    }
}

#[derive(Serialize)]
pub struct BfRecord {
    pub method: BfMethod,
    pub log_bf_ij: f64,
    pub quad_nodes: usize,
    pub est_abs_error: f64,
}

impl From<BfResult> for BfRecord {
    fn from(r: BfResult) -> Self {
        BfRecord {
            method: r.method,
            log_bf_ij: r.log_bf_ij,
            quad_nodes: r.quad_nodes,
            est_abs_error: r.est_abs_error,
        }
    }
}

#[derive(Serialize)]
pub struct BfOutput {
    pub command: &'static str,
    pub n: usize,
    pub i: usize,
    pub j: usize,
    pub inner: Vec<String>,
    pub outer: Vec<String>,
    pub b: f64,
    pub results: Vec<BfRecord>,
}

impl BfOutput {
    pub fn write(&self, format: Format, out: &mut dyn Write) -> Result<()> {
        match format {
            Format::Json => write_json(out, self),
            Format::Csv => write_csv(
                out,
                BF_HEADER,
                self.results
                    .iter()
                    .map(|r| {
                        vec![
                            r.method.as_str().to_string(),
                            self.i.to_string(),
                            self.j.to_string(),
                            self.n.to_string(),
                            num(self.b),
                            num(r.log_bf_ij),
                            r.quad_nodes.to_string(),
                            num(r.est_abs_error),
                        ]
                    })
                    .collect(),
            ),
        }
    }
}

#[derive(Serialize)]
pub struct SearchRecord {
    pub rank: usize,
    pub model: Vec<String>,
    pub indices: Vec<usize>,
    pub log_score: f64,
    pub visits: u64,
}

#[derive(Serialize)]
pub struct SearchOutput {
    pub command: &'static str,
    pub method: Method,
    pub scheme: Scheme,
    pub seed: u64,
    pub chain_length: usize,
    pub acceptance_rate: f64,
    pub distinct_scored: usize,
    pub top: Vec<SearchRecord>,
}

impl SearchOutput {
    pub fn write(&self, format: Format, out: &mut dyn Write) -> Result<()> {
        match format {
            Format::Json => write_json(out, self),
            Format::Csv => write_csv(
                out,
                SEARCH_HEADER,
                self.top
                    .iter()
                    .map(|r| {
                        vec![
                            r.rank.to_string(),
                            join_model(&r.model),
                            num(r.log_score),
                            r.visits.to_string(),
                        ]
                    })
                    .collect(),
            ),
        }
    }
}

#[derive(Serialize)]
pub struct ErrorRateRecord {
    pub j: usize,
    pub n: usize,
    pub method: Method,
    pub type1: f64,
    pub power: Option<f64>,
    pub lambda: Option<f64>,
}

impl ErrorRateRecord {
    pub fn new(j: usize, method: Method, lambda: Option<f64>, row: &ErrorRow) -> Self {
        ErrorRateRecord {
            j,
            n: row.n,
            method,
            type1: row.type1,
            power: row.power,
            lambda,
        }
    }
}

#[derive(Serialize)]
pub struct ErrorsOutput {
    pub command: &'static str,
    pub rows: Vec<ErrorRateRecord>,
}

impl ErrorsOutput {
    pub fn write(&self, format: Format, out: &mut dyn Write) -> Result<()> {
        match format {
            Format::Json => write_json(out, self),
            Format::Csv => write_csv(
                out,
                ERRORS_HEADER,
                self.rows
                    .iter()
                    .map(|r| {
                        vec![
                            r.j.to_string(),
                            r.n.to_string(),
                            r.method.as_str().to_string(),
                            num(r.type1),
                            opt(r.power),
                            opt(r.lambda),
                        ]
                    })
                    .collect(),
            ),
        }
    }
}

#[derive(Serialize)]
pub struct ConsistencyOutput {
    pub command: &'static str,
    pub scenario: Scenario,
    pub method: Method,
    pub scheme: Scheme,
    pub replicates: usize,
    pub seed: u64,
    pub rows: Vec<ConsistencyRow>,
}

impl ConsistencyOutput {
    pub fn write(&self, format: Format, out: &mut dyn Write) -> Result<()> {
        match format {
            Format::Json => write_json(out, self),
            Format::Csv => write_csv(
                out,
                CONSISTENCY_HEADER,
                self.rows
                    .iter()
                    .map(|r| {
                        vec![
                            r.n.to_string(),
                            num(r.median_posterior),
                            num(r.frac_top),
                            r.seed.to_string(),
                        ]
                    })
                    .collect(),
            ),
        }
    }
}
