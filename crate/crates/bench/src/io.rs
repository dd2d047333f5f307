//! Versioned CSV and JSON files for run records and summary tables.
//!
//! Record CSV columns, in order: `schema_version, problem, p, q, r, s, seed,
//! ll_fe, ul_fe, ll_calls, upper_objective, lower_objective, ul_accuracy,
//! ll_accuracy, feasible, solved, terminated, wall_time_s`. Missing values are
//! empty cells.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use smd_core::{Dims, ProblemId};

use crate::campaign::{RunRecord, Termination};
use crate::error::BenchError;
use crate::paper::PaperRow;
use crate::stats::{Marker, Spread, SummaryRow, SummaryTable};

pub const SCHEMA_VERSION: u32 = 1;

pub const RECORD_COLUMNS: [&str; 18] = [
    "schema_version",
    "problem",
    "p",
    "q",
    "r",
    "s",
    "seed",
    "ll_fe",
    "ul_fe",
    "ll_calls",
    "upper_objective",
    "lower_objective",
    "ul_accuracy",
    "ll_accuracy",
    "feasible",
    "solved",
    "terminated",
    "wall_time_s",
];

/// Serde adapter writing problem ids as `SMD1`..`SMD12`.
pub mod problem_name {
    use super::*;

    pub fn serialize<S: serde::Serializer>(id: &ProblemId, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(id)
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> Result<ProblemId, D::Error> {
        let s = String::deserialize(d)?;
        ProblemId::from_str(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn from_path(path: &Path) -> Result<Format, BenchError> {
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => Ok(Format::Csv),
            Some("json") => Ok(Format::Json),
            _ => Err(BenchError::Format(format!("{}: expected a .csv or .json file", path.display()))),
        }
    }
}

impl FromStr for Format {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(BenchError::Format(format!("unknown format {s:?}"))),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct CsvRecord {
    schema_version: u32,
    #[serde(with = "problem_name")]
    problem: ProblemId,
    p: usize,
    q: usize,
    r: usize,
    s: usize,
    seed: u64,
    ll_fe: u64,
    ul_fe: u64,
    ll_calls: u64,
    upper_objective: Option<f64>,
    lower_objective: Option<f64>,
    ul_accuracy: Option<f64>,
    ll_accuracy: Option<f64>,
    feasible: bool,
    solved: bool,
    terminated: Termination,
    wall_time_s: f64,
}

impl From<&RunRecord> for CsvRecord {
    fn from(r: &RunRecord) -> Self {
        CsvRecord {
            schema_version: SCHEMA_VERSION,
            problem: r.problem,
            p: r.dims.p,
            q: r.dims.q,
            r: r.dims.r,
            s: r.dims.s,
            seed: r.seed,
            ll_fe: r.ll_fe,
            ul_fe: r.ul_fe,
            ll_calls: r.ll_calls,
            upper_objective: r.upper_objective,
            lower_objective: r.lower_objective,
            ul_accuracy: r.ul_accuracy,
            ll_accuracy: r.ll_accuracy,
            feasible: r.feasible,
            solved: r.solved,
            terminated: r.terminated,
            wall_time_s: r.wall_time_s,
        }
    }
}

impl From<CsvRecord> for RunRecord {
    fn from(c: CsvRecord) -> Self {
        RunRecord {
            problem: c.problem,
            dims: Dims::with_s(c.p, c.q, c.r, c.s),
            seed: c.seed,
            ll_fe: c.ll_fe,
            ul_fe: c.ul_fe,
            ll_calls: c.ll_calls,
            upper_objective: c.upper_objective,
            lower_objective: c.lower_objective,
            ul_accuracy: c.ul_accuracy,
            ll_accuracy: c.ll_accuracy,
            feasible: c.feasible,
            solved: c.solved,
            terminated: c.terminated,
            wall_time_s: c.wall_time_s,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Envelope<T> {
    schema_version: u32,
    #[serde(flatten)]
    body: T,
}

#[derive(Serialize, Deserialize)]
struct Records {
    records: Vec<RunRecord>,
}

#[derive(Deserialize)]
struct VersionOnly {
    schema_version: u32,
}

fn check_version(found: u32) -> Result<(), BenchError> {
    if found == SCHEMA_VERSION {
        Ok(())
    } else {
        Err(BenchError::SchemaVersion { found, expected: SCHEMA_VERSION })
    }
}

fn sorted(records: &[RunRecord]) -> Vec<&RunRecord> {
    let mut v: Vec<&RunRecord> = records.iter().collect();
    v.sort_by_key(|r| (r.problem, r.dims.p, r.dims.q, r.dims.r, r.dims.s, r.seed));
    v
}

/// Writes records sorted by `(problem, dims, seed)`.
pub fn write_records<W: Write>(records: &[RunRecord], format: Format, out: W) -> Result<(), BenchError> {
    let records = sorted(records);
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            if records.is_empty() {
                w.write_record(RECORD_COLUMNS)?;
            }
            for r in records {
                w.serialize(CsvRecord::from(r))?;
            }
            w.flush().map_err(csv::Error::from)?;
        }
        Format::Json => {
            let body = Records { records: records.into_iter().cloned().collect() };
            serde_json::to_writer_pretty(out, &Envelope { schema_version: SCHEMA_VERSION, body })?;
        }
    }
    Ok(())
}

/// Reads records; any row with a foreign schema version rejects the file.
pub fn read_records<R: Read>(input: R, format: Format) -> Result<Vec<RunRecord>, BenchError> {
    match format {
        Format::Csv => {
            let mut rd = csv::Reader::from_reader(input);
            let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
            if header != RECORD_COLUMNS {
                return Err(BenchError::Format(format!("unexpected CSV header {header:?}")));
            }
            let mut out = Vec::new();
            for row in rd.records() {
                let row = row?;
                let version: u32 = row.get(0).unwrap_or("").parse().map_err(|_| BenchError::Format("bad schema_version cell".into()))?;
                check_version(version)?;
                let rec: CsvRecord = row.deserialize(Some(&csv::StringRecord::from(header.clone())))?;
                out.push(rec.into());
            }
            Ok(out)
        }
        Format::Json => {
            let value: serde_json::Value = serde_json::from_reader(input)?;
            let v: VersionOnly = serde_json::from_value(value.clone())?;
            check_version(v.schema_version)?;
            let e: Envelope<Records> = serde_json::from_value(value)?;
            Ok(e.body.records)
        }
    }
}

pub fn export_records(records: &[RunRecord], path: &Path) -> Result<(), BenchError> {
    let format = Format::from_path(path)?;
    let file = File::create(path).map_err(|e| BenchError::io(path, e))?;
    write_records(records, format, BufWriter::new(file))
}

pub fn import_records(path: &Path) -> Result<Vec<RunRecord>, BenchError> {
    let format = Format::from_path(path)?;
    let file = File::open(path).map_err(|e| BenchError::io(path, e))?;
    read_records(BufReader::new(file), format)
}

/// Summary row with optional published reference values beside it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    #[serde(flatten)]
    pub measured: SummaryRow,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reference: Option<PaperRow>,
}

#[derive(Serialize)]
struct CsvTableRow {
    problem: String,
    p: usize,
    q: usize,
    r: usize,
    s: usize,
    runs: usize,
    completed: usize,
    ll_fe_best: Option<u64>,
    ll_fe_median: Option<u64>,
    ll_fe_worst: Option<u64>,
    ul_fe_best: Option<u64>,
    ul_fe_median: Option<u64>,
    ul_fe_worst: Option<u64>,
    median_ul_accuracy: Option<f64>,
    median_ll_accuracy: Option<f64>,
    median_ll_calls: Option<u64>,
    evals_per_call: Option<f64>,
    success_rate: f64,
    marker: &'static str,
    worst_far: bool,
}

#[derive(Serialize)]
struct CsvReference {
    ref_ll_fe_best: Option<u64>,
    ref_ll_fe_median: Option<u64>,
    ref_ll_fe_worst: Option<u64>,
    ref_ul_fe_best: Option<u64>,
    ref_ul_fe_median: Option<u64>,
    ref_ul_fe_worst: Option<u64>,
    ref_median_ul_accuracy: Option<f64>,
    ref_median_ll_accuracy: Option<f64>,
    ref_median_ll_calls: Option<u64>,
    ref_evals_per_call: Option<f64>,
    ref_marker: &'static str,
    ref_worst_far: Option<bool>,
    ref_fe_cell: Option<String>,
    ref_accuracy_cell: Option<String>,
}

fn split3(s: Option<Spread>) -> (Option<u64>, Option<u64>, Option<u64>) {
    (s.map(|s| s.best), s.map(|s| s.median), s.map(|s| s.worst))
}

fn csv_row(m: &SummaryRow) -> CsvTableRow {
    let (lb, lm, lw) = split3(m.ll_fe);
    let (ub, um, uw) = split3(m.ul_fe);
    CsvTableRow {
        problem: m.problem.to_string(),
        p: m.dims.p,
        q: m.dims.q,
        r: m.dims.r,
        s: m.dims.s,
        runs: m.runs,
        completed: m.completed,
        ll_fe_best: lb,
        ll_fe_median: lm,
        ll_fe_worst: lw,
        ul_fe_best: ub,
        ul_fe_median: um,
        ul_fe_worst: uw,
        median_ul_accuracy: m.median_ul_accuracy,
        median_ll_accuracy: m.median_ll_accuracy,
        median_ll_calls: m.median_ll_calls,
        evals_per_call: m.evals_per_call,
        success_rate: m.success_rate,
        marker: m.marker.symbol(),
        worst_far: m.worst_far,
    }
}

fn csv_reference(p: Option<&PaperRow>) -> CsvReference {
    let (lb, lm, lw) = split3(p.and_then(|p| p.ll_fe));
    let (ub, um, uw) = split3(p.and_then(|p| p.ul_fe));
    CsvReference {
        ref_ll_fe_best: lb,
        ref_ll_fe_median: lm,
        ref_ll_fe_worst: lw,
        ref_ul_fe_best: ub,
        ref_ul_fe_median: um,
        ref_ul_fe_worst: uw,
        ref_median_ul_accuracy: p.and_then(|p| p.ul_accuracy),
        ref_median_ll_accuracy: p.and_then(|p| p.ll_accuracy),
        ref_median_ll_calls: p.and_then(|p| p.ll_calls),
        ref_evals_per_call: p.and_then(|p| p.evals_per_call),
        ref_marker: p.map(|p| if p.infeasible { Marker::Infeasible.symbol() } else { "" }).unwrap_or(""),
        ref_worst_far: p.map(|p| p.worst_far),
        ref_fe_cell: p.map(|p| p.fe_cell.clone()),
        ref_accuracy_cell: p.and_then(|p| p.accuracy_cell.clone()),
    }
}

pub fn write_table<W: Write>(rows: &[TableRow], format: Format, out: W) -> Result<(), BenchError> {
    match format {
        Format::Csv => {
            let with_ref = rows.iter().any(|r| r.reference.is_some());
            let mut w = csv::Writer::from_writer(out);
            for row in rows {
                if with_ref {
                    w.serialize((csv_row(&row.measured), csv_reference(row.reference.as_ref())))?;
                } else {
                    w.serialize(csv_row(&row.measured))?;
                }
            }
            w.flush().map_err(csv::Error::from)?;
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Body<'a> {
                legend: &'static str,
                rows: &'a [TableRow],
            }
            let body = Body { legend: crate::stats::LEGEND, rows };
            serde_json::to_writer_pretty(out, &Envelope { schema_version: SCHEMA_VERSION, body })?;
        }
    }
    Ok(())
}

/// Pairs every summary row with its published counterpart, if requested.
pub fn table_rows(table: &SummaryTable, compare: bool) -> Vec<TableRow> {
    table
        .rows
        .iter()
        .map(|m| TableRow {
            measured: m.clone(),
            reference: if compare { crate::paper::lookup(m.problem, m.dims).cloned() } else { None },
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::tests::synthetic;

    fn sample() -> Vec<RunRecord> {
        let mut recs: Vec<_> = (1..=11).map(|k| synthetic(ProblemId::Smd1, k, 1000 + k * 7, Some(0.1 / k as f64 + 1e-17), true)).collect();
        recs[4].upper_objective = None;
        recs[4].ul_accuracy = None;
        recs[5].terminated = Termination::Failed;
        recs[6].wall_time_s = std::f64::consts::PI;
        recs
    }

    #[test]
    fn csv_round_trip() {
        let recs = sample();
        let mut buf = Vec::new();
        write_records(&recs, Format::Csv, &mut buf).unwrap();
        assert_eq!(read_records(&buf[..], Format::Csv).unwrap(), recs);
    }

    #[test]
    fn json_round_trip() {
        let recs = sample();
        let mut buf = Vec::new();
        write_records(&recs, Format::Json, &mut buf).unwrap();
        assert_eq!(read_records(&buf[..], Format::Json).unwrap(), recs);
    }

    #[test]
    fn csv_header_is_fixed() {
        let mut buf = Vec::new();
        write_records(&sample(), Format::Csv, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), RECORD_COLUMNS.join(","));
        let mut empty = Vec::new();
        write_records(&[], Format::Csv, &mut empty).unwrap();
        assert_eq!(String::from_utf8(empty).unwrap().trim_end(), RECORD_COLUMNS.join(","));
    }

    #[test]
    fn foreign_versions_are_rejected() {
        let mut buf = Vec::new();
        write_records(&sample(), Format::Json, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap().replacen("\"schema_version\": 1", "\"schema_version\": 9", 1);
        assert!(matches!(read_records(text.as_bytes(), Format::Json), Err(BenchError::SchemaVersion { found: 9, .. })));

        let mut buf = Vec::new();
        write_records(&sample(), Format::Csv, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
        lines[5] = lines[5].replacen('1', "2", 1);
        let text = lines.join("\n");
        assert!(matches!(read_records(text.as_bytes(), Format::Csv), Err(BenchError::SchemaVersion { found: 2, .. })));
    }

    #[test]
    fn files_by_extension() {
        let dir = std::env::temp_dir().join(format!("smd-io-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        for name in ["r.csv", "r.json"] {
            let path = dir.join(name);
            export_records(&sample(), &path).unwrap();
            assert_eq!(import_records(&path).unwrap(), sample());
        }
        assert!(export_records(&sample(), &dir.join("r.txt")).is_err());
        std::fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn table_outputs() {
        let table = crate::stats::summarize(&sample()).unwrap();
        let rows = table_rows(&table, true);
        assert!(rows[0].reference.is_some());
        let mut buf = Vec::new();
        write_table(&rows, Format::Csv, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().next().unwrap().ends_with("ref_fe_cell,ref_accuracy_cell"));
        let mut buf = Vec::new();
        write_table(&table_rows(&table, false), Format::Json, &mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["rows"][0]["problem"], "SMD1");
    }
}
