use serde::{Deserialize, Serialize};
use smd_core::{Dims, ProblemId};

use crate::campaign::{RunRecord, Termination, SOLVED_THRESHOLD};
use crate::error::BenchError;

/// Best, median and worst of a counter over completed runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Spread {
    pub best: u64,
    pub median: u64,
    pub worst: u64,
}

/// Cell marker: `x` when the median run ended at least the solved threshold
/// away from the optimum, `-` when no run found a feasible point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum Marker {
    #[default]
    #[serde(rename = "")]
    None,
    #[serde(rename = "x")]
    Far,
    #[serde(rename = "-")]
    Infeasible,
}

impl Marker {
    pub fn symbol(self) -> &'static str {
        match self {
            Marker::None => "",
            Marker::Far => "x",
            Marker::Infeasible => "-",
        }
    }
}

pub const LEGEND: &str = "x: median run ended with |F - F*| >= 0.1; -: no run reached a feasible point; \
worst_far: the worst run ended with |F - F*| >= 0.1; medians are lower medians over completed runs";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    #[serde(with = "crate::io::problem_name")]
    pub problem: ProblemId,
    pub dims: Dims,
    pub runs: usize,
    pub completed: usize,
    pub ll_fe: Option<Spread>,
    pub ul_fe: Option<Spread>,
    pub median_ul_accuracy: Option<f64>,
    pub median_ll_accuracy: Option<f64>,
    pub median_ll_calls: Option<u64>,
    /// Median LL evaluations over median LL calls.
    pub evals_per_call: Option<f64>,
    pub success_rate: f64,
    pub marker: Marker,
    pub worst_far: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryTable {
    pub rows: Vec<SummaryRow>,
}

/// Success rate as a whole percentage, truncated.
pub fn percent(rate: f64) -> String {
    format!("{}%", (rate * 100.0 + 1e-9).floor() as u32)
}

/// Middle element, or the lower of the two middle ones.
pub fn lower_median<T: Copy>(sorted: &[T]) -> Option<T> {
    if sorted.is_empty() {
        None
    } else {
        Some(sorted[(sorted.len() - 1) / 2])
    }
}

fn spread(mut xs: Vec<u64>) -> Option<Spread> {
    xs.sort_unstable();
    Some(Spread { best: *xs.first()?, median: lower_median(&xs)?, worst: *xs.last()? })
}

fn median_f64(mut xs: Vec<f64>) -> Option<f64> {
    xs.sort_by(f64::total_cmp);
    lower_median(&xs)
}

fn summarize_group(group: &[&RunRecord]) -> SummaryRow {
    let done: Vec<&RunRecord> = group.iter().copied().filter(|r| r.terminated != Termination::Failed).collect();
    let ll_fe = spread(done.iter().map(|r| r.ll_fe).collect());
    let ll_calls = spread(done.iter().map(|r| r.ll_calls).collect()).map(|s| s.median);
    let median_ul_accuracy = median_f64(done.iter().filter_map(|r| r.ul_accuracy).collect());
    let any_feasible = group.iter().any(|r| r.feasible);
    let marker = if !any_feasible {
        Marker::Infeasible
    } else if median_ul_accuracy.is_some_and(|a| a >= SOLVED_THRESHOLD) {
        Marker::Far
    } else {
        Marker::None
    };
    SummaryRow {
        problem: group[0].problem,
        dims: group[0].dims,
        runs: group.len(),
        completed: done.len(),
        ul_fe: spread(done.iter().map(|r| r.ul_fe).collect()),
        median_ul_accuracy,
        median_ll_accuracy: median_f64(done.iter().filter_map(|r| r.ll_accuracy).collect()),
        median_ll_calls: ll_calls,
        evals_per_call: match (ll_fe, ll_calls) {
            (Some(fe), Some(calls)) if calls > 0 => Some(fe.median as f64 / calls as f64),
            _ => None,
        },
        ll_fe,
        success_rate: group.iter().filter(|r| r.solved).count() as f64 / group.len() as f64,
        marker,
        worst_far: done.iter().any(|r| !r.feasible || r.ul_accuracy.is_none_or(|a| a >= SOLVED_THRESHOLD)),
    }
}

/// One row per `(problem, dims)`, in problem order.
pub fn summarize(records: &[RunRecord]) -> Result<SummaryTable, BenchError> {
    if records.is_empty() {
        return Err(BenchError::Empty);
    }
    let mut sorted: Vec<&RunRecord> = records.iter().collect();
    sorted.sort_by_key(|r| (r.problem, r.dims.p, r.dims.q, r.dims.r, r.dims.s, r.seed));
    let rows = sorted
        .chunk_by(|a, b| (a.problem, a.dims) == (b.problem, b.dims))
        .map(summarize_group)
        .collect();
    Ok(SummaryTable { rows })
}
