//! Published reference results, loaded from `data/reference_tables.toml`.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use smd_core::{Dims, ProblemId};

use crate::preset::DimPreset;
use crate::stats::Spread;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaperRow {
    /// Total variable count: 5, 10 or 20.
    pub dims: u32,
    #[serde(with = "crate::io::problem_name")]
    pub problem: ProblemId,
    /// Best, median, worst.
    #[serde(default)]
    pub ll_fe: Option<Spread>,
    #[serde(default)]
    pub ul_fe: Option<Spread>,
    #[serde(default)]
    pub worst_far: bool,
    pub infeasible: bool,
    #[serde(default)]
    pub ul_accuracy: Option<f64>,
    #[serde(default)]
    pub ll_accuracy: Option<f64>,
    #[serde(default)]
    pub ll_calls: Option<u64>,
    #[serde(default)]
    pub evals_per_call: Option<f64>,
    /// Where the evaluation counts were published.
    pub fe_cell: String,
    /// Where the accuracy columns were published.
    #[serde(default)]
    pub accuracy_cell: Option<String>,
}

#[derive(Deserialize)]
struct File {
    row: Vec<PaperRow>,
}

const DATA: &str = include_str!("../data/reference_tables.toml");

pub fn rows() -> &'static [PaperRow] {
    static ROWS: OnceLock<Vec<PaperRow>> = OnceLock::new();
    ROWS.get_or_init(|| toml::from_str::<File>(DATA).expect("bundled reference table parses").row)
}

pub fn get(problem: ProblemId, size: u32) -> Option<&'static PaperRow> {
    rows().iter().find(|r| r.problem == problem && r.dims == size)
}

/// Reference row for a measured `(problem, dims)` pair, when the dims match
/// a named preset.
pub fn lookup(problem: ProblemId, dims: Dims) -> Option<&'static PaperRow> {
    get(problem, DimPreset::named_for(problem, dims)?.size()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_is_complete() {
        assert_eq!(rows().len(), 36);
        for size in [5, 10, 20] {
            for id in ProblemId::ALL {
                let r = get(id, size).unwrap();
                assert_eq!(r.infeasible, r.ll_fe.is_none(), "{id} {size}");
                if let Some(s) = r.ll_fe {
                    assert!(s.best <= s.median && s.median <= s.worst);
                }
            }
        }
    }

    #[test]
    fn spot_values() {
        let r = get(ProblemId::Smd1, 5).unwrap();
        assert_eq!(r.ll_fe.unwrap().median, 375_488);
        assert_eq!(r.ul_accuracy, Some(0.000114));
        assert_eq!(get(ProblemId::Smd10, 5).unwrap().ul_accuracy, Some(0.034759));
        assert!(get(ProblemId::Smd6, 10).unwrap().worst_far);
        assert!(get(ProblemId::Smd9, 10).unwrap().infeasible);
        assert!(get(ProblemId::Smd7, 20).unwrap().infeasible);
        assert_eq!(lookup(ProblemId::Smd6, Dims::with_s(1, 0, 1, 2)).unwrap().dims, 5);
        assert!(lookup(ProblemId::Smd1, Dims::new(2, 2, 2)).is_none());
    }

    #[test]
    fn ratio_column_matches_medians() {
        // LL evals per call should be close to median LL FE over median UL FE
        for id in ProblemId::ALL {
            let r = get(id, 5).unwrap();
            let implied = r.ll_fe.unwrap().median as f64 / r.ul_fe.unwrap().median as f64;
            let printed = r.evals_per_call.unwrap();
            assert!((implied / printed - 1.0).abs() < 0.5, "{id}: {implied} vs {printed}");
        }
    }
}
