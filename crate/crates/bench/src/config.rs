//! TOML campaign files.
//!
//! ```toml
//! problems = ["SMD1", "SMD6"]   # default: all twelve
//! dims = "5"                    # 5, 10, 20 or "p,q,r[,s]"
//! runs = 11
//! seed = 1                      # run k uses seed + k
//! pop = 30                      # default: preset population
//! threshold = 0.1               # solved threshold
//!
//! [solver]                      # any GAConfig field
//! omega_eta = { gaussian = { sigma = 1.0 } }
//! bounds = "resample"
//! max_ll_calls = 10000
//! ```

use std::path::Path;
use std::str::FromStr;

use serde::Deserialize;
use smd_core::{GAConfig, ProblemId};

use crate::campaign::RunSpec;
use crate::error::BenchError;
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignFile {
    pub problems: Option<Vec<String>>,
    pub dims: Option<String>,
    pub runs: Option<u64>,
    pub seed: Option<u64>,
    pub pop: Option<usize>,
    pub threshold: Option<f64>,
    pub solver: Option<GAConfig>,
}

impl CampaignFile {
    pub fn parse(text: &str) -> Result<Self, BenchError> {
        toml::from_str(text).map_err(|e| BenchError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        Self::parse(&text)
    }

    /// Applies the file's settings on top of `spec`.
    pub fn apply(&self, mut spec: RunSpec) -> Result<RunSpec, BenchError> {
        if let Some(names) = &self.problems {
            spec.problems = parse_problems(&names.join(","))?;
        }
        if let Some(d) = &self.dims {
            spec.preset = d.parse().map_err(|e: crate::preset::ParsePresetError| BenchError::Config(e.to_string()))?;
        }
        if let Some(r) = self.runs {
            spec.runs = r;
        }
        if let Some(s) = self.seed {
            spec.base_seed = s;
        }
        if self.pop.is_some() {
            spec.population = self.pop;
        }
        if let Some(t) = self.threshold {
            spec.solved_threshold = t;
        }
        if let Some(cfg) = self.solver {
            spec.solver = cfg;
        }
        Ok(spec)
    }
}

/// Comma separated problem names; `all` selects the whole suite.
pub fn parse_problems(list: &str) -> Result<Vec<ProblemId>, BenchError> {
    if list.trim().eq_ignore_ascii_case("all") {
        return Ok(ProblemId::ALL.to_vec());
    }
    let mut out: Vec<ProblemId> = list
        .split(',')
        .map(|s| ProblemId::from_str(s).map_err(|e| BenchError::Config(format!("{s:?}: {e}"))))
        .collect::<Result<_, _>>()?;
    out.sort();
    out.dedup();
    Ok(out)
}
