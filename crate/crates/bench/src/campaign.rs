use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use smd_core::solver::{solve_traced, TraceRow};
use smd_core::{instantiate, Dims, GAConfig, OptimumRecord, ProblemId, ProblemInstance, SolveResult, TerminatedBy};

use crate::error::BenchError;
use crate::preset::DimPreset;

/// Objective gap that counts as solved.
pub const SOLVED_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub problems: Vec<ProblemId>,
    pub preset: DimPreset,
    pub runs: u64,
    pub base_seed: u64,
    /// Overrides the preset population at both levels.
    pub population: Option<usize>,
    pub solver: GAConfig,
    pub solved_threshold: f64,
}

impl Default for RunSpec {
    fn default() -> Self {
        Self {
            problems: ProblemId::ALL.to_vec(),
            preset: DimPreset::Five,
            runs: 11,
            base_seed: 1,
            population: None,
            solver: GAConfig::default(),
            solved_threshold: SOLVED_THRESHOLD,
        }
    }
}

impl RunSpec {
    pub fn config(&self) -> GAConfig {
        let pop = self.population.unwrap_or_else(|| self.preset.population());
        GAConfig { upper_pop: pop, lower_pop: pop, ..self.solver }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.problems.is_empty() {
            return Err(BenchError::Spec("no problems selected".into()));
        }
        if self.runs == 0 {
            return Err(BenchError::Spec("runs must be positive".into()));
        }
        if !(self.solved_threshold >= 0.0) {
            return Err(BenchError::Spec("solved threshold must be non-negative".into()));
        }
        self.config().validate().map_err(|e| BenchError::Spec(e.to_string()))?;
        for &id in &self.problems {
            instantiate(id, self.preset.dims(id)).map_err(|e| BenchError::Spec(format!("{id}: {e}")))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Alpha,
    Budget,
    /// The solver returned an error.
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    #[serde(with = "crate::io::problem_name")]
    pub problem: ProblemId,
    pub dims: Dims,
    pub seed: u64,
    pub ll_fe: u64,
    pub ul_fe: u64,
    pub ll_calls: u64,
    pub upper_objective: Option<f64>,
    pub lower_objective: Option<f64>,
    pub ul_accuracy: Option<f64>,
    pub ll_accuracy: Option<f64>,
    pub feasible: bool,
    pub solved: bool,
    pub terminated: Termination,
    pub wall_time_s: f64,
}

impl RunRecord {
    /// Equality ignoring wall time.
    pub fn same_outcome(&self, other: &RunRecord) -> bool {
        RunRecord { wall_time_s: 0.0, ..self.clone() } == RunRecord { wall_time_s: 0.0, ..other.clone() }
    }
}

/// Absolute objective gaps `(|F - F*|, |f - f*|)` of the reported best pair.
pub fn accuracy(result: &SolveResult, opt: &OptimumRecord) -> Option<(f64, f64)> {
    let best = result.best.as_ref()?;
    Some(((best.upper_objective - opt.upper_objective).abs(), (best.lower_objective - opt.lower_objective).abs()))
}

fn record(
    id: ProblemId,
    inst: &ProblemInstance,
    seed: u64,
    outcome: Result<SolveResult, smd_core::SolverError>,
    threshold: f64,
    wall_time_s: f64,
) -> RunRecord {
    let base = RunRecord {
        problem: id,
        dims: *inst.dims(),
        seed,
        ll_fe: 0,
        ul_fe: 0,
        ll_calls: 0,
        upper_objective: None,
        lower_objective: None,
        ul_accuracy: None,
        ll_accuracy: None,
        feasible: false,
        solved: false,
        terminated: Termination::Failed,
        wall_time_s,
    };
    let Ok(res) = outcome else { return base };
    let opt = inst.known_optimum().expect("suite problems have known optima");
    let acc = accuracy(&res, &opt);
    let feasible = res.feasible();
    RunRecord {
        ll_fe: res.ll_fe,
        ul_fe: res.ul_fe,
        ll_calls: res.ll_calls,
        upper_objective: res.best.as_ref().map(|b| b.upper_objective),
        lower_objective: res.best.as_ref().map(|b| b.lower_objective),
        ul_accuracy: acc.map(|a| a.0),
        ll_accuracy: acc.map(|a| a.1),
        feasible,
        solved: feasible && acc.is_some_and(|a| a.0 <= threshold),
        terminated: match res.terminated_by {
            TerminatedBy::Alpha => Termination::Alpha,
            TerminatedBy::Budget => Termination::Budget,
        },
        ..base
    }
}

pub const TRACE_HEADER: &str = "generation,best_upper,best_lower,alpha_upper,ll_fe";

fn trace_line(row: &TraceRow) -> String {
    format!("{},{},{},{},{}", row.generation, row.best_upper, row.best_lower, row.alpha_upper, row.ll_fe)
}

/// File name of one run's trace inside a trace directory.
pub fn trace_file_name(id: ProblemId, seed: u64) -> String {
    format!("trace_{id}_seed{seed}.csv")
}

fn run_one(spec: &RunSpec, cfg: &GAConfig, id: ProblemId, inst: &ProblemInstance, k: u64, trace_dir: Option<&Path>) -> Result<RunRecord, BenchError> {
    let seed = spec.base_seed + k;
    let start = Instant::now();
    let outcome = match trace_dir {
        None => solve_traced(inst, cfg, seed, |_| {}),
        Some(dir) => {
            let path = dir.join(trace_file_name(id, seed));
            let mut out = BufWriter::new(File::create(&path).map_err(|e| BenchError::io(&path, e))?);
            let mut failure = writeln!(out, "{TRACE_HEADER}").err();
            let outcome = solve_traced(inst, cfg, seed, |row| {
                if failure.is_none() {
                    failure = writeln!(out, "{}", trace_line(row)).err();
                }
            });
            if let Some(e) = failure.or_else(|| out.flush().err()) {
                return Err(BenchError::io(&path, e));
            }
            outcome
        }
    };
    Ok(record(id, inst, seed, outcome, spec.solved_threshold, start.elapsed().as_secs_f64()))
}

/// All runs of a campaign, sorted by problem then seed. Run `k` of a
/// problem uses seed `base_seed + k`.
pub fn run_suite(spec: &RunSpec) -> Result<Vec<RunRecord>, BenchError> {
    run_suite_traced(spec, None)
}

/// [`run_suite`] that also writes one trace CSV per run into `trace_dir`.
pub fn run_suite_traced(spec: &RunSpec, trace_dir: Option<&Path>) -> Result<Vec<RunRecord>, BenchError> {
    spec.validate()?;
    if let Some(dir) = trace_dir {
        std::fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))?;
    }
    let cfg = spec.config();
    let instances: Vec<(ProblemId, ProblemInstance)> = spec
        .problems
        .iter()
        .map(|&id| (id, instantiate(id, spec.preset.dims(id)).expect("validated")))
        .collect();
    let jobs: Vec<(usize, u64)> = (0..instances.len()).flat_map(|i| (0..spec.runs).map(move |k| (i, k))).collect();
    let mut records = jobs
        .par_iter()
        .map(|&(i, k)| run_one(spec, &cfg, instances[i].0, &instances[i].1, k, trace_dir))
        .collect::<Result<Vec<_>, _>>()?;
    records.sort_by_key(|r| (r.problem, r.dims.p, r.dims.q, r.dims.r, r.dims.s, r.seed));
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(problems: Vec<ProblemId>, runs: u64) -> RunSpec {
        RunSpec {
            problems,
            runs,
            solver: GAConfig { max_ll_calls: 40, ..GAConfig::default() },
            ..RunSpec::default()
        }
    }

    #[test]
    fn one_run_is_accounted() {
        let recs = run_suite(&quick(vec![ProblemId::Smd1], 1)).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].ul_fe, recs[0].ll_calls);
        assert_eq!(recs[0].seed, 1);
        assert!(recs[0].ll_fe >= recs[0].ll_calls * 30);
    }

    #[test]
    fn campaigns_are_deterministic() {
        let spec = quick(vec![ProblemId::Smd2, ProblemId::Smd9], 3);
        let a = run_suite(&spec).unwrap();
        let b = run_suite(&spec).unwrap();
        assert_eq!(a.len(), 6);
        assert!(a.iter().zip(&b).all(|(x, y)| x.same_outcome(y)));
        assert_eq!(a.iter().map(|r| r.seed).collect::<Vec<_>>(), [1, 2, 3, 1, 2, 3]);
    }

    #[test]
    fn solved_implies_feasible_and_close() {
        for r in run_suite(&quick(vec![ProblemId::Smd1, ProblemId::Smd10], 2)).unwrap() {
            if r.solved {
                assert!(r.feasible && r.ul_accuracy.unwrap() <= SOLVED_THRESHOLD);
            }
        }
    }

    #[test]
    fn accuracy_is_absolute_gap() {
        let inst = instantiate(ProblemId::Smd11, DimPreset::Five.dims(ProblemId::Smd11)).unwrap();
        let opt = inst.known_optimum().unwrap();
        let mut res = smd_core::solve(&inst, &GAConfig { max_ll_calls: 1, ..GAConfig::default() }, 1).unwrap();
        let best = res.best.as_mut().unwrap();
        best.upper_objective = -0.99;
        best.lower_objective = opt.lower_objective;
        let (ul, ll) = accuracy(&res, &opt).unwrap();
        assert!((ul - 0.01).abs() < 1e-12);
        assert_eq!(ll, 0.0);
        res.best = None;
        assert_eq!(accuracy(&res, &opt), None);
    }

    #[test]
    fn traces_are_written() {
        let dir = std::env::temp_dir().join(format!("smd-trace-{}", std::process::id()));
        let recs = run_suite_traced(&quick(vec![ProblemId::Smd1], 1), Some(&dir)).unwrap();
        let text = std::fs::read_to_string(dir.join(trace_file_name(ProblemId::Smd1, 1))).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(TRACE_HEADER));
        let last: Vec<&str> = lines.last().unwrap().split(',').collect();
        assert_eq!(last[4].parse::<u64>().unwrap(), recs[0].ll_fe);
        std::fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn bad_specs_are_rejected() {
        assert!(run_suite(&RunSpec { runs: 0, ..RunSpec::default() }).is_err());
        assert!(run_suite(&RunSpec { problems: vec![], ..RunSpec::default() }).is_err());
        let tiny = RunSpec { preset: DimPreset::Custom(Dims::new(1, 1, 1)), problems: vec![ProblemId::Smd10], ..RunSpec::default() };
        assert!(run_suite(&tiny).is_err());
    }
}
