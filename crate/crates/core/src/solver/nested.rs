//! Nested steady-state GA: every upper-level candidate gets a full
//! lower-level run.

use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{BoundHandling, GAConfig};
use super::operators::{alpha, compare_keys, pcx, poly_mutate, variances, Individual};
use crate::error::SolverError;
use crate::problem::ProblemInstance;
use crate::types::{split, BilevelVector, Bounds, Level};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum TerminatedBy {
    Alpha,
    Budget,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowerResult {
    pub lower: Vec<f64>,
    pub objective: f64,
    pub violation: f64,
    pub evals: u64,
    pub generations: u64,
    pub terminated_by: TerminatedBy,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SolveResult {
    /// Best pair ever evaluated; `None` only when the budget allowed no
    /// lower-level run at all.
    pub best: Option<Individual>,
    pub ul_fe: u64,
    pub ll_fe: u64,
    pub ll_calls: u64,
    pub generations: u64,
    pub terminated_by: TerminatedBy,
    pub seed: u64,
}

impl SolveResult {
    pub fn feasible(&self) -> bool {
        self.best.as_ref().is_some_and(Individual::is_feasible)
    }
}

/// One line of the per-generation trace.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TraceRow {
    pub generation: u64,
    pub best_upper: f64,
    pub best_lower: f64,
    pub alpha_upper: f64,
    pub ll_fe: u64,
}

fn widths(bounds: &Bounds) -> Vec<f64> {
    bounds.intervals.iter().map(|iv| iv.max_value() - iv.min_value()).collect()
}

fn random_point<R: Rng + ?Sized>(bounds: &Bounds, rng: &mut R) -> Vec<f64> {
    bounds
        .intervals
        .iter()
        .map(|iv| {
            let (lo, hi) = (iv.min_value(), iv.max_value());
            iv.clamp(lo + (hi - lo) * rng.random::<f64>())
        })
        .collect()
}

/// Tournament over `2 mu` distinct members in `mu` disjoint pairs. Ties go
/// to the lower population index.
fn select<R: Rng + ?Sized>(keys: &[(f64, f64)], mu: usize, rng: &mut R) -> Vec<usize> {
    let picks = sample(rng, keys.len(), 2 * mu).into_vec();
    picks
        .chunks_exact(2)
        .map(|pair| {
            let (a, b) = (pair[0], pair[1]);
            match compare_keys(keys[a], keys[b]) {
                Ordering::Less => a,
                Ordering::Greater => b,
                Ordering::Equal => a.min(b),
            }
        })
        .collect()
}

/// `lambda` children, each parent serving as index parent in turn.
fn offspring<R: Rng + ?Sized>(
    rows: &[&[f64]],
    parents: &[usize],
    bounds: &Bounds,
    widths: &[f64],
    cfg: &GAConfig,
    rng: &mut R,
) -> Vec<Vec<f64>> {
    let chosen: Vec<&[f64]> = parents.iter().map(|&k| rows[k]).collect();
    (0..cfg.lambda)
        .map(|k| {
            let index = k % chosen.len();
            let mut child = if rng.random::<f64>() < cfg.p_cross {
                pcx(&chosen, index, cfg.omega_xi, cfg.omega_eta, widths, rng).expect("parents share one dimension")
            } else {
                chosen[index].to_vec()
            };
            let parent = chosen[index];
            for ((c, iv), &x) in child.iter_mut().zip(&bounds.intervals).zip(parent) {
                if cfg.bounds == BoundHandling::Resample && !iv.contains(*c) {
                    let edge = iv.clamp(*c);
                    *c = iv.clamp(x + (edge - x) * rng.random::<f64>());
                } else {
                    *c = iv.clamp(*c);
                }
            }
            poly_mutate(&mut child, bounds, cfg.p_mut, cfg.eta_m, rng);
            child
        })
        .collect()
}

/// Picks `r` random population slots, pools them with the offspring and
/// returns `(slot, source)` assignments where `source < n` is a population
/// member and `source >= n` is offspring `source - n`.
fn replacement<R: Rng + ?Sized>(
    keys: &[(f64, f64)],
    child_keys: &[(f64, f64)],
    r: usize,
    rng: &mut R,
) -> Vec<(usize, usize)> {
    let n = keys.len();
    let slots = sample(rng, n, r).into_vec();
    let mut pool: Vec<(usize, (f64, f64))> = slots.iter().map(|&s| (s, keys[s])).collect();
    pool.extend(child_keys.iter().enumerate().map(|(j, &k)| (n + j, k)));
    pool.sort_by(|a, b| compare_keys(a.1, b.1));
    slots.into_iter().zip(pool.into_iter().take(r).map(|(src, _)| src)).collect()
}

struct Scratch {
    v: BilevelVector,
    constraints: Vec<f64>,
}

impl Scratch {
    fn new(inst: &ProblemInstance, xu: &[f64]) -> Self {
        let dims = inst.dims();
        let mut v = BilevelVector::zeros(dims);
        v.set_upper(xu);
        Self { v, constraints: Vec::new() }
    }

    fn lower_key(&mut self, inst: &ProblemInstance, xl: &[f64]) -> (f64, f64) {
        self.v.set_lower(xl);
        let (f, vg) = inst.level_fitness(Level::Lower, &self.v, &mut self.constraints);
        (vg, f)
    }
}

/// Runs the lower-level GA at `xu`. With `warm`, that block replaces one of
/// the random initial members.
pub fn lower_optimize<R: Rng + ?Sized>(
    inst: &ProblemInstance,
    xu: &[f64],
    warm: Option<&[f64]>,
    cfg: &GAConfig,
    rng: &mut R,
) -> Result<LowerResult, SolverError> {
    let dims = inst.dims();
    if xu.len() != dims.upper_len() {
        return Err(SolverError::UpperLength { expected: dims.upper_len(), found: xu.len() });
    }
    let bounds = inst.lower_bounds();
    let w = widths(bounds);
    let m = dims.lower_len();
    let n = cfg.lower_pop;
    let mut scratch = Scratch::new(inst, xu);

    let mut pop: Vec<Vec<f64>> = (0..n).map(|_| random_point(bounds, rng)).collect();
    if let Some(seed) = warm {
        if seed.len() == m {
            pop[n - 1] = seed.iter().zip(&bounds.intervals).map(|(x, iv)| iv.clamp(*x)).collect();
        }
    }
    let mut keys: Vec<(f64, f64)> = pop.iter().map(|x| scratch.lower_key(inst, x)).collect();
    let mut evals = n as u64;
    let var0 = variances(pop.iter().map(Vec::as_slice), m);

    let mut generations = 0;
    let terminated_by = loop {
        if alpha(&variances(pop.iter().map(Vec::as_slice), m), &var0, cfg.alpha_mode) < cfg.alpha_stop_lower {
            break TerminatedBy::Alpha;
        }
        if generations >= cfg.max_lower_gens {
            break TerminatedBy::Budget;
        }
        generations += 1;
        let parents = select(&keys, cfg.mu, rng);
        let rows: Vec<&[f64]> = pop.iter().map(Vec::as_slice).collect();
        let children = offspring(&rows, &parents, bounds, &w, cfg, rng);
        let child_keys: Vec<(f64, f64)> = children.iter().map(|x| scratch.lower_key(inst, x)).collect();
        evals += children.len() as u64;
        let moves = replacement(&keys, &child_keys, cfg.r_repl, rng);
        let incoming: Vec<(Vec<f64>, (f64, f64))> = moves
            .iter()
            .map(|&(_, src)| if src < n { (pop[src].clone(), keys[src]) } else { (children[src - n].clone(), child_keys[src - n]) })
            .collect();
        for ((slot, _), (x, k)) in moves.into_iter().zip(incoming) {
            pop[slot] = x;
            keys[slot] = k;
        }
    };

    let best = (0..n).min_by(|&a, &b| compare_keys(keys[a], keys[b]).then(a.cmp(&b))).expect("non-empty population");
    Ok(LowerResult {
        lower: pop.swap_remove(best),
        objective: keys[best].1,
        violation: keys[best].0,
        evals,
        generations,
        terminated_by,
    })
}

struct Counters {
    ul_fe: u64,
    ll_fe: u64,
    ll_calls: u64,
}

impl Counters {
    fn exhausted(&self, cfg: &GAConfig) -> bool {
        self.ll_calls >= cfg.max_ll_calls || self.ll_fe >= cfg.max_ll_evals
    }
}

fn upper_key(ind: &Individual) -> (f64, f64) {
    (ind.upper_violation, ind.upper_objective)
}

/// Lower-level run plus upper evaluation of the combined vector.
fn evaluate_upper(
    inst: &ProblemInstance,
    xu: Vec<f64>,
    warm: Option<&[f64]>,
    cfg: &GAConfig,
    rng: &mut ChaCha8Rng,
    counters: &mut Counters,
    scratch: &mut Vec<f64>,
) -> Result<Individual, SolverError> {
    let low = lower_optimize(inst, &xu, warm, cfg, rng)?;
    counters.ll_calls += 1;
    counters.ll_fe += low.evals;
    let v = split(&xu, &low.lower, inst.dims()).map_err(|_| SolverError::UpperLength {
        expected: inst.dims().upper_len(),
        found: xu.len(),
    })?;
    let (upper_objective, upper_violation) = inst.level_fitness(Level::Upper, &v, scratch);
    counters.ul_fe += 1;
    Ok(Individual {
        upper: xu,
        lower: low.lower,
        upper_objective,
        lower_objective: low.objective,
        upper_violation: upper_violation + low.violation,
        lower_violation: low.violation,
        upper_valid: true,
        lower_valid: true,
    })
}

fn closest<'a>(pop: &'a [Individual], xu: &[f64]) -> Option<&'a [f64]> {
    let dist = |ind: &Individual| ind.upper.iter().zip(xu).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    pop.iter()
        .min_by(|a, b| dist(a).total_cmp(&dist(b)))
        .map(|ind| ind.lower.as_slice())
}

pub fn solve(inst: &ProblemInstance, cfg: &GAConfig, seed: u64) -> Result<SolveResult, SolverError> {
    solve_traced(inst, cfg, seed, |_| {})
}

/// [`solve`] with a callback after initialisation and every generation.
pub fn solve_traced(
    inst: &ProblemInstance,
    cfg: &GAConfig,
    seed: u64,
    mut trace: impl FnMut(&TraceRow),
) -> Result<SolveResult, SolverError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bounds = inst.upper_bounds();
    let w = widths(bounds);
    let m = inst.dims().upper_len();
    let mut counters = Counters { ul_fe: 0, ll_fe: 0, ll_calls: 0 };
    let mut scratch = Vec::new();
    let mut best: Option<Individual> = None;
    let consider = |ind: &Individual, best: &mut Option<Individual>| {
        let better = best.as_ref().is_none_or(|b| compare_keys(upper_key(ind), upper_key(b)) == Ordering::Less);
        if better {
            *best = Some(ind.clone());
        }
    };

    let mut pop: Vec<Individual> = Vec::with_capacity(cfg.upper_pop);
    let mut generations = 0;
    let finish = |best, counters: Counters, generations, terminated_by| SolveResult {
        best,
        ul_fe: counters.ul_fe,
        ll_fe: counters.ll_fe,
        ll_calls: counters.ll_calls,
        generations,
        terminated_by,
        seed,
    };

    let row = |generation, best: &Option<Individual>, a, ll_fe| {
        let b = best.as_ref().expect("population evaluated");
        TraceRow { generation, best_upper: b.upper_objective, best_lower: b.lower_objective, alpha_upper: a, ll_fe }
    };
    for _ in 0..cfg.upper_pop {
        if counters.exhausted(cfg) {
            if best.is_some() {
                trace(&row(0, &best, 1.0, counters.ll_fe));
            }
            return Ok(finish(best, counters, 0, TerminatedBy::Budget));
        }
        let xu = random_point(bounds, &mut rng);
        let ind = evaluate_upper(inst, xu, None, cfg, &mut rng, &mut counters, &mut scratch)?;
        consider(&ind, &mut best);
        pop.push(ind);
    }
    let var0 = variances(pop.iter().map(|i| i.upper.as_slice()), m);
    trace(&row(0, &best, 1.0, counters.ll_fe));

    let terminated_by = 'outer: loop {
        let a = alpha(&variances(pop.iter().map(|i| i.upper.as_slice()), m), &var0, cfg.alpha_mode);
        if generations > 0 {
            trace(&row(generations, &best, a, counters.ll_fe));
        }
        if a < cfg.alpha_stop_upper {
            break TerminatedBy::Alpha;
        }
        if generations >= cfg.max_ul_gens {
            break TerminatedBy::Budget;
        }
        generations += 1;

        let keys: Vec<(f64, f64)> = pop.iter().map(upper_key).collect();
        let parents = select(&keys, cfg.mu, &mut rng);
        let rows: Vec<&[f64]> = pop.iter().map(|i| i.upper.as_slice()).collect();
        let uppers = offspring(&rows, &parents, bounds, &w, cfg, &mut rng);
        let mut children = Vec::with_capacity(uppers.len());
        for xu in uppers {
            if counters.exhausted(cfg) {
                // the cut-short generation still gets a row
                trace(&row(generations, &best, a, counters.ll_fe));
                break 'outer TerminatedBy::Budget;
            }
            let warm = closest(&pop, &xu).map(<[f64]>::to_vec);
            let child = evaluate_upper(inst, xu, warm.as_deref(), cfg, &mut rng, &mut counters, &mut scratch)?;
            consider(&child, &mut best);
            children.push(child);
        }
        let child_keys: Vec<(f64, f64)> = children.iter().map(upper_key).collect();
        let n = pop.len();
        let moves = replacement(&keys, &child_keys, cfg.r_repl, &mut rng);
        let incoming: Vec<Individual> =
            moves.iter().map(|&(_, src)| if src < n { pop[src].clone() } else { children[src - n].clone() }).collect();
        for ((slot, _), ind) in moves.into_iter().zip(incoming) {
            pop[slot] = ind;
        }
    };
    Ok(finish(best, counters, generations, terminated_by))
}
