//! Independent checks shared by the core integration tests and the bench
//! acceptance target.
#![allow(dead_code)]

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use smd_core::kit::{compose, stackelberg_problem, Blocks, ComponentFunction, StackelbergParams, Terms};
use smd_core::{instantiate, solve, split, BilevelVector, Bounds, Dims, GAConfig, Interaction, OmegaEta, Interval, ProblemId, ProblemInstance};

/// Standard 5-dim split.
pub fn five_dim(id: ProblemId) -> Dims {
    if id == ProblemId::Smd6 {
        Dims::with_s(1, 0, 1, 2)
    } else {
        Dims::new(1, 2, 1)
    }
}

/// Smallest dims in a fixed candidate order that the problem accepts.
pub fn minimal(id: ProblemId) -> ProblemInstance {
    [Dims::new(1, 1, 1), Dims::new(1, 2, 1), Dims::with_s(1, 0, 1, 2), Dims::with_s(1, 1, 1, 2)]
        .into_iter()
        .find_map(|d| instantiate(id, d).ok())
        .expect("some small dims are valid")
}

pub fn optimum_gap(id: ProblemId) -> (f64, f64) {
    let inst = instantiate(id, five_dim(id)).unwrap();
    let opt = inst.known_optimum().unwrap();
    let out = inst.evaluate(&opt.x).unwrap();
    let expected = match id {
        ProblemId::Smd11 => (-1.0, 1.0),
        ProblemId::Smd10 | ProblemId::Smd12 => (opt.upper_objective, opt.lower_objective),
        _ => (0.0, 0.0),
    };
    ((out.upper_objective - expected.0).abs(), (out.lower_objective - expected.1).abs())
}

fn uniform(bounds: &Bounds, rng: &mut impl Rng) -> Vec<f64> {
    bounds
        .intervals
        .iter()
        .map(|iv| iv.clamp(iv.min_value() + (iv.max_value() - iv.min_value()) * rng.random::<f64>()))
        .collect()
}

struct LowerProbe<'a> {
    inst: &'a ProblemInstance,
    v: BilevelVector,
    evals: u64,
}

impl LowerProbe<'_> {
    /// Lower objective, or `None` when infeasible or outside the domain.
    fn f(&mut self, xl: &[f64]) -> Option<f64> {
        self.evals += 1;
        self.v.set_lower(xl);
        let out = self.inst.evaluate(&self.v).ok()?;
        (out.lower_violation() == 0.0).then_some(out.lower_objective)
    }
}

/// Compass search with step halving.
fn descend(probe: &mut LowerProbe<'_>, start: Vec<f64>, start_f: f64, widths: &[f64], step0: f64) -> f64 {
    let (mut x, mut fx) = (start, start_f);
    let mut step = step0;
    while step > 1e-10 {
        let mut moved = false;
        for i in 0..x.len() {
            for dir in [1.0, -1.0] {
                let mut y = x.clone();
                y[i] += dir * step * widths[i];
                if let Some(fy) = probe.f(&y) {
                    if fy < fx {
                        x = y;
                        fx = fy;
                        moved = true;
                    }
                }
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    fx
}

pub struct PsiReport {
    pub tested: usize,
    pub worst_improvement: f64,
    pub evals: u64,
}

/// Brute force (grid of at least 10^4 points, then local descent from the
/// best grid points and random starts) against the analytic lower optimum at
/// `samples` random upper vectors. Upper vectors whose reference point is not
/// lower-feasible are redrawn.
pub fn psi_oracle(id: ProblemId, samples: usize, seed: u64) -> PsiReport {
    let inst = minimal(id);
    let dims = *inst.dims();
    let lb = inst.lower_bounds().clone();
    let m = dims.lower_len();
    let per_axis = (1e4f64.powf(1.0 / m as f64)).ceil() as usize;
    let widths: Vec<f64> = lb.intervals.iter().map(|iv| iv.max_value() - iv.min_value()).collect();
    let axes: Vec<Vec<f64>> = lb
        .intervals
        .iter()
        .map(|iv| (0..per_axis).map(|k| iv.min_value() + (iv.max_value() - iv.min_value()) * k as f64 / (per_axis - 1) as f64).collect())
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = PsiReport { tested: 0, worst_improvement: f64::NEG_INFINITY, evals: 0 };
    let mut attempts = 0;
    while report.tested < samples {
        attempts += 1;
        assert!(attempts < samples * 100, "{id}: too few upper vectors with a feasible reference");
        let xu = uniform(inst.upper_bounds(), &mut rng);
        let psi = inst.psi_reference(&xu).unwrap();
        let v = split(&xu, &psi.lower(), &dims).unwrap();
        let out = inst.evaluate(&v).unwrap();
        if out.lower_violation() > 1e-9 {
            continue;
        }
        let reference = out.lower_objective;
        let mut probe = LowerProbe { inst: &inst, v: v.clone(), evals: 0 };

        let mut scored: Vec<(f64, Vec<f64>)> = Vec::new();
        let mut idx = vec![0usize; m];
        loop {
            let xl: Vec<f64> = idx.iter().zip(&axes).map(|(&k, a)| a[k]).collect();
            if let Some(f) = probe.f(&xl) {
                scored.push((f, xl));
            }
            let mut d = 0;
            while d < m {
                idx[d] += 1;
                if idx[d] < per_axis {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
            if d == m {
                break;
            }
        }
        scored.sort_by(|a, b| a.0.total_cmp(&b.0));
        scored.truncate(10);
        for _ in 0..20 {
            let xl = uniform(&lb, &mut rng);
            if let Some(f) = probe.f(&xl) {
                scored.push((f, xl));
            }
        }
        let step0 = 1.0 / (per_axis - 1) as f64;
        let mut best = f64::INFINITY;
        for (f, xl) in scored {
            best = best.min(descend(&mut probe, xl, f, &widths, step0));
        }
        report.worst_improvement = report.worst_improvement.max(reference - best);
        report.evals += probe.evals;
        report.tested += 1;
    }
    report
}

/// Checks the component-level sign pattern under perturbations of `xl1`
/// away from the reference; returns the number of violating samples.
pub fn component_sign_failures(id: ProblemId, samples: usize, seed: u64) -> usize {
    use ProblemId::*;
    let dims = if id == Smd6 { Dims::with_s(1, 1, 1, 2) } else { five_dim(id) };
    let inst = instantiate(id, dims).unwrap();
    let cooperative = inst.properties().unwrap().interaction == Interaction::Cooperative;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    for _ in 0..samples {
        let xu = uniform(inst.upper_bounds(), &mut rng);
        let psi = inst.psi_reference(&xu).unwrap();
        let base = split(&xu, &psi.lower(), &dims).unwrap();
        let mut moved = base.clone();
        for x in moved.xl1.iter_mut().take(dims.q) {
            let size = 1e-3 + 0.1 * rng.random::<f64>();
            // SMD10/SMD12 sit on active cubic constraints; only the inward
            // direction stays feasible.
            let sign = if matches!(id, Smd10 | Smd12) || rng.random::<bool>() { -1.0 } else { 1.0 };
            *x += sign * size;
        }
        let (Ok(Some(a)), Ok(Some(b))) = (inst.components(&base), inst.components(&moved)) else {
            failures += 1;
            continue;
        };
        let upper_up = b.upper[1] > a.upper[1];
        let lower_up = b.lower[1] > a.lower[1];
        let ok = lower_up && if cooperative { upper_up } else { b.upper[1] < a.upper[1] };
        if !ok {
            failures += 1;
        }
    }
    failures
}

pub struct ValleyReport {
    pub max_lower_spread: f64,
    pub upper_varies: bool,
    pub origin_minimal: bool,
}

/// SMD6 lower objective along the paired valley.
pub fn smd6_valley(points: usize, seed: u64) -> ValleyReport {
    let dims = five_dim(ProblemId::Smd6);
    let inst = instantiate(ProblemId::Smd6, dims).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xu = uniform(inst.upper_bounds(), &mut rng);
    let psi = inst.psi_reference(&xu).unwrap();
    let origin = inst.evaluate(&split(&xu, &psi.lower(), &dims).unwrap()).unwrap();
    let iv = inst.lower_bounds().intervals[0];
    let mut report = ValleyReport { max_lower_spread: 0.0, upper_varies: false, origin_minimal: true };
    for _ in 0..points {
        let t = iv.min_value() + (iv.max_value() - iv.min_value()) * rng.random::<f64>();
        let mut v = split(&xu, &psi.lower(), &dims).unwrap();
        v.xl1[dims.q] = t;
        v.xl1[dims.q + 1] = t;
        let out = inst.evaluate(&v).unwrap();
        report.max_lower_spread = report.max_lower_spread.max((out.lower_objective - origin.lower_objective).abs());
        report.upper_varies |= out.upper_objective != origin.upper_objective;
        report.origin_minimal &= out.upper_objective >= origin.upper_objective;
    }
    report
}

pub fn stackelberg_sets() -> [StackelbergParams; 3] {
    let base = StackelbergParams {
        alpha: 10.0,
        beta: 1.0,
        delta_l: 1.0,
        gamma_l: 3.0,
        c_l: 0.0,
        delta_f: 1.0,
        gamma_f: 3.0,
        c_f: 0.0,
    };
    [
        base,
        StackelbergParams { alpha: 20.0, beta: 2.0, delta_l: 0.5, gamma_l: 2.0, c_l: 1.0, delta_f: 1.5, gamma_f: 4.0, c_f: 0.5, },
        StackelbergParams { alpha: 15.0, beta: 0.5, delta_l: 2.0, gamma_l: 1.0, c_l: 0.0, delta_f: 0.5, gamma_f: 5.0, c_f: 2.0 },
    ]
}

/// Solver settings for the duopoly: its optimum sits on the `Q = q_l + q_f`
/// ridge, which needs wider crossover steps and a tighter upper stop than the
/// suite defaults.
pub fn stackelberg_config() -> GAConfig {
    GAConfig { omega_eta: OmegaEta::Gaussian { sigma: 2.0 }, alpha_stop_upper: 1e-6, ..GAConfig::default() }
}

/// Seeds `1..=runs` on one parameter set; counts runs whose leader and
/// follower quantities are within `tol` of the closed form.
pub fn stackelberg_successes(params: StackelbergParams, runs: u64, tol: f64) -> usize {
    let inst = stackelberg_problem(params).unwrap();
    let opt = params.optimum();
    let cfg = stackelberg_config();
    (1..=runs)
        .filter(|&seed| {
            let res = solve(&inst, &cfg, seed).unwrap();
            let best = res.best.expect("budget allows evaluations");
            (best.upper[0] - opt.leader).abs() <= tol && (best.lower[0] - opt.follower).abs() <= tol
        })
        .count()
}

/// Composed SMD1-like problem whose lower term counts every objective
/// evaluation. Returns `(counted, ul_fe + ll_fe, ul_fe, ll_calls)`.
pub fn audited_run(seed: u64) -> (u64, u64, u64, u64) {
    let counter = Arc::new(AtomicU64::new(0));
    let c = Arc::clone(&counter);
    let sq = |s: &[f64]| s.iter().map(|x| x * x).sum::<f64>();
    let terms = Terms {
        upper1: ComponentFunction::new("F1", Blocks::XU1, move |a| sq(a.xu1)),
        upper2: ComponentFunction::new("F2", Blocks::XL1, move |a| sq(a.xl1)),
        upper3: ComponentFunction::new("F3", Blocks::XU2.union(Blocks::XL2), move |a| {
            a.xu2.iter().zip(a.xl2).map(|(u, l)| u * u + (u - l) * (u - l)).sum()
        }),
        lower1: ComponentFunction::new("f1", Blocks::XU1.union(Blocks::XU2), move |a| sq(a.xu1) + sq(a.xu2)),
        lower2: ComponentFunction::new("f2", Blocks::XL1, move |a| {
            c.fetch_add(1, Ordering::Relaxed);
            sq(a.xl1)
        }),
        lower3: ComponentFunction::new("f3", Blocks::XU2.union(Blocks::XL2), move |a| {
            a.xu2.iter().zip(a.xl2).map(|(u, l)| (u - l) * (u - l)).sum()
        }),
    };
    let dims = Dims::new(1, 2, 1);
    let box_ = |n| Bounds::from_blocks(&[(n, Interval::closed(-5.0, 10.0))]);
    let inst = compose(terms, box_(2), box_(3), dims).unwrap();
    let cfg = GAConfig { max_ll_calls: 300, ..GAConfig::default() };
    let res = solve(&inst, &cfg, seed).unwrap();
    (counter.load(Ordering::Relaxed), res.ul_fe + res.ll_fe, res.ul_fe, res.ll_calls)
}
