//! Variation, selection and termination primitives shared by both levels.

use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::Rng;
use rand_distr::StandardNormal;

use super::config::{AlphaMode, OmegaEta};
use crate::error::SolverError;
use crate::types::{Bounds, Level};

/// Relative floor on `|x_p - w|` in the as-printed crossover scale.
pub const PCX_FLOOR: f64 = 1e-10;

/// Variances below this are treated as zero when computing alpha.
pub const VAR_FLOOR: f64 = 1e-12;

/// Parent-centric crossover. `parents[index]` is the index parent; the first
/// two others, in slice order, are `p1` and `p2`. `widths` are the variable
/// ranges used by the as-printed singularity floor. The child is not clamped.
pub fn pcx<R: Rng + ?Sized>(
    parents: &[&[f64]],
    index: usize,
    omega_xi: f64,
    mode: OmegaEta,
    widths: &[f64],
    rng: &mut R,
) -> Result<Vec<f64>, SolverError> {
    if parents.len() < 3 || index >= parents.len() {
        return Err(SolverError::Config("pcx needs at least 3 parents"));
    }
    let m = parents[index].len();
    if parents.iter().any(|p| p.len() != m) || widths.len() != m {
        return Err(SolverError::ParentDimension);
    }
    let mut others = (0..parents.len()).filter(|&k| k != index);
    let (p1, p2) = (parents[others.next().unwrap()], parents[others.next().unwrap()]);
    let xp = parents[index];
    let inv = 1.0 / parents.len() as f64;
    let w: Vec<f64> = (0..m).map(|i| parents.iter().map(|p| p[i]).sum::<f64>() * inv).collect();

    let omega_eta = match mode {
        OmegaEta::AsPrinted => (0..m)
            .map(|i| {
                let floor = PCX_FLOOR * widths[i].max(f64::MIN_POSITIVE);
                m as f64 / libm::fabs(xp[i] - w[i]).max(floor)
            })
            .sum::<f64>(),
        OmegaEta::MeanAbsDistance => (0..m).map(|i| libm::fabs(xp[i] - w[i])).sum::<f64>() / m.max(1) as f64,
        OmegaEta::Gaussian { sigma } => sigma * rng.sample::<f64, _>(StandardNormal),
    };
    Ok((0..m)
        .map(|i| {
            let spread = p2[i] - p1[i];
            let step = if spread == 0.0 { 0.0 } else { omega_eta * spread / 2.0 };
            xp[i] + omega_xi * (xp[i] - w[i]) + step
        })
        .collect())
}

/// Bounded polynomial mutation. Each coordinate mutates with probability
/// `p_mut`; the result is clamped into `bounds`.
pub fn poly_mutate<R: Rng + ?Sized>(x: &mut [f64], bounds: &Bounds, p_mut: f64, eta_m: f64, rng: &mut R) {
    let exponent = 1.0 / (eta_m + 1.0);
    for (y, iv) in x.iter_mut().zip(&bounds.intervals) {
        if p_mut <= 0.0 || rng.random::<f64>() >= p_mut {
            continue;
        }
        let (lo, hi) = (iv.min_value(), iv.max_value());
        let width = hi - lo;
        if width <= 0.0 {
            *y = iv.clamp(*y);
            continue;
        }
        let yc = iv.clamp(*y);
        let (d1, d2) = ((yc - lo) / width, (hi - yc) / width);
        let u: f64 = rng.random();
        let dq = if u <= 0.5 {
            let v = 2.0 * u + (1.0 - 2.0 * u) * libm::pow(1.0 - d1, eta_m + 1.0);
            libm::pow(v, exponent) - 1.0
        } else {
            let v = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * libm::pow(1.0 - d2, eta_m + 1.0);
            1.0 - libm::pow(v, exponent)
        };
        *y = iv.clamp(yc + dq * width);
    }
}

/// An evaluated population member.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Individual {
    pub upper: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper_objective: f64,
    pub lower_objective: f64,
    /// Upper constraint violation plus the violation of the returned lower
    /// block, so a pair is feasible only when both levels are.
    pub upper_violation: f64,
    pub lower_violation: f64,
    pub upper_valid: bool,
    pub lower_valid: bool,
}

impl Individual {
    pub fn unevaluated(upper: Vec<f64>, lower: Vec<f64>) -> Self {
        Self {
            upper,
            lower,
            upper_objective: f64::NAN,
            lower_objective: f64::NAN,
            upper_violation: f64::NAN,
            lower_violation: f64::NAN,
            upper_valid: false,
            lower_valid: false,
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.upper_valid && self.upper_violation <= 0.0
    }

    fn key(&self, level: Level) -> Result<(f64, f64), SolverError> {
        match level {
            Level::Upper if self.upper_valid => Ok((self.upper_violation, self.upper_objective)),
            Level::Lower if self.lower_valid => Ok((self.lower_violation, self.lower_objective)),
            _ => Err(SolverError::Unevaluated(level)),
        }
    }
}

/// Feasibility-first order on `(violation, objective)`: `Less` means the
/// first argument is better.
pub fn compare_keys(a: (f64, f64), b: (f64, f64)) -> Ordering {
    let (va, fa) = a;
    let (vb, fb) = b;
    match (va > 0.0, vb > 0.0) {
        (false, true) => Ordering::Less,
        (true, false) => Ordering::Greater,
        (true, true) => va.total_cmp(&vb),
        (false, false) => fa.total_cmp(&fb),
    }
}

pub fn compare(a: &Individual, b: &Individual, level: Level) -> Result<Ordering, SolverError> {
    Ok(compare_keys(a.key(level)?, b.key(level)?))
}

/// Population variance of every coordinate.
pub fn variances<'a>(rows: impl IntoIterator<Item = &'a [f64]>, m: usize) -> Vec<f64> {
    let mut n = 0usize;
    let mut mean = alloc::vec![0.0; m];
    let mut m2 = alloc::vec![0.0; m];
    for row in rows {
        n += 1;
        for i in 0..m {
            let delta = row[i] - mean[i];
            mean[i] += delta / n as f64;
            m2[i] += delta * (row[i] - mean[i]);
        }
    }
    if n == 0 {
        return m2;
    }
    m2.iter().map(|s| s / n as f64).collect()
}

/// Variance-contraction measure. Coordinates whose initial variance is below
/// [`VAR_FLOOR`] are skipped; if none remain, returns 0.
pub fn alpha(var_now: &[f64], var_init: &[f64], mode: AlphaMode) -> f64 {
    let mut sum = 0.0;
    let mut count = 0usize;
    for (now, init) in var_now.iter().zip(var_init) {
        if *init < VAR_FLOOR {
            continue;
        }
        sum += now / init;
        count += 1;
    }
    match (count, mode) {
        (0, _) => 0.0,
        (_, AlphaMode::Normalized) => sum / count as f64,
        (_, AlphaMode::RawSum) => sum,
    }
}
