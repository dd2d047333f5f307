//! The SMD1–SMD12 test problems.
//!
//! Every problem splits each level objective into three terms:
//! `F = F1(xu1) + F2(xl1) + F3(xu2, xl2)` and
//! `f = f1(xu1, xu2) + f2(xl1) + f3(xu2, xl2)`. The `f3` interaction term is
//! always `Σ (u(xu2) - T(xl2))²` for a problem specific input map `u` and
//! link `T`, which makes the lower-level optimal `xl2` equal to `T⁻¹(u(xu2))`.

use alloc::vec::Vec;
use core::f64::consts::{E, FRAC_PI_2, PI};
use core::fmt;
use core::str::FromStr;

use libm::{atan, cbrt, cos, exp, fabs, floor, log, sqrt, tan};

use crate::error::InstantiateError;
use crate::problem::{Components, Interaction, Model, OptimumRecord, ProblemInstance, Properties, PsiReference, PsiSet};
use crate::types::{Bounds, BilevelVector, ConstraintSubset, Dims, Interval};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ProblemId {
    Smd1,
    Smd2,
    Smd3,
    Smd4,
    Smd5,
    Smd6,
    Smd7,
    Smd8,
    Smd9,
    Smd10,
    Smd11,
    Smd12,
}

impl ProblemId {
    pub const ALL: [ProblemId; 12] = [
        ProblemId::Smd1,
        ProblemId::Smd2,
        ProblemId::Smd3,
        ProblemId::Smd4,
        ProblemId::Smd5,
        ProblemId::Smd6,
        ProblemId::Smd7,
        ProblemId::Smd8,
        ProblemId::Smd9,
        ProblemId::Smd10,
        ProblemId::Smd11,
        ProblemId::Smd12,
    ];

    /// 1-based problem number.
    pub fn number(self) -> usize {
        self as usize + 1
    }

    pub fn from_number(n: usize) -> Option<Self> {
        Self::ALL.get(n.checked_sub(1)?).copied()
    }

    pub fn is_constrained(self) -> bool {
        self.number() >= 9
    }

    /// Whether the printed formulas contain `q - 1` terms.
    fn needs_two_xl1(self) -> bool {
        matches!(self, ProblemId::Smd5 | ProblemId::Smd8 | ProblemId::Smd10 | ProblemId::Smd12)
    }
}

impl fmt::Display for ProblemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SMD{}", self.number())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseProblemIdError;

impl fmt::Display for ParseProblemIdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("expected a problem name SMD1..SMD12")
    }
}

impl core::error::Error for ParseProblemIdError {}

impl FromStr for ProblemId {
    type Err = ParseProblemIdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let digits = s
            .strip_prefix("SMD")
            .or_else(|| s.strip_prefix("smd"))
            .ok_or(ParseProblemIdError)?;
        digits
            .parse::<usize>()
            .ok()
            .and_then(ProblemId::from_number)
            .ok_or(ParseProblemIdError)
    }
}

/// How `xu2` enters the interaction term.
#[derive(Debug, Clone, Copy)]
enum Input {
    Plain,
    Square,
    Abs,
}

impl Input {
    fn apply(self, x: f64) -> f64 {
        match self {
            Input::Plain => x,
            Input::Square => x * x,
            Input::Abs => fabs(x),
        }
    }
}

/// Transform applied to `xl2` inside the interaction term.
#[derive(Debug, Clone, Copy)]
enum Link {
    Tan,
    Ln,
    Ln1p,
    Square,
    Identity,
    Cube,
}

impl Link {
    fn apply(self, x: f64) -> f64 {
        match self {
            Link::Tan => tan(x),
            Link::Ln => log(x),
            Link::Ln1p => log(1.0 + x),
            Link::Square => x * x,
            Link::Identity => x,
            Link::Cube => x * x * x,
        }
    }

    /// A preimage of `u`. For `Square` this is the non-negative root.
    fn invert(self, u: f64) -> f64 {
        match self {
            Link::Tan => atan(u),
            Link::Ln => exp(u),
            Link::Ln1p => exp(u) - 1.0,
            Link::Square => sqrt(fabs(u)),
            Link::Identity => u,
            Link::Cube => cbrt(u),
        }
    }
}

fn interaction(id: ProblemId) -> (Input, Link) {
    use ProblemId::*;
    match id {
        Smd1 | Smd10 | Smd12 => (Input::Plain, Link::Tan),
        Smd2 | Smd7 | Smd11 => (Input::Plain, Link::Ln),
        Smd3 => (Input::Square, Link::Tan),
        Smd4 => (Input::Abs, Link::Ln1p),
        Smd5 => (Input::Abs, Link::Square),
        Smd6 => (Input::Plain, Link::Identity),
        Smd8 => (Input::Plain, Link::Cube),
        Smd9 => (Input::Plain, Link::Ln1p),
    }
}

fn sum_sq(xs: &[f64]) -> f64 {
    xs.iter().map(|x| x * x).sum()
}

fn sum_sq_shift(xs: &[f64], c: f64) -> f64 {
    xs.iter().map(|x| (x - c) * (x - c)).sum()
}

fn rastrigin(xs: &[f64]) -> f64 {
    xs.len() as f64 + xs.iter().map(|&x| x * x - cos(2.0 * PI * x)).sum::<f64>()
}

fn rosenbrock(xs: &[f64]) -> f64 {
    xs.windows(2)
        .map(|w| {
            let a = w[1] - w[0] * w[0];
            let b = w[0] - 1.0;
            a * a + b * b
        })
        .sum()
}

fn griewank(xs: &[f64]) -> f64 {
    let prod: f64 = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| cos(x / sqrt((i + 1) as f64)))
        .product();
    1.0 + sum_sq(xs) / 400.0 - prod
}

fn ackley(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let n = xs.len() as f64;
    let a = sum_sq(xs) / n;
    let b = xs.iter().map(|&x| cos(2.0 * PI * x)).sum::<f64>() / n;
    20.0 + E - 20.0 * exp(-0.2 * sqrt(a)) - exp(b)
}

/// `Σ (u(xu2) - T(xl2))²`
fn link_residual_sq(id: ProblemId, xu2: &[f64], xl2: &[f64]) -> f64 {
    let (input, link) = interaction(id);
    xu2.iter()
        .zip(xl2)
        .map(|(&u, &l)| {
            let d = input.apply(u) - link.apply(l);
            d * d
        })
        .sum()
}

/// The six objective terms of an SMD problem at `v`.
pub(crate) fn components(id: ProblemId, dims: &Dims, v: &BilevelVector) -> Components {
    use ProblemId::*;
    let (xu1, xu2, xl1, xl2) = (&v.xu1[..], &v.xu2[..], &v.xl1[..], &v.xl2[..]);
    let f3 = link_residual_sq(id, xu2, xl2);

    let upper1 = match id {
        Smd7 => griewank(xu1),
        Smd8 => ackley(xu1),
        Smd10 | Smd12 => sum_sq_shift(xu1, 2.0),
        _ => sum_sq(xu1),
    };
    let lower1 = match id {
        Smd7 => xu1.iter().map(|x| x * x * x).sum(),
        Smd8 => xu1.iter().map(|&x| fabs(x)).sum(),
        _ => sum_sq(xu1),
    };
    let (upper2, lower2) = match id {
        Smd1 => (sum_sq(xl1), sum_sq(xl1)),
        Smd2 | Smd7 | Smd9 | Smd11 => (-sum_sq(xl1), sum_sq(xl1)),
        Smd3 => (sum_sq(xl1), rastrigin(xl1)),
        Smd4 => (-sum_sq(xl1), rastrigin(xl1)),
        Smd5 | Smd8 => {
            let r = rosenbrock(xl1);
            (-r, r)
        }
        Smd6 => {
            let (head, extra) = xl1.split_at(dims.q);
            let pairs: f64 = extra
                .chunks_exact(2)
                .map(|c| (c[1] - c[0]) * (c[1] - c[0]))
                .sum();
            (-sum_sq(head) + sum_sq(extra), sum_sq(head) + pairs)
        }
        Smd10 | Smd12 => (sum_sq(xl1), sum_sq_shift(xl1, 2.0)),
    };
    let upper3 = match id {
        Smd1 | Smd3 => sum_sq(xu2) + f3,
        Smd10 => sum_sq_shift(xu2, 2.0) - f3,
        Smd12 => sum_sq_shift(xu2, 2.0) + xl2.iter().map(|&x| tan(fabs(x))).sum::<f64>() - f3,
        _ => sum_sq(xu2) - f3,
    };
    Components {
        upper: [upper1, upper2, upper3],
        lower: [lower1, lower2, f3],
    }
}

/// `x_j - Σ_{i≠j} x_i³ - Σ others³` for every `j`, the scalable cubic constraints.
fn cubic_constraints(own: &[f64], others: &[f64], out: &mut Vec<f64>) {
    let own_cubes: f64 = own.iter().map(|x| x * x * x).sum();
    let other_cubes: f64 = others.iter().map(|x| x * x * x).sum();
    for &x in own {
        out.push(x - (own_cubes - x * x * x) - other_cubes);
    }
}

/// `S/a - floor(S/a + 0.5/b)` with `a = b = 1`.
fn annulus(s: f64) -> f64 {
    const A: f64 = 1.0;
    const B: f64 = 1.0;
    s / A - floor(s / A + 0.5 / B)
}

pub(crate) fn upper_constraints(id: ProblemId, dims: &Dims, v: &BilevelVector, out: &mut Vec<f64>) {
    use ProblemId::*;
    match id {
        Smd9 => out.push(annulus(sum_sq(&v.xu1) + sum_sq(&v.xu2))),
        Smd10 => {
            cubic_constraints(&v.xu1, &v.xu2, out);
            cubic_constraints(&v.xu2, &v.xu1, out);
        }
        Smd11 => {
            let shift = 1.0 / sqrt(dims.r as f64);
            for (&u, &l) in v.xu2.iter().zip(&v.xl2) {
                out.push(u - shift - log(l));
            }
        }
        Smd12 => {
            for (&u, &l) in v.xu2.iter().zip(&v.xl2) {
                out.push(u - tan(l));
            }
            cubic_constraints(&v.xu1, &v.xu2, out);
            cubic_constraints(&v.xu2, &v.xu1, out);
        }
        _ => {}
    }
}

pub(crate) fn lower_constraints(id: ProblemId, _dims: &Dims, v: &BilevelVector, out: &mut Vec<f64>) {
    use ProblemId::*;
    match id {
        Smd9 => out.push(annulus(sum_sq(&v.xl1) + sum_sq(&v.xl2))),
        Smd10 => cubic_constraints(&v.xl1, &[], out),
        Smd11 => out.push(link_residual_sq(id, &v.xu2, &v.xl2) - 1.0),
        Smd12 => {
            out.push(link_residual_sq(id, &v.xu2, &v.xl2) - 1.0);
            cubic_constraints(&v.xl1, &[], out);
        }
        _ => {}
    }
}

fn constraint_tags(id: ProblemId, dims: &Dims) -> (Vec<ConstraintSubset>, Vec<ConstraintSubset>) {
    use ConstraintSubset::{A, B, C};
    use ProblemId::*;
    let rep = |tag, n| core::iter::repeat(tag).take(n).collect::<Vec<_>>();
    match id {
        Smd9 => (rep(A, 1), rep(B, 1)),
        Smd10 => (rep(A, dims.p + dims.r), rep(B, dims.q)),
        Smd11 => (rep(C, dims.r), rep(C, 1)),
        Smd12 => {
            let mut upper = rep(C, dims.r);
            upper.extend(rep(A, dims.p + dims.r));
            let mut lower = rep(C, 1);
            lower.extend(rep(B, dims.q));
            (upper, lower)
        }
        _ => (Vec::new(), Vec::new()),
    }
}

fn check_dims(id: ProblemId, dims: &Dims) -> Result<(), InstantiateError> {
    let err = |rule| Err(InstantiateError::InvalidDims { id, rule });
    dims.validate()?;
    if dims.r == 0 {
        return err("r >= 1 is required");
    }
    if id == ProblemId::Smd6 {
        if dims.s < 2 || dims.s % 2 != 0 {
            return err("s must be even and at least 2");
        }
        return Ok(());
    }
    if dims.s != 0 {
        return err("s must be 0 outside SMD6");
    }
    if id.needs_two_xl1() && dims.q < 2 {
        return err("q >= 2 is required (the formulas contain q - 1 terms)");
    }
    if dims.q < 1 {
        return err("q >= 1 is required");
    }
    if matches!(id, ProblemId::Smd10 | ProblemId::Smd12) && dims.p + dims.r < 2 {
        return err("p + r >= 2 is required (the optimum contains 1/sqrt(p + r - 1))");
    }
    Ok(())
}

fn level_bounds(id: ProblemId, dims: &Dims) -> (Bounds, Bounds) {
    use ProblemId::*;
    let wide = Interval::closed(-5.0, 10.0);
    let half_pi = Interval::open(-FRAC_PI_2, FRAC_PI_2);
    let (xu2, xl2) = match id {
        Smd1 | Smd3 | Smd10 => (wide, half_pi),
        Smd2 | Smd7 => (Interval::closed(-5.0, 1.0), Interval::open_closed(0.0, E)),
        Smd4 => (Interval::closed(-1.0, 1.0), Interval::closed(0.0, E)),
        Smd5 | Smd6 | Smd8 => (wide, wide),
        Smd9 => (Interval::closed(-5.0, 1.0), Interval::open_closed(-1.0, -1.0 + E)),
        Smd11 => (Interval::closed(-1.0, 1.0), Interval::closed(1.0 / E, E)),
        Smd12 => (Interval::closed(-14.10, 14.10), Interval::open(-1.5, 1.5)),
    };
    let upper = Bounds::from_blocks(&[(dims.p, wide), (dims.r, xu2)]);
    let lower = Bounds::from_blocks(&[(dims.xl1_len(), wide), (dims.r, xl2)]);
    (upper, lower)
}

/// Summary flags per problem.
pub fn properties(id: ProblemId) -> Properties {
    use ProblemId::*;
    Properties {
        interaction: match id {
            Smd1 | Smd3 => Interaction::Cooperative,
            _ => Interaction::Conflicting,
        },
        lower_multimodal: matches!(id, Smd3 | Smd4 | Smd5),
        upper_multimodal: matches!(id, Smd7 | Smd8),
        multiple_lower_optima: matches!(id, Smd6 | Smd11 | Smd12),
    }
}

/// Builds an SMD instance after checking the per-problem dimension rules.
pub fn instantiate(id: ProblemId, dims: Dims) -> Result<ProblemInstance, InstantiateError> {
    check_dims(id, &dims)?;
    let (upper_bounds, lower_bounds) = level_bounds(id, &dims);
    let (upper_tags, lower_tags) = constraint_tags(id, &dims);
    Ok(ProblemInstance::from_parts(
        alloc::format!("{id}"),
        dims,
        upper_bounds,
        lower_bounds,
        upper_tags,
        lower_tags,
        Some(properties(id)),
        Model::Smd(id),
    ))
}

/// Preimage of the unit-residual sphere for SMD11/SMD12. Each component takes
/// residual `+1/√r` when the preimage stays inside `bound`, else `-1/√r`.
fn sphere_representative(link: Link, xu2: &[f64], bound: &Interval) -> Vec<f64> {
    let shift = 1.0 / sqrt(xu2.len() as f64);
    xu2.iter()
        .map(|&u| {
            let first = link.invert(u - shift);
            if bound.contains(first) {
                first
            } else {
                link.invert(u + shift)
            }
        })
        .collect()
}

pub(crate) fn psi_reference(inst: &ProblemInstance, id: ProblemId, xu: &[f64]) -> PsiReference {
    use ProblemId::*;
    let dims = inst.dims();
    let xu2 = &xu[dims.p..];
    let (input, link) = interaction(id);
    let xl1_value = match id {
        Smd5 | Smd8 => 1.0,
        Smd10 | Smd12 => 1.0 / sqrt((dims.q - 1) as f64),
        _ => 0.0,
    };
    let xl1 = alloc::vec![xl1_value; dims.xl1_len()];
    let xl2_bound = inst.lower_bounds().intervals[dims.xl1_len()];
    let (xl2, set) = match id {
        Smd11 | Smd12 => (sphere_representative(link, xu2, &xl2_bound), PsiSet::UnitResidualSphere),
        _ => (
            xu2.iter().map(|&u| link.invert(input.apply(u))).collect(),
            if id == Smd6 { PsiSet::PairedValley } else { PsiSet::Single },
        ),
    };
    let mut lower = xl1;
    lower.extend(xl2);
    crate::types::clamp_in_place(&mut lower, inst.lower_bounds());
    let (xl1, xl2) = lower.split_at(dims.xl1_len());
    PsiReference {
        xl1: xl1.to_vec(),
        xl2: xl2.to_vec(),
        is_unique: set == PsiSet::Single,
        set,
    }
}

/// Distance of `(xl1, xl2)` from the optimal lower set at `xu`; 0 on the set.
pub(crate) fn psi_residual(inst: &ProblemInstance, id: ProblemId, xu: &[f64], xl1: &[f64], xl2: &[f64]) -> f64 {
    let dims = inst.dims();
    let reference = psi_reference(inst, id, xu);
    let max_abs = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| fabs(x - y)).fold(0.0, f64::max);
    match reference.set {
        PsiSet::Single => max_abs(xl1, &reference.xl1).max(max_abs(xl2, &reference.xl2)),
        PsiSet::PairedValley => {
            let (head, extra) = xl1.split_at(dims.q);
            let valley = extra.chunks_exact(2).map(|c| fabs(c[1] - c[0])).fold(0.0, f64::max);
            max_abs(head, &reference.xl1[..dims.q])
                .max(valley)
                .max(max_abs(xl2, &reference.xl2))
        }
        PsiSet::UnitResidualSphere => {
            let sphere = fabs(link_residual_sq(id, &xu[dims.p..], xl2) - 1.0);
            max_abs(xl1, &reference.xl1).max(sphere)
        }
    }
}

pub(crate) fn known_optimum(inst: &ProblemInstance, id: ProblemId) -> OptimumRecord {
    use ProblemId::*;
    let dims = *inst.dims();
    let (p, q, r) = (dims.p as f64, dims.q as f64, dims.r as f64);
    let xu_value = match id {
        Smd10 | Smd12 => 1.0 / sqrt(p + r - 1.0),
        _ => 0.0,
    };
    let xu = alloc::vec![xu_value; dims.upper_len()];
    let psi = psi_reference(inst, id, &xu);
    let (upper_objective, lower_objective) = match id {
        Smd10 | Smd12 => {
            let c = xu_value;
            let d = 1.0 / sqrt(q - 1.0);
            let upper_base = (p + r) * (c - 2.0) * (c - 2.0) + q * d * d;
            let lower_base = p * c * c + q * (d - 2.0) * (d - 2.0);
            if id == Smd10 {
                (upper_base, lower_base)
            } else {
                (upper_base + r * fabs(c - 1.0 / sqrt(r)) - 1.0, lower_base + 1.0)
            }
        }
        Smd11 => (-1.0, 1.0),
        _ => (0.0, 0.0),
    };
    let (xu1, xu2) = xu.split_at(dims.p);
    OptimumRecord {
        x: BilevelVector {
            xu1: xu1.to_vec(),
            xu2: xu2.to_vec(),
            xl1: psi.xl1,
            xl2: psi.xl2,
        },
        upper_objective,
        lower_objective,
    }
}
