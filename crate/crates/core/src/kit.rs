//! Building bilevel problems from the three-term decomposition.
//!
//! A composed problem is `F = F1(xu1) + F2(xl1) + F3(xu2, xl2)` and
//! `f = f1(xu1, xu2) + f2(xl1) + f3(xu2, xl2)`. Each term is a
//! [`ComponentFunction`] that declares which blocks it reads; undeclared
//! blocks are passed to it as empty slices.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::error::KitError;
use crate::problem::{Components, Model, OptimumRecord, ProblemInstance, Properties, PsiReference, PsiSet};
use crate::types::{Bounds, BilevelVector, ConstraintSubset, Dims, Interval, Level};

/// Set of variable blocks a function may read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct Blocks {
    pub xu1: bool,
    pub xu2: bool,
    pub xl1: bool,
    pub xl2: bool,
}

impl Blocks {
    pub const NONE: Blocks = Blocks { xu1: false, xu2: false, xl1: false, xl2: false };
    pub const XU1: Blocks = Blocks { xu1: true, ..Blocks::NONE };
    pub const XU2: Blocks = Blocks { xu2: true, ..Blocks::NONE };
    pub const XL1: Blocks = Blocks { xl1: true, ..Blocks::NONE };
    pub const XL2: Blocks = Blocks { xl2: true, ..Blocks::NONE };

    pub const fn union(self, other: Blocks) -> Blocks {
        Blocks {
            xu1: self.xu1 || other.xu1,
            xu2: self.xu2 || other.xu2,
            xl1: self.xl1 || other.xl1,
            xl2: self.xl2 || other.xl2,
        }
    }

    pub const fn is_subset_of(self, other: Blocks) -> bool {
        (!self.xu1 || other.xu1) && (!self.xu2 || other.xu2) && (!self.xl1 || other.xl1) && (!self.xl2 || other.xl2)
    }

    fn reads_upper(self) -> bool {
        self.xu1 || self.xu2
    }

    fn reads_lower(self) -> bool {
        self.xl1 || self.xl2
    }
}

/// The blocks handed to a component rule.
#[derive(Debug, Clone, Copy)]
pub struct BlockArgs<'a> {
    pub xu1: &'a [f64],
    pub xu2: &'a [f64],
    pub xl1: &'a [f64],
    pub xl2: &'a [f64],
}

type Rule = Arc<dyn Fn(&BlockArgs<'_>) -> f64 + Send + Sync>;

/// One of the six objective terms (or a constraint function).
#[derive(Clone)]
pub struct ComponentFunction {
    name: String,
    reads: Blocks,
    rule: Rule,
    known_minimum: Option<f64>,
}

impl fmt::Debug for ComponentFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ComponentFunction")
            .field("name", &self.name)
            .field("reads", &self.reads)
            .field("known_minimum", &self.known_minimum)
            .finish()
    }
}

impl ComponentFunction {
    pub fn new(
        name: impl Into<String>,
        reads: Blocks,
        rule: impl Fn(&BlockArgs<'_>) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { name: name.into(), reads, rule: Arc::new(rule), known_minimum: None }
    }

    pub fn zero() -> Self {
        Self::new("zero", Blocks::NONE, |_| 0.0).with_known_minimum(0.0)
    }

    pub fn with_known_minimum(mut self, value: f64) -> Self {
        self.known_minimum = Some(value);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn reads(&self) -> Blocks {
        self.reads
    }

    pub fn known_minimum(&self) -> Option<f64> {
        self.known_minimum
    }

    /// Evaluates the rule with undeclared blocks replaced by empty slices.
    pub fn eval(&self, v: &BilevelVector) -> f64 {
        self.eval_blocks(&v.xu1, &v.xu2, &v.xl1, &v.xl2)
    }

    pub fn eval_blocks(&self, xu1: &[f64], xu2: &[f64], xl1: &[f64], xl2: &[f64]) -> f64 {
        let pick = |on: bool, s| if on { s } else { &[][..] };
        let args = BlockArgs {
            xu1: pick(self.reads.xu1, xu1),
            xu2: pick(self.reads.xu2, xu2),
            xl1: pick(self.reads.xl1, xl1),
            xl2: pick(self.reads.xl2, xl2),
        };
        (self.rule)(&args)
    }

    fn scaled(&self, sign: f64) -> ComponentFunction {
        if sign > 0.0 {
            return self.clone();
        }
        let inner = self.rule.clone();
        ComponentFunction {
            name: alloc::format!("-{}", self.name),
            reads: self.reads,
            rule: Arc::new(move |a| -inner(a)),
            known_minimum: None,
        }
    }
}

fn mask<'a>(reads: Blocks, a: &BlockArgs<'a>) -> BlockArgs<'a> {
    BlockArgs {
        xu1: if reads.xu1 { a.xu1 } else { &[] },
        xu2: if reads.xu2 { a.xu2 } else { &[] },
        xl1: if reads.xl1 { a.xl1 } else { &[] },
        xl2: if reads.xl2 { a.xl2 } else { &[] },
    }
}

/// Which blocks each term of the decomposition may read.
const ALLOWED: [(&str, Blocks); 6] = [
    ("F1", Blocks::XU1),
    ("F2", Blocks::XL1),
    ("F3", Blocks::XU2.union(Blocks::XL2)),
    ("f1", Blocks::XU1.union(Blocks::XU2)),
    ("f2", Blocks::XL1),
    ("f3", Blocks::XU2.union(Blocks::XL2)),
];

/// The six terms of a composed problem.
#[derive(Debug, Clone)]
pub struct Terms {
    pub upper1: ComponentFunction,
    pub upper2: ComponentFunction,
    pub upper3: ComponentFunction,
    pub lower1: ComponentFunction,
    pub lower2: ComponentFunction,
    pub lower3: ComponentFunction,
}

impl Terms {
    fn as_array(&self) -> [&ComponentFunction; 6] {
        [&self.upper1, &self.upper2, &self.upper3, &self.lower1, &self.lower2, &self.lower3]
    }
}

type PsiRule = Arc<dyn Fn(&[f64], &[f64]) -> (Vec<f64>, Vec<f64>) + Send + Sync>;

#[derive(Clone)]
pub(crate) struct Composition {
    terms: Terms,
    upper_constraints: Vec<ComponentFunction>,
    lower_constraints: Vec<ComponentFunction>,
    psi: Option<PsiRule>,
    p: usize,
    pub(crate) optimum: Option<OptimumRecord>,
}

impl fmt::Debug for Composition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Composition")
            .field("terms", &self.terms)
            .field("upper_constraints", &self.upper_constraints)
            .field("lower_constraints", &self.lower_constraints)
            .field("optimum", &self.optimum)
            .finish()
    }
}

impl Composition {
    pub(crate) fn components(&self, v: &BilevelVector) -> Components {
        let t = self.terms.as_array();
        Components {
            upper: [t[0].eval(v), t[1].eval(v), t[2].eval(v)],
            lower: [t[3].eval(v), t[4].eval(v), t[5].eval(v)],
        }
    }

    pub(crate) fn constraints_into(&self, level: Level, v: &BilevelVector, out: &mut Vec<f64>) {
        let list = match level {
            Level::Upper => &self.upper_constraints,
            Level::Lower => &self.lower_constraints,
        };
        out.extend(list.iter().map(|c| c.eval(v)));
    }

    pub(crate) fn psi_reference(&self, xu: &[f64]) -> Option<PsiReference> {
        let rule = self.psi.as_ref()?;
        let p = self.p.min(xu.len());
        let (xl1, xl2) = rule(&xu[..p], &xu[p..]);
        Some(PsiReference { xl1, xl2, is_unique: true, set: PsiSet::Single })
    }
}

/// Composes an unconstrained instance from the six terms.
pub fn compose(terms: Terms, upper_bounds: Bounds, lower_bounds: Bounds, dims: Dims) -> Result<ProblemInstance, KitError> {
    dims.validate()?;
    for ((component, allowed), term) in ALLOWED.iter().zip(terms.as_array()) {
        if !term.reads.is_subset_of(*allowed) {
            return Err(KitError::Arity { component });
        }
    }
    if upper_bounds.len() != dims.upper_len() {
        return Err(KitError::Bounds { level: Level::Upper, expected: dims.upper_len(), found: upper_bounds.len() });
    }
    if lower_bounds.len() != dims.lower_len() {
        return Err(KitError::Bounds { level: Level::Lower, expected: dims.lower_len(), found: lower_bounds.len() });
    }
    let composition = Composition {
        terms,
        upper_constraints: Vec::new(),
        lower_constraints: Vec::new(),
        psi: None,
        p: dims.p,
        optimum: None,
    };
    Ok(ProblemInstance::from_parts(
        String::from("composed"),
        dims,
        upper_bounds,
        lower_bounds,
        Vec::new(),
        Vec::new(),
        None,
        Model::Composed(composition),
    ))
}

fn composition_mut(inst: &mut ProblemInstance) -> Option<&mut Composition> {
    match inst.model_mut() {
        Model::Composed(c) => Some(c),
        _ => None,
    }
}

impl ProblemInstance {
    /// Attaches a `c(x) >= 0` constraint to a composed instance. Its subset
    /// tag follows from the blocks it reads.
    pub fn with_constraint(mut self, level: Level, constraint: ComponentFunction) -> Result<Self, KitError> {
        let reads = constraint.reads;
        let tag = match (reads.reads_upper(), reads.reads_lower()) {
            (true, false) => ConstraintSubset::A,
            (false, true) => ConstraintSubset::B,
            _ => ConstraintSubset::C,
        };
        let comp = composition_mut(&mut self).ok_or(KitError::Arity { component: "constraint" })?;
        match level {
            Level::Upper => comp.upper_constraints.push(constraint),
            Level::Lower => comp.lower_constraints.push(constraint),
        }
        self.tags_mut(level).push(tag);
        Ok(self)
    }

    /// Caller-declared property flags.
    pub fn with_properties(mut self, properties: Properties) -> Self {
        self.set_properties(Some(properties));
        self
    }

    /// Caller-supplied optimum and lower-level reference map for a composed
    /// instance. `psi` receives `(xu1, xu2)` and returns `(xl1, xl2)`.
    pub fn with_optimum(
        mut self,
        optimum: OptimumRecord,
        psi: impl Fn(&[f64], &[f64]) -> (Vec<f64>, Vec<f64>) + Send + Sync + 'static,
    ) -> Result<Self, KitError> {
        let comp = composition_mut(&mut self).ok_or(KitError::Arity { component: "optimum" })?;
        comp.optimum = Some(optimum);
        comp.psi = Some(Arc::new(psi));
        Ok(self)
    }
}

/// Sign layout of the interaction terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InteractionMode {
    /// `F2 = f2`, `F3 = F4 + f3`
    Cooperative,
    /// `F2 = -f2`, `F3 = F4 - f3`
    Conflicting,
    /// `F2 = f2`, `F3 = F4 - f3`
    MixedA,
    /// `F2 = -f2`, `F3 = F4 + f3`
    MixedB,
}

/// Derives the upper terms `(F2, F3)` from the lower terms and an `xu2`-only
/// function `F4`.
pub fn apply_interaction(
    f2: &ComponentFunction,
    f3: &ComponentFunction,
    f4: &ComponentFunction,
    mode: InteractionMode,
) -> (ComponentFunction, ComponentFunction) {
    let (s2, s3) = match mode {
        InteractionMode::Cooperative => (1.0, 1.0),
        InteractionMode::Conflicting => (-1.0, -1.0),
        InteractionMode::MixedA => (1.0, -1.0),
        InteractionMode::MixedB => (-1.0, 1.0),
    };
    let upper2 = f2.scaled(s2);
    let (inner3, inner4) = (f3.rule.clone(), f4.rule.clone());
    let (reads3, reads4) = (f3.reads, f4.reads);
    let upper3 = ComponentFunction {
        name: alloc::format!("{} {} {}", f4.name, if s3 > 0.0 { "+" } else { "-" }, f3.name),
        reads: reads3.union(reads4),
        rule: Arc::new(move |a| inner4(&mask(reads4, a)) + s3 * inner3(&mask(reads3, a))),
        known_minimum: None,
    };
    (upper2, upper3)
}

/// Replaces a lower `f2` by one with a continuum of minimisers:
/// `(xl1[1] - xl1[0])² + base(xl1[2..])`. The first two components form the
/// diagonal valley; the remainder keeps the base term.
pub fn multi_global_lower(base: &ComponentFunction, xl1_len: usize) -> Result<ComponentFunction, KitError> {
    if !base.reads.is_subset_of(Blocks::XL1) {
        return Err(KitError::Arity { component: "f2" });
    }
    if xl1_len < 2 {
        return Err(KitError::TooFewComponents(xl1_len));
    }
    let inner = base.rule.clone();
    Ok(ComponentFunction {
        name: alloc::format!("valley + {}", base.name),
        reads: Blocks::XL1,
        rule: Arc::new(move |a| {
            let x = a.xl1;
            if x.len() < 2 {
                return inner(a);
            }
            let d = x[1] - x[0];
            let rest = BlockArgs { xl1: &x[2..], ..*a };
            d * d + inner(&rest)
        }),
        known_minimum: base.known_minimum,
    })
}

/// Linear-demand, quadratic-cost leader/follower model.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StackelbergParams {
    /// Price intercept: `P(Q) = alpha - beta Q`.
    pub alpha: f64,
    pub beta: f64,
    pub delta_l: f64,
    pub gamma_l: f64,
    pub c_l: f64,
    pub delta_f: f64,
    pub gamma_f: f64,
    pub c_f: f64,
}

/// Closed-form equilibrium of a [`StackelbergParams`] model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StackelbergOptimum {
    pub leader: f64,
    pub follower: f64,
    pub demand: f64,
    /// The leader's closed-form quantity is not positive; non-negativity is
    /// left to the bounds.
    pub leader_nonpositive: bool,
}

impl StackelbergParams {
    pub fn validate(&self) -> Result<(), KitError> {
        let positive = [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("delta_l", self.delta_l),
            ("gamma_l", self.gamma_l),
            ("delta_f", self.delta_f),
            ("gamma_f", self.gamma_f),
        ];
        for (name, value) in positive {
            if !(value > 0.0) {
                return Err(KitError::Parameter { name, requirement: "positive" });
            }
        }
        for (name, value) in [("c_l", self.c_l), ("c_f", self.c_f)] {
            if !(value >= 0.0) {
                return Err(KitError::Parameter { name, requirement: "non-negative" });
            }
        }
        Ok(())
    }

    pub fn price(&self, quantity: f64) -> f64 {
        self.alpha - self.beta * quantity
    }

    pub fn leader_cost(&self, q: f64) -> f64 {
        self.delta_l * q * q + self.gamma_l * q + self.c_l
    }

    pub fn follower_cost(&self, q: f64) -> f64 {
        self.delta_f * q * q + self.gamma_f * q + self.c_f
    }

    /// Leader profit when demand is `demand`.
    pub fn leader_profit(&self, leader: f64, demand: f64) -> f64 {
        self.price(demand) * leader - self.leader_cost(leader)
    }

    /// Follower profit at the market-clearing price of the total output.
    pub fn follower_profit(&self, leader: f64, follower: f64) -> f64 {
        self.price(leader + follower) * follower - self.follower_cost(follower)
    }

    /// Follower's best response, kept inside `[0, alpha/beta]`.
    pub fn follower_response(&self, leader: f64) -> f64 {
        let q = (self.alpha - self.gamma_f - self.beta * leader) / (2.0 * (self.beta + self.delta_f));
        q.clamp(0.0, self.quantity_cap())
    }

    /// Upper end of the price-nonnegativity box.
    pub fn quantity_cap(&self) -> f64 {
        self.alpha / self.beta
    }

    /// Equilibrium quantities from the closed-form expressions.
    pub fn optimum(&self) -> StackelbergOptimum {
        let (a, b) = (self.alpha, self.beta);
        let bf = b + self.delta_f;
        let denom = 4.0 * bf * (b + self.delta_l) - 2.0 * b * b;
        let leader = (2.0 * bf * (a - self.gamma_l) - b * (a - self.gamma_f)) / denom;
        let follower = (a - self.gamma_f) / (2.0 * bf) - (b * (a - self.gamma_l) - b * b * (a - self.gamma_f) / (2.0 * bf)) / denom;
        StackelbergOptimum { leader, follower, demand: leader + follower, leader_nonpositive: leader <= 0.0 }
    }

    /// Both objectives negated into the minimisation convention.
    pub(crate) fn objectives(&self, v: &BilevelVector) -> (f64, f64) {
        let (leader, demand, follower) = (v.xu1[0], v.xu1[1], v.xl1[0]);
        (-self.leader_profit(leader, demand), -self.follower_profit(leader, follower))
    }

    /// `Q - q_l - q_f >= 0`: demand covers the total output.
    pub(crate) fn upper_constraints_into(&self, v: &BilevelVector, out: &mut Vec<f64>) {
        out.push(v.xu1[1] - v.xu1[0] - v.xl1[0]);
    }

    pub(crate) fn psi_reference(&self, xu: &[f64]) -> PsiReference {
        PsiReference {
            xl1: alloc::vec![self.follower_response(xu[0])],
            xl2: Vec::new(),
            is_unique: true,
            set: PsiSet::Single,
        }
    }

    pub(crate) fn optimum_record(&self) -> OptimumRecord {
        let o = self.optimum();
        OptimumRecord {
            x: BilevelVector {
                xu1: alloc::vec![o.leader, o.demand],
                xu2: Vec::new(),
                xl1: alloc::vec![o.follower],
                xl2: Vec::new(),
            },
            upper_objective: -self.leader_profit(o.leader, o.demand),
            lower_objective: -self.follower_profit(o.leader, o.follower),
        }
    }
}

/// The leader/follower model as a bilevel instance: upper `(q_l, Q)`, lower
/// `q_f`, all in `[0, alpha/beta]`.
pub fn stackelberg_problem(params: StackelbergParams) -> Result<ProblemInstance, KitError> {
    params.validate()?;
    let cap = Interval::closed(0.0, params.quantity_cap());
    let dims = Dims::new(2, 1, 0);
    Ok(ProblemInstance::from_parts(
        String::from("stackelberg"),
        dims,
        Bounds::from_blocks(&[(2, cap)]),
        Bounds::from_blocks(&[(1, cap)]),
        alloc::vec![ConstraintSubset::C],
        Vec::new(),
        None,
        Model::Stackelberg(params),
    ))
}

pub fn stackelberg_optimum(params: &StackelbergParams) -> StackelbergOptimum {
    params.optimum()
}
