//! Evaluable bilevel problem instances.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{DimensionError, EvalError};
use crate::kit::{Composition, StackelbergParams};
use crate::smd::{self, ProblemId};
use crate::types::{total_violation, Bounds, BilevelVector, ConstraintSubset, Dims, EvalOutcome, Level};

/// Sign relation between the upper objective and the lower objective near Ψ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Interaction {
    Cooperative,
    Conflicting,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Properties {
    pub interaction: Interaction,
    pub lower_multimodal: bool,
    pub upper_multimodal: bool,
    pub multiple_lower_optima: bool,
}

/// The six objective terms `[F1, F2, F3]` and `[f1, f2, f3]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Components {
    pub upper: [f64; 3],
    pub lower: [f64; 3],
}

impl Components {
    pub fn upper_objective(&self) -> f64 {
        self.upper.iter().sum()
    }

    pub fn lower_objective(&self) -> f64 {
        self.lower.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OptimumRecord {
    pub x: BilevelVector,
    pub upper_objective: f64,
    pub lower_objective: f64,
}

/// Shape of the optimal lower-level set for a fixed upper vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum PsiSet {
    /// A single point.
    Single,
    /// Any `xl1` whose extra pairs are equal (SMD6).
    PairedValley,
    /// Any `xl2` with `Σ (xu2 - T(xl2))² = 1` (SMD11, SMD12).
    UnitResidualSphere,
}

/// Analytic lower-level optimum for a given upper vector.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PsiReference {
    pub xl1: Vec<f64>,
    pub xl2: Vec<f64>,
    pub is_unique: bool,
    pub set: PsiSet,
}

impl PsiReference {
    pub fn lower(&self) -> Vec<f64> {
        let mut l = self.xl1.clone();
        l.extend_from_slice(&self.xl2);
        l
    }
}

#[derive(Debug, Clone)]
pub(crate) enum Model {
    Smd(ProblemId),
    Composed(Composition),
    Stackelberg(StackelbergParams),
}

/// A concrete bilevel problem: bounds, constraint taxonomy and objectives.
///
/// Instances are immutable and `Send + Sync`.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    name: String,
    dims: Dims,
    upper_bounds: Bounds,
    lower_bounds: Bounds,
    upper_tags: Vec<ConstraintSubset>,
    lower_tags: Vec<ConstraintSubset>,
    properties: Option<Properties>,
    model: Model,
}

impl ProblemInstance {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_parts(
        name: String,
        dims: Dims,
        upper_bounds: Bounds,
        lower_bounds: Bounds,
        upper_tags: Vec<ConstraintSubset>,
        lower_tags: Vec<ConstraintSubset>,
        properties: Option<Properties>,
        model: Model,
    ) -> Self {
        Self { name, dims, upper_bounds, lower_bounds, upper_tags, lower_tags, properties, model }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dims(&self) -> &Dims {
        &self.dims
    }

    pub fn upper_bounds(&self) -> &Bounds {
        &self.upper_bounds
    }

    pub fn lower_bounds(&self) -> &Bounds {
        &self.lower_bounds
    }

    pub fn bounds(&self, level: Level) -> &Bounds {
        match level {
            Level::Upper => &self.upper_bounds,
            Level::Lower => &self.lower_bounds,
        }
    }

    pub fn upper_tags(&self) -> &[ConstraintSubset] {
        &self.upper_tags
    }

    pub fn lower_tags(&self) -> &[ConstraintSubset] {
        &self.lower_tags
    }

    pub fn properties(&self) -> Option<Properties> {
        self.properties
    }

    /// The SMD problem this instance was built from, if any.
    pub fn problem_id(&self) -> Option<ProblemId> {
        match self.model {
            Model::Smd(id) => Some(id),
            _ => None,
        }
    }

    pub fn is_constrained(&self) -> bool {
        !self.upper_tags.is_empty() || !self.lower_tags.is_empty()
    }

    pub(crate) fn set_properties(&mut self, properties: Option<Properties>) {
        self.properties = properties;
    }

    pub(crate) fn model_mut(&mut self) -> &mut Model {
        &mut self.model
    }

    pub(crate) fn tags_mut(&mut self, level: Level) -> &mut Vec<ConstraintSubset> {
        match level {
            Level::Upper => &mut self.upper_tags,
            Level::Lower => &mut self.lower_tags,
        }
    }

    /// Checks lengths and that every component lies in its domain.
    pub fn check_domain(&self, v: &BilevelVector) -> Result<(), EvalError> {
        if !v.matches(&self.dims) {
            let (vector, expected, found) = if v.xu1.len() + v.xu2.len() != self.dims.upper_len()
                || v.xu1.len() != self.dims.p
            {
                ("upper", self.dims.upper_len(), v.xu1.len() + v.xu2.len())
            } else {
                ("lower", self.dims.lower_len(), v.xl1.len() + v.xl2.len())
            };
            return Err(DimensionError::Length { vector, expected, found }.into());
        }
        let upper = v.xu1.iter().chain(&v.xu2);
        for (index, (&value, iv)) in upper.zip(&self.upper_bounds.intervals).enumerate() {
            if !iv.contains(value) {
                return Err(EvalError::OutOfDomain { level: Level::Upper, index, value });
            }
        }
        let lower = v.xl1.iter().chain(&v.xl2);
        for (index, (&value, iv)) in lower.zip(&self.lower_bounds.intervals).enumerate() {
            if !iv.contains(value) {
                return Err(EvalError::OutOfDomain { level: Level::Lower, index, value });
            }
        }
        Ok(())
    }

    /// Evaluates both objectives and all constraints. Inputs outside the
    /// domain are rejected, never clamped.
    pub fn evaluate(&self, v: &BilevelVector) -> Result<EvalOutcome<'_>, EvalError> {
        self.check_domain(v)?;
        let (upper_objective, lower_objective) = self.objectives(v);
        let mut upper_constraints = Vec::with_capacity(self.upper_tags.len());
        let mut lower_constraints = Vec::with_capacity(self.lower_tags.len());
        self.constraints_into(Level::Upper, v, &mut upper_constraints);
        self.constraints_into(Level::Lower, v, &mut lower_constraints);
        Ok(EvalOutcome {
            upper_objective,
            lower_objective,
            upper_constraints,
            lower_constraints,
            upper_tags: &self.upper_tags,
            lower_tags: &self.lower_tags,
        })
    }

    /// Objective terms, when the instance is built from the three-term split.
    pub fn components(&self, v: &BilevelVector) -> Result<Option<Components>, EvalError> {
        self.check_domain(v)?;
        Ok(self.components_unchecked(v))
    }

    fn components_unchecked(&self, v: &BilevelVector) -> Option<Components> {
        match &self.model {
            Model::Smd(id) => Some(smd::components(*id, &self.dims, v)),
            Model::Composed(c) => Some(c.components(v)),
            Model::Stackelberg(_) => None,
        }
    }

    pub(crate) fn objectives(&self, v: &BilevelVector) -> (f64, f64) {
        match &self.model {
            Model::Stackelberg(params) => params.objectives(v),
            _ => {
                let c = self.components_unchecked(v).expect("three-term model");
                (c.upper_objective(), c.lower_objective())
            }
        }
    }

    pub(crate) fn constraints_into(&self, level: Level, v: &BilevelVector, out: &mut Vec<f64>) {
        match (&self.model, level) {
            (Model::Smd(id), Level::Upper) => smd::upper_constraints(*id, &self.dims, v, out),
            (Model::Smd(id), Level::Lower) => smd::lower_constraints(*id, &self.dims, v, out),
            (Model::Composed(c), level) => c.constraints_into(level, v, out),
            (Model::Stackelberg(params), Level::Upper) => params.upper_constraints_into(v, out),
            (Model::Stackelberg(_), Level::Lower) => {}
        }
    }

    /// Objective and total violation at one level, without domain checks.
    /// `scratch` is reused for constraint values.
    pub(crate) fn level_fitness(&self, level: Level, v: &BilevelVector, scratch: &mut Vec<f64>) -> (f64, f64) {
        let (upper, lower) = self.objectives(v);
        scratch.clear();
        self.constraints_into(level, v, scratch);
        let violation = total_violation(scratch);
        match level {
            Level::Upper => (upper, violation),
            Level::Lower => (lower, violation),
        }
    }

    /// The analytic lower-level optimum at `xu`.
    pub fn psi_reference(&self, xu: &[f64]) -> Result<PsiReference, EvalError> {
        self.check_upper(xu)?;
        match &self.model {
            Model::Smd(id) => Ok(smd::psi_reference(self, *id, xu)),
            Model::Stackelberg(params) => Ok(params.psi_reference(xu)),
            Model::Composed(c) => c.psi_reference(xu).ok_or(EvalError::Unsupported),
        }
    }

    /// Distance of a lower vector from the optimal lower set at `xu`.
    pub fn psi_residual(&self, xu: &[f64], xl1: &[f64], xl2: &[f64]) -> Result<f64, EvalError> {
        self.check_upper(xu)?;
        match &self.model {
            Model::Smd(id) => Ok(smd::psi_residual(self, *id, xu, xl1, xl2)),
            _ => {
                let r = self.psi_reference(xu)?;
                let d = xl1
                    .iter()
                    .chain(xl2)
                    .zip(r.xl1.iter().chain(&r.xl2))
                    .map(|(a, b)| libm::fabs(a - b))
                    .fold(0.0, f64::max);
                Ok(d)
            }
        }
    }

    /// The bilevel optimum, where it is known.
    pub fn known_optimum(&self) -> Option<OptimumRecord> {
        match &self.model {
            Model::Smd(id) => Some(smd::known_optimum(self, *id)),
            Model::Stackelberg(params) => Some(params.optimum_record()),
            Model::Composed(c) => c.optimum.clone(),
        }
    }

    fn check_upper(&self, xu: &[f64]) -> Result<(), EvalError> {
        if xu.len() != self.dims.upper_len() {
            return Err(DimensionError::Length {
                vector: "upper",
                expected: self.dims.upper_len(),
                found: xu.len(),
            }
            .into());
        }
        if let Some(index) = self.upper_bounds.first_violation(xu) {
            return Err(EvalError::OutOfDomain { level: Level::Upper, index, value: xu[index] });
        }
        Ok(())
    }
}
