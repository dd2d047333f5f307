//! Variable partitioning, bounds and constraint arithmetic shared by every
//! problem and by the solver.

use alloc::vec::Vec;

use crate::error::DimensionError;

/// Interior margin applied to open interval endpoints.
pub const EPS_OPEN: f64 = 1e-6;

/// Cardinalities of the four variable blocks.
///
/// The upper level holds `xu1` (`p` components) and `xu2` (`r`); the lower
/// level holds `xl1` (`q + s`) and `xl2` (`r`). `s` is only non-zero for SMD6.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Dims {
    pub p: usize,
    pub q: usize,
    pub r: usize,
    pub s: usize,
}

impl Dims {
    pub const fn new(p: usize, q: usize, r: usize) -> Self {
        Self { p, q, r, s: 0 }
    }

    pub const fn with_s(p: usize, q: usize, r: usize, s: usize) -> Self {
        Self { p, q, r, s }
    }

    pub const fn upper_len(&self) -> usize {
        self.p + self.r
    }

    pub const fn lower_len(&self) -> usize {
        self.q + self.s + self.r
    }

    /// Length of the `xl1` block, including the SMD6 extra components.
    pub const fn xl1_len(&self) -> usize {
        self.q + self.s
    }

    /// Both levels must own at least one variable.
    pub fn validate(&self) -> Result<(), DimensionError> {
        if self.upper_len() == 0 {
            return Err(DimensionError::EmptyLevel { level: Level::Upper });
        }
        if self.lower_len() == 0 {
            return Err(DimensionError::EmptyLevel { level: Level::Lower });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Level {
    Upper,
    Lower,
}

impl core::fmt::Display for Level {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Level::Upper => f.write_str("upper"),
            Level::Lower => f.write_str("lower"),
        }
    }
}

/// A single variable range. Open endpoints are never attained.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_open: bool,
    pub hi_open: bool,
}

impl Interval {
    pub const fn closed(lo: f64, hi: f64) -> Self {
        Self { lo, hi, lo_open: false, hi_open: false }
    }

    pub const fn open(lo: f64, hi: f64) -> Self {
        Self { lo, hi, lo_open: true, hi_open: true }
    }

    /// `(lo, hi]`
    pub const fn open_closed(lo: f64, hi: f64) -> Self {
        Self { lo, hi, lo_open: true, hi_open: false }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// Smallest value a sampled or clamped component may take.
    pub fn min_value(&self) -> f64 {
        if self.lo_open {
            self.lo + EPS_OPEN
        } else {
            self.lo
        }
    }

    /// Largest value a sampled or clamped component may take.
    pub fn max_value(&self) -> f64 {
        if self.hi_open {
            self.hi - EPS_OPEN
        } else {
            self.hi
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_open { x > self.lo } else { x >= self.lo };
        let below = if self.hi_open { x < self.hi } else { x <= self.hi };
        above && below
    }

    pub fn clamp(&self, x: f64) -> f64 {
        let (lo, hi) = (self.min_value(), self.max_value());
        if x.is_nan() {
            return lo;
        }
        if x < lo {
            lo
        } else if x > hi {
            hi
        } else {
            x
        }
    }
}

/// Per-variable box for one level.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Bounds {
    pub intervals: Vec<Interval>,
}

impl Bounds {
    pub fn new(intervals: Vec<Interval>) -> Self {
        Self { intervals }
    }

    /// Concatenates blocks of `(count, interval)`.
    pub fn from_blocks(blocks: &[(usize, Interval)]) -> Self {
        let mut intervals = Vec::new();
        for &(n, iv) in blocks {
            intervals.extend(core::iter::repeat(iv).take(n));
        }
        Self { intervals }
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Index of the first component outside its interval, if any.
    pub fn first_violation(&self, v: &[f64]) -> Option<usize> {
        v.iter()
            .zip(&self.intervals)
            .position(|(&x, iv)| !iv.contains(x))
    }

    pub fn contains(&self, v: &[f64]) -> bool {
        v.len() == self.len() && self.first_violation(v).is_none()
    }
}

/// Projects `v` into `bounds`; open endpoints map to the interior margin.
///
/// Extra components (when `v` is longer than `bounds`) are left untouched.
pub fn clamp_to_bounds(v: &[f64], bounds: &Bounds) -> Vec<f64> {
    let mut out = v.to_vec();
    clamp_in_place(&mut out, bounds);
    out
}

pub fn clamp_in_place(v: &mut [f64], bounds: &Bounds) {
    for (x, iv) in v.iter_mut().zip(&bounds.intervals) {
        *x = iv.clamp(*x);
    }
}

/// Sum of violations `Σ max(0, -c)` under the `c >= 0` feasibility convention.
pub fn total_violation(constraints: &[f64]) -> f64 {
    constraints.iter().map(|&c| if c < 0.0 { -c } else { 0.0 }).sum()
}

/// A decision point split into its four blocks.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BilevelVector {
    pub xu1: Vec<f64>,
    pub xu2: Vec<f64>,
    pub xl1: Vec<f64>,
    pub xl2: Vec<f64>,
}

impl BilevelVector {
    pub fn zeros(dims: &Dims) -> Self {
        Self {
            xu1: alloc::vec![0.0; dims.p],
            xu2: alloc::vec![0.0; dims.r],
            xl1: alloc::vec![0.0; dims.xl1_len()],
            xl2: alloc::vec![0.0; dims.r],
        }
    }

    /// `(xu1, xu2)` concatenated.
    pub fn upper(&self) -> Vec<f64> {
        let mut u = self.xu1.clone();
        u.extend_from_slice(&self.xu2);
        u
    }

    /// `(xl1, xl2)` concatenated.
    pub fn lower(&self) -> Vec<f64> {
        let mut l = self.xl1.clone();
        l.extend_from_slice(&self.xl2);
        l
    }

    /// Overwrites the upper blocks from a flat vector of matching length.
    pub fn set_upper(&mut self, upper: &[f64]) {
        let p = self.xu1.len();
        self.xu1.copy_from_slice(&upper[..p]);
        self.xu2.copy_from_slice(&upper[p..]);
    }

    /// Overwrites the lower blocks from a flat vector of matching length.
    pub fn set_lower(&mut self, lower: &[f64]) {
        let n = self.xl1.len();
        self.xl1.copy_from_slice(&lower[..n]);
        self.xl2.copy_from_slice(&lower[n..]);
    }

    pub fn matches(&self, dims: &Dims) -> bool {
        self.xu1.len() == dims.p
            && self.xu2.len() == dims.r
            && self.xl1.len() == dims.xl1_len()
            && self.xl2.len() == dims.r
    }
}

/// Partitions flat upper/lower vectors into blocks.
pub fn split(upper: &[f64], lower: &[f64], dims: &Dims) -> Result<BilevelVector, DimensionError> {
    if upper.len() != dims.upper_len() {
        return Err(DimensionError::Length {
            vector: "upper",
            expected: dims.upper_len(),
            found: upper.len(),
        });
    }
    if lower.len() != dims.lower_len() {
        return Err(DimensionError::Length {
            vector: "lower",
            expected: dims.lower_len(),
            found: lower.len(),
        });
    }
    let (xu1, xu2) = upper.split_at(dims.p);
    let (xl1, xl2) = lower.split_at(dims.xl1_len());
    Ok(BilevelVector {
        xu1: xu1.to_vec(),
        xu2: xu2.to_vec(),
        xl1: xl1.to_vec(),
        xl2: xl2.to_vec(),
    })
}

/// Which variables a constraint depends on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ConstraintSubset {
    /// Upper-level variables only.
    A,
    /// Lower-level variables only.
    B,
    /// Both levels.
    C,
}

/// Objectives and constraint values at one point. Constraints are feasible
/// when `>= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalOutcome<'a> {
    pub upper_objective: f64,
    pub lower_objective: f64,
    pub upper_constraints: Vec<f64>,
    pub lower_constraints: Vec<f64>,
    pub upper_tags: &'a [ConstraintSubset],
    pub lower_tags: &'a [ConstraintSubset],
}

impl EvalOutcome<'_> {
    pub fn upper_violation(&self) -> f64 {
        total_violation(&self.upper_constraints)
    }

    pub fn lower_violation(&self) -> f64 {
        total_violation(&self.lower_constraints)
    }

    pub fn is_feasible(&self) -> bool {
        self.upper_violation() == 0.0 && self.lower_violation() == 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn split_partitions_blocks() {
        let v = split(&[1.0, 2.0], &[3.0, 4.0, 5.0], &Dims::new(1, 2, 1)).unwrap();
        assert_eq!(v.xu1, vec![1.0]);
        assert_eq!(v.xu2, vec![2.0]);
        assert_eq!(v.xl1, vec![3.0, 4.0]);
        assert_eq!(v.xl2, vec![5.0]);
    }

    #[test]
    fn split_degenerate_sizes() {
        let v = split(&[], &[7.0], &Dims::new(0, 1, 0)).unwrap();
        assert!(v.xu1.is_empty() && v.xu2.is_empty() && v.xl2.is_empty());
        assert_eq!(v.xl1, vec![7.0]);
    }

    #[test]
    fn split_rejects_short_upper() {
        let err = split(&[1.0], &[2.0, 3.0], &Dims::new(1, 2, 1)).unwrap_err();
        assert_eq!(
            err,
            DimensionError::Length { vector: "upper", expected: 2, found: 1 }
        );
    }

    #[test]
    fn violation_examples() {
        assert_eq!(total_violation(&[0.5, 0.0]), 0.0);
        assert_eq!(total_violation(&[-0.25, -0.75, 1.0]), 1.0);
        assert_eq!(total_violation(&[]), 0.0);
    }

    #[test]
    fn clamp_examples() {
        let closed = Bounds::new(vec![Interval::closed(-5.0, 10.0)]);
        assert_eq!(clamp_to_bounds(&[12.0], &closed), vec![10.0]);
        assert_eq!(clamp_to_bounds(&[3.0], &closed), vec![3.0]);
        let open_left = Bounds::new(vec![Interval::open_closed(0.0, core::f64::consts::E)]);
        assert_eq!(clamp_to_bounds(&[0.0], &open_left), vec![1e-6]);
    }

    #[test]
    fn dims_need_both_levels() {
        assert!(Dims::new(0, 0, 0).validate().is_err());
        assert!(Dims::new(1, 0, 0).validate().is_err());
        assert!(Dims::new(0, 1, 0).validate().is_err());
        assert!(Dims::new(0, 0, 1).validate().is_ok());
    }

    fn arb_dims() -> impl Strategy<Value = Dims> {
        (0usize..4, 0usize..4, 0usize..3, 0usize..3).prop_map(|(p, q, r, s)| Dims::with_s(p, q, r, s))
    }

    fn arb_interval() -> impl Strategy<Value = Interval> {
        (-10.0f64..10.0, 0.01f64..20.0, any::<bool>(), any::<bool>()).prop_map(|(lo, w, a, b)| Interval {
            lo,
            hi: lo + w,
            lo_open: a,
            hi_open: b,
        })
    }

    proptest! {
        #[test]
        fn split_concat_roundtrip(dims in arb_dims(), seed in proptest::collection::vec(-1e6f64..1e6, 16)) {
            let upper = &seed[..dims.upper_len()];
            let lower = &seed[8..8 + dims.lower_len()];
            let v = split(upper, lower, &dims).unwrap();
            prop_assert!(v.matches(&dims));
            prop_assert_eq!(v.upper(), upper.to_vec());
            prop_assert_eq!(v.lower(), lower.to_vec());
        }

        #[test]
        fn violation_is_nonnegative_and_monotone(c in proptest::collection::vec(-5.0f64..5.0, 0..8), idx in 0usize..8, dec in 0.0f64..3.0) {
            let v0 = total_violation(&c);
            prop_assert!(v0 >= 0.0);
            prop_assert_eq!(v0 == 0.0, c.iter().all(|&x| x >= 0.0));
            if !c.is_empty() {
                let mut d = c.clone();
                let i = idx % d.len();
                d[i] -= dec;
                prop_assert!(total_violation(&d) >= v0);
            }
        }

        #[test]
        fn clamp_is_idempotent_and_interior(ivs in proptest::collection::vec(arb_interval(), 1..6), xs in proptest::collection::vec(-50.0f64..50.0, 6)) {
            let b = Bounds::new(ivs);
            let once = clamp_to_bounds(&xs[..b.len()], &b);
            prop_assert_eq!(clamp_to_bounds(&once, &b), once.clone());
            prop_assert!(b.contains(&once));
        }
    }
}
