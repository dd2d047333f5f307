//! Two-axis evaluation grids over a problem's bounds.

use alloc::vec::Vec;

use crate::error::GridError;
use crate::problem::ProblemInstance;
use crate::types::{BilevelVector, Level};

/// One variable of the flat upper or lower vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridAxis {
    pub level: Level,
    pub index: usize,
}

impl GridAxis {
    pub const fn upper(index: usize) -> Self {
        Self { level: Level::Upper, index }
    }

    pub const fn lower(index: usize) -> Self {
        Self { level: Level::Lower, index }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub axes: [GridAxis; 2],
    pub resolution: usize,
    /// Values of every non-axis variable.
    pub base: BilevelVector,
    /// Replace the lower block by the analytic optimum of each cell's upper
    /// block (lower-level axes still override it).
    pub lower_follows_psi: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridSample {
    pub a: f64,
    pub b: f64,
    pub upper_objective: f64,
    pub lower_objective: f64,
    /// False when the cell lies outside the problem domain; objectives are
    /// then NaN.
    pub in_domain: bool,
}

/// Evaluates the problem on a `resolution × resolution` lattice spanning the
/// sampled range of both axes. Row-major: the second axis varies fastest.
pub fn contour_grid(inst: &ProblemInstance, spec: &GridSpec) -> Result<Vec<GridSample>, GridError> {
    if spec.resolution < 2 {
        return Err(GridError::Resolution(spec.resolution));
    }
    if spec.axes[0] == spec.axes[1] {
        return Err(GridError::SameAxis);
    }
    let dims = inst.dims();
    for axis in spec.axes {
        let len = match axis.level {
            Level::Upper => dims.upper_len(),
            Level::Lower => dims.lower_len(),
        };
        if axis.index >= len {
            return Err(GridError::AxisOutOfRange { index: axis.index, len });
        }
    }
    let base_upper = spec.base.upper();
    let base_lower = spec.base.lower();
    if base_upper.len() != dims.upper_len() {
        return Err(crate::error::DimensionError::Length {
            vector: "upper",
            expected: dims.upper_len(),
            found: base_upper.len(),
        }
        .into());
    }
    if base_lower.len() != dims.lower_len() {
        return Err(crate::error::DimensionError::Length {
            vector: "lower",
            expected: dims.lower_len(),
            found: base_lower.len(),
        }
        .into());
    }

    let ticks = |axis: GridAxis| -> Vec<f64> {
        let iv = inst.bounds(axis.level).intervals[axis.index];
        let (lo, hi) = (iv.min_value(), iv.max_value());
        let n = spec.resolution;
        (0..n).map(|k| if k + 1 == n { hi } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 }).collect()
    };
    let (ta, tb) = (ticks(spec.axes[0]), ticks(spec.axes[1]));

    let mut out = Vec::with_capacity(ta.len() * tb.len());
    let mut upper = base_upper.clone();
    let mut lower = base_lower.clone();
    for &a in &ta {
        for &b in &tb {
            upper.copy_from_slice(&base_upper);
            for (axis, value) in spec.axes.iter().zip([a, b]) {
                if axis.level == Level::Upper {
                    upper[axis.index] = value;
                }
            }
            lower.copy_from_slice(&base_lower);
            if spec.lower_follows_psi {
                if let Ok(psi) = inst.psi_reference(&upper) {
                    lower = psi.lower();
                }
            }
            for (axis, value) in spec.axes.iter().zip([a, b]) {
                if axis.level == Level::Lower {
                    lower[axis.index] = value;
                }
            }
            let sample = match crate::types::split(&upper, &lower, dims)
                .ok()
                .and_then(|v| inst.evaluate(&v).ok())
            {
                Some(e) => GridSample { a, b, upper_objective: e.upper_objective, lower_objective: e.lower_objective, in_domain: true },
                None => GridSample { a, b, upper_objective: f64::NAN, lower_objective: f64::NAN, in_domain: false },
            };
            out.push(sample);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smd::{instantiate, ProblemId};
    use crate::types::Dims;

    fn spec(inst: &ProblemInstance, axes: [GridAxis; 2], resolution: usize, psi: bool) -> GridSpec {
        GridSpec { axes, resolution, base: BilevelVector::zeros(inst.dims()), lower_follows_psi: psi }
    }

    #[test]
    fn smd1_upper_grid() {
        let inst = instantiate(ProblemId::Smd1, Dims::new(1, 2, 1)).unwrap();
        let g = contour_grid(&inst, &spec(&inst, [GridAxis::upper(0), GridAxis::upper(1)], 3, true)).unwrap();
        assert_eq!(g.len(), 9);
        assert!(g.iter().all(|s| s.in_domain));
        // [-5, 10] at resolution 3 has no zero tick; resolution 4 does
        let g = contour_grid(&inst, &spec(&inst, [GridAxis::upper(0), GridAxis::upper(1)], 4, true)).unwrap();
        let origin = g.iter().find(|s| s.a == 0.0 && s.b == 0.0).unwrap();
        assert_eq!(origin.upper_objective, 0.0);
        assert!(g.iter().all(|s| s.upper_objective >= 0.0));
    }

    #[test]
    fn resolution_must_be_two() {
        let inst = instantiate(ProblemId::Smd1, Dims::new(1, 2, 1)).unwrap();
        let err = contour_grid(&inst, &spec(&inst, [GridAxis::upper(0), GridAxis::upper(1)], 1, false));
        assert_eq!(err, Err(GridError::Resolution(1)));
        let err = contour_grid(&inst, &spec(&inst, [GridAxis::upper(0), GridAxis::upper(2)], 5, false));
        assert_eq!(err, Err(GridError::AxisOutOfRange { index: 2, len: 2 }));
        let err = contour_grid(&inst, &spec(&inst, [GridAxis::lower(1), GridAxis::lower(1)], 5, false));
        assert_eq!(err, Err(GridError::SameAxis));
    }

    #[test]
    fn smd2_lower_grid_minimum_near_reference() {
        let inst = instantiate(ProblemId::Smd2, Dims::new(1, 1, 1)).unwrap();
        let g = contour_grid(&inst, &spec(&inst, [GridAxis::lower(0), GridAxis::lower(1)], 2, false)).unwrap();
        assert_eq!(g.len(), 4);
        let best = g.iter().min_by(|x, y| x.lower_objective.total_cmp(&y.lower_objective)).unwrap();
        // nearest corner to (0, 1) among {-5, 10} × {1e-6, e}
        assert_eq!(best.a, -5.0);
        assert_eq!(best.b, core::f64::consts::E);
    }
}
