//! Extremum classification of value vectors and the axis reflections that
//! bring every non-alternated problem to the decaying case (`k < 0`, all
//! global maxima before all global minima).

use serde::{Deserialize, Serialize};

use crate::error::{FitError, Result};
use crate::model::{ExponentialModel, TimeSeries};

/// Which extremum sits in the middle of an alternation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pattern {
    /// A global minimum strictly between two global maxima.
    MaxMinMax,
    /// A global maximum strictly between two global minima.
    MinMaxMin,
}

impl Pattern {
    pub fn flipped(self) -> Self {
        match self {
            Pattern::MaxMinMax => Pattern::MinMaxMin,
            Pattern::MinMaxMin => Pattern::MaxMinMax,
        }
    }
}

/// Discriminant of [`Shape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShapeKind {
    Constant,
    Alternated,
    MaxBeforeMin,
    MinBeforeMax,
}

/// Arrangement of the global extrema of a vector. Indices are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Constant,
    Alternated {
        pattern: Pattern,
        /// `(M1, m1, M2)` for max–min–max, `(m1, M1, m2)` for min–max–min.
        witnesses: (usize, usize, usize),
    },
    MaxBeforeMin {
        last_max: usize,
        first_min: usize,
    },
    MinBeforeMax {
        last_min: usize,
        first_max: usize,
    },
}

impl Shape {
    pub fn kind(&self) -> ShapeKind {
        match self {
            Shape::Constant => ShapeKind::Constant,
            Shape::Alternated { .. } => ShapeKind::Alternated,
            Shape::MaxBeforeMin { .. } => ShapeKind::MaxBeforeMin,
            Shape::MinBeforeMax { .. } => ShapeKind::MinBeforeMax,
        }
    }

    /// Alternated or constant data are fitted best by the midrange level.
    pub fn is_trivial(&self) -> bool {
        matches!(self, Shape::Constant | Shape::Alternated { .. })
    }
}

/// Classifies `values` by where their global extrema lie; values within
/// `tol_abs` of the max (min) count as maxima (minima).
pub fn classify(values: &[f64], tol_abs: f64) -> Shape {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if values.is_empty() || hi - lo <= tol_abs {
        return Shape::Constant;
    }
    let is_max = |v: f64| v >= hi - tol_abs;
    let is_min = |v: f64| v <= lo + tol_abs;

    let first_max = values.iter().position(|&v| is_max(v)).unwrap();
    let last_max = values.iter().rposition(|&v| is_max(v)).unwrap();
    let first_min = values.iter().position(|&v| is_min(v)).unwrap();
    let last_min = values.iter().rposition(|&v| is_min(v)).unwrap();

    if let Some(mid) = (first_max + 1..last_max).find(|&i| is_min(values[i])) {
        return Shape::Alternated {
            pattern: Pattern::MaxMinMax,
            witnesses: (first_max, mid, last_max),
        };
    }
    if let Some(mid) = (first_min + 1..last_min).find(|&i| is_max(values[i])) {
        return Shape::Alternated {
            pattern: Pattern::MinMaxMin,
            witnesses: (first_min, mid, last_min),
        };
    }
    if last_max < first_min {
        Shape::MaxBeforeMin {
            last_max,
            first_min,
        }
    } else {
        Shape::MinBeforeMax {
            last_min,
            first_max,
        }
    }
}

/// Reflections applied to a problem: `flip_value` maps `T -> -T`,
/// `flip_time` maps `t -> -t` (reversing the order) and `k -> -k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SymmetryTransform {
    pub flip_value: bool,
    pub flip_time: bool,
}

impl SymmetryTransform {
    pub const IDENTITY: Self = Self {
        flip_value: false,
        flip_time: false,
    };

    pub fn is_identity(&self) -> bool {
        !self.flip_value && !self.flip_time
    }

    pub fn apply_series(&self, series: &TimeSeries) -> TimeSeries {
        let mut times = series.times().to_vec();
        let mut values = series.values().to_vec();
        if self.flip_time {
            times.reverse();
            times.iter_mut().for_each(|t| *t = -*t);
            values.reverse();
        }
        if self.flip_value {
            values.iter_mut().for_each(|v| *v = -*v);
        }
        TimeSeries::from_parts_unchecked(times, values)
    }

    pub fn apply_rate(&self, k: f64) -> f64 {
        if self.flip_time {
            -k
        } else {
            k
        }
    }

    /// Model of the reflected problem that matches `model` on the original.
    pub fn apply_model(&self, model: &ExponentialModel) -> ExponentialModel {
        let mut out = *model;
        if self.flip_value {
            out.a = -out.a;
            out.b = -out.b;
        }
        if self.flip_time {
            out.k = -out.k;
        }
        out
    }

    /// Index in the original series of position `i` in the reflected one.
    pub fn original_index(&self, i: usize, n: usize) -> usize {
        if self.flip_time {
            n - 1 - i
        } else {
            i
        }
    }
}

/// Inverse of [`SymmetryTransform::apply_model`]; both reflections are
/// involutions so this is the same map.
pub fn undo_transform(model: &ExponentialModel, tr: &SymmetryTransform) -> ExponentialModel {
    tr.apply_model(model)
}

/// A problem rewritten in the decaying case.
#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    pub series: TimeSeries,
    pub k: f64,
    pub transform: SymmetryTransform,
}

/// Rewrites a non-alternated problem so that `k < 0` and the maxima precede
/// the minima.
pub fn reduce_to_case1(series: &TimeSeries, k: f64) -> Result<Reduction> {
    if k == 0.0 {
        return Err(FitError::ZeroRate);
    }
    let shape = classify(series.values(), series.tolerances().abs);
    let max_first = match shape.kind() {
        ShapeKind::MaxBeforeMin => true,
        ShapeKind::MinBeforeMax => false,
        kind => return Err(FitError::NotReducible(kind)),
    };
    let transform = match (k < 0.0, max_first) {
        (true, true) => SymmetryTransform::IDENTITY,
        (true, false) => SymmetryTransform {
            flip_value: true,
            flip_time: false,
        },
        (false, true) => SymmetryTransform {
            flip_value: true,
            flip_time: true,
        },
        (false, false) => SymmetryTransform {
            flip_value: false,
            flip_time: true,
        },
    };
    Ok(Reduction {
        series: transform.apply_series(series),
        k: transform.apply_rate(k),
        transform,
    })
}
