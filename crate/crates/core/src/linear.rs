//! Discrete minimax line `d + c*t`.
//!
//! Uses the same successive-remainders construction as the exponential
//! solver with the decreasing basis `-(t - t0)`, so slopes `(T_i - T_j) /
//! (t_i - t_j)` take the place of the exponential amplitudes. The fitted line
//! tells convex decaying data apart from everything else.

use crate::engine::{self, LineBasis};
use crate::error::Result;
use crate::model::{critical_indices, max_abs, sign_runs, Critical, LinearModel, Sign, TimeSeries};
use crate::shape::{classify, ShapeKind};

#[derive(Debug, Clone, PartialEq)]
pub struct LineFit {
    pub model: LinearModel,
    /// `i < j < l` whose residuals alternate at `±error`; `None` when the data
    /// are matched exactly.
    pub triple: Option<(usize, usize, usize)>,
    pub error: f64,
    pub residuals: Vec<f64>,
    pub critical: Vec<Critical>,
}

/// Best line in the max-norm.
pub fn fit_line(series: &TimeSeries) -> Result<LineFit> {
    let (t, v) = (series.times(), series.values());
    let tol = series.tolerances();
    let model = match series.len() {
        1 => LinearModel { c: 0.0, d: v[0] },
        2 => {
            let c = (v[1] - v[0]) / (t[1] - t[0]);
            LinearModel {
                c,
                d: v[0] - c * t[0],
            }
        }
        _ => {
            let shape = classify(v, tol.abs);
            if shape.is_trivial() {
                let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                LinearModel {
                    c: 0.0,
                    d: 0.5 * (hi + lo),
                }
            } else {
                // rising data are mirrored into falling data
                let flip = shape.kind() == ShapeKind::MinBeforeMax;
                let values: Vec<f64> = v.iter().map(|&x| if flip { -x } else { x }).collect();
                let rem = engine::successive_remainders(&values, &LineBasis::new(t), &tol)?;
                // a * (-(t - t0)) + b
                let (c, d) = (-rem.a, rem.b + rem.a * t[0]);
                if flip {
                    LinearModel { c: -c, d: -d }
                } else {
                    LinearModel { c, d }
                }
            }
        }
    };
    let residuals: Vec<f64> = t.iter().zip(v).map(|(&x, y)| y - model.eval(x)).collect();
    let error = max_abs(&residuals);
    let critical = critical_indices(&residuals, error, &tol);
    let runs = sign_runs(&critical);
    let triple =
        (error > tol.abs && runs.len() >= 3).then(|| (runs[0].index, runs[1].index, runs[2].index));
    Ok(LineFit {
        model,
        triple,
        error,
        residuals,
        critical,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Case1Verdict {
    /// Falling, with residuals of the best line reading `+ - +`.
    Case1,
    NotCase1,
    /// The data are (numerically) collinear.
    Degenerate,
}

/// Decides from the best line whether the data are in the decaying case:
/// negative slope and a `+ - +` alternation of its residuals.
pub fn is_case1_data(series: &TimeSeries) -> Result<Case1Verdict> {
    if series.len() < 3 {
        return Ok(Case1Verdict::Degenerate);
    }
    let fit = fit_line(series)?;
    if fit.error <= series.tolerances().abs {
        return Ok(Case1Verdict::Degenerate);
    }
    let runs = sign_runs(&fit.critical);
    let plus_minus_plus = runs.len() >= 4 || (runs.len() == 3 && runs[0].sign == Sign::Positive);
    Ok(if fit.model.c < 0.0 && plus_minus_plus {
        Case1Verdict::Case1
    } else {
        Case1Verdict::NotCase1
    })
}
