//! Data model: time series, the exponential family `a*exp(k*t) + b`, the
//! max-norm error functional and pairwise interpolation.
//!
//! Every exponential is evaluated relative to an anchor instant (the first
//! instant of the vector at hand), i.e. as `a' * exp(k*(t - t0)) + b` with
//! `a' = a * exp(k*t0)`. Public coefficients are always the de-normalized
//! `(a, b, k)`.

use serde::{Deserialize, Serialize};

use crate::error::{FitError, Result};
use crate::shape::{classify, Shape, SymmetryTransform};

/// Largest admissible `|k * (t_n - t_1)|`.
pub const EXPONENT_BUDGET: f64 = 700.0;

/// Relative tolerance for "this residual attains the norm".
pub const REL_TOL: f64 = 1e-9;

/// Absolute tolerance factor, multiplied by the value scale.
pub const ABS_TOL_FACTOR: f64 = 1e-12;

/// Paired vectors of strictly increasing instants and observed values.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(FitError::LengthMismatch {
                times: times.len(),
                values: values.len(),
            });
        }
        if times.is_empty() {
            return Err(FitError::EmptySeries);
        }
        for (index, (t, v)) in times.iter().zip(&values).enumerate() {
            if !t.is_finite() || !v.is_finite() {
                return Err(FitError::NonFinite { index });
            }
        }
        if let Some(index) = times.windows(2).position(|w| w[0] >= w[1]) {
            return Err(FitError::NonIncreasingTimes { index: index + 1 });
        }
        Ok(Self { times, values })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `t_n - t_1`.
    pub fn span(&self) -> f64 {
        self.times[self.len() - 1] - self.times[0]
    }

    /// `max |T_i|`, or 1 when every value is zero.
    pub fn scale(&self) -> f64 {
        value_scale(&self.values)
    }

    pub fn tolerances(&self) -> Tolerances {
        Tolerances::for_values(&self.values)
    }

    /// Same instants, values replaced.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.times.clone(), values)
    }

    pub(crate) fn from_parts_unchecked(times: Vec<f64>, values: Vec<f64>) -> Self {
        debug_assert!(times.len() == values.len());
        Self { times, values }
    }
}

pub(crate) fn value_scale(values: &[f64]) -> f64 {
    let m = values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    if m > 0.0 {
        m
    } else {
        1.0
    }
}

/// Absolute tolerance for equality of values and relative tolerance for
/// residuals attaining the norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerances {
    pub fn for_values(values: &[f64]) -> Self {
        Self {
            abs: ABS_TOL_FACTOR * value_scale(values),
            rel: REL_TOL,
        }
    }
}

/// Coefficients of `a * exp(k*t) + b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentialModel {
    pub a: f64,
    pub b: f64,
    pub k: f64,
}

impl ExponentialModel {
    pub fn new(a: f64, b: f64, k: f64) -> Self {
        Self { a, b, k }
    }

    pub fn constant(level: f64, k: f64) -> Self {
        Self {
            a: 0.0,
            b: level,
            k,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.k.is_finite()
    }
}

/// Coefficients of `d + c*t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub c: f64,
    pub d: f64,
}

impl LinearModel {
    pub fn eval(&self, t: f64) -> f64 {
        self.d + self.c * t
    }
}

pub(crate) fn check_budget(k: f64, span: f64) -> Result<()> {
    let exponent = (k * span).abs();
    if exponent.is_nan() || exponent > EXPONENT_BUDGET {
        return Err(FitError::OverflowRisk {
            exponent,
            budget: EXPONENT_BUDGET,
        });
    }
    Ok(())
}

/// `model(t_i)` for every instant.
pub fn evaluate(model: &ExponentialModel, t: &[f64]) -> Result<Vec<f64>> {
    if !model.is_finite() {
        return Err(FitError::NonFinite { index: 0 });
    }
    if let Some(index) = t.iter().position(|x| !x.is_finite()) {
        return Err(FitError::NonFinite { index });
    }
    let Some(&t0) = t.first() else {
        return Ok(Vec::new());
    };
    if model.a == 0.0 || model.k == 0.0 {
        return Ok(vec![model.a + model.b; t.len()]);
    }
    let (lo, hi) = t
        .iter()
        .fold((t0, t0), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    check_budget(model.k, hi - lo)?;
    let anchored = model.a * (model.k * t0).exp();
    if !anchored.is_finite() || anchored == 0.0 {
        return Err(FitError::OverflowRisk {
            exponent: (model.k * t0).abs(),
            budget: EXPONENT_BUDGET,
        });
    }
    Ok(t.iter()
        .map(|&x| anchored * (model.k * (x - t0)).exp() + model.b)
        .collect())
}

/// Converts an amplitude anchored at `t0` back to the public amplitude.
pub(crate) fn denormalize_amplitude(anchored: f64, k: f64, t0: f64) -> Result<f64> {
    if anchored == 0.0 {
        return Ok(0.0);
    }
    let a = anchored * (-k * t0).exp();
    if !a.is_finite() || a == 0.0 {
        return Err(FitError::OverflowRisk {
            exponent: (k * t0).abs(),
            budget: EXPONENT_BUDGET,
        });
    }
    Ok(a)
}

/// Sign of a residual; zero residuals carry no sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Negative => -1,
            Sign::Zero => 0,
            Sign::Positive => 1,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Sign::Negative => Sign::Positive,
            Sign::Zero => Sign::Zero,
            Sign::Positive => Sign::Negative,
        }
    }
}

/// An index where the residual attains the max-norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Critical {
    /// 0-based position in the series.
    pub index: usize,
    pub sign: Sign,
}

/// How a [`FitResult`] was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Evaluated,
    Constant,
    Interpolation,
    Remainders,
    Exhaustive,
    Refined,
}

/// Solver bookkeeping attached to a fit.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveStats {
    /// Improvement steps taken by the successive-remainders loop.
    pub iterations: usize,
    /// `m0 - M0` for the initial (reduced) data, when the loop ran.
    pub initial_gap: Option<usize>,
    /// Max-norm error of every iterate, starting with the constant fit.
    pub error_trace: Vec<f64>,
    /// Distinct amplitude candidates enumerated by the exhaustive search.
    pub pair_candidates: usize,
    /// Triples enumerated by the exhaustive search.
    pub triple_candidates: usize,
}

/// A model together with its residual certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub model: ExponentialModel,
    /// `T - f(t)`.
    pub residuals: Vec<f64>,
    /// `max |residuals|`.
    pub error: f64,
    pub critical: Vec<Critical>,
    pub shape_at_solution: Shape,
    pub method: Method,
    pub transform: SymmetryTransform,
    pub stats: SolveStats,
}

impl FitResult {
    pub(crate) fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }
}

/// Indices whose residual attains `error` within the relative tolerance,
/// tagged with the residual sign. When the error itself is negligible every
/// index is critical.
pub fn critical_indices(residuals: &[f64], error: f64, tol: &Tolerances) -> Vec<Critical> {
    let negligible = error <= tol.abs;
    residuals
        .iter()
        .enumerate()
        .filter(|(_, r)| negligible || r.abs() >= error * (1.0 - tol.rel))
        .map(|(index, &r)| Critical {
            index,
            sign: if r.abs() <= tol.abs {
                Sign::Zero
            } else if r > 0.0 {
                Sign::Positive
            } else {
                Sign::Negative
            },
        })
        .collect()
}

/// One representative (the first index) of every maximal run of equal
/// signs among the non-zero critical residuals. Its length is the longest
/// alternation the critical set contains.
pub fn sign_runs(critical: &[Critical]) -> Vec<Critical> {
    let mut runs: Vec<Critical> = Vec::new();
    for c in critical.iter().filter(|c| c.sign != Sign::Zero) {
        if runs.last().is_none_or(|r| r.sign != c.sign) {
            runs.push(*c);
        }
    }
    runs
}

pub(crate) fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Residuals, max-norm error and critical set of `model` on `series`.
pub fn error_of(
    series: &TimeSeries,
    model: &ExponentialModel,
    tol: &Tolerances,
) -> Result<FitResult> {
    let fitted = evaluate(model, series.times())?;
    let residuals: Vec<f64> = series
        .values()
        .iter()
        .zip(&fitted)
        .map(|(v, f)| v - f)
        .collect();
    let error = max_abs(&residuals);
    let critical = critical_indices(&residuals, error, tol);
    let shape_at_solution = classify(&residuals, tol.abs);
    Ok(FitResult {
        model: *model,
        residuals,
        error,
        critical,
        shape_at_solution,
        method: Method::Evaluated,
        transform: SymmetryTransform::IDENTITY,
        stats: SolveStats::default(),
    })
}

/// `(T_i - T_j) / (exp(k t_i) - exp(k t_j))`: the amplitude of the unique
/// member of `F_k` through both points.
///
/// The difference of exponentials is formed as `exp(k t0) * expm1(k dt)`
/// anchored at the earlier instant, so the result is symmetric in `(i, j)`.
pub fn interp_slope(ti: f64, vi: f64, tj: f64, vj: f64, k: f64) -> Result<f64> {
    if k == 0.0 {
        return Err(FitError::ZeroRate);
    }
    if ti == tj {
        return Err(FitError::DegenerateDenominator { i: 0, j: 1 });
    }
    let ((t0, v0), (t1, v1)) = if ti < tj {
        ((ti, vi), (tj, vj))
    } else {
        ((tj, vj), (ti, vi))
    };
    check_budget(k, t1 - t0)?;
    // exp(k t0) - exp(k t1) = -exp(k t0) * expm1(k (t1 - t0))
    let rel = -(k * (t1 - t0)).exp_m1();
    if rel == 0.0 || !rel.is_finite() {
        return Err(FitError::DegenerateDenominator { i: 0, j: 1 });
    }
    if v0 == v1 {
        return Ok(0.0);
    }
    denormalize_amplitude((v0 - v1) / rel, k, t0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn series_validation() {
        assert_eq!(
            TimeSeries::new(vec![], vec![]).unwrap_err(),
            FitError::EmptySeries
        );
        assert!(matches!(
            TimeSeries::new(vec![0.0, 1.0], vec![1.0]),
            Err(FitError::LengthMismatch { .. })
        ));
        assert_eq!(
            TimeSeries::new(vec![0.0, 1.0, 1.0], vec![1.0, 2.0, 3.0]).unwrap_err(),
            FitError::NonIncreasingTimes { index: 2 }
        );
        assert_eq!(
            TimeSeries::new(vec![0.0, f64::NAN], vec![1.0, 2.0]).unwrap_err(),
            FitError::NonFinite { index: 1 }
        );
    }

    #[test]
    fn evaluate_examples() {
        let t = [0.0, 1.0, 2.0];
        assert_eq!(
            evaluate(&ExponentialModel::new(0.0, 5.0, -1.0), &t).unwrap(),
            vec![5.0; 3]
        );
        assert_eq!(
            evaluate(&ExponentialModel::new(2.0, 1.0, 0.0), &[0.0, 7.0]).unwrap(),
            vec![3.0, 3.0]
        );
        let v = evaluate(&ExponentialModel::new(2.0, 1.0, -LN_2), &t).unwrap();
        for (got, want) in v.iter().zip([3.0, 2.0, 1.5]) {
            assert!(close(*got, want, 1e-15), "{got} vs {want}");
        }
    }

    #[test]
    fn evaluate_rejects_exponent_overflow() {
        let err = evaluate(&ExponentialModel::new(1.0, 0.0, -1.0), &[0.0, 701.0]).unwrap_err();
        assert!(matches!(err, FitError::OverflowRisk { .. }));
        // large absolute times are fine as long as the span is small
        let v = evaluate(&ExponentialModel::new(1e-300, 0.0, 1.0), &[690.0, 691.0]).unwrap();
        assert!(v.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn error_of_examples() {
        let model = ExponentialModel::new(2.0, 1.0, -LN_2);
        let t = vec![0.0, 1.0, 2.0];

        let s = TimeSeries::new(t.clone(), vec![3.0, 2.0, 1.5]).unwrap();
        let fit = error_of(&s, &model, &s.tolerances()).unwrap();
        assert!(fit.error <= 1e-15);
        assert_eq!(fit.critical.len(), 3);
        assert!(fit.critical.iter().all(|c| c.sign == Sign::Zero));

        let s = TimeSeries::new(t.clone(), vec![4.0, 2.0, 1.5]).unwrap();
        let fit = error_of(&s, &model, &s.tolerances()).unwrap();
        assert!(close(fit.error, 1.0, 1e-15));
        assert_eq!(
            fit.critical,
            vec![Critical {
                index: 0,
                sign: Sign::Positive
            }]
        );

        let s = TimeSeries::new(t, vec![3.1, 1.9, 1.6]).unwrap();
        let fit = error_of(&s, &model, &s.tolerances()).unwrap();
        assert!(close(fit.error, 0.1, 1e-14));
        let signs: Vec<_> = fit
            .critical
            .iter()
            .map(|c| (c.index, c.sign.as_i8()))
            .collect();
        assert_eq!(signs, vec![(0, 1), (1, -1), (2, 1)]);
    }

    #[test]
    fn interp_slope_examples() {
        assert_eq!(interp_slope(0.0, 2.0, 1.0, 2.0, -1.0).unwrap(), 0.0);
        assert!(close(
            interp_slope(0.0, 3.0, 1.0, 1.0, -LN_2).unwrap(),
            4.0,
            1e-14
        ));
        let f = |t: f64| 2.0 * (-t).exp() + 5.0;
        for (ti, tj) in [(0.0, 1.0), (0.5, 3.0), (2.0, 0.25)] {
            let a = interp_slope(ti, f(ti), tj, f(tj), -1.0).unwrap();
            assert!(close(a, 2.0, 1e-13), "{a}");
        }
        assert_eq!(
            interp_slope(1.0, 0.0, 2.0, 1.0, 0.0).unwrap_err(),
            FitError::ZeroRate
        );
        assert!(matches!(
            interp_slope(0.0, 0.0, 1e-30, 1.0, 1e-300),
            Err(FitError::DegenerateDenominator { .. })
        ));
    }
}
