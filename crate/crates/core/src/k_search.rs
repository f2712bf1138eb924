//! Search over the rate `k`.
//!
//! The best fixed-rate error `E(k)` is quasiconvex, so a shrinking grid
//! converges to the optimal rate. The sign pattern of the critical residuals
//! at a fixed `k` tells on which side of the optimum `k` lies, and four
//! alternating critical indices pin the optimum down through a single
//! equation in `k`.

use serde::{Deserialize, Serialize};

use crate::error::{FitError, Result};
use crate::fixed_k::{solve_constant, solve_remainders};
use crate::linear::fit_line;
use crate::model::{
    check_budget, error_of, sign_runs, ExponentialModel, FitResult, Method, Sign, TimeSeries,
    Tolerances, EXPONENT_BUDGET,
};

/// Default number of samples per sweep.
pub const DEFAULT_SAMPLES: usize = 33;
/// Default stop threshold, relative to the interval width.
pub const DEFAULT_EPSILON_REL: f64 = 1e-12;
pub const DEFAULT_MAX_SWEEPS: usize = 200;
/// Ratio between the extreme half-lives of the default interval and the span.
pub const DEFAULT_INTERVAL_RATIO: f64 = 64.0;
/// Relative width at which the bisection on the pairing equation stops.
pub const REFINE_REL_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub k_lo: f64,
    pub k_hi: f64,
    /// Samples per sweep, odd and at least 3.
    pub samples: usize,
    /// Sweeps stop once the grid spacing is at most this.
    pub epsilon: f64,
    pub max_sweeps: usize,
}

impl SearchConfig {
    pub fn new(k_lo: f64, k_hi: f64) -> Self {
        Self {
            k_lo,
            k_hi,
            samples: DEFAULT_SAMPLES,
            epsilon: DEFAULT_EPSILON_REL * (k_hi - k_lo).abs(),
            max_sweeps: DEFAULT_MAX_SWEEPS,
        }
    }

    /// Default interval for `series` with default sweep settings.
    pub fn for_series(series: &TimeSeries) -> Result<Self> {
        let (lo, hi) = default_interval(series)?;
        Ok(Self::new(lo, hi))
    }

    pub fn validate(&self, series: &TimeSeries) -> Result<()> {
        let bad = |msg: String| Err(FitError::InvalidConfig(msg));
        if !(self.k_lo.is_finite() && self.k_hi.is_finite() && self.k_lo < self.k_hi) {
            return bad(format!(
                "need k_lo < k_hi, got [{}, {}]",
                self.k_lo, self.k_hi
            ));
        }
        if self.samples < 3 || self.samples.is_multiple_of(2) {
            return bad(format!(
                "samples must be odd and >= 3, got {}",
                self.samples
            ));
        }
        if !(self.epsilon > 0.0) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if self.max_sweeps == 0 {
            return bad("max_sweeps must be at least 1".into());
        }
        check_budget(self.k_lo.abs().max(self.k_hi.abs()), series.span())
    }
}

/// `[-C, -1/C] * ln 2 / span` (half-lives between `span/C` and `C*span`),
/// mirrored to positive rates when the best line says the data grow
/// convexly or fall concavely.
pub fn default_interval(series: &TimeSeries) -> Result<(f64, f64)> {
    if series.len() < 2 {
        return Err(FitError::InvalidArgument(
            "a rate interval needs at least two instants".into(),
        ));
    }
    let base = std::f64::consts::LN_2 / series.span();
    let c = DEFAULT_INTERVAL_RATIO;
    let negative = (-c * base, -base / c);
    if series.len() < 3 {
        return Ok(negative);
    }
    let line = fit_line(series)?;
    let runs = sign_runs(&line.critical);
    let positive_rate = match runs.first() {
        Some(first) if line.error > series.tolerances().abs && line.model.c != 0.0 => {
            (first.sign == Sign::Positive) == (line.model.c > 0.0)
        }
        _ => false,
    };
    Ok(if positive_rate {
        (base / c, c * base)
    } else {
        negative
    })
}

/// Sign pattern of the critical residuals `T - f(t)` at a fixed-rate optimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlternationPattern {
    /// `+ - +`
    MaxMinMax,
    /// `- + -`
    MinMaxMin,
    /// Four or more alternating critical residuals.
    FourPlus,
    /// Error negligible or fewer than three alternations.
    Degenerate,
}

impl AlternationPattern {
    pub fn of(fit: &FitResult, tol: &Tolerances) -> Self {
        if fit.error <= tol.abs {
            return Self::Degenerate;
        }
        let runs = sign_runs(&fit.critical);
        match runs.len() {
            n if n >= 4 => Self::FourPlus,
            3 if runs[0].sign == Sign::Positive => Self::MaxMinMax,
            3 => Self::MinMaxMin,
            _ => Self::Degenerate,
        }
    }

    fn is_three_point(self) -> bool {
        matches!(self, Self::MaxMinMax | Self::MinMaxMin)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub k: f64,
    pub error: f64,
    pub pattern: AlternationPattern,
}

fn profile_fit(series: &TimeSeries, k: f64) -> Result<(FitResult, AlternationPattern)> {
    check_budget(k, series.span())?;
    let fit = solve_remainders(series, k)?;
    let pattern = AlternationPattern::of(&fit, &series.tolerances());
    Ok((fit, pattern))
}

/// `E(k)`, the best fixed-rate error, with its residual pattern.
pub fn error_profile(series: &TimeSeries, k: f64) -> Result<ProfilePoint> {
    let (fit, pattern) = profile_fit(series, k)?;
    Ok(ProfilePoint {
        k,
        error: fit.error,
        pattern,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSearch {
    /// Fixed-rate optimum at the selected rate.
    pub fit: FitResult,
    pub k: f64,
    pub sweeps: usize,
    /// Grid spacing of the last sweep.
    pub spacing: f64,
    /// The selected rate is an end point of the configured interval.
    pub boundary: bool,
    pub evaluations: usize,
}

/// Shrinking-grid minimization of `E(k)` over `[cfg.k_lo, cfg.k_hi]`.
///
/// Every sweep samples `d` equally spaced rates, keeps the first one with
/// the smallest error, and re-centres an interval of half-width equal to the
/// current spacing on it (clamped to the configured interval). Constant or
/// alternated data short-circuit to the midrange level with `k = 0`.
pub fn grid_search(series: &TimeSeries, cfg: &SearchConfig) -> Result<GridSearch> {
    cfg.validate(series)?;
    let tol = series.tolerances();
    if crate::shape::classify(series.values(), tol.abs).is_trivial() {
        return Ok(GridSearch {
            fit: solve_constant(series, 0.0)?,
            k: 0.0,
            sweeps: 0,
            spacing: 0.0,
            boundary: false,
            evaluations: 0,
        });
    }
    let (a0, b0) = (cfg.k_lo, cfg.k_hi);
    let d = cfg.samples;
    let mut evaluations = 0;
    let mut sweep = |a: f64, b: f64| -> Result<(f64, FitResult)> {
        let step = (b - a) / (d - 1) as f64;
        let mut best: Option<(f64, FitResult)> = None;
        for i in 0..d {
            let k = if i == d - 1 { b } else { a + i as f64 * step };
            // E is discontinuous at 0; sample its limit instead
            let k_eval = if k == 0.0 {
                if b > 0.0 {
                    1e-6 * step
                } else {
                    -1e-6 * step
                }
            } else {
                k
            };
            let fit = solve_remainders(series, k_eval)?;
            evaluations += 1;
            if best.as_ref().is_none_or(|(_, f)| fit.error < f.error) {
                best = Some((k, fit));
            }
        }
        Ok(best.expect("at least three samples"))
    };

    let (mut k_best, mut fit) = sweep(a0, b0)?;
    let mut spacing = (b0 - a0) / (d - 1) as f64;
    let mut sweeps = 1;
    while spacing > cfg.epsilon && sweeps < cfg.max_sweeps {
        let a = (k_best - spacing).max(a0);
        let b = (k_best + spacing).min(b0);
        (k_best, fit) = sweep(a, b)?;
        spacing = (b - a) / (d - 1) as f64;
        sweeps += 1;
    }
    Ok(GridSearch {
        fit,
        k: k_best,
        sweeps,
        spacing,
        boundary: k_best == a0 || k_best == b0,
        evaluations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BracketVerdict {
    ContainsOptimum,
    SameSide,
    Inconclusive,
}

/// Compares the residual patterns at two rates: they differ exactly when the
/// optimal rate lies between them.
pub fn alternation_bracket(series: &TimeSeries, k1: f64, k2: f64) -> Result<BracketVerdict> {
    if !(k1 < k2) {
        return Err(FitError::InvalidArgument(format!(
            "bracket needs k1 < k2, got [{k1}, {k2}]"
        )));
    }
    let p1 = error_profile(series, k1)?.pattern;
    let p2 = error_profile(series, k2)?.pattern;
    Ok(if !p1.is_three_point() || !p2.is_three_point() {
        BracketVerdict::Inconclusive
    } else if p1 == p2 {
        BracketVerdict::SameSide
    } else {
        BracketVerdict::ContainsOptimum
    })
}

/// True when `model` shows four alternating critical residuals (or matches
/// the data up to the absolute tolerance). The critical set is taken
/// relative to the max-norm, so no residual exceeds the equioscillation
/// level by more than `tol.rel`.
pub fn verify_optimal(
    series: &TimeSeries,
    model: &ExponentialModel,
    tol: &Tolerances,
) -> Result<bool> {
    let fit = error_of(series, model, tol)?;
    if fit.error <= tol.abs {
        return Ok(true);
    }
    Ok(sign_runs(&fit.critical).len() >= 4)
}

/// Amplitudes through `(i1, i3)` and `(i2, i4)`, both anchored at `t_{i1}`.
fn paired_amplitudes(t: &[f64], v: &[f64], idx: [usize; 4], k: f64) -> (f64, f64) {
    let [i1, i2, i3, i4] = idx;
    let a13 = (v[i1] - v[i3]) / -(k * (t[i3] - t[i1])).exp_m1();
    let a24 = (v[i2] - v[i4]) / -(k * (t[i4] - t[i2])).exp_m1() * (-k * (t[i2] - t[i1])).exp();
    (a13, a24)
}

/// Bisection for a root of `f` on `[lo, hi]`, stopping when the bracket is
/// narrower than `rel_tol` relative to its end points.
fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, rel_tol: f64) -> Result<f64> {
    let (mut f_lo, f_hi) = (f(lo), f(hi));
    if !f_lo.is_finite() || !f_hi.is_finite() {
        return Err(FitError::NoSignChange { lo, hi });
    }
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(FitError::NoSignChange { lo, hi });
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= rel_tol * lo.abs().max(hi.abs()) || mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if !f_mid.is_finite() {
            return Err(FitError::NoSignChange { lo, hi });
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Solves for the rate at which the amplitudes through `(i1, i3)` and
/// `(i2, i4)` coincide, then returns the model through those four indices
/// with alternating residuals, provided it passes [`verify_optimal`].
///
/// `indices` are 0-based and strictly increasing; the bracket must not
/// contain 0.
pub fn refine_k(
    series: &TimeSeries,
    indices: [usize; 4],
    bracket: (f64, f64),
) -> Result<FitResult> {
    let (k1, k2) = bracket;
    if !(k1 < k2) || k1 * k2 <= 0.0 {
        return Err(FitError::InvalidArgument(format!(
            "refinement bracket must be ordered and exclude 0, got [{k1}, {k2}]"
        )));
    }
    if indices.windows(2).any(|w| w[0] >= w[1]) || indices[3] >= series.len() {
        return Err(FitError::InvalidArgument(format!(
            "indices must be increasing and below {}, got {indices:?}",
            series.len()
        )));
    }
    check_budget(k1.abs().max(k2.abs()), series.span())?;
    let (t, v) = (series.times(), series.values());
    let tol = series.tolerances();
    let g = |k: f64| {
        let (a13, a24) = paired_amplitudes(t, v, indices, k);
        a13 - a24
    };
    let k = bisect(g, k1, k2, REFINE_REL_TOL)?;
    let (anchored, _) = paired_amplitudes(t, v, indices, k);
    let [i1, i2, ..] = indices;
    let b = 0.5 * (v[i1] - anchored + v[i2] - anchored * (k * (t[i2] - t[i1])).exp());
    let a = crate::model::denormalize_amplitude(anchored, k, t[i1])?;
    let model = ExponentialModel::new(a, b, k);
    if !verify_optimal(series, &model, &tol)? {
        return Err(FitError::RefinementRejected);
    }
    Ok(error_of(series, &model, &tol)?.with_method(Method::Refined))
}

/// Refines a grid result: widens a bracket around the selected rate until
/// the residual patterns at its ends differ, collects the critical indices
/// found there and runs [`refine_k`] on the first alternating quadruple the
/// check accepts.
pub fn refine_search(
    series: &TimeSeries,
    grid: &GridSearch,
    cfg: &SearchConfig,
) -> Result<FitResult> {
    let tol = series.tolerances();
    if grid.fit.error <= tol.abs || grid.k == 0.0 {
        return Err(FitError::InvalidArgument(
            "grid solution is exact or constant; nothing to refine".into(),
        ));
    }
    let k0 = grid.k;
    let mut h = grid.spacing.max(1e-9 * k0.abs());
    let found = loop {
        let lo = (k0 - h).max(cfg.k_lo);
        let hi = (k0 + h).min(cfg.k_hi);
        if lo < hi && lo * hi > 0.0 {
            let (fit_lo, p_lo) = profile_fit(series, lo)?;
            let (fit_hi, p_hi) = profile_fit(series, hi)?;
            if p_lo.is_three_point() && p_hi.is_three_point() && p_lo != p_hi {
                break Some((lo, hi, fit_lo, fit_hi));
            }
        }
        if (lo <= cfg.k_lo && hi >= cfg.k_hi) || h > (cfg.k_hi - cfg.k_lo) || lo * hi <= 0.0 {
            break None;
        }
        h *= 2.0;
    };
    let Some((lo, hi, fit_lo, fit_hi)) = found else {
        return Err(FitError::RefinementRejected);
    };
    let mut pool: Vec<usize> = fit_lo
        .critical
        .iter()
        .chain(&fit_hi.critical)
        .filter(|c| c.sign != Sign::Zero)
        .map(|c| c.index)
        .collect();
    pool.sort_unstable();
    pool.dedup();
    let n = pool.len();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                for d in c + 1..n {
                    let idx = [pool[a], pool[b], pool[c], pool[d]];
                    if let Ok(fit) = refine_k(series, idx, (lo, hi)) {
                        return Ok(fit);
                    }
                }
            }
        }
    }
    Err(FitError::RefinementRejected)
}

/// Largest rate magnitude allowed for `series`.
pub fn max_rate(series: &TimeSeries) -> f64 {
    EXPONENT_BUDGET / series.span()
}
