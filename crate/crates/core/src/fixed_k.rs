//! Best `(a, b)` for a fixed rate `k`.
//!
//! Two independent routes are provided: [`solve_exhaustive`] enumerates every
//! triple of observations, [`solve_remainders`] builds the optimum by
//! successively fitting the remainder of the current approximation. They must
//! agree; the former is the reference for the latter.

use crate::engine::{self, ExpBasis, IndexUpdate};
use crate::error::{FitError, Result};
use crate::model::{
    check_budget, denormalize_amplitude, error_of, ExponentialModel, FitResult, Method, SolveStats,
    TimeSeries,
};
use crate::shape::{classify, reduce_to_case1, undo_transform};

/// Midrange level `(max T + min T) / 2`, the best member of `F_0`. It is also
/// the optimum for every `k` when the data are alternated.
pub fn solve_constant(series: &TimeSeries, k: f64) -> Result<FitResult> {
    let v = series.values();
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let model = ExponentialModel::constant(0.5 * (hi + lo), k);
    Ok(error_of(series, &model, &series.tolerances())?.with_method(Method::Constant))
}

/// One or two observations are matched exactly.
fn solve_small(series: &TimeSeries, k: f64) -> Result<FitResult> {
    let (t, v) = (series.times(), series.values());
    if series.len() == 1 || k == 0.0 || v[0] == v[1] {
        return solve_constant(series, k);
    }
    check_budget(k, series.span())?;
    let rel = -(k * (t[1] - t[0])).exp_m1();
    if rel == 0.0 {
        return Err(FitError::DegenerateDenominator { i: 0, j: 1 });
    }
    let anchored = (v[0] - v[1]) / rel;
    let model = ExponentialModel::new(
        denormalize_amplitude(anchored, k, t[0])?,
        v[0] - anchored,
        k,
    );
    Ok(error_of(series, &model, &series.tolerances())?.with_method(Method::Interpolation))
}

/// Algorithm of choice for small data: every triple `i < j < l` proposes
/// `a = a_il` and `b` centering the residual at `j`; the candidate with the
/// smallest max-norm error wins (ties: lexicographically smallest triple).
///
/// `stats.pair_candidates` counts the distinct amplitudes, which is
/// `(n-1)(n-2)/2`; `stats.triple_candidates` counts the triples.
pub fn solve_exhaustive(series: &TimeSeries, k: f64) -> Result<FitResult> {
    if series.len() <= 2 {
        return solve_small(series, k);
    }
    if k == 0.0 {
        return Err(FitError::ZeroRate);
    }
    check_budget(k, series.span())?;
    let basis = ExpBasis::new(series.times(), k);
    let best = engine::enumerate_triples(series.values(), &basis)?;
    let model = ExponentialModel::new(
        denormalize_amplitude(best.a, k, series.times()[0])?,
        best.b,
        k,
    );
    let mut fit = error_of(series, &model, &series.tolerances())?.with_method(Method::Exhaustive);
    fit.stats = SolveStats {
        pair_candidates: best.pairs,
        triple_candidates: best.triples,
        ..SolveStats::default()
    };
    Ok(fit)
}

/// Result of one constructive improvement of a remainder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    /// Amplitude increment, strictly positive.
    pub a_increment: f64,
    pub b_increment: f64,
    /// `(m2, a_{m2 m})`: best partner before the first minimum.
    pub min_candidate: (usize, f64),
    /// `(M2, a_{M2 M})`: best partner after the last maximum.
    pub max_candidate: (usize, f64),
    pub update: IndexUpdate,
}

/// One improvement of remainder `x` at rate `k < 0`, where `m` is the first
/// index of its minimum and `big_m` the last index of its maximum, `big_m < m`
/// (0-based). Subtracting `a_increment * exp(k t) + b_increment` from `x`
/// strictly lowers its max-norm.
pub fn improvement_step(
    x: &[f64],
    t: &[f64],
    k: f64,
    m: usize,
    big_m: usize,
) -> Result<StepOutcome> {
    if x.len() != t.len() || t.is_empty() {
        return Err(FitError::LengthMismatch {
            times: t.len(),
            values: x.len(),
        });
    }
    if !(k < 0.0) {
        return Err(FitError::InvalidArgument(format!(
            "improvement step needs k < 0, got {k}"
        )));
    }
    check_budget(k, t[t.len() - 1] - t[0])?;
    let basis = ExpBasis::new(t, k);
    let step = engine::improvement(x, &basis, m, big_m)?;
    let scale = |a: f64| denormalize_amplitude(a, k, t[0]);
    Ok(StepOutcome {
        a_increment: scale(step.a_inc)?,
        b_increment: step.b_inc,
        min_candidate: (step.min_side.0, scale(step.min_side.1)?),
        max_candidate: (step.max_side.0, scale(step.max_side.1)?),
        update: step.update,
    })
}

/// Successive-remainders solution of the fixed-`k` problem.
///
/// Constant and alternated data return the midrange level. Otherwise the
/// data are reflected into the decaying case, improved step by step until
/// the remainder alternates, and reflected back. `k == 0` yields the
/// midrange level as well.
pub fn solve_remainders(series: &TimeSeries, k: f64) -> Result<FitResult> {
    if series.len() <= 2 {
        return solve_small(series, k);
    }
    if k == 0.0 {
        return solve_constant(series, k);
    }
    check_budget(k, series.span())?;
    let tol = series.tolerances();
    if classify(series.values(), tol.abs).is_trivial() {
        return solve_constant(series, k);
    }
    let reduced = reduce_to_case1(series, k)?;
    let basis = ExpBasis::new(reduced.series.times(), reduced.k);
    let rem = engine::successive_remainders(reduced.series.values(), &basis, &tol)?;
    let a = denormalize_amplitude(rem.a, reduced.k, reduced.series.times()[0])?;
    let model = undo_transform(
        &ExponentialModel::new(a, rem.b, reduced.k),
        &reduced.transform,
    );
    let mut fit = error_of(series, &model, &tol)?.with_method(Method::Remainders);
    fit.transform = reduced.transform;
    fit.stats = SolveStats {
        iterations: rem.iterations,
        initial_gap: Some(rem.initial_gap),
        error_trace: rem.error_trace,
        ..SolveStats::default()
    };
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Sign;
    use std::f64::consts::LN_2;

    fn series(t: &[f64], v: &[f64]) -> TimeSeries {
        TimeSeries::new(t.to_vec(), v.to_vec()).unwrap()
    }

    fn member(a: f64, b: f64, k: f64, t: &[f64]) -> TimeSeries {
        series(
            t,
            &t.iter().map(|x| a * (k * x).exp() + b).collect::<Vec<_>>(),
        )
    }

    #[test]
    fn constant_examples() {
        let s = series(&[0.0, 1.0, 2.0], &[1.0, 3.0, 2.0]);
        let fit = solve_constant(&s, -1.0).unwrap();
        assert_eq!((fit.model.a, fit.model.b, fit.error), (0.0, 2.0, 1.0));

        let s = series(&[0.0, 1.0, 2.0], &[5.0, 5.0, 5.0]);
        let fit = solve_constant(&s, 0.0).unwrap();
        assert_eq!((fit.model.b, fit.error), (5.0, 0.0));
    }

    #[test]
    fn alternated_data_is_not_beaten_by_any_exponential() {
        let s = series(&[0.0, 1.0, 2.0], &[3.0, 1.0, 3.0]);
        for k in [-3.0, -1.0, -0.1, 0.1, 1.0, 3.0] {
            let exhaustive = solve_exhaustive(&s, k).unwrap();
            assert!((exhaustive.error - 1.0).abs() < 1e-15, "k={k}");
            let fit = solve_remainders(&s, k).unwrap();
            assert_eq!(fit.method, Method::Constant);
            assert_eq!((fit.model.b, fit.error), (2.0, 1.0));
        }
    }

    #[test]
    fn small_inputs_are_interpolated() {
        let s = series(&[2.0], &[7.0]);
        let fit = solve_remainders(&s, -1.0).unwrap();
        assert_eq!((fit.model.a, fit.model.b, fit.error), (0.0, 7.0, 0.0));

        let s = series(&[0.0, 1.0], &[3.0, 1.0]);
        for fit in [
            solve_remainders(&s, -LN_2).unwrap(),
            solve_exhaustive(&s, -LN_2).unwrap(),
        ] {
            assert_eq!(fit.method, Method::Interpolation);
            assert!((fit.model.a - 4.0).abs() < 1e-14);
            assert!((fit.model.b + 1.0).abs() < 1e-14);
            assert!(fit.error < 1e-14);
        }
    }

    #[test]
    fn exhaustive_recovers_members() {
        let s = member(2.0, 1.0, -1.0, &[0.0, 1.0, 2.0, 3.0]);
        let fit = solve_exhaustive(&s, -1.0).unwrap();
        assert!(fit.error < 1e-14);
        assert!((fit.model.a - 2.0).abs() < 1e-13);
        assert!((fit.model.b - 1.0).abs() < 1e-13);
    }

    #[test]
    fn exhaustive_alternating_perturbation() {
        let t: [f64; 4] = [0.0, 1.0, 2.0, 3.0];
        let noise = [0.1, -0.1, 0.1, -0.1];
        let v: Vec<f64> = t
            .iter()
            .zip(noise)
            .map(|(x, d)| 2.0 * (-x).exp() + 1.0 + d)
            .collect();
        let s = series(&t, &v);
        let fit = solve_exhaustive(&s, -1.0).unwrap();
        assert!((fit.error - 0.1).abs() < 1e-14);
        assert!((fit.model.a - 2.0).abs() < 1e-13);
        assert!((fit.model.b - 1.0).abs() < 1e-13);
        // no (a, b) on a fine local grid does better
        for da in -20..=20 {
            for db in -20..=20 {
                let m = ExponentialModel::new(2.0 + da as f64 * 1e-3, 1.0 + db as f64 * 1e-3, -1.0);
                let e = error_of(&s, &m, &s.tolerances()).unwrap().error;
                assert!(e >= 0.1 - 1e-14);
            }
        }
        let rem = solve_remainders(&s, -1.0).unwrap();
        assert!((rem.error - 0.1).abs() < 1e-14);
    }

    #[test]
    fn exhaustive_candidate_count() {
        let t: Vec<f64> = (0..6).map(f64::from).collect();
        let v = [5.0, 3.0, 4.0, 1.0, 2.0, 0.0];
        let fit = solve_exhaustive(&series(&t, &v), -0.5).unwrap();
        assert_eq!(fit.stats.pair_candidates, 10);
        assert_eq!(fit.stats.triple_candidates, 20);
    }

    #[test]
    fn exhaustive_rejects_zero_rate() {
        let s = series(&[0.0, 1.0, 2.0], &[1.0, 0.0, 2.0]);
        assert_eq!(solve_exhaustive(&s, 0.0).unwrap_err(), FitError::ZeroRate);
    }

    #[test]
    fn step_interpolates_two_points() {
        let out = improvement_step(&[1.0, -1.0], &[0.0, 1.0], -LN_2, 1, 0).unwrap();
        assert!((out.a_increment - 4.0).abs() < 1e-14);
        assert!((out.b_increment + 3.0).abs() < 1e-14);
        // both candidates coincide, so M moves
        assert_eq!(out.update, IndexUpdate::Max(1));
    }

    #[test]
    fn step_on_single_exponential_band() {
        // x is exactly 3 exp(-t) except for interior points inside the band
        let t: [f64; 4] = [0.0, 1.0, 2.0, 3.0];
        let mut x: Vec<f64> = t.iter().map(|s| 3.0 * (-s).exp()).collect();
        x[1] -= 0.05;
        x[2] += 0.01;
        let out = improvement_step(&x, &t, -1.0, 3, 0).unwrap();
        assert!(out.a_increment > 0.0);
        let after: Vec<f64> = x
            .iter()
            .zip(&t)
            .map(|(v, s)| v - out.a_increment * (-s).exp() - out.b_increment)
            .collect();
        let before = x
            .iter()
            .fold(0.0_f64, |m, v: &f64| m.max((v - 0.5 * (3.0 + x[3])).abs()));
        let now = after.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        assert!(now < before);
    }

    #[test]
    fn step_rejects_bad_preconditions() {
        assert!(matches!(
            improvement_step(&[1.0, -1.0], &[0.0, 1.0], 1.0, 1, 0),
            Err(FitError::InvalidArgument(_))
        ));
        assert!(matches!(
            improvement_step(&[1.0, -1.0], &[0.0, 1.0], -1.0, 0, 1),
            Err(FitError::InternalInvariant(_))
        ));
        // increasing data at k < 0 is not in the decaying case
        assert!(matches!(
            improvement_step(&[-1.0, 0.5, 1.0], &[0.0, 1.0, 2.0], -1.0, 2, 0),
            Err(FitError::InternalInvariant(_))
        ));
    }

    #[test]
    fn remainders_match_exhaustive_on_member() {
        let s = series(&[0.0, 1.0, 2.0, 3.0, 4.0], &[10.0, 6.0, 4.0, 3.0, 2.5]);
        let rem = solve_remainders(&s, -LN_2).unwrap();
        let exh = solve_exhaustive(&s, -LN_2).unwrap();
        assert!(rem.error <= s.tolerances().abs);
        assert!((rem.error - exh.error).abs() <= 1e-9 * s.scale());
        assert!((rem.model.a - 8.0).abs() < 1e-9 * 8.0);
        assert!((rem.model.b - 2.0).abs() < 1e-9 * 2.0);
        assert!((exh.model.a - 8.0).abs() < 1e-9 * 8.0);
    }

    #[test]
    fn remainders_handle_every_case() {
        let t = [0.0, 0.5, 1.5, 2.0, 3.5];
        let base = [4.0, 1.5, 2.2, 0.7, 0.1];
        for flip_value in [false, true] {
            for k in [-0.8, 0.8] {
                let v: Vec<f64> = base
                    .iter()
                    .map(|&x: &f64| if flip_value { -x } else { x })
                    .collect();
                let s = series(&t, &v);
                let rem = solve_remainders(&s, k).unwrap();
                let exh = solve_exhaustive(&s, k).unwrap();
                assert!(
                    (rem.error - exh.error).abs() <= 1e-12 * s.scale(),
                    "k={k} flip={flip_value}: {} vs {}",
                    rem.error,
                    exh.error
                );
                let signs: Vec<_> = rem.critical.iter().map(|c| c.sign).collect();
                assert!(signs.len() >= 3 && !signs.contains(&Sign::Zero));
            }
        }
    }

    #[test]
    fn remainders_trace_descends() {
        let s = series(
            &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
            &[9.0, 4.0, 5.0, 2.5, 1.0, 1.2, 0.0],
        );
        let fit = solve_remainders(&s, -0.3).unwrap();
        let trace = &fit.stats.error_trace;
        assert_eq!(trace.len(), fit.stats.iterations + 1);
        assert!(trace.windows(2).all(|w| w[1] < w[0]), "{trace:?}");
        assert!(fit.stats.iterations <= fit.stats.initial_gap.unwrap());
        assert!((trace.last().unwrap() - fit.error).abs() < 1e-12);
    }
}
