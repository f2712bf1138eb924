//! Shared machinery for fitting `a * phi(t) + b` in the max-norm, where `phi`
//! is a fixed basis: `exp(k (t - t0))` for the exponential family and
//! `-(t - t0)` for lines.

use crate::error::{FitError, Result};
use crate::model::{max_abs, Tolerances};

pub(crate) trait Basis {
    fn value(&self, i: usize) -> f64;
    /// `value(i) - value(j)`.
    fn diff(&self, i: usize, j: usize) -> f64;

    fn amplitude(&self, x: &[f64], i: usize, j: usize) -> Result<f64> {
        let den = self.diff(i, j);
        if den == 0.0 || !den.is_finite() {
            return Err(FitError::DegenerateDenominator { i, j });
        }
        Ok((x[i] - x[j]) / den)
    }
}

/// `phi_i = exp(k s_i)` with `s_i = t_i - t_0`.
pub(crate) struct ExpBasis {
    k: f64,
    s: Vec<f64>,
    phi: Vec<f64>,
}

impl ExpBasis {
    pub(crate) fn new(t: &[f64], k: f64) -> Self {
        let t0 = t[0];
        let s: Vec<f64> = t.iter().map(|x| x - t0).collect();
        let phi = s.iter().map(|x| (k * x).exp()).collect();
        Self { k, s, phi }
    }
}

impl Basis for ExpBasis {
    fn value(&self, i: usize) -> f64 {
        self.phi[i]
    }

    fn diff(&self, i: usize, j: usize) -> f64 {
        // factor out the earlier exponential so the difference keeps its
        // relative accuracy for small k
        if i < j {
            -self.phi[i] * (self.k * (self.s[j] - self.s[i])).exp_m1()
        } else {
            self.phi[j] * (self.k * (self.s[i] - self.s[j])).exp_m1()
        }
    }
}

/// `phi_i = -(t_i - t_0)`: decreasing, so the decaying-case algorithm applies
/// unchanged with slope `-a`.
pub(crate) struct LineBasis {
    s: Vec<f64>,
}

impl LineBasis {
    pub(crate) fn new(t: &[f64]) -> Self {
        let t0 = t[0];
        Self {
            s: t.iter().map(|x| x - t0).collect(),
        }
    }
}

impl Basis for LineBasis {
    fn value(&self, i: usize) -> f64 {
        -self.s[i]
    }

    fn diff(&self, i: usize, j: usize) -> f64 {
        self.s[j] - self.s[i]
    }
}

pub(crate) fn remainder(values: &[f64], basis: &dyn Basis, a: f64, b: f64) -> Vec<f64> {
    values
        .iter()
        .enumerate()
        .map(|(i, v)| v - a * basis.value(i) - b)
        .collect()
}

/// Which tracked extremum an improvement step moved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexUpdate {
    /// New first minimum `m2 < m`.
    Min(usize),
    /// New last maximum `M2 > M`.
    Max(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Step {
    pub a_inc: f64,
    pub b_inc: f64,
    pub min_side: (usize, f64),
    pub max_side: (usize, f64),
    pub update: IndexUpdate,
}

/// Relative gap under which two amplitude candidates count as equal. Kept far
/// below `REL_TOL` so the tracked extrema stay on the true extrema.
pub(crate) const AMPLITUDE_TIE: f64 = 1e-13;

/// One constructive improvement on remainder `x` with `M < m`, where `m` is
/// the first minimum and `M` the last maximum of `x`.
pub(crate) fn improvement(x: &[f64], basis: &dyn Basis, m: usize, big_m: usize) -> Result<Step> {
    let n = x.len();
    if !(big_m < m && m < n) {
        return Err(FitError::InternalInvariant(format!(
            "improvement step needs M < m < n, got M={big_m} m={m} n={n}"
        )));
    }
    let near = |v: f64, best: f64| v <= best + AMPLITUDE_TIE * best.abs();

    let below: Vec<f64> = (0..m)
        .map(|j| basis.amplitude(x, j, m))
        .collect::<Result<_>>()?;
    let best_below = below.iter().copied().fold(f64::INFINITY, f64::min);
    // smallest j attaining the minimum
    let m2 = below.iter().position(|&v| near(v, best_below)).unwrap();

    let above: Vec<f64> = (big_m + 1..n)
        .map(|i| basis.amplitude(x, i, big_m))
        .collect::<Result<_>>()?;
    let best_above = above.iter().copied().fold(f64::INFINITY, f64::min);
    // largest i attaining the minimum
    let big_m2 = big_m + 1 + above.iter().rposition(|&v| near(v, best_above)).unwrap();

    let (a_min, a_max) = (best_below, best_above);
    let a_inc = a_min.min(a_max);
    if !(a_inc > 0.0) {
        return Err(FitError::InternalInvariant(format!(
            "non-positive amplitude increment {a_inc}: data not in the decaying case"
        )));
    }
    let b_inc = 0.5 * (x[big_m] - a_inc * basis.value(big_m) + x[m] - a_inc * basis.value(m));
    // equal candidates update M
    let update = if a_min < a_max && !near(a_max, a_min) {
        IndexUpdate::Min(m2)
    } else {
        IndexUpdate::Max(big_m2)
    };
    Ok(Step {
        a_inc,
        b_inc,
        min_side: (m2, a_min),
        max_side: (big_m2, a_max),
        update,
    })
}

/// First minimum and last maximum of `x`, ties under `tol.abs`.
pub(crate) fn extreme_indices(x: &[f64], tol: &Tolerances) -> (usize, usize) {
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let m = x.iter().position(|&v| v <= lo + tol.abs).unwrap();
    let big_m = x.iter().rposition(|&v| v >= hi - tol.abs).unwrap();
    (m, big_m)
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Remainders {
    /// Amplitude of `phi`.
    pub a: f64,
    pub b: f64,
    pub iterations: usize,
    pub initial_gap: usize,
    pub error_trace: Vec<f64>,
    pub steps: Vec<Step>,
}

/// Successive remainders on decaying-case data (last max before first min).
///
/// `m` and `M` are re-read from every remainder with the shared tolerance;
/// in exact arithmetic this coincides with updating only the index named by
/// the step.
pub(crate) fn successive_remainders(
    values: &[f64],
    basis: &dyn Basis,
    tol: &Tolerances,
) -> Result<Remainders> {
    let n = values.len();
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut a = 0.0;
    let mut b = 0.5 * (hi + lo);
    let (mut m, mut big_m) = extreme_indices(values, tol);
    if big_m >= m {
        return Err(FitError::InternalInvariant(
            "successive remainders started on data that is not in the decaying case".into(),
        ));
    }
    let initial_gap = m - big_m;
    let mut error_trace = Vec::new();
    let mut steps = Vec::new();

    while big_m < m {
        if steps.len() > n {
            return Err(FitError::InternalInvariant(
                "successive remainders did not terminate".into(),
            ));
        }
        let x = remainder(values, basis, a, b);
        error_trace.push(max_abs(&x));
        let step = improvement(&x, basis, m, big_m)?;
        a += step.a_inc;
        b += step.b_inc;
        match step.update {
            IndexUpdate::Min(j) => m = j,
            IndexUpdate::Max(i) => big_m = i,
        }
        steps.push(step);
        let x = remainder(values, basis, a, b);
        let (m_next, big_m_next) = extreme_indices(&x, tol);
        m = m.min(m_next);
        big_m = big_m.max(big_m_next);
    }
    error_trace.push(max_abs(&remainder(values, basis, a, b)));
    Ok(Remainders {
        a,
        b,
        iterations: steps.len(),
        initial_gap,
        error_trace,
        steps,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Enumeration {
    pub a: f64,
    pub b: f64,
    pub error: f64,
    pub triple: (usize, usize, usize),
    pub pairs: usize,
    pub triples: usize,
}

/// Exhaustive search over all triples `i < j < l`: amplitude through the
/// outer pair, offset centering the inner residual. Ties keep the
/// lexicographically smallest triple.
pub(crate) fn enumerate_triples(values: &[f64], basis: &dyn Basis) -> Result<Enumeration> {
    let n = values.len();
    let mut best: Option<Enumeration> = None;
    let (mut pairs, mut triples) = (0, 0);
    for i in 0..n {
        for l in i + 2..n {
            let a = basis.amplitude(values, i, l)?;
            pairs += 1;
            for j in i + 1..l {
                triples += 1;
                let b = 0.5 * (values[i] - a * basis.value(i) + values[j] - a * basis.value(j));
                let error = max_abs(&remainder(values, basis, a, b));
                if best.as_ref().is_none_or(|e| error < e.error) {
                    best = Some(Enumeration {
                        a,
                        b,
                        error,
                        triple: (i, j, l),
                        pairs: 0,
                        triples: 0,
                    });
                }
            }
        }
    }
    let mut best = best.ok_or_else(|| {
        FitError::InternalInvariant("exhaustive search needs at least three points".into())
    })?;
    best.pairs = pairs;
    best.triples = triples;
    Ok(best)
}
