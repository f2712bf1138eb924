//! Reference computations for tests: synthetic data, a dense scan of the
//! fixed-rate error and a brute-force minimax line.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{FitError, Result};
use crate::fixed_k::{solve_constant, solve_exhaustive};
use crate::model::{evaluate, ExponentialModel, LinearModel, TimeSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseShape {
    None,
    /// `+delta` at even (0-based) indices, `-delta` at odd ones.
    Alternating,
    /// Independent draws from `U[-delta, delta]`.
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub model: ExponentialModel,
    pub times: Vec<f64>,
    pub delta: f64,
    pub noise: NoiseShape,
    pub seed: u64,
}

/// Samples `model` at `times` and adds the requested noise.
pub fn synth(spec: &SynthSpec) -> Result<TimeSeries> {
    if !(spec.delta >= 0.0) {
        return Err(FitError::InvalidArgument(format!(
            "noise amplitude must be non-negative, got {}",
            spec.delta
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut values = evaluate(&spec.model, &spec.times)?;
    for (i, v) in values.iter_mut().enumerate() {
        *v += match spec.noise {
            NoiseShape::None => 0.0,
            NoiseShape::Alternating if i % 2 == 0 => spec.delta,
            NoiseShape::Alternating => -spec.delta,
            NoiseShape::Uniform if spec.delta == 0.0 => 0.0,
            NoiseShape::Uniform => rng.gen_range(-spec.delta..=spec.delta),
        };
    }
    TimeSeries::new(spec.times.clone(), values)
}

/// `n` sorted, distinct instants drawn from `U[0, span]`, the first pinned
/// at 0 and the last at `span`.
pub fn random_times<R: Rng>(rng: &mut R, n: usize, span: f64) -> Vec<f64> {
    loop {
        let mut t: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..span)).collect();
        if n >= 1 {
            t[0] = 0.0;
        }
        if n >= 2 {
            t[n - 1] = span;
        }
        t.sort_by(f64::total_cmp);
        if t.windows(2).all(|w| w[0] < w[1]) {
            return t;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KScan {
    /// First sampled rate with the smallest error.
    pub k: f64,
    pub error: f64,
    /// `(k, E(k))` for every sample.
    pub table: Vec<(f64, f64)>,
}

/// `E(k)` on `points` equally spaced rates of `[lo, hi]`, computed by
/// exhaustive triple enumeration.
pub fn dense_k_scan(series: &TimeSeries, lo: f64, hi: f64, points: usize) -> Result<KScan> {
    if points < 2 || !(lo < hi) {
        return Err(FitError::InvalidArgument(format!(
            "scan needs lo < hi and two points, got [{lo}, {hi}] with {points}"
        )));
    }
    let step = (hi - lo) / (points - 1) as f64;
    let table = (0..points)
        .map(|i| {
            let k = if i == points - 1 {
                hi
            } else {
                lo + i as f64 * step
            };
            let fit = if k == 0.0 || series.len() < 3 {
                solve_constant(series, k)?
            } else {
                solve_exhaustive(series, k)?
            };
            Ok((k, fit.error))
        })
        .collect::<Result<Vec<_>>>()?;
    let (k, error) = table
        .iter()
        .copied()
        .fold((f64::NAN, f64::INFINITY), |best, (k, e)| {
            if e < best.1 {
                (k, e)
            } else {
                best
            }
        });
    Ok(KScan { k, error, table })
}

/// True when `samples` fall (up to `tau`) to their minimum and then rise.
pub fn unimodal_check(samples: &[f64], tau: f64) -> bool {
    let Some(p) = samples
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
    else {
        return true;
    };
    let falling = samples[..=p].windows(2).all(|w| w[1] <= w[0] + tau);
    let rising = samples[p..].windows(2).all(|w| w[1] >= w[0] - tau);
    falling && rising
}

/// Best max-norm line by trying every triple: slope through the outer pair,
/// offset splitting the gap to the middle point.
pub fn exhaustive_line(series: &TimeSeries) -> (LinearModel, f64) {
    let (t, v) = (series.times(), series.values());
    let err_of = |m: &LinearModel| {
        t.iter()
            .zip(v)
            .map(|(&x, y)| (y - m.eval(x)).abs())
            .fold(0.0, f64::max)
    };
    let n = t.len();
    if n < 3 {
        let c = if n == 2 {
            (v[1] - v[0]) / (t[1] - t[0])
        } else {
            0.0
        };
        let m = LinearModel {
            c,
            d: v[0] - c * t[0],
        };
        return (m, err_of(&m));
    }
    let mut best = (LinearModel { c: 0.0, d: 0.0 }, f64::INFINITY);
    for i in 0..n {
        for l in i + 2..n {
            let c = (v[l] - v[i]) / (t[l] - t[i]);
            for j in i + 1..l {
                let d = 0.5 * (v[i] - c * t[i] + v[j] - c * t[j]);
                let m = LinearModel { c, d };
                let e = err_of(&m);
                if e < best.1 {
                    best = (m, e);
                }
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(noise: NoiseShape) -> SynthSpec {
        SynthSpec {
            model: ExponentialModel::new(2.0, 1.0, -1.0),
            times: vec![0.0, 1.0, 2.0, 3.0],
            delta: 0.1,
            noise,
            seed: 7,
        }
    }

    #[test]
    fn synth_shapes() {
        let clean = synth(&spec(NoiseShape::None)).unwrap();
        assert_eq!(clean.values()[0], 3.0);
        let alt = synth(&spec(NoiseShape::Alternating)).unwrap();
        let d: Vec<f64> = alt
            .values()
            .iter()
            .zip(clean.values())
            .map(|(a, c)| a - c)
            .collect();
        assert!((d[0] - 0.1).abs() < 1e-15 && (d[1] + 0.1).abs() < 1e-15);
        let u1 = synth(&spec(NoiseShape::Uniform)).unwrap();
        let u2 = synth(&spec(NoiseShape::Uniform)).unwrap();
        assert_eq!(u1, u2);
        assert!(u1
            .values()
            .iter()
            .zip(clean.values())
            .all(|(a, c)| (a - c).abs() <= 0.1));
    }

    #[test]
    fn scan_finds_zigzag_rate() {
        let s = synth(&spec(NoiseShape::Alternating)).unwrap();
        let scan = dense_k_scan(&s, -2.0, -0.5, 151).unwrap();
        assert!((scan.k + 1.0).abs() < 1e-12);
        assert!((scan.error - 0.1).abs() < 1e-12);
        assert_eq!(scan.table.len(), 151);
        // off-grid optimum: within one spacing
        let fine = dense_k_scan(&s, -2.0, -0.5, 100_000).unwrap();
        let step = 1.5 / 99_999.0;
        assert!((fine.k + 1.0).abs() <= step);
        assert!(fine.error >= 0.1 - 1e-12 && fine.error - 0.1 < 1e-4);
    }

    #[test]
    fn unimodality() {
        assert!(unimodal_check(&[3.0, 2.0, 1.0, 1.0, 2.0], 0.0));
        assert!(!unimodal_check(&[3.0, 1.0, 2.0, 1.5, 4.0], 0.0));
        assert!(unimodal_check(&[3.0, 1.0, 1.0 - 1e-12, 1.0, 4.0], 1e-9));
        assert!(unimodal_check(&[], 0.0));
    }

    #[test]
    fn brute_force_line() {
        let s = TimeSeries::new(vec![0.0, 1.0, 2.0], vec![4.0, 1.0, 0.0]).unwrap();
        let (m, e) = exhaustive_line(&s);
        assert!((m.c + 2.0).abs() < 1e-14 && (m.d - 3.5).abs() < 1e-14);
        assert!((e - 0.5).abs() < 1e-14);
    }

    #[test]
    fn random_times_are_sorted() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = random_times(&mut rng, 8, 5.0);
        assert_eq!((t[0], t[7]), (0.0, 5.0));
        assert!(t.windows(2).all(|w| w[0] < w[1]));
    }
}
