#![allow(dead_code)]

use expcheb::shape::{classify, ShapeKind};
use expcheb::TimeSeries;
use rand::Rng;

/// Values drawn from `U[-10, 10]` at random instants, negated when needed so
/// that the last maximum precedes the first minimum. `None` for constant or
/// alternated draws.
pub fn case1_series<R: Rng>(rng: &mut R, n: usize) -> Option<TimeSeries> {
    let span = rng.gen_range(0.5..10.0);
    let t = expcheb::oracle::random_times(rng, n, span);
    let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect();
    case1_from(t, v)
}

pub fn case1_from(t: Vec<f64>, mut v: Vec<f64>) -> Option<TimeSeries> {
    let tol = expcheb::Tolerances::for_values(&v);
    match classify(&v, tol.abs).kind() {
        ShapeKind::MaxBeforeMin => {}
        ShapeKind::MinBeforeMax => v.iter_mut().for_each(|x| *x = -*x),
        _ => return None,
    }
    TimeSeries::new(t, v).ok()
}

/// `kappa / span` with `kappa` in `[-3, -0.05]`.
pub fn scaled_rate<R: Rng>(rng: &mut R, series: &TimeSeries) -> f64 {
    rng.gen_range(-3.0..-0.05) / series.span()
}

pub fn rel_close(x: f64, y: f64, rel: f64) -> bool {
    (x - y).abs() <= rel * y.abs().max(f64::MIN_POSITIVE)
}
