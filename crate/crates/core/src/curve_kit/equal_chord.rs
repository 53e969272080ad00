//! Equal-chord sampling of a closed parametric curve by shooting on the chord length.

use crate::numeric::distance;
use crate::{Error, Point, Result};

/// Closure tolerance on the parameter, which has period 1.
const CLOSURE_TOLERANCE: f64 = 1e-14;

/// Arclength parametrization of a closed polyline on `[0, 1)`.
pub(crate) struct Polyline<'a> {
    points: &'a [Point],
    cumulative: Vec<f64>,
}

impl<'a> Polyline<'a> {
    pub(crate) fn new(points: &'a [Point]) -> Self {
        let n = points.len();
        let mut cumulative = Vec::with_capacity(n + 1);
        cumulative.push(0.0);
        let mut s = 0.0;
        for i in 0..n {
            s += distance(points[i], points[(i + 1) % n]);
            cumulative.push(s);
        }
        Self { points, cumulative }
    }

    pub(crate) fn point(&self, theta: f64) -> Point {
        let total = *self.cumulative.last().unwrap();
        let s = (theta - theta.floor()) * total;
        let n = self.points.len();
        let seg = match self.cumulative.partition_point(|&c| c <= s) {
            0 => 0,
            k => (k - 1).min(n - 1),
        };
        let len = self.cumulative[seg + 1] - self.cumulative[seg];
        let f = ((s - self.cumulative[seg]) / len).clamp(0.0, 1.0);
        let a = self.points[seg];
        let b = self.points[(seg + 1) % n];
        [a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1])]
    }
}

/// Illinois (modified regula falsi) root of `g` on a sign-changing bracket.
fn illinois<G: FnMut(f64) -> f64>(mut g: G, mut lo: f64, mut g_lo: f64, mut hi: f64, mut g_hi: f64, tol: f64) -> f64 {
    let mut side = 0i8;
    for _ in 0..200 {
        if g_lo == 0.0 {
            return lo;
        }
        if g_hi == 0.0 {
            return hi;
        }
        if (hi - lo).abs() <= tol {
            return if g_lo.abs() < g_hi.abs() { lo } else { hi };
        }
        let mut x = (lo * g_hi - hi * g_lo) / (g_hi - g_lo);
        if !(x > lo.min(hi) && x < lo.max(hi)) {
            x = 0.5 * (lo + hi);
        }
        if x == lo || x == hi {
            return if g_lo.abs() < g_hi.abs() { lo } else { hi };
        }
        let gx = g(x);
        if (gx < 0.0) == (g_lo < 0.0) {
            lo = x;
            g_lo = gx;
            if side == -1 {
                g_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = x;
            g_hi = gx;
            if side == 1 {
                g_lo *= 0.5;
            }
            side = 1;
        }
    }
    0.5 * (lo + hi)
}

/// Walks `n` chords of length `chord` from parameter 0 and returns the parameters of
/// the visited points followed by the parameter reached after the last chord.
fn march<F: Fn(f64) -> Point>(curve: &F, chord: f64, n: usize) -> Result<Vec<f64>> {
    let mut thetas = Vec::with_capacity(n + 1);
    let mut theta = 0.0;
    let mut step = 1.0 / n as f64;
    thetas.push(theta);
    for _ in 0..n {
        let origin = curve(theta);
        let gap = |t: f64| distance(curve(t), origin) - chord;
        let mut lo = theta;
        let mut g_lo = -chord;
        let mut hi = theta + step;
        let mut g_hi = gap(hi);
        let mut walked = 0;
        while g_hi < 0.0 {
            lo = hi;
            g_lo = g_hi;
            hi += step;
            g_hi = gap(hi);
            walked += 1;
            if hi - theta > 1.0 || walked > 4 * n + 64 {
                return Err(Error::DegenerateCurve(format!(
                    "no chord of length {chord} from parameter {theta}"
                )));
            }
        }
        // iterate down to adjacent floats: per-step errors accumulate into the closing chord
        let next = illinois(gap, lo, g_lo, hi, g_hi, 0.0);
        step = next - theta;
        theta = next;
        thetas.push(theta);
    }
    Ok(thetas)
}

/// `n` points on the closed curve `parameter ↦ curve(parameter)` (period 1), starting at
/// parameter 0, such that all `n` chords including the closing one have equal length.
pub fn equal_chord_samples<F: Fn(f64) -> Point>(curve: F, n: usize) -> Result<Vec<Point>> {
    let fine = 8 * n;
    let perimeter: f64 = (0..fine)
        .map(|k| distance(curve(k as f64 / fine as f64), curve((k + 1) as f64 / fine as f64)))
        .sum();
    if !(perimeter > 0.0 && perimeter.is_finite()) {
        return Err(Error::DegenerateCurve("curve has zero length".into()));
    }
    let closure = |chord: f64| -> Result<f64> { Ok(march(&curve, chord, n)?[n] - 1.0) };

    let guess = perimeter / n as f64;
    let mut lo = guess * 0.99;
    let mut hi = guess * 1.01;
    let mut g_lo = closure(lo)?;
    let mut g_hi = closure(hi)?;
    let mut widen = 0;
    while g_lo > 0.0 || g_hi < 0.0 {
        if g_lo > 0.0 {
            hi = lo;
            g_hi = g_lo;
            lo *= 0.9;
            g_lo = closure(lo)?;
        } else {
            lo = hi;
            g_lo = g_hi;
            hi *= 1.1;
            g_hi = closure(hi)?;
        }
        widen += 1;
        if widen > 60 {
            return Err(Error::DegenerateCurve("cannot bracket the closing chord length".into()));
        }
    }

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut keep = |thetas: Vec<f64>| {
        let g = (thetas[n] - 1.0).abs();
        if best.as_ref().is_none_or(|(bg, _)| g < *bg) {
            best = Some((g, thetas));
        }
        g
    };
    let mut side = 0i8;
    for _ in 0..200 {
        let mut c = (lo * g_hi - hi * g_lo) / (g_hi - g_lo);
        if !(c > lo && c < hi) {
            c = 0.5 * (lo + hi);
        }
        let thetas = march(&curve, c, n)?;
        let g = thetas[n] - 1.0;
        if keep(thetas) < CLOSURE_TOLERANCE || c == lo || c == hi {
            break;
        }
        if g < 0.0 {
            lo = c;
            g_lo = g;
            if side == -1 {
                g_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = c;
            g_hi = g;
            if side == 1 {
                g_lo *= 0.5;
            }
            side = 1;
        }
        if hi - lo <= 2.0 * f64::EPSILON * hi {
            break;
        }
    }
    let (_, thetas) = best.expect("at least one march was evaluated");
    Ok(thetas[..n].iter().map(|&t| curve(t)).collect())
}
