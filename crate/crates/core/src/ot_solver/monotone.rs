//! Monotone rearrangement between two densities on the line.
//!
//! Densities are piecewise constant on uniform cells. Their quantile functions are
//! piecewise linear in the mass variable, so the transport cost
//! `∫₀^M |Q⁺(q) − Q⁻(σ(q))| dq` is integrated exactly piece by piece.

use serde::{Deserialize, Serialize};

use crate::error::invalid;
use crate::numeric::CompensatedSum;
use crate::{Error, Result};

/// Density `values[k]` on `[start + k·spacing, start + (k+1)·spacing)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Density1d {
    pub start: f64,
    pub spacing: f64,
    pub values: Vec<f64>,
}

impl Density1d {
    pub fn new(start: f64, spacing: f64, values: Vec<f64>) -> Result<Self> {
        if !(spacing > 0.0 && spacing.is_finite() && start.is_finite()) {
            return Err(invalid(format!("1-D grid needs a positive spacing, got {spacing}")));
        }
        if values.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(invalid("1-D densities must be finite and nonnegative"));
        }
        Ok(Self { start, spacing, values })
    }

    /// Samples `f` at the centers of `cells` cells covering `[a, b]`.
    pub fn sample<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cells: usize) -> Result<Self> {
        let h = (b - a) / cells as f64;
        Self::new(a, h, (0..cells).map(|k| f(a + (k as f64 + 0.5) * h)).collect())
    }

    pub fn mass(&self) -> f64 {
        let mut s = CompensatedSum::new();
        for v in &self.values {
            s.add(v * self.spacing);
        }
        s.value()
    }

    pub fn cell_center(&self, k: usize) -> f64 {
        self.start + (k as f64 + 0.5) * self.spacing
    }

    /// Linear pieces `(q0, q1, x0, x1)` of the quantile function.
    fn quantile_pieces(&self) -> Vec<(f64, f64, f64, f64)> {
        let mut pieces = Vec::new();
        let mut q = CompensatedSum::new();
        for (k, &v) in self.values.iter().enumerate() {
            if v > 0.0 {
                let q0 = q.value();
                q.add(v * self.spacing);
                let x0 = self.start + k as f64 * self.spacing;
                pieces.push((q0, q.value(), x0, x0 + self.spacing));
            }
        }
        pieces
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    /// Matches cumulative masses from the left on both sides.
    #[default]
    Nondecreasing,
    /// Matches the cumulative mass of `f⁺` from the left with that of `f⁻` from the right.
    Nonincreasing,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneTransport {
    /// Centers of the cells where `f⁺ > 0`.
    pub positions: Vec<f64>,
    /// Image of each position under the monotone map.
    pub images: Vec<f64>,
    /// `∫ |T(x) − x| f⁺(x) dx`.
    pub cost: f64,
}

fn locate(pieces: &[(f64, f64, f64, f64)], q: f64) -> usize {
    pieces.partition_point(|p| p.1 < q).min(pieces.len() - 1)
}

fn eval(piece: (f64, f64, f64, f64), q: f64) -> f64 {
    let (q0, q1, x0, x1) = piece;
    x0 + (x1 - x0) * ((q - q0) / (q1 - q0))
}

/// `∫ |l|` over an interval of width `w` for a linear `l` with end values `a`, `b`.
fn abs_linear_integral(a: f64, b: f64, w: f64) -> f64 {
    if (a >= 0.0) == (b >= 0.0) {
        0.5 * (a.abs() + b.abs()) * w
    } else {
        0.5 * (a * a + b * b) / (a.abs() + b.abs()) * w
    }
}

pub fn monotone_transport_1d(
    fplus: &Density1d,
    fminus: &Density1d,
    orientation: Orientation,
) -> Result<MonotoneTransport> {
    let (mp, mm) = (fplus.mass(), fminus.mass());
    if (mp - mm).abs() > super::BALANCE_TOLERANCE * mp.max(mm) || mp == 0.0 && mm != 0.0 {
        return Err(Error::Unbalanced {
            source_total: mp,
            target_total: mm,
        });
    }
    if mp == 0.0 {
        return Ok(MonotoneTransport {
            positions: Vec::new(),
            images: Vec::new(),
            cost: 0.0,
        });
    }
    let plus = fplus.quantile_pieces();
    let minus = fminus.quantile_pieces();
    // mass variable of f⁻ matched to mass q of f⁺
    let sigma = |q: f64| -> f64 {
        let r = q * (mm / mp);
        match orientation {
            Orientation::Nondecreasing => r,
            Orientation::Nonincreasing => mm - r,
        }
    };
    let sigma_inv = |r: f64| -> f64 {
        let r = match orientation {
            Orientation::Nondecreasing => r,
            Orientation::Nonincreasing => mm - r,
        };
        r * (mp / mm)
    };

    let mut knots: Vec<f64> = plus
        .iter()
        .map(|p| p.0)
        .chain(minus.iter().map(|p| sigma_inv(p.0)))
        .collect();
    knots.push(mp);
    knots.retain(|q| (0.0..=mp).contains(q));
    knots.sort_by(f64::total_cmp);
    knots.dedup();

    let mut cost = CompensatedSum::new();
    for w in knots.windows(2) {
        let (qa, qb) = (w[0], w[1]);
        if qb <= qa {
            continue;
        }
        let mid = 0.5 * (qa + qb);
        let pp = plus[locate(&plus, mid)];
        let pm = minus[locate(&minus, sigma(mid))];
        let da = eval(pp, qa) - eval(pm, sigma(qa));
        let db = eval(pp, qb) - eval(pm, sigma(qb));
        cost.add(abs_linear_integral(da, db, qb - qa));
    }

    let mut positions = Vec::new();
    let mut images = Vec::new();
    let mut cumulative = CompensatedSum::new();
    for (k, &v) in fplus.values.iter().enumerate() {
        if v > 0.0 {
            let q = cumulative.value() + 0.5 * v * fplus.spacing;
            cumulative.add(v * fplus.spacing);
            positions.push(fplus.cell_center(k));
            let r = sigma(q).clamp(0.0, mm);
            images.push(eval(minus[locate(&minus, r)], r));
        }
    }
    Ok(MonotoneTransport {
        positions,
        images,
        cost: cost.value(),
    })
}
