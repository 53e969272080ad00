//! Analytic closed curves, sampled with equal chords.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::{equal_chord_samples, ClosedCurve};
use crate::error::invalid;
use crate::{Error, Point, Result};

/// One term `cos·cos(kφ) + sin·sin(kφ)` of a radial perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierMode {
    pub k: u32,
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
}

/// All shapes are centred at the origin and traversed counter-clockwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CurveShape {
    Circle {
        radius: f64,
    },
    Ellipse {
        a: f64,
        b: f64,
    },
    RoundedRectangle {
        width: f64,
        height: f64,
        corner: f64,
    },
    /// `r(φ) = radius · (1 + Σ cos·cos(kφ) + sin·sin(kφ))`.
    Fourier {
        radius: f64,
        modes: Vec<FourierMode>,
    },
}

impl CurveShape {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(format!("{name} must be positive, got {v}")))
            }
        };
        match self {
            CurveShape::Circle { radius } => positive("radius", *radius),
            CurveShape::Ellipse { a, b } => positive("a", *a).and(positive("b", *b)),
            CurveShape::RoundedRectangle { width, height, corner } => {
                positive("width", *width)?;
                positive("height", *height)?;
                positive("corner", *corner)?;
                if 2.0 * corner > width.min(*height) {
                    return Err(invalid("corner radius exceeds half the shorter side"));
                }
                Ok(())
            }
            CurveShape::Fourier { radius, modes } => {
                positive("radius", *radius)?;
                let amplitude: f64 = modes.iter().map(|m| m.cos.abs() + m.sin.abs()).sum();
                if modes.iter().any(|m| m.k == 0) {
                    return Err(invalid("Fourier modes need k >= 1"));
                }
                if !(amplitude < 1.0) {
                    return Err(Error::DegenerateCurve(format!(
                        "perturbation amplitude {amplitude} may make the radius vanish"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Point at parameter `theta` (period 1).
    pub fn point(&self, theta: f64) -> Point {
        match self {
            CurveShape::Circle { radius } => {
                let (s, c) = (TAU * theta).sin_cos();
                [radius * c, radius * s]
            }
            CurveShape::Ellipse { a, b } => {
                let (s, c) = (TAU * theta).sin_cos();
                [a * c, b * s]
            }
            CurveShape::RoundedRectangle { width, height, corner } => {
                rounded_rectangle_point(*width, *height, *corner, theta)
            }
            CurveShape::Fourier { radius, modes } => {
                let phi = TAU * theta;
                let r = radius
                    * (1.0
                        + modes
                            .iter()
                            .map(|m| {
                                let (s, c) = (m.k as f64 * phi).sin_cos();
                                m.cos * c + m.sin * s
                            })
                            .sum::<f64>());
                let (s, c) = phi.sin_cos();
                [r * c, r * s]
            }
        }
    }

    /// `n` equal-chord samples starting at parameter 0.
    pub fn sample(&self, n: usize) -> Result<ClosedCurve> {
        self.validate()?;
        if n < super::MIN_SAMPLES {
            return Err(invalid(format!(
                "need at least {} samples, got {n}",
                super::MIN_SAMPLES
            )));
        }
        let points = match self {
            // the regular polygon is already equal-chord
            CurveShape::Circle { .. } => (0..n).map(|k| self.point(k as f64 / n as f64)).collect(),
            _ => equal_chord_samples(|t| self.point(t), n)?,
        };
        ClosedCurve::new(points)
    }
}

/// Arclength parametrization starting at the bottom of the right flat.
fn rounded_rectangle_point(width: f64, height: f64, corner: f64, theta: f64) -> Point {
    let (hw, hh, r) = (0.5 * width, 0.5 * height, corner);
    let vertical = height - 2.0 * r;
    let horizontal = width - 2.0 * r;
    let arc = 0.5 * PI * r;
    let perimeter = 2.0 * (vertical + horizontal) + 4.0 * arc;
    let mut s = (theta - theta.floor()) * perimeter;
    let quarter_arc = |cx: f64, cy: f64, start: f64, s: f64| {
        let angle = start + s / r;
        [cx + r * angle.cos(), cy + r * angle.sin()]
    };
    let pieces: [(f64, &dyn Fn(f64) -> Point); 8] = [
        (vertical, &|s| [hw, -hh + r + s]),
        (arc, &|s| quarter_arc(hw - r, hh - r, 0.0, s)),
        (horizontal, &|s| [hw - r - s, hh]),
        (arc, &|s| quarter_arc(-hw + r, hh - r, 0.5 * PI, s)),
        (vertical, &|s| [-hw, hh - r - s]),
        (arc, &|s| quarter_arc(-hw + r, -hh + r, PI, s)),
        (horizontal, &|s| [-hw + r + s, -hh]),
        (arc, &|s| quarter_arc(hw - r, -hh + r, 1.5 * PI, s)),
    ];
    for (len, piece) in pieces.iter() {
        if s <= *len {
            return piece(s);
        }
        s -= len;
    }
    pieces[7].1(arc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::distance;

    #[test]
    fn shapes_sample_with_equal_chords() {
        let shapes = [
            CurveShape::Ellipse { a: 2.0, b: 1.0 },
            CurveShape::RoundedRectangle {
                width: 3.0,
                height: 2.0,
                corner: 0.4,
            },
            CurveShape::Fourier {
                radius: 1.0,
                modes: vec![
                    FourierMode {
                        k: 2,
                        cos: 0.1,
                        sin: 0.0,
                    },
                    FourierMode {
                        k: 3,
                        cos: 0.0,
                        sin: 0.05,
                    },
                ],
            },
        ];
        for shape in shapes {
            for n in [8, 100, 4096] {
                let c = shape.sample(n).unwrap();
                assert!(c.is_arclength(), "{shape:?} n = {n}");
                assert_eq!(c.points()[0], shape.point(0.0));
            }
        }
    }

    #[test]
    fn large_sample_counts_close_tightly() {
        let c = CurveShape::Ellipse { a: 2.0, b: 1.0 }.sample(65536).unwrap();
        assert!(c.is_arclength());
    }

    #[test]
    fn rounded_rectangle_is_continuous() {
        let shape = CurveShape::RoundedRectangle {
            width: 3.0,
            height: 2.0,
            corner: 0.4,
        };
        let m = 10_000;
        for k in 0..m {
            let a = shape.point(k as f64 / m as f64);
            let b = shape.point((k + 1) as f64 / m as f64);
            assert!(distance(a, b) < 1e-3);
        }
    }

    #[test]
    fn validation() {
        assert!(CurveShape::Circle { radius: -1.0 }.sample(16).is_err());
        assert!(CurveShape::RoundedRectangle {
            width: 1.0,
            height: 1.0,
            corner: 0.6
        }
        .validate()
        .is_err());
        let wild = CurveShape::Fourier {
            radius: 1.0,
            modes: vec![FourierMode {
                k: 2,
                cos: 1.2,
                sin: 0.0,
            }],
        };
        assert!(matches!(wild.validate(), Err(Error::DegenerateCurve(_))));
        assert!(CurveShape::Circle { radius: 1.0 }.sample(4).is_err());
    }

    #[test]
    fn serde_shape_tags() {
        let s: CurveShape =
            serde_json::from_str(r#"{"kind":"rounded-rectangle","width":2,"height":1,"corner":0.2}"#).unwrap();
        assert_eq!(
            s,
            CurveShape::RoundedRectangle {
                width: 2.0,
                height: 1.0,
                corner: 0.2
            }
        );
        assert!(serde_json::from_str::<CurveShape>(r#"{"kind":"circle","radius":1,"extra":0}"#).is_err());
    }
}
