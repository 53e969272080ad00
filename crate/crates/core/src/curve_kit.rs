//! Closed curves as periodic polylines: resampling, Menger curvature, elastica energy
//! and normal offsets.
//!
//! Orientation convention: the unit normal is the tangent rotated clockwise,
//! `ν = (γ′_y, −γ′_x)`, so `det(γ′, ν) = −1`, and the signed curvature is
//! `κ = ν·γ″`. A counter-clockwise circle of radius `R` therefore has `ν` pointing
//! outward and `κ = −1/R`; offsetting by `+δ` along `ν` changes the length by `−δ∮κ`.

mod equal_chord;
pub mod shapes;

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::invalid;
use crate::numeric::{compensated_sum, distance};
use crate::{Error, Point, Result};

pub use equal_chord::equal_chord_samples;

/// Minimum number of samples per curve.
pub const MIN_SAMPLES: usize = 8;

/// Relative tolerance on segment lengths for a curve to count as arclength-sampled.
pub const ARCLENGTH_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ClosedCurve {
    points: Vec<Point>,
    arclength: bool,
}

impl ClosedCurve {
    /// Builds a curve from cyclic samples (the closing segment is implied).
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if points.len() < MIN_SAMPLES {
            return Err(Error::DegenerateCurve(format!(
                "need at least {MIN_SAMPLES} samples, got {}",
                points.len()
            )));
        }
        if points.iter().any(|p| !(p[0].is_finite() && p[1].is_finite())) {
            return Err(Error::DegenerateCurve("non-finite sample".into()));
        }
        let n = points.len();
        let segments: Vec<f64> = (0..n).map(|i| distance(points[i], points[(i + 1) % n])).collect();
        if let Some(i) = segments.iter().position(|&s| s == 0.0) {
            return Err(Error::DegenerateCurve(format!(
                "samples {i} and {} coincide",
                (i + 1) % n
            )));
        }
        let mean = compensated_sum(segments.iter().copied()) / n as f64;
        let arclength = segments.iter().all(|s| (s - mean).abs() <= ARCLENGTH_TOLERANCE * mean);
        Ok(Self { points, arclength })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Whether all segments have the same length (within [`ARCLENGTH_TOLERANCE`]).
    pub fn is_arclength(&self) -> bool {
        self.arclength
    }

    pub fn segment_lengths(&self) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| distance(self.points[i], self.points[(i + 1) % n]))
            .collect()
    }

    pub fn length(&self) -> f64 {
        compensated_sum(self.segment_lengths())
    }

    /// Mean segment length `L/n`.
    pub fn spacing(&self) -> f64 {
        self.length() / self.len() as f64
    }

    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in &self.points {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        (lo, hi)
    }

    /// Signed enclosed area (positive for counter-clockwise curves).
    pub fn signed_area(&self) -> f64 {
        let n = self.len();
        0.5 * compensated_sum((0..n).map(|i| {
            let p = self.points[i];
            let q = self.points[(i + 1) % n];
            p[0] * q[1] - q[0] * p[1]
        }))
    }

    pub fn translated(&self, shift: Point) -> Result<Self> {
        Self::new(self.points.iter().map(|p| [p[0] + shift[0], p[1] + shift[1]]).collect())
    }

    pub fn rotated(&self, angle: f64) -> Result<Self> {
        let (s, c) = angle.sin_cos();
        Self::new(
            self.points
                .iter()
                .map(|p| [c * p[0] - s * p[1], s * p[0] + c * p[1]])
                .collect(),
        )
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.points.iter().map(|p| [factor * p[0], factor * p[1]]).collect())
    }

    /// Same curve traversed in the opposite direction, starting at the same sample.
    pub fn reversed(&self) -> Result<Self> {
        let mut points = self.points.clone();
        points[1..].reverse();
        Self::new(points)
    }

    /// The same samples with sample `k` first.
    pub fn cycled(&self, k: usize) -> Result<Self> {
        let mut points = self.points.clone();
        points.rotate_left(k % self.len());
        Self::new(points)
    }
}

/// A finite collection of closed curves.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CurveSystem {
    pub curves: Vec<ClosedCurve>,
}

impl CurveSystem {
    pub fn new(curves: Vec<ClosedCurve>) -> Self {
        Self { curves }
    }

    pub fn total_length(&self) -> f64 {
        compensated_sum(self.curves.iter().map(ClosedCurve::length))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureProfile {
    /// Signed curvature per sample.
    pub curvature: Vec<f64>,
    /// Unit normal `ν` per sample.
    pub normals: Vec<Point>,
}

impl CurvatureProfile {
    pub fn max_abs_curvature(&self) -> f64 {
        self.curvature.iter().fold(0.0, |m, k| m.max(k.abs()))
    }
}

/// Resamples a closed polyline to `n` points with equal chords, starting at its first
/// sample.
///
/// Corners of the input are cut unless they fall on the new samples, so the length is
/// preserved exactly only in that case; for smooth, densely sampled input the loss is
/// of order `κ²L(L/n)²`.
pub fn resample_arclength(curve: &ClosedCurve, n: usize) -> Result<ClosedCurve> {
    if n < MIN_SAMPLES {
        return Err(invalid(format!("need at least {MIN_SAMPLES} samples, got {n}")));
    }
    let polyline = equal_chord::Polyline::new(curve.points());
    let points = equal_chord::equal_chord_samples(|s| polyline.point(s), n)?;
    ClosedCurve::new(points)
}

/// Signed Menger curvature of the circle through `a`, `b`, `c` (negative for left turns).
pub fn menger_curvature(a: Point, b: Point, c: Point) -> f64 {
    let u = [b[0] - a[0], b[1] - a[1]];
    let v = [c[0] - b[0], c[1] - b[1]];
    let cross = u[0] * v[1] - u[1] * v[0];
    if cross == 0.0 {
        return 0.0;
    }
    -2.0 * cross / (distance(a, b) * distance(b, c) * distance(a, c))
}

/// Per-sample Menger curvature and normals of an arclength-sampled curve.
pub fn curvature_profile(curve: &ClosedCurve) -> Result<CurvatureProfile> {
    if !curve.is_arclength() {
        return Err(invalid("curvature needs an arclength-sampled curve; resample first"));
    }
    let p = curve.points();
    let n = p.len();
    let mut curvature = Vec::with_capacity(n);
    let mut normals = Vec::with_capacity(n);
    for i in 0..n {
        let prev = p[(i + n - 1) % n];
        let next = p[(i + 1) % n];
        curvature.push(menger_curvature(prev, p[i], next));
        let tangent = [next[0] - prev[0], next[1] - prev[1]];
        let norm = tangent[0].hypot(tangent[1]);
        normals.push([tangent[1] / norm, -tangent[0] / norm]);
    }
    Ok(CurvatureProfile { curvature, normals })
}

/// `∮κ ds` by the sample rule.
pub fn total_curvature(curve: &ClosedCurve) -> Result<f64> {
    let profile = curvature_profile(curve)?;
    Ok(compensated_sum(profile.curvature.iter().copied()) * curve.spacing())
}

fn curve_elastica(curve: &ClosedCurve) -> Result<f64> {
    let profile = curvature_profile(curve)?;
    Ok(0.5 * compensated_sum(profile.curvature.iter().map(|k| k * k)) * curve.spacing())
}

/// `W = ½ Σ_curves ∮κ² ds`.
pub fn elastica_energy(system: &CurveSystem) -> Result<f64> {
    let mut total = 0.0;
    for curve in &system.curves {
        total += curve_elastica(curve)?;
    }
    Ok(total)
}

/// Moves every sample by `delta` along `ν` and resamples to the same count.
pub fn offset_curve(curve: &ClosedCurve, delta: f64) -> Result<ClosedCurve> {
    let profile = curvature_profile(curve)?;
    let max_curvature = profile.max_abs_curvature();
    if !(delta.abs() * max_curvature < 0.25) {
        return Err(Error::OffsetTooLarge { delta, max_curvature });
    }
    if delta == 0.0 {
        return Ok(curve.clone());
    }
    let moved: Vec<Point> = curve
        .points()
        .iter()
        .zip(&profile.normals)
        .map(|(p, nu)| [p[0] + delta * nu[0], p[1] + delta * nu[1]])
        .collect();
    resample_arclength(&ClosedCurve::new(moved)?, curve.len())
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvPoint {
    x: f64,
    y: f64,
}

/// Writes the samples as CSV rows `x,y` (no repeated endpoint).
pub fn write_curve_csv(curve: &ClosedCurve, path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    for p in curve.points() {
        writer.serialize(CsvPoint { x: p[0], y: p[1] })?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_curve_csv(path: &Path) -> Result<ClosedCurve> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut points = Vec::new();
    for row in reader.deserialize::<CsvPoint>() {
        let row = row.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        points.push([row.x, row.y]);
    }
    ClosedCurve::new(points)
}

/// Writes each curve to `<stem>_<k>.csv` in `dir` and a JSON list of those file names
/// to `<stem>.json`, which is returned.
pub fn write_system_json(system: &CurveSystem, dir: &Path, stem: &str) -> Result<PathBuf> {
    let mut names = Vec::with_capacity(system.curves.len());
    for (k, curve) in system.curves.iter().enumerate() {
        let name = format!("{stem}_{k}.csv");
        write_curve_csv(curve, &dir.join(&name))?;
        names.push(name);
    }
    let index = dir.join(format!("{stem}.json"));
    fs::write(&index, serde_json::to_string_pretty(&names)?)?;
    Ok(index)
}

/// Reads a JSON list of curve CSV paths, resolved relative to the JSON file.
pub fn read_system_json(path: &Path) -> Result<CurveSystem> {
    let text = fs::read_to_string(path)?;
    let names: Vec<PathBuf> = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let curves = names
        .iter()
        .map(|name| read_curve_csv(&base.join(name)))
        .collect::<Result<Vec<_>>>()?;
    Ok(CurveSystem::new(curves))
}
