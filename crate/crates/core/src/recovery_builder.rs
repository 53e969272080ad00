//! Recovery pairs around a closed curve.
//!
//! For a simple closed curve `γ` and a small `ε`, `u` is `1/ε` on the tube
//! `dist(x, γ) < ε`. Its two boundary curves `γ ± εν` carry transport rays along the
//! normal: each ray moves unit mass (per unit boundary length) out of the tube into a
//! `v` band on the far side of the boundary. The bands have the exact per-ray width
//! that makes the map mass preserving, so `(u, v)` is admissible with mass `2L`.
//!
//! Curves are normalized to counterclockwise order, so `ν` points outward and a
//! circle of radius `R` has `κ = −1/R`. The outer frame is the `+εν` offset.

use serde::{Deserialize, Serialize};

use crate::curve_kit::{curvature_profile, ClosedCurve};
use crate::density_field::{scaled_perimeter, AdmissiblePair, DensityField, GridGeometry, PerimeterEstimator};
use crate::numeric::{compensated_sum, distance, CompensatedSum};
use crate::ot_solver::{field_to_measure, solve_transport_with, SolverOptions};
use crate::ray_calculus::{per_ray_cost_excess, RayFrame};
use crate::{Error, Point, Result};

/// Samples used for the coarse bottleneck search.
const REACH_SEARCH_SAMPLES: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OffsetSide {
    /// `γ + εν`
    Outer,
    /// `γ − εν`
    Inner,
}

impl OffsetSide {
    /// `+1` for the outer side, `−1` for the inner.
    fn sign(self) -> f64 {
        match self {
            OffsetSide::Outer => 1.0,
            OffsetSide::Inner => -1.0,
        }
    }
}

/// One offset boundary of the `u` tube with its transport rays, sampled at the images
/// of the center-curve samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffsetFrame {
    pub side: OffsetSide,
    pub epsilon: f64,
    /// Arclength along the offset curve at each sample.
    pub arclength: Vec<f64>,
    /// Offset arclength element `(1 ∓ εκ)·Δs` carried by each sample.
    pub weights: Vec<f64>,
    /// Curvature of the offset curve.
    pub curvature: Vec<f64>,
    /// Signed distance from the offset curve to where its rays start; negative on the
    /// outer side, where the tube lies towards `−ν`.
    pub ray_length: Vec<f64>,
    /// Width of the `v` band beyond the offset curve.
    pub band_width: Vec<f64>,
}

impl OffsetFrame {
    pub fn length(&self) -> f64 {
        compensated_sum(self.weights.iter().copied())
    }

    pub fn max_abs_curvature(&self) -> f64 {
        self.curvature.iter().fold(0.0, |m, k| m.max(k.abs()))
    }

    /// `∫ κ̃² dr`.
    pub fn bending(&self) -> f64 {
        compensated_sum(self.curvature.iter().zip(&self.weights).map(|(k, w)| k * k * w))
    }
}

/// Mass-coordinate inverse `t(m) = 2εm / (1 + √(1 − 2εκm))`, in its cancellation-free form.
fn length_at_mass(curvature: f64, epsilon: f64, mass: f64) -> f64 {
    2.0 * epsilon * mass / (1.0 + (1.0 - 2.0 * epsilon * curvature * mass).sqrt())
}

/// Counterclockwise copy of the curve with its curvature profile.
fn oriented(curve: &ClosedCurve) -> Result<(ClosedCurve, Vec<f64>, Vec<Point>)> {
    let curve = if curve.signed_area() < 0.0 {
        curve.reversed()?
    } else {
        curve.clone()
    };
    let profile = curvature_profile(&curve)?;
    Ok((curve, profile.curvature, profile.normals))
}

/// Half the shortest chord whose endpoints are mutual nearest points off the diagonal.
///
/// A pair `(i, j)` qualifies when moving either endpoint alone lengthens the chord,
/// which picks up necks and opposite flats but not diameters of round pieces.
pub fn reach_estimate(curve: &ClosedCurve) -> f64 {
    let p = curve.points();
    let n = p.len();
    let m = n.min(REACH_SEARCH_SAMPLES);
    let coarse: Vec<usize> = (0..m).map(|k| k * n / m).collect();
    let mut d = vec![0.0; m * m];
    for a in 0..m {
        for b in a + 1..m {
            let v = distance(p[coarse[a]], p[coarse[b]]);
            d[a * m + b] = v;
            d[b * m + a] = v;
        }
    }
    let at = |a: usize, b: usize| d[(a % m) * m + (b % m)];
    let mut best = f64::INFINITY;
    for a in 0..m {
        for b in 0..m {
            let v = at(a, b);
            if a == b || v >= best {
                continue;
            }
            let local = v <= at(a, b + 1) && v <= at(a, b + m - 1) && v <= at(a + 1, b) && v <= at(a + m - 1, b);
            if local {
                best = best.min(refine_bottleneck(p, coarse[a], coarse[b]));
            }
        }
    }
    0.5 * best
}

/// Alternating descent on the fine samples from a coarse candidate pair.
fn refine_bottleneck(p: &[Point], mut i: usize, mut j: usize) -> f64 {
    let n = p.len();
    let descend = |fixed: usize, mut moving: usize| -> usize {
        loop {
            let here = distance(p[fixed], p[moving]);
            let up = (moving + 1) % n;
            let down = (moving + n - 1) % n;
            let (du, dd) = (distance(p[fixed], p[up]), distance(p[fixed], p[down]));
            if du < here && du <= dd && up != fixed {
                moving = up;
            } else if dd < here && down != fixed {
                moving = down;
            } else {
                return moving;
            }
        }
    };
    for _ in 0..64 {
        let (i0, j0) = (i, j);
        j = descend(i, j);
        i = descend(j, i);
        if (i, j) == (i0, j0) {
            break;
        }
    }
    distance(p[i], p[j])
}

/// Largest `ε₀` for which the construction is controlled: `min(1/(4 max|κ|), reach/4)`.
///
/// The reach is only estimated from samples, so this is a heuristic; the factor 1/4
/// leaves room for the `3ε` support neighbourhood.
pub fn admissible_epsilon(curve: &ClosedCurve) -> Result<f64> {
    let profile = curvature_profile(curve)?;
    let max_curvature = profile.max_abs_curvature();
    if !(max_curvature > 0.0 && max_curvature.is_finite()) {
        return Err(Error::DegenerateCurve(format!("maximal curvature {max_curvature}")));
    }
    let reach = reach_estimate(curve);
    if !(reach > 0.0) {
        return Err(Error::DegenerateCurve("curve touches itself".into()));
    }
    Ok((0.25 / max_curvature).min(0.25 * reach))
}

fn check_epsilon(curve: &ClosedCurve, epsilon: f64) -> Result<f64> {
    let epsilon0 = admissible_epsilon(curve)?;
    if !(epsilon > 0.0 && epsilon < epsilon0) {
        return Err(Error::InadmissibleEpsilon { epsilon, epsilon0 });
    }
    Ok(epsilon0)
}

fn frames_of(curvature: &[f64], spacing: f64, epsilon: f64) -> (OffsetFrame, OffsetFrame) {
    let frame = |side: OffsetSide| {
        let sign = side.sign();
        let stretch: Vec<f64> = curvature.iter().map(|k| 1.0 - sign * epsilon * k).collect();
        let weights: Vec<f64> = stretch.iter().map(|s| s * spacing).collect();
        let mut arclength = Vec::with_capacity(weights.len());
        let mut r = CompensatedSum::new();
        for k in 0..weights.len() {
            arclength.push(r.value());
            r.add(0.5 * (weights[k] + weights[(k + 1) % weights.len()]));
        }
        let offset_curvature: Vec<f64> = curvature.iter().zip(&stretch).map(|(k, s)| k / s).collect();
        // rays carry mass −1 (outer) or +1 (inner) from the offset curve into the tube
        let ray_length = offset_curvature
            .iter()
            .map(|&k| length_at_mass(k, epsilon, -sign))
            .collect();
        let band_width = offset_curvature
            .iter()
            .map(|&k| sign * length_at_mass(k, epsilon, sign))
            .collect();
        OffsetFrame {
            side,
            epsilon,
            arclength,
            weights,
            curvature: offset_curvature,
            ray_length,
            band_width,
        }
    };
    (frame(OffsetSide::Outer), frame(OffsetSide::Inner))
}

/// Outer and inner offset frames of the recovery construction at `epsilon`.
pub fn build_offset_frames(curve: &ClosedCurve, epsilon: f64) -> Result<(OffsetFrame, OffsetFrame)> {
    check_epsilon(curve, epsilon)?;
    let (oriented, curvature, _) = oriented(curve)?;
    Ok(frames_of(&curvature, oriented.spacing(), epsilon))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecoveryEnergy {
    pub epsilon: f64,
    /// `2L`
    pub mass: f64,
    /// `L₊ + L₋ = ε ∫|∇u|`
    pub interface: f64,
    pub d1: f64,
    /// `F_ε = d₁/ε + interface`
    pub f: f64,
    /// `(F_ε − 2·mass)/ε²`, summed without the cancellation of the direct formula.
    pub g: f64,
}

/// Energy of the recovery pair from the per-ray closed forms, integrated by the
/// sample rule over both offset curves.
pub fn recovery_energy_semianalytic(curve: &ClosedCurve, epsilon: f64) -> Result<RecoveryEnergy> {
    let (outer, inner) = build_offset_frames(curve, epsilon)?;
    let mass = 2.0 * curve.length();
    let mut excess = CompensatedSum::new();
    for frame in [&outer, &inner] {
        for (&k, &w) in frame.curvature.iter().zip(&frame.weights) {
            excess.add(per_ray_cost_excess(&RayFrame::new(1.0, k, 1.0, epsilon)?)? * w);
        }
    }
    let interface = outer.length() + inner.length();
    let excess = excess.value();
    let d1 = epsilon * interface + excess;
    let f = d1 / epsilon + interface;
    let g = excess / epsilon.powi(3) + 2.0 * (interface - mass) / (epsilon * epsilon);
    Ok(RecoveryEnergy {
        epsilon,
        mass,
        interface,
        d1,
        f,
        g,
    })
}

/// Upper bound `2L + (ε²/2)∮κ² + ε⁴·L·C(ε₀)` on `d₁/ε` of the recovery pair.
///
/// With `|κ| ≤ 1/(4ε₀)`, `|κ̃| ≤ 1/(3ε₀)` and `ε < ε₀`:
/// - the per-ray remainders contribute at most `(7/9)ε⁴ ∫κ̃⁴` per side, so together
///   `(7/9)·2L·ε⁴/(81ε₀⁴) = (14/729)·ε⁴L/ε₀⁴`;
/// - `κ̃₊² dr + κ̃₋² dr = 2κ² ds + 2ε²κ⁴/(1 − ε²κ²) ds`, whose second part contributes
///   `(ε⁴/2)∮κ⁴/(1 − ε²κ²) ≤ ε⁴L/(480ε₀⁴)`.
///
/// Hence `C(ε₀) = (1/480 + 14/729)/ε₀⁴`.
pub fn recovery_upper_bound(curve: &ClosedCurve, epsilon: f64) -> Result<f64> {
    let epsilon0 = check_epsilon(curve, epsilon)?;
    let profile = curvature_profile(curve)?;
    let length = curve.length();
    let bending = compensated_sum(profile.curvature.iter().map(|k| k * k)) * curve.spacing();
    let constant = (1.0 / 480.0 + 14.0 / 729.0) / epsilon0.powi(4);
    Ok(2.0 * length + 0.5 * epsilon * epsilon * bending + epsilon.powi(4) * length * constant)
}

/// A rasterized recovery pair together with the frames it was built from.
#[derive(Debug, Clone)]
pub struct RecoveryPair {
    center: ClosedCurve,
    epsilon: f64,
    pair: AdmissiblePair,
    outer: OffsetFrame,
    inner: OffsetFrame,
    toggled_cells: usize,
    max_support_distance: f64,
}

impl RecoveryPair {
    /// Counterclockwise center curve.
    pub fn center(&self) -> &ClosedCurve {
        &self.center
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn u(&self) -> &DensityField {
        self.pair.u()
    }

    pub fn v(&self) -> &DensityField {
        self.pair.v()
    }

    pub fn pair(&self) -> &AdmissiblePair {
        &self.pair
    }

    pub fn frames(&self) -> (&OffsetFrame, &OffsetFrame) {
        (&self.outer, &self.inner)
    }

    /// Grid mass of `u` (equal to that of `v`).
    pub fn mass(&self) -> f64 {
        self.pair.mass()
    }

    /// Continuum mass `2L`.
    pub fn target_mass(&self) -> f64 {
        2.0 * self.center.length()
    }

    /// Cells of `v` added or removed to balance the rasterized masses.
    pub fn toggled_cells(&self) -> usize {
        self.toggled_cells
    }

    /// Largest distance from an occupied cell center to the center polyline.
    pub fn max_support_distance(&self) -> f64 {
        self.max_support_distance
    }
}

/// Nearest-point data of a cell center.
#[derive(Debug, Clone, Copy)]
struct Projection {
    dist: f64,
    /// `v` band width at the foot point on the side of the cell.
    band: f64,
}

/// Projects every cell center within `radius` of the polyline onto it.
fn project_cells(
    grid: &GridGeometry,
    points: &[Point],
    normals: &[Point],
    outer_band: &[f64],
    inner_band: &[f64],
    radius: f64,
) -> Vec<Option<Projection>> {
    let n = points.len();
    let h = grid.spacing;
    let mut best: Vec<Option<Projection>> = vec![None; grid.cell_count()];
    let cell_range = |lo: f64, hi: f64, origin: f64, count: usize| {
        let a = ((lo - origin) / h - 0.5).floor().max(0.0) as usize;
        let b = (((hi - origin) / h - 0.5).ceil().max(0.0) as usize + 1).min(count);
        a..b
    };
    for k in 0..n {
        let (a, b) = (points[k], points[(k + 1) % n]);
        let e = [b[0] - a[0], b[1] - a[1]];
        let e2 = e[0] * e[0] + e[1] * e[1];
        let xs = cell_range(
            a[0].min(b[0]) - radius,
            a[0].max(b[0]) + radius,
            grid.origin[0],
            grid.width,
        );
        let ys = cell_range(
            a[1].min(b[1]) - radius,
            a[1].max(b[1]) + radius,
            grid.origin[1],
            grid.height,
        );
        for j in ys {
            for i in xs.clone() {
                let c = grid.cell_center(i, j);
                let w = [c[0] - a[0], c[1] - a[1]];
                let t = ((w[0] * e[0] + w[1] * e[1]) / e2).clamp(0.0, 1.0);
                let foot = [a[0] + t * e[0], a[1] + t * e[1]];
                let dist = distance(c, foot);
                let slot = &mut best[grid.index(i, j)];
                if dist > radius || slot.is_some_and(|p| p.dist <= dist) {
                    continue;
                }
                let (na, nb) = (normals[k], normals[(k + 1) % n]);
                let nu = [na[0] + t * (nb[0] - na[0]), na[1] + t * (nb[1] - na[1])];
                let along = (c[0] - foot[0]) * nu[0] + (c[1] - foot[1]) * nu[1];
                let bands = if along >= 0.0 { outer_band } else { inner_band };
                let band = bands[k] + t * (bands[(k + 1) % n] - bands[k]);
                *slot = Some(Projection { dist, band });
            }
        }
    }
    best
}

/// Rasterizes the recovery pair on a grid of spacing `h ≤ ε/4`.
///
/// `u` holds the cells with `|d| < ε`, `v` the cells with `ε ≤ |d| ≤ ε + w` where `d`
/// is the signed distance to the polyline and `w` the band width at the foot point.
/// The counts are then equalized by removing the outermost `v` cells (largest
/// relative band depth) or adding the nearest cells beyond the band, ties broken in
/// row-major order.
pub fn build_recovery_pair(curve: &ClosedCurve, epsilon: f64, h: f64) -> Result<RecoveryPair> {
    check_epsilon(curve, epsilon)?;
    if !(h > 0.0 && h <= 0.25 * epsilon) {
        return Err(Error::GridTooCoarse { h, epsilon });
    }
    let (center, curvature, normals) = oriented(curve)?;
    let (outer, inner) = frames_of(&curvature, center.spacing(), epsilon);
    let (lo, hi) = center.bounding_box();
    let reach = 3.0 * epsilon;
    let grid = GridGeometry::covering([lo[0] - reach, lo[1] - reach], [hi[0] + reach, hi[1] + reach], h, 3)?;
    let projections = project_cells(
        &grid,
        center.points(),
        &normals,
        &outer.band_width,
        &inner.band_width,
        reach,
    );

    let mut u = vec![false; grid.cell_count()];
    let mut v = vec![false; grid.cell_count()];
    // relative depth into the v band, for cells that may hold v
    let mut depth: Vec<(f64, usize)> = Vec::new();
    for (idx, p) in projections.iter().enumerate() {
        let Some(p) = p else { continue };
        if p.dist < epsilon {
            u[idx] = true;
        } else {
            let tau = (p.dist - epsilon) / p.band;
            v[idx] = tau <= 1.0;
            depth.push((tau, idx));
        }
    }
    let count_u = u.iter().filter(|&&x| x).count();
    let count_v = v.iter().filter(|&&x| x).count();
    let toggled_cells = count_u.abs_diff(count_v);
    if count_v > count_u {
        let mut inside: Vec<_> = depth.iter().filter(|d| v[d.1]).copied().collect();
        inside.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        for &(_, idx) in &inside[..toggled_cells] {
            v[idx] = false;
        }
    } else if count_u > count_v {
        let mut outside: Vec<_> = depth.iter().filter(|d| !v[d.1]).copied().collect();
        if outside.len() < toggled_cells {
            return Err(Error::Consistency(
                "not enough free cells to balance the recovery pair".into(),
            ));
        }
        outside.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for &(_, idx) in &outside[..toggled_cells] {
            v[idx] = true;
        }
    }
    let max_support_distance = projections
        .iter()
        .zip(u.iter().zip(&v))
        .filter(|(_, (a, b))| **a || **b)
        .map(|(p, _)| p.map_or(f64::INFINITY, |p| p.dist))
        .fold(0.0, f64::max);
    let pair = AdmissiblePair::new(
        DensityField::from_occupancy(grid, epsilon, u)?,
        DensityField::from_occupancy(grid, epsilon, v)?,
    )?;
    Ok(RecoveryPair {
        center,
        epsilon,
        pair,
        outer,
        inner,
        toggled_cells,
        max_support_distance,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridEnergy {
    pub epsilon: f64,
    pub spacing: f64,
    pub mass: f64,
    pub d1: f64,
    /// `ε ∫|∇u|` from the chosen estimator.
    pub perimeter: f64,
    pub f: f64,
    pub g: f64,
}

/// `F_ε` and `G_ε` of a rasterized pair, with `d₁` from the exact transport solver.
pub fn recovery_energy_grid(
    pair: &RecoveryPair,
    estimator: PerimeterEstimator,
    options: &SolverOptions,
) -> Result<GridEnergy> {
    let epsilon = pair.epsilon;
    let plan = solve_transport_with(&field_to_measure(pair.u()), &field_to_measure(pair.v()), 1.0, options)?;
    let perimeter = scaled_perimeter(pair.u(), estimator);
    let mass = pair.mass();
    let f = plan.cost / epsilon + perimeter;
    Ok(GridEnergy {
        epsilon,
        spacing: pair.u().grid().spacing,
        mass,
        d1: plan.cost,
        perimeter,
        f,
        g: (f - 2.0 * mass) / (epsilon * epsilon),
    })
}
