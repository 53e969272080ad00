//! Two-valued density fields on a uniform grid.
//!
//! Cells are indexed `(i, j)` with `i` along x and `j` along y and stored row-major
//! (`j * width + i`). Cell `(i, j)` covers `origin + [i h, (i+1) h] × [j h, (j+1) h]`.
//! An occupied cell carries the density `1/ε`, every other cell carries zero.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::invalid;
use crate::{Error, Point, Result};

/// Placement and resolution of a uniform grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridGeometry {
    pub origin: Point,
    pub spacing: f64,
    pub width: usize,
    pub height: usize,
}

impl GridGeometry {
    pub fn new(origin: Point, spacing: f64, width: usize, height: usize) -> Result<Self> {
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(invalid(format!("grid spacing must be positive, got {spacing}")));
        }
        if width == 0 || height == 0 {
            return Err(invalid("grid dimensions must be positive"));
        }
        if !(origin[0].is_finite() && origin[1].is_finite()) {
            return Err(invalid("grid origin must be finite"));
        }
        Ok(Self {
            origin,
            spacing,
            width,
            height,
        })
    }

    /// Smallest grid of the given spacing whose cells cover `[lo, hi]` plus `margin_cells`
    /// empty cells on every side.
    pub fn covering(lo: Point, hi: Point, spacing: f64, margin_cells: usize) -> Result<Self> {
        if !(spacing > 0.0) {
            return Err(invalid(format!("grid spacing must be positive, got {spacing}")));
        }
        let m = margin_cells as f64;
        let origin = [
            (lo[0] / spacing).floor() * spacing - m * spacing,
            (lo[1] / spacing).floor() * spacing - m * spacing,
        ];
        let width = ((hi[0] - origin[0]) / spacing).ceil() as usize + margin_cells;
        let height = ((hi[1] - origin[1]) / spacing).ceil() as usize + margin_cells;
        Self::new(origin, spacing, width, height)
    }

    pub fn cell_count(&self) -> usize {
        self.width * self.height
    }

    pub fn cell_area(&self) -> f64 {
        self.spacing * self.spacing
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.width + i
    }

    pub fn cell_center(&self, i: usize, j: usize) -> Point {
        [
            self.origin[0] + (i as f64 + 0.5) * self.spacing,
            self.origin[1] + (j as f64 + 0.5) * self.spacing,
        ]
    }

    fn is_border(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i + 1 == self.width || j + 1 == self.height
    }
}

/// A field with values in `{0, 1/ε}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    grid: GridGeometry,
    epsilon: f64,
    occupied: Vec<bool>,
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("epsilon must be positive, got {epsilon}")))
    }
}

impl DensityField {
    pub fn empty(grid: GridGeometry, epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        Ok(Self {
            grid,
            epsilon,
            occupied: vec![false; grid.cell_count()],
        })
    }

    /// Builds a field from a row-major occupancy mask.
    pub fn from_occupancy(grid: GridGeometry, epsilon: f64, occupied: Vec<bool>) -> Result<Self> {
        check_epsilon(epsilon)?;
        if occupied.len() != grid.cell_count() {
            return Err(Error::GeometryMismatch(format!(
                "occupancy has {} cells, grid has {}",
                occupied.len(),
                grid.cell_count()
            )));
        }
        Ok(Self {
            grid,
            epsilon,
            occupied,
        })
    }

    pub fn grid(&self) -> &GridGeometry {
        &self.grid
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn occupancy(&self) -> &[bool] {
        &self.occupied
    }

    pub fn into_occupancy(self) -> Vec<bool> {
        self.occupied
    }

    pub fn is_occupied(&self, i: usize, j: usize) -> bool {
        self.occupied[self.grid.index(i, j)]
    }

    pub fn set_occupied(&mut self, i: usize, j: usize, value: bool) {
        let k = self.grid.index(i, j);
        self.occupied[k] = value;
    }

    /// Density value of cell `(i, j)`.
    pub fn value(&self, i: usize, j: usize) -> f64 {
        if self.is_occupied(i, j) {
            1.0 / self.epsilon
        } else {
            0.0
        }
    }

    pub fn occupied_count(&self) -> usize {
        self.occupied.iter().filter(|&&b| b).count()
    }

    /// Iterates over `(i, j)` of occupied cells in row-major order.
    pub fn occupied_cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.grid.width;
        self.occupied
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(k, _)| (k % w, k / w))
    }

    /// True when no cell of the outermost ring is occupied.
    pub fn border_clear(&self) -> bool {
        self.occupied_cells().all(|(i, j)| !self.grid.is_border(i, j))
    }

    pub fn same_geometry(&self, other: &DensityField) -> bool {
        self.grid == other.grid && self.epsilon == other.epsilon
    }
}

/// Samples `predicate` at every cell center.
pub fn rasterize_region<P>(predicate: P, grid: GridGeometry, epsilon: f64) -> Result<DensityField>
where
    P: Fn(Point) -> bool,
{
    let grid = GridGeometry::new(grid.origin, grid.spacing, grid.width, grid.height)?;
    check_epsilon(epsilon)?;
    let mut occupied = Vec::with_capacity(grid.cell_count());
    for j in 0..grid.height {
        for i in 0..grid.width {
            occupied.push(predicate(grid.cell_center(i, j)));
        }
    }
    DensityField::from_occupancy(grid, epsilon, occupied)
}

/// `(occupied cells) · h² / ε`.
pub fn total_mass(field: &DensityField) -> f64 {
    field.occupied_count() as f64 * field.grid.cell_area() / field.epsilon
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub is_admissible: bool,
    pub mass_u: f64,
    pub mass_v: f64,
    pub overlap_cells: usize,
    pub value_violations: usize,
    /// Whether both supports avoid the outermost cell ring of the window.
    pub border_clear: bool,
}

/// Cell-by-cell admissibility scan of a candidate pair.
pub fn validate_pair(u: &DensityField, v: &DensityField) -> Result<AdmissibilityReport> {
    if !u.same_geometry(v) {
        return Err(Error::GeometryMismatch(format!(
            "u: {:?} eps {}, v: {:?} eps {}",
            u.grid, u.epsilon, v.grid, v.epsilon
        )));
    }
    let overlap_cells = u.occupied.iter().zip(&v.occupied).filter(|(&a, &b)| a && b).count();
    let density = 1.0 / u.epsilon;
    let value_violations = if density.is_finite() {
        0
    } else {
        u.occupied_count() + v.occupied_count()
    };
    let count_u = u.occupied_count();
    let count_v = v.occupied_count();
    Ok(AdmissibilityReport {
        is_admissible: overlap_cells == 0 && value_violations == 0 && count_u == count_v,
        mass_u: total_mass(u),
        mass_v: total_mass(v),
        overlap_cells,
        value_violations,
        border_clear: u.border_clear() && v.border_clear(),
    })
}

/// A pair that passed [`validate_pair`] and keeps its supports off the window border.
#[derive(Debug, Clone)]
pub struct AdmissiblePair {
    u: DensityField,
    v: DensityField,
    mass: f64,
}

impl AdmissiblePair {
    pub fn new(u: DensityField, v: DensityField) -> Result<Self> {
        let report = validate_pair(&u, &v)?;
        if !report.is_admissible {
            return Err(Error::NotAdmissible(format!(
                "overlap {} cells, value violations {}, masses {} vs {}",
                report.overlap_cells, report.value_violations, report.mass_u, report.mass_v
            )));
        }
        if !report.border_clear {
            return Err(Error::NotAdmissible("support touches the window border".into()));
        }
        let mass = report.mass_u;
        Ok(Self { u, v, mass })
    }

    pub fn u(&self) -> &DensityField {
        &self.u
    }

    pub fn v(&self) -> &DensityField {
        &self.v
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerimeterEstimator {
    /// `h` times the number of occupied/unoccupied cell faces.
    EdgeCount,
    /// Length of the ½ level line of a Gaussian-smoothed indicator.
    ContourLength,
}

/// Perimeter of the support, which equals `ε ∫|∇u|` for a two-valued field.
pub fn scaled_perimeter(field: &DensityField, estimator: PerimeterEstimator) -> f64 {
    match estimator {
        PerimeterEstimator::EdgeCount => edge_count_perimeter(field),
        PerimeterEstimator::ContourLength => contour_perimeter(field),
    }
}

fn edge_count_perimeter(field: &DensityField) -> f64 {
    let g = &field.grid;
    let occ = |i: isize, j: isize| -> bool {
        i >= 0
            && j >= 0
            && (i as usize) < g.width
            && (j as usize) < g.height
            && field.is_occupied(i as usize, j as usize)
    };
    let mut faces = 0usize;
    for (i, j) in field.occupied_cells() {
        let (i, j) = (i as isize, j as isize);
        for (di, dj) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
            if !occ(i + di, j + dj) {
                faces += 1;
            }
        }
    }
    faces as f64 * g.spacing
}

/// Narrowest smoothing width, in cells.
const MIN_SMOOTHING_CELLS: f64 = 1.5;

/// Smoothing width in cells: `√(ε/h)`, at least [`MIN_SMOOTHING_CELLS`].
///
/// The staircase ripple left after smoothing decays quickly with the width in cells,
/// while the blur shifts curved level lines by about `σ²κ/2`; growing the width like
/// `√(ε/h)` sends both to zero as `h → 0` for structures of thickness `~ε`.
fn smoothing_cells(field: &DensityField) -> f64 {
    (field.epsilon / field.grid.spacing).sqrt().max(MIN_SMOOTHING_CELLS)
}

fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (4.0 * sigma).ceil() as isize;
    let raw: Vec<f64> = (-radius..=radius)
        .map(|k| (-(k * k) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

fn contour_perimeter(field: &DensityField) -> f64 {
    if field.occupied_count() == 0 {
        return 0.0;
    }
    let kernel = gaussian_kernel(smoothing_cells(field));
    let radius = kernel.len() / 2;
    let pad = radius + 1;
    let g = &field.grid;
    let w = g.width + 2 * pad;
    let h = g.height + 2 * pad;
    let mut indicator = vec![0.0; w * h];
    for (i, j) in field.occupied_cells() {
        indicator[(j + pad) * w + i + pad] = 1.0;
    }
    let mut pass = vec![0.0; w * h];
    for j in 0..h {
        for i in 0..w {
            let mut acc = 0.0;
            for (k, wk) in kernel.iter().enumerate() {
                let ii = i as isize + k as isize - radius as isize;
                if ii >= 0 && (ii as usize) < w {
                    acc += wk * indicator[j * w + ii as usize];
                }
            }
            pass[j * w + i] = acc;
        }
    }
    let mut smooth = vec![0.0; w * h];
    for j in 0..h {
        for i in 0..w {
            let mut acc = 0.0;
            for (k, wk) in kernel.iter().enumerate() {
                let jj = j as isize + k as isize - radius as isize;
                if jj >= 0 && (jj as usize) < h {
                    acc += wk * pass[jj as usize * w + i];
                }
            }
            smooth[j * w + i] = acc;
        }
    }
    marching_squares_length(&smooth, w, h, 0.5) * g.spacing
}

/// Total length (in cell units) of the `level` line of a sampled field.
fn marching_squares_length(values: &[f64], w: usize, h: usize, level: f64) -> f64 {
    let crossing = |a: f64, b: f64| (level - a) / (b - a);
    let mut length = 0.0;
    for j in 0..h - 1 {
        for i in 0..w - 1 {
            // corners counter-clockwise from bottom-left
            let v = [
                values[j * w + i],
                values[j * w + i + 1],
                values[(j + 1) * w + i + 1],
                values[(j + 1) * w + i],
            ];
            let above = v.map(|x| x >= level);
            if above.iter().all(|&b| b) || above.iter().all(|&b| !b) {
                continue;
            }
            let corners = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
            let mut points: Vec<Point> = Vec::with_capacity(4);
            for e in 0..4 {
                let (a, b) = (e, (e + 1) % 4);
                if above[a] != above[b] {
                    let s = crossing(v[a], v[b]);
                    let pa = corners[a];
                    let pb = corners[b];
                    points.push([pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])]);
                }
            }
            let seg = |p: Point, q: Point| (p[0] - q[0]).hypot(p[1] - q[1]);
            if points.len() == 2 {
                length += seg(points[0], points[1]);
            } else {
                // saddle: crossings on edges 0..4 in order; pair by the center value
                let center = 0.25 * v.iter().sum::<f64>();
                if (center >= level) == above[0] {
                    length += seg(points[0], points[1]) + seg(points[2], points[3]);
                } else {
                    length += seg(points[0], points[3]) + seg(points[1], points[2]);
                }
            }
        }
    }
    length
}

#[derive(Debug, Serialize, Deserialize)]
struct FieldHeader {
    origin: Point,
    h: f64,
    epsilon: f64,
}

/// Path of the JSON header written next to a PGM dump.
pub fn sidecar_path(pgm: &Path) -> PathBuf {
    pgm.with_extension("json")
}

/// Writes the occupancy as plain PGM (`P2`, maxval 1) plus a JSON header sidecar.
///
/// PGM rows are written in increasing `j`, so the first image row is the lowest y.
pub fn write_pgm(field: &DensityField, path: &Path) -> Result<()> {
    let g = &field.grid;
    let mut text = format!("P2\n{} {}\n1\n", g.width, g.height);
    for j in 0..g.height {
        let row: Vec<&str> = (0..g.width)
            .map(|i| if field.is_occupied(i, j) { "1" } else { "0" })
            .collect();
        text.push_str(&row.join(" "));
        text.push('\n');
    }
    fs::write(path, text)?;
    let header = FieldHeader {
        origin: g.origin,
        h: g.spacing,
        epsilon: field.epsilon,
    };
    fs::write(sidecar_path(path), serde_json::to_string_pretty(&header)?)?;
    Ok(())
}

/// Reads a field written by [`write_pgm`].
pub fn read_pgm(path: &Path) -> Result<DensityField> {
    let parse_err = |message: String| Error::Parse {
        path: path.to_path_buf(),
        message,
    };
    let text = fs::read_to_string(path)?;
    let mut tokens = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(str::split_whitespace);
    if tokens.next() != Some("P2") {
        return Err(parse_err("missing P2 magic".into()));
    }
    let mut number = |what: &str| -> Result<usize> {
        tokens
            .next()
            .ok_or_else(|| parse_err(format!("missing {what}")))?
            .parse::<usize>()
            .map_err(|e| parse_err(format!("bad {what}: {e}")))
    };
    let width = number("width")?;
    let height = number("height")?;
    let maxval = number("maxval")?;
    if maxval != 1 {
        return Err(parse_err(format!("maxval must be 1, got {maxval}")));
    }
    let mut occupied = Vec::with_capacity(width * height);
    for _ in 0..width * height {
        match number("pixel")? {
            0 => occupied.push(false),
            1 => occupied.push(true),
            other => return Err(parse_err(format!("pixel value {other} is not 0 or 1"))),
        }
    }
    if tokens.next().is_some() {
        return Err(parse_err("trailing data after pixels".into()));
    }
    let sidecar = sidecar_path(path);
    let header: FieldHeader = serde_json::from_str(&fs::read_to_string(&sidecar)?).map_err(|e| Error::Parse {
        path: sidecar.clone(),
        message: e.to_string(),
    })?;
    let grid = GridGeometry::new(header.origin, header.h, width, height)?;
    DensityField::from_occupancy(grid, header.epsilon, occupied)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rectangle_field(h: f64) -> DensityField {
        let grid = GridGeometry::new([-1.0, -1.0], h, (4.0 / h) as usize, (3.0 / h) as usize).unwrap();
        rasterize_region(|p| (0.0..2.0).contains(&p[0]) && (0.0..1.0).contains(&p[1]), grid, 1.0).unwrap()
    }

    #[test]
    fn empty_predicate_gives_zero_mass() {
        let grid = GridGeometry::new([0.0, 0.0], 0.1, 10, 10).unwrap();
        let f = rasterize_region(|_| false, grid, 0.3).unwrap();
        assert_eq!(total_mass(&f), 0.0);
        assert_eq!(scaled_perimeter(&f, PerimeterEstimator::EdgeCount), 0.0);
        assert_eq!(scaled_perimeter(&f, PerimeterEstimator::ContourLength), 0.0);
    }

    #[test]
    fn rectangle_mass_and_edge_perimeter_are_exact() {
        let f = rectangle_field(0.25);
        assert_eq!(f.occupied_count(), 32);
        assert_eq!(total_mass(&f), 2.0);
        assert_eq!(scaled_perimeter(&f, PerimeterEstimator::EdgeCount), 6.0);
    }

    #[test]
    fn contour_perimeter_of_large_rectangle_is_close() {
        // straight sides are reproduced exactly; the blur rounds each corner off over
        // about one smoothing width σ = √(εh)
        let f = rectangle_field(0.01);
        let sigma = 0.01f64.sqrt();
        let p = scaled_perimeter(&f, PerimeterEstimator::ContourLength);
        assert!(p < 6.0 && p > 6.0 - 4.0 * sigma, "{p}");
    }

    #[test]
    fn single_cell_mass() {
        let grid = GridGeometry::new([0.0, 0.0], 0.5, 3, 3).unwrap();
        let mut f = DensityField::empty(grid, 0.25).unwrap();
        f.set_occupied(1, 1, true);
        assert_eq!(total_mass(&f), 1.0);
        assert_eq!(f.value(1, 1), 4.0);
        assert_eq!(f.value(0, 0), 0.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(GridGeometry::new([0.0, 0.0], 0.0, 3, 3).is_err());
        assert!(GridGeometry::new([0.0, 0.0], -1.0, 3, 3).is_err());
        assert!(GridGeometry::new([0.0, 0.0], 1.0, 0, 3).is_err());
        let grid = GridGeometry::new([0.0, 0.0], 1.0, 3, 3).unwrap();
        assert!(rasterize_region(|_| true, grid, 0.0).is_err());
        assert!(rasterize_region(|_| true, grid, -2.0).is_err());
    }

    #[test]
    fn disc_mass_and_perimeters() {
        let h = 0.005;
        let grid = GridGeometry::covering([-1.0, -1.0], [1.0, 1.0], h, 2).unwrap();
        let f = rasterize_region(|p| p[0] * p[0] + p[1] * p[1] < 1.0, grid, 1.0).unwrap();
        let pi = std::f64::consts::PI;
        assert!((total_mass(&f) - pi).abs() < 0.01 * pi);
        let contour = scaled_perimeter(&f, PerimeterEstimator::ContourLength);
        assert!((contour - 2.0 * pi).abs() < 0.01 * 2.0 * pi, "{contour}");
        let edges = scaled_perimeter(&f, PerimeterEstimator::EdgeCount);
        assert!((edges - 8.0).abs() < 0.08, "{edges}");
    }

    #[test]
    fn validate_pair_reports() {
        let grid = GridGeometry::new([0.0, 0.0], 1.0, 4, 4).unwrap();
        let e = DensityField::empty(grid, 1.0).unwrap();
        let r = validate_pair(&e, &e).unwrap();
        assert!(r.is_admissible);
        assert_eq!(r.mass_u, 0.0);

        let mut u = e.clone();
        u.set_occupied(0, 0, true);
        let r = validate_pair(&u, &u.clone()).unwrap();
        assert_eq!(r.overlap_cells, 1);
        assert!(!r.is_admissible);
        assert!(!r.border_clear);

        let other = DensityField::empty(GridGeometry::new([0.0, 0.0], 0.5, 4, 4).unwrap(), 1.0).unwrap();
        assert!(matches!(validate_pair(&e, &other), Err(Error::GeometryMismatch(_))));
        let other_eps = DensityField::empty(grid, 2.0).unwrap();
        assert!(validate_pair(&e, &other_eps).is_err());
    }

    #[test]
    fn strip_pair_on_grid_lines_is_admissible() {
        // u = [-1,1] x [0,5], v = two bands [-2,-1] and [1,2]; t = 2, M = 10, eps = 1
        let grid = GridGeometry::new([-3.0, -1.0], 0.25, 24, 28).unwrap();
        let u = rasterize_region(|p| p[0].abs() < 1.0 && (0.0..5.0).contains(&p[1]), grid, 1.0).unwrap();
        let v = rasterize_region(
            |p| (1.0..2.0).contains(&p[0].abs()) && (0.0..5.0).contains(&p[1]),
            grid,
            1.0,
        )
        .unwrap();
        let r = validate_pair(&u, &v).unwrap();
        assert!(r.is_admissible && r.border_clear);
        assert_eq!(r.mass_u, 10.0);
        let pair = AdmissiblePair::new(u, v).unwrap();
        assert_eq!(pair.mass(), 10.0);
    }

    #[test]
    fn admissible_pair_rejects_border_support() {
        let grid = GridGeometry::new([0.0, 0.0], 1.0, 4, 4).unwrap();
        let mut u = DensityField::empty(grid, 1.0).unwrap();
        let mut v = u.clone();
        u.set_occupied(0, 1, true);
        v.set_occupied(2, 2, true);
        assert!(matches!(AdmissiblePair::new(u, v), Err(Error::NotAdmissible(_))));
    }

    #[test]
    fn annulus_mass_error_is_first_order() {
        let (r2, r3) = (82f64.sqrt(), 122f64.sqrt());
        let exact = std::f64::consts::PI * (r3 * r3 - r2 * r2);
        let perimeter = 2.0 * std::f64::consts::PI * (r2 + r3);
        for h in [0.2, 0.1, 0.05, 0.025] {
            let grid = GridGeometry::covering([-r3, -r3], [r3, r3], h, 2).unwrap();
            let f = rasterize_region(
                |p| {
                    let r = p[0].hypot(p[1]);
                    r > r2 && r < r3
                },
                grid,
                1.0,
            )
            .unwrap();
            // misclassified cells lie within h/√2 of the boundary
            let error = (total_mass(&f) - exact).abs();
            assert!(error <= perimeter * h / 2f64.sqrt(), "h = {h}: {error}");
            if h <= 0.05 {
                assert!(error < 0.01 * exact);
            }
        }
    }

    #[test]
    fn pgm_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("field.pgm");
        let grid = GridGeometry::new([0.1 + 0.2, -1.0 / 3.0], 0.1, 17, 9).unwrap();
        let f = rasterize_region(|p| (p[0] * 7.0).sin() > p[1], grid, 1.0 / 7.0).unwrap();
        write_pgm(&f, &path).unwrap();
        let g = read_pgm(&path).unwrap();
        assert_eq!(f, g);
        assert_eq!(f.grid().origin[0].to_bits(), g.grid().origin[0].to_bits());
    }

    #[test]
    fn pgm_rejects_bad_pixels() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.pgm");
        std::fs::write(&path, "P2\n2 1\n1\n0 2\n").unwrap();
        std::fs::write(sidecar_path(&path), r#"{"origin":[0,0],"h":1,"epsilon":1}"#).unwrap();
        assert!(matches!(read_pgm(&path), Err(Error::Parse { .. })));
    }

    proptest! {
        #[test]
        fn perimeter_is_translation_invariant(
            cells in proptest::collection::vec((0usize..10, 0usize..10), 1..30),
            di in 0usize..5,
            dj in 0usize..5,
        ) {
            let grid = GridGeometry::new([0.0, 0.0], 0.3, 24, 24).unwrap();
            let mut a = DensityField::empty(grid, 1.0).unwrap();
            let mut b = a.clone();
            for &(i, j) in &cells {
                a.set_occupied(i + 2, j + 2, true);
                b.set_occupied(i + 2 + di, j + 2 + dj, true);
            }
            for est in [PerimeterEstimator::EdgeCount, PerimeterEstimator::ContourLength] {
                let pa = scaled_perimeter(&a, est);
                let pb = scaled_perimeter(&b, est);
                prop_assert!((pa - pb).abs() <= 1e-9 * pa.max(1.0));
            }
        }

        #[test]
        fn edge_count_exact_for_axis_aligned_rectangles(
            i0 in 1usize..6, j0 in 1usize..6, w in 1usize..8, hgt in 1usize..8,
        ) {
            let h = 0.125;
            let grid = GridGeometry::new([0.0, 0.0], h, 16, 16).unwrap();
            let mut f = DensityField::empty(grid, 0.5).unwrap();
            for j in j0..j0 + hgt {
                for i in i0..i0 + w {
                    f.set_occupied(i, j, true);
                }
            }
            let p = scaled_perimeter(&f, PerimeterEstimator::EdgeCount);
            prop_assert_eq!(p, 2.0 * (w + hgt) as f64 * h);
        }

        #[test]
        fn admissible_implies_equal_mass_bits(
            cells in proptest::collection::vec(any::<bool>(), 64),
            eps in 0.01f64..3.0,
        ) {
            let grid = GridGeometry::new([0.0, 0.0], 0.37, 8, 8).unwrap();
            let u = DensityField::from_occupancy(grid, eps, cells.clone()).unwrap();
            let v = DensityField::from_occupancy(grid, eps, cells.iter().map(|b| !b).collect()).unwrap();
            let r = validate_pair(&u, &v).unwrap();
            if r.is_admissible {
                prop_assert_eq!(r.mass_u.to_bits(), r.mass_v.to_bits());
            }
        }
    }
}
