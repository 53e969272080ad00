//! Rasterized rings against the exact ring transport cost and perimeter.

use bilayer_core::closed_forms::{ring_d1_exact, ring_radii, RingConfig};
use bilayer_core::density_field::{
    rasterize_region, scaled_perimeter, total_mass, DensityField, GridGeometry, PerimeterEstimator,
};
use bilayer_core::ot_solver::{field_to_measure, solve_transport_with, Atom, DiscreteMeasure, SolverOptions};
use rayon::prelude::*;
use serde::Serialize;

use super::{check_finite, rescaled, Outcome};
use crate::config::GridConfig;
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridRow {
    pub index: usize,
    pub ring: usize,
    pub radius: f64,
    pub thickness: f64,
    pub spacing: f64,
    pub atoms_u: Option<usize>,
    pub atoms_v: Option<usize>,
    pub d1: Option<f64>,
    pub d1_exact: Option<f64>,
    pub d1_rel_error: Option<f64>,
    pub perimeter: Option<f64>,
    /// `2π(r2 + r3)`
    pub perimeter_exact: Option<f64>,
    pub perimeter_rel_error: Option<f64>,
    /// Mass of the rasterized `u` (ε = 1).
    pub mass: Option<f64>,
    pub mass_exact: Option<f64>,
    /// `d1 + perimeter`
    pub f: Option<f64>,
    /// `f − 2·mass`
    pub g: Option<f64>,
    pub error: Option<String>,
}

struct Measured {
    cfg: RingConfig,
    atoms_u: usize,
    atoms_v: usize,
    d1: f64,
    perimeter: f64,
    mass: f64,
}

fn annulus(grid: GridGeometry, lo: f64, hi: f64) -> bilayer_core::Result<DensityField> {
    rasterize_region(|p| (lo..hi).contains(&p[0].hypot(p[1])), grid, 1.0)
}

/// `u` on `r2 < r < r3`, `v` on the two flanking bands, `v` rescaled to the mass of `u`.
fn measure(radius: f64, thickness: f64, h: f64, options: &SolverOptions) -> bilayer_core::Result<Measured> {
    let cfg = ring_radii(radius, thickness)?;
    let reach = cfg.r4 + 4.0 * h;
    let grid = GridGeometry::covering([-reach, -reach], [reach, reach], h, 2)?;
    let u = annulus(grid, cfg.r2, cfg.r3)?;
    let inner = annulus(grid, cfg.r1, cfg.r2)?;
    let outer = annulus(grid, cfg.r3, cfg.r4)?;
    let v_cells = inner
        .occupancy()
        .iter()
        .zip(outer.occupancy())
        .map(|(a, b)| *a || *b)
        .collect();
    let v = DensityField::from_occupancy(grid, 1.0, v_cells)?;
    let mu = field_to_measure(&u);
    let nu = field_to_measure(&v);
    let scale = mu.total() / nu.total();
    let nu = DiscreteMeasure::new(
        nu.atoms()
            .iter()
            .map(|a| Atom {
                point: a.point,
                weight: a.weight * scale,
            })
            .collect(),
    )?;
    let plan = solve_transport_with(&mu, &nu, 1.0, options)?;
    Ok(Measured {
        cfg,
        atoms_u: mu.len(),
        atoms_v: nu.len(),
        d1: plan.cost,
        perimeter: scaled_perimeter(&u, PerimeterEstimator::ContourLength),
        mass: total_mass(&u),
    })
}

pub fn run(cfg: &GridConfig) -> Result<Outcome<GridRow>> {
    let options = SolverOptions {
        capacity: cfg.capacity,
        ..SolverOptions::default()
    };
    let params: Vec<(usize, f64, f64, f64)> = cfg
        .rings
        .iter()
        .enumerate()
        .flat_map(|(k, ring)| cfg.spacings.iter().map(move |&h| (k, ring.radius, ring.thickness, h)))
        .collect();
    let rows: Vec<GridRow> = params
        .par_iter()
        .enumerate()
        .map(|(index, &(ring, radius, thickness, spacing))| {
            log::info!("grid row {index}: R = {radius}, t = {thickness}, h = {spacing}");
            let mut row = GridRow {
                index,
                ring,
                radius,
                thickness,
                spacing,
                atoms_u: None,
                atoms_v: None,
                d1: None,
                d1_exact: None,
                d1_rel_error: None,
                perimeter: None,
                perimeter_exact: None,
                perimeter_rel_error: None,
                mass: None,
                mass_exact: None,
                f: None,
                g: None,
                error: None,
            };
            match measure(radius, thickness, spacing, &options) {
                Ok(m) => {
                    let d1_exact = ring_d1_exact(&m.cfg);
                    let perimeter_exact = m.cfg.interface();
                    let f = m.d1 + m.perimeter;
                    row.atoms_u = Some(m.atoms_u);
                    row.atoms_v = Some(m.atoms_v);
                    row.d1 = Some(m.d1);
                    row.d1_exact = Some(d1_exact);
                    row.d1_rel_error = Some((m.d1 - d1_exact).abs() / d1_exact);
                    row.perimeter = Some(m.perimeter);
                    row.perimeter_exact = Some(perimeter_exact);
                    row.perimeter_rel_error = Some((m.perimeter - perimeter_exact).abs() / perimeter_exact);
                    row.mass = Some(m.mass);
                    row.mass_exact = Some(m.cfg.mass());
                    row.f = Some(f);
                    row.g = Some(rescaled(f, m.mass, 1.0));
                }
                Err(e) => row.error = Some(e.to_string()),
            }
            row
        })
        .collect();

    let mut violations = Vec::new();
    for r in &rows {
        check_finite(
            &mut violations,
            r.index,
            &[("d1", r.d1), ("perimeter", r.perimeter), ("g", r.g)],
        );
    }
    let mut summary = Vec::new();
    for (k, ring) in cfg.rings.iter().enumerate() {
        let mut done: Vec<&GridRow> = rows.iter().filter(|r| r.ring == k && r.error.is_none()).collect();
        done.sort_by(|a, b| b.spacing.total_cmp(&a.spacing));
        for pair in done.windows(2) {
            if pair[1].spacing < pair[0].spacing && pair[1].d1_rel_error >= pair[0].d1_rel_error {
                violations.push(format!(
                    "ring {k}: d1 error does not decrease from h = {} to h = {}",
                    pair[0].spacing, pair[1].spacing
                ));
            }
        }
        if let Some(finest) = done.last() {
            summary.push(format!(
                "ring {k} (R = {}, t = {}): finest h = {}, d1 relative error {:.3e}, perimeter relative error {:.3e}",
                ring.radius,
                ring.thickness,
                finest.spacing,
                finest.d1_rel_error.unwrap_or(f64::NAN),
                finest.perimeter_rel_error.unwrap_or(f64::NAN)
            ));
        }
    }
    Ok(Outcome {
        rows,
        summary,
        violations,
    })
}
