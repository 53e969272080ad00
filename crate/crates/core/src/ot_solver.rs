//! Exact discrete optimal transport between equal-mass point measures.
//!
//! [`solve_transport`] returns an optimal vertex plan of the transportation problem
//! with ground cost `|x − y|^p`. Small instances are solved on the complete bipartite
//! graph; large ones by column generation, which prices all pairs against the current
//! potentials with a bucket grid and adds violated arcs until none remain.

mod dual;
mod monotone;
mod network_simplex;

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::density_field::DensityField;
use crate::error::invalid;
use crate::numeric::{compensated_sum, distance};
use crate::{Error, Point, Result};

pub use dual::{duality_check, kantorovich_value, recover_dual, DualPotential};
pub use monotone::{monotone_transport_1d, Density1d, MonotoneTransport, Orientation};
pub use network_simplex::PivotRule;

/// Relative tolerance on the mass balance of the two measures.
pub const BALANCE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub point: Point,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiscreteMeasure {
    atoms: Vec<Atom>,
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        for (k, a) in atoms.iter().enumerate() {
            if !(a.weight > 0.0 && a.weight.is_finite()) {
                return Err(invalid(format!("atom {k} has weight {}", a.weight)));
            }
            if !(a.point[0].is_finite() && a.point[1].is_finite()) {
                return Err(invalid(format!("atom {k} has a non-finite position")));
            }
        }
        Ok(Self { atoms })
    }

    pub fn from_points(points: &[Point], weight: f64) -> Result<Self> {
        Self::new(points.iter().map(|&point| Atom { point, weight }).collect())
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total(&self) -> f64 {
        compensated_sum(self.atoms.iter().map(|a| a.weight))
    }

    pub fn point(&self, k: usize) -> Point {
        self.atoms[k].point
    }

    pub fn weight(&self, k: usize) -> f64 {
        self.atoms[k].weight
    }

    /// All positions multiplied by `factor`.
    pub fn dilated(&self, factor: f64) -> Self {
        Self {
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom {
                    point: [factor * a.point[0], factor * a.point[1]],
                    weight: a.weight,
                })
                .collect(),
        }
    }

    fn bounding_box(&self) -> (Point, Point) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for a in &self.atoms {
            for k in 0..2 {
                lo[k] = lo[k].min(a.point[k]);
                hi[k] = hi[k].max(a.point[k]);
            }
        }
        (lo, hi)
    }
}

/// One atom per occupied cell, at the cell center, with weight `h²/ε`.
pub fn field_to_measure(field: &DensityField) -> DiscreteMeasure {
    let grid = field.grid();
    let weight = grid.cell_area() / field.epsilon();
    DiscreteMeasure {
        atoms: field
            .occupied_cells()
            .map(|(i, j)| Atom {
                point: grid.cell_center(i, j),
                weight,
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanEntry {
    pub source: usize,
    pub target: usize,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    /// Sorted by `(source, target)`; every mass is positive.
    pub entries: Vec<PlanEntry>,
    /// `Σ mass · |x − y|^p`.
    pub cost: f64,
    pub exponent: f64,
    /// Optimal dual variables reported by the solver, when available.
    pub duals: Option<DualPotential>,
}

impl TransportPlan {
    /// `cost^{1/p}`.
    pub fn distance(&self) -> f64 {
        self.cost.powf(1.0 / self.exponent)
    }

    /// Row sums indexed by source atom.
    pub fn source_marginal(&self, sources: usize) -> Vec<f64> {
        let mut sums = vec![Vec::new(); sources];
        for e in &self.entries {
            sums[e.source].push(e.mass);
        }
        sums.into_iter().map(compensated_sum).collect()
    }

    /// Column sums indexed by target atom.
    pub fn target_marginal(&self, targets: usize) -> Vec<f64> {
        let mut sums = vec![Vec::new(); targets];
        for e in &self.entries {
            sums[e.target].push(e.mass);
        }
        sums.into_iter().map(compensated_sum).collect()
    }
}

/// Ground cost `|x − y|^p`.
pub fn ground_cost(x: Point, y: Point, p: f64) -> f64 {
    let d = distance(x, y);
    if p == 1.0 {
        d
    } else {
        d.powf(p)
    }
}

/// Plan cost recomputed from its entries.
pub fn plan_cost(plan: &[PlanEntry], mu: &DiscreteMeasure, nu: &DiscreteMeasure, p: f64) -> f64 {
    compensated_sum(
        plan.iter()
            .map(|e| e.mass * ground_cost(mu.point(e.source), nu.point(e.target), p)),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Largest number of atoms accepted on either side.
    pub capacity: usize,
    /// Instances with at most this many source-target pairs use every arc.
    pub dense_limit: usize,
    pub pivot: PivotRule,
    /// Initial nearest-neighbour arcs per atom under column generation.
    pub neighbours: usize,
    /// Arcs added per target and pricing round under column generation.
    pub arcs_per_round: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            capacity: 60_000,
            dense_limit: 250_000,
            pivot: PivotRule::BlockSearch,
            neighbours: 12,
            arcs_per_round: 8,
        }
    }
}

/// Optimal plan for ground cost `|x − y|^p` with default options.
pub fn solve_transport(mu: &DiscreteMeasure, nu: &DiscreteMeasure, p: f64) -> Result<TransportPlan> {
    solve_transport_with(mu, nu, p, &SolverOptions::default())
}

/// Integer supplies and the mass represented by one unit of flow.
fn integer_supplies(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> (Vec<i64>, f64) {
    let w0 = mu.atoms.first().or(nu.atoms.first()).map(|a| a.weight).unwrap_or(1.0);
    let uniform = mu.atoms.iter().chain(&nu.atoms).all(|a| a.weight == w0);
    if uniform && mu.len() == nu.len() {
        let mut supply = vec![1i64; mu.len()];
        supply.extend(std::iter::repeat_n(-1, nu.len()));
        return (supply, w0);
    }
    let total = mu.total().max(nu.total());
    // largest power of two keeping the total below 2^60
    let scale = 2f64.powi((60.0 - total.log2()).floor() as i32);
    let mut supply: Vec<i64> = mu
        .atoms
        .iter()
        .map(|a| ((a.weight * scale).round() as i64).max(1))
        .collect();
    let sinks: Vec<i64> = nu
        .atoms
        .iter()
        .map(|a| ((a.weight * scale).round() as i64).max(1))
        .collect();
    let imbalance = supply.iter().sum::<i64>() - sinks.iter().sum::<i64>();
    let mut sinks = sinks;
    if imbalance != 0 {
        if imbalance > 0 {
            let k = (0..sinks.len()).max_by_key(|&k| sinks[k]).unwrap();
            sinks[k] += imbalance;
        } else {
            let k = (0..supply.len()).max_by_key(|&k| supply[k]).unwrap();
            supply[k] -= imbalance;
        }
    }
    supply.extend(sinks.iter().map(|s| -s));
    (supply, 1.0 / scale)
}

pub fn solve_transport_with(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    p: f64,
    options: &SolverOptions,
) -> Result<TransportPlan> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(invalid(format!("exponent must satisfy p >= 1, got {p}")));
    }
    for m in [mu, nu] {
        if m.len() > options.capacity {
            return Err(Error::CapacityExceeded {
                atoms: m.len(),
                capacity: options.capacity,
            });
        }
    }
    let (source_total, target_total) = (mu.total(), nu.total());
    if (source_total - target_total).abs() > BALANCE_TOLERANCE * source_total.max(target_total) {
        return Err(Error::Unbalanced {
            source_total,
            target_total,
        });
    }
    if mu.is_empty() || nu.is_empty() {
        if mu.is_empty() && nu.is_empty() {
            return Ok(TransportPlan {
                entries: Vec::new(),
                cost: 0.0,
                exponent: p,
                duals: None,
            });
        }
        return Err(Error::Unbalanced {
            source_total,
            target_total,
        });
    }

    let (supply, unit) = integer_supplies(mu, nu);
    let m = mu.len();
    let n = nu.len();
    let (lo_a, hi_a) = mu.bounding_box();
    let (lo_b, hi_b) = nu.bounding_box();
    let diameter = distance(
        [lo_a[0].min(lo_b[0]), lo_a[1].min(lo_b[1])],
        [hi_a[0].max(hi_b[0]), hi_a[1].max(hi_b[1])],
    );
    let mut simplex = network_simplex::NetworkSimplex::new(&supply, diameter.powf(p) * (1.0 + 1e-12));

    if (m as u128) * (n as u128) <= options.dense_limit as u128 {
        for i in 0..m {
            for j in 0..n {
                simplex.add_arc(i, m + j, ground_cost(mu.point(i), nu.point(j), p));
            }
        }
        simplex.run(options.pivot)?;
    } else {
        column_generation(&mut simplex, mu, nu, p, options)?;
    }
    if simplex.artificial_flow() != 0 {
        return Err(Error::Consistency("flow left on artificial arcs".into()));
    }

    let mut entries: Vec<PlanEntry> = simplex
        .flows()
        .map(|(i, j, f)| PlanEntry {
            source: i,
            target: j - m,
            mass: f as f64 * unit,
        })
        .collect();
    entries.sort_by_key(|e| (e.source, e.target));
    let cost = plan_cost(&entries, mu, nu, p);
    let pi = simplex.potentials();
    let shift = pi[0];
    let duals = DualPotential {
        source: pi[..m].iter().map(|v| shift - v).collect(),
        target: pi[m..].iter().map(|v| shift - v).collect(),
    };
    log::debug!(
        "transport {m}x{n}: {} arcs, {} pivots, cost {cost}",
        simplex.arc_count(),
        simplex.pivots()
    );
    Ok(TransportPlan {
        entries,
        cost,
        exponent: p,
        duals: Some(duals),
    })
}

/// Uniform bucket grid over a point set.
struct Buckets {
    origin: Point,
    size: f64,
    nx: usize,
    ny: usize,
    start: Vec<usize>,
    items: Vec<usize>,
}

impl Buckets {
    fn new(points: &[Point], per_bucket: f64) -> Self {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in points {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let area = ((hi[0] - lo[0]) * (hi[1] - lo[1])).max(1e-300);
        let mut size = (area * per_bucket / points.len() as f64).sqrt();
        if !(size > 0.0) || !size.is_finite() {
            size = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1.0);
        }
        let nx = (((hi[0] - lo[0]) / size).floor() as usize + 1).min(4096);
        let ny = (((hi[1] - lo[1]) / size).floor() as usize + 1).min(4096);
        let size = size.max((hi[0] - lo[0]) / nx as f64).max((hi[1] - lo[1]) / ny as f64) * (1.0 + 1e-12);
        let mut counts = vec![0usize; nx * ny + 1];
        let cell_of = |p: &Point| {
            let i = (((p[0] - lo[0]) / size) as usize).min(nx - 1);
            let j = (((p[1] - lo[1]) / size) as usize).min(ny - 1);
            j * nx + i
        };
        for p in points {
            counts[cell_of(p) + 1] += 1;
        }
        for k in 0..nx * ny {
            counts[k + 1] += counts[k];
        }
        let mut fill = counts.clone();
        let mut items = vec![0; points.len()];
        for (idx, p) in points.iter().enumerate() {
            let c = cell_of(p);
            items[fill[c]] = idx;
            fill[c] += 1;
        }
        Self {
            origin: lo,
            size,
            nx,
            ny,
            start: counts,
            items,
        }
    }

    fn bucket(&self, i: usize, j: usize) -> &[usize] {
        let k = j * self.nx + i;
        &self.items[self.start[k]..self.start[k + 1]]
    }

    fn coords(&self, p: Point) -> (isize, isize) {
        (
            ((p[0] - self.origin[0]) / self.size).floor() as isize,
            ((p[1] - self.origin[1]) / self.size).floor() as isize,
        )
    }

    /// Distance from `p` to the closed square of bucket `(i, j)`.
    fn gap(&self, p: Point, i: usize, j: usize) -> f64 {
        let x0 = self.origin[0] + i as f64 * self.size;
        let y0 = self.origin[1] + j as f64 * self.size;
        let dx = (x0 - p[0]).max(p[0] - x0 - self.size).max(0.0);
        let dy = (y0 - p[1]).max(p[1] - y0 - self.size).max(0.0);
        dx.hypot(dy)
    }

    /// Up to `k` nearest items to `p`, by expanding rings.
    fn nearest(&self, points: &[Point], p: Point, k: usize) -> Vec<usize> {
        let (ci, cj) = self.coords(p);
        let mut found: Vec<(f64, usize)> = Vec::new();
        let max_ring = self.nx.max(self.ny) as isize + 1;
        for ring in 0..=max_ring {
            for j in cj - ring..=cj + ring {
                for i in ci - ring..=ci + ring {
                    if (i - ci).abs() != ring && (j - cj).abs() != ring {
                        continue;
                    }
                    if i < 0 || j < 0 || i >= self.nx as isize || j >= self.ny as isize {
                        continue;
                    }
                    for &idx in self.bucket(i as usize, j as usize) {
                        found.push((distance(points[idx], p), idx));
                    }
                }
            }
            if found.len() >= k {
                found.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                // anything closer than the next ring is already in
                let reach = ring as f64 * self.size;
                if found[k - 1].0 <= reach {
                    break;
                }
            }
        }
        found.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        found.truncate(k);
        found.into_iter().map(|(_, idx)| idx).collect()
    }
}

fn column_generation(
    simplex: &mut network_simplex::NetworkSimplex,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    p: f64,
    options: &SolverOptions,
) -> Result<()> {
    let m = mu.len();
    let n = nu.len();
    let xs: Vec<Point> = mu.atoms.iter().map(|a| a.point).collect();
    let ys: Vec<Point> = nu.atoms.iter().map(|a| a.point).collect();
    let mut present: HashSet<(u32, u32)> = HashSet::new();
    let add = |present: &mut HashSet<(u32, u32)>, simplex: &mut network_simplex::NetworkSimplex, i: usize, j: usize| {
        if present.insert((i as u32, j as u32)) {
            simplex.add_arc(i, m + j, ground_cost(xs[i], ys[j], p));
        }
    };

    let source_buckets = Buckets::new(&xs, 12.0);
    let target_buckets = Buckets::new(&ys, 12.0);
    let k = options.neighbours.max(1);
    for (i, &x) in xs.iter().enumerate() {
        for j in target_buckets.nearest(&ys, x, k.min(n)) {
            add(&mut present, simplex, i, j);
        }
    }
    for (j, &y) in ys.iter().enumerate() {
        for i in source_buckets.nearest(&xs, y, k.min(m)) {
            add(&mut present, simplex, i, j);
        }
    }
    // north-west corner plan on angularly sorted atoms, so the restricted problem is feasible
    let centre = {
        let all = xs.iter().chain(&ys);
        let c = all.fold([0.0, 0.0], |c, q| [c[0] + q[0], c[1] + q[1]]);
        [c[0] / (m + n) as f64, c[1] / (m + n) as f64]
    };
    let angle = |q: &Point| (q[1] - centre[1]).atan2(q[0] - centre[0]);
    let mut order_a: Vec<usize> = (0..m).collect();
    let mut order_b: Vec<usize> = (0..n).collect();
    order_a.sort_by(|&a, &b| angle(&xs[a]).total_cmp(&angle(&xs[b])));
    order_b.sort_by(|&a, &b| angle(&ys[a]).total_cmp(&angle(&ys[b])));
    let weights_a: Vec<f64> = order_a.iter().map(|&i| mu.weight(i)).collect();
    let weights_b: Vec<f64> = order_b.iter().map(|&j| nu.weight(j)).collect();
    let (mut ia, mut ib) = (0, 0);
    let (mut ra, mut rb) = (weights_a[0], weights_b[0]);
    while ia < m && ib < n {
        add(&mut present, simplex, order_a[ia], order_b[ib]);
        if ra <= rb {
            rb -= ra;
            ia += 1;
            if ia < m {
                ra = weights_a[ia];
            }
        } else {
            ra -= rb;
            ib += 1;
            if ib < n {
                rb = weights_b[ib];
            }
        }
    }

    let per_round = options.arcs_per_round.max(1);
    for round in 0.. {
        simplex.run(options.pivot)?;
        let pi = simplex.potentials().to_vec();
        let tol = simplex.tolerance();
        let min_source_pi = pi[..m].iter().fold(f64::INFINITY, |a, &b| a.min(b));
        let bucket_min: Vec<f64> = (0..source_buckets.nx * source_buckets.ny)
            .map(|b| {
                let (i, j) = (b % source_buckets.nx, b / source_buckets.nx);
                source_buckets
                    .bucket(i, j)
                    .iter()
                    .fold(f64::INFINITY, |a, &s| a.min(pi[s]))
            })
            .collect();
        let mut added = 0usize;
        let mut candidates: Vec<(f64, usize)> = Vec::new();
        for j in 0..n {
            let y = ys[j];
            let slack = pi[m + j] - min_source_pi - tol;
            if slack <= 0.0 {
                continue;
            }
            let radius = if p == 1.0 { slack } else { slack.powf(1.0 / p) };
            let (ci, cj) = source_buckets.coords(y);
            let reach = (radius / source_buckets.size).ceil() as isize + 1;
            let i0 = (ci - reach).max(0) as usize;
            let i1 = ((ci + reach).max(-1) + 1).min(source_buckets.nx as isize) as usize;
            let j0 = (cj - reach).max(0) as usize;
            let j1 = ((cj + reach).max(-1) + 1).min(source_buckets.ny as isize) as usize;
            candidates.clear();
            for bj in j0..j1 {
                for bi in i0..i1 {
                    let bmin = bucket_min[bj * source_buckets.nx + bi];
                    let gap = source_buckets.gap(y, bi, bj);
                    let lower = if p == 1.0 { gap } else { gap.powf(p) };
                    if lower + bmin - pi[m + j] >= -tol {
                        continue;
                    }
                    for &i in source_buckets.bucket(bi, bj) {
                        let rc = ground_cost(xs[i], y, p) + pi[i] - pi[m + j];
                        if rc < -tol && !present.contains(&(i as u32, j as u32)) {
                            candidates.push((rc, i));
                        }
                    }
                }
            }
            if candidates.is_empty() {
                continue;
            }
            candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            for &(_, i) in candidates.iter().take(per_round) {
                add(&mut present, simplex, i, j);
                added += 1;
            }
        }
        log::debug!(
            "column generation round {round}: {added} arcs added, {} total",
            simplex.arc_count()
        );
        if added == 0 {
            break;
        }
    }
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct MeasureRow {
    x: f64,
    y: f64,
    w: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct PlanRow {
    i: usize,
    j: usize,
    mass: f64,
}

pub fn write_measure_csv(measure: &DiscreteMeasure, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for a in &measure.atoms {
        w.serialize(MeasureRow {
            x: a.point[0],
            y: a.point[1],
            w: a.weight,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_measure_csv(path: &Path) -> Result<DiscreteMeasure> {
    let mut r = csv::Reader::from_path(path)?;
    let mut atoms = Vec::new();
    for row in r.deserialize::<MeasureRow>() {
        let row = row.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        atoms.push(Atom {
            point: [row.x, row.y],
            weight: row.w,
        });
    }
    DiscreteMeasure::new(atoms)
}

pub fn write_plan_csv(plan: &TransportPlan, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for e in &plan.entries {
        w.serialize(PlanRow {
            i: e.source,
            j: e.target,
            mass: e.mass,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Reads plan rows; the cost is recomputed against the given measures.
pub fn read_plan_csv(path: &Path, mu: &DiscreteMeasure, nu: &DiscreteMeasure, p: f64) -> Result<TransportPlan> {
    let mut r = csv::Reader::from_path(path)?;
    let mut entries = Vec::new();
    for row in r.deserialize::<PlanRow>() {
        let row = row.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        if row.i >= mu.len() || row.j >= nu.len() || !(row.mass > 0.0) {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                message: format!("invalid plan row {row:?}"),
            });
        }
        entries.push(PlanEntry {
            source: row.i,
            target: row.j,
            mass: row.mass,
        });
    }
    let cost = plan_cost(&entries, mu, nu, p);
    Ok(TransportPlan {
        entries,
        cost,
        exponent: p,
        duals: None,
    })
}
