//! Test-side reference computations, written independently of the library.
#![allow(dead_code)]

use std::f64::consts::PI;

/// `½∮κ² ds` of the ellipse with semi-axes 2 and 1, from an mpmath quadrature at 30
/// digits, frozen here.
pub const ELLIPSE_2_1_ELASTICA: f64 = 3.318_014_876_061_650_7;
/// Perimeter of the same ellipse.
pub const ELLIPSE_2_1_PERIMETER: f64 = 9.688_448_220_547_676;

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut derivative = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            derivative = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / derivative;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * derivative * derivative);
    }
    (nodes, weights)
}

/// Composite Gauss-Legendre rule with `panels` equal panels.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize, order: usize) -> f64 {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        let part: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * f(mid + 0.5 * h * xi)).sum();
        total += 0.5 * h * part;
    }
    total
}

/// Distance `t` along a ray at which the enclosed mass reaches `m`, by Newton's method
/// on `m(t) = (t sin β − t² α′/2)/ε`.
pub fn ray_length_at_mass(sin_beta: f64, alpha: f64, epsilon: f64, m: f64) -> f64 {
    let mut t = epsilon * m / sin_beta;
    for _ in 0..100 {
        let residual = (t * sin_beta - 0.5 * t * t * alpha) / epsilon - m;
        let slope = (sin_beta - t * alpha) / epsilon;
        let step = residual / slope;
        t -= step;
        if step.abs() <= 1e-17 * t.abs().max(1e-300) {
            break;
        }
    }
    t
}

/// `∫₀^M [t(m) − t(m − M)] dm` by quadrature.
pub fn per_ray_cost_quadrature(sin_beta: f64, alpha: f64, mass: f64, epsilon: f64) -> f64 {
    integrate(
        |m| ray_length_at_mass(sin_beta, alpha, epsilon, m) - ray_length_at_mass(sin_beta, alpha, epsilon, m - mass),
        0.0,
        mass,
        16,
        24,
    )
}

/// `½∮κ² ds` of an ellipse by the periodic trapezoid rule in the angle parameter.
pub fn ellipse_elastica(a: f64, b: f64) -> f64 {
    let n = 20_000;
    let h = 2.0 * PI / n as f64;
    let sum: f64 = (0..n)
        .map(|k| {
            let t = k as f64 * h;
            let q = a * a * t.sin().powi(2) + b * b * t.cos().powi(2);
            a * a * b * b / q.powf(2.5)
        })
        .sum();
    0.5 * sum * h
}

/// Distance from `x` to the closed polyline through `points`.
pub fn polyline_distance(points: &[[f64; 2]], x: [f64; 2]) -> f64 {
    let n = points.len();
    (0..n)
        .map(|k| {
            let (a, b) = (points[k], points[(k + 1) % n]);
            let e = [b[0] - a[0], b[1] - a[1]];
            let w = [x[0] - a[0], x[1] - a[1]];
            let t = ((w[0] * e[0] + w[1] * e[1]) / (e[0] * e[0] + e[1] * e[1])).clamp(0.0, 1.0);
            (w[0] - t * e[0]).hypot(w[1] - t * e[1])
        })
        .fold(f64::INFINITY, f64::min)
}

/// Minimal transport cost by enumerating every basis (spanning tree of the bipartite
/// graph) of the transportation polytope. Supplies are integers with equal totals.
pub fn brute_force_transport(supply: &[i64], demand: &[i64], cost: &[Vec<f64>]) -> f64 {
    let (m, n) = (supply.len(), demand.len());
    let cells: Vec<(usize, usize)> = (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    let mut search = TreeSearch {
        m,
        n,
        cells,
        parent: (0..m + n).collect(),
        chosen: Vec::new(),
        best: f64::INFINITY,
        supply,
        demand,
        cost,
    };
    search.recurse(0);
    search.best
}

struct TreeSearch<'a> {
    m: usize,
    n: usize,
    cells: Vec<(usize, usize)>,
    parent: Vec<usize>,
    chosen: Vec<(usize, usize)>,
    best: f64,
    supply: &'a [i64],
    demand: &'a [i64],
    cost: &'a [Vec<f64>],
}

impl TreeSearch<'_> {
    fn root(&self, mut x: usize) -> usize {
        while self.parent[x] != x {
            x = self.parent[x];
        }
        x
    }

    fn recurse(&mut self, next: usize) {
        let needed = self.m + self.n - 1;
        if self.chosen.len() == needed {
            self.evaluate();
            return;
        }
        if self.cells.len() - next < needed - self.chosen.len() {
            return;
        }
        let (i, j) = self.cells[next];
        let (ri, rj) = (self.root(i), self.root(self.m + j));
        if ri != rj {
            self.parent[ri] = rj;
            self.chosen.push((i, j));
            self.recurse(next + 1);
            self.chosen.pop();
            self.parent[ri] = ri;
        }
        self.recurse(next + 1);
    }

    fn evaluate(&mut self) {
        let (m, n) = (self.m, self.n);
        let mut remaining: Vec<i64> = self
            .supply
            .iter()
            .copied()
            .chain(self.demand.iter().map(|d| -d))
            .collect();
        let mut degree = vec![0usize; m + n];
        for &(i, j) in &self.chosen {
            degree[i] += 1;
            degree[m + j] += 1;
        }
        let mut used = vec![false; self.chosen.len()];
        let mut total = 0.0;
        for _ in 0..self.chosen.len() {
            let Some((e, leaf)) = self
                .chosen
                .iter()
                .enumerate()
                .filter(|(e, _)| !used[*e])
                .find_map(|(e, &(i, j))| {
                    if degree[i] == 1 {
                        Some((e, i))
                    } else if degree[m + j] == 1 {
                        Some((e, m + j))
                    } else {
                        None
                    }
                })
            else {
                return;
            };
            let (i, j) = self.chosen[e];
            let flow = if leaf == i { remaining[i] } else { -remaining[m + j] };
            if flow < 0 {
                return;
            }
            used[e] = true;
            remaining[i] -= flow;
            remaining[m + j] += flow;
            degree[i] -= 1;
            degree[m + j] -= 1;
            total += flow as f64 * self.cost[i][j];
        }
        self.best = self.best.min(total);
    }
}

#[test]
fn gauss_legendre_integrates_polynomials() {
    let exact = 1.0 / 11.0;
    assert!((integrate(|x| x.powi(10), 0.0, 1.0, 1, 6) - exact).abs() < 1e-15);
}

#[test]
fn frozen_ellipse_values() {
    assert!((ellipse_elastica(2.0, 1.0) - ELLIPSE_2_1_ELASTICA).abs() < 1e-12);
}

#[test]
fn brute_force_small_case() {
    // two sources, two targets on a line: the uncrossed plan costs 2
    let cost = vec![vec![1.0, 3.0], vec![1.0, 1.0]];
    assert_eq!(brute_force_transport(&[1, 1], &[1, 1], &cost), 2.0);
}
