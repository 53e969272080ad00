//! Kantorovich potentials for `p = 1`.
//!
//! A potential assigns `φ_i` to each source atom and `ψ_j` to each target atom; it is
//! admissible when it is 1-Lipschitz on the union of the atoms, and its value is
//! `K = Σ φ_i a_i − Σ ψ_j b_j ≤ d₁`.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{DiscreteMeasure, TransportPlan};
use crate::numeric::{compensated_sum, distance};
use crate::{Error, Result};

/// Tolerance for Lipschitz and complementary-slackness checks.
pub const DUAL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualPotential {
    pub source: Vec<f64>,
    pub target: Vec<f64>,
}

impl DualPotential {
    /// The same potential plus a constant.
    pub fn shifted(&self, c: f64) -> Self {
        Self {
            source: self.source.iter().map(|v| v + c).collect(),
            target: self.target.iter().map(|v| v + c).collect(),
        }
    }
}

/// `K(φ) = Σ φ_i a_i − Σ ψ_j b_j`.
pub fn kantorovich_value(phi: &DualPotential, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
    compensated_sum(
        phi.source
            .iter()
            .zip(mu.atoms())
            .map(|(v, a)| v * a.weight)
            .chain(phi.target.iter().zip(nu.atoms()).map(|(v, a)| -v * a.weight)),
    )
}

fn check_lengths(phi: &DualPotential, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<()> {
    if phi.source.len() != mu.len() || phi.target.len() != nu.len() {
        return Err(Error::Consistency(format!(
            "potential has {}+{} values for {}+{} atoms",
            phi.source.len(),
            phi.target.len(),
            mu.len(),
            nu.len()
        )));
    }
    Ok(())
}

/// Largest `|φ(a) − φ(b)| − |a − b|` over all atom pairs, with the pair attaining it.
/// Atoms are indexed sources first, then targets.
fn worst_lipschitz_excess(phi: &DualPotential, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> (f64, usize, usize) {
    let points: Vec<_> = mu.atoms().iter().chain(nu.atoms()).map(|a| a.point).collect();
    let values: Vec<f64> = phi.source.iter().chain(&phi.target).copied().collect();
    let mut worst = (f64::NEG_INFINITY, 0, 0);
    for a in 0..points.len() {
        for b in a + 1..points.len() {
            let excess = (values[a] - values[b]).abs() - distance(points[a], points[b]);
            if excess > worst.0 {
                worst = (excess, a, b);
            }
        }
    }
    worst
}

/// `cost − K(φ)`, after checking that `φ` is 1-Lipschitz on the atoms.
pub fn duality_check(phi: &DualPotential, mu: &DiscreteMeasure, nu: &DiscreteMeasure, cost: f64) -> Result<f64> {
    check_lengths(phi, mu, nu)?;
    let (excess, first, second) = worst_lipschitz_excess(phi, mu, nu);
    if excess > DUAL_TOLERANCE {
        return Err(Error::InvalidPotential { excess, first, second });
    }
    Ok(cost - kantorovich_value(phi, mu, nu))
}

fn slackness_holds(phi: &DualPotential, plan: &TransportPlan, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> bool {
    plan.entries.iter().all(|e| {
        let d = distance(mu.point(e.source), nu.point(e.target));
        (phi.source[e.source] - phi.target[e.target] - d).abs() <= DUAL_TOLERANCE
    })
}

/// Solves the difference constraints `φ_i − ψ_j ≤ |x_i − y_j|` for all pairs and
/// `φ_i − ψ_j ≥ |x_i − y_j|` on plan entries by label-correcting shortest paths.
fn potentials_from_plan(plan: &TransportPlan, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<DualPotential> {
    let m = mu.len();
    let n = nu.len();
    let mut out_of_source: Vec<Vec<usize>> = vec![Vec::new(); m];
    for e in &plan.entries {
        out_of_source[e.source].push(e.target);
    }
    let mut dist = vec![0.0f64; m + n];
    let mut queued = vec![true; m + n];
    let mut visits = vec![0usize; m + n];
    let mut queue: VecDeque<usize> = (0..m + n).collect();
    let limit = m + n + 1;
    let slack = 1e-13;
    while let Some(v) = queue.pop_front() {
        queued[v] = false;
        visits[v] += 1;
        if visits[v] > limit {
            return Err(Error::Consistency(
                "plan is not optimal: negative cycle in the dual constraints".into(),
            ));
        }
        let mut relax = |w: usize, candidate: f64, dist: &mut Vec<f64>, queue: &mut VecDeque<usize>| {
            if candidate < dist[w] - slack {
                dist[w] = candidate;
                if !queued[w] {
                    queued[w] = true;
                    queue.push_back(w);
                }
            }
        };
        if v < m {
            for &j in &out_of_source[v] {
                let d = distance(mu.point(v), nu.point(j));
                relax(m + j, dist[v] - d, &mut dist, &mut queue);
            }
        } else {
            let j = v - m;
            for i in 0..m {
                let d = distance(mu.point(i), nu.point(j));
                relax(i, dist[v] + d, &mut dist, &mut queue);
            }
        }
    }
    Ok(DualPotential {
        source: dist[..m].to_vec(),
        target: dist[m..].to_vec(),
    })
}

/// Replaces `φ` by `f(z) = min_j (ψ_j + |z − y_j|)`, which is 1-Lipschitz everywhere and
/// keeps `K` when the input was dual feasible.
fn c_transform(phi: &DualPotential, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> DualPotential {
    let f = |z| {
        phi.target
            .iter()
            .zip(nu.atoms())
            .map(|(psi, a)| psi + distance(z, a.point))
            .fold(f64::INFINITY, f64::min)
    };
    DualPotential {
        source: mu.atoms().iter().map(|a| f(a.point)).collect(),
        target: nu.atoms().iter().map(|a| f(a.point)).collect(),
    }
}

/// A 1-Lipschitz potential certifying the optimality of a `p = 1` plan.
pub fn recover_dual(plan: &TransportPlan, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<DualPotential> {
    if plan.exponent != 1.0 {
        return Err(Error::UnsupportedExponent(plan.exponent));
    }
    if let Some(e) = plan
        .entries
        .iter()
        .find(|e| e.source >= mu.len() || e.target >= nu.len())
    {
        return Err(Error::Consistency(format!("plan entry {e:?} outside the measures")));
    }
    if mu.is_empty() && nu.is_empty() {
        return Ok(DualPotential {
            source: Vec::new(),
            target: Vec::new(),
        });
    }
    let raw = match &plan.duals {
        Some(d) if d.source.len() == mu.len() && d.target.len() == nu.len() && slackness_holds(d, plan, mu, nu) => {
            d.clone()
        }
        _ => potentials_from_plan(plan, mu, nu)?,
    };
    let phi = c_transform(&raw, mu, nu);
    if !slackness_holds(&phi, plan, mu, nu) {
        return Err(Error::Consistency(
            "recovered potential violates complementary slackness".into(),
        ));
    }
    let (excess, first, second) = worst_lipschitz_excess(&phi, mu, nu);
    if excess > DUAL_TOLERANCE {
        return Err(Error::InvalidPotential { excess, first, second });
    }
    let value = kantorovich_value(&phi, mu, nu);
    if (value - plan.cost).abs() > DUAL_TOLERANCE * plan.cost.abs().max(1.0) {
        return Err(Error::Consistency(format!(
            "dual value {value} differs from plan cost {}",
            plan.cost
        )));
    }
    Ok(phi)
}
