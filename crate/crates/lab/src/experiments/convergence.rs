//! `G_ε` of the recovery pair against `W` along a ladder of ε.

use bilayer_core::curve_kit::{elastica_energy, CurveSystem};
use bilayer_core::numeric::fit_loglog_slope;
use bilayer_core::recovery_builder::{admissible_epsilon, recovery_energy_semianalytic, RecoveryEnergy};
use rayon::prelude::*;
use serde::Serialize;

use super::{check_finite, rescaled, row_error, Outcome};
use crate::config::ConvergenceConfig;
use crate::Result;
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub index: usize,
    pub epsilon: f64,
    pub epsilon0: f64,
    pub length: f64,
    /// `2L`
    pub mass: Option<f64>,
    pub interface: Option<f64>,
    pub d1: Option<f64>,
    pub f: Option<f64>,
    /// `(f − 2·mass)/ε²`
    pub g: Option<f64>,
    pub w: f64,
    /// `g − w`
    pub gap: Option<f64>,
    /// `log(gap_prev/gap) / log(ε_prev/ε)` against the previous successful row.
    pub order: Option<f64>,
    pub error: Option<String>,
}

/// `G ≥ W` on every admissible row, and the gap shrinking with ε.
pub fn gap_violations(rows: &[ConvergenceRow]) -> Vec<String> {
    let mut violations = Vec::new();
    let mut ok: Vec<(f64, f64, usize)> = rows
        .iter()
        .filter_map(|r| r.gap.map(|g| (r.epsilon, g, r.index)))
        .collect();
    for &(eps, gap, index) in &ok {
        if gap < 0.0 {
            violations.push(format!("row {index}: G below W at epsilon {eps}"));
        }
    }
    ok.sort_by(|a, b| b.0.total_cmp(&a.0));
    for pair in ok.windows(2) {
        let ((e0, g0, _), (e1, g1, _)) = (pair[0], pair[1]);
        if e1 < e0 && g1 >= g0 {
            violations.push(format!("gap does not shrink from epsilon {e0} to {e1}"));
        }
    }
    violations
}

pub fn run(cfg: &ConvergenceConfig, base: &Path) -> Result<Outcome<ConvergenceRow>> {
    let curve = cfg.curve.build(cfg.samples, base)?;
    let w = elastica_energy(&CurveSystem::new(vec![curve.clone()]))?;
    let epsilon0 = admissible_epsilon(&curve)?;
    let length = curve.length();
    let energies: Vec<bilayer_core::Result<RecoveryEnergy>> = cfg
        .epsilons
        .par_iter()
        .map(|&eps| recovery_energy_semianalytic(&curve, eps))
        .collect();

    let mut rows = Vec::with_capacity(energies.len());
    let mut previous: Option<(f64, f64)> = None;
    for (index, (&epsilon, energy)) in cfg.epsilons.iter().zip(&energies).enumerate() {
        let mut row = ConvergenceRow {
            index,
            epsilon,
            epsilon0,
            length,
            mass: None,
            interface: None,
            d1: None,
            f: None,
            g: None,
            w,
            gap: None,
            order: None,
            error: row_error(energy),
        };
        if let Ok(e) = energy {
            let g = rescaled(e.f, e.mass, epsilon);
            let gap = g - w;
            row.mass = Some(e.mass);
            row.interface = Some(e.interface);
            row.d1 = Some(e.d1);
            row.f = Some(e.f);
            row.g = Some(g);
            row.gap = Some(gap);
            row.order = previous.map(|(pe, pg)| (pg / gap).ln() / (pe / epsilon).ln());
            previous = Some((epsilon, gap));
        }
        rows.push(row);
    }

    let mut violations = gap_violations(&rows);
    for r in &rows {
        check_finite(
            &mut violations,
            r.index,
            &[("g", r.g), ("f", r.f), ("d1", r.d1), ("order", r.order)],
        );
    }
    let ok: Vec<&ConvergenceRow> = rows.iter().filter(|r| r.error.is_none()).collect();

    let mut summary = vec![format!(
        "W = {w:.12}, epsilon0 = {epsilon0:.6}, {} of {} rows admissible",
        ok.len(),
        rows.len()
    )];
    if ok.len() >= 2 {
        let eps: Vec<f64> = ok.iter().map(|r| r.epsilon).collect();
        let gaps: Vec<f64> = ok.iter().filter_map(|r| r.gap).collect();
        if gaps.iter().all(|&g| g > 0.0) {
            summary.push(format!(
                "fitted order of G - W in epsilon: {:.4}",
                fit_loglog_slope(&eps, &gaps)
            ));
        }
    }
    Ok(Outcome {
        rows,
        summary,
        violations,
    })
}
