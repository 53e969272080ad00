//! Disc versus strip energies over a ladder of masses.

use bilayer_core::closed_forms::{disc_energy, strip_energy, strip_optimal_thickness, StripConfig};
use bilayer_core::numeric::fit_loglog_slope;
use rayon::prelude::*;
use serde::Serialize;

use super::{check_finite, Outcome};
use crate::config::ScalingConfig;
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRow {
    pub index: usize,
    pub mass: f64,
    pub disc_d1: f64,
    pub disc_interface: f64,
    pub disc_f: f64,
    /// Local log-log slope of `disc_d1` against the previous row.
    pub disc_d1_exponent: Option<f64>,
    pub strip_thickness: f64,
    pub strip_f: f64,
    /// Local log-log slope of `strip_f` against the previous row.
    pub strip_exponent: Option<f64>,
    pub strip_below_disc: bool,
}

fn energies(mass: f64) -> bilayer_core::Result<(f64, f64, f64, f64)> {
    let disc = disc_energy(mass)?;
    let thickness = strip_optimal_thickness(mass);
    Ok((
        disc.d1,
        disc.interface,
        thickness,
        strip_energy(&StripConfig { thickness, mass }),
    ))
}

/// Strip minus disc energy at mass `m`.
fn advantage(m: f64) -> f64 {
    let disc = disc_energy(m).map(|d| d.total()).unwrap_or(f64::NAN);
    strip_energy(&StripConfig {
        thickness: strip_optimal_thickness(m),
        mass: m,
    }) - disc
}

/// Mass in `[lo, hi]` where strip and disc energies coincide, by bisection in `log M`.
fn crossover(lo: f64, hi: f64) -> f64 {
    let (mut a, mut b) = (lo.ln(), hi.ln());
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if advantage(mid.exp()) < 0.0 {
            b = mid;
        } else {
            a = mid;
        }
    }
    (0.5 * (a + b)).exp()
}

pub fn run(cfg: &ScalingConfig) -> Result<Outcome<ScalingRow>> {
    let values: Vec<(f64, f64, f64, f64)> = cfg
        .masses
        .par_iter()
        .map(|&m| energies(m))
        .collect::<bilayer_core::Result<_>>()?;
    let mut rows: Vec<ScalingRow> = Vec::with_capacity(values.len());
    for (index, (&mass, &(disc_d1, disc_interface, strip_thickness, strip_f))) in
        cfg.masses.iter().zip(&values).enumerate()
    {
        let slope = |y0: f64, y1: f64, m0: f64| (y1 / y0).ln() / (mass / m0).ln();
        let previous = rows.last();
        let disc_f = disc_d1 + disc_interface;
        rows.push(ScalingRow {
            index,
            mass,
            disc_d1,
            disc_interface,
            disc_f,
            disc_d1_exponent: previous
                .filter(|p| p.mass != mass)
                .map(|p| slope(p.disc_d1, disc_d1, p.mass)),
            strip_thickness,
            strip_f,
            strip_exponent: previous
                .filter(|p| p.mass != mass)
                .map(|p| slope(p.strip_f, strip_f, p.mass)),
            strip_below_disc: strip_f < disc_f,
        });
    }

    let mut violations = Vec::new();
    for r in &rows {
        check_finite(
            &mut violations,
            r.index,
            &[
                ("disc_d1_exponent", r.disc_d1_exponent),
                ("strip_exponent", r.strip_exponent),
            ],
        );
    }
    let mut summary = Vec::new();
    let masses: Vec<f64> = rows.iter().map(|r| r.mass).collect();
    if masses.iter().any(|&m| m != masses[0]) {
        let disc: Vec<f64> = rows.iter().map(|r| r.disc_d1).collect();
        let strip: Vec<f64> = rows.iter().map(|r| r.strip_f).collect();
        let disc_exponent = fit_loglog_slope(&masses, &disc);
        if (disc_exponent - 1.5).abs() > 1e-6 {
            violations.push(format!("disc d1 exponent {disc_exponent} differs from 1.5"));
        }
        summary.push(format!("disc d1 exponent {disc_exponent:.9}"));
        summary.push(format!(
            "strip energy exponent {:.6}",
            fit_loglog_slope(&masses, &strip)
        ));
    }
    match rows.iter().position(|r| r.strip_below_disc) {
        Some(k) => {
            let mut line = format!("strip first below disc at ladder mass {}", rows[k].mass);
            if k > 0 && !rows[k - 1].strip_below_disc && rows[k - 1].mass < rows[k].mass {
                line.push_str(&format!(
                    "; energies cross at M = {:.9}",
                    crossover(rows[k - 1].mass, rows[k].mass)
                ));
            }
            summary.push(line);
        }
        None => summary.push("strip never below disc on this ladder".into()),
    }
    Ok(Outcome {
        rows,
        summary,
        violations,
    })
}
