//! Built-in oracle suite run by `--check`: quick checks of each core module against
//! values computed here independently.

use std::f64::consts::PI;

use bilayer_core::closed_forms::{disc_energy, ring_energy_exact, strip_energy, RingConfig, StripConfig};
use bilayer_core::curve_kit::shapes::CurveShape;
use bilayer_core::curve_kit::{elastica_energy, CurveSystem};
use bilayer_core::numeric::fit_loglog_slope;
use bilayer_core::ot_solver::{
    duality_check, monotone_transport_1d, recover_dual, solve_transport, Density1d, DiscreteMeasure, Orientation,
};
use bilayer_core::ray_calculus::{per_ray_cost_exact, RayFrame};
use bilayer_core::recovery_builder::recovery_energy_semianalytic;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn strip() -> bilayer_core::Result<(bool, String)> {
    let ok = [1.0, 10.0, 100.0].iter().all(|&m| {
        strip_energy(&StripConfig {
            thickness: 2.0,
            mass: m,
        }) == 2.0 * m + 4.0
    });
    Ok((ok, "F1 = 2M + 4 at t = 2".into()))
}

fn disc() -> bilayer_core::Result<(bool, String)> {
    let masses = [1e2, 1e3, 1e4];
    let d1: Vec<f64> = masses
        .iter()
        .map(|&m| disc_energy(m).map(|d| d.d1))
        .collect::<bilayer_core::Result<_>>()?;
    let slope = fit_loglog_slope(&masses, &d1);
    Ok(((slope - 1.5).abs() <= 1e-6, format!("d1 exponent {slope:.9}")))
}

/// Simpson's rule on `∫₀^M [t(m) − t(m − M)] dm` with `t(m) = (1 − √(1 − 2α′εm))/α′`.
fn per_ray_simpson(alpha: f64, epsilon: f64) -> f64 {
    let t = |m: f64| (1.0 - (1.0 - 2.0 * alpha * epsilon * m).sqrt()) / alpha;
    let n = 4000;
    let h = 1.0 / n as f64;
    let g = |m: f64| t(m) - t(m - 1.0);
    let inner: f64 = (1..n)
        .map(|k| if k % 2 == 1 { 4.0 } else { 2.0 } * g(k as f64 * h))
        .sum();
    (g(0.0) + g(1.0) + inner) * h / 3.0
}

fn per_ray() -> bilayer_core::Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for (alpha, eps) in [(0.5, 0.1), (-2.0, 0.05), (3.0, 0.1)] {
        let exact = per_ray_cost_exact(&RayFrame::new(1.0, alpha, 1.0, eps)?)?;
        worst = worst.max(relative(exact, per_ray_simpson(alpha, eps)));
    }
    Ok((
        worst <= 1e-10,
        format!("worst relative deviation from Simpson {worst:.2e}"),
    ))
}

fn transport() -> bilayer_core::Result<(bool, String)> {
    let mu = DiscreteMeasure::from_points(&[[0.0, 0.0], [1.0, 0.0]], 1.0)?;
    let nu = DiscreteMeasure::from_points(&[[3.0, 0.0], [4.0, 0.0]], 1.0)?;
    let plan = solve_transport(&mu, &nu, 1.0)?;
    let gap = duality_check(&recover_dual(&plan, &mu, &nu)?, &mu, &nu, plan.cost)?;
    Ok((
        (plan.cost - 6.0).abs() <= 1e-12 && gap.abs() <= 1e-9,
        format!("cost {} (exact 6), duality gap {gap:.1e}", plan.cost),
    ))
}

fn monotone() -> bilayer_core::Result<(bool, String)> {
    let plus = Density1d::new(0.0, 0.25, vec![1.0; 4])?;
    let minus = Density1d::new(-1.0, 0.25, vec![1.0; 4])?;
    let cost = monotone_transport_1d(&plus, &minus, Orientation::Nondecreasing)?.cost;
    Ok(((cost - 1.0).abs() <= 1e-12, format!("shift cost {cost} (exact 1)")))
}

fn elastica() -> bilayer_core::Result<(bool, String)> {
    let w = elastica_energy(&CurveSystem::new(
        vec![CurveShape::Circle { radius: 2.0 }.sample(1024)?],
    ))?;
    // Menger curvature is exact on a regular polygon inscribed in the circle
    let exact = PI / 2.0 * 1024.0 * (PI / 1024.0).sin() / PI;
    Ok((
        relative(w, exact) <= 1e-12,
        format!("W = {w:.12} on a circle of radius 2"),
    ))
}

fn circle_ring() -> bilayer_core::Result<(bool, String)> {
    let curve = CurveShape::Circle { radius: 1.0 }.sample(4096)?;
    let mut worst: f64 = 0.0;
    for eps in [0.1, 0.05] {
        let semi = recovery_energy_semianalytic(&curve, eps)?;
        let h = curve.length() / (2.0 * PI);
        let rho = h / eps;
        let ring = RingConfig::from_band((rho * rho - 1.0).sqrt(), rho - 1.0, rho + 1.0)?;
        let g_ring = (ring_energy_exact(&ring) - 2.0 * ring.mass()) / eps;
        worst = worst.max(relative(semi.g, g_ring));
    }
    Ok((worst <= 1e-6, format!("worst relative deviation {worst:.2e}")))
}

type Check = fn() -> bilayer_core::Result<(bool, String)>;

/// Runs every check; failures are reported, not raised.
pub fn run_oracle_suite() -> Vec<CheckResult> {
    let checks: [(&'static str, Check); 7] = [
        ("strip energy", strip),
        ("disc scaling", disc),
        ("per-ray closed form", per_ray),
        ("transport and duality", transport),
        ("monotone 1-D map", monotone),
        ("circle elastica", elastica),
        ("circle recovery vs ring", circle_ring),
    ];
    checks
        .iter()
        .map(|&(name, f)| match f() {
            Ok((passed, detail)) => CheckResult { name, passed, detail },
            Err(e) => CheckResult {
                name,
                passed: false,
                detail: format!("error: {e}"),
            },
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_suite_passes() {
        for r in run_oracle_suite() {
            assert!(r.passed, "{}: {}", r.name, r.detail);
        }
    }
}
