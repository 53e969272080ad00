//! Benchmark configurations with closed-form energies, all at `ε = 1`.
//!
//! Other values of `ε` are reached through [`Dilation`]: the map
//! `ũ(x) = λ u(λx)` sends a pair at `ε` to a pair at `ε/λ`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::invalid;
use crate::Result;

/// How every energy ingredient transforms under `ũ(x) = λ u(λx)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dilation {
    pub lambda: f64,
}

impl Dilation {
    pub fn new(lambda: f64) -> Result<Self> {
        if lambda > 0.0 && lambda.is_finite() {
            Ok(Self { lambda })
        } else {
            Err(invalid(format!("dilation factor must be positive, got {lambda}")))
        }
    }

    /// The dilation that maps a pair at `epsilon` to a pair at `ε = 1`.
    pub fn to_unit_epsilon(epsilon: f64) -> Result<Self> {
        Self::new(epsilon)
    }

    pub fn epsilon(&self, epsilon: f64) -> f64 {
        epsilon / self.lambda
    }

    pub fn mass(&self, mass: f64) -> f64 {
        mass / self.lambda
    }

    pub fn length(&self, length: f64) -> f64 {
        length / self.lambda
    }

    pub fn d1(&self, d1: f64) -> f64 {
        d1 / (self.lambda * self.lambda)
    }

    pub fn energy(&self, f: f64) -> f64 {
        f / self.lambda
    }

    pub fn rescaled_energy(&self, g: f64) -> f64 {
        g * self.lambda
    }

    pub fn inverse(&self) -> Self {
        Self {
            lambda: 1.0 / self.lambda,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StripConfig {
    pub thickness: f64,
    pub mass: f64,
}

/// `F₁ = (t/2 + 2/t) M + 2t` for a strip of thickness `t` and length `M/t` flanked by
/// two half-thickness `v` strips.
pub fn strip_energy(cfg: &StripConfig) -> f64 {
    let t = cfg.thickness;
    (t / 2.0 + 2.0 / t) * cfg.mass + 2.0 * t
}

/// Per-mass bulk factor `t/2 + 2/t` of the strip energy; minimal at `t = 2`.
pub fn strip_bulk_factor(thickness: f64) -> f64 {
    thickness / 2.0 + 2.0 / thickness
}

/// Minimizer `√(4M/(M + 4))` of [`strip_energy`] over the thickness at fixed mass.
///
/// The end term `2t` pulls it below 2; it tends to 2 as `M` grows.
pub fn strip_optimal_thickness(mass: f64) -> f64 {
    (4.0 * mass / (mass + 4.0)).sqrt()
}

/// An annular `u` band `r2 < r < r3` with `v` bands `r1 < r < r2` and `r3 < r < r4`.
///
/// Mass inside `split` moves inward, mass outside moves outward, radially.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RingConfig {
    pub split: f64,
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub r4: f64,
}

/// Ring of mean radius `r` and half-thickness `t` with optimal inner radii.
pub fn ring_radii(r: f64, t: f64) -> Result<RingConfig> {
    if !(t > 0.0 && t < r && r.is_finite()) {
        return Err(invalid(format!("ring needs 0 < t < R, got R = {r}, t = {t}")));
    }
    let r1 = r - t;
    let r4 = r + t;
    Ok(RingConfig {
        split: r,
        r1,
        r2: (0.5 * (r * r + r1 * r1)).sqrt(),
        r3: (0.5 * (r * r + r4 * r4)).sqrt(),
        r4,
    })
}

impl RingConfig {
    /// Ring with `u` on `inner < r < outer` split at `split`, with `v` bands sized so each
    /// side balances.
    pub fn from_band(split: f64, inner: f64, outer: f64) -> Result<Self> {
        if !(0.0 < inner && inner < split && split < outer) {
            return Err(invalid(format!(
                "ring band needs 0 < inner < split < outer, got {inner}, {split}, {outer}"
            )));
        }
        let r1_sq = 2.0 * inner * inner - split * split;
        if r1_sq < 0.0 {
            return Err(invalid("inner v band would cross the origin"));
        }
        Ok(Self {
            split,
            r1: r1_sq.sqrt(),
            r2: inner,
            r3: outer,
            r4: (2.0 * outer * outer - split * split).sqrt(),
        })
    }

    /// Mass of `u` (equal to that of `v`).
    pub fn mass(&self) -> f64 {
        PI * (self.r3 * self.r3 - self.r2 * self.r2)
    }

    /// Perimeter of the `u` band.
    pub fn interface(&self) -> f64 {
        2.0 * PI * (self.r2 + self.r3)
    }
}

/// Exact `d₁(u, v)` of the ring, inner plus outer radial transport.
pub fn ring_d1_exact(cfg: &RingConfig) -> f64 {
    let RingConfig { split, r1, r2, r3, r4 } = *cfg;
    let s3 = split.powi(3);
    let inner = s3 + r1.powi(3) - 2.0 * r2.powi(3);
    let outer = s3 + r4.powi(3) - 2.0 * r3.powi(3);
    2.0 * PI / 3.0 * (inner + outer)
}

/// `F₁ = d₁ + 2π(r2 + r3)`.
pub fn ring_energy_exact(cfg: &RingConfig) -> f64 {
    ring_d1_exact(cfg) + cfg.interface()
}

/// Large-`R` development `2 + (t − 2)²/4 + 1/(4R²)` of `F₁/M`.
pub fn ring_energy_asymptotic(r: f64, t: f64) -> f64 {
    2.0 + 0.25 * (t - 2.0).powi(2) + 0.25 / (r * r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscEnergy {
    pub d1: f64,
    pub interface: f64,
}

impl DiscEnergy {
    pub fn total(&self) -> f64 {
        self.d1 + self.interface
    }
}

/// `u` on the disc of radius `a = √(M/π)`, `v` on the annulus `a < r < a√2`, with
/// the radial transport that preserves `r²` order: `d₁ = (2π/3)(2^{3/2} − 2) a³`.
pub fn disc_energy(mass: f64) -> Result<DiscEnergy> {
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(invalid(format!("disc mass must be positive, got {mass}")));
    }
    let a = (mass / PI).sqrt();
    Ok(DiscEnergy {
        d1: 2.0 * PI / 3.0 * (2f64.powf(1.5) - 2.0) * a.powi(3),
        interface: 2.0 * PI * a,
    })
}
