//! Transport cost along a single ray.
//!
//! A ray leaves the boundary at angle β with the interface; neighbouring rays spread
//! at rate α′. With `ξ = 2α′εM / sin²β` the cost of moving mass `M` across the ray is
//!
//! ```text
//! C = sin³β / (3α′²ε) · Φ(ξ),    Φ(ξ) = (1+ξ)^{3/2} + (1−ξ)^{3/2} − 2
//!   = (4εM² / (3 sin β)) · Ψ(ξ), Ψ(ξ) = Φ(ξ)/ξ² = 3/4 + (3/64)ξ² + (7/512)ξ⁴ + …
//! ```
//!
//! Every coefficient of `Ψ` is positive, so truncations of the series are lower bounds.
//! Near `ξ = 0` the closed form cancels catastrophically; the series is used instead.
//!
//! A [`RayFrame`] holds everything the cost depends on, so the ray parametrization of
//! a transport problem never needs its own type: the 1-D problem along one ray is
//! [`crate::ot_solver::monotone_transport_1d`] applied to the density `m′(t)`.

use serde::{Deserialize, Serialize};

use crate::error::invalid;
use crate::{Error, Result};

/// Below this `|ξ|` the series is summed instead of the closed form.
const SERIES_LIMIT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RayFrame {
    pub sin_beta: f64,
    pub alpha_prime: f64,
    pub mass: f64,
    pub epsilon: f64,
}

impl RayFrame {
    pub fn new(sin_beta: f64, alpha_prime: f64, mass: f64, epsilon: f64) -> Result<Self> {
        let frame = Self {
            sin_beta,
            alpha_prime,
            mass,
            epsilon,
        };
        frame.validate()?;
        Ok(frame)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sin_beta > 0.0 && self.sin_beta <= 1.0) {
            return Err(invalid(format!("sin beta must lie in (0, 1], got {}", self.sin_beta)));
        }
        if !(self.mass > 0.0 && self.mass <= 1.0) {
            return Err(invalid(format!("ray mass must lie in (0, 1], got {}", self.mass)));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(invalid(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if !self.alpha_prime.is_finite() {
            return Err(invalid("alpha' must be finite"));
        }
        let xi = self.xi();
        if !(xi.abs() < 1.0) {
            return Err(Error::ExpansionDomain(xi.abs()));
        }
        Ok(())
    }

    /// `ξ = 2α′εM / sin²β`.
    pub fn xi(&self) -> f64 {
        2.0 * self.alpha_prime * self.epsilon * self.mass / (self.sin_beta * self.sin_beta)
    }

    fn discriminant(&self, m: f64) -> f64 {
        1.0 - 2.0 * self.alpha_prime * self.epsilon * m / (self.sin_beta * self.sin_beta)
    }
}

/// Mass between neighbouring rays from the boundary out to distance `t`.
pub fn mass_of_length(frame: &RayFrame, t: f64) -> Result<f64> {
    if !(frame.sin_beta - t * frame.alpha_prime > 0.0) {
        return Err(Error::OutOfRange { t });
    }
    Ok((t * frame.sin_beta - 0.5 * t * t * frame.alpha_prime) / frame.epsilon)
}

/// Inverse of [`mass_of_length`].
pub fn length_of_mass(frame: &RayFrame, m: f64) -> Result<f64> {
    let disc = frame.discriminant(m);
    if !(disc > 0.0) {
        return Err(Error::DegenerateRay(disc));
    }
    // rationalized form of sinβ/α′ · (1 − √disc); regular at α′ = 0
    Ok(2.0 * frame.epsilon * m / (frame.sin_beta * (1.0 + disc.sqrt())))
}

/// Generalized binomial coefficients `C(3/2, 2k)` for `k = 0, 1, 2, …`.
fn even_coefficients() -> impl Iterator<Item = f64> {
    let mut c = 1.0;
    let mut n = 0u32;
    std::iter::from_fn(move || {
        let out = c;
        for _ in 0..2 {
            c *= (1.5 - n as f64) / (n as f64 + 1.0);
            n += 1;
        }
        Some(out)
    })
}

/// `Σ_{k ≥ first} 2 C(3/2, 2k) ξ^{2k−2·first}`.
fn series_tail(xi: f64, first: usize) -> f64 {
    let x2 = xi * xi;
    let mut sum = 0.0;
    let mut power = 1.0;
    for c in even_coefficients().skip(first).take(400) {
        let term = 2.0 * c * power;
        sum += term;
        if term <= 1e-18 * sum {
            break;
        }
        power *= x2;
    }
    sum
}

fn phi(xi: f64) -> f64 {
    let x = xi.abs();
    (1.0 + x).powf(1.5) + (1.0 - x).powf(1.5) - 2.0
}

/// `Ψ(ξ) − 3/4`, accurate for small `ξ`.
fn psi_excess(xi: f64) -> f64 {
    if xi.abs() < SERIES_LIMIT {
        xi * xi * series_tail(xi, 2)
    } else {
        phi(xi) / (xi * xi) - 0.75
    }
}

/// `Ψ(ξ) − 3/4 − (3/64) ξ²`.
fn psi_remainder(xi: f64) -> f64 {
    if xi.abs() < SERIES_LIMIT {
        xi.powi(4) * series_tail(xi, 3)
    } else {
        phi(xi) / (xi * xi) - 0.75 - 3.0 / 64.0 * xi * xi
    }
}

fn leading(frame: &RayFrame) -> f64 {
    frame.epsilon * frame.mass * frame.mass / frame.sin_beta
}

/// Exact cost `∫₀^M [t(m) − t(m − M)] dm` of moving the ray's mass across the interface.
pub fn per_ray_cost_exact(frame: &RayFrame) -> Result<f64> {
    frame.validate()?;
    let lead = leading(frame);
    Ok(lead + lead * (4.0 / 3.0) * psi_excess(frame.xi()))
}

/// [`per_ray_cost_exact`] minus its leading term `εM²/sin β`, without cancellation.
pub fn per_ray_cost_excess(frame: &RayFrame) -> Result<f64> {
    frame.validate()?;
    Ok(leading(frame) * (4.0 / 3.0) * psi_excess(frame.xi()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostSeries {
    /// `εM²/sin β`
    pub leading: f64,
    /// `ε³α′²M⁴ / (4 sin⁵β)`
    pub bending: f64,
    /// `(7/9) M⁶ α′⁴ ε⁵ / sin⁹β`, an upper bound for `exact − leading − bending`.
    pub remainder_bound: f64,
    /// `exact − leading − bending`, summed from the series tail.
    pub remainder: f64,
}

/// Two-term expansion of the per-ray cost with an explicit remainder bound.
pub fn per_ray_cost_series(frame: &RayFrame) -> Result<CostSeries> {
    frame.validate()?;
    let RayFrame {
        sin_beta: s,
        alpha_prime: a,
        mass: m,
        epsilon: e,
    } = *frame;
    let lead = leading(frame);
    let bending = e.powi(3) * a * a * m.powi(4) / (4.0 * s.powi(5));
    let remainder_bound = 7.0 / 9.0 * m.powi(6) * a.powi(4) * e.powi(5) / s.powi(9);
    let remainder = lead * (4.0 / 3.0) * psi_remainder(frame.xi());
    debug_assert!(remainder >= 0.0);
    Ok(CostSeries {
        leading: lead,
        bending,
        remainder_bound,
        remainder,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundTerms {
    /// `(M − 1)² / ε²`
    pub thickness_penalty: f64,
    /// `(1/sin β − 1) M² / ε²`
    pub angle_penalty: f64,
    /// `(M / sin β)⁴ α′² / (4 sin β)`
    pub bending_term: f64,
}

/// Per-ray integrand of the lower bound on the rescaled energy.
pub fn lower_bound_integrand(frame: &RayFrame) -> LowerBoundTerms {
    let RayFrame {
        sin_beta: s,
        alpha_prime: a,
        mass: m,
        epsilon: e,
    } = *frame;
    LowerBoundTerms {
        thickness_penalty: (m - 1.0).powi(2) / (e * e),
        angle_penalty: (1.0 / s - 1.0) * m * m / (e * e),
        bending_term: (m / s).powi(4) * a * a / (4.0 * s),
    }
}
