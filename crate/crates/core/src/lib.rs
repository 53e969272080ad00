//! Numerical laboratory for the partial-localization energy of lipid-bilayer-like
//! density pairs.
//!
//! For two-valued densities `u, v` with values in `{0, 1/ε}`, disjoint supports and
//! equal mass `M`, the energy is
//!
//! ```text
//! F_ε(u, v) = ε ∫|∇u| + (1/ε) d₁(u, v),      G_ε(u, v) = (F_ε(u, v) − 2M) / ε²
//! ```
//!
//! where `d₁` is the Monge–Kantorovich (1-Wasserstein) distance. Thin structures of
//! thickness `2ε` around a closed curve have `G_ε` close to the elastica energy
//! `½∮κ² ds` of that curve. The modules below provide the pieces needed to check this
//! numerically:
//!
//! | module | contents |
//! |--------|----------|
//! | [`density_field`] | grid fields, admissibility, mass and perimeter |
//! | [`ot_solver`] | exact discrete transport (network simplex), duals, 1-D monotone maps |
//! | [`curve_kit`] | closed polylines, Menger curvature, elastica energy, offsets |
//! | [`ray_calculus`] | closed-form transport cost along a single transport ray |
//! | [`closed_forms`] | strip, disc and ring benchmark energies |
//! | [`recovery_builder`] | explicit recovery pairs around a curve and their energies |

pub mod closed_forms;
pub mod curve_kit;
pub mod density_field;
mod error;
pub mod numeric;
pub mod ot_solver;
pub mod ray_calculus;
pub mod recovery_builder;

pub use error::{Error, Result};

/// A point (or vector) in the plane.
pub type Point = [f64; 2];
