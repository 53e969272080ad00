//! One runner per experiment kind. Rows are computed in parallel and returned in
//! parameter order; invariant violations are collected rather than raised.

pub mod convergence;
pub mod grid;
pub mod ring;
pub mod scaling;

use serde::Serialize;

/// Rows of one experiment plus summary lines and failed invariants.
#[derive(Debug, Clone)]
pub struct Outcome<R> {
    pub rows: Vec<R>,
    pub summary: Vec<String>,
    pub violations: Vec<String>,
}

/// Type-erased outcome, ready to be written.
pub trait Table {
    fn write_csv(&self, writer: &mut csv::Writer<Box<dyn std::io::Write>>) -> csv::Result<()>;
    fn summary(&self) -> &[String];
    fn violations(&self) -> &[String];
}

impl<R: Serialize> Table for Outcome<R> {
    fn write_csv(&self, writer: &mut csv::Writer<Box<dyn std::io::Write>>) -> csv::Result<()> {
        for row in &self.rows {
            writer.serialize(row)?;
        }
        writer.flush()?;
        Ok(())
    }

    fn summary(&self) -> &[String] {
        &self.summary
    }

    fn violations(&self) -> &[String] {
        &self.violations
    }
}

/// `(F − 2M)/ε²` from the values stored in a row.
pub fn rescaled(f: f64, mass: f64, epsilon: f64) -> f64 {
    (f - 2.0 * mass) / (epsilon * epsilon)
}

/// Error text of a failed row computation.
fn row_error<T>(r: &bilayer_core::Result<T>) -> Option<String> {
    r.as_ref().err().map(|e| e.to_string())
}

/// Records a violation for every non-finite value among `values`.
fn check_finite(violations: &mut Vec<String>, index: usize, values: &[(&str, Option<f64>)]) {
    for (name, value) in values {
        if let Some(v) = value {
            if !v.is_finite() {
                violations.push(format!("row {index}: {name} = {v} is not finite"));
            }
        }
    }
}
