//! Verifier report types. All reports serialize to JSON with a stable field
//! order so that fixed-seed runs are byte-identical.

use serde::{Deserialize, Serialize};

/// Outcome of checking one asserted identity over a sample set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdentityReport {
    pub identity: String,
    pub worst_point: Vec<f64>,
    pub worst_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl IdentityReport {
    pub fn new(identity: &str, worst_point: Vec<f64>, worst_error: f64, tolerance: f64) -> Self {
        Self {
            identity: identity.to_string(),
            worst_point,
            worst_error,
            tolerance,
            pass: worst_error <= tolerance,
        }
    }
}

/// Worst-point report for the structural inequality
/// |δω|² + |dω|² ≤ C·|ω|².
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResidualReport {
    pub constant: f64,
    pub max_residual: f64,
    pub worst_point: Vec<f64>,
    pub tolerance: f64,
    pub satisfied: bool,
}

/// Split residuals for the harmonicity conditions dγ = 0 and δγ = 0.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HarmonicityReport {
    pub max_d_norm: f64,
    pub worst_d_point: Vec<f64>,
    pub max_delta_norm: f64,
    pub worst_delta_point: Vec<f64>,
}
