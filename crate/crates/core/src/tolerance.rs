use serde::{Deserialize, Serialize};

/// Residual ceiling for identities that are exact linear algebra.
pub const EXACT: f64 = 1e-10;
/// Ceiling for quantities involving one finite-difference derivative.
pub const SINGLE_FD: f64 = 1e-6;
/// Ceiling for quantities involving nested finite differences.
pub const NESTED_FD: f64 = 1e-4;

/// Numerical thresholds of the pointwise analysis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative singular-value cutoff for null spaces.
    pub rank: f64,
    /// Clustering width on `σ²` for the `D1`/`D2` split.
    pub cluster: f64,
    /// Allowed spread of `θ` across sample points.
    pub angle: f64,
    /// Ceiling on `‖(Jac·H)ᵀ(Jac·H) − I‖_F` for a Riemannian submersion.
    pub submersion: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rank: 1e-8,
            cluster: 1e-6,
            angle: 1e-8,
            submersion: 1e-8,
        }
    }
}

/// Base finite-difference step at a point: `1e-4·max(1, |p|)`.
pub fn fd_step(point_norm: f64) -> f64 {
    1e-4 * point_norm.max(1.0)
}

/// Outer step for a finite difference of a quantity that is itself a
/// finite difference.
pub fn nested_fd_step(point_norm: f64) -> f64 {
    1e-3 * point_norm.max(1.0)
}
