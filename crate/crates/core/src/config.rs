//! Numerical tolerances shared by the validation checks.

/// Tolerances for exact identities and for iterative or eigen results.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Identities that hold up to floating point roundoff.
    pub exact: f64,
    /// Results of iterative solvers and eigendecompositions.
    pub iterative: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            exact: 1e-12,
            iterative: 1e-8,
        }
    }
}
