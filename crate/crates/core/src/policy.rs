//! Numeric tolerances shared by every module.

use serde::{Deserialize, Serialize};

use crate::param::FdPolicy;

/// Every tolerance used in the pipeline, with its default.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NumericPolicy {
    /// Eigenvector condition number above which a matrix counts as defective.
    pub defect_threshold: f64,
    /// Relative Hermiticity tolerance: `‖G − G†‖_F ≤ tol · max(1, ‖G‖_F)`.
    pub hermitian_tol: f64,
    /// SLD entries with `p_i + p_j ≤ tol · Tr ρ` are set to zero.
    pub sld_kernel_tol: f64,
    /// Minimum eigenvalue of ρ at or below which right derivatives are refused.
    pub rank_gate: f64,
    /// Relative singular-value cutoff for `robust_inverse`.
    pub rank_tol: f64,
    /// `|det| < tol · scale^n` refuses inversion of a Fisher matrix.
    pub singular_det_tol: f64,
    /// Commutator expectations below `tol · scale` count as zero.
    pub attainability_tol: f64,
    /// Random draws with condition number above this are resampled.
    pub resample_condition: f64,
    /// Step for the nested overlap Hessian.
    pub hessian_step: f64,
    pub fd: FdPolicy,
}

impl Default for NumericPolicy {
    fn default() -> Self {
        Self {
            defect_threshold: 1e8,
            hermitian_tol: 1e-10,
            sld_kernel_tol: 1e-12,
            rank_gate: 1e-10,
            rank_tol: 1e-12,
            singular_det_tol: 1e-10,
            attainability_tol: 1e-8,
            resample_condition: 1e6,
            hessian_step: 1e-4,
            fd: FdPolicy::default(),
        }
    }
}
