//! Numerical tolerances shared across the crate (absolute, max-norm unless
//! noted otherwise).

/// Hermiticity check `‖m − m†‖_max`.
pub const TAU_HERM: f64 = 1e-12;
/// Eigen-residuals, orthonormality, algebraic identities at dimension 2/4.
pub const TAU_EIG: f64 = 1e-12;
/// Matrix exponential accuracy for `‖m‖t ≤ 100`.
pub const TAU_EXP: f64 = 1e-10;
/// `|det|` below which a 2×2 matrix is treated as singular.
pub const TAU_SING: f64 = 1e-14;

/// Normalization and trace checks on states and density matrices.
pub const TAU_NORM: f64 = 1e-10;
/// Quadrature cross-checks of analytic time averages.
pub const TAU_QUAD: f64 = 1e-8;
/// Threshold for `Im(AB*)` / `Im(cd*)` being non-zero.
pub const TAU_GEN: f64 = 1e-12;

/// Relative tolerance for matching a curve against its shift.
pub const TAU_PER: f64 = 1e-7;
/// Product-state test `|AB| ≤ τ (|A|² + |B|²)`.
pub const TAU_ENT: f64 = 1e-10;

/// Central finite-difference step.
pub const H_FD: f64 = 1e-5;
/// Finite-difference verification tolerance.
pub const TAU_FD: f64 = 1e-6;
/// Unitary ODE integration tolerance.
pub const TAU_ODE: f64 = 1e-8;
/// Default ODE step.
pub const H_ODE: f64 = 1e-3;

/// Minimum number of Simpson panels per period.
pub const SIMPSON_PANELS: usize = 2048;
