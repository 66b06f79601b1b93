/// Tolerances used by the numerical kernels.
///
/// Defaults are the normative values; callers may override them through the
/// `*_with` variants of each routine. Values are stated for `f64` and clamped
/// to a few machine epsilons when running in `f32`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericsConfig {
    /// Relative asymmetry accepted for "symmetric" input.
    pub symmetry_tol: f64,
    /// Jacobi stops when the off-diagonal Frobenius norm drops below this times `‖S‖_F`.
    pub jacobi_off_tol: f64,
    /// Singular values below this times `σ_max` count as zero in rank tests.
    pub rank_rel_tol: f64,
    /// Lyapunov residual bound, relative to `1 + ‖Q‖_F`.
    pub lyapunov_residual_tol: f64,
    /// Riccati residual bound, relative to `1 + ‖P‖_F²`.
    pub care_residual_tol: f64,
    /// Convergence threshold of the matrix-sign Newton iteration.
    pub sign_tol: f64,
    pub sign_max_iterations: usize,
    /// Newton–Kleinman refinement steps applied after the sign iteration.
    pub kleinman_steps: usize,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        Self {
            symmetry_tol: 1e-12,
            jacobi_off_tol: 1e-14,
            rank_rel_tol: 1e-9,
            lyapunov_residual_tol: 1e-10,
            care_residual_tol: 1e-9,
            sign_tol: 1e-13,
            sign_max_iterations: 100,
            kleinman_steps: 1,
        }
    }
}
