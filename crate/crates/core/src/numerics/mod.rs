//! Dense real-matrix kernels: symmetric and general eigenvalues, singular
//! values, Kronecker products, the matrix exponential, and Lyapunov/Riccati
//! solvers.

mod config;
mod eig;
mod expm;
mod matrix;
mod riccati;

pub use config::NumericsConfig;
pub use eig::{
    eigenvalues, singular_values, spectral_norm, sym_eig_extremes, sym_eig_extremes_with,
    sym_eigenvalues, sym_eigenvalues_with, SymmetricSpectrum,
};
pub use expm::expm;
pub use matrix::{kron, DenseMatrix, Lu};
pub use riccati::{
    care_residual, check_stabilizable, solve_care, solve_care_with, solve_lyapunov,
    solve_lyapunov_with, uncontrollable_unstable_mode, CareSolution,
};
