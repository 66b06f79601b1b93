//! Lyapunov and continuous algebraic Riccati solvers, plus the PBH
//! stabilizability test the Riccati solver relies on.

use num_complex::Complex;

use super::config::NumericsConfig;
use super::eig::{eigenvalues, singular_values, sym_eig_extremes_with};
use super::matrix::DenseMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Stabilizing solution of `PA + AᵀP − μ₁PBBᵀP + μ₂I = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CareSolution<T> {
    pub p: DenseMatrix<T>,
    /// Frobenius norm of the Riccati residual at `p`.
    pub residual_norm: T,
}

/// Solves `MᵀX + XM + Q = 0` through the Kronecker-vectorized `n² × n²` system.
pub fn solve_lyapunov<T: Real>(m: &DenseMatrix<T>, q: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    solve_lyapunov_with(m, q, &NumericsConfig::default())
}

pub fn solve_lyapunov_with<T: Real>(
    m: &DenseMatrix<T>,
    q: &DenseMatrix<T>,
    cfg: &NumericsConfig,
) -> Result<DenseMatrix<T>> {
    let n = m.rows();
    if !m.is_square() || q.shape() != (n, n) {
        return Err(Error::InvalidMatrix(format!(
            "Lyapunov operands must be square and conformable: M {:?}, Q {:?}",
            m.shape(),
            q.shape()
        )));
    }
    if q.asymmetry() > T::tol(cfg.symmetry_tol, 16.0) {
        return Err(Error::InvalidMatrix("Lyapunov right-hand side is not symmetric".into()));
    }
    // Row-major vec: unknown (i, j) lives at i * n + j.
    let mut lhs = DenseMatrix::zeros(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            let row = i * n + j;
            for k in 0..n {
                lhs[(row, k * n + j)] = lhs[(row, k * n + j)] + m[(k, i)];
                lhs[(row, i * n + k)] = lhs[(row, i * n + k)] + m[(k, j)];
            }
        }
    }
    let rhs: Vec<T> = q.as_slice().iter().map(|&v| -v).collect();
    let lu = lhs.lu().map_err(|_| Error::LyapunovSingular)?;
    let x = DenseMatrix::from_row_major(n, n, lu.solve_vec(&rhs))
        .map_err(|_| Error::LyapunovSingular)?
        .symmetrized();
    let residual = lyapunov_residual(m, &x, q).frobenius_norm();
    let bound = T::tol(cfg.lyapunov_residual_tol, 1e3) * (T::one() + q.frobenius_norm());
    if residual > bound * (T::one() + x.frobenius_norm()) {
        return Err(Error::LyapunovSingular);
    }
    Ok(x)
}

fn lyapunov_residual<T: Real>(
    m: &DenseMatrix<T>,
    x: &DenseMatrix<T>,
    q: &DenseMatrix<T>,
) -> DenseMatrix<T> {
    &(&(&m.transpose() * x) + &(x * m)) + q
}

/// Riccati residual `PA + AᵀP − μ₁PBBᵀP + μ₂I`.
pub fn care_residual<T: Real>(
    a: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
    mu1: T,
    mu2: T,
    p: &DenseMatrix<T>,
) -> DenseMatrix<T> {
    let s = (b * &b.transpose()).scale(mu1);
    let n = a.rows();
    &(&(&(p * a) + &(&a.transpose() * p)) - &(&(p * &s) * p)) + &DenseMatrix::identity(n).scale(mu2)
}

/// PBH test: every eigenvalue `λ` of `A` with `Re λ ≥ 0` has `rank [A − λI, B] = n`.
pub fn check_stabilizable<T: Real>(a: &DenseMatrix<T>, b: &DenseMatrix<T>) -> Result<bool> {
    uncontrollable_unstable_mode(a, b, &NumericsConfig::default()).map(|m| m.is_none())
}

/// The first unstable eigenvalue failing the PBH rank test, if any.
pub fn uncontrollable_unstable_mode<T: Real>(
    a: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
    cfg: &NumericsConfig,
) -> Result<Option<Complex<T>>> {
    let n = a.rows();
    if !a.is_square() || b.rows() != n {
        return Err(Error::InvalidMatrix(format!(
            "stabilizability needs A n×n and B n×m, got A {:?}, B {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let m = b.cols();
    // eigenvalues on the imaginary axis come back with rounding-level real parts
    let margin = T::tol(1e-10, 64.0) * a.max_abs().max(T::one());
    for lambda in eigenvalues(a)? {
        if lambda.re < -margin {
            continue;
        }
        // real embedding [[Re, −Im], [Im, Re]] of the complex PBH matrix doubles every singular value
        let mut emb = DenseMatrix::zeros(2 * n, 2 * (n + m));
        for i in 0..n {
            for j in 0..n {
                let re = a[(i, j)] - if i == j { lambda.re } else { T::zero() };
                let im = if i == j { -lambda.im } else { T::zero() };
                emb[(i, j)] = re;
                emb[(i, n + m + j)] = -im;
                emb[(n + i, j)] = im;
                emb[(n + i, n + m + j)] = re;
            }
            for j in 0..m {
                emb[(i, n + j)] = b[(i, j)];
                emb[(n + i, n + m + n + j)] = b[(i, j)];
            }
        }
        let sv = singular_values(&emb)?;
        let cutoff = T::tol(cfg.rank_rel_tol, 64.0) * sv[0];
        let rank2 = sv.iter().filter(|&&s| s > cutoff && s > T::zero()).count();
        if rank2 < 2 * n {
            return Ok(Some(lambda));
        }
    }
    Ok(None)
}

/// Solves `PA + AᵀP − μ₁PBBᵀP + μ₂I = 0` for the unique positive-definite `P`.
pub fn solve_care<T: Real>(
    a: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
    mu1: T,
    mu2: T,
) -> Result<CareSolution<T>> {
    solve_care_with(a, b, mu1, mu2, &NumericsConfig::default())
}

/// Matrix-sign Newton iteration on the Hamiltonian with determinant scaling,
/// followed by Newton–Kleinman refinement.
pub fn solve_care_with<T: Real>(
    a: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
    mu1: T,
    mu2: T,
    cfg: &NumericsConfig,
) -> Result<CareSolution<T>> {
    if !(mu1 > T::zero() && mu2 > T::zero()) {
        return Err(Error::CareFailure(format!(
            "mu1 and mu2 must be positive, got {mu1} and {mu2}"
        )));
    }
    if let Some(mode) = uncontrollable_unstable_mode(a, b, cfg)? {
        return Err(Error::NotStabilizable {
            re: mode.re.as_f64(),
            im: mode.im.as_f64(),
        });
    }
    let n = a.rows();
    let s = (b * &b.transpose()).scale(mu1);
    let q = DenseMatrix::identity(n).scale(mu2);

    let mut ham = DenseMatrix::zeros(2 * n, 2 * n);
    ham.set_block(0, 0, a);
    ham.set_block(0, n, &-&s);
    ham.set_block(n, 0, &-&q);
    ham.set_block(n, n, &-&a.transpose());

    let w = matrix_sign(&ham, cfg)?;
    let id = DenseMatrix::identity(n);
    // stable invariant subspace span[I; P] is the −1 eigenspace of sign(H): (W + I)[I; P] = 0
    let lhs = DenseMatrix::vstack(&w.block(0, n, n, n), &(&w.block(n, n, n, n) + &id));
    let rhs = -&DenseMatrix::vstack(&(&w.block(0, 0, n, n) + &id), &w.block(n, 0, n, n));
    let lhs_t = lhs.transpose();
    let mut p = (&lhs_t * &lhs)
        .solve(&(&lhs_t * &rhs))
        .map_err(|_| Error::CareFailure("sign-function subspace is rank deficient".into()))?
        .symmetrized();

    for _ in 0..cfg.kleinman_steps {
        let closed = a - &(&s * &p);
        let forcing = &q + &(&(&p * &s) * &p);
        p = solve_lyapunov_with(&closed, &forcing.symmetrized(), cfg)
            .map_err(|e| Error::CareFailure(format!("Kleinman refinement: {e}")))?;
    }

    let residual_norm = care_residual(a, b, mu1, mu2, &p).frobenius_norm();
    let pf = p.frobenius_norm();
    if residual_norm > T::tol(cfg.care_residual_tol, 1e3) * (T::one() + pf * pf) {
        return Err(Error::CareFailure(format!(
            "residual {:.3e} above tolerance",
            residual_norm.as_f64()
        )));
    }
    let spectrum = sym_eig_extremes_with(&p, cfg)?;
    if spectrum.lambda_min <= T::zero() {
        return Err(Error::CareFailure("solution is not positive definite".into()));
    }
    let closed = a - &(&s * &p);
    if eigenvalues(&closed)?.iter().any(|z| z.re >= T::zero()) {
        return Err(Error::CareFailure("closed loop A − μ₁BBᵀP is not Hurwitz".into()));
    }
    Ok(CareSolution { p, residual_norm })
}

fn matrix_sign<T: Real>(h: &DenseMatrix<T>, cfg: &NumericsConfig) -> Result<DenseMatrix<T>> {
    let dim = T::from_count(h.rows());
    let half = T::lit(0.5);
    let tol = T::tol(cfg.sign_tol, 100.0);
    let mut z = h.clone();
    let mut scaling = true;
    for _ in 0..cfg.sign_max_iterations {
        let lu = z
            .lu()
            .map_err(|_| Error::CareFailure("Hamiltonian has eigenvalues on the imaginary axis".into()))?;
        let inv = lu.inverse()?;
        let c = if scaling {
            (-lu.log_abs_determinant() / dim).exp()
        } else {
            T::one()
        };
        let next = (&z.scale(c) + &inv.scale(T::one() / c)).scale(half);
        let change = (&next - &z).frobenius_norm() / next.frobenius_norm();
        z = next;
        if change < T::lit(1e-2) {
            scaling = false;
        }
        if change <= tol {
            return Ok(z);
        }
    }
    Err(Error::CareFailure(format!(
        "sign iteration did not converge in {} steps",
        cfg.sign_max_iterations
    )))
}
