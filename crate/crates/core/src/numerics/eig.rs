//! Eigenvalue and singular-value kernels for desk-scale dense matrices.

use num_complex::Complex;

use super::config::NumericsConfig;
use super::matrix::DenseMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Extreme eigenvalues of a symmetric matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetricSpectrum<T> {
    pub lambda_min: T,
    pub lambda_max: T,
}

const MAX_JACOBI_SWEEPS: usize = 100;

fn check_symmetric<T: Real>(s: &DenseMatrix<T>, cfg: &NumericsConfig) -> Result<()> {
    if !s.is_square() {
        return Err(Error::InvalidMatrix(format!(
            "expected a square matrix, got {}x{}",
            s.rows(),
            s.cols()
        )));
    }
    let asym = s.asymmetry();
    if asym > T::tol(cfg.symmetry_tol, 16.0) {
        return Err(Error::InvalidMatrix(format!(
            "matrix is not symmetric (relative asymmetry {:.3e})",
            asym.as_f64()
        )));
    }
    Ok(())
}

/// All eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn sym_eigenvalues<T: Real>(s: &DenseMatrix<T>) -> Result<Vec<T>> {
    sym_eigenvalues_with(s, &NumericsConfig::default())
}

pub fn sym_eigenvalues_with<T: Real>(s: &DenseMatrix<T>, cfg: &NumericsConfig) -> Result<Vec<T>> {
    check_symmetric(s, cfg)?;
    let n = s.rows();
    let mut a = s.symmetrized();
    let target = T::tol(cfg.jacobi_off_tol, 4.0) * a.frobenius_norm();
    let off = |a: &DenseMatrix<T>| {
        let mut acc = T::zero();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    acc = acc + a[(i, j)] * a[(i, j)];
                }
            }
        }
        acc.sqrt()
    };
    let mut sweeps = 0;
    while off(&a) > target {
        if sweeps == MAX_JACOBI_SWEEPS {
            return Err(Error::EigenFailure { iterations: sweeps });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - sn * akq;
                    a[(k, q)] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - sn * aqk;
                    a[(q, k)] = sn * apk + c * aqk;
                }
            }
        }
    }
    let mut eig = a.diagonal();
    eig.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
    Ok(eig)
}

/// Minimum and maximum eigenvalue of a symmetric matrix.
pub fn sym_eig_extremes<T: Real>(s: &DenseMatrix<T>) -> Result<SymmetricSpectrum<T>> {
    sym_eig_extremes_with(s, &NumericsConfig::default())
}

pub fn sym_eig_extremes_with<T: Real>(
    s: &DenseMatrix<T>,
    cfg: &NumericsConfig,
) -> Result<SymmetricSpectrum<T>> {
    let eig = sym_eigenvalues_with(s, cfg)?;
    Ok(SymmetricSpectrum {
        lambda_min: eig[0],
        lambda_max: eig[eig.len() - 1],
    })
}

/// Singular values by one-sided (Hestenes) Jacobi, descending.
///
/// Accurate to roughly `eps · σ_max` in absolute terms, which the rank test
/// depends on; forming `MᵀM` would square the condition number.
pub fn singular_values<T: Real>(m: &DenseMatrix<T>) -> Result<Vec<T>> {
    let work = if m.rows() < m.cols() { m.transpose() } else { m.clone() };
    let (rows, cols) = work.shape();
    let mut colv: Vec<Vec<T>> = (0..cols)
        .map(|j| (0..rows).map(|i| work[(i, j)]).collect())
        .collect();
    let eps = T::epsilon();
    let dot = |x: &[T], y: &[T]| x.iter().zip(y).map(|(&a, &b)| a * b).sum::<T>();
    let mut sweeps = 0;
    loop {
        let mut rotated = false;
        for i in 0..cols {
            for j in i + 1..cols {
                let alpha = dot(&colv[i], &colv[i]);
                let beta = dot(&colv[j], &colv[j]);
                let gamma = dot(&colv[i], &colv[j]);
                if gamma == T::zero() || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::lit(2.0) * gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                let (left, right) = colv.split_at_mut(j);
                for (x, y) in left[i].iter_mut().zip(right[0].iter_mut()) {
                    let (xi, yj) = (*x, *y);
                    *x = c * xi - s * yj;
                    *y = s * xi + c * yj;
                }
            }
        }
        if !rotated {
            break;
        }
        sweeps += 1;
        if sweeps == MAX_JACOBI_SWEEPS {
            return Err(Error::EigenFailure { iterations: sweeps });
        }
    }
    let mut sv: Vec<T> = colv.iter().map(|c| dot(c, c).sqrt()).collect();
    sv.sort_by(|x, y| y.partial_cmp(x).expect("finite singular values"));
    Ok(sv)
}

/// Induced 2-norm `σ_max(M)`.
pub fn spectral_norm<T: Real>(m: &DenseMatrix<T>) -> T {
    // Jacobi on finite input always terminates well inside the sweep cap.
    singular_values(m).map(|sv| sv[0]).unwrap_or_else(|_| T::nan())
}

/// All eigenvalues of a general real square matrix.
///
/// Gaussian-similarity reduction to upper Hessenberg form followed by the
/// Francis double-shift QR iteration. Complex eigenvalues come in conjugate
/// pairs; the result is sorted by real part, then imaginary part.
pub fn eigenvalues<T: Real>(m: &DenseMatrix<T>) -> Result<Vec<Complex<T>>> {
    if !m.is_square() {
        return Err(Error::InvalidMatrix(format!(
            "eigenvalues of non-square {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    // 1-based working copy keeps the index arithmetic of the classic algorithm readable.
    let mut a = vec![vec![T::zero(); n + 1]; n + 1];
    for i in 0..n {
        for j in 0..n {
            a[i + 1][j + 1] = m[(i, j)];
        }
    }
    reduce_to_hessenberg(&mut a, n);
    for i in 1..=n {
        for j in 1..i.saturating_sub(1) {
            a[i][j] = T::zero();
        }
    }
    let (wr, wi) = hessenberg_qr(&mut a, n)?;
    let mut eig: Vec<Complex<T>> = (1..=n).map(|i| Complex::new(wr[i], wi[i])).collect();
    eig.sort_by(|x, y| {
        x.re.partial_cmp(&y.re)
            .expect("finite eigenvalues")
            .then(x.im.partial_cmp(&y.im).expect("finite eigenvalues"))
    });
    Ok(eig)
}

fn reduce_to_hessenberg<T: Real>(a: &mut [Vec<T>], n: usize) {
    for m in 2..n {
        let mut x = T::zero();
        let mut piv = m;
        for j in m..=n {
            if a[j][m - 1].abs() > x.abs() {
                x = a[j][m - 1];
                piv = j;
            }
        }
        if piv != m {
            for j in m - 1..=n {
                let tmp = a[piv][j];
                a[piv][j] = a[m][j];
                a[m][j] = tmp;
            }
            for row in a.iter_mut().skip(1) {
                row.swap(piv, m);
            }
        }
        if x != T::zero() {
            for i in m + 1..=n {
                let mut y = a[i][m - 1];
                if y != T::zero() {
                    y = y / x;
                    a[i][m - 1] = y;
                    for j in m..=n {
                        a[i][j] = a[i][j] - y * a[m][j];
                    }
                    for row in a.iter_mut().skip(1) {
                        row[m] = row[m] + y * row[i];
                    }
                }
            }
        }
    }
}

#[allow(clippy::many_single_char_names)]
fn hessenberg_qr<T: Real>(a: &mut [Vec<T>], n: usize) -> Result<(Vec<T>, Vec<T>)> {
    let mut wr = vec![T::zero(); n + 1];
    let mut wi = vec![T::zero(); n + 1];
    let half = T::lit(0.5);
    let sign = |a: T, b: T| if b >= T::zero() { a.abs() } else { -a.abs() };
    let budget = 100 * n.max(1);
    let mut total_its = 0usize;

    let mut anorm = T::zero();
    for i in 1..=n {
        for j in i.saturating_sub(1).max(1)..=n {
            anorm = anorm + a[i][j].abs();
        }
    }
    let mut nn = n;
    let mut t = T::zero();
    while nn >= 1 {
        let mut its = 0usize;
        loop {
            let mut l = nn;
            while l >= 2 {
                let mut s = a[l - 1][l - 1].abs() + a[l][l].abs();
                if s == T::zero() {
                    s = anorm;
                }
                if a[l][l - 1].abs() + s == s {
                    a[l][l - 1] = T::zero();
                    break;
                }
                l -= 1;
            }
            let mut x = a[nn][nn];
            if l == nn {
                wr[nn] = x + t;
                wi[nn] = T::zero();
                nn -= 1;
            } else {
                let mut y = a[nn - 1][nn - 1];
                let mut w = a[nn][nn - 1] * a[nn - 1][nn];
                if l == nn - 1 {
                    let p = half * (y - x);
                    let q = p * p + w;
                    let mut z = q.abs().sqrt();
                    x = x + t;
                    if q >= T::zero() {
                        z = p + sign(z, p);
                        wr[nn - 1] = x + z;
                        wr[nn] = x + z;
                        if z != T::zero() {
                            wr[nn] = x - w / z;
                        }
                        wi[nn - 1] = T::zero();
                        wi[nn] = T::zero();
                    } else {
                        wr[nn - 1] = x + p;
                        wr[nn] = x + p;
                        wi[nn - 1] = -z;
                        wi[nn] = z;
                    }
                    nn -= 2;
                } else {
                    if its >= 30 || total_its >= budget {
                        return Err(Error::EigenFailure { iterations: total_its });
                    }
                    if its == 10 || its == 20 {
                        // exceptional shift
                        t = t + x;
                        for i in 1..=nn {
                            a[i][i] = a[i][i] - x;
                        }
                        let s = a[nn][nn - 1].abs() + a[nn - 1][nn - 2].abs();
                        x = T::lit(0.75) * s;
                        y = x;
                        w = T::lit(-0.4375) * s * s;
                    }
                    its += 1;
                    total_its += 1;
                    let (mut p, mut q, mut r);
                    let mut z;
                    let mut m = nn - 2;
                    loop {
                        z = a[m][m];
                        r = x - z;
                        let s = y - z;
                        p = (r * s - w) / a[m + 1][m] + a[m][m + 1];
                        q = a[m + 1][m + 1] - z - r - s;
                        r = a[m + 2][m + 1];
                        let s = p.abs() + q.abs() + r.abs();
                        p = p / s;
                        q = q / s;
                        r = r / s;
                        if m == l {
                            break;
                        }
                        let u = a[m][m - 1].abs() * (q.abs() + r.abs());
                        let v = p.abs() * (a[m - 1][m - 1].abs() + z.abs() + a[m + 1][m + 1].abs());
                        if u + v == v {
                            break;
                        }
                        m -= 1;
                    }
                    for i in m + 2..=nn {
                        a[i][i - 2] = T::zero();
                        if i != m + 2 {
                            a[i][i - 3] = T::zero();
                        }
                    }
                    let mut k = m;
                    while k < nn {
                        if k != m {
                            p = a[k][k - 1];
                            q = a[k + 1][k - 1];
                            r = T::zero();
                            if k != nn - 1 {
                                r = a[k + 2][k - 1];
                            }
                            x = p.abs() + q.abs() + r.abs();
                            if x != T::zero() {
                                p = p / x;
                                q = q / x;
                                r = r / x;
                            }
                        }
                        let s = sign((p * p + q * q + r * r).sqrt(), p);
                        if s != T::zero() {
                            if k == m {
                                if l != m {
                                    a[k][k - 1] = -a[k][k - 1];
                                }
                            } else {
                                a[k][k - 1] = -s * x;
                            }
                            p = p + s;
                            x = p / s;
                            y = q / s;
                            z = r / s;
                            q = q / p;
                            r = r / p;
                            for j in k..=nn {
                                p = a[k][j] + q * a[k + 1][j];
                                if k != nn - 1 {
                                    p = p + r * a[k + 2][j];
                                    a[k + 2][j] = a[k + 2][j] - p * z;
                                }
                                a[k + 1][j] = a[k + 1][j] - p * y;
                                a[k][j] = a[k][j] - p * x;
                            }
                            let mmin = if nn < k + 3 { nn } else { k + 3 };
                            for i in l..=mmin {
                                p = x * a[i][k] + y * a[i][k + 1];
                                if k != nn - 1 {
                                    p = p + z * a[i][k + 2];
                                    a[i][k + 2] = a[i][k + 2] - p * r;
                                }
                                a[i][k + 1] = a[i][k + 1] - p * q;
                                a[i][k] = a[i][k] - p;
                            }
                        }
                        k += 1;
                    }
                }
            }
            if nn < 2 || l + 1 >= nn {
                break;
            }
        }
    }
    Ok((wr, wi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> DenseMatrix<f64> {
        DenseMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn identity_and_diagonal_extremes() {
        let s = sym_eig_extremes(&DenseMatrix::<f64>::identity(4)).unwrap();
        assert_eq!((s.lambda_min, s.lambda_max), (1.0, 1.0));
        let s = sym_eig_extremes(&DenseMatrix::from_diagonal(&[1.0f64, 2.0, 3.0])).unwrap();
        assert!((s.lambda_min - 1.0).abs() < 1e-14 && (s.lambda_max - 3.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_asymmetric_and_rectangular() {
        assert!(matches!(
            sym_eig_extremes(&m(&[&[1.0, 2.0], &[0.0, 1.0]])),
            Err(Error::InvalidMatrix(_))
        ));
        assert!(matches!(
            sym_eig_extremes(&m(&[&[1.0, 2.0]])),
            Err(Error::InvalidMatrix(_))
        ));
    }

    #[test]
    fn spectral_norm_basics() {
        assert!((spectral_norm(&DenseMatrix::<f64>::identity(3)) - 1.0).abs() < 1e-15);
        let shift = m(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!((spectral_norm(&shift) - 1.0).abs() < 1e-15);
        let sv = singular_values(&shift).unwrap();
        assert_eq!(sv[1], 0.0);
    }

    #[test]
    fn singular_values_of_rank_one() {
        let r = m(&[&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]]);
        let sv = singular_values(&r).unwrap();
        assert!((sv[0] - 70f64.sqrt()).abs() < 1e-13);
        assert!(sv[1] < 1e-14);
    }

    #[test]
    fn eigenvalues_diagonal_and_rotation() {
        let e = eigenvalues(&m(&[&[1.0, 0.0], &[0.0, -2.0]])).unwrap();
        assert!((e[0].re + 2.0).abs() < 1e-12 && (e[1].re - 1.0).abs() < 1e-12);
        assert!(e.iter().all(|z| z.im == 0.0));
        let e = eigenvalues(&m(&[&[0.0, 1.0], &[-1.0, 0.0]])).unwrap();
        assert!(e.iter().all(|z| z.re.abs() < 1e-12 && (z.im.abs() - 1.0).abs() < 1e-12));
        assert!((e[0].im + e[1].im).abs() < 1e-12);
    }

    #[test]
    fn eigenvalues_of_example_dynamics() {
        // roots of λ² − 0.04λ + 0.33 = 0
        let a = m(&[&[-0.38, 0.72], &[-0.68, 0.42]]);
        let e = eigenvalues(&a).unwrap();
        let im = (0.33f64 - 0.0004).sqrt();
        for z in &e {
            assert!((z.re - 0.02).abs() < 1e-8);
            assert!((z.im.abs() - im).abs() < 1e-8);
        }
    }

    #[test]
    fn eigenvalues_larger_companion() {
        // companion matrix of (λ-1)(λ-2)(λ-3)(λ+4) = λ⁴ − 2λ³ − 13λ² + 38λ − 24
        let c = m(&[
            &[2.0, 13.0, -38.0, 24.0],
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 1.0, 0.0],
        ]);
        let e = eigenvalues(&c).unwrap();
        for (z, want) in e.iter().zip([-4.0, 1.0, 2.0, 3.0]) {
            assert!((z.re - want).abs() < 1e-9, "{z} vs {want}");
            assert!(z.im.abs() < 1e-9);
        }
    }

    #[test]
    fn single_precision_sym() {
        let s = DenseMatrix::<f32>::from_rows(&[[2.0f32, 1.0], [1.0, 2.0]]).unwrap();
        let sp = sym_eig_extremes(&s).unwrap();
        assert!((sp.lambda_min - 1.0).abs() < 1e-6 && (sp.lambda_max - 3.0).abs() < 1e-6);
    }
}
