use super::matrix::DenseMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Scaled 1-norm at or below which the [7/7] Padé approximant is used directly.
/// The backward-error bound of the degree-7 approximant holds up to ~0.95, so
/// 0.5 leaves a comfortable margin in double precision.
const PADE_NORM_BOUND: f64 = 0.5;

const PADE7: [f64; 8] = [
    17_297_280.0,
    8_648_640.0,
    1_995_840.0,
    277_200.0,
    25_200.0,
    1_512.0,
    56.0,
    1.0,
];

/// `e^{M t}` by scaling and squaring with a fixed [7/7] Padé approximant.
pub fn expm<T: Real>(m: &DenseMatrix<T>, t: T) -> Result<DenseMatrix<T>> {
    if !m.is_square() {
        return Err(Error::InvalidMatrix(format!(
            "expm of non-square {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let a = m.scale(t);
    let norm = a.norm_one();
    if !norm.is_finite() {
        return Err(Error::NumericalOverflow { norm: norm.as_f64() });
    }
    let bound = T::lit(PADE_NORM_BOUND);
    let squarings = if norm > bound {
        (norm / bound).log2().ceil().to_i32().unwrap_or(i32::MAX)
    } else {
        0
    };
    if squarings > 1000 {
        return Err(Error::NumericalOverflow { norm: norm.as_f64() });
    }
    let a = a.scale(T::lit(2.0).powi(-squarings));
    let mut r = pade7(&a)?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    if !r.is_finite() {
        return Err(Error::NumericalOverflow { norm: norm.as_f64() });
    }
    Ok(r)
}

fn pade7<T: Real>(a: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    let b = PADE7.map(T::lit);
    let n = a.rows();
    let id = DenseMatrix::identity(n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let odd = &(&(&a6.scale(b[7]) + &a4.scale(b[5])) + &a2.scale(b[3])) + &id.scale(b[1]);
    let u = a * &odd;
    let v = &(&(&a6.scale(b[6]) + &a4.scale(b[4])) + &a2.scale(b[2])) + &id.scale(b[0]);
    let num = &v + &u;
    let den = &v - &u;
    den.solve(&num)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &DenseMatrix<f64>, b: &DenseMatrix<f64>, rel: f64) -> bool {
        (a - b).max_abs() <= rel * b.max_abs().max(1.0)
    }

    #[test]
    fn zero_matrix_gives_identity() {
        let z = DenseMatrix::<f64>::zeros(3, 3);
        assert_eq!(expm(&z, 2.5).unwrap(), DenseMatrix::identity(3));
    }

    #[test]
    fn diagonal_case() {
        let d = DenseMatrix::from_diagonal(&[1.5, -3.0]);
        let e = expm(&d, 1.0).unwrap();
        assert!((e[(0, 0)] / 1.5f64.exp() - 1.0).abs() < 1e-13);
        assert!((e[(1, 1)] / (-3.0f64).exp() - 1.0).abs() < 1e-13);
        assert_eq!(e[(0, 1)], 0.0);
    }

    #[test]
    fn rotation_generator() {
        let w = 2.0f64;
        let g = DenseMatrix::from_rows(&[[0.0, -w], [w, 0.0]]).unwrap();
        for t in [0.1, 1.0, 7.3] {
            let (s, c) = (w * t).sin_cos();
            let want = DenseMatrix::from_rows(&[[c, -s], [s, c]]).unwrap();
            assert!(close(&expm(&g, t).unwrap(), &want, 1e-12), "t = {t}");
        }
    }

    #[test]
    fn large_norm_stays_accurate() {
        let d = DenseMatrix::from_diagonal(&[-20.0, 20.0]);
        let e = expm(&d, 2.5).unwrap();
        assert!((e[(1, 1)] / 50f64.exp() - 1.0).abs() < 1e-10);
        assert!((e[(0, 0)] / (-50f64).exp() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn overflow_is_reported() {
        let d = DenseMatrix::from_diagonal(&[1.0]);
        assert!(matches!(expm(&d, 1e6), Err(Error::NumericalOverflow { .. })));
    }

    #[test]
    fn single_precision() {
        let d = DenseMatrix::<f32>::from_diagonal(&[1.0, -1.0]);
        let e = expm(&d, 1.0).unwrap();
        assert!((e[(0, 0)] - 1f32.exp()).abs() < 1e-5);
    }
}
