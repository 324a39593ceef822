use super::{Matrix, Scalar};

/// Matrix exponential by scaling and squaring with a truncated Taylor series.
///
/// The argument is scaled so its 1-norm is at most 1/2; the series is summed
/// until a term falls below `tol / 2^s` relative to the partial sum, then the
/// result is squared `s` times. Panics on non-square input.
pub fn matrix_exp<T: Scalar>(a: &Matrix<T>, tol: T) -> Matrix<T> {
    let n = a.dim().expect("matrix_exp requires a square matrix");
    let norm = a.one_norm();
    let half = T::lit(0.5);
    let mut squarings = 0u32;
    let mut scale = T::one();
    while norm * scale > half {
        scale *= half;
        squarings += 1;
    }
    let scaled = a.scale_real(scale);

    let term_tol = (tol * scale).max(T::epsilon() * T::lit(0.5));
    let mut sum = Matrix::identity(n);
    let mut term = Matrix::identity(n);
    for k in 1..=64 {
        term = (&term * &scaled).scale_real(T::one() / T::from_usize(k).unwrap());
        sum += &term;
        if term.one_norm() <= term_tol * sum.one_norm() {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::frobenius_distance;
    use crate::{C64, CMatrix};
    use std::f64::consts::PI;

    #[test]
    fn exp_of_zero_is_identity() {
        let e = matrix_exp(&CMatrix::zeros(3, 3), 1e-12);
        assert_eq!(e, CMatrix::identity(3));
    }

    #[test]
    fn exp_of_diagonal_phase() {
        let a = CMatrix::from_diag(&[C64::new(0.0, PI), C64::new(0.0, 0.0)]);
        let e = matrix_exp(&a, 1e-12);
        let expected = CMatrix::from_real_diag(&[-1.0, 1.0]);
        assert!(frobenius_distance(&e, &expected).unwrap() < 1e-12);
    }

    #[test]
    fn exp_inverse_property() {
        for k in 0..6 {
            let a = CMatrix::from_fn(4, 4, |i, j| {
                let x = ((i * 7 + j * 3 + k) % 11) as f64 / 11.0 - 0.5;
                let y = ((i * 5 + j * 2 + 3 * k) % 13) as f64 / 13.0 - 0.5;
                C64::new(x, y)
            });
            let a = a.scale_real(2.0 / a.frobenius_norm());
            let prod = &matrix_exp(&a, 1e-12) * &matrix_exp(&(-&a), 1e-12);
            assert!(frobenius_distance(&prod, &CMatrix::identity(4)).unwrap() < 1e-11);
        }
    }

    #[test]
    fn exp_of_large_rotation_generator() {
        // exp(-i θ X) = cos θ 1 - i sin θ X
        let theta = 7.3;
        let x = CMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let e = matrix_exp(&x.scale(C64::new(0.0, -theta)), 1e-12);
        let expected = &CMatrix::identity(2).scale_real(theta.cos()) + &x.scale(C64::new(0.0, -theta.sin()));
        assert!(frobenius_distance(&e, &expected).unwrap() < 1e-12);
    }
}
