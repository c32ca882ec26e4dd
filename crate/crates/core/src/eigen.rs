//! Symmetric tridiagonal eigensolver (implicit-shift QL).
//!
//! Only the first component of each eigenvector is accumulated, which is all
//! the Golub-Welsch construction of Gauss rules needs.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MAX_SWEEPS: usize = 60;

/// Eigenvalues of the tridiagonal matrix with diagonal `diag` and
/// off-diagonal `off` (`off[i]` couples rows `i` and `i + 1`), together with
/// the first components of the normalized eigenvectors.
///
/// Output is sorted by ascending eigenvalue.
pub fn tridiagonal_eigen<T: Scalar>(diag: &[T], off: &[T]) -> Result<(Vec<T>, Vec<T>)> {
    let n = diag.len();
    assert!(off.len() + 1 == n || (n == 0 && off.is_empty()), "off-diagonal length must be n - 1");
    let mut d = diag.to_vec();
    let mut e: Vec<T> = off.iter().copied().chain(std::iter::once(T::zero())).take(n).collect();
    let mut z = vec![T::zero(); n];
    if n == 0 {
        return Ok((d, z));
    }
    z[0] = T::one();
    let two = T::lit(2.0);

    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= T::epsilon() * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            if sweeps == MAX_SWEEPS {
                return Err(Error::EigenFailure { index: l });
            }
            sweeps += 1;

            let mut g = (d[l + 1] - d[l]) / (two * e[l]);
            let mut r = g.hypot(T::one());
            g = d[m] - d[l] + e[l] / (g + if g >= T::zero() { r } else { -r });
            let (mut s, mut c, mut p) = (T::one(), T::one(), T::zero());
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == T::zero() {
                    d[i + 1] -= p;
                    e[m] = T::zero();
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + two * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let zf = z[i + 1];
                z[i + 1] = s * z[i] + c * zf;
                z[i] = c * z[i] - s * zf;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = T::zero();
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &k| d[i].partial_cmp(&d[k]).expect("finite eigenvalues"));
    Ok((order.iter().map(|&i| d[i]).collect(), order.iter().map(|&i| z[i]).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn two_by_two() {
        let (vals, first) = tridiagonal_eigen(&[0.0, 0.0], &[1.0]).unwrap();
        assert_abs_diff_eq!(vals[0], -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(vals[1], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(first[0] * first[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(first[1] * first[1], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn one_by_one() {
        let (vals, first) = tridiagonal_eigen(&[0.7], &[]).unwrap();
        assert_eq!(vals, vec![0.7]);
        assert_eq!(first, vec![1.0]);
    }

    #[test]
    fn reconstructs_matrix_trace_and_first_row() {
        // sum lambda = trace; sum z^2 lambda = d_0; sum z^2 lambda^2 = d_0^2 + e_0^2
        let d = [0.3, -0.1, 0.5, 0.2, 0.0, -0.4];
        let e = [0.7, 0.2, 0.9, 0.1, 0.4];
        let (vals, z) = tridiagonal_eigen(&d, &e).unwrap();
        assert_abs_diff_eq!(vals.iter().sum::<f64>(), d.iter().sum::<f64>(), epsilon = 1e-14);
        let w: Vec<f64> = z.iter().map(|x| x * x).collect();
        assert_abs_diff_eq!(w.iter().sum::<f64>(), 1.0, epsilon = 1e-14);
        let m1: f64 = w.iter().zip(&vals).map(|(w, l)| w * l).sum();
        let m2: f64 = w.iter().zip(&vals).map(|(w, l)| w * l * l).sum();
        assert_abs_diff_eq!(m1, d[0], epsilon = 1e-14);
        assert_abs_diff_eq!(m2, d[0] * d[0] + e[0] * e[0], epsilon = 1e-14);
        assert!(vals.windows(2).all(|p| p[0] < p[1]));
    }
}
