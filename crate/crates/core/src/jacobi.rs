//! Truncated Jacobi matrices and the coefficient views the recursions read.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Finite truncation of the Jacobi matrix of a compactly supported measure.
///
/// The diagonal holds `a_0..a_{n-1}`. Off-diagonal entries are stored so that
/// index `j` holds `b_j`; slot 0 is the implicit `b_0 = 0`. Every stored
/// `b_j` with `j >= 1` is strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiMatrix<T> {
    a: Vec<T>,
    b: Vec<T>,
}

impl<T: Scalar> JacobiMatrix<T> {
    /// Builds a matrix from `a_0..a_{n-1}` and `b_1..b_{n-1}`.
    pub fn new(diag: Vec<T>, offdiag: Vec<T>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::InvalidParameter("Jacobi matrix must have size >= 1".into()));
        }
        if offdiag.len() + 1 != diag.len() {
            return Err(Error::SizeMismatch { left: diag.len(), right: offdiag.len() + 1 });
        }
        if let Some(x) = diag.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite diagonal entry {x}")));
        }
        if let Some((j, x)) = offdiag.iter().enumerate().find(|(_, x)| !(**x > T::zero() && x.is_finite())) {
            return Err(Error::InvalidParameter(format!("b_{} = {x} is not strictly positive", j + 1)));
        }
        let mut b = Vec::with_capacity(diag.len());
        b.push(T::zero());
        b.extend(offdiag);
        Ok(Self { a: diag, b })
    }

    /// Internal constructor for vectors already in `b[0] = 0` layout whose
    /// positivity has been checked by the producing recursion.
    pub(crate) fn from_parts(a: Vec<T>, b: Vec<T>) -> Self {
        debug_assert_eq!(a.len(), b.len());
        debug_assert!(b[0] == T::zero());
        debug_assert!(b[1..].iter().all(|x| *x > T::zero()));
        Self { a, b }
    }

    pub fn size(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self, j: usize) -> T {
        self.a[j]
    }

    /// `b_j`, with `b_0 = 0`.
    pub fn b(&self, j: usize) -> T {
        self.b[j]
    }

    pub fn diag(&self) -> &[T] {
        &self.a
    }

    /// `b_1..b_{n-1}`.
    pub fn offdiag(&self) -> &[T] {
        &self.b[1..]
    }

    /// Off-diagonal in `b[0] = 0` layout.
    pub fn b_slice(&self) -> &[T] {
        &self.b
    }

    /// Leading `n x n` block.
    pub fn truncate(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.size() {
            return Err(Error::IndexOutOfRange { needed: n.saturating_sub(1), size: self.size() });
        }
        Ok(Self { a: self.a[..n].to_vec(), b: self.b[..n].to_vec() })
    }

    pub(crate) fn coeffs(&self) -> Coeffs<'_, T> {
        Coeffs::new(&self.a, &self.b)
    }

    /// Largest `|a_j|` or `b_j`.
    pub fn scale(&self) -> T {
        self.a.iter().chain(&self.b).fold(T::zero(), |m, x| m.max(x.abs()))
    }

    /// Moments `m_p = e_0^T J^p e_0` for `p = 0..=max_power`.
    ///
    /// Exact moments of the measure for `p <= 2n - 1`.
    pub fn moments(&self, max_power: usize) -> Vec<T> {
        let n = self.size();
        let mut v = vec![T::zero(); n];
        v[0] = T::one();
        let mut out = Vec::with_capacity(max_power + 1);
        out.push(T::one());
        for _ in 0..max_power {
            let mut w = vec![T::zero(); n];
            for i in 0..n {
                let mut s = self.a[i] * v[i];
                if i > 0 {
                    s += self.b[i] * v[i - 1];
                }
                if i + 1 < n {
                    s += self.b[i + 1] * v[i + 1];
                }
                w[i] = s;
            }
            v = w;
            out.push(v[0]);
        }
        out
    }

    /// Converts every entry to another scalar type.
    pub fn cast<U: Scalar>(&self) -> JacobiMatrix<U> {
        let conv = |x: &T| U::lit(x.as_f64());
        JacobiMatrix { a: self.a.iter().map(conv).collect(), b: self.b.iter().map(conv).collect() }
    }
}

/// Jacobi matrix of the normalized Lebesgue measure on `[-1, 1]` (Legendre recurrence).
pub fn jacobi_lebesgue<T: Scalar>(n: usize) -> Result<JacobiMatrix<T>> {
    if n == 0 {
        return Err(Error::InvalidParameter("size must be >= 1".into()));
    }
    let b = (0..n)
        .map(|j| {
            if j == 0 {
                T::zero()
            } else {
                let jf = T::of_usize(j);
                jf / (T::lit(4.0) * jf * jf - T::one()).sqrt()
            }
        })
        .collect();
    Ok(JacobiMatrix { a: vec![T::zero(); n], b })
}

/// Frobenius norm of `x - y`: `sqrt(sum (a - a')^2 + 2 sum (b - b')^2)`.
pub fn frobenius_distance<T: Scalar>(x: &JacobiMatrix<T>, y: &JacobiMatrix<T>) -> Result<T> {
    if x.size() != y.size() {
        return Err(Error::SizeMismatch { left: x.size(), right: y.size() });
    }
    let two = T::lit(2.0);
    let diag: T = x.a.iter().zip(&y.a).map(|(p, q)| (*p - *q).powi(2)).sum();
    let off: T = x.b.iter().zip(&y.b).map(|(p, q)| two * (*p - *q).powi(2)).sum();
    Ok((diag + off).sqrt())
}

/// Read-only recurrence coefficients with zero extension past the end.
///
/// Reading `b_j` beyond the stored range yields zero, which is the
/// convention for the Jacobi matrix of a finite atomic measure.
#[derive(Debug, Clone, Copy)]
pub struct Coeffs<'a, T> {
    a: &'a [T],
    b: &'a [T],
}

impl<'a, T: Scalar> Coeffs<'a, T> {
    pub fn new(a: &'a [T], b: &'a [T]) -> Self {
        Self { a, b }
    }

    #[inline]
    pub fn a(&self, j: usize) -> T {
        self.a.get(j).copied().unwrap_or_else(T::zero)
    }

    #[inline]
    pub fn b(&self, j: usize) -> T {
        self.b.get(j).copied().unwrap_or_else(T::zero)
    }
}
