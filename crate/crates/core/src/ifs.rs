//! Homogeneous affine IFS description `(delta, sigma)`.

use crate::discrete::{jacobi_from_discrete, DiscreteMeasure};
use crate::error::{Error, Result};
use crate::jacobi::{Coeffs, JacobiMatrix};
use crate::scalar::Scalar;

/// Contraction ratio plus the distribution `sigma` of the map fixed points.
///
/// When `sigma` is atomic the atom list is kept, and the Jacobi matrix has
/// full rank `M`; the recursions then read `b_j(sigma) = 0` for `j >= M` and
/// restrict the scaling matrices to `M` columns.
#[derive(Debug, Clone, PartialEq)]
pub struct IfsSpec<T> {
    delta: T,
    sigma_jacobi: JacobiMatrix<T>,
    sigma_atoms: Option<DiscreteMeasure<T>>,
}

pub(crate) fn check_delta<T: Scalar>(delta: T) -> Result<()> {
    if !(delta >= T::zero() && delta < T::one()) {
        return Err(Error::InvalidParameter(format!("delta = {delta} outside [0, 1)")));
    }
    Ok(())
}

impl<T: Scalar> IfsSpec<T> {
    /// IFS whose `sigma` is known through (a truncation of) its Jacobi matrix.
    pub fn new(delta: T, sigma_jacobi: JacobiMatrix<T>) -> Result<Self> {
        check_delta(delta)?;
        Ok(Self { delta, sigma_jacobi, sigma_atoms: None })
    }

    /// Classical IFS with finitely many maps.
    pub fn from_atoms(delta: T, atoms: DiscreteMeasure<T>) -> Result<Self> {
        check_delta(delta)?;
        let merged = atoms.merged();
        let sigma_jacobi = jacobi_from_discrete(&merged, merged.len())?;
        Ok(Self { delta, sigma_jacobi, sigma_atoms: Some(merged) })
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    pub fn sigma_jacobi(&self) -> &JacobiMatrix<T> {
        &self.sigma_jacobi
    }

    pub fn sigma_atoms(&self) -> Option<&DiscreteMeasure<T>> {
        self.sigma_atoms.as_ref()
    }

    /// Same IFS with a different contraction ratio.
    pub fn with_delta(&self, delta: T) -> Result<Self> {
        check_delta(delta)?;
        Ok(Self { delta, ..self.clone() })
    }

    /// Column cap for the scaling recursion: the atom count when atomic.
    pub fn column_cap(&self) -> Option<usize> {
        self.sigma_atoms.as_ref().map(|_| self.sigma_jacobi.size())
    }

    /// Sigma coefficients good for a recursion of size `n`.
    pub(crate) fn sigma_coeffs(&self, n: usize) -> Result<Coeffs<'_, T>> {
        if self.sigma_atoms.is_none() && self.sigma_jacobi.size() < n {
            return Err(Error::IndexOutOfRange { needed: n - 1, size: self.sigma_jacobi.size() });
        }
        Ok(self.sigma_jacobi.coeffs())
    }
}
