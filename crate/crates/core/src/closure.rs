//! Direct computation of the Jacobi matrix of the invariant measure.
//!
//! Setting `eta = etabar = mu` in the convolution recurrences closes the
//! fixed-point iteration into a single pass: at order `n` the unknown
//! `a_n(mu)` appears on both sides of the diagonal relation with coefficient
//! `delta * (Omega_{n,0})^2 < 1`, and `b_{n+1}(mu)` follows from the
//! normalization of `Omega~^{n+1}` with the factor `1 - delta^{2(n+1)}`.

use crate::discrete::DiscreteMeasure;
use crate::error::{Error, Result, Step};
use crate::ifs::IfsSpec;
use crate::jacobi::{Coeffs, JacobiMatrix};
use crate::scalar::Scalar;
use crate::scaling::{b_sq_closure, checked_sqrt, diag_terms, omega_tilde_interior, ScalingState};

/// Closure recursion over raw sigma coefficients.
///
/// Returns the matrix and the largest normalization deviation seen.
pub(crate) fn closure_coeffs<T: Scalar>(
    sigma: Coeffs<'_, T>,
    delta: T,
    n: usize,
    cap: Option<usize>,
) -> Result<(JacobiMatrix<T>, T)> {
    let mut state = ScalingState::new(cap);
    let mut a: Vec<T> = Vec::with_capacity(n);
    let mut b: Vec<T> = Vec::with_capacity(n);
    b.push(T::zero());
    let dbar = T::one() - delta;
    let mut scale = T::zero();
    for step in 0..n {
        let t = diag_terms(state.current(), Coeffs::new(&a, &b), sigma, delta);
        let a_n = (t.partial + t.coef_sigma * sigma.a(step)) / (T::one() - t.coef_eta);
        a.push(a_n);
        scale = scale.max(a_n.abs());
        if step + 1 == n {
            break;
        }
        let mu = Coeffs::new(&a, &b);
        let primed = omega_tilde_interior(&mut state, mu, sigma, a_n, b[step], delta);
        let b_sq = b_sq_closure(primed, sigma.b(step + 1), state.current(), delta, step);
        let b_next = checked_sqrt(b_sq, scale, Step::Closure, step)?;
        let ce = delta * b_next * state.current().eta_corner();
        let cs = dbar * sigma.b(step + 1) * state.current().sigma_corner();
        state.tilde_mut().set(step + 1, 0, ce);
        state.tilde_mut().set(0, step + 1, cs);
        state.advance(b_next);
        scale = scale.max(b_next);
        b.push(b_next);
    }
    Ok((JacobiMatrix::from_parts(a, b), state.max_normalization_error()))
}

impl<T: Scalar> IfsSpec<T> {
    /// Size-`n` truncation of the Jacobi matrix of the invariant measure.
    pub fn closure(&self, n: usize) -> Result<JacobiMatrix<T>> {
        self.closure_with_diagnostics(n).map(|(j, _)| j)
    }

    /// As [`IfsSpec::closure`], also returning the largest deviation of
    /// `sum Omega^2` from one over the run.
    pub fn closure_with_diagnostics(&self, n: usize) -> Result<(JacobiMatrix<T>, T)> {
        if n == 0 {
            return Err(Error::InvalidParameter("size must be >= 1".into()));
        }
        let sigma = self.sigma_coeffs(n)?;
        closure_coeffs(sigma, self.delta(), n, self.column_cap())
    }
}

/// Jacobi matrix of the invariant measure of the IFS `(delta, sigma)`.
///
/// `sigma` must cover size `n`.
pub fn closure<T: Scalar>(sigma: &JacobiMatrix<T>, delta: T, n: usize) -> Result<JacobiMatrix<T>> {
    IfsSpec::new(delta, sigma.clone())?.closure(n)
}

/// Same as [`closure`] for a finite IFS given by its atoms; runs in `O(M n^2)`.
pub fn closure_atoms<T: Scalar>(sigma: &DiscreteMeasure<T>, delta: T, n: usize) -> Result<JacobiMatrix<T>> {
    IfsSpec::from_atoms(delta, sigma.clone())?.closure(n)
}
