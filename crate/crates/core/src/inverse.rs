//! Inverse problem: recover `sigma` from the Jacobi matrix of a target `mu`
//! at a given contraction ratio, and the largest ratio for which this works.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ifs::check_delta;
use crate::jacobi::{Coeffs, JacobiMatrix};
use crate::scalar::{degeneracy_threshold, Scalar};
use crate::scaling::{diag_terms, omega_tilde_interior, ScalingState};

/// Outcome of [`invert`].
#[derive(Debug, Clone, PartialEq)]
pub struct InverseResult<T> {
    /// Recovered Jacobi matrix of `sigma`, of size `feasible_size`.
    pub sigma_jacobi: JacobiMatrix<T>,
    pub feasible_size: usize,
    pub requested_size: usize,
    /// Set iff `feasible_size < requested_size`.
    pub terminated_early: bool,
}

impl<T> InverseResult<T> {
    pub fn is_complete(&self) -> bool {
        !self.terminated_early
    }
}

/// Runs the closure recursion backwards, solving for `a_n(sigma)` and
/// `b_{n+1}(sigma)` at each order.
///
/// Stops as soon as `b^2_{n+1}(sigma)` is not positive (the contraction ratio
/// is too large for a size-`n + 2` IFS quadrature); the result then has size
/// `n + 1`.
pub fn invert<T: Scalar>(mu: &JacobiMatrix<T>, delta: T, n: usize) -> Result<InverseResult<T>> {
    check_delta(delta)?;
    if n == 0 {
        return Err(Error::InvalidTarget("requested size must be >= 1".into()));
    }
    if mu.size() < n {
        return Err(Error::InvalidTarget(format!("target has size {} but {n} was requested", mu.size())));
    }
    if let Some(j) = (1..n).find(|&j| !(mu.b(j) > T::zero() && mu.b(j).is_finite())) {
        return Err(Error::InvalidTarget(format!("b_{j} = {} is not positive", mu.b(j))));
    }
    let mu_c = Coeffs::new(&mu.diag()[..n], &mu.b_slice()[..n]);
    let dbar = T::one() - delta;
    let mut state = ScalingState::new(None);
    let mut a: Vec<T> = Vec::with_capacity(n);
    let mut b: Vec<T> = vec![T::zero()];
    let mut scale = mu.truncate(n)?.scale();
    let mut feasible = n;

    for step in 0..n {
        let t = diag_terms(state.current(), mu_c, Coeffs::new(&a, &b), delta);
        let a_n = (mu_c.a(step) * (T::one() - t.coef_eta) - t.partial) / t.coef_sigma;
        a.push(a_n);
        scale = scale.max(a_n.abs());
        if step + 1 == n {
            break;
        }
        let sigma = Coeffs::new(&a, &b);
        let primed = omega_tilde_interior(&mut state, mu_c, sigma, mu_c.a(step), mu_c.b(step), delta);
        let b_mu = mu_c.b(step + 1);
        let cs = dbar * state.current().sigma_corner();
        let b_sq = ((T::one() - delta.powi(2 * (step as i32 + 1))) * b_mu * b_mu - primed) / (cs * cs);
        let thr = degeneracy_threshold(scale);
        if !(b_sq > thr * thr) {
            feasible = step + 1;
            break;
        }
        let b_next = b_sq.sqrt();
        let ce = delta * b_mu * state.current().eta_corner();
        state.tilde_mut().set(step + 1, 0, ce);
        state.tilde_mut().set(0, step + 1, cs * b_next);
        state.advance(b_mu);
        scale = scale.max(b_next);
        b.push(b_next);
    }
    a.truncate(feasible);
    b.truncate(feasible);
    Ok(InverseResult {
        sigma_jacobi: JacobiMatrix::from_parts(a, b),
        feasible_size: feasible,
        requested_size: n,
        terminated_early: feasible < n,
    })
}

/// One point of the feasibility frontier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontierEntry<T> {
    pub n: usize,
    /// Geometric midpoint of the final bracket.
    pub delta_n: T,
    /// Largest ratio seen to be feasible.
    pub lower: T,
    /// Smallest ratio seen to be infeasible; equal to `lower` when the
    /// whole search range is feasible.
    pub upper: T,
}

/// Estimated supremum feasible contraction ratio per truncation size.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityFrontier<T> {
    pub entries: Vec<FrontierEntry<T>>,
}

/// Upper end of the search range.
const DELTA_MAX: f64 = 0.999;
/// Below this the downward search gives up.
const DELTA_FLOOR: f64 = 1e-300;

fn feasible<T: Scalar>(mu: &JacobiMatrix<T>, delta: T, n: usize) -> Result<bool> {
    Ok(invert(mu, delta, n)?.is_complete())
}

fn frontier_point<T: Scalar>(mu: &JacobiMatrix<T>, n: usize, tol_rel: T) -> Result<FrontierEntry<T>> {
    let mut hi = T::lit(DELTA_MAX);
    if feasible(mu, hi, n)? {
        return Ok(FrontierEntry { n, delta_n: hi, lower: hi, upper: hi });
    }
    let ten = T::lit(10.0);
    let mut lo = hi / ten;
    while !feasible(mu, lo, n)? {
        hi = lo;
        lo /= ten;
        if lo < T::lit(DELTA_FLOOR) {
            return Err(Error::InvalidTarget(format!("no feasible contraction ratio found at n = {n}")));
        }
    }
    while hi / lo - T::one() > tol_rel {
        let mid = (lo * hi).sqrt();
        if feasible(mu, mid, n)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(FrontierEntry { n, delta_n: (lo * hi).sqrt(), lower: lo, upper: hi })
}

/// Bisects, for each `n` in `n_values`, the largest `delta` at which
/// [`invert`] reaches size `n`, to relative bracket width `tol_rel`.
///
/// The search starts at `0.999`, steps down by decades until a feasible ratio
/// is found, then bisects on a log scale. Sizes are processed in parallel;
/// entries come back in the order of `n_values`.
pub fn delta_frontier<T: Scalar>(
    mu: &JacobiMatrix<T>,
    n_values: &[usize],
    tol_rel: T,
) -> Result<FeasibilityFrontier<T>> {
    if !(tol_rel > T::zero()) {
        return Err(Error::InvalidParameter("tol_rel must be positive".into()));
    }
    if let Some(&n) = n_values.iter().find(|&&n| n == 0 || n > mu.size()) {
        return Err(Error::InvalidTarget(format!("size {n} not covered by a target of size {}", mu.size())));
    }
    let entries = n_values.par_iter().map(|&n| frontier_point(mu, n, tol_rel)).collect::<Result<Vec<_>>>()?;
    Ok(FeasibilityFrontier { entries })
}

/// Letters of the fixed point of `A -> AB, B -> A` from seed `A`, as booleans
/// (`true` for `A`).
pub fn fibonacci_word(len: usize) -> Vec<bool> {
    let mut word = vec![true];
    while word.len() < len {
        word = word.iter().flat_map(|&c| if c { vec![true, false] } else { vec![true] }).collect();
    }
    word.truncate(len);
    word
}

/// Zero-diagonal Jacobi matrix with `b_j = A` or `B` following the Fibonacci
/// word (`b_1` takes its first letter).
pub fn fibonacci_jacobi<T: Scalar>(n: usize, a_value: T, b_value: T) -> Result<JacobiMatrix<T>> {
    if n == 0 {
        return Err(Error::InvalidParameter("size must be >= 1".into()));
    }
    let off = fibonacci_word(n - 1).into_iter().map(|c| if c { a_value } else { b_value }).collect();
    JacobiMatrix::new(vec![T::zero(); n], off)
}
