//! Jacobi matrix of the IFS convolution `Phi_delta(sigma; eta)` and the
//! fixed-point iteration built on it.

use crate::error::{Error, Result, Step};
use crate::ifs::IfsSpec;
use crate::jacobi::{frobenius_distance, jacobi_lebesgue, Coeffs, JacobiMatrix};
use crate::scalar::Scalar;
use crate::scaling::{b_sq_convolution, checked_sqrt, diag_terms, omega_tilde_interior, ScalingState};

/// Stopping rule of the fixed-point iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct FixpointConfig<T> {
    /// Stop once the Frobenius distance between successive iterates is at most this.
    pub tolerance: T,
    pub max_iterations: usize,
    /// Keep every iterate in the report.
    pub record_trajectory: bool,
}

impl<T: Scalar> FixpointConfig<T> {
    /// `1e-13 * sqrt(n)` tolerance and 200 iterations.
    pub fn for_size(n: usize) -> Self {
        Self { tolerance: T::lit(1e-13) * T::of_usize(n).sqrt(), max_iterations: 200, record_trajectory: false }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > T::zero()) {
            return Err(Error::InvalidParameter("fixpoint tolerance must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter("max_iterations must be >= 1".into()));
        }
        Ok(())
    }
}

/// History of a fixed-point run.
#[derive(Debug, Clone, PartialEq)]
pub struct FixpointReport<T> {
    pub iterations_run: usize,
    /// `d_m = ||J_m - J_{m-1}||_F`, one per iteration.
    pub distances: Vec<T>,
    pub converged: bool,
    /// Iterates `J_1..J_m`, only when requested.
    pub trajectory: Vec<JacobiMatrix<T>>,
}

impl<T: Scalar> FixpointReport<T> {
    /// Turns a non-converged run into `Error::NoConvergence`.
    pub fn ensure_converged(&self) -> Result<()> {
        if self.converged {
            Ok(())
        } else {
            Err(Error::NoConvergence {
                iterations: self.iterations_run,
                distance: self.distances.last().map_or(f64::NAN, |d| d.as_f64()),
            })
        }
    }
}

/// Core loop of the convolution recursion.
pub(crate) fn convolve_coeffs<T: Scalar>(
    sigma: Coeffs<'_, T>,
    eta: Coeffs<'_, T>,
    delta: T,
    n: usize,
    cap: Option<usize>,
) -> Result<(JacobiMatrix<T>, T)> {
    let mut state = ScalingState::new(cap);
    let mut a: Vec<T> = Vec::with_capacity(n);
    let mut b: Vec<T> = Vec::with_capacity(n);
    b.push(T::zero());
    let mut scale = T::zero();
    for step in 0..n {
        let t = diag_terms(state.current(), eta, sigma, delta);
        let a_n = t.partial + t.coef_eta * eta.a(step) + t.coef_sigma * sigma.a(step);
        a.push(a_n);
        scale = scale.max(a_n.abs());
        if step + 1 == n {
            break;
        }
        let primed = omega_tilde_interior(&mut state, eta, sigma, a_n, b[step], delta);
        let b_sq = b_sq_convolution(primed, eta.b(step + 1), sigma.b(step + 1), state.current(), delta);
        let b_next = checked_sqrt(b_sq, scale, Step::Convolution, step)?;
        let dbar = T::one() - delta;
        let ce = delta * eta.b(step + 1) * state.current().eta_corner();
        let cs = dbar * sigma.b(step + 1) * state.current().sigma_corner();
        state.tilde_mut().set(step + 1, 0, ce);
        state.tilde_mut().set(0, step + 1, cs);
        state.advance(b_next);
        scale = scale.max(b_next);
        b.push(b_next);
    }
    Ok((JacobiMatrix::from_parts(a, b), state.max_normalization_error()))
}

fn check_inputs<T: Scalar>(delta: T, n: usize, eta: &JacobiMatrix<T>) -> Result<()> {
    crate::ifs::check_delta(delta)?;
    if n == 0 {
        return Err(Error::InvalidParameter("size must be >= 1".into()));
    }
    if eta.size() < n {
        return Err(Error::IndexOutOfRange { needed: n - 1, size: eta.size() });
    }
    Ok(())
}

/// Size-`n` truncation of the Jacobi matrix of `Phi_delta(sigma; eta)`.
///
/// Only the leading `n x n` blocks of both inputs are read.
pub fn convolve<T: Scalar>(
    sigma: &JacobiMatrix<T>,
    eta: &JacobiMatrix<T>,
    delta: T,
    n: usize,
) -> Result<JacobiMatrix<T>> {
    IfsSpec::new(delta, sigma.clone())?.convolve(eta, n)
}

/// Fixed-point iteration `J_m = convolve(sigma, J_{m-1})` from `init`.
pub fn fixpoint<T: Scalar>(
    sigma: &JacobiMatrix<T>,
    delta: T,
    n: usize,
    init: &JacobiMatrix<T>,
    cfg: &FixpointConfig<T>,
) -> Result<(JacobiMatrix<T>, FixpointReport<T>)> {
    IfsSpec::new(delta, sigma.clone())?.fixpoint(n, init, cfg)
}

/// Generic fixed-point driver over any convolution step.
pub(crate) fn iterate<T: Scalar>(
    n: usize,
    init: &JacobiMatrix<T>,
    cfg: &FixpointConfig<T>,
    mut step: impl FnMut(&JacobiMatrix<T>) -> Result<JacobiMatrix<T>>,
) -> Result<(JacobiMatrix<T>, FixpointReport<T>)> {
    cfg.validate()?;
    if init.size() < n {
        return Err(Error::IndexOutOfRange { needed: n - 1, size: init.size() });
    }
    let mut current = init.truncate(n)?;
    let mut report =
        FixpointReport { iterations_run: 0, distances: Vec::new(), converged: false, trajectory: Vec::new() };
    while report.iterations_run < cfg.max_iterations {
        let next = step(&current)?;
        let d = frobenius_distance(&next, &current)?;
        report.iterations_run += 1;
        report.distances.push(d);
        if cfg.record_trajectory {
            report.trajectory.push(next.clone());
        }
        current = next;
        if d <= cfg.tolerance {
            report.converged = true;
            break;
        }
    }
    Ok((current, report))
}

impl<T: Scalar> IfsSpec<T> {
    /// Size-`n` Jacobi matrix of `Phi_delta(sigma; eta)`.
    pub fn convolve(&self, eta: &JacobiMatrix<T>, n: usize) -> Result<JacobiMatrix<T>> {
        self.convolve_with_diagnostics(eta, n).map(|(j, _)| j)
    }

    /// As [`IfsSpec::convolve`], also returning the largest deviation of
    /// `sum Omega^2` from one over the run.
    pub fn convolve_with_diagnostics(&self, eta: &JacobiMatrix<T>, n: usize) -> Result<(JacobiMatrix<T>, T)> {
        check_inputs(self.delta(), n, eta)?;
        let sigma = self.sigma_coeffs(n)?;
        let eta_c = Coeffs::new(&eta.diag()[..n], &eta.b_slice()[..n]);
        convolve_coeffs(sigma, eta_c, self.delta(), n, self.column_cap())
    }

    /// Fixed-point iteration towards the invariant measure.
    pub fn fixpoint(
        &self,
        n: usize,
        init: &JacobiMatrix<T>,
        cfg: &FixpointConfig<T>,
    ) -> Result<(JacobiMatrix<T>, FixpointReport<T>)> {
        iterate(n, init, cfg, |j| self.convolve(j, n))
    }

    /// Fixed-point iteration started from the Lebesgue measure on `[-1, 1]`.
    pub fn fixpoint_from_lebesgue(
        &self,
        n: usize,
        cfg: &FixpointConfig<T>,
    ) -> Result<(JacobiMatrix<T>, FixpointReport<T>)> {
        self.fixpoint(n, &jacobi_lebesgue(n)?, cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete::{jacobi_from_discrete, DiscreteMeasure};
    use approx::assert_abs_diff_eq;

    /// Moments of `Phi_delta(sigma; eta)` from the binomial expansion of
    /// `(delta s + (1 - delta) beta)^p`.
    fn convolved_moments(ms: &[f64], me: &[f64], delta: f64) -> Vec<f64> {
        let dbar = 1.0 - delta;
        (0..ms.len())
            .map(|p| {
                let mut c = 1.0;
                let mut s = 0.0;
                for i in 0..=p {
                    s += c * delta.powi(i as i32) * dbar.powi((p - i) as i32) * me[i] * ms[p - i];
                    c = c * (p - i) as f64 / (i + 1) as f64;
                }
                s
            })
            .collect()
    }

    fn two_atom_ifs(delta: f64) -> IfsSpec<f64> {
        IfsSpec::from_atoms(delta, DiscreteMeasure::new([(-1.0, 0.5), (1.0, 0.5)]).unwrap()).unwrap()
    }

    #[test]
    fn moments_match_binomial_oracle() {
        let n = 6;
        let sigma = JacobiMatrix::new(vec![0.1, -0.2, 0.05, 0.0, 0.1, 0.0], vec![0.6, 0.45, 0.5, 0.4, 0.55]).unwrap();
        let eta = jacobi_lebesgue::<f64>(n).unwrap();
        for delta in [0.0, 0.2, 0.5, 0.9] {
            let out = convolve(&sigma, &eta, delta, n).unwrap();
            let oracle = convolved_moments(&sigma.moments(2 * n - 1), &eta.moments(2 * n - 1), delta);
            let got = out.moments(2 * n - 1);
            for p in 0..2 * n {
                assert_abs_diff_eq!(got[p], oracle[p], epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn delta_zero_returns_sigma() {
        let sigma = JacobiMatrix::new(vec![0.1, -0.2, 0.05], vec![0.6, 0.45]).unwrap();
        let eta = jacobi_lebesgue::<f64>(3).unwrap();
        let out = convolve(&sigma, &eta, 0.0, 3).unwrap();
        assert!(frobenius_distance(&out, &sigma).unwrap() <= 1e-15);
    }

    #[test]
    fn two_atoms_half() {
        let ifs = two_atom_ifs(0.5);
        let eta = ifs.sigma_jacobi().clone();
        let out = ifs.convolve(&eta, 2).unwrap();
        assert_eq!(out.a(0), 0.0);
        assert_abs_diff_eq!(out.b(1), 0.5f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn atomic_sigma_capped_matches_uncapped() {
        let m = DiscreteMeasure::new([(0.0, 0.125), (1.0, 0.375), (2.0, 0.375), (3.0, 0.125)]).unwrap();
        let ifs = IfsSpec::from_atoms(0.4, m.clone()).unwrap();
        let eta = jacobi_lebesgue::<f64>(40).unwrap();
        let capped = ifs.convolve(&eta, 40).unwrap();
        let j = jacobi_from_discrete(&m, 4).unwrap();
        let uncapped = convolve_coeffs(j.coeffs(), eta.coeffs(), 0.4, 40, None).unwrap().0;
        assert!(frobenius_distance(&capped, &uncapped).unwrap() <= 1e-12);
    }

    #[test]
    fn size_checks() {
        let s = jacobi_lebesgue::<f64>(3).unwrap();
        let e = jacobi_lebesgue::<f64>(5).unwrap();
        assert!(matches!(convolve(&s, &e, 0.3, 4), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(convolve(&e, &s, 0.3, 4), Err(Error::IndexOutOfRange { .. })));
        assert!(convolve(&e, &e, 1.0, 4).is_err());
        assert!(convolve(&e, &e, 0.5, 0).is_err());
    }

    #[test]
    fn fixpoint_delta_zero_one_step() {
        let sigma = jacobi_lebesgue::<f64>(8).unwrap();
        let init = JacobiMatrix::new(vec![0.3; 8], vec![0.2; 7]).unwrap();
        let (out, report) = fixpoint(&sigma, 0.0, 8, &init, &FixpointConfig::for_size(8)).unwrap();
        // first step lands on sigma, second confirms
        assert!(report.converged);
        assert!(report.iterations_run <= 2);
        assert_eq!(report.distances[report.iterations_run - 1], 0.0);
        assert!(frobenius_distance(&out, &sigma).unwrap() <= 1e-15);
    }

    #[test]
    fn fixpoint_reports_no_convergence() {
        let ifs = two_atom_ifs(0.3);
        let cfg = FixpointConfig { tolerance: 1e-300, max_iterations: 3, record_trajectory: true };
        let (_, report) = ifs.fixpoint_from_lebesgue(32, &cfg).unwrap();
        assert!(!report.converged);
        assert_eq!(report.distances.len(), 3);
        assert_eq!(report.trajectory.len(), 3);
        assert!(matches!(report.ensure_converged(), Err(Error::NoConvergence { iterations: 3, .. })));
    }
}
