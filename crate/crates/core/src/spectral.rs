//! Gaussian quadrature route to the IFS convolution.
//!
//! An `n`-point Gauss rule for `eta` and one for `sigma` combine into an
//! `n^2`-atom rule for `Phi_delta(sigma; eta)` that is exact on polynomials of
//! degree `2n - 1`; the Jacobi matrix of that atomic measure is the wanted
//! truncation.

use rayon::prelude::*;

use crate::convolution::{iterate, FixpointConfig, FixpointReport};
use crate::discrete::{jacobi_from_discrete, DiscreteMeasure};
use crate::eigen::tridiagonal_eigen;
use crate::error::{Error, Result};
use crate::ifs::{check_delta, IfsSpec};
use crate::jacobi::JacobiMatrix;
use crate::scalar::Scalar;

/// Gauss quadrature rule: ascending nodes, positive weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Scalar> GaussRule<T> {
    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Approximates `int f dmu`.
    pub fn integrate(&self, f: impl Fn(T) -> T) -> T {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| *w * f(*x)).sum()
    }

    /// The rule seen as an atomic measure.
    pub fn to_measure(&self) -> DiscreteMeasure<T> {
        DiscreteMeasure::normalized(self.nodes.iter().copied().zip(self.weights.iter().copied()))
            .expect("gauss weights are positive")
    }

    fn from_measure(m: &DiscreteMeasure<T>) -> Self {
        Self { nodes: m.nodes().to_vec(), weights: m.weights().to_vec() }
    }
}

/// Golub-Welsch rule from the leading `n x n` block of `j`.
pub fn gauss_rule<T: Scalar>(j: &JacobiMatrix<T>, n: usize) -> Result<GaussRule<T>> {
    if n == 0 {
        return Err(Error::InvalidParameter("rule order must be >= 1".into()));
    }
    if n > j.size() {
        return Err(Error::IndexOutOfRange { needed: n - 1, size: j.size() });
    }
    let (nodes, first) = tridiagonal_eigen(&j.diag()[..n], &j.offdiag()[..n - 1])?;
    let mut weights: Vec<T> = first.iter().map(|z| *z * *z).collect();
    let total: T = weights.iter().copied().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    Ok(GaussRule { nodes, weights })
}

/// Atoms `delta * x_j(eta) + (1 - delta) * x_k(sigma)` with product weights,
/// merged.
///
/// Atoms are generated row-major in `(j, k)`.
pub fn product_rule<T: Scalar>(rule_eta: &GaussRule<T>, rule_sigma: &GaussRule<T>, delta: T) -> DiscreteMeasure<T> {
    let dbar = T::one() - delta;
    let atoms: Vec<(T, T)> = rule_eta
        .nodes
        .par_iter()
        .zip(rule_eta.weights.par_iter())
        .flat_map_iter(|(xe, we)| {
            rule_sigma.nodes.iter().zip(&rule_sigma.weights).map(move |(xs, ws)| (delta * *xe + dbar * *xs, *we * *ws))
        })
        .collect();
    DiscreteMeasure::normalized(atoms).expect("product weights are positive").merged()
}

fn spectral_step<T: Scalar>(
    sigma_rule: &GaussRule<T>,
    eta: &JacobiMatrix<T>,
    delta: T,
    n: usize,
) -> Result<JacobiMatrix<T>> {
    let eta_rule = gauss_rule(eta, n)?;
    jacobi_from_discrete(&product_rule(&eta_rule, sigma_rule, delta), n)
}

impl<T: Scalar> IfsSpec<T> {
    /// Quadrature rule standing in for `sigma` at truncation `n`: the atoms
    /// themselves when atomic, the `n`-point Gauss rule otherwise.
    pub fn sigma_rule(&self, n: usize) -> Result<GaussRule<T>> {
        match self.sigma_atoms() {
            Some(atoms) => Ok(GaussRule::from_measure(atoms)),
            None => gauss_rule(self.sigma_jacobi(), n),
        }
    }

    /// Size-`n` Jacobi matrix of `Phi_delta(sigma; eta)` via product Gauss rules.
    pub fn convolve_spectral(&self, eta: &JacobiMatrix<T>, n: usize) -> Result<JacobiMatrix<T>> {
        spectral_step(&self.sigma_rule(n)?, eta, self.delta(), n)
    }

    /// Fixed-point iteration with [`IfsSpec::convolve_spectral`] as the step.
    pub fn fixpoint_spectral(
        &self,
        n: usize,
        init: &JacobiMatrix<T>,
        cfg: &FixpointConfig<T>,
    ) -> Result<(JacobiMatrix<T>, FixpointReport<T>)> {
        let sigma_rule = self.sigma_rule(n)?;
        iterate(n, init, cfg, |j| spectral_step(&sigma_rule, j, self.delta(), n))
    }
}

/// Spectral counterpart of [`crate::convolve`].
pub fn convolve_spectral<T: Scalar>(
    sigma: &JacobiMatrix<T>,
    eta: &JacobiMatrix<T>,
    delta: T,
    n: usize,
) -> Result<JacobiMatrix<T>> {
    check_delta(delta)?;
    IfsSpec::new(delta, sigma.clone())?.convolve_spectral(eta, n)
}

/// Spectral counterpart of [`crate::fixpoint`].
pub fn fixpoint_spectral<T: Scalar>(
    sigma: &JacobiMatrix<T>,
    delta: T,
    n: usize,
    init: &JacobiMatrix<T>,
    cfg: &FixpointConfig<T>,
) -> Result<(JacobiMatrix<T>, FixpointReport<T>)> {
    IfsSpec::new(delta, sigma.clone())?.fixpoint_spectral(n, init, cfg)
}
