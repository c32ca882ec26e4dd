//! Finite atomic measures and their Jacobi matrices.

use crate::error::{Error, Result};
use crate::jacobi::JacobiMatrix;
use crate::scalar::{degeneracy_threshold, merge_threshold, Scalar};

/// Probability measure made of finitely many weighted atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Scalar> DiscreteMeasure<T> {
    /// Builds a measure from `(node, weight)` pairs.
    ///
    /// Weights must be strictly positive and sum to one within
    /// `8 * eps * count`.
    pub fn new(atoms: impl IntoIterator<Item = (T, T)>) -> Result<Self> {
        let (nodes, weights): (Vec<T>, Vec<T>) = atoms.into_iter().unzip();
        Self::check_atoms(&nodes, &weights)?;
        let total: T = weights.iter().copied().sum();
        let tol = T::lit(8.0) * T::epsilon() * T::of_usize(weights.len());
        if (total - T::one()).abs() > tol {
            return Err(Error::DegenerateMeasure(format!("weights sum to {total}, expected 1")));
        }
        Ok(Self { nodes, weights })
    }

    /// Builds a measure after dividing the weights by their sum.
    pub fn normalized(atoms: impl IntoIterator<Item = (T, T)>) -> Result<Self> {
        let (nodes, mut weights): (Vec<T>, Vec<T>) = atoms.into_iter().unzip();
        Self::check_atoms(&nodes, &weights)?;
        let total: T = weights.iter().copied().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(Self { nodes, weights })
    }

    fn check_atoms(nodes: &[T], weights: &[T]) -> Result<()> {
        if nodes.is_empty() {
            return Err(Error::DegenerateMeasure("no atoms".into()));
        }
        if let Some(x) = nodes.iter().find(|x| !x.is_finite()) {
            return Err(Error::DegenerateMeasure(format!("non-finite node {x}")));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > T::zero() && w.is_finite())) {
            return Err(Error::DegenerateMeasure(format!("weight {w} is not strictly positive")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn atoms(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    /// Sorted copy with coincident nodes merged and their weights summed.
    ///
    /// Consecutive sorted nodes closer than `4 * eps * max(1, |node|)` collapse
    /// into one atom at their weighted mean.
    pub fn merged(&self) -> Self {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&i, &k| self.nodes[i].partial_cmp(&self.nodes[k]).expect("finite nodes"));
        let mut nodes: Vec<T> = Vec::with_capacity(self.len());
        let mut weights: Vec<T> = Vec::with_capacity(self.len());
        // running cluster: first node, weighted node sum, weight sum
        let mut cluster: Option<(T, T, T)> = None;
        for i in order {
            let (x, w) = (self.nodes[i], self.weights[i]);
            cluster = match cluster {
                Some((first, xs, ws)) if x - first <= merge_threshold(first) => Some((first, xs + x * w, ws + w)),
                Some((_, xs, ws)) => {
                    nodes.push(xs / ws);
                    weights.push(ws);
                    Some((x, x * w, w))
                }
                None => Some((x, x * w, w)),
            };
        }
        if let Some((_, xs, ws)) = cluster {
            nodes.push(xs / ws);
            weights.push(ws);
        }
        Self { nodes, weights }
    }

    /// Number of distinct nodes after merging.
    pub fn distinct_nodes(&self) -> usize {
        self.merged().len()
    }

    /// `sum w x^p` for `p = 0..=max_power`.
    pub fn moments(&self, max_power: usize) -> Vec<T> {
        let mut out = vec![T::zero(); max_power + 1];
        for (x, w) in self.atoms() {
            let mut xp = T::one();
            for m in out.iter_mut() {
                *m += w * xp;
                xp *= x;
            }
        }
        out
    }
}

/// Jacobi matrix of a discrete measure, truncated to size `n`.
///
/// Lanczos tridiagonalization of `diag(nodes)` started from `sqrt(weights)`,
/// with two passes of full reorthogonalization per step.
pub fn jacobi_from_discrete<T: Scalar>(measure: &DiscreteMeasure<T>, n: usize) -> Result<JacobiMatrix<T>> {
    if n == 0 {
        return Err(Error::InvalidParameter("size must be >= 1".into()));
    }
    let m = measure.merged();
    let count = m.len();
    if n > count {
        return Err(Error::RankExceeded { requested: n, available: count });
    }
    let x = m.nodes();
    let mut basis: Vec<Vec<T>> = Vec::with_capacity(n);
    basis.push(m.weights().iter().map(|w| w.sqrt()).collect());
    let mut a = Vec::with_capacity(n);
    let mut b = vec![T::zero()];
    let mut scale = x.iter().fold(T::zero(), |s, v| s.max(v.abs()));

    for j in 0..n {
        let q = &basis[j];
        let aj: T = x.iter().zip(q).map(|(xi, qi)| *xi * *qi * *qi).sum();
        a.push(aj);
        if j + 1 == n {
            break;
        }
        let mut r: Vec<T> = x.iter().zip(q).map(|(xi, qi)| (*xi - aj) * *qi).collect();
        if j > 0 {
            let bj = b[j];
            r.iter_mut().zip(&basis[j - 1]).for_each(|(ri, pi)| *ri -= bj * *pi);
        }
        for _ in 0..2 {
            for v in &basis {
                let c: T = r.iter().zip(v).map(|(ri, vi)| *ri * *vi).sum();
                r.iter_mut().zip(v).for_each(|(ri, vi)| *ri -= c * *vi);
            }
        }
        let norm = r.iter().map(|ri| *ri * *ri).sum::<T>().sqrt();
        scale = scale.max(aj.abs()).max(norm);
        if norm <= degeneracy_threshold(scale) {
            // numerically rank deficient although the nodes are distinct
            return Err(Error::RankExceeded { requested: n, available: j + 1 });
        }
        r.iter_mut().for_each(|ri| *ri /= norm);
        b.push(norm);
        basis.push(r);
    }
    Ok(JacobiMatrix::from_parts(a, b))
}
