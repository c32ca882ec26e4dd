//! Diagnostics computed from recurrence coefficients: Nevai-class deviations,
//! capacity estimates and power-law fits of their tails.
//!
//! Sequences indexed by `n` are stored from `n = 1`: element `i` holds the
//! value at `n = i + 1`. Fit windows use the same 1-based `n`.

use std::ops::RangeInclusive;

use crate::error::{Error, Result};
use crate::jacobi::JacobiMatrix;
use crate::scalar::Scalar;

/// Least-squares fit `value ~ prefactor * n^exponent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit<T> {
    pub exponent: T,
    pub prefactor: T,
    /// RMS of the residuals in `log value`.
    pub residual: T,
}

/// Ordinary least squares on `(log n, log values[n - 1])` over `window`.
pub fn powerlaw_fit<T: Scalar>(values: &[T], window: RangeInclusive<usize>) -> Result<PowerLawFit<T>> {
    let (lo, hi) = (*window.start(), *window.end());
    if lo == 0 || lo >= hi {
        return Err(Error::EmptyWindow);
    }
    if hi > values.len() {
        return Err(Error::IndexOutOfRange { needed: hi, size: values.len() });
    }
    let pts: Vec<(T, T)> = (lo..=hi)
        .map(|n| {
            let v = values[n - 1];
            if v > T::zero() && v.is_finite() {
                Ok((T::of_usize(n).ln(), v.ln()))
            } else {
                Err(Error::InvalidParameter(format!("value {v} at n = {n} is not positive")))
            }
        })
        .collect::<Result<_>>()?;
    let count = T::of_usize(pts.len());
    let mx = pts.iter().map(|p| p.0).sum::<T>() / count;
    let my = pts.iter().map(|p| p.1).sum::<T>() / count;
    let sxx: T = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: T = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let sse: T = pts
        .iter()
        .map(|p| {
            let r = p.1 - (intercept + exponent * p.0);
            r * r
        })
        .sum();
    Ok(PowerLawFit { exponent, prefactor: intercept.exp(), residual: (sse / count).sqrt() })
}

/// Convergence of the coefficients towards constants `(a_inf, b_inf)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NevaiReport<T> {
    pub a_inf: T,
    pub b_inf: T,
    /// Whether `a_inf` / `b_inf` were estimated from the tail rather than given.
    pub a_inf_estimated: bool,
    pub b_inf_estimated: bool,
    /// `|a_n - a_inf| + |b_n - b_inf|`.
    pub deviations: Vec<T>,
    /// `|a_n - a_inf|`.
    pub a_deviations: Vec<T>,
    /// `|b_n - b_inf|`.
    pub b_deviations: Vec<T>,
    /// `S_n = sum_{j <= n} deviations_j`.
    pub partial_sums: Vec<T>,
    pub window: RangeInclusive<usize>,
    /// Fit of `deviations` over `window`; `None` when some value there is zero
    /// or the default window is too short.
    pub fit: Option<PowerLawFit<T>>,
}

/// Default fit window `[len / 10, len]` over a sequence of length `len`.
pub fn default_window(len: usize) -> RangeInclusive<usize> {
    (len / 10).max(1)..=len
}

fn tail_mean<T: Scalar>(xs: &[T]) -> T {
    let k = (xs.len() / 10).max(1);
    xs[xs.len() - k..].iter().copied().sum::<T>() / T::of_usize(k)
}

/// Deviations from `(a_inf, b_inf)` for `n = 1..size-1`.
///
/// Missing limits are estimated as the mean over the last 10% of entries and
/// flagged in the report. The default window is [`default_window`].
pub fn nevai_report<T: Scalar>(
    j: &JacobiMatrix<T>,
    a_inf: Option<T>,
    b_inf: Option<T>,
    window: Option<RangeInclusive<usize>>,
) -> Result<NevaiReport<T>> {
    if j.size() < 2 {
        return Err(Error::InvalidParameter("nevai report needs size >= 2".into()));
    }
    let a = &j.diag()[1..];
    let b = j.offdiag();
    let (a_inf_estimated, b_inf_estimated) = (a_inf.is_none(), b_inf.is_none());
    let a_inf = a_inf.unwrap_or_else(|| tail_mean(a));
    let b_inf = b_inf.unwrap_or_else(|| tail_mean(b));
    let a_deviations: Vec<T> = a.iter().map(|x| (*x - a_inf).abs()).collect();
    let b_deviations: Vec<T> = b.iter().map(|x| (*x - b_inf).abs()).collect();
    let deviations: Vec<T> = a_deviations.iter().zip(&b_deviations).map(|(x, y)| *x + *y).collect();
    let partial_sums = deviations
        .iter()
        .scan(T::zero(), |s, d| {
            *s += *d;
            Some(*s)
        })
        .collect();
    let explicit = window.is_some();
    let window = window.unwrap_or_else(|| default_window(deviations.len()));
    let fit = match powerlaw_fit(&deviations, window.clone()) {
        Ok(f) => Some(f),
        Err(Error::InvalidParameter(_)) => None,
        Err(Error::EmptyWindow) if !explicit => None,
        Err(e) => return Err(e),
    };
    Ok(NevaiReport {
        a_inf,
        b_inf,
        a_inf_estimated,
        b_inf_estimated,
        deviations,
        a_deviations,
        b_deviations,
        partial_sums,
        window,
        fit,
    })
}

/// Running estimates of the capacity exponent `C = lim -(1/n) sum log b_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityReport<T> {
    /// `c_n = -(1/n) sum_{j <= n} log b_j`.
    pub estimates: Vec<T>,
    /// `c_n` at the largest `n`.
    pub final_estimate: T,
    /// Same estimate computed from the Jacobi matrix of `sigma`, when given.
    pub sigma_estimate: Option<T>,
    /// `(C_sigma, C_sigma + log(1 / (1 - delta)))`, when `sigma` is given.
    pub bounds: Option<(T, T)>,
}

impl<T: Scalar> CapacityReport<T> {
    /// Whether the final estimate lies in `bounds` widened by `slack` on both sides.
    pub fn within_bounds(&self, slack: T) -> Option<bool> {
        self.bounds.map(|(lo, hi)| self.final_estimate >= lo - slack && self.final_estimate <= hi + slack)
    }
}

fn running_capacity<T: Scalar>(j: &JacobiMatrix<T>) -> Vec<T> {
    let mut sum = T::zero();
    j.offdiag()
        .iter()
        .enumerate()
        .map(|(i, b)| {
            sum -= b.ln();
            sum / T::of_usize(i + 1)
        })
        .collect()
}

/// Capacity estimates from `j`; with `sigma = Some((J_sigma, delta))` also the
/// bracket `[C_sigma, C_sigma + log(1 / (1 - delta))]`.
pub fn capacity_report<T: Scalar>(
    j: &JacobiMatrix<T>,
    sigma: Option<(&JacobiMatrix<T>, T)>,
) -> Result<CapacityReport<T>> {
    if j.size() < 2 {
        return Err(Error::InvalidParameter("capacity report needs size >= 2".into()));
    }
    let estimates = running_capacity(j);
    let final_estimate = *estimates.last().expect("size >= 2");
    let (sigma_estimate, bounds) = match sigma {
        Some((js, delta)) => {
            crate::ifs::check_delta(delta)?;
            if js.size() < 2 {
                return Err(Error::InvalidParameter("sigma matrix needs size >= 2".into()));
            }
            let cs = *running_capacity(js).last().expect("size >= 2");
            (Some(cs), Some((cs, cs - (T::one() - delta).ln())))
        }
        None => (None, None),
    };
    Ok(CapacityReport { estimates, final_estimate, sigma_estimate, bounds })
}
