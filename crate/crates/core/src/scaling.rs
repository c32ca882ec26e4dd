//! Scaling matrices and the recurrences that advance them.
//!
//! `Omega^n_{k,r}` expands the degree-`n` orthonormal polynomial of the
//! convolved measure, evaluated at `delta * s + (1 - delta) * beta`, in the
//! tensor basis `p_k(eta; s) p_r(sigma; beta)`. The index `k` follows `eta`,
//! the index `r` follows `sigma`, and entries vanish outside `k + r <= n`.
//!
//! The kernels in this module are shared by the convolution, closure and
//! inverse drivers. Each driver differs only in which of the three sets of
//! coefficients is unknown at a given step.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result, Step};
use crate::jacobi::{Coeffs, JacobiMatrix};
use crate::scalar::{degeneracy_threshold, normalization_tolerance, Scalar};

/// Row count above which the `Omega~` update runs on the rayon pool.
const PARALLEL_ROWS: usize = 192;

/// Triangular array `Omega^n_{k,r}`, `k + r <= n`, optionally limited to `r < cap`.
///
/// Stored as a row-major packed triangle: row `k` holds `r = 0..=min(n - k, cap - 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingMatrix<T> {
    order: usize,
    cap: Option<usize>,
    offsets: Vec<usize>,
    data: Vec<T>,
}

impl<T: Scalar> ScalingMatrix<T> {
    /// Zero matrix of the given order.
    pub fn zeros(order: usize, cap: Option<usize>) -> Self {
        let mut m = Self { order: 0, cap, offsets: Vec::new(), data: Vec::new() };
        m.reshape(order);
        m
    }

    /// `Omega^0 = [1]`.
    pub fn identity(cap: Option<usize>) -> Self {
        let mut m = Self::zeros(0, cap);
        m.data[0] = T::one();
        m
    }

    /// Resizes to `order`, zeroing every entry and keeping the allocation.
    fn reshape(&mut self, order: usize) {
        self.order = order;
        self.offsets.clear();
        let mut off = 0;
        for k in 0..=order {
            self.offsets.push(off);
            off += self.row_len_for(order, k);
        }
        self.offsets.push(off);
        self.data.clear();
        self.data.resize(off, T::zero());
    }

    /// Like `reshape` but leaves stale values in place; every slot must be
    /// written before it is read.
    fn reshape_for_overwrite(&mut self, order: usize) {
        self.order = order;
        self.offsets.clear();
        let mut off = 0;
        for k in 0..=order {
            self.offsets.push(off);
            off += self.row_len_for(order, k);
        }
        self.offsets.push(off);
        self.data.resize(off, T::zero());
    }

    #[inline]
    fn row_len_for(&self, order: usize, k: usize) -> usize {
        let full = order - k + 1;
        match self.cap {
            Some(c) => full.min(c),
            None => full,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn column_cap(&self) -> Option<usize> {
        self.cap
    }

    /// Row `k`: entries `r = 0..row_len(k)`. Empty for `k > order`.
    #[inline]
    pub fn row(&self, k: usize) -> &[T] {
        if k > self.order {
            return &[];
        }
        &self.data[self.offsets[k]..self.offsets[k + 1]]
    }

    /// Total accessor; zero outside the stored triangle.
    #[inline]
    pub fn get(&self, k: isize, r: isize) -> T {
        if k < 0 || r < 0 {
            return T::zero();
        }
        self.row(k as usize).get(r as usize).copied().unwrap_or_else(T::zero)
    }

    /// Sets an in-triangle entry; writes outside the stored triangle are dropped
    /// only when the value is zero.
    pub fn set(&mut self, k: usize, r: usize, value: T) {
        match self.slot(k, r) {
            Some(i) => self.data[i] = value,
            None => assert!(value == T::zero(), "write of nonzero value outside triangle at ({k},{r})"),
        }
    }

    fn slot(&self, k: usize, r: usize) -> Option<usize> {
        (k <= self.order && r < self.offsets[k + 1] - self.offsets[k]).then(|| self.offsets[k] + r)
    }

    /// `sum (Omega_{k,r})^2`.
    pub fn frobenius_sq(&self) -> T {
        self.data.iter().map(|x| *x * *x).sum()
    }

    /// Sum of squares excluding the extremal entries `(order, 0)` and `(0, order)`.
    pub fn primed_sum_sq(&self) -> T {
        let n = self.order;
        let mut s = T::zero();
        for k in 0..=n {
            for (r, x) in self.row(k).iter().enumerate() {
                if (k == n && r == 0) || (k == 0 && r == n) {
                    continue;
                }
                s += *x * *x;
            }
        }
        s
    }

    /// Extremal entry `Omega_{n,0}`.
    pub fn eta_corner(&self) -> T {
        self.get(self.order as isize, 0)
    }

    /// Extremal entry `Omega_{0,n}` (zero when capped away).
    pub fn sigma_corner(&self) -> T {
        self.get(0, self.order as isize)
    }

    /// Debug dump: `omega v1 <n>` then one line per row.
    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "omega v1 {}", self.order)?;
        for k in 0..=self.order {
            let row: Vec<String> = self.row(k).iter().map(|x| format!("{:.16e}", x.as_f64())).collect();
            writeln!(w, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

/// Rolling pair `(Omega^n, Omega^{n-1})` plus a scratch buffer for `Omega~^{n+1}`.
#[derive(Debug, Clone)]
pub struct ScalingState<T> {
    curr: ScalingMatrix<T>,
    prev: ScalingMatrix<T>,
    tilde: ScalingMatrix<T>,
    column_cap: Option<usize>,
    max_normalization_error: T,
}

impl<T: Scalar> ScalingState<T> {
    /// State at `n = 0`. `column_cap = Some(M)` when `sigma` has `M` atoms.
    pub fn new(column_cap: Option<usize>) -> Self {
        if let Some(m) = column_cap {
            assert!(m >= 1, "column cap must be positive");
        }
        Self {
            curr: ScalingMatrix::identity(column_cap),
            prev: ScalingMatrix::zeros(0, column_cap),
            tilde: ScalingMatrix::zeros(1, column_cap),
            column_cap,
            max_normalization_error: T::zero(),
        }
    }

    /// Current order `n`.
    pub fn order(&self) -> usize {
        self.curr.order()
    }

    pub fn column_cap(&self) -> Option<usize> {
        self.column_cap
    }

    pub fn current(&self) -> &ScalingMatrix<T> {
        &self.curr
    }

    /// `Omega^{n-1}` (the zero matrix at `n = 0`).
    pub fn previous(&self) -> &ScalingMatrix<T> {
        &self.prev
    }

    /// Scratch `Omega~^{n+1}` filled by the last `omega_tilde` call.
    pub fn tilde(&self) -> &ScalingMatrix<T> {
        &self.tilde
    }

    pub(crate) fn tilde_mut(&mut self) -> &mut ScalingMatrix<T> {
        &mut self.tilde
    }

    /// Largest `|sum Omega^2 - 1|` observed after any normalization so far.
    pub fn max_normalization_error(&self) -> T {
        self.max_normalization_error
    }

    /// Divides `Omega~^{n+1}` by `b_{n+1}` and rolls the buffers forward.
    pub fn advance(&mut self, b_next: T) {
        let inv = T::one() / b_next;
        let mut total = T::zero();
        for x in self.tilde.data.iter_mut() {
            *x *= inv;
            total += *x * *x;
        }
        // prev <- curr, curr <- tilde, tilde <- old prev (reused allocation)
        std::mem::swap(&mut self.prev, &mut self.curr);
        std::mem::swap(&mut self.curr, &mut self.tilde);
        let next = self.curr.order() + 1;
        self.tilde.reshape_for_overwrite(next);

        let err = (total - T::one()).abs();
        if err > self.max_normalization_error {
            self.max_normalization_error = err;
        }
        debug_assert!(
            err <= normalization_tolerance::<T>(),
            "scaling matrix normalization violated at order {}: |sum - 1| = {err:e}",
            self.curr.order()
        );
    }
}

/// Decomposition of the diagonal recurrence at order `n`.
///
/// `a_n(etabar) = partial + coef_eta * a_n(eta) + coef_sigma * a_n(sigma)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagTerms<T> {
    /// Every term except the two highest-index diagonal contributions.
    pub partial: T,
    /// `delta * (Omega_{n,0})^2`.
    pub coef_eta: T,
    /// `(1 - delta) * (Omega_{0,n})^2`.
    pub coef_sigma: T,
}

/// `sigma` coefficients `a_r`, `b_r` for `r = 0..len`, zero-extended.
fn padded<T: Scalar>(sigma: Coeffs<'_, T>, len: usize) -> (Vec<T>, Vec<T>) {
    ((0..len).map(|r| sigma.a(r)).collect(), (0..len).map(|r| sigma.b(r)).collect())
}

/// Splits the diagonal recurrence into known part and highest-index coefficients.
///
/// Summation runs over ascending `k`, then `r`, with per-row partial sums
/// combined in row order.
pub fn diag_terms<T: Scalar>(
    omega: &ScalingMatrix<T>,
    eta: Coeffs<'_, T>,
    sigma: Coeffs<'_, T>,
    delta: T,
) -> DiagTerms<T> {
    let n = omega.order();
    let dbar = T::one() - delta;
    let two = T::lit(2.0);
    let (mut sa, sb) = padded(sigma, n + 1);
    // the a_n(sigma) term is returned as a coefficient
    sa[n] = T::zero();
    let zeros = vec![T::zero(); n + 1];
    let row_sum = |k: usize| -> T {
        let row = omega.row(k);
        let len = row.len();
        let above = if k > 0 { &omega.row(k - 1)[..len] } else { &zeros[..len] };
        let (sa, sb) = (&sa[..len], &sb[..len]);
        let ak = if k == n { T::zero() } else { eta.a(k) };
        let bk = eta.b(k);
        let mut s = T::zero();
        let mut left = T::zero();
        for r in 0..len {
            let w = row[r];
            s += w * (delta * (ak * w + two * bk * above[r]) + dbar * (sa[r] * w + two * sb[r] * left));
            left = w;
        }
        s
    };
    let partial = if n + 1 >= PARALLEL_ROWS {
        let rows: Vec<T> = (0..=n).into_par_iter().map(row_sum).collect();
        rows.into_iter().fold(T::zero(), |s, x| s + x)
    } else {
        (0..=n).map(row_sum).fold(T::zero(), |s, x| s + x)
    };
    let ce = omega.eta_corner();
    let cs = omega.sigma_corner();
    DiagTerms { partial, coef_eta: delta * ce * ce, coef_sigma: dbar * cs * cs }
}

/// Fills the non-extremal entries of `Omega~^{n+1}` into the state's scratch
/// buffer and returns their sum of squares.
///
/// `a_n_bar` and `b_n_bar` are `a_n` and `b_n` of the convolved measure.
/// Extremal entries `(n+1, 0)` and `(0, n+1)` are left at zero.
pub fn omega_tilde_interior<T: Scalar>(
    state: &mut ScalingState<T>,
    eta: Coeffs<'_, T>,
    sigma: Coeffs<'_, T>,
    a_n_bar: T,
    b_n_bar: T,
    delta: T,
) -> T {
    let n = state.curr.order();
    let dbar = T::one() - delta;
    let curr = &state.curr;
    let prev = &state.prev;
    let tilde = &mut state.tilde;
    debug_assert_eq!(tilde.order(), n + 1);
    let (sa, sb) = padded(sigma, n + 3);
    let zeros = vec![T::zero(); n + 2];

    let offsets = tilde.offsets.clone();
    let mut rows: Vec<(usize, &mut [T])> = Vec::with_capacity(n + 2);
    let mut rest = tilde.data.as_mut_slice();
    for j in 0..=n + 1 {
        let len = offsets[j + 1] - offsets[j];
        let (head, tail) = rest.split_at_mut(len);
        rows.push((j, head));
        rest = tail;
    }

    let fill = |(j, out): (usize, &mut [T])| -> T {
        let len = out.len();
        let here = curr.row(j);
        let below = curr.row(j + 1);
        let above = if j > 0 { curr.row(j - 1) } else { &zeros[..len] };
        let older = prev.row(j);
        let (aj, bj, bj1) = (eta.a(j), eta.b(j), eta.b(j + 1));
        let at = |s: &[T], i: usize| s.get(i).copied().unwrap_or_else(T::zero);
        let entry = |l: usize| -> T {
            if (j == n + 1 && l == 0) || (j == 0 && l == n + 1) {
                return T::zero();
            }
            let w = at(here, l);
            let left = if l > 0 { at(here, l - 1) } else { T::zero() };
            let eta_part = aj * w + bj1 * at(below, l) + bj * at(above, l);
            let sigma_part = sa[l] * w + sb[l + 1] * at(here, l + 1) + sb[l] * left;
            delta * eta_part + dbar * sigma_part - a_n_bar * w - b_n_bar * at(older, l)
        };

        // bulk 1..m has every neighbour in range; the ragged ends go through `entry`
        let m = len.min(here.len().saturating_sub(1)).min(below.len()).min(older.len()).max(1);
        let mut ss = T::zero();
        let v0 = entry(0);
        out[0] = v0;
        ss += v0 * v0;
        if m > 1 {
            let (h, bl, ab, ol) = (&here[..=m], &below[..m], &above[..m], &older[..m]);
            let (ra, rb, rb1) = (&sa[..m], &sb[..m], &sb[1..=m]);
            let o = &mut out[..m];
            for l in 1..m {
                let w = h[l];
                let eta_part = aj * w + bj1 * bl[l] + bj * ab[l];
                let sigma_part = ra[l] * w + rb1[l] * h[l + 1] + rb[l] * h[l - 1];
                let v = delta * eta_part + dbar * sigma_part - a_n_bar * w - b_n_bar * ol[l];
                o[l] = v;
                ss += v * v;
            }
        }
        for (l, o) in out.iter_mut().enumerate().take(len).skip(m.max(1)) {
            let v = entry(l);
            *o = v;
            ss += v * v;
        }
        ss
    };

    if n + 2 >= PARALLEL_ROWS {
        let sums: Vec<T> = rows.into_par_iter().map(fill).collect();
        sums.into_iter().fold(T::zero(), |s, x| s + x)
    } else {
        rows.into_iter().map(fill).fold(T::zero(), |s, x| s + x)
    }
}

fn require_cover<T: Scalar>(j: &JacobiMatrix<T>, needed: usize) -> Result<()> {
    if needed >= j.size() {
        return Err(Error::IndexOutOfRange { needed, size: j.size() });
    }
    Ok(())
}

/// `a_n` of `Phi_delta(sigma; eta)` at the state's current order `n`.
pub fn diag_step<T: Scalar>(
    state: &ScalingState<T>,
    eta: &JacobiMatrix<T>,
    sigma: &JacobiMatrix<T>,
    delta: T,
) -> Result<T> {
    let n = state.order();
    require_cover(eta, n)?;
    require_cover(sigma, n)?;
    let t = diag_terms(state.current(), eta.coeffs(), sigma.coeffs(), delta);
    Ok(t.partial + t.coef_eta * eta.a(n) + t.coef_sigma * sigma.a(n))
}

/// Unnormalized `Omega~^{n+1}` including both extremal entries.
///
/// `etabar_partial` must already hold `a_n` and `b_n` of the convolved measure.
pub fn omega_tilde_step<T: Scalar>(
    state: &mut ScalingState<T>,
    eta: &JacobiMatrix<T>,
    sigma: &JacobiMatrix<T>,
    etabar_partial: &JacobiMatrix<T>,
    delta: T,
) -> Result<ScalingMatrix<T>> {
    let n = state.order();
    require_cover(eta, n + 1)?;
    require_cover(sigma, n + 1)?;
    require_cover(etabar_partial, n)?;
    omega_tilde_interior(state, eta.coeffs(), sigma.coeffs(), etabar_partial.a(n), etabar_partial.b(n), delta);
    let (ce, cs) = (state.curr.eta_corner(), state.curr.sigma_corner());
    let dbar = T::one() - delta;
    state.tilde.set(n + 1, 0, delta * ce * eta.b(n + 1));
    state.tilde.set(0, n + 1, dbar * cs * sigma.b(n + 1));
    Ok(state.tilde.clone())
}

/// `b^2_{n+1}` of `Phi_delta(sigma; eta)` from the primed sum.
pub(crate) fn b_sq_convolution<T: Scalar>(
    primed: T,
    b_eta_next: T,
    b_sigma_next: T,
    omega_curr: &ScalingMatrix<T>,
    delta: T,
) -> T {
    let dbar = T::one() - delta;
    let e = delta * b_eta_next * omega_curr.eta_corner();
    let s = dbar * b_sigma_next * omega_curr.sigma_corner();
    e * e + s * s + primed
}

/// `b^2_{n+1}(mu)` of the invariant measure from the primed sum.
pub(crate) fn b_sq_closure<T: Scalar>(
    primed: T,
    b_sigma_next: T,
    omega_curr: &ScalingMatrix<T>,
    delta: T,
    n: usize,
) -> T {
    let dbar = T::one() - delta;
    let s = dbar * b_sigma_next * omega_curr.sigma_corner();
    (s * s + primed) / (T::one() - delta.powi(2 * (n as i32 + 1)))
}

/// Positive square root of `b_sq`, or `DegenerateStep` below the shared threshold.
pub(crate) fn checked_sqrt<T: Scalar>(b_sq: T, scale: T, step: Step, n: usize) -> Result<T> {
    let thr = degeneracy_threshold(scale);
    if !(b_sq > thr * thr) {
        return Err(Error::DegenerateStep { step, n, value: b_sq.as_f64() });
    }
    Ok(b_sq.sqrt())
}

/// `b_{n+1}` of `Phi_delta(sigma; eta)`.
///
/// `omega_tilde` must have its interior filled; its extremal entries are ignored.
pub fn offdiag_step_convolution<T: Scalar>(
    omega_tilde: &ScalingMatrix<T>,
    b_eta_next: T,
    b_sigma_next: T,
    omega_curr: &ScalingMatrix<T>,
    delta: T,
) -> Result<T> {
    let b_sq = b_sq_convolution(omega_tilde.primed_sum_sq(), b_eta_next, b_sigma_next, omega_curr, delta);
    checked_sqrt(b_sq, T::one(), Step::Convolution, omega_curr.order())
}

/// `b_{n+1}(mu)` of the invariant measure (`eta = etabar = mu`).
pub fn offdiag_step_closure<T: Scalar>(
    omega_tilde: &ScalingMatrix<T>,
    b_sigma_next: T,
    omega_curr: &ScalingMatrix<T>,
    delta: T,
    n: usize,
) -> Result<T> {
    let b_sq = b_sq_closure(omega_tilde.primed_sum_sq(), b_sigma_next, omega_curr, delta, n);
    checked_sqrt(b_sq, T::one(), Step::Closure, n)
}
