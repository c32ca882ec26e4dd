//! Standard measures and IFS used in tests, benchmarks and the CLI.

use crate::closure::closure_atoms;
use crate::discrete::DiscreteMeasure;
use crate::error::Result;
use crate::ifs::IfsSpec;
use crate::inverse::fibonacci_jacobi;
use crate::jacobi::{jacobi_lebesgue, JacobiMatrix};
use crate::scalar::Scalar;

/// `(D_{-1} + D_1) / 2`.
pub fn two_atoms<T: Scalar>() -> DiscreteMeasure<T> {
    DiscreteMeasure::new([(-T::one(), T::lit(0.5)), (T::one(), T::lit(0.5))]).expect("valid atoms")
}

/// Atoms `0, 1, 2, 3` with weights `1/8, 3/8, 3/8, 1/8`.
pub fn refinable_atoms<T: Scalar>() -> DiscreteMeasure<T> {
    let w = [0.125, 0.375, 0.375, 0.125];
    DiscreteMeasure::new((0..4).map(|j| (T::of_usize(j), T::lit(w[j])))).expect("valid atoms")
}

/// Single atom at `x`.
pub fn single_atom<T: Scalar>(x: T) -> DiscreteMeasure<T> {
    DiscreteMeasure::new([(x, T::one())]).expect("valid atom")
}

/// `1 / p` with `p` the real root of `x^3 = x + 1` (plastic number).
pub fn pisot_delta<T: Scalar>() -> T {
    let mut p = T::lit(1.3);
    for _ in 0..60 {
        let step = (p * p * p - p - T::one()) / (T::lit(3.0) * p * p - T::one());
        p -= step;
        if step.abs() <= T::epsilon() * p {
            break;
        }
    }
    T::one() / p
}

/// Contraction ratios of the Bernoulli convolutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bernoulli {
    /// `2^{-1/2}`: absolutely continuous.
    Sqrt2,
    /// `3/4`.
    ThreeQuarters,
    /// Reciprocal of the plastic number: singular continuous.
    Pisot,
}

impl Bernoulli {
    pub const ALL: [Bernoulli; 3] = [Bernoulli::Sqrt2, Bernoulli::ThreeQuarters, Bernoulli::Pisot];

    pub fn delta<T: Scalar>(self) -> T {
        match self {
            Bernoulli::Sqrt2 => T::FRAC_1_SQRT_2(),
            Bernoulli::ThreeQuarters => T::lit(0.75),
            Bernoulli::Pisot => pisot_delta(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Bernoulli::Sqrt2 => "bernoulli-sqrt2",
            Bernoulli::ThreeQuarters => "bernoulli-3q4",
            Bernoulli::Pisot => "bernoulli-pisot",
        }
    }

    /// Two equal maps with fixed points `-1, 1`; the attractor fills `[-1, 1]`
    /// and `b_n -> 1/2`.
    pub fn ifs<T: Scalar>(self) -> IfsSpec<T> {
        IfsSpec::from_atoms(self.delta(), two_atoms()).expect("valid ifs")
    }
}

/// Two maps `s -> 0.3 s -+ 0.7`: a Cantor measure on `[-1, 1]`.
pub fn cantor_ifs<T: Scalar>() -> IfsSpec<T> {
    IfsSpec::from_atoms(T::lit(0.3), two_atoms()).expect("valid ifs")
}

/// `delta = 1/4` with `sigma` the Cantor measure of [`cantor_ifs`], truncated to `n`.
pub fn cantor_sigma_ifs<T: Scalar>(n: usize) -> Result<IfsSpec<T>> {
    IfsSpec::new(T::lit(0.25), closure_atoms(&two_atoms(), T::lit(0.3), n)?)
}

/// `delta = 1/4` with `sigma` the Lebesgue measure on `[-1, 1]`, truncated to `n`.
pub fn lebesgue_sigma_ifs<T: Scalar>(n: usize) -> Result<IfsSpec<T>> {
    IfsSpec::new(T::lit(0.25), jacobi_lebesgue(n)?)
}

/// Four maps with ratio `1/2` over [`refinable_atoms`]; `a_n = 3/2`, `b_n -> 3/4`.
pub fn refinable_ifs<T: Scalar>() -> IfsSpec<T> {
    IfsSpec::from_atoms(T::lit(0.5), refinable_atoms()).expect("valid ifs")
}

/// Two maps with ratio `1/2`: the invariant measure is Lebesgue on `[-1, 1]`.
pub fn lebesgue_ifs<T: Scalar>() -> IfsSpec<T> {
    IfsSpec::from_atoms(T::lit(0.5), two_atoms()).expect("valid ifs")
}

/// Fibonacci target with `A = 2/5`, `B = 1/2`.
pub fn fibonacci<T: Scalar>(n: usize) -> Result<JacobiMatrix<T>> {
    fibonacci_jacobi(n, T::lit(0.4), T::lit(0.5))
}

/// Content of a named fixture.
#[derive(Debug, Clone, PartialEq)]
pub enum FixtureData<T> {
    /// Finite IFS: contraction ratio and fixed-point atoms.
    Ifs { delta: T, atoms: DiscreteMeasure<T> },
    /// Explicit Jacobi matrix.
    Jacobi(JacobiMatrix<T>),
}

/// Every named fixture; Jacobi-valued ones are built at size `n`.
pub fn named_fixtures<T: Scalar>(n: usize) -> Result<Vec<(&'static str, FixtureData<T>)>> {
    let ifs = |spec: IfsSpec<T>| FixtureData::Ifs {
        delta: spec.delta(),
        atoms: spec.sigma_atoms().expect("atomic fixture").clone(),
    };
    let mut out = vec![("lebesgue", FixtureData::Jacobi(jacobi_lebesgue(n)?)), ("two-atom", ifs(cantor_ifs()))];
    for b in Bernoulli::ALL {
        out.push((b.name(), ifs(b.ifs())));
    }
    out.push(("refinable-1", ifs(refinable_ifs())));
    out.push(("fibonacci", FixtureData::Jacobi(fibonacci(n)?)));
    Ok(out)
}
