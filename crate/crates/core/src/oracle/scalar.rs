//! Exact number types the oracle computes in.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::dynamics::exact::Filter;

pub trait Scalar:
    Clone + PartialEq + fmt::Debug + fmt::Display + Zero + One + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self>
{
    fn from_rational(r: &BigRational) -> Self;
}

impl Scalar for BigRational {
    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }
}

/// Turns the λ filter into a number of the oracle's scalar type.
pub trait Bias {
    type Value: Scalar;
    fn acceptance(&self, filter: Filter, edge_delta: i32) -> Self::Value;
}

/// λ as an exact rational.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactLambda(pub BigRational);

impl ExactLambda {
    pub fn new(numer: i64, denom: i64) -> Self {
        ExactLambda(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn integer(n: i64) -> Self {
        Self::new(n, 1)
    }
}

impl Bias for ExactLambda {
    type Value = BigRational;
    fn acceptance(&self, filter: Filter, edge_delta: i32) -> BigRational {
        let one = BigRational::one();
        match filter {
            Filter::Metropolis => {
                let p = pow(&self.0, edge_delta);
                if p > one {
                    one
                } else {
                    p
                }
            }
            Filter::DivideOnce if edge_delta < 0 => one / &self.0,
            Filter::DivideOnce => one,
        }
    }
}

fn pow(x: &BigRational, e: i32) -> BigRational {
    let mut out = BigRational::one();
    for _ in 0..e.unsigned_abs() {
        out *= x;
    }
    if e < 0 {
        out.recip()
    } else {
        out
    }
}

/// λ kept symbolic: values are polynomials in `1/λ`. Valid for λ ≥ 1, where
/// edge-gaining moves are always accepted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SymbolicLambda;

impl Bias for SymbolicLambda {
    type Value = InvLambdaPoly;
    fn acceptance(&self, filter: Filter, edge_delta: i32) -> InvLambdaPoly {
        InvLambdaPoly::monomial(BigRational::one(), filter.inverse_lambda_power(edge_delta) as usize)
    }
}

/// `c0 + c1/λ + c2/λ² + ...` with exact rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct InvLambdaPoly {
    coeffs: Vec<BigRational>,
}

impl InvLambdaPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        InvLambdaPoly { coeffs }
    }

    pub fn constant(c: BigRational) -> Self {
        Self::new(vec![c])
    }

    pub fn monomial(c: BigRational, power: usize) -> Self {
        let mut coeffs = vec![BigRational::zero(); power + 1];
        coeffs[power] = c;
        Self::new(coeffs)
    }

    /// Coefficient of `λ^-power`.
    pub fn coefficient(&self, power: usize) -> BigRational {
        self.coeffs.get(power).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, lambda: &BigRational) -> BigRational {
        let inv = lambda.recip();
        self.coeffs.iter().rev().fold(BigRational::zero(), |acc, c| acc * &inv + c)
    }
}

impl Add for InvLambdaPoly {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        Self::new((0..len).map(|i| self.coefficient(i) + rhs.coefficient(i)).collect())
    }
}

impl Neg for InvLambdaPoly {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(self.coeffs.into_iter().map(|c| -c).collect())
    }
}

impl Sub for InvLambdaPoly {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Mul for InvLambdaPoly {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        if self.coeffs.is_empty() || rhs.coeffs.is_empty() {
            return Self::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }
}

impl Zero for InvLambdaPoly {
    fn zero() -> Self {
        InvLambdaPoly { coeffs: Vec::new() }
    }
    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
}

impl One for InvLambdaPoly {
    fn one() -> Self {
        Self::constant(BigRational::one())
    }
}

impl Scalar for InvLambdaPoly {
    fn from_rational(r: &BigRational) -> Self {
        Self::constant(r.clone())
    }
}

impl fmt::Display for InvLambdaPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let a = c.abs();
            match k {
                0 => write!(f, "{a}")?,
                1 => write!(f, "{a}/λ")?,
                _ => write!(f, "{a}/λ^{k}")?,
            }
        }
        Ok(())
    }
}
