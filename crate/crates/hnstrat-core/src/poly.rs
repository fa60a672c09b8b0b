//! Polynomials with rational coefficients, totally ordered by their values at
//! large arguments.
//!
//! `p <= q` iff `p(x) <= q(x)` for all sufficiently large `x`, which is
//! lexicographic comparison of coefficients from the top degree down. The zero
//! polynomial has a distinguished degree marker [`Degree::NegInf`]; it is never
//! conflated with degree 0.

use crate::error::Error;
use crate::rational::Rational;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};

/// Coefficients ascending by degree, trailing zeros trimmed.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct Poly {
    coeffs: Vec<Rational>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Degree {
    /// Degree of the zero polynomial.
    NegInf,
    Of(usize),
}

impl Poly {
    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn from_coeffs(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Rational::is_zero) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn constant(c: Rational) -> Self {
        Poly::from_coeffs(vec![c])
    }

    /// `c1*x + c0`.
    pub fn linear(c1: i64, c0: i64) -> Self {
        Poly::from_coeffs(vec![Rational::from_int(c0), Rational::from_int(c1)])
    }

    pub fn monomial(degree: usize, coeff: Rational) -> Self {
        let mut coeffs = vec![Rational::zero(); degree + 1];
        coeffs[degree] = coeff;
        Poly::from_coeffs(coeffs)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn degree(&self) -> Degree {
        if self.coeffs.is_empty() {
            Degree::NegInf
        } else {
            Degree::Of(self.coeffs.len() - 1)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient of `x^k` (zero beyond the degree).
    pub fn coeff(&self, k: usize) -> Rational {
        self.coeffs.get(k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn leading(&self) -> Option<&Rational> {
        self.coeffs.last()
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_int(&self, n: i64) -> Rational {
        self.eval(&Rational::from_int(n))
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly::from_coeffs(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn div_scalar(&self, c: &Rational) -> Result<Poly, Error> {
        if c.is_zero() {
            return Err(Error::DenominatorZero);
        }
        Ok(self.scale(&c.recip()?))
    }

    /// Positive values at all large arguments: nonzero with positive leading
    /// coefficient.
    pub fn is_asymptotically_positive(&self) -> bool {
        self.leading().is_some_and(Rational::is_positive)
    }

    /// Zero, or positive at all large arguments.
    pub fn is_asymptotically_nonnegative(&self) -> bool {
        self.is_zero() || self.is_asymptotically_positive()
    }

    /// A bound `x0` such that for every `x >= x0` the sign of `self(x)` equals
    /// the sign of the leading coefficient (Cauchy-style bound). Returns 0 for
    /// the zero polynomial.
    pub fn sign_stable_from(&self) -> Rational {
        let Some(top) = self.leading() else {
            return Rational::zero();
        };
        let mut bound = Rational::one();
        for c in &self.coeffs[..self.coeffs.len() - 1] {
            let q = Rational::one() + (c.abs() / top.abs());
            if q > bound {
                bound = q;
            }
        }
        bound
    }
}

impl Ord for Poly {
    /// Asymptotic order: compare coefficients from the top degree down; the
    /// first difference decides.
    fn cmp(&self, other: &Self) -> Ordering {
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = Rational::zero();
        for k in (0..n).rev() {
            let a = self.coeffs.get(k).unwrap_or(&zero);
            let b = other.coeffs.get(k).unwrap_or(&zero);
            match a.cmp(b) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for Poly {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut coeffs = Vec::with_capacity(n);
        for k in 0..n {
            coeffs.push(self.coeff(k) + rhs.coeff(k));
        }
        Poly::from_coeffs(coeffs)
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::from_coeffs(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(self, rhs: Poly) -> Poly {
        &self + &rhs
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, rhs: Poly) -> Poly {
        &self - &rhs
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        // integers without the /1 tail; everything else canonical p/q
        let short = |r: &Rational| {
            if r.is_integer() {
                r.numer().to_string()
            } else {
                r.to_string()
            }
        };
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let a = c.abs();
            let coeff_is_one = a == Rational::one();
            match k {
                0 => write!(f, "{}", short(&a))?,
                _ => {
                    if !coeff_is_one {
                        write!(f, "{} ", short(&a))?;
                    }
                    if k == 1 {
                        write!(f, "x")?;
                    } else {
                        write!(f, "x^{k}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl TryFrom<Vec<String>> for Poly {
    type Error = Error;
    fn try_from(strings: Vec<String>) -> Result<Self, Error> {
        let coeffs = strings
            .iter()
            .map(|s| s.parse())
            .collect::<Result<Vec<Rational>, _>>()?;
        Ok(Poly::from_coeffs(coeffs))
    }
}

impl From<Poly> for Vec<String> {
    fn from(p: Poly) -> Vec<String> {
        p.coeffs.iter().map(Rational::to_string).collect()
    }
}
