//! Dense polynomials and Laurent polynomials in `q`.
//!
//! Both types are generic over the coefficient ring. Arithmetic is checked:
//! every operation that can overflow has a `checked_*` form returning `None`,
//! and the `std::ops` impls panic on overflow instead of wrapping.

use std::fmt;
use std::hash::Hash;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_traits::{CheckedAdd, CheckedMul, CheckedNeg, CheckedSub, One, Zero};
use serde::{Deserialize, Serialize};

/// Scalar types usable as polynomial coefficients.
pub trait Coefficient:
    Clone
    + Eq
    + Ord
    + Hash
    + Zero
    + One
    + CheckedAdd
    + CheckedSub
    + CheckedMul
    + fmt::Debug
    + fmt::Display
    + FromStr
    + Send
    + Sync
    + 'static
{
}

impl<T> Coefficient for T where
    T: Clone
        + Eq
        + Ord
        + Hash
        + Zero
        + One
        + CheckedAdd
        + CheckedSub
        + CheckedMul
        + fmt::Debug
        + fmt::Display
        + FromStr
        + Send
        + Sync
        + 'static
{
}

/// A polynomial `c_0 + c_1 q + ... + c_d q^d` with no trailing zero coefficients.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Poly<C> {
    coeffs: Vec<C>,
}

impl<C: Coefficient> Poly<C> {
    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Poly { coeffs: vec![C::one()] }
    }

    /// `c * q^degree`.
    pub fn monomial(c: C, degree: usize) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![C::zero(); degree + 1];
        coeffs[degree] = c;
        Poly { coeffs }
    }

    pub fn from_coeffs(mut coeffs: Vec<C>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, degree: usize) -> C {
        self.coeffs.get(degree).cloned().unwrap_or_else(C::zero)
    }

    pub fn constant_term(&self) -> C {
        self.coeff(0)
    }

    /// Value at `q = 1`.
    pub fn checked_eval_one(&self) -> Option<C> {
        self.coeffs
            .iter()
            .try_fold(C::zero(), |acc, c| acc.checked_add(c))
    }

    pub fn checked_add(&self, other: &Self) -> Option<Self> {
        let (long, short) = if self.coeffs.len() >= other.coeffs.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut out = long.coeffs.clone();
        for (o, c) in out.iter_mut().zip(&short.coeffs) {
            *o = o.checked_add(c)?;
        }
        Some(Self::from_coeffs(out))
    }

    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        let len = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(len);
        for d in 0..len {
            out.push(self.coeff(d).checked_sub(&other.coeff(d))?);
        }
        Some(Self::from_coeffs(out))
    }

    pub fn checked_mul(&self, other: &Self) -> Option<Self> {
        if self.is_zero() || other.is_zero() {
            return Some(Self::zero());
        }
        let mut out = vec![C::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                let t = a.checked_mul(b)?;
                out[i + j] = out[i + j].checked_add(&t)?;
            }
        }
        Some(Self::from_coeffs(out))
    }

    pub fn checked_scale(&self, c: &C) -> Option<Self> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|a| a.checked_mul(c))
            .collect::<Option<Vec<_>>>()?;
        Some(Self::from_coeffs(coeffs))
    }

    /// Multiplies by `q^k`.
    pub fn shift(&self, k: usize) -> Self {
        if self.is_zero() || k == 0 {
            return self.clone();
        }
        let mut coeffs = vec![C::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        Poly { coeffs }
    }

    /// `self + c * q^k * other`, the fused step of the KL recursion.
    pub fn checked_add_scaled_shift(&self, c: &C, k: usize, other: &Self) -> Option<Self> {
        let mut out = self.coeffs.clone();
        if out.len() < other.coeffs.len() + k {
            out.resize(other.coeffs.len() + k, C::zero());
        }
        for (i, b) in other.coeffs.iter().enumerate() {
            out[i + k] = out[i + k].checked_add(&b.checked_mul(c)?)?;
        }
        Some(Self::from_coeffs(out))
    }

    /// `self - c * q^k * other`.
    pub fn checked_sub_scaled_shift(&self, c: &C, k: usize, other: &Self) -> Option<Self> {
        let mut out = self.coeffs.clone();
        if out.len() < other.coeffs.len() + k {
            out.resize(other.coeffs.len() + k, C::zero());
        }
        for (i, b) in other.coeffs.iter().enumerate() {
            out[i + k] = out[i + k].checked_sub(&b.checked_mul(c)?)?;
        }
        Some(Self::from_coeffs(out))
    }

    /// `P(q^k)`.
    pub fn substitute_power(&self, k: usize) -> Self {
        if k == 1 || self.is_zero() {
            return self.clone();
        }
        let mut coeffs = vec![C::zero(); (self.coeffs.len() - 1) * k + 1];
        for (d, c) in self.coeffs.iter().enumerate() {
            coeffs[d * k] = c.clone();
        }
        Poly { coeffs }
    }

    pub fn map<D: Coefficient>(&self, mut f: impl FnMut(&C) -> Option<D>) -> Option<Poly<D>> {
        let coeffs = self.coeffs.iter().map(&mut f).collect::<Option<Vec<_>>>()?;
        Some(Poly::from_coeffs(coeffs))
    }

    pub fn to_laurent(&self) -> Laurent<C> {
        Laurent::from_parts(0, self.coeffs.clone())
    }
}

impl<C: Coefficient> Default for Poly<C> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<C: Coefficient> Add for &Poly<C> {
    type Output = Poly<C>;
    fn add(self, rhs: &Poly<C>) -> Poly<C> {
        self.checked_add(rhs).expect("polynomial addition overflowed")
    }
}

impl<C: Coefficient> Sub for &Poly<C> {
    type Output = Poly<C>;
    fn sub(self, rhs: &Poly<C>) -> Poly<C> {
        self.checked_sub(rhs).expect("polynomial subtraction overflowed")
    }
}

impl<C: Coefficient> Mul for &Poly<C> {
    type Output = Poly<C>;
    fn mul(self, rhs: &Poly<C>) -> Poly<C> {
        self.checked_mul(rhs).expect("polynomial multiplication overflowed")
    }
}

fn write_terms<C: Coefficient>(
    f: &mut fmt::Formatter<'_>,
    terms: impl Iterator<Item = (i64, C)>,
) -> fmt::Result {
    let mut first = true;
    for (e, c) in terms {
        if c.is_zero() {
            continue;
        }
        let negative = c < C::zero();
        let text = c.to_string();
        let magnitude = text.trim_start_matches('-');
        if negative {
            f.write_str("-")?;
        } else if !first {
            f.write_str("+")?;
        }
        first = false;
        let unit = magnitude == "1";
        match e {
            0 => f.write_str(magnitude)?,
            _ => {
                if !unit {
                    f.write_str(magnitude)?;
                }
                if e == 1 {
                    f.write_str("q")?;
                } else {
                    write!(f, "q^{e}")?;
                }
            }
        }
    }
    if first {
        f.write_str("0")?;
    }
    Ok(())
}

impl<C: Coefficient> fmt::Display for Poly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_terms(
            f,
            self.coeffs
                .iter()
                .enumerate()
                .map(|(d, c)| (d as i64, c.clone())),
        )
    }
}

impl<C: Coefficient> fmt::Debug for Poly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly({self})")
    }
}

/// Error from parsing a polynomial written like `1+4q+4q^2+q^3`.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse polynomial term `{0}`")]
pub struct ParsePolyError(pub String);

fn parse_terms<C: Coefficient>(s: &str) -> Result<Vec<(i64, C)>, ParsePolyError> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(ParsePolyError(s));
    }
    let mut terms = Vec::new();
    let mut start = 0;
    let bytes = s.as_bytes();
    for i in 1..=bytes.len() {
        let boundary = i == bytes.len()
            || ((bytes[i] == b'+' || bytes[i] == b'-') && bytes[i - 1] != b'^');
        if !boundary {
            continue;
        }
        let term = &s[start..i];
        start = i;
        let (negative, body) = match term.as_bytes()[0] {
            b'+' => (false, &term[1..]),
            b'-' => (true, &term[1..]),
            _ => (false, term),
        };
        let bad = || ParsePolyError(term.to_string());
        let (coef_text, exp) = match body.find('q') {
            None => (body, 0i64),
            Some(p) => {
                let rest = &body[p + 1..];
                let exp = if rest.is_empty() {
                    1
                } else {
                    rest.strip_prefix('^')
                        .ok_or_else(bad)?
                        .parse::<i64>()
                        .map_err(|_| bad())?
                };
                (body[..p].trim_end_matches('*'), exp)
            }
        };
        let text = match (negative, coef_text.is_empty()) {
            (false, true) => "1".to_string(),
            (true, true) => "-1".to_string(),
            (false, false) => coef_text.to_string(),
            (true, false) => format!("-{coef_text}"),
        };
        let c = text.parse::<C>().map_err(|_| bad())?;
        terms.push((exp, c));
    }
    Ok(terms)
}

impl<C: Coefficient> FromStr for Poly<C> {
    type Err = ParsePolyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim() == "0" {
            return Ok(Self::zero());
        }
        let mut out = Self::zero();
        for (e, c) in parse_terms::<C>(s)? {
            let e = usize::try_from(e).map_err(|_| ParsePolyError(s.to_string()))?;
            out = out
                .checked_add(&Self::monomial(c, e))
                .ok_or_else(|| ParsePolyError(s.to_string()))?;
        }
        Ok(out)
    }
}

/// A Laurent polynomial `sum_{k} c_k q^k`, stored from its lowest nonzero
/// exponent upward. The zero polynomial has no coefficients and exponent 0.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Laurent<C> {
    min_exponent: i64,
    coeffs: Vec<C>,
}

impl<C: Coefficient> Laurent<C> {
    pub fn zero() -> Self {
        Laurent { min_exponent: 0, coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::monomial(C::one(), 0)
    }

    pub fn monomial(c: C, exponent: i64) -> Self {
        Self::from_parts(exponent, vec![c])
    }

    pub fn from_parts(min_exponent: i64, mut coeffs: Vec<C>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        let lead = coeffs.iter().take_while(|c| c.is_zero()).count();
        if lead == coeffs.len() {
            return Self::zero();
        }
        coeffs.drain(..lead);
        Laurent { min_exponent: min_exponent + lead as i64, coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Lowest exponent with a nonzero coefficient (`None` for zero).
    pub fn min_exponent(&self) -> Option<i64> {
        (!self.is_zero()).then_some(self.min_exponent)
    }

    pub fn max_exponent(&self) -> Option<i64> {
        (!self.is_zero()).then(|| self.min_exponent + self.coeffs.len() as i64 - 1)
    }

    pub fn coeff(&self, exponent: i64) -> C {
        let idx = exponent - self.min_exponent;
        if idx < 0 {
            return C::zero();
        }
        self.coeffs.get(idx as usize).cloned().unwrap_or_else(C::zero)
    }

    /// `(exponent, coefficient)` pairs for nonzero terms, lowest first.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &C)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (self.min_exponent + i as i64, c))
    }

    /// Multiplies by `q^k`.
    pub fn shift(&self, k: i64) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        Laurent { min_exponent: self.min_exponent + k, coeffs: self.coeffs.clone() }
    }

    pub fn checked_add(&self, other: &Self) -> Option<Self> {
        if self.is_zero() {
            return Some(other.clone());
        }
        if other.is_zero() {
            return Some(self.clone());
        }
        let lo = self.min_exponent.min(other.min_exponent);
        let hi = self.max_exponent()?.max(other.max_exponent()?);
        let mut coeffs = Vec::with_capacity((hi - lo + 1) as usize);
        for e in lo..=hi {
            coeffs.push(self.coeff(e).checked_add(&other.coeff(e))?);
        }
        Some(Self::from_parts(lo, coeffs))
    }

    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        if other.is_zero() {
            return Some(self.clone());
        }
        let lo = self.min_exponent().unwrap_or(other.min_exponent).min(other.min_exponent);
        let hi = self
            .max_exponent()
            .unwrap_or(i64::MIN)
            .max(other.max_exponent()?);
        let mut coeffs = Vec::with_capacity((hi - lo + 1) as usize);
        for e in lo..=hi {
            coeffs.push(self.coeff(e).checked_sub(&other.coeff(e))?);
        }
        Some(Self::from_parts(lo, coeffs))
    }

    pub fn checked_mul(&self, other: &Self) -> Option<Self> {
        if self.is_zero() || other.is_zero() {
            return Some(Self::zero());
        }
        let a = Poly { coeffs: self.coeffs.clone() };
        let b = Poly { coeffs: other.coeffs.clone() };
        let prod = a.checked_mul(&b)?;
        Some(Self::from_parts(self.min_exponent + other.min_exponent, prod.coeffs))
    }

    pub fn checked_scale(&self, c: &C) -> Option<Self> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|a| a.checked_mul(c))
            .collect::<Option<Vec<_>>>()?;
        Some(Self::from_parts(self.min_exponent, coeffs))
    }

    /// Converts to an ordinary polynomial when no negative exponent occurs.
    pub fn to_poly(&self) -> Option<Poly<C>> {
        if self.is_zero() {
            return Some(Poly::zero());
        }
        let shift = usize::try_from(self.min_exponent).ok()?;
        let mut coeffs = vec![C::zero(); shift];
        coeffs.extend(self.coeffs.iter().cloned());
        Some(Poly::from_coeffs(coeffs))
    }

    pub fn checked_eval_one(&self) -> Option<C> {
        self.coeffs
            .iter()
            .try_fold(C::zero(), |acc, c| acc.checked_add(c))
    }
}

impl<C: Coefficient + CheckedNeg> Neg for &Laurent<C> {
    type Output = Laurent<C>;
    fn neg(self) -> Laurent<C> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| c.checked_neg().expect("negation overflowed"))
            .collect();
        Laurent::from_parts(self.min_exponent, coeffs)
    }
}

impl<C: Coefficient> Default for Laurent<C> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<C: Coefficient> Add for &Laurent<C> {
    type Output = Laurent<C>;
    fn add(self, rhs: &Laurent<C>) -> Laurent<C> {
        self.checked_add(rhs).expect("Laurent addition overflowed")
    }
}

impl<C: Coefficient> Sub for &Laurent<C> {
    type Output = Laurent<C>;
    fn sub(self, rhs: &Laurent<C>) -> Laurent<C> {
        self.checked_sub(rhs).expect("Laurent subtraction overflowed")
    }
}

impl<C: Coefficient> Mul for &Laurent<C> {
    type Output = Laurent<C>;
    fn mul(self, rhs: &Laurent<C>) -> Laurent<C> {
        self.checked_mul(rhs).expect("Laurent multiplication overflowed")
    }
}

impl<C: Coefficient> fmt::Display for Laurent<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_terms(f, self.terms().map(|(e, c)| (e, c.clone())))
    }
}

impl<C: Coefficient> fmt::Debug for Laurent<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Laurent({self})")
    }
}

impl<C: Coefficient> FromStr for Laurent<C> {
    type Err = ParsePolyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim() == "0" {
            return Ok(Self::zero());
        }
        let mut out = Self::zero();
        for (e, c) in parse_terms::<C>(s)? {
            out = out
                .checked_add(&Self::monomial(c, e))
                .ok_or_else(|| ParsePolyError(s.to_string()))?;
        }
        Ok(out)
    }
}

/// Converts an unsigned polynomial to a signed Laurent polynomial.
pub fn to_signed_laurent(p: &Poly<u64>) -> Option<Laurent<i64>> {
    let coeffs = p
        .coeffs()
        .iter()
        .map(|&c| i64::try_from(c).ok())
        .collect::<Option<Vec<_>>>()?;
    Some(Laurent::from_parts(0, coeffs))
}

/// Converts a signed Laurent polynomial to an unsigned polynomial when it has
/// no negative exponents and no negative coefficients.
pub fn to_unsigned_poly(p: &Laurent<i64>) -> Option<Poly<u64>> {
    p.to_poly()?.map(|&c| u64::try_from(c).ok())
}
