//! GF(2^n) arithmetic, univariate polynomials and Lagrange interpolation.
//!
//! Field elements are identified with bit vectors: bit `i` of the value is
//! the coefficient of `x^i`. With that identification, field addition is
//! XOR and `F_2^n` and `GF(2^n)` can be used interchangeably.

use std::fmt;
use std::ops::{Add, Mul};

use thiserror::Error;

use crate::bitlinalg::{low_mask, BitVector};

/// Largest supported extension degree.
pub const MAX_DEGREE: u32 = 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("extension degree {0} outside 1..={MAX_DEGREE}")]
    DegreeOutOfRange(u32),
    #[error("modulus {modulus:#x} does not have degree {n}")]
    WrongModulusDegree { n: u32, modulus: u64 },
    #[error("modulus {0:#x} is reducible")]
    Reducible(u64),
    #[error("invalid hex modulus {0:?}")]
    BadHex(String),
    #[error("elements belong to different fields")]
    SpecMismatch,
    #[error("zero has no inverse")]
    ZeroInverse,
    #[error("duplicate abscissa {0:#x}")]
    DuplicateAbscissa(u64),
    #[error("interpolation needs at least one point")]
    NoPoints,
    #[error("value {value:#x} does not fit in GF(2^{n})")]
    ValueOutOfRange { n: u32, value: u64 },
}

/// Carry-less product of two polynomials given as bit masks.
fn clmul(a: u64, b: u64) -> u128 {
    let mut acc = 0u128;
    let mut b = b;
    let mut shift = 0;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= (a as u128) << shift;
        }
        b >>= 1;
        shift += 1;
    }
    acc
}

fn poly_degree(p: u128) -> Option<u32> {
    (p != 0).then(|| 127 - p.leading_zeros())
}

/// Remainder of `a` modulo `m` over GF(2)[x].
fn poly_rem(mut a: u128, m: u128) -> u128 {
    let dm = poly_degree(m).expect("nonzero modulus");
    while let Some(da) = poly_degree(a) {
        if da < dm {
            break;
        }
        a ^= m << (da - dm);
    }
    a
}

/// Trial division by every polynomial of degree `1..=deg/2`.
pub fn is_irreducible(modulus: u64) -> bool {
    let Some(deg) = poly_degree(modulus as u128) else {
        return false;
    };
    if deg == 0 {
        return false;
    }
    for d in 1..=deg / 2 {
        for low in 0..(1u64 << d) {
            let divisor = (1u64 << d) | low;
            if poly_rem(modulus as u128, divisor as u128) == 0 {
                return false;
            }
        }
    }
    true
}

/// The irreducible polynomial of degree `n` with the smallest integer
/// encoding (`x^4+x+1` for `n = 4`, `0x11b` for `n = 8`).
pub fn least_irreducible(n: u32) -> u64 {
    assert!((1..=MAX_DEGREE).contains(&n));
    ((1u64 << n)..(1u64 << (n + 1)))
        .find(|&m| is_irreducible(m))
        .expect("irreducible polynomials exist in every degree")
}

fn prime_factors(mut v: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= v {
        if v.is_multiple_of(p) {
            out.push(p);
            while v.is_multiple_of(p) {
                v /= p;
            }
        }
        p += 1;
    }
    if v > 1 {
        out.push(v);
    }
    out
}

/// Irreducible and `x` generates the multiplicative group.
pub fn is_primitive(modulus: u64) -> bool {
    if !is_irreducible(modulus) {
        return false;
    }
    let n = poly_degree(modulus as u128).unwrap();
    if n == 1 {
        return true;
    }
    let spec = FieldSpec { n, modulus };
    let order = (1u64 << n) - 1;
    prime_factors(order)
        .into_iter()
        .all(|p| spec.pow_raw(0b10, order / p) != 1)
}

/// The primitive polynomial of degree `n` with the smallest encoding.
pub fn least_primitive(n: u32) -> u64 {
    assert!((1..=MAX_DEGREE).contains(&n));
    ((1u64 << n)..(1u64 << (n + 1)))
        .find(|&m| is_primitive(m))
        .expect("primitive polynomials exist in every degree")
}

/// GF(2^n) defined by an irreducible modulus.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldSpec {
    n: u32,
    modulus: u64,
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF(2^{}) mod {:#x}", self.n, self.modulus)
    }
}

impl FieldSpec {
    pub fn new(n: u32, modulus: u64) -> Result<Self, FieldError> {
        if !(1..=MAX_DEGREE).contains(&n) {
            return Err(FieldError::DegreeOutOfRange(n));
        }
        if poly_degree(modulus as u128) != Some(n) {
            return Err(FieldError::WrongModulusDegree { n, modulus });
        }
        if !is_irreducible(modulus) {
            return Err(FieldError::Reducible(modulus));
        }
        Ok(FieldSpec { n, modulus })
    }

    /// The field with the lexicographically least irreducible modulus.
    pub fn with_default_modulus(n: u32) -> Result<Self, FieldError> {
        if !(1..=MAX_DEGREE).contains(&n) {
            return Err(FieldError::DegreeOutOfRange(n));
        }
        Ok(FieldSpec {
            n,
            modulus: least_irreducible(n),
        })
    }

    /// Parses a hex coefficient mask such as `0x11b` or `13`.
    pub fn from_hex_modulus(n: u32, hex: &str) -> Result<Self, FieldError> {
        let digits = hex.trim().trim_start_matches("0x").trim_start_matches("0X");
        let modulus = u64::from_str_radix(digits, 16).map_err(|_| FieldError::BadHex(hex.to_string()))?;
        Self::new(n, modulus)
    }

    pub fn degree(&self) -> u32 {
        self.n
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// The modulus as an `(n+1)`-bit coefficient vector.
    pub fn modulus_bits(&self) -> BitVector {
        BitVector::from_u64(self.modulus, self.n as usize + 1)
    }

    pub fn modulus_hex(&self) -> String {
        format!("{:#x}", self.modulus)
    }

    pub fn order(&self) -> u64 {
        1u64 << self.n
    }

    pub fn mask(&self) -> u64 {
        low_mask(self.n as usize)
    }

    pub fn mul_raw(&self, a: u64, b: u64) -> u64 {
        poly_rem(clmul(a, b), self.modulus as u128) as u64
    }

    pub fn pow_raw(&self, mut a: u64, mut e: u64) -> u64 {
        let mut acc = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_raw(acc, a);
            }
            a = self.mul_raw(a, a);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via `a^(2^n - 2)`.
    pub fn inv_raw(&self, a: u64) -> Result<u64, FieldError> {
        if a == 0 {
            return Err(FieldError::ZeroInverse);
        }
        Ok(self.pow_raw(a, self.order() - 2))
    }

    pub fn element(&self, value: u64) -> Result<FieldElement, FieldError> {
        if value & !self.mask() != 0 {
            return Err(FieldError::ValueOutOfRange { n: self.n, value });
        }
        Ok(FieldElement { spec: *self, value })
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement { spec: *self, value: 0 }
    }

    pub fn one(&self) -> FieldElement {
        FieldElement { spec: *self, value: 1 }
    }
}

/// An element of a [`FieldSpec`].
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    spec: FieldSpec,
    value: u64,
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}", self.value)
    }
}

impl FieldElement {
    pub fn spec(&self) -> FieldSpec {
        self.spec
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    pub fn to_bits(&self) -> BitVector {
        BitVector::from_u64(self.value, self.spec.n as usize)
    }

    pub fn from_bits(spec: FieldSpec, bits: &BitVector) -> Result<Self, FieldError> {
        if bits.len() != spec.n as usize {
            return Err(FieldError::SpecMismatch);
        }
        spec.element(bits.to_u64().expect("n <= 24"))
    }

    fn same_field(&self, other: &FieldElement) -> Result<(), FieldError> {
        if self.spec != other.spec {
            return Err(FieldError::SpecMismatch);
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        self.same_field(other)?;
        Ok(FieldElement {
            spec: self.spec,
            value: self.value ^ other.value,
        })
    }

    pub fn checked_mul(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        self.same_field(other)?;
        Ok(FieldElement {
            spec: self.spec,
            value: self.spec.mul_raw(self.value, other.value),
        })
    }

    pub fn pow(&self, e: u64) -> FieldElement {
        FieldElement {
            spec: self.spec,
            value: self.spec.pow_raw(self.value, e),
        }
    }

    pub fn inv(&self) -> Result<FieldElement, FieldError> {
        Ok(FieldElement {
            spec: self.spec,
            value: self.spec.inv_raw(self.value)?,
        })
    }
}

impl Add for FieldElement {
    type Output = FieldElement;

    fn add(self, rhs: FieldElement) -> FieldElement {
        self.checked_add(&rhs).expect("field mismatch in addition")
    }
}

impl Mul for FieldElement {
    type Output = FieldElement;

    fn mul(self, rhs: FieldElement) -> FieldElement {
        self.checked_mul(&rhs).expect("field mismatch in multiplication")
    }
}

/// Free-standing form of [`FieldElement::checked_mul`].
pub fn field_mul(a: &FieldElement, b: &FieldElement) -> Result<FieldElement, FieldError> {
    a.checked_mul(b)
}

/// Free-standing form of [`FieldElement::inv`].
pub fn field_inv(a: &FieldElement) -> Result<FieldElement, FieldError> {
    a.inv()
}

/// A univariate polynomial over a [`FieldSpec`]; `coeffs[i]` multiplies
/// `x^i`, and the highest stored coefficient is nonzero.
#[derive(Clone, PartialEq, Eq)]
pub struct FieldPolynomial {
    spec: FieldSpec,
    coeffs: Vec<u64>,
}

impl fmt::Debug for FieldPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, &c)| c != 0)
            .map(|(i, c)| format!("{c:#x}*x^{i}"))
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

impl FieldPolynomial {
    pub fn zero(spec: FieldSpec) -> Self {
        FieldPolynomial {
            spec,
            coeffs: Vec::new(),
        }
    }

    pub fn from_coeffs(spec: FieldSpec, coeffs: Vec<u64>) -> Result<Self, FieldError> {
        for &c in &coeffs {
            spec.element(c)?;
        }
        let mut p = FieldPolynomial { spec, coeffs };
        p.normalize();
        Ok(p)
    }

    /// `c · x^i`.
    pub fn monomial(spec: FieldSpec, c: u64, i: usize) -> Result<Self, FieldError> {
        let mut coeffs = vec![0; i + 1];
        coeffs[i] = c;
        Self::from_coeffs(spec, coeffs)
    }

    fn normalize(&mut self) {
        while self.coeffs.last() == Some(&0) {
            self.coeffs.pop();
        }
    }

    pub fn spec(&self) -> FieldSpec {
        self.spec
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> u64 {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Horner evaluation on a raw field value.
    pub fn eval_raw(&self, x: u64) -> u64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0, |acc, &c| self.spec.mul_raw(acc, x) ^ c)
    }

    pub fn eval(&self, x: &FieldElement) -> Result<FieldElement, FieldError> {
        if x.spec != self.spec {
            return Err(FieldError::SpecMismatch);
        }
        Ok(FieldElement {
            spec: self.spec,
            value: self.eval_raw(x.value),
        })
    }

    /// Values at every field element, indexed by the element's encoding.
    pub fn evaluate_all(&self) -> Vec<u64> {
        (0..self.spec.order()).map(|x| self.eval_raw(x)).collect()
    }

    pub fn add(&self, other: &FieldPolynomial) -> Result<FieldPolynomial, FieldError> {
        if self.spec != other.spec {
            return Err(FieldError::SpecMismatch);
        }
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len).map(|i| self.coeff(i) ^ other.coeff(i)).collect();
        let mut p = FieldPolynomial {
            spec: self.spec,
            coeffs,
        };
        p.normalize();
        Ok(p)
    }

    pub fn mul(&self, other: &FieldPolynomial) -> Result<FieldPolynomial, FieldError> {
        if self.spec != other.spec {
            return Err(FieldError::SpecMismatch);
        }
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero(self.spec));
        }
        let mut coeffs = vec![0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] ^= self.spec.mul_raw(a, b);
            }
        }
        let mut p = FieldPolynomial {
            spec: self.spec,
            coeffs,
        };
        p.normalize();
        Ok(p)
    }

    fn scale_raw(&self, c: u64) -> FieldPolynomial {
        let mut p = FieldPolynomial {
            spec: self.spec,
            coeffs: self.coeffs.iter().map(|&a| self.spec.mul_raw(a, c)).collect(),
        };
        p.normalize();
        p
    }

    /// The polynomial `x ↦ self(x + shift)`.
    pub fn shifted(&self, shift: u64) -> FieldPolynomial {
        // Horner on polynomials: acc = acc * (x + shift) + c
        let lin = FieldPolynomial {
            spec: self.spec,
            coeffs: vec![shift, 1],
        };
        let mut acc = Self::zero(self.spec);
        for &c in self.coeffs.iter().rev() {
            acc = acc.mul(&lin).expect("same field");
            acc = acc
                .add(&FieldPolynomial {
                    spec: self.spec,
                    coeffs: vec![c],
                })
                .expect("same field");
        }
        acc
    }
}

/// The unique polynomial of degree `< points.len()` through `points`.
pub fn lagrange_interpolate(points: &[(FieldElement, FieldElement)]) -> Result<FieldPolynomial, FieldError> {
    let (first, _) = points.first().ok_or(FieldError::NoPoints)?;
    let spec = first.spec;
    for (x, y) in points {
        if x.spec != spec || y.spec != spec {
            return Err(FieldError::SpecMismatch);
        }
    }
    for (i, (xi, _)) in points.iter().enumerate() {
        if points[..i].iter().any(|(xj, _)| xj.value == xi.value) {
            return Err(FieldError::DuplicateAbscissa(xi.value));
        }
    }

    // master(x) = Π (x - x_j)
    let mut master = vec![1u64];
    for (xj, _) in points {
        let mut next = vec![0u64; master.len() + 1];
        for (i, &c) in master.iter().enumerate() {
            next[i + 1] ^= c;
            next[i] ^= spec.mul_raw(c, xj.value);
        }
        master = next;
    }

    let mut acc = FieldPolynomial::zero(spec);
    for (i, (xi, yi)) in points.iter().enumerate() {
        if yi.value == 0 {
            continue;
        }
        // master / (x - x_i) by synthetic division
        let deg = master.len() - 1;
        let mut quotient = vec![0u64; deg];
        let mut carry = 0u64;
        for k in (0..deg).rev() {
            carry = master[k + 1] ^ spec.mul_raw(carry, xi.value);
            quotient[k] = carry;
        }
        let denom = points
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .fold(1u64, |d, (_, (xj, _))| spec.mul_raw(d, xi.value ^ xj.value));
        let scale = spec.mul_raw(yi.value, spec.inv_raw(denom)?);
        let basis = FieldPolynomial { spec, coeffs: quotient };
        acc = acc.add(&basis.scale_raw(scale))?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf16() -> FieldSpec {
        FieldSpec::new(4, 0b10011).unwrap()
    }

    #[test]
    fn default_moduli() {
        assert_eq!(least_irreducible(4), 0b10011);
        assert_eq!(least_irreducible(8), 0x11b);
        assert_eq!(FieldSpec::with_default_modulus(8).unwrap().modulus(), 0x11b);
        assert!(is_primitive(0b10011));
        // 0x11b is irreducible but x has order 51
        assert!(!is_primitive(0x11b));
        assert_eq!(least_primitive(8), 0x11d);
    }

    #[test]
    fn construction_errors() {
        assert_eq!(FieldSpec::new(4, 0b10101), Err(FieldError::Reducible(0b10101)));
        assert!(matches!(
            FieldSpec::new(4, 0b1011),
            Err(FieldError::WrongModulusDegree { .. })
        ));
        assert!(matches!(
            FieldSpec::new(25, 1 << 25 | 1),
            Err(FieldError::DegreeOutOfRange(25))
        ));
        assert_eq!(FieldSpec::from_hex_modulus(8, "0x11b").unwrap().modulus(), 0x11b);
    }

    #[test]
    fn mul_examples() {
        let f = gf16();
        let a = f.element(0b1011).unwrap();
        assert_eq!(a * f.one(), a);
        assert_eq!(a * f.zero(), f.zero());
        // x * x^3 = x^4 = x + 1
        let x = f.element(0b0010).unwrap();
        let x3 = f.element(0b1000).unwrap();
        assert_eq!((x * x3).value(), 0b0011);
    }

    #[test]
    fn inv_examples() {
        let f = gf16();
        assert_eq!(f.one().inv().unwrap(), f.one());
        // x * (x^3 + 1) = x^4 + x = 1
        let x = f.element(0b0010).unwrap();
        assert_eq!(x.inv().unwrap().value(), 0b1001);
        assert_eq!(f.zero().inv(), Err(FieldError::ZeroInverse));
        for v in 1..16 {
            let a = f.element(v).unwrap();
            assert_eq!(a * a.inv().unwrap(), f.one());
        }
    }

    #[test]
    fn spec_mismatch_is_reported() {
        let a = gf16().one();
        let b = FieldSpec::new(4, 0b11001).unwrap().one();
        assert_eq!(field_mul(&a, &b), Err(FieldError::SpecMismatch));
    }

    #[test]
    fn eval_examples() {
        let f = gf16();
        assert_eq!(FieldPolynomial::zero(f).eval(&f.element(7).unwrap()).unwrap(), f.zero());
        let p = FieldPolynomial::from_coeffs(f, vec![1, 0, 1]).unwrap();
        assert_eq!(p.eval(&f.zero()).unwrap(), f.one());
        // x is a generator of GF(16) under x^4+x+1; powers table: x^3 = 1000
        let cube = FieldPolynomial::monomial(f, 1, 3).unwrap();
        assert_eq!(cube.eval_raw(0b0010), 0b1000);
        // (x^2)^3 = x^6 = x^3 + x^2
        assert_eq!(cube.eval_raw(0b0100), 0b1100);
    }

    #[test]
    fn interpolation_examples() {
        let f = gf16();
        let c = f.element(0b0110).unwrap();
        let constant = lagrange_interpolate(&[(f.zero(), c), (f.one(), c)]).unwrap();
        assert_eq!(constant.coeffs(), &[0b0110]);

        let pts: Vec<_> = [3u64, 9, 14]
            .iter()
            .map(|&v| (f.element(v).unwrap(), f.element(v).unwrap()))
            .collect();
        assert_eq!(lagrange_interpolate(&pts).unwrap().coeffs(), &[0, 1]);

        let dup = [(f.one(), f.one()), (f.one(), f.zero())];
        assert_eq!(lagrange_interpolate(&dup), Err(FieldError::DuplicateAbscissa(1)));
        assert_eq!(lagrange_interpolate(&[]), Err(FieldError::NoPoints));
    }

    #[test]
    fn shifted_matches_pointwise() {
        let f = FieldSpec::with_default_modulus(6).unwrap();
        let p = FieldPolynomial::from_coeffs(f, vec![5, 0, 17, 33, 2]).unwrap();
        let q = p.shifted(0b101101);
        for x in 0..64 {
            assert_eq!(q.eval_raw(x), p.eval_raw(x ^ 0b101101));
        }
    }
}
