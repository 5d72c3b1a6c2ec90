//! Arithmetic in GF(2^m) with a caller-chosen irreducible modulus.
//!
//! Elements are polynomial-basis bitmasks: bit `i` holds the coefficient of
//! `a^i`, where `a` is the class of `x` modulo the field polynomial. The
//! field polynomial uses the same encoding, so `0x11b` is
//! `x^8 + x^4 + x^3 + x + 1`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Largest supported extension degree.
pub const MAX_DEGREE: u32 = 16;

/// Modulus used when a degree-8 field is requested without one.
pub const AES_MODULUS: u32 = 0x11b;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GfError {
    #[error("extension degree {0} is outside 1..={MAX_DEGREE}")]
    DegreeOutOfRange(u32),
    #[error("modulus {modulus:#x} does not have degree {m}")]
    DegreeMismatch { m: u32, modulus: u32 },
    #[error("modulus {modulus:#x} is reducible: divisible by {factor:#x}")]
    Reducible { modulus: u32, factor: u32 },
    #[error("element {bits:#x} does not belong to gf(2^{m})")]
    FieldMismatch { bits: u32, m: u32 },
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("syntax error in `{text}`: {reason}")]
    Syntax { text: String, reason: String },
    #[error("exponent {exp} out of range for gf(2^{m})")]
    ExponentOutOfRange { exp: u32, m: u32 },
    #[error("term a^{0} appears more than once")]
    DuplicateTerm(u32),
}

/// A field element as a polynomial-basis bitmask.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Element(u16);

impl Element {
    pub const ZERO: Element = Element(0);
    pub const ONE: Element = Element(1);

    /// Wraps raw bits without checking them against a field.
    /// Use [`FieldSpec::element`] when the bits come from outside.
    pub const fn from_bits(bits: u16) -> Self {
        Element(bits)
    }

    pub const fn bits(self) -> u16 {
        self.0
    }

    pub const fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}", self.0)
    }
}

impl fmt::LowerHex for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::LowerHex::fmt(&self.0, f)
    }
}

impl Serialize for Element {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Element {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        parse_hex(&text)
            .and_then(|bits| {
                u16::try_from(bits).map_err(|_| GfError::FieldMismatch {
                    bits,
                    m: MAX_DEGREE,
                })
            })
            .map(Element)
            .map_err(serde::de::Error::custom)
    }
}

/// GF(2^m) defined by an irreducible polynomial of degree `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldSpec {
    m: u32,
    modulus: u32,
}

impl FieldSpec {
    /// Validates the modulus and proves it irreducible by trial division.
    pub fn new(m: u32, modulus: u32) -> Result<Self, GfError> {
        if !(1..=MAX_DEGREE).contains(&m) {
            return Err(GfError::DegreeOutOfRange(m));
        }
        if poly_degree(modulus) != Some(m) {
            return Err(GfError::DegreeMismatch { m, modulus });
        }
        if let Some(factor) = smallest_factor(modulus) {
            return Err(GfError::Reducible { modulus, factor });
        }
        Ok(FieldSpec { m, modulus })
    }

    /// GF(2^8) with `x^8 + x^4 + x^3 + x + 1`.
    pub fn aes() -> Self {
        FieldSpec {
            m: 8,
            modulus: AES_MODULUS,
        }
    }

    /// The prime field GF(2), realised modulo `x`.
    pub fn gf2() -> Self {
        FieldSpec {
            m: 1,
            modulus: 0b10,
        }
    }

    /// Default modulus for a degree. Only degree 8 has one.
    pub fn with_default_modulus(m: u32) -> Option<Self> {
        (m == 8).then(Self::aes)
    }

    pub fn degree(&self) -> u32 {
        self.m
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    /// Number of field elements, `2^m`.
    pub fn order(&self) -> u32 {
        1 << self.m
    }

    pub fn contains(&self, x: Element) -> bool {
        u32::from(x.0) < self.order()
    }

    /// Checked conversion from raw bits.
    pub fn element(&self, bits: u32) -> Result<Element, GfError> {
        if bits < self.order() {
            Ok(Element(bits as u16))
        } else {
            Err(GfError::FieldMismatch { bits, m: self.m })
        }
    }

    /// Iterates every element in increasing bitmask order.
    pub fn elements(&self) -> impl Iterator<Item = Element> {
        (0..self.order()).map(|b| Element(b as u16))
    }

    fn check(&self, x: Element) -> Result<Element, GfError> {
        self.element(u32::from(x.0))
    }

    #[inline]
    pub fn add(&self, x: Element, y: Element) -> Element {
        Element(x.0 ^ y.0)
    }

    /// Shift-and-reduce product.
    #[inline]
    pub fn mul(&self, x: Element, y: Element) -> Element {
        let top = 1u32 << self.m;
        let mut a = u32::from(x.0);
        let mut b = u32::from(y.0);
        let mut acc = 0u32;
        while b != 0 {
            if b & 1 != 0 {
                acc ^= a;
            }
            b >>= 1;
            a <<= 1;
            if a & top != 0 {
                a ^= self.modulus;
            }
        }
        Element(acc as u16)
    }

    pub fn try_add(&self, x: Element, y: Element) -> Result<Element, GfError> {
        Ok(self.add(self.check(x)?, self.check(y)?))
    }

    pub fn try_mul(&self, x: Element, y: Element) -> Result<Element, GfError> {
        Ok(self.mul(self.check(x)?, self.check(y)?))
    }

    /// `x^e` by square-and-multiply. `pow(0, 0)` is one (empty product).
    pub fn pow(&self, x: Element, mut e: u64) -> Element {
        let mut base = x;
        let mut acc = Element::ONE;
        while e != 0 {
            if e & 1 != 0 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// `x^(2^m - 2)`.
    pub fn inv(&self, x: Element) -> Result<Element, GfError> {
        if self.check(x)?.is_zero() {
            return Err(GfError::ZeroInverse);
        }
        Ok(self.pow(x, u64::from(self.order()) - 2))
    }

    /// Parses `1+a^2+a^3` style polynomial notation in the primitive class `a`.
    ///
    /// Terms are `1`, `a` or `a^i` with `i < m`, joined by `+`, in any order.
    /// A lone `0` denotes the zero element.
    pub fn parse_element(&self, text: &str) -> Result<Element, GfError> {
        let syntax = |reason: &str| GfError::Syntax {
            text: text.to_string(),
            reason: reason.to_string(),
        };
        let trimmed = text.trim();
        if trimmed == "0" {
            return Ok(Element::ZERO);
        }
        if trimmed.is_empty() {
            return Err(syntax("empty element"));
        }
        let mut bits = 0u32;
        for token in trimmed.split('+') {
            let token = token.trim();
            let exp = match token {
                "" => return Err(syntax("empty term")),
                "1" => 0,
                "a" => 1,
                _ => {
                    let digits = token
                        .strip_prefix("a^")
                        .ok_or_else(|| syntax(&format!("unexpected term `{token}`")))?;
                    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                        return Err(syntax(&format!("bad exponent in `{token}`")));
                    }
                    digits
                        .parse::<u32>()
                        .map_err(|_| GfError::ExponentOutOfRange {
                            exp: u32::MAX,
                            m: self.m,
                        })?
                }
            };
            if exp >= self.m {
                return Err(GfError::ExponentOutOfRange { exp, m: self.m });
            }
            if bits & (1 << exp) != 0 {
                return Err(GfError::DuplicateTerm(exp));
            }
            bits |= 1 << exp;
        }
        Ok(Element(bits as u16))
    }

    /// Accepts either `0x..` hex or polynomial notation.
    pub fn parse_literal(&self, text: &str) -> Result<Element, GfError> {
        let trimmed = text.trim();
        if trimmed.starts_with("0x") || trimmed.starts_with("0X") {
            self.element(parse_hex(trimmed)?)
        } else {
            self.parse_element(trimmed)
        }
    }

    /// Polynomial notation with ascending exponents, e.g. `1+a^2+a^3`.
    pub fn format_poly(&self, x: Element) -> String {
        if x.is_zero() {
            return "0".to_string();
        }
        (0..16u32)
            .filter(|i| x.0 & (1 << i) != 0)
            .map(|i| match i {
                0 => "1".to_string(),
                1 => "a".to_string(),
                _ => format!("a^{i}"),
            })
            .collect::<Vec<_>>()
            .join("+")
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "gf(2^{})/{:#x}", self.m, self.modulus)
    }
}

impl FromStr for FieldSpec {
    type Err = GfError;

    /// Parses `gf(2^m)/0x<modulus>`.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let syntax = |reason: &str| GfError::Syntax {
            text: text.to_string(),
            reason: reason.to_string(),
        };
        let lower = text.trim().to_ascii_lowercase();
        let rest = lower
            .strip_prefix("gf(2^")
            .ok_or_else(|| syntax("expected `gf(2^m)/0x<modulus>`"))?;
        let (m, modulus) = rest
            .split_once(")/")
            .ok_or_else(|| syntax("expected `)/` after the degree"))?;
        let m: u32 = m.parse().map_err(|_| syntax("bad extension degree"))?;
        FieldSpec::new(m, parse_hex(modulus)?)
    }
}

impl Serialize for FieldSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FieldSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

fn parse_hex(text: &str) -> Result<u32, GfError> {
    let digits = text
        .trim()
        .strip_prefix("0x")
        .or_else(|| text.trim().strip_prefix("0X"))
        .ok_or_else(|| GfError::Syntax {
            text: text.to_string(),
            reason: "expected a 0x-prefixed hex literal".to_string(),
        })?;
    u32::from_str_radix(digits, 16).map_err(|_| GfError::Syntax {
        text: text.to_string(),
        reason: "bad hex digits".to_string(),
    })
}

fn poly_degree(p: u32) -> Option<u32> {
    (p != 0).then(|| 31 - p.leading_zeros())
}

/// Remainder of carry-less division over GF(2)[x].
fn poly_rem(mut a: u32, b: u32) -> u32 {
    let db = poly_degree(b).expect("division by the zero polynomial");
    while let Some(da) = poly_degree(a) {
        if da < db {
            break;
        }
        a ^= b << (da - db);
    }
    a
}

/// First factor of degree `1..=deg/2`, in increasing bitmask order.
fn smallest_factor(p: u32) -> Option<u32> {
    let deg = poly_degree(p)?;
    (1..=deg / 2)
        .flat_map(|d| (1u32 << d)..(1u32 << (d + 1)))
        .find(|&q| poly_rem(p, q) == 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Independent route: full carry-less product, then reduce from the top.
    fn clmul_then_reduce(f: &FieldSpec, x: u32, y: u32) -> u32 {
        let mut prod = 0u32;
        for i in 0..16 {
            if y & (1 << i) != 0 {
                prod ^= x << i;
            }
        }
        poly_rem(prod, f.modulus())
    }

    fn gf16() -> FieldSpec {
        FieldSpec::new(4, 0x13).unwrap()
    }

    #[test]
    fn field_construction() {
        let aes = FieldSpec::new(8, 0x11b).unwrap();
        assert_eq!(aes, FieldSpec::aes());
        assert_eq!(aes.to_string(), "gf(2^8)/0x11b");
        assert!(FieldSpec::new(1, 0x2).is_ok());
        assert_eq!(
            FieldSpec::new(4, 0x18),
            Err(GfError::Reducible {
                modulus: 0x18,
                factor: 0x2
            })
        );
        // x^4 + x^2 + 1 = (x^2 + x + 1)^2
        assert_eq!(
            FieldSpec::new(4, 0x15),
            Err(GfError::Reducible {
                modulus: 0x15,
                factor: 0x7
            })
        );
        assert!(matches!(
            FieldSpec::new(4, 0x3),
            Err(GfError::DegreeMismatch { .. })
        ));
        assert!(matches!(
            FieldSpec::new(4, 0x33),
            Err(GfError::DegreeMismatch { .. })
        ));
        assert_eq!(
            FieldSpec::new(17, 0x2_0009),
            Err(GfError::DegreeOutOfRange(17))
        );
        assert_eq!(FieldSpec::new(0, 0x1), Err(GfError::DegreeOutOfRange(0)));
    }

    #[test]
    fn irreducible_counts_match_necklace_formula() {
        // Number of irreducible binary polynomials of degree m.
        let expected = [
            (1, 2),
            (2, 1),
            (3, 2),
            (4, 3),
            (5, 6),
            (6, 9),
            (7, 18),
            (8, 30),
        ];
        for (m, count) in expected {
            let found = ((1u32 << m)..(1u32 << (m + 1)))
                .filter(|&p| FieldSpec::new(m, p).is_ok())
                .count();
            assert_eq!(found, count, "degree {m}");
        }
    }

    #[test]
    fn field_text_round_trip() {
        for text in ["gf(2^8)/0x11b", "gf(2^2)/0x7", "gf(2^4)/0x13"] {
            let f: FieldSpec = text.parse().unwrap();
            assert_eq!(f.to_string(), text);
        }
        assert!("gf(2^4)/19".parse::<FieldSpec>().is_err());
        assert!("gf(3^4)/0x13".parse::<FieldSpec>().is_err());
        assert!(matches!(
            "gf(2^4)/0x18".parse::<FieldSpec>(),
            Err(GfError::Reducible { .. })
        ));
    }

    #[test]
    fn addition() {
        let f = FieldSpec::aes();
        let e = |b| Element::from_bits(b);
        assert_eq!(f.add(e(0x57), e(0x57)), Element::ZERO);
        assert_eq!(f.add(e(0x57), e(0x83)), e(0xd4));
        for x in f.elements() {
            assert_eq!(f.add(x, Element::ZERO), x);
        }
        assert_eq!(
            gf16().try_add(e(0x10), e(1)),
            Err(GfError::FieldMismatch { bits: 0x10, m: 4 })
        );
    }

    #[test]
    fn multiplication_golden() {
        let f = FieldSpec::aes();
        let e = |b| Element::from_bits(b);
        // Frozen from clmul_then_reduce.
        assert_eq!(clmul_then_reduce(&f, 0x02, 0x80), 0x1b);
        assert_eq!(clmul_then_reduce(&f, 0x53, 0xca), 0x01);
        assert_eq!(clmul_then_reduce(&f, 0x57, 0x83), 0xc1);
        assert_eq!(f.mul(e(0x02), e(0x80)), e(0x1b));
        assert_eq!(f.mul(e(0x53), e(0xca)), e(0x01));
        assert_eq!(f.mul(e(0x57), e(0x83)), e(0xc1));
        for x in f.elements() {
            assert_eq!(f.mul(x, Element::ONE), x);
        }
        assert!(f.try_mul(e(0x100), e(1)).is_err());
    }

    #[test]
    fn multiplication_matches_oracle_exhaustively() {
        for f in [FieldSpec::aes(), gf16(), FieldSpec::new(2, 0x7).unwrap()] {
            for x in 0..f.order() {
                for y in 0..f.order() {
                    let got = f.mul(Element::from_bits(x as u16), Element::from_bits(y as u16));
                    assert_eq!(u32::from(got.bits()), clmul_then_reduce(&f, x, y));
                }
            }
        }
    }

    #[test]
    fn inverse() {
        let f = FieldSpec::aes();
        let e = |b| Element::from_bits(b);
        assert_eq!(f.inv(Element::ONE), Ok(Element::ONE));
        assert_eq!(f.inv(Element::ZERO), Err(GfError::ZeroInverse));
        // Exhaustive search oracle.
        let brute = f
            .elements()
            .find(|&y| f.mul(e(0x53), y) == Element::ONE)
            .unwrap();
        assert_eq!(brute, e(0xca));
        assert_eq!(f.inv(e(0x53)), Ok(e(0xca)));
        for x in f.elements().skip(1) {
            let y = f.inv(x).unwrap();
            assert_eq!(f.mul(x, y), Element::ONE);
            assert_eq!(f.inv(y).unwrap(), x);
        }
    }

    #[test]
    fn powers() {
        let f = FieldSpec::aes();
        let e = |b| Element::from_bits(b);
        assert_eq!(f.pow(Element::ZERO, 0), Element::ONE);
        assert_eq!(f.pow(Element::ZERO, 3), Element::ZERO);
        let mut acc = Element::ONE;
        for _ in 0..8 {
            acc = f.mul(acc, e(0x02));
        }
        assert_eq!(acc, e(0x1b));
        assert_eq!(f.pow(e(0x02), 8), e(0x1b));
        for x in f.elements() {
            assert_eq!(f.pow(x, 1), x);
            assert_eq!(f.pow(x, 255), if x.is_zero() { x } else { Element::ONE });
        }
    }

    #[test]
    fn distributivity_small_fields_exhaustive() {
        for m in 1..=4u32 {
            let f = ((1u32 << m)..(1u32 << (m + 1)))
                .find_map(|p| FieldSpec::new(m, p).ok())
                .unwrap();
            for x in f.elements() {
                for y in f.elements() {
                    for z in f.elements() {
                        assert_eq!(f.mul(x, f.add(y, z)), f.add(f.mul(x, y), f.mul(x, z)));
                        assert_eq!(f.mul(f.mul(x, y), z), f.mul(x, f.mul(y, z)));
                    }
                    assert_eq!(f.mul(x, y), f.mul(y, x));
                }
            }
        }
    }

    #[test]
    fn polynomial_notation() {
        let f = FieldSpec::aes();
        assert_eq!(f.parse_element("1+a^2+a^3+a^4+a^6").unwrap().bits(), 0x5d);
        assert_eq!(f.parse_element("a").unwrap().bits(), 0x02);
        assert_eq!(f.parse_element("a^2+a^3+a^6+a^7").unwrap().bits(), 0xcc);
        assert_eq!(f.parse_element("a^5+a").unwrap().bits(), 0x22);
        assert_eq!(f.parse_element(" 1 + a ").unwrap().bits(), 0x03);
        assert_eq!(f.parse_element("0").unwrap(), Element::ZERO);
        assert_eq!(
            f.parse_element("a^8"),
            Err(GfError::ExponentOutOfRange { exp: 8, m: 8 })
        );
        assert_eq!(f.parse_element("a+a^1"), Err(GfError::DuplicateTerm(1)));
        assert_eq!(f.parse_element("1+a^0"), Err(GfError::DuplicateTerm(0)));
        for bad in ["", "1+", "b", "a^", "a^x", "2", "a^-1", "a*a"] {
            assert!(
                matches!(f.parse_element(bad), Err(GfError::Syntax { .. })),
                "{bad:?}"
            );
        }
        assert!(matches!(
            FieldSpec::gf2().parse_element("a"),
            Err(GfError::ExponentOutOfRange { exp: 1, m: 1 })
        ));
    }

    #[test]
    fn poly_format_round_trips_in_gf256() {
        let f = FieldSpec::aes();
        for x in f.elements().skip(1) {
            let text = f.format_poly(x);
            assert_eq!(f.parse_element(&text).unwrap(), x, "{text}");
        }
        assert_eq!(f.format_poly(Element::from_bits(0x5d)), "1+a^2+a^3+a^4+a^6");
    }

    #[test]
    fn literals() {
        let f = gf16();
        assert_eq!(f.parse_literal("0x1").unwrap(), Element::ONE);
        assert_eq!(f.parse_literal("0xF").unwrap().bits(), 0xf);
        assert_eq!(f.parse_literal("a^3+1").unwrap().bits(), 0x9);
        assert!(matches!(
            f.parse_literal("0x10"),
            Err(GfError::FieldMismatch { .. })
        ));
        assert!(f.parse_literal("0xzz").is_err());
    }

    #[test]
    fn element_serde() {
        let x = Element::from_bits(0x1b);
        assert_eq!(serde_json::to_string(&x).unwrap(), "\"0x1b\"");
        assert_eq!(serde_json::from_str::<Element>("\"0x1b\"").unwrap(), x);
        assert!(serde_json::from_str::<Element>("\"27\"").is_err());
        let f = FieldSpec::aes();
        assert_eq!(serde_json::to_string(&f).unwrap(), "\"gf(2^8)/0x11b\"");
    }
}
