//! Base-b numerals, the digit-subsequence order and antichains.
//!
//! A [`Numeral`] is the positional expansion of a positive integer; zero is
//! not part of the universe. `x ⊴ y` holds when the digits of `x` can be
//! obtained from those of `y` by deleting some (possibly none) of them.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_BASE: u32 = 2;
pub const MAX_BASE: u32 = 36;

pub(crate) fn check_base(base: u32) -> Result<()> {
    if (MIN_BASE..=MAX_BASE).contains(&base) {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "base {base} outside [{MIN_BASE},{MAX_BASE}]"
        )))
    }
}

/// Renders one digit value; digits above 9 use lowercase letters.
pub fn digit_char(d: u8) -> char {
    char::from_digit(u32::from(d), 36).expect("digit below 36")
}

/// Renders a digit slice without validation.
pub fn render_digits(digits: &[u8]) -> String {
    digits.iter().map(|&d| digit_char(d)).collect()
}

/// Greedy two-pointer test: is `pattern` a subsequence of `text`?
///
/// This is the reference matcher; every faster path is checked against it.
pub fn is_subsequence_digits(pattern: &[u8], text: &[u8]) -> bool {
    if pattern.len() > text.len() {
        return false;
    }
    let mut it = text.iter();
    pattern.iter().all(|p| it.any(|t| t == p))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Numeral {
    base: u32,
    digits: Vec<u8>,
    value: BigUint,
}

impl Numeral {
    /// Expands `value` in `base`. Zero is rejected.
    pub fn new(value: impl Into<BigUint>, base: u32) -> Result<Self> {
        let value = value.into();
        check_base(base)?;
        if value.is_zero() {
            return Err(Error::domain("0 is not a positive integer"));
        }
        let digits = value.to_radix_be(base);
        Ok(Numeral {
            base,
            digits,
            value,
        })
    }

    pub fn from_digits(digits: Vec<u8>, base: u32) -> Result<Self> {
        check_base(base)?;
        match digits.first() {
            None => return Err(Error::domain("empty digit string")),
            Some(0) => return Err(Error::domain("leading zero")),
            _ => {}
        }
        if let Some(&d) = digits.iter().find(|&&d| u32::from(d) >= base) {
            return Err(Error::domain(format!(
                "digit {d} out of range for base {base}"
            )));
        }
        let value = BigUint::from_radix_be(&digits, base).expect("digits validated");
        Ok(Numeral {
            base,
            digits,
            value,
        })
    }

    /// Parses a plain digit string (either letter case) in `base`.
    pub fn parse(text: &str, base: u32) -> Result<Self> {
        check_base(base)?;
        let mut digits = Vec::with_capacity(text.len());
        for (i, c) in text.chars().enumerate() {
            let d = c
                .to_digit(36)
                .filter(|&d| d < base)
                .ok_or_else(|| Error::parse(i, format!("'{c}' is not a base-{base} digit")))?;
            digits.push(d as u8);
        }
        if digits.is_empty() {
            return Err(Error::parse(0, "empty numeral"));
        }
        if digits[0] == 0 {
            return Err(Error::parse(0, "leading zero (0 is not in the universe)"));
        }
        Numeral::from_digits(digits, base)
    }

    /// Parses `digits_b` (e.g. `110_2`); without a suffix the text is read in `default_base`.
    pub fn parse_suffixed(text: &str, default_base: u32) -> Result<Self> {
        match text.rsplit_once('_') {
            Some((digits, base)) => {
                let base: u32 = base
                    .parse()
                    .map_err(|_| Error::parse(digits.len() + 1, "bad base suffix"))?;
                Numeral::parse(digits, base)
            }
            None => Numeral::parse(text, default_base),
        }
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn digits(&self) -> &[u8] {
        &self.digits
    }

    pub fn value(&self) -> &BigUint {
        &self.value
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `110_2` style rendering used in reports.
    pub fn with_base_suffix(&self) -> String {
        format!("{}_{}", self, self.base)
    }

    pub fn is_subsequence_of(&self, other: &Numeral) -> Result<bool> {
        is_subsequence(self, other)
    }
}

impl fmt::Display for Numeral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_digits(&self.digits))
    }
}

impl PartialOrd for Numeral {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Numeric order. Without leading zeros, value order is (length, lexicographic) order.
impl Ord for Numeral {
    fn cmp(&self, other: &Self) -> Ordering {
        self.base
            .cmp(&other.base)
            .then(self.digits.len().cmp(&other.digits.len()))
            .then_with(|| self.digits.cmp(&other.digits))
    }
}

impl Serialize for Numeral {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Numeral", 3)?;
        st.serialize_field("digits", &self.to_string())?;
        st.serialize_field("value", &self.value.to_string())?;
        st.serialize_field("base", &self.base)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for Numeral {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            digits: String,
            base: u32,
        }
        let raw = Raw::deserialize(d)?;
        Numeral::parse(&raw.digits, raw.base).map_err(serde::de::Error::custom)
    }
}

pub fn to_numeral(value: impl Into<BigUint>, base: u32) -> Result<Numeral> {
    Numeral::new(value, base)
}

fn same_base(x: &Numeral, y: &Numeral) -> Result<()> {
    if x.base == y.base {
        Ok(())
    } else {
        Err(Error::BaseMismatch {
            left: x.base,
            right: y.base,
        })
    }
}

pub fn is_subsequence(x: &Numeral, y: &Numeral) -> Result<bool> {
    same_base(x, y)?;
    Ok(is_subsequence_digits(&x.digits, &y.digits))
}

pub fn incomparable(x: &Numeral, y: &Numeral) -> Result<bool> {
    same_base(x, y)?;
    Ok(
        !is_subsequence_digits(&x.digits, &y.digits)
            && !is_subsequence_digits(&y.digits, &x.digits),
    )
}

/// A set of pairwise incomparable numerals of one base, ascending by value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Antichain {
    base: u32,
    elements: Vec<Numeral>,
}

impl Antichain {
    pub fn empty(base: u32) -> Result<Self> {
        check_base(base)?;
        Ok(Antichain {
            base,
            elements: Vec::new(),
        })
    }

    /// Builds an antichain, rejecting inputs that violate the invariants.
    pub fn try_from_numerals(base: u32, mut elements: Vec<Numeral>) -> Result<Self> {
        check_base(base)?;
        if let Some(n) = elements.iter().find(|n| n.base != base) {
            return Err(Error::BaseMismatch {
                left: base,
                right: n.base,
            });
        }
        elements.sort();
        for (i, a) in elements.iter().enumerate() {
            for b in &elements[i + 1..] {
                if is_subsequence_digits(&a.digits, &b.digits) {
                    return Err(Error::domain(format!(
                        "{a} and {b} are comparable (or duplicated)"
                    )));
                }
            }
        }
        Ok(Antichain { base, elements })
    }

    pub fn from_values<I, V>(base: u32, values: I) -> Result<Self>
    where
        I: IntoIterator<Item = V>,
        V: Into<BigUint>,
    {
        let nums = values
            .into_iter()
            .map(|v| Numeral::new(v, base))
            .collect::<Result<Vec<_>>>()?;
        Antichain::try_from_numerals(base, nums)
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn elements(&self) -> &[Numeral] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn values(&self) -> Vec<BigUint> {
        self.elements.iter().map(|n| n.value.clone()).collect()
    }

    pub fn contains_value(&self, v: &BigUint) -> bool {
        self.elements.iter().any(|n| &n.value == v)
    }

    /// Does some element occur as a subsequence of `digits`?
    pub fn dominates(&self, digits: &[u8]) -> bool {
        self.elements
            .iter()
            .any(|p| is_subsequence_digits(&p.digits, digits))
    }

    /// Inserts an element that avoids every present element and is larger than all of them.
    pub(crate) fn push_larger(&mut self, n: Numeral) {
        debug_assert_eq!(n.base, self.base);
        debug_assert!(self.elements.last().is_none_or(|l| *l < n));
        debug_assert!(!self.dominates(&n.digits));
        self.elements.push(n);
    }
}

impl fmt::Display for Antichain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, e) in self.elements.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str("}")
    }
}

/// Keeps the candidates that contain no strictly smaller candidate as a subsequence.
pub fn reduce_to_antichain(candidates: &[Numeral]) -> Result<Antichain> {
    let Some(first) = candidates.first() else {
        return Err(Error::domain(
            "cannot infer the base of an empty candidate list",
        ));
    };
    let base = first.base;
    if let Some(n) = candidates.iter().find(|n| n.base != base) {
        return Err(Error::BaseMismatch {
            left: base,
            right: n.base,
        });
    }
    let mut sorted: Vec<&Numeral> = candidates.iter().collect();
    sorted.sort();
    sorted.dedup();
    // checking only kept elements suffices: a dropped smaller candidate is itself above a kept one
    let mut out = Antichain::empty(base)?;
    for n in sorted {
        if !out.dominates(&n.digits) {
            out.push_larger(n.clone());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(v: u64) -> Numeral {
        Numeral::new(v, 10).unwrap()
    }

    #[test]
    fn expansions() {
        assert_eq!(n(352148).digits(), &[3, 5, 2, 1, 4, 8]);
        assert_eq!(n(7).digits(), &[7]);
        assert_eq!(Numeral::new(6u32, 2).unwrap().digits(), &[1, 1, 0]);
        assert_eq!(Numeral::new(6u32, 2).unwrap().with_base_suffix(), "110_2");
        assert_eq!(Numeral::new(35u32, 36).unwrap().to_string(), "z");
    }

    #[test]
    fn domain_errors() {
        assert!(Numeral::new(0u32, 10).is_err());
        assert!(Numeral::new(5u32, 1).is_err());
        assert!(Numeral::new(5u32, 37).is_err());
        assert!(Numeral::parse("0", 10).is_err());
        assert!(Numeral::parse("07", 10).is_err());
        assert!(Numeral::parse("", 10).is_err());
        assert!(matches!(
            Numeral::parse("12a", 10),
            Err(Error::Parse { position: 2, .. })
        ));
    }

    #[test]
    fn parse_accepts_both_cases() {
        let a = Numeral::parse("Ff", 16).unwrap();
        assert_eq!(a.value(), &BigUint::from(255u32));
        assert_eq!(a.to_string(), "ff");
        assert_eq!(
            Numeral::parse_suffixed("110_2", 10).unwrap().value(),
            &BigUint::from(6u32)
        );
    }

    #[test]
    fn subsequence_examples() {
        assert!(is_subsequence(&n(514), &n(352148)).unwrap());
        assert!(is_subsequence(&n(77), &n(707)).unwrap());
        assert!(!is_subsequence(&n(70), &n(7)).unwrap());
        assert!(is_subsequence(&n(4711), &n(4711)).unwrap());
        let b2 = Numeral::new(2u32, 2).unwrap();
        assert!(matches!(
            is_subsequence(&n(1), &b2),
            Err(Error::BaseMismatch { .. })
        ));
    }

    #[test]
    fn incomparable_examples() {
        assert!(incomparable(&n(70), &n(77)).unwrap());
        assert!(!incomparable(&n(5), &n(55)).unwrap());
        assert!(incomparable(&n(30), &n(35)).unwrap());
    }

    #[test]
    fn reduce_examples() {
        let r = reduce_to_antichain(&[n(22), n(2), n(12)]).unwrap();
        assert_eq!(r.values(), vec![BigUint::from(2u32)]);

        let thm1: Vec<Numeral> = [1, 2, 3, 4, 5, 6, 7, 8, 9, 70, 77]
            .iter()
            .map(|&v| n(v))
            .collect();
        // 7 ⊴ 70 and 7 ⊴ 77, so only the nine digits survive
        assert_eq!(reduce_to_antichain(&thm1).unwrap().len(), 9);
        let no7: Vec<Numeral> = [1, 2, 3, 4, 5, 6, 8, 9, 70, 77]
            .iter()
            .map(|&v| n(v))
            .collect();
        assert_eq!(reduce_to_antichain(&no7).unwrap().len(), 10);

        let mut c: Vec<Numeral> = (1..=9).map(|d| n(10 * d + 7)).collect();
        c.push(n(107));
        let r = reduce_to_antichain(&c).unwrap();
        assert_eq!(r.len(), 9);
        assert!(!r.contains_value(&BigUint::from(107u32)));

        let mixed = [n(1), Numeral::new(1u32, 2).unwrap()];
        assert!(reduce_to_antichain(&mixed).is_err());
    }

    #[test]
    fn antichain_rejects_comparable() {
        assert!(Antichain::from_values(10, [2u32, 12]).is_err());
        assert!(Antichain::from_values(10, [2u32, 2]).is_err());
        let a = Antichain::from_values(10, [77u32, 70, 1]).unwrap();
        assert_eq!(a.to_string(), "{1, 70, 77}");
    }
}
