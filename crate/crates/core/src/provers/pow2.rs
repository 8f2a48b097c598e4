//! Decimal digits of `16^m`: does each contain one of 1, 2, 4, 8?

use serde::Serialize;

use crate::error::{Error, Result};

/// `16^4 = 65536`, the one power of sixteen from 4 on with none of 1, 2, 4, 8.
pub const POW2_BASE_CASE: u64 = 4;

const LIMB: u32 = 1_000_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Pow2Report {
    pub m_min: u64,
    pub m_max: u64,
    /// set when the range includes the excluded base case
    pub base_case: Option<String>,
    /// first `m` in range whose power has none of the digits
    pub first_violation: Option<u64>,
    pub checked: u64,
}

impl Pow2Report {
    pub fn holds(&self) -> bool {
        self.first_violation.is_none()
    }
}

fn has_small_power_digit(limbs: &[u32]) -> bool {
    let top = limbs.len() - 1;
    limbs.iter().enumerate().any(|(i, &l)| {
        let mut v = l;
        // inner limbs carry their leading zeros
        let width = if i == top { 0 } else { 9 };
        let mut seen = 0;
        while v > 0 || seen < width {
            if matches!(v % 10, 1 | 2 | 4 | 8) {
                return true;
            }
            v /= 10;
            seen += 1;
        }
        false
    })
}

fn times16(limbs: &mut Vec<u32>) {
    let mut carry = 0u64;
    for l in limbs.iter_mut() {
        let v = *l as u64 * 16 + carry;
        *l = (v % LIMB as u64) as u32;
        carry = v / LIMB as u64;
    }
    if carry > 0 {
        limbs.push(carry as u32);
    }
}

/// Scans `16^m` for `m_min <= m <= m_max`, in little-endian base-10^9 limbs.
pub fn pow2_digit_check(m_min: u64, m_max: u64) -> Result<Pow2Report> {
    if m_min < POW2_BASE_CASE || m_min > m_max {
        return Err(Error::domain(format!(
            "need 4 <= m_min <= m_max, got {m_min}..{m_max}"
        )));
    }
    let mut limbs = vec![1u32];
    let mut report = Pow2Report {
        m_min,
        m_max,
        base_case: None,
        first_violation: None,
        checked: 0,
    };
    for m in 1..=m_max {
        times16(&mut limbs);
        if m < m_min {
            continue;
        }
        if m == POW2_BASE_CASE {
            report.base_case = Some("16^4 = 65536 (conjectured minimal element)".into());
            continue;
        }
        report.checked += 1;
        if !has_small_power_digit(&limbs) {
            report.first_violation = Some(m);
            break;
        }
    }
    Ok(report)
}
