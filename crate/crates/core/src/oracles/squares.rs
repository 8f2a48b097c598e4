//! Sums of three squares and quadratic residues.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_integer::Roots;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Legendre: `n` is a sum of three squares unless `n = 4^a (8b + 7)`.
pub fn is_sum_of_three_squares(n: &BigUint) -> bool {
    if n.is_zero() {
        return true;
    }
    let mut m = n.clone();
    while (&m % 4u32).is_zero() {
        m >>= 2;
    }
    (&m % 8u32).to_u32() != Some(7)
}

/// Some `x >= y >= z >= 0` with `x² + y² + z² = n`.
pub fn three_squares_witness(n: u64) -> Option<(u64, u64, u64)> {
    let mut x = n.sqrt();
    loop {
        let r = n - x * x;
        // y <= x and y² >= r / 2
        let mut y = r.sqrt().min(x);
        while 2 * y * y >= r {
            let rz = r - y * y;
            let z = rz.sqrt();
            if z * z == rz {
                return Some((x, y, z));
            }
            if y == 0 {
                break;
            }
            y -= 1;
        }
        if x == 0 || 3 * x * x < n {
            return None;
        }
        x -= 1;
    }
}

/// `{x² mod m : 1 <= x <= m}`
pub fn qr_residues(m: u64) -> Result<BTreeSet<u64>> {
    if m < 2 {
        return Err(Error::domain(format!(
            "quadratic residues need m >= 2, got {m}"
        )));
    }
    Ok((1..=m)
        .map(|x| ((x as u128 * x as u128) % m as u128) as u64)
        .collect())
}
