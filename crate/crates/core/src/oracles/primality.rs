//! Primality: deterministic Miller-Rabin below 2^64, Baillie-PSW above.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Primality {
    Prime,
    /// Passed Baillie-PSW; not certified.
    ProbablePrime,
    /// Not prime (includes 1).
    Composite,
}

impl Primality {
    pub fn is_probably_prime(self) -> bool {
        !matches!(self, Primality::Composite)
    }
}

#[inline]
pub(crate) fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

fn strong_probable_prime_u64(n: u64, a: u64) -> bool {
    let a = a % n;
    if a == 0 {
        return true;
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    let mut x = pow_mod(a, d, n);
    if x == 1 || x == n - 1 {
        return true;
    }
    for _ in 1..s {
        x = mul_mod(x, x, n);
        if x == n - 1 {
            return true;
        }
    }
    false
}

/// Deterministic for every 64-bit input (first twelve prime bases).
pub fn is_prime_u64(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    if n < 41 * 41 {
        return true;
    }
    BASES.iter().all(|&a| strong_probable_prime_u64(n, a))
}

pub fn is_prime(n: &BigUint) -> Result<Primality> {
    if n.is_zero() {
        return Err(Error::domain("primality of 0 is undefined here"));
    }
    if let Some(small) = n.to_u64() {
        return Ok(if is_prime_u64(small) {
            Primality::Prime
        } else {
            Primality::Composite
        });
    }
    Ok(if baillie_psw(n) {
        Primality::ProbablePrime
    } else {
        Primality::Composite
    })
}

/// Baillie-PSW: trial division by tiny primes, a strong base-2 test and a
/// strong Lucas test with Selfridge parameters.
pub fn baillie_psw(n: &BigUint) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    for p in [2u32, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47] {
        if (n % p).is_zero() {
            return false;
        }
    }
    strong_probable_prime(n, &BigUint::from(2u32)) && strong_lucas_probable_prime(n)
}

pub fn strong_probable_prime(n: &BigUint, a: &BigUint) -> bool {
    let one = BigUint::one();
    let n1 = n - &one;
    let s = n1.trailing_zeros().expect("n > 1");
    let d = &n1 >> s;
    let mut x = a.modpow(&d, n);
    if x == one || x == n1 {
        return true;
    }
    for _ in 1..s {
        x = (&x * &x) % n;
        if x == n1 {
            return true;
        }
    }
    false
}

/// Jacobi symbol (a/n) for odd n.
pub(crate) fn jacobi(a: &BigUint, n: &BigUint) -> i32 {
    let mut a = a % n;
    let mut n = n.clone();
    let mut t = 1;
    while !a.is_zero() {
        let z = a.trailing_zeros().unwrap_or(0);
        a >>= z;
        let n_mod_8 = (&n % 8u32).to_u32().unwrap();
        if z % 2 == 1 && (n_mod_8 == 3 || n_mod_8 == 5) {
            t = -t;
        }
        if (&a % 4u32) == BigUint::from(3u32) && n_mod_8 % 4 == 3 {
            t = -t;
        }
        std::mem::swap(&mut a, &mut n);
        a %= &n;
    }
    if n.is_one() {
        t
    } else {
        0
    }
}

fn signed_mod(v: i64, n: &BigUint) -> BigUint {
    let m = BigUint::from(v.unsigned_abs()) % n;
    if v < 0 && !m.is_zero() {
        n - m
    } else {
        m
    }
}

fn half_mod(x: BigUint, n: &BigUint) -> BigUint {
    if x.is_odd() {
        (x + n) >> 1
    } else {
        x >> 1
    }
}

fn strong_lucas_probable_prime(n: &BigUint) -> bool {
    let root = n.sqrt();
    if &root * &root == *n {
        return false;
    }
    // Selfridge: first D in 5, -7, 9, -11, ... with (D/n) = -1
    let mut d_val: i64 = 5;
    loop {
        let dm = signed_mod(d_val, n);
        match jacobi(&dm, n) {
            -1 => break,
            0 if dm != BigUint::zero() => return false,
            _ => {}
        }
        d_val = if d_val > 0 { -(d_val + 2) } else { -d_val + 2 };
    }
    let q_val = (1 - d_val) / 4;
    let d = signed_mod(d_val, n);
    let q = signed_mod(q_val, n);
    let two = BigUint::from(2u32);

    let np1 = n + 1u32;
    let s = np1.trailing_zeros().expect("n + 1 > 0");
    let k = &np1 >> s;

    // P = 1: U_1 = 1, V_1 = 1, Q^1
    let mut u = BigUint::one();
    let mut v = BigUint::one();
    let mut qk = q.clone();
    let bits = k.bits();
    for i in (0..bits - 1).rev() {
        u = (&u * &v) % n;
        v = (&v * &v + n * &two - (&qk * &two) % n) % n;
        qk = (&qk * &qk) % n;
        if k.bit(i) {
            let nu = half_mod(&u + &v, n);
            let nv = half_mod(&d * &u + &v, n);
            u = nu % n;
            v = nv % n;
            qk = (&qk * &q) % n;
        }
    }
    if u.is_zero() || v.is_zero() {
        return true;
    }
    for _ in 1..s {
        v = (&v * &v + n * &two - (&qk * &two) % n) % n;
        if v.is_zero() {
            return true;
        }
        qk = (&qk * &qk) % n;
    }
    false
}
