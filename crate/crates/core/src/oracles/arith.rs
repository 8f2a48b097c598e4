//! Euler phi and Dedekind psi: evaluation and preimage search.
//!
//! The general decider enumerates the primes `p` whose block `φ(p^k)` (resp.
//! `ψ(p^k)`) can divide `n` and recursively assembles coprime prime-power
//! blocks. For values beyond 64 bits only `n ≡ 2 (mod 4)` is handled: then a
//! preimage has a single odd prime divisor, `m = p^k` or `m = 2p^k`, and three
//! exponent cases cover it.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::factor::factorize;
use super::membership::{merge_assumptions, Assumption, Membership, Witness};
use super::primality::{is_prime, is_prime_u64, Primality};
use super::OracleContext;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithFn {
    Phi,
    Psi,
}

impl ArithFn {
    /// The prime-dependent factor of a block: p - 1 or p + 1.
    fn block(self, p: u64) -> u64 {
        match self {
            ArithFn::Phi => p - 1,
            ArithFn::Psi => p + 1,
        }
    }
}

fn eval(ctx: &OracleContext, n: &BigUint, f: ArithFn) -> Result<BigUint> {
    if n.is_zero() {
        return Err(Error::domain("phi/psi are defined for n >= 1"));
    }
    let fac = factorize(n, &ctx.policy, &ctx.tables)?;
    if let Some(c) = fac.cofactor {
        return Err(Error::UnfactoredInput {
            n: n.clone(),
            cofactor: c,
        });
    }
    let mut out = BigUint::one();
    for (p, k) in &fac.factors {
        out *= match f {
            ArithFn::Phi => p - 1u32,
            ArithFn::Psi => p + 1u32,
        };
        out *= p.pow(k - 1);
    }
    Ok(out)
}

/// `φ(n) = ∏ (p-1) p^(k-1)`
pub fn phi_eval(ctx: &OracleContext, n: &BigUint) -> Result<BigUint> {
    eval(ctx, n, ArithFn::Phi)
}

/// `ψ(n) = ∏ (p+1) p^(k-1)`
pub fn psi_eval(ctx: &OracleContext, n: &BigUint) -> Result<BigUint> {
    eval(ctx, n, ArithFn::Psi)
}

pub fn is_totient(ctx: &OracleContext, n: &BigUint) -> Result<Membership> {
    decide(ctx, n, ArithFn::Phi)
}

pub fn is_psi_value(ctx: &OracleContext, n: &BigUint) -> Result<Membership> {
    decide(ctx, n, ArithFn::Psi)
}

fn decide(ctx: &OracleContext, n: &BigUint, f: ArithFn) -> Result<Membership> {
    if n.is_zero() {
        return Err(Error::domain("membership is defined for n >= 1"));
    }
    if let Some(small) = n.to_u64() {
        return Ok(match inverse_search(small, f) {
            Some(m) => Membership::member(Witness::Preimage(BigUint::from(m))),
            None => Membership::non_member(),
        });
    }
    if n.is_odd() {
        // φ and ψ are even above 2; the odd values are tiny
        return Ok(Membership::non_member());
    }
    if (n % 4u32).to_u32() == Some(2) {
        return fast_path(ctx, n, f);
    }
    Ok(Membership::Conditional {
        assumptions: vec![Assumption::Other(
            "general preimage search is limited to 64-bit values unless n ≡ 2 (mod 4)".into(),
        )],
    })
}

fn divisors_u64(n: u64) -> Vec<u64> {
    let mut primes = Vec::new();
    let mut r = n;
    let mut d = 2u64;
    while d * d <= r {
        if r.is_multiple_of(d) {
            let mut e = 0;
            while r.is_multiple_of(d) {
                r /= d;
                e += 1;
            }
            primes.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if r > 1 {
        primes.push((r, 1));
    }
    let mut divs = vec![1u64];
    for (p, e) in primes {
        let len = divs.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                divs.push(divs[i] * pk);
            }
        }
    }
    divs.sort_unstable();
    divs
}

/// Some `m` with `f(m) = n`, or `None`. Exact for every 64-bit `n`.
pub fn inverse_search(n: u64, f: ArithFn) -> Option<u128> {
    if n == 0 {
        return None;
    }
    if n % 2 == 1 {
        return match (f, n) {
            (_, 1) => Some(1),
            (ArithFn::Psi, 3) => Some(2),
            _ => None,
        };
    }
    // candidate primes: p with block(p) | n, ascending
    let primes: Vec<u64> = divisors_u64(n)
        .into_iter()
        .filter_map(|d| match f {
            ArithFn::Phi => d.checked_add(1),
            ArithFn::Psi => (d >= 3).then(|| d - 1),
        })
        .filter(|&p| is_prime_u64(p))
        .collect();
    let mut memo = HashMap::new();
    solve(n, 0, &primes, f, &mut memo)
}

fn solve(
    n: u64,
    lo: usize,
    primes: &[u64],
    f: ArithFn,
    memo: &mut HashMap<(u64, usize), Option<u128>>,
) -> Option<u128> {
    if n == 1 {
        return Some(1);
    }
    if let Some(&hit) = memo.get(&(n, lo)) {
        return hit;
    }
    let mut result = None;
    // largest primes first
    'outer: for i in (lo..primes.len()).rev() {
        let p = primes[i];
        let b = f.block(p);
        if !n.is_multiple_of(b) {
            continue;
        }
        let mut rest = n / b;
        let mut pk = p as u128;
        loop {
            if let Some(m) = solve(rest, i + 1, primes, f, memo) {
                result = Some(m * pk);
                break 'outer;
            }
            if !rest.is_multiple_of(p) {
                break;
            }
            rest /= p;
            pk *= p as u128;
        }
    }
    memo.insert((n, lo), result);
    result
}

/// Tracks primality verdicts that the answer leans on.
struct Ledger {
    assumptions: Vec<Assumption>,
}

impl Ledger {
    fn prime(&mut self, p: &BigUint) -> Result<bool> {
        Ok(match is_prime(p)? {
            Primality::Prime => true,
            Primality::ProbablePrime => {
                merge_assumptions(
                    &mut self.assumptions,
                    [Assumption::ProbablePrime(p.clone())],
                );
                true
            }
            Primality::Composite => false,
        })
    }
}

/// Odd `p` with `p(p ± 1) = target`, via an exact integer square root.
pub(crate) fn quadratic_root(target: &BigUint, f: ArithFn) -> Option<BigUint> {
    let disc = target * 4u32 + 1u32;
    let s = disc.sqrt();
    if &s * &s != disc {
        return None;
    }
    let p = match f {
        ArithFn::Phi => (s + 1u32) >> 1,
        ArithFn::Psi => (s - 1u32) >> 1,
    };
    Some(p)
}

/// `n ≡ 2 (mod 4)`: preimages are `p^k` or `2p^k` with odd prime `p`.
pub(crate) fn fast_path(ctx: &OracleContext, n: &BigUint, f: ArithFn) -> Result<Membership> {
    debug_assert_eq!((n % 4u32).to_u32(), Some(2));
    let mut ledger = Ledger {
        assumptions: Vec::new(),
    };
    let found = |m: BigUint, ledger: Ledger| {
        Ok(Membership::Member {
            witness: Some(Witness::Preimage(m)),
            assumptions: ledger.assumptions,
        })
    };
    let three = BigUint::from(3u32);

    // k = 1
    match f {
        ArithFn::Phi => {
            let p = n + 1u32;
            if ledger.prime(&p)? {
                return found(p, ledger);
            }
        }
        ArithFn::Psi => {
            let p = n - 1u32;
            if ledger.prime(&p)? {
                return found(p, ledger);
            }
            if (n % 3u32).is_zero() {
                let p = n / 3u32 - 1u32;
                if p.is_odd() && ledger.prime(&p)? {
                    return found(p * 2u32, ledger);
                }
            }
        }
    }

    // k = 2: p(p-1) = n, or p(p+1) = n resp. 3p(p+1) = n
    let mut targets = vec![(n.clone(), false)];
    if f == ArithFn::Psi && (n % 3u32).is_zero() {
        targets.push((n / 3u32, true));
    }
    for (t, doubled) in targets {
        if let Some(p) = quadratic_root(&t, f) {
            if p.is_odd() && p > BigUint::one() && ledger.prime(&p)? {
                let m = &p * &p;
                return found(if doubled { m * 2u32 } else { m }, ledger);
            }
        }
    }

    // k >= 3: p^(k-1) | n with k - 1 >= 2
    let fac = factorize(n, &ctx.policy, &ctx.tables)?;
    merge_assumptions(&mut ledger.assumptions, fac.assumptions.iter().cloned());
    if let Some(c) = &fac.cofactor {
        merge_assumptions(
            &mut ledger.assumptions,
            [Assumption::UnfactoredCofactor(c.clone())],
        );
        return Ok(Membership::Conditional {
            assumptions: ledger.assumptions,
        });
    }
    for (p, e) in &fac.factors {
        if p.is_even() || *e < 2 {
            continue;
        }
        let block = match f {
            ArithFn::Phi => p - 1u32,
            ArithFn::Psi => {
                if (p + 1u32) % 4u32 == BigUint::zero() {
                    continue;
                }
                p + 1u32
            }
        };
        for j in 2..=*e {
            let v = p.pow(j) * &block;
            if &v == n {
                return found(p.pow(j + 1), ledger);
            }
            if f == ArithFn::Psi && &v * &three == *n {
                return found(p.pow(j + 1) * 2u32, ledger);
            }
        }
    }
    Ok(Membership::NonMember {
        assumptions: ledger.assumptions,
    })
}
