//! Integer factorization: trial division, table lookup, Pollard rho (Brent).

use std::collections::BTreeMap;

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::membership::{merge_assumptions, Assumption};
use super::primality::{is_prime, mul_mod, Primality};
use super::sieve::{primes_up_to, small_primes};
use super::tables::Tables;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct FactorPolicy {
    pub trial_bound: u64,
    /// iteration budget per Pollard-rho attempt
    pub rho_rounds: u64,
    pub seed: u64,
}

impl Default for FactorPolicy {
    fn default() -> Self {
        FactorPolicy {
            trial_bound: 1_000_000,
            rho_rounds: 1 << 20,
            seed: 0x5eed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum FactorStatus {
    Complete,
    Partial { trial_bound: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    pub n: BigUint,
    /// ascending primes with exponents
    pub factors: Vec<(BigUint, u32)>,
    /// composite part left unfactored
    pub cofactor: Option<BigUint>,
    pub status: FactorStatus,
    pub assumptions: Vec<Assumption>,
}

impl Factorization {
    pub fn is_complete(&self) -> bool {
        self.status == FactorStatus::Complete
    }

    pub fn product(&self) -> BigUint {
        let mut p: BigUint = self.factors.iter().map(|(q, e)| q.pow(*e)).product();
        if let Some(c) = &self.cofactor {
            p *= c;
        }
        p
    }

    pub fn exponent_of(&self, p: &BigUint) -> u32 {
        self.factors
            .iter()
            .find(|(q, _)| q == p)
            .map_or(0, |(_, e)| *e)
    }
}

impl std::fmt::Display for Factorization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts: Vec<String> = self
            .factors
            .iter()
            .map(|(p, e)| {
                if *e == 1 {
                    p.to_string()
                } else {
                    format!("{p}^{e}")
                }
            })
            .collect();
        if let Some(c) = &self.cofactor {
            parts.push(format!("[{c}]"));
        }
        if parts.is_empty() {
            parts.push("1".into());
        }
        write!(f, "{}", parts.join("*"))
    }
}

fn trial_primes(bound: u64) -> std::borrow::Cow<'static, [u64]> {
    let small = small_primes();
    if bound <= 1_000_000 {
        let end = small.partition_point(|&p| p <= bound);
        std::borrow::Cow::Borrowed(&small[..end])
    } else {
        std::borrow::Cow::Owned(primes_up_to(bound.min(100_000_000)))
    }
}

pub fn factorize(n: &BigUint, policy: &FactorPolicy, tables: &Tables) -> Result<Factorization> {
    if n.is_zero() {
        return Err(Error::domain("cannot factor 0"));
    }
    let mut found: BTreeMap<BigUint, u32> = BTreeMap::new();
    let mut assumptions = Vec::new();
    let mut rest = n.clone();
    let primes = trial_primes(policy.trial_bound);
    let bound = primes.last().copied().unwrap_or(1);

    for &p in primes.iter() {
        if let Some(r) = rest.to_u64() {
            if p.saturating_mul(p) > r {
                break;
            }
            if r % p == 0 {
                let mut r = r;
                let mut e = 0;
                while r % p == 0 {
                    r /= p;
                    e += 1;
                }
                found.insert(BigUint::from(p), e);
                rest = BigUint::from(r);
            }
        } else if (&rest % p).is_zero() {
            let mut e = 0;
            while (&rest % p).is_zero() {
                rest /= p;
                e += 1;
            }
            found.insert(BigUint::from(p), e);
        }
    }
    let bound_sq = BigUint::from(bound) * bound;

    if rest > bound_sq {
        for table in &tables.factor_tables {
            let mut used = false;
            for q in table.primes() {
                if q <= &BigUint::from(bound) {
                    continue;
                }
                while (&rest % q).is_zero() {
                    rest /= q;
                    *found.entry(q.clone()).or_insert(0) += 1;
                    used = true;
                }
            }
            if used {
                merge_assumptions(
                    &mut assumptions,
                    [Assumption::FactorTable(table.name.clone())],
                );
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(policy.seed);
    let mut cofactor = BigUint::one();
    let mut queue = vec![rest];
    while let Some(c) = queue.pop() {
        if c.is_one() {
            continue;
        }
        // no factor at or below the trial bound survives, so anything below its square is prime
        if c < bound_sq {
            *found.entry(c).or_insert(0) += 1;
            continue;
        }
        match is_prime(&c)? {
            Primality::Prime => *found.entry(c).or_insert(0) += 1,
            Primality::ProbablePrime => {
                merge_assumptions(&mut assumptions, [Assumption::ProbablePrime(c.clone())]);
                *found.entry(c).or_insert(0) += 1;
            }
            Primality::Composite => match split(&c, policy.rho_rounds, &mut rng) {
                Some(d) => {
                    let other = &c / &d;
                    queue.push(d);
                    queue.push(other);
                }
                None => cofactor *= c,
            },
        }
    }

    let partial = !cofactor.is_one();
    if partial {
        merge_assumptions(
            &mut assumptions,
            [Assumption::UnfactoredCofactor(cofactor.clone())],
        );
    }
    let f = Factorization {
        n: n.clone(),
        factors: found.into_iter().collect(),
        cofactor: partial.then_some(cofactor),
        status: if partial {
            FactorStatus::Partial {
                trial_bound: policy.trial_bound,
            }
        } else {
            FactorStatus::Complete
        },
        assumptions,
    };
    debug_assert_eq!(f.product(), *n, "factorization must multiply back");
    Ok(f)
}

/// A nontrivial divisor of composite `n`, or `None` when the budget runs out.
fn split(n: &BigUint, rounds: u64, rng: &mut ChaCha8Rng) -> Option<BigUint> {
    let root = n.sqrt();
    if &root * &root == *n {
        return Some(root);
    }
    if let Some(small) = n.to_u64() {
        return rho_u64(small, rounds, rng).map(BigUint::from);
    }
    rho_big(n, rounds, rng)
}

fn gcd_u64(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

/// Pollard rho with Brent's cycle detection and batched gcds.
pub(crate) fn rho_u64(n: u64, rounds: u64, rng: &mut ChaCha8Rng) -> Option<u64> {
    if n.is_multiple_of(2) {
        return Some(2);
    }
    const BATCH: u64 = 128;
    for _attempt in 0..8 {
        let c = rng.gen_range(1..n);
        let f = |v: u64| ((mul_mod(v, v, n) as u128 + c as u128) % n as u128) as u64;
        let mut y = rng.gen_range(0..n);
        let (mut x, mut ys) = (y, y);
        let (mut g, mut r, mut q) = (1u64, 1u64, 1u64);
        let mut spent = 0u64;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..BATCH.min(r - k) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = gcd_u64(q, n);
                k += BATCH;
            }
            spent += r;
            r *= 2;
            if spent > rounds {
                break;
            }
        }
        if g == n {
            loop {
                ys = f(ys);
                g = gcd_u64(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g > 1 && g < n {
            return Some(g);
        }
    }
    None
}

fn rho_big(n: &BigUint, rounds: u64, rng: &mut ChaCha8Rng) -> Option<BigUint> {
    const BATCH: u64 = 128;
    let one = BigUint::one();
    for _attempt in 0..4 {
        let c = rng.gen_biguint_range(&one, n);
        let f = |v: &BigUint| (v * v + &c) % n;
        let mut y = rng.gen_biguint_below(n);
        let mut x = y.clone();
        let mut ys = y.clone();
        let mut g = one.clone();
        let mut q = one.clone();
        let mut r = 1u64;
        let mut spent = 0u64;
        let diff = |a: &BigUint, b: &BigUint| if a > b { a - b } else { b - a };
        while g.is_one() {
            x = y.clone();
            for _ in 0..r {
                y = f(&y);
            }
            let mut k = 0;
            while k < r && g.is_one() {
                ys = y.clone();
                for _ in 0..BATCH.min(r - k) {
                    y = f(&y);
                    q = (&q * diff(&x, &y)) % n;
                }
                g = q.gcd(n);
                k += BATCH;
            }
            spent += r;
            r *= 2;
            if spent > rounds {
                break;
            }
        }
        if &g == n {
            loop {
                ys = f(&ys);
                g = diff(&x, &ys).gcd(n);
                if !g.is_one() {
                    break;
                }
            }
        }
        if !g.is_one() && &g != n {
            return Some(g);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fact(n: u64) -> String {
        factorize(
            &BigUint::from(n),
            &FactorPolicy::default(),
            &Tables::default(),
        )
        .unwrap()
        .to_string()
    }

    #[test]
    fn examples() {
        assert_eq!(fact(5550), "2*3*5^2*37");
        assert_eq!(fact(55_555_555_550), "2*5^2*11*41*271*9091");
        assert_eq!(fact(8), "2^3");
        assert_eq!(fact(1), "1");
        assert_eq!(fact(5_555_555_550), "2*3^2*5^2*37*333667");
        assert!(factorize(
            &BigUint::zero(),
            &FactorPolicy::default(),
            &Tables::default()
        )
        .is_err());
    }

    #[test]
    fn rho_splits_beyond_trial_bound() {
        // two primes above 10^6
        let p = 1_000_003u64;
        let q = 998_244_353u64;
        let policy = FactorPolicy {
            trial_bound: 1000,
            ..Default::default()
        };
        let f = factorize(&BigUint::from(p * q), &policy, &Tables::default()).unwrap();
        assert!(f.is_complete());
        assert_eq!(f.factors.len(), 2);

        let big = BigUint::from(18_446_744_073_709_551_557u64) * 1_000_000_007u64;
        let f = factorize(&big, &FactorPolicy::default(), &Tables::default()).unwrap();
        assert_eq!(f.to_string(), "1000000007*18446744073709551557");
    }

    #[test]
    fn rho_near_the_top_of_u64() {
        // product of the two largest primes below 2^32
        assert_eq!(fact(4_294_967_291 * 4_294_967_279), "4294967279*4294967291");
    }

    #[test]
    fn partial_when_budget_is_tiny() {
        let p = BigUint::from(18_446_744_073_709_551_557u64);
        let q = BigUint::from(18_446_744_073_709_551_533u64);
        let policy = FactorPolicy {
            trial_bound: 100,
            rho_rounds: 10,
            seed: 1,
        };
        let n = &p * &q;
        let f = factorize(&n, &policy, &Tables::default()).unwrap();
        assert!(!f.is_complete());
        assert_eq!(f.cofactor.as_ref(), Some(&n));
        assert_eq!(f.product(), n);
    }

    #[test]
    fn tables_supply_large_factors() {
        let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data");
        let tables = Tables::load_dir(&dir).unwrap();
        let r67 = crate::oracles::tables::repunit(67);
        let n = &r67 * 50u32;
        let f = factorize(&n, &FactorPolicy::default(), &tables).unwrap();
        assert!(f.is_complete());
        assert!(f
            .assumptions
            .iter()
            .any(|a| matches!(a, Assumption::FactorTable(t) if t == "repunit_factors.txt")));
        assert_eq!(f.product(), n);
    }
}
