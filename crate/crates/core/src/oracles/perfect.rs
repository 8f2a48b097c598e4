//! Even perfect numbers from the Mersenne exponent table.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};

use super::membership::{merge_assumptions, Assumption, Membership, Witness};
use super::primality::{is_prime, is_prime_u64, Primality};
use super::tables::Tables;
use crate::error::{Error, Result};

pub fn perfect_from_exponent(p: u64) -> BigUint {
    let m = (BigUint::one() << p) - 1u32;
    m << (p - 1)
}

/// Exponents up to this are re-proved by Lucas-Lehmer; larger ones are taken from the table.
pub const LUCAS_LEHMER_LIMIT: u64 = 20_000;

fn mod_mersenne(mut x: BigUint, p: u64, m: &BigUint) -> BigUint {
    while x.bits() > p {
        x = (&x & m) + (&x >> p);
    }
    if &x == m {
        BigUint::ZERO
    } else {
        x
    }
}

/// Lucas-Lehmer: for an odd prime `p`, `2^p - 1` is prime iff `s_(p-2) = 0`.
pub fn lucas_lehmer(p: u64) -> bool {
    if p == 2 {
        return true;
    }
    if !is_prime_u64(p) {
        return false;
    }
    let m = (BigUint::one() << p) - 1u32;
    let mut s = BigUint::from(4u32);
    for _ in 0..p - 2 {
        s = mod_mersenne(&s * &s + &m - 2u32, p, &m);
    }
    s == BigUint::ZERO
}

/// Every `2^p - 1` up to the Lucas-Lehmer limit is re-proved; larger entries
/// are accepted from the table under an assumption.
pub fn even_perfects_with_assumptions(
    count: usize,
    tables: &Tables,
) -> Result<(Vec<BigUint>, Vec<Assumption>)> {
    let insufficient = |have: usize| Error::InsufficientData {
        table: tables.mersenne_path(),
        detail: format!("{count} even perfect numbers requested, table lists {have} exponents"),
    };
    let Some(table) = &tables.mersenne else {
        return Err(insufficient(0));
    };
    if count > table.exponents.len() {
        return Err(insufficient(table.exponents.len()));
    }
    let mut out = Vec::with_capacity(count);
    let mut assumptions = Vec::new();
    for &p in &table.exponents[..count] {
        if p > LUCAS_LEHMER_LIMIT {
            merge_assumptions(
                &mut assumptions,
                [Assumption::Other(format!(
                    "2^{p}-1 prime as listed in {}",
                    tables.mersenne_path()
                ))],
            );
        } else if !lucas_lehmer(p) {
            return Err(Error::Table {
                table: tables.mersenne_path(),
                line: 0,
                message: format!("2^{p}-1 is composite"),
            });
        }
        out.push(perfect_from_exponent(p));
    }
    Ok((out, assumptions))
}

pub fn even_perfects(count: usize, tables: &Tables) -> Result<Vec<BigUint>> {
    even_perfects_with_assumptions(count, tables).map(|(v, _)| v)
}

/// Strips the power of two and checks the odd part is the matching Mersenne prime.
pub fn is_even_perfect(n: &BigUint) -> Result<Membership> {
    if n.is_odd() {
        return Ok(Membership::NonMember {
            assumptions: vec![Assumption::NoOddPerfect],
        });
    }
    let a = n.trailing_zeros().unwrap_or(0);
    let odd = n >> a;
    let p = a + 1;
    if odd != (BigUint::one() << p) - 1u32 {
        return Ok(Membership::non_member());
    }
    if p <= LUCAS_LEHMER_LIMIT {
        return Ok(if lucas_lehmer(p) {
            Membership::member(Witness::MersenneExponent(p))
        } else {
            Membership::non_member()
        });
    }
    Ok(match is_prime(&odd)? {
        Primality::Composite => Membership::non_member(),
        verdict => {
            let m = Membership::member(Witness::MersenneExponent(p));
            if verdict == Primality::ProbablePrime {
                m.with_assumptions([Assumption::ProbablePrime(odd)])
            } else {
                m
            }
        }
    })
}

/// Last two decimal digits.
pub fn decimal_ending(n: &BigUint) -> u32 {
    (n % 100u32).to_u32().unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::tables::MersenneTable;

    fn tables() -> Tables {
        Tables {
            mersenne: Some(MersenneTable::parse("m.txt", "2\n3\n5\n7\n13\n").unwrap()),
            ..Default::default()
        }
    }

    fn sigma_is_double(n: u64) -> bool {
        (1..n).filter(|d| n.is_multiple_of(*d)).sum::<u64>() == n
    }

    #[test]
    fn first_perfects() {
        let p = even_perfects(4, &tables()).unwrap();
        assert_eq!(p, [6u32, 28, 496, 8128].map(BigUint::from));
        assert!(sigma_is_double(8128));
        assert_eq!(
            even_perfects(1, &tables()).unwrap(),
            vec![BigUint::from(6u32)]
        );
        let err = even_perfects(6, &tables()).unwrap_err();
        assert!(matches!(err, Error::InsufficientData { .. }));
        assert!(err.to_string().contains("mersenne_exponents.txt"));
    }

    #[test]
    fn lucas_lehmer_matches_trial_division() {
        for p in 2..62u64 {
            let m = (1u64 << p) - 1;
            assert_eq!(lucas_lehmer(p), is_prime_u64(m), "p={p}");
        }
        assert!(lucas_lehmer(127) && lucas_lehmer(521) && !lucas_lehmer(523));
    }

    #[test]
    fn composite_exponent_is_rejected() {
        let t = Tables {
            mersenne: Some(MersenneTable::parse("m", "2\n11\n").unwrap()),
            ..Default::default()
        };
        assert!(even_perfects(2, &t).is_err());
    }

    #[test]
    fn membership_matches_divisor_sums() {
        for n in 1..=10_000u64 {
            let m = is_even_perfect(&BigUint::from(n)).unwrap();
            assert_eq!(m.is_member(), n % 2 == 0 && sigma_is_double(n), "{n}");
        }
        let odd = is_even_perfect(&BigUint::from(945u32)).unwrap();
        assert_eq!(odd.assumptions(), &[Assumption::NoOddPerfect]);
        let big = perfect_from_exponent(127);
        assert!(is_even_perfect(&big).unwrap().is_member());
    }
}
