//! Finite case analyses behind the tail families and the two digit claims.

mod pow2;
mod tail;

pub use pow2::{pow2_digit_check, Pow2Report, POW2_BASE_CASE};
pub use tail::{phi_tail_check, psi_tail_check, tail_value, TailOutcome, TailVerdict};

use num_bigint::BigUint;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerals::{reduce_to_antichain, to_numeral, Antichain};
use crate::oracles::membership::Assumption;
use crate::oracles::perfect::{decimal_ending, even_perfects_with_assumptions};
use crate::oracles::Tables;

/// Last two digits of every even perfect number other than 6 and 496.
pub const LUCAS_ENDINGS: [u32; 5] = [16, 28, 36, 56, 76];

#[derive(Clone, Debug, Serialize)]
pub struct EndingRow {
    #[serde(serialize_with = "crate::report::big_string")]
    pub value: BigUint,
    pub ending: u32,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct LucasReport {
    pub count: usize,
    pub rows: Vec<EndingRow>,
    pub holds: bool,
    /// minimal set of the first `count` even perfect numbers, per base
    pub minimal_sets: Vec<Antichain>,
    pub assumptions: Vec<Assumption>,
}

pub fn lucas_ending_check(count: usize, bases: &[u32], tables: &Tables) -> Result<LucasReport> {
    if count == 0 {
        return Err(Error::domain("count must be >= 1"));
    }
    let (perfects, mut assumptions) = even_perfects_with_assumptions(count, tables)?;
    let rows: Vec<EndingRow> = perfects
        .iter()
        .map(|v| {
            let ending = decimal_ending(v);
            let exempt = *v == BigUint::from(6u32) || *v == BigUint::from(496u32);
            EndingRow {
                value: v.clone(),
                ending,
                ok: exempt || LUCAS_ENDINGS.contains(&ending),
            }
        })
        .collect();
    let holds = rows.iter().all(|r| r.ok);
    let mut minimal_sets = Vec::new();
    for &b in bases {
        let nums = perfects
            .iter()
            .map(|v| to_numeral(v.clone(), b))
            .collect::<Result<Vec<_>>>()?;
        minimal_sets.push(reduce_to_antichain(&nums)?);
    }
    assumptions.push(Assumption::NoOddPerfect);
    assumptions.push(Assumption::Other(format!(
        "minimal sets computed from the first {count} even perfect numbers"
    )));
    Ok(LucasReport {
        count,
        rows,
        holds,
        minimal_sets,
        assumptions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tables() -> Tables {
        let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data");
        Tables::load_dir(&dir).unwrap()
    }

    #[test]
    fn lucas_endings_and_conditional_sets() {
        let r = lucas_ending_check(12, &[10, 2], &tables()).unwrap();
        assert!(r.holds);
        assert_eq!(r.rows.len(), 12);
        assert_eq!(r.minimal_sets[0].to_string(), "{6, 28}");
        assert_eq!(
            r.minimal_sets[1]
                .elements()
                .iter()
                .map(|n| n.to_string())
                .collect::<Vec<_>>(),
            ["110"]
        );
        assert!(r.assumptions.contains(&Assumption::NoOddPerfect));
    }

    fn proper_divisor_sum(n: u64) -> u64 {
        let mut s = 1;
        let mut d = 2;
        while d * d <= n {
            if n.is_multiple_of(d) {
                s += d;
                if d * d != n {
                    s += n / d;
                }
            }
            d += 1;
        }
        s
    }

    #[test]
    fn ending_rule_on_divisor_sum_perfects() {
        // even n = 2^a * q with q odd, searched by divisor sums
        let mut found = Vec::new();
        for a in 1..13u32 {
            for q in (3..20_000u64).step_by(2) {
                let n = (1u64 << a) * q;
                if proper_divisor_sum(n) == n {
                    found.push(n);
                }
            }
        }
        found.sort();
        assert_eq!(found, [6, 28, 496, 8128, 33_550_336]);
        for n in found {
            assert!(n == 6 || n == 496 || LUCAS_ENDINGS.contains(&((n % 100) as u32)));
        }
    }

    #[test]
    fn missing_table_is_reported() {
        assert!(matches!(
            lucas_ending_check(3, &[10], &Tables::default()),
            Err(Error::InsufficientData { .. })
        ));
    }
}
