//! The `5…50` tails: is `n = 2·5²·R_ℓ` a value of φ or ψ?
//!
//! `n ≡ 2 (mod 4)`, so a preimage is `p^k` or `2p^k` for an odd prime `p`.
//! Each exponent case is settled separately and recorded in the trace.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::oracles::arith::{quadratic_root, ArithFn};
use crate::oracles::factor::factorize;
use crate::oracles::membership::{merge_assumptions, Assumption};
use crate::oracles::primality::{is_prime, Primality};
use crate::oracles::tables::{repunit, REPUNIT_FILE};
use crate::oracles::{phi_eval, psi_eval, OracleContext};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum TailOutcome {
    InImage {
        #[serde(serialize_with = "crate::report::big_string")]
        witness: BigUint,
    },
    NotInImage {
        trace: Vec<String>,
    },
    Unknown {
        missing: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TailVerdict {
    pub function: &'static str,
    pub ell: usize,
    #[serde(serialize_with = "crate::report::big_string")]
    pub value: BigUint,
    pub outcome: TailOutcome,
    pub assumptions: Vec<Assumption>,
}

impl TailVerdict {
    pub fn in_image(&self) -> Option<bool> {
        match self.outcome {
            TailOutcome::InImage { .. } => Some(true),
            TailOutcome::NotInImage { .. } => Some(false),
            TailOutcome::Unknown { .. } => None,
        }
    }
}

/// `5…50` with `ell` fives.
pub fn tail_value(ell: usize) -> BigUint {
    repunit(ell) * 50u32
}

struct Case {
    assumptions: Vec<Assumption>,
    trace: Vec<String>,
}

impl Case {
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

/// Prime factorization of `R_ℓ`: trial division and rho, with factor
/// tables supplying primes beyond the trial bound. `Err` names what is missing.
fn repunit_factors(
    ctx: &OracleContext,
    ell: usize,
    case: &mut Case,
) -> Result<std::result::Result<Vec<(BigUint, u32)>, String>> {
    let f = factorize(&repunit(ell), &ctx.policy, &ctx.tables)?;
    if let Some(c) = f.cofactor {
        return Ok(Err(format!(
            "{REPUNIT_FILE} has no usable entry for R{ell}; unfactored cofactor {c}"
        )));
    }
    merge_assumptions(&mut case.assumptions, f.assumptions);
    Ok(Ok(f.factors))
}

fn check(ctx: &OracleContext, ell: usize, f: ArithFn) -> Result<TailVerdict> {
    if ell < 3 {
        return Err(Error::domain(format!(
            "tail checks start at three fives, got {ell}"
        )));
    }
    let name = match f {
        ArithFn::Phi => "phi",
        ArithFn::Psi => "psi",
    };
    let n = tail_value(ell);
    debug_assert_eq!((&n % 4u32).to_u32(), Some(2));
    let mut case = Case {
        assumptions: Vec::new(),
        trace: Vec::new(),
    };
    let done = |outcome: TailOutcome, case: Case| {
        Ok(TailVerdict {
            function: name,
            ell,
            value: n.clone(),
            outcome,
            assumptions: case.assumptions,
        })
    };
    let hit = |w: BigUint, case: Case| -> Result<TailVerdict> {
        let image = match f {
            ArithFn::Phi => phi_eval(ctx, &w)?,
            ArithFn::Psi => psi_eval(ctx, &w)?,
        };
        assert_eq!(image, n, "witness must re-evaluate to the tail value");
        done(TailOutcome::InImage { witness: w }, case)
    };
    let divisible_by_3 = (&n % 3u32).is_zero();

    // k = 1
    match f {
        ArithFn::Phi => {
            let p = &n + 1u32;
            if case.prime(&p)? {
                return hit(p, case);
            }
            case.trace.push("k=1: n+1 is composite".into());
        }
        ArithFn::Psi => {
            let p = &n - 1u32;
            if case.prime(&p)? {
                return hit(p, case);
            }
            if divisible_by_3 {
                let q = &n / 3u32 - 1u32;
                if q.is_odd() && case.prime(&q)? {
                    return hit(q * 2u32, case);
                }
                case.trace.push("k=1: n-1 and n/3-1 are composite".into());
            } else {
                case.trace
                    .push("k=1: n-1 is composite, 3 does not divide n".into());
            }
        }
    }

    // k = 2
    let mut targets = vec![(n.clone(), "p(p-1)=n")];
    if f == ArithFn::Psi {
        targets[0].1 = "p(p+1)=n";
        if divisible_by_3 {
            targets.push((&n / 3u32, "3p(p+1)=n"));
        }
    }
    for (i, (t, label)) in targets.iter().enumerate() {
        match quadratic_root(t, f) {
            Some(p) if p.is_odd() && case.prime(&p)? => {
                let m = &p * &p;
                return hit(if i == 1 { m * 2u32 } else { m }, case);
            }
            Some(p) => case
                .trace
                .push(format!("k=2: {label} gives p={p}, not an odd prime")),
            None => case.trace.push(format!("k=2: {label} has no integer root")),
        }
    }

    // k >= 3: odd p with p^2 | n; n = 2·5²·R_ℓ and R_ℓ is prime to 10
    let mut squares = vec![(BigUint::from(5u32), 2u32)];
    match repunit_factors(ctx, ell, &mut case)? {
        Ok(factors) => squares.extend(factors.into_iter().filter(|(_, e)| *e >= 2)),
        Err(missing) => return done(TailOutcome::Unknown { missing }, case),
    }
    for (p, e) in &squares {
        let block = match f {
            ArithFn::Phi => p - 1u32,
            ArithFn::Psi => {
                if (p + 1u32) % 4u32 == BigUint::zero() {
                    case.trace.push(format!("k>=3: p={p} has 4 | p+1"));
                    continue;
                }
                p + 1u32
            }
        };
        let mut options = Vec::new();
        for j in 2..=*e {
            let v = p.pow(j) * &block;
            if v == n {
                return hit(p.pow(j + 1), case);
            }
            options.push(v.to_string());
            if f == ArithFn::Psi {
                let v3 = v * 3u32;
                if v3 == n {
                    return hit(p.pow(j + 1) * 2u32, case);
                }
                options.push(v3.to_string());
            }
        }
        case.trace.push(format!(
            "k>=3: p={p} (p^{e} | n) only reaches n in {{{}}}",
            options.join(", ")
        ));
    }
    let trace = std::mem::take(&mut case.trace);
    done(TailOutcome::NotInImage { trace }, case)
}

pub fn phi_tail_check(ctx: &OracleContext, ell: usize) -> Result<TailVerdict> {
    check(ctx, ell, ArithFn::Phi)
}

pub fn psi_tail_check(ctx: &OracleContext, ell: usize) -> Result<TailVerdict> {
    check(ctx, ell, ArithFn::Psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::{is_psi_value, is_totient, FactorPolicy, Tables};

    fn ctx() -> OracleContext {
        let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data");
        OracleContext::new(FactorPolicy::default(), Tables::load_dir(&dir).unwrap())
    }

    #[test]
    fn phi_examples() {
        let c = ctx();
        for ell in 3..=10 {
            let v = phi_tail_check(&c, ell).unwrap();
            assert_eq!(v.in_image(), Some(false), "{ell}: {v:?}");
            let TailOutcome::NotInImage { trace } = &v.outcome else {
                unreachable!()
            };
            assert!(trace.iter().any(|t| t.starts_with("k=1")));
            assert!(trace.iter().any(|t| t.starts_with("k=2")));
            assert!(trace.iter().any(|t| t.starts_with("k>=3")));
        }
        let v = phi_tail_check(&c, 11).unwrap();
        assert_eq!(
            v.outcome,
            TailOutcome::InImage {
                witness: BigUint::from(555_555_555_551u64)
            }
        );
        let v3 = phi_tail_check(&c, 3).unwrap();
        let TailOutcome::NotInImage { trace } = &v3.outcome else {
            unreachable!()
        };
        assert!(trace.iter().any(|t| t.contains("p=75")), "{trace:?}");
        assert!(phi_tail_check(&c, 2).is_err());
    }

    #[test]
    fn psi_examples() {
        let c = ctx();
        let v = psi_tail_check(&c, 3).unwrap();
        assert_eq!(v.in_image(), Some(false));
        let v = psi_tail_check(&c, 68).unwrap();
        assert_eq!(v.in_image(), Some(false));
        let v = psi_tail_check(&c, 69).unwrap();
        let TailOutcome::InImage { witness } = &v.outcome else {
            panic!("{v:?}")
        };
        assert_eq!(witness.to_string(), format!("{}49", "5".repeat(68)));
        assert!(v
            .assumptions
            .contains(&Assumption::ProbablePrime(witness.clone())));
    }

    #[test]
    fn p5_branch_only_reaches_150_and_450() {
        let v = psi_tail_check(&ctx(), 4).unwrap();
        let TailOutcome::NotInImage { trace } = &v.outcome else {
            unreachable!()
        };
        assert!(
            trace
                .iter()
                .any(|t| t.contains("p=5 ") && t.contains("150") && t.contains("450")),
            "{trace:?}"
        );
    }

    #[test]
    fn agrees_with_general_deciders() {
        let c = ctx();
        for ell in 3..=12 {
            let n = tail_value(ell);
            assert_eq!(
                phi_tail_check(&c, ell).unwrap().in_image(),
                is_totient(&c, &n).unwrap().decided(),
                "phi {ell}"
            );
            assert_eq!(
                psi_tail_check(&c, ell).unwrap().in_image(),
                is_psi_value(&c, &n).unwrap().decided(),
                "psi {ell}"
            );
        }
    }

    #[test]
    fn missing_repunit_data_is_unknown() {
        let c = OracleContext::new(
            FactorPolicy {
                trial_bound: 1000,
                rho_rounds: 64,
                seed: 7,
            },
            Tables::default(),
        );
        // R_71 has a large composite part beyond any tiny rho budget
        let v = psi_tail_check(&c, 71).unwrap();
        assert!(matches!(v.outcome, TailOutcome::Unknown { .. }), "{v:?}");
    }
}
