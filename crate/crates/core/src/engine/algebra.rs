use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use super::{minimal_set_bounded, EngineConfig};
use crate::error::Result;
use crate::numerals::Antichain;
use crate::oracles::{OracleContext, OracleSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ExperimentKind {
    /// `M(S ∪ T) ⊆ M(S) ∪ M(T)`
    UnionInclusion,
    /// `M(S ∩ T) ⊆ M(S) ∪ M(T)`, expected to fail in general
    IntersectionInclusion,
    /// `S ⊆ T ⇒ #M(S) ≤ #M(T)`, expected to fail in general
    Monotonicity,
}

impl std::str::FromStr for ExperimentKind {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "union" => Ok(ExperimentKind::UnionInclusion),
            "intersection" => Ok(ExperimentKind::IntersectionInclusion),
            "monotonicity" => Ok(ExperimentKind::Monotonicity),
            _ => Err(crate::Error::parse(
                0,
                format!("unknown experiment '{s}' (union, intersection, monotonicity)"),
            )),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentVerdict {
    pub kind: ExperimentKind,
    pub s: String,
    pub t: String,
    pub base: u32,
    pub bound: u64,
    pub m_s: Vec<String>,
    pub m_t: Vec<String>,
    /// `M(S ∪ T)`, `M(S ∩ T)` or `M(S)` depending on the kind
    pub lhs: Vec<String>,
    /// `M(S) ∪ M(T)`, or `M(T)` for monotonicity
    pub rhs: Vec<String>,
    pub holds: bool,
    pub equality: bool,
    /// elements breaking the inclusion, or showing it strict
    pub witnesses: Vec<String>,
}

impl fmt::Display for ExperimentVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let claim = match self.kind {
            ExperimentKind::UnionInclusion => "M(S|T) in M(S) u M(T)",
            ExperimentKind::IntersectionInclusion => "M(S&T) in M(S) u M(T)",
            ExperimentKind::Monotonicity => "#M(S) <= #M(T)",
        };
        writeln!(
            f,
            "S = {}, T = {}, base {}, bound {}",
            self.s, self.t, self.base, self.bound
        )?;
        writeln!(f, "M(S) ({}): {{{}}}", self.m_s.len(), self.m_s.join(", "))?;
        writeln!(f, "M(T) ({}): {{{}}}", self.m_t.len(), self.m_t.join(", "))?;
        writeln!(f, "lhs ({}): {{{}}}", self.lhs.len(), self.lhs.join(", "))?;
        writeln!(f, "rhs ({}): {{{}}}", self.rhs.len(), self.rhs.join(", "))?;
        let verdict = if !self.holds {
            "fails"
        } else if self.equality {
            "holds with equality"
        } else {
            "holds"
        };
        write!(f, "{claim}: {verdict}")?;
        if !self.witnesses.is_empty() {
            write!(f, " [{}]", self.witnesses.join(", "))?;
        }
        Ok(())
    }
}

fn strings(a: &Antichain) -> Vec<String> {
    a.elements().iter().map(|n| n.to_string()).collect()
}

fn ordered(set: BTreeSet<(usize, String)>) -> Vec<String> {
    set.into_iter().map(|(_, s)| s).collect()
}

fn keyed(v: &[String]) -> BTreeSet<(usize, String)> {
    v.iter().map(|s| (s.len(), s.clone())).collect()
}

/// Bounded test of one set-algebra identity for `M`.
pub fn set_algebra_experiment(
    ctx: &OracleContext,
    kind: ExperimentKind,
    s: &OracleSpec,
    t: &OracleSpec,
    base: u32,
    bound: u64,
) -> Result<ExperimentVerdict> {
    let cfg = EngineConfig::default();
    let m = |spec: &OracleSpec| -> Result<Vec<String>> {
        Ok(strings(
            &minimal_set_bounded(ctx, spec, base, bound, &cfg)?.elements,
        ))
    };
    let m_s = m(s)?;
    let m_t = m(t)?;
    let (lhs, rhs, holds, equality, witnesses) = match kind {
        ExperimentKind::UnionInclusion | ExperimentKind::IntersectionInclusion => {
            let combined = if kind == ExperimentKind::UnionInclusion {
                OracleSpec::Union(vec![s.clone(), t.clone()])
            } else {
                OracleSpec::Intersection(vec![s.clone(), t.clone()])
            };
            let lhs = keyed(&m(&combined)?);
            let rhs: BTreeSet<_> = keyed(&m_s).union(&keyed(&m_t)).cloned().collect();
            let outside: BTreeSet<_> = lhs.difference(&rhs).cloned().collect();
            let holds = outside.is_empty();
            let witnesses = if holds {
                rhs.difference(&lhs).cloned().collect()
            } else {
                outside
            };
            (
                ordered(lhs.clone()),
                ordered(rhs.clone()),
                holds,
                lhs == rhs,
                ordered(witnesses),
            )
        }
        ExperimentKind::Monotonicity => {
            let holds = m_s.len() <= m_t.len();
            let w = vec![
                format!("#M(S)={}", m_s.len()),
                format!("#M(T)={}", m_t.len()),
            ];
            (m_s.clone(), m_t.clone(), holds, m_s.len() == m_t.len(), w)
        }
    };
    Ok(ExperimentVerdict {
        kind,
        s: s.to_string(),
        t: t.to_string(),
        base,
        bound,
        m_s,
        m_t,
        lhs,
        rhs,
        holds,
        equality,
        witnesses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn run(kind: ExperimentKind, s: &str, t: &str, bound: u64) -> ExperimentVerdict {
        let ctx = OracleContext::default();
        set_algebra_experiment(
            &ctx,
            kind,
            &OracleSpec::parse(s).unwrap(),
            &OracleSpec::parse(t).unwrap(),
            10,
            bound,
        )
        .unwrap()
    }

    #[test]
    fn union_of_classes_is_exact() {
        let v = run(
            ExperimentKind::UnionInclusion,
            "residue:2+10N0",
            "residue:3+10N0",
            10_000,
        );
        assert!(v.holds && v.equality);
        assert_eq!(v.lhs, ["2", "3"]);
    }

    #[test]
    fn intersection_can_leave_the_union() {
        let v = run(
            ExperimentKind::IntersectionInclusion,
            "residue:7+10N",
            "primes",
            10_000,
        );
        assert!(!v.holds);
        assert!(v.witnesses.contains(&"227".to_string()), "{v}");
    }

    #[test]
    fn primes_have_more_minimal_elements_than_naturals() {
        let v = run(
            ExperimentKind::Monotonicity,
            "primes",
            "residue:1+1N0",
            100_000,
        );
        assert!(!v.holds);
        assert_eq!(v.m_t.len(), 9);
        assert!(v.m_s.len() > 9);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn union_inclusion_always_holds(a in 1u64..30, m in 1u64..30, b in 1u64..30, n in 1u64..30) {
            let s = OracleSpec::residue_class(a, m, true).unwrap();
            let t = OracleSpec::residue_class(b, n, true).unwrap();
            let v = set_algebra_experiment(&OracleContext::default(), ExperimentKind::UnionInclusion, &s, &t, 10, 3000).unwrap();
            prop_assert!(v.holds, "{}", v);
        }
    }
}
