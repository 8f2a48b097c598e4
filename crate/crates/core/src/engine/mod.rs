//! Minimal-set computation and completeness checks.

mod algebra;
mod verify;

pub use algebra::{set_algebra_experiment, ExperimentKind, ExperimentVerdict};
pub use verify::{verify_completeness, EvidenceRow};

use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use num_bigint::BigUint;
use serde::{Serialize, Serializer};

use crate::automata::{avoidance_dfa_from_digits, intersect, valid_numeral_dfa, ResidualAnalysis};
use crate::error::{Error, Result};
use crate::numerals::{check_base, render_digits, Antichain, Numeral};
use crate::oracles::membership::merge_assumptions;
use crate::oracles::sieve::DEFAULT_BLOCK;
use crate::oracles::{
    automatic_dfa, enumerator_with_block, is_member, Assumption, OracleContext, OracleSpec,
};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct EngineConfig {
    /// residual families allowed before giving up
    pub family_cap: usize,
    /// fixpoint guard; exceeding it is an error
    pub iteration_cap: usize,
    /// expansions tested per family before declaring it unresolved
    pub family_expansions: usize,
    pub sieve_block: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            family_cap: 64,
            iteration_cap: 100_000,
            family_expansions: 80,
            sieve_block: DEFAULT_BLOCK,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum Mode {
    ExactAutomatic,
    Bounded { bound: u64 },
    VerifiedComplete { assumptions: Vec<Assumption> },
    Undecided { reason: String },
}

impl Mode {
    pub fn is_undecided(&self) -> bool {
        matches!(self, Mode::Undecided { .. })
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::ExactAutomatic => f.write_str("ExactAutomatic"),
            Mode::Bounded { bound } => write!(f, "Bounded({bound})"),
            Mode::VerifiedComplete { assumptions } if assumptions.is_empty() => {
                f.write_str("VerifiedComplete")
            }
            Mode::VerifiedComplete { assumptions } => {
                write!(f, "VerifiedComplete ({} assumptions)", assumptions.len())
            }
            Mode::Undecided { reason } => write!(f, "Undecided: {reason}"),
        }
    }
}

fn ser_elements<S: Serializer>(a: &Antichain, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(a.elements())
}

#[derive(Clone, Debug, Serialize)]
pub struct MinimalSetReport {
    pub spec: OracleSpec,
    pub base: u32,
    pub mode: Mode,
    #[serde(serialize_with = "ser_elements")]
    pub elements: Antichain,
    pub assumptions: Vec<Assumption>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<ResidualAnalysis>,
    /// element digits to membership witness
    pub witnesses: BTreeMap<String, String>,
    /// elements the verifier had to add to the candidate
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub discovered: Vec<Numeral>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub evidence: Vec<EvidenceRow>,
    pub timing_ms: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
}

impl MinimalSetReport {
    fn new(spec: &OracleSpec, base: u32, elements: Antichain, mode: Mode) -> Self {
        MinimalSetReport {
            spec: spec.clone(),
            base,
            mode,
            elements,
            assumptions: Vec::new(),
            residual: None,
            witnesses: BTreeMap::new(),
            discovered: Vec::new(),
            evidence: Vec::new(),
            timing_ms: 0,
            config: None,
        }
    }

    pub fn values(&self) -> Vec<BigUint> {
        self.elements.values()
    }

    /// Element values as decimal strings, for quick comparisons.
    pub fn value_strings(&self) -> Vec<String> {
        self.elements
            .elements()
            .iter()
            .map(|n| n.value().to_string())
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// `digits,value,base` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("digits,value,base\n");
        for n in self.elements.elements() {
            out.push_str(&format!("{},{},{}\n", n, n.value(), n.base()));
        }
        out
    }

    /// Fills witnesses and assumptions from the oracle for every element.
    fn attach_witnesses(&mut self, ctx: &OracleContext) -> Result<()> {
        for n in self.elements.elements() {
            let m = is_member(ctx, &self.spec, n.value())?;
            if let Some(w) = m.witness() {
                self.witnesses.insert(n.to_string(), w.to_string());
            }
            merge_assumptions(&mut self.assumptions, m.assumptions().iter().cloned());
        }
        Ok(())
    }
}

impl fmt::Display for MinimalSetReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "set: {}", self.spec)?;
        writeln!(f, "base: {}", self.base)?;
        writeln!(f, "mode: {}", self.mode)?;
        writeln!(f, "elements ({}): {}", self.elements.len(), self.elements)?;
        if self.base != 10 {
            let values: Vec<String> = self.value_strings();
            writeln!(f, "values: {{{}}}", values.join(", "))?;
        }
        for d in &self.discovered {
            writeln!(f, "discovered: {d}")?;
        }
        for a in &self.assumptions {
            writeln!(f, "assuming: {a}")?;
        }
        if let Some(r) = &self.residual {
            write!(f, "residual: {:?}", r.tag)?;
            if !r.finite_members.is_empty() {
                let m: Vec<String> = r.finite_members.iter().map(|n| n.to_string()).collect();
                write!(f, " members {{{}}}", m.join(", "))?;
            }
            for fam in &r.families {
                write!(f, " family {fam}")?;
            }
            if let Some(reason) = &r.reason {
                write!(f, " ({reason})")?;
            }
            writeln!(f)?;
        }
        if !self.evidence.is_empty() {
            writeln!(f, "evidence:")?;
            for row in &self.evidence {
                writeln!(f, "  {row}")?;
            }
        }
        write!(f, "time: {} ms", self.timing_ms)
    }
}

pub(crate) fn u64_digits(mut n: u64, base: u32, buf: &mut Vec<u8>) {
    buf.clear();
    let b = base as u64;
    while n > 0 {
        buf.push((n % b) as u8);
        n /= b;
    }
    buf.reverse();
}

/// `M(S) ∩ [1, bound]`: members in ascending order, kept when no earlier kept
/// element is a subsequence.
pub fn minimal_set_bounded(
    ctx: &OracleContext,
    spec: &OracleSpec,
    base: u32,
    bound: u64,
    config: &EngineConfig,
) -> Result<MinimalSetReport> {
    check_base(base)?;
    if bound == 0 {
        return Err(Error::domain("bound must be at least 1"));
    }
    let started = Instant::now();
    let mut elements = Antichain::empty(base)?;
    let mut buf = Vec::new();
    for n in enumerator_with_block(spec, bound, config.sieve_block)? {
        u64_digits(n, base, &mut buf);
        if !elements.dominates(&buf) {
            elements.push_larger(Numeral::from_digits(buf.clone(), base)?);
        }
    }
    let mut report = MinimalSetReport::new(spec, base, elements, Mode::Bounded { bound });
    report.attach_witnesses(ctx)?;
    report.timing_ms = started.elapsed().as_millis() as u64;
    Ok(report)
}

/// Exact `M(S)` for sets decided by a residue automaton: repeatedly take the
/// smallest accepted numeral and forbid it as a subsequence.
pub fn minimal_set_automatic(
    ctx: &OracleContext,
    spec: &OracleSpec,
    base: u32,
    config: &EngineConfig,
) -> Result<MinimalSetReport> {
    check_base(base)?;
    let started = Instant::now();
    let Some(lang) = automatic_dfa(spec, base)? else {
        return Err(Error::domain(format!(
            "'{spec}' is not decided by a residue automaton"
        )));
    };
    let mut dfa = intersect(&lang, &valid_numeral_dfa(base)?)?.trimmed();
    let mut elements = Antichain::empty(base)?;
    while let Some(word) = dfa.smallest_accepted() {
        if elements.len() >= config.iteration_cap {
            return Err(Error::IterationCap(config.iteration_cap));
        }
        dfa = intersect(&dfa, &avoidance_dfa_from_digits(base, &[&word]))?.trimmed();
        elements.push_larger(Numeral::from_digits(word, base)?);
    }
    let mut report = MinimalSetReport::new(spec, base, elements, Mode::ExactAutomatic);
    report.attach_witnesses(ctx)?;
    report.timing_ms = started.elapsed().as_millis() as u64;
    Ok(report)
}

/// Text form of a digit string for evidence tables.
pub(crate) fn show(digits: &[u8]) -> String {
    render_digits(digits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ctx() -> OracleContext {
        OracleContext::default()
    }

    fn spec(s: &str) -> OracleSpec {
        OracleSpec::parse(s).unwrap()
    }

    fn bounded(s: &str, base: u32, bound: u64) -> Vec<String> {
        minimal_set_bounded(&ctx(), &spec(s), base, bound, &EngineConfig::default())
            .unwrap()
            .value_strings()
    }

    fn exact(s: &str) -> Vec<String> {
        minimal_set_automatic(&ctx(), &spec(s), 10, &EngineConfig::default())
            .unwrap()
            .value_strings()
    }

    fn strs(v: &[u64]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    /// Direct definition: s is kept iff no smaller member is a subsequence of it.
    fn naive_minimal(members: &[u64], base: u32) -> Vec<u64> {
        let digits = |n: u64| {
            let mut b = Vec::new();
            u64_digits(n, base, &mut b);
            b
        };
        members
            .iter()
            .copied()
            .filter(|&s| {
                !members.iter().any(|&t| {
                    t < s && crate::numerals::is_subsequence_digits(&digits(t), &digits(s))
                })
            })
            .collect()
    }

    #[test]
    fn bounded_examples() {
        assert_eq!(bounded("primes", 2, 100), strs(&[2, 3]));
        assert_eq!(bounded("pow2", 10, 1 << 40), strs(&[1, 2, 4, 8, 65536]));
        assert_eq!(
            bounded("totient+3", 10, 100_000),
            strs(&[4, 5, 7, 9, 11, 13, 21, 23, 31, 33, 61, 63, 81, 83])
        );
        assert_eq!(
            bounded("residue:1+1N0", 10, 1000),
            strs(&[1, 2, 3, 4, 5, 6, 7, 8, 9])
        );
        assert!(
            minimal_set_bounded(&ctx(), &spec("primes"), 10, 0, &EngineConfig::default()).is_err()
        );
    }

    #[test]
    fn exact_examples() {
        assert_eq!(
            exact("qr:6"),
            strs(&[1, 3, 4, 6, 7, 9, 22, 25, 28, 52, 55, 58, 82, 85, 88])
        );
        let m7 = exact("qr:7");
        assert_eq!(m7.len(), 18);
        for v in ["333", "555", "666"] {
            assert!(m7.contains(&v.to_string()));
        }
        assert_eq!(exact("residue:2+10N0"), strs(&[2]));
        assert!(
            minimal_set_automatic(&ctx(), &spec("primes"), 10, &EngineConfig::default()).is_err()
        );
    }

    #[test]
    fn iteration_cap_is_an_error() {
        let cfg = EngineConfig {
            iteration_cap: 3,
            ..Default::default()
        };
        assert!(matches!(
            minimal_set_automatic(&ctx(), &spec("qr:6"), 10, &cfg),
            Err(Error::IterationCap(3))
        ));
    }

    #[test]
    fn fixpoint_agrees_with_bounded_scan() {
        for s in [
            "qr:6",
            "qr:7",
            "qr:5",
            "qr:11",
            "residue:7+10N",
            "residue:3+4N0",
            "qr:6 & residue:1+2N0",
        ] {
            for base in [10u32, 2, 3, 7] {
                let sp = spec(s);
                let e = minimal_set_automatic(&ctx(), &sp, base, &EngineConfig::default()).unwrap();
                let largest = e.elements.elements().last().unwrap().value().clone();
                let bound = u64::try_from(largest * 10u32).unwrap();
                let b = minimal_set_bounded(&ctx(), &sp, base, bound, &EngineConfig::default())
                    .unwrap();
                assert_eq!(e.value_strings(), b.value_strings(), "{s} base {base}");
            }
        }
    }

    #[test]
    fn every_k_digit_set_is_its_own_minimal_set() {
        for k in 1..=3u32 {
            let lo = 10u64.pow(k - 1);
            let hi = 10u64.pow(k) - 1;
            let all: Vec<u64> = (lo..=hi).collect();
            let s = OracleSpec::finite(all.iter().map(|&v| BigUint::from(v))).unwrap();
            let r = minimal_set_bounded(&ctx(), &s, 10, hi, &EngineConfig::default()).unwrap();
            assert_eq!(r.elements.len(), all.len());
        }
    }

    #[test]
    fn report_serializations() {
        let r =
            minimal_set_bounded(&ctx(), &spec("primes"), 2, 100, &EngineConfig::default()).unwrap();
        assert_eq!(r.to_csv(), "digits,value,base\n10,2,2\n11,3,2\n");
        let json: serde_json::Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(json["spec"], "primes");
        assert_eq!(json["mode"]["kind"], "Bounded");
        assert_eq!(json["elements"][1]["digits"], "11");
        assert_eq!(json["elements"][1]["value"], "3");
        assert!(json["timing_ms"].is_u64());
        assert_eq!(r.witnesses["10"], "prime");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn bounded_matches_naive_reference(values in prop::collection::btree_set(1u64..500, 1..60), base in 2u32..11) {
            let members: Vec<u64> = values.into_iter().collect();
            let s = OracleSpec::finite(members.iter().map(|&v| BigUint::from(v))).unwrap();
            let r = minimal_set_bounded(&ctx(), &s, base, 500, &EngineConfig::default()).unwrap();
            let got: Vec<u64> = r.values().iter().map(|v| u64::try_from(v).unwrap()).collect();
            prop_assert_eq!(got, naive_minimal(&members, base));
        }

        #[test]
        fn minimal_set_is_a_fixpoint(values in prop::collection::btree_set(1u64..2000, 1..80)) {
            let s = OracleSpec::finite(values.iter().map(|&v| BigUint::from(v))).unwrap();
            let first = minimal_set_bounded(&ctx(), &s, 10, 2000, &EngineConfig::default()).unwrap();
            let again = OracleSpec::finite(first.values()).unwrap();
            let second = minimal_set_bounded(&ctx(), &again, 10, 2000, &EngineConfig::default()).unwrap();
            prop_assert_eq!(first.value_strings(), second.value_strings());
        }

        #[test]
        fn reported_elements_are_members_and_avoid_smaller_ones(m in 2u64..40, a in 0u64..40) {
            let s = OracleSpec::residue_class(a % m + 1, m, true).unwrap();
            let r = minimal_set_bounded(&ctx(), &s, 10, 5000, &EngineConfig::default()).unwrap();
            let els = r.elements.elements();
            for (i, e) in els.iter().enumerate() {
                prop_assert!(crate::oracles::member_u64(&s, u64::try_from(e.value()).unwrap()));
                let earlier = Antichain::try_from_numerals(10, els[..i].to_vec()).unwrap();
                prop_assert!(!earlier.dominates(e.digits()));
            }
        }
    }
}
