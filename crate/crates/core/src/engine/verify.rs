use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::time::Instant;

use num_bigint::BigUint;
use serde::Serialize;

use super::{show, EngineConfig, MinimalSetReport, Mode};
use crate::automata::{
    analyze_residual, build_avoidance_dfa, digits_value, intersect, valid_numeral_dfa, ResidualTag,
};
use crate::error::{Error, Result};
use crate::numerals::{reduce_to_antichain, to_numeral, Antichain, Numeral};
use crate::oracles::membership::merge_assumptions;
use crate::oracles::{is_member, necessary_conditions, Assumption, OracleContext, OracleSpec};
use crate::provers::{phi_tail_check, psi_tail_check, TailOutcome, TailVerdict};

/// One tested residual word.
#[derive(Clone, Debug, Serialize)]
pub struct EvidenceRow {
    pub numeral: String,
    #[serde(serialize_with = "crate::report::big_string")]
    pub value: BigUint,
    pub source: String,
    pub verdict: Verdict,
    pub detail: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    NotInSet,
    InSet,
    Unresolved,
}

impl fmt::Display for EvidenceRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = match self.verdict {
            Verdict::NotInSet => "not in S",
            Verdict::InSet => "IN S, added",
            Verdict::Unresolved => "unresolved",
        };
        write!(
            f,
            "{:<12} {:<28} {:<12} {}",
            self.numeral, self.source, v, self.detail
        )
    }
}

#[derive(Clone, Debug)]
struct Tested {
    verdict: Verdict,
    detail: String,
    assumptions: Vec<Assumption>,
}

/// Decides one residual word, using the tail provers for `5…50` words.
fn test_word(ctx: &OracleContext, spec: &OracleSpec, base: u32, word: &[u8]) -> Result<Tested> {
    let fives = word.len().saturating_sub(1);
    let tail_shape =
        base == 10 && fives >= 3 && word[fives] == 0 && word[..fives].iter().all(|&d| d == 5);
    let prover = match spec {
        OracleSpec::TotientImage if tail_shape => {
            Some(phi_tail_check as fn(&OracleContext, usize) -> Result<TailVerdict>)
        }
        OracleSpec::PsiImage if tail_shape => {
            Some(psi_tail_check as fn(&OracleContext, usize) -> Result<TailVerdict>)
        }
        _ => None,
    };
    if let Some(check) = prover {
        let v = check(ctx, fives)?;
        let (verdict, detail) = match &v.outcome {
            TailOutcome::InImage { witness } => (
                Verdict::InSet,
                format!("tail prover: {}({witness}) = n", v.function),
            ),
            TailOutcome::NotInImage { trace } => (
                Verdict::NotInSet,
                format!("tail prover: {}", trace.join("; ")),
            ),
            TailOutcome::Unknown { missing } => {
                (Verdict::Unresolved, format!("tail prover: {missing}"))
            }
        };
        return Ok(Tested {
            verdict,
            detail,
            assumptions: v.assumptions,
        });
    }
    let m = is_member(ctx, spec, &digits_value(word, base))?;
    let (verdict, detail) = match m.decided() {
        Some(true) => (Verdict::InSet, m.to_string()),
        Some(false) => (Verdict::NotInSet, "oracle".to_string()),
        None => (Verdict::Unresolved, m.to_string()),
    };
    Ok(Tested {
        verdict,
        detail,
        assumptions: m.assumptions().to_vec(),
    })
}

/// Checks that `candidate` is all of `M(S)`.
///
/// The residual language (numerals avoiding every candidate element and
/// meeting the set's necessary conditions) is analysed; its words are tested
/// in ascending order. A member found below the family horizon is minimal,
/// joins the candidate, and the analysis is repeated.
pub fn verify_completeness(
    ctx: &OracleContext,
    spec: &OracleSpec,
    candidate: &Antichain,
    config: &EngineConfig,
) -> Result<MinimalSetReport> {
    let started = Instant::now();
    let base = candidate.base();
    let mut assumptions = Vec::new();
    for n in candidate.elements() {
        let m = is_member(ctx, spec, n.value())?;
        match m.decided() {
            Some(true) => merge_assumptions(&mut assumptions, m.assumptions().iter().cloned()),
            Some(false) => return Err(Error::NotAMember(n.value().clone())),
            None => {
                return Err(Error::Undecided {
                    value: n.value().clone(),
                    reason: m.to_string(),
                })
            }
        }
    }

    let conditions = necessary_conditions(spec);
    let mut restrict = valid_numeral_dfa(base)?;
    for c in &conditions {
        restrict = intersect(&restrict, &c.dfa(base)?)?.trimmed();
    }
    let mut exceptions: Vec<(BigUint, String)> = Vec::new();
    for c in &conditions {
        for &e in &c.exceptions {
            exceptions.push((
                BigUint::from(e),
                format!("exception to '{}'", c.description),
            ));
        }
    }

    let mut current = candidate.clone();
    let mut discovered: Vec<Numeral> = Vec::new();
    let mut cache: HashMap<Vec<u8>, Tested> = HashMap::new();
    let mut evidence: BTreeMap<BigUint, crate::engine::EvidenceRow> = BTreeMap::new();

    let finish = |current: Antichain,
                  mode: Mode,
                  residual,
                  assumptions: Vec<Assumption>,
                  discovered: Vec<Numeral>,
                  evidence: BTreeMap<BigUint, EvidenceRow>|
     -> Result<MinimalSetReport> {
        let mut r = MinimalSetReport::new(spec, base, current, mode);
        r.residual = Some(residual);
        r.discovered = discovered;
        r.evidence = evidence.into_values().collect();
        r.attach_witnesses(ctx)?;
        merge_assumptions(&mut r.assumptions, assumptions);
        if let Mode::VerifiedComplete { assumptions } = &mut r.mode {
            *assumptions = r.assumptions.clone();
        }
        r.timing_ms = started.elapsed().as_millis() as u64;
        Ok(r)
    };

    loop {
        let residual_dfa = intersect(&build_avoidance_dfa(&current), &restrict)?.trimmed();
        let analysis = analyze_residual(&residual_dfa, config.family_cap);
        if analysis.tag == ResidualTag::Undecided {
            let reason = format!(
                "residual language: {}",
                analysis.reason.clone().unwrap_or_default()
            );
            return finish(
                current,
                Mode::Undecided { reason },
                analysis,
                assumptions,
                discovered,
                evidence,
            );
        }

        let mut words: Vec<(Vec<u8>, String)> = analysis
            .finite_members
            .iter()
            .map(|n| (n.digits().to_vec(), "residual".to_string()))
            .collect();
        for (e, why) in &exceptions {
            let n = to_numeral(e.clone(), base)?;
            if !current.dominates(n.digits()) {
                words.push((n.digits().to_vec(), why.clone()));
            }
        }
        let horizon = analysis
            .families
            .iter()
            .map(|f| f.expand(f.min_reps + config.family_expansions))
            .min_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        for f in &analysis.families {
            for l in f.min_reps..f.min_reps + config.family_expansions {
                words.push((f.expand(l), format!("family {f}, l={l}")));
            }
        }
        words.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(&b.0)));
        words.dedup_by(|a, b| a.0 == b.0);

        let mut found: Option<Vec<u8>> = None;
        for (word, source) in words {
            if let Some(h) = &horizon {
                if (word.len(), &word) >= (h.len(), h) {
                    break;
                }
            }
            let tested = match cache.get(&word) {
                Some(t) => t.clone(),
                None => {
                    let t = test_word(ctx, spec, base, &word)?;
                    cache.insert(word.clone(), t.clone());
                    t
                }
            };
            let value = digits_value(&word, base);
            evidence.insert(
                value.clone(),
                EvidenceRow {
                    numeral: show(&word),
                    value,
                    source,
                    verdict: tested.verdict,
                    detail: tested.detail.clone(),
                },
            );
            merge_assumptions(&mut assumptions, tested.assumptions.iter().cloned());
            match tested.verdict {
                Verdict::NotInSet => {}
                Verdict::InSet => {
                    found = Some(word);
                    break;
                }
                Verdict::Unresolved => {
                    let reason = format!(
                        "membership of {} is unresolved: {}",
                        show(&word),
                        tested.detail
                    );
                    return finish(
                        current,
                        Mode::Undecided { reason },
                        analysis,
                        assumptions,
                        discovered,
                        evidence,
                    );
                }
            }
        }

        match found {
            Some(word) => {
                let n = Numeral::from_digits(word, base)?;
                let mut all = current.elements().to_vec();
                all.push(n.clone());
                current = reduce_to_antichain(&all)?;
                discovered.push(n);
            }
            None if !analysis.families.is_empty() => {
                let fams: Vec<String> = analysis.families.iter().map(|f| f.to_string()).collect();
                let reason = format!(
                    "families unresolved after {} expansions: {}",
                    config.family_expansions,
                    fams.join(", ")
                );
                return finish(
                    current,
                    Mode::Undecided { reason },
                    analysis,
                    assumptions,
                    discovered,
                    evidence,
                );
            }
            None => {
                let mode = Mode::VerifiedComplete {
                    assumptions: Vec::new(),
                };
                return finish(current, mode, analysis, assumptions, discovered, evidence);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::{FactorPolicy, Tables};

    fn ctx() -> OracleContext {
        let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data");
        OracleContext::new(FactorPolicy::default(), Tables::load_dir(&dir).unwrap())
    }

    fn verify(spec: &str, cand: &[u64]) -> MinimalSetReport {
        let c = Antichain::from_values(10, cand.iter().copied()).unwrap();
        verify_completeness(
            &ctx(),
            &OracleSpec::parse(spec).unwrap(),
            &c,
            &EngineConfig::default(),
        )
        .unwrap()
    }

    #[test]
    fn three_squares_is_complete() {
        let r = verify("3squares", &[1, 2, 3, 4, 5, 6, 8, 9, 70, 77]);
        assert!(matches!(r.mode, Mode::VerifiedComplete { .. }), "{r}");
        let res = r.residual.as_ref().unwrap();
        assert_eq!(res.tag, ResidualTag::Finite);
        assert_eq!(
            res.finite_members
                .iter()
                .map(|n| n.to_string())
                .collect::<Vec<_>>(),
            ["7"]
        );
        assert!(r.discovered.is_empty());
    }

    #[test]
    fn missing_element_is_discovered() {
        let r = verify("3squares", &[1, 2, 3, 4, 5, 6, 8, 9, 70]);
        assert!(matches!(r.mode, Mode::VerifiedComplete { .. }));
        assert_eq!(
            r.discovered
                .iter()
                .map(|n| n.to_string())
                .collect::<Vec<_>>(),
            ["77"]
        );
        assert_eq!(r.elements.len(), 10);
    }

    #[test]
    fn non_member_candidate_is_an_error() {
        let c = Antichain::from_values(10, [1u64, 7]).unwrap();
        let err = verify_completeness(
            &ctx(),
            &OracleSpec::SumThreeSquares,
            &c,
            &EngineConfig::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::NotAMember(v) if v == BigUint::from(7u32)));
    }

    #[test]
    fn totient_tail_found_by_prover() {
        let r = verify(
            "totient",
            &[1, 2, 4, 6, 8, 30, 70, 500, 900, 990, 5590, 9550],
        );
        assert!(matches!(r.mode, Mode::VerifiedComplete { .. }), "{r}");
        assert_eq!(
            r.discovered
                .iter()
                .map(|n| n.to_string())
                .collect::<Vec<_>>(),
            ["555555555550"]
        );
        assert_eq!(r.elements.len(), 13);
        for v in [50u32, 90, 550, 590, 950, 5950] {
            let row = r
                .evidence
                .iter()
                .find(|e| e.value == BigUint::from(v))
                .unwrap();
            assert_eq!(row.verdict, Verdict::NotInSet);
        }
        let tails = r
            .evidence
            .iter()
            .filter(|e| e.detail.starts_with("tail prover"))
            .count();
        assert!(tails >= 9);
    }

    #[test]
    fn truncated_family_search_is_undecided() {
        let c = Antichain::from_values(10, [1u64, 2, 4, 6, 8, 30, 70, 500, 900, 990, 5590, 9550])
            .unwrap();
        let cfg = EngineConfig {
            family_expansions: 5,
            ..Default::default()
        };
        let r = verify_completeness(&ctx(), &OracleSpec::TotientImage, &c, &cfg).unwrap();
        assert!(r.mode.is_undecided(), "{r}");
    }

    #[test]
    fn shifted_totient_exercise() {
        let r = verify(
            "totient+3",
            &[4, 5, 7, 9, 11, 13, 21, 23, 31, 33, 61, 63, 81, 83],
        );
        assert!(matches!(r.mode, Mode::VerifiedComplete { .. }), "{r}");
        assert!(r.discovered.is_empty());
    }

    #[test]
    fn quadratic_residue_sets_verify() {
        let r = verify(
            "qr:6",
            &[1, 3, 4, 6, 7, 9, 22, 25, 28, 52, 55, 58, 82, 85, 88],
        );
        assert!(matches!(r.mode, Mode::VerifiedComplete { .. }), "{r}");
    }
}
