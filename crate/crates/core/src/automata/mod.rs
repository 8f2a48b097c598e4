//! Deterministic automata over base-b digit strings.
//!
//! Avoidance machines recognise the complement of a finite union of shuffle
//! ideals: the strings containing none of a set of patterns as a
//! subsequence. Together with numeral validity, residue tracking and
//! products these turn "which numerals are still unexplained" into a regular
//! language that [`analyze_residual`] can classify.

mod residual;

use std::collections::{HashMap, VecDeque};
use std::fmt;

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::numerals::{check_base, render_digits, Antichain, Numeral};

pub use residual::{
    analyze_residual, FamilyDescriptor, ResidualAnalysis, ResidualTag, MAX_FINITE_MEMBERS,
};

pub type StateId = u32;

/// Residue annotation: the value read so far modulo `modulus`, per state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidueAnnotation {
    pub modulus: u64,
    pub per_state: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubwordDfa {
    base: u32,
    start: StateId,
    /// `trans[state * base + digit]`
    trans: Vec<StateId>,
    accepting: Vec<bool>,
    residue: Option<ResidueAnnotation>,
}

impl SubwordDfa {
    fn from_parts(
        base: u32,
        trans: Vec<StateId>,
        accepting: Vec<bool>,
        residue: Option<ResidueAnnotation>,
    ) -> Self {
        debug_assert_eq!(trans.len(), accepting.len() * base as usize);
        SubwordDfa {
            base,
            start: 0,
            trans,
            accepting,
            residue,
        }
    }

    pub fn accept_all(base: u32) -> Result<Self> {
        check_base(base)?;
        Ok(Self::from_parts(
            base,
            vec![0; base as usize],
            vec![true],
            None,
        ))
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn start(&self) -> StateId {
        self.start
    }

    pub fn state_count(&self) -> usize {
        self.accepting.len()
    }

    pub fn is_accepting(&self, s: StateId) -> bool {
        self.accepting[s as usize]
    }

    #[inline]
    pub fn step(&self, s: StateId, digit: u8) -> StateId {
        self.trans[s as usize * self.base as usize + digit as usize]
    }

    pub fn run(&self, digits: &[u8]) -> StateId {
        digits.iter().fold(self.start, |s, &d| self.step(s, d))
    }

    pub fn accepts_digits(&self, digits: &[u8]) -> bool {
        self.is_accepting(self.run(digits))
    }

    pub fn accepts(&self, numeral: &Numeral) -> Result<bool> {
        self.check_same_base(numeral.base())?;
        Ok(self.accepts_digits(numeral.digits()))
    }

    pub fn residue_annotation(&self) -> Option<&ResidueAnnotation> {
        self.residue.as_ref()
    }

    pub fn residue_of(&self, s: StateId) -> Option<u64> {
        self.residue.as_ref().map(|r| r.per_state[s as usize])
    }

    fn check_same_base(&self, base: u32) -> Result<()> {
        if self.base == base {
            Ok(())
        } else {
            Err(Error::BaseMismatch {
                left: self.base,
                right: base,
            })
        }
    }

    pub(crate) fn successors(&self, s: StateId) -> &[StateId] {
        let b = self.base as usize;
        &self.trans[s as usize * b..(s as usize + 1) * b]
    }

    /// Minimum number of further digits needed to reach an accepting state.
    pub(crate) fn distance_to_accept(&self) -> Vec<Option<u32>> {
        let n = self.state_count();
        let mut rev: Vec<Vec<StateId>> = vec![Vec::new(); n];
        for s in 0..n {
            for &t in self.successors(s as StateId) {
                rev[t as usize].push(s as StateId);
            }
        }
        let dist_init = self
            .accepting
            .iter()
            .map(|&a| a.then_some(0))
            .collect::<Vec<Option<u32>>>();
        let mut queue: VecDeque<StateId> = (0..n)
            .filter(|&s| self.accepting[s])
            .map(|s| s as StateId)
            .collect();
        let mut dist = dist_init;
        while let Some(t) = queue.pop_front() {
            let d = dist[t as usize].unwrap();
            for &s in &rev[t as usize] {
                if dist[s as usize].is_none() {
                    dist[s as usize] = Some(d + 1);
                    queue.push_back(s);
                }
            }
        }
        dist
    }

    /// The numerically smallest accepted valid numeral (shortest, then lexicographically least).
    pub fn smallest_accepted(&self) -> Option<Vec<u8>> {
        let dist = self.distance_to_accept();
        let first = (1..self.base as u8)
            .filter_map(|d| {
                let t = self.step(self.start, d);
                dist[t as usize].map(|k| (k, d))
            })
            .min()?;
        let (mut remaining, d0) = first;
        let mut out = vec![d0];
        let mut s = self.step(self.start, d0);
        while remaining > 0 {
            let (d, t) = (0..self.base as u8)
                .map(|d| (d, self.step(s, d)))
                .find(|&(_, t)| dist[t as usize] == Some(remaining - 1))
                .expect("distance labelling is consistent");
            out.push(d);
            s = t;
            remaining -= 1;
        }
        Some(out)
    }

    /// All accepted valid numerals with at most `max_len` digits, ascending.
    pub fn enumerate_accepted(&self, max_len: usize) -> Vec<Numeral> {
        let dist = self.distance_to_accept();
        let mut words = Vec::new();
        let mut buf = Vec::with_capacity(max_len);
        self.collect_words(self.start, max_len, &dist, &mut buf, &mut words);
        words.sort_by(|a: &Vec<u8>, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        words
            .into_iter()
            .map(|w| Numeral::from_digits(w, self.base).expect("no leading zero"))
            .collect()
    }

    fn collect_words(
        &self,
        s: StateId,
        max_len: usize,
        dist: &[Option<u32>],
        buf: &mut Vec<u8>,
        out: &mut Vec<Vec<u8>>,
    ) {
        if !buf.is_empty() && self.accepting[s as usize] {
            out.push(buf.clone());
        }
        if buf.len() == max_len {
            return;
        }
        let lo = if buf.is_empty() { 1 } else { 0 };
        for d in lo..self.base as u8 {
            let t = self.step(s, d);
            match dist[t as usize] {
                Some(k) if (k as usize) < max_len - buf.len() => {
                    buf.push(d);
                    self.collect_words(t, max_len, dist, buf, out);
                    buf.pop();
                }
                _ => {}
            }
        }
    }

    /// Same language, with every state that cannot reach acceptance merged
    /// into one sink and unreachable states dropped. The residue annotation
    /// survives only when no states were merged.
    pub fn trimmed(&self) -> SubwordDfa {
        let dist = self.distance_to_accept();
        let b = self.base as usize;
        let mut map: HashMap<StateId, StateId> = HashMap::new();
        let mut order = vec![self.start];
        let mut sink: Option<StateId> = None;
        let mut merged = 0usize;
        let mut trans = Vec::new();
        let mut accepting = Vec::new();
        let mut residues = Vec::new();
        map.insert(self.start, 0);
        if dist[self.start as usize].is_none() {
            sink = Some(0);
            merged += 1;
        }
        let mut i = 0;
        while i < order.len() {
            let s = order[i];
            accepting.push(self.is_accepting(s));
            residues.push(self.residue_of(s).unwrap_or(0));
            if sink == Some(i as StateId) {
                trans.extend(std::iter::repeat_n(i as StateId, b));
                i += 1;
                continue;
            }
            for d in 0..b as u8 {
                let t = self.step(s, d);
                let id = if dist[t as usize].is_none() {
                    merged += 1;
                    *sink.get_or_insert_with(|| {
                        order.push(t);
                        (order.len() - 1) as StateId
                    })
                } else {
                    *map.entry(t).or_insert_with(|| {
                        order.push(t);
                        (order.len() - 1) as StateId
                    })
                };
                trans.push(id);
            }
            i += 1;
        }
        let residue = match &self.residue {
            Some(r) if merged <= 1 => Some(ResidueAnnotation {
                modulus: r.modulus,
                per_state: residues,
            }),
            _ => None,
        };
        SubwordDfa::from_parts(self.base, trans, accepting, residue)
    }

    /// Product automaton over reachable pairs, accepting by `combine`.
    fn product(
        &self,
        other: &SubwordDfa,
        combine: impl Fn(bool, bool) -> bool,
    ) -> Result<SubwordDfa> {
        self.check_same_base(other.base)?;
        let b = self.base as usize;
        let mut index: HashMap<(StateId, StateId), StateId> = HashMap::new();
        let mut pairs = vec![(self.start, other.start)];
        index.insert((self.start, other.start), 0);
        let mut trans = Vec::new();
        let mut i = 0;
        while i < pairs.len() {
            let (p, q) = pairs[i];
            for d in 0..b as u8 {
                let next = (self.step(p, d), other.step(q, d));
                let id = *index.entry(next).or_insert_with(|| {
                    pairs.push(next);
                    (pairs.len() - 1) as StateId
                });
                trans.push(id);
            }
            i += 1;
        }
        let accepting = pairs
            .iter()
            .map(|&(p, q)| combine(self.is_accepting(p), other.is_accepting(q)))
            .collect();
        let residue = match (&self.residue, &other.residue) {
            (Some(r), _) => Some(ResidueAnnotation {
                modulus: r.modulus,
                per_state: pairs
                    .iter()
                    .map(|&(p, _)| r.per_state[p as usize])
                    .collect(),
            }),
            (None, Some(r)) => Some(ResidueAnnotation {
                modulus: r.modulus,
                per_state: pairs
                    .iter()
                    .map(|&(_, q)| r.per_state[q as usize])
                    .collect(),
            }),
            (None, None) => None,
        };
        Ok(SubwordDfa::from_parts(self.base, trans, accepting, residue))
    }
}

/// Accepts exactly the strings containing no pattern as a subsequence.
///
/// States are per-pattern match positions (greedy matching is optimal for
/// subsequence containment); all vectors in which some pattern completed
/// collapse into one absorbing dead state.
pub fn build_avoidance_dfa(patterns: &Antichain) -> SubwordDfa {
    let pats: Vec<&[u8]> = patterns.elements().iter().map(|n| n.digits()).collect();
    avoidance_dfa_from_digits(patterns.base(), &pats)
}

pub(crate) fn avoidance_dfa_from_digits(base: u32, patterns: &[&[u8]]) -> SubwordDfa {
    let b = base as usize;
    if patterns.is_empty() {
        return SubwordDfa::from_parts(base, vec![0; b], vec![true], None);
    }
    const DEAD: StateId = 1;
    let start = vec![0u16; patterns.len()];
    let mut index: HashMap<Vec<u16>, StateId> = HashMap::new();
    index.insert(start.clone(), 0);
    // state 1 is the dead state; its vector is never looked up
    let mut vectors: Vec<Vec<u16>> = vec![start, Vec::new()];
    let mut trans: Vec<StateId> = Vec::new();
    let mut i = 0;
    while i < vectors.len() {
        if i as StateId == DEAD {
            trans.extend(std::iter::repeat_n(DEAD, b));
            i += 1;
            continue;
        }
        for d in 0..b as u8 {
            let mut next = vectors[i].clone();
            let mut dead = false;
            for (pos, pat) in next.iter_mut().zip(patterns) {
                if pat[*pos as usize] == d {
                    *pos += 1;
                    if *pos as usize == pat.len() {
                        dead = true;
                        break;
                    }
                }
            }
            let id = if dead {
                DEAD
            } else {
                *index.entry(next).or_insert_with_key(|k| {
                    vectors.push(k.clone());
                    (vectors.len() - 1) as StateId
                })
            };
            trans.push(id);
        }
        i += 1;
    }
    let accepting = (0..vectors.len()).map(|s| s as StateId != DEAD).collect();
    SubwordDfa::from_parts(base, trans, accepting, None)
}

/// Rejects the empty string and anything with a leading zero.
pub fn valid_numeral_dfa(base: u32) -> Result<SubwordDfa> {
    check_base(base)?;
    let b = base as usize;
    // 0 = start, 1 = valid, 2 = leading zero
    let mut trans = Vec::with_capacity(3 * b);
    trans.push(2);
    trans.extend(std::iter::repeat_n(1, b - 1));
    trans.extend(std::iter::repeat_n(1, b));
    trans.extend(std::iter::repeat_n(2, b));
    Ok(SubwordDfa::from_parts(
        base,
        trans,
        vec![false, true, false],
        None,
    ))
}

/// Tracks `value(w) mod modulus`; accepts everything.
pub fn residue_dfa(base: u32, modulus: u64) -> Result<SubwordDfa> {
    residue_class_dfa(base, modulus, &[]).map(|mut d| {
        d.accepting.iter_mut().for_each(|a| *a = true);
        d
    })
}

/// Tracks `value(w) mod modulus`, accepting when the residue lies in `residues`.
pub fn residue_class_dfa(base: u32, modulus: u64, residues: &[u64]) -> Result<SubwordDfa> {
    check_base(base)?;
    if modulus == 0 {
        return Err(Error::domain("modulus must be at least 1"));
    }
    let m = usize::try_from(modulus)
        .ok()
        .filter(|&m| m <= 1 << 24)
        .ok_or_else(|| {
            Error::domain(format!(
                "modulus {modulus} too large for a residue automaton"
            ))
        })?;
    let b = u64::from(base);
    let mut trans = Vec::with_capacity(m * base as usize);
    for s in 0..modulus {
        for d in 0..b {
            trans.push(((s * b + d) % modulus) as StateId);
        }
    }
    let mut accepting = vec![false; m];
    for &r in residues {
        accepting[(r % modulus) as usize] = true;
    }
    let residue = ResidueAnnotation {
        modulus,
        per_state: (0..modulus).collect(),
    };
    Ok(SubwordDfa::from_parts(
        base,
        trans,
        accepting,
        Some(residue),
    ))
}

/// Accepts strings whose value is at least `threshold` (value capped at the threshold).
pub fn at_least_dfa(base: u32, threshold: u64) -> Result<SubwordDfa> {
    check_base(base)?;
    if threshold > 1 << 22 {
        return Err(Error::domain(format!(
            "threshold {threshold} too large for a value automaton"
        )));
    }
    let b = u64::from(base);
    let mut trans = Vec::new();
    for s in 0..=threshold {
        for d in 0..b {
            trans.push((s * b + d).min(threshold) as StateId);
        }
    }
    let accepting = (0..=threshold).map(|s| s >= threshold).collect();
    Ok(SubwordDfa::from_parts(base, trans, accepting, None))
}

pub fn intersect(a: &SubwordDfa, b: &SubwordDfa) -> Result<SubwordDfa> {
    a.product(b, |x, y| x && y)
}

pub fn union(a: &SubwordDfa, b: &SubwordDfa) -> Result<SubwordDfa> {
    a.product(b, |x, y| x || y)
}

pub fn accepts(dfa: &SubwordDfa, numeral: &Numeral) -> Result<bool> {
    dfa.accepts(numeral)
}

pub fn enumerate_accepted(dfa: &SubwordDfa, max_len: usize) -> Result<Vec<Numeral>> {
    if max_len == 0 {
        return Err(Error::domain("max_len must be at least 1"));
    }
    Ok(dfa.enumerate_accepted(max_len))
}

/// Value of a digit string read in `base`.
pub(crate) fn digits_value(digits: &[u8], base: u32) -> BigUint {
    BigUint::from_radix_be(digits, base).expect("digits below base")
}

/// Debug dump: one line per state with its flags and transitions.
impl fmt::Display for SubwordDfa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "dfa base={} states={} start={}",
            self.base,
            self.state_count(),
            self.start
        )?;
        for s in 0..self.state_count() as StateId {
            write!(f, "{s}{}", if self.is_accepting(s) { " [acc]" } else { "" })?;
            if let Some(r) = self.residue_of(s) {
                write!(f, " r={r}")?;
            }
            f.write_str(":")?;
            for (d, t) in self.successors(s).iter().enumerate() {
                write!(f, " {}->{t}", render_digits(&[d as u8]))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerals::is_subsequence_digits;

    fn anti(vals: &[u64]) -> Antichain {
        Antichain::from_values(10, vals.iter().copied()).unwrap()
    }

    fn w(s: &str) -> Vec<u8> {
        s.bytes().map(|c| c - b'0').collect()
    }

    #[test]
    fn avoidance_examples() {
        let d = build_avoidance_dfa(&anti(&[70, 77]));
        assert!(d.accepts_digits(&w("7")));
        assert!(!d.accepts_digits(&w("77")));
        assert!(!d.accepts_digits(&w("700")));
        assert!(d.accepts_digits(&w("123456")));

        let all = build_avoidance_dfa(&Antichain::empty(10).unwrap());
        assert!(all.accepts_digits(&w("9876543210")));
        assert_eq!(all.state_count(), 1);

        let two = build_avoidance_dfa(&anti(&[2]));
        assert!(!two.accepts_digits(&w("1112111")));
        assert!(two.accepts_digits(&w("1113111")));
    }

    #[test]
    fn residue_examples() {
        let r6 = residue_dfa(10, 6).unwrap();
        assert_eq!(r6.residue_of(r6.run(&w("25"))), Some(1));
        let r7 = residue_dfa(10, 7).unwrap();
        assert_eq!(r7.residue_of(r7.run(&w("63"))), Some(0));
        assert!(residue_dfa(10, 0).is_err());
        let v = valid_numeral_dfa(10).unwrap();
        assert!(!v.accepts_digits(&w("07")));
        assert!(!v.accepts_digits(&[]));
        assert!(v.accepts_digits(&w("70")));
    }

    #[test]
    fn at_least_threshold() {
        let d = at_least_dfa(10, 17).unwrap();
        assert!(!d.accepts_digits(&w("7")));
        assert!(d.accepts_digits(&w("17")));
        assert!(d.accepts_digits(&w("0017")));
        assert!(!d.accepts_digits(&w("016")));
    }

    #[test]
    fn intersection_examples() {
        let avoid = build_avoidance_dfa(&anti(&[70, 77]));
        // digits restricted to {0,7}
        let only07 = build_avoidance_dfa(&anti(&[1, 2, 3, 4, 5, 6, 8, 9]));
        let valid = valid_numeral_dfa(10).unwrap();
        let p = intersect(&intersect(&avoid, &only07).unwrap(), &valid).unwrap();
        let got: Vec<String> = p
            .enumerate_accepted(6)
            .iter()
            .map(|n| n.to_string())
            .collect();
        assert_eq!(got, vec!["7"]);

        let all = SubwordDfa::accept_all(10).unwrap();
        let same = intersect(&avoid, &all).unwrap();
        for s in ["", "7", "70", "707", "1234", "777"] {
            assert_eq!(same.accepts_digits(&w(s)), avoid.accepts_digits(&w(s)));
        }
        let b2 = SubwordDfa::accept_all(2).unwrap();
        assert!(matches!(
            intersect(&avoid, &b2),
            Err(Error::BaseMismatch { .. })
        ));
    }

    #[test]
    fn enumeration_examples() {
        let all = SubwordDfa::accept_all(10).unwrap();
        let got: Vec<String> = enumerate_accepted(&all, 1)
            .unwrap()
            .iter()
            .map(|n| n.to_string())
            .collect();
        assert_eq!(got, (1..=9).map(|d| d.to_string()).collect::<Vec<_>>());
        assert_eq!(enumerate_accepted(&all, 2).unwrap().len(), 99);
        assert!(enumerate_accepted(&all, 0).is_err());

        let m3 = build_avoidance_dfa(&anti(&[1, 2, 3, 4, 5, 6, 8, 9, 70, 77]));
        assert!(!m3.accepts(&Numeral::new(77u32, 10).unwrap()).unwrap());
    }

    #[test]
    fn smallest_accepted_is_numeric_minimum() {
        let d = intersect(
            &residue_class_dfa(10, 6, &[0, 1, 3, 4]).unwrap(),
            &build_avoidance_dfa(&anti(&[1, 3, 4, 6, 7, 9])),
        )
        .unwrap();
        assert_eq!(d.smallest_accepted(), Some(w("22")));
        let empty = build_avoidance_dfa(&anti(&[1, 2, 3, 4, 5, 6, 7, 8, 9]));
        assert_eq!(empty.smallest_accepted(), None);
    }

    #[test]
    fn dump_lists_states() {
        let text = valid_numeral_dfa(2).unwrap().to_string();
        assert!(text.starts_with("dfa base=2 states=3"));
        assert!(text.contains("1 [acc]: 0->1 1->1"));
    }

    #[test]
    fn avoidance_matches_reference_exhaustively() {
        let pats = anti(&[12, 21, 300]);
        let d = build_avoidance_dfa(&pats);
        let b = 4u32;
        let pats4: Vec<Vec<u8>> = vec![vec![1, 2], vec![2, 1], vec![3, 0, 0]];
        let refs: Vec<&[u8]> = pats4.iter().map(|p| p.as_slice()).collect();
        let d4 = avoidance_dfa_from_digits(b, &refs);
        for len in 0..=6u32 {
            for code in 0..b.pow(len) {
                let mut s = Vec::new();
                let mut c = code;
                for _ in 0..len {
                    s.push((c % b) as u8);
                    c /= b;
                }
                let expect = !pats4.iter().any(|p| is_subsequence_digits(p, &s));
                assert_eq!(d4.accepts_digits(&s), expect, "{s:?}");
            }
        }
        assert!(d.state_count() > 2);
    }
    #[test]
    fn trimming_keeps_the_language() {
        let a = avoidance_dfa_from_digits(10, &[&[7, 0], &[7, 7]]);
        let r = residue_class_dfa(10, 6, &[0, 1, 3, 4]).unwrap();
        let d = intersect(&a, &r).unwrap();
        let t = d.trimmed();
        assert!(t.state_count() <= d.state_count());
        for n in 1..5000u32 {
            let w: Vec<u8> = n.to_string().bytes().map(|c| c - b'0').collect();
            assert_eq!(d.accepts_digits(&w), t.accepts_digits(&w), "{n}");
        }
        let r = residue_dfa(10, 7).unwrap().trimmed();
        assert_eq!(r.residue_of(r.run(&[6, 3])), Some(0));
    }
}
