use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use num_bigint::BigUint;
use serde::Serialize;

use super::{digits_value, intersect, valid_numeral_dfa, StateId, SubwordDfa};
use crate::numerals::{render_digits, Numeral};

/// Finite residuals larger than this are reported as undecided instead of listed.
pub const MAX_FINITE_MEMBERS: usize = 1_000_000;

/// The words `prefix · loop^ℓ · suffix` for `ℓ ≥ min_reps`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct FamilyDescriptor {
    #[serde(serialize_with = "ser_digits")]
    pub prefix: Vec<u8>,
    #[serde(rename = "loop", serialize_with = "ser_digits")]
    pub looped: Vec<u8>,
    #[serde(serialize_with = "ser_digits")]
    pub suffix: Vec<u8>,
    pub min_reps: usize,
}

fn ser_digits<S: serde::Serializer>(d: &[u8], s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&render_digits(d))
}

impl FamilyDescriptor {
    pub fn expand(&self, reps: usize) -> Vec<u8> {
        let mut w =
            Vec::with_capacity(self.prefix.len() + reps * self.looped.len() + self.suffix.len());
        w.extend_from_slice(&self.prefix);
        for _ in 0..reps {
            w.extend_from_slice(&self.looped);
        }
        w.extend_from_slice(&self.suffix);
        w
    }

    pub fn expand_value(&self, reps: usize, base: u32) -> BigUint {
        digits_value(&self.expand(reps), base)
    }

    /// The repetition count `ℓ` when `word = prefix · loop^ℓ · suffix`.
    pub fn match_reps(&self, word: &[u8]) -> Option<usize> {
        let fixed = self.prefix.len() + self.suffix.len();
        if word.len() < fixed || !(word.len() - fixed).is_multiple_of(self.looped.len()) {
            return None;
        }
        let reps = (word.len() - fixed) / self.looped.len();
        (reps >= self.min_reps && self.expand(reps) == word).then_some(reps)
    }

    /// Pulls trailing copies of the loop out of the prefix.
    fn normalized(mut self) -> Self {
        while self.prefix.ends_with(&self.looped) && !self.looped.is_empty() {
            self.prefix.truncate(self.prefix.len() - self.looped.len());
            self.min_reps += 1;
        }
        self
    }
}

impl fmt::Display for FamilyDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}({})^l{} (l >= {})",
            render_digits(&self.prefix),
            render_digits(&self.looped),
            render_digits(&self.suffix),
            self.min_reps
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ResidualTag {
    Empty,
    Finite,
    Families,
    Undecided,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ResidualAnalysis {
    pub tag: ResidualTag,
    #[serde(rename = "members")]
    pub finite_members: Vec<Numeral>,
    pub families: Vec<FamilyDescriptor>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl ResidualAnalysis {
    fn undecided(reason: String) -> Self {
        ResidualAnalysis {
            tag: ResidualTag::Undecided,
            finite_members: Vec::new(),
            families: Vec::new(),
            reason: Some(reason),
        }
    }
}

/// Classifies the valid numerals accepted by `dfa`.
///
/// The machine is first intersected with numeral validity and trimmed to the
/// states lying on some start-to-accept path. No cycle means a finite
/// language; when every cyclic component is a single simple cycle and no path
/// crosses two of them, the infinite part splits into `u v^ℓ z` families.
pub fn analyze_residual(dfa: &SubwordDfa, family_cap: usize) -> ResidualAnalysis {
    let dfa =
        intersect(dfa, &valid_numeral_dfa(dfa.base()).expect("base checked")).expect("same base");
    let base = dfa.base();
    let n = dfa.state_count();
    let live = co_reachable(&dfa);
    if !live[dfa.start() as usize] {
        return ResidualAnalysis {
            tag: ResidualTag::Empty,
            finite_members: Vec::new(),
            families: Vec::new(),
            reason: None,
        };
    }

    let sccs = tarjan(&dfa, &live);
    let mut comp = vec![usize::MAX; n];
    for (c, members) in sccs.iter().enumerate() {
        for &s in members {
            comp[s as usize] = c;
        }
    }
    let mut cyclic = vec![false; sccs.len()];
    for (c, members) in sccs.iter().enumerate() {
        let intra: usize = members
            .iter()
            .map(|&s| {
                dfa.successors(s)
                    .iter()
                    .filter(|&&t| comp[t as usize] == c)
                    .count()
            })
            .sum();
        if intra == 0 {
            continue;
        }
        if intra != members.len() {
            return ResidualAnalysis::undecided(format!(
                "cyclic component of {} state(s) with {intra} internal transitions is not a simple cycle",
                members.len()
            ));
        }
        cyclic[c] = true;
    }

    // Tarjan emits components sinks-first, so successors are already scored.
    let mut cycles_below = vec![0usize; sccs.len()];
    for (c, members) in sccs.iter().enumerate() {
        let mut best = 0;
        for &s in members {
            for &t in dfa.successors(s) {
                let tc = comp[t as usize];
                if live[t as usize] && tc != c {
                    best = best.max(cycles_below[tc]);
                }
            }
        }
        cycles_below[c] = best + usize::from(cyclic[c]);
    }
    if cycles_below[comp[dfa.start() as usize]] >= 2 {
        return ResidualAnalysis::undecided(
            "some accepted path passes through two distinct cycles".to_string(),
        );
    }

    let in_cycle = |s: StateId| cyclic[comp[s as usize]];
    let mut finite = Vec::new();
    let mut entries: Vec<(Vec<u8>, StateId)> = Vec::new();
    if in_cycle(dfa.start()) {
        entries.push((Vec::new(), dfa.start()));
    } else {
        let mut buf = Vec::new();
        if !walk_acyclic(
            &dfa,
            &live,
            &in_cycle,
            dfa.start(),
            &mut buf,
            &mut finite,
            &mut entries,
        ) {
            return ResidualAnalysis::undecided(format!(
                "finite part exceeds {MAX_FINITE_MEMBERS} members"
            ));
        }
    }

    let mut families = BTreeSet::new();
    for (prefix, entry) in &entries {
        let c = comp[*entry as usize];
        let k = sccs[c].len();
        let next_in = |s: StateId| -> (u8, StateId) {
            dfa.successors(s)
                .iter()
                .enumerate()
                .find(|&(_, &t)| comp[t as usize] == c)
                .map(|(d, &t)| (d as u8, t))
                .expect("simple cycle")
        };
        let mut to_x = Vec::new();
        let mut x = *entry;
        for _ in 0..k {
            let mut looped = Vec::with_capacity(k);
            let mut y = x;
            for _ in 0..k {
                let (d, t) = next_in(y);
                looped.push(d);
                y = t;
            }
            let mut suffixes = Vec::new();
            if dfa.is_accepting(x) {
                suffixes.push(Vec::new());
            }
            for (d, &t) in dfa.successors(x).iter().enumerate() {
                if live[t as usize] && comp[t as usize] != c {
                    let mut buf = vec![d as u8];
                    let mut tails = Vec::new();
                    let mut none = Vec::new();
                    if !walk_acyclic(&dfa, &live, &in_cycle, t, &mut buf, &mut tails, &mut none) {
                        return ResidualAnalysis::undecided(
                            "family suffixes too numerous".to_string(),
                        );
                    }
                    debug_assert!(none.is_empty());
                    suffixes.extend(tails);
                }
            }
            for z in suffixes {
                let mut u = prefix.clone();
                u.extend_from_slice(&to_x);
                families.insert(
                    FamilyDescriptor {
                        prefix: u,
                        looped: looped.clone(),
                        suffix: z,
                        min_reps: 0,
                    }
                    .normalized(),
                );
                if families.len() > family_cap {
                    return ResidualAnalysis::undecided(format!("more than {family_cap} families"));
                }
            }
            let (d, t) = next_in(x);
            to_x.push(d);
            x = t;
        }
    }

    finite.sort_by(|a: &Vec<u8>, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    let finite_members = finite
        .into_iter()
        .map(|w| Numeral::from_digits(w, base).expect("validity enforced"))
        .collect();
    ResidualAnalysis {
        tag: if families.is_empty() {
            ResidualTag::Finite
        } else {
            ResidualTag::Families
        },
        finite_members,
        families: families.into_iter().collect(),
        reason: None,
    }
}

/// DFS through live acyclic states, collecting accepted words and the
/// transitions entering cyclic components. Returns false past the member cap.
fn walk_acyclic(
    dfa: &SubwordDfa,
    live: &[bool],
    in_cycle: &dyn Fn(StateId) -> bool,
    s: StateId,
    buf: &mut Vec<u8>,
    words: &mut Vec<Vec<u8>>,
    entries: &mut Vec<(Vec<u8>, StateId)>,
) -> bool {
    if dfa.is_accepting(s) {
        words.push(buf.clone());
        if words.len() > MAX_FINITE_MEMBERS {
            return false;
        }
    }
    for (d, &t) in dfa.successors(s).iter().enumerate() {
        if !live[t as usize] {
            continue;
        }
        buf.push(d as u8);
        if in_cycle(t) {
            entries.push((buf.clone(), t));
        } else if !walk_acyclic(dfa, live, in_cycle, t, buf, words, entries) {
            return false;
        }
        buf.pop();
    }
    true
}

fn co_reachable(dfa: &SubwordDfa) -> Vec<bool> {
    let n = dfa.state_count();
    let mut rev: Vec<Vec<StateId>> = vec![Vec::new(); n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    for s in 0..n as StateId {
        for &t in dfa.successors(s) {
            rev[t as usize].push(s);
        }
        if dfa.is_accepting(s) {
            seen[s as usize] = true;
            queue.push_back(s);
        }
    }
    while let Some(t) = queue.pop_front() {
        for &s in &rev[t as usize] {
            if !seen[s as usize] {
                seen[s as usize] = true;
                queue.push_back(s);
            }
        }
    }
    seen
}

/// Iterative Tarjan over live states reachable from the start.
fn tarjan(dfa: &SubwordDfa, live: &[bool]) -> Vec<Vec<StateId>> {
    let n = dfa.state_count();
    const UNSEEN: u32 = u32::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<StateId> = Vec::new();
    let mut out = Vec::new();
    let mut counter = 0u32;
    let base = dfa.base() as usize;
    // (state, next digit to explore)
    let mut call: Vec<(StateId, usize)> = vec![(dfa.start(), 0)];
    index[dfa.start() as usize] = 0;
    low[dfa.start() as usize] = 0;
    counter += 1;
    stack.push(dfa.start());
    on_stack[dfa.start() as usize] = true;

    while let Some(&mut (v, ref mut next)) = call.last_mut() {
        if *next < base {
            let t = dfa.step(v, *next as u8);
            *next += 1;
            if !live[t as usize] {
                continue;
            }
            if index[t as usize] == UNSEEN {
                index[t as usize] = counter;
                low[t as usize] = counter;
                counter += 1;
                stack.push(t);
                on_stack[t as usize] = true;
                call.push((t, 0));
            } else if on_stack[t as usize] {
                low[v as usize] = low[v as usize].min(index[t as usize]);
            }
        } else {
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent as usize] = low[parent as usize].min(low[v as usize]);
            }
            if low[v as usize] == index[v as usize] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack");
                    on_stack[w as usize] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                out.push(comp);
            }
        }
    }
    out
}
