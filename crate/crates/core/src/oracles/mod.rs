//! Membership predicates and the arithmetic they rest on.

pub mod arith;
pub mod factor;
pub mod membership;
pub mod perfect;
pub mod primality;
pub mod sieve;
pub mod spec;
pub mod squares;
pub mod tables;

use std::path::Path;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

pub use arith::{is_psi_value, is_totient, phi_eval, psi_eval, ArithFn};
pub use factor::{factorize, FactorPolicy, FactorStatus, Factorization};
pub use membership::{Assumption, Membership, Witness};
pub use perfect::{even_perfects, is_even_perfect};
pub use primality::{is_prime, is_prime_u64, Primality};
pub use sieve::{primes_up_to, SegmentedSieve};
pub use spec::OracleSpec;
pub use squares::{is_sum_of_three_squares, qr_residues, three_squares_witness};
pub use tables::Tables;

use crate::automata::{at_least_dfa, intersect, residue_class_dfa, union, SubwordDfa};
use crate::error::{Error, Result};
use membership::merge_assumptions;

/// Factoring policy plus loaded data tables; cheap to clone.
#[derive(Clone, Debug, Default)]
pub struct OracleContext {
    pub policy: FactorPolicy,
    pub tables: Arc<Tables>,
}

impl OracleContext {
    pub fn new(policy: FactorPolicy, tables: Tables) -> Self {
        OracleContext {
            policy,
            tables: Arc::new(tables),
        }
    }

    pub fn with_data_dir(policy: FactorPolicy, dir: &Path) -> Result<Self> {
        Ok(Self::new(policy, Tables::load_dir(dir)?))
    }
}

pub fn is_member(ctx: &OracleContext, spec: &OracleSpec, n: &BigUint) -> Result<Membership> {
    if n.is_zero() {
        return Err(Error::domain("membership is defined for n >= 1"));
    }
    Ok(match spec {
        OracleSpec::Primes => match is_prime(n)? {
            Primality::Prime => Membership::member(Witness::Prime),
            Primality::ProbablePrime => Membership::member(Witness::Prime)
                .with_assumptions([Assumption::ProbablePrime(n.clone())]),
            Primality::Composite => Membership::non_member(),
        },
        OracleSpec::PowersOfTwo => {
            let k = n.trailing_zeros().unwrap_or(0);
            if (n >> k).is_one() {
                Membership::member(Witness::PowerOfTwo(k))
            } else {
                Membership::non_member()
            }
        }
        OracleSpec::SumThreeSquares => {
            if !is_sum_of_three_squares(n) {
                Membership::non_member()
            } else if let Some((x, y, z)) = n.to_u64().and_then(three_squares_witness) {
                Membership::member(Witness::ThreeSquares(x, y, z))
            } else {
                Membership::from_bool(true)
            }
        }
        OracleSpec::QuadResidues(m) => {
            let r = (n % *m).to_u64().unwrap();
            if is_square_mod(r, *m) {
                Membership::member(Witness::Residue {
                    modulus: *m,
                    residue: r,
                })
            } else {
                Membership::non_member()
            }
        }
        OracleSpec::ResidueClass { .. } => {
            let (m, r) = residue_class_test(spec, n);
            if r {
                Membership::member(Witness::Residue {
                    modulus: m,
                    residue: (n % m).to_u64().unwrap(),
                })
            } else {
                Membership::non_member()
            }
        }
        OracleSpec::TotientImage => is_totient(ctx, n)?,
        OracleSpec::ShiftedTotient(c) => {
            let c = BigUint::from(*c);
            if n <= &c {
                Membership::non_member()
            } else {
                is_totient(ctx, &(n - c))?
            }
        }
        OracleSpec::PsiImage => is_psi_value(ctx, n)?,
        OracleSpec::EvenPerfect => is_even_perfect(n)?,
        OracleSpec::FiniteSet(v) => {
            Membership::from_bool(v.binary_search(n).is_ok()).map_witness(Witness::Listed)
        }
        OracleSpec::Union(parts) => {
            let mut seen = Vec::new();
            let mut conditional = false;
            for p in parts {
                let m = is_member(ctx, p, n)?;
                match m.decided() {
                    Some(true) => return Ok(m),
                    Some(false) => {}
                    None => conditional = true,
                }
                merge_assumptions(&mut seen, m.assumptions().iter().cloned());
            }
            if conditional {
                Membership::Conditional { assumptions: seen }
            } else {
                Membership::NonMember { assumptions: seen }
            }
        }
        OracleSpec::Intersection(parts) => {
            let mut seen = Vec::new();
            let mut witness = None;
            let mut conditional = false;
            for p in parts {
                let m = is_member(ctx, p, n)?;
                match m.decided() {
                    Some(false) => return Ok(m),
                    Some(true) => {
                        if witness.is_none() {
                            witness = m.witness().cloned();
                        }
                    }
                    None => conditional = true,
                }
                merge_assumptions(&mut seen, m.assumptions().iter().cloned());
            }
            if conditional {
                Membership::Conditional { assumptions: seen }
            } else {
                Membership::Member {
                    witness,
                    assumptions: seen,
                }
            }
        }
    })
}

impl Membership {
    fn map_witness(self, w: Witness) -> Self {
        match self {
            Membership::Member { assumptions, .. } => Membership::Member {
                witness: Some(w),
                assumptions,
            },
            other => other,
        }
    }
}

fn is_square_mod(r: u64, m: u64) -> bool {
    (0..m).any(|x| ((x as u128 * x as u128) % m as u128) as u64 == r)
}

fn residue_class_test(spec: &OracleSpec, n: &BigUint) -> (u64, bool) {
    let OracleSpec::ResidueClass {
        offset,
        modulus,
        from_zero,
    } = spec
    else {
        unreachable!()
    };
    let least = BigUint::from(*offset) + if *from_zero { 0 } else { *modulus };
    let ok = n >= &least && (n % *modulus).to_u64() == Some(offset % modulus);
    (*modulus, ok)
}

/// A spec compiled for fast exact testing of 64-bit values.
#[derive(Clone, Debug)]
enum Pred {
    Prime,
    Pow2,
    ThreeSquares,
    Residues {
        modulus: u64,
        ok: Vec<bool>,
        least: u64,
    },
    Image(ArithFn, u64),
    Perfect,
    Listed(Vec<u64>),
    Any(Vec<Pred>),
    All(Vec<Pred>),
}

impl Pred {
    fn compile(spec: &OracleSpec) -> Pred {
        match spec {
            OracleSpec::Primes => Pred::Prime,
            OracleSpec::PowersOfTwo => Pred::Pow2,
            OracleSpec::SumThreeSquares => Pred::ThreeSquares,
            OracleSpec::QuadResidues(m) => {
                let mut ok = vec![false; *m as usize];
                for x in 0..*m {
                    ok[((x as u128 * x as u128) % *m as u128) as usize] = true;
                }
                Pred::Residues {
                    modulus: *m,
                    ok,
                    least: 1,
                }
            }
            OracleSpec::ResidueClass {
                offset,
                modulus,
                from_zero,
            } => {
                let mut ok = vec![false; *modulus as usize];
                ok[(offset % modulus) as usize] = true;
                Pred::Residues {
                    modulus: *modulus,
                    ok,
                    least: offset.saturating_add(if *from_zero { 0 } else { *modulus }),
                }
            }
            OracleSpec::TotientImage => Pred::Image(ArithFn::Phi, 0),
            OracleSpec::ShiftedTotient(c) => Pred::Image(ArithFn::Phi, *c),
            OracleSpec::PsiImage => Pred::Image(ArithFn::Psi, 0),
            OracleSpec::EvenPerfect => Pred::Perfect,
            OracleSpec::FiniteSet(v) => Pred::Listed(v.iter().filter_map(|x| x.to_u64()).collect()),
            OracleSpec::Union(p) => Pred::Any(p.iter().map(Pred::compile).collect()),
            OracleSpec::Intersection(p) => Pred::All(p.iter().map(Pred::compile).collect()),
        }
    }

    fn test(&self, n: u64) -> bool {
        match self {
            Pred::Prime => is_prime_u64(n),
            Pred::Pow2 => n.is_power_of_two(),
            Pred::ThreeSquares => {
                let m = n >> (n.trailing_zeros() & !1);
                m % 8 != 7
            }
            Pred::Residues { modulus, ok, least } => n >= *least && ok[(n % modulus) as usize],
            Pred::Image(f, c) => n > *c && arith::inverse_search(n - c, *f).is_some(),
            Pred::Perfect => perfect_u64(n),
            Pred::Listed(v) => v.binary_search(&n).is_ok(),
            Pred::Any(p) => p.iter().any(|q| q.test(n)),
            Pred::All(p) => p.iter().all(|q| q.test(n)),
        }
    }
}

fn perfect_u64(n: u64) -> bool {
    if n == 0 || n % 2 == 1 {
        return false;
    }
    let a = n.trailing_zeros();
    let odd = n >> a;
    a + 1 < 64 && odd == (1u64 << (a + 1)) - 1 && is_prime_u64(odd)
}

/// Exact membership for 64-bit values without witnesses or assumptions.
pub fn member_u64(spec: &OracleSpec, n: u64) -> bool {
    n >= 1 && Pred::compile(spec).test(n)
}

pub type Enumerator<'a> = Box<dyn Iterator<Item = u64> + Send + 'a>;

/// Largest sieve bound used for φ/ψ image enumeration.
pub const IMAGE_SIEVE_LIMIT: u64 = 2_000_000;
const SCAN_CHUNK: u64 = 1 << 15;

/// Members of `spec` in `[1, bound]`, ascending.
pub fn enumerator(spec: &OracleSpec, bound: u64) -> Result<Enumerator<'static>> {
    enumerator_with_block(spec, bound, sieve::DEFAULT_BLOCK)
}

pub fn enumerator_with_block(
    spec: &OracleSpec,
    bound: u64,
    block: usize,
) -> Result<Enumerator<'static>> {
    if bound == 0 {
        return Ok(Box::new(std::iter::empty()));
    }
    Ok(match spec {
        OracleSpec::Primes => Box::new(SegmentedSieve::with_block(bound, block)),
        OracleSpec::PowersOfTwo => {
            Box::new((0..64).map(|k| 1u64 << k).take_while(move |&v| v <= bound))
        }
        OracleSpec::EvenPerfect => Box::new(
            (2..=32u64)
                .filter(|&p| is_prime_u64((1u64 << p) - 1))
                .map(|p| ((1u64 << p) - 1) << (p - 1))
                .take_while(move |&v| v <= bound),
        ),
        OracleSpec::FiniteSet(v) => {
            let v: Vec<u64> = v
                .iter()
                .filter_map(|x| x.to_u64())
                .filter(|&x| x <= bound)
                .collect();
            Box::new(v.into_iter())
        }
        OracleSpec::TotientImage if bound <= IMAGE_SIEVE_LIMIT => {
            Box::new(image_sieve(ArithFn::Phi, bound, 0))
        }
        OracleSpec::ShiftedTotient(c) if bound <= IMAGE_SIEVE_LIMIT => {
            Box::new(image_sieve(ArithFn::Phi, bound, *c))
        }
        OracleSpec::PsiImage if bound <= IMAGE_SIEVE_LIMIT => {
            Box::new(image_sieve(ArithFn::Psi, bound, 0))
        }
        OracleSpec::Union(parts) => {
            let streams = parts
                .iter()
                .map(|p| enumerator_with_block(p, bound, block).map(|e| e.peekable()))
                .collect::<Result<Vec<_>>>()?;
            Box::new(Merge { streams })
        }
        OracleSpec::Intersection(parts) => {
            // drive from the sparsest enumerable part, filter by the rest
            match parts.iter().position(is_sparse) {
                Some(i) => {
                    let driver = enumerator_with_block(&parts[i], bound, block)?;
                    let rest: Vec<Pred> = parts
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != i)
                        .map(|(_, p)| Pred::compile(p))
                        .collect();
                    Box::new(driver.filter(move |&n| rest.iter().all(|q| q.test(n))))
                }
                None => Box::new(ParallelScan::new(Pred::compile(spec), bound)),
            }
        }
        _ => Box::new(ParallelScan::new(Pred::compile(spec), bound)),
    })
}

fn is_sparse(spec: &OracleSpec) -> bool {
    matches!(
        spec,
        OracleSpec::Primes
            | OracleSpec::PowersOfTwo
            | OracleSpec::EvenPerfect
            | OracleSpec::FiniteSet(_)
    )
}

/// Ascending merge of ascending streams, dropping duplicates.
struct Merge {
    streams: Vec<std::iter::Peekable<Enumerator<'static>>>,
}

impl Iterator for Merge {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        let least = self
            .streams
            .iter_mut()
            .filter_map(|s| s.peek().copied())
            .min()?;
        for s in &mut self.streams {
            if s.peek() == Some(&least) {
                s.next();
            }
        }
        Some(least)
    }
}

/// Filters `1..=bound` chunk by chunk, testing each chunk in parallel.
struct ParallelScan {
    pred: Arc<Pred>,
    next: u64,
    bound: u64,
    buf: std::vec::IntoIter<u64>,
}

impl ParallelScan {
    fn new(pred: Pred, bound: u64) -> Self {
        ParallelScan {
            pred: Arc::new(pred),
            next: 1,
            bound,
            buf: Vec::new().into_iter(),
        }
    }
}

impl Iterator for ParallelScan {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        loop {
            if let Some(v) = self.buf.next() {
                return Some(v);
            }
            if self.next > self.bound {
                return None;
            }
            let hi = self.bound.min(self.next.saturating_add(SCAN_CHUNK - 1));
            let pred = &self.pred;
            let hits: Vec<u64> = (self.next..=hi)
                .into_par_iter()
                .filter(|&n| pred.test(n))
                .collect();
            self.next = hi.saturating_add(1);
            if hi == u64::MAX {
                self.bound = 0;
            }
            self.buf = hits.into_iter();
        }
    }
}

/// An `M` with `φ(m) <= b ⇒ m <= M`.
pub fn phi_preimage_cap(b: u64) -> u64 {
    // φ(m) >= sqrt(m/2) gives a first bound; then φ(m) >= m ∏ (1 - 1/p) over
    // the first ω_max(M) primes
    let mut cap = 2.0 * (b as f64) * (b as f64);
    loop {
        let mut primorial = 1.0f64;
        let mut ratio = 1.0f64;
        for &p in sieve::small_primes() {
            if primorial * p as f64 > cap {
                break;
            }
            primorial *= p as f64;
            ratio *= p as f64 / (p as f64 - 1.0);
        }
        let next = (b as f64 * ratio).ceil() + 1.0;
        if next >= cap {
            return cap.min(u64::MAX as f64) as u64;
        }
        cap = next;
    }
}

fn arith_table(f: ArithFn, limit: usize) -> Vec<u64> {
    let mut v: Vec<u64> = (0..=limit as u64).collect();
    let mut composite = vec![false; limit + 1];
    for p in 2..=limit {
        if composite[p] {
            continue;
        }
        let mut j = p;
        while j <= limit {
            if j > p {
                composite[j] = true;
            }
            v[j] = match f {
                ArithFn::Phi => v[j] / p as u64 * (p as u64 - 1),
                ArithFn::Psi => v[j] / p as u64 * (p as u64 + 1),
            };
            j += p;
        }
    }
    v
}

/// Values `c + f(m)` in `[1, bound]`, by sieving `f` over every possible preimage.
fn image_sieve(f: ArithFn, bound: u64, shift: u64) -> impl Iterator<Item = u64> + Send {
    let target = bound.saturating_sub(shift);
    let limit = match f {
        ArithFn::Phi => phi_preimage_cap(target),
        ArithFn::Psi => target,
    } as usize;
    let mut hit = vec![false; target as usize + 1];
    if target >= 1 {
        for v in arith_table(f, limit).into_iter().skip(1) {
            if v <= target {
                hit[v as usize] = true;
            }
        }
    }
    hit.into_iter()
        .enumerate()
        .filter(|&(_, h)| h)
        .map(move |(v, _)| v as u64 + shift)
}

/// A residue condition implied by membership, apart from listed exceptions.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct NecessaryCondition {
    pub description: String,
    pub modulus: u64,
    pub residues: Vec<u64>,
    /// members that may violate the condition
    pub exceptions: Vec<u64>,
}

impl NecessaryCondition {
    pub fn dfa(&self, base: u32) -> Result<SubwordDfa> {
        residue_class_dfa(base, self.modulus, &self.residues)
    }

    pub fn holds(&self, n: &BigUint) -> bool {
        let r = (n % self.modulus).to_u64().unwrap();
        self.residues.contains(&r)
    }
}

fn even(description: &str, parity: u64, exceptions: Vec<u64>) -> NecessaryCondition {
    NecessaryCondition {
        description: description.to_string(),
        modulus: 2,
        residues: vec![parity],
        exceptions,
    }
}

pub fn necessary_conditions(spec: &OracleSpec) -> Vec<NecessaryCondition> {
    match spec {
        OracleSpec::TotientImage => vec![even("value even (phi(m) is even for m > 2)", 0, vec![1])],
        OracleSpec::PsiImage => vec![even("value even (psi(m) is even for m > 2)", 0, vec![1, 3])],
        OracleSpec::ShiftedTotient(c) => {
            let parity = c % 2;
            let what = if parity == 0 { "even" } else { "odd" };
            vec![even(
                &format!("value {what} (c + phi(m) with phi(m) even for m > 2)"),
                parity,
                vec![c + 1],
            )]
        }
        OracleSpec::QuadResidues(m) => vec![NecessaryCondition {
            description: format!("value mod {m} is a square"),
            modulus: *m,
            residues: qr_residues(*m)
                .map(|s| s.into_iter().collect())
                .unwrap_or_default(),
            exceptions: vec![],
        }],
        OracleSpec::ResidueClass {
            offset, modulus, ..
        } => vec![NecessaryCondition {
            description: format!("value = {} mod {modulus}", offset % modulus),
            modulus: *modulus,
            residues: vec![offset % modulus],
            exceptions: vec![],
        }],
        OracleSpec::Intersection(parts) => parts.iter().flat_map(necessary_conditions).collect(),
        _ => vec![],
    }
}

/// The exact language of numerals of an automatic spec.
pub fn automatic_dfa(spec: &OracleSpec, base: u32) -> Result<Option<SubwordDfa>> {
    Ok(Some(match spec {
        OracleSpec::QuadResidues(m) => {
            let res: Vec<u64> = qr_residues(*m)?.into_iter().collect();
            residue_class_dfa(base, *m, &res)?
        }
        OracleSpec::ResidueClass {
            offset,
            modulus,
            from_zero,
        } => {
            let cls = residue_class_dfa(base, *modulus, &[offset % modulus])?;
            let least = offset + if *from_zero { 0 } else { *modulus };
            if least > 1 {
                intersect(&cls, &at_least_dfa(base, least)?)?
            } else {
                cls
            }
        }
        OracleSpec::Union(parts) | OracleSpec::Intersection(parts) => {
            let mut acc: Option<SubwordDfa> = None;
            for p in parts {
                let Some(d) = automatic_dfa(p, base)? else {
                    return Ok(None);
                };
                acc = Some(match acc {
                    None => d,
                    Some(a) if matches!(spec, OracleSpec::Union(_)) => union(&a, &d)?,
                    Some(a) => intersect(&a, &d)?,
                });
            }
            match acc {
                Some(d) => d,
                None => return Ok(None),
            }
        }
        _ => return Ok(None),
    }))
}
