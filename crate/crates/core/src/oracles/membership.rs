use std::fmt;

use num_bigint::BigUint;
use serde::{Serialize, Serializer};

/// Something a result depends on beyond certified arithmetic.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Assumption {
    /// Passed Baillie-PSW above 2^64 without a certificate.
    ProbablePrime(BigUint),
    /// Prime factors were taken from a shipped factor table.
    FactorTable(String),
    /// Factorization stopped with this composite cofactor.
    UnfactoredCofactor(BigUint),
    NoOddPerfect,
    Other(String),
}

impl fmt::Display for Assumption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Assumption::ProbablePrime(n) => write!(f, "probable prime (BPSW): {n}"),
            Assumption::FactorTable(name) => write!(f, "factor table: {name}"),
            Assumption::UnfactoredCofactor(c) => write!(f, "unfactored cofactor: {c}"),
            Assumption::NoOddPerfect => f.write_str("conjecture: no odd perfect numbers"),
            Assumption::Other(s) => f.write_str(s),
        }
    }
}

impl Serialize for Assumption {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

pub(crate) fn merge_assumptions(
    into: &mut Vec<Assumption>,
    more: impl IntoIterator<Item = Assumption>,
) {
    for a in more {
        if !into.contains(&a) {
            into.push(a);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    /// `f(x) = n` for the image sets.
    Preimage(BigUint),
    ThreeSquares(u64, u64, u64),
    Residue {
        modulus: u64,
        residue: u64,
    },
    PowerOfTwo(u64),
    /// `n = 2^(p-1) (2^p - 1)`
    MersenneExponent(u64),
    Prime,
    Listed,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Preimage(x) => write!(f, "x={x}"),
            Witness::ThreeSquares(x, y, z) => write!(f, "{x}^2+{y}^2+{z}^2"),
            Witness::Residue { modulus, residue } => write!(f, "n mod {modulus} = {residue}"),
            Witness::PowerOfTwo(k) => write!(f, "2^{k}"),
            Witness::MersenneExponent(p) => write!(f, "2^{}*(2^{p}-1)", p - 1),
            Witness::Prime => f.write_str("prime"),
            Witness::Listed => f.write_str("listed"),
        }
    }
}

impl Serialize for Witness {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Outcome of a membership query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Membership {
    Member {
        witness: Option<Witness>,
        assumptions: Vec<Assumption>,
    },
    NonMember {
        assumptions: Vec<Assumption>,
    },
    /// Undecided; the listed items block a decision.
    Conditional {
        assumptions: Vec<Assumption>,
    },
}

impl Membership {
    pub fn member(witness: Witness) -> Self {
        Membership::Member {
            witness: Some(witness),
            assumptions: Vec::new(),
        }
    }

    pub fn non_member() -> Self {
        Membership::NonMember {
            assumptions: Vec::new(),
        }
    }

    pub fn from_bool(b: bool) -> Self {
        if b {
            Membership::Member {
                witness: None,
                assumptions: Vec::new(),
            }
        } else {
            Membership::non_member()
        }
    }

    /// `Some(true/false)` when decided (possibly under assumptions).
    pub fn decided(&self) -> Option<bool> {
        match self {
            Membership::Member { .. } => Some(true),
            Membership::NonMember { .. } => Some(false),
            Membership::Conditional { .. } => None,
        }
    }

    pub fn is_member(&self) -> bool {
        matches!(self, Membership::Member { .. })
    }

    pub fn assumptions(&self) -> &[Assumption] {
        match self {
            Membership::Member { assumptions, .. }
            | Membership::NonMember { assumptions }
            | Membership::Conditional { assumptions } => assumptions,
        }
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Membership::Member { witness, .. } => witness.as_ref(),
            _ => None,
        }
    }

    pub(crate) fn with_assumptions(mut self, more: impl IntoIterator<Item = Assumption>) -> Self {
        match &mut self {
            Membership::Member { assumptions, .. }
            | Membership::NonMember { assumptions }
            | Membership::Conditional { assumptions } => merge_assumptions(assumptions, more),
        }
        self
    }
}

impl fmt::Display for Membership {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Membership::Member {
                witness: Some(w), ..
            } => write!(f, "yes ({w})")?,
            Membership::Member { witness: None, .. } => f.write_str("yes")?,
            Membership::NonMember { .. } => f.write_str("no")?,
            Membership::Conditional { .. } => f.write_str("conditional")?,
        }
        for a in self.assumptions() {
            write!(f, "; assuming {a}")?;
        }
        Ok(())
    }
}
