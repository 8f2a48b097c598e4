//! Data tables: Mersenne exponents and known factorizations.
//!
//! Factor table lines are `N=p1^e1*p2^e2*...` or, for base-10 repunits,
//! `R<l>=...`. Every line is validated on load: the factors must multiply
//! back to the key and each must pass the primality test.

use std::path::{Path, PathBuf};

use num_bigint::BigUint;
use num_traits::One;

use super::primality::is_prime;
use crate::error::{Error, Result};

pub const MERSENNE_FILE: &str = "mersenne_exponents.txt";
pub const REPUNIT_FILE: &str = "repunit_factors.txt";
pub const FACTOR_FILE: &str = "factors.txt";

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TableKey {
    Number,
    Repunit(usize),
}

#[derive(Clone, Debug)]
pub struct TableEntry {
    pub key: TableKey,
    pub value: BigUint,
    pub factors: Vec<(BigUint, u32)>,
}

#[derive(Clone, Debug, Default)]
pub struct FactorTable {
    pub name: String,
    pub entries: Vec<TableEntry>,
    /// distinct primes from all entries, ascending
    primes: Vec<BigUint>,
}

pub fn repunit(len: usize) -> BigUint {
    (BigUint::from(10u32).pow(len as u32) - 1u32) / 9u32
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

impl FactorTable {
    pub fn parse(name: &str, text: &str) -> Result<Self> {
        let err = |line: usize, message: String| Error::Table {
            table: name.to_string(),
            line,
            message,
        };
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = strip_comment(raw);
            if line.is_empty() {
                continue;
            }
            let lineno = i + 1;
            let (lhs, rhs) = line
                .split_once('=')
                .ok_or_else(|| err(lineno, "expected KEY=factors".into()))?;
            let lhs = lhs.trim();
            let (key, value) = if let Some(len) = lhs.strip_prefix('R') {
                let len: usize = len
                    .parse()
                    .map_err(|_| err(lineno, format!("bad repunit length '{len}'")))?;
                (TableKey::Repunit(len), repunit(len))
            } else {
                let v: BigUint = lhs
                    .parse()
                    .map_err(|_| err(lineno, format!("bad number '{lhs}'")))?;
                (TableKey::Number, v)
            };
            let mut factors = Vec::new();
            let mut product = BigUint::one();
            for part in rhs.split('*') {
                let part = part.trim();
                let (p, e) = match part.split_once('^') {
                    Some((p, e)) => (
                        p,
                        e.parse::<u32>()
                            .map_err(|_| err(lineno, format!("bad exponent in '{part}'")))?,
                    ),
                    None => (part, 1),
                };
                let p: BigUint = p
                    .parse()
                    .map_err(|_| err(lineno, format!("bad factor '{part}'")))?;
                if !is_prime(&p)?.is_probably_prime() {
                    return Err(err(lineno, format!("listed factor {p} is not prime")));
                }
                product *= p.pow(e);
                factors.push((p, e));
            }
            if product != value {
                return Err(err(
                    lineno,
                    format!("factors multiply to {product}, not {value}"),
                ));
            }
            entries.push(TableEntry {
                key,
                value,
                factors,
            });
        }
        let mut primes: Vec<BigUint> = entries
            .iter()
            .flat_map(|e| e.factors.iter().map(|(p, _)| p.clone()))
            .collect();
        primes.sort();
        primes.dedup();
        Ok(FactorTable {
            name: name.to_string(),
            entries,
            primes,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let name = path
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Self::parse(&name, &text)
    }

    pub fn primes(&self) -> &[BigUint] {
        &self.primes
    }

    pub fn repunit_entry(&self, len: usize) -> Option<&TableEntry> {
        self.entries
            .iter()
            .find(|e| e.key == TableKey::Repunit(len))
    }
}

#[derive(Clone, Debug, Default)]
pub struct MersenneTable {
    pub source: String,
    pub exponents: Vec<u64>,
}

impl MersenneTable {
    pub fn parse(source: &str, text: &str) -> Result<Self> {
        let mut exponents = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = strip_comment(raw);
            if line.is_empty() {
                continue;
            }
            let p: u64 = line.parse().map_err(|_| Error::Table {
                table: source.to_string(),
                line: i + 1,
                message: format!("bad exponent '{line}'"),
            })?;
            if exponents.last().is_some_and(|&q| q >= p) {
                return Err(Error::Table {
                    table: source.to_string(),
                    line: i + 1,
                    message: "exponents must be strictly ascending".into(),
                });
            }
            exponents.push(p);
        }
        Ok(MersenneTable {
            source: source.to_string(),
            exponents,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&path.display().to_string(), &std::fs::read_to_string(path)?)
    }
}

/// Everything loaded from a data directory. Missing files leave gaps, not errors.
#[derive(Clone, Debug, Default)]
pub struct Tables {
    pub data_dir: Option<PathBuf>,
    pub factor_tables: Vec<FactorTable>,
    pub mersenne: Option<MersenneTable>,
}

impl Tables {
    pub fn load_dir(dir: &Path) -> Result<Self> {
        let mut t = Tables {
            data_dir: Some(dir.to_path_buf()),
            ..Default::default()
        };
        for file in [REPUNIT_FILE, FACTOR_FILE] {
            let p = dir.join(file);
            if p.exists() {
                t.factor_tables.push(FactorTable::load(&p)?);
            }
        }
        let m = dir.join(MERSENNE_FILE);
        if m.exists() {
            t.mersenne = Some(MersenneTable::load(&m)?);
        }
        Ok(t)
    }

    pub fn has_repunit(&self, len: usize) -> bool {
        self.factor_tables
            .iter()
            .any(|t| t.repunit_entry(len).is_some())
    }

    pub(crate) fn mersenne_path(&self) -> String {
        match &self.data_dir {
            Some(d) => d.join(MERSENNE_FILE).display().to_string(),
            None => MERSENNE_FILE.to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_validates() {
        let t = FactorTable::parse("t", "# c\nR6=3*7*11*13*37\n5550=2*3*5^2*37\n").unwrap();
        assert_eq!(t.entries.len(), 2);
        assert_eq!(t.primes().len(), 7);
        assert!(t.repunit_entry(6).is_some());

        let bad = FactorTable::parse("t", "R6=3*7*11*13\n").unwrap_err();
        assert!(matches!(bad, Error::Table { line: 1, .. }));
        let composite = FactorTable::parse("t", "\n15=15\n").unwrap_err();
        assert!(matches!(composite, Error::Table { line: 2, .. }));
    }

    #[test]
    fn mersenne_parse() {
        let m = MersenneTable::parse("m", "2\n3 # c\n5\n").unwrap();
        assert_eq!(m.exponents, vec![2, 3, 5]);
        assert!(MersenneTable::parse("m", "3\n2\n").is_err());
    }

    #[test]
    fn shipped_tables_load() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data");
        let t = Tables::load_dir(&dir).unwrap();
        assert!((2..=80).all(|l| t.has_repunit(l)));
        assert!(t.mersenne.unwrap().exponents.len() >= 20);
    }
}
