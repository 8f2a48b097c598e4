//! Set descriptions and their text grammar.
//!
//! ```text
//! expr  := term ('|' term)*
//! term  := atom ('&' atom)*
//! atom  := '(' expr ')' | primes | pow2 | 3squares | perfect | psi
//!        | qr:<m> | residue:<a>+<m>N[0] | totient[+<c>]
//!        | finite:<file> | finite:[v, ...]
//! ```

use std::fmt;
use std::path::Path;

use num_bigint::BigUint;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleSpec {
    Primes,
    /// `{1, 2, 4, 8, ...}`
    PowersOfTwo,
    SumThreeSquares,
    /// `n mod m` is a square mod `m`.
    QuadResidues(u64),
    /// `offset + modulus·x` with `x >= 1`, or `x >= 0` when `from_zero`.
    ResidueClass {
        offset: u64,
        modulus: u64,
        from_zero: bool,
    },
    TotientImage,
    /// `c + φ(x)`
    ShiftedTotient(u64),
    PsiImage,
    EvenPerfect,
    /// ascending, deduplicated, all >= 1
    FiniteSet(Vec<BigUint>),
    Union(Vec<OracleSpec>),
    Intersection(Vec<OracleSpec>),
}

impl OracleSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let mut p = Parser { src: text, pos: 0 };
        p.skip_ws();
        let spec = p.expr()?;
        p.skip_ws();
        if p.pos < text.len() {
            return Err(Error::parse(
                p.pos,
                format!("unexpected '{}'", p.rest().chars().next().unwrap_or(' ')),
            ));
        }
        Ok(spec)
    }

    pub fn finite(values: impl IntoIterator<Item = BigUint>) -> Result<Self> {
        let mut v: Vec<BigUint> = values.into_iter().collect();
        if v.iter().any(|x| x == &BigUint::default()) {
            return Err(Error::domain("finite sets contain positive integers only"));
        }
        v.sort();
        v.dedup();
        Ok(OracleSpec::FiniteSet(v))
    }

    pub fn residue_class(offset: u64, modulus: u64, from_zero: bool) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::domain("residue class modulus must be >= 1"));
        }
        if offset == 0 && from_zero {
            return Err(Error::domain("residue class would contain 0"));
        }
        Ok(OracleSpec::ResidueClass {
            offset,
            modulus,
            from_zero,
        })
    }

    /// Membership depends only on `n mod m` (plus a lower threshold).
    pub fn is_automatic(&self) -> bool {
        match self {
            OracleSpec::QuadResidues(_) | OracleSpec::ResidueClass { .. } => true,
            OracleSpec::Union(parts) | OracleSpec::Intersection(parts) => {
                parts.iter().all(|s| s.is_automatic())
            }
            _ => false,
        }
    }
}

fn parse_finite_file(path: &Path) -> Result<Vec<BigUint>> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        for tok in line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
        {
            out.push(tok.parse().map_err(|_| Error::Table {
                table: path.display().to_string(),
                line: i + 1,
                message: format!("bad value '{tok}'"),
            })?);
        }
    }
    Ok(out)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let r = self.rest();
        self.pos += r.len() - r.trim_start().len();
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.rest().starts_with(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<OracleSpec> {
        let mut parts = vec![self.term()?];
        while self.eat('|') {
            parts.push(self.term()?);
        }
        Ok(flatten(parts, true))
    }

    fn term(&mut self) -> Result<OracleSpec> {
        let mut parts = vec![self.atom()?];
        while self.eat('&') {
            parts.push(self.atom()?);
        }
        Ok(flatten(parts, false))
    }

    fn atom(&mut self) -> Result<OracleSpec> {
        self.skip_ws();
        if self.eat('(') {
            let inner = self.expr()?;
            if !self.eat(')') {
                return Err(Error::parse(self.pos, "expected ')'"));
            }
            return Ok(inner);
        }
        let start = self.pos;
        let r = self.rest();
        let len = if r.starts_with("finite:[") {
            r.find(']')
                .map(|i| i + 1)
                .ok_or_else(|| Error::parse(self.src.len(), "unterminated '['"))?
        } else {
            r.find(|c: char| "&|()".contains(c) || c.is_whitespace())
                .unwrap_or(r.len())
        };
        if len == 0 {
            return Err(Error::parse(start, "expected a set name"));
        }
        self.pos += len;
        word(&r[..len], start)
    }
}

fn flatten(parts: Vec<OracleSpec>, is_union: bool) -> OracleSpec {
    if parts.len() == 1 {
        return parts.into_iter().next().unwrap();
    }
    let mut out = Vec::new();
    for p in parts {
        match (p, is_union) {
            (OracleSpec::Union(inner), true) | (OracleSpec::Intersection(inner), false) => {
                out.extend(inner)
            }
            (p, _) => out.push(p),
        }
    }
    if is_union {
        OracleSpec::Union(out)
    } else {
        OracleSpec::Intersection(out)
    }
}

fn number<T: std::str::FromStr>(text: &str, at: usize, what: &str) -> Result<T> {
    text.parse()
        .map_err(|_| Error::parse(at, format!("expected {what}, found '{text}'")))
}

fn word<'a>(w: &'a str, at: usize) -> Result<OracleSpec> {
    let (head, arg) = match w.split_once(':') {
        Some((h, a)) => (h, Some(a)),
        None => (w, None),
    };
    let arg_at = at + head.len() + 1;
    let no_arg = |spec: OracleSpec| match arg {
        None => Ok(spec),
        Some(_) => Err(Error::parse(
            at + head.len(),
            format!("'{head}' takes no argument"),
        )),
    };
    let need = |a: Option<&'a str>| {
        a.ok_or_else(|| Error::parse(at + head.len(), format!("'{head}' needs ':<argument>'")))
    };
    match head {
        "primes" => no_arg(OracleSpec::Primes),
        "pow2" => no_arg(OracleSpec::PowersOfTwo),
        "3squares" => no_arg(OracleSpec::SumThreeSquares),
        "psi" => no_arg(OracleSpec::PsiImage),
        "perfect" => no_arg(OracleSpec::EvenPerfect),
        "totient" => no_arg(OracleSpec::TotientImage),
        _ if head.starts_with("totient+") && arg.is_none() => {
            let c: u64 = number(&head[8..], at + 8, "a shift")?;
            Ok(if c == 0 {
                OracleSpec::TotientImage
            } else {
                OracleSpec::ShiftedTotient(c)
            })
        }
        "qr" => {
            let m: u64 = number(need(arg)?, arg_at, "a modulus")?;
            if m < 2 {
                return Err(Error::parse(arg_at, "qr modulus must be >= 2"));
            }
            Ok(OracleSpec::QuadResidues(m))
        }
        "residue" => {
            let a = need(arg)?;
            let (off, rest) = a
                .split_once('+')
                .ok_or_else(|| Error::parse(arg_at, "expected <a>+<m>N or <a>+<m>N0"))?;
            let m_at = arg_at + off.len() + 1;
            let (m, from_zero) = if let Some(m) = rest.strip_suffix("N0") {
                (m, true)
            } else if let Some(m) = rest.strip_suffix('N') {
                (m, false)
            } else {
                return Err(Error::parse(m_at, "residue class must end in N or N0"));
            };
            let offset: u64 = number(off, arg_at, "an offset")?;
            let modulus: u64 = number(m, m_at, "a modulus")?;
            OracleSpec::residue_class(offset, modulus, from_zero)
                .map_err(|e| Error::parse(m_at, e.to_string()))
        }
        "finite" => {
            let a = need(arg)?;
            let values = if let Some(list) = a.strip_prefix('[') {
                let list = list.trim_end_matches(']');
                let mut vals = Vec::new();
                let mut off = arg_at + 1;
                for tok in list.split(',') {
                    let t = tok.trim();
                    if !t.is_empty() {
                        vals.push(number::<BigUint>(
                            t,
                            off + (tok.len() - tok.trim_start().len()),
                            "a value",
                        )?);
                    }
                    off += tok.len() + 1;
                }
                vals
            } else {
                parse_finite_file(Path::new(a))?
            };
            OracleSpec::finite(values).map_err(|e| Error::parse(arg_at, e.to_string()))
        }
        _ => Err(Error::parse(at, format!("unknown set '{head}'"))),
    }
}

impl fmt::Display for OracleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleSpec::Primes => f.write_str("primes"),
            OracleSpec::PowersOfTwo => f.write_str("pow2"),
            OracleSpec::SumThreeSquares => f.write_str("3squares"),
            OracleSpec::QuadResidues(m) => write!(f, "qr:{m}"),
            OracleSpec::ResidueClass {
                offset,
                modulus,
                from_zero,
            } => write!(
                f,
                "residue:{offset}+{modulus}N{}",
                if *from_zero { "0" } else { "" }
            ),
            OracleSpec::TotientImage => f.write_str("totient"),
            OracleSpec::ShiftedTotient(c) => write!(f, "totient+{c}"),
            OracleSpec::PsiImage => f.write_str("psi"),
            OracleSpec::EvenPerfect => f.write_str("perfect"),
            OracleSpec::FiniteSet(v) => {
                let items: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "finite:[{}]", items.join(","))
            }
            OracleSpec::Union(parts) => {
                let items: Vec<String> = parts.iter().map(|p| p.to_string()).collect();
                f.write_str(&items.join(" | "))
            }
            OracleSpec::Intersection(parts) => {
                let items: Vec<String> = parts
                    .iter()
                    .map(|p| match p {
                        OracleSpec::Union(_) => format!("({p})"),
                        _ => p.to_string(),
                    })
                    .collect();
                f.write_str(&items.join(" & "))
            }
        }
    }
}

impl Serialize for OracleSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grammar() {
        assert_eq!(
            OracleSpec::parse("qr:6").unwrap(),
            OracleSpec::QuadResidues(6)
        );
        assert_eq!(
            OracleSpec::parse("totient+3").unwrap(),
            OracleSpec::ShiftedTotient(3)
        );
        assert_eq!(
            OracleSpec::parse("residue:2+10N0").unwrap(),
            OracleSpec::ResidueClass {
                offset: 2,
                modulus: 10,
                from_zero: true
            }
        );
        let s = OracleSpec::parse("primes & residue:7+10N | pow2").unwrap();
        let OracleSpec::Union(parts) = &s else {
            panic!("{s:?}")
        };
        assert!(matches!(parts[0], OracleSpec::Intersection(_)));
        assert_eq!(parts[1], OracleSpec::PowersOfTwo);
        let s = OracleSpec::parse("primes & (pow2 | psi)").unwrap();
        assert!(matches!(s, OracleSpec::Intersection(_)));
        assert_eq!(
            OracleSpec::parse("finite:[ 5, 3 ,3]").unwrap(),
            OracleSpec::FiniteSet(vec![BigUint::from(3u32), BigUint::from(5u32)])
        );
    }

    #[test]
    fn errors_carry_positions() {
        let pos = |s: &str| match OracleSpec::parse(s) {
            Err(Error::Parse { position, .. }) => position,
            other => panic!("{other:?}"),
        };
        assert_eq!(pos("primes & bogus"), 9);
        assert_eq!(pos("qr:x"), 3);
        assert_eq!(pos("qr:1"), 3);
        assert_eq!(pos("(primes"), 7);
        assert_eq!(pos("primes )"), 7);
        assert_eq!(pos("residue:2+10"), 10);
        assert_eq!(pos(""), 0);
        assert_eq!(pos("finite:[1,x]"), 10);
        assert_eq!(pos("primes:3"), 6);
    }

    #[test]
    fn display_round_trips() {
        for text in [
            "primes",
            "pow2",
            "3squares",
            "qr:7",
            "residue:7+10N",
            "residue:2+10N0",
            "totient",
            "totient+3",
            "psi",
            "perfect",
            "finite:[1,70,77]",
            "primes & residue:7+10N",
            "pow2 | primes & qr:6",
            "(pow2 | psi) & qr:6",
        ] {
            let spec = OracleSpec::parse(text).unwrap();
            assert_eq!(spec.to_string(), text);
            assert_eq!(OracleSpec::parse(&spec.to_string()).unwrap(), spec);
        }
    }

    #[test]
    fn finite_from_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.txt");
        std::fs::write(&p, "# c\n9 4\n1,4\n").unwrap();
        let spec = OracleSpec::parse(&format!("finite:{}", p.display())).unwrap();
        assert_eq!(spec.to_string(), "finite:[1,4,9]");
    }
}
