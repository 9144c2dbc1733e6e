//! Text grammar for polynomials with integer coefficients:
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary ('*' unary)*
//! unary := ('+' | '-') unary | power
//! power := atom ('^' integer)?
//! atom  := integer | 's' digits | '(' expr ')'
//! ```
//!
//! Every intermediate result is bounded (degree, coefficient size, term
//! count, nesting) so hostile input fails fast instead of exhausting memory.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use super::HomPoly;
use crate::field::FieldSpec;

/// Largest accepted total degree, and largest accepted exponent.
pub const MAX_DEGREE: u32 = 64;
const MAX_COEFF_BITS: u64 = 4096;
const MAX_DEPTH: usize = 64;
const MAX_TERMS: usize = 1_000_000;
const MAX_INPUT: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("input longer than {MAX_INPUT} bytes")]
    InputTooLong,
    #[error("unexpected character {ch:?} at {pos}")]
    UnexpectedChar { pos: usize, ch: char },
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("unexpected {found} at {pos}")]
    UnexpectedToken { pos: usize, found: String },
    #[error("unknown variable {name:?} at {pos} (expected s0..s{max})")]
    UnknownVariable { pos: usize, name: String, max: usize },
    #[error("exponent at {pos} exceeds {MAX_DEGREE}")]
    ExponentTooLarge { pos: usize },
    #[error("total degree exceeds {MAX_DEGREE}")]
    DegreeTooLarge,
    #[error("coefficient exceeds {MAX_COEFF_BITS} bits")]
    CoefficientTooLarge,
    #[error("nesting deeper than {MAX_DEPTH} at {pos}")]
    TooDeep { pos: usize },
    #[error("expansion exceeds {MAX_TERMS} terms")]
    TooManyTerms,
    #[error("not homogeneous: degrees {0} and {1} both occur")]
    NotHomogeneous(u32, u32),
    #[error("forms have different degrees ({0} and {1})")]
    DegreeMismatch(u32, u32),
}

/// Integer polynomial in `nvars` variables, as parsed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedPoly {
    pub nvars: usize,
    pub terms: BTreeMap<Vec<u32>, BigInt>,
}

impl ParsedPoly {
    fn constant(nvars: usize, c: BigInt) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(vec![0; nvars], c);
        }
        ParsedPoly { nvars, terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// The common degree of all terms; `Ok(None)` for the zero polynomial.
    pub fn homogeneous_degree(&self) -> Result<Option<u32>, ParseError> {
        let mut degs = self.terms.keys().map(|e| e.iter().sum::<u32>());
        let Some(d) = degs.next() else {
            return Ok(None);
        };
        match degs.find(|&e| e != d) {
            Some(e) => Err(ParseError::NotHomogeneous(d.min(e), d.max(e))),
            None => Ok(Some(d)),
        }
    }

    fn neg(mut self) -> Self {
        for c in self.terms.values_mut() {
            *c = -std::mem::take(c);
        }
        self
    }

    fn add(mut self, other: ParsedPoly) -> Result<Self, ParseError> {
        for (e, c) in other.terms {
            let entry = self.terms.entry(e.clone()).or_insert_with(BigInt::zero);
            *entry += c;
            check_bits(entry)?;
            if entry.is_zero() {
                self.terms.remove(&e);
            }
        }
        if self.terms.len() > MAX_TERMS {
            return Err(ParseError::TooManyTerms);
        }
        Ok(self)
    }

    fn mul(&self, other: &ParsedPoly) -> Result<Self, ParseError> {
        if self.terms.len().saturating_mul(other.terms.len()) > MAX_TERMS {
            return Err(ParseError::TooManyTerms);
        }
        let da = self.total_degree().unwrap_or(0);
        let db = other.total_degree().unwrap_or(0);
        if !self.is_zero() && !other.is_zero() && da + db > MAX_DEGREE {
            return Err(ParseError::DegreeTooLarge);
        }
        let mut out: BTreeMap<Vec<u32>, BigInt> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                let prod = ca * cb;
                check_bits(&prod)?;
                let entry = out.entry(e).or_insert_with(BigInt::zero);
                *entry += prod;
                check_bits(entry)?;
            }
        }
        out.retain(|_, c| !c.is_zero());
        Ok(ParsedPoly {
            nvars: self.nvars,
            terms: out,
        })
    }

    fn pow(&self, k: u32) -> Result<Self, ParseError> {
        let mut acc = ParsedPoly::constant(self.nvars, BigInt::one());
        for _ in 0..k {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }
}

fn check_bits(c: &BigInt) -> Result<(), ParseError> {
    if c.bits() > MAX_COEFF_BITS {
        Err(ParseError::CoefficientTooLarge)
    } else {
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
    Var(usize),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Int(n) => format!("integer {n}"),
            Tok::Var(i) => format!("variable s{i}"),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Caret => "'^'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
        }
    }
}

fn tokenize(text: &str, nvars: usize) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let digits = &text[start..i];
                // ~3.33 bits per decimal digit
                if digits.len() as u64 * 10 > MAX_COEFF_BITS * 3 + 30 {
                    return Err(ParseError::CoefficientTooLarge);
                }
                let n: BigInt = digits.parse().expect("ascii digits");
                check_bits(&n)?;
                out.push((start, Tok::Int(n)));
                continue;
            }
            b's' => {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let name = &text[start..i];
                let idx = name[1..].parse::<usize>().ok().filter(|&k| k < nvars && name.len() <= 4);
                match idx {
                    Some(k) => out.push((start, Tok::Var(k))),
                    None => {
                        return Err(ParseError::UnknownVariable {
                            pos: start,
                            name: name.to_string(),
                            max: nvars.saturating_sub(1),
                        })
                    }
                }
                continue;
            }
            _ => {
                let ch = text[start..].chars().next().expect("in bounds");
                return Err(ParseError::UnexpectedChar { pos: start, ch });
            }
        };
        out.push((start, tok));
        i += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    nvars: usize,
    depth: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(usize::MAX, |(p, _)| *p)
    }

    fn next(&mut self) -> Result<(usize, Tok), ParseError> {
        let t = self.toks.get(self.at).cloned().ok_or(ParseError::UnexpectedEnd)?;
        self.at += 1;
        Ok(t)
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(ParseError::TooDeep { pos: self.pos() });
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<ParsedPoly, ParseError> {
        let mut acc = self.term()?;
        while let Some(t) = self.peek() {
            let negate = match t {
                Tok::Plus => false,
                Tok::Minus => true,
                _ => break,
            };
            self.at += 1;
            let rhs = self.term()?;
            acc = acc.add(if negate { rhs.neg() } else { rhs })?;
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<ParsedPoly, ParseError> {
        let mut acc = self.unary()?;
        while self.peek() == Some(&Tok::Star) {
            self.at += 1;
            let rhs = self.unary()?;
            acc = acc.mul(&rhs)?;
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<ParsedPoly, ParseError> {
        match self.peek() {
            Some(Tok::Minus) | Some(Tok::Plus) => {
                let (_, t) = self.next()?;
                self.enter()?;
                let inner = self.unary()?;
                self.depth -= 1;
                Ok(if t == Tok::Minus { inner.neg() } else { inner })
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<ParsedPoly, ParseError> {
        let base = self.atom()?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        self.at += 1;
        let (pos, t) = self.next()?;
        let Tok::Int(k) = t else {
            return Err(ParseError::UnexpectedToken { pos, found: t.describe() });
        };
        let k = u32::try_from(&k)
            .ok()
            .filter(|&k| k <= MAX_DEGREE)
            .ok_or(ParseError::ExponentTooLarge { pos })?;
        if base.total_degree().unwrap_or(0).saturating_mul(k) > MAX_DEGREE {
            return Err(ParseError::DegreeTooLarge);
        }
        base.pow(k)
    }

    fn atom(&mut self) -> Result<ParsedPoly, ParseError> {
        let (pos, t) = self.next()?;
        match t {
            Tok::Int(n) => Ok(ParsedPoly::constant(self.nvars, n)),
            Tok::Var(i) => {
                let mut e = vec![0; self.nvars];
                e[i] = 1;
                Ok(ParsedPoly {
                    nvars: self.nvars,
                    terms: BTreeMap::from([(e, BigInt::one())]),
                })
            }
            Tok::LParen => {
                self.enter()?;
                let inner = self.expr()?;
                self.depth -= 1;
                match self.next() {
                    Ok((_, Tok::RParen)) => Ok(inner),
                    Ok((pos, t)) => Err(ParseError::UnexpectedToken { pos, found: t.describe() }),
                    Err(e) => Err(e),
                }
            }
            other => Err(ParseError::UnexpectedToken { pos, found: other.describe() }),
        }
    }
}

/// Parses an integer polynomial in the variables `s0..s{nvars-1}`.
pub fn parse_poly(text: &str, nvars: usize) -> Result<ParsedPoly, ParseError> {
    if text.len() > MAX_INPUT {
        return Err(ParseError::InputTooLong);
    }
    let toks = tokenize(text, nvars)?;
    let mut p = Parser {
        toks,
        at: 0,
        nvars,
        depth: 0,
    };
    let out = p.expr()?;
    if let Some((pos, t)) = p.toks.get(p.at) {
        return Err(ParseError::UnexpectedToken {
            pos: *pos,
            found: t.describe(),
        });
    }
    Ok(out)
}

fn to_form(p: &ParsedPoly, degree: u32, field: FieldSpec) -> HomPoly {
    HomPoly::new(
        field,
        p.nvars,
        degree,
        p.terms.iter().map(|(e, c)| (e.clone(), field.from_bigint(c))),
    )
    .expect("homogeneity checked before conversion")
}

/// Parses one homogeneous form. The zero polynomial gets degree 0.
pub fn parse_form(text: &str, nvars: usize, field: FieldSpec) -> Result<HomPoly, ParseError> {
    let p = parse_poly(text, nvars)?;
    let d = p.homogeneous_degree()?.unwrap_or(0);
    Ok(to_form(&p, d, field))
}

/// Parses forms that must share one degree; zero entries take that degree.
/// The common degree is checked on the integer input, before any reduction
/// modulo the field characteristic.
pub fn parse_forms<S: AsRef<str>>(
    texts: &[S],
    nvars: usize,
    field: FieldSpec,
) -> Result<Vec<HomPoly>, ParseError> {
    let parsed = texts
        .iter()
        .map(|t| parse_poly(t.as_ref(), nvars))
        .collect::<Result<Vec<_>, _>>()?;
    let mut degree: Option<u32> = None;
    for p in &parsed {
        if let Some(d) = p.homogeneous_degree()? {
            match degree {
                Some(d0) if d0 != d => return Err(ParseError::DegreeMismatch(d0, d)),
                _ => degree = Some(d),
            }
        }
    }
    let d = degree.unwrap_or(0);
    Ok(parsed.iter().map(|p| to_form(p, d, field)).collect())
}
