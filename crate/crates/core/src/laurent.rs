//! Laurent polynomials over `F_q` and their two input formats: a JSON
//! document and a small text grammar (`2*x1^-1*x2 - x3 + 1`).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::FieldTable;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Term {
    /// Field-element encoding of the coefficient (nonzero).
    pub coeff: u32,
    pub exps: Vec<i64>,
}

/// `sum_j a_j x^{V_j}` with pairwise distinct exponent vectors and nonzero
/// coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaurentPoly {
    p: u32,
    a: u32,
    n_vars: usize,
    terms: Vec<Term>,
}

#[derive(Serialize, Deserialize)]
struct JsonTerm {
    c: i64,
    e: Vec<i64>,
}

#[derive(Serialize, Deserialize)]
struct JsonPoly {
    p: u32,
    a: u32,
    vars: usize,
    terms: Vec<JsonTerm>,
}

fn digit_add(p: u32, a: u32, x: u32, y: u32) -> u32 {
    let (mut x, mut y) = (x, y);
    let mut out = 0;
    let mut place = 1u32;
    for _ in 0..a {
        out += ((x % p + y % p) % p) * place;
        x /= p;
        y /= p;
        place = place.wrapping_mul(p);
    }
    out
}

fn digit_neg(p: u32, a: u32, x: u32) -> u32 {
    let mut x = x;
    let mut out = 0;
    let mut place = 1u32;
    for _ in 0..a {
        out += ((p - x % p) % p) * place;
        x /= p;
        place = place.wrapping_mul(p);
    }
    out
}

impl LaurentPoly {
    /// Builds a canonical polynomial: duplicate exponents merged, zero
    /// coefficients dropped. An empty result is rejected.
    pub fn new(p: u32, a: u32, n_vars: usize, terms: Vec<Term>) -> Result<Self> {
        let q = (p as u64).pow(a);
        let mut merged: BTreeMap<Vec<i64>, u32> = BTreeMap::new();
        let mut order = Vec::new();
        for t in terms {
            if t.exps.len() != n_vars {
                return Err(Error::Invalid(format!(
                    "exponent vector {:?} has length {}, expected {n_vars}",
                    t.exps,
                    t.exps.len()
                )));
            }
            if t.coeff as u64 >= q {
                return Err(Error::Invalid(format!("coefficient {} is not an element of F_{q}", t.coeff)));
            }
            match merged.get_mut(&t.exps) {
                Some(c) => *c = digit_add(p, a, *c, t.coeff),
                None => {
                    order.push(t.exps.clone());
                    merged.insert(t.exps, t.coeff);
                }
            }
        }
        let terms: Vec<Term> = order
            .into_iter()
            .filter_map(|e| {
                let c = merged[&e];
                (c != 0).then_some(Term { coeff: c, exps: e })
            })
            .collect();
        if terms.is_empty() {
            return Err(Error::Invalid("empty polynomial".into()));
        }
        Ok(LaurentPoly { p, a, n_vars, terms })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn a(&self) -> u32 {
        self.a
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn exponents(&self) -> Vec<Vec<i64>> {
        self.terms.iter().map(|t| t.exps.clone()).collect()
    }

    /// True when `f` is defined over the given field.
    pub fn matches_field(&self, f: &FieldTable) -> bool {
        self.p == f.p() && self.a == f.degree()
    }

    /// Evaluates at a point of the torus (all coordinates nonzero).
    pub fn eval(&self, f: &FieldTable, x: &[u32]) -> u32 {
        let n = f.units() as i64;
        self.terms.iter().fold(0, |acc, t| {
            let mut l = f.log(t.coeff).unwrap() as i64;
            for (xi, &e) in x.iter().zip(&t.exps) {
                l += e * f.log(*xi).expect("torus point") as i64;
            }
            f.add(acc, f.exp(l.rem_euclid(n) as u64))
        })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: JsonPoly = serde_json::from_str(s).map_err(|e| Error::Parse {
            line: e.line(),
            col: e.column(),
            msg: e.to_string(),
        })?;
        let q = (doc.p as i64).pow(doc.a);
        let terms = doc
            .terms
            .into_iter()
            .map(|t| {
                let c = if doc.a == 1 {
                    t.c.rem_euclid(doc.p as i64)
                } else if (0..q).contains(&t.c) {
                    t.c
                } else {
                    return Err(Error::Invalid(format!("coefficient {} is not an element of F_{q}", t.c)));
                };
                Ok(Term { coeff: c as u32, exps: t.e })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(doc.p, doc.a, doc.vars, terms)
    }

    pub fn to_json(&self) -> String {
        let doc = JsonPoly {
            p: self.p,
            a: self.a,
            vars: self.n_vars,
            terms: self.terms.iter().map(|t| JsonTerm { c: t.coeff as i64, e: t.exps.clone() }).collect(),
        };
        serde_json::to_string(&doc).expect("serializable")
    }
}

/// Parses the text grammar: terms `c*x1^e1*...*xn^en` joined by `+`/`-`.
///
/// Coefficients are integers; over `F_p` they are reduced mod `p`, over
/// `F_{p^a}` they are element encodings and must lie in `[0, q)`. The number
/// of variables is `vars` if given, otherwise the largest index seen.
pub fn parse_laurent_text(text: &str, p: u32, a: u32, vars: Option<usize>) -> Result<LaurentPoly> {
    let mut parser = TextParser::new(text);
    let raw = parser.parse()?;
    let max_var = raw.iter().flat_map(|(_, v)| v.iter().map(|(i, _)| *i)).max().unwrap_or(0);
    let n_vars = vars.unwrap_or(max_var);
    if max_var > n_vars {
        return Err(Error::Invalid(format!("variable x{max_var} exceeds declared {n_vars} variables")));
    }
    let q = (p as i64).pow(a);
    let mut terms = Vec::new();
    for ((neg, c), factors) in raw {
        let coeff = if a == 1 {
            c.rem_euclid(p as i64) as u32
        } else if (0..q).contains(&c) {
            c as u32
        } else {
            return Err(Error::Invalid(format!("coefficient {c} is not an element of F_{q}")));
        };
        let coeff = if neg { digit_neg(p, a, coeff) } else { coeff };
        let mut exps = vec![0i64; n_vars];
        for (i, e) in factors {
            exps[i - 1] += e;
        }
        terms.push(Term { coeff, exps });
    }
    LaurentPoly::new(p, a, n_vars, terms)
}

/// Reads either format: a leading `{` selects JSON, otherwise the text
/// grammar (which needs the field).
pub fn parse_laurent(input: &str, p: u32, a: u32, vars: Option<usize>) -> Result<LaurentPoly> {
    if input.trim_start().starts_with('{') {
        LaurentPoly::from_json(input)
    } else {
        parse_laurent_text(input, p, a, vars)
    }
}

type RawTerm = ((bool, i64), Vec<(usize, i64)>);

struct TextParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> TextParser<'a> {
    fn new(s: &'a str) -> Self {
        TextParser { src: s.as_bytes(), pos: 0 }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        let before = &self.src[..self.pos.min(self.src.len())];
        let line = before.iter().filter(|&&c| c == b'\n').count() + 1;
        let col = before.iter().rev().take_while(|&&c| c != b'\n').count() + 1;
        Error::Parse { line, col, msg: msg.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn int(&mut self) -> Result<i64> {
        self.skip_ws();
        let start = self.pos;
        if matches!(self.src.get(self.pos), Some(b'-') | Some(b'+')) {
            self.pos += 1;
        }
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        s.parse().map_err(|_| {
            self.pos = start;
            self.err("expected an integer")
        })
    }

    fn parse(&mut self) -> Result<Vec<RawTerm>> {
        let mut out = Vec::new();
        let mut neg = false;
        if self.peek() == Some(b'-') {
            self.pos += 1;
            neg = true;
        } else if self.peek() == Some(b'+') {
            self.pos += 1;
        }
        loop {
            out.push(self.term(neg)?);
            match self.peek() {
                None => break,
                Some(b'+') => {
                    self.pos += 1;
                    neg = false;
                }
                Some(b'-') => {
                    self.pos += 1;
                    neg = true;
                }
                Some(c) => return Err(self.err(format!("unexpected character '{}'", c as char))),
            }
        }
        Ok(out)
    }

    fn term(&mut self, neg: bool) -> Result<RawTerm> {
        let mut coeff = 1i64;
        let mut factors = Vec::new();
        let mut first = true;
        loop {
            match self.peek() {
                Some(c) if c.is_ascii_digit() => {
                    coeff *= self.int()?;
                }
                Some(b'x') => {
                    self.pos += 1;
                    let idx = self.int()?;
                    if idx < 1 {
                        return Err(self.err("variable indices start at 1"));
                    }
                    let mut e = 1;
                    if self.peek() == Some(b'^') {
                        self.pos += 1;
                        e = self.int()?;
                    }
                    factors.push((idx as usize, e));
                }
                _ if first => return Err(self.err("expected a coefficient or a variable")),
                _ => return Err(self.err("expected a factor after '*'")),
            }
            first = false;
            if self.peek() == Some(b'*') {
                self.pos += 1;
            } else {
                break;
            }
        }
        Ok(((neg, coeff), factors))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_three_terms() {
        let f = parse_laurent_text("x1 + x2 + 2*x1^-1*x2^-1", 3, 1, None).unwrap();
        assert_eq!(f.n_vars(), 2);
        assert_eq!(f.exponents(), vec![vec![1, 0], vec![0, 1], vec![-1, -1]]);
        assert_eq!(f.terms()[2].coeff, 2);
    }

    #[test]
    fn zero_terms_dropped_and_empty_rejected() {
        let f = parse_laurent_text("0*x1 + x2", 5, 1, None).unwrap();
        assert_eq!(f.terms().len(), 1);
        assert!(parse_laurent_text("0*x1", 5, 1, None).is_err());
        assert!(parse_laurent_text("x1 + x1", 2, 1, None).is_err());
    }

    #[test]
    fn negative_coefficients_and_constants() {
        let f = parse_laurent_text("-x1 + 3 - 2*x1^2", 7, 1, None).unwrap();
        assert_eq!(f.terms()[0].coeff, 6);
        assert_eq!(f.terms()[1].exps, vec![0]);
        assert_eq!(f.terms()[2].coeff, 5);
    }

    #[test]
    fn reports_position_of_errors() {
        match parse_laurent_text("x1 +\n  * x2", 3, 1, None) {
            Err(Error::Parse { line, col, .. }) => assert_eq!((line, col), (2, 3)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_laurent_text("x1 ? x2", 3, 1, None), Err(Error::Parse { .. })));
    }

    #[test]
    fn extension_coefficients_must_be_encodings() {
        assert!(parse_laurent_text("8*x1", 3, 2, None).is_ok());
        assert!(parse_laurent_text("9*x1", 3, 2, None).is_err());
    }

    #[test]
    fn json_round_trip() {
        let s = r#"{"p":7,"a":1,"vars":3,"terms":[{"c":1,"e":[1,0,0]},{"c":3,"e":[-1,-1,1]}]}"#;
        let f = LaurentPoly::from_json(s).unwrap();
        assert_eq!(f.n_vars(), 3);
        assert_eq!(LaurentPoly::from_json(&f.to_json()).unwrap(), f);
        assert_eq!(parse_laurent(s, 0, 0, None).unwrap(), f);
    }

    #[test]
    fn json_errors_carry_position() {
        assert!(matches!(LaurentPoly::from_json("{\"p\": 7,\n \"a\": }"), Err(Error::Parse { line: 2, .. })));
    }
}
