//! Canonical text and JSON forms of differential polynomials.

use serde::{Deserialize, Serialize};

use super::diffpoly::DiffPoly;
use super::monomial::JetMonomial;
use super::param::{ParamMono, Symbol};
use crate::error::{HodgeError, Result};
use crate::rational::{fmt_q, parse_q, Q};

pub(crate) fn format_diffpoly(p: &DiffPoly) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (i, (j, pm, c)) in p.terms().enumerate() {
        if i > 0 {
            out.push_str(" + ");
        }
        out.push('(');
        out.push_str(&fmt_q(c));
        out.push(')');
        for f in factor_list(j, pm) {
            out.push('*');
            out.push_str(&f);
        }
    }
    out
}

fn factor_list(j: &JetMonomial, pm: &ParamMono) -> Vec<String> {
    let mut out = Vec::new();
    let mut push = |name: String, e: i64| {
        if e == 1 {
            out.push(name);
        } else if e != 0 {
            out.push(format!("{name}^{e}"));
        }
    };
    for &(s, e) in pm.factors() {
        push(s.to_string(), e as i64);
    }
    push("v".into(), j.exp_v() as i64);
    push("v1".into(), j.exp_v1() as i64);
    for (m, e) in j.exp_higher() {
        push(format!("v{m}"), e as i64);
    }
    push("L".into(), j.exp_l() as i64);
    push("X".into(), j.exp_x() as i64);
    out
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(HodgeError::Parse { pos: self.pos, msg: msg.into() })
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

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn integer(&mut self) -> Result<i64> {
        self.skip_ws();
        let start = self.pos;
        if self.src.get(self.pos) == Some(&b'-') {
            self.pos += 1;
            self.skip_ws();
        }
        let digits = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if digits == self.pos {
            return self.err("expected integer");
        }
        let text: String =
            String::from_utf8_lossy(&self.src[start..self.pos]).chars().filter(|c| !c.is_whitespace()).collect();
        text.parse().or_else(|_| self.err("integer out of range"))
    }

    fn rational(&mut self) -> Result<Q> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos] != b')' {
            self.pos += 1;
        }
        let text = String::from_utf8_lossy(&self.src[start..self.pos]).to_string();
        parse_q(&text).map_err(|_| HodgeError::Parse { pos: start, msg: format!("bad rational {text:?}") })
    }

    fn factor(&mut self, j: &mut JetMonomial, pm: &mut ParamMono) -> Result<()> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphabetic() {
            self.pos += 1;
        }
        let name = String::from_utf8_lossy(&self.src[start..self.pos]).to_string();
        if name.is_empty() {
            return self.err("expected factor");
        }
        let dstart = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let index: Option<u32> = if dstart == self.pos {
            None
        } else {
            Some(String::from_utf8_lossy(&self.src[dstart..self.pos]).parse().or_else(|_| self.err("bad index"))?)
        };
        let e = if self.eat(b'^') { self.integer()? } else { 1 };
        let e32 = i32::try_from(e).or_else(|_| self.err("exponent out of range"))?;
        match (name.as_str(), index) {
            ("v", None) => bump_checked(self, j, 0, e32),
            ("v", Some(m)) => bump_checked(self, j, m as usize, e32),
            ("L", None) => {
                if e32 < 0 {
                    return self.err("negative power of L");
                }
                j.l += e32 as u32;
                Ok(())
            }
            ("X", None) => {
                if e32 < 0 {
                    return self.err("negative power of X");
                }
                j.x += e32 as u32;
                Ok(())
            }
            (n, idx) => match Symbol::parse_ident(n, idx) {
                Some(s) => {
                    if e32 < 0 {
                        return self.err("negative power of a parameter");
                    }
                    *pm = pm.mul(&ParamMono::var(s, e32 as u32));
                    Ok(())
                }
                None => Err(HodgeError::Parse { pos: start, msg: format!("unknown factor {name}") }),
            },
        }
    }

    fn term(&mut self) -> Result<(JetMonomial, ParamMono, Q)> {
        if !self.eat(b'(') {
            return self.err("expected '('");
        }
        let c = self.rational()?;
        if !self.eat(b')') {
            return self.err("expected ')'");
        }
        let mut j = JetMonomial::one();
        let mut pm = ParamMono::one();
        while self.eat(b'*') {
            self.factor(&mut j, &mut pm)?;
        }
        Ok((j, pm, c))
    }
}

fn bump_checked(p: &Parser, j: &mut JetMonomial, m: usize, e: i32) -> Result<()> {
    let next = j.exp(m) + e;
    if next < 0 && m != 1 {
        return p.err(format!("negative power of jet {m}"));
    }
    j.set_exp(m, next);
    Ok(())
}

pub(crate) fn parse_diffpoly(text: &str) -> Result<DiffPoly> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    let mut out = DiffPoly::zero();
    if p.peek() == Some(b'0') {
        p.pos += 1;
        if p.peek().is_none() {
            return Ok(out);
        }
        return p.err("trailing input after 0");
    }
    let mut sign = if p.eat(b'-') { -1 } else { 1 };
    loop {
        let (j, pm, c) = p.term()?;
        out.add_term(j, pm, if sign < 0 { -c } else { c });
        match p.peek() {
            None => break,
            Some(b'+') => {
                p.pos += 1;
                sign = 1;
            }
            Some(b'-') => {
                p.pos += 1;
                sign = -1;
            }
            Some(_) => return p.err("expected '+' or '-'"),
        }
    }
    Ok(out)
}

/// JSON mirror of the canonical term list.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JsonTerm {
    pub coeff: String,
    pub factors: Vec<(String, i64)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JsonDiffPoly {
    pub terms: Vec<JsonTerm>,
}

impl DiffPoly {
    pub fn to_json(&self) -> JsonDiffPoly {
        let terms = self
            .terms()
            .map(|(j, pm, c)| JsonTerm {
                coeff: fmt_q(c),
                factors: factor_list(j, pm)
                    .into_iter()
                    .map(|f| match f.split_once('^') {
                        Some((n, e)) => (n.to_string(), e.parse().unwrap()),
                        None => (f, 1),
                    })
                    .collect(),
            })
            .collect();
        JsonDiffPoly { terms }
    }

    pub fn from_json(j: &JsonDiffPoly) -> Result<Self> {
        if j.terms.is_empty() {
            return Ok(DiffPoly::zero());
        }
        let text: Vec<String> = j
            .terms
            .iter()
            .map(|t| {
                let mut s = format!("({})", t.coeff);
                for (n, e) in &t.factors {
                    s.push_str(&format!("*{n}^{e}"));
                }
                s
            })
            .collect();
        parse_diffpoly(&text.join(" + "))
    }

    /// LaTeX rendering with fractions over v1 powers, for tables.
    pub fn to_latex(&self) -> String {
        super::latex::diffpoly_latex(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn canonical_examples() {
        let p = DiffPoly::term(JetMonomial::jet(1, 2), ParamMono::var(Symbol::S(1), 1), q(1, 1));
        assert_eq!(p.canonical_text(), "(1)*s1*v1^2");
        assert_eq!(DiffPoly::parse("(1)*s1*v1^2").unwrap(), p);
        let mut j = JetMonomial::jet(2, 2);
        j.set_exp(1, -2);
        let f = DiffPoly::term(j, ParamMono::one(), q(11, 480));
        assert_eq!(f.canonical_text(), "(11/480)*v1^-2*v2^2");
        assert_eq!(DiffPoly::zero().canonical_text(), "0");
        assert_eq!(DiffPoly::parse("0").unwrap(), DiffPoly::zero());
    }

    #[test]
    fn whitespace_and_signs() {
        let a = DiffPoly::parse(" ( 1/2 ) * v2 - (3)*v1^ -1 ").unwrap();
        let b = DiffPoly::parse("(1/2)*v2 + (-3)*v1^-1").unwrap();
        assert_eq!(a, b);
        let c = DiffPoly::parse("(2)*sigma3*s*a0*p^2*q*c4*L*X^2*v").unwrap();
        assert_eq!(DiffPoly::parse(&c.canonical_text()).unwrap(), c);
    }

    #[test]
    fn errors_carry_positions() {
        match DiffPoly::parse("(1)*v2 + (1)*w3") {
            Err(HodgeError::Parse { pos, .. }) => assert_eq!(pos, 13),
            other => panic!("unexpected {other:?}"),
        }
        assert!(DiffPoly::parse("(1/0)*v").is_err());
        assert!(DiffPoly::parse("(1)*v2^-1").is_err());
        assert!(DiffPoly::parse("(1)*v2 (1)").is_err());
    }

    #[test]
    fn json_round_trip() {
        let f = DiffPoly::parse("(-7/1920)*v1^-3*v2*v3 + (1/1152)*v1^-2*v4 + (3)*s2*L").unwrap();
        let j = f.to_json();
        let text = serde_json::to_string(&j).unwrap();
        let back: JsonDiffPoly = serde_json::from_str(&text).unwrap();
        assert_eq!(DiffPoly::from_json(&back).unwrap(), f);
    }
}
