//! Parameter ring: sparse polynomials over named symbols with rational coefficients.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use smallvec::SmallVec;

use crate::rational::{fmt_q, Q};

/// A parameter symbol. Text forms: `s<k>`, `s`, `a<k>`, `p`, `q`, `c<k>`, `sigma<k>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    S(u32),
    SBare,
    A(u32),
    P,
    Q,
    C(u32),
    Sigma(u32),
}

impl Symbol {
    /// Contribution to the auxiliary grading: `s_k` counts `2k-1`, everything else 0.
    pub fn degbar_weight(self) -> i64 {
        match self {
            Symbol::S(k) => 2 * k as i64 - 1,
            _ => 0,
        }
    }

    pub fn parse_ident(name: &str, index: Option<u32>) -> Option<Symbol> {
        match (name, index) {
            ("s", Some(k)) => Some(Symbol::S(k)),
            ("s", None) => Some(Symbol::SBare),
            ("a", Some(k)) => Some(Symbol::A(k)),
            ("p", None) => Some(Symbol::P),
            ("q", None) => Some(Symbol::Q),
            ("c", Some(k)) => Some(Symbol::C(k)),
            ("sigma", Some(k)) => Some(Symbol::Sigma(k)),
            _ => None,
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::S(k) => write!(f, "s{k}"),
            Symbol::SBare => write!(f, "s"),
            Symbol::A(k) => write!(f, "a{k}"),
            Symbol::P => write!(f, "p"),
            Symbol::Q => write!(f, "q"),
            Symbol::C(k) => write!(f, "c{k}"),
            Symbol::Sigma(k) => write!(f, "sigma{k}"),
        }
    }
}

/// Monomial in the parameter symbols, stored sorted with positive exponents.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ParamMono(pub(crate) SmallVec<[(Symbol, u32); 3]>);

impl ParamMono {
    pub fn one() -> Self {
        ParamMono(SmallVec::new())
    }

    pub fn var(s: Symbol, e: u32) -> Self {
        if e == 0 {
            return Self::one();
        }
        let mut v = SmallVec::new();
        v.push((s, e));
        ParamMono(v)
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Symbol, u32)>) -> Self {
        let mut out = Self::one();
        for (s, e) in pairs {
            out = out.mul(&Self::var(s, e));
        }
        out
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> &[(Symbol, u32)] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn exponent(&self, s: Symbol) -> u32 {
        self.0.iter().find(|&&(t, _)| t == s).map_or(0, |&(_, e)| e)
    }

    pub fn degbar(&self) -> i64 {
        self.0.iter().map(|&(s, e)| s.degbar_weight() * e as i64).sum()
    }

    pub fn mul(&self, other: &Self) -> Self {
        if other.0.is_empty() {
            return self.clone();
        }
        if self.0.is_empty() {
            return other.clone();
        }
        let mut out = SmallVec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            let (a, ea) = self.0[i];
            let (b, eb) = other.0[j];
            match a.cmp(&b) {
                Ordering::Less => {
                    out.push((a, ea));
                    i += 1;
                }
                Ordering::Greater => {
                    out.push((b, eb));
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a, ea + eb));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        ParamMono(out)
    }

    /// Remove the symbol entirely, returning its exponent and the cofactor.
    pub fn split_off(&self, s: Symbol) -> (u32, ParamMono) {
        let e = self.exponent(s);
        let rest = ParamMono(self.0.iter().copied().filter(|&(t, _)| t != s).collect());
        (e, rest)
    }
}

impl Ord for ParamMono {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for ParamMono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ParamMono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for &(s, e) in &self.0 {
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "{s}")?;
            } else {
                write!(f, "{s}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Sparse polynomial over the parameter symbols. The zero polynomial has no terms.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ParamPoly {
    terms: BTreeMap<ParamMono, Q>,
}

impl ParamPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Q) -> Self {
        let mut p = Self::zero();
        p.add_term(ParamMono::one(), c);
        p
    }

    pub fn one() -> Self {
        Self::constant(Q::one())
    }

    pub fn symbol(s: Symbol) -> Self {
        Self::monomial(ParamMono::var(s, 1), Q::one())
    }

    pub fn monomial(m: ParamMono, c: Q) -> Self {
        let mut p = Self::zero();
        p.add_term(m, c);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ParamMono, &Q)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// The value if this is a constant polynomial.
    pub fn as_constant(&self) -> Option<Q> {
        match self.terms.len() {
            0 => Some(Q::zero()),
            1 => self.terms.get(&ParamMono::one()).cloned(),
            _ => None,
        }
    }

    pub fn add_term(&mut self, m: ParamMono, c: Q) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        ParamPoly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }

    pub fn scale(&self, k: &Q) -> Self {
        if k.is_zero() {
            return Self::zero();
        }
        ParamPoly { terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn degbar(&self) -> Option<i64> {
        self.terms.keys().map(|m| m.degbar()).max()
    }

    pub fn max_degree_in(&self, s: Symbol) -> u32 {
        self.terms.keys().map(|m| m.exponent(s)).max().unwrap_or(0)
    }

    /// Coefficient of `s^j`, as a polynomial in the remaining symbols.
    pub fn coeff_of(&self, s: Symbol, j: u32) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let (e, rest) = m.split_off(s);
            if e == j {
                out.add_term(rest, c.clone());
            }
        }
        out
    }

    /// Replace symbols by polynomials; unmapped symbols are kept.
    pub fn substitute(&self, map: &dyn Fn(Symbol) -> Option<ParamPoly>) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let mut acc = ParamPoly::constant(c.clone());
            for &(s, e) in m.factors() {
                let factor = match map(s) {
                    Some(p) => p.pow(e),
                    None => ParamPoly::monomial(ParamMono::var(s, e), Q::one()),
                };
                acc = acc.mul(&factor);
            }
            out = out.add(&acc);
        }
        out
    }

    /// Evaluate with every symbol assigned a rational; `None` if a symbol is unassigned.
    pub fn eval(&self, values: &dyn Fn(Symbol) -> Option<Q>) -> Option<Q> {
        let mut total = Q::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for &(s, e) in m.factors() {
                let x = values(s)?;
                for _ in 0..e {
                    t *= &x;
                }
            }
            total += t;
        }
        Some(total)
    }

    pub fn symbols(&self) -> Vec<Symbol> {
        let mut out: Vec<Symbol> = self.terms.keys().flat_map(|m| m.factors().iter().map(|&(s, _)| s)).collect();
        out.sort();
        out.dedup();
        out
    }
}

impl fmt::Display for ParamPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if m.is_one() {
                write!(f, "({})", fmt_q(c))?;
            } else {
                write!(f, "({})*{m}", fmt_q(c))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    #[test]
    fn arithmetic_is_canonical() {
        let s1 = ParamPoly::symbol(Symbol::S(1));
        let s2 = ParamPoly::symbol(Symbol::S(2));
        let a = s1.add(&s2);
        let b = s1.sub(&s2);
        let prod = a.mul(&b);
        assert_eq!(prod, s1.mul(&s1).sub(&s2.mul(&s2)));
        assert!(a.sub(&a).is_zero());
        assert_eq!(s1.pow(3).degbar(), Some(3));
        assert_eq!(s2.degbar(), Some(3));
    }

    #[test]
    fn coefficient_and_substitution() {
        let s1 = ParamPoly::symbol(Symbol::S(1));
        let s2 = ParamPoly::symbol(Symbol::S(2));
        let p = s1.pow(2).mul(&s2).scale(&q(3, 5)).add(&s2);
        assert_eq!(p.coeff_of(Symbol::S(1), 2), s2.scale(&q(3, 5)));
        assert_eq!(p.coeff_of(Symbol::S(1), 0), s2);
        let at = p.substitute(&|s| match s {
            Symbol::S(1) => Some(ParamPoly::constant(qi(2))),
            _ => None,
        });
        assert_eq!(at, s2.scale(&q(17, 5)));
        let v = p.eval(&|s| match s {
            Symbol::S(1) => Some(qi(1)),
            Symbol::S(2) => Some(qi(5)),
            _ => None,
        });
        assert_eq!(v, Some(qi(8)));
    }

    #[test]
    fn display() {
        let p = ParamPoly::symbol(Symbol::Sigma(3)).mul(&ParamPoly::symbol(Symbol::S(1))).scale(&q(-1, 2));
        assert_eq!(p.to_string(), "(-1/2)*s1*sigma3");
        assert_eq!(ParamPoly::zero().to_string(), "0");
    }
}
