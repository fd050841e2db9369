//! Scalar differential operators Σ_k c_k ∂_x^k and their ε-expansions.

use std::collections::BTreeMap;
use std::fmt;

use crate::jetring::{DiffPoly, EpsExpansion};
use crate::rational::{binomial, qi, Q};

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct DiffOperator {
    terms: BTreeMap<u32, DiffPoly>,
}

impl DiffOperator {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn identity() -> Self {
        Self::monomial(0, DiffPoly::one())
    }

    /// ∂_x
    pub fn d() -> Self {
        Self::monomial(1, DiffPoly::one())
    }

    /// c ∂_x^k
    pub fn monomial(k: u32, c: DiffPoly) -> Self {
        let mut out = Self::zero();
        out.add_at(k, &c);
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, k: u32) -> DiffPoly {
        self.terms.get(&k).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, &DiffPoly)> {
        self.terms.iter().map(|(&k, c)| (k, c))
    }

    pub fn order(&self) -> Option<u32> {
        self.terms.keys().next_back().copied()
    }

    pub fn add_at(&mut self, k: u32, c: &DiffPoly) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(k).or_default();
        e.add_assign_ref(c);
        if e.is_zero() {
            self.terms.remove(&k);
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (&k, c) in &o.terms {
            out.add_at(k, c);
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        self.map(|c| c.neg())
    }

    pub fn scale(&self, k: &Q) -> Self {
        self.map(|c| c.scale(k))
    }

    pub fn map(&self, f: impl Fn(&DiffPoly) -> DiffPoly) -> Self {
        let mut out = Self::zero();
        for (&k, c) in &self.terms {
            out.add_at(k, &f(c));
        }
        out
    }

    /// (Σ a_i ∂^i) ∘ (Σ b_j ∂^j) = Σ a_i C(i,r) ∂^r(b_j) ∂^{i−r+j}
    pub fn compose(&self, o: &Self) -> Self {
        let mut out = Self::zero();
        for (&i, a) in &self.terms {
            for (&j, b) in &o.terms {
                let mut db = b.clone();
                for r in 0..=i {
                    if r > 0 {
                        db = db.dx();
                    }
                    if db.is_zero() {
                        break;
                    }
                    let c = Q::from_integer(binomial(i, r));
                    out.add_at(i - r + j, &(a * &db).scale(&c));
                }
            }
        }
        out
    }

    /// Formal adjoint: (c ∂^k)† = (−∂)^k ∘ c.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero();
        for (&k, c) in &self.terms {
            let sign = if k % 2 == 0 { qi(1) } else { qi(-1) };
            let op = Self::monomial(k, DiffPoly::one()).compose(&Self::monomial(0, c.clone()));
            out = out.add(&op.scale(&sign));
        }
        out
    }

    pub fn apply(&self, f: &DiffPoly) -> DiffPoly {
        let mut out = DiffPoly::zero_in(f.context());
        let mut df = f.clone();
        let mut at = 0;
        for (&k, c) in &self.terms {
            while at < k {
                df = df.dx();
                at += 1;
            }
            out.add_assign_ref(&(c * &df));
        }
        out
    }

    /// True when every coefficient is free of jets (a constant-coefficient operator).
    pub fn is_jet_free(&self) -> bool {
        self.terms.values().all(|c| c.terms().all(|(j, _, _)| j.is_one()))
    }
}

impl fmt::Display for DiffOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(k, c)| format!("[{c}]*D^{k}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Σ_n ε^n · (operator), truncated at `order`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpsOperator {
    order: u32,
    terms: BTreeMap<u32, DiffOperator>,
}

impl EpsOperator {
    pub fn zero(order: u32) -> Self {
        EpsOperator { order, terms: BTreeMap::new() }
    }

    pub fn leading(op: DiffOperator, order: u32) -> Self {
        let mut out = Self::zero(order);
        out.add_at(0, &op);
        out
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn get(&self, n: u32) -> DiffOperator {
        self.terms.get(&n).cloned().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &DiffOperator)> {
        self.terms.iter().map(|(&n, o)| (n, o))
    }

    pub fn add_at(&mut self, n: u32, op: &DiffOperator) {
        if n > self.order || op.is_zero() {
            return;
        }
        let e = self.terms.entry(n).or_default();
        *e = e.add(op);
        if e.is_zero() {
            self.terms.remove(&n);
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = EpsOperator { order: self.order.min(o.order), terms: BTreeMap::new() };
        for (&n, op) in self.terms.iter().chain(o.terms.iter()) {
            out.add_at(n, op);
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.map(|o| o.neg())
    }

    pub fn map(&self, f: impl Fn(&DiffOperator) -> DiffOperator) -> Self {
        let mut out = Self::zero(self.order);
        for (&n, op) in &self.terms {
            out.add_at(n, &f(op));
        }
        out
    }

    pub fn compose(&self, o: &Self) -> Self {
        let order = self.order.min(o.order);
        let mut out = Self::zero(order);
        for (&a, x) in &self.terms {
            for (&b, y) in &o.terms {
                if a + b <= order {
                    out.add_at(a + b, &x.compose(y));
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        self.map(|o| o.adjoint())
    }

    pub fn apply(&self, f: &EpsExpansion) -> EpsExpansion {
        let order = self.order.min(f.order());
        let mut out = EpsExpansion::zero(order);
        for (&a, op) in &self.terms {
            for (b, p) in f.iter() {
                if a + b <= order {
                    out.add_at(a + b, &op.apply(p));
                }
            }
        }
        out
    }

    /// The coefficient of ∂^k as an ε-expansion.
    pub fn coefficient(&self, k: u32) -> EpsExpansion {
        let mut out = EpsExpansion::zero(self.order);
        for (&n, op) in &self.terms {
            out.add_at(n, &op.coeff(k));
        }
        out
    }

    pub fn is_skew_adjoint(&self) -> bool {
        self.adjoint().add(self).terms.is_empty()
    }
}

impl fmt::Display for EpsOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(n, o)| format!("eps^{n}: {o}")).collect();
        write!(f, "{}", parts.join("\n"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(s: &str) -> DiffPoly {
        DiffPoly::parse(s).unwrap()
    }

    #[test]
    fn composition_rules() {
        // ∂ ∘ v = v ∂ + v1
        let op = DiffOperator::d().compose(&DiffOperator::monomial(0, DiffPoly::jet(0)));
        assert_eq!(op.coeff(1), DiffPoly::jet(0));
        assert_eq!(op.coeff(0), DiffPoly::jet(1));
        assert_eq!(op.apply(&DiffPoly::jet(0)), poly("(2)*v*v1"));
    }

    #[test]
    fn adjoint_reverses_products() {
        let a = DiffOperator::monomial(2, poly("(1)*v*v1")).add(&DiffOperator::monomial(1, poly("(3)*v2")));
        let b = DiffOperator::monomial(1, poly("(1)*v1^-1")).add(&DiffOperator::monomial(3, poly("(1/2)*v")));
        assert_eq!(a.compose(&b).adjoint(), b.adjoint().compose(&a.adjoint()));
        assert_eq!(a.adjoint().adjoint(), a);
        let c = DiffOperator::monomial(0, poly("(1)*v3"));
        assert_eq!(a.compose(&b).compose(&c), a.compose(&b.compose(&c)));
    }

    #[test]
    fn skew_adjoint_sandwich() {
        let l = EpsOperator::leading(DiffOperator::identity(), 4).add(&{
            let mut e = EpsOperator::zero(4);
            e.add_at(2, &DiffOperator::monomial(2, poly("(1)*v1")).add(&DiffOperator::monomial(0, poly("(1)*v3"))));
            e
        });
        let p = EpsOperator::leading(DiffOperator::d(), 4);
        let pt = l.compose(&p).compose(&l.adjoint());
        assert!(pt.is_skew_adjoint());
        assert!(!l.is_skew_adjoint());
        assert_eq!(DiffOperator::d().scale(&qi(2)).coeff(1), DiffPoly::constant(qi(2)));
    }
}
