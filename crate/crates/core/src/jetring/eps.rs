//! Truncated expansions Σ_n ε^n · DiffPoly.

use std::collections::BTreeMap;
use std::fmt;

use super::diffpoly::DiffPoly;
use super::param::{ParamPoly, Symbol};
use crate::error::{HodgeError, Result};
use crate::rational::Q;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpsExpansion {
    order: u32,
    terms: BTreeMap<u32, DiffPoly>,
}

impl EpsExpansion {
    pub fn zero(order: u32) -> Self {
        EpsExpansion { order, terms: BTreeMap::new() }
    }

    pub fn leading(p: DiffPoly, order: u32) -> Self {
        let mut e = Self::zero(order);
        e.set(0, p);
        e
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn get(&self, n: u32) -> DiffPoly {
        self.terms.get(&n).cloned().unwrap_or_default()
    }

    pub fn get_ref(&self, n: u32) -> Option<&DiffPoly> {
        self.terms.get(&n)
    }

    pub fn set(&mut self, n: u32, p: DiffPoly) {
        assert!(n <= self.order, "ε^{n} beyond truncation order {}", self.order);
        if p.is_zero() {
            self.terms.remove(&n);
        } else {
            self.terms.insert(n, p);
        }
    }

    pub fn add_at(&mut self, n: u32, p: &DiffPoly) {
        if n > self.order || p.is_zero() {
            return;
        }
        let cur = self.get(n);
        self.set(n, &cur + p);
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &DiffPoly)> {
        self.terms.iter().map(|(&n, p)| (n, p))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn truncate(&self, order: u32) -> Self {
        let order = order.min(self.order);
        EpsExpansion {
            order,
            terms: self.terms.iter().filter(|(&n, _)| n <= order).map(|(&n, p)| (n, p.clone())).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(&DiffPoly) -> DiffPoly) -> Self {
        let mut out = Self::zero(self.order);
        for (&n, p) in &self.terms {
            out.set(n, f(p));
        }
        out
    }

    pub fn add(&self, o: &Self) -> Self {
        let order = self.order.min(o.order);
        let mut out = self.truncate(order);
        for (&n, p) in &o.terms {
            out.add_at(n, p);
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        self.map(|p| p.neg())
    }

    pub fn scale(&self, k: &Q) -> Self {
        self.map(|p| p.scale(k))
    }

    pub fn mul_poly(&self, p: &DiffPoly) -> Self {
        self.map(|x| x * p)
    }

    pub fn mul(&self, o: &Self) -> Self {
        let order = self.order.min(o.order);
        let mut out = Self::zero(order);
        for (&a, pa) in &self.terms {
            for (&b, pb) in &o.terms {
                if a + b <= order {
                    out.add_at(a + b, &(pa * pb));
                }
            }
        }
        out
    }

    /// Multiply by ε^k, dropping what falls beyond the order.
    pub fn shift(&self, k: u32) -> Self {
        let mut out = Self::zero(self.order);
        for (&n, p) in &self.terms {
            if n + k <= self.order {
                out.set(n + k, p.clone());
            }
        }
        out
    }

    pub fn dx(&self) -> Self {
        self.map(|p| p.dx())
    }

    pub fn dx_n(&self, n: usize) -> Self {
        self.map(|p| p.dx_n(n))
    }

    pub fn pdiff(&self, m: usize) -> Self {
        self.map(|p| p.pdiff(m))
    }

    pub fn subs_params(&self, map: &dyn Fn(Symbol) -> Option<ParamPoly>) -> Self {
        self.map(|p| p.subs_params(map))
    }

    pub fn max_jet(&self) -> usize {
        self.terms.values().map(|p| p.max_jet()).max().unwrap_or(0)
    }

    pub fn odd_orders_vanish(&self) -> bool {
        self.terms.keys().all(|n| n % 2 == 0)
    }

    /// Error if some odd power of ε carries a nonzero term.
    pub fn assert_even(&self, what: &str) -> Result<()> {
        match self.terms.keys().find(|n| *n % 2 == 1) {
            Some(n) => Err(HodgeError::Verification(format!("{what}: nonzero ε^{n} term"))),
            None => Ok(()),
        }
    }
}

impl fmt::Display for EpsExpansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(n, p)| format!("eps^{n}: {p}")).collect();
        write!(f, "{}", parts.join("\n"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncated_product() {
        let mut a = EpsExpansion::leading(DiffPoly::jet(0), 4);
        a.set(2, DiffPoly::jet(2));
        let sq = a.mul(&a);
        assert_eq!(sq.get(0), DiffPoly::jet(0).pow(2));
        assert_eq!(sq.get(2), (&DiffPoly::jet(0) * &DiffPoly::jet(2)).scale_int(2));
        assert_eq!(sq.get(4), DiffPoly::jet(2).pow(2));
        let cube = sq.mul(&a);
        assert!(cube.get_ref(6).is_none());
        assert!(cube.odd_orders_vanish());
        let odd = a.shift(1);
        assert!(odd.assert_even("shifted").is_err());
    }
}
