//! Monomials in the jet variables v, v1^{±1}, v_m (m ≥ 2), L = log v1 and X = e^{μv}.

use std::cmp::Ordering;
use std::fmt;

use smallvec::SmallVec;

/// A jet variable: `Jet(0)` is v, `Jet(m)` is the m-th x-derivative.
pub type JetIndex = usize;

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct JetMonomial {
    pub(crate) v: u32,
    pub(crate) v1: i32,
    /// `hi[i]` is the exponent of v_{i+2}; no trailing zeros.
    pub(crate) hi: SmallVec<[u16; 6]>,
    pub(crate) l: u32,
    pub(crate) x: u32,
}

impl JetMonomial {
    pub fn one() -> Self {
        Self::default()
    }

    /// The monomial `v_m^e` (with m = 0 meaning v). Negative exponents are only valid for m = 1.
    pub fn jet(m: JetIndex, e: i32) -> Self {
        let mut out = Self::one();
        out.set_exp(m, e);
        out
    }

    pub fn log_v1(e: u32) -> Self {
        JetMonomial { l: e, ..Self::one() }
    }

    pub fn exp_gen(e: u32) -> Self {
        JetMonomial { x: e, ..Self::one() }
    }

    pub fn exp_v(&self) -> u32 {
        self.v
    }

    pub fn exp_v1(&self) -> i32 {
        self.v1
    }

    pub fn exp_l(&self) -> u32 {
        self.l
    }

    pub fn exp_x(&self) -> u32 {
        self.x
    }

    /// Exponents of v_m for m ≥ 2 as (m, e) pairs with e > 0.
    pub fn exp_higher(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.hi.iter().enumerate().filter(|(_, &e)| e > 0).map(|(i, &e)| (i + 2, e as u32))
    }

    /// Exponent of jet variable m (m = 0 is v, m = 1 is v1).
    pub fn exp(&self, m: JetIndex) -> i32 {
        match m {
            0 => self.v as i32,
            1 => self.v1,
            _ => self.hi.get(m - 2).copied().unwrap_or(0) as i32,
        }
    }

    pub fn set_exp(&mut self, m: JetIndex, e: i32) {
        match m {
            0 => {
                assert!(e >= 0, "negative power of v");
                self.v = e as u32;
            }
            1 => self.v1 = e,
            _ => {
                assert!(e >= 0, "negative power of v_{m}");
                let i = m - 2;
                if self.hi.len() <= i {
                    if e == 0 {
                        return;
                    }
                    self.hi.resize(i + 1, 0);
                }
                self.hi[i] = e as u16;
                while self.hi.last() == Some(&0) {
                    self.hi.pop();
                }
            }
        }
    }

    /// Add `e` to the exponent of jet m.
    pub fn bump(&mut self, m: JetIndex, e: i32) {
        let cur = self.exp(m);
        self.set_exp(m, cur + e);
    }

    /// Highest jet order present (1 for v1 powers and L, 0 for pure v or X).
    pub fn max_jet(&self) -> usize {
        if !self.hi.is_empty() {
            self.hi.len() + 1
        } else if self.v1 != 0 || self.l > 0 {
            1
        } else {
            0
        }
    }

    /// Standard gradation: v1 counts 1, v_m counts m.
    pub fn deg(&self) -> i64 {
        self.v1 as i64 + self.exp_higher().map(|(m, e)| (m * e as usize) as i64).sum::<i64>()
    }

    /// Auxiliary gradation: v_m counts m - 1 for m ≥ 2.
    pub fn degbar(&self) -> i64 {
        self.exp_higher().map(|(m, e)| ((m - 1) * e as usize) as i64).sum()
    }

    pub fn is_one(&self) -> bool {
        self.v == 0 && self.v1 == 0 && self.hi.is_empty() && self.l == 0 && self.x == 0
    }

    /// True when no x-derivative appears (only v and X allowed).
    pub fn is_jet_free(&self) -> bool {
        self.v1 == 0 && self.hi.is_empty() && self.l == 0
    }

    pub fn mul(&self, o: &Self) -> Self {
        let n = self.hi.len().max(o.hi.len());
        let mut hi: SmallVec<[u16; 6]> = SmallVec::with_capacity(n);
        for i in 0..n {
            let a = self.hi.get(i).copied().unwrap_or(0);
            let b = o.hi.get(i).copied().unwrap_or(0);
            hi.push(a + b);
        }
        JetMonomial { v: self.v + o.v, v1: self.v1 + o.v1, hi, l: self.l + o.l, x: self.x + o.x }
    }

    fn order_key(&self) -> (i64, &[u16], i32, u32, u32, u32) {
        (self.deg(), &self.hi, self.v1, self.v, self.l, self.x)
    }
}

impl Ord for JetMonomial {
    fn cmp(&self, other: &Self) -> Ordering {
        let (da, ha, a1, av, al, ax) = self.order_key();
        let (db, hb, b1, bv, bl, bx) = other.order_key();
        da.cmp(&db)
            .then_with(|| ha.len().cmp(&hb.len()))
            .then_with(|| ha.iter().rev().cmp(hb.iter().rev()))
            .then_with(|| a1.cmp(&b1))
            .then_with(|| av.cmp(&bv))
            .then_with(|| al.cmp(&bl))
            .then_with(|| ax.cmp(&bx))
    }
}

impl PartialOrd for JetMonomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for JetMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        let mut push = |name: String, e: i64| {
            if e == 1 {
                parts.push(name);
            } else if e != 0 {
                parts.push(format!("{name}^{e}"));
            }
        };
        push("v".into(), self.v as i64);
        push("v1".into(), self.v1 as i64);
        for (m, e) in self.exp_higher() {
            push(format!("v{m}"), e as i64);
        }
        push("L".into(), self.l as i64);
        push("X".into(), self.x as i64);
        write!(f, "{}", parts.join("*"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradings() {
        let mut m = JetMonomial::jet(3, 1);
        m.bump(1, 5);
        m.bump(2, 2);
        assert_eq!(m.deg(), 5 + 4 + 3);
        assert_eq!(m.degbar(), 2 + 2);
        assert_eq!(m.to_string(), "v1^5*v2^2*v3");
        let vv = JetMonomial::jet(0, 1).mul(&JetMonomial::jet(1, 5));
        assert_eq!(vv.degbar(), 0);
    }

    #[test]
    fn trailing_zeros_trimmed() {
        let mut m = JetMonomial::jet(5, 2);
        m.set_exp(5, 0);
        assert!(m.is_one());
        assert_eq!(m, JetMonomial::one());
    }

    #[test]
    fn ordering_is_graded() {
        let a = JetMonomial::jet(1, 2);
        let b = JetMonomial::jet(3, 1);
        let c = JetMonomial::jet(2, 1);
        assert!(a < c);
        assert!(c < b);
        assert!(a < b);
    }
}
