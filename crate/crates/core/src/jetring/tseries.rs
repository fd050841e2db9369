//! Multivariate power series in t_0..t_P truncated at a total degree, and evaluation of
//! differential polynomials on jet series.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::{One, Zero};
use smallvec::SmallVec;

use super::diffpoly::DiffPoly;
use super::param::Symbol;
use crate::error::{HodgeError, Result};
use crate::rational::{factorial, fmt_q, inv_factorial, qi, Q};

pub type TExp = SmallVec<[u8; 16]>;

fn total(e: &TExp) -> u32 {
    e.iter().map(|&x| x as u32).sum()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedTSeries {
    nvars: usize,
    max_deg: u32,
    terms: BTreeMap<TExp, Q>,
}

impl TruncatedTSeries {
    pub fn zero(nvars: usize, max_deg: u32) -> Self {
        TruncatedTSeries { nvars, max_deg, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, max_deg: u32, c: Q) -> Self {
        let mut s = Self::zero(nvars, max_deg);
        s.add_term(SmallVec::from_elem(0, nvars), c);
        s
    }

    pub fn one(nvars: usize, max_deg: u32) -> Self {
        Self::constant(nvars, max_deg, Q::one())
    }

    /// The series t_p.
    pub fn var(nvars: usize, max_deg: u32, p: usize) -> Self {
        let mut e: TExp = SmallVec::from_elem(0, nvars);
        e[p] = 1;
        let mut s = Self::zero(nvars, max_deg);
        s.add_term(e, Q::one());
        s
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn max_deg(&self) -> u32 {
        self.max_deg
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&TExp, &Q)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, e: TExp, c: Q) {
        assert_eq!(e.len(), self.nvars, "exponent vector length");
        if c.is_zero() || total(&e) > self.max_deg {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn coeff(&self, e: &[u8]) -> Q {
        let key: TExp = SmallVec::from_slice(e);
        self.terms.get(&key).cloned().unwrap_or_else(Q::zero)
    }

    pub fn constant_term(&self) -> Q {
        self.coeff(&vec![0u8; self.nvars])
    }

    fn check(&self, o: &Self) {
        assert_eq!(self.nvars, o.nvars, "series in different variable sets");
    }

    pub fn add(&self, o: &Self) -> Self {
        self.check(o);
        let mut out = self.clone();
        out.max_deg = self.max_deg.min(o.max_deg);
        out.terms.retain(|e, _| total(e) <= out.max_deg);
        for (e, c) in &o.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        TruncatedTSeries {
            nvars: self.nvars,
            max_deg: self.max_deg,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, k: &Q) -> Self {
        if k.is_zero() {
            return Self::zero(self.nvars, self.max_deg);
        }
        TruncatedTSeries {
            nvars: self.nvars,
            max_deg: self.max_deg,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c * k)).collect(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.check(o);
        let d = self.max_deg.min(o.max_deg);
        let mut a: Vec<(u32, &TExp, &Q)> = self.terms.iter().map(|(e, c)| (total(e), e, c)).collect();
        let mut b: Vec<(u32, &TExp, &Q)> = o.terms.iter().map(|(e, c)| (total(e), e, c)).collect();
        a.sort_by_key(|t| t.0);
        b.sort_by_key(|t| t.0);
        let mut acc: HashMap<TExp, Q> = HashMap::new();
        for &(da, ea, ca) in &a {
            if da > d {
                break;
            }
            for &(db, eb, cb) in &b {
                if da + db > d {
                    break;
                }
                let key: TExp = ea.iter().zip(eb.iter()).map(|(x, y)| x + y).collect();
                let c = ca * cb;
                match acc.get_mut(&key) {
                    Some(x) => *x += c,
                    None => {
                        acc.insert(key, c);
                    }
                }
            }
        }
        TruncatedTSeries { nvars: self.nvars, max_deg: d, terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect() }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(self.nvars, self.max_deg);
        let mut base = self.clone();
        let mut k = e;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Multiplicative inverse; requires a nonzero constant term.
    pub fn inverse(&self) -> Result<Self> {
        let c0 = self.constant_term();
        if c0.is_zero() {
            return Err(HodgeError::NonInvertible("constant term is zero".into()));
        }
        let inv0 = Q::one() / &c0;
        // 1/(c0 (1 + y)) = inv0 Σ (-y)^k with y = (self - c0)/c0
        let y = self.sub(&Self::constant(self.nvars, self.max_deg, c0)).scale(&inv0);
        let neg_y = y.neg();
        let mut out = Self::one(self.nvars, self.max_deg);
        let mut power = Self::one(self.nvars, self.max_deg);
        for _ in 0..self.max_deg {
            power = power.mul(&neg_y);
            if power.is_zero() {
                break;
            }
            out = out.add(&power);
        }
        Ok(out.scale(&inv0))
    }

    pub fn powi(&self, e: i32) -> Result<Self> {
        if e >= 0 {
            Ok(self.pow(e as u32))
        } else {
            Ok(self.inverse()?.pow((-e) as u32))
        }
    }

    /// Logarithm; requires constant term 1.
    pub fn log(&self) -> Result<Self> {
        if !self.constant_term().is_one() {
            return Err(HodgeError::NonInvertible("log requires constant term 1".into()));
        }
        let y = self.sub(&Self::one(self.nvars, self.max_deg));
        let mut out = Self::zero(self.nvars, self.max_deg);
        let mut power = Self::one(self.nvars, self.max_deg);
        for k in 1..=self.max_deg as i64 {
            power = power.mul(&y);
            if power.is_zero() {
                break;
            }
            let sign = if k % 2 == 1 { 1 } else { -1 };
            out = out.add(&power.scale(&Q::new(sign.into(), k.into())));
        }
        Ok(out)
    }

    /// Exponential; requires zero constant term.
    pub fn exp(&self) -> Result<Self> {
        if !self.constant_term().is_zero() {
            return Err(HodgeError::NonInvertible("exp requires zero constant term".into()));
        }
        let mut out = Self::one(self.nvars, self.max_deg);
        let mut power = Self::one(self.nvars, self.max_deg);
        for k in 1..=self.max_deg {
            power = power.mul(self);
            if power.is_zero() {
                break;
            }
            out = out.add(&power.scale(&inv_factorial(k)));
        }
        Ok(out)
    }

    /// ∂/∂t_p; the result is exact only through degree max_deg - 1.
    pub fn derivative(&self, p: usize) -> Self {
        let mut out = Self::zero(self.nvars, self.max_deg.saturating_sub(1));
        for (e, c) in &self.terms {
            if e[p] > 0 {
                let mut f = e.clone();
                f[p] -= 1;
                out.add_term(f, c * qi(e[p] as i64));
            }
        }
        out
    }

    /// Keep only terms of total degree ≤ d.
    pub fn truncate(&self, d: u32) -> Self {
        let d = d.min(self.max_deg);
        TruncatedTSeries {
            nvars: self.nvars,
            max_deg: d,
            terms: self.terms.iter().filter(|(e, _)| total(e) <= d).map(|(e, c)| (e.clone(), c.clone())).collect(),
        }
    }

    /// Substitute t_p = 0 for all p in `vars`.
    pub fn restrict_zero(&self, vars: &[usize]) -> Self {
        TruncatedTSeries {
            nvars: self.nvars,
            max_deg: self.max_deg,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| vars.iter().all(|&p| e[p] == 0))
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
        }
    }
}

impl fmt::Display for TruncatedTSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(e, c)| {
                let mut s = format!("({})", fmt_q(c));
                for (p, &k) in e.iter().enumerate() {
                    match k {
                        0 => {}
                        1 => s.push_str(&format!("*t{p}")),
                        _ => s.push_str(&format!("*t{p}^{k}")),
                    }
                }
                s
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Multisets of size k drawn from {0..=top} with element sum `sum`, as count vectors.
fn multisets(nvars: usize, k: u32, sum: u32, top: usize) -> Vec<TExp> {
    fn rec(p: usize, k: u32, sum: u32, cur: &mut TExp, out: &mut Vec<TExp>) {
        if k == 0 {
            if sum == 0 {
                out.push(cur.clone());
            }
            return;
        }
        if p == 0 {
            cur[0] = k as u8;
            if sum == 0 {
                out.push(cur.clone());
            }
            cur[0] = 0;
            return;
        }
        let max_here = (sum / p as u32).min(k);
        for e in 0..=max_here {
            cur[p] = e as u8;
            rec(p - 1, k - e, sum - e * p as u32, cur, out);
        }
        cur[p] = 0;
    }
    let mut out = Vec::new();
    let mut cur: TExp = SmallVec::from_elem(0, nvars);
    rec(top, k, sum, &mut cur, &mut out);
    out
}

/// Jets v, v_x, …, v^{(max_m)} of the topological solution v(t) = Σ_k (1/k) Σ_{Σp=k-1} Π t_p/p!,
/// as series in t_0..t_{nvars-1} truncated at degree `max_deg`.
pub fn topological_jets(nvars: usize, max_deg: u32, max_m: usize) -> Vec<TruncatedTSeries> {
    let top = nvars - 1;
    let fact: Vec<Q> = (0..=(max_deg as usize + max_m + 2)).map(|n| Q::from_integer(factorial(n as u32))).collect();
    let mut out = Vec::with_capacity(max_m + 1);
    for m in 0..=max_m {
        let mut s = TruncatedTSeries::zero(nvars, max_deg);
        let k_start = if m == 0 { 1 } else { 0 };
        for k in k_start..=max_deg {
            let weight = k as i64 + m as i64 - 1;
            if weight < 0 {
                continue;
            }
            let factor = if m == 0 {
                Q::new(1.into(), (k as i64).into())
            } else {
                (1..m as i64).fold(Q::one(), |acc, i| acc * qi(k as i64 + i))
            };
            for e in multisets(nvars, k, weight as u32, top) {
                let mut c = fact[k as usize].clone() * &factor;
                for (p, &ep) in e.iter().enumerate() {
                    if ep > 0 {
                        c /= &fact[ep as usize];
                        for _ in 0..ep {
                            c /= &fact[p];
                        }
                    }
                }
                s.add_term(e, c);
            }
        }
        out.push(s);
    }
    out
}

/// Substitute jet series into a differential polynomial. `jets[m]` is the series for v^{(m)};
/// parameters are replaced through `params`; L is evaluated as log of `jets[1]`.
pub fn eval_on_tseries(
    a: &DiffPoly,
    jets: &[TruncatedTSeries],
    params: &dyn Fn(Symbol) -> Option<Q>,
) -> Result<TruncatedTSeries> {
    let first = jets.first().ok_or_else(|| HodgeError::MissingData("no jet series".into()))?;
    let (nvars, d) = (first.nvars, first.max_deg);
    let need = a.max_jet();
    if jets.len() <= need {
        return Err(HodgeError::MissingData(format!("jet series up to order {need} required")));
    }
    let mut powers: HashMap<(usize, i32), TruncatedTSeries> = HashMap::new();
    let mut get_pow = |m: usize, e: i32| -> Result<TruncatedTSeries> {
        if let Some(s) = powers.get(&(m, e)) {
            return Ok(s.clone());
        }
        let s = if e < 0 {
            if jets[m].constant_term().is_zero() {
                return Err(HodgeError::NonInvertible(format!("jet {m} series has zero constant term")));
            }
            jets[m].powi(e)?
        } else {
            jets[m].pow(e as u32)
        };
        powers.insert((m, e), s.clone());
        Ok(s)
    };
    let log_v1 = if a.terms().any(|(j, _, _)| j.exp_l() > 0) { Some(jets[1].log()?) } else { None };
    let exp_x = if a.terms().any(|(j, _, _)| j.exp_x() > 0) {
        let mu = a
            .context()
            .exp_rate
            .as_ref()
            .ok_or_else(|| HodgeError::ContextMismatch("X without exponential context".into()))?;
        let mu = mu.eval(params).ok_or_else(|| HodgeError::MissingData("value for the exponential rate".into()))?;
        Some(jets[0].scale(&mu).exp()?)
    } else {
        None
    };
    let mut out = TruncatedTSeries::zero(nvars, d);
    for (j, pm, c) in a.terms() {
        let coeff = crate::jetring::ParamPoly::monomial(pm.clone(), c.clone())
            .eval(params)
            .ok_or_else(|| HodgeError::MissingData(format!("parameter value for {pm}")))?;
        if coeff.is_zero() {
            continue;
        }
        let mut t = TruncatedTSeries::constant(nvars, d, coeff);
        if j.exp_v() > 0 {
            t = t.mul(&get_pow(0, j.exp_v() as i32)?);
        }
        if j.exp_v1() != 0 {
            t = t.mul(&get_pow(1, j.exp_v1())?);
        }
        for (m, e) in j.exp_higher() {
            t = t.mul(&get_pow(m, e as i32)?);
        }
        if j.exp_l() > 0 {
            t = t.mul(&log_v1.as_ref().unwrap().pow(j.exp_l()));
        }
        if j.exp_x() > 0 {
            t = t.mul(&exp_x.as_ref().unwrap().pow(j.exp_x()));
        }
        out = out.add(&t);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn no_params(_: Symbol) -> Option<Q> {
        None
    }

    #[test]
    fn geometric_inverse() {
        let s = TruncatedTSeries::one(2, 5).add(&TruncatedTSeries::var(2, 5, 1));
        let inv = s.inverse().unwrap();
        for k in 0..=5u8 {
            let sign = if k % 2 == 0 { 1 } else { -1 };
            assert_eq!(inv.coeff(&[0, k]), qi(sign));
        }
        assert_eq!(inv.mul(&s), TruncatedTSeries::one(2, 5));
    }

    #[test]
    fn log_exp_inverse_pair() {
        let x = TruncatedTSeries::var(3, 6, 0).add(&TruncatedTSeries::var(3, 6, 2).scale(&q(1, 3)));
        let e = x.exp().unwrap();
        assert_eq!(e.log().unwrap(), x);
    }

    #[test]
    fn topological_solution_leading_terms() {
        let jets = topological_jets(4, 6, 3);
        let v = &jets[0];
        assert!(v.constant_term().is_zero());
        assert_eq!(v.coeff(&[1, 0, 0, 0]), qi(1));
        assert_eq!(v.coeff(&[1, 1, 0, 0]), qi(1));
        assert_eq!(jets[1].constant_term(), qi(1));
        // v_m agrees with differentiating v in t_0
        let long = topological_jets(4, 9, 0);
        let mut d = long[0].clone();
        for m in 1..=3 {
            d = d.derivative(0);
            assert_eq!(d.truncate(6), jets[m], "jet {m}");
        }
    }

    #[test]
    fn evaluation_examples() {
        let jets = topological_jets(3, 5, 2);
        let v = eval_on_tseries(&DiffPoly::jet(0), &jets, &no_params).unwrap();
        assert_eq!(v, jets[0]);
        let one = eval_on_tseries(&DiffPoly::jet(1), &jets, &no_params).unwrap();
        assert_eq!(one.constant_term(), qi(1));
        let custom = vec![TruncatedTSeries::zero(2, 4), TruncatedTSeries::one(2, 4).add(&TruncatedTSeries::var(2, 4, 1))];
        let inv = eval_on_tseries(&DiffPoly::jet_pow(1, -1), &custom, &no_params).unwrap();
        assert_eq!(inv.coeff(&[0, 3]), qi(-1));
        assert_eq!(inv.coeff(&[0, 4]), qi(1));
    }

    #[test]
    fn non_invertible_rejected() {
        let jets = vec![TruncatedTSeries::zero(2, 3), TruncatedTSeries::var(2, 3, 0)];
        assert!(eval_on_tseries(&DiffPoly::jet_pow(1, -1), &jets, &no_params).is_err());
    }
}
