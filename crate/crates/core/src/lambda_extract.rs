//! λ-class generating functions H_g(λ_{i_1}…λ_{i_k}; t) and Hodge integrals, read off from
//! the s-dependence of H_g through s_k = −B_{2k}/(2k)! · σ_{2k−1} and exp(Σ σ_{2k−1} ch_{2k−1}).

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{HodgeError, Result};
use crate::free_energy::bernoulli;
use crate::jetring::{eval_on_tseries, topological_jets, DiffPoly, ParamMono, Symbol};
use crate::linalg::solve;
use crate::rational::{abs, factorial, fmt_q, inv_factorial, pow_q, Q};

/// A polynomial in λ_1, …, λ_g. Monomials are sorted index lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LambdaPoly {
    genus: u32,
    terms: BTreeMap<Vec<u32>, Q>,
}

/// Which repeated index a Mumford rewrite attacks first.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReduceOrder {
    Smallest,
    Largest,
}

impl LambdaPoly {
    pub fn zero(genus: u32) -> Self {
        LambdaPoly { genus, terms: BTreeMap::new() }
    }

    pub fn one(genus: u32) -> Self {
        Self::monomial(genus, &[], Q::one())
    }

    /// c · Π λ_{i}; indices above g give zero, λ_0 = 1.
    pub fn monomial(genus: u32, indices: &[u32], c: Q) -> Self {
        let mut out = Self::zero(genus);
        let mut idx: Vec<u32> = indices.iter().copied().filter(|&i| i != 0).collect();
        if idx.iter().any(|&i| i > genus) {
            return out;
        }
        idx.sort_unstable();
        out.add_term(idx, c);
        out
    }

    pub fn genus(&self) -> u32 {
        self.genus
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Q)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &[u32]) -> Q {
        self.terms.get(m).cloned().unwrap_or_else(Q::zero)
    }

    fn add_term(&mut self, m: Vec<u32>, c: Q) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(m.clone()).or_insert_with(Q::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, k: &Q) -> Self {
        let mut out = Self::zero(self.genus);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c * k);
        }
        out
    }

    /// Product without reduction.
    pub fn mul(&self, o: &Self) -> Self {
        let mut out = Self::zero(self.genus);
        for (a, ca) in &self.terms {
            for (b, cb) in &o.terms {
                let mut m = a.clone();
                m.extend_from_slice(b);
                m.sort_unstable();
                out.add_term(m, ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut out = Self::one(self.genus);
        for _ in 0..e {
            out = out.mul(self).mumford_reduce();
        }
        out
    }

    /// Sum of indices of each monomial is preserved by reduction; this is its maximum.
    pub fn max_weight(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.iter().sum()).max()
    }

    /// Drop monomials of weight above `w`.
    pub fn truncate_weight(&self, w: u32) -> Self {
        LambdaPoly {
            genus: self.genus,
            terms: self.terms.iter().filter(|(m, _)| m.iter().sum::<u32>() <= w).map(|(m, c)| (m.clone(), c.clone())).collect(),
        }
    }

    pub fn mumford_reduce(&self) -> Self {
        self.mumford_reduce_with(ReduceOrder::Smallest)
    }

    /// Rewrite λ_k² ↦ −2 Σ_{i<k} (−1)^{k−i} λ_i λ_{2k−i} until all indices are distinct.
    pub fn mumford_reduce_with(&self, order: ReduceOrder) -> Self {
        let g = self.genus;
        let mut out = Self::zero(g);
        let mut work: Vec<(Vec<u32>, Q)> = self.terms.iter().map(|(m, c)| (m.clone(), c.clone())).collect();
        while let Some((m, c)) = work.pop() {
            let repeated: Vec<u32> = m.windows(2).filter(|w| w[0] == w[1]).map(|w| w[0]).collect();
            let k = match order {
                ReduceOrder::Smallest => repeated.first(),
                ReduceOrder::Largest => repeated.last(),
            };
            let Some(&k) = k else {
                out.add_term(m, c);
                continue;
            };
            let pos = m.iter().position(|&i| i == k).unwrap();
            let mut rest = m.clone();
            rest.drain(pos..pos + 2);
            for i in 0..k {
                let j = 2 * k - i;
                if j > g {
                    continue;
                }
                let sign = if (k - i) % 2 == 0 { -2 } else { 2 };
                let mut nm = rest.clone();
                if i > 0 {
                    nm.push(i);
                }
                nm.push(j);
                nm.sort_unstable();
                work.push((nm, &c * Q::from_integer(sign.into())));
            }
        }
        out
    }
}

impl fmt::Display for LambdaPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| {
                let mut s = format!("({})", fmt_q(c));
                for i in m {
                    s.push_str(&format!("*l{i}"));
                }
                s
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Power sum p_m of the Chern roots in the λ_i (Newton's identities), unreduced.
pub fn power_sum_in_lambda(g: u32, m: u32) -> LambdaPoly {
    let e = |i: u32| LambdaPoly::monomial(g, &[i], Q::one());
    let mut p: Vec<LambdaPoly> = vec![LambdaPoly::zero(g)];
    for n in 1..=m {
        let mut acc = e(n).scale(&Q::from_integer(BigInt::from(n as i64 * if n % 2 == 1 { 1 } else { -1 })));
        for i in 1..n {
            let sign = if i % 2 == 1 { Q::one() } else { -Q::one() };
            acc = acc.add(&e(i).mul(&p[(n - i) as usize]).scale(&sign));
        }
        p.push(acc);
    }
    p.swap_remove(m as usize)
}

/// ch_m = p_m/m! in reduced form; m must be odd.
pub fn ch_in_lambda(g: u32, m: u32) -> Result<LambdaPoly> {
    if m % 2 == 0 {
        return Err(HodgeError::InvalidArgument(format!("ch_{m}: only odd Chern characters enter")));
    }
    Ok(power_sum_in_lambda(g, m).scale(&inv_factorial(m)).mumford_reduce())
}

/// −B_{2k}/(2k)!: the factor in s_k = −B_{2k}/(2k)! · σ_{2k−1}.
pub fn sigma_factor(k: u32) -> Q {
    -bernoulli(2 * k) * inv_factorial(2 * k)
}

/// Largest λ-weight that can contribute at genus g.
pub fn weight_bound(g: u32) -> u32 {
    (3 * g).saturating_sub(3).max(g)
}

/// Multi-indices α (α_k = power of σ_{2k−1}, k = 1..g) of weight Σ(2k−1)α_k ≤ w.
fn sigma_exponents(g: u32, w: u32) -> Vec<Vec<u32>> {
    fn rec(k: u32, g: u32, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if k > g {
            out.push(cur.clone());
            return;
        }
        let wk = 2 * k - 1;
        let mut e = 0;
        while e * wk <= left {
            cur.push(e);
            rec(k + 1, g, left - e * wk, cur, out);
            cur.pop();
            e += 1;
        }
    }
    let mut out = Vec::new();
    rec(1, g, w, &mut Vec::new(), &mut out);
    out
}

/// Distinct-index monomials in λ_1..λ_g of weight ≤ w.
pub fn distinct_monomials(g: u32, w: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for mask in 0u32..(1 << g) {
        let m: Vec<u32> = (1..=g).filter(|i| mask & (1 << (i - 1)) != 0).collect();
        if m.iter().sum::<u32>() <= w {
            out.push(m);
        }
    }
    out.sort_by(|a, b| a.iter().sum::<u32>().cmp(&b.iter().sum()).then(a.cmp(b)));
    out
}

/// All generating functions H_g(M; t) for distinct-index M, with the system's shape.
#[derive(Clone, Debug)]
pub struct LambdaTable {
    pub genus: u32,
    pub equations: usize,
    pub unknowns: usize,
    pub functions: BTreeMap<Vec<u32>, DiffPoly>,
}

impl LambdaTable {
    /// H_g(M; t) for an arbitrary λ-polynomial, by Mumford reduction and linearity.
    pub fn evaluate(&self, p: &LambdaPoly) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (m, c) in p.mumford_reduce().truncate_weight(weight_bound(self.genus)).terms() {
            if let Some(f) = self.functions.get(m) {
                out.add_scaled(f, c);
            }
        }
        out
    }

    pub fn get(&self, m: &[u32]) -> Option<&DiffPoly> {
        self.functions.get(m)
    }
}

/// Solve for every H_g(M; t) from the s-expansion of H_g.
pub fn extract_all(g: u32, hg: &DiffPoly) -> Result<LambdaTable> {
    let w = weight_bound(g);
    let unknowns = distinct_monomials(g, w);
    let col: BTreeMap<&Vec<u32>, usize> = unknowns.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let ch: Vec<LambdaPoly> = (1..=g).map(|k| ch_in_lambda(g, 2 * k - 1)).collect::<Result<_>>()?;
    let by_params = hg.param_coefficients();
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for alpha in sigma_exponents(g, w) {
        // exp(Σσ ch)|_{σ^α} = Π ch_{2k−1}^{α_k}/α_k!
        let mut prod = LambdaPoly::one(g);
        let mut factor = Q::one();
        let mut pm = ParamMono::one();
        for (i, &a) in alpha.iter().enumerate() {
            let k = i as u32 + 1;
            if a == 0 {
                continue;
            }
            prod = prod.mul(&ch[i].pow(a)).mumford_reduce();
            prod = prod.scale(&inv_factorial(a)).truncate_weight(w);
            factor *= pow_q(&sigma_factor(k), a);
            pm = pm.mul(&ParamMono::var(Symbol::S(k), a));
        }
        let mut row = vec![Q::zero(); unknowns.len()];
        for (m, c) in prod.terms() {
            let j = *col
                .get(m)
                .ok_or_else(|| HodgeError::Inconsistent(format!("λ-monomial {m:?} outside the basis")))?;
            row[j] = c.clone();
        }
        let coeff = by_params.get(&pm).cloned().unwrap_or_default();
        rows.push(row);
        rhs.push(coeff.scale(&factor));
    }
    let stray: Vec<&ParamMono> = by_params
        .keys()
        .filter(|p| p.factors().iter().any(|(s, _)| !matches!(s, Symbol::S(k) if *k <= g)))
        .collect();
    if !stray.is_empty() {
        return Err(HodgeError::InvalidArgument(format!("H_{g} carries unexpected parameters {stray:?}")));
    }
    let equations = rows.len();
    let sol = solve(&rows, &rhs, &DiffPoly::zero()).unique(&format!("λ-extraction at genus {g}"))?;
    Ok(LambdaTable { genus: g, equations, unknowns: unknowns.len(), functions: unknowns.into_iter().zip(sol).collect() })
}

/// Parse a λ-monomial such as "1,1,1" or "2,3,4" (repeats allowed; 0 means λ_0 = 1).
pub fn parse_lambda(g: u32, text: &str) -> Result<LambdaPoly> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(LambdaPoly::one(g));
    }
    let idx = text
        .split(',')
        .map(|x| {
            x.trim().parse::<u32>().map_err(|_| HodgeError::Parse { pos: 0, msg: format!("bad λ index {x:?}") })
        })
        .collect::<Result<Vec<u32>>>()?;
    Ok(LambdaPoly::monomial(g, &idx, Q::one()))
}

/// Result of evaluating a Hodge integral.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HodgeNumber {
    pub value: Q,
    /// Set when the dimension constraint forces zero.
    pub note: Option<String>,
}

/// ∫ λ-poly · ψ_1^{p_1}…ψ_m^{p_m} over M̄_{g,m}, from the generating function of `lambda`.
pub fn hodge_number(table: &LambdaTable, lambda: &LambdaPoly, psi: &[u32]) -> Result<HodgeNumber> {
    let reduced = lambda.mumford_reduce();
    integrate(table.genus, &reduced, &table.evaluate(&reduced), psi)
}

/// The same integral given the generating function `gf` = H_g(`reduced`; t) directly.
pub fn integrate(g: u32, reduced: &LambdaPoly, gf: &DiffPoly, psi: &[u32]) -> Result<HodgeNumber> {
    let m = psi.len() as u32;
    let dim = 3 * g as i64 - 3 + m as i64;
    let psi_sum: i64 = psi.iter().map(|&p| p as i64).sum();
    let weights: Vec<u32> = reduced.terms().map(|(mono, _)| mono.iter().sum()).collect();
    if weights.iter().all(|&w| w as i64 + psi_sum != dim) {
        return Ok(HodgeNumber {
            value: Q::zero(),
            note: Some(format!("degree {} ≠ dim M̄_{{{g},{m}}} = {dim}", psi_sum + weights.first().copied().unwrap_or(0) as i64)),
        });
    }
    if psi.is_empty() {
        let c = gf.at_topological_origin();
        let value = c.as_constant().ok_or_else(|| HodgeError::InvalidArgument("non-constant value at t = 0".into()))?;
        return Ok(HodgeNumber { value, note: None });
    }
    let nvars = *psi.iter().max().unwrap() as usize + 1;
    let jets = topological_jets(nvars, m, gf.max_jet().max(1));
    let series = eval_on_tseries(gf, &jets, &|_| None)?;
    let mut e = vec![0u8; nvars];
    for &p in psi {
        e[p as usize] += 1;
    }
    let mult: BigInt = e.iter().map(|&k| factorial(k as u32)).product();
    Ok(HodgeNumber { value: series.coeff(&e) * Q::from_integer(mult), note: None })
}

/// H_g(λ_{g−2}λ_{g−1}λ_g; t) = |B_{2g−2}| |B_{2g}| / (2(2g−2)! (2g−2)(2g)) · v_1^{2g−2}.
pub fn bernoulli_formula_check(table: &LambdaTable) -> Result<(DiffPoly, DiffPoly)> {
    let g = table.genus;
    if g < 2 {
        return Err(HodgeError::InvalidArgument("needs g ≥ 2".into()));
    }
    let m = LambdaPoly::monomial(g, &[g - 2, g - 1, g], Q::one());
    let got = table.evaluate(&m);
    let c = abs(&bernoulli(2 * g - 2)) * abs(&bernoulli(2 * g))
        / Q::from_integer(factorial(2 * g - 2) * BigInt::from(2 * (2 * g - 2) * 2 * g));
    let want = DiffPoly::jet_pow(1, 2 * g as i32 - 2).scale(&c);
    Ok((got, want))
}

/// The genus-1 table from H_1 = L/24 − s_1 v/2.
pub fn genus_one_lambda(h1: &DiffPoly) -> Result<DiffPoly> {
    let t = extract_all(1, h1)?;
    Ok(t.get(&[1]).cloned().unwrap_or_default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hodge_recursion::{hodge_potential, hodge_potentials};
    use crate::rational::{q, qi};

    fn lp(g: u32, idx: &[u32]) -> LambdaPoly {
        LambdaPoly::monomial(g, idx, Q::one())
    }

    #[test]
    fn mumford_examples() {
        assert_eq!(lp(2, &[1, 1]).mumford_reduce(), lp(2, &[2]).scale(&qi(2)));
        assert_eq!(lp(2, &[1, 1, 1]).mumford_reduce(), lp(2, &[1, 2]).scale(&qi(2)));
        assert_eq!(lp(2, &[1, 2]).mumford_reduce(), lp(2, &[1, 2]));
        assert!(lp(1, &[1, 1]).mumford_reduce().is_zero());
    }

    #[test]
    fn even_chern_characters_vanish() {
        for g in 1..=5 {
            for m in [2, 4, 6] {
                assert!(power_sum_in_lambda(g, m).mumford_reduce().is_zero(), "g={g} m={m}");
            }
        }
    }

    #[test]
    fn ch_examples() {
        assert_eq!(ch_in_lambda(2, 1).unwrap(), lp(2, &[1]));
        assert_eq!(ch_in_lambda(2, 3).unwrap(), lp(2, &[1, 2]).scale(&q(-1, 6)));
        assert_eq!(ch_in_lambda(3, 3).unwrap(), lp(3, &[3]).scale(&q(1, 2)).add(&lp(3, &[1, 2]).scale(&q(-1, 6))));
        assert!(ch_in_lambda(3, 2).is_err());
    }

    #[test]
    fn genus_one() {
        let v = genus_one_lambda(&hodge_potential(1).unwrap()).unwrap();
        assert_eq!(v, DiffPoly::jet(0).scale(&q(1, 24)));
    }

    #[test]
    fn genus_two_table() {
        let t = extract_all(2, &hodge_potential(2).unwrap()).unwrap();
        assert!(t.equations > t.unknowns);
        assert_eq!(t.get(&[1, 2]).unwrap(), &DiffPoly::parse("(1/5760)*v1^2").unwrap());
        assert_eq!(t.get(&[2]).unwrap(), &DiffPoly::parse("(7/5760)*v2").unwrap());
        assert_eq!(t.get(&[1]).unwrap(), &DiffPoly::parse("(1/480)*v1^-1*v3 + (-11/5760)*v1^-2*v2^2").unwrap());
        let n = hodge_number(&t, &lp(2, &[1, 1, 1]), &[]).unwrap();
        assert_eq!(n.value, q(1, 2880));
        let (got, want) = bernoulli_formula_check(&t).unwrap();
        assert_eq!(got, want);
    }

    #[test]
    fn psi_insertions() {
        let sys = hodge_potentials(2).unwrap();
        let t = extract_all(2, sys.potential(2).unwrap()).unwrap();
        // ∫_{M̄_{2,1}} λ_2 ψ_1^2 = 7/5760
        assert_eq!(hodge_number(&t, &lp(2, &[2]), &[2]).unwrap().value, q(7, 5760));
        // ∫_{M̄_{2,1}} ψ^4 = 1/1152
        assert_eq!(hodge_number(&t, &LambdaPoly::one(2), &[4]).unwrap().value, q(1, 1152));
        let z = hodge_number(&t, &lp(2, &[2]), &[1]).unwrap();
        assert!(z.value.is_zero() && z.note.is_some());
    }
}
