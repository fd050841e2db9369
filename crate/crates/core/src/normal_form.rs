//! Normal form of a tau-symmetric deformation: a normal Miura map w̃ = w + Σ ε^{2k} ∂_x² F_k
//! that turns the Hamiltonian operator into ∂_x and the density h_1 into the standard
//! monomial set (highest-derivative factor nonlinear, no w_x factor).

use std::collections::BTreeMap;

use crate::error::{HodgeError, Result};
use crate::hierarchy::{transport_operator, variational_derivative, DiffOperator, EpsOperator, Hierarchy, QuasiMiura};
use crate::jetring::{DiffPoly, EpsExpansion, JetMonomial, ParamMono, Symbol};
use crate::linalg::{solve, Outcome};
use crate::rational::{q, qi, Q};
use crate::specializations::CheckReport;

/// Partitions of n into parts in [min, max], parts non-increasing.
fn partitions(n: u32, min: u32, max: u32) -> Vec<Vec<u32>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in (min..=max.min(n)).rev() {
        for mut rest in partitions(n - first, min, first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn monomial_of(parts: &[u32], w_power: u32) -> JetMonomial {
    let mut j = JetMonomial::one();
    if w_power > 0 {
        j.bump(0, w_power as i32);
    }
    for &p in parts {
        j.bump(p as usize, 1);
    }
    j
}

/// Standard monomials of differential degree 2k: w_1² for k = 1; otherwise products of
/// w_2, w_3, … whose highest-derivative factor appears at least squared. Ordered by highest
/// derivative, then its exponent.
pub fn standard_monomials(k: u32) -> Vec<JetMonomial> {
    if k == 1 {
        return vec![JetMonomial::jet(1, 2)];
    }
    let mut parts: Vec<Vec<u32>> =
        partitions(2 * k, 2, 2 * k).into_iter().filter(|p| p.len() >= 2 && p[0] == p[1]).collect();
    let key = |p: &Vec<u32>| {
        let top = p[0];
        let mult = p.iter().filter(|&&x| x == top).count();
        (top, mult, p.iter().rev().cloned().collect::<Vec<_>>())
    };
    parts.sort_by_key(key);
    parts.iter().map(|p| monomial_of(p, 0)).collect()
}

/// Candidate monomials for F_k: differential degree 2k − 2 times w^j, j ≤ max_w, minus constants.
fn generator_basis(k: u32, max_w: u32) -> Vec<JetMonomial> {
    let mut out = Vec::new();
    for p in partitions(2 * k - 2, 1, 2 * k - 2) {
        for j in 0..=max_w {
            let m = monomial_of(&p, j);
            if !m.is_one() {
                out.push(m);
            }
        }
    }
    out
}

/// Linear equations Σ_i x_i col_i(key) = rhs(key) with rational columns and parametric rhs.
struct System {
    ncols: usize,
    rows: BTreeMap<(u32, JetMonomial), (Vec<Q>, DiffPoly)>,
}

impl System {
    fn new(ncols: usize) -> Self {
        System { ncols, rows: BTreeMap::new() }
    }

    fn row(&mut self, key: (u32, JetMonomial)) -> &mut (Vec<Q>, DiffPoly) {
        let n = self.ncols;
        self.rows.entry(key).or_insert_with(|| (vec![qi(0); n], DiffPoly::zero()))
    }

    fn add_column(&mut self, tag: u32, col: usize, p: &DiffPoly) -> Result<()> {
        for (j, pm, c) in p.terms() {
            if !pm.is_one() {
                return Err(HodgeError::InvalidArgument("normal-form basis column carries parameters".into()));
            }
            self.row((tag, j.clone())).0[col] += c;
        }
        Ok(())
    }

    /// Adds −p to the right-hand sides.
    fn add_residual(&mut self, tag: u32, p: &DiffPoly) {
        for (j, pm, c) in p.terms() {
            let t = DiffPoly::term(JetMonomial::one(), pm.clone(), -c.clone());
            self.row((tag, j.clone())).1.add_assign_ref(&t);
        }
    }

    fn solve(self, context: &str, notes: &mut Vec<String>) -> Result<Vec<DiffPoly>> {
        let (a, b): (Vec<Vec<Q>>, Vec<DiffPoly>) = self.rows.into_values().unzip();
        let report = solve(&a, &b, &DiffPoly::zero());
        match report.outcome {
            Outcome::Unique(x) => Ok(x),
            Outcome::Underdetermined { particular, null_space } => {
                notes.push(format!("{context}: {} free directions set to zero", null_space.len()));
                Ok(particular)
            }
            Outcome::Inconsistent { residual, .. } => Err(HodgeError::Verification(format!(
                "{context}: no normal Miura map reaches the standard form (residual {})",
                residual.canonical_text()
            ))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct NormalForm {
    pub order: u32,
    /// F_1, F_2, … of w̃ = w + Σ ε^{2k} ∂_x² F_k.
    pub generators: Vec<DiffPoly>,
    /// The standard-form density ĥ_1 in w̃-jets.
    pub density: EpsExpansion,
    /// a_0, a_1, b_1, … in the order they appear.
    pub coefficients: Vec<(String, DiffPoly)>,
    pub notes: Vec<String>,
}

impl NormalForm {
    pub fn coefficient(&self, name: &str) -> Option<&DiffPoly> {
        self.coefficients.iter().find(|(n, _)| n == name).map(|(_, c)| c)
    }
}

fn padded(generators: &[DiffPoly], order: u32) -> Vec<DiffPoly> {
    let mut g = generators.to_vec();
    g.resize((order / 2) as usize, DiffPoly::zero());
    g
}

/// Linearization Σ_s ∂a/∂w_s ∂^s.
fn frechet(a: &DiffPoly) -> DiffOperator {
    let mut op = DiffOperator::zero();
    for s in a.jet_support() {
        op.add_at(s as u32, &a.pdiff(s));
    }
    op
}

/// Bring (P, h_1) to the canonical form through ε^order. P must start with ∂_x and h_1 with w³/6.
pub fn normal_form(p: &EpsOperator, h1: &EpsExpansion, order: u32) -> Result<NormalForm> {
    let order = order.min(p.order()).min(h1.order());
    if p.get(0) != DiffOperator::d() {
        return Err(HodgeError::InvalidArgument("operator must start with d/dx".into()));
    }
    let h0 = h1.get(0);
    let mut generators: Vec<DiffPoly> = Vec::new();
    let mut standard = EpsExpansion::leading(h0.clone(), order);
    let mut coefficients = Vec::new();
    let mut notes = Vec::new();
    let mut b_count = 0;
    for k in 1..=order / 2 {
        let n = 2 * k;
        let miura = QuasiMiura::new(&padded(&generators, order), order)?;
        let res_p = transport_operator(&miura, p).get(n);
        let res_h = variational_derivative(&miura.to_w(h1).get(n));
        let basis = generator_basis(k, 2 * k);
        let std = standard_monomials(k);
        let mut sys = System::new(basis.len() + std.len());
        for (i, m) in basis.iter().enumerate() {
            let a = DiffPoly::term(m.clone(), ParamMono::one(), qi(1)).dx_n(2);
            let ell = frechet(&a);
            let lin = ell.compose(&DiffOperator::d()).add(&DiffOperator::d().compose(&ell.adjoint()));
            for (pow, c) in lin.terms() {
                sys.add_column(pow + 1, i, c)?;
            }
            let shift = frechet(&h0).apply(&a).neg();
            sys.add_column(0, i, &variational_derivative(&shift))?;
        }
        for (j, m) in std.iter().enumerate() {
            let t = DiffPoly::term(m.clone(), ParamMono::one(), qi(-1));
            sys.add_column(0, basis.len() + j, &variational_derivative(&t))?;
        }
        for (pow, c) in res_p.terms() {
            sys.add_residual(pow + 1, c);
        }
        sys.add_residual(0, &res_h);
        let x = sys.solve(&format!("eps^{n}"), &mut notes)?;
        let mut f = DiffPoly::zero();
        for (m, c) in basis.iter().zip(&x) {
            f.add_assign_ref(&(c * &DiffPoly::term(m.clone(), ParamMono::one(), qi(1))));
        }
        generators.push(f);
        let mut part = DiffPoly::zero();
        for (j, (m, c)) in std.iter().zip(&x[basis.len()..]).enumerate() {
            part.add_assign_ref(&(c * &DiffPoly::term(m.clone(), ParamMono::one(), qi(1))));
            let name = if k == 1 {
                coefficients.push(("a0".to_string(), c.scale(&qi(-24))));
                continue;
            } else if j == 0 {
                format!("a{}", k - 1)
            } else {
                b_count += 1;
                format!("b{b_count}")
            };
            coefficients.push((name, c.clone()));
        }
        // a_{k−1} sits on w_2^k, which sorts first
        standard.set(n, part);
    }
    let out = NormalForm { order, generators, density: standard, coefficients, notes };
    verify(&out, p, h1)?;
    Ok(out)
}

/// The map sends P to ∂_x and h_1 to the standard density modulo total derivatives.
fn verify(nf: &NormalForm, p: &EpsOperator, h1: &EpsExpansion) -> Result<()> {
    let miura = QuasiMiura::new(&nf.generators, nf.order)?;
    let op = transport_operator(&miura, p);
    if op != EpsOperator::leading(DiffOperator::d(), nf.order) {
        return Err(HodgeError::Verification(format!("transformed operator is not d/dx:\n{op}")));
    }
    let h = miura.to_w(h1);
    for n in 0..=nf.order {
        let diff = &h.get(n) - &nf.density.get(n);
        if !variational_derivative(&diff).is_zero() {
            return Err(HodgeError::Verification(format!("eps^{n}: reduced density differs from the original")));
        }
    }
    Ok(())
}

/// Normal form of the generic Hodge hierarchy.
pub fn hodge_normal_form(order: u32) -> Result<NormalForm> {
    let h = Hierarchy::generic(order)?;
    normal_form(&h.operator(), &h.density(1)?, order)
}

fn s(k: u32) -> DiffPoly {
    DiffPoly::symbol(Symbol::S(k))
}

fn poly(text: &str) -> DiffPoly {
    DiffPoly::parse(text).expect("static polynomial")
}

/// Compare the normal form of the Hodge hierarchy with the printed density, the b-relations,
/// the map F and the s ↔ a correspondence.
pub fn hodge_normal_form_check(order: u32) -> Result<(NormalForm, CheckReport)> {
    let nf = hodge_normal_form(order)?;
    let mut r = CheckReport::new(&format!("normal form through eps^{order}"));
    let get = |name: &str| nf.coefficient(name).cloned().unwrap_or_default();
    let a0 = get("a0");
    r.compare("a0", &DiffPoly::one(), &a0);
    let mut want_h = vec![
        poly("(1/6)*v^3"),
        poly("(-1/24)*v1^2"),
        poly("(-1/120)*s1*v2^2"),
        poly("(-1/360)*s1^3*v2^3 + (-1/1728)*s2*v2^3 + (-1/420)*s1^2*v3^2"),
        poly(
            "(-2/525)*s1^5*v2^4 + (-1/504)*s1^2*s2*v2^4 + (-1/34560)*s3*v2^4 \
             + (-11/1400)*s1^4*v2*v3^2 + (-11/6720)*s1*s2*v2*v3^2 + (-1/1260)*s1^3*v4^2 + (-1/60480)*s2*v4^2",
        ),
    ];
    want_h.truncate((order / 2 + 1) as usize);
    for (i, w) in want_h.iter().enumerate() {
        r.compare(format!("density eps^{}", 2 * i), w, &nf.density.get(2 * i as u32));
    }
    let mut want_f = vec![
        poly("(1/2)*s1*v"),
        poly("(1/10)*s1^3*v1^2 + (1/48)*s2*v1^2 + (3/40)*s1^2*v2"),
        poly(
            "(-8/175)*s1^6*v1^4 + (5/504)*s2^2*v1^4 + (-1/480)*s1*s3*v1^4 + (-1/21)*s1^3*s2*v1^4 \
             + (1/480)*s3*v1^2*v2 + (1/7)*s1^2*s2*v1^2*v2 + (48/175)*s1^5*v1^2*v2 \
             + (-1/21)*s1^4*v2^2 + (-5/504)*s1*s2*v2^2 + (1/210)*s1^4*v1*v3 + (1/1008)*s1*s2*v1*v3 \
             + (17/1680)*s1^3*v4 + (1/1008)*s2*v4",
        ),
    ];
    want_f.truncate((order / 2) as usize);
    for (i, w) in want_f.iter().enumerate() {
        // F is fixed only up to terms killed by ∂_x², so compare ∂_x² F
        r.compare(format!("map eps^{}", 2 * i + 2), &w.dx_n(2), &nf.generators[i].dx_n(2));
    }
    let a1 = get("a1");
    if order >= 4 {
        r.compare("s1 = -120 a1", &s(1), &a1.scale(&qi(-120)));
    }
    if order >= 6 {
        let a2 = get("a2");
        let b1 = get("b1");
        r.compare("7 a0 b1 = -240 a1^2", &(&a1 * &a1).scale(&qi(-240)), &(&a0 * &b1).scale(&qi(7)));
        let s2 = &a1.pow(3).scale(&qi(8294400)) - &a2.scale(&qi(1728));
        r.compare("s2 = 8294400 a1^3 - 1728 a2", &s(2), &s2);
    }
    if order >= 8 {
        let (a2, a3, b2, b3) = (get("a2"), get("a3"), get("b2"), get("b3"));
        r.compare("7 a0 b2 = -2376 a1 a2", &(&a1 * &a2).scale(&qi(-2376)), &(&a0 * &b2).scale(&qi(7)));
        let rhs = &(&a0.pow(3) * &a2) + &a1.pow(3).scale(&qi(43200));
        r.compare("35 a0^2 b3 = a0^3 a2 + 43200 a1^3", &rhs, &(&a0.pow(2) * &b3).scale(&qi(35)));
        let s3 = &(&a1.pow(5).scale(&q(-34398535680000, 7)) + &(&a1.pow(2) * &a2).scale(&q(11943936000, 7)))
            - &a3.scale(&qi(34560));
        r.compare("s3 in terms of a1, a2, a3", &s(3), &s3);
    }
    Ok((nf, r))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_sets_follow_the_rules() {
        let show = |k| standard_monomials(k).iter().map(|m| m.to_string()).collect::<Vec<_>>().join(" ");
        assert_eq!(show(1), "v1^2");
        assert_eq!(show(2), "v2^2");
        assert_eq!(show(3), "v2^3 v3^2");
        assert_eq!(show(4), "v2^4 v2*v3^2 v4^2");
        assert_eq!(show(5), "v2^5 v2^2*v3^2 v2*v4^2 v5^2");
        assert_eq!(show(6), "v2^6 v2^3*v3^2 v3^4 v2^2*v4^2 v4^3 v2*v5^2 v6^2");
    }

    #[test]
    fn hodge_through_eps6() {
        let (nf, report) = hodge_normal_form_check(6).unwrap();
        assert!(report.passed(), "{report}");
        assert!(nf.notes.is_empty(), "{:?}", nf.notes);
    }

    #[test]
    fn hodge_through_eps8() {
        let (nf, report) = hodge_normal_form_check(8).unwrap();
        assert!(report.passed(), "{report}");
        assert_eq!(nf.coefficients.iter().map(|(n, _)| n.as_str()).collect::<Vec<_>>(), ["a0", "a1", "a2", "b1", "a3", "b2", "b3"]);
    }

    #[test]
    fn opposite_sign_map_fails() {
        // the ε⁶ map with (s1⁴/210 − s1 s2/1008)(−10 w_2² + w_1 w_3) leaves ε⁶ terms in the operator
        let h = Hierarchy::generic(6).unwrap();
        let mut nf = hodge_normal_form(6).unwrap();
        let flip = poly("(-5/252)*s1*s2*v2^2 + (1/504)*s1*s2*v1*v3");
        nf.generators[2] = &nf.generators[2] - &flip;
        let err = verify(&nf, &h.operator(), &h.density(1).unwrap()).unwrap_err();
        assert!(err.to_string().contains("not d/dx"));
    }

    #[test]
    fn kdv_is_already_normal() {
        let p = EpsOperator::leading(DiffOperator::d(), 4);
        let mut h = EpsExpansion::leading(poly("(1/6)*v^3"), 4);
        h.set(2, poly("(-1/24)*v1^2"));
        let nf = normal_form(&p, &h, 4).unwrap();
        assert!(nf.generators.iter().all(|f| f.dx_n(2).is_zero()));
        assert_eq!(nf.coefficient("a1"), Some(&DiffPoly::zero()));
    }
}
