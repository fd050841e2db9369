//! Specializations of the Hodge hierarchy: ILW, Volterra (discrete KdV) and the cubic
//! constant-coefficient family.

use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::error::{HodgeError, Result};
use crate::free_energy::bernoulli;
use crate::hierarchy::{shift_expansion, DiffOperator, EpsOperator, Hierarchy};
use crate::hodge_recursion::hodge_potentials;
use crate::jetring::{DiffPoly, EpsExpansion, JetMonomial, ParamMono, ParamPoly, RingContext, Symbol};
use crate::rational::{factorial, inv_factorial, pow_q, q, qi, Q};

/// One compared quantity.
#[derive(Clone, Debug)]
pub struct CheckItem {
    pub label: String,
    pub expected: String,
    pub got: String,
    pub ok: bool,
}

#[derive(Clone, Debug, Default)]
pub struct CheckReport {
    pub name: String,
    pub items: Vec<CheckItem>,
}

impl CheckReport {
    pub fn new(name: &str) -> Self {
        CheckReport { name: name.to_string(), items: Vec::new() }
    }

    pub fn push(&mut self, label: impl Into<String>, expected: impl fmt::Display, got: impl fmt::Display, ok: bool) {
        self.items.push(CheckItem { label: label.into(), expected: expected.to_string(), got: got.to_string(), ok });
    }

    /// Record an equality check between two displayable values.
    pub fn compare<T: PartialEq + fmt::Display>(&mut self, label: impl Into<String>, expected: &T, got: &T) {
        let ok = expected == got;
        self.push(label, expected, got, ok);
    }

    pub fn passed(&self) -> bool {
        !self.items.is_empty() && self.items.iter().all(|i| i.ok)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckItem> {
        self.items.iter().filter(|i| !i.ok)
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}: {}", self.name, if self.passed() { "ok" } else { "FAILED" })?;
        for i in &self.items {
            if i.ok {
                writeln!(f, "  ok   {}", i.label)?;
            } else {
                writeln!(f, "  FAIL {}\n       expected {}\n       got      {}", i.label, i.expected, i.got)?;
            }
        }
        Ok(())
    }
}

/// −B_{2k}/(2k(2k−1)), the common prefactor of the three rules.
fn base(k: u32) -> Q {
    -bernoulli(2 * k) / qi((2 * k * (2 * k - 1)) as i64)
}

/// ILW: s_k = −B_{2k}/(2k(2k−1)) s^{2k−1}.
pub fn ilw_rule(k: u32) -> ParamPoly {
    ParamPoly::monomial(ParamMono::var(Symbol::SBare, 2 * k - 1), base(k))
}

/// Volterra at s = 1: s_k = (4^k − 1) B_{2k}/(2k(2k−1)).
pub fn volterra_rule(k: u32) -> Q {
    -(pow_q(&qi(4), k) - qi(1)) * base(k)
}

/// Cubic: s_k = −B_{2k}/(2k(2k−1)) (p^{2k−1} + q^{2k−1} − (pq/(p+q))^{2k−1}).
pub fn cubic_rule(k: u32, p: &Q, r: &Q) -> Result<Q> {
    let sum = p + r;
    if sum.is_zero() {
        return Err(HodgeError::InvalidArgument("cubic sample needs p + q ≠ 0".into()));
    }
    let e = 2 * k - 1;
    Ok(base(k) * (pow_q(p, e) + pow_q(r, e) - pow_q(&(p * r / sum), e)))
}

/// Replace every s_k by `rule(k)`.
pub fn specialize(f: &DiffPoly, rule: &dyn Fn(u32) -> ParamPoly) -> DiffPoly {
    f.subs_params(&|s| match s {
        Symbol::S(k) => Some(rule(k)),
        _ => None,
    })
}

/// The generic hierarchy with every s_k replaced by `rule(k)`.
pub fn specialized_hierarchy(order: u32, rule: &dyn Fn(u32) -> ParamPoly) -> Result<Hierarchy> {
    let sys = hodge_potentials(order / 2)?;
    let pots = (1..=order / 2).map(|g| sys.potential(g).map(|h| specialize(h, rule))).collect::<Result<Vec<_>>>()?;
    Hierarchy::new(pots, order)
}

/// Σ_g c_g ε^{2g} ∂^{2g} applied to f, with c_0 = 1.
fn linear_miura(f: &EpsExpansion, coeff: &dyn Fn(u32) -> DiffPoly) -> EpsExpansion {
    let mut out = f.clone();
    for g in 1..=f.order() / 2 {
        out = out.add(&f.dx_n(2 * g as usize).mul_poly(&coeff(g)).shift(2 * g));
    }
    out
}

/// The shift u − w = Σ_g c_g ε^{2g} w_{2g} for a linear Miura map.
fn linear_shift(order: u32, coeff: &dyn Fn(u32) -> DiffPoly) -> EpsExpansion {
    let mut out = EpsExpansion::zero(order);
    for g in 1..=order / 2 {
        out.set(2 * g, &coeff(g) * &DiffPoly::jet(2 * g as usize));
    }
    out
}

fn s_pow(e: u32) -> DiffPoly {
    DiffPoly::param(&ParamPoly::monomial(ParamMono::var(Symbol::SBare, e), Q::one()))
}

/// ILW: the t_1-flow after u = w + Σ(−1)^g ε^{2g} s^g w_{2g}/(2^{2g}(2g+1)!) and the operator.
pub fn ilw_check(order: u32) -> Result<CheckReport> {
    let h = specialized_hierarchy(order, &ilw_rule)?;
    let mut report = CheckReport::new(&format!("ILW through eps^{order}"));
    let c = |g: u32| {
        let sign = if g % 2 == 0 { qi(1) } else { qi(-1) };
        s_pow(g).scale(&(sign * inv_factorial(2 * g + 1) / pow_q(&qi(4), g)))
    };
    let lhs = linear_miura(&h.flow(1), &c);
    let mut rhs_u = EpsExpansion::leading(DiffPoly::parse("(1)*v*v1")?, order);
    for g in 1..=order / 2 {
        let k = bernoulli(2 * g).abs() * inv_factorial(2 * g);
        rhs_u.set(2 * g, (&s_pow(g - 1) * &DiffPoly::jet(2 * g as usize + 1)).scale(&k));
    }
    let rhs = shift_expansion(&rhs_u, &linear_shift(order, &c));
    for n in (0..=order).step_by(2) {
        report.compare(format!("t1 flow eps^{n}"), &rhs.get(n), &lhs.get(n));
    }
    let op = h.operator();
    for g in 0..=order / 2 {
        let k = if g == 0 { qi(1) } else { qi(2 * g as i64 - 1) * bernoulli(2 * g).abs() * inv_factorial(2 * g) };
        let want = DiffOperator::monomial(2 * g + 1, s_pow(g).scale(&k));
        report.compare(format!("operator eps^{}", 2 * g), &want, &op.get(2 * g));
    }
    Ok(report)
}

fn rebase(f: &DiffPoly, ctx: &Arc<RingContext>, map: impl Fn(&JetMonomial) -> Q) -> DiffPoly {
    let mut out = DiffPoly::zero_in(ctx);
    for (j, p, c) in f.terms() {
        out.add_term(j.clone(), p.clone(), c * map(j));
    }
    out
}

fn pow_i(x: &Q, e: i32) -> Q {
    if e >= 0 {
        pow_q(x, e as u32)
    } else {
        pow_q(&x.recip(), (-e) as u32)
    }
}

/// Number of jet factors (v, v_x, v_xx, …) in a monomial, counted with exponent.
fn jet_factor_count(j: &JetMonomial) -> i32 {
    j.exp_v() as i32 + j.exp_v1() + j.exp_higher().map(|(_, e)| e as i32).sum::<i32>()
}

/// The Volterra flow 2Σ_k 2^k ∂w/∂t_k at s = 1, rewritten for W = 2w, with X = e^W.
pub fn volterra_flow(order: u32) -> Result<EpsExpansion> {
    let h = specialized_hierarchy(order, &|k| ParamPoly::constant(volterra_rule(k)))?;
    let ctx2 = RingContext::with_exp(ParamPoly::constant(qi(2)));
    let x = DiffPoly::exp_gen(&ctx2)?;
    let velocity = (&x * &DiffPoly::jet(1)).scale(&qi(2));
    let flow = h.flow_along(&velocity);
    let ctx1 = RingContext::with_exp(ParamPoly::constant(qi(1)));
    // W = 2w: w_m = W_m/2, and W_t = 2 w_t
    Ok(flow.map(|p| rebase(p, &ctx1, |j| qi(2) * pow_i(&q(1, 2), jet_factor_count(j)))))
}

/// (e^{u(x+ε)} − e^{u(x−ε)})/ε in u-jets with X = e^u.
pub fn discrete_kdv_rhs(order: u32, ctx: &Arc<RingContext>) -> Result<EpsExpansion> {
    let x = DiffPoly::exp_gen(ctx)?;
    let top = order + 1;
    let mut diff = EpsExpansion::zero(top);
    for sign in [1i64, -1] {
        let mut shift = EpsExpansion::zero(top);
        for n in 1..=top {
            let k = pow_q(&qi(sign), n) * inv_factorial(n);
            shift.set(n, DiffPoly::jet(n as usize).scale(&k));
        }
        // exp(shift) = Σ_j shift^j/j!
        let mut term = EpsExpansion::leading(DiffPoly::one(), top);
        let mut sum = term.clone();
        for j in 1..=top {
            term = term.mul(&shift).scale(&Q::new(1.into(), (j as i64).into()));
            sum = sum.add(&term);
        }
        diff = if sign == 1 { diff.add(&sum) } else { diff.sub(&sum) };
    }
    let mut out = EpsExpansion::zero(order);
    for (n, p) in diff.iter() {
        if n >= 1 {
            out.add_at(n - 1, &(&x * p));
        }
    }
    Ok(out)
}

/// Volterra: the resummed flow against its printed form, then the Miura map to the
/// discrete KdV equation u_t = (e^{u(x+ε)} − e^{u(x−ε)})/ε.
pub fn volterra_check(order: u32) -> Result<CheckReport> {
    let mut report = CheckReport::new(&format!("Volterra through eps^{order}"));
    let flow = volterra_flow(order)?;
    let ctx = RingContext::with_exp(ParamPoly::constant(qi(1)));
    let x = DiffPoly::exp_gen(&ctx)?;
    let lead = (&x * &DiffPoly::jet(1)).scale(&qi(2));
    report.compare("flow eps^0", &lead, &flow.get(0));
    if order >= 2 {
        let inner = DiffPoly::parse("(-1/4)*v1^3 + (1/2)*v1*v2 + (1)*v3")?;
        let want = (&x * &inner).scale(&q(1, 3));
        report.compare("flow eps^2", &want, &flow.get(2));
    }
    let d = |k: u32| {
        let num = pow_q(&qi(3), 2 * k + 2) - qi(1);
        DiffPoly::constant(num / (Q::from_integer(factorial(2 * k + 2)) * pow_q(&qi(4), k + 1)))
    };
    let lhs = linear_miura(&flow, &d);
    let rhs_u = discrete_kdv_rhs(order, &ctx)?;
    if order >= 2 {
        let inner = DiffPoly::parse("(1)*v1^3 + (3)*v1*v2 + (1)*v3")?;
        report.compare("discrete KdV eps^2", &(&x * &inner).scale(&q(1, 3)), &rhs_u.get(2));
    }
    let rhs = shift_expansion(&rhs_u, &linear_shift(order, &d));
    for n in (0..=order).step_by(2) {
        report.compare(format!("Miura to discrete KdV eps^{n}"), &rhs.get(n), &lhs.get(n));
    }
    Ok(report)
}

/// Series of x/sin x in y = x²: Σ (−1)^{n+1}(2^{2n} − 2) B_{2n}/(2n)! y^n.
fn x_over_sin(n: u32) -> Q {
    if n == 0 {
        return qi(1);
    }
    let sign = if n % 2 == 1 { qi(1) } else { qi(-1) };
    sign * (pow_q(&qi(4), n) - qi(2)) * bernoulli(2 * n) * inv_factorial(2 * n)
}

/// ∂ Π_i (a_i ε∂/2)/sin(a_i ε∂/2) with a_1² = p²/(p+q), a_2² = q²/(p+q), a_3² = p+q.
pub fn cubic_closed_operator(p: &Q, r: &Q, order: u32) -> EpsOperator {
    let sum = p + r;
    let squares = [p * p / &sum, r * r / &sum, sum.clone()];
    let half = order / 2;
    // coefficients of y^n in the product, y = ε²∂²
    let mut prod = vec![Q::zero(); half as usize + 1];
    prod[0] = qi(1);
    for a2 in &squares {
        let mut next = vec![Q::zero(); prod.len()];
        for (i, x) in prod.iter().enumerate() {
            for n in 0..prod.len() - i {
                next[i + n] += x * x_over_sin(n as u32) * pow_q(&(a2 / qi(4)), n as u32);
            }
        }
        prod = next;
    }
    let mut out = EpsOperator::zero(order);
    for (n, c) in prod.iter().enumerate() {
        out.add_at(2 * n as u32, &DiffOperator::monomial(2 * n as u32 + 1, DiffPoly::constant(c.clone())));
    }
    out
}

/// The operator table in terms of s_1, s_2 through ε⁶.
fn cubic_table(s: &dyn Fn(u32) -> Q, order: u32) -> EpsOperator {
    let c = [
        qi(1),
        -s(1),
        q(3, 5) * pow_q(&s(1), 2),
        -(q(31, 105) * pow_q(&s(1), 3) + s(2) / qi(504)),
    ];
    let mut out = EpsOperator::zero(order);
    for (n, k) in c.iter().enumerate().take((order / 2 + 1) as usize) {
        out.add_at(2 * n as u32, &DiffOperator::monomial(2 * n as u32 + 1, DiffPoly::constant(k.clone())));
    }
    out
}

/// Cubic: for each (p, q) sample the operator is constant-coefficient and matches the closed
/// product formula, and the printed table through ε⁶.
pub fn cubic_check(order: u32, samples: &[(Q, Q)]) -> Result<CheckReport> {
    let mut report = CheckReport::new(&format!("cubic through eps^{order}"));
    let generic = Hierarchy::generic(order)?.operator();
    for (p, r) in samples {
        let vals: Vec<Q> = (1..=order / 2).map(|k| cubic_rule(k, p, r)).collect::<Result<_>>()?;
        let s = |k: u32| vals[k as usize - 1].clone();
        let op = generic.map(|o| {
            o.map(|c| {
                c.subs_params(&|sym| match sym {
                    Symbol::S(k) if k as usize <= vals.len() => Some(ParamPoly::constant(s(k))),
                    _ => None,
                })
            })
        });
        let tag = format!("(p,q)=({p},{r})");
        let table = cubic_table(&s, order.min(6));
        let closed = cubic_closed_operator(p, r, order);
        for n in (0..=order).step_by(2) {
            let got = op.get(n);
            let ok = got.is_jet_free();
            report.push(format!("{tag} eps^{n} jet-free"), "constant coefficients", if ok { "constant coefficients".to_string() } else { got.to_string() }, ok);
            if n <= 6 {
                report.compare(format!("{tag} eps^{n} table"), &table.get(n), &got);
            }
            report.compare(format!("{tag} eps^{n} product formula"), &closed.get(n), &got);
        }
    }
    Ok(report)
}

/// The default sample set; (−2, 1) reproduces the Volterra values.
pub fn default_cubic_samples() -> Vec<(Q, Q)> {
    vec![(qi(1), qi(1)), (qi(-2), qi(1)), (q(1, 2), qi(3)), (qi(2), q(-1, 3))]
}
