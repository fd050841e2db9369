//! Substitution of ε-corrections into differential polynomials by Taylor expansion.

use crate::jetring::{DiffPoly, EpsExpansion, JetIndex};
use crate::rational::{qi, Q};

struct JetCache {
    jets: Vec<EpsExpansion>,
}

impl JetCache {
    fn new(u: &EpsExpansion) -> Self {
        JetCache { jets: vec![u.clone()] }
    }

    fn get(&mut self, m: JetIndex) -> &EpsExpansion {
        while self.jets.len() <= m {
            let next = self.jets.last().unwrap().dx();
            self.jets.push(next);
        }
        &self.jets[m]
    }
}

/// f(w + u) to ε^order, where u has no ε⁰ part:
/// Σ over multisets {m_1 ≤ … ≤ m_n} of ∂^n f/∂w_{m_1}…∂w_{m_n} · Π u_{m_i} / Π(multiplicity!).
pub fn taylor_shift(f: &DiffPoly, u: &EpsExpansion, order: u32) -> EpsExpansion {
    let mut out = EpsExpansion::leading(f.clone(), order);
    let Some(low) = u.iter().next().map(|(n, _)| n) else {
        return out;
    };
    assert!(low > 0, "shift must vanish at ε⁰");
    let mut cache = JetCache::new(&u.truncate(order));
    let unit = EpsExpansion::leading(DiffPoly::one(), order);
    descend(f, &unit, 0, None, 0, &qi(1), low, order, &mut cache, &mut out);
    out
}

#[allow(clippy::too_many_arguments)]
fn descend(
    d: &DiffPoly,
    prod: &EpsExpansion,
    prod_low: u32,
    last: Option<JetIndex>,
    run: i64,
    coef: &Q,
    low: u32,
    order: u32,
    cache: &mut JetCache,
    out: &mut EpsExpansion,
) {
    if prod_low + low > order {
        return;
    }
    for m in d.jet_support() {
        if last.is_some_and(|l| m < l) {
            continue;
        }
        let dm = d.pdiff(m);
        if dm.is_zero() {
            continue;
        }
        let run = if last == Some(m) { run + 1 } else { 1 };
        let coef = coef / qi(run);
        let next = prod.mul(cache.get(m));
        let Some(next_low) = next.iter().next().map(|(n, _)| n) else {
            continue;
        };
        *out = out.add(&next.mul_poly(&dm).scale(&coef));
        descend(&dm, &next, next_low, Some(m), run, &coef, low, order, cache, out);
    }
}

/// Every ε-coefficient of f substituted at w + u; the result keeps f's ε-grading.
pub fn shift_expansion(f: &EpsExpansion, u: &EpsExpansion) -> EpsExpansion {
    let order = f.order().min(u.order());
    let mut out = EpsExpansion::zero(order);
    for (n, p) in f.iter() {
        if n > order {
            continue;
        }
        let part = taylor_shift(p, u, order - n);
        for (k, q) in part.iter() {
            out.add_at(n + k, q);
        }
    }
    out
}

/// δf/δw = Σ_s (−∂_x)^s ∂f/∂w_s.
pub fn variational_derivative(f: &DiffPoly) -> DiffPoly {
    let mut out = DiffPoly::zero_in(f.context());
    for s in f.jet_support() {
        let mut t = f.pdiff(s);
        for _ in 0..s {
            t = t.dx().neg();
        }
        out.add_assign_ref(&t);
    }
    out
}

pub fn variational_derivative_eps(f: &EpsExpansion) -> EpsExpansion {
    f.map(variational_derivative)
}

/// Whether f is a total x-derivative up to no constant: δf/δw = 0 and no constant term.
pub fn is_trivial_density(f: &DiffPoly) -> bool {
    let constant_free = f.terms().all(|(j, _, _)| !j.is_one());
    constant_free && variational_derivative(f).is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jetring::{ParamPoly, RingContext};

    fn poly(s: &str) -> DiffPoly {
        DiffPoly::parse(s).unwrap()
    }

    #[test]
    fn polynomial_shift_is_exact() {
        // (w + ε² a)^3 with a = w2
        let f = poly("(1)*v^3");
        let mut u = EpsExpansion::zero(6);
        u.set(2, DiffPoly::jet(2));
        let got = taylor_shift(&f, &u, 6);
        assert_eq!(got.get(0), f);
        assert_eq!(got.get(2), poly("(3)*v^2*v2"));
        assert_eq!(got.get(4), poly("(3)*v*v2^2"));
        assert_eq!(got.get(6), poly("(1)*v2^3"));
    }

    #[test]
    fn derivative_jets_follow_dx() {
        // v1^-1 at w + ε² v: 1/(v1 + ε² v1) = (1/v1)(1 − ε² + ε⁴ − …)
        let f = poly("(1)*v1^-1");
        let mut u = EpsExpansion::zero(4);
        u.set(2, DiffPoly::jet(0));
        let got = taylor_shift(&f, &u, 4);
        assert_eq!(got.get(2), poly("(-1)*v1^-1"));
        assert_eq!(got.get(4), poly("(1)*v1^-1"));
    }

    #[test]
    fn exponential_shift() {
        let ctx = RingContext::with_exp(ParamPoly::constant(qi(1)));
        let x = DiffPoly::exp_gen(&ctx).unwrap();
        let mut u = EpsExpansion::zero(4);
        u.set(2, DiffPoly::jet(2));
        let got = taylor_shift(&x, &u, 4);
        assert_eq!(got.get(2), &x * &DiffPoly::jet(2));
        assert_eq!(got.get(4), (&x * &poly("(1)*v2^2")).scale(&Q::new(1.into(), 2.into())));
    }

    #[test]
    fn variational_derivative_kills_total_derivatives() {
        let f = poly("(1)*v^2*v3 + (1)*v1^-1*v2");
        assert!(variational_derivative(&f.dx()).is_zero());
        assert!(is_trivial_density(&f.dx()));
        assert_eq!(variational_derivative(&poly("(1/2)*v1^2")), poly("(-1)*v2"));
        assert!(!is_trivial_density(&poly("(1)*v1^2")));
    }
}
