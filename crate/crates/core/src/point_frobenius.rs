//! Structure functions of the one-dimensional Frobenius manifold (potential v³/6), the
//! dispersionless flows, the operators D_k and the alternating t-derivative sums.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_traits::Zero;

use crate::jetring::DiffPoly;
use crate::rational::{inv_factorial, q, qi, Q};

/// θ_p = v^{p+1}/(p+1)!
pub fn theta(p: u32) -> DiffPoly {
    DiffPoly::jet_pow(0, p as i32 + 1).scale(&inv_factorial(p + 1))
}

/// ∂θ_p/∂v = v^p/p!
pub fn theta_v(p: u32) -> DiffPoly {
    DiffPoly::jet_pow(0, p as i32).scale(&inv_factorial(p))
}

/// Ω_{p,q} = v^{p+q+1}/((p+q+1) p! q!)
pub fn omega(p: u32, q_: u32) -> DiffPoly {
    let n = p + q_ + 1;
    let c = inv_factorial(p) * inv_factorial(q_) * q(1, n as i64);
    DiffPoly::jet_pow(0, n as i32).scale(&c)
}

/// Tr U = v.
pub fn tr_u() -> DiffPoly {
    DiffPoly::jet(0)
}

/// ∂v/∂t_p = v^p v_x / p!
pub fn flow_velocity(p: u32) -> DiffPoly {
    &theta_v(p) * &DiffPoly::jet(1)
}

/// ∂f/∂t_p along the dispersionless flows: Σ_ℓ ∂f/∂v^{(ℓ)} · ∂_x^ℓ(v^p v_x/p!).
pub fn flow_tderiv(f: &DiffPoly, p: u32) -> DiffPoly {
    evolve(f, &flow_velocity(p))
}

/// Σ_ℓ ∂f/∂v^{(ℓ)} · ∂_x^ℓ(velocity): the derivative of f along ∂v/∂t = velocity.
pub fn evolve(f: &DiffPoly, velocity: &DiffPoly) -> DiffPoly {
    let mut out = DiffPoly::zero_in(f.context());
    let mut dv = velocity.clone();
    let top = f.max_jet();
    let support = f.jet_support();
    for l in 0..=top {
        if support.contains(&l) {
            out.add_assign_ref(&(&f.pdiff(l) * &dv));
        }
        if l < top {
            dv = dv.dx();
        }
    }
    out
}

struct Caches {
    /// B_l(z) as coefficient lists in z.
    b: Mutex<Vec<Arc<Vec<DiffPoly>>>>,
    alt: Mutex<HashMap<(usize, usize, usize), Arc<DiffPoly>>>,
    dk: Mutex<HashMap<(u32, usize), Arc<DiffPoly>>>,
}

fn caches() -> &'static Caches {
    static C: OnceLock<Caches> = OnceLock::new();
    C.get_or_init(|| Caches {
        b: Mutex::new(vec![Arc::new(vec![DiffPoly::one()])]),
        alt: Mutex::new(HashMap::new()),
        dk: Mutex::new(HashMap::new()),
    })
}

/// B_l(z) = e^{-zv} ∂_x^l e^{zv}, a polynomial in z with v-free coefficients:
/// B_0 = 1, B_{l+1} = ∂_x B_l + z v_x B_l.
pub fn exp_jet_series(l: usize) -> Arc<Vec<DiffPoly>> {
    let c = caches();
    let mut b = c.b.lock().unwrap();
    while b.len() <= l {
        let prev = b.last().unwrap().clone();
        let mut next = vec![DiffPoly::zero(); prev.len() + 1];
        for (i, coef) in prev.iter().enumerate() {
            next[i] = &next[i] + &coef.dx();
            next[i + 1] = &next[i + 1] + &(coef * &DiffPoly::jet(1));
        }
        b.push(Arc::new(next));
    }
    b[l].clone()
}

/// Σ_{p=0}^{N} (-1)^p ∂_x^l(v^p/p!) ∂_x^m(v^{N-p}/(N-p)!) = [z^N] B_l(-z) B_m(z).
pub fn alt_sum(l: usize, m: usize, n: usize) -> DiffPoly {
    if n > l + m {
        return DiffPoly::zero();
    }
    let key = (l, m, n);
    if let Some(hit) = caches().alt.lock().unwrap().get(&key) {
        return (**hit).clone();
    }
    let bl = exp_jet_series(l);
    let bm = exp_jet_series(m);
    let mut out = DiffPoly::zero();
    for i in 0..=n {
        let j = n - i;
        if i < bl.len() && j < bm.len() && !bl[i].is_zero() && !bm[j].is_zero() {
            let term = &bl[i] * &bm[j];
            if i % 2 == 0 {
                out.add_assign_ref(&term);
            } else {
                out.add_assign_ref(&term.neg());
            }
        }
    }
    caches().alt.lock().unwrap().insert(key, Arc::new(out.clone()));
    out
}

/// The same sum computed term by term from the binomial definition (reference implementation).
pub fn alt_sum_direct(l: usize, m: usize, n: usize) -> DiffPoly {
    let mut out = DiffPoly::zero();
    for p in 0..=n as u32 {
        let a = theta_v(p).dx_n(l);
        let b = theta_v(n as u32 - p).dx_n(m);
        let t = &a * &b;
        out = if p % 2 == 0 { &out + &t } else { &out - &t };
    }
    out
}

/// D_k(v^{(m)}): D_k(v) = 0 and D_k(v^{(m)}) = ∂_x D_k(v^{(m-1)}) - [z^{2k}] B_m(z).
pub fn dk_on_jet(k: u32, m: usize) -> DiffPoly {
    assert!(k >= 1, "D_k needs k ≥ 1");
    if m < 2 * k as usize {
        return DiffPoly::zero();
    }
    let key = (k, m);
    if let Some(hit) = caches().dk.lock().unwrap().get(&key) {
        return (**hit).clone();
    }
    let prev = dk_on_jet(k, m - 1);
    let b = exp_jet_series(m);
    let corr = b.get(2 * k as usize).cloned().unwrap_or_default();
    let out = &prev.dx() - &corr;
    caches().dk.lock().unwrap().insert(key, Arc::new(out.clone()));
    out
}

/// D_k(f) = Σ_ℓ ∂f/∂v^{(ℓ)} D_k(v^{(ℓ)}).
pub fn dk_apply(k: u32, f: &DiffPoly) -> DiffPoly {
    let mut out = DiffPoly::zero_in(f.context());
    for l in f.jet_support() {
        if l < 2 * k as usize {
            continue;
        }
        out.add_assign_ref(&(&f.pdiff(l) * &dk_on_jet(k, l)));
    }
    out
}

/// Σ_p (-1)^p ∂f1/∂t_p ∂f2/∂t_{N-p} = -Σ_{l,m} ∂f1/∂v_l ∂f2/∂v_m alt_sum(l+1, m+1, N+2).
pub fn pair_tderiv_altsum(f1: &DiffPoly, f2: &DiffPoly, n: usize) -> DiffPoly {
    let mut out = DiffPoly::zero();
    let d1: Vec<(usize, DiffPoly)> = f1.jet_support().into_iter().map(|l| (l, f1.pdiff(l))).collect();
    let d2: Vec<(usize, DiffPoly)> = f2.jet_support().into_iter().map(|m| (m, f2.pdiff(m))).collect();
    for (l, a) in &d1 {
        for (m, b) in &d2 {
            if n + 2 > l + m + 2 {
                continue;
            }
            let s = alt_sum(l + 1, m + 1, n + 2);
            if s.is_zero() {
                continue;
            }
            out.add_assign_ref(&(&(a * b) * &s));
        }
    }
    out.neg()
}

/// Σ_p (-1)^p ∂²f/∂t_p∂t_{N-p}
///   = -Σ_{l,m} ∂²f/∂v_l∂v_m alt_sum(l+1, m+1, N+2) + δ_{N,0} Σ_l ∂f/∂v_l v_{l+2}.
pub fn second_tderiv_altsum(f: &DiffPoly, n: usize) -> DiffPoly {
    let mut out = DiffPoly::zero();
    let support = f.jet_support();
    for &l in &support {
        let fl = f.pdiff(l);
        for m in fl.jet_support() {
            if n > l + m {
                continue;
            }
            let s = alt_sum(l + 1, m + 1, n + 2);
            if s.is_zero() {
                continue;
            }
            out.add_assign_ref(&(&fl.pdiff(m) * &s));
        }
    }
    out = out.neg();
    if n == 0 {
        for &l in &support {
            out.add_assign_ref(&(&f.pdiff(l) * &DiffPoly::jet(l + 2)));
        }
    }
    out
}

/// Reference: Σ_p (-1)^p ∂f1/∂t_p ∂f2/∂t_{N-p} through `flow_tderiv`.
pub fn pair_tderiv_altsum_direct(f1: &DiffPoly, f2: &DiffPoly, n: usize) -> DiffPoly {
    let mut out = DiffPoly::zero();
    for p in 0..=n as u32 {
        let t = &flow_tderiv(f1, p) * &flow_tderiv(f2, n as u32 - p);
        out = if p % 2 == 0 { &out + &t } else { &out - &t };
    }
    out
}

/// Reference: Σ_p (-1)^p ∂²f/∂t_p∂t_{N-p} through `flow_tderiv`.
pub fn second_tderiv_altsum_direct(f: &DiffPoly, n: usize) -> DiffPoly {
    let mut out = DiffPoly::zero();
    for p in 0..=n as u32 {
        let t = flow_tderiv(&flow_tderiv(f, p), n as u32 - p);
        out = if p % 2 == 0 { &out + &t } else { &out - &t };
    }
    out
}

/// Left and right sides of Ω_{p+s,q} + (-1)^{s-1} Ω_{p,q+s} = Σ_{ℓ<s} (-1)^ℓ Ω_{p,ℓ} Ω_{s-1-ℓ,q}.
pub fn omega_identity_sides(p: u32, q_: u32, s: u32) -> (DiffPoly, DiffPoly) {
    let sign = if (s - 1) % 2 == 0 { qi(1) } else { qi(-1) };
    let lhs = &omega(p + s, q_) + &omega(p, q_ + s).scale(&sign);
    let mut rhs = DiffPoly::zero();
    for l in 0..s {
        let t = &omega(p, l) * &omega(s - 1 - l, q_);
        rhs = if l % 2 == 0 { &rhs + &t } else { &rhs - &t };
    }
    (lhs, rhs)
}

/// Σ_{p=0}^{N} (-1)^p Ω_{p,N-p}.
pub fn omega_alternating_sum(n: u32) -> DiffPoly {
    let mut out = DiffPoly::zero();
    for p in 0..=n {
        let t = omega(p, n - p);
        out = if p % 2 == 0 { &out + &t } else { &out - &t };
    }
    out
}

/// Coefficient of v^k in a v-polynomial (convenience for tests of structure functions).
pub fn v_coefficient(f: &DiffPoly, k: u32) -> Q {
    f.terms()
        .filter(|(j, _, _)| j.exp_v() == k && j.max_jet() == 0 && j.exp_x() == 0)
        .map(|(_, _, c)| c.clone())
        .fold(Q::zero(), |a, b| a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn v(m: usize) -> DiffPoly {
        DiffPoly::jet(m)
    }

    #[test]
    fn structure_functions() {
        for p in 0..6 {
            assert_eq!(theta(p + 1).pdiff(0), theta(p));
            assert_eq!(theta(p).pdiff(0), theta_v(p));
        }
        for p in 0..6 {
            assert_eq!(omega(p, 0), theta(p));
        }
        let f = DiffPoly::jet_pow(0, 3).scale(&q(1, 6));
        assert_eq!(f.pdiff(0).pdiff(0), tr_u());
    }

    #[test]
    fn flows() {
        assert_eq!(flow_tderiv(&v(0), 0), v(1));
        assert_eq!(flow_tderiv(&v(0), 2), (&v(0).pow(2) * &v(1)).scale(&q(1, 2)));
        let expected = &v(1) + &(&(&v(0) * &v(2)) * &DiffPoly::jet_pow(1, -1));
        assert_eq!(flow_tderiv(&DiffPoly::log_v1(), 1), expected);
    }

    #[test]
    fn alt_sum_examples() {
        assert!(alt_sum(0, 0, 1).is_zero());
        assert_eq!(alt_sum(0, 1, 1), v(1));
        assert!(alt_sum(1, 1, 3).is_zero());
        for l in 0..5 {
            for m in 0..5 {
                for n in 0..6 {
                    assert_eq!(alt_sum(l, m, n), alt_sum_direct(l, m, n), "({l},{m},{n})");
                }
            }
        }
    }

    #[test]
    fn dk_examples() {
        assert!(dk_on_jet(1, 1).is_zero());
        assert_eq!(dk_on_jet(1, 2), v(1).pow(2).neg());
        assert!(dk_on_jet(2, 3).is_zero());
        assert!(dk_apply(1, &DiffPoly::log_v1().scale(&q(1, 24))).is_zero());
        assert!(dk_apply(1, &v(0)).is_zero());
        assert_eq!(dk_apply(1, &v(2).pow(2)), (&v(1).pow(2) * &v(2)).scale_int(-2));
    }

    #[test]
    fn tderiv_sum_examples() {
        assert!(second_tderiv_altsum(&v(0), 2).is_zero());
        assert_eq!(pair_tderiv_altsum(&v(0), &v(0), 0), v(1).pow(2));
        let f1 = DiffPoly::log_v1().scale(&q(1, 24));
        assert!(second_tderiv_altsum(&f1, 4).is_zero());
    }

    #[test]
    fn fast_sums_match_flow_route() {
        let f = DiffPoly::parse("(1/1152)*v1^-2*v4 + (-7/1920)*v1^-3*v2*v3 + (1/360)*v1^-4*v2^3").unwrap();
        let h1 = DiffPoly::parse("(1/24)*L + (-1/2)*s1*v").unwrap();
        for n in 0..5 {
            assert_eq!(second_tderiv_altsum(&f, n), second_tderiv_altsum_direct(&f, n), "second, N={n}");
            assert_eq!(second_tderiv_altsum(&h1, n), second_tderiv_altsum_direct(&h1, n), "second H1, N={n}");
            assert_eq!(pair_tderiv_altsum(&f, &h1, n), pair_tderiv_altsum_direct(&f, &h1, n), "pair, N={n}");
        }
    }

    #[test]
    fn lemma_alternating_omega() {
        assert_eq!(omega_alternating_sum(0), v(0));
        for n in 1..=12 {
            assert!(omega_alternating_sum(n).is_zero(), "N={n}");
        }
    }

    #[test]
    fn omega_identity() {
        for p in 0..=6 {
            for q_ in 0..=6 {
                for s in 1..=6 {
                    let (l, r) = omega_identity_sides(p, q_, s);
                    assert_eq!(l, r, "p={p} q={q_} s={s}");
                }
            }
        }
        assert_eq!(v_coefficient(&omega(0, 0), 1), qi(1));
    }
}
