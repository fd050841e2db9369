//! The Hodge hierarchy: the quasi-Miura map w = ∂_x²(Σ ε^{2g} H_g), the deformed flows,
//! the transported Hamiltonian operator and the tau-symmetric densities.
//!
//! Expansions in v-jets and in w-jets share one jet ring; which variable a polynomial
//! lives in is fixed by the method that returns it.

mod operator;
mod substitution;

use std::collections::BTreeSet;

use crate::error::{HodgeError, Result};
use crate::hodge_recursion::hodge_potentials;
use crate::jetring::{DiffPoly, EpsExpansion};
use crate::point_frobenius::{flow_tderiv, flow_velocity, theta};

pub use operator::{DiffOperator, EpsOperator};
pub use substitution::{
    is_trivial_density, shift_expansion, taylor_shift, variational_derivative, variational_derivative_eps,
};

/// w = v + Σ_g ε^{2g} ∂_x² H_g(v) and its inverse v = w + V(w), both to ε^order.
#[derive(Clone, Debug)]
pub struct QuasiMiura {
    order: u32,
    correction: EpsExpansion,
    inverse: EpsExpansion,
}

impl QuasiMiura {
    /// `potentials[g-1]` is H_g; genera up to order/2 are needed. Any list of generators F_k
    /// gives the normal map w = v + Σ ε^{2k} ∂_x² F_k.
    pub fn new(potentials: &[DiffPoly], order: u32) -> Result<Self> {
        check_order(order, potentials.len())?;
        let mut correction = EpsExpansion::zero(order);
        for (i, h) in potentials.iter().enumerate().take((order / 2) as usize) {
            correction.set(2 * (i as u32 + 1), h.dx_n(2));
        }
        // V = −A(w + V), each pass fixes two more orders
        let mut inverse = EpsExpansion::zero(order);
        for _ in 0..order / 2 {
            inverse = shift_expansion(&correction, &inverse).neg();
        }
        Ok(QuasiMiura { order, correction, inverse })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// A(v) with w = v + A(v).
    pub fn correction(&self) -> &EpsExpansion {
        &self.correction
    }

    /// V(w) with v = w + V(w).
    pub fn inverse_correction(&self) -> &EpsExpansion {
        &self.inverse
    }

    pub fn forward(&self) -> EpsExpansion {
        let mut out = self.correction.clone();
        out.add_at(0, &DiffPoly::jet(0));
        out
    }

    /// Rewrite a v-jet expansion in w-jets.
    pub fn to_w(&self, f: &EpsExpansion) -> EpsExpansion {
        shift_expansion(f, &self.inverse)
    }

    /// Rewrite a w-jet expansion in v-jets.
    pub fn to_v(&self, f: &EpsExpansion) -> EpsExpansion {
        shift_expansion(f, &self.correction)
    }

    /// Both compositions of the map with its inverse are the identity to ε^order.
    pub fn check_round_trip(&self) -> Result<()> {
        let a = self.inverse.add(&self.to_w(&self.correction));
        let b = self.correction.add(&self.to_v(&self.inverse));
        if !a.is_zero() || !b.is_zero() {
            return Err(HodgeError::Verification("quasi-Miura map and its inverse do not compose to the identity".into()));
        }
        Ok(())
    }
}

fn check_order(order: u32, genera: usize) -> Result<()> {
    if order % 2 == 1 {
        return Err(HodgeError::InvalidArgument(format!("ε-order {order} must be even")));
    }
    if genera < (order / 2) as usize {
        return Err(HodgeError::MissingData(format!("ε-order {order} needs H_1..H_{}, got {genera}", order / 2)));
    }
    Ok(())
}

/// The image ℓ ∘ P ∘ ℓ† of an operator in the old variable under the map, ℓ its linearization,
/// with coefficients rewritten in the new variable.
pub fn transport_operator(miura: &QuasiMiura, p: &EpsOperator) -> EpsOperator {
    let order = miura.order.min(p.order());
    let mut ell = EpsOperator::leading(DiffOperator::identity(), order);
    for (n, a) in miura.correction.iter() {
        let mut op = DiffOperator::zero();
        for s in a.jet_support() {
            op.add_at(s as u32, &a.pdiff(s));
        }
        ell.add_at(n, &op);
    }
    let old = ell.compose(p).compose(&ell.adjoint());
    let powers: BTreeSet<u32> = old.iter().flat_map(|(_, op)| op.terms().map(|(k, _)| k)).collect();
    let mut out = EpsOperator::zero(order);
    for k in powers {
        for (n, c) in miura.to_w(&old.coefficient(k)).iter() {
            out.add_at(n, &DiffOperator::monomial(k, c.clone()));
        }
    }
    out
}

/// Σ_ℓ ∂f/∂w_ℓ · ∂_x^ℓ(velocity) for ε-expansions.
pub fn evolve_eps(f: &EpsExpansion, velocity: &EpsExpansion) -> EpsExpansion {
    let order = f.order().min(velocity.order());
    let top = f.max_jet();
    let mut out = EpsExpansion::zero(order);
    let mut dv = velocity.clone();
    for l in 0..=top {
        let part = f.pdiff(l);
        if !part.is_zero() {
            out = out.add(&part.mul(&dv));
        }
        if l < top {
            dv = dv.dx();
        }
    }
    out
}

/// The hierarchy in the normal coordinate w, built from given Hodge potentials.
#[derive(Clone, Debug)]
pub struct Hierarchy {
    potentials: Vec<DiffPoly>,
    miura: QuasiMiura,
}

impl Hierarchy {
    pub fn new(potentials: Vec<DiffPoly>, order: u32) -> Result<Self> {
        let miura = QuasiMiura::new(&potentials, order)?;
        Ok(Hierarchy { potentials, miura })
    }

    /// The generic hierarchy with symbolic s_k.
    pub fn generic(order: u32) -> Result<Self> {
        check_order(order, usize::MAX)?;
        let sys = hodge_potentials(order / 2)?;
        let pots = (1..=order / 2).map(|g| sys.potential(g).cloned()).collect::<Result<Vec<_>>>()?;
        Self::new(pots, order)
    }

    pub fn order(&self) -> u32 {
        self.miura.order
    }

    pub fn miura(&self) -> &QuasiMiura {
        &self.miura
    }

    pub fn potentials(&self) -> &[DiffPoly] {
        &self.potentials
    }

    /// ∂w/∂t along the principal flow ∂v/∂t = velocity(v), in w-jets.
    pub fn flow_along(&self, velocity: &DiffPoly) -> EpsExpansion {
        let mut in_v = EpsExpansion::leading(velocity.clone(), self.order());
        for (n, a) in self.miura.correction.iter() {
            in_v.add_at(n, &crate::point_frobenius::evolve(a, velocity));
        }
        self.miura.to_w(&in_v)
    }

    /// ∂w/∂t_q.
    pub fn flow(&self, q: u32) -> EpsExpansion {
        self.flow_along(&flow_velocity(q))
    }

    /// P̃ = ℓ ∘ ∂_x ∘ ℓ† with ℓ = Σ_s ∂w/∂v_s ∂_x^s, coefficients rewritten in w.
    pub fn operator(&self) -> EpsOperator {
        transport_operator(&self.miura, &EpsOperator::leading(DiffOperator::d(), self.order()))
    }

    /// Density h̃_q of H̃_q (q ≥ −1) in w-jets; h̃_{−1} = w.
    pub fn density(&self, q: i32) -> Result<EpsExpansion> {
        if q < -1 {
            return Err(HodgeError::InvalidArgument(format!("density index {q} below -1")));
        }
        let order = self.order();
        let p = (q + 1) as u32;
        let lead = if q == -1 { DiffPoly::jet(0) } else { theta(p) };
        let mut in_v = EpsExpansion::leading(lead, order);
        for (i, h) in self.potentials.iter().enumerate() {
            let n = 2 * (i as u32 + 1);
            if n <= order {
                in_v.add_at(n, &flow_tderiv(h, p).dx());
            }
        }
        Ok(self.miura.to_w(&in_v))
    }

    /// ∂f/∂t_q for a w-jet expansion.
    pub fn time_derivative(&self, f: &EpsExpansion, q: u32) -> EpsExpansion {
        evolve_eps(f, &self.flow(q))
    }

    /// ∂w/∂t_q − P̃ δH̃_q/δw, which vanishes.
    pub fn hamiltonian_defect(&self, q: u32) -> Result<EpsExpansion> {
        let h = self.density(q as i32)?;
        let rhs = self.operator().apply(&variational_derivative_eps(&h));
        Ok(self.flow(q).sub(&rhs))
    }

    /// ∂h̃_{p−1}/∂t_q − ∂h̃_{q−1}/∂t_p.
    pub fn tau_defect(&self, p: u32, q: u32) -> Result<EpsExpansion> {
        let a = self.time_derivative(&self.density(p as i32 - 1)?, q);
        let b = self.time_derivative(&self.density(q as i32 - 1)?, p);
        Ok(a.sub(&b))
    }

    /// ∂_{t_p}(∂w/∂t_q) − ∂_{t_q}(∂w/∂t_p).
    pub fn commutator(&self, p: u32, q: u32) -> EpsExpansion {
        self.time_derivative(&self.flow(q), p).sub(&self.time_derivative(&self.flow(p), q))
    }

    /// P̃ applied to δ∫w/δw = 1.
    pub fn casimir_defect(&self) -> EpsExpansion {
        self.operator().apply(&EpsExpansion::leading(DiffPoly::one(), self.order()))
    }

    /// Run every structural check to ε^order for flows and densities with index ≤ max_q.
    pub fn verify(&self, max_q: u32) -> Result<()> {
        self.miura.check_round_trip()?;
        let op = self.operator();
        if !op.is_skew_adjoint() {
            return Err(HodgeError::Verification("P̃ is not skew-adjoint".into()));
        }
        if !self.casimir_defect().is_zero() {
            return Err(HodgeError::Verification("∫w is not a Casimir of P̃".into()));
        }
        for q in 0..=max_q {
            if !self.hamiltonian_defect(q)?.is_zero() {
                return Err(HodgeError::Verification(format!("flow t_{q} differs from P̃ δH̃_{q}/δw")));
            }
            for p in 0..q {
                if !self.tau_defect(p, q)?.is_zero() {
                    return Err(HodgeError::Verification(format!("tau-symmetry fails for ({p}, {q})")));
                }
                if !self.commutator(p, q).is_zero() {
                    return Err(HodgeError::Verification(format!("flows t_{p} and t_{q} do not commute")));
                }
            }
        }
        Ok(())
    }
}

/// Whether every ε-coefficient is a differential polynomial: no negative powers of w_x and no log.
pub fn is_polynomial(f: &EpsExpansion) -> bool {
    f.iter().all(|(_, p)| p.terms().all(|(j, _, _)| j.exp_v1() >= 0 && j.exp_l() == 0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(s: &str) -> DiffPoly {
        DiffPoly::parse(s).unwrap()
    }

    fn hier() -> Hierarchy {
        Hierarchy::generic(4).unwrap()
    }

    #[test]
    fn quasi_miura_terms() {
        let h = hier();
        let a = h.miura().correction();
        assert_eq!(a.get(2), poly("(-1/2)*s1*v2 + (-1/24)*v1^-2*v2^2 + (1/24)*v1^-1*v3"));
        let want4 = poly(
            "(1/18)*v1^-6*v2^5 + (-35/288)*v1^-5*v2^3*v3 + (19/384)*v1^-4*v2*v3^2 + (17/480)*v1^-4*v2^2*v4 \
             + (-73/5760)*v1^-3*v3*v4 + (-41/5760)*v1^-3*v2*v5 + (1/1152)*v1^-2*v6 \
             + (11/80)*s1*v1^-4*v2^4 + (-67/240)*s1*v1^-3*v2^2*v3 + (17/240)*s1*v1^-2*v3^2 \
             + (23/240)*s1*v1^-2*v2*v4 + (-1/40)*s1*v1^-1*v5 + (7/40)*s1^2*v4 \
             + (-1/5)*s1^3*v2^2 + (-1/5)*s1^3*v1*v3 + (-1/24)*s2*v2^2 + (-1/24)*s2*v1*v3",
        );
        assert_eq!(a.get(4), want4);
        h.miura().check_round_trip().unwrap();
    }

    #[test]
    fn first_flows() {
        let h = hier();
        assert_eq!(h.flow(0), EpsExpansion::leading(DiffPoly::jet(1), 4));
        let f1 = h.flow(1);
        assert_eq!(f1.get(0), poly("(1)*v*v1"));
        assert_eq!(f1.get(2), poly("(1/12)*v3 + (-1)*s1*v1*v2"));
        let want4 = poly(
            "(-1/60)*s1*v5 + (1)*s1^2*v2*v3 + (1/5)*s1^2*v1*v4 + (-8/5)*s1^3*v1*v2^2 \
             + (-4/5)*s1^3*v1^2*v3 + (-1/3)*s2*v1*v2^2 + (-1/6)*s2*v1^2*v3",
        );
        assert_eq!(f1.get(4), want4);
        assert!(is_polynomial(&h.flow(2)));
        assert!(is_polynomial(&h.flow(3)));
    }

    #[test]
    fn deformed_operator() {
        let op = hier().operator();
        assert_eq!(op.get(0), DiffOperator::d());
        assert_eq!(op.get(2), DiffOperator::monomial(3, poly("(-1)*s1")));
        assert_eq!(op.get(4), DiffOperator::monomial(5, poly("(3/5)*s1^2")));
        assert!(op.is_skew_adjoint());
    }

    #[test]
    fn first_hamiltonians() {
        let h = hier();
        let h0 = h.density(0).unwrap();
        let want0 = poly("(1/2)*v^2");
        assert_eq!(h0.get(0), want0);
        assert!(is_trivial_density(&(&h0.get(2) - &poly("(-1/2)*s1*v1^2"))));
        assert!(is_trivial_density(&(&h0.get(4) - &poly("(1/5)*s1^2*v2^2"))));
        let h1 = h.density(1).unwrap();
        assert_eq!(h1.get(0), poly("(1/6)*v^3"));
        assert!(is_trivial_density(&(&h1.get(2) - &poly("(-1/24)*v1^2 + (-1/2)*s1*v*v1^2"))));
        let want = poly(
            "(-1/5)*s1^3*v*v1^2*v2 + (-1/24)*s2*v*v1^2*v2 + (1/30)*s1*v2^2 + (1/5)*s1^2*v*v2^2",
        );
        assert!(is_trivial_density(&(&h1.get(4) - &want)));
        assert_eq!(h.density(-1).unwrap(), EpsExpansion::leading(DiffPoly::jet(0), 4));
    }

    #[test]
    fn structure_checks() {
        hier().verify(3).unwrap();
    }

    #[test]
    fn order_six() {
        let h = Hierarchy::generic(6).unwrap();
        let op = h.operator();
        assert_eq!(op.get(6).coeff(7), poly("(-31/105)*s1^3 + (-1/504)*s2"));
        assert!(is_polynomial(&op.coefficient(5)));
        assert!(is_polynomial(&h.flow(1)));
        assert!(is_polynomial(&h.density(1).unwrap()));
        h.verify(2).unwrap();
    }

    #[test]
    fn odd_order_rejected() {
        assert!(Hierarchy::generic(3).is_err());
        assert!(Hierarchy::new(vec![], 2).is_err());
    }
}
