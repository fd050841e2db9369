//! The stage-by-stage recursion for the Hodge potentials H_g of a point.
//!
//! Stage h turns on s_h: H_{g,h} = Σ_j H^{(j)} s_h^j with H^{(0)} = H_{g,h−1} and
//! j H^{(j)} = D_h H^{(j−1)} + [s_h^{j−1}] E_{h,g,h}.

use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{HodgeError, Result};
use crate::free_energy::{free_energy, FreeEnergy, Provenance};
use crate::jetring::{DiffPoly, ParamMono, ParamPoly, Symbol};
use crate::point_frobenius::{dk_apply, omega_alternating_sum, pair_tderiv_altsum, second_tderiv_altsum};
use num_traits::One;

use crate::rational::{q, Q};

/// N(g,h) = ⌊(3g−3)/(2h−1)⌋, the s_h-degree bound of H_{g,h}; genus one uses 1 at h = 1.
pub fn n_bound(g: u32, h: u32) -> u32 {
    if g == 1 {
        return u32::from(h == 1);
    }
    (3 * g - 3) / (2 * h - 1)
}

/// Identifies a cached stage: genus, stage index and a description of the free energies used.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StageKey {
    pub genus: u32,
    pub stage: u32,
    pub provenance: String,
}

/// Persistence for computed stages. Loaded stages are re-verified before use.
pub trait StageStore {
    fn load(&self, key: &StageKey) -> Option<DiffPoly>;
    fn store(&self, key: &StageKey, value: &DiffPoly) -> Result<()>;
}

#[derive(Clone, Debug, Default)]
pub struct HodgeOptions {
    /// Run stage g+1 for every genus and require it to change nothing.
    pub verify_extra_stage: bool,
}

#[derive(Clone, Debug)]
pub struct HodgePotentialTable {
    pub genus: u32,
    /// stages[h] = H_{g,h}, h = 0..=g.
    pub stages: Vec<DiffPoly>,
    pub free_energy: FreeEnergy,
    pub extra_stage_verified: bool,
}

impl HodgePotentialTable {
    pub fn potential(&self) -> &DiffPoly {
        self.stages.last().expect("stage 0 always present")
    }

    /// H_{g,h}; stages beyond g coincide with H_g.
    pub fn stage(&self, h: u32) -> &DiffPoly {
        &self.stages[(h as usize).min(self.stages.len() - 1)]
    }
}

/// E_{k,g,k} = −½ Σ_p (−1)^p [∂²H_{g−1}/∂t_p∂t_{2k−2−p} + Σ_ℓ ∂H_ℓ/∂t_p ∂H_{g−ℓ}/∂t_{2k−2−p}],
/// with `lower(ℓ)` returning H_{ℓ,k}. Genus one uses H_0 = F_0 through the Ω-sum.
pub fn e_term(k: u32, g: u32, lower: &dyn Fn(u32) -> DiffPoly) -> DiffPoly {
    let n = 2 * k as usize - 2;
    let half = q(-1, 2);
    if g == 1 {
        return omega_alternating_sum(n as u32).scale(&half);
    }
    let mut acc = second_tderiv_altsum(&lower(g - 1), n);
    for l in 1..g {
        let m = g - l;
        if l > m {
            break;
        }
        let pair = pair_tderiv_altsum(&lower(l), &lower(m), n);
        if l == m {
            acc.add_assign_ref(&pair);
        } else {
            acc.add_scaled(&pair, &Q::from_integer(2.into()));
        }
    }
    acc.scale(&half)
}

/// Bounds every stage must respect (g ≥ 2): homogeneous deg 2g−2, degbar of the s_h^j
/// coefficient ≤ 3g−3−(2h−1)j, no v dependence.
fn check_stage(g: u32, h: u32, j: u32, piece: &DiffPoly) -> Result<()> {
    if g < 2 || piece.is_zero() {
        return Ok(());
    }
    let ctx = || format!("H_{{{g},{h}}} coefficient of s_{h}^{j}");
    match piece.deg_range() {
        Some((lo, hi)) if lo == hi && hi == 2 * g as i64 - 2 => {}
        other => return Err(HodgeError::DegreeBound(format!("{}: deg range {other:?}", ctx()))),
    }
    let bound = 3 * g as i64 - 3 - (2 * h as i64 - 1) * j as i64;
    if piece.degbar() > bound {
        return Err(HodgeError::DegreeBound(format!("{}: degbar {} > {bound}", ctx(), piece.degbar())));
    }
    if !piece.pdiff(0).is_zero() {
        return Err(HodgeError::DegreeBound(format!("{}: depends on v", ctx())));
    }
    Ok(())
}

/// One stage of the recursion. The coefficient of s_h^{N+1} is computed and must vanish.
pub fn recursion_step(g: u32, h: u32, previous: &DiffPoly, e: &DiffPoly) -> Result<DiffPoly> {
    let n = n_bound(g, h);
    let sh = Symbol::S(h);
    let mut total = previous.clone();
    let mut cur = previous.clone();
    for j in 1..=n + 1 {
        let mut next = dk_apply(h, &cur);
        next.add_assign_ref(&e.coeff_of(sh, j - 1));
        next = next.scale(&q(1, j as i64));
        if j == n + 1 {
            if !next.is_zero() {
                return Err(HodgeError::DegreeBound(format!(
                    "H_{{{g},{h}}}: coefficient of s_{h}^{j} beyond N = {n} is {}",
                    next.canonical_text()
                )));
            }
            break;
        }
        check_stage(g, h, j, &next)?;
        total.add_assign_ref(&next.mul_param(&ParamPoly::monomial(ParamMono::var(sh, j), Q::one())));
        cur = next;
    }
    Ok(total)
}

/// Fingerprint of the inputs a genus-g stage depends on.
pub fn stage_provenance(frees: &[FreeEnergy]) -> String {
    frees
        .iter()
        .map(|f| {
            let tag = match &f.provenance {
                Provenance::ClosedForm => "closed".to_string(),
                Provenance::Fitted { degree, .. } => format!("fit{degree}"),
            };
            format!("F{}[{tag}]={}", f.genus, f.poly.canonical_text())
        })
        .collect::<Vec<_>>()
        .join(";")
}

/// Hodge potentials H_1, …, H_G computed together.
#[derive(Clone, Debug)]
pub struct HodgeSystem {
    tables: Vec<HodgePotentialTable>,
}

impl HodgeSystem {
    pub fn build(max_genus: u32, opts: &HodgeOptions, store: Option<&dyn StageStore>) -> Result<Self> {
        let mut sys = HodgeSystem { tables: Vec::new() };
        sys.extend_to(max_genus, opts, store)?;
        Ok(sys)
    }

    pub fn max_genus(&self) -> u32 {
        self.tables.len() as u32
    }

    pub fn table(&self, g: u32) -> Result<&HodgePotentialTable> {
        self.tables
            .get(g.checked_sub(1).ok_or_else(|| HodgeError::InvalidArgument("genus 0 has no table".into()))? as usize)
            .ok_or_else(|| HodgeError::MissingData(format!("H_{g} not computed (max genus {})", self.max_genus())))
    }

    pub fn potential(&self, g: u32) -> Result<&DiffPoly> {
        Ok(self.table(g)?.potential())
    }

    /// H_{ℓ,h} for ℓ already computed.
    pub fn stage(&self, l: u32, h: u32) -> Result<&DiffPoly> {
        Ok(self.table(l)?.stage(h))
    }

    pub fn extend_to(&mut self, max_genus: u32, opts: &HodgeOptions, store: Option<&dyn StageStore>) -> Result<()> {
        let mut frees: Vec<FreeEnergy> = self.tables.iter().map(|t| t.free_energy.clone()).collect();
        for g in self.max_genus() + 1..=max_genus {
            let f = free_energy(g)?;
            frees.push(f.clone());
            let provenance = stage_provenance(&frees);
            let mut stages = vec![f.poly.clone()];
            for h in 1..=g {
                let key = StageKey { genus: g, stage: h, provenance: provenance.clone() };
                let cached = store.and_then(|s| s.load(&key));
                let next = match cached {
                    Some(v) if self.cached_stage_valid(g, h, &stages[h as usize - 1], &v) => v,
                    _ => {
                        let e = e_term(h, g, &|l| self.tables[l as usize - 1].stage(h).clone());
                        let v = recursion_step(g, h, &stages[h as usize - 1], &e)?;
                        if let Some(s) = store {
                            s.store(&key, &v)?;
                        }
                        v
                    }
                };
                stages.push(next);
            }
            let mut table = HodgePotentialTable { genus: g, stages, free_energy: f, extra_stage_verified: false };
            if opts.verify_extra_stage {
                verify_extra_stage(&table, &|l| self.tables[l as usize - 1].potential().clone())?;
                table.extra_stage_verified = true;
            }
            self.tables.push(table);
        }
        Ok(())
    }

    /// A cached H_{g,h} is accepted if it restricts to H_{g,h−1} and passes the stage bounds.
    fn cached_stage_valid(&self, g: u32, h: u32, prev: &DiffPoly, v: &DiffPoly) -> bool {
        let sh = Symbol::S(h);
        if v.coeff_of(sh, 0) != *prev {
            return false;
        }
        (1..=n_bound(g, h)).all(|j| check_stage(g, h, j, &v.coeff_of(sh, j)).is_ok())
            && v.max_degree_in(sh) <= n_bound(g, h)
    }
}

/// Run stage g+1 on H_g and require the result to equal H_g.
pub fn verify_extra_stage(table: &HodgePotentialTable, lower: &dyn Fn(u32) -> DiffPoly) -> Result<()> {
    let g = table.genus;
    let h = g + 1;
    let e = e_term(h, g, lower);
    let again = recursion_step(g, h, table.potential(), &e)?;
    if &again != table.potential() {
        let diff = &again - table.potential();
        return Err(HodgeError::Verification(format!(
            "H_{g} changes at stage {h}: difference {}",
            diff.canonical_text()
        )));
    }
    Ok(())
}

fn shared() -> &'static Mutex<Option<Arc<HodgeSystem>>> {
    static S: OnceLock<Mutex<Option<Arc<HodgeSystem>>>> = OnceLock::new();
    S.get_or_init(|| Mutex::new(None))
}

/// Process-wide memoized system covering at least `max_genus`.
pub fn hodge_potentials(max_genus: u32) -> Result<Arc<HodgeSystem>> {
    let mut guard = shared().lock().unwrap();
    if let Some(sys) = guard.as_ref() {
        if sys.max_genus() >= max_genus {
            return Ok(sys.clone());
        }
    }
    let mut sys = guard.as_ref().map(|s| (**s).clone()).unwrap_or(HodgeSystem { tables: Vec::new() });
    sys.extend_to(max_genus, &HodgeOptions::default(), None)?;
    let sys = Arc::new(sys);
    *guard = Some(sys.clone());
    Ok(sys)
}

/// Make `sys` the shared system unless a larger one is already installed.
pub fn install_hodge_system(sys: HodgeSystem) {
    let mut guard = shared().lock().unwrap();
    if guard.as_ref().is_none_or(|cur| cur.max_genus() < sys.max_genus()) {
        *guard = Some(Arc::new(sys));
    }
}

/// H_g from the shared system.
pub fn hodge_potential(g: u32) -> Result<DiffPoly> {
    Ok(hodge_potentials(g)?.potential(g)?.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::free_energy::{f1, f2};
    use crate::point_frobenius::dk_apply;

    fn h2_published() -> DiffPoly {
        let s = "(1/1152)*v1^-2*v4 + (-7/1920)*v1^-3*v2*v3 + (1/360)*v1^-4*v2^3 \
                 + (11/480)*s1*v1^-2*v2^2 + (-1/40)*s1*v1^-1*v3 + (7/40)*s1^2*v2 \
                 + (-1/10)*s1^3*v1^2 + (-1/48)*s2*v1^2";
        DiffPoly::parse(s).unwrap()
    }

    #[test]
    fn genus_one() {
        let h1 = hodge_potential(1).unwrap();
        assert_eq!(h1, DiffPoly::parse("(1/24)*L + (-1/2)*s1*v").unwrap());
        assert_eq!(e_term(1, 1, &|_| unreachable!()), DiffPoly::parse("(-1/2)*v").unwrap());
        assert!(e_term(2, 1, &|_| unreachable!()).is_zero());
    }

    #[test]
    fn genus_two_matches_closed_form() {
        assert_eq!(hodge_potential(2).unwrap(), h2_published());
        let sys = hodge_potentials(2).unwrap();
        let stage1 = sys.stage(2, 1).unwrap();
        assert_eq!(stage1, &h2_published().filter(|_, p| p.exponent(Symbol::S(2)) == 0));
    }

    #[test]
    fn first_e_term_of_genus_two() {
        let e = e_term(1, 2, &|_| f1());
        let expect = DiffPoly::parse("(-1/48)*v1^-1*v3 + (23/1152)*v1^-2*v2^2").unwrap();
        assert_eq!(e, expect);
    }

    #[test]
    fn extra_stage_and_bounds_through_genus_three() {
        let sys = HodgeSystem::build(3, &HodgeOptions { verify_extra_stage: true }, None).unwrap();
        for g in 1..=3 {
            let t = sys.table(g).unwrap();
            assert!(t.extra_stage_verified);
            assert_eq!(t.stages[0], free_energy(g).unwrap().poly);
            for h in 1..=g {
                let sh = Symbol::S(h);
                assert_eq!(t.stages[h as usize].coeff_of(sh, 0), t.stages[h as usize - 1]);
                assert!(t.stages[h as usize].max_degree_in(sh) <= n_bound(g, h));
            }
        }
        let h3 = sys.potential(3).unwrap();
        assert!(h3.degbar() <= 6);
        assert!(h3.pdiff(0).is_zero());
    }

    #[test]
    fn free_energy_identities_for_large_k() {
        // Σ(−1)^p ∂²F_{g−1}/∂t_p∂t_{2k−2−p} = 0 and D_k F_g + E_{k,g}|_{s=0} = 0 for k ≥ g+1
        let fs = [f1(), f2(), free_energy(3).unwrap().poly];
        for g in 2..=3u32 {
            for k in g + 1..=g + 2 {
                assert!(second_tderiv_altsum(&fs[g as usize - 2], 2 * k as usize - 2).is_zero(), "g={g} k={k}");
            }
        }
        for g in 1..=3u32 {
            for k in g + 1..=g + 2 {
                let mut lhs = dk_apply(k, &fs[g as usize - 1]);
                lhs.add_assign_ref(&e_term(k, g, &|l| fs[l as usize - 1].clone()));
                assert!(lhs.is_zero(), "g={g} k={k}");
            }
        }
        // D_k F_g − ½ Σ_m pair(F_m, F_{g−m}) = 0 for k ≥ g
        for g in 2..=3u32 {
            for k in g..=g + 1 {
                let mut lhs = dk_apply(k, &fs[g as usize - 1]);
                for m in 1..g {
                    let p = pair_tderiv_altsum(&fs[m as usize - 1], &fs[(g - m) as usize - 1], 2 * k as usize - 2);
                    lhs.add_scaled(&p, &q(-1, 2));
                }
                assert!(lhs.is_zero(), "g={g} k={k}");
            }
        }
    }

    #[test]
    fn genus_four_bounds() {
        let sys = HodgeSystem::build(4, &HodgeOptions { verify_extra_stage: true }, None).unwrap();
        let h4 = sys.potential(4).unwrap();
        assert!(h4.degbar() <= 9);
        assert!(h4.pdiff(0).is_zero());
        assert_eq!(h4.coeff_of(Symbol::S(1), 0).coeff_of(Symbol::S(2), 0).coeff_of(Symbol::S(3), 0).coeff_of(Symbol::S(4), 0), free_energy(4).unwrap().poly);
    }

    #[test]
    fn n_bounds() {
        assert_eq!(n_bound(2, 1), 3);
        assert_eq!(n_bound(2, 2), 1);
        assert_eq!(n_bound(4, 1), 9);
        assert_eq!(n_bound(4, 5), 1);
        assert_eq!(n_bound(3, 4), 0);
    }
}
