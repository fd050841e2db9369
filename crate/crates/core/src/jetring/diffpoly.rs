//! Differential polynomials: sparse sums of parameter monomial × jet monomial with rational coefficients.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, OnceLock};

use num_traits::{One, Zero};

use super::monomial::{JetIndex, JetMonomial};
use super::param::{ParamMono, ParamPoly, Symbol};
use crate::error::{HodgeError, Result};
use crate::rational::{qi, Q};

/// Sentinel returned by [`DiffPoly::degbar`] on the zero polynomial.
pub const DEGBAR_ZERO: i64 = i64::MIN;

/// Ring context. `exp_rate` is μ in X = e^{μv}; X is only available when it is set.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct RingContext {
    pub exp_rate: Option<ParamPoly>,
}

impl RingContext {
    pub fn plain() -> Arc<RingContext> {
        static PLAIN: OnceLock<Arc<RingContext>> = OnceLock::new();
        PLAIN.get_or_init(|| Arc::new(RingContext::default())).clone()
    }

    pub fn with_exp(mu: ParamPoly) -> Arc<RingContext> {
        Arc::new(RingContext { exp_rate: Some(mu) })
    }
}

fn merge_ctx(a: &Arc<RingContext>, b: &Arc<RingContext>) -> Result<Arc<RingContext>> {
    if Arc::ptr_eq(a, b) || a == b {
        return Ok(a.clone());
    }
    match (&a.exp_rate, &b.exp_rate) {
        (None, _) => Ok(b.clone()),
        (_, None) => Ok(a.clone()),
        (Some(x), Some(y)) => Err(HodgeError::ContextMismatch(format!("exponential rates {x} and {y}"))),
    }
}

pub type TermKey = (JetMonomial, ParamMono);

#[derive(Clone, Debug)]
pub struct DiffPoly {
    ctx: Arc<RingContext>,
    terms: BTreeMap<TermKey, Q>,
}

impl PartialEq for DiffPoly {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl Eq for DiffPoly {}

impl Default for DiffPoly {
    fn default() -> Self {
        Self::zero()
    }
}

impl DiffPoly {
    pub fn zero() -> Self {
        DiffPoly { ctx: RingContext::plain(), terms: BTreeMap::new() }
    }

    pub fn zero_in(ctx: &Arc<RingContext>) -> Self {
        DiffPoly { ctx: ctx.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(c: Q) -> Self {
        Self::term(JetMonomial::one(), ParamMono::one(), c)
    }

    pub fn one() -> Self {
        Self::constant(Q::one())
    }

    pub fn term(j: JetMonomial, p: ParamMono, c: Q) -> Self {
        let mut out = Self::zero();
        out.add_term(j, p, c);
        out
    }

    /// The jet variable v_m (m = 0 is v).
    pub fn jet(m: JetIndex) -> Self {
        Self::term(JetMonomial::jet(m, 1), ParamMono::one(), Q::one())
    }

    /// v_m^e; negative e is allowed for m = 1.
    pub fn jet_pow(m: JetIndex, e: i32) -> Self {
        Self::term(JetMonomial::jet(m, e), ParamMono::one(), Q::one())
    }

    pub fn log_v1() -> Self {
        Self::term(JetMonomial::log_v1(1), ParamMono::one(), Q::one())
    }

    /// The generator X = e^{μv} in an exponential context.
    pub fn exp_gen(ctx: &Arc<RingContext>) -> Result<Self> {
        if ctx.exp_rate.is_none() {
            return Err(HodgeError::ContextMismatch("X requires an exponential context".into()));
        }
        let mut out = Self::zero_in(ctx);
        out.add_term(JetMonomial::exp_gen(1), ParamMono::one(), Q::one());
        Ok(out)
    }

    pub fn param(p: &ParamPoly) -> Self {
        let mut out = Self::zero();
        for (m, c) in p.terms() {
            out.add_term(JetMonomial::one(), m.clone(), c.clone());
        }
        out
    }

    pub fn symbol(s: Symbol) -> Self {
        Self::term(JetMonomial::one(), ParamMono::var(s, 1), Q::one())
    }

    pub fn context(&self) -> &Arc<RingContext> {
        &self.ctx
    }

    pub fn with_context(mut self, ctx: &Arc<RingContext>) -> Result<Self> {
        self.ctx = merge_ctx(&self.ctx, ctx)?;
        Ok(self)
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

    pub fn terms(&self) -> impl Iterator<Item = (&JetMonomial, &ParamMono, &Q)> {
        self.terms.iter().map(|((j, p), c)| (j, p, c))
    }

    pub fn coeff(&self, j: &JetMonomial, p: &ParamMono) -> Q {
        self.terms.get(&(j.clone(), p.clone())).cloned().unwrap_or_else(Q::zero)
    }

    pub fn add_term(&mut self, j: JetMonomial, p: ParamMono, c: Q) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry((j, p)) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    fn from_map(ctx: Arc<RingContext>, map: HashMap<TermKey, Q>) -> Self {
        let terms = map.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        DiffPoly { ctx, terms }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        let ctx = merge_ctx(&self.ctx, &other.ctx)?;
        let (big, small) = if self.len() >= other.len() { (self, other) } else { (other, self) };
        let mut out = DiffPoly { ctx, terms: big.terms.clone() };
        for (k, c) in &small.terms {
            out.add_term(k.0.clone(), k.1.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn add_assign_ref(&mut self, other: &Self) {
        self.ctx = merge_ctx(&self.ctx, &other.ctx).expect("ring context mismatch");
        for (k, c) in &other.terms {
            self.add_term(k.0.clone(), k.1.clone(), c.clone());
        }
    }

    /// self += k * other
    pub fn add_scaled(&mut self, other: &Self, k: &Q) {
        if k.is_zero() {
            return;
        }
        self.ctx = merge_ctx(&self.ctx, &other.ctx).expect("ring context mismatch");
        for (key, c) in &other.terms {
            self.add_term(key.0.clone(), key.1.clone(), c * k);
        }
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        let ctx = merge_ctx(&self.ctx, &other.ctx)?;
        if self.is_zero() || other.is_zero() {
            return Ok(DiffPoly { ctx, terms: BTreeMap::new() });
        }
        let mut acc: HashMap<TermKey, Q> = HashMap::with_capacity(self.len() * other.len());
        for ((ja, pa), ca) in &self.terms {
            for ((jb, pb), cb) in &other.terms {
                let key = (ja.mul(jb), pa.mul(pb));
                let c = ca * cb;
                match acc.get_mut(&key) {
                    Some(x) => *x += c,
                    None => {
                        acc.insert(key, c);
                    }
                }
            }
        }
        Ok(Self::from_map(ctx, acc))
    }

    pub fn neg(&self) -> Self {
        DiffPoly { ctx: self.ctx.clone(), terms: self.terms.iter().map(|(k, c)| (k.clone(), -c)).collect() }
    }

    pub fn scale(&self, k: &Q) -> Self {
        if k.is_zero() {
            return Self::zero_in(&self.ctx);
        }
        DiffPoly { ctx: self.ctx.clone(), terms: self.terms.iter().map(|(key, c)| (key.clone(), c * k)).collect() }
    }

    pub fn scale_int(&self, k: i64) -> Self {
        self.scale(&qi(k))
    }

    pub fn mul_param(&self, p: &ParamPoly) -> Self {
        self * &DiffPoly::param(p)
    }

    pub fn mul_jet(&self, j: &JetMonomial) -> Self {
        DiffPoly {
            ctx: self.ctx.clone(),
            terms: self.terms.iter().map(|((a, p), c)| ((a.mul(j), p.clone()), c.clone())).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one().with_context(&self.ctx).expect("context");
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Total x-derivative.
    pub fn dx(&self) -> Self {
        let mut acc: HashMap<TermKey, Q> = HashMap::with_capacity(self.len() * 3);
        let mut push = |j: JetMonomial, p: ParamMono, c: Q| match acc.get_mut(&(j.clone(), p.clone())) {
            Some(x) => *x += c,
            None => {
                acc.insert((j, p), c);
            }
        };
        for ((j, p), c) in &self.terms {
            if j.v > 0 {
                let mut m = j.clone();
                m.v -= 1;
                m.v1 += 1;
                push(m, p.clone(), c * qi(j.v as i64));
            }
            if j.v1 != 0 {
                let mut m = j.clone();
                m.v1 -= 1;
                m.bump(2, 1);
                push(m, p.clone(), c * qi(j.v1 as i64));
            }
            for (mm, e) in j.exp_higher() {
                let mut m = j.clone();
                m.bump(mm, -1);
                m.bump(mm + 1, 1);
                push(m, p.clone(), c * qi(e as i64));
            }
            if j.l > 0 {
                let mut m = j.clone();
                m.l -= 1;
                m.v1 -= 1;
                m.bump(2, 1);
                push(m, p.clone(), c * qi(j.l as i64));
            }
            if j.x > 0 {
                let mu = self.ctx.exp_rate.as_ref().expect("X outside an exponential context");
                let mut m = j.clone();
                m.v1 += 1;
                let k = c * qi(j.x as i64);
                for (pm, mc) in mu.terms() {
                    push(m.clone(), p.mul(pm), &k * mc);
                }
            }
        }
        Self::from_map(self.ctx.clone(), acc)
    }

    pub fn dx_n(&self, n: usize) -> Self {
        let mut out = self.clone();
        for _ in 0..n {
            out = out.dx();
        }
        out
    }

    /// Partial derivative in the jet variable m, with ∂L/∂v1 = 1/v1 and ∂X/∂v = μX.
    pub fn pdiff(&self, var: JetIndex) -> Self {
        let mut out = Self::zero_in(&self.ctx);
        for ((j, p), c) in &self.terms {
            let e = j.exp(var);
            if e != 0 {
                let mut m = j.clone();
                m.bump(var, -1);
                out.add_term(m, p.clone(), c * qi(e as i64));
            }
            if var == 1 && j.l > 0 {
                let mut m = j.clone();
                m.l -= 1;
                m.v1 -= 1;
                out.add_term(m, p.clone(), c * qi(j.l as i64));
            }
            if var == 0 && j.x > 0 {
                let mu = self.ctx.exp_rate.as_ref().expect("X outside an exponential context");
                let k = c * qi(j.x as i64);
                for (pm, mc) in mu.terms() {
                    out.add_term(j.clone(), p.mul(pm), &k * mc);
                }
            }
        }
        out
    }

    /// Largest jet index with nonzero exponent (0 if only v, X or constants appear).
    pub fn max_jet(&self) -> usize {
        self.terms.keys().map(|(j, _)| j.max_jet()).max().unwrap_or(0)
    }

    /// Jet indices on which some term depends (including 0 for v or X, 1 for v1 or L).
    pub fn jet_support(&self) -> Vec<JetIndex> {
        let mut set = std::collections::BTreeSet::new();
        for (j, _) in self.terms.keys() {
            if j.v > 0 || j.x > 0 {
                set.insert(0);
            }
            if j.v1 != 0 || j.l > 0 {
                set.insert(1);
            }
            for (m, _) in j.exp_higher() {
                set.insert(m);
            }
        }
        set.into_iter().collect()
    }

    /// (min, max) of the standard gradation over terms.
    pub fn deg_range(&self) -> Option<(i64, i64)> {
        let mut it = self.terms.keys().map(|(j, _)| j.deg());
        let first = it.next()?;
        Some(it.fold((first, first), |(lo, hi), d| (lo.min(d), hi.max(d))))
    }

    /// Max over terms of jet degbar plus parameter degbar; [`DEGBAR_ZERO`] for zero.
    pub fn degbar(&self) -> i64 {
        self.terms.keys().map(|(j, p)| j.degbar() + p.degbar()).max().unwrap_or(DEGBAR_ZERO)
    }

    /// Max over terms of the jet part of degbar only.
    pub fn jet_degbar(&self) -> i64 {
        self.terms.keys().map(|(j, _)| j.degbar()).max().unwrap_or(DEGBAR_ZERO)
    }

    pub fn max_degree_in(&self, s: Symbol) -> u32 {
        self.terms.keys().map(|(_, p)| p.exponent(s)).max().unwrap_or(0)
    }

    /// Coefficient of s^j, as a polynomial in the remaining symbols.
    pub fn coeff_of(&self, s: Symbol, j: u32) -> Self {
        let mut out = Self::zero_in(&self.ctx);
        for ((jm, p), c) in &self.terms {
            let (e, rest) = p.split_off(s);
            if e == j {
                out.add_term(jm.clone(), rest, c.clone());
            }
        }
        out
    }

    /// Group terms by jet monomial.
    pub fn jet_coefficients(&self) -> BTreeMap<JetMonomial, ParamPoly> {
        let mut out: BTreeMap<JetMonomial, ParamPoly> = BTreeMap::new();
        for ((j, p), c) in &self.terms {
            out.entry(j.clone()).or_default().add_term(p.clone(), c.clone());
        }
        out
    }

    /// Group terms by parameter monomial.
    pub fn param_coefficients(&self) -> BTreeMap<ParamMono, DiffPoly> {
        let mut out: BTreeMap<ParamMono, DiffPoly> = BTreeMap::new();
        for ((j, p), c) in &self.terms {
            out.entry(p.clone()).or_insert_with(|| Self::zero_in(&self.ctx)).add_term(
                j.clone(),
                ParamMono::one(),
                c.clone(),
            );
        }
        out
    }

    /// The coefficient of a jet monomial as a parameter polynomial.
    pub fn coeff_of_jet(&self, j: &JetMonomial) -> ParamPoly {
        let mut out = ParamPoly::zero();
        for ((jm, p), c) in &self.terms {
            if jm == j {
                out.add_term(p.clone(), c.clone());
            }
        }
        out
    }

    /// Substitute parameter symbols by parameter polynomials (unmapped symbols kept).
    pub fn subs_params(&self, map: &dyn Fn(Symbol) -> Option<ParamPoly>) -> Self {
        let mut cache: HashMap<ParamMono, ParamPoly> = HashMap::new();
        let mut out = Self::zero_in(&self.ctx);
        for ((j, p), c) in &self.terms {
            let image = cache
                .entry(p.clone())
                .or_insert_with(|| ParamPoly::monomial(p.clone(), Q::one()).substitute(map))
                .clone();
            for (pm, pc) in image.terms() {
                out.add_term(j.clone(), pm.clone(), c * pc);
            }
        }
        if let Some(mu) = &self.ctx.exp_rate {
            out.ctx = Arc::new(RingContext { exp_rate: Some(mu.substitute(map)) });
        }
        out
    }

    /// Replace each term's coefficient by `f(jet, param, coeff)` (terms mapped to zero vanish).
    pub fn map_terms(&self, f: impl Fn(&JetMonomial, &ParamMono, &Q) -> Option<(JetMonomial, ParamMono, Q)>) -> Self {
        let mut out = Self::zero_in(&self.ctx);
        for ((j, p), c) in &self.terms {
            if let Some((j2, p2, c2)) = f(j, p, c) {
                out.add_term(j2, p2, c2);
            }
        }
        out
    }

    /// Keep only terms satisfying the predicate.
    pub fn filter(&self, keep: impl Fn(&JetMonomial, &ParamMono) -> bool) -> Self {
        DiffPoly {
            ctx: self.ctx.clone(),
            terms: self.terms.iter().filter(|((j, p), _)| keep(j, p)).map(|(k, c)| (k.clone(), c.clone())).collect(),
        }
    }

    /// Evaluate at v = 0, v1 = 1, v_{≥2} = 0, L = 0, X = 1; result keeps parameters.
    pub fn at_topological_origin(&self) -> ParamPoly {
        let mut out = ParamPoly::zero();
        for ((j, p), c) in &self.terms {
            if j.v == 0 && j.hi.is_empty() && j.l == 0 {
                out.add_term(p.clone(), c.clone());
            }
        }
        out
    }

    /// Canonical text: `(c)*factors` terms joined by ` + `, sorted; `0` for zero.
    pub fn canonical_text(&self) -> String {
        super::text::format_diffpoly(self)
    }

    pub fn parse(text: &str) -> Result<Self> {
        super::text::parse_diffpoly(text)
    }
}

impl fmt::Display for DiffPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.canonical_text())
    }
}

impl<'a> Add<&'a DiffPoly> for &'a DiffPoly {
    type Output = DiffPoly;
    fn add(self, rhs: &DiffPoly) -> DiffPoly {
        self.try_add(rhs).expect("ring context mismatch")
    }
}

impl<'a> Sub<&'a DiffPoly> for &'a DiffPoly {
    type Output = DiffPoly;
    fn sub(self, rhs: &DiffPoly) -> DiffPoly {
        self.try_add(&rhs.neg()).expect("ring context mismatch")
    }
}

impl<'a> Mul<&'a DiffPoly> for &'a DiffPoly {
    type Output = DiffPoly;
    fn mul(self, rhs: &DiffPoly) -> DiffPoly {
        self.try_mul(rhs).expect("ring context mismatch")
    }
}

impl Add for DiffPoly {
    type Output = DiffPoly;
    fn add(self, rhs: DiffPoly) -> DiffPoly {
        &self + &rhs
    }
}

impl Sub for DiffPoly {
    type Output = DiffPoly;
    fn sub(self, rhs: DiffPoly) -> DiffPoly {
        &self - &rhs
    }
}

impl Mul for DiffPoly {
    type Output = DiffPoly;
    fn mul(self, rhs: DiffPoly) -> DiffPoly {
        &self * &rhs
    }
}

impl Neg for DiffPoly {
    type Output = DiffPoly;
    fn neg(self) -> DiffPoly {
        DiffPoly::neg(&self)
    }
}

impl Neg for &DiffPoly {
    type Output = DiffPoly;
    fn neg(self) -> DiffPoly {
        DiffPoly::neg(self)
    }
}
