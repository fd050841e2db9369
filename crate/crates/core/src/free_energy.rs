//! Genus-g free energies of the point: closed forms for g = 1, 2 and ansatz fits against
//! the Witten–Kontsevich intersection numbers for higher genus.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{HodgeError, Result};
use crate::jetring::{eval_on_tseries, topological_jets, DiffPoly, JetMonomial, ParamMono, TExp, TruncatedTSeries};
use crate::linalg::solve;
use crate::rational::{binomial, double_factorial, factorial, fmt_q, parse_q, q, Q};

/// Bernoulli number B_n (B_1 = -1/2).
pub fn bernoulli(n: u32) -> Q {
    static CACHE: OnceLock<Mutex<Vec<Q>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(vec![Q::one()]));
    let mut b = cache.lock().unwrap();
    while b.len() <= n as usize {
        let m = b.len() as u32;
        let mut s = Q::zero();
        for (j, bj) in b.iter().enumerate() {
            s += Q::from_integer(binomial(m + 1, j as u32)) * bj;
        }
        let next = -s / Q::from_integer(BigInt::from(m + 1));
        b.push(next);
    }
    b[n as usize].clone()
}

type BracketKey = (u32, Vec<u32>);

fn bracket_cache() -> &'static Mutex<HashMap<BracketKey, Q>> {
    static C: OnceLock<Mutex<HashMap<BracketKey, Q>>> = OnceLock::new();
    C.get_or_init(|| Mutex::new(HashMap::new()))
}

/// ⟨τ_{k_1}…τ_{k_n}⟩_g, computed by the DVV recursion with ⟨τ_0³⟩_0 = 1 and ⟨τ_1⟩_1 = 1/24.
pub fn intersection(g: u32, exponents: &[i64]) -> Result<Q> {
    if exponents.iter().any(|&k| k < 0) {
        return Err(HodgeError::InvalidArgument(format!("negative ψ exponent in {exponents:?}")));
    }
    let ks: Vec<u32> = exponents.iter().map(|&k| k as u32).collect();
    Ok(bracket(g, ks))
}

fn bracket(g: u32, mut ks: Vec<u32>) -> Q {
    ks.sort_unstable();
    let n = ks.len() as i64;
    let dim = 3 * g as i64 - 3 + n;
    if 2 * g as i64 - 2 + n <= 0 || ks.iter().map(|&k| k as i64).sum::<i64>() != dim {
        return Q::zero();
    }
    if g == 0 && ks == [0, 0, 0] {
        return Q::one();
    }
    if g == 1 && ks == [1] {
        return q(1, 24);
    }
    let key = (g, ks.clone());
    if let Some(v) = bracket_cache().lock().unwrap().get(&key) {
        return v.clone();
    }
    let value = dvv(g, &ks);
    bracket_cache().lock().unwrap().insert(key, value.clone());
    value
}

fn df(n: i64) -> Q {
    Q::from_integer(double_factorial(n))
}

fn dvv(g: u32, ks: &[u32]) -> Q {
    // ks sorted; peel off the largest insertion τ_{k+1}
    let top = *ks.last().unwrap() as i64;
    let k = top - 1;
    let rest: Vec<u32> = ks[..ks.len() - 1].to_vec();
    let mut total = Q::zero();
    for (j, &d) in rest.iter().enumerate() {
        let nd = d as i64 + k;
        if nd < 0 {
            continue;
        }
        let mut next = rest.clone();
        next[j] = nd as u32;
        let c = df(2 * k + 2 * d as i64 + 1) / df(2 * d as i64 - 1);
        total += c * bracket(g, next);
    }
    if k >= 1 {
        let half = q(1, 2);
        for r in 0..k {
            let s = k - 1 - r;
            let c = df(2 * r + 1) * df(2 * s + 1) * &half;
            if g >= 1 {
                let mut next = rest.clone();
                next.push(r as u32);
                next.push(s as u32);
                total += &c * bracket(g - 1, next);
            }
            let mut split = Q::zero();
            for (sub, mult) in sub_multisets(&rest) {
                let comp = complement(&rest, &sub);
                for g1 in 0..=g {
                    let mut a = sub.clone();
                    a.push(r as u32);
                    let left = bracket(g1, a);
                    if left.is_zero() {
                        continue;
                    }
                    let mut b = comp.clone();
                    b.push(s as u32);
                    let right = bracket(g - g1, b);
                    split += Q::from_integer(mult.clone()) * left * right;
                }
            }
            total += c * split;
        }
    }
    total / df(2 * k + 3)
}

/// Sub-multisets of a sorted multiset with the number of labeled subsets realizing each.
fn sub_multisets(ks: &[u32]) -> Vec<(Vec<u32>, BigInt)> {
    let mut groups: Vec<(u32, u32)> = Vec::new();
    for &k in ks {
        match groups.last_mut() {
            Some((v, c)) if *v == k => *c += 1,
            _ => groups.push((k, 1)),
        }
    }
    let mut out = vec![(Vec::new(), BigInt::one())];
    for &(v, c) in &groups {
        let mut next = Vec::new();
        for (sub, mult) in &out {
            for take in 0..=c {
                let mut s = sub.clone();
                s.extend(std::iter::repeat(v).take(take as usize));
                next.push((s, mult * binomial(c, take)));
            }
        }
        out = next;
    }
    out
}

fn complement(ks: &[u32], sub: &[u32]) -> Vec<u32> {
    let mut out = Vec::new();
    let mut j = 0;
    for &k in ks {
        if j < sub.len() && sub[j] == k {
            j += 1;
        } else {
            out.push(k);
        }
    }
    out
}

/// Snapshot of the memoized brackets as `"g:[k,…]" -> "p/q"`.
pub fn export_oracle_cache() -> BTreeMap<String, String> {
    bracket_cache()
        .lock()
        .unwrap()
        .iter()
        .map(|((g, ks), v)| {
            let list: Vec<String> = ks.iter().map(|k| k.to_string()).collect();
            (format!("{g}:[{}]", list.join(",")), fmt_q(v))
        })
        .collect()
}

/// Load brackets previously exported with [`export_oracle_cache`].
pub fn import_oracle_cache(entries: &BTreeMap<String, String>) -> Result<usize> {
    let mut loaded = 0;
    let mut cache = bracket_cache().lock().unwrap();
    for (k, v) in entries {
        let bad = || HodgeError::Parse { pos: 0, msg: format!("bad oracle cache key {k:?}") };
        let (g, list) = k.split_once(':').ok_or_else(bad)?;
        let g: u32 = g.parse().map_err(|_| bad())?;
        let inner = list.trim().strip_prefix('[').and_then(|s| s.strip_suffix(']')).ok_or_else(bad)?;
        let mut ks: Vec<u32> = if inner.trim().is_empty() {
            Vec::new()
        } else {
            inner.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?
        };
        ks.sort_unstable();
        cache.insert((g, ks), parse_q(v)?);
        loaded += 1;
    }
    Ok(loaded)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Provenance {
    ClosedForm,
    Fitted { equations: usize, unknowns: usize, degree: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreeEnergy {
    pub genus: u32,
    pub poly: DiffPoly,
    pub provenance: Provenance,
}

/// F_1 = (1/24) log v_x.
pub fn f1() -> DiffPoly {
    DiffPoly::log_v1().scale(&q(1, 24))
}

/// F_2 = v_4/(1152 v_1²) − 7 v_2 v_3/(1920 v_1³) + v_2³/(360 v_1⁴).
pub fn f2() -> DiffPoly {
    DiffPoly::parse("(1/1152)*v1^-2*v4 + (-7/1920)*v1^-3*v2*v3 + (1/360)*v1^-4*v2^3").expect("F2 literal")
}

/// Ansatz monomials Π_{j≥2} v_j^{α_j} v_1^{-β} with Σ(j−1)α_j ≤ 3g−3, jets ≤ 3g−2 and
/// β = Σ jα_j − (2g−2).
pub fn ansatz_monomials(g: u32) -> Vec<JetMonomial> {
    let wmax = 3 * g as usize - 3;
    let jmax = 3 * g as usize - 2;
    let mut out = Vec::new();
    fn rec(j: usize, jmax: usize, wleft: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if j > jmax {
            out.push(cur.clone());
            return;
        }
        let mut e = 0;
        while e * (j - 1) <= wleft {
            cur.push(e as u32);
            rec(j + 1, jmax, wleft - e * (j - 1), cur, out);
            cur.pop();
            e += 1;
        }
    }
    let mut alphas = Vec::new();
    rec(2, jmax, wmax, &mut Vec::new(), &mut alphas);
    for a in alphas {
        let mut m = JetMonomial::one();
        let mut deg = 0i64;
        for (i, &e) in a.iter().enumerate() {
            if e > 0 {
                m.set_exp(i + 2, e as i32);
                deg += (i as i64 + 2) * e as i64;
            }
        }
        let beta = deg - (2 * g as i64 - 2);
        m.set_exp(1, -beta as i32);
        out.push(m);
    }
    out.sort();
    out
}

fn monomial_weight(e: &TExp) -> i64 {
    e.iter().enumerate().map(|(p, &k)| (p as i64 - 1) * k as i64).sum()
}

/// Exponent vectors of total degree ≤ d over t_0..t_{nvars-1} with weight Σ(p−1)e_p = w.
fn weighted_monomials(nvars: usize, d: u32, w: i64) -> Vec<TExp> {
    fn rec(p: usize, nvars: usize, dleft: u32, wleft: i64, cur: &mut TExp, out: &mut Vec<TExp>) {
        if p == nvars {
            if wleft == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for e in 0..=dleft {
            let wl = wleft - (p as i64 - 1) * e as i64;
            // remaining variables p+1.. have weight ≥ 0 (except none), t_0 already handled
            if p >= 1 && wl < 0 {
                break;
            }
            cur[p] = e as u8;
            rec(p + 1, nvars, dleft - e, wl, cur, out);
        }
        cur[p] = 0;
    }
    let mut out = Vec::new();
    let mut cur: TExp = smallvec::SmallVec::from_elem(0, nvars);
    rec(0, nvars, d, w, &mut cur, &mut out);
    out
}

/// Coefficient of Π t_p^{e_p} in F_g(t): ⟨Π τ_p^{e_p}⟩_g / Π e_p!.
pub fn free_energy_coefficient(g: u32, e: &[u8]) -> Q {
    let mut ks = Vec::new();
    let mut denom = BigInt::one();
    for (p, &k) in e.iter().enumerate() {
        for _ in 0..k {
            ks.push(p as u32);
        }
        denom *= factorial(k as u32);
    }
    bracket(g, ks) / Q::from_integer(denom)
}

/// Report of an ansatz fit.
#[derive(Clone, Debug)]
pub struct FitReport {
    pub genus: u32,
    pub degree: u32,
    pub unknowns: usize,
    /// Number of weight-(3g−3) t-monomials matched.
    pub top_equations: usize,
    pub total_equations: usize,
    pub poly: DiffPoly,
}

/// Fit F_g against intersection numbers; rank deficiency or a nonzero residual is an error.
pub fn fit_free_energy(g: u32) -> Result<FitReport> {
    if g < 2 {
        return Err(HodgeError::InvalidArgument("fitting needs g ≥ 2".into()));
    }
    let ansatz = ansatz_monomials(g);
    let w_top = 3 * g as i64 - 3;
    let nvars_for = |d: u32| (w_top + d as i64 + 1) as usize;
    // v_2^{3g−3} v_1^{−β} has no t-coefficient below total degree 3g−3
    let mut d = (3 * g - 3).max(2);
    while weighted_monomials(nvars_for(d), d, w_top).len() * 2 <= ansatz.len() * 3 {
        d += 1;
    }
    let cap = d + 2;
    loop {
        match fit_at_degree(g, &ansatz, d) {
            Err(HodgeError::RankDeficient { .. }) if d < cap => d += 1,
            other => return other,
        }
    }
}

fn fit_at_degree(g: u32, ansatz: &[JetMonomial], d: u32) -> Result<FitReport> {
    let w_top = 3 * g as i64 - 3;
    let nvars = (w_top + d as i64 + 1) as usize;
    let jets = topological_jets(nvars, d, 3 * g as usize - 2);
    let mut blocks: BTreeMap<i64, Vec<&JetMonomial>> = BTreeMap::new();
    for m in ansatz {
        blocks.entry(m.degbar()).or_default().push(m);
    }
    let no_params = |_| None;
    let mut poly = DiffPoly::zero();
    let mut total_equations = 0;
    let mut top_equations = 0;
    for (&w, cols) in &blocks {
        let rows = weighted_monomials(nvars, d, w);
        let evals: Vec<TruncatedTSeries> = cols
            .iter()
            .map(|m| eval_on_tseries(&DiffPoly::term((*m).clone(), ParamMono::one(), Q::one()), &jets, &no_params))
            .collect::<Result<_>>()?;
        let a: Vec<Vec<Q>> = rows.iter().map(|e| evals.iter().map(|s| s.coeff(e)).collect()).collect();
        let b: Vec<Q> =
            rows.iter().map(|e| if w == w_top { free_energy_coefficient(g, e) } else { Q::zero() }).collect();
        debug_assert!(rows.iter().all(|e| monomial_weight(e) == w));
        if rows.len() <= cols.len() {
            return Err(HodgeError::RankDeficient {
                rank: rows.len(),
                unknowns: cols.len(),
                context: format!("genus {g} weight {w}: not overdetermined at degree {d}"),
            });
        }
        let x = solve(&a, &b, &Q::zero()).unique(&format!("genus {g} free energy, weight {w}"))?;
        for (m, c) in cols.iter().zip(x) {
            poly.add_term((*m).clone(), ParamMono::one(), c);
        }
        total_equations += rows.len();
        if w == w_top {
            top_equations = rows.len();
        }
    }
    Ok(FitReport { genus: g, degree: d, unknowns: ansatz.len(), top_equations, total_equations, poly })
}

/// Check the structural laws: deg = 2g−2, degbar ≤ 3g−3, no v, jets ≤ 3g−2.
pub fn check_free_energy_laws(g: u32, f: &DiffPoly) -> Result<()> {
    let fail = |m: String| Err(HodgeError::DegreeBound(format!("F_{g}: {m}")));
    if g < 2 {
        return Ok(());
    }
    match f.deg_range() {
        Some((lo, hi)) if lo == hi && hi == 2 * g as i64 - 2 => {}
        other => return fail(format!("deg range {other:?}")),
    }
    if f.degbar() > 3 * g as i64 - 3 {
        return fail(format!("degbar {}", f.degbar()));
    }
    if !f.pdiff(0).is_zero() {
        return fail("depends on v".into());
    }
    if f.max_jet() > 3 * g as usize - 2 {
        return fail(format!("jet order {}", f.max_jet()));
    }
    Ok(())
}

fn fitted_cache() -> &'static Mutex<HashMap<u32, FreeEnergy>> {
    static C: OnceLock<Mutex<HashMap<u32, FreeEnergy>>> = OnceLock::new();
    C.get_or_init(|| Mutex::new(HashMap::new()))
}

/// F_g: closed forms for g ≤ 2, fitted (and memoized) otherwise.
pub fn free_energy(g: u32) -> Result<FreeEnergy> {
    match g {
        0 => Err(HodgeError::InvalidArgument("F_0 is not a differential polynomial".into())),
        1 => Ok(FreeEnergy { genus: 1, poly: f1(), provenance: Provenance::ClosedForm }),
        2 => Ok(FreeEnergy { genus: 2, poly: f2(), provenance: Provenance::ClosedForm }),
        _ => {
            if let Some(f) = fitted_cache().lock().unwrap().get(&g) {
                return Ok(f.clone());
            }
            let rep = fit_free_energy(g)?;
            check_free_energy_laws(g, &rep.poly)?;
            let f = FreeEnergy {
                genus: g,
                poly: rep.poly,
                provenance: Provenance::Fitted {
                    equations: rep.total_equations,
                    unknowns: rep.unknowns,
                    degree: rep.degree,
                },
            };
            fitted_cache().lock().unwrap().insert(g, f.clone());
            Ok(f)
        }
    }
}

/// Install a previously computed F_g (e.g. from a disk cache) after re-checking its laws.
pub fn install_free_energy(f: FreeEnergy) -> Result<()> {
    check_free_energy_laws(f.genus, &f.poly)?;
    fitted_cache().lock().unwrap().insert(f.genus, f);
    Ok(())
}
