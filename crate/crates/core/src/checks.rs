//! Reproduction checks against published values and structural identities, one report per criterion.
//! Shared by the `hodge verify` command and the acceptance test target.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::free_energy::{check_free_energy_laws, f2, fit_free_energy, intersection};
use crate::hierarchy::{is_polynomial, is_trivial_density, DiffOperator, Hierarchy};
use crate::hodge_recursion::{hodge_potentials, HodgeOptions, HodgeSystem};
use crate::jetring::{eval_on_tseries, topological_jets, DiffPoly, JetMonomial, ParamMono, Symbol};
use crate::lambda_extract::{bernoulli_formula_check, extract_all, hodge_number, parse_lambda, LambdaTable};
use crate::normal_form::hodge_normal_form_check;
use crate::point_frobenius::{alt_sum, alt_sum_direct, omega_alternating_sum, omega_identity_sides};
use crate::rational::{q, qi, Q};
use crate::specializations::{cubic_check, default_cubic_samples, ilw_check, volterra_check};

pub use crate::specializations::{CheckItem, CheckReport};

/// Generating functions H_g(λ_M; t) as published: `genus | indices | canonical text` per line.
pub const PUBLISHED_LAMBDA_TABLES: &str = include_str!("../data/lambda_tables.txt");

pub const H1: &str = "(1/24)*L + (-1/2)*s1*v";

pub const H2: &str = "(1/1152)*v1^-2*v4 + (-7/1920)*v1^-3*v2*v3 + (1/360)*v1^-4*v2^3 \
     + (11/480)*s1*v1^-2*v2^2 + (-1/40)*s1*v1^-1*v3 + (7/40)*s1^2*v2 \
     + (-1/10)*s1^3*v1^2 + (-1/48)*s2*v1^2";

const MIURA_2: &str = "(-1/2)*s1*v2 + (-1/24)*v1^-2*v2^2 + (1/24)*v1^-1*v3";
const MIURA_4: &str = "(1/18)*v1^-6*v2^5 + (-35/288)*v1^-5*v2^3*v3 + (19/384)*v1^-4*v2*v3^2 \
     + (17/480)*v1^-4*v2^2*v4 + (-73/5760)*v1^-3*v3*v4 + (-41/5760)*v1^-3*v2*v5 + (1/1152)*v1^-2*v6 \
     + (11/80)*s1*v1^-4*v2^4 + (-67/240)*s1*v1^-3*v2^2*v3 + (17/240)*s1*v1^-2*v3^2 \
     + (23/240)*s1*v1^-2*v2*v4 + (-1/40)*s1*v1^-1*v5 + (7/40)*s1^2*v4 \
     + (-1/5)*s1^3*v2^2 + (-1/5)*s1^3*v1*v3 + (-1/24)*s2*v2^2 + (-1/24)*s2*v1*v3";
const FLOW1_2: &str = "(1/12)*v3 + (-1)*s1*v1*v2";
const FLOW1_4: &str = "(-1/60)*s1*v5 + (1)*s1^2*v2*v3 + (1/5)*s1^2*v1*v4 + (-8/5)*s1^3*v1*v2^2 \
     + (-4/5)*s1^3*v1^2*v3 + (-1/3)*s2*v1*v2^2 + (-1/6)*s2*v1^2*v3";
const DENSITY0: [&str; 3] = ["(1/2)*v^2", "(-1/2)*s1*v1^2", "(1/5)*s1^2*v2^2"];
const DENSITY1: [&str; 3] = [
    "(1/6)*v^3",
    "(-1/24)*v1^2 + (-1/2)*s1*v*v1^2",
    "(-1/5)*s1^3*v*v1^2*v2 + (-1/24)*s2*v*v1^2*v2 + (1/30)*s1*v2^2 + (1/5)*s1^2*v*v2^2",
];

/// Hodge numbers at t = 0: (genus, λ indices, value).
pub fn published_numbers(genus5: bool) -> Vec<(u32, &'static str, Q)> {
    let mut out = vec![
        (2, "1,1,1", q(1, 2880)),
        (3, "1,2,3", q(1, 1451520)),
        (4, "2,3,4", q(1, 87091200)),
        (3, "1,1,1,1,1,1", q(1, 90720)),
        (4, "1,1,1,1,1,1,1,1,1", q(1, 113400)),
    ];
    if genus5 {
        out.push((5, "3,4,5", q(1, 2554675200)));
        out.push((5, "1,2,4,5", q(1, 766402560)));
        out.push((5, "1,1,1,1,1,1,1,1,1,1,1,1", q(31, 680400)));
    }
    out
}

pub fn published_lambda_tables() -> Vec<(u32, Vec<u32>, DiffPoly)> {
    PUBLISHED_LAMBDA_TABLES
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let parts: Vec<&str> = l.split('|').map(str::trim).collect();
            let g = parts[0].parse().expect("genus");
            let idx = parts[1].split(',').map(|x| x.parse().expect("index")).collect();
            (g, idx, DiffPoly::parse(parts[2]).expect("published polynomial"))
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct CheckOptions {
    /// Include the genus-5 values (slow).
    pub genus5: bool,
    /// Seed for the randomized suite.
    pub seed: u64,
    /// Cases per randomized property.
    pub cases: u32,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { genus5: false, seed: 0x5eed_2024, cases: 200 }
    }
}

/// Criterion numbers and titles.
pub const CRITERIA: [(u32, &str); 12] = [
    (1, "genus-one Hodge potential"),
    (2, "genus-two Hodge potential"),
    (3, "free energies F_2, F_3, F_4"),
    (4, "lambda generating functions, genus 2 to 4"),
    (5, "Hodge numbers at t = 0"),
    (6, "Bernoulli formula, genus 2 to 4"),
    (7, "quasi-Miura map, flow, operator and densities"),
    (8, "ILW specialization"),
    (9, "Volterra specialization"),
    (10, "cubic specialization"),
    (11, "normal form"),
    (12, "structural identities"),
];

/// Named groups of checks for `verify --suite`.
pub fn suite(name: &str) -> Option<Vec<u32>> {
    match name {
        "core" => Some(vec![12, 13]),
        "published" => Some((1..=11).collect()),
        "quick" => Some(vec![1, 2, 6, 8, 9, 13]),
        "all" => Some((1..=13).collect()),
        _ => None,
    }
}

pub fn title(id: u32) -> &'static str {
    CRITERIA.iter().find(|(i, _)| *i == id).map(|(_, t)| *t).unwrap_or("randomized properties")
}

/// Run one check; internal errors become failing items so the report always prints.
pub fn run(id: u32, opts: &CheckOptions) -> CheckReport {
    let mut r = CheckReport::new(&format!("{id}. {}", title(id)));
    let outcome = match id {
        1 => genus_one(&mut r),
        2 => genus_two(&mut r),
        3 => free_energies(&mut r),
        4 => lambda_tables(&mut r),
        5 => numbers(&mut r, opts.genus5),
        6 => bernoulli_formula(&mut r),
        7 => hierarchy(&mut r),
        8 => absorb(&mut r, ilw_check(4)),
        9 => absorb(&mut r, volterra_check(4)),
        10 => absorb(&mut r, cubic_check(6, &default_cubic_samples())),
        11 => hodge_normal_form_check(6).map(|(_, rep)| r.items.extend(rep.items)),
        12 => structural(&mut r),
        13 => randomized(&mut r, opts),
        _ => {
            r.push("criterion", "1..=13", id, false);
            Ok(())
        }
    };
    if let Err(e) = outcome {
        r.push("error", "none", e, false);
    }
    r
}

/// Run and time one check.
pub fn run_timed(id: u32, opts: &CheckOptions) -> (CheckReport, f64) {
    let t = Instant::now();
    let r = run(id, opts);
    (r, t.elapsed().as_secs_f64())
}

fn absorb(r: &mut CheckReport, rep: Result<CheckReport>) -> Result<()> {
    r.items.extend(rep?.items);
    Ok(())
}

fn poly(text: &str) -> DiffPoly {
    DiffPoly::parse(text).expect("static polynomial")
}

fn genus_one(r: &mut CheckReport) -> Result<()> {
    let sys = hodge_potentials(1)?;
    r.compare("H_1", &poly(H1), sys.potential(1)?);
    Ok(())
}

fn genus_two(r: &mut CheckReport) -> Result<()> {
    let sys = hodge_potentials(2)?;
    let want = poly(H2);
    let got = sys.potential(2)?;
    for (j, p, c) in want.terms() {
        r.compare(format!("H_2 term {j} {p}"), c, &got.coeff(j, p));
    }
    r.push("H_2 has no other terms", want.len(), got.len(), want.len() == got.len());
    Ok(())
}

fn free_energies(r: &mut CheckReport) -> Result<()> {
    let fit2 = fit_free_energy(2)?;
    r.compare("fitted F_2", &f2(), &fit2.poly);
    for g in 3..=4 {
        let fit = fit_free_energy(g)?;
        let laws = check_free_energy_laws(g, &fit.poly);
        r.push(format!("F_{g} degree laws"), "ok", laws.as_ref().map(|_| "ok".to_string()).unwrap_or_else(|e| e.to_string()), laws.is_ok());
        r.push(
            format!("F_{g} overdetermined zero-residual fit"),
            format!("> {} equations", fit.unknowns),
            fit.total_equations,
            fit.total_equations > fit.unknowns,
        );
    }
    Ok(())
}

fn tables(max_genus: u32) -> Result<Vec<LambdaTable>> {
    let sys = hodge_potentials(max_genus)?;
    (2..=max_genus).map(|g| extract_all(g, sys.potential(g)?)).collect()
}

fn lambda_tables(r: &mut CheckReport) -> Result<()> {
    let ts = tables(4)?;
    for (g, idx, want) in published_lambda_tables() {
        if g > 4 {
            continue;
        }
        let t = &ts[g as usize - 2];
        let got = t.get(&idx).cloned().unwrap_or_default();
        r.compare(format!("H_{g}{idx:?}"), &want, &got);
    }
    for t in &ts {
        r.push(format!("genus {} system overdetermined", t.genus), format!("> {}", t.unknowns), t.equations, t.equations > t.unknowns);
    }
    Ok(())
}

fn numbers(r: &mut CheckReport, genus5: bool) -> Result<()> {
    let published = published_numbers(genus5);
    let top = published.iter().map(|(g, _, _)| *g).max().unwrap_or(2);
    let sys = hodge_potentials(top)?;
    let mut cache: Vec<Option<LambdaTable>> = vec![None; top as usize + 1];
    for (g, idx, want) in published {
        if cache[g as usize].is_none() {
            cache[g as usize] = Some(extract_all(g, sys.potential(g)?)?);
        }
        let t = cache[g as usize].as_ref().expect("table just built");
        let got = hodge_number(t, &parse_lambda(g, idx)?, &[])?.value;
        r.compare(format!("H_{g}(λ[{idx}]; 0)"), &want, &got);
    }
    Ok(())
}

fn bernoulli_formula(r: &mut CheckReport) -> Result<()> {
    for t in tables(4)? {
        let (got, want) = bernoulli_formula_check(&t)?;
        let g = t.genus;
        r.compare(format!("H_{g}(λ{}λ{}λ{})", g - 2, g - 1, g), &want, &got);
    }
    Ok(())
}

fn hierarchy(r: &mut CheckReport) -> Result<()> {
    let h = Hierarchy::generic(4)?;
    let a = h.miura().correction();
    r.compare("quasi-Miura eps^2", &poly(MIURA_2), &a.get(2));
    r.compare("quasi-Miura eps^4", &poly(MIURA_4), &a.get(4));
    let f1 = h.flow(1);
    r.compare("t1 flow eps^0", &poly("(1)*v*v1"), &f1.get(0));
    r.compare("t1 flow eps^2", &poly(FLOW1_2), &f1.get(2));
    r.compare("t1 flow eps^4", &poly(FLOW1_4), &f1.get(4));
    let op = h.operator();
    r.compare("operator eps^0", &DiffOperator::d(), &op.get(0));
    r.compare("operator eps^2", &DiffOperator::monomial(3, poly("(-1)*s1")), &op.get(2));
    r.compare("operator eps^4", &DiffOperator::monomial(5, poly("(3/5)*s1^2")), &op.get(4));
    for (q_, want) in [(0, DENSITY0), (1, DENSITY1)] {
        let got = h.density(q_)?;
        for (i, w) in want.iter().enumerate() {
            let n = 2 * i as u32;
            let w = poly(w);
            let diff = &got.get(n) - &w;
            let ok = is_trivial_density(&diff);
            r.push(format!("density h_{q_} eps^{n} mod d/dx"), &w, got.get(n), ok);
        }
    }
    Ok(())
}

fn structural(r: &mut CheckReport) -> Result<()> {
    let mut bad = Vec::new();
    for p in 0..=6 {
        for q_ in 0..=6 {
            for s in 1..=6 {
                let (lhs, rhs) = omega_identity_sides(p, q_, s);
                if lhs != rhs {
                    bad.push(format!("({p},{q_},{s})"));
                }
            }
        }
    }
    r.push("Ω shift identity, p,q,s ≤ 6", "no failures", bad.join(" "), bad.is_empty());

    let zero_sums: Vec<u32> = (1..=12).filter(|&n| !omega_alternating_sum(n).is_zero()).collect();
    r.compare("Σ(−1)^p Ω_{p,0}", &DiffPoly::jet(0), &omega_alternating_sum(0));
    r.push("Σ(−1)^p Ω_{p,N−p} = 0, 1 ≤ N ≤ 12", "no failures", format!("{zero_sums:?}"), zero_sums.is_empty());

    let mut bad = Vec::new();
    for l in 0..=8 {
        for m in 0..=8 {
            for n in 0..=8 {
                let s = alt_sum(l, m, n);
                let ok = if n > l + m { s.is_zero() } else { s == alt_sum_direct(l, m, n) };
                if !ok {
                    bad.push(format!("({l},{m},{n})"));
                }
            }
        }
    }
    r.push("alternating jet sums vanish for N > l+m, l,m,N ≤ 8", "no failures", bad.join(" "), bad.is_empty());

    let sys = HodgeSystem::build(3, &HodgeOptions { verify_extra_stage: true }, None);
    r.push("extra stage changes nothing, g ≤ 3", "ok", sys.as_ref().map(|_| "ok".to_string()).unwrap_or_else(|e| e.to_string()), sys.is_ok());

    let h = Hierarchy::generic(4)?;
    let comm = h.commutator(1, 2);
    r.push("[t1, t2] flows commute through eps^4", "0", &comm, comm.is_zero());
    for p_ in 0..=2 {
        for q_ in p_ + 1..=2 {
            let d = h.tau_defect(p_, q_)?;
            r.push(format!("tau symmetry ({p_},{q_}) through eps^4"), "0", &d, d.is_zero());
        }
    }
    let op = h.operator();
    r.push("operator skew-adjoint through eps^4", "true", op.is_skew_adjoint(), op.is_skew_adjoint());
    let cas = h.casimir_defect();
    r.push("∫w is a Casimir", "0", &cas, cas.is_zero());
    for q_ in 0..=2 {
        let d = h.hamiltonian_defect(q_)?;
        r.push(format!("t{q_} flow is Hamiltonian"), "0", &d, d.is_zero());
    }
    r.push("t2 flow polynomial", "true", is_polynomial(&h.flow(2)), is_polynomial(&h.flow(2)));

    let sys = hodge_potentials(4)?;
    for g in 2..=4 {
        let hg = sys.potential(g)?;
        let bound = 3 * g as i64 - 3;
        r.push(format!("degbar H_{g} ≤ {bound}"), bound, hg.degbar(), hg.degbar() <= bound);
        r.push(format!("∂H_{g}/∂v = 0"), "0", hg.pdiff(0), hg.pdiff(0).is_zero());
    }
    for g in 2..=4 {
        let t = extract_all(g, sys.potential(g)?)?;
        r.push(format!("λ-extraction genus {g} consistent and overdetermined"), format!("> {}", t.unknowns), t.equations, t.equations > t.unknowns);
    }
    Ok(())
}

fn random_poly(rng: &mut ChaCha8Rng, with_params: bool) -> DiffPoly {
    let mut p = DiffPoly::zero();
    for _ in 0..rng.gen_range(0..5) {
        let mut j = JetMonomial::jet(0, rng.gen_range(0..3)).mul(&JetMonomial::jet(1, rng.gen_range(-2..3)));
        for m in 2..=3 {
            j = j.mul(&JetMonomial::jet(m, rng.gen_range(0..3)));
        }
        j = j.mul(&JetMonomial::log_v1(rng.gen_range(0..2)));
        let pm = if with_params {
            ParamMono::from_pairs([(Symbol::S(1), rng.gen_range(0..3)), (Symbol::S(2), rng.gen_range(0..2))])
        } else {
            ParamMono::one()
        };
        p.add_term(j, pm, q(rng.gen_range(-6..7), rng.gen_range(1..5)));
    }
    p
}

fn random_insertions(rng: &mut ChaCha8Rng, n: usize, total: i64) -> Vec<i64> {
    let mut ks = vec![0i64; n];
    for _ in 0..total {
        ks[rng.gen_range(0..n)] += 1;
    }
    ks
}

fn randomized(r: &mut CheckReport, opts: &CheckOptions) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut fails = [0usize; 5];
    let jets = topological_jets(3, 5, 3);
    for _ in 0..opts.cases {
        let (a, b, c) = (random_poly(&mut rng, true), random_poly(&mut rng, true), random_poly(&mut rng, true));
        let ring = &(&a * &b) * &c == &a * &(&b * &c)
            && &a * &(&b + &c) == &(&a * &b) + &(&a * &c)
            && &a * &b == &b * &a;
        fails[0] += usize::from(!ring);
        fails[1] += usize::from((&a * &b).dx() != &(&a.dx() * &b) + &(&a * &b.dx()));
        fails[2] += usize::from(DiffPoly::parse(&a.canonical_text()).as_ref() != Ok(&a));
        let (x, y) = (random_poly(&mut rng, false), random_poly(&mut rng, false));
        let ev = |p: &DiffPoly| eval_on_tseries(p, &jets, &|_| None);
        fails[3] += usize::from(ev(&(&x * &y))? != ev(&x)?.mul(&ev(&y)?));

        let g = rng.gen_range(0..=4u32);
        let n = rng.gen_range(1..=5usize);
        if 2 * g as i64 - 2 + n as i64 > 0 {
            let ks = random_insertions(&mut rng, n, 3 * g as i64 - 2 + n as i64);
            let mut with0 = ks.clone();
            with0.push(0);
            let mut rhs = Q::from_integer(0.into());
            for i in 0..n {
                if ks[i] > 0 {
                    let mut lowered = ks.clone();
                    lowered[i] -= 1;
                    rhs += intersection(g, &lowered)?;
                }
            }
            let string_ok = intersection(g, &with0)? == rhs;
            let ks = random_insertions(&mut rng, n, 3 * g as i64 - 3 + n as i64);
            let mut with1 = ks.clone();
            with1.push(1);
            let dilaton_ok = intersection(g, &with1)? == qi(2 * g as i64 - 2 + n as i64) * intersection(g, &ks)?;
            fails[4] += usize::from(!(string_ok && dilaton_ok));
        }
    }
    let names = ["ring axioms", "dx is a derivation", "text round trip", "evaluation is a homomorphism", "string and dilaton equations"];
    for (name, f) in names.iter().zip(fails) {
        r.push(format!("{name} ({} cases, seed {})", opts.cases, opts.seed), 0, f, f == 0);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn published_tables_parse() {
        let t = published_lambda_tables();
        assert_eq!(t.iter().filter(|(g, _, _)| *g == 2).count(), 3);
        assert_eq!(t.iter().filter(|(g, _, _)| *g == 3).count(), 7);
        assert_eq!(t.iter().filter(|(g, _, _)| *g == 4).count(), 14);
    }

    #[test]
    fn quick_checks_pass() {
        let opts = CheckOptions { cases: 30, ..CheckOptions::default() };
        for id in [1, 2, 6, 13] {
            let r = run(id, &opts);
            assert!(r.passed(), "{r}");
        }
    }

    #[test]
    fn failures_are_reported_not_raised() {
        let r = run(99, &CheckOptions::default());
        assert!(!r.passed());
    }
}
