use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use hodge_core::checks::{self, CheckOptions, CheckReport};
use hodge_core::free_energy::{
    bernoulli, check_free_energy_laws, export_oracle_cache, fit_free_energy, free_energy, import_oracle_cache,
    install_free_energy, FreeEnergy, Provenance,
};
use hodge_core::hierarchy::{EpsOperator, Hierarchy};
use hodge_core::hodge_recursion::{hodge_potentials, install_hodge_system, HodgeOptions, HodgeSystem, StageStore};
use hodge_core::lambda_extract::{distinct_monomials, extract_all, integrate, parse_lambda, weight_bound, LambdaPoly};
use hodge_core::normal_form::{hodge_normal_form, hodge_normal_form_check};
use hodge_core::rational::{fmt_q, parse_q};
use hodge_core::specializations::{
    cubic_check, cubic_rule, default_cubic_samples, ilw_check, ilw_rule, specialized_hierarchy, volterra_check,
    volterra_flow,
};
use hodge_core::{DiffPoly, EpsExpansion, HodgeError, ParamPoly, Q};
use serde_json::json;

use crate::args::{Command, Global, Specialization};
use crate::cache::{operator_text, series_text, sha256_hex, Cache, Kind};
use crate::error::{CliError, CliResult};
use crate::output::{Body, Document};

/// Shared state for one invocation: the optional cache and the global flags.
pub struct Ctx {
    cache: Option<Cache>,
    seed: u64,
    verbose: bool,
    oracle_loaded: usize,
}

fn default_cache_dir() -> Option<PathBuf> {
    if let Some(x) = std::env::var_os("XDG_CACHE_HOME").filter(|x| !x.is_empty()) {
        return Some(PathBuf::from(x).join("hodge"));
    }
    std::env::var_os("HOME").filter(|x| !x.is_empty()).map(|h| PathBuf::from(h).join(".cache").join("hodge"))
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn lambda_label(m: &[u32]) -> String {
    if m.is_empty() {
        return "1".to_string();
    }
    m.iter().map(|i| format!("l{i}")).collect::<Vec<_>>().join("*")
}

fn lambda_latex(g: u32, m: &[u32]) -> String {
    let inner: String = if m.is_empty() {
        "1".to_string()
    } else {
        m.iter().map(|i| format!("\\lambda_{{{i}}}")).collect()
    };
    format!("H_{{{g}}}({inner}; t)")
}

fn coefficient_latex(name: &str) -> String {
    let split = name.find(|c: char| c.is_ascii_digit()).unwrap_or(name.len());
    let (head, idx) = name.split_at(split);
    if idx.is_empty() {
        head.to_string()
    } else {
        format!("{head}_{{{idx}}}")
    }
}

impl Ctx {
    pub fn new(global: &Global) -> CliResult<Self> {
        let dir = if global.no_cache { None } else { global.cache_dir.clone().or_else(default_cache_dir) };
        let cache = match dir {
            Some(d) => Some(Cache::open(&d, global.verbose)?),
            None => None,
        };
        let mut ctx = Ctx { cache, seed: global.seed, verbose: global.verbose, oracle_loaded: 0 };
        if let Some(c) = &ctx.cache {
            let entries = c.load_oracle();
            ctx.oracle_loaded = import_oracle_cache(&entries).unwrap_or(0);
        }
        Ok(ctx)
    }

    /// Persist oracle brackets computed during this run.
    pub fn finish(&self) -> CliResult<()> {
        if let Some(c) = &self.cache {
            let entries = export_oracle_cache();
            if entries.len() > self.oracle_loaded {
                c.store_oracle(&entries)?;
            }
        }
        Ok(())
    }

    fn log(&self, msg: String) {
        if self.verbose {
            eprintln!("{msg}");
        }
    }

    fn genus(&self, g: u32) -> CliResult<u32> {
        if g == 0 {
            return Err(usage("genus must be at least 1"));
        }
        Ok(g)
    }

    fn cached_free_energy(&self, g: u32) -> Option<FreeEnergy> {
        let c = self.cache.as_ref()?;
        let key = format!("g={g}");
        let poly = c.load_poly(Kind::FreeEnergy, &key)?;
        let meta = c.entry(Kind::FreeEnergy, &key)?.meta;
        let num = |k: &str| meta.get(k).and_then(|v| v.parse::<usize>().ok());
        let provenance =
            Provenance::Fitted { equations: num("equations")?, unknowns: num("unknowns")?, degree: num("degree")? as u32 };
        let f = FreeEnergy { genus: g, poly, provenance };
        match install_free_energy(f.clone()) {
            Ok(()) => Some(f),
            Err(e) => {
                self.log(format!("cache: rejected F_{g}: {e}"));
                None
            }
        }
    }

    fn store_free_energy(&self, f: &FreeEnergy) -> CliResult<()> {
        let (Some(c), Provenance::Fitted { equations, unknowns, degree }) = (&self.cache, &f.provenance) else {
            return Ok(());
        };
        let meta = BTreeMap::from([
            ("equations".to_string(), equations.to_string()),
            ("unknowns".to_string(), unknowns.to_string()),
            ("degree".to_string(), degree.to_string()),
        ]);
        c.store_poly(Kind::FreeEnergy, &format!("g={}", f.genus), &f.poly, meta)
    }

    /// F_g, from the cache when possible; fitted results are written back.
    fn free_energy(&self, g: u32) -> CliResult<FreeEnergy> {
        if g >= 3 {
            if let Some(f) = self.cached_free_energy(g) {
                return Ok(f);
            }
        }
        let t = Instant::now();
        let f = free_energy(g)?;
        if g >= 3 {
            self.log(format!("fitted F_{g} in {:.2}s", t.elapsed().as_secs_f64()));
            self.store_free_energy(&f)?;
        }
        Ok(f)
    }

    /// H_1..H_g built through the stage cache and installed for the rest of the process.
    fn system(&self, g: u32, verify_extra_stage: bool) -> CliResult<Arc<HodgeSystem>> {
        for k in 1..=g {
            self.free_energy(k)?;
        }
        let t = Instant::now();
        let store = self.cache.as_ref().map(|c| c as &dyn StageStore);
        let sys = HodgeSystem::build(g, &HodgeOptions { verify_extra_stage }, store)?;
        self.log(format!("H_1..H_{g} in {:.2}s", t.elapsed().as_secs_f64()));
        install_hodge_system(sys);
        Ok(hodge_potentials(g)?)
    }

    /// Fingerprint of H_1..H_g, used in keys of everything derived from them.
    fn potentials_hash(&self, g: u32) -> CliResult<String> {
        let sys = self.system(g, false)?;
        let mut text = String::new();
        for k in 1..=g {
            text.push_str(&sys.potential(k)?.canonical_text());
            text.push('\n');
        }
        Ok(sha256_hex(text.as_bytes()))
    }

    /// Generating functions H_g(M; t) for the given distinct-index monomials.
    fn gf(&self, g: u32, wanted: &[Vec<u32>]) -> CliResult<BTreeMap<Vec<u32>, DiffPoly>> {
        let sys = self.system(g, false)?;
        let hg = sys.potential(g)?;
        let h_sha = sha256_hex(hg.canonical_text().as_bytes());
        let key = |m: &[u32]| format!("g={g} lambda={} H={h_sha}", lambda_label(m));
        let mut out = BTreeMap::new();
        if let Some(c) = &self.cache {
            for m in wanted {
                if let Some(p) = c.load_poly(Kind::Gf, &key(m)) {
                    out.insert(m.clone(), p);
                }
            }
            if out.len() == wanted.len() {
                return Ok(out);
            }
        }
        let t = Instant::now();
        let table = extract_all(g, hg)?;
        self.log(format!("lambda extraction at genus {g} in {:.2}s", t.elapsed().as_secs_f64()));
        if let Some(c) = &self.cache {
            for (m, p) in &table.functions {
                c.store_poly(Kind::Gf, &key(m), p, BTreeMap::new())?;
            }
        }
        for m in wanted {
            let p = table.get(m).ok_or_else(|| HodgeError::MissingData(format!("no H_{g}({})", lambda_label(m))))?;
            out.insert(m.clone(), p.clone());
        }
        Ok(out)
    }

    /// H_g(λ; t) for an arbitrary λ-polynomial, by Mumford reduction and linearity.
    fn gf_of(&self, g: u32, reduced: &LambdaPoly) -> CliResult<DiffPoly> {
        let truncated = reduced.truncate_weight(weight_bound(g));
        let wanted: Vec<Vec<u32>> = truncated.terms().map(|(m, _)| m.clone()).collect();
        let table = self.gf(g, &wanted)?;
        let mut out = DiffPoly::zero();
        for (m, c) in truncated.terms() {
            out.add_scaled(&table[m], c);
        }
        Ok(out)
    }

    fn lambda(&self, g: u32, text: &str) -> CliResult<LambdaPoly> {
        let p = parse_lambda(g, text).map_err(|e| usage(format!("--lambda: {e}")))?;
        Ok(p.mumford_reduce())
    }

    fn order(&self, order: u32) -> CliResult<u32> {
        if order == 0 || order % 2 == 1 {
            return Err(usage(format!("--order must be a positive even number, got {order}")));
        }
        Ok(order)
    }

    fn flow(&self, hier: &mut Option<Hierarchy>, order: u32, q: u32) -> CliResult<EpsExpansion> {
        let key = format!("order={order} q={q} H={}", self.potentials_hash(order / 2)?);
        if let Some(f) = self.cache.as_ref().and_then(|c| c.load_series(Kind::Flow, &key)) {
            return Ok(f);
        }
        let f = generic(hier, order)?.flow(q);
        if let Some(c) = &self.cache {
            c.store(Kind::Flow, &key, &series_text(&f), BTreeMap::new())?;
        }
        Ok(f)
    }

    fn operator(&self, hier: &mut Option<Hierarchy>, order: u32) -> CliResult<EpsOperator> {
        let key = format!("order={order} H={}", self.potentials_hash(order / 2)?);
        if let Some(op) = self.cache.as_ref().and_then(|c| c.load_operator(Kind::Operator, &key)) {
            return Ok(op);
        }
        let op = generic(hier, order)?.operator();
        if let Some(c) = &self.cache {
            c.store(Kind::Operator, &key, &operator_text(&op), BTreeMap::new())?;
        }
        Ok(op)
    }

    pub fn run(&self, cmd: &Command) -> CliResult<Document> {
        match cmd {
            Command::Bernoulli { n } => {
                let mut d = Document::new("bernoulli").input("n", *n);
                d.push(format!("B_{n}"), Body::Rational(bernoulli(*n)));
                Ok(d)
            }
            Command::FreeEnergy { genus, refit } => self.free_energy_cmd(*genus, *refit),
            Command::HodgePotential { genus, verify_extra_stage, stage } => {
                let g = self.genus(*genus)?;
                let sys = self.system(g, *verify_extra_stage)?;
                let mut d = Document::new("hodge-potential").input("genus", g).input("verify_extra_stage", *verify_extra_stage);
                match stage {
                    Some(h) => {
                        d = d.input("stage", *h);
                        d.push(format!("H_{{{g},{h}}}"), Body::Poly(sys.stage(g, *h)?.clone()));
                    }
                    None => d.push(format!("H_{g}"), Body::Poly(sys.potential(g)?.clone())),
                }
                if *verify_extra_stage {
                    d.note(format!("stage {} leaves H_{g} unchanged", g + 1));
                }
                Ok(d)
            }
            Command::HodgeGf { genus, lambda } => {
                let g = self.genus(*genus)?;
                let mut d = Document::new("hodge-gf").input("genus", g);
                match lambda {
                    Some(text) => {
                        d = d.input("lambda", text.as_str());
                        let reduced = self.lambda(g, text)?;
                        d.push(format!("H_{g}({}; t)", reduced_label(&reduced)), Body::Poly(self.gf_of(g, &reduced)?));
                    }
                    None => {
                        let mut ms = distinct_monomials(g, weight_bound(g));
                        ms.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
                        let table = self.gf(g, &ms)?;
                        let rows =
                            ms.iter().map(|m| (lambda_label(m), lambda_latex(g, m), table[m].clone())).collect();
                        d.push(format!("generating functions H_{g}(lambda; t)"), Body::Table(rows));
                    }
                }
                Ok(d)
            }
            Command::HodgeNumber { genus, lambda, psi } => {
                let g = self.genus(*genus)?;
                let reduced = self.lambda(g, lambda)?;
                let gf = self.gf_of(g, &reduced)?;
                let n = integrate(g, &reduced, &gf, psi)?;
                let mut d = Document::new("hodge-number")
                    .input("genus", g)
                    .input("lambda", lambda.as_str())
                    .input("psi", psi.clone());
                d.push("value", Body::Rational(n.value));
                if let Some(note) = n.note {
                    d.note(note);
                }
                Ok(d)
            }
            Command::Hierarchy { order, flow, density, miura, check } => {
                let k = self.order(order.order)?;
                let mut hier = None;
                let mut d = Document::new("hierarchy").input("order", k);
                let flow = if flow.is_none() && density.is_none() && !miura && check.is_none() { Some(1) } else { *flow };
                if let Some(q) = flow {
                    d = d.input("flow", q);
                    d.push(format!("dw/dt_{q}"), Body::Series(self.flow(&mut hier, k, q)?));
                }
                if let Some(q) = density {
                    d = d.input("density", *q);
                    d.push(format!("density h_{q}"), Body::Series(generic(&mut hier, k)?.density(*q)?));
                }
                if *miura {
                    d = d.input("miura", true);
                    d.push("quasi-Miura correction v - w", Body::Series(generic(&mut hier, k)?.miura().correction().clone()));
                }
                if let Some(q) = check {
                    d = d.input("check", *q);
                    let mut r = CheckReport::new(&format!("hierarchy identities through eps^{k}, flows up to t_{q}"));
                    match generic(&mut hier, k)?.verify(*q) {
                        Ok(()) => r.push("Hamiltonian form, tau symmetry, commuting flows, Casimir", "hold", "hold", true),
                        Err(e) => r.push("Hamiltonian form, tau symmetry, commuting flows, Casimir", "hold", e, false),
                    }
                    d.push("check", Body::Report(r));
                }
                Ok(d)
            }
            Command::HamOperator { order } => {
                let k = self.order(order.order)?;
                let mut d = Document::new("ham-operator").input("order", k);
                d.push("P", Body::Operator(self.operator(&mut None, k)?));
                Ok(d)
            }
            Command::Specialize { kind, order, samples, check } => self.specialize(*kind, order.order, samples, *check),
            Command::NormalForm { order, check } => {
                let k = self.order(order.order)?;
                self.system(k / 2, false)?;
                let mut d = Document::new("normal-form").input("order", k).input("check", *check);
                let (nf, report) = if *check {
                    let (nf, r) = hodge_normal_form_check(k)?;
                    (nf, Some(r))
                } else {
                    (hodge_normal_form(k)?, None)
                };
                let gens = nf
                    .generators
                    .iter()
                    .enumerate()
                    .map(|(i, f)| (format!("F_{}", i + 1), format!("F_{{{}}}", i + 1), f.clone()))
                    .collect();
                d.push("generators F_k of w~ = w + sum eps^2k d^2 F_k", Body::Table(gens));
                d.push("density h_1", Body::Series(nf.density.clone()));
                let coeffs = nf.coefficients.iter().map(|(n, c)| (n.clone(), coefficient_latex(n), c.clone())).collect();
                d.push("coefficients", Body::Table(coeffs));
                for n in &nf.notes {
                    d.note(n.clone());
                }
                if let Some(r) = report {
                    d.push("check", Body::Report(r));
                }
                Ok(d)
            }
            Command::Verify { suite, criterion, cases, genus5 } => self.verify(suite, criterion, *cases, *genus5),
        }
    }

    fn free_energy_cmd(&self, genus: u32, refit: bool) -> CliResult<Document> {
        let g = self.genus(genus)?;
        let f = if refit && g >= 2 {
            let t = Instant::now();
            let rep = fit_free_energy(g)?;
            check_free_energy_laws(g, &rep.poly)?;
            self.log(format!("fitted F_{g} in {:.2}s", t.elapsed().as_secs_f64()));
            let f = FreeEnergy {
                genus: g,
                poly: rep.poly,
                provenance: Provenance::Fitted {
                    equations: rep.total_equations,
                    unknowns: rep.unknowns,
                    degree: rep.degree,
                },
            };
            if g >= 3 {
                install_free_energy(f.clone())?;
                self.store_free_energy(&f)?;
            }
            f
        } else {
            self.free_energy(g)?
        };
        let mut d = Document::new("free-energy").input("genus", g).input("refit", refit);
        d.push(format!("F_{g}"), Body::Poly(f.poly));
        if let Provenance::Fitted { equations, unknowns, degree } = f.provenance {
            d.note(format!("fitted through degree {degree}: {equations} equations, {unknowns} unknowns, zero residual"));
        }
        Ok(d)
    }

    fn specialize(&self, kind: Specialization, order: u32, samples: &[String], check: bool) -> CliResult<Document> {
        let k = self.order(order)?;
        if kind != Specialization::Cubic && !samples.is_empty() {
            return Err(usage("--samples applies to the cubic specialization only"));
        }
        self.system(k / 2, false)?;
        let name = match kind {
            Specialization::Ilw => "ilw",
            Specialization::Volterra => "volterra",
            Specialization::Cubic => "cubic",
        };
        let mut d = Document::new("specialize").input("kind", name).input("order", k).input("check", check);
        match kind {
            Specialization::Ilw => {
                let h = specialized_hierarchy(k, &ilw_rule)?;
                d.push("dw/dt_1", Body::Series(h.flow(1)));
                d.push("P", Body::Operator(h.operator()));
                if check {
                    d.push("check", Body::Report(ilw_check(k)?));
                }
            }
            Specialization::Volterra => {
                d.push("Volterra flow, X = exp(w)", Body::Series(volterra_flow(k)?));
                if check {
                    d.push("check", Body::Report(volterra_check(k)?));
                }
            }
            Specialization::Cubic => {
                let samples = if samples.is_empty() { default_cubic_samples() } else { parse_samples(samples)? };
                d = d.input(
                    "samples",
                    samples.iter().map(|(p, q)| json!(format!("{}:{}", fmt_q(p), fmt_q(q)))).collect::<Vec<_>>(),
                );
                for (p, q) in &samples {
                    let rules = (1..=k / 2).map(|j| cubic_rule(j, p, q)).collect::<hodge_core::Result<Vec<Q>>>()?;
                    let rule = |j: u32| ParamPoly::constant(rules[j as usize - 1].clone());
                    let h = specialized_hierarchy(k, &rule)?;
                    d.push(format!("P at p = {}, q = {}", fmt_q(p), fmt_q(q)), Body::Operator(h.operator()));
                }
                if check {
                    d.push("check", Body::Report(cubic_check(k, &samples)?));
                }
            }
        }
        Ok(d)
    }

    fn verify(&self, suite: &str, criterion: &[u32], cases: u32, genus5: bool) -> CliResult<Document> {
        let ids = if criterion.is_empty() {
            checks::suite(suite).ok_or_else(|| usage(format!("unknown suite {suite:?}")))?
        } else {
            if let Some(bad) = criterion.iter().find(|&&c| !(1..=13).contains(&c)) {
                return Err(usage(format!("criterion {bad} is not in 1..=13")));
            }
            criterion.to_vec()
        };
        let mut d = Document::new("verify").input("seed", self.seed).input("cases", cases).input("genus5", genus5);
        d = if criterion.is_empty() { d.input("suite", suite) } else { d.input("criteria", criterion.to_vec()) };
        let need = ids.iter().map(|&i| if i == 5 && genus5 { 5 } else if matches!(i, 3..=6 | 12) { 4 } else { 3 }).max();
        if let Some(g) = need {
            self.system(g, false)?;
        }
        let opts = CheckOptions { genus5, seed: self.seed, cases };
        for id in ids {
            let (r, secs) = checks::run_timed(id, &opts);
            self.log(format!("{} {id}. {} ({secs:.2}s)", if r.passed() { "PASS" } else { "FAIL" }, checks::title(id)));
            d.push(format!("{id}. {}", checks::title(id)), Body::Report(r));
        }
        Ok(d)
    }
}

fn generic(hier: &mut Option<Hierarchy>, order: u32) -> CliResult<&Hierarchy> {
    if hier.is_none() {
        *hier = Some(Hierarchy::generic(order)?);
    }
    Ok(hier.as_ref().expect("just built"))
}

fn reduced_label(p: &LambdaPoly) -> String {
    let terms: Vec<(&Vec<u32>, &Q)> = p.terms().collect();
    match terms.as_slice() {
        [] => "0".to_string(),
        [(m, c)] if fmt_q(c) == "1" => lambda_label(m),
        _ => p.to_string(),
    }
}

fn parse_samples(items: &[String]) -> CliResult<Vec<(Q, Q)>> {
    items
        .iter()
        .map(|s| {
            let (p, q) = s.split_once(':').ok_or_else(|| usage(format!("sample {s:?} is not p:q")))?;
            let p = parse_q(p.trim()).map_err(|e| usage(format!("sample {s:?}: {e}")))?;
            let q = parse_q(q.trim()).map_err(|e| usage(format!("sample {s:?}: {e}")))?;
            Ok((p, q))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels() {
        assert_eq!(lambda_label(&[1, 2]), "l1*l2");
        assert_eq!(lambda_label(&[]), "1");
        assert_eq!(lambda_latex(3, &[1, 3]), "H_{3}(\\lambda_{1}\\lambda_{3}; t)");
        assert_eq!(coefficient_latex("b12"), "b_{12}");
        assert_eq!(coefficient_latex("a0"), "a_{0}");
    }

    #[test]
    fn samples_parse() {
        let s = parse_samples(&["1:2".to_string(), "-1/3:5".to_string()]).unwrap();
        assert_eq!(fmt_q(&s[1].0), "-1/3");
        assert!(parse_samples(&["12".to_string()]).is_err());
    }
}
