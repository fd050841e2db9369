use hodge_core::free_energy::intersection;
use hodge_core::jetring::{eval_on_tseries, topological_jets};
use hodge_core::lambda_extract::{LambdaPoly, ReduceOrder};
use hodge_core::point_frobenius::{alt_sum, dk_on_jet, flow_tderiv};
use hodge_core::rational::{q, qi};
use hodge_core::{DiffPoly, JetMonomial, ParamMono, Symbol};
use proptest::prelude::*;
use proptest::test_runner::RngSeed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Fixed by default; override with HODGE_TEST_SEED to explore other cases.
fn seed() -> u64 {
    std::env::var("HODGE_TEST_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(0x5eed_2024)
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, rng_seed: RngSeed::Fixed(seed()), failure_persistence: None, ..ProptestConfig::default() }
}

#[derive(Clone, Copy)]
struct Shape {
    log: bool,
    params: bool,
    max_jet: usize,
}

fn monomial(shape: Shape) -> impl Strategy<Value = (JetMonomial, ParamMono)> {
    let jets = prop::collection::vec(0i32..3, shape.max_jet - 1);
    let l = if shape.log { 0u32..2 } else { 0u32..1 };
    let ps = if shape.params { (0u32..3, 0u32..2) } else { (0u32..1, 0u32..1) };
    (0i32..3, -2i32..3, jets, l, ps).prop_map(|(v, v1, hi, l, (a, b))| {
        let mut j = JetMonomial::jet(0, v).mul(&JetMonomial::jet(1, v1)).mul(&JetMonomial::log_v1(l));
        for (i, e) in hi.into_iter().enumerate() {
            j = j.mul(&JetMonomial::jet(i + 2, e));
        }
        (j, ParamMono::from_pairs([(Symbol::S(1), a), (Symbol::S(2), b)]))
    })
}

fn poly(shape: Shape) -> impl Strategy<Value = DiffPoly> {
    let term = (monomial(shape), -6i64..7, 1i64..5);
    prop::collection::vec(term, 0..5).prop_map(|ts| {
        let mut p = DiffPoly::zero();
        for ((j, m), n, d) in ts {
            p.add_term(j, m, q(n, d));
        }
        p
    })
}

const FULL: Shape = Shape { log: true, params: true, max_jet: 4 };
const JETS: Shape = Shape { log: true, params: false, max_jet: 3 };
const PLAIN: Shape = Shape { log: false, params: false, max_jet: 3 };

fn homogeneous(shape: Shape) -> impl Strategy<Value = DiffPoly> {
    poly(shape).prop_filter("needs a deg-homogeneous nonzero input", |p| {
        matches!(p.deg_range(), Some((lo, hi)) if lo == hi)
    })
}

proptest! {
    #![proptest_config(config(1000))]

    #[test]
    fn ring_axioms(a in poly(FULL), b in poly(FULL), c in poly(FULL)) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a * &DiffPoly::one(), a.clone());
        prop_assert!((&a - &a).is_zero());
        prop_assert!((&a * &DiffPoly::zero()).is_zero());
    }
}

proptest! {
    #![proptest_config(config(300))]

    #[test]
    fn dx_is_a_derivation(a in poly(FULL), b in poly(FULL)) {
        prop_assert_eq!((&a * &b).dx(), &(&a.dx() * &b) + &(&a * &b.dx()));
        prop_assert_eq!((&a + &b).dx(), &a.dx() + &b.dx());
    }

    #[test]
    fn pdiff_is_a_derivation(a in poly(JETS), b in poly(JETS), m in 0usize..4) {
        prop_assert_eq!((&a * &b).pdiff(m), &(&a.pdiff(m) * &b) + &(&a * &b.pdiff(m)));
    }

    #[test]
    fn deg_is_additive(x in monomial(FULL), y in monomial(FULL)) {
        prop_assert_eq!(x.0.mul(&y.0).deg(), x.0.deg() + y.0.deg());
        prop_assert_eq!(x.0.mul(&y.0).degbar(), x.0.degbar() + y.0.degbar());
    }

    #[test]
    fn dx_raises_deg_by_one(a in homogeneous(JETS)) {
        let d = a.deg_range().unwrap().0;
        let da = a.dx();
        if !da.is_zero() {
            prop_assert_eq!(da.deg_range(), Some((d + 1, d + 1)));
        }
    }

    #[test]
    fn text_round_trip(a in poly(FULL)) {
        let text = a.canonical_text();
        let back = DiffPoly::parse(&text).unwrap();
        prop_assert_eq!(&back, &a);
        prop_assert_eq!(back.canonical_text(), text);
    }

    #[test]
    fn json_round_trip(a in poly(FULL)) {
        prop_assert_eq!(DiffPoly::from_json(&a.to_json()).unwrap(), a);
    }
}

proptest! {
    #![proptest_config(config(120))]

    #[test]
    fn evaluation_is_a_homomorphism(a in poly(JETS), b in poly(JETS)) {
        let jets = topological_jets(3, 5, 3);
        let ev = |p: &DiffPoly| eval_on_tseries(p, &jets, &|_| None).unwrap();
        prop_assert_eq!(ev(&(&a * &b)), ev(&a).mul(&ev(&b)));
        prop_assert_eq!(ev(&(&a + &b)), ev(&a).add(&ev(&b)));
    }

    #[test]
    fn flows_commute(a in poly(PLAIN), p in 0u32..5, r in 0u32..5) {
        prop_assert_eq!(flow_tderiv(&flow_tderiv(&a, p), r), flow_tderiv(&flow_tderiv(&a, r), p));
    }
}

#[test]
fn dk_degree_law() {
    for k in 1..=3u32 {
        for m in 0..=10usize {
            let d = dk_on_jet(k, m);
            if m < 2 * k as usize {
                assert!(d.is_zero(), "D_{k}(v_{m}) should vanish");
                continue;
            }
            if d.is_zero() {
                continue;
            }
            assert!(d.degbar() <= m as i64 - 2 * k as i64, "degbar of D_{k}(v_{m})");
            assert_eq!(d.deg_range(), Some((m as i64, m as i64)), "deg of D_{k}(v_{m})");
        }
    }
}

#[test]
fn alternating_sums_vanish_past_the_jet_order() {
    for l in 0..4 {
        for m in 0..4 {
            for n in 0..=l + m + 3 {
                let s = alt_sum(l, m, n);
                if n > l + m {
                    assert!(s.is_zero());
                } else if !s.is_zero() {
                    assert!(s.degbar() <= (l + m - n) as i64);
                }
            }
        }
    }
}

fn random_insertions(rng: &mut ChaCha8Rng, n: usize, total: i64) -> Vec<i64> {
    let mut ks = vec![0i64; n];
    for _ in 0..total {
        ks[rng.gen_range(0..n)] += 1;
    }
    ks
}

fn random_bracket(rng: &mut ChaCha8Rng, extra: i64) -> Option<(u32, Vec<i64>)> {
    let g = rng.gen_range(0..=4u32);
    let n = rng.gen_range(1..=5usize);
    // With one more marked point the stable range is 2g - 2 + n + 1 > 0.
    if 2 * g as i64 - 2 + n as i64 + 1 <= 0 {
        return None;
    }
    let total = 3 * g as i64 - 3 + n as i64 + 1 - extra;
    if total < 0 {
        return None;
    }
    Some((g, random_insertions(rng, n, total)))
}

#[test]
fn oracle_string_equation() {
    let mut rng = ChaCha8Rng::seed_from_u64(seed());
    let mut done = 0;
    while done < 200 {
        let Some((g, ks)) = random_bracket(&mut rng, 0) else { continue };
        if 2 * g as i64 - 2 + ks.len() as i64 <= 0 {
            continue;
        }
        let mut with0 = ks.clone();
        with0.push(0);
        let mut rhs = qi(0);
        for i in 0..ks.len() {
            if ks[i] > 0 {
                let mut lowered = ks.clone();
                lowered[i] -= 1;
                rhs += intersection(g, &lowered).unwrap();
            }
        }
        assert_eq!(intersection(g, &with0).unwrap(), rhs, "string equation at g={g}, {ks:?}");
        done += 1;
    }
}

#[test]
fn oracle_dilaton_equation() {
    let mut rng = ChaCha8Rng::seed_from_u64(seed().wrapping_add(1));
    let mut done = 0;
    while done < 200 {
        let Some((g, ks)) = random_bracket(&mut rng, 1) else { continue };
        if 2 * g as i64 - 2 + ks.len() as i64 <= 0 {
            continue;
        }
        let mut with1 = ks.clone();
        with1.push(1);
        let factor = qi(2 * g as i64 - 2 + ks.len() as i64);
        assert_eq!(intersection(g, &with1).unwrap(), factor * intersection(g, &ks).unwrap(), "dilaton at g={g}, {ks:?}");
        done += 1;
    }
}

fn random_lambda(rng: &mut ChaCha8Rng) -> LambdaPoly {
    let g = rng.gen_range(1..=5u32);
    let mut p = LambdaPoly::zero(g);
    for _ in 0..rng.gen_range(1..=3) {
        let len = rng.gen_range(1..=4);
        let idx: Vec<u32> = (0..len).map(|_| rng.gen_range(1..=g)).collect();
        p = p.add(&LambdaPoly::monomial(g, &idx, qi(rng.gen_range(-4..=4))));
    }
    p
}

#[test]
fn mumford_reduction_is_idempotent_and_order_free() {
    let mut rng = ChaCha8Rng::seed_from_u64(seed().wrapping_add(2));
    for _ in 0..500 {
        let p = random_lambda(&mut rng);
        let r = p.mumford_reduce();
        assert_eq!(r.mumford_reduce(), r, "idempotence for {p}");
        assert_eq!(
            p.mumford_reduce_with(ReduceOrder::Smallest),
            p.mumford_reduce_with(ReduceOrder::Largest),
            "order independence for {p}"
        );
    }
}
