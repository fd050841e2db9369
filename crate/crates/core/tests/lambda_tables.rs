use hodge_core::hodge_recursion::hodge_potentials;
use hodge_core::lambda_extract::{extract_all, hodge_number, parse_lambda, LambdaTable};
use hodge_core::rational::q;
use hodge_core::DiffPoly;

fn published() -> Vec<(u32, Vec<u32>, DiffPoly)> {
    include_str!("../data/lambda_tables.txt")
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let parts: Vec<&str> = l.split('|').map(str::trim).collect();
            let g = parts[0].parse().unwrap();
            let idx = parts[1].split(',').map(|x| x.parse().unwrap()).collect();
            (g, idx, DiffPoly::parse(parts[2]).unwrap())
        })
        .collect()
}

fn table(g: u32) -> LambdaTable {
    let sys = hodge_potentials(g).unwrap();
    extract_all(g, sys.potential(g).unwrap()).unwrap()
}

fn check_genus(g: u32) {
    let t = table(g);
    assert!(t.equations > t.unknowns);
    let mut seen = 0;
    for (gg, idx, want) in published() {
        if gg != g {
            continue;
        }
        let got = t.get(&idx).expect("monomial in basis");
        assert_eq!(got, &want, "H_{g}({idx:?})\n  computed  {got}\n  published {want}");
        seen += 1;
    }
    assert!(seen > 0);
}

#[test]
fn genus_two_functions() {
    check_genus(2);
}

#[test]
fn genus_three_functions() {
    check_genus(3);
}

#[test]
fn genus_four_functions() {
    check_genus(4);
}

#[test]
fn values_at_the_origin() {
    let num = |g, l: &str| hodge_number(&table(g), &parse_lambda(g, l).unwrap(), &[]).unwrap().value;
    assert_eq!(num(2, "1,1,1"), q(1, 2880));
    assert_eq!(num(3, "1,2,3"), q(1, 1451520));
    assert_eq!(num(4, "2,3,4"), q(1, 87091200));
    assert_eq!(num(3, "1,1,1,1,1,1"), q(1, 90720));
    assert_eq!(num(4, "1,1,1,1,1,1,1,1,1"), q(1, 113400));
}

#[test]
#[ignore = "genus 5 takes about half a minute in release builds"]
fn genus_five_values() {
    let t = table(5);
    let num = |l: &str| hodge_number(&t, &parse_lambda(5, l).unwrap(), &[]).unwrap().value;
    assert_eq!(num("3,4,5"), q(1, 2554675200));
    assert_eq!(num("1,2,4,5"), q(1, 766402560));
    assert_eq!(num("1,1,1,1,1,1,1,1,1,1,1,1"), q(31, 680400));
    let want = published().into_iter().find(|(g, _, _)| *g == 5).unwrap();
    assert_eq!(t.get(&want.1).unwrap(), &want.2);
}
