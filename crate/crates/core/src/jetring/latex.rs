//! LaTeX rendering in the style of printed tables: `\frac{131 v_{2}^{5}}{45360 v_{1}^{6}}`.

use num_traits::{One, Signed};

use super::diffpoly::DiffPoly;
use super::monomial::JetMonomial;
use super::param::ParamMono;

fn pow(name: &str, e: i64) -> String {
    if e == 1 {
        name.to_string()
    } else {
        format!("{name}^{{{e}}}")
    }
}

fn numerator_factors(j: &JetMonomial, pm: &ParamMono) -> Vec<String> {
    let mut out = Vec::new();
    for &(s, e) in pm.factors() {
        let name = match s {
            crate::jetring::Symbol::S(k) => format!("s_{{{k}}}"),
            crate::jetring::Symbol::A(k) => format!("a_{{{k}}}"),
            crate::jetring::Symbol::C(k) => format!("c_{{{k}}}"),
            crate::jetring::Symbol::Sigma(k) => format!("\\sigma_{{{k}}}"),
            other => other.to_string(),
        };
        out.push(pow(&name, e as i64));
    }
    if j.exp_v() > 0 {
        out.push(pow("v", j.exp_v() as i64));
    }
    if j.exp_v1() > 0 {
        out.push(pow("v_{1}", j.exp_v1() as i64));
    }
    for (m, e) in j.exp_higher() {
        out.push(pow(&format!("v_{{{m}}}"), e as i64));
    }
    if j.exp_l() > 0 {
        out.push(pow("\\log v_{1}", j.exp_l() as i64));
    }
    if j.exp_x() > 0 {
        out.push(pow("X", j.exp_x() as i64));
    }
    out
}

pub(crate) fn diffpoly_latex(p: &DiffPoly) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (i, (j, pm, c)) in p.terms().enumerate() {
        let neg = c.is_negative();
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let a = c.abs();
        let num_factors = numerator_factors(j, pm).join(" ");
        let mut num = if a.numer().is_one() && !num_factors.is_empty() {
            String::new()
        } else {
            a.numer().to_string()
        };
        if !num_factors.is_empty() {
            if !num.is_empty() {
                num.push(' ');
            }
            num.push_str(&num_factors);
        }
        let mut den = if a.denom().is_one() { String::new() } else { a.denom().to_string() };
        if j.exp_v1() < 0 {
            if !den.is_empty() {
                den.push(' ');
            }
            den.push_str(&pow("v_{1}", -j.exp_v1() as i64));
        }
        if den.is_empty() {
            out.push_str(&num);
        } else {
            out.push_str(&format!("\\frac{{{num}}}{{{den}}}"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use crate::jetring::DiffPoly;

    #[test]
    fn table_style() {
        let f = DiffPoly::parse("(131/45360)*v1^-6*v2^5 + (-1/2)*s1*v").unwrap();
        let s = f.to_latex();
        assert!(s.contains("\\frac{131 v_{2}^{5}}{45360 v_{1}^{6}}"), "{s}");
        assert!(s.contains("\\frac{s_{1} v}{2}"), "{s}");
        assert_eq!(DiffPoly::parse("(1)*v1^-1").unwrap().to_latex(), "\\frac{1}{v_{1}}");
    }
}
