//! Result documents and their text, JSON and LaTeX renderings.

use std::collections::BTreeMap;

use clap::ValueEnum;
use hodge_core::checks::CheckReport;
use hodge_core::hierarchy::EpsOperator;
use hodge_core::rational::fmt_q;
use hodge_core::{DiffPoly, EpsExpansion, Q};
use serde_json::{json, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Latex,
}

/// Version tag of the JSON document layout, checked by the published schema.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug)]
pub enum Body {
    Rational(Q),
    Poly(DiffPoly),
    Series(EpsExpansion),
    Operator(EpsOperator),
    Report(CheckReport),
    /// Rows of (label, LaTeX label, polynomial).
    Table(Vec<(String, String, DiffPoly)>),
}

#[derive(Clone, Debug)]
pub struct Section {
    pub title: String,
    pub body: Body,
}

#[derive(Clone, Debug)]
pub struct Document {
    pub command: &'static str,
    pub input: BTreeMap<String, Value>,
    pub sections: Vec<Section>,
    pub notes: Vec<String>,
}

impl Document {
    pub fn new(command: &'static str) -> Self {
        Document { command, input: BTreeMap::new(), sections: Vec::new(), notes: Vec::new() }
    }

    pub fn input(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.input.insert(key.to_string(), value.into());
        self
    }

    pub fn push(&mut self, title: impl Into<String>, body: Body) {
        self.sections.push(Section { title: title.into(), body });
    }

    pub fn note(&mut self, n: impl Into<String>) {
        self.notes.push(n.into());
    }

    /// False when any report section has a failing item.
    pub fn passed(&self) -> bool {
        self.sections.iter().all(|s| match &s.body {
            Body::Report(r) => r.passed(),
            _ => true,
        })
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.text(),
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json()).expect("documents serialize");
                s.push('\n');
                s
            }
            Format::Latex => self.latex(),
        }
    }

    fn text(&self) -> String {
        let mut out = String::new();
        let bare = self.sections.len() == 1 && matches!(self.sections[0].body, Body::Rational(_) | Body::Poly(_));
        for (i, s) in self.sections.iter().enumerate() {
            if bare {
                out.push_str(&body_text(&s.body));
                out.push('\n');
                continue;
            }
            if i > 0 {
                out.push('\n');
            }
            if let Body::Report(r) = &s.body {
                out.push_str(&r.to_string());
                continue;
            }
            out.push_str(&format!("{}:\n", s.title));
            for line in body_text(&s.body).lines() {
                out.push_str("  ");
                out.push_str(line);
                out.push('\n');
            }
        }
        for n in &self.notes {
            out.push_str(&format!("# {n}\n"));
        }
        out
    }

    pub fn json(&self) -> Value {
        json!({
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "version": env!("CARGO_PKG_VERSION"),
            "status": if self.passed() { "ok" } else { "failed" },
            "input": self.input,
            "sections": self.sections.iter().map(section_json).collect::<Vec<_>>(),
            "notes": self.notes,
        })
    }

    fn latex(&self) -> String {
        let mut out = String::from(
            "\\documentclass{article}\n\\usepackage{amsmath}\n\\usepackage{amssymb}\n\\allowdisplaybreaks\n\\begin{document}\n",
        );
        for s in &self.sections {
            out.push_str(&format!("\\section*{{{}}}\n", escape(&s.title)));
            out.push_str(&body_latex(&s.body));
        }
        if !self.notes.is_empty() {
            out.push_str("\\begin{itemize}\n");
            for n in &self.notes {
                out.push_str(&format!("\\item {}\n", escape(n)));
            }
            out.push_str("\\end{itemize}\n");
        }
        out.push_str("\\end{document}\n");
        out
    }
}

fn body_text(b: &Body) -> String {
    match b {
        Body::Rational(q) => fmt_q(q),
        Body::Poly(p) => p.canonical_text(),
        Body::Series(e) if e.iter().next().is_none() => "0".to_string(),
        Body::Series(e) => e.iter().map(|(n, p)| format!("eps^{n}: {}", p.canonical_text())).collect::<Vec<_>>().join("\n"),
        Body::Operator(op) if operator_rows(op).is_empty() => "0".to_string(),
        Body::Operator(op) => operator_rows(op)
            .into_iter()
            .map(|(n, k, c)| format!("eps^{n} d^{k}: {}", c.canonical_text()))
            .collect::<Vec<_>>()
            .join("\n"),
        Body::Report(r) => r.to_string().trim_end().to_string(),
        Body::Table(rows) => rows.iter().map(|(l, _, p)| format!("{l} = {}", p.canonical_text())).collect::<Vec<_>>().join("\n"),
    }
}

fn operator_rows(op: &EpsOperator) -> Vec<(u32, u32, DiffPoly)> {
    let mut rows = Vec::new();
    for (n, o) in op.iter() {
        for (k, c) in o.terms() {
            rows.push((n, k, c.clone()));
        }
    }
    rows
}

fn poly_json(p: &DiffPoly) -> Value {
    json!({ "text": p.canonical_text(), "terms": p.to_json().terms })
}

fn section_json(s: &Section) -> Value {
    let (kind, value) = match &s.body {
        Body::Rational(q) => ("rational", json!(fmt_q(q))),
        Body::Poly(p) => ("poly", poly_json(p)),
        Body::Series(e) => (
            "series",
            json!({
                "order": e.order(),
                "coefficients": e.iter().map(|(n, p)| json!({ "eps": n, "poly": poly_json(p) })).collect::<Vec<_>>(),
            }),
        ),
        Body::Operator(op) => (
            "operator",
            json!({
                "order": op.order(),
                "coefficients": operator_rows(op)
                    .iter()
                    .map(|(n, k, c)| json!({ "eps": n, "derivative": k, "poly": poly_json(c) }))
                    .collect::<Vec<_>>(),
            }),
        ),
        Body::Report(r) => (
            "report",
            json!({
                "name": r.name,
                "passed": r.passed(),
                "items": r.items.iter().map(|i| json!({
                    "label": i.label, "expected": i.expected, "got": i.got, "ok": i.ok,
                })).collect::<Vec<_>>(),
            }),
        ),
        Body::Table(rows) => (
            "table",
            Value::Array(rows.iter().map(|(l, _, p)| json!({ "label": l, "poly": poly_json(p) })).collect()),
        ),
    };
    json!({ "title": s.title, "kind": kind, "value": value })
}

/// Escape plain text for LaTeX, mapping the symbols used in labels to math macros.
pub fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        let piece = match c {
            '\\' => "\\textbackslash{}",
            '{' => "\\{",
            '}' => "\\}",
            '_' => "\\_",
            '^' => "\\^{}",
            '&' => "\\&",
            '%' => "\\%",
            '$' => "\\$",
            '#' => "\\#",
            '~' => "\\textasciitilde{}",
            'Ω' => "$\\Omega$",
            'λ' => "$\\lambda$",
            'Σ' => "$\\Sigma$",
            '∂' => "$\\partial$",
            '∫' => "$\\int$",
            'ε' => "$\\varepsilon$",
            'δ' => "$\\delta$",
            'ψ' => "$\\psi$",
            '≤' => "$\\le$",
            '≥' => "$\\ge$",
            '≠' => "$\\neq$",
            '↔' => "$\\leftrightarrow$",
            '→' => "$\\to$",
            '−' => "-",
            '·' => "$\\cdot$",
            '\u{304}' => {
                // Combining macron over the previous letter.
                if let Some(prev) = out.pop() {
                    out.push_str(&format!("$\\overline{{{prev}}}$"));
                }
                continue;
            }
            c if c.is_ascii() => {
                out.push(c);
                continue;
            }
            _ => "?",
        };
        out.push_str(piece);
    }
    out
}

/// Display-math rendering of a polynomial, four terms per line.
fn poly_lines(p: &DiffPoly) -> Vec<String> {
    if p.is_zero() {
        return vec!["0".to_string()];
    }
    let terms: Vec<String> = p.terms().map(|(j, m, c)| DiffPoly::term(j.clone(), m.clone(), c.clone()).to_latex()).collect();
    let mut lines = Vec::new();
    for chunk in terms.chunks(4) {
        let mut line = String::new();
        for (i, t) in chunk.iter().enumerate() {
            let t = t.as_str();
            let first = lines.is_empty() && i == 0;
            match (first, t.strip_prefix('-')) {
                (true, _) => line.push_str(t),
                (false, Some(rest)) => line.push_str(&format!(" - {rest}")),
                (false, None) => line.push_str(&format!(" + {t}")),
            }
        }
        lines.push(line);
    }
    lines
}

fn align(rows: &[(String, Vec<String>)]) -> String {
    let mut out = String::from("\\begin{align*}\n");
    let mut first = true;
    for (lhs, lines) in rows {
        for (i, line) in lines.iter().enumerate() {
            if !first {
                out.push_str(" \\\\\n");
            }
            first = false;
            if i == 0 {
                out.push_str(&format!("{lhs} &= {line}"));
            } else {
                out.push_str(&format!("&\\quad {line}"));
            }
        }
    }
    out.push_str("\n\\end{align*}\n");
    out
}

fn body_latex(b: &Body) -> String {
    match b {
        Body::Rational(q) => {
            let v = if q.denom() == &1.into() {
                q.numer().to_string()
            } else {
                let sign = if q < &Q::from_integer(0.into()) { "-" } else { "" };
                format!("{sign}\\frac{{{}}}{{{}}}", q.numer().magnitude(), q.denom())
            };
            format!("\\[ {v} \\]\n")
        }
        Body::Poly(p) => align(&[(String::new(), poly_lines(p))]),
        Body::Series(e) => {
            let rows: Vec<(String, Vec<String>)> =
                e.iter().map(|(n, p)| (format!("[\\varepsilon^{{{n}}}]"), poly_lines(p))).collect();
            if rows.is_empty() {
                return "\\[ 0 \\]\n".to_string();
            }
            align(&rows)
        }
        Body::Operator(op) => {
            let rows: Vec<(String, Vec<String>)> = operator_rows(op)
                .into_iter()
                .map(|(n, k, c)| (format!("[\\varepsilon^{{{n}}}\\partial_x^{{{k}}}]"), poly_lines(&c)))
                .collect();
            if rows.is_empty() {
                return "\\[ 0 \\]\n".to_string();
            }
            align(&rows)
        }
        Body::Table(rows) => {
            let rows: Vec<(String, Vec<String>)> = rows.iter().map(|(_, l, p)| (l.clone(), poly_lines(p))).collect();
            align(&rows)
        }
        Body::Report(r) => {
            let mut out = String::from("\\begin{itemize}\n");
            for i in &r.items {
                if i.ok {
                    out.push_str(&format!("\\item[ok] {}\n", escape(&i.label)));
                } else {
                    out.push_str(&format!(
                        "\\item[FAIL] {}: expected \\texttt{{{}}}, got \\texttt{{{}}}\n",
                        escape(&i.label),
                        escape(&i.expected),
                        escape(&i.got)
                    ));
                }
            }
            out.push_str("\\end{itemize}\n");
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn escapes_specials_and_symbols() {
        assert_eq!(escape("a_b & 50%"), "a\\_b \\& 50\\%");
        assert_eq!(escape("Ω ≤ 6"), "$\\Omega$ $\\le$ 6");
        assert_eq!(escape("ü"), "?");
        assert_eq!(escape("M\u{304}_{2,0}"), "$\\overline{M}$\\_\\{2,0\\}");
    }

    #[test]
    fn bare_text_for_single_values() {
        let mut d = Document::new("bernoulli");
        d.push("B_4", Body::Rational(Q::new((-1).into(), 30.into())));
        assert_eq!(d.render(Format::Text), "-1/30\n");
        let latex = d.render(Format::Latex);
        assert!(latex.contains("-\\frac{1}{30}"));
        assert!(latex.ends_with("\\end{document}\n"));
    }

    #[test]
    fn long_polynomials_wrap() {
        let p = DiffPoly::parse("(1)*v + (1)*v1 + (1)*v2 + (1)*v3 + (-1)*v4").unwrap();
        let lines = poly_lines(&p);
        assert_eq!(lines.len(), 2);
        assert!(lines[1].starts_with(" - "));
    }
}
