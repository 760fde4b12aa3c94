//! CPLEX LP-format text export, for inspecting models with external tools.

use std::collections::HashMap;
use std::fmt::Write;

use crate::model::{LinExpr, Model, Sense, VarKind};

/// Replaces characters that the LP format does not accept in names.
fn sanitize(name: &str) -> String {
    let mut out: String = name
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "_.!#$%&(){},;?@'~|".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect();
    if out.starts_with(|c: char| c.is_ascii_digit() || c == '.') {
        out.insert(0, '_');
    }
    out
}

fn fmt_num(x: f64) -> String {
    if x == f64::INFINITY {
        "+inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x}")
    }
}

fn write_expr(out: &mut String, expr: &LinExpr, names: &[String]) {
    if expr.is_empty() {
        out.push_str("0 ");
        out.push_str(names.first().map(String::as_str).unwrap_or("__zero"));
        return;
    }
    for (i, &(v, c)) in expr.terms().iter().enumerate() {
        let sign = if c < 0.0 { "-" } else { "+" };
        if i == 0 {
            let lead = if c < 0.0 { "-" } else { "" };
            write!(out, "{lead}{} {}", fmt_num(c.abs()), names[v.index()]).unwrap();
        } else {
            write!(out, " {sign} {} {}", fmt_num(c.abs()), names[v.index()]).unwrap();
        }
    }
}

impl Model {
    /// Renders the model as LP-format text. Constraint rows are named
    /// `<tag>_<n>`; the objective constant goes in a comment.
    pub fn to_lp_format(&self) -> String {
        let mut seen: HashMap<String, usize> = HashMap::new();
        let names: Vec<String> = self
            .vars()
            .iter()
            .map(|v| {
                let base = sanitize(&v.name);
                let n = seen.entry(base.clone()).or_insert(0);
                *n += 1;
                if *n == 1 {
                    base
                } else {
                    format!("{base}__{n}")
                }
            })
            .collect();

        let mut out = String::new();
        writeln!(
            out,
            "\\ objective constant: {}",
            self.objective().constant()
        )
        .unwrap();
        out.push_str("Maximize\n obj: ");
        write_expr(&mut out, self.objective(), &names);
        out.push_str("\nSubject To\n");
        let mut per_tag: HashMap<&str, usize> = HashMap::new();
        for c in self.constraints() {
            let n = per_tag.entry(c.tag.as_str()).or_insert(0);
            write!(out, " {}_{}: ", sanitize(&c.tag), n).unwrap();
            *n += 1;
            write_expr(&mut out, &c.expr, &names);
            let op = match c.sense {
                Sense::Le => "<=",
                Sense::Eq => "=",
                Sense::Ge => ">=",
            };
            writeln!(out, " {op} {}", fmt_num(c.rhs)).unwrap();
        }
        out.push_str("Bounds\n");
        for (v, name) in self.vars().iter().zip(&names) {
            if v.kind == VarKind::Binary {
                continue;
            }
            if v.lb == f64::NEG_INFINITY && v.ub == f64::INFINITY {
                writeln!(out, " {name} free").unwrap();
            } else {
                writeln!(out, " {} <= {name} <= {}", fmt_num(v.lb), fmt_num(v.ub)).unwrap();
            }
        }
        let generals: Vec<&str> = self
            .vars()
            .iter()
            .zip(&names)
            .filter(|(v, _)| v.kind == VarKind::Integer)
            .map(|(_, n)| n.as_str())
            .collect();
        if !generals.is_empty() {
            out.push_str("General\n");
            for n in generals {
                writeln!(out, " {n}").unwrap();
            }
        }
        let binaries: Vec<&str> = self
            .vars()
            .iter()
            .zip(&names)
            .filter(|(v, _)| v.kind == VarKind::Binary)
            .map(|(_, n)| n.as_str())
            .collect();
        if !binaries.is_empty() {
            out.push_str("Binary\n");
            for n in binaries {
                writeln!(out, " {n}").unwrap();
            }
        }
        out.push_str("End\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use crate::model::{LinExpr, Model, Sense};

    #[test]
    fn sections_and_names() {
        let mut m = Model::new();
        let b = m.binary("b[L1]").unwrap();
        let f = m.integer("f[L1]", -3.0, 3.0).unwrap();
        let v = m.continuous("v", f64::NEG_INFINITY, f64::INFINITY).unwrap();
        m.add_constraint(LinExpr::term(f, 1.0).with(b, -3.0), Sense::Le, 0.0, "eq15")
            .unwrap();
        m.add_constraint(LinExpr::term(v, 1.0), Sense::Eq, 12.66, "eq12")
            .unwrap();
        m.set_objective(LinExpr::term(b, 2.0).with(v, -0.5))
            .unwrap();
        let text = m.to_lp_format();
        assert!(text.contains("Maximize\n obj: 2 b_L1_ - 0.5 v"));
        assert!(text.contains(" eq15_0: -3 b_L1_ + 1 f_L1_ <= 0"));
        assert!(text.contains(" eq12_0: 1 v = 12.66"));
        assert!(text.contains(" v free"));
        assert!(text.contains("General\n f_L1_"));
        assert!(text.contains("Binary\n b_L1_"));
        assert!(text.ends_with("End\n"));
    }
}
