//! Canonical text rendering. Binary connectives are always parenthesized so the
//! output never depends on precedence; a quantified operand that is followed by
//! more input is parenthesized so its body cannot swallow the rest.

use std::fmt::Write;

use crate::formula::{Formula, Term};

pub fn print_formula(phi: &Formula) -> String {
    let mut out = String::new();
    write_formula(&mut out, phi);
    out
}

pub fn print_term(t: &Term) -> &str {
    t.name()
}

fn opens_right(f: &Formula) -> bool {
    match f {
        Formula::Forall(..) | Formula::Exists(..) => true,
        Formula::Not(b) => opens_right(b),
        _ => false,
    }
}

fn write_operands(out: &mut String, children: &[&Formula], sep: &str) {
    out.push('(');
    let last = children.len() - 1;
    for (i, c) in children.iter().enumerate() {
        if i > 0 {
            out.push_str(sep);
        }
        if i < last && opens_right(c) {
            out.push('(');
            write_formula(out, c);
            out.push(')');
        } else {
            write_formula(out, c);
        }
    }
    out.push(')');
}

fn write_formula(out: &mut String, f: &Formula) {
    match f {
        Formula::Atom { pred, args } => {
            out.push_str(pred);
            if !args.is_empty() {
                out.push('(');
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    out.push_str(a.name());
                }
                out.push(')');
            }
        }
        Formula::Bool(true) => out.push('1'),
        Formula::Bool(false) => out.push('0'),
        Formula::Not(b) => {
            out.push('-');
            write_formula(out, b);
        }
        Formula::And(cs) => write_operands(out, &cs.iter().collect::<Vec<_>>(), " & "),
        Formula::Or(cs) => write_operands(out, &cs.iter().collect::<Vec<_>>(), " | "),
        Formula::Implies(a, b) => write_operands(out, &[a, b], " -> "),
        Formula::Iff(a, b) => write_operands(out, &[a, b], " <-> "),
        Formula::Forall(v, b) | Formula::Exists(v, b) => {
            let kw = if matches!(f, Formula::Forall(..)) { "forall" } else { "exists" };
            let _ = write!(out, "{kw} {v}. ");
            write_formula(out, b);
        }
    }
}

impl std::fmt::Display for Formula {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&print_formula(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Term;

    #[test]
    fn atoms_and_negation() {
        let pa = Formula::atom("P", vec![Term::constant("a")]);
        assert_eq!(print_formula(&pa), "P(a)");
        assert_eq!(print_formula(&Formula::not(pa)), "-P(a)");
        assert_eq!(print_formula(&Formula::atom("Rain", vec![])), "Rain");
        assert_eq!(print_formula(&Formula::Bool(true)), "1");
    }

    #[test]
    fn quantified_disjunction() {
        let px = Formula::atom("P", vec![Term::var("x")]);
        let qx = Formula::atom("Q", vec![Term::var("x")]);
        let f = Formula::forall("x", Formula::or(vec![Formula::not(px), qx]));
        assert_eq!(print_formula(&f), "forall x. (-P(x) | Q(x))");
    }

    #[test]
    fn quantified_operand_is_guarded() {
        let px = Formula::atom("P", vec![Term::var("x")]);
        let qa = Formula::atom("Q", vec![Term::constant("a")]);
        let f = Formula::and(vec![Formula::not(Formula::forall("x", px.clone())), qa.clone()]);
        assert_eq!(print_formula(&f), "((-forall x. P(x)) & Q(a))");
        let g = Formula::and(vec![qa, Formula::exists("x", px)]);
        assert_eq!(print_formula(&g), "(Q(a) & exists x. P(x))");
    }
}
