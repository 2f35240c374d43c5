//! The canonical ordering ≺.
//!
//! Formulas are compared by the byte order of a canonical serialization. The
//! serialization flattens nested `&`/`|` clusters and sorts their members, and it
//! renders a bound variable as the index of the quantifier *block* that binds it
//! (a block is a maximal run of directly nested quantifiers of one kind). Bound
//! names therefore never influence the order, and neither does the order of
//! binders inside a block.

use std::cmp::Ordering;

use crate::formula::{Conn, Formula, Quant, Term};

/// Binding context under which a subformula is serialized.
#[derive(Clone, Debug, Default)]
pub struct KeyCtx {
    env: Vec<(String, usize)>,
    blocks: usize,
    parent_quant: Option<Quant>,
}

impl KeyCtx {
    /// Context seen by the children of `node` when `node` sits in `self`.
    pub fn enter(&self, node: &Formula) -> KeyCtx {
        let mut next = self.clone();
        match node.as_quant() {
            Some((q, var, _)) => {
                if self.parent_quant != Some(q) {
                    next.blocks += 1;
                }
                next.env.push((var.to_string(), next.blocks));
                next.parent_quant = Some(q);
            }
            None => next.parent_quant = None,
        }
        next
    }

    fn render_term(&self, t: &Term, out: &mut String) {
        match t {
            Term::Const(c) => out.push_str(c),
            Term::Var(v) => match self.env.iter().rev().find(|(n, _)| n == v) {
                Some((_, b)) => {
                    out.push('#');
                    out.push_str(&b.to_string());
                }
                None => {
                    out.push('?');
                    out.push_str(v);
                }
            },
        }
    }
}

/// Context of the node at `path` inside `phi`.
pub fn context_at(phi: &Formula, path: &[usize]) -> KeyCtx {
    let mut ctx = KeyCtx::default();
    let mut node = phi;
    for &i in path {
        ctx = ctx.enter(node);
        node = node.child(i).expect("path addresses a node");
    }
    ctx
}

/// Canonical serialization of `f` in context `ctx`.
pub fn key_in(ctx: &KeyCtx, f: &Formula) -> String {
    let mut out = String::new();
    write_key(ctx, f, &mut out);
    out
}

/// Canonical serialization of a standalone formula.
pub fn canonical_key(phi: &Formula) -> String {
    key_in(&KeyCtx::default(), phi)
}

/// Compares two formulas under ≺.
pub fn compare(a: &Formula, b: &Formula) -> Ordering {
    canonical_key(a).cmp(&canonical_key(b))
}

/// Flattened members of the `conn` cluster rooted at `f` (whose context is `ctx`),
/// each paired with its key. Members keep their left-to-right order.
pub fn cluster_members<'a>(ctx: &KeyCtx, f: &'a Formula, conn: Conn) -> Vec<(&'a Formula, String)> {
    let mut out = Vec::new();
    collect_cluster(ctx, f, conn, &mut out);
    out
}

fn collect_cluster<'a>(ctx: &KeyCtx, f: &'a Formula, conn: Conn, out: &mut Vec<(&'a Formula, String)>) {
    let inner = ctx.enter(f);
    for c in f.as_junction().map(|(_, cs)| cs).unwrap_or_default() {
        match c.as_junction() {
            Some((k, _)) if k == conn => collect_cluster(&inner, c, conn, out),
            _ => out.push((c, key_in(&inner, c))),
        }
    }
}

fn write_key(ctx: &KeyCtx, f: &Formula, out: &mut String) {
    match f {
        Formula::Atom { pred, args } => {
            out.push_str(pred);
            out.push('(');
            for a in args {
                ctx.render_term(a, out);
                out.push(',');
            }
            out.push(')');
        }
        Formula::Bool(true) => out.push('1'),
        Formula::Bool(false) => out.push('0'),
        Formula::Not(b) => {
            out.push('-');
            write_key(&ctx.enter(f), b, out);
        }
        Formula::And(_) | Formula::Or(_) => {
            let (conn, _) = f.as_junction().unwrap();
            let mut keys: Vec<String> =
                cluster_members(ctx, f, conn).into_iter().map(|(_, k)| k).collect();
            keys.sort();
            out.push('(');
            out.push_str(&keys.join(if conn == Conn::And { "&" } else { "|" }));
            out.push(')');
        }
        Formula::Implies(a, b) | Formula::Iff(a, b) => {
            let inner = ctx.enter(f);
            out.push('(');
            write_key(&inner, a, out);
            out.push(if matches!(f, Formula::Implies(..)) { '>' } else { '=' });
            write_key(&inner, b, out);
            out.push(')');
        }
        Formula::Forall(_, b) | Formula::Exists(_, b) => {
            out.push_str(if matches!(f, Formula::Forall(..)) { "A." } else { "E." });
            write_key(&ctx.enter(f), b, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_formula;

    fn k(s: &str) -> String {
        canonical_key(&parse_formula(s).unwrap())
    }

    #[test]
    fn alpha_variants_share_keys() {
        assert_eq!(k("forall x. P(x)"), k("forall y. P(y)"));
        assert_eq!(
            k("forall x. forall y. R(x, y)"),
            k("forall y. forall x. R(x, y)")
        );
        assert_ne!(k("forall x. exists y. R(x, y)"), k("exists y. forall x. R(x, y)"));
    }

    #[test]
    fn clusters_are_order_and_nesting_insensitive() {
        assert_eq!(k("P(a) & (Q(b) & R(c))"), k("(R(c) & P(a)) & Q(b)"));
        assert_ne!(k("P(a) & Q(b)"), k("P(a) | Q(b)"));
        assert_ne!(k("P(a) -> Q(b)"), k("Q(b) -> P(a)"));
    }

    #[test]
    fn byte_order_examples() {
        assert_eq!(
            compare(&parse_formula("-P(a)").unwrap(), &parse_formula("Q(b)").unwrap()),
            Ordering::Less
        );
        assert_eq!(
            compare(&parse_formula("P(a)").unwrap(), &parse_formula("P(b)").unwrap()),
            Ordering::Less
        );
    }

    #[test]
    fn context_renders_outer_binders() {
        let f = parse_formula("forall x. exists y. (P(x) & Q(y))").unwrap();
        let ctx = context_at(&f, &[0, 0]);
        let members = cluster_members(&ctx, f.at_path(&[0, 0]).unwrap(), Conn::And);
        let keys: Vec<_> = members.into_iter().map(|(_, k)| k).collect();
        assert_eq!(keys, vec!["P(#1,)", "Q(#2,)"]);
    }
}
