//! Redex matching and one-step application for the formula-level relations.

use std::collections::BTreeMap;

use super::{Binding, MrId, Redex, RewriteError, RewriteStep, Shape};
use crate::formula::{all_vars, alpha_equal, free_vars, fresh_var, substitute, Conn, Formula, Term};
use crate::measure::{binder_keys, prefix_blocks, sorted_block_order};
use crate::order::{cluster_members, context_at};

/// All redexes of `mr` in `phi`, leftmost-outermost. Test-case level relations
/// have no formula redexes.
pub fn find_redexes(phi: &Formula, mr: MrId) -> Vec<Redex> {
    find_redexes_with(phi, mr, 0)
}

pub(crate) fn find_redexes_with(phi: &Formula, mr: MrId, fresh_offset: usize) -> Vec<Redex> {
    if !mr.is_formula_level() {
        return Vec::new();
    }
    let mut out = Vec::new();
    if mr == MrId::E1_6 {
        block_redexes(phi, &mut out);
        return out;
    }
    let fresh = (mr == MrId::E1_5).then(|| fresh_var(&all_vars(phi), fresh_offset));
    let positions = phi.positions();
    for (path, node) in &positions {
        let parent = (!path.is_empty()).then(|| phi.at_path(&path[..path.len() - 1]).unwrap());
        node_redexes(phi, path, node, parent, mr, fresh.as_deref(), &mut out);
    }
    out
}

fn redex(mr: MrId, path: &[usize], node: &Formula, shape: Shape, binding: Vec<(&str, Binding)>) -> Redex {
    Redex {
        mr,
        path: path.to_vec(),
        shape,
        binding: binding
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect::<BTreeMap<_, _>>(),
        matched: node.clone(),
    }
}

fn f(x: &Formula) -> Binding {
    Binding::Formula(x.clone())
}

/// Siblings of child `k` as a single formula (for bindings only).
fn rest(conn: Conn, cs: &[Formula], k: usize) -> Formula {
    let others: Vec<Formula> = cs
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != k)
        .map(|(_, c)| c.clone())
        .collect();
    Formula::junction_or_single(conn, others)
}

pub(crate) fn cluster_is_canonical(root: &Formula, path: &[usize], node: &Formula) -> bool {
    let Some((conn, cs)) = node.as_junction() else {
        return true;
    };
    if cs.iter().any(|c| c.as_junction().map(|(k, _)| k) == Some(conn)) {
        return false;
    }
    let members = cluster_members(&context_at(root, path), node, conn);
    members.windows(2).all(|w| w[0].1 <= w[1].1)
}

fn node_redexes(
    root: &Formula,
    path: &[usize],
    node: &Formula,
    parent: Option<&Formula>,
    mr: MrId,
    fresh: Option<&str>,
    out: &mut Vec<Redex>,
) {
    match mr {
        MrId::E1_1 => match node {
            Formula::Implies(a, b) => out.push(redex(
                mr,
                path,
                node,
                Shape::ImplElim,
                vec![("phi", f(a)), ("psi", f(b))],
            )),
            Formula::Iff(a, b) => out.push(redex(
                mr,
                path,
                node,
                Shape::IffElim,
                vec![("phi", f(a)), ("psi", f(b))],
            )),
            _ => {}
        },
        MrId::E1_2 => {
            if let Formula::Not(body) = node {
                let shape = match &**body {
                    Formula::Not(_) => Some(Shape::DoubleNeg),
                    Formula::And(_) | Formula::Or(_) => Some(Shape::DeMorgan),
                    Formula::Forall(..) | Formula::Exists(..) => Some(Shape::QuantDuality),
                    _ => None,
                };
                if let Some(shape) = shape {
                    out.push(redex(mr, path, node, shape, vec![("phi", f(body))]));
                }
            }
        }
        MrId::E1_3 | MrId::E1_5 => {
            let Some((conn, cs)) = node.as_junction() else { return };
            for (k, c) in cs.iter().enumerate() {
                let Some((q, x, body)) = c.as_quant() else { continue };
                let siblings = cs.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, s)| s);
                let binding = |extra: Vec<(&'static str, Binding)>| {
                    let mut b = vec![
                        ("Q", Binding::Quant(q)),
                        ("x", Binding::Var(x.to_string())),
                        ("phi", f(body)),
                        ("psi", f(&rest(conn, cs, k))),
                        ("op", Binding::Conn(conn)),
                    ];
                    b.extend(extra);
                    b
                };
                if mr == MrId::E1_3 {
                    let blocked = siblings.clone().any(|s| free_vars(s).contains(x));
                    if !blocked {
                        out.push(redex(mr, path, node, Shape::Lift { child: k }, binding(vec![])));
                    }
                } else {
                    let clash = siblings.clone().any(|s| all_vars(s).contains(x));
                    if clash {
                        let y = fresh.expect("fresh name for renaming").to_string();
                        out.push(redex(
                            mr,
                            path,
                            node,
                            Shape::Rename { child: k, fresh: y.clone() },
                            binding(vec![("y", Binding::Var(y))]),
                        ));
                    }
                }
            }
        }
        MrId::E1_4 => {
            let Some((conn, _)) = node.as_junction() else { return };
            let is_root = parent.and_then(|p| p.as_junction()).map(|(k, _)| k) != Some(conn);
            if is_root && !cluster_is_canonical(root, path, node) {
                out.push(redex(mr, path, node, Shape::Canonicalize, vec![("op", Binding::Conn(conn))]));
            }
        }
        MrId::E2_1 => {
            let Some((conn, cs)) = node.as_junction() else { return };
            for i in 0..cs.len() {
                for j in i + 1..cs.len() {
                    if alpha_equal(&cs[i], &cs[j]) {
                        out.push(redex(
                            mr,
                            path,
                            node,
                            Shape::Idempotent { keep: i, drop: j },
                            vec![("phi", f(&cs[i])), ("op", Binding::Conn(conn))],
                        ));
                    }
                }
            }
            for (keep, phi) in cs.iter().enumerate() {
                for (drop, other) in cs.iter().enumerate() {
                    if keep == drop {
                        continue;
                    }
                    if let Some((k2, inner)) = other.as_junction() {
                        if k2 == conn.dual() && inner.iter().any(|c| alpha_equal(c, phi)) {
                            out.push(redex(
                                mr,
                                path,
                                node,
                                Shape::Absorb { keep, drop },
                                vec![("phi", f(phi)), ("psi", f(other)), ("op", Binding::Conn(conn))],
                            ));
                        }
                    }
                }
            }
        }
        MrId::E2_2 => {
            let Some((conn, cs)) = node.as_junction() else { return };
            for (pos, phi) in cs.iter().enumerate() {
                for (neg, other) in cs.iter().enumerate() {
                    if let Formula::Not(inner) = other {
                        if pos != neg && alpha_equal(inner, phi) {
                            out.push(redex(
                                mr,
                                path,
                                node,
                                Shape::Complement { pos, neg },
                                vec![("phi", f(phi)), ("op", Binding::Conn(conn))],
                            ));
                        }
                    }
                }
            }
        }
        MrId::E2_3 => {
            let Some((conn, cs)) = node.as_junction() else { return };
            let unit = conn == Conn::And;
            for (idx, c) in cs.iter().enumerate() {
                if let Formula::Bool(b) = c {
                    let shape = if *b == unit {
                        Shape::Identity { idx }
                    } else {
                        Shape::Dominate { idx }
                    };
                    out.push(redex(
                        mr,
                        path,
                        node,
                        shape,
                        vec![("phi", f(&rest(conn, cs, idx))), ("op", Binding::Conn(conn))],
                    ));
                }
            }
        }
        MrId::E2_4 => {
            let Some((conn, cs)) = node.as_junction() else { return };
            for (idx, c) in cs.iter().enumerate() {
                if c.as_junction().map(|(k, _)| k) == Some(conn.dual()) {
                    out.push(redex(
                        mr,
                        path,
                        node,
                        Shape::Distribute { idx },
                        vec![
                            ("phi", f(&rest(conn, cs, idx))),
                            ("psi", f(c)),
                            ("op", Binding::Conn(conn)),
                        ],
                    ));
                }
            }
        }
        MrId::E1_6 => unreachable!("block redexes are found at the prefix"),
        _ => {}
    }
}

fn block_redexes(phi: &Formula, out: &mut Vec<Redex>) {
    let keys = binder_keys(phi);
    for (start, len) in prefix_blocks(phi) {
        if len < 2 {
            continue;
        }
        let order = sorted_block_order(&keys, start, len);
        if order.iter().copied().eq(start..start + len) {
            continue;
        }
        // Sorting is stable, so an unchanged order means the block is sorted already.
        let path = vec![0; start];
        let node = phi.at_path(&path).unwrap();
        let q = node.as_quant().unwrap().0;
        out.push(redex(
            MrId::E1_6,
            &path,
            node,
            Shape::SortBlock {
                len,
                order: order.iter().map(|i| i - start).collect(),
            },
            vec![("Q", Binding::Quant(q))],
        ));
    }
}

fn remove_indices(cs: &[Formula], drop: &[usize]) -> Vec<Formula> {
    cs.iter()
        .enumerate()
        .filter(|(i, _)| !drop.contains(i))
        .map(|(_, c)| c.clone())
        .collect()
}

fn rewrite_node(root: &Formula, path: &[usize], node: &Formula, shape: &Shape) -> Option<Formula> {
    Some(match (shape, node) {
        (Shape::ImplElim, Formula::Implies(a, b)) => {
            Formula::or(vec![Formula::not((**a).clone()), (**b).clone()])
        }
        (Shape::IffElim, Formula::Iff(a, b)) => Formula::and(vec![
            Formula::or(vec![Formula::not((**a).clone()), (**b).clone()]),
            Formula::or(vec![Formula::not((**b).clone()), (**a).clone()]),
        ]),
        (Shape::DoubleNeg, Formula::Not(b)) => match &**b {
            Formula::Not(inner) => (**inner).clone(),
            _ => return None,
        },
        (Shape::DeMorgan, Formula::Not(b)) => {
            let (conn, cs) = b.as_junction()?;
            Formula::junction(conn.dual(), cs.iter().map(|c| Formula::not(c.clone())).collect())
        }
        (Shape::QuantDuality, Formula::Not(b)) => {
            let (q, x, body) = b.as_quant()?;
            Formula::quant(q.dual(), x, Formula::not(body.clone()))
        }
        (Shape::Lift { child }, _) => {
            let (conn, cs) = node.as_junction()?;
            let (q, x, body) = cs.get(*child)?.as_quant()?;
            let mut kids = cs.to_vec();
            kids[*child] = body.clone();
            Formula::quant(q, x, Formula::junction(conn, kids))
        }
        (Shape::Rename { child, fresh }, _) => {
            let (conn, cs) = node.as_junction()?;
            let (q, x, body) = cs.get(*child)?.as_quant()?;
            let mut kids = cs.to_vec();
            kids[*child] = Formula::quant(q, fresh.clone(), substitute(body, x, &Term::var(fresh.clone())));
            Formula::junction(conn, kids)
        }
        (Shape::Canonicalize, _) => {
            let (conn, _) = node.as_junction()?;
            let mut members = cluster_members(&context_at(root, path), node, conn);
            members.sort_by(|a, b| a.1.cmp(&b.1));
            Formula::junction(conn, members.into_iter().map(|(m, _)| m.clone()).collect())
        }
        (Shape::SortBlock { len, order }, _) => {
            let mut binders = Vec::with_capacity(*len);
            let mut cur = node;
            for _ in 0..*len {
                let (q, x, body) = cur.as_quant()?;
                binders.push((q, x.to_string()));
                cur = body;
            }
            order
                .iter()
                .rev()
                .fold(cur.clone(), |acc, &k| Formula::quant(binders[k].0, binders[k].1.clone(), acc))
        }
        (Shape::Idempotent { drop, .. } | Shape::Absorb { drop, .. }, _) => {
            let (conn, cs) = node.as_junction()?;
            Formula::junction_or_single(conn, remove_indices(cs, &[*drop]))
        }
        (Shape::Complement { pos, neg }, _) => {
            let (conn, cs) = node.as_junction()?;
            let value = Formula::Bool(conn == Conn::Or);
            if cs.len() == 2 {
                value
            } else {
                let at = (*pos).min(*neg);
                let mut kids = remove_indices(cs, &[*pos, *neg]);
                kids.insert(at, value);
                Formula::junction_or_single(conn, kids)
            }
        }
        (Shape::Identity { idx }, _) => {
            let (conn, cs) = node.as_junction()?;
            Formula::junction_or_single(conn, remove_indices(cs, &[*idx]))
        }
        (Shape::Dominate { idx }, _) => {
            let (_, cs) = node.as_junction()?;
            cs.get(*idx)?.clone()
        }
        (Shape::Distribute { idx }, _) => {
            let (conn, cs) = node.as_junction()?;
            let (_, inner) = cs.get(*idx)?.as_junction()?;
            Formula::junction(
                conn.dual(),
                inner
                    .iter()
                    .map(|d| {
                        let mut kids = cs.to_vec();
                        kids[*idx] = d.clone();
                        Formula::junction(conn, kids)
                    })
                    .collect(),
            )
        }
        _ => return None,
    })
}

/// Applies `r` to `phi`.
pub fn apply(phi: &Formula, r: &Redex) -> Result<Formula, RewriteError> {
    let stale = || RewriteError::StaleRedex {
        mr: r.mr,
        path: r.path_text(),
    };
    let node = phi.at_path(&r.path).ok_or_else(stale)?;
    if *node != r.matched {
        return Err(stale());
    }
    let replacement = rewrite_node(phi, &r.path, node, &r.shape).ok_or_else(stale)?;
    phi.replace_at(&r.path, replacement).ok_or_else(stale)
}

/// Applies `r` and records the step with both measures.
pub fn step(phi: &Formula, r: &Redex) -> Result<RewriteStep, RewriteError> {
    let after = apply(phi, r)?;
    Ok(RewriteStep::new(phi.clone(), after, r.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_formula, parse_formula_with_vars};

    fn p(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn only(phi: &Formula, mr: MrId) -> Formula {
        let rs = find_redexes(phi, mr);
        assert_eq!(rs.len(), 1, "{rs:?}");
        apply(phi, &rs[0]).unwrap()
    }

    #[test]
    fn implication_elimination() {
        let phi = p("P(a) -> Q(b)");
        let rs = find_redexes(&phi, MrId::E1_1);
        assert_eq!(rs.len(), 1);
        assert!(rs[0].path.is_empty());
        let open = parse_formula_with_vars(
            "ResidentOf(x, lawtonPark) -> UseZipCode(x, num98199)",
            &["x"],
        )
        .unwrap();
        let out = only(&open, MrId::E1_1);
        let expected = parse_formula_with_vars(
            "-ResidentOf(x, lawtonPark) | UseZipCode(x, num98199)",
            &["x"],
        )
        .unwrap();
        assert_eq!(out, expected);
        assert_eq!(
            only(&p("P(a) <-> Q(b)"), MrId::E1_1),
            p("(-P(a) | Q(b)) & (-Q(b) | P(a))")
        );
    }

    #[test]
    fn negation_redexes() {
        assert!(find_redexes(&p("P(a)"), MrId::E1_2).is_empty());
        let phi = p("-(P(a) & --Q(b))");
        let paths: Vec<_> = find_redexes(&phi, MrId::E1_2).into_iter().map(|r| r.path).collect();
        assert_eq!(paths, vec![vec![], vec![0, 1]]);
        assert_eq!(only(&p("--P(a)"), MrId::E1_2), p("P(a)"));
        assert_eq!(only(&p("-(P(a) | Q(b))"), MrId::E1_2), p("-P(a) & -Q(b)"));
        assert_eq!(only(&p("-forall x. P(x)"), MrId::E1_2), p("exists x. -P(x)"));
        assert!(find_redexes(&p("-(P(a) -> Q(b))"), MrId::E1_2).is_empty());
    }

    #[test]
    fn lifting_respects_free_variables() {
        let phi = p("(forall x. P(x)) & Q(a)");
        assert_eq!(only(&phi, MrId::E1_3), p("forall x. (P(x) & Q(a))"));
        let blocked = p("forall x. ((exists x. P(x)) | Q(x))");
        assert!(find_redexes(&blocked, MrId::E1_3).is_empty());
        let renamed = only(&blocked, MrId::E1_5);
        assert_eq!(renamed, p("forall x. ((exists v1. P(v1)) | Q(x))"));
        assert_eq!(only(&renamed, MrId::E1_3), p("forall x. exists v1. (P(v1) | Q(x))"));
    }

    #[test]
    fn structural_normalization() {
        assert_eq!(only(&p("Q(b) & (R(c) & P(a))"), MrId::E1_4), p("P(a) & Q(b) & R(c)"));
        assert!(find_redexes(&p("P(a) & Q(b)"), MrId::E1_4).is_empty());
        // only the cluster root is a redex
        let rs = find_redexes(&p("(Q(b) & P(a)) & R(c)"), MrId::E1_4);
        assert_eq!(rs.len(), 1);
        assert!(rs[0].path.is_empty());
    }

    #[test]
    fn block_ordering() {
        assert_eq!(
            only(&p("forall y. forall x. R(x, y)"), MrId::E1_6),
            p("forall x. forall y. R(x, y)")
        );
        assert!(find_redexes(&p("forall x. exists y. R(y, x)"), MrId::E1_6).is_empty());
        let phi = p("exists z. forall y. forall x. exists w. exists u. R(x, y, u, w, z)");
        let rs = find_redexes(&phi, MrId::E1_6);
        assert_eq!(rs.len(), 2);
        assert_eq!(rs[0].path, vec![0]);
        assert_eq!(rs[1].path, vec![0, 0, 0]);
    }

    #[test]
    fn redundancy_laws() {
        assert_eq!(only(&p("P(a) | P(a)"), MrId::E2_1), p("P(a)"));
        assert_eq!(only(&p("P(a) & (P(a) | Q(b))"), MrId::E2_1), p("P(a)"));
        assert_eq!(only(&p("P(a) | -P(a)"), MrId::E2_2), p("1"));
        assert_eq!(only(&p("Q(b) & P(a) & -P(a)"), MrId::E2_2), p("Q(b) & 0"));
        assert_eq!(only(&p("P(a) & 1"), MrId::E2_3), p("P(a)"));
        assert_eq!(only(&p("P(a) | 1"), MrId::E2_3), p("1"));
        assert_eq!(only(&p("P(a) & 0"), MrId::E2_3), p("0"));
        assert_eq!(only(&p("P(a) | 0"), MrId::E2_3), p("P(a)"));
    }

    #[test]
    fn distribution() {
        assert_eq!(
            only(&p("P(a) & (Q(b) | R(c))"), MrId::E2_4),
            p("(P(a) & Q(b)) | (P(a) & R(c))")
        );
        assert_eq!(
            only(&p("P(a) | (Q(b) & R(c))"), MrId::E2_4),
            p("(P(a) | Q(b)) & (P(a) | R(c))")
        );
    }

    #[test]
    fn stale_redexes_are_rejected() {
        let phi = p("--P(a)");
        let r = find_redexes(&phi, MrId::E1_2).remove(0);
        assert!(matches!(apply(&p("--Q(a)"), &r), Err(RewriteError::StaleRedex { .. })));
        assert!(matches!(apply(&p("P(a)"), &r), Err(RewriteError::StaleRedex { .. })));
    }

    #[test]
    fn case_level_relations_have_no_redexes() {
        for mr in [MrId::S1, MrId::P1, MrId::C3] {
            assert!(find_redexes(&p("P(a) & P(a)"), mr).is_empty());
        }
    }
}
