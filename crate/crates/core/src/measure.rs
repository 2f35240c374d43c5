//! The termination measure `(i, n, qd, s, v, d)`, compared lexicographically.
//!
//! - `i`: implication and biconditional nodes.
//! - `n`: for every negation whose operand is not atomic, the number of non-atomic
//!   nodes in the operand. Weighting by operand size (rather than counting the
//!   negations) is what lets De Morgan steps, which create one negation per
//!   operand, still decrease the component.
//! - `qd`: for every quantifier, the number of non-quantifier nodes above it.
//! - `s`: for every `&`/`|` node, one if some child uses the same connective, plus
//!   the number of adjacent children out of ≺ order (keys taken in context).
//! - `v`: quantifiers that are direct children of `&`/`|` and whose variable is free
//!   in a sibling, so lifting them would capture.
//! - `d`: in the leading quantifier prefix, adjacent binders of one block whose
//!   order disagrees with the first occurrence of their variables in the matrix.
//!
//! All six components vanish exactly on formulas in canonical prenex negation
//! normal form.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::formula::{free_vars, Formula, Term};
use crate::order::{cluster_members, KeyCtx};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Measure {
    pub i: usize,
    pub n: usize,
    pub qd: usize,
    pub s: usize,
    pub v: usize,
    pub d: usize,
}

impl Measure {
    pub const ZERO: Measure = Measure { i: 0, n: 0, qd: 0, s: 0, v: 0, d: 0 };

    pub fn is_zero(&self) -> bool {
        *self == Measure::ZERO
    }

    pub fn as_tuple(&self) -> [usize; 6] {
        [self.i, self.n, self.qd, self.s, self.v, self.d]
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{},{},{},{})", self.i, self.n, self.qd, self.s, self.v, self.d)
    }
}

pub fn measure(phi: &Formula) -> Measure {
    let mut m = Measure::ZERO;
    walk(phi, &KeyCtx::default(), 0, &mut m);
    m.d = block_disorder(phi);
    m
}

fn non_atomic_nodes(f: &Formula) -> usize {
    if f.is_atomic() {
        0
    } else {
        1 + f.children().into_iter().map(non_atomic_nodes).sum::<usize>()
    }
}

fn walk(f: &Formula, ctx: &KeyCtx, non_quant_above: usize, m: &mut Measure) {
    let below = if f.is_quant() { non_quant_above } else { non_quant_above + 1 };
    match f {
        Formula::Implies(..) | Formula::Iff(..) => m.i += 1,
        Formula::Not(b) if !b.is_atomic() => m.n += non_atomic_nodes(b),
        Formula::Forall(..) | Formula::Exists(..) => m.qd += non_quant_above,
        Formula::And(cs) | Formula::Or(cs) => {
            let (conn, _) = f.as_junction().unwrap();
            let inner = ctx.enter(f);
            if cs.iter().any(|c| c.as_junction().map(|(k, _)| k) == Some(conn)) {
                m.s += 1;
            }
            let keys: Vec<String> =
                cs.iter().map(|c| crate::order::key_in(&inner, c)).collect();
            m.s += keys.windows(2).filter(|w| w[0] > w[1]).count();
            for (idx, c) in cs.iter().enumerate() {
                if let Some((_, var, _)) = c.as_quant() {
                    let blocked = cs
                        .iter()
                        .enumerate()
                        .any(|(j, sib)| j != idx && free_vars(sib).contains(var));
                    if blocked {
                        m.v += 1;
                    }
                }
            }
        }
        _ => {}
    }
    let inner = ctx.enter(f);
    for c in f.children() {
        walk(c, &inner, below, m);
    }
}

/// Leading prefix of `phi` as `(quantifier node, binder)` pairs and the matrix.
pub(crate) fn prefix(phi: &Formula) -> (Vec<&Formula>, &Formula) {
    let mut binders = Vec::new();
    let mut node = phi;
    while let Some((_, _, body)) = node.as_quant() {
        binders.push(node);
        node = body;
    }
    (binders, node)
}

/// Sort keys of the binders in the leading prefix; `None` stands for "after every
/// occurring variable" (the binder is vacuous or shadowed by a later block).
pub(crate) fn binder_keys(phi: &Formula) -> Vec<Option<usize>> {
    let (binders, matrix) = prefix(phi);
    let mut first: HashMap<String, usize> = HashMap::new();
    let mut pos = 0usize;
    matrix.visit_atoms(&mut |_, args| {
        for t in args {
            if let Term::Var(v) = t {
                first.entry(v.clone()).or_insert(pos);
                pos += 1;
            }
        }
    });
    let quants: Vec<_> = binders.iter().map(|b| b.as_quant().unwrap()).collect();
    // block index of every binder position
    let mut block = Vec::with_capacity(quants.len());
    for (i, (q, _, _)) in quants.iter().enumerate() {
        let b = match i {
            0 => 0,
            _ if quants[i - 1].0 == *q => block[i - 1],
            _ => block[i - 1] + 1,
        };
        block.push(b);
    }
    (0..quants.len())
        .map(|i| {
            let name = quants[i].1;
            let effective = (0..quants.len()).rev().find(|&j| quants[j].1 == name).unwrap();
            if block[effective] == block[i] {
                first.get(name).copied()
            } else {
                None
            }
        })
        .collect()
}

fn key_gt(a: Option<usize>, b: Option<usize>) -> bool {
    match (a, b) {
        (None, _) => b.is_some(),
        (Some(_), None) => false,
        (Some(x), Some(y)) => x > y,
    }
}

fn block_disorder(phi: &Formula) -> usize {
    let (binders, _) = prefix(phi);
    let keys = binder_keys(phi);
    (1..binders.len())
        .filter(|&i| {
            binders[i - 1].as_quant().unwrap().0 == binders[i].as_quant().unwrap().0
                && key_gt(keys[i - 1], keys[i])
        })
        .count()
}

/// Stable sort of binder indices `start..start + len` by binder key.
pub(crate) fn sorted_block_order(keys: &[Option<usize>], start: usize, len: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (start..start + len).collect();
    idx.sort_by(|&a, &b| match (keys[a], keys[b]) {
        (None, None) => std::cmp::Ordering::Equal,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (Some(_), None) => std::cmp::Ordering::Less,
        (Some(x), Some(y)) => x.cmp(&y),
    });
    idx
}

/// Maximal same-kind runs `(start, len)` of the leading prefix.
pub(crate) fn prefix_blocks(phi: &Formula) -> Vec<(usize, usize)> {
    let (binders, _) = prefix(phi);
    let mut out: Vec<(usize, usize)> = Vec::new();
    for (i, b) in binders.iter().enumerate() {
        let q = b.as_quant().unwrap().0;
        match out.last_mut() {
            Some((s, l)) if binders[*s].as_quant().unwrap().0 == q => *l += 1,
            _ => out.push((i, 1)),
        }
    }
    out
}

#[allow(dead_code)]
pub(crate) fn cluster_disorder(ctx: &KeyCtx, f: &Formula) -> bool {
    match f.as_junction() {
        Some((conn, _)) => {
            let members = cluster_members(ctx, f, conn);
            members.len() != f.children().len()
                || members.windows(2).any(|w| w[0].1 > w[1].1)
        }
        None => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_formula;

    fn m(s: &str) -> Measure {
        measure(&parse_formula(s).unwrap())
    }

    #[test]
    fn component_examples() {
        assert!(m("P(a)").is_zero());
        assert_eq!(m("P(a) -> Q(b)"), Measure { i: 1, ..Measure::ZERO });
        assert_eq!(m("-(P(a) & Q(b))"), Measure { n: 1, ..Measure::ZERO });
        assert_eq!(m("--P(a)").n, 1);
        assert_eq!(m("-(-P(a) | --Q(b))").n, 5);
    }

    #[test]
    fn quantifier_displacement() {
        assert_eq!(m("P(a) & forall x. Q(x)").qd, 1);
        assert_eq!(m("forall x. (P(a) & exists y. Q(y))").qd, 1);
        assert_eq!(m("forall x. exists y. (P(x) & Q(y))").qd, 0);
        assert_eq!(m("-forall x. P(x)").qd, 1);
    }

    #[test]
    fn structural_disorder() {
        assert_eq!(m("Q(b) & P(a)").s, 1);
        assert_eq!(m("P(a) & Q(b)").s, 0);
        assert_eq!(m("P(a) & (Q(b) & R(c))").s, 2);
        assert_eq!(m("(Q(b) & R(c)) & P(a)").s, 1);
        // ties are not disorder
        assert_eq!(m("P(a) & P(a)").s, 0);
    }

    #[test]
    fn conflicts_and_block_order() {
        assert_eq!(m("forall x. (P(x) | exists x. Q(x))").v, 1);
        assert_eq!(m("forall x. (exists y. Q(y) | P(x))").v, 0);
        assert_eq!(m("forall y. forall x. R(x, y)").d, 1);
        assert_eq!(m("forall x. forall y. R(x, y)").d, 0);
        assert_eq!(m("forall x. exists y. R(y, x)").d, 0);
        assert_eq!(m("forall x. forall y. P(y)").d, 1);
    }

    #[test]
    fn lexicographic_order() {
        let a = Measure { i: 1, ..Measure::ZERO };
        let b = Measure { n: 5, qd: 9, ..Measure::ZERO };
        assert!(b < a);
    }
}
