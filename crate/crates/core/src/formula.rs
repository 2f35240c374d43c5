//! First-order abstract syntax, variable bookkeeping, capture-avoiding
//! substitution and α-equivalence.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

/// A predicate argument. Function symbols are not part of the language.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Const(String),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn constant(name: impl Into<String>) -> Self {
        Term::Const(name.into())
    }

    pub fn name(&self) -> &str {
        match self {
            Term::Var(n) | Term::Const(n) => n,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Quant {
    Forall,
    Exists,
}

impl Quant {
    pub fn dual(self) -> Quant {
        match self {
            Quant::Forall => Quant::Exists,
            Quant::Exists => Quant::Forall,
        }
    }
}

/// Associative-commutative connectives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Conn {
    And,
    Or,
}

impl Conn {
    pub fn dual(self) -> Conn {
        match self {
            Conn::And => Conn::Or,
            Conn::Or => Conn::And,
        }
    }
}

/// A first-order formula.
///
/// `And` and `Or` carry at least two children; nesting of the same connective is
/// allowed and is removed only by rewriting. Equality is the binary predicate `Eq`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Atom { pred: String, args: Vec<Term> },
    Bool(bool),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Forall(String, Box<Formula>),
    Exists(String, Box<Formula>),
}

/// Name of the binary predicate that stands for equality.
pub const EQUALITY: &str = "Eq";

impl Formula {
    pub fn atom(pred: impl Into<String>, args: Vec<Term>) -> Self {
        Formula::Atom {
            pred: pred.into(),
            args,
        }
    }

    pub fn not(body: Formula) -> Self {
        Formula::Not(Box::new(body))
    }

    pub fn and(children: Vec<Formula>) -> Self {
        debug_assert!(children.len() >= 2, "And needs at least two children");
        Formula::And(children)
    }

    pub fn or(children: Vec<Formula>) -> Self {
        debug_assert!(children.len() >= 2, "Or needs at least two children");
        Formula::Or(children)
    }

    pub fn junction(conn: Conn, children: Vec<Formula>) -> Self {
        match conn {
            Conn::And => Formula::and(children),
            Conn::Or => Formula::or(children),
        }
    }

    /// Builds a junction, collapsing to the single child (or the unit) when fewer than
    /// two children remain.
    pub fn junction_or_single(conn: Conn, mut children: Vec<Formula>) -> Self {
        match children.len() {
            0 => Formula::Bool(conn == Conn::And),
            1 => children.pop().unwrap(),
            _ => Formula::junction(conn, children),
        }
    }

    pub fn implies(antecedent: Formula, consequent: Formula) -> Self {
        Formula::Implies(Box::new(antecedent), Box::new(consequent))
    }

    pub fn iff(left: Formula, right: Formula) -> Self {
        Formula::Iff(Box::new(left), Box::new(right))
    }

    pub fn forall(var: impl Into<String>, body: Formula) -> Self {
        Formula::Forall(var.into(), Box::new(body))
    }

    pub fn exists(var: impl Into<String>, body: Formula) -> Self {
        Formula::Exists(var.into(), Box::new(body))
    }

    pub fn quant(q: Quant, var: impl Into<String>, body: Formula) -> Self {
        match q {
            Quant::Forall => Formula::forall(var, body),
            Quant::Exists => Formula::exists(var, body),
        }
    }

    pub fn as_quant(&self) -> Option<(Quant, &str, &Formula)> {
        match self {
            Formula::Forall(v, b) => Some((Quant::Forall, v, b)),
            Formula::Exists(v, b) => Some((Quant::Exists, v, b)),
            _ => None,
        }
    }

    pub fn as_junction(&self) -> Option<(Conn, &[Formula])> {
        match self {
            Formula::And(cs) => Some((Conn::And, cs)),
            Formula::Or(cs) => Some((Conn::Or, cs)),
            _ => None,
        }
    }

    pub fn is_quant(&self) -> bool {
        self.as_quant().is_some()
    }

    /// Atoms and boolean constants.
    pub fn is_atomic(&self) -> bool {
        matches!(self, Formula::Atom { .. } | Formula::Bool(_))
    }

    /// Atomic formulas and their negations.
    pub fn is_literal(&self) -> bool {
        match self {
            Formula::Not(b) => b.is_atomic(),
            f => f.is_atomic(),
        }
    }

    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Atom { .. } | Formula::Bool(_) => vec![],
            Formula::Not(b) | Formula::Forall(_, b) | Formula::Exists(_, b) => vec![b],
            Formula::And(cs) | Formula::Or(cs) => cs.iter().collect(),
            Formula::Implies(a, b) | Formula::Iff(a, b) => vec![a, b],
        }
    }

    pub fn child(&self, index: usize) -> Option<&Formula> {
        match self {
            Formula::Atom { .. } | Formula::Bool(_) => None,
            Formula::Not(b) | Formula::Forall(_, b) | Formula::Exists(_, b) => {
                (index == 0).then_some(&**b)
            }
            Formula::And(cs) | Formula::Or(cs) => cs.get(index),
            Formula::Implies(a, b) | Formula::Iff(a, b) => match index {
                0 => Some(a),
                1 => Some(b),
                _ => None,
            },
        }
    }

    fn child_mut(&mut self, index: usize) -> Option<&mut Formula> {
        match self {
            Formula::Atom { .. } | Formula::Bool(_) => None,
            Formula::Not(b) | Formula::Forall(_, b) | Formula::Exists(_, b) => {
                (index == 0).then_some(&mut **b)
            }
            Formula::And(cs) | Formula::Or(cs) => cs.get_mut(index),
            Formula::Implies(a, b) | Formula::Iff(a, b) => match index {
                0 => Some(a),
                1 => Some(b),
                _ => None,
            },
        }
    }

    /// The subformula addressed by a path of child indices from the root.
    pub fn at_path(&self, path: &[usize]) -> Option<&Formula> {
        path.iter().try_fold(self, |f, &i| f.child(i))
    }

    /// Returns a copy of `self` with the node at `path` replaced.
    pub fn replace_at(&self, path: &[usize], replacement: Formula) -> Option<Formula> {
        let mut out = self.clone();
        let slot = path.iter().try_fold(&mut out, |f, &i| f.child_mut(i))?;
        *slot = replacement;
        Some(out)
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    /// Height of the tree; atoms and constants have depth 1.
    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(|c| c.depth()).max().unwrap_or(0)
    }

    /// Preorder (leftmost-outermost) enumeration of `(path, node)` pairs.
    pub fn positions(&self) -> Vec<(Vec<usize>, &Formula)> {
        fn go<'a>(f: &'a Formula, path: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, &'a Formula)>) {
            out.push((path.clone(), f));
            for (i, c) in f.children().into_iter().enumerate() {
                path.push(i);
                go(c, path, out);
                path.pop();
            }
        }
        let mut out = Vec::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    /// Constant symbols occurring in the formula.
    pub fn constants(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit_terms(&mut |t| {
            if let Term::Const(c) = t {
                out.insert(c.clone());
            }
        });
        out
    }

    /// Predicate symbols with the arities they are used at.
    pub fn predicates(&self) -> BTreeMap<String, BTreeSet<usize>> {
        let mut out: BTreeMap<String, BTreeSet<usize>> = BTreeMap::new();
        self.visit_atoms(&mut |pred, args| {
            out.entry(pred.to_string()).or_default().insert(args.len());
        });
        out
    }

    pub fn visit_atoms(&self, f: &mut impl FnMut(&str, &[Term])) {
        match self {
            Formula::Atom { pred, args } => f(pred, args),
            other => {
                for c in other.children() {
                    c.visit_atoms(f);
                }
            }
        }
    }

    fn visit_terms(&self, f: &mut impl FnMut(&Term)) {
        self.visit_atoms(&mut |_, args| args.iter().for_each(&mut *f));
    }

    /// Maps every term, ignoring binding structure.
    pub fn map_terms(&self, f: &impl Fn(&Term) -> Term) -> Formula {
        self.map_atoms(&|pred, args| Formula::atom(pred, args.iter().map(f).collect()))
    }

    pub fn map_atoms(&self, f: &impl Fn(&str, &[Term]) -> Formula) -> Formula {
        match self {
            Formula::Atom { pred, args } => f(pred, args),
            Formula::Bool(b) => Formula::Bool(*b),
            Formula::Not(b) => Formula::not(b.map_atoms(f)),
            Formula::And(cs) => Formula::And(cs.iter().map(|c| c.map_atoms(f)).collect()),
            Formula::Or(cs) => Formula::Or(cs.iter().map(|c| c.map_atoms(f)).collect()),
            Formula::Implies(a, b) => Formula::implies(a.map_atoms(f), b.map_atoms(f)),
            Formula::Iff(a, b) => Formula::iff(a.map_atoms(f), b.map_atoms(f)),
            Formula::Forall(v, b) => Formula::forall(v.clone(), b.map_atoms(f)),
            Formula::Exists(v, b) => Formula::exists(v.clone(), b.map_atoms(f)),
        }
    }
}

/// Variables occurring free in `phi`.
pub fn free_vars(phi: &Formula) -> BTreeSet<String> {
    fn go(f: &Formula, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match f {
            Formula::Atom { args, .. } => {
                for t in args {
                    if let Term::Var(v) = t {
                        if !bound.contains(v) {
                            out.insert(v.clone());
                        }
                    }
                }
            }
            Formula::Forall(v, b) | Formula::Exists(v, b) => {
                bound.push(v.clone());
                go(b, bound, out);
                bound.pop();
            }
            other => {
                for c in other.children() {
                    go(c, bound, out);
                }
            }
        }
    }
    let mut out = BTreeSet::new();
    go(phi, &mut Vec::new(), &mut out);
    out
}

/// All variable names of `phi`, free or bound (including binders whose variable
/// never occurs).
pub fn all_vars(phi: &Formula) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for (_, node) in phi.positions() {
        match node {
            Formula::Forall(v, _) | Formula::Exists(v, _) => {
                out.insert(v.clone());
            }
            Formula::Atom { args, .. } => {
                out.extend(args.iter().filter_map(|t| match t {
                    Term::Var(v) => Some(v.clone()),
                    Term::Const(_) => None,
                }));
            }
            _ => {}
        }
    }
    out
}

/// Returns the first name `v1, v2, ...` (counting from `start + 1`) not in `avoid`.
pub fn fresh_var(avoid: &BTreeSet<String>, start: usize) -> String {
    (start + 1..)
        .map(|k| format!("v{k}"))
        .find(|n| !avoid.contains(n))
        .expect("unbounded name supply")
}

/// Capture-avoiding substitution `phi[x := t]`.
pub fn substitute(phi: &Formula, x: &str, t: &Term) -> Formula {
    match phi {
        Formula::Atom { pred, args } => Formula::atom(
            pred.clone(),
            args.iter()
                .map(|a| match a {
                    Term::Var(v) if v == x => t.clone(),
                    other => other.clone(),
                })
                .collect(),
        ),
        Formula::Forall(y, body) | Formula::Exists(y, body) => {
            let q = phi.as_quant().unwrap().0;
            if y == x || !free_vars(body).contains(x) {
                return phi.clone();
            }
            match t {
                Term::Var(tv) if tv == y => {
                    let mut avoid = all_vars(body);
                    avoid.insert(x.to_string());
                    avoid.insert(y.clone());
                    let z = fresh_var(&avoid, 0);
                    let renamed = substitute(body, y, &Term::Var(z.clone()));
                    Formula::quant(q, z, substitute(&renamed, x, t))
                }
                _ => Formula::quant(q, y.clone(), substitute(body, x, t)),
            }
        }
        Formula::Bool(b) => Formula::Bool(*b),
        Formula::Not(b) => Formula::not(substitute(b, x, t)),
        Formula::And(cs) => Formula::And(cs.iter().map(|c| substitute(c, x, t)).collect()),
        Formula::Or(cs) => Formula::Or(cs.iter().map(|c| substitute(c, x, t)).collect()),
        Formula::Implies(a, b) => Formula::implies(substitute(a, x, t), substitute(b, x, t)),
        Formula::Iff(a, b) => Formula::iff(substitute(a, x, t), substitute(b, x, t)),
    }
}

/// α-equivalence: equality up to consistent renaming of bound variables.
///
/// Bound occurrences are compared by the distance to their binder (De Bruijn index),
/// free occurrences by name.
pub fn alpha_equal(phi: &Formula, psi: &Formula) -> bool {
    fn lookup(env: &[&str], v: &str) -> Option<usize> {
        env.iter().rev().position(|b| *b == v)
    }
    fn term_eq(a: &Term, b: &Term, ea: &[&str], eb: &[&str]) -> bool {
        match (a, b) {
            (Term::Const(x), Term::Const(y)) => x == y,
            (Term::Var(x), Term::Var(y)) => match (lookup(ea, x), lookup(eb, y)) {
                (Some(i), Some(j)) => i == j,
                (None, None) => x == y,
                _ => false,
            },
            _ => false,
        }
    }
    fn go<'a>(a: &'a Formula, b: &'a Formula, ea: &mut Vec<&'a str>, eb: &mut Vec<&'a str>) -> bool {
        match (a, b) {
            (Formula::Atom { pred: p, args: xs }, Formula::Atom { pred: q, args: ys }) => {
                p == q
                    && xs.len() == ys.len()
                    && xs.iter().zip(ys).all(|(x, y)| term_eq(x, y, ea, eb))
            }
            (Formula::Bool(x), Formula::Bool(y)) => x == y,
            (Formula::Not(x), Formula::Not(y)) => go(x, y, ea, eb),
            (Formula::And(xs), Formula::And(ys)) | (Formula::Or(xs), Formula::Or(ys)) => {
                xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| go(x, y, ea, eb))
            }
            (Formula::Implies(a1, b1), Formula::Implies(a2, b2))
            | (Formula::Iff(a1, b1), Formula::Iff(a2, b2)) => {
                go(a1, a2, ea, eb) && go(b1, b2, ea, eb)
            }
            (Formula::Forall(x, bx), Formula::Forall(y, by))
            | (Formula::Exists(x, bx), Formula::Exists(y, by)) => {
                ea.push(x);
                eb.push(y);
                let r = go(bx, by, ea, eb);
                ea.pop();
                eb.pop();
                r
            }
            _ => false,
        }
    }
    go(phi, psi, &mut Vec::new(), &mut Vec::new())
}
