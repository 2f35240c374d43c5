//! Test-only semantics, kept independent of the library's evaluator and SAT
//! encoding so the two can be checked against each other.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use folmt_core::formula::{Formula, Term};
use folmt_core::gen::{random_formula, GenConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
pub struct Model {
    pub size: usize,
    pub consts: HashMap<String, usize>,
    pub preds: HashMap<String, BTreeSet<Vec<usize>>>,
}

fn term(m: &Model, env: &[(String, usize)], t: &Term) -> usize {
    match t {
        Term::Var(v) => env.iter().rev().find(|(n, _)| n == v).map(|(_, e)| *e).expect("bound variable"),
        Term::Const(c) => m.consts[c],
    }
}

pub fn eval(m: &Model, env: &mut Vec<(String, usize)>, f: &Formula) -> bool {
    match f {
        Formula::Atom { pred, args } => {
            let tuple: Vec<usize> = args.iter().map(|t| term(m, env, t)).collect();
            if pred == "Eq" {
                return tuple[0] == tuple[1];
            }
            m.preds.get(pred).is_some_and(|t| t.contains(&tuple))
        }
        Formula::Bool(b) => *b,
        Formula::Not(b) => !eval(m, env, b),
        Formula::And(cs) => cs.iter().all(|c| eval(m, env, c)),
        Formula::Or(cs) => cs.iter().any(|c| eval(m, env, c)),
        Formula::Implies(a, b) => !eval(m, env, a) || eval(m, env, b),
        Formula::Iff(a, b) => eval(m, env, a) == eval(m, env, b),
        Formula::Forall(x, b) | Formula::Exists(x, b) => {
            let universal = matches!(f, Formula::Forall(..));
            for e in 0..m.size {
                env.push((x.clone(), e));
                let v = eval(m, env, b);
                env.pop();
                if v != universal {
                    return !universal;
                }
            }
            universal
        }
    }
}

pub fn truth(m: &Model, f: &Formula) -> bool {
    eval(m, &mut Vec::new(), f)
}

fn signature(fs: &[&Formula]) -> (Vec<String>, Vec<(String, usize)>) {
    let mut consts = BTreeSet::new();
    let mut preds = BTreeMap::new();
    for f in fs {
        consts.extend(f.constants());
        for (p, arities) in f.predicates() {
            if p != "Eq" {
                preds.insert(p, *arities.iter().next().unwrap());
            }
        }
    }
    (consts.into_iter().collect(), preds.into_iter().collect())
}

/// Every interpretation of the joint signature with exactly `size` elements, or
/// `None` when there are more than `limit` of them.
pub fn models(fs: &[&Formula], size: usize, limit: usize) -> Option<Vec<Model>> {
    let (consts, preds) = signature(fs);
    let tuples: Vec<(String, Vec<usize>)> = preds
        .iter()
        .flat_map(|(p, a)| all_tuples(size, *a).into_iter().map(move |t| (p.clone(), t)))
        .collect();
    let const_choices = size.checked_pow(consts.len() as u32)?;
    let table_choices = 1usize.checked_shl(tuples.len() as u32)?;
    if const_choices.checked_mul(table_choices)? > limit {
        return None;
    }
    let mut out = Vec::new();
    for ci in 0..const_choices {
        let mut rest = ci;
        let assignment: HashMap<String, usize> = consts
            .iter()
            .map(|c| {
                let e = rest % size;
                rest /= size;
                (c.clone(), e)
            })
            .collect();
        for bits in 0..table_choices {
            let mut tables: HashMap<String, BTreeSet<Vec<usize>>> = HashMap::new();
            for (i, (p, t)) in tuples.iter().enumerate() {
                if bits >> i & 1 == 1 {
                    tables.entry(p.clone()).or_default().insert(t.clone());
                }
            }
            out.push(Model {
                size,
                consts: assignment.clone(),
                preds: tables,
            });
        }
    }
    Some(out)
}

fn all_tuples(size: usize, arity: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..arity {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..size).map(move |e| {
                    let mut t = t.clone();
                    t.push(e);
                    t
                })
            })
            .collect();
    }
    out
}

/// Renames every binder to a fresh name (`b0`, `b1`, ...), adjusting bound occurrences.
pub fn rename_binders(f: &Formula) -> Formula {
    fn go(f: &Formula, map: &mut Vec<(String, String)>, next: &mut usize) -> Formula {
        match f {
            Formula::Atom { pred, args } => Formula::atom(
                pred.clone(),
                args.iter()
                    .map(|t| match t {
                        Term::Var(v) => Term::var(
                            map.iter().rev().find(|(o, _)| o == v).map(|(_, n)| n.clone()).unwrap_or(v.clone()),
                        ),
                        c => c.clone(),
                    })
                    .collect(),
            ),
            Formula::Bool(b) => Formula::Bool(*b),
            Formula::Not(b) => Formula::not(go(b, map, next)),
            Formula::And(cs) => Formula::and(cs.iter().map(|c| go(c, map, next)).collect()),
            Formula::Or(cs) => Formula::or(cs.iter().map(|c| go(c, map, next)).collect()),
            Formula::Implies(a, b) => Formula::implies(go(a, map, next), go(b, map, next)),
            Formula::Iff(a, b) => Formula::iff(go(a, map, next), go(b, map, next)),
            Formula::Forall(x, b) | Formula::Exists(x, b) => {
                let fresh = format!("b{next}");
                *next += 1;
                map.push((x.clone(), fresh.clone()));
                let body = go(b, map, next);
                map.pop();
                let (q, _, _) = f.as_quant().unwrap();
                Formula::quant(q, fresh, body)
            }
        }
    }
    go(f, &mut Vec::new(), &mut 0)
}

pub fn formula_from_seed(seed: u64, cfg: &GenConfig) -> Formula {
    random_formula(&mut ChaCha8Rng::seed_from_u64(seed), cfg)
}

/// Small monadic formulas for which domains up to 3 are cheap to enumerate.
pub fn small_monadic() -> GenConfig {
    GenConfig {
        max_depth: 4,
        constants: vec!["a".into(), "b".into()],
        ..GenConfig::monadic()
    }
}
