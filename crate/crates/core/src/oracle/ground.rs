//! Grounding over a fixed domain and Tseitin encoding into the SAT solver.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use varisat::{ExtendFormula, Lit, Solver};

use super::{Interpretation, OracleError, Signature};
use crate::formula::{Formula, Term, EQUALITY};

pub const DEFAULT_CLAUSE_BUDGET: usize = 4_000_000;

/// A ground argument: a domain element or a constant whose element the solver picks.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Arg {
    Elem(usize),
    Const(String),
}

pub(super) struct Encoder<'s> {
    solver: Solver<'static>,
    sig: &'s Signature,
    k: usize,
    budget: usize,
    clauses: usize,
    truth: Lit,
    /// `choice[c][e]` is true iff constant `c` denotes element `e`.
    choice: BTreeMap<String, Vec<Lit>>,
    atoms: HashMap<(String, Vec<usize>), Lit>,
    resolved: HashMap<(String, Vec<Arg>), Lit>,
}

impl<'s> Encoder<'s> {
    pub(super) fn new(sig: &'s Signature, k: usize, budget: usize) -> Self {
        let mut solver = Solver::new();
        let truth = solver.new_lit();
        let mut enc = Encoder {
            solver,
            sig,
            k,
            budget,
            clauses: 0,
            truth,
            choice: BTreeMap::new(),
            atoms: HashMap::new(),
            resolved: HashMap::new(),
        };
        enc.clause(&[truth]);
        // The m-th constant may only use elements 0..=m: any interpretation can be
        // permuted into this shape, so no model is lost.
        for (m, c) in sig.constants.iter().enumerate() {
            let lits: Vec<Lit> = (0..k)
                .map(|e| if e <= m { enc.solver.new_lit() } else { !truth })
                .collect();
            let live: Vec<Lit> = lits.iter().copied().filter(|l| *l != !truth).collect();
            enc.clause(&live);
            for i in 0..live.len() {
                for j in i + 1..live.len() {
                    enc.clause(&[!live[i], !live[j]]);
                }
            }
            enc.choice.insert(c.clone(), lits);
        }
        enc
    }

    fn clause(&mut self, lits: &[Lit]) {
        self.clauses += 1;
        self.solver.add_clause(lits);
    }

    fn check_budget(&self) -> Result<(), OracleError> {
        if self.clauses > self.budget {
            Err(OracleError::BudgetExceeded {
                limit: self.budget,
                domain_size: self.k,
            })
        } else {
            Ok(())
        }
    }

    fn t(&self) -> Lit {
        self.truth
    }

    fn f(&self) -> Lit {
        !self.truth
    }

    pub(super) fn assert_lit(&mut self, lit: Lit) {
        self.clause(&[lit]);
    }

    fn and(&mut self, inputs: Vec<Lit>) -> Result<Lit, OracleError> {
        let mut xs = Vec::with_capacity(inputs.len());
        for l in inputs {
            if l == self.f() || xs.contains(&!l) {
                return Ok(self.f());
            }
            if l != self.t() && !xs.contains(&l) {
                xs.push(l);
            }
        }
        match xs.len() {
            0 => Ok(self.t()),
            1 => Ok(xs[0]),
            _ => {
                let g = self.solver.new_lit();
                for &x in &xs {
                    self.clause(&[!g, x]);
                }
                let mut back: Vec<Lit> = xs.iter().map(|&x| !x).collect();
                back.push(g);
                self.clause(&back);
                self.check_budget()?;
                Ok(g)
            }
        }
    }

    fn or(&mut self, inputs: Vec<Lit>) -> Result<Lit, OracleError> {
        let negated = inputs.into_iter().map(|l| !l).collect();
        Ok(!self.and(negated)?)
    }

    pub(super) fn iff(&mut self, a: Lit, b: Lit) -> Result<Lit, OracleError> {
        if a == b {
            return Ok(self.t());
        }
        if a == !b {
            return Ok(self.f());
        }
        for (x, y) in [(a, b), (b, a)] {
            if x == self.t() {
                return Ok(y);
            }
            if x == self.f() {
                return Ok(!y);
            }
        }
        let g = self.solver.new_lit();
        self.clause(&[!g, !a, b]);
        self.clause(&[!g, a, !b]);
        self.clause(&[g, a, b]);
        self.clause(&[g, !a, !b]);
        self.check_budget()?;
        Ok(g)
    }

    fn atom(&mut self, pred: &str, tuple: Vec<usize>) -> Lit {
        if pred == EQUALITY && tuple.len() == 2 {
            return if tuple[0] == tuple[1] { self.t() } else { self.f() };
        }
        let key = (pred.to_string(), tuple);
        if let Some(&l) = self.atoms.get(&key) {
            return l;
        }
        let l = self.solver.new_lit();
        self.atoms.insert(key, l);
        l
    }

    fn resolved_atom(&mut self, pred: &str, args: Vec<Arg>) -> Result<Lit, OracleError> {
        if args.iter().all(|a| matches!(a, Arg::Elem(_))) {
            let tuple = args
                .iter()
                .map(|a| match a {
                    Arg::Elem(e) => *e,
                    Arg::Const(_) => unreachable!(),
                })
                .collect();
            return Ok(self.atom(pred, tuple));
        }
        let key = (pred.to_string(), args.clone());
        if let Some(&l) = self.resolved.get(&key) {
            return Ok(l);
        }
        // Case split on the first constant argument.
        let pos = args.iter().position(|a| matches!(a, Arg::Const(_))).unwrap();
        let Arg::Const(c) = &args[pos] else { unreachable!() };
        let choices = self.choice[c].clone();
        let mut cases = Vec::with_capacity(self.k);
        for (e, chosen) in choices.into_iter().enumerate() {
            if chosen == self.f() {
                continue;
            }
            let mut next = args.clone();
            for a in next.iter_mut() {
                if *a == Arg::Const(c.clone()) {
                    *a = Arg::Elem(e);
                }
            }
            let inner = self.resolved_atom(pred, next)?;
            cases.push(self.and(vec![chosen, inner])?);
        }
        let l = self.or(cases)?;
        self.resolved.insert(key, l);
        Ok(l)
    }

    pub(super) fn encode(&mut self, phi: &Formula) -> Result<Lit, OracleError> {
        self.encode_in(phi, &mut Vec::new())
    }

    fn encode_in(&mut self, phi: &Formula, env: &mut Vec<(String, usize)>) -> Result<Lit, OracleError> {
        match phi {
            Formula::Atom { pred, args } => {
                let args = args
                    .iter()
                    .map(|t| match t {
                        Term::Var(v) => env
                            .iter()
                            .rev()
                            .find(|(n, _)| n == v)
                            .map(|(_, e)| Arg::Elem(*e))
                            .ok_or_else(|| OracleError::UnboundVariable(v.clone())),
                        Term::Const(c) => Ok(Arg::Const(c.clone())),
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                self.resolved_atom(pred, args)
            }
            Formula::Bool(true) => Ok(self.t()),
            Formula::Bool(false) => Ok(self.f()),
            Formula::Not(b) => Ok(!self.encode_in(b, env)?),
            Formula::And(cs) | Formula::Or(cs) => {
                let lits = cs
                    .iter()
                    .map(|c| self.encode_in(c, env))
                    .collect::<Result<Vec<_>, _>>()?;
                if matches!(phi, Formula::And(_)) {
                    self.and(lits)
                } else {
                    self.or(lits)
                }
            }
            Formula::Implies(a, b) => {
                let a = self.encode_in(a, env)?;
                let b = self.encode_in(b, env)?;
                self.or(vec![!a, b])
            }
            Formula::Iff(a, b) => {
                let a = self.encode_in(a, env)?;
                let b = self.encode_in(b, env)?;
                self.iff(a, b)
            }
            Formula::Forall(x, b) | Formula::Exists(x, b) => {
                let mut lits = Vec::with_capacity(self.k);
                for e in 0..self.k {
                    env.push((x.clone(), e));
                    let l = self.encode_in(b, env);
                    env.pop();
                    lits.push(l?);
                }
                if matches!(phi, Formula::Forall(..)) {
                    self.and(lits)
                } else {
                    self.or(lits)
                }
            }
        }
    }

    /// Solves under the assumptions and decodes a model when satisfiable.
    pub(super) fn solve_under(&mut self, assumptions: &[Lit]) -> Result<Option<Interpretation>, OracleError> {
        if assumptions.contains(&self.f()) {
            return Ok(None);
        }
        let live: Vec<Lit> = assumptions.iter().copied().filter(|&l| l != self.t()).collect();
        self.solver.assume(&live);
        let sat = self.solver.solve().map_err(|e| OracleError::Solver(e.to_string()))?;
        if !sat {
            return Ok(None);
        }
        let model: BTreeSet<Lit> = self.solver.model().unwrap_or_default().into_iter().collect();
        let is_true = |l: Lit| model.contains(&l);
        let constant_map = self
            .choice
            .iter()
            .map(|(c, lits)| {
                let e = lits.iter().position(|&l| l != self.f() && is_true(l)).unwrap_or(0);
                (c.clone(), e)
            })
            .collect();
        let mut predicate_tables: BTreeMap<String, BTreeSet<Vec<usize>>> = self
            .sig
            .predicates
            .keys()
            .filter(|p| p.as_str() != EQUALITY)
            .map(|p| (p.clone(), BTreeSet::new()))
            .collect();
        for ((p, tuple), &l) in &self.atoms {
            if is_true(l) {
                predicate_tables.entry(p.clone()).or_default().insert(tuple.clone());
            }
        }
        Ok(Some(Interpretation {
            domain_size: self.k,
            constant_map,
            predicate_tables,
        }))
    }
}
