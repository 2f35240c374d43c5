//! Bounded finite-model entailment.
//!
//! For every domain size up to a bound, formulas are grounded over the domain and
//! handed to a SAT solver; constants become one-hot choices of a domain element, so
//! every constant assignment is covered by a single solver call. Equality (`Eq`)
//! is identity.
//!
//! Verdicts are certain when a model witnesses them (a countermodel settles
//! non-entailment) or when the bound reaches the finite-model bound of the
//! fragment: `max(1, #constants)` for quantifier-free input, `2^#unary predicates`
//! for monadic input without equality. Anything else is reported as bounded.

mod ground;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dataset::Label;
use crate::formula::{free_vars, Formula, Term, EQUALITY};

pub use ground::DEFAULT_CLAUSE_BUDGET;

/// A finite structure: domain `0..domain_size`, constant and predicate denotations.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interpretation {
    pub domain_size: usize,
    pub constant_map: BTreeMap<String, usize>,
    pub predicate_tables: BTreeMap<String, BTreeSet<Vec<usize>>>,
}

impl fmt::Display for Interpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "domain {{0..{}}}", self.domain_size.saturating_sub(1))?;
        for (c, e) in &self.constant_map {
            write!(f, "; {c}={e}")?;
        }
        for (p, rows) in &self.predicate_tables {
            let rows: Vec<String> = rows
                .iter()
                .map(|r| format!("({})", r.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(",")))
                .collect();
            write!(f, "; {p}={{{}}}", rows.join(","))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("variable `{0}` is not bound")]
    UnboundVariable(String),
    #[error("constant `{0}` has no denotation")]
    UnmappedConstant(String),
    #[error("formula has free variables: {0:?}")]
    FreeVariables(Vec<String>),
    #[error("predicate `{0}` is used with different arities")]
    ArityMismatch(String),
    #[error("grounding exceeded the budget of {limit} clauses at domain size {domain_size}")]
    BudgetExceeded { limit: usize, domain_size: usize },
    #[error("domain bound must be at least 1")]
    EmptyDomain,
    #[error("solver failure: {0}")]
    Solver(String),
}

/// Tarskian satisfaction of `phi` in `interp` under `env`.
pub fn holds(
    phi: &Formula,
    interp: &Interpretation,
    env: &BTreeMap<String, usize>,
) -> Result<bool, OracleError> {
    let term = |t: &Term, env: &BTreeMap<String, usize>| -> Result<usize, OracleError> {
        match t {
            Term::Var(v) => env.get(v).copied().ok_or_else(|| OracleError::UnboundVariable(v.clone())),
            Term::Const(c) => interp
                .constant_map
                .get(c)
                .copied()
                .ok_or_else(|| OracleError::UnmappedConstant(c.clone())),
        }
    };
    Ok(match phi {
        Formula::Atom { pred, args } => {
            let tuple = args.iter().map(|a| term(a, env)).collect::<Result<Vec<_>, _>>()?;
            if pred == EQUALITY && tuple.len() == 2 {
                tuple[0] == tuple[1]
            } else {
                interp
                    .predicate_tables
                    .get(pred)
                    .is_some_and(|rows| rows.contains(&tuple))
            }
        }
        Formula::Bool(b) => *b,
        Formula::Not(b) => !holds(b, interp, env)?,
        Formula::And(cs) => {
            for c in cs {
                if !holds(c, interp, env)? {
                    return Ok(false);
                }
            }
            true
        }
        Formula::Or(cs) => {
            for c in cs {
                if holds(c, interp, env)? {
                    return Ok(true);
                }
            }
            false
        }
        Formula::Implies(a, b) => !holds(a, interp, env)? || holds(b, interp, env)?,
        Formula::Iff(a, b) => holds(a, interp, env)? == holds(b, interp, env)?,
        Formula::Forall(x, b) | Formula::Exists(x, b) => {
            let universal = matches!(phi, Formula::Forall(..));
            let mut inner = env.clone();
            for e in 0..interp.domain_size {
                inner.insert(x.clone(), e);
                if holds(b, interp, &inner)? != universal {
                    return Ok(!universal);
                }
            }
            universal
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Completeness {
    Exact,
    Bounded,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub label: Label,
    pub completeness: Completeness,
    /// Whether some checked interpretation satisfies every premise.
    pub premises_satisfiable: bool,
    /// A model of the premises in which the conclusion fails, if one was found.
    pub countermodel: Option<Interpretation>,
    /// A model of the premises in which the conclusion holds, if one was found.
    pub witness: Option<Interpretation>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Consistency {
    pub satisfiable: bool,
    pub completeness: Completeness,
    pub model: Option<Interpretation>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleOptions {
    pub max_domain: usize,
    pub clause_budget: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            max_domain: 3,
            clause_budget: DEFAULT_CLAUSE_BUDGET,
        }
    }
}

impl OracleOptions {
    pub fn with_max_domain(max_domain: usize) -> Self {
        OracleOptions {
            max_domain,
            ..Default::default()
        }
    }
}

/// Constants and predicate arities of a formula set.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    pub constants: BTreeSet<String>,
    pub predicates: BTreeMap<String, usize>,
}

impl Signature {
    pub fn of<'a>(formulas: impl IntoIterator<Item = &'a Formula>) -> Result<Signature, OracleError> {
        let mut sig = Signature::default();
        for f in formulas {
            sig.constants.extend(f.constants());
            for (p, arities) in f.predicates() {
                for a in arities {
                    if *sig.predicates.entry(p.clone()).or_insert(a) != a {
                        return Err(OracleError::ArityMismatch(p));
                    }
                }
            }
        }
        if sig.predicates.get(EQUALITY).is_some_and(|&a| a != 2) {
            return Err(OracleError::ArityMismatch(EQUALITY.into()));
        }
        Ok(sig)
    }
}

fn has_quantifier(f: &Formula) -> bool {
    f.is_quant() || f.children().into_iter().any(has_quantifier)
}

/// Smallest domain bound at which bounded checking is complete for `formulas`,
/// when the fragment is known to have one.
pub fn exact_bound<'a>(formulas: impl IntoIterator<Item = &'a Formula> + Clone) -> Option<usize> {
    let sig = Signature::of(formulas.clone()).ok()?;
    if !formulas.clone().into_iter().any(has_quantifier) {
        return Some(sig.constants.len().max(1));
    }
    if sig.predicates.contains_key(EQUALITY) || sig.predicates.values().any(|&a| a > 1) {
        return None;
    }
    let unary = sig.predicates.values().filter(|&&a| a == 1).count() as u32;
    1usize.checked_shl(unary).filter(|&b| b > 0)
}

fn ensure_closed<'a>(formulas: impl IntoIterator<Item = &'a Formula>) -> Result<(), OracleError> {
    let mut free = BTreeSet::new();
    for f in formulas {
        free.extend(free_vars(f));
    }
    if free.is_empty() {
        Ok(())
    } else {
        Err(OracleError::FreeVariables(free.into_iter().collect()))
    }
}

fn is_exact<'a>(formulas: impl IntoIterator<Item = &'a Formula> + Clone, max_domain: usize) -> Completeness {
    match exact_bound(formulas) {
        Some(b) if max_domain >= b => Completeness::Exact,
        _ => Completeness::Bounded,
    }
}

/// Three-valued entailment `Γ ⊨ q` over domains of size `1..=max_domain`.
pub fn entails(gamma: &[Formula], q: &Formula, max_domain: usize) -> Result<Verdict, OracleError> {
    entails_with(gamma, q, &OracleOptions::with_max_domain(max_domain))
}

pub fn entails_with(gamma: &[Formula], q: &Formula, opts: &OracleOptions) -> Result<Verdict, OracleError> {
    if opts.max_domain == 0 {
        return Err(OracleError::EmptyDomain);
    }
    let all: Vec<&Formula> = gamma.iter().chain(std::iter::once(q)).collect();
    ensure_closed(all.iter().copied())?;
    let sig = Signature::of(all.iter().copied())?;
    let mut countermodel = None;
    let mut witness = None;
    let mut premises_satisfiable = false;
    for k in 1..=opts.max_domain {
        let mut enc = ground::Encoder::new(&sig, k, opts.clause_budget);
        for g in gamma {
            let lit = enc.encode(g)?;
            enc.assert_lit(lit);
        }
        let ql = enc.encode(q)?;
        if countermodel.is_none() {
            countermodel = enc.solve_under(&[!ql])?;
        }
        if witness.is_none() {
            witness = enc.solve_under(&[ql])?;
        }
        premises_satisfiable |= countermodel.is_some() || witness.is_some();
        if countermodel.is_some() && witness.is_some() {
            break;
        }
    }
    let exact = is_exact(all.iter().copied(), opts.max_domain);
    let (label, completeness) = match (premises_satisfiable, &countermodel, &witness) {
        (false, _, _) => (Label::Unknown, exact),
        (true, Some(_), Some(_)) => (Label::Unknown, Completeness::Exact),
        (true, None, _) => (Label::True, exact),
        (true, Some(_), None) => (Label::False, exact),
    };
    Ok(Verdict {
        label,
        completeness,
        premises_satisfiable,
        countermodel,
        witness,
    })
}

/// Whether some interpretation of size `1..=max_domain` satisfies all of `gamma`.
pub fn consistent(gamma: &[Formula], max_domain: usize) -> Result<Consistency, OracleError> {
    consistent_with(gamma, &OracleOptions::with_max_domain(max_domain))
}

pub fn consistent_with(gamma: &[Formula], opts: &OracleOptions) -> Result<Consistency, OracleError> {
    if opts.max_domain == 0 {
        return Err(OracleError::EmptyDomain);
    }
    ensure_closed(gamma)?;
    let sig = Signature::of(gamma)?;
    for k in 1..=opts.max_domain {
        if let Some(model) = find_model_with(gamma, &sig, k, opts.clause_budget)? {
            return Ok(Consistency {
                satisfiable: true,
                completeness: Completeness::Exact,
                model: Some(model),
            });
        }
    }
    Ok(Consistency {
        satisfiable: false,
        completeness: is_exact(gamma, opts.max_domain),
        model: None,
    })
}

fn find_model_with(
    gamma: &[Formula],
    sig: &Signature,
    k: usize,
    budget: usize,
) -> Result<Option<Interpretation>, OracleError> {
    let mut enc = ground::Encoder::new(sig, k, budget);
    for g in gamma {
        let lit = enc.encode(g)?;
        enc.assert_lit(lit);
    }
    enc.solve_under(&[])
}

/// A model of all `formulas` with exactly `domain_size` elements, if any.
pub fn find_model(formulas: &[Formula], domain_size: usize) -> Result<Option<Interpretation>, OracleError> {
    if domain_size == 0 {
        return Err(OracleError::EmptyDomain);
    }
    ensure_closed(formulas)?;
    let sig = Signature::of(formulas)?;
    find_model_with(formulas, &sig, domain_size, DEFAULT_CLAUSE_BUDGET)
}

/// Whether `phi` and `psi` agree in every interpretation of size `1..=max_domain`.
/// Returns the first disagreeing interpretation otherwise.
pub fn disagreement(
    phi: &Formula,
    psi: &Formula,
    max_domain: usize,
) -> Result<Option<Interpretation>, OracleError> {
    ensure_closed([phi, psi])?;
    let sig = Signature::of([phi, psi])?;
    for k in 1..=max_domain {
        let mut enc = ground::Encoder::new(&sig, k, DEFAULT_CLAUSE_BUDGET);
        let a = enc.encode(phi)?;
        let b = enc.encode(psi)?;
        let same = enc.iff(a, b)?;
        if let Some(m) = enc.solve_under(&[!same])? {
            return Ok(Some(m));
        }
    }
    Ok(None)
}
