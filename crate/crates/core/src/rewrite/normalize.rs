//! The staged normalization procedure.
//!
//! Stages, each exhausted before the next is considered:
//! 1. eliminate `->`/`<->`, innermost first (so a biconditional never duplicates
//!    an operand that still contains one);
//! 2. push negations inward;
//! 3. at every `&`/`|` node whose children are already prenex, lift the leftmost
//!    quantified child, α-renaming it first when its variable would be captured;
//! 4. flatten and sort every disordered cluster;
//! 5. sort every quantifier block of the prefix.
//!
//! Within a stage the redex may be chosen at random; the result is the same up to
//! α-equivalence.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::rules::find_redexes_with;
use super::{MrId, Redex, RewriteError, RewriteStep, Shape};
use crate::formula::{free_vars, Formula};
use crate::measure::{measure, Measure};

#[derive(Clone, Debug, Default)]
pub struct NpOptions {
    /// Picks a random eligible redex in each step when set; otherwise the first.
    pub seed: Option<u64>,
    /// Fresh variables are drawn from `v{offset+1}, v{offset+2}, ...`.
    pub fresh_offset: usize,
}

#[derive(Clone, Debug)]
pub struct Normalized {
    pub formula: Formula,
    pub trace: Vec<RewriteStep>,
}

pub fn normalize_np(phi: &Formula) -> Result<Normalized, RewriteError> {
    normalize_np_with(phi, &NpOptions::default())
}

fn has_conditional(f: &Formula) -> bool {
    matches!(f, Formula::Implies(..) | Formula::Iff(..)) || f.children().into_iter().any(has_conditional)
}

fn quantifier_free(f: &Formula) -> bool {
    !f.is_quant() && f.children().into_iter().all(quantifier_free)
}

fn is_prenex(f: &Formula) -> bool {
    match f.as_quant() {
        Some((_, _, body)) => is_prenex(body),
        None => quantifier_free(f),
    }
}

fn stage_implications(phi: &Formula) -> Vec<Redex> {
    find_redexes_with(phi, MrId::E1_1, 0)
        .into_iter()
        .filter(|r| r.matched.children().into_iter().all(|c| !has_conditional(c)))
        .collect()
}

fn stage_lifting(phi: &Formula, fresh_offset: usize) -> Vec<Redex> {
    let lifts = find_redexes_with(phi, MrId::E1_3, fresh_offset);
    let renames = find_redexes_with(phi, MrId::E1_5, fresh_offset);
    let mut out = Vec::new();
    for (path, node) in phi.positions() {
        let Some((_, cs)) = node.as_junction() else { continue };
        if !cs.iter().all(is_prenex) {
            continue;
        }
        let Some(k) = cs.iter().position(Formula::is_quant) else { continue };
        let var = cs[k].as_quant().unwrap().1;
        let blocked = cs
            .iter()
            .enumerate()
            .any(|(j, s)| j != k && free_vars(s).contains(var));
        let chosen = if blocked {
            renames
                .iter()
                .find(|r| r.path == path && matches!(r.shape, Shape::Rename { child, .. } if child == k))
        } else {
            lifts
                .iter()
                .find(|r| r.path == path && matches!(r.shape, Shape::Lift { child } if child == k))
        };
        out.push(chosen.expect("lifting stage redex exists").clone());
    }
    out
}

fn eligible(phi: &Formula, opts: &NpOptions) -> Vec<Redex> {
    let stages: [&dyn Fn() -> Vec<Redex>; 5] = [
        &|| stage_implications(phi),
        &|| find_redexes_with(phi, MrId::E1_2, 0),
        &|| stage_lifting(phi, opts.fresh_offset),
        &|| find_redexes_with(phi, MrId::E1_4, 0),
        &|| find_redexes_with(phi, MrId::E1_6, 0),
    ];
    stages
        .iter()
        .map(|s| s())
        .find(|rs| !rs.is_empty())
        .unwrap_or_default()
}

/// Normalizes `phi` to canonical prenex negation normal form, recording every step.
pub fn normalize_np_with(phi: &Formula, opts: &NpOptions) -> Result<Normalized, RewriteError> {
    let budget = 10 * phi.size() * phi.size();
    let mut rng = opts.seed.map(ChaCha8Rng::seed_from_u64);
    let mut current = phi.clone();
    let mut current_measure = measure(&current);
    let mut trace = Vec::new();
    loop {
        let candidates = eligible(&current, opts);
        if candidates.is_empty() {
            break;
        }
        if trace.len() >= budget {
            return Err(RewriteError::Internal(format!(
                "normalization exceeded its budget of {budget} steps"
            )));
        }
        let pick = match rng.as_mut() {
            Some(r) => r.random_range(0..candidates.len()),
            None => 0,
        };
        let redex = candidates[pick].clone();
        let next = super::apply(&current, &redex)?;
        let next_measure = measure(&next);
        trace.push(RewriteStep {
            before: current,
            after: next.clone(),
            redex,
            measure_before: current_measure,
            measure_after: next_measure,
        });
        current = next;
        current_measure = next_measure;
    }
    if current_measure != Measure::ZERO {
        return Err(RewriteError::Internal(format!(
            "normalization stopped at measure {current_measure}"
        )));
    }
    Ok(Normalized { formula: current, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::alpha_equal;
    use crate::parse::parse_formula;

    fn p(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn quantifier_duality_example() {
        let out = normalize_np(&p("-forall x. P(x)")).unwrap();
        assert_eq!(out.formula, p("exists x. -P(x)"));
        assert_eq!(out.trace.len(), 1);
    }

    #[test]
    fn de_morgan_single_step() {
        let out = normalize_np(&p("-(P(a) & Q(b))")).unwrap();
        assert_eq!(out.formula, p("-P(a) | -Q(b)"));
        assert_eq!(out.trace.len(), 1);
        assert_eq!(out.trace[0].redex.mr, MrId::E1_2);
    }

    #[test]
    fn implication_is_ordered() {
        // "-P(a)" precedes "Q(b)" in byte order
        let out = normalize_np(&p("P(a) -> Q(b)")).unwrap();
        assert_eq!(out.formula, p("-P(a) | Q(b)"));
        let out = normalize_np(&p("Q(b) -> P(a)")).unwrap();
        assert_eq!(out.formula, p("-Q(b) | P(a)"));
    }

    #[test]
    fn conflicting_quantifiers_are_renamed() {
        let out = normalize_np(&p("forall x. (P(x) | exists x. Q(x))")).unwrap();
        assert!(alpha_equal(&out.formula, &p("forall x. exists y. (P(x) | Q(y))")), "{}", out.formula);
        assert!(out.trace.iter().any(|s| s.redex.mr == MrId::E1_5));
    }

    #[test]
    fn every_step_decreases() {
        let phi = p("-(forall x. (P(x) <-> exists y. R(x, y))) & (Q(a) -> forall z. P(z))");
        let out = normalize_np(&phi).unwrap();
        for s in &out.trace {
            assert!(s.measure_after < s.measure_before, "{}", s.trace_line());
        }
        assert!(measure(&out.formula).is_zero());
    }
}
