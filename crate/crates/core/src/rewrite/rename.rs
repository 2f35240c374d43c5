use serde::{Deserialize, Serialize};

use super::RewriteError;
use crate::formula::{all_vars, Formula, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SymbolKind {
    Constant,
    Predicate,
}

/// Uniformly renames a constant or predicate symbol.
///
/// A new constant must not clash with a variable name either, otherwise the
/// parser would read it back as a bound variable.
pub fn rename_symbol(
    phi: &Formula,
    kind: SymbolKind,
    old: &str,
    new: &str,
) -> Result<Formula, RewriteError> {
    match kind {
        SymbolKind::Constant => {
            let consts = phi.constants();
            if !consts.contains(old) {
                return Err(RewriteError::NotPresent(old.to_string()));
            }
            if consts.contains(new) || all_vars(phi).contains(new) {
                return Err(RewriteError::NotFresh(new.to_string()));
            }
            Ok(phi.map_terms(&|t| match t {
                Term::Const(c) if c == old => Term::constant(new),
                other => other.clone(),
            }))
        }
        SymbolKind::Predicate => {
            let preds = phi.predicates();
            if !preds.contains_key(old) {
                return Err(RewriteError::NotPresent(old.to_string()));
            }
            if preds.contains_key(new) {
                return Err(RewriteError::NotFresh(new.to_string()));
            }
            Ok(phi.map_atoms(&|p, args| {
                Formula::atom(if p == old { new } else { p }, args.to_vec())
            }))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_formula;

    fn p(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn renames_constants_and_predicates() {
        assert_eq!(
            rename_symbol(&p("ResidentOf(tom, lawtonPark)"), SymbolKind::Constant, "tom", "alex")
                .unwrap(),
            p("ResidentOf(alex, lawtonPark)")
        );
        assert_eq!(
            rename_symbol(&p("forall x. P(x)"), SymbolKind::Predicate, "P", "Pred7").unwrap(),
            p("forall x. Pred7(x)")
        );
    }

    #[test]
    fn freshness_and_presence() {
        let phi = p("forall x. R(x, a) & S(b)");
        assert_eq!(
            rename_symbol(&phi, SymbolKind::Constant, "a", "b"),
            Err(RewriteError::NotFresh("b".into()))
        );
        assert_eq!(
            rename_symbol(&phi, SymbolKind::Constant, "a", "x"),
            Err(RewriteError::NotFresh("x".into()))
        );
        assert_eq!(
            rename_symbol(&phi, SymbolKind::Constant, "c", "d"),
            Err(RewriteError::NotPresent("c".into()))
        );
        assert_eq!(
            rename_symbol(&phi, SymbolKind::Predicate, "R", "S"),
            Err(RewriteError::NotFresh("S".into()))
        );
    }
}
