//! Deterministic logic-to-English realization.
//!
//! Every connective gets a fixed, scope-marking phrase and nothing is simplified:
//! `--A` keeps both negations, `A | A` stays redundant and `& 1` stays explicit.
//! A sub-formula counts as complex when its tree depth exceeds one, which is what
//! triggers the comma in "both A, and B".

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::formula::{alpha_equal, Formula, Term, EQUALITY};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhrasingKind {
    /// "x is Bitter"
    Standard,
    /// "x has property Pre1"
    Placeholder,
    /// "x bears relation R to y"
    Relation,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexEntry {
    pub kind: PhrasingKind,
    pub surface: String,
}

/// How each predicate is phrased. Predicates without an entry are classified on
/// the fly by [`Lexicon::classify`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lexicon {
    pub entries: BTreeMap<String, LexEntry>,
}

/// Abstract symbol names: `Pre<n>`, `Pad<n>`, `Con<n>` or a capital letter with an
/// optional number.
pub fn is_placeholder(name: &str) -> bool {
    let numbered = |prefix: &str| {
        name.strip_prefix(prefix)
            .is_some_and(|rest| !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()))
    };
    let mut chars = name.chars();
    let letter = matches!(chars.next(), Some(c) if c.is_ascii_uppercase())
        && chars.all(|c| c.is_ascii_digit());
    letter || numbered("Pre") || numbered("Pad") || numbered("Con")
}

impl Lexicon {
    pub fn classify(pred: &str, arity: usize) -> LexEntry {
        let kind = if arity >= 2 {
            PhrasingKind::Relation
        } else if is_placeholder(pred) {
            PhrasingKind::Placeholder
        } else {
            PhrasingKind::Standard
        };
        LexEntry {
            kind,
            surface: pred.to_string(),
        }
    }

    /// Lexicon covering every predicate of `formulas`.
    pub fn derive<'a>(formulas: impl IntoIterator<Item = &'a Formula>) -> Lexicon {
        let mut lex = Lexicon::default();
        for f in formulas {
            f.visit_atoms(&mut |pred, args| {
                lex.entries
                    .entry(pred.to_string())
                    .or_insert_with(|| Lexicon::classify(pred, args.len()));
            });
        }
        lex
    }

    fn entry(&self, pred: &str, arity: usize) -> LexEntry {
        self.entries
            .get(pred)
            .cloned()
            .unwrap_or_else(|| Lexicon::classify(pred, arity))
    }
}

fn complex(f: &Formula) -> bool {
    f.depth() > 1
}

fn term(t: &Term) -> &str {
    t.name()
}

fn atom(lex: &Lexicon, pred: &str, args: &[Term]) -> String {
    if pred == EQUALITY && args.len() == 2 {
        return format!("{} is equal to {}", term(&args[0]), term(&args[1]));
    }
    let entry = lex.entry(pred, args.len());
    match args {
        [] => format!("{} holds", entry.surface),
        [a] => match entry.kind {
            PhrasingKind::Placeholder => format!("{} has property {}", term(a), entry.surface),
            _ => format!("{} is {}", term(a), entry.surface),
        },
        [first, rest @ ..] => format!(
            "{} bears relation {} to {}",
            term(first),
            entry.surface,
            rest.iter().map(term).collect::<Vec<_>>().join(" and ")
        ),
    }
}

fn phrase(lex: &Lexicon, f: &Formula, initial: bool) -> String {
    match f {
        Formula::Atom { pred, args } => atom(lex, pred, args),
        Formula::Bool(true) => "it is logically true".into(),
        Formula::Bool(false) => "it is logically false".into(),
        Formula::Not(b) => format!("it is not the case that {}", phrase(lex, b, false)),
        Formula::And(cs) => {
            let mut out = String::from("both ");
            for (i, c) in cs.iter().enumerate() {
                if i > 0 {
                    out.push_str(if complex(&cs[i - 1]) { ", and " } else { " and " });
                }
                out.push_str(&phrase(lex, c, false));
            }
            out
        }
        Formula::Or(cs) => {
            let redundant = cs.iter().all(|c| alpha_equal(c, &cs[0]));
            let parts: Vec<String> = cs
                .iter()
                .map(|c| {
                    let p = phrase(lex, c, false);
                    if redundant {
                        p + " is true"
                    } else {
                        p
                    }
                })
                .collect();
            format!("either {}", parts.join(" or "))
        }
        Formula::Implies(a, b) => {
            format!("if {}, then {}", phrase(lex, a, false), phrase(lex, b, false))
        }
        Formula::Iff(a, b) => format!(
            "{}{} if and only if{} {}",
            phrase(lex, a, initial),
            if complex(a) { "," } else { "" },
            if complex(b) { "," } else { "" },
            phrase(lex, b, false)
        ),
        Formula::Forall(x, b) => format!(
            "{} all {x}, {}",
            if initial { "For" } else { "for" },
            phrase(lex, b, false)
        ),
        Formula::Exists(x, b) => format!(
            "{} exists at least one {x}, such that {}",
            if initial { "There" } else { "there" },
            phrase(lex, b, false)
        ),
    }
}

/// Realizes `phi` as one English sentence ending with a period.
pub fn realize(phi: &Formula, lex: &Lexicon) -> String {
    let mut s = phrase(lex, phi, true);
    s.push('.');
    s
}

/// Realizes with a lexicon derived from `phi` alone.
pub fn realize_auto(phi: &Formula) -> String {
    realize(phi, &Lexicon::derive([phi]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_formula, parse_formula_with_vars};

    fn r(s: &str) -> String {
        realize_auto(&parse_formula(s).unwrap())
    }

    #[test]
    fn placeholder_names() {
        for n in ["Pre1", "Pre12", "Pad3", "Con1", "P", "Q7"] {
            assert!(is_placeholder(n), "{n}");
        }
        for n in ["Pre", "Bitter", "PQ", "Orange", "p1", "Prefix1"] {
            assert!(!is_placeholder(n), "{n}");
        }
    }

    #[test]
    fn reference_translations() {
        assert_eq!(
            r("--Orange(Stanley)"),
            "it is not the case that it is not the case that Stanley is Orange."
        );
        let open = parse_formula_with_vars("(-Pre4(x) & Pre1(x))", &["x"]).unwrap();
        assert_eq!(
            realize_auto(&open),
            "both it is not the case that x has property Pre4, and x has property Pre1."
        );
        assert_eq!(
            r("all x. (Bitter(x) -> -Dull(x))"),
            "For all x, if x is Bitter, then it is not the case that x is Dull."
        );
        assert_eq!(
            r("(P(Con1) <-> (Q(Con2) | 0))"),
            "Con1 has property P if and only if, either Con2 has property Q or it is logically false."
        );
    }

    #[test]
    fn redundancy_is_kept() {
        assert_eq!(
            r("P(a) | P(a)"),
            "either a has property P is true or a has property P is true."
        );
        assert_eq!(r("Bitter(a) & 1"), "both a is Bitter and it is logically true.");
    }

    #[test]
    fn relations_and_nesting() {
        assert_eq!(
            r("ResidentOf(tom, lawtonPark)"),
            "tom bears relation ResidentOf to lawtonPark."
        );
        assert_eq!(
            r("exists x. forall y. Likes(x, y)"),
            "There exists at least one x, such that for all y, x bears relation Likes to y."
        );
        assert_eq!(r("-(A & B)"), "it is not the case that both A holds and B holds.");
        assert_eq!(r("a = b"), "a is equal to b.");
    }

    #[test]
    fn explicit_lexicon_wins() {
        let phi = parse_formula("Pre1(a)").unwrap();
        let mut lex = Lexicon::default();
        lex.entries.insert(
            "Pre1".into(),
            LexEntry {
                kind: PhrasingKind::Standard,
                surface: "Tall".into(),
            },
        );
        assert_eq!(realize(&phi, &lex), "a is Tall.");
    }
}
