//! One-step rewrites for the twenty metamorphic relations, redex enumeration and
//! the staged normalization procedure.

mod normalize;
mod rename;
mod rules;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::formula::{Conn, Formula, Quant};
use crate::measure::{measure, Measure};
use crate::print::print_formula;

pub use normalize::{normalize_np, normalize_np_with, NpOptions, Normalized};
pub use rename::{rename_symbol, SymbolKind};
pub use rules::{apply, find_redexes, step};

/// Rule family of a relation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    E,
    S,
    P,
    C,
}

impl Category {
    pub const ALL: [Category; 4] = [Category::E, Category::S, Category::P, Category::C];

    pub fn label(self) -> &'static str {
        match self {
            Category::E => "MR-E",
            Category::S => "MR-S",
            Category::P => "MR-P",
            Category::C => "MR-C",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[allow(non_camel_case_types)]
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MrId {
    E1_1,
    E1_2,
    E1_3,
    E1_4,
    E1_5,
    E1_6,
    E2_1,
    E2_2,
    E2_3,
    E2_4,
    S1,
    S2,
    P1,
    P2,
    P3,
    P4,
    P5,
    C1,
    C2,
    C3,
}

impl MrId {
    pub const ALL: [MrId; 20] = [
        MrId::E1_1,
        MrId::E1_2,
        MrId::E1_3,
        MrId::E1_4,
        MrId::E1_5,
        MrId::E1_6,
        MrId::E2_1,
        MrId::E2_2,
        MrId::E2_3,
        MrId::E2_4,
        MrId::S1,
        MrId::S2,
        MrId::P1,
        MrId::P2,
        MrId::P3,
        MrId::P4,
        MrId::P5,
        MrId::C1,
        MrId::C2,
        MrId::C3,
    ];

    pub fn category(self) -> Category {
        use MrId::*;
        match self {
            E1_1 | E1_2 | E1_3 | E1_4 | E1_5 | E1_6 | E2_1 | E2_2 | E2_3 | E2_4 => Category::E,
            S1 | S2 => Category::S,
            P1 | P2 | P3 | P4 | P5 => Category::P,
            C1 | C2 | C3 => Category::C,
        }
    }

    /// Whether the relation rewrites inside a single formula.
    pub fn is_formula_level(self) -> bool {
        self.category() == Category::E
    }

    /// Short code such as `E1_1` or `P3`.
    pub fn code(self) -> &'static str {
        use MrId::*;
        match self {
            E1_1 => "E1_1",
            E1_2 => "E1_2",
            E1_3 => "E1_3",
            E1_4 => "E1_4",
            E1_5 => "E1_5",
            E1_6 => "E1_6",
            E2_1 => "E2_1",
            E2_2 => "E2_2",
            E2_3 => "E2_3",
            E2_4 => "E2_4",
            S1 => "S1",
            S2 => "S2",
            P1 => "P1",
            P2 => "P2",
            P3 => "P3",
            P4 => "P4",
            P5 => "P5",
            C1 => "C1",
            C2 => "C2",
            C3 => "C3",
        }
    }

    /// Display label such as `MR-E1.1`.
    pub fn label(self) -> String {
        format!("MR-{}", self.code().replace('_', "."))
    }
}

impl fmt::Display for MrId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for MrId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let t = t.strip_prefix("MR-").or_else(|| t.strip_prefix("mr-")).unwrap_or(t);
        let norm = t.replace('.', "_").to_ascii_uppercase();
        MrId::ALL
            .into_iter()
            .find(|m| m.code() == norm)
            .ok_or_else(|| format!("unknown metamorphic relation `{s}`"))
    }
}

/// Value bound to a schema metavariable.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Binding {
    Formula(Formula),
    Var(String),
    Quant(Quant),
    Conn(Conn),
}

/// The concrete rewrite a redex performs at its node.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Shape {
    ImplElim,
    IffElim,
    DoubleNeg,
    DeMorgan,
    QuantDuality,
    /// Lift the quantified child at this index over its siblings.
    Lift { child: usize },
    /// Flatten the cluster rooted here and sort its members.
    Canonicalize,
    /// Rename the variable of the quantified child at this index.
    Rename { child: usize, fresh: String },
    /// Reorder a prefix block; `order[k]` is the old position of the new k-th binder.
    SortBlock { len: usize, order: Vec<usize> },
    Idempotent { keep: usize, drop: usize },
    Absorb { keep: usize, drop: usize },
    Complement { pos: usize, neg: usize },
    Identity { idx: usize },
    Dominate { idx: usize },
    Distribute { idx: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Redex {
    pub mr: MrId,
    pub path: Vec<usize>,
    pub shape: Shape,
    pub binding: BTreeMap<String, Binding>,
    /// The subformula the redex was matched against.
    pub matched: Formula,
}

impl Redex {
    pub fn path_text(&self) -> String {
        path_text(&self.path)
    }
}

pub fn path_text(path: &[usize]) -> String {
    if path.is_empty() {
        "root".into()
    } else {
        path.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(".")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewriteStep {
    pub before: Formula,
    pub after: Formula,
    pub redex: Redex,
    pub measure_before: Measure,
    pub measure_after: Measure,
}

impl RewriteStep {
    pub fn new(before: Formula, after: Formula, redex: Redex) -> Self {
        let measure_before = measure(&before);
        let measure_after = measure(&after);
        RewriteStep {
            before,
            after,
            redex,
            measure_before,
            measure_after,
        }
    }

    /// One tab-separated trace line: relation, path, before, after, measures.
    pub fn trace_line(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{}\t{}",
            self.redex.mr,
            self.redex.path_text(),
            print_formula(&self.before),
            print_formula(&self.after),
            self.measure_before,
            self.measure_after
        )
    }
}

pub fn dump_trace(steps: &[RewriteStep]) -> String {
    steps.iter().map(|s| s.trace_line() + "\n").collect()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RewriteError {
    #[error("{mr} redex at {path} no longer matches the formula")]
    StaleRedex { mr: MrId, path: String },
    #[error("`{0}` already occurs and is not fresh")]
    NotFresh(String),
    #[error("`{0}` does not occur")]
    NotPresent(String),
    #[error("internal error: {0}")]
    Internal(String),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twenty_relations_in_four_categories() {
        assert_eq!(MrId::ALL.len(), 20);
        let count = |c| MrId::ALL.iter().filter(|m| m.category() == c).count();
        assert_eq!(
            [count(Category::E), count(Category::S), count(Category::P), count(Category::C)],
            [10, 2, 5, 3]
        );
    }

    #[test]
    fn ids_parse_in_several_spellings() {
        for m in MrId::ALL {
            assert_eq!(m.code().parse::<MrId>().unwrap(), m);
            assert_eq!(m.label().parse::<MrId>().unwrap(), m);
        }
        assert_eq!("E1.1".parse::<MrId>().unwrap(), MrId::E1_1);
        assert_eq!("mr-c3".parse::<MrId>().unwrap(), MrId::C3);
        assert!("E9".parse::<MrId>().is_err());
        assert_eq!(MrId::E2_4.to_string(), "MR-E2.4");
    }
}
