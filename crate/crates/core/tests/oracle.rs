mod common;

use std::collections::HashMap;

use common::{formula_from_seed, models, small_monadic, truth, Model};
use folmt_core::dataset::Label;
use folmt_core::gen::GenConfig;
use folmt_core::oracle::{entails, Completeness, Interpretation};
use folmt_core::{parse_formula, Formula};
use proptest::prelude::*;

fn to_model(i: &Interpretation) -> Model {
    Model {
        size: i.domain_size,
        consts: i.constant_map.iter().map(|(c, e)| (c.clone(), *e)).collect::<HashMap<_, _>>(),
        preds: i.predicate_tables.iter().map(|(p, t)| (p.clone(), t.clone())).collect(),
    }
}

/// Reference labels by enumerating every interpretation of size `1..=max`.
fn brute_label(gamma: &[Formula], q: &Formula, max: usize) -> Option<Label> {
    let all: Vec<&Formula> = gamma.iter().chain([q]).collect();
    let (mut counter, mut witness) = (false, false);
    for size in 1..=max {
        for m in models(&all, size, 1 << 15)? {
            if gamma.iter().all(|g| truth(&m, g)) {
                if truth(&m, q) {
                    witness = true;
                } else {
                    counter = true;
                }
            }
        }
    }
    Some(match (counter, witness) {
        (false, false) | (true, true) => Label::Unknown,
        (false, true) => Label::True,
        (true, false) => Label::False,
    })
}

fn tiny() -> GenConfig {
    GenConfig {
        max_depth: 3,
        constants: vec!["a".into()],
        predicates: vec![("P".into(), 1), ("Q".into(), 1), ("R".into(), 2)],
        allow_equality: true,
        ..GenConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(192))]

    #[test]
    fn sat_oracle_matches_enumeration(s1 in any::<u64>(), s2 in any::<u64>(), s3 in any::<u64>()) {
        let cfg = tiny();
        let gamma = vec![formula_from_seed(s1, &cfg), formula_from_seed(s2, &cfg)];
        let q = formula_from_seed(s3, &cfg);
        let Some(expected) = brute_label(&gamma, &q, 2) else { return Ok(()) };
        let v = entails(&gamma, &q, 2).unwrap();
        prop_assert_eq!(v.label, expected, "{:?} |= {}", gamma.iter().map(|g| g.to_string()).collect::<Vec<_>>(), q);
        if let Some(cm) = &v.countermodel {
            let m = to_model(cm);
            prop_assert!(gamma.iter().all(|g| truth(&m, g)) && !truth(&m, &q));
        }
        if let Some(w) = &v.witness {
            let m = to_model(w);
            prop_assert!(gamma.iter().all(|g| truth(&m, g)) && truth(&m, &q));
        }
    }

    #[test]
    fn exact_verdicts_are_stable_beyond_the_bound(s1 in any::<u64>(), s2 in any::<u64>()) {
        let cfg = GenConfig { max_depth: 3, ..small_monadic() };
        let gamma = vec![formula_from_seed(s1, &cfg)];
        let q = formula_from_seed(s2, &cfg);
        let v = entails(&gamma, &q, 8).unwrap();
        if v.completeness == Completeness::Exact {
            prop_assert_eq!(entails(&gamma, &q, 10).unwrap().label, v.label);
        }
    }
}

#[test]
fn infinite_only_countermodels_stay_bounded() {
    // A strict order without a maximum has no finite model, so the premises look
    // inconsistent at every bound; the verdict must not claim exactness.
    let gamma: Vec<Formula> = [
        "forall x. -Lt(x, x)",
        "forall x. forall y. forall z. ((Lt(x, y) & Lt(y, z)) -> Lt(x, z))",
        "forall x. exists y. Lt(x, y)",
    ]
    .iter()
    .map(|s| parse_formula(s).unwrap())
    .collect();
    let v = entails(&gamma, &parse_formula("P(a)").unwrap(), 3).unwrap();
    assert!(!v.premises_satisfiable);
    assert_eq!(v.label, Label::Unknown);
    assert_eq!(v.completeness, Completeness::Bounded);
}
