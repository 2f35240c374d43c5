use folmt_core::dataset::{desk_corpus, Label, Origin, SourceRecord};
use folmt_core::oracle::{consistent, entails, exact_bound, Completeness};
use folmt_core::pipeline::{apply_mr, generate_pool, Edit, MetamorphicGroup, Target};
use folmt_core::{parse_formula, Formula, MrId};

fn verdict(r: &SourceRecord, max_domain: usize) -> folmt_core::oracle::Verdict {
    entails(&r.premises_fol, &r.conclusion_fol, max_domain).unwrap_or_else(|e| panic!("{}: {e}", r.id))
}

fn formulas(r: &SourceRecord) -> Vec<&Formula> {
    r.premises_fol.iter().chain([&r.conclusion_fol]).collect()
}

#[test]
fn corpus_loads_completely() {
    let corpus = desk_corpus();
    assert_eq!(corpus.len(), 50);
    assert_eq!(corpus.iter().filter(|r| r.origin == Origin::Folio).count(), 1);
    for r in &corpus {
        assert_eq!(r.premises_nl.len(), r.premises_fol.len(), "{}", r.id);
        assert!(r.gold_label.is_some(), "{}", r.id);
    }
    let mut ids: Vec<_> = corpus.iter().map(|r| r.id.as_str()).collect();
    ids.dedup();
    assert_eq!(ids.len(), 50);
}

#[test]
fn gold_labels_agree_with_the_oracle() {
    for r in desk_corpus() {
        let v = verdict(&r, 4);
        assert!(v.premises_satisfiable, "{}", r.id);
        assert_eq!(Some(v.label), r.gold_label, "{}", r.id);
    }
}

#[test]
fn every_relation_applies_somewhere() {
    let pool = generate_pool(&desk_corpus(), &MrId::ALL, 17);
    assert!(pool.errors.is_empty(), "{:?}", pool.errors);
    for mr in MrId::ALL {
        assert!(pool.applicability[&mr].applicable > 0, "{mr} never applies");
    }
    let s1 = &pool.applicability[&MrId::S1];
    assert_eq!(s1.applicable + s1.not_applicable, 50);
}

#[test]
fn pool_is_reproducible() {
    let corpus = desk_corpus();
    let a = generate_pool(&corpus, &MrId::ALL, 5);
    let b = generate_pool(&corpus, &MrId::ALL, 5);
    assert_eq!(a.groups, b.groups);
    let c = generate_pool(&corpus, &MrId::ALL, 6);
    assert_ne!(a.groups, c.groups);
}

#[test]
fn lawton_park_implication_elimination() {
    let corpus = desk_corpus();
    let source = corpus.iter().find(|r| r.origin == Origin::Folio).unwrap();
    let g = apply_mr(source, MrId::E1_1, 0).unwrap();
    let Edit::Rewrite { target, step } = &g.edit else { panic!("not a rewrite") };
    assert_eq!(*target, Target::Premise(1));
    assert_eq!(step.redex.path_text(), "0");

    let expected = parse_formula("forall x. (not ResidentOf(x, lawtonPark) or UseZipCode(x, num98199))").unwrap();
    assert_eq!(g.follow_up.premises_fol[1], expected);
    assert_eq!(
        g.follow_up.premises_fol[1].to_string(),
        "forall x. (-ResidentOf(x, lawtonPark) | UseZipCode(x, num98199))"
    );
    for i in [0, 2, 3] {
        assert_eq!(g.follow_up.premises_fol[i], source.premises_fol[i]);
        assert_eq!(g.follow_up.premises_nl[i], source.premises_nl[i]);
    }
    assert_eq!(g.follow_up.conclusion_fol, source.conclusion_fol);
    assert_eq!(g.follow_up.conclusion_nl, "Tom is a citizen of Washington.");
    assert_eq!(
        g.follow_up.premises_nl[1],
        "For all x, either it is not the case that x bears relation ResidentOf to lawtonPark or x bears relation UseZipCode to num98199."
    );
    assert_eq!(g.follow_up.gold_label, Some(Label::Unknown));
    assert_eq!(verdict(&g.follow_up, 3).label, Label::Unknown);
}

fn check_group(g: &MetamorphicGroup) {
    let ctx = format!("{} {} ({})", g.mr, g.source.id, g.id);
    assert_eq!(g.follow_up.gold_label, g.source.gold_label, "{ctx}");
    assert_eq!(g.follow_up.premises_nl.len(), g.follow_up.premises_fol.len(), "{ctx}");

    // Every relation preserves the label at each fixed domain size, so bounded
    // verdicts must agree even outside the decidable fragment.
    let s = verdict(&g.source, 3);
    let f = verdict(&g.follow_up, 3);
    assert_eq!(s.label, f.label, "{ctx}");

    let bound = exact_bound(formulas(&g.source).into_iter().chain(formulas(&g.follow_up)));
    if let Some(b) = bound.filter(|&b| b <= 16) {
        let s = verdict(&g.source, b);
        let f = verdict(&g.follow_up, b);
        assert_eq!(s.completeness, Completeness::Exact, "{ctx}");
        assert_eq!(f.completeness, Completeness::Exact, "{ctx}");
        assert_eq!(s.label, f.label, "{ctx}");
        assert_eq!(Some(s.label), g.source.gold_label, "{ctx}");
    }

    if g.mr == MrId::P3 {
        let added = g.follow_up.premises_fol.last().unwrap();
        assert!(consistent(&g.follow_up.premises_fol, 3).unwrap().satisfiable, "{ctx}");
        let shared: Vec<_> = formulas(&g.source).iter().flat_map(|f| f.predicates().into_keys()).collect();
        assert!(added.predicates().keys().all(|p| !shared.contains(p)), "{ctx}");
        assert!(added.constants().iter().all(|c| formulas(&g.source).iter().all(|f| !f.constants().contains(c))), "{ctx}");
    }
}

#[test]
fn metamorphic_groups_preserve_labels() {
    let pool = generate_pool(&desk_corpus(), &MrId::ALL, 2024);
    assert!(pool.groups.len() > 500, "{}", pool.groups.len());
    for g in &pool.groups {
        check_group(g);
    }
}
