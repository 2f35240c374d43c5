//! Metamorphic group construction and stratified sampling.
//!
//! Every group applies exactly one edit to its source case: one redex in one
//! formula for the formula-level relations, or one case-level edit otherwise.
//! Randomness comes from a per-group seed that is stored with the group.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::SourceRecord;
use crate::formula::{all_vars, Conn, Formula};
use crate::oracle::{consistent_with, OracleError, OracleOptions};
use crate::realize::{realize, Lexicon};
use crate::rewrite::{find_redexes, rename_symbol, step, Category, MrId, RewriteStep, SymbolKind};

/// Produces the natural-language side of a changed formula.
pub trait Realizer {
    /// `original` is the formula being replaced with its sentence, when there is one.
    fn realize(
        &self,
        original: Option<(&Formula, &str)>,
        transformed: &Formula,
        lexicon: &Lexicon,
    ) -> Result<String, String>;
}

/// The rule-based realizer.
#[derive(Clone, Copy, Debug, Default)]
pub struct Deterministic;

impl Realizer for Deterministic {
    fn realize(&self, _: Option<(&Formula, &str)>, transformed: &Formula, lexicon: &Lexicon) -> Result<String, String> {
        Ok(realize(transformed, lexicon))
    }
}

#[derive(Clone, Debug, Default)]
pub struct PipelineOptions {
    /// Let formula-level relations rewrite the conclusion too.
    pub e_rules_on_conclusion: bool,
    /// Bounds for the consistency check of added premises.
    pub oracle: OracleOptions,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Premise(usize),
    Conclusion,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Edit {
    Rewrite { target: Target, step: RewriteStep },
    Case { description: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetamorphicGroup {
    pub id: String,
    pub mr: MrId,
    pub source: SourceRecord,
    pub follow_up: SourceRecord,
    pub edit: Edit,
    pub rng_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PipelineError {
    #[error("{mr} is not applicable: {reason}")]
    NotApplicable { mr: MrId, reason: String },
    #[error("{mr}: realization failed: {message}")]
    Realization { mr: MrId, message: String },
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("{0}")]
    Rewrite(#[from] crate::rewrite::RewriteError),
}

fn hash_hex(parts: &[&str]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p.as_bytes());
        h.update([0u8]);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Stable group id: a content hash of the source id, relation and seed.
pub fn group_id(source_id: &str, mr: MrId, seed: u64) -> String {
    hash_hex(&[source_id, mr.code(), &seed.to_string()])[..16].to_string()
}

/// Seed for one (record, relation) pair derived from a run seed.
pub fn derive_seed(seed: u64, source_id: &str, mr: MrId) -> u64 {
    let hex = hash_hex(&["seed", &seed.to_string(), source_id, mr.code()]);
    u64::from_str_radix(&hex[..16], 16).expect("hex digest")
}

fn not_applicable(mr: MrId, reason: impl Into<String>) -> PipelineError {
    PipelineError::NotApplicable {
        mr,
        reason: reason.into(),
    }
}

fn all_formulas(r: &SourceRecord) -> impl Iterator<Item = &Formula> {
    r.premises_fol.iter().chain(std::iter::once(&r.conclusion_fol))
}

/// Every identifier used by the record, of any kind.
fn used_names(r: &SourceRecord) -> BTreeSet<String> {
    let mut names = BTreeSet::new();
    for f in all_formulas(r) {
        names.extend(f.constants());
        names.extend(f.predicates().into_keys());
        names.extend(all_vars(f));
    }
    names
}

fn fresh_name(used: &BTreeSet<String>, prefix: &str) -> String {
    (1..)
        .map(|k| format!("{prefix}{k}"))
        .find(|n| !used.contains(n))
        .expect("unbounded name supply")
}

struct Builder<'a> {
    mr: MrId,
    source: &'a SourceRecord,
    follow: SourceRecord,
    lexicon: Lexicon,
    realizer: &'a dyn Realizer,
}

impl Builder<'_> {
    fn nl(&self, original: Option<(&Formula, &str)>, f: &Formula) -> Result<String, PipelineError> {
        self.realizer
            .realize(original, f, &self.lexicon)
            .map_err(|message| PipelineError::Realization { mr: self.mr, message })
    }

    fn set_premise(&mut self, i: usize, f: Formula) -> Result<(), PipelineError> {
        let original = (&self.source.premises_fol[i], self.source.premises_nl[i].as_str());
        self.follow.premises_nl[i] = self.nl(Some(original), &f)?;
        self.follow.premises_fol[i] = f;
        Ok(())
    }

    fn set_conclusion(&mut self, f: Formula) -> Result<(), PipelineError> {
        let original = (&self.source.conclusion_fol, self.source.conclusion_nl.as_str());
        self.follow.conclusion_nl = self.nl(Some(original), &f)?;
        self.follow.conclusion_fol = f;
        Ok(())
    }

    fn push_premise(&mut self, f: Formula) -> Result<(), PipelineError> {
        self.follow.premises_nl.push(self.nl(None, &f)?);
        self.follow.premises_fol.push(f);
        Ok(())
    }
}

pub fn apply_mr(record: &SourceRecord, mr: MrId, seed: u64) -> Result<MetamorphicGroup, PipelineError> {
    apply_mr_with(record, mr, seed, &PipelineOptions::default(), &Deterministic)
}

pub fn apply_mr_with(
    record: &SourceRecord,
    mr: MrId,
    seed: u64,
    opts: &PipelineOptions,
    realizer: &dyn Realizer,
) -> Result<MetamorphicGroup, PipelineError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut follow = record.clone();
    follow.id = format!("{}~{}", record.id, mr.code());
    let mut b = Builder {
        mr,
        source: record,
        follow,
        lexicon: Lexicon::derive(all_formulas(record)),
        realizer,
    };
    let n = record.premises_fol.len();
    let edit = match mr.category() {
        Category::E => {
            let mut candidates: Vec<(Target, crate::rewrite::Redex)> = Vec::new();
            for (i, p) in record.premises_fol.iter().enumerate() {
                candidates.extend(find_redexes(p, mr).into_iter().map(|r| (Target::Premise(i), r)));
            }
            if opts.e_rules_on_conclusion {
                candidates.extend(
                    find_redexes(&record.conclusion_fol, mr)
                        .into_iter()
                        .map(|r| (Target::Conclusion, r)),
                );
            }
            if candidates.is_empty() {
                return Err(not_applicable(mr, "no redex in any eligible formula"));
            }
            let (target, redex) = candidates.swap_remove(rng.random_range(0..candidates.len()));
            let formula = match target {
                Target::Premise(i) => &record.premises_fol[i],
                Target::Conclusion => &record.conclusion_fol,
            };
            let s: RewriteStep = step(formula, &redex)?;
            match target {
                Target::Premise(i) => b.set_premise(i, s.after.clone())?,
                Target::Conclusion => b.set_conclusion(s.after.clone())?,
            }
            Edit::Rewrite { target, step: s }
        }
        Category::S => {
            let (kind, pool, prefix): (SymbolKind, BTreeSet<String>, &str) = if mr == MrId::S1 {
                let consts = all_formulas(record).flat_map(|f| f.constants()).collect();
                (SymbolKind::Constant, consts, "Con")
            } else {
                let preds = all_formulas(record)
                    .flat_map(|f| f.predicates().into_keys())
                    .filter(|p| p != crate::formula::EQUALITY)
                    .collect();
                (SymbolKind::Predicate, preds, "Pre")
            };
            let symbols: Vec<String> = pool.into_iter().collect();
            if symbols.is_empty() {
                return Err(not_applicable(mr, "no symbol of the required kind"));
            }
            let old = symbols[rng.random_range(0..symbols.len())].clone();
            let new = fresh_name(&used_names(record), prefix);
            for i in 0..n {
                let f = &record.premises_fol[i];
                if let Ok(g) = rename_symbol(f, kind, &old, &new) {
                    b.set_premise(i, g)?;
                }
            }
            if let Ok(g) = rename_symbol(&record.conclusion_fol, kind, &old, &new) {
                b.set_conclusion(g)?;
            }
            let what = if kind == SymbolKind::Constant { "constant" } else { "predicate" };
            Edit::Case {
                description: format!("renamed {what} {old} to {new}"),
            }
        }
        Category::P => match mr {
            MrId::P1 => {
                let distinct: BTreeSet<String> =
                    record.premises_fol.iter().map(crate::print::print_formula).collect();
                if distinct.len() < 2 {
                    return Err(not_applicable(mr, "fewer than two distinct premises"));
                }
                let mut order: Vec<usize> = (0..n).collect();
                let same = |o: &[usize]| o.iter().enumerate().all(|(i, &j)| record.premises_fol[i] == record.premises_fol[j]);
                let mut tries = 0;
                loop {
                    order.shuffle(&mut rng);
                    tries += 1;
                    if !same(&order) {
                        break;
                    }
                    if tries == 64 {
                        order = (0..n).collect();
                        order.rotate_left(1);
                        if same(&order) {
                            // Rotating a periodic sequence can be a no-op; a swap of two
                            // distinct premises never is.
                            let j = (1..n).find(|&j| record.premises_fol[j] != record.premises_fol[0]).unwrap();
                            order = (0..n).collect();
                            order.swap(0, j);
                        }
                        break;
                    }
                }
                b.follow.premises_fol = order.iter().map(|&i| record.premises_fol[i].clone()).collect();
                b.follow.premises_nl = order.iter().map(|&i| record.premises_nl[i].clone()).collect();
                Edit::Case {
                    description: format!("permuted premises to order {order:?}"),
                }
            }
            MrId::P2 => {
                if n == 0 {
                    return Err(not_applicable(mr, "no premises"));
                }
                let i = rng.random_range(0..n);
                b.follow.premises_fol.push(record.premises_fol[i].clone());
                b.follow.premises_nl.push(record.premises_nl[i].clone());
                Edit::Case {
                    description: format!("duplicated premise {i}"),
                }
            }
            MrId::P3 => {
                let used = used_names(record);
                let k = (1..)
                    .find(|k| !used.contains(&format!("Pad{k}")) && !used.contains(&format!("padObj{k}")))
                    .unwrap();
                let extra = Formula::atom(
                    format!("Pad{k}"),
                    vec![crate::formula::Term::constant(format!("padObj{k}"))],
                );
                let mut gamma = record.premises_fol.clone();
                gamma.push(extra.clone());
                let check = consistent_with(&gamma, &opts.oracle).map_err(|e| match e {
                    OracleError::BudgetExceeded { .. } => not_applicable(mr, format!("consistency not verified: {e}")),
                    other => PipelineError::Oracle(other),
                })?;
                if !check.satisfiable {
                    return Err(not_applicable(mr, "premises are not satisfiable within the domain bound"));
                }
                b.push_premise(extra.clone())?;
                Edit::Case {
                    description: format!("appended irrelevant premise {extra}"),
                }
            }
            MrId::P4 => {
                if n < 2 {
                    return Err(not_applicable(mr, "fewer than two premises"));
                }
                let i = rng.random_range(0..n);
                let mut j = rng.random_range(0..n - 1);
                if j >= i {
                    j += 1;
                }
                let fused = Formula::and(vec![record.premises_fol[i].clone(), record.premises_fol[j].clone()]);
                b.push_premise(fused)?;
                Edit::Case {
                    description: format!("appended conjunction of premises {i} and {j}"),
                }
            }
            MrId::P5 => {
                let conj: Vec<usize> = (0..n).filter(|&i| matches!(record.premises_fol[i], Formula::And(_))).collect();
                if conj.is_empty() {
                    return Err(not_applicable(mr, "no conjunctive premise"));
                }
                let i = conj[rng.random_range(0..conj.len())];
                let Formula::And(cs) = &record.premises_fol[i] else { unreachable!() };
                let first = cs[0].clone();
                let rest = Formula::junction_or_single(Conn::And, cs[1..].to_vec());
                let first_nl = b.nl(None, &first)?;
                let rest_nl = b.nl(None, &rest)?;
                b.follow.premises_fol.splice(i..=i, [first, rest]);
                b.follow.premises_nl.splice(i..=i, [first_nl, rest_nl]);
                Edit::Case {
                    description: format!("split conjunctive premise {i}"),
                }
            }
            _ => unreachable!(),
        },
        Category::C => {
            let q = &record.conclusion_fol;
            if matches!(q, Formula::Bool(_)) {
                return Err(not_applicable(mr, "conclusion is a boolean constant"));
            }
            let (q2, what) = match mr {
                MrId::C1 => (Formula::and(vec![q.clone(), Formula::Bool(true)]), "conjoined the conclusion with truth"),
                MrId::C2 => (Formula::or(vec![q.clone(), Formula::Bool(false)]), "disjoined the conclusion with falsehood"),
                MrId::C3 => (Formula::not(Formula::not(q.clone())), "double-negated the conclusion"),
                _ => unreachable!(),
            };
            b.set_conclusion(q2)?;
            Edit::Case {
                description: what.to_string(),
            }
        }
    };
    Ok(MetamorphicGroup {
        id: group_id(&record.id, mr, seed),
        mr,
        source: record.clone(),
        follow_up: b.follow,
        edit,
        rng_seed: seed,
    })
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Applicability {
    pub applicable: usize,
    pub not_applicable: usize,
}

#[derive(Clone, Debug, Default)]
pub struct Pool {
    /// Groups sorted by id.
    pub groups: Vec<MetamorphicGroup>,
    pub applicability: BTreeMap<MrId, Applicability>,
    /// Failures other than inapplicability, as `(record id, relation, message)`.
    pub errors: Vec<(String, MrId, String)>,
}

/// Applies every relation to every record.
pub fn generate_pool(records: &[SourceRecord], mrs: &[MrId], seed: u64) -> Pool {
    generate_pool_with(records, mrs, seed, &PipelineOptions::default(), &Deterministic)
}

pub fn generate_pool_with(
    records: &[SourceRecord],
    mrs: &[MrId],
    seed: u64,
    opts: &PipelineOptions,
    realizer: &(dyn Realizer + Sync),
) -> Pool {
    let pairs: Vec<(&SourceRecord, MrId)> = records.iter().flat_map(|r| mrs.iter().map(move |&m| (r, m))).collect();
    let results: Vec<_> = pairs
        .par_iter()
        .map(|&(r, mr)| apply_mr_with(r, mr, derive_seed(seed, &r.id, mr), opts, realizer))
        .collect();
    let mut pool = Pool::default();
    for &mr in mrs {
        pool.applicability.entry(mr).or_default();
    }
    for ((r, mr), result) in pairs.into_iter().zip(results) {
        let count = pool.applicability.get_mut(&mr).unwrap();
        match result {
            Ok(g) => {
                count.applicable += 1;
                pool.groups.push(g);
            }
            Err(PipelineError::NotApplicable { .. }) => count.not_applicable += 1,
            Err(e) => {
                count.not_applicable += 1;
                pool.errors.push((r.id.clone(), mr, e.to_string()));
            }
        }
    }
    pool.groups.sort_by(|a, b| a.id.cmp(&b.id));
    pool
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplePlan {
    pub per_subrule_cap: usize,
    pub rng_seed: u64,
    pub category_minimum: usize,
}

impl SamplePlan {
    pub fn new(rng_seed: u64) -> Self {
        SamplePlan {
            per_subrule_cap: 200,
            rng_seed,
            category_minimum: 385,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubruleCount {
    pub available: usize,
    pub sampled: usize,
}

#[derive(Clone, Debug, Default)]
pub struct Sample {
    /// Sampled groups, by relation and then in draw order.
    pub groups: Vec<MetamorphicGroup>,
    pub per_mr: BTreeMap<MrId, SubruleCount>,
    pub per_category: BTreeMap<Category, usize>,
    pub warnings: Vec<String>,
}

/// Draws up to `per_subrule_cap` groups per relation, uniformly and reproducibly.
pub fn sample_pool(pool: &[MetamorphicGroup], plan: &SamplePlan) -> Sample {
    let mut by_mr: BTreeMap<MrId, Vec<&MetamorphicGroup>> = BTreeMap::new();
    for g in pool {
        by_mr.entry(g.mr).or_default().push(g);
    }
    let mut out = Sample::default();
    for (mr, mut groups) in by_mr {
        groups.sort_by(|a, b| a.id.cmp(&b.id));
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(plan.rng_seed, "sample", mr));
        let take = plan.per_subrule_cap.min(groups.len());
        let (chosen, _) = groups.partial_shuffle(&mut rng, take);
        out.groups.extend(chosen.iter().map(|g| (*g).clone()));
        out.per_mr.insert(
            mr,
            SubruleCount {
                available: groups.len(),
                sampled: take,
            },
        );
        *out.per_category.entry(mr.category()).or_default() += take;
    }
    for c in Category::ALL {
        let total = out.per_category.get(&c).copied().unwrap_or(0);
        if total < plan.category_minimum {
            out.warnings.push(format!(
                "{c}: {total} groups sampled, below the minimum of {}",
                plan.category_minimum
            ));
        }
    }
    out
}
