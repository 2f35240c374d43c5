//! Auditing reported violations for translation drift and parse failures.

use std::collections::{BTreeMap, HashMap, HashSet};

use folmt_core::metrics::{summarize_audit, AuditFlag, AuditSummary, ParsedLabel};
use folmt_core::pipeline::MetamorphicGroup;
use folmt_core::{print_formula, MrId};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::parse::{parse_audit, ParseMode};
use crate::prompt::{audit_prompt, PromptStrategy};
use crate::run::{series_name, RunRecord};
use crate::sut::{CaseRole, QueryError, Request, RequestMeta, Sut};

/// Asks the auditor whether `nl` preserves the structure of `fol`.
pub fn audit_translation(fol: &str, nl: &str, auditor: &dyn Sut, mode: ParseMode) -> Result<ParsedLabel, QueryError> {
    let request = Request {
        prompt: audit_prompt(fol, nl),
        meta: RequestMeta::Audit {
            fol: fol.to_string(),
            nl: nl.to_string(),
        },
    };
    Ok(parse_audit(&auditor.query(&request)?, mode))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditItem {
    /// `premise <i>` or `conclusion`.
    pub target: String,
    pub fol: String,
    pub nl: String,
    pub verdict: ParsedLabel,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditFinding {
    pub mg_id: String,
    pub mr: MrId,
    pub series: String,
    pub y_s_hat: ParsedLabel,
    pub y_f_hat: ParsedLabel,
    pub items: Vec<AuditItem>,
    pub flag: AuditFlag,
}

/// Follow-up sentences that do not occur in the source, paired with their formulas.
pub fn changed_sentences(g: &MetamorphicGroup) -> Vec<(String, String, String)> {
    let source: HashSet<&str> = g
        .source
        .premises_nl
        .iter()
        .map(String::as_str)
        .chain([g.source.conclusion_nl.as_str()])
        .collect();
    let f = &g.follow_up;
    let mut out: Vec<(String, String, String)> = f
        .premises_fol
        .iter()
        .zip(&f.premises_nl)
        .enumerate()
        .filter(|(_, (_, nl))| !source.contains(nl.as_str()))
        .map(|(i, (fol, nl))| (format!("premise {i}"), print_formula(fol), nl.clone()))
        .collect();
    if !source.contains(f.conclusion_nl.as_str()) {
        out.push(("conclusion".into(), print_formula(&f.conclusion_fol), f.conclusion_nl.clone()));
    }
    out
}

/// Samples up to `sample` reported violations and audits each one.
///
/// A violation is reported when the two logged answers differ, a parse failure
/// counting as its own answer. It is billed to parsing when either answer failed
/// to parse, and to drift when the auditor rejects any changed sentence.
pub fn audit_violations(
    groups: &[MetamorphicGroup],
    records: &[RunRecord],
    auditor: &dyn Sut,
    sample: usize,
    seed: u64,
    mode: ParseMode,
) -> Result<(Vec<AuditFinding>, Option<AuditSummary>), QueryError> {
    let by_id: HashMap<&str, &MetamorphicGroup> = groups.iter().map(|g| (g.id.as_str(), g)).collect();
    let mut answers: BTreeMap<(String, PromptStrategy, String), [Option<ParsedLabel>; 2]> = BTreeMap::new();
    for r in records {
        if by_id.contains_key(r.mg_id.as_str()) {
            answers.entry((r.sut.clone(), r.strategy, r.mg_id.clone())).or_default()
                [(r.case_role == CaseRole::FollowUp) as usize] = Some(r.parsed_label);
        }
    }
    let mut reported: Vec<(String, &MetamorphicGroup, ParsedLabel, ParsedLabel)> = answers
        .into_iter()
        .filter_map(|((sut, strategy, id), a)| match a {
            [Some(s), Some(f)] if s != f => Some((series_name(&sut, strategy), by_id[id.as_str()], s, f)),
            _ => None,
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    reported.shuffle(&mut rng);
    reported.truncate(sample);
    reported.sort_by(|a, b| (&a.0, &a.1.id).cmp(&(&b.0, &b.1.id)));

    let mut findings = Vec::with_capacity(reported.len());
    for (series, g, s, f) in reported {
        let mut items = Vec::new();
        for (target, fol, nl) in changed_sentences(g) {
            let verdict = audit_translation(&fol, &nl, auditor, mode)?;
            items.push(AuditItem { target, fol, nl, verdict });
        }
        let flag = AuditFlag {
            drift: items.iter().any(|i| i.verdict == ParsedLabel::False),
            parse: s == ParsedLabel::ParseError || f == ParsedLabel::ParseError,
        };
        findings.push(AuditFinding {
            mg_id: g.id.clone(),
            mr: g.mr,
            series,
            y_s_hat: s,
            y_f_hat: f,
            items,
            flag,
        });
    }
    let flags: Vec<AuditFlag> = findings.iter().map(|f| f.flag).collect();
    Ok((findings, summarize_audit(&flags).ok()))
}
