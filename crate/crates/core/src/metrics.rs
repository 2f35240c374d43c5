//! Oracle checking and consistency metrics.
//!
//! Statistics are kept as integer counts so that merging partitions and
//! replaying logs is exact; rates are derived on demand.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::Label;
use crate::rewrite::{Category, MrId};

/// A label extracted from a reasoner's output.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ParsedLabel {
    True,
    False,
    Unknown,
    ParseError,
}

impl ParsedLabel {
    pub fn label(self) -> Option<Label> {
        match self {
            ParsedLabel::True => Some(Label::True),
            ParsedLabel::False => Some(Label::False),
            ParsedLabel::Unknown => Some(Label::Unknown),
            ParsedLabel::ParseError => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ParsedLabel::True => "True",
            ParsedLabel::False => "False",
            ParsedLabel::Unknown => "Unknown",
            ParsedLabel::ParseError => "ParseError",
        }
    }
}

impl From<Label> for ParsedLabel {
    fn from(l: Label) -> Self {
        match l {
            Label::True => ParsedLabel::True,
            Label::False => ParsedLabel::False,
            Label::Unknown => ParsedLabel::Unknown,
        }
    }
}

impl fmt::Display for ParsedLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ParsedLabel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "ParseError" => Ok(ParsedLabel::ParseError),
            _ => s.parse::<Label>().map(Into::into).map_err(|_| format!("unknown label {s:?}")),
        }
    }
}

/// Every relation expects equal outputs, so a violation is simply disagreement.
pub fn check_oracle(y_s: Label, y_f: Label) -> bool {
    y_s != y_f
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupOutcome {
    pub mg_id: String,
    pub mr: MrId,
    pub y_gold: Option<Label>,
    pub y_s_hat: ParsedLabel,
    pub y_f_hat: ParsedLabel,
    pub violation: bool,
    pub parse_issue: bool,
}

impl GroupOutcome {
    pub fn new(mg_id: impl Into<String>, mr: MrId, y_gold: Option<Label>, y_s_hat: ParsedLabel, y_f_hat: ParsedLabel) -> Self {
        let (violation, parse_issue) = match (y_s_hat.label(), y_f_hat.label()) {
            (Some(s), Some(f)) => (check_oracle(s, f), false),
            _ => (false, true),
        };
        GroupOutcome {
            mg_id: mg_id.into(),
            mr,
            y_gold,
            y_s_hat,
            y_f_hat,
            violation,
            parse_issue,
        }
    }
}

/// A proportion `num / den`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rate {
    pub num: usize,
    pub den: usize,
}

impl Rate {
    pub fn new(num: usize, den: usize) -> Option<Rate> {
        (den > 0).then_some(Rate { num, den })
    }

    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// The rate in hundredths of a percent, rounded half up.
    pub fn basis_points(self) -> u64 {
        let (n, d) = (self.num as u128, self.den as u128);
        ((2 * n * 10_000 + d) / (2 * d)) as u64
    }

    /// Two-decimal percentage without the sign, e.g. `"26.76"`.
    pub fn percent(self) -> String {
        let bp = self.basis_points();
        format!("{}.{:02}", bp / 100, bp % 100)
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}%", self.percent())
    }
}

/// How parse failures enter the accuracy-family denominators. The violation
/// rate always excludes them.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParsePolicy {
    /// Drop groups with any parse failure.
    #[default]
    Exclude,
    /// Keep them and treat a parse failure as a wrong answer distinct from every label.
    CountAsWrong,
}

/// Counts over one set of groups.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stats {
    pub n_groups: usize,
    pub parse_excluded: usize,
    pub n_evaluable: usize,
    pub n_violations: usize,
    /// Groups in the accuracy denominators.
    pub n_gold: usize,
    pub static_correct: usize,
    /// Source and follow-up both correct.
    pub cons_correct: usize,
    /// Source correct, outputs disagree.
    pub hidden_defect: usize,
    /// Source wrong, outputs disagree.
    pub wrong_violation: usize,
    /// Both wrong, outputs agree.
    pub consistent_wrong: usize,
}

impl Stats {
    fn add(&mut self, o: &GroupOutcome, policy: ParsePolicy) {
        self.n_groups += 1;
        if o.parse_issue {
            self.parse_excluded += 1;
        } else {
            self.n_evaluable += 1;
            self.n_violations += o.violation as usize;
        }
        let Some(gold) = o.y_gold else { return };
        if o.parse_issue && policy == ParsePolicy::Exclude {
            return;
        }
        let gold = ParsedLabel::from(gold);
        let s_ok = o.y_s_hat == gold;
        let f_ok = o.y_f_hat == gold;
        let disagree = o.y_s_hat != o.y_f_hat;
        self.n_gold += 1;
        self.static_correct += s_ok as usize;
        self.cons_correct += (s_ok && f_ok) as usize;
        self.hidden_defect += (s_ok && disagree) as usize;
        self.wrong_violation += (!s_ok && disagree) as usize;
        self.consistent_wrong += (!s_ok && !disagree) as usize;
    }

    pub fn merge(&mut self, other: &Stats) {
        self.n_groups += other.n_groups;
        self.parse_excluded += other.parse_excluded;
        self.n_evaluable += other.n_evaluable;
        self.n_violations += other.n_violations;
        self.n_gold += other.n_gold;
        self.static_correct += other.static_correct;
        self.cons_correct += other.cons_correct;
        self.hidden_defect += other.hidden_defect;
        self.wrong_violation += other.wrong_violation;
        self.consistent_wrong += other.consistent_wrong;
    }

    pub fn mvr(&self) -> Option<Rate> {
        Rate::new(self.n_violations, self.n_evaluable)
    }

    pub fn acc_static(&self) -> Option<Rate> {
        Rate::new(self.static_correct, self.n_gold)
    }

    pub fn acc_cons(&self) -> Option<Rate> {
        Rate::new(self.cons_correct, self.n_gold)
    }

    pub fn hdr(&self) -> Option<Rate> {
        Rate::new(self.hidden_defect, self.n_gold)
    }

    pub fn fur(&self) -> Option<Rate> {
        Rate::new(self.consistent_wrong, self.n_gold)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub overall: Stats,
    pub per_mr: BTreeMap<MrId, Stats>,
    pub per_category: BTreeMap<Category, Stats>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricsError {
    #[error("no outcomes to summarize")]
    EmptyInput,
    #[error("an audit needs at least one inspected violation")]
    NothingInspected,
}

pub fn summarize(outcomes: &[GroupOutcome]) -> Result<MetricsSummary, MetricsError> {
    summarize_with(outcomes, ParsePolicy::Exclude)
}

pub fn summarize_with(outcomes: &[GroupOutcome], policy: ParsePolicy) -> Result<MetricsSummary, MetricsError> {
    if outcomes.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let mut summary = MetricsSummary::default();
    for o in outcomes {
        summary.overall.add(o, policy);
        summary.per_mr.entry(o.mr).or_default().add(o, policy);
        summary.per_category.entry(o.mr.category()).or_default().add(o, policy);
    }
    Ok(summary)
}

/// Auditor verdict on one reported violation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditFlag {
    pub drift: bool,
    pub parse: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditSummary {
    pub n_inspected: usize,
    pub fp_drift: usize,
    pub fp_parse: usize,
    pub frr: Rate,
}

/// A violation flagged for both causes is billed to parsing, so each is counted once.
pub fn summarize_audit(flags: &[AuditFlag]) -> Result<AuditSummary, MetricsError> {
    let fp_parse = flags.iter().filter(|f| f.parse).count();
    let fp_drift = flags.iter().filter(|f| f.drift && !f.parse).count();
    let frr = Rate::new(fp_drift + fp_parse, flags.len()).ok_or(MetricsError::NothingInspected)?;
    Ok(AuditSummary {
        n_inspected: flags.len(),
        fp_drift,
        fp_parse,
        frr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_table() {
        for s in Label::ALL {
            for f in Label::ALL {
                assert_eq!(check_oracle(s, f), s != f);
            }
        }
    }

    #[test]
    fn rounding_is_half_up() {
        assert_eq!(Rate::new(1, 8).unwrap().percent(), "12.50");
        assert_eq!(Rate::new(1, 3).unwrap().percent(), "33.33");
        assert_eq!(Rate::new(2, 3).unwrap().percent(), "66.67");
        // 1/80000 = 0.00125% rounds down, 1/40000 = 0.0025% rounds up
        assert_eq!(Rate::new(1, 80_000).unwrap().percent(), "0.00");
        assert_eq!(Rate::new(1, 20_000).unwrap().percent(), "0.01");
        assert_eq!(Rate::new(7, 7).unwrap().percent(), "100.00");
        assert!(Rate::new(0, 0).is_none());
    }

    #[test]
    fn parse_failures_are_set_aside() {
        let os = vec![
            GroupOutcome::new("a", MrId::C1, Some(Label::True), ParsedLabel::True, ParsedLabel::False),
            GroupOutcome::new("b", MrId::C1, Some(Label::True), ParsedLabel::ParseError, ParsedLabel::True),
            GroupOutcome::new("c", MrId::P1, None, ParsedLabel::Unknown, ParsedLabel::Unknown),
        ];
        let s = summarize(&os).unwrap();
        assert_eq!(s.overall.n_groups, 3);
        assert_eq!(s.overall.parse_excluded, 1);
        assert_eq!(s.overall.mvr(), Rate::new(1, 2));
        assert_eq!(s.overall.n_gold, 1);
        assert_eq!(s.overall.hdr(), Rate::new(1, 1));
        assert_eq!(s.per_category[&Category::C].n_groups, 2);
        let counted = summarize_with(&os, ParsePolicy::CountAsWrong).unwrap();
        assert_eq!(counted.overall.n_gold, 2);
        assert_eq!(counted.overall.acc_static(), Rate::new(1, 2));
        assert_eq!(counted.overall.mvr(), Rate::new(1, 2));
        assert_eq!(summarize(&[]), Err(MetricsError::EmptyInput));
    }

    #[test]
    fn audit_edges() {
        let none = vec![AuditFlag::default(); 10];
        assert_eq!(summarize_audit(&none).unwrap().frr.percent(), "0.00");
        let all = vec![AuditFlag { drift: true, parse: false }; 10];
        assert_eq!(summarize_audit(&all).unwrap().frr.percent(), "100.00");
        assert!(summarize_audit(&[]).is_err());
    }
}
