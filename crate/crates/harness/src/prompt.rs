//! Prompt assembly from the verbatim template assets.

use std::fmt;
use std::str::FromStr;

use folmt_core::dataset::SourceRecord;
use serde::{Deserialize, Serialize};

pub const ZERO_SHOT: &str = include_str!("../assets/entailment_zero_shot.txt");
pub const ZERO_SHOT_COT: &str = include_str!("../assets/entailment_zero_shot_cot.txt");
pub const FEW_SHOT: &str = include_str!("../assets/entailment_few_shot.txt");
pub const FEW_SHOT_COT: &str = include_str!("../assets/entailment_few_shot_cot.txt");
pub const ENTAILMENT_USER: &str = include_str!("../assets/entailment_user.txt");
pub const TRANSLATION_SYSTEM: &str = include_str!("../assets/translation_system.txt");
pub const TRANSLATION_USER: &str = include_str!("../assets/translation_user.txt");
pub const AUDIT_SYSTEM: &str = include_str!("../assets/audit_system.txt");
pub const AUDIT_USER: &str = include_str!("../assets/audit_user.txt");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PromptStrategy {
    ZeroShot,
    ZeroShotCot,
    FewShot,
    FewShotCot,
}

impl PromptStrategy {
    pub const ALL: [PromptStrategy; 4] = [
        PromptStrategy::ZeroShot,
        PromptStrategy::ZeroShotCot,
        PromptStrategy::FewShot,
        PromptStrategy::FewShotCot,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PromptStrategy::ZeroShot => "zero-shot",
            PromptStrategy::ZeroShotCot => "zero-shot-cot",
            PromptStrategy::FewShot => "few-shot",
            PromptStrategy::FewShotCot => "few-shot-cot",
        }
    }

    pub fn system_prompt(self) -> &'static str {
        match self {
            PromptStrategy::ZeroShot => ZERO_SHOT,
            PromptStrategy::ZeroShotCot => ZERO_SHOT_COT,
            PromptStrategy::FewShot => FEW_SHOT,
            PromptStrategy::FewShotCot => FEW_SHOT_COT,
        }
    }

    /// Whether the expected answer carries a `reasoning` field.
    pub fn is_cot(self) -> bool {
        matches!(self, PromptStrategy::ZeroShotCot | PromptStrategy::FewShotCot)
    }
}

impl fmt::Display for PromptStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PromptStrategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        PromptStrategy::ALL
            .into_iter()
            .find(|p| p.as_str() == norm)
            .ok_or_else(|| format!("unknown strategy `{s}` (expected zero-shot, zero-shot-cot, few-shot or few-shot-cot)"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prompt {
    pub system: String,
    pub user: String,
}

/// Replaces `{name}` placeholders in a single pass, so substituted text is never
/// rescanned.
pub fn fill(template: &str, values: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let tail = &rest[open + 1..];
        let hit = values.iter().find(|(k, _)| tail.starts_with(k) && tail[k.len()..].starts_with('}'));
        match hit {
            Some((k, v)) => {
                out.push_str(v);
                rest = &tail[k.len() + 1..];
            }
            None => {
                out.push('{');
                rest = tail;
            }
        }
    }
    out.push_str(rest);
    out
}

pub fn build_prompt(record: &SourceRecord, strategy: PromptStrategy) -> Prompt {
    let premises = record.premises_nl.join("\n");
    Prompt {
        system: strategy.system_prompt().to_string(),
        user: fill(
            ENTAILMENT_USER,
            &[("premises_text", &premises), ("conclusion_text", &record.conclusion_nl)],
        ),
    }
}

/// Prompt asking for the sentence of `transformed_fol`; the original pair is context.
pub fn translation_prompt(original_fol: &str, original_nl: &str, transformed_fol: &str) -> Prompt {
    Prompt {
        system: TRANSLATION_SYSTEM.to_string(),
        user: fill(
            TRANSLATION_USER,
            &[
                ("original_fol", original_fol),
                ("original_nl", original_nl),
                ("transformed_fol", transformed_fol),
            ],
        ),
    }
}

pub fn audit_prompt(fol: &str, nl: &str) -> Prompt {
    Prompt {
        system: AUDIT_SYSTEM.to_string(),
        user: fill(AUDIT_USER, &[("fol", fol), ("nl", nl)]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use folmt_core::dataset::Origin;
    use folmt_core::parse_formula;

    fn record(premises: &[&str], conclusion: &str) -> SourceRecord {
        SourceRecord {
            id: "t".into(),
            premises_nl: premises.iter().map(|s| s.to_string()).collect(),
            premises_fol: premises.iter().map(|_| parse_formula("P(a)").unwrap()).collect(),
            conclusion_nl: conclusion.into(),
            conclusion_fol: parse_formula("P(a)").unwrap(),
            gold_label: None,
            origin: Origin::Other,
        }
    }

    #[test]
    fn user_prompt_layout() {
        let p = build_prompt(&record(&["A.", "B."], "C."), PromptStrategy::ZeroShot);
        assert_eq!(
            p.user,
            "Premises:\nA.\nB.\n\nConclusion:\nC.\n\nEvaluate the logical entailment. Output raw JSON only:"
        );
        let empty = build_prompt(&record(&[], "C."), PromptStrategy::FewShot);
        assert!(empty.user.starts_with("Premises:\n\n\nConclusion:\nC."));
    }

    #[test]
    fn placeholders_are_not_rescanned() {
        let p = build_prompt(&record(&["{conclusion_text}"], "x"), PromptStrategy::ZeroShot);
        assert!(p.user.starts_with("Premises:\n{conclusion_text}\n"));
        assert_eq!(fill("{a}{b}{", &[("a", "{b}")]), "{b}{b}{");
    }

    #[test]
    fn strategy_names() {
        for s in PromptStrategy::ALL {
            assert_eq!(s.as_str().parse::<PromptStrategy>().unwrap(), s);
        }
        assert_eq!("FEW_SHOT_COT".parse::<PromptStrategy>().unwrap(), PromptStrategy::FewShotCot);
    }
}
