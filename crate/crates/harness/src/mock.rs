//! Scripted systems for offline runs and tests.
//!
//! Entailment answers follow a [`LabelPolicy`] evaluated on the request metadata.
//! Translation requests are answered from a table or the rule-based realizer, and
//! audit requests by comparing the sentence with that realizer's output.

use std::collections::BTreeMap;
use std::time::Duration;

use folmt_core::dataset::Label;
use folmt_core::realize::realize_auto;
use folmt_core::rewrite::Category;
use folmt_core::parse_formula;
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::http::Gate;
use crate::sut::{CaseMeta, CaseRole, QueryError, Request, RequestMeta, Sut};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LabelPolicy {
    /// Always the gold label (`Unknown` when a case has none).
    Gold,
    /// Gold on sources and on follow-ups outside `categories`; follow-ups in
    /// `categories` get the next label in True, False, Unknown order.
    FlipFollowUps { categories: Vec<Category> },
    /// The same raw text for every request.
    Fixed { raw: String },
    /// A label derived from a hash of the group id, role and seed.
    Hashed { seed: u64 },
}

pub fn rotate(l: Label) -> Label {
    match l {
        Label::True => Label::False,
        Label::False => Label::Unknown,
        Label::Unknown => Label::True,
    }
}

pub struct MockSut {
    name: String,
    policy: LabelPolicy,
    translations: BTreeMap<String, String>,
    max_concurrency: usize,
    delay: Option<Duration>,
    gate: Gate,
}

impl MockSut {
    pub fn new(name: impl Into<String>, policy: LabelPolicy) -> Self {
        MockSut {
            name: name.into(),
            policy,
            translations: BTreeMap::new(),
            max_concurrency: 4,
            delay: None,
            gate: Gate::new(4),
        }
    }

    pub fn with_concurrency(mut self, n: usize) -> Self {
        self.max_concurrency = n.max(1);
        self.gate = Gate::new(self.max_concurrency);
        self
    }

    pub fn with_delay(mut self, delay: Duration) -> Self {
        self.delay = Some(delay);
        self
    }

    /// Scripted translations keyed by the printed transformed formula.
    pub fn with_translation(mut self, fol: impl Into<String>, nl: impl Into<String>) -> Self {
        self.translations.insert(fol.into(), nl.into());
        self
    }

    fn label_for(&self, case: &CaseMeta) -> Result<String, QueryError> {
        let gold = case.gold.unwrap_or(Label::Unknown);
        let label = match &self.policy {
            LabelPolicy::Gold => gold,
            LabelPolicy::FlipFollowUps { categories } => {
                if case.role == CaseRole::FollowUp && categories.contains(&case.mr.category()) {
                    rotate(gold)
                } else {
                    gold
                }
            }
            LabelPolicy::Fixed { raw } => return Ok(raw.clone()),
            LabelPolicy::Hashed { seed } => {
                let h = Sha256::digest(format!("{seed}\0{}\0{}", case.mg_id, case.role.as_str()));
                Label::ALL[h[0] as usize % 3]
            }
        };
        let out = if case.strategy.is_cot() {
            json!({"reasoning": "Scripted answer.", "label": label.as_str()})
        } else {
            json!({"label": label.as_str()})
        };
        Ok(out.to_string())
    }
}

impl Sut for MockSut {
    fn name(&self) -> &str {
        &self.name
    }

    fn max_concurrency(&self) -> usize {
        self.max_concurrency
    }

    fn query(&self, request: &Request) -> Result<String, QueryError> {
        let _permit = self.gate.acquire();
        if let Some(d) = self.delay {
            std::thread::sleep(d);
        }
        match &request.meta {
            RequestMeta::Case(case) => self.label_for(case),
            RequestMeta::Translation { transformed_fol } => {
                let text = match self.translations.get(transformed_fol) {
                    Some(t) => t.clone(),
                    None => {
                        let f = parse_formula(transformed_fol).map_err(|e| QueryError::Malformed(e.to_string()))?;
                        realize_auto(&f)
                    }
                };
                Ok(json!({ "translation": text }).to_string())
            }
            RequestMeta::Audit { fol, nl } => {
                let faithful = parse_formula(fol).map(|f| realize_auto(&f) == *nl).unwrap_or(false);
                Ok(json!({"label": if faithful { "True" } else { "False" }}).to_string())
            }
            RequestMeta::Other => match &self.policy {
                LabelPolicy::Fixed { raw } => Ok(raw.clone()),
                _ => Ok(json!({"label": "Unknown"}).to_string()),
            },
        }
    }
}
