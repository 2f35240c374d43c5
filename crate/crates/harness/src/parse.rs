//! Extracting labels and translations from raw model output.

use folmt_core::metrics::ParsedLabel;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParseMode {
    /// Take the first JSON object carrying the key anywhere in the text, so code
    /// fences and surrounding prose are tolerated.
    #[default]
    Lenient,
    /// The trimmed output must be exactly one JSON object.
    Strict,
}

impl std::str::FromStr for ParseMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "lenient" => Ok(ParseMode::Lenient),
            "strict" => Ok(ParseMode::Strict),
            _ => Err(format!("unknown parse mode `{s}` (expected lenient or strict)")),
        }
    }
}

/// Every JSON object that starts at a `{` in `raw`, in order of their opening brace.
fn objects(raw: &str) -> impl Iterator<Item = Map<String, Value>> + '_ {
    raw.match_indices('{').filter_map(move |(i, _)| {
        let mut stream = serde_json::Deserializer::from_str(&raw[i..]).into_iter::<Value>();
        match stream.next() {
            Some(Ok(Value::Object(m))) => Some(m),
            _ => None,
        }
    })
}

fn object_with(raw: &str, key: &str, mode: ParseMode) -> Option<Map<String, Value>> {
    match mode {
        ParseMode::Strict => match serde_json::from_str::<Value>(raw.trim()) {
            Ok(Value::Object(m)) if m.contains_key(key) => Some(m),
            _ => None,
        },
        ParseMode::Lenient => objects(raw).find(|m| m.contains_key(key)),
    }
}

/// Maps a response to an entailment label. Total: anything unusable is
/// [`ParsedLabel::ParseError`].
pub fn parse_label(raw: &str, mode: ParseMode) -> ParsedLabel {
    let Some(obj) = object_with(raw, "label", mode) else {
        return ParsedLabel::ParseError;
    };
    match obj.get("label").and_then(Value::as_str) {
        Some("True") => ParsedLabel::True,
        Some("False") => ParsedLabel::False,
        Some("Unknown") => ParsedLabel::Unknown,
        _ => ParsedLabel::ParseError,
    }
}

/// Auditor verdicts are binary; `Unknown` is not a valid answer there.
pub fn parse_audit(raw: &str, mode: ParseMode) -> ParsedLabel {
    match parse_label(raw, mode) {
        ParsedLabel::Unknown => ParsedLabel::ParseError,
        other => other,
    }
}

pub fn parse_translation(raw: &str, mode: ParseMode) -> Option<String> {
    object_with(raw, "translation", mode)?
        .get("translation")?
        .as_str()
        .map(str::to_string)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_and_fenced() {
        assert_eq!(parse_label(r#"{"label": "Unknown"}"#, ParseMode::Strict), ParsedLabel::Unknown);
        let fenced = "```json\n{\"reasoning\": \"...\", \"label\": \"False\"}\n```";
        assert_eq!(parse_label(fenced, ParseMode::Lenient), ParsedLabel::False);
        assert_eq!(parse_label(fenced, ParseMode::Strict), ParsedLabel::ParseError);
    }

    #[test]
    fn nested_braces_in_reasoning() {
        let raw = r#"Sure. {"reasoning": "the set {a, b} is closed", "label": "True"} done"#;
        assert_eq!(parse_label(raw, ParseMode::Lenient), ParsedLabel::True);
        let inner = r#"{"meta": {"label": "False"}}"#;
        assert_eq!(parse_label(inner, ParseMode::Lenient), ParsedLabel::False);
    }

    #[test]
    fn case_sensitive_values() {
        assert_eq!(parse_label(r#"{"label": "true"}"#, ParseMode::Lenient), ParsedLabel::ParseError);
        assert_eq!(parse_label(r#"{"label": true}"#, ParseMode::Lenient), ParsedLabel::ParseError);
        // the first object carrying the key decides
        assert_eq!(
            parse_label(r#"{"label": "maybe"} {"label": "True"}"#, ParseMode::Lenient),
            ParsedLabel::ParseError
        );
    }

    #[test]
    fn audit_and_translation() {
        assert_eq!(parse_audit(r#"{"label": "Unknown"}"#, ParseMode::Lenient), ParsedLabel::ParseError);
        assert_eq!(parse_audit(r#"{"label": "True"}"#, ParseMode::Lenient), ParsedLabel::True);
        assert_eq!(
            parse_translation(r#"{"translation": "a is P."}"#, ParseMode::Strict).as_deref(),
            Some("a is P.")
        );
        assert_eq!(parse_translation("a is P.", ParseMode::Lenient), None);
    }
}
