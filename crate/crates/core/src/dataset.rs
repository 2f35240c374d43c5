//! Source test cases `⟨Γ, q, y⟩` and the line-delimited record format.

use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::formula::Formula;
use crate::parse::{parse_formula, SyntaxError};
use crate::print::print_formula;

/// Three-valued entailment label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    True,
    False,
    Unknown,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::True, Label::False, Label::Unknown];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::True => "True",
            Label::False => "False",
            Label::Unknown => "Unknown",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "True" => Ok(Label::True),
            "False" => Ok(Label::False),
            "Unknown" => Ok(Label::Unknown),
            other => Err(format!("unknown label `{other}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Origin {
    #[serde(rename = "FOLIO")]
    Folio,
    LogicNLI,
    ProverQA,
    #[default]
    Other,
}

impl FromStr for Origin {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "folio" => Ok(Origin::Folio),
            "logicnli" => Ok(Origin::LogicNLI),
            "proverqa" => Ok(Origin::ProverQA),
            "other" => Ok(Origin::Other),
            _ => Err(format!("unknown origin `{s}`")),
        }
    }
}

impl Serialize for Formula {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&print_formula(self))
    }
}

impl<'de> Deserialize<'de> for Formula {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        parse_formula(&text).map_err(serde::de::Error::custom)
    }
}

/// A test case with its natural-language and logical renderings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceRecord {
    pub id: String,
    pub premises_nl: Vec<String>,
    pub premises_fol: Vec<Formula>,
    pub conclusion_nl: String,
    pub conclusion_fol: Formula,
    #[serde(rename = "label", default)]
    pub gold_label: Option<Label>,
    #[serde(default)]
    pub origin: Origin,
}

/// The raw on-disk shape, before formula parsing.
#[derive(Deserialize)]
struct RawRecord {
    id: String,
    premises_nl: Vec<String>,
    premises_fol: Vec<String>,
    conclusion_nl: String,
    conclusion_fol: String,
    #[serde(default)]
    label: Option<Label>,
    #[serde(default)]
    origin: Option<Origin>,
}

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SkipReason {
    Malformed(String),
    Syntax { field: String, error: SyntaxError },
    LengthMismatch { nl: usize, fol: usize },
}

impl fmt::Display for SkipReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SkipReason::Malformed(m) => write!(f, "malformed record: {m}"),
            SkipReason::Syntax { field, error } => write!(f, "{field}: {error}"),
            SkipReason::LengthMismatch { nl, fol } => {
                write!(f, "{nl} natural-language premises but {fol} formulas")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Skipped {
    /// 1-based line number.
    pub line: usize,
    pub id: Option<String>,
    pub reason: SkipReason,
}

#[derive(Debug, Clone, Default)]
pub struct LoadReport {
    pub records: Vec<SourceRecord>,
    pub skipped: Vec<Skipped>,
}

fn convert(raw: RawRecord, origin: Option<Origin>) -> Result<SourceRecord, SkipReason> {
    if raw.premises_nl.len() != raw.premises_fol.len() {
        return Err(SkipReason::LengthMismatch {
            nl: raw.premises_nl.len(),
            fol: raw.premises_fol.len(),
        });
    }
    let premises_fol = raw
        .premises_fol
        .iter()
        .enumerate()
        .map(|(i, s)| {
            parse_formula(s).map_err(|error| SkipReason::Syntax {
                field: format!("premises_fol[{i}]"),
                error,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let conclusion_fol = parse_formula(&raw.conclusion_fol).map_err(|error| SkipReason::Syntax {
        field: "conclusion_fol".into(),
        error,
    })?;
    Ok(SourceRecord {
        id: raw.id,
        premises_nl: raw.premises_nl,
        premises_fol,
        conclusion_nl: raw.conclusion_nl,
        conclusion_fol,
        gold_label: raw.label,
        origin: origin.or(raw.origin).unwrap_or_default(),
    })
}

/// Parses line-delimited records from a string. Blank lines are ignored; bad
/// records are reported, never fatal. `origin`, when given, overrides the
/// per-record field.
pub fn parse_dataset(text: &str, origin: Option<Origin>) -> LoadReport {
    let mut report = LoadReport::default();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawRecord = match serde_json::from_str(line) {
            Ok(r) => r,
            Err(e) => {
                let id = serde_json::from_str::<serde_json::Value>(line)
                    .ok()
                    .and_then(|v| v.get("id")?.as_str().map(String::from));
                report.skipped.push(Skipped {
                    line: idx + 1,
                    id,
                    reason: SkipReason::Malformed(e.to_string()),
                });
                continue;
            }
        };
        let id = raw.id.clone();
        match convert(raw, origin) {
            Ok(r) => report.records.push(r),
            Err(reason) => report.skipped.push(Skipped {
                line: idx + 1,
                id: Some(id),
                reason,
            }),
        }
    }
    report
}

pub fn load_dataset(path: &Path, origin: Option<Origin>) -> Result<LoadReport, DatasetError> {
    let io = |source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    };
    let file = std::fs::File::open(path).map_err(io)?;
    let mut text = String::new();
    for line in BufReader::new(file).lines() {
        text.push_str(&line.map_err(io)?);
        text.push('\n');
    }
    Ok(parse_dataset(&text, origin))
}

/// The bundled 50-record corpus used by tests and the demo pipeline.
pub const DESK_CORPUS: &str = include_str!("../data/desk_corpus.jsonl");

pub fn desk_corpus() -> Vec<SourceRecord> {
    let report = parse_dataset(DESK_CORPUS, None);
    debug_assert!(report.skipped.is_empty(), "{:?}", report.skipped);
    report.records
}

/// Writes any serializable items as one compact JSON object per line.
pub fn write_jsonl<T: Serialize>(out: &mut impl Write, items: &[T]) -> std::io::Result<()> {
    for item in items {
        serde_json::to_writer(&mut *out, item)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const LAWTON: &str = r#"{"id":"lawton","premises_nl":["Lawton Park is a neighborhood in Seattle.","All citizens of Lawton Park use the zip code 98199.","Tom is a citizen of Lawton Park.","Daniel uses the zip code 98199."],"premises_fol":["NeighbourhoodIn(lawtonPark, seattle)","forall x. (ResidentOf(x, lawtonPark) -> UseZipCode(x, num98199))","ResidentOf(tom, lawtonPark)","UseZipCode(daniel, num98199)"],"conclusion_nl":"Tom is a citizen of Washington.","conclusion_fol":"ResidentOf(tom, washington)","label":"Unknown","origin":"FOLIO"}"#;

    #[test]
    fn valid_records_load() {
        let text = [LAWTON, LAWTON, LAWTON].join("\n");
        let r = parse_dataset(&text, None);
        assert_eq!(r.records.len(), 3);
        assert!(r.skipped.is_empty());
        assert_eq!(r.records[0].gold_label, Some(Label::Unknown));
        assert_eq!(r.records[0].origin, Origin::Folio);
    }

    #[test]
    fn malformed_formula_is_skipped() {
        let bad = LAWTON.replace("ResidentOf(tom, washington)", "ResidentOf(tom,");
        let text = [LAWTON, &bad, LAWTON].join("\n");
        let r = parse_dataset(&text, Some(Origin::Other));
        assert_eq!(r.records.len(), 2);
        assert_eq!(r.skipped.len(), 1);
        assert_eq!(r.skipped[0].line, 2);
        assert!(matches!(r.skipped[0].reason, SkipReason::Syntax { .. }));
        assert_eq!(r.records[0].origin, Origin::Other);
    }

    #[test]
    fn serialization_round_trips() {
        let r = parse_dataset(LAWTON, None).records.remove(0);
        let mut buf = Vec::new();
        write_jsonl(&mut buf, std::slice::from_ref(&r)).unwrap();
        let back = parse_dataset(std::str::from_utf8(&buf).unwrap(), None);
        assert_eq!(back.records, vec![r]);
    }

    #[test]
    fn length_mismatch_and_garbage() {
        let mismatched = LAWTON.replace(r#""Tom is a citizen of Lawton Park.","#, "");
        let r = parse_dataset(&format!("{mismatched}\nnot json\n"), None);
        assert_eq!(r.skipped.len(), 2);
        assert!(matches!(r.skipped[0].reason, SkipReason::LengthMismatch { nl: 3, fol: 4 }));
        assert!(matches!(r.skipped[1].reason, SkipReason::Malformed(_)));
    }
}
