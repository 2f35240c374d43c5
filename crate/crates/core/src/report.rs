//! Report emission: aligned text tables, CSV and JSON.
//!
//! All three are pure functions of the summaries, so replaying a run log gives
//! byte-identical output.

use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::metrics::{MetricsSummary, Rate, Stats};
use crate::rewrite::{Category, MrId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportFormat {
    TableText,
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "table-text" | "text" | "table" => Ok(ReportFormat::TableText),
            "csv" => Ok(ReportFormat::Csv),
            "json" | "structured" => Ok(ReportFormat::Json),
            _ => Err(format!("unknown report format `{s}` (expected table-text, csv or json)")),
        }
    }
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::TableText => "txt",
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
        }
    }
}

/// Summaries keyed by system-under-test name.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    pub suts: BTreeMap<String, MetricsSummary>,
}

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("csv row {row}: {message}")]
    Row { row: usize, message: String },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

fn cell(r: Option<Rate>) -> String {
    r.map(Rate::percent).unwrap_or_else(|| "-".into())
}

fn render_table(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(String::len).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in rows {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, s)| if c == 0 { format!("{s:<w$}", w = widths[c]) } else { format!("{s:>w$}", w = widths[c]) })
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

impl Report {
    pub fn render(&self, format: ReportFormat) -> Result<String, ReportError> {
        match format {
            ReportFormat::TableText => Ok(self.to_text()),
            ReportFormat::Csv => self.to_csv(),
            ReportFormat::Json => self.to_json(),
        }
    }

    /// Violation rate per relation (rows) and system (columns), followed by the
    /// headline metrics per system.
    pub fn to_text(&self) -> String {
        let suts: Vec<&String> = self.suts.keys().collect();
        let mut rows = vec![std::iter::once("MVR (%)".to_string()).chain(suts.iter().map(|s| s.to_string())).collect::<Vec<_>>()];
        for mr in MrId::ALL {
            let mut row = vec![mr.label()];
            row.extend(self.suts.values().map(|s| cell(s.per_mr.get(&mr).and_then(Stats::mvr))));
            rows.push(row);
        }
        for c in Category::ALL {
            let mut row = vec![c.label().to_string()];
            row.extend(self.suts.values().map(|s| cell(s.per_category.get(&c).and_then(Stats::mvr))));
            rows.push(row);
        }
        let mut row = vec!["Overall".to_string()];
        row.extend(self.suts.values().map(|s| cell(s.overall.mvr())));
        rows.push(row);

        let mut out = render_table(&rows);
        out.push('\n');
        let head = [
            "SUT", "groups", "parse_excluded", "violations", "MVR", "Acc_static", "Acc_cons", "HDR", "FUR",
        ];
        let mut rows = vec![head.map(String::from).to_vec()];
        for (name, s) in &self.suts {
            let o = &s.overall;
            rows.push(vec![
                name.clone(),
                o.n_groups.to_string(),
                o.parse_excluded.to_string(),
                o.n_violations.to_string(),
                cell(o.mvr()),
                cell(o.acc_static()),
                cell(o.acc_cons()),
                cell(o.hdr()),
                cell(o.fur()),
            ]);
        }
        out.push_str(&render_table(&rows));
        out
    }

    pub fn to_csv(&self) -> Result<String, ReportError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for (sut, s) in &self.suts {
            w.serialize(CsvRow::new(sut, "overall", "all", &s.overall))?;
            for (c, st) in &s.per_category {
                w.serialize(CsvRow::new(sut, "category", c.label(), st))?;
            }
            for (mr, st) in &s.per_mr {
                w.serialize(CsvRow::new(sut, "mr", &mr.label(), st))?;
            }
        }
        let bytes = w.into_inner().map_err(|e| ReportError::Csv(e.into_error().into()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Reads a report back from its CSV form. Only the counts are read; the rate
    /// columns are derived from them.
    pub fn from_csv(text: &str) -> Result<Report, ReportError> {
        let mut report = Report::default();
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        for (i, row) in rdr.deserialize::<CsvRow>().enumerate() {
            let row = row?;
            let bad = |message: String| ReportError::Row { row: i + 1, message };
            let summary = report.suts.entry(row.sut.clone()).or_default();
            let stats = row.stats();
            match row.scope.as_str() {
                "overall" => summary.overall = stats,
                "category" => {
                    let c = Category::ALL
                        .into_iter()
                        .find(|c| c.label() == row.key)
                        .ok_or_else(|| bad(format!("unknown category `{}`", row.key)))?;
                    summary.per_category.insert(c, stats);
                }
                "mr" => {
                    let mr = MrId::from_str(&row.key).map_err(bad)?;
                    summary.per_mr.insert(mr, stats);
                }
                other => return Err(bad(format!("unknown scope `{other}`"))),
            }
        }
        Ok(report)
    }

    pub fn to_json(&self) -> Result<String, ReportError> {
        let view: BTreeMap<&str, JsonSummary> = self
            .suts
            .iter()
            .map(|(name, s)| {
                (
                    name.as_str(),
                    JsonSummary {
                        overall: JsonStats::from(&s.overall),
                        per_category: s.per_category.iter().map(|(c, st)| (c.label().to_string(), st.into())).collect(),
                        per_mr: s.per_mr.iter().map(|(m, st)| (m.label(), st.into())).collect(),
                    },
                )
            })
            .collect();
        let mut out = serde_json::to_string_pretty(&view)?;
        out.push('\n');
        Ok(out)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    sut: String,
    scope: String,
    key: String,
    n_groups: usize,
    parse_excluded: usize,
    n_evaluable: usize,
    n_violations: usize,
    n_gold: usize,
    static_correct: usize,
    cons_correct: usize,
    hidden_defect: usize,
    wrong_violation: usize,
    consistent_wrong: usize,
    mvr: String,
    acc_static: String,
    acc_cons: String,
    hdr: String,
    fur: String,
}

fn csv_rate(r: Option<Rate>) -> String {
    r.map(Rate::percent).unwrap_or_default()
}

impl CsvRow {
    fn new(sut: &str, scope: &str, key: &str, s: &Stats) -> CsvRow {
        CsvRow {
            sut: sut.into(),
            scope: scope.into(),
            key: key.into(),
            n_groups: s.n_groups,
            parse_excluded: s.parse_excluded,
            n_evaluable: s.n_evaluable,
            n_violations: s.n_violations,
            n_gold: s.n_gold,
            static_correct: s.static_correct,
            cons_correct: s.cons_correct,
            hidden_defect: s.hidden_defect,
            wrong_violation: s.wrong_violation,
            consistent_wrong: s.consistent_wrong,
            mvr: csv_rate(s.mvr()),
            acc_static: csv_rate(s.acc_static()),
            acc_cons: csv_rate(s.acc_cons()),
            hdr: csv_rate(s.hdr()),
            fur: csv_rate(s.fur()),
        }
    }

    fn stats(&self) -> Stats {
        Stats {
            n_groups: self.n_groups,
            parse_excluded: self.parse_excluded,
            n_evaluable: self.n_evaluable,
            n_violations: self.n_violations,
            n_gold: self.n_gold,
            static_correct: self.static_correct,
            cons_correct: self.cons_correct,
            hidden_defect: self.hidden_defect,
            wrong_violation: self.wrong_violation,
            consistent_wrong: self.consistent_wrong,
        }
    }
}

#[derive(Serialize)]
struct JsonRate {
    num: usize,
    den: usize,
    percent: String,
}

#[derive(Serialize)]
struct JsonStats {
    #[serde(flatten)]
    counts: Stats,
    mvr: Option<JsonRate>,
    acc_static: Option<JsonRate>,
    acc_cons: Option<JsonRate>,
    hdr: Option<JsonRate>,
    fur: Option<JsonRate>,
}

impl From<&Stats> for JsonStats {
    fn from(s: &Stats) -> Self {
        let j = |r: Option<Rate>| {
            r.map(|r| JsonRate {
                num: r.num,
                den: r.den,
                percent: r.percent(),
            })
        };
        JsonStats {
            counts: *s,
            mvr: j(s.mvr()),
            acc_static: j(s.acc_static()),
            acc_cons: j(s.acc_cons()),
            hdr: j(s.hdr()),
            fur: j(s.fur()),
        }
    }
}

#[derive(Serialize)]
struct JsonSummary {
    overall: JsonStats,
    per_category: BTreeMap<String, JsonStats>,
    per_mr: BTreeMap<String, JsonStats>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Label;
    use crate::metrics::{summarize, GroupOutcome, ParsedLabel};

    fn report() -> Report {
        let os = vec![
            GroupOutcome::new("a", MrId::C1, Some(Label::True), ParsedLabel::True, ParsedLabel::False),
            GroupOutcome::new("b", MrId::E1_1, Some(Label::False), ParsedLabel::False, ParsedLabel::False),
            GroupOutcome::new("c", MrId::E1_1, None, ParsedLabel::ParseError, ParsedLabel::False),
        ];
        let mut r = Report::default();
        r.suts.insert("mock".into(), summarize(&os).unwrap());
        r
    }

    #[test]
    fn empty_cells_are_dashes() {
        let text = report().to_text();
        let line = text.lines().find(|l| l.starts_with("MR-E2.3")).unwrap();
        assert!(line.trim_end().ends_with('-'), "{line}");
        let line = text.lines().find(|l| l.starts_with("MR-C1 ")).unwrap();
        assert!(line.ends_with("100.00"), "{line}");
    }

    #[test]
    fn csv_round_trip() {
        let r = report();
        let csv = r.to_csv().unwrap();
        assert_eq!(Report::from_csv(&csv).unwrap(), r);
        assert_eq!(r.to_csv().unwrap(), csv);
    }

    #[test]
    fn json_is_stable() {
        let r = report();
        let a = r.to_json().unwrap();
        assert_eq!(a, r.to_json().unwrap());
        let v: serde_json::Value = serde_json::from_str(&a).unwrap();
        assert_eq!(v["mock"]["overall"]["mvr"]["percent"], "50.00");
        assert_eq!(v["mock"]["overall"]["parse_excluded"], 1);
    }
}
