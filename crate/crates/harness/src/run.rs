//! Executing metamorphic groups against systems under test.
//!
//! Each system gets its own pool of `max_concurrency` workers. Records go through
//! one writer thread that appends a line per answer, so an interrupted run can be
//! resumed by skipping what is already in the log.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::sync::{Arc, Mutex};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use folmt_core::metrics::{GroupOutcome, ParsedLabel};
use folmt_core::pipeline::MetamorphicGroup;
use serde::{Deserialize, Serialize};

use crate::parse::{parse_label, ParseMode};
use crate::prompt::{build_prompt, PromptStrategy};
use crate::sut::{CaseMeta, CaseRole, QueryError, Request, RequestMeta, Sut};

/// One answer, one line of the run log.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunRecord {
    pub mg_id: String,
    pub case_role: CaseRole,
    pub sut: String,
    pub strategy: PromptStrategy,
    pub raw_output: String,
    pub parsed_label: ParsedLabel,
    pub latency_ms: u64,
    /// Milliseconds since the Unix epoch.
    pub timestamp_ms: u64,
}

type Key = (String, CaseRole, String, PromptStrategy);

fn key(r: &RunRecord) -> Key {
    (r.mg_id.clone(), r.case_role, r.sut.clone(), r.strategy)
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub strategy: PromptStrategy,
    pub parse_mode: ParseMode,
    pub log_path: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Failure {
    pub mg_id: String,
    pub role: CaseRole,
    pub sut: String,
    pub error: QueryError,
}

#[derive(Clone, Debug, Default)]
pub struct RunSummary {
    pub issued: usize,
    pub skipped_existing: usize,
    pub parse_errors: usize,
    pub failures: Vec<Failure>,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Clone, Debug, Default)]
pub struct RunLog {
    pub records: Vec<RunRecord>,
    /// Lines that were not valid records, e.g. a line cut short by a crash.
    pub malformed_lines: Vec<usize>,
}

pub fn load_run_log(path: &Path) -> Result<RunLog, RunError> {
    let io = |source| RunError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut log = RunLog::default();
    let file = match std::fs::File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(log),
        Err(e) => return Err(io(e)),
    };
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io)?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<RunRecord>(&line) {
            Ok(r) => log.records.push(r),
            Err(_) => log.malformed_lines.push(i + 1),
        }
    }
    Ok(log)
}

fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0)
}

struct Job<'a> {
    group: &'a MetamorphicGroup,
    role: CaseRole,
}

/// Queries every (group, role) pair missing from the log for every system.
pub fn run(groups: &[MetamorphicGroup], suts: &[Arc<dyn Sut>], opts: &RunOptions) -> Result<RunSummary, RunError> {
    let io = |source| RunError::Io {
        path: opts.log_path.display().to_string(),
        source,
    };
    let existing = load_run_log(&opts.log_path)?;
    let done: HashSet<Key> = existing.records.iter().map(key).collect();
    if let Some(dir) = opts.log_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io)?;
    }
    let mut file = OpenOptions::new().create(true).append(true).open(&opts.log_path).map_err(io)?;

    let mut summary = RunSummary::default();
    let mut queues = Vec::new();
    for sut in suts {
        let mut q = VecDeque::new();
        for g in groups {
            for role in [CaseRole::Source, CaseRole::FollowUp] {
                let k = (g.id.clone(), role, sut.name().to_string(), opts.strategy);
                if done.contains(&k) {
                    summary.skipped_existing += 1;
                } else {
                    q.push_back(Job { group: g, role });
                }
            }
        }
        queues.push(Mutex::new(q));
    }

    let failures = Mutex::new(Vec::new());
    let (tx, rx) = mpsc::channel::<RunRecord>();
    let written = std::thread::scope(|scope| {
        let writer = scope.spawn(move || -> std::io::Result<(usize, usize)> {
            let (mut n, mut parse_errors) = (0, 0);
            for rec in rx {
                let line = serde_json::to_string(&rec).expect("records serialize");
                writeln!(file, "{line}")?;
                file.flush()?;
                n += 1;
                parse_errors += (rec.parsed_label == ParsedLabel::ParseError) as usize;
            }
            Ok((n, parse_errors))
        });
        for (sut, queue) in suts.iter().zip(&queues) {
            for _ in 0..sut.max_concurrency().max(1) {
                let tx = tx.clone();
                let failures = &failures;
                scope.spawn(move || loop {
                    let Some(job) = queue.lock().unwrap().pop_front() else { break };
                    let case = match job.role {
                        CaseRole::Source => &job.group.source,
                        CaseRole::FollowUp => &job.group.follow_up,
                    };
                    let request = Request {
                        prompt: build_prompt(case, opts.strategy),
                        meta: RequestMeta::Case(CaseMeta {
                            mg_id: job.group.id.clone(),
                            role: job.role,
                            mr: job.group.mr,
                            gold: job.group.source.gold_label,
                            strategy: opts.strategy,
                        }),
                    };
                    let start = Instant::now();
                    match sut.query(&request) {
                        Ok(raw) => {
                            let rec = RunRecord {
                                mg_id: job.group.id.clone(),
                                case_role: job.role,
                                sut: sut.name().to_string(),
                                strategy: opts.strategy,
                                parsed_label: parse_label(&raw, opts.parse_mode),
                                raw_output: raw,
                                latency_ms: start.elapsed().as_millis() as u64,
                                timestamp_ms: now_ms(),
                            };
                            if tx.send(rec).is_err() {
                                break;
                            }
                        }
                        Err(error) => failures.lock().unwrap().push(Failure {
                            mg_id: job.group.id.clone(),
                            role: job.role,
                            sut: sut.name().to_string(),
                            error,
                        }),
                    }
                });
            }
        }
        drop(tx);
        writer.join().expect("writer thread")
    });
    let (issued, parse_errors) = written.map_err(io)?;
    summary.issued = issued;
    summary.parse_errors = parse_errors;
    summary.failures = failures.into_inner().unwrap();
    summary.failures.sort_by(|a, b| (&a.sut, &a.mg_id, a.role).cmp(&(&b.sut, &b.mg_id, b.role)));
    Ok(summary)
}

/// Column name for a (system, strategy) pair in reports.
pub fn series_name(sut: &str, strategy: PromptStrategy) -> String {
    format!("{sut}/{strategy}")
}

#[derive(Clone, Debug, Default)]
pub struct Outcomes {
    pub series: BTreeMap<String, Vec<GroupOutcome>>,
    /// Groups with only one of the two answers logged.
    pub incomplete: usize,
    /// Log records naming a group absent from the group file.
    pub unknown_groups: usize,
}

/// Joins a run log with its groups. Later records win over earlier ones for the
/// same key, and outcomes come out sorted by group id.
pub fn collect_outcomes(groups: &[MetamorphicGroup], records: &[RunRecord]) -> Outcomes {
    let by_id: HashMap<&str, &MetamorphicGroup> = groups.iter().map(|g| (g.id.as_str(), g)).collect();
    let mut latest: BTreeMap<(String, PromptStrategy, String), [Option<ParsedLabel>; 2]> = BTreeMap::new();
    let mut out = Outcomes::default();
    for r in records {
        if !by_id.contains_key(r.mg_id.as_str()) {
            out.unknown_groups += 1;
            continue;
        }
        let slot = latest.entry((r.sut.clone(), r.strategy, r.mg_id.clone())).or_default();
        slot[(r.case_role == CaseRole::FollowUp) as usize] = Some(r.parsed_label);
    }
    for ((sut, strategy, mg_id), answers) in latest {
        let [Some(s), Some(f)] = answers else {
            out.incomplete += 1;
            continue;
        };
        let g = by_id[mg_id.as_str()];
        out.series
            .entry(series_name(&sut, strategy))
            .or_default()
            .push(GroupOutcome::new(mg_id, g.mr, g.source.gold_label, s, f));
    }
    out
}
