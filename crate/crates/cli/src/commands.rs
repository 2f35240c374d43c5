use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use folmt_core::dataset::{desk_corpus, load_dataset, write_jsonl, SourceRecord};
use folmt_core::metrics::{summarize_with, ParsePolicy};
use folmt_core::oracle::{entails_with, OracleOptions, Verdict};
use folmt_core::pipeline::{
    apply_mr_with, generate_pool_with, sample_pool, Deterministic, Edit, MetamorphicGroup, PipelineOptions, Realizer,
    SamplePlan,
};
use folmt_core::report::{Report, ReportFormat};
use folmt_core::rewrite::{normalize_np_with, NpOptions};
use folmt_core::{measure, parse_formula, print_formula, Formula, MrId, Term};
use folmt_harness::audit::audit_violations;
use folmt_harness::run::{collect_outcomes, load_run_log, run, RunOptions};
use folmt_harness::sut::{build_sut, Sut};
use folmt_harness::translate::LlmRealizer;
use folmt_harness::prompt::PromptStrategy;
use serde_json::{json, Value};

use crate::config::CliConfig;
use crate::{CliError, Command, DatasetArg, OutFormat, ReportFmt};

pub fn dispatch(command: Command, cfg: &CliConfig) -> Result<u8, CliError> {
    match command {
        Command::Parse { formula, format } => parse_cmd(&formula, format),
        Command::Normalize { formula, seed, format } => normalize_cmd(&formula, seed, format),
        Command::Transform {
            mr,
            record,
            dataset,
            seed,
            translator,
            format,
        } => transform_cmd(cfg, mr, record.as_deref(), &dataset, seed, translator.as_deref(), format),
        Command::Check {
            record,
            dataset,
            premise,
            conclusion,
            max_domain,
            format,
        } => check_cmd(cfg, record.as_deref(), &dataset, &premise, conclusion.as_deref(), max_domain, format),
        Command::Generate {
            dataset,
            seed,
            mr,
            out,
            translator,
            e_rules_on_conclusion,
            max_domain,
        } => {
            let seed = cfg.require_seed(seed)?;
            let out = out.or(cfg.paths.pool.clone()).unwrap_or_else(|| "pool.jsonl".into());
            let mut opts = PipelineOptions {
                e_rules_on_conclusion,
                ..Default::default()
            };
            if let Some(d) = max_domain.or(cfg.max_domain) {
                opts.oracle.max_domain = d;
            }
            generate_cmd(cfg, &dataset, seed, &mr, &out, translator.as_deref(), &opts)
        }
        Command::Sample {
            pool,
            seed,
            cap,
            minimum,
            out,
        } => {
            let seed = cfg.require_seed(seed)?;
            let pool = pool.or(cfg.paths.pool.clone()).unwrap_or_else(|| "pool.jsonl".into());
            let out = out.or(cfg.paths.sample.clone()).unwrap_or_else(|| "sample.jsonl".into());
            let plan = SamplePlan {
                per_subrule_cap: cap,
                rng_seed: seed,
                category_minimum: minimum,
            };
            sample_cmd(&pool, &plan, &out)
        }
        Command::Run {
            groups,
            sut,
            strategy,
            log,
            parse_mode,
        } => {
            let names = if sut.is_empty() {
                cfg.suts.iter().map(|s| s.name.clone()).collect()
            } else {
                sut
            };
            if names.is_empty() {
                return Err(CliError::usage("no systems to query: pass --sut or add [[suts]] to the config"));
            }
            let opts = RunOptions {
                strategy: strategy.or(cfg.strategy).unwrap_or(PromptStrategy::ZeroShot),
                parse_mode: parse_mode.or(cfg.parse_mode).unwrap_or_default(),
                log_path: log_path(cfg, log),
            };
            run_cmd(cfg, &groups_path(cfg, groups), &names, &opts)
        }
        Command::Audit {
            groups,
            log,
            auditor,
            sample,
            seed,
            out,
            parse_mode,
        } => {
            let auditor = auditor.or(cfg.auditor.clone()).unwrap_or_else(|| "mock-auditor".into());
            audit_cmd(
                cfg,
                &groups_path(cfg, groups),
                &log_path(cfg, log),
                &auditor,
                sample,
                seed.or(cfg.seed).unwrap_or(0),
                out.as_deref(),
                parse_mode.or(cfg.parse_mode).unwrap_or_default(),
            )
        }
        Command::Report {
            groups,
            log,
            format,
            out,
            parse_errors_as_wrong,
        } => {
            let format = match format {
                ReportFmt::Text => ReportFormat::TableText,
                ReportFmt::Csv => ReportFormat::Csv,
                ReportFmt::Json => ReportFormat::Json,
            };
            let out = out.or_else(|| cfg.paths.report_dir.as_ref().map(|d| d.join(format!("report.{}", format.extension()))));
            let policy = if parse_errors_as_wrong {
                ParsePolicy::CountAsWrong
            } else {
                ParsePolicy::Exclude
            };
            report_cmd(&groups_path(cfg, groups), &log_path(cfg, log), format, out.as_deref(), policy)
        }
    }
}

fn groups_path(cfg: &CliConfig, flag: Option<PathBuf>) -> PathBuf {
    flag.or(cfg.paths.sample.clone()).unwrap_or_else(|| "sample.jsonl".into())
}

fn log_path(cfg: &CliConfig, flag: Option<PathBuf>) -> PathBuf {
    flag.or(cfg.paths.run_log.clone()).unwrap_or_else(|| "run_log.jsonl".into())
}

fn input_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::usage(format!("{}: {e}", path.display()))
}

fn formula_arg(text: &str) -> Result<Formula, CliError> {
    parse_formula(text).map_err(|e| CliError::usage(format!("`{text}`: {e}")))
}

fn print_json(v: &Value) {
    outln!("{}", serde_json::to_string_pretty(v).expect("values serialize"));
}

fn load_records(cfg: &CliConfig, arg: &DatasetArg) -> Result<Vec<SourceRecord>, CliError> {
    let Some(path) = arg.dataset.clone().or(cfg.paths.dataset.clone()) else {
        return Ok(desk_corpus());
    };
    let report = load_dataset(&path, None).map_err(|e| input_error(&path, e))?;
    for s in &report.skipped {
        eprintln!(
            "warning: {}:{}: skipped {}: {}",
            path.display(),
            s.line,
            s.id.as_deref().unwrap_or("record"),
            s.reason
        );
    }
    Ok(report.records)
}

fn find_record<'a>(records: &'a [SourceRecord], id: Option<&str>) -> Result<&'a SourceRecord, CliError> {
    match id {
        None => records.first().ok_or_else(|| CliError::usage("the dataset is empty")),
        Some(id) => records
            .iter()
            .find(|r| r.id == id)
            .ok_or_else(|| CliError::usage(format!("no record with id `{id}`"))),
    }
}

fn read_groups(path: &Path) -> Result<Vec<MetamorphicGroup>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| input_error(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| CliError::usage(format!("{}:{}: {e}", path.display(), i + 1))))
        .collect()
}

fn write_groups(path: &Path, groups: &[MetamorphicGroup]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| input_error(dir, e))?;
    }
    let mut buf = Vec::new();
    write_jsonl(&mut buf, groups).map_err(|e| input_error(path, e))?;
    std::fs::write(path, buf).map_err(|e| input_error(path, e))
}

fn term_text(t: &Term) -> String {
    t.name().to_string()
}

fn tree_json(f: &Formula) -> Value {
    match f {
        Formula::Atom { pred, args } => json!({"atom": pred, "args": args.iter().map(term_text).collect::<Vec<_>>()}),
        Formula::Bool(b) => json!({ "bool": b }),
        Formula::Not(x) => json!({ "not": tree_json(x) }),
        Formula::And(xs) => json!({ "and": xs.iter().map(tree_json).collect::<Vec<_>>() }),
        Formula::Or(xs) => json!({ "or": xs.iter().map(tree_json).collect::<Vec<_>>() }),
        Formula::Implies(a, b) => json!({ "implies": [tree_json(a), tree_json(b)] }),
        Formula::Iff(a, b) => json!({ "iff": [tree_json(a), tree_json(b)] }),
        Formula::Forall(v, x) => json!({ "forall": v, "body": tree_json(x) }),
        Formula::Exists(v, x) => json!({ "exists": v, "body": tree_json(x) }),
    }
}

fn tree_text(f: &Formula, depth: usize, out: &mut String) {
    let label = match f {
        Formula::Atom { .. } | Formula::Bool(_) => print_formula(f),
        Formula::Not(_) => "not".into(),
        Formula::And(_) => "and".into(),
        Formula::Or(_) => "or".into(),
        Formula::Implies(..) => "implies".into(),
        Formula::Iff(..) => "iff".into(),
        Formula::Forall(v, _) => format!("forall {v}"),
        Formula::Exists(v, _) => format!("exists {v}"),
    };
    out.push_str(&"  ".repeat(depth));
    out.push_str(&label);
    out.push('\n');
    for c in f.children() {
        tree_text(c, depth + 1, out);
    }
}

fn parse_cmd(text: &str, format: OutFormat) -> Result<u8, CliError> {
    let f = formula_arg(text)?;
    match format {
        OutFormat::Text => {
            let mut tree = String::new();
            tree_text(&f, 0, &mut tree);
            outln!("{}", print_formula(&f));
            out!("{tree}");
        }
        OutFormat::Json => print_json(&json!({"formula": print_formula(&f), "ast": tree_json(&f)})),
    }
    Ok(0)
}

fn normalize_cmd(text: &str, seed: Option<u64>, format: OutFormat) -> Result<u8, CliError> {
    let f = formula_arg(text)?;
    let opts = NpOptions {
        seed,
        ..Default::default()
    };
    let n = normalize_np_with(&f, &opts).map_err(|e| CliError::usage(e.to_string()))?;
    match format {
        OutFormat::Text => {
            outln!("{}", print_formula(&n.formula));
            let noun = if n.trace.len() == 1 { "step" } else { "steps" };
            outln!("trace: {} {noun}", n.trace.len());
            for (i, s) in n.trace.iter().enumerate() {
                outln!("{}\t{}", i + 1, s.trace_line());
            }
        }
        OutFormat::Json => {
            let trace: Vec<Value> = n
                .trace
                .iter()
                .map(|s| {
                    json!({
                        "mr": s.redex.mr.code(),
                        "path": s.redex.path_text(),
                        "before": print_formula(&s.before),
                        "after": print_formula(&s.after),
                        "measure_before": s.measure_before.to_string(),
                        "measure_after": s.measure_after.to_string(),
                    })
                })
                .collect();
            print_json(&json!({
                "input": print_formula(&f),
                "normal_form": print_formula(&n.formula),
                "measure": measure(&n.formula).to_string(),
                "trace": trace,
            }));
        }
    }
    Ok(0)
}

fn realizer_for(cfg: &CliConfig, translator: Option<&str>) -> Result<Box<dyn Realizer + Sync>, CliError> {
    match translator.map(str::to_string).or(cfg.translator.clone()) {
        None => Ok(Box::new(Deterministic)),
        Some(name) => {
            let sut = build_sut(&cfg.sut(&name)?).map_err(|e| CliError::usage(e.to_string()))?;
            Ok(Box::new(LlmRealizer::new(sut)))
        }
    }
}

fn case_text(r: &SourceRecord) -> String {
    let mut s = String::from("Premises:\n");
    for (i, (nl, fol)) in r.premises_nl.iter().zip(&r.premises_fol).enumerate() {
        s.push_str(&format!("  {}. {nl}\n     {}\n", i + 1, print_formula(fol)));
    }
    s.push_str(&format!("Conclusion:\n  {}\n  {}\n", r.conclusion_nl, print_formula(&r.conclusion_fol)));
    if let Some(l) = r.gold_label {
        s.push_str(&format!("Label: {l}\n"));
    }
    s
}

fn edit_text(e: &Edit) -> String {
    match e {
        Edit::Rewrite { target, step } => format!("{:?}: {}", target, step.trace_line().replace('\t', "  ")),
        Edit::Case { description } => description.clone(),
    }
}

fn transform_cmd(
    cfg: &CliConfig,
    mr: MrId,
    record: Option<&str>,
    dataset: &DatasetArg,
    seed: u64,
    translator: Option<&str>,
    format: OutFormat,
) -> Result<u8, CliError> {
    let records = load_records(cfg, dataset)?;
    let r = find_record(&records, record)?;
    let realizer = realizer_for(cfg, translator)?;
    let g = apply_mr_with(r, mr, seed, &PipelineOptions::default(), realizer.as_ref()).map_err(|e| CliError::usage(e.to_string()))?;
    match format {
        OutFormat::Text => {
            outln!("{} {mr}", g.id);
            outln!("Edit: {}", edit_text(&g.edit));
            out!("{}", case_text(&g.follow_up));
        }
        OutFormat::Json => print_json(&serde_json::to_value(&g).expect("groups serialize")),
    }
    Ok(0)
}

fn verdict_json(v: &Verdict) -> Value {
    json!({
        "label": v.label.as_str(),
        "completeness": v.completeness,
        "premises_satisfiable": v.premises_satisfiable,
        "countermodel": v.countermodel.as_ref().map(|m| m.to_string()),
        "witness": v.witness.as_ref().map(|m| m.to_string()),
    })
}

fn check_cmd(
    cfg: &CliConfig,
    record: Option<&str>,
    dataset: &DatasetArg,
    premises: &[String],
    conclusion: Option<&str>,
    max_domain: Option<usize>,
    format: OutFormat,
) -> Result<u8, CliError> {
    let (gamma, q, gold) = match conclusion {
        Some(c) => (
            premises.iter().map(|p| formula_arg(p)).collect::<Result<Vec<_>, _>>()?,
            formula_arg(c)?,
            None,
        ),
        None => {
            let records = load_records(cfg, dataset)?;
            let r = find_record(&records, record)?;
            (r.premises_fol.clone(), r.conclusion_fol.clone(), r.gold_label)
        }
    };
    let mut opts = OracleOptions::default();
    if let Some(d) = max_domain.or(cfg.max_domain) {
        opts.max_domain = d;
    }
    let v = entails_with(&gamma, &q, &opts).map_err(|e| CliError::usage(e.to_string()))?;
    match format {
        OutFormat::Text => {
            let kind = format!("{:?}", v.completeness).to_lowercase();
            outln!("{} ({kind})", v.label);
            if let Some(m) = &v.countermodel {
                outln!("countermodel: {m}");
            }
            if let Some(m) = &v.witness {
                outln!("witness: {m}");
            }
            if let Some(g) = gold {
                outln!("gold: {g}");
            }
        }
        OutFormat::Json => {
            let mut out = verdict_json(&v);
            out["gold"] = json!(gold.map(|g| g.as_str()));
            print_json(&out);
        }
    }
    Ok(0)
}

fn generate_cmd(
    cfg: &CliConfig,
    dataset: &DatasetArg,
    seed: u64,
    mrs: &[MrId],
    out: &Path,
    translator: Option<&str>,
    opts: &PipelineOptions,
) -> Result<u8, CliError> {
    let records = load_records(cfg, dataset)?;
    let mrs = if mrs.is_empty() { MrId::ALL.to_vec() } else { mrs.to_vec() };
    let realizer = realizer_for(cfg, translator)?;
    let pool = generate_pool_with(&records, &mrs, seed, opts, realizer.as_ref());
    for (id, mr, e) in &pool.errors {
        eprintln!("warning: {id} {mr}: {e}");
    }
    write_groups(out, &pool.groups)?;
    outln!("relation\tapplicable\tnot_applicable");
    for (mr, a) in &pool.applicability {
        outln!("{}\t{}\t{}", mr.label(), a.applicable, a.not_applicable);
    }
    outln!("{} groups from {} records written to {}", pool.groups.len(), records.len(), out.display());
    Ok(0)
}

fn sample_cmd(pool_path: &Path, plan: &SamplePlan, out: &Path) -> Result<u8, CliError> {
    let pool = read_groups(pool_path)?;
    let s = sample_pool(&pool, plan);
    for w in &s.warnings {
        eprintln!("warning: {w}");
    }
    write_groups(out, &s.groups)?;
    outln!("relation\tavailable\tsampled");
    for (mr, c) in &s.per_mr {
        outln!("{}\t{}\t{}", mr.label(), c.available, c.sampled);
    }
    for (cat, n) in &s.per_category {
        outln!("{cat}\t{n}");
    }
    outln!("{} groups written to {}", s.groups.len(), out.display());
    Ok(0)
}

fn run_cmd(cfg: &CliConfig, groups_path: &Path, names: &[String], opts: &RunOptions) -> Result<u8, CliError> {
    let groups = read_groups(groups_path)?;
    let suts = names
        .iter()
        .map(|n| build_sut(&cfg.sut(n)?).map_err(|e| CliError::usage(e.to_string())))
        .collect::<Result<Vec<Arc<dyn Sut>>, _>>()?;
    let summary = run(&groups, &suts, opts).map_err(|e| CliError::usage(e.to_string()))?;
    outln!(
        "issued {}, skipped {} already logged, {} parse errors, {} failures",
        summary.issued,
        summary.skipped_existing,
        summary.parse_errors,
        summary.failures.len()
    );
    for f in &summary.failures {
        eprintln!("{} {} {}: {}", f.sut, f.mg_id, f.role.as_str(), f.error);
    }
    if summary.failures.is_empty() {
        Ok(0)
    } else {
        Err(CliError::transport(format!(
            "{} queries failed; rerun to retry them",
            summary.failures.len()
        )))
    }
}

#[allow(clippy::too_many_arguments)]
fn audit_cmd(
    cfg: &CliConfig,
    groups_path: &Path,
    log: &Path,
    auditor: &str,
    sample: usize,
    seed: u64,
    out: Option<&Path>,
    mode: folmt_harness::ParseMode,
) -> Result<u8, CliError> {
    let groups = read_groups(groups_path)?;
    let records = load_run_log(log).map_err(|e| CliError::usage(e.to_string()))?.records;
    let auditor = build_sut(&cfg.sut(auditor)?).map_err(|e| CliError::usage(e.to_string()))?;
    let (findings, summary) =
        audit_violations(&groups, &records, auditor.as_ref(), sample, seed, mode).map_err(|e| CliError::transport(e.to_string()))?;
    match &summary {
        Some(s) => outln!(
            "inspected {}, drift {}, parse {}, FRR {}%",
            s.n_inspected,
            s.fp_drift,
            s.fp_parse,
            s.frr.percent()
        ),
        None => outln!("no reported violations to audit"),
    }
    if let Some(path) = out {
        let body = json!({"summary": summary, "findings": findings});
        let text = serde_json::to_string_pretty(&body).expect("findings serialize") + "\n";
        std::fs::write(path, text).map_err(|e| input_error(path, e))?;
    }
    Ok(0)
}

fn report_cmd(groups_path: &Path, log: &Path, format: ReportFormat, out: Option<&Path>, policy: ParsePolicy) -> Result<u8, CliError> {
    let groups = read_groups(groups_path)?;
    let log = load_run_log(log).map_err(|e| CliError::usage(e.to_string()))?;
    if !log.malformed_lines.is_empty() {
        eprintln!("warning: skipped malformed run-log lines {:?}", log.malformed_lines);
    }
    let outcomes = collect_outcomes(&groups, &log.records);
    if outcomes.incomplete > 0 {
        eprintln!("warning: {} groups have only one answer logged", outcomes.incomplete);
    }
    if outcomes.unknown_groups > 0 {
        eprintln!("warning: {} log records name groups not in the group file", outcomes.unknown_groups);
    }
    let mut report = Report { suts: BTreeMap::new() };
    for (series, list) in &outcomes.series {
        let s = summarize_with(list, policy).map_err(|e| CliError::usage(format!("{series}: {e}")))?;
        report.suts.insert(series.clone(), s);
    }
    if report.suts.is_empty() {
        return Err(CliError::usage(format!("{}: no complete groups to report on", groups_path.display())));
    }
    let text = report.render(format).map_err(|e| CliError::usage(e.to_string()))?;
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| input_error(dir, e))?;
            }
            std::fs::write(path, &text).map_err(|e| input_error(path, e))?;
        }
        None => {
            out!("{text}");
        }
    }
    let violations: usize = report.suts.values().map(|s| s.overall.n_violations).sum();
    if violations > 0 {
        eprintln!("{violations} metamorphic violations found");
        Ok(1)
    } else {
        Ok(0)
    }
}
