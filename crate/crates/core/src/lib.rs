//! Core of the first-order-logic metamorphic testing toolkit.
//!
//! The crate is organised bottom-up:
//!
//! * [`formula`], [`order`], [`measure`]: the abstract syntax, canonical ordering and
//!   the lexicographic termination measure.
//! * [`parse`], [`print`], [`dataset`]: concrete text syntax and record ingestion.
//! * [`rewrite`]: the twenty metamorphic relations as rewrite rules plus the staged
//!   normalization procedure.
//! * [`oracle`]: a bounded finite-model, three-valued entailment checker.
//! * [`realize`]: deterministic logic-to-English realization.
//! * [`pipeline`]: metamorphic group construction and stratified sampling.
//! * [`metrics`], [`report`]: consistency metrics and report emission.

pub mod dataset;
pub mod formula;
pub mod gen;
pub mod measure;
pub mod metrics;
pub mod oracle;
pub mod order;
pub mod parse;
pub mod pipeline;
pub mod print;
pub mod realize;
pub mod report;
pub mod rewrite;

pub use dataset::{Label, Origin, SourceRecord};
pub use formula::{Conn, Formula, Quant, Term};
pub use measure::{measure, Measure};
pub use parse::{parse_formula, SyntaxError};
pub use print::print_formula;
pub use rewrite::MrId;
