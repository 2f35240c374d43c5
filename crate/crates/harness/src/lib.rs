//! Prompting, transport, response parsing and run logging for reasoners under test.

pub mod audit;
pub mod http;
pub mod mock;
pub mod parse;
pub mod prompt;
pub mod run;
pub mod sut;
pub mod translate;

pub use mock::{LabelPolicy, MockSut};
pub use parse::{parse_label, ParseMode};
pub use prompt::{build_prompt, Prompt, PromptStrategy};
pub use run::{collect_outcomes, load_run_log, run, RunOptions, RunRecord, RunSummary};
pub use sut::{build_sut, Adapter, CaseRole, QueryError, Request, RequestMeta, Sut, SutConfig};
