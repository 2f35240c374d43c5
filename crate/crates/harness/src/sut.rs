//! Systems under test and the auditor share one query interface.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Duration;

use folmt_core::dataset::Label;
use folmt_core::MrId;
use serde::{Deserialize, Serialize};

use crate::http::HttpSut;
use crate::mock::{LabelPolicy, MockSut};
use crate::prompt::{Prompt, PromptStrategy};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseRole {
    Source,
    FollowUp,
}

impl CaseRole {
    pub fn as_str(self) -> &'static str {
        match self {
            CaseRole::Source => "source",
            CaseRole::FollowUp => "follow_up",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CaseMeta {
    pub mg_id: String,
    pub role: CaseRole,
    pub mr: MrId,
    pub gold: Option<Label>,
    pub strategy: PromptStrategy,
}

/// What a request is for. Network adapters only look at the prompt; scripted
/// systems may answer from the metadata.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RequestMeta {
    Case(CaseMeta),
    Translation { transformed_fol: String },
    Audit { fol: String, nl: String },
    Other,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Request {
    pub prompt: Prompt,
    pub meta: RequestMeta,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QueryError {
    #[error("transport error after {elapsed:?}: {message}")]
    Transport { message: String, elapsed: Duration },
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("rate limited{}", retry_after.map(|d| format!(" (retry after {}s)", d.as_secs())).unwrap_or_default())]
    RateLimited { retry_after: Option<Duration> },
    #[error("HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error("configuration: {0}")]
    Config(String),
}

pub trait Sut: Send + Sync {
    fn name(&self) -> &str;

    /// Upper bound on requests in flight at once.
    fn max_concurrency(&self) -> usize {
        1
    }

    /// Returns the assistant text.
    fn query(&self, request: &Request) -> Result<String, QueryError>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Adapter {
    /// `POST {endpoint}` with a chat-completions body, bearer auth.
    OpenaiChat,
    /// `POST {endpoint}` with a messages body, `x-api-key` auth.
    Anthropic,
    /// In-process scripted answers.
    Mock,
}

fn default_concurrency() -> usize {
    4
}

fn default_timeout() -> f64 {
    120.0
}

fn default_retries() -> u32 {
    3
}

fn default_true() -> bool {
    true
}

fn default_backoff() -> u64 {
    500
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SutConfig {
    pub name: String,
    pub adapter: Adapter,
    #[serde(default)]
    pub endpoint: Option<String>,
    #[serde(default)]
    pub model_id: String,
    /// Name of the environment variable holding the key, never the key itself.
    #[serde(default)]
    pub api_key_env: Option<String>,
    #[serde(default)]
    pub temperature: f64,
    /// Reasoning endpoints reject a temperature; set false to omit it.
    #[serde(default = "default_true")]
    pub temperature_supported: bool,
    #[serde(default = "default_concurrency")]
    pub max_concurrency: usize,
    #[serde(default = "default_timeout")]
    pub timeout_secs: f64,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    /// Base delay of the exponential backoff between retries.
    #[serde(default = "default_backoff")]
    pub backoff_ms: u64,
    #[serde(default)]
    pub max_tokens: Option<u32>,
    /// Answer policy for the mock adapter.
    #[serde(default)]
    pub mock_policy: Option<LabelPolicy>,
    /// Scripted translations for the mock adapter, keyed by printed formula.
    #[serde(default)]
    pub mock_translations: BTreeMap<String, String>,
}

impl SutConfig {
    pub fn mock(name: impl Into<String>, policy: LabelPolicy) -> Self {
        SutConfig {
            name: name.into(),
            adapter: Adapter::Mock,
            endpoint: None,
            model_id: String::new(),
            api_key_env: None,
            temperature: 0.0,
            temperature_supported: true,
            max_concurrency: default_concurrency(),
            timeout_secs: default_timeout(),
            max_retries: default_retries(),
            backoff_ms: default_backoff(),
            max_tokens: None,
            mock_policy: Some(policy),
            mock_translations: BTreeMap::new(),
        }
    }

    pub fn http(name: impl Into<String>, adapter: Adapter, endpoint: impl Into<String>, model_id: impl Into<String>) -> Self {
        SutConfig {
            adapter,
            endpoint: Some(endpoint.into()),
            model_id: model_id.into(),
            mock_policy: None,
            ..SutConfig::mock(name, LabelPolicy::Gold)
        }
    }
}

/// Instantiates the adapter named by `config`.
pub fn build_sut(config: &SutConfig) -> Result<Arc<dyn Sut>, QueryError> {
    match config.adapter {
        Adapter::Mock => {
            let policy = config.mock_policy.clone().unwrap_or(LabelPolicy::Gold);
            let mut sut = MockSut::new(config.name.clone(), policy).with_concurrency(config.max_concurrency);
            for (fol, nl) in &config.mock_translations {
                sut = sut.with_translation(fol.clone(), nl.clone());
            }
            Ok(Arc::new(sut))
        }
        Adapter::OpenaiChat | Adapter::Anthropic => Ok(Arc::new(HttpSut::new(config.clone())?)),
    }
}
