//! Chat-completion adapters over blocking HTTP.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

use reqwest::blocking::Client;
use reqwest::StatusCode;
use serde_json::{json, Value};

use crate::sut::{Adapter, QueryError, Request, Sut, SutConfig};

/// Counting semaphore bounding the requests in flight.
pub struct Gate {
    free: Mutex<usize>,
    cv: Condvar,
}

pub struct Permit<'a>(&'a Gate);

impl Gate {
    pub fn new(n: usize) -> Self {
        Gate {
            free: Mutex::new(n.max(1)),
            cv: Condvar::new(),
        }
    }

    pub fn acquire(&self) -> Permit<'_> {
        let mut free = self.free.lock().unwrap();
        while *free == 0 {
            free = self.cv.wait(free).unwrap();
        }
        *free -= 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().unwrap() += 1;
        self.0.cv.notify_one();
    }
}

pub struct HttpSut {
    config: SutConfig,
    endpoint: String,
    api_key: Option<String>,
    client: Client,
    gate: Gate,
    /// Set once the endpoint has rejected an explicit temperature.
    temperature_dropped: AtomicBool,
}

enum Attempt {
    Done(String),
    Retry(String),
    Fail(QueryError),
}

impl HttpSut {
    pub fn new(config: SutConfig) -> Result<Self, QueryError> {
        let endpoint = config
            .endpoint
            .clone()
            .ok_or_else(|| QueryError::Config(format!("SUT `{}` has no endpoint", config.name)))?;
        let api_key = match &config.api_key_env {
            Some(var) => Some(std::env::var(var).map_err(|_| {
                QueryError::Auth(format!("environment variable {var} is not set (SUT `{}`)", config.name))
            })?),
            None => None,
        };
        let client = Client::builder()
            .timeout(Duration::from_secs_f64(config.timeout_secs))
            .build()
            .map_err(|e| QueryError::Config(e.to_string()))?;
        Ok(HttpSut {
            gate: Gate::new(config.max_concurrency),
            endpoint,
            api_key,
            client,
            temperature_dropped: AtomicBool::new(!config.temperature_supported),
            config,
        })
    }

    /// Whether requests are currently sent without a temperature.
    pub fn temperature_dropped(&self) -> bool {
        self.temperature_dropped.load(Ordering::Relaxed)
    }

    fn body(&self, req: &Request) -> Value {
        let p = &req.prompt;
        let mut body = match self.config.adapter {
            Adapter::Anthropic => json!({
                "model": self.config.model_id,
                "system": p.system,
                "messages": [{"role": "user", "content": p.user}],
                "max_tokens": self.config.max_tokens.unwrap_or(4096),
            }),
            _ => {
                let mut b = json!({
                    "model": self.config.model_id,
                    "messages": [
                        {"role": "system", "content": p.system},
                        {"role": "user", "content": p.user},
                    ],
                });
                if let Some(n) = self.config.max_tokens {
                    b["max_tokens"] = json!(n);
                }
                b
            }
        };
        if !self.temperature_dropped() {
            body["temperature"] = json!(self.config.temperature);
        }
        body
    }

    fn extract(&self, v: &Value) -> Option<String> {
        match self.config.adapter {
            Adapter::Anthropic => {
                let parts: Vec<&str> = v["content"]
                    .as_array()?
                    .iter()
                    .filter(|b| b["type"] == "text")
                    .filter_map(|b| b["text"].as_str())
                    .collect();
                (!parts.is_empty()).then(|| parts.concat())
            }
            _ => v["choices"][0]["message"]["content"].as_str().map(str::to_string),
        }
    }

    fn attempt(&self, req: &Request) -> Attempt {
        let mut rb = self.client.post(&self.endpoint).header("content-type", "application/json");
        if let Some(key) = &self.api_key {
            rb = match self.config.adapter {
                Adapter::Anthropic => rb.header("x-api-key", key).header("anthropic-version", "2023-06-01"),
                _ => rb.bearer_auth(key),
            };
        }
        let resp = match rb.body(self.body(req).to_string()).send() {
            Ok(r) => r,
            Err(e) => return Attempt::Retry(e.to_string()),
        };
        let status = resp.status();
        let retry_after = resp
            .headers()
            .get("retry-after")
            .and_then(|h| h.to_str().ok())
            .and_then(|s| s.trim().parse::<u64>().ok())
            .map(Duration::from_secs);
        let text = match resp.text() {
            Ok(t) => t,
            Err(e) => return Attempt::Retry(e.to_string()),
        };
        match status {
            s if s.is_success() => match serde_json::from_str::<Value>(&text).ok().and_then(|v| self.extract(&v)) {
                Some(content) => Attempt::Done(content),
                None => Attempt::Fail(QueryError::Malformed(truncate(&text))),
            },
            StatusCode::UNAUTHORIZED | StatusCode::FORBIDDEN => Attempt::Fail(QueryError::Auth(truncate(&text))),
            StatusCode::TOO_MANY_REQUESTS => Attempt::Fail(QueryError::RateLimited { retry_after }),
            StatusCode::BAD_REQUEST if text.contains("temperature") && !self.temperature_dropped() => {
                self.temperature_dropped.store(true, Ordering::Relaxed);
                eprintln!(
                    "warning: {} rejected temperature={}; continuing without it",
                    self.config.name, self.config.temperature
                );
                Attempt::Retry(format!("temperature rejected: {}", truncate(&text)))
            }
            s if s.is_server_error() || s == StatusCode::REQUEST_TIMEOUT => {
                Attempt::Retry(format!("HTTP {}: {}", s.as_u16(), truncate(&text)))
            }
            s => Attempt::Fail(QueryError::Http {
                status: s.as_u16(),
                body: truncate(&text),
            }),
        }
    }
}

fn truncate(s: &str) -> String {
    const MAX: usize = 300;
    match s.char_indices().nth(MAX) {
        Some((i, _)) => format!("{}...", &s[..i]),
        None => s.to_string(),
    }
}

impl Sut for HttpSut {
    fn name(&self) -> &str {
        &self.config.name
    }

    fn max_concurrency(&self) -> usize {
        self.config.max_concurrency.max(1)
    }

    /// Transient failures (connection errors, timeouts, 5xx) are retried up to
    /// `max_retries` times with exponential backoff.
    fn query(&self, req: &Request) -> Result<String, QueryError> {
        let _permit = self.gate.acquire();
        let start = Instant::now();
        let mut last = String::new();
        for attempt in 0..=self.config.max_retries {
            if attempt > 0 {
                std::thread::sleep(Duration::from_millis(self.config.backoff_ms << (attempt - 1)));
            }
            match self.attempt(req) {
                Attempt::Done(s) => return Ok(s),
                Attempt::Fail(e) => return Err(e),
                Attempt::Retry(msg) => last = msg,
            }
        }
        Err(QueryError::Transport {
            message: last,
            elapsed: start.elapsed(),
        })
    }
}
