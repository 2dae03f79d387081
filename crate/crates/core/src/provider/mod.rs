//! Text-completion providers and the retry policy around them.

mod http;
mod mock;

use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use http::{HttpProvider, WireFormat, API_KEY_ENV, ENDPOINT_ENV};
pub use mock::MockProvider;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProviderError {
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("rate limited: {0}")]
    RateLimited(String),
    #[error("transport error: {0}")]
    Transport(String),
    #[error("provider returned a malformed response: {0}")]
    Malformed(String),
    #[error("provider not configured: {0}")]
    NotConfigured(String),
    #[error("gave up after {attempts} attempts: {last}")]
    Exhausted { attempts: usize, last: Box<ProviderError> },
}

impl ProviderError {
    /// Transient failures are retried; everything else surfaces immediately.
    pub fn is_transient(&self) -> bool {
        matches!(self, ProviderError::RateLimited(_) | ProviderError::Transport(_))
    }
}

/// Sampling parameters for one completion request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub model_name: String,
    pub temperature: f64,
    pub n_completions: u32,
    pub max_tokens: u32,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self { model_name: "davinci".into(), temperature: 0.95, n_completions: 3, max_tokens: 150 }
    }
}

impl ModelParams {
    pub fn validate(&self) -> crate::Result<()> {
        use crate::Error;
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(Error::schema("temperature", "must lie in [0, 2]"));
        }
        if self.n_completions == 0 {
            return Err(Error::schema("n_completions", "must be positive"));
        }
        if self.max_tokens == 0 {
            return Err(Error::schema("max_tokens", "must be positive"));
        }
        if self.model_name.trim().is_empty() {
            return Err(Error::schema("model_name", "must be non-empty"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompletionRequest<'a> {
    pub prompt: &'a str,
    pub params: &'a ModelParams,
    /// Run-level seed; providers that sample locally derive their RNG from it.
    pub seed: u64,
}

pub trait CompletionProvider: Send + Sync {
    fn name(&self) -> &str;

    /// Returns exactly `params.n_completions` raw texts.
    fn complete(&self, request: &CompletionRequest<'_>) -> Result<Vec<String>, ProviderError>;
}

/// Delays between attempts; one retry per entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RetryPolicy {
    pub backoff: Vec<Duration>,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self { backoff: [1, 2, 4].map(Duration::from_secs).to_vec() }
    }
}

impl RetryPolicy {
    pub fn none() -> Self {
        Self { backoff: Vec::new() }
    }

    /// Same number of retries with no waiting, for tests.
    pub fn immediate() -> Self {
        Self { backoff: vec![Duration::ZERO; 3] }
    }

    pub fn call<T>(&self, mut f: impl FnMut() -> Result<T, ProviderError>) -> Result<T, ProviderError> {
        let mut attempt = 0;
        loop {
            match f() {
                Ok(v) => return Ok(v),
                Err(e) if e.is_transient() => {
                    let Some(delay) = self.backoff.get(attempt) else {
                        return Err(ProviderError::Exhausted { attempts: attempt + 1, last: Box::new(e) });
                    };
                    log::warn!("transient provider failure ({e}); retrying in {delay:?}");
                    if !delay.is_zero() {
                        std::thread::sleep(*delay);
                    }
                    attempt += 1;
                }
                Err(e) => return Err(e),
            }
        }
    }
}
