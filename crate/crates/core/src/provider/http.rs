use std::time::Duration;

use serde_json::{json, Value};

use super::{CompletionProvider, CompletionRequest, ProviderError};

/// Environment variable holding the provider credential.
pub const API_KEY_ENV: &str = "AHA_API_KEY";
/// Environment variable holding the provider endpoint URL.
pub const ENDPOINT_ENV: &str = "AHA_PROVIDER_URL";

/// Request/response body layout of the remote endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WireFormat {
    /// `POST {prompt, n, ...}` → `{"choices": [{"text": ...}]}`
    Completions,
    /// `POST {messages: [{role: "user", content}], n, ...}` →
    /// `{"choices": [{"message": {"content": ...}}]}`
    Chat,
}

/// Provider for OpenAI-style HTTP endpoints.
pub struct HttpProvider {
    name: String,
    endpoint: String,
    api_key: String,
    format: WireFormat,
    agent: ureq::Agent,
}

impl std::fmt::Debug for HttpProvider {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HttpProvider")
            .field("name", &self.name)
            .field("endpoint", &self.endpoint)
            .field("format", &self.format)
            .finish_non_exhaustive()
    }
}

impl HttpProvider {
    pub fn new(name: impl Into<String>, endpoint: impl Into<String>, api_key: impl Into<String>, format: WireFormat) -> Self {
        let agent = ureq::AgentBuilder::new().timeout(Duration::from_secs(120)).build();
        Self { name: name.into(), endpoint: endpoint.into(), api_key: api_key.into(), format, agent }
    }

    /// Endpoint and credential from `AHA_PROVIDER_URL` / `AHA_API_KEY`.
    pub fn from_env(name: impl Into<String>, format: WireFormat, endpoint: Option<String>) -> Result<Self, ProviderError> {
        let endpoint = endpoint
            .or_else(|| std::env::var(ENDPOINT_ENV).ok())
            .ok_or_else(|| ProviderError::NotConfigured(format!("set {ENDPOINT_ENV} or pass an endpoint")))?;
        let key = std::env::var(API_KEY_ENV)
            .map_err(|_| ProviderError::NotConfigured(format!("{API_KEY_ENV} is not set")))?;
        Ok(Self::new(name, endpoint, key, format))
    }

    fn body(&self, request: &CompletionRequest<'_>) -> Value {
        let p = request.params;
        match self.format {
            WireFormat::Completions => json!({
                "model": p.model_name,
                "prompt": request.prompt,
                "temperature": p.temperature,
                "max_tokens": p.max_tokens,
                "n": p.n_completions,
            }),
            WireFormat::Chat => json!({
                "model": p.model_name,
                "messages": [{"role": "user", "content": request.prompt}],
                "temperature": p.temperature,
                "max_tokens": p.max_tokens,
                "n": p.n_completions,
            }),
        }
    }

    fn parse(&self, body: &Value, expected: u32) -> Result<Vec<String>, ProviderError> {
        let choices = body
            .get("choices")
            .and_then(Value::as_array)
            .ok_or_else(|| ProviderError::Malformed("missing `choices` array".into()))?;
        let texts = choices
            .iter()
            .map(|c| {
                let text = match self.format {
                    WireFormat::Completions => c.get("text"),
                    WireFormat::Chat => c.get("message").and_then(|m| m.get("content")),
                };
                text.and_then(Value::as_str)
                    .map(str::to_string)
                    .ok_or_else(|| ProviderError::Malformed("choice without text".into()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if texts.len() != expected as usize {
            return Err(ProviderError::Malformed(format!("expected {expected} choices, got {}", texts.len())));
        }
        Ok(texts)
    }
}

impl CompletionProvider for HttpProvider {
    fn name(&self) -> &str {
        &self.name
    }

    fn complete(&self, request: &CompletionRequest<'_>) -> Result<Vec<String>, ProviderError> {
        let response = self
            .agent
            .post(&self.endpoint)
            .set("Authorization", &format!("Bearer {}", self.api_key))
            .send_json(self.body(request));
        match response {
            Ok(r) => {
                let body: Value = r.into_json().map_err(|e| ProviderError::Malformed(e.to_string()))?;
                self.parse(&body, request.params.n_completions)
            }
            Err(ureq::Error::Status(code, r)) => {
                let detail = r.into_string().unwrap_or_default();
                Err(match code {
                    401 | 403 => ProviderError::Auth(format!("HTTP {code}: {detail}")),
                    429 => ProviderError::RateLimited(format!("HTTP {code}: {detail}")),
                    500..=599 => ProviderError::Transport(format!("HTTP {code}: {detail}")),
                    _ => ProviderError::Malformed(format!("HTTP {code}: {detail}")),
                })
            }
            Err(ureq::Error::Transport(t)) => Err(ProviderError::Transport(t.to_string())),
        }
    }
}
