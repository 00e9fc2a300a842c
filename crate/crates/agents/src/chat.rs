//! Minimal client for OpenAI-style chat-completion endpoints.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("invalid base_url '{0}': expected http:// or https://")]
    InvalidUrl(String),
    #[error("environment variable {0} holding the API key is not set")]
    MissingApiKey(String),
    #[error("timeout must be positive")]
    ZeroTimeout,
    #[error("model_name is empty")]
    EmptyModel,
}

fn default_timeout_secs() -> f64 {
    60.0
}
fn default_max_retries() -> u32 {
    3
}
fn default_backoff_ms() -> u64 {
    500
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChatEndpointConfig {
    /// Base URL; requests go to `{base_url}/chat/completions`.
    pub base_url: String,
    pub model_name: String,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: f64,
    #[serde(default = "default_max_retries")]
    pub max_retries: u32,
    #[serde(default)]
    pub temperature: f64,
    /// Name of the environment variable holding a bearer token, if any.
    #[serde(default)]
    pub api_key_env: Option<String>,
    /// Initial delay between retries; doubles after each failed attempt.
    #[serde(default = "default_backoff_ms")]
    pub retry_backoff_ms: u64,
}

impl ChatEndpointConfig {
    pub fn new(base_url: impl Into<String>, model_name: impl Into<String>) -> Self {
        ChatEndpointConfig {
            base_url: base_url.into(),
            model_name: model_name.into(),
            timeout_secs: default_timeout_secs(),
            max_retries: default_max_retries(),
            temperature: 0.0,
            api_key_env: None,
            retry_backoff_ms: default_backoff_ms(),
        }
    }

    pub fn endpoint_url(&self) -> String {
        format!("{}/chat/completions", self.base_url.trim_end_matches('/'))
    }
}

/// Why one attempt failed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AttemptError {
    Transport(String),
    Status(u16),
    Malformed(String),
}

impl AttemptError {
    fn is_transient(&self) -> bool {
        match self {
            AttemptError::Transport(_) => true,
            AttemptError::Status(s) => *s == 429 || *s >= 500,
            AttemptError::Malformed(_) => false,
        }
    }
}

/// Result of a completion call, including every failed attempt.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Completion {
    /// The reply text; empty when every attempt failed.
    pub text: String,
    pub attempts: u32,
    pub errors: Vec<AttemptError>,
}

/// Shareable across threads; clones share the underlying connection pool.
#[derive(Clone)]
pub struct ChatClient {
    config: ChatEndpointConfig,
    api_key: Option<String>,
    agent: ureq::Agent,
    calls: Arc<AtomicU64>,
}

impl std::fmt::Debug for ChatClient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChatClient")
            .field("config", &self.config)
            .finish_non_exhaustive()
    }
}

impl ChatClient {
    /// Validates the configuration and resolves the API key up front so that
    /// mistakes surface before any game starts.
    pub fn new(config: ChatEndpointConfig) -> Result<Self, ConfigError> {
        let url = config.base_url.trim();
        let rest = url
            .strip_prefix("http://")
            .or_else(|| url.strip_prefix("https://"))
            .ok_or_else(|| ConfigError::InvalidUrl(config.base_url.clone()))?;
        if rest.is_empty() || rest.starts_with('/') || url.parse::<ureq::http::Uri>().is_err() {
            return Err(ConfigError::InvalidUrl(config.base_url.clone()));
        }
        if !config.timeout_secs.is_finite() || config.timeout_secs <= 0.0 {
            return Err(ConfigError::ZeroTimeout);
        }
        if config.model_name.trim().is_empty() {
            return Err(ConfigError::EmptyModel);
        }
        let api_key = match &config.api_key_env {
            Some(var) => Some(std::env::var(var).map_err(|_| ConfigError::MissingApiKey(var.clone()))?),
            None => None,
        };
        let agent_config = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs_f64(config.timeout_secs)))
            .http_status_as_error(false)
            .build();
        Ok(ChatClient {
            config,
            api_key,
            agent: ureq::Agent::new_with_config(agent_config),
            calls: Arc::new(AtomicU64::new(0)),
        })
    }

    pub fn config(&self) -> &ChatEndpointConfig {
        &self.config
    }

    /// Number of HTTP attempts made by this client and its clones.
    pub fn attempts_made(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    /// Sends a system message (omitted when empty) and a user message and
    /// returns the first choice.
    /// Transport errors, 429 and 5xx are retried up to `max_retries` times;
    /// after that, or on any other failure, the text is empty.
    pub fn complete(&self, system: &str, user: &str) -> Completion {
        let mut messages = Vec::new();
        if !system.is_empty() {
            messages.push(json!({"role": "system", "content": system}));
        }
        messages.push(json!({"role": "user", "content": user}));
        let body = json!({
            "model": self.config.model_name,
            "messages": messages,
            "temperature": self.config.temperature,
        })
        .to_string();
        let mut errors = Vec::new();
        let mut delay = Duration::from_millis(self.config.retry_backoff_ms);
        for attempt in 1..=self.config.max_retries + 1 {
            match self.attempt(&body) {
                Ok(text) => {
                    return Completion {
                        text,
                        attempts: attempt,
                        errors,
                    }
                }
                Err(e) => {
                    let retry = e.is_transient() && attempt <= self.config.max_retries;
                    errors.push(e);
                    if !retry {
                        return Completion {
                            text: String::new(),
                            attempts: attempt,
                            errors,
                        };
                    }
                    std::thread::sleep(delay);
                    delay *= 2;
                }
            }
        }
        unreachable!("the final attempt always returns")
    }

    fn attempt(&self, body: &str) -> Result<String, AttemptError> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        let mut req = self
            .agent
            .post(self.config.endpoint_url())
            .header("Content-Type", "application/json");
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", format!("Bearer {key}"));
        }
        let mut resp = req
            .send(body)
            .map_err(|e| AttemptError::Transport(e.to_string()))?;
        let status = resp.status().as_u16();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| AttemptError::Transport(e.to_string()))?;
        if !(200..300).contains(&status) {
            return Err(AttemptError::Status(status));
        }
        extract_content(&text)
    }
}

/// Pulls `choices[0].message.content` out of a completion body.
pub fn extract_content(body: &str) -> Result<String, AttemptError> {
    let v: serde_json::Value =
        serde_json::from_str(body).map_err(|e| AttemptError::Malformed(e.to_string()))?;
    v.pointer("/choices/0/message/content")
        .and_then(|c| c.as_str())
        .map(str::to_string)
        .ok_or_else(|| AttemptError::Malformed("missing choices[0].message.content".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_fails_fast() {
        let bad = ChatEndpointConfig::new("localhost:8080", "m");
        assert!(matches!(ChatClient::new(bad), Err(ConfigError::InvalidUrl(_))));
        let mut c = ChatEndpointConfig::new("http://127.0.0.1:1", "m");
        c.timeout_secs = 0.0;
        assert_eq!(ChatClient::new(c).unwrap_err(), ConfigError::ZeroTimeout);
        let mut c = ChatEndpointConfig::new("http://127.0.0.1:1", "m");
        c.api_key_env = Some("DECEIT_TEST_KEY_THAT_IS_NOT_SET".into());
        assert!(matches!(ChatClient::new(c), Err(ConfigError::MissingApiKey(_))));
    }

    #[test]
    fn extracts_first_choice() {
        let body = r#"{"choices":[{"message":{"role":"assistant","content":"hi"}},{"message":{"content":"no"}}]}"#;
        assert_eq!(extract_content(body).unwrap(), "hi");
        assert!(extract_content("{}").is_err());
        assert!(extract_content("not json").is_err());
    }

    #[test]
    fn endpoint_url_joins_path() {
        let c = ChatEndpointConfig::new("http://h:1/v1/", "m");
        assert_eq!(c.endpoint_url(), "http://h:1/v1/chat/completions");
    }
}
