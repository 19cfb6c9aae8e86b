//! HTTP providers for chat-completion endpoints.

use std::fmt;
use std::time::Duration;

use async_trait::async_trait;
use serde::Serialize;
use serde_json::Value;

use crate::error::{excerpt, AttemptError, GatewayError};
use crate::provider::ChatProvider;
use crate::types::{ApiFlavor, ChatRequest, ProviderConfig};

const BODY_EXCERPT_CHARS: usize = 300;
const ANTHROPIC_VERSION: &str = "2023-06-01";

pub struct HttpProvider {
    client: reqwest::Client,
    config: ProviderConfig,
    api_key: String,
}

impl fmt::Debug for HttpProvider {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HttpProvider")
            .field("provider_id", &self.config.provider_id)
            .field("endpoint_url", &self.config.endpoint_url)
            .field("flavor", &self.config.flavor)
            .field("has_api_key", &!self.api_key.is_empty())
            .finish()
    }
}

#[derive(Serialize)]
struct Message<'a> {
    role: &'static str,
    content: &'a str,
}

#[derive(Serialize)]
struct CompletionsBody<'a> {
    model: &'a str,
    messages: Vec<Message<'a>>,
    temperature: f64,
    max_tokens: u32,
}

#[derive(Serialize)]
struct MessagesBody<'a> {
    model: &'a str,
    system: &'a str,
    messages: Vec<Message<'a>>,
    temperature: f64,
    max_tokens: u32,
}

impl HttpProvider {
    /// Reads the key from `config.auth_env_var`.
    pub fn from_env(config: ProviderConfig) -> Result<Self, GatewayError> {
        let key = std::env::var(&config.auth_env_var)
            .map_err(|_| GatewayError::MissingCredential(config.auth_env_var.clone()))?;
        Self::with_key(config, key)
    }

    pub fn with_key(config: ProviderConfig, api_key: String) -> Result<Self, GatewayError> {
        config.validate().map_err(GatewayError::Config)?;
        let client = reqwest::Client::builder()
            .timeout(Duration::from_millis(config.timeout_ms))
            .build()
            .map_err(|e| GatewayError::Config(format!("http client: {e}")))?;
        Ok(HttpProvider {
            client,
            config,
            api_key,
        })
    }

    fn body(&self, req: &ChatRequest) -> Value {
        let user = Message {
            role: "user",
            content: &req.user_text,
        };
        match self.config.flavor {
            ApiFlavor::ChatCompletions => serde_json::to_value(CompletionsBody {
                model: &req.model_id,
                messages: vec![
                    Message {
                        role: "system",
                        content: &req.system_text,
                    },
                    user,
                ],
                temperature: req.temperature,
                max_tokens: req.max_tokens,
            }),
            ApiFlavor::AnthropicMessages => serde_json::to_value(MessagesBody {
                model: &req.model_id,
                system: &req.system_text,
                messages: vec![user],
                temperature: req.temperature,
                max_tokens: req.max_tokens,
            }),
        }
        .expect("request body serializes")
    }
}

/// Pulls the reply text out of a response body.
pub fn extract_text(flavor: ApiFlavor, body: &str) -> Result<String, AttemptError> {
    let protocol = || AttemptError::Protocol {
        excerpt: excerpt(body, BODY_EXCERPT_CHARS),
    };
    let json: Value = serde_json::from_str(body).map_err(|_| protocol())?;
    let text = match flavor {
        ApiFlavor::ChatCompletions => json
            .pointer("/choices/0/message/content")
            .and_then(Value::as_str),
        ApiFlavor::AnthropicMessages => json.pointer("/content/0/text").and_then(Value::as_str),
    };
    text.map(str::to_string).ok_or_else(protocol)
}

pub(crate) fn classify_status(status: u16, body: &str) -> AttemptError {
    let excerpt = excerpt(body, BODY_EXCERPT_CHARS);
    match status {
        429 => AttemptError::RateLimited,
        500..=599 => AttemptError::Server { status, excerpt },
        _ => AttemptError::Client { status, excerpt },
    }
}

#[async_trait]
impl ChatProvider for HttpProvider {
    fn provider_id(&self) -> &str {
        &self.config.provider_id
    }

    fn is_live(&self) -> bool {
        true
    }

    async fn attempt(&self, req: &ChatRequest) -> Result<String, AttemptError> {
        let mut builder = self
            .client
            .post(&self.config.endpoint_url)
            .json(&self.body(req));
        builder = match self.config.flavor {
            ApiFlavor::ChatCompletions => builder.bearer_auth(&self.api_key),
            ApiFlavor::AnthropicMessages => builder
                .header("x-api-key", &self.api_key)
                .header("anthropic-version", ANTHROPIC_VERSION),
        };
        let resp = builder.send().await.map_err(|e| {
            if e.is_timeout() {
                AttemptError::Timeout
            } else {
                // reqwest errors can carry the URL but never headers
                AttemptError::Connect(e.to_string())
            }
        })?;
        let status = resp.status().as_u16();
        let body = resp.text().await.map_err(|e| {
            if e.is_timeout() {
                AttemptError::Timeout
            } else {
                AttemptError::Connect(e.to_string())
            }
        })?;
        if !(200..300).contains(&status) {
            return Err(classify_status(status, &body));
        }
        extract_text(self.config.flavor, &body)
    }
}
