use serde::{Deserialize, Serialize};

pub const DEFAULT_MAX_TOKENS: u32 = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model_id: String,
    pub system_text: String,
    pub user_text: String,
    pub temperature: f64,
    pub max_tokens: u32,
    /// Sample id of the query, used for tracing and by the mock providers.
    pub request_tag: String,
}

impl ChatRequest {
    pub fn new(
        model_id: impl Into<String>,
        system_text: impl Into<String>,
        user_text: impl Into<String>,
        request_tag: impl Into<String>,
    ) -> Self {
        ChatRequest {
            model_id: model_id.into(),
            system_text: system_text.into(),
            user_text: user_text.into(),
            temperature: 0.0,
            max_tokens: DEFAULT_MAX_TOKENS,
            request_tag: request_tag.into(),
        }
    }

    pub(crate) fn validate(&self) -> Result<(), String> {
        if self.system_text.is_empty() || self.user_text.is_empty() {
            return Err("prompt texts must be non-empty".into());
        }
        if self.temperature.is_nan() || self.temperature < 0.0 {
            return Err(format!("temperature {} is negative", self.temperature));
        }
        if self.max_tokens == 0 {
            return Err("max_tokens must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatResponse {
    pub text: String,
    pub latency_ms: u64,
    pub attempt_count: u32,
    pub provider_id: String,
}

/// Wire shape spoken by an HTTP endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ApiFlavor {
    /// `POST {model, messages, temperature, max_tokens}`, reply in
    /// `choices[0].message.content`, bearer auth.
    #[default]
    ChatCompletions,
    /// Messages API: top-level `system`, reply in `content[0].text`,
    /// `x-api-key` auth.
    AnthropicMessages,
}

/// Connection settings for one provider. The key itself never appears here,
/// only the name of the environment variable holding it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProviderConfig {
    pub provider_id: String,
    pub endpoint_url: String,
    pub auth_env_var: String,
    pub flavor: ApiFlavor,
    pub timeout_ms: u64,
    pub max_retries: u32,
    pub backoff_base_ms: u64,
    pub backoff_max_ms: u64,
    pub max_concurrent_requests: usize,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        ProviderConfig {
            provider_id: "openai".into(),
            endpoint_url: "https://api.openai.com/v1/chat/completions".into(),
            auth_env_var: "OPENAI_API_KEY".into(),
            flavor: ApiFlavor::ChatCompletions,
            timeout_ms: 60_000,
            max_retries: 5,
            backoff_base_ms: 500,
            backoff_max_ms: 30_000,
            max_concurrent_requests: 4,
        }
    }
}

impl ProviderConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.max_concurrent_requests < 1 {
            return Err("max_concurrent_requests must be at least 1".into());
        }
        if self.timeout_ms == 0 {
            return Err("timeout_ms must be positive".into());
        }
        if self.backoff_max_ms < self.backoff_base_ms {
            return Err("backoff_max_ms must be >= backoff_base_ms".into());
        }
        Ok(())
    }

    pub fn retry_policy(&self) -> crate::retry::RetryPolicy {
        crate::retry::RetryPolicy {
            max_retries: self.max_retries,
            base_ms: self.backoff_base_ms,
            max_ms: self.backoff_max_ms,
            timeout_ms: self.timeout_ms,
        }
    }
}
