use thiserror::Error;

/// Failure of a single attempt against a provider.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum AttemptError {
    #[error("timed out")]
    Timeout,
    #[error("rate limited")]
    RateLimited,
    #[error("server error {status}: {excerpt}")]
    Server { status: u16, excerpt: String },
    #[error("client error {status}: {excerpt}")]
    Client { status: u16, excerpt: String },
    #[error("malformed response: {excerpt}")]
    Protocol { excerpt: String },
    #[error("connection failed: {0}")]
    Connect(String),
}

impl AttemptError {
    pub fn is_retryable(&self) -> bool {
        matches!(
            self,
            AttemptError::Timeout
                | AttemptError::RateLimited
                | AttemptError::Server { .. }
                | AttemptError::Connect(_)
        )
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum GatewayError {
    #[error("request `{tag}` failed after {attempts} attempt(s): {last}")]
    Exhausted {
        tag: String,
        attempts: u32,
        last: AttemptError,
    },
    #[error("request `{tag}` rejected: {source}")]
    Rejected {
        tag: String,
        #[source]
        source: AttemptError,
    },
    #[error("request `{tag}`: protocol error: {excerpt}")]
    Protocol { tag: String, excerpt: String },
    #[error("environment variable `{0}` with the provider key is not set")]
    MissingCredential(String),
    #[error("invalid request `{tag}`: {message}")]
    InvalidRequest { tag: String, message: String },
    #[error("invalid provider config: {0}")]
    Config(String),
}

impl GatewayError {
    pub fn tag(&self) -> Option<&str> {
        match self {
            GatewayError::Exhausted { tag, .. }
            | GatewayError::Rejected { tag, .. }
            | GatewayError::Protocol { tag, .. }
            | GatewayError::InvalidRequest { tag, .. } => Some(tag),
            _ => None,
        }
    }
}

/// At most `max_chars` characters of `text`, cut on a char boundary.
pub fn excerpt(text: &str, max_chars: usize) -> String {
    match text.char_indices().nth(max_chars) {
        Some((idx, _)) => format!("{}…", &text[..idx]),
        None => text.to_string(),
    }
}
