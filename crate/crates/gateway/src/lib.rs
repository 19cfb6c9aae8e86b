//! Chat-completion transport: HTTP providers, offline mocks, retries with
//! exponential backoff, and bounded order-preserving batches.

pub mod error;
pub mod http;
pub mod mock;
pub mod provider;
pub mod retry;
pub mod trace;
pub mod types;

use std::sync::Arc;
use std::time::{Duration, Instant};

use futures::stream::{self, StreamExt};

pub use error::{AttemptError, GatewayError};
pub use http::HttpProvider;
pub use mock::{EchoFirstPossible, FaultInjector, MockKind, Scripted};
pub use provider::ChatProvider;
pub use retry::RetryPolicy;
pub use trace::{JsonlTrace, MemoryTrace, TraceEntry, TraceSink};
pub use types::{ApiFlavor, ChatRequest, ChatResponse, ProviderConfig};

/// A provider plus its retry policy and concurrency bound.
#[derive(Clone)]
pub struct Gateway {
    provider: Arc<dyn ChatProvider>,
    policy: RetryPolicy,
    max_concurrent: usize,
    trace: Option<Arc<dyn TraceSink>>,
}

impl Gateway {
    pub fn new(provider: Arc<dyn ChatProvider>, policy: RetryPolicy, max_concurrent: usize) -> Self {
        Gateway {
            provider,
            policy,
            max_concurrent: max_concurrent.max(1),
            trace: None,
        }
    }

    /// An HTTP gateway with the key read from the configured env var.
    pub fn from_config(config: &ProviderConfig) -> Result<Self, GatewayError> {
        let provider = HttpProvider::from_env(config.clone())?;
        Ok(Self::new(
            Arc::new(provider),
            config.retry_policy(),
            config.max_concurrent_requests,
        ))
    }

    pub fn with_trace(mut self, sink: Arc<dyn TraceSink>) -> Self {
        self.trace = Some(sink);
        self
    }

    pub fn provider_id(&self) -> &str {
        self.provider.provider_id()
    }

    pub fn is_live(&self) -> bool {
        self.provider.is_live()
    }

    pub fn max_concurrent(&self) -> usize {
        self.max_concurrent
    }

    /// Sends one request, retrying timeouts, rate limits and 5xx replies.
    pub async fn complete(&self, req: &ChatRequest) -> Result<ChatResponse, GatewayError> {
        let started = Instant::now();
        let result = self.complete_inner(req).await;
        let latency_ms = started.elapsed().as_millis() as u64;
        let result = result.map(|(text, attempts)| ChatResponse {
            text,
            latency_ms,
            attempt_count: attempts,
            provider_id: self.provider_id().to_string(),
        });
        if let Some(sink) = &self.trace {
            let entry = match &result {
                Ok(r) => TraceEntry::new(&req.request_tag, self.provider_id(), latency_ms, r.attempt_count, &r.text, None),
                Err(e) => {
                    let attempts = match e {
                        GatewayError::Exhausted { attempts, .. } => *attempts,
                        _ => 0,
                    };
                    TraceEntry::new(&req.request_tag, self.provider_id(), latency_ms, attempts, "", Some(e.to_string()))
                }
            };
            sink.record(&entry);
        }
        result
    }

    async fn complete_inner(&self, req: &ChatRequest) -> Result<(String, u32), GatewayError> {
        let tag = &req.request_tag;
        req.validate().map_err(|message| GatewayError::InvalidRequest {
            tag: tag.clone(),
            message,
        })?;
        let timeout = Duration::from_millis(self.policy.timeout_ms);
        let mut attempts = 0u32;
        loop {
            attempts += 1;
            let outcome = match tokio::time::timeout(timeout, self.provider.attempt(req)).await {
                Ok(r) => r,
                Err(_) => Err(AttemptError::Timeout),
            };
            let err = match outcome {
                Ok(text) => return Ok((text, attempts)),
                Err(e) => e,
            };
            if let AttemptError::Protocol { excerpt } = err {
                return Err(GatewayError::Protocol {
                    tag: tag.clone(),
                    excerpt,
                });
            }
            if !err.is_retryable() {
                return Err(GatewayError::Rejected {
                    tag: tag.clone(),
                    source: err,
                });
            }
            if attempts > self.policy.max_retries {
                return Err(GatewayError::Exhausted {
                    tag: tag.clone(),
                    attempts,
                    last: err,
                });
            }
            let delay = self.policy.backoff_random(attempts);
            tracing::debug!(tag = %tag, attempt = attempts, ?delay, "retrying: {err}");
            tokio::time::sleep(delay).await;
        }
    }

    /// Sends every request with at most `max_concurrent` in flight. Results
    /// come back in input order; one failure does not affect the others.
    pub async fn complete_batch(
        &self,
        reqs: &[ChatRequest],
    ) -> Vec<Result<ChatResponse, GatewayError>> {
        stream::iter(reqs.iter().map(|r| self.complete(r)))
            .buffered(self.max_concurrent)
            .collect()
            .await
    }
}
