use async_trait::async_trait;

use crate::error::AttemptError;
use crate::types::ChatRequest;

/// Something that can answer one chat request. Retries, timeouts and
/// batching live in [`crate::Gateway`]; implementors perform a single
/// attempt.
#[async_trait]
pub trait ChatProvider: Send + Sync {
    fn provider_id(&self) -> &str;

    async fn attempt(&self, req: &ChatRequest) -> Result<String, AttemptError>;

    /// Whether this provider talks to the network.
    fn is_live(&self) -> bool {
        false
    }
}
