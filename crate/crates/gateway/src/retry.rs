use std::time::Duration;

use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub base_ms: u64,
    pub max_ms: u64,
    pub timeout_ms: u64,
}

impl RetryPolicy {
    pub fn immediate(max_retries: u32) -> Self {
        RetryPolicy {
            max_retries,
            base_ms: 0,
            max_ms: 0,
            timeout_ms: 60_000,
        }
    }

    /// Delay before retry number `retry` (1-based): `base * 2^(retry-1)`
    /// stretched by a jitter factor in [1, 1.5), capped at `max_ms`. Since
    /// 1.5 < 2 the sequence never decreases.
    pub fn backoff(&self, retry: u32, jitter: f64) -> Duration {
        debug_assert!((0.0..1.0).contains(&jitter));
        let exp = self
            .base_ms
            .saturating_mul(1u64.checked_shl(retry.saturating_sub(1)).unwrap_or(u64::MAX));
        let stretched = exp as f64 * (1.0 + 0.5 * jitter);
        Duration::from_millis((stretched as u64).min(self.max_ms))
    }

    pub fn backoff_random(&self, retry: u32) -> Duration {
        self.backoff(retry, rand::rng().random::<f64>())
    }
}
