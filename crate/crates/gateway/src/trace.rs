use std::io::Write;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

const RESPONSE_EXCERPT_CHARS: usize = 200;

/// One line of the per-request trace log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub request_tag: String,
    pub provider_id: String,
    pub latency_ms: u64,
    pub attempt_count: u32,
    pub response: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl TraceEntry {
    pub fn new(
        request_tag: &str,
        provider_id: &str,
        latency_ms: u64,
        attempt_count: u32,
        response: &str,
        error: Option<String>,
    ) -> Self {
        TraceEntry {
            request_tag: request_tag.to_string(),
            provider_id: provider_id.to_string(),
            latency_ms,
            attempt_count,
            response: crate::error::excerpt(response, RESPONSE_EXCERPT_CHARS),
            error,
        }
    }
}

pub trait TraceSink: Send + Sync {
    fn record(&self, entry: &TraceEntry);
}

#[derive(Debug, Default)]
pub struct MemoryTrace(Mutex<Vec<TraceEntry>>);

impl MemoryTrace {
    pub fn entries(&self) -> Vec<TraceEntry> {
        self.0.lock().unwrap_or_else(|e| e.into_inner()).clone()
    }
}

impl TraceSink for MemoryTrace {
    fn record(&self, entry: &TraceEntry) {
        self.0.lock().unwrap_or_else(|e| e.into_inner()).push(entry.clone());
    }
}

/// Appends line-delimited JSON to a writer.
pub struct JsonlTrace<W: Write + Send>(Mutex<W>);

impl<W: Write + Send> JsonlTrace<W> {
    pub fn new(w: W) -> Self {
        JsonlTrace(Mutex::new(w))
    }

    pub fn into_inner(self) -> W {
        self.0.into_inner().unwrap_or_else(|e| e.into_inner())
    }
}

impl<W: Write + Send> TraceSink for JsonlTrace<W> {
    fn record(&self, entry: &TraceEntry) {
        let mut w = self.0.lock().unwrap_or_else(|e| e.into_inner());
        let line = serde_json::to_string(entry).expect("trace entry serializes");
        if let Err(e) = writeln!(w, "{line}") {
            tracing::warn!("trace write failed: {e}");
        }
    }
}
