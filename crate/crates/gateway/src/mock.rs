//! Deterministic providers for offline runs and tests.

use std::collections::{HashMap, VecDeque};
use std::sync::Mutex;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};

use crate::error::AttemptError;
use crate::provider::ChatProvider;
use crate::types::ChatRequest;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MockKind {
    EchoFirstPossible,
    Scripted,
    Oracle,
}

impl MockKind {
    pub fn id(self) -> &'static str {
        match self {
            MockKind::EchoFirstPossible => "echo-first-possible",
            MockKind::Scripted => "scripted",
            MockKind::Oracle => "oracle",
        }
    }
}

/// Answers with the first label on the prompt's possible-candidates line.
#[derive(Debug, Default)]
pub struct EchoFirstPossible;

#[async_trait]
impl ChatProvider for EchoFirstPossible {
    fn provider_id(&self) -> &str {
        MockKind::EchoFirstPossible.id()
    }

    async fn attempt(&self, req: &ChatRequest) -> Result<String, AttemptError> {
        Ok(eicl_core::prompting::extract_possible(&req.user_text)
            .and_then(|labels| labels.first().map(|s| s.to_string()))
            .unwrap_or_default())
    }
}

/// Looks the request tag up in a fixed table. Unknown tags fail without
/// retry.
#[derive(Debug)]
pub struct Scripted {
    id: &'static str,
    replies: HashMap<String, String>,
}

impl Scripted {
    pub fn new(replies: HashMap<String, String>) -> Self {
        Scripted {
            id: MockKind::Scripted.id(),
            replies,
        }
    }

    /// A scripted table of gold labels.
    pub fn oracle(golds: HashMap<String, String>) -> Self {
        Scripted {
            id: MockKind::Oracle.id(),
            replies: golds,
        }
    }
}

#[async_trait]
impl ChatProvider for Scripted {
    fn provider_id(&self) -> &str {
        self.id
    }

    async fn attempt(&self, req: &ChatRequest) -> Result<String, AttemptError> {
        self.replies
            .get(&req.request_tag)
            .cloned()
            .ok_or_else(|| AttemptError::Client {
                status: 404,
                excerpt: format!("no scripted reply for `{}`", req.request_tag),
            })
    }
}

/// Wraps a provider and fails the first attempts of chosen requests with
/// queued errors.
pub struct FaultInjector<P> {
    inner: P,
    faults: Mutex<HashMap<String, VecDeque<AttemptError>>>,
}

impl<P: ChatProvider> FaultInjector<P> {
    pub fn new(inner: P) -> Self {
        FaultInjector {
            inner,
            faults: Mutex::new(HashMap::new()),
        }
    }

    pub fn inject(self, tag: impl Into<String>, errors: impl IntoIterator<Item = AttemptError>) -> Self {
        self.faults
            .lock()
            .unwrap()
            .entry(tag.into())
            .or_default()
            .extend(errors);
        self
    }
}

#[async_trait]
impl<P: ChatProvider> ChatProvider for FaultInjector<P> {
    fn provider_id(&self) -> &str {
        self.inner.provider_id()
    }

    async fn attempt(&self, req: &ChatRequest) -> Result<String, AttemptError> {
        let fault = self
            .faults
            .lock()
            .unwrap()
            .get_mut(&req.request_tag)
            .and_then(VecDeque::pop_front);
        match fault {
            Some(err) => Err(err),
            None => self.inner.attempt(req).await,
        }
    }
}
