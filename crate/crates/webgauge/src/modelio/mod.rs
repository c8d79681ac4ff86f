//! Uniform model-client abstraction over chat-with-images backends.
//!
//! Every backend implements [`ModelClient`]; the harness never hardcodes a
//! model name in logic, only configuration tags. The scripted backend replays
//! canned replies for deterministic offline runs; the HTTP backend talks to
//! an OpenAI-style chat endpoint with retries and cost accounting.

mod http;
mod scripted;

pub use http::{BackendConfig, BackendEntry, HttpClient};
pub use scripted::{load_script, ScriptEntry, ScriptedClient};

use std::path::PathBuf;
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Hard ceiling on images per request, matching the smallest multimodal
/// input limit among supported backends.
pub const MAX_IMAGES_PER_REQUEST: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

/// One chat turn. Images travel as file references resolved at send time so
/// trajectory logs stay small and replayable.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub text: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub images: Vec<PathBuf>,
}

impl ChatMessage {
    pub fn system(text: impl Into<String>) -> Self {
        ChatMessage {
            role: Role::System,
            text: text.into(),
            images: Vec::new(),
        }
    }

    pub fn user(text: impl Into<String>) -> Self {
        ChatMessage {
            role: Role::User,
            text: text.into(),
            images: Vec::new(),
        }
    }

    pub fn assistant(text: impl Into<String>) -> Self {
        ChatMessage {
            role: Role::Assistant,
            text: text.into(),
            images: Vec::new(),
        }
    }

    pub fn with_image(mut self, path: impl Into<PathBuf>) -> Self {
        self.images.push(path.into());
        self
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChatRequest {
    pub messages: Vec<ChatMessage>,
    pub model_tag: String,
    pub max_output: u32,
}

impl ChatRequest {
    pub fn new(model_tag: impl Into<String>, messages: Vec<ChatMessage>) -> Self {
        ChatRequest {
            messages,
            model_tag: model_tag.into(),
            max_output: 4096,
        }
    }

    pub fn image_count(&self) -> usize {
        self.messages.iter().map(|m| m.images.len()).sum()
    }

    /// All message text joined, as seen by scripted matchers and digests.
    pub fn flattened_text(&self) -> String {
        self.messages
            .iter()
            .map(|m| m.text.as_str())
            .collect::<Vec<&str>>()
            .join("\n")
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let images = self.image_count();
        if images > MAX_IMAGES_PER_REQUEST {
            return Err(ModelError::TooManyImages {
                count: images,
                max: MAX_IMAGES_PER_REQUEST,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenUsage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

#[derive(Debug, Clone)]
pub struct ChatResponse {
    pub text: String,
    pub usage: TokenUsage,
    pub latency: Duration,
    pub cost: f64,
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("request carries {count} images, backend limit is {max}")]
    TooManyImages { count: usize, max: usize },
    #[error("script exhausted after {served} replies (call {call})")]
    ScriptExhausted { served: usize, call: usize },
    #[error("script matcher mismatch at reply {index}: expected a prompt containing {expected:?}, got prompt sha256:{digest} ending {tail:?}")]
    MatcherMismatch {
        index: usize,
        expected: String,
        digest: String,
        tail: String,
    },
    #[error("backend returned empty output")]
    EmptyOutput,
    #[error("transport failed after {attempts} attempts: {last}")]
    Transport { attempts: u32, last: String },
    #[error("no backend configured for model tag {0:?}")]
    UnknownTag(String),
    #[error("image {0} could not be read: {1}")]
    ImageRead(PathBuf, String),
    #[error("script file error: {0}")]
    Script(String),
}

/// A chat backend. Implementations must be safe to call from concurrent
/// trajectory workers.
pub trait ModelClient: Send + Sync {
    fn chat(&self, request: &ChatRequest) -> Result<ChatResponse, ModelError>;
    fn model_tag(&self) -> &str;
}

/// One accounted model call.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CallRecord {
    pub model_tag: String,
    pub usage: TokenUsage,
    pub cost: f64,
}

/// Append-only cost ledger; totals are always the sum of the per-call
/// entries. Accepts concurrent appends.
#[derive(Debug, Default)]
pub struct CostLedger {
    calls: Mutex<Vec<CallRecord>>,
}

impl CostLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&self, record: CallRecord) {
        self.calls.lock().expect("ledger lock").push(record);
    }

    pub fn calls(&self) -> Vec<CallRecord> {
        self.calls.lock().expect("ledger lock").clone()
    }

    /// Per-tag (token, cost) totals.
    pub fn totals(&self) -> std::collections::BTreeMap<String, (TokenUsage, f64)> {
        let mut totals = std::collections::BTreeMap::new();
        for call in self.calls.lock().expect("ledger lock").iter() {
            let entry = totals
                .entry(call.model_tag.clone())
                .or_insert((TokenUsage::default(), 0.0));
            entry.0.prompt_tokens += call.usage.prompt_tokens;
            entry.0.completion_tokens += call.usage.completion_tokens;
            entry.1 += call.cost;
        }
        totals
    }

    pub fn total_cost(&self) -> f64 {
        self.calls
            .lock()
            .expect("ledger lock")
            .iter()
            .map(|c| c.cost)
            .sum()
    }
}

/// Digest of one request/response exchange for the transcript log.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub model_tag: String,
    pub request_sha256: String,
    pub request_chars: usize,
    pub response_sha256: String,
    pub response_preview: String,
}

pub fn transcript_record(request: &ChatRequest, response_text: &str) -> TranscriptRecord {
    use sha2::{Digest, Sha256};
    let flat = request.flattened_text();
    TranscriptRecord {
        model_tag: request.model_tag.clone(),
        request_sha256: hex::encode(Sha256::digest(flat.as_bytes())),
        request_chars: flat.chars().count(),
        response_sha256: hex::encode(Sha256::digest(response_text.as_bytes())),
        response_preview: response_text.chars().take(120).collect(),
    }
}

/// Append a transcript record to a JSONL sink.
pub fn append_transcript(path: &std::path::Path, record: &TranscriptRecord) -> std::io::Result<()> {
    use std::io::Write;
    let mut file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)?;
    writeln!(file, "{}", serde_json::to_string(record).expect("record serializes"))
}

#[cfg(test)]
mod tests;
