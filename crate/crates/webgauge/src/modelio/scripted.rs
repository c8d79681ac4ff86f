//! Deterministic scripted backend: replays an ordered list of canned
//! replies, optionally gated by a substring matcher against the prompt.

use std::path::Path;
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{ChatRequest, ChatResponse, ModelClient, ModelError, TokenUsage};

/// One scripted reply. When `matches` is set, the incoming prompt must
/// contain it verbatim; a mismatch is an error naming both sides.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScriptEntry {
    #[serde(default, rename = "match", skip_serializing_if = "Option::is_none")]
    pub matches: Option<String>,
    pub reply: String,
}

#[derive(Debug, Deserialize)]
struct ScriptFile {
    #[serde(default)]
    model_tag: Option<String>,
    replies: Vec<ScriptEntry>,
}

/// Replays scripted replies in order. One instance per trajectory: the
/// cursor is the trajectory's replay position.
pub struct ScriptedClient {
    tag: String,
    entries: Vec<ScriptEntry>,
    cursor: Mutex<usize>,
}

impl ScriptedClient {
    pub fn new(tag: impl Into<String>, entries: Vec<ScriptEntry>) -> Self {
        ScriptedClient {
            tag: tag.into(),
            entries,
            cursor: Mutex::new(0),
        }
    }

    /// Unmatched replies, in order.
    pub fn from_replies<S: Into<String>>(tag: &str, replies: Vec<S>) -> Self {
        Self::new(
            tag,
            replies
                .into_iter()
                .map(|reply| ScriptEntry {
                    matches: None,
                    reply: reply.into(),
                })
                .collect(),
        )
    }

    pub fn remaining(&self) -> usize {
        self.entries.len() - *self.cursor.lock().expect("cursor lock")
    }
}

/// Load a scripted backend from a JSON file: either
/// `{"model_tag": "...", "replies": [{"match": "...", "reply": "..."}]}`
/// or a bare array of reply entries.
pub fn load_script(path: &Path) -> Result<ScriptedClient, ModelError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ModelError::Script(format!("{}: {e}", path.display())))?;
    let parsed: Result<ScriptFile, _> = serde_json::from_str(&text);
    let (tag, entries) = match parsed {
        Ok(file) => (
            file.model_tag
                .unwrap_or_else(|| default_tag_for(path)),
            file.replies,
        ),
        Err(_) => {
            let entries: Vec<ScriptEntry> = serde_json::from_str(&text)
                .map_err(|e| ModelError::Script(format!("{}: {e}", path.display())))?;
            (default_tag_for(path), entries)
        }
    };
    Ok(ScriptedClient::new(tag, entries))
}

fn default_tag_for(path: &Path) -> String {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "script".to_string());
    format!("scripted-{stem}")
}

impl ModelClient for ScriptedClient {
    fn chat(&self, request: &ChatRequest) -> Result<ChatResponse, ModelError> {
        request.validate()?;
        let mut cursor = self.cursor.lock().expect("cursor lock");
        let index = *cursor;
        let entry = self.entries.get(index).ok_or(ModelError::ScriptExhausted {
            served: self.entries.len(),
            call: index + 1,
        })?;
        if let Some(expected) = &entry.matches {
            let prompt = request.flattened_text();
            if !prompt.contains(expected.as_str()) {
                let digest = hex::encode(Sha256::digest(prompt.as_bytes()));
                let tail: String = prompt
                    .chars()
                    .rev()
                    .take(80)
                    .collect::<Vec<char>>()
                    .into_iter()
                    .rev()
                    .collect();
                return Err(ModelError::MatcherMismatch {
                    index,
                    expected: expected.clone(),
                    digest: digest[..16].to_string(),
                    tail,
                });
            }
        }
        *cursor += 1;
        Ok(ChatResponse {
            text: entry.reply.clone(),
            usage: TokenUsage::default(),
            latency: Duration::ZERO,
            cost: 0.0,
        })
    }

    fn model_tag(&self) -> &str {
        &self.tag
    }
}
