//! HTTP backend speaking the OpenAI-style chat-completions wire format,
//! with exponential-backoff retries and ledger/transcript hooks.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use base64::Engine;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{
    append_transcript, transcript_record, CallRecord, ChatRequest, ChatResponse, CostLedger,
    ModelClient, ModelError, Role, TokenUsage,
};

/// One configured backend: where to send a model tag, which env var holds
/// the credential, and what the tokens cost.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BackendEntry {
    pub endpoint: String,
    /// Name of the environment variable carrying the API key.
    pub credentials_env: String,
    /// Upstream model identifier; defaults to the tag itself.
    #[serde(default)]
    pub model: Option<String>,
    #[serde(default = "default_max_retries")]
    pub max_retries: u32,
    /// USD per 1K prompt / completion tokens, for the cost ledger.
    #[serde(default)]
    pub cost_per_1k_prompt: f64,
    #[serde(default)]
    pub cost_per_1k_completion: f64,
}

fn default_max_retries() -> u32 {
    3
}

/// Backend config file: model_tag -> entry.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct BackendConfig {
    pub backends: BTreeMap<String, BackendEntry>,
}

impl BackendConfig {
    pub fn load(path: &Path) -> Result<Self, ModelError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ModelError::Script(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| ModelError::Script(format!("{}: {e}", path.display())))
    }
}

pub struct HttpClient {
    tag: String,
    entry: BackendEntry,
    api_key: String,
    ledger: Arc<CostLedger>,
    transcript: Option<PathBuf>,
}

impl HttpClient {
    pub fn from_config(
        config: &BackendConfig,
        tag: &str,
        ledger: Arc<CostLedger>,
        transcript: Option<PathBuf>,
    ) -> Result<Self, ModelError> {
        let entry = config
            .backends
            .get(tag)
            .ok_or_else(|| ModelError::UnknownTag(tag.to_string()))?
            .clone();
        let api_key = std::env::var(&entry.credentials_env).unwrap_or_default();
        Ok(HttpClient {
            tag: tag.to_string(),
            entry,
            api_key,
            ledger,
            transcript,
        })
    }

    /// OpenAI-style message payload; images resolved to data URLs at send
    /// time.
    fn wire_messages(&self, request: &ChatRequest) -> Result<serde_json::Value, ModelError> {
        let mut messages = Vec::new();
        for message in &request.messages {
            let role = match message.role {
                Role::System => "system",
                Role::User => "user",
                Role::Assistant => "assistant",
            };
            if message.images.is_empty() {
                messages.push(json!({"role": role, "content": message.text}));
            } else {
                let mut parts = vec![json!({"type": "text", "text": message.text})];
                for image in &message.images {
                    let bytes = std::fs::read(image)
                        .map_err(|e| ModelError::ImageRead(image.clone(), e.to_string()))?;
                    let encoded = base64::engine::general_purpose::STANDARD.encode(bytes);
                    parts.push(json!({
                        "type": "image_url",
                        "image_url": {"url": format!("data:image/png;base64,{encoded}")}
                    }));
                }
                messages.push(json!({"role": role, "content": parts}));
            }
        }
        Ok(serde_json::Value::Array(messages))
    }
}

#[derive(Debug, Deserialize)]
struct WireResponse {
    choices: Vec<WireChoice>,
    #[serde(default)]
    usage: Option<WireUsage>,
}

#[derive(Debug, Deserialize)]
struct WireChoice {
    message: WireMessage,
}

#[derive(Debug, Deserialize)]
struct WireMessage {
    #[serde(default)]
    content: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
struct WireUsage {
    #[serde(default)]
    prompt_tokens: u64,
    #[serde(default)]
    completion_tokens: u64,
}

impl ModelClient for HttpClient {
    fn chat(&self, request: &ChatRequest) -> Result<ChatResponse, ModelError> {
        request.validate()?;
        let body = json!({
            "model": self.entry.model.clone().unwrap_or_else(|| self.tag.clone()),
            "messages": self.wire_messages(request)?,
            "max_tokens": request.max_output,
        });

        let start = Instant::now();
        let mut last_error = String::new();
        let attempts = self.entry.max_retries.max(1);
        for attempt in 0..attempts {
            if attempt > 0 {
                std::thread::sleep(Duration::from_millis(500 * (1 << (attempt - 1)) as u64));
            }
            let sent = ureq::post(&self.entry.endpoint)
                .header("Authorization", &format!("Bearer {}", self.api_key))
                .header("Content-Type", "application/json")
                .send_json(&body);
            match sent {
                Ok(mut response) => {
                    let parsed: WireResponse = response
                        .body_mut()
                        .read_json()
                        .map_err(|e| ModelError::Transport {
                            attempts: attempt + 1,
                            last: format!("bad response body: {e}"),
                        })?;
                    let text = parsed
                        .choices
                        .first()
                        .and_then(|c| c.message.content.clone())
                        .unwrap_or_default();
                    if text.is_empty() {
                        return Err(ModelError::EmptyOutput);
                    }
                    let usage = parsed.usage.unwrap_or_default();
                    let usage = TokenUsage {
                        prompt_tokens: usage.prompt_tokens,
                        completion_tokens: usage.completion_tokens,
                    };
                    let cost = usage.prompt_tokens as f64 / 1000.0 * self.entry.cost_per_1k_prompt
                        + usage.completion_tokens as f64 / 1000.0
                            * self.entry.cost_per_1k_completion;
                    self.ledger.record(CallRecord {
                        model_tag: self.tag.clone(),
                        usage,
                        cost,
                    });
                    if let Some(path) = &self.transcript {
                        let _ = append_transcript(path, &transcript_record(request, &text));
                    }
                    return Ok(ChatResponse {
                        text,
                        usage,
                        latency: start.elapsed(),
                        cost,
                    });
                }
                Err(err) => {
                    last_error = err.to_string();
                    // 4xx other than 429 will not improve on retry.
                    if let ureq::Error::StatusCode(code) = &err {
                        if *code != 429 && *code < 500 {
                            break;
                        }
                    }
                }
            }
        }
        Err(ModelError::Transport {
            attempts,
            last: last_error,
        })
    }

    fn model_tag(&self) -> &str {
        &self.tag
    }
}
