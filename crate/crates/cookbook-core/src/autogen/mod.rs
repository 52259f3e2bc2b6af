//! Automated template drafting.
//!
//! `build_prompt` assembles the fixed few-shot prompt (procedure description
//! plus two worked examples, document QA and multiple-choice QA) with the
//! task name and description substituted. `request_template` optionally
//! submits it to an OpenAI-compatible chat-completions endpoint and persists
//! the raw exchange for human review. Returned template code is never
//! interpreted or executed.

use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AutogenError {
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("auth token env var {0} is not set")]
    AuthMissing(String),
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("provider returned status {status}")]
    Provider { status: u16, body: String },
    #[error("provider response did not parse as chat completion: {detail}")]
    MalformedResponse { detail: String, body: String },
    #[error("log i/o: {0}")]
    Io(#[from] std::io::Error),
}

const PROMPT_TEMPLATE: &str = include_str!("prompt_template.txt");
const TASK_NAME_SLOT: &str = "{task_name}";
const TASK_DESCRIPTION_SLOT: &str = "{task_description}";

/// Substitutes the task name and description into the fixed few-shot prompt.
/// The output is deterministic and ends with the literal line `Inputs:`.
pub fn build_prompt(task_name: &str, task_description: &str) -> Result<String, AutogenError> {
    if task_name.trim().is_empty() {
        return Err(AutogenError::InvalidRequest("task name is empty".into()));
    }
    if task_description.trim().is_empty() {
        return Err(AutogenError::InvalidRequest(
            "task description is empty".into(),
        ));
    }
    Ok(PROMPT_TEMPLATE
        .replacen(TASK_NAME_SLOT, task_name, 1)
        .replacen(TASK_DESCRIPTION_SLOT, task_description, 1))
}

/// Submission target. The auth token is read from the named environment
/// variable, never stored.
#[derive(Debug, Clone)]
pub struct AutogenRequest {
    pub task_name: String,
    pub task_description: String,
    pub endpoint: String,
    pub model: String,
    pub token_env: String,
    /// When set, the raw request and response are written here as
    /// timestamped files.
    pub log_dir: Option<PathBuf>,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: Vec<ChatMessage<'a>>,
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatResponseMessage,
}

#[derive(Deserialize)]
struct ChatResponseMessage {
    content: String,
}

fn log_exchange(
    dir: &std::path::Path,
    stamp: u128,
    suffix: &str,
    contents: &str,
) -> Result<(), AutogenError> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(format!("autogen-{stamp}-{suffix}"));
    std::fs::write(path, contents)?;
    Ok(())
}

/// Sends the prompt as a chat-completions request and returns the assistant
/// message content verbatim. Non-2xx responses and unparseable bodies are
/// surfaced with the raw body preserved (and logged when a log dir is set).
/// No decoding parameters are sent; the provider's defaults apply.
pub fn request_template(req: &AutogenRequest, prompt: &str) -> Result<String, AutogenError> {
    let token = std::env::var(&req.token_env)
        .ok()
        .filter(|t| !t.is_empty())
        .ok_or_else(|| AutogenError::AuthMissing(req.token_env.clone()))?;
    let body = serde_json::to_string(&ChatRequest {
        model: &req.model,
        messages: vec![ChatMessage {
            role: "user",
            content: prompt,
        }],
    })
    .expect("chat request serializes");

    let stamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0);
    if let Some(dir) = &req.log_dir {
        log_exchange(dir, stamp, "request.json", &body)?;
    }

    let response = ureq::post(&req.endpoint)
        .set("Authorization", &format!("Bearer {token}"))
        .set("Content-Type", "application/json")
        .send_string(&body);

    let raw = match response {
        Ok(resp) => resp
            .into_string()
            .map_err(|e| AutogenError::Transport(e.to_string()))?,
        Err(ureq::Error::Status(status, resp)) => {
            let body = resp.into_string().unwrap_or_default();
            if let Some(dir) = &req.log_dir {
                log_exchange(dir, stamp, "response.txt", &body)?;
            }
            return Err(AutogenError::Provider { status, body });
        }
        Err(ureq::Error::Transport(t)) => {
            return Err(AutogenError::Transport(t.to_string()));
        }
    };
    if let Some(dir) = &req.log_dir {
        log_exchange(dir, stamp, "response.txt", &raw)?;
    }

    let parsed: ChatResponse =
        serde_json::from_str(&raw).map_err(|e| AutogenError::MalformedResponse {
            detail: e.to_string(),
            body: raw.clone(),
        })?;
    let content = parsed
        .choices
        .into_iter()
        .next()
        .map(|c| c.message.content)
        .ok_or(AutogenError::MalformedResponse {
            detail: "no choices in response".into(),
            body: raw,
        })?;
    Ok(content)
}
