//! Chat-completion access: a blocking HTTP client (feature `http`) and an
//! offline replay directory of `<sha256(prompt)>.txt` files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndpointConfig {
    /// Prefix of `/chat/completions`, e.g. `https://api.example.com/v1`.
    pub base_url: String,
    pub model: String,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default = "default_timeout")]
    pub timeout_s: u64,
    /// Environment variable holding the bearer token.
    #[serde(default = "default_key_env")]
    pub api_key_env: String,
    #[serde(default = "default_in_flight")]
    pub max_in_flight: usize,
}

fn default_timeout() -> u64 {
    60
}

fn default_key_env() -> String {
    "OPENAI_API_KEY".into()
}

fn default_in_flight() -> usize {
    2
}

impl EndpointConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }
}

pub fn prompt_hash(prompt: &str) -> String {
    hex::encode(Sha256::digest(prompt.as_bytes()))
}

fn response_path(dir: &Path, prompt: &str) -> PathBuf {
    dir.join(format!("{}.txt", prompt_hash(prompt)))
}

pub fn replay_response(dir: &Path, prompt: &str) -> Result<String> {
    let path = response_path(dir, prompt);
    std::fs::read_to_string(&path).map_err(|_| Error::MissingResponse(path.display().to_string()))
}

pub fn store_response(dir: &Path, prompt: &str, text: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = response_path(dir, prompt);
    std::fs::write(&path, text)?;
    Ok(path)
}

#[cfg(feature = "http")]
fn excerpt(body: &str) -> String {
    body.chars().take(500).collect()
}

/// One single-turn request; returns the first choice's message text.
#[cfg(feature = "http")]
pub fn chat_completion(cfg: &EndpointConfig, prompt: &str) -> Result<String> {
    let key = std::env::var(&cfg.api_key_env)
        .map_err(|_| Error::Config(format!("environment variable {} is not set", cfg.api_key_env)))?;
    let client = reqwest::blocking::Client::builder()
        .timeout(std::time::Duration::from_secs(cfg.timeout_s))
        .build()
        .map_err(|e| Error::Network(e.to_string()))?;
    let body = serde_json::json!({
        "model": cfg.model,
        "temperature": cfg.temperature,
        "messages": [{"role": "user", "content": prompt}],
    });
    let url = format!("{}/chat/completions", cfg.base_url.trim_end_matches('/'));
    let resp =
        client.post(&url).bearer_auth(key).json(&body).send().map_err(|e| Error::Network(e.to_string()))?;
    let status = resp.status().as_u16();
    let text = resp.text().map_err(|e| Error::Network(e.to_string()))?;
    match status {
        200..=299 => {}
        401 | 403 => return Err(Error::AuthError { status, body: excerpt(&text) }),
        _ => return Err(Error::HttpError { status, body: excerpt(&text) }),
    }
    let doc: serde_json::Value = serde_json::from_str(&text)?;
    doc["choices"][0]["message"]["content"]
        .as_str()
        .map(str::to_owned)
        .ok_or_else(|| Error::MissingResponse(format!("no message content in {}", excerpt(&text))))
}

/// Sends several prompts with at most `max_in_flight` requests open; results
/// are keyed by prompt hash.
#[cfg(feature = "http")]
pub fn chat_many(
    cfg: &EndpointConfig,
    prompts: &[String],
) -> Result<std::collections::BTreeMap<String, Result<String>>> {
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.max_in_flight.max(1))
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    Ok(pool.install(|| prompts.par_iter().map(|p| (prompt_hash(p), chat_completion(cfg, p))).collect()))
}
