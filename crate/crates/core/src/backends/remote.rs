//! Blocking HTTP client for the scoring wire protocol.
//!
//! | route | request | response |
//! |---|---|---|
//! | `POST /v1/tokenize` | `{text}` | `{tokens:[{id,surface,word_index,char_start,char_end}]}` |
//! | `POST /v1/causal_logprobs` | `{text}` | `{logprobs:[number\|null], base}` |
//! | `POST /v1/masked_logprob` | `{token_ids, masked_positions, target_position}` | `{logprob, base}` |
//! | `POST /v1/masked_logprob_batch` (optional) | `{token_ids, queries:[{masked_positions,target_position}]}` | `{logprobs, base}` |
//! | `GET /v1/identity` | | `{name, revision, supported_modes, base}` |
//!
//! `base` is one of `natural`, `base2`, `base10` (`e`, `2`, `10` are also
//! accepted). Values are converted to natural log on arrival. When the
//! batch route answers 404 or 405 the client switches to per-query calls
//! for the rest of its life.
//!
//! An OpenAI-compatible completion server that echoes prompt logprobs can be
//! adapted by a small proxy exposing `/v1/tokenize` and
//! `/v1/causal_logprobs`; masked queries have no such equivalent.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Condvar, Mutex};
use std::time::Duration;

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{Backend, BackendIdentity, CausalScorer, LogBase, MaskedScorer};
use crate::error::BackendError;
use crate::scoring::{MaskQuery, Token};

/// Bearer token sent with every request when set.
pub const TOKEN_ENV: &str = "RELPROBE_API_TOKEN";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetryPolicy {
    pub attempts: u32,
    pub base_delay: Duration,
    pub factor: f64,
    pub jitter: bool,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            attempts: 3,
            base_delay: Duration::from_millis(250),
            factor: 2.0,
            jitter: true,
        }
    }
}

impl RetryPolicy {
    /// Delay before retry number `retry` (1-based).
    pub fn delay(&self, retry: u32) -> Duration {
        let mut d = self.base_delay.as_secs_f64() * self.factor.powi(retry as i32 - 1);
        if self.jitter {
            d *= rand::thread_rng().gen_range(0.5..1.5);
        }
        Duration::from_secs_f64(d)
    }
}

#[derive(Debug, Clone)]
pub struct ClientOptions {
    pub retry: RetryPolicy,
    pub timeout: Duration,
    pub max_in_flight: usize,
    pub token: Option<String>,
}

impl Default for ClientOptions {
    fn default() -> Self {
        ClientOptions {
            retry: RetryPolicy::default(),
            timeout: Duration::from_secs(60),
            max_in_flight: 16,
            token: std::env::var(TOKEN_ENV).ok().filter(|t| !t.is_empty()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemoteIdentity {
    pub name: String,
    pub revision: String,
    #[serde(default)]
    pub supported_modes: Vec<String>,
    pub base: String,
}

pub fn parse_base(s: &str) -> Result<LogBase, BackendError> {
    match s.to_ascii_lowercase().as_str() {
        "natural" | "e" | "ln" => Ok(LogBase::Natural),
        "base2" | "2" | "log2" => Ok(LogBase::Base2),
        "base10" | "10" | "log10" => Ok(LogBase::Base10),
        other => Err(BackendError::Protocol(format!("unknown logprob base {other:?}"))),
    }
}

/// Counting semaphore bounding concurrent requests.
#[derive(Debug)]
struct Gate {
    free: Mutex<usize>,
    cv: Condvar,
}

struct Permit<'a>(&'a Gate);

impl Gate {
    fn new(n: usize) -> Self {
        Gate {
            free: Mutex::new(n.max(1)),
            cv: Condvar::new(),
        }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut free = self.free.lock().unwrap();
        while *free == 0 {
            free = self.cv.wait(free).unwrap();
        }
        *free -= 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().unwrap() += 1;
        self.0.cv.notify_one();
    }
}

pub struct RemoteClient {
    base_url: String,
    agent: ureq::Agent,
    options: ClientOptions,
    identity: BackendIdentity,
    supported_modes: Vec<String>,
    gate: Gate,
    batch_missing: AtomicBool,
}

#[derive(Deserialize)]
struct TokenizeResponse {
    tokens: Vec<Token>,
}

#[derive(Deserialize)]
struct CausalResponse {
    logprobs: Vec<Option<f64>>,
    base: Option<String>,
}

#[derive(Deserialize)]
struct MaskedResponse {
    logprob: f64,
    base: Option<String>,
}

#[derive(Deserialize)]
struct BatchResponse {
    logprobs: Vec<f64>,
    base: Option<String>,
}

enum Failure {
    Retryable(String),
    Fatal(BackendError),
}

impl RemoteClient {
    /// Connects and fetches `/v1/identity`.
    pub fn connect(base_url: &str, options: ClientOptions) -> Result<Self, BackendError> {
        let mut client = Self::with_identity(base_url, BackendIdentity::new("", ""), options);
        let id: RemoteIdentity = serde_json::from_value(client.request("GET", "/v1/identity", None)?)
            .map_err(|e| BackendError::Protocol(format!("identity: {e}")))?;
        client.identity = BackendIdentity {
            name: id.name,
            revision: id.revision,
            logprob_base: parse_base(&id.base)?,
        };
        client.supported_modes = id.supported_modes;
        Ok(client)
    }

    /// Builds a client without contacting the server, e.g. when every query
    /// is expected to be answered from cache.
    pub fn with_identity(base_url: &str, identity: BackendIdentity, options: ClientOptions) -> Self {
        let agent = ureq::AgentBuilder::new().timeout(options.timeout).build();
        RemoteClient {
            base_url: base_url.trim_end_matches('/').to_string(),
            agent,
            gate: Gate::new(options.max_in_flight),
            options,
            identity,
            supported_modes: Vec::new(),
            batch_missing: AtomicBool::new(false),
        }
    }

    pub fn base_url(&self) -> &str {
        &self.base_url
    }

    pub fn supported_modes(&self) -> &[String] {
        &self.supported_modes
    }

    fn once(&self, method: &str, path: &str, body: Option<&Value>) -> Result<Value, Failure> {
        let _permit = self.gate.acquire();
        let mut req = self.agent.request(method, &format!("{}{}", self.base_url, path));
        if let Some(t) = &self.options.token {
            req = req.set("Authorization", &format!("Bearer {t}"));
        }
        let resp = match body {
            Some(b) => req.send_json(b),
            None => req.call(),
        };
        match resp {
            Ok(r) => r
                .into_json::<Value>()
                .map_err(|e| Failure::Fatal(BackendError::Protocol(format!("{path}: bad body: {e}")))),
            Err(ureq::Error::Status(status, r)) => {
                let body = r.into_string().unwrap_or_default();
                if status == 429 || status >= 500 {
                    Failure::Retryable(format!("HTTP {status}: {body}")).into_err()
                } else {
                    Failure::Fatal(BackendError::Status { status, body }).into_err()
                }
            }
            Err(ureq::Error::Transport(t)) => Failure::Retryable(t.to_string()).into_err(),
        }
    }

    fn request(&self, method: &str, path: &str, body: Option<&Value>) -> Result<Value, BackendError> {
        let attempts = self.options.retry.attempts.max(1);
        let mut last = String::new();
        for attempt in 1..=attempts {
            match self.once(method, path, body) {
                Ok(v) => return Ok(v),
                Err(Failure::Fatal(e)) => return Err(e),
                Err(Failure::Retryable(msg)) => {
                    log::debug!("{path} attempt {attempt}/{attempts} failed: {msg}");
                    last = msg;
                    if attempt < attempts {
                        std::thread::sleep(self.options.retry.delay(attempt));
                    }
                }
            }
        }
        Err(BackendError::Transport {
            attempts,
            message: format!("{path}: {last}"),
        })
    }

    fn post<T: for<'de> Deserialize<'de>>(&self, path: &str, body: Value) -> Result<T, BackendError> {
        let v = self.request("POST", path, Some(&body))?;
        serde_json::from_value(v).map_err(|e| BackendError::Protocol(format!("{path}: {e}")))
    }

    fn base_of(&self, declared: Option<&str>) -> Result<LogBase, BackendError> {
        declared.map_or(Ok(self.identity.logprob_base), parse_base)
    }

    /// Rejects non-UTF-8 input before anything is sent.
    pub fn tokenize_bytes(&self, bytes: &[u8]) -> Result<Vec<Token>, BackendError> {
        let text = std::str::from_utf8(bytes)
            .map_err(|e| BackendError::Precondition(format!("text is not valid UTF-8: {e}")))?;
        self.tokenize(text)
    }
}

impl Failure {
    fn into_err<T>(self) -> Result<T, Failure> {
        Err(self)
    }
}

/// Offsets must be ordered, non-overlapping and inside the text, and every
/// non-whitespace character must belong to some token.
pub fn check_token_offsets(text: &str, tokens: &[Token]) -> Result<(), BackendError> {
    let chars: Vec<char> = text.chars().collect();
    let mut cursor = 0usize;
    let mut prev_word = 0usize;
    for (i, t) in tokens.iter().enumerate() {
        if t.char_start >= t.char_end || t.char_end > chars.len() || t.char_start < cursor {
            return Err(BackendError::Protocol(format!(
                "token {i} has invalid offsets [{}, {}) for a {}-char text",
                t.char_start,
                t.char_end,
                chars.len()
            )));
        }
        if i > 0 && t.word_index < prev_word {
            return Err(BackendError::Protocol(format!("token {i} word index decreases")));
        }
        if let Some(p) = (cursor..t.char_start).find(|&p| !chars[p].is_whitespace()) {
            return Err(BackendError::Protocol(format!("offset gap: character {p} is not covered")));
        }
        cursor = t.char_end;
        prev_word = t.word_index;
    }
    if let Some(p) = (cursor..chars.len()).find(|&p| !chars[p].is_whitespace()) {
        return Err(BackendError::Protocol(format!("offset gap: character {p} is not covered")));
    }
    Ok(())
}

impl Backend for RemoteClient {
    fn identity(&self) -> &BackendIdentity {
        &self.identity
    }

    fn tokenize(&self, text: &str) -> Result<Vec<Token>, BackendError> {
        let r: TokenizeResponse = self.post("/v1/tokenize", json!({ "text": text }))?;
        check_token_offsets(text, &r.tokens)?;
        Ok(r.tokens)
    }
}

impl CausalScorer for RemoteClient {
    fn causal_logprobs(&self, text: &str) -> Result<Vec<Option<f64>>, BackendError> {
        let r: CausalResponse = self.post("/v1/causal_logprobs", json!({ "text": text }))?;
        let base = self.base_of(r.base.as_deref())?;
        Ok(r.logprobs.into_iter().map(|v| v.map(|x| base.to_natural(x))).collect())
    }
}

impl MaskedScorer for RemoteClient {
    fn masked_logprob(&self, token_ids: &[u32], query: &MaskQuery) -> Result<f64, BackendError> {
        query.check(token_ids.len()).map_err(BackendError::Precondition)?;
        let r: MaskedResponse = self.post(
            "/v1/masked_logprob",
            json!({
                "token_ids": token_ids,
                "masked_positions": query.masked_positions,
                "target_position": query.target_position,
            }),
        )?;
        Ok(self.base_of(r.base.as_deref())?.to_natural(r.logprob))
    }

    fn masked_logprobs(&self, token_ids: &[u32], queries: &[MaskQuery]) -> Result<Vec<f64>, BackendError> {
        for q in queries {
            q.check(token_ids.len()).map_err(BackendError::Precondition)?;
        }
        if queries.len() > 1 && !self.batch_missing.load(Ordering::Relaxed) {
            let body = json!({ "token_ids": token_ids, "queries": queries });
            match self.post::<BatchResponse>("/v1/masked_logprob_batch", body) {
                Ok(r) => {
                    if r.logprobs.len() != queries.len() {
                        return Err(BackendError::Protocol(format!(
                            "batch returned {} values for {} queries",
                            r.logprobs.len(),
                            queries.len()
                        )));
                    }
                    let base = self.base_of(r.base.as_deref())?;
                    return Ok(r.logprobs.into_iter().map(|x| base.to_natural(x)).collect());
                }
                Err(BackendError::Status { status: 404 | 405, .. }) => {
                    log::info!("{}: no batch endpoint, using per-query calls", self.base_url);
                    self.batch_missing.store(true, Ordering::Relaxed);
                }
                Err(e) => return Err(e),
            }
        }
        queries.iter().map(|q| self.masked_logprob(token_ids, q)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tok(s: usize, e: usize, w: usize) -> Token {
        Token {
            id: 0,
            surface: String::new(),
            word_index: w,
            char_start: s,
            char_end: e,
        }
    }

    #[test]
    fn offsets() {
        assert!(check_token_offsets("", &[]).is_ok());
        assert!(check_token_offsets("ab cd", &[tok(0, 2, 0), tok(3, 5, 1)]).is_ok());
        assert!(check_token_offsets("ab cd", &[tok(0, 2, 0), tok(4, 5, 1)]).is_err());
        assert!(check_token_offsets("ab cd", &[tok(0, 2, 0)]).is_err());
        assert!(check_token_offsets("ab", &[tok(0, 3, 0)]).is_err());
    }

    #[test]
    fn bases() {
        assert_eq!(parse_base("base2").unwrap(), LogBase::Base2);
        assert_eq!(parse_base("10").unwrap(), LogBase::Base10);
        assert!(parse_base("base7").is_err());
    }

    #[test]
    fn backoff_grows() {
        let p = RetryPolicy {
            jitter: false,
            ..RetryPolicy::default()
        };
        assert_eq!(p.delay(1), Duration::from_millis(250));
        assert_eq!(p.delay(2), Duration::from_millis(500));
        let j = RetryPolicy::default().delay(1);
        assert!(j >= Duration::from_millis(125) && j < Duration::from_millis(375));
    }

    #[test]
    fn local_preconditions() {
        let c = RemoteClient::with_identity("http://127.0.0.1:9", BackendIdentity::new("x", "y"), ClientOptions::default());
        assert!(matches!(c.tokenize_bytes(&[0xff, 0xfe]), Err(BackendError::Precondition(_))));
        let q = MaskQuery { masked_positions: vec![1], target_position: 2 };
        assert!(matches!(c.masked_logprob(&[1, 2, 3], &q), Err(BackendError::Precondition(_))));
    }
}
