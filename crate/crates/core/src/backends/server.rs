//! Serves any in-process scorer over the wire protocol. Handy for examples
//! and for exercising the remote client end to end without a model server.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::Duration;

use serde::Deserialize;
use serde_json::{json, Value};
use tiny_http::{Header, Method, Response, Server};

use super::{BackendIdentity, CausalScorer, LogBase, MaskedScorer};
use crate::error::BackendError;
use crate::scoring::MaskQuery;

/// Anything that can answer both causal and masked queries.
pub trait FullScorer: CausalScorer + MaskedScorer {}
impl<T: CausalScorer + MaskedScorer + ?Sized> FullScorer for T {}

#[derive(Debug, Clone)]
pub struct ServerOptions {
    /// Base the served values are expressed in.
    pub base: LogBase,
    pub batch: bool,
    /// Answer the first N requests with 503.
    pub fail_first: usize,
    pub delay: Option<Duration>,
    pub threads: usize,
}

impl Default for ServerOptions {
    fn default() -> Self {
        ServerOptions {
            base: LogBase::Natural,
            batch: true,
            fail_first: 0,
            delay: None,
            threads: 8,
        }
    }
}

pub struct ProtocolServer {
    server: Arc<Server>,
    url: String,
    requests: Arc<AtomicUsize>,
    workers: Vec<JoinHandle<()>>,
}

#[derive(Deserialize)]
struct TextBody {
    text: String,
}

#[derive(Deserialize)]
struct MaskedBody {
    token_ids: Vec<u32>,
    masked_positions: Vec<usize>,
    target_position: usize,
}

#[derive(Deserialize)]
struct BatchBody {
    token_ids: Vec<u32>,
    queries: Vec<MaskQuery>,
}

struct Ctx {
    scorer: Arc<dyn FullScorer>,
    identity: BackendIdentity,
    options: ServerOptions,
    requests: Arc<AtomicUsize>,
}

impl ProtocolServer {
    /// Binds an ephemeral port on 127.0.0.1.
    pub fn start(scorer: Arc<dyn FullScorer>, options: ServerOptions) -> std::io::Result<Self> {
        Self::bind("127.0.0.1:0", scorer, options)
    }

    pub fn bind(addr: &str, scorer: Arc<dyn FullScorer>, options: ServerOptions) -> std::io::Result<Self> {
        let server = Arc::new(Server::http(addr).map_err(std::io::Error::other)?);
        let port = server
            .server_addr()
            .to_ip()
            .map(|a| a.port())
            .ok_or_else(|| std::io::Error::other("not an IP listener"))?;
        let mut identity = scorer.identity().clone();
        identity.logprob_base = options.base;
        let requests = Arc::new(AtomicUsize::new(0));
        let ctx = Arc::new(Ctx {
            scorer,
            identity,
            requests: requests.clone(),
            options,
        });
        let workers = (0..ctx.options.threads.max(1))
            .map(|_| {
                let server = server.clone();
                let ctx = ctx.clone();
                std::thread::spawn(move || {
                    for req in server.incoming_requests() {
                        handle(&ctx, req);
                    }
                })
            })
            .collect();
        Ok(ProtocolServer {
            server,
            url: format!("http://127.0.0.1:{port}"),
            requests,
            workers,
        })
    }

    pub fn url(&self) -> &str {
        &self.url
    }

    pub fn request_count(&self) -> usize {
        self.requests.load(Ordering::SeqCst)
    }
}

impl Drop for ProtocolServer {
    fn drop(&mut self) {
        for _ in &self.workers {
            self.server.unblock();
        }
        for w in self.workers.drain(..) {
            let _ = w.join();
        }
    }
}

fn handle(ctx: &Ctx, mut req: tiny_http::Request) {
    let n = ctx.requests.fetch_add(1, Ordering::SeqCst);
    if let Some(d) = ctx.options.delay {
        std::thread::sleep(d);
    }
    let (status, body) = if n < ctx.options.fail_first {
        (503, json!({ "error": "warming up" }))
    } else {
        let mut raw = String::new();
        match req.as_reader().read_to_string(&mut raw) {
            Ok(_) => route(ctx, req.method(), req.url(), &raw),
            Err(e) => (400, json!({ "error": e.to_string() })),
        }
    };
    let header = Header::from_bytes("Content-Type", "application/json").unwrap();
    let resp = Response::from_string(body.to_string())
        .with_status_code(status)
        .with_header(header);
    let _ = req.respond(resp);
}

fn parse<T: for<'de> Deserialize<'de>>(raw: &str) -> Result<T, (u16, Value)> {
    serde_json::from_str(raw).map_err(|e| (400, json!({ "error": e.to_string() })))
}

fn failed(e: BackendError) -> (u16, Value) {
    let status = match e {
        BackendError::Precondition(_) | BackendError::UnknownText(_) => 422,
        _ => 500,
    };
    (status, json!({ "error": e.to_string() }))
}

fn route(ctx: &Ctx, method: &Method, url: &str, raw: &str) -> (u16, Value) {
    let base = ctx.options.base;
    let base_name = match base {
        LogBase::Natural => "natural",
        LogBase::Base2 => "base2",
        LogBase::Base10 => "base10",
    };
    let out: Result<Value, (u16, Value)> = match (method, url) {
        (Method::Get, "/v1/identity") => Ok(json!({
            "name": ctx.identity.name,
            "revision": ctx.identity.revision,
            "supported_modes": ["causal", "masked"],
            "base": base_name,
        })),
        (Method::Post, "/v1/tokenize") => parse::<TextBody>(raw).and_then(|b| {
            ctx.scorer
                .tokenize(&b.text)
                .map(|t| json!({ "tokens": t }))
                .map_err(failed)
        }),
        (Method::Post, "/v1/causal_logprobs") => parse::<TextBody>(raw).and_then(|b| {
            ctx.scorer
                .causal_logprobs(&b.text)
                .map(|v| {
                    let v: Vec<Option<f64>> = v.into_iter().map(|x| x.map(|x| base.from_natural(x))).collect();
                    json!({ "logprobs": v, "base": base_name })
                })
                .map_err(failed)
        }),
        (Method::Post, "/v1/masked_logprob") => parse::<MaskedBody>(raw).and_then(|b| {
            let q = MaskQuery {
                masked_positions: b.masked_positions,
                target_position: b.target_position,
            };
            ctx.scorer
                .masked_logprob(&b.token_ids, &q)
                .map(|x| json!({ "logprob": base.from_natural(x), "base": base_name }))
                .map_err(failed)
        }),
        (Method::Post, "/v1/masked_logprob_batch") if ctx.options.batch => parse::<BatchBody>(raw).and_then(|b| {
            ctx.scorer
                .masked_logprobs(&b.token_ids, &b.queries)
                .map(|v| {
                    let v: Vec<f64> = v.into_iter().map(|x| base.from_natural(x)).collect();
                    json!({ "logprobs": v, "base": base_name })
                })
                .map_err(failed)
        }),
        _ => Err((404, json!({ "error": format!("no route {method} {url}") }))),
    };
    match out {
        Ok(v) => (200, v),
        Err(e) => e,
    }
}
