//! Persistent score cache.
//!
//! The file is JSON Lines, one record per line:
//!
//! ```text
//! {"key_digest":"<64 hex>","payload_kind":"causal","value":[-1.5,null],"created_at":1700000000}
//! ```
//!
//! `key_digest` is the lowercase hex SHA-256 of the compact JSON object
//! `{"kind":..,"name":..,"payload":..,"revision":..}` with keys in sorted
//! order, where `name`/`revision` are the backend identity and `payload` is
//! the request body (`{"text":..}` for tokenize and causal, the masked
//! query fields for masked). Values are the natural-log results exactly as
//! the engine saw them.
//!
//! Records are only ever appended. Opening a store rebuilds the in-memory
//! index, skips unreadable lines with a warning and rewrites the file
//! sorted by key.

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::{Backend, BackendIdentity, CausalScorer, MaskedScorer};
use crate::error::{BackendError, Error, Result};
use crate::scoring::{MaskQuery, Token};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PayloadKind {
    Tokenize,
    Causal,
    Masked,
    /// Last identity reported by a remote endpoint, keyed by URL.
    Identity,
}

impl PayloadKind {
    fn as_str(self) -> &'static str {
        match self {
            PayloadKind::Tokenize => "tokenize",
            PayloadKind::Causal => "causal",
            PayloadKind::Masked => "masked",
            PayloadKind::Identity => "identity",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum CacheValue {
    Tokens(Vec<Token>),
    Logprobs(Vec<Option<f64>>),
    Logprob(f64),
    Identity(BackendIdentity),
}

impl CacheValue {
    fn decode(kind: PayloadKind, value: Value) -> serde_json::Result<Self> {
        Ok(match kind {
            PayloadKind::Tokenize => CacheValue::Tokens(serde_json::from_value(value)?),
            PayloadKind::Causal => CacheValue::Logprobs(serde_json::from_value(value)?),
            PayloadKind::Masked => CacheValue::Logprob(serde_json::from_value(value)?),
            PayloadKind::Identity => CacheValue::Identity(serde_json::from_value(value)?),
        })
    }

    fn kind(&self) -> PayloadKind {
        match self {
            CacheValue::Tokens(_) => PayloadKind::Tokenize,
            CacheValue::Logprobs(_) => PayloadKind::Causal,
            CacheValue::Logprob(_) => PayloadKind::Masked,
            CacheValue::Identity(_) => PayloadKind::Identity,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CacheEntry {
    pub key_digest: String,
    pub payload_kind: PayloadKind,
    pub value: CacheValue,
    pub created_at: u64,
}

#[derive(Deserialize)]
struct RawEntry {
    key_digest: String,
    payload_kind: PayloadKind,
    value: Value,
    #[serde(default)]
    created_at: u64,
}

pub fn cache_key(identity: &BackendIdentity, kind: PayloadKind, payload: &Value) -> String {
    // serde_json's default map is ordered, so this serialization is canonical
    let canonical = json!({
        "kind": kind.as_str(),
        "name": identity.name,
        "payload": payload,
        "revision": identity.revision,
    });
    hex::encode(Sha256::digest(canonical.to_string().as_bytes()))
}

#[derive(Debug)]
pub struct CacheStore {
    path: PathBuf,
    index: RwLock<HashMap<String, CacheEntry>>,
    log: Mutex<BufWriter<File>>,
}

impl CacheStore {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        let mut index = HashMap::new();
        if path.exists() {
            let f = File::open(&path).map_err(|e| Error::io(&path, e))?;
            for (n, line) in BufReader::new(f).lines().enumerate() {
                let line = line.map_err(|e| Error::io(&path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                let parsed = serde_json::from_str::<RawEntry>(&line).and_then(|raw| {
                    let value = CacheValue::decode(raw.payload_kind, raw.value)?;
                    Ok(CacheEntry {
                        key_digest: raw.key_digest,
                        payload_kind: raw.payload_kind,
                        value,
                        created_at: raw.created_at,
                    })
                });
                match parsed {
                    Ok(e) => {
                        index.insert(e.key_digest.clone(), e);
                    }
                    Err(err) => log::warn!("{}:{}: skipping corrupt cache entry: {err}", path.display(), n + 1),
                }
            }
            Self::compact(&path, &index)?;
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| Error::io(&path, e))?;
        Ok(CacheStore {
            path,
            index: RwLock::new(index),
            log: Mutex::new(BufWriter::new(file)),
        })
    }

    fn compact(path: &Path, index: &HashMap<String, CacheEntry>) -> Result<()> {
        let tmp = path.with_extension("compact.tmp");
        let mut keys: Vec<&String> = index.keys().collect();
        keys.sort();
        let mut w = BufWriter::new(File::create(&tmp).map_err(|e| Error::io(&tmp, e))?);
        for k in keys {
            serde_json::to_writer(&mut w, &index[k])?;
            w.write_all(b"\n").map_err(|e| Error::io(&tmp, e))?;
        }
        w.into_inner()
            .map_err(|e| Error::io(&tmp, e.into_error()))?
            .sync_all()
            .map_err(|e| Error::io(&tmp, e))?;
        fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn len(&self) -> usize {
        self.index.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, key: &str) -> Option<CacheValue> {
        self.index.read().unwrap().get(key).map(|e| e.value.clone())
    }

    pub fn put(&self, key: String, value: CacheValue) -> Result<()> {
        self.put_many(vec![(key, value)])
    }

    /// Appends and flushes once. Keys already present are not rewritten:
    /// values are deterministic, so the first write already holds them.
    pub fn put_many(&self, items: Vec<(String, CacheValue)>) -> Result<()> {
        let created_at = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let mut fresh = Vec::new();
        {
            let mut index = self.index.write().unwrap();
            for (key, value) in items {
                if index.contains_key(&key) {
                    continue;
                }
                let entry = CacheEntry {
                    key_digest: key.clone(),
                    payload_kind: value.kind(),
                    value,
                    created_at,
                };
                fresh.push(serde_json::to_string(&entry)?);
                index.insert(key, entry);
            }
        }
        if fresh.is_empty() {
            return Ok(());
        }
        let mut log = self.log.lock().unwrap();
        for line in fresh {
            log.write_all(line.as_bytes())
                .and_then(|_| log.write_all(b"\n"))
                .map_err(|e| Error::io(&self.path, e))?;
        }
        log.flush().map_err(|e| Error::io(&self.path, e))
    }

    pub fn remember_identity(&self, url: &str, identity: &BackendIdentity) -> Result<()> {
        self.put(Self::identity_key(url), CacheValue::Identity(identity.clone()))
    }

    pub fn recall_identity(&self, url: &str) -> Option<BackendIdentity> {
        match self.get(&Self::identity_key(url)) {
            Some(CacheValue::Identity(id)) => Some(id),
            _ => None,
        }
    }

    fn identity_key(url: &str) -> String {
        hex::encode(Sha256::digest(format!("identity\0{url}").as_bytes()))
    }
}

/// Serves repeated queries from a [`CacheStore`] and forwards misses.
pub struct CachedScorer<'c, S> {
    inner: S,
    store: &'c CacheStore,
}

impl<'c, S: Backend> CachedScorer<'c, S> {
    pub fn new(inner: S, store: &'c CacheStore) -> Self {
        CachedScorer { inner, store }
    }

    pub fn inner(&self) -> &S {
        &self.inner
    }

    fn persist(&self, key: String, value: CacheValue) {
        // a failed cache write must not lose a computed score
        if let Err(e) = self.store.put(key, value) {
            log::warn!("cache write failed: {e}");
        }
    }

    fn masked_key(&self, token_ids: &[u32], q: &MaskQuery) -> String {
        cache_key(
            self.inner.identity(),
            PayloadKind::Masked,
            &json!({
                "token_ids": token_ids,
                "masked_positions": q.masked_positions,
                "target_position": q.target_position,
            }),
        )
    }
}

impl<S: Backend> Backend for CachedScorer<'_, S> {
    fn identity(&self) -> &BackendIdentity {
        self.inner.identity()
    }

    fn tokenize(&self, text: &str) -> Result<Vec<Token>, BackendError> {
        let key = cache_key(self.inner.identity(), PayloadKind::Tokenize, &json!({ "text": text }));
        if let Some(CacheValue::Tokens(t)) = self.store.get(&key) {
            return Ok(t);
        }
        let tokens = self.inner.tokenize(text)?;
        self.persist(key, CacheValue::Tokens(tokens.clone()));
        Ok(tokens)
    }
}

impl<S: CausalScorer> CausalScorer for CachedScorer<'_, S> {
    fn causal_logprobs(&self, text: &str) -> Result<Vec<Option<f64>>, BackendError> {
        let key = cache_key(self.inner.identity(), PayloadKind::Causal, &json!({ "text": text }));
        if let Some(CacheValue::Logprobs(v)) = self.store.get(&key) {
            return Ok(v);
        }
        let v = self.inner.causal_logprobs(text)?;
        self.persist(key, CacheValue::Logprobs(v.clone()));
        Ok(v)
    }
}

impl<S: MaskedScorer> MaskedScorer for CachedScorer<'_, S> {
    fn masked_logprob(&self, token_ids: &[u32], query: &MaskQuery) -> Result<f64, BackendError> {
        Ok(self.masked_logprobs(token_ids, std::slice::from_ref(query))?[0])
    }

    fn masked_logprobs(&self, token_ids: &[u32], queries: &[MaskQuery]) -> Result<Vec<f64>, BackendError> {
        let keys: Vec<String> = queries.iter().map(|q| self.masked_key(token_ids, q)).collect();
        let mut out: Vec<Option<f64>> = keys
            .iter()
            .map(|k| match self.store.get(k) {
                Some(CacheValue::Logprob(v)) => Some(v),
                _ => None,
            })
            .collect();
        let missing: Vec<usize> = (0..queries.len()).filter(|&i| out[i].is_none()).collect();
        if !missing.is_empty() {
            let batch: Vec<MaskQuery> = missing.iter().map(|&i| queries[i].clone()).collect();
            let got = self.inner.masked_logprobs(token_ids, &batch)?;
            if got.len() != batch.len() {
                return Err(BackendError::Protocol(format!(
                    "{} results for {} masked queries",
                    got.len(),
                    batch.len()
                )));
            }
            let mut writes = Vec::with_capacity(missing.len());
            for (&i, v) in missing.iter().zip(got) {
                out[i] = Some(v);
                writes.push((keys[i].clone(), CacheValue::Logprob(v)));
            }
            if let Err(e) = self.store.put_many(writes) {
                log::warn!("cache write failed: {e}");
            }
        }
        Ok(out.into_iter().map(|v| v.unwrap()).collect())
    }
}
