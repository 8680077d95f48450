use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::llm::{ChatRequest, ExchangeKey};
use super::BackendError;

/// One recorded prompt/reply pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exchange {
    pub key: ExchangeKey,
    pub request: ChatRequest,
    pub reply: String,
}

/// Content-addressed directory with one JSON document per exchange.
#[derive(Debug)]
pub struct TranscriptStore {
    dir: PathBuf,
    write_lock: Mutex<()>,
}

impl TranscriptStore {
    /// Opens `dir`, creating it when missing.
    pub fn open(dir: impl AsRef<Path>) -> Result<Self, BackendError> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir).map_err(|e| BackendError::Config(format!("{}: {e}", dir.display())))?;
        Ok(TranscriptStore { dir, write_lock: Mutex::new(()) })
    }

    /// Opens a store that must already exist.
    pub fn open_existing(dir: impl AsRef<Path>) -> Result<Self, BackendError> {
        let dir = dir.as_ref().to_path_buf();
        if !dir.is_dir() {
            return Err(BackendError::Config(format!("transcript store {} does not exist", dir.display())));
        }
        Ok(TranscriptStore { dir, write_lock: Mutex::new(()) })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path_for(&self, key: &ExchangeKey) -> PathBuf {
        self.dir.join(format!("{}.json", key.digest()))
    }

    pub fn record(&self, key: &ExchangeKey, request: &ChatRequest, reply: &str) -> Result<(), BackendError> {
        let exchange = Exchange { key: key.clone(), request: request.clone(), reply: reply.to_string() };
        let body = serde_json::to_string_pretty(&exchange).map_err(|e| BackendError::StoreCorrupt(e.to_string()))?;
        let _guard = self.write_lock.lock().unwrap_or_else(|p| p.into_inner());
        let path = self.path_for(key);
        let tmp = path.with_extension("json.tmp");
        fs::write(&tmp, body)
            .and_then(|_| fs::rename(&tmp, &path))
            .map_err(|e| BackendError::StoreCorrupt(format!("{}: {e}", path.display())))
    }

    pub fn lookup(&self, key: &ExchangeKey) -> Result<Option<Exchange>, BackendError> {
        let path = self.path_for(key);
        let body = match fs::read_to_string(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(BackendError::StoreCorrupt(format!("{}: {e}", path.display()))),
        };
        let exchange: Exchange =
            serde_json::from_str(&body).map_err(|e| BackendError::StoreCorrupt(format!("{}: {e}", path.display())))?;
        if exchange.key != *key {
            return Err(BackendError::StoreCorrupt(format!("{} holds a different exchange", path.display())));
        }
        Ok(Some(exchange))
    }

    /// Number of recorded exchanges.
    pub fn len(&self) -> usize {
        fs::read_dir(&self.dir)
            .map(|rd| rd.filter_map(Result::ok).filter(|e| e.path().extension().is_some_and(|x| x == "json")).count())
            .unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::{ChatMessage, Phase};

    fn key(attempt: usize) -> ExchangeKey {
        ExchangeKey { run_key: "abc".into(), node: 3, round: 2, phase: Phase::Update, attempt }
    }

    fn request() -> ChatRequest {
        ChatRequest {
            model: "m".into(),
            temperature: 0.0,
            messages: vec![ChatMessage { role: "user".into(), content: "hi".into() }],
        }
    }

    #[test]
    fn record_then_lookup() {
        let dir = tempfile::tempdir().unwrap();
        let store = TranscriptStore::open(dir.path()).unwrap();
        assert!(store.is_empty());
        store.record(&key(0), &request(), "reply").unwrap();
        let ex = store.lookup(&key(0)).unwrap().unwrap();
        assert_eq!(ex.reply, "reply");
        assert_eq!(ex.request, request());
        assert!(store.lookup(&key(1)).unwrap().is_none());
        assert_eq!(store.len(), 1);
    }

    #[test]
    fn garbage_file_is_corrupt() {
        let dir = tempfile::tempdir().unwrap();
        let store = TranscriptStore::open(dir.path()).unwrap();
        fs::write(dir.path().join(format!("{}.json", key(0).digest())), "{not json").unwrap();
        assert!(matches!(store.lookup(&key(0)), Err(BackendError::StoreCorrupt(_))));
    }

    #[test]
    fn open_existing_requires_directory() {
        let dir = tempfile::tempdir().unwrap();
        assert!(TranscriptStore::open_existing(dir.path().join("nope")).is_err());
        assert!(TranscriptStore::open_existing(dir.path()).is_ok());
    }
}
