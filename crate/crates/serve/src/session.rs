//! In-memory session store with TTL eviction and an optional append-only
//! JSON-lines journal. Each journal line is either a full session snapshot
//! or an eviction marker; replay keeps the last line per id.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock as StdRwLock};
use std::time::{Duration, Instant};

use chrono::{DateTime, Utc};
use rand::Rng;
use serde::{Deserialize, Serialize};
use tokio::sync::RwLock;

use leafrf_core::ladder::{LoadProfile, MatchingNetwork};
use leafrf_core::rfcore::{Frequency, ReferenceImpedance};

pub const DEFAULT_TTL: Duration = Duration::from_secs(24 * 60 * 60);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    pub z0: ReferenceImpedance,
    pub f0: Frequency,
    pub load: LoadProfile,
    pub elements: MatchingNetwork,
    pub created: DateTime<Utc>,
    pub updated: DateTime<Utc>,
}

impl Session {
    pub fn new(z0: ReferenceImpedance, f0: Frequency, load: LoadProfile) -> Self {
        let now = Utc::now();
        Session { id: new_id(), z0, f0, load, elements: MatchingNetwork::empty(), created: now, updated: now }
    }

    pub fn touch(&mut self) {
        self.updated = Utc::now();
    }
}

/// 128 random bits from the thread-local CSPRNG, as 32 hex digits.
pub fn new_id() -> String {
    format!("{:032x}", rand::rng().random::<u128>())
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum JournalLine {
    Evicted { id: String, evicted: bool },
    Snapshot(Box<Session>),
}

pub struct Entry {
    pub session: RwLock<Session>,
    last_access: Mutex<Instant>,
}

impl Entry {
    fn new(s: Session) -> Self {
        Entry { session: RwLock::new(s), last_access: Mutex::new(Instant::now()) }
    }

    fn mark(&self) {
        *self.last_access.lock().expect("poisoned") = Instant::now();
    }

    fn idle_since(&self) -> Instant {
        *self.last_access.lock().expect("poisoned")
    }
}

pub struct Store {
    sessions: StdRwLock<HashMap<String, Arc<Entry>>>,
    ttl: Duration,
    journal: Option<Mutex<File>>,
}

impl Store {
    pub fn new(ttl: Duration) -> Self {
        Store { sessions: StdRwLock::new(HashMap::new()), ttl, journal: None }
    }

    /// Replays `path` (if it exists) and appends to it from then on.
    pub fn with_journal(ttl: Duration, path: &Path) -> std::io::Result<Self> {
        let mut map = HashMap::new();
        if path.exists() {
            for line in BufReader::new(File::open(path)?).lines() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                // a torn final line from a crash is skipped
                match serde_json::from_str::<JournalLine>(&line) {
                    Ok(JournalLine::Snapshot(s)) => {
                        map.insert(s.id.clone(), Arc::new(Entry::new(*s)));
                    }
                    Ok(JournalLine::Evicted { id, .. }) => {
                        map.remove(&id);
                    }
                    Err(_) => continue,
                }
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Store { sessions: StdRwLock::new(map), ttl, journal: Some(Mutex::new(file)) })
    }

    fn append(&self, line: &JournalLine) {
        if let Some(j) = &self.journal {
            let mut text = serde_json::to_string(line).expect("session serializes");
            text.push('\n');
            let mut f = j.lock().expect("poisoned");
            // the journal is best-effort; the in-memory store stays authoritative
            let _ = f.write_all(text.as_bytes()).and_then(|_| f.flush());
        }
    }

    pub fn record(&self, s: &Session) {
        self.append(&JournalLine::Snapshot(Box::new(s.clone())));
    }

    pub fn insert(&self, s: Session) -> Arc<Entry> {
        self.record(&s);
        let id = s.id.clone();
        let entry = Arc::new(Entry::new(s));
        self.sessions.write().expect("poisoned").insert(id, entry.clone());
        entry
    }

    pub fn get(&self, id: &str) -> Option<Arc<Entry>> {
        let entry = self.sessions.read().expect("poisoned").get(id).cloned()?;
        if entry.idle_since().elapsed() > self.ttl {
            self.remove(id);
            return None;
        }
        entry.mark();
        Some(entry)
    }

    pub fn remove(&self, id: &str) -> bool {
        let removed = self.sessions.write().expect("poisoned").remove(id).is_some();
        if removed {
            self.append(&JournalLine::Evicted { id: id.to_string(), evicted: true });
        }
        removed
    }

    /// Drops every session idle for longer than the TTL; returns how many.
    pub fn evict_expired(&self) -> usize {
        let expired: Vec<String> = self
            .sessions
            .read()
            .expect("poisoned")
            .iter()
            .filter(|(_, e)| e.idle_since().elapsed() > self.ttl)
            .map(|(id, _)| id.clone())
            .collect();
        expired.iter().filter(|id| self.remove(id)).count()
    }

    pub fn len(&self) -> usize {
        self.sessions.read().expect("poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn ttl(&self) -> Duration {
        self.ttl
    }
}

#[derive(Debug, Clone)]
pub struct StoreConfig {
    pub ttl: Duration,
    pub journal: Option<PathBuf>,
}

impl Default for StoreConfig {
    fn default() -> Self {
        StoreConfig { ttl: DEFAULT_TTL, journal: None }
    }
}

impl StoreConfig {
    pub fn open(&self) -> std::io::Result<Store> {
        match &self.journal {
            Some(p) => Store::with_journal(self.ttl, p),
            None => Ok(Store::new(self.ttl)),
        }
    }
}
