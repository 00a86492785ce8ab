//! Revision-checked, file-backed session storage.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use specdesk_core::export::Snapshot;
use specdesk_core::harmonic::SelectionState;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Db,
    Linear,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ViewSettings {
    pub scale: Scale,
    /// Overlay name to visibility, e.g. `ridge`, `veins`, `graph`.
    pub overlays: BTreeMap<String, bool>,
    pub focused_plot: Option<String>,
}

/// What the front end persists between visits.
///
/// On PUT, `revision` is the revision the client last saw (0 for a new
/// session); the stored copy carries the next one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionState {
    #[serde(default)]
    pub session_id: String,
    pub revision: u64,
    pub selection: SelectionState,
    #[serde(default)]
    pub view: ViewSettings,
    /// Opaque client timestamp, stored as given.
    #[serde(default)]
    pub last_modified: Option<String>,
}

#[derive(Debug, PartialEq)]
pub enum PutError {
    BadRequest(String),
    Conflict(Box<SessionState>),
    Storage(String),
}

pub fn valid_session_id(id: &str) -> bool {
    !id.is_empty() && id.len() <= 64 && id.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'-' || b == b'_')
}

/// Rejects selections that point at plots, peaks, or orders the run lacks.
pub fn check_against_run(state: &SelectionState, snapshot: &Snapshot) -> Result<(), String> {
    let mut orders = std::collections::BTreeSet::new();
    for s in &state.selections {
        let plot = snapshot
            .plot(&s.plot_id)
            .ok_or_else(|| format!("unknown plot `{}`", s.plot_id))?;
        if s.peak.bin_index >= plot.spectral.freqs_hz.len() {
            return Err(format!("bin {} out of range for `{}`", s.peak.bin_index, s.plot_id));
        }
        if !orders.insert(s.selection_order) {
            return Err(format!("duplicate selection order {}", s.selection_order));
        }
    }
    if let Some(&max) = orders.last() {
        if state.next_order <= max {
            return Err("next_order must exceed every selection order".into());
        }
    }
    for p in &state.pairs {
        if !orders.contains(&p.order_a) || !orders.contains(&p.order_b) || p.order_a == p.order_b {
            return Err(format!("pair ({}, {}) does not reference two live selections", p.order_a, p.order_b));
        }
    }
    Ok(())
}

#[derive(Debug, Default)]
pub struct SessionStore {
    dir: Option<PathBuf>,
    sessions: Mutex<BTreeMap<String, SessionState>>,
}

impl SessionStore {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Opens (creating if needed) a session directory and loads what it holds.
    pub fn open(dir: impl Into<PathBuf>) -> std::io::Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        let mut sessions = BTreeMap::new();
        for entry in std::fs::read_dir(&dir)? {
            let path = entry?.path();
            if path.extension().is_none_or(|e| e != "json") {
                continue;
            }
            match std::fs::read_to_string(&path)
                .ok()
                .and_then(|t| serde_json::from_str::<SessionState>(&t).ok())
            {
                Some(s) if valid_session_id(&s.session_id) => {
                    sessions.insert(s.session_id.clone(), s);
                }
                _ => log::warn!("ignoring unreadable session file {}", path.display()),
            }
        }
        Ok(SessionStore {
            dir: Some(dir),
            sessions: Mutex::new(sessions),
        })
    }

    pub fn get(&self, id: &str) -> Option<SessionState> {
        self.sessions.lock().expect("session lock").get(id).cloned()
    }

    /// Stores `incoming` if its revision matches the current one.
    pub fn put(&self, id: &str, mut incoming: SessionState) -> Result<SessionState, PutError> {
        if !valid_session_id(id) {
            return Err(PutError::BadRequest(format!("bad session id `{id}`")));
        }
        if !incoming.session_id.is_empty() && incoming.session_id != id {
            return Err(PutError::BadRequest("session_id does not match the path".into()));
        }
        let mut sessions = self.sessions.lock().expect("session lock");
        let current = sessions.get(id).map_or(0, |s| s.revision);
        if incoming.revision != current {
            return Err(match sessions.get(id) {
                Some(s) => PutError::Conflict(Box::new(s.clone())),
                None => PutError::Conflict(Box::new(SessionState {
                    session_id: id.to_string(),
                    revision: 0,
                    selection: SelectionState::new(),
                    view: ViewSettings::default(),
                    last_modified: None,
                })),
            });
        }
        incoming.session_id = id.to_string();
        incoming.revision = current + 1;
        if let Some(dir) = &self.dir {
            persist(dir, &incoming).map_err(|e| PutError::Storage(e.to_string()))?;
        }
        sessions.insert(id.to_string(), incoming.clone());
        Ok(incoming)
    }
}

fn persist(dir: &Path, state: &SessionState) -> std::io::Result<()> {
    let path = dir.join(format!("{}.json", state.session_id));
    let tmp = dir.join(format!(".{}.json.tmp", state.session_id));
    std::fs::write(&tmp, serde_json::to_vec_pretty(state).expect("session serializes"))?;
    std::fs::rename(tmp, path)
}
