//! Provenance-tagged record of everything a run used.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::clip::AudioClip;
use crate::config::RunSettings;
use crate::error::{Error, Result};
use crate::export::audit::AuditWarning;
use crate::sanitize::SanitizeReport;

pub const TOOL_VERSION: &str = concat!("specdesk ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Default,
    User,
    Derived,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub value: Value,
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub clip_id: String,
    pub source_path: String,
    /// SHA-256 over the sample rate and the f32 samples.
    pub sha256: String,
    pub sample_rate_hz: u32,
    pub n_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClipSanitize {
    pub clip_id: String,
    pub report: SanitizeReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterManifest {
    pub tool_version: String,
    pub entries: Vec<ManifestEntry>,
    #[serde(default)]
    pub inputs: Vec<InputDigest>,
    #[serde(default)]
    pub sanitize: Vec<ClipSanitize>,
    #[serde(default)]
    pub assumption_audit: Vec<AuditWarning>,
}

impl Default for ParameterManifest {
    fn default() -> Self {
        Self::from_settings(&RunSettings::default(), &BTreeSet::new()).expect("default settings serialize")
    }
}

impl ParameterManifest {
    /// One entry per setting, sorted by name. Names in `user_set` are tagged `user`.
    pub fn from_settings(settings: &RunSettings, user_set: &BTreeSet<String>) -> Result<Self> {
        let Value::Object(map) = serde_json::to_value(settings).map_err(|e| Error::InvalidParams(e.to_string()))? else {
            unreachable!("settings serialize to an object");
        };
        if let Some(unknown) = user_set.iter().find(|n| !map.contains_key(n.as_str())) {
            return Err(Error::InvalidParams(format!("unknown setting `{unknown}`")));
        }
        let entries = map
            .into_iter()
            .map(|(name, value)| ManifestEntry {
                provenance: if user_set.contains(&name) {
                    Provenance::User
                } else {
                    Provenance::Default
                },
                unit: RunSettings::unit(&name).map(str::to_owned),
                name,
                value,
            })
            .collect();
        Ok(ParameterManifest {
            tool_version: TOOL_VERSION.to_owned(),
            entries,
            inputs: Vec::new(),
            sanitize: Vec::new(),
            assumption_audit: Vec::new(),
        })
    }

    /// Rebuilds settings from the non-derived entries.
    pub fn settings(&self) -> Result<(RunSettings, BTreeSet<String>)> {
        let mut map = serde_json::Map::new();
        let mut user = BTreeSet::new();
        for e in self.entries.iter().filter(|e| e.provenance != Provenance::Derived) {
            if map.insert(e.name.clone(), e.value.clone()).is_some() {
                return Err(Error::InvalidParams(format!("duplicate manifest entry `{}`", e.name)));
            }
            if e.provenance == Provenance::User {
                user.insert(e.name.clone());
            }
        }
        let settings = serde_json::from_value(Value::Object(map))
            .map_err(|e| Error::InvalidParams(format!("manifest does not describe a run: {e}")))?;
        Ok((settings, user))
    }

    pub fn entry(&self, name: &str) -> Option<&ManifestEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    /// Appends or replaces a derived entry.
    pub fn set_derived(&mut self, name: &str, value: Value, unit: Option<&str>) -> Result<()> {
        match self.entries.iter_mut().find(|e| e.name == name) {
            Some(e) if e.provenance != Provenance::Derived => {
                return Err(Error::InvalidParams(format!("`{name}` is a setting, not a derived value")))
            }
            Some(e) => e.value = value,
            None => self.entries.push(ManifestEntry {
                name: name.to_owned(),
                value,
                provenance: Provenance::Derived,
                unit: unit.map(str::to_owned),
            }),
        }
        Ok(())
    }

    pub fn record_clip(&mut self, clip: &AudioClip) {
        self.inputs.push(InputDigest {
            clip_id: clip.id.clone(),
            source_path: clip.source_path.clone(),
            sha256: clip.digest(),
            sample_rate_hz: clip.sample_rate_hz,
            n_samples: clip.samples.len(),
        });
        self.sanitize.push(ClipSanitize {
            clip_id: clip.id.clone(),
            report: clip.sanitize,
        });
    }

    pub fn sample_rates(&self) -> BTreeSet<u32> {
        self.inputs.iter().map(|i| i.sample_rate_hz).collect()
    }
}
