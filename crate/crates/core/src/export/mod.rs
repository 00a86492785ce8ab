//! Everything a run writes: manifest, CSV tables, JSON document, PNG figure, HTML report.
//!
//! Each format is rendered from one immutable [`Snapshot`].

pub mod audit;
pub mod csv;
pub mod html;
pub mod image;
pub mod json;
pub mod manifest;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::ExportFormat;
use crate::error::Result;
use crate::features::{Peak, Ridge, Vein};
use crate::harmonic::{build_graph, HarmonicGraph, SelectionState};
use crate::transforms::{Method, SpectralResult};

pub use audit::{audit_assumptions, AuditContext, AuditWarning, RuleSet};
pub use csv::{export_csv, format_sig6, grid_csv, PEAKS_HEADER, RATIOS_HEADER};
pub use html::export_html;
pub use image::{export_image, render_grid_image, AxesRegion, ImageLayout};
pub use json::{export_json, import_json, plot_json, SCHEMA_VERSION};
pub use manifest::{InputDigest, ManifestEntry, ParameterManifest, Provenance, TOOL_VERSION};

/// One spectrum of one clip, with the features found on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plot {
    pub plot_id: String,
    pub clip_id: String,
    pub spectral: SpectralResult,
    pub peaks: Vec<Peak>,
    pub ridge: Option<Ridge>,
    pub veins: Vec<Vein>,
}

impl Plot {
    pub fn make_id(clip_id: &str, method: Method) -> String {
        format!("{clip_id}:{method}")
    }

    pub fn method(&self) -> Method {
        self.spectral.method
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub manifest: ParameterManifest,
    pub plots: Vec<Plot>,
    pub state: SelectionState,
    pub graph: HarmonicGraph,
}

impl Snapshot {
    /// Builds the graph from `state`.
    pub fn new(manifest: ParameterManifest, plots: Vec<Plot>, state: SelectionState, integer_tolerance: f64) -> Result<Self> {
        let graph = build_graph(&state, integer_tolerance)?;
        Ok(Snapshot {
            manifest,
            plots,
            state,
            graph,
        })
    }

    pub fn empty(manifest: ParameterManifest) -> Self {
        Snapshot {
            manifest,
            plots: Vec::new(),
            state: SelectionState::new(),
            graph: HarmonicGraph::default(),
        }
    }

    pub fn plot(&self, plot_id: &str) -> Option<&Plot> {
        self.plots.iter().find(|p| p.plot_id == plot_id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExportOptions {
    /// When false, plots carry only the linear scale; import rebuilds dB.
    pub include_psd_db: bool,
}

impl Default for ExportOptions {
    fn default() -> Self {
        ExportOptions { include_psd_db: true }
    }
}

pub const CSV_FILE: &str = "results.csv";
pub const JSON_FILE: &str = "results.json";
pub const PNG_FILE: &str = "results.png";
pub const HTML_FILE: &str = "report.html";
pub const MANIFEST_FILE: &str = "manifest.json";

/// The rendered outputs of one snapshot.
#[derive(Debug, Clone, Default)]
pub struct ExportBundle {
    pub csv: Option<String>,
    pub json: Option<String>,
    pub png: Option<Vec<u8>>,
    pub html: Option<String>,
    pub manifest: String,
}

impl ExportBundle {
    pub fn render(
        snapshot: &Snapshot,
        formats: &BTreeSet<ExportFormat>,
        opts: ExportOptions,
        ui_bundle: Option<&str>,
    ) -> Result<Self> {
        let json = export_json(snapshot, opts);
        Ok(ExportBundle {
            csv: formats.contains(&ExportFormat::Csv).then(|| export_csv(snapshot)),
            png: match formats.contains(&ExportFormat::Png) {
                true => Some(export_image(snapshot)?.0),
                false => None,
            },
            html: formats
                .contains(&ExportFormat::Html)
                .then(|| export_html(snapshot, &json, ui_bundle)),
            json: formats.contains(&ExportFormat::Json).then_some(json),
            manifest: manifest_json(&snapshot.manifest),
        })
    }

    /// Writes every rendered file into `dir` and returns their paths.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let mut put = |name: &str, bytes: &[u8]| -> Result<()> {
            let path = dir.join(name);
            std::fs::write(&path, bytes)?;
            written.push(path);
            Ok(())
        };
        if let Some(csv) = &self.csv {
            put(CSV_FILE, csv.as_bytes())?;
        }
        if let Some(json) = &self.json {
            put(JSON_FILE, json.as_bytes())?;
        }
        if let Some(png) = &self.png {
            put(PNG_FILE, png)?;
        }
        if let Some(html) = &self.html {
            put(HTML_FILE, html.as_bytes())?;
        }
        put(MANIFEST_FILE, self.manifest.as_bytes())?;
        Ok(written)
    }
}

pub fn manifest_json(manifest: &ParameterManifest) -> String {
    let mut s = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    s.push('\n');
    s
}

pub fn read_manifest(path: &Path) -> Result<ParameterManifest> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| crate::Error::Import(format!("{}: {e}", path.display())))
}
