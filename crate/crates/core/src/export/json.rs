//! The versioned JSON document.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::export::manifest::ParameterManifest;
use crate::export::{ExportOptions, Plot, Snapshot};
use crate::features::{Peak, Ridge, Vein};
use crate::harmonic::{HarmonicGraph, Pair, PeakRef, Selection, SelectionState};
use crate::sanitize::SanitizeReport;
use crate::transforms::{to_db, Method, SpectralResult, TransformParams};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
struct PlotOut<'a> {
    plot_id: &'a str,
    clip_id: &'a str,
    method: Method,
    freqs_hz: &'a [f64],
    psd_linear: &'a [f64],
    #[serde(skip_serializing_if = "Option::is_none")]
    psd_db: Option<&'a [f64]>,
    params: &'a TransformParams,
    derived: &'a BTreeMap<String, f64>,
    sanitize: &'a SanitizeReport,
    peaks: &'a [Peak],
    ridge: Option<&'a Ridge>,
    veins: &'a [Vein],
}

impl<'a> PlotOut<'a> {
    fn new(p: &'a Plot, opts: ExportOptions) -> Self {
        let s = &p.spectral;
        PlotOut {
            plot_id: &p.plot_id,
            clip_id: &p.clip_id,
            method: s.method,
            freqs_hz: &s.freqs_hz,
            psd_linear: &s.psd_linear,
            psd_db: opts.include_psd_db.then_some(&s.psd_db[..]),
            params: &s.params,
            derived: &s.derived,
            sanitize: &s.sanitize,
            peaks: &p.peaks,
            ridge: p.ridge.as_ref(),
            veins: &p.veins,
        }
    }
}

#[derive(Deserialize)]
struct PlotIn {
    plot_id: String,
    clip_id: String,
    method: Method,
    freqs_hz: Vec<f64>,
    psd_linear: Vec<f64>,
    #[serde(default)]
    psd_db: Option<Vec<f64>>,
    params: TransformParams,
    #[serde(default)]
    derived: BTreeMap<String, f64>,
    #[serde(default)]
    sanitize: SanitizeReport,
    #[serde(default)]
    peaks: Vec<Peak>,
    #[serde(default)]
    ridge: Option<Ridge>,
    #[serde(default)]
    veins: Vec<Vein>,
}

impl From<PlotIn> for Plot {
    fn from(p: PlotIn) -> Self {
        let psd_db = p.psd_db.unwrap_or_else(|| to_db(&p.psd_linear));
        Plot {
            plot_id: p.plot_id,
            clip_id: p.clip_id,
            spectral: SpectralResult {
                method: p.method,
                freqs_hz: p.freqs_hz,
                psd_linear: p.psd_linear,
                psd_db,
                params: p.params,
                sanitize: p.sanitize,
                derived: p.derived,
            },
            peaks: p.peaks,
            ridge: p.ridge,
            veins: p.veins,
        }
    }
}

#[derive(Serialize)]
struct DocOut<'a> {
    schema: u32,
    manifest: &'a ParameterManifest,
    plots: Vec<PlotOut<'a>>,
    selections: &'a [Selection],
    pairs: &'a [Pair],
    removed: &'a BTreeSet<PeakRef>,
    next_order: u64,
    graph: &'a HarmonicGraph,
}

#[derive(Deserialize)]
struct DocIn {
    schema: u32,
    manifest: ParameterManifest,
    #[serde(default)]
    plots: Vec<PlotIn>,
    #[serde(default)]
    selections: Vec<Selection>,
    #[serde(default)]
    pairs: Vec<Pair>,
    #[serde(default)]
    removed: BTreeSet<PeakRef>,
    next_order: Option<u64>,
    #[serde(default)]
    graph: HarmonicGraph,
}

/// `<` only ever occurs inside JSON strings, so escaping it keeps the
/// document valid JSON and safe to embed in an HTML script element.
fn escape_lt(json: String) -> String {
    if json.contains('<') {
        json.replace('<', "\\u003c")
    } else {
        json
    }
}

/// Compact UTF-8 JSON. Identical snapshots give identical bytes.
pub fn export_json(snapshot: &Snapshot, opts: ExportOptions) -> String {
    let doc = DocOut {
        schema: SCHEMA_VERSION,
        manifest: &snapshot.manifest,
        plots: snapshot.plots.iter().map(|p| PlotOut::new(p, opts)).collect(),
        selections: &snapshot.state.selections,
        pairs: &snapshot.state.pairs,
        removed: &snapshot.state.removed,
        next_order: snapshot.state.next_order,
        graph: &snapshot.graph,
    };
    escape_lt(serde_json::to_string(&doc).expect("document serializes"))
}

/// One entry of the document's `plots` array, byte for byte.
pub fn plot_json(plot: &Plot, opts: ExportOptions) -> String {
    escape_lt(serde_json::to_string(&PlotOut::new(plot, opts)).expect("plot serializes"))
}

/// Parses a document written by [`export_json`]. Unknown fields are ignored.
pub fn import_json(text: &str) -> Result<Snapshot> {
    let doc: DocIn = serde_json::from_str(text).map_err(|e| Error::Import(e.to_string()))?;
    if doc.schema != SCHEMA_VERSION {
        return Err(Error::Import(format!(
            "schema {} is not supported (expected {SCHEMA_VERSION})",
            doc.schema
        )));
    }
    let next_order = doc.next_order.unwrap_or_else(|| {
        doc.selections.iter().map(|s| s.selection_order).max().unwrap_or(0) + 1
    });
    Ok(Snapshot {
        manifest: doc.manifest,
        plots: doc.plots.into_iter().map(Plot::from).collect(),
        state: SelectionState {
            selections: doc.selections,
            pairs: doc.pairs,
            removed: doc.removed,
            next_order,
        },
        graph: doc.graph,
    })
}
