//! The batch pipeline: ingest, transform, detect, auto-select, assemble a snapshot.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::clip::{load_wav, read_sidecar, segment, select_files, AudioClip, ClipCollection};
use crate::config::RunSettings;
use crate::error::Result;
use crate::export::{audit_assumptions, AuditContext, ParameterManifest, Plot, Snapshot};
use crate::features::{detect_peaks, extract_ridge, extract_veins};
use crate::harmonic::auto_select;
use crate::transforms::{self, compute_fft_dual, Method};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileFailure {
    pub path: PathBuf,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotFailure {
    pub clip_id: String,
    pub method: Method,
    pub error: String,
}

#[derive(Debug, Clone)]
pub struct Ingest {
    pub collection: ClipCollection,
    pub files_seen: usize,
    pub failures: Vec<FileFailure>,
}

fn load_one(path: &std::path::Path, annotations: bool) -> Result<ClipCollection> {
    let clip = load_wav(path)?;
    let anns = if annotations { read_sidecar(path)? } else { None };
    match anns {
        Some(anns) if !anns.is_empty() => segment(&clip, &anns),
        _ => ClipCollection::from_clips([clip]),
    }
}

/// Loads every selected file. Unreadable files are recorded and skipped;
/// an empty selection is an error.
pub fn ingest(settings: &RunSettings) -> Result<Ingest> {
    let paths = select_files(&settings.input, &settings.pattern, &settings.index_set()?)?;
    let loaded: Vec<(PathBuf, Result<ClipCollection>)> = paths
        .par_iter()
        .map(|p| (p.clone(), load_one(p, settings.annotations)))
        .collect();

    let mut collection = ClipCollection::new();
    let mut failures = Vec::new();
    for (path, result) in loaded {
        match result.and_then(|c| collection.merge(c)) {
            Ok(()) => {}
            Err(e) => {
                log::warn!("skipping {}: {e}", path.display());
                failures.push(FileFailure {
                    path,
                    error: e.to_string(),
                });
            }
        }
    }
    Ok(Ingest {
        collection,
        files_seen: paths.len(),
        failures,
    })
}

fn compute_plot(clip: &AudioClip, method: Method, settings: &RunSettings) -> Result<Plot> {
    let params = settings.transform_params(method);
    let (spectral, tracks) = if method == Method::FftDual {
        let (psd, spec) = compute_fft_dual(clip, &params)?;
        let vc = settings.vein_config();
        let veins = extract_veins(&spec, vc.resolved_max_jump(&spec), vc.min_persistence, vc.max_veins)?;
        (psd, Some((extract_ridge(&spec), veins)))
    } else {
        (transforms::compute(clip, &params)?, None)
    };
    let peaks = detect_peaks(&spectral, &settings.peak_config());
    let (ridge, veins) = match tracks {
        Some((r, v)) => (Some(r), v),
        None => (None, Vec::new()),
    };
    Ok(Plot {
        plot_id: Plot::make_id(&clip.id, method),
        clip_id: clip.id.clone(),
        spectral,
        peaks,
        ridge,
        veins,
    })
}

/// Runs every requested method on every clip and auto-selects the strongest peaks.
///
/// Methods that fail on a clip (too short for a CQT kernel, say) are reported
/// and left out; everything else still runs.
pub fn analyze(
    collection: &ClipCollection,
    settings: &RunSettings,
    user_set: &BTreeSet<String>,
) -> Result<(Snapshot, Vec<PlotFailure>)> {
    settings.validate()?;
    let mut manifest = ParameterManifest::from_settings(settings, user_set)?;
    let clips: Vec<&AudioClip> = collection.clips().collect();
    for clip in &clips {
        manifest.record_clip(clip);
    }

    let jobs: Vec<(&AudioClip, Method)> = clips
        .iter()
        .flat_map(|c| settings.methods.iter().map(move |&m| (*c, m)))
        .collect();
    let outcomes: Vec<std::result::Result<Plot, PlotFailure>> = jobs
        .par_iter()
        .map(|&(clip, method)| {
            compute_plot(clip, method, settings).map_err(|e| PlotFailure {
                clip_id: clip.id.clone(),
                method,
                error: e.to_string(),
            })
        })
        .collect();
    let mut plots = Vec::new();
    let mut failures = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(p) => plots.push(p),
            Err(f) => {
                log::warn!("{} {}: {}", f.clip_id, f.method, f.error);
                failures.push(f);
            }
        }
    }

    let rates: BTreeSet<u32> = clips.iter().map(|c| c.sample_rate_hz).collect();
    let padded: Vec<&str> = plots
        .iter()
        .filter(|p| {
            p.spectral
                .derived
                .iter()
                .any(|(k, v)| k.ends_with("zero_padded_samples") && *v > 0.0)
        })
        .map(|p| p.plot_id.as_str())
        .collect();
    manifest.set_derived("n_clips", json!(clips.len()), None)?;
    manifest.set_derived("sample_rates_hz", json!(rates), Some("Hz"))?;
    manifest.set_derived("zero_padded_plots", json!(padded), None)?;
    manifest.set_derived("failed_plots", json!(failures.len()), None)?;

    let peaks_by_plot: BTreeMap<String, Vec<_>> = plots
        .iter()
        .map(|p| (p.plot_id.clone(), p.peaks.clone()))
        .collect();
    let state = auto_select(&peaks_by_plot, settings.auto_select)?;
    let mut snapshot = Snapshot::new(manifest, plots, state, settings.integer_tolerance)?;
    snapshot.manifest.assumption_audit =
        audit_assumptions(&snapshot.manifest, &AuditContext::from_settings(settings))?;
    Ok((snapshot, failures))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transforms::Method;
    use std::f64::consts::PI;

    fn tone(id: &str, freqs: &[f64], secs: f64) -> AudioClip {
        let fs = 22_050u32;
        let n = (fs as f64 * secs) as usize;
        let samples = (0..n)
            .map(|i| {
                let t = i as f64 / fs as f64;
                (freqs.iter().map(|f| (2.0 * PI * f * t).sin()).sum::<f64>() / freqs.len() as f64) as f32
            })
            .collect();
        AudioClip::from_samples(id, samples, fs)
    }

    #[test]
    fn one_clip_default_run() {
        let coll = ClipCollection::from_clips([tone("a", &[440.0, 880.0, 1320.0, 1760.0, 2200.0], 1.0)]).unwrap();
        let (snap, failures) = analyze(&coll, &RunSettings::default(), &BTreeSet::new()).unwrap();
        assert!(failures.is_empty());
        assert_eq!(snap.plots.len(), 1);
        assert_eq!(snap.plots[0].plot_id, "a:FFT_DUAL");
        assert!(snap.plots[0].ridge.is_some());
        assert_eq!(snap.state.selections.len(), 4);
        assert!(snap.state.pairs.is_empty());
        assert_eq!(snap.manifest.inputs.len(), 1);
        assert!(snap
            .manifest
            .entries
            .iter()
            .all(|e| e.provenance != crate::export::Provenance::User));
    }

    #[test]
    fn every_method_yields_a_plot() {
        let coll = ClipCollection::from_clips([tone("a", &[440.0], 1.0), tone("b", &[660.0], 1.0)]).unwrap();
        let settings = RunSettings {
            methods: Method::ALL.to_vec(),
            ..Default::default()
        };
        let (snap, failures) = analyze(&coll, &settings, &BTreeSet::new()).unwrap();
        assert!(failures.is_empty(), "{failures:?}");
        assert_eq!(snap.plots.len(), 2 * Method::ALL.len());
        let ids: BTreeSet<&str> = snap.plots.iter().map(|p| p.plot_id.as_str()).collect();
        assert_eq!(ids.len(), snap.plots.len());
    }

    #[test]
    fn short_clip_skips_cqt_only() {
        let coll = ClipCollection::from_clips([tone("tiny", &[1000.0], 0.05)]).unwrap();
        let settings = RunSettings {
            methods: vec![Method::FftDual, Method::Cqt],
            ..Default::default()
        };
        let (snap, failures) = analyze(&coll, &settings, &BTreeSet::new()).unwrap();
        assert_eq!(snap.plots.len(), 1);
        assert_eq!(failures.len(), 1);
        assert_eq!(failures[0].method, Method::Cqt);
        let padded = snap.manifest.entry("zero_padded_plots").unwrap();
        assert_eq!(padded.value, json!(["tiny:FFT_DUAL"]));
    }

    #[test]
    fn analysis_is_deterministic() {
        let coll = ClipCollection::from_clips([tone("a", &[440.0], 0.5), tone("b", &[300.0, 900.0], 0.5)]).unwrap();
        let settings = RunSettings {
            methods: vec![Method::FftDual, Method::Swt],
            ..Default::default()
        };
        let a = analyze(&coll, &settings, &BTreeSet::new()).unwrap().0;
        let b = analyze(&coll, &settings, &BTreeSet::new()).unwrap().0;
        assert_eq!(a, b);
    }
}
