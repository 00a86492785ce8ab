//! Batch subcommands. Each returns the lines it would print, so tests can
//! drive them without spawning a process.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use specdesk_core::clip::ClipCollection;
use specdesk_core::config::RunSettings;
use specdesk_core::export::{
    audit_assumptions, grid_csv, manifest_json, render_grid_image, AuditContext, AuditWarning, ExportBundle,
    ExportOptions, ParameterManifest, Snapshot, MANIFEST_FILE,
};
use specdesk_core::run::{analyze, ingest, Ingest, PlotFailure};
use specdesk_core::sweep::{run_grid, sample_validation, GridResult};
use specdesk_core::Error;

/// Process exit status for each failure class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    BadConfig = 1,
    NoInputs = 2,
    AllFailed = 3,
    Io = 4,
}

#[derive(Debug)]
pub struct CliError {
    pub exit: Exit,
    pub message: String,
}

impl CliError {
    pub fn new(exit: Exit, message: impl Into<String>) -> Self {
        CliError {
            exit,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let exit = match &e {
            Error::NoMatches { .. } => Exit::NoInputs,
            Error::Io(_) | Error::RenderFailure(_) => Exit::Io,
            _ => Exit::BadConfig,
        };
        CliError::new(exit, e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn load_inputs(settings: &RunSettings) -> CliResult<Ingest> {
    if !settings.input.exists() {
        return Err(CliError::new(
            Exit::NoInputs,
            format!("input {} does not exist", settings.input.display()),
        ));
    }
    let ingest = ingest(settings)?;
    if ingest.collection.is_empty() {
        return Err(CliError::new(
            Exit::AllFailed,
            format!("all {} input files failed to load", ingest.files_seen),
        ));
    }
    Ok(ingest)
}

#[derive(Debug)]
pub struct AnalyzeOutcome {
    pub snapshot: Snapshot,
    pub written: Vec<PathBuf>,
    pub files_seen: usize,
    pub file_failures: usize,
    pub plot_failures: Vec<PlotFailure>,
}

/// Reads a front-end bundle to inline into the HTML report.
pub fn read_ui_bundle(path: Option<&Path>) -> Option<String> {
    let path = path?;
    match std::fs::read_to_string(path) {
        Ok(s) => Some(s),
        Err(e) => {
            log::warn!("ui bundle {}: {e}", path.display());
            None
        }
    }
}

pub fn cmd_analyze(
    settings: &RunSettings,
    user_set: &BTreeSet<String>,
    ui_bundle: Option<&str>,
) -> CliResult<AnalyzeOutcome> {
    settings.validate()?;
    let ingest = load_inputs(settings)?;
    let (snapshot, plot_failures) = analyze(&ingest.collection, settings, user_set)?;
    if snapshot.plots.is_empty() {
        return Err(CliError::new(
            Exit::AllFailed,
            format!("every method failed on every clip ({} failures)", plot_failures.len()),
        ));
    }
    let opts = ExportOptions {
        include_psd_db: settings.include_psd_db,
    };
    let bundle = ExportBundle::render(&snapshot, &settings.export_set(), opts, ui_bundle)?;
    let written = bundle.write(&settings.out)?;
    Ok(AnalyzeOutcome {
        snapshot,
        written,
        files_seen: ingest.files_seen,
        file_failures: ingest.failures.len(),
        plot_failures,
    })
}

#[derive(Debug)]
pub struct GridOutcome {
    pub clip_id: String,
    pub grids: Vec<GridResult>,
    pub written: Vec<PathBuf>,
}

/// Sweeps the first clip once per requested method.
pub fn cmd_grid(settings: &RunSettings, user_set: &BTreeSet<String>) -> CliResult<GridOutcome> {
    settings.validate()?;
    for &m in &settings.methods {
        settings.grid_spec(m).validate()?;
    }
    let ingest = load_inputs(settings)?;
    let clip = ingest.collection.clips().next().expect("non-empty collection");

    let mut manifest = ParameterManifest::from_settings(settings, user_set)?;
    manifest.record_clip(clip);

    let out = &settings.out;
    std::fs::create_dir_all(out).map_err(Error::from)?;
    let single = settings.methods.len() == 1;
    let mut grids = Vec::new();
    let mut written = Vec::new();
    for &method in &settings.methods {
        let grid = run_grid(clip, &settings.grid_spec(method), &settings.transform_params(method))?;
        let stem = match single {
            true => "grid".to_string(),
            false => format!("grid_{}", method.as_str().to_ascii_lowercase()),
        };
        let csv_path = out.join(format!("{stem}.csv"));
        std::fs::write(&csv_path, grid_csv(&grid)).map_err(Error::from)?;
        let png_path = out.join(format!("{stem}.png"));
        std::fs::write(&png_path, render_grid_image(&grid)?.0).map_err(Error::from)?;
        written.push(csv_path);
        written.push(png_path);
        grids.push(grid);
    }
    let manifest_path = out.join(MANIFEST_FILE);
    std::fs::write(&manifest_path, manifest_json(&manifest)).map_err(Error::from)?;
    written.push(manifest_path);
    Ok(GridOutcome {
        clip_id: clip.id.clone(),
        grids,
        written,
    })
}

pub fn cmd_sample(settings: &RunSettings, k: usize) -> CliResult<Vec<String>> {
    if k == 0 {
        return Err(CliError::new(Exit::BadConfig, "k must be at least 1"));
    }
    settings.index_set()?;
    let ingest = load_inputs(settings)?;
    Ok(sample_validation(&ingest.collection, k, settings.seed)?)
}

/// Audits the settings against the rates of whatever inputs are readable.
/// Without inputs, the default rate is assumed.
pub fn cmd_audit(settings: &RunSettings, user_set: &BTreeSet<String>) -> CliResult<Vec<AuditWarning>> {
    settings.validate()?;
    let mut manifest = ParameterManifest::from_settings(settings, user_set)?;
    let collection = match settings.input.exists() {
        true => match ingest(settings) {
            Ok(i) => i.collection,
            Err(Error::NoMatches { .. }) => ClipCollection::new(),
            Err(e) => return Err(e.into()),
        },
        false => ClipCollection::new(),
    };
    for clip in collection.clips() {
        manifest.record_clip(clip);
    }
    Ok(audit_assumptions(&manifest, &AuditContext::from_settings(settings))?)
}

pub fn format_warning(w: &AuditWarning) -> String {
    format!("{} [{} {}]: {}", w.rule_id, w.software, w.parameter, w.message)
}
