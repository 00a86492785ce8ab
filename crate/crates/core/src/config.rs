//! Flat run settings. Every field becomes exactly one manifest entry.

use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::clip::IndexSet;
use crate::error::{Error, Result};
use crate::features::{PeakConfig, VeinConfig};
use crate::harmonic::{DEFAULT_AUTO_SELECT, DEFAULT_INTEGER_TOLERANCE};
use crate::sweep::{GridSpec, Metric};
use crate::transforms::{Method, MultiresBand, TransformParams, Wavelet, Window, DEFAULT_CHIRP_RATES, DEFAULT_FMIN_HZ};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    Csv,
    Json,
    Png,
    Html,
}

impl ExportFormat {
    pub const ALL: [ExportFormat; 4] = [ExportFormat::Csv, ExportFormat::Json, ExportFormat::Png, ExportFormat::Html];

    pub fn as_str(self) -> &'static str {
        match self {
            ExportFormat::Csv => "csv",
            ExportFormat::Json => "json",
            ExportFormat::Png => "png",
            ExportFormat::Html => "html",
        }
    }
}

impl fmt::Display for ExportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(ExportFormat::Csv),
            "json" => Ok(ExportFormat::Json),
            "png" => Ok(ExportFormat::Png),
            "html" => Ok(ExportFormat::Html),
            other => Err(Error::InvalidParams(format!("unknown export format `{other}`"))),
        }
    }
}

/// Parses `lo-hi` (Hz) into an ordered, positive range.
pub fn parse_range_hz(s: &str) -> Result<(f64, f64)> {
    let bad = || Error::InvalidParams(format!("bad frequency range `{s}`, expected LO-HI in Hz"));
    let (lo, hi) = s.split_once('-').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo < hi) {
        return Err(bad());
    }
    Ok((lo, hi))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunSettings {
    pub input: PathBuf,
    pub pattern: String,
    pub indices: String,
    pub annotations: bool,
    pub methods: Vec<Method>,
    pub n_fft: usize,
    pub hop_length: usize,
    pub window: Window,
    pub fmin_hz: f64,
    pub fmax_hz: Option<f64>,
    pub bins_per_octave: u32,
    pub wavelet: Wavelet,
    pub decomposition_levels: u32,
    pub chirp_rates_hz_per_s: Vec<f64>,
    pub multires_window_plan: Option<Vec<MultiresBand>>,
    pub height_percentile: f64,
    pub min_prominence_fraction: f64,
    pub max_peaks: usize,
    pub vein_max_jump_hz: Option<f64>,
    pub vein_min_persistence: usize,
    pub max_veins: usize,
    pub auto_select: usize,
    pub integer_tolerance: f64,
    pub export: Vec<ExportFormat>,
    pub include_psd_db: bool,
    pub out: PathBuf,
    pub seed: u64,
    pub taxon_range_hz: Option<(f64, f64)>,
    pub temporal_precision: bool,
    pub grid_n_fft: Vec<usize>,
    pub grid_hop_divisors: Vec<usize>,
    pub grid_metric: Metric,
    pub hop_literal: bool,
    pub port: u16,
}

impl Default for RunSettings {
    fn default() -> Self {
        let t = TransformParams::default();
        let p = PeakConfig::default();
        let v = VeinConfig::default();
        let g = GridSpec::default();
        RunSettings {
            input: PathBuf::from("."),
            pattern: "*.wav".into(),
            indices: "all".into(),
            annotations: true,
            methods: vec![Method::FftDual],
            n_fft: t.n_fft,
            hop_length: t.hop_length,
            window: t.window,
            fmin_hz: DEFAULT_FMIN_HZ,
            fmax_hz: t.fmax_hz,
            bins_per_octave: t.bins_per_octave,
            wavelet: t.wavelet,
            decomposition_levels: t.decomposition_levels,
            chirp_rates_hz_per_s: DEFAULT_CHIRP_RATES.to_vec(),
            multires_window_plan: None,
            height_percentile: p.height_percentile,
            min_prominence_fraction: p.min_prominence_fraction,
            max_peaks: p.max_peaks,
            vein_max_jump_hz: v.max_jump_hz,
            vein_min_persistence: v.min_persistence,
            max_veins: v.max_veins,
            auto_select: DEFAULT_AUTO_SELECT,
            integer_tolerance: DEFAULT_INTEGER_TOLERANCE,
            export: vec![ExportFormat::Csv, ExportFormat::Json, ExportFormat::Png],
            include_psd_db: true,
            out: PathBuf::from("specdesk-out"),
            seed: 0,
            taxon_range_hz: None,
            temporal_precision: false,
            grid_n_fft: g.n_fft_values,
            grid_hop_divisors: g.hop_divisors,
            grid_metric: g.metric,
            hop_literal: g.hop_literal,
            port: 8080,
        }
    }
}

impl RunSettings {
    pub fn index_set(&self) -> Result<IndexSet> {
        self.indices.parse()
    }

    pub fn transform_params(&self, method: Method) -> TransformParams {
        TransformParams {
            method,
            n_fft: self.n_fft,
            hop_length: self.hop_length,
            window: self.window,
            fmin_hz: self.fmin_hz,
            fmax_hz: self.fmax_hz,
            bins_per_octave: self.bins_per_octave,
            wavelet: self.wavelet,
            decomposition_levels: self.decomposition_levels,
            chirp_rates_hz_per_s: self.chirp_rates_hz_per_s.clone(),
            multires_window_plan: self.multires_window_plan.clone(),
        }
    }

    pub fn peak_config(&self) -> PeakConfig {
        PeakConfig {
            height_percentile: self.height_percentile,
            min_prominence_fraction: self.min_prominence_fraction,
            max_peaks: self.max_peaks,
        }
    }

    pub fn vein_config(&self) -> VeinConfig {
        VeinConfig {
            max_jump_hz: self.vein_max_jump_hz,
            min_persistence: self.vein_min_persistence,
            max_veins: self.max_veins,
        }
    }

    pub fn grid_spec(&self, method: Method) -> GridSpec {
        GridSpec {
            n_fft_values: self.grid_n_fft.clone(),
            hop_divisors: self.grid_hop_divisors.clone(),
            method,
            metric: self.grid_metric,
            hop_literal: self.hop_literal,
        }
    }

    pub fn export_set(&self) -> BTreeSet<ExportFormat> {
        self.export.iter().copied().collect()
    }

    /// Rate-independent checks; rate-dependent ones run per clip.
    pub fn validate(&self) -> Result<()> {
        self.index_set()?;
        if self.methods.is_empty() {
            return Err(Error::InvalidParams("at least one method is required".into()));
        }
        self.peak_config().validate()?;
        if !(1..=crate::harmonic::MAX_AUTO_SELECT).contains(&self.auto_select) {
            return Err(Error::InvalidParams(format!(
                "auto_select must lie in [1, {}]",
                crate::harmonic::MAX_AUTO_SELECT
            )));
        }
        if !(self.integer_tolerance > 0.0 && self.integer_tolerance < 0.5) {
            return Err(Error::InvalidParams("integer_tolerance must lie in (0, 0.5)".into()));
        }
        if self.vein_min_persistence < 2 || self.max_veins == 0 {
            return Err(Error::InvalidParams(
                "vein_min_persistence must be at least 2 and max_veins at least 1".into(),
            ));
        }
        if let Some(j) = self.vein_max_jump_hz {
            if !(j.is_finite() && j > 0.0) {
                return Err(Error::InvalidParams("vein_max_jump_hz must be positive".into()));
            }
        }
        if let Some((lo, hi)) = self.taxon_range_hz {
            if !(lo > 0.0 && lo < hi && hi.is_finite()) {
                return Err(Error::InvalidParams("taxon range must satisfy 0 < lo < hi".into()));
            }
        }
        crate::transforms::validate_n_fft(self.n_fft)?;
        if self.hop_length == 0 || self.hop_length > self.n_fft {
            return Err(Error::InvalidParams(format!(
                "hop_length {} must lie in [1, n_fft={}]",
                self.hop_length, self.n_fft
            )));
        }
        Ok(())
    }

    /// The unit attached to a manifest entry, if the quantity has one.
    pub fn unit(name: &str) -> Option<&'static str> {
        Some(match name {
            "n_fft" | "hop_length" => "samples",
            "fmin_hz" | "fmax_hz" | "vein_max_jump_hz" | "taxon_range_hz" => "Hz",
            "chirp_rates_hz_per_s" => "Hz/s",
            "height_percentile" => "percent",
            "vein_min_persistence" => "frames",
            "grid_n_fft" => "samples",
            "sample_rates_hz" => "Hz",
            _ => return None,
        })
    }
}
