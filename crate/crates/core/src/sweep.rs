//! Grid search over STFT sizes and random validation subsets.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clip::{AudioClip, ClipCollection};
use crate::error::{Error, Result};
use crate::features::{detect_peaks, extract_ridge, PeakConfig};
use crate::transforms::{self, compute_spectrogram, Method, SpectralResult, TransformParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Mean over frames of (max - median) in dB.
    #[default]
    SpectralContrast,
    /// Number of peaks found with the default detector settings.
    PeakCount,
    /// Variance of the ridge frequency over time.
    RidgeVariance,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::SpectralContrast => "spectral_contrast",
            Metric::PeakCount => "peak_count",
            Metric::RidgeVariance => "ridge_variance",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "spectral_contrast" | "contrast" => Ok(Metric::SpectralContrast),
            "peak_count" | "peaks" => Ok(Metric::PeakCount),
            "ridge_variance" | "ridge" => Ok(Metric::RidgeVariance),
            other => Err(Error::InvalidParams(format!("unknown metric `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n_fft_values: Vec<usize>,
    /// `hop = n_fft / divisor`, or `hop = divisor` samples when `hop_literal` is set.
    pub hop_divisors: Vec<usize>,
    pub method: Method,
    pub metric: Metric,
    pub hop_literal: bool,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            n_fft_values: vec![512, 1024, 2048],
            hop_divisors: vec![2, 4, 8],
            method: Method::FftDual,
            metric: Metric::SpectralContrast,
            hop_literal: false,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_fft_values.is_empty() || self.hop_divisors.is_empty() {
            return Err(Error::InvalidParams("grid axes must be non-empty".into()));
        }
        if self.hop_divisors.contains(&0) {
            return Err(Error::InvalidParams("hop divisors must be positive".into()));
        }
        if !self.hop_literal {
            for &n in &self.n_fft_values {
                if let Some(d) = self.hop_divisors.iter().find(|&&d| n % d != 0) {
                    return Err(Error::InvalidParams(format!("divisor {d} does not divide n_fft {n}")));
                }
            }
        }
        Ok(())
    }

    pub fn hop_for(&self, n_fft: usize, divisor: usize) -> usize {
        if self.hop_literal {
            divisor
        } else {
            n_fft / divisor
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub n_fft: usize,
    pub hop_divisor: usize,
    pub hop_length: usize,
    pub metric_value: Option<f64>,
    pub error: Option<String>,
    pub result: Option<SpectralResult>,
}

impl GridCell {
    pub fn succeeded(&self) -> bool {
        self.metric_value.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub method: Method,
    pub metric: Metric,
    /// Row-major: `n_fft` outer, divisor inner.
    pub cells: Vec<GridCell>,
    pub rows: usize,
    pub cols: usize,
    pub best_cell: Option<usize>,
}

/// Evaluates every (n_fft, divisor) combination. A failing cell is recorded
/// and skipped; it never aborts the grid.
pub fn run_grid(clip: &AudioClip, spec: &GridSpec, base: &TransformParams) -> Result<GridResult> {
    spec.validate()?;
    let combos: Vec<(usize, usize)> = spec
        .n_fft_values
        .iter()
        .flat_map(|&n| spec.hop_divisors.iter().map(move |&d| (n, d)))
        .collect();

    let cells: Vec<GridCell> = combos
        .par_iter()
        .map(|&(n_fft, divisor)| {
            let hop = spec.hop_for(n_fft, divisor);
            let mut params = base.clone().with_fft(n_fft, hop);
            params.method = spec.method;
            match evaluate_cell(clip, &params, spec.metric) {
                Ok((value, result)) => GridCell {
                    n_fft,
                    hop_divisor: divisor,
                    hop_length: hop,
                    metric_value: Some(value),
                    error: None,
                    result: Some(result),
                },
                Err(e) => GridCell {
                    n_fft,
                    hop_divisor: divisor,
                    hop_length: hop,
                    metric_value: None,
                    error: Some(e.to_string()),
                    result: None,
                },
            }
        })
        .collect();

    let best_cell = best_index(&cells);
    Ok(GridResult {
        method: spec.method,
        metric: spec.metric,
        rows: spec.n_fft_values.len(),
        cols: spec.hop_divisors.len(),
        cells,
        best_cell,
    })
}

/// Highest metric; ties go to the smaller n_fft, then the smaller divisor.
fn best_index(cells: &[GridCell]) -> Option<usize> {
    cells
        .iter()
        .enumerate()
        .filter_map(|(i, c)| c.metric_value.map(|v| (i, v)))
        .min_by(|(ia, va), (ib, vb)| {
            vb.total_cmp(va)
                .then(cells[*ia].n_fft.cmp(&cells[*ib].n_fft))
                .then(cells[*ia].hop_divisor.cmp(&cells[*ib].hop_divisor))
        })
        .map(|(i, _)| i)
}

fn evaluate_cell(clip: &AudioClip, params: &TransformParams, metric: Metric) -> Result<(f64, SpectralResult)> {
    let result = transforms::compute(clip, params)?;
    let value = match metric {
        Metric::PeakCount => detect_peaks(&result, &PeakConfig::default()).len() as f64,
        Metric::SpectralContrast => {
            if params.method == Method::FftDual {
                let spec = compute_spectrogram(clip, params)?;
                let per_frame: Vec<f64> = spec
                    .magnitude
                    .iter()
                    .map(|row| contrast_db(&transforms::to_db(row)))
                    .collect();
                per_frame.iter().sum::<f64>() / per_frame.len().max(1) as f64
            } else {
                contrast_db(&result.psd_db)
            }
        }
        Metric::RidgeVariance => {
            let spec = compute_spectrogram(clip, params)?;
            let freqs: Vec<f64> = extract_ridge(&spec).points.iter().map(|p| p.freq_hz).collect();
            variance(&freqs)
        }
    };
    Ok((value, result))
}

fn contrast_db(row_db: &[f64]) -> f64 {
    if row_db.is_empty() {
        return 0.0;
    }
    let max = row_db.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max - crate::features::percentile(row_db, 50.0)
}

fn variance(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / values.len() as f64
}

/// Uniform sample of `k` clip ids without replacement, reproducible per seed.
pub fn sample_validation(collection: &ClipCollection, k: usize, seed: u64) -> Result<Vec<String>> {
    let ids = collection.ids();
    if k == 0 {
        return Err(Error::InvalidParams("sample size must be at least 1".into()));
    }
    if k > ids.len() {
        return Err(Error::KTooLarge {
            k,
            available: ids.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(rand::seq::index::sample(&mut rng, ids.len(), k)
        .into_iter()
        .map(|i| ids[i].clone())
        .collect())
}
