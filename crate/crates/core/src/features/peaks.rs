use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::transforms::SpectralResult;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub bin_index: usize,
    pub freq_hz: f64,
    pub power_linear: f64,
    pub power_db: f64,
    pub width_hz: f64,
    pub prominence: f64,
}

/// Relative thresholds, so detection is unchanged by rescaling the spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakConfig {
    /// Candidates must reach this percentile of all bin powers.
    pub height_percentile: f64,
    /// Candidates need prominence of at least this fraction of the maximum power.
    pub min_prominence_fraction: f64,
    pub max_peaks: usize,
}

impl Default for PeakConfig {
    fn default() -> Self {
        PeakConfig {
            height_percentile: 75.0,
            min_prominence_fraction: 0.05,
            max_peaks: 20,
        }
    }
}

impl PeakConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=100.0).contains(&self.height_percentile) {
            return Err(Error::InvalidParams(format!(
                "height_percentile {} outside [0, 100]",
                self.height_percentile
            )));
        }
        if !(0.0..=1.0).contains(&self.min_prominence_fraction) {
            return Err(Error::InvalidParams(format!(
                "min_prominence_fraction {} outside [0, 1]",
                self.min_prominence_fraction
            )));
        }
        if self.max_peaks == 0 {
            return Err(Error::InvalidParams("max_peaks must be at least 1".into()));
        }
        Ok(())
    }
}

/// Interior strict maxima. A flat top counts once, at its leftmost index,
/// when both flanks are strictly lower.
pub fn local_maxima(values: &[f64]) -> Vec<usize> {
    let n = values.len();
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if values[i] > values[i - 1] {
            let mut j = i;
            while j + 1 < n && values[j + 1] == values[i] {
                j += 1;
            }
            if j + 1 < n && values[j + 1] < values[i] {
                out.push(i);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

/// Prominence of `peak` with the indices of its left and right bases.
///
/// Each side is searched until a strictly higher sample or the edge; the base
/// is that side's minimum and the higher base is the reference saddle.
pub fn prominence(values: &[f64], peak: usize) -> (f64, usize, usize) {
    let height = values[peak];
    let mut left_base = peak;
    let mut left_min = height;
    for i in (0..peak).rev() {
        if values[i] > height {
            break;
        }
        if values[i] < left_min {
            left_min = values[i];
            left_base = i;
        }
    }
    let mut right_base = peak;
    let mut right_min = height;
    for (i, &v) in values.iter().enumerate().skip(peak + 1) {
        if v > height {
            break;
        }
        if v < right_min {
            right_min = v;
            right_base = i;
        }
    }
    (height - left_min.max(right_min), left_base, right_base)
}

/// Fractional positions where the peak crosses half its prominence.
fn half_prominence_crossings(values: &[f64], peak: usize, prom: f64, left_base: usize, right_base: usize) -> (f64, f64) {
    let level = values[peak] - 0.5 * prom;

    let mut i = peak;
    while i > left_base && values[i] > level {
        i -= 1;
    }
    let mut left = i as f64;
    if values[i] < level {
        left += (level - values[i]) / (values[i + 1] - values[i]);
    }

    let mut i = peak;
    while i < right_base && values[i] > level {
        i += 1;
    }
    let mut right = i as f64;
    if values[i] < level {
        right -= (level - values[i]) / (values[i - 1] - values[i]);
    }
    (left, right)
}

fn interpolate_freq(freqs: &[f64], position: f64) -> f64 {
    let lo = position.floor() as usize;
    let frac = position - lo as f64;
    match freqs.get(lo + 1) {
        Some(&hi) if frac > 0.0 => freqs[lo] + frac * (hi - freqs[lo]),
        _ => freqs[lo],
    }
}

/// Linear-interpolation percentile over unsorted values.
pub fn percentile(values: &[f64], pct: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let rank = pct.clamp(0.0, 100.0) / 100.0 * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (rank - lo as f64)
}

/// Local maxima passing both thresholds, strongest first, at most `max_peaks`.
pub fn detect_peaks(result: &SpectralResult, cfg: &PeakConfig) -> Vec<Peak> {
    let psd = &result.psd_linear;
    if psd.len() < 3 {
        return Vec::new();
    }
    let height_floor = percentile(psd, cfg.height_percentile);
    let max_power = psd.iter().copied().fold(0.0, f64::max);
    let prominence_floor = cfg.min_prominence_fraction * max_power;

    let mut peaks: Vec<Peak> = local_maxima(psd)
        .into_iter()
        .filter(|&i| psd[i] >= height_floor)
        .filter_map(|i| {
            let (prom, left_base, right_base) = prominence(psd, i);
            if prom < prominence_floor {
                return None;
            }
            let (left, right) = half_prominence_crossings(psd, i, prom, left_base, right_base);
            let width_hz =
                (interpolate_freq(&result.freqs_hz, right) - interpolate_freq(&result.freqs_hz, left)).max(0.0);
            Some(Peak {
                bin_index: i,
                freq_hz: result.freqs_hz[i],
                power_linear: psd[i],
                power_db: result.psd_db[i],
                width_hz,
                prominence: prom,
            })
        })
        .collect();
    peaks.sort_by(peak_order);
    peaks.truncate(cfg.max_peaks);
    peaks
}

/// Power descending, then bin ascending.
pub fn peak_order(a: &Peak, b: &Peak) -> Ordering {
    b.power_linear
        .total_cmp(&a.power_linear)
        .then(a.bin_index.cmp(&b.bin_index))
}
