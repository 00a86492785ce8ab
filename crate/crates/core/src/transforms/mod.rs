//! The comparative frequency-domain representations.
//!
//! Every method reduces a clip to one value per frequency bin so results can
//! be laid side by side; linear and dB scales are both stored.

mod chirplet;
mod cqt;
pub mod fft;
mod multires;
mod params;
mod stft;
pub mod wavelet;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use chirplet::{compute_chirplet, ChirpletMap};
pub use cqt::{compute_cqt, cqt_frequencies, CqtKernel};
pub use multires::{compute_multires, seam_discontinuities_db};
pub use params::{
    default_multires_plan, Method, MultiresBand, TransformParams, Wavelet, Window,
    DEFAULT_CHIRP_RATES, DEFAULT_FMIN_HZ, MAX_LEVELS, MAX_N_FFT, MIN_N_FFT,
};
pub(crate) use params::validate_n_fft;
pub use stft::{compute_fft_dual, compute_psd, compute_spectrogram, dual_spectrogram_params, frame_count};
pub use wavelet::{compute_swt, compute_wavelet_packet};

use crate::clip::AudioClip;
use crate::error::Result;
use crate::sanitize::{sanitize_in_place, SanitizeReport, DB_FLOOR_LINEAR};

/// `10 log10(max(x, 1e-12))`.
pub fn to_db(psd_linear: &[f64]) -> Vec<f64> {
    psd_linear.iter().map(|&x| power_to_db(x)).collect()
}

pub fn to_linear(psd_db: &[f64]) -> Vec<f64> {
    psd_db.iter().map(|&d| 10f64.powf(d / 10.0)).collect()
}

#[inline]
pub fn power_to_db(x: f64) -> f64 {
    10.0 * x.max(DB_FLOOR_LINEAR).log10()
}

/// One value per frequency bin, on both scales.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralResult {
    pub method: Method,
    pub freqs_hz: Vec<f64>,
    pub psd_linear: Vec<f64>,
    pub psd_db: Vec<f64>,
    pub params: TransformParams,
    pub sanitize: SanitizeReport,
    /// Values the transform derived from the clip (padding, bin counts, seam gains).
    pub derived: BTreeMap<String, f64>,
}

impl SpectralResult {
    /// Sanitizes `psd_linear` in place and fills the dB scale.
    pub(crate) fn new(
        method: Method,
        freqs_hz: Vec<f64>,
        mut psd_linear: Vec<f64>,
        params: TransformParams,
        derived: BTreeMap<String, f64>,
    ) -> Self {
        let sanitize = sanitize_in_place(&mut psd_linear);
        for v in psd_linear.iter_mut() {
            // Power is non-negative; a clamped -Inf would otherwise survive as -1.
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let psd_db = to_db(&psd_linear);
        SpectralResult {
            method,
            freqs_hz,
            psd_linear,
            psd_db,
            params,
            sanitize,
            derived,
        }
    }

    pub fn len(&self) -> usize {
        self.freqs_hz.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs_hz.is_empty()
    }

    /// Index of the largest linear value (lowest index on ties).
    pub fn argmax(&self) -> Option<usize> {
        argmax(&self.psd_linear)
    }
}

pub(crate) fn argmax(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        match best {
            Some(b) if values[b] >= v => {}
            _ => best = Some(i),
        }
    }
    best
}

/// Time-frequency power matrix, one row per frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrogram {
    pub times_s: Vec<f64>,
    pub freqs_hz: Vec<f64>,
    /// `magnitude[frame][bin]`.
    pub magnitude: Vec<Vec<f64>>,
}

impl Spectrogram {
    pub fn n_frames(&self) -> usize {
        self.times_s.len()
    }

    pub fn n_bins(&self) -> usize {
        self.freqs_hz.len()
    }

    pub fn bin_width_hz(&self) -> f64 {
        match self.freqs_hz.as_slice() {
            [a, b, ..] => b - a,
            _ => 0.0,
        }
    }
}

/// Runs the transform named by `params.method`.
///
/// `FFT_DUAL` returns its PSD here; use [`compute_fft_dual`] for the spectrogram too.
pub fn compute(clip: &AudioClip, params: &TransformParams) -> Result<SpectralResult> {
    match params.method {
        Method::FftDual => compute_psd(clip, params),
        Method::Cqt => compute_cqt(clip, params),
        Method::Wave => compute_wavelet_packet(clip, params),
        Method::Swt => compute_swt(clip, params),
        Method::Chirplet => compute_chirplet(clip, params),
        Method::MultiRes => compute_multires(clip, params),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn db_conversion_rules() {
        assert_eq!(to_db(&[1.0]), vec![0.0]);
        assert_eq!(to_db(&[0.0]), vec![-120.0]);
        assert_eq!(to_db(&[1e-15]), vec![-120.0]);
        for x in [1e-12, 3.7e-6, 0.5, 1.0, 42.0, 1e9] {
            let back = to_linear(&to_db(&[x]))[0];
            assert!(((back - x) / x).abs() < 1e-12, "{x} -> {back}");
        }
    }

    #[test]
    fn argmax_prefers_lowest_index() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0, 2.0]), Some(1));
        assert_eq!(argmax(&[]), None);
        assert_eq!(argmax(&[0.0, 0.0]), Some(0));
    }
}
