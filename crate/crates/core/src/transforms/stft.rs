use std::collections::BTreeMap;

use super::fft::PowerSpectrum;
use super::{Method, SpectralResult, Spectrogram, TransformParams};
use crate::clip::AudioClip;
use crate::error::Result;
use crate::sanitize::sanitize_in_place;

/// Number of analysis frames; a clip shorter than one frame is zero-padded to one.
pub fn frame_count(len: usize, n_fft: usize, hop: usize) -> usize {
    if len <= n_fft {
        1
    } else {
        (len - n_fft) / hop + 1
    }
}

fn frame_slices(samples: &[f64], n_fft: usize, hop: usize) -> impl Iterator<Item = &[f64]> {
    let frames = frame_count(samples.len(), n_fft, hop);
    (0..frames).map(move |t| {
        let start = t * hop;
        &samples[start..(start + n_fft).min(samples.len())]
    })
}

fn bin_freqs(n_fft: usize, sample_rate_hz: u32) -> Vec<f64> {
    let fs = sample_rate_hz as f64;
    (0..=n_fft / 2).map(|k| k as f64 * fs / n_fft as f64).collect()
}

/// Welch average of windowed periodograms at stride `hop_length`.
pub fn compute_psd(clip: &AudioClip, params: &TransformParams) -> Result<SpectralResult> {
    params.validate(clip.sample_rate_hz)?;
    Ok(psd_unchecked(clip, params, Method::FftDual))
}

pub(crate) fn psd_unchecked(clip: &AudioClip, params: &TransformParams, method: Method) -> SpectralResult {
    let samples = clip.samples_f64();
    let n_fft = params.n_fft;
    let mut engine = PowerSpectrum::new(params.window.coefficients(n_fft));
    let mut acc = vec![0.0; engine.n_bins()];
    let mut frames = 0usize;
    for segment in frame_slices(&samples, n_fft, params.hop_length) {
        engine.accumulate(segment, &mut acc);
        frames += 1;
    }
    for v in acc.iter_mut() {
        *v /= frames as f64;
    }
    let mut derived = BTreeMap::new();
    derived.insert("frames".into(), frames as f64);
    derived.insert(
        "zero_padded_samples".into(),
        n_fft.saturating_sub(samples.len()) as f64,
    );
    SpectralResult::new(method, bin_freqs(n_fft, clip.sample_rate_hz), acc, params.clone(), derived)
}

/// Power spectrum per frame; frame `t` covers samples `[t*hop, t*hop + n_fft)`.
pub fn compute_spectrogram(clip: &AudioClip, params: &TransformParams) -> Result<Spectrogram> {
    params.validate(clip.sample_rate_hz)?;
    Ok(spectrogram_unchecked(clip, params.n_fft, params.hop_length, params))
}

fn spectrogram_unchecked(clip: &AudioClip, n_fft: usize, hop: usize, params: &TransformParams) -> Spectrogram {
    let samples = clip.samples_f64();
    let fs = clip.sample_rate_hz as f64;
    let mut engine = PowerSpectrum::new(params.window.coefficients(n_fft));
    let mut times_s = Vec::new();
    let mut magnitude = Vec::new();
    for (t, segment) in frame_slices(&samples, n_fft, hop).enumerate() {
        let mut row = engine.spectrum(segment);
        sanitize_in_place(&mut row);
        magnitude.push(row);
        times_s.push((t * hop) as f64 / fs + n_fft as f64 / (2.0 * fs));
    }
    Spectrogram {
        times_s,
        freqs_hz: bin_freqs(n_fft, clip.sample_rate_hz),
        magnitude,
    }
}

/// Spectrogram settings paired with a PSD at `params.n_fft`: a quarter of the
/// window, hop of an eighth (floored at the minimum FFT size and one sample).
pub fn dual_spectrogram_params(params: &TransformParams) -> TransformParams {
    let n_fft = (params.n_fft / 4).max(super::params::MIN_N_FFT);
    let hop = (params.n_fft / 8).clamp(1, n_fft);
    params.clone().with_fft(n_fft, hop)
}

/// High-resolution PSD plus a coarser spectrogram for time-frequency context.
pub fn compute_fft_dual(clip: &AudioClip, params: &TransformParams) -> Result<(SpectralResult, Spectrogram)> {
    let psd = compute_psd(clip, params)?;
    let spec = compute_spectrogram(clip, &dual_spectrogram_params(params))?;
    Ok((psd, spec))
}
