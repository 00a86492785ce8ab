use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use super::{Method, SpectralResult, TransformParams, Window};
use crate::clip::AudioClip;
use crate::error::{Error, Result};

/// Lowest centre frequency the constant-Q kernels accept.
pub const CQT_MIN_FMIN_HZ: f64 = 10.0;

/// Geometric bin centres `fmin * 2^(k / bins_per_octave)` below `fmax`.
pub fn cqt_frequencies(fmin_hz: f64, fmax_hz: f64, bins_per_octave: u32) -> Vec<f64> {
    let bpo = bins_per_octave as f64;
    // Guard against log2 landing a hair above an integer.
    let n_bins = ((bpo * (fmax_hz / fmin_hz).log2()) - 1e-9).ceil().max(0.0) as usize;
    (0..n_bins)
        .map(|k| fmin_hz * 2f64.powf(k as f64 / bpo))
        .collect()
}

/// Q factor for a given octave resolution.
pub fn quality_factor(bins_per_octave: u32) -> f64 {
    1.0 / (2f64.powf(1.0 / bins_per_octave as f64) - 1.0)
}

/// Conjugated, Hann-windowed complex sinusoid of length `ceil(Q fs / f)`.
#[derive(Debug, Clone)]
pub struct CqtKernel {
    pub centre_hz: f64,
    taps: Vec<Complex64>,
}

impl CqtKernel {
    pub fn new(centre_hz: f64, q: f64, sample_rate_hz: u32) -> Self {
        let fs = sample_rate_hz as f64;
        let len = (q * fs / centre_hz).ceil().max(1.0) as usize;
        let window = Window::Hann.coefficients(len);
        let norm: f64 = window.iter().sum();
        let taps = window
            .iter()
            .enumerate()
            .map(|(n, &w)| Complex64::from_polar(w / norm, -2.0 * PI * centre_hz * n as f64 / fs))
            .collect();
        CqtKernel { centre_hz, taps }
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    /// Inner product with `segment[..len]`.
    pub fn project(&self, segment: &[f64]) -> Complex64 {
        self.taps
            .iter()
            .zip(segment)
            .map(|(k, &x)| k * x)
            .sum()
    }
}

/// Constant-Q spectrum by direct per-bin inner products, averaged over hops.
///
/// Each kernel is normalized by its window sum and the power doubled, so a
/// sinusoid of amplitude `A` centred on a bin reads `A^2 / 2` as in the PSD.
pub fn compute_cqt(clip: &AudioClip, params: &TransformParams) -> Result<SpectralResult> {
    params.validate(clip.sample_rate_hz)?;
    if params.fmin_hz < CQT_MIN_FMIN_HZ {
        return Err(Error::InvalidParams(format!(
            "CQT fmin must be at least {CQT_MIN_FMIN_HZ} Hz, got {}",
            params.fmin_hz
        )));
    }
    let fmax = params.resolved_fmax(clip.sample_rate_hz);
    let freqs = cqt_frequencies(params.fmin_hz, fmax, params.bins_per_octave);
    let q = quality_factor(params.bins_per_octave);
    let kernels: Vec<CqtKernel> = freqs
        .iter()
        .map(|&f| CqtKernel::new(f, q, clip.sample_rate_hz))
        .collect();

    let samples = clip.samples_f64();
    let longest = kernels.first().map_or(0, CqtKernel::len);
    if samples.len() < longest {
        return Err(Error::ClipTooShort {
            len: samples.len(),
            needed: longest,
        });
    }

    let hop = params.hop_length;
    let power: Vec<f64> = kernels
        .iter()
        .map(|kernel| {
            let frames = (samples.len() - kernel.len()) / hop + 1;
            let total: f64 = (0..frames)
                .map(|m| 2.0 * kernel.project(&samples[m * hop..]).norm_sqr())
                .sum();
            total / frames as f64
        })
        .collect();

    let mut derived = BTreeMap::new();
    derived.insert("cqt_bins".into(), freqs.len() as f64);
    derived.insert("cqt_q".into(), q);
    derived.insert("cqt_longest_kernel_samples".into(), longest as f64);
    Ok(SpectralResult::new(Method::Cqt, freqs, power, params.clone(), derived))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tone(freq: f64, fs: u32, secs: f64) -> AudioClip {
        let n = (fs as f64 * secs) as usize;
        let samples = (0..n)
            .map(|i| (2.0 * PI * freq * i as f64 / fs as f64).sin() as f32)
            .collect();
        AudioClip::from_samples("tone", samples, fs)
    }

    fn cqt_params(fmax: f64) -> TransformParams {
        let mut p = TransformParams::for_method(Method::Cqt);
        p.fmin_hz = 32.70;
        p.fmax_hz = Some(fmax);
        p
    }

    #[test]
    fn octave_spacing() {
        let freqs = cqt_frequencies(32.70, 4000.0, 12);
        assert!((freqs[12] - 65.40).abs() < 0.01);
        for k in 0..freqs.len() - 12 {
            assert!((freqs[k + 12] / freqs[k] - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn bin_count_is_ceiling() {
        assert_eq!(cqt_frequencies(100.0, 200.0, 12).len(), 12);
        assert_eq!(cqt_frequencies(100.0, 201.0, 12).len(), 13);
        assert_eq!(cqt_frequencies(100.0, 400.0, 3).len(), 6);
    }

    #[test]
    fn middle_c_peaks_three_octaves_up() {
        let clip = tone(261.63, 22_050, 1.0);
        let result = compute_cqt(&clip, &cqt_params(2000.0)).unwrap();
        assert_eq!(result.argmax(), Some(36));
    }

    #[test]
    fn silence_is_zero() {
        let clip = AudioClip::from_samples("z", vec![0.0; 22_050], 22_050);
        let result = compute_cqt(&clip, &cqt_params(2000.0)).unwrap();
        assert!(result.psd_linear.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn too_short_and_too_low_are_rejected() {
        let clip = tone(440.0, 22_050, 0.1);
        assert!(matches!(
            compute_cqt(&clip, &cqt_params(2000.0)),
            Err(Error::ClipTooShort { .. })
        ));
        let mut p = cqt_params(2000.0);
        p.fmin_hz = 5.0;
        assert!(matches!(
            compute_cqt(&tone(440.0, 22_050, 1.0), &p),
            Err(Error::InvalidParams(_))
        ));
    }
}
