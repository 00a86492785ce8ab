use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::stft::frame_count;
use super::{Method, SpectralResult, TransformParams};
use crate::clip::AudioClip;
use crate::error::Result;

/// Gaussian window with `sigma = n / 6` samples, centred in the frame.
pub fn gaussian_window(n: usize) -> Vec<f64> {
    let sigma = n as f64 / 6.0;
    let centre = (n as f64 - 1.0) / 2.0;
    (0..n)
        .map(|i| (-0.5 * ((i as f64 - centre) / sigma).powi(2)).exp())
        .collect()
}

/// Responses of every frame to every atom of a linear-chirp dictionary.
///
/// An atom starts at bin frequency `f0` at the frame start and sweeps at
/// `rate` Hz/s under a unit-energy Gaussian envelope. For a fixed rate the
/// inner products over all start bins are one FFT of the dechirped frame.
#[derive(Debug, Clone, PartialEq)]
pub struct ChirpletMap {
    pub freqs_hz: Vec<f64>,
    pub rates_hz_per_s: Vec<f64>,
    pub frame_starts_s: Vec<f64>,
    /// `responses[frame][rate][bin] = |<frame, atom>|^2`.
    pub responses: Vec<Vec<Vec<f64>>>,
    pub zero_padded_samples: usize,
}

/// Location of the strongest atom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BestAtom {
    pub frame: usize,
    pub rate_index: usize,
    pub bin: usize,
    pub response: f64,
}

impl ChirpletMap {
    pub fn compute(clip: &AudioClip, params: &TransformParams) -> Result<Self> {
        params.validate(clip.sample_rate_hz)?;
        let n = params.n_fft;
        let hop = params.hop_length;
        let fs = clip.sample_rate_hz as f64;
        let samples = clip.samples_f64();
        let window = gaussian_window(n);
        let energy: f64 = window.iter().map(|w| w * w).sum();
        let fft = FftPlanner::new().plan_fft_forward(n);

        // Dechirp factors per rate, folded with the window.
        let kernels: Vec<Vec<Complex64>> = params
            .chirp_rates_hz_per_s
            .iter()
            .map(|&rate| {
                (0..n)
                    .map(|i| {
                        let t = i as f64 / fs;
                        Complex64::from_polar(window[i], -PI * rate * t * t)
                    })
                    .collect()
            })
            .collect();

        let frames = frame_count(samples.len(), n, hop);
        let mut buf = vec![Complex64::default(); n];
        let mut responses = Vec::with_capacity(frames);
        let mut frame_starts_s = Vec::with_capacity(frames);
        for f in 0..frames {
            let start = f * hop;
            let segment = &samples[start..(start + n).min(samples.len())];
            let per_rate = kernels
                .iter()
                .map(|kernel| {
                    for (i, slot) in buf.iter_mut().enumerate() {
                        *slot = kernel[i] * segment.get(i).copied().unwrap_or(0.0);
                    }
                    fft.process(&mut buf);
                    buf[..=n / 2].iter().map(|c| c.norm_sqr() / energy).collect()
                })
                .collect();
            responses.push(per_rate);
            frame_starts_s.push(start as f64 / fs);
        }

        Ok(ChirpletMap {
            freqs_hz: (0..=n / 2).map(|k| k as f64 * fs / n as f64).collect(),
            rates_hz_per_s: params.chirp_rates_hz_per_s.clone(),
            frame_starts_s,
            responses,
            zero_padded_samples: n.saturating_sub(samples.len()),
        })
    }

    /// Strongest atom in one frame (lowest rate index, then bin, on ties).
    pub fn best_in_frame(&self, frame: usize) -> Option<BestAtom> {
        let mut best: Option<BestAtom> = None;
        for (rate_index, row) in self.responses.get(frame)?.iter().enumerate() {
            for (bin, &response) in row.iter().enumerate() {
                if best.is_none_or(|b| response > b.response) {
                    best = Some(BestAtom { frame, rate_index, bin, response });
                }
            }
        }
        best
    }

    /// Strongest atom over all frames (earliest frame on ties).
    pub fn best_atom(&self) -> Option<BestAtom> {
        (0..self.responses.len())
            .filter_map(|f| self.best_in_frame(f))
            .fold(None, |acc: Option<BestAtom>, b| match acc {
                Some(a) if a.response >= b.response => Some(a),
                _ => Some(b),
            })
    }

    /// Per start bin: mean over frames of the best response across rates.
    pub fn spectrum(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.freqs_hz.len()];
        for frame in &self.responses {
            for (k, slot) in out.iter_mut().enumerate() {
                *slot += frame.iter().map(|row| row[k]).fold(0.0, f64::max);
            }
        }
        let frames = self.responses.len().max(1) as f64;
        out.iter_mut().for_each(|v| *v /= frames);
        out
    }

    /// Rate whose mean response is largest at each start bin.
    pub fn best_rate_per_bin(&self) -> Vec<f64> {
        (0..self.freqs_hz.len())
            .map(|k| {
                let mut best = (0usize, f64::NEG_INFINITY);
                for r in 0..self.rates_hz_per_s.len() {
                    let total: f64 = self.responses.iter().map(|frame| frame[r][k]).sum();
                    if total > best.1 {
                        best = (r, total);
                    }
                }
                self.rates_hz_per_s[best.0]
            })
            .collect()
    }
}

/// Best chirp-atom response per start frequency on the PSD bin grid.
pub fn compute_chirplet(clip: &AudioClip, params: &TransformParams) -> Result<SpectralResult> {
    let map = ChirpletMap::compute(clip, params)?;
    let mut derived = BTreeMap::new();
    derived.insert("frames".into(), map.responses.len() as f64);
    derived.insert("zero_padded_samples".into(), map.zero_padded_samples as f64);
    derived.insert("gaussian_sigma_samples".into(), params.n_fft as f64 / 6.0);
    let spectrum = map.spectrum();
    Ok(SpectralResult::new(
        Method::Chirplet,
        map.freqs_hz,
        spectrum,
        params.clone(),
        derived,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transforms::fft::PowerSpectrum;

    fn clip_from(fs: u32, secs: f64, phase: impl Fn(f64) -> f64) -> AudioClip {
        let n = (fs as f64 * secs) as usize;
        let samples = (0..n).map(|i| phase(i as f64 / fs as f64).sin() as f32).collect();
        AudioClip::from_samples("c", samples, fs)
    }

    #[test]
    fn zero_rate_matches_windowed_dft() {
        let fs = 22_050;
        let clip = clip_from(fs, 0.5, |t| 2.0 * PI * 1234.0 * t);
        let mut params = TransformParams::for_method(Method::Chirplet);
        params.chirp_rates_hz_per_s = vec![0.0];
        let result = compute_chirplet(&clip, &params).unwrap();
        let window = gaussian_window(params.n_fft);
        let samples = clip.samples_f64();
        let dft = PowerSpectrum::new(window).spectrum(&samples[..params.n_fft]);
        let a = result.argmax().unwrap() as i64;
        let b = crate::transforms::argmax(&dft).unwrap() as i64;
        assert!((a - b).abs() <= 1, "chirplet {a} vs dft {b}");
    }

    #[test]
    fn silence_has_no_response() {
        let clip = AudioClip::from_samples("z", vec![0.0; 8192], 22_050);
        let result = compute_chirplet(&clip, &TransformParams::for_method(Method::Chirplet)).unwrap();
        assert!(result.psd_linear.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rising_chirp_prefers_matching_rate() {
        // 500 Hz sits exactly on bin 64 at fs=16 kHz, n_fft=2048.
        let fs = 16_000;
        let clip = clip_from(fs, 1.0, |t| 2.0 * PI * (500.0 * t + 500.0 * t * t));
        let mut params = TransformParams::for_method(Method::Chirplet);
        params.chirp_rates_hz_per_s = vec![0.0, 500.0, 1000.0, 2000.0];
        let map = ChirpletMap::compute(&clip, &params).unwrap();
        let best = map.best_in_frame(0).unwrap();
        assert_eq!(map.rates_hz_per_s[best.rate_index], 1000.0);
        assert_eq!(best.bin, 64);
    }
}
