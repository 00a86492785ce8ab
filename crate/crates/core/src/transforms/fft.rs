//! Thin wrapper over `rustfft` with the one-sided power scaling shared by the STFT paths.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Forward DFT of a real sequence of any length.
pub fn forward(signal: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = signal.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    if buf.is_empty() {
        return buf;
    }
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf
}

/// Windowed one-sided power spectra at a fixed size.
///
/// Scaling is `c_k |X_k|^2 / (sum w)^2` with `c_k = 2` except DC and Nyquist,
/// so a bin-centred sinusoid of amplitude `A` reads `A^2 / 2` under any window,
/// and the rectangular-window spectrum sums to the mean signal power.
pub struct PowerSpectrum {
    n_fft: usize,
    window: Vec<f64>,
    scale: f64,
    fft: Arc<dyn Fft<f64>>,
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl PowerSpectrum {
    pub fn new(window: Vec<f64>) -> Self {
        let n_fft = window.len();
        let fft = FftPlanner::new().plan_fft_forward(n_fft);
        let sum: f64 = window.iter().sum();
        let scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        PowerSpectrum {
            n_fft,
            scale: 1.0 / (sum * sum),
            window,
            fft,
            buf: vec![Complex64::default(); n_fft],
            scratch,
        }
    }

    pub fn n_bins(&self) -> usize {
        self.n_fft / 2 + 1
    }

    /// Accumulates the scaled spectrum of `segment` (zero-extended to `n_fft`) into `out`.
    pub fn accumulate(&mut self, segment: &[f64], out: &mut [f64]) {
        for (i, slot) in self.buf.iter_mut().enumerate() {
            let x = segment.get(i).copied().unwrap_or(0.0);
            *slot = Complex64::new(x * self.window[i], 0.0);
        }
        self.fft.process_with_scratch(&mut self.buf, &mut self.scratch);
        let last = self.n_fft / 2;
        for (k, acc) in out.iter_mut().enumerate().take(last + 1) {
            let c = if k == 0 || k == last { 1.0 } else { 2.0 };
            *acc += c * self.buf[k].norm_sqr() * self.scale;
        }
    }

    pub fn spectrum(&mut self, segment: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_bins()];
        self.accumulate(segment, &mut out);
        out
    }
}
