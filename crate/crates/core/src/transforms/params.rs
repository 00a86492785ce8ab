use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The six comparative representations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Method {
    FftDual,
    Cqt,
    /// Wavelet packet decomposition.
    Wave,
    Swt,
    Chirplet,
    MultiRes,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::FftDual,
        Method::Cqt,
        Method::Wave,
        Method::Swt,
        Method::Chirplet,
        Method::MultiRes,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::FftDual => "FFT_DUAL",
            Method::Cqt => "CQT",
            Method::Wave => "WAVE",
            Method::Swt => "SWT",
            Method::Chirplet => "CHIRPLET",
            Method::MultiRes => "MULTI_RES",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_uppercase().replace('-', "_");
        let key = match key.as_str() {
            "FFT" => "FFT_DUAL",
            "MULTIRES" => "MULTI_RES",
            "WPD" | "WAVELET" => "WAVE",
            other => other,
        };
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == key)
            .ok_or_else(|| Error::InvalidParams(format!("unknown method `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    #[default]
    Hann,
    Hamming,
    Rectangular,
}

impl Window {
    /// Periodic (DFT-even) window of length `n`.
    pub fn coefficients(self, n: usize) -> Vec<f64> {
        let step = 2.0 * std::f64::consts::PI / n as f64;
        (0..n)
            .map(|i| match self {
                Window::Hann => 0.5 - 0.5 * (step * i as f64).cos(),
                Window::Hamming => 0.54 - 0.46 * (step * i as f64).cos(),
                Window::Rectangular => 1.0,
            })
            .collect()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Window::Hann => "hann",
            Window::Hamming => "hamming",
            Window::Rectangular => "rectangular",
        }
    }
}

impl FromStr for Window {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hann" | "hanning" => Ok(Window::Hann),
            "hamming" => Ok(Window::Hamming),
            "rectangular" | "rect" | "boxcar" => Ok(Window::Rectangular),
            other => Err(Error::InvalidParams(format!("unknown window `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Wavelet {
    #[default]
    Sym8,
    Db8,
}

impl Wavelet {
    pub fn as_str(self) -> &'static str {
        match self {
            Wavelet::Sym8 => "sym8",
            Wavelet::Db8 => "db8",
        }
    }
}

impl FromStr for Wavelet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sym8" => Ok(Wavelet::Sym8),
            "db8" => Ok(Wavelet::Db8),
            other => Err(Error::InvalidParams(format!("unknown wavelet `{other}`"))),
        }
    }
}

/// One entry of a multi-resolution plan: bins of an `n_fft` PSD in `(band_lo_hz, band_hi_hz]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiresBand {
    pub n_fft: usize,
    pub band_lo_hz: f64,
    pub band_hi_hz: f64,
}

/// Default chirp-rate dictionary, Hz/s.
pub const DEFAULT_CHIRP_RATES: [f64; 7] = [-2000.0, -1000.0, -500.0, 0.0, 500.0, 1000.0, 2000.0];

/// C1, the conventional lowest constant-Q bin.
pub const DEFAULT_FMIN_HZ: f64 = 32.703_195_662_574_764;

pub const MIN_N_FFT: usize = 16;
pub const MAX_N_FFT: usize = 65_536;
pub const MAX_LEVELS: u32 = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformParams {
    pub method: Method,
    pub n_fft: usize,
    pub hop_length: usize,
    pub window: Window,
    pub fmin_hz: f64,
    /// `None` resolves to the clip's Nyquist frequency.
    pub fmax_hz: Option<f64>,
    pub bins_per_octave: u32,
    pub wavelet: Wavelet,
    pub decomposition_levels: u32,
    pub chirp_rates_hz_per_s: Vec<f64>,
    /// `None` resolves to [`default_multires_plan`] for the clip's sample rate.
    pub multires_window_plan: Option<Vec<MultiresBand>>,
}

impl Default for TransformParams {
    fn default() -> Self {
        TransformParams {
            method: Method::FftDual,
            n_fft: 2048,
            hop_length: 512,
            window: Window::Hann,
            fmin_hz: DEFAULT_FMIN_HZ,
            fmax_hz: None,
            bins_per_octave: 12,
            wavelet: Wavelet::Sym8,
            decomposition_levels: 5,
            chirp_rates_hz_per_s: DEFAULT_CHIRP_RATES.to_vec(),
            multires_window_plan: None,
        }
    }
}

impl TransformParams {
    pub fn for_method(method: Method) -> Self {
        TransformParams {
            method,
            ..Default::default()
        }
    }

    pub fn with_fft(mut self, n_fft: usize, hop_length: usize) -> Self {
        self.n_fft = n_fft;
        self.hop_length = hop_length;
        self
    }

    pub fn resolved_fmax(&self, sample_rate_hz: u32) -> f64 {
        self.fmax_hz.unwrap_or(sample_rate_hz as f64 / 2.0)
    }

    pub fn resolved_plan(&self, sample_rate_hz: u32) -> Vec<MultiresBand> {
        self.multires_window_plan
            .clone()
            .unwrap_or_else(|| default_multires_plan(sample_rate_hz))
    }

    /// Checks every invariant that does not depend on the clip length.
    pub fn validate(&self, sample_rate_hz: u32) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if sample_rate_hz == 0 {
            return bad("sample rate must be positive".into());
        }
        validate_n_fft(self.n_fft)?;
        if self.hop_length == 0 || self.hop_length > self.n_fft {
            return bad(format!(
                "hop_length {} must lie in [1, n_fft={}]",
                self.hop_length, self.n_fft
            ));
        }
        let nyquist = sample_rate_hz as f64 / 2.0;
        let fmax = self.resolved_fmax(sample_rate_hz);
        if !(self.fmin_hz.is_finite() && fmax.is_finite())
            || self.fmin_hz <= 0.0
            || self.fmin_hz >= fmax
            || fmax > nyquist
        {
            return bad(format!(
                "need 0 < fmin ({}) < fmax ({fmax}) <= Nyquist ({nyquist})",
                self.fmin_hz
            ));
        }
        if self.bins_per_octave == 0 {
            return bad("bins_per_octave must be at least 1".into());
        }
        if self.decomposition_levels == 0 || self.decomposition_levels > MAX_LEVELS {
            return bad(format!(
                "decomposition_levels must lie in [1, {MAX_LEVELS}], got {}",
                self.decomposition_levels
            ));
        }
        if self.chirp_rates_hz_per_s.is_empty() {
            return bad("chirp rate grid is empty".into());
        }
        if self.chirp_rates_hz_per_s.iter().any(|r| !r.is_finite()) {
            return bad("chirp rates must be finite".into());
        }
        validate_plan(&self.resolved_plan(sample_rate_hz), self.fmin_hz, fmax)
    }
}

pub(crate) fn validate_n_fft(n_fft: usize) -> Result<()> {
    if !n_fft.is_power_of_two() || !(MIN_N_FFT..=MAX_N_FFT).contains(&n_fft) {
        return Err(Error::InvalidParams(format!(
            "n_fft {n_fft} must be a power of two in [{MIN_N_FFT}, {MAX_N_FFT}]"
        )));
    }
    Ok(())
}

/// 4096 points below 1 kHz, 2048 up to 4 kHz, 512 above, clipped at Nyquist.
pub fn default_multires_plan(sample_rate_hz: u32) -> Vec<MultiresBand> {
    let nyquist = sample_rate_hz as f64 / 2.0;
    let mut plan = Vec::new();
    for (n_fft, lo, hi) in [(4096, 0.0, 1000.0), (2048, 1000.0, 4000.0), (512, 4000.0, f64::MAX)] {
        if lo >= nyquist {
            break;
        }
        plan.push(MultiresBand {
            n_fft,
            band_lo_hz: lo,
            band_hi_hz: hi.min(nyquist),
        });
    }
    plan
}

fn validate_plan(plan: &[MultiresBand], fmin: f64, fmax: f64) -> Result<()> {
    let bad = |msg: String| Err(Error::InvalidParams(format!("multires plan: {msg}")));
    let (Some(first), Some(last)) = (plan.first(), plan.last()) else {
        return bad("empty".into());
    };
    for band in plan {
        validate_n_fft(band.n_fft)?;
        if !(band.band_lo_hz.is_finite() && band.band_hi_hz.is_finite())
            || band.band_lo_hz < 0.0
            || band.band_lo_hz >= band.band_hi_hz
        {
            return bad(format!(
                "band ({}, {}] is not a valid interval",
                band.band_lo_hz, band.band_hi_hz
            ));
        }
    }
    for pair in plan.windows(2) {
        if pair[0].band_hi_hz != pair[1].band_lo_hz {
            return bad(format!(
                "gap or overlap between {} and {} Hz",
                pair[0].band_hi_hz, pair[1].band_lo_hz
            ));
        }
    }
    if first.band_lo_hz > fmin || last.band_hi_hz < fmax {
        return bad(format!(
            "bands cover ({}, {}] but the analysis range is ({fmin}, {fmax}]",
            first.band_lo_hz, last.band_hi_hz
        ));
    }
    Ok(())
}
