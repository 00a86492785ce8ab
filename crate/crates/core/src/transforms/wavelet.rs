//! Orthonormal wavelet filter banks: periodized packet trees and the
//! undecimated (a-trous) stationary transform.

use std::collections::BTreeMap;

use super::{Method, SpectralResult, TransformParams, Wavelet};
use crate::clip::AudioClip;
use crate::error::{Error, Result};

const TAPS: usize = 16;

/// Daubechies-8 scaling (reconstruction low-pass) filter.
const DB8: [f64; TAPS] = [
    0.05441584224310401,
    0.31287159091429995,
    0.6756307362972898,
    0.5853546836542067,
    -0.015829105256349306,
    -0.2840155429615469,
    0.0004724845739132828,
    0.12874742662047847,
    -0.017369301001807547,
    -0.044088253930794755,
    0.013981027917398282,
    0.008746094047405777,
    -0.004870352993451574,
    -0.00039174037337694705,
    0.0006754494064505693,
    -0.00011747678412476953,
];

/// Symlet-8 scaling (reconstruction low-pass) filter.
const SYM8: [f64; TAPS] = [
    0.0018899503327594609,
    -0.0003029205147213668,
    -0.01495225833704823,
    0.003808752013890615,
    0.049137179673607506,
    -0.027219029917056003,
    -0.05194583810770904,
    0.3644418948353314,
    0.7771857517005235,
    0.4813596512583722,
    -0.061273359067658524,
    -0.1432942383508097,
    0.007607487324917605,
    0.03169508781149298,
    -0.0005421323317911481,
    -0.0033824159510061256,
];

impl Wavelet {
    pub fn lowpass(self) -> &'static [f64; TAPS] {
        match self {
            Wavelet::Db8 => &DB8,
            Wavelet::Sym8 => &SYM8,
        }
    }

    /// Quadrature mirror: `g[n] = (-1)^n h[L-1-n]`.
    pub fn highpass(self) -> [f64; TAPS] {
        let h = self.lowpass();
        std::array::from_fn(|n| if n % 2 == 0 { h[TAPS - 1 - n] } else { -h[TAPS - 1 - n] })
    }
}

/// One periodized analysis step: `(approximation, detail)`, each half length.
pub fn analysis_step(x: &[f64], wavelet: Wavelet) -> (Vec<f64>, Vec<f64>) {
    let h = wavelet.lowpass();
    let g = wavelet.highpass();
    let n = x.len();
    debug_assert!(n >= 2 && n.is_multiple_of(2));
    let half = n / 2;
    let mut approx = vec![0.0; half];
    let mut detail = vec![0.0; half];
    for k in 0..half {
        let (mut a, mut d) = (0.0, 0.0);
        for t in 0..TAPS {
            let v = x[(2 * k + t) % n];
            a += h[t] * v;
            d += g[t] * v;
        }
        approx[k] = a;
        detail[k] = d;
    }
    (approx, detail)
}

/// Transpose of [`analysis_step`]; the inverse because the step is orthogonal.
pub fn synthesis_step(approx: &[f64], detail: &[f64], wavelet: Wavelet) -> Vec<f64> {
    let h = wavelet.lowpass();
    let g = wavelet.highpass();
    let n = approx.len() * 2;
    let mut x = vec![0.0; n];
    for k in 0..approx.len() {
        for t in 0..TAPS {
            x[(2 * k + t) % n] += h[t] * approx[k] + g[t] * detail[k];
        }
    }
    x
}

/// Full packet tree to a fixed depth; leaves are kept in natural (Paley) order.
#[derive(Debug, Clone, PartialEq)]
pub struct PacketTree {
    pub wavelet: Wavelet,
    pub levels: u32,
    pub leaves: Vec<Vec<f64>>,
}

/// Natural-order position of the `i`-th band in ascending frequency.
pub fn gray_code(i: usize) -> usize {
    i ^ (i >> 1)
}

impl PacketTree {
    /// Decomposes `x`, whose length must be a multiple of `2^levels`.
    pub fn decompose(x: &[f64], wavelet: Wavelet, levels: u32) -> Result<Self> {
        let block = 1usize << levels;
        if x.is_empty() || !x.len().is_multiple_of(block) {
            return Err(Error::InvalidParams(format!(
                "packet decomposition needs a length divisible by {block}, got {}",
                x.len()
            )));
        }
        let mut nodes = vec![x.to_vec()];
        for _ in 0..levels {
            nodes = nodes
                .iter()
                .flat_map(|node| {
                    let (a, d) = analysis_step(node, wavelet);
                    [a, d]
                })
                .collect();
        }
        Ok(PacketTree {
            wavelet,
            levels,
            leaves: nodes,
        })
    }

    pub fn reconstruct(&self) -> Vec<f64> {
        let mut nodes = self.leaves.clone();
        for _ in 0..self.levels {
            nodes = nodes
                .chunks_exact(2)
                .map(|pair| synthesis_step(&pair[0], &pair[1], self.wavelet))
                .collect();
        }
        nodes.pop().unwrap_or_default()
    }

    /// Leaf energies in ascending frequency order.
    pub fn band_energies(&self) -> Vec<f64> {
        (0..self.leaves.len())
            .map(|i| self.leaves[gray_code(i)].iter().map(|c| c * c).sum())
            .collect()
    }
}

/// Detail coefficients per level (finest first) plus the final approximation.
#[derive(Debug, Clone, PartialEq)]
pub struct SwtLevels {
    pub details: Vec<Vec<f64>>,
    pub approx: Vec<f64>,
}

impl SwtLevels {
    /// Undecimated transform with circular extension.
    ///
    /// Filters are scaled by `1/sqrt(2)` so each level conserves energy.
    pub fn decompose(x: &[f64], wavelet: Wavelet, levels: u32) -> Self {
        let n = x.len();
        let scale = std::f64::consts::FRAC_1_SQRT_2;
        let h = wavelet.lowpass().map(|v| v * scale);
        let g = wavelet.highpass().map(|v| v * scale);
        let mut approx = x.to_vec();
        let mut details = Vec::with_capacity(levels as usize);
        for level in 0..levels {
            let stride = 1usize << level;
            let mut next = vec![0.0; n];
            let mut detail = vec![0.0; n];
            for i in 0..n {
                let (mut a, mut d) = (0.0, 0.0);
                for t in 0..TAPS {
                    let v = approx[(i + stride * t) % n];
                    a += h[t] * v;
                    d += g[t] * v;
                }
                next[i] = a;
                detail[i] = d;
            }
            details.push(detail);
            approx = next;
        }
        SwtLevels { details, approx }
    }

    /// Energies ordered by ascending frequency: approximation, then coarsest to finest detail.
    pub fn band_energies(&self) -> Vec<f64> {
        let energy = |v: &[f64]| v.iter().map(|c| c * c).sum::<f64>();
        std::iter::once(energy(&self.approx))
            .chain(self.details.iter().rev().map(|d| energy(d)))
            .collect()
    }
}

fn padded_to_multiple(samples: Vec<f64>, block: usize) -> (Vec<f64>, usize) {
    let padded_len = samples.len().div_ceil(block) * block;
    let pad = padded_len - samples.len();
    let mut samples = samples;
    samples.resize(padded_len, 0.0);
    (samples, pad)
}

/// Wavelet packet energies mapped to equal-width bands in frequency order.
///
/// Each band reports mean power per sample divided by its width in Hz.
pub fn compute_wavelet_packet(clip: &AudioClip, params: &TransformParams) -> Result<SpectralResult> {
    params.validate(clip.sample_rate_hz)?;
    let levels = params.decomposition_levels;
    let block = 1usize << levels;
    let original_len = clip.samples.len();
    if original_len < block {
        return Err(Error::ClipTooShort {
            len: original_len,
            needed: block,
        });
    }
    let (samples, pad) = padded_to_multiple(clip.samples_f64(), block);
    let tree = PacketTree::decompose(&samples, params.wavelet, levels)?;
    let width = clip.nyquist_hz() / block as f64;
    let freqs = (0..block).map(|i| (i as f64 + 0.5) * width).collect();
    let psd = tree
        .band_energies()
        .into_iter()
        .map(|e| e / original_len as f64 / width)
        .collect();
    let mut derived = BTreeMap::new();
    derived.insert("zero_padded_samples".into(), pad as f64);
    derived.insert("band_width_hz".into(), width);
    Ok(SpectralResult::new(Method::Wave, freqs, psd, params.clone(), derived))
}

/// Stationary wavelet energies per level, one octave band each.
pub fn compute_swt(clip: &AudioClip, params: &TransformParams) -> Result<SpectralResult> {
    params.validate(clip.sample_rate_hz)?;
    let levels = params.decomposition_levels;
    let original_len = clip.samples.len();
    let (samples, pad) = padded_to_multiple(clip.samples_f64(), 1usize << levels);
    let swt = SwtLevels::decompose(&samples, params.wavelet, levels);
    let nyquist = clip.nyquist_hz();
    // Band edges: [0, ny/2^L], then [ny/2^j, ny/2^(j-1)] for j = L..1.
    let mut edges = vec![(0.0, nyquist / (1u64 << levels) as f64)];
    for j in (1..=levels).rev() {
        edges.push((nyquist / (1u64 << j) as f64, nyquist / (1u64 << (j - 1)) as f64));
    }
    let energies = swt.band_energies();
    let freqs = edges.iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect();
    let psd = energies
        .iter()
        .zip(&edges)
        .map(|(e, (lo, hi))| e / original_len as f64 / (hi - lo))
        .collect();
    let mut derived = BTreeMap::new();
    derived.insert("zero_padded_samples".into(), pad as f64);
    Ok(SpectralResult::new(Method::Swt, freqs, psd, params.clone(), derived))
}
