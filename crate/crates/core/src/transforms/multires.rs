use std::collections::BTreeMap;

use super::stft::psd_unchecked;
use super::{power_to_db, Method, SpectralResult, TransformParams};
use crate::clip::AudioClip;
use crate::error::{Error, Result};

/// Bins averaged on each side of a seam.
pub const SEAM_EDGE_BINS: usize = 3;

fn edge_mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len().max(1) as f64
}

/// Stitches PSDs of different window sizes into one spectrum.
///
/// Each plan entry contributes its bins inside `(band_lo, band_hi]` (the first
/// entry also keeps `band_lo`). Every band after the first is scaled so the mean
/// of its first three bins equals the mean of the last three bins before it.
pub fn compute_multires(clip: &AudioClip, params: &TransformParams) -> Result<SpectralResult> {
    params.validate(clip.sample_rate_hz)?;
    let plan = params.resolved_plan(clip.sample_rate_hz);

    let mut freqs = Vec::new();
    let mut psd = Vec::new();
    let mut derived = BTreeMap::new();
    for (i, band) in plan.iter().enumerate() {
        let hop = (band.n_fft * params.hop_length / params.n_fft).clamp(1, band.n_fft);
        let entry = params.clone().with_fft(band.n_fft, hop);
        let full = psd_unchecked(clip, &entry, Method::MultiRes);

        let keep = |f: f64| {
            let above_lo = if i == 0 { f >= band.band_lo_hz } else { f > band.band_lo_hz };
            above_lo && f <= band.band_hi_hz
        };
        let (band_freqs, mut band_psd): (Vec<f64>, Vec<f64>) = full
            .freqs_hz
            .iter()
            .zip(&full.psd_linear)
            .filter(|(f, _)| keep(**f))
            .map(|(f, p)| (*f, *p))
            .unzip();
        if band_freqs.is_empty() {
            return Err(Error::InvalidParams(format!(
                "multires band ({}, {}] holds no bins at n_fft={}",
                band.band_lo_hz, band.band_hi_hz, band.n_fft
            )));
        }

        if i > 0 {
            let below = edge_mean(&psd[psd.len().saturating_sub(SEAM_EDGE_BINS)..]);
            let above = edge_mean(&band_psd[..SEAM_EDGE_BINS.min(band_psd.len())]);
            let gain = if below > 0.0 && above > 0.0 { below / above } else { 1.0 };
            band_psd.iter_mut().for_each(|v| *v *= gain);
            derived.insert(format!("seam_{i}_gain"), gain);
            derived.insert(format!("seam_{i}_index"), freqs.len() as f64);
        }
        derived.insert(format!("band_{i}_hop"), hop as f64);
        derived.insert(
            format!("band_{i}_zero_padded_samples"),
            full.derived.get("zero_padded_samples").copied().unwrap_or(0.0),
        );
        freqs.extend(band_freqs);
        psd.extend(band_psd);
    }
    derived.insert("bands".into(), plan.len() as f64);
    Ok(SpectralResult::new(Method::MultiRes, freqs, psd, params.clone(), derived))
}

/// dB step between the last bin below every seam and the first bin above it.
///
/// The three-bin means used for scaling agree exactly after stitching, so the
/// step between neighbouring bins is what shows a seam.
pub fn seam_discontinuities_db(result: &SpectralResult) -> Vec<f64> {
    let mut seams: Vec<usize> = result
        .derived
        .iter()
        .filter(|(k, _)| k.starts_with("seam_") && k.ends_with("_index"))
        .map(|(_, &v)| v as usize)
        .collect();
    seams.sort_unstable();
    seams
        .into_iter()
        .filter(|&at| at > 0 && at < result.len())
        .map(|at| (power_to_db(result.psd_linear[at - 1]) - power_to_db(result.psd_linear[at])).abs())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transforms::{compute_psd, MultiresBand};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn noise(fs: u32, secs: f64, seed: u64) -> AudioClip {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, 0.2).unwrap();
        let n = (fs as f64 * secs) as usize;
        AudioClip::from_samples("noise", (0..n).map(|_| normal.sample(&mut rng) as f32).collect(), fs)
    }

    #[test]
    fn single_entry_plan_is_band_limited_psd() {
        let clip = noise(22_050, 1.0, 1);
        let mut params = TransformParams::for_method(Method::MultiRes);
        params.multires_window_plan = Some(vec![MultiresBand {
            n_fft: 2048,
            band_lo_hz: 0.0,
            band_hi_hz: 11_025.0,
        }]);
        let stitched = compute_multires(&clip, &params).unwrap();
        let plain = compute_psd(&clip, &params).unwrap();
        assert_eq!(stitched.freqs_hz, plain.freqs_hz);
        assert_eq!(stitched.psd_linear, plain.psd_linear);
    }

    #[test]
    fn default_plan_on_noise_is_continuous() {
        let clip = noise(22_050, 3.0, 42);
        let result = compute_multires(&clip, &TransformParams::for_method(Method::MultiRes)).unwrap();
        assert!(result.freqs_hz.windows(2).all(|w| w[0] < w[1]));
        let seams = seam_discontinuities_db(&result);
        assert_eq!(seams.len(), 2);
        assert!(seams.iter().all(|&d| d < 1.0), "{seams:?}");
        // Power-spectrum scaling gives noise a level that halves with each n_fft
        // doubling: 4096 -> 2048 needs 1/2, and 2048 -> 512 needs 1/4 on top.
        let g1 = result.derived["seam_1_gain"];
        let g2 = result.derived["seam_2_gain"];
        assert!((g1 - 0.5).abs() < 0.1, "{g1}");
        assert!((g2 - 0.125).abs() < 0.03, "{g2}");
    }

    #[test]
    fn empty_band_is_rejected() {
        let clip = noise(22_050, 0.5, 3);
        let mut params = TransformParams::for_method(Method::MultiRes);
        params.multires_window_plan = Some(vec![
            MultiresBand { n_fft: 64, band_lo_hz: 0.0, band_hi_hz: 10.0 },
            MultiresBand { n_fft: 64, band_lo_hz: 10.0, band_hi_hz: 20.0 },
            MultiresBand { n_fft: 64, band_lo_hz: 20.0, band_hi_hz: 11_025.0 },
        ]);
        params.fmin_hz = 5.0;
        assert!(compute_multires(&clip, &params).is_err());
    }
}
