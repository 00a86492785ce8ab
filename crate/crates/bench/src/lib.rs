//! Fixtures shared by the benchmarks.

use std::f64::consts::PI;

use specdesk_core::clip::AudioClip;

pub const FS: u32 = 22_050;

/// Five-partial harmonic stack on a 440 Hz fundamental with a slow upward glide.
pub fn harmonic_clip(secs: f64) -> AudioClip {
    let n = (FS as f64 * secs) as usize;
    let samples = (0..n)
        .map(|i| {
            let t = i as f64 / FS as f64;
            let phase = 2.0 * PI * (440.0 * t + 20.0 * t * t);
            let v: f64 = (1..=5).map(|h| (h as f64 * phase).sin() / h as f64).sum();
            (0.4 * v) as f32
        })
        .collect();
    AudioClip::from_samples("bench", samples, FS)
}
