#![allow(dead_code)]

use std::f64::consts::PI;
use std::path::Path;

use specdesk_core::clip::AudioClip;

pub const FS: u32 = 22_050;

/// Equal-weight sum of sines, scaled into ±0.9.
pub fn tone(id: &str, freqs: &[f64], secs: f64) -> AudioClip {
    let n = (FS as f64 * secs) as usize;
    let samples = (0..n)
        .map(|i| {
            let t = i as f64 / FS as f64;
            (0.9 * freqs.iter().map(|f| (2.0 * PI * f * t).sin()).sum::<f64>() / freqs.len() as f64) as f32
        })
        .collect();
    AudioClip::from_samples(id, samples, FS)
}

pub fn write_wav(dir: &Path, name: &str, clip: &AudioClip) {
    std::fs::create_dir_all(dir).unwrap();
    std::fs::write(dir.join(name), clip.to_wav_bytes().unwrap()).unwrap();
}

/// Three short harmonic recordings named a.wav, b.wav, c.wav.
pub fn corpus(dir: &Path) {
    write_wav(dir, "a.wav", &tone("a", &[440.0, 880.0, 1320.0], 1.0));
    write_wav(dir, "b.wav", &tone("b", &[660.0, 1320.0], 1.0));
    write_wav(dir, "c.wav", &tone("c", &[1000.0, 3000.0], 1.0));
}
