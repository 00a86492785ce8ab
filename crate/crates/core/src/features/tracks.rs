use serde::{Deserialize, Serialize};

use super::peaks::local_maxima;
use crate::error::{Error, Result};
use crate::transforms::Spectrogram;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackPoint {
    pub time_s: f64,
    pub freq_hz: f64,
    pub magnitude: f64,
}

/// Dominant frequency per frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ridge {
    pub points: Vec<TrackPoint>,
}

/// A run of linked local maxima over consecutive frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vein {
    pub points: Vec<TrackPoint>,
    pub persistence_frames: usize,
}

impl Vein {
    pub fn total_magnitude(&self) -> f64 {
        self.points.iter().map(|p| p.magnitude).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VeinConfig {
    /// `None` resolves to four frequency-bin widths of the spectrogram.
    pub max_jump_hz: Option<f64>,
    pub min_persistence: usize,
    pub max_veins: usize,
}

impl Default for VeinConfig {
    fn default() -> Self {
        VeinConfig {
            max_jump_hz: None,
            min_persistence: 5,
            max_veins: 5,
        }
    }
}

impl VeinConfig {
    pub const DEFAULT_JUMP_BINS: f64 = 4.0;

    pub fn resolved_max_jump(&self, spec: &Spectrogram) -> f64 {
        self.max_jump_hz
            .unwrap_or(Self::DEFAULT_JUMP_BINS * spec.bin_width_hz())
    }
}

/// Row maximum of every frame; ties go to the lowest frequency.
pub fn extract_ridge(spec: &Spectrogram) -> Ridge {
    let points = spec
        .magnitude
        .iter()
        .zip(&spec.times_s)
        .filter_map(|(row, &time_s)| {
            let bin = crate::transforms::argmax(row)?;
            Some(TrackPoint {
                time_s,
                freq_hz: spec.freqs_hz[bin],
                magnitude: row[bin],
            })
        })
        .collect();
    Ridge { points }
}

struct OpenTrack {
    points: Vec<TrackPoint>,
}

/// Persistent bands: per-frame maxima linked greedily by nearest frequency.
///
/// Each frame contributes its `max_veins` strongest local maxima. Pairs of
/// (open track, maximum) within `max_jump_hz` are linked closest first, each
/// side used once; unmatched maxima open new tracks and unmatched tracks close.
/// This is a greedy approximation, not a globally optimal assignment.
pub fn extract_veins(
    spec: &Spectrogram,
    max_jump_hz: f64,
    min_persistence: usize,
    max_veins: usize,
) -> Result<Vec<Vein>> {
    if max_jump_hz.is_nan() || max_jump_hz <= 0.0 {
        return Err(Error::InvalidParams(format!("max_jump_hz must be positive, got {max_jump_hz}")));
    }
    if min_persistence < 2 {
        return Err(Error::InvalidParams("min_persistence must be at least 2".into()));
    }

    let mut open: Vec<OpenTrack> = Vec::new();
    let mut closed: Vec<OpenTrack> = Vec::new();
    for (row, &time_s) in spec.magnitude.iter().zip(&spec.times_s) {
        let mut maxima = local_maxima(row);
        maxima.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
        maxima.truncate(max_veins);
        let points: Vec<TrackPoint> = maxima
            .into_iter()
            .map(|bin| TrackPoint {
                time_s,
                freq_hz: spec.freqs_hz[bin],
                magnitude: row[bin],
            })
            .collect();

        let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
        for (t, track) in open.iter().enumerate() {
            let last = track.points.last().expect("open tracks are non-empty").freq_hz;
            for (m, p) in points.iter().enumerate() {
                let jump = (p.freq_hz - last).abs();
                if jump <= max_jump_hz {
                    candidates.push((jump, t, m));
                }
            }
        }
        candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

        let mut track_used = vec![false; open.len()];
        let mut point_used = vec![false; points.len()];
        for (_, t, m) in candidates {
            if !track_used[t] && !point_used[m] {
                track_used[t] = true;
                point_used[m] = true;
                open[t].points.push(points[m]);
            }
        }

        let mut still_open = Vec::with_capacity(open.len() + points.len());
        for (track, used) in open.into_iter().zip(track_used) {
            if used {
                still_open.push(track);
            } else {
                closed.push(track);
            }
        }
        for (p, used) in points.into_iter().zip(point_used) {
            if !used {
                still_open.push(OpenTrack { points: vec![p] });
            }
        }
        open = still_open;
    }
    closed.extend(open);

    let mut veins: Vec<Vein> = closed
        .into_iter()
        .filter(|t| t.points.len() >= min_persistence)
        .map(|t| Vein {
            persistence_frames: t.points.len(),
            points: t.points,
        })
        .collect();
    veins.sort_by(|a, b| {
        b.total_magnitude()
            .total_cmp(&a.total_magnitude())
            .then(a.points[0].time_s.total_cmp(&b.points[0].time_s))
            .then(a.points[0].freq_hz.total_cmp(&b.points[0].freq_hz))
    });
    Ok(veins)
}
