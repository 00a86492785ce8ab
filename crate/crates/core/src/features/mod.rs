//! Peaks in a spectrum, and ridge/vein trajectories through a spectrogram.

mod peaks;
mod tracks;

pub use peaks::{detect_peaks, local_maxima, peak_order, percentile, prominence, Peak, PeakConfig};
pub use tracks::{extract_ridge, extract_veins, Ridge, TrackPoint, Vein, VeinConfig};
