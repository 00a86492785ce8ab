//! Audio ingestion: WAV decoding, file selection, annotation segmentation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Cursor;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::sanitize::{sanitize_in_place, SanitizeReport};

/// Assumed when a run has no inputs to read a rate from.
pub const DEFAULT_SAMPLE_RATE_HZ: u32 = 22_050;

/// A mono, normalized excerpt of a source recording.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    pub id: String,
    pub samples: Vec<f32>,
    pub sample_rate_hz: u32,
    pub source_path: String,
    pub onset_s: f64,
    pub offset_s: f64,
    pub group_key: String,
    pub label: String,
    pub sanitize: SanitizeReport,
}

impl AudioClip {
    /// Builds a clip that spans its own samples, starting at zero.
    ///
    /// Non-finite samples are repaired and out-of-range ones clamped to ±1,
    /// with counts in `sanitize`.
    pub fn from_samples(id: impl Into<String>, mut samples: Vec<f32>, sample_rate_hz: u32) -> Self {
        let id = id.into();
        let offset_s = samples.len() as f64 / sample_rate_hz as f64;
        let sanitize = repair(&mut samples);
        AudioClip {
            group_key: id.clone(),
            id,
            samples,
            sample_rate_hz,
            source_path: String::new(),
            onset_s: 0.0,
            offset_s,
            label: String::new(),
            sanitize,
        }
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz as f64
    }

    pub fn nyquist_hz(&self) -> f64 {
        self.sample_rate_hz as f64 / 2.0
    }

    /// Samples widened to `f64` for the transforms.
    pub fn samples_f64(&self) -> Vec<f64> {
        self.samples.iter().map(|&s| s as f64).collect()
    }

    /// SHA-256 over the sample rate and little-endian `f32` samples.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.sample_rate_hz.to_le_bytes());
        for s in &self.samples {
            hasher.update(s.to_le_bytes());
        }
        hex::encode(hasher.finalize())
    }

    /// Encodes the clip as a mono 32-bit float WAV; decoding returns the samples exactly.
    pub fn to_wav_bytes(&self) -> Result<Vec<u8>> {
        let spec = hound::WavSpec {
            channels: 1,
            sample_rate: self.sample_rate_hz,
            bits_per_sample: 32,
            sample_format: hound::SampleFormat::Float,
        };
        let mut cursor = Cursor::new(Vec::new());
        {
            let mut writer = hound::WavWriter::new(&mut cursor, spec)
                .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
            for &s in &self.samples {
                writer
                    .write_sample(s)
                    .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
            }
            writer
                .finalize()
                .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
        }
        Ok(cursor.into_inner())
    }
}

/// A labeled time window within a clip, in seconds relative to the clip start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub onset_s: f64,
    pub offset_s: f64,
    pub label: String,
}

impl Annotation {
    pub fn new(onset_s: f64, offset_s: f64, label: impl Into<String>) -> Self {
        Annotation {
            onset_s,
            offset_s,
            label: label.into(),
        }
    }
}

/// Clips grouped by key, with tabular metadata kept apart from the audio.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ClipCollection {
    groups: BTreeMap<String, Vec<AudioClip>>,
    metadata: BTreeMap<String, Vec<(String, String)>>,
}

pub const METADATA_CSV_HEADER: [&str; 7] = [
    "clip_id",
    "source",
    "onset_s",
    "offset_s",
    "label",
    "group_key",
    "sample_rate_hz",
];

impl ClipCollection {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_clips(clips: impl IntoIterator<Item = AudioClip>) -> Result<Self> {
        let mut collection = Self::new();
        for clip in clips {
            collection.insert(clip)?;
        }
        Ok(collection)
    }

    /// Adds a clip under its group key. Ids must be unique across the collection.
    pub fn insert(&mut self, clip: AudioClip) -> Result<()> {
        if self.metadata.contains_key(&clip.id) {
            return Err(Error::InvalidParams(format!("duplicate clip id `{}`", clip.id)));
        }
        self.metadata.insert(clip.id.clone(), metadata_row(&clip));
        self.groups.entry(clip.group_key.clone()).or_default().push(clip);
        Ok(())
    }

    pub fn merge(&mut self, other: ClipCollection) -> Result<()> {
        for clip in other.into_clips() {
            self.insert(clip)?;
        }
        Ok(())
    }

    pub fn groups(&self) -> &BTreeMap<String, Vec<AudioClip>> {
        &self.groups
    }

    pub fn metadata(&self) -> &BTreeMap<String, Vec<(String, String)>> {
        &self.metadata
    }

    /// Clips in group order, then insertion order within each group.
    pub fn clips(&self) -> impl Iterator<Item = &AudioClip> {
        self.groups.values().flatten()
    }

    pub fn into_clips(self) -> impl Iterator<Item = AudioClip> {
        self.groups.into_values().flatten()
    }

    pub fn get(&self, id: &str) -> Option<&AudioClip> {
        self.clips().find(|c| c.id == id)
    }

    pub fn len(&self) -> usize {
        self.metadata.len()
    }

    pub fn is_empty(&self) -> bool {
        self.metadata.is_empty()
    }

    pub fn ids(&self) -> Vec<String> {
        self.clips().map(|c| c.id.clone()).collect()
    }

    /// Metadata table as RFC-4180 CSV.
    pub fn metadata_csv(&self) -> String {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        writer.write_record(METADATA_CSV_HEADER).expect("in-memory write");
        for clip in self.clips() {
            writer
                .write_record([
                    clip.id.as_str(),
                    clip.source_path.as_str(),
                    &format!("{:.6}", clip.onset_s),
                    &format!("{:.6}", clip.offset_s),
                    clip.label.as_str(),
                    clip.group_key.as_str(),
                    &clip.sample_rate_hz.to_string(),
                ])
                .expect("in-memory write");
        }
        String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }
}

fn metadata_row(clip: &AudioClip) -> Vec<(String, String)> {
    vec![
        ("source".into(), clip.source_path.clone()),
        ("onset_s".into(), format!("{:.6}", clip.onset_s)),
        ("offset_s".into(), format!("{:.6}", clip.offset_s)),
        ("label".into(), clip.label.clone()),
        ("group_key".into(), clip.group_key.clone()),
        ("sample_rate_hz".into(), clip.sample_rate_hz.to_string()),
    ]
}

/// Decodes a PCM (8/16/24/32-bit) or IEEE-float WAV into a mono clip.
///
/// Channels are averaged. Integer formats are divided by their full-scale
/// value (2^(bits-1)), float data is clamped to [-1, 1] after NaN/Inf repair.
pub fn load_wav(path: impl AsRef<Path>) -> Result<AudioClip> {
    let path = path.as_ref();
    let reader = hound::WavReader::open(path).map_err(|e| wav_error(path, e))?;
    let spec = reader.spec();
    let channels = spec.channels.max(1) as usize;

    let interleaved: Vec<f64> = match spec.sample_format {
        hound::SampleFormat::Float => {
            if spec.bits_per_sample != 32 {
                return Err(Error::UnsupportedEncoding {
                    path: path.into(),
                    reason: format!("{}-bit float", spec.bits_per_sample),
                });
            }
            reader
                .into_samples::<f32>()
                .map(|s| s.map(|v| v as f64))
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| wav_error(path, e))?
        }
        hound::SampleFormat::Int => {
            let bits = spec.bits_per_sample;
            if !matches!(bits, 8 | 16 | 24 | 32) {
                return Err(Error::UnsupportedEncoding {
                    path: path.into(),
                    reason: format!("{bits}-bit PCM"),
                });
            }
            let full_scale = (1u64 << (bits - 1)) as f64;
            reader
                .into_samples::<i32>()
                .map(|s| s.map(|v| v as f64 / full_scale))
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| wav_error(path, e))?
        }
    };

    let frames = interleaved.len() / channels;
    if frames == 0 {
        return Err(Error::EmptyAudio(path.into()));
    }
    let samples: Vec<f32> = interleaved
        .chunks_exact(channels)
        .map(|frame| (frame.iter().sum::<f64>() / channels as f64) as f32)
        .collect();

    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut clip = AudioClip::from_samples(stem, samples, spec.sample_rate);
    clip.source_path = path.to_string_lossy().into_owned();
    Ok(clip)
}

fn repair(samples: &mut [f32]) -> SanitizeReport {
    let mut report = sanitize_in_place(samples);
    for s in samples.iter_mut() {
        if s.abs() > 1.0 {
            *s = s.clamp(-1.0, 1.0);
            report.clamped += 1;
        }
    }
    report
}

fn wav_error(path: &Path, err: hound::Error) -> Error {
    match err {
        hound::Error::IoError(e) => Error::UnreadableFile {
            path: path.into(),
            reason: e.to_string(),
        },
        hound::Error::Unsupported => Error::UnsupportedEncoding {
            path: path.into(),
            reason: "unsupported WAV format".into(),
        },
        other => Error::UnreadableFile {
            path: path.into(),
            reason: other.to_string(),
        },
    }
}

/// Which of the pattern-matched files to keep.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum IndexSet {
    #[default]
    All,
    Some(BTreeSet<usize>),
}

impl IndexSet {
    pub fn contains(&self, index: usize) -> bool {
        match self {
            IndexSet::All => true,
            IndexSet::Some(set) => set.contains(&index),
        }
    }
}

impl FromStr for IndexSet {
    type Err = Error;

    /// Accepts `all`, or comma-separated indices and inclusive ranges (`0,2,5-7`).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s.eq_ignore_ascii_case("all") {
            return Ok(IndexSet::All);
        }
        let bad = |part: &str| Error::InvalidParams(format!("bad index `{part}`"));
        let mut set = BTreeSet::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part.split_once('-') {
                Some((lo, hi)) => {
                    let lo: usize = lo.trim().parse().map_err(|_| bad(part))?;
                    let hi: usize = hi.trim().parse().map_err(|_| bad(part))?;
                    if lo > hi {
                        return Err(bad(part));
                    }
                    set.extend(lo..=hi);
                }
                None => {
                    set.insert(part.parse().map_err(|_| bad(part))?);
                }
            }
        }
        Ok(IndexSet::Some(set))
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndexSet::All => f.write_str("all"),
            IndexSet::Some(set) => {
                let parts: Vec<String> = set.iter().map(|i| i.to_string()).collect();
                f.write_str(&parts.join(","))
            }
        }
    }
}

/// Lists `.wav` files under `root` whose file name matches `pattern`.
///
/// Matches are sorted lexicographically by path, then filtered by position.
pub fn select_files(root: impl AsRef<Path>, pattern: &str, indices: &IndexSet) -> Result<Vec<PathBuf>> {
    let root = root.as_ref();
    if !root.is_dir() {
        return Err(Error::UnreadableFile {
            path: root.into(),
            reason: "not a directory".into(),
        });
    }
    let glob = glob::Pattern::new(pattern)
        .map_err(|e| Error::InvalidParams(format!("bad pattern `{pattern}`: {e}")))?;

    let mut matches: Vec<PathBuf> = walkdir::WalkDir::new(root)
        .follow_links(true)
        .into_iter()
        .filter_map(|entry| entry.ok())
        .filter(|entry| entry.file_type().is_file())
        .map(|entry| entry.into_path())
        .filter(|path| {
            let is_wav = path
                .extension()
                .is_some_and(|ext| ext.eq_ignore_ascii_case("wav"));
            let name = path.file_name().map(|n| n.to_string_lossy()).unwrap_or_default();
            is_wav && glob.matches(&name)
        })
        .collect();
    matches.sort();

    let selected: Vec<PathBuf> = matches
        .into_iter()
        .enumerate()
        .filter(|(i, _)| indices.contains(*i))
        .map(|(_, p)| p)
        .collect();
    if selected.is_empty() {
        return Err(Error::NoMatches {
            root: root.into(),
            pattern: pattern.into(),
        });
    }
    Ok(selected)
}

/// Parses tab-separated `onset<TAB>offset<TAB>label` rows.
///
/// Blank lines and spectral-selection continuation rows (leading `\`) are skipped.
pub fn parse_annotations(text: &str, origin: &Path) -> Result<Vec<Annotation>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('\\') {
            continue;
        }
        let bad = |reason: &str| Error::BadAnnotation {
            path: origin.into(),
            line: lineno + 1,
            reason: reason.into(),
        };
        let mut fields = line.splitn(3, '\t');
        let onset: f64 = fields
            .next()
            .and_then(|f| f.trim().parse().ok())
            .ok_or_else(|| bad("onset is not a number"))?;
        let offset: f64 = fields
            .next()
            .and_then(|f| f.trim().parse().ok())
            .ok_or_else(|| bad("offset is not a number"))?;
        let label = fields.next().unwrap_or("").trim().to_string();
        if !(onset.is_finite() && offset.is_finite()) || onset >= offset {
            return Err(bad("onset must precede offset"));
        }
        out.push(Annotation::new(onset, offset, label));
    }
    Ok(out)
}

/// Path of the label sidecar for a WAV: same stem, `.txt` extension.
pub fn sidecar_path(wav: &Path) -> PathBuf {
    wav.with_extension("txt")
}

/// Reads the sidecar next to `wav`, if one exists.
pub fn read_sidecar(wav: &Path) -> Result<Option<Vec<Annotation>>> {
    let path = sidecar_path(wav);
    if !path.is_file() {
        return Ok(None);
    }
    let text = std::fs::read_to_string(&path).map_err(|e| Error::UnreadableFile {
        path: path.clone(),
        reason: e.to_string(),
    })?;
    parse_annotations(&text, &path).map(Some)
}

/// Cuts one clip per annotation. Each clip's group key is its annotation label.
pub fn segment(clip: &AudioClip, annotations: &[Annotation]) -> Result<ClipCollection> {
    let fs = clip.sample_rate_hz as f64;
    let duration = clip.duration_s();
    let half_sample = 0.5 / fs;
    let mut collection = ClipCollection::new();

    for (i, ann) in annotations.iter().enumerate() {
        let in_range = ann.onset_s >= 0.0
            && ann.onset_s < ann.offset_s
            && ann.offset_s <= duration + half_sample;
        if !in_range {
            return Err(Error::OutOfRangeAnnotation {
                onset_s: ann.onset_s,
                offset_s: ann.offset_s,
                duration_s: duration,
            });
        }
        let start = ((ann.onset_s * fs).round() as usize).min(clip.samples.len());
        let end = ((ann.offset_s * fs).round() as usize).min(clip.samples.len());
        if end <= start {
            return Err(Error::OutOfRangeAnnotation {
                onset_s: ann.onset_s,
                offset_s: ann.offset_s,
                duration_s: duration,
            });
        }
        let samples = clip.samples[start..end].to_vec();
        let onset_s = clip.onset_s + start as f64 / fs;
        let offset_s = clip.onset_s + end as f64 / fs;
        let group_key = if ann.label.is_empty() {
            clip.group_key.clone()
        } else {
            ann.label.clone()
        };
        collection.insert(AudioClip {
            id: format!("{}#{:03}", clip.id, i),
            samples,
            sample_rate_hz: clip.sample_rate_hz,
            source_path: clip.source_path.clone(),
            onset_s,
            offset_s,
            group_key,
            label: ann.label.clone(),
            sanitize: clip.sanitize,
        })?;
    }
    Ok(collection)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_wav_i16(path: &Path, channels: u16, rate: u32, frames: &[Vec<i16>]) {
        let spec = hound::WavSpec {
            channels,
            sample_rate: rate,
            bits_per_sample: 16,
            sample_format: hound::SampleFormat::Int,
        };
        let mut w = hound::WavWriter::create(path, spec).unwrap();
        for frame in frames {
            for &s in frame {
                w.write_sample(s).unwrap();
            }
        }
        w.finalize().unwrap();
    }

    #[test]
    fn pcm16_normalizes_by_full_scale() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("half.wav");
        write_wav_i16(&path, 1, 8000, &vec![vec![16384]; 100]);
        let clip = load_wav(&path).unwrap();
        assert_eq!(clip.samples.len(), 100);
        assert!(clip.samples.iter().all(|&s| (s - 0.5).abs() <= 2f32.powi(-15)));
        assert_eq!(clip.sample_rate_hz, 8000);
        assert_eq!(clip.id, "half");
    }

    #[test]
    fn symmetric_stereo_averages_to_silence() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("stereo.wav");
        write_wav_i16(&path, 2, 8000, &vec![vec![16384, -16384]; 50]);
        let clip = load_wav(&path).unwrap();
        assert_eq!(clip.samples.len(), 50);
        assert!(clip.samples.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn float_wav_is_repaired_and_clamped() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("float.wav");
        let spec = hound::WavSpec {
            channels: 1,
            sample_rate: 8000,
            bits_per_sample: 32,
            sample_format: hound::SampleFormat::Float,
        };
        let mut w = hound::WavWriter::create(&path, spec).unwrap();
        for s in [0.25f32, f32::NAN, 3.0, f32::NEG_INFINITY] {
            w.write_sample(s).unwrap();
        }
        w.finalize().unwrap();
        let clip = load_wav(&path).unwrap();
        assert_eq!(clip.samples, vec![0.25, 0.0, 1.0, -1.0]);
        assert_eq!(clip.sanitize.nan_replaced, 1);
        assert_eq!(clip.sanitize.inf_replaced, 1);
        assert_eq!(clip.sanitize.clamped, 1);
    }

    #[test]
    fn empty_and_missing_files_are_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.wav");
        write_wav_i16(&path, 1, 8000, &[]);
        assert!(matches!(load_wav(&path), Err(Error::EmptyAudio(_))));
        assert!(matches!(
            load_wav(dir.path().join("nope.wav")),
            Err(Error::UnreadableFile { .. })
        ));
        let junk = dir.path().join("junk.wav");
        std::fs::write(&junk, b"definitely not RIFF").unwrap();
        assert!(load_wav(&junk).is_err());
    }

    #[test]
    fn repeated_loads_are_identical() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ramp.wav");
        let frames: Vec<Vec<i16>> = (0..500).map(|i| vec![(i * 37 % 2000) as i16 - 1000]).collect();
        write_wav_i16(&path, 1, 16000, &frames);
        assert_eq!(load_wav(&path).unwrap(), load_wav(&path).unwrap());
    }

    #[test]
    fn index_set_parsing() {
        assert_eq!("all".parse::<IndexSet>().unwrap(), IndexSet::All);
        let set: IndexSet = "0, 2,5-7".parse().unwrap();
        assert_eq!(set, IndexSet::Some([0, 2, 5, 6, 7].into_iter().collect()));
        assert_eq!(set.to_string(), "0,2,5,6,7");
        assert!("3-1".parse::<IndexSet>().is_err());
        assert!("x".parse::<IndexSet>().is_err());
    }

    #[test]
    fn select_files_orders_and_filters() {
        let dir = tempfile::tempdir().unwrap();
        let sub = dir.path().join("sub");
        std::fs::create_dir(&sub).unwrap();
        for name in ["b.wav", "a.wav", "notes.txt"] {
            std::fs::write(dir.path().join(name), b"").unwrap();
        }
        std::fs::write(sub.join("c.WAV"), b"").unwrap();

        let all = select_files(dir.path(), "*", &IndexSet::All).unwrap();
        let names: Vec<_> = all
            .iter()
            .map(|p| p.strip_prefix(dir.path()).unwrap().to_string_lossy().into_owned())
            .collect();
        assert_eq!(names, vec!["a.wav", "b.wav", "sub/c.WAV"]);

        let picked = select_files(dir.path(), "*", &"0,2".parse().unwrap()).unwrap();
        assert_eq!(picked, vec![all[0].clone(), all[2].clone()]);

        let none = select_files(dir.path(), "zzz*", &IndexSet::All);
        assert!(matches!(none, Err(Error::NoMatches { .. })));
        let out_of_range = select_files(dir.path(), "*", &"9".parse().unwrap());
        assert!(matches!(out_of_range, Err(Error::NoMatches { .. })));
    }

    #[test]
    fn annotation_parsing() {
        let text = "0.0\t1.5\tcall\n\\\t1000\t2000\n\n1.0\t2.0\tresponse with spaces\n";
        let anns = parse_annotations(text, Path::new("x.txt")).unwrap();
        assert_eq!(
            anns,
            vec![
                Annotation::new(0.0, 1.5, "call"),
                Annotation::new(1.0, 2.0, "response with spaces")
            ]
        );
        let err = parse_annotations("2.0\t1.0\tbad", Path::new("x.txt")).unwrap_err();
        assert!(matches!(err, Error::BadAnnotation { line: 1, .. }));
    }

    fn ramp_clip(len: usize, fs: u32) -> AudioClip {
        let samples = (0..len).map(|i| (i as f32 / len as f32) - 0.5).collect();
        AudioClip::from_samples("src", samples, fs)
    }

    #[test]
    fn full_span_segment_is_identity() {
        let clip = ramp_clip(1000, 1000);
        let coll = segment(&clip, &[Annotation::new(0.0, 1.0, "all")]).unwrap();
        assert_eq!(coll.len(), 1);
        let only = coll.clips().next().unwrap();
        assert_eq!(only.samples, clip.samples);
        assert_eq!(only.group_key, "all");
    }

    #[test]
    fn adjacent_segments_split_evenly() {
        let clip = ramp_clip(2000, 1000);
        let coll = segment(
            &clip,
            &[Annotation::new(0.0, 1.0, "a"), Annotation::new(1.0, 2.0, "b")],
        )
        .unwrap();
        let clips: Vec<_> = coll.clips().collect();
        assert_eq!(clips.len(), 2);
        assert!(clips.iter().all(|c| c.samples.len() == 1000));
        let total: usize = clips.iter().map(|c| c.samples.len()).sum();
        assert!(total <= clip.samples.len());
    }

    #[test]
    fn overlapping_segments_share_samples() {
        let clip = ramp_clip(2000, 1000);
        let coll = segment(
            &clip,
            &[Annotation::new(0.0, 1.5, "x"), Annotation::new(1.0, 2.0, "x")],
        )
        .unwrap();
        let clips = &coll.groups()["x"];
        assert_eq!(clips.len(), 2);
        // Sample-index oracle: [0,1500) and [1000,2000) overlap on [1000,1500).
        assert_eq!(&clips[0].samples[1000..1500], &clips[1].samples[0..500]);
        assert_eq!(clips[0].samples[..], clip.samples[0..1500]);
        assert_eq!(clips[1].samples[..], clip.samples[1000..2000]);
        for c in clips {
            let span = c.offset_s - c.onset_s;
            assert!((span - c.duration_s()).abs() <= 1.0 / 1000.0);
        }
    }

    #[test]
    fn out_of_range_annotation_is_rejected() {
        let clip = ramp_clip(1000, 1000);
        let err = segment(&clip, &[Annotation::new(0.5, 1.2, "late")]).unwrap_err();
        assert!(matches!(err, Error::OutOfRangeAnnotation { .. }));
    }

    #[test]
    fn metadata_covers_every_clip() {
        let clip = ramp_clip(2000, 1000);
        let coll = segment(
            &clip,
            &[Annotation::new(0.0, 1.0, "a"), Annotation::new(1.0, 2.0, "b")],
        )
        .unwrap();
        let csv = coll.metadata_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "clip_id,source,onset_s,offset_s,label,group_key,sample_rate_hz"
        );
        assert_eq!(lines.count(), 2);
        for id in coll.ids() {
            assert!(coll.metadata().contains_key(&id));
        }
    }

    #[test]
    fn wav_bytes_round_trip_exactly() {
        let clip = ramp_clip(333, 22050);
        let bytes = clip.to_wav_bytes().unwrap();
        let reader = hound::WavReader::new(Cursor::new(bytes)).unwrap();
        let back: Vec<f32> = reader.into_samples::<f32>().map(|s| s.unwrap()).collect();
        assert_eq!(back, clip.samples);
    }
}
