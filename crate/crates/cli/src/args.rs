//! Command-line flags and their mapping onto [`RunSettings`].

use std::collections::BTreeSet;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use specdesk_core::config::{parse_range_hz, ExportFormat, RunSettings};
use specdesk_core::export::read_manifest;
use specdesk_core::sweep::Metric;
use specdesk_core::transforms::{Method, Wavelet, Window};

#[derive(Debug, Parser)]
#[command(name = "specdesk", version, about = "Batch spectral analysis of bioacoustic recordings")]
pub struct Cli {
    /// Repeat for more log output.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every method on every clip and write the export bundle.
    Analyze(RunArgs),
    /// Sweep n_fft and hop over the first clip of each method.
    Grid(RunArgs),
    /// Print a reproducible random subset of clip ids.
    Sample(SampleArgs),
    /// Check the run settings against domain assumptions.
    Audit(RunArgs),
    /// Serve a finished run directory over HTTP.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Start from the settings recorded in a previous run's manifest.json.
    #[arg(long, value_name = "PATH")]
    pub manifest: Option<PathBuf>,

    /// Directory searched recursively for WAV files.
    #[arg(short, long, value_name = "PATH")]
    pub input: Option<PathBuf>,
    #[arg(long, value_name = "GLOB")]
    pub pattern: Option<String>,
    /// `all`, or 0-based indices and ranges such as `0,2,5-7`.
    #[arg(long, value_name = "SET")]
    pub indices: Option<String>,
    /// Ignore annotation sidecars.
    #[arg(long)]
    pub no_annotations: bool,

    #[arg(short, long, value_delimiter = ',', value_name = "METHOD,..")]
    pub methods: Option<Vec<Method>>,
    #[arg(long, value_name = "N")]
    pub n_fft: Option<usize>,
    /// Hop length in samples.
    #[arg(long, value_name = "N")]
    pub hop: Option<usize>,
    #[arg(long)]
    pub window: Option<Window>,
    #[arg(long, value_name = "HZ")]
    pub fmin: Option<f64>,
    #[arg(long, value_name = "HZ")]
    pub fmax: Option<f64>,
    #[arg(long, value_name = "N")]
    pub bins_per_octave: Option<u32>,
    #[arg(long)]
    pub wavelet: Option<Wavelet>,
    #[arg(long, value_name = "N")]
    pub levels: Option<u32>,
    #[arg(long, value_delimiter = ',', value_name = "HZ_PER_S,..", allow_negative_numbers = true)]
    pub chirp_rates: Option<Vec<f64>>,

    #[arg(long, value_name = "PCT")]
    pub height_percentile: Option<f64>,
    #[arg(long, value_name = "FRACTION")]
    pub min_prominence: Option<f64>,
    #[arg(long, value_name = "N")]
    pub max_peaks: Option<usize>,
    #[arg(long, value_name = "HZ")]
    pub vein_max_jump: Option<f64>,
    #[arg(long, value_name = "FRAMES")]
    pub vein_min_persistence: Option<usize>,
    #[arg(long, value_name = "N")]
    pub max_veins: Option<usize>,
    #[arg(long, value_name = "N")]
    pub auto_select: Option<usize>,
    #[arg(long, value_name = "TOL")]
    pub integer_tolerance: Option<f64>,

    #[arg(short, long, value_delimiter = ',', value_name = "FORMAT,..")]
    pub export: Option<Vec<ExportFormat>>,
    /// Leave dB spectra out of the JSON export.
    #[arg(long)]
    pub no_psd_db: bool,
    #[arg(short, long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Expected vocalization band, `LO-HI` in Hz.
    #[arg(long, value_name = "LO-HI", value_parser = parse_range)]
    pub taxon_range: Option<(f64, f64)>,
    /// Flag settings too coarse for fine timing work.
    #[arg(long)]
    pub temporal_precision: bool,

    #[arg(long, value_delimiter = ',', value_name = "N,..")]
    pub grid_n_fft: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',', value_name = "D,..")]
    pub grid_divisors: Option<Vec<usize>>,
    #[arg(long)]
    pub metric: Option<Metric>,
    /// Treat grid divisors as literal hop lengths.
    #[arg(long)]
    pub hop_literal: bool,
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    parse_range_hz(s).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Args)]
pub struct SampleArgs {
    /// Number of clips to draw.
    #[arg(short, long)]
    pub k: usize,

    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ServeArgs {
    /// A directory written by `specdesk analyze`.
    #[arg(value_name = "RUN_DIR")]
    pub run_dir: PathBuf,
    #[arg(short, long)]
    pub port: Option<u16>,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    /// Static front-end bundle served at `/`.
    #[arg(long, value_name = "DIR")]
    pub static_dir: Option<PathBuf>,
}

impl RunArgs {
    /// Resolves settings: manifest (if any), then flags. Returns the names
    /// the user set explicitly, from either source.
    pub fn resolve(&self) -> specdesk_core::Result<(RunSettings, BTreeSet<String>)> {
        let (mut s, mut user) = match &self.manifest {
            Some(path) => read_manifest(path)?.settings()?,
            None => (RunSettings::default(), BTreeSet::new()),
        };

        macro_rules! set {
            ($flag:expr, $field:ident) => {
                if let Some(v) = &$flag {
                    s.$field = v.clone();
                    user.insert(stringify!($field).to_string());
                }
            };
            ($flag:expr, $field:ident, some) => {
                if let Some(v) = &$flag {
                    s.$field = Some(v.clone());
                    user.insert(stringify!($field).to_string());
                }
            };
        }
        macro_rules! flag {
            ($on:expr, $field:ident, $value:expr) => {
                if $on {
                    s.$field = $value;
                    user.insert(stringify!($field).to_string());
                }
            };
        }

        set!(self.input, input);
        set!(self.pattern, pattern);
        set!(self.indices, indices);
        flag!(self.no_annotations, annotations, false);
        set!(self.methods, methods);
        set!(self.n_fft, n_fft);
        set!(self.hop, hop_length);
        set!(self.window, window);
        set!(self.fmin, fmin_hz);
        set!(self.fmax, fmax_hz, some);
        set!(self.bins_per_octave, bins_per_octave);
        set!(self.wavelet, wavelet);
        set!(self.levels, decomposition_levels);
        set!(self.chirp_rates, chirp_rates_hz_per_s);
        set!(self.height_percentile, height_percentile);
        set!(self.min_prominence, min_prominence_fraction);
        set!(self.max_peaks, max_peaks);
        set!(self.vein_max_jump, vein_max_jump_hz, some);
        set!(self.vein_min_persistence, vein_min_persistence);
        set!(self.max_veins, max_veins);
        set!(self.auto_select, auto_select);
        set!(self.integer_tolerance, integer_tolerance);
        set!(self.export, export);
        flag!(self.no_psd_db, include_psd_db, false);
        set!(self.out, out);
        set!(self.seed, seed);
        set!(self.taxon_range, taxon_range_hz, some);
        flag!(self.temporal_precision, temporal_precision, true);
        set!(self.grid_n_fft, grid_n_fft);
        set!(self.grid_divisors, grid_hop_divisors);
        set!(self.metric, grid_metric);
        flag!(self.hop_literal, hop_literal, true);
        Ok((s, user))
    }
}
