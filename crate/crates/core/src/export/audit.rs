//! Checks a run's parameters against known domain assumptions of audio tools.
//!
//! The rules live in `data/domain_assumptions.json`; only the check kinds are code.

use serde::{Deserialize, Serialize};

use crate::config::RunSettings;
use crate::error::{Error, Result};
use crate::export::manifest::ParameterManifest;
use crate::transforms::Method;

pub const BUILTIN_RULES: &str = include_str!("../../data/domain_assumptions.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Check {
    /// Taxon band must sit below Nyquist.
    Nyquist,
    /// The analysed band must contain the taxon band.
    BandCoverage,
    /// The lowest taxon frequency must span this many FFT bins.
    FrequencyResolution { min_bins_below_fmin: f64 },
    /// With temporal precision requested, the window must not exceed this length.
    WindowDuration { max_window_s: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionRule {
    pub id: String,
    pub software: String,
    pub parameter: String,
    pub values: String,
    pub assumption: String,
    pub use_case: String,
    #[serde(default)]
    pub applicable_range_hz: Option<(f64, f64)>,
    /// Rules without a check are listed for reference only.
    pub check: Option<Check>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleSet {
    pub rules: Vec<AssumptionRule>,
}

impl RuleSet {
    pub fn builtin() -> Self {
        Self::parse(BUILTIN_RULES).expect("bundled rule file parses")
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidParams(format!("bad rule file: {e}")))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AuditContext {
    pub taxon_range_hz: Option<(f64, f64)>,
    pub needs_temporal_precision: bool,
}

impl AuditContext {
    pub fn from_settings(s: &RunSettings) -> Self {
        AuditContext {
            taxon_range_hz: s.taxon_range_hz,
            needs_temporal_precision: s.temporal_precision,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditWarning {
    pub rule_id: String,
    pub software: String,
    pub parameter: String,
    pub assumption: String,
    pub message: String,
}

/// Audits with the bundled rule set.
pub fn audit_assumptions(manifest: &ParameterManifest, ctx: &AuditContext) -> Result<Vec<AuditWarning>> {
    audit_with_rules(&RuleSet::builtin(), manifest, ctx)
}

/// One warning per violated rule and sample rate, in rule order.
pub fn audit_with_rules(rules: &RuleSet, manifest: &ParameterManifest, ctx: &AuditContext) -> Result<Vec<AuditWarning>> {
    let (settings, _) = manifest.settings()?;
    let mut rates: Vec<u32> = manifest.sample_rates().into_iter().collect();
    if rates.is_empty() {
        rates.push(crate::clip::DEFAULT_SAMPLE_RATE_HZ);
    }
    let band_limited = settings
        .methods
        .iter()
        .any(|m| matches!(m, Method::Cqt | Method::MultiRes));

    let mut out = Vec::new();
    for rule in &rules.rules {
        let Some(check) = &rule.check else { continue };
        for &fs in &rates {
            let nyquist = fs as f64 / 2.0;
            let message = match (check, ctx.taxon_range_hz) {
                (Check::Nyquist, Some((_, hi))) if hi > nyquist => Some(format!(
                    "taxon band reaches {hi} Hz but Nyquist at {fs} Hz is {nyquist} Hz"
                )),
                (Check::BandCoverage, Some((lo, hi))) => {
                    let (band_lo, band_hi) = if band_limited {
                        (settings.fmin_hz, settings.fmax_hz.unwrap_or(nyquist))
                    } else {
                        (0.0, nyquist)
                    };
                    (lo < band_lo || hi > band_hi).then(|| {
                        format!("analysed band {band_lo}-{band_hi} Hz does not contain taxon band {lo}-{hi} Hz")
                    })
                }
                (Check::FrequencyResolution { min_bins_below_fmin }, Some((lo, _))) => {
                    let bin = fs as f64 / settings.n_fft as f64;
                    (lo / bin < *min_bins_below_fmin).then(|| {
                        format!(
                            "bin width {bin:.3} Hz (n_fft {} at {fs} Hz) leaves {:.2} bins below {lo} Hz; want {min_bins_below_fmin}",
                            settings.n_fft,
                            lo / bin
                        )
                    })
                }
                (Check::WindowDuration { max_window_s }, _) if ctx.needs_temporal_precision => {
                    let dur = settings.n_fft as f64 / fs as f64;
                    (dur > *max_window_s).then(|| {
                        format!(
                            "window of {:.1} ms exceeds {:.1} ms with temporal precision requested",
                            dur * 1e3,
                            max_window_s * 1e3
                        )
                    })
                }
                _ => None,
            };
            if let Some(message) = message {
                out.push(AuditWarning {
                    rule_id: rule.id.clone(),
                    software: rule.software.clone(),
                    parameter: rule.parameter.clone(),
                    assumption: rule.assumption.clone(),
                    message,
                });
            }
        }
    }
    Ok(out)
}
