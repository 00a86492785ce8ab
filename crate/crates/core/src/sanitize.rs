//! Replacement of non-finite values so downstream arithmetic stays total.

use serde::{Deserialize, Serialize};

/// Floor applied to linear power before taking a logarithm.
pub const DB_FLOOR_LINEAR: f64 = 1e-12;

/// Counts of every value rewritten by [`sanitize`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SanitizeReport {
    pub nan_replaced: u64,
    pub inf_replaced: u64,
    /// Zeros that will be floored at dB conversion. Linear storage keeps them.
    pub zero_floored: u64,
    pub epsilon_used: f64,
    /// Finite samples beyond full scale that were clamped to ±1.
    #[serde(default)]
    pub clamped: u64,
}

impl SanitizeReport {
    pub fn is_clean(&self) -> bool {
        self.nan_replaced == 0 && self.inf_replaced == 0
    }

    pub fn merge(&mut self, other: &SanitizeReport) {
        self.nan_replaced += other.nan_replaced;
        self.inf_replaced += other.inf_replaced;
        self.zero_floored += other.zero_floored;
        self.clamped += other.clamped;
        self.epsilon_used = DB_FLOOR_LINEAR;
    }
}

/// Minimal float abstraction so samples (`f32`) and spectra (`f64`) share one rule.
pub trait Sample: Copy + PartialEq {
    const ZERO: Self;
    const ONE: Self;
    const NEG_ONE: Self;
    fn is_nan(self) -> bool;
    fn is_infinite(self) -> bool;
    fn is_sign_negative(self) -> bool;
}

macro_rules! impl_sample {
    ($t:ty) => {
        impl Sample for $t {
            const ZERO: Self = 0.0;
            const ONE: Self = 1.0;
            const NEG_ONE: Self = -1.0;
            fn is_nan(self) -> bool {
                <$t>::is_nan(self)
            }
            fn is_infinite(self) -> bool {
                <$t>::is_infinite(self)
            }
            fn is_sign_negative(self) -> bool {
                <$t>::is_sign_negative(self)
            }
        }
    };
}
impl_sample!(f32);
impl_sample!(f64);

/// NaN becomes 0, ±Inf becomes ±1 (full scale). Zeros are counted, not changed.
pub fn sanitize<T: Sample>(values: &[T]) -> (Vec<T>, SanitizeReport) {
    let mut out = values.to_vec();
    let report = sanitize_in_place(&mut out);
    (out, report)
}

pub fn sanitize_in_place<T: Sample>(values: &mut [T]) -> SanitizeReport {
    let mut report = SanitizeReport {
        epsilon_used: DB_FLOOR_LINEAR,
        ..Default::default()
    };
    for v in values.iter_mut() {
        if v.is_nan() {
            *v = T::ZERO;
            report.nan_replaced += 1;
        } else if v.is_infinite() {
            *v = if v.is_sign_negative() { T::NEG_ONE } else { T::ONE };
            report.inf_replaced += 1;
        } else if *v == T::ZERO {
            report.zero_floored += 1;
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn nan_becomes_zero() {
        let (out, report) = sanitize(&[1.0, f64::NAN, 2.0]);
        assert_eq!(out, vec![1.0, 0.0, 2.0]);
        assert_eq!(report.nan_replaced, 1);
        assert_eq!(report.inf_replaced, 0);
    }

    #[test]
    fn finite_input_is_untouched() {
        let input = [0.25f32, -0.5, 0.75];
        let (out, report) = sanitize(&input);
        assert_eq!(out, input);
        assert_eq!(report.nan_replaced + report.inf_replaced + report.zero_floored, 0);
    }

    #[test]
    fn infinities_clamp_to_full_scale() {
        let (out, report) = sanitize(&[f64::INFINITY, f64::NEG_INFINITY]);
        assert_eq!(out, vec![1.0, -1.0]);
        assert_eq!(report.inf_replaced, 2);
    }

    #[test]
    fn zeros_are_counted_not_floored() {
        let (out, report) = sanitize(&[0.0, 1.0, 0.0]);
        assert_eq!(out, vec![0.0, 1.0, 0.0]);
        assert_eq!(report.zero_floored, 2);
        assert_eq!(report.epsilon_used, DB_FLOOR_LINEAR);
    }

    proptest! {
        #[test]
        fn output_is_always_finite(
            base in prop::collection::vec(-10.0f64..10.0, 0..64),
            injections in prop::collection::vec((0usize..64, 0u8..3), 0..16),
        ) {
            let mut values = base;
            for (idx, kind) in injections {
                if values.is_empty() { break; }
                let i = idx % values.len();
                values[i] = match kind { 0 => f64::NAN, 1 => f64::INFINITY, _ => f64::NEG_INFINITY };
            }
            let (out, report) = sanitize(&values);
            prop_assert!(out.iter().all(|v| v.is_finite()));
            let bad = values.iter().filter(|v| !v.is_finite()).count() as u64;
            prop_assert_eq!(report.nan_replaced + report.inf_replaced, bad);
        }
    }
}
