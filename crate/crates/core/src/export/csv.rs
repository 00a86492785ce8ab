//! Peak and ratio tables. RFC-4180 quoting, LF line endings, six significant digits.

use crate::export::Snapshot;
use crate::harmonic::DEFAULT_INTEGER_TOLERANCE;
use crate::sweep::GridResult;

pub const PEAKS_HEADER: [&str; 9] = [
    "plot_id",
    "clip_id",
    "method",
    "selection_order",
    "freq_hz",
    "power_linear",
    "power_db",
    "width_hz",
    "prominence",
];
pub const RATIOS_HEADER: [&str; 5] = ["pair_id", "freq_a_hz", "freq_b_hz", "ratio", "is_near_integer"];
pub const GRID_HEADER: [&str; 8] = [
    "n_fft",
    "hop_divisor",
    "hop_length",
    "metric",
    "value",
    "status",
    "is_best",
    "error",
];

/// `printf("%#.6g")`: six significant digits, trailing zeros kept.
pub fn format_sig6(v: f64) -> String {
    if !v.is_finite() {
        // Exports are sanitized upstream; keep the output parseable regardless.
        return "0.00000".into();
    }
    if v == 0.0 {
        return "0.00000".into();
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let s = format!("{v:.*}", (5 - exp) as usize);
        if exp == 5 {
            s + "."
        } else {
            s
        }
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    }
}

fn writer() -> ::csv::Writer<Vec<u8>> {
    ::csv::WriterBuilder::new()
        .terminator(::csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish(w: ::csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 fields")
}

/// Two tables separated by one blank line: selected peaks, then pair ratios.
pub fn export_csv(snapshot: &Snapshot) -> String {
    let mut peaks = writer();
    peaks.write_record(PEAKS_HEADER).expect("in-memory write");
    for sel in &snapshot.state.selections {
        let (clip_id, method) = match snapshot.plot(&sel.plot_id) {
            Some(p) => (p.clip_id.clone(), p.method().to_string()),
            None => sel
                .plot_id
                .rsplit_once(':')
                .map(|(c, m)| (c.to_owned(), m.to_owned()))
                .unwrap_or_else(|| (sel.plot_id.clone(), String::new())),
        };
        let p = &sel.peak;
        peaks
            .write_record([
                sel.plot_id.clone(),
                clip_id,
                method,
                sel.selection_order.to_string(),
                format_sig6(p.freq_hz),
                format_sig6(p.power_linear),
                format_sig6(p.power_db),
                format_sig6(p.width_hz),
                format_sig6(p.prominence),
            ])
            .expect("in-memory write");
    }

    let mut ratios = writer();
    ratios.write_record(RATIOS_HEADER).expect("in-memory write");
    for (i, pair) in snapshot.state.pairs.iter().enumerate() {
        let freq = |order| snapshot.state.by_order(order).map_or(0.0, |s| s.peak.freq_hz);
        let near = snapshot.graph.edges.get(i).map_or_else(
            || (pair.ratio - pair.ratio.round()).abs() <= DEFAULT_INTEGER_TOLERANCE,
            |e| e.is_near_integer,
        );
        ratios
            .write_record([
                (i + 1).to_string(),
                format_sig6(freq(pair.order_a)),
                format_sig6(freq(pair.order_b)),
                format_sig6(pair.ratio),
                near.to_string(),
            ])
            .expect("in-memory write");
    }

    let mut out = finish(peaks);
    out.push('\n');
    out.push_str(&finish(ratios));
    out
}

/// One row per grid cell, in grid order.
pub fn grid_csv(grid: &GridResult) -> String {
    let mut w = writer();
    w.write_record(GRID_HEADER).expect("in-memory write");
    for (i, cell) in grid.cells.iter().enumerate() {
        w.write_record([
            cell.n_fft.to_string(),
            cell.hop_divisor.to_string(),
            cell.hop_length.to_string(),
            grid.metric.to_string(),
            cell.metric_value.map(format_sig6).unwrap_or_default(),
            if cell.succeeded() { "ok" } else { "failed" }.to_string(),
            (grid.best_cell == Some(i)).to_string(),
            cell.error.clone().unwrap_or_default(),
        ])
        .expect("in-memory write");
    }
    finish(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig6_matches_printf() {
        // Reference strings from C printf("%#.6g").
        let cases = [
            (440.0, "440.000"),
            (880.0, "880.000"),
            (2.0, "2.00000"),
            (0.0, "0.00000"),
            (-120.0, "-120.000"),
            (1e-12, "1.00000e-12"),
            (123456.0, "123456."),
            (1234567.0, "1.23457e+06"),
            (0.0001, "0.000100000"),
            (0.00001234567, "1.23457e-05"),
            (999999.5, "1.00000e+06"),
            (10.7666015625, "10.7666"),
            (-0.5, "-0.500000"),
        ];
        for (v, want) in cases {
            assert_eq!(format_sig6(v), want, "{v}");
        }
    }

    #[test]
    fn sig6_keeps_six_digits() {
        for &v in &[1.23456789, 9.876543e-7, 6.02214076e23, 1.0 / 3.0, 42.0] {
            let s = format_sig6(v);
            let back: f64 = s.parse().unwrap();
            assert!(((back - v) / v).abs() <= 5e-6, "{v} -> {s}");
        }
    }
}
