//! Self-contained HTML report.

use std::fmt::Write;

use crate::export::csv::{format_sig6, PEAKS_HEADER, RATIOS_HEADER};
use crate::export::Snapshot;

pub const DATA_ELEMENT_ID: &str = "specdesk-data";

fn esc(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
    out
}

fn table(out: &mut String, caption: &str, header: &[&str], rows: &[Vec<String>]) {
    let _ = write!(out, "<table><caption>{}</caption><thead><tr>", esc(caption));
    for h in header {
        let _ = write!(out, "<th>{}</th>", esc(h));
    }
    out.push_str("</tr></thead><tbody>");
    for row in rows {
        out.push_str("<tr>");
        for cell in row {
            let _ = write!(out, "<td>{}</td>", esc(cell));
        }
        out.push_str("</tr>");
    }
    out.push_str("</tbody></table>\n");
}

/// Embeds `json` (the output of `export_json` for the same snapshot) verbatim.
///
/// With a UI bundle the page is interactive offline; without one it still
/// carries the peak, ratio and manifest tables.
pub fn export_html(snapshot: &Snapshot, json: &str, ui_bundle: Option<&str>) -> String {
    let mut out = String::new();
    out.push_str("<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n");
    out.push_str("<title>specdesk report</title>\n<style>\n");
    out.push_str(
        "body{font-family:sans-serif;margin:2em}table{border-collapse:collapse;margin:1em 0}\
         td,th{border:1px solid #999;padding:2px 6px;text-align:right}caption{font-weight:bold;text-align:left}\n",
    );
    out.push_str("</style>\n</head>\n<body>\n<h1>specdesk report</h1>\n");
    let _ = writeln!(
        out,
        "<p>{} plots, {} selections, {} pairs. {}</p>",
        snapshot.plots.len(),
        snapshot.state.selections.len(),
        snapshot.state.pairs.len(),
        esc(&snapshot.manifest.tool_version)
    );
    if ui_bundle.is_none() {
        log::warn!("UI bundle missing; writing a static report");
        out.push_str("<div id=\"app\" data-static=\"true\">\n");
    } else {
        out.push_str("<div id=\"app\">\n");
    }

    let peak_rows: Vec<Vec<String>> = snapshot
        .state
        .selections
        .iter()
        .map(|s| {
            let (clip, method) = snapshot
                .plot(&s.plot_id)
                .map(|p| (p.clip_id.clone(), p.method().to_string()))
                .unwrap_or_default();
            vec![
                s.plot_id.clone(),
                clip,
                method,
                s.selection_order.to_string(),
                format_sig6(s.peak.freq_hz),
                format_sig6(s.peak.power_linear),
                format_sig6(s.peak.power_db),
                format_sig6(s.peak.width_hz),
                format_sig6(s.peak.prominence),
            ]
        })
        .collect();
    table(&mut out, "Selected peaks", &PEAKS_HEADER, &peak_rows);

    let ratio_rows: Vec<Vec<String>> = snapshot
        .state
        .pairs
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let f = |o| snapshot.state.by_order(o).map_or(0.0, |s| s.peak.freq_hz);
            vec![
                (i + 1).to_string(),
                format_sig6(f(p.order_a)),
                format_sig6(f(p.order_b)),
                format_sig6(p.ratio),
                snapshot.graph.edges.get(i).is_some_and(|e| e.is_near_integer).to_string(),
            ]
        })
        .collect();
    table(&mut out, "Ratios", &RATIOS_HEADER, &ratio_rows);

    let manifest_rows: Vec<Vec<String>> = snapshot
        .manifest
        .entries
        .iter()
        .map(|e| {
            vec![
                e.name.clone(),
                e.value.to_string(),
                format!("{:?}", e.provenance).to_lowercase(),
                e.unit.clone().unwrap_or_default(),
            ]
        })
        .collect();
    table(&mut out, "Parameters", &["name", "value", "provenance", "unit"], &manifest_rows);

    if !snapshot.manifest.assumption_audit.is_empty() {
        out.push_str("<h2>Assumption warnings</h2>\n<ul>\n");
        for w in &snapshot.manifest.assumption_audit {
            let _ = writeln!(out, "<li>{} ({}): {}</li>", esc(&w.software), esc(&w.parameter), esc(&w.message));
        }
        out.push_str("</ul>\n");
    }
    out.push_str("</div>\n");

    let _ = writeln!(out, "<script type=\"application/json\" id=\"{DATA_ELEMENT_ID}\">{json}</script>");
    if let Some(js) = ui_bundle {
        let _ = writeln!(out, "<script>{}</script>", js.replace("</", "<\\/"));
    }
    out.push_str("</body>\n</html>\n");
    out
}

/// Pulls the embedded JSON back out of a report.
pub fn embedded_json(html: &str) -> Option<&str> {
    let open = format!("<script type=\"application/json\" id=\"{DATA_ELEMENT_ID}\">");
    let start = html.find(&open)? + open.len();
    let len = html[start..].find("</script>")?;
    Some(&html[start..start + len])
}
