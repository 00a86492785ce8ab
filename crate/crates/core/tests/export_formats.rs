use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use proptest::prelude::*;
use specdesk_core::clip::{AudioClip, ClipCollection};
use specdesk_core::config::{ExportFormat, RunSettings};
use specdesk_core::export::{
    export_csv, export_html, export_image, export_json, html::embedded_json, import_json, plot_json, ExportBundle,
    ExportOptions, ParameterManifest, Plot, Snapshot, PEAKS_HEADER, RATIOS_HEADER,
};
use specdesk_core::features::{Peak, Ridge, TrackPoint, Vein};
use specdesk_core::harmonic::{SelectionEvent, SelectionState, DEFAULT_INTEGER_TOLERANCE};
use specdesk_core::run::analyze;
use specdesk_core::sanitize::SanitizeReport;
use specdesk_core::transforms::{to_db, Method, SpectralResult, TransformParams};

fn id_strategy() -> impl Strategy<Value = String> {
    // Quotes, commas and angle brackets exercise CSV and HTML escaping.
    "[a-e0-9_<>\"', #-]{1,10}"
}

fn plot_strategy() -> impl Strategy<Value = Plot> {
    (
        id_strategy(),
        prop::sample::select(Method::ALL.to_vec()),
        prop::collection::vec(0.0f64..1e3, 4..24),
        any::<bool>(),
    )
        .prop_map(|(clip_id, method, psd_linear, with_tracks)| {
            let n = psd_linear.len();
            let freqs_hz: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * 37.25).collect();
            let peaks: Vec<Peak> = (1..n - 1)
                .step_by(3)
                .map(|i| Peak {
                    bin_index: i,
                    freq_hz: freqs_hz[i],
                    power_linear: psd_linear[i],
                    power_db: to_db(&psd_linear[i..=i])[0],
                    width_hz: 12.5 + i as f64 / 7.0,
                    prominence: psd_linear[i] / 3.0,
                })
                .collect();
            let points: Vec<TrackPoint> = (0..6)
                .map(|k| TrackPoint {
                    time_s: k as f64 * 0.0116,
                    freq_hz: freqs_hz[k % n],
                    magnitude: psd_linear[k % n],
                })
                .collect();
            let mut derived = BTreeMap::new();
            derived.insert("frames".to_string(), n as f64);
            Plot {
                plot_id: Plot::make_id(&clip_id, method),
                clip_id,
                spectral: SpectralResult {
                    method,
                    psd_db: to_db(&psd_linear),
                    freqs_hz,
                    psd_linear,
                    params: TransformParams::for_method(method),
                    sanitize: SanitizeReport::default(),
                    derived,
                },
                peaks,
                ridge: with_tracks.then(|| Ridge {
                    points: points[..5].to_vec(),
                }),
                veins: if with_tracks {
                    vec![Vein {
                        points,
                        persistence_frames: 6,
                    }]
                } else {
                    Vec::new()
                },
            }
        })
}

/// Random plots plus a random but valid interaction history over their peaks.
fn snapshot_strategy() -> impl Strategy<Value = Snapshot> {
    (
        prop::collection::vec(plot_strategy(), 0..4),
        prop::collection::vec((any::<prop::sample::Index>(), any::<prop::sample::Index>(), 0u8..4), 0..24),
    )
        .prop_map(|(mut plots, ops)| {
            let mut seen = BTreeSet::new();
            plots.retain(|p| seen.insert(p.plot_id.clone()));
            let candidates: Vec<(String, Peak)> = plots
                .iter()
                .flat_map(|p| p.peaks.iter().map(move |k| (p.plot_id.clone(), k.clone())))
                .collect();
            let mut state = SelectionState::new();
            for (a, b, kind) in ops {
                let event = match (kind, candidates.is_empty()) {
                    (_, true) => continue,
                    (0 | 1, _) => {
                        let (plot_id, peak) = a.get(&candidates).clone();
                        SelectionEvent::Select { plot_id, peak }
                    }
                    (2, _) => {
                        let orders = state.live_orders();
                        if orders.len() < 2 {
                            continue;
                        }
                        SelectionEvent::Pair {
                            order_a: *a.get(&orders),
                            order_b: *b.get(&orders),
                        }
                    }
                    _ => {
                        let (plot_id, peak) = a.get(&candidates);
                        SelectionEvent::Remove {
                            target: specdesk_core::harmonic::PeakRef::new(plot_id.clone(), peak.bin_index),
                        }
                    }
                };
                if let Ok(next) = state.apply(&event) {
                    state = next;
                }
            }
            let mut manifest = ParameterManifest::default();
            manifest.record_clip(&AudioClip::from_samples("x", vec![0.25; 16], 22_050));
            Snapshot::new(manifest, plots, state, DEFAULT_INTEGER_TOLERANCE).unwrap()
        })
}

/// Independent CSV reader: splits the two tables by their header rows.
fn parse_tables(text: &str) -> (Vec<Vec<String>>, Vec<Vec<String>>) {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let rows: Vec<Vec<String>> = rdr
        .records()
        .map(|r| r.unwrap().iter().map(str::to_owned).collect())
        .collect();
    let split = rows.iter().position(|r| r == &RATIOS_HEADER).expect("ratio header present");
    assert_eq!(rows[0], PEAKS_HEADER);
    (rows[1..split].to_vec(), rows[split + 1..].to_vec())
}

fn close6(text: &str, want: f64) -> bool {
    let got: f64 = text.parse().unwrap();
    if want == 0.0 {
        return got == 0.0;
    }
    ((got - want) / want).abs() <= 5e-6
}

fn all_exports(snap: &Snapshot) -> Vec<String> {
    let json = export_json(snap, ExportOptions::default());
    vec![export_csv(snap), export_html(snap, &json, None), json]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn json_round_trip(snap in snapshot_strategy()) {
        let text = export_json(&snap, ExportOptions::default());
        prop_assert_eq!(import_json(&text).unwrap(), snap.clone());
        let lean = export_json(&snap, ExportOptions { include_psd_db: false });
        prop_assert!(!lean.contains("\"psd_db\":"));
        prop_assert_eq!(import_json(&lean).unwrap(), snap);
    }

    #[test]
    fn csv_parse_back(snap in snapshot_strategy()) {
        let text = export_csv(&snap);
        prop_assert!(!text.contains('\r'));
        let (peaks, ratios) = parse_tables(&text);
        prop_assert_eq!(peaks.len(), snap.state.selections.len());
        for (row, sel) in peaks.iter().zip(&snap.state.selections) {
            prop_assert_eq!(&row[0], &sel.plot_id);
            prop_assert_eq!(row[3].parse::<u64>().unwrap(), sel.selection_order);
            prop_assert!(close6(&row[4], sel.peak.freq_hz));
            prop_assert!(close6(&row[5], sel.peak.power_linear));
            prop_assert!(close6(&row[6], sel.peak.power_db));
            prop_assert!(close6(&row[7], sel.peak.width_hz));
            prop_assert!(close6(&row[8], sel.peak.prominence));
        }
        prop_assert_eq!(ratios.len(), snap.state.pairs.len());
        for ((row, pair), edge) in ratios.iter().zip(&snap.state.pairs).zip(&snap.graph.edges) {
            prop_assert!(close6(&row[3], pair.ratio));
            prop_assert_eq!(row[4].parse::<bool>().unwrap(), edge.is_near_integer);
        }
    }

    #[test]
    fn html_embeds_the_json_document(snap in snapshot_strategy()) {
        let json = export_json(&snap, ExportOptions::default());
        let html = export_html(&snap, &json, None);
        prop_assert_eq!(embedded_json(&html).unwrap(), json.as_str());
        let doc = scraper::Html::parse_document(&html);
        prop_assert!(doc.errors.is_empty(), "{:?}", doc.errors);
    }

    #[test]
    fn cross_format_counts_agree(snap in snapshot_strategy()) {
        let (peaks, ratios) = parse_tables(&export_csv(&snap));
        let json = export_json(&snap, ExportOptions::default());
        let from_html = import_json(embedded_json(&export_html(&snap, &json, None)).unwrap()).unwrap();
        let from_json = import_json(&json).unwrap();
        for s in [&from_json, &from_html] {
            prop_assert_eq!(s.state.selections.len(), peaks.len());
            prop_assert_eq!(s.state.pairs.len(), ratios.len());
            prop_assert_eq!(s.graph.edges.len(), s.state.pairs.len());
            let r: Vec<f64> = s.state.pairs.iter().map(|p| p.ratio).collect();
            let want: Vec<f64> = snap.state.pairs.iter().map(|p| p.ratio).collect();
            prop_assert_eq!(r, want);
        }
    }
}

#[test]
fn empty_session_exports() {
    let snap = Snapshot::empty(ParameterManifest::default());
    let csv = export_csv(&snap);
    assert_eq!(csv, format!("{}\n\n{}\n", PEAKS_HEADER.join(","), RATIOS_HEADER.join(",")));

    let json = export_json(&snap, ExportOptions::default());
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["schema"], 1);
    assert!(v["manifest"]["entries"].as_array().is_some_and(|e| !e.is_empty()));
    for key in ["plots", "selections", "pairs"] {
        assert_eq!(v[key], serde_json::json!([]), "{key}");
    }
    assert_eq!(v["graph"]["nodes"], serde_json::json!([]));
    assert_eq!(v["graph"]["edges"], serde_json::json!([]));

    let (png_bytes, layout) = export_image(&snap).unwrap();
    let decoder = png::Decoder::new(std::io::Cursor::new(&png_bytes));
    let reader = decoder.read_info().unwrap();
    assert!(reader.info().width >= 1600 && reader.info().height >= 1200);
    assert_eq!(layout.axes.len(), 1);
    assert!(layout.axes[0].plot_id.is_none());
}

#[test]
fn octave_pair_csv_row() {
    let mk = |bin, f: f64| Peak {
        bin_index: bin,
        freq_hz: f,
        power_linear: 1.0,
        power_db: 0.0,
        width_hz: 5.0,
        prominence: 0.5,
    };
    let state = SelectionState::new()
        .select("c:FFT_DUAL", &mk(41, 440.0))
        .unwrap()
        .select("c:FFT_DUAL", &mk(82, 880.0))
        .unwrap()
        .pair(1, 2)
        .unwrap();
    let snap = Snapshot::new(ParameterManifest::default(), Vec::new(), state, DEFAULT_INTEGER_TOLERANCE).unwrap();
    let csv = export_csv(&snap);
    assert!(csv.ends_with("1,440.000,880.000,2.00000,true\n"), "{csv}");
    assert!(csv.contains("c:FFT_DUAL,c,FFT_DUAL,1,440.000,1.00000,0.00000,5.00000,0.500000\n"));
}

fn tone_clip(id: &str, f: f64, fs: u32, secs: f64) -> AudioClip {
    let n = (fs as f64 * secs) as usize;
    let s = (0..n)
        .map(|i| (0.5 * (2.0 * PI * f * i as f64 / fs as f64).sin()) as f32)
        .collect();
    AudioClip::from_samples(id, s, fs)
}

#[test]
fn images_are_deterministic_and_laid_out_per_plot() {
    let coll = ClipCollection::from_clips([tone_clip("a", 440.0, 22_050, 0.5), tone_clip("b", 990.0, 22_050, 0.5)]).unwrap();
    let (snap, _) = analyze(&coll, &RunSettings::default(), &BTreeSet::new()).unwrap();
    let (first, layout) = export_image(&snap).unwrap();
    let (second, _) = export_image(&snap).unwrap();
    assert_eq!(first, second);
    assert_eq!(layout.axes.len(), 2);
    let ids: Vec<_> = layout.axes.iter().map(|a| a.plot_id.clone().unwrap()).collect();
    assert_eq!(ids, vec!["a:FFT_DUAL", "b:FFT_DUAL"]);
    // Axes regions must not overlap.
    let (a, b) = (&layout.axes[0], &layout.axes[1]);
    assert!(a.x + a.width <= b.x || b.x + b.width <= a.x || a.y + a.height <= b.y || b.y + b.height <= a.y);
    // No chunk that could carry a timestamp.
    for tag in [&b"tIME"[..], b"tEXt", b"iTXt", b"zTXt"] {
        assert!(!first.windows(4).any(|w| w == tag));
    }
}

#[test]
fn no_nan_or_inf_tokens_after_dirty_input() {
    let mut samples: Vec<f32> = (0..22_050)
        .map(|i| (0.4 * (2.0 * PI * 660.0 * i as f64 / 22_050.0).sin()) as f32)
        .collect();
    samples[100] = f32::NAN;
    samples[2000] = f32::INFINITY;
    samples[3000] = f32::NEG_INFINITY;
    samples[4000] = 3.5;
    let clip = AudioClip::from_samples("dirty", samples, 22_050);
    assert_eq!(clip.sanitize.nan_replaced, 1);
    assert_eq!(clip.sanitize.inf_replaced, 2);
    assert_eq!(clip.sanitize.clamped, 1);
    let settings = RunSettings {
        methods: Method::ALL.to_vec(),
        ..Default::default()
    };
    let (snap, failures) = analyze(&ClipCollection::from_clips([clip]).unwrap(), &settings, &BTreeSet::new()).unwrap();
    assert!(failures.is_empty());
    for text in all_exports(&snap) {
        let bad = text
            .split(|c: char| !(c.is_ascii_alphanumeric() || "+-._".contains(c)))
            .find(|t| {
                let t = t.trim_start_matches(['+', '-']).to_ascii_lowercase();
                t == "nan" || t == "inf" || t == "infinity"
            });
        assert_eq!(bad, None);
    }
    // serde_json writes a non-finite float as null; none may sit in a numeric array.
    let v: serde_json::Value = serde_json::from_str(&export_json(&snap, ExportOptions::default())).unwrap();
    assert!(!has_null_element(&v));
}

fn has_null_element(v: &serde_json::Value) -> bool {
    match v {
        serde_json::Value::Array(items) => items.iter().any(|i| i.is_null() || has_null_element(i)),
        serde_json::Value::Object(map) => map.values().any(has_null_element),
        _ => false,
    }
}

#[test]
fn bundle_export_writes_requested_files() {
    let dir = tempfile::tempdir().unwrap();
    let coll = ClipCollection::from_clips([tone_clip("a", 440.0, 22_050, 0.5)]).unwrap();
    let (snap, _) = analyze(&coll, &RunSettings::default(), &BTreeSet::new()).unwrap();
    let formats: BTreeSet<ExportFormat> = ExportFormat::ALL.into_iter().collect();
    let bundle = ExportBundle::render(&snap, &formats, ExportOptions::default(), Some("console.log('</script>')")).unwrap();
    let written = bundle.write(dir.path()).unwrap();
    assert_eq!(written.len(), 5);
    let html = std::fs::read_to_string(dir.path().join("report.html")).unwrap();
    let doc = scraper::Html::parse_document(&html);
    assert!(doc.errors.is_empty(), "{:?}", doc.errors);
    assert_eq!(embedded_json(&html).unwrap(), bundle.json.as_deref().unwrap());
    assert!(!html.contains("data-static"));
}

#[test]
fn plot_payload_is_a_slice_of_the_document() {
    let coll = ClipCollection::from_clips([tone_clip("a", 440.0, 22_050, 0.5)]).unwrap();
    let settings = RunSettings {
        methods: vec![Method::FftDual, Method::Cqt],
        ..Default::default()
    };
    let (snap, _) = analyze(&coll, &settings, &BTreeSet::new()).unwrap();
    let doc = export_json(&snap, ExportOptions::default());
    for plot in &snap.plots {
        let entry = plot_json(plot, ExportOptions::default());
        assert!(doc.contains(&entry));
        let v: serde_json::Value = serde_json::from_str(&entry).unwrap();
        let freqs: Vec<f64> = serde_json::from_value(v["freqs_hz"].clone()).unwrap();
        assert!(freqs.windows(2).all(|w| w[0] < w[1]));
    }
}
