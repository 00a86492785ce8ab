use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use specdesk_core::clip::{segment, Annotation, AudioClip};
use specdesk_core::features::{detect_peaks, extract_ridge, extract_veins, Peak, PeakConfig};
use specdesk_core::harmonic::{auto_select, build_graph, compute_ratio};
use specdesk_core::sweep::{run_grid, GridSpec};
use specdesk_core::transforms::{compute, to_db, Method, SpectralResult, Spectrogram, TransformParams};

fn result_from(psd_linear: Vec<f64>) -> SpectralResult {
    let freqs_hz: Vec<f64> = (0..psd_linear.len()).map(|i| i as f64 * 21.5).collect();
    SpectralResult {
        method: Method::FftDual,
        psd_db: to_db(&psd_linear),
        freqs_hz,
        psd_linear,
        params: TransformParams::for_method(Method::FftDual),
        sanitize: Default::default(),
        derived: BTreeMap::new(),
    }
}

fn spectrogram(rows: Vec<Vec<f64>>) -> Spectrogram {
    let bins = rows[0].len();
    Spectrogram {
        times_s: (0..rows.len()).map(|t| t as f64 * 0.01).collect(),
        freqs_hz: (0..bins).map(|b| b as f64 * 50.0).collect(),
        magnitude: rows,
    }
}

fn rows_strategy() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (2usize..12, 3usize..20).prop_flat_map(|(frames, bins)| {
        prop::collection::vec(prop::collection::vec(0.0f64..10.0, bins), frames)
    })
}

fn noise(seed: u64, n: usize) -> Vec<f32> {
    let mut x = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    (0..n)
        .map(|_| {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((x >> 40) as f32 / (1u64 << 24) as f32) - 0.5
        })
        .collect()
}

proptest! {
    #[test]
    fn segmented_collection_is_a_partition(
        cuts in prop::collection::btree_set(1usize..99, 1..8),
        labels in prop::collection::vec("[ab]{0,1}", 9),
    ) {
        let clip = AudioClip::from_samples("rec", vec![0.1; 1000], 1000);
        let mut edges: Vec<usize> = vec![0];
        edges.extend(cuts.iter().map(|c| c * 10));
        edges.push(1000);
        let anns: Vec<Annotation> = edges
            .windows(2)
            .zip(&labels)
            .map(|(w, l)| Annotation::new(w[0] as f64 / 1000.0, w[1] as f64 / 1000.0, l.clone()))
            .collect();
        let coll = segment(&clip, &anns).unwrap();

        let ids = coll.ids();
        let distinct: BTreeSet<&String> = ids.iter().collect();
        prop_assert_eq!(distinct.len(), anns.len());
        let grouped: usize = coll.groups().values().map(Vec::len).sum();
        prop_assert_eq!(grouped, anns.len());
        let meta: BTreeSet<&String> = coll.metadata().keys().collect();
        prop_assert_eq!(meta, distinct);
        let total: usize = coll.clips().map(|c| c.samples.len()).sum();
        prop_assert_eq!(total, 1000);
    }

    #[test]
    fn ratio_is_symmetric_and_at_least_one(a in 1e-3f64..1e5, b in 1e-3f64..1e5) {
        let r = compute_ratio(a, b).unwrap();
        prop_assert!(r >= 1.0);
        prop_assert_eq!(r, compute_ratio(b, a).unwrap());
    }

    #[test]
    fn peaks_reference_their_bins(psd in prop::collection::vec(0.0f64..100.0, 3..200), max_peaks in 1usize..12) {
        let result = result_from(psd);
        let cfg = PeakConfig { max_peaks, ..PeakConfig::default() };
        let peaks = detect_peaks(&result, &cfg);
        prop_assert!(peaks.len() <= max_peaks);
        let mut bins = BTreeSet::new();
        for p in &peaks {
            prop_assert!(bins.insert(p.bin_index));
            prop_assert_eq!(p.freq_hz, result.freqs_hz[p.bin_index]);
            prop_assert_eq!(p.power_linear, result.psd_linear[p.bin_index]);
            prop_assert_eq!(p.power_db, result.psd_db[p.bin_index]);
            prop_assert!(p.prominence >= 0.0 && p.prominence <= p.power_linear);
            prop_assert!(p.width_hz >= 0.0);
        }
    }

    #[test]
    fn graph_edges_classify_ratios(
        freqs in prop::collection::vec(20.0f64..8000.0, 1..5),
        tol in 0.01f64..0.49,
    ) {
        let peaks: Vec<Peak> = freqs
            .iter()
            .enumerate()
            .map(|(i, &f)| Peak {
                bin_index: i,
                freq_hz: f,
                power_linear: 1.0 + i as f64,
                power_db: 0.0,
                width_hz: 1.0,
                prominence: 0.5,
            })
            .collect();
        let by_plot = BTreeMap::from([("p".to_string(), peaks)]);
        let mut state = auto_select(&by_plot, freqs.len()).unwrap();
        let orders = state.live_orders();
        for (i, &a) in orders.iter().enumerate() {
            for &b in &orders[i + 1..] {
                state = state.pair(a, b).unwrap();
            }
        }
        let graph = build_graph(&state, tol).unwrap();
        prop_assert_eq!(graph.edges.len(), orders.len() * (orders.len() - 1) / 2);
        for e in &graph.edges {
            let r = compute_ratio(graph.nodes[e.source].freq_hz, graph.nodes[e.target].freq_hz).unwrap();
            prop_assert!((e.ratio - r).abs() <= 1e-12 * r);
            prop_assert!(e.ratio >= 1.0);
            prop_assert_eq!(e.nearest_integer, e.ratio.round() as u64);
            prop_assert_eq!(e.is_near_integer, (e.ratio - e.ratio.round()).abs() <= tol);
        }
    }

    #[test]
    fn ridge_follows_the_row_maximum(rows in rows_strategy()) {
        let spec = spectrogram(rows);
        let ridge = extract_ridge(&spec);
        prop_assert_eq!(ridge.points.len(), spec.n_frames());
        for (t, p) in ridge.points.iter().enumerate() {
            let row = &spec.magnitude[t];
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            prop_assert_eq!(p.magnitude, max);
            prop_assert_eq!(p.time_s, spec.times_s[t]);
            let bin = spec.freqs_hz.iter().position(|&f| f == p.freq_hz).unwrap();
            prop_assert_eq!(row[bin], max);
        }
    }

    #[test]
    fn veins_respect_jump_and_persistence(
        rows in rows_strategy(),
        jump in 40.0f64..300.0,
        min_persistence in 2usize..5,
        max_veins in 1usize..6,
    ) {
        let spec = spectrogram(rows);
        let veins = extract_veins(&spec, jump, min_persistence, max_veins).unwrap();
        let mut per_frame: BTreeMap<u64, usize> = BTreeMap::new();
        for p in veins.iter().flat_map(|v| &v.points) {
            *per_frame.entry(p.time_s.to_bits()).or_default() += 1;
        }
        prop_assert!(per_frame.values().all(|&n| n <= max_veins));
        for v in &veins {
            prop_assert_eq!(v.persistence_frames, v.points.len());
            prop_assert!(v.points.len() >= min_persistence);
            for w in v.points.windows(2) {
                prop_assert!(w[1].time_s > w[0].time_s);
                prop_assert!((w[1].freq_hz - w[0].freq_hz).abs() <= jump);
            }
        }
        for w in veins.windows(2) {
            prop_assert!(w[0].total_magnitude() >= w[1].total_magnitude());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn every_method_yields_a_clean_spectrum(seed in any::<u64>(), method in prop::sample::select(Method::ALL.to_vec())) {
        let clip = AudioClip::from_samples("n", noise(seed, 16384), 22_050);
        let r = compute(&clip, &TransformParams::for_method(method)).unwrap();
        prop_assert!(!r.is_empty());
        prop_assert_eq!(r.psd_linear.len(), r.len());
        prop_assert!(r.freqs_hz.windows(2).all(|w| w[1] > w[0]));
        prop_assert!(r.psd_linear.iter().all(|v| v.is_finite() && *v >= 0.0));
        prop_assert_eq!(&r.psd_db, &to_db(&r.psd_linear));
    }

    #[test]
    fn grid_best_cell_is_the_tie_broken_maximum(
        seed in any::<u64>(),
        n_ffts in prop::collection::btree_set(prop::sample::select(vec![128usize, 256, 512, 1024]), 1..4),
        divisors in prop::collection::btree_set(prop::sample::select(vec![1usize, 2, 4, 8]), 1..4),
    ) {
        let clip = AudioClip::from_samples("g", noise(seed, 4096), 22_050);
        let spec = GridSpec {
            n_fft_values: n_ffts.iter().copied().collect(),
            hop_divisors: divisors.iter().copied().collect(),
            ..GridSpec::default()
        };
        let grid = run_grid(&clip, &spec, &TransformParams::for_method(spec.method)).unwrap();
        prop_assert_eq!(grid.cells.len(), n_ffts.len() * divisors.len());
        prop_assert_eq!((grid.rows, grid.cols), (n_ffts.len(), divisors.len()));
        for (i, cell) in grid.cells.iter().enumerate() {
            prop_assert_eq!(cell.n_fft, spec.n_fft_values[i / grid.cols]);
            prop_assert_eq!(cell.hop_divisor, spec.hop_divisors[i % grid.cols]);
        }
        let mut expect: Option<usize> = None;
        for (i, c) in grid.cells.iter().enumerate() {
            let Some(v) = c.metric_value else { continue };
            let better = match expect {
                None => true,
                Some(b) => {
                    let (bv, bc) = (grid.cells[b].metric_value.unwrap(), &grid.cells[b]);
                    v > bv || (v == bv && (c.n_fft, c.hop_divisor) < (bc.n_fft, bc.hop_divisor))
                }
            };
            if better {
                expect = Some(i);
            }
        }
        prop_assert_eq!(grid.best_cell, expect);
    }
}
