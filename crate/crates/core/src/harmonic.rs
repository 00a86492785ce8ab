//! Peak selections, frequency pairs, and the ratio graph built from them.
//!
//! State transitions are pure: every operation returns a new [`SelectionState`].
//! Selection orders start at 1, grow with every select, and are never reused,
//! so anything keyed on them (colours, pair references) stays stable.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::Peak;

pub const DEFAULT_AUTO_SELECT: usize = 4;
pub const MAX_AUTO_SELECT: usize = 5;
pub const DEFAULT_INTEGER_TOLERANCE: f64 = 0.05;

/// `max / min` of two positive frequencies.
pub fn compute_ratio(fa: f64, fb: f64) -> Result<f64> {
    for f in [fa, fb] {
        if !(f.is_finite() && f > 0.0) {
            return Err(Error::NonPositiveFrequency(f));
        }
    }
    Ok(fa.max(fb) / fa.min(fb))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub plot_id: String,
    pub peak: Peak,
    pub selection_order: u64,
}

/// Two selections, referenced by their orders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pair {
    pub order_a: u64,
    pub order_b: u64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PeakRef {
    pub plot_id: String,
    pub bin_index: usize,
}

impl PeakRef {
    pub fn new(plot_id: impl Into<String>, bin_index: usize) -> Self {
        PeakRef {
            plot_id: plot_id.into(),
            bin_index,
        }
    }
}

impl std::fmt::Display for PeakRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}@{}", self.plot_id, self.bin_index)
    }
}

/// One user (or automatic) interaction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum SelectionEvent {
    Select { plot_id: String, peak: Peak },
    Deselect { target: PeakRef },
    Remove { target: PeakRef },
    Pair { order_a: u64, order_b: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionState {
    pub selections: Vec<Selection>,
    pub pairs: Vec<Pair>,
    /// Peaks withdrawn from candidacy.
    pub removed: BTreeSet<PeakRef>,
    pub next_order: u64,
}

impl Default for SelectionState {
    fn default() -> Self {
        SelectionState {
            selections: Vec::new(),
            pairs: Vec::new(),
            removed: BTreeSet::new(),
            next_order: 1,
        }
    }
}

impl SelectionState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn find(&self, target: &PeakRef) -> Option<&Selection> {
        self.selections
            .iter()
            .find(|s| s.plot_id == target.plot_id && s.peak.bin_index == target.bin_index)
    }

    pub fn by_order(&self, order: u64) -> Option<&Selection> {
        self.selections.iter().find(|s| s.selection_order == order)
    }

    pub fn live_orders(&self) -> Vec<u64> {
        self.selections.iter().map(|s| s.selection_order).collect()
    }

    pub fn select(&self, plot_id: &str, peak: &Peak) -> Result<Self> {
        let target = PeakRef::new(plot_id, peak.bin_index);
        if self.removed.contains(&target) {
            return Err(Error::PeakRemoved(target.to_string()));
        }
        if self.find(&target).is_some() {
            return Err(Error::AlreadySelected(target.to_string()));
        }
        let mut next = self.clone();
        next.selections.push(Selection {
            plot_id: plot_id.to_string(),
            peak: peak.clone(),
            selection_order: self.next_order,
        });
        next.next_order += 1;
        Ok(next)
    }

    /// Drops a selection and every pair that references it.
    pub fn deselect(&self, target: &PeakRef) -> Result<Self> {
        let order = self
            .find(target)
            .ok_or_else(|| Error::UnknownSelection(target.to_string()))?
            .selection_order;
        let mut next = self.clone();
        next.selections.retain(|s| s.selection_order != order);
        next.pairs.retain(|p| p.order_a != order && p.order_b != order);
        Ok(next)
    }

    /// Withdraws a peak from candidacy, deselecting it first if needed.
    pub fn remove(&self, target: &PeakRef) -> Result<Self> {
        let mut next = if self.find(target).is_some() {
            self.deselect(target)?
        } else {
            self.clone()
        };
        next.removed.insert(target.clone());
        Ok(next)
    }

    /// Links two live selections. Re-pairing an existing pair is a no-op.
    pub fn pair(&self, order_a: u64, order_b: u64) -> Result<Self> {
        let a = self
            .by_order(order_a)
            .ok_or_else(|| Error::UnknownSelection(format!("order {order_a}")))?;
        let b = self
            .by_order(order_b)
            .ok_or_else(|| Error::UnknownSelection(format!("order {order_b}")))?;
        if order_a == order_b {
            return Err(Error::UnknownSelection(format!("cannot pair order {order_a} with itself")));
        }
        let exists = self.pairs.iter().any(|p| {
            (p.order_a, p.order_b) == (order_a, order_b) || (p.order_a, p.order_b) == (order_b, order_a)
        });
        let mut next = self.clone();
        if !exists {
            let ratio = compute_ratio(a.peak.freq_hz, b.peak.freq_hz)?;
            next.pairs.push(Pair { order_a, order_b, ratio });
        }
        Ok(next)
    }

    pub fn apply(&self, event: &SelectionEvent) -> Result<Self> {
        match event {
            SelectionEvent::Select { plot_id, peak } => self.select(plot_id, peak),
            SelectionEvent::Deselect { target } => self.deselect(target),
            SelectionEvent::Remove { target } => self.remove(target),
            SelectionEvent::Pair { order_a, order_b } => self.pair(*order_a, *order_b),
        }
    }

    /// Folds an event log over an empty state, stopping at the first invalid event.
    pub fn replay<'a>(events: impl IntoIterator<Item = &'a SelectionEvent>) -> Result<Self> {
        events
            .into_iter()
            .try_fold(Self::new(), |state, event| state.apply(event))
    }
}

/// The `n` strongest peaks of every plot, selected in plot order then power order.
pub fn auto_select(peaks_by_plot: &BTreeMap<String, Vec<Peak>>, n: usize) -> Result<SelectionState> {
    if !(1..=MAX_AUTO_SELECT).contains(&n) {
        return Err(Error::InvalidParams(format!(
            "auto-select count must lie in [1, {MAX_AUTO_SELECT}], got {n}"
        )));
    }
    let mut state = SelectionState::new();
    for (plot_id, peaks) in peaks_by_plot {
        let mut ranked: Vec<&Peak> = peaks.iter().collect();
        ranked.sort_by(|a, b| crate::features::peak_order(a, b));
        for peak in ranked.into_iter().take(n) {
            state = state.select(plot_id, peak)?;
        }
    }
    Ok(state)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphNode {
    pub id: usize,
    pub freq_hz: f64,
    /// Plots whose selections sit at this frequency.
    pub plots: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub source: usize,
    pub target: usize,
    pub ratio: f64,
    pub is_near_integer: bool,
    pub nearest_integer: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct HarmonicGraph {
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<GraphEdge>,
}

/// One node per distinct selected frequency, one edge per pair.
pub fn build_graph(state: &SelectionState, integer_tolerance: f64) -> Result<HarmonicGraph> {
    if !(integer_tolerance > 0.0 && integer_tolerance < 0.5) {
        return Err(Error::InvalidParams(format!(
            "integer tolerance must lie in (0, 0.5), got {integer_tolerance}"
        )));
    }
    let mut nodes: Vec<GraphNode> = Vec::new();
    let mut node_of_order: BTreeMap<u64, usize> = BTreeMap::new();
    for sel in &state.selections {
        let freq = sel.peak.freq_hz;
        let id = match nodes.iter().position(|n| n.freq_hz.to_bits() == freq.to_bits()) {
            Some(id) => id,
            None => {
                nodes.push(GraphNode {
                    id: nodes.len(),
                    freq_hz: freq,
                    plots: Vec::new(),
                });
                nodes.len() - 1
            }
        };
        if !nodes[id].plots.contains(&sel.plot_id) {
            nodes[id].plots.push(sel.plot_id.clone());
        }
        node_of_order.insert(sel.selection_order, id);
    }

    let edges = state
        .pairs
        .iter()
        .map(|pair| {
            let lookup = |order: u64| {
                node_of_order
                    .get(&order)
                    .copied()
                    .ok_or_else(|| Error::UnknownSelection(format!("pair references order {order}")))
            };
            let nearest = pair.ratio.round();
            Ok(GraphEdge {
                source: lookup(pair.order_a)?,
                target: lookup(pair.order_b)?,
                ratio: pair.ratio,
                is_near_integer: (pair.ratio - nearest).abs() <= integer_tolerance,
                nearest_integer: nearest as u64,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HarmonicGraph { nodes, edges })
}
