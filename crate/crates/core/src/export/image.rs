//! Static PNG figures: a scene of shapes rasterized without antialiasing,
//! so the same snapshot always produces the same bytes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::export::Snapshot;
use crate::sweep::GridResult;

pub const MIN_WIDTH: u32 = 1600;
pub const MIN_HEIGHT: u32 = 1200;
const CELL_MIN_W: u32 = 400;
const CELL_MIN_H: u32 = 300;
const MARGIN_LEFT: u32 = 72;
const MARGIN_RIGHT: u32 = 20;
const MARGIN_TOP: u32 = 36;
const MARGIN_BOTTOM: u32 = 44;
const DB_SPAN: f64 = 100.0;

type Rgb = [u8; 3];

const WHITE: Rgb = [255, 255, 255];
const BLACK: Rgb = [0, 0, 0];
const GREY: Rgb = [200, 200, 200];
const TRACE: Rgb = [31, 119, 180];
const FAIL: Rgb = [180, 40, 40];
const BEST: Rgb = [44, 160, 44];
const PALETTE: [Rgb; 8] = [
    [214, 39, 40],
    [255, 127, 14],
    [148, 103, 189],
    [140, 86, 75],
    [227, 119, 194],
    [23, 190, 207],
    [188, 189, 34],
    [127, 127, 127],
];

/// Pixel rectangle of one plot's data area.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxesRegion {
    pub plot_id: Option<String>,
    pub x: u32,
    pub y: u32,
    pub width: u32,
    pub height: u32,
}

/// Where everything landed; written next to the figure when asked for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageLayout {
    pub width: u32,
    pub height: u32,
    pub rows: u32,
    pub cols: u32,
    pub axes: Vec<AxesRegion>,
}

#[derive(Debug, Clone)]
enum Shape {
    Rect { x: i64, y: i64, w: i64, h: i64, color: Rgb, filled: bool },
    Line { points: Vec<(f64, f64)>, color: Rgb, width: i64 },
    Disc { cx: f64, cy: f64, r: f64, color: Rgb },
    Text { x: i64, y: i64, text: String, color: Rgb, scale: i64 },
}

struct Marker {
    freq_hz: f64,
    db: f64,
    color: Rgb,
    order: Option<u64>,
}

struct Panel {
    plot_id: Option<String>,
    title: String,
    freqs: Vec<f64>,
    db: Vec<f64>,
    markers: Vec<Marker>,
    frame: Option<Rgb>,
}

struct Axes {
    x: f64,
    y: f64,
    w: f64,
    h: f64,
    f_lo: f64,
    f_hi: f64,
    db_lo: f64,
    db_hi: f64,
}

impl Axes {
    fn map(&self, freq: f64, db: f64) -> (f64, f64) {
        let fx = if self.f_hi > self.f_lo {
            (freq - self.f_lo) / (self.f_hi - self.f_lo)
        } else {
            0.5
        };
        let fy = ((db.clamp(self.db_lo, self.db_hi) - self.db_lo) / (self.db_hi - self.db_lo)).clamp(0.0, 1.0);
        (self.x + fx * self.w, self.y + (1.0 - fy) * self.h)
    }
}

fn grid_shape(n: usize) -> (u32, u32) {
    let n = n.max(1) as u32;
    let cols = (n as f64).sqrt().ceil() as u32;
    (n.div_ceil(cols), cols)
}

fn tick_label(v: f64) -> String {
    if v.abs() >= 10_000.0 {
        format!("{:.0}k", v / 1000.0)
    } else if v.abs() >= 1000.0 {
        format!("{:.1}k", v / 1000.0)
    } else {
        format!("{v:.0}")
    }
}

fn layout_panels(panels: &[Panel], rows: u32, cols: u32, scene: &mut Vec<Shape>) -> ImageLayout {
    let width = MIN_WIDTH.max(cols * CELL_MIN_W);
    let height = MIN_HEIGHT.max(rows * CELL_MIN_H);
    let cell_w = width / cols;
    let cell_h = height / rows;
    let mut axes_out = Vec::new();

    let n_slots = (rows * cols) as usize;
    for slot in 0..n_slots {
        let panel = panels.get(slot);
        let (r, c) = (slot as u32 / cols, slot as u32 % cols);
        let x0 = c * cell_w + MARGIN_LEFT;
        let y0 = r * cell_h + MARGIN_TOP;
        let w = cell_w - MARGIN_LEFT - MARGIN_RIGHT;
        let h = cell_h - MARGIN_TOP - MARGIN_BOTTOM;
        if panel.is_none() && !panels.is_empty() {
            continue;
        }

        let (f_lo, f_hi, db_lo, db_hi) = ranges(panel);
        let ax = Axes {
            x: x0 as f64,
            y: y0 as f64,
            w: w as f64,
            h: h as f64,
            f_lo,
            f_hi,
            db_lo,
            db_hi,
        };

        // Gridlines and tick labels.
        for i in 0..=4 {
            let t = i as f64 / 4.0;
            let gx = ax.x + t * ax.w;
            let gy = ax.y + t * ax.h;
            scene.push(Shape::Line {
                points: vec![(gx, ax.y), (gx, ax.y + ax.h)],
                color: GREY,
                width: 1,
            });
            scene.push(Shape::Line {
                points: vec![(ax.x, gy), (ax.x + ax.w, gy)],
                color: GREY,
                width: 1,
            });
            scene.push(Shape::Text {
                x: gx as i64 - 12,
                y: (ax.y + ax.h) as i64 + 8,
                text: tick_label(f_lo + t * (f_hi - f_lo)),
                color: BLACK,
                scale: 2,
            });
            scene.push(Shape::Text {
                x: x0 as i64 - 64,
                y: gy as i64 - 7,
                text: format!("{:.0}", db_hi - t * (db_hi - db_lo)),
                color: BLACK,
                scale: 2,
            });
        }
        scene.push(Shape::Text {
            x: x0 as i64 + w as i64 / 2 - 30,
            y: (ax.y + ax.h) as i64 + 28,
            text: "HZ".into(),
            color: BLACK,
            scale: 1,
        });
        scene.push(Shape::Text {
            x: x0 as i64 - 64,
            y: y0 as i64 - 24,
            text: "DB".into(),
            color: BLACK,
            scale: 1,
        });

        if let Some(p) = panel {
            scene.push(Shape::Text {
                x: x0 as i64,
                y: r as i64 * cell_h as i64 + 10,
                text: p.title.clone(),
                color: BLACK,
                scale: 2,
            });
            if p.freqs.len() > 1 {
                scene.push(Shape::Line {
                    points: p.freqs.iter().zip(&p.db).map(|(&f, &d)| ax.map(f, d)).collect(),
                    color: TRACE,
                    width: 2,
                });
            }
            for m in &p.markers {
                let (mx, my) = ax.map(m.freq_hz, m.db);
                scene.push(Shape::Disc { cx: mx, cy: my, r: 6.0, color: m.color });
                if let Some(order) = m.order {
                    scene.push(Shape::Text {
                        x: mx as i64 + 8,
                        y: my as i64 - 16,
                        text: order.to_string(),
                        color: m.color,
                        scale: 2,
                    });
                }
            }
        }
        let frame = panel.and_then(|p| p.frame).unwrap_or(BLACK);
        scene.push(Shape::Rect {
            x: x0 as i64,
            y: y0 as i64,
            w: w as i64,
            h: h as i64,
            color: frame,
            filled: false,
        });
        if frame != BLACK {
            scene.push(Shape::Rect {
                x: x0 as i64 - 2,
                y: y0 as i64 - 2,
                w: w as i64 + 4,
                h: h as i64 + 4,
                color: frame,
                filled: false,
            });
        }

        axes_out.push(AxesRegion {
            plot_id: panel.and_then(|p| p.plot_id.clone()),
            x: x0,
            y: y0,
            width: w,
            height: h,
        });
    }

    ImageLayout {
        width,
        height,
        rows,
        cols,
        axes: axes_out,
    }
}

/// PNG of every plot with its selected peaks numbered and pairs joined.
pub fn export_image(snapshot: &Snapshot) -> Result<(Vec<u8>, ImageLayout)> {
    let panels: Vec<Panel> = snapshot
        .plots
        .iter()
        .map(|p| Panel {
            plot_id: Some(p.plot_id.clone()),
            title: p.plot_id.clone(),
            freqs: p.spectral.freqs_hz.clone(),
            db: p.spectral.psd_db.clone(),
            markers: snapshot
                .state
                .selections
                .iter()
                .filter(|s| s.plot_id == p.plot_id)
                .map(|s| Marker {
                    freq_hz: s.peak.freq_hz,
                    db: s.peak.power_db,
                    color: PALETTE[(s.selection_order as usize - 1) % PALETTE.len()],
                    order: Some(s.selection_order),
                })
                .collect(),
            frame: None,
        })
        .collect();
    let (rows, cols) = grid_shape(panels.len());
    let mut scene = Vec::new();
    let layout = layout_panels(&panels, rows, cols, &mut scene);

    // Pair lines join the two selections' markers, across plots if need be.
    let position = |order: u64| -> Option<(f64, f64)> {
        let sel = snapshot.state.by_order(order)?;
        let slot = panels.iter().position(|p| p.plot_id.as_deref() == Some(&sel.plot_id))?;
        let region = &layout.axes[slot];
        let panel = &panels[slot];
        let ax = axes_for(region, panel);
        Some(ax.map(sel.peak.freq_hz, sel.peak.power_db))
    };
    for (i, pair) in snapshot.state.pairs.iter().enumerate() {
        if let (Some(a), Some(b)) = (position(pair.order_a), position(pair.order_b)) {
            scene.push(Shape::Line {
                points: vec![a, b],
                color: PALETTE[i % PALETTE.len()],
                width: 2,
            });
        }
    }
    Ok((rasterize(&layout, &scene)?, layout))
}

fn axes_for(region: &AxesRegion, panel: &Panel) -> Axes {
    let (f_lo, f_hi, db_lo, db_hi) = ranges(Some(panel));
    Axes {
        x: region.x as f64,
        y: region.y as f64,
        w: region.width as f64,
        h: region.height as f64,
        f_lo,
        f_hi,
        db_lo,
        db_hi,
    }
}

/// Frequency extent and a dB window of at most `DB_SPAN` below the top, on 10 dB steps.
fn ranges(panel: Option<&Panel>) -> (f64, f64, f64, f64) {
    match panel {
        Some(p) if !p.freqs.is_empty() => {
            let f_lo = p.freqs.iter().copied().fold(f64::INFINITY, f64::min);
            let f_hi = p.freqs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let top = p.db.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let bottom = p.db.iter().copied().fold(f64::INFINITY, f64::min).max(top - DB_SPAN);
            let db_hi = (top / 10.0).ceil() * 10.0;
            let mut db_lo = (bottom / 10.0).floor() * 10.0;
            if db_lo >= db_hi {
                db_lo = db_hi - 10.0;
            }
            (f_lo, f_hi, db_lo, db_hi)
        }
        _ => (0.0, 1.0, -100.0, 0.0),
    }
}

/// Composite of a parameter grid: one panel per cell, the best one framed.
pub fn render_grid_image(grid: &GridResult) -> Result<(Vec<u8>, ImageLayout)> {
    let panels: Vec<Panel> = grid
        .cells
        .iter()
        .enumerate()
        .map(|(i, cell)| {
            let value = cell
                .metric_value
                .map_or_else(|| "FAILED".to_string(), |v| format!("{v:.3}"));
            let (freqs, db) = cell
                .result
                .as_ref()
                .map(|r| (r.freqs_hz.clone(), r.psd_db.clone()))
                .unwrap_or_default();
            Panel {
                plot_id: Some(format!("n_fft={} hop={}", cell.n_fft, cell.hop_length)),
                title: format!("N={} H={} {}", cell.n_fft, cell.hop_length, value),
                freqs,
                db,
                markers: Vec::new(),
                frame: if grid.best_cell == Some(i) {
                    Some(BEST)
                } else if !cell.succeeded() {
                    Some(FAIL)
                } else {
                    None
                },
            }
        })
        .collect();
    let mut scene = Vec::new();
    let layout = layout_panels(&panels, grid.rows.max(1) as u32, grid.cols.max(1) as u32, &mut scene);
    Ok((rasterize(&layout, &scene)?, layout))
}

struct Canvas {
    w: i64,
    h: i64,
    px: Vec<u8>,
}

impl Canvas {
    fn new(w: u32, h: u32) -> Self {
        Canvas {
            w: w as i64,
            h: h as i64,
            px: WHITE.repeat((w * h) as usize),
        }
    }

    fn put(&mut self, x: i64, y: i64, c: Rgb) {
        if x >= 0 && y >= 0 && x < self.w && y < self.h {
            let i = 3 * (y * self.w + x) as usize;
            self.px[i..i + 3].copy_from_slice(&c);
        }
    }

    fn fill(&mut self, x: i64, y: i64, w: i64, h: i64, c: Rgb) {
        for yy in y.max(0)..(y + h).min(self.h) {
            for xx in x.max(0)..(x + w).min(self.w) {
                self.put(xx, yy, c);
            }
        }
    }

    fn segment(&mut self, a: (f64, f64), b: (f64, f64), c: Rgb, width: i64) {
        let (mut x0, mut y0) = (a.0.round() as i64, a.1.round() as i64);
        let (x1, y1) = (b.0.round() as i64, b.1.round() as i64);
        let dx = (x1 - x0).abs();
        let dy = -(y1 - y0).abs();
        let sx = if x0 < x1 { 1 } else { -1 };
        let sy = if y0 < y1 { 1 } else { -1 };
        let mut err = dx + dy;
        let half = (width - 1) / 2;
        loop {
            self.fill(x0 - half, y0 - half, width, width, c);
            if x0 == x1 && y0 == y1 {
                break;
            }
            let e2 = 2 * err;
            if e2 >= dy {
                err += dy;
                x0 += sx;
            }
            if e2 <= dx {
                err += dx;
                y0 += sy;
            }
        }
    }

    fn disc(&mut self, cx: f64, cy: f64, r: f64, c: Rgb) {
        let (x0, y0) = (cx.round() as i64, cy.round() as i64);
        let ri = r.ceil() as i64;
        for dy in -ri..=ri {
            for dx in -ri..=ri {
                if ((dx * dx + dy * dy) as f64) <= r * r {
                    self.put(x0 + dx, y0 + dy, c);
                }
            }
        }
    }

    fn text(&mut self, x: i64, y: i64, s: &str, c: Rgb, scale: i64) {
        let mut cx = x;
        for ch in s.chars() {
            let rows = glyph(ch);
            for (ry, bits) in rows.iter().enumerate() {
                for col in 0..5 {
                    if bits & (0x10 >> col) != 0 {
                        self.fill(cx + col * scale, y + ry as i64 * scale, scale, scale, c);
                    }
                }
            }
            cx += 6 * scale;
        }
    }
}

fn rasterize(layout: &ImageLayout, scene: &[Shape]) -> Result<Vec<u8>> {
    let mut canvas = Canvas::new(layout.width, layout.height);
    for shape in scene {
        match shape {
            Shape::Rect { x, y, w, h, color, filled: true } => canvas.fill(*x, *y, *w, *h, *color),
            Shape::Rect { x, y, w, h, color, filled: false } => {
                let corners = [
                    (*x as f64, *y as f64),
                    ((x + w) as f64, *y as f64),
                    ((x + w) as f64, (y + h) as f64),
                    (*x as f64, (y + h) as f64),
                ];
                for i in 0..4 {
                    canvas.segment(corners[i], corners[(i + 1) % 4], *color, 1);
                }
            }
            Shape::Line { points, color, width } => {
                for w in points.windows(2) {
                    canvas.segment(w[0], w[1], *color, *width);
                }
            }
            Shape::Disc { cx, cy, r, color } => canvas.disc(*cx, *cy, *r, *color),
            Shape::Text { x, y, text, color, scale } => canvas.text(*x, *y, text, *color, *scale),
        }
    }
    encode_png(layout.width, layout.height, &canvas.px)
}

fn encode_png(w: u32, h: u32, rgb: &[u8]) -> Result<Vec<u8>> {
    let fail = |e: png::EncodingError| Error::RenderFailure(e.to_string());
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, w, h);
        enc.set_color(png::ColorType::Rgb);
        enc.set_depth(png::BitDepth::Eight);
        let mut writer = enc.write_header().map_err(fail)?;
        writer.write_image_data(rgb).map_err(fail)?;
        writer.finish().map_err(fail)?;
    }
    Ok(out)
}

/// 5x7 glyphs, one byte per row, high bit on the left. Lowercase folds to uppercase.
fn glyph(c: char) -> [u8; 7] {
    match c.to_ascii_uppercase() {
        '0' => [0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E],
        '1' => [0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E],
        '2' => [0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F],
        '3' => [0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E],
        '4' => [0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02],
        '5' => [0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E],
        '6' => [0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E],
        '7' => [0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08],
        '8' => [0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E],
        '9' => [0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C],
        'A' => [0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11],
        'B' => [0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E],
        'C' => [0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E],
        'D' => [0x1C, 0x12, 0x11, 0x11, 0x11, 0x12, 0x1C],
        'E' => [0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F],
        'F' => [0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10],
        'G' => [0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F],
        'H' => [0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11],
        'I' => [0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E],
        'J' => [0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C],
        'K' => [0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11],
        'L' => [0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F],
        'M' => [0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11],
        'N' => [0x11, 0x11, 0x19, 0x15, 0x13, 0x11, 0x11],
        'O' => [0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E],
        'P' => [0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10],
        'Q' => [0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D],
        'R' => [0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11],
        'S' => [0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E],
        'T' => [0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04],
        'U' => [0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E],
        'V' => [0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04],
        'W' => [0x11, 0x11, 0x11, 0x15, 0x15, 0x15, 0x0A],
        'X' => [0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11],
        'Y' => [0x11, 0x11, 0x11, 0x0A, 0x04, 0x04, 0x04],
        'Z' => [0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F],
        '.' => [0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C],
        ',' => [0x00, 0x00, 0x00, 0x00, 0x0C, 0x04, 0x08],
        '-' => [0x00, 0x00, 0x00, 0x1F, 0x00, 0x00, 0x00],
        '+' => [0x00, 0x04, 0x04, 0x1F, 0x04, 0x04, 0x00],
        '=' => [0x00, 0x00, 0x1F, 0x00, 0x1F, 0x00, 0x00],
        ':' => [0x00, 0x0C, 0x0C, 0x00, 0x0C, 0x0C, 0x00],
        '_' => [0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x1F],
        '/' => [0x00, 0x01, 0x02, 0x04, 0x08, 0x10, 0x00],
        '#' => [0x0A, 0x0A, 0x1F, 0x0A, 0x1F, 0x0A, 0x0A],
        '(' => [0x02, 0x04, 0x08, 0x08, 0x08, 0x04, 0x02],
        ')' => [0x08, 0x04, 0x02, 0x02, 0x02, 0x04, 0x08],
        '%' => [0x18, 0x19, 0x02, 0x04, 0x08, 0x13, 0x03],
        ' ' => [0; 7],
        _ => [0x1F, 0x11, 0x11, 0x11, 0x11, 0x11, 0x1F],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_shapes() {
        assert_eq!(grid_shape(0), (1, 1));
        assert_eq!(grid_shape(1), (1, 1));
        assert_eq!(grid_shape(2), (1, 2));
        assert_eq!(grid_shape(5), (2, 3));
        assert_eq!(grid_shape(15), (4, 4));
    }

    #[test]
    fn glyphs_fit_five_columns() {
        for c in ('0'..='9').chain('A'..='Z').chain(".,-+=:_/#()% ".chars()) {
            assert!(glyph(c).iter().all(|row| row & !0x1F == 0), "{c}");
        }
    }

    #[test]
    fn bresenham_hits_both_ends() {
        let mut c = Canvas::new(20, 20);
        c.segment((2.0, 3.0), (17.0, 11.0), BLACK, 1);
        let at = |x: i64, y: i64| c.px[3 * (y * 20 + x) as usize];
        assert_eq!(at(2, 3), 0);
        assert_eq!(at(17, 11), 0);
    }
}
