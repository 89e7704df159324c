use std::f64::consts::PI;

use super::svg::{ramp, Anchor, Svg};
use super::{CooccurrenceGraph, CoverageBoxplot, Lolliplot, MultisetChart};

const INK: &str = "#222222";
const ACCENT: &str = "#2171b5";
const FAINT: &str = "#d9d9d9";

#[derive(Debug, Clone, PartialEq, Default)]
pub struct HeatmapLabels {
    pub title: String,
    pub rows: String,
    pub columns: String,
}

/// Annotated heatmap of a matrix in [0, 1], rows top to bottom.
pub fn heatmap_svg(matrix: &[Vec<f64>], class_names: &[String], labels: &HeatmapLabels) -> String {
    let n = class_names.len();
    let cell = 48.0;
    let (left, top) = (120.0, 120.0);
    let mut s = Svg::new(left + cell * n as f64 + 20.0, top + cell * n as f64 + 20.0);
    s.text(
        left + cell * n as f64 / 2.0,
        20.0,
        14.0,
        Anchor::Middle,
        INK,
        &labels.title,
    );
    s.text(
        left + cell * n as f64 / 2.0,
        40.0,
        11.0,
        Anchor::Middle,
        INK,
        &labels.columns,
    );
    s.vtext(20.0, top + cell * n as f64 / 2.0, 11.0, Anchor::Middle, &labels.rows);
    for (i, name) in class_names.iter().enumerate() {
        let center = i as f64 * cell + cell / 2.0;
        s.text(left - 6.0, top + center + 4.0, 10.0, Anchor::End, INK, name);
        s.vtext(left + center + 4.0, top - 6.0, 10.0, Anchor::Start, name);
    }
    for (r, row) in matrix.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            let (x, y) = (left + c as f64 * cell, top + r as f64 * cell);
            s.rect(x, y, cell, cell, &ramp(v), Some("#ffffff"));
            let color = if v > 0.5 { "#ffffff" } else { INK };
            s.text(
                x + cell / 2.0,
                y + cell / 2.0 + 4.0,
                10.0,
                Anchor::Middle,
                color,
                &format!("{v:.2}"),
            );
        }
    }
    s.finish()
}

/// Fixed circular layout, class 0 at the top, clockwise.
pub fn graph_svg(g: &CooccurrenceGraph) -> String {
    let n = g.nodes.len();
    let (size, radius, unit) = (480.0, 170.0, 24.0);
    let pos: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let a = 2.0 * PI * i as f64 / n.max(1) as f64 - PI / 2.0;
            (size / 2.0 + radius * a.cos(), size / 2.0 + radius * a.sin())
        })
        .collect();
    let mut s = Svg::new(size, size);
    for (a, b, pw) in g.pen_widths() {
        s.line(pos[a].0, pos[a].1, pos[b].0, pos[b].1, "#6baed6", pw);
    }
    for ((name, w), (x, y)) in g.nodes.iter().zip(g.node_widths()).zip(&pos) {
        s.circle(*x, *y, w * unit / 2.0, ACCENT);
        s.text(*x, *y - w * unit / 2.0 - 4.0, 11.0, Anchor::Middle, INK, name);
    }
    s.finish()
}

/// Frequency bars over a dot matrix of set membership.
pub fn multiset_svg(chart: &MultisetChart) -> String {
    let k = chart.class_names.len();
    let cols = chart.columns.len();
    let (left, top, col_w, bar_h, row_h) = (120.0, 30.0, 26.0, 160.0, 20.0);
    let width = left + col_w * cols.max(1) as f64 + 20.0;
    let matrix_top = top + bar_h + 20.0;
    let mut s = Svg::new(width, matrix_top + row_h * k as f64 + 20.0);
    let max = chart.columns.iter().map(|c| c.count).max().unwrap_or(1).max(1) as f64;
    for (j, col) in chart.columns.iter().enumerate() {
        let x = left + j as f64 * col_w;
        let h = bar_h * col.count as f64 / max;
        s.rect(x + 4.0, top + bar_h - h, col_w - 8.0, h, INK, None);
        s.text(
            x + col_w / 2.0,
            top + bar_h - h - 3.0,
            9.0,
            Anchor::Middle,
            INK,
            &col.count.to_string(),
        );
    }
    s.line(left, top + bar_h, left + col_w * cols as f64, top + bar_h, INK, 1.0);
    for (c, name) in chart.class_names.iter().enumerate() {
        let y = matrix_top + c as f64 * row_h + row_h / 2.0;
        s.text(left - 8.0, y + 4.0, 10.0, Anchor::End, INK, name);
        for j in 0..cols {
            let x = left + j as f64 * col_w + col_w / 2.0;
            let member = chart.columns[j].set.contains(&c);
            s.circle(x, y, 5.0, if member { INK } else { FAINT });
        }
    }
    for (j, col) in chart.columns.iter().enumerate() {
        if let (Some(&lo), Some(&hi)) = (col.set.first(), col.set.last()) {
            if lo != hi {
                let x = left + j as f64 * col_w + col_w / 2.0;
                let y = |c: usize| matrix_top + c as f64 * row_h + row_h / 2.0;
                s.line(x, y(lo), x, y(hi), INK, 2.0);
            }
        }
    }
    s.finish()
}

fn nice_ticks(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..=count).map(|i| lo + (hi - lo) * i as f64 / count as f64).collect()
}

/// Boxes with 1.5 IQR whiskers, outlier points and stacked significance
/// brackets above the data.
pub fn boxplot_svg(plot: &CoverageBoxplot) -> String {
    let g = plot.groups.len();
    let (left, box_w, slot) = (70.0, 44.0, 90.0);
    let bracket_step = 20.0;
    let top = 40.0 + bracket_step * plot.brackets.len() as f64;
    let plot_h = 260.0;
    let width = left + slot * g.max(1) as f64 + 20.0;
    let mut s = Svg::new(width, top + plot_h + 50.0);

    let all = plot.groups.iter().flat_map(|b| b.values.iter().copied());
    let (mut lo, mut hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
    if !lo.is_finite() {
        (lo, hi) = (0.0, 1.0);
    }
    let pad = ((hi - lo) * 0.05).max(0.005);
    let (lo, hi) = (lo - pad, hi + pad);
    let y = |v: f64| top + plot_h * (hi - v) / (hi - lo);
    let x = |i: usize| left + slot * i as f64 + slot / 2.0;

    s.text(width / 2.0, 20.0, 14.0, Anchor::Middle, INK, &plot.title);
    s.line(left, top, left, top + plot_h, INK, 1.0);
    for t in nice_ticks(lo, hi, 5) {
        s.line(left - 4.0, y(t), left, y(t), INK, 1.0);
        s.text(left - 6.0, y(t) + 4.0, 9.0, Anchor::End, INK, &format!("{t:.3}"));
    }
    s.vtext(16.0, top + plot_h / 2.0, 11.0, Anchor::Middle, "coverage");

    for (i, b) in plot.groups.iter().enumerate() {
        let st = &b.stats;
        let cx = x(i);
        s.line(cx, y(st.whisker_low), cx, y(st.q1), INK, 1.0);
        s.line(cx, y(st.q3), cx, y(st.whisker_high), INK, 1.0);
        s.line(
            cx - box_w / 4.0,
            y(st.whisker_low),
            cx + box_w / 4.0,
            y(st.whisker_low),
            INK,
            1.0,
        );
        s.line(
            cx - box_w / 4.0,
            y(st.whisker_high),
            cx + box_w / 4.0,
            y(st.whisker_high),
            INK,
            1.0,
        );
        s.rect(
            cx - box_w / 2.0,
            y(st.q3),
            box_w,
            y(st.q1) - y(st.q3),
            "#c6dbef",
            Some(INK),
        );
        s.line(cx - box_w / 2.0, y(st.median), cx + box_w / 2.0, y(st.median), INK, 2.0);
        for &o in &st.outliers {
            s.circle(cx, y(o), 2.5, INK);
        }
        s.text(cx, top + plot_h + 18.0, 11.0, Anchor::Middle, INK, &b.label);
    }

    for (level, br) in plot.brackets.iter().enumerate() {
        let by = top - 10.0 - bracket_step * level as f64;
        let (xa, xb) = (x(br.a), x(br.b));
        s.polyline(&[(xa, by + 6.0), (xa, by), (xb, by), (xb, by + 6.0)], INK, 1.0);
        s.text((xa + xb) / 2.0, by - 3.0, 10.0, Anchor::Middle, INK, &br.stars);
    }
    s.finish()
}

/// One panel per strategy; horizontal stems from zero with the value printed
/// beside each dot.
pub fn lolliplot_svg(plot: &Lolliplot) -> String {
    let (left, panel_w, gap, row_h, top) = (80.0, 200.0, 30.0, 28.0, 50.0);
    let rows = plot.panels.iter().map(|p| p.items.len()).max().unwrap_or(1);
    let max = plot
        .panels
        .iter()
        .flat_map(|p| p.items.iter().map(|i| i.1))
        .fold(0.0f64, f64::max)
        .max(1e-9);
    let span = max * 1.25;
    let width = left + (panel_w + gap) * plot.panels.len() as f64;
    let plot_h = row_h * rows as f64;
    let mut s = Svg::new(width, top + plot_h + 40.0);
    s.text(width / 2.0, 20.0, 14.0, Anchor::Middle, INK, &plot.title);
    for (p, panel) in plot.panels.iter().enumerate() {
        let x0 = left + (panel_w + gap) * p as f64;
        let x = |v: f64| x0 + panel_w * v / span;
        s.text(
            x0 + panel_w / 2.0,
            top - 10.0,
            11.0,
            Anchor::Middle,
            INK,
            &panel.strategy,
        );
        s.rect(x0, top, panel_w, plot_h, "#f7f7f7", Some(FAINT));
        for t in nice_ticks(0.0, span, 4) {
            s.line(x(t), top + plot_h, x(t), top + plot_h + 4.0, INK, 1.0);
            s.text(x(t), top + plot_h + 16.0, 9.0, Anchor::Middle, INK, &format!("{t:.1}"));
        }
        for (r, (clf, v)) in panel.items.iter().enumerate() {
            let cy = top + row_h * r as f64 + row_h / 2.0;
            if p == 0 {
                s.text(x0 - 8.0, cy + 4.0, 10.0, Anchor::End, INK, clf);
            }
            s.line(x(0.0), cy, x(*v), cy, ACCENT, 2.0);
            s.circle(x(*v), cy, 5.0, ACCENT);
            s.text(x(*v) + 8.0, cy + 4.0, 9.0, Anchor::Start, INK, &format!("{v:.2}"));
        }
    }
    s.finish()
}
