//! Prediction-set visualizations: co-occurrence matrix and graph, zero-diagonal
//! confusion matrix, multiset chart, coverage boxplots and set-size lolliplots.
//!
//! Every chart has a data form that tests and downstream tools consume
//! (CSV, JSON or DOT) and a deterministic SVG rendering.

mod render;
pub mod svg;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::conformal::PredictionRecord;
use crate::error::{Error, Result};
use crate::metrics::confusion_matrix;
use crate::stats::{significance_stars, welch_t_test, TTest};
use svg::f4;

pub use render::{heatmap_svg, HeatmapLabels};

pub const DEFAULT_MAX_SETS: usize = 20;
pub const MIN_NODE_WIDTH: f64 = 0.3;
pub const MAX_NODE_WIDTH: f64 = 2.0;
pub const MAX_PENWIDTH: f64 = 8.0;

/// `raw[r][c]`: number of prediction sets containing both `r` and `c`, `r != c`.
pub fn cooccurrence_counts(records: &[PredictionRecord], n_classes: usize) -> Vec<Vec<usize>> {
    let mut raw = vec![vec![0; n_classes]; n_classes];
    for rec in records {
        for &a in &rec.set {
            for &b in &rec.set {
                if a != b {
                    raw[a][b] += 1;
                }
            }
        }
    }
    raw
}

/// Divides each column by its sum; all-zero columns stay zero.
pub fn column_normalize(counts: &[Vec<usize>]) -> Vec<Vec<f64>> {
    let n = counts.len();
    let mut out = vec![vec![0.0; n]; n];
    for c in 0..n {
        let total: usize = counts.iter().map(|row| row[c]).sum();
        if total > 0 {
            for r in 0..n {
                out[r][c] = counts[r][c] as f64 / total as f64;
            }
        }
    }
    out
}

pub fn cooccurrence_matrix(records: &[PredictionRecord], n_classes: usize) -> Vec<Vec<f64>> {
    column_normalize(&cooccurrence_counts(records, n_classes))
}

/// Confusion matrix (`[predicted][true]`) with the diagonal zeroed before
/// column normalization.
pub fn zdcm(records: &[PredictionRecord], n_classes: usize) -> Vec<Vec<f64>> {
    let mut cm = confusion_matrix(records, n_classes);
    for (c, row) in cm.iter_mut().enumerate() {
        row[c] = 0;
    }
    column_normalize(&cm)
}

/// Column-normalized confusion matrix (`[predicted][true]`).
pub fn normalized_confusion(records: &[PredictionRecord], n_classes: usize) -> Vec<Vec<f64>> {
    column_normalize(&confusion_matrix(records, n_classes))
}

/// Square matrix as CSV with class names on both axes.
pub fn matrix_csv(matrix: &[Vec<f64>], class_names: &[String]) -> String {
    let mut out = String::from("class");
    for name in class_names {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (name, row) in class_names.iter().zip(matrix) {
        out.push_str(name);
        for v in row {
            out.push(',');
            out.push_str(&f4(*v));
        }
        out.push('\n');
    }
    out
}

/// Undirected class graph weighted by pair co-occurrence counts.
#[derive(Debug, Clone, PartialEq)]
pub struct CooccurrenceGraph {
    pub nodes: Vec<String>,
    /// Symmetric pair counts, zero diagonal.
    pub weights: Vec<Vec<usize>>,
}

impl CooccurrenceGraph {
    pub fn new(records: &[PredictionRecord], class_names: &[String]) -> Self {
        Self {
            nodes: class_names.to_vec(),
            weights: cooccurrence_counts(records, class_names.len()),
        }
    }

    /// `(a, b, weight)` with `a < b` and positive weight.
    pub fn edges(&self) -> Vec<(usize, usize, usize)> {
        let n = self.nodes.len();
        let mut out = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if self.weights[a][b] > 0 {
                    out.push((a, b, self.weights[a][b]));
                }
            }
        }
        out
    }

    pub fn weighted_degree(&self, node: usize) -> usize {
        self.weights[node].iter().sum()
    }

    /// Node widths scaled linearly from the smallest to the largest weighted
    /// degree onto `[MIN_NODE_WIDTH, MAX_NODE_WIDTH]`. All nodes get the
    /// minimum when every degree is equal.
    pub fn node_widths(&self) -> Vec<f64> {
        let deg: Vec<usize> = (0..self.nodes.len()).map(|i| self.weighted_degree(i)).collect();
        let lo = deg.iter().copied().min().unwrap_or(0);
        let hi = deg.iter().copied().max().unwrap_or(0);
        deg.iter()
            .map(|&d| {
                if hi == lo {
                    MIN_NODE_WIDTH
                } else {
                    MIN_NODE_WIDTH + (MAX_NODE_WIDTH - MIN_NODE_WIDTH) * (d - lo) as f64 / (hi - lo) as f64
                }
            })
            .collect()
    }

    /// Edge pen widths proportional to weight, the heaviest edge at `MAX_PENWIDTH`.
    pub fn pen_widths(&self) -> Vec<(usize, usize, f64)> {
        let edges = self.edges();
        let max = edges.iter().map(|e| e.2).max().unwrap_or(1) as f64;
        edges
            .into_iter()
            .map(|(a, b, w)| (a, b, MAX_PENWIDTH * w as f64 / max))
            .collect()
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from(
            "graph cooccurrence {\n  layout=circo;\n  node [shape=circle, fixedsize=true, fontsize=10];\n",
        );
        for (name, w) in self.nodes.iter().zip(self.node_widths()) {
            out.push_str(&format!("  \"{}\" [width={}];\n", dot_escape(name), f4(w)));
        }
        for ((a, b, pw), (_, _, w)) in self.pen_widths().into_iter().zip(self.edges()) {
            out.push_str(&format!(
                "  \"{}\" -- \"{}\" [weight={}, penwidth={}, label=\"{}\"];\n",
                dot_escape(&self.nodes[a]),
                dot_escape(&self.nodes[b]),
                w,
                f4(pw),
                w
            ));
        }
        out.push_str("}\n");
        out
    }

    pub fn to_svg(&self) -> String {
        render::graph_svg(self)
    }
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetFrequency {
    pub set: Vec<usize>,
    pub count: usize,
}

/// Most frequent distinct prediction sets, the empty set included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultisetChart {
    pub class_names: Vec<String>,
    pub columns: Vec<SetFrequency>,
    pub total: usize,
}

/// Keeps the `max_sets` most frequent sets; ties go to the smaller set, then
/// to the lexicographically smaller list of class indices.
pub fn multiset_chart(records: &[PredictionRecord], class_names: &[String], max_sets: usize) -> MultisetChart {
    let mut counts: HashMap<&[usize], usize> = HashMap::new();
    for r in records {
        *counts.entry(r.set.as_slice()).or_insert(0) += 1;
    }
    let mut columns: Vec<SetFrequency> = counts
        .into_iter()
        .map(|(set, count)| SetFrequency {
            set: set.to_vec(),
            count,
        })
        .collect();
    columns.sort_by(|a, b| {
        b.count
            .cmp(&a.count)
            .then(a.set.len().cmp(&b.set.len()))
            .then_with(|| a.set.cmp(&b.set))
    });
    columns.truncate(max_sets);
    MultisetChart {
        class_names: class_names.to_vec(),
        columns,
        total: records.len(),
    }
}

impl MultisetChart {
    pub fn set_label(&self, set: &[usize]) -> String {
        let names: Vec<&str> = set.iter().map(|&c| self.class_names[c].as_str()).collect();
        format!("{{{}}}", names.join(";"))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("set,size,count,fraction\n");
        for col in &self.columns {
            let fraction = if self.total == 0 {
                0.0
            } else {
                col.count as f64 / self.total as f64
            };
            out.push_str(&format!(
                "\"{}\",{},{},{}\n",
                self.set_label(&col.set).replace('"', "\"\""),
                col.set.len(),
                col.count,
                f4(fraction)
            ));
        }
        out
    }

    pub fn to_svg(&self) -> String {
        render::multiset_svg(self)
    }
}

/// Type-7 sample quantile (linear interpolation between order statistics).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxStats {
    pub n: usize,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    /// Most extreme values within 1.5 IQR of the box.
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub outliers: Vec<f64>,
}

pub fn box_stats(values: &[f64]) -> Result<BoxStats> {
    if values.is_empty() {
        return Err(Error::Empty("box values"));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let q1 = quantile_sorted(&v, 0.25);
    let median = quantile_sorted(&v, 0.5);
    let q3 = quantile_sorted(&v, 0.75);
    let iqr = q3 - q1;
    let (lo_fence, hi_fence) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let inside: Vec<f64> = v.iter().copied().filter(|x| *x >= lo_fence && *x <= hi_fence).collect();
    Ok(BoxStats {
        n: v.len(),
        q1,
        median,
        q3,
        whisker_low: inside.first().copied().unwrap_or(q1),
        whisker_high: inside.last().copied().unwrap_or(q3),
        outliers: v.into_iter().filter(|x| *x < lo_fence || *x > hi_fence).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub a: usize,
    pub b: usize,
    pub test: TTest,
    pub stars: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxGroup {
    pub label: String,
    pub values: Vec<f64>,
    pub stats: BoxStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageBoxplot {
    pub title: String,
    pub groups: Vec<BoxGroup>,
    pub brackets: Vec<Bracket>,
}

/// One box per group plus a Welch-test bracket for every requested pair of
/// group indices.
pub fn coverage_boxplot(
    title: &str,
    groups: &[(String, Vec<f64>)],
    pairs: &[(usize, usize)],
) -> Result<CoverageBoxplot> {
    let boxes = groups
        .iter()
        .map(|(label, values)| {
            if values.len() < 2 {
                return Err(Error::InvalidParameter(format!(
                    "group `{label}` needs at least 2 values"
                )));
            }
            Ok(BoxGroup {
                label: label.clone(),
                values: values.clone(),
                stats: box_stats(values)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let brackets = pairs
        .iter()
        .map(|&(a, b)| {
            if a >= groups.len() || b >= groups.len() || a == b {
                return Err(Error::InvalidParameter(format!("bad bracket pair ({a}, {b})")));
            }
            let test = welch_t_test(&groups[a].1, &groups[b].1)?;
            Ok(Bracket {
                a,
                b,
                test,
                stars: significance_stars(test.p).to_string(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CoverageBoxplot {
        title: title.to_string(),
        groups: boxes,
        brackets,
    })
}

impl CoverageBoxplot {
    pub fn to_json(&self) -> Result<String> {
        // non-finite statistics serialize as null
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn to_svg(&self) -> String {
        render::boxplot_svg(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LolliPanel {
    pub strategy: String,
    /// `(classifier, mean set size)` in configuration order.
    pub items: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lolliplot {
    pub title: String,
    pub panels: Vec<LolliPanel>,
}

impl Lolliplot {
    pub fn new(title: &str, panels: Vec<LolliPanel>) -> Result<Self> {
        if panels.is_empty() || panels.iter().any(|p| p.items.is_empty()) {
            return Err(Error::Empty("lolliplot grid"));
        }
        Ok(Self {
            title: title.to_string(),
            panels,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("strategy,classifier,setsize\n");
        for p in &self.panels {
            for (clf, v) in &p.items {
                out.push_str(&format!("{},{},{}\n", p.strategy, clf, f4(*v)));
            }
        }
        out
    }

    pub fn to_svg(&self) -> String {
        render::lolliplot_svg(self)
    }
}
