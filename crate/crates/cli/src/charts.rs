//! Set-level charts rendered from prediction records.

use multiconf_core::viz::{
    cooccurrence_matrix, heatmap_svg, matrix_csv, multiset_chart, normalized_confusion, zdcm, CooccurrenceGraph,
    HeatmapLabels,
};
use multiconf_core::PredictionRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chart {
    Cooccurrence,
    Graph,
    Zdcm,
    Confusion,
    Multiset,
}

impl Chart {
    pub const ALL: [Chart; 5] = [
        Chart::Cooccurrence,
        Chart::Graph,
        Chart::Zdcm,
        Chart::Confusion,
        Chart::Multiset,
    ];

    /// File-name tag.
    pub fn tag(self) -> &'static str {
        match self {
            Chart::Cooccurrence => "cooc",
            Chart::Graph => "coocgraph",
            Chart::Zdcm => "zdcm",
            Chart::Confusion => "cm",
            Chart::Multiset => "multiset",
        }
    }
}

fn labels(title: &str, rows: &str, columns: &str) -> HeatmapLabels {
    HeatmapLabels {
        title: title.into(),
        rows: rows.into(),
        columns: columns.into(),
    }
}

/// `(suffix, bytes)` pairs such as `("cooc.svg", ..)`, in chart order.
pub fn render_charts(
    records: &[PredictionRecord],
    class_names: &[String],
    charts: &[Chart],
    max_sets: usize,
) -> Vec<(String, Vec<u8>)> {
    let n = class_names.len();
    let mut out = Vec::new();
    for &chart in charts {
        let tag = chart.tag();
        match chart {
            Chart::Cooccurrence | Chart::Zdcm | Chart::Confusion => {
                let (m, l) = match chart {
                    Chart::Cooccurrence => (
                        cooccurrence_matrix(records, n),
                        labels("co-occurrence", "co-occurring class", "class"),
                    ),
                    Chart::Zdcm => (zdcm(records, n), labels("zero-diagonal confusion", "predicted", "true")),
                    _ => (
                        normalized_confusion(records, n),
                        labels("confusion", "predicted", "true"),
                    ),
                };
                out.push((format!("{tag}.svg"), heatmap_svg(&m, class_names, &l).into_bytes()));
                out.push((format!("{tag}.csv"), matrix_csv(&m, class_names).into_bytes()));
            }
            Chart::Graph => {
                let g = CooccurrenceGraph::new(records, class_names);
                out.push((format!("{tag}.dot"), g.to_dot().into_bytes()));
                out.push((format!("{tag}.svg"), g.to_svg().into_bytes()));
            }
            Chart::Multiset => {
                let c = multiset_chart(records, class_names, max_sets);
                out.push((format!("{tag}.svg"), c.to_svg().into_bytes()));
                out.push((format!("{tag}.csv"), c.to_csv().into_bytes()));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_chart_has_a_data_twin() {
        let recs = vec![PredictionRecord {
            set: vec![0, 1],
            p_values: vec![0.5, 0.4],
            point: 0,
            truth: 1,
            user: 0,
        }];
        let names = vec!["a".to_string(), "b".to_string()];
        let files = render_charts(&recs, &names, &Chart::ALL, 20);
        let suffixes: Vec<&str> = files.iter().map(|f| f.0.as_str()).collect();
        assert_eq!(
            suffixes,
            [
                "cooc.svg",
                "cooc.csv",
                "coocgraph.dot",
                "coocgraph.svg",
                "zdcm.svg",
                "zdcm.csv",
                "cm.svg",
                "cm.csv",
                "multiset.svg",
                "multiset.csv"
            ]
        );
    }
}
