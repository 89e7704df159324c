use std::fmt::Write as _;

use multiconf_core::ingest::{ingest, IngestFormat, IngestOptions};
use multiconf_core::strategies::run_strategy;
use multiconf_core::synth::generate;
use multiconf_core::viz::{cooccurrence_matrix, multiset_chart, zdcm, CooccurrenceGraph};
use multiconf_core::{ClassifierConfig, Metric, MetricsReport, RecordLog, StrategyKind, SynthConfig};

fn column_sums(m: &[Vec<f64>]) -> Vec<f64> {
    (0..m.len()).map(|c| m.iter().map(|r| r[c]).sum()).collect()
}

#[test]
fn synth_to_charts() {
    let data = generate(&SynthConfig {
        user_shift: 1.0,
        seed: 5,
        ..SynthConfig::default()
    })
    .unwrap();
    for kind in StrategyKind::ALL {
        let recs = run_strategy(&data, kind, &ClassifierConfig::knn(), 0.1, 3).unwrap();
        let rep = MetricsReport::compute(&recs, data.n_classes()).unwrap();
        assert!(rep.get(Metric::Coverage) > 0.5, "{kind}");
        assert!(rep.get(Metric::SetSize) >= rep.get(Metric::Coverage));

        for m in [cooccurrence_matrix(&recs, 4), zdcm(&recs, 4)] {
            for s in column_sums(&m) {
                assert!(s.abs() < 1e-9 || (s - 1.0).abs() < 1e-9);
            }
        }
        let chart = multiset_chart(&recs, data.class_names(), 20);
        assert_eq!(chart.total, recs.len());
        let dot = CooccurrenceGraph::new(&recs, data.class_names()).to_dot();
        assert!(dot.contains("layout=circo"));
    }
}

#[test]
fn records_round_trip_through_csv() {
    let data = generate(&SynthConfig::default()).unwrap();
    let recs = run_strategy(&data, StrategyKind::UCM, &ClassifierConfig::Gnb, 0.05, 0).unwrap();
    let log = RecordLog {
        class_names: data.class_names().to_vec(),
        user_names: data.user_names().to_vec(),
        records: recs,
    };
    let mut buf = Vec::new();
    log.write_csv(&mut buf).unwrap();
    let back = RecordLog::read_csv(buf.as_slice()).unwrap();
    assert_eq!(back, log);
}

#[test]
fn raw_stream_file_feeds_a_strategy() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("acc.csv");
    let mut text = String::from("timestamp,user,class,ax,ay,az\n");
    let mut t = 0;
    for user in ["u1", "u2"] {
        for (c, class) in ["walk", "sit"].iter().enumerate() {
            for i in 0..6 * 40 {
                let phase = i as f64 * 0.3;
                let amp = if c == 0 { 2.0 } else { 0.1 };
                let _ = writeln!(
                    text,
                    "{t},{user},{class},{},{},{}",
                    amp * phase.sin(),
                    amp * phase.cos(),
                    9.8 + c as f64
                );
                t += 1;
            }
        }
    }
    std::fs::write(&path, text).unwrap();
    let opts = IngestOptions {
        window_len: 40,
        filter_width: 3,
        min_per_user_class: 5,
    };
    let data = ingest(&[&path], IngestFormat::RawStream, &opts).unwrap();
    assert_eq!(data.n_features(), 16);
    assert_eq!(data.n_rows(), 2 * 2 * 6);
    let recs = run_strategy(&data, StrategyKind::MM, &ClassifierConfig::Gnb, 0.2, 1).unwrap();
    let rep = MetricsReport::compute(&recs, data.n_classes()).unwrap();
    assert_eq!(rep.get(Metric::Accuracy), 1.0);
}
