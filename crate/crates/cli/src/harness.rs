//! Runs the repetition grid and writes every table, chart and report.
//!
//! Cells (dataset × classifier × strategy) run in parallel; results are
//! collected in grid order and written by a single thread, so the output tree
//! depends only on the configuration and the dataset files.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use multiconf_core::conformal::RecordLog;
use multiconf_core::ingest::{ingest, IngestFormat};
use multiconf_core::metrics::coverage_by_user;
use multiconf_core::report::{repetition_csv, summary_table_csv, test_hypotheses, HypothesisResult, HYPOTHESIS_PAIRS};
use multiconf_core::strategies::run_strategy;
use multiconf_core::synth::generate;
use multiconf_core::viz::{coverage_boxplot, LolliPanel, Lolliplot};
use multiconf_core::{Metric, MetricsReport, MultiUserDataset, PredictionRecord, StrategyKind};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::charts::{render_charts, Chart};
use crate::config::{ClassifierSpec, DatasetSpec, ExperimentConfig, VizConfig};
use crate::error::{HarnessError, Result};
use crate::hashing::{sha256_file, sha256_hex};

pub const MANIFEST: &str = "manifest.json";
pub const HYPOTHESES: &str = "hypotheses.json";

pub struct LoadedDataset {
    pub name: String,
    pub data: MultiUserDataset,
    /// Content hash of whatever produced the rows.
    pub fingerprint: String,
}

pub fn load_dataset(spec: &DatasetSpec) -> Result<LoadedDataset> {
    let wrap = |source| HarnessError::Dataset {
        name: spec.name.clone(),
        source,
    };
    let (data, fingerprint) = if let Some(synth) = &spec.synth {
        let data = generate(synth).map_err(wrap)?;
        (data, sha256_hex(serde_json::to_string(synth)?.as_bytes()))
    } else {
        let paths = spec.paths();
        let mut hashes = Vec::new();
        for p in &paths {
            if !p.is_file() {
                return Err(HarnessError::MissingFile(p.clone()));
            }
            hashes.push(sha256_file(p)?);
        }
        let format = spec.format.unwrap_or(IngestFormat::Preprocessed);
        let data = ingest(&paths, format, &spec.ingest).map_err(wrap)?;
        let meta = serde_json::to_string(&(format, &spec.ingest, hashes))?;
        (data, sha256_hex(meta.as_bytes()))
    };
    log::info!(
        "dataset {}: {} rows, {} users, {} classes, {} features",
        spec.name,
        data.n_rows(),
        data.n_users(),
        data.n_classes(),
        data.n_features()
    );
    Ok(LoadedDataset {
        name: spec.name.clone(),
        data,
        fingerprint,
    })
}

/// All repetitions of one grid cell.
#[derive(Debug, Clone)]
pub struct CellRun {
    pub reports: Vec<MetricsReport>,
    pub records: Vec<Vec<PredictionRecord>>,
}

/// Repetition `r` uses seed `base_seed + r`.
pub fn run_cell(
    data: &MultiUserDataset,
    classifier: &ClassifierSpec,
    strategy: StrategyKind,
    epsilon: f64,
    repetitions: usize,
    base_seed: u64,
) -> multiconf_core::Result<CellRun> {
    let records: Vec<Vec<PredictionRecord>> = (0..repetitions)
        .into_par_iter()
        .map(|r| {
            run_strategy(
                data,
                strategy,
                &classifier.config,
                epsilon,
                base_seed.wrapping_add(r as u64),
            )
        })
        .collect::<multiconf_core::Result<_>>()?;
    let reports = records
        .iter()
        .map(|recs| MetricsReport::compute(recs, data.n_classes()))
        .collect::<multiconf_core::Result<_>>()?;
    Ok(CellRun { reports, records })
}

pub fn cell_prefix(dataset: &str, classifier: &str, strategy: StrategyKind) -> String {
    format!("{dataset}_{classifier}_{strategy}")
}

fn reps_file(prefix: &str) -> String {
    format!("{prefix}_reps.csv")
}

/// Files produced by one cell, relative to the run directory.
fn cell_files(data: &MultiUserDataset, prefix: &str, run: &CellRun, viz: &VizConfig) -> Result<Vec<(String, Vec<u8>)>> {
    let mut files = vec![(reps_file(prefix), repetition_csv(&run.reports).into_bytes())];
    let width = run.records.len().to_string().len();
    for (r, recs) in run.records.iter().enumerate() {
        let log = RecordLog {
            class_names: data.class_names().to_vec(),
            user_names: data.user_names().to_vec(),
            records: recs.clone(),
        };
        let mut buf = Vec::new();
        log.write_csv(&mut buf)?;
        files.push((format!("records/{prefix}_rep{r:0width$}.csv"), buf));
    }
    let pooled: Vec<PredictionRecord> = run.records.iter().flatten().cloned().collect();
    let mut users = String::from("user,n,coverage\n");
    for (u, n, cov) in coverage_by_user(&pooled) {
        users.push_str(&format!("{},{},{}\n", data.user_names()[u], n, cov));
    }
    files.push((format!("{prefix}_users.csv"), users.into_bytes()));
    if viz.enabled {
        let charts: Vec<Chart> = Chart::ALL
            .into_iter()
            .filter(|c| match c {
                Chart::Cooccurrence => viz.cooccurrence,
                Chart::Graph => viz.graph,
                Chart::Zdcm => viz.zdcm,
                Chart::Confusion => viz.confusion,
                Chart::Multiset => viz.multiset,
            })
            .collect();
        for (suffix, bytes) in render_charts(&pooled, data.class_names(), &charts, viz.max_sets) {
            files.push((format!("{prefix}_{suffix}"), bytes));
        }
    }
    Ok(files)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub cells: Vec<CellEntry>,
    /// Aggregate outputs (tables, boxplots, lolliplots, hypotheses).
    pub outputs: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellEntry {
    pub dataset: String,
    pub classifier: String,
    pub strategy: StrategyKind,
    pub fingerprint: String,
    pub files: BTreeMap<String, String>,
}

impl Manifest {
    pub fn read(dir: &Path) -> Result<Option<Self>> {
        let path = dir.join(MANIFEST);
        if !path.is_file() {
            return Ok(None);
        }
        let text = fs::read_to_string(&path).map_err(|e| HarnessError::io(&path, e))?;
        Ok(Some(serde_json::from_str(&text)?))
    }
}

fn cell_fingerprint(
    dataset: &LoadedDataset,
    classifier: &ClassifierSpec,
    strategy: StrategyKind,
    cfg: &ExperimentConfig,
) -> Result<String> {
    let key = serde_json::to_string(&(
        &dataset.fingerprint,
        &classifier.config,
        strategy,
        cfg.epsilon,
        cfg.repetitions,
        cfg.base_seed,
        &cfg.viz,
        env!("CARGO_PKG_VERSION"),
    ))?;
    Ok(sha256_hex(key.as_bytes()))
}

/// A previous result is reused when the fingerprint matches and every file it
/// recorded is still present with the recorded hash.
fn reusable(dir: &Path, entry: &CellEntry) -> bool {
    entry
        .files
        .iter()
        .all(|(rel, hash)| sha256_file(&dir.join(rel)).map(|h| &h == hash).unwrap_or(false))
}

pub fn read_reps_csv(path: &Path) -> Result<Vec<MetricsReport>> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or_default().split(',').collect();
    let metrics: Vec<Metric> = header
        .iter()
        .skip(1)
        .map(|h| Metric::from_name(h).ok_or_else(|| HarnessError::RunDir(format!("unknown metric column `{h}`"))))
        .collect::<Result<_>>()?;
    lines
        .filter(|l| !l.is_empty())
        .map(|line| {
            let mut report = MetricsReport::default();
            for (m, v) in metrics.iter().zip(line.split(',').skip(1)) {
                let v: f64 = v
                    .parse()
                    .map_err(|_| HarnessError::RunDir(format!("{}: bad value `{v}`", path.display())))?;
                report.set(*m, v);
            }
            Ok(report)
        })
        .collect()
}

#[derive(Debug, Clone, Default)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub cells_computed: usize,
    pub cells_reused: usize,
    pub files_written: usize,
    pub hypotheses: Vec<HypothesisResult>,
}

struct CellOutcome {
    entry: CellEntry,
    reports: Vec<MetricsReport>,
    files: Vec<(String, Vec<u8>)>,
}

fn write_file(dir: &Path, rel: &str, bytes: &[u8]) -> Result<String> {
    let path = dir.join(rel);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| HarnessError::io(parent, e))?;
    }
    fs::write(&path, bytes).map_err(|e| HarnessError::io(&path, e))?;
    Ok(sha256_hex(bytes))
}

/// Runs (or resumes) the whole grid. With `force`, earlier results are ignored.
pub fn run_experiment(cfg: &ExperimentConfig, force: bool) -> Result<RunSummary> {
    cfg.validate()?;
    let dir = cfg.output_dir.clone();
    let previous = if force { None } else { Manifest::read(&dir)? };
    let datasets = cfg.datasets.iter().map(load_dataset).collect::<Result<Vec<_>>>()?;

    let mut grid = Vec::new();
    for (d, ds) in datasets.iter().enumerate() {
        for (c, clf) in cfg.classifiers.iter().enumerate() {
            for &s in &cfg.strategies {
                grid.push((d, c, s, cell_fingerprint(ds, clf, s, cfg)?));
            }
        }
    }

    let outcomes: Vec<CellOutcome> =
        grid.par_iter()
            .map(|(d, c, strategy, fingerprint)| {
                let ds = &datasets[*d];
                let clf = &cfg.classifiers[*c];
                let prefix = cell_prefix(&ds.name, clf.label(), *strategy);
                let old = previous.as_ref().and_then(|m| {
                    m.cells.iter().find(|e| {
                        e.dataset == ds.name
                            && e.classifier == clf.label()
                            && e.strategy == *strategy
                            && &e.fingerprint == fingerprint
                    })
                });
                if let Some(entry) = old.filter(|e| reusable(&dir, e)) {
                    log::info!("{prefix}: reusing previous results");
                    return Ok(CellOutcome {
                        entry: entry.clone(),
                        reports: read_reps_csv(&dir.join(reps_file(&prefix)))?,
                        files: Vec::new(),
                    });
                }
                log::info!("{prefix}: running {} repetitions", cfg.repetitions);
                let run = run_cell(&ds.data, clf, *strategy, cfg.epsilon, cfg.repetitions, cfg.base_seed).map_err(
                    |source| HarnessError::Cell {
                        context: prefix.clone(),
                        source,
                    },
                )?;
                let files = cell_files(&ds.data, &prefix, &run, &cfg.viz)?;
                Ok(CellOutcome {
                    entry: CellEntry {
                        dataset: ds.name.clone(),
                        classifier: clf.label().to_string(),
                        strategy: *strategy,
                        fingerprint: fingerprint.clone(),
                        files: BTreeMap::new(),
                    },
                    reports: run.reports,
                    files,
                })
            })
            .collect::<Result<_>>()?;

    fs::create_dir_all(&dir).map_err(|e| HarnessError::io(&dir, e))?;
    let mut summary = RunSummary {
        output_dir: dir.clone(),
        ..RunSummary::default()
    };
    let mut manifest = Manifest::default();
    let mut cell_reports: BTreeMap<(usize, usize, StrategyKind), Vec<MetricsReport>> = BTreeMap::new();
    for ((d, c, s, _), mut outcome) in grid.iter().zip(outcomes) {
        if outcome.files.is_empty() {
            summary.cells_reused += 1;
        } else {
            summary.cells_computed += 1;
            for (rel, bytes) in &outcome.files {
                let hash = write_file(&dir, rel, bytes)?;
                outcome.entry.files.insert(rel.clone(), hash);
                summary.files_written += 1;
            }
        }
        manifest.cells.push(outcome.entry);
        cell_reports.insert((*d, *c, *s), outcome.reports);
    }

    let mut aggregates: Vec<(String, Vec<u8>)> = Vec::new();
    for (d, ds) in datasets.iter().enumerate() {
        for &s in &cfg.strategies {
            let columns: Vec<(String, Vec<MetricsReport>)> = cfg
                .classifiers
                .iter()
                .enumerate()
                .map(|(c, clf)| (clf.label().to_string(), cell_reports[&(d, c, s)].clone()))
                .collect();
            aggregates.push((
                format!("{}_{}_table.csv", ds.name, s),
                summary_table_csv(&columns)?.into_bytes(),
            ));
        }
        for (c, clf) in cfg.classifiers.iter().enumerate() {
            let coverage: Vec<(StrategyKind, Vec<f64>)> = cfg
                .strategies
                .iter()
                .map(|&s| {
                    (
                        s,
                        cell_reports[&(d, c, s)]
                            .iter()
                            .map(|r| r.get(Metric::Coverage))
                            .collect(),
                    )
                })
                .collect();
            summary
                .hypotheses
                .extend(test_hypotheses(&ds.name, clf.label(), &coverage)?);
            if cfg.viz.enabled && cfg.viz.boxplot {
                let groups: Vec<(String, Vec<f64>)> =
                    coverage.iter().map(|(s, v)| (s.to_string(), v.clone())).collect();
                let index = |k: StrategyKind| cfg.strategies.iter().position(|&s| s == k);
                let pairs: Vec<(usize, usize)> = HYPOTHESIS_PAIRS
                    .iter()
                    .filter_map(|&(a, b)| Some((index(a)?, index(b)?)))
                    .collect();
                let plot = coverage_boxplot(&format!("{} {}", ds.name, clf.label()), &groups, &pairs)?;
                let prefix = format!("{}_{}_all_boxplot", ds.name, clf.label());
                aggregates.push((format!("{prefix}.svg"), plot.to_svg().into_bytes()));
                aggregates.push((format!("{prefix}.json"), plot.to_json()?.into_bytes()));
            }
        }
        if cfg.viz.enabled && cfg.viz.lolliplot {
            let panels = cfg
                .strategies
                .iter()
                .map(|&s| LolliPanel {
                    strategy: s.to_string(),
                    items: cfg
                        .classifiers
                        .iter()
                        .enumerate()
                        .map(|(c, clf)| {
                            let sizes: Vec<f64> = cell_reports[&(d, c, s)]
                                .iter()
                                .map(|r| r.get(Metric::SetSize))
                                .collect();
                            (clf.label().to_string(), sizes.iter().sum::<f64>() / sizes.len() as f64)
                        })
                        .collect(),
                })
                .collect();
            let plot = Lolliplot::new(&format!("{} set size", ds.name), panels)?;
            let prefix = format!("{}_all_all_lolliplot", ds.name);
            aggregates.push((format!("{prefix}.svg"), plot.to_svg().into_bytes()));
            aggregates.push((format!("{prefix}.csv"), plot.to_csv().into_bytes()));
        }
    }
    aggregates.push((
        HYPOTHESES.to_string(),
        hypotheses_json(&summary.hypotheses)?.into_bytes(),
    ));
    for (rel, bytes) in &aggregates {
        let hash = write_file(&dir, rel, bytes)?;
        manifest.outputs.insert(rel.clone(), hash);
        summary.files_written += 1;
    }
    let manifest_text = serde_json::to_string_pretty(&manifest)? + "\n";
    write_file(&dir, MANIFEST, manifest_text.as_bytes())?;
    log::info!(
        "{} cells computed, {} reused, {} files written to {}",
        summary.cells_computed,
        summary.cells_reused,
        summary.files_written,
        dir.display()
    );
    Ok(summary)
}

pub fn hypotheses_json(results: &[HypothesisResult]) -> Result<String> {
    Ok(serde_json::to_string_pretty(results)? + "\n")
}

/// Recomputes the hypothesis tests from the per-repetition files of a run.
pub fn hypotheses_from_run_dir(dir: &Path) -> Result<Vec<HypothesisResult>> {
    let manifest =
        Manifest::read(dir)?.ok_or_else(|| HarnessError::RunDir(format!("no {MANIFEST} in {}", dir.display())))?;
    // (dataset, classifier) in first-seen order
    let mut groups: Vec<((String, String), Vec<(StrategyKind, Vec<f64>)>)> = Vec::new();
    for cell in &manifest.cells {
        let prefix = cell_prefix(&cell.dataset, &cell.classifier, cell.strategy);
        let coverage: Vec<f64> = read_reps_csv(&dir.join(reps_file(&prefix)))?
            .iter()
            .map(|r| r.get(Metric::Coverage))
            .collect();
        let key = (cell.dataset.clone(), cell.classifier.clone());
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push((cell.strategy, coverage)),
            None => groups.push((key, vec![(cell.strategy, coverage)])),
        }
    }
    let mut out = Vec::new();
    for ((dataset, classifier), coverage) in groups {
        out.extend(test_hypotheses(&dataset, &classifier, &coverage)?);
    }
    Ok(out)
}
