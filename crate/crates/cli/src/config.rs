//! Declarative experiment configuration (TOML).

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use multiconf_core::ingest::{IngestFormat, IngestOptions};
use multiconf_core::viz::DEFAULT_MAX_SETS;
use multiconf_core::{ClassifierConfig, StrategyKind, SynthConfig};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

pub const DEFAULT_EPSILON: f64 = 0.05;
pub const DEFAULT_REPETITIONS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub output_dir: PathBuf,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_strategies")]
    pub strategies: Vec<StrategyKind>,
    pub datasets: Vec<DatasetSpec>,
    pub classifiers: Vec<ClassifierSpec>,
    #[serde(default)]
    pub viz: VizConfig,
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

fn default_repetitions() -> usize {
    DEFAULT_REPETITIONS
}

fn default_strategies() -> Vec<StrategyKind> {
    StrategyKind::ALL.to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    pub name: String,
    #[serde(default)]
    pub synth: Option<SynthConfig>,
    #[serde(default)]
    pub path: Option<PathBuf>,
    /// Extra sensor files for raw streams, joined with `path`.
    #[serde(default)]
    pub extra_paths: Vec<PathBuf>,
    #[serde(default)]
    pub format: Option<IngestFormat>,
    #[serde(default)]
    pub ingest: IngestOptions,
}

impl DatasetSpec {
    pub fn paths(&self) -> Vec<PathBuf> {
        self.path.iter().chain(&self.extra_paths).cloned().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSpec {
    /// Column name in tables and file names; defaults to the algorithm name.
    #[serde(default)]
    pub label: Option<String>,
    #[serde(flatten)]
    pub config: ClassifierConfig,
}

impl ClassifierSpec {
    pub fn label(&self) -> &str {
        self.label.as_deref().unwrap_or_else(|| self.config.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VizConfig {
    pub enabled: bool,
    pub cooccurrence: bool,
    pub graph: bool,
    pub zdcm: bool,
    pub confusion: bool,
    pub multiset: bool,
    pub boxplot: bool,
    pub lolliplot: bool,
    pub max_sets: usize,
}

impl Default for VizConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            cooccurrence: true,
            graph: true,
            zdcm: true,
            confusion: true,
            multiset: true,
            boxplot: true,
            lolliplot: true,
            max_sets: DEFAULT_MAX_SETS,
        }
    }
}

/// Command-line values that replace config keys.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub output_dir: Option<PathBuf>,
    pub epsilon: Option<f64>,
    pub repetitions: Option<usize>,
    pub base_seed: Option<u64>,
    pub strategies: Option<Vec<StrategyKind>>,
    pub no_viz: bool,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        Ok(cfg)
    }

    /// Reads a config file; relative dataset paths and `output_dir` are taken
    /// relative to the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.output_dir = join(base, &cfg.output_dir);
        for d in &mut cfg.datasets {
            d.path = d.path.as_ref().map(|p| join(base, p));
            d.extra_paths = d.extra_paths.iter().map(|p| join(base, p)).collect();
        }
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(dir) = &o.output_dir {
            self.output_dir = dir.clone();
        }
        if let Some(e) = o.epsilon {
            self.epsilon = e;
        }
        if let Some(r) = o.repetitions {
            self.repetitions = r;
        }
        if let Some(s) = o.base_seed {
            self.base_seed = s;
        }
        if let Some(s) = &o.strategies {
            self.strategies = s.clone();
        }
        if o.no_viz {
            self.viz.enabled = false;
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad(format!("epsilon must lie in (0, 1), got {}", self.epsilon));
        }
        if self.repetitions < 2 {
            return bad(format!("repetitions must be at least 2, got {}", self.repetitions));
        }
        if self.strategies.is_empty() || self.datasets.is_empty() || self.classifiers.is_empty() {
            return bad("strategies, datasets and classifiers must all be non-empty".into());
        }
        let mut seen = HashSet::new();
        for s in &self.strategies {
            if !seen.insert(*s) {
                return bad(format!("strategy {s} listed twice"));
            }
        }
        let mut names = HashSet::new();
        for d in &self.datasets {
            if !valid_name(&d.name) {
                return bad(format!("dataset name `{}` must be non-empty [A-Za-z0-9_.-]", d.name));
            }
            if !names.insert(d.name.as_str()) {
                return bad(format!("dataset `{}` listed twice", d.name));
            }
            match (&d.synth, &d.path) {
                (Some(_), None) => {
                    if !d.extra_paths.is_empty() || d.format.is_some() {
                        return bad(format!("dataset `{}`: synth takes no files or format", d.name));
                    }
                }
                (None, Some(_)) => {}
                _ => return bad(format!("dataset `{}` needs exactly one of `synth` or `path`", d.name)),
            }
        }
        let mut labels = HashSet::new();
        for c in &self.classifiers {
            if !valid_name(c.label()) {
                return bad(format!(
                    "classifier label `{}` must be non-empty [A-Za-z0-9_.-]",
                    c.label()
                ));
            }
            if !labels.insert(c.label()) {
                return bad(format!("classifier label `{}` used twice; set `label`", c.label()));
            }
        }
        if self.viz.max_sets == 0 {
            return bad("viz.max_sets must be positive".into());
        }
        Ok(())
    }
}

fn valid_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || "_.-".contains(c))
}

fn join(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
output_dir = "out"

[[datasets]]
name = "toy"
[datasets.synth]
user_shift = 1.5

[[classifiers]]
kind = "gnb"

[[classifiers]]
kind = "knn"
k = 3

[[classifiers]]
kind = "rf"
n_trees = 10
label = "rf10"
"#;

    #[test]
    fn defaults_fill_in() {
        let c = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(c.epsilon, 0.05);
        assert_eq!(c.repetitions, 20);
        assert_eq!(c.base_seed, 0);
        assert_eq!(c.strategies, StrategyKind::ALL.to_vec());
        assert_eq!(c.datasets[0].synth.as_ref().unwrap().user_shift, 1.5);
        assert_eq!(c.datasets[0].synth.as_ref().unwrap().n_users, 3);
        let labels: Vec<&str> = c.classifiers.iter().map(|c| c.label()).collect();
        assert_eq!(labels, ["gnb", "knn", "rf10"]);
        assert_eq!(c.classifiers[1].config, ClassifierConfig::Knn { k: 3 });
        match &c.classifiers[2].config {
            ClassifierConfig::Rf(f) => assert_eq!(f.n_trees, 10),
            other => panic!("{other:?}"),
        }
        assert_eq!(c.viz.max_sets, 20);
        c.validate().unwrap();
    }

    #[test]
    fn validation_errors() {
        let base = ExperimentConfig::from_toml(MINIMAL).unwrap();
        let mut c = base.clone();
        c.epsilon = 1.0;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.repetitions = 1;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.classifiers.push(c.classifiers[0].clone());
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.datasets[0].path = Some("x.csv".into());
        assert!(c.validate().is_err());
        let mut c = base;
        c.strategies = vec![StrategyKind::MM, StrategyKind::MM];
        assert!(c.validate().is_err());
    }

    #[test]
    fn overrides_replace_keys() {
        let mut c = ExperimentConfig::from_toml(MINIMAL).unwrap();
        c.apply(&Overrides {
            repetitions: Some(3),
            strategies: Some(vec![StrategyKind::UCM]),
            no_viz: true,
            ..Overrides::default()
        });
        assert_eq!(c.repetitions, 3);
        assert_eq!(c.strategies, vec![StrategyKind::UCM]);
        assert!(!c.viz.enabled);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ExperimentConfig::from_toml(&format!("epsilonn = 0.1\n{MINIMAL}")).is_err());
    }

    #[test]
    fn paths_resolve_against_config_dir() {
        let dir = tempfile::tempdir().unwrap();
        let text = "output_dir = \"runs\"\n[[datasets]]\nname = \"w\"\npath = \"data/w.csv\"\nformat = \"preprocessed\"\n[[classifiers]]\nkind = \"gnb\"\n";
        let file = dir.path().join("exp.toml");
        std::fs::write(&file, text).unwrap();
        let c = ExperimentConfig::load(&file).unwrap();
        assert_eq!(c.output_dir, dir.path().join("runs"));
        assert_eq!(c.datasets[0].path.as_ref().unwrap(), &dir.path().join("data/w.csv"));
        assert_eq!(c.datasets[0].format, Some(IngestFormat::Preprocessed));
    }
}
