use std::fs::{self, File};
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use multiconf_cli::charts::{render_charts, Chart};
use multiconf_cli::harness::{hypotheses_from_run_dir, hypotheses_json};
use multiconf_cli::{run_experiment, ExperimentConfig, HarnessError, Overrides};
use multiconf_core::conformal::RecordLog;
use multiconf_core::ingest::{ingest, write_preprocessed, IngestFormat, IngestOptions};
use multiconf_core::synth::generate;
use multiconf_core::viz::DEFAULT_MAX_SETS;
use multiconf_core::{StrategyKind, SynthConfig};

const LOG_ENV: &str = "MULTICONF_LOG";

#[derive(Parser)]
#[command(
    name = "multiconf",
    version,
    about = "Conformal classification under multi-user evaluation strategies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the repetition grid described by a TOML config.
    Run {
        config: PathBuf,
        #[arg(long)]
        output_dir: Option<PathBuf>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        repetitions: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated subset of MM,UDM,UIM,UCM.
        #[arg(long, value_delimiter = ',')]
        strategies: Option<Vec<StrategyKind>>,
        #[arg(long)]
        no_viz: bool,
        /// Recompute every cell even if earlier outputs match.
        #[arg(long)]
        force: bool,
    },
    /// Read a dataset, apply the ingestion filters and write preprocessed CSV.
    Ingest {
        /// One file, or one file per sensor for raw streams.
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = FormatArg::Preprocessed)]
        format: FormatArg,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 150)]
        window_len: usize,
        #[arg(long, default_value_t = 10)]
        filter_width: usize,
        #[arg(long, default_value_t = 5)]
        min_per_user_class: usize,
    },
    /// Generate a synthetic multi-user dataset as preprocessed CSV.
    Synth {
        #[arg(long, default_value_t = 3)]
        users: usize,
        #[arg(long, default_value_t = 4)]
        classes: usize,
        #[arg(long, default_value_t = 40)]
        per_class: usize,
        #[arg(long, default_value_t = 2)]
        dims: usize,
        #[arg(long, default_value_t = 0.0)]
        shift: f64,
        #[arg(long, default_value_t = 0.5)]
        noise: f64,
        #[arg(long)]
        spread: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render set charts from a records CSV.
    Viz {
        records: PathBuf,
        #[arg(long, value_enum, value_delimiter = ',', default_value = "all")]
        chart: Vec<ChartArg>,
        /// Defaults to the records file's directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_MAX_SETS)]
        max_sets: usize,
    },
    /// Recompute the strategy coverage tests of a finished run.
    Hypotheses {
        run_dir: PathBuf,
        /// Write JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Preprocessed,
    RawStream,
}

impl From<FormatArg> for IngestFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Preprocessed => IngestFormat::Preprocessed,
            FormatArg::RawStream => IngestFormat::RawStream,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ChartArg {
    All,
    Cooc,
    Coocgraph,
    Zdcm,
    Cm,
    Multiset,
}

fn charts(args: &[ChartArg]) -> Vec<Chart> {
    if args.contains(&ChartArg::All) {
        return Chart::ALL.to_vec();
    }
    Chart::ALL
        .into_iter()
        .filter(|c| {
            args.iter().any(|a| match a {
                ChartArg::Cooc => *c == Chart::Cooccurrence,
                ChartArg::Coocgraph => *c == Chart::Graph,
                ChartArg::Zdcm => *c == Chart::Zdcm,
                ChartArg::Cm => *c == Chart::Confusion,
                ChartArg::Multiset => *c == Chart::Multiset,
                ChartArg::All => true,
            })
        })
        .collect()
}

fn create(path: &PathBuf) -> Result<BufWriter<File>, HarnessError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| HarnessError::io(parent, e))?;
    }
    Ok(BufWriter::new(
        File::create(path).map_err(|e| HarnessError::io(path, e))?,
    ))
}

fn execute(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Run {
            config,
            output_dir,
            epsilon,
            repetitions,
            seed,
            strategies,
            no_viz,
            force,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            cfg.apply(&Overrides {
                output_dir,
                epsilon,
                repetitions,
                base_seed: seed,
                strategies,
                no_viz,
            });
            let summary = run_experiment(&cfg, force)?;
            println!(
                "{} cells computed, {} reused; results in {}",
                summary.cells_computed,
                summary.cells_reused,
                summary.output_dir.display()
            );
            for h in &summary.hypotheses {
                println!(
                    "{} {} {} vs {}: coverage {:.4} vs {:.4}, p={:.3e} {}",
                    h.dataset, h.classifier, h.a, h.b, h.mean_a, h.mean_b, h.p, h.stars
                );
            }
        }
        Command::Ingest {
            paths,
            format,
            out,
            window_len,
            filter_width,
            min_per_user_class,
        } => {
            let opts = IngestOptions {
                window_len,
                filter_width,
                min_per_user_class,
            };
            let data = ingest(&paths, format.into(), &opts)?;
            write_preprocessed(&data, create(&out)?)?;
            println!(
                "{} rows, {} users, {} classes, {} features -> {}",
                data.n_rows(),
                data.n_users(),
                data.n_classes(),
                data.n_features(),
                out.display()
            );
        }
        Command::Synth {
            users,
            classes,
            per_class,
            dims,
            shift,
            noise,
            spread,
            seed,
            out,
        } => {
            let cfg = SynthConfig {
                n_users: users,
                n_classes: classes,
                per_user_per_class: per_class,
                dims,
                user_shift: shift,
                noise,
                spread,
                seed,
            };
            let data = generate(&cfg)?;
            write_preprocessed(&data, create(&out)?)?;
            println!("{} rows -> {}", data.n_rows(), out.display());
        }
        Command::Viz {
            records,
            chart,
            out,
            max_sets,
        } => {
            let file = File::open(&records).map_err(|e| HarnessError::io(&records, e))?;
            let log = RecordLog::read_csv(file)?;
            let dir = out.unwrap_or_else(|| records.parent().map(PathBuf::from).unwrap_or_default());
            fs::create_dir_all(&dir).map_err(|e| HarnessError::io(&dir, e))?;
            let stem = records.file_stem().and_then(|s| s.to_str()).unwrap_or("records");
            for (suffix, bytes) in render_charts(&log.records, &log.class_names, &charts(&chart), max_sets) {
                let path = dir.join(format!("{stem}_{suffix}"));
                fs::write(&path, bytes).map_err(|e| HarnessError::io(&path, e))?;
                println!("{}", path.display());
            }
        }
        Command::Hypotheses { run_dir, out } => {
            let json = hypotheses_json(&hypotheses_from_run_dir(&run_dir)?)?;
            match out {
                Some(path) => fs::write(&path, json).map_err(|e| HarnessError::io(&path, e))?,
                None => print!("{json}"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or(LOG_ENV, "warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::FAILURE
        }
    }
}
