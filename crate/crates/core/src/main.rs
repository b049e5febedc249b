//! Command-line interface for the combustion-stability pipeline.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use combustion_stability::classifier::{self, TrainConfig};
use combustion_stability::embedding;
use combustion_stability::error::{Error, Result};
use combustion_stability::pipeline::{
    self, ExtractionConfig, FeatureTable, ModelSuite,
};
use combustion_stability::rqa;
use combustion_stability::signal_io::{
    self, Label, SignalFormat, SynthKind, SynthSpec, TimeSeriesRecord, WindowSpec,
};
use combustion_stability::spectral;
use serde::Deserialize;

#[derive(Parser)]
#[command(
    name = "combustion-stability",
    about = "Classify combustor operating windows as stable or unstable from acoustic pressure signals",
    version
)]
struct Cli {
    /// TOML or JSON file with [extraction] and [train] sections.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the training/K-fold seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for window-parallel stages (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct InputArgs {
    /// Input signal file (.csv or raw little-endian f64).
    #[arg(long = "in")]
    input: PathBuf,

    /// Force the input format instead of guessing from the extension.
    #[arg(long, value_parser = parse_format)]
    format: Option<SignalFormat>,

    /// Sample rate in Hz (required for raw and single-column CSV input).
    #[arg(long)]
    rate: Option<f64>,
}

impl InputArgs {
    fn load(&self) -> Result<TimeSeriesRecord> {
        let format = self
            .format
            .unwrap_or_else(|| SignalFormat::from_path(&self.input));
        signal_io::load_timeseries(&self.input, format, self.rate)
    }
}

fn parse_format(s: &str) -> std::result::Result<SignalFormat, String> {
    match s {
        "csv" => Ok(SignalFormat::Csv),
        "raw_f64" | "raw" => Ok(SignalFormat::RawF64),
        other => Err(format!("unknown format '{other}' (csv, raw_f64)")),
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic stable or unstable pressure record.
    Synth {
        /// stable_noise | unstable_limit_cycle (or: stable | unstable).
        #[arg(long)]
        kind: String,
        #[arg(long, default_value_t = 2.0)]
        duration: f64,
        #[arg(long, default_value_t = 20000.0)]
        rate: f64,
        #[arg(long = "tone-freq", default_value_t = 146.0)]
        tone_freq: f64,
        #[arg(long = "tone-spl", default_value_t = 127.0)]
        tone_spl: f64,
        #[arg(long = "noise-floor-spl", default_value_t = 110.0)]
        noise_floor_spl: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output path; .csv writes CSV, anything else raw f64.
        #[arg(long)]
        out: PathBuf,
    },

    /// Compare a candidate sub-data length against the full record.
    ValidateSublength {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        length: usize,
    },

    /// Amplitude spectrum of one window as frequency_hz,amplitude_pa CSV.
    Spectrum {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long = "window-index", default_value_t = 0)]
        window_index: usize,
        #[arg(long = "band-lo", default_value_t = 50.0)]
        band_lo: f64,
        #[arg(long = "band-hi", default_value_t = 1000.0)]
        band_hi: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// AMI/FNN diagnostics of one window as JSON.
    EmbedDiagnostics {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long = "window-index", default_value_t = 0)]
        window_index: usize,
        #[arg(long = "max-lag")]
        max_lag: Option<usize>,
        #[arg(long)]
        bins: Option<usize>,
        #[arg(long)]
        rt: Option<f64>,
        #[arg(long)]
        cutoff: Option<f64>,
    },

    /// Recurrence quantification of one window as JSON.
    Rqa {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long = "window-index", default_value_t = 0)]
        window_index: usize,
        #[arg(long = "eps-fraction")]
        eps_fraction: Option<f64>,
        #[arg(long)]
        hmin: Option<usize>,
        /// Also emit the matrix as run-length-encoded column text.
        #[arg(long = "dump-matrix")]
        dump_matrix: bool,
    },

    /// Fractal dimension and Hurst exponent of one window as JSON.
    Complexity {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long = "window-index", default_value_t = 0)]
        window_index: usize,
    },

    /// Extract the six features for every sliding window into a CSV table.
    Extract {
        #[command(flatten)]
        input: InputArgs,
        /// Label to stamp on every row (stable | unstable); synthetic
        /// records carry their own label when omitted.
        #[arg(long)]
        label: Option<Label>,
        /// Equivalence ratio recorded as the condition, if known.
        #[arg(long)]
        condition: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },

    /// Train the three feature-pair models on labeled feature tables.
    Train {
        /// Feature table CSVs (repeatable).
        #[arg(long = "table", required = true)]
        tables: Vec<PathBuf>,
        /// Train a single tree over these comma-separated features
        /// instead of the three-model suite.
        #[arg(long)]
        features: Option<String>,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long)]
        out: PathBuf,
    },

    /// Stratified K-fold validation report for the three models.
    Validate {
        #[arg(long = "table", required = true)]
        tables: Vec<PathBuf>,
        #[arg(long, default_value_t = 5)]
        k: usize,
    },

    /// Per-window verdicts of a trained suite over a feature table.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        table: PathBuf,
    },

    /// Accuracy report of a trained suite over a labeled feature table.
    Report {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        table: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Emit human-readable text instead of JSON.
        #[arg(long)]
        text: bool,
    },

    /// Decision-boundary lattice of one model as x,y,label CSV.
    Boundary {
        #[arg(long)]
        model: PathBuf,
        /// model1 | model2 | model3.
        #[arg(long, default_value = "model1")]
        which: String,
        /// x0,x1,y0,y1.
        #[arg(long)]
        bounds: String,
        #[arg(long, default_value_t = 100)]
        resolution: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Export plot data (feature traces + per-model scatter CSVs).
    Export {
        #[arg(long)]
        table: PathBuf,
        #[arg(long = "out-dir")]
        out_dir: PathBuf,
    },
}

#[derive(Debug, Default, Deserialize)]
#[serde(default)]
struct FileConfig {
    extraction: ExtractionConfig,
    train: TrainConfig,
}

fn load_config(path: Option<&Path>) -> Result<FileConfig> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let is_json = path.extension().and_then(|e| e.to_str()) == Some("json");
    if is_json {
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("bad JSON config: {e}")))
    } else {
        toml::from_str(&text).map_err(|e| Error::Parse(format!("bad TOML config: {e}")))
    }
}

fn write_or_print(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, content).map_err(|e| Error::io(path, e)),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn window_of<'a>(
    record: &'a TimeSeriesRecord,
    spec: &WindowSpec,
    index: usize,
) -> Result<&'a [f64]> {
    let windows = signal_io::slide_windows(record, spec)?;
    windows
        .get(index)
        .map(|w| w.samples)
        .ok_or_else(|| {
            Error::Invalid(format!(
                "window index {index} out of range (record has {} windows)",
                windows.len()
            ))
        })
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = load_config(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        cfg.train.seed = seed;
    }
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::Invalid(format!("cannot configure thread pool: {e}")))?;
    }

    match cli.command {
        Command::Synth {
            kind,
            duration,
            rate,
            tone_freq,
            tone_spl,
            noise_floor_spl,
            seed,
            out,
        } => {
            let kind = match kind.as_str() {
                "stable" | "stable_noise" => SynthKind::StableNoise,
                "unstable" | "unstable_limit_cycle" => SynthKind::UnstableLimitCycle,
                other => {
                    return Err(Error::Invalid(format!("unknown synth kind '{other}'")))
                }
            };
            let record = signal_io::synthesize_signal(&SynthSpec {
                kind,
                duration_s: duration,
                sample_rate: rate,
                tone_frequency: tone_freq,
                tone_spl,
                noise_floor_spl,
                seed,
            })?;
            let format = SignalFormat::from_path(&out);
            signal_io::save_timeseries(&record, &out, format)?;
            eprintln!(
                "wrote {} samples ({}) to {}",
                record.len(),
                record.label.map(|l| l.as_str()).unwrap_or("unlabeled"),
                out.display()
            );
        }

        Command::ValidateSublength { input, length } => {
            let record = input.load()?;
            let report = signal_io::validate_sub_length(&record, length)?;
            println!("{}", serde_json::to_string_pretty(&report).unwrap());
        }

        Command::Spectrum {
            input,
            window_index,
            band_lo,
            band_hi,
            out,
        } => {
            let record = input.load()?;
            let window = window_of(&record, &cfg.extraction.window, window_index)?;
            let spectrum = spectral::amplitude_spectrum(window, record.sample_rate)?;
            let peak = spectral::dominant_frequency(&spectrum, (band_lo, band_hi))?;
            eprintln!(
                "f_dom = {} Hz, amplitude = {} Pa, spl = {} dB",
                peak.f_dom, peak.amplitude, peak.spl
            );
            write_or_print(out.as_deref(), &pipeline::spectrum_to_csv(&spectrum))?;
        }

        Command::EmbedDiagnostics {
            input,
            window_index,
            max_lag,
            bins,
            rt,
            cutoff,
        } => {
            let record = input.load()?;
            let window = window_of(&record, &cfg.extraction.window, window_index)?;
            let params = embedding::select_embedding(
                window,
                max_lag.unwrap_or(cfg.extraction.max_lag),
                bins.unwrap_or(cfg.extraction.ami_bins),
                rt.unwrap_or(cfg.extraction.r_threshold),
                cutoff.unwrap_or(cfg.extraction.fnn_cutoff),
                cfg.extraction.d_max,
            )?;
            println!("{}", serde_json::to_string_pretty(&params).unwrap());
        }

        Command::Rqa {
            input,
            window_index,
            eps_fraction,
            hmin,
            dump_matrix,
        } => {
            let record = input.load()?;
            let window = window_of(&record, &cfg.extraction.window, window_index)?;
            let params = embedding::select_embedding(
                window,
                cfg.extraction.max_lag,
                cfg.extraction.ami_bins,
                cfg.extraction.r_threshold,
                cfg.extraction.fnn_cutoff,
                cfg.extraction.d_max,
            )?;
            let trajectory = embedding::embed(window, params.tau, params.dim)?;
            let epsilon = rqa::epsilon_from_diameter(
                &trajectory,
                eps_fraction.unwrap_or(cfg.extraction.eps_fraction),
            )?;
            let matrix = rqa::recurrence_matrix(&trajectory, epsilon)?;
            let hist = rqa::vertical_line_histogram(&matrix);
            let h_min = hmin.unwrap_or(cfg.extraction.h_min);
            let lam = rqa::laminarity(&hist, h_min)?;
            let tt = rqa::trapping_time(&hist, h_min)?;
            println!(
                "{}",
                serde_json::json!({
                    "epsilon": epsilon,
                    "recurrence_rate": matrix.recurrence_rate,
                    "lam": lam,
                    "tt": tt,
                })
            );
            if dump_matrix {
                // One line per column: alternating run lengths, starting
                // with a zero-run (possibly empty).
                for j in 0..matrix.size {
                    let mut runs: Vec<usize> = Vec::new();
                    let mut current = false;
                    let mut run = 0usize;
                    for bit in matrix.column(j) {
                        if bit == current {
                            run += 1;
                        } else {
                            runs.push(run);
                            current = bit;
                            run = 1;
                        }
                    }
                    runs.push(run);
                    let text: Vec<String> = runs.iter().map(|r| r.to_string()).collect();
                    println!("{}", text.join(","));
                }
            }
        }

        Command::Complexity {
            input,
            window_index,
        } => {
            let record = input.load()?;
            let window = window_of(&record, &cfg.extraction.window, window_index)?;
            let fd = complexity_json(window)?;
            println!("{fd}");
        }

        Command::Extract {
            input,
            label,
            condition,
            out,
        } => {
            let mut record = input.load()?;
            if label.is_some() {
                record.label = label;
            }
            record.condition = condition;
            let table = pipeline::extract_features(&record, &cfg.extraction)?;
            pipeline::save_feature_table(&table, &out)?;
            eprintln!("wrote {} feature rows to {}", table.rows.len(), out.display());
        }

        Command::Train {
            tables,
            features,
            k,
            out,
        } => {
            let loaded = load_tables(&tables, &cfg.extraction)?;
            match features {
                Some(list) => {
                    let names: Vec<&str> = list.split(',').map(str::trim).collect();
                    let samples: Vec<_> =
                        loaded.iter().flat_map(|t| t.labeled_samples()).collect();
                    let tree = classifier::train(&samples, &names, &cfg.train)?;
                    let report = classifier::kfold_validate(&samples, &names, &cfg.train, k)?;
                    std::fs::write(&out, tree.to_json()).map_err(|e| Error::io(&out, e))?;
                    eprintln!("{}", serde_json::to_string_pretty(&report).unwrap());
                }
                None => {
                    let refs: Vec<&FeatureTable> = loaded.iter().collect();
                    let suite = pipeline::train_models(&refs, &cfg.train, k)?;
                    suite.save(&out)?;
                    for (name, report) in &suite.fold_reports {
                        eprintln!(
                            "{name}: mean train acc {:.4}, k-fold test acc {:.4}",
                            report.mean_train_accuracy, report.test_accuracy
                        );
                    }
                }
            }
        }

        Command::Validate { tables, k } => {
            let loaded = load_tables(&tables, &cfg.extraction)?;
            let samples: Vec<_> = loaded.iter().flat_map(|t| t.labeled_samples()).collect();
            let mut out = serde_json::Map::new();
            for (name, pair) in pipeline::MODEL_FEATURE_PAIRS {
                let features: Vec<&str> = pair.to_vec();
                let report = classifier::kfold_validate(&samples, &features, &cfg.train, k)?;
                out.insert(name.to_string(), serde_json::to_value(&report).unwrap());
            }
            println!(
                "{}",
                serde_json::to_string_pretty(&serde_json::Value::Object(out)).unwrap()
            );
        }

        Command::Predict { model, table } => {
            let suite = ModelSuite::load(&model)?;
            let table = pipeline::load_feature_table(&table, cfg.extraction.clone())?;
            let report = pipeline::classify_report(&suite, &table)?;
            let mut names: Vec<&String> = suite.models.keys().collect();
            names.sort();
            println!(
                "source_id,window_start,{}",
                names
                    .iter()
                    .map(|n| n.as_str())
                    .collect::<Vec<_>>()
                    .join(",")
            );
            for v in &report.verdicts {
                let preds: Vec<String> = names
                    .iter()
                    .map(|n| v.predictions[*n].code().to_string())
                    .collect();
                println!("{},{},{}", v.source_id, v.window_start, preds.join(","));
            }
        }

        Command::Report {
            model,
            table,
            out,
            text,
        } => {
            let suite = ModelSuite::load(&model)?;
            let table = pipeline::load_feature_table(&table, cfg.extraction.clone())?;
            let report = pipeline::classify_report(&suite, &table)?;
            let content = if text {
                report.to_text()
            } else {
                report.to_json()
            };
            write_or_print(out.as_deref(), &content)?;
        }

        Command::Boundary {
            model,
            which,
            bounds,
            resolution,
            out,
        } => {
            let suite = ModelSuite::load(&model)?;
            let tree = suite.model(&which)?;
            let pair = pipeline::MODEL_FEATURE_PAIRS
                .iter()
                .find(|(name, _)| *name == which)
                .map(|(_, pair)| (pair[0], pair[1]))
                .ok_or_else(|| Error::Invalid(format!("unknown model '{which}'")))?;
            let parts: Vec<f64> = bounds
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse()
                        .map_err(|_| Error::Invalid(format!("bad bounds component '{s}'")))
                })
                .collect::<Result<_>>()?;
            if parts.len() != 4 {
                return Err(Error::Invalid("bounds must be x0,x1,y0,y1".into()));
            }
            let bounds = ((parts[0], parts[1]), (parts[2], parts[3]));
            let grid = classifier::decision_boundary_grid(tree, pair, bounds, resolution)?;
            write_or_print(
                out.as_deref(),
                &pipeline::boundary_grid_csv(&grid, bounds, resolution),
            )?;
        }

        Command::Export { table, out_dir } => {
            let table = pipeline::load_feature_table(&table, cfg.extraction.clone())?;
            std::fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;
            let traces = out_dir.join("feature_traces.csv");
            std::fs::write(&traces, pipeline::feature_traces_csv(&table))
                .map_err(|e| Error::io(&traces, e))?;
            for (name, pair) in pipeline::MODEL_FEATURE_PAIRS {
                let path = out_dir.join(format!("scatter_{name}.csv"));
                std::fs::write(&path, pipeline::scatter_csv(&table, (pair[0], pair[1])))
                    .map_err(|e| Error::io(&path, e))?;
            }
            eprintln!("exported plot data to {}", out_dir.display());
        }
    }
    Ok(())
}

fn complexity_json(window: &[f64]) -> Result<String> {
    let fd = combustion_stability::complexity::box_counting_dimension(window)?;
    let hurst = combustion_stability::complexity::hurst_exponent(window)?;
    Ok(serde_json::json!({
        "fd": fd.fd,
        "fd_clamped": fd.clamped,
        "fd_fit": fd.fit,
        "hurst": hurst.h,
        "hurst_clamped": hurst.clamped,
        "hurst_fit": hurst.fit,
    })
    .to_string())
}

fn load_tables(paths: &[PathBuf], config: &ExtractionConfig) -> Result<Vec<FeatureTable>> {
    paths
        .iter()
        .map(|p| pipeline::load_feature_table(p, config.clone()))
        .collect()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version; usage mistakes exit 1.
            let is_help = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return if is_help {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
