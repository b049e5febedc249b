//! End-to-end orchestration: per-window feature extraction, the three
//! two-feature models, reports, and plot-data export.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::{
    self, Confusion, DecisionTree, FoldReport, LabeledSample, TrainConfig,
};
use crate::complexity;
use crate::embedding::{self, EmbeddingParams};
use crate::error::{Error, Result};
use crate::rqa;
use crate::signal_io::{slide_windows, Label, TimeSeriesRecord, WindowSpec};
use crate::spectral;

/// Whether delay/dimension selection runs once per record or per window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TauPolicy {
    /// Select τ and d once on the leading window-length slice of the
    /// record and reuse them for every window.
    PerRecord,
    /// Select τ and d independently inside each window.
    PerWindow,
}

/// Everything feature extraction needs; a snapshot of this plus the
/// record reproduces a feature table bit-exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExtractionConfig {
    pub window: WindowSpec,
    /// Recurrence threshold as a fraction of the attractor diameter.
    pub eps_fraction: f64,
    /// Minimum vertical line length for TT and LAM.
    pub h_min: usize,
    /// AMI histogram bins.
    pub ami_bins: usize,
    /// Largest delay examined by the AMI search.
    pub max_lag: usize,
    /// FNN distance-ratio threshold.
    pub r_threshold: f64,
    /// FNN fraction below which a dimension is accepted.
    pub fnn_cutoff: f64,
    /// Largest embedding dimension examined.
    pub d_max: usize,
    /// Dominant-peak search band, Hz.
    pub peak_band: (f64, f64),
    /// SNR noise band, Hz.
    pub noise_band: (f64, f64),
    pub tau_policy: TauPolicy,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        ExtractionConfig {
            window: WindowSpec::default(),
            eps_fraction: 0.1,
            h_min: 2,
            ami_bins: 64,
            max_lag: 100,
            r_threshold: 10.0,
            fnn_cutoff: 0.01,
            d_max: 10,
            peak_band: (50.0, 1000.0),
            noise_band: (500.0, 600.0),
            tau_policy: TauPolicy::PerRecord,
        }
    }
}

/// Per-row quality flags, serialized as `;`-joined tokens in a fixed
/// order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RowFlags {
    pub tau_flagged: bool,
    pub dim_flagged: bool,
    pub snr_degenerate: bool,
    pub fd_clamped: bool,
    pub hurst_clamped: bool,
    pub hurst_degenerate: bool,
    pub tt_no_lines: bool,
    pub rqa_degenerate: bool,
}

type FlagToken = (&'static str, fn(&RowFlags) -> bool);

impl RowFlags {
    const TOKENS: [FlagToken; 8] = [
        ("tau_flagged", |f| f.tau_flagged),
        ("dim_flagged", |f| f.dim_flagged),
        ("snr_degenerate", |f| f.snr_degenerate),
        ("fd_clamped", |f| f.fd_clamped),
        ("hurst_clamped", |f| f.hurst_clamped),
        ("hurst_degenerate", |f| f.hurst_degenerate),
        ("tt_no_lines", |f| f.tt_no_lines),
        ("rqa_degenerate", |f| f.rqa_degenerate),
    ];

    pub fn any(&self) -> bool {
        Self::TOKENS.iter().any(|(_, get)| get(self))
    }

    pub fn encode(&self) -> String {
        Self::TOKENS
            .iter()
            .filter(|(_, get)| get(self))
            .map(|(name, _)| *name)
            .collect::<Vec<_>>()
            .join(";")
    }

    pub fn decode(text: &str) -> Result<RowFlags> {
        let mut flags = RowFlags::default();
        for token in text.split(';').filter(|t| !t.is_empty()) {
            match token {
                "tau_flagged" => flags.tau_flagged = true,
                "dim_flagged" => flags.dim_flagged = true,
                "snr_degenerate" => flags.snr_degenerate = true,
                "fd_clamped" => flags.fd_clamped = true,
                "hurst_clamped" => flags.hurst_clamped = true,
                "hurst_degenerate" => flags.hurst_degenerate = true,
                "tt_no_lines" => flags.tt_no_lines = true,
                "rqa_degenerate" => flags.rqa_degenerate = true,
                other => return Err(Error::Parse(format!("unknown flag '{other}'"))),
            }
        }
        Ok(flags)
    }
}

/// The six features of one window plus provenance and quality flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub source_id: String,
    pub window_start: usize,
    pub rms: f64,
    pub snr: f64,
    pub hurst: f64,
    pub fd: f64,
    pub lam: f64,
    pub tt: f64,
    pub label: Option<Label>,
    pub flags: RowFlags,
}

impl FeatureRow {
    pub fn feature_map(&self) -> BTreeMap<String, f64> {
        [
            ("rms", self.rms),
            ("snr", self.snr),
            ("hurst", self.hurst),
            ("fd", self.fd),
            ("lam", self.lam),
            ("tt", self.tt),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }

    pub fn to_labeled_sample(&self) -> Option<LabeledSample> {
        Some(LabeledSample {
            features: self.feature_map(),
            label: self.label?,
            source_id: self.source_id.clone(),
            window_start: self.window_start,
        })
    }
}

/// Extracted features for every window of a record, with the config that
/// produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureTable {
    pub rows: Vec<FeatureRow>,
    pub config: ExtractionConfig,
}

impl FeatureTable {
    pub fn labeled_samples(&self) -> Vec<LabeledSample> {
        self.rows
            .iter()
            .filter_map(FeatureRow::to_labeled_sample)
            .collect()
    }

    /// Drop rows carrying any quality flag.
    pub fn without_flagged(&self) -> FeatureTable {
        FeatureTable {
            rows: self
                .rows
                .iter()
                .filter(|r| !r.flags.any())
                .cloned()
                .collect(),
            config: self.config.clone(),
        }
    }
}

pub const FEATURE_CSV_HEADER: &str =
    "source_id,window_start,rms,snr,hurst,fd,lam,tt,label,flags";

/// Serialize a feature table to CSV. Deterministic: identical tables
/// produce identical bytes.
pub fn feature_table_to_csv(table: &FeatureTable) -> String {
    let mut out = String::from(FEATURE_CSV_HEADER);
    out.push('\n');
    for r in &table.rows {
        let label = r.label.map(|l| l.code().to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.source_id,
            r.window_start,
            r.rms,
            r.snr,
            r.hurst,
            r.fd,
            r.lam,
            r.tt,
            label,
            r.flags.encode()
        )
        .unwrap();
    }
    out
}

pub fn save_feature_table(table: &FeatureTable, path: &Path) -> Result<()> {
    fs::write(path, feature_table_to_csv(table)).map_err(|e| Error::io(path, e))
}

/// Parse a feature-table CSV written by [`feature_table_to_csv`]. The
/// config snapshot is not stored in the CSV; the caller supplies it (or
/// defaults) when it matters.
pub fn load_feature_table(path: &Path, config: ExtractionConfig) -> Result<FeatureTable> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_feature_csv(&text, config)
}

pub fn parse_feature_csv(text: &str, config: ExtractionConfig) -> Result<FeatureTable> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == FEATURE_CSV_HEADER => {}
        other => {
            return Err(Error::Parse(format!(
                "bad feature CSV header: {:?}",
                other.unwrap_or("")
            )))
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 10 {
            return Err(Error::Parse(format!(
                "row {i}: expected 10 fields, got {}",
                f.len()
            )));
        }
        let num = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::Parse(format!("row {i}: bad number '{s}'")))
        };
        let label = if f[8].is_empty() {
            None
        } else {
            Some(Label::from_code(f[8].parse().map_err(|_| {
                Error::Parse(format!("row {i}: bad label '{}'", f[8]))
            })?)?)
        };
        rows.push(FeatureRow {
            source_id: f[0].to_string(),
            window_start: f[1]
                .parse()
                .map_err(|_| Error::Parse(format!("row {i}: bad window start '{}'", f[1])))?,
            rms: num(f[2])?,
            snr: num(f[3])?,
            hurst: num(f[4])?,
            fd: num(f[5])?,
            lam: num(f[6])?,
            tt: num(f[7])?,
            label,
            flags: RowFlags::decode(f[9])?,
        });
    }
    Ok(FeatureTable { rows, config })
}

/// Select τ and d for a record under the per-record policy: diagnostics
/// run on the leading window-length slice so their cost matches one
/// window regardless of record length.
pub fn record_embedding_params(
    record: &TimeSeriesRecord,
    config: &ExtractionConfig,
) -> Result<EmbeddingParams> {
    let slice_len = config.window.length.min(record.len());
    embedding::select_embedding(
        &record.samples[..slice_len],
        config.max_lag,
        config.ami_bins,
        config.r_threshold,
        config.fnn_cutoff,
        config.d_max,
    )
}

/// Extract all six features for every sliding window of a record.
/// Windows that hit numeric degeneracy produce flagged rows instead of
/// aborting the table.
pub fn extract_features(
    record: &TimeSeriesRecord,
    config: &ExtractionConfig,
) -> Result<FeatureTable> {
    let windows = slide_windows(record, &config.window)?;
    let record_params = match config.tau_policy {
        TauPolicy::PerRecord => Some(record_embedding_params(record, config)?),
        TauPolicy::PerWindow => None,
    };

    let rows: Vec<FeatureRow> = windows
        .par_iter()
        .map(|w| extract_window_row(record, w.start, w.samples, config, record_params.as_ref()))
        .collect::<Result<_>>()?;

    Ok(FeatureTable {
        rows,
        config: config.clone(),
    })
}

fn extract_window_row(
    record: &TimeSeriesRecord,
    start: usize,
    window: &[f64],
    config: &ExtractionConfig,
    record_params: Option<&EmbeddingParams>,
) -> Result<FeatureRow> {
    let mut flags = RowFlags::default();

    let rms = spectral::rms(window)?;

    let spectrum = spectral::amplitude_spectrum(window, record.sample_rate)?;
    let snr = match spectral::dominant_frequency(&spectrum, config.peak_band)
        .and_then(|peak| spectral::snr(&spectrum, &peak, config.noise_band))
    {
        Ok(v) => v,
        Err(Error::Degenerate(_)) => {
            flags.snr_degenerate = true;
            0.0
        }
        Err(e) => return Err(e),
    };

    let fd = match complexity::box_counting_dimension(window) {
        Ok(est) => {
            flags.fd_clamped = est.clamped;
            est.fd
        }
        Err(Error::Degenerate(_)) => {
            flags.rqa_degenerate = true;
            1.0
        }
        Err(e) => return Err(e),
    };

    let hurst = match complexity::hurst_exponent(window) {
        Ok(est) => {
            flags.hurst_clamped = est.clamped;
            est.h
        }
        Err(Error::Degenerate(_)) => {
            flags.hurst_degenerate = true;
            0.0
        }
        Err(e) => return Err(e),
    };

    let params_storage;
    let params = match record_params {
        Some(p) => p,
        None => {
            params_storage = embedding::select_embedding(
                window,
                config.max_lag,
                config.ami_bins,
                config.r_threshold,
                config.fnn_cutoff,
                config.d_max,
            )?;
            &params_storage
        }
    };
    flags.tau_flagged = params.tau_flagged;
    flags.dim_flagged = params.dim_flagged;

    let (lam, tt) = match rqa_features(window, params, config, &mut flags) {
        Ok(pair) => pair,
        Err(Error::Degenerate(_)) | Err(Error::Invalid(_)) => {
            flags.rqa_degenerate = true;
            (0.0, 0.0)
        }
        Err(e) => return Err(e),
    };

    Ok(FeatureRow {
        source_id: record.source_id.clone(),
        window_start: start,
        rms,
        snr,
        hurst,
        fd,
        lam,
        tt,
        label: record.label,
        flags,
    })
}

fn rqa_features(
    window: &[f64],
    params: &EmbeddingParams,
    config: &ExtractionConfig,
    flags: &mut RowFlags,
) -> Result<(f64, f64)> {
    let trajectory = embedding::embed(window, params.tau, params.dim)?;
    let epsilon = rqa::epsilon_from_diameter(&trajectory, config.eps_fraction)?;
    let matrix = rqa::recurrence_matrix(&trajectory, epsilon)?;
    let hist = rqa::vertical_line_histogram(&matrix);
    let lam = rqa::laminarity(&hist, config.h_min)?;
    let tt = match rqa::trapping_time(&hist, config.h_min)? {
        Some(v) => v,
        None => {
            flags.tt_no_lines = true;
            0.0
        }
    };
    Ok((lam, tt))
}

/// The three two-feature decision trees of the reference analysis.
pub const MODEL_FEATURE_PAIRS: [(&str, [&str; 2]); 3] = [
    ("model1", ["rms", "snr"]),
    ("model2", ["hurst", "fd"]),
    ("model3", ["lam", "tt"]),
];

/// The three trained models with their K-fold reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSuite {
    pub schema_version: u32,
    pub models: BTreeMap<String, DecisionTree>,
    pub fold_reports: BTreeMap<String, FoldReport>,
}

impl ModelSuite {
    pub fn model(&self, name: &str) -> Result<&DecisionTree> {
        self.models
            .get(name)
            .ok_or_else(|| Error::Invalid(format!("no model named '{name}'")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("suite serialization cannot fail")
    }

    pub fn from_json(json: &str) -> Result<Self> {
        serde_json::from_str(json).map_err(|e| Error::Parse(format!("bad model suite JSON: {e}")))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Train the three feature-pair models on the pooled labeled rows of the
/// given tables, with a stratified K-fold report per model.
pub fn train_models(
    tables: &[&FeatureTable],
    config: &TrainConfig,
    k: usize,
) -> Result<ModelSuite> {
    let samples: Vec<LabeledSample> = tables
        .iter()
        .flat_map(|t| t.labeled_samples())
        .collect();
    if samples.is_empty() {
        return Err(Error::Invalid("no labeled rows to train on".into()));
    }
    let has_stable = samples.iter().any(|s| s.label == Label::Stable);
    let has_unstable = samples.iter().any(|s| s.label == Label::Unstable);
    if !has_stable || !has_unstable {
        return Err(Error::Invalid(
            "training data must contain both classes".into(),
        ));
    }
    let mut models = BTreeMap::new();
    let mut fold_reports = BTreeMap::new();
    for (name, pair) in MODEL_FEATURE_PAIRS {
        let features: Vec<&str> = pair.to_vec();
        let tree = classifier::train(&samples, &features, config)?;
        let report = classifier::kfold_validate(&samples, &features, config, k)?;
        models.insert(name.to_string(), tree);
        fold_reports.insert(name.to_string(), report);
    }
    Ok(ModelSuite {
        schema_version: 1,
        models,
        fold_reports,
    })
}

/// Per-model accuracy on a table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelAccuracy {
    pub accuracy: f64,
    pub confusion: Confusion,
}

/// Per-window verdicts plus per-model accuracy over the labeled rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassifyReport {
    /// Model name -> accuracy over labeled rows (absent when the table
    /// has no labels).
    pub model_accuracy: BTreeMap<String, ModelAccuracy>,
    /// One entry per row: (source_id, window_start, model name -> label).
    pub verdicts: Vec<WindowVerdict>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WindowVerdict {
    pub source_id: String,
    pub window_start: usize,
    pub predictions: BTreeMap<String, Label>,
    pub actual: Option<Label>,
}

impl ClassifyReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (name, acc) in &self.model_accuracy {
            writeln!(
                out,
                "{name}: accuracy {:.4} (tp {} tn {} fp {} fn {})",
                acc.accuracy, acc.confusion.tp, acc.confusion.tn, acc.confusion.fp,
                acc.confusion.fn_
            )
            .unwrap();
        }
        writeln!(out, "windows: {}", self.verdicts.len()).unwrap();
        out
    }
}

/// Run every model over every row of a table.
pub fn classify_report(suite: &ModelSuite, table: &FeatureTable) -> Result<ClassifyReport> {
    if table.rows.is_empty() {
        return Err(Error::Invalid("empty feature table".into()));
    }
    let mut confusions: BTreeMap<String, Confusion> = BTreeMap::new();
    let mut verdicts = Vec::with_capacity(table.rows.len());
    for row in &table.rows {
        let features = row.feature_map();
        let mut predictions = BTreeMap::new();
        for (name, tree) in &suite.models {
            let p = classifier::predict(tree, &features)?;
            predictions.insert(name.clone(), p);
            if let Some(actual) = row.label {
                confusions.entry(name.clone()).or_default().record(p, actual);
            }
        }
        verdicts.push(WindowVerdict {
            source_id: row.source_id.clone(),
            window_start: row.window_start,
            predictions,
            actual: row.label,
        });
    }
    let model_accuracy = confusions
        .into_iter()
        .map(|(name, confusion)| {
            (
                name,
                ModelAccuracy {
                    accuracy: confusion.accuracy(),
                    confusion,
                },
            )
        })
        .collect();
    Ok(ClassifyReport {
        model_accuracy,
        verdicts,
    })
}

/// Spectrum as `frequency_hz,amplitude_pa` CSV.
pub fn spectrum_to_csv(spectrum: &spectral::Spectrum) -> String {
    let mut out = String::from("frequency_hz,amplitude_pa\n");
    for (&f, &a) in spectrum.frequencies.iter().zip(&spectrum.amplitudes) {
        writeln!(out, "{f},{a}").unwrap();
    }
    out
}

/// Feature time traces as CSV (one row per window).
pub fn feature_traces_csv(table: &FeatureTable) -> String {
    let mut out = String::from("window_start,rms,snr,hurst,fd,lam,tt\n");
    for r in &table.rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.window_start, r.rms, r.snr, r.hurst, r.fd, r.lam, r.tt
        )
        .unwrap();
    }
    out
}

/// Scatter data for one feature pair: `x,y,label` CSV.
pub fn scatter_csv(table: &FeatureTable, pair: (&str, &str)) -> String {
    let mut out = format!("{},{},label\n", pair.0, pair.1);
    for r in &table.rows {
        let m = r.feature_map();
        let label = r.label.map(|l| l.code().to_string()).unwrap_or_default();
        writeln!(out, "{},{},{}", m[pair.0], m[pair.1], label).unwrap();
    }
    out
}

/// Boundary grid as `x,y,label` CSV over the lattice.
pub fn boundary_grid_csv(
    grid: &[Label],
    bounds: ((f64, f64), (f64, f64)),
    resolution: usize,
) -> String {
    let ((x0, x1), (y0, y1)) = bounds;
    let mut out = String::from("x,y,label\n");
    for iy in 0..resolution {
        let y = y0 + (y1 - y0) * iy as f64 / (resolution - 1) as f64;
        for ix in 0..resolution {
            let x = x0 + (x1 - x0) * ix as f64 / (resolution - 1) as f64;
            let label = grid[iy * resolution + ix].code();
            writeln!(out, "{x},{y},{label}").unwrap();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal_io::{synthesize_signal, SynthKind, SynthSpec};

    fn quick_config() -> ExtractionConfig {
        ExtractionConfig {
            window: WindowSpec {
                length: 1000,
                stride: 500,
            },
            max_lag: 60,
            d_max: 5,
            ..ExtractionConfig::default()
        }
    }

    fn stable_record(seed: u64) -> TimeSeriesRecord {
        synthesize_signal(&SynthSpec {
            kind: SynthKind::StableNoise,
            duration_s: 0.25,
            sample_rate: 20000.0,
            tone_frequency: 146.0,
            tone_spl: 127.0,
            noise_floor_spl: 110.0,
            seed,
        })
        .unwrap()
    }

    fn unstable_record(seed: u64) -> TimeSeriesRecord {
        synthesize_signal(&SynthSpec {
            kind: SynthKind::UnstableLimitCycle,
            duration_s: 0.25,
            sample_rate: 20000.0,
            tone_frequency: 146.0,
            tone_spl: 127.0,
            noise_floor_spl: 110.0,
            seed,
        })
        .unwrap()
    }

    #[test]
    fn extraction_row_count_and_order() {
        let r = stable_record(1);
        let table = extract_features(&r, &quick_config()).unwrap();
        let spec = quick_config().window;
        assert_eq!(table.rows.len(), spec.window_count(r.len()));
        for (i, row) in table.rows.iter().enumerate() {
            assert_eq!(row.window_start, i * spec.stride);
        }
    }

    #[test]
    fn extraction_label_blind() {
        let mut r = unstable_record(2);
        let table_a = extract_features(&r, &quick_config()).unwrap();
        r.label = Some(Label::Stable);
        let table_b = extract_features(&r, &quick_config()).unwrap();
        for (a, b) in table_a.rows.iter().zip(&table_b.rows) {
            assert_eq!(a.rms, b.rms);
            assert_eq!(a.snr, b.snr);
            assert_eq!(a.hurst, b.hurst);
            assert_eq!(a.fd, b.fd);
            assert_eq!(a.lam, b.lam);
            assert_eq!(a.tt, b.tt);
        }
    }

    #[test]
    fn extraction_deterministic() {
        let r = unstable_record(3);
        let cfg = quick_config();
        let a = feature_table_to_csv(&extract_features(&r, &cfg).unwrap());
        let b = feature_table_to_csv(&extract_features(&r, &cfg).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn feature_csv_roundtrip() {
        let r = unstable_record(4);
        let cfg = quick_config();
        let table = extract_features(&r, &cfg).unwrap();
        let csv = feature_table_to_csv(&table);
        let back = parse_feature_csv(&csv, cfg).unwrap();
        assert_eq!(table, back);
    }

    #[test]
    fn train_and_report_self_consistent() {
        let cfg = quick_config();
        let stable = extract_features(&stable_record(5), &cfg).unwrap();
        let unstable = extract_features(&unstable_record(6), &cfg).unwrap();
        let tcfg = TrainConfig {
            seed: 1,
            min_samples_leaf: 1,
            ..TrainConfig::default()
        };
        let suite = train_models(&[&stable, &unstable], &tcfg, 2).unwrap();
        assert_eq!(suite.models.len(), 3);

        // Replaying the training tables must match evaluate() per model.
        let mut merged = stable.clone();
        merged.rows.extend(unstable.rows.clone());
        let report = classify_report(&suite, &merged).unwrap();
        for (name, _) in MODEL_FEATURE_PAIRS {
            let acc = &report.model_accuracy[name];
            let (direct, _) =
                classifier::evaluate(&suite.models[name], &merged.labeled_samples()).unwrap();
            assert!((acc.accuracy - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn train_single_class_rejected() {
        let cfg = quick_config();
        let stable = extract_features(&stable_record(7), &cfg).unwrap();
        let tcfg = TrainConfig::default();
        assert!(train_models(&[&stable], &tcfg, 2).is_err());
    }

    #[test]
    fn train_models_deterministic() {
        let cfg = quick_config();
        let stable = extract_features(&stable_record(8), &cfg).unwrap();
        let unstable = extract_features(&unstable_record(9), &cfg).unwrap();
        let tcfg = TrainConfig {
            seed: 5,
            min_samples_leaf: 1,
            ..TrainConfig::default()
        };
        let a = train_models(&[&stable, &unstable], &tcfg, 2).unwrap();
        let b = train_models(&[&stable, &unstable], &tcfg, 2).unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn classify_empty_table_rejected() {
        let cfg = quick_config();
        let stable = extract_features(&stable_record(10), &cfg).unwrap();
        let unstable = extract_features(&unstable_record(11), &cfg).unwrap();
        let tcfg = TrainConfig {
            seed: 2,
            min_samples_leaf: 1,
            ..TrainConfig::default()
        };
        let suite = train_models(&[&stable, &unstable], &tcfg, 2).unwrap();
        let empty = FeatureTable {
            rows: vec![],
            config: cfg,
        };
        assert!(classify_report(&suite, &empty).is_err());
    }

    #[test]
    fn export_row_counts() {
        let cfg = quick_config();
        let table = extract_features(&unstable_record(12), &cfg).unwrap();
        let scatter = scatter_csv(&table, ("rms", "snr"));
        assert_eq!(scatter.lines().count(), table.rows.len() + 1);
        let traces = feature_traces_csv(&table);
        assert_eq!(traces.lines().count(), table.rows.len() + 1);
    }

    #[test]
    fn flags_roundtrip() {
        let f = RowFlags {
            tau_flagged: true,
            tt_no_lines: true,
            ..RowFlags::default()
        };
        assert_eq!(RowFlags::decode(&f.encode()).unwrap(), f);
        assert_eq!(RowFlags::decode("").unwrap(), RowFlags::default());
        assert!(RowFlags::decode("bogus").is_err());
    }
}
