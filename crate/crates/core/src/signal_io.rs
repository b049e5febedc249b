//! Loading, synthesis, validation, and windowing of acoustic pressure
//! time series.
//!
//! Two on-disk formats are supported: CSV with a `time_s,pressure_pa` or
//! bare `pressure_pa` column layout, and raw little-endian `f64` streams.

use std::fs;
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral;

/// Reference pressure for SPL, 20 µPa.
pub const P_REF: f64 = 20e-6;

/// Cutoff of the low-pass applied to synthetic combustion noise.
pub const NOISE_CUTOFF_HZ: f64 = 1000.0;

/// Condition label. Numeric encoding is fixed: stable = 1, unstable = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Stable,
    Unstable,
}

impl Label {
    pub fn code(self) -> u8 {
        match self {
            Label::Stable => 1,
            Label::Unstable => 0,
        }
    }

    pub fn from_code(code: u8) -> Result<Self> {
        match code {
            1 => Ok(Label::Stable),
            0 => Ok(Label::Unstable),
            other => Err(Error::Invalid(format!("unknown label code {other}"))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Stable => "stable",
            Label::Unstable => "unstable",
        }
    }
}

impl std::str::FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stable" => Ok(Label::Stable),
            "unstable" => Ok(Label::Unstable),
            other => Err(Error::Invalid(format!("unknown label '{other}'"))),
        }
    }
}

/// A sampled pressure signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeriesRecord {
    pub samples: Vec<f64>,
    /// Sampling rate in Hz.
    pub sample_rate: f64,
    pub label: Option<Label>,
    /// Equivalence ratio of the operating condition, when known.
    pub condition: Option<f64>,
    pub source_id: String,
}

impl TimeSeriesRecord {
    pub fn new(
        samples: Vec<f64>,
        sample_rate: f64,
        label: Option<Label>,
        condition: Option<f64>,
        source_id: impl Into<String>,
    ) -> Result<Self> {
        if !(sample_rate > 0.0) {
            return Err(Error::Invalid(format!(
                "sample_rate must be positive, got {sample_rate}"
            )));
        }
        if samples.is_empty() {
            return Err(Error::Invalid("record has no samples".into()));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::Invalid(format!(
                "non-finite sample at index {i}"
            )));
        }
        Ok(TimeSeriesRecord {
            samples,
            sample_rate,
            label,
            condition,
            source_id: source_id.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }
}

/// Sliding-window geometry over a record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    /// Window length in samples.
    pub length: usize,
    /// Step between consecutive window starts, in samples.
    pub stride: usize,
}

impl Default for WindowSpec {
    fn default() -> Self {
        WindowSpec {
            length: 3000,
            stride: 150,
        }
    }
}

impl WindowSpec {
    pub fn validate(&self, record_len: usize) -> Result<()> {
        if self.stride == 0 || self.stride > self.length {
            return Err(Error::Invalid(format!(
                "stride must satisfy 0 < stride <= length, got stride={} length={}",
                self.stride, self.length
            )));
        }
        if self.length > record_len {
            return Err(Error::Invalid(format!(
                "window length {} exceeds record length {}",
                self.length, record_len
            )));
        }
        Ok(())
    }

    /// Number of full windows over a record of `record_len` samples;
    /// zero when the record is shorter than one window.
    pub fn window_count(&self, record_len: usize) -> usize {
        if record_len < self.length {
            return 0;
        }
        (record_len - self.length) / self.stride + 1
    }
}

/// A read-only view of one window with its start index in the record.
#[derive(Debug, Clone, Copy)]
pub struct WindowView<'a> {
    pub start: usize,
    pub samples: &'a [f64],
}

/// Enumerate full windows; partial trailing windows are dropped.
pub fn slide_windows<'a>(
    record: &'a TimeSeriesRecord,
    spec: &WindowSpec,
) -> Result<Vec<WindowView<'a>>> {
    spec.validate(record.len())?;
    let count = spec.window_count(record.len());
    Ok((0..count)
        .map(|i| {
            let start = i * spec.stride;
            WindowView {
                start,
                samples: &record.samples[start..start + spec.length],
            }
        })
        .collect())
}

/// Quantified comparison of a sub-data length against the full record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubLengthReport {
    pub candidate_length: usize,
    /// Pearson correlation between the amplitude spectra of the candidate
    /// slice and of the full record, on the candidate's frequency grid.
    pub spectral_correlation: f64,
    /// Symmetrized KL divergence (nats) between 64-bin amplitude
    /// histograms of the slice and the full record.
    pub pdf_divergence: f64,
}

const PDF_BINS: usize = 64;

/// Check whether `candidate_length` samples reproduce the spectral content
/// and amplitude distribution of the whole record.
pub fn validate_sub_length(
    record: &TimeSeriesRecord,
    candidate_length: usize,
) -> Result<SubLengthReport> {
    let n = record.len();
    if candidate_length > n {
        return Err(Error::Invalid(format!(
            "candidate length {candidate_length} exceeds record length {n}"
        )));
    }
    if candidate_length < 256 {
        return Err(Error::Invalid(format!(
            "candidate length {candidate_length} too short for a 64-bin histogram (need >= 256)"
        )));
    }
    let slice = &record.samples[..candidate_length];
    let full = &record.samples[..];

    // A Hann taper keeps rectangular-window leakage tails from dominating
    // the comparison when the slice and the full record have very
    // different frequency resolutions.
    let spec_slice = spectral::amplitude_spectrum(&hann_taper(slice), record.sample_rate)?;
    let spec_full = spectral::amplitude_spectrum(&hann_taper(full), record.sample_rate)?;

    // Bring both spectra to a common effective resolution on the
    // candidate's grid, then correlate. Each spectrum gets a smoothing
    // kernel that tops its intrinsic bin width up to twice the
    // candidate's, so a sharp full-record peak and its broadened
    // counterpart in the short slice end up with matching shapes.
    let grid = &spec_slice.frequencies;
    let target = 2.0 * spec_slice.delta_f();
    let widen = |own: f64| (target * target - own * own).max(0.0).sqrt();
    let a = gaussian_resample(
        &spec_slice.frequencies,
        &spec_slice.amplitudes,
        grid,
        widen(spec_slice.delta_f()),
    );
    let b = gaussian_resample(
        &spec_full.frequencies,
        &spec_full.amplitudes,
        grid,
        widen(spec_full.delta_f()),
    );
    let spectral_correlation = pearson(&a, &b);

    let lo = full.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = full.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let p = histogram_pdf(slice, lo, hi, PDF_BINS);
    let q = histogram_pdf(full, lo, hi, PDF_BINS);
    let pdf_divergence = symmetric_kl(&p, &q);

    Ok(SubLengthReport {
        candidate_length,
        spectral_correlation,
        pdf_divergence,
    })
}

fn hann_taper(data: &[f64]) -> Vec<f64> {
    let n = data.len();
    data.iter()
        .enumerate()
        .map(|(i, &x)| {
            let w = 0.5
                - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / (n - 1) as f64).cos();
            x * w
        })
        .collect()
}

fn gaussian_resample(xs: &[f64], ys: &[f64], grid: &[f64], sigma: f64) -> Vec<f64> {
    let dx = if xs.len() > 1 { xs[1] - xs[0] } else { 1.0 };
    let reach = (4.0 * sigma / dx).ceil() as usize;
    grid.iter()
        .map(|&g| {
            let center = ((g - xs[0]) / dx).round() as isize;
            let lo = (center - reach as isize).max(0) as usize;
            let hi = ((center + reach as isize) as usize + 1).min(xs.len());
            let mut num = 0.0;
            let mut den = 0.0;
            for i in lo..hi {
                let w = (-((xs[i] - g) / sigma).powi(2) / 2.0).exp();
                num += w * ys[i];
                den += w;
            }
            if den > 0.0 {
                num / den
            } else {
                0.0
            }
        })
        .collect()
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return 0.0;
    }
    (sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0)
}

fn histogram_pdf(data: &[f64], lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    let mut counts = vec![0.0f64; bins];
    let range = hi - lo;
    for &x in data {
        let idx = if range == 0.0 {
            0
        } else {
            (((x - lo) / range * bins as f64) as usize).min(bins - 1)
        };
        counts[idx] += 1.0;
    }
    // Tiny floor keeps the symmetrized KL finite when a bin is empty on
    // one side only; identical histograms still give exactly zero.
    let smooth = 1e-12;
    let total: f64 = data.len() as f64 + smooth * bins as f64;
    counts.iter().map(|c| (c + smooth) / total).collect()
}

fn symmetric_kl(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(&pi, &qi)| (pi - qi) * (pi / qi).ln())
        .sum()
}

/// Kind of synthetic condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SynthKind {
    /// Broadband combustion noise: Gaussian noise low-passed below 1 kHz.
    StableNoise,
    /// Thermoacoustic limit cycle: discrete tone plus the same noise floor.
    UnstableLimitCycle,
}

/// Parameters of a synthetic pressure record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub kind: SynthKind,
    pub duration_s: f64,
    pub sample_rate: f64,
    /// Limit-cycle tone frequency, Hz.
    pub tone_frequency: f64,
    /// Tone level, dB re 20 µPa.
    pub tone_spl: f64,
    /// Broadband noise floor level, dB re 20 µPa.
    pub noise_floor_spl: f64,
    pub seed: u64,
}

impl SynthSpec {
    fn validate(&self) -> Result<()> {
        if !(self.duration_s > 0.0) {
            return Err(Error::Invalid("duration must be positive".into()));
        }
        if !(self.sample_rate > 0.0) {
            return Err(Error::Invalid("sample rate must be positive".into()));
        }
        if self.tone_frequency >= self.sample_rate / 2.0 {
            return Err(Error::Invalid(format!(
                "tone frequency {} Hz at or above Nyquist ({} Hz)",
                self.tone_frequency,
                self.sample_rate / 2.0
            )));
        }
        Ok(())
    }
}

/// RMS pressure in Pa for a level in dB re 20 µPa.
pub fn spl_to_rms_pa(spl_db: f64) -> f64 {
    P_REF * 10f64.powf(spl_db / 20.0)
}

/// Generate a synthetic stable or unstable pressure record.
///
/// Deterministic for a fixed [`SynthSpec`]: the same spec always yields a
/// bit-identical sample sequence.
pub fn synthesize_signal(spec: &SynthSpec) -> Result<TimeSeriesRecord> {
    spec.validate()?;
    let n = (spec.duration_s * spec.sample_rate).round() as usize;
    if n == 0 {
        return Err(Error::Invalid("duration too short for one sample".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise_rms = spl_to_rms_pa(spec.noise_floor_spl);
    let noise = lowpass_gaussian_noise(n, spec.sample_rate, NOISE_CUTOFF_HZ, noise_rms, &mut rng);

    let (samples, label) = match spec.kind {
        SynthKind::StableNoise => (noise, Label::Stable),
        SynthKind::UnstableLimitCycle => {
            let tone_amp = spl_to_rms_pa(spec.tone_spl) * std::f64::consts::SQRT_2;
            let w = 2.0 * std::f64::consts::PI * spec.tone_frequency / spec.sample_rate;
            let samples = noise
                .iter()
                .enumerate()
                .map(|(i, &nz)| tone_amp * (w * i as f64).sin() + nz)
                .collect();
            (samples, Label::Unstable)
        }
    };

    TimeSeriesRecord::new(
        samples,
        spec.sample_rate,
        Some(label),
        None,
        format!("synth-{}-seed{}", label.as_str(), spec.seed),
    )
}

/// White Gaussian noise brick-wall filtered below `cutoff_hz`, rescaled to
/// the requested RMS.
fn lowpass_gaussian_noise(
    n: usize,
    sample_rate: f64,
    cutoff_hz: f64,
    target_rms: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    // Box-Muller keeps determinism independent of rand_distr internals.
    let mut white = Vec::with_capacity(n);
    while white.len() < n {
        let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        let u2: f64 = rng.gen_range(0.0..1.0);
        let r = (-2.0 * u1.ln()).sqrt();
        let th = 2.0 * std::f64::consts::PI * u2;
        white.push(r * th.cos());
        if white.len() < n {
            white.push(r * th.sin());
        }
    }

    let mut buf: Vec<Complex<f64>> = white.iter().map(|&x| Complex::new(x, 0.0)).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    let df = sample_rate / n as f64;
    for (k, v) in buf.iter_mut().enumerate() {
        let f = if k <= n / 2 {
            k as f64 * df
        } else {
            (n - k) as f64 * df
        };
        if f > cutoff_hz {
            *v = Complex::new(0.0, 0.0);
        }
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let mut out: Vec<f64> = buf.iter().map(|c| c.re / n as f64).collect();

    let rms = spectral::rms(&out).unwrap_or(0.0);
    if rms > 0.0 {
        let scale = target_rms / rms;
        for x in &mut out {
            *x *= scale;
        }
    }
    out
}

/// On-disk signal formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalFormat {
    /// `time_s,pressure_pa` or single-column `pressure_pa` CSV.
    Csv,
    /// Raw little-endian 64-bit floats.
    RawF64,
}

impl SignalFormat {
    /// Guess the format from a file extension; raw when not `.csv`.
    pub fn from_path(path: &Path) -> SignalFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => SignalFormat::Csv,
            _ => SignalFormat::RawF64,
        }
    }
}

/// Maximum relative deviation tolerated between consecutive time steps of
/// a CSV time column (1 ppm).
const TIME_UNIFORMITY_PPM: f64 = 1e-6;

/// Load a record from disk. `sample_rate` must be supplied for raw files
/// and for single-column CSV; a two-column CSV derives it from the time
/// column, which must be uniformly spaced within 1 ppm.
pub fn load_timeseries(
    path: &Path,
    format: SignalFormat,
    sample_rate: Option<f64>,
) -> Result<TimeSeriesRecord> {
    match format {
        SignalFormat::RawF64 => {
            let rate = sample_rate.ok_or_else(|| {
                Error::Invalid("raw_f64 input requires an explicit sample rate".into())
            })?;
            let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
            if bytes.len() % 8 != 0 {
                return Err(Error::Parse(format!(
                    "raw_f64 file length {} is not a multiple of 8",
                    bytes.len()
                )));
            }
            let samples: Vec<f64> = bytes
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect();
            if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
                return Err(Error::Parse(format!(
                    "non-finite sample at index {i} in {}",
                    path.display()
                )));
            }
            TimeSeriesRecord::new(samples, rate, None, None, path.display().to_string())
        }
        SignalFormat::Csv => load_csv(path, sample_rate),
    }
}

fn load_csv(path: &Path, sample_rate: Option<f64>) -> Result<TimeSeriesRecord> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut times: Vec<f64> = Vec::new();
    let mut samples: Vec<f64> = Vec::new();
    let mut two_column: Option<bool> = None;

    for (row, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        // Header row is recognized, not required.
        if row == 0 && fields.iter().any(|f| f.parse::<f64>().is_err()) {
            match fields.as_slice() {
                ["time_s", "pressure_pa"] | ["pressure_pa"] => continue,
                _ => {
                    return Err(Error::Parse(format!(
                        "unrecognized CSV header '{line}' (expected 'time_s,pressure_pa' or 'pressure_pa')"
                    )))
                }
            }
        }
        let is_two = match fields.len() {
            1 => false,
            2 => true,
            k => {
                return Err(Error::Parse(format!(
                    "row {row}: expected 1 or 2 columns, got {k}"
                )))
            }
        };
        match two_column {
            None => two_column = Some(is_two),
            Some(expected) if expected != is_two => {
                return Err(Error::Parse(format!(
                    "row {row}: inconsistent column count"
                )))
            }
            _ => {}
        }
        let parse = |s: &str| -> Result<f64> {
            let v: f64 = s
                .parse()
                .map_err(|_| Error::Parse(format!("row {row}: cannot parse '{s}' as a number")))?;
            if !v.is_finite() {
                return Err(Error::Parse(format!("row {row}: non-finite value '{s}'")));
            }
            Ok(v)
        };
        if is_two {
            times.push(parse(fields[0])?);
            samples.push(parse(fields[1])?);
        } else {
            samples.push(parse(fields[0])?);
        }
    }

    if samples.is_empty() {
        return Err(Error::Parse(format!("{}: no data rows", path.display())));
    }

    let rate = if two_column == Some(true) && times.len() >= 2 {
        let n = times.len();
        let mean_dt = (times[n - 1] - times[0]) / (n - 1) as f64;
        if !(mean_dt > 0.0) {
            return Err(Error::Parse("time column is not increasing".into()));
        }
        for (i, w) in times.windows(2).enumerate() {
            let dt = w[1] - w[0];
            if ((dt - mean_dt) / mean_dt).abs() > TIME_UNIFORMITY_PPM {
                return Err(Error::Parse(format!(
                    "non-uniform time column at row {} (dt {} vs mean {})",
                    i + 1,
                    dt,
                    mean_dt
                )));
            }
        }
        1.0 / mean_dt
    } else {
        sample_rate.ok_or_else(|| {
            Error::Invalid(
                "single-column CSV requires an explicit sample rate".into(),
            )
        })?
    };

    TimeSeriesRecord::new(samples, rate, None, None, path.display().to_string())
}

/// Write a record to disk in the given format. Raw output round-trips
/// bit-exactly through [`load_timeseries`].
pub fn save_timeseries(
    record: &TimeSeriesRecord,
    path: &Path,
    format: SignalFormat,
) -> Result<()> {
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    match format {
        SignalFormat::RawF64 => {
            let mut bytes = Vec::with_capacity(record.len() * 8);
            for &s in &record.samples {
                bytes.extend_from_slice(&s.to_le_bytes());
            }
            file.write_all(&bytes).map_err(|e| Error::io(path, e))?;
        }
        SignalFormat::Csv => {
            let mut out = String::from("time_s,pressure_pa\n");
            for (i, &s) in record.samples.iter().enumerate() {
                let t = i as f64 / record.sample_rate;
                out.push_str(&format!("{t},{s}\n"));
            }
            file.write_all(out.as_bytes())
                .map_err(|e| Error::io(path, e))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(samples: Vec<f64>, rate: f64) -> TimeSeriesRecord {
        TimeSeriesRecord::new(samples, rate, None, None, "test").unwrap()
    }

    #[test]
    fn slide_windows_counts() {
        let r = record(vec![0.0; 40000], 20000.0);
        let spec = WindowSpec::default();
        let windows = slide_windows(&r, &spec).unwrap();
        assert_eq!(windows.len(), 247);
        for (i, w) in windows.iter().enumerate() {
            assert_eq!(w.start, i * 150);
            assert_eq!(w.samples.len(), 3000);
        }
    }

    #[test]
    fn slide_windows_exact_fit() {
        let r = record(vec![0.0; 3000], 20000.0);
        let windows = slide_windows(&r, &WindowSpec::default()).unwrap();
        assert_eq!(windows.len(), 1);
        assert_eq!(windows[0].start, 0);
    }

    #[test]
    fn slide_windows_too_short() {
        let r = record(vec![0.0; 2999], 20000.0);
        assert!(slide_windows(&r, &WindowSpec::default()).is_err());
    }

    #[test]
    fn record_rejects_nan() {
        let err = TimeSeriesRecord::new(vec![1.0, f64::NAN], 1.0, None, None, "x").unwrap_err();
        assert!(err.to_string().contains("index 1"));
    }

    #[test]
    fn csv_two_column_derives_rate() {
        let dir = std::env::temp_dir().join("cs-io-test");
        fs::create_dir_all(&dir).unwrap();
        let p = dir.join("two_col.csv");
        fs::write(&p, "0.0,1.0\n5e-5,2.0\n1e-4,3.0\n").unwrap();
        let r = load_timeseries(&p, SignalFormat::Csv, None).unwrap();
        assert_eq!(r.samples, vec![1.0, 2.0, 3.0]);
        assert!((r.sample_rate - 20000.0).abs() < 1e-6);
    }

    #[test]
    fn csv_nan_rejected_with_row() {
        let dir = std::env::temp_dir().join("cs-io-test");
        fs::create_dir_all(&dir).unwrap();
        let p = dir.join("nan.csv");
        fs::write(&p, "1.0\n2.0\nNaN\n").unwrap();
        let err = load_timeseries(&p, SignalFormat::Csv, Some(100.0)).unwrap_err();
        assert!(err.to_string().contains("row 2"), "{err}");
    }

    #[test]
    fn csv_non_uniform_time_rejected() {
        let dir = std::env::temp_dir().join("cs-io-test");
        fs::create_dir_all(&dir).unwrap();
        let p = dir.join("jitter.csv");
        fs::write(&p, "0.0,1.0\n1.0,2.0\n2.5,3.0\n").unwrap();
        let err = load_timeseries(&p, SignalFormat::Csv, None).unwrap_err();
        assert!(err.to_string().contains("non-uniform"), "{err}");
    }

    #[test]
    fn raw_roundtrip_bit_exact() {
        let dir = std::env::temp_dir().join("cs-io-test");
        fs::create_dir_all(&dir).unwrap();
        let p = dir.join("roundtrip.f64");
        let r = record(vec![1.5, -2.25, 1e-300, 44.77], 20000.0);
        save_timeseries(&r, &p, SignalFormat::RawF64).unwrap();
        let back = load_timeseries(&p, SignalFormat::RawF64, Some(20000.0)).unwrap();
        assert_eq!(back.samples, r.samples);
    }

    #[test]
    fn raw_of_40000_samples_is_two_seconds() {
        let dir = std::env::temp_dir().join("cs-io-test");
        fs::create_dir_all(&dir).unwrap();
        let p = dir.join("full.f64");
        let r = record(vec![0.25; 40000], 20000.0);
        save_timeseries(&r, &p, SignalFormat::RawF64).unwrap();
        let back = load_timeseries(&p, SignalFormat::RawF64, Some(20000.0)).unwrap();
        assert!((back.duration_s() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn synth_tone_rms_from_spl() {
        // 127 dB re 20 µPa -> 44.77 Pa RMS
        assert!((spl_to_rms_pa(127.0) - 44.77).abs() < 0.01);
        let spec = SynthSpec {
            kind: SynthKind::UnstableLimitCycle,
            duration_s: 0.5,
            sample_rate: 20000.0,
            tone_frequency: 146.0,
            tone_spl: 127.0,
            noise_floor_spl: 60.0,
            seed: 7,
        };
        let r = synthesize_signal(&spec).unwrap();
        let rms = crate::spectral::rms(&r.samples).unwrap();
        assert!((rms - 44.77).abs() < 0.5, "rms = {rms}");
        assert_eq!(r.label, Some(Label::Unstable));
    }

    #[test]
    fn synth_deterministic() {
        let spec = SynthSpec {
            kind: SynthKind::StableNoise,
            duration_s: 0.1,
            sample_rate: 20000.0,
            tone_frequency: 146.0,
            tone_spl: 127.0,
            noise_floor_spl: 110.0,
            seed: 42,
        };
        let a = synthesize_signal(&spec).unwrap();
        let b = synthesize_signal(&spec).unwrap();
        assert_eq!(a.samples, b.samples);
        assert_eq!(a.label, Some(Label::Stable));
    }

    #[test]
    fn sublength_self_comparison() {
        let spec = SynthSpec {
            kind: SynthKind::StableNoise,
            duration_s: 0.2,
            sample_rate: 20000.0,
            tone_frequency: 146.0,
            tone_spl: 127.0,
            noise_floor_spl: 110.0,
            seed: 1,
        };
        let r = synthesize_signal(&spec).unwrap();
        let rep = validate_sub_length(&r, r.len()).unwrap();
        assert!((rep.spectral_correlation - 1.0).abs() < 1e-9);
        assert!(rep.pdf_divergence.abs() < 1e-9);
    }

    #[test]
    fn sublength_sine_3000_of_40000() {
        let spec = SynthSpec {
            kind: SynthKind::UnstableLimitCycle,
            duration_s: 2.0,
            sample_rate: 20000.0,
            tone_frequency: 146.0,
            tone_spl: 127.0,
            noise_floor_spl: 40.0,
            seed: 3,
        };
        let r = synthesize_signal(&spec).unwrap();
        let rep = validate_sub_length(&r, 3000).unwrap();
        assert!(rep.spectral_correlation > 0.99, "{}", rep.spectral_correlation);
    }

    #[test]
    fn sublength_divergence_shrinks_with_length() {
        let spec = SynthSpec {
            kind: SynthKind::StableNoise,
            duration_s: 2.0,
            sample_rate: 20000.0,
            tone_frequency: 146.0,
            tone_spl: 127.0,
            noise_floor_spl: 110.0,
            seed: 11,
        };
        let r = synthesize_signal(&spec).unwrap();
        let short = validate_sub_length(&r, 256).unwrap();
        let long = validate_sub_length(&r, 3000).unwrap();
        assert!(
            short.pdf_divergence > long.pdf_divergence,
            "short {} vs long {}",
            short.pdf_divergence,
            long.pdf_divergence
        );
    }

    #[test]
    fn sublength_too_short_rejected() {
        let r = record(vec![0.0; 1000], 20000.0);
        assert!(validate_sub_length(&r, 255).is_err());
    }
}
