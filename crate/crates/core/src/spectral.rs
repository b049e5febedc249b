//! Amplitude spectra, dominant-peak search, RMS, SPL, and SNR.

use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal_io::P_REF;

/// Single-sided amplitude spectrum of one window.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Spectrum {
    /// Ascending, uniformly spaced bin frequencies in `[0, rate/2]` Hz.
    pub frequencies: Vec<f64>,
    /// Amplitude per bin in Pa; a pure bin-centered sinusoid of amplitude
    /// `A` appears with amplitude `A`.
    pub amplitudes: Vec<f64>,
}

impl Spectrum {
    /// Frequency resolution between bins.
    pub fn delta_f(&self) -> f64 {
        if self.frequencies.len() > 1 {
            self.frequencies[1] - self.frequencies[0]
        } else {
            0.0
        }
    }
}

/// Dominant spectral peak inside a search band.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DominantPeak {
    pub f_dom: f64,
    pub amplitude: f64,
    /// Sound pressure level of the peak, dB re 20 µPa (RMS convention).
    pub spl: f64,
}

/// Root mean square of a window: `[Σ pᵢ² / N]^(1/2)`.
pub fn rms(window: &[f64]) -> Result<f64> {
    if window.is_empty() {
        return Err(Error::Invalid("rms of an empty window".into()));
    }
    let ss: f64 = window.iter().map(|&x| x * x).sum();
    Ok((ss / window.len() as f64).sqrt())
}

/// Single-sided amplitude spectrum with a rectangular taper.
pub fn amplitude_spectrum(window: &[f64], sample_rate: f64) -> Result<Spectrum> {
    let n = window.len();
    if n < 2 {
        return Err(Error::Invalid(format!(
            "spectrum needs at least 2 samples, got {n}"
        )));
    }
    if !(sample_rate > 0.0) {
        return Err(Error::Invalid("sample rate must be positive".into()));
    }
    let mut buf: Vec<Complex<f64>> = window.iter().map(|&x| Complex::new(x, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let half = n / 2;
    let df = sample_rate / n as f64;
    let mut frequencies = Vec::with_capacity(half + 1);
    let mut amplitudes = Vec::with_capacity(half + 1);
    for (k, bin) in buf[..=half].iter().enumerate() {
        frequencies.push(k as f64 * df);
        // DC and (for even n) Nyquist bins are not mirrored.
        let scale = if k == 0 || (n.is_multiple_of(2) && k == half) {
            1.0
        } else {
            2.0
        };
        amplitudes.push(scale * bin.norm() / n as f64);
    }
    Ok(Spectrum {
        frequencies,
        amplitudes,
    })
}

/// Peak bin inside `[lo, hi]` Hz, DC excluded, ties broken toward the
/// lower frequency.
pub fn dominant_frequency(spectrum: &Spectrum, band: (f64, f64)) -> Result<DominantPeak> {
    let (lo, hi) = band;
    if !(lo <= hi) {
        return Err(Error::Invalid(format!("bad search band [{lo}, {hi}]")));
    }
    let mut best: Option<(f64, f64)> = None;
    for (&f, &a) in spectrum.frequencies.iter().zip(&spectrum.amplitudes) {
        if f <= 0.0 || f < lo || f > hi {
            continue;
        }
        match best {
            Some((_, amax)) if a <= amax => {}
            _ => best = Some((f, a)),
        }
    }
    let (f_dom, amplitude) =
        best.ok_or_else(|| Error::Invalid(format!("no spectrum bins in band [{lo}, {hi}]")))?;
    let spl = 20.0 * ((amplitude / std::f64::consts::SQRT_2) / P_REF).log10();
    Ok(DominantPeak {
        f_dom,
        amplitude,
        spl,
    })
}

/// Ratio of the dominant-peak amplitude to the mean amplitude over the
/// noise band (500–600 Hz in the reference configuration).
pub fn snr(spectrum: &Spectrum, peak: &DominantPeak, noise_band: (f64, f64)) -> Result<f64> {
    let (lo, hi) = noise_band;
    let mut sum = 0.0;
    let mut count = 0usize;
    for (&f, &a) in spectrum.frequencies.iter().zip(&spectrum.amplitudes) {
        if f >= lo && f <= hi {
            sum += a;
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::Invalid(format!(
            "no spectrum bins in noise band [{lo}, {hi}]"
        )));
    }
    let mean = sum / count as f64;
    if mean == 0.0 {
        return Err(Error::Degenerate("zero mean noise amplitude".into()));
    }
    Ok(peak.amplitude / mean)
}
