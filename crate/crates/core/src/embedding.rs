//! Phase-space reconstruction: AMI-based delay selection, FNN-based
//! dimension selection, and delay embedding.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Delay and dimension chosen for a series, with the diagnostic curves
/// that produced them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmbeddingParams {
    pub tau: usize,
    pub dim: usize,
    /// `(lag, I(lag))` in bits, lag 0 included.
    pub ami_curve: Vec<(usize, f64)>,
    /// `(d, false-neighbor fraction)`.
    pub fnn_curve: Vec<(usize, f64)>,
    /// No first local AMI minimum existed; `tau` is the global minimum.
    pub tau_flagged: bool,
    /// FNN never fell below the cutoff; `dim` is `d_max`.
    pub dim_flagged: bool,
}

/// Delay-coordinate trajectory, row-major `rows x dim`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    data: Vec<f64>,
    pub rows: usize,
    pub dim: usize,
    pub tau: usize,
}

impl Trajectory {
    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter_points(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }
}

fn series_range(series: &[f64]) -> Option<(f64, f64)> {
    let lo = series.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = series.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        return None;
    }
    Some((lo, hi))
}

#[inline]
fn bin_index(x: f64, lo: f64, range: f64, bins: usize) -> usize {
    (((x - lo) / range * bins as f64) as usize).min(bins - 1)
}

/// Average mutual information `I(τ)` in bits between the series and its
/// lagged copy, over a `bins x bins` joint histogram of the `N − τ`
/// overlapping pairs. A constant series has `I = 0` by definition.
pub fn average_mutual_information(series: &[f64], lag: usize, bins: usize) -> Result<f64> {
    if bins < 2 {
        return Err(Error::Invalid(format!("need at least 2 bins, got {bins}")));
    }
    if lag >= series.len() {
        return Err(Error::Invalid(format!(
            "lag {lag} >= series length {}",
            series.len()
        )));
    }
    let Some((lo, hi)) = series_range(series) else {
        return Ok(0.0);
    };
    let range = hi - lo;
    let n = series.len() - lag;
    let mut joint = vec![0u32; bins * bins];
    for i in 0..n {
        let bx = bin_index(series[i], lo, range, bins);
        let by = bin_index(series[i + lag], lo, range, bins);
        joint[bx * bins + by] += 1;
    }
    let mut px = vec![0u32; bins];
    let mut py = vec![0u32; bins];
    for bx in 0..bins {
        for by in 0..bins {
            let c = joint[bx * bins + by];
            px[bx] += c;
            py[by] += c;
        }
    }
    let nf = n as f64;
    let mut info = 0.0;
    for bx in 0..bins {
        for by in 0..bins {
            let c = joint[bx * bins + by];
            if c == 0 {
                continue;
            }
            let pj = c as f64 / nf;
            let pm = (px[bx] as f64 / nf) * (py[by] as f64 / nf);
            info += pj * (pj / pm).log2();
        }
    }
    Ok(info.max(0.0))
}

/// Result of the first-AMI-minimum delay search.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DelayEstimate {
    pub tau: usize,
    /// True when no local minimum existed and the global minimum over
    /// `1..=max_lag` was returned instead.
    pub flagged: bool,
    pub curve: Vec<(usize, f64)>,
}

/// Time delay at the first local minimum of the AMI curve; falls back to
/// the flagged global minimum when the curve has none.
pub fn optimal_delay(series: &[f64], max_lag: usize, bins: usize) -> Result<DelayEstimate> {
    if max_lag < 2 {
        return Err(Error::Invalid("max_lag must be at least 2".into()));
    }
    if max_lag + 1 >= series.len() {
        return Err(Error::Invalid(format!(
            "max_lag {max_lag} too large for series of length {}",
            series.len()
        )));
    }
    let curve: Vec<(usize, f64)> = (0..=max_lag + 1)
        .map(|lag| Ok((lag, average_mutual_information(series, lag, bins)?)))
        .collect::<Result<_>>()?;

    for lag in 1..=max_lag {
        let prev = curve[lag - 1].1;
        let here = curve[lag].1;
        let next = curve[lag + 1].1;
        if prev > here && here <= next {
            return Ok(DelayEstimate {
                tau: lag,
                flagged: false,
                curve: curve[..=max_lag].to_vec(),
            });
        }
    }
    let tau = curve[1..=max_lag]
        .iter()
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .map(|&(lag, _)| lag)
        .unwrap();
    Ok(DelayEstimate {
        tau,
        flagged: true,
        curve: curve[..=max_lag].to_vec(),
    })
}

/// Delay embedding: row `n` is `[x(n), x(n+τ), ..., x(n+(d−1)τ)]`.
pub fn embed(series: &[f64], tau: usize, dim: usize) -> Result<Trajectory> {
    if tau == 0 || dim == 0 {
        return Err(Error::Invalid("tau and dim must be at least 1".into()));
    }
    let span = (dim - 1) * tau;
    if series.len() <= span + 1 {
        return Err(Error::Invalid(format!(
            "series of length {} too short for dim {} tau {}",
            series.len(),
            dim,
            tau
        )));
    }
    let rows = series.len() - span;
    let mut data = Vec::with_capacity(rows * dim);
    for n in 0..rows {
        for k in 0..dim {
            data.push(series[n + k * tau]);
        }
    }
    Ok(Trajectory {
        data,
        rows,
        dim,
        tau,
    })
}

#[inline]
fn dist2(series: &[f64], a: usize, b: usize, tau: usize, dim: usize) -> f64 {
    let mut s = 0.0;
    for k in 0..dim {
        let d = series[a + k * tau] - series[b + k * tau];
        s += d * d;
    }
    s
}

/// Fraction of points in the `d`-dimensional embedding whose nearest
/// neighbor (Theiler window of `τ` temporal neighbors excluded) becomes
/// distant when the `(d+1)`-th coordinate is added: the per-point ratio
/// `sqrt(R²_{d+1} − R²_d) / R_d` exceeding `r_threshold` marks a false
/// neighbor.
pub fn fnn_fraction(series: &[f64], tau: usize, dim: usize, r_threshold: f64) -> Result<f64> {
    if tau == 0 || dim == 0 {
        return Err(Error::Invalid("tau and dim must be at least 1".into()));
    }
    // Points must have coordinates in both d and d+1 dimensions.
    let span = dim * tau;
    if series.len() <= span + 1 {
        return Err(Error::Invalid(format!(
            "series of length {} too short for FNN at dim {} tau {}",
            series.len(),
            dim,
            tau
        )));
    }
    let count = series.len() - span;
    let theiler = tau;

    let verdicts: Vec<Option<bool>> = (0..count)
        .into_par_iter()
        .map(|n| {
            let mut best: Option<(usize, f64)> = None;
            for m in 0..count {
                let gap = n.abs_diff(m);
                if gap <= theiler {
                    continue;
                }
                let d2 = dist2(series, n, m, tau, dim);
                match best {
                    Some((_, b2)) if d2 >= b2 => {}
                    _ => best = Some((m, d2)),
                }
            }
            let (m, r2) = best?;
            let extra = (series[n + dim * tau] - series[m + dim * tau]).abs();
            if r2 == 0.0 {
                // Coincident in d dimensions: false neighbor iff the new
                // coordinate separates them at all.
                Some(extra > 0.0)
            } else {
                Some(extra / r2.sqrt() > r_threshold)
            }
        })
        .collect();

    let mut total = 0usize;
    let mut false_count = 0usize;
    for v in verdicts.into_iter().flatten() {
        total += 1;
        if v {
            false_count += 1;
        }
    }
    if total == 0 {
        return Err(Error::Degenerate(
            "no eligible neighbor pairs for FNN".into(),
        ));
    }
    Ok(false_count as f64 / total as f64)
}

/// Result of the FNN dimension sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DimensionEstimate {
    pub dim: usize,
    /// True when the fraction never fell below the cutoff and `dim` is
    /// `d_max`.
    pub flagged: bool,
    pub curve: Vec<(usize, f64)>,
}

/// Smallest dimension whose false-neighbor fraction drops below
/// `fnn_cutoff`; `d_max` flagged when none does.
pub fn embedding_dimension(
    series: &[f64],
    tau: usize,
    r_threshold: f64,
    fnn_cutoff: f64,
    d_max: usize,
) -> Result<DimensionEstimate> {
    if d_max < 2 {
        return Err(Error::Invalid("d_max must be at least 2".into()));
    }
    let mut curve = Vec::with_capacity(d_max);
    for d in 1..=d_max {
        let f = fnn_fraction(series, tau, d, r_threshold)?;
        curve.push((d, f));
        if f < fnn_cutoff {
            return Ok(DimensionEstimate {
                dim: d,
                flagged: false,
                curve,
            });
        }
    }
    Ok(DimensionEstimate {
        dim: d_max,
        flagged: true,
        curve,
    })
}

/// Run both selection steps on one series.
pub fn select_embedding(
    series: &[f64],
    max_lag: usize,
    bins: usize,
    r_threshold: f64,
    fnn_cutoff: f64,
    d_max: usize,
) -> Result<EmbeddingParams> {
    let delay = optimal_delay(series, max_lag, bins)?;
    let dim = embedding_dimension(series, delay.tau, r_threshold, fnn_cutoff, d_max)?;
    Ok(EmbeddingParams {
        tau: delay.tau,
        dim: dim.dim,
        ami_curve: delay.curve,
        fnn_curve: dim.curve,
        tau_flagged: delay.flagged,
        dim_flagged: dim.flagged,
    })
}
