//! Box-counting fractal dimension and rescaled-range Hurst exponent.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Least-squares fit through log-log points.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LogLogFit {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

fn least_squares(xs: &[f64], ys: &[f64]) -> LogLogFit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    LogLogFit {
        xs: xs.to_vec(),
        ys: ys.to_vec(),
        slope,
        intercept,
        r_squared,
    }
}

/// Box-counting dimension estimate of the signal graph.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FractalDimension {
    /// Slope of log N(ε) vs log(1/ε), clamped to `[1, 2]`.
    pub fd: f64,
    /// The raw slope fell outside `[1, 2]`.
    pub clamped: bool,
    pub fit: LogLogFit,
}

/// Box-counting fractal dimension of the graph `(i, x_i)` normalized into
/// the unit square, over dyadic box sides `2^-k`, `k = 1..floor(log2 N)−2`.
/// Segments between consecutive samples are rasterized so the whole curve
/// is covered, not just the sample points. A constant window is defined
/// to have dimension exactly 1.
pub fn box_counting_dimension(window: &[f64]) -> Result<FractalDimension> {
    let n = window.len();
    if n < 64 {
        return Err(Error::Invalid(format!(
            "box counting needs at least 64 samples, got {n}"
        )));
    }
    let lo = window.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = window.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let range = hi - lo;
    let constant = range == 0.0;

    let norm_y = |v: f64| -> f64 {
        if constant {
            0.5
        } else {
            (v - lo) / range
        }
    };
    let k_max = ((n as f64).log2().floor() as usize).saturating_sub(2);

    let mut xs = Vec::with_capacity(k_max);
    let mut ys = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let grid = 1usize << k;
        let count = count_occupied_boxes(window, grid, norm_y, n);
        xs.push((grid as f64).ln()); // log(1/ε) with ε = 2^-k
        ys.push((count as f64).ln());
    }
    let fit = least_squares(&xs, &ys);
    if constant {
        return Ok(FractalDimension {
            fd: 1.0,
            clamped: false,
            fit,
        });
    }
    let raw = fit.slope;
    let fd = raw.clamp(1.0, 2.0);
    Ok(FractalDimension {
        fd,
        clamped: fd != raw,
        fit,
    })
}

/// Count grid cells touched by the polyline of the normalized graph at a
/// `grid x grid` resolution.
fn count_occupied_boxes(window: &[f64], grid: usize, norm_y: impl Fn(f64) -> f64, n: usize) -> usize {
    let gf = grid as f64;
    let cell = |v: f64| -> usize { ((v * gf) as usize).min(grid - 1) };
    let words = (grid * grid).div_ceil(64);
    let mut occupied = vec![0u64; words];
    let mut mark = |ix: usize, iy: usize| {
        let bit = ix * grid + iy;
        occupied[bit / 64] |= 1u64 << (bit % 64);
    };

    let x_at = |i: usize| i as f64 / (n - 1) as f64;
    for i in 0..n - 1 {
        let (x0, y0) = (x_at(i), norm_y(window[i]));
        let (x1, y1) = (x_at(i + 1), norm_y(window[i + 1]));
        let ix0 = cell(x0);
        let ix1 = cell(x1);
        for ix in ix0..=ix1 {
            // Clip the segment's parameter range to this x column and mark
            // the y cells its sub-span covers.
            let cx0 = (ix as f64 / gf).max(x0);
            let cx1 = (((ix + 1) as f64) / gf).min(x1);
            let (ya, yb) = if x1 > x0 {
                let ta = (cx0 - x0) / (x1 - x0);
                let tb = (cx1 - x0) / (x1 - x0);
                (y0 + ta * (y1 - y0), y0 + tb * (y1 - y0))
            } else {
                (y0, y1)
            };
            let (iy_lo, iy_hi) = {
                let a = cell(ya.min(yb));
                let b = cell(ya.max(yb));
                (a, b)
            };
            for iy in iy_lo..=iy_hi {
                mark(ix, iy);
            }
        }
    }
    occupied.iter().map(|w| w.count_ones() as usize).sum()
}

/// Which end of the window anchors the disjoint R/S segment partition.
/// Mirrored partitions make the estimate of a reversed window identical.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentAnchor {
    Start,
    End,
}

/// Rescaled-range Hurst exponent estimate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HurstEstimate {
    /// Slope of log(R/S) vs log(n), clamped to `[0, 1]`.
    pub h: f64,
    /// The raw slope fell outside `[0, 1]`.
    pub clamped: bool,
    pub fit: LogLogFit,
}

/// Hurst exponent via rescaled-range analysis: for 8 logarithmically
/// spaced segment lengths `n` in `[10, N/2]`, average `R/S` over disjoint
/// segments and fit `log(R/S)` against `log(n)`.
pub fn hurst_exponent(window: &[f64]) -> Result<HurstEstimate> {
    hurst_exponent_anchored(window, SegmentAnchor::Start)
}

pub fn hurst_exponent_anchored(window: &[f64], anchor: SegmentAnchor) -> Result<HurstEstimate> {
    let n = window.len();
    if n < 100 {
        return Err(Error::Invalid(format!(
            "Hurst estimation needs at least 100 samples, got {n}"
        )));
    }

    const N_SCALES: usize = 8;
    let lo = 10f64.ln();
    let hi = (n as f64 / 2.0).ln();
    let mut lengths: Vec<usize> = (0..N_SCALES)
        .map(|i| (lo + (hi - lo) * i as f64 / (N_SCALES - 1) as f64).exp().round() as usize)
        .collect();
    lengths.dedup();

    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &seg_len in &lengths {
        let segments = n / seg_len;
        let offset = match anchor {
            SegmentAnchor::Start => 0,
            SegmentAnchor::End => n - segments * seg_len,
        };
        let mut sum = 0.0;
        let mut kept = 0usize;
        for s in 0..segments {
            let seg = &window[offset + s * seg_len..offset + (s + 1) * seg_len];
            if let Some(rs) = rescaled_range(seg) {
                sum += rs;
                kept += 1;
            }
        }
        if kept == 0 {
            continue; // every segment at this length had zero deviation
        }
        xs.push((seg_len as f64).ln());
        ys.push((sum / kept as f64).ln());
    }
    if xs.len() < 3 {
        return Err(Error::Degenerate(
            "fewer than 3 usable segment lengths for the R/S fit".into(),
        ));
    }
    let fit = least_squares(&xs, &ys);
    let raw = fit.slope;
    let h = raw.clamp(0.0, 1.0);
    Ok(HurstEstimate {
        h,
        clamped: h != raw,
        fit,
    })
}

/// R/S of one segment: range of mean-adjusted cumulative deviations over
/// the population standard deviation. `None` when the deviation is zero.
fn rescaled_range(segment: &[f64]) -> Option<f64> {
    let n = segment.len() as f64;
    let mean = segment.iter().sum::<f64>() / n;
    let var = segment.iter().map(|&x| (x - mean) * (x - mean)).sum::<f64>() / n;
    if var == 0.0 {
        return None;
    }
    let mut cum = 0.0;
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for &x in segment {
        cum += x - mean;
        min = min.min(cum);
        max = max.max(cum);
    }
    // The cumulative series ends at ~0 and implicitly starts at 0.
    min = min.min(0.0);
    max = max.max(0.0);
    Some((max - min) / var.sqrt())
}
