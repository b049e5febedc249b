//! Recurrence matrices and vertical-line quantification (trapping time
//! and laminarity).

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embedding::Trajectory;
use crate::error::{Error, Result};

/// Symmetric binary recurrence matrix with its threshold.
#[derive(Debug, Clone)]
pub struct RecurrenceMatrix {
    bits: Vec<bool>,
    /// Side length (number of trajectory points).
    pub size: usize,
    pub epsilon: f64,
    /// Fraction of ones, diagonal included.
    pub recurrence_rate: f64,
}

impl RecurrenceMatrix {
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.size + j]
    }

    /// Column `j` as a boolean slice.
    pub fn column(&self, j: usize) -> impl Iterator<Item = bool> + '_ {
        (0..self.size).map(move |i| self.get(i, j))
    }
}

fn point_dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Build the recurrence matrix `R(i,j) = Θ(ε − ||x_i − x_j||)` with the
/// boundary convention `Θ(0) = 1`.
pub fn recurrence_matrix(trajectory: &Trajectory, epsilon: f64) -> Result<RecurrenceMatrix> {
    if epsilon < 0.0 {
        return Err(Error::Invalid("epsilon must be non-negative".into()));
    }
    let m = trajectory.rows;
    if m < 2 {
        return Err(Error::Invalid("trajectory needs at least 2 points".into()));
    }
    // Compare on distances, not squared distances, so that a threshold
    // derived from the attractor diameter includes the diameter pair
    // exactly (`Θ(0) = 1`). Only the upper triangle is computed; the
    // matrix is symmetric by construction.
    let upper: Vec<Vec<bool>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let pi = trajectory.point(i);
            (i..m)
                .map(|j| point_dist2(pi, trajectory.point(j)).sqrt() <= epsilon)
                .collect()
        })
        .collect();
    let mut bits = vec![false; m * m];
    let mut ones = 0usize;
    for (i, row) in upper.iter().enumerate() {
        for (off, &b) in row.iter().enumerate() {
            if b {
                let j = i + off;
                bits[i * m + j] = true;
                bits[j * m + i] = true;
                ones += if i == j { 1 } else { 2 };
            }
        }
    }
    Ok(RecurrenceMatrix {
        bits,
        size: m,
        epsilon,
        recurrence_rate: ones as f64 / (m * m) as f64,
    })
}

/// Maximum pairwise distance in the trajectory.
pub fn attractor_diameter(trajectory: &Trajectory) -> f64 {
    let m = trajectory.rows;
    (0..m)
        .into_par_iter()
        .map(|i| {
            let pi = trajectory.point(i);
            (i + 1..m)
                .map(|j| point_dist2(pi, trajectory.point(j)))
                .fold(0.0f64, f64::max)
        })
        .reduce(|| 0.0, f64::max)
        .sqrt()
}

/// Threshold as a fraction of the attractor diameter (0.1 by default in
/// the pipeline).
pub fn epsilon_from_diameter(trajectory: &Trajectory, fraction: f64) -> Result<f64> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Invalid(format!(
            "diameter fraction must be in (0, 1], got {fraction}"
        )));
    }
    let diameter = attractor_diameter(trajectory);
    if diameter == 0.0 {
        return Err(Error::Degenerate(
            "degenerate trajectory: zero attractor diameter".into(),
        ));
    }
    Ok(fraction * diameter)
}

/// Histogram of maximal vertical run lengths: `counts[h]` is the number
/// of maximal columns-wise runs of exactly `h` consecutive ones.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerticalHistogram {
    pub counts: BTreeMap<usize, u64>,
}

impl VerticalHistogram {
    /// Total recurrence points covered by lines of length ≥ `h_min`.
    pub fn weighted_sum(&self, h_min: usize) -> u64 {
        self.counts
            .iter()
            .filter(|(&h, _)| h >= h_min)
            .map(|(&h, &c)| h as u64 * c)
            .sum()
    }

    /// Number of lines of length ≥ `h_min`.
    pub fn line_count(&self, h_min: usize) -> u64 {
        self.counts
            .iter()
            .filter(|(&h, _)| h >= h_min)
            .map(|(_, &c)| c)
            .sum()
    }
}

/// Scan every column for maximal runs of consecutive ones.
pub fn vertical_line_histogram(matrix: &RecurrenceMatrix) -> VerticalHistogram {
    let mut counts = BTreeMap::new();
    for j in 0..matrix.size {
        let mut run = 0usize;
        for bit in matrix.column(j) {
            if bit {
                run += 1;
            } else if run > 0 {
                *counts.entry(run).or_insert(0u64) += 1;
                run = 0;
            }
        }
        if run > 0 {
            *counts.entry(run).or_insert(0u64) += 1;
        }
    }
    VerticalHistogram { counts }
}

/// Mean vertical line length among lines of length ≥ `h_min`, in
/// trajectory steps. `None` when no such line exists; the feature layer
/// maps that to 0 with a quality flag.
pub fn trapping_time(hist: &VerticalHistogram, h_min: usize) -> Result<Option<f64>> {
    if h_min < 1 {
        return Err(Error::Invalid("h_min must be at least 1".into()));
    }
    let lines = hist.line_count(h_min);
    if lines == 0 {
        return Ok(None);
    }
    Ok(Some(hist.weighted_sum(h_min) as f64 / lines as f64))
}

/// Fraction of recurrence points lying in vertical lines of length ≥
/// `h_min`.
pub fn laminarity(hist: &VerticalHistogram, h_min: usize) -> Result<f64> {
    if h_min < 1 {
        return Err(Error::Invalid("h_min must be at least 1".into()));
    }
    let total = hist.weighted_sum(1);
    if total == 0 {
        return Err(Error::Degenerate("empty vertical-line histogram".into()));
    }
    Ok(hist.weighted_sum(h_min) as f64 / total as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::embed;

    fn hist(pairs: &[(usize, u64)]) -> VerticalHistogram {
        VerticalHistogram {
            counts: pairs.iter().cloned().collect(),
        }
    }

    #[test]
    fn three_collinear_points() {
        let t = embed(&[0.0, 1.0, 2.0], 1, 1).unwrap();
        let m = recurrence_matrix(&t, 1.0).unwrap();
        let expected = [
            [true, true, false],
            [true, true, true],
            [false, true, true],
        ];
        for (i, row) in expected.iter().enumerate() {
            for (j, &want) in row.iter().enumerate() {
                assert_eq!(m.get(i, j), want, "({i},{j})");
            }
        }
    }

    #[test]
    fn epsilon_zero_keeps_coincident_points() {
        let t = embed(&[1.0, 2.0, 1.0, 3.0], 1, 1).unwrap();
        let m = recurrence_matrix(&t, 0.0).unwrap();
        assert!(m.get(0, 0) && m.get(1, 1) && m.get(2, 2) && m.get(3, 3));
        assert!(m.get(0, 2) && m.get(2, 0)); // equal values recur at ε = 0
        assert!(!m.get(0, 1));
    }

    #[test]
    fn full_epsilon_gives_all_ones() {
        let t = embed(&[0.0, 5.0, -3.0, 2.0], 1, 2).unwrap();
        let eps = epsilon_from_diameter(&t, 1.0).unwrap();
        let m = recurrence_matrix(&t, eps).unwrap();
        assert_eq!(m.recurrence_rate, 1.0);
    }

    #[test]
    fn unit_circle_diameter() {
        let n = 360;
        let series: Vec<f64> = (0..n + 90)
            .map(|i| (i as f64).to_radians().sin())
            .collect();
        // τ = 90 samples = quarter period gives (sin, cos): the unit circle.
        let t = embed(&series, 90, 2).unwrap();
        let eps = epsilon_from_diameter(&t, 0.1).unwrap();
        assert!((eps - 0.2).abs() < 1e-6, "eps = {eps}");
    }

    #[test]
    fn sine_recurrence_rate_strictly_interior() {
        let series: Vec<f64> = (0..3000)
            .map(|i| (2.0 * std::f64::consts::PI * 146.0 * i as f64 / 20000.0).sin())
            .collect();
        let t = embed(&series, 34, 2).unwrap();
        let eps = epsilon_from_diameter(&t, 0.1).unwrap();
        let m = recurrence_matrix(&t, eps).unwrap();
        assert!(m.recurrence_rate > 0.0 && m.recurrence_rate < 1.0);
    }

    #[test]
    fn histogram_all_ones() {
        let t = embed(&[1.0, 1.0, 1.0, 1.0], 1, 1).unwrap();
        let m = recurrence_matrix(&t, 0.5).unwrap();
        let h = vertical_line_histogram(&m);
        assert_eq!(h.counts, [(4usize, 4u64)].into_iter().collect());
        assert_eq!(trapping_time(&h, 2).unwrap(), Some(4.0));
        assert_eq!(laminarity(&h, 2).unwrap(), 1.0);
    }

    #[test]
    fn histogram_identity_matrix() {
        // Widely separated points: only the diagonal recurs.
        let t = embed(&[0.0, 10.0, 20.0, 30.0, 40.0], 1, 1).unwrap();
        let m = recurrence_matrix(&t, 1.0).unwrap();
        let h = vertical_line_histogram(&m);
        assert_eq!(h.counts, [(1usize, 5u64)].into_iter().collect());
        assert_eq!(trapping_time(&h, 2).unwrap(), None);
        assert_eq!(laminarity(&h, 2).unwrap(), 0.0);
    }

    #[test]
    fn split_column_runs() {
        // Column pattern 1,1,0,1,1,1 -> runs {2, 3}.
        let mut counts = BTreeMap::new();
        let col = [true, true, false, true, true, true];
        let mut run = 0;
        for &b in &col {
            if b {
                run += 1;
            } else if run > 0 {
                *counts.entry(run).or_insert(0u64) += 1;
                run = 0;
            }
        }
        if run > 0 {
            *counts.entry(run).or_insert(0u64) += 1;
        }
        assert_eq!(counts, [(2usize, 1u64), (3, 1)].into_iter().collect());
    }

    #[test]
    fn trapping_time_direct_formula() {
        let h = hist(&[(2, 3), (4, 1)]);
        assert_eq!(trapping_time(&h, 2).unwrap(), Some(2.5));
    }

    #[test]
    fn laminarity_direct_formula() {
        let h = hist(&[(1, 10), (3, 2)]);
        assert_eq!(laminarity(&h, 2).unwrap(), 0.375);
    }

    #[test]
    fn degenerate_diameter_rejected() {
        let t = embed(&[2.0, 2.0, 2.0], 1, 1).unwrap();
        assert!(matches!(
            epsilon_from_diameter(&t, 0.1),
            Err(Error::Degenerate(_))
        ));
    }
}
