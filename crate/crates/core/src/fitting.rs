//! Exponential decay-rate fitting shared by the experiment modules.
//!
//! The fit is ordinary least squares on log(gap) over the final half of
//! the samples, with the gap floored at 1e-14 so transient exact zeros do
//! not produce log(0).

use serde::{Deserialize, Serialize};

pub const GAP_FLOOR: f64 = 1e-14;

/// Classification of a determination experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    DeterminingObserved,
    NotDetermining,
    Inconclusive,
}

/// Result of fitting gap(t) ~ C exp(-beta t).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DecayFit {
    /// Fitted decay exponent (positive means the gap shrinks).
    pub beta: f64,
    /// Coefficient of determination of the log-linear fit.
    pub r_squared: f64,
    /// log(gap) value at the start of the fitted window.
    pub log_intercept: f64,
    /// Index of the first sample used in the fit.
    pub window_start: usize,
}

/// Slopes below this are indistinguishable from float noise on a flat
/// gap series and count as "no decay".
pub const BETA_MIN: f64 = 1e-8;

impl DecayFit {
    pub fn verdict(&self, r2_threshold: f64) -> Verdict {
        if self.beta > BETA_MIN && self.r_squared >= r2_threshold {
            Verdict::DeterminingObserved
        } else if self.beta <= BETA_MIN {
            Verdict::NotDetermining
        } else {
            Verdict::Inconclusive
        }
    }
}

/// Fit the tail (final 50%) of a gap series against exp(-beta t).
pub fn fit_decay(times: &[f64], gaps: &[f64]) -> DecayFit {
    assert_eq!(times.len(), gaps.len());
    assert!(times.len() >= 2, "need at least two samples to fit");
    let start = times.len() / 2;
    fit_decay_window(times, gaps, start)
}

pub fn fit_decay_window(times: &[f64], gaps: &[f64], start: usize) -> DecayFit {
    let xs = &times[start..];
    let ys: Vec<f64> = gaps[start..].iter().map(|g| g.max(GAP_FLOOR).ln()).collect();
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
        syy += (y - mean_y) * (y - mean_y);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let r_squared = if sxx > 0.0 && syy > 0.0 {
        (sxy * sxy) / (sxx * syy)
    } else {
        // a perfectly flat series is a perfect fit with zero slope
        if syy == 0.0 { 1.0 } else { 0.0 }
    };
    DecayFit {
        beta: -slope,
        r_squared,
        log_intercept: mean_y - slope * (xs[0] - mean_x),
        window_start: start,
    }
}

/// Fit a gap series that may saturate before the end of the run, either
/// at machine level or at the integrator's consistency floor. The
/// saturation level is estimated from the tail of the series and the fit
/// window is the last half of the samples still clearly above it, so a
/// gap that has converged does not wash out the fitted slope.
pub fn fit_decay_active(times: &[f64], gaps: &[f64]) -> DecayFit {
    let tail_len = (gaps.len() / 10).max(5).min(gaps.len());
    let mut tail: Vec<f64> = gaps[gaps.len() - tail_len..].to_vec();
    tail.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let tail_floor = tail[tail.len() / 2];
    let threshold = (10.0 * tail_floor).max(100.0 * GAP_FLOOR);
    let last_active = gaps.iter().rposition(|&g| g > threshold);
    match last_active {
        Some(end) if end >= 3 => {
            let start = end / 2;
            fit_decay_window(&times[..=end], &gaps[..=end], start)
        }
        _ => fit_decay(times, gaps),
    }
}

/// Fraction of steps on which the log-gap decreases, over the fitted window.
pub fn monotone_decrease_fraction(gaps: &[f64], start: usize) -> f64 {
    let tail = &gaps[start..];
    if tail.len() < 2 {
        return 1.0;
    }
    let mut down = 0usize;
    for w in tail.windows(2) {
        if w[1].max(GAP_FLOOR) <= w[0].max(GAP_FLOOR) {
            down += 1;
        }
    }
    down as f64 / (tail.len() - 1) as f64
}
