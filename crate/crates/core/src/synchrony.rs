//! Interpersonal synchrony measures between two feature tracks: Pearson
//! correlation, time-lagged cross-correlation, dynamic time warping, and a
//! sliding-window driver producing synchrony-over-time curves.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::FeatureTrack;

/// Pearson correlation coefficient of two equal-length samples.
///
/// Errors: length mismatch, fewer than two samples, or zero variance in
/// either input.
pub fn pcc(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidInput(format!(
            "length mismatch: x has {} samples, y has {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 samples for a correlation, found {}",
            x.len()
        )));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 {
        return Err(Error::ZeroVariance("input x is constant".into()));
    }
    if syy == 0.0 {
        return Err(Error::ZeroVariance("input y is constant".into()));
    }
    Ok(sxy / (sxx.sqrt() * syy.sqrt()))
}

/// Correlation at one lag of a time-lagged cross-correlation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LagCorrelation {
    /// Positive lags pair `x[i]` with `y[i + lag]`, i.e. a positive best
    /// lag means y is a delayed copy of x.
    pub lag: i64,
    /// `None` when the overlapped parts were too short or constant.
    pub correlation: Option<f64>,
}

/// Result of [`tlcc`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TlccResult {
    pub best_lag: i64,
    pub best_correlation: f64,
    /// One entry per lag in `-max_lag ..= max_lag`, ascending.
    pub correlations: Vec<LagCorrelation>,
}

/// Overlapping slices of `x` and `y` for a given lag (pairing `x[i]` with
/// `y[i + lag]`), or `None` when fewer than two samples overlap.
fn lag_slices<'a>(x: &'a [f64], y: &'a [f64], lag: i64) -> Option<(&'a [f64], &'a [f64])> {
    let (nx, ny) = (x.len() as i64, y.len() as i64);
    let i_lo = 0.max(-lag);
    let i_hi = nx.min(ny - lag); // exclusive
    if i_hi - i_lo < 2 {
        return None;
    }
    let (a, b) = (i_lo as usize, i_hi as usize);
    Some((&x[a..b], &y[(a as i64 + lag) as usize..(b as i64 + lag) as usize]))
}

/// Time-lagged cross-correlation: Pearson correlation of `x[i]` against
/// `y[i + lag]` for every lag in `-max_lag ..= max_lag`.
///
/// The best lag is the one with the strictly greatest correlation, probing
/// lags in the order 0, −1, +1, −2, +2, …, so ties resolve to the smaller
/// absolute lag and, within one magnitude, to the negative lag. Lags whose
/// overlapped parts are constant (or shorter than two samples) are skipped;
/// if every lag is skipped the inputs carry no usable signal and the
/// function errors with "zero variance".
pub fn tlcc(x: &[f64], y: &[f64], max_lag: usize) -> Result<TlccResult> {
    if x.len() < 2 || y.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 samples in each input, found {} and {}",
            x.len(),
            y.len()
        )));
    }
    let max_lag = max_lag as i64;

    let correlation_at = |lag: i64| -> Option<f64> {
        let (xs, ys) = lag_slices(x, y, lag)?;
        match pcc(xs, ys) {
            Ok(r) => Some(r),
            Err(Error::ZeroVariance(_)) => None,
            // Lengths always match and are >= 2 here.
            Err(_) => None,
        }
    };

    let mut best: Option<(i64, f64)> = None;
    let mut probe = |lag: i64| {
        if let Some(r) = correlation_at(lag) {
            match best {
                Some((_, b)) if r <= b => {}
                _ => best = Some((lag, r)),
            }
        }
    };
    probe(0);
    for m in 1..=max_lag {
        probe(-m);
        probe(m);
    }

    let (best_lag, best_correlation) = best.ok_or_else(|| {
        Error::ZeroVariance("every lag of the inputs is constant or too short".into())
    })?;

    let correlations = (-max_lag..=max_lag)
        .map(|lag| LagCorrelation {
            lag,
            correlation: correlation_at(lag),
        })
        .collect();

    Ok(TlccResult {
        best_lag,
        best_correlation,
        correlations,
    })
}

/// Normalized dynamic-time-warping distance between two sequences.
///
/// Local cost `|x[i] − y[j]|`, steps (1,0), (0,1), (1,1); the accumulated
/// cost of the best path from (0,0) to (n−1,m−1) is divided by `n + m`.
/// With `band = Some(w)` only cells with `|i − j| <= w` are allowed
/// (Sakoe-Chiba band); a band narrower than the length difference admits no
/// path and errors with "infeasible band".
pub fn dtw(x: &[f64], y: &[f64], band: Option<usize>) -> Result<f64> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::InvalidInput(format!(
            "empty input: x has {} samples, y has {}",
            x.len(),
            y.len()
        )));
    }
    let (n, m) = (x.len(), y.len());
    if let Some(w) = band {
        if n.abs_diff(m) > w {
            return Err(Error::Infeasible(format!(
                "infeasible band: width {w} cannot join lengths {n} and {m} \
                 (need at least {})",
                n.abs_diff(m)
            )));
        }
    }
    let in_band = |i: usize, j: usize| band.map_or(true, |w| i.abs_diff(j) <= w);

    let mut prev = vec![f64::INFINITY; m];
    let mut cur = vec![f64::INFINITY; m];
    for i in 0..n {
        for j in 0..m {
            cur[j] = f64::INFINITY;
            if !in_band(i, j) {
                continue;
            }
            let cost = (x[i] - y[j]).abs();
            let from = if i == 0 && j == 0 {
                0.0
            } else {
                let mut b = f64::INFINITY;
                if i > 0 {
                    b = b.min(prev[j]); // (1,0)
                    if j > 0 {
                        b = b.min(prev[j - 1]); // (1,1)
                    }
                }
                if j > 0 {
                    b = b.min(cur[j - 1]); // (0,1)
                }
                b
            };
            cur[j] = from + cost;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    let total = prev[m - 1];
    if !total.is_finite() {
        // Can only happen through the band, which was checked above.
        return Err(Error::Internal(
            "DTW found no path although the band was feasible".into(),
        ));
    }
    Ok(total / (n + m) as f64)
}

/// Synchrony measure used by the sliding-window driver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SyncMeasure {
    Pcc,
    Tlcc,
    Dtw,
}

impl std::fmt::Display for SyncMeasure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SyncMeasure::Pcc => "pcc",
            SyncMeasure::Tlcc => "tlcc",
            SyncMeasure::Dtw => "dtw",
        })
    }
}

/// Parameters of [`sliding_synchrony`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyncParams {
    pub measure: SyncMeasure,
    /// Window length in seconds; must span at least 4 frames.
    pub window: f64,
    /// Step between window starts, in frames.
    pub hop: usize,
    /// Largest lag probed by TLCC, in seconds (capped at window − 3 frames).
    pub max_lag: f64,
    /// Optional Sakoe-Chiba band for DTW, in frames.
    pub dtw_band: Option<usize>,
}

impl Default for SyncParams {
    fn default() -> Self {
        SyncParams {
            measure: SyncMeasure::Pcc,
            window: 4.0,
            hop: 1,
            max_lag: 4.0,
            dtw_band: None,
        }
    }
}

/// A synchrony-over-time curve. `series` holds one value per window,
/// sampled at the window centers (rate = frame rate / hop), with `None`
/// where a window contained missing samples or carried no signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyncCurve {
    pub measure: SyncMeasure,
    pub feature_name: String,
    pub window_frames: usize,
    pub hop_frames: usize,
    pub series: FeatureTrack,
}

/// Slide a window over two tracks of the same feature on the same time axis
/// and compute one synchrony value per window.
///
/// Windows cover frames `[k*hop, k*hop + w)` for `k = 0 ..`, giving
/// `floor((n − w) / hop) + 1` windows over `n = min(len x, len y)` frames
/// (zero windows when the tracks are shorter than the window). A window
/// with any missing sample yields a missing value; for the correlation
/// measures a constant window also yields a missing value rather than an
/// error.
pub fn sliding_synchrony(
    x: &FeatureTrack,
    y: &FeatureTrack,
    params: &SyncParams,
) -> Result<SyncCurve> {
    if x.feature_name != y.feature_name {
        return Err(Error::InvalidInput(format!(
            "tracks measure different features: {:?} vs {:?}",
            x.feature_name, y.feature_name
        )));
    }
    if (x.sample_rate_hz - y.sample_rate_hz).abs() > 1e-9 || !(x.sample_rate_hz > 0.0) {
        return Err(Error::InvalidInput(format!(
            "tracks must share a positive sample rate, found {} and {}",
            x.sample_rate_hz, y.sample_rate_hz
        )));
    }
    if (x.start_time - y.start_time).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!(
            "tracks must share a time axis, start times differ: {} vs {}",
            x.start_time, y.start_time
        )));
    }
    if params.hop == 0 {
        return Err(Error::InvalidInput("hop must be at least 1 frame".into()));
    }
    let rate = x.sample_rate_hz;
    let w = (params.window * rate).round() as i64;
    if w < 4 {
        return Err(Error::InvalidInput(format!(
            "window of {} s spans {w} frames at {rate} Hz; at least 4 frames are required",
            params.window
        )));
    }
    let w = w as usize;

    let n = x.values.len().min(y.values.len());
    let n_windows = if n >= w { (n - w) / params.hop + 1 } else { 0 };

    let max_lag_frames = ((params.max_lag * rate).round() as usize).min(w - 3);

    let mut values: Vec<Option<f64>> = Vec::with_capacity(n_windows);
    let mut xs: Vec<f64> = Vec::with_capacity(w);
    let mut ys: Vec<f64> = Vec::with_capacity(w);
    for k in 0..n_windows {
        let s = k * params.hop;
        xs.clear();
        ys.clear();
        let mut complete = true;
        for i in s..s + w {
            match (x.values[i], y.values[i]) {
                (Some(a), Some(b)) => {
                    xs.push(a);
                    ys.push(b);
                }
                _ => {
                    complete = false;
                    break;
                }
            }
        }
        if !complete {
            values.push(None);
            continue;
        }
        let v = match params.measure {
            SyncMeasure::Pcc => match pcc(&xs, &ys) {
                Ok(r) => Some(r),
                Err(Error::ZeroVariance(_)) => None,
                Err(e) => return Err(e),
            },
            SyncMeasure::Tlcc => match tlcc(&xs, &ys, max_lag_frames) {
                Ok(r) => Some(r.best_correlation),
                Err(Error::ZeroVariance(_)) => None,
                Err(e) => return Err(e),
            },
            SyncMeasure::Dtw => Some(dtw(&xs, &ys, params.dtw_band)?),
        };
        values.push(v);
    }

    // Center of window k in frame coordinates: k*hop + (w-1)/2.
    let center_offset = (w - 1) as f64 / 2.0;
    let series = FeatureTrack {
        participant_id: "pair".into(),
        feature_name: x.feature_name.clone(),
        sample_rate_hz: rate / params.hop as f64,
        start_time: x.start_time + center_offset / rate,
        values,
    };
    Ok(SyncCurve {
        measure: params.measure,
        feature_name: x.feature_name.clone(),
        window_frames: w,
        hop_frames: params.hop,
        series,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn track(name: &str, values: Vec<Option<f64>>) -> FeatureTrack {
        FeatureTrack {
            participant_id: "P".into(),
            feature_name: name.into(),
            sample_rate_hz: 25.0,
            start_time: 0.0,
            values,
        }
    }

    fn present(v: &[f64]) -> Vec<Option<f64>> {
        v.iter().copied().map(Some).collect()
    }

    // --- pcc ---------------------------------------------------------------

    #[test]
    fn pcc_reference_value() {
        let r = pcc(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert!((r - 0.8).abs() < 1e-12, "{r}");
    }

    #[test]
    fn pcc_perfect_and_inverse_correlation() {
        let x = [1.0, 2.0, 3.0, 5.0];
        let y_neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pcc(&x, &x).unwrap() - 1.0).abs() < 1e-12);
        assert!((pcc(&x, &y_neg).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn pcc_is_symmetric_and_affine_invariant() {
        let x = [0.3, 1.7, -0.2, 4.0, 2.2];
        let y = [1.0, 0.5, 2.0, 3.1, -0.4];
        let r = pcc(&x, &y).unwrap();
        assert!((pcc(&y, &x).unwrap() - r).abs() < 1e-12);
        let scaled: Vec<f64> = x.iter().map(|v| 3.0 * v + 7.0).collect();
        assert!((pcc(&scaled, &y).unwrap() - r).abs() < 1e-12);
    }

    #[test]
    fn pcc_errors() {
        let e = pcc(&[1.0, 2.0], &[1.0, 2.0, 3.0]).unwrap_err();
        assert!(e.to_string().contains("length mismatch"), "{e}");
        let e = pcc(&[1.0], &[1.0]).unwrap_err();
        assert!(e.to_string().contains("at least 2"), "{e}");
        let e = pcc(&[2.0, 2.0, 2.0], &[1.0, 2.0, 3.0]).unwrap_err();
        assert!(e.to_string().contains("zero variance"), "{e}");
        assert_eq!(e.exit_code(), 1);
    }

    // --- tlcc --------------------------------------------------------------

    #[test]
    fn tlcc_identical_signals_peak_at_lag_zero() {
        let x = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0];
        let r = tlcc(&x, &x, 3).unwrap();
        assert_eq!(r.best_lag, 0);
        assert!((r.best_correlation - 1.0).abs() < 1e-12);
        assert_eq!(r.correlations.len(), 7);
        assert_eq!(r.correlations[3].lag, 0);
        assert!((r.correlations[3].correlation.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tlcc_detects_a_delay_of_two_frames() {
        // y is x delayed by two frames: the peak must sit at lag +2.
        let x = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0];
        let y = [0.0, 0.0, 3.0, 1.0, 4.0, 1.0, 5.0, 9.0];
        let r = tlcc(&x, &y, 3).unwrap();
        assert_eq!(r.best_lag, 2);
        assert!((r.best_correlation - 1.0).abs() < 1e-12);
        // And the mirrored call peaks at −2.
        let r = tlcc(&y, &x, 3).unwrap();
        assert_eq!(r.best_lag, -2);
    }

    #[test]
    fn tlcc_max_lag_zero_degenerates_to_pcc() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [1.0, 3.0, 2.0, 4.0];
        let r = tlcc(&x, &y, 0).unwrap();
        assert_eq!(r.best_lag, 0);
        assert!((r.best_correlation - 0.8).abs() < 1e-12);
        assert_eq!(r.correlations.len(), 1);
    }

    #[test]
    fn tlcc_ties_prefer_small_then_negative_lags() {
        // Period-2 signals: every even lag correlates perfectly; lag 0 wins.
        let x = [0.0, 1.0, 0.0, 1.0, 0.0, 1.0];
        let r = tlcc(&x, &x, 2).unwrap();
        assert_eq!(r.best_lag, 0);
        // Anti-phase signals: lags −1 and +1 both give r = 1; −1 wins.
        let y = [1.0, 0.0, 1.0, 0.0];
        let x2 = [0.0, 1.0, 0.0, 1.0];
        let r = tlcc(&x2, &y, 1).unwrap();
        assert_eq!(r.best_lag, -1);
        assert!((r.best_correlation - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tlcc_skips_constant_overlaps_and_errors_when_all_skipped() {
        // Constant inputs: every lag is skipped.
        let c = [2.0, 2.0, 2.0, 2.0];
        let e = tlcc(&c, &c, 2).unwrap_err();
        assert!(e.to_string().contains("zero variance"), "{e}");

        // x constant only in the tail that overlaps at large positive lags:
        // those lags are skipped (None) but the result is still Ok.
        let x = [5.0, 1.0, 2.0, 2.0, 2.0, 2.0];
        let y = [5.0, 1.0, 2.0, 2.0, 2.0, 2.0];
        let r = tlcc(&x, &y, 4).unwrap();
        assert_eq!(r.best_lag, 0);
        let at = |lag: i64| {
            r.correlations
                .iter()
                .find(|c| c.lag == lag)
                .unwrap()
                .correlation
        };
        // Lag +4 overlaps x[0..2] with y[4..6] = [2,2]: constant, skipped.
        assert_eq!(at(4), None);
    }

    // --- dtw ---------------------------------------------------------------

    #[test]
    fn dtw_reference_values() {
        assert!((dtw(&[0.0], &[1.0], None).unwrap() - 0.5).abs() < 1e-15);
        let d = dtw(&[1.0, 2.0, 3.0], &[1.0, 2.0, 2.0, 3.0], None).unwrap();
        assert_eq!(d, 0.0);
        let d = dtw(&[0.0, 1.0, 2.0], &[0.0, 2.0], None).unwrap();
        assert!((d - 0.2).abs() < 1e-15, "{d}");
    }

    #[test]
    fn dtw_is_symmetric_and_zero_on_identity() {
        let x = [0.3, 1.7, 0.2, 4.0];
        let y = [1.0, 0.5, 2.0];
        let a = dtw(&x, &y, None).unwrap();
        let b = dtw(&y, &x, None).unwrap();
        assert!((a - b).abs() < 1e-15);
        assert_eq!(dtw(&x, &x, None).unwrap(), 0.0);
    }

    #[test]
    fn dtw_band_feasibility() {
        let e = dtw(&[0.0, 0.0, 0.0, 0.0], &[1.0], Some(0)).unwrap_err();
        assert!(e.to_string().contains("infeasible band"), "{e}");
        assert_eq!(e.exit_code(), 2);

        // A band as wide as the longer input changes nothing.
        let x = [3.0, 1.0, 4.0, 1.0, 5.0];
        let y = [2.0, 7.0, 1.0, 8.0];
        let unbanded = dtw(&x, &y, None).unwrap();
        let wide = dtw(&x, &y, Some(5)).unwrap();
        assert_eq!(unbanded, wide);

        // Narrowing the band can only increase the distance.
        let d1 = dtw(&x, &y, Some(1)).unwrap();
        assert!(d1 >= unbanded - 1e-15);
    }

    #[test]
    fn dtw_empty_input_errors() {
        let e = dtw(&[], &[1.0], None).unwrap_err();
        assert!(e.to_string().contains("empty input"), "{e}");
    }

    // --- sliding_synchrony --------------------------------------------------

    #[test]
    fn sliding_pcc_on_identical_tracks_is_all_ones() {
        let vals: Vec<f64> = (0..10).map(|i| (i as f64 * 0.7).sin()).collect();
        let x = track("F0", present(&vals));
        let y = track("F0", present(&vals));
        let params = SyncParams {
            window: 0.16, // 4 frames at 25 Hz
            ..SyncParams::default()
        };
        let curve = sliding_synchrony(&x, &y, &params).unwrap();
        assert_eq!(curve.series.values.len(), 7); // (10 - 4) / 1 + 1
        for v in &curve.series.values {
            assert!((v.unwrap() - 1.0).abs() < 1e-12);
        }
        assert_eq!(curve.window_frames, 4);
        // First window covers frames 0..4; its center sits at 1.5 frames.
        assert!((curve.series.start_time - 0.06).abs() < 1e-12);
    }

    #[test]
    fn sliding_window_length_formula_with_hop() {
        let vals: Vec<f64> = (0..25).map(|i| i as f64).collect();
        let x = track("F0", present(&vals));
        let y = track("F0", present(&vals));
        let params = SyncParams {
            window: 0.2, // 5 frames
            hop: 3,
            ..SyncParams::default()
        };
        let curve = sliding_synchrony(&x, &y, &params).unwrap();
        assert_eq!(curve.series.values.len(), (25 - 5) / 3 + 1);
        assert!((curve.series.sample_rate_hz - 25.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn sliding_missing_and_constant_windows_give_missing_values() {
        let mut xv = present(&(0..10).map(|i| i as f64).collect::<Vec<_>>());
        xv[5] = None;
        let x = track("F0", xv);
        let y = track("F0", present(&(0..10).map(|i| (i as f64) * 2.0).collect::<Vec<_>>()));
        let params = SyncParams {
            window: 0.16,
            ..SyncParams::default()
        };
        let curve = sliding_synchrony(&x, &y, &params).unwrap();
        // Windows 2..=5 (frames 2..6 .. 5..9) touch the missing sample 5.
        for (k, v) in curve.series.values.iter().enumerate() {
            if (2..=5).contains(&k) {
                assert_eq!(*v, None, "window {k}");
            } else {
                assert!((v.unwrap() - 1.0).abs() < 1e-12, "window {k}");
            }
        }

        // A constant stretch is missing, not an error.
        let xc = track("F0", present(&[1.0; 10]));
        let yv = track("F0", present(&(0..10).map(|i| i as f64).collect::<Vec<_>>()));
        let curve = sliding_synchrony(&xc, &yv, &params).unwrap();
        assert!(curve.series.values.iter().all(Option::is_none));
    }

    #[test]
    fn sliding_dtw_on_identical_tracks_is_zero() {
        let vals: Vec<f64> = (0..12).map(|i| (i as f64).sqrt()).collect();
        let x = track("AU12", present(&vals));
        let y = track("AU12", present(&vals));
        let params = SyncParams {
            measure: SyncMeasure::Dtw,
            window: 0.24,
            ..SyncParams::default()
        };
        let curve = sliding_synchrony(&x, &y, &params).unwrap();
        assert!(!curve.series.values.is_empty());
        for v in &curve.series.values {
            assert_eq!(v.unwrap(), 0.0);
        }
    }

    #[test]
    fn sliding_tlcc_tracks_a_shifted_signal() {
        // y delayed by one frame; within each window TLCC should find r = 1
        // (the lag cap w - 3 >= 1 allows lag 1 for an 8-frame window).
        let base: Vec<f64> = (0..40).map(|i| ((i * 7919) % 23) as f64).collect();
        let xv: Vec<f64> = base[1..33].to_vec();
        let yv: Vec<f64> = base[0..32].to_vec(); // y[i] = x[i-1]
        let x = track("F0", present(&xv));
        let y = track("F0", present(&yv));
        let params = SyncParams {
            measure: SyncMeasure::Tlcc,
            window: 0.32, // 8 frames
            max_lag: 0.08, // 2 frames
            ..SyncParams::default()
        };
        let curve = sliding_synchrony(&x, &y, &params).unwrap();
        for v in &curve.series.values {
            assert!((v.unwrap() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn sliding_rejects_bad_inputs() {
        let x = track("F0", present(&[1.0, 2.0, 3.0, 4.0, 5.0]));
        let mut y = track("F0", present(&[1.0, 2.0, 3.0, 4.0, 5.0]));
        y.feature_name = "loudness".into();
        let e = sliding_synchrony(&x, &y, &SyncParams::default()).unwrap_err();
        assert!(e.to_string().contains("different features"), "{e}");

        let mut y = track("F0", present(&[1.0, 2.0, 3.0, 4.0, 5.0]));
        y.sample_rate_hz = 30.0;
        let e = sliding_synchrony(&x, &y, &SyncParams::default()).unwrap_err();
        assert!(e.to_string().contains("sample rate"), "{e}");

        let y = track("F0", present(&[1.0, 2.0, 3.0, 4.0, 5.0]));
        let e = sliding_synchrony(
            &x,
            &y,
            &SyncParams {
                window: 0.08, // 2 frames: too small
                ..SyncParams::default()
            },
        )
        .unwrap_err();
        assert!(e.to_string().contains("at least 4 frames"), "{e}");
    }

    #[test]
    fn sliding_shorter_than_window_gives_empty_curve() {
        let x = track("F0", present(&[1.0, 2.0, 3.0]));
        let y = track("F0", present(&[1.0, 2.0, 3.0]));
        let params = SyncParams {
            window: 0.2, // 5 frames > 3 samples
            ..SyncParams::default()
        };
        let curve = sliding_synchrony(&x, &y, &params).unwrap();
        assert!(curve.series.values.is_empty());
    }
}
