//! Speech segmentation: energy-based voice activity detection, merging of
//! voiced segments into inter-pausal units (IPUs), and detection of the
//! floor-switch candidates that later get classified as exchanges.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Segment, IPU_GAP_THRESHOLD};

/// Parameters of the energy-based voice activity detector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VadParams {
    /// Analysis frame length in seconds.
    pub frame_len: f64,
    /// Hop between frame starts in seconds; must not exceed `frame_len`.
    pub hop: f64,
    /// Percentile (0..100, exclusive) of the frame energies used as the
    /// noise-floor estimate.
    pub threshold_percentile: f64,
    /// Margin in dB added to the noise floor to obtain the speech threshold.
    pub threshold_margin_db: f64,
    /// Speech runs shorter than this (seconds) are deleted.
    pub min_speech: f64,
    /// Silences shorter than this (seconds) are bridged.
    pub min_silence: f64,
}

impl Default for VadParams {
    fn default() -> Self {
        VadParams {
            frame_len: 0.025,
            hop: 0.010,
            threshold_percentile: 30.0,
            threshold_margin_db: 6.0,
            min_speech: 0.10,
            min_silence: IPU_GAP_THRESHOLD,
        }
    }
}

impl VadParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.hop > 0.0) || !(self.frame_len >= self.hop) {
            return Err(Error::InvalidInput(format!(
                "VAD frame parameters must satisfy frame_len >= hop > 0 \
                 (frame_len = {}, hop = {})",
                self.frame_len, self.hop
            )));
        }
        if !(self.threshold_percentile > 0.0 && self.threshold_percentile < 100.0) {
            return Err(Error::InvalidInput(format!(
                "VAD threshold_percentile must lie in (0, 100), found {}",
                self.threshold_percentile
            )));
        }
        if !(self.min_speech > 0.0) || !(self.min_silence > 0.0) {
            return Err(Error::InvalidInput(format!(
                "VAD min_speech and min_silence must be positive \
                 (min_speech = {}, min_silence = {})",
                self.min_speech, self.min_silence
            )));
        }
        Ok(())
    }
}

/// dB level assigned to frames with zero RMS (pure digital silence).
const SILENCE_FLOOR_DB: f64 = -120.0;

/// Upper bound on the noise-floor estimate. Silence in any sane recording
/// sits below −40 dBFS; clamping here keeps the relative threshold working
/// on recordings that contain no silence at all (e.g. an unbroken tone),
/// where a pure percentile of the frame energies would exceed every frame.
const NOISE_CEILING_DB: f64 = -40.0;

/// Linearly interpolated percentile of an unsorted slice.
fn percentile(values: &[f64], p: f64) -> f64 {
    debug_assert!(!values.is_empty());
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("frame energies are finite"));
    let rank = p / 100.0 * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let frac = rank - lo as f64;
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

/// Detect voiced segments in a mono signal by frame energy.
///
/// Frames of `frame_len` seconds are taken every `hop` seconds; each frame's
/// RMS is converted to dBFS. A frame counts as speech when it exceeds the
/// noise floor (the `threshold_percentile` of all frame levels, clamped to
/// −40 dBFS) by `threshold_margin_db`. Speech runs shorter than `min_speech`
/// are deleted, then silences shorter than `min_silence` are bridged.
///
/// Errors with "empty input" on an empty sample slice.
pub fn energy_vad(samples: &[f32], sample_rate_hz: f64, params: &VadParams) -> Result<Vec<Segment>> {
    if samples.is_empty() {
        return Err(Error::InvalidInput("empty input: no audio samples".into()));
    }
    if !(sample_rate_hz > 0.0) {
        return Err(Error::InvalidInput(format!(
            "sample rate must be positive, found {sample_rate_hz}"
        )));
    }
    params.validate()?;

    let frame_n = ((params.frame_len * sample_rate_hz).round() as usize).max(1);
    let hop_n = ((params.hop * sample_rate_hz).round() as usize).max(1);
    let total = samples.len();

    let mut levels_db = Vec::new();
    let mut start = 0usize;
    loop {
        let end = (start + frame_n).min(total);
        let frame = &samples[start..end];
        let energy: f64 = frame.iter().map(|&s| (s as f64) * (s as f64)).sum();
        let rms = (energy / frame.len() as f64).sqrt();
        let db = if rms > 0.0 {
            (20.0 * rms.log10()).max(SILENCE_FLOOR_DB)
        } else {
            SILENCE_FLOOR_DB
        };
        levels_db.push(db);
        if end == total {
            break;
        }
        start += hop_n;
        if start >= total {
            break;
        }
    }

    let noise_floor = percentile(&levels_db, params.threshold_percentile).min(NOISE_CEILING_DB);
    let threshold = noise_floor + params.threshold_margin_db;

    let duration = total as f64 / sample_rate_hz;
    let hop_t = hop_n as f64 / sample_rate_hz;
    let frame_t = frame_n as f64 / sample_rate_hz;

    // Contiguous speech-frame runs -> raw segments. Frames outlast the hop,
    // so runs separated by fewer silent frames than a frame length overlap
    // in time; those are folded into one segment here (the real silent span
    // in that situation is under min_silence for any frame_len <= 2*hop
    // style settings, and under frame_len in general).
    let mut raw: Vec<Segment> = Vec::new();
    let mut push = |seg: Segment| match raw.last_mut() {
        Some(last) if seg.start < last.end => last.end = last.end.max(seg.end),
        _ => raw.push(seg),
    };
    let mut run_start: Option<usize> = None;
    for (i, &db) in levels_db.iter().enumerate() {
        let speech = db > threshold;
        match (speech, run_start) {
            (true, None) => run_start = Some(i),
            (false, Some(s)) => {
                push(frame_run_to_segment(s, i - 1, hop_t, frame_t, duration));
                run_start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = run_start {
        push(frame_run_to_segment(s, levels_db.len() - 1, hop_t, frame_t, duration));
    }
    drop(push);

    // Delete too-short speech runs, then bridge short silences. Bridging has
    // the same semantics as IPU merging, so it reuses that routine.
    raw.retain(|s| s.duration() >= params.min_speech);
    merge_to_ipus(&raw, params.min_silence)
}

fn frame_run_to_segment(
    first: usize,
    last: usize,
    hop_t: f64,
    frame_t: f64,
    duration: f64,
) -> Segment {
    let start = first as f64 * hop_t;
    let end = (last as f64 * hop_t + frame_t).min(duration);
    Segment::new(start, end)
}

/// Merge voiced segments into IPUs: consecutive segments separated by a gap
/// shorter than `gap_threshold` become one unit. With the default threshold
/// of 50 ms this implements the IPU definition; with a threshold of 0 the
/// input is returned unchanged.
///
/// The input must be sorted by start with positive durations and no
/// overlaps; anything else errors with "invalid VAD sequence".
pub fn merge_to_ipus(vad: &[Segment], gap_threshold: f64) -> Result<Vec<Segment>> {
    if !(gap_threshold >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "gap threshold must be non-negative, found {gap_threshold}"
        )));
    }
    for (i, s) in vad.iter().enumerate() {
        if !(s.start < s.end) {
            return Err(Error::InvalidInput(format!(
                "invalid VAD sequence: segment {i} has non-positive duration ({} .. {})",
                s.start, s.end
            )));
        }
        if i > 0 && s.start < vad[i - 1].end {
            return Err(Error::InvalidInput(format!(
                "invalid VAD sequence: segment {i} starts at {} before segment {} ends at {}",
                s.start,
                i - 1,
                vad[i - 1].end
            )));
        }
    }

    let mut out: Vec<Segment> = Vec::with_capacity(vad.len());
    for &s in vad {
        match out.last_mut() {
            Some(cur) if s.start - cur.end < gap_threshold => cur.end = s.end,
            _ => out.push(s),
        }
    }
    Ok(out)
}

/// A point where the non-holder of the floor started an IPU: the raw
/// material of exchange classification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchCandidate {
    /// Floor holder just before the onset.
    pub speaker_id: String,
    /// Participant whose IPU onset created the candidate.
    pub initiator_id: String,
    /// Onset time; equals `initiator_first_ipu.start`.
    pub onset: f64,
    /// The speaker's IPU active at the onset, or their latest IPU before it.
    pub speaker_last_ipu: Segment,
    /// The initiator's IPU starting at the onset.
    pub initiator_first_ipu: Segment,
}

/// Latest IPU of `segs` with `start < bound`, as (index, segment).
fn latest_before(segs: &[Segment], bound: f64) -> Option<(usize, Segment)> {
    // partition_point: first index whose start is >= bound.
    let i = segs.partition_point(|s| s.start < bound);
    if i == 0 {
        None
    } else {
        Some((i - 1, segs[i - 1]))
    }
}

fn holder_by_onset<'a>(
    a_id: &'a str,
    ipus_a: &[Segment],
    b_id: &'a str,
    ipus_b: &[Segment],
    mut bound: f64,
) -> Option<&'a str> {
    // Latest onset strictly before `bound` wins; exact onset ties break
    // toward whoever held the floor before the tied onsets.
    loop {
        let la = latest_before(ipus_a, bound);
        let lb = latest_before(ipus_b, bound);
        match (la, lb) {
            (None, None) => return None,
            (Some(_), None) => return Some(a_id),
            (None, Some(_)) => return Some(b_id),
            (Some((_, sa)), Some((_, sb))) => {
                if sa.start > sb.start {
                    return Some(a_id);
                } else if sb.start > sa.start {
                    return Some(b_id);
                }
                bound = sa.start;
            }
        }
    }
}

fn holder_impl<'a>(
    a_id: &'a str,
    ipus_a: &[Segment],
    b_id: &'a str,
    ipus_b: &[Segment],
    t: f64,
    inclusive: bool,
) -> Option<&'a str> {
    // "Active" at t: contains t. For the left-limit variant (used when
    // probing the instant just before an onset) an IPU is active when
    // start < t <= end.
    let active = |s: &Segment| {
        if inclusive {
            s.contains(t)
        } else {
            s.start < t && t <= s.end
        }
    };

    let latest = |segs: &[Segment]| -> Option<Segment> {
        let i = if inclusive {
            segs.partition_point(|s| s.start <= t)
        } else {
            segs.partition_point(|s| s.start < t)
        };
        if i == 0 {
            None
        } else {
            Some(segs[i - 1])
        }
    };

    let la = latest(ipus_a);
    let lb = latest(ipus_b);
    let act_a = la.as_ref().map_or(false, active);
    let act_b = lb.as_ref().map_or(false, active);

    match (act_a, act_b) {
        (true, false) => Some(a_id),
        (false, true) => Some(b_id),
        (true, true) => {
            let (sa, sb) = (la.unwrap(), lb.unwrap());
            if sa.start > sb.start {
                Some(a_id)
            } else if sb.start > sa.start {
                Some(b_id)
            } else {
                holder_by_onset(a_id, ipus_a, b_id, ipus_b, sa.start)
            }
        }
        (false, false) => match (la, lb) {
            (None, None) => None,
            (Some(_), None) => Some(a_id),
            (None, Some(_)) => Some(b_id),
            (Some(sa), Some(sb)) => {
                if sa.start > sb.start {
                    Some(a_id)
                } else if sb.start > sa.start {
                    Some(b_id)
                } else {
                    holder_by_onset(a_id, ipus_a, b_id, ipus_b, sa.start)
                }
            }
        },
    }
}

/// Who holds the floor at time `t`.
///
/// The holder is the participant with an IPU active at `t` (the later onset
/// wins when both are speaking); when neither is speaking it is the
/// participant whose IPU *started* most recently at or before `t` — i.e.
/// whoever is currently, or was most recently, producing an IPU. Returns
/// `None` before the first IPU of the session. Exact onset ties break
/// toward the previous floor holder.
pub fn floor_holder_at<'a>(
    a_id: &'a str,
    ipus_a: &[Segment],
    b_id: &'a str,
    ipus_b: &[Segment],
    t: f64,
) -> Option<&'a str> {
    holder_impl(a_id, ipus_a, b_id, ipus_b, t, true)
}

/// Floor holder in the left limit `t − ε`: IPUs starting exactly at `t` are
/// not yet considered begun, and an IPU ending exactly at `t` still counts
/// as active. Used to decide who held the floor when an onset happened.
pub fn floor_holder_before<'a>(
    a_id: &'a str,
    ipus_a: &[Segment],
    b_id: &'a str,
    ipus_b: &[Segment],
    t: f64,
) -> Option<&'a str> {
    holder_impl(a_id, ipus_a, b_id, ipus_b, t, false)
}

fn check_ipus(owner: &str, segs: &[Segment]) -> Result<()> {
    for (i, s) in segs.iter().enumerate() {
        if !(s.start < s.end) {
            return Err(Error::InvalidInput(format!(
                "invalid VAD sequence: IPU {i} of {owner} has non-positive duration ({} .. {})",
                s.start, s.end
            )));
        }
        if i > 0 && s.start < segs[i - 1].end {
            return Err(Error::InvalidInput(format!(
                "invalid VAD sequence: IPU {i} of {owner} overlaps the previous one"
            )));
        }
    }
    Ok(())
}

/// Find every IPU onset at which the floor was held by the *other*
/// participant: each such onset is a switch candidate with that other
/// participant as `speaker` and the onset's owner as `initiator`. Onsets
/// while the same participant already held the floor (self-continuations)
/// and onsets before anyone has spoken are skipped.
///
/// Candidates are returned sorted by onset; the roles of `a` and `b` are
/// symmetric.
pub fn detect_switch_candidates(
    a_id: &str,
    ipus_a: &[Segment],
    b_id: &str,
    ipus_b: &[Segment],
) -> Result<Vec<SwitchCandidate>> {
    if a_id == b_id {
        return Err(Error::InvalidInput(format!(
            "participants must have distinct ids, both are {a_id:?}"
        )));
    }
    check_ipus(a_id, ipus_a)?;
    check_ipus(b_id, ipus_b)?;

    let mut out = Vec::new();
    let mut scan = |init_id: &str, init_ipus: &[Segment], other_id: &str, other_ipus: &[Segment]| {
        for ipu in init_ipus {
            let holder = floor_holder_before(init_id, init_ipus, other_id, other_ipus, ipu.start);
            if holder == Some(other_id) {
                let speaker_last = latest_before(other_ipus, ipu.start)
                    .expect("floor holder has an IPU before the onset")
                    .1;
                out.push(SwitchCandidate {
                    speaker_id: other_id.to_string(),
                    initiator_id: init_id.to_string(),
                    onset: ipu.start,
                    speaker_last_ipu: speaker_last,
                    initiator_first_ipu: *ipu,
                });
            }
        }
    };
    scan(a_id, ipus_a, b_id, ipus_b);
    scan(b_id, ipus_b, a_id, ipus_a);

    out.sort_by(|x, y| {
        x.onset
            .partial_cmp(&y.onset)
            .expect("onsets are finite")
            .then_with(|| x.initiator_id.cmp(&y.initiator_id))
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(a: f64, b: f64) -> Segment {
        Segment::new(a, b)
    }

    fn tone(duration: f64, rate: f64, amplitude: f32) -> Vec<f32> {
        let n = (duration * rate) as usize;
        (0..n)
            .map(|i| amplitude * (2.0 * std::f32::consts::PI * 220.0 * i as f32 / rate as f32).sin())
            .collect()
    }

    // --- energy_vad -------------------------------------------------------

    #[test]
    fn vad_on_digital_silence_is_empty() {
        let samples = vec![0.0f32; 16_000];
        let segs = energy_vad(&samples, 16_000.0, &VadParams::default()).unwrap();
        assert!(segs.is_empty(), "{segs:?}");
    }

    #[test]
    fn vad_on_constant_tone_is_one_full_segment() {
        let samples = tone(2.0, 16_000.0, 0.9);
        let segs = energy_vad(&samples, 16_000.0, &VadParams::default()).unwrap();
        assert_eq!(segs.len(), 1, "{segs:?}");
        assert!(segs[0].start.abs() < 0.05, "{segs:?}");
        assert!((segs[0].end - 2.0).abs() < 0.05, "{segs:?}");
    }

    #[test]
    fn vad_bridges_a_30ms_dropout() {
        // 1 s tone, 30 ms silence, 1 s tone: the silence is below
        // min_silence (50 ms) and must be bridged into one segment.
        let rate = 16_000.0;
        let mut samples = tone(1.0, rate, 0.9);
        samples.extend(std::iter::repeat(0.0f32).take((0.030 * rate) as usize));
        samples.extend(tone(1.0, rate, 0.9));
        let segs = energy_vad(&samples, rate, &VadParams::default()).unwrap();
        assert_eq!(segs.len(), 1, "{segs:?}");
        assert!((segs[0].end - segs[0].start - 2.03).abs() < 0.08, "{segs:?}");
    }

    #[test]
    fn vad_splits_on_a_long_pause_and_drops_short_bursts() {
        let rate = 16_000.0;
        let mut samples = tone(0.8, rate, 0.9);
        samples.extend(std::iter::repeat(0.0f32).take((0.5 * rate) as usize));
        // 40 ms burst: below min_speech (100 ms), must be deleted.
        samples.extend(tone(0.040, rate, 0.9));
        samples.extend(std::iter::repeat(0.0f32).take((0.5 * rate) as usize));
        samples.extend(tone(0.8, rate, 0.9));
        let segs = energy_vad(&samples, rate, &VadParams::default()).unwrap();
        assert_eq!(segs.len(), 2, "{segs:?}");
        assert!(segs[0].start < 0.05 && (segs[0].end - 0.8).abs() < 0.05, "{segs:?}");
        assert!((segs[1].start - 1.84).abs() < 0.06, "{segs:?}");
    }

    #[test]
    fn vad_quiet_speech_over_quieter_noise_is_detected() {
        // Noise floor at -60 dBFS (amplitude 1e-3), speech at -20 dBFS.
        let rate = 16_000.0;
        let mut samples: Vec<f32> = (0..(rate as usize))
            .map(|i| 1e-3 * if i % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        samples.extend(tone(1.0, rate, 0.1));
        let segs = energy_vad(&samples, rate, &VadParams::default()).unwrap();
        assert_eq!(segs.len(), 1, "{segs:?}");
        assert!((segs[0].start - 1.0).abs() < 0.05, "{segs:?}");
    }

    #[test]
    fn vad_empty_input_errors() {
        let err = energy_vad(&[], 16_000.0, &VadParams::default()).unwrap_err();
        assert!(err.to_string().contains("empty input"), "{err}");
    }

    #[test]
    fn vad_rejects_bad_params() {
        let mut p = VadParams::default();
        p.hop = 0.05; // hop > frame_len
        assert!(energy_vad(&[0.0; 100], 16_000.0, &p).is_err());
        let mut p = VadParams::default();
        p.threshold_percentile = 100.0;
        assert!(energy_vad(&[0.0; 100], 16_000.0, &p).is_err());
    }

    #[test]
    fn vad_raising_margin_never_adds_speech_time() {
        let rate = 16_000.0;
        let mut samples = tone(0.6, rate, 0.5);
        samples.extend(std::iter::repeat(0.0f32).take((0.3 * rate) as usize));
        samples.extend(tone(0.4, rate, 0.05));
        samples.extend(std::iter::repeat(0.0f32).take((0.3 * rate) as usize));
        samples.extend(tone(0.5, rate, 0.9));
        let mut prev_total = f64::INFINITY;
        for margin in [3.0, 6.0, 12.0, 24.0, 48.0] {
            let params = VadParams {
                threshold_margin_db: margin,
                ..VadParams::default()
            };
            let segs = energy_vad(&samples, rate, &params).unwrap();
            let total: f64 = segs.iter().map(Segment::duration).sum();
            assert!(
                total <= prev_total + 1e-9,
                "margin {margin} increased speech time: {total} > {prev_total}"
            );
            prev_total = total;
        }
    }

    // --- merge_to_ipus ----------------------------------------------------

    #[test]
    fn merge_bridges_a_30ms_gap() {
        let merged = merge_to_ipus(&[seg(0.0, 1.0), seg(1.03, 2.0)], 0.05).unwrap();
        assert_eq!(merged, vec![seg(0.0, 2.0)]);
    }

    #[test]
    fn merge_keeps_a_100ms_gap() {
        let input = [seg(0.0, 1.0), seg(1.1, 2.0)];
        let merged = merge_to_ipus(&input, 0.05).unwrap();
        assert_eq!(merged, input.to_vec());
    }

    #[test]
    fn merge_empty_input_is_empty() {
        assert_eq!(merge_to_ipus(&[], 0.05).unwrap(), vec![]);
    }

    #[test]
    fn merge_zero_threshold_is_identity() {
        let input = [seg(0.0, 1.0), seg(1.0, 2.0), seg(2.5, 3.0)];
        assert_eq!(merge_to_ipus(&input, 0.0).unwrap(), input.to_vec());
    }

    #[test]
    fn merge_is_idempotent() {
        let input = [
            seg(0.0, 0.4),
            seg(0.42, 1.0),
            seg(1.2, 1.21),
            seg(1.25, 2.0),
            seg(9.0, 9.5),
        ];
        let once = merge_to_ipus(&input, 0.05).unwrap();
        let twice = merge_to_ipus(&once, 0.05).unwrap();
        assert_eq!(once, twice);
        // Every surviving gap is at least the threshold.
        for w in once.windows(2) {
            assert!(w[1].start - w[0].end >= 0.05);
        }
    }

    #[test]
    fn merge_rejects_unsorted_or_overlapping_input() {
        let err = merge_to_ipus(&[seg(1.0, 2.0), seg(0.0, 0.5)], 0.05).unwrap_err();
        assert!(err.to_string().contains("invalid VAD sequence"), "{err}");
        let err = merge_to_ipus(&[seg(0.0, 1.0), seg(0.5, 2.0)], 0.05).unwrap_err();
        assert!(err.to_string().contains("invalid VAD sequence"), "{err}");
        let err = merge_to_ipus(&[seg(1.0, 1.0)], 0.05).unwrap_err();
        assert!(err.to_string().contains("invalid VAD sequence"), "{err}");
    }

    // --- floor holder -----------------------------------------------------

    #[test]
    fn floor_holder_tracks_latest_onset() {
        let a = [seg(0.0, 5.0), seg(6.0, 10.0)];
        let b = [seg(3.0, 3.5)];
        let at = |t| floor_holder_at("A", &a, "B", &b, t);
        assert_eq!(at(-1.0), None);
        assert_eq!(at(1.0), Some("A"));
        // During B's backchannel both are active; B started later.
        assert_eq!(at(3.2), Some("B"));
        // A's IPU is still active after B's ended: active trumps recency of
        // a finished IPU.
        assert_eq!(at(4.0), Some("A"));
        // In the 5..6 silence, A's 0..5 IPU ended but B's onset at 3 is not
        // newer than A's at 0? A started at 0, B at 3 -> B is the most
        // recent *starter*, but A's second IPU has not begun yet.
        assert_eq!(at(5.5), Some("B"));
        assert_eq!(at(7.0), Some("A"));
    }

    #[test]
    fn floor_holder_before_excludes_the_onset_itself() {
        let a = [seg(0.0, 5.0)];
        let b = [seg(5.2, 8.0)];
        assert_eq!(floor_holder_before("A", &a, "B", &b, 5.2), Some("A"));
        assert_eq!(floor_holder_at("A", &a, "B", &b, 5.2), Some("B"));
        // An IPU ending exactly at t still holds in the left limit.
        assert_eq!(floor_holder_before("A", &a, "B", &b, 5.0), Some("A"));
    }

    // --- detect_switch_candidates ------------------------------------------

    #[test]
    fn candidates_for_backchannel_and_reclaim() {
        // A speaks 0..5 and 6..10; B produces a short IPU at 3..3.5.
        // Exactly two candidates: B's onset at 3 (speaker A), and A's onset
        // at 6 (speaker B, who spoke most recently during the silence).
        let a = [seg(0.0, 5.0), seg(6.0, 10.0)];
        let b = [seg(3.0, 3.5)];
        let cands = detect_switch_candidates("A", &a, "B", &b).unwrap();
        assert_eq!(cands.len(), 2, "{cands:?}");

        assert_eq!(cands[0].initiator_id, "B");
        assert_eq!(cands[0].speaker_id, "A");
        assert_eq!(cands[0].onset, 3.0);
        assert_eq!(cands[0].speaker_last_ipu, seg(0.0, 5.0));
        assert_eq!(cands[0].initiator_first_ipu, seg(3.0, 3.5));

        assert_eq!(cands[1].initiator_id, "A");
        assert_eq!(cands[1].speaker_id, "B");
        assert_eq!(cands[1].onset, 6.0);
        assert_eq!(cands[1].speaker_last_ipu, seg(3.0, 3.5));
        assert_eq!(cands[1].initiator_first_ipu, seg(6.0, 10.0));
    }

    #[test]
    fn self_continuations_produce_no_candidate() {
        // One participant speaking in several IPUs, the other silent.
        let a = [seg(0.0, 1.0), seg(1.5, 2.0), seg(3.0, 4.0)];
        let cands = detect_switch_candidates("A", &a, "B", &[]).unwrap();
        assert!(cands.is_empty(), "{cands:?}");
    }

    #[test]
    fn smooth_handover_is_one_candidate() {
        let a = [seg(0.0, 5.0)];
        let b = [seg(5.2, 8.0)];
        let cands = detect_switch_candidates("A", &a, "B", &b).unwrap();
        assert_eq!(cands.len(), 1);
        assert_eq!(cands[0].speaker_id, "A");
        assert_eq!(cands[0].initiator_id, "B");
        assert_eq!(cands[0].onset, 5.2);
    }

    #[test]
    fn consecutive_listener_onsets_during_one_ipu_each_count() {
        // B backchannels twice inside A's single long IPU: the holder at
        // both onsets is A (active IPU wins), so both count.
        let a = [seg(0.0, 10.0)];
        let b = [seg(2.0, 2.4), seg(6.0, 6.5)];
        let cands = detect_switch_candidates("A", &a, "B", &b).unwrap();
        assert_eq!(cands.len(), 2, "{cands:?}");
        assert!(cands.iter().all(|c| c.speaker_id == "A"));
        assert_eq!(cands[0].onset, 2.0);
        assert_eq!(cands[1].onset, 6.0);
        assert_eq!(cands[1].speaker_last_ipu, seg(0.0, 10.0));
    }

    #[test]
    fn candidate_detection_is_symmetric_in_argument_order() {
        let a = [seg(0.0, 5.0), seg(6.0, 10.0), seg(12.0, 13.0)];
        let b = [seg(3.0, 3.5), seg(9.5, 11.0)];
        let ab = detect_switch_candidates("A", &a, "B", &b).unwrap();
        let ba = detect_switch_candidates("B", &b, "A", &a).unwrap();
        assert_eq!(ab, ba);
    }

    #[test]
    fn candidate_detection_rejects_invalid_ipus() {
        let err =
            detect_switch_candidates("A", &[seg(2.0, 1.0)], "B", &[]).unwrap_err();
        assert!(err.to_string().contains("invalid VAD sequence"), "{err}");
        let err = detect_switch_candidates("A", &[], "A", &[]).unwrap_err();
        assert!(err.to_string().contains("distinct ids"), "{err}");
    }
}
