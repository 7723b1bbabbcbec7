//! Corpus statistics: track normalization, per-exchange interval means,
//! timing distributions per exchange type, role asymmetries, onset-aligned
//! average curves, and feature comparisons between exchange groups.

pub mod ttest;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    Anchors, Exchange, ExchangeRole, ExchangeType, FeatureTrack, Intent, Outcome, Role,
    SessionRecord,
};
pub use ttest::{student_t_two_sided_p, welch_t_test, TTestResult};

// ---------------------------------------------------------------------------
// Normalization
// ---------------------------------------------------------------------------

/// Z-score a track in place (population standard deviation), preserving
/// missing samples. A constant track maps to all zeros. Fewer than two
/// present samples error: there is nothing to standardize against.
pub fn normalize_track(track: &FeatureTrack) -> Result<FeatureTrack> {
    let present: Vec<f64> = track.values.iter().filter_map(|v| *v).collect();
    if present.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "track {} of {} has {} present samples; at least 2 are required to normalize",
            track.feature_name,
            track.participant_id,
            present.len()
        )));
    }
    let n = present.len() as f64;
    let mean = present.iter().sum::<f64>() / n;
    let var = present.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let std = var.sqrt();

    let values = track
        .values
        .iter()
        .map(|v| {
            v.map(|x| if std == 0.0 { 0.0 } else { (x - mean) / std })
        })
        .collect();
    Ok(FeatureTrack {
        values,
        ..track.clone()
    })
}

// ---------------------------------------------------------------------------
// Interval means
// ---------------------------------------------------------------------------

/// Named sub-interval of an exchange, resolved against its anchors. All
/// intervals are half-open `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntervalSpec {
    /// The speaker's last IPU: `[t1, t2)`.
    Taken,
    /// Silence between the speaker's end and the initiator's onset:
    /// `[t2, t3)`; empty when the exchange overlapped.
    Gap,
    /// The initiator's first IPU: `[t3, t4)`.
    Taker,
    /// The whole exchange: `[t1, t4)`.
    Full,
}

impl IntervalSpec {
    pub fn resolve(&self, a: &Anchors) -> (f64, f64) {
        match self {
            IntervalSpec::Taken => (a.t1, a.t2),
            IntervalSpec::Gap => (a.t2, a.t3),
            IntervalSpec::Taker => (a.t3, a.t4),
            IntervalSpec::Full => (a.t1, a.t4),
        }
    }
}

/// Mean of the track over one interval of an exchange, skipping missing
/// samples. Returns `Ok(None)` when the interval is empty or holds no
/// present samples. The track must belong to the participant playing
/// `role` in this exchange.
pub fn interval_mean(
    track: &FeatureTrack,
    exchange: &Exchange,
    interval: IntervalSpec,
    role: ExchangeRole,
) -> Result<Option<f64>> {
    let expected = match role {
        ExchangeRole::Speaker => &exchange.speaker_id,
        ExchangeRole::Initiator => &exchange.initiator_id,
    };
    if &track.participant_id != expected {
        return Err(Error::InvalidInput(format!(
            "track belongs to {:?} but the exchange's {role} is {expected:?}",
            track.participant_id
        )));
    }
    let (start, end) = interval.resolve(&exchange.anchors);
    if !(start < end) {
        return Ok(None);
    }
    let mut sum = 0.0;
    let mut n = 0usize;
    for i in track.indices_in(start, end) {
        if let Some(v) = track.values[i] {
            sum += v;
            n += 1;
        }
    }
    Ok(if n == 0 { None } else { Some(sum / n as f64) })
}

// ---------------------------------------------------------------------------
// Distribution summaries and timing statistics
// ---------------------------------------------------------------------------

/// Five-number-style summary of a sample; all fields except `n` are `None`
/// when the sample is empty, and `std` additionally requires n >= 2
/// (sample standard deviation).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistributionSummary {
    pub n: usize,
    pub mean: Option<f64>,
    pub median: Option<f64>,
    pub std: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
}

impl DistributionSummary {
    pub fn from_values(values: &[f64]) -> Self {
        if values.is_empty() {
            return DistributionSummary {
                n: 0,
                mean: None,
                median: None,
                std: None,
                min: None,
                max: None,
            };
        }
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let mut sorted = values.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
        let median = if n % 2 == 1 {
            sorted[n / 2]
        } else {
            (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
        };
        let std = if n >= 2 {
            let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
            Some((ss / (n as f64 - 1.0)).sqrt())
        } else {
            None
        };
        DistributionSummary {
            n,
            mean: Some(mean),
            median: Some(median),
            std,
            min: Some(sorted[0]),
            max: Some(sorted[n - 1]),
        }
    }
}

/// Timing distributions of one exchange group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingEntry {
    pub count: usize,
    /// Duration of the initiator's first IPU, `t4 − t3`.
    pub first_ipu_duration: DistributionSummary,
    /// Distance from the speaker's IPU onset to the exchange onset, `t3 − t1`.
    pub onset_distance: DistributionSummary,
    /// Share of exchanges with positive overlap (recomputed from anchors).
    pub overlap_rate: f64,
    /// Overlap durations over the overlapped exchanges only.
    pub overlap_duration: DistributionSummary,
}

/// Timing distributions per exchange group. Keys: the three type names
/// plus `interruption_successful`, `interruption_failed`,
/// `interruption_cooperative` and `interruption_competitive`; groups
/// without exchanges are omitted, so an empty corpus yields an empty map.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TimingReport {
    pub groups: BTreeMap<String, TimingEntry>,
}

fn timing_entry(exchanges: &[&Exchange]) -> TimingEntry {
    let first_ipu: Vec<f64> = exchanges
        .iter()
        .map(|e| e.anchors.t4 - e.anchors.t3)
        .collect();
    let onset_dist: Vec<f64> = exchanges
        .iter()
        .map(|e| e.anchors.t3 - e.anchors.t1)
        .collect();
    let overlaps: Vec<f64> = exchanges
        .iter()
        .map(|e| e.anchors.overlap())
        .filter(|o| *o > 0.0)
        .collect();
    TimingEntry {
        count: exchanges.len(),
        first_ipu_duration: DistributionSummary::from_values(&first_ipu),
        onset_distance: DistributionSummary::from_values(&onset_dist),
        overlap_rate: overlaps.len() as f64 / exchanges.len() as f64,
        overlap_duration: DistributionSummary::from_values(&overlaps),
    }
}

/// Compute timing distributions for every exchange group across sessions.
pub fn timing_stats(sessions: &[SessionRecord]) -> TimingReport {
    let all: Vec<&Exchange> = sessions.iter().flat_map(|s| s.exchanges.iter()).collect();

    let mut groups: BTreeMap<String, Vec<&Exchange>> = BTreeMap::new();
    for e in all {
        let type_key = e.kind.to_string();
        groups.entry(type_key).or_default().push(e);
        if e.kind == ExchangeType::Interruption {
            match e.outcome {
                Outcome::Successful => groups
                    .entry("interruption_successful".into())
                    .or_default()
                    .push(e),
                Outcome::Failed => groups
                    .entry("interruption_failed".into())
                    .or_default()
                    .push(e),
                Outcome::Unknown => {}
            }
            match e.intent {
                Intent::Cooperative => groups
                    .entry("interruption_cooperative".into())
                    .or_default()
                    .push(e),
                Intent::Competitive => groups
                    .entry("interruption_competitive".into())
                    .or_default()
                    .push(e),
                Intent::Unknown => {}
            }
        }
    }

    TimingReport {
        groups: groups
            .into_iter()
            .map(|(k, v)| (k, timing_entry(&v)))
            .collect(),
    }
}

// ---------------------------------------------------------------------------
// Role statistics
// ---------------------------------------------------------------------------

/// A value per conversational role.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerRole<T> {
    pub expert: T,
    pub novice: T,
}

impl<T> PerRole<T> {
    pub fn get(&self, role: Role) -> &T {
        match role {
            Role::Expert => &self.expert,
            Role::Novice => &self.novice,
        }
    }
    pub fn get_mut(&mut self, role: Role) -> &mut T {
        match role {
            Role::Expert => &mut self.expert,
            Role::Novice => &mut self.novice,
        }
    }
}

/// Who initiates exchanges of one type, and how long their first IPUs run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitiationEntry {
    pub total: usize,
    pub count: PerRole<usize>,
    /// Share of this type's exchanges initiated by each role; `None` when
    /// the type has no exchanges.
    pub share: PerRole<Option<f64>>,
    /// Mean initiator first-IPU duration (`t4 − t3`) per initiating role.
    pub first_ipu_mean: PerRole<Option<f64>>,
}

/// Role asymmetries across the corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoleReport {
    /// Mean over sessions of each role's share of the session's total
    /// speaking time (IPU time of both participants). `None` without
    /// sessions containing speech.
    pub speaking_time_share: PerRole<Option<f64>>,
    /// Initiation counts and first-IPU durations per exchange type
    /// (keys: smooth, backchannel, interruption).
    pub initiation: BTreeMap<String, InitiationEntry>,
}

/// Compute speaking-time shares and initiation asymmetries per role.
/// Sessions whose participants lack distinct roles are rejected.
pub fn role_stats(sessions: &[SessionRecord]) -> Result<RoleReport> {
    let mut share_sums = PerRole {
        expert: 0.0f64,
        novice: 0.0f64,
    };
    let mut share_sessions = 0usize;

    for s in sessions {
        let expert = s.participant_by_role(Role::Expert);
        let novice = s.participant_by_role(Role::Novice);
        let (expert, novice) = match (expert, novice) {
            (Some(e), Some(n)) => (e, n),
            _ => {
                return Err(Error::InvalidInput(format!(
                    "session {}: participants must cover both roles",
                    s.session_id
                )))
            }
        };
        let time = |id: &str| -> f64 { s.ipus_of(id).iter().map(|seg| seg.duration()).sum() };
        let te = time(&expert.id);
        let tn = time(&novice.id);
        let total = te + tn;
        if total > 0.0 {
            share_sums.expert += te / total;
            share_sums.novice += tn / total;
            share_sessions += 1;
        }
    }

    let speaking_time_share = if share_sessions > 0 {
        PerRole {
            expert: Some(share_sums.expert / share_sessions as f64),
            novice: Some(share_sums.novice / share_sessions as f64),
        }
    } else {
        PerRole {
            expert: None,
            novice: None,
        }
    };

    let mut counts: BTreeMap<ExchangeType, PerRole<usize>> = BTreeMap::new();
    let mut durations: BTreeMap<ExchangeType, PerRole<Vec<f64>>> = BTreeMap::new();
    for kind in ExchangeType::ALL {
        counts.insert(kind, PerRole { expert: 0, novice: 0 });
        durations.insert(
            kind,
            PerRole {
                expert: Vec::new(),
                novice: Vec::new(),
            },
        );
    }
    for s in sessions {
        for e in &s.exchanges {
            let initiator = s.participant(&e.initiator_id).ok_or_else(|| {
                Error::InvalidInput(format!(
                    "session {}: exchange references unknown initiator {:?}",
                    s.session_id, e.initiator_id
                ))
            })?;
            *counts.get_mut(&e.kind).unwrap().get_mut(initiator.role) += 1;
            durations
                .get_mut(&e.kind)
                .unwrap()
                .get_mut(initiator.role)
                .push(e.anchors.t4 - e.anchors.t3);
        }
    }

    let mean = |v: &[f64]| -> Option<f64> {
        if v.is_empty() {
            None
        } else {
            Some(v.iter().sum::<f64>() / v.len() as f64)
        }
    };

    let mut initiation = BTreeMap::new();
    for kind in ExchangeType::ALL {
        let c = counts[&kind];
        let d = &durations[&kind];
        let total = c.expert + c.novice;
        let share = if total > 0 {
            PerRole {
                expert: Some(c.expert as f64 / total as f64),
                novice: Some(c.novice as f64 / total as f64),
            }
        } else {
            PerRole {
                expert: None,
                novice: None,
            }
        };
        initiation.insert(
            kind.to_string(),
            InitiationEntry {
                total,
                count: c,
                share,
                first_ipu_mean: PerRole {
                    expert: mean(&d.expert),
                    novice: mean(&d.novice),
                },
            },
        );
    }

    Ok(RoleReport {
        speaking_time_share,
        initiation,
    })
}

// ---------------------------------------------------------------------------
// Resampling and onset-aligned average curves
// ---------------------------------------------------------------------------

/// Linearly resample a track to a target rate over the same time span.
/// Output samples that fall between a present and a missing input sample
/// are missing; samples landing exactly on an input sample copy it.
pub fn resample_track(track: &FeatureTrack, target_rate_hz: f64) -> Result<FeatureTrack> {
    if !(target_rate_hz > 0.0) {
        return Err(Error::InvalidInput(format!(
            "target sample rate must be positive, found {target_rate_hz}"
        )));
    }
    if (track.sample_rate_hz - target_rate_hz).abs() < 1e-9 {
        return Ok(track.clone());
    }
    if track.values.len() < 2 {
        return Ok(FeatureTrack {
            sample_rate_hz: target_rate_hz,
            ..track.clone()
        });
    }
    let n_in = track.values.len();
    let span = (n_in - 1) as f64 / track.sample_rate_hz;
    let n_out = (span * target_rate_hz + 1e-9).floor() as usize + 1;

    let ratio = track.sample_rate_hz / target_rate_hz;
    let mut values = Vec::with_capacity(n_out);
    for k in 0..n_out {
        let pos = k as f64 * ratio;
        let i0 = pos.floor() as usize;
        let frac = pos - i0 as f64;
        let v = if frac < 1e-7 {
            track.values[i0]
        } else if i0 + 1 < n_in {
            if frac > 1.0 - 1e-7 {
                track.values[i0 + 1]
            } else {
                match (track.values[i0], track.values[i0 + 1]) {
                    (Some(a), Some(b)) => Some(a + frac * (b - a)),
                    _ => None,
                }
            }
        } else {
            None
        };
        values.push(v);
    }
    Ok(FeatureTrack {
        sample_rate_hz: target_rate_hz,
        values,
        ..track.clone()
    })
}

/// Parameters of [`aligned_average_curves`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AlignedCurveParams {
    /// Frame rate of the output grid (tracks are resampled to it).
    pub sample_rate_hz: f64,
    /// Seconds of context before the onset (t3).
    pub before: f64,
    /// Seconds of context after the onset.
    pub after: f64,
}

impl Default for AlignedCurveParams {
    fn default() -> Self {
        AlignedCurveParams {
            sample_rate_hz: 25.0,
            before: 10.0,
            after: 10.0,
        }
    }
}

/// Average of a feature across exchanges, aligned on the exchange onset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignedCurve {
    pub feature_name: String,
    pub exchange_type: ExchangeType,
    pub role: ExchangeRole,
    pub sample_rate_hz: f64,
    /// Frame offsets relative to the onset: `-before*rate ..= after*rate`.
    pub offsets: Vec<i64>,
    /// Missing-aware mean per offset (`None` where no exchange contributed).
    pub mean_values: Vec<Option<f64>>,
    /// Number of exchanges contributing a present sample per offset.
    pub support_counts: Vec<u64>,
}

/// Average a feature over all exchanges of one type, time-locked to the
/// exchange onset `t3` and masked to each exchange's own extent `[t1, t4)`.
///
/// For every frame offset the value is sampled from the requested side's
/// track (nearest frame after resampling to the output rate); offsets
/// outside the exchange, beyond the track, or on missing samples contribute
/// nothing. With no matching exchanges the curve has full width and zero
/// support everywhere.
pub fn aligned_average_curves(
    sessions: &[SessionRecord],
    feature_name: &str,
    kind: ExchangeType,
    role: ExchangeRole,
    params: &AlignedCurveParams,
) -> Result<AlignedCurve> {
    if !(params.sample_rate_hz > 0.0) || !(params.before >= 0.0) || !(params.after >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "aligned-curve parameters must satisfy rate > 0 and before/after >= 0 \
             (rate = {}, before = {}, after = {})",
            params.sample_rate_hz, params.before, params.after
        )));
    }
    let rate = params.sample_rate_hz;
    let lo = -(params.before * rate).round() as i64;
    let hi = (params.after * rate).round() as i64;
    let offsets: Vec<i64> = (lo..=hi).collect();
    let width = offsets.len();

    let mut sums = vec![0.0f64; width];
    let mut counts = vec![0u64; width];

    for s in sessions {
        // Resample each participant's track once per session.
        let mut cache: BTreeMap<&str, FeatureTrack> = BTreeMap::new();
        for e in s.exchanges.iter().filter(|e| e.kind == kind) {
            let pid = s.role_participant(e, role);
            if !cache.contains_key(pid) {
                match s.track(pid, feature_name) {
                    Some(t) => {
                        cache.insert(pid, resample_track(t, rate)?);
                    }
                    None => continue,
                }
            }
            let track = &cache[pid];
            let a = &e.anchors;
            for (slot, &k) in offsets.iter().enumerate() {
                let t = a.t3 + k as f64 / rate;
                if t < a.t1 || t >= a.t4 {
                    continue;
                }
                if let Some(v) = track.value_nearest(t) {
                    sums[slot] += v;
                    counts[slot] += 1;
                }
            }
        }
    }

    let mean_values = sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| if c > 0 { Some(s / c as f64) } else { None })
        .collect();

    Ok(AlignedCurve {
        feature_name: feature_name.to_string(),
        exchange_type: kind,
        role,
        sample_rate_hz: rate,
        offsets,
        mean_values,
        support_counts: counts,
    })
}

// ---------------------------------------------------------------------------
// Feature comparison
// ---------------------------------------------------------------------------

/// One tested (or untestable) cell of the comparison report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum CellResult {
    /// Too few usable observations, or a degenerate configuration.
    Insufficient {
        n_a: usize,
        n_b: usize,
        reason: String,
    },
    Tested {
        #[serde(flatten)]
        test: TTestResult,
        significant: bool,
    },
}

/// Comparisons for one feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureComparison {
    /// Speaker group (means over `[t1, t2)`) vs initiator group (means over
    /// `[t3, t4)`), one cell per exchange type.
    pub speaker_vs_initiator: BTreeMap<String, CellResult>,
    /// Initiator groups compared across exchange types.
    pub initiator_across_types: BTreeMap<String, CellResult>,
}

/// Feature comparison across the whole corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub alpha: f64,
    pub features: BTreeMap<String, FeatureComparison>,
}

fn compare_groups(a: &[f64], b: &[f64], alpha: f64) -> CellResult {
    if a.len() < 2 || b.len() < 2 {
        return CellResult::Insufficient {
            n_a: a.len(),
            n_b: b.len(),
            reason: "each group needs at least 2 observations".into(),
        };
    }
    match welch_t_test(a, b) {
        Ok(test) => CellResult::Tested {
            significant: test.p_value < alpha,
            test,
        },
        Err(e) => CellResult::Insufficient {
            n_a: a.len(),
            n_b: b.len(),
            reason: e.to_string(),
        },
    }
}

/// Compare features between the outgoing speaker and the incoming
/// initiator within each exchange type, and between initiators across
/// exchange types. Observations are per-exchange interval means (speaker:
/// `[t1, t2)`; initiator: `[t3, t4)`); exchanges whose track or samples are
/// missing drop out, and groups with fewer than two observations yield
/// insufficient cells.
pub fn feature_comparison(
    sessions: &[SessionRecord],
    feature_names: &[String],
    alpha: f64,
) -> Result<ComparisonReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidInput(format!(
            "alpha must lie in (0, 1), found {alpha}"
        )));
    }

    let mut features = BTreeMap::new();
    for feature in feature_names {
        let mut speaker_groups: BTreeMap<ExchangeType, Vec<f64>> = BTreeMap::new();
        let mut initiator_groups: BTreeMap<ExchangeType, Vec<f64>> = BTreeMap::new();
        for kind in ExchangeType::ALL {
            speaker_groups.insert(kind, Vec::new());
            initiator_groups.insert(kind, Vec::new());
        }

        for s in sessions {
            for e in &s.exchanges {
                if let Some(track) = s.track(&e.speaker_id, feature) {
                    if let Some(v) =
                        interval_mean(track, e, IntervalSpec::Taken, ExchangeRole::Speaker)?
                    {
                        speaker_groups.get_mut(&e.kind).unwrap().push(v);
                    }
                }
                if let Some(track) = s.track(&e.initiator_id, feature) {
                    if let Some(v) =
                        interval_mean(track, e, IntervalSpec::Taker, ExchangeRole::Initiator)?
                    {
                        initiator_groups.get_mut(&e.kind).unwrap().push(v);
                    }
                }
            }
        }

        let mut speaker_vs_initiator = BTreeMap::new();
        for kind in ExchangeType::ALL {
            speaker_vs_initiator.insert(
                kind.to_string(),
                compare_groups(&speaker_groups[&kind], &initiator_groups[&kind], alpha),
            );
        }

        let mut initiator_across_types = BTreeMap::new();
        let pairs = [
            (ExchangeType::Interruption, ExchangeType::SmoothTurn),
            (ExchangeType::Interruption, ExchangeType::Backchannel),
            (ExchangeType::SmoothTurn, ExchangeType::Backchannel),
        ];
        for (ka, kb) in pairs {
            initiator_across_types.insert(
                format!("{ka}_vs_{kb}"),
                compare_groups(&initiator_groups[&ka], &initiator_groups[&kb], alpha),
            );
        }

        features.insert(
            feature.clone(),
            FeatureComparison {
                speaker_vs_initiator,
                initiator_across_types,
            },
        );
    }

    Ok(ComparisonReport { alpha, features })
}
