//! Classification of floor-switch candidates into exchanges (smooth turn,
//! backchannel, interruption), interruption outcomes, merging of manual
//! annotations, and corpus-level exchange counts.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    Anchors, Exchange, ExchangeSource, ExchangeType, Intent, IntentDetail, Outcome, Segment,
};
use crate::segmentation::{floor_holder_at, SwitchCandidate};

/// Thresholds of the rule-based exchange classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifierParams {
    /// Longest initiator IPU (t4 − t3, seconds) that can count as a
    /// backchannel. Inclusive.
    pub backchannel_max_dur: f64,
    /// A backchannel requires the speaker to continue: either their IPU is
    /// still active at t4, or their next IPU starts within this many seconds
    /// of t4 (inclusive) and before the initiator speaks again.
    pub backchannel_resume_gap: f64,
    /// Largest overlap (seconds, inclusive) that still counts as a smooth
    /// turn when the floor changes hands during overlapped speech.
    pub smooth_tail_overlap: f64,
    /// Seconds after t4 at which the floor is probed to decide whether an
    /// interruption succeeded.
    pub success_hold: f64,
}

impl Default for ClassifierParams {
    fn default() -> Self {
        ClassifierParams {
            backchannel_max_dur: 1.0,
            backchannel_resume_gap: 1.0,
            smooth_tail_overlap: 0.5,
            success_hold: 0.0,
        }
    }
}

impl ClassifierParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("backchannel_max_dur", self.backchannel_max_dur),
            ("backchannel_resume_gap", self.backchannel_resume_gap),
            ("smooth_tail_overlap", self.smooth_tail_overlap),
            ("success_hold", self.success_hold),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "classifier parameter {name} must be a non-negative number, found {v}"
                )));
            }
        }
        Ok(())
    }
}

/// First IPU start strictly after `t`, if any.
fn next_onset_after(ipus: &[Segment], t: f64) -> Option<f64> {
    let i = ipus.partition_point(|s| s.start <= t);
    ipus.get(i).map(|s| s.start)
}

/// Classify one switch candidate against the full IPU sequences of both
/// participants.
///
/// The rules apply in order:
///
/// 1. **Backchannel** — the initiator's IPU is short (t4 − t3 ≤
///    `backchannel_max_dur`) and the speaker keeps or immediately resumes
///    the floor: their IPU is still active at t4, or their next IPU starts
///    within `backchannel_resume_gap` of t4 and before the initiator's next
///    IPU.
/// 2. **Smooth turn** — the speaker had already finished (t3 ≥ t2), or the
///    overlap is a short tail (0 < t2 − t3 ≤ `smooth_tail_overlap`) and the
///    speaker does not restart before the initiator's next IPU.
/// 3. **Interruption** — everything else. It is *successful* when the
///    speaker's IPU ends before the initiator's does (t2 < t4) and the
///    speaker no longer holds the floor at t4 + `success_hold`; otherwise
///    *failed*.
///
/// The candidate's IPUs must still be present in the sequences passed here;
/// a candidate built from different IPU data errors with "stale candidate".
pub fn classify(
    candidate: &SwitchCandidate,
    speaker_ipus: &[Segment],
    initiator_ipus: &[Segment],
    params: &ClassifierParams,
) -> Result<Exchange> {
    params.validate()?;

    let spk = candidate.speaker_last_ipu;
    let ini = candidate.initiator_first_ipu;
    if !speaker_ipus.contains(&spk)
        || !initiator_ipus.contains(&ini)
        || candidate.onset != ini.start
    {
        return Err(Error::InvalidInput(format!(
            "stale candidate: onset {} does not match the provided IPU sequences",
            candidate.onset
        )));
    }

    let anchors = Anchors {
        t1: spk.start,
        t2: spk.end,
        t3: ini.start,
        t4: ini.end,
    };
    let (t2, t3, t4) = (anchors.t2, anchors.t3, anchors.t4);
    let overlap = anchors.overlap();

    let spk_next = next_onset_after(speaker_ipus, t3);
    let ini_next = next_onset_after(initiator_ipus, t3).unwrap_or(f64::INFINITY);

    let speaker_resumes_before_initiator = spk_next.map_or(false, |s| s < ini_next);

    let kind = if (t4 - t3) <= params.backchannel_max_dur
        && (t2 > t4
            || (spk_next.map_or(false, |s| s <= t4 + params.backchannel_resume_gap)
                && speaker_resumes_before_initiator))
    {
        ExchangeType::Backchannel
    } else if t3 >= t2
        || (overlap > 0.0
            && overlap <= params.smooth_tail_overlap
            && !speaker_resumes_before_initiator)
    {
        ExchangeType::SmoothTurn
    } else {
        ExchangeType::Interruption
    };

    let outcome = if kind == ExchangeType::Interruption {
        let holder = floor_holder_at(
            &candidate.speaker_id,
            speaker_ipus,
            &candidate.initiator_id,
            initiator_ipus,
            t4 + params.success_hold,
        );
        if t2 < t4 && holder != Some(candidate.speaker_id.as_str()) {
            Outcome::Successful
        } else {
            Outcome::Failed
        }
    } else {
        Outcome::Unknown
    };

    Ok(Exchange {
        speaker_id: candidate.speaker_id.clone(),
        initiator_id: candidate.initiator_id.clone(),
        kind,
        outcome,
        intent: Intent::Unknown,
        intent_detail: None,
        anchors,
        overlap,
        source: ExchangeSource::Auto,
    })
}

/// One row of a manual annotation file: a labelled exchange onset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationRow {
    /// Annotated onset time (seconds); matched against automatic `t3`.
    pub time: f64,
    #[serde(rename = "type")]
    pub kind: ExchangeType,
    pub outcome: Outcome,
    pub intent: Intent,
    pub intent_detail: Option<IntentDetail>,
    pub initiator_id: String,
}

impl AnnotationRow {
    pub fn validate(&self) -> Result<()> {
        if !self.time.is_finite() || self.time < 0.0 {
            return Err(Error::InvalidInput(format!(
                "annotation time must be a non-negative number, found {}",
                self.time
            )));
        }
        if let Some(detail) = self.intent_detail {
            if self.intent != detail.implied_intent() {
                return Err(Error::InvalidInput(format!(
                    "annotation at {}: intent_detail {detail} implies intent {}, found {}",
                    self.time,
                    detail.implied_intent(),
                    self.intent
                )));
            }
        }
        Ok(())
    }
}

/// Default halfwidth of the onset window used to match annotations to
/// automatic exchanges, in seconds.
pub const ANNOTATION_MATCH_TOLERANCE: f64 = 0.5;

/// Merge manual annotations into automatically classified exchanges.
///
/// Each annotation is matched to the automatic exchange whose `t3` is
/// nearest its time, provided the distance is within `tolerance`. Matched
/// exchanges take the annotation's type and labels and are marked
/// `source = annotation`, keeping their automatic anchors. Two annotations
/// matching the same automatic exchange error with "ambiguous match".
/// Unmatched annotations become new exchanges whose anchors are
/// reconstructed from the IPU context (or synthesized when no IPUs help).
///
/// Returns the merged list sorted by onset.
pub fn apply_annotations(
    auto: &[Exchange],
    annotations: &[AnnotationRow],
    ipus: &BTreeMap<String, Vec<Segment>>,
    tolerance: f64,
) -> Result<Vec<Exchange>> {
    if !(tolerance >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "annotation matching tolerance must be non-negative, found {tolerance}"
        )));
    }
    for row in annotations {
        row.validate()?;
    }

    // Best automatic exchange per annotation.
    let mut matched: Vec<Option<usize>> = Vec::with_capacity(annotations.len());
    for row in annotations {
        let best = auto
            .iter()
            .enumerate()
            .map(|(i, e)| (i, (e.anchors.t3 - row.time).abs()))
            .filter(|(_, d)| *d <= tolerance)
            .min_by(|a, b| a.1.partial_cmp(&b.1).expect("finite distances"));
        matched.push(best.map(|(i, _)| i));
    }

    // Detect collisions: two annotations claiming one automatic exchange.
    let mut claimed: BTreeMap<usize, usize> = BTreeMap::new();
    for (row_idx, m) in matched.iter().enumerate() {
        if let Some(auto_idx) = m {
            if let Some(prev_row) = claimed.insert(*auto_idx, row_idx) {
                return Err(Error::InvalidInput(format!(
                    "ambiguous match: annotations at {} and {} both match the exchange at t3 = {}",
                    annotations[prev_row].time,
                    annotations[row_idx].time,
                    auto[*auto_idx].anchors.t3
                )));
            }
        }
    }

    let mut out: Vec<Exchange> = auto.to_vec();
    for (auto_idx, row_idx) in &claimed {
        let row = &annotations[*row_idx];
        let e = &mut out[*auto_idx];
        e.kind = row.kind;
        e.outcome = row.outcome;
        e.intent = row.intent;
        e.intent_detail = row.intent_detail;
        e.source = ExchangeSource::Annotation;
    }

    for (row_idx, m) in matched.iter().enumerate() {
        if m.is_none() {
            out.push(reconstruct_exchange(&annotations[row_idx], ipus)?);
        }
    }

    out.sort_by(|a, b| {
        a.anchors
            .t3
            .partial_cmp(&b.anchors.t3)
            .expect("anchors are finite")
    });
    Ok(out)
}

/// Build an exchange for an annotation that matched no automatic one, using
/// the IPU context where possible and synthetic anchors otherwise.
fn reconstruct_exchange(
    row: &AnnotationRow,
    ipus: &BTreeMap<String, Vec<Segment>>,
) -> Result<Exchange> {
    let mut others = ipus.keys().filter(|id| **id != row.initiator_id);
    let speaker_id = match (others.next(), others.next()) {
        (Some(id), None) => id.clone(),
        _ => {
            return Err(Error::InvalidInput(format!(
                "annotation at {}: initiator {:?} does not identify one of the two participants",
                row.time, row.initiator_id
            )))
        }
    };
    if !ipus.contains_key(&row.initiator_id) {
        return Err(Error::InvalidInput(format!(
            "annotation at {}: unknown initiator {:?}",
            row.time, row.initiator_id
        )));
    }

    // Initiator's IPU whose onset is nearest the annotated time.
    let ini = ipus[&row.initiator_id]
        .iter()
        .min_by(|a, b| {
            let da = (a.start - row.time).abs();
            let db = (b.start - row.time).abs();
            da.partial_cmp(&db).expect("finite times")
        })
        .copied();
    let (t3, t4) = match ini {
        Some(s) => (s.start, s.end),
        None => (row.time, row.time + 1.0),
    };

    // Speaker's IPU active at, or latest before, t3.
    let spk_list = &ipus[&speaker_id];
    let i = spk_list.partition_point(|s| s.start < t3);
    let spk = if i > 0 { Some(spk_list[i - 1]) } else { None };
    let (t1, t2) = match spk {
        Some(s) => (s.start, s.end),
        None => {
            let t1 = (t3 - 1.0).max(0.0);
            if t1 >= t3 {
                return Err(Error::InvalidInput(format!(
                    "annotation at {}: cannot reconstruct speaker anchors before t3 = {t3}",
                    row.time
                )));
            }
            (t1, t1 + 0.5_f64.min((t3 - t1) / 2.0))
        }
    };

    let anchors = Anchors { t1, t2, t3, t4 };
    Ok(Exchange {
        speaker_id,
        initiator_id: row.initiator_id.clone(),
        kind: row.kind,
        outcome: row.outcome,
        intent: row.intent,
        intent_detail: row.intent_detail,
        overlap: anchors.overlap(),
        anchors,
        source: ExchangeSource::Annotation,
    })
}

/// Corpus-wide exchange counts and derived shares.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Census {
    pub smooth: usize,
    pub backchannel: usize,
    pub interruption: usize,
    pub interruption_successful: usize,
    pub interruption_failed: usize,
    pub interruption_outcome_unknown: usize,
    pub successful_cooperative: usize,
    pub successful_competitive: usize,
    pub successful_intent_unknown: usize,
    /// interruptions / (interruptions + smooth turns); `None` when that
    /// denominator is zero.
    pub interruption_share_of_transitions: Option<f64>,
    /// interruptions / all exchanges; `None` on an empty corpus.
    pub interruption_share_of_switch_points: Option<f64>,
    /// successful / all interruptions; `None` without interruptions.
    pub successful_share: Option<f64>,
    /// cooperative / successful interruptions with known intent counted
    /// over all successful ones; `None` without successful interruptions.
    pub cooperative_share_of_successful: Option<f64>,
}

/// Count exchanges of each kind across sessions' exchange lists and derive
/// the shares. An empty corpus yields zero counts and absent shares.
pub fn exchange_census<'a, I>(exchange_lists: I) -> Census
where
    I: IntoIterator<Item = &'a [Exchange]>,
{
    let mut c = Census {
        smooth: 0,
        backchannel: 0,
        interruption: 0,
        interruption_successful: 0,
        interruption_failed: 0,
        interruption_outcome_unknown: 0,
        successful_cooperative: 0,
        successful_competitive: 0,
        successful_intent_unknown: 0,
        interruption_share_of_transitions: None,
        interruption_share_of_switch_points: None,
        successful_share: None,
        cooperative_share_of_successful: None,
    };
    for list in exchange_lists {
        for e in list {
            match e.kind {
                ExchangeType::SmoothTurn => c.smooth += 1,
                ExchangeType::Backchannel => c.backchannel += 1,
                ExchangeType::Interruption => {
                    c.interruption += 1;
                    match e.outcome {
                        Outcome::Successful => {
                            c.interruption_successful += 1;
                            match e.intent {
                                Intent::Cooperative => c.successful_cooperative += 1,
                                Intent::Competitive => c.successful_competitive += 1,
                                Intent::Unknown => c.successful_intent_unknown += 1,
                            }
                        }
                        Outcome::Failed => c.interruption_failed += 1,
                        Outcome::Unknown => c.interruption_outcome_unknown += 1,
                    }
                }
            }
        }
    }

    let transitions = c.interruption + c.smooth;
    if transitions > 0 {
        c.interruption_share_of_transitions = Some(c.interruption as f64 / transitions as f64);
    }
    let total = c.smooth + c.backchannel + c.interruption;
    if total > 0 {
        c.interruption_share_of_switch_points = Some(c.interruption as f64 / total as f64);
    }
    if c.interruption > 0 {
        c.successful_share = Some(c.interruption_successful as f64 / c.interruption as f64);
    }
    if c.interruption_successful > 0 {
        c.cooperative_share_of_successful =
            Some(c.successful_cooperative as f64 / c.interruption_successful as f64);
    }
    c
}
