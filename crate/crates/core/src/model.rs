//! Domain model for dyadic-conversation analysis: participants, speech
//! segments, exchanges at turn switches, and per-participant feature tracks.
//!
//! Times are seconds from session start (f64). Segments and sampling
//! intervals are half-open `[start, end)` throughout the library.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Silences of at least this many seconds separate two inter-pausal units
/// (IPUs); shorter gaps are bridged into a single IPU.
pub const IPU_GAP_THRESHOLD: f64 = 0.050;

/// Conversational role of a participant in a dyad.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Expert,
    Novice,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Expert => "expert",
            Role::Novice => "novice",
        })
    }
}

impl FromStr for Role {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "expert" => Ok(Role::Expert),
            "novice" => Ok(Role::Novice),
            other => Err(Error::InvalidInput(format!(
                "unknown role {other:?}; expected one of: expert, novice"
            ))),
        }
    }
}

/// One of the two interlocutors of a session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Participant {
    pub id: String,
    pub role: Role,
}

/// A half-open time span `[start, end)` in seconds. Used both for raw
/// voice-activity segments and for IPUs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
}

impl Segment {
    pub fn new(start: f64, end: f64) -> Self {
        Segment { start, end }
    }

    pub fn duration(&self) -> f64 {
        self.end - self.start
    }

    /// Half-open membership: `start <= t < end`.
    pub fn contains(&self, t: f64) -> bool {
        self.start <= t && t < self.end
    }
}

/// Kind of exchange observed at a floor-switch candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ExchangeType {
    #[serde(rename = "smooth")]
    SmoothTurn,
    #[serde(rename = "backchannel")]
    Backchannel,
    #[serde(rename = "interruption")]
    Interruption,
}

impl ExchangeType {
    pub const ALL: [ExchangeType; 3] = [
        ExchangeType::SmoothTurn,
        ExchangeType::Backchannel,
        ExchangeType::Interruption,
    ];
}

impl fmt::Display for ExchangeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExchangeType::SmoothTurn => "smooth",
            ExchangeType::Backchannel => "backchannel",
            ExchangeType::Interruption => "interruption",
        })
    }
}

impl FromStr for ExchangeType {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "smooth" => Ok(ExchangeType::SmoothTurn),
            "backchannel" => Ok(ExchangeType::Backchannel),
            "interruption" => Ok(ExchangeType::Interruption),
            other => Err(Error::InvalidInput(format!(
                "unknown exchange type {other:?}; expected one of: smooth, backchannel, interruption"
            ))),
        }
    }
}

/// Whether an interruption succeeded in taking the floor. Only meaningful
/// for interruptions; smooth turns and backchannels carry `Unknown`.
#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Successful,
    Failed,
    #[default]
    Unknown,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Successful => "successful",
            Outcome::Failed => "failed",
            Outcome::Unknown => "unknown",
        })
    }
}

impl FromStr for Outcome {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "successful" => Ok(Outcome::Successful),
            "failed" => Ok(Outcome::Failed),
            "unknown" | "" => Ok(Outcome::Unknown),
            other => Err(Error::InvalidInput(format!(
                "unknown outcome {other:?}; expected one of: successful, failed, unknown"
            ))),
        }
    }
}

/// Pragmatic intent of an interruption. Automatic classification never
/// fills this in; it comes from manual annotations.
#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum Intent {
    Cooperative,
    Competitive,
    #[default]
    Unknown,
}

impl fmt::Display for Intent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Intent::Cooperative => "cooperative",
            Intent::Competitive => "competitive",
            Intent::Unknown => "unknown",
        })
    }
}

impl FromStr for Intent {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cooperative" => Ok(Intent::Cooperative),
            "competitive" => Ok(Intent::Competitive),
            "unknown" | "" => Ok(Intent::Unknown),
            other => Err(Error::InvalidInput(format!(
                "unknown intent {other:?}; expected one of: cooperative, competitive, unknown"
            ))),
        }
    }
}

/// Fine-grained intent category; each value implies a coarse [`Intent`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntentDetail {
    Agreement,
    Assistance,
    Clarification,
    Disagreement,
    FloorTaking,
    TopicChange,
    Tangentialization,
}

impl IntentDetail {
    /// The coarse intent implied by this detail category.
    pub fn implied_intent(&self) -> Intent {
        match self {
            IntentDetail::Agreement | IntentDetail::Assistance | IntentDetail::Clarification => {
                Intent::Cooperative
            }
            IntentDetail::Disagreement
            | IntentDetail::FloorTaking
            | IntentDetail::TopicChange
            | IntentDetail::Tangentialization => Intent::Competitive,
        }
    }

    pub const ALL: [IntentDetail; 7] = [
        IntentDetail::Agreement,
        IntentDetail::Assistance,
        IntentDetail::Clarification,
        IntentDetail::Disagreement,
        IntentDetail::FloorTaking,
        IntentDetail::TopicChange,
        IntentDetail::Tangentialization,
    ];
}

impl fmt::Display for IntentDetail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IntentDetail::Agreement => "agreement",
            IntentDetail::Assistance => "assistance",
            IntentDetail::Clarification => "clarification",
            IntentDetail::Disagreement => "disagreement",
            IntentDetail::FloorTaking => "floor_taking",
            IntentDetail::TopicChange => "topic_change",
            IntentDetail::Tangentialization => "tangentialization",
        })
    }
}

impl FromStr for IntentDetail {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "agreement" => Ok(IntentDetail::Agreement),
            "assistance" => Ok(IntentDetail::Assistance),
            "clarification" => Ok(IntentDetail::Clarification),
            "disagreement" => Ok(IntentDetail::Disagreement),
            "floor_taking" => Ok(IntentDetail::FloorTaking),
            "topic_change" => Ok(IntentDetail::TopicChange),
            "tangentialization" => Ok(IntentDetail::Tangentialization),
            other => Err(Error::InvalidInput(format!(
                "unknown intent_detail {other:?}; expected one of: agreement, assistance, \
                 clarification, disagreement, floor_taking, topic_change, tangentialization"
            ))),
        }
    }
}

/// Where an exchange record came from.
#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum ExchangeSource {
    /// Produced by the automatic classifier.
    #[default]
    Auto,
    /// Taken from (or overridden by) a manual annotation.
    Annotation,
}

impl fmt::Display for ExchangeSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExchangeSource::Auto => "auto",
            ExchangeSource::Annotation => "annotation",
        })
    }
}

impl FromStr for ExchangeSource {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(ExchangeSource::Auto),
            "annotation" => Ok(ExchangeSource::Annotation),
            other => Err(Error::InvalidInput(format!(
                "unknown source {other:?}; expected one of: auto, annotation"
            ))),
        }
    }
}

/// The four temporal anchors of an exchange:
///
/// * `t1` — start of the current speaker's last IPU before the switch;
/// * `t2` — end of that IPU;
/// * `t3` — start of the initiator's first IPU (the exchange onset);
/// * `t4` — end of that IPU.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Anchors {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub t4: f64,
}

impl Anchors {
    /// Overlapped speech duration: how long the speaker's IPU ran past the
    /// initiator's onset, clamped at zero when the floor was already free.
    pub fn overlap(&self) -> f64 {
        (self.t2 - self.t3).max(0.0)
    }
}

/// A classified event at a floor-switch candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exchange {
    /// Participant who held the floor when the initiator started.
    pub speaker_id: String,
    /// Participant whose IPU onset created the switch candidate.
    pub initiator_id: String,
    #[serde(rename = "type")]
    pub kind: ExchangeType,
    pub outcome: Outcome,
    pub intent: Intent,
    pub intent_detail: Option<IntentDetail>,
    pub anchors: Anchors,
    /// Cached `anchors.overlap()`.
    pub overlap: f64,
    pub source: ExchangeSource,
}

/// A uniformly sampled scalar signal for one participant (e.g. an action
/// unit intensity, F0, or loudness). `None` marks missing samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureTrack {
    pub participant_id: String,
    pub feature_name: String,
    /// Samples per second; sample `i` sits at `start_time + i / sample_rate_hz`.
    pub sample_rate_hz: f64,
    /// Time of sample 0, in seconds.
    pub start_time: f64,
    pub values: Vec<Option<f64>>,
}

impl FeatureTrack {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Time of sample `i`.
    pub fn time_at(&self, i: usize) -> f64 {
        self.start_time + i as f64 / self.sample_rate_hz
    }

    /// Time just past the last sample (one sample period after it);
    /// 0-length tracks report their start time.
    pub fn end_time(&self) -> f64 {
        self.start_time + self.values.len() as f64 / self.sample_rate_hz
    }

    /// Smallest index whose sample time is `>= t` (may equal `len()`).
    /// Comparisons use the same arithmetic as [`Self::time_at`], so interval
    /// boundaries that coincide with sample times are resolved exactly.
    pub fn first_index_at_or_after(&self, t: f64) -> usize {
        let n = self.values.len();
        let guess = ((t - self.start_time) * self.sample_rate_hz).ceil();
        let mut i = if guess.is_finite() {
            guess.max(0.0).min(n as f64) as usize
        } else {
            0
        };
        while i > 0 && self.time_at(i - 1) >= t {
            i -= 1;
        }
        while i < n && self.time_at(i) < t {
            i += 1;
        }
        i
    }

    /// Indices of the samples falling in the half-open interval `[start, end)`.
    pub fn indices_in(&self, start: f64, end: f64) -> Range<usize> {
        let lo = self.first_index_at_or_after(start);
        let hi = self.first_index_at_or_after(end);
        lo..hi.max(lo)
    }

    /// Index of the sample nearest to `t`, if `t` falls within half a sample
    /// period of any sample.
    pub fn index_nearest(&self, t: f64) -> Option<usize> {
        if self.values.is_empty() || self.sample_rate_hz <= 0.0 {
            return None;
        }
        let pos = (t - self.start_time) * self.sample_rate_hz;
        let i = pos.round();
        if i < 0.0 || i as usize >= self.values.len() {
            return None;
        }
        let i = i as usize;
        if (self.time_at(i) - t).abs() <= 0.5 / self.sample_rate_hz {
            Some(i)
        } else {
            None
        }
    }

    /// Value of the sample nearest to `t` (missing samples give `None`).
    pub fn value_nearest(&self, t: f64) -> Option<f64> {
        self.index_nearest(t).and_then(|i| self.values[i])
    }
}

/// Everything known about one recorded conversation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub session_id: String,
    /// Exactly two participants with distinct ids and distinct roles.
    pub participants: Vec<Participant>,
    /// IPUs per participant id, sorted by start.
    pub ipus: BTreeMap<String, Vec<Segment>>,
    pub tracks: Vec<FeatureTrack>,
    /// Exchanges sorted by onset (`t3`).
    pub exchanges: Vec<Exchange>,
    /// Session duration in seconds; all timestamps lie in `[0, session_length]`.
    pub session_length: f64,
}

impl SessionRecord {
    pub fn participant_by_role(&self, role: Role) -> Option<&Participant> {
        self.participants.iter().find(|p| p.role == role)
    }

    pub fn participant(&self, id: &str) -> Option<&Participant> {
        self.participants.iter().find(|p| p.id == id)
    }

    /// The other member of the dyad.
    pub fn other_id(&self, id: &str) -> Option<&str> {
        self.participants
            .iter()
            .map(|p| p.id.as_str())
            .find(|pid| *pid != id)
    }

    pub fn ipus_of(&self, id: &str) -> &[Segment] {
        self.ipus.get(id).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn track(&self, participant_id: &str, feature_name: &str) -> Option<&FeatureTrack> {
        self.tracks
            .iter()
            .find(|t| t.participant_id == participant_id && t.feature_name == feature_name)
    }

    /// Participant id an exchange role refers to for a given exchange.
    pub fn role_participant<'a>(&self, exchange: &'a Exchange, role: ExchangeRole) -> &'a str {
        match role {
            ExchangeRole::Speaker => &exchange.speaker_id,
            ExchangeRole::Initiator => &exchange.initiator_id,
        }
    }
}

/// Which side of an exchange a statistic refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExchangeRole {
    /// The participant who held the floor (`t1`/`t2` side).
    Speaker,
    /// The participant who started speaking at `t3`.
    Initiator,
}

impl fmt::Display for ExchangeRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExchangeRole::Speaker => "speaker",
            ExchangeRole::Initiator => "initiator",
        })
    }
}

fn check_segments(
    owner: &str,
    segs: &[Segment],
    length: f64,
    gap_threshold: f64,
    out: &mut Vec<String>,
) {
    for (i, s) in segs.iter().enumerate() {
        if !(s.start < s.end) {
            out.push(format!(
                "{owner}: segment {i} has non-positive duration ({} .. {})",
                s.start, s.end
            ));
        }
        if s.start < 0.0 || s.end > length {
            out.push(format!(
                "{owner}: segment {i} ({} .. {}) outside [0, {length}]",
                s.start, s.end
            ));
        }
        if i > 0 {
            let prev = &segs[i - 1];
            if s.start < prev.end {
                out.push(format!(
                    "{owner}: segment {i} overlaps or precedes segment {} ({} < {})",
                    i - 1,
                    s.start,
                    prev.end
                ));
            } else if s.start - prev.end < gap_threshold {
                out.push(format!(
                    "{owner}: gap before segment {i} is {:.3} s, below the {gap_threshold} s \
                     IPU separation threshold",
                    s.start - prev.end
                ));
            }
        }
    }
}

/// Check every structural invariant of a session record and return one
/// human-readable violation string per broken rule (empty means valid).
/// IPU gaps are checked against the default [`IPU_GAP_THRESHOLD`].
pub fn validate_session(record: &SessionRecord) -> Vec<String> {
    validate_session_with_gap(record, IPU_GAP_THRESHOLD)
}

/// Like [`validate_session`], but checking IPU gaps against a custom
/// separation threshold (the one the session was segmented with).
pub fn validate_session_with_gap(record: &SessionRecord, gap_threshold: f64) -> Vec<String> {
    let mut out = Vec::new();

    if record.participants.len() != 2 {
        out.push(format!(
            "session must have exactly two participants, found {}",
            record.participants.len()
        ));
    }
    if record.participants.len() == 2 {
        let (a, b) = (&record.participants[0], &record.participants[1]);
        if a.id == b.id {
            out.push(format!("participants must have distinct ids, both are {:?}", a.id));
        }
        if a.role == b.role {
            out.push(format!(
                "participants must have distinct roles, both are {}",
                a.role
            ));
        }
    }
    if !(record.session_length > 0.0) {
        out.push(format!(
            "session_length must be positive, found {}",
            record.session_length
        ));
    }

    let ids: Vec<&str> = record.participants.iter().map(|p| p.id.as_str()).collect();
    for (pid, segs) in &record.ipus {
        if !ids.contains(&pid.as_str()) {
            out.push(format!("IPU list for unknown participant {pid:?}"));
        }
        check_segments(
            &format!("IPUs of {pid}"),
            segs,
            record.session_length,
            gap_threshold,
            &mut out,
        );
    }

    for (i, t) in record.tracks.iter().enumerate() {
        if !ids.contains(&t.participant_id.as_str()) {
            out.push(format!(
                "track {i} ({}) belongs to unknown participant {:?}",
                t.feature_name, t.participant_id
            ));
        }
        if !(t.sample_rate_hz > 0.0) {
            out.push(format!(
                "track {i} ({}) has non-positive sample rate {}",
                t.feature_name, t.sample_rate_hz
            ));
        }
        if t.start_time < 0.0 {
            out.push(format!(
                "track {i} ({}) starts before the session ({})",
                t.feature_name, t.start_time
            ));
        }
    }

    for (i, e) in record.exchanges.iter().enumerate() {
        let a = &e.anchors;
        if e.speaker_id == e.initiator_id {
            out.push(format!(
                "exchange {i}: speaker and initiator must differ, both are {:?}",
                e.speaker_id
            ));
        }
        for pid in [&e.speaker_id, &e.initiator_id] {
            if !ids.contains(&pid.as_str()) {
                out.push(format!("exchange {i}: unknown participant {pid:?}"));
            }
        }
        if !(a.t1 < a.t2) {
            out.push(format!("exchange {i}: anchors must satisfy t1 < t2 ({} .. {})", a.t1, a.t2));
        }
        if !(a.t3 < a.t4) {
            out.push(format!("exchange {i}: anchors must satisfy t3 < t4 ({} .. {})", a.t3, a.t4));
        }
        if !(a.t1 < a.t3) {
            out.push(format!(
                "exchange {i}: the speaker's IPU must start before the initiator's (t1 {} vs t3 {})",
                a.t1, a.t3
            ));
        }
        if a.t1 < 0.0 || a.t2.max(a.t4) > record.session_length {
            out.push(format!(
                "exchange {i}: anchors outside [0, {}]",
                record.session_length
            ));
        }
        if (e.overlap - a.overlap()).abs() > 1e-9 {
            out.push(format!(
                "exchange {i}: stored overlap {} disagrees with anchors (expected {})",
                e.overlap,
                a.overlap()
            ));
        }
        if let Some(detail) = e.intent_detail {
            if e.intent != detail.implied_intent() {
                out.push(format!(
                    "exchange {i}: intent_detail {detail} implies intent {}, found {}",
                    detail.implied_intent(),
                    e.intent
                ));
            }
        }
        if i > 0 && e.anchors.t3 < record.exchanges[i - 1].anchors.t3 {
            out.push(format!("exchange {i}: exchanges must be sorted by onset t3"));
        }
    }

    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn participant(id: &str, role: Role) -> Participant {
        Participant {
            id: id.into(),
            role,
        }
    }

    pub(crate) fn minimal_session() -> SessionRecord {
        let mut ipus = BTreeMap::new();
        ipus.insert("E".to_string(), vec![Segment::new(0.0, 5.0)]);
        ipus.insert("N".to_string(), vec![Segment::new(5.2, 8.0)]);
        SessionRecord {
            session_id: "s1".into(),
            participants: vec![participant("E", Role::Expert), participant("N", Role::Novice)],
            ipus,
            tracks: vec![],
            exchanges: vec![Exchange {
                speaker_id: "E".into(),
                initiator_id: "N".into(),
                kind: ExchangeType::SmoothTurn,
                outcome: Outcome::Unknown,
                intent: Intent::Unknown,
                intent_detail: None,
                anchors: Anchors {
                    t1: 0.0,
                    t2: 5.0,
                    t3: 5.2,
                    t4: 8.0,
                },
                overlap: 0.0,
                source: ExchangeSource::Auto,
            }],
            session_length: 9.0,
        }
    }

    #[test]
    fn valid_session_has_no_violations() {
        assert_eq!(validate_session(&minimal_session()), Vec::<String>::new());
    }

    #[test]
    fn duplicate_roles_are_flagged() {
        let mut s = minimal_session();
        s.participants[1].role = Role::Expert;
        let v = validate_session(&s);
        assert_eq!(v.len(), 1, "{v:?}");
        assert!(v[0].contains("distinct roles"), "{v:?}");
    }

    #[test]
    fn overlapping_ipus_are_flagged() {
        let mut s = minimal_session();
        s.ipus.insert(
            "E".to_string(),
            vec![Segment::new(0.0, 5.0), Segment::new(4.5, 6.0)],
        );
        let v = validate_session(&s);
        assert!(v.iter().any(|m| m.contains("overlaps")), "{v:?}");
    }

    #[test]
    fn sub_threshold_ipu_gap_is_flagged() {
        let mut s = minimal_session();
        s.ipus.insert(
            "E".to_string(),
            vec![Segment::new(0.0, 5.0), Segment::new(5.030, 6.0)],
        );
        let v = validate_session(&s);
        assert!(v.iter().any(|m| m.contains("separation threshold")), "{v:?}");
    }

    #[test]
    fn inconsistent_overlap_and_intent_detail_are_flagged() {
        let mut s = minimal_session();
        s.exchanges[0].overlap = 1.0;
        s.exchanges[0].intent = Intent::Cooperative;
        s.exchanges[0].intent_detail = Some(IntentDetail::FloorTaking);
        let v = validate_session(&s);
        assert!(v.iter().any(|m| m.contains("overlap")), "{v:?}");
        assert!(v.iter().any(|m| m.contains("implies intent competitive")), "{v:?}");
    }

    #[test]
    fn anchors_overlap_clamps_at_zero() {
        let gap = Anchors {
            t1: 0.0,
            t2: 5.0,
            t3: 5.2,
            t4: 8.0,
        };
        assert_eq!(gap.overlap(), 0.0);
        let ov = Anchors {
            t1: 0.0,
            t2: 5.0,
            t3: 3.0,
            t4: 3.5,
        };
        assert!((ov.overlap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn vocabulary_round_trips_through_display_and_fromstr() {
        for k in ExchangeType::ALL {
            assert_eq!(k.to_string().parse::<ExchangeType>().unwrap(), k);
        }
        for d in IntentDetail::ALL {
            assert_eq!(d.to_string().parse::<IntentDetail>().unwrap(), d);
        }
        for o in [Outcome::Successful, Outcome::Failed, Outcome::Unknown] {
            assert_eq!(o.to_string().parse::<Outcome>().unwrap(), o);
        }
        for i in [Intent::Cooperative, Intent::Competitive, Intent::Unknown] {
            assert_eq!(i.to_string().parse::<Intent>().unwrap(), i);
        }
        assert!("smoothturn".parse::<ExchangeType>().is_err());
    }

    #[test]
    fn serde_names_match_csv_vocabulary() {
        let json = serde_json::to_string(&ExchangeType::SmoothTurn).unwrap();
        assert_eq!(json, "\"smooth\"");
        let json = serde_json::to_string(&IntentDetail::FloorTaking).unwrap();
        assert_eq!(json, "\"floor_taking\"");
        let e: ExchangeType = serde_json::from_str("\"backchannel\"").unwrap();
        assert_eq!(e, ExchangeType::Backchannel);
    }

    #[test]
    fn session_serde_round_trip() {
        let s = minimal_session();
        let json = serde_json::to_string(&s).unwrap();
        let back: SessionRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn track_index_helpers_respect_half_open_intervals() {
        let track = FeatureTrack {
            participant_id: "E".into(),
            feature_name: "F0".into(),
            sample_rate_hz: 25.0,
            start_time: 0.0,
            values: (0..100).map(|i| Some(i as f64)).collect(),
        };
        // [0, 0.2) at 25 fps holds samples 0..5 (times 0.00, 0.04, ..., 0.16).
        let r = track.indices_in(0.0, 0.2);
        assert_eq!(r, 0..5);
        // A boundary exactly on a sample time excludes that sample.
        assert_eq!(track.first_index_at_or_after(0.2), 5);
        // Nearest-sample lookup.
        assert_eq!(track.index_nearest(0.041), Some(1));
        assert_eq!(track.index_nearest(-1.0), None);
        assert_eq!(track.value_nearest(0.08), Some(2.0));
    }
}
