//! Deterministic synthetic-corpus generator.
//!
//! Builds desk-scale dyadic sessions whose IPU layout realizes an exact,
//! known number of exchanges of each type under a given classifier
//! configuration, together with ground-truth labels. Feature tracks are
//! seeded Gaussian noise plus configurable per-exchange effects, so that
//! statistical routines can be exercised against planted truths.
//!
//! # Construction
//!
//! Every session is a chain of *turns*. A turn is held by one participant
//! whose speech is an open-ended "host" IPU; the listener produces events:
//!
//! * **embedded events** (backchannels and failed interruptions) start and
//!   end while the host keeps talking — the host IPU is extended past them;
//! * **floor transfers** (smooth turns and successful interruptions) close
//!   the host IPU and open the next turn. The new holder utters the
//!   transfer IPU itself (with the sampled first-IPU duration) and then a
//!   follow-on continuation IPU that hosts the next events.
//!
//! Because the floor-holder rule awards the floor to the most recent onset
//! once nobody is speaking, a turn that contained embedded events can only
//! be closed by an overlapping transfer; the scheduler therefore attaches
//! embedded events to overlapped smooth turns and successful interruptions
//! (or to the final, never-closed turn). All instants lie on the 25 fps
//! feature grid, all same-speaker IPU gaps are at least 0.16 s, and every
//! inequality the classifier tests holds with at least one frame of margin,
//! so reclassification recovers the ground truth exactly.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exchange::ClassifierParams;
use crate::io::csv::{write_feature_csv, write_segments_csv};
use crate::io::manifest::{ManifestParticipant, SessionManifest};
use crate::io::{io_error, parse_error};
use crate::model::{
    validate_session, ExchangeRole, ExchangeType, FeatureTrack, Outcome, Participant, Role,
    Segment, SessionRecord,
};

/// Frame rate of the generated grid (all times are multiples of 1/25 s).
const FPS: f64 = 25.0;
/// Minimum silence between two IPUs of the same speaker, in frames (0.16 s).
const SELF_GAP: i64 = 4;
/// Gap between a transfer IPU and the holder's follow-on IPU (0.20 s).
const FOLLOW_ON_GAP: i64 = 5;
/// Minimum length of a follow-on IPU (1.2 s).
const FOLLOW_ON_MIN: i64 = 30;

/// Distribution targets for one exchange type.
///
/// `overlap_rate` is honored for smooth turns (the share generated with a
/// short tail overlap rather than a gap); backchannels and interruptions
/// always overlap by construction. For embedded events the sampled overlap
/// is a lower bound — the realized overlap grows when later events extend
/// the host IPU further.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TypeTimings {
    /// Share of exchanges generated with positive overlap (0..=1).
    pub overlap_rate: f64,
    /// Mean overlap duration in seconds.
    pub overlap_mean: f64,
    /// Standard deviation of the overlap duration.
    pub overlap_sd: f64,
    /// Mean duration of the initiator's first IPU in seconds.
    pub first_ipu_mean: f64,
    /// Standard deviation of the first-IPU duration.
    pub first_ipu_sd: f64,
}

/// A planted feature shift: added to one side's track over the exchange
/// interval of that side (speaker: `[t1, t2)`; initiator: `[t3, t4)`) for
/// every generated exchange of the given type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureEffect {
    pub feature: String,
    pub exchange_type: ExchangeType,
    pub role: ExchangeRole,
    pub shift: f64,
}

/// Full recipe for a synthetic corpus. Deterministic given `seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FixtureSpec {
    pub seed: u64,
    pub n_sessions: usize,
    pub smooth_per_session: usize,
    pub backchannels_per_session: usize,
    pub successful_interruptions_per_session: usize,
    pub failed_interruptions_per_session: usize,
    pub smooth: TypeTimings,
    pub backchannel: TypeTimings,
    pub interruption: TypeTimings,
    /// Mean duration of a failed interruption's IPU, in seconds.
    pub failed_ipu_mean: f64,
    pub failed_ipu_sd: f64,
    /// Features to synthesize for both participants (may be empty).
    pub features: Vec<String>,
    /// Standard deviation of the Gaussian noise floor of every feature.
    pub noise_sd: f64,
    pub effects: Vec<FeatureEffect>,
    /// Classifier configuration the corpus is constructed to satisfy.
    pub classifier: ClassifierParams,
}

impl Default for FixtureSpec {
    fn default() -> Self {
        FixtureSpec {
            seed: 7,
            n_sessions: 2,
            smooth_per_session: 6,
            backchannels_per_session: 3,
            successful_interruptions_per_session: 3,
            failed_interruptions_per_session: 2,
            smooth: TypeTimings {
                overlap_rate: 0.5,
                overlap_mean: 0.25,
                overlap_sd: 0.10,
                first_ipu_mean: 2.2,
                first_ipu_sd: 0.5,
            },
            backchannel: TypeTimings {
                overlap_rate: 1.0,
                overlap_mean: 0.9,
                overlap_sd: 0.3,
                first_ipu_mean: 0.45,
                first_ipu_sd: 0.15,
            },
            interruption: TypeTimings {
                overlap_rate: 1.0,
                overlap_mean: 1.15,
                overlap_sd: 0.25,
                first_ipu_mean: 4.31,
                first_ipu_sd: 1.0,
            },
            failed_ipu_mean: 1.4,
            failed_ipu_sd: 0.15,
            features: vec!["F0".into(), "loudness".into(), "AU12".into()],
            noise_sd: 1.0,
            effects: vec![],
            classifier: ClassifierParams::default(),
        }
    }
}

impl FixtureSpec {
    pub fn validate(&self) -> Result<()> {
        self.classifier.validate()?;
        if self.n_sessions > 999 {
            return Err(Error::InvalidInput(format!(
                "n_sessions must be at most 999 (session ids use three digits), found {}",
                self.n_sessions
            )));
        }
        for (name, t) in [
            ("smooth", &self.smooth),
            ("backchannel", &self.backchannel),
            ("interruption", &self.interruption),
        ] {
            if !(0.0..=1.0).contains(&t.overlap_rate) {
                return Err(Error::InvalidInput(format!(
                    "{name}.overlap_rate must lie in [0, 1], found {}",
                    t.overlap_rate
                )));
            }
            for (field, v, need_nonneg) in [
                ("overlap_mean", t.overlap_mean, false),
                ("overlap_sd", t.overlap_sd, true),
                ("first_ipu_mean", t.first_ipu_mean, false),
                ("first_ipu_sd", t.first_ipu_sd, true),
            ] {
                if !v.is_finite() || (need_nonneg && v < 0.0) {
                    return Err(Error::InvalidInput(format!(
                        "{name}.{field} must be {}finite, found {v}",
                        if need_nonneg { "non-negative and " } else { "" }
                    )));
                }
            }
        }
        if !self.failed_ipu_mean.is_finite()
            || !self.failed_ipu_sd.is_finite()
            || self.failed_ipu_sd < 0.0
        {
            return Err(Error::InvalidInput(format!(
                "failed IPU duration parameters must be finite with non-negative sd \
                 (mean = {}, sd = {})",
                self.failed_ipu_mean, self.failed_ipu_sd
            )));
        }
        if !(self.noise_sd.is_finite() && self.noise_sd >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "noise_sd must be non-negative and finite, found {}",
                self.noise_sd
            )));
        }
        for (i, f) in self.features.iter().enumerate() {
            if f.trim().is_empty() {
                return Err(Error::InvalidInput(format!("feature {i} has an empty name")));
            }
            if self.features[..i].contains(f) {
                return Err(Error::InvalidInput(format!("duplicate feature {f:?}")));
            }
        }
        for e in &self.effects {
            if !self.features.contains(&e.feature) {
                return Err(Error::InvalidInput(format!(
                    "effect references feature {:?} which is not generated",
                    e.feature
                )));
            }
            if !e.shift.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "effect shift must be finite, found {}",
                    e.shift
                )));
            }
        }
        Ok(())
    }
}

/// One ground-truth label: the exchange the generator planted at `t3`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthRow {
    pub session_id: String,
    pub t3: f64,
    #[serde(rename = "type")]
    pub kind: ExchangeType,
    pub outcome: Outcome,
    pub initiator_id: String,
}

// ---------------------------------------------------------------------------
// Frame arithmetic and sampling
// ---------------------------------------------------------------------------

fn sec(frames: i64) -> f64 {
    frames as f64 / FPS
}

/// Smallest frame count whose duration is at least `seconds` (conservative).
fn lo_frames(seconds: f64) -> i64 {
    (seconds * FPS).ceil() as i64
}

/// Largest frame count whose duration is at most `seconds` (conservative).
fn hi_frames(seconds: f64) -> i64 {
    (seconds * FPS).floor() as i64
}

/// Sample a frame count from a normal distribution truncated to
/// `[lo, hi]` frames, by rejection (at most 1000 tries).
fn sample_frames(
    rng: &mut ChaCha8Rng,
    mean_s: f64,
    sd_s: f64,
    lo: i64,
    hi: i64,
    what: &str,
) -> Result<i64> {
    if lo > hi {
        return Err(Error::Infeasible(format!(
            "{what}: the admissible range is empty ({:.3} s .. {:.3} s)",
            sec(lo),
            sec(hi)
        )));
    }
    let dist = Normal::new(mean_s, sd_s)
        .map_err(|e| Error::InvalidInput(format!("{what}: bad distribution parameters: {e}")))?;
    for _ in 0..1000 {
        let frames = (dist.sample(rng) * FPS).round() as i64;
        if (lo..=hi).contains(&frames) {
            return Ok(frames);
        }
    }
    Err(Error::Infeasible(format!(
        "{what}: no draw from N({mean_s}, {sd_s}²) landed in [{:.3} s, {:.3} s] after 1000 \
         tries; the requested mean conflicts with the classifier thresholds or the structural \
         bounds of the exchange type",
        sec(lo),
        sec(hi)
    )))
}

// ---------------------------------------------------------------------------
// Session construction
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
enum Embedded {
    Backchannel,
    FailedInterruption,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Transfer {
    SmoothGap,
    SmoothOverlap,
    SuccessfulInterruption,
}

/// Classifier thresholds converted to conservative frame bounds.
struct Bounds {
    /// Maximum backchannel IPU length (stays under `backchannel_max_dur`).
    bc_len_hi: i64,
    /// Minimum IPU length that can never satisfy the backchannel rule.
    non_bc_lo: i64,
    /// Maximum overlap that still counts as a smooth tail.
    tail_hi: i64,
    /// Minimum overlap that can never count as a smooth tail.
    int_ov_lo: i64,
    /// `success_hold` rounded up to frames.
    hold: i64,
}

impl Bounds {
    fn from(params: &ClassifierParams) -> Bounds {
        Bounds {
            bc_len_hi: hi_frames(params.backchannel_max_dur - 0.04),
            non_bc_lo: lo_frames(params.backchannel_max_dur + 0.13),
            tail_hi: hi_frames(params.smooth_tail_overlap - 0.04),
            int_ov_lo: lo_frames(params.smooth_tail_overlap + 0.08),
            hold: lo_frames(params.success_hold.max(0.0)),
        }
    }
}

/// A planted exchange with its final anchors, in frames. `t2` of embedded
/// events is patched when their host IPU closes.
struct Realized {
    kind: ExchangeType,
    outcome: Outcome,
    speaker: usize,
    initiator: usize,
    t1: i64,
    t2: i64,
    t3: i64,
    t4: i64,
}

struct Turn {
    holder: usize,
    /// Start of the holder's open, still-extending IPU.
    open_start: i64,
    /// Minimum end of the open IPU, grown by embedded events.
    min_end: i64,
    had_embedded: bool,
}

struct SessionBuilder<'a> {
    spec: &'a FixtureSpec,
    bounds: Bounds,
    rng: ChaCha8Rng,
    /// Closed IPUs per participant, in frames.
    ipus: [Vec<(i64, i64)>; 2],
    /// Earliest next onset per participant (self-gap constraint).
    free: [i64; 2],
    /// Earliest frame where the next event may start.
    cursor: i64,
    turn: Turn,
    realized: Vec<Realized>,
    /// Indices into `realized` whose `t2` awaits the open IPU's end.
    pending_t2: Vec<usize>,
}

impl<'a> SessionBuilder<'a> {
    fn new(spec: &'a FixtureSpec, mut rng: ChaCha8Rng) -> Result<Self> {
        let bounds = Bounds::from(&spec.classifier);
        let opening = sample_frames(&mut rng, 4.0, 0.5, 50, 200, "opening IPU length")?;
        let start = 13; // 0.52 s lead-in
        Ok(SessionBuilder {
            spec,
            bounds,
            rng,
            ipus: [Vec::new(), Vec::new()],
            free: [0, 0],
            cursor: start + 10,
            turn: Turn {
                holder: 0,
                open_start: start,
                min_end: start + opening,
                had_embedded: false,
            },
            realized: Vec::new(),
            pending_t2: Vec::new(),
        })
    }

    fn listener(&self) -> usize {
        1 - self.turn.holder
    }

    /// Sample the initiator first-IPU length for a non-backchannel event.
    fn long_ipu(&mut self, timings: &TypeTimings, min_lo: i64, what: &str) -> Result<i64> {
        let lo = self.bounds.non_bc_lo.max(min_lo);
        let hi = lo.max(lo_frames(timings.first_ipu_mean + 4.0 * timings.first_ipu_sd)).max(lo + 160);
        sample_frames(
            &mut self.rng,
            timings.first_ipu_mean,
            timings.first_ipu_sd,
            lo,
            hi,
            what,
        )
    }

    fn embed(&mut self, ev: Embedded) -> Result<()> {
        let l = self.listener();
        let (len, over, kind, outcome) = match ev {
            Embedded::Backchannel => {
                let len = sample_frames(
                    &mut self.rng,
                    self.spec.backchannel.first_ipu_mean,
                    self.spec.backchannel.first_ipu_sd,
                    3,
                    self.bounds.bc_len_hi,
                    "backchannel IPU length",
                )?;
                // The host keeps talking past the backchannel's end.
                let lo = len + 2;
                let over = sample_frames(
                    &mut self.rng,
                    self.spec.backchannel.overlap_mean,
                    self.spec.backchannel.overlap_sd,
                    lo,
                    lo.max(lo_frames(
                        self.spec.backchannel.overlap_mean
                            + 4.0 * self.spec.backchannel.overlap_sd,
                    ))
                    .max(lo + 75),
                    "backchannel overlap",
                )?;
                (len, over, ExchangeType::Backchannel, Outcome::Unknown)
            }
            Embedded::FailedInterruption => {
                // A failed interruption's overlap is structurally bounded
                // below: the host outlasts the interrupter's IPU, which in
                // turn must be too long to pass for a backchannel. Sample
                // the overlap against that fixed bound first, then fit the
                // IPU length beneath it.
                let lo = self.bounds.int_ov_lo.max(self.bounds.non_bc_lo + SELF_GAP);
                let over = sample_frames(
                    &mut self.rng,
                    self.spec.interruption.overlap_mean,
                    self.spec.interruption.overlap_sd,
                    lo,
                    lo.max(lo_frames(
                        self.spec.interruption.overlap_mean
                            + 4.0 * self.spec.interruption.overlap_sd,
                    ))
                    .max(lo + 75),
                    "failed-interruption overlap",
                )?;
                let len = sample_frames(
                    &mut self.rng,
                    self.spec.failed_ipu_mean,
                    self.spec.failed_ipu_sd,
                    self.bounds.non_bc_lo,
                    over - SELF_GAP,
                    "failed-interruption IPU length",
                )?;
                (len, over, ExchangeType::Interruption, Outcome::Failed)
            }
        };
        let onset = self.cursor.max(self.free[l]).max(self.turn.open_start + 2);
        let t4 = onset + len;
        self.ipus[l].push((onset, t4));
        self.free[l] = t4 + SELF_GAP;
        self.cursor = t4 + SELF_GAP;
        self.turn.min_end = self.turn.min_end.max(onset + over);
        self.turn.had_embedded = true;
        self.realized.push(Realized {
            kind,
            outcome,
            speaker: self.turn.holder,
            initiator: l,
            t1: self.turn.open_start,
            t2: i64::MIN, // patched when the host IPU closes
            t3: onset,
            t4,
        });
        self.pending_t2.push(self.realized.len() - 1);
        Ok(())
    }

    /// Close the current open IPU at `end` and patch waiting anchors.
    fn close_host(&mut self, end: i64) {
        self.ipus[self.turn.holder].push((self.turn.open_start, end));
        self.free[self.turn.holder] = end + SELF_GAP;
        for idx in self.pending_t2.drain(..) {
            self.realized[idx].t2 = end;
        }
    }

    /// Open the next turn: the transfer IPU `[t3, t4)` already belongs to
    /// the new holder, who continues with a follow-on IPU.
    fn open_turn(&mut self, new_holder: usize, t4: i64) {
        let follow_on = t4 + FOLLOW_ON_GAP;
        self.turn = Turn {
            holder: new_holder,
            open_start: follow_on,
            min_end: follow_on + FOLLOW_ON_MIN,
            had_embedded: false,
        };
        self.cursor = (follow_on + SELF_GAP).max(t4 + self.bounds.hold + SELF_GAP);
    }

    fn transfer(&mut self, tr: Transfer) -> Result<()> {
        let l = self.listener();
        let holder = self.turn.holder;
        match tr {
            Transfer::SmoothGap => {
                if self.turn.had_embedded {
                    return Err(Error::Internal(
                        "scheduler placed a gapped smooth turn after embedded events".into(),
                    ));
                }
                let end = self.turn.min_end.max(self.cursor);
                self.close_host(end);
                let gap = sample_frames(&mut self.rng, 0.6, 0.25, SELF_GAP, 50, "turn gap")?;
                let t3 = (end + gap).max(self.free[l]);
                let len = self.long_ipu(&self.spec.smooth, 0, "smooth first IPU length")?;
                let t4 = t3 + len;
                self.ipus[l].push((t3, t4));
                self.realized.push(Realized {
                    kind: ExchangeType::SmoothTurn,
                    outcome: Outcome::Unknown,
                    speaker: holder,
                    initiator: l,
                    t1: self.turn.open_start,
                    t2: end,
                    t3,
                    t4,
                });
                self.open_turn(l, t4);
            }
            Transfer::SmoothOverlap | Transfer::SuccessfulInterruption => {
                let (kind, outcome, over, len) = if tr == Transfer::SmoothOverlap {
                    let over = sample_frames(
                        &mut self.rng,
                        self.spec.smooth.overlap_mean,
                        self.spec.smooth.overlap_sd,
                        2,
                        self.bounds.tail_hi,
                        "smooth tail overlap",
                    )?;
                    let len = self.long_ipu(&self.spec.smooth, 0, "smooth first IPU length")?;
                    (ExchangeType::SmoothTurn, Outcome::Unknown, over, len)
                } else {
                    let lo = self.bounds.int_ov_lo;
                    let over = sample_frames(
                        &mut self.rng,
                        self.spec.interruption.overlap_mean,
                        self.spec.interruption.overlap_sd,
                        lo,
                        lo.max(lo_frames(
                            self.spec.interruption.overlap_mean
                                + 4.0 * self.spec.interruption.overlap_sd,
                        ))
                        .max(lo + 75),
                        "interruption overlap",
                    )?;
                    let len = self.long_ipu(
                        &self.spec.interruption,
                        over + SELF_GAP,
                        "interruption first IPU length",
                    )?;
                    (ExchangeType::Interruption, Outcome::Successful, over, len)
                };
                let end = self
                    .turn
                    .min_end
                    .max(self.cursor.max(self.free[l]) + over)
                    .max(self.turn.open_start + over + SELF_GAP);
                let t3 = end - over;
                let t1 = self.turn.open_start;
                self.close_host(end);
                let t4 = t3 + len;
                self.ipus[l].push((t3, t4));
                self.realized.push(Realized {
                    kind,
                    outcome,
                    speaker: holder,
                    initiator: l,
                    t1,
                    t2: end,
                    t3,
                    t4,
                });
                self.open_turn(l, t4);
            }
        }
        Ok(())
    }

    fn finish(mut self, session_id: &str) -> Result<(SessionRecord, Vec<GroundTruthRow>)> {
        let end = self.turn.min_end.max(self.cursor);
        self.close_host(end);

        let ids = ["p1", "p2"];
        let extent = self
            .ipus
            .iter()
            .filter_map(|v| v.last().map(|s| s.1))
            .max()
            .unwrap_or(0);

        // Feature tracks: seeded noise over the whole extent, plus effects.
        let n = extent as usize;
        let mut tracks = Vec::new();
        for (p, pid) in ids.iter().enumerate() {
            for feature in &self.spec.features {
                let mut values: Vec<f64> = (0..n)
                    .map(|_| self.spec.noise_sd * self.rng.sample::<f64, _>(StandardNormal))
                    .collect();
                for effect in &self.spec.effects {
                    if &effect.feature != feature {
                        continue;
                    }
                    for r in &self.realized {
                        if r.kind != effect.exchange_type {
                            continue;
                        }
                        let (side, lo, hi) = match effect.role {
                            ExchangeRole::Speaker => (r.speaker, r.t1, r.t2),
                            ExchangeRole::Initiator => (r.initiator, r.t3, r.t4),
                        };
                        if side != p {
                            continue;
                        }
                        let (lo, hi) = (lo.max(0) as usize, (hi.max(0) as usize).min(n));
                        for v in &mut values[lo..hi] {
                            *v += effect.shift;
                        }
                    }
                }
                tracks.push(FeatureTrack {
                    participant_id: pid.to_string(),
                    feature_name: feature.clone(),
                    sample_rate_hz: FPS,
                    start_time: 0.0,
                    values: values.into_iter().map(Some).collect(),
                });
            }
        }

        let mut ipus = BTreeMap::new();
        for (p, pid) in ids.iter().enumerate() {
            ipus.insert(
                pid.to_string(),
                self.ipus[p]
                    .iter()
                    .map(|&(a, b)| Segment::new(sec(a), sec(b)))
                    .collect(),
            );
        }
        let record = SessionRecord {
            session_id: session_id.to_string(),
            participants: vec![
                Participant {
                    id: "p1".into(),
                    role: Role::Expert,
                },
                Participant {
                    id: "p2".into(),
                    role: Role::Novice,
                },
            ],
            ipus,
            tracks,
            exchanges: Vec::new(),
            session_length: sec(extent) + 1.0,
        };
        let problems = validate_session(&record);
        if !problems.is_empty() {
            return Err(Error::Internal(format!(
                "generated session violates its own invariants: {}",
                problems.join("; ")
            )));
        }

        let truth = self
            .realized
            .iter()
            .map(|r| GroundTruthRow {
                session_id: session_id.to_string(),
                t3: sec(r.t3),
                kind: r.kind,
                outcome: r.outcome,
                initiator_id: ids[r.initiator].to_string(),
            })
            .collect();
        Ok((record, truth))
    }
}

fn build_session(spec: &FixtureSpec, index: usize) -> Result<(SessionRecord, Vec<GroundTruthRow>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(index as u64 + 1);

    // Feasibility of the requested mix against the classifier thresholds.
    let bounds = Bounds::from(&spec.classifier);
    let n_overlap_smooth = ((spec.smooth.overlap_rate * spec.smooth_per_session as f64).round()
        as usize)
        .min(spec.smooth_per_session);
    let n_gap_smooth = spec.smooth_per_session - n_overlap_smooth;
    if spec.backchannels_per_session > 0 && bounds.bc_len_hi < 3 {
        return Err(Error::Infeasible(format!(
            "backchannel_max_dur = {} s leaves no room for a backchannel IPU of at least 0.12 s",
            spec.classifier.backchannel_max_dur
        )));
    }
    if n_overlap_smooth > 0 {
        if bounds.tail_hi < 2 {
            return Err(Error::Infeasible(format!(
                "smooth_tail_overlap = {} s leaves no room for an overlapped smooth turn",
                spec.classifier.smooth_tail_overlap
            )));
        }
        if spec.smooth.overlap_mean > spec.classifier.smooth_tail_overlap {
            return Err(Error::Infeasible(format!(
                "smooth overlap mean {} s exceeds smooth_tail_overlap = {} s; such turns would \
                 classify as interruptions",
                spec.smooth.overlap_mean, spec.classifier.smooth_tail_overlap
            )));
        }
    }
    if (spec.successful_interruptions_per_session > 0
        || spec.failed_interruptions_per_session > 0)
        && spec.interruption.overlap_mean <= spec.classifier.smooth_tail_overlap
    {
        return Err(Error::Infeasible(format!(
            "interruption overlap mean {} s does not exceed smooth_tail_overlap = {} s; such \
             overlaps would classify as smooth turns",
            spec.interruption.overlap_mean, spec.classifier.smooth_tail_overlap
        )));
    }

    let mut transfers = Vec::new();
    transfers.extend(std::iter::repeat(Transfer::SmoothGap).take(n_gap_smooth));
    transfers.extend(std::iter::repeat(Transfer::SmoothOverlap).take(n_overlap_smooth));
    transfers.extend(
        std::iter::repeat(Transfer::SuccessfulInterruption)
            .take(spec.successful_interruptions_per_session),
    );
    let mut embeds = Vec::new();
    embeds.extend(
        std::iter::repeat(Embedded::Backchannel).take(spec.backchannels_per_session),
    );
    embeds.extend(
        std::iter::repeat(Embedded::FailedInterruption)
            .take(spec.failed_interruptions_per_session),
    );

    transfers.shuffle(&mut rng);
    embeds.shuffle(&mut rng);

    // Embedded events may only precede overlapping transfers (or trail at
    // the session end); distribute them round-robin over those slots.
    let n_slots = n_overlap_smooth + spec.successful_interruptions_per_session + 1;
    let mut buckets: Vec<Vec<Embedded>> = vec![Vec::new(); n_slots];
    for (j, e) in embeds.into_iter().enumerate() {
        buckets[j % n_slots].push(e);
    }

    let mut builder = SessionBuilder::new(spec, rng)?;
    let mut slot = 0;
    for tr in transfers {
        if tr != Transfer::SmoothGap {
            for &e in &buckets[slot] {
                builder.embed(e)?;
            }
            slot += 1;
        }
        builder.transfer(tr)?;
    }
    for &e in &buckets[n_slots - 1] {
        builder.embed(e)?;
    }

    builder.finish(&format!("s{:03}", index + 1))
}

/// Generate the whole corpus: sessions (without exchanges — classification
/// is the pipeline's job) plus the ground-truth labels of every planted
/// exchange, sorted by session and onset.
pub fn generate_fixture(spec: &FixtureSpec) -> Result<(Vec<SessionRecord>, Vec<GroundTruthRow>)> {
    spec.validate()?;
    let mut sessions = Vec::with_capacity(spec.n_sessions);
    let mut truth = Vec::new();
    for i in 0..spec.n_sessions {
        let (record, rows) =
            build_session(spec, i).map_err(|e| e.in_stage("fixture generation", format!("session {}", i + 1)))?;
        sessions.push(record);
        truth.extend(rows);
    }
    Ok((sessions, truth))
}

// ---------------------------------------------------------------------------
// On-disk layout
// ---------------------------------------------------------------------------

const GROUND_TRUTH_HEADER: [&str; 5] = ["session_id", "t3", "type", "outcome", "initiator_id"];

/// Write ground-truth rows as CSV.
pub fn write_ground_truth_csv(path: &Path, rows: &[GroundTruthRow]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(GROUND_TRUTH_HEADER)
        .map_err(|e| Error::Internal(format!("CSV serialization failed: {e}")))?;
    for r in rows {
        writer
            .write_record([
                r.session_id.clone(),
                r.t3.to_string(),
                r.kind.to_string(),
                r.outcome.to_string(),
                r.initiator_id.clone(),
            ])
            .map_err(|e| Error::Internal(format!("CSV serialization failed: {e}")))?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::Internal(format!("CSV serialization failed: {e}")))?;
    std::fs::write(path, bytes).map_err(io_error(path))
}

/// Load a ground-truth CSV written by [`write_ground_truth_csv`].
pub fn load_ground_truth_csv(path: &Path) -> Result<Vec<GroundTruthRow>> {
    let content = std::fs::read_to_string(path).map_err(io_error(path))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(content.as_bytes());
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?
        .iter()
        .map(str::to_string)
        .collect();
    if headers != GROUND_TRUTH_HEADER {
        return Err(Error::InvalidInput(format!(
            "{}: expected header \"{}\", found \"{}\"",
            path.display(),
            GROUND_TRUTH_HEADER.join(","),
            headers.join(",")
        )));
    }
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record =
            record.map_err(|e| parse_error(path, row, format!("malformed record: {e}")))?;
        let get = |k: usize| record.get(k).unwrap_or("").trim();
        let t3: f64 = get(1)
            .parse()
            .map_err(|_| parse_error(path, row, format!("column \"t3\": invalid number {:?}", get(1))))?;
        out.push(GroundTruthRow {
            session_id: get(0).to_string(),
            t3,
            kind: get(2)
                .parse()
                .map_err(|e| parse_error(path, row, format!("column \"type\": {e}")))?,
            outcome: get(3)
                .parse()
                .map_err(|e| parse_error(path, row, format!("column \"outcome\": {e}")))?,
            initiator_id: get(4).to_string(),
        });
    }
    Ok(out)
}

/// Write a generated corpus to disk:
///
/// ```text
/// <dir>/ground_truth.csv
/// <dir>/sessions/<session_id>/manifest.json
/// <dir>/sessions/<session_id>/<participant>_vad.csv
/// <dir>/sessions/<session_id>/<participant>_features.csv   (if any features)
/// ```
///
/// Returns the manifest paths in session order.
pub fn write_fixture(spec: &FixtureSpec, dir: &Path) -> Result<Vec<PathBuf>> {
    let (sessions, truth) = generate_fixture(spec)?;
    let sessions_dir = dir.join("sessions");
    std::fs::create_dir_all(&sessions_dir).map_err(io_error(&sessions_dir))?;

    let mut manifests = Vec::with_capacity(sessions.len());
    for s in &sessions {
        let sdir = sessions_dir.join(&s.session_id);
        std::fs::create_dir_all(&sdir).map_err(io_error(&sdir))?;

        let mut participants = Vec::new();
        for p in &s.participants {
            let vad_name = format!("{}_vad.csv", p.id);
            write_segments_csv(&sdir.join(&vad_name), s.ipus_of(&p.id))?;
            let tracks: Vec<FeatureTrack> = s
                .tracks
                .iter()
                .filter(|t| t.participant_id == p.id)
                .cloned()
                .collect();
            let feature_csv_paths = if tracks.is_empty() {
                vec![]
            } else {
                let fname = format!("{}_features.csv", p.id);
                write_feature_csv(&sdir.join(&fname), &tracks)?;
                vec![fname]
            };
            participants.push(ManifestParticipant {
                id: p.id.clone(),
                role: p.role,
                audio_path: None,
                vad_path: Some(vad_name),
                feature_csv_paths,
            });
        }
        let manifest = SessionManifest {
            session_id: s.session_id.clone(),
            sample_rate_hz: FPS,
            participants,
            annotations_path: None,
        };
        let mpath = sdir.join("manifest.json");
        let text = serde_json::to_string_pretty(&manifest)
            .map_err(|e| Error::Internal(format!("manifest serialization failed: {e}")))?;
        std::fs::write(&mpath, text + "\n").map_err(io_error(&mpath))?;
        manifests.push(mpath);
    }

    write_ground_truth_csv(&dir.join("ground_truth.csv"), &truth)?;
    Ok(manifests)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exchange::classify;
    use crate::io::manifest::load_session;
    use crate::segmentation::{detect_switch_candidates, merge_to_ipus, VadParams};

    fn tiny_spec() -> FixtureSpec {
        FixtureSpec {
            n_sessions: 1,
            smooth_per_session: 1,
            backchannels_per_session: 0,
            successful_interruptions_per_session: 0,
            failed_interruptions_per_session: 0,
            smooth: TypeTimings {
                overlap_rate: 0.0,
                ..FixtureSpec::default().smooth
            },
            features: vec![],
            ..FixtureSpec::default()
        }
    }

    /// Re-run candidate detection and classification and compare with truth.
    fn assert_recovers(spec: &FixtureSpec) {
        let (sessions, truth) = generate_fixture(spec).unwrap();
        let mut seen = 0;
        for s in &sessions {
            let a = s.ipus_of("p1");
            let b = s.ipus_of("p2");
            // Generated IPUs are already maximal: merging changes nothing.
            assert_eq!(merge_to_ipus(a, 0.05).unwrap(), a);
            assert_eq!(merge_to_ipus(b, 0.05).unwrap(), b);
            assert!(validate_session(s).is_empty());

            let rows: Vec<&GroundTruthRow> =
                truth.iter().filter(|r| r.session_id == s.session_id).collect();
            let candidates = detect_switch_candidates("p1", a, "p2", b).unwrap();
            assert_eq!(
                candidates.len(),
                rows.len(),
                "{}: candidate count mismatch",
                s.session_id
            );
            for (c, row) in candidates.iter().zip(&rows) {
                let (spk, ini) = if c.initiator_id == "p1" { (b, a) } else { (a, b) };
                let e = classify(c, spk, ini, &spec.classifier).unwrap();
                assert_eq!(c.onset, row.t3, "{}: onset", s.session_id);
                assert_eq!(e.kind, row.kind, "{}: type at {}", s.session_id, row.t3);
                assert_eq!(e.outcome, row.outcome, "{}: outcome at {}", s.session_id, row.t3);
                assert_eq!(e.initiator_id, row.initiator_id);
                seen += 1;
            }
        }
        let per_session = spec.smooth_per_session
            + spec.backchannels_per_session
            + spec.successful_interruptions_per_session
            + spec.failed_interruptions_per_session;
        assert_eq!(seen, per_session * spec.n_sessions);
        // Per-type counts match the request exactly.
        let count = |k: ExchangeType, o: Option<Outcome>| {
            truth
                .iter()
                .filter(|r| r.kind == k && o.map_or(true, |o| r.outcome == o))
                .count()
        };
        assert_eq!(
            count(ExchangeType::SmoothTurn, None),
            spec.smooth_per_session * spec.n_sessions
        );
        assert_eq!(
            count(ExchangeType::Backchannel, None),
            spec.backchannels_per_session * spec.n_sessions
        );
        assert_eq!(
            count(ExchangeType::Interruption, Some(Outcome::Successful)),
            spec.successful_interruptions_per_session * spec.n_sessions
        );
        assert_eq!(
            count(ExchangeType::Interruption, Some(Outcome::Failed)),
            spec.failed_interruptions_per_session * spec.n_sessions
        );
    }

    #[test]
    fn deterministic_across_calls() {
        let spec = FixtureSpec::default();
        let a = generate_fixture(&spec).unwrap();
        let b = generate_fixture(&spec).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
    }

    #[test]
    fn different_seeds_differ() {
        let a = generate_fixture(&FixtureSpec::default()).unwrap();
        let b = generate_fixture(&FixtureSpec {
            seed: 8,
            ..FixtureSpec::default()
        })
        .unwrap();
        assert_ne!(a.0[0].ipus, b.0[0].ipus);
    }

    #[test]
    fn single_smooth_turn_is_recovered() {
        assert_recovers(&tiny_spec());
        let (sessions, truth) = generate_fixture(&tiny_spec()).unwrap();
        assert_eq!(sessions.len(), 1);
        assert_eq!(truth.len(), 1);
        assert_eq!(truth[0].kind, ExchangeType::SmoothTurn);
    }

    #[test]
    fn mixed_corpus_is_recovered_exactly() {
        assert_recovers(&FixtureSpec {
            n_sessions: 3,
            ..FixtureSpec::default()
        });
    }

    #[test]
    fn all_embedded_corpus_is_recovered() {
        // No transfers at all: everything nests in the opening turn.
        assert_recovers(&FixtureSpec {
            n_sessions: 2,
            smooth_per_session: 0,
            backchannels_per_session: 4,
            successful_interruptions_per_session: 0,
            failed_interruptions_per_session: 2,
            ..FixtureSpec::default()
        });
    }

    #[test]
    fn gap_only_smooth_corpus_is_recovered() {
        assert_recovers(&FixtureSpec {
            n_sessions: 2,
            smooth_per_session: 5,
            backchannels_per_session: 2,
            successful_interruptions_per_session: 0,
            failed_interruptions_per_session: 0,
            smooth: TypeTimings {
                overlap_rate: 0.0,
                ..FixtureSpec::default().smooth
            },
            ..FixtureSpec::default()
        });
    }

    #[test]
    fn infeasible_specs_are_rejected() {
        // Interruption overlaps below the smooth tail bound.
        let e = generate_fixture(&FixtureSpec {
            interruption: TypeTimings {
                overlap_mean: 0.3,
                ..FixtureSpec::default().interruption
            },
            ..FixtureSpec::default()
        })
        .unwrap_err();
        assert_eq!(e.exit_code(), 2, "{e}");
        assert!(e.to_string().contains("smooth_tail_overlap"), "{e}");

        // Smooth overlaps beyond the smooth tail bound.
        let e = generate_fixture(&FixtureSpec {
            smooth: TypeTimings {
                overlap_mean: 0.9,
                overlap_rate: 1.0,
                ..FixtureSpec::default().smooth
            },
            ..FixtureSpec::default()
        })
        .unwrap_err();
        assert_eq!(e.exit_code(), 2, "{e}");
        assert!(e.to_string().contains("classify as interruptions"), "{e}");
    }

    #[test]
    fn planted_effect_shifts_the_initiator_interval() {
        let spec = FixtureSpec {
            n_sessions: 1,
            smooth_per_session: 0,
            backchannels_per_session: 0,
            successful_interruptions_per_session: 6,
            failed_interruptions_per_session: 0,
            features: vec!["F0".into()],
            noise_sd: 0.5,
            effects: vec![FeatureEffect {
                feature: "F0".into(),
                exchange_type: ExchangeType::Interruption,
                role: ExchangeRole::Initiator,
                shift: 5.0,
            }],
            ..FixtureSpec::default()
        };
        let (sessions, truth) = generate_fixture(&spec).unwrap();
        let s = &sessions[0];
        let mut inside = Vec::new();
        for row in &truth {
            let track = s.track(&row.initiator_id, "F0").unwrap();
            // The initiator's first IPU starts at t3; probe its first frame.
            let i = track.index_nearest(row.t3).unwrap();
            inside.push(track.values[i].unwrap());
        }
        let mean_inside = inside.iter().sum::<f64>() / inside.len() as f64;
        assert!(mean_inside > 3.0, "expected the +5 shift, got {mean_inside}");
        // A frame well before the first exchange is unshifted.
        let track = s.track("p1", "F0").unwrap();
        assert!(track.values[0].unwrap().abs() < 3.0);
    }

    #[test]
    fn written_fixture_round_trips_through_the_loader() {
        let dir = tempfile::tempdir().unwrap();
        let spec = FixtureSpec {
            n_sessions: 2,
            ..FixtureSpec::default()
        };
        let manifests = write_fixture(&spec, dir.path()).unwrap();
        assert_eq!(manifests.len(), 2);
        let (sessions, truth) = generate_fixture(&spec).unwrap();

        for (mpath, want) in manifests.iter().zip(&sessions) {
            let (got, annotations) = load_session(mpath, &VadParams::default(), 0.05).unwrap();
            assert!(annotations.is_empty());
            assert_eq!(&got, want);
        }
        let loaded_truth = load_ground_truth_csv(&dir.path().join("ground_truth.csv")).unwrap();
        assert_eq!(loaded_truth, truth);
    }
}
