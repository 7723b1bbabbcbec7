//! Analysis of turn-taking in dyadic conversations.
//!
//! The library covers the full path from raw signals to corpus statistics:
//!
//! 1. **Segmentation** ([`segmentation`]): energy-based voice activity
//!    detection on mono audio, merging of speech segments into inter-pausal
//!    units (IPUs), and detection of switch candidates — moments where the
//!    listener starts an IPU while the other participant holds the floor.
//! 2. **Classification** ([`exchange`]): each switch candidate becomes an
//!    exchange — a smooth turn, a backchannel, or an interruption with a
//!    successful or failed outcome — plus merging of manual annotations and
//!    census counts.
//! 3. **Statistics** ([`stats`]): timing distributions per exchange type,
//!    role asymmetries, onset-aligned average feature curves, and Welch
//!    t-tests comparing features between exchange groups.
//! 4. **Synchrony** ([`synchrony`]): Pearson correlation, time-lagged
//!    cross-correlation and dynamic time warping between participants'
//!    feature tracks, pointwise and over sliding windows.
//! 5. **I/O** ([`io`]): CSV formats for features, segments, annotations and
//!    exchanges; mono WAV reading; session manifests.
//!
//! All computations are deterministic: the same inputs produce bit-identical
//! outputs regardless of thread count or platform.

pub mod error;
pub mod exchange;
pub mod fixture;
pub mod io;
pub mod model;
pub mod pipeline;
pub mod segmentation;
pub mod stats;
pub mod synchrony;

pub use error::{Error, Result};
pub use exchange::{
    apply_annotations, classify, exchange_census, AnnotationRow, Census, ClassifierParams,
    ANNOTATION_MATCH_TOLERANCE,
};
pub use fixture::{
    generate_fixture, write_fixture, FeatureEffect, FixtureSpec, GroundTruthRow, TypeTimings,
};
pub use pipeline::{
    classify_session, corpus_feature_names, load_classified_sessions, normalize_session_tracks,
    run_pipeline, write_curve_files, write_sync_files, AnalysisReport, FeatureSection,
    PipelineConfig, SyncConfig,
};
pub use model::{
    validate_session, validate_session_with_gap, Anchors, Exchange, ExchangeRole, ExchangeSource,
    ExchangeType, FeatureTrack, Intent, IntentDetail, Outcome, Participant, Role, Segment,
    SessionRecord, IPU_GAP_THRESHOLD,
};
pub use segmentation::{
    detect_switch_candidates, energy_vad, floor_holder_at, floor_holder_before, merge_to_ipus,
    SwitchCandidate, VadParams,
};
pub use stats::{welch_t_test, TTestResult};
pub use synchrony::{dtw, pcc, sliding_synchrony, tlcc, SyncCurve, SyncMeasure, SyncParams};
