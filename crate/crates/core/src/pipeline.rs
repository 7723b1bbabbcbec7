//! End-to-end analysis pipeline and report output.
//!
//! [`run_pipeline`] chains every stage — manifest ingestion, VAD/IPU
//! derivation, switch-candidate detection, classification, annotation
//! merging, normalization, corpus statistics, onset-aligned curves and
//! synchrony — and writes a report directory:
//!
//! ```text
//! <out>/report.json                          scalar statistics + parameters
//! <out>/exchanges.csv                        one row per exchange
//! <out>/curves/<feature>_<type>_<role>.csv   onset-aligned feature curves
//! <out>/sync/<measure>_<feature>_<type>.csv  onset-aligned synchrony curves
//! ```
//!
//! Sessions are processed in parallel (bounded by `jobs`) and reduced in
//! session-id order, so outputs are byte-identical regardless of worker
//! count; `report.json` differs across reruns only in its timestamp field.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exchange::{
    apply_annotations, classify, exchange_census, AnnotationRow, Census, ClassifierParams,
    ANNOTATION_MATCH_TOLERANCE,
};
use crate::io::csv::{write_exchanges_csv, write_segments_csv};
use crate::io::io_error;
use crate::io::manifest::load_session;
use crate::model::{
    ExchangeRole, ExchangeType, FeatureTrack, Role, SessionRecord, IPU_GAP_THRESHOLD,
};
use crate::segmentation::{detect_switch_candidates, VadParams};
use crate::stats::{
    aligned_average_curves, feature_comparison, normalize_track, resample_track, role_stats,
    timing_stats, AlignedCurve, AlignedCurveParams, ComparisonReport, RoleReport, TimingReport,
};
use crate::synchrony::{sliding_synchrony, SyncMeasure, SyncParams};

/// Synchrony settings of the pipeline: one sliding-window configuration
/// applied per measure in `measures`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyncConfig {
    /// Window length in seconds.
    pub window: f64,
    /// Step between window starts, in frames.
    pub hop: usize,
    /// Largest TLCC lag in seconds.
    pub max_lag: f64,
    /// Optional Sakoe-Chiba band for DTW, in frames.
    pub dtw_band: Option<usize>,
    pub measures: Vec<SyncMeasure>,
}

impl Default for SyncConfig {
    fn default() -> Self {
        let p = SyncParams::default();
        SyncConfig {
            window: p.window,
            hop: p.hop,
            max_lag: p.max_lag,
            dtw_band: p.dtw_band,
            measures: vec![SyncMeasure::Pcc, SyncMeasure::Tlcc, SyncMeasure::Dtw],
        }
    }
}

impl SyncConfig {
    fn params(&self, measure: SyncMeasure) -> SyncParams {
        SyncParams {
            measure,
            window: self.window,
            hop: self.hop,
            max_lag: self.max_lag,
            dtw_band: self.dtw_band,
        }
    }
}

/// Every knob of the pipeline; the whole struct is echoed into the report
/// so each number is reproducible from the report alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub vad: VadParams,
    pub classifier: ClassifierParams,
    /// Silences shorter than this merge adjacent VAD segments into one IPU.
    pub ipu_gap: f64,
    /// Match window between an annotation time and an automatic exchange.
    pub annotation_tolerance: f64,
    pub sync: SyncConfig,
    pub curves: AlignedCurveParams,
    /// Significance level of every reported test.
    pub alpha: f64,
    /// Z-score tracks per (session, participant, feature) before analysis.
    pub normalize_features: bool,
    /// Restrict analysis to these features; `null` means every feature
    /// present in the corpus.
    pub features: Option<Vec<String>>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            vad: VadParams::default(),
            classifier: ClassifierParams::default(),
            ipu_gap: IPU_GAP_THRESHOLD,
            annotation_tolerance: ANNOTATION_MATCH_TOLERANCE,
            sync: SyncConfig::default(),
            curves: AlignedCurveParams::default(),
            alpha: 0.05,
            normalize_features: true,
            features: None,
        }
    }
}

/// Feature-dependent analyses; absent from the report when the corpus has
/// no feature tracks (for example VAD-only manifests).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSection {
    pub names: Vec<String>,
    pub normalized: bool,
    pub comparison: ComparisonReport,
    /// Files written under the output directory, relative paths.
    pub curve_files: Vec<String>,
    pub sync_files: Vec<String>,
}

/// The scalar content of `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    /// Seconds since the UNIX epoch at write time; the only field that may
    /// differ between reruns on identical inputs.
    pub generated_at: u64,
    pub params: PipelineConfig,
    pub session_ids: Vec<String>,
    pub census: Census,
    pub timing: TimingReport,
    pub roles: RoleReport,
    pub features: Option<FeatureSection>,
}

/// Detect switch candidates, classify them, and merge annotations; returns
/// the record with `exchanges` filled in.
pub fn classify_session(
    mut record: SessionRecord,
    annotations: &[AnnotationRow],
    classifier: &ClassifierParams,
    tolerance: f64,
) -> Result<SessionRecord> {
    if record.participants.len() != 2 {
        return Err(Error::InvalidInput(format!(
            "session {} must have exactly 2 participants, found {}",
            record.session_id,
            record.participants.len()
        )));
    }
    let merged = {
        let a = record.participants[0].id.clone();
        let b = record.participants[1].id.clone();
        let ipus_a = record.ipus_of(&a);
        let ipus_b = record.ipus_of(&b);
        let candidates = detect_switch_candidates(&a, ipus_a, &b, ipus_b)?;
        let mut exchanges = Vec::with_capacity(candidates.len());
        for c in &candidates {
            let (spk, ini) = if c.initiator_id == a {
                (ipus_b, ipus_a)
            } else {
                (ipus_a, ipus_b)
            };
            exchanges.push(classify(c, spk, ini, classifier)?);
        }
        apply_annotations(&exchanges, annotations, &record.ipus, tolerance)?
    };
    record.exchanges = merged;
    Ok(record)
}

/// Z-score every track in place. Tracks with fewer than two present
/// samples cannot be normalized and are kept as-is (they cannot contribute
/// to any statistic either).
pub fn normalize_session_tracks(mut record: SessionRecord) -> Result<SessionRecord> {
    let mut tracks = Vec::with_capacity(record.tracks.len());
    for track in record.tracks.drain(..) {
        if track.values.iter().flatten().count() < 2 {
            tracks.push(track);
        } else {
            tracks.push(normalize_track(&track)?);
        }
    }
    record.tracks = tracks;
    Ok(record)
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '_') {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn write_offset_csv(
    path: &Path,
    offsets: &[i64],
    means: &[Option<f64>],
    supports: &[u64],
) -> Result<()> {
    let mut text = String::from("offset,mean,support\n");
    for ((o, m), s) in offsets.iter().zip(means).zip(supports) {
        text.push_str(&o.to_string());
        text.push(',');
        if let Some(m) = m {
            text.push_str(&m.to_string());
        }
        text.push(',');
        text.push_str(&s.to_string());
        text.push('\n');
    }
    std::fs::write(path, text).map_err(io_error(path))
}

/// Average a per-session series (here: a synchrony curve) around exchange
/// onsets of one type, with the same conventions as the feature curves:
/// offsets at the curve rate, sample at `t3 + offset`, masked to the
/// exchange's own `[t1, t4)` span, missing-aware mean with support counts.
fn align_series_at_onsets(
    sessions: &[SessionRecord],
    series: &[Option<FeatureTrack>],
    kind: ExchangeType,
    params: &AlignedCurveParams,
) -> Result<(Vec<i64>, Vec<Option<f64>>, Vec<u64>)> {
    let rate = params.sample_rate_hz;
    let lo = -(params.before * rate).round() as i64;
    let hi = (params.after * rate).round() as i64;
    let offsets: Vec<i64> = (lo..=hi).collect();
    let mut sums = vec![0.0f64; offsets.len()];
    let mut counts = vec![0u64; offsets.len()];

    for (session, series) in sessions.iter().zip(series) {
        let Some(series) = series else { continue };
        let series = if (series.sample_rate_hz - rate).abs() > 1e-9 {
            std::borrow::Cow::Owned(resample_track(series, rate)?)
        } else {
            std::borrow::Cow::Borrowed(series)
        };
        for e in session.exchanges.iter().filter(|e| e.kind == kind) {
            for (slot, k) in offsets.iter().enumerate() {
                let t = e.anchors.t3 + *k as f64 / rate;
                if t < e.anchors.t1 || t >= e.anchors.t4 {
                    continue;
                }
                if let Some(v) = series.index_nearest(t).and_then(|i| series.values[i]) {
                    sums[slot] += v;
                    counts[slot] += 1;
                }
            }
        }
    }
    let means = sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| if c > 0 { Some(s / c as f64) } else { None })
        .collect();
    Ok((offsets, means, counts))
}

fn timestamp() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Ingest, classify, and (optionally) normalize every session, in parallel
/// up to `jobs` workers (`0` = one per CPU). The result is sorted by
/// session id, so downstream reductions are deterministic regardless of
/// worker count. Errors carry the stage name and the offending input.
pub fn load_classified_sessions(
    manifest_paths: &[PathBuf],
    config: &PipelineConfig,
    jobs: usize,
) -> Result<Vec<SessionRecord>> {
    config.classifier.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Internal(format!("cannot build worker pool: {e}")))?;
    let results: Vec<Result<SessionRecord>> = pool.install(|| {
        manifest_paths
            .par_iter()
            .map(|path| {
                let locus = path.display().to_string();
                let (record, annotations) = load_session(path, &config.vad, config.ipu_gap)
                    .map_err(|e| e.in_stage("ingest", locus.clone()))?;
                let session_locus = format!("session {}", record.session_id);
                let record = classify_session(
                    record,
                    &annotations,
                    &config.classifier,
                    config.annotation_tolerance,
                )
                .map_err(|e| e.in_stage("classification", session_locus.clone()))?;
                if config.normalize_features {
                    normalize_session_tracks(record)
                        .map_err(|e| e.in_stage("normalization", session_locus))
                } else {
                    Ok(record)
                }
            })
            .collect()
    });
    let mut sessions = Vec::with_capacity(results.len());
    for r in results {
        sessions.push(r?);
    }
    sessions.sort_by(|a, b| a.session_id.cmp(&b.session_id));
    for pair in sessions.windows(2) {
        if pair[0].session_id == pair[1].session_id {
            return Err(Error::InvalidInput(format!(
                "two manifests share the session id {:?}",
                pair[0].session_id
            )));
        }
    }
    Ok(sessions)
}

/// The features to analyze: the configured restriction, or every feature
/// present in the corpus (sorted).
pub fn corpus_feature_names(sessions: &[SessionRecord], config: &PipelineConfig) -> Vec<String> {
    match &config.features {
        Some(names) => names.clone(),
        None => sessions
            .iter()
            .flat_map(|s| s.tracks.iter().map(|t| t.feature_name.clone()))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect(),
    }
}

/// Write `curves/<feature>_<type>_<role>.csv` under `out_dir` for every
/// combination; returns the relative paths written.
pub fn write_curve_files(
    sessions: &[SessionRecord],
    feature_names: &[String],
    params: &AlignedCurveParams,
    out_dir: &Path,
) -> Result<Vec<String>> {
    let curves_dir = out_dir.join("curves");
    std::fs::create_dir_all(&curves_dir).map_err(io_error(&curves_dir))?;
    let mut curve_files = Vec::new();
    for feature in feature_names {
        for kind in ExchangeType::ALL {
            for role in [ExchangeRole::Speaker, ExchangeRole::Initiator] {
                let locus = format!("{feature} / {kind} / {role}");
                let curve: AlignedCurve =
                    aligned_average_curves(sessions, feature, kind, role, params)
                        .map_err(|e| e.in_stage("aligned curves", locus))?;
                let name = format!(
                    "curves/{}_{}_{}.csv",
                    sanitize(feature),
                    sanitize(&kind.to_string()),
                    sanitize(&role.to_string())
                );
                let path = out_dir.join(&name);
                write_offset_csv(
                    &path,
                    &curve.offsets,
                    &curve.mean_values,
                    &curve.support_counts,
                )
                .map_err(|e| e.in_stage("aligned curves", path.display().to_string()))?;
                curve_files.push(name);
            }
        }
    }
    Ok(curve_files)
}

/// Write `sync/<measure>_<feature>_<type>.csv` under `out_dir`: sliding
/// synchrony between the expert's and the novice's track per session,
/// aggregated around exchange onsets. Returns the relative paths written.
pub fn write_sync_files(
    sessions: &[SessionRecord],
    feature_names: &[String],
    sync: &SyncConfig,
    curves: &AlignedCurveParams,
    out_dir: &Path,
) -> Result<Vec<String>> {
    let sync_dir = out_dir.join("sync");
    std::fs::create_dir_all(&sync_dir).map_err(io_error(&sync_dir))?;
    let mut sync_files = Vec::new();
    for &measure in &sync.measures {
        let params = sync.params(measure);
        for feature in feature_names {
            let mut series: Vec<Option<FeatureTrack>> = Vec::with_capacity(sessions.len());
            for s in sessions {
                let expert = s.participant_by_role(Role::Expert);
                let novice = s.participant_by_role(Role::Novice);
                let pair = match (expert, novice) {
                    (Some(e), Some(n)) => s.track(&e.id, feature).zip(s.track(&n.id, feature)),
                    _ => None,
                };
                match pair {
                    Some((x, y)) => {
                        let locus = format!("{measure} / {feature} / session {}", s.session_id);
                        let curve = sliding_synchrony(x, y, &params)
                            .map_err(|e| e.in_stage("synchrony", locus))?;
                        series.push(Some(curve.series));
                    }
                    None => series.push(None),
                }
            }
            for kind in ExchangeType::ALL {
                let locus = format!("{measure} / {feature} / {kind}");
                let (offsets, means, supports) =
                    align_series_at_onsets(sessions, &series, kind, curves)
                        .map_err(|e| e.in_stage("synchrony", locus))?;
                let name = format!(
                    "sync/{}_{}_{}.csv",
                    sanitize(&measure.to_string()),
                    sanitize(feature),
                    sanitize(&kind.to_string())
                );
                let path = out_dir.join(&name);
                write_offset_csv(&path, &offsets, &means, &supports)
                    .map_err(|e| e.in_stage("synchrony", path.display().to_string()))?;
                sync_files.push(name);
            }
        }
    }
    Ok(sync_files)
}

/// Run every stage over the manifests and write the report directory.
///
/// `jobs = 0` uses one worker per CPU. Any stage error aborts the run,
/// wrapped with the stage name and the offending input (manifest path,
/// session id, or output file).
pub fn run_pipeline(
    manifest_paths: &[PathBuf],
    config: &PipelineConfig,
    jobs: usize,
    out_dir: &Path,
) -> Result<AnalysisReport> {
    if !(config.alpha > 0.0 && config.alpha < 1.0) {
        return Err(Error::InvalidInput(format!(
            "alpha must lie strictly between 0 and 1, found {}",
            config.alpha
        )));
    }
    let sessions = load_classified_sessions(manifest_paths, config, jobs)?;

    // Corpus-level statistics.
    let census = exchange_census(sessions.iter().map(|s| s.exchanges.as_slice()));
    let timing = timing_stats(&sessions);
    let roles =
        role_stats(&sessions).map_err(|e| e.in_stage("statistics", "role statistics"))?;

    let feature_names = corpus_feature_names(&sessions, config);

    std::fs::create_dir_all(out_dir).map_err(io_error(out_dir))?;

    let features = if feature_names.is_empty() {
        None
    } else {
        let comparison = feature_comparison(&sessions, &feature_names, config.alpha)
            .map_err(|e| e.in_stage("statistics", "feature comparison"))?;
        let curve_files = write_curve_files(&sessions, &feature_names, &config.curves, out_dir)?;
        let sync_files =
            write_sync_files(&sessions, &feature_names, &config.sync, &config.curves, out_dir)?;
        Some(FeatureSection {
            names: feature_names,
            normalized: config.normalize_features,
            comparison,
            curve_files,
            sync_files,
        })
    };

    let exchanges_path = out_dir.join("exchanges.csv");
    write_exchanges_csv(&exchanges_path, &sessions)
        .map_err(|e| e.in_stage("report output", exchanges_path.display().to_string()))?;

    let report = AnalysisReport {
        generated_at: timestamp(),
        params: config.clone(),
        session_ids: sessions.iter().map(|s| s.session_id.clone()).collect(),
        census,
        timing,
        roles,
        features,
    };
    let report_path = out_dir.join("report.json");
    let text = serde_json::to_string_pretty(&report)
        .map_err(|e| Error::Internal(format!("report serialization failed: {e}")))?;
    std::fs::write(&report_path, text + "\n")
        .map_err(io_error(&report_path))
        .map_err(|e| e.in_stage("report output", report_path.display().to_string()))?;

    Ok(report)
}

/// Convenience used by the CLI `vad` and `segment` subcommands: write
/// segments for one participant of one session.
pub fn write_session_segments(record: &SessionRecord, out_dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(io_error(out_dir))?;
    let mut written = Vec::new();
    for p in &record.participants {
        let path = out_dir.join(format!(
            "{}_{}_ipus.csv",
            sanitize(&record.session_id),
            sanitize(&p.id)
        ));
        write_segments_csv(&path, record.ipus_of(&p.id))?;
        written.push(path);
    }
    Ok(written)
}

/// Convenience for the CLI `sync` subcommand: all synchrony series of one
/// session as feature tracks on the window-center time axis.
pub fn session_sync_series(
    record: &SessionRecord,
    config: &SyncConfig,
    features: &[String],
) -> Result<Vec<(SyncMeasure, FeatureTrack)>> {
    let expert = record
        .participant_by_role(Role::Expert)
        .ok_or_else(|| Error::InvalidInput("session has no expert participant".into()))?;
    let novice = record
        .participant_by_role(Role::Novice)
        .ok_or_else(|| Error::InvalidInput("session has no novice participant".into()))?;
    let mut out = Vec::new();
    for &measure in &config.measures {
        let params = config.params(measure);
        for feature in features {
            if let Some((x, y)) = record
                .track(&expert.id, feature)
                .zip(record.track(&novice.id, feature))
            {
                let curve = sliding_synchrony(x, y, &params)?;
                out.push((measure, curve.series));
            }
        }
    }
    Ok(out)
}
