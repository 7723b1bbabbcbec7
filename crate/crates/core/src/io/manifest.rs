//! Session manifests: a small JSON file per session naming the two
//! participants and the files their speech segments, features and
//! annotations come from. All paths are resolved relative to the manifest's
//! directory.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exchange::AnnotationRow;
use crate::model::{validate_session_with_gap, FeatureTrack, Participant, Role, SessionRecord};
use crate::segmentation::{energy_vad, merge_to_ipus, VadParams};
use crate::stats::resample_track;

use super::csv::{load_annotations_csv, load_feature_csv, load_segments_csv};
use super::io_error;
use super::wav::read_wav_mono;

fn default_sample_rate() -> f64 {
    25.0
}

/// One participant's file references within a session manifest. Speech
/// segments come either from a precomputed `vad_path` CSV or, failing that,
/// from running the energy detector on `audio_path`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestParticipant {
    pub id: String,
    pub role: Role,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audio_path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vad_path: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub feature_csv_paths: Vec<String>,
}

/// Manifest of one recorded conversation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionManifest {
    pub session_id: String,
    /// Common frame rate of the session's feature grid; tracks sampled at
    /// other rates are resampled to it on load.
    #[serde(default = "default_sample_rate")]
    pub sample_rate_hz: f64,
    pub participants: Vec<ManifestParticipant>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotations_path: Option<String>,
}

impl SessionManifest {
    pub fn validate(&self) -> Result<()> {
        if self.session_id.trim().is_empty() {
            return Err(Error::InvalidInput("session_id must not be empty".into()));
        }
        if !(self.sample_rate_hz.is_finite() && self.sample_rate_hz > 0.0) {
            return Err(Error::InvalidInput(format!(
                "sample_rate_hz must be positive, found {}",
                self.sample_rate_hz
            )));
        }
        if self.participants.len() != 2 {
            return Err(Error::InvalidInput(format!(
                "a session needs exactly 2 participants, found {}",
                self.participants.len()
            )));
        }
        let (a, b) = (&self.participants[0], &self.participants[1]);
        if a.id.trim().is_empty() || b.id.trim().is_empty() {
            return Err(Error::InvalidInput("participant ids must not be empty".into()));
        }
        if a.id == b.id {
            return Err(Error::InvalidInput(format!(
                "participants must have distinct ids, both are {:?}",
                a.id
            )));
        }
        if a.role == b.role {
            return Err(Error::InvalidInput(format!(
                "participants must cover both roles, both are {}",
                a.role
            )));
        }
        for p in &self.participants {
            if p.audio_path.is_none() && p.vad_path.is_none() {
                return Err(Error::InvalidInput(format!(
                    "participant {:?} needs an audio_path or a vad_path",
                    p.id
                )));
            }
        }
        Ok(())
    }
}

/// Read and validate a manifest file.
pub fn load_manifest(path: &Path) -> Result<SessionManifest> {
    let content = std::fs::read_to_string(path).map_err(io_error(path))?;
    let manifest: SessionManifest = serde_json::from_str(&content)
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    manifest
        .validate()
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    Ok(manifest)
}

/// Load a whole session from its manifest: speech segments (from segment
/// CSVs, or energy detection on audio when no CSV is given) merged into
/// IPUs at `ipu_gap`, feature tracks resampled to the manifest's common
/// rate, and any manual annotations. The session length is the latest
/// loaded time plus one second of tail. The returned record has no
/// exchanges yet; classification is a separate step.
pub fn load_session(
    manifest_path: &Path,
    vad: &VadParams,
    ipu_gap: f64,
) -> Result<(SessionRecord, Vec<AnnotationRow>)> {
    let manifest = load_manifest(manifest_path)?;
    let dir = manifest_path.parent().unwrap_or_else(|| Path::new(""));
    let resolve = |rel: &str| dir.join(rel);

    let mut ipus = BTreeMap::new();
    let mut tracks: Vec<FeatureTrack> = Vec::new();
    for p in &manifest.participants {
        let segments = if let Some(vp) = &p.vad_path {
            load_segments_csv(&resolve(vp))?
        } else if let Some(ap) = &p.audio_path {
            let (samples, rate) = read_wav_mono(&resolve(ap))?;
            energy_vad(&samples, rate, vad)?
        } else {
            return Err(Error::Internal(format!(
                "participant {:?} passed validation without a speech source",
                p.id
            )));
        };
        ipus.insert(p.id.clone(), merge_to_ipus(&segments, ipu_gap)?);

        for fp in &p.feature_csv_paths {
            for t in load_feature_csv(&resolve(fp), &p.id)? {
                if tracks
                    .iter()
                    .any(|x| x.participant_id == t.participant_id && x.feature_name == t.feature_name)
                {
                    return Err(Error::InvalidInput(format!(
                        "{}: duplicate feature {:?} for participant {:?}",
                        manifest_path.display(),
                        t.feature_name,
                        t.participant_id
                    )));
                }
                let t = if (t.sample_rate_hz - manifest.sample_rate_hz).abs() > 1e-9 {
                    resample_track(&t, manifest.sample_rate_hz)?
                } else {
                    t
                };
                tracks.push(t);
            }
        }
    }

    let annotations = match &manifest.annotations_path {
        Some(ap) => load_annotations_csv(&resolve(ap))?,
        None => Vec::new(),
    };
    for ann in &annotations {
        if !manifest.participants.iter().any(|p| p.id == ann.initiator_id) {
            return Err(Error::InvalidInput(format!(
                "{}: annotation at {} names unknown initiator {:?}",
                manifest_path.display(),
                ann.time,
                ann.initiator_id
            )));
        }
    }

    let mut extent: f64 = 0.0;
    for segs in ipus.values() {
        if let Some(last) = segs.last() {
            extent = extent.max(last.end);
        }
    }
    for t in &tracks {
        extent = extent.max(t.end_time());
    }
    for a in &annotations {
        extent = extent.max(a.time);
    }

    let record = SessionRecord {
        session_id: manifest.session_id.clone(),
        participants: manifest
            .participants
            .iter()
            .map(|p| Participant {
                id: p.id.clone(),
                role: p.role,
            })
            .collect(),
        ipus,
        tracks,
        exchanges: Vec::new(),
        session_length: extent + 1.0,
    };
    let problems = validate_session_with_gap(&record, ipu_gap);
    if !problems.is_empty() {
        return Err(Error::InvalidInput(format!(
            "{}: inconsistent session: {}",
            manifest_path.display(),
            problems.join("; ")
        )));
    }
    Ok((record, annotations))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::wav::write_wav_mono;
    use serde_json::json;
    use std::fs;

    fn dir() -> tempfile::TempDir {
        tempfile::tempdir().expect("create temp dir")
    }

    fn write_manifest(path: &Path, value: &serde_json::Value) {
        fs::write(path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    }

    fn basic_manifest() -> serde_json::Value {
        json!({
            "session_id": "s01",
            "participants": [
                {"id": "p1", "role": "expert", "vad_path": "p1_vad.csv",
                 "feature_csv_paths": ["p1_features.csv"]},
                {"id": "p2", "role": "novice", "vad_path": "p2_vad.csv"}
            ],
            "annotations_path": "ann.csv"
        })
    }

    fn write_basic_files(d: &Path) {
        fs::write(d.join("p1_vad.csv"), "start,end\n0,1\n1.03,2\n3,4\n").unwrap();
        fs::write(d.join("p2_vad.csv"), "start,end\n0.5,0.8\n").unwrap();
        let mut features = String::from("time,F0,loudness\n");
        for i in 0..25 {
            features.push_str(&format!("{},{},{}\n", i as f64 * 0.04, i, 100 - i));
        }
        fs::write(d.join("p1_features.csv"), features).unwrap();
        fs::write(
            d.join("ann.csv"),
            "time,type,outcome,intent,intent_detail,initiator_id\n\
             3.1,interruption,successful,cooperative,assistance,p2\n",
        )
        .unwrap();
    }

    #[test]
    fn loads_a_full_session() {
        let d = dir();
        write_basic_files(d.path());
        let mpath = d.path().join("manifest.json");
        write_manifest(&mpath, &basic_manifest());

        let (record, annotations) = load_session(&mpath, &VadParams::default(), 0.05).unwrap();
        assert_eq!(record.session_id, "s01");
        assert_eq!(record.participants.len(), 2);
        // The 0.03 s gap is bridged; the 1 s gap is not.
        assert_eq!(
            record.ipus_of("p1"),
            &[
                crate::model::Segment::new(0.0, 2.0),
                crate::model::Segment::new(3.0, 4.0)
            ]
        );
        assert_eq!(record.ipus_of("p2").len(), 1);
        assert_eq!(record.tracks.len(), 2);
        let f0 = record.track("p1", "F0").unwrap();
        assert_eq!(f0.sample_rate_hz, 25.0);
        assert_eq!(f0.values.len(), 25);
        assert!(record.track("p2", "F0").is_none());
        assert_eq!(annotations.len(), 1);
        assert_eq!(annotations[0].initiator_id, "p2");
        // Extent: IPUs reach 4.0, the track reaches 1.0, the annotation 3.1.
        assert!((record.session_length - 5.0).abs() < 1e-12);
        assert!(record.exchanges.is_empty());
    }

    #[test]
    fn resamples_tracks_to_the_manifest_rate() {
        let d = dir();
        write_basic_files(d.path());
        // Overwrite the feature file with a 50 Hz grid.
        let mut features = String::from("time,F0\n");
        for i in 0..50 {
            features.push_str(&format!("{},{}\n", i as f64 * 0.02, i));
        }
        fs::write(d.path().join("p1_features.csv"), features).unwrap();
        let mpath = d.path().join("manifest.json");
        write_manifest(&mpath, &basic_manifest());

        let (record, _) = load_session(&mpath, &VadParams::default(), 0.05).unwrap();
        let f0 = record.track("p1", "F0").unwrap();
        assert_eq!(f0.sample_rate_hz, 25.0);
        assert_eq!(f0.values.len(), 25);
        // Every kept sample is an even input sample.
        assert_eq!(f0.values[3], Some(6.0));
    }

    #[test]
    fn detects_speech_from_audio_when_no_vad_is_given() {
        let d = dir();
        let rate = 16_000usize;
        let mut samples = vec![0.0f32; rate * 2];
        for (i, s) in samples.iter_mut().take(rate).enumerate() {
            *s = (i as f32 * 0.12).sin() * 0.4;
        }
        write_wav_mono(&d.path().join("p1.wav"), &samples, rate as u32).unwrap();
        write_wav_mono(&d.path().join("p2.wav"), &samples, rate as u32).unwrap();
        let mpath = d.path().join("manifest.json");
        write_manifest(
            &mpath,
            &json!({
                "session_id": "s02",
                "participants": [
                    {"id": "p1", "role": "expert", "audio_path": "p1.wav"},
                    {"id": "p2", "role": "novice", "audio_path": "p2.wav"}
                ]
            }),
        );
        let (record, annotations) = load_session(&mpath, &VadParams::default(), 0.05).unwrap();
        assert!(annotations.is_empty());
        let ipus = record.ipus_of("p1");
        assert_eq!(ipus.len(), 1);
        assert!(ipus[0].start < 0.05, "{:?}", ipus);
        assert!((ipus[0].end - 1.0).abs() < 0.05, "{:?}", ipus);
    }

    #[test]
    fn rejects_structural_problems() {
        let d = dir();
        write_basic_files(d.path());
        let mpath = d.path().join("manifest.json");

        // Missing speech source.
        let mut m = basic_manifest();
        m["participants"][1].as_object_mut().unwrap().remove("vad_path");
        write_manifest(&mpath, &m);
        let e = load_session(&mpath, &VadParams::default(), 0.05).unwrap_err();
        assert!(e.to_string().contains("audio_path or a vad_path"), "{e}");

        // Duplicate roles.
        let mut m = basic_manifest();
        m["participants"][1]["role"] = json!("expert");
        write_manifest(&mpath, &m);
        let e = load_session(&mpath, &VadParams::default(), 0.05).unwrap_err();
        assert!(e.to_string().contains("both roles"), "{e}");

        // Unknown field (typo protection).
        let mut m = basic_manifest();
        m["participants"][0]["vad_pth"] = json!("x.csv");
        write_manifest(&mpath, &m);
        let e = load_session(&mpath, &VadParams::default(), 0.05).unwrap_err();
        assert!(e.to_string().contains("unknown field"), "{e}");

        // Annotation naming a third participant.
        let m = basic_manifest();
        fs::write(
            d.path().join("ann.csv"),
            "time,type,outcome,intent,intent_detail,initiator_id\n1.0,smooth,,,,p9\n",
        )
        .unwrap();
        write_manifest(&mpath, &m);
        let e = load_session(&mpath, &VadParams::default(), 0.05).unwrap_err();
        assert!(e.to_string().contains("unknown initiator"), "{e}");

        // Missing manifest file.
        let e = load_session(&d.path().join("absent.json"), &VadParams::default(), 0.05)
            .unwrap_err();
        assert!(matches!(e, Error::Io { .. }), "{e}");
    }

    #[test]
    fn rejects_duplicate_features_across_files() {
        let d = dir();
        write_basic_files(d.path());
        fs::write(d.path().join("more.csv"), "time,F0\n0,1\n0.04,2\n").unwrap();
        let mut m = basic_manifest();
        m["participants"][0]["feature_csv_paths"] = json!(["p1_features.csv", "more.csv"]);
        let mpath = d.path().join("manifest.json");
        write_manifest(&mpath, &m);
        let e = load_session(&mpath, &VadParams::default(), 0.05).unwrap_err();
        assert!(e.to_string().contains("duplicate feature"), "{e}");
    }

    #[test]
    fn manifest_json_round_trip() {
        let manifest = SessionManifest {
            session_id: "s".into(),
            sample_rate_hz: 25.0,
            participants: vec![
                ManifestParticipant {
                    id: "a".into(),
                    role: Role::Expert,
                    audio_path: None,
                    vad_path: Some("a.csv".into()),
                    feature_csv_paths: vec!["f.csv".into()],
                },
                ManifestParticipant {
                    id: "b".into(),
                    role: Role::Novice,
                    audio_path: Some("b.wav".into()),
                    vad_path: None,
                    feature_csv_paths: vec![],
                },
            ],
            annotations_path: None,
        };
        let text = serde_json::to_string_pretty(&manifest).unwrap();
        let back: SessionManifest = serde_json::from_str(&text).unwrap();
        assert_eq!(back, manifest);
    }
}
