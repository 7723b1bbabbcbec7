//! File input and output: feature/segment/annotation/exchange CSV files,
//! mono WAV audio, and the session manifest format that ties the per-session
//! files together.

pub mod csv;
pub mod manifest;
pub mod wav;

pub use csv::{
    load_annotations_csv, load_exchanges_csv, load_feature_csv, load_segments_csv,
    write_exchanges_csv, write_feature_csv, write_segments_csv,
};
pub use manifest::{load_session, ManifestParticipant, SessionManifest};
pub use wav::{read_wav_mono, write_wav_mono};

use std::path::Path;

use crate::error::Error;

pub(crate) fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub(crate) fn parse_error(path: &Path, row: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        row,
        message: message.into(),
    }
}
