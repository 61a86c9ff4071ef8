//! Training-data and evaluation-set preparation.

mod crop;
mod manifest;
mod resample;
mod select;
mod vad;

pub use crop::crop_random;
pub use manifest::{
    canonical_sort, manifest_to_string, parse_manifest, read_manifest, write_manifest,
    ManifestEntry,
};
pub use resample::resample;
pub use select::{select_eval, SelectionRule};
pub use vad::{rms_dbfs, trim_silence, vad_trim, EnergyGate, FrameClassifier, VadConfig};
