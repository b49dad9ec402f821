//! Batch dossiers for commuting operator triples.

pub mod dossier;
pub mod input;

pub use dossier::{run_dossier, DossierConfig, DossierReport, StageResult};
pub use input::{load, GalleryOptions, InputError, LoadedInput, Source, TripleFile};
