//! Triple sources: JSON files and gallery entries.
//!
//! File schema: `{"dim": n, "T1": rows, "T2": rows, "T": rows}` with each row
//! a list of `[re, im]` pairs, plus an optional
//! `"structured": {"gallery": NAME, "n": N}` naming the exact model the
//! matrices compress.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use tetrablock::gallery::{example_counterexample, example_pal, random_family, GalleryKind, GallerySpec, NamedExample};
use tetrablock::operator_core::ComplexMatrix;

#[derive(Debug, thiserror::Error)]
pub enum InputError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] tetrablock::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructuredRef {
    pub gallery: GalleryKind,
    pub n: usize,
}

type Rows = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripleFile {
    pub dim: usize,
    #[serde(rename = "T1")]
    pub t1: Rows,
    #[serde(rename = "T2")]
    pub t2: Rows,
    #[serde(rename = "T")]
    pub t: Rows,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structured: Option<StructuredRef>,
}

impl TripleFile {
    pub fn from_matrices(t1: &ComplexMatrix, t2: &ComplexMatrix, t: &ComplexMatrix) -> Self {
        let rows = |m: &ComplexMatrix| -> Rows {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                .collect()
        };
        Self {
            dim: t.nrows(),
            t1: rows(t1),
            t2: rows(t2),
            t: rows(t),
            structured: None,
        }
    }

    fn matrix(&self, name: &str, rows: &Rows) -> Result<ComplexMatrix, InputError> {
        let n = self.dim;
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(InputError::Invalid(format!("{name} must be {n}x{n}")));
        }
        if rows.iter().flatten().flatten().any(|x| !x.is_finite()) {
            return Err(InputError::Invalid(format!("{name} has non-finite entries")));
        }
        Ok(ComplexMatrix::from_fn(n, n, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1])))
    }
}

/// Where a triple came from, recorded verbatim in every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: String,
    pub gallery: Option<GalleryKind>,
    pub truncation: Option<usize>,
    pub seed: Option<u64>,
    pub dim: usize,
}

#[derive(Debug, Clone)]
pub struct LoadedInput {
    pub provenance: Provenance,
    pub t1: ComplexMatrix,
    pub t2: ComplexMatrix,
    pub t: ComplexMatrix,
    /// Exact model, when the matrices compress a named example.
    pub named: Option<NamedExample>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Source {
    File(PathBuf),
    Gallery(GalleryKind),
}

impl FromStr for Source {
    type Err = InputError;

    fn from_str(s: &str) -> Result<Self, InputError> {
        match s.strip_prefix("gallery:") {
            Some(name) => Ok(Source::Gallery(name.parse()?)),
            None => Ok(Source::File(PathBuf::from(s))),
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::File(p) => write!(f, "{}", p.display()),
            Source::Gallery(k) => write!(f, "gallery:{k}"),
        }
    }
}

/// Parameters for gallery sources.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GalleryOptions {
    pub truncation: usize,
    pub seed: u64,
    pub dim: usize,
}

impl Default for GalleryOptions {
    fn default() -> Self {
        Self {
            truncation: 8,
            seed: 0,
            dim: 4,
        }
    }
}

fn named_example(kind: GalleryKind, n: usize) -> Result<Option<NamedExample>, InputError> {
    Ok(match kind {
        GalleryKind::Counterexample => Some(example_counterexample(n)?),
        GalleryKind::Pal => Some(example_pal(n)?),
        _ => None,
    })
}

pub fn load(source: &Source, options: &GalleryOptions) -> Result<LoadedInput, InputError> {
    match source {
        Source::File(path) => load_file(path),
        Source::Gallery(kind) => {
            let spec = GallerySpec {
                kind: *kind,
                truncation: options.truncation,
                dim: options.dim,
                seed: options.seed,
            };
            let triple = random_family(&spec)?;
            let named = named_example(*kind, options.truncation)?;
            let randomized = named.is_none();
            Ok(LoadedInput {
                provenance: Provenance {
                    source: source.to_string(),
                    gallery: Some(*kind),
                    truncation: Some(options.truncation),
                    seed: randomized.then_some(options.seed),
                    dim: triple.dim(),
                },
                t1: triple.t1,
                t2: triple.t2,
                t: triple.t,
                named,
            })
        }
    }
}

pub fn load_file(path: &Path) -> Result<LoadedInput, InputError> {
    let text = std::fs::read_to_string(path).map_err(|source| InputError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_triple(&text, &path.display().to_string())
}

pub fn parse_triple(text: &str, source_name: &str) -> Result<LoadedInput, InputError> {
    let file: TripleFile = serde_json::from_str(text).map_err(|e| InputError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if file.dim == 0 {
        return Err(InputError::Invalid("dim must be positive".into()));
    }
    let t1 = file.matrix("T1", &file.t1)?;
    let t2 = file.matrix("T2", &file.t2)?;
    let t = file.matrix("T", &file.t)?;
    let named = match file.structured {
        Some(r) => {
            let named = named_example(r.gallery, r.n)?.ok_or_else(|| {
                InputError::Invalid(format!("gallery entry `{}` has no exact model", r.gallery))
            })?;
            if named.triple.dim() != file.dim {
                return Err(InputError::Invalid(format!(
                    "`{}` at truncation {} acts on dimension {}, file has {}",
                    r.gallery,
                    r.n,
                    named.triple.dim(),
                    file.dim
                )));
            }
            Some(named)
        }
        None => None,
    };
    Ok(LoadedInput {
        provenance: Provenance {
            source: source_name.to_string(),
            gallery: file.structured.map(|r| r.gallery),
            truncation: file.structured.map(|r| r.n),
            seed: None,
            dim: file.dim,
        },
        t1,
        t2,
        t,
        named,
    })
}
