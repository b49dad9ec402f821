//! Serde adapter: a complex matrix travels as a row-major list of rows, each
//! entry a `[re, im]` pair.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{de::Error as _, Deserialize, Deserializer, Serialize, Serializer};

use super::ComplexMatrix;

pub fn to_rows(m: &ComplexMatrix) -> Vec<Vec<Complex64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// Builds a matrix from row-major rows; `cols` is used when there are no rows.
pub fn from_rows(rows: &[Vec<Complex64>], cols: usize) -> Result<ComplexMatrix, String> {
    let ncols = rows.first().map_or(cols, Vec::len);
    if let Some(i) = rows.iter().position(|r| r.len() != ncols) {
        return Err(format!(
            "row {i} has {} entries, expected {ncols}",
            rows[i].len()
        ));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

#[derive(Serialize, Deserialize)]
struct Repr {
    rows: usize,
    cols: usize,
    entries: Vec<Vec<Complex64>>,
}

pub fn serialize<S: Serializer>(m: &ComplexMatrix, s: S) -> Result<S::Ok, S::Error> {
    Repr {
        rows: m.nrows(),
        cols: m.ncols(),
        entries: to_rows(m),
    }
    .serialize(s)
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ComplexMatrix, D::Error> {
    let repr = Repr::deserialize(d)?;
    if repr.entries.len() != repr.rows {
        return Err(D::Error::custom(format!(
            "declared {} rows, found {}",
            repr.rows,
            repr.entries.len()
        )));
    }
    let m = from_rows(&repr.entries, repr.cols).map_err(D::Error::custom)?;
    if m.ncols() != repr.cols {
        return Err(D::Error::custom(format!(
            "declared {} columns, found {}",
            repr.cols,
            m.ncols()
        )));
    }
    Ok(m)
}

pub mod option {
    use super::*;

    pub fn serialize<S: Serializer>(m: &Option<ComplexMatrix>, s: S) -> Result<S::Ok, S::Error> {
        m.as_ref()
            .map(|m| Repr {
                rows: m.nrows(),
                cols: m.ncols(),
                entries: to_rows(m),
            })
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> Result<Option<ComplexMatrix>, D::Error> {
        let repr = Option::<Repr>::deserialize(d)?;
        repr.map(|r| from_rows(&r.entries, r.cols).map_err(D::Error::custom))
            .transpose()
    }
}
