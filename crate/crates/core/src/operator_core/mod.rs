//! Dense complex-matrix primitives.
//!
//! Everything downstream represents operators as [`ComplexMatrix`]
//! (`DMatrix<Complex64>`). This module supplies the handful of derived
//! objects the analysis needs: defect operators and defect spaces, numerical
//! and spectral radii, identity-based classification, unitary completion of
//! partial isometric correspondences, and joint eigenvalues of commuting
//! families.

mod joint;
mod radius;
pub mod serde_matrix;
mod subspace;

use nalgebra::linalg::{Schur, SymmetricEigen};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use joint::{approximate_joint_eigenvalues, ApproximateSpectrum, joint_eigenvalues, joint_eigenvalues_seeded};
pub use radius::{numerical_radius, numerical_radius_above};
pub use subspace::Subspace;

pub type ComplexMatrix = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Numeric thresholds shared by every check.
///
/// `rank_tol` decides when an eigenvalue or singular value counts as zero,
/// `residual_tol` when an operator identity counts as satisfied, and
/// `grid_points` sets the angular resolution of numerical-radius scans.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    pub rank_tol: f64,
    pub residual_tol: f64,
    pub grid_points: usize,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            rank_tol: 1e-9,
            residual_tol: 1e-8,
            grid_points: 360,
        }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        let finite_positive = |v: f64| v.is_finite() && v > 0.0;
        if !finite_positive(self.rank_tol) || !finite_positive(self.residual_tol) {
            return Err(Error::InvalidConfig(format!(
                "tolerances must be positive (rank_tol={}, residual_tol={})",
                self.rank_tol, self.residual_tol
            )));
        }
        if self.grid_points < 8 {
            return Err(Error::InvalidConfig(format!(
                "grid_points must be at least 8, got {}",
                self.grid_points
            )));
        }
        Ok(())
    }
}

pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn zeros(rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::zeros(rows, cols)
}

/// Real matrix from row slices, mostly for tests and gallery constants.
pub fn from_real_rows(rows: &[&[f64]]) -> ComplexMatrix {
    let cols = rows.first().map_or(0, |r| r.len());
    DMatrix::from_fn(rows.len(), cols, |i, j| c64(rows[i][j], 0.0))
}

pub fn ensure_square(m: &ComplexMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

pub fn ensure_finite(m: &ComplexMatrix) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// Spectral (operator 2-) norm. Empty matrices have norm zero.
pub fn op_norm(m: &ComplexMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Eigen-decomposition of a Hermitian matrix (the input is symmetrized first).
pub fn hermitian_eigen(h: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    ensure_square(h)?;
    if h.is_empty() {
        return Ok((Vec::new(), zeros(0, 0)));
    }
    let eig =
        SymmetricEigen::try_new(hermitian_part(h), f64::EPSILON, 10_000).ok_or(Error::EigenFailure)?;
    Ok((eig.eigenvalues.iter().copied().collect(), eig.eigenvectors))
}

/// Unitary Schur form `A = Q R Q*`, returned as `(Q, R)`.
pub fn schur(a: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let n = ensure_square(a)?;
    if n == 0 {
        return Ok((zeros(0, 0), zeros(0, 0)));
    }
    if let Some(s) = Schur::try_new(a.clone(), f64::EPSILON, 10_000) {
        return Ok(s.unpack());
    }
    // Exactly structured inputs (large nilpotent blocks) can stall the QR
    // iteration; a seeded unitary similarity breaks the structure.
    let mut rng = ChaCha8Rng::seed_from_u64(SCHUR_RETRY_SEED);
    for _ in 0..SCHUR_RETRIES {
        let u = crate::gallery::random_unitary(n, &mut rng);
        if let Some(s) = Schur::try_new(u.adjoint() * a * &u, f64::EPSILON, 10_000) {
            let (q, t) = s.unpack();
            return Ok((u * q, t));
        }
    }
    Err(Error::EigenFailure)
}

const SCHUR_RETRY_SEED: u64 = 0x5c4e;
const SCHUR_RETRIES: usize = 4;

pub fn eigenvalues(a: &ComplexMatrix) -> Result<Vec<Complex64>> {
    let (_, r) = schur(a)?;
    Ok((0..r.nrows()).map(|i| r[(i, i)]).collect())
}

pub fn spectral_radius(a: &ComplexMatrix) -> Result<f64> {
    Ok(eigenvalues(a)?
        .into_iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max))
}

/// Defect operator `D_X = (I - X*X)^{1/2}` together with its defect space.
#[derive(Debug, Clone)]
pub struct Defect {
    pub operator: ComplexMatrix,
    pub space: Subspace,
}

/// Computes `D_X` and an orthonormal basis of its range from one
/// eigen-decomposition of `I - X*X`.
///
/// Eigenvalues of `I - X*X` inside `[-rank_tol, rank_tol]` are snapped to
/// zero; anything below `-rank_tol` means `X` is not a contraction.
pub fn defect(x: &ComplexMatrix, tol: &ToleranceConfig) -> Result<Defect> {
    let n = ensure_square(x)?;
    ensure_finite(x)?;
    let gram = identity(n) - x.adjoint() * x;
    let (values, vectors) = hermitian_eigen(&gram)?;
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if n > 0 && min < -tol.rank_tol {
        return Err(Error::NotAContraction {
            min_eigenvalue: min,
        });
    }
    let roots: Vec<f64> = values
        .iter()
        .map(|&v| if v <= tol.rank_tol { 0.0 } else { v.sqrt() })
        .collect();
    let mut scaled = vectors.clone();
    for (j, r) in roots.iter().enumerate() {
        scaled.column_mut(j).scale_mut(*r);
    }
    let operator = hermitian_part(&(&scaled * vectors.adjoint()));

    let kept: Vec<usize> = (0..n).filter(|&j| roots[j] > tol.rank_tol).collect();
    let range = vectors.select_columns(kept.iter());
    let space = Subspace::from_orthonormal_columns(&range);
    Ok(Defect { operator, space })
}

pub fn defect_operator(x: &ComplexMatrix, tol: &ToleranceConfig) -> Result<ComplexMatrix> {
    Ok(defect(x, tol)?.operator)
}

pub fn defect_space(x: &ComplexMatrix, tol: &ToleranceConfig) -> Result<Subspace> {
    Ok(defect(x, tol)?.space)
}

/// Flags decided by defining identities, plus the residuals behind them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorClass {
    pub contraction: bool,
    pub isometry: bool,
    pub coisometry: bool,
    pub unitary: bool,
    pub partial_isometry: bool,
    pub projection: bool,
    pub norm: f64,
    pub isometry_residual: f64,
    pub coisometry_residual: f64,
    pub partial_isometry_residual: f64,
    pub projection_residual: f64,
}

pub fn classify(x: &ComplexMatrix, tol: &ToleranceConfig) -> OperatorClass {
    let (rows, cols) = x.shape();
    let norm = op_norm(x);
    let isometry_residual = op_norm(&(x.adjoint() * x - identity(cols)));
    let coisometry_residual = op_norm(&(x * x.adjoint() - identity(rows)));
    let partial_isometry_residual = op_norm(&(x * x.adjoint() * x - x));
    let projection_residual = if rows == cols {
        op_norm(&(x * x - x)).max(op_norm(&(x - x.adjoint())))
    } else {
        f64::MAX
    };
    let eps = tol.residual_tol;
    let isometry = isometry_residual <= eps;
    let coisometry = coisometry_residual <= eps;
    OperatorClass {
        contraction: norm <= 1.0 + eps,
        isometry,
        coisometry,
        unitary: isometry && coisometry && rows == cols,
        partial_isometry: partial_isometry_residual <= eps,
        projection: projection_residual <= eps,
        norm,
        isometry_residual,
        coisometry_residual,
        partial_isometry_residual,
        projection_residual,
    }
}

/// Completes an isometric correspondence between two subspaces to a unitary
/// on the ambient space.
///
/// `map` is an ambient operator; only its action on the domain basis is
/// used. The result `U` satisfies `U q = map q` for every domain basis vector
/// `q`, and carries the orthogonal complement of the domain onto the
/// orthogonal complement of the codomain by matching canonical bases.
pub fn extend_isometry_to_unitary(
    domain: &Subspace,
    codomain: &Subspace,
    map: &ComplexMatrix,
    tol: &ToleranceConfig,
) -> Result<ComplexMatrix> {
    let n = domain.ambient_dim();
    if codomain.ambient_dim() != n || map.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "domain ambient {n}, codomain ambient {}, map {}x{}",
            codomain.ambient_dim(),
            map.nrows(),
            map.ncols()
        )));
    }
    if domain.dim() != codomain.dim() {
        return Err(Error::DimensionMismatch(format!(
            "complements differ: domain has dimension {}, codomain {}",
            domain.dim(),
            codomain.dim()
        )));
    }
    let images = map * domain.basis();
    let k = domain.dim();
    let isometry_residual = op_norm(&(images.adjoint() * &images - identity(k)));
    let outside = op_norm(&(&images - codomain.projector() * &images));
    let residual = isometry_residual.max(outside);
    if residual > tol.residual_tol {
        return Err(Error::NotIsometric { residual });
    }
    let domain_perp = domain.complement();
    let codomain_perp = codomain.complement();
    let mut source = zeros(n, n);
    let mut target = zeros(n, n);
    source.columns_mut(0, k).copy_from(domain.basis());
    source.columns_mut(k, n - k).copy_from(domain_perp.basis());
    target.columns_mut(0, k).copy_from(&images);
    target.columns_mut(k, n - k).copy_from(codomain_perp.basis());
    Ok(target * source.adjoint())
}
