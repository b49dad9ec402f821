use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{commutator, ensure_square, op_norm, schur, ComplexMatrix, ToleranceConfig};
use crate::error::{Error, Result};

const JOINT_SEED: u64 = 0x6a6f_696e_7400;
const MAX_RETRIES: usize = 5;

/// Joint eigenvalues of a pairwise-commuting family, one tuple per diagonal
/// position of a common Schur triangularization.
pub fn joint_eigenvalues(
    ops: &[ComplexMatrix],
    tol: &ToleranceConfig,
) -> Result<Vec<Vec<Complex64>>> {
    joint_eigenvalues_seeded(ops, tol, JOINT_SEED)
}

/// Simultaneous upper-triangularization through the Schur vectors of a random
/// linear combination. A generic combination separates the joint spectrum, in
/// which case every member becomes triangular in the same basis; otherwise a
/// fresh combination is drawn, up to five retries.
pub fn joint_eigenvalues_seeded(
    ops: &[ComplexMatrix],
    tol: &ToleranceConfig,
    seed: u64,
) -> Result<Vec<Vec<Complex64>>> {
    let Some(first) = ops.first() else {
        return Ok(Vec::new());
    };
    let n = ensure_square(first)?;
    check_family(ops, n, tol)?;

    let (tuples, residual, attempts) = best_triangularization(ops, n, tol, seed)?;
    if residual <= tol.residual_tol {
        Ok(tuples)
    } else {
        Err(Error::TriangularizationFailed { attempts, residual })
    }
}

/// Joint spectrum of a family that may not triangularize position by position.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproximateSpectrum {
    pub tuples: Vec<Vec<Complex64>>,
    /// Relative norm of the part below the accepted block-triangular form.
    pub residual: f64,
    /// Eigenvalues of the combination closer than this (relative to its norm)
    /// were merged into one cluster and averaged; zero when no merging was needed.
    pub cluster_radius: f64,
}

const CLUSTER_RADII: [f64; 11] = [1e-10, 1e-8, 1e-6, 1e-4, 1e-3, 1e-2, 3e-2, 1e-1, 3e-1, 1.0, f64::INFINITY];

/// Like [`joint_eigenvalues`], but robust to long Jordan chains.
///
/// A Jordan block of size `k` splits under rounding into `k` eigenvalues on a
/// circle of radius about `eps^(1/k)`, so diagonal entries of a Schur form are
/// poor joint eigenvalues even when the form is triangular to machine
/// precision. Eigenvalues of a random combination are therefore merged into
/// clusters whose diameter fits that splitting, and the Schur form is
/// reordered so each cluster is contiguous. Cluster boundaries are spectral
/// subspaces, hence common invariant subspaces, and each member's eigenvalue
/// on a cluster is the (well-conditioned) average of its diagonal there. If
/// the members are not block triangular for these clusters, single-linkage
/// clusters of growing radius are tried instead.
pub fn approximate_joint_eigenvalues(ops: &[ComplexMatrix], tol: &ToleranceConfig) -> Result<ApproximateSpectrum> {
    let Some(first) = ops.first() else {
        return Ok(ApproximateSpectrum {
            tuples: Vec::new(),
            residual: 0.0,
            cluster_radius: 0.0,
        });
    };
    let n = ensure_square(first)?;
    check_family(ops, n, tol)?;
    let combo = random_combination(ops, n, JOINT_SEED);
    let (q, t) = schur(&combo)?;
    let scale = op_norm(&combo).max(1.0);
    let diag: Vec<Complex64> = (0..n).map(|k| t[(k, k)]).collect();
    let candidates = std::iter::once(jordan_clusters(&diag, scale))
        .chain(CLUSTER_RADII.iter().map(|r| cluster_labels(&diag, r * scale)));
    for labels in candidates {
        let radius = max_cluster_diameter(&diag, &labels) / scale;
        let (q, labels) = group_clusters(q.clone(), t.clone(), labels);
        let transformed: Vec<ComplexMatrix> = ops.iter().map(|op| q.adjoint() * op * &q).collect();
        let residual = transformed
            .iter()
            .zip(ops)
            .map(|(m, op)| block_lower_norm(m, &labels) / op_norm(op).max(1.0))
            .fold(0.0, f64::max);
        if residual <= tol.residual_tol {
            let tuples = (0..n)
                .map(|k| {
                    let members: Vec<usize> = (0..n).filter(|&j| labels[j] == labels[k]).collect();
                    transformed
                        .iter()
                        .map(|m| members.iter().map(|&j| m[(j, j)]).sum::<Complex64>() / members.len() as f64)
                        .collect()
                })
                .collect();
            return Ok(ApproximateSpectrum {
                tuples,
                residual,
                cluster_radius: radius,
            });
        }
    }
    unreachable!("a single cluster is always block triangular")
}

/// Maximal single-linkage clusters shaped like a split Jordan block.
///
/// A size-`m` Jordan block perturbed at rounding level splits into `m` points
/// spread around a circle of radius about `R = eps^(1/m) scale`. A cluster is
/// accepted when its diameter is at most `2R` and its single-linkage height at
/// most `4πR/m`, twice the spacing of evenly spread points.
fn jordan_clusters(values: &[Complex64], scale: f64) -> Vec<usize> {
    let n = values.len();
    let mut heights: Vec<f64> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (values[i] - values[j]).norm()))
        .collect();
    heights.sort_by(f64::total_cmp);
    heights.dedup();
    let mut owner: Vec<usize> = (0..n).collect();
    for h in heights {
        let labels = cluster_labels(values, h);
        let clusters = labels.iter().max().map_or(0, |m| m + 1);
        let mut merged_any = false;
        for c in 0..clusters {
            let members: Vec<usize> = (0..n).filter(|&k| labels[k] == c).collect();
            let diameter = members
                .iter()
                .flat_map(|&x| members.iter().map(move |&y| (values[x] - values[y]).norm()))
                .fold(0.0, f64::max);
            let m = members.len() as f64;
            let spread = f64::EPSILON.powf(1.0 / m) * scale;
            if diameter <= 2.0 * spread && h <= 2.0 * TAU * spread / m {
                for &k in &members {
                    owner[k] = members[0];
                }
                merged_any |= members.len() > 1;
            }
        }
        if !merged_any && clusters == 1 {
            break;
        }
    }
    renumber(&owner)
}

fn max_cluster_diameter(values: &[Complex64], labels: &[usize]) -> f64 {
    let mut diameter: f64 = 0.0;
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            if labels[i] == labels[j] {
                diameter = diameter.max((values[i] - values[j]).norm());
            }
        }
    }
    diameter
}

fn renumber(roots: &[usize]) -> Vec<usize> {
    let mut numbering = vec![usize::MAX; roots.len()];
    let mut next = 0;
    roots
        .iter()
        .map(|&r| {
            if numbering[r] == usize::MAX {
                numbering[r] = next;
                next += 1;
            }
            numbering[r]
        })
        .collect()
}

fn random_combination(ops: &[ComplexMatrix], n: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut combo = ComplexMatrix::zeros(n, n);
    for op in ops {
        let coef = Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng));
        combo += op * coef;
    }
    combo
}

/// Single-linkage clusters of `values` at `radius`, numbered by first appearance.
fn cluster_labels(values: &[Complex64], radius: f64) -> Vec<usize> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if (values[i] - values[j]).norm() <= radius {
                let (a, b) = (root(&mut parent, i), root(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let roots: Vec<usize> = (0..n).map(|i| root(&mut parent, i)).collect();
    renumber(&roots)
}

/// Reorders the Schur form `q* C q = t` by adjacent swaps until equal labels
/// are contiguous. Returns the new Schur vectors and the permuted labels.
fn group_clusters(mut q: ComplexMatrix, mut t: ComplexMatrix, mut labels: Vec<usize>) -> (ComplexMatrix, Vec<usize>) {
    let n = labels.len();
    for _ in 0..n {
        let mut swapped = false;
        for k in 0..n.saturating_sub(1) {
            if labels[k] > labels[k + 1] {
                swap_adjacent(&mut q, &mut t, k);
                labels.swap(k, k + 1);
                swapped = true;
            }
        }
        if !swapped {
            break;
        }
    }
    (q, labels)
}

/// Exchanges the diagonal entries `k`, `k + 1` of the upper-triangular `t`
/// with a 2×2 unitary whose first column is the eigenvector of the block for
/// its second eigenvalue.
fn swap_adjacent(q: &mut ComplexMatrix, t: &mut ComplexMatrix, k: usize) {
    let (a, b, x) = (t[(k, k)], t[(k + 1, k + 1)], t[(k, k + 1)]);
    let (v0, v1) = (x, b - a);
    let norm = (v0.norm_sqr() + v1.norm_sqr()).sqrt();
    if norm == 0.0 {
        return;
    }
    let (v0, v1) = (v0 / norm, v1 / norm);
    let w = ComplexMatrix::from_row_slice(2, 2, &[v0, -v1.conj(), v1, v0.conj()]);
    let rows = w.adjoint() * t.rows(k, 2);
    t.rows_mut(k, 2).copy_from(&rows);
    let cols = t.columns(k, 2) * &w;
    t.columns_mut(k, 2).copy_from(&cols);
    t[(k + 1, k)] = Complex64::new(0.0, 0.0);
    let cols = q.columns(k, 2) * &w;
    q.columns_mut(k, 2).copy_from(&cols);
}

/// Norm of the entries below the diagonal blocks defined by contiguous labels.
fn block_lower_norm(m: &ComplexMatrix, labels: &[usize]) -> f64 {
    let mut sum = 0.0;
    for j in 0..m.ncols() {
        for i in j + 1..m.nrows() {
            if labels[i] != labels[j] {
                sum += m[(i, j)].norm_sqr();
            }
        }
    }
    sum.sqrt()
}

fn check_family(ops: &[ComplexMatrix], n: usize, tol: &ToleranceConfig) -> Result<()> {
    for op in ops {
        if ensure_square(op)? != n {
            return Err(Error::DimensionMismatch(format!(
                "joint spectrum needs equal sizes, got {n} and {}",
                op.nrows()
            )));
        }
    }
    for i in 0..ops.len() {
        for j in i + 1..ops.len() {
            let residual = op_norm(&commutator(&ops[i], &ops[j]));
            if residual > tol.residual_tol {
                return Err(Error::NotCommuting {
                    first: i,
                    second: j,
                    residual,
                });
            }
        }
    }
    Ok(())
}

fn best_triangularization(
    ops: &[ComplexMatrix],
    n: usize,
    tol: &ToleranceConfig,
    seed: u64,
) -> Result<(Vec<Vec<Complex64>>, f64, usize)> {
    let mut best: Option<(Vec<Vec<Complex64>>, f64)> = None;
    for attempt in 0..=MAX_RETRIES {
        let combo = random_combination(ops, n, seed.wrapping_add(attempt as u64));
        let (q, _) = schur(&combo)?;
        let transformed: Vec<ComplexMatrix> = ops.iter().map(|op| q.adjoint() * op * &q).collect();
        let residual = transformed
            .iter()
            .zip(ops)
            .map(|(t, op)| strictly_lower_norm(t) / op_norm(op).max(1.0))
            .fold(0.0, f64::max);
        if best.as_ref().is_none_or(|b| residual < b.1) {
            let tuples = (0..n)
                .map(|k| transformed.iter().map(|t| t[(k, k)]).collect())
                .collect();
            best = Some((tuples, residual));
        }
        if residual <= tol.residual_tol {
            break;
        }
    }
    let (tuples, residual) = best.expect("at least one attempt");
    Ok((tuples, residual, MAX_RETRIES + 1))
}

fn strictly_lower_norm(m: &ComplexMatrix) -> f64 {
    let mut sum = 0.0;
    for j in 0..m.ncols() {
        for i in j + 1..m.nrows() {
            sum += m[(i, j)].norm_sqr();
        }
    }
    sum.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator_core::{c64, zeros, ONE, ZERO};
    use nalgebra::DVector;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn sorted(mut v: Vec<Vec<Complex64>>) -> Vec<Vec<Complex64>> {
        v.sort_by(|a, b| {
            let key = |t: &Vec<Complex64>| t.iter().map(|z| (z.re, z.im)).collect::<Vec<_>>();
            key(a).partial_cmp(&key(b)).unwrap()
        });
        v
    }

    #[test]
    fn diagonal_pair_zips_diagonals() {
        let a = ComplexMatrix::from_diagonal(&DVector::from_vec(vec![c64(1.0, 0.0), c64(2.0, 0.0)]));
        let b = ComplexMatrix::from_diagonal(&DVector::from_vec(vec![c64(0.0, 1.0), c64(0.5, 0.0)]));
        let got = sorted(joint_eigenvalues(&[a, b], &tol()).unwrap());
        let want = [[c64(1.0, 0.0), c64(0.0, 1.0)], [c64(2.0, 0.0), c64(0.5, 0.0)]];
        for (g, w) in got.iter().zip(want.iter()) {
            for (x, y) in g.iter().zip(w.iter()) {
                assert!((x - y).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn nilpotent_pair_has_zero_spectrum() {
        let n = 5;
        let jordan = ComplexMatrix::from_fn(n, n, |i, j| if i == j + 1 { ONE } else { ZERO });
        let square = &jordan * &jordan;
        let got = joint_eigenvalues(&[jordan, square], &tol()).unwrap();
        assert_eq!(got.len(), n);
        for t in got {
            assert!(t.iter().all(|z| z.norm() < 1e-2));
        }
    }

    #[test]
    fn rejects_noncommuting() {
        let a = crate::operator_core::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let b = a.transpose();
        assert!(matches!(
            joint_eigenvalues(&[a, b], &tol()),
            Err(Error::NotCommuting { first: 0, second: 1, .. })
        ));
        assert!(joint_eigenvalues(&[], &tol()).unwrap().is_empty());
        let _ = zeros(1, 1);
    }

    fn jordan(n: usize, eigenvalue: Complex64) -> ComplexMatrix {
        let mut m = zeros(n, n);
        for i in 0..n {
            m[(i, i)] = eigenvalue;
            if i + 1 < n {
                m[(i + 1, i)] = ONE;
            }
        }
        m
    }

    fn direct_sum(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
        let n = a.nrows() + b.nrows();
        let mut m = zeros(n, n);
        m.view_mut((0, 0), a.shape()).copy_from(a);
        m.view_mut((a.nrows(), a.nrows()), b.shape()).copy_from(b);
        m
    }

    #[test]
    fn long_jordan_chains_cluster_to_exact_eigenvalues() {
        let s = direct_sum(&jordan(12, ZERO), &jordan(4, c64(0.5, 0.0)));
        let ops = [s.clone(), &s * &s, &s * &s * &s];
        let approx = approximate_joint_eigenvalues(&ops, &tol()).unwrap();
        assert!(approx.residual <= 1e-8);
        assert!(approx.cluster_radius > 0.0 && approx.cluster_radius < 0.5, "{approx:?}");
        let mut zeros_found = 0;
        for tuple in &approx.tuples {
            if tuple[0].norm() < 1e-10 {
                zeros_found += 1;
                assert!(tuple[1].norm() < 1e-10 && tuple[2].norm() < 1e-10);
            } else {
                assert!((tuple[0] - c64(0.5, 0.0)).norm() < 1e-10, "{tuple:?} {approx:?}");
                assert!((tuple[1] - c64(0.25, 0.0)).norm() < 1e-10);
                assert!((tuple[2] - c64(0.125, 0.0)).norm() < 1e-10);
            }
        }
        assert_eq!(zeros_found, 12);
    }

    #[test]
    fn cluster_reordering_keeps_a_schur_form() {
        let c = direct_sum(&jordan(3, c64(0.2, 0.1)), &jordan(3, c64(-0.4, 0.0)));
        let (q, t) = schur(&c).unwrap();
        let diag: Vec<Complex64> = (0..6).map(|k| t[(k, k)]).collect();
        let labels = cluster_labels(&diag, 0.1);
        let (q2, grouped) = group_clusters(q, t, labels);
        assert!(grouped.windows(2).all(|w| w[0] <= w[1]));
        assert!(op_norm(&(q2.adjoint() * &q2 - ComplexMatrix::identity(6, 6))) < 1e-12);
        assert!(block_lower_norm(&(q2.adjoint() * &c * &q2), &grouped) < 1e-10);
    }

    #[test]
    fn normal_families_need_no_clustering() {
        let d = ComplexMatrix::from_diagonal(&DVector::from_vec(vec![c64(0.1, 0.0), c64(0.9, 0.0)]));
        let approx = approximate_joint_eigenvalues(&[d.clone(), &d * &d], &tol()).unwrap();
        assert_eq!(approx.cluster_radius, 0.0);
    }
}
