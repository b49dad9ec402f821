use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tetrablock::analysis::max_boundary_radius;
use tetrablock::gallery::{random_contraction, random_unitary};
use tetrablock::operator_core::{
    defect, extend_isometry_to_unitary, identity, joint_eigenvalues, numerical_radius, op_norm, ComplexMatrix, Subspace,
    ToleranceConfig,
};

fn tol() -> ToleranceConfig {
    ToleranceConfig::default()
}

fn matrix(max_dim: usize) -> impl Strategy<Value = ComplexMatrix> {
    (1..=max_dim).prop_flat_map(|n| {
        prop::collection::vec(-1.0f64..1.0, 2 * n * n).prop_map(move |v| {
            ComplexMatrix::from_fn(n, n, |i, j| Complex64::new(v[2 * (i * n + j)], v[2 * (i * n + j) + 1]))
        })
    })
}

fn contraction(max_dim: usize) -> impl Strategy<Value = ComplexMatrix> {
    (matrix(max_dim), 0.05f64..1.0).prop_map(|(m, r)| {
        let norm = op_norm(&m);
        if norm == 0.0 {
            m
        } else {
            m * Complex64::new(r / norm, 0.0)
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn defect_squares_to_identity_minus_gram(x in contraction(6)) {
        let d = defect(&x, &tol()).unwrap();
        let n = x.nrows();
        let gap = &d.operator * &d.operator - (identity(n) - x.adjoint() * &x);
        prop_assert!(op_norm(&gap) < 1e-8);
        prop_assert!(op_norm(&(&d.operator - d.operator.adjoint())) < 1e-12);
        prop_assert!(d.space.orthonormality_residual() < 1e-10);
        // The operator vanishes off its defect space.
        let off = d.space.complement();
        prop_assert!(op_norm(&(&d.operator * off.basis())) < 1e-4);
    }

    #[test]
    fn numerical_radius_is_between_half_norm_and_norm(a in matrix(5)) {
        let w = numerical_radius(&a, 120).unwrap();
        let norm = op_norm(&a);
        prop_assert!(w <= norm * (1.0 + 1e-9) + 1e-12);
        prop_assert!(w >= norm / 2.0 * (1.0 - 1e-6) - 1e-12);
        let spectral = tetrablock::operator_core::spectral_radius(&a).unwrap();
        prop_assert!(spectral <= w * (1.0 + 1e-6) + 1e-9);
    }

    #[test]
    fn numerical_radius_is_unitarily_invariant(a in matrix(4), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_unitary(a.nrows(), &mut rng);
        let w = numerical_radius(&a, 120).unwrap();
        let w_conj = numerical_radius(&(&u * &a * u.adjoint()), 120).unwrap();
        prop_assert!((w - w_conj).abs() < 1e-6 * (1.0 + w));
    }

    #[test]
    fn boundary_radius_ignores_phase_of_second_operator(
        f1 in matrix(3),
        seed in any::<u64>(),
        theta in 0.0f64..std::f64::consts::TAU,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f2 = random_contraction(f1.nrows(), 0.7, &mut rng);
        let rotated = &f2 * Complex64::from_polar(1.0, theta);
        let a = max_boundary_radius(&f1, &f2, 90).unwrap().max;
        let b = max_boundary_radius(&f1, &rotated, 90).unwrap().max;
        // Both scans sample the same circle on shifted grids.
        prop_assert!((a - b).abs() < 0.02 * (1.0 + a));
    }

    #[test]
    fn isometry_extension_is_unitary(n in 2usize..7, k in 1usize..6, seed in any::<u64>()) {
        let k = k.min(n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = random_unitary(n, &mut rng);
        let domain = Subspace::from_orthonormal_columns(&q.columns(0, k).into_owned());
        let w = random_unitary(n, &mut rng);
        let codomain = Subspace::from_orthonormal_columns(&(&w * domain.basis()));
        let u = extend_isometry_to_unitary(&domain, &codomain, &w, &tol()).unwrap();
        prop_assert!(op_norm(&(u.adjoint() * &u - identity(n))) < 1e-10);
        prop_assert!(op_norm(&(&u * domain.basis() - &w * domain.basis())) < 1e-10);
    }

    #[test]
    fn joint_eigenvalues_recover_planted_spectrum(n in 1usize..7, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = random_unitary(n, &mut rng);
        let planted: Vec<[Complex64; 2]> = (0..n)
            .map(|k| {
                let angle = k as f64 * std::f64::consts::TAU / n as f64;
                [Complex64::from_polar(0.8, angle), Complex64::new(0.1 * k as f64, -0.2)]
            })
            .collect();
        let diag = |j: usize| {
            let d = nalgebra::DVector::from_iterator(n, planted.iter().map(|p| p[j]));
            &q * ComplexMatrix::from_diagonal(&d) * q.adjoint()
        };
        let found = joint_eigenvalues(&[diag(0), diag(1)], &tol()).unwrap();
        prop_assert_eq!(found.len(), n);
        let mut used = vec![false; n];
        for p in &planted {
            let (best, dist) = found
                .iter()
                .enumerate()
                .filter(|(i, _)| !used[*i])
                .map(|(i, f)| (i, (f[0] - p[0]).norm() + (f[1] - p[1]).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            prop_assert!(dist < 1e-8, "planted {:?} nearest distance {}", p, dist);
            used[best] = true;
        }
    }
}
