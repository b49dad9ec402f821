use nalgebra::DVector;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tetrablock::analysis::{fundamental_operators, necessary_conditions};
use tetrablock::gallery::{random_family, GalleryKind, GallerySpec};
use tetrablock::lifting::{ando_lift, lift_block_identities, tetra_product_lift, verify_lift};
use tetrablock::operator_core::{defect_operator, op_norm, Subspace, ToleranceConfig};

fn tol() -> ToleranceConfig {
    ToleranceConfig::default()
}

fn product(seed: u64) -> tetrablock::analysis::CommutingTriple {
    random_family(&GallerySpec {
        kind: GalleryKind::ProductRandom,
        truncation: 4,
        dim: 2 + (seed as usize % 5),
        seed,
    })
    .unwrap()
}

#[test]
fn pairing_identity_holds_on_random_vectors() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for seed in 0..10 {
        let t = product(seed);
        let d1 = defect_operator(&t.t1, &tol()).unwrap();
        let d2 = defect_operator(&t.t2, &tol()).unwrap();
        for _ in 0..5 {
            let h = DVector::<Complex64>::from_fn(t.dim(), |_, _| {
                Complex64::new(rand::Rng::random_range(&mut rng, -1.0..1.0), rand::Rng::random_range(&mut rng, -1.0..1.0))
            });
            let left = (&d1 * &t.t2 * &h).norm_squared() + (&d2 * &h).norm_squared();
            let right = (&d2 * &t.t1 * &h).norm_squared() + (&d1 * &h).norm_squared();
            assert!((left - right).abs() <= 1e-8 * h.norm_squared(), "seed {seed}");
        }
    }
}

#[test]
fn lifts_are_lower_triangular() {
    for seed in 0..6 {
        let t = product(seed);
        let lift = ando_lift(&t.t1, &t.t2, 4, &tol()).unwrap();
        let perp = Subspace::from_orthonormal_columns(&lift.embed).complement();
        for (v, ti) in [(&lift.v1, &t.t1), (&lift.v2, &t.t2)] {
            assert!(op_norm(&(lift.embed.adjoint() * v * &lift.embed - ti)) < 1e-12);
            assert!(op_norm(&(lift.embed.adjoint() * v * perp.basis())) < 1e-12);
        }
    }
}

#[test]
fn verification_residual_does_not_grow_with_levels() {
    for seed in 0..4 {
        let t = product(seed);
        let residuals: Vec<f64> = [4, 6, 8]
            .into_iter()
            .map(|levels| verify_lift(&t, &ando_lift(&t.t1, &t.t2, levels, &tol()).unwrap(), 2).unwrap())
            .collect();
        for pair in residuals.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-12, "seed {seed}: {residuals:?}");
        }
    }
}

#[test]
fn verified_lifts_force_necessary_conditions_and_block_identities() {
    for seed in 0..6 {
        let t = product(seed);
        let product_lift = tetra_product_lift(&t.t1, &t.t2, 6, &tol()).unwrap();
        assert!(product_lift.isometry.is_isometry(), "seed {seed}");
        assert!(verify_lift(&t, &product_lift.lift, 2).unwrap() <= 1e-8);
        let fp = fundamental_operators(&t, &tol()).unwrap();
        assert!(necessary_conditions(&t, &fp, &tol()).all_hold(), "seed {seed}");
        let (report, _) = lift_block_identities(&t, &product_lift.lift, &tol()).unwrap();
        assert!(report.max_residual() <= 1e-7, "seed {seed}: {report:#?}");
    }
}
