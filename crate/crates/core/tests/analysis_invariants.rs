use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tetrablock::analysis::{
    check_fundamental_relations, fundamental_operators, make_triple, necessary_conditions, structured_relations,
    structured_sufficient_conditions, sufficient_conditions, P1, P2,
};
use tetrablock::gallery::{example_counterexample, example_pal, random_family, random_unitary, GalleryKind, GallerySpec};
use tetrablock::operator_core::{classify, op_norm, ToleranceConfig};
use tetrablock::shift_calculus::verify_identity;
use tetrablock::structure::{analyze_partial_isometry_triple, P2_RESTRICTED};

fn tol() -> ToleranceConfig {
    ToleranceConfig::default()
}

fn spec(kind: GalleryKind, seed: u64) -> GallerySpec {
    GallerySpec {
        kind,
        truncation: 4,
        dim: 2 + (seed as usize % 7),
        seed,
    }
}

#[test]
fn fundamental_pair_is_equivariant_under_unitary_conjugation() {
    for seed in 0..8 {
        let t = random_family(&spec(GalleryKind::ProductRandom, seed)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let u = random_unitary(t.dim(), &mut rng);
        let conj = |m: &tetrablock::operator_core::ComplexMatrix| &u * m * u.adjoint();
        let moved = make_triple(conj(&t.t1), conj(&t.t2), conj(&t.t), &tol()).unwrap();
        let (a1, a2) = fundamental_operators(&t, &tol()).unwrap().embedded();
        let (b1, b2) = fundamental_operators(&moved, &tol()).unwrap().embedded();
        assert!(op_norm(&(conj(&a1) - b1)) < 1e-8, "seed {seed}");
        assert!(op_norm(&(conj(&a2) - b2)) < 1e-8, "seed {seed}");
    }
}

#[test]
fn product_triples_satisfy_relations_and_necessary_conditions() {
    for seed in 0..10 {
        let t = random_family(&spec(GalleryKind::ProductRandom, seed)).unwrap();
        let fp = fundamental_operators(&t, &tol()).unwrap();
        let relations = check_fundamental_relations(&t, &fp, &tol());
        assert!(relations.all_hold(), "seed {seed}: {relations:#?}");
        let necessary = necessary_conditions(&t, &fp, &tol());
        assert!(necessary.all_hold(), "seed {seed}: {necessary:#?}");
    }
}

#[test]
fn counterexample_holds_exactly_in_structured_form() {
    let ex = example_counterexample(6).unwrap();
    let relations = structured_relations(&ex.structured, &ex.expected_pair, 8, 1e-14).unwrap();
    assert!(relations.all_hold(), "{relations:#?}");
    assert_eq!(relations.max_residual(), 0.0);
    let product = ex.structured.t1.compose(&ex.structured.t2).unwrap();
    assert!(verify_identity(&product, &ex.structured.t, 8, 0.0).unwrap().holds);
    let sufficient = structured_sufficient_conditions(&ex.expected_pair, 8, 1e-8).unwrap();
    assert_eq!(sufficient.residual(P1), Some(0.0));
    assert!((sufficient.residual(P2).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn pal_last_member_is_a_partial_isometry() {
    let ex = example_pal(3).unwrap();
    assert!(classify(&ex.triple.t, &tol()).partial_isometry);
    let relations = structured_relations(&ex.structured, &ex.expected_pair, 6, 1e-14).unwrap();
    assert!(relations.all_hold(), "{relations:#?}");
    let fp = fundamental_operators(&ex.triple, &tol()).unwrap();
    let sufficient = sufficient_conditions(&fp, &tol());
    assert!(sufficient.holds(P1) && !sufficient.holds(P2));
}

#[test]
fn partial_isometry_family_has_commuting_pairs_and_agreeing_forms() {
    for seed in 0..12 {
        let t = random_family(&spec(GalleryKind::PartialIsometryRandom, seed)).unwrap();
        let analysis = analyze_partial_isometry_triple(&t, &tol()).unwrap();
        assert!(analysis.conditions.holds(P1), "seed {seed}");
        assert!(analysis.p2_forms_agree, "seed {seed}");
        assert_eq!(analysis.conditions.holds(P2), analysis.conditions.holds(P2_RESTRICTED));
    }
}

#[test]
fn gallery_is_bit_identical_per_seed_and_passes_the_commutation_gate() {
    for kind in GalleryKind::ALL {
        for seed in 0..4 {
            let a = random_family(&spec(kind, seed)).unwrap();
            let b = random_family(&spec(kind, seed)).unwrap();
            assert_eq!(a, b);
            assert!(a.commutator_residuals.iter().all(|r| *r <= tol().residual_tol));
        }
    }
}
