use std::process::{Command, Output};

use tetrablock::analysis::FalsifierConfig;
use tetrablock_cli::{load, run_dossier, DossierConfig, DossierReport, GalleryOptions, Source, TripleFile};

fn tetra(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tetra")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn small_config() -> DossierConfig {
    DossierConfig {
        falsifier: FalsifierConfig {
            n_polys: 20,
            n_samples: 2000,
            ..FalsifierConfig::default()
        },
        ..DossierConfig::default()
    }
}

#[test]
fn dossier_round_trips_through_json() {
    let options = GalleryOptions {
        truncation: 4,
        seed: 3,
        dim: 3,
    };
    for name in ["product-random", "partial-isometry", "counterexample"] {
        let source: Source = format!("gallery:{name}").parse().unwrap();
        let input = load(&source, &options).unwrap();
        let report = run_dossier(&input, &small_config());
        assert!(!report.has_internal_failure(), "{name}");
        let back = DossierReport::from_json(&report.to_json()).unwrap();
        assert_eq!(back, report, "{name}");
    }
}

#[test]
fn dossier_command_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pal.json");
    let out = tetra(&[
        "dossier",
        "gallery:pal",
        "--n",
        "4",
        "--polys",
        "20",
        "--samples",
        "2000",
        "--json",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = DossierReport::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report.provenance.truncation, Some(4));
    assert!(stdout(&out).contains(&report.verdict.summary));
}

#[test]
fn file_input_matches_gallery_input() {
    let options = GalleryOptions {
        truncation: 4,
        seed: 5,
        dim: 3,
    };
    let gallery = load(&"gallery:product-random".parse().unwrap(), &options).unwrap();
    let file = TripleFile::from_matrices(&gallery.t1, &gallery.t2, &gallery.t);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("triple.json");
    std::fs::write(&path, serde_json::to_string(&file).unwrap()).unwrap();
    let out = tetra(&["lift", path.to_str().unwrap(), "--levels", "4", "--degree", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("verify_lift at degree 2"));
}

#[test]
fn bad_inputs_exit_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let malformed = dir.path().join("bad.json");
    std::fs::write(&malformed, "{ \"dim\": 1, \"T1\": [[[0.0, 0.0]]], oops }").unwrap();
    let wrong_shape = dir.path().join("shape.json");
    std::fs::write(
        &wrong_shape,
        r#"{"dim": 2, "T1": [[[0, 0]]], "T2": [[[0, 0]]], "T": [[[0, 0]]]}"#,
    )
    .unwrap();
    let missing = dir.path().join("missing.json");
    for input in [
        malformed.to_str().unwrap(),
        wrong_shape.to_str().unwrap(),
        missing.to_str().unwrap(),
        "gallery:no-such-example",
    ] {
        let out = tetra(&["dossier", input]);
        assert_eq!(out.status.code(), Some(2), "{input}");
        assert!(!out.stderr.is_empty(), "{input}");
    }
}

#[test]
fn non_commuting_file_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("noncommuting.json");
    std::fs::write(
        &path,
        r#"{"dim": 2,
            "T1": [[[0, 0], [1, 0]], [[0, 0], [0, 0]]],
            "T2": [[[0, 0], [0, 0]], [[1, 0], [0, 0]]],
            "T": [[[0, 0], [0, 0]], [[0, 0], [0, 0]]]}"#,
    )
    .unwrap();
    let out = tetra(&["falsify", path.to_str().unwrap(), "--polys", "5", "--samples", "100"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn geometry_accepts_negative_coordinates() {
    let out = tetra(&["geometry", "point", "-0.5", "0", "0.5", "0", "-0.25", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("in tetrablock: true"));

    let out = tetra(&["geometry", "point", "0.5", "0", "0.5", "0", "1", "0", "--closed"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("in closed tetrablock: true"), "{text}");
    assert!(text.contains("distinguished boundary: true"), "{text}");

    let out = tetra(&["geometry", "point", "2", "0", "0", "0", "0", "0"]);
    assert!(stdout(&out).contains("in tetrablock: false"));
}

#[test]
fn gallery_list_names_every_example() {
    let out = tetra(&["gallery", "list"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for name in ["counterexample", "pal", "product-random", "tetra-unitary", "partial-isometry"] {
        assert!(text.contains(&format!("gallery:{name}")), "{name} missing from {text}");
    }
}
