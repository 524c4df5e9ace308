mod common;

use common::{path_str, run_ok, toy_model};
use leurn::core::data::{half_moon, HalfMoonSpec};
use leurn::core::model::predict;
use leurn::core::rules::extract_region;
use leurn::{load_bundle, parse_bundle, save_bundle, CliError, BUNDLE_FORMAT_VERSION};

#[test]
fn save_load_predicts_bit_exactly_on_1000_rows() {
    let dir = tempfile::tempdir().unwrap();
    let (_, model) = toy_model(dir.path(), &[]);
    let original = load_bundle(&model).unwrap();
    let copy_path = dir.path().join("copy.json");
    save_bundle(&original, &copy_path).unwrap();
    let copy = load_bundle(&copy_path).unwrap();
    assert_eq!(copy, original);
    assert_eq!(std::fs::read(&model).unwrap(), std::fs::read(&copy_path).unwrap());

    let probe = half_moon(HalfMoonSpec::new(1000, 77)).unwrap();
    for i in 0..probe.len() {
        let x = probe.row(i);
        let a = predict(&original.params, &original.config, x).unwrap();
        let b = predict(&copy.params, &copy.config, x).unwrap();
        assert_eq!(a.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), b.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        let (ra, _) = extract_region(&original.params, &original.config, x).unwrap();
        let (rb, _) = extract_region(&copy.params, &copy.config, x).unwrap();
        assert_eq!(ra, rb);
    }
}

#[test]
fn truncated_bundle_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let (_, model) = toy_model(dir.path(), &[]);
    let text = std::fs::read_to_string(&model).unwrap();
    let err = parse_bundle(&text[..text.len() / 2], &model).unwrap_err();
    assert!(matches!(err, CliError::Json { .. }), "{err}");
    assert_eq!(err.kind(), "parse");
}

#[test]
fn version_mismatch_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let (_, model) = toy_model(dir.path(), &[]);
    let text = std::fs::read_to_string(&model).unwrap();
    let bumped = text.replacen(
        &format!("\"format_version\": {BUNDLE_FORMAT_VERSION}"),
        &format!("\"format_version\": {}", BUNDLE_FORMAT_VERSION + 1),
        1,
    );
    let err = parse_bundle(&bumped, &model).unwrap_err();
    assert!(matches!(err, CliError::Bundle(ref m) if m.contains("format_version")), "{err}");
}

#[test]
fn shape_violations_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let (_, model) = toy_model(dir.path(), &[]);
    let mut bundle = load_bundle(&model).unwrap();
    bundle.params.tau0.push(0.0);
    let err = parse_bundle(&bundle.to_json(), &model).unwrap_err();
    assert_eq!(err.kind(), "shape", "{err}");

    let mut bundle = load_bundle(&model).unwrap();
    bundle.config.n_features = 3;
    assert!(bundle.validate().is_err());
}

#[test]
fn bundle_leads_with_format_version() {
    let dir = tempfile::tempdir().unwrap();
    let (_, model) = toy_model(dir.path(), &[]);
    let text = std::fs::read_to_string(&model).unwrap();
    assert!(text.lines().nth(1).unwrap().trim().starts_with("\"format_version\""));
}

#[test]
fn timestamp_comes_from_flag_or_environment() {
    let dir = tempfile::tempdir().unwrap();
    let (_, plain) = toy_model(dir.path(), &[]);
    assert_eq!(load_bundle(&plain).unwrap().provenance.timestamp, None);

    let data = dir.path().join("hm.csv");
    let stamped = dir.path().join("stamped.json");
    run_ok(&[
        "train", "--data", path_str(&data), "--target", "y", "--epochs", "3", "--patience", "1", "--timestamp",
        "1700000000", "--out", path_str(&stamped),
    ]);
    assert_eq!(load_bundle(&stamped).unwrap().provenance.timestamp, Some(1_700_000_000));

    let env_path = dir.path().join("env.json");
    let out = common::bin()
        .env("SOURCE_DATE_EPOCH", "42")
        .args(["train", "--data", path_str(&data), "--target", "y", "--epochs", "3", "--patience", "1", "--out"])
        .arg(&env_path)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(load_bundle(&env_path).unwrap().provenance.timestamp, Some(42));
}

#[test]
fn identical_flags_give_identical_bundles() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let (_, ma) = toy_model(a.path(), &[]);
    let (_, mb) = toy_model(b.path(), &[]);
    assert_eq!(std::fs::read(ma).unwrap(), std::fs::read(mb).unwrap());
}
