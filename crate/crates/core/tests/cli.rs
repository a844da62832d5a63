use rankbound::cli::{run, EXIT_FAILED, EXIT_OK, EXIT_USAGE};
use serde_json::Value;

fn invoke(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("rankbound").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> Value {
    let mut full = vec!["--format", "json"];
    full.extend_from_slice(args);
    let (code, out, err) = invoke(&full);
    assert_eq!(code, EXIT_OK, "{err}");
    serde_json::from_str(&out).unwrap()
}

#[test]
fn constants_keys_and_values() {
    let v = json(&["constants"]);
    for (key, target) in [
        ("phi0_hat_0", 0.9281),
        ("c", 11.028),
        ("G_abs_phi_1", 0.1535),
        ("G_abs_dphi_1", 0.3666),
        ("G_abs_d2phi_1", 0.3321),
    ] {
        let x = v[key].as_f64().unwrap_or_else(|| panic!("missing {key}"));
        assert!((x - target).abs() < 5e-4, "{key} = {x}");
        assert!(v["err_estimate"][key].as_f64().is_some());
    }
    assert_eq!(v["seed"], 0);
}

#[test]
fn bound_report_fields() {
    let v = json(&["bound", "--a", "0.48", "--delta", "0.5"]);
    let h = v["H"].as_f64().unwrap();
    assert!((6.49..=6.51).contains(&h));
    let slack = v["slack"].as_f64().unwrap();
    assert!((slack - (6.5 - h)).abs() < 1e-9);
    for key in ["a", "delta", "phi0_hat0", "g_phi_1", "g_phi_a", "g_phi2_1", "g_phi2_a", "bracket"] {
        assert!(v[key].is_number(), "{key}");
    }
}

#[test]
fn a_at_one_is_a_usage_error() {
    let (code, out, err) = invoke(&["bound", "--a", "1.0"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(out.is_empty());
    assert!(err.contains("open interval"), "{err}");
}

#[test]
fn bad_arguments_exit_two() {
    assert_eq!(invoke(&["--tol", "1e-20", "constants"]).0, EXIT_USAGE);
    assert_eq!(invoke(&["--tol", "1e-2", "constants"]).0, EXIT_USAGE);
    assert_eq!(invoke(&["bound"]).0, EXIT_USAGE);
    assert_eq!(invoke(&["frobnicate"]).0, EXIT_USAGE);
    assert_eq!(invoke(&["--format", "xml", "constants"]).0, EXIT_USAGE);
    assert_eq!(invoke(&["scan", "--a-min", "0.7", "--a-max", "0.3"]).0, EXIT_USAGE);
}

#[test]
fn sieve_limit_too_small_exits_two() {
    let (code, _, err) = invoke(&["--sieve-limit", "1000", "verify", "--suite", "mollifier"]);
    assert_eq!(code, EXIT_USAGE, "{err}");
}

#[test]
fn scan_csv_layout() {
    let (code, out, err) = invoke(&["--format", "csv", "--seed", "7", "scan"]);
    assert_eq!(code, EXIT_OK);
    assert!(!out.contains('\r'));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "a,H,bracket,g_phi_a,g_phi2_a");
    assert_eq!(lines.len(), 1 + 40 + 1);
    let best: Vec<f64> = lines.last().unwrap().split(',').map(|s| s.parse().unwrap()).collect();
    for row in &lines[1..lines.len() - 1] {
        let h: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
        assert!(best[1] <= h);
    }
    assert!(best[1] <= 6.5);
    assert!(err.contains("seed=7"));
}

#[test]
fn output_is_deterministic() {
    for args in [
        &["--format", "json", "scan"][..],
        &["--format", "csv", "bound", "--a", "0.5"][..],
        &["--format", "table", "constants"][..],
        &["--format", "json", "--seed", "3", "verify", "--suite", "detector"][..],
    ] {
        let first = invoke(args);
        let second = invoke(args);
        assert_eq!(first, second, "{args:?}");
    }
}

#[test]
fn json_numbers_carry_twelve_digits() {
    let (_, out, _) = invoke(&["--format", "json", "bound", "--a", "0.48"]);
    let h_line = out.lines().find(|l| l.contains("\"H\"")).unwrap();
    let digits: String = h_line.chars().filter(|c| c.is_ascii_digit()).collect();
    assert!(digits.trim_start_matches('0').len() <= 12, "{h_line}");
}

#[test]
fn verify_suites_report_each_check() {
    let v = json(&["--seed", "11", "verify", "--suite", "identities"]);
    assert_eq!(v["passed"], true);
    assert_eq!(v["seed"], 11);
    assert!(v["checks"].as_array().unwrap().len() >= 9);

    let v = json(&["verify", "--suite", "detector"]);
    assert_eq!(v["passed"], true);
}

#[test]
fn failing_verification_exits_one() {
    // The smallest-delta closed form for S misses its error scale at M = 1e5.
    let (code, out, err) = invoke(&["--format", "json", "verify", "--suite", "mollifier"]);
    assert_eq!(code, EXIT_FAILED);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["passed"], false);
    assert!(err.contains("FAILED"));
}

#[test]
fn table_uses_six_digits() {
    let (code, out, _) = invoke(&["bound", "--a", "0.48"]);
    assert_eq!(code, EXIT_OK);
    let h_line = out.lines().find(|l| l.starts_with("H ")).unwrap();
    assert!(h_line.ends_with("6.49796"), "{h_line}");
}
