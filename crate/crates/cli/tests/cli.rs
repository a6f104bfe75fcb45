use std::path::Path;
use std::process::{Command, Output};

fn pushci(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pushci"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn assert_single_error_line(out: &Output, code: &str, status: i32) {
    assert_eq!(out.status.code(), Some(status), "stderr: {}", stderr(out));
    let err = stderr(out);
    let lines: Vec<&str> = err.lines().collect();
    assert_eq!(lines.len(), 1, "{err}");
    assert!(lines[0].starts_with(&format!("error[{code}]: ")), "{err}");
}

#[test]
fn tiny_hypergeometric_push() {
    let out = pushci(&[
        "push", "--family", "hyper", "--n", "1", "--N", "2", "--gamma", "0.5", "--width", "1",
        "--format", "json",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let ys: Vec<f64> = doc["breakpoints"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    for (got, want) in ys.iter().zip([-0.5, 0.0, 0.5]) {
        assert!((got - want).abs() < 1e-12, "{ys:?}");
    }
    assert_eq!(doc["exists"], true);
    assert_eq!(
        doc["segments"].as_array().unwrap().last().unwrap()["y_hi"],
        "inf"
    );
}

#[test]
fn width_and_step_count_agree() {
    let by_width = pushci(&[
        "push", "--family", "binom", "--n", "10", "--gamma", "0.8", "--m", "1000", "--width",
        "0.33",
    ]);
    let by_r = pushci(&[
        "push", "--family", "binom", "--n", "10", "--gamma", "0.8", "--m", "1000", "--r", "330",
    ]);
    assert!(by_width.status.success(), "{}", stderr(&by_width));
    assert_eq!(by_width.stdout, by_r.stdout);
    assert!(stdout(&by_width).starts_with("y_lo,y_hi,lower,upper\n"));
}

#[test]
fn unrepresentable_width_is_refused() {
    let out = pushci(&[
        "push", "--family", "binom", "--n", "10", "--gamma", "0.8", "--m", "1000", "--width",
        "0.3305",
    ]);
    assert_single_error_line(&out, "invalid-args", 2);
    assert!(
        stderr(&out).contains("0.33000000000000002 and 0.33100000000000002"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn missing_interval_is_reported() {
    let out = pushci(&[
        "push", "--family", "binom", "--n", "10", "--gamma", "0.95", "--m", "1000", "--r", "100",
    ]);
    assert_single_error_line(&out, "not-exists", 3);
    assert!(stderr(&out).contains("no interval of this width exists at this level"));
}

#[test]
fn usage_errors_are_one_line() {
    assert_single_error_line(
        &pushci(&["push", "--family", "binom", "--gamma", "0.8", "--r", "3"]),
        "invalid-args",
        2,
    );
    assert_single_error_line(&pushci(&["frobnicate"]), "invalid-args", 2);
    assert_single_error_line(&pushci(&["push", "--family", "cauchy"]), "invalid-args", 2);
    assert_single_error_line(
        &pushci(&["minwidth", "--family", "normal", "--gamma", "0.9"]),
        "invalid-args",
        2,
    );
    assert!(pushci(&["--help"]).status.success());
}

#[test]
fn minimal_widths() {
    let out = pushci(&[
        "minwidth", "--family", "binom", "--n", "10", "--gamma", "0.7", "--pretty",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(rows(&stdout(&out))[0][4], "0.255");
    let out = pushci(&[
        "minwidth", "--family", "normal", "--lo", "-10", "--hi", "10", "--gamma", "0.95",
        "--format", "json",
    ]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!((doc["width"].as_f64().unwrap() - 3.822).abs() < 1e-3);
}

#[test]
fn exact_coverage_rows_meet_the_level() {
    let out = pushci(&[
        "coverage", "--family", "binom", "--n", "10", "--gamma", "0.8", "--m", "2000", "--r", "700",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let table = rows(&stdout(&out));
    assert_eq!(table.len(), 2001);
    for row in &table {
        assert!(row[1].parse::<f64>().unwrap() >= 0.8 - 1e-9, "{row:?}");
        assert_eq!(row[3], "exact");
    }
}

#[test]
fn standard_comparator_dips_in_the_middle() {
    let out = pushci(&[
        "coverage",
        "--family",
        "binom",
        "--n",
        "10",
        "--gamma",
        "0.8",
        "--width",
        "0.32",
        "--m",
        "1000",
        "--stride",
        "10",
        "--compare",
        "standard",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let table = rows(&stdout(&out));
    assert_eq!(table.len(), 101);
    let standard: Vec<f64> = table.iter().map(|r| r[7].parse().unwrap()).collect();
    assert!(standard[50] < 0.8);
    assert!(standard[0] > 0.99 && standard[100] > 0.99);
}

#[test]
fn simulation_is_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, jobs: &str| {
        let path = dir.path().join(name);
        let out = pushci(&[
            "simulate",
            "--family",
            "binom",
            "--n",
            "10",
            "--gamma",
            "0.8",
            "--m",
            "2000",
            "--r",
            "700",
            "--reps",
            "2000",
            "--seed",
            "1",
            "--stride",
            "20",
            "--jobs",
            jobs,
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        std::fs::read(path).unwrap()
    };
    let a = run("a.csv", "1");
    let b = run("b.csv", "3");
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(rows(&text).iter().all(|r| r[3] == "mc" && !r[2].is_empty()));
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

#[test]
fn batch_keeps_input_order_and_reports_bad_rows() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("strata.csv");
    write(
        &input,
        "stratum,n,s,gamma\nsmall,12,3,0.9\nbad,x,1,\nempty s,30,,\ntoo many,5,6,\nlast,8,0,0.8\n",
    );
    let out = pushci(&[
        "batch",
        input.to_str().unwrap(),
        "--m",
        "2000",
        "--jobs",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(5));
    let err = stderr(&out);
    assert!(err.contains("line 3:") && err.contains("line 5:"), "{err}");
    assert!(err.lines().last().unwrap().starts_with("error[parse]: "));
    let table = rows(&stdout(&out));
    let labels: Vec<&str> = table.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(labels, ["small", "empty s", "last"]);
    assert_eq!(table[1][6], "");
    assert_eq!(table[2][3], "0.80000000000000004");
}

#[test]
fn batch_full_policy_weights_sum_to_one() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("strata.csv");
    write(&input, "stratum,n,s\nonly,15,7\n");
    let out = pushci(&[
        "batch",
        input.to_str().unwrap(),
        "--m",
        "1000",
        "--policy",
        "full",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let total: f64 = rows(&stdout(&out))
        .iter()
        .map(|r| r[8].parse::<f64>().unwrap())
        .sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn table1_reproduction() {
    let out = pushci(&["reproduce", "table1", "--pretty"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let want = [
        ["0.700", "2.004", "0.684", "2.073"],
        ["0.800", "2.494", "0.788", "2.563"],
        ["0.900", "3.203", "0.891", "3.290"],
        ["0.950", "3.822", "0.944", "3.920"],
    ];
    for (row, w) in rows(&stdout(&out)).iter().zip(want) {
        assert_eq!(
            [&row[0], &row[2], &row[3], &row[4]],
            [w[0], w[1], w[2], w[3]]
        );
    }
}

#[test]
fn table2_desk_widths() {
    let out = pushci(&["reproduce", "table2"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let published: [(u64, f64, f64); 16] = [
        (667, 0.073, 0.076),
        (5482, 0.026, 0.027),
        (5078, 0.027, 0.028),
        (2269, 0.040, 0.041),
        (6810, 0.023, 0.024),
        (17669, 0.015, 0.015),
        (8165, 0.021, 0.022),
        (2032, 0.043, 0.044),
        (1158, 0.056, 0.058),
        (3116, 0.034, 0.035),
        (1033, 0.059, 0.061),
        (229, 0.122, 0.131),
        (225, 0.123, 0.133),
        (1595, 0.048, 0.050),
        (554, 0.080, 0.085),
        (124, 0.162, 0.177),
    ];
    let table = rows(&stdout(&out));
    assert_eq!(table.len(), 16);
    for (row, (n, push_w, std_w)) in table.iter().zip(published) {
        assert_eq!(row[1], n.to_string());
        let got_push: f64 = row[5].parse().unwrap();
        let got_std: f64 = row[10].parse().unwrap();
        assert!((got_push - push_w).abs() <= 1e-3, "n={n}: {got_push}");
        assert!((got_std - std_w).abs() <= 1e-3, "n={n}: {got_std}");
    }
}

#[test]
fn minimum_coverage_curves() {
    let out = pushci(&["reproduce", "fig-min"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let table = rows(&stdout(&out));
    for family in ["", "500"] {
        let pick = |method: &str| -> Vec<(f64, f64)> {
            let mut v: Vec<(f64, f64)> = table
                .iter()
                .filter(|r| r[1] == family && r[3] == method)
                .map(|r| (r[4].parse().unwrap(), r[5].parse().unwrap()))
                .collect();
            v.sort_by(|a, b| a.0.total_cmp(&b.0));
            v
        };
        let push = pick("push");
        let standard = pick("standard");
        for (w, cov) in &push {
            let (_, s) = standard
                .iter()
                .find(|(sw, _)| sw == w)
                .expect("standard at every Push width");
            assert!(cov > s, "width {w}: push {cov} vs standard {s}");
        }
        assert!(standard.windows(2).all(|p| p[0].1 <= p[1].1));
        assert!(push.windows(2).all(|p| p[0].1 <= p[1].1));
    }
}

#[test]
fn outputs_are_bit_identical_across_runs() {
    let args = ["reproduce", "fig-hyper", "--format", "csv"];
    assert_eq!(pushci(&args).stdout, pushci(&args).stdout);
}
