use std::process::Command;

use serde_json::Value;

const INTERVAL: &str = r#"{"type":"interval","a":-1,"b":1}"#;
const DISK: &str = r#"{"type":"ball_p","dim":2,"p":2}"#;
const HALF_BALL: &str = r#"{"type":"half_ball","dim":3}"#;
const TRIANGLE: &str = r#"{"type":"simplex","vertices":[[0,0],[1,0],[0,1]]}"#;

fn run_env(args: &[&str], threads: Option<&str>) -> (i32, String, String) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_christoffel"));
    cmd.args(args);
    if let Some(t) = threads {
        cmd.env("CHRISTOFFEL_THREADS", t);
    }
    let out = cmd.output().expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn run(args: &[&str]) -> (i32, String) {
    let (code, out, _) = run_env(args, None);
    (code, out)
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap_or_else(|e| panic!("{e}: {text}"))
}

#[test]
fn eval_interval_endpoint() {
    let (code, out) = run(&["eval", "--domain", INTERVAL, "--degree", "5", "--point", "1"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert!((v["C"].as_f64().unwrap() - 18.0).abs() < 1e-10);
    assert!((v["ratio"].as_f64().unwrap() - 18f64.sqrt()).abs() < 1e-10);
}

#[test]
fn eval_degree_zero_is_inverse_volume() {
    let (code, out) = run(&["eval", "--domain", DISK, "--degree", "0", "--point", "0.2,-0.4"]);
    assert_eq!(code, 0);
    assert!((json(&out)["C"].as_f64().unwrap() - 1.0 / std::f64::consts::PI).abs() < 1e-12);
}

#[test]
fn eval_outside_the_domain() {
    let (code, out) = run(&["eval", "--domain", HALF_BALL, "--degree", "3", "--point", "1.2,0,-0.5"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["inside"], Value::Bool(false));
    assert!(v["C"].as_f64().unwrap() > 0.0);
}

#[test]
fn eval_csv_has_seventeen_digits() {
    let (code, out) = run(&[
        "eval", "--domain", INTERVAL, "--degree", "2", "--point", "0.5", "--format", "csv",
    ]);
    assert_eq!(code, 0);
    let mut lines = out.lines();
    assert_eq!(lines.next().unwrap(), "x_1,n,C,ratio,degraded");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let mantissa = row[2].split('e').next().unwrap().replace(['.', '-'], "");
    assert_eq!(mantissa.len(), 17);
}

#[test]
fn exit_codes_by_error_class() {
    assert_eq!(
        run(&["eval", "--domain", "{\"type\":", "--degree", "1", "--point", "0"]).0,
        2
    );
    assert_eq!(
        run(&[
            "eval",
            "--domain",
            r#"{"type":"torus"}"#,
            "--degree",
            "1",
            "--point",
            "0"
        ])
        .0,
        2
    );
    assert_eq!(
        run(&["eval", "--domain", INTERVAL, "--degree", "1", "--point", "0,1"]).0,
        3
    );
    let (code, out, err) = run_env(
        &["eval", "--domain", TRIANGLE, "--degree", "22", "--point", "0,0"],
        None,
    );
    assert_eq!(code, 4);
    assert_eq!(json(&out)["degraded"], Value::Bool(true));
    assert!(err.contains("degraded"));
    assert_eq!(
        run(&[
            "eval",
            "--domain",
            "/nonexistent/domain.json",
            "--degree",
            "1",
            "--point",
            "0"
        ])
        .0,
        1
    );
}

#[test]
fn max_on_the_square_is_at_a_vertex() {
    let (code, out) = run(&["max", "--domain", r#"{"type":"cube","dim":2}"#, "--degree", "6"]);
    assert_eq!(code, 0);
    let r = &json(&out)["report"];
    for v in r["argmax"].as_array().unwrap() {
        assert!((v.as_f64().unwrap().abs() - 1.0).abs() < 1e-9);
    }
    assert_eq!(r["at_catalogue_point"], Value::Bool(true));
}

#[test]
fn sigma_on_the_disk() {
    let (code, out) = run(&["sigma", "--domain", DISK, "--degrees", "4:24:2"]);
    assert_eq!(code, 0);
    let v = json(&out);
    let fit = &v["sigma_fit"];
    let slope = fit["slope"].as_f64().unwrap();
    let tol = fit["half_width"].as_f64().unwrap() + 0.3;
    assert!((slope - 3.0).abs() <= tol, "{slope}");
    assert_eq!(v["sigma_reference"].as_f64(), Some(3.0));
}

#[test]
fn sigma_csv_is_reproducible_across_thread_counts() {
    let args = ["sigma", "--domain", TRIANGLE, "--degrees", "4:12:2", "--format", "csv"];
    let (c1, a, _) = run_env(&args, Some("1"));
    let (c2, b, _) = run_env(&args, Some("4"));
    let (c3, c, _) = run_env(&args, None);
    assert_eq!((c1, c2, c3), (0, 0, 0));
    assert_eq!(a, b);
    assert_eq!(a, c);
    assert_eq!(a.lines().next().unwrap(), "n,C_max,argmax_1,argmax_2,degraded");
    assert_eq!(a.lines().count(), 6);
}

#[test]
fn output_file() {
    let path = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("table.csv");
    let p = path.to_str().unwrap();
    let (code, out) = run(&["table", "--format", "csv", "--output", p]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("family,dim,p,sigma,ratio_exponent\n"));
}

#[test]
fn table_rows() {
    let (code, out) = run(&["table"]);
    assert_eq!(code, 0);
    let rows = json(&out);
    let find = |family: &str, dim: u64, p: Option<&str>| {
        rows.as_array()
            .unwrap()
            .iter()
            .find(|r| r["family"] == family && r["dim"] == dim && r["p"].as_str() == p)
            .map(|r| r["sigma"].as_f64().unwrap())
    };
    assert_eq!(find("ball_p", 2, Some("1")), Some(4.0));
    assert_eq!(find("product(ball_p(2,2),interval)", 3, None), Some(5.0));
    assert_eq!(find("cone_disk", 3, None), Some(6.0));
    assert_eq!(find("half_ball", 3, None), Some(5.0));
}

#[test]
fn certify_upper_ellipsoid_on_the_half_ball() {
    for n in [1, 5, 50] {
        let (code, out) = run(&[
            "certify",
            "--kind",
            "upper-ellipsoid",
            "--domain",
            HALF_BALL,
            "--degree",
            &n.to_string(),
        ]);
        assert_eq!(code, 0);
        let v = json(&out);
        let want = 160.0 * (n as f64).powi(5);
        assert!((v["rate"]["value"].as_f64().unwrap() - want).abs() < 1e-9 * want);
        assert_eq!(v["verified"], Value::Bool(true));
    }
}

#[test]
fn certify_fails_for_an_oversized_ellipsoid() {
    let map = r#"{"A":[[1.01,0,0],[0,1.01,0],[0,0,1.01]],"b":[0,0,0]}"#;
    let (code, out) = run(&[
        "certify",
        "--kind",
        "upper-ellipsoid",
        "--domain",
        r#"{"type":"ball_p","dim":3,"p":2}"#,
        "--degree",
        "4",
        "--map",
        map,
    ]);
    assert_eq!(code, 5);
    assert_eq!(json(&out)["verified"], Value::Bool(false));
}

#[test]
fn certify_lower_parallel_rate() {
    let b = r#"{"type":"ball_p","dim":2,"p":"1.5"}"#;
    let (code, out) = run(&["certify", "--kind", "lower-parallel", "--domain", b, "--degree", "16"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert!((v["rate"]["exponent"].as_f64().unwrap() - 10.0 / 3.0).abs() < 0.01);
    assert_eq!(v["lambda"]["detected"], Value::Bool(true));
}

#[test]
fn certify_lower_tensor_slope_on_the_half_ball() {
    let (code, out) = run(&[
        "certify",
        "--kind",
        "lower-tensor",
        "--domain",
        HALF_BALL,
        "--degrees",
        "6:18:3",
        "--point",
        "1,0,0",
    ]);
    assert_eq!(code, 0);
    let v = json(&out);
    let slope = v["bound_fit"]["slope"].as_f64().unwrap();
    assert!((slope - 5.0).abs() < 0.6, "{slope}");
}

#[test]
fn certify_upper_cone_on_b15() {
    let b = r#"{"type":"ball_p","dim":2,"p":1.5}"#;
    let (code, out) = run(&[
        "certify",
        "--kind",
        "upper-cone",
        "--domain",
        b,
        "--degree",
        "8",
        "--point",
        "0,-1",
    ]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert!((v["rate"]["exponent"].as_f64().unwrap() - 10.0 / 3.0).abs() < 1e-12);
    assert_eq!(
        run(&["certify", "--kind", "upper-cone", "--domain", DISK, "--degree", "8"]).0,
        0
    );
    assert_eq!(
        run(&["certify", "--kind", "upper-cone", "--domain", TRIANGLE, "--degree", "8"]).0,
        1
    );
}

#[test]
fn norms_bootstrap_on_the_square() {
    let (code, out) = run(&[
        "norms",
        "--domain",
        r#"{"type":"cube","dim":2}"#,
        "--degree",
        "4",
        "--q",
        "1",
        "--r",
        "inf",
        "--s",
        "2",
        "--seed",
        "3",
    ]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["check"]["holds"], Value::Bool(true));
    assert!(v["check"]["slack"].as_f64().unwrap() > 0.0);
    // vertex value sum_{a+b<=4} (2a+1)(2b+1)/4 = 155/4
    assert!((v["ratio_2_inf"].as_f64().unwrap() - 38.75f64.sqrt()).abs() < 1e-8);
}
