//! End-to-end runs of the `hsss` binary against the files in `testdata/`.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hsss::cli::{
    EXIT_AUDIT_FAILED, EXIT_AUTHENTICATION, EXIT_INCONSISTENT, EXIT_INPUT, EXIT_OK,
    EXIT_UNQUALIFIED,
};
use hsss::io::{parse_report, parse_share};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("testdata")
        .join(name)
}

fn hsss(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hsss"))
        .args(args)
        .env_remove("HSSS_CONFIG")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Deals the example polynomial into a fresh directory.
fn deal_example(dir: &Path) -> Output {
    hsss(&[
        "deal",
        "--config",
        s(&data("config.json")),
        "--chart",
        s(&data("example-chart.json")),
        "--secret-vector",
        "4967295,94967,9496729",
        "--blinding",
        "429496",
        "--seed",
        "1",
        "--out-dir",
        s(dir),
    ])
}

fn reconstruct(shares: &[PathBuf], json: bool) -> Output {
    let mut args = vec![
        "reconstruct".to_string(),
        "--config".into(),
        s(&data("config.json")).into(),
        "--chart".into(),
        s(&data("example-chart.json")).into(),
        "--shares".into(),
    ];
    args.extend(shares.iter().map(|p| s(p).to_string()));
    if json {
        args.push("--json".into());
    }
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    hsss(&refs)
}

fn share(dir: &Path, login: u64) -> PathBuf {
    dir.join(format!("share-{login}.json"))
}

#[test]
fn deal_writes_the_example_shares() {
    let dir = tempfile::tempdir().unwrap();
    let out = deal_example(dir.path());
    assert_eq!(out.status.code(), Some(EXIT_OK), "{}", stderr(&out));
    assert!(stderr(&out).contains("NOT FOR PRODUCTION"));

    type Golden<'a> = (u64, u32, &'a [(&'a str, &'a str)]);
    let expected: [Golden; 9] = [
        (
            9,
            3,
            &[
                ("28", "2527731964"),
                ("55", "31222823"),
                ("82", "1673628957"),
            ],
        ),
        (7, 2, &[("22", "2492596253"), ("43", "3826770342")]),
        (8, 2, &[("25", "2541468297"), ("49", "1061011979")]),
        (1, 1, &[("4", "629608804")]),
        (2, 1, &[("7", "3297231991")]),
        (3, 1, &[("10", "966393524")]),
        (4, 1, &[("13", "3765498123")]),
        (5, 1, &[("16", "348113953")]),
        (6, 1, &[("19", "842645734")]),
    ];
    for (login, level, pairs) in expected {
        let doc = parse_share(&fs::read_to_string(share(dir.path(), login)).unwrap()).unwrap();
        assert_eq!(
            (doc.login, doc.level, doc.q.as_str(), doc.h),
            (login, level, "4294967311", 3)
        );
        let got: Vec<(&str, &str)> = doc
            .points
            .iter()
            .map(|p| (p.x.as_str(), p.y.as_str()))
            .collect();
        assert_eq!(got, pairs);
    }
    assert!(dir.path().join("roster.json").exists());
}

#[test]
fn seeded_deal_is_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [a.path(), b.path()] {
        let out = hsss(&[
            "deal",
            "--config",
            s(&data("config.json")),
            "--chart",
            s(&data("example-chart.json")),
            "--secret",
            "14307601",
            "--seed",
            "99",
            "--out-dir",
            s(dir),
        ]);
        assert_eq!(out.status.code(), Some(EXIT_OK), "{}", stderr(&out));
    }
    for name in ["roster.json", "share-1.json", "share-9.json"] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap()
        );
    }
    let out = reconstruct(&[share(a.path(), 9), share(a.path(), 3)], false);
    assert_eq!(out.status.code(), Some(EXIT_OK));
    assert!(stdout(&out).contains("secret K (decimal): 14307601"));
}

#[test]
fn config_path_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_hsss"))
        .args([
            "deal",
            "--chart",
            s(&data("example-chart.json")),
            "--secret",
            "5",
        ])
        .args(["--out-dir", s(dir.path())])
        .env("HSSS_CONFIG", data("config.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_OK), "{}", stderr(&out));
    assert!(!stderr(&out).contains("NOT FOR PRODUCTION"));
}

#[test]
fn deal_rejections() {
    let dir = tempfile::tempdir().unwrap();
    let out = hsss(&[
        "deal",
        "--config",
        s(&data("nonprime-config.json")),
        "--chart",
        s(&data("example-chart.json")),
        "--secret",
        "1",
        "--out-dir",
        s(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(EXIT_INPUT));
    let reason: serde_json::Value = serde_json::from_str(stderr(&out).trim()).unwrap();
    assert_eq!(reason["error"], "bad-prime");

    let out = hsss(&[
        "deal",
        "--config",
        s(&data("config.json")),
        "--chart",
        s(&data("colliding-chart.json")),
        "--secret",
        "1",
        "--out-dir",
        s(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(EXIT_INPUT));
    let reason: serde_json::Value = serde_json::from_str(stderr(&out).trim()).unwrap();
    assert_eq!(reason["error"], "coordinate-collision");
    let message = reason["message"].as_str().unwrap();
    assert!(message.contains("x = 13"), "{message}");
    assert!(message.contains("login 2") && message.contains("login 4"));
    assert!(!dir.path().join("roster.json").exists());
}

#[test]
fn reconstruct_outcomes_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(deal_example(dir.path()).status.code(), Some(EXIT_OK));
    let d = dir.path();

    let ok = reconstruct(&[share(d, 8), share(d, 1), share(d, 2)], false);
    assert_eq!(ok.status.code(), Some(EXIT_OK));
    let text = stdout(&ok);
    assert!(text.contains("secret K (decimal): 14307601"));
    assert!(text.contains("secret K (binary):  110110100101000100010001"));

    let json = reconstruct(&[share(d, 2), share(d, 8), share(d, 1)], true);
    let report = parse_report(&stdout(&json)).unwrap();
    assert_eq!(report.outcome, "recovered");
    assert_eq!(report.secret.as_deref(), Some("14307601"));
    assert_eq!(
        report.coefficients.unwrap(),
        vec!["429496", "4967295", "94967", "9496729"]
    );

    let forged = reconstruct(
        &[
            share(d, 7),
            data("forged/s11.json"),
            data("forged/s21.json"),
        ],
        false,
    );
    assert_eq!(forged.status.code(), Some(EXIT_AUTHENTICATION));
    assert!(stdout(&forged).contains("ATTACK ATTEMPT"));

    let merged = reconstruct(&[share(d, 1), share(d, 2), data("forged/s72.json")], true);
    assert_eq!(merged.status.code(), Some(EXIT_AUTHENTICATION));
    let report = parse_report(&stdout(&merged)).unwrap();
    assert!(report.secret.is_none());
    assert_eq!(report.diagnostics.len(), 3);

    let low = reconstruct(&[share(d, 1), share(d, 2)], false);
    assert_eq!(low.status.code(), Some(EXIT_UNQUALIFIED));
    assert!(stdout(&low).contains("condition (i)"));

    let four = reconstruct(&[share(d, 1), share(d, 2), share(d, 3), share(d, 4)], false);
    assert_eq!(four.status.code(), Some(EXIT_UNQUALIFIED));
    assert!(stdout(&four).contains("condition (ii)"));
}

#[test]
fn reconstruct_rejects_mixed_schemes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(deal_example(a.path()).status.code(), Some(EXIT_OK));
    let out = hsss(&[
        "deal",
        "--config",
        s(&data("config.json")),
        "--chart",
        s(&data("example-chart.json")),
        "--secret",
        "77",
        "--seed",
        "5",
        "--out-dir",
        s(b.path()),
    ]);
    assert_eq!(out.status.code(), Some(EXIT_OK));
    let mixed = reconstruct(&[share(a.path(), 9), share(b.path(), 1)], false);
    assert_eq!(mixed.status.code(), Some(EXIT_INCONSISTENT));
}

#[test]
fn reconstruct_parse_failure() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{ not json").unwrap();
    let out = reconstruct(&[bad], false);
    assert_eq!(out.status.code(), Some(EXIT_INPUT));
    assert!(stderr(&out).contains("\"parse\""));
}

#[test]
fn analyze_outputs() {
    let out = hsss(&[
        "analyze",
        "--chart",
        s(&data("example-chart.json")),
        "--q",
        "4294967311",
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(EXIT_OK), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["minimal_coalitions"].as_array().unwrap().len(), 38);
    assert_eq!(v["information_rate"], "1");
    assert_eq!(v["average_information_rate"], "27/13");
    assert!(v["bruteforce"]["bits"].as_u64().unwrap() >= 117);

    let text = hsss(&["analyze", "--chart", s(&data("example-chart.json"))]);
    assert!(stdout(&text).contains("minimal qualified coalitions (38)"));
    assert!(stdout(&text).contains("{P(9,3), P(1,1)}"));

    let pair = hsss(&["analyze", "--chart", s(&data("pair-chart.json")), "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&pair)).unwrap();
    assert_eq!(v["minimal_coalitions"], serde_json::json!([[2, 1]]));

    let empty = hsss(&["analyze", "--chart", s(&data("empty-chart.json"))]);
    assert_eq!(empty.status.code(), Some(EXIT_INPUT));

    let limited = hsss(&[
        "analyze",
        "--chart",
        s(&data("example-chart.json")),
        "--limit",
        "5",
    ]);
    assert_eq!(limited.status.code(), Some(EXIT_INPUT));
    assert!(stderr(&limited).contains("enumeration-limit"));
}

#[test]
fn audit_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(deal_example(dir.path()).status.code(), Some(EXIT_OK));
    let chart = data("example-chart.json");

    let genuine = hsss(&[
        "audit",
        "--chart",
        s(&chart),
        "--shares",
        s(&share(dir.path(), 7)),
    ]);
    assert_eq!(genuine.status.code(), Some(EXIT_OK));
    let text = stdout(&genuine);
    assert!(
        text.contains("x = 22 = 1 (mod 21), floor(x/21) = 1 <= 2"),
        "{text}"
    );
    assert!(
        text.contains("x = 43 = 1 (mod 21), floor(x/21) = 2 <= 2"),
        "{text}"
    );

    let forged = hsss(&[
        "audit",
        "--chart",
        s(&chart),
        "--shares",
        s(&data("forged/s21.json")),
    ]);
    assert_eq!(forged.status.code(), Some(EXIT_AUDIT_FAILED));
    assert!(stdout(&forged).contains("x = 49 = 1 (mod 6) but floor(x/6) = 8 > 1"));

    let pair_chart = data("pair-chart.json");
    let absent = hsss(&[
        "audit",
        "--chart",
        s(&pair_chart),
        "--shares",
        s(&share(dir.path(), 9)),
    ]);
    assert_eq!(absent.status.code(), Some(EXIT_AUDIT_FAILED));
    assert!(stdout(&absent).contains("condition (iii): login 9 is not on the roster"));
}
