//! End-to-end runs of the `hrplab` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn hrplab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hrplab"))
        .args(args)
        .env("HRPLAB_NO_COLOR", "1")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = hrplab(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Exit code and the single stderr line.
fn fails(args: &[&str]) -> (i32, String) {
    let out = hrplab(args);
    assert!(!out.status.success(), "{args:?} succeeded");
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.starts_with("error: "), "{err}");
    (out.status.code().unwrap(), err)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn assert_in_order(text: &str, needles: &[&str]) {
    let pos: Vec<usize> = needles
        .iter()
        .map(|n| text.find(n).unwrap_or_else(|| panic!("{n} missing")))
        .collect();
    assert!(
        pos.windows(2).all(|p| p[0] < p[1]),
        "{needles:?} at {pos:?}"
    );
}

fn gen(dir: &Path, extra: &[&str]) -> PathBuf {
    let data = dir.join("data");
    let mut args = vec!["gen", "--out", s(&data)];
    args.extend_from_slice(extra);
    ok(&args);
    data
}

#[test]
fn gen_writes_three_files_reproducibly() {
    let dir = tempfile::tempdir().unwrap();
    let flags = [
        "--assets",
        "12",
        "--sectors",
        "3",
        "--months",
        "60",
        "--seed",
        "42",
    ];
    let data = gen(dir.path(), &flags);
    let mut names: Vec<String> = std::fs::read_dir(&data)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["factors.csv", "returns.csv", "rf.csv"]);
    let before = std::fs::read(data.join("returns.csv")).unwrap();

    let mut args = vec!["gen", "--out", s(&data)];
    args.extend_from_slice(&flags);
    let (code, msg) = fails(&args);
    assert_eq!(code, 1);
    assert!(msg.contains("--force"));

    args.push("--force");
    ok(&args);
    assert_eq!(std::fs::read(data.join("returns.csv")).unwrap(), before);
    let header = String::from_utf8(before).unwrap();
    assert!(header.starts_with("date,A01,A02,"));
    assert_eq!(header.lines().count(), 61);
}

#[test]
fn gen_rejects_zero_sectors() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _) = fails(&["gen", "--sectors", "0", "--out", s(dir.path())]);
    assert_eq!(code, 1);
    assert!(!dir.path().join("returns.csv").exists());
}

#[test]
fn allocate_emits_unit_gross_json() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen(dir.path(), &["--months", "60"]);
    let out = ok(&[
        "allocate",
        "--data",
        s(&data),
        "--method",
        "hrp",
        "--lookback",
        "12",
        "--as-of",
        "2004-12",
        "--sides",
        "momentum",
    ]);
    assert_in_order(
        &out,
        &[
            "\"method\"",
            "\"as_of\"",
            "\"lookback\"",
            "\"assets\"",
            "\"weights\"",
            "\"sides\"",
            "\"gross\"",
            "\"net\"",
        ],
    );
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["method"], "hrp");
    assert_eq!(v["as_of"], "2004-12");
    assert!((v["gross"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    let w: Vec<f64> = serde_json::from_value(v["weights"].clone()).unwrap();
    let sides: Vec<i8> = serde_json::from_value(v["sides"].clone()).unwrap();
    assert_eq!(w.len(), 10);
    assert!(w.iter().zip(&sides).all(|(x, &s)| x.signum() as i8 == s));

    // defaults to the month after the panel
    let v: Value =
        serde_json::from_str(&ok(&["allocate", "--data", s(&data), "--method", "equal"])).unwrap();
    assert_eq!(v["as_of"], "2005-01");
    assert!((v["net"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn allocate_gmv_needs_shrinkage_when_assets_outnumber_months() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen(dir.path(), &["--assets", "12", "--months", "40"]);
    let (code, msg) = fails(&[
        "allocate",
        "--data",
        s(&data),
        "--method",
        "gmv",
        "--lookback",
        "12",
    ]);
    assert_eq!(code, 3);
    assert!(msg.contains("singular"), "{msg}");
    let v: Value = serde_json::from_str(&ok(&[
        "allocate",
        "--data",
        s(&data),
        "--method",
        "gmv",
        "--lookback",
        "12",
        "--shrink",
        "0.2",
    ]))
    .unwrap();
    assert!((v["gross"].as_f64().unwrap() - 1.0).abs() < 1e-10);
}

#[test]
fn sides_file_must_cover_every_asset() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen(dir.path(), &["--assets", "3", "--months", "24"]);
    let sides = dir.path().join("sides.csv");
    std::fs::write(&sides, "asset,side\nA1,1\nA2,-1\n").unwrap();
    let rule = format!("file:{}", s(&sides));
    let (code, msg) = fails(&["allocate", "--data", s(&data), "--sides", &rule]);
    assert_eq!(code, 1);
    assert!(msg.contains("A3"), "{msg}");

    std::fs::write(&sides, "asset,side\nA1,1\nA2,-1\nA3,1\n").unwrap();
    let v: Value =
        serde_json::from_str(&ok(&["allocate", "--data", s(&data), "--sides", &rule])).unwrap();
    assert_eq!(v["sides"], serde_json::json!([1, -1, 1]));
}

#[test]
fn backtest_report_and_table() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen(dir.path(), &["--months", "60"]);
    let report = dir.path().join("report.json");
    ok(&[
        "backtest",
        "--data",
        s(&data),
        "--methods",
        "hrp,gmv,equal",
        "--lookback",
        "12",
        "--hold",
        "3",
        "--out",
        s(&report),
    ]);
    let text = std::fs::read_to_string(&report).unwrap();
    assert_in_order(
        &text,
        &[
            "\"config\"",
            "\"market\"",
            "\"strategies\"",
            "\"hrp\": {",
            "\"gmv\": {",
            "\"equal_weight\": {",
        ],
    );
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["strategies"].as_object().unwrap().len(), 3);
    assert_eq!(
        v["strategies"]["hrp"]["rebalances"]
            .as_array()
            .unwrap()
            .len(),
        16
    );
    assert!(v["strategies"]["hrp"]["rebalances"][0]["turnover"].is_null());

    let csv = ok(&["report", "--in", s(&report), "--format", "csv"]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "method,subset,mean_excess,std_dev,sharpe,avg_turnover,n_months"
    );
    assert_eq!(lines.len(), 7);
    assert!(lines[5].starts_with("equal_weight,all,"));

    let table = ok(&["report", "--in", s(&report)]);
    assert!(!table.contains('\x1b'));
    assert!(table.starts_with("method"));
    let with_market = ok(&["report", "--in", s(&report), "--format", "csv", "--market"]);
    assert!(with_market.contains("\nmarket,all,"));

    let rows: Value =
        serde_json::from_str(&ok(&["report", "--in", s(&report), "--format", "json"])).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 6);
}

#[test]
fn downturns_only_drops_full_sample_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen(dir.path(), &["--months", "60"]);
    let out = ok(&[
        "backtest",
        "--data",
        s(&data),
        "--methods",
        "hrp",
        "--downturns-only",
        "--jobs",
        "1",
    ]);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!(v["strategies"]["hrp"]["metrics"]["all"].is_null());
    assert!(
        v["strategies"]["hrp"]["metrics"]["downturn"]["n_months"]
            .as_u64()
            .unwrap()
            > 0
    );
    assert_eq!(v["config"]["downturns_only"], true);
}

#[test]
fn backtest_lookback_longer_than_panel() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen(dir.path(), &["--months", "60"]);
    let (code, msg) = fails(&["backtest", "--data", s(&data), "--lookback", "120"]);
    assert_eq!(code, 2);
    assert!(msg.contains("look-back"), "{msg}");
}

#[test]
fn config_file_mirrors_flags() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen(dir.path(), &["--months", "60"]);
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        format!(
            "data={}\nmethods=hrp,equal\nlookback=24\nhold=6\n",
            s(&data)
        ),
    )
    .unwrap();
    let a = ok(&["backtest", "--config", s(&cfg)]);
    let b = ok(&[
        "backtest",
        "--data",
        s(&data),
        "--methods",
        "hrp,equal",
        "--lookback",
        "24",
        "--hold",
        "6",
    ]);
    assert_eq!(a, b);
    let c: Value =
        serde_json::from_str(&ok(&["backtest", "--config", s(&cfg), "--hold", "3"])).unwrap();
    assert_eq!(c["config"]["hold_months"], 3);
    assert_eq!(c["config"]["lookback_months"], 24);
}

#[test]
fn dendrogram_and_heatmaps() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen(dir.path(), &["--months", "60"]);
    let svg = dir.path().join("tree.svg");
    ok(&[
        "dendrogram",
        "--data",
        s(&data),
        "--as-of",
        "2004-12",
        "--svg",
        s(&svg),
    ]);
    let tree_json = dir.path().join("tree.json");
    let tree: Value = serde_json::from_str(&std::fs::read_to_string(&tree_json).unwrap()).unwrap();
    assert_eq!(tree["n_leaves"], 10);
    assert_eq!(tree["merges"].as_array().unwrap().len(), 9);
    let svg_text = std::fs::read_to_string(&svg).unwrap();
    assert!(svg_text.contains("<svg"));
    assert_eq!(svg_text.matches("<path").count(), 9);

    let (code, msg) = fails(&[
        "heatmap",
        "--order",
        "seriated",
        "--svg",
        s(&dir.path().join("h.svg")),
    ]);
    assert_eq!(code, 1);
    assert!(msg.contains("clustering inputs"), "{msg}");

    let h1 = dir.path().join("original.svg");
    let h2 = dir.path().join("seriated.svg");
    ok(&[
        "heatmap",
        "--data",
        s(&data),
        "--as-of",
        "2004-12",
        "--svg",
        s(&h1),
    ]);
    ok(&[
        "heatmap",
        "--data",
        s(&data),
        "--as-of",
        "2004-12",
        "--order",
        "seriated",
        "--svg",
        s(&h2),
    ]);
    let (a, b) = (
        std::fs::read_to_string(&h1).unwrap(),
        std::fs::read_to_string(&h2).unwrap(),
    );
    assert_eq!(a.matches("<rect").count(), 101);
    let mut fa: Vec<&str> = a
        .match_indices("fill=\"#")
        .map(|(i, _)| &a[i..i + 13])
        .collect();
    let mut fb: Vec<&str> = b
        .match_indices("fill=\"#")
        .map(|(i, _)| &b[i..i + 13])
        .collect();
    fa.sort();
    fb.sort();
    assert_eq!(fa, fb);
}

#[test]
fn heatmap_from_matrix_and_tree() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.csv");
    std::fs::write(&m, "asset,X,Y,Z\nX,1,0.1,0.9\nY,0.1,1,0.2\nZ,0.9,0.2,1\n").unwrap();
    let tree = dir.path().join("t.json");
    std::fs::write(
        &tree,
        r#"{"n_leaves":3,"labels":["X","Y","Z"],"merges":[[0,2,0.2],[1,3,0.6]]}"#,
    )
    .unwrap();
    let out = dir.path().join("h.svg");
    let (code, _) = fails(&[
        "heatmap",
        "--matrix",
        s(&m),
        "--order",
        "seriated",
        "--svg",
        s(&out),
    ]);
    assert_eq!(code, 1);
    ok(&[
        "heatmap",
        "--matrix",
        s(&m),
        "--tree",
        s(&tree),
        "--order",
        "seriated",
        "--svg",
        s(&out),
    ]);
    let svg = std::fs::read_to_string(&out).unwrap();
    // root's left child is Y, then the (X, Z) pair
    let titles: Vec<&str> = svg
        .match_indices("<title>")
        .map(|(i, _)| &svg[i + 7..i + 12])
        .collect();
    assert_eq!(&titles[..3], ["Y / Y", "Y / X", "Y / Z"]);
}

#[test]
fn missing_input_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let (code, msg) = fails(&["backtest", "--data", s(&dir.path().join("nowhere"))]);
    assert_eq!(code, 2);
    assert!(msg.contains("returns.csv"), "{msg}");
    let (code, _) = fails(&[
        "report",
        "--in",
        s(&dir.path().join("r.json")),
        "--format",
        "xml",
    ]);
    assert_eq!(code, 1);
}

#[test]
fn help_exits_zero() {
    let out = hrplab(&["--help"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("backtest"));
}
