use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn ctxscore(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ctxscore"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn fx(name: &str) -> String {
    fixtures().join(name).display().to_string()
}

fn score(out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "score".to_string(),
        "--items".into(),
        fx("items.csv"),
        "--images".into(),
        fx("images.ctxm"),
        "--descriptions".into(),
        fx("descriptions.ctxm"),
        "--out".into(),
        out.display().to_string(),
    ];
    args.extend(extra.iter().map(|s| s.to_string()));
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    ctxscore(&refs)
}

#[test]
fn score_without_optional_inputs_leaves_columns_empty() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("scores.csv");
    let o = score(&out, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("description_id,clipscore,contextual_clipscore,contextual_clipscore_normalized,spurts")
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 8);
    assert!(rows.iter().all(|r| r.ends_with(",,,")));
}

#[test]
fn score_with_single_context_mode() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("scores.csv");
    let ctx = fx("contexts.ctxm");
    let o = score(&out, &["--contexts", &ctx, "--context-mode", "normalized", "--scale", "2.5"]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "d0");
    assert!((row[1].parse::<f64>().unwrap() - 0.5).abs() < 1e-6);
    assert_eq!(row[2], "");
    assert!(!row[3].is_empty());
}

#[test]
fn missing_embedding_fails_with_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let o = ctxscore(&[
        "score",
        "--items",
        &fx("items.csv"),
        "--images",
        &fx("descriptions.ctxm"),
        "--descriptions",
        &fx("descriptions.ctxm"),
        "--out",
        &dir.path().join("s.csv").display().to_string(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("missing image embedding for `img0`"), "{err}");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(ctxscore(&[]).status.code(), Some(2));
    assert_eq!(ctxscore(&["score"]).status.code(), Some(2));
    assert_eq!(
        ctxscore(&["analyze", "--scores", "a", "--ratings", "b", "--items", "c", "--groups", "martians"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn validate_reports_per_file() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad_ratings.csv");
    std::fs::write(
        &bad,
        "description_id,rater_id,group,dimension,value\nd0,r1,blv,overall,0\n",
    )
    .unwrap();
    let cut = dir.path().join("cut.ctxm");
    let bytes = std::fs::read(fixtures().join("images.ctxm")).unwrap();
    std::fs::write(&cut, &bytes[..bytes.len() - 1]).unwrap();

    let o = ctxscore(&["validate", &fx("images.ctxm"), &fx("ratings.csv"), "--items", &fx("items.csv")]);
    assert!(o.status.success());
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(out.contains("images.ctxm: ok"), "{out}");
    assert!(out.contains("ratings.csv: ok"), "{out}");

    let o = ctxscore(&["validate", &bad.display().to_string(), &cut.display().to_string()]);
    assert_eq!(o.status.code(), Some(1));
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(out.contains("row 2: RangeError"), "{out}");
    assert!(out.contains(&format!("TruncatedPayload at byte {}", bytes.len() - 1)), "{out}");
}

#[test]
fn analyze_writes_report_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    let scores = dir.path().join("scores.csv");
    assert!(score(&scores, &[]).status.success());
    let out_dir = dir.path().join("report");
    let o = ctxscore(&[
        "analyze",
        "--scores",
        &scores.display().to_string(),
        "--ratings",
        &fx("ratings.csv"),
        "--items",
        &fx("items.csv"),
        "--groups",
        "blv,sighted_no_img",
        "--dimensions",
        "overall",
        "--emit-svg",
        "--out-dir",
        &out_dir.display().to_string(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["report_version"], 1);
    assert_eq!(report["provenance"]["inputs"]["scores"]["file_name"], "scores.csv");
    let cell = &report["correlations"]["clipscore"]["blv"]["overall"];
    assert_eq!(cell["stars"], "***");
    assert!(report["correlations"]["clipscore"]["blv"].get("fit").is_none());
    assert!(out_dir.join("report.txt").exists());
    assert!(out_dir.join("plots/clipscore__blv__overall.csv").exists());
    assert!(out_dir.join("plots/clipscore__blv__overall.svg").exists());
}

#[test]
fn stopwords_to_stdout() {
    let o = ctxscore(&["stopwords"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().any(|l| l == "the"));
    assert_eq!(text.lines().count(), 179);
}
