use std::path::Path;
use std::process::{Command, Output};

use sncpa_sim::dgp::{gen_dgp1, Dgp1Config};

fn sncpa(args: &[&str], cache: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sncpa"))
        .args(args)
        .env("SNCPA_CACHE_DIR", cache)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const QUICK_CV: [&str; 4] = ["--cv-steps", "400", "--cv-reps", "400"];

#[test]
fn hand_fixture_rejects_against_published_value() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("d.csv");
    std::fs::write(&f, "loss_diff\n1\n2\n3\n").unwrap();
    let o = sncpa(&["test", f.to_str().unwrap(), "--stat", "q1", "--tau", "2"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("36.0000"), "{out}");
    assert!(out.contains("3.0710"), "{out}");
    assert!(out.contains(" reject"), "{out}");
    assert!(out.contains("range_ratio-q1-null-published"), "{out}");
}

#[test]
fn constant_series_is_degenerate() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("c.csv");
    std::fs::write(&f, "loss_diff\n0.5\n0.5\n0.5\n0.5\n0.5\n").unwrap();
    let o = sncpa(&["test", f.to_str().unwrap(), "--stat", "q1"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("DegenerateRange"), "{}", stderr(&o));
}

#[test]
fn usage_and_input_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("d.csv");
    std::fs::write(&f, "loss_diff,x\n1,2\n,3\n3,4\n").unwrap();
    let p = f.to_str().unwrap();
    let o = sncpa(&["test", p, "--h-cols", "nope"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unknown column 'nope'"));
    let o = sncpa(&["test", p], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains(":3: missing value"), "{}", stderr(&o));
    let o = sncpa(&["test", "/nonexistent/file.csv"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let o = sncpa(&["replicate", "--table", "dgp9-size"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unknown table"));
}

#[test]
fn all_statistics_on_a_simulated_draw() {
    let dir = tempfile::tempdir().unwrap();
    let s = gen_dgp1(&Dgp1Config::new(0.5, 0.0, 2, 200), 8).unwrap();
    let mut text = String::from("loss_diff,x\n");
    for (l, x) in s.loss_diff.iter().zip(&s.predictor) {
        text.push_str(&format!("{l},{x}\n"));
    }
    let f = dir.path().join("dgp1.csv");
    std::fs::write(&f, text).unwrap();
    let json = dir.path().join("out.json");
    let mut args = vec!["test", f.to_str().unwrap(), "--h-cols", "x", "--intercept", "--tau", "2", "--stat", "all"];
    args.extend(["--json", json.to_str().unwrap()]);
    args.extend(QUICK_CV);
    let o = sncpa(&args, dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    for label in ["Q2", "Q1", "T_SN", "T_GW", "T_DM"] {
        assert!(out.lines().any(|l| l.starts_with(label)), "{label} missing in\n{out}");
    }
    let parsed: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(parsed.as_array().unwrap().len(), 5);
    // The simulated critical value was persisted to the cache directory.
    assert!(std::fs::read_dir(dir.path()).unwrap().any(|e| e.unwrap().file_name().to_string_lossy().starts_with("shao_scalar")));
}

#[test]
fn critvals_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        let o = sncpa(
            &["critvals", "--family", "matrix-cusum-form", "--q", "2", "--steps", "300", "--reps", "100", "--seed", "5", "--out", out.to_str().unwrap()],
            dir.path(),
        );
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        assert!(stderr(&o).contains("quick table"));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let t = sncpa_sim::CriticalValueTable::read(&a).unwrap();
    assert_eq!((t.steps, t.reps, t.seed), (300, 100, 5));
    let o = sncpa(&["critvals", "--family", "range-ratio", "--q", "3"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn replicate_small_run_is_indicative() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rep");
    let mut args = vec!["replicate", "--table", "dgp2-size-tau2", "--reps", "50", "--seed", "3", "--out", out.to_str().unwrap()];
    args.extend(QUICK_CV);
    let o = sncpa(&args, dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("indicative only"));
    let cmp = std::fs::read_to_string(out.join("dgp2-size-tau2-comparison.csv")).unwrap();
    assert!(cmp.starts_with("param,n,tau,statistic,level,ours,paper,abs_diff,tolerance,pass\n"));
    assert_eq!(cmp.lines().count(), 1 + 24 * 5 * 3);
    assert!(out.join("dgp2-size-tau2.csv").exists());
}

#[test]
fn plot_power_writes_svg_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("power.svg");
    let mut args = vec!["plot-power", "--dgp", "dgp1", "--param", "0.5", "--reps", "300", "--n", "50,400", "--out", svg.to_str().unwrap()];
    args.extend(QUICK_CV);
    let o = sncpa(&args, dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&svg).unwrap();
    let doc = roxmltree::Document::parse(&text).expect("well-formed SVG");
    let lines: Vec<_> = doc.descendants().filter(|n| n.has_tag_name("polyline")).collect();
    assert_eq!(lines.len(), 5 * 2);
    assert_eq!(lines.iter().filter(|n| n.attribute("stroke-dasharray").is_some()).count(), 5);

    let csv = std::fs::read_to_string(svg.with_extension("csv")).unwrap();
    let mut rows = csv.lines();
    assert_eq!(rows.next(), Some("statistic,tau,n,power"));
    let q2: Vec<f64> = rows
        .filter(|l| l.starts_with("Q2,2,"))
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(q2.len(), 2);
    assert!(q2[1] > q2[0], "{q2:?}");
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let run = |t: &str| {
        let o = sncpa(&["--threads", t, "critvals", "--family", "shao-scalar", "--steps", "200", "--reps", "200", "--seed", "9"], dir.path());
        assert_eq!(o.status.code(), Some(0));
        o.stdout
    };
    assert_eq!(run("1"), run("3"));
}
