use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use mfleaders::geometry::{rasterize_von_koch, Fill};
use mfleaders::io::{write_csv, write_pbm};
use mfleaders::synth::fbm_1d;
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mfleaders"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn without_timestamp(mut v: Value) -> Value {
    v.as_object_mut()
        .unwrap()
        .remove("timestamp")
        .expect("timestamp field");
    v
}

fn fbm_csv(dir: &Path, name: &str, n: usize, seed: u64) -> String {
    let path = dir.join(name);
    write_csv(&path, &fbm_1d(0.7, n, seed, 0).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn synth_piped_into_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let synth = run(&["synth", "fbm", "--H", "0.7", "--n", "16384", "--seed", "3"]);
    assert_eq!(code(&synth), 0);
    let mut analyze = bin()
        .args(["analyze", "--out-dir", dir.path().to_str().unwrap()])
        .stdin(Stdio::piped())
        .spawn()
        .unwrap();
    analyze
        .stdin
        .take()
        .unwrap()
        .write_all(&synth.stdout)
        .unwrap();
    assert!(analyze.wait().unwrap().success());
    let doc = json(&dir.path().join("result.json"));
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["status"], "ok");
    let r = &doc["result"];
    let c = r["summary"]["cumulants"].as_array().unwrap();
    assert!((c[0].as_f64().unwrap() - 0.7).abs() < 0.08, "{c:?}");
    assert!(c[1].as_f64().unwrap().abs() < 0.03, "{c:?}");
    assert_eq!(r["memberships"]["locally_bounded"], "yes");
    for f in ["zeta.csv", "spectrum.csv", "cumulants.csv"] {
        let text = std::fs::read_to_string(dir.path().join(f)).unwrap();
        assert!(text.lines().count() > 2, "{f}");
    }
    let report = run(&["report", dir.path().join("result.json").to_str().unwrap()]);
    assert_eq!(code(&report), 0);
    assert!(String::from_utf8_lossy(&report.stdout).contains("locally_bounded: yes"));
}

#[test]
fn analysis_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let input = fbm_csv(dir.path(), "x.csv", 4096, 1);
    let outs: Vec<_> = ["a", "b"]
        .iter()
        .map(|name| {
            let out = dir.path().join(name);
            let o = run(&[
                "bootstrap",
                "--input",
                &input,
                "--out-dir",
                out.to_str().unwrap(),
                "--resamples",
                "49",
                "--max-level",
                "7",
                "--seed",
                "5",
            ]);
            assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
            out
        })
        .collect();
    let a = without_timestamp(json(&outs[0].join("result.json")));
    let b = without_timestamp(json(&outs[1].join("result.json")));
    assert_eq!(a, b);
    assert!(a["result"]["estimate"]["intervals"].is_object());
    for f in ["zeta.csv", "spectrum.csv", "cumulants.csv"] {
        assert_eq!(
            std::fs::read(outs[0].join(f)).unwrap(),
            std::fs::read(outs[1].join(f)).unwrap(),
            "{f}"
        );
    }
    let cumulants = std::fs::read_to_string(outs[0].join("cumulants.csv")).unwrap();
    let first = cumulants.lines().nth(1).unwrap();
    assert!(!first.ends_with(",,"), "interval columns filled: {first}");
}

#[test]
fn empty_input_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("empty.csv");
    std::fs::write(&input, "").unwrap();
    let out = dir.path().join("out");
    let o = run(&[
        "analyze",
        "--input",
        input.to_str().unwrap(),
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 3);
    assert!(!out.exists());
}

#[test]
fn exit_codes_follow_error_classes() {
    let dir = tempfile::tempdir().unwrap();
    let input = fbm_csv(dir.path(), "x.csv", 1024, 0);
    let out = dir.path().join("out");
    let o = out.to_str().unwrap();
    assert_eq!(
        code(&run(&[
            "analyze",
            "--input",
            &input,
            "--out-dir",
            o,
            "--fracint",
            "maybe"
        ])),
        2
    );
    assert_eq!(
        code(&run(&[
            "analyze",
            "--input",
            &input,
            "--out-dir",
            o,
            "--j1",
            "0"
        ])),
        2
    );
    assert_eq!(code(&run(&["analyze", "--no-such-flag"])), 2);
    assert_eq!(code(&run(&["synth", "fbm", "--param", "colour=red"])), 2);
    assert_eq!(
        code(&run(&["analyze", "--input", "missing.csv", "--out-dir", o])),
        3
    );
    let constant = dir.path().join("c.csv");
    write_csv(&constant, &[1.0; 1024]).unwrap();
    assert_eq!(
        code(&run(&[
            "analyze",
            "--input",
            constant.to_str().unwrap(),
            "--out-dir",
            o
        ])),
        4
    );
    assert!(!out.exists());
}

#[test]
fn late_failure_is_marked_partial() {
    let dir = tempfile::tempdir().unwrap();
    let input = fbm_csv(dir.path(), "x.csv", 4096, 2);
    let out = dir.path().join("out");
    let o = run(&[
        "analyze",
        "--input",
        &input,
        "--out-dir",
        out.to_str().unwrap(),
        "--p-grid",
        "0.5,1,1.5",
    ]);
    assert_eq!(code(&o), 0);
    let doc = json(&out.join("result.json"));
    assert_eq!(doc["status"], "partial");
    assert_eq!(doc["result"]["failures"][0]["stage"], "memberships");
    assert!(doc["result"]["memberships"].is_null());
    assert_eq!(
        std::fs::read_to_string(out.join("zeta.csv"))
            .unwrap()
            .lines()
            .count(),
        4
    );
}

#[test]
fn config_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let input = fbm_csv(dir.path(), "x.csv", 4096, 4);
    let saved = dir.path().join("saved.toml");
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let o = run(&[
        "analyze",
        "--input",
        &input,
        "--out-dir",
        a.to_str().unwrap(),
        "--j1",
        "2",
        "--p-grid",
        "-2:0.5:4",
        "--fracint",
        "off",
        "--weighting",
        "uniform",
        "--save-config",
        saved.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let o = run(&[
        "analyze",
        "--input",
        &input,
        "--out-dir",
        b.to_str().unwrap(),
        "--config",
        saved.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let ja = without_timestamp(json(&a.join("result.json")));
    assert_eq!(ja, without_timestamp(json(&b.join("result.json"))));
    assert_eq!(ja["config"]["j1"], 2);
    assert_eq!(ja["config"]["p_grid"].as_array().unwrap().len(), 13);

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "j1 = 2\nunknown_key = 1\n").unwrap();
    let o = run(&[
        "analyze",
        "--input",
        &input,
        "--config",
        bad.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn windows_match_extracted_files() {
    let dir = tempfile::tempdir().unwrap();
    let x = fbm_1d(0.7, 8192, 6, 0).unwrap();
    let input = dir.path().join("x.csv");
    write_csv(&input, &x[..5000]).unwrap();
    let out = dir.path().join("w");
    let o = run(&[
        "analyze",
        "--input",
        input.to_str().unwrap(),
        "--out-dir",
        out.to_str().unwrap(),
        "--window-length",
        "2048",
        "--hop",
        "1500",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc = json(&out.join("result.json"));
    let windows = doc["windows"].as_array().unwrap();
    assert_eq!(windows.len(), 2);
    let second = &windows[1];
    assert_eq!(second["start"], 1500);

    let piece = dir.path().join("piece.csv");
    write_csv(&piece, &x[1500..3548]).unwrap();
    let single = dir.path().join("s");
    let o = run(&[
        "analyze",
        "--input",
        piece.to_str().unwrap(),
        "--out-dir",
        single.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(
        json(&single.join("result.json"))["result"],
        second["result"]
    );

    let zeta = std::fs::read_to_string(out.join("zeta.csv")).unwrap();
    assert!(zeta.starts_with("start,p,"));
    assert!(zeta.lines().any(|l| l.starts_with("1500,")));
}

#[test]
fn von_koch_image() {
    let dir = tempfile::tempdir().unwrap();
    let boundary = dir.path().join("boundary.pbm");
    write_pbm(
        &boundary,
        &rasterize_von_koch(7, 10, Fill::Boundary).unwrap(),
    )
    .unwrap();
    let out = dir.path().join("box");
    let o = run(&[
        "boxdim",
        "--input",
        boundary.to_str().unwrap(),
        "--j1",
        "1",
        "--j2",
        "6",
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let d = json(&out.join("result.json"))["dimension"]
        .as_f64()
        .unwrap();
    assert!((d - 4f64.ln() / 3f64.ln()).abs() < 0.05, "{d}");

    let filled = dir.path().join("filled.pbm");
    write_pbm(&filled, &rasterize_von_koch(7, 10, Fill::Filled).unwrap()).unwrap();
    let out = dir.path().join("analysis");
    let o = run(&[
        "analyze",
        "--input",
        filled.to_str().unwrap(),
        "--out-dir",
        out.to_str().unwrap(),
        "--j1",
        "2",
        "--j2",
        "8",
        "--fracint",
        "off",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = &json(&out.join("result.json"))["result"];
    assert_eq!(r["memberships"]["in_bv"], "no");
    let dim = r["summary"]["d_minus_eta1"].as_f64().unwrap();
    assert!((dim - 4f64.ln() / 3f64.ln()).abs() < 0.1, "{dim}");
}

#[test]
fn synth_writes_truth_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.f64");
    let o = run(&[
        "synth",
        "cascade",
        "--param",
        "depth=10",
        "--param",
        "multiplier=binomial",
        "--param",
        "weights=0.7,0.3",
        "--seed",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::metadata(&out).unwrap().len(), 8 * 1024);
    let truth = json(&dir.path().join("c.f64.truth.json"));
    assert_eq!(truth["truth"]["model"], "cascade");
    assert_eq!(truth["seed"], 2);
    let zeta2 = truth["zeta"]
        .as_array()
        .unwrap()
        .iter()
        .find(|pz| pz[0] == 2.0)
        .unwrap()[1]
        .as_f64()
        .unwrap();
    // Multipliers are w = 2 p_i with i uniform.
    assert!((zeta2 + ((1.96f64 + 0.36) / 2.0).log2()).abs() < 1e-12);

    let image = dir.path().join("f.pgm");
    assert_eq!(
        code(&run(&[
            "synth",
            "fbm2d",
            "--n",
            "64",
            "--out",
            image.to_str().unwrap()
        ])),
        0
    );
    let header = std::fs::read(&image).unwrap();
    assert!(header.starts_with(b"P5\n64 64\n65535\n"));
    assert_eq!(code(&run(&["synth", "fbm2d", "--n", "64"])), 2);
}
