use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn metasurf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_metasurf"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_string_lossy().into_owned()
}

fn gen(dir: &TempDir, name: &str, count: &str, seed: &str) -> String {
    let out = p(dir, name);
    let o = metasurf(&["gen", "--count", count, "--seed", seed, "--out", &out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

fn train_one_epoch(dir: &TempDir, dataset: &str) -> (String, String) {
    let model = p(dir, "model.bin");
    let report = p(dir, "report.csv");
    let o = metasurf(&[
        "train", "--dataset", dataset, "--epochs", "1", "--model-out", &model, "--report-out", &report,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    (model, report)
}

fn entries(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names
}

#[test]
fn gen_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = gen(&dir, "a.jsonl", "25", "7");
    let b = gen(&dir, "b.jsonl", "25", "7");
    let c = gen(&dir, "c.jsonl", "25", "8");
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());
    assert_eq!(fs::read_to_string(&a).unwrap().lines().count(), 26);
}

#[test]
fn gen_rejects_zero_count_without_output() {
    let dir = TempDir::new().unwrap();
    let o = metasurf(&["gen", "--count", "0", "--out", &p(&dir, "x.jsonl")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(entries(dir.path()).is_empty());
}

#[test]
fn train_writes_model_and_report() {
    let dir = TempDir::new().unwrap();
    let data = gen(&dir, "d.jsonl", "20", "1");
    let (model, report) = train_one_epoch(&dir, &data);
    let csv = fs::read_to_string(report).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "epoch,train_mse,test_mse,per_bit_acc");
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("1,"));
    assert_eq!(&fs::read(model).unwrap()[..4], b"MCNN");
}

#[test]
fn train_rejects_bad_split_without_output() {
    let dir = TempDir::new().unwrap();
    let data = gen(&dir, "d.jsonl", "20", "1");
    let o = metasurf(&[
        "train", "--dataset", &data, "--split", "1.5", "--model-out", &p(&dir, "m.bin"), "--report-out",
        &p(&dir, "r.csv"),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(entries(dir.path()), ["d.jsonl"]);
}

#[test]
fn oracle_stub_scores_perfectly() {
    let dir = TempDir::new().unwrap();
    let data = gen(&dir, "d.jsonl", "30", "3");
    let o = metasurf(&["eval", "--oracle-stub", "--dataset", &data]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("per_bit=1.000000"), "{text}");
    assert!(text.contains("exact_cell=1.000000"), "{text}");
}

#[test]
fn eval_reports_model_metrics() {
    let dir = TempDir::new().unwrap();
    let data = gen(&dir, "d.jsonl", "20", "1");
    let (model, _) = train_one_epoch(&dir, &data);
    let o = metasurf(&["eval", "--model", &model, "--dataset", &data]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("per_bit="));
}

#[test]
fn eval_rejects_mismatched_width() {
    let dir = TempDir::new().unwrap();
    let data = gen(&dir, "d.jsonl", "4", "1");
    let text = fs::read_to_string(&data).unwrap();
    let mut lines = text.lines();
    let mut edited = vec![lines.next().unwrap().to_owned()];
    for line in lines {
        let mut v: serde_json::Value = serde_json::from_str(line).unwrap();
        v["input"].as_array_mut().unwrap().pop();
        edited.push(v.to_string());
    }
    let bad = p(&dir, "bad.jsonl");
    fs::write(&bad, edited.join("\n") + "\n").unwrap();
    let o = metasurf(&["eval", "--oracle-stub", "--dataset", &bad]);
    assert_ne!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("23"));
}

#[test]
fn infer_writes_every_artifact() {
    let dir = TempDir::new().unwrap();
    let data = gen(&dir, "d.jsonl", "20", "1");
    let (model, _) = train_one_epoch(&dir, &data);
    let target = p(&dir, "target.json");
    fs::write(
        &target,
        r#"{"te":[{"freq_ghz":24.5,"depth_db":-34.5,"bandwidth_ghz":0.5}],
            "tm":[{"freq_ghz":10.0,"depth_db":-18.5,"bandwidth_ghz":0.2},
                  {"freq_ghz":14.5,"depth_db":-20.0,"bandwidth_ghz":0.4},
                  {"freq_ghz":33.0,"depth_db":-14.0,"bandwidth_ghz":0.3}]}"#,
    )
    .unwrap();
    let prefix = p(&dir, "design");
    let o = metasurf(&["infer", "--model", &model, "--target", &target, "--out-prefix", &prefix]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for suffix in [".code.txt", ".ascii.txt", ".pgm", ".spectra.csv", ".verify.txt"] {
        assert!(Path::new(&format!("{prefix}{suffix}")).is_file(), "missing {suffix}");
    }
    let pgm = fs::read(format!("{prefix}.pgm")).unwrap();
    assert_eq!(pgm.len(), b"P5 32 32 255\n".len() + 32 * 32);
    let csv = fs::read_to_string(format!("{prefix}.spectra.csv")).unwrap();
    assert_eq!(csv.lines().count(), 822);
    assert!(stdout(&o).contains("overall_fraction="));
}

#[test]
fn infer_rejects_malformed_target_without_output() {
    let dir = TempDir::new().unwrap();
    let data = gen(&dir, "d.jsonl", "20", "1");
    let (model, _) = train_one_epoch(&dir, &data);
    let target = p(&dir, "target.json");
    fs::write(&target, r#"{"te":[{"freq_ghz":50.0,"depth_db":-20.0,"bandwidth_ghz":0.5}],"tm":[]}"#).unwrap();
    let before = entries(dir.path());
    let o = metasurf(&["infer", "--model", &model, "--target", &target, "--out-prefix", &p(&dir, "design")]);
    assert_ne!(o.status.code(), Some(0));
    assert_eq!(entries(dir.path()), before);
}

#[test]
fn forward_bits_and_tiles_agree() {
    let zeros = "0".repeat(48);
    let by_bits = metasurf(&["forward", "--bits", &zeros]);
    let by_tiles = metasurf(&["forward", "--tiles", "0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0"]);
    assert!(by_bits.status.success());
    assert_eq!(stdout(&by_bits), stdout(&by_tiles));
    assert!(stdout(&by_bits).contains("te_notch freq_ghz=6.0000 depth_db=-40.0000"));
}

#[test]
fn forward_writes_csv() {
    let dir = TempDir::new().unwrap();
    let out = p(&dir, "s.csv");
    let o = metasurf(&["forward", "--tiles", "7,6,5,4,3,2,1,0,0,1,2,3,4,5,6,7", "--out", &out]);
    assert!(o.status.success());
    let csv = fs::read_to_string(out).unwrap();
    assert!(csv.starts_with("freq_ghz,te_db,tm_db\n4.000000,"));
}

#[test]
fn forward_rejects_bad_input() {
    for args in [
        vec!["forward", "--bits", &"0".repeat(47)],
        vec!["forward", "--bits", "2"],
        vec!["forward", "--tiles", "0,1,2"],
        vec!["forward", "--tiles", "0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,8"],
    ] {
        let o = metasurf(&args.iter().map(|s| s.as_ref()).collect::<Vec<&str>>());
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
}
