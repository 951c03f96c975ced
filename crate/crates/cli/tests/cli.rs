use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn kglab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kglab")).args(args).env_remove("KGLAB_OUT").output().unwrap()
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn campaign(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("campaign.toml");
    fs::write(&path, body).unwrap();
    path
}

fn json_reports(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".json") && n != "metadata.json")
        .collect();
    names.sort();
    names
}

#[test]
fn quick_campaign_writes_reports() {
    let out = tempfile::tempdir().unwrap();
    let cfg = configs().join("quick.toml");
    let res = kglab(&["run", "--config", cfg.to_str().unwrap(), "--out", out.path().to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let reports = json_reports(out.path());
    assert_eq!(reports, ["agmon.json", "kernel-identity.json", "spectral-identity.json"]);
    let anchors = kglab::checks::anchor_registry();
    for name in &reports {
        let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.path().join(name)).unwrap()).unwrap();
        for key in ["claim", "paper_anchor", "measured", "expected", "tolerance", "pass"] {
            assert!(v.get(key).is_some(), "{name} lacks {key}");
        }
        assert!(anchors.contains(&v["paper_anchor"].as_str().unwrap()));
        assert_eq!(v["schema_version"], 1);
        for table in v["tables"].as_array().unwrap() {
            assert!(out.path().join(table.as_str().unwrap()).exists());
        }
    }
}

#[test]
fn reports_are_deterministic_across_job_counts() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = campaign(a.path(), "name = \"det\"\nchecks = [\"spectral-identity\", \"kernel-identity\"]\n[params.kernel-identity]\nx_samples = 200\n");
    for (dir, jobs) in [(&a, "1"), (&b, "2")] {
        let res = kglab(&["run", cfg.to_str().unwrap(), "--out", dir.path().join("out").to_str().unwrap(), "--jobs", jobs, "--seed", "5"]);
        assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    }
    let (da, db) = (a.path().join("out"), b.path().join("out"));
    let names = json_reports(&da);
    assert_eq!(names.len(), 2);
    for name in names {
        assert_eq!(fs::read(da.join(&name)).unwrap(), fs::read(db.join(&name)).unwrap(), "{name} differs");
    }
}

#[test]
fn empty_campaign_succeeds_with_no_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = campaign(dir.path(), "name = \"empty\"\nchecks = []\n");
    let out = dir.path().join("out");
    let res = kglab(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(res.status.success());
    assert!(json_reports(&out).is_empty());
}

#[test]
fn misspelled_check_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = campaign(dir.path(), "name = \"typo\"\nchecks = [\"agmon\", \"strichartzz\"]\n");
    let res = kglab(&["run", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("strichartzz"));
}

#[test]
fn unknown_parameter_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = campaign(dir.path(), "name = \"typo\"\nchecks = [\"agmon\"]\n[params.agmon]\nradiuss = 3.0\n");
    let res = kglab(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("radiuss"));
}

#[test]
fn failing_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = campaign(dir.path(), "name = \"strict\"\nchecks = [\"spectral-identity\"]\n[params.spectral-identity]\ntolerance = 1e-30\n");
    let out = dir.path().join("out");
    let res = kglab(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("spectral-identity.json")).unwrap()).unwrap();
    assert_eq!(v["pass"], false);
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = campaign(dir.path(), "name = \"env\"\nchecks = [\"spectral-identity\"]\n");
    let out = dir.path().join("from-env");
    let res = Command::new(env!("CARGO_BIN_EXE_kglab")).args(["run", cfg.to_str().unwrap()]).env("KGLAB_OUT", &out).output().unwrap();
    assert!(res.status.success());
    assert!(out.join("spectral-identity.json").exists());
}

#[test]
fn check_filter_restricts_the_campaign() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("quick.toml");
    let out = dir.path().join("out");
    let res = kglab(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--check", "spectral-identity"]);
    assert!(res.status.success());
    assert_eq!(json_reports(&out), ["spectral-identity.json"]);
}

#[test]
fn shipped_full_campaign_parses() {
    let text = fs::read_to_string(configs().join("verify-all.toml")).unwrap();
    let v: toml::Value = toml::from_str(&text).unwrap();
    let checks = v["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 9);
    for c in checks {
        c.as_str().unwrap().parse::<kglab::checks::CheckName>().unwrap();
    }
}

fn field(out: &Output, key: &str) -> f64 {
    let text = String::from_utf8_lossy(&out.stdout);
    let line = text.lines().find(|l| l.starts_with(key)).unwrap_or_else(|| panic!("no {key} in {text}"));
    line.split_whitespace().nth(1).unwrap().parse().unwrap()
}

#[test]
fn eval_c1_prints_value_and_bound() {
    let res = kglab(&["eval", "--kernel", "C1", "--r", "2", "--t", "10"]);
    assert!(res.status.success());
    let bound = field(&res, "bound");
    let want = 1.0 / (10.0 * (1.0 + 96.0f64 * 96.0).sqrt().powf(0.25));
    assert!((bound - want).abs() < 1e-11 * want);
    assert!(field(&res, "value").abs() <= bound);
}

#[test]
fn eval_s12_on_the_light_cone() {
    let res = kglab(&["eval", "--kernel", "S12", "--r", "1", "--t", "1"]);
    assert!(res.status.success());
    let pi = std::f64::consts::PI;
    assert!((field(&res, "value") + 1.0 / (8.0 * pi)).abs() < 1e-12);
    assert!((field(&res, "wave") - 1.0 / (4.0 * pi)).abs() < 1e-12);
}

#[test]
fn eval_rejects_alpha_out_of_range() {
    let res = kglab(&["eval", "--kernel", "E", "--alpha", "2.6", "--r", "1", "--t", "3"]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("out of range"));
}

#[test]
fn shipped_full_campaign_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("verify-all.toml");
    let res = kglab(&["run", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stdout));
    assert_eq!(json_reports(dir.path()).len(), 9);
}
