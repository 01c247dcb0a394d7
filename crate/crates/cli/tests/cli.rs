use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const CONFIG: &str = r#"
[task]
object = "banana"

[dataset]
count = 2
styles = ["saw"]
states = [{ kind = "middle" }, { kind = "ratio", r = 0.3, side = "right" }]
"#;

fn cutsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cutsim")).args(args).output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn plan_only_dataset_writes_manifest_and_instructions() {
    let root = tempfile::tempdir().unwrap();
    let config = root.path().join("run.toml");
    fs::write(&config, CONFIG).unwrap();
    let out = root.path().join("ds");
    let run = cutsim(&["--config", path(&config), "--seed", "40", "--out", path(&out), "gen-dataset", "--plan-only"]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));

    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(out.join("manifest.json")).unwrap()).unwrap();
    let entries = manifest["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 4);
    assert_eq!(manifest["plan_only"], true);
    assert_eq!(manifest["complete"], true);
    let seeds: Vec<u64> = entries.iter().map(|e| e["seed"].as_u64().unwrap()).collect();
    assert_eq!(seeds, vec![40, 41, 42, 43]);
    for e in entries {
        let dir = out.join(e["dir"].as_str().unwrap());
        let text = fs::read_to_string(dir.join("instruction.txt")).unwrap();
        assert!(text.contains("banana"), "{text}");
        assert!(text.to_lowercase().contains("saw"), "{text}");
        assert!(fs::read_to_string(dir.join("trajectory.csv")).unwrap().lines().count() > 2);
    }

    // Planned episodes carry no simulation results to evaluate.
    let eval = cutsim(&["--out", path(&out), "eval", path(&out)]);
    assert!(!eval.status.success());
}

#[test]
fn bad_config_is_reported() {
    let root = tempfile::tempdir().unwrap();
    let config = root.path().join("bad.toml");
    fs::write(&config, "[sim]\nno_such_key = 1\n").unwrap();
    let run = cutsim(&["--config", path(&config), "--out", path(root.path()), "gen-dataset", "--plan-only"]);
    assert!(!run.status.success());
    assert!(String::from_utf8_lossy(&run.stderr).contains("no_such_key"));
}

#[test]
fn sweep_rejects_a_single_modulus() {
    let root = tempfile::tempdir().unwrap();
    let run = cutsim(&["--out", path(root.path()), "sweep-youngs", "--values", "500000"]);
    assert!(!run.status.success());
    assert!(String::from_utf8_lossy(&run.stderr).contains("at least two"));
}
