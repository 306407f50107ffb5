use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cuberamsey"))
        .args(args)
        .current_dir(dir)
        .env("RUST_LOG", "error")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

const ENGINEERING: &str = r#"s = 3
n = 6
mode = "engineering"

[engineering]
multipliers = [4]
codim_max = [6]

[coloring]
kind = "blue-random"
N = 8000
p = 0.04
seed = 1
"#;

#[test]
fn stage_by_stage_matches_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("run.toml"), ENGINEERING).unwrap();
    std::fs::write(d.join("coloring.toml"), "kind = \"blue-random\"\nN = 8000\np = 0.04\nseed = 1\n").unwrap();

    let o = run(&["preprocess", "run.toml", "-o", "forest.json", "--degrees"], d);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = run(&["tile", "run.toml", "--forest", "forest.json", "-o", "cp.json", "--events", "ev.jsonl"], d);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(std::fs::read_to_string(d.join("ev.jsonl")).unwrap().lines().count() > 2);
    let o = run(&["prune", "run.toml", "--forest", "forest.json", "--checkpoint", "cp.json", "-o", "pruned.json"], d);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = run(&["embed", "run.toml", "--pruned", "pruned.json", "--checkpoint", "cp.json", "-o", "emb.json"], d);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = run(&["verify", "coloring.toml", "emb.json"], d);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("valid"));

    let o = run(&["pipeline", "run.toml", "--artifacts", "art", "--report", "report.json"], d);
    assert_eq!(code(&o), 0);
    assert_eq!(
        std::fs::read_to_string(d.join("emb.json")).unwrap(),
        std::fs::read_to_string(d.join("art/embedding.json")).unwrap()
    );
    assert!(std::fs::read_to_string(d.join("report.json")).unwrap().contains("guarantees-void: engineering constants"));

    // A tampered embedding is rejected.
    let mut e: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("emb.json")).unwrap()).unwrap();
    e["map"][1] = e["map"][0].clone();
    std::fs::write(d.join("bad.json"), e.to_string()).unwrap();
    assert_eq!(code(&run(&["verify", "coloring.toml", "bad.json"], d)), 2);
}

#[test]
fn exit_codes_by_outcome() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("small.toml"), "s = 3\nn = 6\nmode = \"paper-exact\"\n[coloring]\nkind = \"all-red\"\nN = 100\n").unwrap();
    let o = run(&["pipeline", "small.toml"], d);
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8_lossy(&o.stderr).contains("N ≥ 7000·2^n"));

    std::fs::write(d.join("typo.toml"), "s = 3\nn = 6\nmode = \"paper-exact\"\ncolour = 1\n").unwrap();
    assert_eq!(code(&run(&["pipeline", "typo.toml"], d)), 4);

    let dense = ENGINEERING.replace("p = 0.04", "p = 0.12");
    std::fs::write(d.join("dense.toml"), dense).unwrap();
    let o = run(&["pipeline", "dense.toml", "--report", "r.json"], d);
    assert_eq!(code(&o), 2);
    assert!(std::fs::read_to_string(d.join("r.json")).unwrap().contains("honest-failure"));
}

#[test]
fn utility_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = run(&["ramsey-brute", "--cube", "2", "--N", "7"], d);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("arrows"));
    let o = run(&["bounds", "--s", "3", "--lower-bound-n", "4"], d);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("\"26\""));

    let mut text = String::from("# 6x6 grid\n36 60\n");
    for r in 0..6 {
        for c in 0..6 {
            let v = r * 6 + c;
            if c + 1 < 6 {
                text += &format!("{v} {}\n", v + 1);
            }
            if r + 1 < 6 {
                text += &format!("{v} {}\n", v + 6);
            }
        }
    }
    std::fs::write(d.join("g.txt"), text).unwrap();
    let o = run(&["separator", "g.txt", "--oracle", "grid", "--width", "6", "--eta", "0.25"], d);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["degeneracy"], 2);
    assert!(v["max_part"].as_u64().unwrap() <= 9);

    std::fs::write(d.join("c.toml"), "kind = \"blue-matching\"\nN = 40\n").unwrap();
    assert_eq!(code(&run(&["gen", "c.toml", "-o", "c.bin"], d)), 0);
    std::fs::write(d.join("f.toml"), format!("kind = \"file-backed\"\npath = \"{}\"\n", d.join("c.bin").display())).unwrap();
    std::fs::write(d.join("e.json"), "{\"n\": 2, \"map\": [0, 2, 4, 6]}").unwrap();
    assert_eq!(code(&run(&["verify", "f.toml", "e.json"], d)), 0);
    std::fs::write(d.join("e2.json"), "{\"n\": 2, \"map\": [0, 1, 4, 6]}").unwrap();
    assert_eq!(code(&run(&["verify", "f.toml", "e2.json"], d)), 2);
}
