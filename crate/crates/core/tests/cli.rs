use std::process::Command;

fn treemine() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_treemine"));
    c.env_remove("TREEMINE_SEED");
    c
}

#[test]
fn bench_csv_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut outs = Vec::new();
    for i in 0..2 {
        let path = dir.path().join(format!("b{i}.csv"));
        let st = treemine()
            .args(["bench", "--size", "200", "--ks", "2,3,5", "--seed", "7", "--out"])
            .arg(&path)
            .status()
            .unwrap();
        assert!(st.success());
        outs.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(outs[0], outs[1]);
    let text = String::from_utf8(outs.swap_remove(0)).unwrap();
    assert!(text.starts_with("tree,"));
    assert!(text.lines().count() > 10);
}

#[test]
fn exit_codes() {
    let ok = treemine().args(["ck", "--max", "8"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).lines().nth(2).unwrap().starts_with("3,"));

    let bad = treemine().args(["explore", "--tree", "nonsense:1", "--k", "2"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    let usage = treemine().args(["play"]).output().unwrap();
    assert_eq!(usage.status.code(), Some(2));
    let missing = treemine().args(["verify-trace", "/nonexistent/trace.json"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn traces_round_trip_through_verify() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.json");
    let st = treemine()
        .args(["explore", "--tree", "random:300,3,4", "--k", "4", "--scheduler", "random@seed=2", "--out"])
        .arg(&path)
        .status()
        .unwrap();
    assert!(st.success());
    let out = treemine().arg("verify-trace").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let mut v: serde_json::Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    let m = v["moves"].as_u64().unwrap();
    v["moves"] = (m + 1).into();
    std::fs::write(&path, serde_json::to_string(&v).unwrap()).unwrap();
    let out = treemine().arg("verify-trace").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(1));

    let game = dir.path().join("g.json");
    let st = treemine().args(["play", "--k", "3", "--depth", "6", "--out"]).arg(&game).status().unwrap();
    assert!(st.success());
    let out = treemine().arg("verify-trace").arg(&game).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn seed_from_environment() {
    let run = |seed: &str| {
        treemine()
            .env("TREEMINE_SEED", seed)
            .args(["explore", "--tree", "random:400,1,5", "--k", "3"])
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(run("11"), run("11"));
}
