use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn gfmate(args: &[&str], cache: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gfmate"))
        .args(args)
        .env("GFMATE_CACHE_DIR", cache)
        .output()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn end_to_end_runs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cache = d.join("cache");
    assert!(gfmate(&["synth", "--out", s(&d.join("bench"))], &cache).status.success());
    let cfg = d.join("bench/experiment.json");
    let run = |out: &str| {
        let o = gfmate(
            &["tune", "--config", s(&cfg), "--seeds", "0..2", "--epochs", "3", "--out-dir", s(&d.join(out))],
            &cache,
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    };
    run("a");
    run("b");
    assert!(cache.read_dir().unwrap().count() >= 2, "cache dir comes from the environment");
    for f in ["per_seed.csv", "history_seed0.csv", "history_seed2.csv"] {
        assert_eq!(fs::read(d.join("a").join(f)).unwrap(), fs::read(d.join("b").join(f)).unwrap());
    }
    let o = gfmate(&["plot", "--reports", s(&d.join("a")), "--out", s(&d.join("plots"))], &cache);
    assert!(o.status.success());
    assert!(d.join("plots/accuracy.svg").is_file());
}

#[test]
fn explicit_checkpoint_and_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cache = d.join("cache");
    gfmate(&["synth", "--out", s(&d.join("bench"))], &cache);
    let manifest = d.join("bench/manifest.json");
    let ckpt = d.join("enc.gfmw");
    let o = gfmate(
        &["pretrain", "--manifest", s(&manifest), "--exclude", "sbm-target", "--out", s(&ckpt), "--epochs", "2", "--hidden-dim", "16"],
        &cache,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = gfmate(
        &["tune", "--ckpt", s(&ckpt), "--manifest", s(&manifest), "--target", "sbm-target", "--shots", "1", "--seeds", "0..4", "--hidden-dim", "16"],
        &cache,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("over 5 seeds"));
    let o = gfmate(
        &["sweep", "--kind", "ratio", "--values", "0,0.5,1", "--config", s(&d.join("bench/experiment.json")), "--seeds", "0,1", "--epochs", "2", "--out-dir", s(&d.join("sweep"))],
        &cache,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read_to_string(d.join("sweep/sweep.csv")).unwrap().lines().count(), 4);
    assert!(d.join("sweep/plots/accuracy.svg").is_file());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cache = d.join("cache");
    gfmate(&["synth", "--out", s(&d.join("bench"))], &cache);
    let cfg = d.join("bench/experiment.json");
    let code = |args: &[&str]| gfmate(args, &cache).status.code().unwrap();
    assert_eq!(code(&["tune", "--config", s(&cfg), "--gamma", "1.5"]), 2);
    assert_eq!(code(&["tune", "--config", s(&cfg), "--target", "missing"]), 2);
    assert_eq!(code(&["tune", "--manifest", s(&d.join("none.json")), "--target", "x"]), 3);
    fs::write(d.join("bench/sbm-a.edges"), "0 zero\n").unwrap();
    assert_eq!(code(&["tune", "--config", s(&cfg)]), 3);
}

#[test]
fn divergent_pretraining_exits_with_numeric_code() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cache = d.join("cache");
    gfmate(&["synth", "--out", s(&d.join("bench"))], &cache);
    let o = gfmate(
        &["tune", "--config", s(&d.join("bench/experiment.json")), "--seeds", "0", "--epochs", "2", "--pretrain-lr", "1e300"],
        &cache,
    );
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));
}
