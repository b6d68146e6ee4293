use std::path::Path;
use std::process::{Command, Output};

fn cbet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cbet")).args(args).output().unwrap()
}

fn write_config(dir: &Path, extra: &str) -> String {
    let path = dir.join("run.cfg");
    let text = format!(
        "env_kind = unlock\nseeds = 1, 2\nstep_budget = 800\neval_every = 400\neval_episodes = 2\n\
         num_actors = 4\nencoder_width = 8\noutput_dir = {}\n{extra}",
        dir.join("out").display()
    );
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn train_then_eval_a_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "algorithm = cbet_ac\n");
    let out = cbet(&["train", "--config", &cfg, "--seed-override", "4"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let ckpt = dir.path().join("out/seed_4/agent.ckpt");
    assert!(ckpt.exists());
    assert!(!dir.path().join("out/seed_1").exists());

    let out = cbet(&["eval", "--checkpoint", ckpt.to_str().unwrap(), "--env", "unlock", "--episodes", "3"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("mean"));
}

#[test]
fn transfer_command_needs_a_transfer_algorithm() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "algorithm = baseline_ac\n");
    let out = cbet(&["transfer", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));

    let cfg = write_config(dir.path(), "algorithm = cbet_transfer_world_model\npretrain_steps = 400\n");
    let out = cbet(&["train", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let out = cbet(&["transfer", "--config", &cfg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("out/seed_2/pretrain_agent.ckpt").exists());
}

#[test]
fn grid_search_prints_a_ranking() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let out = cbet(&["grid-search", "--config", &cfg, "--alphas", "0,0.01"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.lines().count(), 3);
    assert_eq!(cbet(&["grid-search", "--config", &cfg, "--alphas", "x"]).status.code(), Some(2));
}

#[test]
fn bad_inputs_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "alpha = -3\n");
    assert_eq!(cbet(&["train", "--config", &cfg]).status.code(), Some(2));
    let missing = dir.path().join("nope.cfg");
    assert_eq!(cbet(&["train", "--config", missing.to_str().unwrap()]).status.code(), Some(1));
    assert!(!cbet(&["frobnicate"]).status.success());
}

#[test]
fn replay_checks_a_recorded_trace() {
    use cbet::gridworld::{Action, EnvKind, Replay};
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.json");
    let rec = Replay::record(EnvKind::Unlock, 3, true, 0, &[Action::TurnLeft, Action::Forward]).unwrap();
    rec.save(&path).unwrap();
    assert!(cbet(&["replay", "--trace", path.to_str().unwrap()]).status.success());

    let mut tampered = rec;
    tampered.rewards = vec![1.0, 1.0];
    tampered.save(&path).unwrap();
    assert!(!cbet(&["replay", "--trace", path.to_str().unwrap()]).status.success());
}
