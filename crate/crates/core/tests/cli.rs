use std::path::Path;

use occnav::cli::run;

const TINY: &str = r#"
seed = 5

[dataset]
pose_grid = 1.0
yaw_step_deg = 90.0
train_worlds = [0, 1]
test_worlds = [100]

[train]
base_channels = 4
max_epochs = 2
batch_size_pred = 8
batch_size_gan = 8
"#;

fn occnav(args: &[&str]) -> (i32, String, String) {
    let (mut o, mut e) = (Vec::new(), Vec::new());
    let mut full = vec!["occnav"];
    full.extend_from_slice(args);
    let code = run(full, &mut o, &mut e);
    (code, String::from_utf8(o).unwrap(), String::from_utf8(e).unwrap())
}

fn field<'a>(report: &'a str, key: &str) -> &'a str {
    report
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("{key} missing in\n{report}"))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn pipeline_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cfg = d.join("run.toml");
    std::fs::write(&cfg, TINY).unwrap();

    let (code, out, err) = occnav(&["gen-world", "--config", s(&cfg), "--out", s(&d.join("worlds"))]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(field(&out, "worlds"), "3");
    assert!(d.join("worlds/world_100.txt").exists());

    let data = d.join("data");
    let (code, out, err) = occnav(&["gen-data", "--config", s(&cfg), "--out", s(&data)]);
    assert_eq!(code, 0, "{err}");
    assert!(field(&out, "train_pairs").parse::<usize>().unwrap() > 0);
    assert!(field(&out, "test_pairs").parse::<usize>().unwrap() > 0);

    let w = d.join("model.occw");
    let (code, out, err) = occnav(&["train", "--config", s(&cfg), "--data", s(&data), "--method", "pred-mse", "--out", s(&w)]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(field(&out, "epochs"), "2");
    assert!(d.join("model.occw.history.txt").exists());

    let report = d.join("eval.txt");
    let args = ["eval-inpaint", "--weights", s(&w), "--data", s(&data), "--config", s(&cfg), "--report", s(&report)];
    let (code, out, err) = occnav(&args);
    assert_eq!(code, 0, "{err}");
    // a two-epoch model may predict no known cell, leaving accuracy undefined
    let acc = field(&out, "accuracy_pct");
    assert!(acc == "none" || (0.0..=100.0).contains(&acc.parse::<f64>().unwrap()), "{acc}");
    for key in ["inpainted_pct", "target_gain_pct"] {
        let v: f64 = field(&out, key).parse().unwrap();
        assert!(v >= 0.0, "{key} = {v}");
    }
    assert_eq!(field(&out, "accuracy_histogram").split(' ').count(), 20);
    assert_eq!(field(&out, "method"), "pred-mse");
    // reports are byte-identical across runs
    let (_, again, _) = occnav(&args);
    assert_eq!(out, again);
    assert_eq!(std::fs::read_to_string(&report).unwrap(), out);

    let sim = d.join("sim");
    let (code, out, err) = occnav(&["simulate", "--config", s(&cfg), "--method", "normal", "--episodes", "3", "--out", s(&sim)]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(field(&out, "n_episodes"), "3");
    assert_eq!(field(&out, "method"), "normal");
    let spd: f64 = field(&out, "spd").parse().unwrap();
    assert!((0.0..=1.0).contains(&spd));
    assert_eq!(std::fs::read_to_string(sim.join("episodes.jsonl")).unwrap().lines().count(), 3);

    let args = ["simulate", "--config", s(&cfg), "--method", "predicted", "--weights", s(&w), "--episodes", "2"];
    let (code, out, err) = occnav(&args);
    assert_eq!(code, 0, "{err}");
    assert_eq!(field(&out, "method"), "pred-mse");

    let img = d.join("pair.pgm");
    let (code, _, err) = occnav(&["render", "--in", s(&data.join("train.occd")), "--out", s(&img)]);
    assert_eq!(code, 0, "{err}");
    assert!(std::fs::read(&img).unwrap().starts_with(b"P5\n130 64\n255\n"));
    let png = d.join("episode.png");
    let log = sim.join("episodes.jsonl");
    let (code, _, err) = occnav(&["render", "--in", s(&log), "--config", s(&cfg), "--index", "1", "--out", s(&png)]);
    assert_eq!(code, 0, "{err}");
    assert!(std::fs::read(&png).unwrap().starts_with(b"\x89PNG"));
    let (code, _, err) = occnav(&["render", "--in", s(&d.join("worlds/world_0.txt")), "--out", s(&d.join("w.pgm"))]);
    assert_eq!(code, 0, "{err}");

    // error codes
    let (code, _, _) = occnav(&["simulate", "--config", s(&cfg), "--method", "normal", "--episodes", "0"]);
    assert_eq!(code, 1);
    let (code, _, _) = occnav(&["simulate", "--config", s(&cfg), "--method", "predicted", "--episodes", "1"]);
    assert_eq!(code, 1);
    let bad = d.join("bad.toml");
    std::fs::write(&bad, "seed = 1\nmystery = 2\n").unwrap();
    assert_eq!(occnav(&["gen-world", "--config", s(&bad), "--out", s(d)]).0, 2);
    let junk = d.join("junk.occw");
    std::fs::write(&junk, b"NOPE").unwrap();
    assert_eq!(occnav(&["eval-inpaint", "--weights", s(&junk), "--data", s(&data)]).0, 4);
    assert_eq!(occnav(&["eval-inpaint", "--weights", s(&d.join("none.occw")), "--data", s(&data)]).0, 3);
    let other_grid = d.join("grid.toml");
    std::fs::write(&other_grid, format!("{TINY}\n[grid]\nforward_extent = 5.0\nlateral_extent = 5.0\nresolution = 32\n")).unwrap();
    let args = ["train", "--config", s(&other_grid), "--data", s(&data), "--method", "gan", "--out", s(&w)];
    assert_eq!(occnav(&args).0, 4);
}

#[test]
fn render_unknown_grid_is_mid_gray() {
    use occnav::dataset::{save_dataset, Dataset, PairMeta, SamplePair};
    use occnav::occupancy::{CameraRig, GridSpec, ProbGrid};
    use occnav::sensor::Pose2D;

    let dir = tempfile::tempdir().unwrap();
    let grid = GridSpec::desk();
    let pair = SamplePair {
        input: ProbGrid::unknown(grid),
        target: ProbGrid::unknown(grid),
        meta: PairMeta { world: 0, pose: Pose2D::new(1.0, 1.0, 0.0), rig: CameraRig::default() },
    };
    let path = dir.path().join("u.occd");
    save_dataset(&Dataset { grid, pairs: vec![pair] }, &path).unwrap();
    let img = dir.path().join("u.pgm");
    let (code, _, err) = occnav(&["render", "--in", s(&path), "--which", "input", "--out", s(&img)]);
    assert_eq!(code, 0, "{err}");
    let bytes = std::fs::read(&img).unwrap();
    let header = b"P5\n64 64\n255\n";
    assert!(bytes.starts_with(header));
    assert!(bytes[header.len()..].iter().all(|&v| v == 128));
    assert_eq!(bytes.len(), header.len() + 64 * 64);
}
