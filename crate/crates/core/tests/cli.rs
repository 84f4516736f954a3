use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn shapevar(args: &[&str], out_dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shapevar"))
        .args(args)
        .env("SHAPEVAR_OUT_DIR", out_dir)
        .output()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn exit_codes_and_one_line_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cases: [(&[&str], i32); 7] = [
        (&["--help"], 0),
        (&["--version"], 0),
        (&["nonsense"], 2),
        (&["evaluate", "--dets", "x"], 3),
        (&["heatmap", "--labels", "/does/not/exist"], 4),
        (&["gen-shapes", "--count", "0", "--out", "unused"], 3),
        (&["--jobs", "0", "gen-shapes"], 3),
    ];
    for (args, code) in cases {
        let out = shapevar(args, d);
        assert_eq!(out.status.code(), Some(code), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        if code != 0 {
            let err = String::from_utf8_lossy(&out.stderr);
            assert_eq!(err.trim_end().lines().count(), 1, "{args:?}: {err}");
            assert!(err.starts_with("error: "), "{err}");
        }
    }
}

#[test]
fn default_output_dir_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = shapevar(&["gen-shapes", "--count", "2", "--extra", "1"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read_dir(dir.path().join("dataset/images")).unwrap().count(), 3);
}

#[test]
fn config_file_feeds_the_run_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cfg = d.join("run.json");
    fs::write(&cfg, r#"{"seed": 5, "dataset": {"base_count": 3, "plan": {"kind": "extra", "count": 2}}}"#).unwrap();
    let a = d.join("a");
    assert!(shapevar(&["--config", s(&cfg), "gen-shapes", "--out", s(&a)], d).status.success());
    assert_eq!(fs::read_dir(a.join("images")).unwrap().count(), 5);
    let b = d.join("b");
    assert!(shapevar(&["--config", s(&cfg), "gen-shapes", "--count", "4", "--out", s(&b)], d).status.success());
    assert_eq!(fs::read_dir(b.join("images")).unwrap().count(), 6);

    fs::write(&cfg, r#"{"sed": 5}"#).unwrap();
    assert_eq!(shapevar(&["--config", s(&cfg), "gen-shapes"], d).status.code(), Some(3));
}

#[test]
fn every_stage_from_the_command_line() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let run = |args: &[&str]| {
        let out = shapevar(args, d);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        String::from_utf8(out.stdout).unwrap()
    };
    let (train, test) = (d.join("train"), d.join("test"));
    run(&["--seed", "1", "gen-shapes", "--components", "--count", "25", "--out", s(&train)]);
    run(&["--seed", "2", "gen-shapes", "--components", "--count", "6", "--out", s(&test)]);

    let png = d.join("heat.png");
    run(&["heatmap", "--labels", s(&train.join("labels")), "--grid", "4x4", "--out", s(&png), "--cell", "8"]);
    assert_eq!(image::open(&png).unwrap().to_luma8().dimensions(), (32, 32));
    let json = d.join("heat.json");
    run(&["heatmap", "--labels", s(&train.join("labels")), "--grid", "4x4", "--out", s(&json)]);
    let hm: serde_json::Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(hm["rows"], 4);

    let img = test.join("images/img_0000.png");
    let props = d.join("props.txt");
    let said = run(&["propose", "--image", s(&img), "--out", s(&props)]);
    let n = fs::read_to_string(&props).unwrap().lines().count();
    assert_eq!(said.trim(), format!("{n} proposals"));
    let ext = d.join("ext.txt");
    fs::write(&ext, "0 0.5 0.5 0.2 0.2 0.9\n1 0.1 0.1 0.4 0.4 0.8\n").unwrap();
    run(&["propose", "--image", s(&img), "--from-detections", s(&ext), "--out", s(&props)]);
    assert_eq!(fs::read_to_string(&props).unwrap().lines().count(), 2);

    let model = d.join("model.json");
    run(&["build-model", "--crops", s(&train.join("crops")), "--bins", "16", "--out", s(&model)]);
    let tuned = d.join("tuned.json");
    run(&["optimize-weights", "--model", s(&model), "--val", s(&test.join("crops")), "--step", "0.25", "--out", s(&tuned)]);
    let tuned_json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&tuned).unwrap()).unwrap();
    assert!(tuned_json["provenance"]["weight_search"].is_object());

    let crop = fs::read_dir(test.join("crops/circle/antenna")).unwrap().next().unwrap().unwrap().path();
    let scores: serde_json::Value = serde_json::from_str(&run(&["classify", "--model", s(&model), "--crop", s(&crop)])).unwrap();
    assert_eq!(scores["branch"], "circle");
    let scores: serde_json::Value =
        serde_json::from_str(&run(&["classify", "--model", s(&model), "--crop", s(&crop), "--branch", "rectangle"])).unwrap();
    assert_eq!(scores["branch"], "rectangle");

    let det = d.join("det");
    run(&["detect", "--model", s(&model), "--images", s(&test.join("images")), "--out", s(&det), "--pad", "-0.05"]);
    assert_eq!(fs::read_dir(&det).unwrap().count(), 7);
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(det.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["options"]["pad"], -0.05);
    assert_eq!(summary["frames"].as_array().unwrap().len(), 6);

    let classes = test.join("classes.txt");
    let text = d.join("report.txt");
    run(&["evaluate", "--dets", s(&det), "--gt", s(&test.join("labels")), "--classes", s(&classes), "--out", s(&text), "--interp", "101"]);
    let report = fs::read_to_string(&text).unwrap();
    assert!(report.contains("101-point"), "{report}");
    assert!(report.contains("No detections in 0 out of 6 frames"), "{report}");

    let pairs = d.join("pairs.txt");
    fs::write(&pairs, "antenna antenna\nantenna thruster\nsolar_panel 3\n").unwrap();
    let cm = d.join("cm.json");
    run(&["confusion", "--pairs", s(&pairs), "--out", s(&cm)]);
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(&cm).unwrap()).unwrap();
    assert_eq!(m["counts"][0], serde_json::json!([1, 0, 1, 0]));

    let det2 = d.join("det2");
    run(&["detect", "--model", s(&tuned), "--images", s(&test.join("images")), "--out", s(&det2)]);
    let table = d.join("counts.txt");
    let printed = run(&["compare", "--runs", &format!("{},{}", s(&det), s(&det2)), "--names", "ours,tuned", "--gt", s(&test.join("labels")), "--out", s(&table)]);
    assert_eq!(printed, fs::read_to_string(&table).unwrap());
    assert!(printed.contains("ours") && printed.contains("labelled occurrence"), "{printed}");
}
