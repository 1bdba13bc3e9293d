use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use svarm::mesh::{generate_synthetic_shape, save_mesh, MeshFormat, ShapeKind};
use svarm::model::{save_checkpoint, CheckpointMeta, MlpParams, SVarMModel};
use svarm::varifold::Representation;

fn svarm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_svarm"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn synth(dir: &Path, samples: &str) {
    let o = svarm(&["synth-data", "--resolution", "4", "--samples", samples, "--seed", "5", "--out", p(dir)]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn info_prints_dims_count_and_bound() {
    let dir = tempfile::tempdir().unwrap();
    let ckpt = dir.path().join("c.json");
    let model = SVarMModel::init(&[6, 16, 64, 10], 2).unwrap();
    let meta = CheckpointMeta {
        seed: 2,
        epochs: 0,
        representation: Representation::Varifold,
        mass_normalization: None,
    };
    save_checkpoint(&model, &meta, &ckpt).unwrap();
    let o = svarm(&["info", "--checkpoint", p(&ckpt)]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("dims: 6,16,64,10"), "{text}");
    assert!(text.contains("param_count: 1850"), "{text}");
    let bound: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("lipschitz_bound: "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(bound > 0.0 && bound.is_finite());
    let o = svarm(&["info", "--dims", "6,16,64,12"]);
    assert!(stdout(&o).contains("param_count: 1980"));
}

#[test]
fn usage_errors_exit_one() {
    let o = svarm(&["train", "--data", "somewhere"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--out"));
    assert_eq!(svarm(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(svarm(&["info", "--dims", "6,4", "--verbose"]).status.code(), Some(1));
    assert_eq!(svarm(&["--help"]).status.code(), Some(0));
}

#[test]
fn bad_idx_magic_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let images = dir.path().join("img");
    let labels = dir.path().join("lab");
    fs::write(&images, [0u8, 0, 8, 1, 0, 0, 0, 0]).unwrap();
    fs::write(&labels, [0u8, 0, 8, 1, 0, 0, 0, 0]).unwrap();
    let o = svarm(&["ingest-mnist", "--images", p(&images), "--labels", p(&labels), "--count", "1", "--out", p(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error[bad_magic]"), "{}", stderr(&o));
}

#[test]
fn synth_train_eval_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    synth(&data, "40");
    let run = dir.path().join("run");
    let o = svarm(&["train", "--data", p(&data), "--epochs", "2", "--seed", "1", "--out", p(&run)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let curve = fs::read_to_string(run.join("metrics.csv")).unwrap();
    let lines: Vec<_> = curve.lines().collect();
    assert_eq!(lines[0], "epoch,loss");
    assert_eq!(lines.len(), 3);
    for l in &lines[1..] {
        let loss: f64 = l.split(',').nth(1).unwrap().parse().unwrap();
        assert!(loss.is_finite());
    }
    let summary = fs::read_to_string(run.join("test_metrics.csv")).unwrap();
    assert!(summary.starts_with("mean_error,r2\n"));

    let ckpt = run.join("checkpoint.json");
    let o = svarm(&["eval", "--checkpoint", p(&ckpt), "--data", p(&data)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), summary);

    let sweep = dir.path().join("sweep.csv");
    let o = svarm(&[
        "robustness", "--checkpoint", p(&ckpt), "--data", p(&data), "--levels", "0,0.2", "--rescale", "--out", p(&sweep),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&sweep).unwrap();
    assert!(text.starts_with("level,mean_error,r2\n0,"));
    assert_eq!(text.lines().count(), 3);

    // A checkpoint for another representation does not fit this data.
    let spatial = dir.path().join("spatial");
    let o = svarm(&[
        "train", "--data", p(&data), "--epochs", "1", "--representation", "spatial", "--dims", "3,4,1", "--out", p(&spatial),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = svarm(&["eval", "--checkpoint", p(&spatial.join("checkpoint.json")), "--data", p(&data)]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    synth(&data, "30");
    let runs: Vec<_> = ["a", "b"]
        .iter()
        .map(|name| {
            let out = dir.path().join(name);
            let o = svarm(&["train", "--data", p(&data), "--epochs", "3", "--seed", "9", "--normalize-mass", "--out", p(&out)]);
            assert!(o.status.success(), "{}", stderr(&o));
            out
        })
        .collect();
    for file in ["checkpoint.json", "metrics.csv", "test_metrics.csv", "config.json"] {
        assert_eq!(fs::read(runs[0].join(file)).unwrap(), fs::read(runs[1].join(file)).unwrap(), "{file}");
    }
    let again = dir.path().join("data2");
    synth(&again, "30");
    assert_eq!(
        fs::read(data.join("manifest.json")).unwrap(),
        fs::read(again.join("manifest.json")).unwrap()
    );
}

#[test]
fn inspect_h_dumps_one_row_per_face() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = generate_synthetic_shape(&ShapeKind::Torus { major: 1.0, minor: 0.3 }, 4, 0).unwrap();
    let mesh_path = dir.path().join("t.off");
    save_mesh(&mesh, &mesh_path, MeshFormat::Off).unwrap();
    let meta = CheckpointMeta {
        seed: 0,
        epochs: 0,
        representation: Representation::Varifold,
        mass_normalization: None,
    };
    let zero = SVarMModel::new(MlpParams::zeros(&[6, 3, 1]).unwrap(), ndarray_zeros(1)).unwrap();
    let ckpt = dir.path().join("zero.json");
    save_checkpoint(&zero, &meta, &ckpt).unwrap();
    let out = dir.path().join("h.csv");
    let o = svarm(&["inspect-h", "--checkpoint", p(&ckpt), "--mesh", p(&mesh_path), "--out", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], "face_index,h");
    assert_eq!(lines.len(), mesh.num_faces() + 1);
    assert!(lines[1..].iter().all(|l| l.ends_with(",0")));

    let wrong = SVarMModel::init(&[4, 2, 1], 0).unwrap();
    save_checkpoint(&wrong, &meta, &ckpt).unwrap();
    let o = svarm(&["inspect-h", "--checkpoint", p(&ckpt), "--mesh", p(&mesh_path), "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error[dimension_mismatch]"), "{}", stderr(&o));
}

fn ndarray_zeros(n: usize) -> ndarray::Array1<f64> {
    ndarray::Array1::zeros(n)
}
