use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_triple-bubbles"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn classify_prints_winner() {
    let out = bin(&["classify", "--density", "f2", "--volumes", "0.01,100,1500"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("2313"), "{text}");
}

#[test]
fn validation_errors_exit_one() {
    for args in [
        &["classify", "--density", "f2", "--volumes", "500,100,5"][..],
        &["classify", "--density", "nope", "--volumes", "1,2,3"],
        &["solve", "--density", "f1", "--volumes", "1,-2"],
        &["frobnicate"],
    ] {
        let out = bin(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn sweep_then_render() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("csv");
    let ppm = dir.path().join("ppm");
    let out = bin(&[
        "sweep", "--density", "f1", "--v1", "log:0.5:6:2", "--v2", "lin:0.01:120:12", "--v3",
        "lin:0.01:3000:16", "--out", csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read_dir(&csv).unwrap().count(), 2);

    let out = bin(&["render", "--in", csv.to_str().unwrap(), "--out", ppm.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let mut images: Vec<_> = std::fs::read_dir(&ppm).unwrap().map(|e| e.unwrap().path()).collect();
    images.sort();
    assert_eq!(images.len(), 2);
    let bytes = std::fs::read(&images[0]).unwrap();
    let header = b"P6\n16 12\n255\n";
    assert!(bytes.starts_with(header));
    assert_eq!(bytes.len(), header.len() + 16 * 12 * 3);
}

#[test]
fn render_of_missing_dir_fails() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent");
    let out = bin(&["render", "--in", missing.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}
