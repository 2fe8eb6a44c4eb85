use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn skforge(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_skforge"))
        .args(args)
        .env("SKFORGE_NET_CACHE", cache)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn line<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines().find_map(|l| l.strip_prefix(key)).unwrap_or_else(|| panic!("no {key:?} in {text}"))
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

const IDENTITY_ONLY: &str = r#"[{"name":"I","matrix":[[[1,0],[0,0]],[[0,0],[1,0]]]}]"#;
const T_WITHOUT_INVERSE: &str =
    r#"[{"name":"T","matrix":[[[0.9238795325112867,0.3826834323650898],[0,0]],[[0,0],[0.9238795325112867,-0.3826834323650898]]]}]"#;

#[test]
fn verify_suites_pass() {
    let dir = TempDir::new().unwrap();
    for args in [["verify", "elkasapy-lengths", "24"], ["verify", "nilfib", "7"], ["verify", "cross", "200"], ["verify", "endpoints", "20"]] {
        let o = skforge(dir.path(), &args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", stdout(&o));
    }
    let o = skforge(dir.path(), &["verify", "elkasapy-lengths", "24"]);
    assert!(stdout(&o).contains("23/23 passed"));
}

#[test]
fn net_build_reports_covering() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("n12.sknet");
    let o = skforge(dir.path(), &["net-build", "--l0", "12", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let cov: f64 = line(&stdout(&o), "covering_estimate: ").parse().unwrap();
    assert!(cov < 0.5, "{cov}");
    assert!(out.exists());
}

#[test]
fn identity_only_gate_set_builds() {
    let dir = TempDir::new().unwrap();
    let gates = write(&dir, "id.json", IDENTITY_ONLY);
    let out = dir.path().join("id.sknet");
    let o = skforge(dir.path(), &["net-build", "--gates", &gates, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(line(&text, "entries: "), "1");
    // Projective metric: the farthest point from +-1 is at pi / 2.
    let cov: f64 = line(&text, "covering_estimate: ").parse().unwrap();
    assert!((cov - std::f64::consts::FRAC_PI_2).abs() < 0.01);
}

#[test]
fn gate_file_errors() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing.json");
    let o = skforge(dir.path(), &["net-build", "--gates", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let bad = write(&dir, "t.json", T_WITHOUT_INVERSE);
    let o = skforge(dir.path(), &["net-build", "--gates", &bad]);
    assert_eq!(o.status.code(), Some(2));
    let junk = write(&dir, "junk.json", "{not json");
    let o = skforge(dir.path(), &["net-build", "--gates", &junk]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn net_file_errors() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("none.sknet");
    let o = skforge(dir.path(), &["synth", "--net", missing.to_str().unwrap(), "--target", "identity", "-n", "4"]);
    assert_eq!(o.status.code(), Some(3));
    let junk = write(&dir, "junk.sknet", "SKNET1 but not really");
    let o = skforge(dir.path(), &["synth", "--net", &junk, "--target", "identity", "-n", "4"]);
    assert_eq!(o.status.code(), Some(3));
    // A net built for another gate set.
    let gates = write(&dir, "id.json", IDENTITY_ONLY);
    let other = dir.path().join("id.sknet");
    skforge(dir.path(), &["net-build", "--gates", &gates, "--out", other.to_str().unwrap()]);
    let o = skforge(dir.path(), &["synth", "--net", other.to_str().unwrap(), "--target", "T", "-n", "4"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn synth_identity_and_gates() {
    let dir = TempDir::new().unwrap();
    let o = skforge(dir.path(), &["synth", "--target", "identity", "-n", "20"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(line(&text, "length: "), "0");
    for gate in ["T", "H", "Tdg"] {
        let o = skforge(dir.path(), &["synth", "--target", gate, "-n", "12"]);
        let text = stdout(&o);
        assert_eq!(line(&text, "word: "), gate);
        let d: f64 = line(&text, "distance: ").split(' ').next().unwrap().parse().unwrap();
        assert!(d < 1e-30, "{text}");
    }
}

#[test]
fn synth_random_target() {
    let dir = TempDir::new().unwrap();
    let o = skforge(dir.path(), &["synth", "--target", "random", "--seed", "7", "-n", "20"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let bits: f64 = line(&text, "distance: ").split('(').nth(1).unwrap().split(' ').next().unwrap().parse().unwrap();
    assert!(bits > 20.0, "{text}");
    let len: usize = line(&text, "length: ").parse().unwrap();
    assert_eq!(line(&text, "word: ").split(' ').count(), len);
}

#[test]
fn synth_unreachable_with_trivial_net() {
    let dir = TempDir::new().unwrap();
    let gates = write(&dir, "id.json", IDENTITY_ONLY);
    let o = skforge(dir.path(), &["synth", "--gates", &gates, "--target", "0.6,0.8,0,0", "-n", "4"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn usage_errors() {
    let dir = TempDir::new().unwrap();
    for args in [&["frobnicate"][..], &["synth", "-n", "5", "--template", "elk12"], &["synth", "-n", "5", "--target", "1,2"], &["synth", "-n", "5", "--target", "0,0,0,0"]] {
        let o = skforge(dir.path(), args);
        assert_eq!(o.status.code(), Some(64), "{args:?}");
    }
}

#[test]
fn bench_single_n() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("b.csv");
    let args = ["bench", "--n-min", "9", "--n-max", "9", "--targets", "2", "--no-timing", "--out", out.to_str().unwrap()];
    let o = skforge(dir.path(), &args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("slope n/a"));
    let csv = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "n,eps_target,eps_achieved,len,template,algo,wall_ms,status,manifest");
    // (n_max - n_min + 1) * targets * (templates + 1)
    assert_eq!(lines.len() - 1, 2 * 3);
    assert!(!csv.contains('\r'));
    assert!(dir.path().join("b.manifest.json").exists());

    let again = dir.path().join("c.csv");
    let mut args2 = args;
    args2[9] = again.to_str().unwrap();
    skforge(dir.path(), &args2);
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&again).unwrap());
}
