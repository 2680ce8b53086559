use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_geofix"))
}

fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn run(cmd: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    bin()
        .args([cmd, "--quiet", "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited")
}

fn write_config(dir: &TempDir, text: &str) -> PathBuf {
    let p = dir.path().join("exp.toml");
    fs::write(&p, text).unwrap();
    p
}

fn rows(path: &Path) -> Vec<csv::StringRecord> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(Result::unwrap).collect()
}

fn header(path: &Path) -> Vec<String> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.headers().unwrap().iter().map(String::from).collect()
}

const LINE: &str = r#"
seed = 7
[space]
model = "euclidean"
dim = 1
[operator]
kind = "contraction"
params = { center = [0.0], ratio = 0.5 }
[schedule]
family = "harmonic"
lambda = 0.5
[anchors]
u = [0.5]
x0 = [1.0]
"#;

#[test]
fn axioms_euclidean_pass() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, &format!("{LINE}[axioms]\ntrials = 2000\n"));
    let o = run("axioms", &cfg, &dir.path().join("out"), &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = rows(&dir.path().join("out/axioms.csv"));
    assert_eq!(rows.len(), 8);
    assert!(rows.iter().all(|r| &r[4] == "true"));
}

#[test]
fn linf_witness_is_logged_when_cat0_not_expected() {
    let dir = TempDir::new().unwrap();
    let text = "[axioms]\ntrials = 10000\nspaces = [{ model = \"linf\", dim = 2, expect_cat0 = false }]\n";
    let cfg = write_config(&dir, text);
    let o = run("axioms", &cfg, &dir.path().join("out"), &[]);
    assert_eq!(code(&o), 0);
    let rows = rows(&dir.path().join("out/axioms.csv"));
    let cat0 = rows.iter().find(|r| &r[2] == "CAT0").unwrap();
    assert_eq!(&cat0[3], "false");
    assert_eq!(&cat0[4], "false");
    let lhs: f64 = cat0[6].parse().unwrap();
    let rhs: f64 = cat0[7].parse().unwrap();
    assert!(lhs > rhs);

    // Expecting CAT(0) on linf is a mathematical failure.
    let text = "[axioms]\ntrials = 10000\nspaces = [{ model = \"linf\", dim = 2, expect_cat0 = true }]\n";
    let cfg = write_config(&dir, text);
    assert_eq!(code(&run("axioms", &cfg, &dir.path().join("out2"), &[])), 1);
}

#[test]
fn usage_and_config_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let bad = write_config(&dir, "seed = \"seven\"\n");
    let o = run("axioms", &bad, &out, &[]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));

    let unknown = write_config(&dir, &format!("{LINE}[run]\nsteps = 3\n"));
    assert_eq!(code(&run("run", &unknown, &out, &[])), 2);

    let cap = write_config(&dir, &format!("{LINE}[run]\nn_steps = 2000001\n"));
    assert_eq!(code(&run("run", &cap, &out, &[])), 2);

    let missing = dir.path().join("nope.toml");
    assert_eq!(code(&run("run", &missing, &out, &[])), 2);

    assert_eq!(code(&bin().arg("frobnicate").output().unwrap()), 2);
    assert_eq!(code(&bin().args(["run"]).output().unwrap()), 2);
}

#[test]
fn zero_steps_gives_header_only_csv() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, &format!("{LINE}[run]\nn_steps = 0\n"));
    let out = dir.path().join("out");
    assert_eq!(code(&run("run", &cfg, &out, &[])), 0);
    let text = fs::read_to_string(out.join("tm.csv")).unwrap();
    assert_eq!(text, "n,c0,d_step,d_T_residual,d_companion\n");
    assert_eq!(rows(&out.join("mh.csv")).len(), 0);
}

#[test]
fn harmonic_demo_t_residual_tail_decreases() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let o = run("run", &config_path("harmonic_contraction.toml"), &out, &[]);
    assert_eq!(code(&o), 0);
    let t: Vec<f64> = rows(&out.join("tm.csv")).iter().map(|r| r[3].parse().unwrap()).collect();
    assert_eq!(t.len(), 10_000);
    assert!(t[100..].windows(2).all(|w| w[1] <= w[0]));
    let link = rows(&out.join("link.csv"));
    assert_eq!(&link[0][4], "true");
}

#[test]
fn sabach_demo_envelopes_hold() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let o = run("certify", &config_path("sabach_rotation.toml"), &out, &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let env = rows(&out.join("linear_envelopes.csv"));
    assert_eq!(env.len(), 4);
    assert!(env.iter().all(|r| &r[8] == "true"));
}

#[test]
fn outputs_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let cfg = config_path("sabach_rotation.toml");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        assert_eq!(code(&run("run", &cfg, out, &[])), 0);
        assert_eq!(code(&run("certify", &cfg, out, &["--seed", "4"])), 0);
    }
    let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() > 5);
    for name in names {
        assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap(), "{name:?}");
    }

    // A different seed draws different anchors.
    let c = dir.path().join("c");
    run("run", &cfg, &c, &["--seed", "5"]);
    assert_ne!(fs::read(a.join("tm.csv")).unwrap(), fs::read(c.join("tm.csv")).unwrap());
}

#[test]
fn full_harmonic_suite_passes() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let o = run("certify", &config_path("harmonic_contraction.toml"), &out, &[]);
    assert_eq!(code(&o), 0);
    let summary = rows(&out.join("certify.csv"));
    assert!(summary.iter().all(|r| &r[6] == "true"));
    assert!(summary.iter().any(|r| &r[0] == "mh_sigma_star"));
    let alpha = header(&out.join("cert_alpha.csv"));
    assert_eq!(alpha, ["k", "N", "empirical_margin", "status", "violation_n", "violation_residual"]);
}

#[test]
fn halved_certificate_is_reported() {
    let dir = TempDir::new().unwrap();
    let text = format!("{LINE}[certify]\nhorizon = 20000\ncorrupt = {{ target = \"mh_empirical_t\", mode = \"halve\" }}\n");
    let cfg = write_config(&dir, &text);
    let out = dir.path().join("out");
    assert_eq!(code(&run("certify", &cfg, &out, &[])), 1);
    let bad = rows(&out.join("cert_mh_empirical_t_halved.csv"));
    assert!(bad.iter().any(|r| &r[3] == "fail" && !r[4].is_empty()));

    let text = format!("{LINE}[certify]\nhorizon = 20000\ncorrupt = {{ target = \"alpha\", mode = \"zero\" }}\n");
    let cfg = write_config(&dir, &text);
    assert_eq!(code(&run("certify", &cfg, &dir.path().join("out2"), &[])), 1);

    let text = format!("{LINE}[certify]\nhorizon = 2000\ncorrupt = {{ target = \"nonexistent\", mode = \"zero\" }}\n");
    let cfg = write_config(&dir, &text);
    assert_eq!(code(&run("certify", &cfg, &dir.path().join("out3"), &[])), 2);
}

#[test]
fn m_not_4k_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    // K = 1 here, so rates for (x_n) need M = 4.
    let text = format!("{LINE}[certify]\nhorizon = 2000\nm_const = 8\n");
    let cfg = write_config(&dir, &text);
    let o = run("certify", &cfg, &dir.path().join("out"), &[]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("4K"));

    // Restricted to the rates for (y_n), the same M is fine.
    let text = format!("{LINE}[certify]\nhorizon = 2000\nm_const = 8\nselect = [\"mh_sigma_star\"]\n");
    let cfg = write_config(&dir, &text);
    assert_eq!(code(&run("certify", &cfg, &dir.path().join("out2"), &[])), 0);
}

#[test]
fn meta_on_constant_trajectory() {
    let dir = TempDir::new().unwrap();
    let text = LINE.replace("u = [0.5]\nx0 = [1.0]", "u = [0.0]\nx0 = [0.0]") + "[meta]\nn_steps = 200\ncap = 50\n";
    let cfg = write_config(&dir, &text);
    let out = dir.path().join("out");
    assert_eq!(code(&run("meta", &cfg, &out, &[])), 0);
    let rows = rows(&out.join("meta.csv"));
    assert_eq!(rows.len(), 6 * 4);
    assert!(rows.iter().all(|r| &r[3] == "0" && &r[4] == "0"));
}

#[test]
fn meta_transfer_passes_on_tree() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    assert_eq!(code(&run("meta", &config_path("meta_tree.toml"), &out, &[])), 0);
    let rows = rows(&out.join("meta.csv"));
    assert!(rows.iter().all(|r| &r[6] == "pass"));
    // The auditor's least index agrees with the independent search.
    assert!(rows.iter().all(|r| r[3] == r[4]));
}

#[test]
fn meta_oscillation_has_no_window() {
    let dir = TempDir::new().unwrap();
    // beta = lambda = 1: x_{n+1} = -x_n forever.
    fs::write(dir.path().join("table.csv"), "beta,lambda\n1,1\n").unwrap();
    let text = r#"
[space]
model = "euclidean"
dim = 1
[operator]
kind = "negation"
[schedule]
family = "custom"
beta_table = "table.csv"
moduli = { sigma2 = [1, 0], sigma3 = [0, 0], sigma4 = [1, 0], lambda_cap = 1 }
[anchors]
u = [1.0]
x0 = [1.0]
[meta]
k_max = 1
counters = ["1"]
n_steps = 500
cap = 400
"#;
    let cfg = write_config(&dir, text);
    let out = dir.path().join("out");
    assert_eq!(code(&run("meta", &cfg, &out, &[])), 0);
    let rows = rows(&out.join("meta.csv"));
    let r = rows.iter().find(|r| &r[0] == "1").unwrap();
    assert_eq!(&r[4], "");
    assert_eq!(&r[6], "inconclusive");

    // A finite claim over the same run is refuted.
    let text = text.replace("cap = 400", "cap = 400\nomega = { kind = \"constant\", value = 5 }");
    let cfg = write_config(&dir, &text);
    assert_eq!(code(&run("meta", &cfg, &dir.path().join("out2"), &[])), 1);
}
