use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_structvar"));
    c.env_remove("STRUCTVAR_OUT");
    c
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("binary runs")
}

fn run(args: &[&str]) -> Output {
    run_in(&std::env::temp_dir(), args)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn schema(name: &str) -> jsonschema::Validator {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("schemas").join(format!("{name}.schema.json"));
    let s: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&s).expect("schema compiles")
}

fn assert_valid(name: &str, v: &Value) {
    let errs: Vec<String> = schema(name).iter_errors(v).map(|e| format!("{e} at {}", e.instance_path)).collect();
    assert!(errs.is_empty(), "{name}: {errs:#?}");
}

#[test]
fn list_has_twelve_rows() {
    let o = run(&["list"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().count(), 12);
}

#[test]
fn list_filters_by_section() {
    let o = run(&["list", "--section", "5.7"]);
    let ids: Vec<String> = stdout(&o).lines().map(|l| l.split_whitespace().next().unwrap().to_string()).collect();
    assert_eq!(ids, ["fp-nonlinear-1", "fp-nonlinear-2"]);
}

#[test]
fn list_json_validates() {
    let o = run(&["list", "--json"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_valid("list", &v);
    assert_eq!(v.as_array().unwrap().len(), 12);
}

#[test]
fn derive_dissipative_oscillator() {
    let o = run(&["derive", "dissipative-oscillator"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("post-limit: U'(x(t)) + gamma*x'(t) + m*x''(t) = 0"), "{}", stdout(&o));
}

#[test]
fn derive_free_particle_lagrangian() {
    let o = run(&["derive", "--lagrangian", "1/2*m*d(x,t)^2"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("post-limit: m*x''(t) = 0"), "{}", stdout(&o));
}

#[test]
fn derive_with_kernel_override() {
    let o = run(&[
        "derive",
        "--lagrangian",
        "1/2*m*D[conf(1/2,a),t](x)^2",
        "--kernels",
        "x:t=conf(1/2,a)",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("pre-limit"));
}

#[test]
fn derive_no_limit_keeps_interval_terms() {
    let o = run(&["derive", "kdv", "--no-limit"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("pre-limit"));
    assert!(!out.contains("post-limit"));
    // terms proportional to (x - a) and (t - a) survive before the limit
    assert!(out.contains("xa*") && out.contains("t*d(phi(x, t), t, 2)"), "{out}");
}

#[test]
fn derive_json_validates() {
    for id in ["dissipative-oscillator", "llg", "caldirola-kanai"] {
        let o = run(&["derive", id, "--json"]);
        let v: Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_valid("derive", &v);
    }
}

#[test]
fn derive_formats() {
    let o = run(&["derive", "dissipative-oscillator", "--format", "latex"]);
    assert!(stdout(&o).contains("\\frac{d^{2} x}{d t^{2}}"));
    let o = run(&["derive", "dissipative-oscillator", "--format", "sexpr"]);
    assert!(stdout(&o).contains("(fn x ((sym t)) (2))"));
    let o = run(&["derive", "dissipative-oscillator", "--format", "mathml"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn parse_errors_exit_two_and_name_the_input() {
    let o = run(&["derive", "--lagrangian", "1/2*m*d(x,t)^^2"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("error"));
    let o = run(&["derive", "no-such-system"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("no-such-system"), "{}", stderr(&o));
    let o = run(&["derive", "dissipative-oscillator", "--set", "bogus=1"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("bogus"));
}

#[test]
fn engine_errors_exit_three() {
    // second derivatives are outside the admissible Lagrangian form
    let o = run(&["derive", "--lagrangian", "ln(d(x,t))*d(x,t,2)"]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    let o = run(&["derive", "--lagrangian", "1/2*d(x,t)^2", "--kernels", "x:t=conf(3/2,a)"]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
}

#[test]
fn kernel_overrides_are_checked() {
    let o = run(&["derive", "--lagrangian", "1/2*m*d(x,t)^2", "--kernels", "x:s=conf(1/2,a)"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("does not depend on `s`"), "{}", stderr(&o));
    let o = run(&["derive", "--lagrangian", "1/2*m*d(x,t)^2", "--vars", "x(t),x(t)"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn verify_all_matches() {
    let o = run(&["verify", "--all"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().filter(|l| l.ends_with(" MATCH")).count(), 12);
    assert!(out.contains("12/12 MATCH"));
}

#[test]
fn verify_json_validates() {
    let o = run(&["verify", "--all", "--json"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_valid("verify", &v);
    let o = run(&["verify", "kdv", "--printed-target", "--json"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_valid("verify", &v);
    assert_eq!(v[0]["verdict"]["status"], "MISMATCH");
}

#[test]
fn caldirola_kanai_reports_typo_resolution() {
    let o = run(&["verify", "caldirola-kanai"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("MATCH"));
    assert!(stdout(&o).contains("omega0^2 typo resolution applied"));
}

#[test]
fn printed_targets_exit_one_with_a_diff() {
    for id in ["kdv", "abraham-lorentz", "caldirola-kanai"] {
        let o = run(&["verify", id, "--printed-target"]);
        assert_eq!(code(&o), 1, "{id}");
        assert!(stdout(&o).contains("MISMATCH  diff: "), "{id}: {}", stdout(&o));
    }
}

#[test]
fn render_round_trips() {
    let o = run(&["render", "D[conf(1/2,a),t](x)", "--vars", "x(t)", "--format", "sexpr"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let s = stdout(&o);
    let o = run(&["render", s.trim(), "--vars", "x(t)", "--format", "sexpr"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(stdout(&o), s);
    let o = run(&["render", "x^2 + 2*x", "--json"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_valid("expr", &v);
}

#[test]
fn simulate_oscillator_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["simulate", "dissipative-oscillator", "--gamma", "0.2", "--out", "run1/"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("energy monotone: PASS"));
    let csv = std::fs::read_to_string(dir.path().join("run1/dissipative-oscillator.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "t,x,v,E");
    assert_eq!(csv.lines().count(), 20_001 + 1);
    let m: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("run1/manifest.json")).unwrap()).unwrap();
    assert_valid("manifest", &m);
    assert_eq!(m["meta"]["params"]["gamma"], 0.2);
}

#[test]
fn simulate_json_prints_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["--json", "simulate", "caldirola-kanai", "--t1", "1"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_valid("manifest", &v);
}

#[test]
fn simulate_every_numeric_system() {
    let dir = tempfile::tempdir().unwrap();
    let cases: &[&[&str]] = &[
        &["abraham-lorentz", "--t1", "2"],
        &["galley-ald", "--e", "0.1", "--c", "1", "--t1", "2"],
        &["rcd", "--t1", "0.01"],
        &["fp-linear", "--t1", "0.1"],
        &["fp-nonlinear-1", "--t1", "0.1"],
        &["fp-nonlinear-2", "--t1", "0.1"],
        &["kdv", "--t1", "0.1"],
        &["llg", "--t1", "1"],
    ];
    for args in cases {
        let id = args[0];
        let out = dir.path().join(id);
        let mut full = vec!["--out", out.to_str().unwrap(), "simulate"];
        full.extend_from_slice(args);
        let o = run_in(dir.path(), &full);
        assert_eq!(code(&o), 0, "{id}: {}{}", stdout(&o), stderr(&o));
        assert!(!stdout(&o).contains("FAIL"), "{id}: {}", stdout(&o));
        assert!(out.join(format!("{id}.csv")).exists());
        let m: Value = serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
        assert_valid("manifest", &m);
    }
    assert!(dir.path().join("abraham-lorentz/abraham-lorentz_direct.csv").exists());
    assert!(dir.path().join("kdv/kdv_conserved.csv").exists());
}

#[test]
fn simulate_kdv_zabusky_kruskal() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["simulate", "kdv", "--scheme", "zabusky-kruskal", "--t1", "0.2"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let s = stdout(&o);
    assert!(s.contains("mass conserved: PASS") && s.contains("energy conserved: PASS"), "{s}");
    let m: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["meta"]["integrator"], "zabusky-kruskal");
}

#[test]
fn simulate_langevin_writes_msd_and_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["simulate", "langevin", "--N", "200", "--seed", "7", "--t1", "2"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("langevin.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "t,msd,msd_stderr,v2,v2_stderr");
    let m: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["meta"]["seed"], 7);
}

#[test]
fn stochastic_run_without_seed_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["simulate", "langevin", "--N", "10"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("--seed"));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn numeric_failures_exit_four_and_leave_no_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["simulate", "kdv", "--scheme", "zabusky-kruskal", "--dt", "0.05"]);
    assert_eq!(code(&o), 4);
    assert!(stderr(&o).contains("stability bound"));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn unknown_simulation_parameters_are_rejected() {
    let o = run(&["simulate", "kdv", "--bogus", "1"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("bogus"));
    let o = run(&["simulate", "kdv-deformed"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("envout");
    let o = bin()
        .current_dir(dir.path())
        .env("STRUCTVAR_OUT", &target)
        .args(["simulate", "caldirola-kanai", "--t1", "1"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(target.join("caldirola-kanai.csv").exists());
}

fn read(p: &Path) -> Vec<u8> {
    std::fs::read(p).unwrap()
}

#[test]
fn saved_config_replays_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = run_in(
        d,
        &["--out", "a", "--save-config", "run.cfg", "simulate", "langevin", "--N", "300", "--seed", "11", "--t1", "2"],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let cfg = std::fs::read_to_string(d.join("run.cfg")).unwrap();
    assert!(cfg.contains("seed = 11"), "{cfg}");
    let o = run_in(d, &["--config", "run.cfg", "--out", "b"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for f in ["langevin.csv", "manifest.json"] {
        assert_eq!(read(&d.join("a").join(f)), read(&d.join("b").join(f)), "{f} differs");
    }
}

#[test]
fn config_file_values_yield_to_flags() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("osc.cfg"), "command = simulate\nsystem = dissipative-oscillator\ngamma = 0.5\nt1 = 1\n").unwrap();
    let o = run_in(d, &["--config", "osc.cfg", "--out", "x", "simulate", "dissipative-oscillator", "--gamma", "0.25"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let m: Value = serde_json::from_str(&std::fs::read_to_string(d.join("x/manifest.json")).unwrap()).unwrap();
    assert_eq!(m["meta"]["params"]["gamma"], 0.25);
    assert_eq!(m["t1"], 1.0);
    std::fs::write(d.join("bad.cfg"), "gamma 0.5\n").unwrap();
    let o = run_in(d, &["--config", "bad.cfg", "simulate", "dissipative-oscillator"]);
    assert_eq!(code(&o), 2);
}
