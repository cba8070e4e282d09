use std::fs;
use std::path::Path;
use std::process::Command;

use approx::assert_abs_diff_eq;
use lindblad::cli::{ConjectureOutput, RunConfig, SpectrumOutput, SteadyOutput};
use tempfile::TempDir;

const GENERIC: &str = r#"
[model]
energies = [-0.2, 1.1]

[[model.transitions]]
lower = 0
upper = 1
mu = 0.35
nu = 0.15
gamma = { re = 0.4, im = -0.3 }

[initial]
re = [[0.7, 0.2], [0.2, 0.3]]
im = [[0.0, 0.1], [-0.1, 0.0]]
"#;

const LADDER: &str = r#"
[model]
n = 3
energies = [0.0, 1.0, 2.3]

[[model.transitions]]
lower = 0
upper = 1
mu = 0.4
nu = 0.2
gamma = { re = 0.3, im = 0.1 }

[[model.transitions]]
lower = 1
upper = 2
mu = 0.5
nu = 0.25
gamma = { re = 0.2, im = 0.0 }
"#;

struct Run {
    code: i32,
    stdout: Vec<u8>,
    stderr: String,
}

fn lindblad(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_lindblad"))
        .args(args)
        .output()
        .expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: out.stdout,
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

fn write_config(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn parse_csv(bytes: &[u8]) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut rdr = csv::Reader::from_reader(bytes);
    let header = rdr.headers().unwrap().iter().map(str::to_owned).collect();
    let rows = rdr
        .records()
        .map(|r| r.unwrap().iter().map(|x| x.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn config_round_trips_through_toml() {
    let cfg = RunConfig::parse(GENERIC).unwrap();
    let again = RunConfig::parse(&cfg.to_toml()).unwrap();
    assert_eq!(cfg, again);
    assert_eq!(cfg.to_toml(), again.to_toml());
}

#[test]
fn reports_round_trip_byte_for_byte() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "g.toml", GENERIC);
    let ladder = write_config(&dir, "l.toml", LADDER);

    let spectrum_run = lindblad(&["spectrum", "--config", &cfg]);
    assert_eq!(spectrum_run.code, 0, "{}", spectrum_run.stderr);
    let parsed: SpectrumOutput = serde_json::from_slice(&spectrum_run.stdout).unwrap();
    let mut again = serde_json::to_vec_pretty(&parsed).unwrap();
    again.push(b'\n');
    assert_eq!(spectrum_run.stdout, again);

    let steady = lindblad(&["steady", "--config", &cfg]);
    assert_eq!(steady.code, 0, "{}", steady.stderr);
    let parsed: SteadyOutput = serde_json::from_slice(&steady.stdout).unwrap();
    let mut again = serde_json::to_vec_pretty(&parsed).unwrap();
    again.push(b'\n');
    assert_eq!(steady.stdout, again);

    let conj = lindblad(&["conjecture", "--config", &ladder]);
    assert_eq!(conj.code, 0, "{}", conj.stderr);
    let parsed: ConjectureOutput = serde_json::from_slice(&conj.stdout).unwrap();
    let mut again = serde_json::to_vec_pretty(&parsed).unwrap();
    again.push(b'\n');
    assert_eq!(conj.stdout, again);
}

#[test]
fn out_flag_writes_the_same_bytes_as_stdout() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "g.toml", GENERIC);
    let target = dir.path().join("spectrum.json");
    let to_file = lindblad(&["spectrum", "--config", &cfg, "--out", target.to_str().unwrap()]);
    assert_eq!(to_file.code, 0);
    assert!(to_file.stdout.is_empty());
    let to_stdout = lindblad(&["spectrum", "--config", &cfg]);
    assert_eq!(fs::read(&target).unwrap(), to_stdout.stdout);
}

#[test]
fn negative_rate_is_a_config_error_naming_the_field() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "bad.toml", &GENERIC.replace("mu = 0.35", "mu = -1.0"));
    let r = lindblad(&["spectrum", "--config", &cfg]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("mu"), "{}", r.stderr);
    assert!(r.stdout.is_empty());
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "bad.toml", &GENERIC.replace("mu = 0.35", "mu = 0.35\nmuu = 1.0"));
    assert_eq!(lindblad(&["steady", "--config", &cfg]).code, 2);
}

#[test]
fn unreadable_config_is_a_config_error() {
    let r = lindblad(&["spectrum", "--config", "/nonexistent/run.toml"]);
    assert_eq!(r.code, 2, "{}", r.stderr);
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "g.toml", GENERIC);
    let r = lindblad(&["spectrum", "--config", &cfg, "--out", "/nonexistent/dir/out.json"]);
    assert_eq!(r.code, 1, "{}", r.stderr);
}

#[test]
fn unreachable_tolerance_is_a_numerical_failure() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "g.toml", GENERIC);
    let r = lindblad(&["steady", "--config", &cfg, "--tol", "1e-30"]);
    assert_eq!(r.code, 3, "{}", r.stderr);
    assert!(r.stderr.contains("residual"));
}

#[test]
fn zero_steps_gives_a_single_row_at_the_initial_state() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "g.toml", GENERIC);
    let r = lindblad(&["evolve", "--config", &cfg, "--steps", "0"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let (header, rows) = parse_csv(&r.stdout);
    assert_eq!(
        header,
        ["t", "a_re", "a_im", "b_re", "b_im", "bbar_re", "bbar_im", "d_re", "d_im"]
    );
    assert_eq!(rows, vec![vec![0.0, 0.7, 0.0, 0.2, 0.1, 0.2, -0.1, 0.3, 0.0]]);
}

#[test]
fn expm_and_rk4_trajectories_agree() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "g.toml", GENERIC);
    let common = ["evolve", "--config", &cfg, "--t-max", "5", "--steps", "25"];
    let a = lindblad(&[&common[..], &["--method", "expm"]].concat());
    let b = lindblad(&[&common[..], &["--method", "rk4"]].concat());
    assert_eq!(a.code, 0, "{}", a.stderr);
    assert_eq!(b.code, 0, "{}", b.stderr);
    let (ha, ra) = parse_csv(&a.stdout);
    let (hb, rb) = parse_csv(&b.stdout);
    assert_eq!(ha, hb);
    assert_eq!(ra.len(), 26);
    for (x, y) in ra.iter().zip(&rb) {
        for (p, q) in x.iter().zip(y) {
            assert_abs_diff_eq!(p, q, epsilon = 1e-8);
        }
    }
}

#[test]
fn every_evolved_row_is_a_density_matrix() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "g.toml", GENERIC);
    for method in ["expm", "rk4", "perturbative"] {
        let r = lindblad(&[
            "evolve", "--config", &cfg, "--method", method, "--t-max", "30", "--steps", "60",
        ]);
        assert_eq!(r.code, 0, "{method}: {}", r.stderr);
        let (_, rows) = parse_csv(&r.stdout);
        for row in rows {
            assert_abs_diff_eq!(row[1] + row[7], 1.0, epsilon = 1e-10);
            assert_abs_diff_eq!(row[2], 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(row[3], row[5], epsilon = 1e-12);
            assert_abs_diff_eq!(row[4], -row[6], epsilon = 1e-12);
            let bb = row[3] * row[3] + row[4] * row[4];
            assert!(row[1] >= -1e-10 && row[7] >= -1e-10 && bb <= row[1] * row[7] + 1e-10);
        }
    }
}

#[test]
fn uncoupled_populations_follow_the_rate_equation() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "d.toml",
        &GENERIC.replace("gamma = { re = 0.4, im = -0.3 }", "gamma = { re = 0.0, im = 0.0 }"),
    );
    let r = lindblad(&["evolve", "--config", &cfg, "--t-max", "8", "--steps", "16"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let (_, rows) = parse_csv(&r.stdout);
    let (mu, nu, a0) = (0.35f64, 0.15f64, 0.7f64);
    let a_inf = nu / (mu + nu);
    for row in rows {
        let t = row[0];
        let a = a_inf + (a0 - a_inf) * (-(mu + nu) * t).exp();
        assert_abs_diff_eq!(row[1], a, epsilon = 1e-12);
    }
}

#[test]
fn steady_methods_agree_and_match_the_thermal_populations_when_uncoupled() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "d.toml",
        &GENERIC.replace("gamma = { re = 0.4, im = -0.3 }", "gamma = { re = 0.0, im = 0.0 }"),
    );
    let r = lindblad(&["steady", "--config", &cfg]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let out: SteadyOutput = serde_json::from_slice(&r.stdout).unwrap();
    let names: Vec<_> = out.methods.iter().map(|m| m.method.as_str()).collect();
    assert_eq!(names, ["cofactor", "null-space", "propagate"]);
    for m in &out.methods {
        assert_abs_diff_eq!(m.state.re[0][0], 0.3, epsilon = 1e-8);
        assert_abs_diff_eq!(m.state.re[1][1], 0.7, epsilon = 1e-8);
    }
    assert!(out.pairwise.iter().all(|p| p.max_abs_diff <= 1e-8));
}

#[test]
fn ladder_conjecture_reports_a_rank_one_limit() {
    let dir = TempDir::new().unwrap();
    let ladder = write_config(&dir, "l.toml", LADDER);
    for family in ["per-transition", "collective"] {
        let text = LADDER.replace("n = 3", &format!("n = 3\nfamily = \"{family}\""));
        let cfg = write_config(&dir, &format!("{family}.toml"), &text);
        let r = lindblad(&["conjecture", "--config", &cfg]);
        assert_eq!(r.code, 0, "{family}: {}", r.stderr);
        let out: ConjectureOutput = serde_json::from_slice(&r.stdout).unwrap();
        assert_eq!(out.n, 3);
        assert!(out.pattern_pass && out.equal_final_states_pass, "{family}");
        let trace: f64 = (0..3).map(|k| out.final_state.re[k][k]).sum();
        assert_abs_diff_eq!(trace, 1.0, epsilon = 1e-10);
    }
    let spectrum_run = lindblad(&["spectrum", "--config", &ladder]);
    let out: SpectrumOutput = serde_json::from_slice(&spectrum_run.stdout).unwrap();
    assert_eq!(out.eigenvalues.len(), 9);
    assert!(out.cubic.is_none());
    assert_eq!(out.eigenvalues.iter().filter(|e| e.class == "trivial-zero").count(), 1);
    assert!(out
        .eigenvalues
        .iter()
        .filter(|e| e.class != "trivial-zero")
        .all(|e| e.value.re < 0.0));
}

#[test]
fn verify_is_deterministic_and_passes() {
    let a = lindblad(&["verify", "--seed", "3"]);
    let b = lindblad(&["verify", "--seed", "3"]);
    assert_eq!(a.code, 0, "{}", a.stderr);
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["pass"], true);
}

#[test]
fn golden_fixtures_are_valid_configs() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    for name in ["special", "decoupled", "generic"] {
        let cfg = RunConfig::load(&dir.join(format!("{name}.toml"))).unwrap();
        assert!(cfg.model().is_ok(), "{name}");
    }
}
