use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use invharm_cli::exit;
use invharm_cli::output::LOCK_FILE;
use invharm_core::export::read_header;

const FIXTURES: [&str; 5] = ["static_c0", "static_c15", "ramp_mass", "sinusoidal_b", "exponential_omega"];
const GAUSSIAN: &str = "s=-1,h=1/2,branch=+";

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(format!("{name}.cfg"))
}

fn run(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_invharm"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .env_remove("INVHARM_OUT")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn text(o: &Output) -> String {
    format!("{}{}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr))
}

/// Writes a copy of `base` with one textual substitution.
fn variant(dir: &Path, base: &str, from: &str, to: &str) -> PathBuf {
    let original = fs::read_to_string(config(base)).unwrap();
    assert!(original.contains(from), "{from} not in {base}");
    let path = dir.join(format!("{base}_variant.cfg"));
    fs::write(&path, original.replacen(from, to, 1)).unwrap();
    path
}

fn header_value(path: &Path, key: &str) -> Option<String> {
    read_header(&fs::read_to_string(path).unwrap()).into_iter().find(|(k, _)| k == key).map(|(_, v)| v)
}

#[test]
fn fixtures_solve_verify_and_pass_the_oracle() {
    for name in FIXTURES {
        let tmp = tempfile::tempdir().unwrap();
        let out = tmp.path();
        let solved = run(&["solve"], &config(name), out);
        assert_eq!(code(&solved), exit::PASS, "{name}: {}", text(&solved));
        for f in ["trajectory.csv", "field.csv", "scan.csv", "summary.txt"] {
            assert!(out.join(f).exists(), "{name}: missing {f}");
        }
        let summary = fs::read_to_string(out.join("summary.txt")).unwrap();
        assert!(summary.contains(&format!("flags: {GAUSSIAN}")), "{name}: {summary}");
        let digest = header_value(&out.join("trajectory.csv"), "config_digest").unwrap();
        assert_eq!(header_value(&out.join("field.csv"), "config_digest").unwrap(), digest);

        // forcing the scanned flags reproduces the trajectory, so the digest check passes
        let verified = run(&["verify", "--flags", GAUSSIAN], &config(name), out);
        assert_eq!(code(&verified), exit::PASS, "{name}: {}", text(&verified));
        let order: f64 = text(&verified)
            .lines()
            .find_map(|l| l.strip_prefix("empirical order "))
            .and_then(|rest| rest.split_whitespace().next())
            .and_then(|v| v.parse().ok())
            .unwrap();
        assert!((order - 2.0).abs() <= 0.3, "{name}: order {order}");

        let oracle = run(&["oracle", "--flags", GAUSSIAN], &config(name), out);
        assert_eq!(code(&oracle), exit::PASS, "{name}: {}", text(&oracle));
        assert_eq!(header_value(&out.join("fidelity.csv"), "config_digest").unwrap(), digest);
        assert!(!out.join(LOCK_FILE).exists());
    }
}

#[test]
fn zero_coupling_records_integer_order() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["oracle", "--flags", GAUSSIAN], &config("static_c0"), tmp.path());
    assert_eq!(code(&o), exit::PASS, "{}", text(&o));
    assert_eq!(header_value(&tmp.path().join("fidelity.csv"), "nu").unwrap(), "0e0");
}

#[test]
fn missing_coupling_is_a_parse_error_with_line() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = variant(tmp.path(), "static_c15", " C=1.5", "");
    let o = run(&["solve"], &cfg, &tmp.path().join("out"));
    assert_eq!(code(&o), exit::PARSE);
    let msg = text(&o);
    assert!(msg.contains("'C'") && msg.contains("line 6"), "{msg}");
}

#[test]
fn negative_mass_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = variant(tmp.path(), "static_c15", "m0=1", "m0=-1");
    let o = run(&["solve"], &cfg, &tmp.path().join("out"));
    assert_eq!(code(&o), exit::PARSE);
    assert!(text(&o).contains("nonpositive mass"), "{}", text(&o));
}

#[test]
fn single_level_ladder_is_too_coarse() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = variant(tmp.path(), "static_c15", "levels=3", "levels=1");
    let o = run(&["verify", "--flags", GAUSSIAN], &cfg, &tmp.path().join("out"));
    assert_eq!(code(&o), exit::GRID_TOO_COARSE, "{}", text(&o));
}

#[test]
fn wrong_flags_fail_verification_with_table() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["verify", "--flags", "s=+1,h=1,branch=-"], &config("static_c15"), tmp.path());
    assert_eq!(code(&o), exit::VERIFY_FAIL, "{}", text(&o));
    assert!(text(&o).contains("max_rel"));
}

#[test]
fn oversized_oracle_step_is_unstable() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = variant(tmp.path(), "ramp_mass", "dt=1e-4", "dt=0.05");
    let o = run(&["oracle", "--flags", GAUSSIAN], &cfg, &tmp.path().join("out"));
    assert_eq!(code(&o), exit::UNSTABLE, "{}", text(&o));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for out in [&a, &b] {
        assert_eq!(code(&run(&["solve"], &config("sinusoidal_b"), out)), exit::PASS);
    }
    for f in ["trajectory.csv", "field.csv", "scan.csv", "summary.txt"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f} differs");
    }
}

#[test]
fn verify_refuses_artifacts_from_another_config() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    assert_eq!(code(&run(&["solve", "--flags", GAUSSIAN], &config("ramp_mass"), &out)), exit::PASS);
    // same physics, different text: the config digest changes
    let edited = variant(tmp.path(), "ramp_mass", "[mode] k=1 n=1", "[mode] k=1 n=1 # edited");
    let o = run(&["verify", "--flags", GAUSSIAN], &edited, &out);
    assert_eq!(code(&o), exit::VERIFY_FAIL, "{}", text(&o));
    assert!(text(&o).contains("config digest"));

    // same config, different trajectory
    let o = run(&["verify", "--flags", "s=-1,h=1/2,branch=-"], &config("ramp_mass"), &out);
    assert_eq!(code(&o), exit::VERIFY_FAIL, "{}", text(&o));
    assert!(text(&o).contains("trajectory digest"));
}

#[test]
fn locked_output_directory_is_refused() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join(LOCK_FILE), "").unwrap();
    let o = run(&["solve"], &config("static_c15"), tmp.path());
    assert_eq!(code(&o), exit::IO);
    assert!(text(&o).contains("locked"));
    assert!(!tmp.path().join("trajectory.csv").exists());
}

#[test]
fn bessel_table_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let table = |out: &Path| {
        let o = Command::new(env!("CARGO_BIN_EXE_invharm"))
            .args([
                "bessel-table",
                "--orders",
                "0,0.5,2.5",
                "--x-min",
                "0.2",
                "--x-max",
                "40",
                "--points",
                "50",
                "--out",
            ])
            .arg(out)
            .output()
            .unwrap();
        assert_eq!(code(&o), exit::PASS, "{}", text(&o));
        fs::read_to_string(out.join("bessel_table.csv")).unwrap()
    };
    let (a, b) = (table(&tmp.path().join("a")), table(&tmp.path().join("b")));
    assert_eq!(a, b);
    let rows: Vec<&str> = a.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 150);
    for r in rows {
        let defect: f64 = r.rsplit(',').next().unwrap().parse().unwrap();
        assert!(defect < 1e-9, "{r}");
    }
}

#[test]
fn malformed_flags_are_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["verify", "--flags", "s=+1,h=3,branch=-"], &config("static_c15"), tmp.path());
    assert_eq!(code(&o), exit::PARSE);
}
