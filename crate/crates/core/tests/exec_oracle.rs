mod common;

use std::fs;
use std::process::{Command, Output};

use cocofuzz::coverage::{CoverageOracle, ExecOracle, OracleError};
use cocofuzz::engine::{fuzz_corpus, EngineError, FuzzConfig};
use cocofuzz::report::FuzzReport;

fn mock(mode: &str) -> String {
    let script = common::fixture_dir().join("fixtures/mock_oracle.py");
    format!("python3 {} {mode}", script.display())
}

fn cocofuzz(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cocofuzz")).args(args).output().expect("binary runs")
}

#[test]
fn handshake_and_determinism() {
    let o = ExecOracle::spawn(&mock("ok")).unwrap();
    assert_eq!(o.topology().layers(), &[8, 6]);
    let a = o.activations("int f(){return 1;}").unwrap();
    let b = o.activations("int f(){return 1;}").unwrap();
    assert_eq!(a, b);
    assert!(a.matches(o.topology()));
    assert_ne!(a, o.activations("int f(){return 2;}").unwrap());
}

#[test]
fn campaign_over_exec_oracle_matches_invariants() {
    let seeds = common::corpus_of(20);
    let oracle = ExecOracle::spawn(&mock("ok")).unwrap();
    let cfg = FuzzConfig { master_seed: 5, ..FuzzConfig::default() };
    let runs = fuzz_corpus(&seeds, &oracle, &cfg, 2).unwrap();
    assert_eq!(runs.len(), 20);
    for run in &runs {
        assert!(run.error.is_none());
        assert!(run.tests.len() <= 3);
        let mut prev = run.seed.as_ref().unwrap().baseline_nc.clone();
        for t in &run.tests {
            assert!(t.new_neuron_count >= 1);
            assert!(prev.is_subset(&t.nc_after) && prev.len() < t.nc_after.len());
            prev = t.nc_after.clone();
        }
    }
}

#[test]
fn protocol_violations_abort_the_campaign() {
    let seeds = common::corpus_of(3);
    for mode in ["bad-id", "bad-shape", "crash"] {
        let oracle = ExecOracle::spawn(&mock(mode)).unwrap();
        let err = fuzz_corpus(&seeds, &oracle, &FuzzConfig::default(), 1).unwrap_err();
        assert!(matches!(err, EngineError::Oracle(ref e) if e.is_fatal()), "{mode}: {err}");
    }
}

#[test]
fn rejected_programs_only_stop_their_seed() {
    let seeds = common::corpus_of(71);
    let oracle = ExecOracle::spawn(&mock("reject")).unwrap();
    let runs = fuzz_corpus(&seeds, &oracle, &FuzzConfig::default(), 1).unwrap();
    let stopped = runs.iter().filter(|r| r.error.is_some()).count();
    assert!(stopped > 0 && stopped < runs.len(), "{stopped}");
    let day = runs.iter().find(|r| r.seed_id == "day_name").unwrap();
    assert!(day.seed.is_none() && day.error.as_deref().unwrap().contains("unsupported"));
}

#[test]
fn printf_handshake_errors() {
    for cmd in ["printf 'not json\\n'", "printf '{\"topology\":[]}\\n'", "exit 0"] {
        let err = ExecOracle::spawn(cmd).err().unwrap();
        assert!(matches!(err, OracleError::Protocol(_)), "{cmd}: {err}");
    }
}

#[test]
fn cli_exec_oracle() {
    let ok = mock("ok");
    let o = cocofuzz(&["oracle-check", "--oracle", &format!("exec:{ok}")]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("topology [8, 6]") && text.contains("determinism ok"), "{text}");

    let flaky = mock("flaky");
    assert_eq!(cocofuzz(&["oracle-check", "--oracle", &format!("exec:{flaky}")]).status.code(), Some(3));
    let garbage = "exec:printf 'hello\\n'";
    assert_eq!(cocofuzz(&["oracle-check", "--oracle", garbage]).status.code(), Some(3));

    let corpus = tempfile::tempdir().unwrap();
    let src = common::fixture_dir().join("corpus");
    for name in ["gcd.java", "clamp.java", "grade.java"] {
        fs::copy(src.join(name), corpus.path().join(name)).unwrap();
    }
    let c = corpus.path().to_str().unwrap();
    let o = cocofuzz(&["fuzz", "--corpus", c, "--oracle", &format!("exec:{ok}"), "--seed-rng", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: FuzzReport = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report.topology.layers(), &[8, 6]);
    assert!(report.config.oracle.starts_with("exec:"));
    let bad = mock("bad-id");
    let o = cocofuzz(&["fuzz", "--corpus", c, "--oracle", &format!("exec:{bad}")]);
    assert_eq!(o.status.code(), Some(3));
}
