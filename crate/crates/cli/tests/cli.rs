use std::process::{Command, Output};

fn opaug(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_opaug")).args(args).env_remove("OPAUG_THREADS").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const SMALL: &[&str] = &["--trials", "30", "--samples", "10", "--seed", "7"];

#[test]
fn help_lists_every_tag() {
    let text = stdout(&opaug(&["bench", "--help"]));
    for tag in ["naive", "basic", "ag", "eag", "teag-s:K", "teag-h:K", "asteag:K", "none", "two-point", "gamma", "bernoulli"] {
        assert!(text.contains(tag), "missing {tag}");
    }
}

#[test]
fn bench_writes_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for (i, threads) in ["1", "3", "1"].iter().enumerate() {
        let path = dir.path().join(format!("run{i}.csv"));
        let mut args = vec!["bench", "poisson1d", "--n", "32", "--threads", threads, "--out", path.to_str().unwrap()];
        args.extend_from_slice(SMALL);
        let o = opaug(&args);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push(std::fs::read(&path).unwrap());
    }
    assert!(outputs.iter().all(|o| o == &outputs[0]));
    let csv = String::from_utf8(outputs[0].clone()).unwrap();
    assert!(csv.starts_with("method,order,window,r_mse,r_mse_2sigma,r_emse,r_emse_2sigma,seconds\n"));
    assert_eq!(csv.lines().count(), 13);
    assert!(!dir.path().read_dir().unwrap().any(|e| e.unwrap().file_name().to_string_lossy().starts_with(".tmp")));
}

#[test]
fn every_problem_runs() {
    for (problem, extra) in [
        ("poisson2d", vec!["--nx", "4", "--ny", "3"]),
        ("graph", vec!["--boundary", "5"]),
        ("sparsify", vec!["--edges", "bundled:attachment-300", "--gamma", "0.5"]),
    ] {
        let mut args = vec!["bench", problem, "--methods", "naive,eag,teag-h:2,asteag:2", "--format", "md"];
        args.extend(extra);
        args.extend_from_slice(SMALL);
        let o = opaug(&args);
        assert!(o.status.success(), "{problem}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(stdout(&o).contains("| AST-EAG | 2 |"));
    }
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(&conf, "n = 16\nmethods = naive, teag-s:2,4\ntrials = 20\nsamples = 5\nformat = md\n").unwrap();
    let o = opaug(&["bench", "poisson1d", "--config", conf.to_str().unwrap(), "--format", "csv"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("T-EAG-S,4,soft,"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn configuration_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("bad.conf");
    std::fs::write(&conf, "size = 3\n").unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["bench", "poisson1d", "--noise", "uniform:0,1"],
        vec!["bench", "poisson1d", "--methods", "teag-s:3"],
        vec!["bench", "poisson2d", "--n", "8"],
        vec!["bench", "poisson1d", "--trials", "1"],
        vec!["bench", "graph", "--edges", "/nonexistent/graph.edges"],
        vec!["bench", "poisson1d", "--config", conf.to_str().unwrap()],
        vec!["bench", "poisson1d", "--format", "xml"],
    ];
    for args in cases {
        let o = opaug(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn verify_lemmas_passes() {
    let o = opaug(&["verify", "lemmas", "--seed", "1"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 7);
}

#[test]
fn oracle_prints_exact_values() {
    let o = opaug(&["oracle", "scalar-two-point"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("beta* (energy)       = 0.400000"));
    assert!(text.contains("beta° (AG bound)     = 0.200000"));
    assert!(text.contains("soft chain N=1..6    = 0.100000, 0.316667"));
    assert!(text.contains("hard chain N=1..6    = 0.285714"));
}
