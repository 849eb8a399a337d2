use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_magnon-bath"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("magnon-bath-{}-{name}", std::process::id()))
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let idx = lines.next().unwrap().split(',').position(|c| c == name).expect("column present");
    lines.map(|l| l.split(',').nth(idx).unwrap().parse().unwrap()).collect()
}

#[test]
fn chain_self_energy_curve() {
    let out = stdout(&run(&["self-energy", "--d", "1", "--J", "0.5", "--g", "1", "--h", "8", "--S", "1", "--gz", "1", "--eps-grid", "0:20:0.01"]));
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("eps,re,im"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2001);
    // Flat Re Σ = g²/J inside the band, NaN at the two branch points.
    let mid = rows.iter().find(|r| r[0] == "10").unwrap();
    assert_eq!(mid[1], "2");
    assert_eq!(rows.iter().filter(|r| r[1] == "nan").count(), 2);
}

#[test]
fn usage_and_domain_exit_codes() {
    assert_eq!(run(&["rates", "--t-grid", "3:1:0.1"]).status.code(), Some(2));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(run(&["markov", "--omega0"]).status.code(), Some(2));
    assert_eq!(run(&["markov", "--d", "4"]).status.code(), Some(3));
    assert_eq!(run(&["markov", "--gz", "0.5"]).status.code(), Some(3));
    assert_eq!(run(&["perturbative", "--t-grid", "0:1:0.5", "--temperature", "1", "--h", "-3"]).status.code(), Some(3));
    assert_eq!(run(&["markov", "--config", "/nonexistent/config.json"]).status.code(), Some(2));
    let help = run(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
}

#[test]
fn config_file_round_trips_byte_for_byte() {
    let flags = ["rates", "--d", "1", "--g", "1", "--h", "0.1", "--omega0", "3", "--t-grid", "0:5:0.25", "--units", "J"];
    let direct = run(&flags);
    let path = scratch("config.json");
    std::fs::write(&path, r#"{"d": 1, "g": 1, "h": 0.1, "omega0": 3, "t-grid": "0:5:0.25", "units": "J"}"#).unwrap();
    let via_config = run(&["rates", "--config", path.to_str().unwrap()]);
    assert_eq!(stdout(&direct), stdout(&via_config));

    // Explicit flags override the file.
    let overridden = run(&["rates", "--config", path.to_str().unwrap(), "--h", "3"]);
    let expected = run(&["rates", "--d", "1", "--g", "1", "--h", "3", "--omega0", "3", "--t-grid", "0:5:0.25", "--units", "J"]);
    assert_eq!(stdout(&overridden), stdout(&expected));
    std::fs::remove_file(path).ok();
}

#[test]
fn json_mirrors_csv() {
    let args = ["zeno", "--g", "1", "--h", "3", "--omega0", "2", "--tau-grid", "0.5:3:0.5"];
    let csv = stdout(&run(&args));
    let json = stdout(&run(&[&args[..], &["--format", "json"]].concat()));
    let records: serde_json::Value = serde_json::from_str(&json).unwrap();
    let records = records.as_array().unwrap();
    let kappa_eff = column(&csv, "kappa_eff");
    assert_eq!(records.len(), kappa_eff.len());
    for (r, k) in records.iter().zip(&kappa_eff) {
        assert_eq!(r["kappa_eff"].as_f64().unwrap(), *k);
        assert!(*k >= 0.0);
    }
    let keys: Vec<&String> = records[0].as_object().unwrap().keys().collect();
    assert_eq!(keys, ["tau", "kappa", "kappa_eff", "saturated", "kappa_eff_weak"]);
}

#[test]
fn sweep_order_is_independent_of_thread_count() {
    let args = ["sweep", "--over", "h", "--grid", "0:6:0.5", "--observable", "rho11", "--t", "5"];
    let one = bin().args(args).env("MAGNON_BATH_THREADS", "1").output().unwrap();
    let four = bin().args(args).env("MAGNON_BATH_THREADS", "4").output().unwrap();
    assert_eq!(stdout(&one), stdout(&four));
    assert_eq!(column(&stdout(&one), "value"), (0..=12).map(|i| 0.5 * i as f64).collect::<Vec<_>>());
    let bad = bin().args(args).env("MAGNON_BATH_THREADS", "zero").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn out_flag_writes_the_table() {
    let path = scratch("markov.csv");
    let out = run(&["markov", "--g", "0.1", "--h", "1", "--omega0", "3", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("kappa,xi,divergent\n"));
    std::fs::remove_file(path).ok();
}

#[test]
fn j_units_rescale_energies_and_times() {
    // J = 2 with --units J is the J = 2 model at doubled energies and halved times.
    let scaled = stdout(&run(&["rates", "--J", "2", "--units", "J", "--g", "0.5", "--h", "0.5", "--omega0", "1.5", "--t-grid", "0:4:1"]));
    let raw = stdout(&run(&["rates", "--J", "2", "--g", "1", "--h", "1", "--omega0", "3", "--t-grid", "0:2:0.5"]));
    for (a, b) in column(&scaled, "kappa").iter().zip(column(&raw, "kappa")) {
        assert!((a - b / 2.0).abs() < 1e-9, "{a} vs {b}");
    }
    assert_eq!(column(&scaled, "t"), vec![0.0, 1.0, 2.0, 3.0, 4.0]);
}

#[test]
fn markov_resonance_is_flagged() {
    let out = stdout(&run(&["markov", "--g", "0.1", "--h", "3", "--omega0", "3"]));
    assert_eq!(out, "kappa,xi,divergent\ninf,-inf,1\n");
    let square = stdout(&run(&["markov", "--d", "2", "--g", "0.1", "--h", "5", "--omega0", "5"]));
    assert!(square.starts_with("kappa,xi,divergent\n0.04,-inf,1"));
}

#[test]
fn oracle_compare_agrees_on_short_times() {
    let out = stdout(&run(&["oracle-compare", "--g", "1", "--h", "0.1", "--t-grid", "0:10:0.5", "--n-modes", "1024"]));
    assert!(column(&out, "abs_err").iter().all(|&e| e < 1e-9));
}
