use std::fs;
use std::process::{Command, Output};

fn deeparena(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_deeparena")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn list_scenarios_is_sorted_and_covers_every_environment() {
    let o = deeparena(&["list-scenarios"]);
    assert!(o.status.success());
    let ids: Vec<String> = stdout(&o).lines().map(str::to_string).collect();
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted);
    for prefix in ["DeepMaze-", "DeepLineWars-", "DeepRtsLite-"] {
        assert!(ids.iter().any(|id| id.starts_with(prefix)), "{prefix}");
    }
}

#[test]
fn report_tables_passes_in_text_and_csv() {
    let o = deeparena(&["report-tables"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("10/10 PASS"));
    let o = deeparena(&["report-tables", "--csv"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "group,name,expected,computed,status");
    assert_eq!(rows.len(), 11);
    assert!(rows[1..].iter().all(|r| r.ends_with(",PASS")));
}

#[test]
fn growth_curve_is_csv() {
    let o = deeparena(&["growth-curve", "--sizes", "28,84"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "input_size,total_params\n28,7688960\n84,81089280\n");
}

#[test]
fn bench_reports_and_rejects_bad_input() {
    let o = deeparena(&["bench", "DeepMaze-Deterministic-7x7", "--seconds", "1", "--warmup-ms", "0"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("aggregate:"));
    let o = deeparena(&["bench", "Nope-3x3", "--seconds", "1"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown scenario"));
    let o = deeparena(&["bench", "DeepMaze-Deterministic-7x7", "--seconds", "0"]);
    assert!(!o.status.success());
}

#[test]
fn run_writes_identical_csvs_and_flags_override_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    fs::write(
        &config,
        "scenario = \"DeepMaze-Deterministic-7x7\"\nagent = \"tabular\"\nepisodes = 500\nmax_steps = 200\n\n[hyperparams]\nalpha = 0.5\n",
    )
    .unwrap();
    let mut outputs = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let o = deeparena(&["run", config.to_str().unwrap(), "--episodes", "12", "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let metrics = fs::read_to_string(out.join("metrics.csv")).unwrap();
        outputs.push((metrics, fs::read(out.join("baseline.csv")).unwrap(), fs::read(out.join("summary.csv")).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
    let metrics = &outputs[0].0;
    let lines: Vec<&str> = metrics.lines().collect();
    assert_eq!(lines[0], "schema_version,episode,steps,total_reward,loss_mean,epsilon");
    assert_eq!(lines.len(), 13, "the --episodes flag wins over the file");
    assert!(lines.iter().all(|l| l.split(',').count() == 6));
}

#[test]
fn run_reports_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    fs::write(&config, "scenario = \"DeepMaze-Deterministic-7x7\"\nagent = \"sarsa\"\n").unwrap();
    let o = deeparena(&["run", config.to_str().unwrap()]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("sarsa") && err.contains("line 2"), "{err}");
    let o = deeparena(&["run", dir.path().join("missing.toml").to_str().unwrap()]);
    assert!(!o.status.success());
}
