use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use multipolar_cli::{cmd_pathlen, cmd_regress, cmd_shuffle, cmd_simulate, cmd_synth, CliError, RunConfig};

fn small(dir: &Path) -> RunConfig {
    let mut c = RunConfig::default();
    c.apply_text("n_agents = 3000\nsynthetic = true\nsynth_n_regions = 150\nsynth_n_municipalities = 15\ntrain_size = 50\n")
        .unwrap();
    c.output_dir = dir.to_path_buf();
    c
}

fn read_dir(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            for (k, v) in read_dir(&path) {
                out.insert(Path::new(path.file_name().unwrap()).join(k), v);
            }
        } else {
            out.insert(PathBuf::from(path.file_name().unwrap()), fs::read(&path).unwrap());
        }
    }
    out
}

fn csv_column(path: &Path, col: &str) -> Vec<String> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let idx = lines.next().unwrap().split(',').position(|h| h == col).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().to_string()).collect()
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        for &k in &idx[i..=j] {
            r[k] = (i + j) as f64 / 2.0;
        }
        i = j + 1;
    }
    r
}

fn spearman(a: &[f64], b: &[f64]) -> f64 {
    let (ra, rb) = (ranks(a), ranks(b));
    let n = a.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

#[test]
fn simulate_writes_report_and_is_repeatable() {
    let tmp = tempfile::tempdir().unwrap();
    let a = small(&tmp.path().join("a"));
    let mut b = a.clone();
    b.output_dir = tmp.path().join("b");
    b.threads = Some(3);
    let m = cmd_simulate(&a).unwrap();
    cmd_simulate(&b).unwrap();
    let files = read_dir(&a.output_dir);
    for name in ["predictions.csv", "histogram_predicted.csv", "histogram_measured.csv", "metrics.txt", "config.txt", "assignment.csv"] {
        assert!(files.contains_key(Path::new(name)), "{name}");
    }
    assert_eq!(files, read_dir(&b.output_dir));
    for key in ["mse_model", "rmse_model", "mse_regression", "stddev_regions", "clamp_count", "iterations_used", "converged"] {
        assert!(m.get(key).is_some(), "{key}");
    }
    assert_eq!(m.get("converged"), Some("true"));
    let metrics = fs::read_to_string(a.output_dir.join("metrics.txt")).unwrap();
    assert!(metrics.lines().all(|l| l.contains('=')));
    assert_eq!(csv_column(&a.output_dir.join("predictions.csv"), "region_id").len(), 150);
}

#[test]
fn config_echo_reproduces_run() {
    let tmp = tempfile::tempdir().unwrap();
    let a = small(&tmp.path().join("a"));
    cmd_simulate(&a).unwrap();
    let mut again = RunConfig::default();
    again.apply_file(&a.output_dir.join("config.txt")).unwrap();
    again.output_dir = tmp.path().join("again");
    cmd_simulate(&again).unwrap();
    assert_eq!(read_dir(&a.output_dir), read_dir(&again.output_dir));
}

#[test]
fn noiseless_synthetic_predictions_are_rank_correlated() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = small(tmp.path());
    c.synth.noise_scale = 0.0;
    cmd_simulate(&c).unwrap();
    let p = tmp.path().join("predictions.csv");
    let parse = |v: Vec<String>| v.iter().map(|s| s.parse::<f64>().unwrap()).collect::<Vec<_>>();
    let predicted = parse(csv_column(&p, "predicted_pct"));
    // Noise-free outcomes are an increasing function of the predictor.
    let measured = parse(csv_column(&p, "measured_pct"));
    let rho = spearman(&predicted, &measured);
    assert!(rho > 0.9, "rank correlation {rho}");
}

#[test]
fn snapshots_follow_cadence() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = small(tmp.path());
    c.snapshot_every = Some(10);
    let m = cmd_simulate(&c).unwrap();
    let iters: usize = m.get("iterations_used").unwrap().parse().unwrap();
    let snaps: Vec<_> = fs::read_dir(tmp.path().join("snapshots")).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(snaps.len(), iters / 10 + 1);
    let last = fs::read_to_string(tmp.path().join("snapshots/final_state.csv")).unwrap();
    assert!(last.starts_with("agent_id,x0,x1\n"));
    assert_eq!(last.lines().count(), 3001);
}

#[test]
fn non_convergence_is_reported_not_fatal() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = small(tmp.path());
    c.max_iterations = 2;
    let m = cmd_simulate(&c).unwrap();
    assert_eq!(m.get("converged"), Some("false"));
    assert_eq!(m.get("iterations_used"), Some("2"));
}

#[test]
fn shuffle_reports_both_arms() {
    let tmp = tempfile::tempdir().unwrap();
    let c = small(tmp.path());
    let m = cmd_shuffle(&c).unwrap();
    for f in ["predictions_clustered.csv", "predictions_shuffled.csv", "histogram_clustered.csv", "histogram_shuffled.csv"] {
        assert!(tmp.path().join(f).exists(), "{f}");
    }
    assert!(m.get_f64("stddev_regions_clustered").unwrap() > m.get_f64("stddev_regions_shuffled").unwrap());
    assert!(m.get_f64("stddev_ratio").unwrap() > 1.0);
}

#[test]
fn shuffle_of_unanimous_input_changes_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = small(tmp.path());
    c.synth.predictor_lo = 1.0;
    c.synth.predictor_hi = 1.0;
    cmd_shuffle(&c).unwrap();
    let a = fs::read(tmp.path().join("predictions_clustered.csv")).unwrap();
    let b = fs::read(tmp.path().join("predictions_shuffled.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn regression_on_exact_line_has_zero_error() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = small(tmp.path());
    c.synth.noise_scale = 0.0;
    let m = cmd_regress(&c).unwrap();
    assert!(m.get_f64("mse_regression").unwrap() < 1e-28);
    assert_eq!(m.get("n_train"), Some("50"));
    assert_eq!(m.get("n_eval"), Some("100"));
    assert_eq!(csv_column(&tmp.path().join("regression.csv"), "predicted_pct").len(), 100);
}

#[test]
fn regression_guards() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = small(tmp.path());
    c.train_size = 150;
    assert!(matches!(cmd_regress(&c), Err(CliError::Core(multipolar::Error::Input(_)))));

    let regions = tmp.path().join("no_outcome.csv");
    fs::write(&regions, "region_id,municipality_id,population,predictor_pct,outcome_pct\na,m,10,50,\nb,m,10,60,\n").unwrap();
    let mut c = RunConfig { regions_path: Some(regions), output_dir: tmp.path().join("o"), ..RunConfig::default() };
    c.synthetic = false;
    let err = cmd_regress(&c).unwrap_err();
    assert_eq!(err.exit_code(), 1);
    assert!(err.to_string().contains("outcome"), "{err}");
}

#[test]
fn pathlen_on_four_cycle() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = RunConfig { output_dir: tmp.path().to_path_buf(), ..RunConfig::default() };
    c.apply_text("n_agents = 4\nk_ring = 2\np_rewire = 0\n").unwrap();
    let m = cmd_pathlen(&c).unwrap();
    assert_eq!(m.get_f64("sampled_path_length"), Some(4.0 / 3.0));
    assert_eq!(m.get_f64("exact_path_length"), Some(4.0 / 3.0));
}

#[test]
fn pathlen_sampled_within_five_percent_at_2000() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = RunConfig { output_dir: tmp.path().to_path_buf(), ..RunConfig::default() };
    c.apply_text("n_agents = 2000\nn_sources = 200\n").unwrap();
    let m = cmd_pathlen(&c).unwrap();
    assert!(m.get_f64("relative_error").unwrap() < 0.05);
}

#[test]
fn synth_defaults_and_reproducibility() {
    let tmp = tempfile::tempdir().unwrap();
    let c = RunConfig { output_dir: tmp.path().join("a"), ..RunConfig::default() };
    let m = cmd_synth(&c).unwrap();
    assert_eq!(m.get("n_regions"), Some("3363"));
    cmd_synth(&RunConfig { output_dir: tmp.path().join("b"), ..c.clone() }).unwrap();
    assert_eq!(read_dir(&tmp.path().join("a")), read_dir(&tmp.path().join("b")));

    let mut flat = c.clone();
    flat.output_dir = tmp.path().join("flat");
    flat.synth.noise_scale = 0.0;
    cmd_synth(&flat).unwrap();
    let file = fs::File::open(flat.output_dir.join("regions.csv")).unwrap();
    let table = multipolar::population::load_regions(file).unwrap();
    for r in table.records() {
        let line = (flat.synth.intercept + flat.synth.slope * r.predictor_rate).clamp(0.0, 1.0);
        assert_eq!(r.outcome_rate, Some(line));
    }
}

#[test]
fn binary_exit_codes() {
    let exe = env!("CARGO_BIN_EXE_multipolar");
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();

    let ok = Command::new(exe)
        .args(["pathlen", "--output", out, "--set", "n_agents=4", "--set", "k_ring=2", "--set", "p_rewire=0"])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("sampled_path_length=1.3333333333333333"));

    let no_regions = Command::new(exe).args(["simulate", "--output", out]).output().unwrap();
    assert_eq!(no_regions.status.code(), Some(1));

    let bad_key = Command::new(exe).args(["synth", "--output", out, "--set", "nope=1"]).output().unwrap();
    assert_eq!(bad_key.status.code(), Some(1));

    let bad_k = Command::new(exe).args(["pathlen", "--output", out, "--set", "k_ring=3", "--set", "n_agents=10"]).output().unwrap();
    assert_eq!(bad_k.status.code(), Some(1));

    let bad_csv = tmp.path().join("bad.csv");
    fs::write(&bad_csv, "region_id,municipality_id,population,predictor_pct,outcome_pct\na,m,10,101,\n").unwrap();
    let parse = Command::new(exe)
        .args(["simulate", "--output", out, "--regions", bad_csv.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(parse.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&parse.stderr).contains("line 2"));

    let cfg = tmp.path().join("run.conf");
    fs::write(&cfg, "n_agents = 1000\nsynth_n_regions = 40\nsynth_n_municipalities = 4\nmax_iterations = 1\n").unwrap();
    let unconverged = Command::new(exe)
        .args(["simulate", "--synthetic", "--threads", "2", "--config", cfg.to_str().unwrap(), "--output", out])
        .output()
        .unwrap();
    assert_eq!(unconverged.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&unconverged.stdout).contains("converged=false"));
}

#[test]
fn numerical_errors_map_to_exit_code_two() {
    assert_eq!(CliError::Core(multipolar::Error::Numerical("nan".into())).exit_code(), 2);
    assert_eq!(CliError::Core(multipolar::Error::Input("x".into())).exit_code(), 1);
    assert_eq!(CliError::Config("x".into()).exit_code(), 1);
}
