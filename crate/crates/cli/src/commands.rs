use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use log::{info, warn};
use multipolar::analysis::{
    dispersion_report, error_metrics, fit_linear, histogram, predict_linear, predicted_rates, prediction_metrics,
    region_means, train_eval_split, write_predictions, ErrorMetrics, RegionPrediction, RegressionModel, DEFAULT_BINS,
};
use multipolar::decimal::fraction_to_percent;
use multipolar::dynamics::{init_opinions, run_with_observer, write_snapshot, RunResult};
use multipolar::graph::{
    exact_average_path_length, generate_watts_strogatz, sampled_average_path_length, write_edge_list, Graph,
    EXACT_PATH_LENGTH_LIMIT,
};
use multipolar::population::{
    allocate_agents, assign_biases, load_regions, save_regions, shuffle_biases, synthesize_regions, write_assignment,
    AgentAllocation, BiasAssignment, RegionTable,
};
use multipolar::rng::derive_seed;

use crate::config::{stream, RunConfig};
use crate::{CliError, Result};

/// Ordered `key=value` summary lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Metrics(Vec<(String, String)>);

impl Metrics {
    pub fn put(&mut self, key: impl Into<String>, value: impl ToString) {
        self.0.push((key.into(), value.to_string()));
    }

    fn put_opt(&mut self, key: impl Into<String>, value: Option<f64>) {
        match value {
            Some(v) => self.put(key, v),
            None => self.put(key, "NA"),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn get_f64(&self, key: &str) -> Option<f64> {
        self.get(key).and_then(|v| v.parse().ok())
    }

    pub fn to_text(&self) -> String {
        self.0.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        context: format!("writing {}", path.display()),
        source,
    }
}

fn write_file<F>(path: &Path, f: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> multipolar::Result<()>,
{
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    f(&mut w)?;
    w.flush().map_err(io_err(path))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(io_err(path))
}

fn prepare_output(cfg: &RunConfig) -> Result<()> {
    fs::create_dir_all(&cfg.output_dir).map_err(io_err(&cfg.output_dir))?;
    write_text(&cfg.output_dir.join("config.txt"), &cfg.to_text())
}

/// Runs `f` on a pool of `cfg.threads` workers, or on the global pool.
fn in_pool<T: Send>(cfg: &RunConfig, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    cfg.validate()?;
    match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(format!("cannot start {n} worker threads: {e}")))?
            .install(f),
        None => f(),
    }
}

fn load_table(cfg: &RunConfig) -> Result<RegionTable> {
    if cfg.synthetic {
        info!("synthesizing {} regions", cfg.synth.n_regions);
        return Ok(synthesize_regions(&cfg.synth_params())?);
    }
    let path = cfg
        .regions_path
        .as_ref()
        .ok_or_else(|| CliError::Config("no region data: set regions_path or pass --synthetic".into()))?;
    let file = File::open(path).map_err(|source| CliError::Io {
        context: format!("reading regions {}", path.display()),
        source,
    })?;
    Ok(load_regions(std::io::BufReader::new(file))?)
}

fn percent_histogram(cfg: &RunConfig, name: &str, rates: impl Iterator<Item = f64>) -> Result<()> {
    let values: Vec<f64> = rates.map(|r| r * 100.0).collect();
    let h = histogram(&values, DEFAULT_BINS, 0.0, 100.0)?;
    write_file(&cfg.output_dir.join(name), |w| h.write_csv(w))
}

/// Everything the dynamics stage needs, built once per seed.
struct Setup {
    graph: Graph,
    alloc: AgentAllocation,
    biases: BiasAssignment,
}

fn build_setup(cfg: &RunConfig, table: &RegionTable, seed: u64) -> Result<Setup> {
    let graph = generate_watts_strogatz(&cfg.graph_params(seed))?;
    let alloc = allocate_agents(table, cfg.n_agents)?;
    let biases = assign_biases(&alloc, table, cfg.epsilon)?;
    Ok(Setup { graph, alloc, biases })
}

fn run_dynamics(cfg: &RunConfig, graph: &Graph, biases: &BiasAssignment, snapshot_dir: Option<&Path>) -> Result<RunResult> {
    let state = init_opinions(graph.n_nodes(), 2, None)?;
    let every = cfg.snapshot_every.filter(|_| snapshot_dir.is_some());
    if let Some(dir) = snapshot_dir.filter(|_| every.is_some()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let result = run_with_observer(state, graph, &biases.bias_matrix(), &cfg.convergence(), |t, s| {
        if let (Some(n), Some(dir)) = (every, snapshot_dir) {
            if t % n == 0 {
                let path = dir.join(format!("state_{t:06}.csv"));
                let file = File::create(&path)?;
                write_snapshot(s, BufWriter::new(file))?;
            }
        }
        Ok(())
    })?;
    if let (Some(_), Some(dir)) = (every, snapshot_dir) {
        write_file(&dir.join("final_state.csv"), |w| write_snapshot(&result.final_state, w))?;
    }
    if result.converged {
        info!("converged after {} iterations (residual {:e})", result.iterations_used, result.final_residual);
    } else {
        warn!(
            "no convergence within {} iterations (residual {:e}); reporting the last state",
            result.iterations_used, result.final_residual
        );
    }
    Ok(result)
}

struct RegressionOutcome {
    model: RegressionModel,
    /// `(region index, prediction, clamped)` over the evaluation set.
    eval: Vec<(usize, f64, bool)>,
    metrics: ErrorMetrics,
    n_without_outcome: usize,
}

impl RegressionOutcome {
    fn clamp_count(&self) -> usize {
        self.eval.iter().filter(|e| e.2).count()
    }
}

fn regression_baseline(cfg: &RunConfig, table: &RegionTable, seed: u64) -> Result<RegressionOutcome> {
    let records = table.records();
    let usable: Vec<usize> = (0..records.len()).filter(|&i| records[i].outcome_rate.is_some()).collect();
    if usable.is_empty() {
        return Err(CliError::Core(multipolar::Error::Input(
            "region data has no outcome_pct values; regression needs measured outcomes".into(),
        )));
    }
    let (train, eval) = train_eval_split(usable.len(), cfg.train_size, cfg.eval_size, derive_seed(seed, stream::SPLIT))?;
    let point = |i: usize| {
        let r = &records[usable[i]];
        (r.predictor_rate, r.outcome_rate.expect("filtered"))
    };
    let model = fit_linear(&train.iter().map(|&i| point(i)).collect::<Vec<_>>())?;
    let eval: Vec<(usize, f64, bool)> = eval
        .iter()
        .map(|&i| {
            let p = predict_linear(&model, point(i).0);
            (usable[i], p.value, p.clamped)
        })
        .collect();
    let metrics = error_metrics(eval.iter().map(|&(r, p, _)| (Some(p), records[r].outcome_rate)))?;
    Ok(RegressionOutcome {
        model,
        eval,
        metrics,
        n_without_outcome: records.len() - usable.len(),
    })
}

fn put_model_metrics(m: &mut Metrics, suffix: &str, predictions: &[RegionPrediction], result: &RunResult) -> Result<()> {
    let model = prediction_metrics(predictions).ok();
    m.put_opt(format!("mse_model{suffix}"), model.map(|e| e.mse));
    m.put_opt(format!("rmse_model{suffix}"), model.map(|e| e.rmse));
    let d = dispersion_report(&predicted_rates(predictions))?;
    m.put(format!("stddev_regions{suffix}"), d.stddev);
    m.put(format!("mean_regions{suffix}"), d.mean);
    m.put(format!("median_regions{suffix}"), d.median);
    m.put(format!("q25_regions{suffix}"), d.q25);
    m.put(format!("q75_regions{suffix}"), d.q75);
    m.put(format!("global_mean_x0{suffix}"), result.final_state.column_mean(0));
    m.put(format!("iterations_used{suffix}"), result.iterations_used);
    m.put(format!("converged{suffix}"), result.converged);
    m.put(format!("final_residual{suffix}"), result.final_residual);
    Ok(())
}

/// Graph, allocation, clustered biases, dynamics, regional report.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<Metrics> {
    in_pool(cfg, || {
        let table = load_table(cfg)?;
        prepare_output(cfg)?;
        let out = &cfg.output_dir;
        let setup = build_setup(cfg, &table, cfg.seed)?;
        if cfg.write_graph {
            write_file(&out.join("graph.txt"), |w| write_edge_list(&setup.graph, w))?;
        }
        if cfg.write_assignment {
            write_file(&out.join("assignment.csv"), |w| write_assignment(&setup.alloc, &table, &setup.biases, w))?;
        }
        let result = run_dynamics(cfg, &setup.graph, &setup.biases, Some(&out.join("snapshots")))?;
        let predictions = region_means(&result.final_state, &setup.alloc, &table)?;
        write_file(&out.join("predictions.csv"), |w| write_predictions(&predictions, w))?;
        percent_histogram(cfg, "histogram_predicted.csv", predicted_rates(&predictions).into_iter())?;
        if table.has_outcomes() {
            percent_histogram(cfg, "histogram_measured.csv", table.records().iter().filter_map(|r| r.outcome_rate))?;
        }

        let mut m = Metrics::default();
        m.put("n_agents", cfg.n_agents);
        m.put("n_regions", table.len());
        m.put("n_empty_regions", predictions.iter().filter(|p| p.predicted_rate.is_none()).count());
        m.put("group_a_fraction", setup.biases.count(multipolar::population::Group::A) as f64 / cfg.n_agents as f64);
        put_model_metrics(&mut m, "", &predictions, &result)?;

        match table.has_outcomes().then(|| regression_baseline(cfg, &table, cfg.seed)) {
            Some(Ok(reg)) => {
                m.put("mse_regression", reg.metrics.mse);
                m.put("rmse_regression", reg.metrics.rmse);
                m.put("clamp_count", reg.clamp_count());
            }
            Some(Err(e)) => {
                warn!("regression baseline skipped: {e}");
                m.put("mse_regression", "NA");
                m.put("rmse_regression", "NA");
                m.put("clamp_count", "NA");
            }
            None => {
                m.put("mse_regression", "NA");
                m.put("rmse_regression", "NA");
                m.put("clamp_count", "NA");
            }
        }

        if cfg.runs > 1 {
            let mut per_run = vec![prediction_metrics(&predictions).ok().map(|e| e.mse)];
            for r in 1..cfg.runs {
                let seed = cfg.seed.wrapping_add(r as u64);
                let s = build_setup(cfg, &table, seed)?;
                let res = run_dynamics(cfg, &s.graph, &s.biases, None)?;
                let p = region_means(&res.final_state, &s.alloc, &table)?;
                per_run.push(prediction_metrics(&p).ok().map(|e| e.mse));
                m.put(format!("converged_run{r}"), res.converged);
            }
            for (r, v) in per_run.iter().enumerate() {
                m.put_opt(format!("mse_model_run{r}"), *v);
            }
            let mean = per_run.iter().copied().collect::<Option<Vec<f64>>>().map(|v| v.iter().sum::<f64>() / v.len() as f64);
            m.put_opt("mse_model_mean", mean);
        }

        write_text(&out.join("metrics.txt"), &m.to_text())?;
        Ok(m)
    })
}

/// Clustered run next to a run with the same labels permuted uniformly.
pub fn cmd_shuffle(cfg: &RunConfig) -> Result<Metrics> {
    in_pool(cfg, || {
        let table = load_table(cfg)?;
        prepare_output(cfg)?;
        let out = &cfg.output_dir;
        let setup = build_setup(cfg, &table, cfg.seed)?;
        let shuffled = shuffle_biases(&setup.biases, derive_seed(cfg.seed, stream::SHUFFLE));
        if cfg.write_graph {
            write_file(&out.join("graph.txt"), |w| write_edge_list(&setup.graph, w))?;
        }
        if cfg.write_assignment {
            write_file(&out.join("assignment_clustered.csv"), |w| write_assignment(&setup.alloc, &table, &setup.biases, w))?;
            write_file(&out.join("assignment_shuffled.csv"), |w| write_assignment(&setup.alloc, &table, &shuffled, w))?;
        }

        let mut m = Metrics::default();
        m.put("n_agents", cfg.n_agents);
        m.put("n_regions", table.len());
        let mut stddevs = Vec::new();
        for (label, biases) in [("clustered", &setup.biases), ("shuffled", &shuffled)] {
            let snapshots = out.join(format!("snapshots_{label}"));
            let result = run_dynamics(cfg, &setup.graph, biases, Some(&snapshots))?;
            let predictions = region_means(&result.final_state, &setup.alloc, &table)?;
            write_file(&out.join(format!("predictions_{label}.csv")), |w| write_predictions(&predictions, w))?;
            percent_histogram(cfg, &format!("histogram_{label}.csv"), predicted_rates(&predictions).into_iter())?;
            put_model_metrics(&mut m, &format!("_{label}"), &predictions, &result)?;
            stddevs.push(dispersion_report(&predicted_rates(&predictions))?.stddev);
        }
        m.put("stddev_ratio", stddevs[0] / stddevs[1]);
        write_text(&out.join("metrics.txt"), &m.to_text())?;
        Ok(m)
    })
}

/// Least-squares baseline on a seeded train/evaluation split.
pub fn cmd_regress(cfg: &RunConfig) -> Result<Metrics> {
    in_pool(cfg, || {
        let table = load_table(cfg)?;
        if !table.has_outcomes() {
            return Err(CliError::Core(multipolar::Error::Input(
                "region data has no outcome_pct values; regression needs measured outcomes".into(),
            )));
        }
        let reg = regression_baseline(cfg, &table, cfg.seed)?;
        prepare_output(cfg)?;
        let out = &cfg.output_dir;
        let records = table.records();
        write_file(&out.join("regression.csv"), |w| {
            writeln!(w, "region_id,predictor_pct,measured_pct,predicted_pct")?;
            for &(r, p, _) in &reg.eval {
                let rec = &records[r];
                writeln!(
                    w,
                    "{},{},{},{}",
                    rec.region_id,
                    fraction_to_percent(rec.predictor_rate),
                    rec.outcome_rate.map(fraction_to_percent).unwrap_or_default(),
                    fraction_to_percent(p)
                )?;
            }
            Ok(())
        })?;
        percent_histogram(cfg, "histogram_regression.csv", reg.eval.iter().map(|e| e.1))?;
        percent_histogram(cfg, "histogram_measured.csv", reg.eval.iter().filter_map(|e| records[e.0].outcome_rate))?;

        let mut m = Metrics::default();
        m.put("n_train", reg.model.n_train);
        m.put("n_eval", reg.eval.len());
        m.put("n_without_outcome", reg.n_without_outcome);
        m.put("slope", reg.model.slope);
        m.put("intercept", reg.model.intercept);
        m.put("mse_regression", reg.metrics.mse);
        m.put("rmse_regression", reg.metrics.rmse);
        m.put("clamp_count", reg.clamp_count());
        write_text(&out.join("metrics.txt"), &m.to_text())?;
        Ok(m)
    })
}

/// Average shortest-path length of the configured graph.
pub fn cmd_pathlen(cfg: &RunConfig) -> Result<Metrics> {
    in_pool(cfg, || {
        let params = cfg.graph_params(cfg.seed);
        let graph = generate_watts_strogatz(&params)?;
        prepare_output(cfg)?;
        if cfg.write_graph {
            write_file(&cfg.output_dir.join("graph.txt"), |w| write_edge_list(&graph, w))?;
        }
        let n_sources = cfg.n_sources.min(graph.n_nodes());
        let sampled = sampled_average_path_length(&graph, n_sources, derive_seed(cfg.seed, stream::SOURCES))?;
        let mut m = Metrics::default();
        m.put("n_nodes", graph.n_nodes());
        m.put("n_edges", graph.n_edges());
        m.put("k_ring", params.k_ring);
        m.put("p_rewire", params.p_rewire);
        m.put("n_sources", n_sources);
        m.put("sampled_path_length", sampled);
        if graph.n_nodes() <= EXACT_PATH_LENGTH_LIMIT {
            let exact = exact_average_path_length(&graph)?;
            m.put("exact_path_length", exact);
            m.put("relative_error", (sampled - exact).abs() / exact);
        }
        write_text(&cfg.output_dir.join("pathlen.txt"), &m.to_text())?;
        Ok(m)
    })
}

/// Writes a synthetic region table.
pub fn cmd_synth(cfg: &RunConfig) -> Result<Metrics> {
    in_pool(cfg, || {
        let table = synthesize_regions(&cfg.synth_params())?;
        prepare_output(cfg)?;
        write_file(&cfg.output_dir.join("regions.csv"), |w| save_regions(&table, w))?;
        let mut m = Metrics::default();
        m.put("n_regions", table.len());
        m.put("total_population", table.total_population());
        m.put("weighted_predictor_mean", table.weighted_predictor_mean());
        Ok(m)
    })
}
