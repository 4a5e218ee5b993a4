use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use multipolar::dynamics::ConvergenceSettings;
use multipolar::graph::WattsStrogatzParams;
use multipolar::population::SyntheticDataParams;
use multipolar::rng::derive_seed;

use crate::{CliError, Result};

/// Sub-stream ids for [`derive_seed`].
pub mod stream {
    pub const GRAPH: u64 = 1;
    pub const SHUFFLE: u64 = 2;
    pub const SPLIT: u64 = 3;
    pub const SOURCES: u64 = 4;
    pub const SYNTH: u64 = 5;
}

/// Resolved pipeline settings. Built from defaults, then a flat
/// `key = value` file, then command-line overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n_agents: usize,
    pub k_ring: usize,
    pub p_rewire: f64,
    pub epsilon: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub seed: u64,
    pub regions_path: Option<PathBuf>,
    pub synthetic: bool,
    pub synth: SyntheticDataParams,
    /// `None` derives the generator seed from `seed`.
    pub synth_seed: Option<u64>,
    pub output_dir: PathBuf,
    pub snapshot_every: Option<usize>,
    pub threads: Option<usize>,
    pub train_size: usize,
    /// `None` evaluates on every point not drawn for training.
    pub eval_size: Option<usize>,
    pub n_sources: usize,
    /// Independent simulation repeats (seeds `seed`, `seed + 1`, …) averaged in the metrics.
    pub runs: usize,
    pub write_graph: bool,
    pub write_assignment: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n_agents: 80_000,
            k_ring: 8,
            p_rewire: 0.2,
            epsilon: 0.05,
            tolerance: 1e-8,
            max_iterations: 10_000,
            seed: 1,
            regions_path: None,
            synthetic: false,
            synth: SyntheticDataParams::default(),
            synth_seed: None,
            output_dir: PathBuf::from("out"),
            snapshot_every: None,
            threads: None,
            train_size: 300,
            eval_size: None,
            n_sources: 100,
            runs: 1,
            write_graph: false,
            write_assignment: true,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| CliError::Config(format!("invalid value {value:?} for {key}")))
}

fn parse_optional<T: FromStr>(key: &str, value: &str) -> Result<Option<T>> {
    match value {
        "" | "none" => Ok(None),
        v => parse(key, v).map(Some),
    }
}

fn show<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "none".to_string(), T::to_string)
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "n_agents" => self.n_agents = parse(key, v)?,
            "k_ring" => self.k_ring = parse(key, v)?,
            "p_rewire" => self.p_rewire = parse(key, v)?,
            "epsilon" => self.epsilon = parse(key, v)?,
            "tolerance" => self.tolerance = parse(key, v)?,
            "max_iterations" => self.max_iterations = parse(key, v)?,
            "seed" => self.seed = parse(key, v)?,
            "regions_path" => self.regions_path = (!v.is_empty() && v != "none").then(|| PathBuf::from(v)),
            "synthetic" => self.synthetic = parse(key, v)?,
            "synth_seed" => self.synth_seed = parse_optional(key, v)?,
            "synth_n_regions" => self.synth.n_regions = parse(key, v)?,
            "synth_n_municipalities" => self.synth.n_municipalities = parse(key, v)?,
            "synth_slope" => self.synth.slope = parse(key, v)?,
            "synth_intercept" => self.synth.intercept = parse(key, v)?,
            "synth_noise_scale" => self.synth.noise_scale = parse(key, v)?,
            "synth_heteroscedastic_center" => self.synth.heteroscedastic_center = parse(key, v)?,
            "synth_heteroscedastic_gain" => self.synth.heteroscedastic_gain = parse(key, v)?,
            "synth_predictor_lo" => self.synth.predictor_lo = parse(key, v)?,
            "synth_predictor_hi" => self.synth.predictor_hi = parse(key, v)?,
            "synth_municipality_spread" => self.synth.municipality_spread = parse(key, v)?,
            "synth_population_min" => self.synth.population_min = parse(key, v)?,
            "synth_population_max" => self.synth.population_max = parse(key, v)?,
            "output_dir" => self.output_dir = PathBuf::from(v),
            "snapshot_every" => self.snapshot_every = parse_optional(key, v)?,
            "threads" => self.threads = parse_optional(key, v)?,
            "train_size" => self.train_size = parse(key, v)?,
            "eval_size" => self.eval_size = parse_optional(key, v)?,
            "n_sources" => self.n_sources = parse(key, v)?,
            "runs" => self.runs = parse(key, v)?,
            "write_graph" => self.write_graph = parse(key, v)?,
            "write_assignment" => self.write_assignment = parse(key, v)?,
            other => return Err(CliError::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Applies a flat `key = value` text; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (idx, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", idx + 1)))?;
            self.set(key, value)
                .map_err(|e| CliError::Config(format!("line {}: {}", idx + 1, e.to_string().trim_start_matches("config: "))))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            context: format!("reading config {}", path.display()),
            source,
        })?;
        self.apply_text(&text)
    }

    /// Every setting that influences results, resolved; feeding this back
    /// through [`RunConfig::apply_text`] reproduces the run. The output
    /// directory and worker count are left out since outputs do not depend
    /// on them.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("n_agents", self.n_agents.to_string());
        put("k_ring", self.k_ring.to_string());
        put("p_rewire", self.p_rewire.to_string());
        put("epsilon", self.epsilon.to_string());
        put("tolerance", self.tolerance.to_string());
        put("max_iterations", self.max_iterations.to_string());
        put("seed", self.seed.to_string());
        put("regions_path", self.regions_path.as_ref().map_or("none".into(), |p| p.display().to_string()));
        put("synthetic", self.synthetic.to_string());
        put("synth_seed", self.synth_params().seed.to_string());
        put("synth_n_regions", self.synth.n_regions.to_string());
        put("synth_n_municipalities", self.synth.n_municipalities.to_string());
        put("synth_slope", self.synth.slope.to_string());
        put("synth_intercept", self.synth.intercept.to_string());
        put("synth_noise_scale", self.synth.noise_scale.to_string());
        put("synth_heteroscedastic_center", self.synth.heteroscedastic_center.to_string());
        put("synth_heteroscedastic_gain", self.synth.heteroscedastic_gain.to_string());
        put("synth_predictor_lo", self.synth.predictor_lo.to_string());
        put("synth_predictor_hi", self.synth.predictor_hi.to_string());
        put("synth_municipality_spread", self.synth.municipality_spread.to_string());
        put("synth_population_min", self.synth.population_min.to_string());
        put("synth_population_max", self.synth.population_max.to_string());
        put("snapshot_every", show(&self.snapshot_every));
        put("train_size", self.train_size.to_string());
        put("eval_size", show(&self.eval_size));
        put("n_sources", self.n_sources.to_string());
        put("runs", self.runs.to_string());
        put("write_graph", self.write_graph.to_string());
        put("write_assignment", self.write_assignment.to_string());
        s
    }

    pub fn graph_params(&self, seed: u64) -> WattsStrogatzParams {
        WattsStrogatzParams::new(self.n_agents, self.k_ring, self.p_rewire, derive_seed(seed, stream::GRAPH))
    }

    pub fn convergence(&self) -> ConvergenceSettings {
        ConvergenceSettings {
            tolerance: self.tolerance,
            max_iterations: self.max_iterations,
        }
    }

    pub fn synth_params(&self) -> SyntheticDataParams {
        SyntheticDataParams {
            seed: self.synth_seed.unwrap_or_else(|| derive_seed(self.seed, stream::SYNTH)),
            ..self.synth.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(CliError::Config("runs must be at least 1".into()));
        }
        if self.snapshot_every == Some(0) {
            return Err(CliError::Config("snapshot_every must be positive".into()));
        }
        if self.threads == Some(0) {
            return Err(CliError::Config("threads must be positive".into()));
        }
        if self.n_sources == 0 {
            return Err(CliError::Config("n_sources must be positive".into()));
        }
        Ok(())
    }
}
