//! Run configuration: defaults, TOML file, command-line flags.

use std::path::{Path, PathBuf};

use clap::Args;
use locent::le_engine::Method;
use locent::random::DensityEnsemble;
use serde::Deserialize;

use crate::Failure;

/// Settings shared by every command. Each one may also come from `--config`.
#[derive(Args, Clone, Debug, Default)]
pub struct Flags {
    /// Number of qubits.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Pair of sites, e.g. `0,7`.
    #[arg(long, global = true)]
    pub pair: Option<String>,
    /// Coupling grid `start:stop:step` (or a single value).
    #[arg(long = "lambda-grid", global = true)]
    pub lambda_grid: Option<String>,
    /// Comma-separated pair distances.
    #[arg(long, global = true)]
    pub distances: Option<String>,
    /// Uniform x field that breaks the parity symmetry.
    #[arg(long = "epsilon-x", global = true, allow_negative_numbers = true)]
    pub epsilon_x: Option<f64>,
    /// Close the chain into a ring.
    #[arg(long, global = true)]
    pub periodic: bool,
    /// Engine method: constructive, refined, oracle or sampled.
    #[arg(long, global = true)]
    pub method: Option<String>,
    /// Angular resolution of the grid oracle.
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// Number of samples (sampled method, theorem-check).
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format: csv or json.
    #[arg(long, global = true)]
    pub format: Option<String>,
    /// TOML file with default values for these flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Comma-separated density ensembles for theorem-check.
    #[arg(long, global = true)]
    pub ensembles: Option<String>,
    /// Add an entanglement-length fit row per coupling (ising-sweep).
    #[arg(long = "fit-length", global = true)]
    pub fit_length: bool,
    /// Record wall-clock time per row (makes output run-dependent).
    #[arg(long, global = true)]
    pub timing: bool,
}

/// Keys accepted in a `--config` file.
#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub n: Option<usize>,
    pub pair: Option<[usize; 2]>,
    pub lambda_grid: Option<String>,
    pub distances: Option<Vec<usize>>,
    pub epsilon_x: Option<f64>,
    pub periodic: Option<bool>,
    pub method: Option<String>,
    pub grid: Option<usize>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
    pub ensembles: Option<Vec<String>>,
    pub fit_length: Option<bool>,
    pub timing: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Validation(format!("--config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Failure::Validation(format!("--config {}: {e}", path.display())))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scenario {
    Ghz,
    Cluster,
    IsingSweep,
    TheoremCheck,
    Bounds,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Ghz => "ghz",
            Scenario::Cluster => "cluster",
            Scenario::IsingSweep => "ising-sweep",
            Scenario::TheoremCheck => "theorem-check",
            Scenario::Bounds => "bounds",
        }
    }

    fn default_n(self) -> usize {
        match self {
            Scenario::Ghz => 8,
            Scenario::Cluster => 5,
            _ => 14,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Effective settings after merging flags, file and defaults.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub n: usize,
    pub pair: Option<(usize, usize)>,
    pub lambda_grid: String,
    pub lambdas: Vec<f64>,
    pub distances: Vec<usize>,
    pub epsilon_x: f64,
    pub periodic: bool,
    pub method: Option<Method>,
    pub grid: usize,
    pub samples: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub ensembles: Vec<DensityEnsemble>,
    pub fit_length: bool,
    pub timing: bool,
}

fn invalid(field: &str, msg: impl std::fmt::Display) -> Failure {
    Failure::Validation(format!("invalid {field}: {msg}"))
}

pub fn parse_pair(s: &str) -> Result<(usize, usize), Failure> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => {
            let a = a.parse().map_err(|e| invalid("--pair", e))?;
            let b = b.parse().map_err(|e| invalid("--pair", e))?;
            Ok((a, b))
        }
        _ => Err(invalid("--pair", format!("expected `i,j`, got {s:?}"))),
    }
}

fn parse_list<T: std::str::FromStr>(field: &str, s: &str) -> Result<Vec<T>, Failure>
where
    T::Err: std::fmt::Display,
{
    s.split(',').map(|p| p.trim().parse::<T>().map_err(|e| invalid(field, format!("{p:?}: {e}")))).collect()
}

/// Expands `start:stop:step` (inclusive of `stop`) or a single value.
pub fn parse_lambda_grid(s: &str) -> Result<Vec<f64>, Failure> {
    let field = "--lambda-grid";
    let nums: Vec<f64> = parse_list::<f64>(field, &s.replace(':', ","))?;
    let values = match nums.as_slice() {
        [v] => vec![*v],
        [start, stop, step] => {
            if step.is_nan() || *step <= 0.0 {
                return Err(invalid(field, "step must be positive"));
            }
            if stop < start {
                return Err(invalid(field, "stop is below start"));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            if count > 100_000 {
                return Err(invalid(field, format!("{count} points is too many")));
            }
            (0..count)
                .map(|k| {
                    let v = start + k as f64 * step;
                    format!("{v:.12e}").parse::<f64>().expect("formatted float")
                })
                .collect()
        }
        _ => return Err(invalid(field, format!("expected start:stop:step, got {s:?}"))),
    };
    if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(invalid(field, "values must be finite and nonnegative"));
    }
    Ok(values)
}

impl RunConfig {
    pub fn resolve(scenario: Scenario, flags: &Flags) -> Result<Self, Failure> {
        let file = match &flags.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let n = flags.n.or(file.n).unwrap_or(scenario.default_n());
        let pair = match (&flags.pair, file.pair) {
            (Some(s), _) => Some(parse_pair(s)?),
            (None, Some([a, b])) => Some((a, b)),
            (None, None) => None,
        };
        let lambda_grid = flags.lambda_grid.clone().or(file.lambda_grid).unwrap_or_else(|| "1".into());
        let lambdas = parse_lambda_grid(&lambda_grid)?;
        let distances = match (&flags.distances, file.distances) {
            (Some(s), _) => parse_list::<usize>("--distances", s)?,
            (None, Some(v)) => v,
            (None, None) => (1..=n.saturating_sub(1).min(6)).collect(),
        };
        let epsilon_x = flags.epsilon_x.or(file.epsilon_x).unwrap_or(0.0);
        if !epsilon_x.is_finite() {
            return Err(invalid("--epsilon-x", "must be finite"));
        }
        let method = match flags.method.clone().or(file.method) {
            Some(m) => Some(m.parse::<Method>().map_err(|e| invalid("--method", e))?),
            None => None,
        };
        let format = match flags.format.clone().or(file.format).as_deref() {
            None | Some("csv") => Format::Csv,
            Some("json") => Format::Json,
            Some(other) => return Err(invalid("--format", format!("{other:?} (expected csv or json)"))),
        };
        let ensembles = match (&flags.ensembles, file.ensembles) {
            (Some(s), _) => parse_list::<DensityEnsemble>("--ensembles", s)?,
            (None, Some(v)) => v
                .iter()
                .map(|e| e.parse().map_err(|err| invalid("--ensembles", err)))
                .collect::<Result<_, _>>()?,
            (None, None) => DensityEnsemble::ALL.to_vec(),
        };
        let default_samples = if scenario == Scenario::TheoremCheck { 10_000 } else { 1000 };
        let cfg = RunConfig {
            scenario,
            n,
            pair,
            lambda_grid,
            lambdas,
            distances,
            epsilon_x,
            periodic: flags.periodic || file.periodic.unwrap_or(false),
            method,
            grid: flags.grid.or(file.grid).unwrap_or(24),
            samples: flags.samples.or(file.samples).unwrap_or(default_samples),
            seed: flags.seed.or(file.seed).unwrap_or(0),
            out: flags.out.clone().or(file.out),
            format,
            ensembles,
            fit_length: flags.fit_length || file.fit_length.unwrap_or(false),
            timing: flags.timing || file.timing.unwrap_or(false),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), Failure> {
        if self.samples == 0 {
            return Err(invalid("--samples", "must be at least 1"));
        }
        if self.grid == 0 {
            return Err(invalid("--grid", "must be at least 1"));
        }
        if self.ensembles.is_empty() {
            return Err(invalid("--ensembles", "list is empty"));
        }
        if matches!(self.scenario, Scenario::TheoremCheck | Scenario::Bounds) {
            return Ok(());
        }
        if self.n < 3 {
            return Err(invalid("--n", format!("{} leaves no assisting qubit (need at least 3)", self.n)));
        }
        if self.n > locent::qstate::DEFAULT_MAX_QUBITS {
            return Err(invalid("--n", format!("{} exceeds {}", self.n, locent::qstate::DEFAULT_MAX_QUBITS)));
        }
        if let Some((i, j)) = self.pair {
            if i >= self.n || j >= self.n || i == j {
                return Err(invalid("--pair", format!("({i},{j}) is not a pair of distinct sites below {}", self.n)));
            }
        }
        if self.scenario == Scenario::IsingSweep {
            if self.distances.is_empty() {
                return Err(invalid("--distances", "list is empty"));
            }
            if let Some(d) = self.distances.iter().find(|&&d| d == 0 || d >= self.n) {
                return Err(invalid("--distances", format!("{d} is outside 1..{}", self.n)));
            }
        }
        Ok(())
    }

    /// `key = value` lines describing the run, written as CSV comments.
    pub fn echo(&self) -> Vec<(String, String)> {
        let mut out = vec![("scenario".to_string(), self.scenario.name().to_string())];
        let mut push = |k: &str, v: String| out.push((k.to_string(), v));
        match self.scenario {
            Scenario::TheoremCheck => {
                let names: Vec<&str> = self.ensembles.iter().map(|e| e.name()).collect();
                push("ensembles", names.join(","));
                push("samples", self.samples.to_string());
                push("seed", self.seed.to_string());
            }
            _ => {
                push("n", self.n.to_string());
                if let Some((i, j)) = self.pair {
                    push("pair", format!("{i},{j}"));
                }
                if self.scenario == Scenario::IsingSweep {
                    push("lambda_grid", self.lambda_grid.clone());
                    let d: Vec<String> = self.distances.iter().map(|d| d.to_string()).collect();
                    push("distances", d.join(","));
                    push("epsilon_x", format!("{}", self.epsilon_x));
                    push("periodic", self.periodic.to_string());
                    push("fit_length", self.fit_length.to_string());
                }
                push("method", self.method.map_or("auto".to_string(), |m| m.to_string()));
                push("grid", self.grid.to_string());
                push("samples", self.samples.to_string());
                push("seed", self.seed.to_string());
            }
        }
        push("timing", self.timing.to_string());
        out
    }
}
