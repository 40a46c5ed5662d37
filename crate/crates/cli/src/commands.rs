//! Scenario implementations.

use std::path::Path;
use std::time::Instant;

use locent::corr_theorem::check_theorem;
use locent::ent_measures::max_correlation;
use locent::le_engine::{
    entanglement_length, sandwich, EngineConfig, LengthConfig, Method, OracleConfig, SandwichConfig,
};
use locent::qstate::{correlation_matrix, make_cluster, make_ghz, PureState};
use locent::random::DensityEnsemble;
use locent::spin_models::{ground_state, ising_spec, parity_symmetric, SolverConfig};
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::config::{RunConfig, Scenario};
use crate::output::{Cell, Table};
use crate::Failure;

pub const RESULT_COLUMNS: [&str; 16] = [
    "scenario",
    "lambda",
    "i",
    "j",
    "q_xx",
    "q_yy",
    "q_zz",
    "max_correlation",
    "lower",
    "le_estimate",
    "le_method",
    "upper",
    "xi_e",
    "seed",
    "wall_time",
    "note",
];

pub const THEOREM_COLUMNS: [&str; 11] = [
    "scenario",
    "ensemble",
    "samples",
    "seed",
    "violations",
    "min_gain",
    "mean_gain",
    "degenerate",
    "inertia_2_2",
    "wall_time",
    "note",
];

/// Tolerance of the sandwich check on emitted rows.
pub const SANDWICH_TOL: f64 = 1e-9;

/// Largest violation of the non-decrease property accepted by theorem-check.
pub const THEOREM_TOL: f64 = 1e-9;

/// Rows plus a deferred failure that should set the exit status after output.
pub struct Outcome {
    pub table: Table,
    pub failure: Option<Failure>,
}

#[derive(Clone, Debug, Default)]
struct ResultRow {
    lambda: Option<f64>,
    i: Option<usize>,
    j: Option<usize>,
    q: Option<[f64; 3]>,
    max_correlation: Option<f64>,
    lower: Option<f64>,
    le_estimate: Option<f64>,
    le_method: Option<Method>,
    upper: Option<f64>,
    xi_e: Option<f64>,
    wall_time: Option<f64>,
    note: String,
}

impl ResultRow {
    fn cells(&self, cfg: &RunConfig) -> Vec<Cell> {
        let q = |k: usize| Cell::from(self.q.map(|q| q[k]));
        vec![
            cfg.scenario.name().into(),
            self.lambda.into(),
            self.i.map_or(Cell::Empty, Cell::from),
            self.j.map_or(Cell::Empty, Cell::from),
            q(0),
            q(1),
            q(2),
            self.max_correlation.into(),
            self.lower.into(),
            self.le_estimate.into(),
            self.le_method.map_or(Cell::Empty, |m| m.to_string().into()),
            self.upper.into(),
            self.xi_e.into(),
            cfg.seed.into(),
            self.wall_time.into(),
            self.note.clone().into(),
        ]
    }
}

fn sandwich_config(cfg: &RunConfig, parity: bool) -> SandwichConfig {
    SandwichConfig {
        parity_symmetric: parity,
        method: cfg.method,
        engine: EngineConfig::default(),
        oracle: OracleConfig { grid: cfg.grid, ..OracleConfig::default() },
        samples: cfg.samples,
        seed: cfg.seed,
        ..SandwichConfig::default()
    }
}

/// Bounds and estimate for one pair; a row outside its own bounds is an error.
fn pair_row(cfg: &RunConfig, state: &PureState, i: usize, j: usize, parity: bool) -> Result<ResultRow, Failure> {
    let start = Instant::now();
    let cd = correlation_matrix(state, i, j)?;
    let mc = max_correlation(&cd).value;
    let (bounds, result) = sandwich(state, i, j, &sandwich_config(cfg, parity))?;
    let tol = SANDWICH_TOL + 3.0 * result.standard_error.unwrap_or(0.0);
    if !bounds.contains(result.value, tol) {
        return Err(Failure::Invariant(format!(
            "pair ({i},{j}): estimate {} outside [{}, {}]",
            result.value, bounds.lower, bounds.upper
        )));
    }
    let mut note = Vec::new();
    if !result.converged {
        note.push("refinement hit the sweep cap".to_string());
    }
    if let Some(se) = result.standard_error {
        note.push(format!("standard error {}", crate::output::round12(se)));
    }
    Ok(ResultRow {
        i: Some(i),
        j: Some(j),
        q: Some([cd.q[(0, 0)], cd.q[(1, 1)], cd.q[(2, 2)]]),
        max_correlation: Some(mc),
        lower: Some(bounds.lower),
        le_estimate: Some(result.value),
        le_method: Some(result.method),
        upper: Some(bounds.upper),
        wall_time: cfg.timing.then(|| start.elapsed().as_secs_f64()),
        note: note.join("; "),
        ..ResultRow::default()
    })
}

fn default_pair(cfg: &RunConfig) -> (usize, usize) {
    cfg.pair.unwrap_or((0, cfg.n - 1))
}

pub fn ghz(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let state = make_ghz(cfg.n)?;
    let (i, j) = default_pair(cfg);
    let row = pair_row(cfg, &state, i, j, false)?;
    let le = row.le_estimate.unwrap_or(0.0);
    let mut table = Table::new(&RESULT_COLUMNS);
    table.push(row.cells(cfg));
    let failure = (le < 1.0 - 1e-6).then(|| Failure::Invariant(format!("GHZ estimate {le} is below 1")));
    Ok(Outcome { table, failure })
}

pub fn cluster(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let state = make_cluster(cfg.n)?;
    let (i, j) = default_pair(cfg);
    let mut row = pair_row(cfg, &state, i, j, false)?;
    let mut notes = Vec::new();
    if cfg.n < 5 {
        notes.push("n < 5: two-point correlations need not vanish".to_string());
    }
    if row.q.is_some_and(|_| row.max_correlation.unwrap_or(0.0) > 1e-10) {
        notes.push("nonzero two-point correlations".to_string());
    }
    if !row.note.is_empty() {
        notes.push(row.note.clone());
    }
    row.note = notes.join("; ");
    let mut table = Table::new(&RESULT_COLUMNS);
    table.push(row.cells(cfg));
    Ok(Outcome { table, failure: None })
}

/// Central pair at distance `d` on an `n`-site chain.
pub fn central_pair(n: usize, d: usize) -> (usize, usize) {
    let i = (n - d) / 2;
    (i, i + d)
}

fn sweep_point(cfg: &RunConfig, lambda: f64) -> (Vec<ResultRow>, Option<Failure>) {
    let failed = |msg: String, failure: Failure| {
        let rows = cfg
            .distances
            .iter()
            .map(|&d| {
                let (i, j) = central_pair(cfg.n, d);
                ResultRow { lambda: Some(lambda), i: Some(i), j: Some(j), note: msg.clone(), ..ResultRow::default() }
            })
            .collect();
        (rows, Some(failure))
    };
    let start = Instant::now();
    let spec = match ising_spec(cfg.n, lambda, cfg.epsilon_x, cfg.periodic) {
        Ok(s) => s,
        Err(e) => return failed(format!("invalid model: {e}"), Failure::from(e)),
    };
    let gs = match ground_state(&spec, &SolverConfig::default()) {
        Ok(g) => g,
        Err(e) => return failed(format!("solver failure: {e}"), Failure::Solver(e.to_string())),
    };
    let solve_time = start.elapsed().as_secs_f64();
    let parity = parity_symmetric(&spec);
    let mut rows = Vec::new();
    for &d in &cfg.distances {
        let (i, j) = central_pair(cfg.n, d);
        match pair_row(cfg, &gs.state, i, j, parity) {
            Ok(mut row) => {
                row.lambda = Some(lambda);
                row.wall_time = row.wall_time.map(|t| t + solve_time);
                rows.push(row);
            }
            Err(f) => return (rows, Some(f)),
        }
    }
    if cfg.fit_length && cfg.distances.len() >= 3 {
        let series: Vec<(f64, f64)> =
            rows.iter().map(|r| ((r.j.unwrap() - r.i.unwrap()) as f64, r.le_estimate.unwrap_or(0.0))).collect();
        let mut fit_row = ResultRow { lambda: Some(lambda), le_method: rows[0].le_method, ..ResultRow::default() };
        match entanglement_length(&series, &LengthConfig::default()) {
            Ok(fit) => {
                fit_row.xi_e = Some(fit.xi_e);
                let w: Vec<String> = fit.window.iter().map(|d| d.to_string()).collect();
                fit_row.note = format!("xi_e fit of le_estimate over distances {}", w.join(" "));
            }
            Err(e) => fit_row.note = format!("xi_e fit failed: {e}"),
        }
        rows.push(fit_row);
    }
    (rows, None)
}

pub fn ising_sweep(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let points: Vec<(Vec<ResultRow>, Option<Failure>)> =
        cfg.lambdas.par_iter().map(|&lambda| sweep_point(cfg, lambda)).collect();
    let mut table = Table::new(&RESULT_COLUMNS);
    let mut failure = None;
    for (rows, f) in points {
        match f {
            Some(Failure::Invariant(msg)) => return Err(Failure::Invariant(msg)),
            Some(Failure::Validation(msg)) => return Err(Failure::Validation(msg)),
            Some(f) => failure = failure.or(Some(f)),
            None => {}
        }
        for r in rows {
            table.push(r.cells(cfg));
        }
    }
    Ok(Outcome { table, failure })
}

pub fn theorem_check(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let mut table = Table::new(&THEOREM_COLUMNS);
    let mut violations_total = 0;
    for ensemble in &cfg.ensembles {
        let start = Instant::now();
        let stream = DensityEnsemble::ALL.iter().position(|e| e == ensemble).expect("listed") as u64;
        let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
        rng.set_stream(stream);
        let states = (0..cfg.samples).map(|_| ensemble.sample(3, &mut rng)).collect::<Result<Vec<_>, _>>()?;
        let checks = states
            .par_iter()
            .map(|rho| check_theorem(rho, 0, 1, 2))
            .collect::<Result<Vec<_>, _>>()?;
        let gains: Vec<f64> = checks.iter().map(|c| c.gain()).collect();
        let violations = gains.iter().filter(|&&g| g < -THEOREM_TOL).count();
        violations_total += violations;
        let degenerate = checks.iter().filter(|c| c.degenerate).count();
        let inertia = checks.iter().filter(|c| !c.degenerate && c.inertia == (2, 2)).count();
        let min_gain = gains.iter().copied().fold(f64::INFINITY, f64::min);
        let mean_gain = gains.iter().sum::<f64>() / gains.len() as f64;
        table.push(vec![
            cfg.scenario.name().into(),
            ensemble.name().into(),
            cfg.samples.into(),
            cfg.seed.into(),
            violations.into(),
            min_gain.into(),
            mean_gain.into(),
            degenerate.into(),
            inertia.into(),
            Cell::from(cfg.timing.then(|| start.elapsed().as_secs_f64())),
            Cell::Empty,
        ]);
    }
    let failure = (violations_total > 0)
        .then(|| Failure::Invariant(format!("{violations_total} samples lost correlation")));
    Ok(Outcome { table, failure })
}

/// Reads a state file: qubit count, then `2^n` lines of `re im`.
pub fn read_state_file(path: &Path) -> Result<PureState, Failure> {
    let bad = |msg: String| Failure::Validation(format!("state file {}: {msg}", path.display()));
    let text = std::fs::read_to_string(path).map_err(|e| bad(e.to_string()))?;
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let n: usize = lines
        .next()
        .ok_or_else(|| bad("empty file".into()))?
        .parse()
        .map_err(|e| bad(format!("qubit count: {e}")))?;
    if n == 0 || n > locent::qstate::DEFAULT_MAX_QUBITS {
        return Err(bad(format!("qubit count {n} outside 1..={}", locent::qstate::DEFAULT_MAX_QUBITS)));
    }
    let mut amps = Vec::with_capacity(1 << n);
    for (k, line) in lines.enumerate() {
        let parts: Vec<&str> = line.split_whitespace().collect();
        let [re, im] = parts.as_slice() else {
            return Err(bad(format!("amplitude line {}: expected `re im`", k + 1)));
        };
        let re: f64 = re.parse().map_err(|e| bad(format!("amplitude line {}: {e}", k + 1)))?;
        let im: f64 = im.parse().map_err(|e| bad(format!("amplitude line {}: {e}", k + 1)))?;
        amps.push(C64::new(re, im));
    }
    if amps.len() != 1 << n {
        return Err(bad(format!("expected {} amplitudes, found {}", 1usize << n, amps.len())));
    }
    PureState::from_normalized(amps).map_err(|e| bad(e.to_string()))
}

pub fn bounds(cfg: &RunConfig, state_file: &Path) -> Result<Outcome, Failure> {
    let state = read_state_file(state_file)?;
    let n = state.n_qubits();
    if n < 2 {
        return Err(Failure::Validation("state file: need at least 2 qubits".into()));
    }
    let pairs: Vec<(usize, usize)> = match cfg.pair {
        Some((i, j)) => {
            if i >= n || j >= n || i == j {
                return Err(Failure::Validation(format!("invalid --pair: ({i},{j}) for {n} qubits")));
            }
            vec![(i, j)]
        }
        None => (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect(),
    };
    let rows = pairs
        .par_iter()
        .map(|&(i, j)| pair_row(cfg, &state, i, j, false))
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(&RESULT_COLUMNS);
    for r in rows {
        table.push(r.cells(cfg));
    }
    Ok(Outcome { table, failure: None })
}

pub fn run(cfg: &RunConfig, state_file: Option<&Path>) -> Result<Outcome, Failure> {
    match cfg.scenario {
        Scenario::Ghz => ghz(cfg),
        Scenario::Cluster => cluster(cfg),
        Scenario::IsingSweep => ising_sweep(cfg),
        Scenario::TheoremCheck => theorem_check(cfg),
        Scenario::Bounds => bounds(cfg, state_file.expect("bounds takes a state file")),
    }
}
