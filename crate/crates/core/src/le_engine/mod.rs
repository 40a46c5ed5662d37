//! Localizable entanglement: outcome trees, strategies and estimates.
//!
//! A strategy measures the assisting qubits one at a time in a fixed order.
//! In an adaptive plan the direction for the `d`-th measured qubit depends on
//! the earlier outcomes; the tree is stored in heap order, the node for depth
//! `d` and outcome path `s` (bit `d-1-t` set when outcome `t` was `-`) at
//! index `2^d - 1 + s`.
//!
//! Averages are accumulated as `(+ subtree) + (- subtree)` at every node, so
//! parallel and sequential runs produce identical floating-point results.

mod constructive;
mod length;
mod node;
mod oracle;
mod refine;
mod sampled;
mod search;

use std::fmt;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::ent_measures::{
    assistance_upper_bound, concurrence_pure, max_correlation, parity_bounds, BoundMethod, BoundsRecord,
};
use crate::error::{Error, Result};
use crate::par;
use crate::qstate::{correlation_matrix, reduced_density, MeasurementDirection, PureState};

pub use constructive::{le_constructive, plan_constructive};
pub use length::{entanglement_length, linear_fit, LengthConfig, LengthFit};
pub use oracle::{grid_directions, le_grid_oracle, OracleConfig};
pub use refine::{le_refine, RefineConfig};
pub use sampled::{le_sampled, SampleStrategy};

use node::Node;

/// Largest number of assisting qubits whose outcome tree is enumerated.
pub const DEFAULT_ENUMERATION_LIMIT: usize = 16;

/// Subtrees with at least this many amplitudes are split across threads.
const PARALLEL_CUTOFF: usize = 1 << 9;

/// How the engine arrived at a value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Oracle,
    Constructive,
    Refined,
    Sampled,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Oracle => "oracle",
            Method::Constructive => "constructive",
            Method::Refined => "refined",
            Method::Sampled => "sampled",
        })
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "oracle" => Ok(Method::Oracle),
            "constructive" => Ok(Method::Constructive),
            "refined" => Ok(Method::Refined),
            "sampled" => Ok(Method::Sampled),
            other => Err(Error::Parse(format!("unknown method {other:?}"))),
        }
    }
}

/// Order in which the assisting qubits are measured.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderRule {
    /// Ascending distance from the segment between `i` and `j`, ties by index.
    #[default]
    Segment,
    /// Ascending site index.
    Ascending,
    Explicit(Vec<usize>),
}

impl OrderRule {
    pub fn order(&self, n: usize, i: usize, j: usize) -> Result<Vec<usize>> {
        check_pair(n, i, j)?;
        let assisting = (0..n).filter(|&k| k != i && k != j);
        match self {
            OrderRule::Ascending => Ok(assisting.collect()),
            OrderRule::Segment => {
                let (lo, hi) = (i.min(j), i.max(j));
                let dist = |k: usize| if k < lo { lo - k } else { k.saturating_sub(hi) };
                let mut v: Vec<usize> = assisting.collect();
                v.sort_by_key(|&k| (dist(k), k));
                Ok(v)
            }
            OrderRule::Explicit(v) => {
                check_order(v, n, i, j)?;
                Ok(v.clone())
            }
        }
    }
}

fn check_pair(n: usize, i: usize, j: usize) -> Result<()> {
    for s in [i, j] {
        if s >= n {
            return Err(Error::SiteOutOfRange { index: s, n_qubits: n });
        }
    }
    if i == j {
        return Err(Error::DuplicateSite(i));
    }
    Ok(())
}

fn check_order(order: &[usize], n: usize, i: usize, j: usize) -> Result<()> {
    let mut seen = vec![false; n];
    for &k in order {
        if k >= n {
            return Err(Error::SiteOutOfRange { index: k, n_qubits: n });
        }
        if k == i || k == j || seen[k] {
            return Err(Error::InvalidArgument(format!("order repeats or includes site {k}")));
        }
        seen[k] = true;
    }
    if order.len() + 2 != n {
        return Err(Error::InvalidArgument(format!(
            "order covers {} of {} assisting qubits",
            order.len(),
            n - 2
        )));
    }
    Ok(())
}

/// Measurement strategy for the assisting qubits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum MeasurementPlan {
    /// One fixed direction per qubit, `directions[d]` for `order[d]`.
    Product { order: Vec<usize>, directions: Vec<MeasurementDirection> },
    /// Outcome-dependent directions in heap order (`2^len(order) - 1` nodes).
    Adaptive { order: Vec<usize>, tree: Vec<MeasurementDirection> },
}

impl MeasurementPlan {
    pub fn order(&self) -> &[usize] {
        match self {
            MeasurementPlan::Product { order, .. } | MeasurementPlan::Adaptive { order, .. } => order,
        }
    }

    pub fn is_adaptive(&self) -> bool {
        matches!(self, MeasurementPlan::Adaptive { .. })
    }

    /// Direction for the `depth`-th measured qubit after outcome path `path`.
    pub fn direction(&self, depth: usize, path: usize) -> MeasurementDirection {
        match self {
            MeasurementPlan::Product { directions, .. } => directions[depth],
            MeasurementPlan::Adaptive { tree, .. } => tree[(1 << depth) - 1 + path],
        }
    }

    /// The same plan as an explicit outcome tree.
    pub fn to_adaptive(&self) -> MeasurementPlan {
        match self {
            MeasurementPlan::Adaptive { .. } => self.clone(),
            MeasurementPlan::Product { order, directions } => {
                let tree = (0..order.len())
                    .flat_map(|d| std::iter::repeat_n(directions[d], 1 << d))
                    .collect();
                MeasurementPlan::Adaptive { order: order.clone(), tree }
            }
        }
    }

    /// Checks the plan against an `n`-qubit register and the pair `(i, j)`.
    pub fn validate(&self, n: usize, i: usize, j: usize) -> Result<()> {
        check_pair(n, i, j)?;
        check_order(self.order(), n, i, j)?;
        let m = self.order().len();
        let (len, want) = match self {
            MeasurementPlan::Product { directions, .. } => (directions.len(), m),
            MeasurementPlan::Adaptive { tree, .. } => (tree.len(), (1usize << m) - 1),
        };
        if len != want {
            return Err(Error::LengthMismatch { expected: want, got: len });
        }
        Ok(())
    }
}

/// Engine-wide settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineConfig {
    pub parallel: bool,
    pub enumeration_limit: usize,
    pub order: OrderRule,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self { parallel: true, enumeration_limit: DEFAULT_ENUMERATION_LIMIT, order: OrderRule::Segment }
    }
}

impl EngineConfig {
    pub fn sequential() -> Self {
        Self { parallel: false, ..Self::default() }
    }

    fn check_enumerable(&self, n: usize) -> Result<()> {
        if n.saturating_sub(2) > self.enumeration_limit {
            return Err(Error::SizeLimit { n, limit: self.enumeration_limit + 2 });
        }
        Ok(())
    }

    fn split(&self, node: &Node) -> bool {
        self.parallel && node.amps.len() >= PARALLEL_CUTOFF
    }
}

/// One branch of a fully measured register.
#[derive(Clone, Debug)]
pub struct OutcomeEntry {
    pub probability: f64,
    /// Normalized state of the pair, in ascending site order.
    pub state: PureState,
    /// `'0'` for `+` and `'1'` for `-`, in measurement order.
    pub outcomes: String,
}

/// The pure-state ensemble left on the pair by a plan.
#[derive(Clone, Debug, Default)]
pub struct OutcomeEnsemble {
    pub entries: Vec<OutcomeEntry>,
}

impl OutcomeEnsemble {
    pub fn total_probability(&self) -> f64 {
        self.entries.iter().map(|e| e.probability).sum()
    }
}

/// Result of an engine method.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LEResult {
    pub value: f64,
    pub plan: Option<MeasurementPlan>,
    pub method: Method,
    pub standard_error: Option<f64>,
    /// `false` when an iteration cap stopped a refinement.
    pub converged: bool,
    /// Value after each refinement sweep (empty for other methods).
    pub history: Vec<f64>,
}

impl LEResult {
    fn direct(value: f64, plan: Option<MeasurementPlan>, method: Method) -> Self {
        Self { value, plan, method, standard_error: None, converged: true, history: Vec::new() }
    }
}

/// Enumerates every nonnull outcome of `plan`.
pub fn enumerate_outcomes(
    state: &PureState,
    i: usize,
    j: usize,
    plan: &MeasurementPlan,
    cfg: &EngineConfig,
) -> Result<OutcomeEnsemble> {
    let n = state.n_qubits();
    plan.validate(n, i, j)?;
    cfg.check_enumerable(n)?;
    let mut entries = Vec::new();
    collect(&Node::root(state), plan, 0, 0, String::new(), cfg, &mut entries);
    Ok(OutcomeEnsemble { entries })
}

fn collect(
    node: &Node,
    plan: &MeasurementPlan,
    depth: usize,
    path: usize,
    bits: String,
    cfg: &EngineConfig,
    out: &mut Vec<OutcomeEntry>,
) {
    let order = plan.order();
    if depth == order.len() {
        let mut amps = node.amps.clone();
        if node.labels[0] > node.labels[1] {
            amps.swap(1, 2);
        }
        out.push(OutcomeEntry {
            probability: node.weight,
            state: PureState::from_parts_unchecked(2, amps),
            outcomes: bits,
        });
        return;
    }
    let [plus, minus] = node.children(order[depth], plan.direction(depth, path));
    let sub = |child: Option<Node>, bit: usize| {
        let mut v = Vec::new();
        if let Some(c) = child {
            let label = format!("{bits}{bit}");
            collect(&c, plan, depth + 1, 2 * path + bit, label, cfg, &mut v);
        }
        v
    };
    let (a, b) = par::join(cfg.split(node), || sub(plus, 0), || sub(minus, 1));
    out.extend(a);
    out.extend(b);
}

/// `Σ p_s C(φ_s)`, summed in entry order.
pub fn average_entanglement(ens: &OutcomeEnsemble) -> Result<f64> {
    let mut total = 0.0;
    for e in &ens.entries {
        total += e.probability * concurrence_pure(e.state.amplitudes())?;
    }
    Ok(total)
}

/// Average concurrence of a plan, evaluated without materializing the ensemble.
pub fn plan_value(state: &PureState, i: usize, j: usize, plan: &MeasurementPlan, cfg: &EngineConfig) -> Result<f64> {
    plan.validate(state.n_qubits(), i, j)?;
    cfg.check_enumerable(state.n_qubits())?;
    Ok(eval_plan(&Node::root(state), plan, 0, 0, false, cfg))
}

/// Weighted subtree value. With `exact_last` the final assisting qubit is
/// measured optimally instead of along the stored direction.
pub(crate) fn eval_plan(
    node: &Node,
    plan: &MeasurementPlan,
    depth: usize,
    path: usize,
    exact_last: bool,
    cfg: &EngineConfig,
) -> f64 {
    let order = plan.order();
    if depth == order.len() {
        return node.leaf_value();
    }
    if exact_last && depth + 1 == order.len() {
        return node.last_level_value(order[depth]);
    }
    let [plus, minus] = node.children(order[depth], plan.direction(depth, path));
    let sub = |child: Option<Node>, bit: usize| {
        child.map_or(0.0, |c| eval_plan(&c, plan, depth + 1, 2 * path + bit, exact_last, cfg))
    };
    let (a, b) = par::join(cfg.split(node), || sub(plus, 0), || sub(minus, 1));
    a + b
}

/// The branch state reached by following `path` down to `depth`.
pub(crate) fn walk(root: &Node, plan: &MeasurementPlan, depth: usize, path: usize) -> Option<Node> {
    let mut node = root.clone();
    for d in 0..depth {
        let bit = (path >> (depth - 1 - d)) & 1;
        let [plus, minus] = node.children(plan.order()[d], plan.direction(d, path >> (depth - d)));
        node = if bit == 0 { plus? } else { minus? };
    }
    Some(node)
}

/// Which bounds formulas [`sandwich`] uses.
#[derive(Clone, Debug, PartialEq)]
pub struct SandwichConfig {
    /// Use the closed forms for parity-symmetric states.
    pub parity_symmetric: bool,
    /// Engine method; `None` picks the best available for the register size.
    pub method: Option<Method>,
    pub engine: EngineConfig,
    pub refine: RefineConfig,
    pub oracle: OracleConfig,
    pub samples: usize,
    pub seed: u64,
}

impl Default for SandwichConfig {
    fn default() -> Self {
        Self {
            parity_symmetric: false,
            method: None,
            engine: EngineConfig::default(),
            refine: RefineConfig::default(),
            oracle: OracleConfig::default(),
            samples: 1000,
            seed: 0,
        }
    }
}

/// Register sizes up to this use refinement when no method is requested.
pub const REFINE_DEFAULT_MAX_QUBITS: usize = 10;

/// The method [`sandwich`] uses when none is requested.
pub fn default_method(n: usize, cfg: &EngineConfig) -> Method {
    if n <= REFINE_DEFAULT_MAX_QUBITS {
        Method::Refined
    } else if n.saturating_sub(2) <= cfg.enumeration_limit {
        Method::Constructive
    } else {
        Method::Sampled
    }
}

/// Runs the requested engine method.
pub fn estimate(state: &PureState, i: usize, j: usize, method: Method, cfg: &SandwichConfig) -> Result<LEResult> {
    let order = &cfg.engine.order;
    match method {
        Method::Constructive => le_constructive(state, i, j, order, &cfg.engine),
        Method::Refined => {
            let init = le_constructive(state, i, j, order, &cfg.engine)?;
            le_refine(state, i, j, init.plan.as_ref(), &cfg.refine, &cfg.engine)
        }
        Method::Oracle => le_grid_oracle(state, i, j, &cfg.oracle, &cfg.engine),
        Method::Sampled => {
            le_sampled(state, i, j, &SampleStrategy::Constructive, cfg.samples, cfg.seed, &cfg.engine)
        }
    }
}

/// Lower bound, engine estimate and upper bound for the pair `(i, j)`.
pub fn sandwich(state: &PureState, i: usize, j: usize, cfg: &SandwichConfig) -> Result<(BoundsRecord, LEResult)> {
    let n = state.n_qubits();
    check_pair(n, i, j)?;
    let mut bounds = if cfg.parity_symmetric {
        parity_bounds(state, i, j)?
    } else {
        let mc = max_correlation(&correlation_matrix(state, i, j)?);
        let rho = reduced_density(state, &[i, j])?;
        BoundsRecord {
            lower: mc.value,
            upper: assistance_upper_bound(&rho)?,
            le_estimate: None,
            lower_method: BoundMethod::MaxCorrelation,
            upper_method: BoundMethod::Assistance,
        }
    };
    let result = if n == 2 {
        let mut amps: Vec<C64> = state.amplitudes().to_vec();
        if i > j {
            amps.swap(1, 2);
        }
        LEResult::direct(concurrence_pure(&amps)?, None, Method::Constructive)
    } else {
        let method = cfg.method.unwrap_or_else(|| default_method(n, &cfg.engine));
        estimate(state, i, j, method, cfg)?
    };
    bounds.le_estimate = Some(result.value);
    Ok((bounds, result))
}
