//! Coordinate ascent over the directions of an adaptive plan.
//!
//! Nodes are revisited top-down. Each node's direction is replaced by the
//! best one found by a compass search seeded from its current value and a
//! coarse grid, with every subtree scored under the current plan and the last
//! assisting qubit measured optimally. A change is kept only when it improves
//! the subtree, so the plan value never decreases.

use serde::{Deserialize, Serialize};

use super::node::Node;
use super::oracle::{le_grid_oracle, OracleConfig, ORACLE_ADAPTIVE_MAX_QUBITS};
use super::search::{maximize, SearchConfig};
use super::{eval_plan, walk, EngineConfig, LEResult, MeasurementPlan, Method, OrderRule};
use crate::error::{Error, Result};
use crate::qstate::PureState;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RefineConfig {
    /// Stop when a sweep improves the value by less than this.
    pub tol: f64,
    pub max_sweeps: usize,
    /// Coarse `k x k` grid of starting directions per node.
    pub multistart: usize,
    /// Without an initial plan, registers small enough for the adaptive
    /// oracle also start from its plan at this resolution (0 disables).
    pub oracle_seed_grid: usize,
}

impl Default for RefineConfig {
    fn default() -> Self {
        Self { tol: 1e-9, max_sweeps: 50, multistart: 6, oracle_seed_grid: 24 }
    }
}

fn last_level_directions(root: &Node, plan: &mut MeasurementPlan) {
    let m = plan.order().len();
    let k = plan.order()[m - 1];
    for path in 0..(1usize << (m - 1)) {
        if let Some(node) = walk(root, plan, m - 1, path) {
            let dir = node.last_level_direction(k);
            if let MeasurementPlan::Adaptive { tree, .. } = plan {
                tree[(1 << (m - 1)) - 1 + path] = dir;
            }
        }
    }
}

/// Refines `init`. When `None`, starts from the constructive plan or, for
/// small registers, the oracle plan if that is better.
pub fn le_refine(
    state: &PureState,
    i: usize,
    j: usize,
    init: Option<&MeasurementPlan>,
    rcfg: &RefineConfig,
    cfg: &EngineConfig,
) -> Result<LEResult> {
    let n = state.n_qubits();
    if n < 3 {
        return Err(Error::InvalidArgument("refinement needs at least 3 qubits".into()));
    }
    cfg.check_enumerable(n)?;
    let mut plan = match init {
        Some(p) => {
            p.validate(n, i, j)?;
            p.to_adaptive()
        }
        None => {
            let constructive = super::plan_constructive(state, i, j, &OrderRule::Segment, cfg)?.0;
            if rcfg.oracle_seed_grid > 0 && n <= ORACLE_ADAPTIVE_MAX_QUBITS {
                let ocfg = OracleConfig { grid: rcfg.oracle_seed_grid, ..OracleConfig::default() };
                let oracle = le_grid_oracle(state, i, j, &ocfg, cfg)?;
                let root = Node::root(state);
                let base = eval_plan(&root, &constructive, 0, 0, true, cfg);
                match oracle.plan {
                    Some(p) if oracle.value > base => p.to_adaptive(),
                    _ => constructive,
                }
            } else {
                constructive
            }
        }
    };
    let root = Node::root(state);
    let m = plan.order().len();
    let search = SearchConfig { multistart: rcfg.multistart, ..SearchConfig::default() };

    let init_value = eval_plan(&root, &plan, 0, 0, false, cfg);
    let mut value = eval_plan(&root, &plan, 0, 0, true, cfg).max(init_value);
    let mut history = vec![init_value, value];
    let mut converged = m == 1;
    let mut sweeps = 0;
    while !converged && sweeps < rcfg.max_sweeps {
        sweeps += 1;
        let start = value;
        for depth in 0..m - 1 {
            for path in 0..(1usize << depth) {
                let Some(node) = walk(&root, &plan, depth, path) else { continue };
                let idx = (1 << depth) - 1 + path;
                let k = plan.order()[depth];
                let score = |dir| {
                    let [plus, minus] = node.children(k, dir);
                    let mut trial = plan.clone();
                    if let MeasurementPlan::Adaptive { tree, .. } = &mut trial {
                        tree[idx] = dir;
                    }
                    let sub = |c: Option<Node>, bit| {
                        c.map_or(0.0, |c| eval_plan(&c, &trial, depth + 1, 2 * path + bit, true, cfg))
                    };
                    sub(plus, 0) + sub(minus, 1)
                };
                let current = plan.direction(depth, path);
                let before = score(current);
                let (dir, after) = maximize(score, &search, &[current]);
                if after > before + 1e-13 {
                    if let MeasurementPlan::Adaptive { tree, .. } = &mut plan {
                        tree[idx] = dir;
                    }
                }
            }
        }
        value = eval_plan(&root, &plan, 0, 0, true, cfg).max(value);
        history.push(value);
        converged = value - start < rcfg.tol;
    }
    last_level_directions(&root, &mut plan);
    Ok(LEResult {
        value: value.min(1.0),
        plan: Some(plan),
        method: Method::Refined,
        standard_error: None,
        converged,
        history,
    })
}
