//! Brute-force reference maximizer over a grid of directions.
//!
//! The grid has `θ = πa/K` for `a = 0..=K` and `φ = 2πb/K` for `b < K`, with
//! each pole listed once. Grids at `K` and `2K` are nested, so the oracle
//! value never decreases when the resolution doubles. The last assisting
//! qubit is always measured optimally in closed form.
//!
//! Up to five qubits the search is exhaustive over adaptive plans, which
//! contain every product plan. Six-qubit registers search product plans on
//! all but the last assisting qubit, within a cost budget.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::node::Node;
use super::{EngineConfig, LEResult, MeasurementPlan, Method, OrderRule};
use crate::error::{Error, Result};
use crate::par;
use crate::qstate::{MeasurementDirection, PureState};

/// Largest register the oracle accepts.
pub const ORACLE_MAX_QUBITS: usize = 6;

/// Largest register searched over adaptive plans.
pub const ORACLE_ADAPTIVE_MAX_QUBITS: usize = 5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleConfig {
    /// Angular resolution `K`.
    pub grid: usize,
    /// Largest number of product combinations evaluated for six qubits.
    pub product_budget: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { grid: 24, product_budget: 2_000_000 }
    }
}

/// The direction grid at resolution `k`.
pub fn grid_directions(k: usize) -> Vec<MeasurementDirection> {
    let mut out = vec![MeasurementDirection::new(0.0, 0.0)];
    for a in 1..k {
        for b in 0..k {
            out.push(MeasurementDirection::new(PI * a as f64 / k as f64, 2.0 * PI * b as f64 / k as f64));
        }
    }
    out.push(MeasurementDirection::new(PI, 0.0));
    out
}

fn branch_sum<F: Fn(&Node) -> f64>(node: &Node, k: usize, dir: MeasurementDirection, f: F) -> f64 {
    let [plus, minus] = node.children(k, dir);
    plus.as_ref().map_or(0.0, &f) + minus.as_ref().map_or(0.0, &f)
}

fn argmax(values: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (idx, &v) in values.iter().enumerate() {
        if v > best.1 {
            best = (idx, v);
        }
    }
    best
}

fn best_adaptive(node: &Node, order: &[usize], depth: usize, dirs: &[MeasurementDirection]) -> f64 {
    let k = order[depth];
    if depth + 1 == order.len() {
        return node.last_level_value(k);
    }
    dirs.iter()
        .map(|&d| branch_sum(node, k, d, |c| best_adaptive(c, order, depth + 1, dirs)))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Fills the argmax tree below `node`.
fn record(
    node: &Node,
    order: &[usize],
    depth: usize,
    path: usize,
    dirs: &[MeasurementDirection],
    tree: &mut [MeasurementDirection],
) {
    let k = order[depth];
    let idx = (1 << depth) - 1 + path;
    if depth + 1 == order.len() {
        tree[idx] = node.last_level_direction(k);
        return;
    }
    let values: Vec<f64> = dirs
        .iter()
        .map(|&d| branch_sum(node, k, d, |c| best_adaptive(c, order, depth + 1, dirs)))
        .collect();
    let dir = dirs[argmax(&values).0];
    tree[idx] = dir;
    let [plus, minus] = node.children(k, dir);
    for (bit, child) in [plus, minus].into_iter().enumerate() {
        if let Some(c) = child {
            record(&c, order, depth + 1, 2 * path + bit, dirs, tree);
        }
    }
}

fn product_value(node: &Node, order: &[usize], depth: usize, combo: &[MeasurementDirection]) -> f64 {
    let k = order[depth];
    if depth + 1 == order.len() {
        return node.last_level_value(k);
    }
    branch_sum(node, k, combo[depth], |c| product_value(c, order, depth + 1, combo))
}

fn combo(index: usize, len: usize, dirs: &[MeasurementDirection]) -> Vec<MeasurementDirection> {
    let mut rest = index;
    let mut out = vec![MeasurementDirection::default(); len];
    for slot in out.iter_mut().rev() {
        *slot = dirs[rest % dirs.len()];
        rest /= dirs.len();
    }
    out
}

/// Grid-search reference value for registers of at most six qubits.
pub fn le_grid_oracle(state: &PureState, i: usize, j: usize, ocfg: &OracleConfig, cfg: &EngineConfig) -> Result<LEResult> {
    let n = state.n_qubits();
    if n > ORACLE_MAX_QUBITS {
        return Err(Error::SizeLimit { n, limit: ORACLE_MAX_QUBITS });
    }
    if n < 3 {
        return Err(Error::InvalidArgument("oracle needs at least 3 qubits".into()));
    }
    if ocfg.grid < 1 {
        return Err(Error::InvalidArgument("oracle grid must be at least 1".into()));
    }
    let order = OrderRule::Ascending.order(n, i, j)?;
    let m = order.len();
    let dirs = grid_directions(ocfg.grid);
    let root = Node::root(state);
    let mut tree = vec![MeasurementDirection::default(); (1usize << m) - 1];

    if n <= ORACLE_ADAPTIVE_MAX_QUBITS {
        let value = if m == 1 {
            root.last_level_value(order[0])
        } else {
            let k = order[0];
            let values = par::map_indexed(dirs.len(), cfg.parallel, |d| {
                branch_sum(&root, k, dirs[d], |c| best_adaptive(c, &order, 1, &dirs))
            });
            argmax(&values).1
        };
        record(&root, &order, 0, 0, &dirs, &mut tree);
        let plan = MeasurementPlan::Adaptive { order, tree };
        return Ok(LEResult::direct(value.min(1.0), Some(plan), Method::Oracle));
    }

    let free = m - 1;
    let count = (dirs.len() as u64).checked_pow(free as u32).unwrap_or(u64::MAX);
    if count > ocfg.product_budget {
        return Err(Error::InvalidArgument(format!(
            "grid {} needs {count} product plans for {n} qubits (budget {})",
            ocfg.grid, ocfg.product_budget
        )));
    }
    let values = par::map_indexed(count as usize, cfg.parallel, |c| {
        product_value(&root, &order, 0, &combo(c, free, &dirs))
    });
    let (best, value) = argmax(&values);
    let chosen = combo(best, free, &dirs);
    for (d, &dir) in chosen.iter().enumerate() {
        for p in 0..(1usize << d) {
            tree[(1 << d) - 1 + p] = dir;
        }
    }
    let mut plan = MeasurementPlan::Adaptive { order, tree };
    let last = m - 1;
    let k = plan.order()[last];
    for p in 0..(1usize << last) {
        if let Some(node) = super::walk(&root, &plan, last, p) {
            let dir = node.last_level_direction(k);
            if let MeasurementPlan::Adaptive { tree, .. } = &mut plan {
                tree[(1 << last) - 1 + p] = dir;
            }
        }
    }
    Ok(LEResult::direct(value.min(1.0), Some(plan), Method::Oracle))
}
