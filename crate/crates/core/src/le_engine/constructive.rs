//! Adaptive strategy built from the correlation-preserving direction.
//!
//! At every node the three-qubit density of `(i, j, k)` is rotated so that
//! the pair's maximal correlation lies along `zz`, and `k` is measured along
//! the direction that keeps the average `|Qzz|` from decreasing. Chaining the
//! step over all assisting qubits keeps the average maximal correlation of
//! the pair at least at its initial value; the final pure states have
//! concurrence equal to their maximal correlation.
//!
//! When the pair carries no correlation at a node the construction gives no
//! guidance. The engine then scores a few candidate directions by the
//! average maximal correlation of the resulting branches, breaking ties by
//! an average upper bound on what the branches can still reach: the smaller
//! of the assistance bound and the weakest cut concurrence between the pair.
//! The cut term notices a measurement that disconnects the pair even when
//! the pair's reduced state is unchanged.

use nalgebra::Vector3;

use super::node::Node;
use super::{EngineConfig, LEResult, MeasurementPlan, Method, OrderRule};
use crate::corr_theorem::{block_decompose, build_theorem_data, find_direction, prerotate_to_zz, sorted_eigenvectors};
use crate::ent_measures::{assistance_of_matrix, max_correlation_of};
use crate::error::Result;
use crate::par;
use crate::qstate::{Axis, CorrelationData, MeasurementDirection, PureState};

/// Ties in lookahead scores closer than this keep the earlier candidate.
const SCORE_TOL: f64 = 1e-10;

/// Constructive direction for measuring `k` at a node.
pub(crate) fn node_direction(node: &Node, i: usize, j: usize, k: usize) -> Result<MeasurementDirection> {
    let rho3 = node.density(&[i, j, k]);
    let (rotated, _) = prerotate_to_zz(&rho3, i, j)?;
    let blocks = block_decompose(&rotated, k)?;
    let td = build_theorem_data(&blocks);
    let dir = find_direction(&td)?;
    if !td.is_degenerate() {
        return Ok(dir);
    }
    let mut candidates = vec![dir];
    candidates.extend(sorted_eigenvectors(&td.q_block).into_iter().map(|(_, x)| {
        let x: Vector3<f64> = x;
        MeasurementDirection::from_xbar(x.into())
    }));
    candidates.extend(Axis::ALL.iter().map(|&a| MeasurementDirection::axis(a)));
    let mut best = (candidates[0], lookahead_score(node, i, j, k, candidates[0]));
    for &c in &candidates[1..] {
        let s = lookahead_score(node, i, j, k, c);
        let better = s.0 > best.1 .0 + SCORE_TOL || (s.0 > best.1 .0 - SCORE_TOL && s.1 > best.1 .1 + SCORE_TOL);
        if better {
            best = (c, s);
        }
    }
    Ok(best.0)
}

/// `(Σ p max_correlation, Σ p min(assistance, cut bound))` of the pair over
/// both outcomes, relative to the node's own probability.
fn lookahead_score(node: &Node, i: usize, j: usize, k: usize, dir: MeasurementDirection) -> (f64, f64) {
    let mut corr = 0.0;
    let mut assist = 0.0;
    for child in node.children(k, dir).into_iter().flatten() {
        let p = child.weight / node.weight;
        let rho = child.density(&[i, j]);
        corr += p * max_correlation_of(&CorrelationData::from_density_unchecked(&rho).q).value;
        let bound = assistance_of_matrix(rho.matrix());
        assist += p * child.cut_bound(i, j).map_or(bound, |c| c.min(bound));
    }
    (corr, assist)
}

struct Built {
    value: f64,
    /// `(heap index, direction)` for every nonnull internal node.
    nodes: Vec<(usize, MeasurementDirection)>,
}

fn build(node: &Node, i: usize, j: usize, order: &[usize], depth: usize, path: usize, cfg: &EngineConfig) -> Result<Built> {
    if depth == order.len() {
        return Ok(Built { value: node.leaf_value(), nodes: Vec::new() });
    }
    let k = order[depth];
    let dir = node_direction(node, i, j, k)?;
    let [plus, minus] = node.children(k, dir);
    let sub = |child: Option<Node>, bit: usize| match child {
        Some(c) => build(&c, i, j, order, depth + 1, 2 * path + bit, cfg),
        None => Ok(Built { value: 0.0, nodes: Vec::new() }),
    };
    let (a, b) = par::join(cfg.split(node), || sub(plus, 0), || sub(minus, 1));
    let (a, b) = (a?, b?);
    let mut nodes = Vec::with_capacity(1 + a.nodes.len() + b.nodes.len());
    nodes.push(((1 << depth) - 1 + path, dir));
    nodes.extend(a.nodes);
    nodes.extend(b.nodes);
    Ok(Built { value: a.value + b.value, nodes })
}

/// Adaptive plan from the constructive rule together with its average concurrence.
pub fn plan_constructive(
    state: &PureState,
    i: usize,
    j: usize,
    order: &OrderRule,
    cfg: &EngineConfig,
) -> Result<(MeasurementPlan, f64)> {
    let n = state.n_qubits();
    let order = order.order(n, i, j)?;
    cfg.check_enumerable(n)?;
    let built = build(&Node::root(state), i, j, &order, 0, 0, cfg)?;
    let mut tree = vec![MeasurementDirection::default(); (1usize << order.len()) - 1];
    for (idx, dir) in built.nodes {
        tree[idx] = dir;
    }
    Ok((MeasurementPlan::Adaptive { order, tree }, built.value))
}

/// Localizable entanglement attained by the constructive strategy.
///
/// The value is at least the pair's maximal correlation.
pub fn le_constructive(state: &PureState, i: usize, j: usize, order: &OrderRule, cfg: &EngineConfig) -> Result<LEResult> {
    if state.n_qubits() < 3 {
        return Err(crate::Error::InvalidArgument("constructive strategy needs at least 3 qubits".into()));
    }
    let (plan, value) = plan_constructive(state, i, j, order, cfg)?;
    Ok(LEResult::direct(value.min(1.0), Some(plan), Method::Constructive))
}
