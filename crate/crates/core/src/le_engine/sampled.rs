//! Monte Carlo estimate of a strategy's average concurrence.
//!
//! Each sample follows one root-to-leaf path, choosing every outcome with its
//! conditional probability, and scores the final pair's concurrence. Sample
//! `s` draws from a ChaCha20 stream `s` keyed by the seed, so results do not
//! depend on how samples are scheduled across threads.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;

use super::constructive::node_direction;
use super::node::Node;
use super::{EngineConfig, LEResult, MeasurementPlan, Method};
use crate::error::{Error, Result};
use crate::par;
use crate::qstate::PureState;

/// Which directions a sampled path follows.
#[derive(Clone, Debug, PartialEq)]
pub enum SampleStrategy {
    /// Constructive directions computed along each sampled path.
    Constructive,
    Plan(MeasurementPlan),
}

fn sample_path(
    root: &Node,
    i: usize,
    j: usize,
    order: &[usize],
    strategy: &SampleStrategy,
    rng: &mut ChaCha20Rng,
) -> Result<f64> {
    let mut node = root.clone();
    let mut path = 0usize;
    for (depth, &k) in order.iter().enumerate() {
        let dir = match strategy {
            SampleStrategy::Constructive => node_direction(&node, i, j, k)?,
            SampleStrategy::Plan(plan) => plan.direction(depth, path),
        };
        let [plus, minus] = node.children(k, dir);
        let (next, bit) = match (plus, minus) {
            (Some(p), Some(m)) => {
                let u: f64 = rng.random();
                if u * (p.weight + m.weight) < p.weight { (p, 0) } else { (m, 1) }
            }
            (Some(p), None) => (p, 0),
            (None, Some(m)) => (m, 1),
            (None, None) => return Err(Error::InvalidDensity("both outcomes have zero probability".into())),
        };
        node = Node { weight: 1.0, ..next };
        path = 2 * path + bit;
    }
    Ok(node.leaf_value())
}

/// Sampled average concurrence with standard error `std / √n_samples`.
pub fn le_sampled(
    state: &PureState,
    i: usize,
    j: usize,
    strategy: &SampleStrategy,
    n_samples: usize,
    seed: u64,
    cfg: &EngineConfig,
) -> Result<LEResult> {
    let n = state.n_qubits();
    if n_samples == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    if n < 3 {
        return Err(Error::InvalidArgument("sampling needs at least 3 qubits".into()));
    }
    let order = match strategy {
        SampleStrategy::Constructive => cfg.order.order(n, i, j)?,
        SampleStrategy::Plan(plan) => {
            plan.validate(n, i, j)?;
            plan.order().to_vec()
        }
    };
    let root = Node::root(state);
    let values = par::map_indexed(n_samples, cfg.parallel, |s| {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(s as u64);
        sample_path(&root, i, j, &order, strategy, &mut rng)
    });
    let values: Vec<f64> = values.into_iter().collect::<Result<_>>()?;
    let count = values.len() as f64;
    let mean = values.iter().sum::<f64>() / count;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1.0)
    } else {
        0.0
    };
    Ok(LEResult {
        value: mean.clamp(0.0, 1.0),
        plan: match strategy {
            SampleStrategy::Plan(p) => Some(p.clone()),
            SampleStrategy::Constructive => None,
        },
        method: Method::Sampled,
        standard_error: Some((var / count).sqrt()),
        converged: true,
        history: Vec::new(),
    })
}
