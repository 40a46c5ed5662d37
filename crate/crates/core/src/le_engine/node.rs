//! Branch states of a measurement tree.

use nalgebra::Matrix2;
use num_complex::Complex64 as C64;

use crate::ent_measures::weighted_concurrence;
use crate::qstate::{project_site, reduced_matrix, MeasurementDirection, PureState, ReducedDensity, NULL_BRANCH_PROBABILITY};

/// A normalized branch state together with its absolute probability.
#[derive(Clone, Debug)]
pub(crate) struct Node {
    pub amps: Vec<C64>,
    /// Original site label of each remaining qubit, most significant first.
    pub labels: Vec<usize>,
    pub weight: f64,
}

impl Node {
    pub fn root(state: &PureState) -> Self {
        Self {
            amps: state.amplitudes().to_vec(),
            labels: (0..state.n_qubits()).collect(),
            weight: 1.0,
        }
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn pos(&self, label: usize) -> usize {
        self.labels.iter().position(|&l| l == label).expect("label is live")
    }

    fn child(&self, label: usize, m: &[C64; 2]) -> Option<Node> {
        let pos = self.pos(label);
        let u = project_site(&self.amps, self.n(), pos, m);
        let p: f64 = u.iter().map(|a| a.norm_sqr()).sum();
        if p < NULL_BRANCH_PROBABILITY {
            return None;
        }
        let scale = p.sqrt().recip();
        let mut labels = self.labels.clone();
        labels.remove(pos);
        Some(Node { amps: u.into_iter().map(|a| a * scale).collect(), labels, weight: self.weight * p })
    }

    /// Outcomes `(+, -)` of measuring `label` along `dir`; null branches are `None`.
    pub fn children(&self, label: usize, dir: MeasurementDirection) -> [Option<Node>; 2] {
        let (mp, mm) = dir.projectors();
        [self.child(label, &mp), self.child(label, &mm)]
    }

    pub fn density(&self, labels: &[usize]) -> ReducedDensity {
        let positions: Vec<usize> = labels.iter().map(|&l| self.pos(l)).collect();
        ReducedDensity::new_unchecked(labels.to_vec(), reduced_matrix(&self.amps, self.n(), &positions))
    }

    /// Smallest cut concurrence `√(2(1 - Tr ρ_A²))` over the cuts that split
    /// the remaining qubits, in site order, between `i` and `j`. No local
    /// strategy concentrates more average concurrence on the pair. Cuts whose
    /// smaller side exceeds `2^MAX_CUT_QUBITS` are skipped; `None` when all are.
    pub fn cut_bound(&self, i: usize, j: usize) -> Option<f64> {
        let n = self.n();
        let (lo, hi) = {
            let (a, b) = (self.pos(i), self.pos(j));
            (a.min(b), a.max(b))
        };
        let mut best: Option<f64> = None;
        for a in (lo + 1)..=hi {
            if a.min(n - a) > MAX_CUT_QUBITS {
                continue;
            }
            let purity = cut_purity(&self.amps, a, n - a);
            let c = (2.0 * (1.0 - purity)).max(0.0).sqrt();
            best = Some(best.map_or(c, |b| b.min(c)));
        }
        best
    }

    /// `weight * C` for a two-qubit leaf.
    pub fn leaf_value(&self) -> f64 {
        debug_assert_eq!(self.n(), 2);
        self.weight * weighted_concurrence(&self.amps).min(1.0)
    }

    /// The symmetric form `T` with `det(Σ_c x_c A_c) = xᵀ T x`, where `A_c`
    /// is the pair amplitude matrix conditioned on qubit `k` being `c`.
    fn last_form(&self, k: usize) -> Matrix2<C64> {
        let pos = self.pos(k);
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        let a0 = project_site(&self.amps, 3, pos, &[one, zero]);
        let a1 = project_site(&self.amps, 3, pos, &[zero, one]);
        let t00 = a0[0] * a0[3] - a0[1] * a0[2];
        let t11 = a1[0] * a1[3] - a1[1] * a1[2];
        let t01 = (a0[0] * a1[3] + a1[0] * a0[3] - a0[1] * a1[2] - a1[1] * a0[2]) * 0.5;
        Matrix2::new(t00, t01, t01, t11)
    }

    /// Maximal `weight * average concurrence` over measurements of the last
    /// assisting qubit `k`: twice the trace norm of the form `T`.
    pub fn last_level_value(&self, k: usize) -> f64 {
        let t = self.last_form(k);
        let frob = t.iter().map(|z| z.norm_sqr()).sum::<f64>();
        let det = (t[(0, 0)] * t[(1, 1)] - t[(0, 1)] * t[(1, 0)]).norm();
        self.weight * (2.0 * (frob + 2.0 * det).sqrt()).min(1.0)
    }

    /// `weight * average concurrence` after measuring `k` along `dir` with two qubits left.
    pub fn last_level_score(&self, k: usize, dir: MeasurementDirection) -> f64 {
        let pos = self.pos(k);
        let (mp, mm) = dir.projectors();
        let a = weighted_concurrence(&project_site(&self.amps, 3, pos, &mp));
        let b = weighted_concurrence(&project_site(&self.amps, 3, pos, &mm));
        self.weight * (a + b)
    }

    /// A direction attaining [`Node::last_level_value`].
    pub fn last_level_direction(&self, k: usize) -> MeasurementDirection {
        let t = self.last_form(k);
        let target = self.last_level_value(k);
        let svd = t.svd(true, true);
        let v_t = svd.v_t.expect("requested");
        let top = if svd.singular_values[0] >= svd.singular_values[1] { 0 } else { 1 };
        let m = [v_t[(top, 0)], v_t[(top, 1)]];
        let best = ket_direction(&m);
        let score = self.last_level_score(k, best);
        if score >= target - 1e-12 * self.weight.max(1e-300) {
            return best;
        }
        // Degenerate singular values: the top vector need not diagonalize the form.
        let eval = |d: MeasurementDirection| self.last_level_score(k, d);
        super::search::maximize(eval, &super::search::SearchConfig::default(), &[best]).0
    }
}

/// Largest side of a cut, in qubits, whose purity [`Node::cut_bound`] evaluates.
pub(crate) const MAX_CUT_QUBITS: usize = 8;

/// `Tr ρ_A²` for the first `a` qubits of a normalized `a + b` qubit state.
fn cut_purity(amps: &[C64], a: usize, b: usize) -> f64 {
    let (rows, cols) = (1usize << a, 1usize << b);
    // Gram matrix on the smaller side; both give the same purity.
    let (d, gram): (usize, Vec<C64>) = if rows <= cols {
        let mut g = vec![C64::new(0.0, 0.0); rows * rows];
        for r in 0..rows {
            for s in r..rows {
                let x: C64 = (0..cols).map(|c| amps[r * cols + c] * amps[s * cols + c].conj()).sum();
                g[r * rows + s] = x;
                g[s * rows + r] = x.conj();
            }
        }
        (rows, g)
    } else {
        let mut g = vec![C64::new(0.0, 0.0); cols * cols];
        for r in 0..rows {
            let row = &amps[r * cols..(r + 1) * cols];
            for c in 0..cols {
                let x = row[c].conj();
                for e in 0..cols {
                    g[c * cols + e] += x * row[e];
                }
            }
        }
        (cols, g)
    };
    debug_assert_eq!(gram.len(), d * d);
    gram.iter().map(|z| z.norm_sqr()).sum()
}

/// The direction whose `|+>` is proportional to the ket `m`.
pub(crate) fn ket_direction(m: &[C64; 2]) -> MeasurementDirection {
    let theta = 2.0 * m[1].norm().atan2(m[0].norm());
    let phi = if m[0].norm() < 1e-300 || m[1].norm() < 1e-300 { 0.0 } else { m[1].arg() - m[0].arg() };
    MeasurementDirection::new(theta, phi)
}
