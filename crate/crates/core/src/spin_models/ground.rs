use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{apply_terms, parity_symmetric, HamiltonianSpec, PauliTerm};
use crate::error::{Error, Result};
use crate::qstate::{PureState, DEFAULT_MAX_QUBITS};

/// Eigensolver settings.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// Registers up to this size are diagonalized densely.
    pub dense_max_qubits: usize,
    pub max_qubits: usize,
    /// Krylov subspace size per Lanczos cycle.
    pub krylov_dim: usize,
    pub max_restarts: usize,
    /// Relative residual tolerance for the two lowest Ritz pairs.
    pub tol: f64,
    pub parallel: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dense_max_qubits: 10,
            max_qubits: DEFAULT_MAX_QUBITS,
            krylov_dim: 60,
            max_restarts: 400,
            tol: 1e-10,
            parallel: true,
        }
    }
}

/// Lowest eigenvector of a spec, with its energy and the gap to the next level.
#[derive(Clone, Debug)]
pub struct GroundStateResult {
    pub state: PureState,
    pub energy: f64,
    pub gap: f64,
    /// `Some(+1)` / `Some(-1)` for the parity sector of a symmetric spec.
    pub parity: Option<i8>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Sector {
    All,
    Even,
    Odd,
}

impl Sector {
    fn contains(self, b: usize) -> bool {
        match self {
            Sector::All => true,
            Sector::Even => b.count_ones().is_multiple_of(2),
            Sector::Odd => b.count_ones() % 2 == 1,
        }
    }

    fn dim(self, n: usize) -> usize {
        match self {
            Sector::All => 1 << n,
            _ => 1 << (n - 1),
        }
    }
}

struct Eigenpair {
    value: f64,
    vector: Vec<C64>,
}

/// The full `2^n x 2^n` matrix of a spec.
pub fn dense_matrix(spec: &HamiltonianSpec) -> DMatrix<C64> {
    let dim = 1usize << spec.n_qubits;
    let mut h = DMatrix::<C64>::zeros(dim, dim);
    for t in spec.terms() {
        for b in 0..dim {
            h[(b ^ t.flip, b)] += t.element(b);
        }
    }
    h
}

/// All eigenvalues, ascending, by dense diagonalization (n ≤ 12).
pub fn dense_spectrum(spec: &HamiltonianSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    if spec.n_qubits > 12 {
        return Err(Error::SizeLimit { n: spec.n_qubits, limit: 12 });
    }
    let mut vals: Vec<f64> = dense_matrix(spec).symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

fn dense_lowest(terms: &[PauliTerm], n: usize, sector: Sector, k: usize) -> Vec<Eigenpair> {
    let full = 1usize << n;
    let members: Vec<usize> = (0..full).filter(|&b| sector.contains(b)).collect();
    let mut pos = vec![usize::MAX; full];
    for (p, &b) in members.iter().enumerate() {
        pos[b] = p;
    }
    let d = members.len();
    let mut h = DMatrix::<C64>::zeros(d, d);
    for t in terms {
        for (col, &b) in members.iter().enumerate() {
            let row = pos[b ^ t.flip];
            debug_assert!(row != usize::MAX, "term leaves the sector");
            h[(row, col)] += t.element(b);
        }
    }
    let real = h.iter().all(|z| z.im == 0.0);
    let (values, vectors): (Vec<f64>, DMatrix<C64>) = if real {
        let eig = h.map(|z| z.re).symmetric_eigen();
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors.map(|x| C64::new(x, 0.0)))
    } else {
        let eig = h.symmetric_eigen();
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    };
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    order
        .into_iter()
        .take(k)
        .map(|c| {
            let mut vector = vec![C64::new(0.0, 0.0); full];
            for (p, &b) in members.iter().enumerate() {
                vector[b] = vectors[(p, c)];
            }
            Eigenpair { value: values[c], vector }
        })
        .collect()
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn project(sector: Sector, v: &mut [C64]) {
    if sector == Sector::All {
        return;
    }
    for (b, z) in v.iter_mut().enumerate() {
        if !sector.contains(b) {
            *z = C64::new(0.0, 0.0);
        }
    }
}

/// Restarted Lanczos with full reorthogonalization for the `k` lowest pairs of a sector.
fn lanczos_lowest(
    terms: &[PauliTerm],
    n: usize,
    sector: Sector,
    k: usize,
    cfg: &SolverConfig,
) -> Result<Vec<Eigenpair>> {
    let dim = 1usize << n;
    let sector_dim = sector.dim(n);
    let mut rng = ChaCha8Rng::seed_from_u64(0x10ca_1e57);
    let mut start: Vec<C64> = (0..dim)
        .map(|_| C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
        .collect();
    project(sector, &mut start);
    let s = norm(&start);
    start.iter_mut().for_each(|z| *z /= s);

    let mut last_residual = f64::INFINITY;
    let mut w = vec![C64::new(0.0, 0.0); dim];
    for cycle in 0..cfg.max_restarts.max(1) {
        let m_max = cfg.krylov_dim.max(k + 1).min(sector_dim);
        let mut basis: Vec<Vec<C64>> = vec![start.clone()];
        let mut alphas: Vec<f64> = Vec::with_capacity(m_max);
        let mut betas: Vec<f64> = Vec::with_capacity(m_max);
        let mut exhausted = false;
        for step in 0..m_max {
            apply_terms(terms, &basis[step], &mut w, cfg.parallel && dim >= 1 << 12);
            let alpha = dot(&basis[step], &w).re;
            for (wz, vz) in w.iter_mut().zip(&basis[step]) {
                *wz -= vz * alpha;
            }
            if step > 0 {
                let beta = betas[step - 1];
                for (wz, vz) in w.iter_mut().zip(&basis[step - 1]) {
                    *wz -= vz * beta;
                }
            }
            for _ in 0..2 {
                for v in &basis {
                    let c = dot(v, &w);
                    for (wz, vz) in w.iter_mut().zip(v) {
                        *wz -= vz * c;
                    }
                }
            }
            project(sector, &mut w);
            alphas.push(alpha);
            let beta = norm(&w);
            if beta < 1e-12 * alpha.abs().max(1.0) || basis.len() == sector_dim {
                exhausted = true;
                break;
            }
            betas.push(beta);
            basis.push(w.iter().map(|z| z / beta).collect());
        }
        let m = alphas.len();
        let t = DMatrix::from_fn(m, m, |r, c| {
            if r == c {
                alphas[r]
            } else if r + 1 == c {
                betas[r]
            } else if c + 1 == r {
                betas[c]
            } else {
                0.0
            }
        });
        let eig = t.symmetric_eigen();
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let k_eff = k.min(m);
        let beta_last = if exhausted { 0.0 } else { betas[m - 1] };
        let mut pairs = Vec::with_capacity(k_eff);
        let mut converged = true;
        last_residual = 0.0;
        for &c in order.iter().take(k_eff) {
            let value = eig.eigenvalues[c];
            let residual = beta_last * eig.eigenvectors[(m - 1, c)].abs();
            last_residual = last_residual.max(residual);
            if residual > cfg.tol * value.abs().max(1.0) {
                converged = false;
            }
            let mut vector = vec![C64::new(0.0, 0.0); dim];
            for (l, v) in basis.iter().take(m).enumerate() {
                let coef = eig.eigenvectors[(l, c)];
                for (out, vz) in vector.iter_mut().zip(v) {
                    *out += vz * coef;
                }
            }
            let nv = norm(&vector);
            vector.iter_mut().for_each(|z| *z /= nv);
            pairs.push(Eigenpair { value, vector });
        }
        if converged || exhausted {
            return Ok(pairs);
        }
        // restart from the sum of the wanted Ritz vectors
        start = pairs.iter().fold(vec![C64::new(0.0, 0.0); dim], |mut acc, p| {
            for (a, z) in acc.iter_mut().zip(&p.vector) {
                *a += z;
            }
            acc
        });
        project(sector, &mut start);
        let s = norm(&start);
        start.iter_mut().for_each(|z| *z /= s);
        let _ = cycle;
    }
    Err(Error::NoConvergence {
        iterations: cfg.max_restarts * cfg.krylov_dim,
        residual: last_residual,
    })
}

/// Fixes the global phase so the largest-magnitude amplitude is real and positive.
fn fix_phase(v: &mut [C64]) {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if let Some(anchor) = v.iter().find(|z| z.norm() >= max * (1.0 - 1e-9)) {
        let rot = anchor.conj() / anchor.norm();
        v.iter_mut().for_each(|z| *z *= rot);
    }
}

/// Lowest eigenvector of `spec`.
///
/// Parity-symmetric specs are solved sector by sector; the even-parity ground
/// state is returned unless the odd sector lies strictly lower. The gap is
/// measured to the next level of the full spectrum.
pub fn ground_state(spec: &HamiltonianSpec, cfg: &SolverConfig) -> Result<GroundStateResult> {
    spec.validate()?;
    let n = spec.n_qubits;
    if n > cfg.max_qubits {
        return Err(Error::SizeLimit { n, limit: cfg.max_qubits });
    }
    let terms = spec.terms();
    let symmetric = parity_symmetric(spec) && n >= 2;
    let sectors: &[Sector] = if symmetric { &[Sector::Even, Sector::Odd] } else { &[Sector::All] };
    let mut found: Vec<(Sector, Eigenpair)> = Vec::new();
    for &sector in sectors {
        let pairs = if n <= cfg.dense_max_qubits {
            dense_lowest(&terms, n, sector, 2)
        } else {
            lanczos_lowest(&terms, n, sector, 2, cfg)?
        };
        found.extend(pairs.into_iter().map(|p| (sector, p)));
    }
    let chosen = if symmetric {
        let lowest = |s: Sector| found.iter().position(|(sec, _)| *sec == s);
        let even = lowest(Sector::Even).expect("even sector is non-empty");
        match lowest(Sector::Odd) {
            Some(odd) => {
                let (e, o) = (found[even].1.value, found[odd].1.value);
                if e <= o + 1e-9 * e.abs().max(1.0) { even } else { odd }
            }
            None => even,
        }
    } else {
        0
    };
    let energy = found[chosen].1.value;
    let gap = found
        .iter()
        .enumerate()
        .filter(|(idx, _)| *idx != chosen)
        .map(|(_, (_, p))| p.value - energy)
        .fold(f64::INFINITY, f64::min);
    let (sector, pair) = found.swap_remove(chosen);
    let mut vector = pair.vector;
    fix_phase(&mut vector);
    let nv = DVector::from_column_slice(&vector).norm();
    vector.iter_mut().for_each(|z| *z /= nv);
    Ok(GroundStateResult {
        state: PureState::from_parts_unchecked(n, vector),
        energy,
        gap: if gap.is_finite() { gap } else { 0.0 },
        parity: match sector {
            Sector::All => None,
            Sector::Even => Some(1),
            Sector::Odd => Some(-1),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{make_basis_state, pauli_expectation, Axis};
    use crate::spin_models::{ising_spec, Coupling};
    use approx::assert_abs_diff_eq;

    #[test]
    fn decoupled_fields() {
        let g = ground_state(&ising_spec(2, 0.0, 0.0, false).unwrap(), &SolverConfig::default()).unwrap();
        assert_abs_diff_eq!(g.energy, -2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g.state.amplitudes()[0].re, 1.0, epsilon = 1e-12);
        assert_eq!(g.parity, Some(1));
    }

    #[test]
    fn lambda_zero_is_polarized() {
        let g = ground_state(&ising_spec(8, 0.0, 0.0, false).unwrap(), &SolverConfig::default()).unwrap();
        for i in 0..8 {
            assert_abs_diff_eq!(pauli_expectation(&g.state, &[(i, Axis::Z)]).unwrap(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn lanczos_matches_dense() {
        for (lambda, eps) in [(0.5, 0.0), (1.0, 0.0), (1.7, 1e-3), (2.0, 0.0)] {
            let spec = ising_spec(9, lambda, eps, false).unwrap();
            let dense = ground_state(&spec, &SolverConfig::default()).unwrap();
            let cfg = SolverConfig { dense_max_qubits: 0, ..SolverConfig::default() };
            let lanczos = ground_state(&spec, &cfg).unwrap();
            assert_abs_diff_eq!(dense.energy, lanczos.energy, epsilon = 1e-9);
            assert_abs_diff_eq!(dense.gap, lanczos.gap, epsilon = 1e-7);
            let overlap = dense.state.inner(&lanczos.state).unwrap().norm();
            assert_abs_diff_eq!(overlap, 1.0, epsilon = 1e-7);
        }
    }

    #[test]
    fn phase_convention() {
        let spec = ising_spec(6, 1.3, 0.0, false).unwrap();
        let g = ground_state(&spec, &SolverConfig::default()).unwrap();
        let amps = g.state.amplitudes();
        let max = amps.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let anchor = amps.iter().find(|z| z.norm() >= max * (1.0 - 1e-9)).unwrap();
        assert!(anchor.im.abs() < 1e-15 && anchor.re > 0.0);
    }

    #[test]
    fn odd_sector_ground_state_is_returned() {
        // -σz fields with negative strength favour |1>, one flip = odd parity
        let mut spec = crate::spin_models::HamiltonianSpec::empty(3);
        spec.z_fields = vec![-1.0, 0.5, 0.5];
        spec.couplings.push(Coupling::same_axis(0, 1, Axis::Z, 0.1));
        let g = ground_state(&spec, &SolverConfig::default()).unwrap();
        assert_eq!(g.parity, Some(-1));
        let spectrum = dense_spectrum(&spec).unwrap();
        assert_abs_diff_eq!(g.energy, spectrum[0], epsilon = 1e-12);
        assert_abs_diff_eq!(g.gap, spectrum[1] - spectrum[0], epsilon = 1e-12);
    }

    #[test]
    fn size_limit() {
        let cfg = SolverConfig { max_qubits: 4, ..SolverConfig::default() };
        assert!(matches!(
            ground_state(&ising_spec(5, 1.0, 0.0, false).unwrap(), &cfg),
            Err(Error::SizeLimit { .. })
        ));
    }

    #[test]
    fn energy_below_basis_states() {
        let spec = ising_spec(7, 0.9, 0.0, false).unwrap();
        let g = ground_state(&spec, &SolverConfig::default()).unwrap();
        for bits in ["0000000", "1111111", "0101010", "1100110", "1000001"] {
            let s = make_basis_state(7, bits).unwrap();
            let hv = crate::spin_models::apply_hamiltonian(&spec, s.amplitudes()).unwrap();
            let e: f64 = s.amplitudes().iter().zip(&hv).map(|(a, b)| (a.conj() * b).re).sum();
            assert!(g.energy <= e + 1e-12);
        }
    }
}
