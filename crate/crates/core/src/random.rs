//! Seeded random states and unitaries.

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::qstate::{PureState, ReducedDensity};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random pure state on `n` qubits.
pub fn random_pure_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<PureState> {
    if n == 0 || n > 20 {
        return Err(Error::InvalidArgument(format!("cannot sample a {n}-qubit state")));
    }
    let amps = (0..1usize << n).map(|_| gaussian(rng)).collect();
    PureState::from_amplitudes(amps)
}

/// Random density of the given rank on `n` qubits (sites `0..n`), drawn as
/// the normalized `G G†` of a complex Gaussian `2^n x rank` matrix.
pub fn random_density<R: Rng + ?Sized>(n: usize, rank: usize, rng: &mut R) -> Result<ReducedDensity> {
    let d = 1usize << n;
    if n == 0 || n > 3 || rank == 0 || rank > d {
        return Err(Error::InvalidArgument(format!("cannot sample rank {rank} on {n} qubits")));
    }
    let g = DMatrix::from_fn(d, rank, |_, _| gaussian(rng));
    let mut rho = &g * g.adjoint();
    let t = rho.trace();
    rho /= t;
    let rho = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
    ReducedDensity::new((0..n).collect(), rho)
}

/// Haar-random single-qubit unitary.
pub fn random_su2<R: Rng + ?Sized>(rng: &mut R) -> Matrix2<C64> {
    let a = gaussian(rng);
    let b = gaussian(rng);
    let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
    let (a, b) = (a / norm, b / norm);
    Matrix2::new(a, -b.conj(), b, a.conj())
}

/// Families of random three-qubit densities.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DensityEnsemble {
    Pure,
    Rank2,
    Full,
}

impl DensityEnsemble {
    pub const ALL: [DensityEnsemble; 3] = [DensityEnsemble::Pure, DensityEnsemble::Rank2, DensityEnsemble::Full];

    pub fn name(self) -> &'static str {
        match self {
            DensityEnsemble::Pure => "pure",
            DensityEnsemble::Rank2 => "rank2",
            DensityEnsemble::Full => "full",
        }
    }

    pub fn rank(self, n: usize) -> usize {
        match self {
            DensityEnsemble::Pure => 1,
            DensityEnsemble::Rank2 => 2,
            DensityEnsemble::Full => 1 << n,
        }
    }

    pub fn sample<R: Rng + ?Sized>(self, n: usize, rng: &mut R) -> Result<ReducedDensity> {
        random_density(n, self.rank(n), rng)
    }
}

impl std::str::FromStr for DensityEnsemble {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown ensemble {s:?} (expected pure, rank2 or full)")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn density_has_requested_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for rank in 1..=8 {
            let rho = random_density(3, rank, &mut rng).unwrap();
            let eig = crate::qstate::hermitian_eigenvalues(rho.matrix());
            assert_eq!(eig.iter().filter(|&&l| l > 1e-10).count(), rank);
        }
    }

    #[test]
    fn su2_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u = random_su2(&mut rng);
        assert!((u * u.adjoint() - Matrix2::identity()).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn pure_state_is_reproducible() {
        let a = random_pure_state(4, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = random_pure_state(4, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }
}
