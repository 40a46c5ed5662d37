//! Two-qubit entanglement and correlation functionals.
//!
//! Correlators use Pauli matrices (eigenvalues ±1) with no spin-1/2 factor.

use nalgebra::{DMatrix, Matrix3, Vector3};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::qstate::{hermitian_eigenvalues, Axis, CorrelationData, PureState, ReducedDensity};

/// Concurrence `2|ad - bc|` of a normalized two-qubit amplitude vector.
pub fn concurrence_pure(amps: &[C64]) -> Result<f64> {
    if amps.len() != 4 {
        return Err(Error::LengthMismatch { expected: 4, got: amps.len() });
    }
    let norm2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    if (norm2 - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized(norm2));
    }
    Ok(weighted_concurrence(amps).min(1.0))
}

/// Concurrence of a two-qubit [`PureState`].
pub fn concurrence_of(state: &PureState) -> Result<f64> {
    if state.n_qubits() != 2 {
        return Err(Error::InvalidArgument("concurrence needs a 2-qubit state".into()));
    }
    concurrence_pure(state.amplitudes())
}

/// `2|ad - bc|` of an unnormalized vector, i.e. `p * C(ψ/√p)` with `p = |ψ|²`.
#[inline]
pub(crate) fn weighted_concurrence(u: &[C64]) -> f64 {
    2.0 * (u[0] * u[3] - u[1] * u[2]).norm()
}

/// Largest singular value of a correlation matrix with the local axes that realize it.
#[derive(Clone, Debug, PartialEq)]
pub struct MaxCorrelation {
    pub value: f64,
    /// Bloch axis on site `i`.
    pub left: Vector3<f64>,
    /// Bloch axis on site `j`; `leftᵀ q right = value`.
    pub right: Vector3<f64>,
}

/// Preference order for canonical axes when singular values are degenerate.
const CANONICAL_ORDER: [Axis; 3] = [Axis::Z, Axis::X, Axis::Y];

/// Maximal correlation from the SVD of the 3x3 correlation matrix.
///
/// When a canonical axis pair attains the maximum it is reported (pairs are
/// tried in the order z, x, y for each site); otherwise the top singular
/// vectors are returned with the largest-magnitude entry of `left` positive.
pub fn max_correlation(cd: &CorrelationData) -> MaxCorrelation {
    max_correlation_of(&cd.q)
}

pub(crate) fn max_correlation_of(q: &Matrix3<f64>) -> MaxCorrelation {
    let svd = q.svd(true, true);
    let (k, &value) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, &f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
    for a in CANONICAL_ORDER {
        for b in CANONICAL_ORDER {
            let qab = q[(a.index(), b.index())];
            if qab.abs() >= value - 1e-10 {
                let mut left = Vector3::zeros();
                let mut right = Vector3::zeros();
                left[a.index()] = 1.0;
                right[b.index()] = qab.signum();
                if qab == 0.0 {
                    right[b.index()] = 1.0;
                }
                return MaxCorrelation { value: qab.abs().max(value.max(0.0)), left, right };
            }
        }
    }
    let u = svd.u.expect("svd requested u");
    let v_t = svd.v_t.expect("svd requested v_t");
    let mut left: Vector3<f64> = u.column(k).into();
    let mut right: Vector3<f64> = v_t.row(k).transpose();
    let pivot = left.iter().enumerate().fold(0, |best, (idx, x)| {
        if x.abs() > left[best].abs() + 1e-12 { idx } else { best }
    });
    if left[pivot] < 0.0 {
        left = -left;
    }
    if left.dot(&(q * right)) < 0.0 {
        right = -right;
    }
    MaxCorrelation { value, left, right }
}

/// `σ_y ⊗ σ_y` in the computational basis.
pub(crate) fn sigma_yy() -> DMatrix<C64> {
    let mut m = DMatrix::<C64>::zeros(4, 4);
    m[(0, 3)] = C64::new(-1.0, 0.0);
    m[(1, 2)] = C64::new(1.0, 0.0);
    m[(2, 1)] = C64::new(1.0, 0.0);
    m[(3, 0)] = C64::new(-1.0, 0.0);
    m
}

/// Entanglement of assistance (concurrence) `Tr|Xᵀ (σy⊗σy) X|` with `X` the
/// principal square root of `ρ`.
pub fn assistance_upper_bound(rho: &ReducedDensity) -> Result<f64> {
    if rho.n_qubits() != 2 {
        return Err(Error::InvalidArgument("assistance bound needs a 2-qubit density".into()));
    }
    let min_eig = hermitian_eigenvalues(rho.matrix()).into_iter().fold(f64::INFINITY, f64::min);
    if min_eig < -1e-10 {
        return Err(Error::InvalidDensity(format!("negative eigenvalue {min_eig:e}")));
    }
    Ok(assistance_of_matrix(rho.matrix()))
}

/// Trace-norm formula on a (possibly unnormalized) positive 4x4 matrix.
pub(crate) fn assistance_of_matrix(rho: &DMatrix<C64>) -> f64 {
    let sym = (rho + rho.adjoint()) * C64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let roots = eig.eigenvalues.map(|l| if l > 1e-12 { l.sqrt() } else { 0.0 });
    let vecs = &eig.eigenvectors;
    let diag = DMatrix::from_diagonal(&roots.map(|r| C64::new(r, 0.0)));
    let x = vecs * diag * vecs.adjoint();
    let t = x.transpose() * sigma_yy() * &x;
    t.singular_values().iter().sum()
}

/// Which formula produced a bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[derive(serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundMethod {
    /// Largest singular value of the correlation matrix.
    MaxCorrelation,
    /// `max(Qxx, Qyy, Qzz)` for parity-symmetric states.
    ParityCorrelation,
    /// Trace norm of `Xᵀ(σy⊗σy)X`.
    Assistance,
    /// `(√s₊ + √s₋)/2` for parity-symmetric states.
    ParityAssistance,
}

/// Lower bound, optional estimate, and upper bound on the localizable entanglement.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundsRecord {
    pub lower: f64,
    pub upper: f64,
    pub le_estimate: Option<f64>,
    pub lower_method: BoundMethod,
    pub upper_method: BoundMethod,
}

impl BoundsRecord {
    /// `lower - tol <= x <= upper + tol`.
    pub fn contains(&self, x: f64, tol: f64) -> bool {
        x >= self.lower - tol && x <= self.upper + tol
    }
}

/// Closed-form bounds for parity-symmetric states.
///
/// `lower = max(Qxx, Qyy, Qzz)` and `upper = (√s₊ + √s₋)/2` with
/// `s± = (1 ± <σz σz>)² - (<σz^i> ± <σz^j>)²`. The caller asserts the
/// symmetry; a clearly negative `s±` is reported as an error.
pub fn parity_bounds(state: &PureState, i: usize, j: usize) -> Result<BoundsRecord> {
    let cd = crate::qstate::correlation_matrix(state, i, j)?;
    let zz = cd.get(Axis::Z, Axis::Z) + cd.mean_i[2] * cd.mean_j[2];
    let (zi, zj) = (cd.mean_i[2], cd.mean_j[2]);
    let s = |sign: f64, label: char| -> Result<f64> {
        let v = (1.0 + sign * zz).powi(2) - (zi + sign * zj).powi(2);
        if v < -1e-10 {
            return Err(Error::NegativeParityArgument { sign: label, value: v });
        }
        Ok(v.max(0.0))
    };
    let s_plus = s(1.0, '+')?;
    let s_minus = s(-1.0, '-')?;
    let lower = Axis::ALL.iter().map(|&a| cd.get(a, a)).fold(f64::NEG_INFINITY, f64::max);
    Ok(BoundsRecord {
        lower: lower.max(0.0),
        upper: (s_plus.sqrt() + s_minus.sqrt()) / 2.0,
        le_estimate: None,
        lower_method: BoundMethod::ParityCorrelation,
        upper_method: BoundMethod::ParityAssistance,
    })
}

/// Shannon entropy in bits.
pub fn binary_entropy(x: f64) -> f64 {
    let h = |p: f64| if p <= 0.0 { 0.0 } else { -p * p.log2() };
    h(x) + h(1.0 - x)
}

/// Entropy of entanglement of a pure two-qubit state with concurrence `c`.
pub fn entropy_from_concurrence(c: f64) -> Result<f64> {
    if !(-1e-12..=1.0 + 1e-12).contains(&c) {
        return Err(Error::InvalidArgument(format!("concurrence {c} outside [0, 1]")));
    }
    let c = c.clamp(0.0, 1.0);
    Ok(binary_entropy((1.0 + (1.0 - c * c).sqrt()) / 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{correlation_matrix, make_basis_state, make_ghz, reduced_density};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn concurrence_examples() {
        let bell = [c(FRAC_1_SQRT_2), c(0.0), c(0.0), c(FRAC_1_SQRT_2)];
        assert_abs_diff_eq!(concurrence_pure(&bell).unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(concurrence_pure(&[c(0.0), c(1.0), c(0.0), c(0.0)]).unwrap(), 0.0);
        let v = [c(0.8f64.sqrt()), c(0.0), c(0.0), c(0.2f64.sqrt())];
        assert_abs_diff_eq!(concurrence_pure(&v).unwrap(), 0.8, epsilon = 1e-15);
        assert!(matches!(concurrence_pure(&[c(1.0), c(1.0), c(0.0), c(0.0)]), Err(Error::NotNormalized(_))));
    }

    #[test]
    fn concurrence_cross_checked_with_purity() {
        // C² = 2(1 - Tr ρ_A²) for pure two-qubit states
        let v = [c(0.8f64.sqrt()), c(0.0), c(0.0), c(0.2f64.sqrt())];
        let s = PureState::from_normalized(v.to_vec()).unwrap();
        let rho = reduced_density(&s, &[0]).unwrap();
        let purity = (rho.matrix() * rho.matrix()).trace().re;
        assert_abs_diff_eq!((2.0 * (1.0 - purity)).sqrt(), 0.8, epsilon = 1e-14);
    }

    #[test]
    fn ghz_max_correlation_along_zz() {
        let cd = correlation_matrix(&make_ghz(4).unwrap(), 0, 2).unwrap();
        let mc = max_correlation(&cd);
        assert_abs_diff_eq!(mc.value, 1.0, epsilon = 1e-12);
        assert_eq!(mc.left, Vector3::new(0.0, 0.0, 1.0));
        assert_eq!(mc.right, Vector3::new(0.0, 0.0, 1.0));
    }

    #[test]
    fn zero_matrix_tie_break_is_zz() {
        let cd = correlation_matrix(&make_basis_state(3, "010").unwrap(), 0, 2).unwrap();
        let mc = max_correlation(&cd);
        assert_eq!(mc.value, 0.0);
        assert_eq!(mc.left, Vector3::new(0.0, 0.0, 1.0));
        assert_eq!(mc.right, Vector3::new(0.0, 0.0, 1.0));
    }

    #[test]
    fn generic_axes_realize_value() {
        let q = Matrix3::new(0.1, 0.3, -0.2, 0.05, -0.4, 0.1, 0.2, 0.0, 0.15);
        let mc = max_correlation_of(&q);
        assert_abs_diff_eq!(mc.left.dot(&(q * mc.right)), mc.value, epsilon = 1e-12);
        assert_abs_diff_eq!(mc.left.norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn assistance_examples() {
        let mixed = ReducedDensity::new(vec![0, 1], DMatrix::identity(4, 4) * c(0.25)).unwrap();
        assert_abs_diff_eq!(assistance_upper_bound(&mixed).unwrap(), 1.0, epsilon = 1e-12);
        let bell = reduced_density(&make_ghz(2).unwrap(), &[0, 1]).unwrap();
        assert_abs_diff_eq!(assistance_upper_bound(&bell).unwrap(), 1.0, epsilon = 1e-12);
        let prod = reduced_density(&make_basis_state(2, "00").unwrap(), &[0, 1]).unwrap();
        assert_abs_diff_eq!(assistance_upper_bound(&prod).unwrap(), 0.0, epsilon = 1e-12);
        let one = reduced_density(&make_ghz(3).unwrap(), &[0]).unwrap();
        assert!(assistance_upper_bound(&one).is_err());
    }

    #[test]
    fn parity_bound_examples() {
        let b = parity_bounds(&make_ghz(4).unwrap(), 0, 3).unwrap();
        assert_abs_diff_eq!(b.upper, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b.lower, 1.0, epsilon = 1e-12);
        let b = parity_bounds(&make_basis_state(2, "00").unwrap(), 0, 1).unwrap();
        assert_abs_diff_eq!(b.upper, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b.lower, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy_from_concurrence(0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(entropy_from_concurrence(1.0).unwrap(), 1.0, epsilon = 1e-15);
        // independent evaluation of H(0.9) with natural logs
        let h = -(0.9f64 * 0.9f64.ln() + 0.1 * 0.1f64.ln()) / 2f64.ln();
        assert_abs_diff_eq!(entropy_from_concurrence(0.6).unwrap(), h, epsilon = 1e-14);
        assert_abs_diff_eq!(h, 0.4690, epsilon = 1e-4);
        assert!(entropy_from_concurrence(1.1).is_err());
        assert!(entropy_from_concurrence(-0.01).is_err());
    }

    #[test]
    fn entropy_is_increasing() {
        let vals: Vec<f64> = (0..=100).map(|k| entropy_from_concurrence(k as f64 / 100.0).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[1] > w[0]));
    }
}
