//! Correlation-preserving measurement on a third qubit.
//!
//! For a three-qubit density split into 4x4 blocks with respect to the
//! measured qubit,
//!
//! ```text
//! ρ = [ ρ1  σ  ]
//!     [ σ†  ρ2 ]
//! ```
//!
//! a projective measurement with Bloch direction `x = [cos θ, sin θ cos φ,
//! sin θ sin φ]` leaves the unnormalized two-qubit operators
//!
//! ```text
//! X± = (ρ1+ρ2)/2 ± cos θ (ρ1-ρ2)/2 ± sin θ (cos φ (σ+σ†)/2 + sin φ i(σ-σ†)/2)
//! ```
//!
//! The zz correlator only sees populations. With `d = (d00, d01, d10, d11)`
//! the populations of a trace-`t` operator, `t² Qzz = 4(d00 d11 - d01 d10)`,
//! which is the quadratic form `dᵀ G d` with `G = -2 (σy⊗σy)`. Every scalar in
//! [`TheoremData`] uses this `G`, so `α` equals the initial `Qzz` exactly.
//! With `R` the matrix of population vectors and `S = Rᵀ G R`, the average
//! correlation after measuring along `x` does not decrease whenever
//! `xᵀ M x ≥ 0` with
//!
//! ```text
//! M = α (c - β/α)(c - β/α)ᵀ + Q - β βᵀ/α
//! ```
//!
//! `S` is congruent to `G`, so it has two positive and two negative
//! eigenvalues; the Schur complement `Q - ββᵀ/α` then keeps one positive
//! eigenvalue and `M` always has a nonnegative direction.

use nalgebra::{DMatrix, Matrix2, Matrix3, Matrix4, Vector3, Vector4};
use num_complex::Complex64 as C64;

use crate::ent_measures::max_correlation_of;
use crate::error::{Error, Result};
use crate::qstate::{CorrelationData, MeasurementDirection, ReducedDensity, NULL_BRANCH_PROBABILITY};

/// `|α|` at or below this value is treated as "no initial correlation".
pub const DEGENERATE_ALPHA: f64 = 1e-12;

/// Block form of a three-qubit density with respect to the measured qubit.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockDecomposition {
    pub rho1: Matrix4<C64>,
    pub rho2: Matrix4<C64>,
    pub sigma: Matrix4<C64>,
    pub measured: usize,
    /// Site labels of the two retained qubits, most significant first.
    pub retained: [usize; 2],
}

impl BlockDecomposition {
    /// The 8x8 matrix `[[ρ1, σ], [σ†, ρ2]]` (measured qubit most significant).
    pub fn reassemble(&self) -> DMatrix<C64> {
        DMatrix::from_fn(8, 8, |r, c| match (r / 4, c / 4) {
            (0, 0) => self.rho1[(r, c)],
            (0, 1) => self.sigma[(r, c - 4)],
            (1, 0) => self.sigma[(c, r - 4)].conj(),
            _ => self.rho2[(r - 4, c - 4)],
        })
    }

    /// `ρ1 + ρ2`, the two-qubit marginal of the retained qubits.
    pub fn marginal(&self) -> Matrix4<C64> {
        self.rho1 + self.rho2
    }

    /// Zero-block decomposition of `ρ_AB ⊗ |0><0|`.
    pub fn from_product(rho_ab: Matrix4<C64>, retained: [usize; 2], measured: usize) -> Self {
        Self { rho1: rho_ab, rho2: Matrix4::zeros(), sigma: Matrix4::zeros(), measured, retained }
    }
}

/// Splits a three-qubit density into blocks of the qubit labelled `measured`.
pub fn block_decompose(rho: &ReducedDensity, measured: usize) -> Result<BlockDecomposition> {
    if rho.n_qubits() != 3 {
        return Err(Error::InvalidArgument("block decomposition needs a 3-qubit density".into()));
    }
    let pm = rho.position(measured).ok_or(Error::SiteOutOfRange { index: measured, n_qubits: 3 })?;
    let kept: Vec<usize> = (0..3).filter(|&p| p != pm).collect();
    let bit = |p: usize| 1usize << (2 - p);
    // new index (m, a, b) -> old index
    let old = |m: usize, ab: usize| {
        let mut idx = 0;
        if m == 1 {
            idx |= bit(pm);
        }
        if ab & 2 != 0 {
            idx |= bit(kept[0]);
        }
        if ab & 1 != 0 {
            idx |= bit(kept[1]);
        }
        idx
    };
    let m = rho.matrix();
    let block = |mr: usize, mc: usize| Matrix4::from_fn(|r, c| m[(old(mr, r), old(mc, c))]);
    let sites = rho.sites();
    Ok(BlockDecomposition {
        rho1: block(0, 0),
        rho2: block(1, 1),
        sigma: block(0, 1),
        measured,
        retained: [sites[kept[0]], sites[kept[1]]],
    })
}

/// Single-qubit unitaries applied to sites `i` and `j` by [`prerotate_to_zz`].
#[derive(Clone, Debug, PartialEq)]
pub struct LocalRotation {
    pub u_i: Matrix2<C64>,
    pub u_j: Matrix2<C64>,
}

impl LocalRotation {
    pub fn identity() -> Self {
        Self { u_i: Matrix2::identity(), u_j: Matrix2::identity() }
    }

    pub fn inverse(&self) -> Self {
        Self { u_i: self.u_i.adjoint(), u_j: self.u_j.adjoint() }
    }

    pub fn is_identity(&self) -> bool {
        self.u_i == Matrix2::identity() && self.u_j == Matrix2::identity()
    }
}

/// Unitary `U` with `U (n·σ) U† = σz`; the identity for `n = +z`.
pub fn rotation_to_z(n: &Vector3<f64>) -> Matrix2<C64> {
    if n.x == 0.0 && n.y == 0.0 && n.z > 0.0 {
        return Matrix2::identity();
    }
    let (p, m) = MeasurementDirection::from_bloch([n.x, n.y, n.z]).projectors();
    Matrix2::new(p[0].conj(), p[1].conj(), -m[0].conj(), -m[1].conj())
}

/// Rotates sites `i` and `j` of a three-qubit density so that their maximal
/// correlation lies along `(z, z)` with a nonnegative sign.
pub fn prerotate_to_zz(rho3: &ReducedDensity, i: usize, j: usize) -> Result<(ReducedDensity, LocalRotation)> {
    let pi = rho3.position(i).ok_or(Error::SiteOutOfRange { index: i, n_qubits: rho3.n_qubits() })?;
    let pj = rho3.position(j).ok_or(Error::SiteOutOfRange { index: j, n_qubits: rho3.n_qubits() })?;
    if pi == pj {
        return Err(Error::DuplicateSite(i));
    }
    let marginal = rho3.marginal(&[pi, pj])?;
    let cd = CorrelationData::from_density_unchecked(&marginal);
    let mc = max_correlation_of(&cd.q);
    let rot = LocalRotation { u_i: rotation_to_z(&mc.left), u_j: rotation_to_z(&mc.right) };
    if rot.is_identity() {
        return Ok((rho3.clone(), rot));
    }
    let rotated = rho3.conjugate_local(pi, &rot.u_i).conjugate_local(pj, &rot.u_j);
    Ok((rotated, rot))
}

/// `G = -2 (σy⊗σy)`, so that `dᵀ G d = 4 (d00 d11 - d01 d10)`.
pub fn quadratic_form() -> Matrix4<f64> {
    Matrix4::new(
        0.0, 0.0, 0.0, 2.0,
        0.0, 0.0, -2.0, 0.0,
        0.0, -2.0, 0.0, 0.0,
        2.0, 0.0, 0.0, 0.0,
    )
}

/// Scalars and matrices of the direction construction.
#[derive(Clone, Debug, PartialEq)]
pub struct TheoremData {
    /// Columns: populations of `ρ1+ρ2`, `ρ1-ρ2`, `σ+σ†`, `i(σ-σ†)`.
    pub r: Matrix4<f64>,
    /// `Rᵀ G R`.
    pub s: Matrix4<f64>,
    pub alpha: f64,
    pub beta: Vector3<f64>,
    pub q_block: Matrix3<f64>,
    /// `p± = (1 ± c·x)/2`.
    pub c_vec: Vector3<f64>,
}

impl TheoremData {
    pub fn is_degenerate(&self) -> bool {
        self.alpha.abs() <= DEGENERATE_ALPHA
    }

    /// Number of (positive, negative) eigenvalues of `S` beyond `tol`.
    pub fn inertia(&self, tol: f64) -> (usize, usize) {
        let eig = self.s.symmetric_eigenvalues();
        (eig.iter().filter(|&&l| l > tol).count(), eig.iter().filter(|&&l| l < -tol).count())
    }

    /// The matrix `M` of the sufficient inequality, after flipping the sign
    /// convention so that the initial correlation is positive.
    pub fn certificate_matrix(&self) -> Option<Matrix3<f64>> {
        if self.is_degenerate() {
            return None;
        }
        let sign = self.alpha.signum();
        let a = self.alpha.abs();
        let b = self.beta * sign;
        let q = self.q_block * sign;
        let v = self.c_vec - b / a;
        Some(v * v.transpose() * a + q - b * b.transpose() / a)
    }

    /// Average `|Qzz|` after measuring along `x`, from the quadratic form.
    pub fn predicted_average(&self, x: &Vector3<f64>) -> f64 {
        let quad = self.alpha + x.dot(&(self.q_block * x));
        let lin = 2.0 * self.beta.dot(x);
        let cx = self.c_vec.dot(x);
        [(quad + lin, 1.0 + cx), (quad - lin, 1.0 - cx)]
            .into_iter()
            .map(|(k4, p2)| {
                let (k, p) = (k4 / 4.0, p2 / 2.0);
                if p < NULL_BRANCH_PROBABILITY { 0.0 } else { k.abs() / p }
            })
            .sum()
    }
}

fn diag_re(m: &Matrix4<C64>) -> Vector4<f64> {
    Vector4::from_fn(|k, _| m[(k, k)].re)
}

/// Builds `R`, `S` and the partition `α, β, Q, c`.
pub fn build_theorem_data(blocks: &BlockDecomposition) -> TheoremData {
    let sum = diag_re(&(blocks.rho1 + blocks.rho2));
    let diff = diag_re(&(blocks.rho1 - blocks.rho2));
    let re = Vector4::from_fn(|k, _| 2.0 * blocks.sigma[(k, k)].re);
    // diag of i(σ - σ†) = i (s - s̄) = -2 Im s
    let im = Vector4::from_fn(|k, _| -2.0 * blocks.sigma[(k, k)].im);
    let r = Matrix4::from_columns(&[sum, diff, re, im]);
    let s = r.transpose() * quadratic_form() * r;
    let s = (s + s.transpose()) * 0.5;
    let c_vec = Vector3::from_fn(|k, _| r.column(k + 1).sum());
    TheoremData {
        r,
        s,
        alpha: s[(0, 0)],
        beta: Vector3::new(s[(1, 0)], s[(2, 0)], s[(3, 0)]),
        q_block: s.fixed_view::<3, 3>(1, 1).into_owned(),
        c_vec,
    }
}

fn canonical_sign(mut x: Vector3<f64>) -> Vector3<f64> {
    if let Some(first) = x.iter().find(|v| v.abs() > 1e-12) {
        if *first < 0.0 {
            x = -x;
        }
    }
    x
}

/// Eigenvectors of a symmetric 3x3 matrix, largest eigenvalue first.
pub(crate) fn sorted_eigenvectors(m: &Matrix3<f64>) -> Vec<(f64, Vector3<f64>)> {
    let eig = m.symmetric_eigen();
    let mut pairs: Vec<(f64, Vector3<f64>)> = (0..3)
        .map(|k| (eig.eigenvalues[k], canonical_sign(eig.eigenvectors.column(k).into())))
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    pairs
}

/// Measurement direction on the third qubit that does not decrease the
/// average `|Qzz|` of the retained pair.
///
/// Nondegenerate data: the top eigenvector of the certificate matrix `M`.
/// When the initial correlation vanishes, the eigenvector of the `Q` block
/// with the largest predicted average is returned.
pub fn find_direction(td: &TheoremData) -> Result<MeasurementDirection> {
    let Some(m) = td.certificate_matrix() else {
        let best = sorted_eigenvectors(&td.q_block)
            .into_iter()
            .map(|(_, x)| (td.predicted_average(&x), x))
            .fold(None::<(f64, Vector3<f64>)>, |best, cur| match best {
                Some(b) if b.0 >= cur.0 - 1e-12 => Some(b),
                _ => Some(cur),
            })
            .expect("three candidates");
        return Ok(MeasurementDirection::from_xbar(best.1.into()));
    };
    let (_, x) = sorted_eigenvectors(&m)[0];
    let certificate = x.dot(&(m * x));
    let scale = m.abs().max().max(1.0);
    if certificate < -1e-9 * scale {
        return Err(Error::CertificateViolation(certificate));
    }
    Ok(MeasurementDirection::from_xbar(x.into()))
}

/// Branch probabilities and correlations after measuring along `dir`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BranchScore {
    pub p_plus: f64,
    pub corr_plus: f64,
    pub p_minus: f64,
    pub corr_minus: f64,
    /// `p₊|Qzz(X₊/p₊)| + p₋|Qzz(X₋/p₋)|`.
    pub average: f64,
}

/// Connected `Qzz` of a (possibly unnormalized) two-qubit operator, after normalization.
pub fn qzz(x: &Matrix4<C64>) -> f64 {
    let d = diag_re(x);
    let t = d.sum();
    if t <= 0.0 {
        return 0.0;
    }
    let zz = (d[0] - d[1] - d[2] + d[3]) / t;
    let zi = (d[0] + d[1] - d[2] - d[3]) / t;
    let zj = (d[0] - d[1] + d[2] - d[3]) / t;
    zz - zi * zj
}

/// Assembles `X±` directly and evaluates the branch correlations.
pub fn measure_and_score(blocks: &BlockDecomposition, dir: MeasurementDirection) -> BranchScore {
    let (st, ct) = dir.theta.sin_cos();
    let (sp, cp) = dir.phi.sin_cos();
    let half = C64::new(0.5, 0.0);
    let i = C64::new(0.0, 1.0);
    let sum = (blocks.rho1 + blocks.rho2) * half;
    let diff = (blocks.rho1 - blocks.rho2) * half;
    let coh = ((blocks.sigma + blocks.sigma.adjoint()) * C64::new(cp, 0.0)
        + (blocks.sigma - blocks.sigma.adjoint()) * (i * sp))
        * half;
    let shift = diff * C64::new(ct, 0.0) + coh * C64::new(st, 0.0);
    let branch = |x: Matrix4<C64>| {
        let p = x.trace().re;
        if p < NULL_BRANCH_PROBABILITY { (p.max(0.0), 0.0) } else { (p, qzz(&x).abs()) }
    };
    let (p_plus, corr_plus) = branch(sum + shift);
    let (p_minus, corr_minus) = branch(sum - shift);
    BranchScore {
        p_plus,
        corr_plus,
        p_minus,
        corr_minus,
        average: p_plus * corr_plus + p_minus * corr_minus,
    }
}

/// Outcome of one constructive step on a three-qubit density.
#[derive(Clone, Debug, PartialEq)]
pub struct TheoremCheck {
    /// Maximal correlation of the pair before measuring.
    pub initial: f64,
    /// Average `|Qzz|` of the pair after measuring along `direction`.
    pub average: f64,
    pub direction: MeasurementDirection,
    pub degenerate: bool,
    /// Number of (positive, negative) eigenvalues of `S`.
    pub inertia: (usize, usize),
}

impl TheoremCheck {
    pub fn gain(&self) -> f64 {
        self.average - self.initial
    }
}

/// Eigenvalues of `S` below this fraction of its largest entry count as zero.
/// Nearly singular full-rank states put genuine eigenvalues near `1e-10`.
pub const INERTIA_TOL: f64 = 1e-12;

/// Rotates the pair `(i, j)` to its maximal-correlation axes, measures `k`
/// along the constructed direction and reports the correlation before and after.
pub fn check_theorem(rho3: &ReducedDensity, i: usize, j: usize, k: usize) -> Result<TheoremCheck> {
    let (rotated, _) = prerotate_to_zz(rho3, i, j)?;
    let blocks = block_decompose(&rotated, k)?;
    if blocks.retained != [i, j] && blocks.retained != [j, i] {
        return Err(Error::InvalidArgument("measured site must differ from the pair".into()));
    }
    let td = build_theorem_data(&blocks);
    let direction = find_direction(&td)?;
    let score = measure_and_score(&blocks, direction);
    let scale = td.s.abs().max().max(f64::MIN_POSITIVE);
    Ok(TheoremCheck {
        initial: td.alpha,
        average: score.average,
        direction,
        degenerate: td.is_degenerate(),
        inertia: td.inertia(INERTIA_TOL * scale),
    })
}
