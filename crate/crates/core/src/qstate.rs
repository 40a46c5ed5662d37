//! State-vector representation of N-qubit pure states.
//!
//! Amplitudes are indexed big-endian: site 0 is the most significant bit of
//! the basis index, so for three qubits `|q0 q1 q2>` sits at index
//! `4*q0 + 2*q1 + q2`. Every module in the crate shares this convention.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::{DMatrix, Matrix2, Matrix3, Vector3};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Default upper bound on the register size.
pub const DEFAULT_MAX_QUBITS: usize = 20;

/// Conditional branch probability below which an outcome is treated as impossible.
pub const NULL_BRANCH_PROBABILITY: f64 = 1e-14;

const NORM_TOL: f64 = 1e-10;

/// Pauli axis label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[derive(serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn from_char(c: char) -> Option<Axis> {
        match c.to_ascii_lowercase() {
            'x' => Some(Axis::X),
            'y' => Some(Axis::Y),
            'z' => Some(Axis::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Axis::X => 'x',
            Axis::Y => 'y',
            Axis::Z => 'z',
        }
    }

    /// Whether the Pauli operator flips the computational basis bit.
    pub fn flips(self) -> bool {
        !matches!(self, Axis::Z)
    }
}

/// The 2x2 Pauli matrix for `axis`.
pub fn pauli(axis: Axis) -> Matrix2<C64> {
    let o = C64::new(0.0, 0.0);
    let l = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    match axis {
        Axis::X => Matrix2::new(o, l, l, o),
        Axis::Y => Matrix2::new(o, -i, i, o),
        Axis::Z => Matrix2::new(l, o, o, -l),
    }
}

/// Kronecker product of dense complex matrices.
pub fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    DMatrix::from_fn(ar * br, ac * bc, |r, c| a[(r / br, c / bc)] * b[(r % br, c % bc)])
}

fn check_site(site: usize, n: usize) -> Result<()> {
    if site >= n {
        return Err(Error::SiteOutOfRange { index: site, n_qubits: n });
    }
    Ok(())
}

fn check_distinct(sites: &[usize], n: usize) -> Result<()> {
    for (k, &s) in sites.iter().enumerate() {
        check_site(s, n)?;
        if sites[..k].contains(&s) {
            return Err(Error::DuplicateSite(s));
        }
    }
    Ok(())
}

/// Bit mask of `site` in an `n`-qubit basis index.
#[inline]
pub(crate) fn site_mask(n: usize, site: usize) -> usize {
    1 << (n - 1 - site)
}

/// A normalized N-qubit pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    n_qubits: usize,
    amplitudes: Vec<C64>,
}

impl PureState {
    /// Builds a state from raw amplitudes, normalizing them.
    ///
    /// The length must be a power of two between 2 and `2^DEFAULT_MAX_QUBITS`.
    pub fn from_amplitudes(amplitudes: Vec<C64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "amplitude count {len} is not a power of two >= 2"
            )));
        }
        let n = len.trailing_zeros() as usize;
        if n > DEFAULT_MAX_QUBITS {
            return Err(Error::SizeLimit { n, limit: DEFAULT_MAX_QUBITS });
        }
        let norm2: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if !(norm2.is_finite() && norm2 > 0.0) {
            return Err(Error::NotNormalized(norm2));
        }
        let scale = 1.0 / norm2.sqrt();
        let amplitudes = amplitudes.into_iter().map(|a| a * scale).collect();
        Ok(Self { n_qubits: n, amplitudes })
    }

    /// Like [`PureState::from_amplitudes`] but rejects inputs whose norm is
    /// off by more than `1e-10`.
    pub fn from_normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let norm2: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm2));
        }
        Self::from_amplitudes(amplitudes)
    }

    pub(crate) fn from_parts_unchecked(n_qubits: usize, amplitudes: Vec<C64>) -> Self {
        debug_assert_eq!(amplitudes.len(), 1 << n_qubits);
        Self { n_qubits, amplitudes }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Applies a single-qubit unitary to `site`.
    pub fn apply_local(&self, site: usize, u: &Matrix2<C64>) -> Result<Self> {
        check_site(site, self.n_qubits)?;
        let mask = site_mask(self.n_qubits, site);
        let mut out = self.amplitudes.clone();
        for idx in 0..self.dim() {
            if idx & mask != 0 {
                continue;
            }
            let a0 = self.amplitudes[idx];
            let a1 = self.amplitudes[idx | mask];
            out[idx] = u[(0, 0)] * a0 + u[(0, 1)] * a1;
            out[idx | mask] = u[(1, 0)] * a0 + u[(1, 1)] * a1;
        }
        Ok(Self { n_qubits: self.n_qubits, amplitudes: out })
    }

    /// Inner product `<self|other>`.
    pub fn inner(&self, other: &PureState) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::LengthMismatch { expected: self.dim(), got: other.dim() });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }
}

/// Computational basis state from a bitstring such as `"0101"`.
pub fn make_basis_state(n: usize, bits: &str) -> Result<PureState> {
    if n == 0 {
        return Err(Error::InvalidArgument("qubit count must be at least 1".into()));
    }
    if n > DEFAULT_MAX_QUBITS {
        return Err(Error::SizeLimit { n, limit: DEFAULT_MAX_QUBITS });
    }
    if bits.chars().count() != n {
        return Err(Error::LengthMismatch { expected: n, got: bits.chars().count() });
    }
    let mut index = 0usize;
    for c in bits.chars() {
        index <<= 1;
        match c {
            '0' => {}
            '1' => index |= 1,
            other => return Err(Error::Parse(format!("invalid bit character {other:?}"))),
        }
    }
    let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
    amps[index] = C64::new(1.0, 0.0);
    Ok(PureState::from_parts_unchecked(n, amps))
}

/// `(|0...0> + |1...1>)/sqrt(2)`.
pub fn make_ghz(n: usize) -> Result<PureState> {
    if n < 2 {
        return Err(Error::InvalidArgument("GHZ state needs at least 2 qubits".into()));
    }
    if n > DEFAULT_MAX_QUBITS {
        return Err(Error::SizeLimit { n, limit: DEFAULT_MAX_QUBITS });
    }
    let dim = 1usize << n;
    let mut amps = vec![C64::new(0.0, 0.0); dim];
    amps[0] = C64::new(FRAC_1_SQRT_2, 0.0);
    amps[dim - 1] = C64::new(FRAC_1_SQRT_2, 0.0);
    Ok(PureState::from_parts_unchecked(n, amps))
}

/// One-dimensional cluster state: `|+>^n` followed by a controlled phase on
/// every neighbouring pair `(k, k+1)`.
pub fn make_cluster(n: usize) -> Result<PureState> {
    if n < 2 {
        return Err(Error::InvalidArgument("cluster state needs at least 2 qubits".into()));
    }
    if n > DEFAULT_MAX_QUBITS {
        return Err(Error::SizeLimit { n, limit: DEFAULT_MAX_QUBITS });
    }
    let dim = 1usize << n;
    let scale = (dim as f64).sqrt().recip();
    let amps = (0..dim)
        .map(|idx| {
            // bits k and k+1 both set <=> bit of (idx & idx >> 1)
            let pairs = (idx & (idx >> 1)).count_ones();
            let sign = if pairs % 2 == 0 { 1.0 } else { -1.0 };
            C64::new(sign * scale, 0.0)
        })
        .collect();
    Ok(PureState::from_parts_unchecked(n, amps))
}

/// A point on the Bloch sphere selecting the projective basis `{|+>, |->}`
/// with `|+> = cos(θ/2)|0> + e^{iφ} sin(θ/2)|1>` and `|->` its orthogonal
/// complement `sin(θ/2)|0> - e^{iφ} cos(θ/2)|1>`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[derive(serde::Serialize, serde::Deserialize)]
pub struct MeasurementDirection {
    pub theta: f64,
    pub phi: f64,
}

impl Default for MeasurementDirection {
    fn default() -> Self {
        Self { theta: 0.0, phi: 0.0 }
    }
}

impl MeasurementDirection {
    /// Wraps `phi` into `[0, 2π)` and clamps `theta` into `[0, π]`.
    pub fn new(theta: f64, phi: f64) -> Self {
        let theta = theta.clamp(0.0, PI);
        let mut phi = phi.rem_euclid(2.0 * PI);
        if phi >= 2.0 * PI {
            phi = 0.0;
        }
        Self { theta, phi }
    }

    /// Direction with Bloch vector `(x, y, z)`; the vector need not be unit length.
    pub fn from_bloch(v: [f64; 3]) -> Self {
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if norm == 0.0 {
            return Self::default();
        }
        let z = (v[2] / norm).clamp(-1.0, 1.0);
        let phi = if v[0].abs() < 1e-300 && v[1].abs() < 1e-300 { 0.0 } else { v[1].atan2(v[0]) };
        Self::new(z.acos(), phi)
    }

    pub fn bloch(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }

    /// Direction from `x = [cos θ, sin θ cos φ, sin θ sin φ]`.
    pub fn from_xbar(x: [f64; 3]) -> Self {
        Self::from_bloch([x[1], x[2], x[0]])
    }

    pub fn xbar(&self) -> [f64; 3] {
        let b = self.bloch();
        [b[2], b[0], b[1]]
    }

    pub fn axis(axis: Axis) -> Self {
        match axis {
            Axis::X => Self::new(PI / 2.0, 0.0),
            Axis::Y => Self::new(PI / 2.0, PI / 2.0),
            Axis::Z => Self::new(0.0, 0.0),
        }
    }

    /// The basis vectors `(|+>, |->)` as `[amp0, amp1]` pairs.
    pub fn projectors(&self) -> ([C64; 2], [C64; 2]) {
        let (s, c) = (self.theta / 2.0).sin_cos();
        let ph = C64::from_polar(1.0, self.phi);
        (
            [C64::new(c, 0.0), ph * s],
            [C64::new(s, 0.0), -ph * c],
        )
    }
}

/// One outcome of a projective single-qubit measurement.
#[derive(Clone, Debug)]
pub struct Branch {
    pub probability: f64,
    /// Post-measurement state on the remaining qubits; `None` for a null branch.
    pub state: Option<PureState>,
}

impl Branch {
    pub fn is_null(&self) -> bool {
        self.state.is_none()
    }
}

/// The two outcomes of [`apply_measurement`].
#[derive(Clone, Debug)]
pub struct MeasurementOutcome {
    pub plus: Branch,
    pub minus: Branch,
}

/// Contracts `site` with `conj(m)` and drops it from the register, without normalizing.
pub(crate) fn project_site(amps: &[C64], n: usize, site: usize, m: &[C64; 2]) -> Vec<C64> {
    let low_bits = n - 1 - site;
    let low_mask = (1usize << low_bits) - 1;
    let (m0, m1) = (m[0].conj(), m[1].conj());
    let half = amps.len() / 2;
    let mut out = Vec::with_capacity(half);
    for r in 0..half {
        let hi = (r & !low_mask) << 1;
        let idx0 = hi | (r & low_mask);
        let idx1 = idx0 | (1 << low_bits);
        out.push(m0 * amps[idx0] + m1 * amps[idx1]);
    }
    out
}

/// Measures `site` in the basis selected by `dir`.
///
/// Each surviving branch carries the renormalized state of the other `n-1`
/// qubits, which keep their relative order.
pub fn apply_measurement(
    state: &PureState,
    site: usize,
    dir: MeasurementDirection,
) -> Result<MeasurementOutcome> {
    let n = state.n_qubits;
    check_site(site, n)?;
    if n < 2 {
        return Err(Error::InvalidArgument("cannot measure the last remaining qubit".into()));
    }
    let (mp, mm) = dir.projectors();
    let make = |m: &[C64; 2]| {
        let v = project_site(&state.amplitudes, n, site, m);
        let p: f64 = v.iter().map(|a| a.norm_sqr()).sum();
        (p, v)
    };
    let (pp, vp) = make(&mp);
    let (pm, vm) = make(&mm);
    let total = pp + pm;
    let branch = |p: f64, v: Vec<C64>| {
        let p = p / total;
        if p < NULL_BRANCH_PROBABILITY {
            Branch { probability: p, state: None }
        } else {
            let scale = (p * total).sqrt().recip();
            let amps = v.into_iter().map(|a| a * scale).collect();
            Branch { probability: p, state: Some(PureState::from_parts_unchecked(n - 1, amps)) }
        }
    };
    Ok(MeasurementOutcome { plus: branch(pp, vp), minus: branch(pm, vm) })
}

/// Hermitian density matrix of a few qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedDensity {
    sites: Vec<usize>,
    matrix: DMatrix<C64>,
}

impl ReducedDensity {
    /// Validates hermiticity, unit trace and positivity.
    pub fn new(sites: Vec<usize>, matrix: DMatrix<C64>) -> Result<Self> {
        let dim = 1usize << sites.len();
        if matrix.shape() != (dim, dim) {
            return Err(Error::InvalidDensity(format!(
                "expected {dim}x{dim} matrix, got {:?}",
                matrix.shape()
            )));
        }
        for (k, s) in sites.iter().enumerate() {
            if sites[..k].contains(s) {
                return Err(Error::DuplicateSite(*s));
            }
        }
        let herm = (&matrix - matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm > 1e-10 {
            return Err(Error::InvalidDensity(format!("not Hermitian (deviation {herm:e})")));
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > 1e-10 || trace.im.abs() > 1e-10 {
            return Err(Error::InvalidDensity(format!("trace is {trace}")));
        }
        let min_eig = hermitian_eigenvalues(&matrix).into_iter().fold(f64::INFINITY, f64::min);
        if min_eig < -1e-10 {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(Self { sites, matrix })
    }

    pub(crate) fn new_unchecked(sites: Vec<usize>, matrix: DMatrix<C64>) -> Self {
        Self { sites, matrix }
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn n_qubits(&self) -> usize {
        self.sites.len()
    }

    /// Position of an original site label within this density.
    pub fn position(&self, site: usize) -> Option<usize> {
        self.sites.iter().position(|&s| s == site)
    }

    /// `Tr(ρ P)` for a Pauli string given as `(position, axis)` pairs.
    pub fn expectation(&self, ops: &[(usize, Axis)]) -> f64 {
        let k = self.n_qubits();
        let mut flip = 0usize;
        let mut sign_mask = 0usize;
        let mut ny = 0;
        for &(pos, axis) in ops {
            let mask = 1 << (k - 1 - pos);
            if axis.flips() {
                flip |= mask;
            }
            if axis != Axis::X {
                sign_mask |= mask;
            }
            if axis == Axis::Y {
                ny += 1;
            }
        }
        // Tr(ρP) = Σ_b ρ[b, b^flip] * phase(b), with P|b> = phase(b)|b^flip>
        let mut acc = C64::new(0.0, 0.0);
        for b in 0..(1usize << k) {
            acc += self.matrix[(b, b ^ flip)] * pauli_phase(b, sign_mask, ny);
        }
        acc.re
    }

    /// Partial trace keeping the qubits at `positions` (in that order).
    pub fn marginal(&self, positions: &[usize]) -> Result<ReducedDensity> {
        let k = self.n_qubits();
        check_distinct(positions, k)?;
        let kept = positions.len();
        let rest: Vec<usize> = (0..k).filter(|p| !positions.contains(p)).collect();
        let bit = |p: usize| 1usize << (k - 1 - p);
        let place = |value: usize, slots: &[usize]| {
            slots.iter().enumerate().fold(0usize, |acc, (t, &p)| {
                if value & (1 << (slots.len() - 1 - t)) != 0 { acc | bit(p) } else { acc }
            })
        };
        let d = 1usize << kept;
        let matrix = DMatrix::from_fn(d, d, |a, b| {
            (0..(1usize << rest.len()))
                .map(|r| {
                    let off = place(r, &rest);
                    self.matrix[(place(a, positions) | off, place(b, positions) | off)]
                })
                .sum()
        });
        let sites = positions.iter().map(|&p| self.sites[p]).collect();
        Ok(ReducedDensity { sites, matrix })
    }

    /// Conjugates the qubit at `pos` by a single-qubit unitary: `ρ -> UρU†`.
    pub fn conjugate_local(&self, pos: usize, u: &Matrix2<C64>) -> Self {
        let k = self.n_qubits();
        let mut op = DMatrix::<C64>::identity(1, 1);
        for p in 0..k {
            let factor = if p == pos {
                DMatrix::from_fn(2, 2, |r, c| u[(r, c)])
            } else {
                DMatrix::identity(2, 2)
            };
            op = kron(&op, &factor);
        }
        let matrix = &op * &self.matrix * op.adjoint();
        Self { sites: self.sites.clone(), matrix }
    }
}

/// Phase picked up by basis state `|b>` under a Pauli string.
#[inline]
pub(crate) fn pauli_phase(b: usize, sign_mask: usize, ny: u32) -> C64 {
    let sign = if (b & sign_mask).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
    let iy = match ny % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    };
    iy * sign
}

pub(crate) fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
    sym.symmetric_eigenvalues().iter().copied().collect()
}

/// Partial trace onto `sites` (in the given order, first site most significant).
pub fn reduced_density(state: &PureState, sites: &[usize]) -> Result<ReducedDensity> {
    if sites.is_empty() || sites.len() > 3 {
        return Err(Error::InvalidArgument(format!(
            "reduced density supports 1 to 3 sites, got {}",
            sites.len()
        )));
    }
    check_distinct(sites, state.n_qubits)?;
    let matrix = reduced_matrix(&state.amplitudes, state.n_qubits, sites);
    Ok(ReducedDensity::new_unchecked(sites.to_vec(), matrix))
}

/// `Σ_rest ψ[a, rest] ψ*[b, rest]` for an unnormalized amplitude vector.
pub(crate) fn reduced_matrix(amps: &[C64], n: usize, sites: &[usize]) -> DMatrix<C64> {
    let k = sites.len();
    let sub_dim = 1usize << k;
    let offsets: Vec<usize> = (0..sub_dim)
        .map(|a| {
            (0..k)
                .filter(|t| a & (1 << (k - 1 - t)) != 0)
                .fold(0, |acc, t| acc | site_mask(n, sites[t]))
        })
        .collect();
    let all_mask = offsets[sub_dim - 1];
    let mut acc = vec![C64::new(0.0, 0.0); sub_dim * sub_dim];
    let mut v = vec![C64::new(0.0, 0.0); sub_dim];
    for idx in 0..amps.len() {
        if idx & all_mask != 0 {
            continue;
        }
        for (a, off) in offsets.iter().enumerate() {
            v[a] = amps[idx | off];
        }
        for a in 0..sub_dim {
            if v[a] == C64::new(0.0, 0.0) {
                continue;
            }
            for b in 0..sub_dim {
                acc[a * sub_dim + b] += v[a] * v[b].conj();
            }
        }
    }
    DMatrix::from_row_slice(sub_dim, sub_dim, &acc)
}

/// `<ψ|σ_{a1}^{s1} σ_{a2}^{s2}|ψ>` for at most two distinct sites.
pub fn pauli_expectation(state: &PureState, ops: &[(usize, Axis)]) -> Result<f64> {
    if ops.len() > 2 {
        return Err(Error::InvalidArgument("at most two site-axis pairs".into()));
    }
    let sites: Vec<usize> = ops.iter().map(|o| o.0).collect();
    check_distinct(&sites, state.n_qubits)?;
    let n = state.n_qubits;
    let mut flip = 0usize;
    let mut sign_mask = 0usize;
    let mut ny = 0;
    for &(site, axis) in ops {
        let mask = site_mask(n, site);
        if axis.flips() {
            flip |= mask;
        }
        if axis != Axis::X {
            sign_mask |= mask;
        }
        if axis == Axis::Y {
            ny += 1;
        }
    }
    let amps = &state.amplitudes;
    let mut acc = C64::new(0.0, 0.0);
    for (b, a) in amps.iter().enumerate() {
        acc += amps[b ^ flip].conj() * pauli_phase(b, sign_mask, ny) * a;
    }
    Ok(acc.re.clamp(-1.0, 1.0))
}

/// Connected two-point Pauli correlators between two sites.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationData {
    /// `q[(a, b)] = <σ_a^i σ_b^j> - <σ_a^i><σ_b^j>`
    pub q: Matrix3<f64>,
    pub mean_i: Vector3<f64>,
    pub mean_j: Vector3<f64>,
}

impl CorrelationData {
    /// Correlators of a two-qubit density; position 0 plays the role of `i`.
    pub fn from_density(rho: &ReducedDensity) -> Result<Self> {
        if rho.n_qubits() != 2 {
            return Err(Error::InvalidArgument("correlation data needs a 2-qubit density".into()));
        }
        Ok(Self::from_density_unchecked(rho))
    }

    pub(crate) fn from_density_unchecked(rho: &ReducedDensity) -> Self {
        let mean_i = Vector3::from_fn(|a, _| rho.expectation(&[(0, Axis::ALL[a])]));
        let mean_j = Vector3::from_fn(|b, _| rho.expectation(&[(1, Axis::ALL[b])]));
        let q = Matrix3::from_fn(|a, b| {
            rho.expectation(&[(0, Axis::ALL[a]), (1, Axis::ALL[b])]) - mean_i[a] * mean_j[b]
        });
        Self { q, mean_i, mean_j }
    }

    pub fn get(&self, a: Axis, b: Axis) -> f64 {
        self.q[(a.index(), b.index())]
    }
}

/// Correlation data of sites `i` and `j` of a pure state.
pub fn correlation_matrix(state: &PureState, i: usize, j: usize) -> Result<CorrelationData> {
    if i == j {
        return Err(Error::DuplicateSite(i));
    }
    let rho = reduced_density(state, &[i, j])?;
    Ok(CorrelationData::from_density_unchecked(&rho))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn basis_state_indexing() {
        let s = make_basis_state(1, "0").unwrap();
        assert_eq!(s.amplitudes(), &[c(1.0), c(0.0)]);
        let s = make_basis_state(2, "10").unwrap();
        assert_eq!(s.amplitudes()[2], c(1.0));
        let s = make_basis_state(3, "111").unwrap();
        assert_eq!(s.amplitudes()[7], c(1.0));
        assert!(matches!(make_basis_state(3, "01"), Err(Error::LengthMismatch { .. })));
        assert!(make_basis_state(2, "0a").is_err());
    }

    #[test]
    fn ghz_correlations() {
        assert!(make_ghz(1).is_err());
        let g = make_ghz(4).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                if i == j {
                    continue;
                }
                let cd = correlation_matrix(&g, i, j).unwrap();
                assert_abs_diff_eq!(cd.get(Axis::Z, Axis::Z), 1.0, epsilon = 1e-12);
                assert_abs_diff_eq!(cd.get(Axis::X, Axis::X), 0.0, epsilon = 1e-12);
                assert_abs_diff_eq!(cd.mean_i.norm(), 0.0, epsilon = 1e-12);
            }
        }
        let zz = pauli_expectation(&g, &[(0, Axis::Z), (3, Axis::Z)]).unwrap();
        assert_abs_diff_eq!(zz, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn ghz_marginal() {
        let rho = reduced_density(&make_ghz(4).unwrap(), &[0, 3]).unwrap();
        let m = rho.matrix();
        for r in 0..4 {
            for col in 0..4 {
                let want = if r == col && (r == 0 || r == 3) { 0.5 } else { 0.0 };
                assert_abs_diff_eq!(m[(r, col)].re, want, epsilon = 1e-12);
                assert_abs_diff_eq!(m[(r, col)].im, 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn cluster_marginals_are_maximally_mixed() {
        let s = make_cluster(5).unwrap();
        for i in 0..5 {
            for j in (i + 1)..5 {
                if (i, j) == (0, 1) || (i, j) == (3, 4) {
                    continue;
                }
                let rho = reduced_density(&s, &[i, j]).unwrap();
                let diff = rho.matrix() - DMatrix::<C64>::identity(4, 4) * c(0.25);
                assert!(diff.iter().all(|z| z.norm() < 1e-12), "pair ({i},{j})");
                let cd = correlation_matrix(&s, i, j).unwrap();
                assert!(cd.q.iter().all(|v| v.abs() < 1e-12));
            }
        }
    }

    #[test]
    fn cluster_edge_pairs_carry_stabilizers() {
        let s = make_cluster(5).unwrap();
        assert_abs_diff_eq!(pauli_expectation(&s, &[(0, Axis::X), (1, Axis::Z)]).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pauli_expectation(&s, &[(3, Axis::Z), (4, Axis::X)]).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn cluster_bloch_vectors_vanish() {
        let s = make_cluster(6).unwrap();
        assert_abs_diff_eq!(s.norm_sqr(), 1.0, epsilon = 1e-12);
        for site in 0..6 {
            for axis in Axis::ALL {
                let e = pauli_expectation(&s, &[(site, axis)]).unwrap();
                assert_abs_diff_eq!(e, 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn product_state_marginal() {
        let s = make_basis_state(4, "0101").unwrap();
        let rho = reduced_density(&s, &[1, 2]).unwrap();
        assert_abs_diff_eq!(rho.matrix()[(2, 2)].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(rho.matrix().iter().map(|z| z.norm()).sum::<f64>(), 1.0, epsilon = 1e-15);
        let cd = correlation_matrix(&make_basis_state(2, "00").unwrap(), 0, 1).unwrap();
        assert!(cd.q.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn reduced_density_rejects_bad_sites() {
        let s = make_ghz(3).unwrap();
        assert!(matches!(reduced_density(&s, &[0, 0]), Err(Error::DuplicateSite(0))));
        assert!(matches!(reduced_density(&s, &[0, 5]), Err(Error::SiteOutOfRange { .. })));
        assert!(correlation_matrix(&s, 1, 1).is_err());
    }

    #[test]
    fn single_qubit_expectations() {
        let s = make_basis_state(1, "0").unwrap();
        assert_eq!(pauli_expectation(&s, &[(0, Axis::Z)]).unwrap(), 1.0);
        assert_eq!(pauli_expectation(&s, &[(0, Axis::X)]).unwrap(), 0.0);
        let plus = PureState::from_amplitudes(vec![c(1.0), C64::new(0.0, 1.0)]).unwrap();
        assert_abs_diff_eq!(pauli_expectation(&plus, &[(0, Axis::Y)]).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn ghz_measurement_in_x_basis() {
        let g = make_ghz(3).unwrap();
        let out = apply_measurement(&g, 2, MeasurementDirection::new(PI / 2.0, 0.0)).unwrap();
        for b in [&out.plus, &out.minus] {
            assert_abs_diff_eq!(b.probability, 0.5, epsilon = 1e-15);
            let a = b.state.as_ref().unwrap().amplitudes();
            assert_abs_diff_eq!(2.0 * (a[0] * a[3] - a[1] * a[2]).norm(), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn eigenstate_measurement_has_null_branch() {
        let s = make_basis_state(3, "000").unwrap();
        let out = apply_measurement(&s, 0, MeasurementDirection::new(0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(out.plus.probability, 1.0, epsilon = 1e-15);
        assert!(out.minus.is_null());
        assert_eq!(out.plus.state.unwrap(), make_basis_state(2, "00").unwrap());
        assert!(apply_measurement(&s, 3, MeasurementDirection::default()).is_err());
    }

    #[test]
    fn projectors_are_orthonormal() {
        for k in 0..50 {
            let d = MeasurementDirection::new(k as f64 * 0.137, k as f64 * 0.711);
            let (p, m) = d.projectors();
            let pp = p[0].norm_sqr() + p[1].norm_sqr();
            let mm = m[0].norm_sqr() + m[1].norm_sqr();
            let pm = p[0].conj() * m[0] + p[1].conj() * m[1];
            assert_abs_diff_eq!(pp, 1.0, epsilon = 1e-14);
            assert_abs_diff_eq!(mm, 1.0, epsilon = 1e-14);
            assert!(pm.norm() < 1e-14);
        }
    }

    #[test]
    fn bloch_and_xbar_roundtrip() {
        let d = MeasurementDirection::new(1.1, 4.0);
        let back = MeasurementDirection::from_xbar(d.xbar());
        assert_abs_diff_eq!(back.theta, d.theta, epsilon = 1e-12);
        assert_abs_diff_eq!(back.phi, d.phi, epsilon = 1e-12);
        let z = MeasurementDirection::from_bloch([0.0, 0.0, -2.0]);
        assert_abs_diff_eq!(z.theta, PI, epsilon = 1e-15);
    }

    #[test]
    fn density_validation() {
        let bad = DMatrix::<C64>::identity(4, 4);
        assert!(ReducedDensity::new(vec![0, 1], bad).is_err());
        let mut neg = DMatrix::<C64>::zeros(4, 4);
        neg[(0, 0)] = c(1.2);
        neg[(1, 1)] = c(-0.2);
        assert!(ReducedDensity::new(vec![0, 1], neg).is_err());
        let ok = DMatrix::<C64>::identity(4, 4) * c(0.25);
        assert!(ReducedDensity::new(vec![0, 1], ok).is_ok());
    }
}
