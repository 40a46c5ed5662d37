//! Two-body spin Hamiltonians and their ground states.
//!
//! ```text
//! H = - Σ γ^{ij}_{ab} σ_a^i σ_b^j  - Σ_i γ^i σ_z^i  - Σ_i ε^i σ_x^i
//! ```
//!
//! Same-axis couplings (`a == b`) make up the parity-preserving family; the
//! x-field term exists only to break the parity symmetry on purpose.

mod ground;

pub use ground::{dense_matrix, dense_spectrum, ground_state, GroundStateResult, SolverConfig};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::qstate::{pauli_phase, site_mask, Axis};

/// A single two-body term `γ σ_a^i σ_b^j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    pub i: usize,
    pub j: usize,
    /// Two-letter axis pair such as `"xx"` or `"xz"`.
    #[serde(with = "axes_serde")]
    pub axes: (Axis, Axis),
    pub strength: f64,
}

impl Coupling {
    pub fn same_axis(i: usize, j: usize, axis: Axis, strength: f64) -> Self {
        Self { i, j, axes: (axis, axis), strength }
    }
}

mod axes_serde {
    use super::Axis;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(axes: &(Axis, Axis), s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{}{}", axes.0.as_char(), axes.1.as_char()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(Axis, Axis), D::Error> {
        let s = String::deserialize(d)?;
        let mut chars = s.chars();
        match (chars.next().and_then(Axis::from_char), chars.next().and_then(Axis::from_char), chars.next()) {
            (Some(a), Some(b), None) => Ok((a, b)),
            _ => Err(D::Error::custom(format!("invalid axis pair {s:?}"))),
        }
    }
}

/// Coupling coefficients and fields of a Hamiltonian.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianSpec {
    pub n_qubits: usize,
    /// Marks the spec as a member of the `γx ≥ γy ≥ 0` same-axis family.
    #[serde(default)]
    pub paper_family: bool,
    #[serde(default)]
    pub couplings: Vec<Coupling>,
    pub z_fields: Vec<f64>,
    #[serde(default)]
    pub x_fields: Vec<f64>,
}

impl HamiltonianSpec {
    /// Empty Hamiltonian on `n` qubits.
    pub fn empty(n: usize) -> Self {
        Self {
            n_qubits: n,
            paper_family: false,
            couplings: Vec::new(),
            z_fields: vec![0.0; n],
            x_fields: vec![0.0; n],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_qubits;
        if n == 0 {
            return Err(Error::InvalidArgument("n_qubits must be positive".into()));
        }
        if self.z_fields.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: self.z_fields.len() });
        }
        if !self.x_fields.is_empty() && self.x_fields.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: self.x_fields.len() });
        }
        for c in &self.couplings {
            for site in [c.i, c.j] {
                if site >= n {
                    return Err(Error::SiteOutOfRange { index: site, n_qubits: n });
                }
            }
            if c.i == c.j {
                return Err(Error::DuplicateSite(c.i));
            }
            if !c.strength.is_finite() {
                return Err(Error::InvalidArgument("non-finite coupling strength".into()));
            }
        }
        if self.paper_family {
            self.check_family()?;
        }
        Ok(())
    }

    /// Checks `γx^{ij} ≥ γy^{ij} ≥ 0` with only same-axis couplings.
    fn check_family(&self) -> Result<()> {
        use std::collections::BTreeMap;
        let mut per_pair: BTreeMap<(usize, usize), [f64; 3]> = BTreeMap::new();
        for c in &self.couplings {
            if c.axes.0 != c.axes.1 {
                return Err(Error::InvalidArgument(format!(
                    "mixed-axis coupling ({}, {}) outside the same-axis family",
                    c.i, c.j
                )));
            }
            let key = (c.i.min(c.j), c.i.max(c.j));
            per_pair.entry(key).or_default()[c.axes.0.index()] += c.strength;
        }
        for ((i, j), g) in per_pair {
            if !(g[0] >= g[1] && g[1] >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "pair ({i}, {j}) violates γx ≥ γy ≥ 0 (γx = {}, γy = {})",
                    g[0], g[1]
                )));
            }
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("spec serializes to TOML")
    }

    /// Compiles the spec into Pauli-string terms.
    pub(crate) fn terms(&self) -> Vec<PauliTerm> {
        let n = self.n_qubits;
        let mut terms = Vec::new();
        for c in &self.couplings {
            if c.strength == 0.0 {
                continue;
            }
            let mut t = PauliTerm { flip: 0, sign_mask: 0, ny: 0, coef: -c.strength };
            t.push(n, c.i, c.axes.0);
            t.push(n, c.j, c.axes.1);
            terms.push(t);
        }
        for (site, &g) in self.z_fields.iter().enumerate() {
            if g != 0.0 {
                let mut t = PauliTerm { flip: 0, sign_mask: 0, ny: 0, coef: -g };
                t.push(n, site, Axis::Z);
                terms.push(t);
            }
        }
        for (site, &e) in self.x_fields.iter().enumerate() {
            if e != 0.0 {
                let mut t = PauliTerm { flip: 0, sign_mask: 0, ny: 0, coef: -e };
                t.push(n, site, Axis::X);
                terms.push(t);
            }
        }
        terms
    }
}

/// `coef * P` with `P|b> = phase(b) |b ^ flip>`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct PauliTerm {
    pub flip: usize,
    pub sign_mask: usize,
    pub ny: u32,
    pub coef: f64,
}

impl PauliTerm {
    fn push(&mut self, n: usize, site: usize, axis: Axis) {
        let mask = site_mask(n, site);
        if axis.flips() {
            self.flip ^= mask;
        }
        if axis != Axis::X {
            self.sign_mask ^= mask;
        }
        if axis == Axis::Y {
            self.ny += 1;
        }
    }

    /// `<b ^ flip| coef P |b>`
    #[inline]
    pub fn element(&self, b: usize) -> C64 {
        pauli_phase(b, self.sign_mask, self.ny) * self.coef
    }
}

/// Transverse-field Ising chain: couplings `λ σx^k σx^{k+1}`, unit z-fields and
/// an optional uniform x-field `ε`.
pub fn ising_spec(n: usize, lambda: f64, epsilon_x: f64, periodic: bool) -> Result<HamiltonianSpec> {
    if n < 2 {
        return Err(Error::InvalidArgument("Ising chain needs at least 2 sites".into()));
    }
    if lambda.is_nan() || lambda < 0.0 {
        return Err(Error::InvalidArgument(format!("coupling λ = {lambda} must be >= 0")));
    }
    let mut couplings: Vec<Coupling> =
        (0..n - 1).map(|k| Coupling::same_axis(k, k + 1, Axis::X, lambda)).collect();
    if periodic && n > 2 {
        couplings.push(Coupling::same_axis(n - 1, 0, Axis::X, lambda));
    }
    Ok(HamiltonianSpec {
        n_qubits: n,
        paper_family: true,
        couplings,
        z_fields: vec![1.0; n],
        x_fields: vec![epsilon_x; n],
    })
}

/// Matrix-free `H v`.
pub fn apply_hamiltonian(spec: &HamiltonianSpec, v: &[C64]) -> Result<Vec<C64>> {
    let dim = 1usize << spec.n_qubits;
    if v.len() != dim {
        return Err(Error::LengthMismatch { expected: dim, got: v.len() });
    }
    let mut out = vec![C64::new(0.0, 0.0); dim];
    apply_terms(&spec.terms(), v, &mut out, dim >= 1 << 12);
    Ok(out)
}

/// Gathers `(Hv)[b] = Σ_t <b|T|b^flip> v[b^flip]`.
pub(crate) fn apply_terms(terms: &[PauliTerm], v: &[C64], out: &mut [C64], parallel: bool) {
    par::fill_indexed(out, parallel, |b| {
        let mut acc = C64::new(0.0, 0.0);
        for t in terms {
            let src = b ^ t.flip;
            acc += t.element(src) * v[src];
        }
        acc
    });
}

/// Whether `H` commutes with `⊗σz`: every term flips an even number of bits.
pub fn parity_symmetric(spec: &HamiltonianSpec) -> bool {
    let odd_coupling = spec
        .couplings
        .iter()
        .any(|c| c.strength != 0.0 && (c.axes.0.flips() as u8 + c.axes.1.flips() as u8) % 2 == 1);
    let x_field = spec.x_fields.iter().any(|&e| e != 0.0);
    !odd_coupling && !x_field
}

/// Saturation value `¼ (1 - λ^{-2})^{1/4}` of the ordered-phase correlator.
pub fn ising_saturation_mx2(lambda: f64) -> Result<f64> {
    if lambda.is_nan() || lambda <= 1.0 {
        return Err(Error::InvalidArgument(format!("saturation formula needs λ > 1, got {lambda}")));
    }
    Ok(0.25 * (1.0 - lambda.powi(-2)).powf(0.25))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;

    #[test]
    fn ising_spec_counts() {
        let s = ising_spec(4, 0.5, 0.0, false).unwrap();
        assert_eq!(s.couplings.len(), 3);
        assert_eq!(s.z_fields, vec![1.0; 4]);
        assert!(s.validate().is_ok());
        assert_eq!(ising_spec(4, 0.5, 0.0, true).unwrap().couplings.len(), 4);
        assert!(ising_spec(1, 0.5, 0.0, false).is_err());
        assert!(ising_spec(3, -0.1, 0.0, false).is_err());
    }

    #[test]
    fn parity_detection() {
        assert!(parity_symmetric(&ising_spec(14, 1.0, 0.0, false).unwrap()));
        assert!(!parity_symmetric(&ising_spec(14, 1.0, 1e-3, false).unwrap()));
        let mut s = HamiltonianSpec::empty(2);
        s.couplings.push(Coupling { i: 0, j: 1, axes: (Axis::X, Axis::Z), strength: 1.0 });
        assert!(!parity_symmetric(&s));
        s.couplings[0].axes = (Axis::X, Axis::Y);
        assert!(parity_symmetric(&s));
    }

    #[test]
    fn field_only_eigenvector() {
        let s = ising_spec(5, 0.0, 0.0, false).unwrap();
        let mut v = vec![C64::new(0.0, 0.0); 32];
        v[0] = C64::new(1.0, 0.0);
        let hv = apply_hamiltonian(&s, &v).unwrap();
        assert_abs_diff_eq!(hv[0].re, -5.0, epsilon = 1e-15);
        assert!(hv[1..].iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn zero_spec_gives_zero() {
        let s = HamiltonianSpec::empty(3);
        let v: Vec<C64> = (0..8).map(|k| C64::new(k as f64, 1.0)).collect();
        assert!(apply_hamiltonian(&s, &v).unwrap().iter().all(|z| z.norm() == 0.0));
        assert!(apply_hamiltonian(&s, &v[..4]).is_err());
    }

    #[test]
    fn two_site_matches_dense_construction() {
        // H = -λ σx⊗σx - σz⊗1 - 1⊗σz, built by hand
        let lambda = 1.0;
        let s = ising_spec(2, lambda, 0.0, false).unwrap();
        let h = DMatrix::from_row_slice(4, 4, &[
            -2.0, 0.0, 0.0, -lambda,
            0.0, 0.0, -lambda, 0.0,
            0.0, -lambda, 0.0, 0.0,
            -lambda, 0.0, 0.0, 2.0,
        ]);
        for b in 0..4 {
            let mut v = vec![C64::new(0.0, 0.0); 4];
            v[b] = C64::new(1.0, 0.0);
            let hv = apply_hamiltonian(&s, &v).unwrap();
            for r in 0..4 {
                assert_abs_diff_eq!(hv[r].re, h[(r, b)], epsilon = 1e-15);
                assert_abs_diff_eq!(hv[r].im, 0.0, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn y_coupling_is_hermitian() {
        let mut s = HamiltonianSpec::empty(3);
        s.couplings.push(Coupling { i: 0, j: 2, axes: (Axis::X, Axis::Y), strength: 0.7 });
        s.couplings.push(Coupling::same_axis(1, 2, Axis::Y, 0.3));
        let h = dense_matrix(&s);
        let diff = &h - h.adjoint();
        assert!(diff.iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn family_validation() {
        let mut s = ising_spec(3, 1.0, 0.0, false).unwrap();
        s.couplings.push(Coupling::same_axis(0, 1, Axis::Y, 2.0));
        assert!(s.validate().is_err());
        s.paper_family = false;
        assert!(s.validate().is_ok());
    }

    #[test]
    fn toml_roundtrip() {
        let s = ising_spec(4, 0.8, 1e-3, true).unwrap();
        let text = s.to_toml();
        assert!(text.contains("axes = \"xx\""));
        assert_eq!(HamiltonianSpec::from_toml(&text).unwrap(), s);
        assert!(HamiltonianSpec::from_toml("n_qubits = 2\nz_fields = [1.0]").is_err());
    }

    #[test]
    fn saturation_formula() {
        assert_abs_diff_eq!(ising_saturation_mx2(1e9).unwrap(), 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(ising_saturation_mx2(2.0).unwrap(), 0.25 * 0.75f64.powf(0.25), epsilon = 1e-15);
        assert_abs_diff_eq!(ising_saturation_mx2(2.0).unwrap(), 0.23265, epsilon = 1e-5);
        assert!(ising_saturation_mx2(1.0001).unwrap() < 0.04);
        assert!(ising_saturation_mx2(1.0).is_err());
    }
}
