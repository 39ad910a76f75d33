//! Generalized Bell operators and their commutators with local observables.
//!
//! A generalized Bell operator is `A = sum_{i,j >= 1} alpha_ij s_i ⊗ s_j` over
//! the traceless members of an operator basis, with a unit-norm coefficient
//! tensor `alpha`. Conjugating the local observable back to a fixed reference
//! (`sigma_3 ⊗ sigma_3` for qubits, `Z ⊗ Z` for qudits) reduces the supremum
//! of `||[A, local]||_2` to a supremum over `alpha` alone, for which closed
//! forms exist:
//!
//! * qubits: `||[A, sigma_3 ⊗ sigma_3]||_2 = 4 sqrt(a13^2 + a23^2 + a31^2 + a32^2) <= 4`;
//! * qudits: `[A, Z ⊗ Z] = sum alpha_ij (1 - w^(a_i + a_j)) s_succ(i) ⊗ s_succ(j)`,
//!   where `a_i = i div d`, giving a norm of at most `2d`.
//!
//! Every closed form here has a direct dense-matrix counterpart so the two
//! routes can be compared.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::bases::{expand_in_pauli, omega_pow, pauli, WeylBasis, WeylIndex};
use crate::bell::{spin_observable, UnitVector3};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, I, ONE, PREDICATE_TOL, ZERO};

/// Tolerance on `|sum |alpha|^2 - 1|` for a tensor to count as normalized.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// The only reference index the closed-form qudit expansion supports (`Z`).
pub const QUDIT_REFERENCE_INDEX: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Real,
    Complex,
}

/// Which operator family a tensor's indices refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorFamily {
    Pauli,
    Weyl,
}

/// Coefficients `alpha_ij`, `i, j in 1..=d^2-1`, of a generalized Bell operator.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffTensor {
    d: usize,
    field: FieldKind,
    entries: Vec<Complex64>,
}

impl CoeffTensor {
    /// Row-major entries over `(i, j)`; `entries.len()` must be `(d^2 - 1)^2`.
    pub fn new(d: usize, field: FieldKind, entries: Vec<Complex64>) -> Result<Self> {
        if d < 2 {
            return Err(Error::domain(format!("tensor dimension must be at least 2, got {d}")));
        }
        let side = d * d - 1;
        if entries.len() != side * side {
            return Err(Error::domain(format!(
                "tensor for d = {d} needs {} entries, got {}",
                side * side,
                entries.len()
            )));
        }
        if let Some(index) = entries.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        if field == FieldKind::Real {
            if let Some(k) = entries.iter().position(|z| z.im != 0.0) {
                return Err(Error::domain(format!(
                    "real tensor has imaginary part {} at flat index {k}",
                    entries[k].im
                )));
            }
        }
        Ok(Self { d, field, entries })
    }

    pub fn from_real(d: usize, entries: &[f64]) -> Result<Self> {
        Self::new(d, FieldKind::Real, entries.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn zeros(d: usize, field: FieldKind) -> Result<Self> {
        let side = d.saturating_mul(d).saturating_sub(1);
        Self::new(d, field, vec![ZERO; side * side])
    }

    /// Tensor with the listed 1-based entries set and all others zero.
    pub fn with_entries(d: usize, field: FieldKind, items: &[((usize, usize), Complex64)]) -> Result<Self> {
        let mut t = Self::zeros(d, field)?;
        for &((i, j), v) in items {
            t.set(i, j, v)?;
        }
        Ok(t)
    }

    /// Standard-normal entries (both parts for complex tensors), normalized.
    pub fn random<R: Rng + ?Sized>(d: usize, field: FieldKind, rng: &mut R) -> Result<Self> {
        let side = d * d - 1;
        let entries = (0..side * side)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = match field {
                    FieldKind::Real => 0.0,
                    FieldKind::Complex => rng.sample(StandardNormal),
                };
                Complex64::new(re, im)
            })
            .collect();
        Self::new(d, field, entries)?.normalized()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn field(&self) -> FieldKind {
        self.field
    }

    /// `d^2 - 1`.
    pub fn side(&self) -> usize {
        self.d * self.d - 1
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Pauli for real qubit tensors, Weyl otherwise.
    pub fn family(&self) -> OperatorFamily {
        if self.d == 2 && self.field == FieldKind::Real {
            OperatorFamily::Pauli
        } else {
            OperatorFamily::Weyl
        }
    }

    fn flat(&self, i: usize, j: usize) -> Result<usize> {
        let side = self.side();
        if i == 0 || j == 0 || i > side || j > side {
            return Err(Error::domain(format!(
                "tensor index ({i}, {j}) out of range 1..={side} for d = {}",
                self.d
            )));
        }
        Ok((i - 1) * side + (j - 1))
    }

    /// `alpha_ij` with 1-based indices.
    pub fn get(&self, i: usize, j: usize) -> Result<Complex64> {
        Ok(self.entries[self.flat(i, j)?])
    }

    pub fn set(&mut self, i: usize, j: usize, value: Complex64) -> Result<()> {
        if self.field == FieldKind::Real && value.im != 0.0 {
            return Err(Error::domain("cannot store a complex value in a real tensor"));
        }
        if !value.re.is_finite() || !value.im.is_finite() {
            return Err(Error::domain("tensor entries must be finite"));
        }
        let k = self.flat(i, j)?;
        self.entries[k] = value;
        Ok(())
    }

    /// Nonzero-safe iteration over `((i, j), alpha_ij)` with 1-based indices.
    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), Complex64)> + '_ {
        let side = self.side();
        self.entries.iter().enumerate().map(move |(k, &v)| ((k / side + 1, k % side + 1), v))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>() - 1.0).abs() <= NORMALIZATION_TOL
    }

    /// Rescaled to unit Frobenius norm; the all-zero tensor is rejected.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.frobenius_norm();
        if n == 0.0 {
            return Err(Error::domain("cannot normalize the zero tensor"));
        }
        Ok(Self {
            d: self.d,
            field: self.field,
            entries: self.entries.iter().map(|z| z / n).collect(),
        })
    }

    /// Same entries reinterpreted as a complex tensor (and hence Weyl family).
    pub fn to_complex(&self) -> Self {
        Self { d: self.d, field: FieldKind::Complex, entries: self.entries.clone() }
    }

    fn require_normalized(&self) -> Result<()> {
        if !self.is_normalized() {
            return Err(Error::domain(format!(
                "tensor is not normalized: sum |alpha|^2 = {}",
                self.frobenius_norm().powi(2)
            )));
        }
        Ok(())
    }

    fn require_real_qubit(&self) -> Result<()> {
        if self.d != 2 || self.field != FieldKind::Real {
            return Err(Error::domain(format!(
                "qubit closed forms need a real d = 2 tensor, got d = {} ({:?})",
                self.d, self.field
            )));
        }
        Ok(())
    }

    fn require_weyl(&self) -> Result<()> {
        if self.family() != OperatorFamily::Weyl {
            return Err(Error::domain(
                "real d = 2 tensors index the Pauli family; convert with to_complex() for the Weyl route",
            ));
        }
        Ok(())
    }
}

/// JSON form: `{d, field_kind, entries: [[re, im], ...]}` row-major over `(i, j)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoeffTensorJson {
    pub d: usize,
    pub field_kind: FieldKind,
    pub entries: Vec<[f64; 2]>,
}

impl From<&CoeffTensor> for CoeffTensorJson {
    fn from(t: &CoeffTensor) -> Self {
        Self { d: t.d, field_kind: t.field, entries: t.entries.iter().map(|z| [z.re, z.im]).collect() }
    }
}

impl TryFrom<CoeffTensorJson> for CoeffTensor {
    type Error = Error;

    fn try_from(j: CoeffTensorJson) -> Result<Self> {
        CoeffTensor::new(j.d, j.field_kind, j.entries.iter().map(|[re, im]| Complex64::new(*re, *im)).collect())
    }
}

impl Serialize for CoeffTensor {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CoeffTensorJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for CoeffTensor {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let j = CoeffTensorJson::deserialize(de)?;
        CoeffTensor::try_from(j).map_err(serde::de::Error::custom)
    }
}

fn traceless_family(t: &CoeffTensor) -> Result<Vec<ComplexMatrix>> {
    Ok(match t.family() {
        OperatorFamily::Pauli => vec![pauli(1), pauli(2), pauli(3)],
        OperatorFamily::Weyl => {
            let basis = WeylBasis::new(t.d)?;
            basis.iter().skip(1).cloned().collect()
        }
    })
}

fn assemble(t: &CoeffTensor, family: &[ComplexMatrix]) -> ComplexMatrix {
    let d = t.d;
    let side = t.side();
    let mut out = ComplexMatrix::zeros(d * d, d * d);
    for (i, left) in family.iter().enumerate() {
        let mut right = ComplexMatrix::zeros(d, d);
        for (j, s) in family.iter().enumerate() {
            let a = t.entries[i * side + j];
            if a != ZERO {
                right.add_scaled(a, s);
            }
        }
        out = &out + &left.tensor(&right);
    }
    out
}

/// `sum_{i,j} alpha_ij s_i ⊗ s_j` over the tensor's operator family.
pub fn generalized_bell(t: &CoeffTensor) -> Result<ComplexMatrix> {
    Ok(assemble(t, &traceless_family(t)?))
}

/// Same sum over a precomputed Weyl basis regardless of field kind.
pub fn generalized_bell_weyl(t: &CoeffTensor, basis: &WeylBasis) -> Result<ComplexMatrix> {
    if basis.dim() != t.d {
        return Err(Error::domain(format!("basis d = {} does not match tensor d = {}", basis.dim(), t.d)));
    }
    let family: Vec<ComplexMatrix> = basis.iter().skip(1).cloned().collect();
    Ok(assemble(t, &family))
}

/// `A(r) ⊗ B(s)`.
pub fn local_observable_qubit(r: &UnitVector3, s: &UnitVector3) -> ComplexMatrix {
    spin_observable(r).tensor(&spin_observable(s))
}

/// Row `i` holds the Pauli coefficients of `U sigma_(i+1) U†`.
pub type Rotation3 = [[f64; 3]; 3];

pub const IDENTITY_ROTATION: Rotation3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

pub fn rotation_determinant(r: &Rotation3) -> f64 {
    r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1]) - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
        + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0])
}

/// Max deviation of `R R^T` from the identity.
pub fn orthogonality_deviation(r: &Rotation3) -> f64 {
    let mut dev = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            let dot: f64 = (0..3).map(|k| r[i][k] * r[j][k]).sum();
            let expect = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((dot - expect).abs());
        }
    }
    dev
}

/// Adjoint action of a qubit unitary on the Pauli vector.
pub fn unitary_to_rotation(u: &ComplexMatrix) -> Result<Rotation3> {
    if u.rows() != 2 || u.cols() != 2 {
        return Err(Error::domain(format!("expected a 2x2 unitary, got {}x{}", u.rows(), u.cols())));
    }
    let dev = u.unitarity_deviation();
    if dev > PREDICATE_TOL {
        return Err(Error::domain(format!("matrix is not unitary (deviation {dev:e})")));
    }
    let ud = u.dagger();
    let mut r = [[0.0; 3]; 3];
    for (i, row) in r.iter_mut().enumerate() {
        let conj = &(u * &pauli(i + 1)) * &ud;
        let c = expand_in_pauli(&conj)?;
        for (j, x) in row.iter_mut().enumerate() {
            *x = c[j + 1].re;
        }
    }
    Ok(r)
}

/// `alpha'_pq = sum_ij alpha_ij R_ip S_jq`: the coefficients of
/// `(U ⊗ V) A (U ⊗ V)†` when `R`, `S` come from `U`, `V`.
pub fn conjugate_coeffs_qubit(t: &CoeffTensor, r: &Rotation3, s: &Rotation3) -> Result<CoeffTensor> {
    t.require_real_qubit()?;
    for (name, m) in [("R", r), ("S", s)] {
        let dev = orthogonality_deviation(m);
        if dev > PREDICATE_TOL {
            return Err(Error::domain(format!("{name} is not orthogonal (deviation {dev:e})")));
        }
    }
    let mut out = [0.0; 9];
    for i in 0..3 {
        for j in 0..3 {
            let a = t.entries[i * 3 + j].re;
            if a == 0.0 {
                continue;
            }
            for p in 0..3 {
                for q in 0..3 {
                    out[p * 3 + q] += a * r[i][p] * s[j][q];
                }
            }
        }
    }
    CoeffTensor::from_real(2, &out)
}

/// Closed form of `[A, sigma_3 ⊗ sigma_3]`:
/// `2i (a23 sigma_1⊗I + a32 I⊗sigma_1 - a13 sigma_2⊗I - a31 I⊗sigma_2)`.
pub fn qubit_commutator_sigma33(t: &CoeffTensor) -> Result<ComplexMatrix> {
    t.require_real_qubit()?;
    let a = |i: usize, j: usize| t.entries[(i - 1) * 3 + (j - 1)].re;
    let id = ComplexMatrix::identity(2);
    let mut out = ComplexMatrix::zeros(4, 4);
    out.add_scaled(Complex64::new(a(2, 3), 0.0), &pauli(1).tensor(&id));
    out.add_scaled(Complex64::new(a(3, 2), 0.0), &id.tensor(&pauli(1)));
    out.add_scaled(Complex64::new(-a(1, 3), 0.0), &pauli(2).tensor(&id));
    out.add_scaled(Complex64::new(-a(3, 1), 0.0), &id.tensor(&pauli(2)));
    Ok(out.scale(2.0 * I))
}

/// `4 sqrt(a13^2 + a23^2 + a31^2 + a32^2)` for a normalized real qubit tensor.
pub fn m_value_qubit(t: &CoeffTensor) -> Result<f64> {
    t.require_real_qubit()?;
    t.require_normalized()?;
    let a = |i: usize, j: usize| t.entries[(i - 1) * 3 + (j - 1)].re;
    Ok(4.0 * (a(1, 3).powi(2) + a(2, 3).powi(2) + a(3, 1).powi(2) + a(3, 2).powi(2)).sqrt())
}

/// Direct route: `||[A, sigma_3 ⊗ sigma_3]||_2` from dense matrices.
pub fn qubit_commutator_norm_direct(t: &CoeffTensor, local: &ComplexMatrix) -> Result<f64> {
    t.require_real_qubit()?;
    Ok(generalized_bell(t)?.commutator(local)?.hs_norm())
}

/// A qubit unitary with `U sigma_3 U† = r . sigma`: the rotation carrying the
/// z axis onto `r`.
pub fn unitary_rotating_z_to(r: &UnitVector3) -> ComplexMatrix {
    let [x, y, z] = r.components();
    // axis z × r = (-y, x, 0)
    let (mut nx, mut ny) = (-y, x);
    let sin = (nx * nx + ny * ny).sqrt();
    if sin < 1e-15 {
        (nx, ny) = (1.0, 0.0);
    } else {
        nx /= sin;
        ny /= sin;
    }
    let theta = sin.atan2(z);
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let generator = &pauli(1).scale_real(nx) + &pauli(2).scale_real(ny);
    &ComplexMatrix::identity(2).scale_real(c) + &generator.scale(Complex64::new(0.0, -s))
}

/// Tensor `alpha'` with `||[A(alpha), A(r) ⊗ B(s)]||_2 = ||[A(alpha'), sigma_3 ⊗ sigma_3]||_2`,
/// obtained by conjugating `A` with `(U ⊗ V)†` where `A(r) = U sigma_3 U†`,
/// `B(s) = V sigma_3 V†`.
pub fn reduce_qubit_setting(t: &CoeffTensor, r: &UnitVector3, s: &UnitVector3) -> Result<CoeffTensor> {
    let ru = unitary_to_rotation(&unitary_rotating_z_to(r).dagger())?;
    let rv = unitary_to_rotation(&unitary_rotating_z_to(s).dagger())?;
    conjugate_coeffs_qubit(t, &ru, &rv)
}

/// The qubit supremum together with explicit points attaining it.
#[derive(Debug, Clone, Serialize)]
pub struct QubitSupremum {
    pub value: f64,
    /// `alpha_23 = 1`, attaining the value against `sigma_3 ⊗ sigma_3`.
    pub reduced_tensor: CoeffTensor,
    /// The normalized classic Bell operator's tensor.
    pub bell_tensor: CoeffTensor,
    /// Local setting `A(r) ⊗ B(s)` attaining the value for `bell_tensor`.
    pub r: UnitVector3,
    pub s: UnitVector3,
}

pub fn m_sup_qubit_closed() -> QubitSupremum {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    QubitSupremum {
        value: 4.0,
        reduced_tensor: CoeffTensor::with_entries(2, FieldKind::Real, &[((2, 3), ONE)]).expect("static"),
        bell_tensor: CoeffTensor::with_entries(2, FieldKind::Real, &[((1, 1), h), ((3, 3), h)]).expect("static"),
        r: UnitVector3::x_axis(),
        s: UnitVector3::z_axis(),
    }
}

/// `(1 - w^(a_i + a_j))` contributions of `[A, Z ⊗ Z]`, keyed by the target
/// pair `(succ(i), succ(j))` (0-based Weyl indices; 0 is the identity).
///
/// `reference` must be [`QUDIT_REFERENCE_INDEX`]; other local references are
/// only available through [`qudit_commutator_norm_direct`].
pub fn qudit_commutator_coeffs(t: &CoeffTensor, reference: usize) -> Result<BTreeMap<(usize, usize), Complex64>> {
    if reference != QUDIT_REFERENCE_INDEX {
        return Err(Error::domain(format!(
            "closed-form expansion is defined for reference index {QUDIT_REFERENCE_INDEX} (Z ⊗ Z), got {reference}"
        )));
    }
    t.require_weyl()?;
    let d = t.d;
    let mut out = BTreeMap::new();
    for ((i, j), alpha) in t.iter() {
        let (wi, wj) = (WeylIndex::from_flat(d, i)?, WeylIndex::from_flat(d, j)?);
        let factor = ONE - omega_pow(d, (wi.a + wj.a) as i64);
        let target = (wi.successor().flat(), wj.successor().flat());
        let prev = out.insert(target, alpha * factor);
        debug_assert!(prev.is_none(), "successor map is injective");
    }
    Ok(out)
}

/// Rebuilds the matrix `sum coeff s_i' ⊗ s_j'` from [`qudit_commutator_coeffs`].
pub fn qudit_commutator_from_coeffs(
    coeffs: &BTreeMap<(usize, usize), Complex64>,
    basis: &WeylBasis,
) -> ComplexMatrix {
    let d = basis.dim();
    let mut out = ComplexMatrix::zeros(d * d, d * d);
    for (&(p, q), &c) in coeffs {
        if c != ZERO {
            out.add_scaled(c, &basis.get(p).tensor(basis.get(q)));
        }
    }
    out
}

/// `d sqrt(sum |alpha_ij|^2 |1 - w^(a_i + a_j)|^2)` for a normalized tensor.
pub fn m_value_qudit(t: &CoeffTensor) -> Result<f64> {
    t.require_normalized()?;
    let coeffs = qudit_commutator_coeffs(t, QUDIT_REFERENCE_INDEX)?;
    Ok(t.d as f64 * coeffs.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt())
}

/// Precomputed `|1 - w^(a_i + a_j)|^2` for fast evaluation of the
/// closed-form qudit value inside optimization loops.
#[derive(Debug, Clone)]
pub struct QuditWeights {
    d: usize,
    weights: Vec<f64>,
}

impl QuditWeights {
    pub fn new(d: usize) -> Result<Self> {
        m_d_bound(d)?;
        let side = d * d - 1;
        let mut weights = Vec::with_capacity(side * side);
        for i in 1..=side {
            for j in 1..=side {
                weights.push((ONE - omega_pow(d, (i / d + j / d) as i64)).norm_sqr());
            }
        }
        Ok(Self { d, weights })
    }

    /// Closed-form value for a tensor given as interleaved `(re, im)` pairs,
    /// assumed normalized.
    pub fn value_interleaved(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), 2 * self.weights.len());
        let s: f64 = self
            .weights
            .iter()
            .zip(x.chunks_exact(2))
            .map(|(w, c)| w * (c[0] * c[0] + c[1] * c[1]))
            .sum();
        self.d as f64 * s.sqrt()
    }

    pub fn value(&self, t: &CoeffTensor) -> Result<f64> {
        if t.dim() != self.d {
            return Err(Error::domain("tensor dimension does not match weights"));
        }
        t.require_normalized()?;
        let s: f64 = self.weights.iter().zip(&t.entries).map(|(w, z)| w * z.norm_sqr()).sum();
        Ok(self.d as f64 * s.sqrt())
    }
}

/// Direct route: `||[A, s_i0 ⊗ s_i0]||_2` over dense Weyl matrices.
pub fn qudit_commutator_norm_direct(t: &CoeffTensor, basis: &WeylBasis, i0: usize) -> Result<f64> {
    t.require_weyl()?;
    if i0 == 0 || i0 >= basis.len() {
        return Err(Error::domain(format!("reference index {i0} must be in 1..{}", basis.len())));
    }
    let local = basis.get(i0).tensor(basis.get(i0));
    Ok(generalized_bell_weyl(t, basis)?.commutator(&local)?.hs_norm())
}

/// Local qudit setting `U s_i0 U† ⊗ V s_i0 V†`.
#[derive(Debug, Clone)]
pub struct LocalSettingQudit {
    u_alice: ComplexMatrix,
    u_bob: ComplexMatrix,
    i0: usize,
}

impl LocalSettingQudit {
    pub fn new(u_alice: ComplexMatrix, u_bob: ComplexMatrix, i0: usize) -> Result<Self> {
        let d = u_alice.rows();
        if !u_alice.is_square() || u_bob.rows() != d || u_bob.cols() != d {
            return Err(Error::domain("local unitaries must be square with equal dimension"));
        }
        for (name, u) in [("U", &u_alice), ("V", &u_bob)] {
            let dev = u.unitarity_deviation();
            if dev > PREDICATE_TOL {
                return Err(Error::domain(format!("{name} is not unitary (deviation {dev:e})")));
            }
        }
        if i0 == 0 || i0 >= d * d {
            return Err(Error::domain(format!("reference index {i0} must be in 1..{}", d * d)));
        }
        Ok(Self { u_alice, u_bob, i0 })
    }

    pub fn dim(&self) -> usize {
        self.u_alice.rows()
    }

    pub fn reference_index(&self) -> usize {
        self.i0
    }

    pub fn observable(&self, basis: &WeylBasis) -> Result<ComplexMatrix> {
        if basis.dim() != self.dim() {
            return Err(Error::domain("basis dimension does not match local setting"));
        }
        let s = basis.get(self.i0);
        let a = &(&self.u_alice * s) * &self.u_alice.dagger();
        let b = &(&self.u_bob * s) * &self.u_bob.dagger();
        Ok(a.tensor(&b))
    }

    /// Weyl operators other than the identity are generally not hermitian;
    /// reports carry this flag rather than rejecting the setting.
    pub fn is_hermitian(&self, basis: &WeylBasis) -> Result<bool> {
        Ok(self.observable(basis)?.is_hermitian())
    }
}

/// Direct route for a full local setting: `||[A, U s U† ⊗ V s V†]||_2`.
pub fn qudit_commutator_norm_local(t: &CoeffTensor, basis: &WeylBasis, local: &LocalSettingQudit) -> Result<f64> {
    t.require_weyl()?;
    Ok(generalized_bell_weyl(t, basis)?.commutator(&local.observable(basis)?)?.hs_norm())
}

/// Upper bound `2d` on the qudit supremum.
pub fn m_d_bound(d: usize) -> Result<f64> {
    if d < 2 {
        return Err(Error::domain(format!("d must be at least 2, got {d}")));
    }
    Ok(2.0 * d as f64)
}

/// Exhaustive exponent scan result.
#[derive(Debug, Clone, Serialize)]
pub struct BestKnown {
    pub d: usize,
    pub value: f64,
    /// Maximizing exponent `m = (a_i + a_j) mod d`.
    pub exponent: usize,
    /// Smallest maximizing `(i, j)` in lexicographic order.
    pub source: (usize, usize),
    /// Unit weight at `source`.
    pub certificate: CoeffTensor,
    /// Every exponent realized by some `(i, j)`, sorted.
    pub reachable_exponents: Vec<usize>,
}

/// `d * max |1 - w^m|` over exponents reachable as `a_i + a_j`,
/// `1 <= i, j <= d^2 - 1`.
pub fn m_d_best_known(d: usize) -> Result<BestKnown> {
    m_d_bound(d)?;
    let side = d * d - 1;
    let mut reachable = vec![false; d];
    let mut best: Option<(f64, usize, (usize, usize))> = None;
    for i in 1..=side {
        for j in 1..=side {
            let m = (i / d + j / d) % d;
            reachable[m] = true;
            let v = d as f64 * (ONE - omega_pow(d, m as i64)).norm();
            // ties (m vs d - m) differ only by rounding
            if best.is_none_or(|(b, _, _)| v > b + 1e-12) {
                best = Some((v, m, (i, j)));
            }
        }
    }
    let (value, exponent, source) = best.expect("side >= 3");
    let certificate = CoeffTensor::with_entries(d, FieldKind::Complex, &[(source, ONE)])?;
    Ok(BestKnown {
        d,
        value,
        exponent,
        source,
        certificate,
        reachable_exponents: (0..d).filter(|&m| reachable[m]).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bases::{clock_z, shift_x};
    use crate::unitary::expm;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn real_single(i: usize, j: usize) -> CoeffTensor {
        CoeffTensor::with_entries(2, FieldKind::Real, &[((i, j), ONE)]).unwrap()
    }

    fn complex_single(d: usize, i: usize, j: usize) -> CoeffTensor {
        CoeffTensor::with_entries(d, FieldKind::Complex, &[((i, j), ONE)]).unwrap()
    }

    fn zz() -> ComplexMatrix {
        pauli(3).tensor(&pauli(3))
    }

    #[test]
    fn tensor_validation() {
        assert!(CoeffTensor::new(2, FieldKind::Real, vec![ZERO; 8]).is_err());
        assert!(CoeffTensor::new(1, FieldKind::Real, vec![]).is_err());
        let mut e = vec![ZERO; 9];
        e[4] = I;
        assert!(CoeffTensor::new(2, FieldKind::Real, e.clone()).is_err());
        assert!(CoeffTensor::new(2, FieldKind::Complex, e).is_ok());
        assert!(CoeffTensor::zeros(2, FieldKind::Real).unwrap().normalized().is_err());
        let mut t = CoeffTensor::zeros(3, FieldKind::Complex).unwrap();
        assert!(t.set(0, 1, ONE).is_err());
        assert!(t.set(9, 1, ONE).is_err());
        t.set(8, 8, ONE).unwrap();
        assert_eq!(t.get(8, 8).unwrap(), ONE);
    }

    #[test]
    fn tensor_json_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let t = CoeffTensor::random(3, FieldKind::Complex, &mut rng).unwrap();
        let s = serde_json::to_string(&t).unwrap();
        assert!(s.contains("\"field_kind\":\"complex\""));
        let back: CoeffTensor = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t);
        let bad = r#"{"d":2,"field_kind":"real","entries":[[0.0,1.0]]}"#;
        assert!(serde_json::from_str::<CoeffTensor>(bad).is_err());
    }

    #[test]
    fn generalized_bell_cases() {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let t = CoeffTensor::with_entries(2, FieldKind::Real, &[((1, 1), h), ((3, 3), h)]).unwrap();
        let b0p = (&pauli(1).tensor(&pauli(1)) + &zz()).scale_real(FRAC_1_SQRT_2);
        assert!(generalized_bell(&t).unwrap().approx_eq(&b0p, 1e-15));
        let t = real_single(2, 3);
        assert_eq!(generalized_bell(&t).unwrap(), pauli(2).tensor(&pauli(3)));
        let t = complex_single(3, 1, 1);
        let z = clock_z(3).unwrap();
        assert!(generalized_bell(&t).unwrap().approx_eq(&z.tensor(&z), 1e-15));
    }

    #[test]
    fn generalized_bell_norm_matches_tensor_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for d in 2..=4 {
            for field in [FieldKind::Real, FieldKind::Complex] {
                let t = CoeffTensor::random(d, field, &mut rng).unwrap();
                let n = generalized_bell(&t).unwrap().hs_norm();
                assert!((n - d as f64).abs() < 1e-10, "d = {d}");
            }
        }
    }

    #[test]
    fn local_observable_cases() {
        let (x, z) = (UnitVector3::x_axis(), UnitVector3::z_axis());
        assert_eq!(local_observable_qubit(&z, &z), zz());
        assert_eq!(local_observable_qubit(&x, &z), pauli(1).tensor(&pauli(3)));
        let r = UnitVector3::normalized(0.2, -0.4, 0.9).unwrap();
        let s = UnitVector3::normalized(-1.0, 0.1, 0.3).unwrap();
        let o = local_observable_qubit(&r, &s);
        assert!(o.is_hermitian());
        assert!((&o * &o).approx_eq(&ComplexMatrix::identity(4), 1e-12));
    }

    #[test]
    fn rotation_cases() {
        let r = unitary_to_rotation(&ComplexMatrix::identity(2)).unwrap();
        assert!(r.iter().flatten().zip(IDENTITY_ROTATION.iter().flatten()).all(|(a, b)| (a - b).abs() < 1e-15));

        // exp(-i pi sigma_3 / 4): quarter turn about z, sigma_1 -> sigma_2
        let u = expm(&pauli(3).scale(Complex64::new(0.0, -FRAC_PI_4))).unwrap();
        let r = unitary_to_rotation(&u).unwrap();
        let expect = [[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 1.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((r[i][j] - expect[i][j]).abs() < 1e-12, "{r:?}");
            }
        }

        let r = unitary_to_rotation(&pauli(1)).unwrap();
        let expect = [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]];
        assert_eq!(r, expect);
        assert!(unitary_to_rotation(&ComplexMatrix::identity(2).scale_real(1.1)).is_err());
        assert!(unitary_to_rotation(&ComplexMatrix::identity(3)).is_err());
    }

    #[test]
    fn rotation_is_special_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..50 {
            let u = crate::unitary::random_unitary(2, &mut rng);
            let r = unitary_to_rotation(&u).unwrap();
            assert!(orthogonality_deviation(&r) < 1e-10);
            assert!((rotation_determinant(&r) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn conjugate_coeffs_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let t = CoeffTensor::random(2, FieldKind::Real, &mut rng).unwrap();
        let same = conjugate_coeffs_qubit(&t, &IDENTITY_ROTATION, &IDENTITY_ROTATION).unwrap();
        assert_eq!(same, t);

        // axis 1 -> axis 3 on Alice's side
        let r = [[0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [-1.0, 0.0, 0.0]];
        let out = conjugate_coeffs_qubit(&real_single(1, 1), &r, &IDENTITY_ROTATION).unwrap();
        assert_eq!(out.get(3, 1).unwrap(), ONE);
        assert!((out.frobenius_norm() - 1.0).abs() < 1e-15);

        let u = crate::unitary::random_unitary(2, &mut rng);
        let v = crate::unitary::random_unitary(2, &mut rng);
        let (ru, rv) = (unitary_to_rotation(&u).unwrap(), unitary_to_rotation(&v).unwrap());
        let out = conjugate_coeffs_qubit(&t, &ru, &rv).unwrap();
        assert!((out.frobenius_norm() - 1.0).abs() < 1e-12);
        let uv = u.tensor(&v);
        let direct = &(&uv * &generalized_bell(&t).unwrap()) * &uv.dagger();
        assert!(generalized_bell(&out).unwrap().approx_eq(&direct, 1e-10));

        let bad = [[2.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert!(conjugate_coeffs_qubit(&t, &bad, &IDENTITY_ROTATION).is_err());
        assert!(conjugate_coeffs_qubit(&t.to_complex(), &IDENTITY_ROTATION, &IDENTITY_ROTATION).is_err());
    }

    #[test]
    fn qubit_commutator_cases() {
        let c = qubit_commutator_sigma33(&real_single(2, 3)).unwrap();
        let direct = pauli(2).tensor(&pauli(3)).commutator(&zz()).unwrap();
        let expect = pauli(1).tensor(&ComplexMatrix::identity(2)).scale(2.0 * I);
        assert!(c.approx_eq(&expect, 1e-15) && direct.approx_eq(&expect, 1e-15));

        let b0 = m_sup_qubit_closed().bell_tensor;
        assert_eq!(qubit_commutator_sigma33(&b0).unwrap().max_abs(), 0.0);

        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let t = CoeffTensor::with_entries(2, FieldKind::Real, &[((1, 3), h), ((3, 1), h)]).unwrap();
        let c = qubit_commutator_sigma33(&t).unwrap();
        let id = ComplexMatrix::identity(2);
        let expect = (&pauli(2).tensor(&id) + &id.tensor(&pauli(2))).scale(Complex64::new(0.0, -2.0 * FRAC_1_SQRT_2));
        assert!(c.approx_eq(&expect, 1e-15));
        assert!((c.hs_norm() - 4.0).abs() < 1e-14);
        assert!(qubit_commutator_sigma33(&complex_single(3, 1, 1)).is_err());
    }

    #[test]
    fn m_value_qubit_cases() {
        assert_eq!(m_value_qubit(&real_single(2, 3)).unwrap(), 4.0);
        assert!(m_value_qubit(&m_sup_qubit_closed().bell_tensor).unwrap().abs() < 1e-15);
        assert_eq!(m_value_qubit(&real_single(1, 1)).unwrap(), 0.0);
        let unnorm = CoeffTensor::from_real(2, &[2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(m_value_qubit(&unnorm).is_err());
    }

    #[test]
    fn qubit_supremum_certificates() {
        let sup = m_sup_qubit_closed();
        assert_eq!(sup.value, 4.0);
        assert!(sup.bell_tensor.is_normalized() && sup.reduced_tensor.is_normalized());
        assert_eq!(m_value_qubit(&sup.reduced_tensor).unwrap(), 4.0);
        let local = local_observable_qubit(&sup.r, &sup.s);
        let c = generalized_bell(&sup.bell_tensor).unwrap().commutator(&local).unwrap();
        // sqrt 2 i (sigma_2 ⊗ I - I ⊗ sigma_2)
        let id = ComplexMatrix::identity(2);
        let expect = (&pauli(2).tensor(&id) - &id.tensor(&pauli(2))).scale(Complex64::new(0.0, 2f64.sqrt()));
        assert!(c.approx_eq(&expect, 1e-15));
        assert!((c.hs_norm() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn certificate_rotation_reaches_four() {
        // H = (sigma_1 + sigma_3)/sqrt 2 maps sigma_3 -> sigma_1, so conjugating
        // B0' by H on Alice's side is the reduction of the sigma_1 ⊗ sigma_3 setting.
        let h = (&pauli(1) + &pauli(3)).scale_real(FRAC_1_SQRT_2);
        let r = unitary_to_rotation(&h.dagger()).unwrap();
        let t = conjugate_coeffs_qubit(&m_sup_qubit_closed().bell_tensor, &r, &IDENTITY_ROTATION).unwrap();
        assert!(m_value_qubit(&t).unwrap() >= 4.0 - 1e-9);
    }

    #[test]
    fn qudit_coeff_cases() {
        // d = 2, (X, XZ): exponent 2 = 0 mod 2
        let c = qudit_commutator_coeffs(&complex_single(2, 2, 3), 1).unwrap();
        assert!(c.values().all(|v| v.norm() < 1e-15));

        // d = 3, X ⊗ X -> (1 - w^2) XZ ⊗ XZ
        let t = complex_single(3, 3, 3);
        let c = qudit_commutator_coeffs(&t, 1).unwrap();
        let expect = ONE - omega_pow(3, 2);
        assert!((c[&(4, 4)] - expect).norm() < 1e-15);
        assert!(c.iter().filter(|(k, _)| **k != (4, 4)).all(|(_, v)| v.norm() == 0.0));
        let x = shift_x(3).unwrap();
        let z = clock_z(3).unwrap();
        let direct = x.tensor(&x).commutator(&z.tensor(&z)).unwrap();
        let xz = &x * &z;
        assert!(direct.approx_eq(&xz.tensor(&xz).scale(expect), 1e-12));

        for d in 2..=5 {
            let c = qudit_commutator_coeffs(&complex_single(d, 1, 1), 1).unwrap();
            assert!(c.values().all(|v| v.norm() < 1e-15));
        }
        assert!(qudit_commutator_coeffs(&complex_single(3, 1, 1), 2).is_err());
        assert!(qudit_commutator_coeffs(&real_single(1, 1), 1).is_err());
    }

    #[test]
    fn qudit_targets_are_distinct() {
        for d in 2..=6 {
            let c = qudit_commutator_coeffs(&complex_single(d, 1, 1), 1).unwrap();
            assert_eq!(c.len(), (d * d - 1) * (d * d - 1));
        }
    }

    #[test]
    fn m_value_qudit_cases() {
        assert!((m_value_qudit(&complex_single(2, 1, 2)).unwrap() - 4.0).abs() < 1e-14);
        let v = m_value_qudit(&complex_single(3, 1, 3)).unwrap();
        assert!((v - 3.0 * 3f64.sqrt()).abs() < 1e-14);
        for d in 2..=5 {
            assert_eq!(m_value_qudit(&complex_single(d, 1, 1)).unwrap(), 0.0);
        }
        let twice = CoeffTensor::with_entries(3, FieldKind::Complex, &[((1, 1), ONE.scale(2.0))]).unwrap();
        assert!(m_value_qudit(&twice).is_err());
    }

    #[test]
    fn closed_form_matches_direct_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        for d in 2..=4 {
            let basis = WeylBasis::new(d).unwrap();
            for _ in 0..20 {
                let t = CoeffTensor::random(d, FieldKind::Complex, &mut rng).unwrap();
                let coeffs = qudit_commutator_coeffs(&t, 1).unwrap();
                let rebuilt = qudit_commutator_from_coeffs(&coeffs, &basis);
                let local = basis.get(1).tensor(basis.get(1));
                let direct = generalized_bell(&t).unwrap().commutator(&local).unwrap();
                assert!(rebuilt.approx_eq(&direct, 1e-10));
                let closed = m_value_qudit(&t).unwrap();
                assert!((closed - qudit_commutator_norm_direct(&t, &basis, 1).unwrap()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn local_setting_validation() {
        let basis = WeylBasis::new(3).unwrap();
        let id = ComplexMatrix::identity(3);
        assert!(LocalSettingQudit::new(id.clone(), id.clone(), 0).is_err());
        assert!(LocalSettingQudit::new(id.scale_real(2.0), id.clone(), 1).is_err());
        let s = LocalSettingQudit::new(id.clone(), id.clone(), 1).unwrap();
        assert!(!s.is_hermitian(&basis).unwrap());
        let t = complex_single(3, 3, 3);
        let a = qudit_commutator_norm_local(&t, &basis, &s).unwrap();
        assert!((a - m_value_qudit(&t).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn best_known_cases() {
        let b = m_d_best_known(2).unwrap();
        assert_eq!((b.value, m_d_bound(2).unwrap()), (4.0, 4.0));
        assert_eq!(b.source, (1, 2));
        let b = m_d_best_known(3).unwrap();
        assert!((b.value - 3.0 * 3f64.sqrt()).abs() < 1e-12);
        assert_eq!(m_d_bound(3).unwrap(), 6.0);
        let b = m_d_best_known(4).unwrap();
        assert!((b.value - 8.0).abs() < 1e-12);
        assert_eq!(b.exponent, 2);
        let b = m_d_best_known(5).unwrap();
        assert!((b.value - 10.0 * (2.0 * PI / 5.0).sin()).abs() < 1e-12);
        assert!(m_d_best_known(1).is_err());
        for d in 2..=8 {
            let b = m_d_best_known(d).unwrap();
            assert_eq!(b.reachable_exponents, (0..d).collect::<Vec<_>>());
            assert!((m_value_qudit(&b.certificate).unwrap() - b.value).abs() < 1e-12);
            if d % 2 == 0 {
                assert!((b.value - 2.0 * d as f64).abs() < 1e-12);
            } else {
                assert!(b.value < 2.0 * d as f64 - 1e-6);
            }
        }
    }
}
