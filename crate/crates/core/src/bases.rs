//! Pauli and discrete Weyl operator bases.
//!
//! The Weyl family for local dimension `d` is `{X^a Z^b : (a, b) in Z_d^2}`
//! with shift `X = sum_a |a+1><a|` and clock `Z = diag(1, w, ..., w^(d-1))`,
//! `w = exp(2 pi i / d)`. Members are addressed by the flat index
//! `k = a d + b`, so `k = 0` is the identity and `k = 1` is `Z`.
//!
//! At `d = 2` the Weyl family differs from the Pauli family by a phase on the
//! last element (`XZ = -i sigma_2`). The two are kept apart: qubit closed
//! forms use [`pauli`], qudit closed forms use [`WeylBasis`].

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, I, ONE, ZERO};
use crate::unitary::random_unitary;

/// Largest local dimension accepted by the basis constructors.
pub const MAX_DIM: usize = 64;

/// Returns `sigma_i` for `i` in `0..=3`, with `sigma_0 = I_2`.
///
/// # Panics
/// If `i > 3`.
pub fn pauli(i: usize) -> ComplexMatrix {
    match i {
        0 => ComplexMatrix::identity(2),
        1 => ComplexMatrix::from_rows(&[[ZERO, ONE], [ONE, ZERO]]),
        2 => ComplexMatrix::from_rows(&[[ZERO, -I], [I, ZERO]]),
        3 => ComplexMatrix::from_rows(&[[ONE, ZERO], [ZERO, -ONE]]),
        _ => panic!("Pauli index {i} out of range 0..=3"),
    }
}

/// The constant qubit family `sigma_0 .. sigma_3`.
#[derive(Debug, Clone, Copy, Default)]
pub struct PauliBasis;

impl PauliBasis {
    pub fn sigma(&self, i: usize) -> Result<ComplexMatrix> {
        if i > 3 {
            return Err(Error::domain(format!("Pauli index {i} out of range 0..=3")));
        }
        Ok(pauli(i))
    }

    /// The traceless members `sigma_1, sigma_2, sigma_3`.
    pub fn traceless(&self) -> [ComplexMatrix; 3] {
        [pauli(1), pauli(2), pauli(3)]
    }
}

/// Coefficients `c_i = tr(sigma_i m) / 2` for `i = 0..=3`, so that
/// `m = sum_i c_i sigma_i`.
pub fn expand_in_pauli(m: &ComplexMatrix) -> Result<[Complex64; 4]> {
    if m.rows() != 2 || m.cols() != 2 {
        return Err(Error::domain(format!("expected 2x2 matrix, got {}x{}", m.rows(), m.cols())));
    }
    let mut out = [ZERO; 4];
    for (i, c) in out.iter_mut().enumerate() {
        *c = pauli(i).hs_inner(m)? / 2.0;
    }
    Ok(out)
}

/// Coefficients over `sigma_p ⊗ sigma_q`, `p, q in 0..=3`, of a 4x4 matrix.
pub fn expand_in_pauli_pairs(m: &ComplexMatrix) -> Result<[[Complex64; 4]; 4]> {
    if m.rows() != 4 || m.cols() != 4 {
        return Err(Error::domain(format!("expected 4x4 matrix, got {}x{}", m.rows(), m.cols())));
    }
    let mut out = [[ZERO; 4]; 4];
    for (p, row) in out.iter_mut().enumerate() {
        for (q, c) in row.iter_mut().enumerate() {
            *c = pauli(p).tensor(&pauli(q)).hs_inner(m)? / 4.0;
        }
    }
    Ok(out)
}

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::domain(format!("local dimension must be at least 2, got {d}")));
    }
    if d > MAX_DIM {
        return Err(Error::domain(format!("local dimension {d} exceeds supported maximum {MAX_DIM}")));
    }
    Ok(())
}

/// `w^n` with `w = exp(2 pi i / d)`; the exponent is reduced mod `d` first.
pub fn omega_pow(d: usize, n: i64) -> Complex64 {
    let r = n.rem_euclid(d as i64) as f64;
    Complex64::from_polar(1.0, 2.0 * PI * r / d as f64)
}

/// Cyclic shift: column `a` has a single 1 in row `(a + 1) mod d`.
pub fn shift_x(d: usize) -> Result<ComplexMatrix> {
    check_dim(d)?;
    Ok(ComplexMatrix::from_fn(d, d, |i, j| if i == (j + 1) % d { ONE } else { ZERO }))
}

/// Clock matrix `diag(1, w, ..., w^(d-1))`.
pub fn clock_z(d: usize) -> Result<ComplexMatrix> {
    check_dim(d)?;
    let diag: Vec<Complex64> = (0..d).map(|a| omega_pow(d, a as i64)).collect();
    Ok(ComplexMatrix::diagonal(&diag))
}

/// `X^a Z^b` by repeated multiplication.
pub fn weyl(d: usize, a: usize, b: usize) -> Result<ComplexMatrix> {
    check_dim(d)?;
    if a >= d || b >= d {
        return Err(Error::domain(format!("Weyl indices ({a}, {b}) out of range for d = {d}")));
    }
    shift_x(d)?.pow(a)?.matmul(&clock_z(d)?.pow(b)?)
}

/// `sigma~_k = X^(k div d) Z^(k mod d)`.
pub fn weyl_by_index(d: usize, k: usize) -> Result<ComplexMatrix> {
    let idx = WeylIndex::from_flat(d, k)?;
    weyl(d, idx.a, idx.b)
}

/// Index of `sigma~_k Z`: `(a, b) -> (a, b + 1 mod d)`.
pub fn index_successor(d: usize, k: usize) -> Result<usize> {
    Ok(WeylIndex::from_flat(d, k)?.successor().flat())
}

/// Phase `w^(bc - ae)` with `(X^a Z^b)(X^c Z^e) = w^(bc - ae) (X^c Z^e)(X^a Z^b)`.
pub fn commutation_phase(d: usize, (a, b): (usize, usize), (c, e): (usize, usize)) -> Result<Complex64> {
    check_dim(d)?;
    if a >= d || b >= d || c >= d || e >= d {
        return Err(Error::domain(format!(
            "Weyl indices ({a}, {b}), ({c}, {e}) out of range for d = {d}"
        )));
    }
    Ok(omega_pow(d, (b * c) as i64 - (a * e) as i64))
}

/// Coefficients `c_k = tr(sigma~_k† m) / d`, so that `m = sum_k c_k sigma~_k`.
pub fn expand_in_weyl(m: &ComplexMatrix, d: usize) -> Result<Vec<Complex64>> {
    WeylBasis::new(d)?.expand(m)
}

/// A position in the Weyl family: the pair `(a, b)` and its flat index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WeylIndex {
    pub d: usize,
    pub a: usize,
    pub b: usize,
}

impl WeylIndex {
    pub fn new(d: usize, a: usize, b: usize) -> Result<Self> {
        check_dim(d)?;
        if a >= d || b >= d {
            return Err(Error::domain(format!("Weyl indices ({a}, {b}) out of range for d = {d}")));
        }
        Ok(Self { d, a, b })
    }

    pub fn from_flat(d: usize, k: usize) -> Result<Self> {
        check_dim(d)?;
        if k >= d * d {
            return Err(Error::domain(format!("Weyl index {k} out of range 0..{} for d = {d}", d * d)));
        }
        Ok(Self { d, a: k / d, b: k % d })
    }

    pub fn flat(&self) -> usize {
        self.a * self.d + self.b
    }

    /// Right-multiplication by `Z` bumps `b` with wraparound.
    pub fn successor(&self) -> Self {
        Self { d: self.d, a: self.a, b: (self.b + 1) % self.d }
    }
}

/// Precomputed Weyl family for one local dimension.
#[derive(Debug, Clone)]
pub struct WeylBasis {
    d: usize,
    omega: Complex64,
    elements: Vec<ComplexMatrix>,
}

impl WeylBasis {
    pub fn new(d: usize) -> Result<Self> {
        check_dim(d)?;
        let x = shift_x(d)?;
        let z = clock_z(d)?;
        let mut x_pows = Vec::with_capacity(d);
        let mut z_pows = Vec::with_capacity(d);
        let (mut xp, mut zp) = (ComplexMatrix::identity(d), ComplexMatrix::identity(d));
        for _ in 0..d {
            x_pows.push(xp.clone());
            z_pows.push(zp.clone());
            xp = &xp * &x;
            zp = &zp * &z;
        }
        let mut elements = Vec::with_capacity(d * d);
        for xa in &x_pows {
            for zb in &z_pows {
                elements.push(xa * zb);
            }
        }
        Ok(Self { d, omega: omega_pow(d, 1), elements })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn omega(&self) -> Complex64 {
        self.omega
    }

    /// Number of members, `d^2`.
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Member `sigma~_k`; panics when `k >= d^2`.
    pub fn get(&self, k: usize) -> &ComplexMatrix {
        &self.elements[k]
    }

    pub fn try_get(&self, k: usize) -> Result<&ComplexMatrix> {
        self.elements
            .get(k)
            .ok_or_else(|| Error::domain(format!("Weyl index {k} out of range for d = {}", self.d)))
    }

    pub fn iter(&self) -> impl Iterator<Item = &ComplexMatrix> {
        self.elements.iter()
    }

    pub fn expand(&self, m: &ComplexMatrix) -> Result<Vec<Complex64>> {
        if m.rows() != self.d || m.cols() != self.d {
            return Err(Error::Shape {
                op: "expand_in_weyl",
                left_rows: m.rows(),
                left_cols: m.cols(),
                right_rows: self.d,
                right_cols: self.d,
            });
        }
        let scale = 1.0 / self.d as f64;
        self.elements.iter().map(|s| Ok(s.hs_inner(m)? * scale)).collect()
    }

    pub fn reconstruct(&self, coeffs: &[Complex64]) -> Result<ComplexMatrix> {
        if coeffs.len() != self.len() {
            return Err(Error::domain(format!(
                "expected {} coefficients, got {}",
                self.len(),
                coeffs.len()
            )));
        }
        let mut out = ComplexMatrix::zeros(self.d, self.d);
        for (c, s) in coeffs.iter().zip(&self.elements) {
            out.add_scaled(*c, s);
        }
        Ok(out)
    }
}

/// One line of a basis property check.
#[derive(Debug, Clone, Serialize)]
pub struct PropertyCheck {
    pub property: String,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl PropertyCheck {
    fn new(property: &str, max_deviation: f64, tolerance: f64) -> Self {
        Self {
            property: property.to_string(),
            max_deviation,
            tolerance,
            passed: max_deviation.is_finite() && max_deviation < tolerance,
        }
    }
}

/// Runs the Weyl-basis invariants for dimension `d` and reports the worst
/// deviation for each. Random inputs (round-trip matrix, conjugating unitary)
/// are drawn from `rng`.
pub fn check_weyl_properties<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<Vec<PropertyCheck>> {
    let basis = WeylBasis::new(d)?;
    let x = shift_x(d)?;
    let z = clock_z(d)?;
    let dd = d as f64;
    let n = basis.len();
    let mut checks = Vec::new();

    // (i) traces
    let dev = (0..n)
        .map(|k| {
            let expect = if k == 0 { dd } else { 0.0 };
            (basis.get(k).trace() - expect).norm()
        })
        .fold(0.0, f64::max);
    checks.push(PropertyCheck::new("trace", dev, 1e-10));

    // (ii) orthogonality
    let mut dev = 0.0f64;
    for k in 0..n {
        for l in 0..n {
            let expect = if k == l { dd } else { 0.0 };
            dev = dev.max((basis.get(k).hs_inner(basis.get(l))? - expect).norm());
        }
    }
    checks.push(PropertyCheck::new("orthogonality", dev, 1e-10));

    // (iii) ZX = w XZ
    let dev = z.matmul(&x)?.max_abs_diff(&x.matmul(&z)?.scale(basis.omega()));
    checks.push(PropertyCheck::new("clock_shift_commutation", dev, 1e-12));

    let mut dev = 0.0f64;
    for k in 0..n {
        for l in 0..n {
            let (p, q) = (WeylIndex::from_flat(d, k)?, WeylIndex::from_flat(d, l)?);
            let phase = commutation_phase(d, (p.a, p.b), (q.a, q.b))?;
            let lhs = basis.get(k).matmul(basis.get(l))?;
            let rhs = basis.get(l).matmul(basis.get(k))?.scale(phase);
            dev = dev.max(lhs.max_abs_diff(&rhs));
        }
    }
    checks.push(PropertyCheck::new("commutation_phase", dev, 1e-10));

    let mut right = 0.0f64;
    let mut left = 0.0f64;
    for k in 0..n {
        let idx = WeylIndex::from_flat(d, k)?;
        let succ = basis.get(idx.successor().flat());
        right = right.max(basis.get(k).matmul(&z)?.max_abs_diff(succ));
        let phased = succ.scale(omega_pow(d, idx.a as i64));
        left = left.max(z.matmul(basis.get(k))?.max_abs_diff(&phased));
    }
    checks.push(PropertyCheck::new("successor_right_multiplication", right, 1e-12));
    checks.push(PropertyCheck::new("successor_left_multiplication", left, 1e-12));

    let m = crate::unitary::random_complex_matrix(d, rng);
    let dev = basis.reconstruct(&basis.expand(&m)?)?.max_abs_diff(&m);
    checks.push(PropertyCheck::new("expansion_round_trip", dev, 1e-10));

    let u = random_unitary(d, rng);
    let ud = u.dagger();
    let mus: Vec<Vec<Complex64>> = (1..n)
        .map(|i| {
            let conj = &(&u * basis.get(i)) * &ud;
            basis.expand(&conj).map(|c| c[1..].to_vec())
        })
        .collect::<Result<_>>()?;
    let mut dev = 0.0f64;
    for (i, mi) in mus.iter().enumerate() {
        for (j, mj) in mus.iter().enumerate() {
            let g: Complex64 = mi.iter().zip(mj).map(|(x, y)| x.conj() * y).sum();
            let expect = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((g - expect).norm());
        }
    }
    checks.push(PropertyCheck::new("conjugated_coefficients_orthonormal", dev, 1e-10));

    if d == 2 {
        let dev = x.max_abs_diff(&pauli(1)).max(z.max_abs_diff(&pauli(3)));
        checks.push(PropertyCheck::new("pauli_cross_check", dev, 1e-12));
        let xz_dev = basis.get(3).max_abs_diff(&pauli(2).scale(-I));
        checks.push(PropertyCheck::new("pauli_phase_xz", xz_dev, 1e-12));
    }

    Ok(checks)
}
