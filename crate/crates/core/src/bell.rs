//! CHSH machinery for two qubits sharing the singlet.
//!
//! Tensor factors are ordered Alice ⊗ Bob and the computational basis index
//! of `|xy>` is `2x + y`, so the singlet `(|01> - |10>)/sqrt 2` has amplitudes
//! `+1/sqrt 2` at index 1 and `-1/sqrt 2` at index 2. With this convention
//! `tr[(A(a) ⊗ B(b)) P] = -a.b`.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bases::pauli;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, ZERO};

/// Tolerance on `|r|^2 - 1` accepted by [`UnitVector3::new`].
pub const UNIT_TOL: f64 = 1e-12;

/// A direction in R^3.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitVector3 {
    x: f64,
    y: f64,
    z: f64,
}

impl UnitVector3 {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        if ![x, y, z].iter().all(|c| c.is_finite()) {
            return Err(Error::domain(format!("vector ({x}, {y}, {z}) has non-finite components")));
        }
        let sq = x * x + y * y + z * z;
        if (sq - 1.0).abs() > UNIT_TOL {
            return Err(Error::domain(format!(
                "vector ({x}, {y}, {z}) is not unit: norm = {}",
                sq.sqrt()
            )));
        }
        Ok(Self { x, y, z })
    }

    /// Rescales any nonzero finite vector onto the sphere.
    pub fn normalized(x: f64, y: f64, z: f64) -> Result<Self> {
        let n = (x * x + y * y + z * z).sqrt();
        if !n.is_finite() || n == 0.0 {
            return Err(Error::domain(format!("cannot normalize ({x}, {y}, {z})")));
        }
        Ok(Self { x: x / n, y: y / n, z: z / n })
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        match v {
            [x, y, z] => Self::new(*x, *y, *z),
            _ => Err(Error::domain(format!("expected 3 components, got {}", v.len()))),
        }
    }

    pub const fn x_axis() -> Self {
        Self { x: 1.0, y: 0.0, z: 0.0 }
    }

    pub const fn y_axis() -> Self {
        Self { x: 0.0, y: 1.0, z: 0.0 }
    }

    pub const fn z_axis() -> Self {
        Self { x: 0.0, y: 0.0, z: 1.0 }
    }

    pub fn components(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }
}

/// `r . sigma = sum_i r_i sigma_i`.
pub fn spin_observable(r: &UnitVector3) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(2, 2);
    for (i, c) in r.components().into_iter().enumerate() {
        out.add_scaled(Complex64::new(c, 0.0), &pauli(i + 1));
    }
    out
}

/// Projector onto `(|01> - |10>)/sqrt 2`.
pub fn singlet_projector() -> ComplexMatrix {
    let psi = [ZERO, Complex64::new(FRAC_1_SQRT_2, 0.0), Complex64::new(-FRAC_1_SQRT_2, 0.0), ZERO];
    ComplexMatrix::from_fn(4, 4, |i, j| psi[i] * psi[j].conj())
}

/// Singlet correlation `<A(a) B(b)> = -a.b`.
pub fn singlet_correlation(a: &UnitVector3, b: &UnitVector3) -> f64 {
    -a.dot(b)
}

/// The same correlation computed as `tr[(A(a) ⊗ B(b)) P_singlet]`.
pub fn singlet_correlation_trace(a: &UnitVector3, b: &UnitVector3) -> f64 {
    let obs = spin_observable(a).tensor(&spin_observable(b));
    (&obs * &singlet_projector()).trace().re
}

/// Two measurement directions per party.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChshSettings {
    pub a1: UnitVector3,
    pub a2: UnitVector3,
    pub b1: UnitVector3,
    pub b2: UnitVector3,
}

impl ChshSettings {
    /// `a1 = x`, `a2 = z`, `b1 = (x + z)/sqrt 2`, `b2 = (x - z)/sqrt 2`:
    /// the standard maximally violating choice.
    pub fn maximal_violation() -> Self {
        let h = FRAC_1_SQRT_2;
        Self {
            a1: UnitVector3::x_axis(),
            a2: UnitVector3::z_axis(),
            b1: UnitVector3 { x: h, y: 0.0, z: h },
            b2: UnitVector3 { x: h, y: 0.0, z: -h },
        }
    }

    /// `[<A1B1>, <A1B2>, <A2B1>, <A2B2>]` on the singlet.
    pub fn correlations(&self) -> [f64; 4] {
        [
            singlet_correlation(&self.a1, &self.b1),
            singlet_correlation(&self.a1, &self.b2),
            singlet_correlation(&self.a2, &self.b1),
            singlet_correlation(&self.a2, &self.b2),
        ]
    }

    /// `<A1B1> + <A1B2> + <A2B1> - <A2B2>` before taking the absolute value.
    pub fn chsh_sum(&self) -> f64 {
        let [c11, c12, c21, c22] = self.correlations();
        c11 + c12 + c21 - c22
    }
}

/// `|<A1B1> + <A1B2> + <A2B1> - <A2B2>|` on the singlet.
pub fn chsh_value(s: &ChshSettings) -> f64 {
    s.chsh_sum().abs()
}

/// `A1 ⊗ (B1 + B2) + A2 ⊗ (B1 - B2)`.
pub fn bell_operator(s: &ChshSettings) -> ComplexMatrix {
    let (a1, a2) = (spin_observable(&s.a1), spin_observable(&s.a2));
    let (b1, b2) = (spin_observable(&s.b1), spin_observable(&s.b2));
    &a1.tensor(&(&b1 + &b2)) + &a2.tensor(&(&b1 - &b2))
}

/// `sqrt 2 (sigma_1 ⊗ sigma_1 + sigma_3 ⊗ sigma_3)`.
pub fn classic_bell_b0() -> ComplexMatrix {
    classic_bell_b0_normalized().scale_real(2.0)
}

/// `(sigma_1 ⊗ sigma_1 + sigma_3 ⊗ sigma_3) / sqrt 2`, coefficient norm 1.
pub fn classic_bell_b0_normalized() -> ComplexMatrix {
    (&pauli(1).tensor(&pauli(1)) + &pauli(3).tensor(&pauli(3))).scale_real(FRAC_1_SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bases::expand_in_pauli_pairs;
    use std::f64::consts::SQRT_2;

    fn v(x: f64, y: f64, z: f64) -> UnitVector3 {
        UnitVector3::normalized(x, y, z).unwrap()
    }

    #[test]
    fn spin_observable_cases() {
        assert_eq!(spin_observable(&UnitVector3::z_axis()), pauli(3));
        assert_eq!(spin_observable(&UnitVector3::x_axis()), pauli(1));
        let a = spin_observable(&v(1.0, 0.0, 1.0));
        let expect = (&pauli(1) + &pauli(3)).scale_real(FRAC_1_SQRT_2);
        assert!(a.approx_eq(&expect, 1e-15));
        assert!((&a * &a).approx_eq(&ComplexMatrix::identity(2), 1e-12));
    }

    #[test]
    fn non_unit_vector_reports_norm() {
        let err = UnitVector3::new(1.0, 1.0, 0.0).unwrap_err();
        assert!(err.to_string().contains("1.414"), "{err}");
        assert!(UnitVector3::new(f64::NAN, 0.0, 0.0).is_err());
        assert!(UnitVector3::normalized(0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn correlation_cases() {
        let z = UnitVector3::z_axis();
        assert_eq!(singlet_correlation(&z, &z), -1.0);
        assert_eq!(singlet_correlation(&z, &UnitVector3::x_axis()), 0.0);
        let c = singlet_correlation(&UnitVector3::x_axis(), &v(1.0, 0.0, 1.0));
        assert!((c + FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((singlet_correlation_trace(&z, &z) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn chsh_cases() {
        let s = ChshSettings::maximal_violation();
        assert!((chsh_value(&s) - 2.0 * SQRT_2).abs() < 1e-12);
        let z = UnitVector3::z_axis();
        let aligned = ChshSettings { a1: z, a2: z, b1: z, b2: z };
        assert_eq!(aligned.correlations(), [-1.0; 4]);
        assert!((chsh_value(&aligned) - 2.0).abs() < 1e-15);
        let same_b = ChshSettings { a1: v(0.3, -1.0, 0.2), a2: v(1.0, 2.0, 3.0), b1: v(0.0, 1.0, 1.0), b2: v(0.0, 1.0, 1.0) };
        let [c11, ..] = same_b.correlations();
        assert!((chsh_value(&same_b) - (2.0 * c11).abs()).abs() < 1e-15);
        assert!(chsh_value(&same_b) <= 2.0);
    }

    #[test]
    fn bell_operator_of_maximal_settings_is_b0() {
        let b = bell_operator(&ChshSettings::maximal_violation());
        let c = expand_in_pauli_pairs(&b).unwrap();
        for p in 0..4 {
            for q in 0..4 {
                let expect = if (p, q) == (1, 1) || (p, q) == (3, 3) { SQRT_2 } else { 0.0 };
                assert!((c[p][q] - expect).norm() < 1e-12, "({p},{q})");
            }
        }
        assert!(b.approx_eq(&classic_bell_b0(), 1e-12));
    }

    #[test]
    fn bell_operator_degenerate_settings() {
        let z = UnitVector3::z_axis();
        let a1 = v(1.0, 2.0, -0.5);
        let s = ChshSettings { a1, a2: v(0.0, 1.0, 0.0), b1: z, b2: z };
        let expect = spin_observable(&a1).tensor(&pauli(3).scale_real(2.0));
        assert!(bell_operator(&s).approx_eq(&expect, 1e-15));
        let s = ChshSettings { a1, a2: a1, b1: v(1.0, 0.0, 0.0), b2: v(0.0, 0.0, 1.0) };
        assert!(bell_operator(&s).is_hermitian());
    }

    #[test]
    fn bell_operator_trace_reproduces_chsh_sum() {
        let s = ChshSettings::maximal_violation();
        let t = (&bell_operator(&s) * &singlet_projector()).trace();
        assert!((t.re - s.chsh_sum()).abs() < 1e-12 && t.im.abs() < 1e-12);
    }

    #[test]
    fn classic_b0_cases() {
        let c = expand_in_pauli_pairs(&classic_bell_b0_normalized()).unwrap();
        for p in 0..4 {
            for q in 0..4 {
                let expect = if (p, q) == (1, 1) || (p, q) == (3, 3) { FRAC_1_SQRT_2 } else { 0.0 };
                assert!((c[p][q] - expect).norm() < 1e-15);
            }
        }
        assert!((classic_bell_b0_normalized().hs_norm() - 2.0).abs() < 1e-14);
        // sqrt 2 S = 2 (S / sqrt 2)
        assert!(classic_bell_b0().approx_eq(&classic_bell_b0_normalized().scale_real(2.0), 1e-15));
        let b0 = (&pauli(1).tensor(&pauli(1)) + &pauli(3).tensor(&pauli(3))).scale_real(SQRT_2);
        assert!(classic_bell_b0().approx_eq(&b0, 1e-15));
    }
}
