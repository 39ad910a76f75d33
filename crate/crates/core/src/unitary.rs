//! Unitary matrices: random sampling and the exponential parametrization
//! `U = exp(i H)` over traceless hermitian generators.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, I, ONE};

/// Entries with independent standard-normal real and imaginary parts.
pub fn random_complex_matrix<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Haar-distributed unitary: Gram–Schmidt on the columns of a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let g = random_complex_matrix(d, rng);
    let mut cols: Vec<Vec<Complex64>> = (0..d).map(|j| (0..d).map(|i| g[(i, j)]).collect()).collect();
    for j in 0..d {
        for k in 0..j {
            let proj: Complex64 = (0..d).map(|i| cols[k][i].conj() * cols[j][i]).sum();
            for i in 0..d {
                let v = cols[k][i];
                cols[j][i] -= proj * v;
            }
        }
        let n = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in &mut cols[j] {
            *z /= n;
        }
    }
    ComplexMatrix::from_fn(d, d, |i, j| cols[j][i])
}

/// A basis of the `d^2 - 1` traceless hermitian `d x d` matrices: symmetric
/// and antisymmetric off-diagonal pairs followed by the diagonal
/// generalized Gell-Mann matrices.
pub fn hermitian_generators(d: usize) -> Vec<ComplexMatrix> {
    let mut out = Vec::with_capacity(d * d - 1);
    for j in 0..d {
        for k in j + 1..d {
            let mut s = ComplexMatrix::zeros(d, d);
            s[(j, k)] = ONE;
            s[(k, j)] = ONE;
            out.push(s);
            let mut a = ComplexMatrix::zeros(d, d);
            a[(j, k)] = -I;
            a[(k, j)] = I;
            out.push(a);
        }
    }
    for l in 1..d {
        let norm = (2.0 / (l * (l + 1)) as f64).sqrt();
        let mut m = ComplexMatrix::zeros(d, d);
        for j in 0..l {
            m[(j, j)] = Complex64::new(norm, 0.0);
        }
        m[(l, l)] = Complex64::new(-(l as f64) * norm, 0.0);
        out.push(m);
    }
    out
}

/// Matrix exponential by scaling and squaring with a Taylor series.
pub fn expm(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(Error::domain("expm needs a square matrix"));
    }
    let n = a.rows();
    let norm = a.hs_norm();
    let mut squarings = 0u32;
    let mut scale = 1.0;
    while norm * scale > 0.5 {
        scale *= 0.5;
        squarings += 1;
    }
    let a_scaled = a.scale_real(scale);
    let mut result = ComplexMatrix::identity(n);
    let mut term = ComplexMatrix::identity(n);
    for k in 1..=30 {
        term = (&term * &a_scaled).scale_real(1.0 / k as f64);
        if term.max_abs() < 1e-18 {
            break;
        }
        result = &result + &term;
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    Ok(result)
}

/// `exp(i sum_k params[k] G_k)` over [`hermitian_generators`].
pub fn unitary_from_generator(d: usize, params: &[f64]) -> Result<ComplexMatrix> {
    if d < 2 {
        return Err(Error::domain(format!("unitary dimension must be at least 2, got {d}")));
    }
    if params.len() != d * d - 1 {
        return Err(Error::domain(format!(
            "expected {} generator parameters for d = {d}, got {}",
            d * d - 1,
            params.len()
        )));
    }
    let mut h = ComplexMatrix::zeros(d, d);
    for (p, g) in params.iter().zip(hermitian_generators(d)) {
        h.add_scaled(Complex64::new(*p, 0.0), &g);
    }
    expm(&h.scale(I))
}
