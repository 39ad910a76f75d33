//! Projected finite-difference ascent over products of spheres and unitary
//! pairs, with seeded random restarts.
//!
//! Points are flat `f64` vectors laid out block by block according to a
//! [`Manifold`]. The gradient is a central difference of `f ∘ project`, so it
//! is automatically tangent to the constraint set and the objective is only
//! ever evaluated at feasible points.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::bases::WeylBasis;
use crate::bell::UnitVector3;
use crate::complementarity::{
    generalized_bell, m_d_best_known, m_value_qudit, qudit_commutator_norm_direct, qudit_commutator_norm_local,
    reduce_qubit_setting, CoeffTensor, FieldKind, LocalSettingQudit, QuditWeights,
};
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::unitary::unitary_from_generator;

/// Central-difference step.
pub const FD_STEP: f64 = 1e-6;

/// Largest `d` accepted by [`maximize_md`].
pub const MAX_OPT_DIM: usize = 6;

const STEP_GROWTH: f64 = 1.5;
const STEP_DECAY: f64 = 0.5;
const MIN_STEP: f64 = 1e-14;
const MAX_STEP: f64 = 1.0;

/// Constraint set for an optimization variable.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Manifold {
    /// Unit vectors in R^n.
    Sphere { n: usize },
    /// Coefficient tensors with `len` entries and unit Frobenius norm.
    /// Complex entries occupy interleaved `(re, im)` pairs.
    UnitTensor { len: usize, field: FieldKind },
    /// Two `d x d` unitaries `exp(i H)` parametrized by `d^2 - 1` generator
    /// coefficients each. Unconstrained in parameter space.
    UnitaryPair { d: usize },
    Product { factors: Vec<Manifold> },
}

impl Manifold {
    pub fn product(factors: Vec<Manifold>) -> Self {
        Manifold::Product { factors }
    }

    /// Number of real coordinates.
    pub fn dim(&self) -> usize {
        match self {
            Manifold::Sphere { n } => *n,
            Manifold::UnitTensor { len, field: FieldKind::Real } => *len,
            Manifold::UnitTensor { len, field: FieldKind::Complex } => 2 * len,
            Manifold::UnitaryPair { d } => 2 * (d * d - 1),
            Manifold::Product { factors } => factors.iter().map(Manifold::dim).sum(),
        }
    }

    fn leaves(&self) -> Vec<&Manifold> {
        match self {
            Manifold::Product { factors } => factors.iter().flat_map(|f| f.leaves()).collect(),
            leaf => vec![leaf],
        }
    }

    /// Slices of `x` for each non-product factor, in order.
    pub fn blocks<'a>(&self, x: &'a [f64]) -> Vec<&'a [f64]> {
        let mut out = Vec::new();
        let mut rest = x;
        for leaf in self.leaves() {
            let (head, tail) = rest.split_at(leaf.dim());
            out.push(head);
            rest = tail;
        }
        out
    }

    fn is_normalized_leaf(leaf: &Manifold) -> bool {
        matches!(leaf, Manifold::Sphere { .. } | Manifold::UnitTensor { .. })
    }

    /// Maps `x` onto the constraint set in place.
    pub fn project(&self, x: &mut [f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::domain(format!("point has {} coordinates, manifold needs {}", x.len(), self.dim())));
        }
        let mut offset = 0;
        for leaf in self.leaves() {
            let n = leaf.dim();
            if Self::is_normalized_leaf(leaf) {
                let block = &mut x[offset..offset + n];
                let norm = block.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm == 0.0 || !norm.is_finite() {
                    return Err(Error::domain("cannot project a zero or non-finite block onto the sphere"));
                }
                block.iter_mut().for_each(|v| *v /= norm);
            }
            offset += n;
        }
        Ok(())
    }

    /// Largest `| |block|^2 - 1 |` over normalized blocks.
    pub fn constraint_violation(&self, x: &[f64]) -> f64 {
        self.leaves()
            .into_iter()
            .zip(self.blocks(x))
            .filter(|(leaf, _)| Self::is_normalized_leaf(leaf))
            .map(|(_, b)| (b.iter().map(|v| v * v).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Standard-normal draw projected onto the manifold.
    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<f64>> {
        let mut x: Vec<f64> = (0..self.dim()).map(|_| rng.sample(StandardNormal)).collect();
        self.project(&mut x)?;
        Ok(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimizationConfig {
    pub restarts: usize,
    pub max_iters: usize,
    pub step_init: f64,
    pub tol: f64,
    pub seed: u64,
}

impl Default for OptimizationConfig {
    fn default() -> Self {
        Self { restarts: 32, max_iters: 10_000, step_init: 0.1, tol: 1e-9, seed: 0 }
    }
}

impl OptimizationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::domain("restarts must be at least 1"));
        }
        if self.max_iters == 0 {
            return Err(Error::domain("max_iters must be at least 1"));
        }
        if !(self.tol > 0.0) {
            return Err(Error::domain(format!("tol must be positive, got {}", self.tol)));
        }
        if !(self.step_init > 0.0) || !self.step_init.is_finite() {
            return Err(Error::domain(format!("step_init must be positive, got {}", self.step_init)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimizationResult {
    pub value: f64,
    pub argmax: Vec<f64>,
    pub manifold: Manifold,
    /// Iterations taken by the winning restart.
    pub iterations_used: usize,
    /// Whether the winning restart met the stopping tolerance before `max_iters`.
    pub converged: bool,
    /// Final value of each restart, in restart order.
    pub restart_values: Vec<f64>,
}

struct RestartOutcome {
    value: f64,
    point: Vec<f64>,
    iterations: usize,
    converged: bool,
}

fn eval<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64]) -> Result<f64> {
    let v = f(x);
    if !v.is_finite() {
        return Err(Error::Optimization { value: v, point: x.to_vec() });
    }
    Ok(v)
}

fn gradient<F: Fn(&[f64]) -> f64>(f: &F, manifold: &Manifold, x: &[f64], scratch: &mut Vec<f64>) -> Result<Vec<f64>> {
    let mut g = vec![0.0; x.len()];
    for k in 0..x.len() {
        scratch.clear();
        scratch.extend_from_slice(x);
        scratch[k] += FD_STEP;
        manifold.project(scratch)?;
        let plus = eval(f, scratch)?;
        scratch.clear();
        scratch.extend_from_slice(x);
        scratch[k] -= FD_STEP;
        manifold.project(scratch)?;
        let minus = eval(f, scratch)?;
        g[k] = (plus - minus) / (2.0 * FD_STEP);
    }
    Ok(g)
}

fn ascend<F: Fn(&[f64]) -> f64>(
    f: &F,
    manifold: &Manifold,
    cfg: &OptimizationConfig,
    mut x: Vec<f64>,
) -> Result<RestartOutcome> {
    let mut fx = eval(f, &x)?;
    let mut step = cfg.step_init;
    let mut scratch = Vec::with_capacity(x.len());
    let mut trial = vec![0.0; x.len()];
    let mut need_grad = true;
    let mut direction = Vec::new();
    for iter in 0..cfg.max_iters {
        if need_grad {
            let g = gradient(f, manifold, &x, &mut scratch)?;
            let gnorm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            if gnorm < cfg.tol {
                return Ok(RestartOutcome { value: fx, point: x, iterations: iter, converged: true });
            }
            direction = g.into_iter().map(|v| v / gnorm).collect();
            need_grad = false;
        }
        for ((t, xi), di) in trial.iter_mut().zip(&x).zip(&direction) {
            *t = xi + step * di;
        }
        manifold.project(&mut trial)?;
        let ft = eval(f, &trial)?;
        if ft > fx {
            let gain = ft - fx;
            std::mem::swap(&mut x, &mut trial);
            fx = ft;
            step = (step * STEP_GROWTH).min(MAX_STEP);
            need_grad = true;
            if gain < cfg.tol {
                return Ok(RestartOutcome { value: fx, point: x, iterations: iter + 1, converged: true });
            }
        } else {
            step *= STEP_DECAY;
            if step < MIN_STEP {
                return Ok(RestartOutcome { value: fx, point: x, iterations: iter + 1, converged: true });
            }
        }
    }
    Ok(RestartOutcome { value: fx, point: x, iterations: cfg.max_iters, converged: false })
}

/// Best-of-restarts projected ascent. Restart `k` draws its starting point
/// from stream `k` of a ChaCha generator seeded with `cfg.seed`, so results
/// do not depend on thread scheduling.
pub fn maximize<F>(objective: F, manifold: &Manifold, cfg: &OptimizationConfig) -> Result<OptimizationResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    cfg.validate()?;
    let starts = (0..cfg.restarts)
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(k as u64);
            manifold.random_point(&mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    maximize_from(objective, manifold, cfg, starts)
}

/// Like [`maximize`] but from caller-supplied starting points (projected first).
pub fn maximize_from<F>(
    objective: F,
    manifold: &Manifold,
    cfg: &OptimizationConfig,
    starts: Vec<Vec<f64>>,
) -> Result<OptimizationResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    cfg.validate()?;
    if starts.is_empty() {
        return Err(Error::domain("no starting points"));
    }
    let outcomes = starts
        .into_par_iter()
        .map(|mut x| {
            manifold.project(&mut x)?;
            ascend(&objective, manifold, cfg, x)
        })
        .collect::<Result<Vec<_>>>()?;
    let restart_values: Vec<f64> = outcomes.iter().map(|o| o.value).collect();
    let best = outcomes
        .into_iter()
        .reduce(|a, b| if b.value > a.value { b } else { a })
        .expect("non-empty");
    Ok(OptimizationResult {
        value: best.value,
        argmax: best.point,
        manifold: manifold.clone(),
        iterations_used: best.iterations,
        converged: best.converged,
        restart_values,
    })
}

fn complex_tensor_from_block(d: usize, block: &[f64]) -> Result<CoeffTensor> {
    let entries = block.chunks_exact(2).map(|c| num_complex::Complex64::new(c[0], c[1])).collect();
    CoeffTensor::new(d, FieldKind::Complex, entries)
}

fn unit_vector_from_block(block: &[f64]) -> UnitVector3 {
    UnitVector3::normalized(block[0], block[1], block[2]).expect("projected block is nonzero")
}

fn qubit_direct_value(t: &CoeffTensor, r: &UnitVector3, s: &UnitVector3) -> f64 {
    let local = crate::complementarity::local_observable_qubit(r, s);
    generalized_bell(t)
        .and_then(|b| b.commutator(&local))
        .map(|c| c.hs_norm())
        .unwrap_or(f64::NAN)
}

/// Joint maximizer of `||[A(alpha), A(r) ⊗ B(s)]||_2` for qubits.
#[derive(Debug, Clone, Serialize)]
pub struct QubitOptimum {
    pub result: OptimizationResult,
    pub tensor: CoeffTensor,
    pub r: UnitVector3,
    pub s: UnitVector3,
    /// `sqrt(a'13^2 + a'23^2 + a'31^2 + a'32^2)` of the tensor reduced to the
    /// `sigma_3 ⊗ sigma_3` reference.
    pub reduced_off_block_mass: f64,
}

fn qubit_optimum(result: OptimizationResult, tensor: CoeffTensor, r: UnitVector3, s: UnitVector3) -> Result<QubitOptimum> {
    let reduced = reduce_qubit_setting(&tensor, &r, &s)?;
    let mass = crate::complementarity::m_value_qubit(&reduced)? / 4.0;
    Ok(QubitOptimum { result, tensor, r, s, reduced_off_block_mass: mass })
}

/// Supremum over real normalized tensors and both local directions.
pub fn maximize_m2(cfg: &OptimizationConfig) -> Result<QubitOptimum> {
    let manifold = Manifold::product(vec![
        Manifold::UnitTensor { len: 9, field: FieldKind::Real },
        Manifold::Sphere { n: 3 },
        Manifold::Sphere { n: 3 },
    ]);
    let m = manifold.clone();
    let objective = move |x: &[f64]| {
        let b = m.blocks(x);
        match CoeffTensor::from_real(2, b[0]) {
            Ok(t) => qubit_direct_value(&t, &unit_vector_from_block(b[1]), &unit_vector_from_block(b[2])),
            Err(_) => f64::NAN,
        }
    };
    let result = maximize(objective, &manifold, cfg)?;
    let b = manifold.blocks(&result.argmax);
    let tensor = CoeffTensor::from_real(2, b[0])?;
    let (r, s) = (unit_vector_from_block(b[1]), unit_vector_from_block(b[2]));
    qubit_optimum(result, tensor, r, s)
}

/// Supremum over local directions for a fixed real qubit tensor.
pub fn maximize_m2_fixed_tensor(tensor: &CoeffTensor, cfg: &OptimizationConfig) -> Result<QubitOptimum> {
    if tensor.dim() != 2 || tensor.field() != FieldKind::Real {
        return Err(Error::domain("fixed-tensor qubit search needs a real d = 2 tensor"));
    }
    let manifold = Manifold::product(vec![Manifold::Sphere { n: 3 }, Manifold::Sphere { n: 3 }]);
    let m = manifold.clone();
    let t = tensor.clone();
    let objective = move |x: &[f64]| {
        let b = m.blocks(x);
        qubit_direct_value(&t, &unit_vector_from_block(b[0]), &unit_vector_from_block(b[1]))
    };
    let result = maximize(objective, &manifold, cfg)?;
    let b = manifold.blocks(&result.argmax);
    let (r, s) = (unit_vector_from_block(b[0]), unit_vector_from_block(b[1]));
    qubit_optimum(result, tensor.clone(), r, s)
}

/// Qudit maximizer against the `Z ⊗ Z` reference.
#[derive(Debug, Clone, Serialize)]
pub struct QuditOptimum {
    pub d: usize,
    pub result: OptimizationResult,
    pub tensor: CoeffTensor,
    /// `m_value_qudit` at the argmax.
    pub closed_form: f64,
    /// Dense-matrix commutator norm at the argmax.
    pub direct: f64,
}

/// Supremum of `m_value_qudit` over complex normalized tensors, `2 <= d <= 6`.
pub fn maximize_md(d: usize, cfg: &OptimizationConfig) -> Result<QuditOptimum> {
    if !(2..=MAX_OPT_DIM).contains(&d) {
        return Err(Error::domain(format!("maximize_md supports 2 <= d <= {MAX_OPT_DIM}, got {d}")));
    }
    let side = d * d - 1;
    let manifold = Manifold::UnitTensor { len: side * side, field: FieldKind::Complex };
    let weights = QuditWeights::new(d)?;
    let objective = |x: &[f64]| weights.value_interleaved(x);
    let result = maximize(objective, &manifold, cfg)?;
    let tensor = complex_tensor_from_block(d, &result.argmax)?;
    let closed_form = m_value_qudit(&tensor)?;
    let basis = WeylBasis::new(d)?;
    let direct = qudit_commutator_norm_direct(&tensor, &basis, 1)?;
    Ok(QuditOptimum { d, result, tensor, closed_form, direct })
}

/// Local-unitary search for a fixed tensor: maximizes
/// `||[A, U s_i0 U† ⊗ V s_i0 V†]||_2` over `(U, V)`. This is a consistency
/// check on the conjugation reduction, not a route to the reported values.
pub fn maximize_local_qudit(tensor: &CoeffTensor, i0: usize, cfg: &OptimizationConfig) -> Result<(OptimizationResult, LocalSettingQudit)> {
    let d = tensor.dim();
    let basis = WeylBasis::new(d)?;
    let manifold = Manifold::UnitaryPair { d };
    let n = d * d - 1;
    let bell = crate::complementarity::generalized_bell_weyl(tensor, &basis)?;
    if i0 == 0 {
        return Err(Error::domain("reference index must not be the identity"));
    }
    let s = basis.try_get(i0)?.clone();
    let objective = |x: &[f64]| -> f64 {
        let pair = unitary_from_generator(d, &x[..n]).and_then(|u| Ok((u, unitary_from_generator(d, &x[n..])?)));
        match pair {
            Ok((u, v)) => {
                let a: ComplexMatrix = &(&u * &s) * &u.dagger();
                let b: ComplexMatrix = &(&v * &s) * &v.dagger();
                bell.commutator(&a.tensor(&b)).map(|c| c.hs_norm()).unwrap_or(f64::NAN)
            }
            Err(_) => f64::NAN,
        }
    };
    let result = maximize(objective, &manifold, cfg)?;
    let u = unitary_from_generator(d, &result.argmax[..n])?;
    let v = unitary_from_generator(d, &result.argmax[n..])?;
    let setting = LocalSettingQudit::new(u, v, i0)?;
    debug_assert!((qudit_commutator_norm_local(tensor, &basis, &setting).unwrap_or(f64::NAN) - result.value).abs() < 1e-9);
    Ok((result, setting))
}

/// Optimizer value next to the exhaustive scan, for reporting.
pub fn best_known_gap(d: usize, opt: &QuditOptimum) -> Result<f64> {
    Ok((m_d_best_known(d)?.value - opt.result.value).abs())
}
