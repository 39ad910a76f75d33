//! Complementarity between generalized Bell operators and local observables,
//! measured by the Hilbert–Schmidt norm of their commutator.
//!
//! The crate covers two-qubit systems (Pauli basis, CHSH machinery, the
//! closed-form supremum 4) and two-qudit systems (Weyl basis, closed-form
//! commutator expansion, the `2d` bound and exhaustive best-known values),
//! plus a projected-ascent optimizer that checks every closed form
//! numerically.

pub mod bases;
pub mod bell;
pub mod complementarity;
pub mod error;
pub mod linalg;
pub mod optimizer;
pub mod report;
pub mod unitary;

pub use num_complex::Complex64;

pub use bases::{
    clock_z, commutation_phase, expand_in_pauli, expand_in_weyl, index_successor, pauli, shift_x, weyl,
    weyl_by_index, PauliBasis, PropertyCheck, WeylBasis, WeylIndex,
};
pub use bell::{bell_operator, chsh_value, singlet_correlation, spin_observable, ChshSettings, UnitVector3};
pub use complementarity::{
    conjugate_coeffs_qubit, generalized_bell, local_observable_qubit, m_d_best_known, m_d_bound,
    m_sup_qubit_closed, m_value_qubit, m_value_qudit, qubit_commutator_sigma33, qudit_commutator_coeffs,
    unitary_to_rotation, BestKnown, CoeffTensor, FieldKind, LocalSettingQudit,
};
pub use error::{Error, Result};
pub use linalg::{commutator, dagger, hs_inner, hs_norm, matmul, tensor, ComplexMatrix};
pub use optimizer::{maximize, maximize_m2, maximize_md, Manifold, OptimizationConfig, OptimizationResult};
pub use report::{ReportRow, K_D_BOUND_FACTOR};
