//! Per-dimension comparison rows: best-known commutator supremum against the
//! `2d` bound and the external `4d` bound on the largest two-qudit Bell
//! violation.

use serde::Serialize;

use crate::complementarity::{m_d_best_known, m_d_bound};
use crate::error::{Error, Result};

/// The largest two-qudit Bell violation is bounded by `4d`; reported as a
/// reference line only.
pub const K_D_BOUND_FACTOR: f64 = 4.0;

/// Largest `d` covered by [`build_report`].
pub const MAX_REPORT_DIM: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub d: usize,
    pub m_best_known: f64,
    pub m_paper_bound: f64,
    pub k_d_bound: f64,
    /// `"alpha[i,j]=1"`: the unit-weight tensor attaining `m_best_known`.
    pub certificate: String,
}

impl ReportRow {
    pub fn for_dim(d: usize) -> Result<Self> {
        let best = m_d_best_known(d)?;
        let (i, j) = best.source;
        Ok(Self {
            d,
            m_best_known: best.value,
            m_paper_bound: m_d_bound(d)?,
            k_d_bound: K_D_BOUND_FACTOR * d as f64,
            certificate: format!("alpha[{i},{j}]=1"),
        })
    }

    /// `m_best_known <= 2d <= 4d`, with `1e-9` slack on the first comparison.
    pub fn is_ordered(&self) -> bool {
        self.m_best_known <= self.m_paper_bound + 1e-9 && self.m_paper_bound <= self.k_d_bound
    }
}

/// Rows for `d = 2..=dmax`.
pub fn build_report(dmax: usize) -> Result<Vec<ReportRow>> {
    if !(2..=MAX_REPORT_DIM).contains(&dmax) {
        return Err(Error::domain(format!("dmax must be in 2..={MAX_REPORT_DIM}, got {dmax}")));
    }
    (2..=dmax).map(ReportRow::for_dim).collect()
}
