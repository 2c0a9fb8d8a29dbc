//! Dense conic interior-point solver over products of nonnegative, second-order,
//! and positive-semidefinite cones, plus the symmetric-matrix kernels shared by
//! the rest of the crate.
//!
//! Problems are stated in the slack form
//!
//! ```text
//!     minimize    c . y
//!     subject to  h - G y in K
//! ```
//!
//! where `K` is the cartesian product described by a [`ConeSpec`]. PSD blocks
//! occupy their svec coordinates inside the slack vector (see [`kernels::svec`]).

pub mod kernels;
mod scaling;
mod solver;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
pub use kernels::{
    check_symmetric, factor_spd, min_eigenvalue, side_from_svec_len, smat, solve_with_factor,
    svec, svec_index, svec_len,
};

/// Cone families supported by the solver. All three are self-dual.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConeKind {
    /// Componentwise nonnegative orthant; `dim` = component count.
    NonNeg,
    /// Second-order cone `t >= ||u||_2`; `dim` = cone order (1 + len(u)).
    Soc,
    /// Positive semidefinite matrices; `dim` = matrix side length.
    Psd,
}

/// One cone block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ConeBlock {
    pub kind: ConeKind,
    pub dim: usize,
}

impl ConeBlock {
    pub fn nonneg(dim: usize) -> Self {
        Self { kind: ConeKind::NonNeg, dim }
    }
    pub fn soc(dim: usize) -> Self {
        Self { kind: ConeKind::Soc, dim }
    }
    pub fn psd(side: usize) -> Self {
        Self { kind: ConeKind::Psd, dim: side }
    }

    /// Number of slack coordinates the block occupies.
    pub fn slack_len(&self) -> usize {
        match self.kind {
            ConeKind::NonNeg | ConeKind::Soc => self.dim,
            ConeKind::Psd => svec_len(self.dim),
        }
    }

    /// Barrier degree, used to normalize the complementarity gap.
    fn degree(&self) -> usize {
        match self.kind {
            ConeKind::NonNeg => self.dim,
            ConeKind::Soc => 1,
            ConeKind::Psd => self.dim,
        }
    }
}

/// Ordered list of cone blocks partitioning the slack vector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConeSpec {
    pub blocks: Vec<ConeBlock>,
}

impl ConeSpec {
    pub fn new(blocks: Vec<ConeBlock>) -> Result<Self> {
        for b in &blocks {
            if b.dim == 0 {
                return Err(Error::Dimension("cone block of dimension 0".into()));
            }
        }
        Ok(Self { blocks })
    }

    /// Total slack length.
    pub fn slack_len(&self) -> usize {
        self.blocks.iter().map(ConeBlock::slack_len).sum()
    }

    pub(crate) fn degree(&self) -> usize {
        self.blocks.iter().map(ConeBlock::degree).sum()
    }

    /// Slack ranges of each block, in order.
    pub fn block_ranges(&self) -> Vec<std::ops::Range<usize>> {
        let mut out = Vec::with_capacity(self.blocks.len());
        let mut at = 0;
        for b in &self.blocks {
            let len = b.slack_len();
            out.push(at..at + len);
            at += len;
        }
        out
    }
}

/// Conic program in slack form; see the module docs.
#[derive(Debug, Clone)]
pub struct ConeProgram {
    /// Objective coefficients over the free decision variables `y`.
    pub objective: DVector<f64>,
    /// Dense constraint matrix; slack = `h - G y`.
    pub g: DMatrix<f64>,
    /// Constraint offsets.
    pub h: DVector<f64>,
    /// Cone partition of the slack vector.
    pub cones: ConeSpec,
}

impl ConeProgram {
    /// Structural validation: run before any iteration.
    pub fn validate(&self) -> Result<()> {
        let m = self.cones.slack_len();
        if self.g.nrows() != m {
            return Err(Error::Dimension(format!(
                "G has {} rows but the cones describe {} slack coordinates",
                self.g.nrows(),
                m
            )));
        }
        if self.h.len() != m {
            return Err(Error::Dimension(format!(
                "h has length {} but the cones describe {} slack coordinates",
                self.h.len(),
                m
            )));
        }
        if self.objective.len() != self.g.ncols() {
            return Err(Error::Dimension(format!(
                "objective has length {} but G has {} columns",
                self.objective.len(),
                self.g.ncols()
            )));
        }
        if self.g.ncols() == 0 || m == 0 {
            return Err(Error::Dimension("empty program".into()));
        }
        Ok(())
    }

    /// Debug dump for external cross-checking; field layout documented in
    /// `docs/SCHEMAS.md`.
    pub fn debug_json(&self) -> serde_json::Value {
        serde_json::json!({
            "objective": self.objective.as_slice(),
            "g_rows": self.g.nrows(),
            "g_cols": self.g.ncols(),
            "g": self.g.row_iter().flat_map(|r| r.iter().copied().collect::<Vec<_>>()).collect::<Vec<_>>(),
            "h": self.h.as_slice(),
            "cones": self.cones.blocks,
        })
    }
}

/// Outcome classification of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    MaxIterations,
}

/// Solver knobs.
#[derive(Debug, Clone, Copy)]
pub struct SolverSettings {
    /// Relative primal/dual/gap residual target.
    pub tolerance: f64,
    /// Iteration cap.
    pub max_iterations: usize,
    /// Fraction of the step to the cone boundary.
    pub step_fraction: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_iterations: 200,
            step_fraction: 0.99,
        }
    }
}

/// Per-iteration statistics, logged for diagnostics and invariant checks.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IterationStats {
    pub iteration: usize,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub gap_residual: f64,
}

/// Primal-dual answer of [`solve`].
#[derive(Debug, Clone)]
pub struct ConeSolution {
    pub status: SolveStatus,
    /// Primal decision variables.
    pub y: DVector<f64>,
    /// Dual multipliers per cone block (svec coordinates for PSD blocks).
    pub duals: Vec<DVector<f64>>,
    /// Slack vector `h - G y` at the returned point.
    pub slack: DVector<f64>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// Relative residuals (dimensionless).
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub gap_residual: f64,
    pub iterations: usize,
    pub trace: Vec<IterationStats>,
    /// Human-readable context when the status is not optimal.
    pub diagnostics: String,
}

impl ConeSolution {
    /// Objective value of the primal point.
    pub fn objective(&self) -> f64 {
        self.primal_objective
    }

    /// Dual multiplier block `i` reshaped to a matrix (PSD blocks only).
    pub fn dual_matrix(&self, i: usize) -> Result<DMatrix<f64>> {
        smat(&self.duals[i])
    }
}

/// Solves a conic program with a primal-dual path-following method using
/// Nesterov-Todd scaling and a predictor-corrector step.
pub fn solve(program: &ConeProgram, settings: &SolverSettings) -> Result<ConeSolution> {
    program.validate()?;
    solver::solve_ipm(program, settings)
}

#[cfg(test)]
mod tests;
