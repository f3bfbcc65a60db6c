//! Chatterjee's rank correlation ξ and Spearman's footrule ψ for bivariate copulas.
//!
//! The crate is organised around the conditional-CDF field h(t,v) = ∂₁C(t,v),
//! which determines both measures:
//!
//! * ξ(C) = 6 ∬ h(t,v)² dt dv − 2
//! * ψ(C) = 6 ∬ 1{t ≤ v} h(t,v) dt dv − 2
//!
//! [`gridcop`] holds the universal discretized representation (an n×n field of
//! h sampled at cell midpoints) together with the measure evaluators.
//! [`families`] provides analytic copula families with closed-form or grid
//! measures, [`twoparam`] the two-parameter strip family with a zero-density
//! diagonal band, [`boundary`] the attainable-region curves, and [`optimize`]
//! the projected-gradient solver for the discretized convex program that
//! recovers lower-boundary minimizer fields.

pub mod boundary;
pub mod descriptor;
pub mod families;
pub mod gridcop;
pub mod numerics;
pub mod optimize;
pub mod pgm;
pub mod tables;
pub mod twoparam;

use thiserror::Error;

/// Sizes the global worker pool used by grid construction, the per-column
/// and per-row projections and the parameter sweeps; 0 keeps the automatic
/// default. Results are bit-identical for any pool size (parallel work is
/// partitioned per column/row/parameter and reduced in index order).
pub fn build_thread_pool(threads: usize) -> std::result::Result<(), String> {
    if threads == 0 {
        return Ok(());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument was outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive quadrature hit the maximum refinement depth before meeting
    /// the requested tolerance. Carries the best estimate obtained.
    #[error("quadrature did not converge: best estimate {best}, achieved tolerance {achieved:e} > requested {requested:e}")]
    QuadratureNonConvergence {
        best: f64,
        achieved: f64,
        requested: f64,
    },

    /// Root finder was called on an interval without a sign change.
    #[error("not bracketed: f({lo}) = {flo}, f({hi}) = {fhi} have the same sign")]
    NotBracketed { lo: f64, hi: f64, flo: f64, fhi: f64 },

    /// A sampled h-field violates the column-mean constraint of a copula
    /// partial derivative beyond the feasibility tolerance.
    #[error("infeasible grid: column {column} has mean {mean} but requires {required} (violation {violation:e} > tol {tol:e})")]
    InfeasibleGrid {
        column: usize,
        mean: f64,
        required: f64,
        violation: f64,
        tol: f64,
    },

    /// A family descriptor or constructor argument failed validation.
    #[error("invalid family: {0}")]
    InvalidFamily(String),

    /// Internal consistency check failed while building a derived object.
    #[error("construction failed: {0}")]
    Construction(String),

    /// The QP solver stopped before meeting its termination criteria.
    /// The best iterate is retained inside the carried solution.
    #[error("solver did not converge after {iterations} iterations: feasibility residual {feasibility:e}, objective {objective}")]
    SolverNonConvergence {
        iterations: usize,
        feasibility: f64,
        objective: f64,
        best: Box<optimize::QpSolution>,
    },

    /// Malformed input file (grid CSV, config, descriptor).
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
