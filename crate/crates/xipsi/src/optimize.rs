//! The discretized convex program
//!   minimize (6/n²) Σ_{ij} ( μ·w_ij·h_ij + h_ij² )
//!   subject to 0 ≤ h ≤ 1, column means = v_j, rows non-decreasing in j,
//! where w is the exact cell measure of the indicator 1{t ≤ v} (1 below the
//! diagonal, ½ on it). The objective's Hessian is (12/n²)·I, so the fixed
//! 1/L gradient step lands on the unconstrained minimizer −μw/2 and the
//! constrained solution is its Euclidean projection onto the feasible set,
//! computed by Dykstra alternation between the per-column capped simplex and
//! the per-row monotone∩box cone.

use rayon::prelude::*;

use crate::families::{gaussian_psi, gaussian_xi, FrechetMixture, ParametricCopula, ParametricFamily};
use crate::gridcop::{field_psi, field_xi, midpoint, GridCopula};
use crate::numerics::{isotonic_project, project_capped_simplex};
use crate::twoparam::StripCopula;
use crate::{families::CDownMu, Error, Result};

/// Problem description: functional weight μ and grid size n.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QpProblem {
    pub mu: f64,
    pub n: usize,
}

impl QpProblem {
    pub fn new(mu: f64, n: usize) -> Result<Self> {
        if mu.is_nan() || mu < 0.0 {
            return Err(Error::Domain(format!("μ must be nonnegative, got {mu}")));
        }
        if n < 2 {
            return Err(Error::Domain(format!("grid size {n} too small")));
        }
        Ok(Self { mu, n })
    }

    /// Exact cell measure of 1{t ≤ v} on cell (i, j).
    pub fn mask(i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => 1.0,
            std::cmp::Ordering::Equal => 0.5,
            std::cmp::Ordering::Greater => 0.0,
        }
    }

    /// Objective 6·mean(μ·w·h + h²); algebraically equal to
    /// μ(ψ_grid + 2) + (ξ_grid + 2), and computed through the shared
    /// measure kernels so the identity holds bit-exactly.
    pub fn objective(&self, h: &[f64]) -> f64 {
        assert_eq!(h.len(), self.n * self.n);
        let xi = field_xi(self.n, h);
        let psi = field_psi(self.n, h);
        self.mu * (psi + 2.0) + (xi + 2.0)
    }
}

/// One convergence-log row per outer iteration.
#[derive(Debug, Clone, Copy)]
pub struct IterLog {
    pub iter: usize,
    pub objective: f64,
    pub feas_residual: f64,
}

/// Solver output.
#[derive(Debug, Clone)]
pub struct QpSolution {
    pub h: GridCopula,
    pub objective: f64,
    pub iterations: usize,
    pub feasibility_residual: f64,
    pub stationarity_residual: f64,
    pub log: Vec<IterLog>,
}

const DYKSTRA_MAX_SWEEPS: usize = 200;
const DYKSTRA_SWEEP_TOL: f64 = 1e-10;
const FEAS_TARGET: f64 = 1e-8;
const OBJ_WINDOW: usize = 50;

fn monotonicity_residual(n: usize, h: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n - 1 {
            worst = worst.max(h[i * n + j] - h[i * n + j + 1]);
        }
    }
    worst.max(0.0)
}

fn colmean_residual(n: usize, h: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..n {
        let mean = (0..n).map(|i| h[i * n + j]).sum::<f64>() / n as f64;
        worst = worst.max((mean - midpoint(j, n)).abs());
    }
    worst
}

fn box_residual(h: &[f64]) -> f64 {
    h.iter()
        .map(|&x| (-x).max(x - 1.0).max(0.0))
        .fold(0.0, f64::max)
}

/// Below this size the parallel dispatch costs more than the projections.
const PAR_THRESHOLD: usize = 32;

/// Projection onto the per-column capped simplices (box ∩ column means).
fn project_columns(n: usize, h: &[f64]) -> Vec<f64> {
    let project = |j: usize| -> Vec<f64> {
        let col: Vec<f64> = (0..n).map(|i| h[i * n + j]).collect();
        project_capped_simplex(&col, midpoint(j, n))
    };
    let cols: Vec<Vec<f64>> = if n < PAR_THRESHOLD {
        (0..n).map(project).collect()
    } else {
        (0..n).into_par_iter().map(project).collect()
    };
    let mut out = vec![0.0; n * n];
    for (j, col) in cols.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            out[i * n + j] = v;
        }
    }
    out
}

/// Projection onto the per-row monotone cones intersected with the box;
/// clipping after PAV is exact for constant box bounds.
fn project_rows_monotone(n: usize, h: &[f64]) -> Vec<f64> {
    let project = |i: usize| -> Vec<f64> {
        let iso = isotonic_project(&h[i * n..(i + 1) * n]);
        iso.into_iter().map(|v| v.clamp(0.0, 1.0)).collect()
    };
    let rows: Vec<Vec<f64>> = if n < PAR_THRESHOLD {
        (0..n).map(project).collect()
    } else {
        (0..n).into_par_iter().map(project).collect()
    };
    rows.into_iter().flatten().collect()
}

/// Dykstra alternation; returns the final column-feasible iterate together
/// with the sweep count and its monotonicity residual.
fn dykstra_project(n: usize, z: &[f64], max_sweeps: usize) -> (Vec<f64>, usize, f64) {
    let len = z.len();
    let mut x = z.to_vec();
    let mut p = vec![0.0; len];
    let mut q = vec![0.0; len];
    let mut ya = x.clone();
    let mut mono = f64::INFINITY;
    let mut sweeps = 0;
    for s in 1..=max_sweeps {
        sweeps = s;
        let mut xp: Vec<f64> = x.iter().zip(p.iter()).map(|(a, b)| a + b).collect();
        ya = project_columns(n, &xp);
        for k in 0..len {
            p[k] = xp[k] - ya[k];
        }
        xp = ya.iter().zip(q.iter()).map(|(a, b)| a + b).collect();
        let xb = project_rows_monotone(n, &xp);
        for k in 0..len {
            q[k] = xp[k] - xb[k];
        }
        let delta = x
            .iter()
            .zip(xb.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        x = xb;
        mono = monotonicity_residual(n, &ya);
        if mono <= FEAS_TARGET * 0.1 && delta <= DYKSTRA_SWEEP_TOL {
            break;
        }
    }
    (ya, sweeps, mono)
}

/// Projected-gradient solve with the fixed 1/L step. Terminates once the
/// iterate is a fixed point (or the objective decrease over a 50-iteration
/// window falls below `obj_tol`) with feasibility residual ≤ 1e-8.
pub fn qp_solve(p: QpProblem, max_iters: usize, obj_tol: f64) -> Result<QpSolution> {
    let n = p.n;
    let len = n * n;
    // start at the always-feasible independence field h[i][j] = v_j
    let mut h: Vec<f64> = (0..len).map(|k| midpoint(k % n, n)).collect();
    let mut objective = p.objective(&h);
    let mut log = vec![IterLog {
        iter: 0,
        objective,
        feas_residual: 0.0,
    }];
    let mut history = vec![objective];
    let mut feas = 0.0f64;
    let mut stationarity = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;

    for iter in 1..=max_iters {
        iterations = iter;
        // z = h − (n²/12)·∇F(h) with ∇F = (6/n²)(μ·w + 2h); the step cancels
        // the current iterate exactly because the Hessian is isotropic
        let z: Vec<f64> = (0..len)
            .map(|k| {
                let (i, j) = (k / n, k % n);
                let grad = 6.0 / (len as f64) * (p.mu * QpProblem::mask(i, j) + 2.0 * h[k]);
                h[k] - (len as f64) / 12.0 * grad
            })
            .collect();
        let (h_new, _sweeps, mono) = dykstra_project(n, &z, DYKSTRA_MAX_SWEEPS);
        let obj_new = p.objective(&h_new);
        debug_assert!(
            obj_new <= objective + 1e-12,
            "objective increased: {objective} -> {obj_new}"
        );
        stationarity = h
            .iter()
            .zip(h_new.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        feas = mono
            .max(colmean_residual(n, &h_new))
            .max(box_residual(&h_new));
        h = h_new;
        objective = obj_new;
        history.push(objective);
        log.push(IterLog {
            iter,
            objective,
            feas_residual: feas,
        });

        let windowed = history.len() > OBJ_WINDOW
            && history[history.len() - 1 - OBJ_WINDOW] - objective < obj_tol;
        if (stationarity <= 1e-15 || windowed) && feas <= FEAS_TARGET {
            converged = true;
            break;
        }
    }

    let grid = GridCopula::from_matrix(n, h, crate::gridcop::default_feas_tol(n))?;
    let solution = QpSolution {
        h: grid,
        objective,
        iterations,
        feasibility_residual: feas,
        stationarity_residual: stationarity,
        log,
    };
    if converged {
        Ok(solution)
    } else {
        Err(Error::SolverNonConvergence {
            iterations,
            feasibility: feas,
            objective,
            best: Box::new(solution),
        })
    }
}

/// Per-cell copula density from a solved field: second mixed difference of
/// the cumulative field, realised as `n·(ĥ[i][j+1] − ĥ[i][j])` on v-edge
/// interpolants ĥ (0 at v = 0, midpoint averages inside, 1 at v = 1).
/// Negative cells are clipped to 0; the largest clipped magnitude is
/// returned alongside.
pub fn density_from_field(g: &GridCopula) -> (Vec<f64>, f64) {
    let n = g.n();
    let nf = n as f64;
    let mut c = vec![0.0; n * n];
    let mut clip = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let lo = if j == 0 {
                0.0
            } else {
                0.5 * (g.value(i, j - 1) + g.value(i, j))
            };
            let hi = if j == n - 1 {
                1.0
            } else {
                0.5 * (g.value(i, j) + g.value(i, j + 1))
            };
            let d = nf * (hi - lo);
            if d < 0.0 {
                clip = clip.max(-d);
                c[i * n + j] = 0.0;
            } else {
                c[i * n + j] = d;
            }
        }
    }
    (c, clip)
}

// ---------------------------------------------------------------------------
// Parameter grid search over the table families
// ---------------------------------------------------------------------------

/// Families searchable by [`grid_search_extremizer`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchFamily {
    Parametric(ParametricFamily),
    /// (1−α)Π + αM, closed forms
    FrechetUpper,
    /// λΠ + (1−λ)W parameterized by the W weight, closed forms
    FrechetLower,
    /// C↘ pseudo-copula family, closed forms
    CDown,
    /// two-parameter family along the path, quadrature
    StripPath,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchObjective {
    MaxPsiMinusXi,
    MinXiPlusPsi,
}

/// One located extremizer: parameter, measures and the objective value.
#[derive(Debug, Clone, Copy)]
pub struct ExtremizerRow {
    pub param: f64,
    pub xi: f64,
    pub psi: f64,
    pub value: f64,
}

// tight enough that the sum ordering is faithful at 0.005 lattice steps
// near the path family's very flat minimum
const STRIP_SEARCH_TOL: f64 = 1e-6;

fn family_measures(family: SearchFamily, theta: f64, n: usize) -> Result<(f64, f64)> {
    match family {
        SearchFamily::Parametric(ParametricFamily::Gaussian) => {
            ParametricCopula::new(ParametricFamily::Gaussian, theta)?;
            Ok((gaussian_xi(theta), gaussian_psi(theta)))
        }
        SearchFamily::Parametric(fam) => {
            let c = ParametricCopula::new(fam, theta)?;
            let g = GridCopula::from_partial(|t, v| c.partial(t, v), n, None)?;
            Ok((g.xi(), g.psi()))
        }
        SearchFamily::FrechetUpper => {
            let m = FrechetMixture::upper(theta)?.measures();
            Ok((m.xi, m.psi))
        }
        SearchFamily::FrechetLower => {
            let m = FrechetMixture::lower(theta)?.measures();
            Ok((m.xi, m.psi))
        }
        SearchFamily::CDown => {
            let m = CDownMu::new(theta)?.measures();
            Ok((m.xi, m.psi))
        }
        SearchFamily::StripPath => {
            let m = StripCopula::from_path(theta)?.measures(STRIP_SEARCH_TOL)?;
            Ok((m.xi, m.psi))
        }
    }
}

/// Dense parameter sweep returning the extremizing row; ties break toward
/// the smallest parameter. Parameters run lo, lo+step, … up to hi.
pub fn grid_search_extremizer(
    family: SearchFamily,
    objective: SearchObjective,
    lo: f64,
    hi: f64,
    step: f64,
    n: usize,
) -> Result<ExtremizerRow> {
    assert!(step > 0.0 && hi > lo, "invalid parameter grid");
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    let params: Vec<f64> = (0..count).map(|k| lo + k as f64 * step).collect();
    let rows: Vec<Result<(f64, f64, f64)>> = params
        .par_iter()
        .map(|&th| family_measures(family, th, n).map(|(xi, psi)| (th, xi, psi)))
        .collect();
    let mut best: Option<ExtremizerRow> = None;
    for row in rows {
        let (param, xi, psi) = row?;
        let value = match objective {
            SearchObjective::MaxPsiMinusXi => psi - xi,
            SearchObjective::MinXiPlusPsi => xi + psi,
        };
        let better = match (&best, objective) {
            (None, _) => true,
            (Some(b), SearchObjective::MaxPsiMinusXi) => value > b.value,
            (Some(b), SearchObjective::MinXiPlusPsi) => value < b.value,
        };
        if better {
            best = Some(ExtremizerRow {
                param,
                xi,
                psi,
                value,
            });
        }
    }
    Ok(best.expect("parameter grid is nonempty"))
}
