//! Discretized copula representation through the conditional-CDF field
//! h(t,v) = ∂₁C(t,v) sampled at cell midpoints, plus the measure evaluators
//! ξ, ψ, τ and the Markov-product diagonal.
//!
//! Grid convention: `h[i][j] ≈ ∂₁C(t_i, v_j)` with midpoints
//! `t_i = (i+½)/n`, `v_j = (j+½)/n`, stored row-major (`i` is the t index).

use std::io::{BufRead, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::{Error, Result};

/// How a [`MeasureReport`] was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Grid,
    Quadrature,
}

/// A (ξ, ψ) pair with optional Kendall τ and evaluation metadata.
/// `n_or_tol` is the grid size for `Method::Grid` and the absolute tolerance
/// for `Method::Quadrature`; it is 0 for exact evaluations.
#[derive(Debug, Clone, Serialize)]
pub struct MeasureReport {
    pub xi: f64,
    pub psi: f64,
    pub tau: Option<f64>,
    pub method: Method,
    #[serde(rename = "n")]
    pub n_or_tol: f64,
}

impl MeasureReport {
    pub fn exact(xi: f64, psi: f64, tau: Option<f64>) -> Self {
        Self {
            xi,
            psi,
            tau,
            method: Method::Exact,
            n_or_tol: 0.0,
        }
    }
}

/// n×n field of conditional-CDF values at cell midpoints.
#[derive(Debug, Clone)]
pub struct GridCopula {
    n: usize,
    /// row-major, h[i * n + j]
    h: Vec<f64>,
    /// worst column-mean deviation observed at construction
    feas_violation: f64,
}

/// Default feasibility tolerance for the column-mean constraint; jump
/// discontinuities of h contribute O(1/n) to the sampled column means.
pub fn default_feas_tol(n: usize) -> f64 {
    2.0 / n as f64
}

/// Midpoint of cell `i` on an n-cell axis.
pub fn midpoint(i: usize, n: usize) -> f64 {
    (i as f64 + 0.5) / n as f64
}

/// ξ of a raw row-major midpoint field: 6·mean(h²) − 2, accumulated
/// column-by-column in the same order as [`GridCopula::markov_diag`] so the
/// Markov-diagonal identity is bit-exact.
pub fn field_xi(n: usize, h: &[f64]) -> f64 {
    let mean = (0..n)
        .map(|j| (0..n).map(|i| h[i * n + j].powi(2)).sum::<f64>() / n as f64)
        .sum::<f64>()
        / n as f64;
    6.0 * mean - 2.0
}

/// ψ of a raw row-major midpoint field: 6·∬ 1{t ≤ v} h − 2 with the exact
/// cell measure of the indicator (half weight on diagonal cells).
pub fn field_psi(n: usize, h: &[f64]) -> f64 {
    let mut acc = 0.0;
    for j in 0..n {
        let mut col = 0.5 * h[j * n + j];
        for i in 0..j {
            col += h[i * n + j];
        }
        acc += col / n as f64;
    }
    6.0 * acc / n as f64 - 2.0
}

impl GridCopula {
    /// Samples ∂₁C at cell midpoints. Errors when some column mean deviates
    /// from v_j by more than `feas_tol` (defaults to 2/n).
    pub fn from_partial<F>(dc1: F, n: usize, feas_tol: Option<f64>) -> Result<Self>
    where
        F: Fn(f64, f64) -> f64 + Sync,
    {
        assert!(n >= 2, "grid size must be at least 2");
        let tol = feas_tol.unwrap_or_else(|| default_feas_tol(n));
        let columns: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|j| {
                let v = midpoint(j, n);
                (0..n)
                    .map(|i| dc1(midpoint(i, n), v).clamp(0.0, 1.0))
                    .collect()
            })
            .collect();
        let mut h = vec![0.0; n * n];
        for (j, col) in columns.iter().enumerate() {
            for (i, &val) in col.iter().enumerate() {
                h[i * n + j] = val;
            }
        }
        Self::from_matrix(n, h, tol)
    }

    /// Wraps an existing midpoint field, verifying range and column means.
    pub fn from_matrix(n: usize, h: Vec<f64>, feas_tol: f64) -> Result<Self> {
        assert_eq!(h.len(), n * n, "matrix must be n*n");
        let mut worst = 0.0f64;
        let mut worst_col = 0;
        let mut worst_mean = 0.0;
        for j in 0..n {
            let mean = (0..n).map(|i| h[i * n + j]).sum::<f64>() / n as f64;
            let dev = (mean - midpoint(j, n)).abs();
            if dev > worst {
                worst = dev;
                worst_col = j;
                worst_mean = mean;
            }
        }
        if worst > feas_tol {
            return Err(Error::InfeasibleGrid {
                column: worst_col,
                mean: worst_mean,
                required: midpoint(worst_col, n),
                violation: worst,
                tol: feas_tol,
            });
        }
        Ok(Self {
            n,
            h,
            feas_violation: worst,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn feas_violation(&self) -> f64 {
        self.feas_violation
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.h[i * self.n + j]
    }

    pub fn raw(&self) -> &[f64] {
        &self.h
    }

    /// Per-column mean of h², i.e. the Markov-product diagonal
    /// (C⊤∗C)(v_j, v_j) = ∫₀¹ ∂₁C(t, v_j)² dt at grid level.
    pub fn markov_diag(&self) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|j| (0..n).map(|i| self.h[i * n + j].powi(2)).sum::<f64>() / n as f64)
            .collect()
    }

    /// ξ = 6·mean(h²) − 2, computed through the Markov diagonal so the
    /// identity ξ = 6·mean(markov_diag) − 2 holds bit-exactly.
    pub fn xi(&self) -> f64 {
        field_xi(self.n, &self.h)
    }

    /// ψ = 6·∬ 1{t ≤ v} h dt dv − 2 with the exact cell measure of the
    /// indicator: full weight below the diagonal, half weight on diagonal
    /// cells (the set {t ≤ v} covers exactly half of each diagonal cell).
    pub fn psi(&self) -> f64 {
        field_psi(self.n, &self.h)
    }

    /// Cumulative field C(u_i, v_j) at cell right-edges u_i = (i+1)/n and
    /// column midpoints v_j (prefix sums of h over t scaled by 1/n).
    pub fn cdf(&self) -> Vec<f64> {
        let n = self.n;
        let mut c = vec![0.0; n * n];
        for j in 0..n {
            let mut run = 0.0;
            for i in 0..n {
                run += self.h[i * n + j] / n as f64;
                c[i * n + j] = run;
            }
        }
        c
    }

    /// Kendall τ = 1 − 4·∬ ∂₁C ∂₂C, using central differences of the
    /// cumulative field along v (one-sided at the boundary columns).
    pub fn tau(&self) -> f64 {
        let n = self.n;
        assert!(n >= 4, "tau needs n >= 4");
        let c = self.cdf();
        let nf = n as f64;
        let mut acc = 0.0;
        for j in 0..n {
            let mut col = 0.0;
            for i in 0..n {
                let d2 = if j == 0 {
                    (c[i * n + 1] - c[i * n]) * nf
                } else if j == n - 1 {
                    (c[i * n + j] - c[i * n + j - 1]) * nf
                } else {
                    (c[i * n + j + 1] - c[i * n + j - 1]) * nf / 2.0
                };
                col += self.h[i * n + j] * d2;
            }
            acc += col / nf;
        }
        1.0 - 4.0 * acc / nf
    }

    /// True when every column is non-increasing in t up to `tol`
    /// (stochastically increasing copula at grid level).
    pub fn is_si(&self, tol: f64) -> bool {
        let n = self.n;
        for j in 0..n {
            for i in 0..n - 1 {
                if self.h[(i + 1) * n + j] > self.h[i * n + j] + tol {
                    return false;
                }
            }
        }
        true
    }

    /// Pointwise convex combination (1−λ)·self + λ·other of the h fields,
    /// which is the h field of the corresponding copula mixture.
    pub fn mix(&self, other: &GridCopula, lambda: f64) -> GridCopula {
        assert_eq!(self.n, other.n, "grids must have equal size");
        assert!((0.0..=1.0).contains(&lambda));
        let h = self
            .h
            .iter()
            .zip(other.h.iter())
            .map(|(&a, &b)| (1.0 - lambda) * a + lambda * b)
            .collect();
        GridCopula {
            n: self.n,
            h,
            feas_violation: self.feas_violation.max(other.feas_violation),
        }
    }

    /// Full report from the grid evaluators.
    pub fn measures(&self) -> MeasureReport {
        MeasureReport {
            xi: self.xi(),
            psi: self.psi(),
            tau: if self.n >= 4 { Some(self.tau()) } else { None },
            method: Method::Grid,
            n_or_tol: self.n as f64,
        }
    }

    /// Writes the field as CSV: a `# gridcop n=<n>` header line, then n rows
    /// (t index) of n comma-separated values (v index).
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# gridcop n={}", self.n)?;
        let n = self.n;
        let mut line = String::new();
        for i in 0..n {
            line.clear();
            for j in 0..n {
                if j > 0 {
                    line.push(',');
                }
                line.push_str(&format!("{}", self.h[i * n + j]));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn write_csv_path(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    /// Reads a grid written by [`GridCopula::write_csv`], re-validating
    /// feasibility with the default tolerance.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty grid file".into()))??;
        let n: usize = header
            .trim()
            .strip_prefix("# gridcop n=")
            .ok_or_else(|| Error::Parse("missing '# gridcop n=<n>' header".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("bad grid size in header: {e}")))?;
        if n < 2 {
            return Err(Error::Parse(format!("grid size {n} too small")));
        }
        let mut h = Vec::with_capacity(n * n);
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            if i >= n {
                return Err(Error::Parse(format!("more than {n} data rows")));
            }
            let row: Vec<f64> = line
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Parse(format!("row {i}: {e}")))
                })
                .collect::<Result<_>>()?;
            if row.len() != n {
                return Err(Error::Parse(format!(
                    "row {i} has {} values, expected {n}",
                    row.len()
                )));
            }
            h.extend(row);
        }
        if h.len() != n * n {
            return Err(Error::Parse(format!(
                "expected {n} rows of {n} values, got {} values",
                h.len()
            )));
        }
        Self::from_matrix(n, h, default_feas_tol(n))
    }

    pub fn read_csv_path(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(f))
    }
}
