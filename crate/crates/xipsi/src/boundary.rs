//! Attainable-region geometry: the exact upper boundary ψ = √ξ, the Jensen
//! lower-bound curve traced by the C↘ family, the cubic parameter inversion
//! μ(y), region membership verdicts, and the KKT stationarity residual of the
//! upper-boundary optimizer.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::families::CDownMu;
use crate::gridcop::midpoint;
use crate::numerics::{find_root_bracketed, Interval};
use crate::twoparam::StripCopula;
use crate::{Error, Result};

/// A point in (ξ, ψ) space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionPoint {
    pub xi: f64,
    pub psi: f64,
}

impl RegionPoint {
    pub fn new(xi: f64, psi: f64) -> Result<Self> {
        if !(-0.0..=1.0).contains(&xi) && !(0.0..=1.0).contains(&xi) {
            return Err(Error::Domain(format!("xi = {xi} outside [0,1]")));
        }
        if !(-0.5..=1.0).contains(&psi) {
            return Err(Error::Domain(format!("psi = {psi} outside [-1/2,1]")));
        }
        Ok(Self { xi, psi })
    }
}

/// Constraint-by-constraint membership verdict for the attainable region.
/// `margin_*` are signed distances: nonnegative inside the constraint.
#[derive(Debug, Clone, Serialize)]
pub struct RegionVerdict {
    /// ψ ≤ √ξ
    pub in_upper: bool,
    /// ξ ≥ ξ(C↘_{μ(ψ)}); vacuously true for ψ > 0 where the bound does not
    /// constrain
    pub in_lower_bound: bool,
    /// ξ ≤ ψ ≤ √ξ (membership in the SI region)
    pub in_si_region: bool,
    /// √ξ − ψ
    pub margin_upper: f64,
    /// ξ − ξ(C↘_{μ(ψ)}) for ψ ≤ 0, `None` otherwise
    pub margin_lower: Option<f64>,
}

/// Maximal footrule value given ξ = x: √x (attained uniquely by the Fréchet
/// copula with α = √x).
pub fn upper_psi_max(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("xi = {x} outside [0,1]")));
    }
    Ok(x.sqrt())
}

/// The Jensen lower-bound curve point (ξ(C↘_μ), ψ(C↘_μ)).
pub fn jensen_curve(mu: f64) -> Result<RegionPoint> {
    let m = CDownMu::new(mu)?.measures();
    Ok(RegionPoint {
        xi: m.xi,
        psi: m.psi,
    })
}

/// Inverts ψ(C↘_μ) = y on μ ∈ \[0,2\] through the cubic
/// μ³ − (4+2y)μ² − (4+8y)μ − 8y = 0, solved by bracketed bisection
/// (uniqueness on \[0,2\] follows from strict monotonicity of ψ in μ).
pub fn mu_of_y(y: f64) -> Result<f64> {
    if !(-0.5..=0.0).contains(&y) {
        return Err(Error::Domain(format!("y = {y} outside [-1/2, 0]")));
    }
    let cubic =
        |m: f64| m * m * m - (4.0 + 2.0 * y) * m * m - (4.0 + 8.0 * y) * m - 8.0 * y;
    find_root_bracketed(cubic, Interval::new(0.0, 2.0)?, 1e-12)
}

/// Evaluates the two region constraints of the attainable (ξ, ψ) set.
pub fn region_check(p: RegionPoint) -> Result<RegionVerdict> {
    let root = upper_psi_max(p.xi.max(0.0))?;
    let margin_upper = root - p.psi;
    let margin_lower = if p.psi <= 0.0 {
        let mu = mu_of_y(p.psi.max(-0.5))?;
        Some(p.xi - jensen_curve(mu)?.xi)
    } else {
        None
    };
    Ok(RegionVerdict {
        in_upper: margin_upper >= 0.0,
        in_lower_bound: margin_lower.is_none_or(|m| m >= 0.0),
        in_si_region: p.xi <= p.psi && p.psi <= root,
        margin_upper,
        margin_lower,
    })
}

/// Membership in the SI region {(x, y) : x ≤ y ≤ √x}, with slack `tol` on
/// both inequalities.
pub fn si_region_check(p: RegionPoint, tol: f64) -> bool {
    let root = p.xi.max(0.0).sqrt();
    p.xi <= p.psi + tol && p.psi <= root + tol
}

/// Maximum stationarity residual |−1{t≤v} + 12 μ* h*(t,v) + γ*(v)| of the
/// upper-boundary KKT candidate
///   h*_v(t) = (1−√x)v + √x·1{t≤v},  μ* = 1/(12√x),  γ*(v) = −((1−√x)/√x)·v
/// over the n×n midpoint grid. The identity is exact, so the residual is
/// floating-point noise.
pub fn kkt_residual_upper(x: f64, n: usize) -> Result<f64> {
    if !(x > 0.0 && x <= 1.0) {
        return Err(Error::Domain(format!("x = {x} outside (0,1]")));
    }
    let root = x.sqrt();
    let mu = 1.0 / (12.0 * root);
    let gamma = |v: f64| -(1.0 - root) / root * v;
    let mut worst = 0.0f64;
    for j in 0..n {
        let v = midpoint(j, n);
        for i in 0..n {
            let t = midpoint(i, n);
            let ind = f64::from(u8::from(t <= v));
            let h = (1.0 - root) * v + root * ind;
            let r = (-ind + 12.0 * mu * h + gamma(v)).abs();
            worst = worst.max(r);
        }
    }
    Ok(worst)
}

/// Identifiers for the exportable region curves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Curve {
    /// (x, x, √x), parameterized by ξ over \[0,1\]
    Upper,
    /// (μ, ξ(C↘_μ), ψ(C↘_μ)) over μ ∈ \[0,2\]
    Jensen,
    /// (α, 1−α², 1−α²) from the ordinal sums ⟨0,α⟩ over \[0,1\]
    SiLower,
    /// (μ, ξ(C_μ), ψ(C_μ)) along the two-parameter family path, μ ∈ \[0,4\]
    Path,
}

impl std::str::FromStr for Curve {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "upper" => Ok(Self::Upper),
            "jensen" => Ok(Self::Jensen),
            "si_lower" | "si-lower" => Ok(Self::SiLower),
            "path" => Ok(Self::Path),
            other => Err(Error::Parse(format!(
                "unknown curve '{other}' (expected upper, jensen, si_lower or path)"
            ))),
        }
    }
}

/// Uniformly sampled parameter sweep of a region curve; rows are
/// (parameter, ξ, ψ). `quad_tol` only affects the quadrature-evaluated path
/// curve.
pub fn boundary_export(curve: Curve, samples: usize, quad_tol: f64) -> Result<Vec<[f64; 3]>> {
    assert!(samples >= 2, "need at least 2 samples");
    let grid = |lo: f64, hi: f64| -> Vec<f64> {
        (0..samples)
            .map(|k| lo + (hi - lo) * k as f64 / (samples - 1) as f64)
            .collect()
    };
    match curve {
        Curve::Upper => Ok(grid(0.0, 1.0)
            .into_iter()
            .map(|x| [x, x, x.sqrt()])
            .collect()),
        Curve::Jensen => grid(0.0, 2.0)
            .into_iter()
            .map(|mu| {
                let p = jensen_curve(mu)?;
                Ok([mu, p.xi, p.psi])
            })
            .collect(),
        Curve::SiLower => Ok(grid(0.0, 1.0)
            .into_iter()
            .map(|a| [a, 1.0 - a * a, 1.0 - a * a])
            .collect()),
        Curve::Path => grid(0.0, 4.0)
            .into_iter()
            .map(|mu| {
                let sc = StripCopula::from_path(mu)?;
                let m = sc.measures(quad_tol)?;
                Ok([mu, m.xi, m.psi])
            })
            .collect(),
    }
}

/// Writes curve rows as CSV with header `param,xi,psi`, 15 significant
/// digits per value.
pub fn write_boundary_csv<W: Write>(mut w: W, rows: &[[f64; 3]]) -> Result<()> {
    writeln!(w, "param,xi,psi")?;
    for r in rows {
        writeln!(w, "{:.14e},{:.14e},{:.14e}", r[0], r[1], r[2])?;
    }
    Ok(())
}

pub fn write_boundary_csv_path(path: &Path, rows: &[[f64; 3]]) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_boundary_csv(std::io::BufWriter::new(f), rows)
}
