//! The two-parameter strip copula family: a diagonal band of zero density of
//! vertical width β with α×β corner rectangles, made into a copula by the
//! marginal-correcting transform T ↦ F_T(T).
//!
//! Geometry: the band's lower boundary is
//!   ψ(s) = 0 on \[0,α\],  k(s−α) on (α,1−α),  1−β on \[1−α,1\],
//! with slope k = (1−β)/(1−2α), and H = {(s,t) : ψ(s) ≤ t ≤ ψ(s)+β}.
//! The horizontal slice length L(t), the density f_T = (1−L)/(1−β) and its
//! CDF F_T are exact piecewise polynomials. The copula density is
//!   c(u,v) = 1/((1−β) f_T(F_T⁻¹(v))) · 1{(u, F_T⁻¹(v)) ∉ H},
//! and the conditional CDF follows from slice geometry:
//!   ∂₁C(u,v) = (T − |\[0,T\] ∩ \[ψ(u), ψ(u)+β\]|)/(1−β) with T = F_T⁻¹(v).

use serde::Serialize;

use crate::gridcop::{MeasureReport, Method};
use crate::numerics::{integrate_1d, Interval, PiecewisePoly};
use crate::{Error, Result};

/// Default absolute tolerance of [`StripCopula::measures`].
pub const DEFAULT_STRIP_TOL: f64 = 1e-4;

/// Tolerance of the F_T⁻¹ inversion.
const QUANTILE_TOL: f64 = 1e-12;

/// Build-time tolerance on the strip-mass and density-normalization checks.
const BUILD_TOL: f64 = 1e-10;

/// Parameters on the one-parameter path through (α, β) space:
/// α(μ) = (3/20)μ for μ ≤ 2 and ½ − 2/(5μ) beyond, β(μ) = ¼·min(μ, 2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathParams {
    pub mu: f64,
    pub alpha: f64,
    pub beta: f64,
}

pub fn path_params(mu: f64) -> Result<PathParams> {
    if mu.is_nan() || mu < 0.0 {
        return Err(Error::Domain(format!("path requires μ ≥ 0, got {mu}")));
    }
    let alpha = if mu <= 2.0 {
        3.0 / 20.0 * mu
    } else {
        0.5 - 2.0 / (5.0 * mu)
    };
    let beta = 0.25 * mu.min(2.0);
    Ok(PathParams { mu, alpha, beta })
}

/// A built member of the family with its piecewise components.
#[derive(Debug, Clone)]
pub struct StripCopula {
    alpha: f64,
    beta: f64,
    /// band slope (1−β)/(1−2α)
    slope: f64,
    psi_s: PiecewisePoly,
    l_t: PiecewisePoly,
    f_t: PiecewisePoly,
    big_f_t: PiecewisePoly,
}

impl StripCopula {
    pub fn build(alpha: f64, beta: f64) -> Result<Self> {
        if !(0.0..0.5).contains(&alpha) {
            return Err(Error::Domain(format!("alpha = {alpha} outside [0, 1/2)")));
        }
        if !(0.0..=0.5).contains(&beta) {
            return Err(Error::Domain(format!("beta = {beta} outside [0, 1/2]")));
        }
        let k = (1.0 - beta) / (1.0 - 2.0 * alpha);

        let psi_s = if alpha > 0.0 {
            PiecewisePoly::new(
                vec![0.0, alpha, 1.0 - alpha, 1.0],
                vec![
                    [0.0, 0.0, 0.0, 0.0],
                    [0.0, k, 0.0, 0.0],
                    [1.0 - beta, 0.0, 0.0, 0.0],
                ],
            )?
        } else {
            PiecewisePoly::new(vec![0.0, 1.0], vec![[0.0, k, 0.0, 0.0]])?
        };

        // L(t) = α·1{t≤β} + α·1{t≥1−β} + (1/k)·|[t−β, t] ∩ [0, 1−β]|,
        // piecewise linear with breakpoints at β and 1−β
        let l_t = if beta == 0.0 {
            PiecewisePoly::new(vec![0.0, 1.0], vec![[0.0, 0.0, 0.0, 0.0]])?
        } else if beta < 0.5 {
            PiecewisePoly::new(
                vec![0.0, beta, 1.0 - beta, 1.0],
                vec![
                    [alpha, 1.0 / k, 0.0, 0.0],
                    [beta / k, 0.0, 0.0, 0.0],
                    [alpha + beta / k, -1.0 / k, 0.0, 0.0],
                ],
            )?
        } else {
            PiecewisePoly::new(
                vec![0.0, 0.5, 1.0],
                vec![[alpha, 1.0 / k, 0.0, 0.0], [alpha + 0.5 / k, -1.0 / k, 0.0, 0.0]],
            )?
        };

        let strip_mass = l_t.definite_integral(0.0, 1.0);
        if (strip_mass - beta).abs() > BUILD_TOL {
            return Err(Error::Construction(format!(
                "strip mass ∫L = {strip_mass} differs from β = {beta}"
            )));
        }

        // f_T = (1 − L)/(1 − β) on the same breakpoints
        let breaks = l_t.breakpoints().to_vec();
        let mut coeffs = Vec::new();
        for w in breaks.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let third = (hi - lo) / 3.0;
            let y1 = (1.0 - l_t.eval(lo + third)) / (1.0 - beta);
            let y2 = (1.0 - l_t.eval(lo + 2.0 * third)) / (1.0 - beta);
            let b = (y2 - y1) / third;
            let a = y1 - b * third;
            coeffs.push([a, b, 0.0, 0.0]);
        }
        let f_t = PiecewisePoly::new(breaks, coeffs)?;
        for w in f_t.breakpoints().to_vec().windows(2) {
            let eps = (w[1] - w[0]) * 1e-9;
            if f_t.eval(w[0] + eps) < -1e-9 || f_t.eval(w[1] - eps) < -1e-9 {
                return Err(Error::Construction(format!(
                    "f_T negative on piece [{}, {}]",
                    w[0], w[1]
                )));
            }
        }

        let big_f_t = f_t.antiderivative();
        let total = big_f_t.eval(1.0);
        if (total - 1.0).abs() > BUILD_TOL {
            return Err(Error::Construction(format!(
                "f_T integrates to {total}, expected 1"
            )));
        }

        Ok(Self {
            alpha,
            beta,
            slope: k,
            psi_s,
            l_t,
            f_t,
            big_f_t,
        })
    }

    /// Member of the one-parameter path C_μ.
    pub fn from_path(mu: f64) -> Result<Self> {
        let p = path_params(mu)?;
        Self::build(p.alpha, p.beta)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn slope(&self) -> f64 {
        self.slope
    }

    /// Piecewise-polynomial form of the band's lower boundary.
    pub fn psi_poly(&self) -> &PiecewisePoly {
        &self.psi_s
    }

    /// Lower boundary ψ(s) of the band.
    pub fn psi_lower(&self, s: f64) -> f64 {
        if s <= self.alpha {
            0.0
        } else if s < 1.0 - self.alpha {
            self.slope * (s - self.alpha)
        } else {
            1.0 - self.beta
        }
    }

    /// Horizontal slice length L(t) of the band.
    pub fn slice_length(&self, t: f64) -> f64 {
        self.l_t.eval(t)
    }

    pub fn f_t(&self, t: f64) -> f64 {
        self.f_t.eval(t).max(0.0)
    }

    pub fn cdf_t(&self, t: f64) -> f64 {
        self.big_f_t.eval(t).clamp(0.0, 1.0)
    }

    /// F_T⁻¹ by piece lookup and bracketed bisection.
    pub fn quantile_t(&self, v: f64) -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        if v >= 1.0 {
            return 1.0;
        }
        self.big_f_t
            .invert_monotone(v, QUANTILE_TOL)
            .expect("F_T is monotone on [0,1]")
    }

    /// Membership in the zero-density band H.
    pub fn in_h(&self, s: f64, t: f64) -> bool {
        let p = self.psi_lower(s);
        p <= t && t <= p + self.beta
    }

    /// Copula density c(u,v). Fibers with f_T(F_T⁻¹(v)) = 0 form a null set
    /// and return 0.
    pub fn density(&self, u: f64, v: f64) -> f64 {
        let t = self.quantile_t(v);
        if self.in_h(u, t) {
            return 0.0;
        }
        let ft = self.f_t(t);
        if ft <= 1e-14 {
            return 0.0;
        }
        1.0 / ((1.0 - self.beta) * ft)
    }

    /// Overlap |[0,T] ∩ [p, p+β]| of the vertical band slice with [0,T].
    fn band_overlap(&self, p: f64, t_cap: f64) -> f64 {
        (t_cap.min(p + self.beta) - p).max(0.0)
    }

    /// Conditional CDF ∂₁C(u,v) from slice geometry.
    pub fn partial(&self, u: f64, v: f64) -> f64 {
        let t_cap = self.quantile_t(v);
        let ov = self.band_overlap(self.psi_lower(u), t_cap);
        ((t_cap - ov) / (1.0 - self.beta)).clamp(0.0, 1.0)
    }

    /// Affine pieces of u ↦ ∂₁C(u, ·) at fixed T = F_T⁻¹(v): returns
    /// (u_lo, u_hi, h_lo, h_hi) per piece. Breakpoints are the band corners
    /// and the points where ψ(u) crosses T−β and T.
    fn h_pieces(&self, t_cap: f64) -> Vec<(f64, f64, f64, f64)> {
        let mut cuts = vec![0.0, 1.0];
        if self.alpha > 0.0 {
            cuts.push(self.alpha);
            cuts.push(1.0 - self.alpha);
        }
        for val in [t_cap - self.beta, t_cap] {
            if val > 0.0 && val < 1.0 - self.beta {
                let u = self.alpha + val / self.slope;
                if u > 0.0 && u < 1.0 {
                    cuts.push(u);
                }
            }
        }
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-15);
        let h_at = |u: f64| -> f64 {
            let ov = self.band_overlap(self.psi_lower(u), t_cap);
            (t_cap - ov) / (1.0 - self.beta)
        };
        let mut pieces = Vec::with_capacity(cuts.len() - 1);
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let width = hi - lo;
            if width <= 0.0 {
                continue;
            }
            // sample two interior points to recover the affine piece without
            // touching ambiguous boundary values
            let y1 = h_at(lo + width / 3.0);
            let y2 = h_at(lo + 2.0 * width / 3.0);
            let b = (y2 - y1) * 3.0 / width;
            let h_lo = y1 - b * width / 3.0;
            let h_hi = h_lo + b * width;
            pieces.push((lo, hi, h_lo, h_hi));
        }
        pieces
    }

    /// Exact ∫₀¹ ∂₁C(u,·)² du at fixed T.
    fn inner_square(&self, t_cap: f64) -> f64 {
        self.h_pieces(t_cap)
            .iter()
            .map(|&(lo, hi, a, b)| (hi - lo) / 3.0 * (a * a + a * b + b * b))
            .sum()
    }

    /// Exact ∫₀^upto ∂₁C(u,·) du at fixed T.
    fn inner_linear(&self, t_cap: f64, upto: f64) -> f64 {
        let mut acc = 0.0;
        for (lo, hi, a, b) in self.h_pieces(t_cap) {
            if lo >= upto {
                break;
            }
            let hi_c = hi.min(upto);
            let frac_hi = (hi_c - lo) / (hi - lo);
            let b_c = a + (b - a) * frac_hi;
            acc += (hi_c - lo) * (a + b_c) / 2.0;
        }
        acc
    }

    /// (ξ, ψ) by adaptive quadrature over v with exact inner integrals over
    /// the first argument; absolute error of each measure at most `tol`.
    pub fn measures(&self, tol: f64) -> Result<MeasureReport> {
        let split = [
            0.0,
            self.cdf_t(self.beta).clamp(0.0, 1.0),
            self.cdf_t(1.0 - self.beta).clamp(0.0, 1.0),
            1.0,
        ];
        let mut xi_int = 0.0;
        let mut psi_int = 0.0;
        for w in split.windows(2) {
            if w[1] - w[0] <= 1e-14 {
                continue;
            }
            let iv = Interval::new(w[0], w[1])?;
            xi_int += integrate_1d(
                |v| self.inner_square(self.quantile_t(v)),
                iv,
                tol / 18.0,
            )?;
            psi_int += integrate_1d(
                |v| self.inner_linear(self.quantile_t(v), v),
                iv,
                tol / 18.0,
            )?;
        }
        Ok(MeasureReport {
            xi: 6.0 * xi_int - 2.0,
            psi: 6.0 * psi_int - 2.0,
            tau: None,
            method: Method::Quadrature,
            n_or_tol: tol,
        })
    }
}
