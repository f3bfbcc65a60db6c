//! Analytic copula families and their conditional-CDF fields ∂₁C, with
//! closed-form measures where available and grid evaluation otherwise.

use serde::{Deserialize, Serialize};

use crate::gridcop::{GridCopula, MeasureReport, Method};
use crate::numerics::{std_normal_cdf, std_normal_quantile};
use crate::{Error, Result};

/// Default grid size used when a family has no closed-form measures.
pub const DEFAULT_GRID_N: usize = 400;

// ---------------------------------------------------------------------------
// Fréchet mixtures
// ---------------------------------------------------------------------------

/// Convex combination w_pi·Π + w_m·M + w_w·W of the independence copula and
/// the two Fréchet bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrechetMixture {
    pub w_pi: f64,
    pub w_m: f64,
    pub w_w: f64,
}

impl FrechetMixture {
    pub fn new(w_pi: f64, w_m: f64, w_w: f64) -> Result<Self> {
        if w_pi < 0.0 || w_m < 0.0 || w_w < 0.0 {
            return Err(Error::InvalidFamily(
                "Fréchet mixture weights must be nonnegative".into(),
            ));
        }
        if (w_pi + w_m + w_w - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidFamily(format!(
                "Fréchet mixture weights must sum to 1, got {}",
                w_pi + w_m + w_w
            )));
        }
        Ok(Self { w_pi, w_m, w_w })
    }

    /// The upper-boundary family (1−α)Π + αM.
    pub fn upper(alpha: f64) -> Result<Self> {
        Self::new(1.0 - alpha, alpha, 0.0)
    }

    /// The stochastically decreasing rearrangement λΠ + (1−λ)W,
    /// parameterized by the weight on W.
    pub fn lower(w_w: f64) -> Result<Self> {
        Self::new(1.0 - w_w, 0.0, w_w)
    }

    /// ∂₁C(t,v) = w_pi·v + w_m·1{t ≤ v} + w_w·1{t > 1−v}.
    pub fn partial(&self, t: f64, v: f64) -> f64 {
        self.w_pi * v
            + self.w_m * f64::from(u8::from(t <= v))
            + self.w_w * f64::from(u8::from(t > 1.0 - v))
    }

    /// C(u,v) = w_pi·uv + w_m·min(u,v) + w_w·max(u+v−1, 0).
    pub fn cdf(&self, u: f64, v: f64) -> f64 {
        self.w_pi * u * v + self.w_m * u.min(v) + self.w_w * (u + v - 1.0).max(0.0)
    }

    /// Exact measures for the two-parameter edges of the simplex:
    /// (1−α)Π + αM has (ξ, ψ, τ) = (α², α, (α²+2α)/3) and
    /// λΠ + (1−λ)W has (ξ, ψ, τ) = (w², −w/2, −(w²+2w)/3) with w = 1−λ.
    /// Mixtures with both M and W weight fall back to grid evaluation.
    pub fn measures(&self) -> MeasureReport {
        if self.w_w == 0.0 {
            let a = self.w_m;
            MeasureReport::exact(a * a, a, Some((a * a + 2.0 * a) / 3.0))
        } else if self.w_m == 0.0 {
            let w = self.w_w;
            MeasureReport::exact(w * w, -w / 2.0, Some(-(w * w + 2.0 * w) / 3.0))
        } else {
            let g = GridCopula::from_partial(
                |t, v| self.partial(t, v),
                DEFAULT_GRID_N,
                None,
            )
            .expect("Fréchet mixture fields are always feasible");
            g.measures()
        }
    }
}

// ---------------------------------------------------------------------------
// Ordinal sums of Π
// ---------------------------------------------------------------------------

/// Ordinal sum filling the diagonal squares (a_k, b_k)² with rescaled
/// independence and the comonotone copula M outside. Attains ξ = ψ exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrdinalSumPi {
    intervals: Vec<(f64, f64)>,
}

impl OrdinalSumPi {
    /// Intervals must be ascending, disjoint and inside \[0,1\].
    pub fn new(intervals: Vec<(f64, f64)>) -> Result<Self> {
        let mut prev_end = 0.0;
        for &(a, b) in &intervals {
            if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) || a >= b {
                return Err(Error::InvalidFamily(format!(
                    "ordinal sum interval ({a}, {b}) is not a valid subinterval of (0,1)"
                )));
            }
            if a < prev_end {
                return Err(Error::InvalidFamily(format!(
                    "ordinal sum intervals overlap at ({a}, {b})"
                )));
            }
            prev_end = b;
        }
        Ok(Self { intervals })
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    fn square_containing(&self, t: f64, v: f64) -> Option<(f64, f64)> {
        self.intervals
            .iter()
            .copied()
            .find(|&(a, b)| t > a && t < b && v > a && v < b)
    }

    /// h(t,v): the Π slope (v−a_k)/(b_k−a_k) inside square k, 1{t ≤ v}
    /// elsewhere.
    pub fn partial(&self, t: f64, v: f64) -> f64 {
        match self.square_containing(t, v) {
            Some((a, b)) => (v - a) / (b - a),
            None => f64::from(u8::from(t <= v)),
        }
    }

    pub fn cdf(&self, u: f64, v: f64) -> f64 {
        match self.square_containing(u, v) {
            Some((a, b)) => a + (u - a) * (v - a) / (b - a),
            None => u.min(v),
        }
    }

    /// Exact ξ = ψ = τ = 1 − Σ (b_k − a_k)², by piecewise integration of the
    /// square structure.
    pub fn measures(&self) -> MeasureReport {
        let s: f64 = self
            .intervals
            .iter()
            .map(|&(a, b)| (b - a) * (b - a))
            .sum();
        MeasureReport::exact(1.0 - s, 1.0 - s, Some(1.0 - s))
    }
}

// ---------------------------------------------------------------------------
// Checkerboard copulas
// ---------------------------------------------------------------------------

/// n×n nonnegative mass matrix with uniform margins (every row and column
/// sums to 1/n); the associated copula is uniform on each cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckerboardMatrix {
    n: usize,
    /// row-major masses, rows indexed by u-cells and columns by v-cells
    delta: Vec<f64>,
}

const CHECKERBOARD_MARGIN_TOL: f64 = 1e-9;

impl CheckerboardMatrix {
    pub fn new(n: usize, delta: Vec<f64>) -> Result<Self> {
        if n == 0 || delta.len() != n * n {
            return Err(Error::InvalidFamily(format!(
                "checkerboard matrix must be {n}x{n}"
            )));
        }
        if delta.iter().any(|&d| d < -1e-15) {
            return Err(Error::InvalidFamily(
                "checkerboard masses must be nonnegative".into(),
            ));
        }
        let expect = 1.0 / n as f64;
        for r in 0..n {
            let row: f64 = (0..n).map(|c| delta[r * n + c]).sum();
            if (row - expect).abs() > CHECKERBOARD_MARGIN_TOL {
                return Err(Error::InvalidFamily(format!(
                    "checkerboard row {r} sums to {row}, expected {expect}"
                )));
            }
        }
        for c in 0..n {
            let col: f64 = (0..n).map(|r| delta[r * n + c]).sum();
            if (col - expect).abs() > CHECKERBOARD_MARGIN_TOL {
                return Err(Error::InvalidFamily(format!(
                    "checkerboard column {c} sums to {col}, expected {expect}"
                )));
            }
        }
        Ok(Self { n, delta })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidFamily("checkerboard matrix must be square".into()));
        }
        Self::new(n, rows.into_iter().flatten().collect())
    }

    /// The 2×2 checkerboard with all mass on the off-diagonal cells, the
    /// unique ξ-minimizer among copulas with ψ = −½.
    pub fn hash_minimizer() -> Self {
        Self::new(2, vec![0.0, 0.5, 0.5, 0.0]).unwrap()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mass(&self, r: usize, c: usize) -> f64 {
        self.delta[r * self.n + c]
    }

    /// Coarsens a copula CDF to the m×m checkerboard of its cell masses.
    pub fn coarsen_cdf<F: Fn(f64, f64) -> f64>(cdf: F, m: usize) -> Result<Self> {
        let g = |k: usize| k as f64 / m as f64;
        let mut delta = vec![0.0; m * m];
        for r in 0..m {
            for c in 0..m {
                delta[r * m + c] = (cdf(g(r + 1), g(c + 1)) - cdf(g(r), g(c + 1))
                    - cdf(g(r + 1), g(c))
                    + cdf(g(r), g(c)))
                .max(0.0);
            }
        }
        Self::new(m, delta)
    }

    /// Exact (ξ, ψ): within each cell row h is affine in v and piecewise
    /// constant in t, so both double integrals reduce to closed-form sums of
    /// per-cell polynomial integrals. With P the exclusive prefix sums of the
    /// mass rows:
    ///   ξ = Σ_{r,c} (6P² + 6PΔ + 2Δ²) − 2
    ///   ψ = (6/n) Σ_r [ P_rr/2 + Δ_rr/3 + Σ_{c>r} (P_rc + Δ_rc/2) ] − 2
    pub fn measures(&self) -> MeasureReport {
        let n = self.n;
        let mut xi_sum = 0.0;
        let mut psi_sum = 0.0;
        for r in 0..n {
            let mut prefix = 0.0;
            let mut psi_row = 0.0;
            for c in 0..n {
                let d = self.delta[r * n + c];
                xi_sum += 6.0 * prefix * prefix + 6.0 * prefix * d + 2.0 * d * d;
                if c == r {
                    psi_row += prefix / 2.0 + d / 3.0;
                } else if c > r {
                    psi_row += prefix + d / 2.0;
                }
                prefix += d;
            }
            psi_sum += psi_row;
        }
        MeasureReport::exact(xi_sum - 2.0, 6.0 * psi_sum / n as f64 - 2.0, None)
    }
}

// ---------------------------------------------------------------------------
// The C↘ family behind the Jensen lower bound
// ---------------------------------------------------------------------------

/// The pseudo-copula family C↘_μ, defined through its first partial
/// derivative h_μ(t,v) = h₁(v)·1{t ≤ v} + h₂(v)·1{t > v}. Not a copula (h is
/// not monotone in v across the diagonal), but ξ and ψ extend naturally and
/// have closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CDownMu {
    pub mu: f64,
}

impl CDownMu {
    pub fn new(mu: f64) -> Result<Self> {
        if !(0.0..=2.0).contains(&mu) {
            return Err(Error::Domain(format!("C↘ requires μ in [0,2], got {mu}")));
        }
        Ok(Self { mu })
    }

    pub fn v0(&self) -> f64 {
        self.mu / (2.0 + self.mu)
    }

    pub fn v1(&self) -> f64 {
        2.0 / (2.0 + self.mu)
    }

    /// The pair (h₁(v), h₂(v)) on its three v-regimes.
    pub fn h_pair(&self, v: f64) -> (f64, f64) {
        let mu = self.mu;
        if v <= self.v0() {
            (0.0, v / (1.0 - v))
        } else if v <= self.v1() {
            (v - mu / 2.0 * (1.0 - v), v + mu / 2.0 * v)
        } else {
            (2.0 - 1.0 / v, 1.0)
        }
    }

    pub fn partial(&self, t: f64, v: f64) -> f64 {
        let (h1, h2) = self.h_pair(v);
        if t <= v {
            h1
        } else {
            h2
        }
    }

    /// Closed forms with v₁ = 2/(2+μ):
    ///   ψ = −2v₁² + 6v₁ − 5 + 1/v₁
    ///   ξ = −4v₁² + 20v₁ − 17 + 2/v₁ − 1/v₁² − 12 ln v₁
    pub fn measures(&self) -> MeasureReport {
        let v1 = self.v1();
        let psi = -2.0 * v1 * v1 + 6.0 * v1 - 5.0 + 1.0 / v1;
        let xi =
            -4.0 * v1 * v1 + 20.0 * v1 - 17.0 + 2.0 / v1 - 1.0 / (v1 * v1) - 12.0 * v1.ln();
        MeasureReport::exact(xi, psi, None)
    }
}

/// Convenience wrapper returning the closed-form measures of C↘_μ.
pub fn cdown_measures(mu: f64) -> Result<MeasureReport> {
    Ok(CDownMu::new(mu)?.measures())
}

// ---------------------------------------------------------------------------
// The ξ = ψ equality class in the SI family
// ---------------------------------------------------------------------------

/// SI copulas with h_v(t) = 1{t < A(v)} + α(v)·1{A(v) < t < B(v)} for
/// non-decreasing A, B with A(v) ≤ v ≤ B(v); the class attaining ξ = ψ.
/// α(v) = (v − A(v))/(B(v) − A(v)) is forced by the column-mean constraint.
pub struct EqualityClassCopula {
    a: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    b: Box<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl EqualityClassCopula {
    pub fn new<A, B>(a: A, b: B) -> Result<Self>
    where
        A: Fn(f64) -> f64 + Send + Sync + 'static,
        B: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let this = Self {
            a: Box::new(a),
            b: Box::new(b),
        };
        let samples = 1001;
        let mut prev_a = f64::NEG_INFINITY;
        let mut prev_b = f64::NEG_INFINITY;
        for k in 0..samples {
            let v = k as f64 / (samples - 1) as f64;
            let (av, bv) = ((this.a)(v), (this.b)(v));
            if !(0.0..=1.0).contains(&av) || !(0.0..=1.0).contains(&bv) {
                return Err(Error::InvalidFamily(format!(
                    "A({v}) = {av} or B({v}) = {bv} outside [0,1]"
                )));
            }
            if av > v + 1e-12 || bv < v - 1e-12 {
                return Err(Error::InvalidFamily(format!(
                    "A(v) <= v <= B(v) violated at v = {v}: A = {av}, B = {bv}"
                )));
            }
            if av < prev_a - 1e-12 || bv < prev_b - 1e-12 {
                return Err(Error::InvalidFamily(format!(
                    "A or B decreases at v = {v}"
                )));
            }
            prev_a = av;
            prev_b = bv;
        }
        Ok(this)
    }

    pub fn alpha(&self, v: f64) -> f64 {
        let (a, b) = ((self.a)(v), (self.b)(v));
        if b > a {
            ((v - a) / (b - a)).clamp(0.0, 1.0)
        } else {
            0.0
        }
    }

    pub fn partial(&self, t: f64, v: f64) -> f64 {
        let (a, b) = ((self.a)(v), (self.b)(v));
        if t < a {
            1.0
        } else if t > a && t < b {
            self.alpha(v)
        } else {
            0.0
        }
    }

    /// Grid evaluation of (ξ, ψ); the class satisfies |ξ − ψ| ≤ 6/n at grid
    /// resolution n.
    pub fn check(&self, n: usize) -> Result<(f64, f64)> {
        let g = GridCopula::from_partial(|t, v| self.partial(t, v), n, None)?;
        Ok((g.xi(), g.psi()))
    }
}

// ---------------------------------------------------------------------------
// Parametric families
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParametricFamily {
    Gaussian,
    Clayton,
    Frank,
    Gumbel,
    Joe,
}

impl ParametricFamily {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Gaussian => "gaussian",
            Self::Clayton => "clayton",
            Self::Frank => "frank",
            Self::Gumbel => "gumbel",
            Self::Joe => "joe",
        }
    }

    fn theta_valid(&self, theta: f64) -> bool {
        match self {
            Self::Gaussian => theta > -1.0 && theta < 1.0,
            Self::Clayton => theta > -1.0 && theta != 0.0,
            Self::Frank => theta != 0.0 && theta.is_finite(),
            Self::Gumbel | Self::Joe => theta >= 1.0,
        }
    }
}

/// A one-parameter copula family member with analytic conditional CDF.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParametricCopula {
    pub family: ParametricFamily,
    pub theta: f64,
}

impl ParametricCopula {
    pub fn new(family: ParametricFamily, theta: f64) -> Result<Self> {
        if !family.theta_valid(theta) {
            return Err(Error::Domain(format!(
                "theta = {theta} outside the admissible range of the {} family",
                family.name()
            )));
        }
        Ok(Self { family, theta })
    }

    /// Conditional CDF ∂₁C(t,v) of V given U = t.
    pub fn partial(&self, t: f64, v: f64) -> f64 {
        let th = self.theta;
        match self.family {
            ParametricFamily::Gaussian => {
                let zt = std_normal_quantile(t).expect("t in (0,1)");
                let zv = std_normal_quantile(v).expect("v in (0,1)");
                std_normal_cdf((zv - th * zt) / (1.0 - th * th).sqrt())
            }
            ParametricFamily::Clayton => {
                // h = t^(−θ−1)·(t^−θ + v^−θ − 1)^(−1/θ−1)
                let (a, b) = (-th * t.ln(), -th * v.ln());
                if a.max(b) > 700.0 {
                    // rescale by e^max to keep t^−θ + v^−θ − 1 representable
                    let m = a.max(b);
                    let log_base = m
                        + (f64::exp(a - m) + f64::exp(b - m) - f64::exp(-m)).ln();
                    return f64::exp(-(th + 1.0) * t.ln() + (-1.0 / th - 1.0) * log_base)
                        .clamp(0.0, 1.0);
                }
                // common range: keep the base as 1 + s via expm1/ln_1p for
                // stability near θ = 0
                let s = f64::exp_m1(a) + f64::exp_m1(b);
                if 1.0 + s <= 0.0 {
                    return 0.0;
                }
                f64::exp(-(th + 1.0) * t.ln() + (-1.0 / th - 1.0) * f64::ln_1p(s))
            }
            ParametricFamily::Frank => {
                let num = f64::exp(-th * t) * f64::exp_m1(-th * v);
                let den = f64::exp_m1(-th) + f64::exp_m1(-th * t) * f64::exp_m1(-th * v);
                (num / den).clamp(0.0, 1.0)
            }
            ParametricFamily::Gumbel => {
                if th == 1.0 {
                    return v;
                }
                let lt = -t.ln();
                let lv = -v.ln();
                let x = lt.powf(th) + lv.powf(th);
                let xr = x.powf(1.0 / th);
                (f64::exp(-xr) * x.powf(1.0 / th - 1.0) * lt.powf(th - 1.0) / t).clamp(0.0, 1.0)
            }
            ParametricFamily::Joe => {
                if th == 1.0 {
                    return v;
                }
                let x = (1.0 - t).powf(th);
                let y = (1.0 - v).powf(th);
                let a = x + y - x * y;
                (a.powf(1.0 / th - 1.0) * (1.0 - t).powf(th - 1.0) * (1.0 - y)).clamp(0.0, 1.0)
            }
        }
    }

    /// Copula CDF, available in closed form for the Archimedean families.
    /// Returns `None` for the Gaussian family.
    pub fn cdf(&self, u: f64, v: f64) -> Option<f64> {
        let th = self.theta;
        match self.family {
            ParametricFamily::Gaussian => None,
            ParametricFamily::Clayton => {
                let s = f64::exp_m1(-th * u.ln()) + f64::exp_m1(-th * v.ln());
                if 1.0 + s <= 0.0 {
                    Some(0.0)
                } else {
                    Some(f64::exp(-1.0 / th * f64::ln_1p(s)))
                }
            }
            ParametricFamily::Frank => Some(
                -1.0 / th
                    * f64::ln_1p(f64::exp_m1(-th * u) * f64::exp_m1(-th * v) / f64::exp_m1(-th)),
            ),
            ParametricFamily::Gumbel => {
                let x = (-u.ln()).powf(th) + (-v.ln()).powf(th);
                Some(f64::exp(-x.powf(1.0 / th)))
            }
            ParametricFamily::Joe => {
                let x = (1.0 - u).powf(th);
                let y = (1.0 - v).powf(th);
                Some(1.0 - (x + y - x * y).powf(1.0 / th))
            }
        }
    }

    /// Grid measures at resolution n.
    pub fn measures(&self, n: usize) -> Result<MeasureReport> {
        let g = GridCopula::from_partial(|t, v| self.partial(t, v), n, None)?;
        let mut m = g.measures();
        // closed forms are available for the Gaussian family
        if self.family == ParametricFamily::Gaussian {
            m.xi = gaussian_xi(self.theta);
            m.psi = gaussian_psi(self.theta);
            m.method = Method::Exact;
            m.n_or_tol = 0.0;
        }
        Ok(m)
    }
}

/// ξ of the Gaussian copula: (3/π)·asin((1+θ²)/2) − ½.
pub fn gaussian_xi(theta: f64) -> f64 {
    3.0 / std::f64::consts::PI * ((1.0 + theta * theta) / 2.0).asin() - 0.5
}

/// ψ of the Gaussian copula: (3/π)·asin((1+θ)/2) − ½.
pub fn gaussian_psi(theta: f64) -> f64 {
    3.0 / std::f64::consts::PI * ((1.0 + theta) / 2.0).asin() - 0.5
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridcop::GridCopula;
    use crate::numerics::{integrate_1d, Interval};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn frechet_partial_examples() {
        let w = FrechetMixture::new(0.5, 0.5, 0.0).unwrap();
        assert_eq!(w.partial(0.2, 0.5), 0.75);
        let pi = FrechetMixture::new(1.0, 0.0, 0.0).unwrap();
        assert_eq!(pi.partial(0.123, 0.5), 0.5);
        let mw = FrechetMixture::new(0.75, 0.0, 0.25).unwrap();
        assert_eq!(mw.partial(0.9, 0.5), 0.375 + 0.25);
    }

    #[test]
    fn frechet_measures_closed_forms() {
        let m = FrechetMixture::upper(0.5).unwrap().measures();
        assert_eq!((m.xi, m.psi), (0.25, 0.5));
        assert_eq!(m.method, Method::Exact);
        let w = FrechetMixture::lower(0.25).unwrap().measures();
        assert_eq!((w.xi, w.psi), (0.0625, -0.125));
        let pi = FrechetMixture::upper(0.0).unwrap().measures();
        assert_eq!((pi.xi, pi.psi), (0.0, 0.0));
    }

    #[test]
    fn frechet_three_way_falls_back_to_grid() {
        let m = FrechetMixture::new(0.4, 0.3, 0.3).unwrap().measures();
        assert_eq!(m.method, Method::Grid);
        // xi of the three-way mixture has the closed form
        // w_m² + w_w² + w_m·w_w/2 + cross terms; sanity-check range only
        assert!(m.xi > 0.0 && m.xi < 1.0);
    }

    #[test]
    fn frechet_weights_validated() {
        assert!(FrechetMixture::new(0.5, 0.6, 0.0).is_err());
        assert!(FrechetMixture::new(-0.1, 1.1, 0.0).is_err());
    }

    #[test]
    fn frechet_closed_forms_match_grid_sweep() {
        for k in 1..=9 {
            let a = k as f64 / 10.0;
            let upper = FrechetMixture::upper(a).unwrap();
            let g = GridCopula::from_partial(|t, v| upper.partial(t, v), 800, None).unwrap();
            let m = upper.measures();
            assert!((g.xi() - m.xi).abs() <= 5e-3, "upper alpha {a}");
            assert!((g.psi() - m.psi).abs() <= 5e-3, "upper alpha {a}");
            let lower = FrechetMixture::lower(a).unwrap();
            let g = GridCopula::from_partial(|t, v| lower.partial(t, v), 800, None).unwrap();
            let m = lower.measures();
            assert!((g.xi() - m.xi).abs() <= 5e-3, "lower w {a}");
            assert!((g.psi() - m.psi).abs() <= 5e-3, "lower w {a}");
        }
    }

    #[test]
    fn ordinal_sum_full_square_is_independence() {
        let os = OrdinalSumPi::new(vec![(0.0, 1.0)]).unwrap();
        let m = os.measures();
        assert_eq!((m.xi, m.psi), (0.0, 0.0));
    }

    #[test]
    fn ordinal_sum_empty_is_comonotone() {
        let os = OrdinalSumPi::new(vec![]).unwrap();
        let m = os.measures();
        assert_eq!((m.xi, m.psi), (1.0, 1.0));
    }

    #[test]
    fn ordinal_sum_half_square_vs_grid() {
        let os = OrdinalSumPi::new(vec![(0.0, 0.5)]).unwrap();
        let m = os.measures();
        assert_eq!(m.xi, m.psi);
        assert_eq!(m.xi, 0.75);
        let g = GridCopula::from_partial(|t, v| os.partial(t, v), 1000, None).unwrap();
        assert!((g.xi() - m.xi).abs() <= 5e-3, "grid xi {}", g.xi());
        assert!((g.psi() - m.psi).abs() <= 5e-3, "grid psi {}", g.psi());
    }

    #[test]
    fn ordinal_sum_rejects_overlap() {
        assert!(OrdinalSumPi::new(vec![(0.0, 0.5), (0.4, 0.8)]).is_err());
        assert!(OrdinalSumPi::new(vec![(0.5, 0.5)]).is_err());
    }

    #[test]
    fn checkerboard_hash() {
        let m = CheckerboardMatrix::hash_minimizer().measures();
        assert_eq!((m.xi, m.psi), (0.5, -0.5));
    }

    #[test]
    fn checkerboard_remark_matrix() {
        let d = 1.0 / 12.0;
        let cb = CheckerboardMatrix::from_rows(vec![
            vec![4.0 * d, 0.0, 0.0],
            vec![0.0, d, 3.0 * d],
            vec![0.0, 3.0 * d, d],
        ])
        .unwrap();
        let m = cb.measures();
        assert!((m.xi - 0.5).abs() <= 1e-12, "xi = {}", m.xi);
        assert!((m.psi - 1.0 / 3.0).abs() <= 1e-12, "psi = {}", m.psi);
    }

    #[test]
    fn checkerboard_uniform_is_independence() {
        let n = 5;
        let cb = CheckerboardMatrix::new(n, vec![1.0 / (n * n) as f64; n * n]).unwrap();
        let m = cb.measures();
        assert!(m.xi.abs() <= 1e-12 && m.psi.abs() <= 1e-12);
    }

    #[test]
    fn checkerboard_rejects_bad_margins() {
        assert!(CheckerboardMatrix::new(2, vec![0.5, 0.0, 0.0, 0.5]).is_ok());
        assert!(CheckerboardMatrix::new(2, vec![0.4, 0.0, 0.0, 0.5]).is_err());
        assert!(CheckerboardMatrix::new(2, vec![-0.1, 0.6, 0.6, -0.1]).is_err());
    }

    #[test]
    fn only_hash_reaches_minimal_footrule_among_2x2() {
        // 2x2 checkerboards form the family [[a, 1/2-a],[1/2-a, a]]; psi = -1/2
        // only at a = 0, which is the hash matrix.
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..1000 {
            let a: f64 = rng.gen_range(1e-6..0.5);
            let cb =
                CheckerboardMatrix::new(2, vec![a, 0.5 - a, 0.5 - a, a]).unwrap();
            assert!(cb.measures().psi > -0.5);
        }
    }

    #[test]
    fn coarsening_never_increases_xi() {
        // random Fréchet mixtures and ordinal sums, coarsened through their
        // exact CDFs; the checkerboard coarsening has xi no larger than the
        // original copula's
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let a: f64 = rng.gen_range(0.0..1.0);
            let fam = FrechetMixture::upper(a).unwrap();
            let m = rng.gen_range(2usize..6);
            let cb = CheckerboardMatrix::coarsen_cdf(|u, v| fam.cdf(u, v), m).unwrap();
            assert!(
                cb.measures().xi <= fam.measures().xi + 1e-9,
                "frechet alpha {a} m {m}"
            );
        }
        for _ in 0..500 {
            let lo: f64 = rng.gen_range(0.0..0.8);
            let hi: f64 = rng.gen_range(lo + 0.05..1.0);
            let os = OrdinalSumPi::new(vec![(lo, hi)]).unwrap();
            let m = rng.gen_range(2usize..6);
            let cb = CheckerboardMatrix::coarsen_cdf(|u, v| os.cdf(u, v), m).unwrap();
            assert!(
                cb.measures().xi <= os.measures().xi + 1e-9,
                "ordinal ({lo},{hi}) m {m}"
            );
        }
    }

    #[test]
    fn cdown_partial_branches() {
        let c = CDownMu::new(2.0).unwrap();
        assert_eq!(c.partial(0.1, 0.25), 0.0);
        assert!((c.partial(0.9, 0.25) - 1.0 / 3.0).abs() <= 1e-15);
        let c0 = CDownMu::new(0.0).unwrap();
        for &(t, v) in &[(0.1, 0.7), (0.8, 0.3), (0.5, 0.5)] {
            assert!((c0.partial(t, v) - v).abs() <= 1e-15);
        }
    }

    #[test]
    fn cdown_measure_endpoints() {
        let m0 = cdown_measures(0.0).unwrap();
        assert!(m0.xi.abs() <= 1e-12 && m0.psi.abs() <= 1e-12);
        let m2 = cdown_measures(2.0).unwrap();
        assert!((m2.psi + 0.5).abs() <= 1e-12);
        assert!((m2.xi - (12.0 * std::f64::consts::LN_2 - 8.0)).abs() <= 1e-12);
        assert!(cdown_measures(2.5).is_err());
        assert!(cdown_measures(-0.1).is_err());
    }

    #[test]
    fn cdown_closed_forms_against_quadrature() {
        // oracle: integrate the defining branch formulas directly
        for &mu in &[0.5, 1.0, 1.265, 1.646, 2.0] {
            let c = CDownMu::new(mu).unwrap();
            let xi_num = 6.0
                * integrate_1d(
                    |v| {
                        let (h1, h2) = c.h_pair(v);
                        v * h1 * h1 + (1.0 - v) * h2 * h2
                    },
                    Interval::new(0.0, 1.0).unwrap(),
                    1e-11,
                )
                .unwrap()
                - 2.0;
            let psi_num = 6.0
                * integrate_1d(
                    |v| v * c.h_pair(v).0,
                    Interval::new(0.0, 1.0).unwrap(),
                    1e-11,
                )
                .unwrap()
                - 2.0;
            let m = c.measures();
            assert!((m.xi - xi_num).abs() <= 1e-8, "mu {mu}: {} vs {xi_num}", m.xi);
            assert!((m.psi - psi_num).abs() <= 1e-8, "mu {mu}: {} vs {psi_num}", m.psi);
        }
        // frozen value at mu = 1 (v1 = 2/3): psi = -7/18,
        // xi = 12 ln(3/2) - 169/36 = 0.171136852853527
        let m1 = cdown_measures(1.0).unwrap();
        assert!((m1.psi + 7.0 / 18.0).abs() <= 1e-12);
        assert!((m1.xi - 0.171_136_852_853_527).abs() <= 1e-12, "xi = {}", m1.xi);
    }

    #[test]
    fn cdown_strict_monotonicity() {
        let mut prev = cdown_measures(0.0).unwrap();
        for k in 1..=200 {
            let mu = 2.0 * k as f64 / 200.0;
            let m = cdown_measures(mu).unwrap();
            assert!(m.psi < prev.psi, "psi not decreasing at mu = {mu}");
            assert!(m.xi > prev.xi, "xi not increasing at mu = {mu}");
            prev = m;
        }
    }

    #[test]
    fn cdown_grid_cross_check() {
        // the h field is not monotone in v, so bypass copula feasibility
        // only in the sense of using a generous tolerance; column means are
        // still exact by construction of the family
        for &mu in &[0.5, 1.0, 1.5, 2.0] {
            let c = CDownMu::new(mu).unwrap();
            let g = GridCopula::from_partial(|t, v| c.partial(t, v), 1000, Some(0.1)).unwrap();
            let m = c.measures();
            assert!((g.xi() - m.xi).abs() <= 5e-3, "mu {mu}: {} vs {}", g.xi(), m.xi);
            assert!((g.psi() - m.psi).abs() <= 5e-3, "mu {mu}: {} vs {}", g.psi(), m.psi);
        }
    }

    #[test]
    fn equality_class_limits() {
        // A = B = v is the comonotone copula
        let m = EqualityClassCopula::new(|v| v, |v| v).unwrap();
        let (xi, psi) = m.check(400).unwrap();
        assert!((xi - 1.0).abs() <= 6.0 / 400.0 + 3e-2);
        assert!((psi - 1.0).abs() <= 6.0 / 400.0 + 3e-2);
        // A = 0, B = 1 gives alpha(v) = v, the independence copula
        let pi = EqualityClassCopula::new(|_| 0.0, |_| 1.0).unwrap();
        let (xi, psi) = pi.check(400).unwrap();
        assert!(xi.abs() <= 0.01 && psi.abs() <= 0.01);
    }

    #[test]
    fn equality_class_asymmetric_example() {
        let c = EqualityClassCopula::new(|v| v / 2.0, |v| (v + 1.0) / 2.0).unwrap();
        for k in 0..=10 {
            let v = k as f64 / 10.0;
            assert!((c.alpha(v) - v).abs() <= 1e-12);
        }
        let (xi, psi) = c.check(500).unwrap();
        assert!((xi - psi).abs() <= 0.012, "|xi - psi| = {}", (xi - psi).abs());
        let g = GridCopula::from_partial(|t, v| c.partial(t, v), 200, None).unwrap();
        assert!(g.is_si(1e-12));
    }

    #[test]
    fn equality_class_rejects_invalid() {
        assert!(EqualityClassCopula::new(|v| v, |v| v / 2.0).is_err()); // B < v
        assert!(EqualityClassCopula::new(|v| 1.0 - v, |_| 1.0).is_err()); // A decreasing
    }

    #[test]
    fn parametric_ranges() {
        assert!(ParametricCopula::new(ParametricFamily::Gaussian, 1.0).is_err());
        assert!(ParametricCopula::new(ParametricFamily::Clayton, 0.0).is_err());
        assert!(ParametricCopula::new(ParametricFamily::Clayton, -0.5).is_ok());
        assert!(ParametricCopula::new(ParametricFamily::Gumbel, 0.9).is_err());
        assert!(ParametricCopula::new(ParametricFamily::Joe, 1.0).is_ok());
    }

    #[test]
    fn parametric_independence_limits() {
        // the normal cdf/quantile pair is accurate to ~1e-11, which bounds
        // the roundtrip error here
        let g = ParametricCopula::new(ParametricFamily::Gaussian, 0.0).unwrap();
        for &(t, v) in &[(0.3, 0.7), (0.5, 0.2), (0.9, 0.9)] {
            assert!((g.partial(t, v) - v).abs() <= 1e-10);
        }
        let c = ParametricCopula::new(ParametricFamily::Clayton, 1e-8).unwrap();
        assert!((c.partial(0.3, 0.7) - 0.7).abs() <= 1e-6);
    }

    #[test]
    fn clayton_extreme_theta_stays_finite() {
        // for strong dependence, conditioning on a tiny t pushes the whole
        // conditional mass below any fixed v: h -> 1; the naive formula
        // overflows to 0 here
        let c = ParametricCopula::new(ParametricFamily::Clayton, 50.0).unwrap();
        let h = c.partial(0.001, 0.5);
        assert!((h - 1.0).abs() <= 1e-9, "h = {h}");
        let c = ParametricCopula::new(ParametricFamily::Clayton, 200.0).unwrap();
        let h = c.partial(0.001, 0.9);
        assert!(h.is_finite() && (h - 1.0).abs() <= 1e-6, "h = {h}");
        // and conditioning near 1 leaves almost no mass below a small v
        let h = c.partial(0.999, 0.1);
        assert!(h.is_finite() && h.abs() <= 1e-6, "h = {h}");
    }

    #[test]
    fn archimedean_partials_match_cdf_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let members = [
            ParametricCopula::new(ParametricFamily::Clayton, 1.459).unwrap(),
            ParametricCopula::new(ParametricFamily::Clayton, -0.384).unwrap(),
            ParametricCopula::new(ParametricFamily::Frank, 4.5).unwrap(),
            ParametricCopula::new(ParametricFamily::Frank, -2.789).unwrap(),
            ParametricCopula::new(ParametricFamily::Gumbel, 1.781).unwrap(),
            ParametricCopula::new(ParametricFamily::Joe, 1.796).unwrap(),
        ];
        for c in members {
            for _ in 0..1000 {
                let t: f64 = rng.gen_range(0.02..0.98);
                let v: f64 = rng.gen_range(0.02..0.98);
                let e = 1e-6;
                let fd = (c.cdf(t + e, v).unwrap() - c.cdf(t - e, v).unwrap()) / (2.0 * e);
                assert!(
                    (fd - c.partial(t, v)).abs() <= 1e-6,
                    "{:?} theta {} at ({t},{v})",
                    c.family,
                    c.theta
                );
            }
        }
    }

    #[test]
    fn tau_grid_matches_known_closed_forms() {
        // independent anchors for the finite-difference tau pipeline:
        // gaussian tau = (2/pi) asin(theta), clayton tau = theta/(theta+2)
        let n = 400;
        let g = ParametricCopula::new(ParametricFamily::Gaussian, 0.614).unwrap();
        let grid = GridCopula::from_partial(|t, v| g.partial(t, v), n, None).unwrap();
        let expect = 2.0 / std::f64::consts::PI * 0.614f64.asin();
        assert!(
            (grid.tau() - expect).abs() <= 5.0 / n as f64,
            "gaussian tau {} vs {expect}",
            grid.tau()
        );
        let c = ParametricCopula::new(ParametricFamily::Clayton, 1.459).unwrap();
        let grid = GridCopula::from_partial(|t, v| c.partial(t, v), n, None).unwrap();
        let expect = 1.459 / (1.459 + 2.0);
        assert!(
            (grid.tau() - expect).abs() <= 5.0 / n as f64,
            "clayton tau {} vs {expect}",
            grid.tau()
        );
        // both members are SI, so the tau bound applies
        for grid in [&grid] {
            assert!(grid.xi() <= 0.75 * grid.tau() + 0.25 + 10.0 / n as f64);
        }
    }

    #[test]
    fn gaussian_table_row() {
        let c = ParametricCopula::new(ParametricFamily::Gaussian, 0.614).unwrap();
        let g = GridCopula::from_partial(|t, v| c.partial(t, v), 600, None).unwrap();
        assert!((g.xi() - 0.225).abs() <= 3e-3, "xi = {}", g.xi());
        assert!((g.psi() - 0.397).abs() <= 3e-3, "psi = {}", g.psi());
        // closed forms agree with the grid
        assert!((gaussian_xi(0.614) - g.xi()).abs() <= 3e-3);
        assert!((gaussian_psi(0.614) - g.psi()).abs() <= 3e-3);
    }
}
