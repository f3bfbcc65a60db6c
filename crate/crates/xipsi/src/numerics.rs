//! Shared numerical kernels: adaptive quadrature, bracketed root finding,
//! standard-normal functions, and the two Euclidean projections used by the
//! feasible-set projection of the convex program.

use crate::{Error, Result};

/// A finite interval with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Domain(format!(
                "interval requires finite lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Maximum bisection depth of the adaptive Simpson rule.
const MAX_SIMPSON_DEPTH: u32 = 40;

/// Initial panel count of the adaptive rule. Starting from several panels
/// guards against integrands that coincide with a single cubic at the
/// dyadic nodes of the whole interval (Simpson is exact on cubics, so such
/// an integrand would be accepted unrefined).
const SIMPSON_PANELS: usize = 10;

/// Adaptive Simpson quadrature of `f` over `iv` with absolute tolerance
/// `abs_tol`. Each initial panel is bisected until the local Richardson
/// estimate of the error is below the local tolerance budget; the standard
/// fifteenth of the two-level difference is used both as the acceptance test
/// and as the extrapolation correction.
pub fn integrate_1d<F: Fn(f64) -> f64>(f: F, iv: Interval, abs_tol: f64) -> Result<f64> {
    assert!(abs_tol > 0.0, "abs_tol must be positive");
    let mut unresolved = 0.0;
    let mut value = 0.0;
    let panel_tol = abs_tol / SIMPSON_PANELS as f64;
    for k in 0..SIMPSON_PANELS {
        let a = iv.lo + iv.width() * k as f64 / SIMPSON_PANELS as f64;
        let b = iv.lo + iv.width() * (k + 1) as f64 / SIMPSON_PANELS as f64;
        let m = 0.5 * (a + b);
        let (fa, fm, fb) = (f(a), f(m), f(b));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        value += simpson_step(
            &f,
            a,
            b,
            fa,
            fm,
            fb,
            whole,
            panel_tol,
            MAX_SIMPSON_DEPTH,
            &mut unresolved,
        );
    }
    if unresolved > abs_tol {
        Err(Error::QuadratureNonConvergence {
            best: value,
            achieved: unresolved,
            requested: abs_tol,
        })
    } else {
        Ok(value)
    }
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    unresolved: &mut f64,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol || depth == 0 {
        if depth == 0 && delta.abs() > 15.0 * tol {
            *unresolved += delta.abs() / 15.0;
        }
        left + right + delta / 15.0
    } else {
        simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, unresolved)
            + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, unresolved)
    }
}

/// Bisection on a bracketing interval. Requires a sign change (or a zero at an
/// endpoint); runs until the bracket width is below `abs_tol`.
pub fn find_root_bracketed<F: Fn(f64) -> f64>(f: F, iv: Interval, abs_tol: f64) -> Result<f64> {
    assert!(abs_tol > 0.0, "abs_tol must be positive");
    let (mut lo, mut hi) = (iv.lo, iv.hi);
    let (flo, fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo * fhi > 0.0 {
        return Err(Error::NotBracketed {
            lo,
            hi,
            flo,
            fhi,
        });
    }
    let mut flo = flo;
    while hi - lo > abs_tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // bracket at floating point resolution
        }
        let fmid = f(mid);
        if fmid == 0.0 {
            return Ok(mid);
        }
        if flo * fmid < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = fmid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Standard normal CDF Φ, accurate to well below 1e-10 absolute.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal quantile Φ⁻¹ on (0,1).
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if p.is_nan() || p <= 0.0 || p >= 1.0 {
        return Err(Error::Domain(format!("quantile requires p in (0,1), got {p}")));
    }
    Ok(-std::f64::consts::SQRT_2 * statrs::function::erf::erfc_inv(2.0 * p))
}

/// Tolerance of the bisection on the clip shift in [`project_capped_simplex`].
const CAPPED_SIMPLEX_TOL: f64 = 1e-12;

/// Euclidean projection of `x` onto `{y : 0 ≤ yᵢ ≤ 1, mean(y) = target_mean}`,
/// computed by bisection on the shift λ in `yᵢ = clip(xᵢ + λ, 0, 1)`.
pub fn project_capped_simplex(x: &[f64], target_mean: f64) -> Vec<f64> {
    assert!(
        (0.0..=1.0).contains(&target_mean),
        "target mean {target_mean} outside [0,1]"
    );
    if x.is_empty() {
        return Vec::new();
    }
    let n = x.len() as f64;
    let mean_at = |lambda: f64| -> f64 {
        x.iter().map(|&v| (v + lambda).clamp(0.0, 1.0)).sum::<f64>() / n
    };
    let max = x.iter().cloned().fold(f64::MIN, f64::max);
    let min = x.iter().cloned().fold(f64::MAX, f64::min);
    // mean_at(lo) = 0 <= target, mean_at(hi) = 1 >= target
    let mut lo = -max;
    let mut hi = 1.0 - min;
    for _ in 0..200 {
        if hi - lo <= CAPPED_SIMPLEX_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mean_at(mid) < target_mean {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lambda = 0.5 * (lo + hi);
    x.iter().map(|&v| (v + lambda).clamp(0.0, 1.0)).collect()
}

/// Euclidean projection onto the non-decreasing cone `{y : y₁ ≤ … ≤ y_n}` by
/// pool-adjacent-violators.
pub fn isotonic_project(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut vals: Vec<f64> = Vec::with_capacity(n);
    let mut wts: Vec<usize> = Vec::with_capacity(n);
    for &v in x {
        vals.push(v);
        wts.push(1);
        while vals.len() > 1 && vals[vals.len() - 2] > vals[vals.len() - 1] {
            let (v2, w2) = (vals.pop().unwrap(), wts.pop().unwrap());
            let (v1, w1) = (vals.pop().unwrap(), wts.pop().unwrap());
            let w = w1 + w2;
            vals.push((v1 * w1 as f64 + v2 * w2 as f64) / w as f64);
            wts.push(w);
        }
    }
    let mut out = Vec::with_capacity(n);
    for (v, w) in vals.into_iter().zip(wts) {
        out.extend(std::iter::repeat_n(v, w));
    }
    out
}

/// Piecewise polynomial on `[breaks[0], breaks[last]]` with degree ≤ 3 pieces.
/// Piece `i` lives on `[breaks[i], breaks[i+1]]` and is evaluated in the local
/// coordinate `d = x − breaks[i]` as `c0 + c1 d + c2 d² + c3 d³`.
#[derive(Debug, Clone)]
pub struct PiecewisePoly {
    breaks: Vec<f64>,
    coeffs: Vec<[f64; 4]>,
}

impl PiecewisePoly {
    pub fn new(breaks: Vec<f64>, coeffs: Vec<[f64; 4]>) -> Result<Self> {
        if breaks.len() < 2 || coeffs.len() + 1 != breaks.len() {
            return Err(Error::Construction(format!(
                "piecewise poly needs k+1 breakpoints for k pieces, got {} and {}",
                breaks.len(),
                coeffs.len()
            )));
        }
        if breaks.windows(2).any(|w| w[0] >= w[1] || w[0].is_nan() || w[1].is_nan()) {
            return Err(Error::Construction(
                "piecewise poly breakpoints must be strictly ascending".into(),
            ));
        }
        Ok(Self { breaks, coeffs })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.breaks[0], *self.breaks.last().unwrap())
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breaks
    }

    fn piece_index(&self, x: f64) -> usize {
        match self
            .breaks
            .binary_search_by(|b| b.partial_cmp(&x).unwrap())
        {
            Ok(i) => i.min(self.coeffs.len() - 1),
            Err(0) => 0,
            Err(i) => (i - 1).min(self.coeffs.len() - 1),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (lo, hi) = self.domain();
        let x = x.clamp(lo, hi);
        let i = self.piece_index(x);
        let d = x - self.breaks[i];
        let c = self.coeffs[i];
        c[0] + d * (c[1] + d * (c[2] + d * c[3]))
    }

    /// Antiderivative with value 0 at the left end of the domain. Input pieces
    /// must be at most quadratic so the result stays within degree 3.
    pub fn antiderivative(&self) -> PiecewisePoly {
        assert!(
            self.coeffs.iter().all(|c| c[3] == 0.0),
            "antiderivative only supported for degree <= 2 pieces"
        );
        let mut acc = 0.0;
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs.push([acc, c[0], c[1] / 2.0, c[2] / 3.0]);
            let w = self.breaks[i + 1] - self.breaks[i];
            acc += w * (c[0] + w * (c[1] / 2.0 + w * c[2] / 3.0));
        }
        PiecewisePoly {
            breaks: self.breaks.clone(),
            coeffs,
        }
    }

    /// Definite integral over `[a, b] ∩ domain`.
    pub fn definite_integral(&self, a: f64, b: f64) -> f64 {
        let anti = self.antiderivative();
        anti.eval(b) - anti.eval(a)
    }

    /// Inverse of a non-decreasing piecewise polynomial: smallest x with
    /// `eval(x) = y`, located by piece lookup and bisection to `tol`.
    pub fn invert_monotone(&self, y: f64, tol: f64) -> Result<f64> {
        let (lo, hi) = self.domain();
        let (vlo, vhi) = (self.eval(lo), self.eval(hi));
        if y <= vlo {
            return Ok(lo);
        }
        if y >= vhi {
            return Ok(hi);
        }
        // find the first piece whose right endpoint value reaches y
        let mut i = 0;
        while i + 1 < self.breaks.len() && self.eval(self.breaks[i + 1]) < y {
            i += 1;
        }
        let iv = Interval::new(self.breaks[i], self.breaks[i + 1])?;
        find_root_bracketed(|x| self.eval(x) - y, iv, tol)
    }
}
