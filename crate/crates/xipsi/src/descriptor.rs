//! JSON family descriptors shared by the CLI and the Python bindings, e.g.
//! `{"family":"frechet","w_pi":0.5,"w_m":0.5,"w_w":0}` or
//! `{"family":"strip","alpha":0.2,"beta":0.3}`.

use serde::{Deserialize, Serialize};

use crate::families::{
    CheckerboardMatrix, FrechetMixture, OrdinalSumPi, ParametricCopula, ParametricFamily,
};
use crate::gridcop::MeasureReport;
use crate::twoparam::StripCopula;
use crate::{families::CDownMu, Error, Result};

fn default_zero() -> f64 {
    0.0
}

/// Tagged family descriptor.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum Descriptor {
    Frechet {
        #[serde(default = "default_zero")]
        w_pi: f64,
        #[serde(default = "default_zero")]
        w_m: f64,
        #[serde(default = "default_zero")]
        w_w: f64,
    },
    OrdinalSum {
        intervals: Vec<(f64, f64)>,
    },
    Checkerboard {
        delta: Vec<Vec<f64>>,
    },
    Cdown {
        mu: f64,
    },
    Strip {
        alpha: f64,
        beta: f64,
    },
    StripPath {
        mu: f64,
    },
    Gaussian {
        theta: f64,
    },
    Clayton {
        theta: f64,
    },
    Frank {
        theta: f64,
    },
    Gumbel {
        theta: f64,
    },
    Joe {
        theta: f64,
    },
}

impl Descriptor {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(format!("bad family descriptor: {e}")))
    }

    /// Evaluates (ξ, ψ[, τ]) with the method appropriate to the family:
    /// closed forms where available, quadrature for the strip family with
    /// tolerance `quad_tol`, and an n×n grid otherwise.
    pub fn measures(&self, grid_n: usize, quad_tol: f64) -> Result<MeasureReport> {
        match self {
            Self::Frechet { w_pi, w_m, w_w } => {
                Ok(FrechetMixture::new(*w_pi, *w_m, *w_w)?.measures())
            }
            Self::OrdinalSum { intervals } => Ok(OrdinalSumPi::new(intervals.clone())?.measures()),
            Self::Checkerboard { delta } => {
                Ok(CheckerboardMatrix::from_rows(delta.clone())?.measures())
            }
            Self::Cdown { mu } => Ok(CDownMu::new(*mu)?.measures()),
            Self::Strip { alpha, beta } => StripCopula::build(*alpha, *beta)?.measures(quad_tol),
            Self::StripPath { mu } => StripCopula::from_path(*mu)?.measures(quad_tol),
            Self::Gaussian { theta } => {
                ParametricCopula::new(ParametricFamily::Gaussian, *theta)?.measures(grid_n)
            }
            Self::Clayton { theta } => {
                ParametricCopula::new(ParametricFamily::Clayton, *theta)?.measures(grid_n)
            }
            Self::Frank { theta } => {
                ParametricCopula::new(ParametricFamily::Frank, *theta)?.measures(grid_n)
            }
            Self::Gumbel { theta } => {
                ParametricCopula::new(ParametricFamily::Gumbel, *theta)?.measures(grid_n)
            }
            Self::Joe { theta } => {
                ParametricCopula::new(ParametricFamily::Joe, *theta)?.measures(grid_n)
            }
        }
    }
}
