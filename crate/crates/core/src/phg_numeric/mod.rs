//! Numerical oracles: push-forward integrals, expansion fits, the explicit
//! model ODE solution and Mellin convolution of model kernels.

pub mod fd;
pub mod fit;
pub mod oracles;
pub mod quadrature;

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

pub use fd::{apply_bop_numeric, fornberg_weights, BopApplication};
pub use fit::{
    compare_with_prediction, fit_expansion, FitOptions, PhgExpansion, PhgTerm, PredictionComparison,
};
pub use oracles::{
    chart_split, convolve, convolve_model_kernels, numeric_pushforward, solve_model_ode, ChartSplit,
};
pub use quadrature::{integrate, QuadResult, QuadratureSpec};

/// `C·r^k` for `k = 0..n`, decreasing towards the boundary `x = 0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeometricGrid {
    pub start: f64,
    pub ratio: f64,
    pub points: Vec<f64>,
}

impl GeometricGrid {
    pub const DEFAULT_RATIO: f64 = 0.8;
    pub const DEFAULT_POINTS: usize = 60;

    pub fn new(start: f64, ratio: f64, n: usize) -> Result<Self> {
        if !(start > 0.0 && ratio > 0.0 && ratio < 1.0 && n >= 2) {
            return Err(Error::Argument(
                "geometric grid needs C > 0, 0 < r < 1 and n ≥ 2".into(),
            ));
        }
        let points = (0..n).map(|k| start * ratio.powi(k as i32)).collect();
        Ok(GeometricGrid {
            start,
            ratio,
            points,
        })
    }

    /// The default grid `C · 0.8^k`, 60 points.
    pub fn standard(start: f64) -> Self {
        Self::new(start, Self::DEFAULT_RATIO, Self::DEFAULT_POINTS).expect("valid defaults")
    }
}

impl fmt::Display for GeometricGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "geometric grid {}·{}^k, {} points",
            self.start,
            self.ratio,
            self.points.len()
        )
    }
}

/// Real samples with per-point error estimates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sampled1D {
    pub x: Vec<f64>,
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    pub converged: Vec<bool>,
}

impl Sampled1D {
    /// Exact samples of a closed-form function.
    pub fn from_fn(x: &[f64], f: impl Fn(f64) -> f64) -> Self {
        let values: Vec<f64> = x.iter().map(|&t| f(t)).collect();
        Sampled1D {
            x: x.to_vec(),
            errors: vec![0.0; x.len()],
            converged: vec![true; x.len()],
            values,
        }
    }

    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|&c| c)
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// Complex samples, as produced by kernel and ODE oracles.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexSamples {
    pub x: Vec<f64>,
    pub values: Vec<Complex64>,
    pub errors: Vec<f64>,
}

impl ComplexSamples {
    /// Real parts; fails if some imaginary part exceeds `tol`.
    pub fn real_part(&self, tol: f64) -> Result<Sampled1D> {
        if let Some(z) = self.values.iter().find(|z| z.im.abs() > tol) {
            return Err(Error::Argument(format!(
                "samples are not real (imaginary part {:.3e})",
                z.im
            )));
        }
        Ok(Sampled1D {
            x: self.x.clone(),
            values: self.values.iter().map(|z| z.re).collect(),
            errors: self.errors.clone(),
            converged: vec![true; self.x.len()],
        })
    }
}

/// A function on `(0, C]²` that may be evaluated anywhere inside.
#[derive(Clone)]
pub struct SampledFunction2D {
    f: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    pub support: f64,
    pub smoothness: String,
}

impl SampledFunction2D {
    pub fn new(
        f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        support: f64,
        smoothness: &str,
    ) -> Self {
        SampledFunction2D {
            f: Arc::new(f),
            support,
            smoothness: smoothness.to_string(),
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        (self.f)(x, y)
    }
}

impl fmt::Debug for SampledFunction2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SampledFunction2D")
            .field("support", &self.support)
            .field("smoothness", &self.smoothness)
            .finish_non_exhaustive()
    }
}

fn psi(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Smooth function equal to 1 on `(-∞, a]` and 0 on `[b, ∞)`.
pub fn smooth_step(a: f64, b: f64) -> impl Fn(f64) -> f64 + Clone + Send + Sync {
    move |x| {
        let (u, v) = (psi(b - x), psi(x - a));
        u / (u + v)
    }
}

/// Smooth bump supported in `[a, b] ⊂ (0, ∞)`, symmetric in `log x`, with peak value `e^{-1}`.
pub fn bump(a: f64, b: f64) -> impl Fn(f64) -> f64 + Clone + Send + Sync {
    let (la, lb) = (a.ln(), b.ln());
    move |x| {
        if x <= 0.0 {
            return 0.0;
        }
        let y = (2.0 * x.ln() - la - lb) / (lb - la);
        if y.abs() >= 1.0 {
            0.0
        } else {
            (-1.0 / (1.0 - y * y)).exp()
        }
    }
}
