//! Brute-force numeric counterparts of the symbolic predictions.

use num_complex::Complex64;
use num_traits::Zero;
use serde::Serialize;

use super::quadrature::{integrate, integrate_pieces, QuadResult, QuadratureSpec};
use super::{smooth_step, ComplexSamples, Sampled1D, SampledFunction2D};
use crate::b_calculus::ModelKernel;
use crate::error::{Error, Result};
use crate::exponent::Exponent;

const DECADE: f64 = std::f64::consts::LN_10;

/// Break points `0, x/2^10, …, x, 2x, 4x, … , C`, refining near the diagonal `y = x`.
fn diagonal_breaks(x: f64, c: f64) -> Vec<f64> {
    let mut b = vec![0.0];
    let mut y = x / 1024.0;
    while y < c {
        b.push(y);
        y *= 2.0;
    }
    b.push(c);
    b
}

/// `ũ(x) = ∫₀^C u(x, y) dy` at every grid point.
pub fn numeric_pushforward(
    u: &SampledFunction2D,
    spec: &QuadratureSpec,
    x_grid: &[f64],
) -> Sampled1D {
    let mut out = Sampled1D {
        x: x_grid.to_vec(),
        values: vec![],
        errors: vec![],
        converged: vec![],
    };
    for &x in x_grid {
        let r = integrate_pieces(|y| u.eval(x, y), &diagonal_breaks(x, u.support), spec);
        out.values.push(r.value);
        out.errors.push(r.error);
        out.converged.push(r.converged);
    }
    out
}

/// The push-forward split by a cutoff in `t = y/x` into the part near the
/// diagonal corner, integrated in the chart `(x, t)`, and the part away from
/// it, integrated in `log y`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChartSplit {
    pub near: Sampled1D,
    pub far: Sampled1D,
}

impl ChartSplit {
    pub fn total(&self) -> Vec<f64> {
        self.near
            .values
            .iter()
            .zip(&self.far.values)
            .map(|(a, b)| a + b)
            .collect()
    }
}

/// Split with `χ(t)` equal to 1 for `t ≤ inner` and 0 for `t ≥ outer`.
pub fn chart_split(
    u: &SampledFunction2D,
    inner: f64,
    outer: f64,
    spec: &QuadratureSpec,
    x_grid: &[f64],
) -> Result<ChartSplit> {
    if !(inner > 0.0 && outer > inner) {
        return Err(Error::Argument("cutoff needs 0 < inner < outer".into()));
    }
    let chi = smooth_step(inner, outer);
    let c = u.support;
    let mut near = Sampled1D {
        x: x_grid.to_vec(),
        values: vec![],
        errors: vec![],
        converged: vec![],
    };
    let mut far = near.clone();
    for &x in x_grid {
        // x ∫ u(x, xt) χ(t) dt over t ∈ [0, min(outer, C/x)]
        let tmax = outer.min(c / x);
        let mut breaks = vec![0.0];
        let mut t = inner / 1024.0;
        while t < tmax {
            breaks.push(t);
            t *= 2.0;
        }
        breaks.push(tmax);
        let a = integrate_pieces(|t| x * u.eval(x, x * t) * chi(t), &breaks, spec);
        near.values.push(a.value);
        near.errors.push(a.error);
        near.converged.push(a.converged);

        // ∫ u(x, e^τ)(1 − χ(e^τ/x)) e^τ dτ over τ ∈ [log(x·inner), log C]
        let lo = (x * inner).min(c).ln();
        let hi = c.ln();
        let mut breaks = vec![lo];
        let mut tau = lo + 0.5;
        while tau < hi {
            breaks.push(tau);
            tau += 0.5;
        }
        breaks.push(hi);
        let b = integrate_pieces(
            |tau| {
                let y = tau.exp();
                u.eval(x, y) * (1.0 - chi(y / x)) * y
            },
            &breaks,
            spec,
        );
        far.values.push(b.value);
        far.errors.push(b.error);
        far.converged.push(b.converged);
    }
    Ok(ChartSplit { near, far })
}

/// Sum of blocks `block(0), block(1), …` of a semi-infinite integral.
///
/// Stops once three consecutive blocks are negligible (after `min_blocks`) or
/// when the blocks decay geometrically, adding the geometric tail. Blocks that
/// stop decaying signal a divergent integral.
fn tail_sum(
    mut block: impl FnMut(usize) -> Result<Complex64>,
    min_blocks: usize,
    spec: &QuadratureSpec,
    what: &str,
) -> Result<(Complex64, f64)> {
    const MAX_BLOCKS: usize = 400;
    let mut sum = Complex64::zero();
    let mut blocks: Vec<Complex64> = Vec::new();
    for j in 0..MAX_BLOCKS {
        let b = block(j)?;
        sum += b;
        blocks.push(b);
        if j + 1 < min_blocks.max(4) {
            continue;
        }
        let tol = spec.abs_tol.max(spec.rel_tol * sum.norm());
        let last: Vec<f64> = blocks[blocks.len() - 4..]
            .iter()
            .map(|b| b.norm())
            .collect();
        if last[1..].iter().all(|&m| m <= tol) {
            return Ok((sum, 0.0));
        }
        if last.contains(&0.0) {
            continue;
        }
        let ratios: Vec<f64> = last.windows(2).map(|w| w[1] / w[0]).collect();
        if ratios.iter().all(|&r| r >= 1.0 - 1e-9) {
            return Err(Error::Integrability(format!(
                "{what}: integrand does not decay (block ratio {:.6})",
                ratios[ratios.len() - 1]
            )));
        }
        let rho = ratios[ratios.len() - 1];
        let stable = ratios
            .windows(2)
            .all(|w| (w[1] - w[0]).abs() <= 1e-3 * w[1].abs());
        if stable && rho < 1.0 {
            let bound = last[3] * rho / (1.0 - rho);
            if bound <= tol || j >= 40 {
                // Geometric extrapolation of the remaining blocks.
                let q = blocks[j] / blocks[j - 1];
                let tail = blocks[j] * q / (Complex64::new(1.0, 0.0) - q);
                return Ok((sum + tail, bound.min(tail.norm()) * 1e-3 + tol));
            }
        }
    }
    Err(Error::Quadrature(format!(
        "{what}: no convergence after {MAX_BLOCKS} blocks"
    )))
}

fn complex_integral(
    f: impl Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<(Complex64, f64)> {
    let re: QuadResult = integrate(|t| f(t).re, a, b, spec);
    let im: QuadResult = integrate(|t| f(t).im, a, b, spec);
    if !(re.converged && im.converged) {
        return Err(Error::Quadrature(format!("on [{a:.6}, {b:.6}]")));
    }
    Ok((Complex64::new(re.value, im.value), re.error + im.error))
}

/// `u(x) = x^{−c} ∫₀^x (x′)^{c−1} v(x′) dx′`, the solution of `(x∂ₓ + c)u = v`
/// that is smallest at `x = 0`. Written as `∫_{−∞}^0 e^{ct} v(x e^t) dt` and
/// summed over decades of `x′`; non-decaying decades give an integrability error.
pub fn solve_model_ode(
    c: Exponent,
    v: &dyn Fn(f64) -> f64,
    x_grid: &[f64],
    spec: &QuadratureSpec,
) -> Result<ComplexSamples> {
    let cz = c.to_complex();
    let mut values = Vec::with_capacity(x_grid.len());
    let mut errors = Vec::with_capacity(x_grid.len());
    for &x in x_grid {
        let mut err = 0.0;
        let (val, tail) = tail_sum(
            |j| {
                let (b, e) = complex_integral(
                    |t| (cz * t).exp() * v(x * t.exp()),
                    -((j + 1) as f64) * DECADE,
                    -(j as f64) * DECADE,
                    spec,
                )?;
                err += e;
                Ok(b)
            },
            16,
            spec,
            "model ODE integral",
        )?;
        values.push(val);
        errors.push(err + tail);
    }
    Ok(ComplexSamples {
        x: x_grid.to_vec(),
        values,
        errors,
    })
}

/// Mellin convolution `k(s) = ∫₀^∞ k₁(t) k₂(s/t) dt/t`, split at the jumps
/// `t = 1` and `t = s`; the two unbounded ends are summed by decades with
/// divergence detection.
pub fn convolve(
    k1: &dyn Fn(f64) -> Complex64,
    k2: &dyn Fn(f64) -> Complex64,
    s_grid: &[f64],
    spec: &QuadratureSpec,
) -> Result<ComplexSamples> {
    let mut values = Vec::with_capacity(s_grid.len());
    let mut errors = Vec::with_capacity(s_grid.len());
    for &s in s_grid {
        let ls = s.ln();
        let f = |tau: f64| k1(tau.exp()) * k2((ls - tau).exp());
        let (a, b) = (ls.min(0.0), ls.max(0.0));
        let (mid, mut err) = if b > a {
            complex_integral(f, a, b, spec)?
        } else {
            (Complex64::zero(), 0.0)
        };
        let (left, tl) = tail_sum(
            |j| {
                let (v, e) =
                    complex_integral(f, a - (j + 1) as f64 * DECADE, a - j as f64 * DECADE, spec)?;
                err += e;
                Ok(v)
            },
            4,
            spec,
            "kernel convolution (t → 0)",
        )?;
        let (right, tr) = tail_sum(
            |j| {
                let (v, e) =
                    complex_integral(f, b + j as f64 * DECADE, b + (j + 1) as f64 * DECADE, spec)?;
                err += e;
                Ok(v)
            },
            4,
            spec,
            "kernel convolution (t → ∞)",
        )?;
        values.push(mid + left + right);
        errors.push(err + tl + tr);
    }
    Ok(ComplexSamples {
        x: s_grid.to_vec(),
        values,
        errors,
    })
}

/// [`convolve`] for two model kernels.
pub fn convolve_model_kernels(
    k1: &ModelKernel,
    k2: &ModelKernel,
    s_grid: &[f64],
    spec: &QuadratureSpec,
) -> Result<ComplexSamples> {
    convolve(&|t| k1.evaluate(t), &|t| k2.evaluate(t), s_grid, spec)
}
