//! Finite differences in `log x`, where `x∂ₓ = d/d(log x)`.

use num_complex::Complex64;
use serde::Serialize;

use crate::b_calculus::BDiffOp;
use crate::error::{Error, Result};

/// Fornberg's weights: `w[k][j]` multiplies `f(nodes[j])` in the `k`-th
/// derivative at `x0`, for `k ≤ max_deriv`.
pub fn fornberg_weights(x0: f64, nodes: &[f64], max_deriv: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; n]; max_deriv + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    for i in 1..n {
        let mn = i.min(max_deriv);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BopApplication {
    /// Interior grid points where the full stencil fits.
    pub x: Vec<f64>,
    #[serde(skip)]
    pub values: Vec<Complex64>,
    pub warning: Option<String>,
}

const HALF_WIDTH: usize = 5;

fn stencil_apply(
    p: &BDiffOp,
    t: &[f64],
    u: &[Complex64],
    w: usize,
    offset: usize,
) -> Vec<Complex64> {
    let m = p.order();
    let h = t[1] - t[0];
    let nodes: Vec<f64> = (0..=2 * w).map(|j| (j as f64 - w as f64) * h).collect();
    let weights = fornberg_weights(0.0, &nodes, m);
    (offset..t.len() - offset)
        .map(|i| {
            let x = t[i].exp();
            (0..=m)
                .map(|k| {
                    let d: Complex64 = (0..=2 * w).map(|j| u[i + j - w] * weights[k][j]).sum();
                    p.coefficient_at(k, x) * d
                })
                .sum()
        })
        .collect()
}

/// Apply `Σ a_j(x) (x∂ₓ)^j` to samples on a geometric grid. Values are
/// returned at points at least five grid steps from either end; a warning is
/// attached when a lower-order stencil disagrees noticeably.
pub fn apply_bop_numeric(p: &BDiffOp, x: &[f64], u: &[Complex64]) -> Result<BopApplication> {
    if x.len() != u.len() {
        return Err(Error::Argument("grid and samples differ in length".into()));
    }
    if x.len() < 2 * HALF_WIDTH + 1 || x.iter().any(|&v| v <= 0.0) {
        return Err(Error::Argument(format!(
            "need at least {} positive grid points",
            2 * HALF_WIDTH + 1
        )));
    }
    let t: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let h = t[1] - t[0];
    if h == 0.0
        || t.windows(2)
            .any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h.abs())
    {
        return Err(Error::Argument("grid is not geometric".into()));
    }
    let values = stencil_apply(p, &t, u, HALF_WIDTH, HALF_WIDTH);
    let coarse = stencil_apply(p, &t, u, HALF_WIDTH - 2, HALF_WIDTH);
    let scale = values.iter().chain(u).map(|z| z.norm()).fold(0.0, f64::max);
    let diff = values
        .iter()
        .zip(&coarse)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let warning = (diff > 1e-6 * scale.max(f64::MIN_POSITIVE))
        .then(|| format!("grid may be too coarse: stencil orders disagree by {diff:.3e}"));
    Ok(BopApplication {
        x: x[HALF_WIDTH..x.len() - HALF_WIDTH].to_vec(),
        values,
        warning,
    })
}

/// Real-valued convenience wrapper around [`apply_bop_numeric`].
pub fn apply_bop_real(p: &BDiffOp, x: &[f64], u: &[f64]) -> Result<(Vec<f64>, Vec<Complex64>)> {
    let z: Vec<Complex64> = u.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let r = apply_bop_numeric(p, x, &z)?;
    Ok((r.x, r.values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::Exponent;

    fn geometric(n: usize, r: f64) -> Vec<f64> {
        (0..n).map(|k| r.powi(k as i32)).collect()
    }

    #[test]
    fn weights_reproduce_derivatives_of_cubic() {
        let nodes = [-1.0, 0.0, 1.0, 2.0];
        let w = fornberg_weights(0.0, &nodes, 2);
        let f = |x: f64| x * x * x + 2.0 * x;
        let d1: f64 = nodes.iter().zip(&w[1]).map(|(x, c)| c * f(*x)).sum();
        let d2: f64 = nodes.iter().zip(&w[2]).map(|(x, c)| c * f(*x)).sum();
        assert!((d1 - 2.0).abs() < 1e-13 && d2.abs() < 1e-13);
    }

    #[test]
    fn euler_operator_on_powers_and_logs() {
        let x = geometric(80, 0.95);
        let p = BDiffOp::from_polynomial(&[Exponent::int(0), Exponent::int(1)]).unwrap();
        let a = 1.5;
        let (xi, v) =
            apply_bop_real(&p, &x, &x.iter().map(|t| t.powf(a)).collect::<Vec<_>>()).unwrap();
        for (t, d) in xi.iter().zip(&v) {
            assert!((d.re - a * t.powf(a)).abs() < 1e-10 * t.powf(a));
        }
        let (_, v) = apply_bop_real(&p, &x, &x.iter().map(|t| t.ln()).collect::<Vec<_>>()).unwrap();
        assert!(v.iter().all(|d| (d.re - 1.0).abs() < 1e-11));
    }

    #[test]
    fn rejects_non_geometric_grid() {
        let x: Vec<f64> = (1..30).map(|k| k as f64).collect();
        let p = BDiffOp::from_polynomial(&[Exponent::int(0), Exponent::int(1)]).unwrap();
        assert!(apply_bop_real(&p, &x, &x).is_err());
    }
}
