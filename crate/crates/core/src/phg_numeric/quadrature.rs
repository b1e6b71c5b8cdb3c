//! Adaptive Gauss–Kronrod (7/15) quadrature with interval bisection.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances for adaptive quadrature. The interval `[a, b]` is bisected
/// where the Kronrod/Gauss discrepancy is largest until the total estimate
/// meets `max(abs_tol, rel_tol·|I|)`; no interval is split more than
/// `max_depth` times.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_depth: u32,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            abs_tol: 1e-14,
            rel_tol: 1e-12,
            max_depth: 40,
        }
    }
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64, rel_tol: f64, max_depth: u32) -> Result<Self> {
        if !(abs_tol > 0.0 && rel_tol > 0.0) {
            return Err(Error::Argument(
                "quadrature tolerances must be positive".into(),
            ));
        }
        Ok(QuadratureSpec {
            abs_tol,
            rel_tol,
            max_depth,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
    pub evaluations: usize,
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    depth: u32,
}

impl PartialEq for Piece {
    fn eq(&self, o: &Self) -> bool {
        self.error == o.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Piece {
    fn cmp(&self, o: &Self) -> Ordering {
        self.error.total_cmp(&o.error)
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (j, (&x, &w)) in XGK.iter().zip(&WGK).take(7).enumerate() {
        let f1 = f(c - h * x);
        let f2 = f(c + h * x);
        kron += w * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let err = ((kron - gauss) * h).abs();
    (kron * h, err)
}

/// Integrate `f` over `[a, b]`. Non-convergence is reported in the result.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> QuadResult {
    if a == b {
        return QuadResult {
            value: 0.0,
            error: 0.0,
            converged: true,
            evaluations: 0,
        };
    }
    let (v, e) = gk15(&f, a, b);
    let mut evals = 15;
    let mut heap = BinaryHeap::new();
    heap.push(Piece {
        a,
        b,
        value: v,
        error: e,
        depth: 0,
    });
    let mut total = v;
    let mut total_err = e;
    let mut frozen_value = 0.0;
    let mut frozen_err = 0.0;
    loop {
        let tol = spec.abs_tol.max(spec.rel_tol * total.abs());
        if total_err <= tol {
            return QuadResult {
                value: total,
                error: total_err,
                converged: true,
                evaluations: evals,
            };
        }
        let Some(p) = heap.pop() else {
            return QuadResult {
                value: total,
                error: total_err,
                converged: false,
                evaluations: evals,
            };
        };
        if p.depth >= spec.max_depth || !total_err.is_finite() {
            frozen_value += p.value;
            frozen_err += p.error;
            if heap.is_empty() || !total_err.is_finite() {
                let value = frozen_value + heap.iter().map(|q| q.value).sum::<f64>();
                let error = frozen_err + heap.iter().map(|q| q.error).sum::<f64>();
                let ok = error <= spec.abs_tol.max(spec.rel_tol * value.abs());
                return QuadResult {
                    value,
                    error,
                    converged: ok,
                    evaluations: evals,
                };
            }
            continue;
        }
        let m = 0.5 * (p.a + p.b);
        let (v1, e1) = gk15(&f, p.a, m);
        let (v2, e2) = gk15(&f, m, p.b);
        evals += 30;
        total += v1 + v2 - p.value;
        total_err += e1 + e2 - p.error;
        heap.push(Piece {
            a: p.a,
            b: m,
            value: v1,
            error: e1,
            depth: p.depth + 1,
        });
        heap.push(Piece {
            a: m,
            b: p.b,
            value: v2,
            error: e2,
            depth: p.depth + 1,
        });
    }
}

/// Integrate over consecutive pieces `breaks[0..]`, splitting at every break point.
pub fn integrate_pieces<F: Fn(f64) -> f64>(
    f: F,
    breaks: &[f64],
    spec: &QuadratureSpec,
) -> QuadResult {
    let mut out = QuadResult {
        value: 0.0,
        error: 0.0,
        converged: true,
        evaluations: 0,
    };
    for w in breaks.windows(2) {
        let r = integrate(&f, w[0], w[1], spec);
        out.value += r.value;
        out.error += r.error;
        out.converged &= r.converged;
        out.evaluations += r.evaluations;
    }
    out
}

/// As [`integrate`], but a failure to converge becomes an error.
pub fn integrate_strict<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let r = integrate(f, a, b, spec);
    if r.converged {
        Ok(r.value)
    } else {
        Err(Error::Quadrature(format!(
            "on [{a}, {b}]: error estimate {:.3e}",
            r.error
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let r = integrate(
            |x| x.powi(5) - 2.0 * x,
            0.0,
            2.0,
            &QuadratureSpec::default(),
        );
        assert!((r.value - (64.0 / 6.0 - 4.0)).abs() < 1e-13);
        assert!(r.converged);
    }

    #[test]
    fn endpoint_singularity() {
        let r = integrate(|x: f64| x.sqrt(), 0.0, 1.0, &QuadratureSpec::default());
        assert!((r.value - 2.0 / 3.0).abs() < 1e-12, "{r:?}");
        assert!(r.converged);
    }

    #[test]
    fn kink_converges() {
        let r = integrate(
            |x: f64| (x - 0.3).abs(),
            0.0,
            1.0,
            &QuadratureSpec::default(),
        );
        assert!((r.value - (0.045 + 0.245)).abs() < 1e-13);
    }

    #[test]
    fn divergent_integral_is_flagged() {
        let spec = QuadratureSpec {
            max_depth: 12,
            ..Default::default()
        };
        let r = integrate(|x: f64| 1.0 / x, 0.0, 1.0, &spec);
        assert!(!r.converged);
    }

    #[test]
    fn rejects_nonpositive_tolerances() {
        assert!(QuadratureSpec::new(0.0, 1e-8, 10).is_err());
    }
}
