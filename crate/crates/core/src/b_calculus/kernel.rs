//! Model inverses of indicial operators as explicit Mellin-convolution kernels.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::Zero;
use serde::Serialize;

use super::{indicial, split_spec, BDiffOp, IndicialData, WeightParameter};
use crate::error::{Error, Result};
use crate::exponent::{Exponent, Q};
use crate::index_algebra::{IndexEntry, IndexSet};
use crate::phg_numeric::fd::apply_bop_numeric;
use crate::phg_numeric::quadrature::{integrate, QuadratureSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Supported in `s < 1`, i.e. `x′ < x`.
    Rb,
    /// Supported in `s > 1`.
    Lb,
}

/// One term of a model kernel.
///
/// On the `rb` side it contributes `c · s^z · log^p(1/s)` for `s < 1`, on the
/// `lb` side `c · (1/s)^z · log^p(s)` for `s > 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelTerm {
    pub z: Exponent,
    pub p: u32,
    pub side: Side,
    pub coeff: Complex64,
    /// The coefficient as an exact complex rational, when every root is exact.
    pub exact_coeff: Option<Exponent>,
}

impl KernelTerm {
    fn value(&self, s: f64) -> Complex64 {
        let (inside, base, log) = match self.side {
            Side::Rb => (s < 1.0, s, -s.ln()),
            Side::Lb => (s > 1.0, 1.0 / s, s.ln()),
        };
        if !inside {
            return Complex64::zero();
        }
        let power = (self.z.to_complex() * base.ln()).exp();
        self.coeff * power * log.powi(self.p as i32)
    }
}

/// Kernel `k(s)` acting by `(Qv)(x) = ∫₀^∞ k(x′/x) v(x′) dx′/x′`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ModelKernel {
    pub terms: Vec<KernelTerm>,
}

impl ModelKernel {
    pub fn new(terms: Vec<KernelTerm>) -> Self {
        ModelKernel { terms }
    }

    pub fn evaluate(&self, s: f64) -> Complex64 {
        self.terms.iter().map(|t| t.value(s)).sum()
    }

    /// `(E_lb, E_rb)` spanned by the terms, zero coefficients included.
    pub fn index_sets(&self) -> (IndexSet, IndexSet) {
        let side = |sd: Side| {
            IndexSet::complete(
                self.terms
                    .iter()
                    .filter(|t| t.side == sd)
                    .map(|t| IndexEntry::new(t.z, t.p)),
            )
        };
        (side(Side::Lb), side(Side::Rb))
    }

    /// Same terms with `lb` and `rb` exchanged.
    pub fn with_sides_swapped(&self) -> ModelKernel {
        let flip = |s: Side| if s == Side::Rb { Side::Lb } else { Side::Rb };
        ModelKernel::new(
            self.terms
                .iter()
                .map(|t| KernelTerm {
                    side: flip(t.side),
                    ..t.clone()
                })
                .collect(),
        )
    }

    /// `(Qv)(x)` for `v` supported in `[a, b] ⊂ (0, ∞)`, split at `x′ = x`.
    pub fn apply(
        &self,
        v: &dyn Fn(f64) -> f64,
        support: (f64, f64),
        x: f64,
        spec: &QuadratureSpec,
    ) -> Result<Complex64> {
        let (la, lb) = (support.0.ln(), support.1.ln());
        let lx = x.ln();
        let mut breaks = vec![la];
        if lx > la && lx < lb {
            breaks.push(lx);
        }
        breaks.push(lb);
        let mut out = Complex64::zero();
        for w in breaks.windows(2) {
            let re = integrate(
                |t| (self.evaluate((t - lx).exp()) * v(t.exp())).re,
                w[0],
                w[1],
                spec,
            );
            let im = integrate(
                |t| (self.evaluate((t - lx).exp()) * v(t.exp())).im,
                w[0],
                w[1],
                spec,
            );
            if !(re.converged && im.converged) {
                return Err(Error::Quadrature(format!("kernel application at x = {x}")));
            }
            out += Complex64::new(re.value, im.value);
        }
        Ok(out)
    }
}

impl Serialize for ModelKernel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let terms: Vec<serde_json::Value> = self
            .terms
            .iter()
            .map(|t| {
                let mut v = serde_json::json!({
                    "z": super::scalar_to_json(&t.z),
                    "p": t.p,
                    "side": t.side,
                    "coeff": {"re": t.coeff.re, "im": t.coeff.im},
                });
                if let Some(c) = &t.exact_coeff {
                    v["coeff_exact"] = super::scalar_to_json(c);
                }
                v
            })
            .collect();
        serde_json::json!({ "terms": terms }).serialize(s)
    }
}

trait Field:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_i64(k: i64) -> Self;
}

impl Field for Exponent {
    fn from_i64(k: i64) -> Self {
        Exponent::int(k)
    }
}

impl Field for Complex64 {
    fn from_i64(k: i64) -> Self {
        Complex64::new(k as f64, 0.0)
    }
}

fn binomial(n: u64, k: u64) -> i64 {
    (0..k).fold(1i64, |acc, i| acc * (n - i) as i64 / (i + 1) as i64)
}

/// Taylor coefficients `q^{(n)}(r₀)/n!`, `n < m`, of `q = (r − r₀)^m / p(r)`.
fn regular_part_series<T: Field>(roots: &[(T, u32)], lead: T, idx: usize) -> Vec<T> {
    let (r0, m) = roots[idx];
    let m = m as usize;
    let mut series = vec![T::from_i64(0); m];
    series[0] = T::from_i64(1) / lead;
    for (j, &(rj, mj)) in roots.iter().enumerate() {
        if j == idx {
            continue;
        }
        // (d + h)^{−k} = d^{−k} Σ_n (−1)^n C(k+n−1, n) (h/d)^n
        let d = r0 - rj;
        let dinv = T::from_i64(1) / d;
        let mut factor = Vec::with_capacity(m);
        let mut dk = T::from_i64(1);
        for _ in 0..mj {
            dk = dk * dinv;
        }
        let mut pow = dk;
        for n in 0..m {
            let sign = if n % 2 == 0 { 1 } else { -1 };
            factor.push(pow * T::from_i64(sign * binomial(mj as u64 + n as u64 - 1, n as u64)));
            pow = pow * dinv;
        }
        let mut next = vec![T::from_i64(0); m];
        for a in 0..m {
            for b in 0..m - a {
                next[a + b] = next[a + b] + series[a] * factor[b];
            }
        }
        series = next;
    }
    series
}

fn factorial(n: usize) -> i64 {
    (1..=n as i64).product()
}

/// Residue coefficients `c_l = q^{(m−1−l)}(r₀) / (l! (m−1−l)!)`, `l < m`.
fn residue_coefficients<T: Field>(roots: &[(T, u32)], lead: T, idx: usize) -> Vec<T> {
    let series = regular_part_series(roots, lead, idx);
    let m = series.len();
    (0..m)
        .map(|l| series[m - 1 - l] / T::from_i64(factorial(l)))
        .collect()
}

/// Kernel of the inverse of `I(P)` on weight `γ`, by residue inversion of the
/// Mellin transform. Roots left of `γ` give `rb` terms `s^{−r}`, roots right of
/// `γ` give `lb` terms; a root of order `m` contributes log powers `0..m`.
pub fn model_inverse(data: &IndicialData, gamma: &WeightParameter) -> Result<ModelKernel> {
    split_spec(data, gamma)?;
    let lead = *data.polynomial.last().expect("nonempty polynomial");
    let all_exact = data.roots.iter().all(|r| r.exact);
    let exact_roots: Vec<(Exponent, u32)> = data.roots.iter().map(|r| (r.value, r.order)).collect();
    let approx_roots: Vec<(Complex64, u32)> =
        data.roots.iter().map(|r| (r.approx, r.order)).collect();
    let mut terms = Vec::new();
    for (idx, r) in data.roots.iter().enumerate() {
        let coeffs: Vec<(Complex64, Option<Exponent>)> = if all_exact {
            residue_coefficients(&exact_roots, lead, idx)
                .into_iter()
                .map(|c| (c.to_complex(), Some(c)))
                .collect()
        } else {
            residue_coefficients(&approx_roots, lead.to_complex(), idx)
                .into_iter()
                .map(|c| (c, None))
                .collect()
        };
        let left = !gamma.is_right_of(r);
        for (l, (c, exact)) in coeffs.into_iter().enumerate() {
            let term = if left {
                KernelTerm {
                    z: -r.value,
                    p: l as u32,
                    side: Side::Rb,
                    coeff: c,
                    exact_coeff: exact,
                }
            } else {
                // The lb side carries −Σ Res with log(1/s) = −log s.
                let sign = if l % 2 == 0 { -1 } else { 1 };
                KernelTerm {
                    z: r.value,
                    p: l as u32,
                    side: Side::Lb,
                    coeff: c * sign as f64,
                    exact_coeff: exact.map(|e| e.scale(Q::from_integer(sign))),
                }
            };
            terms.push(term);
        }
    }
    terms.sort_by_key(|t| (t.side, t.z, t.p));
    Ok(ModelKernel::new(terms))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ApplyCheckReport {
    pub max_residual: f64,
    pub max_input: f64,
    pub points: usize,
    pub warning: Option<String>,
}

/// Evaluate `P(Kv) − v` on an interior log-spaced grid around the support of
/// `v` and report the largest deviation. `P` must have constant coefficients.
pub fn apply_check(
    p: &BDiffOp,
    k: &ModelKernel,
    v: &dyn Fn(f64) -> f64,
    support: (f64, f64),
    spec: &QuadratureSpec,
) -> Result<ApplyCheckReport> {
    if !p.has_constant_coefficients() {
        return Err(Error::Argument(
            "apply-check needs a constant-coefficient operator".into(),
        ));
    }
    let (a, b) = support;
    if !(a > 0.0 && b > a) {
        return Err(Error::Argument("support must satisfy 0 < a < b".into()));
    }
    let h = 0.004;
    let lo = (a / 3.0).ln();
    let hi = (3.0 * b).ln();
    let n = ((hi - lo) / h).ceil() as usize + 1;
    let xs: Vec<f64> = (0..n).map(|i| (lo + i as f64 * h).exp()).collect();
    let u = xs
        .iter()
        .map(|&x| k.apply(v, support, x, spec))
        .collect::<Result<Vec<_>>>()?;
    let applied = apply_bop_numeric(p, &xs, &u)?;
    let mut max_residual = 0.0f64;
    let mut max_input = 0.0f64;
    for (x, pu) in applied.x.iter().zip(&applied.values) {
        let vx = v(*x);
        max_input = max_input.max(vx.abs());
        max_residual = max_residual.max((pu - vx).norm());
    }
    Ok(ApplyCheckReport {
        max_residual,
        max_input,
        points: applied.x.len(),
        warning: applied.warning,
    })
}

/// [`indicial`] followed by [`model_inverse`].
pub fn model_inverse_of(p: &BDiffOp, gamma: &WeightParameter) -> Result<ModelKernel> {
    model_inverse(&indicial(p)?, gamma)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HsReport {
    /// `∫_ε^C (∫_{1/C}^C |φ(x) p(x, s)|² ds/s) dx/x`.
    pub norm_sq: f64,
    /// Growth rate of the norm in `log(1/ε)`, averaged over `[ε, 10ε]`.
    pub log_slope: f64,
    /// Whether the slope is negligible, i.e. the kernel vanishes at the front face.
    pub vanishes_at_front_face: bool,
}

/// Truncated Hilbert–Schmidt norm of `φ(x) p(x, s)` in b-coordinates and its
/// divergence rate as `ε → 0`.
pub fn hs_front_face_criterion(
    kernel: &dyn Fn(f64, f64) -> f64,
    cutoff: &dyn Fn(f64) -> f64,
    c: f64,
    eps: f64,
    spec: &QuadratureSpec,
) -> Result<HsReport> {
    if !(c > 1.0 && eps > 0.0 && 10.0 * eps < c) {
        return Err(Error::Argument("need C > 1 and 0 < 10ε < C".into()));
    }
    let inner = |t: f64| -> f64 {
        let x = t.exp();
        let phi = cutoff(x);
        if phi == 0.0 {
            return 0.0;
        }
        integrate(
            |sg| (phi * kernel(x, sg.exp())).powi(2),
            -c.ln(),
            c.ln(),
            spec,
        )
        .value
    };
    let outer = |a: f64, b: f64| -> Result<f64> {
        let r = integrate(inner, a, b, spec);
        if r.converged {
            Ok(r.value)
        } else {
            Err(Error::Quadrature(format!("outer integral on [{a}, {b}]")))
        }
    };
    let le = eps.ln();
    let near = outer(le, le + 10f64.ln())?;
    let norm_sq = near + outer(le + 10f64.ln(), c.ln())?;
    let log_slope = near / 10f64.ln();
    let vanishes_at_front_face = log_slope <= 1e-6 * (1.0 + norm_sq);
    Ok(HsReport {
        norm_sq,
        log_slope,
        vanishes_at_front_face,
    })
}
