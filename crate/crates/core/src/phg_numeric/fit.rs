//! Least-squares fits of `Σ a_{z,p} x^z log^p(1/x)` to boundary samples.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::Sampled1D;
use crate::error::{Error, Result};
use crate::exponent::{format_rational, q_to_f64, Exponent, Q};
use crate::index_algebra::{IndexEntry, IndexSet};

/// Exponents closer than this (at equal log power) are merged before fitting.
pub const MERGE_GAP: f64 = 1e-2;

#[derive(Clone, Debug, PartialEq)]
pub struct FitOptions {
    /// Extra orders beyond the cutoff that are fitted but not reported, so the
    /// reported coefficients are not biased by the first omitted terms.
    pub extra_orders: i64,
    /// Largest admissible condition number of the column-scaled basis.
    pub condition_guard: f64,
    /// Number of smallest grid points used to certify the remainder decay.
    pub sub_grid: usize,
    /// Allowed growth of `|u − u_N| / (x^N (1 + log(1/x))^{P+1})` on the sub-grid.
    pub decay_factor: f64,
    /// Relative noise level of the samples beyond their recorded errors.
    pub noise: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            extra_orders: 2,
            condition_guard: 1e13,
            sub_grid: 20,
            decay_factor: 10.0,
            noise: 1e-13,
        }
    }
}

/// One fitted term `coeff · x^z · log^p(1/x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhgTerm {
    pub z: Q,
    pub p: u32,
    pub coeff: f64,
}

impl PhgTerm {
    /// Coefficient against the basis `x^z log^p x` instead of `log^p(1/x)`.
    pub fn coeff_log_x(&self) -> f64 {
        if self.p.is_multiple_of(2) {
            self.coeff
        } else {
            -self.coeff
        }
    }

    pub fn entry(&self) -> IndexEntry {
        IndexEntry::new(Exponent::real(self.z), self.p)
    }
}

impl Serialize for PhgTerm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("PhgTerm", 3)?;
        st.serialize_field("z", &format_rational(&self.z))?;
        st.serialize_field("p", &self.p)?;
        st.serialize_field("coeff", &self.coeff)?;
        st.end()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhgExpansion {
    /// Terms with `Re z` below the cutoff, sorted by `(z, p)`.
    pub terms: Vec<PhgTerm>,
    /// Largest absolute deviation of the full fit from the samples.
    pub fit_residual: f64,
    pub grid_meta: String,
    pub log_convention: &'static str,
    #[serde(serialize_with = "ser_q")]
    pub cutoff: Q,
    pub condition: f64,
    /// Largest observed `|u − u_N|` relative to the `x^N` envelope on the sub-grid.
    pub decay_ratio: f64,
    pub warnings: Vec<String>,
}

fn ser_q<S: serde::Serializer>(q: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(q))
}

impl PhgExpansion {
    pub fn coeff(&self, z: Q, p: u32) -> Option<f64> {
        self.terms
            .iter()
            .find(|t| t.z == z && t.p == p)
            .map(|t| t.coeff)
    }

    /// Value of the reported (truncated) expansion.
    pub fn evaluate(&self, x: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| basis(q_to_f64(&t.z), t.p, x) * t.coeff)
            .sum()
    }
}

fn basis(z: f64, p: u32, x: f64) -> f64 {
    x.powf(z) * (-x.ln()).powi(p as i32)
}

/// Fit the samples against the members of `candidate` with `Re z < cutoff`.
///
/// The remainder `u − u_N` must stay below `decay_factor` times the envelope
/// `K x^N (1 + log(1/x))^{P+1}` on the smallest `sub_grid` points, where `K` is
/// calibrated on the remaining points; otherwise the fit is rejected.
pub fn fit_expansion(
    samples: &Sampled1D,
    candidate: &IndexSet,
    cutoff: Q,
    opts: &FitOptions,
) -> Result<PhgExpansion> {
    if samples.len() < opts.sub_grid + 4 {
        return Err(Error::Argument(
            "too few samples for the fit and its decay check".into(),
        ));
    }
    if samples.x.iter().any(|&x| !(x > 0.0 && x <= 1.0)) {
        return Err(Error::Argument("fit samples must lie in (0, 1]".into()));
    }
    let upper = cutoff + Q::from_integer(opts.extra_orders);
    let mut entries: Vec<IndexEntry> = candidate
        .truncate(upper)
        .into_iter()
        .filter(|e| e.z.re < upper)
        .collect();
    if entries.iter().any(|e| !e.z.is_real()) {
        return Err(Error::Argument("fits support real exponents only".into()));
    }
    let mut warnings = Vec::new();
    entries.sort_by_key(|e| (e.p, e.z));
    let mut kept: Vec<IndexEntry> = Vec::new();
    for e in entries {
        if let Some(prev) = kept.last() {
            if prev.p == e.p && q_to_f64(&(e.z.re - prev.z.re)) < MERGE_GAP {
                warnings.push(format!(
                    "merged exponent {} into {} (gap below {MERGE_GAP})",
                    e.z, prev.z
                ));
                continue;
            }
        }
        kept.push(e);
    }
    kept.sort();
    if kept.is_empty() {
        return Err(Error::Argument(
            "candidate has no members below the cutoff".into(),
        ));
    }

    let n = samples.len();
    let scale = samples.values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let floor = (1e-6 * scale).max(f64::MIN_POSITIVE);
    let weights: Vec<f64> = samples
        .values
        .iter()
        .map(|v| 1.0 / v.abs().max(floor))
        .collect();
    let zs: Vec<f64> = kept.iter().map(|e| q_to_f64(&e.z.re)).collect();
    let mut a = DMatrix::<f64>::from_fn(n, kept.len(), |i, j| {
        basis(zs[j], kept[j].p, samples.x[i]) * weights[i]
    });
    let mut col_scale = vec![1.0; kept.len()];
    for (j, cs) in col_scale.iter_mut().enumerate() {
        let norm = a.column(j).norm();
        if norm > 0.0 {
            *cs = norm;
            a.column_mut(j).scale_mut(1.0 / norm);
        }
    }
    let rhs = DVector::<f64>::from_fn(n, |i, _| samples.values[i] * weights[i]);
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 {
        smax / smin
    } else {
        f64::INFINITY
    };
    if condition > opts.condition_guard {
        return Err(Error::Conditioning { cond: condition });
    }
    let sol = svd
        .solve(&rhs, 0.0)
        .map_err(|e| Error::FitRejected(e.to_string()))?;
    let coeffs: Vec<f64> = sol.iter().zip(&col_scale).map(|(c, s)| c / s).collect();

    let full = |x: f64| -> f64 {
        kept.iter()
            .zip(&zs)
            .zip(&coeffs)
            .map(|((e, z), c)| basis(*z, e.p, x) * c)
            .sum()
    };
    let fit_residual = samples
        .x
        .iter()
        .zip(&samples.values)
        .map(|(x, v)| (v - full(*x)).abs())
        .fold(0.0, f64::max);

    let terms: Vec<PhgTerm> = kept
        .iter()
        .zip(&coeffs)
        .filter(|(e, _)| e.z.re < cutoff)
        .map(|(e, c)| PhgTerm {
            z: e.z.re,
            p: e.p,
            coeff: *c,
        })
        .collect();
    let expansion_n = |x: f64| -> f64 {
        terms
            .iter()
            .map(|t| basis(q_to_f64(&t.z), t.p, x) * t.coeff)
            .sum()
    };

    let nf = q_to_f64(&cutoff);
    let pmax = kept.iter().map(|e| e.p).max().unwrap_or(0) as i32;
    let envelope = |x: f64| x.powf(nf) * (1.0 - x.ln()).powi(pmax + 1);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| samples.x[j].total_cmp(&samples.x[i]));
    let (calib, check) = order.split_at(n - opts.sub_grid);
    let noise = |i: usize| samples.errors[i] + opts.noise * scale;
    let remainder = |i: usize| (samples.values[i] - expansion_n(samples.x[i])).abs();
    let k = calib
        .iter()
        .map(|&i| remainder(i) / envelope(samples.x[i]))
        .fold(0.0, f64::max);
    let mut decay_ratio = 0.0f64;
    for &i in check {
        let r = remainder(i);
        let noise_i = noise(i);
        if r <= 10.0 * noise_i {
            continue;
        }
        let ratio = r / (k * envelope(samples.x[i])).max(f64::MIN_POSITIVE);
        decay_ratio = decay_ratio.max(ratio);
    }
    if decay_ratio > opts.decay_factor {
        return Err(Error::FitRejected(format!(
            "remainder does not decay like x^{}: envelope exceeded by factor {decay_ratio:.3e} on the sub-grid",
            format_rational(&cutoff)
        )));
    }
    let (xmin, xmax) = samples
        .x
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    Ok(PhgExpansion {
        terms,
        fit_residual,
        grid_meta: format!(
            "{n} points in [{xmin:.6e}, {xmax:.6e}], decay checked on the smallest {}",
            opts.sub_grid
        ),
        log_convention: "log(1/x)",
        cutoff,
        condition,
        decay_ratio,
        warnings,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PredictionComparison {
    /// No significant fitted term lies outside the prediction.
    pub contained: bool,
    /// Predicted members below the cutoff without a significant fitted term.
    pub missing: Vec<IndexEntry>,
    /// Significant fitted terms not predicted.
    pub extra: Vec<IndexEntry>,
}

/// Compare the terms with `|coeff| > significance` against a predicted index set.
pub fn compare_with_prediction(
    fit: &PhgExpansion,
    prediction: &IndexSet,
    significance: f64,
) -> PredictionComparison {
    let significant: Vec<IndexEntry> = fit
        .terms
        .iter()
        .filter(|t| t.coeff.abs() > significance)
        .map(PhgTerm::entry)
        .collect();
    let extra: Vec<IndexEntry> = significant
        .iter()
        .filter(|e| !prediction.contains(e))
        .copied()
        .collect();
    let missing: Vec<IndexEntry> = prediction
        .truncate(fit.cutoff)
        .into_iter()
        .filter(|e| e.z.re < fit.cutoff && !significant.contains(e))
        .collect();
    PredictionComparison {
        contained: extra.is_empty(),
        missing,
        extra,
    }
}
