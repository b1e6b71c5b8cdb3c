//! End-to-end checks that confront symbolic predictions with numeric oracles.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use crate::b_calculus::{
    action_index, apply_check, compose_descriptors, hs_front_face_criterion, indicial,
    model_inverse, BDiffOp, FullCalcDescriptor, Order, Side, WeightParameter,
};
use crate::bmaps::{
    check_b_fibration, compose, double_space_projection, forget_coordinate, lifted_projection,
    triple_blowdown,
};
use crate::corner_geometry::{double_b_space, triple_b_space};
use crate::error::{Error, Result};
use crate::exponent::{Exponent, Q};
use crate::index_algebra::{IndexEntry, IndexFamily, IndexSet};
use crate::phg_numeric::{
    bump, chart_split, compare_with_prediction, convolve_model_kernels, fit_expansion,
    numeric_pushforward, smooth_step, solve_model_ode, FitOptions, GeometricGrid, QuadratureSpec,
    SampledFunction2D,
};
use crate::transport::{pull_back_family, push_forward_halfline};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    All,
    Pushforward,
    Parametrix,
    Combinatorics,
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(Suite::All),
            "pushforward" => Ok(Suite::Pushforward),
            "parametrix" => Ok(Suite::Parametrix),
            "combinatorics" => Ok(Suite::Combinatorics),
            _ => Err(Error::Argument(format!("unknown suite `{s}`"))),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Suite::All => "all",
            Suite::Pushforward => "pushforward",
            Suite::Parametrix => "parametrix",
            Suite::Combinatorics => "combinatorics",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseResult {
    pub name: &'static str,
    pub suite: Suite,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub passed: usize,
    pub failed: usize,
    pub cases: Vec<CaseResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }
}

type Check = fn() -> Result<(bool, String)>;

const CASES: &[(&str, Suite, Check)] = &[
    (
        "extended union of smooth sets",
        Suite::Combinatorics,
        ext_union_law,
    ),
    (
        "pull-back through the X2b blow-down",
        Suite::Combinatorics,
        pull_back_monomials,
    ),
    (
        "b-fibration checker",
        Suite::Combinatorics,
        b_fibration_checks,
    ),
    (
        "exponent-matrix functoriality",
        Suite::Combinatorics,
        functoriality,
    ),
    (
        "symbolic push-forward X2b -> R+",
        Suite::Pushforward,
        symbolic_pushforward,
    ),
    (
        "push-forward of sqrt(x^2+y^2)",
        Suite::Pushforward,
        sqrt_pushforward,
    ),
    (
        "hyperbola kernel log coefficient",
        Suite::Pushforward,
        hyperbola_pushforward,
    ),
    (
        "chart decomposition A+B",
        Suite::Pushforward,
        chart_decomposition,
    ),
    ("indicial roots and Spec_b", Suite::Parametrix, spec_b_cases),
    (
        "model inverse and apply-check",
        Suite::Parametrix,
        model_inverse_cases,
    ),
    (
        "composition generates logs",
        Suite::Parametrix,
        composition_logs,
    ),
    (
        "action theorem threshold",
        Suite::Parametrix,
        action_threshold,
    ),
    (
        "front-face Hilbert-Schmidt criterion",
        Suite::Parametrix,
        front_face,
    ),
];

/// Run every case of the selected suite. Failures and errors are collected.
pub fn run_suite(suite: Suite) -> VerifyReport {
    let cases: Vec<CaseResult> = CASES
        .iter()
        .filter(|(_, s, _)| suite == Suite::All || *s == suite)
        .map(|(name, s, check)| {
            let (passed, detail) = match check() {
                Ok(r) => r,
                Err(e) => (false, format!("error: {e}")),
            };
            CaseResult {
                name,
                suite: *s,
                passed,
                detail,
            }
        })
        .collect();
    let passed = cases.iter().filter(|c| c.passed).count();
    VerifyReport {
        suite,
        passed,
        failed: cases.len() - passed,
        cases,
    }
}

fn quad() -> QuadratureSpec {
    QuadratureSpec {
        abs_tol: 1e-15,
        rel_tol: 1e-13,
        max_depth: 50,
    }
}

fn int(k: i64) -> Exponent {
    Exponent::int(k)
}

fn ext_union_law() -> Result<(bool, String)> {
    let got = IndexSet::smooth().extended_union(&IndexSet::smooth());
    let want: Vec<IndexEntry> = (0..=10)
        .flat_map(|n| [IndexEntry::int(n, 0), IndexEntry::int(n, 1)])
        .collect();
    let trunc = got.truncate(Q::from_integer(10));
    Ok((
        trunc == want,
        format!("{} members up to Re z = 10, generators {got}", trunc.len()),
    ))
}

fn pull_back_monomials() -> Result<(bool, String)> {
    let bd = double_b_space().blowdown;
    let mut ok = true;
    for k in 1..=20i64 {
        let a = Exponent::ratio(3 * k - 7, k + 2);
        let b = Exponent::ratio(11 - 2 * k, 2 * k + 1);
        let fam = IndexFamily::from_pairs([
            ("H1", IndexSet::generated_by(a, 0)),
            ("H2", IndexSet::generated_by(b, 0)),
        ]);
        let pb = pull_back_family(&bd, &fam)?;
        ok &= pb.get("lb") == Some(&IndexSet::generated_by(a, 0))
            && pb.get("rb") == Some(&IndexSet::generated_by(b, 0))
            && pb.get("ff") == Some(&IndexSet::generated_by(a + b, 0));
    }
    Ok((
        ok,
        "x^a y^b pulls back to exponents a at lb, b at rb, a+b at ff for 20 pairs".into(),
    ))
}

fn b_fibration_checks() -> Result<(bool, String)> {
    let bd = check_b_fibration(&double_b_space().blowdown)?;
    let pi3 = lifted_projection(3)?;
    let rep = check_b_fibration(&pi3)?;
    let expected = [
        ("bf1", "lb"),
        ("ff2", "lb"),
        ("bf2", "rb"),
        ("ff1", "rb"),
        ("fff", "ff"),
        ("ff3", "ff"),
    ];
    let table_ok = expected.iter().all(|(g, h)| {
        rep.images
            .iter()
            .any(|im| im.bhs == *g && im.image == vec![h.to_string()] && im.codim == 1)
    }) && rep
        .images
        .iter()
        .any(|im| im.bhs == "bf3" && im.image.is_empty());
    let (x3b, _) = triple_b_space();
    let ok = !bd.is_b_fibration
        && bd.violating_faces == vec!["ff".to_string()]
        && rep.is_b_fibration
        && table_ok
        && x3b.bhs().len() == 7;
    Ok((
        ok,
        format!(
            "blow-down violators {:?}; X3b has {} bhs",
            bd.violating_faces,
            x3b.bhs().len()
        ),
    ))
}

fn matmul(a: &[Vec<u32>], b: &[Vec<u32>]) -> Vec<Vec<u32>> {
    a.iter()
        .map(|row| {
            (0..b[0].len())
                .map(|j| row.iter().zip(b).map(|(x, r)| x * r[j]).sum())
                .collect()
        })
        .collect()
}

fn functoriality() -> Result<(bool, String)> {
    let (_, recs) = triple_b_space();
    let mut ok = true;
    for w in recs.windows(2) {
        let c = compose(&w[1].blowdown, &w[0].blowdown)?;
        ok &= c.exponents()
            == matmul(w[1].blowdown.exponents(), w[0].blowdown.exponents()).as_slice();
    }
    let bd3 = triple_blowdown();
    let bd2 = double_b_space().blowdown;
    for i in 1..=3 {
        let left = compose(&lifted_projection(i)?, &bd2)?;
        let right = compose(&bd3, &forget_coordinate(i)?)?;
        ok &= left.exponents() == right.exponents();
    }
    Ok((ok, "blow-down chain and three commuting squares".into()))
}

fn x2b_family(lb: IndexSet, ff: IndexSet, rb: IndexSet) -> IndexFamily {
    IndexFamily::from_pairs([("lb", lb), ("ff", ff), ("rb", rb)])
}

fn symbolic_pushforward() -> Result<(bool, String)> {
    let p = double_space_projection(1)?;
    let fam = x2b_family(
        IndexSet::smooth(),
        IndexSet::smooth(),
        IndexSet::generated_by(int(1), 0),
    );
    let rep = push_forward_halfline(&p, &fam)?;
    let ok = rep.result == IndexSet::integers_with_logs(1)
        && rep.integrability_ok
        && rep.log_sources() == vec!["ff∩lb"];
    Ok((
        ok,
        format!("result {}, log sources {:?}", rep.result, rep.log_sources()),
    ))
}

/// `∫₀¹ √(x² + y²) dy` in closed form.
pub fn sqrt_pushforward_closed_form(x: f64) -> f64 {
    let r = (1.0 + x * x).sqrt();
    0.5 * r + 0.5 * x * x * (1.0 + r).ln() - 0.5 * x * x * x.ln()
}

pub fn sqrt_function() -> SampledFunction2D {
    SampledFunction2D::new(|x: f64, y: f64| x.hypot(y), 1.0, "conormal at the corner")
}

/// `max/min` of `|u − u_N| / (x^N (1 + log(1/x)))` over `x = 0.1·0.8^k`, `k < 16`:
/// bounded when the remainder decays like `x^N` up to a logarithm.
pub fn remainder_spread(
    exact: impl Fn(f64) -> f64,
    fit: &crate::phg_numeric::PhgExpansion,
    n: f64,
) -> f64 {
    let q: Vec<f64> = (0..16)
        .map(|k| 0.1 * 0.8f64.powi(k))
        .map(|x| (exact(x) - fit.evaluate(x)).abs() / (x.powf(n) * (1.0 - x.ln())))
        .collect();
    let hi = q.iter().copied().fold(0.0, f64::max);
    let lo = q.iter().copied().fold(f64::INFINITY, f64::min);
    hi / lo
}

fn sqrt_pushforward() -> Result<(bool, String)> {
    let grid = GeometricGrid::standard(0.1);
    let samples = numeric_pushforward(&sqrt_function(), &quad(), &grid.points);
    let closed = samples
        .x
        .iter()
        .zip(&samples.values)
        .map(|(x, v)| (v - sqrt_pushforward_closed_form(*x)).abs())
        .fold(0.0, f64::max);
    let fit = fit_expansion(
        &samples,
        &IndexSet::integers_with_logs(1),
        Q::from_integer(4),
        &FitOptions::default(),
    )?;
    let c = fit
        .terms
        .iter()
        .find(|t| t.z == Q::from_integer(2) && t.p == 1)
        .map(|t| t.coeff_log_x());
    let c = c.ok_or_else(|| Error::FitRejected("no x² log x term".into()))?;
    let spread = remainder_spread(sqrt_pushforward_closed_form, &fit, 4.0);
    let ok = (c + 0.5).abs() < 1e-6 && closed < 1e-10 && samples.all_converged() && spread < 10.0;
    Ok((
        ok,
        format!("coefficient of x^2 log x = {c:.10}, closed-form deviation {closed:.2e}, remainder/x^4 spread {spread:.2}"),
    ))
}

/// `u(x, y) = y⁻¹ v(x/y, y)` with a product cutoff `v`, and `v(0, 0)`.
pub fn hyperbola_function() -> (SampledFunction2D, f64) {
    let chi = smooth_step(0.5, 1.0);
    let v = move |xi: f64, eta: f64| 1.5 * (-xi).exp() * chi(xi) * (-2.0 * eta).exp() * chi(eta);
    (
        SampledFunction2D::new(
            move |x, y| if y > 0.0 { v(x / y, y) / y } else { 0.0 },
            1.0,
            "y⁻¹ × smooth in projective coordinates",
        ),
        1.5,
    )
}

fn hyperbola_pushforward() -> Result<(bool, String)> {
    let (u, v00) = hyperbola_function();
    let grid = GeometricGrid::standard(0.1);
    let samples = numeric_pushforward(&u, &quad(), &grid.points);
    let fit = fit_expansion(
        &samples,
        &IndexSet::integers_with_logs(1),
        Q::from_integer(3),
        &FitOptions::default(),
    )?;
    let c = fit
        .coeff(Q::from_integer(0), 1)
        .ok_or_else(|| Error::FitRejected("no log term at x^0".into()))?;
    let ok = (c - v00).abs() < 1e-5;
    Ok((
        ok,
        format!("log(1/x) coefficient at x^0 = {c:.10}, v(0,0) = {v00}"),
    ))
}

fn chart_decomposition() -> Result<(bool, String)> {
    let u = sqrt_function();
    let xs: Vec<f64> = GeometricGrid::new(0.9, 0.5, 12)?.points;
    let direct = numeric_pushforward(&u, &quad(), &xs);
    let mut worst = 0.0f64;
    for (inner, outer) in [(0.5, 2.0), (0.2, 3.0)] {
        let split = chart_split(&u, inner, outer, &quad(), &xs)?;
        for (a, b) in direct.values.iter().zip(split.total()) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok((
        worst < 1e-8,
        format!("largest |direct − (A+B)| = {worst:.2e} over two cutoffs"),
    ))
}

fn poly(c: &[Exponent]) -> Result<BDiffOp> {
    BDiffOp::from_polynomial(c)
}

fn spec_b_cases() -> Result<(bool, String)> {
    let c = Exponent::ratio(3, 2);
    let first = indicial(&poly(&[c, int(1)])?)?;
    let cubic = indicial(&poly(&[int(0), int(0), int(1), int(1)])?)?;
    let perturbed = indicial(&poly(&[
        Exponent::real(Q::new(8_000_000_000_000_000_001, 8_000_000_000_000_000_000)),
        int(-2),
        int(1),
    ])?)?;
    let ok = first.spec_b == vec![IndexEntry::new(-c, 0)]
        && cubic.spec_b
            == vec![
                IndexEntry::int(-1, 0),
                IndexEntry::int(0, 0),
                IndexEntry::int(0, 1),
            ]
        && perturbed.roots.len() == 1
        && perturbed.roots[0].order == 2;
    Ok((
        ok,
        format!(
            "cubic Spec_b {:?}, perturbed double root order {}",
            cubic.spec_b.len(),
            perturbed.roots[0].order
        ),
    ))
}

fn model_inverse_cases() -> Result<(bool, String)> {
    let gamma = WeightParameter::new(Q::from_integer(0));
    let v = bump(1.0, 2.0);
    let mut worst = 0.0f64;
    let mut exact = true;
    for c in [
        int(1),
        Exponent::ratio(1, 2),
        Exponent::new(Q::from_integer(2), Q::from_integer(1)),
    ] {
        let p = poly(&[c, int(1)])?;
        let k = model_inverse(&indicial(&p)?, &gamma)?;
        exact &= k.terms.len() == 1
            && k.terms[0].z == c
            && k.terms[0].p == 0
            && k.terms[0].side == Side::Rb
            && k.terms[0].exact_coeff == Some(int(1));
        let r = apply_check(&p, &k, &v, (1.0, 2.0), &quad())?;
        worst = worst.max(r.max_residual);
    }
    let ode = solve_model_ode(
        int(1),
        &|_| 1.0,
        &GeometricGrid::standard(1.0).points,
        &quad(),
    )?;
    let ode_err = ode
        .values
        .iter()
        .map(|u| (u - Complex64::new(1.0, 0.0)).norm())
        .fold(0.0, f64::max);
    let ok = exact && worst < 1e-6 && ode_err < 1e-14;
    Ok((ok, format!("kernels exact: {exact}; apply-check residual {worst:.2e}; model ODE deviation {ode_err:.1e}")))
}

fn composition_logs() -> Result<(bool, String)> {
    let c = int(1);
    let p = poly(&[c, int(1)])?;
    let k = model_inverse(&indicial(&p)?, &WeightParameter::new(Q::from_integer(0)))?;
    let s: Vec<f64> = (0..99).map(|i| 0.01 + 0.01 * i as f64).collect();
    let conv = convolve_model_kernels(&k, &k, &s, &quad())?;
    let dev = s
        .iter()
        .zip(&conv.values)
        .map(|(s, v)| (v - s * (1.0 / s).ln()).norm())
        .fold(0.0, f64::max);
    let q = FullCalcDescriptor::new(
        Order::int(-1),
        IndexSet::empty(),
        IndexSet::generated_by(c, 0),
    );
    let qq = compose_descriptors(&q, &q)?;
    let predicted = qq.e_lb.is_empty() && qq.e_rb == IndexSet::generated_by(c, 1);
    let grid = GeometricGrid::standard(0.99);
    let samples = convolve_model_kernels(&k, &k, &grid.points, &quad())?.real_part(1e-12)?;
    let fit = fit_expansion(
        &samples,
        &IndexSet::integers_with_logs(2),
        Q::from_integer(3),
        &FitOptions::default(),
    )?;
    let cmp = compare_with_prediction(&fit, &qq.e_rb, 1e-6);
    let ok = dev < 1e-8 && predicted && cmp.contained;
    Ok((
        ok,
        format!(
            "max deviation {dev:.2e}; prediction {qq}; extra fitted terms {:?}",
            cmp.extra
        ),
    ))
}

fn action_threshold() -> Result<(bool, String)> {
    let c = int(1);
    let q = FullCalcDescriptor::new(
        Order::int(-1),
        IndexSet::empty(),
        IndexSet::generated_by(c, 0),
    );
    let cut = smooth_step(0.5, 1.0);
    let mut agree = true;
    let mut log = Vec::new();
    for w in [
        Q::new(-3, 2),
        Q::from_integer(-1),
        Q::new(-1, 2),
        Q::from_integer(0),
        Q::new(1, 2),
    ] {
        let f = IndexSet::generated_by(Exponent::real(w), 0);
        let symbolic_ok = action_index(&q, &f).is_ok();
        let wf = crate::exponent::q_to_f64(&w);
        let v = |x: f64| x.powf(wf) * cut(x);
        let numeric_ok = match solve_model_ode(c, &v, &[0.5], &quad()) {
            Ok(_) => true,
            Err(Error::Integrability(_)) => false,
            Err(e) => return Err(e),
        };
        agree &=
            symbolic_ok == numeric_ok && symbolic_ok == (crate::exponent::q_to_f64(&w) + 1.0 > 0.0);
        log.push(format!(
            "w={}: {}",
            crate::exponent::format_rational(&w),
            if symbolic_ok { "ok" } else { "diverges" }
        ));
    }
    Ok((agree, log.join(", ")))
}

fn front_face() -> Result<(bool, String)> {
    let spec = QuadratureSpec {
        abs_tol: 1e-13,
        rel_tol: 1e-10,
        max_depth: 40,
    };
    let b = bump(0.5, 2.0);
    let phi = smooth_step(0.5, 1.0);
    let flat = hs_front_face_criterion(&|x, s| x * b(s), &phi, 2.0, 1e-6, &spec)?;
    let full = hs_front_face_criterion(&|_, s| b(s), &phi, 2.0, 1e-6, &spec)?;
    let expected =
        crate::phg_numeric::integrate(|t| b(t.exp()).powi(2), -(2f64.ln()), 2f64.ln(), &spec).value;
    let ok = flat.vanishes_at_front_face && (full.log_slope - expected).abs() < 0.05 * expected;
    Ok((
        ok,
        format!(
            "slopes {:.3e} and {:.6} (expected {expected:.6})",
            flat.log_slope, full.log_slope
        ),
    ))
}
