//! b-differential operators on the half-line and the index bookkeeping of the
//! full b-calculus.

mod kernel;
pub mod roots;

use std::fmt;

use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exponent::{format_rational, parse_rational, q_to_f64, Exponent, Q};
use crate::index_algebra::{IndexEntry, IndexSet, InfRe};

pub use kernel::{
    apply_check, hs_front_face_criterion, model_inverse, model_inverse_of, ApplyCheckReport,
    HsReport, KernelTerm, ModelKernel, Side,
};
pub use roots::{find_roots, Root, CLUSTER_TOL};

/// Distance below which a weight counts as sitting on an indicial root.
pub const WEIGHT_TOL: f64 = 1e-9;

/// `P = Σ_j a_j(x) (x∂ₓ)^j` with each `a_j` a truncated power series in `x`.
#[derive(Clone, Debug, PartialEq)]
pub struct BDiffOp {
    coeffs: Vec<Vec<Exponent>>,
}

impl BDiffOp {
    /// `coeffs[j][k]` is the coefficient of `x^k` in `a_j`.
    pub fn new(coeffs: Vec<Vec<Exponent>>) -> Result<Self> {
        let Some(lead) = coeffs.last() else {
            return Err(Error::Argument(
                "operator needs at least one coefficient".into(),
            ));
        };
        if lead.iter().all(Exponent::is_zero) {
            return Err(Error::Argument(
                "leading coefficient series is identically zero".into(),
            ));
        }
        Ok(BDiffOp { coeffs })
    }

    /// Constant-coefficient operator `p(x∂ₓ)` for `p(z) = Σ poly[j] z^j`.
    pub fn from_polynomial(poly: &[Exponent]) -> Result<Self> {
        Self::new(poly.iter().map(|c| vec![*c]).collect())
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Vec<Exponent>] {
        &self.coeffs
    }

    /// Highest power of `x` kept in any coefficient series.
    pub fn truncation_degree(&self) -> usize {
        self.coeffs
            .iter()
            .map(|s| s.len().saturating_sub(1))
            .max()
            .unwrap_or(0)
    }

    /// `a_j(0)` for every `j`.
    pub fn indicial_coefficients(&self) -> Vec<Exponent> {
        self.coeffs
            .iter()
            .map(|s| s.first().copied().unwrap_or_default())
            .collect()
    }

    pub fn has_constant_coefficients(&self) -> bool {
        self.coeffs
            .iter()
            .all(|s| s.iter().skip(1).all(Exponent::is_zero))
    }

    /// `I(P) = Σ a_j(0) (x∂ₓ)^j`.
    pub fn indicial_operator(&self) -> BDiffOp {
        BDiffOp {
            coeffs: self
                .indicial_coefficients()
                .into_iter()
                .map(|c| vec![c])
                .collect(),
        }
    }

    /// Value of the truncated series `a_j(x)`.
    pub fn coefficient_at(&self, j: usize, x: f64) -> Complex64 {
        self.coeffs[j]
            .iter()
            .rev()
            .fold(Complex64::zero(), |acc, c| acc * x + c.to_complex())
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ScalarJson {
    Text(String),
    Int(i64),
    Complex {
        re: String,
        #[serde(default)]
        im: Option<String>,
    },
}

fn scalar_from_json(j: ScalarJson) -> Result<Exponent> {
    match j {
        ScalarJson::Int(k) => Ok(Exponent::int(k)),
        ScalarJson::Text(s) => Ok(Exponent::real(parse_rational(&s)?)),
        ScalarJson::Complex { re, im } => Ok(Exponent::new(
            parse_rational(&re)?,
            im.as_deref()
                .map(parse_rational)
                .transpose()?
                .unwrap_or_default(),
        )),
    }
}

pub(crate) fn scalar_to_json(z: &Exponent) -> serde_json::Value {
    if z.is_real() {
        serde_json::Value::String(format_rational(&z.re))
    } else {
        serde_json::json!({ "re": format_rational(&z.re), "im": format_rational(&z.im) })
    }
}

impl Serialize for BDiffOp {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<Vec<serde_json::Value>> = self
            .coeffs
            .iter()
            .map(|series| series.iter().map(scalar_to_json).collect())
            .collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for BDiffOp {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw: Vec<Vec<ScalarJson>> = Vec::deserialize(d)?;
        let coeffs = raw
            .into_iter()
            .map(|series| {
                series
                    .into_iter()
                    .map(scalar_from_json)
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        BDiffOp::new(coeffs).map_err(serde::de::Error::custom)
    }
}

/// A root of the indicial polynomial with its order of vanishing.
#[derive(Clone, Debug, PartialEq)]
pub struct IndicialRoot {
    pub value: Exponent,
    pub approx: Complex64,
    pub exact: bool,
    pub order: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IndicialData {
    pub polynomial: Vec<Exponent>,
    pub roots: Vec<IndicialRoot>,
    /// `{(z, l) : p has a zero of order ≥ l + 1 at z}`, sorted.
    pub spec_b: Vec<IndexEntry>,
}

impl IndicialData {
    pub fn degree(&self) -> usize {
        self.polynomial.len() - 1
    }
}

impl Serialize for IndicialData {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let roots: Vec<serde_json::Value> = self
            .roots
            .iter()
            .map(|r| {
                serde_json::json!({
                    "re": format_rational(&r.value.re),
                    "im": format_rational(&r.value.im),
                    "order": r.order,
                    "exact": r.exact,
                })
            })
            .collect();
        serde_json::json!({
            "polynomial": self.polynomial.iter().map(scalar_to_json).collect::<Vec<_>>(),
            "roots": roots,
            "spec_b": self.spec_b,
        })
        .serialize(s)
    }
}

/// Indicial polynomial, its roots and `Spec_b`.
pub fn indicial(p: &BDiffOp) -> Result<IndicialData> {
    let polynomial = p.indicial_coefficients();
    if polynomial.last().is_none_or(Exponent::is_zero) {
        return Err(Error::NotBElliptic);
    }
    let roots: Vec<IndicialRoot> = find_roots(&polynomial, CLUSTER_TOL)
        .into_iter()
        .map(|r| IndicialRoot {
            value: r.value(),
            approx: r.approx,
            exact: r.exact.is_some(),
            order: r.multiplicity,
        })
        .collect();
    let mut spec_b: Vec<IndexEntry> = roots
        .iter()
        .flat_map(|r| (0..r.order).map(move |l| IndexEntry::new(r.value, l)))
        .collect();
    spec_b.sort();
    Ok(IndicialData {
        polynomial,
        roots,
        spec_b,
    })
}

/// The real weight `γ` choosing the boundary behaviour of the model inverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WeightParameter {
    pub gamma: Q,
}

impl WeightParameter {
    pub fn new(gamma: Q) -> Self {
        WeightParameter { gamma }
    }

    pub fn to_f64(&self) -> f64 {
        q_to_f64(&self.gamma)
    }

    /// Fails if `γ` lies within [`WEIGHT_TOL`] of the real part of a root.
    pub fn check(&self, data: &IndicialData) -> Result<()> {
        for r in &data.roots {
            let dist = if r.exact {
                q_to_f64(&(self.gamma - r.value.re)).abs()
            } else {
                (self.to_f64() - r.approx.re).abs()
            };
            if dist <= WEIGHT_TOL {
                return Err(Error::InadmissibleWeight {
                    gamma: format_rational(&self.gamma),
                    root_re: r.approx.re,
                });
            }
        }
        Ok(())
    }

    /// Whether the root lies to the right of the weight.
    fn is_right_of(&self, r: &IndicialRoot) -> bool {
        if r.exact {
            r.value.re > self.gamma
        } else {
            r.approx.re > self.to_f64()
        }
    }
}

/// Split `Spec_b` at `γ`: roots right of `γ` feed `E_lb`, roots left of it
/// feed `E_rb` with negated exponents. Returns `(E_lb, E_rb)`.
pub fn split_spec(data: &IndicialData, gamma: &WeightParameter) -> Result<(IndexSet, IndexSet)> {
    gamma.check(data)?;
    let mut lb = Vec::new();
    let mut rb = Vec::new();
    for r in &data.roots {
        let top = r.order - 1;
        if gamma.is_right_of(r) {
            lb.push(IndexEntry::new(r.value, top));
        } else {
            rb.push(IndexEntry::new(-r.value, top));
        }
    }
    Ok((IndexSet::complete(lb), IndexSet::complete(rb)))
}

/// Operator order; `Smoothing` stands for order `−∞`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Order {
    Finite(Q),
    Smoothing,
}

impl Order {
    pub fn int(k: i64) -> Self {
        Order::Finite(Q::from_integer(k))
    }

    fn add(self, o: Order) -> Order {
        match (self, o) {
            (Order::Finite(a), Order::Finite(b)) => Order::Finite(a + b),
            _ => Order::Smoothing,
        }
    }

    fn max(self, o: Order) -> Order {
        match (self, o) {
            (Order::Finite(a), Order::Finite(b)) => Order::Finite(a.max(b)),
            (Order::Smoothing, x) | (x, Order::Smoothing) => x,
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Finite(q) => write!(f, "{}", format_rational(q)),
            Order::Smoothing => write!(f, "-inf"),
        }
    }
}

impl Serialize for Order {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Order {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Int(i64),
        }
        match Raw::deserialize(d)? {
            Raw::Int(k) => Ok(Order::int(k)),
            Raw::Text(s) if s == "-inf" => Ok(Order::Smoothing),
            Raw::Text(s) => parse_rational(&s)
                .map(Order::Finite)
                .map_err(serde::de::Error::custom),
        }
    }
}

/// Order and boundary index sets of an element of the full calculus. The
/// front face always carries the smooth index set and is left implicit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FullCalcDescriptor {
    pub order: Order,
    pub e_lb: IndexSet,
    pub e_rb: IndexSet,
}

impl FullCalcDescriptor {
    pub fn new(order: Order, e_lb: IndexSet, e_rb: IndexSet) -> Self {
        FullCalcDescriptor { order, e_lb, e_rb }
    }

    /// The identity operator.
    pub fn identity() -> Self {
        Self::new(Order::int(0), IndexSet::empty(), IndexSet::empty())
    }

    /// Descriptor of the sum of two operators.
    pub fn union(&self, o: &FullCalcDescriptor) -> Self {
        Self::new(
            self.order.max(o.order),
            self.e_lb.union(&o.e_lb),
            self.e_rb.union(&o.e_rb),
        )
    }
}

impl fmt::Display for FullCalcDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "order {}, E_lb = {}, E_rb = {}",
            self.order, self.e_lb, self.e_rb
        )
    }
}

/// Descriptor of `P ∘ Q`; requires `inf Re E_rb(P) + inf Re E_lb(Q) > 0`.
pub fn compose_descriptors(
    p: &FullCalcDescriptor,
    q: &FullCalcDescriptor,
) -> Result<FullCalcDescriptor> {
    let s = p.e_rb.inf_re() + q.e_lb.inf_re();
    if !s.is_positive() {
        return Err(Error::CompositionUndefined(format!(
            "inf Re E_rb + inf Re F_lb = {s} is not positive"
        )));
    }
    Ok(FullCalcDescriptor::new(
        p.order.add(q.order),
        p.e_lb.extended_union(&q.e_lb),
        p.e_rb.extended_union(&q.e_rb),
    ))
}

/// Index set of `P w` for `w` with index set `f`; requires `inf Re E_rb + inf Re F > 0`.
pub fn action_index(p: &FullCalcDescriptor, f: &IndexSet) -> Result<IndexSet> {
    let s = p.e_rb.inf_re() + f.inf_re();
    if !s.is_positive() {
        return Err(Error::Integrability(format!(
            "inf Re E_rb + inf Re F = {s} is not positive"
        )));
    }
    Ok(p.e_lb.extended_union(f))
}

/// Whether `inf Re` of the set is strictly positive as a real number.
pub fn inf_positive(s: &IndexSet) -> bool {
    match s.inf_re() {
        InfRe::PosInf => true,
        InfRe::Finite(q) => q.to_f64().is_some_and(|x| x > 0.0),
    }
}

/// One stage of the Neumann iteration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParametrixStep {
    pub step: usize,
    pub parametrix: FullCalcDescriptor,
    pub remainder: FullCalcDescriptor,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParametrixReport {
    pub parametrix: FullCalcDescriptor,
    pub remainder: FullCalcDescriptor,
    pub steps: Vec<ParametrixStep>,
}

/// Predicted index sets of the `k`-step parametrix `Q_k = Q(Id + R + … + R^{k−1})`
/// of `P` at weight `γ`, and of its remainder `R^k`.
///
/// `Q` has the small-calculus part of order `−m` plus the model-inverse
/// correction carrying the split of `Spec_b`; `R = PQ − Id` is smoothing with
/// the same boundary sets. With `k = 0` only the small-calculus part remains.
pub fn parametrix_indices(
    p: &BDiffOp,
    gamma: &WeightParameter,
    k: usize,
) -> Result<ParametrixReport> {
    let data = indicial(p)?;
    let (lb, rb) = split_spec(&data, gamma)?;
    let m = Order::int(p.order() as i64);
    let small = FullCalcDescriptor::new(
        Order::Finite(-Q::from_integer(p.order() as i64)),
        IndexSet::empty(),
        IndexSet::empty(),
    );
    if k == 0 {
        let remainder =
            FullCalcDescriptor::new(Order::Smoothing, IndexSet::empty(), IndexSet::empty());
        return Ok(ParametrixReport {
            parametrix: small,
            remainder,
            steps: vec![],
        });
    }
    let q = small.union(&FullCalcDescriptor::new(Order::Smoothing, lb, rb));
    let fail = |step: usize, e: Error| Error::Parametrix {
        step,
        reason: e.to_string(),
    };
    let p_desc = FullCalcDescriptor::new(m, IndexSet::empty(), IndexSet::empty());
    let pq = compose_descriptors(&p_desc, &q).map_err(|e| fail(1, e))?;
    let r = FullCalcDescriptor::new(Order::Smoothing, pq.e_lb, pq.e_rb);

    let mut steps = vec![ParametrixStep {
        step: 1,
        parametrix: q.clone(),
        remainder: r.clone(),
    }];
    let mut neumann = FullCalcDescriptor::identity();
    let mut power = FullCalcDescriptor::identity();
    for step in 2..=k {
        power = compose_descriptors(&power, &r).map_err(|e| fail(step, e))?;
        neumann = neumann.union(&power);
        let qk = compose_descriptors(&q, &neumann).map_err(|e| fail(step, e))?;
        let rk = compose_descriptors(&power, &r).map_err(|e| fail(step, e))?;
        steps.push(ParametrixStep {
            step,
            parametrix: qk,
            remainder: rk,
        });
    }
    let last = steps.last().cloned().expect("at least one step");
    Ok(ParametrixReport {
        parametrix: last.parametrix,
        remainder: last.remainder,
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(c: &[i64]) -> BDiffOp {
        BDiffOp::from_polynomial(&c.iter().map(|&k| Exponent::int(k)).collect::<Vec<_>>()).unwrap()
    }

    fn w(n: i64, d: i64) -> WeightParameter {
        WeightParameter::new(Q::new(n, d))
    }

    #[test]
    fn first_order_spec_b() {
        let d = indicial(&poly(&[3, 1])).unwrap();
        assert_eq!(d.spec_b, vec![IndexEntry::int(-3, 0)]);
    }

    #[test]
    fn double_root_gives_log() {
        let d = indicial(&poly(&[0, 0, 1])).unwrap();
        assert_eq!(d.spec_b, vec![IndexEntry::int(0, 0), IndexEntry::int(0, 1)]);
    }

    #[test]
    fn cubic_spec_b() {
        // z²(z + 1)
        let d = indicial(&poly(&[0, 0, 1, 1])).unwrap();
        assert_eq!(
            d.spec_b,
            vec![
                IndexEntry::int(-1, 0),
                IndexEntry::int(0, 0),
                IndexEntry::int(0, 1)
            ]
        );
        assert_eq!(d.roots.iter().map(|r| r.order).sum::<u32>(), 3);
    }

    #[test]
    fn vanishing_leading_term_at_boundary() {
        let p = BDiffOp::new(vec![
            vec![Exponent::int(1)],
            vec![Exponent::int(0), Exponent::int(1)],
        ])
        .unwrap();
        assert_eq!(indicial(&p), Err(Error::NotBElliptic));
    }

    #[test]
    fn first_order_split_both_sides() {
        let d = indicial(&poly(&[2, 1])).unwrap();
        let (lb, rb) = split_spec(&d, &w(0, 1)).unwrap();
        assert!(lb.is_empty());
        assert_eq!(rb, IndexSet::generated_by(Exponent::int(2), 0));
        let (lb, rb) = split_spec(&d, &w(-3, 1)).unwrap();
        assert_eq!(lb, IndexSet::generated_by(Exponent::int(-2), 0));
        assert!(rb.is_empty());
        assert!(matches!(
            split_spec(&d, &w(-2, 1)),
            Err(Error::InadmissibleWeight { .. })
        ));
    }

    #[test]
    fn symmetric_split() {
        let d = indicial(&poly(&[-1, 0, 1])).unwrap();
        let (lb, rb) = split_spec(&d, &w(0, 1)).unwrap();
        assert_eq!(lb, IndexSet::generated_by(Exponent::int(1), 0));
        assert_eq!(rb, IndexSet::generated_by(Exponent::int(1), 0));
    }

    #[test]
    fn composition_rules() {
        let c = Exponent::int(1);
        let qc = FullCalcDescriptor::new(
            Order::int(-1),
            IndexSet::empty(),
            IndexSet::generated_by(c, 0),
        );
        let qq = compose_descriptors(&qc, &qc).unwrap();
        assert_eq!(qq.order, Order::int(-2));
        assert_eq!(qq.e_rb, IndexSet::generated_by(c, 1));
        assert_eq!(
            compose_descriptors(&qc, &FullCalcDescriptor::identity()).unwrap(),
            qc
        );
        let a = FullCalcDescriptor::new(Order::int(0), IndexSet::empty(), IndexSet::smooth());
        let b = FullCalcDescriptor::new(Order::int(0), IndexSet::smooth(), IndexSet::empty());
        assert!(matches!(
            compose_descriptors(&a, &b),
            Err(Error::CompositionUndefined(_))
        ));
    }

    #[test]
    fn action_rules() {
        let qc = FullCalcDescriptor::new(
            Order::int(-1),
            IndexSet::empty(),
            IndexSet::generated_by(Exponent::int(1), 0),
        );
        assert_eq!(
            action_index(&qc, &IndexSet::smooth()).unwrap(),
            IndexSet::smooth()
        );
        let f = IndexSet::generated_by(Exponent::ratio(-1, 2), 0);
        assert_eq!(action_index(&qc, &f).unwrap(), f);
        let g = IndexSet::generated_by(Exponent::int(-1), 0);
        assert!(matches!(
            action_index(&qc, &g),
            Err(Error::Integrability(_))
        ));
    }

    #[test]
    fn parametrix_steps() {
        let p = poly(&[1, 1]);
        let g = w(0, 1);
        let r0 = parametrix_indices(&p, &g, 0).unwrap();
        assert!(r0.parametrix.e_lb.is_empty() && r0.parametrix.e_rb.is_empty());
        let r1 = parametrix_indices(&p, &g, 1).unwrap();
        assert_eq!(
            r1.parametrix.e_rb,
            IndexSet::generated_by(Exponent::int(1), 0)
        );
        assert!(r1.parametrix.e_lb.is_empty());
        let r2 = parametrix_indices(&p, &g, 2).unwrap();
        assert_eq!(
            r2.parametrix.e_rb,
            IndexSet::generated_by(Exponent::int(1), 1)
        );
        assert_eq!(
            r2.remainder.e_rb,
            IndexSet::generated_by(Exponent::int(1), 1)
        );
    }

    #[test]
    fn operator_json_round_trip() {
        let p: BDiffOp =
            serde_json::from_str(r#"[["1/2", "1"], [{"re": "2", "im": "1"}], ["1"]]"#).unwrap();
        assert_eq!(p.order(), 2);
        assert_eq!(p.truncation_degree(), 1);
        assert!(!p.has_constant_coefficients());
        let back: BDiffOp = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(back, p);
    }
}
