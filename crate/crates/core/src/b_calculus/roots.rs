//! Roots of polynomials with complex-rational coefficients, with multiplicities.
//!
//! The square-free decomposition is computed exactly, so multiplicities of
//! rational and irrational roots alike come out exact whenever the input is
//! exact. Each square-free factor is then solved numerically (companion-matrix
//! eigenvalues), and roots that are exactly rational are snapped and verified.
//! Numeric roots closer than the cluster tolerance are merged afterwards, which
//! catches near-multiple roots of perturbed polynomials.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::exponent::{Exponent, Q};

/// Default distance below which numeric roots are treated as one root.
pub const CLUSTER_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct CBig {
    re: BigRational,
    im: BigRational,
}

impl CBig {
    fn zero() -> Self {
        CBig {
            re: BigRational::zero(),
            im: BigRational::zero(),
        }
    }

    fn from_q(q: &Q) -> BigRational {
        BigRational::new(BigInt::from(*q.numer()), BigInt::from(*q.denom()))
    }

    pub(crate) fn from_exponent(z: &Exponent) -> Self {
        CBig {
            re: Self::from_q(&z.re),
            im: Self::from_q(&z.im),
        }
    }

    fn from_complex(z: Complex64) -> Option<Self> {
        Some(CBig {
            re: BigRational::from_float(z.re)?,
            im: BigRational::from_float(z.im)?,
        })
    }

    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub(crate) fn to_complex(&self) -> Complex64 {
        Complex64::new(big_to_f64(&self.re), big_to_f64(&self.im))
    }

    fn to_exponent(&self) -> Option<Exponent> {
        let q = |b: &BigRational| -> Option<Q> {
            Some(Q::new(b.numer().to_i64()?, b.denom().to_i64()?))
        };
        Some(Exponent::new(q(&self.re)?, q(&self.im)?))
    }

    fn inv(&self) -> CBig {
        let n = &self.re * &self.re + &self.im * &self.im;
        CBig {
            re: &self.re / &n,
            im: -(&self.im / &n),
        }
    }

    fn div(&self, o: &CBig) -> CBig {
        self * &o.inv()
    }

    fn scale(&self, k: i64) -> CBig {
        let k = BigRational::from_integer(BigInt::from(k));
        CBig {
            re: &self.re * &k,
            im: &self.im * &k,
        }
    }
}

fn big_to_f64(b: &BigRational) -> f64 {
    if let Some(x) = b.to_f64() {
        if x.is_finite() {
            return x;
        }
    }
    let n = b.numer().to_f64().unwrap_or(f64::NAN);
    let d = b.denom().to_f64().unwrap_or(f64::NAN);
    n / d
}

impl<'a> Add<&'a CBig> for &'a CBig {
    type Output = CBig;
    fn add(self, o: &CBig) -> CBig {
        CBig {
            re: &self.re + &o.re,
            im: &self.im + &o.im,
        }
    }
}

impl<'a> Sub<&'a CBig> for &'a CBig {
    type Output = CBig;
    fn sub(self, o: &CBig) -> CBig {
        CBig {
            re: &self.re - &o.re,
            im: &self.im - &o.im,
        }
    }
}

impl<'a> Mul<&'a CBig> for &'a CBig {
    type Output = CBig;
    fn mul(self, o: &CBig) -> CBig {
        CBig {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
}

impl Neg for &CBig {
    type Output = CBig;
    fn neg(self) -> CBig {
        CBig {
            re: -&self.re,
            im: -&self.im,
        }
    }
}

/// Dense polynomial, coefficients from the constant term up.
type Poly = Vec<CBig>;

fn trim(mut p: Poly) -> Poly {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

fn degree(p: &Poly) -> usize {
    p.len().saturating_sub(1)
}

fn derivative(p: &Poly) -> Poly {
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(j, c)| c.scale(j as i64))
        .collect()
}

fn monic(p: &Poly) -> Poly {
    let lead = p.last().expect("nonzero polynomial").inv();
    p.iter().map(|c| c * &lead).collect()
}

fn divrem(a: &Poly, b: &Poly) -> (Poly, Poly) {
    let mut r = a.clone();
    let db = degree(b);
    if r.len() < b.len() {
        return (vec![], trim(r));
    }
    let lead_inv = b[db].inv();
    let mut q = vec![CBig::zero(); r.len() - db];
    for k in (0..q.len()).rev() {
        let c = &r[k + db] * &lead_inv;
        if !c.is_zero() {
            for (j, bj) in b.iter().enumerate() {
                r[k + j] = &r[k + j] - &(&c * bj);
            }
        }
        q[k] = c;
    }
    (trim(q), trim(r))
}

fn gcd(a: &Poly, b: &Poly) -> Poly {
    let (mut a, mut b) = (trim(a.clone()), trim(b.clone()));
    while !b.is_empty() {
        let (_, r) = divrem(&a, &b);
        a = b;
        b = r;
    }
    monic(&a)
}

fn eval(p: &Poly, z: &CBig) -> CBig {
    let mut acc = CBig::zero();
    for c in p.iter().rev() {
        acc = &(&acc * z) + c;
    }
    acc
}

/// Yun's algorithm: `p = lead · Π f_i^i` with each `f_i` square-free and monic.
fn square_free(p: &Poly) -> Vec<(Poly, u32)> {
    let p = monic(p);
    let dp = derivative(&p);
    let mut a = gcd(&p, &dp);
    let mut b = divrem(&p, &a).0;
    let mut c = divrem(&dp, &a).0;
    let mut d = trim(
        c.iter()
            .zip(
                derivative(&b)
                    .iter()
                    .chain(std::iter::repeat(&CBig::zero())),
            )
            .map(|(x, y)| x - y)
            .collect(),
    );
    let mut out = Vec::new();
    let mut i = 1;
    while degree(&b) > 0 {
        a = gcd(&b, &d);
        if degree(&a) > 0 {
            out.push((a.clone(), i));
        }
        b = divrem(&b, &a).0;
        c = divrem(&d, &a).0;
        d = sub_poly(&c, &derivative(&b));
        i += 1;
    }
    out
}

fn sub_poly(a: &Poly, b: &Poly) -> Poly {
    let n = a.len().max(b.len());
    let z = CBig::zero();
    trim(
        (0..n)
            .map(|k| a.get(k).unwrap_or(&z) - b.get(k).unwrap_or(&z))
            .collect(),
    )
}

fn companion_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    if n == 0 {
        return vec![];
    }
    if n == 1 {
        return vec![-coeffs[0] / coeffs[1]];
    }
    let lead = coeffs[n];
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for j in 0..n {
        m[(0, j)] = -coeffs[n - 1 - j] / lead;
    }
    for i in 1..n {
        m[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    match m.clone().schur().eigenvalues() {
        Some(ev) => ev.iter().copied().collect(),
        None => {
            let (_, t) = m.schur().unpack();
            (0..n).map(|i| t[(i, i)]).collect()
        }
    }
}

fn eval_f64(p: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut v = Complex64::new(0.0, 0.0);
    let mut d = Complex64::new(0.0, 0.0);
    for c in p.iter().rev() {
        d = d * z + v;
        v = v * z + c;
    }
    (v, d)
}

fn polish(p: &[Complex64], mut z: Complex64) -> Complex64 {
    for _ in 0..4 {
        let (v, d) = eval_f64(p, z);
        if d.norm() == 0.0 {
            break;
        }
        let step = v / d;
        if !step.is_finite() || step.norm() > 1e-3 * (1.0 + z.norm()) {
            break;
        }
        z -= step;
        if step.norm() <= 1e-17 * (1.0 + z.norm()) {
            break;
        }
    }
    z
}

/// One root with its multiplicity.
#[derive(Clone, Debug, PartialEq)]
pub struct Root {
    /// Exact value when the root was verified to be complex-rational.
    pub exact: Option<Exponent>,
    pub approx: Complex64,
    pub multiplicity: u32,
}

impl Root {
    /// Exact value if known, otherwise the closest small-denominator rational.
    pub fn value(&self) -> Exponent {
        self.exact
            .unwrap_or_else(|| Exponent::approximate(self.approx))
    }
}

/// All roots of `Σ coeffs[j] z^j`. The caller guarantees a nonzero leading coefficient.
pub fn find_roots(coeffs: &[Exponent], cluster_tol: f64) -> Vec<Root> {
    let p: Poly = trim(coeffs.iter().map(CBig::from_exponent).collect());
    if degree(&p) == 0 {
        return vec![];
    }
    let mut exact = Vec::new();
    let mut numeric: Vec<(Complex64, u32)> = Vec::new();
    for (factor, mult) in square_free(&p) {
        let f64s: Vec<Complex64> = factor.iter().map(CBig::to_complex).collect();
        for z in companion_roots(&f64s) {
            let z = polish(&f64s, z);
            let candidate = Exponent::approximate(z);
            let verified = eval(&factor, &CBig::from_exponent(&candidate)).is_zero();
            if verified {
                exact.push(Root {
                    exact: Some(candidate),
                    approx: candidate.to_complex(),
                    multiplicity: mult,
                });
            } else if degree(&factor) == 1 {
                let r = (-&factor[0]).div(&factor[1]);
                match r.to_exponent() {
                    Some(e) => exact.push(Root {
                        exact: Some(e),
                        approx: e.to_complex(),
                        multiplicity: mult,
                    }),
                    None => numeric.push((r.to_complex(), mult)),
                }
            } else {
                numeric.push((z, mult));
            }
        }
    }
    let mut roots = exact;
    roots.extend(cluster(&p, numeric, cluster_tol));
    roots.sort_by(|a, b| {
        a.approx
            .re
            .total_cmp(&b.approx.re)
            .then(a.approx.im.total_cmp(&b.approx.im))
    });
    roots
}

fn single_linkage(points: &[Complex64], tol: impl Fn(Complex64) -> f64) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn find(l: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while l[r] != r {
            r = l[r];
        }
        l[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if (points[i] - points[j]).norm() <= tol(points[i]) {
                let (a, b) = (find(&mut label, i), find(&mut label, j));
                label[a] = b;
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut index_of = std::collections::BTreeMap::new();
    for i in 0..n {
        let r = find(&mut label, i);
        let g = *index_of.entry(r).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[g].push(i);
    }
    groups
}

/// Merge numeric roots that lie within `tol` of each other. Groups that look
/// close at a coarse scale are re-solved from the exact Taylor expansion of the
/// full polynomial at their centroid, which separates genuine clusters from
/// merely nearby simple roots.
fn cluster(p: &Poly, roots: Vec<(Complex64, u32)>, tol: f64) -> Vec<Root> {
    let coarse = (tol * 1e3).max(1e-6);
    let points: Vec<Complex64> = roots.iter().map(|r| r.0).collect();
    let mut out = Vec::new();
    for group in single_linkage(&points, |z| coarse * (1.0 + z.norm())) {
        let m: u32 = group.iter().map(|&i| roots[i].1).sum();
        let centroid = group
            .iter()
            .map(|&i| roots[i].0 * roots[i].1 as f64)
            .sum::<Complex64>()
            / m as f64;
        if group.len() == 1 {
            out.push(Root {
                exact: None,
                approx: roots[group[0]].0,
                multiplicity: m,
            });
            continue;
        }
        let local = local_roots(p, centroid, m as usize);
        let weights = vec![1u32; local.len()];
        for sub in single_linkage(&local, |_| tol) {
            let k: u32 = sub.iter().map(|&i| weights[i]).sum();
            let z = sub.iter().map(|&i| local[i]).sum::<Complex64>() / sub.len() as f64;
            out.push(snap(p, z).unwrap_or(Root {
                exact: None,
                approx: z,
                multiplicity: k,
            }));
        }
    }
    out
}

/// Exact root near `z`, with its exact multiplicity, if there is one.
fn snap(p: &Poly, z: Complex64) -> Option<Root> {
    let e = Exponent::approximate(z);
    let eb = CBig::from_exponent(&e);
    let mut q = p.clone();
    let mut mult = 0;
    while !q.is_empty() && eval(&q, &eb).is_zero() {
        mult += 1;
        q = derivative(&q);
    }
    (mult > 0).then(|| Root {
        exact: Some(e),
        approx: e.to_complex(),
        multiplicity: mult,
    })
}

/// The `m` roots of `p` nearest `c`, from the degree-`m` Taylor truncation at `c`.
fn local_roots(p: &Poly, c: Complex64, m: usize) -> Vec<Complex64> {
    let Some(cb) = CBig::from_complex(c) else {
        return vec![c; m];
    };
    // Taylor coefficients via repeated synthetic division.
    let mut work = p.clone();
    let mut taylor = Vec::with_capacity(m + 1);
    for _ in 0..=m {
        let mut acc = CBig::zero();
        let mut quotient = vec![CBig::zero(); work.len().saturating_sub(1)];
        for k in (0..work.len()).rev() {
            let next = &(&acc * &cb) + &work[k];
            if k > 0 {
                quotient[k - 1] = next.clone();
            }
            acc = next;
        }
        taylor.push(acc.to_complex());
        work = quotient;
    }
    let t_m = taylor[m];
    let rho = (0..m)
        .map(|k| (taylor[k] / t_m).norm().powf(1.0 / (m - k) as f64))
        .fold(0.0f64, f64::max);
    if rho == 0.0 || !rho.is_finite() {
        return vec![c; m];
    }
    let scaled: Vec<Complex64> = (0..=m)
        .map(|k| taylor[k] * rho.powi(k as i32) / (t_m * rho.powi(m as i32)))
        .collect();
    companion_roots(&scaled)
        .into_iter()
        .map(|u| polish(&scaled, u) * rho + c)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(c: &[i64]) -> Vec<Exponent> {
        c.iter().map(|&k| Exponent::int(k)).collect()
    }

    #[test]
    fn rational_roots_are_exact() {
        // z²(z+1) = z³ + z²
        let roots = find_roots(&ints(&[0, 0, 1, 1]), CLUSTER_TOL);
        assert_eq!(roots.len(), 2);
        assert_eq!(roots[0].exact, Some(Exponent::int(-1)));
        assert_eq!(roots[0].multiplicity, 1);
        assert_eq!(roots[1].exact, Some(Exponent::int(0)));
        assert_eq!(roots[1].multiplicity, 2);
    }

    #[test]
    fn fractional_and_complex_roots() {
        // (3z - 1)(z - i) = 3z² - (1 + 3i) z + i
        let i = Exponent::new(Q::from_integer(0), Q::from_integer(1));
        let coeffs = vec![
            i,
            -(Exponent::int(1) + i.scale(Q::from_integer(3))),
            Exponent::int(3),
        ];
        let roots = find_roots(&coeffs, CLUSTER_TOL);
        let vals: Vec<Exponent> = roots.iter().map(|r| r.exact.unwrap()).collect();
        assert!(vals.contains(&Exponent::ratio(1, 3)));
        assert!(vals.contains(&i));
    }

    #[test]
    fn irrational_double_root_multiplicity_is_exact() {
        // (z² - 2)² = z⁴ - 4z² + 4
        let roots = find_roots(&ints(&[4, 0, -4, 0, 1]), CLUSTER_TOL);
        assert_eq!(roots.len(), 2);
        assert!(roots
            .iter()
            .all(|r| r.multiplicity == 2 && r.exact.is_none()));
        assert!((roots[1].approx.re - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn perturbed_double_root_clusters() {
        // z² - 2z + 1 + δ with δ = 1.25e-19: roots 1 ± 3.5e-10 i.
        let c = Exponent::real(Q::new(8_000_000_000_000_000_001, 8_000_000_000_000_000_000));
        let roots = find_roots(&[c, Exponent::int(-2), Exponent::int(1)], CLUSTER_TOL);
        assert_eq!(roots.len(), 1);
        assert_eq!(roots[0].multiplicity, 2);
        assert!((roots[0].approx - Complex64::new(1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn well_separated_close_roots_stay_distinct() {
        // (z - 1)(z - 1 - 1e-6) is exact and rational: two simple roots.
        let d = Exponent::real(Q::new(1, 1_000_000));
        let one = Exponent::int(1);
        let coeffs = vec![one * (one + d), -(one + one + d), one];
        let roots = find_roots(&coeffs, CLUSTER_TOL);
        assert_eq!(roots.len(), 2);
        assert!(roots
            .iter()
            .all(|r| r.multiplicity == 1 && r.exact.is_some()));
    }
}
