//! Property tests for the index algebra, the weight split and the fitter.

use proptest::prelude::*;

use bcalc::b_calculus::{indicial, split_spec, BDiffOp, WeightParameter};
use bcalc::phg_numeric::{fit_expansion, FitOptions, GeometricGrid, Sampled1D};
use bcalc::{Exponent, IndexEntry, IndexSet, InfRe, Q};

fn exponent() -> impl Strategy<Value = Exponent> {
    (-8i64..=8, 1i64..=4, 0i64..=1)
        .prop_map(|(n, d, im)| Exponent::new(Q::new(n, d), Q::from_integer(im)))
}

fn entry() -> impl Strategy<Value = IndexEntry> {
    (exponent(), 0u32..=2).prop_map(|(z, p)| IndexEntry::new(z, p))
}

fn index_set() -> impl Strategy<Value = IndexSet> {
    prop::collection::vec(entry(), 0..4).prop_map(IndexSet::complete)
}

fn min_inf(a: InfRe, b: InfRe) -> InfRe {
    a.min(b)
}

fn bound() -> Q {
    Q::from_integer(6)
}

proptest! {
    #[test]
    fn extended_union_is_commutative(a in index_set(), b in index_set()) {
        prop_assert_eq!(a.extended_union(&b), b.extended_union(&a));
    }

    #[test]
    fn extended_union_is_associative(a in index_set(), b in index_set(), c in index_set()) {
        let l = a.extended_union(&b).extended_union(&c);
        let r = a.extended_union(&b.extended_union(&c));
        prop_assert_eq!(l.truncate(bound()), r.truncate(bound()));
    }

    #[test]
    fn extended_union_contains_union(a in index_set(), b in index_set()) {
        let e = a.extended_union(&b);
        for m in a.union(&b).truncate(bound()) {
            prop_assert!(e.contains(&m));
        }
        prop_assert_eq!(e.inf_re(), min_inf(a.inf_re(), b.inf_re()));
    }

    #[test]
    fn sum_is_commutative_and_adds_infima(a in index_set(), b in index_set()) {
        prop_assert_eq!(a.sum(&b), b.sum(&a));
        if !a.is_empty() && !b.is_empty() {
            prop_assert_eq!(a.sum(&b).inf_re(), a.inf_re() + b.inf_re());
        }
    }

    #[test]
    fn completion_is_idempotent(a in index_set()) {
        prop_assert_eq!(IndexSet::complete(a.generators().iter().copied()), a.clone());
        prop_assert_eq!(IndexSet::complete(a.truncate(bound())).truncate(bound()), a.truncate(bound()));
    }

    #[test]
    fn members_are_closed_under_shift_and_log_decrease(a in index_set()) {
        for m in a.truncate(bound()) {
            prop_assert!(a.contains(&IndexEntry::new(m.z + Exponent::int(1), m.p)));
            if m.p > 0 {
                prop_assert!(a.contains(&IndexEntry::new(m.z, m.p - 1)));
            }
        }
    }
}

/// Coefficients of `Π (z − r)^m`, constant term first.
fn expand(roots: &[(Exponent, u32)]) -> Vec<Exponent> {
    let mut c = vec![Exponent::int(1)];
    for &(r, m) in roots {
        for _ in 0..m {
            let mut next = vec![Exponent::int(0); c.len() + 1];
            for (i, a) in c.iter().enumerate() {
                next[i + 1] = next[i + 1] + *a;
                next[i] = next[i] - *a * r;
            }
            c = next;
        }
    }
    c
}

fn distinct_roots() -> impl Strategy<Value = Vec<(Exponent, u32)>> {
    prop::collection::btree_map(exponent(), 1u32..=2, 1..4).prop_map(|m| m.into_iter().collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn split_recovers_spec_b(roots in distinct_roots(), g in -20i64..=20) {
        let gamma = WeightParameter::new(Q::new(4 * g + 1, 48));
        let data = indicial(&BDiffOp::from_polynomial(&expand(&roots)).unwrap()).unwrap();
        let (lb, rb) = split_spec(&data, &gamma).unwrap();
        for e in &data.spec_b {
            if e.z.re > gamma.gamma {
                prop_assert!(lb.contains(e));
            } else {
                prop_assert!(rb.contains(&IndexEntry::new(-e.z, e.p)));
            }
        }
        for g in lb.generators() {
            prop_assert!(data.spec_b.contains(g));
        }
        for g in rb.generators() {
            prop_assert!(data.spec_b.contains(&IndexEntry::new(-g.z, g.p)));
        }
    }

    #[test]
    fn split_is_locally_constant(roots in distinct_roots(), g in -20i64..=20) {
        // Root real parts are multiples of 1/12; both weights lie strictly between g/12 and (g+1)/12.
        let data = indicial(&BDiffOp::from_polynomial(&expand(&roots)).unwrap()).unwrap();
        let a = split_spec(&data, &WeightParameter::new(Q::new(4 * g + 1, 48))).unwrap();
        let b = split_spec(&data, &WeightParameter::new(Q::new(4 * g + 3, 48))).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn fit_recovers_planted_coefficients(c in prop::collection::vec(-2.0f64..2.0, 4)) {
        let grid = GeometricGrid::standard(0.5);
        let u = |x: f64| {
            let l = -x.ln();
            c[0] + c[1] * l + c[2] * x + c[3] * x * x * l + 0.3 * x.powi(4)
        };
        let samples = Sampled1D::from_fn(&grid.points, u);
        let fit = fit_expansion(&samples, &IndexSet::integers_with_logs(1), Q::from_integer(3), &FitOptions::default()).unwrap();
        let want = [(0, 0, c[0]), (0, 1, c[1]), (1, 0, c[2]), (1, 1, 0.0), (2, 0, 0.0), (2, 1, c[3])];
        for (z, p, v) in want {
            let got = fit.coeff(Q::from_integer(z), p).unwrap();
            prop_assert!((got - v).abs() < 1e-8, "({}, {}): {} vs {}", z, p, got, v);
        }
    }
}
