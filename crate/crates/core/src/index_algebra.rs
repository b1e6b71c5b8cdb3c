//! Index sets and index families.
//!
//! An index set is a subset of `ℂ × ℕ₀` that is closed under `(z, p) → (z + 1, p)`
//! and under lowering the log power `p`. Every set handled here is finitely
//! generated, so it is stored as its (unique) antichain of minimal generators:
//! `(z, p)` is a member iff some generator `(z₀, p₀)` has `z − z₀ ∈ ℕ₀` and
//! `p ≤ p₀`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Add;

use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;
use crate::exponent::{format_rational, parse_rational, Exponent, Q};

/// A single term `x^z log^p x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexEntry {
    pub z: Exponent,
    pub p: u32,
}

impl IndexEntry {
    pub fn new(z: Exponent, p: u32) -> Self {
        IndexEntry { z, p }
    }

    pub fn int(n: i64, p: u32) -> Self {
        IndexEntry {
            z: Exponent::int(n),
            p,
        }
    }

    /// Whether `self` lies in the closure of the single generator `gen`.
    pub fn implied_by(&self, gen: &IndexEntry) -> bool {
        self.p <= gen.p && matches!(self.z.integer_offset(&gen.z), Some(k) if k >= 0)
    }
}

impl fmt::Display for IndexEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.z, self.p)
    }
}

/// `inf {Re z}` of an index set, with `+∞` for the empty set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum InfRe {
    Finite(Q),
    PosInf,
}

impl InfRe {
    pub fn is_positive(&self) -> bool {
        match self {
            InfRe::Finite(q) => *q > Q::zero(),
            InfRe::PosInf => true,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            InfRe::Finite(q) => q.to_f64().unwrap_or(f64::NAN),
            InfRe::PosInf => f64::INFINITY,
        }
    }
}

impl Add for InfRe {
    type Output = InfRe;
    fn add(self, o: InfRe) -> InfRe {
        match (self, o) {
            (InfRe::Finite(a), InfRe::Finite(b)) => InfRe::Finite(a + b),
            _ => InfRe::PosInf,
        }
    }
}

impl fmt::Display for InfRe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InfRe::Finite(q) => write!(f, "{}", format_rational(q)),
            InfRe::PosInf => write!(f, "+inf"),
        }
    }
}

/// A finitely generated, completed index set.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct IndexSet {
    generators: Vec<IndexEntry>,
}

impl IndexSet {
    pub fn empty() -> Self {
        IndexSet::default()
    }

    /// The smooth index set `0 = {(n, 0) : n ∈ ℕ₀}`.
    pub fn smooth() -> Self {
        IndexSet {
            generators: vec![IndexEntry::int(0, 0)],
        }
    }

    /// `ℕ₀ × {0, …, p}`.
    pub fn integers_with_logs(p: u32) -> Self {
        IndexSet {
            generators: vec![IndexEntry::int(0, p)],
        }
    }

    /// Single generator `(z, p)`, completed.
    pub fn generated_by(z: Exponent, p: u32) -> Self {
        IndexSet {
            generators: vec![IndexEntry::new(z, p)],
        }
    }

    /// Smallest index set containing every entry of `entries`.
    pub fn complete<I: IntoIterator<Item = IndexEntry>>(entries: I) -> Self {
        let mut gens: Vec<IndexEntry> = entries.into_iter().collect();
        gens.sort();
        gens.dedup();
        let reduced: Vec<IndexEntry> = gens
            .iter()
            .filter(|g| !gens.iter().any(|h| h != *g && g.implied_by(h)))
            .copied()
            .collect();
        IndexSet {
            generators: reduced,
        }
    }

    pub fn generators(&self) -> &[IndexEntry] {
        &self.generators
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn contains(&self, e: &IndexEntry) -> bool {
        self.generators.iter().any(|g| e.implied_by(g))
    }

    /// Largest log power at exponent `z`, if `z` occurs at all.
    pub fn max_log_at(&self, z: &Exponent) -> Option<u32> {
        self.generators
            .iter()
            .filter(|g| matches!(z.integer_offset(&g.z), Some(k) if k >= 0))
            .map(|g| g.p)
            .max()
    }

    pub fn union(&self, other: &IndexSet) -> IndexSet {
        IndexSet::complete(self.generators.iter().chain(&other.generators).copied())
    }

    /// `E ∪̄ F = E ∪ F ∪ {(z, p' + p'' + 1) : (z, p') ∈ E, (z, p'') ∈ F}`.
    pub fn extended_union(&self, other: &IndexSet) -> IndexSet {
        let mut entries: Vec<IndexEntry> = self
            .generators
            .iter()
            .chain(&other.generators)
            .copied()
            .collect();
        // Two generators whose exponents differ by an integer share every exponent
        // from the larger one upward, carrying their full log powers there.
        for e in &self.generators {
            for f in &other.generators {
                if let Some(k) = e.z.integer_offset(&f.z) {
                    let z = if k >= 0 { e.z } else { f.z };
                    entries.push(IndexEntry::new(z, e.p + f.p + 1));
                }
            }
        }
        IndexSet::complete(entries)
    }

    /// `E + F = {(z + w, k + l)}`.
    pub fn sum(&self, other: &IndexSet) -> IndexSet {
        let mut entries = Vec::new();
        for e in &self.generators {
            for f in &other.generators {
                entries.push(IndexEntry::new(e.z + f.z, e.p + f.p));
            }
        }
        IndexSet::complete(entries)
    }

    pub fn inf_re(&self) -> InfRe {
        self.generators
            .iter()
            .map(|g| g.z.re)
            .min()
            .map_or(InfRe::PosInf, InfRe::Finite)
    }

    /// All members with `Re z ≤ bound`, sorted by `(Re z, Im z, p)`.
    pub fn truncate(&self, bound: Q) -> Vec<IndexEntry> {
        let mut out = Vec::new();
        for g in &self.generators {
            let mut k = 0i64;
            loop {
                let z = g.z + Exponent::int(k);
                if z.re > bound {
                    break;
                }
                for p in 0..=g.p {
                    out.push(IndexEntry::new(z, p));
                }
                k += 1;
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// Negated generators. The result is not closed, so it is returned raw.
    pub fn negate(&self) -> Vec<IndexEntry> {
        self.generators
            .iter()
            .map(|g| IndexEntry::new(-g.z, g.p))
            .collect()
    }

    /// `{(z + c, p)}`.
    pub fn shift(&self, c: Exponent) -> IndexSet {
        IndexSet::complete(
            self.generators
                .iter()
                .map(|g| IndexEntry::new(g.z + c, g.p)),
        )
    }

    /// `{(z / e, p) : (z, p) ∈ E}` for a positive integer `e`, completed.
    pub fn divide(&self, e: u32) -> IndexSet {
        assert!(e > 0, "division of an index set by zero");
        let scale = Q::new(1, e as i64);
        let mut entries = Vec::new();
        for g in &self.generators {
            for j in 0..e as i64 {
                entries.push(IndexEntry::new((g.z + Exponent::int(j)).scale(scale), g.p));
            }
        }
        IndexSet::complete(entries)
    }

    /// `{(e·z, p)}` completed by `ℕ₀`, i.e. the pull-back of `E` by `ρ ↦ ρ^e`.
    pub fn scale_exponents(&self, e: u32) -> IndexSet {
        let k = Q::from_integer(e as i64);
        IndexSet::complete(
            self.generators
                .iter()
                .map(|g| IndexEntry::new(g.z.scale(k), g.p)),
        )
    }

    /// Largest real part among generators plus one; truncating both sets there
    /// decides equality.
    pub fn comparison_bound(&self, other: &IndexSet) -> Q {
        self.generators
            .iter()
            .chain(&other.generators)
            .map(|g| g.z.re)
            .max()
            .unwrap_or_else(Q::zero)
            + Q::from_integer(1)
    }

    /// Equality decided on truncations, independent of the generator representation.
    pub fn same_members(&self, other: &IndexSet) -> bool {
        let n = self.comparison_bound(other);
        self.truncate(n) == other.truncate(n)
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.generators.is_empty() {
            return write!(f, "∅");
        }
        write!(f, "⟨")?;
        for (i, g) in self.generators.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{g}")?;
        }
        write!(f, "⟩")
    }
}

#[derive(Serialize, Deserialize)]
pub(crate) struct EntryJson {
    pub re: String,
    #[serde(default = "zero_string")]
    pub im: String,
    #[serde(default)]
    pub p: u32,
}

fn zero_string() -> String {
    "0".to_string()
}

impl From<&IndexEntry> for EntryJson {
    fn from(e: &IndexEntry) -> Self {
        EntryJson {
            re: format_rational(&e.z.re),
            im: format_rational(&e.z.im),
            p: e.p,
        }
    }
}

impl TryFrom<&EntryJson> for IndexEntry {
    type Error = Error;
    fn try_from(j: &EntryJson) -> Result<Self, Error> {
        Ok(IndexEntry::new(
            Exponent::new(parse_rational(&j.re)?, parse_rational(&j.im)?),
            j.p,
        ))
    }
}

impl Serialize for IndexEntry {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        EntryJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for IndexEntry {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = EntryJson::deserialize(d)?;
        IndexEntry::try_from(&j).map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct IndexSetJson {
    generators: Vec<IndexEntry>,
}

impl Serialize for IndexSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        IndexSetJson {
            generators: self.generators.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for IndexSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = IndexSetJson::deserialize(d)?;
        Ok(IndexSet::complete(j.generators))
    }
}

/// An index set per boundary hypersurface.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IndexFamily {
    sets: BTreeMap<String, IndexSet>,
}

impl IndexFamily {
    pub fn new() -> Self {
        IndexFamily::default()
    }

    pub fn from_pairs<S: Into<String>, I: IntoIterator<Item = (S, IndexSet)>>(pairs: I) -> Self {
        IndexFamily {
            sets: pairs.into_iter().map(|(k, v)| (k.into(), v)).collect(),
        }
    }

    /// The same index set on every listed hypersurface.
    pub fn uniform<S: AsRef<str>>(names: &[S], set: &IndexSet) -> Self {
        Self::from_pairs(names.iter().map(|n| (n.as_ref().to_string(), set.clone())))
    }

    pub fn insert(&mut self, name: impl Into<String>, set: IndexSet) {
        self.sets.insert(name.into(), set);
    }

    pub fn get(&self, name: &str) -> Option<&IndexSet> {
        self.sets.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &String> {
        self.sets.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &IndexSet)> {
        self.sets.iter()
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Check the domain is exactly `names`.
    pub fn check_domain<S: AsRef<str>>(&self, names: &[S]) -> Result<(), Error> {
        let mut want: Vec<&str> = names.iter().map(|s| s.as_ref()).collect();
        want.sort_unstable();
        let have: Vec<&str> = self.sets.keys().map(|s| s.as_str()).collect();
        if want != have {
            return Err(Error::Argument(format!(
                "index family defined on {have:?}, lattice has boundary hypersurfaces {want:?}"
            )));
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(&IndexSet) -> IndexSet) -> IndexFamily {
        IndexFamily {
            sets: self.sets.iter().map(|(k, v)| (k.clone(), f(v))).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Q {
        Q::new(n, d)
    }

    fn e(n: i64, d: i64, p: u32) -> IndexEntry {
        IndexEntry::new(Exponent::ratio(n, d), p)
    }

    #[test]
    fn union_examples() {
        let one = IndexSet::complete([IndexEntry::int(1, 0)]);
        assert_eq!(IndexSet::empty().union(&one), one);
        let zero = IndexSet::smooth();
        assert_eq!(zero.union(&zero), zero);
        let u = zero.union(&IndexSet::complete([e(1, 2, 0)]));
        assert_eq!(u.generators(), &[e(0, 1, 0), e(1, 2, 0)]);
    }

    #[test]
    fn union_absorbs_implied_generators() {
        let u = IndexSet::smooth().union(&IndexSet::complete([IndexEntry::int(3, 0)]));
        assert_eq!(u, IndexSet::smooth());
    }

    #[test]
    fn extended_union_examples() {
        let f = IndexSet::complete([e(1, 3, 2)]);
        assert_eq!(IndexSet::empty().extended_union(&f), f);
        let z = IndexSet::smooth();
        assert_eq!(z.extended_union(&z), IndexSet::integers_with_logs(1));
        let c = IndexSet::generated_by(Exponent::ratio(2, 5), 0);
        let cc = c.extended_union(&c);
        assert_eq!(cc.generators(), &[e(2, 5, 1)]);
        assert_eq!(
            cc.truncate(q(7, 5)),
            vec![e(2, 5, 0), e(2, 5, 1), e(7, 5, 0), e(7, 5, 1)]
        );
    }

    #[test]
    fn extended_union_at_shifted_exponents() {
        // E = {(0,0)}, F = {(2,1)}: shared exponents start at 2, log power 0+1+1.
        let a = IndexSet::smooth();
        let b = IndexSet::complete([IndexEntry::int(2, 1)]);
        let u = a.extended_union(&b);
        assert_eq!(
            u.generators(),
            &[IndexEntry::int(0, 0), IndexEntry::int(2, 2)]
        );
        // Non-integer offset: no cross terms.
        let c = IndexSet::complete([e(1, 2, 0)]);
        assert_eq!(a.extended_union(&c), a.union(&c));
    }

    #[test]
    fn sum_examples() {
        let z = IndexSet::smooth();
        assert_eq!(z.sum(&z), z);
        let c = IndexSet::complete([e(3, 7, 0)]);
        assert_eq!(c.sum(&z), c);
        let s = IndexSet::complete([e(1, 2, 1)]).sum(&IndexSet::complete([e(1, 3, 2)]));
        assert_eq!(s.generators(), &[e(5, 6, 3)]);
    }

    #[test]
    fn complete_examples() {
        assert!(IndexSet::complete([]).is_empty());
        assert_eq!(
            IndexSet::complete([IndexEntry::int(0, 0)]),
            IndexSet::smooth()
        );
        let s = IndexSet::complete([IndexEntry::int(-1, 0), IndexEntry::int(0, 1)]);
        assert_eq!(
            s.generators(),
            &[IndexEntry::int(-1, 0), IndexEntry::int(0, 1)]
        );
        // (1,0) is implied by (0,1).
        let s = IndexSet::complete([IndexEntry::int(1, 0), IndexEntry::int(0, 1)]);
        assert_eq!(s.generators(), &[IndexEntry::int(0, 1)]);
    }

    #[test]
    fn inf_examples() {
        let s = IndexSet::complete([IndexEntry::int(2, 0), IndexEntry::int(3, 1)]);
        assert_eq!(s.inf_re(), InfRe::Finite(q(2, 1)));
        assert_eq!(IndexSet::empty().inf_re(), InfRe::PosInf);
        assert!(IndexSet::empty().inf_re().is_positive());
        let s = IndexSet::complete([IndexEntry::int(-1, 0), e(1, 2, 0)]);
        assert_eq!(s.inf_re(), InfRe::Finite(q(-1, 1)));
    }

    #[test]
    fn truncate_examples() {
        assert_eq!(
            IndexSet::smooth().truncate(q(2, 1)),
            vec![
                IndexEntry::int(0, 0),
                IndexEntry::int(1, 0),
                IndexEntry::int(2, 0)
            ]
        );
        assert!(IndexSet::empty().truncate(q(100, 1)).is_empty());
        assert_eq!(
            IndexSet::complete([e(1, 2, 1)]).truncate(q(5, 2)),
            vec![
                e(1, 2, 0),
                e(1, 2, 1),
                e(3, 2, 0),
                e(3, 2, 1),
                e(5, 2, 0),
                e(5, 2, 1)
            ]
        );
    }

    #[test]
    fn truncate_ignores_imaginary_part_in_bound() {
        let z = Exponent::new(q(0, 1), q(100, 1));
        let s = IndexSet::generated_by(z, 0);
        assert_eq!(s.truncate(q(1, 1)).len(), 2);
    }

    #[test]
    fn negate_examples() {
        let c = Exponent::new(q(2, 1), q(1, 1));
        assert_eq!(
            IndexSet::generated_by(c, 0).negate(),
            vec![IndexEntry::new(-c, 0)]
        );
        assert!(IndexSet::empty().negate().is_empty());
        let s = IndexSet::complete([IndexEntry::int(1, 0), IndexEntry::int(2, 1)]);
        assert_eq!(
            s.negate(),
            vec![IndexEntry::int(-1, 0), IndexEntry::int(-2, 1)]
        );
    }

    #[test]
    fn divide_spreads_residues() {
        let s = IndexSet::complete([IndexEntry::int(1, 0)]).divide(2);
        assert_eq!(s.generators(), &[e(1, 2, 0), e(1, 1, 0)]);
        let members = s.truncate(q(2, 1));
        assert_eq!(
            members,
            vec![e(1, 2, 0), e(1, 1, 0), e(3, 2, 0), e(2, 1, 0)]
        );
    }

    #[test]
    fn json_round_trip_and_schema() {
        let s = IndexSet::complete([
            e(1, 2, 1),
            IndexEntry::new(Exponent::new(q(0, 1), q(-1, 3)), 0),
        ]);
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(
            j,
            r#"{"generators":[{"re":"0","im":"-1/3","p":0},{"re":"1/2","im":"0","p":1}]}"#
        );
        let back: IndexSet = serde_json::from_str(&j).unwrap();
        assert_eq!(back, s);
        // Raw input is completed on load.
        let raw: IndexSet =
            serde_json::from_str(r#"{"generators":[{"re":"1","p":0},{"re":"0"}]}"#).unwrap();
        assert_eq!(raw, IndexSet::smooth());
    }

    #[test]
    fn family_domain_check() {
        let fam = IndexFamily::uniform(&["lb", "ff", "rb"], &IndexSet::smooth());
        assert!(fam.check_domain(&["rb", "lb", "ff"]).is_ok());
        assert!(fam.check_domain(&["lb", "ff"]).is_err());
    }
}
