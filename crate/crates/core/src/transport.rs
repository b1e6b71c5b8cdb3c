//! Transport of index families along b-maps: pull-back, and push-forward of
//! b-densities to the half-line or to a general target.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::bmaps::{check_b_fibration, BMapDescriptor};
use crate::corner_geometry::{face_label, FaceLattice};
use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::index_algebra::{IndexFamily, IndexSet};

/// Default truncation bound for reports, `Re z ≤ 10`.
pub const DEFAULT_TRUNCATION: i64 = 10;

/// `f^#𝓕(G) = {(q + Σ_H e(G,H) z_H, Σ_H p_H)}` with `(z_H, p_H) ∈ 𝓕(H)` where
/// `e(G,H) ≠ 0` and `(0, 0)` elsewhere.
pub fn pull_back_family(f: &BMapDescriptor, family: &IndexFamily) -> Result<IndexFamily> {
    family.check_domain(f.target().bhs())?;
    let mut out = IndexFamily::new();
    for (i, g) in f.source().bhs().iter().enumerate() {
        let mut set = IndexSet::smooth();
        for (j, h) in f.target().bhs().iter().enumerate() {
            let e = f.exponents()[i][j];
            if e > 0 {
                let fh = family.get(h).expect("domain checked");
                set = set.sum(&fh.scale_exponents(e));
            }
        }
        out.insert(g.clone(), set);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FaceContribution {
    pub face: String,
    pub set: IndexSet,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransportReport<T> {
    pub result: T,
    pub integrability_ok: bool,
    pub violating_bhs: Vec<String>,
    /// The `Ẽ(F)` table, one row per proper face (prefixed by the target bhs
    /// for general targets).
    pub face_contributions: Vec<FaceContribution>,
}

impl<T> TransportReport<T> {
    /// Faces whose contribution carries a positive log power.
    pub fn log_sources(&self) -> Vec<&str> {
        self.face_contributions
            .iter()
            .filter(|c| c.set.generators().iter().any(|g| g.p > 0))
            .map(|c| c.face.as_str())
            .collect()
    }
}

fn column_push_forward(
    source: &FaceLattice,
    column: &[u32],
    family: &IndexFamily,
) -> (IndexSet, Vec<FaceContribution>) {
    let mut result = IndexSet::empty();
    let mut table = Vec::new();
    for (face, _) in source.proper_faces() {
        let mut contrib = IndexSet::empty();
        for g in &face {
            let i = source.bhs_index(g).expect("face of source");
            let e = column[i];
            if e > 0 {
                let eg = family.get(g).expect("domain checked");
                contrib = contrib.extended_union(&eg.divide(e));
            }
        }
        result = result.union(&contrib);
        table.push(FaceContribution {
            face: face_label(&face),
            set: contrib,
        });
    }
    (result, table)
}

/// Push-forward to `ℝ₊`. Integrability failures are reported, not raised.
pub fn push_forward_halfline(
    f: &BMapDescriptor,
    family: &IndexFamily,
) -> Result<TransportReport<IndexSet>> {
    if f.target().bhs().len() != 1 || f.target().dim() != 1 {
        return Err(Error::Argument(
            "push_forward_halfline needs the half-line as target".into(),
        ));
    }
    family.check_domain(f.source().bhs())?;
    let column = f.column(&f.target().bhs()[0])?;
    let violating: Vec<String> = f
        .source()
        .bhs()
        .iter()
        .zip(&column)
        .filter(|(g, &e)| e == 0 && !family.get(g).unwrap().inf_re().is_positive())
        .map(|(g, _)| g.clone())
        .collect();
    let (result, table) = column_push_forward(f.source(), &column, family);
    Ok(TransportReport {
        result,
        integrability_ok: violating.is_empty(),
        violating_bhs: violating,
        face_contributions: table,
    })
}

/// Push-forward along a b-fibration: `f_#𝓔(H) = (ρ_H ∘ f)_# 𝓔`.
pub fn push_forward_family(
    f: &BMapDescriptor,
    family: &IndexFamily,
) -> Result<TransportReport<IndexFamily>> {
    let check = check_b_fibration(f)?;
    if !check.is_b_fibration {
        let why = if check.codim_ok {
            "fibration over open faces is not asserted".to_string()
        } else {
            format!("faces {:?} map to codimension ≥ 2", check.violating_faces)
        };
        return Err(Error::NotBFibration(why));
    }
    family.check_domain(f.source().bhs())?;
    let violating: Vec<String> = f
        .source()
        .bhs()
        .iter()
        .zip(f.exponents())
        .filter(|(g, row)| {
            row.iter().all(|&e| e == 0) && !family.get(g).unwrap().inf_re().is_positive()
        })
        .map(|(g, _)| g.clone())
        .collect();
    let mut result = IndexFamily::new();
    let mut table = Vec::new();
    for h in f.target().bhs() {
        let column = f.column(h)?;
        let (set, rows) = column_push_forward(f.source(), &column, family);
        result.insert(h.clone(), set);
        table.extend(rows.into_iter().map(|c| FaceContribution {
            face: format!("{h}: {}", c.face),
            set: c.set,
        }));
    }
    Ok(TransportReport {
        result,
        integrability_ok: violating.is_empty(),
        violating_bhs: violating,
        face_contributions: table,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DensityDirection {
    /// From a plain density `u dx dy` to the coefficient of `dx/x dy/y`.
    ToB,
    FromB,
}

pub fn b_density_shift(family: &IndexFamily, direction: DensityDirection) -> IndexFamily {
    let c = match direction {
        DensityDirection::ToB => Exponent::int(1),
        DensityDirection::FromB => Exponent::int(-1),
    };
    family.map(|s| s.shift(c))
}

/// Truncate every set of a family at `Re z ≤ bound`, for reporting.
pub fn truncate_family(
    family: &IndexFamily,
    bound: crate::exponent::Q,
) -> BTreeMap<String, Vec<crate::index_algebra::IndexEntry>> {
    family
        .iter()
        .map(|(k, v)| (k.clone(), v.truncate(bound)))
        .collect()
}
