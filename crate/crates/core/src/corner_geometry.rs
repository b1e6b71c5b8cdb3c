//! Manifolds with corners as face lattices, and blow-up of boundary faces.
//!
//! A face is identified with the set of boundary hypersurfaces (bhs) whose
//! intersection it is; the empty set is the whole space.
//!
//! Blowing up the face `C` and naming the front face `ff`:
//! * R1: a set `T` of old bhs stays a face iff `T` was a face and `T ⊉ C`;
//! * R2: `T ∪ {ff}` is a face iff `T ∪ C` was a face and `T ⊉ C`.
//!
//! Lifted faces keep their codimension, faces meeting `ff` get `|T| + 1`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::bmaps::BMapDescriptor;
use crate::error::{Error, Result};

pub type Face = BTreeSet<String>;

pub fn face<S: AsRef<str>>(names: &[S]) -> Face {
    names.iter().map(|s| s.as_ref().to_string()).collect()
}

pub fn face_label(f: &Face) -> String {
    if f.is_empty() {
        "interior".to_string()
    } else {
        f.iter().cloned().collect::<Vec<_>>().join("∩")
    }
}

/// An interior p-submanifold recorded by name and the bhs it meets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub name: String,
    pub meets: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FaceLattice {
    dim: usize,
    bhs: Vec<String>,
    faces: BTreeMap<Face, usize>,
    annotations: Vec<Annotation>,
}

impl FaceLattice {
    /// Build from explicit data, checking the lattice invariants.
    pub fn new(dim: usize, bhs: Vec<String>, faces: BTreeMap<Face, usize>) -> Result<Self> {
        let names: BTreeSet<&String> = bhs.iter().collect();
        if names.len() != bhs.len() {
            return Err(Error::Argument(
                "duplicate boundary hypersurface names".into(),
            ));
        }
        if faces.get(&Face::new()) != Some(&0) {
            return Err(Error::Argument(
                "the whole space must be a face of codimension 0".into(),
            ));
        }
        for h in &bhs {
            if faces.get(&face(&[h])) != Some(&1) {
                return Err(Error::Argument(format!(
                    "bhs `{h}` must be a face of codimension 1"
                )));
            }
        }
        for (f, &c) in &faces {
            if c > dim {
                return Err(Error::Argument(format!(
                    "face {} has codimension {c} > dimension {dim}",
                    face_label(f)
                )));
            }
            if f.iter().any(|h| !names.contains(h)) {
                return Err(Error::Argument(format!(
                    "face {} uses unknown bhs",
                    face_label(f)
                )));
            }
            for h in f {
                let mut sub = f.clone();
                sub.remove(h);
                if !faces.contains_key(&sub) {
                    return Err(Error::Argument(format!(
                        "faces are not downward closed: {} is missing",
                        face_label(&sub)
                    )));
                }
            }
        }
        Ok(FaceLattice {
            dim,
            bhs,
            faces,
            annotations: Vec::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bhs(&self) -> &[String] {
        &self.bhs
    }

    pub fn bhs_index(&self, name: &str) -> Option<usize> {
        self.bhs.iter().position(|h| h == name)
    }

    pub fn is_face(&self, f: &Face) -> bool {
        self.faces.contains_key(f)
    }

    /// All faces, ordered by codimension and then by name.
    pub fn faces(&self) -> Vec<(Face, usize)> {
        let mut v: Vec<(Face, usize)> = self.faces.iter().map(|(f, c)| (f.clone(), *c)).collect();
        v.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
        v
    }

    /// Faces other than the whole space.
    pub fn proper_faces(&self) -> Vec<(Face, usize)> {
        self.faces()
            .into_iter()
            .filter(|(f, _)| !f.is_empty())
            .collect()
    }

    pub fn codim(&self, f: &Face) -> Result<usize> {
        self.faces
            .get(f)
            .copied()
            .ok_or_else(|| Error::Argument(format!("{} is not a face", face_label(f))))
    }

    pub fn annotations(&self) -> &[Annotation] {
        &self.annotations
    }

    pub fn annotate(mut self, name: &str, meets: &[&str]) -> Self {
        self.annotations.push(Annotation {
            name: name.to_string(),
            meets: meets.iter().map(|s| s.to_string()).collect(),
        });
        self
    }

    /// Same dimension, bhs list and faces (annotations are ignored).
    pub fn same_shape(&self, other: &FaceLattice) -> bool {
        self.dim == other.dim && self.bhs == other.bhs && self.faces == other.faces
    }

    /// Rename bhs; names absent from `map` are kept.
    pub fn renamed(&self, map: &BTreeMap<String, String>) -> FaceLattice {
        let r = |h: &String| map.get(h).cloned().unwrap_or_else(|| h.clone());
        FaceLattice {
            dim: self.dim,
            bhs: self.bhs.iter().map(r).collect(),
            faces: self
                .faces
                .iter()
                .map(|(f, c)| (f.iter().map(r).collect(), *c))
                .collect(),
            annotations: self
                .annotations
                .iter()
                .map(|a| Annotation {
                    name: a.name.clone(),
                    meets: a.meets.iter().map(r).collect(),
                })
                .collect(),
        }
    }
}

pub fn rename_map(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
    pairs
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect()
}

/// `[0,∞)^k × ℝ^{n−k}` with bhs `H1, …, Hk`.
pub fn model_quadrant(k: usize, n: usize) -> Result<FaceLattice> {
    if k > n {
        return Err(Error::Argument(format!(
            "model_quadrant needs k ≤ n, got k={k}, n={n}"
        )));
    }
    let bhs: Vec<String> = (1..=k).map(|i| format!("H{i}")).collect();
    let mut faces = BTreeMap::new();
    for mask in 0u32..(1u32 << k) {
        let f: Face = (0..k)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| bhs[i].clone())
            .collect();
        let c = f.len();
        faces.insert(f, c);
    }
    FaceLattice::new(n, bhs, faces)
}

#[derive(Clone, Debug)]
pub struct BlowupRecord {
    pub base: FaceLattice,
    pub center: Face,
    pub result: FaceLattice,
    pub front_face: String,
    pub blowdown: BMapDescriptor,
}

impl BlowupRecord {
    /// Rename bhs of the blown-up space (the base keeps its names).
    pub fn rename_result(&self, map: &BTreeMap<String, String>) -> BlowupRecord {
        let result = self.result.renamed(map);
        let front_face = map
            .get(&self.front_face)
            .cloned()
            .unwrap_or_else(|| self.front_face.clone());
        let blowdown = BMapDescriptor::new(
            result.clone(),
            self.base.clone(),
            self.blowdown.exponents().to_vec(),
            self.blowdown.fibration_on_faces(),
        )
        .expect("renaming keeps the matrix shape");
        BlowupRecord {
            base: self.base.clone(),
            center: self.center.clone(),
            result,
            front_face,
            blowdown,
        }
    }
}

pub fn blow_up_face(z: &FaceLattice, center: &Face, name: &str) -> Result<BlowupRecord> {
    let c = z.codim(center)?;
    if c < 2 {
        return Err(Error::Argument(format!(
            "blow-up center {} has codimension {c}; nothing to blow up",
            face_label(center)
        )));
    }
    if z.bhs_index(name).is_some() {
        return Err(Error::Argument(format!(
            "front face name `{name}` already in use"
        )));
    }
    let mut faces = BTreeMap::new();
    for (t, &ct) in &z.faces {
        if t.is_superset(center) {
            continue;
        }
        faces.insert(t.clone(), ct);
        let with_center: Face = t.union(center).cloned().collect();
        if z.is_face(&with_center) {
            let mut tf = t.clone();
            tf.insert(name.to_string());
            faces.insert(tf, t.len() + 1);
        }
    }
    let mut bhs = z.bhs.clone();
    bhs.push(name.to_string());
    let mut result = FaceLattice::new(z.dim, bhs, faces)?;
    result.annotations = z.annotations.clone();

    let n_old = z.bhs.len();
    let mut e = vec![vec![0u32; n_old]; n_old + 1];
    for (i, row) in e.iter_mut().enumerate().take(n_old) {
        row[i] = 1;
    }
    for (j, h) in z.bhs.iter().enumerate() {
        if center.contains(h) {
            e[n_old][j] = 1;
        }
    }
    let blowdown = BMapDescriptor::new(result.clone(), z.clone(), e, false)?;
    Ok(BlowupRecord {
        base: z.clone(),
        center: center.clone(),
        result,
        front_face: name.to_string(),
        blowdown,
    })
}

/// `X²_b`: the corner of `ℝ₊²` blown up, with bhs `lb`, `rb`, `ff` and the
/// b-diagonal recorded as an annotation meeting `ff`.
pub fn double_b_space() -> BlowupRecord {
    let q = model_quadrant(2, 2).expect("valid quadrant");
    let rec = blow_up_face(&q, &face(&["H1", "H2"]), "ff").expect("corner has codim 2");
    let mut rec = rec.rename_result(&rename_map(&[("H1", "lb"), ("H2", "rb")]));
    rec.result = rec.result.annotate("diag_b", &["ff"]);
    rec
}

/// `X³_b`: blow up the origin of `ℝ₊³` (front face `fff`), then the lifts of
/// the three coordinate axes (`ff1`, `ff2`, `ff3`). Old bhs are named
/// `bf1`, `bf2`, `bf3`.
pub fn triple_b_space() -> (FaceLattice, Vec<BlowupRecord>) {
    let q = model_quadrant(3, 3).expect("valid quadrant");
    let q = q.renamed(&rename_map(&[("H1", "bf1"), ("H2", "bf2"), ("H3", "bf3")]));
    let mut records = Vec::with_capacity(4);
    let r0 = blow_up_face(&q, &face(&["bf1", "bf2", "bf3"]), "fff").expect("origin blow-up");
    let mut current = r0.result.clone();
    records.push(r0);
    // The x_i axis is where the other two coordinates vanish.
    for (name, center) in [
        ("ff1", ["bf2", "bf3"]),
        ("ff2", ["bf1", "bf3"]),
        ("ff3", ["bf1", "bf2"]),
    ] {
        let r = blow_up_face(&current, &face(&center), name).expect("axis blow-up");
        current = r.result.clone();
        records.push(r);
    }
    (current, records)
}

#[derive(Serialize, Deserialize)]
struct LatticeJson {
    dim: usize,
    bhs: Vec<String>,
    faces: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    annotations: Vec<Annotation>,
}

impl Serialize for FaceLattice {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        LatticeJson {
            dim: self.dim,
            bhs: self.bhs.clone(),
            faces: self
                .faces()
                .into_iter()
                .map(|(f, _)| f.into_iter().collect())
                .collect(),
            annotations: self.annotations.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FaceLattice {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = LatticeJson::deserialize(d)?;
        let faces = j
            .faces
            .into_iter()
            .map(|f| {
                let f: Face = f.into_iter().collect();
                let c = f.len();
                (f, c)
            })
            .collect();
        let mut lat = FaceLattice::new(j.dim, j.bhs, faces).map_err(serde::de::Error::custom)?;
        lat.annotations = j.annotations;
        Ok(lat)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrant_examples() {
        let q = model_quadrant(0, 2).unwrap();
        assert!(q.bhs().is_empty());
        assert_eq!(q.faces().len(), 1);
        let q = model_quadrant(2, 2).unwrap();
        assert_eq!(q.bhs(), &["H1", "H2"]);
        assert_eq!(q.faces().len(), 4);
        assert!(q.is_face(&face(&["H1", "H2"])));
        let q = model_quadrant(3, 3).unwrap();
        assert_eq!(q.bhs().len(), 3);
        assert_eq!(q.faces().len(), 8);
        assert!(model_quadrant(3, 2).is_err());
    }

    #[test]
    fn double_space_matches_picture() {
        let x2b = double_b_space();
        let r = &x2b.result;
        assert_eq!(r.bhs(), &["lb", "rb", "ff"]);
        assert!(r.is_face(&face(&["lb", "ff"])));
        assert!(r.is_face(&face(&["rb", "ff"])));
        assert!(!r.is_face(&face(&["lb", "rb"])));
        assert_eq!(r.proper_faces().len(), 5);
        assert_eq!(r.codim(&face(&["lb", "ff"])).unwrap(), 2);
        assert_eq!(r.codim(&Face::new()).unwrap(), 0);
        assert_eq!(r.annotations()[0].meets, vec!["ff"]);
    }

    #[test]
    fn axis_blowup_in_three_dimensions() {
        let q = model_quadrant(3, 3).unwrap();
        let rec = blow_up_face(&q, &face(&["H2", "H3"]), "ff1").unwrap();
        let r = &rec.result;
        assert!(!r.is_face(&face(&["H2", "H3"])));
        assert!(r.is_face(&face(&["H2", "ff1"])));
        assert!(r.is_face(&face(&["H3", "ff1"])));
        // The front face sits over the whole axis, including its end at x1 = 0.
        assert!(r.is_face(&face(&["H1", "ff1"])));
        assert!(r.is_face(&face(&["H1", "H2", "ff1"])));
        assert!(!r.is_face(&face(&["H1", "H2", "H3"])));
        assert_eq!(r.codim(&face(&["H1", "H2", "ff1"])).unwrap(), 3);
    }

    #[test]
    fn codim_one_center_is_rejected() {
        let q = model_quadrant(2, 2).unwrap();
        assert!(blow_up_face(&q, &face(&["H1"]), "ff").is_err());
        assert!(blow_up_face(&q, &Face::new(), "ff").is_err());
    }

    #[test]
    fn triple_space_faces() {
        let (x3b, recs) = triple_b_space();
        assert_eq!(recs.len(), 4);
        assert_eq!(x3b.bhs().len(), 7);
        let mut names = x3b.bhs().to_vec();
        names.sort();
        assert_eq!(names, vec!["bf1", "bf2", "bf3", "ff1", "ff2", "ff3", "fff"]);
        assert!(!x3b.is_face(&face(&["ff1", "ff2"])));
        assert!(x3b.is_face(&face(&["bf3", "fff"])));
        assert_eq!(x3b.codim(&face(&["bf3", "fff"])).unwrap(), 2);
        for ff in ["ff1", "ff2", "ff3"] {
            assert!(x3b.is_face(&face(&[ff, "fff"])));
        }
        // Corners of X³_b are points of codimension 3, nothing deeper.
        assert!(x3b.faces().iter().all(|(_, c)| *c <= 3));
    }

    #[test]
    fn lattices_stay_downward_closed() {
        // FaceLattice::new validates closure, so building the chain is the check.
        let (x3b, _) = triple_b_space();
        for (f, _) in x3b.faces() {
            for h in &f {
                let mut g = f.clone();
                g.remove(h);
                assert!(x3b.is_face(&g));
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let r = double_b_space().result;
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.starts_with(r#"{"dim":2,"bhs":["lb","rb","ff"],"faces":[[],["ff"],["lb"],["rb"],["ff","lb"],["ff","rb"]]"#));
        let back: FaceLattice = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
        let bad = r#"{"dim":2,"bhs":["a","b"],"faces":[[],["a"],["b"],["a","b","c"]]}"#;
        assert!(serde_json::from_str::<FaceLattice>(bad).is_err());
    }
}
