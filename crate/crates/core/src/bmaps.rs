//! b-maps as exponent matrices between face lattices.
//!
//! Row `G` (a source bhs) and column `H` (a target bhs) hold `e_f(G, H)`: the
//! pull-back of a defining function of `H` vanishes to that order at `G`.
//! Smooth non-vanishing factors are not represented.

use serde::{Deserialize, Serialize};

use crate::corner_geometry::{
    double_b_space, face_label, model_quadrant, rename_map, triple_b_space, Face, FaceLattice,
};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BMapDescriptor {
    source: FaceLattice,
    target: FaceLattice,
    exponents: Vec<Vec<u32>>,
    fibration_on_faces: bool,
}

impl BMapDescriptor {
    /// `fibration_on_faces` asserts that every open face fibres over its image;
    /// it cannot be derived from exponents.
    pub fn new(
        source: FaceLattice,
        target: FaceLattice,
        exponents: Vec<Vec<u32>>,
        fibration_on_faces: bool,
    ) -> Result<Self> {
        if exponents.len() != source.bhs().len()
            || exponents.iter().any(|r| r.len() != target.bhs().len())
        {
            return Err(Error::Argument(format!(
                "exponent matrix must be {}×{}",
                source.bhs().len(),
                target.bhs().len()
            )));
        }
        Ok(BMapDescriptor {
            source,
            target,
            exponents,
            fibration_on_faces,
        })
    }

    pub fn identity(lattice: &FaceLattice) -> Self {
        let n = lattice.bhs().len();
        let e = (0..n)
            .map(|i| (0..n).map(|j| u32::from(i == j)).collect())
            .collect();
        BMapDescriptor {
            source: lattice.clone(),
            target: lattice.clone(),
            exponents: e,
            fibration_on_faces: true,
        }
    }

    pub fn source(&self) -> &FaceLattice {
        &self.source
    }

    pub fn target(&self) -> &FaceLattice {
        &self.target
    }

    pub fn exponents(&self) -> &[Vec<u32>] {
        &self.exponents
    }

    pub fn fibration_on_faces(&self) -> bool {
        self.fibration_on_faces
    }

    pub fn exponent(&self, g: &str, h: &str) -> Option<u32> {
        let i = self.source.bhs_index(g)?;
        let j = self.target.bhs_index(h)?;
        Some(self.exponents[i][j])
    }

    /// Exponent column of target bhs `h`, i.e. `e_{f_H}(G)` for every source `G`.
    pub fn column(&self, h: &str) -> Result<Vec<u32>> {
        let j = self
            .target
            .bhs_index(h)
            .ok_or_else(|| Error::Argument(format!("`{h}` is not a bhs of the target")))?;
        Ok(self.exponents.iter().map(|r| r[j]).collect())
    }
}

/// `g ∘ f` for `f: W → Z`, `g: Z → Y`. The exponent matrix is the product
/// `E(f)·E(g)`.
pub fn compose(f: &BMapDescriptor, g: &BMapDescriptor) -> Result<BMapDescriptor> {
    if !f.target.same_shape(&g.source) {
        return Err(Error::Argument(
            "compose: target of f differs from source of g".into(),
        ));
    }
    let rows = f.source.bhs().len();
    let mid = f.target.bhs().len();
    let cols = g.target.bhs().len();
    let mut e = vec![vec![0u32; cols]; rows];
    for (i, row) in e.iter_mut().enumerate() {
        for (k, cell) in row.iter_mut().enumerate() {
            *cell = (0..mid)
                .map(|j| f.exponents[i][j] * g.exponents[j][k])
                .sum();
        }
    }
    let mut h = BMapDescriptor::new(f.source.clone(), g.target.clone(), e, false)?;
    if f.fibration_on_faces && g.fibration_on_faces {
        h.fibration_on_faces = matches!(check_b_fibration(&h), Ok(r) if r.codim_ok);
    }
    Ok(h)
}

/// `f̄(F)`: the target bhs `H` with `Σ_{G ∈ F} e_f(G, H) > 0`.
pub fn induced_face_map(f: &BMapDescriptor, src_face: &Face) -> Result<Face> {
    if !f.source.is_face(src_face) {
        return Err(Error::Argument(format!(
            "{} is not a face of the source",
            face_label(src_face)
        )));
    }
    let rows: Vec<usize> = src_face
        .iter()
        .map(|g| f.source.bhs_index(g).unwrap())
        .collect();
    let image: Face = f
        .target
        .bhs()
        .iter()
        .enumerate()
        .filter(|(j, _)| rows.iter().any(|&i| f.exponents[i][*j] > 0))
        .map(|(_, h)| h.clone())
        .collect();
    if !f.target.is_face(&image) {
        return Err(Error::Inconsistent(format!(
            "{} would map into {}, which is not a face of the target",
            face_label(src_face),
            face_label(&image)
        )));
    }
    Ok(image)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FaceImage {
    pub bhs: String,
    pub image: Vec<String>,
    pub codim: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BFibrationReport {
    pub codim_ok: bool,
    pub violating_faces: Vec<String>,
    pub fibration_on_faces: bool,
    pub is_b_fibration: bool,
    pub images: Vec<FaceImage>,
}

pub fn check_b_fibration(f: &BMapDescriptor) -> Result<BFibrationReport> {
    let mut images = Vec::new();
    let mut violating = Vec::new();
    for g in f.source.bhs() {
        let img = induced_face_map(f, &std::iter::once(g.clone()).collect())?;
        let c = f.target.codim(&img)?;
        if c > 1 {
            violating.push(g.clone());
        }
        images.push(FaceImage {
            bhs: g.clone(),
            image: img.into_iter().collect(),
            codim: c,
        });
    }
    let codim_ok = violating.is_empty();
    Ok(BFibrationReport {
        codim_ok,
        violating_faces: violating,
        fibration_on_faces: f.fibration_on_faces,
        is_b_fibration: codim_ok && f.fibration_on_faces,
        images,
    })
}

/// Coordinate projection `ℝ₊ⁿ → ℝ₊ᵏ` keeping the listed coordinates (1-based),
/// between quadrants with bhs `H1, …`.
pub fn quadrant_projection(n: usize, keep: &[usize]) -> Result<BMapDescriptor> {
    let src = model_quadrant(n, n)?;
    let tgt = model_quadrant(keep.len(), keep.len())?;
    let mut e = vec![vec![0u32; keep.len()]; n];
    for (j, &i) in keep.iter().enumerate() {
        if i == 0 || i > n {
            return Err(Error::Argument(format!(
                "coordinate {i} out of range 1..={n}"
            )));
        }
        e[i - 1][j] = 1;
    }
    BMapDescriptor::new(src, tgt, e, true)
}

/// `π_i : ℝ₊³ → ℝ₊²` forgetting coordinate `i`, with source bhs `bf1, bf2, bf3`
/// and target bhs `H1, H2` (the base of `X²_b`).
pub fn forget_coordinate(i: usize) -> Result<BMapDescriptor> {
    let keep: Vec<usize> = (1..=3).filter(|&k| k != i).collect();
    if keep.len() != 2 {
        return Err(Error::Argument(format!(
            "coordinate {i} out of range 1..=3"
        )));
    }
    let p = quadrant_projection(3, &keep)?;
    let src = p
        .source
        .renamed(&rename_map(&[("H1", "bf1"), ("H2", "bf2"), ("H3", "bf3")]));
    BMapDescriptor::new(src, p.target.clone(), p.exponents.clone(), true)
}

/// Total blow-down `X³_b → ℝ₊³`, the composite of the four blow-downs.
pub fn triple_blowdown() -> BMapDescriptor {
    let (_, recs) = triple_b_space();
    let mut it = recs.iter().rev();
    let mut acc = it.next().expect("four records").blowdown.clone();
    for r in it {
        acc = compose(&acc, &r.blowdown).expect("chain is composable");
    }
    acc
}

/// The lift `π̃_i : X³_b → X²_b` of the projection forgetting coordinate `i`.
///
/// With `a < b` the remaining coordinates: `bf_a, ff_b ↦ lb`, `bf_b, ff_a ↦ rb`,
/// `fff, ff_i ↦ ff`, `bf_i` maps into the interior.
pub fn lifted_projection(i: usize) -> Result<BMapDescriptor> {
    if !(1..=3).contains(&i) {
        return Err(Error::Argument(format!(
            "lifted projection index {i} not in 1..=3"
        )));
    }
    let (x3b, _) = triple_b_space();
    let x2b = double_b_space().result;
    let rest: Vec<usize> = (1..=3).filter(|&k| k != i).collect();
    let (a, b) = (rest[0], rest[1]);
    let table = [
        (format!("bf{a}"), "lb"),
        (format!("ff{b}"), "lb"),
        (format!("bf{b}"), "rb"),
        (format!("ff{a}"), "rb"),
        ("fff".to_string(), "ff"),
        (format!("ff{i}"), "ff"),
    ];
    let mut e = vec![vec![0u32; x2b.bhs().len()]; x3b.bhs().len()];
    for (g, h) in &table {
        let r = x3b.bhs_index(g).expect("X3b bhs");
        let c = x2b.bhs_index(h).expect("X2b bhs");
        e[r][c] = 1;
    }
    BMapDescriptor::new(x3b, x2b, e, true)
}

/// `X²_b → ℝ₊` given by `(x, x′) ↦ x` (`i = 1`) or `x′` (`i = 2`) after blow-down.
pub fn double_space_projection(i: usize) -> Result<BMapDescriptor> {
    let bd = double_b_space().blowdown;
    let mut p = compose(&bd, &quadrant_projection(2, &[i])?)?;
    // A fibration over (0, ∞); the blow-down factor alone is not.
    p.fibration_on_faces = true;
    Ok(p)
}

#[derive(Serialize, Deserialize)]
struct BMapJson {
    source: FaceLattice,
    target: FaceLattice,
    e: Vec<Vec<u32>>,
    #[serde(default)]
    fibration_faces: bool,
}

impl Serialize for BMapDescriptor {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        BMapJson {
            source: self.source.clone(),
            target: self.target.clone(),
            e: self.exponents.clone(),
            fibration_faces: self.fibration_on_faces,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for BMapDescriptor {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = BMapJson::deserialize(d)?;
        BMapDescriptor::new(j.source, j.target, j.e, j.fibration_faces)
            .map_err(serde::de::Error::custom)
    }
}
