//! Loading named objects from JSON files, a workspace directory or the
//! built-in catalogue.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde_json::Value;

use bcalc::bmaps::{
    double_space_projection, lifted_projection, quadrant_projection, triple_blowdown,
};
use bcalc::corner_geometry::{double_b_space, model_quadrant, triple_b_space};
use bcalc::{Error, IndexSet, Result};

const BUILTIN_PREFIX: &str = "builtin:";

/// Names accepted after `builtin:`.
pub const BUILTINS: &[&str] = &[
    "smooth",
    "empty",
    "logs1",
    "quadrant2",
    "x2b",
    "x3b",
    "blowdown_x2b",
    "blowdown_x3b",
    "lifted_projection_1",
    "lifted_projection_2",
    "lifted_projection_3",
    "projection_x2b_left",
    "projection_x2b_right",
    "projection_quadrant2_first",
];

fn to_value<T: serde::Serialize>(t: T) -> Value {
    serde_json::to_value(t).expect("built-in objects serialize")
}

fn builtin(name: &str) -> Result<Value> {
    Ok(match name {
        "smooth" => to_value(IndexSet::smooth()),
        "empty" => to_value(IndexSet::empty()),
        "logs1" => to_value(IndexSet::integers_with_logs(1)),
        "quadrant2" => to_value(model_quadrant(2, 2)?),
        "x2b" => to_value(double_b_space().result),
        "x3b" => to_value(triple_b_space().0),
        "blowdown_x2b" => to_value(double_b_space().blowdown),
        "blowdown_x3b" => to_value(triple_blowdown()),
        "lifted_projection_1" => to_value(lifted_projection(1)?),
        "lifted_projection_2" => to_value(lifted_projection(2)?),
        "lifted_projection_3" => to_value(lifted_projection(3)?),
        "projection_x2b_left" => to_value(double_space_projection(1)?),
        "projection_x2b_right" => to_value(double_space_projection(2)?),
        "projection_quadrant2_first" => to_value(quadrant_projection(2, &[1])?),
        _ => {
            return Err(Error::Argument(format!(
                "unknown built-in `{name}`; available: {}",
                BUILTINS.join(", ")
            )))
        }
    })
}

/// Resolves object arguments: `builtin:NAME`, a file path, or a name looked
/// up as `NAME` or `NAME.json` inside the workspace directory.
pub struct Workspace {
    dir: Option<PathBuf>,
}

impl Workspace {
    pub fn new(dir: Option<PathBuf>) -> Result<Self> {
        if let Some(d) = &dir {
            if !d.is_dir() {
                return Err(Error::Argument(format!(
                    "workspace `{}` is not a directory",
                    d.display()
                )));
            }
        }
        Ok(Workspace { dir })
    }

    fn resolve(&self, arg: &str) -> Result<PathBuf> {
        let direct = Path::new(arg);
        if direct.is_file() {
            return Ok(direct.to_path_buf());
        }
        if let Some(dir) = &self.dir {
            for candidate in [dir.join(arg), dir.join(format!("{arg}.json"))] {
                if candidate.is_file() {
                    return Ok(candidate);
                }
            }
        }
        Err(Error::Argument(format!("no such object `{arg}`")))
    }

    pub fn value(&self, arg: &str) -> Result<Value> {
        if let Some(name) = arg.strip_prefix(BUILTIN_PREFIX) {
            return builtin(name);
        }
        let path = self.resolve(arg)?;
        let text = fs::read_to_string(&path)
            .map_err(|e| Error::Argument(format!("cannot read `{}`: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }

    pub fn load<T: DeserializeOwned>(&self, arg: &str) -> Result<T> {
        serde_json::from_value(self.value(arg)?).map_err(|e| Error::Parse(format!("`{arg}`: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use bcalc::bmaps::BMapDescriptor;
    use bcalc::corner_geometry::FaceLattice;

    #[test]
    fn every_builtin_round_trips() {
        let ws = Workspace::new(None).unwrap();
        for name in BUILTINS {
            let arg = format!("{BUILTIN_PREFIX}{name}");
            let v = ws.value(&arg).unwrap();
            let ok = serde_json::from_value::<IndexSet>(v.clone()).is_ok()
                || serde_json::from_value::<FaceLattice>(v.clone()).is_ok()
                || serde_json::from_value::<BMapDescriptor>(v).is_ok();
            assert!(ok, "{name}");
        }
    }

    #[test]
    fn unknown_names_are_argument_errors() {
        let ws = Workspace::new(None).unwrap();
        assert!(matches!(ws.value("builtin:nope"), Err(Error::Argument(_))));
        assert!(matches!(
            ws.value("/definitely/missing.json"),
            Err(Error::Argument(_))
        ));
    }
}
