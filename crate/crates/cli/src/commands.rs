//! Subcommand implementations. Each returns a text report, a JSON report and
//! an exit code.

use std::fmt::Write as _;

use serde_json::{json, Value};

use bcalc::b_calculus::{
    action_index, apply_check, compose_descriptors, hs_front_face_criterion, indicial,
    model_inverse, parametrix_indices, split_spec, BDiffOp, FullCalcDescriptor, WeightParameter,
};
use bcalc::bmaps::{check_b_fibration, compose, induced_face_map, BMapDescriptor};
use bcalc::corner_geometry::{
    blow_up_face, face, face_label, model_quadrant, triple_b_space, FaceLattice,
};
use bcalc::exponent::parse_rational;
use bcalc::phg_numeric::{bump, smooth_step, QuadratureSpec};
use bcalc::transport::{
    pull_back_family, push_forward_family, push_forward_halfline, truncate_family,
};
use bcalc::verify::{run_suite, Suite};
use bcalc::{Error, IndexFamily, IndexSet, Result, Q};

use crate::objects::Workspace;
use crate::output::{fmt12, index_set_json, index_set_table, to_json};
use crate::{Cli, Command, Global, IndexsetCmd, MapCmd, OpCmd, SpaceCmd, TransportCmd};

pub struct Outcome {
    pub text: String,
    pub json: Value,
    pub code: u8,
}

impl Outcome {
    fn ok(text: String, json: Value) -> Self {
        Outcome {
            text,
            json,
            code: 0,
        }
    }
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let g = &cli.global;
    if !(g.tol > 0.0 && g.tol < 1.0) {
        return Err(Error::Argument("--tol must lie in (0, 1)".into()));
    }
    let ws = Workspace::new(g.workspace.clone())?;
    match &cli.command {
        Command::Indexset(c) => indexset(c, &ws, g),
        Command::Space(c) => space(c, &ws),
        Command::Map(c) => map(c, &ws),
        Command::Transport(c) => transport(c, &ws, g),
        Command::Op(c) => op(c, &ws, g),
        Command::Verify { suite } => verify(suite),
    }
}

fn bound(g: &Global) -> Q {
    Q::from_integer(g.truncate)
}

fn quad(g: &Global) -> QuadratureSpec {
    QuadratureSpec {
        abs_tol: g.tol * 1e-3,
        rel_tol: g.tol,
        max_depth: 50,
    }
}

fn parse_face(s: &str) -> Vec<String> {
    s.split(',')
        .map(|t| t.trim().to_string())
        .filter(|t| !t.is_empty())
        .collect()
}

fn indexset(c: &IndexsetCmd, ws: &Workspace, g: &Global) -> Result<Outcome> {
    let load = |a: &str| ws.load::<IndexSet>(a);
    let set = match c {
        IndexsetCmd::Union { a, b } => load(a)?.union(&load(b)?),
        IndexsetCmd::Extunion { a, b } => load(a)?.extended_union(&load(b)?),
        IndexsetCmd::Sum { a, b } => load(a)?.sum(&load(b)?),
        IndexsetCmd::Complete { a } | IndexsetCmd::Truncate { a } => load(a)?,
        IndexsetCmd::Inf { a } => {
            let inf = load(a)?.inf_re();
            return Ok(Outcome::ok(
                format!("inf Re z = {inf}\n"),
                json!({ "inf_re": inf.to_string() }),
            ));
        }
    };
    Ok(Outcome::ok(
        index_set_table(&set, bound(g)),
        index_set_json(&set, bound(g)),
    ))
}

fn lattice_text(z: &FaceLattice) -> String {
    let mut out = format!(
        "dimension {}, {} boundary hypersurfaces: {}\n",
        z.dim(),
        z.bhs().len(),
        z.bhs().join(", ")
    );
    for (f, c) in z.faces() {
        let _ = writeln!(out, "  codim {c}: {}", face_label(&f));
    }
    out
}

fn space(c: &SpaceCmd, ws: &Workspace) -> Result<Outcome> {
    let z = match c {
        SpaceCmd::Quadrant { k, n } => model_quadrant(*k, *n)?,
        SpaceCmd::Triple => triple_b_space().0,
        SpaceCmd::Blowup {
            lattice,
            face: f,
            name,
        } => {
            let base: FaceLattice = ws.load(lattice)?;
            let rec = blow_up_face(&base, &face(&parse_face(f)), name)?;
            let text = format!(
                "{}blow-down exponents (rows: new bhs, columns: old bhs):\n{}",
                lattice_text(&rec.result),
                matrix_text(&rec.blowdown)
            );
            return Ok(Outcome::ok(
                text,
                json!({ "result": to_json(&rec.result), "blowdown": to_json(&rec.blowdown) }),
            ));
        }
    };
    Ok(Outcome::ok(lattice_text(&z), to_json(&z)))
}

fn matrix_text(f: &BMapDescriptor) -> String {
    let mut out = format!("  {:<8}", "");
    for h in f.target().bhs() {
        let _ = write!(out, "{h:>6}");
    }
    out.push('\n');
    for (g, row) in f.source().bhs().iter().zip(f.exponents()) {
        let _ = write!(out, "  {g:<8}");
        for e in row {
            let _ = write!(out, "{e:>6}");
        }
        out.push('\n');
    }
    out
}

fn map(c: &MapCmd, ws: &Workspace) -> Result<Outcome> {
    match c {
        MapCmd::Compose { f, g } => {
            let h = compose(&ws.load(f)?, &ws.load(g)?)?;
            Ok(Outcome::ok(matrix_text(&h), to_json(&h)))
        }
        MapCmd::Facemap { f, face: fc } => {
            let m: BMapDescriptor = ws.load(f)?;
            let src = face(&parse_face(fc));
            let img = induced_face_map(&m, &src)?;
            let text = format!("{} -> {}\n", face_label(&src), face_label(&img));
            Ok(Outcome::ok(text, json!({ "face": src, "image": img })))
        }
        MapCmd::CheckBfibration { f } => {
            let rep = check_b_fibration(&ws.load(f)?)?;
            let mut text = String::new();
            for im in &rep.images {
                let target = if im.image.is_empty() {
                    "interior".to_string()
                } else {
                    im.image.join("∩")
                };
                let _ = writeln!(text, "  {:<8} -> {target} (codim {})", im.bhs, im.codim);
            }
            let _ = writeln!(
                text,
                "b-fibration: {}{}",
                if rep.is_b_fibration { "yes" } else { "no" },
                if rep.violating_faces.is_empty() {
                    String::new()
                } else {
                    format!("; violators: {}", rep.violating_faces.join(", "))
                }
            );
            let code = if rep.is_b_fibration { 0 } else { 2 };
            Ok(Outcome {
                text,
                json: to_json(&rep),
                code,
            })
        }
    }
}

fn family_text(fam: &IndexFamily, b: Q) -> String {
    let mut out = String::new();
    for (name, set) in fam.iter() {
        let _ = writeln!(out, "[{name}]");
        out.push_str(&index_set_table(set, b));
    }
    out
}

fn contributions_text<T>(rep: &bcalc::transport::TransportReport<T>) -> String {
    let mut out = String::from("face contributions:\n");
    for c in &rep.face_contributions {
        let _ = writeln!(out, "  {:<16} {}", c.face, c.set);
    }
    let _ = writeln!(out, "log sources: {}", rep.log_sources().join(", "));
    if !rep.integrability_ok {
        let _ = writeln!(
            out,
            "integrability violated at: {}",
            rep.violating_bhs.join(", ")
        );
    }
    out
}

fn transport(c: &TransportCmd, ws: &Workspace, g: &Global) -> Result<Outcome> {
    match c {
        TransportCmd::Pullback { f, family } => {
            let pb = pull_back_family(&ws.load(f)?, &ws.load(family)?)?;
            Ok(Outcome::ok(
                family_text(&pb, bound(g)),
                json!({ "generators": to_json(&pb), "members": to_json(&truncate_family(&pb, bound(g))) }),
            ))
        }
        TransportCmd::Pushforward { f, family } => {
            let m: BMapDescriptor = ws.load(f)?;
            let fam: IndexFamily = ws.load(family)?;
            let (text, json, ok) = if m.target().bhs().len() == 1 && m.target().dim() == 1 {
                let rep = push_forward_halfline(&m, &fam)?;
                let text = format!(
                    "{}{}",
                    index_set_table(&rep.result, bound(g)),
                    contributions_text(&rep)
                );
                let mut j = to_json(&rep);
                j["members"] = to_json(&rep.result.truncate(bound(g)));
                j["log_sources"] = json!(rep.log_sources());
                (text, j, rep.integrability_ok)
            } else {
                let rep = push_forward_family(&m, &fam)?;
                let text = format!(
                    "{}{}",
                    family_text(&rep.result, bound(g)),
                    contributions_text(&rep)
                );
                (text, to_json(&rep), rep.integrability_ok)
            };
            Ok(Outcome {
                text,
                json,
                code: if ok { 0 } else { 2 },
            })
        }
    }
}

fn weight(s: &str) -> Result<WeightParameter> {
    Ok(WeightParameter::new(parse_rational(s)?))
}

fn op(c: &OpCmd, ws: &Workspace, g: &Global) -> Result<Outcome> {
    let load_op = |a: &str| ws.load::<BDiffOp>(a);
    match c {
        OpCmd::Specb { op } => {
            let d = indicial(&load_op(op)?)?;
            let mut text = String::from("roots:\n");
            for r in &d.roots {
                let _ = writeln!(
                    text,
                    "  {:<16} order {} {}",
                    r.value.to_string(),
                    r.order,
                    if r.exact { "exact" } else { "approximate" }
                );
            }
            let _ = writeln!(
                text,
                "Spec_b: {}",
                d.spec_b
                    .iter()
                    .map(|e| e.to_string())
                    .collect::<Vec<_>>()
                    .join(", ")
            );
            Ok(Outcome::ok(text, to_json(&d)))
        }
        OpCmd::Split { op, gamma } => {
            let (lb, rb) = split_spec(&indicial(&load_op(op)?)?, &weight(gamma)?)?;
            let text = format!("E_lb = {lb}\nE_rb = {rb}\n");
            Ok(Outcome::ok(
                text,
                json!({ "e_lb": to_json(&lb), "e_rb": to_json(&rb) }),
            ))
        }
        OpCmd::Inverse { op, gamma } => {
            let k = model_inverse(&indicial(&load_op(op)?)?, &weight(gamma)?)?;
            let mut text = String::from("k(s) = sum of terms c · s^z log^p(1/s) (rb, s < 1) or c · s^-z log^p(s) (lb, s > 1):\n");
            for t in &k.terms {
                let coeff = match &t.exact_coeff {
                    Some(e) => e.to_string(),
                    None => format!("{} {:+}i", fmt12(t.coeff.re), fmt12(t.coeff.im)),
                };
                let _ = writeln!(text, "  {:?} z = {} p = {} c = {coeff}", t.side, t.z, t.p);
            }
            Ok(Outcome::ok(text, to_json(&k)))
        }
        OpCmd::ApplyCheck { op, gamma } => {
            let p = load_op(op)?;
            let k = model_inverse(&indicial(&p)?, &weight(gamma)?)?;
            let rep = apply_check(&p, &k, &bump(1.0, 2.0), (1.0, 2.0), &quad(g))?;
            let mut text = format!(
                "max |P(Kv) - v| = {} over {} points (max |v| = {})\n",
                fmt12(rep.max_residual),
                rep.points,
                fmt12(rep.max_input)
            );
            if let Some(w) = &rep.warning {
                let _ = writeln!(text, "warning: {w}");
            }
            Ok(Outcome::ok(text, to_json(&rep)))
        }
        OpCmd::Compose { p, q } => {
            let d = compose_descriptors(&ws.load::<FullCalcDescriptor>(p)?, &ws.load(q)?)?;
            Ok(Outcome::ok(format!("{d}\n"), to_json(&d)))
        }
        OpCmd::Action { p, f } => {
            let s = action_index(&ws.load::<FullCalcDescriptor>(p)?, &ws.load(f)?)?;
            Ok(Outcome::ok(
                index_set_table(&s, bound(g)),
                index_set_json(&s, bound(g)),
            ))
        }
        OpCmd::Parametrix { op, gamma, steps } => {
            let rep = parametrix_indices(&load_op(op)?, &weight(gamma)?, *steps)?;
            let mut text = String::new();
            for s in &rep.steps {
                let _ = writeln!(
                    text,
                    "step {}: parametrix {}; remainder {}",
                    s.step, s.parametrix, s.remainder
                );
            }
            let _ = writeln!(
                text,
                "parametrix: {}\nremainder: {}",
                rep.parametrix, rep.remainder
            );
            Ok(Outcome::ok(text, to_json(&rep)))
        }
        OpCmd::Hs {
            op,
            gamma,
            vanishing_order,
            cutoff,
            eps,
        } => {
            let k = model_inverse(&indicial(&load_op(op)?)?, &weight(gamma)?)?;
            let n = *vanishing_order as i32;
            let chi = smooth_step(0.5, 1.0);
            let kernel = |x: f64, s: f64| x.powi(n) * k.evaluate(s).norm();
            let rep = hs_front_face_criterion(&kernel, &chi, *cutoff, *eps, &quad(g))?;
            let text = format!(
                "truncated norm² = {}\nslope in log(1/ε) = {}\nvanishes at front face: {}\n",
                fmt12(rep.norm_sq),
                fmt12(rep.log_slope),
                if rep.vanishes_at_front_face {
                    "yes"
                } else {
                    "no"
                }
            );
            Ok(Outcome::ok(text, to_json(&rep)))
        }
    }
}

fn verify(suite: &str) -> Result<Outcome> {
    let suite: Suite = suite.parse()?;
    let rep = run_suite(suite);
    let mut text = String::new();
    for c in &rep.cases {
        let _ = writeln!(
            text,
            "{:<4} [{}] {}: {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.suite,
            c.name,
            c.detail
        );
    }
    let _ = writeln!(text, "{} passed, {} failed", rep.passed, rep.failed);
    let code = if rep.all_passed() { 0 } else { 1 };
    Ok(Outcome {
        text,
        json: to_json(&rep),
        code,
    })
}
