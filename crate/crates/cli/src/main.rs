//! `bcalc`: command-line front end to the index-set, corner and b-calculus
//! machinery.
//!
//! Exit codes: 0 success, 1 malformed input or failed verification, 2 a
//! violated theorem hypothesis (integrability, b-fibration, composability).

mod commands;
mod objects;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(
    name = "bcalc",
    version,
    about = "Index sets, blow-ups, b-maps and b-calculus bookkeeping"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Report index-set members with Re z up to this bound.
    #[arg(long, global = true, default_value_t = 10)]
    pub truncate: i64,
    /// Relative tolerance for numerical quadrature.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol: f64,
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Directory in which bare object names are looked up as NAME or NAME.json.
    #[arg(long, global = true)]
    pub workspace: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Operations on index sets.
    #[command(subcommand)]
    Indexset(IndexsetCmd),
    /// Face lattices of model spaces and blow-ups.
    #[command(subcommand)]
    Space(SpaceCmd),
    /// b-maps given by exponent matrices.
    #[command(subcommand)]
    Map(MapCmd),
    /// Pull-back and push-forward of index families.
    #[command(subcommand)]
    Transport(TransportCmd),
    /// b-differential operators and full-calculus descriptors.
    #[command(subcommand)]
    Op(OpCmd),
    /// Run the end-to-end verification suite.
    Verify {
        /// all, pushforward, parametrix or combinatorics.
        #[arg(long, default_value = "all")]
        suite: String,
    },
}

#[derive(Subcommand, Debug)]
pub enum IndexsetCmd {
    Union {
        a: String,
        b: String,
    },
    Extunion {
        a: String,
        b: String,
    },
    Sum {
        a: String,
        b: String,
    },
    /// Reduce a generator list to its completion.
    Complete {
        a: String,
    },
    Inf {
        a: String,
    },
    Truncate {
        a: String,
    },
}

#[derive(Subcommand, Debug)]
pub enum SpaceCmd {
    /// `[0,∞)^k × ℝ^{n−k}`.
    Quadrant { k: usize, n: usize },
    /// Blow up a face of codimension at least two.
    Blowup {
        lattice: String,
        /// Comma-separated bhs names cutting out the face.
        #[arg(long)]
        face: String,
        /// Name of the new front face.
        #[arg(long, default_value = "ff")]
        name: String,
    },
    /// The triple b-space.
    Triple,
}

#[derive(Subcommand, Debug)]
pub enum MapCmd {
    /// `g ∘ f`.
    Compose {
        f: String,
        g: String,
    },
    /// Image of a face under the induced face map.
    Facemap {
        f: String,
        #[arg(long)]
        face: String,
    },
    CheckBfibration {
        f: String,
    },
}

#[derive(Subcommand, Debug)]
pub enum TransportCmd {
    Pullback { f: String, family: String },
    Pushforward { f: String, family: String },
}

#[derive(Subcommand, Debug)]
pub enum OpCmd {
    /// Indicial roots and boundary spectrum.
    Specb { op: String },
    /// Split the boundary spectrum at a weight.
    Split {
        op: String,
        #[arg(long, allow_hyphen_values = true)]
        gamma: String,
    },
    /// Model inverse kernel by residues.
    Inverse {
        op: String,
        #[arg(long, allow_hyphen_values = true)]
        gamma: String,
    },
    /// Apply the operator to the model inverse of a bump and report the residual.
    ApplyCheck {
        op: String,
        #[arg(long, allow_hyphen_values = true)]
        gamma: String,
    },
    /// Compose two full-calculus descriptors.
    Compose { p: String, q: String },
    /// Index set of the image of a function under a descriptor.
    Action { p: String, f: String },
    /// Index sets of the k-step parametrix and its remainder.
    Parametrix {
        op: String,
        #[arg(long, allow_hyphen_values = true)]
        gamma: String,
        #[arg(long, default_value_t = 1)]
        steps: usize,
    },
    /// Hilbert–Schmidt front-face criterion for `x^N k(s)` with `k` the model inverse.
    Hs {
        op: String,
        #[arg(long, allow_hyphen_values = true)]
        gamma: String,
        /// Power `N` of the boundary defining function multiplying the kernel.
        #[arg(long, default_value_t = 0)]
        vanishing_order: u32,
        /// Kernel support `[1/C, C]` in `s`.
        #[arg(long, default_value_t = 2.0)]
        cutoff: f64,
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = commands::run(&cli);
    match outcome {
        Ok(out) => {
            print!(
                "{}",
                if cli.global.json {
                    output::pretty(&out.json) + "\n"
                } else {
                    out.text
                }
            );
            ExitCode::from(out.code)
        }
        Err(e) => {
            let code = if e.is_hypothesis_violation() { 2 } else { 1 };
            if cli.global.json {
                let v = serde_json::json!({ "error": e.to_string(), "hypothesis_violation": code == 2 });
                println!("{}", output::pretty(&v));
            }
            eprintln!("bcalc: {e}");
            ExitCode::from(code)
        }
    }
}
