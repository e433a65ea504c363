//! Argument definitions and command implementations.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use metallic_core::compat::{full_verdict_with_tol, verify_batch, PointRecord};
use metallic_core::examples::random::SEED_ENV;
use metallic_core::examples::{
    build_ekt_immersion, build_sphere_product, build_sphere_product_hypersurface, EktExample,
    SphereProductExample,
};
use metallic_core::family::{default_thetas, deform, flat_torus_base, SurfaceRecord};
use metallic_core::structures::MetallicParams;
use metallic_core::submanifold::{check_hypersurface_relations, check_invariant};
use metallic_core::{ResidualReport64, DEFAULT_TOL};
use rayon::prelude::*;

use crate::dataset;
use crate::report::{Metadata, RecordReport, Report};

/// Verify metallic and complex metallic submanifold data.
#[derive(Debug, Parser)]
#[command(name = "metallic-geo", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Verify a built-in example or a dataset file.
    Verify {
        #[command(subcommand)]
        source: VerifySource,
    },
    /// Verify the associated family of a minimal surface over a grid of angles.
    FamilySweep {
        /// `flat-torus` for the built-in base, otherwise a dataset file with one surface record.
        base: String,
        /// Number of equally spaced angles in [0, 2 pi).
        #[arg(long, default_value_t = 24)]
        thetas: usize,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[command(flatten)]
        params: BuiltinParams,
        /// Write the structured JSON report to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the record of a built-in example as a dataset.
    Export {
        name: Builtin,
        #[command(flatten)]
        params: BuiltinParams,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum VerifySource {
    /// Build and verify one of the closed-form examples.
    Builtin {
        name: Builtin,
        #[command(flatten)]
        params: BuiltinParams,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify every record of a dataset file.
    Dataset {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Built-in examples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Builtin {
    /// `S^n1(c1) x S^n2(c2)` inside `R^(n1+1) x R^(n2+1)` with the product metallic structure.
    SphereProduct,
    /// The same product as a hypersurface of `S^n1(c1) x R^(n2+1)`.
    SphereProductHypersurface,
    /// `E(kappa, tau)` in a complex space form.
    Ekt,
    /// The flat torus `S^1(c1) x S^1(c2)`, a minimal surface.
    FlatTorus,
}

/// Scalar options shared by the built-in examples.
#[derive(Debug, Clone, Args)]
pub struct BuiltinParams {
    /// Metallic parameter p of a metallic structure.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub p: f64,
    /// Metallic parameter q of a metallic structure.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub q: f64,
    /// Parameter a of a complex metallic structure.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub a: f64,
    /// Parameter b of a complex metallic structure.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub b: f64,
    /// Base curvature kappa of E(kappa, tau).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub kappa: f64,
    /// Bundle curvature tau of E(kappa, tau), nonzero.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub tau: f64,
    /// Dimension of the first sphere factor.
    #[arg(long, default_value_t = 2)]
    pub n1: usize,
    /// Dimension of the second sphere factor.
    #[arg(long, default_value_t = 2)]
    pub n2: usize,
    /// Curvature of the first factor.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub c1: f64,
    /// Curvature of the second factor.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub c2: f64,
}

impl Default for BuiltinParams {
    fn default() -> Self {
        Self {
            p: 1.0,
            q: 1.0,
            a: 1.0,
            b: 1.0,
            kappa: 0.0,
            tau: 1.0,
            n1: 2,
            n2: 2,
            c1: 1.0,
            c2: 1.0,
        }
    }
}

/// Writes a line to stdout. A closed pipe on the reading end is not an error.
fn print_stdout(text: &str) -> Result<()> {
    use std::io::Write;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => other.context("writing to stdout"),
    }
}

/// Result of a command whose inputs were valid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
}

impl Outcome {
    pub fn exit_code(self) -> u8 {
        match self {
            Outcome::Pass => 0,
            Outcome::Fail => 1,
        }
    }
}

/// `METALLIC_GEO_SEED`, when set to an integer.
pub fn env_seed() -> Option<u64> {
    std::env::var(SEED_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol.is_finite() && tol > 0.0) {
        bail!("tolerance must be positive and finite, got {tol}");
    }
    Ok(())
}

fn sphere_example(params: &BuiltinParams) -> Result<SphereProductExample<f64>> {
    let mp = MetallicParams::new(params.p, params.q)?;
    let ex = SphereProductExample::new(params.n1, params.n2, params.c1, params.c2, mp)?;
    Ok(match env_seed() {
        Some(seed) => ex.with_frame_seed(seed),
        None => ex,
    })
}

fn ekt_example(params: &BuiltinParams) -> Result<EktExample<f64>> {
    if params.tau == 0.0 {
        bail!("tau must be nonzero");
    }
    Ok(EktExample::new(
        params.kappa,
        params.tau,
        params.a,
        params.b,
    )?)
}

fn flat_torus(params: &BuiltinParams) -> Result<SurfaceRecord<f64>> {
    Ok(flat_torus_base(
        MetallicParams::new(params.p, params.q)?,
        params.c1,
        params.c2,
    )?)
}

/// Builds the record of a built-in example.
pub fn builtin_record(name: Builtin, params: &BuiltinParams) -> Result<PointRecord<f64>> {
    Ok(match name {
        Builtin::SphereProduct => build_sphere_product(&sphere_example(params)?)?,
        Builtin::SphereProductHypersurface => {
            build_sphere_product_hypersurface(&sphere_example(params)?)?.1
        }
        Builtin::Ekt => build_ekt_immersion(&ekt_example(params)?)?,
        Builtin::FlatTorus => flat_torus(params)?.record,
    })
}

/// Builds a built-in example and runs the full verdict plus the suites specific to it.
pub fn verify_builtin(name: Builtin, params: &BuiltinParams, tol: f64) -> Result<Report> {
    check_tol(tol)?;
    let (label, rep) = match name {
        Builtin::SphereProduct | Builtin::FlatTorus => {
            let rec = builtin_record(name, params)?;
            let mut rep = full_verdict_with_tol(&rec, tol);
            rep.extend_prefixed("invariant:", &check_invariant(&rec.ops));
            (format!("{name:?}"), rep)
        }
        Builtin::SphereProductHypersurface => {
            let (hyp, rec) = build_sphere_product_hypersurface(&sphere_example(params)?)?;
            let mut rep = full_verdict_with_tol(&rec, tol);
            rep.extend_prefixed(
                "hypersurface:",
                &check_hypersurface_relations(&hyp, rec.ops.params())?,
            );
            (format!("{name:?}"), rep)
        }
        Builtin::Ekt => {
            let ex = ekt_example(params)?;
            let rec = build_ekt_immersion(&ex)?;
            let mut rep = full_verdict_with_tol(&rec, tol);
            rep.extend_prefixed(
                "hypersurface:",
                &check_hypersurface_relations(&ex.hypersurface()?, rec.ops.params())?,
            );
            (
                format!("Ekt(kappa={}, tau={})", params.kappa, params.tau),
                rep,
            )
        }
    };
    Ok(Report::new(
        Metadata::new(tol, env_seed()),
        vec![RecordReport::from_residuals(0, label, &rep)],
    ))
}

/// Reads and parses a dataset file.
pub fn read_dataset(path: &Path) -> Result<Vec<PointRecord<f64>>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    dataset::from_json(&text).with_context(|| format!("invalid dataset {}", path.display()))
}

/// Verifies every record of a dataset concurrently; the report keeps input order.
pub fn verify_records(records: &[PointRecord<f64>], tol: f64) -> Result<Report> {
    check_tol(tol)?;
    let reps = verify_batch(records, tol);
    let recs = reps
        .iter()
        .enumerate()
        .map(|(i, r)| RecordReport::from_residuals(i, format!("record {i}"), r))
        .collect();
    Ok(Report::new(Metadata::new(tol, env_seed()), recs))
}

/// Deforms a minimal base over `count` equally spaced angles and verifies every member.
/// A base that fails its own verdict is reported alone.
pub fn family_sweep(base: &SurfaceRecord<f64>, count: usize, tol: f64) -> Result<Report> {
    check_tol(tol)?;
    if count == 0 {
        bail!("--thetas must be at least 1");
    }
    if !base.is_trace_free() {
        bail!(
            "base surface is not minimal: trace of B = {:?}",
            base.trace_b().as_slice()
        );
    }
    let base_rep = full_verdict_with_tol(&base.record, tol);
    if !base_rep.verdict() {
        let recs = vec![RecordReport::from_residuals(0, "base", &base_rep)];
        return Ok(Report::new(Metadata::new(tol, env_seed()), recs));
    }
    let thetas: Vec<f64> = default_thetas(count);
    let reps = thetas
        .par_iter()
        .map(|&t| deform(base, t).map(|d| full_verdict_with_tol(&d.record.record, tol)))
        .collect::<metallic_core::Result<Vec<ResidualReport64>>>()?;
    let recs = reps
        .iter()
        .zip(&thetas)
        .enumerate()
        .map(|(k, (r, t))| RecordReport::from_residuals(k, format!("theta={t:.6}"), r))
        .collect();
    let mut report = Report::new(Metadata::new(tol, env_seed()), recs);
    let mut continuity = 0.0f64;
    for k in 1..reps.len() {
        let dt = thetas[k] - thetas[k - 1];
        for ((_, a), (_, b)) in reps[k].entries().iter().zip(reps[k - 1].entries()) {
            continuity = continuity.max((a - b).abs() / dt);
        }
    }
    report
        .notes
        .push(("residual variation per radian".into(), continuity));
    Ok(report)
}

fn load_surface(base: &str, params: &BuiltinParams) -> Result<SurfaceRecord<f64>> {
    if base == "flat-torus" {
        return flat_torus(params);
    }
    let mut records = read_dataset(Path::new(base))?;
    if records.len() != 1 {
        bail!(
            "{base}: a family base must contain exactly one record, found {}",
            records.len()
        );
    }
    Ok(SurfaceRecord::new(records.pop().unwrap())?)
}

fn emit(report: &Report, out: Option<&Path>) -> Result<Outcome> {
    print_stdout(&report.table())?;
    if let Some(path) = out {
        std::fs::write(path, report.to_json())
            .with_context(|| format!("cannot write report to {}", path.display()))?;
    }
    Ok(if report.pass() {
        Outcome::Pass
    } else {
        Outcome::Fail
    })
}

/// Runs a parsed command. Errors are usage or data errors.
pub fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Verify {
            source:
                VerifySource::Builtin {
                    name,
                    params,
                    tol,
                    out,
                },
        } => emit(&verify_builtin(name, &params, tol)?, out.as_deref()),
        Command::Verify {
            source: VerifySource::Dataset { file, tol, out },
        } => {
            let records = read_dataset(&file)?;
            emit(&verify_records(&records, tol)?, out.as_deref())
        }
        Command::FamilySweep {
            base,
            thetas,
            tol,
            params,
            out,
        } => {
            let surface = load_surface(&base, &params)?;
            emit(&family_sweep(&surface, thetas, tol)?, out.as_deref())
        }
        Command::Export { name, params, out } => {
            let text = dataset::to_json(&[builtin_record(name, &params)?]);
            match out {
                Some(path) => std::fs::write(&path, text)
                    .with_context(|| format!("cannot write {}", path.display()))?,
                None => print_stdout(&text)?,
            }
            Ok(Outcome::Pass)
        }
    }
}
