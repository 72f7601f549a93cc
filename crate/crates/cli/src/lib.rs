//! Front end for the `cavity` binary: flag and config-file resolution,
//! command dispatch and output rendering.

pub mod config;
pub mod report;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use cavity_core::bounds::{
    decay_certificate, depth_for_accuracy, free_energy, kmax_for_tolerance, pattern_state,
    surface_pressure, DepthPlan, FreeEnergyOptions, Normalization, Regime, SurfaceOptions,
};
use cavity_core::cavity::{evaluate, EngineConfig};
use cavity_core::interval::ParityBracket;
use cavity_core::oracle::{self, FiniteBox, Method};
use cavity_core::{Error, LatticePoint, ModelKind, ModelSpec, Pattern, ShapeVector};

use config::{pick, Auto, FileLayer, List, Span};
use report::{
    Format, FreeEnergyRecord, OracleRecord, Report, SeedRecord, SurfaceRecord, TransferRecord,
};

pub const WORKERS_ENV: &str = "CAVITY_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "cavity", version, about = "Certified free-energy bounds for lattice models")]
pub struct Cli {
    /// `key = value` file supplying defaults for any long flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Interval on the free energy per site, one record per activity.
    FreeEnergy(FreeEnergyArgs),
    /// Interval on the surface pressure for a box shape.
    SurfacePressure(SurfaceArgs),
    /// Exact reference values on small boxes and strips.
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long)]
    pub model: Option<ModelKind>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// One activity or a comma-separated sweep.
    #[arg(long)]
    pub lambda: Option<List<f64>>,
    /// Recursion depth, or `auto` to plan it from --eps.
    #[arg(long)]
    pub depth: Option<Auto>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub format: Option<Format>,
    /// Decimal places in text output.
    #[arg(long)]
    pub digits: Option<usize>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub no_memo: bool,
    /// Rounding charge per arithmetic step, in ulps.
    #[arg(long)]
    pub ulps: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FreeEnergyArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub pattern: Option<Pattern>,
    /// Show `exp` of the interval in text output.
    #[arg(long)]
    pub exp: bool,
    /// Recompute both parities in separate runs and report them.
    #[arg(long)]
    pub seedless_check: bool,
    /// `activity` (Σ λ^|M|) or `monomer` (monomer weight 1/λ); dimer only.
    #[arg(long)]
    pub normalization: Option<Normalization>,
}

#[derive(Debug, Args)]
pub struct SurfaceArgs {
    #[command(flatten)]
    pub common: Common,
    /// Box aspect ratios a1,...,ad.
    #[arg(long)]
    pub shape: Option<List<f64>>,
    /// Last series index, or `auto` to bound the tail by --eps.
    #[arg(long)]
    pub kmax: Option<Auto>,
    /// Compute partial sums even without a decay guarantee.
    #[arg(long)]
    pub allow_uncertified: bool,
    /// Evaluate every axis even for cubic shapes.
    #[arg(long)]
    pub no_symmetry: bool,
}

#[derive(Debug, Subcommand)]
pub enum OracleCommand {
    /// Partition function of a box.
    Partition(BoxArgs),
    /// Probability that a vertex is unoccupied (hard-core) or unmatched (dimer).
    Marginal(MarginalArgs),
    /// Free energy of the line or a strip of Z^2 by transfer matrix.
    Transfer(TransferArgs),
}

#[derive(Debug, Args)]
pub struct OracleCommon {
    #[arg(long)]
    pub model: Option<ModelKind>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct BoxArgs {
    #[command(flatten)]
    pub common: OracleCommon,
    /// Inclusive coordinate ranges, e.g. `-1:1,0:2`.
    #[arg(long = "box", allow_hyphen_values = true)]
    pub boxes: Option<List<Span>>,
    #[arg(long)]
    pub method: Option<Method>,
    /// Largest box, in vertices, the oracle accepts.
    #[arg(long)]
    pub cap: Option<usize>,
}

#[derive(Debug, Args)]
pub struct MarginalArgs {
    #[command(flatten)]
    pub boxed: BoxArgs,
    /// Vertex coordinates; defaults to the origin.
    #[arg(long, allow_hyphen_values = true)]
    pub vertex: Option<List<i32>>,
}

#[derive(Debug, Args)]
pub struct TransferArgs {
    #[command(flatten)]
    pub common: OracleCommon,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub width: Option<usize>,
}

const COMMON_KEYS: &[&str] = &[
    "model", "dim", "lambda", "depth", "eps", "format", "digits", "workers", "no-memo", "ulps",
];
const FREE_ENERGY_KEYS: &[&str] = &["pattern", "exp", "seedless-check", "normalization"];
const SURFACE_KEYS: &[&str] = &["shape", "kmax", "allow-uncertified", "no-symmetry"];
const ORACLE_KEYS: &[&str] = &[
    "model", "lambda", "format", "box", "method", "cap", "vertex", "dim", "width",
];

fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}

fn required<T>(v: Option<T>, flag: &str) -> Result<T, Error> {
    v.ok_or_else(|| usage(format!("--{flag} is required (on the command line or in the config file)")))
}

/// Settings shared by the bound-producing commands, after merging.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub model: ModelKind,
    pub dim: usize,
    pub lambdas: Vec<f64>,
    pub depth: Auto,
    pub eps: Option<f64>,
    pub format: Format,
    pub digits: usize,
    pub engine: EngineConfig,
}

/// Flag, then config file, then `CAVITY_WORKERS`, then 1.
pub fn resolve_workers(cli: Option<usize>, file: &FileLayer, env: Option<&str>) -> Result<usize, Error> {
    let workers = match pick(cli, file, "workers")? {
        Some(w) => w,
        None => match env {
            Some(s) if !s.trim().is_empty() => s
                .trim()
                .parse()
                .map_err(|_| usage(format!("{WORKERS_ENV}='{s}' is not a worker count")))?,
            _ => 1,
        },
    };
    if workers == 0 {
        return Err(usage("worker count must be >= 1"));
    }
    Ok(workers)
}

fn resolve_common(c: Common, file: &FileLayer) -> Result<Resolved, Error> {
    let model = required(pick(c.model, file, "model")?, "model")?;
    let dim = required(pick(c.dim, file, "dim")?, "dim")?;
    if dim == 0 {
        return Err(usage("--dim must be >= 1"));
    }
    let lambdas = required(pick(c.lambda, file, "lambda")?, "lambda")?.0;
    if let Some(l) = lambdas.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
        return Err(usage(format!("activity must be finite and >= 0, got {l}")));
    }
    let depth = required(pick(c.depth, file, "depth")?, "depth")?;
    let eps = pick(c.eps, file, "eps")?;
    if let Some(e) = eps {
        if !(e > 0.0 && e.is_finite()) {
            return Err(usage(format!("--eps must be > 0, got {e}")));
        }
    }
    let ulps = pick(c.ulps, file, "ulps")?.unwrap_or(EngineConfig::default().ulps_per_step);
    if !(ulps >= 0.0 && ulps.is_finite()) {
        return Err(usage(format!("--ulps must be >= 0, got {ulps}")));
    }
    let env = std::env::var(WORKERS_ENV).ok();
    let engine = EngineConfig {
        memo: !(c.no_memo || file.flag("no-memo")?),
        workers: resolve_workers(c.workers, file, env.as_deref())?,
        ulps_per_step: ulps,
        ..EngineConfig::default()
    };
    Ok(Resolved {
        model,
        dim,
        lambdas,
        depth,
        eps,
        format: pick(c.format, file, "format")?.unwrap_or_default(),
        digits: pick(c.digits, file, "digits")?.unwrap_or(6),
        engine,
    })
}

fn plan_depth(r: &Resolved, lambda: f64) -> Result<u32, Error> {
    match r.depth {
        Auto::Fixed(t) => Ok(t),
        Auto::Auto => {
            let eps = r.eps.ok_or_else(|| usage("--depth auto needs --eps"))?;
            match depth_for_accuracy(r.model, r.dim, lambda, eps)? {
                DepthPlan::Depth(t) => Ok(t),
                DepthPlan::Refused { reason } => Err(Error::Refusal(reason)),
            }
        }
    }
}

/// Evaluates `f` over the sweep in input order. With several points and
/// several workers the points run concurrently, each single-threaded.
fn sweep<T: Send>(
    lambdas: &[f64],
    engine: &EngineConfig,
    f: impl Fn(f64, &EngineConfig) -> Result<T, Error> + Sync,
) -> Result<Vec<T>, Error> {
    if lambdas.len() > 1 && engine.workers > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(engine.workers)
            .build()
            .map_err(|e| Error::InternalConsistency(format!("thread pool: {e}")))?;
        let single = EngineConfig {
            workers: 1,
            ..engine.clone()
        };
        pool.install(|| lambdas.par_iter().map(|&l| f(l, &single)).collect())
    } else {
        lambdas.iter().map(|&l| f(l, engine)).collect()
    }
}

/// Runs depths `t` and `t + 1` as separate traversals and checks them
/// against the brackets of the combined run.
fn seedless_check(
    spec: &ModelSpec,
    pattern: Pattern,
    t: u32,
    engine: &EngineConfig,
    brackets: &[ParityBracket],
) -> Result<Vec<SeedRecord>, Error> {
    let state = pattern_state(spec, pattern, t + 1)?;
    let origin = LatticePoint::origin(spec.dim);
    let mut out = Vec::new();
    for s in [t, t + 1] {
        let pair = evaluate(&state, &origin, s, engine)?;
        let joint = brackets
            .iter()
            .find(|b| b.depth == s)
            .ok_or_else(|| Error::InternalConsistency(format!("no bracket for depth {s}")))?;
        if pair.phi.to_bits() != joint.phi.to_bits() || pair.psi.to_bits() != joint.psi.to_bits() {
            return Err(Error::InternalConsistency(format!(
                "depth {s}: separate run gives Φ={}, Ψ={} but the joint run gives Φ={}, Ψ={}",
                pair.phi, pair.psi, joint.phi, joint.psi
            )));
        }
        out.push(SeedRecord {
            depth: s,
            phi: pair.phi,
            psi: pair.psi,
        });
    }
    Ok(out)
}

pub fn cmd_free_energy(args: FreeEnergyArgs, file: &FileLayer) -> Result<(Report, Format, report::TextOptions), Error> {
    file.check_keys(&[COMMON_KEYS, FREE_ENERGY_KEYS].concat())?;
    let r = resolve_common(args.common, file)?;
    let pattern = pick(args.pattern, file, "pattern")?.unwrap_or(Pattern::Plain);
    let normalization = pick(args.normalization, file, "normalization")?.unwrap_or_default();
    if normalization == Normalization::Monomer && r.model != ModelKind::Dimer {
        return Err(usage("--normalization monomer applies to the dimer model only"));
    }
    let show_exp = args.exp || file.flag("exp")?;
    let check = args.seedless_check || file.flag("seedless-check")?;

    let records = sweep(&r.lambdas, &r.engine, |lambda, engine| {
        let start = Instant::now();
        let t = plan_depth(&r, lambda)?;
        let opts = FreeEnergyOptions {
            engine: engine.clone(),
            normalization,
        };
        let b = free_energy(r.model, r.dim, lambda, t, pattern, &opts)?;
        let e = b.exp();
        let cert = decay_certificate(r.model, r.dim, lambda);
        let seedless = if check {
            let activity = match normalization {
                Normalization::Activity => lambda,
                Normalization::Monomer => lambda * lambda,
            };
            let spec = ModelSpec::new(r.model, activity, r.dim)?;
            Some(seedless_check(&spec, pattern, t, engine, &b.meta.parities)?)
        } else {
            None
        };
        Ok(FreeEnergyRecord {
            model: r.model,
            d: r.dim,
            lambda,
            pattern,
            normalization,
            t,
            lower: b.lower,
            upper: b.upper,
            exp_lower: e.lower,
            exp_upper: e.upper,
            regime: cert.regime,
            certificate: cert,
            rounding: b.meta.rounding.clone(),
            parities: b.meta.parities.clone(),
            notes: b.meta.notes.clone(),
            seedless,
            runtime_ms: start.elapsed().as_millis() as u64,
        })
    })?;
    let text = report::TextOptions {
        digits: r.digits,
        exp: show_exp,
    };
    Ok((Report::FreeEnergy { records }, r.format, text))
}

pub fn cmd_surface_pressure(args: SurfaceArgs, file: &FileLayer) -> Result<(Report, Format, report::TextOptions), Error> {
    file.check_keys(&[COMMON_KEYS, SURFACE_KEYS].concat())?;
    let r = resolve_common(args.common, file)?;
    let shape = match pick(args.shape, file, "shape")? {
        Some(s) => ShapeVector::new(s.0)?,
        None => ShapeVector::cube(r.dim),
    };
    let kmax = pick(args.kmax, file, "kmax")?.unwrap_or(Auto::Auto);
    let allow = args.allow_uncertified || file.flag("allow-uncertified")?;
    let symmetry = !(args.no_symmetry || file.flag("no-symmetry")?);

    let records = sweep(&r.lambdas, &r.engine, |lambda, engine| {
        let start = Instant::now();
        let cert = decay_certificate(r.model, r.dim, lambda);
        if cert.regime == Regime::Unproven && !allow {
            return Err(Error::Refusal(format!(
                "surface series for {} at d={}, λ={lambda} has no convergence guarantee; {} (use --allow-uncertified for partial sums)",
                r.model,
                r.dim,
                cert.notes.join("; ")
            )));
        }
        let t = plan_depth(&r, lambda)?;
        let k_max = match kmax {
            Auto::Fixed(k) => k,
            Auto::Auto => {
                let eps = r.eps.ok_or_else(|| usage("--kmax auto needs --eps"))?;
                kmax_for_tolerance(&cert, eps).ok_or_else(|| {
                    Error::Refusal("--kmax auto needs a decay certificate; give an explicit --kmax".into())
                })?
            }
        };
        let opts = SurfaceOptions {
            engine: engine.clone(),
            allow_uncertified: allow,
            symmetry_reuse: symmetry,
            tail_tolerance: r.eps,
        };
        let rep = surface_pressure(r.model, r.dim, lambda, &shape, t, k_max, &opts)?;
        Ok(SurfaceRecord {
            model: r.model,
            d: r.dim,
            lambda,
            shape: shape.entries().to_vec(),
            t,
            k_max,
            lower: rep.interval.lower,
            upper: rep.interval.upper,
            tail: rep.tail,
            regime: rep.certificate.regime,
            certificate: rep.certificate,
            rounding: rep.interval.meta.rounding.clone(),
            terms: rep.terms,
            warnings: rep.warnings,
            runtime_ms: start.elapsed().as_millis() as u64,
        })
    })?;
    let text = report::TextOptions {
        digits: r.digits,
        exp: false,
    };
    Ok((Report::SurfacePressure { records }, r.format, text))
}

fn oracle_model(c: &OracleCommon, file: &FileLayer, dim: usize) -> Result<ModelSpec, Error> {
    let kind = required(pick(c.model, file, "model")?, "model")?;
    let lambda = required(pick(c.lambda, file, "lambda")?, "lambda")?;
    ModelSpec::new(kind, lambda, dim)
}

/// The box, its ranges as given, and the counting method.
type BoxSetup = (FiniteBox, Vec<(i32, i32)>, Method);

fn oracle_box(b: &BoxArgs, file: &FileLayer) -> Result<BoxSetup, Error> {
    let spans = required(pick(b.boxes.clone(), file, "box")?, "box")?;
    let ranges: Vec<(i32, i32)> = spans.0.iter().map(|s| (s.0, s.1)).collect();
    let mut fb = FiniteBox::from_ranges(&ranges)?;
    if let Some(cap) = pick(b.cap, file, "cap")? {
        fb = fb.with_cap(cap);
    }
    let method = match pick(b.method, file, "method")? {
        Some(m) => m,
        None => match required(pick(b.common.model, file, "model")?, "model")? {
            ModelKind::Hardcore => Method::SliceDp,
            ModelKind::Dimer => Method::Deletion,
        },
    };
    Ok((fb, ranges, method))
}

pub fn cmd_oracle(cmd: OracleCommand, file: &FileLayer) -> Result<(Report, Format, report::TextOptions), Error> {
    file.check_keys(ORACLE_KEYS)?;
    let text = report::TextOptions { digits: 12, exp: false };
    match cmd {
        OracleCommand::Partition(b) => {
            let (fb, ranges, method) = oracle_box(&b, file)?;
            let spec = oracle_model(&b.common, file, ranges.len())?;
            let res = oracle::partition_function_with(&fb, &spec, method)?;
            let format = pick(b.common.format, file, "format")?.unwrap_or_default();
            Ok((Report::Oracle(OracleRecord::from_result("partition", &spec, ranges, None, fb.vertices().len(), res)), format, text))
        }
        OracleCommand::Marginal(m) => {
            let (fb, ranges, method) = oracle_box(&m.boxed, file)?;
            let spec = oracle_model(&m.boxed.common, file, ranges.len())?;
            let v = match pick(m.vertex, file, "vertex")? {
                Some(v) => LatticePoint::new(v.0)?,
                None => LatticePoint::origin(ranges.len()),
            };
            if v.dim() != ranges.len() {
                return Err(usage(format!("--vertex has {} coordinates but the box has {}", v.dim(), ranges.len())));
            }
            let res = oracle::marginal_with(&fb, &v, &spec, method)?;
            let format = pick(m.boxed.common.format, file, "format")?.unwrap_or_default();
            let n = fb.vertices().len();
            Ok((Report::Oracle(OracleRecord::from_result("marginal", &spec, ranges, Some(v.coords().to_vec()), n, res)), format, text))
        }
        OracleCommand::Transfer(t) => {
            let dim = pick(t.dim, file, "dim")?.unwrap_or(1);
            let width = pick(t.width, file, "width")?.unwrap_or(1);
            let spec = oracle_model(&t.common, file, dim)?;
            let res = oracle::transfer_matrix_free_energy(spec.kind, spec.lambda, width, dim)?;
            let format = pick(t.common.format, file, "format")?.unwrap_or_default();
            let rec = TransferRecord {
                model: spec.kind,
                d: dim,
                lambda: spec.lambda,
                result: res,
            };
            Ok((Report::Transfer(rec), format, text))
        }
    }
}

/// Parses nothing; runs an already-parsed command line and renders it.
pub fn run(cli: Cli) -> Result<String, Error> {
    let file = match &cli.config {
        Some(p) => FileLayer::load(p)?,
        None => FileLayer::default(),
    };
    let (rep, format, text) = match cli.command {
        Command::FreeEnergy(a) => cmd_free_energy(a, &file)?,
        Command::SurfacePressure(a) => cmd_surface_pressure(a, &file)?,
        Command::Oracle(c) => cmd_oracle(c, &file)?,
    };
    report::render(&rep, format, &text)
}

/// Process exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Usage(_) => 2,
        Error::Refusal(_) | Error::Capacity(_) => 3,
        Error::InternalConsistency(_) => 4,
    }
}
