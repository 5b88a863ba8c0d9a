use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use isocap::bounds::{bound_report, BoundsConfig, Tail};
use isocap::capacity::{cap_ellipsoid, cap_exact, cap_from_sausage, cap_hitting_mc, reference_capacity, WosConfig, DEFAULT_QUAD_TOL};
use isocap::corpus::{self, Entry};
use isocap::fraenkel::{asymmetry, DEFAULT_SAMPLES};
use isocap::report::{fmt_g, write_bounds_csv, write_sausage_means_csv, write_sausage_paths_csv};
use isocap::sausage::{check_prop3, refinement_pair, run as run_sausage, Membership, SausageConfig, SausageRun};
use isocap::torsion::{functional, torsion, FunctionalKind};
use isocap::verify::{run_suite, VerifyOptions, SUITES};
use isocap::{BoundReport, MCConfig, Shape, ShapeSpec};

use crate::args::{CapacityMethodArg, Cli, Command, CorpusArg, MembershipArg, TailArg};
use crate::config::Config;
use crate::error::{CliError, CliResult};

/// `println!` that tolerates a closed stdout.
macro_rules! say {
    ($($t:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout(), $($t)*);
    }};
}
use crate::manifest::{write_json, RunManifest};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 2;

const DEFAULT_SEED: u64 = 42;
const CAPACITY_SAMPLES: usize = 100_000;
const TORSION_SAMPLES: usize = 20_000;

struct Ctx {
    seed: u64,
    out: PathBuf,
    samples: Option<usize>,
    workers: Option<usize>,
    config: Config,
}

impl Ctx {
    fn mc(&self, default_samples: usize) -> MCConfig {
        MCConfig::new(self.seed, self.samples.unwrap_or(default_samples))
    }

    fn manifest(&self, command: &str) -> RunManifest {
        let mut m = RunManifest::new(command, self.seed);
        m.samples = self.samples;
        m.workers = self.workers;
        m
    }

    fn output_dir(&self) -> CliResult<&Path> {
        std::fs::create_dir_all(&self.out).map_err(|e| CliError::io(&self.out, e))?;
        Ok(&self.out)
    }
}

pub fn run(cli: Cli) -> CliResult<i32> {
    let config = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let workers = cli.workers.or(config.workers);
    if let Some(n) = workers {
        if n == 0 {
            return Err(CliError::Input("--workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Input(format!("worker pool: {e}")))?;
    }
    let ctx = Ctx {
        seed: cli.seed.or(config.seed).unwrap_or(DEFAULT_SEED),
        out: cli.out.clone().or_else(|| config.out.clone()).unwrap_or_else(|| PathBuf::from(".")),
        samples: cli.samples.or(config.samples),
        workers,
        config,
    };
    match cli.command {
        Command::Bounds { shape, cd, tail, t_max_factor } => cmd_bounds(&ctx, &shape, cd, tail, t_max_factor),
        Command::Capacity { shape, method } => cmd_capacity(&ctx, &shape, method),
        Command::Torsion { shape } => cmd_torsion(&ctx, &shape),
        Command::Functional { shape, kind, alpha } => cmd_functional(&ctx, &shape, &kind, alpha),
        Command::Asymmetry { shape } => cmd_asymmetry(&ctx, &shape),
        Command::Sweep { corpus, cd } => cmd_sweep(&ctx, corpus, cd),
        Command::Sausage { d, eps, t_max, paths, dt, check_bounds, refine, membership } => {
            let c = &ctx.config;
            let args = SausageArgs {
                d: d.or(c.d).unwrap_or(5),
                eps: eps.or(c.eps).unwrap_or(0.5),
                t_max: t_max.or(c.t_max).unwrap_or(20.0),
                paths: paths.or(c.paths).unwrap_or(200),
                dt: dt.or(c.dt).unwrap_or(1e-3),
                check_bounds,
                refine,
                membership: match membership {
                    MembershipArg::Bridge => Membership::Bridge,
                    MembershipArg::Capsule => Membership::Capsule,
                },
            };
            cmd_sausage(&ctx, &args)
        }
        Command::Verify { suite, cd, alpha } => cmd_verify(&ctx, &suite, cd, alpha),
    }
}

pub fn load_shape(path: &Path) -> CliResult<(String, Shape)> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let spec: ShapeSpec =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: invalid shape: {e}", path.display())))?;
    let id = path.file_stem().map_or("shape".to_string(), |s| s.to_string_lossy().into_owned());
    Ok((id, Shape::new(spec)?))
}

#[derive(Serialize)]
struct Printed<'a, T: Serialize> {
    manifest: &'a RunManifest,
    result: T,
}

fn print_json<T: Serialize>(manifest: &RunManifest, result: T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(&Printed { manifest, result })
        .map_err(|e| CliError::Input(format!("json output: {e}")))?;
    say!("{text}");
    Ok(())
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(|e| CliError::io(path, e))?))
}

fn bounds_config(ctx: &Ctx, cd: Option<f64>, tail: Option<TailArg>, t_max_factor: Option<f64>) -> CliResult<BoundsConfig> {
    let mut cfg = BoundsConfig { c_d: cd.or(ctx.config.cd), ..BoundsConfig::default() };
    let tail = match (tail, ctx.config.tail.as_deref()) {
        (Some(t), _) => t,
        (None, None) | (None, Some("exact")) => TailArg::Exact,
        (None, Some("truncated")) => TailArg::Truncated,
        (None, Some(other)) => return Err(CliError::Input(format!("config: unknown tail '{other}'"))),
    };
    cfg.tail = match tail {
        TailArg::Exact => Tail::Exact,
        TailArg::Truncated => Tail::Truncated,
    };
    if let Some(f) = t_max_factor.or(ctx.config.t_max_factor) {
        cfg.t_max_factor = f;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn bounds_manifest(ctx: &Ctx, command: &str, cfg: &BoundsConfig) -> RunManifest {
    let mut m = ctx
        .manifest(command)
        .tolerance("quad_tol", cfg.quad_tol)
        .tolerance("golden_tol", cfg.golden_tol)
        .tolerance("t_max_factor", cfg.t_max_factor)
        .tolerance("violation_sigmas", 3.0);
    m.c_d = cfg.c_d;
    m
}

fn print_report(r: &BoundReport) {
    say!("{} ({}, d = {}): reference {} [{}] +- {}", r.shape, r.kind, r.d, fmt_g(r.reference.value), r.reference.method.name(), fmt_g(r.reference.stderr));
    for (name, b) in &r.bounds {
        let slack = r.slack[name].map_or("-".to_string(), fmt_g);
        say!("  {name:<20} {:>20}  slack {slack}", fmt_g(b.value));
    }
    for v in r.violations() {
        say!("  VIOLATION {} = {}", v.0, fmt_g(v.1));
    }
}

fn cmd_bounds(ctx: &Ctx, path: &Path, cd: Option<f64>, tail: Option<TailArg>, t_max_factor: Option<f64>) -> CliResult<i32> {
    let (id, shape) = load_shape(path)?;
    let cfg = bounds_config(ctx, cd, tail, t_max_factor)?;
    let mc = ctx.mc(DEFAULT_SAMPLES);
    let report = bound_report(&id, &shape, &cfg, Some(mc))?;
    let dir = ctx.output_dir()?;
    write_json(&dir.join("report.json"), &report)?;
    write_bounds_csv(create(&dir.join("report.csv"))?, std::slice::from_ref(&report), Some(ctx.seed))?;
    let mut m = bounds_manifest(ctx, "bounds", &cfg);
    m.samples = Some(mc.samples);
    m.shape_files.push(path.display().to_string());
    m.outputs = vec!["report.json".into(), "report.csv".into()];
    m.write(dir)?;
    print_report(&report);
    Ok(if report.dominates() { EXIT_OK } else { EXIT_VIOLATION })
}

fn cmd_capacity(ctx: &Ctx, path: &Path, method: CapacityMethodArg) -> CliResult<i32> {
    let (_, shape) = load_shape(path)?;
    let mc = ctx.mc(CAPACITY_SAMPLES);
    let est = match method {
        CapacityMethodArg::Auto => reference_capacity(&shape, Some(mc))?,
        CapacityMethodArg::Exact => cap_exact(&shape)?,
        CapacityMethodArg::Quadrature => cap_ellipsoid(&shape, DEFAULT_QUAD_TOL)?,
        CapacityMethodArg::Wos => cap_hitting_mc(&shape, &WosConfig::new(mc))?,
    };
    let mut m = ctx.manifest("capacity").tolerance("quad_tol", DEFAULT_QUAD_TOL);
    m.samples = est.method.is_mc().then_some(mc.samples);
    m.shape_files.push(path.display().to_string());
    print_json(&m, &est)?;
    Ok(EXIT_OK)
}

fn cmd_torsion(ctx: &Ctx, path: &Path) -> CliResult<i32> {
    let (_, shape) = load_shape(path)?;
    let mc = ctx.mc(TORSION_SAMPLES);
    let t = torsion(&shape, Some(mc))?;
    let mut m = ctx.manifest("torsion");
    m.samples = (t.stderr > 0.0).then_some(mc.samples);
    m.shape_files.push(path.display().to_string());
    print_json(&m, &t)?;
    Ok(EXIT_OK)
}

fn cmd_functional(ctx: &Ctx, path: &Path, kind: &str, alpha: Option<f64>) -> CliResult<i32> {
    let (_, shape) = load_shape(path)?;
    let kind = FunctionalKind::parse(kind)?;
    let mc = ctx.mc(TORSION_SAMPLES);
    let v = functional(kind, alpha.or(ctx.config.alpha).unwrap_or(0.0), &shape, Some(mc))?;
    let mut m = ctx.manifest("functional").tolerance("quad_tol", DEFAULT_QUAD_TOL);
    m.samples = Some(mc.samples);
    m.shape_files.push(path.display().to_string());
    print_json(&m, &v)?;
    Ok(EXIT_OK)
}

fn cmd_asymmetry(ctx: &Ctx, path: &Path) -> CliResult<i32> {
    let (_, shape) = load_shape(path)?;
    let mc = ctx.mc(DEFAULT_SAMPLES);
    let a = asymmetry(&shape, mc)?;
    let mut m = ctx.manifest("asymmetry").tolerance("value_tol", isocap::fraenkel::VALUE_TOL);
    m.samples = Some(mc.samples);
    m.shape_files.push(path.display().to_string());
    print_json(&m, &a)?;
    Ok(EXIT_OK)
}

fn corpus_entries(which: CorpusArg, seed: u64) -> Vec<Entry> {
    match which {
        CorpusArg::All => corpus::all(seed),
        CorpusArg::Convex => corpus::convex(seed),
        CorpusArg::Balls => corpus::balls(),
        CorpusArg::Ellipsoids => corpus::ellipsoids(seed),
        CorpusArg::Boxes => corpus::boxes(seed),
        CorpusArg::Polytopes => corpus::polytopes(seed),
        CorpusArg::Segments => corpus::segment_families(),
    }
}

fn cmd_sweep(ctx: &Ctx, which: CorpusArg, cd: Option<f64>) -> CliResult<i32> {
    let cfg = bounds_config(ctx, cd, None, None)?;
    let mc = ctx.mc(DEFAULT_SAMPLES);
    let entries = corpus_entries(which, ctx.seed);
    let reports: Vec<BoundReport> = entries
        .par_iter()
        .map(|e| Ok(bound_report(&e.id, &Shape::new(e.spec.clone())?, &cfg, Some(mc))?))
        .collect::<CliResult<_>>()?;
    let dir = ctx.output_dir()?;
    write_json(&dir.join("sweep.json"), &reports)?;
    write_bounds_csv(create(&dir.join("sweep.csv"))?, &reports, Some(ctx.seed))?;
    let mut m = bounds_manifest(ctx, "sweep", &cfg);
    m.samples = Some(mc.samples);
    m.outputs = vec!["sweep.json".into(), "sweep.csv".into()];
    m.write(dir)?;
    let bad: Vec<&BoundReport> = reports.iter().filter(|r| !r.dominates()).collect();
    say!("{} shapes, {} with violations", reports.len(), bad.len());
    for r in &bad {
        print_report(r);
    }
    Ok(if bad.is_empty() { EXIT_OK } else { EXIT_VIOLATION })
}

struct SausageArgs {
    d: usize,
    eps: f64,
    t_max: f64,
    paths: usize,
    dt: f64,
    check_bounds: bool,
    refine: bool,
    membership: Membership,
}

#[derive(Serialize)]
struct SausageSummary {
    config: SausageConfig,
    slope: isocap::sausage::SlopeFit,
    capacity_estimate: isocap::CapacityEstimate,
    capacity_exact: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    refinement: Option<isocap::sausage::RefinementReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bounds: Option<isocap::sausage::Prop3Report>,
}

fn cmd_sausage(ctx: &Ctx, a: &SausageArgs) -> CliResult<i32> {
    if a.check_bounds && a.d < 5 {
        return Err(CliError::Input(format!("--check-bounds needs d >= 5, got d = {}", a.d)));
    }
    if !(a.eps > 0.0 && a.t_max > 0.0) {
        return Err(CliError::Input("--eps and --t-max must be positive".into()));
    }
    let mut cfg = SausageConfig::ball(a.d, a.eps, a.t_max, a.paths, a.dt, ctx.seed);
    cfg.membership = a.membership;
    cfg.validate()?;
    let (run, refinement): (SausageRun, _) = if a.refine {
        let (_, fine, rep) = refinement_pair(&cfg)?;
        (fine, Some(rep))
    } else {
        (run_sausage(&cfg)?, None)
    };
    let slope = run.slope()?;
    let capacity_estimate = cap_from_sausage(&run)?;
    let capacity_exact = cap_exact(&Shape::new(cfg.body.clone())?)?.value;
    let bounds = if a.check_bounds { Some(check_prop3(&run)?) } else { None };
    let dir = ctx.output_dir()?;
    write_sausage_means_csv(create(&dir.join("sausage_means.csv"))?, &run)?;
    write_sausage_paths_csv(create(&dir.join("sausage_paths.csv"))?, &run)?;
    let pass = bounds.as_ref().is_none_or(|b| b.pass);
    let summary = SausageSummary { config: cfg, slope, capacity_estimate, capacity_exact, refinement, bounds };
    write_json(&dir.join("sausage_summary.json"), &summary)?;
    let mut m = ctx
        .manifest("sausage")
        .tolerance("dt", run.dt)
        .tolerance("burn_in", run.burn_in)
        .tolerance("violation_sigmas", 3.0);
    m.samples = Some(a.paths);
    m.outputs = vec!["sausage_means.csv".into(), "sausage_paths.csv".into(), "sausage_summary.json".into()];
    m.write(dir)?;
    say!(
        "slope {} +- {} (capacity of the ball {})",
        fmt_g(summary.slope.slope),
        fmt_g(summary.slope.stderr),
        fmt_g(capacity_exact)
    );
    if let Some(r) = &summary.refinement {
        say!("dt-halving change {} ({})", fmt_g(r.change), if r.stable { "stable" } else { "unstable" });
    }
    if let Some(b) = &summary.bounds {
        let ball = b.bounds.ball.map_or("-".to_string(), fmt_g);
        say!("bounds: general {}, ball {ball}: {}", fmt_g(b.bounds.general), if b.pass { "pass" } else { "VIOLATION" });
    }
    Ok(if pass { EXIT_OK } else { EXIT_VIOLATION })
}

fn cmd_verify(ctx: &Ctx, suite: &str, cd: Option<f64>, alpha: Option<f64>) -> CliResult<i32> {
    if !SUITES.contains(&suite) {
        return Err(CliError::Input(format!("unknown suite '{suite}'; expected one of {}", SUITES.join(", "))));
    }
    let defaults = VerifyOptions::default();
    let cd = cd.or(ctx.config.cd);
    let opts = VerifyOptions {
        seed: ctx.seed,
        c_d: cd.into_iter().collect(),
        alpha: alpha.or(ctx.config.alpha),
        capacity_samples: ctx.samples.unwrap_or(defaults.capacity_samples),
        ..defaults
    };
    let report = run_suite(suite, &opts)?;
    let dir = ctx.output_dir()?;
    let name = format!("verify_{suite}.json");
    write_json(&dir.join(&name), &report)?;
    let mut m = ctx.manifest("verify").tolerance("violation_sigmas", 3.0);
    m.c_d = cd;
    m.samples = Some(opts.capacity_samples);
    m.outputs = vec![name];
    m.write(dir)?;
    for c in report.failures() {
        say!(
            "FAIL {} {}: {} {:?} {} (tol {})",
            c.subject,
            c.quantity,
            fmt_g(c.value),
            c.relation,
            fmt_g(c.reference),
            fmt_g(c.tolerance)
        );
    }
    say!("{suite}: {} ({} checks, {} failed)", if report.pass { "pass" } else { "FAIL" }, report.checks.len(), report.failures().len());
    Ok(if report.pass { EXIT_OK } else { EXIT_VIOLATION })
}
