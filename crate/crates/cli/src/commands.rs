//! Subcommand bodies. Each resolves and validates its configuration first,
//! then computes, then writes.

use std::path::PathBuf;
use std::str::FromStr;

use abcd_core::analysis::{
    stationary_identities, fast_front_limit, fast_front_obstruction, fast_front_obstruction_unchecked,
    recompute_thresholds, reduced_obstruction_fast, slow_front_chain_scan, slow_front_excluded, IdentityReport,
    FrontChainScan, SlowFrontScan, ThresholdReport,
};
use abcd_core::continuation::{sweep_fast, sweep_slow, Branch, StepSettings, Thresholds};
use abcd_core::discretize::Grid;
use abcd_core::io::{BranchRecord, OutputFormat, SCHEMA_VERSION};
use abcd_core::model::{
    abcd_residual, boussinesq_fast_profile, fast_front_velocity, phi, stationary_exact,
    stationary_first_integral, FastFamily, SlowFamily, StationaryBranch,
};
use abcd_core::par::{self, Execution};
use abcd_core::solver::{newton_solve, NewtonSettings, System};
use abcd_core::verify::{run_suite, CheckResult};
use serde::Serialize;

use crate::args::{
    ContinueFastArgs, ContinueSlowArgs, FastBaseArgs, FrontsArgs, GlobalArgs, GridArgs, StationaryArgs, StepArgs,
    SweepArgs,
};
use crate::config::{positive, FastCase, Resolver};
use crate::error::CliError;
use crate::output::Output;

const FIRST_INTEGRAL_TOL: f64 = 1e-7;
const CREST_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExecMode {
    Sequential,
    Parallel,
}

impl FromStr for ExecMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sequential" => Ok(Self::Sequential),
            "parallel" => Ok(Self::Parallel),
            other => Err(format!("unknown execution mode `{other}` (sequential, parallel)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BranchArg(pub StationaryBranch);

impl FromStr for BranchArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "plus" => Ok(Self(StationaryBranch::Plus)),
            "minus" => Ok(Self(StationaryBranch::Minus)),
            other => Err(format!("unknown branch `{other}` (plus, minus)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Slow,
    Fast,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "slow" => Ok(Self::Slow),
            "fast" => Ok(Self::Fast),
            other => Err(format!("unknown mode `{other}` (slow, fast)")),
        }
    }
}

/// Settings shared by every command.
pub struct Common {
    pub out: Output,
    pub exec: Execution,
}

/// Output location and formats are resolved up front but the directory is
/// only created once the command-specific values have been validated.
struct CommonPlan {
    out: PathBuf,
    exec: Execution,
    formats: Vec<OutputFormat>,
}

impl CommonPlan {
    fn resolve(r: &Resolver, g: &GlobalArgs) -> Result<Self, CliError> {
        let out = r.or("out", g.out.clone(), PathBuf::from("out"))?;
        let mut formats = r
            .list("format", g.format.clone())?
            .unwrap_or_else(|| vec![OutputFormat::Csv, OutputFormat::Json]);
        formats.dedup();
        let exec = match r.get("exec", g.exec)? {
            Some(ExecMode::Sequential) => Execution::Sequential,
            Some(ExecMode::Parallel) if cfg!(feature = "parallel") => Execution::Parallel,
            Some(ExecMode::Parallel) => {
                return Err(CliError::Config("built without the `parallel` feature".into()))
            }
            None => Execution::default(),
        };
        Ok(Self { out, exec, formats })
    }

    fn open(self) -> Result<Common, CliError> {
        Ok(Common {
            out: Output::create(&self.out, self.formats)?,
            exec: self.exec,
        })
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
struct GridConfig {
    half_length: f64,
    n: usize,
}

impl GridConfig {
    fn resolve(r: &Resolver, a: &GridArgs, half_length: f64, n: usize) -> Result<Self, CliError> {
        let cfg = Self {
            half_length: r.or("half_length", a.half_length, half_length)?,
            n: r.or("n", a.n, n)?,
        };
        cfg.grid()?;
        Ok(cfg)
    }

    fn grid(&self) -> Result<Grid, CliError> {
        Ok(Grid::even(self.half_length, self.n)?)
    }
}

fn resolve_steps(r: &Resolver, a: &StepArgs, base: StepSettings) -> Result<StepSettings, CliError> {
    let d = Thresholds::default();
    let s = StepSettings {
        initial_step: r.or("initial_step", a.initial_step, base.initial_step)?,
        max_step: r.or("max_step", a.max_step, base.max_step)?,
        max_points: r.or("max_points", a.max_points, base.max_points)?,
        tail_tol: r.or("tail_tol", a.tail_tol, base.tail_tol)?,
        max_retruncations: r.or("max_retruncations", a.max_retruncations, base.max_retruncations)?,
        thresholds: Thresholds {
            gap_tol: r.or("gap_tol", a.gap_tol, d.gap_tol)?,
            stag_tol: r.or("stag_tol", a.stag_tol, d.stag_tol)?,
            n_max: r.or("n_max", a.n_max, d.n_max)?,
        },
        newton: NewtonSettings {
            residual_tol: r.or("residual_tol", a.residual_tol, base.newton.residual_tol)?,
            max_iters: r.or("max_iters", a.max_iters, base.newton.max_iters)?,
            ..base.newton
        },
        ..base
    };
    for (k, v) in [
        ("initial_step", s.initial_step),
        ("max_step", s.max_step),
        ("tail_tol", s.tail_tol),
        ("gap_tol", s.thresholds.gap_tol),
        ("stag_tol", s.thresholds.stag_tol),
        ("n_max", s.thresholds.n_max),
        ("residual_tol", s.newton.residual_tol),
    ] {
        positive(k, v)?;
    }
    if s.max_step < s.initial_step {
        return Err(CliError::Config("`max_step` must be at least `initial_step`".into()));
    }
    if s.max_points == 0 || s.newton.max_iters == 0 {
        return Err(CliError::Config("`max_points` and `max_iters` must be positive".into()));
    }
    Ok(s)
}

fn sup(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}

// ---------------------------------------------------------------- stationary

#[derive(Serialize)]
struct StationaryConfig {
    beta: f64,
    branch: StationaryBranch,
    grid: GridConfig,
    verify: bool,
}

#[derive(Serialize)]
struct NewtonSummary {
    residual: f64,
    iterations: usize,
    smallest_singular_value: f64,
    distance_to_closed_form: f64,
}

#[derive(Serialize)]
struct Verification {
    first_integral: f64,
    first_integral_tol: f64,
    passed: bool,
}

#[derive(Serialize)]
struct StationaryReport {
    schema: u32,
    command: &'static str,
    config: StationaryConfig,
    u0: f64,
    eta0: f64,
    abcd_residual: f64,
    newton: Option<NewtonSummary>,
    identities: IdentityReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    verification: Option<Verification>,
}

pub fn stationary(g: &GlobalArgs, a: &StationaryArgs, r: &Resolver) -> Result<(), CliError> {
    let plan = CommonPlan::resolve(r, g)?;
    let beta = positive("beta", r.required("beta", a.beta)?)?;
    SlowFamily::new(beta)?;
    let branch = r.or("branch", a.branch, BranchArg(StationaryBranch::Plus))?.0;
    let grid_cfg = GridConfig::resolve(r, &a.grid, 30.0, 2048)?;
    let verify = r.or("verify", a.verify.then_some(true), false)?;
    let c = plan.open()?;
    c.out.log(&format!("stationary beta={beta} branch={branch:?}"));

    let grid = grid_cfg.grid()?;
    let profile = stationary_exact(beta, branch, &grid)?;
    let identities = stationary_identities(&profile, beta, branch)?;
    let residual = abcd_residual(&profile)?.sup_norm();
    // Newton polishes the plus wave only: that is the one the slow branch
    // starts from, and its linearization is the one monitored there.
    let newton = if branch == StationaryBranch::Plus {
        let out = newton_solve(&System::Slow { beta }, &profile, 0.0, &NewtonSettings::default())?;
        Some(NewtonSummary {
            residual: out.residual_history.last().copied().unwrap_or(f64::NAN),
            iterations: out.iterations,
            smallest_singular_value: out.report.smallest_singular_value,
            distance_to_closed_form: sup(out
                .profile
                .u
                .iter()
                .zip(&profile.u)
                .chain(out.profile.eta.iter().zip(&profile.eta))
                .map(|(a, b)| a - b)),
        })
    } else {
        None
    };
    let verification = verify.then(|| {
        let fi = sup(stationary_first_integral(&profile, beta));
        Verification {
            first_integral: fi,
            first_integral_tol: FIRST_INTEGRAL_TOL,
            passed: fi < FIRST_INTEGRAL_TOL,
        }
    });
    let (u0, eta0) = profile.crest();
    let report = StationaryReport {
        schema: SCHEMA_VERSION,
        command: "stationary",
        config: StationaryConfig { beta, branch, grid: grid_cfg, verify },
        u0,
        eta0,
        abcd_residual: residual,
        newton,
        identities,
        verification,
    };
    c.out.profile("stationary", &profile)?;
    c.out.json("stationary", &report)?;
    println!("u(0) = {u0:.10}  eta(0) = {eta0:.10}  residual = {residual:.3e}");
    if let Some(v) = &report.verification {
        println!("first integral = {:.3e} (tol {:.0e})", v.first_integral, v.first_integral_tol);
        if !v.passed {
            return Err(CliError::Verification(format!(
                "first-integral residual {:.3e} >= {:.0e}",
                v.first_integral, FIRST_INTEGRAL_TOL
            )));
        }
    }
    c.out.log("stationary done");
    Ok(())
}

// ---------------------------------------------------------------- fast-base

#[derive(Serialize)]
struct FastBaseConfig {
    lambda: f64,
    grid: GridConfig,
}

#[derive(Serialize)]
struct FastBaseReport {
    schema: u32,
    command: &'static str,
    config: FastBaseConfig,
    crest: f64,
    crest_lower_bound: f64,
    crest_upper_bound: f64,
    crest_in_bounds: bool,
    u0: f64,
    eta0: f64,
    quadrature_residual: f64,
    eta_identity_residual: f64,
}

pub fn fast_base(g: &GlobalArgs, a: &FastBaseArgs, r: &Resolver) -> Result<(), CliError> {
    let plan = CommonPlan::resolve(r, g)?;
    let lambda = r.required("lambda", a.lambda)?;
    if !(lambda > 1.0 && lambda.is_finite()) {
        return Err(CliError::Config(format!("`lambda` must exceed 1, got {lambda}")));
    }
    let grid_cfg = GridConfig::resolve(r, &a.grid, 40.0, 2048)?;
    let c = plan.open()?;
    c.out.log(&format!("fast-base lambda={lambda}"));

    let wave = boussinesq_fast_profile(lambda, &grid_cfg.grid()?)?;
    let p = &wave.profile;
    let lower = fast_front_velocity(lambda);
    let (u0, eta0) = p.crest();
    let report = FastBaseReport {
        schema: SCHEMA_VERSION,
        command: "fast-base",
        config: FastBaseConfig { lambda, grid: grid_cfg },
        crest: wave.crest,
        crest_lower_bound: lower,
        crest_upper_bound: lambda,
        crest_in_bounds: u0 > lower - CREST_SLACK && u0 < lambda + CREST_SLACK,
        u0,
        eta0,
        quadrature_residual: sup(p.u.iter().zip(&wave.du).map(|(u, du)| lambda * du * du - phi(lambda, *u))),
        eta_identity_residual: sup(p.u.iter().zip(&p.eta).map(|(u, e)| e - u / (lambda - u))),
    };
    c.out.profile("fast_base", p)?;
    c.out.json("fast_base", &report)?;
    println!(
        "crest u(0) = {u0:.10} in ({lower:.10}, {lambda}): {}  quadrature residual = {:.3e}",
        report.crest_in_bounds, report.quadrature_residual
    );
    c.out.log("fast-base done");
    Ok(())
}

// ---------------------------------------------------------------- continuation

#[derive(Serialize)]
struct ContinuationConfig {
    system: System,
    param_max: f64,
    grid: GridConfig,
    steps: StepSettings,
}

#[derive(Serialize)]
struct BranchFile<'a> {
    #[serde(flatten)]
    record: BranchRecord,
    config: &'a ContinuationConfig,
}

/// Writes `branch.json` and one profile per accepted point under `points/`.
fn write_branch(out: &Output, branch: &Branch, config: &ContinuationConfig) -> Result<BranchRecord, CliError> {
    let record = BranchRecord::from_branch(branch);
    if out.wants(OutputFormat::Csv) || out.wants(OutputFormat::GnuplotDat) {
        let points = out.job("points")?;
        for (i, p) in branch.points.iter().enumerate() {
            points.profile(&format!("point_{i:04}"), &p.profile)?;
        }
    }
    out.json("branch", &BranchFile { record: record.clone(), config })?;
    Ok(record)
}

fn print_branch(record: &BranchRecord, param: &str) {
    println!(
        "{} points, furthest {param} = {:.8} (critical {:.8}), termination: {} ({})",
        record.points.len(),
        record.furthest_param,
        record.critical_param,
        record.termination.reason,
        record.termination.detail
    );
}

pub fn continue_slow(g: &GlobalArgs, a: &ContinueSlowArgs, r: &Resolver) -> Result<(), CliError> {
    let plan = CommonPlan::resolve(r, g)?;
    let beta = positive("beta", r.required("beta", a.beta)?)?;
    SlowFamily::new(beta)?;
    let lambda_max = positive("lambda_max", r.or("lambda_max", a.lambda_max, 1.0)?)?;
    let grid_cfg = GridConfig::resolve(r, &a.grid, 40.0, 4096)?;
    let steps = resolve_steps(r, &a.steps, StepSettings::slow())?;
    let config = ContinuationConfig {
        system: System::Slow { beta },
        param_max: lambda_max,
        grid: grid_cfg,
        steps,
    };
    let c = plan.open()?;
    c.out.log(&format!("continue-slow beta={beta} lambda_max={lambda_max}"));
    let branch = abcd_core::continuation::continue_slow(beta, lambda_max, &grid_cfg.grid()?, &steps)?;
    let record = write_branch(&c.out, &branch, &config)?;
    print_branch(&record, "lambda");
    c.out.log(&format!("continue-slow done: {}", record.termination.reason));
    Ok(())
}

pub fn continue_fast(g: &GlobalArgs, a: &ContinueFastArgs, r: &Resolver) -> Result<(), CliError> {
    let plan = CommonPlan::resolve(r, g)?;
    let lambda = r.required("lambda", a.lambda)?;
    let k = r.required("k", a.k)?;
    FastFamily::new(k, 0.0, lambda)?;
    let s_max = positive("s_max", r.or("s_max", a.s_max, 1.0 / 3.0)?)?;
    let grid_cfg = GridConfig::resolve(r, &a.grid, 40.0, 4096)?;
    let steps = resolve_steps(r, &a.steps, StepSettings::fast())?;
    let config = ContinuationConfig {
        system: System::Fast { k, lambda },
        param_max: s_max,
        grid: grid_cfg,
        steps,
    };
    let c = plan.open()?;
    c.out.log(&format!("continue-fast lambda={lambda} k={k} s_max={s_max}"));
    let branch = abcd_core::continuation::continue_fast(lambda, k, s_max, &grid_cfg.grid()?, &steps)?;
    let record = write_branch(&c.out, &branch, &config)?;
    print_branch(&record, "s");
    c.out.log(&format!("continue-fast done: {}", record.termination.reason));
    Ok(())
}

// ---------------------------------------------------------------- sweep

#[derive(Serialize)]
struct SweepEntry {
    job: String,
    system: System,
    furthest_param: Option<f64>,
    termination: Option<String>,
    error: Option<String>,
}

#[derive(Serialize)]
struct SweepIndex {
    schema: u32,
    command: &'static str,
    jobs: Vec<SweepEntry>,
}

pub fn sweep(g: &GlobalArgs, a: &SweepArgs, r: &Resolver) -> Result<(), CliError> {
    let plan = CommonPlan::resolve(r, g)?;
    let family: Mode = r.required("family", a.family)?;
    let grid_cfg = GridConfig::resolve(r, &a.grid, 40.0, 4096)?;
    let (systems, param_max, steps) = match family {
        Mode::Slow => {
            let betas = r
                .list("betas", a.betas.clone())?
                .ok_or_else(|| CliError::Config("slow sweep needs `betas`".into()))?;
            for b in &betas {
                SlowFamily::new(positive("betas", *b)?)?;
            }
            let lambda_max = positive("lambda_max", r.or("lambda_max", a.lambda_max, 1.0)?)?;
            let systems: Vec<System> = betas.iter().map(|&beta| System::Slow { beta }).collect();
            (systems, lambda_max, resolve_steps(r, &a.steps, StepSettings::slow())?)
        }
        Mode::Fast => {
            let cases: Vec<FastCase> = r
                .list("cases", a.cases.clone())?
                .ok_or_else(|| CliError::Config("fast sweep needs `cases` as lambda:k pairs".into()))?;
            for c in &cases {
                FastFamily::new(c.k, 0.0, c.lambda)?;
            }
            let s_max = positive("s_max", r.or("s_max", a.s_max, 1.0 / 3.0)?)?;
            let systems = cases.iter().map(|c| System::Fast { k: c.k, lambda: c.lambda }).collect();
            (systems, s_max, resolve_steps(r, &a.steps, StepSettings::fast())?)
        }
    };
    if systems.is_empty() {
        return Err(CliError::Config("sweep has no jobs".into()));
    }
    let c = plan.open()?;
    c.out.log(&format!("sweep {} jobs", systems.len()));
    let grid = grid_cfg.grid()?;
    let branches = match family {
        Mode::Slow => {
            let betas: Vec<f64> = systems
                .iter()
                .map(|s| match *s {
                    System::Slow { beta } => beta,
                    System::Fast { .. } => unreachable!("slow sweep"),
                })
                .collect();
            sweep_slow(&betas, param_max, &grid, &steps, c.exec)
        }
        Mode::Fast => {
            let cases: Vec<(f64, f64)> = systems
                .iter()
                .map(|s| match *s {
                    System::Fast { k, lambda } => (lambda, k),
                    System::Slow { .. } => unreachable!("fast sweep"),
                })
                .collect();
            sweep_fast(&cases, param_max, &grid, &steps, c.exec)
        }
    };
    // Each job owns its directory, so the writes never contend.
    let jobs: Vec<(usize, &System, &Result<Branch, _>)> =
        systems.iter().zip(&branches).enumerate().map(|(i, (s, b))| (i, s, b)).collect();
    let entries = par::map(c.exec, &jobs, |&(i, system, result)| -> Result<SweepEntry, CliError> {
        let name = match *system {
            System::Slow { beta } => format!("job_{i:03}_beta_{beta}"),
            System::Fast { k, lambda } => format!("job_{i:03}_lambda_{lambda}_k_{k}"),
        };
        let out = c.out.job(&name)?;
        Ok(match result {
            Ok(branch) => {
                let config = ContinuationConfig { system: *system, param_max, grid: grid_cfg, steps };
                let record = write_branch(&out, branch, &config)?;
                SweepEntry {
                    job: name,
                    system: *system,
                    furthest_param: Some(record.furthest_param),
                    termination: Some(record.termination.reason.to_string()),
                    error: None,
                }
            }
            Err(e) => SweepEntry {
                job: name,
                system: *system,
                furthest_param: None,
                termination: None,
                error: Some(e.to_string()),
            },
        })
    });
    let entries = entries.into_iter().collect::<Result<Vec<_>, _>>()?;
    for e in &entries {
        match (&e.furthest_param, &e.termination, &e.error) {
            (Some(p), Some(t), _) => println!("{}: furthest {p:.8}, termination {t}", e.job),
            (_, _, Some(err)) => println!("{}: failed: {err}", e.job),
            _ => {}
        }
    }
    let failed = entries.iter().filter(|e| e.error.is_some()).count();
    c.out.json("sweep", &SweepIndex { schema: SCHEMA_VERSION, command: "sweep", jobs: entries })?;
    c.out.log(&format!("sweep done, {failed} failed jobs"));
    if failed > 0 {
        return Err(CliError::Numerical(format!("{failed} sweep job(s) failed")));
    }
    Ok(())
}

// ---------------------------------------------------------------- fronts

#[derive(Serialize)]
struct FastFrontSample {
    lambda: f64,
    ubar: f64,
    etabar: f64,
    obstruction: f64,
    reduced: f64,
}

#[derive(Serialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
enum FrontsReport {
    Slow {
        schema: u32,
        beta: f64,
        scan: SlowFrontScan,
        chain: FrontChainScan,
        thresholds: ThresholdReport,
    },
    Fast {
        schema: u32,
        lambda_max: f64,
        samples: Vec<FastFrontSample>,
        all_negative: bool,
        value_near_one: f64,
    },
}

pub fn fronts(g: &GlobalArgs, a: &FrontsArgs, r: &Resolver) -> Result<(), CliError> {
    let plan = CommonPlan::resolve(r, g)?;
    let mode: Mode = r.required("mode", a.mode)?;
    let scan_n: usize = r.or("scan_n", a.scan_n, 10_000)?;
    if scan_n == 0 {
        return Err(CliError::Config("`scan_n` must be positive".into()));
    }
    let report = match mode {
        Mode::Slow => {
            let beta = positive("beta", r.required("beta", a.beta)?)?;
            let c = plan.open()?;
            c.out.log(&format!("fronts slow beta={beta}"));
            let scan = slow_front_excluded(beta, scan_n, c.exec)?;
            let chain = slow_front_chain_scan(beta, scan_n, c.exec)?;
            println!(
                "G max on (0, 1/t^2) = {:.6e} at z = {:.6e}: fronts excluded = {}",
                scan.max_g, scan.argmax_z, scan.excluded
            );
            let report = FrontsReport::Slow {
                schema: SCHEMA_VERSION,
                beta,
                scan,
                chain,
                thresholds: recompute_thresholds(),
            };
            (c, report)
        }
        Mode::Fast => {
            let lambda_max: f64 = r.or("lambda_max", a.lambda_max, 10.0)?;
            if !(lambda_max > 1.0 && lambda_max.is_finite()) {
                return Err(CliError::Config(format!("`lambda_max` must exceed 1, got {lambda_max}")));
            }
            let samples_n: usize = r.or("samples", a.samples, 100)?;
            if samples_n == 0 {
                return Err(CliError::Config("`samples` must be positive".into()));
            }
            let c = plan.open()?;
            c.out.log(&format!("fronts fast lambda_max={lambda_max}"));
            let lambdas: Vec<f64> = (1..=samples_n)
                .map(|i| 1.0 + (lambda_max - 1.0) * i as f64 / samples_n as f64)
                .collect();
            let samples = par::map(c.exec, &lambdas, |&lambda| -> Result<FastFrontSample, CliError> {
                let lim = fast_front_limit(lambda);
                Ok(FastFrontSample {
                    lambda,
                    ubar: lim.ubar,
                    etabar: lim.etabar,
                    obstruction: fast_front_obstruction(lambda)?,
                    reduced: reduced_obstruction_fast(lambda)?,
                })
            })
            .into_iter()
            .collect::<Result<Vec<_>, _>>()?;
            let all_negative = samples.iter().all(|s| s.obstruction < 0.0);
            let value_near_one = fast_front_obstruction_unchecked(1.0 + 1e-6);
            println!("obstruction < 0 on all {samples_n} samples: {all_negative}; value at 1+1e-6 = {value_near_one:.3e}");
            let report = FrontsReport::Fast {
                schema: SCHEMA_VERSION,
                lambda_max,
                samples,
                all_negative,
                value_near_one,
            };
            (c, report)
        }
    };
    let (c, report) = report;
    c.out.json("fronts", &report)?;
    c.out.log("fronts done");
    Ok(())
}

// ---------------------------------------------------------------- verify

#[derive(Serialize)]
struct VerifyReport {
    schema: u32,
    command: &'static str,
    passed: bool,
    checks: Vec<CheckResult>,
}

pub fn verify(g: &GlobalArgs, r: &Resolver) -> Result<(), CliError> {
    let c = CommonPlan::resolve(r, g)?.open()?;
    c.out.log("verify start");
    let checks = run_suite(c.exec);
    for check in &checks {
        println!("{}", check.line());
        c.out.log(&check.line());
    }
    let failed: Vec<u8> = checks.iter().filter(|c| !c.passed).map(|c| c.id).collect();
    let report = VerifyReport {
        schema: SCHEMA_VERSION,
        command: "verify",
        passed: failed.is_empty(),
        checks,
    };
    c.out.json("verify", &report)?;
    let total = report.checks.len();
    println!("{}/{total} checks passed", total - failed.len());
    if !failed.is_empty() {
        return Err(CliError::Verification(format!("checks {failed:?} failed")));
    }
    c.out.log("verify done");
    Ok(())
}
