//! Branch tracing for the slow family in `λ` and the fast family in `s`.
//!
//! A branch is a sequence of converged even profiles. Each step uses a secant
//! predictor in the parameter and switches to a pseudo-arclength corrector
//! when consecutive secants turn by more than 60°. Failed corrections halve
//! the step; the trace stops on a regime threshold, a nodal violation, an
//! exhausted parameter range, or a step below `min_step_factor × initial_step`.

use serde::{Deserialize, Serialize};

use crate::discretize::{DiscreteOperator, Grid, Symmetry};
use crate::error::{ContinuationError, SolverError};
use crate::model::{
    boussinesq_fast_profile, fast_d, stationary_exact, FastFamily, SlowFamily, StationaryBranch,
    WaveProfile,
};
use crate::par::{self, Execution};
use crate::solver::{
    c2_norm, interleave, newton_solve_with, residual_vector, split, sup, LinearizationReport,
    NewtonSettings, System,
};

/// Regime thresholds used to classify where a branch ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub gap_tol: f64,
    pub stag_tol: f64,
    pub n_max: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            gap_tol: 1e-3,
            stag_tol: 1e-3,
            n_max: 1e6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepSettings {
    pub initial_step: f64,
    pub max_step: f64,
    /// Step growth after an easy correction.
    pub growth: f64,
    /// Give up once the step falls below this fraction of `initial_step`.
    pub min_step_factor: f64,
    pub max_points: usize,
    /// Largest `|u|, |η|` tolerated in the last 10% of the grid.
    pub tail_tol: f64,
    /// Total number of 1.5× domain extensions allowed along a branch.
    pub max_retruncations: usize,
    /// Slack for the strict sign tests.
    pub nodal_tol: f64,
    pub thresholds: Thresholds,
    pub newton: NewtonSettings,
}

impl StepSettings {
    pub fn slow() -> Self {
        Self {
            initial_step: 0.01,
            max_step: 0.02,
            growth: 1.5,
            min_step_factor: 1e-8,
            max_points: 2000,
            tail_tol: 1e-8,
            max_retruncations: 3,
            nodal_tol: 1e-10,
            thresholds: Thresholds::default(),
            newton: NewtonSettings::default(),
        }
    }

    pub fn fast() -> Self {
        Self {
            initial_step: 0.004,
            max_step: 0.008,
            ..Self::slow()
        }
    }

    fn validate(&self) -> Result<(), ContinuationError> {
        let positive = [
            self.initial_step,
            self.max_step,
            self.min_step_factor,
            self.tail_tol,
            self.thresholds.gap_tol,
            self.thresholds.stag_tol,
            self.thresholds.n_max,
            self.newton.residual_tol,
        ];
        if positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) || self.growth < 1.0 {
            return Err(ContinuationError::InvalidInput(
                "step settings must be positive and finite".into(),
            ));
        }
        if self.max_step < self.initial_step {
            return Err(ContinuationError::InvalidInput(
                "max_step must not be smaller than initial_step".into(),
            ));
        }
        Ok(())
    }
}

/// Which sign pattern a profile is tested against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodalPattern {
    /// `u > 0, η < 0`, `u′ < 0, η′ > 0` on the positive half-line.
    Slow,
    /// `u, η > 0`, `u′, η′ < 0` on the positive half-line.
    Fast,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodalFlags {
    pub u_sign: bool,
    pub eta_sign: bool,
    pub du_sign: bool,
    pub deta_sign: bool,
    /// Crest bound on `η(0)`; fast branch only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta_bound: Option<bool>,
}

impl NodalFlags {
    pub fn all(&self) -> bool {
        self.u_sign && self.eta_sign && self.du_sign && self.deta_sign && self.eta_bound != Some(false)
    }
}

/// Sign tests on an even half-line profile. Values may violate a sign by at
/// most `tol`; derivative signs use two-point centered differences at the
/// interior nodes.
pub fn nodal_check(profile: &WaveProfile, pattern: NodalPattern, tol: f64) -> NodalFlags {
    let (su, se, sdu, sde) = match pattern {
        NodalPattern::Slow => (1.0, -1.0, -1.0, 1.0),
        NodalPattern::Fast => (1.0, 1.0, -1.0, -1.0),
    };
    let signed_ok = |f: &[f64], sign: f64| f.iter().all(|v| sign * v > -tol);
    let h2 = 2.0 * profile.grid.spacing();
    let slope_ok = |f: &[f64], sign: f64| {
        f.windows(3).all(|w| sign * (w[2] - w[0]) / h2 > -tol)
    };
    let n = profile.u.len();
    // The pinned last node is zero and its ghost is odd, so it carries no sign.
    let u = &profile.u[..n - 1];
    let eta = &profile.eta[..n - 1];
    NodalFlags {
        u_sign: signed_ok(u, su),
        eta_sign: signed_ok(eta, se),
        du_sign: slope_ok(&profile.u, sdu),
        deta_sign: slope_ok(&profile.eta, sde),
        eta_bound: None,
    }
}

/// Upper bound on the fast-branch crest elevation in terms of `u(0)`.
pub fn fast_eta_bound(u0: f64, s: f64, k: f64, lambda: f64) -> f64 {
    let d = fast_d(k, s);
    (d * lambda + (lambda - 0.5 * u0) * k * s) * u0 / (d * lambda * (lambda - u0) + k * s)
}

/// Relative slack granted to the crest bound, which is attained at `s = 0`.
const ETA_BOUND_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    /// Sup-norm of the family residual with pinned Dirichlet rows.
    pub residual: f64,
    pub nodal: NodalFlags,
    pub ellipticity_gap: f64,
    /// `λ − max u`; fast branch only.
    pub stagnation_gap: Option<f64>,
    /// Blowup quantity `N`; `None` where the distance to the boundary vanishes.
    pub blowup: Option<f64>,
    pub u0: f64,
    pub eta0: f64,
    /// Exponential tail rate of `u` fitted where it is between 1e-10 and
    /// 1e-3 of the crest.
    pub decay_rate: Option<f64>,
}

/// Diagnostics depend only on the profile and the parameter.
pub fn diagnose(
    system: &System,
    profile: &WaveProfile,
    param: f64,
    nodal_tol: f64,
) -> Result<DiagnosticsReport, SolverError> {
    let op = DiscreteOperator::for_grid(&profile.grid);
    let residual = sup(&residual_vector(system, &op, &profile.u, &profile.eta, param)?);
    let (u0, eta0) = profile.crest();
    let ellipticity_gap = system.ellipticity_gap(param);
    let (pattern, stagnation_gap, dist) = match *system {
        System::Slow { .. } => (NodalPattern::Slow, None, ellipticity_gap.min(param)),
        System::Fast { lambda, .. } => {
            let stag = lambda - profile.max_u();
            (NodalPattern::Fast, Some(stag), ellipticity_gap.min(stag))
        }
    };
    let mut nodal = nodal_check(profile, pattern, nodal_tol);
    if let System::Fast { k, lambda } = *system {
        let bound = fast_eta_bound(u0, param, k, lambda);
        nodal.eta_bound = Some(eta0 <= bound + ETA_BOUND_SLACK * bound.abs().max(1.0));
    }
    let blowup = (dist > 0.0).then(|| c2_norm(profile) + param + 1.0 / dist);
    Ok(DiagnosticsReport {
        residual,
        nodal,
        ellipticity_gap,
        stagnation_gap,
        blowup,
        u0,
        eta0,
        decay_rate: tail_decay_rate(profile),
    })
}

fn tail_decay_rate(profile: &WaveProfile) -> Option<f64> {
    let peak = profile.u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let pts: Vec<(f64, f64)> = profile
        .u
        .iter()
        .enumerate()
        .filter(|(_, v)| {
            let r = v.abs() / peak;
            r > 1e-10 && r < 1e-3
        })
        .map(|(j, v)| (profile.grid.x(j), v.abs().ln()))
        .collect();
    if pts.len() < 8 {
        return None;
    }
    let m = pts.len() as f64;
    let (sx, sy, sxx, sxy) = pts.iter().fold((0.0, 0.0, 0.0, 0.0), |acc, (x, y)| {
        (acc.0 + x, acc.1 + y, acc.2 + x * x, acc.3 + x * y)
    });
    Some(-(m * sxy - sx * sy) / (m * sxx - sx * sx))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub param: f64,
    pub profile: WaveProfile,
    pub diagnostics: DiagnosticsReport,
    pub linearization: LinearizationReport,
    pub newton_iterations: usize,
    /// Whether the pseudo-arclength corrector produced this point.
    pub arclength: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationReason {
    LossOfEllipticity,
    StagnationLimit,
    Blowup,
    NodalViolation,
    NewtonFailureAfterRefinement,
    ParameterRangeExhausted,
}

impl TerminationReason {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::LossOfEllipticity => "loss_of_ellipticity",
            Self::StagnationLimit => "stagnation_limit",
            Self::Blowup => "blowup",
            Self::NodalViolation => "nodal_violation",
            Self::NewtonFailureAfterRefinement => "newton_failure_after_refinement",
            Self::ParameterRangeExhausted => "parameter_range_exhausted",
        }
    }
}

impl std::fmt::Display for TerminationReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Termination {
    pub reason: TerminationReason,
    pub detail: String,
}

/// What stopped the stepping loop, before threshold precedence is applied.
#[derive(Debug, Clone, PartialEq)]
pub enum StopEvent {
    Threshold,
    RangeExhausted(String),
    NodalViolation(String),
    NewtonFailure(String),
}

/// Applies the precedence gap, stagnation, blowup, then the stop event.
pub fn classify_termination(
    history: &[DiagnosticsReport],
    event: &StopEvent,
    thresholds: &Thresholds,
) -> Termination {
    let Some(last) = history.last() else {
        return Termination {
            reason: TerminationReason::NewtonFailureAfterRefinement,
            detail: "empty branch".into(),
        };
    };
    if last.ellipticity_gap < thresholds.gap_tol {
        return Termination {
            reason: TerminationReason::LossOfEllipticity,
            detail: format!("ellipticity gap {:.6e} < {:.1e}", last.ellipticity_gap, thresholds.gap_tol),
        };
    }
    if let Some(stag) = last.stagnation_gap.filter(|g| *g < thresholds.stag_tol) {
        return Termination {
            reason: TerminationReason::StagnationLimit,
            detail: format!("stagnation gap {stag:.6e} < {:.1e}", thresholds.stag_tol),
        };
    }
    if let Some(n) = last.blowup.filter(|n| *n > thresholds.n_max) {
        return Termination {
            reason: TerminationReason::Blowup,
            detail: format!("N = {n:.6e} > {:.1e}", thresholds.n_max),
        };
    }
    let (reason, detail) = match event {
        StopEvent::Threshold | StopEvent::RangeExhausted(_) => (
            TerminationReason::ParameterRangeExhausted,
            match event {
                StopEvent::RangeExhausted(d) => d.clone(),
                _ => "threshold event without a crossed threshold".into(),
            },
        ),
        StopEvent::NodalViolation(d) => (TerminationReason::NodalViolation, d.clone()),
        StopEvent::NewtonFailure(d) => (TerminationReason::NewtonFailureAfterRefinement, d.clone()),
    };
    Termination { reason, detail }
}

fn crosses_threshold(d: &DiagnosticsReport, t: &Thresholds) -> bool {
    d.ellipticity_gap < t.gap_tol
        || d.stagnation_gap.is_some_and(|g| g < t.stag_tol)
        || d.blowup.is_some_and(|n| n > t.n_max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub system: System,
    pub points: Vec<BranchPoint>,
    pub termination: Termination,
}

impl Branch {
    /// Largest parameter value among accepted points.
    pub fn furthest_param(&self) -> f64 {
        self.points.iter().map(|p| p.param).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Traces the slow branch from the stationary wave `(U₀⁺, 0)` up to `lambda_max`.
pub fn continue_slow(
    beta: f64,
    lambda_max: f64,
    grid: &Grid,
    settings: &StepSettings,
) -> Result<Branch, ContinuationError> {
    SlowFamily::new(beta)?;
    if !(lambda_max > 0.0 && lambda_max.is_finite()) {
        return Err(ContinuationError::InvalidInput(format!(
            "lambda_max must be positive, got {lambda_max}"
        )));
    }
    check_grid(grid)?;
    let start = stationary_exact(beta, StationaryBranch::Plus, grid)?;
    trace(System::Slow { beta }, start, 0.0, lambda_max, settings)
}

/// Traces the fast branch at fixed speed from the Boussinesq wave up to `s_max`.
pub fn continue_fast(
    lambda: f64,
    k: f64,
    s_max: f64,
    grid: &Grid,
    settings: &StepSettings,
) -> Result<Branch, ContinuationError> {
    FastFamily::new(k, 0.0, lambda)?;
    if !(s_max > 0.0 && s_max.is_finite()) {
        return Err(ContinuationError::InvalidInput(format!(
            "s_max must be positive, got {s_max}"
        )));
    }
    check_grid(grid)?;
    let start = boussinesq_fast_profile(lambda, grid)?.profile;
    trace(System::Fast { k, lambda }, start, 0.0, s_max, settings)
}

fn check_grid(grid: &Grid) -> Result<(), ContinuationError> {
    if grid.symmetry() != Symmetry::EvenHalfLine {
        return Err(ContinuationError::InvalidInput(
            "continuation runs on an even half-line grid".into(),
        ));
    }
    Ok(())
}

/// Independent slow branches for several `β`.
pub fn sweep_slow(
    betas: &[f64],
    lambda_max: f64,
    grid: &Grid,
    settings: &StepSettings,
    exec: Execution,
) -> Vec<Result<Branch, ContinuationError>> {
    par::map(exec, betas, |&beta| continue_slow(beta, lambda_max, grid, settings))
}

/// Independent fast branches for several `(λ, k)`.
pub fn sweep_fast(
    cases: &[(f64, f64)],
    s_max: f64,
    grid: &Grid,
    settings: &StepSettings,
    exec: Execution,
) -> Vec<Result<Branch, ContinuationError>> {
    par::map(exec, cases, |&(lambda, k)| {
        continue_fast(lambda, k, s_max, grid, settings)
    })
}

/// Interleaved state of an accepted point, zero-padded to `len` unknowns.
fn padded_state(p: &BranchPoint, len: usize) -> Vec<f64> {
    let mut x = interleave(&p.profile.u, &p.profile.eta);
    // Extensions append nodes past the pinned end, where the field is zero.
    x.resize(len, 0.0);
    x
}

fn weighted_dot(a: &[f64], b: &[f64], h: f64) -> f64 {
    h * a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>()
}

struct Secant {
    dx: Vec<f64>,
    dp: f64,
}

impl Secant {
    fn norm(&self, h: f64) -> f64 {
        (weighted_dot(&self.dx, &self.dx, h) + self.dp * self.dp).sqrt()
    }
}

fn secant(a: &BranchPoint, b: &BranchPoint, len: usize) -> Secant {
    let xa = padded_state(a, len);
    let xb = padded_state(b, len);
    Secant {
        dx: xb.iter().zip(&xa).map(|(p, q)| p - q).collect(),
        dp: b.param - a.param,
    }
}

/// Cosine of the turn between the last two secants.
fn secant_turn(points: &[BranchPoint], grid: &Grid) -> Option<f64> {
    let k = points.len();
    if k < 3 {
        return None;
    }
    let len = 2 * grid.len();
    let h = grid.spacing();
    let s0 = secant(&points[k - 3], &points[k - 2], len);
    let s1 = secant(&points[k - 2], &points[k - 1], len);
    let dot = weighted_dot(&s0.dx, &s1.dx, h) + s0.dp * s1.dp;
    Some(dot / (s0.norm(h) * s1.norm(h)))
}

/// Bordered Newton iteration for `F(x, p) = 0` with the arclength row
/// `⟨t, (x, p) − (x̂, p̂)⟩ = 0`.
fn arclength_correct(
    system: &System,
    op: &DiscreteOperator,
    predicted: (Vec<f64>, f64),
    tangent: &Secant,
    settings: &NewtonSettings,
) -> Result<(Vec<f64>, f64), SolverError> {
    let h = op.grid().spacing();
    let (x_hat, p_hat) = predicted;
    let (mut x, mut p) = (x_hat.clone(), p_hat);
    let pinned = op.grid().dirichlet_nodes();
    for _ in 0..settings.max_iters {
        let (u, eta) = split(&x);
        system.check_admissible(&u, p)?;
        let f = residual_vector(system, op, &u, &eta, p)?;
        let diff: Vec<f64> = x.iter().zip(&x_hat).map(|(a, b)| a - b).collect();
        let arc = weighted_dot(&tangent.dx, &diff, h) + tangent.dp * (p - p_hat);
        if sup(&f).max(arc.abs()) <= settings.residual_tol {
            return Ok((x, p));
        }
        let lu = system.jacobian(op, &u, &eta, p)?.to_band().lu()?;
        let fp = system.param_derivative(op, &u, &eta, p);
        let mut fp = interleave(&fp.mass, &fp.momentum);
        for &j in &pinned {
            fp[2 * j] = 0.0;
            fp[2 * j + 1] = 0.0;
        }
        let neg_f: Vec<f64> = f.iter().map(|v| -v).collect();
        let a = lu.solve(&neg_f);
        let b = lu.solve(&fp);
        let denom = tangent.dp - weighted_dot(&tangent.dx, &b, h);
        if denom == 0.0 || !denom.is_finite() {
            return Err(SolverError::NonFinite);
        }
        let dp = (-arc - weighted_dot(&tangent.dx, &a, h)) / denom;
        for i in 0..x.len() {
            x[i] += a[i] - b[i] * dp;
        }
        p += dp;
        if !p.is_finite() {
            return Err(SolverError::NonFinite);
        }
    }
    Err(SolverError::MaxIterations {
        iterations: settings.max_iters,
        residual: f64::NAN,
    })
}

struct Tracer<'a> {
    system: System,
    settings: &'a StepSettings,
    grid: Grid,
    op: DiscreteOperator,
    retruncations: usize,
}

impl Tracer<'_> {
    /// Solves at `param` from `guess`, extending the domain while the tail is
    /// too large.
    fn solve(
        &mut self,
        guess: Vec<f64>,
        param: f64,
        arclength: bool,
    ) -> Result<BranchPoint, SolverError> {
        let params = self.system.params(param)?;
        let (u, eta) = split(&guess);
        let mut initial = WaveProfile::new(self.grid.clone(), u, eta, self.system.wave_speed(param), params)?;
        loop {
            let out = newton_solve_with(&self.system, &self.op, &initial, param, &self.settings.newton)?;
            if out.profile.tail_max() > self.settings.tail_tol
                && self.retruncations < self.settings.max_retruncations
            {
                self.grid = self.grid.extended(1.5)?;
                self.op = DiscreteOperator::for_grid(&self.grid);
                self.retruncations += 1;
                let n = self.grid.len();
                let mut u = out.profile.u;
                let mut eta = out.profile.eta;
                u.resize(n, 0.0);
                eta.resize(n, 0.0);
                initial = WaveProfile::new(self.grid.clone(), u, eta, initial.lambda, params)?;
                continue;
            }
            let diagnostics = diagnose(&self.system, &out.profile, param, self.settings.nodal_tol)?;
            return Ok(BranchPoint {
                param,
                profile: out.profile,
                diagnostics,
                linearization: out.report,
                newton_iterations: out.iterations,
                arclength,
            });
        }
    }
}

fn trace(
    system: System,
    start: WaveProfile,
    p0: f64,
    p_max: f64,
    settings: &StepSettings,
) -> Result<Branch, ContinuationError> {
    settings.validate()?;
    let mut tracer = Tracer {
        system,
        settings,
        op: DiscreteOperator::for_grid(&start.grid),
        grid: start.grid.clone(),
        retruncations: 0,
    };
    let first = tracer
        .solve(interleave(&start.u, &start.eta), p0, false)
        .map_err(ContinuationError::InitialSolve)?;
    if !first.diagnostics.nodal.all() {
        let detail = format!("anchor point fails the sign pattern: {:?}", first.diagnostics.nodal);
        return Ok(Branch {
            system,
            points: vec![first],
            termination: Termination {
                reason: TerminationReason::NodalViolation,
                detail,
            },
        });
    }
    let mut points = vec![first];
    let mut step = settings.initial_step;
    let min_step = settings.initial_step * settings.min_step_factor;
    let tol = 1e-14 * p_max.abs().max(1.0);

    let event = loop {
        let last = points.last().expect("branch holds its anchor");
        if points.len() > 1 && crosses_threshold(&last.diagnostics, &settings.thresholds) {
            break StopEvent::Threshold;
        }
        if last.param >= p_max - tol {
            break StopEvent::RangeExhausted(format!("reached parameter limit {p_max}"));
        }
        if points.len() >= settings.max_points {
            break StopEvent::RangeExhausted(format!("point budget {} exhausted", settings.max_points));
        }
        let p_target = (last.param + step).min(p_max);
        let n_unknowns = 2 * tracer.grid.len();
        let turn = secant_turn(&points, &tracer.grid);
        let use_arclength = turn.is_some_and(|c| c < 0.5);

        let attempt = if system.ellipticity_gap(p_target) <= 0.0 {
            Err(SolverError::Ellipticity {
                gap: system.ellipticity_gap(p_target),
            })
        } else if points.len() < 2 {
            tracer.solve(padded_state(last, n_unknowns), p_target, false)
        } else {
            let prev = &points[points.len() - 2];
            let sec = secant(prev, last, n_unknowns);
            let x_last = padded_state(last, n_unknowns);
            if use_arclength {
                let h = tracer.grid.spacing();
                let norm = sec.norm(h);
                let tangent = Secant {
                    dx: sec.dx.iter().map(|v| v / norm).collect(),
                    dp: sec.dp / norm,
                };
                // Arclength matching a parameter advance of `step` along the secant.
                let ds = step * norm / sec.dp.abs();
                let x_hat: Vec<f64> = x_last.iter().zip(&tangent.dx).map(|(x, t)| x + ds * t).collect();
                let p_hat = last.param + ds * tangent.dp;
                arclength_correct(&system, &tracer.op, (x_hat, p_hat), &tangent, &settings.newton)
                    .and_then(|(x, p)| {
                        if system.ellipticity_gap(p) <= 0.0 {
                            return Err(SolverError::Ellipticity {
                                gap: system.ellipticity_gap(p),
                            });
                        }
                        tracer.solve(x, p, true)
                    })
            } else {
                let ratio = (p_target - last.param) / sec.dp;
                let guess: Vec<f64> = x_last.iter().zip(&sec.dx).map(|(x, d)| x + ratio * d).collect();
                tracer.solve(guess, p_target, false)
            }
        };

        match attempt {
            Ok(point) => {
                if !point.diagnostics.nodal.all() {
                    let detail = format!(
                        "sign pattern lost at param {:.12e}: {:?}",
                        point.param, point.diagnostics.nodal
                    );
                    break StopEvent::NodalViolation(detail);
                }
                if point.newton_iterations <= 3 {
                    step = (step * settings.growth).min(settings.max_step);
                }
                points.push(point);
            }
            Err(err) => {
                step *= 0.5;
                if step < min_step {
                    break StopEvent::NewtonFailure(format!(
                        "step fell below {min_step:.1e} after: {err}"
                    ));
                }
            }
        }
    };

    let history: Vec<DiagnosticsReport> = points.iter().map(|p| p.diagnostics.clone()).collect();
    let termination = classify_termination(&history, &event, &settings.thresholds);
    Ok(Branch {
        system,
        points,
        termination,
    })
}
