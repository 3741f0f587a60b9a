//! The abcd traveling-wave equations, the slow and fast parameter families,
//! closed-form base waves and diagnostic functionals.
//!
//! With `U = (u, η)` and speed `λ` the traveling-wave system is
//!
//! ```text
//! mass:     a u'' + u − λη + bλ η'' + ηu      = 0
//! momentum: c η'' + η − λu + dλ u'' + u²/2    = 0
//! ```
//!
//! Every residual here returns the two components in that order.

use serde::{Deserialize, Serialize};

use crate::discretize::{first_derivative, integrate, DiscreteOperator, Grid};
use crate::error::ModelError;

pub const ONE_THIRD: f64 = 1.0 / 3.0;

/// Coefficients of the abcd system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbcdParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub tau: f64,
}

impl AbcdParams {
    pub const SUM_TOLERANCE: f64 = 1e-12;

    pub fn new(a: f64, b: f64, c: f64, d: f64, tau: f64) -> Result<Self, ModelError> {
        let p = Self { a, b, c, d, tau };
        if ![a, b, c, d, tau].iter().all(|v| v.is_finite()) {
            return Err(ModelError::InvalidParams("non-finite coefficient".into()));
        }
        let defect = p.sum_defect();
        if defect.abs() > Self::SUM_TOLERANCE {
            return Err(ModelError::InvalidParams(format!(
                "a + b + c + d must equal 1/3 - tau (defect {defect:.3e})"
            )));
        }
        Ok(p)
    }

    /// `a + b + c + d − (1/3 − τ)`.
    pub fn sum_defect(&self) -> f64 {
        self.a + self.b + self.c + self.d - (ONE_THIRD - self.tau)
    }

    pub fn is_hamiltonian(&self) -> bool {
        self.b == self.d
    }
}

/// `a = c = −β²`, `d = β²`, `b = 1/3 + β²`; continuation parameter is `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlowFamily {
    beta: f64,
}

impl SlowFamily {
    pub fn new(beta: f64) -> Result<Self, ModelError> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(ModelError::InvalidParams(format!("beta must be positive, got {beta}")));
        }
        Ok(Self { beta })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn params(&self) -> AbcdParams {
        let b2 = self.beta * self.beta;
        AbcdParams {
            a: -b2,
            b: ONE_THIRD + b2,
            c: -b2,
            d: b2,
            tau: 0.0,
        }
    }

    /// `t = 1 + 1/(3β²)`.
    pub fn t(&self) -> f64 {
        1.0 + 1.0 / (3.0 * self.beta * self.beta)
    }

    /// `B = 1 − λ²t`; positive inside the ellipticity region.
    pub fn ellipticity_gap(&self, lambda: f64) -> f64 {
        1.0 - lambda * lambda * self.t()
    }

    /// Speed at which ellipticity is lost, `t^{−1/2}`.
    pub fn critical_speed(&self) -> f64 {
        self.t().powf(-0.5)
    }
}

/// `a = c = ks`, `b = s`, `d = 1/3 − (2k+1)s` at fixed supercritical speed `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FastFamily {
    k: f64,
    s: f64,
    lambda: f64,
}

impl FastFamily {
    pub fn new(k: f64, s: f64, lambda: f64) -> Result<Self, ModelError> {
        if !(lambda.is_finite() && lambda > 1.0) {
            return Err(ModelError::InvalidParams(format!("lambda must exceed 1, got {lambda}")));
        }
        if !(k > 0.0 && k < lambda) {
            return Err(ModelError::InvalidParams(format!("k must lie in (0, lambda), got {k}")));
        }
        if !(s.is_finite() && s >= 0.0) {
            return Err(ModelError::InvalidParams(format!("s must be nonnegative, got {s}")));
        }
        let fam = Self { k, s, lambda };
        if fam.ellipticity_gap() <= 0.0 {
            return Err(ModelError::InvalidParams(format!(
                "s = {s} is outside the ellipticity set (critical s = {})",
                fam.critical_s()
            )));
        }
        Ok(fam)
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn d(&self) -> f64 {
        fast_d(self.k, self.s)
    }

    pub fn params(&self) -> AbcdParams {
        let ks = self.k * self.s;
        AbcdParams {
            a: ks,
            b: self.s,
            c: ks,
            d: self.d(),
            tau: 0.0,
        }
    }

    pub fn ellipticity_gap(&self) -> f64 {
        fast_ellipticity_gap(self.k, self.s, self.lambda)
    }

    pub fn critical_s(&self) -> f64 {
        fast_critical_s(self.k, self.lambda)
    }
}

#[inline]
pub fn fast_d(k: f64, s: f64) -> f64 {
    ONE_THIRD - (2.0 * k + 1.0) * s
}

/// `λ²/3 − [(2k+1)λ² + k²] s`.
pub fn fast_ellipticity_gap(k: f64, s: f64, lambda: f64) -> f64 {
    let l2 = lambda * lambda;
    l2 / 3.0 - ((2.0 * k + 1.0) * l2 + k * k) * s
}

/// The value of `s` where the fast family loses ellipticity.
pub fn fast_critical_s(k: f64, lambda: f64) -> f64 {
    let l2 = lambda * lambda;
    l2 / (3.0 * ((2.0 * k + 1.0) * l2 + k * k))
}

/// Sampled `(u, η)` with its speed and coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveProfile {
    pub grid: Grid,
    pub u: Vec<f64>,
    pub eta: Vec<f64>,
    pub lambda: f64,
    pub params: AbcdParams,
}

impl WaveProfile {
    pub fn new(
        grid: Grid,
        u: Vec<f64>,
        eta: Vec<f64>,
        lambda: f64,
        params: AbcdParams,
    ) -> Result<Self, ModelError> {
        check_fields(&grid, &u, &eta)?;
        if !lambda.is_finite() {
            return Err(ModelError::NonFinite("lambda"));
        }
        Ok(Self {
            grid,
            u,
            eta,
            lambda,
            params,
        })
    }

    pub fn zero(grid: Grid, lambda: f64, params: AbcdParams) -> Self {
        let n = grid.len();
        Self {
            grid,
            u: vec![0.0; n],
            eta: vec![0.0; n],
            lambda,
            params,
        }
    }

    /// Largest `|u|` or `|η|` over the last 10% of the grid.
    pub fn tail_max(&self) -> f64 {
        let n = self.grid.len();
        let start = n - n / 10;
        self.u[start..]
            .iter()
            .chain(&self.eta[start..])
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn decays(&self, tail_tolerance: f64) -> bool {
        self.tail_max() < tail_tolerance
    }

    pub fn max_u(&self) -> f64 {
        self.u.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Crest values; on a full-line grid the middle node.
    pub fn crest(&self) -> (f64, f64) {
        let j = match self.grid.symmetry() {
            crate::discretize::Symmetry::EvenHalfLine => 0,
            crate::discretize::Symmetry::FullLine => self.grid.len() / 2,
        };
        (self.u[j], self.eta[j])
    }
}

fn check_fields(grid: &Grid, u: &[f64], eta: &[f64]) -> Result<(), ModelError> {
    for f in [u, eta] {
        if f.len() != grid.len() {
            return Err(ModelError::DimensionMismatch {
                expected: grid.len(),
                got: f.len(),
            });
        }
    }
    if !u.iter().all(|v| v.is_finite()) {
        return Err(ModelError::NonFinite("u"));
    }
    if !eta.iter().all(|v| v.is_finite()) {
        return Err(ModelError::NonFinite("eta"));
    }
    Ok(())
}

/// Pointwise residual pair `(mass, momentum)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    pub mass: Vec<f64>,
    pub momentum: Vec<f64>,
}

impl Residual {
    pub fn sup_norm(&self) -> f64 {
        self.mass
            .iter()
            .chain(&self.momentum)
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Sup-norm of the difference with another residual.
    pub fn distance(&self, other: &Residual) -> f64 {
        self.mass
            .iter()
            .zip(&other.mass)
            .chain(self.momentum.iter().zip(&other.momentum))
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Residual of the abcd system on the profile, using the default operator.
pub fn abcd_residual(profile: &WaveProfile) -> Result<Residual, ModelError> {
    let op = DiscreteOperator::for_grid(&profile.grid);
    abcd_residual_with(profile, &op)
}

pub fn abcd_residual_with(profile: &WaveProfile, op: &DiscreteOperator) -> Result<Residual, ModelError> {
    check_fields(op.grid(), &profile.u, &profile.eta)?;
    Ok(abcd_residual_fields(
        op,
        &profile.params,
        profile.lambda,
        &profile.u,
        &profile.eta,
    ))
}

pub fn abcd_residual_fields(
    op: &DiscreteOperator,
    p: &AbcdParams,
    lambda: f64,
    u: &[f64],
    eta: &[f64],
) -> Residual {
    let uxx = op.apply(u);
    let exx = op.apply(eta);
    let mass = (0..u.len())
        .map(|j| p.a * uxx[j] + u[j] - lambda * eta[j] + p.b * lambda * exx[j] + eta[j] * u[j])
        .collect();
    let momentum = (0..u.len())
        .map(|j| p.c * exx[j] + eta[j] - lambda * u[j] + p.d * lambda * uxx[j] + 0.5 * u[j] * u[j])
        .collect();
    Residual { mass, momentum }
}

/// Residual in the `ℒ = 1 − β²∂ₓ²` form of the slow family.
pub fn slow_residual(
    op: &DiscreteOperator,
    u: &[f64],
    eta: &[f64],
    lambda: f64,
    beta: f64,
) -> Result<Residual, ModelError> {
    check_fields(op.grid(), u, eta)?;
    let fam = SlowFamily::new(beta)?;
    let t = fam.t();
    let b2 = beta * beta;
    let w1: Vec<f64> = u.iter().zip(eta).map(|(u, e)| u - lambda * t * e).collect();
    let w2: Vec<f64> = u.iter().zip(eta).map(|(u, e)| e - lambda * u).collect();
    let w1xx = op.apply(&w1);
    let w2xx = op.apply(&w2);
    let shift = lambda / (3.0 * b2);
    let mass = (0..u.len())
        .map(|j| w1[j] - b2 * w1xx[j] + (shift + u[j]) * eta[j])
        .collect();
    let momentum = (0..u.len())
        .map(|j| w2[j] - b2 * w2xx[j] + 0.5 * u[j] * u[j])
        .collect();
    Ok(Residual { mass, momentum })
}

/// Residual of the fast family at fixed speed `λ`.
pub fn fast_residual(
    op: &DiscreteOperator,
    u: &[f64],
    eta: &[f64],
    s: f64,
    k: f64,
    lambda: f64,
) -> Result<Residual, ModelError> {
    check_fields(op.grid(), u, eta)?;
    let uxx = op.apply(u);
    let exx = op.apply(eta);
    let d = fast_d(k, s);
    let mass = (0..u.len())
        .map(|j| k * s * uxx[j] + lambda * s * exx[j] + u[j] - lambda * eta[j] + eta[j] * u[j])
        .collect();
    let momentum = (0..u.len())
        .map(|j| d * lambda * uxx[j] + k * s * exx[j] - lambda * u[j] + eta[j] + 0.5 * u[j] * u[j])
        .collect();
    Ok(Residual { mass, momentum })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StationaryBranch {
    /// `u > 0`.
    Plus,
    /// `u < 0`.
    Minus,
}

impl StationaryBranch {
    pub fn sign(self) -> f64 {
        match self {
            StationaryBranch::Plus => 1.0,
            StationaryBranch::Minus => -1.0,
        }
    }
}

/// Closed-form `λ = 0` wave: `u = ±(3√2/2) sech²(x/2β)`, `η = −(3/2) sech²(x/2β)`.
pub fn stationary_exact(
    beta: f64,
    branch: StationaryBranch,
    grid: &Grid,
) -> Result<WaveProfile, ModelError> {
    let fam = SlowFamily::new(beta)?;
    let amp = 1.5 * std::f64::consts::SQRT_2 * branch.sign();
    let s: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|&x| (x / (2.0 * beta)).cosh().powi(-2))
        .collect();
    let u = s.iter().map(|v| amp * v).collect();
    let eta = s.iter().map(|v| -1.5 * v).collect();
    WaveProfile::new(grid.clone(), u, eta, 0.0, fam.params())
}

/// `β²(u′)² + β²(η′)² − u²(1+η) − η²`, which vanishes on `λ = 0` solitary waves.
pub fn stationary_first_integral(profile: &WaveProfile, beta: f64) -> Vec<f64> {
    let du = first_derivative(&profile.grid, &profile.u);
    let de = first_derivative(&profile.grid, &profile.eta);
    let b2 = beta * beta;
    (0..profile.u.len())
        .map(|j| {
            let (u, e) = (profile.u[j], profile.eta[j]);
            b2 * du[j] * du[j] + b2 * de[j] * de[j] - u * u * (1.0 + e) - e * e
        })
        .collect()
}

/// `𝓗 = ½∫[−cη′² − au′² + η² + (1+η)u²]`.
pub fn hamiltonian(profile: &WaveProfile) -> f64 {
    let du = first_derivative(&profile.grid, &profile.u);
    let de = first_derivative(&profile.grid, &profile.eta);
    let p = &profile.params;
    let density: Vec<f64> = (0..profile.u.len())
        .map(|j| {
            let (u, e) = (profile.u[j], profile.eta[j]);
            -p.c * de[j] * de[j] - p.a * du[j] * du[j] + e * e + (1.0 + e) * u * u
        })
        .collect();
    0.5 * integrate(&profile.grid, &density)
}

/// `𝓘 = ∫(ηu + bη′u′)`.
pub fn impulse(profile: &WaveProfile, b: f64) -> f64 {
    let du = first_derivative(&profile.grid, &profile.u);
    let de = first_derivative(&profile.grid, &profile.eta);
    let density: Vec<f64> = (0..profile.u.len())
        .map(|j| profile.eta[j] * profile.u[j] + b * de[j] * du[j])
        .collect();
    integrate(&profile.grid, &density)
}

/// Which reduced system the flux identity refers to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FluxFamily {
    Slow { beta: f64 },
    Fast { k: f64, s: f64 },
}

/// Pointwise value of the energy-flux identity obtained by multiplying the
/// reduced equations by `η′` and `u′` and summing: the derivative of the
/// bracket plus the non-exact remainder.
///
/// Slow: `[−β²B/2 (u′²+η′²) + (1−λ²)/2 η² + B/2 u² + λt/6 u³ + ½u²η]′ − λuηη′ + λ/(3β²) ηu′`.
/// Fast: `[dλ/2 u′² + λs/2 η′² + ks u′η′ + uη − λ/2 u² − λ/2 η² + u³/6]′ + uηη′`.
pub fn flux_identity_residual(profile: &WaveProfile, family: FluxFamily) -> Vec<f64> {
    let g = &profile.grid;
    let (u, e, lambda) = (&profile.u, &profile.eta, profile.lambda);
    let du = first_derivative(g, u);
    let de = first_derivative(g, e);
    let n = u.len();
    let (bracket, remainder): (Vec<f64>, Vec<f64>) = match family {
        FluxFamily::Slow { beta } => {
            let b2 = beta * beta;
            let t = 1.0 + 1.0 / (3.0 * b2);
            let big_b = 1.0 - lambda * lambda * t;
            (0..n)
                .map(|j| {
                    let br = -0.5 * b2 * big_b * (du[j] * du[j] + de[j] * de[j])
                        + 0.5 * (1.0 - lambda * lambda) * e[j] * e[j]
                        + 0.5 * big_b * u[j] * u[j]
                        + lambda * t / 6.0 * u[j].powi(3)
                        + 0.5 * u[j] * u[j] * e[j];
                    let rem = -lambda * u[j] * e[j] * de[j] + lambda / (3.0 * b2) * e[j] * du[j];
                    (br, rem)
                })
                .unzip()
        }
        FluxFamily::Fast { k, s } => {
            let d = fast_d(k, s);
            (0..n)
                .map(|j| {
                    let br = 0.5 * d * lambda * du[j] * du[j]
                        + 0.5 * lambda * s * de[j] * de[j]
                        + k * s * du[j] * de[j]
                        + u[j] * e[j]
                        - 0.5 * lambda * (u[j] * u[j] + e[j] * e[j])
                        + u[j].powi(3) / 6.0;
                    let rem = u[j] * e[j] * de[j];
                    (br, rem)
                })
                .unzip()
        }
    };
    // the bracket is even, so the default (mirror) closure applies
    let dbr = first_derivative(g, &bracket);
    dbr.iter().zip(&remainder).map(|(a, b)| a + b).collect()
}

/// `Φ(u) = −u³ + 3λu² + 6u + 6λ log((λ−u)/λ)`; `λ(u′)² = Φ(u)` on the base wave.
pub fn phi(lambda: f64, u: f64) -> f64 {
    let w = u / lambda;
    // 6u + 6λ log(1 − w) = 6λ (w + log(1 − w)), evaluated without cancellation
    let tail = if w.abs() < 0.1 {
        let mut term = w * w;
        let mut sum = 0.0;
        for m in 2..40 {
            sum += term / m as f64;
            term *= w;
        }
        -sum
    } else {
        w + (-w).ln_1p()
    };
    -u * u * u + 3.0 * lambda * u * u + 6.0 * lambda * tail
}

/// `(3λ − √(λ²+8))/2`, the lower crest bound and the downstream front state.
pub fn fast_front_velocity(lambda: f64) -> f64 {
    0.5 * (3.0 * lambda - (lambda * lambda + 8.0).sqrt())
}

/// Crest height `u*`: the root of `Φ` in `((3λ−√(λ²+8))/2, λ)`.
pub fn crest_height(lambda: f64) -> Result<f64, ModelError> {
    if !(lambda > 1.0 && lambda.is_finite()) {
        return Err(ModelError::RootBracketing { lambda });
    }
    let mut lo = fast_front_velocity(lambda);
    let mut hi = lambda * (1.0 - 1e-15);
    if !(phi(lambda, lo) > 0.0 && phi(lambda, hi) < 0.0) {
        return Err(ModelError::RootBracketing { lambda });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if phi(lambda, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Base wave of the classical Boussinesq system together with `u′` from the integrator.
#[derive(Debug, Clone, PartialEq)]
pub struct FastBaseWave {
    pub profile: WaveProfile,
    pub du: Vec<f64>,
    pub crest: f64,
}

/// Integrates the classical Boussinesq solitary wave at speed `λ > 1` outward from the crest.
///
/// Near the crest `√Φ` is not Lipschitz, so the wave starts on the regular
/// second-order form `u″ = (3/λ)(λu − u/(λ−u) − u²/2)` from `(u*, 0)` and switches to
/// the stable first-order form `u′ = −√(Φ(u)/λ)` once `u` has dropped to half the crest.
/// Both legs use step-doubling RK4 and land exactly on the requested nodes.
pub fn boussinesq_fast_profile(lambda: f64, grid: &Grid) -> Result<FastBaseWave, ModelError> {
    let crest = crest_height(lambda)?;
    let nodes = grid.nodes();
    let mut targets: Vec<f64> = nodes.iter().map(|x| x.abs()).collect();
    targets.sort_by(f64::total_cmp);
    targets.dedup();

    let accel = |u: f64| 3.0 / lambda * (lambda * u - u / (lambda - u) - 0.5 * u * u);
    let slope = |u: f64| -(phi(lambda, u).max(0.0) / lambda).sqrt();
    let switch = 0.5 * crest;

    let mut samples: Vec<(f64, f64, f64)> = Vec::with_capacity(targets.len());
    let (mut x, mut u, mut v) = (0.0f64, crest, 0.0f64);
    let mut second_order = true;
    let tol = 1e-13;
    let mut h: f64 = 1e-3;
    for &target in &targets {
        while target - x > 1e-14 {
            let step = h.min(target - x);
            if second_order {
                let f = |y: [f64; 2]| [y[1], accel(y[0])];
                let full = rk4_step(&f, [u, v], step);
                let half = rk4_step(&f, [u, v], 0.5 * step);
                let two = rk4_step(&f, half, 0.5 * step);
                let err = (two[0] - full[0]).abs().max((two[1] - full[1]).abs()) / 15.0;
                if err > tol && step > 1e-9 {
                    h = 0.5 * step;
                    continue;
                }
                u = two[0];
                v = two[1];
                if u <= switch {
                    second_order = false;
                }
                h = grow(step, err, tol);
            } else {
                let f = |y: [f64; 1]| [slope(y[0])];
                let full = rk4_step(&f, [u], step);
                let half = rk4_step(&f, [u], 0.5 * step);
                let two = rk4_step(&f, half, 0.5 * step);
                let err = (two[0] - full[0]).abs() / 15.0;
                if err > tol * u.abs().max(1e-30) && step > 1e-9 {
                    h = 0.5 * step;
                    continue;
                }
                u = two[0];
                v = slope(u);
                h = grow(step, err, tol * u.abs().max(1e-30));
            }
            x += step;
            if !(u > 0.0 && u < lambda) || !u.is_finite() {
                return Err(ModelError::LeftInterval { x });
            }
        }
        x = target;
        samples.push((target, u, v));
    }

    let lookup = |ax: f64| {
        let i = samples
            .binary_search_by(|s| s.0.total_cmp(&ax))
            .expect("every node was integrated to");
        samples[i]
    };
    let mut us = Vec::with_capacity(nodes.len());
    let mut dus = Vec::with_capacity(nodes.len());
    for &xn in &nodes {
        let (_, u, v) = lookup(xn.abs());
        us.push(u);
        dus.push(if xn < 0.0 { -v } else { v });
    }
    let eta = us.iter().map(|u| u / (lambda - u)).collect();
    let params = AbcdParams {
        a: 0.0,
        b: 0.0,
        c: 0.0,
        d: ONE_THIRD,
        tau: 0.0,
    };
    let profile = WaveProfile::new(grid.clone(), us, eta, lambda, params)?;
    Ok(FastBaseWave {
        profile,
        du: dus,
        crest,
    })
}

fn grow(step: f64, err: f64, tol: f64) -> f64 {
    if err == 0.0 {
        return step * 2.0;
    }
    step * (0.9 * (tol / err).powf(0.2)).clamp(0.2, 2.0)
}

fn rk4_step<const N: usize>(f: &impl Fn([f64; N]) -> [f64; N], y: [f64; N], h: f64) -> [f64; N] {
    let add = |a: [f64; N], b: [f64; N], s: f64| {
        let mut o = a;
        for i in 0..N {
            o[i] += s * b[i];
        }
        o
    };
    let k1 = f(y);
    let k2 = f(add(y, k1, 0.5 * h));
    let k3 = f(add(y, k2, 0.5 * h));
    let k4 = f(add(y, k3, h));
    let mut out = y;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::{Grid, Stencil};
    use rand::{rngs::StdRng, Rng, SeedableRng};

    fn sup(v: &[f64]) -> f64 {
        v.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    #[test]
    fn families_satisfy_sum_constraint() {
        for beta in [0.1, 0.5, 1.0, 3.0] {
            let p = SlowFamily::new(beta).unwrap().params();
            assert!(p.sum_defect().abs() < 1e-12);
            assert!(!p.is_hamiltonian());
        }
        let p = FastFamily::new(0.5, 0.05, 1.5).unwrap().params();
        assert!(p.sum_defect().abs() < 1e-12);
        assert!(AbcdParams::new(0.0, 0.0, 0.0, 0.3, 0.0).is_err());
        assert!(AbcdParams::new(0.0, 0.0, 0.0, ONE_THIRD, 0.0).is_ok());
    }

    #[test]
    fn family_preconditions() {
        assert!(SlowFamily::new(0.0).is_err());
        assert!(FastFamily::new(0.5, 0.0, 1.0).is_err());
        assert!(FastFamily::new(1.6, 0.0, 1.5).is_err());
        assert!(FastFamily::new(0.5, 0.2, 1.5).is_err());
        let s_star = fast_critical_s(0.5, 1.5);
        assert!((s_star - 2.25 / 14.25).abs() < 1e-15);
        assert!(fast_ellipticity_gap(0.5, s_star, 1.5).abs() < 1e-15);
    }

    #[test]
    fn stationary_crest_values() {
        let g = Grid::even(30.0, 2048).unwrap();
        let p = stationary_exact(1.0, StationaryBranch::Plus, &g).unwrap();
        assert!((p.u[0] - 2.121_320_343_559_642).abs() < 1e-12);
        assert_eq!(p.eta[0], -1.5);
        let m = stationary_exact(1.0, StationaryBranch::Minus, &g).unwrap();
        assert!((m.u[0] + 2.121_320_343_559_642).abs() < 1e-12);
        assert_eq!(m.eta[0], -1.5);
        // sech² tail ~ 4 e^{-x/β}
        let x = g.x(1800);
        assert!((p.eta[1800] / (-6.0 * (-x).exp()) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn stationary_residuals_are_small() {
        let g = Grid::even(30.0, 2048).unwrap();
        let op = DiscreteOperator::for_grid(&g);
        for branch in [StationaryBranch::Plus, StationaryBranch::Minus] {
            let p = stationary_exact(1.0, branch, &g).unwrap();
            let r = abcd_residual(&p).unwrap().sup_norm();
            assert!(r < 1e-8, "abcd residual {r}");
            let r = slow_residual(&op, &p.u, &p.eta, 0.0, 1.0).unwrap().sup_norm();
            assert!(r < 1e-8, "slow residual {r}");
            let fi = sup(&stationary_first_integral(&p, 1.0));
            assert!(fi < 1e-7, "first integral {fi}");
        }
    }

    #[test]
    fn zero_profile_has_zero_residuals() {
        let g = Grid::even(10.0, 64).unwrap();
        let op = DiscreteOperator::for_grid(&g);
        let p = WaveProfile::zero(g.clone(), 0.7, SlowFamily::new(0.8).unwrap().params());
        assert_eq!(abcd_residual(&p).unwrap().sup_norm(), 0.0);
        assert_eq!(slow_residual(&op, &p.u, &p.eta, 0.3, 1.0).unwrap().sup_norm(), 0.0);
        assert_eq!(fast_residual(&op, &p.u, &p.eta, 0.01, 0.5, 1.5).unwrap().sup_norm(), 0.0);
        assert_eq!(sup(&stationary_first_integral(&p, 1.0)), 0.0);
        assert_eq!(hamiltonian(&p), 0.0);
        assert_eq!(impulse(&p, 0.3), 0.0);
        assert_eq!(sup(&flux_identity_residual(&p, FluxFamily::Slow { beta: 1.0 })), 0.0);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let g = Grid::even(10.0, 64).unwrap();
        let op = DiscreteOperator::for_grid(&g);
        assert!(matches!(
            slow_residual(&op, &[0.0; 63], &[0.0; 64], 0.0, 1.0),
            Err(ModelError::DimensionMismatch { .. })
        ));
        let params = SlowFamily::new(1.0).unwrap().params();
        assert!(WaveProfile::new(g.clone(), vec![0.0; 64], vec![f64::NAN; 64], 0.0, params).is_err());
    }

    #[test]
    fn perturbed_profile_breaks_first_integral() {
        let g = Grid::even(30.0, 2048).unwrap();
        let mut p = stationary_exact(1.0, StationaryBranch::Plus, &g).unwrap();
        let mut rng = StdRng::seed_from_u64(7);
        for v in p.u.iter_mut().chain(p.eta.iter_mut()) {
            *v *= 1.0 + 0.01 * rng.random_range(-1.0..1.0);
        }
        assert!(sup(&stationary_first_integral(&p, 1.0)) > 1e-3);
    }

    #[test]
    fn crest_root_and_bounds() {
        let u = crest_height(1.5).unwrap();
        assert!(u > 0.6492 && u < 1.5);
        assert!(phi(1.5, u).abs() < 1e-10);
        assert!((fast_front_velocity(2.0) - (3.0 - 3f64.sqrt())).abs() < 1e-14);
        assert!(crest_height(1.0).is_err());
        assert!(crest_height(0.5).is_err());
    }

    #[test]
    fn phi_series_matches_direct_form() {
        for &(l, u) in &[(1.5f64, 0.1f64), (1.2, 0.01), (3.0, 0.25)] {
            let direct = -u * u * u + 3.0 * l * u * u + 6.0 * u + 6.0 * l * ((l - u) / l).ln();
            assert!((phi(l, u) - direct).abs() < 1e-12 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn fast_profile_shape_and_first_integral() {
        for lambda in [1.1, 1.5, 2.0] {
            let g = Grid::even(40.0, 2048).unwrap();
            let w = boussinesq_fast_profile(lambda, &g).unwrap();
            let p = &w.profile;
            let lo = fast_front_velocity(lambda);
            assert!(p.u[0] > lo && p.u[0] < lambda);
            assert!(p.u.windows(2).all(|s| s[1] < s[0]));
            for j in 0..g.len() {
                assert_eq!(p.eta[j], p.u[j] / (lambda - p.u[j]));
                let fi = lambda * w.du[j] * w.du[j] - phi(lambda, p.u[j]);
                assert!(fi.abs() < 1e-6, "lambda {lambda} j {j} fi {fi}");
            }
        }
    }

    #[test]
    fn fast_profile_on_full_line_is_even() {
        let g = Grid::full(20.0, 401).unwrap();
        let w = boussinesq_fast_profile(1.5, &g).unwrap();
        for j in 0..200 {
            assert_eq!(w.profile.u[j], w.profile.u[400 - j]);
            assert_eq!(w.du[j], -w.du[400 - j]);
        }
    }

    #[test]
    fn fast_profile_solves_the_system_at_s_zero() {
        let g = Grid::even(30.0, 2048).unwrap();
        let w = boussinesq_fast_profile(1.5, &g).unwrap();
        let op = DiscreteOperator::for_grid(&g);
        let r = fast_residual(&op, &w.profile.u, &w.profile.eta, 0.0, 0.5, 1.5).unwrap();
        assert!(r.sup_norm() < 1e-6, "{}", r.sup_norm());
        assert!(abcd_residual(&w.profile).unwrap().sup_norm() < 1e-6);
    }

    #[test]
    fn hamiltonian_converges_under_refinement() {
        let mut vals = vec![];
        for n in [1025, 2049, 4097] {
            let g = Grid::even(30.0, n).unwrap();
            let p = stationary_exact(1.0, StationaryBranch::Plus, &g).unwrap();
            vals.push((hamiltonian(&p), impulse(&p, p.params.b)));
        }
        // Richardson: successive differences shrink and the fine value is within 1e-6 relative
        let (h1, h2, h3) = (vals[0].0, vals[1].0, vals[2].0);
        assert!(h1.is_finite() && h3 != 0.0);
        assert!(((h3 - h2) / h3).abs() < 1e-6, "{h2} {h3}");
        assert!((h3 - h2).abs() <= (h2 - h1).abs() + 1e-15);
        let (i2, i3) = (vals[1].1, vals[2].1);
        assert!(((i3 - i2) / i3).abs() < 1e-6);
    }

    #[test]
    fn impulse_positive_for_eta_equal_u() {
        let g = Grid::even(20.0, 512).unwrap();
        let mut p = stationary_exact(1.0, StationaryBranch::Plus, &g).unwrap();
        p.eta = p.u.clone();
        assert!(impulse(&p, 0.0) > 0.0);
    }

    #[test]
    fn flux_identity_vanishes_on_stationary_wave() {
        let g = Grid::even(30.0, 2048).unwrap();
        let p = stationary_exact(1.0, StationaryBranch::Plus, &g).unwrap();
        let r = sup(&flux_identity_residual(&p, FluxFamily::Slow { beta: 1.0 }));
        assert!(r < 1e-6, "{r}");
    }

    #[test]
    fn fast_flux_identity_on_base_wave() {
        let g = Grid::even(30.0, 2048).unwrap();
        let w = boussinesq_fast_profile(1.5, &g).unwrap();
        let r = sup(&flux_identity_residual(&w.profile, FluxFamily::Fast { k: 0.5, s: 0.0 }));
        assert!(r < 1e-5, "{r}");
    }

    #[test]
    fn second_order_stencil_residual_is_coarser() {
        let g = Grid::even(30.0, 2048).unwrap();
        let p = stationary_exact(1.0, StationaryBranch::Plus, &g).unwrap();
        let op2 = crate::discretize::second_derivative_with(
            &g,
            g.default_closure(),
            Stencil::Second,
        )
        .unwrap();
        let r2 = abcd_residual_with(&p, &op2).unwrap().sup_norm();
        let r4 = abcd_residual(&p).unwrap().sup_norm();
        assert!(r2 > 100.0 * r4);
    }
}
