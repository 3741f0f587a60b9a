//! Front-limit algebra behind the nonexistence of monotone fronts, and the
//! stationary-wave identities.

use serde::{Deserialize, Serialize};

use crate::discretize::{first_derivative, DiscreteOperator};
use crate::error::AnalysisError;
use crate::model::{StationaryBranch, WaveProfile};
use crate::par::{self, Execution};

/// Reported threshold constants: `G_zz(1/t², t) > 0` for `t` above the first,
/// `G(1/t², t) < 0` above the second, and the matching `β²`.
pub const REPORTED_T_CONVEX: f64 = 1.68;
pub const REPORTED_T_NEGATIVE: f64 = 2.264;
pub const REPORTED_BETA_SQ: f64 = 0.26;

/// Limits `(ū, η̄)` of a monotone front at the far end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontLimit {
    pub ubar: f64,
    pub etabar: f64,
    /// Ellipticity coefficient; slow fronts only.
    pub b: Option<f64>,
    /// Defining quadratic at `ū`; slow fronts only.
    pub quadratic_residual: Option<f64>,
}

fn slow_t(beta: f64) -> Result<f64, AnalysisError> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(AnalysisError::NonPositiveBeta(beta));
    }
    Ok(1.0 + 1.0 / (3.0 * beta * beta))
}

/// `−(2−B)ū² − λBū + 2(1−λ²)B`.
pub fn slow_front_quadratic(ubar: f64, lambda: f64, b: f64) -> f64 {
    -(2.0 - b) * ubar * ubar - lambda * b * ubar + 2.0 * (1.0 - lambda * lambda) * b
}

/// Positive root of the slow front quadratic and the matching `η̄`.
pub fn front_limit_slow(lambda: f64, beta: f64) -> Result<FrontLimit, AnalysisError> {
    let t = slow_t(beta)?;
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(AnalysisError::LambdaRange(lambda));
    }
    let l2 = lambda * lambda;
    let b = 1.0 - l2 * t;
    if !(b > 0.0) {
        return Err(AnalysisError::NonPositiveB(b));
    }
    let ubar = ((l2 * b * b + 8.0 * b * (2.0 - b) * (1.0 - l2)).sqrt() - lambda * b) / (2.0 * (2.0 - b));
    let etabar = -ubar * ubar / (2.0 * (1.0 - l2 - lambda * ubar));
    Ok(FrontLimit {
        ubar,
        etabar,
        b: Some(b),
        quadratic_residual: Some(slow_front_quadratic(ubar, lambda, b)),
    })
}

/// The far-end value of the slow flux bracket at the front limits. A
/// monotone front forces it to be `≤ 0`.
pub fn slow_front_flux_value(lambda: f64, beta: f64) -> Result<f64, AnalysisError> {
    let f = front_limit_slow(lambda, beta)?;
    let b = f.b.expect("slow limit carries B");
    let t = slow_t(beta)?;
    let (u, e) = (f.ubar, f.etabar);
    Ok(0.5 * (1.0 - lambda * lambda) * e * e + 0.5 * b * u * u + lambda * t / 6.0 * u * u * u
        + 0.5 * u * u * e
        - 0.5 * lambda * u * e * e
        + lambda / (3.0 * beta * beta) * u * e)
}

/// Lower bound on `ū` implied by the sign of the flux remainder.
pub fn slow_front_lower_bound(lambda: f64, b: f64) -> f64 {
    let l2 = 1.0 - lambda * lambda;
    let disc = 4.0 * (1.0 - b).powi(2) * l2 * l2 + 3.0 * (7.0 - 4.0 * b) * b * lambda * lambda * l2;
    (2.0 * disc.sqrt() - 4.0 * (1.0 - b) * l2) / (lambda * (7.0 - 4.0 * b))
}

pub fn g_polynomial(z: f64, t: f64) -> f64 {
    let [c3, c2, c1, c0] = g_coefficients(t);
    ((c3 * z + c2) * z + c1) * z + c0
}

pub fn g_z(z: f64, t: f64) -> f64 {
    let [c3, c2, c1, _] = g_coefficients(t);
    (3.0 * c3 * z + 2.0 * c2) * z + c1
}

pub fn g_zz(z: f64, t: f64) -> f64 {
    let [c3, c2, _, _] = g_coefficients(t);
    6.0 * c3 * z + 2.0 * c2
}

fn g_coefficients(t: f64) -> [f64; 4] {
    [
        -20.0 + 13.0 / t,
        -60.0 + 33.0 / t + 32.0 * t,
        -39.0 + 18.0 / t + 32.0 * t,
        -9.0,
    ]
}

/// Uniform endpoint-exclusive samples of `(lo, hi)`.
fn open_samples(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|i| lo + (hi - lo) * i as f64 / (n + 1) as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlowFrontScan {
    pub beta: f64,
    pub t: f64,
    pub scan_n: usize,
    /// Largest `G(z, t)` over the scan and where it occurs.
    pub max_g: f64,
    pub argmax_z: f64,
    /// True iff `G < 0` at every scanned `z ∈ (0, 1/t²)`.
    pub excluded: bool,
}

pub fn slow_front_excluded(beta: f64, scan_n: usize, exec: Execution) -> Result<SlowFrontScan, AnalysisError> {
    let t = slow_t(beta)?;
    let zs = open_samples(0.0, 1.0 / (t * t), scan_n);
    let gs = par::map(exec, &zs, |&z| g_polynomial(z, t));
    let (argmax_z, max_g) = zs
        .iter()
        .zip(&gs)
        .fold((f64::NAN, f64::NEG_INFINITY), |acc, (&z, &g)| if g > acc.1 { (z, g) } else { acc });
    Ok(SlowFrontScan {
        beta,
        t,
        scan_n,
        max_g,
        argmax_z,
        excluded: gs.iter().all(|&g| g < 0.0),
    })
}

/// Comparison of the lower bound with the front root along `λ² ∈ (0, 1/t²)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontChainScan {
    pub beta: f64,
    pub scan_n: usize,
    /// Samples where the lower bound exceeds the root, so no front fits.
    pub contradicted: usize,
    /// Samples where the flux value is positive, which also rules out a front.
    pub flux_positive: usize,
    /// Largest sampled `λ` at which the bound still exceeds the root.
    pub last_contradicted_lambda: Option<f64>,
}

pub fn slow_front_chain_scan(beta: f64, scan_n: usize, exec: Execution) -> Result<FrontChainScan, AnalysisError> {
    let t = slow_t(beta)?;
    let zs = open_samples(0.0, 1.0 / (t * t), scan_n);
    let rows = par::map(exec, &zs, |&z| -> Result<(f64, bool, bool), AnalysisError> {
        let lambda = z.sqrt();
        let f = front_limit_slow(lambda, beta)?;
        let lb = slow_front_lower_bound(lambda, f.b.expect("slow limit carries B"));
        Ok((lambda, lb > f.ubar, slow_front_flux_value(lambda, beta)? > 0.0))
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(FrontChainScan {
        beta,
        scan_n,
        contradicted: rows.iter().filter(|r| r.1).count(),
        flux_positive: rows.iter().filter(|r| r.2).count(),
        last_contradicted_lambda: rows.iter().filter(|r| r.1).map(|r| r.0).reduce(f64::max),
    })
}

/// `ū = (3λ − √(λ²+8))/2`, `η̄ = ū/(λ−ū)`.
pub fn fast_front_limit(lambda: f64) -> FrontLimit {
    let ubar = 0.5 * (3.0 * lambda - (lambda * lambda + 8.0).sqrt());
    FrontLimit {
        ubar,
        etabar: ubar / (lambda - ubar),
        b: None,
        quadratic_residual: None,
    }
}

/// `ūη̄ − (λ/2)ū² − (λ/2)η̄² + ū³/6 + ūη̄²/2`, which a fast front needs `≥ 0`.
pub fn fast_front_obstruction(lambda: f64) -> Result<f64, AnalysisError> {
    if !(lambda > 1.0 && lambda.is_finite()) {
        return Err(AnalysisError::LambdaRange(lambda));
    }
    Ok(fast_front_obstruction_unchecked(lambda))
}

/// [`fast_front_obstruction`] without the `λ > 1` precondition, for boundary probes.
pub fn fast_front_obstruction_unchecked(lambda: f64) -> f64 {
    let FrontLimit { ubar: u, etabar: e, .. } = fast_front_limit(lambda);
    u * e - 0.5 * lambda * u * u - 0.5 * lambda * e * e + u * u * u / 6.0 + 0.5 * u * e * e
}

/// `(λ−ū)(ū/3 − λ) + 1`; the obstruction equals `ū²/(2(λ−ū))` times this.
pub fn reduced_obstruction_fast(lambda: f64) -> Result<f64, AnalysisError> {
    if !(lambda >= 1.0 && lambda.is_finite()) {
        return Err(AnalysisError::LambdaRange(lambda));
    }
    let u = fast_front_limit(lambda).ubar;
    Ok((lambda - u) * (u / 3.0 - lambda) + 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub branch: StationaryBranch,
    /// `‖u ± √2 η‖∞`, the combination that vanishes on this branch.
    pub combination: f64,
    /// `‖β²f″ − (1 ∓ u/√2) f‖∞` for the complementary combination `f`.
    pub linear_residual: f64,
    /// `‖β²η′² − η² − (2/3)η³‖∞`.
    pub kdv_residual: f64,
}

/// Identities of the `λ = 0` system; the Dirichlet end node is excluded
/// from the differentiated residuals.
pub fn stationary_identities(
    profile: &WaveProfile,
    beta: f64,
    branch: StationaryBranch,
) -> Result<IdentityReport, AnalysisError> {
    slow_t(beta)?;
    let r2 = std::f64::consts::SQRT_2;
    // Plus vanishes on w = u + √2η, minus on h = u − √2η.
    let sigma = -branch.sign();
    let zero: Vec<f64> = profile.u.iter().zip(&profile.eta).map(|(u, e)| u - sigma * r2 * e).collect();
    let other: Vec<f64> = profile.u.iter().zip(&profile.eta).map(|(u, e)| u + sigma * r2 * e).collect();
    let op = DiscreteOperator::for_grid(&profile.grid);
    let oxx = op.apply(&other);
    let b2 = beta * beta;
    let interior = interior_range(profile);
    let sup = |f: &dyn Fn(usize) -> f64| interior.clone().fold(0.0f64, |m, j| m.max(f(j).abs()));
    let linear_residual = sup(&|j| b2 * oxx[j] - (1.0 + sigma * profile.u[j] / r2) * other[j]);
    let de = first_derivative(&profile.grid, &profile.eta);
    let kdv_residual = sup(&|j| {
        let e = profile.eta[j];
        b2 * de[j] * de[j] - e * e - 2.0 / 3.0 * e * e * e
    });
    Ok(IdentityReport {
        branch,
        combination: zero.iter().fold(0.0f64, |m, v| m.max(v.abs())),
        linear_residual,
        kdv_residual,
    })
}

fn interior_range(profile: &WaveProfile) -> std::ops::Range<usize> {
    let n = profile.grid.len();
    match profile.grid.symmetry() {
        crate::discretize::Symmetry::EvenHalfLine => 0..n - 1,
        crate::discretize::Symmetry::FullLine => 1..n - 1,
    }
}

/// Threshold constants recomputed by bisection next to the reported ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub t_convex: f64,
    pub t_negative: f64,
    pub beta_sq: f64,
    pub reported_t_convex: f64,
    pub reported_t_negative: f64,
    pub reported_beta_sq: f64,
}

pub fn recompute_thresholds() -> ThresholdReport {
    // G_zz(1/t², t)·t³ is the quartic 64t⁴ − 120t³ + 66t² − 120t + 78.
    let t_convex = bisect(|t| g_zz(1.0 / (t * t), t), 1.2, 3.0);
    let t_negative = bisect(|t| g_polynomial(1.0 / (t * t), t), 1.5, 4.0);
    ThresholdReport {
        t_convex,
        t_negative,
        beta_sq: 1.0 / (3.0 * (t_negative - 1.0)),
        reported_t_convex: REPORTED_T_CONVEX,
        reported_t_negative: REPORTED_T_NEGATIVE,
        reported_beta_sq: REPORTED_BETA_SQ,
    }
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    assert!(flo * f(hi) < 0.0, "bisection bracket does not change sign");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) < 0.0) == (flo < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
