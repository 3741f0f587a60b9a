//! Independent cross-checks for the stationary wave: fixed-step RK4 shooting
//! of the `λ = 0` system and cubic-spline comparison of sampled profiles.
//!
//! Nothing here touches the finite-difference machinery.

use serde::{Deserialize, Serialize};

use crate::error::OracleError;

const BLOWUP_NORM: f64 = 1e6;

/// Step small enough that truncation error survives the `e^{x/β}` growth
/// of the unstable direction over fifteen decay lengths.
pub const DEFAULT_STEP: f64 = 0.0025;

/// `(u, u′, η, η′)` at `x`, with the step that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootingState {
    pub x: f64,
    pub u: f64,
    pub du: f64,
    pub eta: f64,
    pub deta: f64,
    pub step: f64,
}

impl ShootingState {
    /// `β²u′² + β²η′² − u²(1+η) − η²`, constant along exact trajectories.
    pub fn first_integral(&self, beta: f64) -> f64 {
        let b2 = beta * beta;
        b2 * (self.du * self.du + self.deta * self.deta) - self.u * self.u * (1.0 + self.eta) - self.eta * self.eta
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub states: Vec<ShootingState>,
    /// `|(u, η)|` at the last state.
    pub tail_norm: f64,
}

impl Trajectory {
    pub fn samples(&self) -> Samples {
        Samples {
            x: self.states.iter().map(|s| s.x).collect(),
            u: self.states.iter().map(|s| s.u).collect(),
            eta: self.states.iter().map(|s| s.eta).collect(),
        }
    }
}

/// `−β²u″ + u + ηu = 0`, `−β²η″ + η + u²/2 = 0` as a first-order system.
fn stationary_rhs(beta: f64) -> impl Fn([f64; 4]) -> [f64; 4] {
    let inv = 1.0 / (beta * beta);
    move |[u, du, e, de]| [du, inv * (u + e * u), de, inv * (e + 0.5 * u * u)]
}

fn rk4(f: &impl Fn([f64; 4]) -> [f64; 4], y: [f64; 4], h: f64) -> [f64; 4] {
    let add = |a: [f64; 4], b: [f64; 4], s: f64| std::array::from_fn(|i| a[i] + s * b[i]);
    let k1 = f(y);
    let k2 = f(add(y, k1, 0.5 * h));
    let k3 = f(add(y, k2, 0.5 * h));
    let k4 = f(add(y, k3, h));
    std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

fn check_inputs(beta: f64, x_max: f64, step: f64) -> Result<(), OracleError> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(OracleError::InvalidInput(format!("beta must be positive, got {beta}")));
    }
    if !(x_max > 0.0 && step > 0.0 && step <= x_max) {
        return Err(OracleError::InvalidInput("need 0 < step <= x_max".into()));
    }
    Ok(())
}

/// Integrates from the even initial data `(u₀, 0, η₀, 0)` to `x_max`.
pub fn shoot_stationary(
    beta: f64,
    u0: f64,
    eta0: f64,
    x_max: f64,
    step: f64,
) -> Result<Trajectory, OracleError> {
    check_inputs(beta, x_max, step)?;
    let f = stationary_rhs(beta);
    let steps = (x_max / step).round() as usize;
    let h = x_max / steps as f64;
    let mut y = [u0, 0.0, eta0, 0.0];
    let mut states = Vec::with_capacity(steps + 1);
    let state = |i: usize, y: [f64; 4]| ShootingState {
        x: i as f64 * h,
        u: y[0],
        du: y[1],
        eta: y[2],
        deta: y[3],
        step: h,
    };
    states.push(state(0, y));
    for i in 1..=steps {
        y = rk4(&f, y, h);
        let norm = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !(norm <= BLOWUP_NORM) {
            return Err(OracleError::Blowup { x: i as f64 * h, norm });
        }
        states.push(state(i, y));
    }
    let last = states.last().expect("at least the initial state");
    let tail_norm = last.u.hypot(last.eta);
    Ok(Trajectory { states, tail_norm })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shot {
    /// `η` crossed zero: the amplitude is too large.
    Over,
    /// `η′` turned negative before `η` reached zero: too small.
    Under,
    Undecided,
}

fn classify(beta: f64, sign: f64, amplitude: f64, x_max: f64, step: f64) -> Shot {
    let f = stationary_rhs(beta);
    let mut y = [sign * std::f64::consts::SQRT_2 * amplitude, 0.0, -amplitude, 0.0];
    let steps = (x_max / step).ceil() as usize;
    for _ in 0..steps {
        y = rk4(&f, y, step);
        if y[2] > 0.0 {
            return Shot::Over;
        }
        if y[3] < 0.0 {
            return Shot::Under;
        }
    }
    Shot::Undecided
}

/// Bisects the crest amplitude `a = −η₀` along `u₀ = ∓√2 η₀` (sign of the
/// branch) until the orbit neither overshoots nor turns back, then returns the
/// trajectory on `[0, x_max]`.
pub fn tune_stationary(
    beta: f64,
    branch_sign: f64,
    x_max: f64,
    step: f64,
) -> Result<(f64, Trajectory), OracleError> {
    check_inputs(beta, x_max, step)?;
    if branch_sign.abs() != 1.0 {
        return Err(OracleError::InvalidInput("branch sign must be ±1".into()));
    }
    // Classification runs further out than the returned window.
    let horizon = 4.0 * x_max;
    let (mut lo, mut hi) = (0.5, 3.0);
    if classify(beta, branch_sign, lo, horizon, step) != Shot::Under
        || classify(beta, branch_sign, hi, horizon, step) != Shot::Over
    {
        return Err(OracleError::InvalidInput("amplitude bracket does not straddle the orbit".into()));
    }
    while hi - lo > 4.0 * f64::EPSILON * hi {
        let mid = 0.5 * (lo + hi);
        match classify(beta, branch_sign, mid, horizon, step) {
            Shot::Over => hi = mid,
            Shot::Under => lo = mid,
            Shot::Undecided => {
                lo = mid;
                hi = mid;
            }
        }
    }
    let a = 0.5 * (lo + hi);
    let traj = shoot_stationary(beta, branch_sign * std::f64::consts::SQRT_2 * a, -a, x_max, step)?;
    Ok((a, traj))
}

/// Sampled profile on strictly increasing nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Samples {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub eta: Vec<f64>,
}

/// Natural cubic spline through `(x, y)`.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn new(x: &[f64], y: &[f64]) -> Result<Self, OracleError> {
        let n = x.len();
        if n < 3 || y.len() != n || x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(OracleError::InvalidInput(
                "spline needs at least 3 strictly increasing nodes".into(),
            ));
        }
        // Thomas algorithm for the second-derivative system, m₀ = m_{n−1} = 0.
        let mut m = vec![0.0; n];
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            let rhs = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
            let diag = 2.0 * (h0 + h1) - h0 * c[i - 1];
            c[i] = h1 / diag;
            d[i] = (rhs - h0 * d[i - 1]) / diag;
        }
        for i in (1..n - 1).rev() {
            m[i] = d[i] - c[i] * m[i + 1];
        }
        Ok(Self {
            x: x.to_vec(),
            y: y.to_vec(),
            m,
        })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], *self.x.last().expect("non-empty"))
    }

    pub fn eval(&self, t: f64) -> f64 {
        let i = match self.x.partition_point(|&v| v <= t) {
            0 => 0,
            k => (k - 1).min(self.x.len() - 2),
        };
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }
}

/// Sup-norm difference of `(u, η)` over the nodes of `main` inside
/// `window`, with `oracle` interpolated by cubic splines.
pub fn cross_validate(main: &Samples, oracle: &Samples, window: (f64, f64)) -> Result<f64, OracleError> {
    let su = CubicSpline::new(&oracle.x, &oracle.u)?;
    let se = CubicSpline::new(&oracle.x, &oracle.eta)?;
    let (lo, hi) = su.domain();
    let slack = 1e-12 * hi.abs().max(1.0);
    if window.0 < lo - slack || window.1 > hi + slack || !(window.1 > window.0) {
        return Err(OracleError::IncompatibleDomains);
    }
    let mut worst = 0.0f64;
    let mut seen = false;
    for (j, &x) in main.x.iter().enumerate() {
        if x < window.0 - slack || x > window.1 + slack {
            continue;
        }
        seen = true;
        worst = worst.max((main.u[j] - su.eval(x)).abs()).max((main.eta[j] - se.eval(x)).abs());
    }
    if !seen {
        return Err(OracleError::IncompatibleDomains);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sech2(x: f64) -> f64 {
        1.0 / x.cosh().powi(2)
    }

    #[test]
    fn exact_data_stays_near_the_wave() {
        let t = shoot_stationary(1.0, 1.5 * 2f64.sqrt(), -1.5, 20.0, DEFAULT_STEP).unwrap();
        assert!(t.tail_norm < 1e-4, "{}", t.tail_norm);
    }

    #[test]
    fn zero_data_is_zero() {
        let t = shoot_stationary(1.0, 0.0, 0.0, 10.0, 0.1).unwrap();
        assert!(t.states.iter().all(|s| s.u == 0.0 && s.eta == 0.0));
    }

    #[test]
    fn wrong_amplitude_blows_up() {
        let err = shoot_stationary(1.0, 3.0 * 2f64.sqrt(), -3.0, 40.0, 0.01).unwrap_err();
        assert!(matches!(err, OracleError::Blowup { .. }));
    }

    #[test]
    fn rk4_is_fourth_order() {
        let err = |h: f64| {
            let t = shoot_stationary(1.0, 1.5 * 2f64.sqrt(), -1.5, 4.0, h).unwrap();
            let last = t.states.last().unwrap();
            (last.eta + 1.5 * sech2(last.x / 2.0)).abs()
        };
        let ratio = err(0.04) / err(0.02);
        assert!((14.0..18.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn first_integral_is_conserved() {
        let t = shoot_stationary(1.0, 1.5 * 2f64.sqrt(), -1.5, 15.0, 0.005).unwrap();
        let i0 = t.states[0].first_integral(1.0);
        for w in t.states.windows(200) {
            let drift = (w[199].first_integral(1.0) - w[0].first_integral(1.0)).abs();
            let dx = w[199].x - w[0].x;
            assert!(drift / dx < 1e-6);
        }
        assert!(i0.abs() < 1e-12);
    }

    #[test]
    fn tuned_orbit_matches_closed_form() {
        // The window spans the same number of decay lengths for both widths.
        for (beta, sign) in [(1.0, 1.0), (0.5, -1.0)] {
            let (a, t) = tune_stationary(beta, sign, 15.0 * beta, DEFAULT_STEP).unwrap();
            assert!((a - 1.5).abs() < 1e-8, "{a}");
            let worst = t.states.iter().fold(0.0f64, |m, s| {
                let e = -1.5 * sech2(s.x / (2.0 * beta));
                let u = -sign * 2f64.sqrt() * e;
                m.max((s.eta - e).abs()).max((s.u - u).abs())
            });
            assert!(worst < 1e-5, "{worst}");
        }
    }

    #[test]
    fn spline_reproduces_cubics_inside_and_validates() {
        let x: Vec<f64> = (0..50).map(|i| i as f64 * 0.2).collect();
        let y: Vec<f64> = x.iter().map(|x| (x * 0.7).sin()).collect();
        let s = CubicSpline::new(&x, &y).unwrap();
        assert!((s.eval(3.33) - (3.33f64 * 0.7).sin()).abs() < 1e-4);
        let a = Samples {
            x: x.clone(),
            u: y.clone(),
            eta: y.clone(),
        };
        assert_eq!(cross_validate(&a, &a, (0.0, 9.8)).unwrap(), 0.0);
        assert!(matches!(
            cross_validate(&a, &a, (0.0, 20.0)),
            Err(OracleError::IncompatibleDomains)
        ));
    }
}
