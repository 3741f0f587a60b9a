//! Newton's method with exact banded Jacobians for the slow and fast systems,
//! plus the linearization monitors (smallest singular value, translation mode).
//!
//! Unknowns are interleaved as `[u₀, η₀, u₁, η₁, …]`; with the five-point
//! stencil the block Jacobian is a band matrix with five sub- and
//! super-diagonals.

use serde::{Deserialize, Serialize};

use crate::discretize::{first_derivative, DiscreteOperator, Symmetry};
use crate::error::SolverError;
use crate::linalg::{BandLu, BandMatrix};
use crate::model::{
    fast_d, fast_ellipticity_gap, fast_residual, slow_residual, AbcdParams, FastFamily, Residual,
    SlowFamily, WaveProfile,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonSettings {
    pub max_iters: usize,
    /// Sup-norm residual threshold.
    pub residual_tol: f64,
    /// Halve the step while the residual does not decrease.
    pub line_search: bool,
    pub max_halvings: usize,
    /// Iteration cap of the inverse power monitor; 0 disables it.
    pub singular_value_iters: usize,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        Self {
            max_iters: 25,
            residual_tol: 1e-10,
            line_search: true,
            max_halvings: 8,
            singular_value_iters: 50,
        }
    }
}

impl NewtonSettings {
    /// Undamped Newton, used to measure convergence order.
    pub fn plain() -> Self {
        Self {
            line_search: false,
            ..Self::default()
        }
    }
}

/// Which reduced system is being solved. The continuation parameter is passed
/// separately: `λ` for the slow system, `s` for the fast one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum System {
    Slow { beta: f64 },
    Fast { k: f64, lambda: f64 },
}

impl System {
    pub fn params(&self, param: f64) -> Result<AbcdParams, SolverError> {
        Ok(match *self {
            System::Slow { beta } => SlowFamily::new(beta)?.params(),
            System::Fast { k, lambda } => FastFamily::new(k, param, lambda)?.params(),
        })
    }

    pub fn wave_speed(&self, param: f64) -> f64 {
        match *self {
            System::Slow { .. } => param,
            System::Fast { lambda, .. } => lambda,
        }
    }

    /// Ellipticity gap at the given parameter.
    pub fn ellipticity_gap(&self, param: f64) -> f64 {
        match *self {
            System::Slow { beta } => 1.0 - param * param * (1.0 + 1.0 / (3.0 * beta * beta)),
            System::Fast { k, lambda } => fast_ellipticity_gap(k, param, lambda),
        }
    }

    pub fn residual(
        &self,
        op: &DiscreteOperator,
        u: &[f64],
        eta: &[f64],
        param: f64,
    ) -> Result<Residual, SolverError> {
        Ok(match *self {
            System::Slow { beta } => slow_residual(op, u, eta, param, beta)?,
            System::Fast { k, lambda } => fast_residual(op, u, eta, param, k, lambda)?,
        })
    }

    pub fn jacobian(
        &self,
        op: &DiscreteOperator,
        u: &[f64],
        eta: &[f64],
        param: f64,
    ) -> Result<BlockJacobian, SolverError> {
        match *self {
            System::Slow { beta } => jacobian_slow(op, u, eta, param, beta),
            System::Fast { k, lambda } => jacobian_fast(op, u, eta, param, k, lambda),
        }
    }

    /// `∂F/∂(param)` at fixed `(u, η)`.
    pub fn param_derivative(&self, op: &DiscreteOperator, u: &[f64], eta: &[f64], param: f64) -> Residual {
        let uxx = op.apply(u);
        let exx = op.apply(eta);
        let n = u.len();
        match *self {
            System::Slow { beta } => {
                let b2 = beta * beta;
                let t = 1.0 + 1.0 / (3.0 * b2);
                let _ = param;
                Residual {
                    mass: (0..n)
                        .map(|j| -t * (eta[j] - b2 * exx[j]) + eta[j] / (3.0 * b2))
                        .collect(),
                    momentum: (0..n).map(|j| -(u[j] - b2 * uxx[j])).collect(),
                }
            }
            System::Fast { k, lambda } => Residual {
                mass: (0..n).map(|j| k * uxx[j] + lambda * exx[j]).collect(),
                momentum: (0..n)
                    .map(|j| -(2.0 * k + 1.0) * lambda * uxx[j] + k * exx[j])
                    .collect(),
            },
        }
    }

    /// Region checks applied to every Newton iterate.
    pub fn check_admissible(&self, u: &[f64], param: f64) -> Result<(), SolverError> {
        let gap = self.ellipticity_gap(param);
        if !(gap > 0.0) {
            return Err(SolverError::Ellipticity { gap });
        }
        if let System::Fast { lambda, .. } = *self {
            let max_u = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if max_u >= lambda {
                return Err(SolverError::Stagnation { max_u, lambda });
            }
        }
        Ok(())
    }
}

/// One block `d2·D₂ + diag(·)` of the 2×2 Jacobian.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub d2: f64,
    pub diag: Vec<f64>,
}

impl Block {
    fn apply_add(&self, dxx: &[f64], v: &[f64], out: &mut [f64]) {
        for j in 0..v.len() {
            out[j] += self.d2 * dxx[j] + self.diag[j] * v[j];
        }
    }
}

/// Fréchet derivative of a family residual with respect to `(u, η)`.
///
/// Rows are `(mass, momentum)`, columns `(u, η)`.
#[derive(Debug, Clone)]
pub struct BlockJacobian {
    op: DiscreteOperator,
    blocks: [[Block; 2]; 2],
}

impl BlockJacobian {
    pub fn block(&self, row: usize, col: usize) -> &Block {
        &self.blocks[row][col]
    }

    pub fn operator(&self) -> &DiscreteOperator {
        &self.op
    }

    /// Applies the Jacobian to a direction `(v, ζ)`, every row kept.
    pub fn apply(&self, v: &[f64], zeta: &[f64]) -> Residual {
        let vxx = self.op.apply(v);
        let zxx = self.op.apply(zeta);
        let n = v.len();
        let mut mass = vec![0.0; n];
        let mut momentum = vec![0.0; n];
        self.blocks[0][0].apply_add(&vxx, v, &mut mass);
        self.blocks[0][1].apply_add(&zxx, zeta, &mut mass);
        self.blocks[1][0].apply_add(&vxx, v, &mut momentum);
        self.blocks[1][1].apply_add(&zxx, zeta, &mut momentum);
        Residual { mass, momentum }
    }

    /// Interleaved band matrix; Dirichlet nodes become identity rows.
    pub fn to_band(&self) -> BandMatrix {
        let n = self.op.len();
        let mut m = BandMatrix::zeros(2 * n, 5, 5);
        for j in 0..n {
            for (r, row) in self.blocks.iter().enumerate() {
                for (c, blk) in row.iter().enumerate() {
                    let i = 2 * j + r;
                    m.add(i, 2 * j + c, blk.diag[j]);
                    if blk.d2 != 0.0 {
                        for (col, w) in self.op.row(j) {
                            m.add(i, 2 * col + c, blk.d2 * w);
                        }
                    }
                }
            }
        }
        for j in self.op.grid().dirichlet_nodes() {
            for r in 0..2 {
                m.clear_row(2 * j + r);
                m.add(2 * j + r, 2 * j + r, 1.0);
            }
        }
        m
    }

    /// The Jacobian as an operator on the free nodes in the trapezoid inner
    /// product. Pinned unknowns are decoupled and given a diagonal larger than
    /// any other entry, so they never carry the smallest singular value.
    pub fn monitor_band(&self) -> BandMatrix {
        let mut m = self.to_band();
        let dim = m.dim();
        let big = m.max_abs();
        for j in self.op.grid().dirichlet_nodes() {
            for c in [2 * j, 2 * j + 1] {
                for i in c.saturating_sub(5)..(c + 6).min(dim) {
                    m.set(i, c, 0.0);
                }
                m.set(c, c, big);
            }
        }
        if self.op.grid().symmetry() == Symmetry::EvenHalfLine {
            // Node 0 carries trapezoid weight 1/2: W^{1/2} J W^{-1/2}.
            let r = std::f64::consts::FRAC_1_SQRT_2;
            for c in [0, 1] {
                for i in 0..6.min(dim) {
                    m.set(c, i, m.get(c, i) * r);
                    m.set(i, c, m.get(i, c) / r);
                }
            }
        }
        m
    }

    /// Coefficient `c(x)` of the scalar equation `(λ/3) v″ + c v = 0` obtained by
    /// eliminating `ζ` through the algebraic mass row. Only meaningful where the
    /// mass row carries no derivative (the fast system at `s = 0`).
    pub fn reduced_scalar_coefficient(&self) -> Option<Vec<f64>> {
        let [[a, b], [c, d]] = &self.blocks;
        if a.d2 != 0.0 || b.d2 != 0.0 || d.d2 != 0.0 {
            return None;
        }
        Some(
            (0..a.diag.len())
                .map(|j| c.diag[j] - d.diag[j] * a.diag[j] / b.diag[j])
                .collect(),
        )
    }
}

fn check_len(op: &DiscreteOperator, u: &[f64], eta: &[f64]) -> Result<(), SolverError> {
    op.grid().check_field(u)?;
    op.grid().check_field(eta)?;
    Ok(())
}

/// Derivative of [`slow_residual`]. At `λ = 0` it is `ℒ + [[η, u], [u, 0]]`.
pub fn jacobian_slow(
    op: &DiscreteOperator,
    u: &[f64],
    eta: &[f64],
    lambda: f64,
    beta: f64,
) -> Result<BlockJacobian, SolverError> {
    check_len(op, u, eta)?;
    SlowFamily::new(beta)?;
    let b2 = beta * beta;
    let t = 1.0 + 1.0 / (3.0 * b2);
    let shift = lambda / (3.0 * b2);
    let blocks = [
        [
            Block {
                d2: -b2,
                diag: eta.iter().map(|e| 1.0 + e).collect(),
            },
            Block {
                d2: lambda * t * b2,
                diag: u.iter().map(|u| -lambda * t + shift + u).collect(),
            },
        ],
        [
            Block {
                d2: lambda * b2,
                diag: u.iter().map(|u| -lambda + u).collect(),
            },
            Block {
                d2: -b2,
                diag: vec![1.0; u.len()],
            },
        ],
    ];
    Ok(BlockJacobian {
        op: op.clone(),
        blocks,
    })
}

/// Derivative of [`fast_residual`]. At `s = 0` it is `[[1+η, u−λ], [λ/3 ∂ₓ² + u − λ, 1]]`.
pub fn jacobian_fast(
    op: &DiscreteOperator,
    u: &[f64],
    eta: &[f64],
    s: f64,
    k: f64,
    lambda: f64,
) -> Result<BlockJacobian, SolverError> {
    check_len(op, u, eta)?;
    let d = fast_d(k, s);
    let blocks = [
        [
            Block {
                d2: k * s,
                diag: eta.iter().map(|e| 1.0 + e).collect(),
            },
            Block {
                d2: lambda * s,
                diag: u.iter().map(|u| u - lambda).collect(),
            },
        ],
        [
            Block {
                d2: d * lambda,
                diag: u.iter().map(|u| u - lambda).collect(),
            },
            Block {
                d2: k * s,
                diag: vec![1.0; u.len()],
            },
        ],
    ];
    Ok(BlockJacobian {
        op: op.clone(),
        blocks,
    })
}

pub fn interleave(u: &[f64], eta: &[f64]) -> Vec<f64> {
    u.iter().zip(eta).flat_map(|(a, b)| [*a, *b]).collect()
}

pub fn split(x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    (
        x.iter().step_by(2).copied().collect(),
        x.iter().skip(1).step_by(2).copied().collect(),
    )
}

/// Interleaved residual with Dirichlet rows replaced by the pinned values.
pub fn residual_vector(
    system: &System,
    op: &DiscreteOperator,
    u: &[f64],
    eta: &[f64],
    param: f64,
) -> Result<Vec<f64>, SolverError> {
    let r = system.residual(op, u, eta, param)?;
    let mut v = interleave(&r.mass, &r.momentum);
    for j in op.grid().dirichlet_nodes() {
        v[2 * j] = u[j];
        v[2 * j + 1] = eta[j];
    }
    Ok(v)
}

pub(crate) fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearizationReport {
    /// Estimate of the smallest singular value of the even-subspace Jacobian.
    pub smallest_singular_value: f64,
    /// `‖J·U′‖∞` on a full-line grid, when measured.
    pub translation_mode_residual: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    pub profile: WaveProfile,
    pub report: LinearizationReport,
    pub iterations: usize,
    /// Sup-norm residual before each update and after the last one.
    pub residual_history: Vec<f64>,
}

/// Newton iteration on an even half-line grid with the default operator.
pub fn newton_solve(
    system: &System,
    initial: &WaveProfile,
    param: f64,
    settings: &NewtonSettings,
) -> Result<NewtonOutcome, SolverError> {
    let op = DiscreteOperator::for_grid(&initial.grid);
    newton_solve_with(system, &op, initial, param, settings)
}

pub fn newton_solve_with(
    system: &System,
    op: &DiscreteOperator,
    initial: &WaveProfile,
    param: f64,
    settings: &NewtonSettings,
) -> Result<NewtonOutcome, SolverError> {
    if initial.grid.symmetry() != Symmetry::EvenHalfLine {
        return Err(SolverError::RequiresEvenGrid);
    }
    check_len(op, &initial.u, &initial.eta)?;
    system.check_admissible(&initial.u, param)?;
    let params = system.params(param)?;

    let mut x = interleave(&initial.u, &initial.eta);
    let (u0, e0) = split(&x);
    let mut f = residual_vector(system, op, &u0, &e0, param)?;
    let mut r = sup(&f);
    if !r.is_finite() {
        return Err(SolverError::NonFinite);
    }
    let mut history = vec![r];
    let mut iterations = 0;

    while r > settings.residual_tol {
        if iterations >= settings.max_iters {
            return Err(SolverError::MaxIterations {
                iterations,
                residual: r,
            });
        }
        let (u, e) = split(&x);
        let jac = system.jacobian(op, &u, &e, param)?;
        let step = jac.to_band().lu()?.solve(&f);
        let mut scale = 1.0;
        let mut halvings = 0;
        let (next_x, next_f, next_r) = loop {
            let trial: Vec<f64> = x.iter().zip(&step).map(|(a, d)| a - scale * d).collect();
            let (tu, te) = split(&trial);
            let admissible = system.check_admissible(&tu, param);
            let tf = residual_vector(system, op, &tu, &te, param)?;
            let tr = sup(&tf);
            let improved = admissible.is_ok() && tr.is_finite() && tr < r;
            if !settings.line_search || improved || halvings >= settings.max_halvings {
                admissible?;
                if !tr.is_finite() {
                    return Err(SolverError::NonFinite);
                }
                break (trial, tf, tr);
            }
            scale *= 0.5;
            halvings += 1;
        };
        x = next_x;
        f = next_f;
        r = next_r;
        iterations += 1;
        history.push(r);
    }

    let (u, eta) = split(&x);
    let sigma = if settings.singular_value_iters > 0 {
        let lu = system.jacobian(op, &u, &eta, param)?.monitor_band().lu()?;
        smallest_singular_value(&lu, settings.singular_value_iters)
    } else {
        f64::NAN
    };
    let profile = WaveProfile::new(
        initial.grid.clone(),
        u,
        eta,
        system.wave_speed(param),
        params,
    )?;
    Ok(NewtonOutcome {
        profile,
        report: LinearizationReport {
            smallest_singular_value: sigma,
            translation_mode_residual: None,
        },
        iterations,
        residual_history: history,
    })
}

/// Inverse power iteration on `JᵀJ` using the LU factors of `J`.
pub fn smallest_singular_value(lu: &BandLu, iterations: usize) -> f64 {
    let n = lu.dim();
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i as f64) * 0.618).sin()).collect();
    let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nx = norm(&x);
    x.iter_mut().for_each(|v| *v /= nx);
    let mut sigma = f64::NAN;
    for _ in 0..iterations.max(1) {
        let y = lu.solve(&lu.solve_transpose(&x));
        let ny = norm(&y);
        if !(ny > 0.0 && ny.is_finite()) {
            return 0.0;
        }
        sigma = 1.0 / ny.sqrt();
        x = y.into_iter().map(|v| v / ny).collect();
    }
    sigma
}

/// `‖J(U)·U′‖∞` with `U′` from centered differences; `U` must live on a
/// full-line grid so the odd translation mode is representable.
pub fn translation_mode_residual(
    system: &System,
    profile: &WaveProfile,
    param: f64,
) -> Result<f64, SolverError> {
    let op = DiscreteOperator::for_grid(&profile.grid);
    let du = first_derivative(&profile.grid, &profile.u);
    let de = first_derivative(&profile.grid, &profile.eta);
    let jac = system.jacobian(&op, &profile.u, &profile.eta, param)?;
    let r = jac.apply(&du, &de);
    Ok(r.sup_norm())
}

/// `max |f| + max |f′| + max |f″|` summed over both components.
pub fn c2_norm(profile: &WaveProfile) -> f64 {
    let op = DiscreteOperator::for_grid(&profile.grid);
    [&profile.u, &profile.eta]
        .iter()
        .map(|f| sup(f) + sup(&first_derivative(&profile.grid, f)) + sup(&op.apply(f)))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::Grid;
    use crate::model::{boussinesq_fast_profile, stationary_exact, StationaryBranch};
    use rand::{rngs::StdRng, Rng, SeedableRng};

    fn random_fields(n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
        let mut rng = StdRng::seed_from_u64(seed);
        let mut smooth = |amp: f64| -> Vec<f64> {
            let c: [f64; 3] = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(0.5..2.0)];
            (0..n)
                .map(|j| {
                    let x = j as f64 / n as f64 * 10.0;
                    amp * (c[0] * (-x * x / c[2]).exp() + c[1] * (x * 0.3).cos() * (-x).exp())
                })
                .collect()
        };
        (smooth(1.0), smooth(0.7))
    }

    fn fd_check(system: System, param: f64, seed: u64) -> f64 {
        let g = Grid::even(10.0, 256).unwrap();
        let op = DiscreteOperator::for_grid(&g);
        let (u, e) = random_fields(256, seed);
        let (v, z) = random_fields(256, seed + 100);
        let jac = system.jacobian(&op, &u, &e, param).unwrap();
        let jv = jac.apply(&v, &z);
        let step = 1e-6;
        let plus: (Vec<f64>, Vec<f64>) = (
            u.iter().zip(&v).map(|(a, b)| a + step * b).collect(),
            e.iter().zip(&z).map(|(a, b)| a + step * b).collect(),
        );
        let minus: (Vec<f64>, Vec<f64>) = (
            u.iter().zip(&v).map(|(a, b)| a - step * b).collect(),
            e.iter().zip(&z).map(|(a, b)| a - step * b).collect(),
        );
        let rp = system.residual(&op, &plus.0, &plus.1, param).unwrap();
        let rm = system.residual(&op, &minus.0, &minus.1, param).unwrap();
        let fd = Residual {
            mass: rp.mass.iter().zip(&rm.mass).map(|(a, b)| (a - b) / (2.0 * step)).collect(),
            momentum: rp.momentum.iter().zip(&rm.momentum).map(|(a, b)| (a - b) / (2.0 * step)).collect(),
        };
        jv.distance(&fd) / jv.sup_norm()
    }

    #[test]
    fn slow_jacobian_matches_finite_differences() {
        let rel = fd_check(System::Slow { beta: 1.0 }, 0.1, 1);
        assert!(rel < 1e-6, "{rel}");
    }

    #[test]
    fn fast_jacobian_matches_finite_differences() {
        let rel = fd_check(System::Fast { k: 0.5, lambda: 1.5 }, 0.01, 2);
        assert!(rel < 1e-6, "{rel}");
    }

    #[test]
    fn param_derivative_matches_finite_differences() {
        let g = Grid::even(10.0, 256).unwrap();
        let op = DiscreteOperator::for_grid(&g);
        let (u, e) = random_fields(256, 5);
        for (sys, p) in [(System::Slow { beta: 0.7 }, 0.2), (System::Fast { k: 0.5, lambda: 1.5 }, 0.02)] {
            let d = sys.param_derivative(&op, &u, &e, p);
            let h = 1e-6;
            let rp = sys.residual(&op, &u, &e, p + h).unwrap();
            let rm = sys.residual(&op, &u, &e, p - h).unwrap();
            let fd = Residual {
                mass: rp.mass.iter().zip(&rm.mass).map(|(a, b)| (a - b) / (2.0 * h)).collect(),
                momentum: rp.momentum.iter().zip(&rm.momentum).map(|(a, b)| (a - b) / (2.0 * h)).collect(),
            };
            assert!(d.distance(&fd) / d.sup_norm() < 1e-6);
        }
    }

    #[test]
    fn slow_jacobian_symmetric_at_zero_speed_only() {
        let g = Grid::even(20.0, 200).unwrap();
        let op = DiscreteOperator::for_grid(&g);
        let p = stationary_exact(1.0, StationaryBranch::Plus, &g).unwrap();
        let interior = 8usize..2 * 200 - 8;
        let asym = |lambda: f64| {
            let m = jacobian_slow(&op, &p.u, &p.eta, lambda, 1.0).unwrap().to_band();
            let mut worst: f64 = 0.0;
            for i in interior.clone() {
                for j in i.saturating_sub(5)..(i + 6).min(400) {
                    if interior.contains(&j) {
                        worst = worst.max((m.get(i, j) - m.get(j, i)).abs());
                    }
                }
            }
            worst
        };
        assert!(asym(0.0) < 1e-12);
        assert!(asym(0.1) > 1e-3);
    }

    #[test]
    fn zero_state_jacobian_is_block_diagonal_helmholtz() {
        let g = Grid::even(10.0, 64).unwrap();
        let op = DiscreteOperator::for_grid(&g);
        let z = vec![0.0; 64];
        let jac = jacobian_slow(&op, &z, &z, 0.0, 1.0).unwrap();
        assert!(jac.block(0, 1).diag.iter().all(|&v| v == 0.0) && jac.block(0, 1).d2 == 0.0);
        assert!(jac.block(1, 0).diag.iter().all(|&v| v == 0.0) && jac.block(1, 0).d2 == 0.0);
        assert_eq!(jac.block(0, 0), jac.block(1, 1));
        assert!(jac.to_band().lu().is_ok());
    }

    #[test]
    fn stationary_translation_mode_is_in_the_kernel() {
        let g = Grid::full(30.0, 4097).unwrap();
        let p = stationary_exact(1.0, StationaryBranch::Plus, &g).unwrap();
        let r = translation_mode_residual(&System::Slow { beta: 1.0 }, &p, 0.0).unwrap();
        assert!(r < 1e-6, "{r}");
    }

    #[test]
    fn fast_translation_mode_and_reduced_ode() {
        let g = Grid::full(30.0, 4097).unwrap();
        let w = boussinesq_fast_profile(1.5, &g).unwrap();
        let p = &w.profile;
        let op = DiscreteOperator::for_grid(&g);
        let jac = jacobian_fast(&op, &p.u, &p.eta, 0.0, 0.5, 1.5).unwrap();
        let de: Vec<f64> = p.u.iter().zip(&w.du).map(|(u, du)| 1.5 * du / (1.5 - u).powi(2)).collect();
        let r = jac.apply(&w.du, &de).sup_norm();
        assert!(r < 1e-5, "{r}");
        let coeff = jac.reduced_scalar_coefficient().unwrap();
        for (c, u) in coeff.iter().zip(&p.u) {
            let expected = 1.5 / (1.5 - u).powi(2) - (1.5 - u);
            assert!((c - expected).abs() < 1e-10);
        }
    }

    #[test]
    fn newton_on_exact_stationary_converges_immediately() {
        let g = Grid::even(30.0, 2048).unwrap();
        let p = stationary_exact(1.0, StationaryBranch::Plus, &g).unwrap();
        let out = newton_solve(&System::Slow { beta: 1.0 }, &p, 0.0, &NewtonSettings::default()).unwrap();
        assert!(out.iterations <= 1);
        assert!(*out.residual_history.last().unwrap() < 1e-10);
        assert!(out.report.smallest_singular_value > 0.0);
    }

    #[test]
    fn singular_value_monitor_is_grid_converged() {
        // The even-subspace operator at (U₀⁺, 0) has smallest |eigenvalue| 3/4.
        let sigma: Vec<f64> = [257, 513, 1025]
            .iter()
            .map(|&n| {
                let g = Grid::even(30.0, n).unwrap();
                let p = stationary_exact(1.0, StationaryBranch::Plus, &g).unwrap();
                let op = DiscreteOperator::for_grid(&g);
                let lu = jacobian_slow(&op, &p.u, &p.eta, 0.0, 1.0).unwrap().monitor_band().lu().unwrap();
                smallest_singular_value(&lu, 200)
            })
            .collect();
        for s in &sigma {
            assert!((s - 0.75).abs() < 1e-3, "{sigma:?}");
        }
    }

    #[test]
    fn newton_converges_quadratically_from_perturbation() {
        // The round-off floor of the residual grows like h⁻², so the grid is
        // kept coarse enough for the second step to stay above it.
        let g = Grid::even(30.0, 1024).unwrap();
        let mut p = stationary_exact(1.0, StationaryBranch::Plus, &g).unwrap();
        for (j, v) in p.u.iter_mut().enumerate() {
            *v += 1e-3 * (-(g.x(j) - 2.0).powi(2)).exp();
        }
        let out = newton_solve(&System::Slow { beta: 1.0 }, &p, 0.0, &NewtonSettings::plain()).unwrap();
        assert!(out.iterations <= 5, "{:?}", out.residual_history);
        let h = &out.residual_history;
        assert!(h.len() >= 3);
        for w in h.windows(2) {
            assert!(w[1].ln() / w[0].ln() >= 1.8, "{h:?}");
        }
    }

    #[test]
    fn newton_fast_small_s_stays_positive() {
        let g = Grid::even(30.0, 2048).unwrap();
        let w = boussinesq_fast_profile(1.5, &g).unwrap();
        let sys = System::Fast { k: 0.5, lambda: 1.5 };
        let out = newton_solve(&sys, &w.profile, 0.005, &NewtonSettings::default()).unwrap();
        let n = g.len();
        assert!(out.profile.u[..n - 1].iter().all(|&v| v > 0.0));
        assert!(out.profile.eta[..n - 1].iter().all(|&v| v > 0.0));
    }

    #[test]
    fn newton_rejects_full_line_and_stagnation() {
        let g = Grid::full(10.0, 101).unwrap();
        let p = stationary_exact(1.0, StationaryBranch::Plus, &g).unwrap();
        assert_eq!(
            newton_solve(&System::Slow { beta: 1.0 }, &p, 0.0, &NewtonSettings::default()).unwrap_err(),
            SolverError::RequiresEvenGrid
        );
        let g = Grid::even(10.0, 101).unwrap();
        let mut p = stationary_exact(1.0, StationaryBranch::Plus, &g).unwrap();
        p.u[0] = 2.0;
        let err = newton_solve(&System::Fast { k: 0.5, lambda: 1.5 }, &p, 0.0, &NewtonSettings::default())
            .unwrap_err();
        assert!(matches!(err, SolverError::Stagnation { .. }));
        let err = newton_solve(&System::Slow { beta: 0.5 }, &p, 0.7, &NewtonSettings::default()).unwrap_err();
        assert!(matches!(err, SolverError::Ellipticity { .. }));
    }

    #[test]
    fn newton_reports_iteration_limit() {
        let g = Grid::even(30.0, 512).unwrap();
        let mut p = stationary_exact(1.0, StationaryBranch::Plus, &g).unwrap();
        p.u.iter_mut().for_each(|v| *v *= 1.3);
        let settings = NewtonSettings {
            max_iters: 1,
            ..NewtonSettings::default()
        };
        let err = newton_solve(&System::Slow { beta: 1.0 }, &p, 0.0, &settings).unwrap_err();
        assert!(matches!(err, SolverError::MaxIterations { .. }));
    }
}
