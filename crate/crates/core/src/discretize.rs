//! Grids, finite-difference operators and the `1 − β²∂ₓ²` solve.
//!
//! Profiles live on a truncated domain. On the even half-line `[0, L]` the
//! origin is closed by mirror ghosts (evenness) and the far end by an odd
//! reflection with the node at `L` pinned to zero. The full-line grid
//! `[−L, L]` uses the odd closure at both ends.

use serde::{Deserialize, Serialize};

use crate::error::DiscretizeError;
use crate::linalg::BandMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Symmetry {
    EvenHalfLine,
    FullLine,
}

impl Symmetry {
    fn name(self) -> &'static str {
        match self {
            Symmetry::EvenHalfLine => "even-half-line",
            Symmetry::FullLine => "full-line",
        }
    }
}

/// Uniform grid on `[0, L]` (even half-line) or `[−L, L]` (full line).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    half_length: f64,
    n: usize,
    symmetry: Symmetry,
}

impl Grid {
    pub const MIN_POINTS: usize = 16;

    pub fn new(half_length: f64, n: usize, symmetry: Symmetry) -> Result<Self, DiscretizeError> {
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(DiscretizeError::InvalidGrid(format!(
                "half length must be positive and finite, got {half_length}"
            )));
        }
        if n < Self::MIN_POINTS {
            return Err(DiscretizeError::InvalidGrid(format!(
                "need at least {} points, got {n}",
                Self::MIN_POINTS
            )));
        }
        Ok(Self {
            half_length,
            n,
            symmetry,
        })
    }

    pub fn even(half_length: f64, n: usize) -> Result<Self, DiscretizeError> {
        Self::new(half_length, n, Symmetry::EvenHalfLine)
    }

    pub fn full(half_length: f64, n: usize) -> Result<Self, DiscretizeError> {
        Self::new(half_length, n, Symmetry::FullLine)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    pub fn spacing(&self) -> f64 {
        match self.symmetry {
            Symmetry::EvenHalfLine => self.half_length / (self.n - 1) as f64,
            Symmetry::FullLine => 2.0 * self.half_length / (self.n - 1) as f64,
        }
    }

    #[inline]
    pub fn x(&self, j: usize) -> f64 {
        let h = self.spacing();
        match self.symmetry {
            Symmetry::EvenHalfLine => j as f64 * h,
            Symmetry::FullLine => -self.half_length + j as f64 * h,
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    /// Same domain with half the spacing (`n → 2n − 1`); old nodes are kept.
    pub fn refined(&self) -> Self {
        Self {
            n: 2 * self.n - 1,
            ..self.clone()
        }
    }

    /// Longer domain with the same spacing. Only defined for half-line grids.
    pub fn extended(&self, factor: f64) -> Result<Self, DiscretizeError> {
        if self.symmetry != Symmetry::EvenHalfLine || !(factor > 1.0) {
            return Err(DiscretizeError::InvalidGrid(
                "extension needs an even half-line grid and a factor > 1".into(),
            ));
        }
        let h = self.spacing();
        let intervals = ((self.n - 1) as f64 * factor).round() as usize;
        Self::even(h * intervals as f64, intervals + 1)
    }

    /// The default closure for this grid's symmetry.
    pub fn default_closure(&self) -> BoundaryClosure {
        match self.symmetry {
            Symmetry::EvenHalfLine => BoundaryClosure::NeumannDirichlet,
            Symmetry::FullLine => BoundaryClosure::DirichletBoth,
        }
    }

    /// Indices of nodes pinned to zero by the closure.
    pub fn dirichlet_nodes(&self) -> Vec<usize> {
        match self.symmetry {
            Symmetry::EvenHalfLine => vec![self.n - 1],
            Symmetry::FullLine => vec![0, self.n - 1],
        }
    }

    pub fn check_field(&self, field: &[f64]) -> Result<(), DiscretizeError> {
        if field.len() != self.n {
            return Err(DiscretizeError::DimensionMismatch {
                expected: self.n,
                got: field.len(),
            });
        }
        Ok(())
    }

    /// Sample index to ghost-resolved index and sign.
    #[inline]
    fn fold(&self, t: isize) -> (usize, f64) {
        let last = (self.n - 1) as isize;
        if t < 0 {
            match self.symmetry {
                Symmetry::EvenHalfLine => ((-t) as usize, 1.0),
                Symmetry::FullLine => ((-t) as usize, -1.0),
            }
        } else if t > last {
            ((2 * last - t) as usize, -1.0)
        } else {
            (t as usize, 1.0)
        }
    }

    /// Sample with ghost extension beyond the grid ends.
    #[inline]
    pub fn ghost(&self, field: &[f64], t: isize) -> f64 {
        let (i, sign) = self.fold(t);
        sign * field[i]
    }
}

/// Finite-difference order of the second-derivative stencil.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stencil {
    /// Three-point `(1, −2, 1)/h²`.
    Second,
    /// Five-point `(−1, 16, −30, 16, −1)/(12h²)`.
    #[default]
    Fourth,
}

impl Stencil {
    fn second_weights(self) -> [f64; 5] {
        match self {
            Stencil::Second => [0.0, 1.0, -2.0, 1.0, 0.0],
            Stencil::Fourth => [
                -1.0 / 12.0,
                16.0 / 12.0,
                -30.0 / 12.0,
                16.0 / 12.0,
                -1.0 / 12.0,
            ],
        }
    }

    fn first_weights(self) -> [f64; 5] {
        match self {
            Stencil::Second => [0.0, -0.5, 0.0, 0.5, 0.0],
            Stencil::Fourth => [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryClosure {
    /// Mirror ghosts at `x = 0`, zero at `x = L`.
    NeumannDirichlet,
    /// Zero at both ends of a full-line grid.
    DirichletBoth,
}

impl BoundaryClosure {
    fn name(self) -> &'static str {
        match self {
            BoundaryClosure::NeumannDirichlet => "neumann-at-0 + dirichlet-at-L",
            BoundaryClosure::DirichletBoth => "dirichlet-both",
        }
    }
}

/// Banded second-derivative matrix with ghost points folded into the band.
///
/// Row `j` stores the weights of columns `j − 2 ..= j + 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteOperator {
    grid: Grid,
    stencil: Stencil,
    closure: BoundaryClosure,
    rows: Vec<[f64; 5]>,
}

/// Second-derivative operator with the default (fourth-order) stencil.
pub fn second_derivative(
    grid: &Grid,
    closure: BoundaryClosure,
) -> Result<DiscreteOperator, DiscretizeError> {
    second_derivative_with(grid, closure, Stencil::default())
}

pub fn second_derivative_with(
    grid: &Grid,
    closure: BoundaryClosure,
    stencil: Stencil,
) -> Result<DiscreteOperator, DiscretizeError> {
    if closure != grid.default_closure() {
        return Err(DiscretizeError::UnsupportedClosure {
            closure: closure.name(),
            symmetry: grid.symmetry().name(),
        });
    }
    let n = grid.len();
    let inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
    let weights = stencil.second_weights();
    let mut rows = vec![[0.0; 5]; n];
    for (j, row) in rows.iter_mut().enumerate() {
        for (k, w) in weights.iter().enumerate() {
            if *w == 0.0 {
                continue;
            }
            let (col, sign) = grid.fold(j as isize + k as isize - 2);
            row[col + 2 - j] += sign * w * inv_h2;
        }
    }
    Ok(DiscreteOperator {
        grid: grid.clone(),
        stencil,
        closure,
        rows,
    })
}

impl DiscreteOperator {
    /// Default operator for a grid: fourth-order stencil, closure by symmetry.
    pub fn for_grid(grid: &Grid) -> Self {
        second_derivative(grid, grid.default_closure()).expect("default closure is always supported")
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn stencil(&self) -> Stencil {
        self.stencil
    }

    pub fn closure(&self) -> BoundaryClosure {
        self.closure
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Weight of column `col` in row `row`; zero outside the band.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        let offset = col as isize - row as isize;
        if offset.abs() > 2 {
            return 0.0;
        }
        self.rows[row][(offset + 2) as usize]
    }

    /// Band entries of row `j`, as `(column, weight)` pairs.
    pub fn row(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let n = self.rows.len();
        self.rows[j]
            .iter()
            .enumerate()
            .filter_map(move |(k, &w)| {
                let col = j as isize + k as isize - 2;
                (col >= 0 && (col as usize) < n && w != 0.0).then_some((col as usize, w))
            })
    }

    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; f.len()];
        self.apply_into(f, &mut out);
        out
    }

    pub fn apply_into(&self, f: &[f64], out: &mut [f64]) {
        assert_eq!(f.len(), self.rows.len(), "field length does not match operator");
        let n = f.len();
        for (j, (row, o)) in self.rows.iter().zip(out.iter_mut()).enumerate() {
            let mut acc = 0.0;
            if j >= 2 && j + 2 < n {
                for k in 0..5 {
                    acc += row[k] * f[j + k - 2];
                }
            } else {
                for (k, w) in row.iter().enumerate() {
                    let col = j as isize + k as isize - 2;
                    if col >= 0 && (col as usize) < n {
                        acc += w * f[col as usize];
                    }
                }
            }
            *o = acc;
        }
    }

    /// `(I − β² D₂)` as a band matrix with Dirichlet rows replaced by identity.
    pub fn helmholtz_band(&self, beta: f64) -> BandMatrix {
        let n = self.len();
        let b2 = beta * beta;
        let mut m = BandMatrix::zeros(n, 2, 2);
        for j in 0..n {
            m.add(j, j, 1.0);
            for (col, w) in self.row(j) {
                m.add(j, col, -b2 * w);
            }
        }
        for j in self.grid.dirichlet_nodes() {
            m.clear_row(j);
            m.add(j, j, 1.0);
        }
        m
    }
}

/// Centered first derivative with the grid's ghost closure.
pub fn first_derivative(grid: &Grid, f: &[f64]) -> Vec<f64> {
    first_derivative_with(grid, f, Stencil::default())
}

pub fn first_derivative_with(grid: &Grid, f: &[f64], stencil: Stencil) -> Vec<f64> {
    assert_eq!(f.len(), grid.len());
    let inv_h = 1.0 / grid.spacing();
    let w = stencil.first_weights();
    (0..f.len())
        .map(|j| {
            let j = j as isize;
            (0..5)
                .filter(|&k| w[k] != 0.0)
                .map(|k| w[k] * grid.ghost(f, j + k as isize - 2))
                .sum::<f64>()
                * inv_h
        })
        .collect()
}

/// Green's function of `1 − β²∂ₓ²` on the line.
pub fn green_function(beta: f64, x: f64) -> f64 {
    (-x.abs() / beta).exp() / (2.0 * beta)
}

/// Solves `(1 − β²∂ₓ²) f = rhs` on the grid.
pub fn solve_l(grid: &Grid, beta: f64, rhs: &[f64]) -> Result<Vec<f64>, DiscretizeError> {
    if !(beta > 0.0) {
        return Err(DiscretizeError::NonPositiveBeta(beta));
    }
    grid.check_field(rhs)?;
    let op = DiscreteOperator::for_grid(grid);
    let lu = op.helmholtz_band(beta).lu()?;
    let mut b = rhs.to_vec();
    for j in grid.dirichlet_nodes() {
        b[j] = 0.0;
    }
    Ok(lu.solve(&b))
}

/// Least-squares slope of `log|f|` over the last quarter of the grid,
/// excluding the final 5%.
pub fn decay_rate(field: &[f64], grid: &Grid) -> Result<f64, DiscretizeError> {
    grid.check_field(field)?;
    let n = field.len();
    let (lo, hi) = (n * 3 / 4, n * 95 / 100);
    let window = &field[lo..hi];
    let positive = window.iter().all(|&v| v > 0.0);
    let negative = window.iter().all(|&v| v < 0.0);
    if !(positive || negative) {
        return Err(DiscretizeError::SignChange);
    }
    let m = window.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for (i, v) in window.iter().enumerate() {
        let x = grid.x(lo + i);
        let y = v.abs().ln();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    Ok((m * sxy - sx * sy) / (m * sxx - sx * sx))
}

/// Trapezoid integral over the whole line; half-line fields are mirrored.
pub fn integrate(grid: &Grid, f: &[f64]) -> f64 {
    let h = grid.spacing();
    let n = f.len();
    let interior: f64 = f[1..n - 1].iter().sum();
    match grid.symmetry() {
        Symmetry::EvenHalfLine => h * (f[0] + 2.0 * interior + f[n - 1]),
        Symmetry::FullLine => h * (0.5 * f[0] + interior + 0.5 * f[n - 1]),
    }
}
