//! Uniform one-dimensional grids, nodal fields, quadrature and finite differences.

use crate::error::{invalid, Error, Result};

/// Treatment of the two ends of the interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// The interval wraps around; node `n_cells` coincides with node 0 and is not stored.
    Periodic,
    /// Both end nodes are stored. Derivatives use one-sided stencils there and the
    /// solvers hold the end nodes fixed, which for compactly supported data is the
    /// homogeneous Dirichlet condition.
    DirichletZero,
}

/// Uniform grid on `[origin, origin + length]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    length: f64,
    n_cells: usize,
    spacing: f64,
    boundary: Boundary,
    origin: f64,
}

impl Grid1D {
    pub const MIN_CELLS: usize = 4;

    pub fn new(length: f64, n_cells: usize, boundary: Boundary) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(invalid(
                "length",
                format!("must be positive and finite, got {length}"),
            ));
        }
        if n_cells < Self::MIN_CELLS {
            return Err(invalid(
                "n_cells",
                format!("must be at least {}, got {n_cells}", Self::MIN_CELLS),
            ));
        }
        Ok(Self {
            length,
            n_cells,
            spacing: length / n_cells as f64,
            boundary,
            origin: 0.0,
        })
    }

    pub fn periodic(length: f64, n_cells: usize) -> Result<Self> {
        Self::new(length, n_cells, Boundary::Periodic)
    }

    pub fn dirichlet(length: f64, n_cells: usize) -> Result<Self> {
        Self::new(length, n_cells, Boundary::DirichletZero)
    }

    /// Moves the left end of the interval to `origin`.
    pub fn with_origin(mut self, origin: f64) -> Self {
        self.origin = origin;
        self
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    /// Number of stored nodes: `n_cells` when periodic, `n_cells + 1` otherwise.
    pub fn n_nodes(&self) -> usize {
        match self.boundary {
            Boundary::Periodic => self.n_cells,
            Boundary::DirichletZero => self.n_cells + 1,
        }
    }

    pub fn node(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.spacing
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_nodes()).map(|i| self.node(i)).collect()
    }

    /// Quadrature weights: uniform on periodic grids, trapezoidal otherwise.
    pub fn weight(&self, i: usize) -> f64 {
        match self.boundary {
            Boundary::Periodic => self.spacing,
            Boundary::DirichletZero if i == 0 || i == self.n_cells => 0.5 * self.spacing,
            Boundary::DirichletZero => self.spacing,
        }
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.n_nodes());
        match self.boundary {
            Boundary::Periodic => self.spacing * values.iter().sum::<f64>(),
            Boundary::DirichletZero => {
                let n = values.len() - 1;
                let inner: f64 = values[1..n].iter().sum();
                self.spacing * (inner + 0.5 * (values[0] + values[n]))
            }
        }
    }

    /// Second-order first derivative of nodal values into `out`.
    pub fn d1_into(&self, f: &[f64], out: &mut [f64]) {
        let n = f.len();
        debug_assert_eq!(n, self.n_nodes());
        debug_assert_eq!(out.len(), n);
        let c = 0.5 / self.spacing;
        for i in 1..n - 1 {
            out[i] = c * (f[i + 1] - f[i - 1]);
        }
        match self.boundary {
            Boundary::Periodic => {
                out[0] = c * (f[1] - f[n - 1]);
                out[n - 1] = c * (f[0] - f[n - 2]);
            }
            Boundary::DirichletZero => {
                out[0] = c * (-3.0 * f[0] + 4.0 * f[1] - f[2]);
                out[n - 1] = c * (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]);
            }
        }
    }

    /// Second-order second derivative of nodal values into `out`.
    pub fn d2_into(&self, f: &[f64], out: &mut [f64]) {
        let n = f.len();
        debug_assert_eq!(n, self.n_nodes());
        debug_assert_eq!(out.len(), n);
        let c = 1.0 / (self.spacing * self.spacing);
        for i in 1..n - 1 {
            out[i] = c * (f[i + 1] - 2.0 * f[i] + f[i - 1]);
        }
        match self.boundary {
            Boundary::Periodic => {
                out[0] = c * (f[1] - 2.0 * f[0] + f[n - 1]);
                out[n - 1] = c * (f[0] - 2.0 * f[n - 1] + f[n - 2]);
            }
            Boundary::DirichletZero => {
                out[0] = c * (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]);
                out[n - 1] = c * (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]);
            }
        }
    }
}

/// Nodal values of one scalar quantity on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid1D,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_nodes() {
            return Err(invalid(
                "values",
                format!(
                    "expected {} nodal values, got {}",
                    grid.n_nodes(),
                    values.len()
                ),
            ));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid("values", format!("non-finite entry at node {i}")));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid1D) -> Self {
        Self {
            values: vec![0.0; grid.n_nodes()],
            grid,
        }
    }

    pub fn constant(grid: Grid1D, value: f64) -> Self {
        Self {
            values: vec![value; grid.n_nodes()],
            grid,
        }
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.nodes().into_iter().map(f).collect())
    }

    /// Skips the finiteness check; used by the time stepper, which reports
    /// non-finite states itself.
    pub(crate) fn from_raw(grid: Grid1D, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.n_nodes());
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    /// `a * self + b * other`.
    pub fn axpby(&self, a: f64, other: &Field, b: f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Ok(Self::from_raw(self.grid, values))
    }
}

/// Quadrature of a field over its grid; exact for constants.
pub fn integrate_field(f: &Field) -> f64 {
    f.grid.integrate(&f.values)
}

/// Derivative order accepted by [`spatial_derivative`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeOrder {
    First,
    Second,
}

impl TryFrom<u8> for DerivativeOrder {
    type Error = Error;

    fn try_from(order: u8) -> Result<Self> {
        match order {
            1 => Ok(Self::First),
            2 => Ok(Self::Second),
            _ => Err(invalid("order", format!("must be 1 or 2, got {order}"))),
        }
    }
}

pub fn spatial_derivative(f: &Field, order: DerivativeOrder) -> Field {
    let mut out = vec![0.0; f.len()];
    match order {
        DerivativeOrder::First => f.grid.d1_into(&f.values, &mut out),
        DerivativeOrder::Second => f.grid.d2_into(&f.values, &mut out),
    }
    Field::from_raw(f.grid, out)
}
