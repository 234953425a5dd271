//! Observation grids and uniform quadrature grids.

use crate::error::{Error, Result};

/// Strictly increasing observation times `0 < t_1 < ... < t_N`.
///
/// The origin `t_0 = 0` is implicit and never stored: the observed process
/// starts at `X_0 = 0` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    nodes: Vec<f64>,
}

impl TimeGrid {
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::Parameter("time grid must be nonempty".into()));
        }
        let mut prev = 0.0;
        for &t in &nodes {
            if !t.is_finite() || t <= prev {
                return Err(Error::Parameter(format!(
                    "time grid must be strictly increasing and positive, got {t} after {prev}"
                )));
            }
            prev = t;
        }
        Ok(Self { nodes })
    }

    /// Uniform grid `t_k = t_max * k / n`, `k = 1..=n`.
    pub fn uniform(t_max: f64, n: usize) -> Self {
        let nodes = (1..=n).map(|k| t_max * k as f64 / n as f64).collect();
        Self { nodes }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn t_max(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    /// Node spacing if the grid is uniform (including the implicit origin).
    pub fn uniform_step(&self) -> Option<f64> {
        let n = self.nodes.len();
        let dt = self.nodes[0];
        let tol = 1e-12 * self.t_max().max(1.0);
        for k in 1..n {
            if (self.nodes[k] - self.nodes[k - 1] - dt).abs() > tol {
                return None;
            }
        }
        Some(dt)
    }

    /// Increments `t_k - t_{k-1}` with `t_0 = 0`.
    pub fn increments(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.nodes
            .iter()
            .map(|&t| {
                let d = t - prev;
                prev = t;
                d
            })
            .collect()
    }
}

/// Uniform midpoint quadrature grid: `n` cells of width `t_max / n` on `[0, t_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadGrid {
    pub t_max: f64,
    pub n: usize,
}

impl QuadGrid {
    pub fn new(t_max: f64, n: usize) -> Result<Self> {
        if !(t_max > 0.0) || n == 0 {
            return Err(Error::Parameter(format!(
                "quadrature grid needs t_max > 0 and n > 0, got t_max={t_max}, n={n}"
            )));
        }
        Ok(Self { t_max, n })
    }

    pub fn dx(&self) -> f64 {
        self.t_max / self.n as f64
    }

    pub fn midpoint(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dx()
    }

    pub fn left_edge(&self, i: usize) -> f64 {
        i as f64 * self.dx()
    }

    pub fn midpoints(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.midpoint(i)).collect()
    }
}

/// Endpoint behaviour metadata: the function behaves like `s^e0` near 0 and
/// `(T-s)^e1` near `T`, with integrable exponents in `(-1, 0]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularityFlags {
    pub exponent_left: f64,
    pub exponent_right: f64,
    /// Set when the exponents were not derived from a closed form.
    pub heuristic: bool,
}

impl SingularityFlags {
    pub fn new(exponent_left: f64, exponent_right: f64, heuristic: bool) -> Result<Self> {
        for e in [exponent_left, exponent_right] {
            if !(e > -1.0 && e <= 0.0) {
                return Err(Error::Parameter(format!(
                    "singularity exponent must lie in (-1, 0], got {e}"
                )));
            }
        }
        Ok(Self {
            exponent_left,
            exponent_right,
            heuristic,
        })
    }
}

/// A real function sampled at the midpoints of a uniform quadrature grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub grid: QuadGrid,
    pub values: Vec<f64>,
    pub singularity: Option<SingularityFlags>,
}

impl GridFunction {
    pub fn new(grid: QuadGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::GridMismatch(format!(
                "expected {} values, got {}",
                grid.n,
                values.len()
            )));
        }
        Ok(Self {
            grid,
            values,
            singularity: None,
        })
    }

    pub fn from_fn(grid: QuadGrid, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..grid.n).map(|i| f(grid.midpoint(i))).collect();
        Self {
            grid,
            values,
            singularity: None,
        }
    }

    pub fn constant(grid: QuadGrid, c: f64) -> Self {
        Self {
            grid,
            values: vec![c; grid.n],
            singularity: None,
        }
    }

    pub fn with_singularity(mut self, flags: SingularityFlags) -> Self {
        self.singularity = Some(flags);
        self
    }

    /// Midpoint-rule integral over `[0, t_max]`, ignoring singularity metadata.
    pub fn integral_naive(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.dx()
    }

    /// Integral of `self * g` where the endpoint factors `s^e0 (T-s)^e1` are
    /// integrated exactly per cell and the remaining smooth part is taken at
    /// the cell midpoint. Falls back to the midpoint rule without flags.
    pub fn integral_against(&self, g: impl Fn(f64) -> f64) -> f64 {
        let dx = self.grid.dx();
        let t_max = self.grid.t_max;
        let mut acc = 0.0;
        for i in 0..self.grid.n {
            let m = self.grid.midpoint(i);
            let mut term = self.values[i] * g(m) * dx;
            if let Some(flags) = self.singularity {
                let a = self.grid.left_edge(i);
                let b = a + dx;
                term *= power_cell_factor(a, b, m, flags.exponent_left)
                    * power_cell_factor(t_max - b, t_max - a, t_max - m, flags.exponent_right);
            }
            acc += term;
        }
        acc
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// L2 norm on `[0, t_max]` by the midpoint rule.
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.dx()).sqrt()
    }

    /// Midpoint-rule inner product with another function on the same grid.
    pub fn inner(&self, other: &GridFunction) -> f64 {
        debug_assert_eq!(self.grid, other.grid);
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            * self.grid.dx()
    }
}

/// Ratio of the exact cell integral of `u^e` over `[a, b]` to its midpoint
/// approximation `(b - a) * m^e`.
fn power_cell_factor(a: f64, b: f64, m: f64, e: f64) -> f64 {
    if e == 0.0 {
        return 1.0;
    }
    let exact = (b.powf(e + 1.0) - a.powf(e + 1.0)) / (e + 1.0);
    exact / ((b - a) * m.powf(e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_grid_rejects_zero_and_decreasing() {
        assert!(TimeGrid::new(vec![0.0, 1.0]).is_err());
        assert!(TimeGrid::new(vec![1.0, 1.0]).is_err());
        assert!(TimeGrid::new(vec![2.0, 1.0]).is_err());
        assert!(TimeGrid::new(vec![]).is_err());
        assert!(TimeGrid::new(vec![0.5, 1.0, 1.5]).is_ok());
    }

    #[test]
    fn uniform_grid_step() {
        let g = TimeGrid::uniform(2.0, 8);
        assert_eq!(g.len(), 8);
        assert!((g.uniform_step().unwrap() - 0.25).abs() < 1e-15);
        let g = TimeGrid::new(vec![0.1, 0.2, 0.5]).unwrap();
        assert!(g.uniform_step().is_none());
    }

    #[test]
    fn increments_include_origin() {
        let g = TimeGrid::new(vec![1.0, 3.0]).unwrap();
        assert_eq!(g.increments(), vec![1.0, 2.0]);
    }

    #[test]
    fn singularity_flags_domain() {
        assert!(SingularityFlags::new(-0.5, 0.0, false).is_ok());
        assert!(SingularityFlags::new(-1.0, 0.0, false).is_err());
        assert!(SingularityFlags::new(0.1, 0.0, false).is_err());
    }

    #[test]
    fn integral_against_exact_for_power() {
        // h(s) = s^{-0.3} (1-s)^{-0.3}, integrated against g = 1, equals
        // B(0.7, 0.7); the flag-aware rule must be much closer than midpoint.
        let grid = QuadGrid::new(1.0, 256).unwrap();
        let e = -0.3;
        let h = GridFunction::from_fn(grid, |s| s.powf(e) * (1.0 - s).powf(e))
            .with_singularity(SingularityFlags::new(e, e, false).unwrap());
        let exact = statrs::function::beta::beta(0.7, 0.7);
        let aware = h.integral_against(|_| 1.0);
        let naive = h.integral_naive();
        assert!((aware - exact).abs() < (naive - exact).abs() / 5.0);
        assert!((aware - exact).abs() / exact < 1e-3);
    }
}
