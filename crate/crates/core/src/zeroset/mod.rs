//! Real zero sets of exponential sums: evaluation, component counting for
//! `n <= 2`, and coefficient-path experiments.

mod experiments;
mod march;

use serde::Serialize;

pub use experiments::{
    chamber_census, lift_reduced_point, path_experiment, CensusOptions, CensusReport, CensusRow, CrossingWindow, PathOptions,
    PathReport, PathStep,
};

use crate::error::{Error, Result};
use crate::spectrum::Spectrum;

/// Default marching-squares grid at the starting radius.
pub const DEFAULT_GRID: usize = 512;
/// Largest grid side used while doubling the radius.
pub const MAX_GRID: usize = 4096;
const MAX_DOUBLINGS: usize = 6;

/// `g(y) = sum_j c_j exp(a_j . y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpSum {
    spec: Spectrum,
    c: Vec<f64>,
    log_abs: Vec<f64>,
}

impl ExpSum {
    pub fn new(spec: Spectrum, c: Vec<f64>) -> Result<Self> {
        if c.len() != spec.len() {
            return Err(Error::Dimension(format!(
                "{} coefficients for a spectrum with {} columns",
                c.len(),
                spec.len()
            )));
        }
        if let Some(index) = c.iter().position(|v| v.is_nan() || v.abs() <= 1e-300 || !v.is_finite()) {
            return Err(Error::ZeroCoefficient { index });
        }
        let log_abs = c.iter().map(|v| v.abs().ln()).collect();
        Ok(Self { spec, c, log_abs })
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spec
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.c
    }

    pub fn n(&self) -> usize {
        self.spec.n()
    }

    fn exponent(&self, j: usize, y: &[f64]) -> f64 {
        let a = self.spec.matrix();
        self.log_abs[j] + (0..self.n()).map(|r| a[(r, j)] * y[r]).sum::<f64>()
    }

    /// `(s, m)` with `g(y) = s * exp(m)`, `|s| <= n + k`.
    pub fn eval_scaled(&self, y: &[f64]) -> (f64, f64) {
        let exps: Vec<f64> = (0..self.c.len()).map(|j| self.exponent(j, y)).collect();
        let m = exps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let s = exps
            .iter()
            .zip(&self.c)
            .map(|(e, c)| c.signum() * (e - m).exp())
            .sum();
        (s, m)
    }

    /// `g(y)`; overflows to a correctly signed infinity.
    pub fn eval(&self, y: &[f64]) -> f64 {
        let (s, m) = self.eval_scaled(y);
        if s == 0.0 {
            0.0
        } else {
            s * m.exp()
        }
    }

    /// Sign changes of the coefficients ordered by exponent (`n = 1`).
    pub fn sign_changes(&self) -> usize {
        let mut order: Vec<usize> = (0..self.c.len()).collect();
        order.sort_by(|&i, &j| self.spec.matrix()[(0, i)].total_cmp(&self.spec.matrix()[(0, j)]));
        order.windows(2).filter(|w| self.c[w[0]] * self.c[w[1]] < 0.0).count()
    }
}

/// `g(y)`.
pub fn eval(g: &ExpSum, y: &[f64]) -> f64 {
    g.eval(y)
}

/// Number of connected components of the real zero set, measured on growing
/// boxes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComponentCount {
    pub count: usize,
    /// Radius of the last box examined.
    pub box_radius: f64,
    /// The count agreed at radii `R`, `2R` and `4R`.
    pub stabilized: bool,
    /// Components meeting the boundary of the last box.
    pub boundary_touching: usize,
    /// Grid side of the last box.
    pub resolution: usize,
}

impl ComponentCount {
    pub fn require_stable(self) -> Result<Self> {
        if self.stabilized {
            Ok(self)
        } else {
            Err(Error::NotStabilized { radius: self.box_radius })
        }
    }
}

fn stabilize(mut r: f64, mut grid: usize, max_grid: usize, mut count_at: impl FnMut(f64, usize) -> (usize, usize)) -> ComponentCount {
    let mut history: Vec<usize> = Vec::new();
    let mut last = ComponentCount {
        count: 0,
        box_radius: r,
        stabilized: false,
        boundary_touching: 0,
        resolution: grid,
    };
    for _ in 0..=MAX_DOUBLINGS {
        let g = grid.min(max_grid);
        let (count, touching) = count_at(r, g);
        history.push(count);
        last = ComponentCount {
            count,
            box_radius: r,
            stabilized: false,
            boundary_touching: touching,
            resolution: g,
        };
        if let [.., a, b, c] = history[..] {
            if a == b && b == c {
                last.stabilized = true;
                return last;
            }
        }
        r *= 2.0;
        grid *= 2;
    }
    last
}

/// Zeros of a univariate sum on `[-R, R]` with doubling `R`, starting at 8.
pub fn count_components_1d(g: &ExpSum) -> Result<ComponentCount> {
    if g.n() != 1 {
        return Err(Error::Dimension(format!("expected n = 1, got n = {}", g.n())));
    }
    Ok(stabilize(8.0, 8192, 1 << 20, |r, nodes| {
        let sign = |i: usize| {
            let y = -r + 2.0 * r * i as f64 / nodes as f64;
            g.eval_scaled(&[y]).0 > 0.0
        };
        let mut prev = sign(0);
        let mut zeros = 0;
        for i in 1..=nodes {
            let s = sign(i);
            if s != prev {
                zeros += 1;
            }
            prev = s;
        }
        // Every zero of a univariate sum is its own component; the two
        // outermost ones are the ones closest to the box boundary.
        (zeros, 0)
    }))
}

/// Components of a bivariate zero set by marching squares on `[-R, R]^2`,
/// starting at `R = r0` with a `grid_resolution` grid and doubling both until
/// three consecutive counts agree (at most six doublings).
pub fn count_components_2d(g: &ExpSum, grid_resolution: usize, r0: f64) -> Result<ComponentCount> {
    if g.n() != 2 {
        return Err(Error::Dimension(format!("expected n = 2, got n = {}", g.n())));
    }
    if !(r0 > 0.0 && r0.is_finite()) || grid_resolution < 2 {
        return Err(Error::Precondition("need a positive radius and a grid of at least 2".into()));
    }
    Ok(stabilize(r0, grid_resolution, MAX_GRID, |r, grid| march::count(g, r, grid)))
}

/// Components on a single box, without stabilization.
pub fn count_on_box(g: &ExpSum, radius: f64, grid: usize) -> Result<(usize, usize)> {
    if g.n() != 2 {
        return Err(Error::Dimension(format!("expected n = 2, got n = {}", g.n())));
    }
    Ok(march::count(g, radius, grid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn sum(rows: &[&[f64]], c: &[f64]) -> ExpSum {
        ExpSum::new(Spectrum::from_rows(rows).unwrap(), c.to_vec()).unwrap()
    }

    #[test]
    fn circles_value() {
        let g = ExpSum::new(fixtures::parallelogram(), fixtures::circles_g1()).unwrap();
        assert!((g.eval(&[0.0, 2f64.ln()]) - 1.25).abs() < 1e-12);
    }

    #[test]
    fn eval_handles_overflow() {
        let g = sum(&[&[0.0, 1.0]], &[1.0, -1.0]);
        assert_eq!(g.eval(&[0.0]), 0.0);
        assert_eq!(g.eval(&[1000.0]), f64::NEG_INFINITY);
        let (s, m) = g.eval_scaled(&[1000.0]);
        assert!(s < 0.0 && (m - 1000.0).abs() < 1e-9);
        assert!(matches!(
            ExpSum::new(Spectrum::from_rows(&[&[0.0, 1.0]]).unwrap(), vec![1.0, 0.0]),
            Err(Error::ZeroCoefficient { index: 1 })
        ));
    }

    #[test]
    fn descartes_examples() {
        let g = sum(&[&[0.0, 1.0, 2.0]], &[1.0, -3.0, 2.0]);
        let c = count_components_1d(&g).unwrap();
        assert_eq!((c.count, c.stabilized), (2, true));
        assert_eq!(g.sign_changes(), 2);
        assert_eq!(count_components_1d(&sum(&[&[0.0, 1.0, 2.0]], &[1.0, 3.0, 2.0])).unwrap().count, 0);
        assert_eq!(count_components_1d(&sum(&[&[0.0, 1.0]], &[1.0, -1.0])).unwrap().count, 1);
    }

    #[test]
    fn circles_components() {
        let g1 = ExpSum::new(fixtures::parallelogram(), fixtures::circles_g1()).unwrap();
        let g2 = ExpSum::new(fixtures::parallelogram(), fixtures::circles_g2()).unwrap();
        let c1 = count_components_2d(&g1, DEFAULT_GRID, 4.0).unwrap();
        let c2 = count_components_2d(&g2, DEFAULT_GRID, 4.0).unwrap();
        assert_eq!((c1.count, c1.stabilized), (1, true));
        assert_eq!((c2.count, c2.stabilized), (0, true));
    }

    #[test]
    fn vertical_line() {
        // (1 - e^y1)(1 + e^y2) vanishes exactly on y1 = 0.
        let g = sum(&[&[0.0, 1.0, 0.0, 1.0], &[0.0, 0.0, 1.0, 1.0]], &[1.0, -1.0, 1.0, -1.0]);
        let c = count_components_2d(&g, 128, 4.0).unwrap();
        assert_eq!((c.count, c.boundary_touching, c.stabilized), (1, 1, true));
    }

    #[test]
    fn positive_sum_has_empty_zero_set() {
        let g = sum(&[&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]], &[1.0, 2.0, 3.0]);
        assert_eq!(count_components_2d(&g, 64, 4.0).unwrap().count, 0);
    }
}
