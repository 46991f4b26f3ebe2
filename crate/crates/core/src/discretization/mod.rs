//! Truncated uniform grid on `[-L, L]`, fourth-order finite differences,
//! trapezoidal quadrature and the Dirichlet second-difference operator.

pub mod banded;
pub mod elliptic;
pub mod state;

use crate::error::{Error, Result};
use crate::scalar::{Cplx, Real};

pub use banded::{PentaFactor, SymPentadiagonal};
pub use elliptic::{hminus1_solve, Hminus1};
pub use state::{InitialData, InitialKind, ModeState, Model, ShearField};

/// Smallest admissible number of grid points.
pub const MIN_POINTS: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    half_width: T,
    points: usize,
    h: T,
    y: Vec<T>,
}

impl<T: Real> Grid<T> {
    pub fn new(half_width: T, points: usize) -> Result<Self> {
        if !(half_width > T::zero()) || !half_width.is_finite() {
            return Err(Error::Invalid(format!(
                "grid half-width must be positive, got {half_width}"
            )));
        }
        if points < MIN_POINTS {
            return Err(Error::Invalid(format!(
                "grid needs at least {MIN_POINTS} points, got {points}"
            )));
        }
        let h = T::of(2.0) * half_width / T::of((points - 1) as f64);
        let y = (0..points)
            .map(|i| -half_width + h * T::of(i as f64))
            .collect();
        Ok(Grid {
            half_width,
            points,
            h,
            y,
        })
    }

    /// `L`
    pub fn half_width(&self) -> T {
        self.half_width
    }

    /// `N`
    pub fn points(&self) -> usize {
        self.points
    }

    pub fn h(&self) -> T {
        self.h
    }

    pub fn y(&self) -> &[T] {
        &self.y
    }

    /// Largest wavenumber the grid represents, `π/h`.
    pub fn nyquist(&self) -> T {
        T::PI() / self.h
    }

    #[inline]
    fn weight(&self, i: usize) -> T {
        if i == 0 || i + 1 == self.points {
            self.h * T::of(0.5)
        } else {
            self.h
        }
    }

    /// Trapezoidal `∫ a conj(b) dy`.
    pub fn inner(&self, a: &[Cplx<T>], b: &[Cplx<T>]) -> Cplx<T> {
        debug_assert_eq!(a.len(), self.points);
        debug_assert_eq!(b.len(), self.points);
        let mut acc = Cplx::new(T::zero(), T::zero());
        for i in 0..self.points {
            acc = acc + a[i] * b[i].conj() * self.weight(i);
        }
        acc
    }

    /// Trapezoidal `∫ c(y) a conj(b) dy` for a real weight `c`.
    pub fn inner_with(&self, c: &[T], a: &[Cplx<T>], b: &[Cplx<T>]) -> Cplx<T> {
        debug_assert_eq!(c.len(), self.points);
        let mut acc = Cplx::new(T::zero(), T::zero());
        for i in 0..self.points {
            acc = acc + a[i] * b[i].conj() * (c[i] * self.weight(i));
        }
        acc
    }

    /// `‖a‖²`
    pub fn norm_sq(&self, a: &[Cplx<T>]) -> T {
        let mut acc = T::zero();
        for (i, v) in a.iter().enumerate() {
            acc = acc + v.norm_sqr() * self.weight(i);
        }
        acc
    }

    /// `‖c·a‖²` for a real multiplier `c`.
    pub fn norm_sq_scaled(&self, c: &[T], a: &[Cplx<T>]) -> T {
        let mut acc = T::zero();
        for (i, v) in a.iter().enumerate() {
            acc = acc + v.norm_sqr() * c[i] * c[i] * self.weight(i);
        }
        acc
    }

    /// Fourth-order first derivative; one-sided fourth-order closures at both ends.
    pub fn d1(&self, g: &[Cplx<T>]) -> Vec<Cplx<T>> {
        let mut out = vec![Cplx::new(T::zero(), T::zero()); g.len()];
        self.d1_into(g, &mut out);
        out
    }

    pub fn d1_into(&self, g: &[Cplx<T>], out: &mut [Cplx<T>]) {
        let n = self.points;
        assert_eq!(g.len(), n);
        assert_eq!(out.len(), n);
        let c = T::of;
        let s = T::one() / (c(12.0) * self.h);
        out[0] = (g[0] * c(-25.0) + g[1] * c(48.0) - g[2] * c(36.0) + g[3] * c(16.0)
            - g[4] * c(3.0))
            * s;
        out[1] = (g[0] * c(-3.0) - g[1] * c(10.0) + g[2] * c(18.0) - g[3] * c(6.0) + g[4]) * s;
        for i in 2..n - 2 {
            out[i] = (g[i - 2] - g[i - 1] * c(8.0) + g[i + 1] * c(8.0) - g[i + 2]) * s;
        }
        out[n - 2] = -(g[n - 1] * c(-3.0) - g[n - 2] * c(10.0) + g[n - 3] * c(18.0)
            - g[n - 4] * c(6.0)
            + g[n - 5])
            * s;
        out[n - 1] = -(g[n - 1] * c(-25.0) + g[n - 2] * c(48.0) - g[n - 3] * c(36.0)
            + g[n - 4] * c(16.0)
            - g[n - 5] * c(3.0))
            * s;
    }

    /// Fourth-order second derivative; one-sided closures at both ends.
    pub fn d2(&self, g: &[Cplx<T>]) -> Vec<Cplx<T>> {
        let mut out = vec![Cplx::new(T::zero(), T::zero()); g.len()];
        self.d2_into(g, &mut out);
        out
    }

    pub fn d2_into(&self, g: &[Cplx<T>], out: &mut [Cplx<T>]) {
        let n = self.points;
        assert_eq!(g.len(), n);
        assert_eq!(out.len(), n);
        let c = T::of;
        let s = T::one() / (c(12.0) * self.h * self.h);
        let edge0 = |a: &dyn Fn(usize) -> Cplx<T>| {
            (a(0) * c(45.0) - a(1) * c(154.0) + a(2) * c(214.0) - a(3) * c(156.0)
                + a(4) * c(61.0)
                - a(5) * c(10.0))
                * s
        };
        let edge1 = |a: &dyn Fn(usize) -> Cplx<T>| {
            (a(0) * c(10.0) - a(1) * c(15.0) - a(2) * c(4.0) + a(3) * c(14.0) - a(4) * c(6.0)
                + a(5))
                * s
        };
        out[0] = edge0(&|j| g[j]);
        out[1] = edge1(&|j| g[j]);
        for i in 2..n - 2 {
            out[i] = (-g[i - 2] + g[i - 1] * c(16.0) - g[i] * c(30.0) + g[i + 1] * c(16.0)
                - g[i + 2])
                * s;
        }
        out[n - 1] = edge0(&|j| g[n - 1 - j]);
        out[n - 2] = edge1(&|j| g[n - 1 - j]);
    }

    /// Dirichlet second difference on the `N - 2` interior unknowns. The
    /// five-point stencil is closed next to the wall by odd reflection, which
    /// keeps the matrix symmetric negative definite.
    pub fn dirichlet_matrix(&self) -> SymPentadiagonal<T> {
        let m = self.points - 2;
        let s = T::one() / (T::of(12.0) * self.h * self.h);
        let mut diag = vec![T::of(-30.0) * s; m];
        diag[0] = T::of(-29.0) * s;
        diag[m - 1] = T::of(-29.0) * s;
        SymPentadiagonal {
            diag,
            sub1: vec![T::of(16.0) * s; m - 1],
            sub2: vec![-s; m - 2],
        }
    }

    /// Applies the Dirichlet operator to a full-length vector; the wall
    /// values of `g` are ignored and the wall entries of `out` are zero.
    pub fn apply_dirichlet(&self, g: &[Cplx<T>], out: &mut [Cplx<T>]) {
        let n = self.points;
        assert_eq!(g.len(), n);
        assert_eq!(out.len(), n);
        let c = T::of;
        let s = T::one() / (c(12.0) * self.h * self.h);
        let zero = Cplx::new(T::zero(), T::zero());
        let at = |i: isize| -> Cplx<T> {
            if i <= 0 || i >= n as isize - 1 {
                zero
            } else {
                g[i as usize]
            }
        };
        out[0] = zero;
        out[n - 1] = zero;
        for i in 1..n - 1 {
            let j = i as isize;
            let mut left2 = at(j - 2);
            let mut right2 = at(j + 2);
            if i == 1 {
                left2 = -g[1];
            }
            if i == n - 2 {
                right2 = -g[n - 2];
            }
            out[i] = (-left2 + at(j - 1) * c(16.0) - g[i] * c(30.0) + at(j + 1) * c(16.0)
                - right2)
                * s;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(grid: &Grid<f64>, f: impl Fn(f64) -> Cplx<f64>) -> Vec<Cplx<f64>> {
        grid.y().iter().map(|&y| f(y)).collect()
    }

    fn max_err(a: &[Cplx<f64>], b: &[Cplx<f64>], range: std::ops::Range<usize>) -> f64 {
        range.map(|i| (a[i] - b[i]).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn grid_is_uniform() {
        let g = Grid::new(3.0_f64, 31).unwrap();
        assert!((g.h() - 0.2).abs() < 1e-15);
        assert_eq!(g.y()[0], -3.0);
        assert!((g.y()[30] - 3.0).abs() < 1e-14);
        assert!(Grid::new(3.0_f64, 15).is_err());
        assert!(Grid::new(0.0_f64, 32).is_err());
    }

    #[test]
    fn d1_examples() {
        let grid = Grid::new(4.0, 401).unwrap();
        let g = sample(&grid, |y| Cplx::new(0.0, y).exp());
        let exact = sample(&grid, |y| Cplx::new(0.0, 1.0) * Cplx::new(0.0, y).exp());
        assert!(max_err(&grid.d1(&g), &exact, 0..401) < 1e-7);

        let c = vec![Cplx::new(2.5, -1.0); 401];
        assert!(grid.d1(&c).iter().all(|v| v.norm() < 1e-12));

        let sq = sample(&grid, |y| Cplx::new(y * y, 0.0));
        let two_y = sample(&grid, |y| Cplx::new(2.0 * y, 0.0));
        assert!(max_err(&grid.d1(&sq), &two_y, 0..401) < 1e-11);
    }

    #[test]
    fn d2_examples() {
        let grid = Grid::new(4.0, 401).unwrap();
        let s = sample(&grid, |y| Cplx::new(y.sin(), 0.0));
        let ms = sample(&grid, |y| Cplx::new(-y.sin(), 0.0));
        assert!(max_err(&grid.d2(&s), &ms, 0..401) < 1e-6);

        let lin = sample(&grid, |y| Cplx::new(3.0 * y - 1.0, y));
        assert!(grid.d2(&lin).iter().all(|v| v.norm() < 1e-9));

        let gauss = sample(&grid, |y| Cplx::new((-y * y).exp(), 0.0));
        let exact = sample(&grid, |y| Cplx::new((4.0 * y * y - 2.0) * (-y * y).exp(), 0.0));
        assert!(max_err(&grid.d2(&gauss), &exact, 0..401) < 1e-6);
    }

    #[test]
    fn refinement_is_fourth_order() {
        let f = |y: f64| Cplx::new((0.7 * y).sin(), (1.3 * y).cos());
        let df = |y: f64| Cplx::new(0.7 * (0.7 * y).cos(), -1.3 * (1.3 * y).sin());
        let ddf = |y: f64| Cplx::new(-0.49 * (0.7 * y).sin(), -1.69 * (1.3 * y).cos());
        let errs = |n: usize| {
            let grid = Grid::new(3.0, n).unwrap();
            let g = sample(&grid, f);
            let e1 = max_err(&grid.d1(&g), &sample(&grid, df), 0..n);
            let e2 = max_err(&grid.d2(&g), &sample(&grid, ddf), 0..n);
            (e1, e2)
        };
        let (a1, a2) = errs(61);
        let (b1, b2) = errs(121);
        assert!(a1 / b1 >= 8.0, "d1 ratio {}", a1 / b1);
        assert!(a2 / b2 >= 8.0, "d2 ratio {}", a2 / b2);
    }

    #[test]
    fn dirichlet_operator_matches_matrix_and_derivative() {
        let grid = Grid::new(6.0, 481).unwrap();
        let g = sample(&grid, |y| Cplx::new((-y * y).exp(), 0.3 * y * (-y * y).exp()));
        let mut full = vec![Cplx::new(0.0, 0.0); 481];
        grid.apply_dirichlet(&g, &mut full);
        let m = grid.dirichlet_matrix();
        let mut inner = vec![Cplx::new(0.0, 0.0); 479];
        m.matvec(&g[1..480], &mut inner);
        for i in 0..479 {
            assert!((inner[i] - full[i + 1]).norm() < 1e-9);
        }
        assert!(max_err(&full, &grid.d2(&g), 2..479) < 1e-12);
        // Symmetric negative definite.
        assert!(m.affine(0.0, -1.0).factor().is_ok());
    }

    #[test]
    fn trapezoid_integrates_gaussian() {
        let grid = Grid::new(10.0, 801).unwrap();
        let g = sample(&grid, |y| Cplx::new((-y * y / 2.0).exp(), 0.0));
        let n2 = grid.norm_sq(&g);
        assert!((n2 - std::f64::consts::PI.sqrt()).abs() < 1e-12);
        let ones = vec![2.0; 801];
        assert!((grid.norm_sq_scaled(&ones, &g) - 4.0 * n2).abs() < 1e-12);
        assert!((grid.inner(&g, &g).re - n2).abs() < 1e-14);
    }
}
