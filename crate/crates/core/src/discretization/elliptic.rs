//! Per-mode Ḣ⁻¹ norm through the Dirichlet problem `(k² - ∂yy) ψ = g`.

use super::{Grid, ModeState};
use crate::error::{Error, Result};
use crate::scalar::{Cplx, Real};

#[derive(Debug, Clone)]
pub struct Hminus1<T> {
    /// Stream function, zero at both walls.
    pub psi: Vec<Cplx<T>>,
    /// `Re ∫ g conj(ψ) dy`, the squared per-mode Ḣ⁻¹ norm.
    pub norm_sq: T,
}

pub fn hminus1_solve<T: Real>(s: &ModeState<T>) -> Result<Hminus1<T>> {
    hminus1_lab(s.grid(), s.k(), &s.lab())
}

/// Same as [`hminus1_solve`] for lab-frame nodal values.
pub fn hminus1_lab<T: Real>(grid: &Grid<T>, k: u32, g: &[Cplx<T>]) -> Result<Hminus1<T>> {
    if k == 0 {
        return Err(Error::Invalid("Ḣ⁻¹ solve needs k >= 1".into()));
    }
    let n = grid.points();
    let k2 = T::of(k as f64).powi(2);
    let factor = grid.dirichlet_matrix().affine(k2, -T::one()).factor()?;
    let mut psi = vec![Cplx::new(T::zero(), T::zero()); n];
    psi[1..n - 1].copy_from_slice(&g[1..n - 1]);
    factor.solve(&mut psi[1..n - 1]);
    let mut acc = T::zero();
    for i in 1..n - 1 {
        acc = acc + (g[i].conj() * psi[i]).re;
    }
    Ok(Hminus1 {
        psi,
        norm_sq: (acc * grid.h()).max(T::zero()),
    })
}

/// Discrete `‖(k² - D2) ψ - g‖` over the interior nodes.
pub fn hminus1_residual<T: Real>(grid: &Grid<T>, k: u32, g: &[Cplx<T>], psi: &[Cplx<T>]) -> T {
    let n = grid.points();
    let k2 = T::of(k as f64).powi(2);
    let mut d2 = vec![Cplx::new(T::zero(), T::zero()); n];
    grid.apply_dirichlet(psi, &mut d2);
    let mut r: Vec<Cplx<T>> = vec![Cplx::new(T::zero(), T::zero()); n];
    for i in 1..n - 1 {
        r[i] = psi[i] * k2 - d2[i] - g[i];
    }
    grid.norm_sq(&r).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{Model, ShearField};
    use crate::shear::Shear;
    use proptest::prelude::*;

    #[test]
    fn zero_data_has_zero_norm() {
        let grid = Grid::new(5.0, 101).unwrap();
        let g = vec![Cplx::new(0.0, 0.0); 101];
        assert_eq!(hminus1_lab(&grid, 1, &g).unwrap().norm_sq, 0.0);
    }

    #[test]
    fn modulated_bump_matches_fourier_quadrature() {
        // g = e^{iη0 y} e^{-y²/(2s²)}: its spectrum is a Gaussian of width 1/s
        // centred at η0, so the norm is ∫ s² e^{-s²(η-η0)²} / (1+η²) dη / ... (unitary FT).
        let (eta0, s) = (3.0_f64, 4.0_f64);
        let grid = Grid::new(40.0, 8001).unwrap();
        let g: Vec<_> = grid
            .y()
            .iter()
            .map(|&y| Cplx::new(0.0, eta0 * y).exp() * (-y * y / (2.0 * s * s)).exp())
            .collect();
        let got = hminus1_lab(&grid, 1, &g).unwrap().norm_sq;
        let m = 200_001;
        let d = 40.0 / (m - 1) as f64;
        let want: f64 = (0..m)
            .map(|i| {
                let eta = -20.0 + d * i as f64;
                let amp = s * (-s * s * (eta - eta0).powi(2) / 2.0).exp();
                amp * amp / (1.0 + eta * eta) * d
            })
            .sum();
        assert!((got - want).abs() < 1e-8 * want, "{got} vs {want}");
        // Concentrates at ‖g‖²/(1+η0²).
        let plain = grid.norm_sq(&g) / (1.0 + eta0 * eta0);
        assert!((got - plain).abs() < 0.05 * plain);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn solve_is_accurate_nonnegative_and_bounded(
            k in 1u32..5,
            coeffs in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0, -3.0f64..3.0, 0.2f64..1.5, -4.0f64..4.0), 1..5),
        ) {
            let grid = Grid::new(8.0, 257).unwrap();
            let field = ShearField::new(grid, Shear::Couette);
            let g: Vec<_> = field.grid().y().iter().map(|&y| {
                coeffs.iter().map(|&(re, im, c, w, f)| {
                    Cplx::new(re, im) * Cplx::new(0.0, f * y).exp() * (-(y - c).powi(2) / (2.0 * w * w)).exp()
                }).sum()
            }).collect();
            let s = ModeState::new(field, k, Model::Hypoelliptic, g).unwrap();
            let g = s.lab();
            let out = hminus1_solve(&s).unwrap();
            let norm = s.grid().norm_sq(&g);
            prop_assert!(out.norm_sq >= 0.0);
            prop_assert!(out.norm_sq <= norm / (k * k) as f64 * (1.0 + 1e-12));
            prop_assert!(hminus1_residual(s.grid(), k, &g, &out.psi) <= 1e-8 * norm.sqrt());
        }
    }
}
