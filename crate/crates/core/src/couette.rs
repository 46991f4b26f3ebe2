//! Closed-form Couette (`u = y`) solution on the Fourier side:
//! `ĝ(t, η) = ĝ0(η + kt) · exp(-ν [η²t + ηkt² + k²t³/3])`, times `e^{-νk²t}`
//! for the full Laplacian. Unitary transform `ĝ(η) = (2π)^(-1/2) ∫ g e^{-iηy} dy`.

use std::sync::Arc;

use crate::discretization::{Grid, InitialData, ModeState, Model, ShearField};
use crate::error::{Error, Result};
use crate::functionals::{assemble, BalanceResiduals, FunctionalRecord, Quadratics};
use crate::ledger::CoeffLedger;
use crate::scalar::{Cplx, Real};

/// Spectral amplitudes below this fraction of the peak are treated as zero.
pub const TAIL_TOL: f64 = 1e-14;
/// Required relative accuracy of the discrete Plancherel identity at `t = 0`.
pub const PLANCHEREL_TOL: f64 = 1e-8;

/// Symmetric uniform frequency grid `[-max, max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaGrid<T> {
    pub max: T,
    pub points: usize,
}

impl<T: Real> Default for EtaGrid<T> {
    fn default() -> Self {
        EtaGrid {
            max: T::of(64.0),
            points: 1 << 14,
        }
    }
}

#[derive(Debug, Clone)]
pub enum SpectrumSource<T> {
    /// Closed-form transform of analytic initial data.
    Analytic(InitialData<T>),
    /// Trapezoidal transform of nodal samples.
    Sampled { y: Vec<T>, h: T, g: Vec<Cplx<T>> },
}

#[derive(Debug, Clone)]
pub struct CouetteSpectrum<T> {
    pub k: u32,
    pub model: Model,
    pub eta: Vec<T>,
    pub d_eta: T,
    /// `ĝ0` on [`CouetteSpectrum::eta`].
    pub g0hat: Vec<Cplx<T>>,
    source: SpectrumSource<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactNorms<T> {
    pub l2: T,
    pub hminus1: T,
    pub h1: T,
}

impl<T: Real> CouetteSpectrum<T> {
    pub fn from_initial(k: u32, model: Model, init: &InitialData<T>, eta: EtaGrid<T>) -> Result<Self> {
        let sp = Self::build(k, model, SpectrumSource::Analytic(*init), eta)?;
        let exact = init.norm_sq();
        sp.check_plancherel(exact)?;
        Ok(sp)
    }

    /// Forward transform of lab-frame samples at `t = 0`.
    pub fn from_grid(k: u32, model: Model, grid: &Grid<T>, g: &[Cplx<T>], eta: EtaGrid<T>) -> Result<Self> {
        if g.len() != grid.points() {
            return Err(Error::Invalid("sample count does not match the grid".into()));
        }
        let source = SpectrumSource::Sampled {
            y: grid.y().to_vec(),
            h: grid.h(),
            g: g.to_vec(),
        };
        let sp = Self::build(k, model, source, eta)?;
        sp.check_plancherel(grid.norm_sq(g))?;
        Ok(sp)
    }

    fn build(k: u32, model: Model, source: SpectrumSource<T>, eg: EtaGrid<T>) -> Result<Self> {
        if k == 0 {
            return Err(Error::Invalid("k = 0 carries no mixing and is rejected".into()));
        }
        if eg.points < 3 || !(eg.max > T::zero()) {
            return Err(Error::Invalid("frequency grid needs >= 3 points and max > 0".into()));
        }
        let d_eta = T::of(2.0) * eg.max / T::of((eg.points - 1) as f64);
        let eta: Vec<T> = (0..eg.points).map(|j| -eg.max + d_eta * T::of(j as f64)).collect();
        let mut sp = CouetteSpectrum {
            k,
            model,
            eta,
            d_eta,
            g0hat: Vec::new(),
            source,
        };
        sp.g0hat = sp.eta.iter().map(|&e| sp.initial_at(e)).collect();
        Ok(sp)
    }

    fn check_plancherel(&self, exact: T) -> Result<()> {
        let disc = self.integrate(&self.g0hat, |_| T::one());
        let scale = exact.max(T::min_positive_value());
        let defect = ((disc - exact) / scale).abs();
        if defect > T::of(PLANCHEREL_TOL) {
            return Err(Error::Resolution(format!(
                "frequency grid misses spectral mass: Plancherel defect {defect}"
            )));
        }
        Ok(())
    }

    /// `ĝ0(ξ)` at any frequency.
    pub fn initial_at(&self, xi: T) -> Cplx<T> {
        match &self.source {
            SpectrumSource::Analytic(init) => init.spectrum(xi),
            SpectrumSource::Sampled { y, h, g } => {
                let n = y.len();
                let mut acc = Cplx::new(T::zero(), T::zero());
                for i in 0..n {
                    let w = if i == 0 || i + 1 == n { *h * T::of(0.5) } else { *h };
                    acc = acc + g[i] * Cplx::new(T::zero(), -xi * y[i]).exp() * w;
                }
                acc / T::TAU().sqrt()
            }
        }
    }

    /// `∫0^t |η + kt - kτ|² dτ`, plus `k²t` for the full Laplacian.
    pub fn damping_exponent(&self, eta: T, t: T) -> T {
        let k = T::of(self.k as f64);
        let base = eta * eta * t + eta * k * t * t + k * k * t * t * t / T::of(3.0);
        match self.model {
            Model::Hypoelliptic => base,
            Model::FullLaplacian => base + k * k * t,
        }
    }

    /// Spectrum at time `t` on the frequency grid.
    pub fn exact_mode(&self, nu: T, t: T) -> Result<Vec<Cplx<T>>> {
        if !(t >= T::zero()) || !(nu >= T::zero()) {
            return Err(Error::Invalid(format!("need t >= 0 and nu >= 0, got t = {t}, nu = {nu}")));
        }
        let kt = T::of(self.k as f64) * t;
        let out: Vec<Cplx<T>> = self
            .eta
            .iter()
            .map(|&e| self.initial_at(e + kt) * (-nu * self.damping_exponent(e, t)).exp())
            .collect();
        let peak = out.iter().fold(T::zero(), |m, v| m.max(v.norm()));
        let edge = out[0].norm().max(out[out.len() - 1].norm());
        if peak > T::zero() && edge > T::of(TAIL_TOL) * peak {
            return Err(Error::Resolution(format!(
                "spectrum at t = {t} is not contained in |η| <= {}; widen the frequency grid",
                -self.eta[0]
            )));
        }
        Ok(out)
    }

    fn integrate(&self, spec: &[Cplx<T>], weight: impl Fn(T) -> T) -> T {
        let n = spec.len();
        let mut acc = T::zero();
        for (j, (v, &e)) in spec.iter().zip(&self.eta).enumerate() {
            let w = if j == 0 || j + 1 == n { T::of(0.5) } else { T::one() };
            acc = acc + v.norm_sqr() * weight(e) * w;
        }
        acc * self.d_eta
    }

    pub fn exact_norms(&self, nu: T, t: T) -> Result<ExactNorms<T>> {
        let spec = self.exact_mode(nu, t)?;
        let k2 = T::of(self.k as f64).powi(2);
        Ok(ExactNorms {
            l2: self.integrate(&spec, |_| T::one()).sqrt(),
            hminus1: self.integrate(&spec, |e| T::one() / (k2 + e * e)).sqrt(),
            h1: self.integrate(&spec, |e| k2 + e * e).sqrt(),
        })
    }

    /// Every quadratic of the functionals, exactly (`u' = 1`, `u'' = u''' = 0`).
    pub fn quadratics(&self, nu: T, t: T) -> Result<Quadratics<T>> {
        let spec = self.exact_mode(nu, t)?;
        let k = T::of(self.k as f64);
        let kt = k * t;
        let m = |f: &dyn Fn(T) -> T| self.integrate(&spec, f);
        let g2 = m(&|_| T::one());
        let dy2 = m(&|e| e * e);
        let jg2 = m(&|e| (e + kt) * (e + kt));
        let jdy2 = m(&|e| e * e * (e + kt) * (e + kt));
        Ok(Quadratics {
            g2,
            dy2,
            dyy2: m(&|e| e.powi(4)),
            up_g2: g2,
            up_dy2: dy2,
            cross: k * m(&|e| e),
            cross_xy_yy: k * m(&|e| e.powi(3)),
            cross_upp_yy: T::zero(),
            upup: T::zero(),
            jg2,
            jdy2,
            j_up_g2: jg2,
            j_cross: k * m(&|e| e * (e + kt) * (e + kt)),
            j_up_dy2: jdy2,
        })
    }

    /// Exact diagnostics in the same layout as solver records; residuals are zero.
    pub fn record(&self, t: T, led: &CoeffLedger<T>) -> Result<FunctionalRecord<T>> {
        let q = self.quadratics(led.nu, t)?;
        let hm = self.exact_norms(led.nu, t)?.hminus1;
        Ok(assemble(t, led, q, hm, BalanceResiduals::default()))
    }

    /// Lab-frame values on a grid, by direct inverse synthesis over the
    /// active frequencies.
    pub fn to_grid(&self, nu: T, t: T, grid: &Grid<T>) -> Result<Vec<Cplx<T>>> {
        let spec = self.exact_mode(nu, t)?;
        let peak = spec.iter().fold(T::zero(), |m, v| m.max(v.norm()));
        let cut = T::of(1e-16) * peak;
        let active: Vec<usize> = (0..spec.len()).filter(|&j| spec[j].norm() > cut).collect();
        let max_eta = active
            .iter()
            .fold(T::zero(), |m, &j| m.max(self.eta[j].abs()));
        if max_eta > grid.nyquist() {
            return Err(Error::AliasRisk {
                max_eta: max_eta.to_f64_lossy(),
                nyquist: grid.nyquist().to_f64_lossy(),
            });
        }
        let norm = self.d_eta / T::TAU().sqrt();
        let n = spec.len();
        Ok(grid
            .y()
            .iter()
            .map(|&y| {
                let mut acc = Cplx::new(T::zero(), T::zero());
                for &j in &active {
                    let w = if j == 0 || j + 1 == n { T::of(0.5) } else { T::one() };
                    acc = acc + spec[j] * Cplx::new(T::zero(), self.eta[j] * y).exp() * w;
                }
                acc * norm
            })
            .collect())
    }

    /// [`CouetteSpectrum::to_grid`] wrapped as a mode state at time `t`.
    pub fn to_state(&self, nu: T, t: T, field: &Arc<ShearField<T>>) -> Result<ModeState<T>> {
        let g = self.to_grid(nu, t, field.grid())?;
        ModeState::from_lab(field.clone(), self.k, self.model, t, g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss() -> InitialData<f64> {
        InitialData::gaussian(0.0, 1.0, Cplx::new(1.0, 0.0))
    }

    fn spectrum(model: Model) -> CouetteSpectrum<f64> {
        CouetteSpectrum::from_initial(1, model, &gauss(), EtaGrid::default()).unwrap()
    }

    #[test]
    fn damping_factor_example() {
        let sp = spectrum(Model::FullLaplacian);
        let f = (-0.1 * sp.damping_exponent(0.0, 1.0)).exp();
        assert!((f - 0.875173319042947).abs() < 1e-14);
    }

    #[test]
    fn inviscid_shift_preserves_modulus_and_l2() {
        let sp = spectrum(Model::Hypoelliptic);
        let a = sp.exact_mode(0.0, 7.0).unwrap();
        for (j, v) in a.iter().enumerate() {
            let want = sp.initial_at(sp.eta[j] + 7.0).norm();
            assert!((v.norm() - want).abs() < 1e-15);
        }
        let n0 = sp.exact_norms(0.0, 0.0).unwrap().l2;
        for t in [1.0, 5.0, 20.0] {
            assert!((sp.exact_norms(0.0, t).unwrap().l2 - n0).abs() < 1e-13);
        }
        assert_eq!(sp.exact_mode(0.3, 0.0).unwrap(), sp.g0hat);
    }

    #[test]
    fn inviscid_hminus1_by_brute_force() {
        let sp = spectrum(Model::Hypoelliptic);
        let t = 3.0;
        let m = 400_001;
        let d = 80.0 / (m - 1) as f64;
        let want: f64 = (0..m)
            .map(|i| {
                let eta = -40.0 + d * i as f64;
                gauss().spectrum(eta + t).norm_sqr() / (1.0 + eta * eta) * d
            })
            .sum();
        let got = sp.exact_norms(0.0, t).unwrap().hminus1;
        assert!((got * got - want).abs() < 1e-10 * want);
    }

    #[test]
    fn energy_and_mixing_bounds() {
        for model in [Model::FullLaplacian, Model::Hypoelliptic] {
            let sp = spectrum(model);
            let h1_0 = sp.exact_norms(0.0, 0.0).unwrap().h1;
            for nu in [1e-3, 1e-2] {
                let l0 = sp.exact_norms(nu, 0.0).unwrap().l2;
                for i in 0..=40 {
                    let t = 0.25 * i as f64;
                    let n = sp.exact_norms(nu, t).unwrap();
                    let decay = (-nu * t.powi(3) / 12.0).exp();
                    if model == Model::FullLaplacian {
                        assert!(n.l2 <= decay * l0 * (1.0 + 1e-12));
                    }
                    assert!(n.hminus1 * (1.0 + t * t).sqrt() <= 2.0 * decay * h1_0 * (1.0 + 1e-12));
                }
            }
        }
    }

    #[test]
    fn models_differ_by_exact_factor() {
        let a = spectrum(Model::Hypoelliptic).exact_mode(0.01, 4.0).unwrap();
        let b = spectrum(Model::FullLaplacian).exact_mode(0.01, 4.0).unwrap();
        let f = (-0.01_f64 * 4.0).exp();
        let peak = a.iter().fold(0.0_f64, |m, v| m.max(v.norm()));
        for (x, y) in a.iter().zip(&b) {
            assert!((x * f - y).norm() <= 1e-14 * peak);
        }
    }

    #[test]
    fn grid_round_trip() {
        let grid = Grid::new(12.0, 769).unwrap();
        let sp = spectrum(Model::FullLaplacian);
        let g = sp.to_grid(0.0, 0.0, &grid).unwrap();
        for (v, &y) in g.iter().zip(grid.y()) {
            assert!((v - gauss().eval(y)).norm() < 1e-12);
        }
        let back = CouetteSpectrum::from_grid(1, Model::FullLaplacian, &grid, &g, EtaGrid::default()).unwrap();
        let g2 = back.to_grid(0.0, 0.0, &grid).unwrap();
        for (a, b) in g.iter().zip(&g2) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn sheared_gaussian_is_gaussian_times_phase() {
        let grid = Grid::new(12.0, 1537).unwrap();
        let sp = spectrum(Model::Hypoelliptic);
        let g = sp.to_grid(0.0, 2.0, &grid).unwrap();
        for (v, &y) in g.iter().zip(grid.y()) {
            let want = gauss().eval(y) * Cplx::new(0.0, -2.0 * y).exp();
            assert!((v - want).norm() < 1e-12);
        }
    }

    #[test]
    fn alias_and_window_errors() {
        let sp = spectrum(Model::Hypoelliptic);
        let coarse = Grid::new(12.0, 41).unwrap();
        assert!(matches!(sp.to_grid(0.0, 5.0, &coarse), Err(Error::AliasRisk { .. })));
        assert!(matches!(sp.exact_mode(0.0, 60.0), Err(Error::Resolution(_))));
        let narrow = EtaGrid { max: 2.0, points: 101 };
        assert!(CouetteSpectrum::from_initial(1, Model::Hypoelliptic, &gauss(), narrow).is_err());
    }

    #[test]
    fn exact_quadratics_match_norms() {
        let sp = spectrum(Model::FullLaplacian);
        let q = sp.quadratics(0.01, 3.0).unwrap();
        let n = sp.exact_norms(0.01, 3.0).unwrap();
        assert!((q.g2.sqrt() - n.l2).abs() < 1e-14);
        assert!(((q.g2 + q.dy2).sqrt() - n.h1).abs() < 1e-13);
        // ‖Jg‖² = ‖∂y g‖² + 2kt X/k + (kt)²‖g‖² with X = k∫η|ĝ|².
        let want = q.dy2 + 2.0 * 3.0 * q.cross + 9.0 * q.g2;
        assert!((q.jg2 - want).abs() < 1e-12 * q.jg2);
    }
}
