//! Least-squares rate fits in log coordinates.

use serde::Serialize;

use super::Trajectory;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Fewest points a time-series fit accepts.
pub const MIN_FIT_POINTS: usize = 10;
/// Largest `h(t2)/h(t1)` still counted as decay.
pub const MAX_DECAY_RATIO: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FitKind {
    /// `v ≈ C e^{exponent · x}`
    Exponential,
    /// `v ≈ C x^{exponent}`
    PowerLaw,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFit {
    pub kind: FitKind,
    /// Range of the abscissa actually fitted.
    pub window: [f64; 2],
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n_points: usize,
}

/// Ordinary least squares `y ≈ a + b x`; returns `(b, a, r²)`.
pub fn ols(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let r2 = if syy > 0.0 { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) } else { 1.0 };
    (b, a, r2)
}

fn fit(kind: FitKind, x: &[f64], v: &[f64], min_points: usize) -> Result<RateFit> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(v)
        .filter(|(a, b)| a.is_finite() && **b > 0.0 && b.is_finite() && (kind == FitKind::Exponential || **a > 0.0))
        .map(|(&a, &b)| (a, b))
        .collect();
    if pts.len() < min_points {
        return Err(Error::InsufficientPoints {
            needed: min_points,
            found: pts.len(),
        });
    }
    let xs: Vec<f64> = pts
        .iter()
        .map(|p| if kind == FitKind::PowerLaw { p.0.ln() } else { p.0 })
        .collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let (b, a, r2) = ols(&xs, &ys);
    let lo = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    Ok(RateFit {
        kind,
        window: [lo, hi],
        exponent: b,
        intercept: a,
        r_squared: r2,
        n_points: pts.len(),
    })
}

/// `ln v` against `ln x`; needs at least `min_points` positive samples.
pub fn fit_power_law(x: &[f64], v: &[f64], min_points: usize) -> Result<RateFit> {
    fit(FitKind::PowerLaw, x, v, min_points)
}

/// `ln v` against `x`.
pub fn fit_exponential(x: &[f64], v: &[f64], min_points: usize) -> Result<RateFit> {
    fit(FitKind::Exponential, x, v, min_points)
}

/// Indices of strict local maxima of `v`.
pub fn upper_envelope(v: &[f64]) -> Vec<usize> {
    (1..v.len().saturating_sub(1))
        .filter(|&i| v[i] > v[i - 1] && v[i] > v[i + 1])
        .collect()
}

/// Power-law fit of the Ḣ⁻¹ norm of an inviscid run over `[t1, t2]`, on its
/// upper envelope when that has enough points and on all samples otherwise.
pub fn fit_mixing_rate<T: Real>(traj: &Trajectory<T>, window: (f64, f64)) -> Result<RateFit> {
    if traj.nu != T::zero() {
        return Err(Error::Invalid(format!(
            "mixing-rate fits need an inviscid run, got nu = {}",
            traj.nu
        )));
    }
    let (t1, t2) = window;
    if !(t1 > 0.0 && t2 > t1) {
        return Err(Error::Invalid(format!("bad fit window [{t1}, {t2}]")));
    }
    let (t, h): (Vec<f64>, Vec<f64>) = traj
        .records
        .iter()
        .map(|r| (r.t.to_f64_lossy(), r.hminus1.to_f64_lossy()))
        .filter(|(t, _)| *t >= t1 - 1e-9 && *t <= t2 + 1e-9)
        .unzip();
    if t.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientPoints {
            needed: MIN_FIT_POINTS,
            found: t.len(),
        });
    }
    let ratio = h[h.len() - 1] / h[0];
    if !(ratio <= MAX_DECAY_RATIO) {
        return Err(Error::InsufficientDecay { ratio });
    }
    let peaks = upper_envelope(&h);
    if peaks.len() >= MIN_FIT_POINTS {
        let tp: Vec<f64> = peaks.iter().map(|&i| t[i]).collect();
        let hp: Vec<f64> = peaks.iter().map(|&i| h[i]).collect();
        fit_power_law(&tp, &hp, MIN_FIT_POINTS)
    } else {
        fit_power_law(&t, &h, MIN_FIT_POINTS)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::couette::{CouetteSpectrum, EtaGrid};
    use crate::discretization::{InitialData, Model};
    use crate::experiments::oracle_trajectory;
    use crate::ledger::CoeffLedger;
    use crate::scalar::Cplx;
    use proptest::prelude::*;

    #[test]
    fn exact_power_law_and_exponential() {
        let x: Vec<f64> = (1..=20).map(|i| i as f64).collect();
        let v: Vec<f64> = x.iter().map(|t| 3.0 * t.powf(-0.7)).collect();
        let f = fit_power_law(&x, &v, 10).unwrap();
        assert!((f.exponent + 0.7).abs() < 1e-12 && (f.r_squared - 1.0).abs() < 1e-12);
        let e: Vec<f64> = x.iter().map(|t| 2.0 * (-0.3 * t).exp()).collect();
        let g = fit_exponential(&x, &e, 10).unwrap();
        assert!((g.exponent + 0.3).abs() < 1e-12);
        assert!(matches!(fit_power_law(&x[..5], &v[..5], 10), Err(Error::InsufficientPoints { .. })));
    }

    #[test]
    fn envelope_finds_peaks() {
        let v = [0.0, 1.0, 0.5, 0.7, 0.7, 0.2, 0.9, 0.1];
        assert_eq!(upper_envelope(&v), vec![1, 6]);
    }

    #[test]
    fn oracle_couette_mixing_exponent() {
        let init = InitialData::gaussian(0.0, 1.0, Cplx::new(1.0, 0.0));
        let sp = CouetteSpectrum::from_initial(1, Model::Hypoelliptic, &init, EtaGrid { max: 120.0, points: 1 << 15 }).unwrap();
        let led = CoeffLedger::build(1.0, 0.0, 1).unwrap();
        let times: Vec<f64> = (0..=100).map(|i| i as f64).collect();
        let traj = oracle_trajectory(&sp, &times, &led).unwrap();
        let f = fit_mixing_rate(&traj, (10.0, 100.0)).unwrap();
        assert!((f.exponent + 1.0).abs() <= 0.05, "{f:?}");
        let flat = fit_mixing_rate(&traj, (10.0, 10.5));
        assert!(flat.is_err());
    }

    proptest! {
        #[test]
        fn r_squared_in_unit_interval(v in proptest::collection::vec(0.01f64..10.0, 10..40)) {
            let x: Vec<f64> = (1..=v.len()).map(|i| i as f64).collect();
            let f = fit_power_law(&x, &v, 10).unwrap();
            prop_assert!((0.0..=1.0).contains(&f.r_squared));
        }
    }
}
