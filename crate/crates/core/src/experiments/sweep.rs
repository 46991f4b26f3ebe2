//! Enhanced-diffusion sweep: the time `τ(ν)` at which the weighted norm first
//! drops below a threshold, and the power law of `τ` in `ν`.

use rayon::prelude::*;
use serde::Serialize;

use super::fit::{fit_power_law, RateFit};
use crate::discretization::{Grid, InitialData, ModeState, Model, ShearField};
use crate::error::{Error, Result};
use crate::evolve::{nyquist_points, run, Control, EvolveConfig};
use crate::functionals::weighted_norm;
use crate::ledger::CoeffLedger;
use crate::scalar::Real;
use crate::shear::{certify_hypothesis, Sampling, Shear};

/// Fewest viscosities a sweep fit accepts.
pub const MIN_SWEEP_POINTS: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec<T> {
    pub profile: Shear<T>,
    pub k: u32,
    pub model: Model,
    pub nus: Vec<T>,
    /// `τ` is the first sample with `weighted(t) <= threshold · weighted(0)`.
    pub threshold: T,
    pub init: InitialData<T>,
    pub half_width: T,
    /// Fixed grid size; when absent it follows the Nyquist rule at each horizon.
    pub points: Option<usize>,
    pub dt: T,
    pub sample_every: usize,
    pub nyquist_safety: T,
    /// Horizon is this factor times `(12 ln(1/threshold) / (ν k²))^{1/3}`.
    pub horizon_factor: T,
}

impl<T: Real> SweepSpec<T> {
    pub fn new(profile: Shear<T>, nus: Vec<T>, init: InitialData<T>, half_width: T) -> Self {
        SweepSpec {
            profile,
            k: 1,
            model: Model::FullLaplacian,
            nus,
            threshold: T::of(0.01),
            init,
            half_width,
            points: None,
            dt: T::of(0.02),
            sample_every: 5,
            nyquist_safety: T::of(2.0),
            horizon_factor: T::of(1.05),
        }
    }

    pub fn horizon(&self, nu: T) -> T {
        let k2 = T::of(self.k as f64).powi(2);
        self.horizon_factor
            * (T::of(12.0) * (T::one() / self.threshold).ln() / (nu * k2)).powf(T::of(1.0 / 3.0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub nu: f64,
    pub tau: f64,
    /// `ln(1/threshold) / τ`, the mean decay rate of the weighted norm.
    pub empirical_rate: f64,
    /// `ε0 ν^{1/3} k^{2/3}` from the ledger of the certified profile.
    pub ledger_rate: f64,
    pub horizon: f64,
    pub points: usize,
    pub steps: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub profile: String,
    pub k: u32,
    pub model: Model,
    pub threshold: f64,
    pub points: Vec<SweepPoint>,
    /// Power law of `τ` against `ν`; `window` is the viscosity range.
    pub fit: RateFit,
}

/// Runs one viscosity until the threshold is crossed.
pub fn threshold_time<T: Real>(spec: &SweepSpec<T>, nu: T) -> Result<SweepPoint> {
    let cert = certify_hypothesis(&spec.profile, spec.half_width, Sampling::default())?;
    threshold_time_with(spec, nu, cert.frak_u)
}

fn threshold_time_with<T: Real>(spec: &SweepSpec<T>, nu: T, frak_u: T) -> Result<SweepPoint> {
    if !(nu > T::zero()) {
        return Err(Error::Invalid(format!("sweep viscosities must be positive, got {nu}")));
    }
    let horizon = spec.horizon(nu);
    let max_u1 = {
        let probe = ShearField::new(Grid::new(spec.half_width, 2001)?, spec.profile);
        probe.max_abs_u1()
    };
    let points = spec.points.unwrap_or_else(|| {
        nyquist_points(spec.half_width, spec.k, horizon, max_u1, spec.nyquist_safety)
    });
    let field = ShearField::new(Grid::new(spec.half_width, points)?, spec.profile);
    let mut s = ModeState::from_initial(field, spec.k, spec.model, &spec.init)?;
    let w0 = weighted_norm(&s);
    let target = spec.threshold * w0;
    let mut tau = None;
    let mut sink = |s: &ModeState<T>| {
        if weighted_norm(s) <= target {
            tau = Some(s.t());
            Ok(Control::Stop)
        } else {
            Ok(Control::Continue)
        }
    };
    let cfg = EvolveConfig::new(spec.dt, horizon, spec.sample_every);
    let summary = run(&mut s, &cfg, nu, &mut [&mut sink])?;
    match tau {
        Some(tau) => Ok(SweepPoint {
            nu: nu.to_f64_lossy(),
            tau: tau.to_f64_lossy(),
            empirical_rate: (T::one() / spec.threshold).ln().to_f64_lossy() / tau.to_f64_lossy(),
            ledger_rate: (CoeffLedger::build(frak_u, nu, spec.k)?.decay_rate() / T::of(2.0)).to_f64_lossy(),
            horizon: horizon.to_f64_lossy(),
            points,
            steps: summary.steps,
        }),
        None => Err(Error::ThresholdNotReached {
            nu: nu.to_f64_lossy(),
            horizon: horizon.to_f64_lossy(),
        }),
    }
}

/// One run per viscosity, in parallel; results are kept in input order.
pub fn sweep_enhanced_diffusion<T: Real>(spec: &SweepSpec<T>) -> Result<SweepReport> {
    if !(spec.threshold > T::zero() && spec.threshold < T::one()) {
        return Err(Error::Invalid(format!(
            "threshold must lie in (0, 1), got {}",
            spec.threshold
        )));
    }
    let logs: Vec<f64> = spec.nus.iter().map(|v| v.to_f64_lossy().log10()).collect();
    let lo = logs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let decades = if logs.is_empty() { 0.0 } else { hi - lo };
    if !(decades >= 2.0 - 1e-9) {
        return Err(Error::InsufficientSpan { decades });
    }
    let frak_u = certify_hypothesis(&spec.profile, spec.half_width, Sampling::default())?.frak_u;
    let points = spec
        .nus
        .par_iter()
        .map(|&nu| threshold_time_with(spec, nu, frak_u))
        .collect::<Result<Vec<_>>>()?;
    let nus: Vec<f64> = points.iter().map(|p| p.nu).collect();
    let taus: Vec<f64> = points.iter().map(|p| p.tau).collect();
    let fit = fit_power_law(&nus, &taus, MIN_SWEEP_POINTS)?;
    Ok(SweepReport {
        profile: spec.profile.to_string(),
        k: spec.k,
        model: spec.model,
        threshold: spec.threshold.to_f64_lossy(),
        points,
        fit,
    })
}
