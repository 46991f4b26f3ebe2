//! Trajectories and the checks run on them: inequality monitors, decay-rate
//! fits, viscosity sweeps and multi-mode aggregation.

pub mod aggregate;
pub mod fit;
pub mod monitors;
pub mod sweep;

use serde::Serialize;

use crate::couette::CouetteSpectrum;
use crate::discretization::{ModeState, Model};
use crate::error::{Error, Result};
use crate::evolve::{run, Control, EvolveConfig, Sink, TrajectorySummary};
use crate::functionals::{record, FunctionalRecord};
use crate::ledger::CoeffLedger;
use crate::scalar::Real;

pub use aggregate::{aggregate_modes, AggregateRecord};
pub use fit::{fit_exponential, fit_mixing_rate, fit_power_law, FitKind, RateFit};
pub use monitors::{exit_status, run_monitor, MonitorKind, MonitorReport};
pub use sweep::{sweep_enhanced_diffusion, SweepPoint, SweepReport, SweepSpec};

/// Sampled diagnostics of one run.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory<T> {
    pub id: String,
    pub profile: String,
    pub k: u32,
    pub nu: T,
    pub model: Model,
    pub records: Vec<FunctionalRecord<T>>,
}

impl<T: Real> Trajectory<T> {
    pub fn make_id(profile: &str, k: u32, nu: T, model: Model) -> String {
        format!("{profile}_k{k}_nu{nu:e}_{}", model.name())
    }
}

/// Sink that stores one [`FunctionalRecord`] per sample.
pub struct RecordSink<'a, T> {
    led: &'a CoeffLedger<T>,
    pub records: Vec<FunctionalRecord<T>>,
}

impl<'a, T: Real> RecordSink<'a, T> {
    pub fn new(led: &'a CoeffLedger<T>) -> Self {
        RecordSink {
            led,
            records: Vec::new(),
        }
    }
}

impl<T: Real> Sink<T> for RecordSink<'_, T> {
    fn observe(&mut self, s: &ModeState<T>) -> Result<Control> {
        self.records.push(record(s, self.led)?);
        Ok(Control::Continue)
    }
}

fn check_ledger<T: Real>(led: &CoeffLedger<T>, k: u32, nu: T) -> Result<()> {
    if led.k != k || led.nu != nu {
        return Err(Error::Invalid(format!(
            "ledger built for k = {}, nu = {} but the run has k = {k}, nu = {nu}",
            led.k, led.nu
        )));
    }
    Ok(())
}

/// Evolves `s0` with `ν = led.nu`, recording every sample.
pub fn simulate<T: Real>(
    mut s0: ModeState<T>,
    cfg: &EvolveConfig<T>,
    led: &CoeffLedger<T>,
) -> Result<(Trajectory<T>, TrajectorySummary<T>)> {
    check_ledger(led, s0.k(), led.nu)?;
    let mut sink = RecordSink::new(led);
    let summary = run(&mut s0, cfg, led.nu, &mut [&mut sink])?;
    let profile = s0.field().profile().name().to_string();
    Ok((
        Trajectory {
            id: Trajectory::make_id(&profile, s0.k(), led.nu, s0.model()),
            profile,
            k: s0.k(),
            nu: led.nu,
            model: s0.model(),
            records: sink.records,
        },
        summary,
    ))
}

/// Exact Couette diagnostics at the given times.
pub fn oracle_trajectory<T: Real>(
    sp: &CouetteSpectrum<T>,
    times: &[T],
    led: &CoeffLedger<T>,
) -> Result<Trajectory<T>> {
    check_ledger(led, sp.k, led.nu)?;
    let records = times
        .iter()
        .map(|&t| sp.record(t, led))
        .collect::<Result<Vec<_>>>()?;
    Ok(Trajectory {
        id: format!("{}_oracle", Trajectory::make_id("couette", sp.k, led.nu, sp.model)),
        profile: "couette".into(),
        k: sp.k,
        nu: led.nu,
        model: sp.model,
        records,
    })
}

/// Sample times of a run: step 0, every `sample_every` steps, and the last step.
pub fn sample_times<T: Real>(cfg: &EvolveConfig<T>, t0: T) -> Vec<T> {
    let total = cfg.total_steps();
    let every = cfg.sample_every as u64;
    (0..=total)
        .filter(|&n| n % every == 0 || n == total)
        .map(|n| t0 + cfg.dt * T::of(n as f64))
        .collect()
}
