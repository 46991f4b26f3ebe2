//! Inequality monitors: pure folds over the records of one trajectory.
//! A monitor never aborts when the hypotheses behind an estimate are unmet;
//! it reports the measured margin together with the regime.

use serde::Serialize;

use super::Trajectory;
use crate::error::{Error, Result};
use crate::functionals::{lemma_gap_of, phi_ode_lhs};
use crate::ledger::{check_nu_restriction, CoeffLedger, Regime};
use crate::scalar::Real;

/// Relative tolerance of the functional monitors, times the initial value.
pub const FUNCTIONAL_TOL: f64 = 1e-6;
/// Tolerance of the lower bound, times `‖g‖ + ‖Jg‖`.
pub const LEMMA_TOL: f64 = 1e-8;
/// Relative tolerance of the Gronwall bound.
pub const GRONWALL_TOL: f64 = 1e-8;
/// Relative tolerance of the final energy and mixing bounds.
pub const FINAL_BOUND_TOL: f64 = 1e-9;
/// Tolerance of the L² monotonicity check, times `‖g(0)‖`.
pub const L2_DECAY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MonitorKind {
    /// Differential inequality for `Φ`, via the balance identities.
    PhiOde,
    /// `e^{2ε0 ν^{1/3} k^{2/3} t} (Φ + δ0 𝒥)` non-increasing.
    Lyapunov,
    /// Weighted energy and Ḣ⁻¹ bounds with the constants `C0`, `ε0`.
    FinalBound,
    /// `k t ‖g‖_{Ḣ⁻¹} <= 2U²(‖g‖ + ‖Jg‖)`.
    Lemma,
    /// `‖u'g‖² + δ0‖u'Jg‖² <= e^{7U²νt} (same at t = 0)`.
    Gronwall,
    /// `‖g‖` non-increasing.
    L2Decay,
}

impl MonitorKind {
    pub const ALL: [MonitorKind; 6] = [
        MonitorKind::PhiOde,
        MonitorKind::Lyapunov,
        MonitorKind::FinalBound,
        MonitorKind::Lemma,
        MonitorKind::Gronwall,
        MonitorKind::L2Decay,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            MonitorKind::PhiOde => "phi_ode",
            MonitorKind::Lyapunov => "lyapunov",
            MonitorKind::FinalBound => "final_bound",
            MonitorKind::Lemma => "lemma",
            MonitorKind::Gronwall => "gronwall",
            MonitorKind::L2Decay => "l2_decay",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|m| m.name() == name)
            .ok_or_else(|| Error::Invalid(format!("unknown monitor `{name}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonitorReport {
    pub name: String,
    pub trajectory_id: String,
    pub samples_checked: usize,
    /// Signed; the check passes when this is `>= -tol`.
    pub worst_margin: f64,
    /// Sample time of the worst margin.
    pub worst_t: f64,
    pub tol: f64,
    pub pass: bool,
    pub regime: Regime,
    /// Set when a hypothesis of the estimate is unmet; the verdict is then informational.
    pub advisory: Option<String>,
    /// Smallest ratio bound/value over the samples, for bound-type monitors.
    pub slack: Option<f64>,
}

struct Fold {
    worst: f64,
    worst_t: f64,
    n: usize,
}

impl Fold {
    fn new() -> Self {
        Fold {
            worst: f64::INFINITY,
            worst_t: 0.0,
            n: 0,
        }
    }

    fn push(&mut self, t: f64, margin: f64) {
        self.n += 1;
        if margin < self.worst || margin.is_nan() {
            self.worst = margin;
            self.worst_t = t;
        }
    }

    fn finish(
        self,
        kind: MonitorKind,
        traj_id: &str,
        tol: f64,
        regime: Regime,
        advisory: Option<String>,
        slack: Option<f64>,
    ) -> MonitorReport {
        // `+ 0.0` folds a negative zero into zero.
        let worst = if self.n == 0 { 0.0 } else { self.worst + 0.0 };
        MonitorReport {
            name: kind.name().into(),
            trajectory_id: traj_id.into(),
            samples_checked: self.n,
            worst_margin: worst,
            worst_t: self.worst_t,
            tol,
            pass: worst >= -tol,
            regime,
            advisory,
            slack,
        }
    }
}

fn ensure_matching<T: Real>(traj: &Trajectory<T>, led: &CoeffLedger<T>) -> Result<()> {
    if traj.k != led.k || traj.nu != led.nu {
        return Err(Error::Invalid(format!(
            "trajectory {} does not match the ledger (k = {}, nu = {})",
            traj.id, led.k, led.nu
        )));
    }
    if traj.records.is_empty() {
        return Err(Error::Invalid(format!("trajectory {} has no samples", traj.id)));
    }
    Ok(())
}

pub fn monitor_phi_ode<T: Real>(traj: &Trajectory<T>, led: &CoeffLedger<T>) -> Result<MonitorReport> {
    ensure_matching(traj, led)?;
    let tol = FUNCTIONAL_TOL * traj.records[0].phi.to_f64_lossy();
    let ratio = (led.nu / T::of(led.k as f64)).to_f64_lossy();
    let advisory = (ratio > 1.0).then(|| format!("restriction nu/k <= 1 unmet (nu/k = {ratio})"));
    let mut f = Fold::new();
    for r in &traj.records {
        let lhs = phi_ode_lhs(&r.quad, led, traj.model).to_f64_lossy();
        f.push(r.t.to_f64_lossy(), -lhs);
    }
    Ok(f.finish(MonitorKind::PhiOde, &traj.id, tol, led.regime(), advisory, None))
}

pub fn monitor_lyapunov<T: Real>(traj: &Trajectory<T>, led: &CoeffLedger<T>) -> Result<MonitorReport> {
    ensure_matching(traj, led)?;
    let rate = led.decay_rate().to_f64_lossy();
    let tol = FUNCTIONAL_TOL * traj.records[0].lyap.to_f64_lossy();
    let regime = check_nu_restriction(led, led.nu, led.k);
    let advisory = (regime != Regime::Both)
        .then(|| "nu/k exceeds nu0: the combined inequality is outside its proven range".to_string());
    let mut f = Fold::new();
    let weighted = |i: usize| {
        let r = &traj.records[i];
        (rate * r.t.to_f64_lossy()).exp() * r.lyap.to_f64_lossy()
    };
    for i in 1..traj.records.len() {
        f.push(traj.records[i].t.to_f64_lossy(), weighted(i - 1) - weighted(i));
    }
    Ok(f.finish(MonitorKind::Lyapunov, &traj.id, tol, regime, advisory, None))
}

pub fn monitor_final_bound<T: Real>(traj: &Trajectory<T>, led: &CoeffLedger<T>) -> Result<MonitorReport> {
    ensure_matching(traj, led)?;
    let r0 = &traj.records[0];
    let w0 = r0.weighted.to_f64_lossy();
    let jw0 = r0.j_weighted.to_f64_lossy();
    let c0 = led.c0.to_f64_lossy();
    let c0_sq = led.c0_sq.to_f64_lossy();
    let rate = led.decay_rate().to_f64_lossy();
    let k = led.k as f64;
    let mut f = Fold::new();
    let mut slack = f64::INFINITY;
    for r in &traj.records {
        let t = r.t.to_f64_lossy();
        let energy = r.weighted.to_f64_lossy().powi(2) + r.j_weighted.to_f64_lossy().powi(2);
        let energy_bound = c0_sq * (-rate * t).exp() * (w0 * w0 + jw0 * jw0);
        let mix = r.hminus1.to_f64_lossy();
        let mix_bound = c0 * (-0.5 * rate * t).exp() / (1.0 + (k * t).powi(2)).sqrt() * (w0 + jw0);
        let mut margin = f64::INFINITY;
        for (v, b) in [(energy, energy_bound), (mix, mix_bound)] {
            margin = margin.min(1.0 - v / b);
            if v > 0.0 {
                slack = slack.min(b / v);
            }
        }
        f.push(t, margin);
    }
    Ok(f.finish(
        MonitorKind::FinalBound,
        &traj.id,
        FINAL_BOUND_TOL,
        led.regime(),
        None,
        Some(slack),
    ))
}

pub fn monitor_lemma<T: Real>(traj: &Trajectory<T>, led: &CoeffLedger<T>) -> Result<MonitorReport> {
    ensure_matching(traj, led)?;
    let mut f = Fold::new();
    for r in &traj.records {
        let scale = (r.l2 + r.j_l2).to_f64_lossy();
        let gap = lemma_gap_of(r, traj.k, led.frak_u).to_f64_lossy();
        f.push(r.t.to_f64_lossy(), if scale > 0.0 { gap / scale } else { gap });
    }
    Ok(f.finish(MonitorKind::Lemma, &traj.id, LEMMA_TOL, led.regime(), None, None))
}

pub fn monitor_gronwall<T: Real>(traj: &Trajectory<T>, led: &CoeffLedger<T>) -> Result<MonitorReport> {
    ensure_matching(traj, led)?;
    let value = |i: usize| {
        let q = &traj.records[i].quad;
        (q.up_g2 + led.delta0 * q.j_up_g2).to_f64_lossy()
    };
    let v0 = value(0);
    let growth = 7.0 * led.frak_u.to_f64_lossy().powi(2) * led.nu.to_f64_lossy();
    let mut f = Fold::new();
    let mut slack = f64::INFINITY;
    for i in 0..traj.records.len() {
        let t = traj.records[i].t.to_f64_lossy();
        let bound = (growth * t).exp() * v0;
        let v = value(i);
        f.push(t, 1.0 - v / bound);
        if v > 0.0 {
            slack = slack.min(bound / v);
        }
    }
    Ok(f.finish(MonitorKind::Gronwall, &traj.id, GRONWALL_TOL, led.regime(), None, Some(slack)))
}

pub fn monitor_l2_decay<T: Real>(traj: &Trajectory<T>, led: &CoeffLedger<T>) -> Result<MonitorReport> {
    ensure_matching(traj, led)?;
    let l0 = traj.records[0].l2.to_f64_lossy();
    let mut f = Fold::new();
    for w in traj.records.windows(2) {
        f.push(w[1].t.to_f64_lossy(), (w[0].l2 - w[1].l2).to_f64_lossy() / l0);
    }
    Ok(f.finish(MonitorKind::L2Decay, &traj.id, L2_DECAY_TOL, led.regime(), None, None))
}

/// Process exit status for a set of reports: 1 if any counted report failed.
/// A failing `phi_ode` report flagged advisory (`ν/k > 1`) is not counted.
pub fn exit_status(reports: &[MonitorReport]) -> u8 {
    let counted = |r: &&MonitorReport| !(r.name == MonitorKind::PhiOde.name() && r.advisory.is_some());
    u8::from(reports.iter().filter(counted).any(|r| !r.pass))
}

pub fn run_monitor<T: Real>(
    kind: MonitorKind,
    traj: &Trajectory<T>,
    led: &CoeffLedger<T>,
) -> Result<MonitorReport> {
    match kind {
        MonitorKind::PhiOde => monitor_phi_ode(traj, led),
        MonitorKind::Lyapunov => monitor_lyapunov(traj, led),
        MonitorKind::FinalBound => monitor_final_bound(traj, led),
        MonitorKind::Lemma => monitor_lemma(traj, led),
        MonitorKind::Gronwall => monitor_gronwall(traj, led),
        MonitorKind::L2Decay => monitor_l2_decay(traj, led),
    }
}
