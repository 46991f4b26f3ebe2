//! Strang-split time stepping of one mode: exact pointwise advective phase,
//! Crank–Nicolson diffusion on the Dirichlet pentadiagonal operator.

use std::sync::Arc;

use crate::discretization::{ModeState, Model, PentaFactor, ShearField, SymPentadiagonal};
use crate::error::{Error, Result};
use crate::scalar::{Cplx, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveConfig<T> {
    pub dt: T,
    /// Final time `T`.
    pub horizon: T,
    /// Sinks see the state every `sample_every` steps.
    pub sample_every: usize,
    /// Upper bound on `dt · k · max|u|`.
    pub phase_cap: T,
    /// Upper bound on the edge-to-peak ratio of `|g|`.
    pub guard_tol: T,
}

impl<T: Real> EvolveConfig<T> {
    pub fn new(dt: T, horizon: T, sample_every: usize) -> Self {
        EvolveConfig {
            dt,
            horizon,
            sample_every,
            phase_cap: T::FRAC_PI_4(),
            guard_tol: T::of(1e-8),
        }
    }

    /// Number of steps to reach the horizon.
    pub fn total_steps(&self) -> u64 {
        let r = (self.horizon / self.dt).to_f64_lossy();
        (r - 1e-9).ceil().max(0.0) as u64
    }

    /// Checks the step and grid against the phase cap and, for `ν = 0`,
    /// against `h · k · T · max|u'| <= π/2`.
    pub fn validate(&self, field: &ShearField<T>, k: u32, nu: T) -> Result<()> {
        if !(self.dt > T::zero()) || !self.dt.is_finite() {
            return Err(Error::Invalid(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.horizon > T::zero()) || !self.horizon.is_finite() {
            return Err(Error::Invalid(format!(
                "horizon must be positive, got {}",
                self.horizon
            )));
        }
        if self.sample_every == 0 {
            return Err(Error::Invalid("sample_every must be >= 1".into()));
        }
        if !(nu >= T::zero()) || !nu.is_finite() {
            return Err(Error::Invalid(format!("nu must be >= 0, got {nu}")));
        }
        if k == 0 {
            return Err(Error::Invalid("k = 0 carries no mixing and is rejected".into()));
        }
        let kf = T::of(k as f64);
        let phase = self.dt * kf * field.max_abs_u();
        if phase > self.phase_cap {
            return Err(Error::Resolution(format!(
                "dt·k·max|u| = {phase} exceeds the phase cap {}",
                self.phase_cap
            )));
        }
        if nu == T::zero() {
            let reach = field.grid().h() * kf * self.horizon * field.max_abs_u1();
            if reach > T::FRAC_PI_2() {
                return Err(Error::Resolution(format!(
                    "h·k·T·max|u'| = {reach} exceeds π/2; need at least {} points",
                    nyquist_points(
                        field.grid().half_width(),
                        k,
                        self.horizon,
                        field.max_abs_u1(),
                        T::one()
                    )
                )));
            }
        }
        Ok(())
    }
}

/// Smallest `N` with `h · k · T · max|u'| <= π / (2 · safety)` on `[-L, L]`.
pub fn nyquist_points<T: Real>(half_width: T, k: u32, horizon: T, max_u1: T, safety: T) -> usize {
    let h = T::FRAC_PI_2() / (safety * T::of(k as f64) * horizon * max_u1);
    let n = (T::of(2.0) * half_width / h).ceil().to_f64_lossy() as usize + 1;
    n.max(crate::discretization::MIN_POINTS)
}

/// Advances states of one `(field, k, model, ν, dt)` configuration.
#[derive(Debug, Clone)]
pub struct Stepper<T> {
    cfg: EvolveConfig<T>,
    nu: T,
    k: u32,
    model: Model,
    field: Arc<ShearField<T>>,
    lhs: PentaFactor<T>,
    rhs: SymPentadiagonal<T>,
    decay: T,
    t0: T,
    n: u64,
    rot: Vec<Cplx<T>>,
    tmp: Vec<Cplx<T>>,
}

impl<T: Real> Stepper<T> {
    pub fn new(s: &ModeState<T>, cfg: EvolveConfig<T>, nu: T) -> Result<Self> {
        cfg.validate(s.field(), s.k(), nu)?;
        let grid = s.grid();
        let c = nu * cfg.dt * T::of(0.5);
        let d2 = grid.dirichlet_matrix();
        let lhs = d2.affine(T::one(), -c).factor()?;
        let rhs = d2.affine(T::one(), c);
        let decay = match s.model() {
            Model::Hypoelliptic => T::one(),
            Model::FullLaplacian => (-nu * T::of(s.k() as f64).powi(2) * cfg.dt).exp(),
        };
        let n = grid.points();
        Ok(Stepper {
            cfg,
            nu,
            k: s.k(),
            model: s.model(),
            field: s.field().clone(),
            lhs,
            rhs,
            decay,
            t0: s.t(),
            n: 0,
            rot: vec![Cplx::new(T::zero(), T::zero()); n],
            tmp: vec![Cplx::new(T::zero(), T::zero()); n - 2],
        })
    }

    pub fn config(&self) -> &EvolveConfig<T> {
        &self.cfg
    }

    pub fn nu(&self) -> T {
        self.nu
    }

    pub fn steps_taken(&self) -> u64 {
        self.n
    }

    /// Time after the steps taken so far, `t0 + n·dt`.
    pub fn time(&self) -> T {
        self.t0 + self.cfg.dt * T::of(self.n as f64)
    }

    fn check_compatible(&self, s: &ModeState<T>) {
        assert!(
            Arc::ptr_eq(&self.field, s.field()) && self.k == s.k() && self.model == s.model(),
            "state does not belong to this stepper"
        );
    }

    /// `e^{-ik t u}` at every node.
    fn load_rotation(&mut self, t: T) {
        let kt = T::of(self.k as f64) * t;
        for (r, &u) in self.rot.iter_mut().zip(&self.field.u) {
            *r = Cplx::new(T::zero(), -kt * u).exp();
        }
    }

    /// Crank–Nicolson on the interior of `g`, with `extra` added to the right side.
    fn cn(&mut self, g: &mut [Cplx<T>], extra: Option<&[Cplx<T>]>) {
        let n = g.len();
        self.rhs.matvec(&g[1..n - 1], &mut self.tmp);
        if let Some(e) = extra {
            for (t, &x) in self.tmp.iter_mut().zip(&e[1..n - 1]) {
                *t = *t + x;
            }
        }
        self.lhs.solve(&mut self.tmp);
        g[1..n - 1].copy_from_slice(&self.tmp);
        g[0] = Cplx::new(T::zero(), T::zero());
        g[n - 1] = g[0];
    }

    /// One Strang step: phase `dt/2`, diffusion `dt`, phase `dt/2`.
    pub fn step(&mut self, s: &mut ModeState<T>) -> Result<()> {
        self.check_compatible(s);
        if self.nu > T::zero() {
            let t_half = self.t0 + self.cfg.dt * (T::of(self.n as f64) + T::of(0.5));
            self.load_rotation(t_half);
            let mut g = std::mem::take(&mut s.w);
            for (v, r) in g.iter_mut().zip(&self.rot) {
                *v = *v * r;
            }
            self.cn(&mut g, None);
            for (v, r) in g.iter_mut().zip(&self.rot) {
                *v = *v * r.conj() * self.decay;
            }
            s.w = g;
        }
        self.n += 1;
        s.set_t(self.time());
        if !s.is_finite() {
            return Err(Error::NonFinite {
                t: s.t().to_f64_lossy(),
            });
        }
        if self.nu > T::zero() {
            s.check_guard(self.cfg.guard_tol)?;
        }
        Ok(())
    }
}

/// One Strang step with a freshly built [`Stepper`]. Prefer reusing a stepper.
pub fn step<T: Real>(s: &mut ModeState<T>, cfg: &EvolveConfig<T>, nu: T) -> Result<()> {
    let mut st = Stepper::new(s, *cfg, nu)?;
    st.step(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

/// Receives the state at sample times, in time order.
pub trait Sink<T> {
    fn observe(&mut self, s: &ModeState<T>) -> Result<Control>;
}

impl<T, F> Sink<T> for F
where
    F: FnMut(&ModeState<T>) -> Result<Control>,
{
    fn observe(&mut self, s: &ModeState<T>) -> Result<Control> {
        self(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySummary<T> {
    pub steps: u64,
    pub samples: usize,
    pub t_final: T,
    /// A sink asked to stop before the horizon.
    pub stopped_early: bool,
}

/// Advances `s` to the horizon, sampling at step 0, every `sample_every`
/// steps, and at the final step.
pub fn run<T: Real>(
    s: &mut ModeState<T>,
    cfg: &EvolveConfig<T>,
    nu: T,
    sinks: &mut [&mut dyn Sink<T>],
) -> Result<TrajectorySummary<T>> {
    s.check_guard(cfg.guard_tol)?;
    let mut stepper = Stepper::new(s, *cfg, nu)?;
    let total = cfg.total_steps();
    let mut samples = 0;
    let mut notify = |s: &ModeState<T>, samples: &mut usize| -> Result<bool> {
        *samples += 1;
        let mut stop = false;
        for sink in sinks.iter_mut() {
            if sink.observe(s)? == Control::Stop {
                stop = true;
            }
        }
        Ok(stop)
    };
    let mut stopped_early = notify(s, &mut samples)?;
    while !stopped_early && stepper.steps_taken() < total {
        stepper.step(s)?;
        let n = stepper.steps_taken();
        if n % cfg.sample_every as u64 == 0 || n == total {
            stopped_early = notify(s, &mut samples)? && n < total;
        }
    }
    Ok(TrajectorySummary {
        steps: stepper.steps_taken(),
        samples,
        t_final: s.t(),
        stopped_early,
    })
}

/// `J g = ∂y g + i k t u' g`, applied to the current state.
pub fn apply_j<T: Real>(s: &ModeState<T>) -> Vec<Cplx<T>> {
    let mut jg = s.grid().d1(&s.w);
    let kt = T::of(s.k() as f64) * s.t();
    for (v, &u) in jg.iter_mut().zip(&s.field().u) {
        *v = *v * Cplx::new(T::zero(), -kt * u).exp();
    }
    jg
}

/// Cross-check path: evolves `Jg` by its own equation
/// `∂t Jg + iku Jg = ν ∂yy Jg + ν (u'''/u')(Jg - ∂y g) - 2ν ∂y((u''/u')(Jg - ∂y g))`
/// alongside the main state, with the same splitting.
#[derive(Debug, Clone)]
pub struct JDirect<T> {
    stepper: Stepper<T>,
    state: ModeState<T>,
    /// Co-moving `e^{iktu} Jg`.
    v: Vec<Cplx<T>>,
}

impl<T: Real> JDirect<T> {
    /// Starts from `Jg = ∂y g` of the given state (exact at `t = 0`).
    pub fn new(s0: ModeState<T>, cfg: EvolveConfig<T>, nu: T) -> Result<Self> {
        if s0.field().u1.iter().any(|&d| !(d > T::zero())) {
            return Err(Error::Invalid(
                "direct J evolution needs u' > 0 on the grid".into(),
            ));
        }
        let stepper = Stepper::new(&s0, cfg, nu)?;
        let v = s0.grid().d1(&s0.w);
        Ok(JDirect {
            stepper,
            state: s0,
            v,
        })
    }

    pub fn state(&self) -> &ModeState<T> {
        &self.state
    }

    /// Lab-frame `Jg` carried by the direct path.
    pub fn jg(&self) -> Vec<Cplx<T>> {
        let kt = T::of(self.state.k() as f64) * self.state.t();
        self.v
            .iter()
            .zip(&self.state.field().u)
            .map(|(v, &u)| v * Cplx::new(T::zero(), -kt * u).exp())
            .collect()
    }

    fn source(&self, g: &[Cplx<T>], jg: &[Cplx<T>]) -> Vec<Cplx<T>> {
        let f = self.state.field();
        let grid = f.grid();
        let nu = self.stepper.nu;
        let dg = grid.d1(g);
        let x: Vec<Cplx<T>> = jg.iter().zip(&dg).map(|(a, b)| a - b).collect();
        let q: Vec<Cplx<T>> = x
            .iter()
            .enumerate()
            .map(|(i, v)| v * (f.u2[i] / f.u1[i]))
            .collect();
        let dq = grid.d1(&q);
        x.iter()
            .enumerate()
            .map(|(i, v)| (v * (f.u3[i] / f.u1[i]) - dq[i] * T::of(2.0)) * nu)
            .collect()
    }

    pub fn step(&mut self) -> Result<()> {
        let st = &mut self.stepper;
        if st.nu > T::zero() {
            let dt = st.cfg.dt;
            let t_half = st.t0 + dt * (T::of(st.n as f64) + T::of(0.5));
            st.load_rotation(t_half);
            let rot = st.rot.clone();
            let mut g = std::mem::take(&mut self.state.w);
            let mut jb = std::mem::take(&mut self.v);
            for ((a, b), r) in g.iter_mut().zip(jb.iter_mut()).zip(&rot) {
                *a = *a * r;
                *b = *b * r;
            }
            let gb = g.clone();
            self.stepper.cn(&mut g, None);
            let sb = self.source(&gb, &jb);
            let mut jp = jb.clone();
            let push: Vec<Cplx<T>> = sb.iter().map(|x| x * dt).collect();
            self.stepper.cn(&mut jp, Some(&push));
            let sa = self.source(&g, &jp);
            let avg: Vec<Cplx<T>> = sb
                .iter()
                .zip(&sa)
                .map(|(a, b)| (a + b) * (dt * T::of(0.5)))
                .collect();
            let mut ja = jb;
            self.stepper.cn(&mut ja, Some(&avg));
            let decay = self.stepper.decay;
            for ((a, b), r) in g.iter_mut().zip(ja.iter_mut()).zip(&rot) {
                *a = *a * r.conj() * decay;
                *b = *b * r.conj() * decay;
            }
            self.state.w = g;
            self.v = ja;
        }
        self.stepper.n += 1;
        self.state.set_t(self.stepper.time());
        if !self.state.is_finite() || self.v.iter().any(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(Error::NonFinite {
                t: self.state.t().to_f64_lossy(),
            });
        }
        Ok(())
    }
}
