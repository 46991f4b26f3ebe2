//! Norms and hypocoercivity functionals of a mode, and the balance identities
//! their time derivatives obey.
//!
//! Conventions: `∂x ↦ ik`, inner products `⟨a, b⟩ = ∫ a conj(b) dy` by the
//! trapezoidal rule. Quantities are per complex mode; the real band
//! `e^{ikx} g + c.c.` has every squared norm doubled, which cancels in all
//! inequalities and ratios checked here.
//!
//! Derivatives are taken in the co-moving frame `w = e^{iφ} g`, `φ = ktu`:
//! `e^{iφ} ∂y g = w' - iφ' w` and `e^{iφ} J g = w'`, so the shear-generated
//! oscillation is handled exactly and only the smooth `w` is differenced.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::discretization::elliptic::hminus1_lab;
use crate::discretization::{Grid, ModeState, Model, ShearField};
use crate::error::Result;
use crate::evolve::apply_j;
use crate::ledger::CoeffLedger;
use crate::scalar::{Cplx, Real};
use crate::shear::Shear;

/// Every quadratic quantity the functionals and identities are built from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Quadratics<T> {
    /// `‖g‖²`
    pub g2: T,
    /// `‖∂y g‖²`
    pub dy2: T,
    /// `‖∂yy g‖²`
    pub dyy2: T,
    /// `‖u' g‖²`
    pub up_g2: T,
    /// `‖u' ∂y g‖²`
    pub up_dy2: T,
    /// `Re⟨ik u' g, ∂y g⟩`
    pub cross: T,
    /// `Re⟨ik u' ∂y g, ∂yy g⟩`
    pub cross_xy_yy: T,
    /// `Re⟨ik u'' g, ∂yy g⟩`
    pub cross_upp_yy: T,
    /// `k² ∫ (u''² + u' u''') |g|²`
    pub upup: T,
    /// `‖Jg‖²`
    pub jg2: T,
    /// `‖∂y Jg‖²`
    pub jdy2: T,
    /// `‖u' Jg‖²`
    pub j_up_g2: T,
    /// `Re⟨ik u' Jg, ∂y Jg⟩`
    pub j_cross: T,
    /// `‖u' ∂y Jg‖²`
    pub j_up_dy2: T,
}

/// Semi-discrete defects (direct derivative minus identity) of the energy
/// balances for `‖g‖²/2`, `k²‖u'g‖²/2` and their `Jg` counterparts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct BalanceResiduals<T> {
    pub energy: T,
    pub gamma: T,
    pub energy_j: T,
    pub gamma_j: T,
}

impl<T: Real> BalanceResiduals<T> {
    pub const NAMES: [&'static str; 4] = ["res_energy", "res_gamma", "res_energy_j", "res_gamma_j"];

    pub fn values(&self) -> [T; 4] {
        [self.energy, self.gamma, self.energy_j, self.gamma_j]
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct FunctionalRecord<T> {
    pub t: T,
    pub l2: T,
    /// `√(‖g‖² + ‖u'g‖²)`
    pub weighted: T,
    pub hminus1: T,
    /// `√(k²‖g‖² + ‖∂y g‖²)`
    pub h1: T,
    pub j_l2: T,
    pub j_weighted: T,
    pub phi: T,
    pub jj: T,
    /// `Φ + δ0 𝒥`
    pub lyap: T,
    /// `hminus1 / l2`
    pub batchelor: T,
    pub residuals: BalanceResiduals<T>,
    #[serde(skip)]
    pub quad: Quadratics<T>,
}

/// Frame derivatives of a state, all multiplied by `e^{iφ}`.
struct Frame<T> {
    /// `e^{iφ} ∂y g`
    a: Vec<Cplx<T>>,
    /// `e^{iφ} ∂yy g`
    b: Vec<Cplx<T>>,
    /// `e^{iφ} J g`
    jw: Vec<Cplx<T>>,
    /// `e^{iφ} ∂y J g`
    jy: Vec<Cplx<T>>,
}

fn frame<T: Real>(s: &ModeState<T>) -> Frame<T> {
    let f = s.field();
    let grid = f.grid();
    let w = s.comoving();
    let d1w = grid.d1(w);
    let d2w = grid.d2(w);
    let kt = T::of(s.k() as f64) * s.t();
    let i = Cplx::new(T::zero(), T::one());
    let n = w.len();
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    let mut jy = Vec::with_capacity(n);
    for j in 0..n {
        let p1 = kt * f.u1[j];
        let p2 = kt * f.u2[j];
        a.push(d1w[j] - i * w[j] * p1);
        b.push(d2w[j] - i * d1w[j] * (T::of(2.0) * p1) - i * w[j] * p2 - w[j] * (p1 * p1));
        jy.push(d2w[j] - i * d1w[j] * p1);
    }
    Frame { a, b, jw: d1w, jy }
}

fn quadratics_from<T: Real>(s: &ModeState<T>, fr: &Frame<T>) -> Quadratics<T> {
    let f = s.field();
    let grid = f.grid();
    let w = s.comoving();
    let k = T::of(s.k() as f64);
    let ik = Cplx::new(T::zero(), k);
    let times = |c: &[T], v: &[Cplx<T>]| -> Vec<Cplx<T>> {
        v.iter().zip(c).map(|(x, &y)| x * y).collect()
    };
    let up_w = times(&f.u1, w);
    let up_a = times(&f.u1, &fr.a);
    let upp_w = times(&f.u2, w);
    let up_jw = times(&f.u1, &fr.jw);
    let curv: Vec<T> = (0..w.len())
        .map(|j| f.u2[j] * f.u2[j] + f.u1[j] * f.u3[j])
        .collect();
    Quadratics {
        g2: grid.norm_sq(w),
        dy2: grid.norm_sq(&fr.a),
        dyy2: grid.norm_sq(&fr.b),
        up_g2: grid.norm_sq(&up_w),
        up_dy2: grid.norm_sq(&up_a),
        cross: (ik * grid.inner(&up_w, &fr.a)).re,
        cross_xy_yy: (ik * grid.inner(&up_a, &fr.b)).re,
        cross_upp_yy: (ik * grid.inner(&upp_w, &fr.b)).re,
        upup: k * k * grid.inner_with(&curv, w, w).re,
        jg2: grid.norm_sq(&fr.jw),
        jdy2: grid.norm_sq(&fr.jy),
        j_up_g2: grid.norm_sq(&up_jw),
        j_cross: (ik * grid.inner(&up_jw, &fr.jy)).re,
        j_up_dy2: grid.norm_sq_scaled(&f.u1, &fr.jy),
    }
}

pub fn quadratics<T: Real>(s: &ModeState<T>) -> Quadratics<T> {
    quadratics_from(s, &frame(s))
}

/// `‖g‖_{u'} = √(‖g‖² + ‖u'g‖²)`
pub fn weighted_norm<T: Real>(s: &ModeState<T>) -> T {
    let grid = s.grid();
    (grid.norm_sq(s.comoving()) + grid.norm_sq_scaled(&s.field().u1, s.comoving())).sqrt()
}

/// `Φ = ½[‖g‖² + α‖∂y g‖² + 2β Re⟨iku'g, ∂y g⟩ + γk²‖u'g‖²]`
pub fn phi_of<T: Real>(q: &Quadratics<T>, led: &CoeffLedger<T>) -> T {
    let k2 = T::of(led.k as f64).powi(2);
    T::of(0.5) * (q.g2 + led.alpha * q.dy2 + T::of(2.0) * led.beta * q.cross + led.gamma * k2 * q.up_g2)
}

/// `Φ` with `g` replaced by `Jg`.
pub fn jfunc_of<T: Real>(q: &Quadratics<T>, led: &CoeffLedger<T>) -> T {
    let k2 = T::of(led.k as f64).powi(2);
    T::of(0.5)
        * (q.jg2 + led.alpha * q.jdy2 + T::of(2.0) * led.beta * q.j_cross + led.gamma * k2 * q.j_up_g2)
}

pub fn phi<T: Real>(s: &ModeState<T>, led: &CoeffLedger<T>) -> T {
    phi_of(&quadratics(s), led)
}

pub fn jfunc<T: Real>(s: &ModeState<T>, led: &CoeffLedger<T>) -> T {
    jfunc_of(&quadratics(s), led)
}

/// `dΦ/dt` from the balance identities, with `ν` taken from the ledger.
pub fn dphi_dt<T: Real>(q: &Quadratics<T>, led: &CoeffLedger<T>, model: Model) -> T {
    let nu = led.nu;
    let k2 = T::of(led.k as f64).powi(2);
    let two = T::of(2.0);
    let base = -nu * q.dy2 - nu * led.alpha * q.dyy2 - led.beta * k2 * q.up_g2
        - nu * led.gamma * k2 * q.up_dy2
        - led.alpha * q.cross
        - two * nu * led.beta * q.cross_xy_yy
        - nu * led.beta * q.cross_upp_yy
        + nu * led.gamma * q.upup;
    match model {
        Model::Hypoelliptic => base,
        Model::FullLaplacian => base - two * nu * k2 * phi_of(q, led),
    }
}

/// Left side of the differential inequality for `Φ`; non-positive when it holds.
pub fn phi_ode_lhs<T: Real>(q: &Quadratics<T>, led: &CoeffLedger<T>, model: Model) -> T {
    let nu = led.nu;
    let k2 = T::of(led.k as f64).powi(2);
    dphi_dt(q, led, model)
        + led.decay_rate() * phi_of(q, led)
        + nu / T::of(4.0) * q.dy2
        + nu * led.alpha / T::of(2.0) * q.dyy2
        + nu * led.gamma / T::of(2.0) * k2 * q.up_dy2
}

#[derive(Debug, Clone, Copy)]
struct Balance<T> {
    direct: T,
    identity: T,
    scale: T,
}

impl<T: Real> Balance<T> {
    fn defect(&self) -> T {
        self.direct - self.identity
    }

    fn relative(&self) -> T {
        let d = self.defect().abs();
        if self.scale > T::zero() {
            d / self.scale
        } else {
            d
        }
    }
}

struct Derivs<T> {
    /// `∂t w` under the semi-discrete equation.
    wdot: Vec<Cplx<T>>,
    d1_wdot: Vec<Cplx<T>>,
}

fn derivs<T: Real>(s: &ModeState<T>, lab: &[Cplx<T>], nu: T) -> Derivs<T> {
    let f = s.field();
    let grid = f.grid();
    let n = lab.len();
    let mut dg = vec![Cplx::new(T::zero(), T::zero()); n];
    grid.apply_dirichlet(lab, &mut dg);
    let kt = T::of(s.k() as f64) * s.t();
    let k2 = T::of(s.k() as f64).powi(2);
    let w = s.comoving();
    let wdot: Vec<Cplx<T>> = (0..n)
        .map(|j| {
            let v = dg[j] * Cplx::new(T::zero(), kt * f.u[j]).exp() * nu;
            match s.model() {
                Model::Hypoelliptic => v,
                Model::FullLaplacian => v - w[j] * (nu * k2),
            }
        })
        .collect();
    let d1_wdot = grid.d1(&wdot);
    Derivs { wdot, d1_wdot }
}

/// The four recorded balances.
fn balances<T: Real>(
    s: &ModeState<T>,
    fr: &Frame<T>,
    q: &Quadratics<T>,
    dv: &Derivs<T>,
    nu: T,
) -> [Balance<T>; 4] {
    let f = s.field();
    let grid = f.grid();
    let w = s.comoving();
    let k = T::of(s.k() as f64);
    let k2 = k * k;
    let kt = k * s.t();
    let ikt = Cplx::new(T::zero(), kt);
    let full = s.model() == Model::FullLaplacian;
    let damp = |x: T| if full { x } else { T::zero() };
    let two = T::of(2.0);
    let n = w.len();

    let up2: Vec<T> = f.u1.iter().map(|&d| d * d).collect();

    let energy = Balance {
        direct: grid.inner(w, &dv.wdot).re,
        identity: -nu * q.dy2 - damp(nu * k2 * q.g2),
        scale: nu * (q.dy2 + k2 * q.g2),
    };

    let gamma = Balance {
        direct: k2 * grid.inner_with(&up2, w, &dv.wdot).re,
        identity: -nu * k2 * q.up_dy2 + nu * q.upup - damp(nu * k2 * k2 * q.up_g2),
        scale: nu * (k2 * q.up_dy2 + q.upup.abs() + k2 * k2 * q.up_g2),
    };

    let u3w: Vec<Cplx<T>> = (0..n).map(|j| w[j] * f.u3[j]).collect();
    let u2w: Vec<Cplx<T>> = (0..n).map(|j| w[j] * f.u2[j]).collect();
    let e0 = (ikt * grid.inner(&u3w, &fr.jw)).re + two * (ikt * grid.inner(&u2w, &fr.jy)).re;
    let energy_j = Balance {
        direct: grid.inner(&fr.jw, &dv.d1_wdot).re,
        identity: -nu * q.jdy2 + nu * e0 - damp(nu * k2 * q.jg2),
        scale: nu * (q.jdy2 + e0.abs() + k2 * q.jg2),
    };

    let c4: Vec<T> = (0..n)
        .map(|j| T::of(4.0) * f.u2[j] * f.u2[j] + f.u1[j] * f.u3[j])
        .collect();
    let u1u2: Vec<T> = (0..n).map(|j| f.u1[j] * f.u2[j]).collect();
    let e3 = k2
        * (grid.inner_with(&c4, &fr.jw, &fr.jw).re
            - grid.inner_with(&c4, &fr.a, &fr.jw).re
            - two * grid.inner_with(&u1u2, &fr.a, &fr.jy).re);
    let gamma_j = Balance {
        direct: k2 * grid.inner_with(&up2, &fr.jw, &dv.d1_wdot).re,
        identity: -nu * k2 * q.j_up_dy2 + nu * e3 - damp(nu * k2 * k2 * q.j_up_g2),
        scale: nu * (k2 * q.j_up_dy2 + e3.abs() + k2 * k2 * q.j_up_g2),
    };
    [energy, gamma, energy_j, gamma_j]
}

/// Balances of `½‖∂y g‖²`, `Re⟨iku'g, ∂y g⟩` and `Φ`, checked only by the self-test.
fn phi_balances<T: Real>(
    s: &ModeState<T>,
    fr: &Frame<T>,
    q: &Quadratics<T>,
    dv: &Derivs<T>,
    led: &CoeffLedger<T>,
) -> [Balance<T>; 3] {
    let f = s.field();
    let grid = f.grid();
    let w = s.comoving();
    let nu = led.nu;
    let k = T::of(s.k() as f64);
    let k2 = k * k;
    let kt = k * s.t();
    let i = Cplx::new(T::zero(), T::one());
    let ik = i * k;
    let n = w.len();
    let two = T::of(2.0);
    let full = s.model() == Model::FullLaplacian;
    let damp = |x: T| if full { x } else { T::zero() };

    let adot: Vec<Cplx<T>> = (0..n)
        .map(|j| dv.d1_wdot[j] - i * dv.wdot[j] * (kt * f.u1[j]) - ik * w[j] * f.u1[j])
        .collect();
    let up_w: Vec<Cplx<T>> = (0..n).map(|j| w[j] * f.u1[j]).collect();
    let up_wdot: Vec<Cplx<T>> = (0..n).map(|j| dv.wdot[j] * f.u1[j]).collect();
    let up2: Vec<T> = f.u1.iter().map(|&d| d * d).collect();

    let alpha = Balance {
        direct: grid.inner(&fr.a, &adot).re,
        identity: -q.cross - nu * q.dyy2 - damp(nu * k2 * q.dy2),
        scale: q.cross.abs() + nu * (q.dyy2 + k2 * q.dy2),
    };
    let cross_direct = (ik * grid.inner(&up_wdot, &fr.a)).re + (ik * grid.inner(&up_w, &adot)).re;
    let cross = Balance {
        direct: cross_direct,
        identity: -k2 * q.up_g2 - two * nu * q.cross_xy_yy - nu * q.cross_upp_yy
            - damp(two * nu * k2 * q.cross),
        scale: k2 * q.up_g2 + nu * (two * q.cross_xy_yy.abs() + q.cross_upp_yy.abs() + k2 * q.cross.abs()),
    };
    let half = T::of(0.5);
    let _ = half;
    let direct = grid.inner(w, &dv.wdot).re
        + led.alpha * grid.inner(&fr.a, &adot).re
        + led.beta * cross_direct
        + led.gamma * k2 * grid.inner_with(&up2, w, &dv.wdot).re;
    let identity = dphi_dt(q, led, s.model());
    let phi = Balance {
        direct,
        identity,
        scale: nu * (q.dy2 + k2 * q.g2) + led.beta * k2 * q.up_g2 + (led.alpha * q.cross).abs(),
    };
    [alpha, cross, phi]
}

/// Every diagnostic of a state in one pass; `ν` and the coefficients come from `led`.
pub fn record<T: Real>(s: &ModeState<T>, led: &CoeffLedger<T>) -> Result<FunctionalRecord<T>> {
    let fr = frame(s);
    let q = quadratics_from(s, &fr);
    let lab = s.lab();
    let h = hminus1_lab(s.grid(), s.k(), &lab)?;
    let residuals = if led.nu > T::zero() {
        let dv = derivs(s, &lab, led.nu);
        let b = balances(s, &fr, &q, &dv, led.nu);
        BalanceResiduals {
            energy: b[0].defect(),
            gamma: b[1].defect(),
            energy_j: b[2].defect(),
            gamma_j: b[3].defect(),
        }
    } else {
        BalanceResiduals::default()
    };
    Ok(assemble(s.t(), led, q, h.norm_sq.sqrt(), residuals))
}

/// Builds a record from quadratics and an Ḣ⁻¹ norm.
pub fn assemble<T: Real>(
    t: T,
    led: &CoeffLedger<T>,
    q: Quadratics<T>,
    hminus1: T,
    residuals: BalanceResiduals<T>,
) -> FunctionalRecord<T> {
    let k2 = T::of(led.k as f64).powi(2);
    let l2 = q.g2.sqrt();
    let phi = phi_of(&q, led);
    let jj = jfunc_of(&q, led);
    FunctionalRecord {
        t,
        l2,
        weighted: (q.g2 + q.up_g2).sqrt(),
        hminus1,
        h1: (k2 * q.g2 + q.dy2).sqrt(),
        j_l2: q.jg2.sqrt(),
        j_weighted: (q.jg2 + q.j_up_g2).sqrt(),
        phi,
        jj,
        lyap: phi + led.delta0 * jj,
        batchelor: if l2 > T::zero() { hminus1 / l2 } else { T::zero() },
        residuals,
        quad: q,
    }
}

/// `2U²(‖g‖ + ‖Jg‖) - k t ‖g‖_{Ḣ⁻¹}`; non-negative when the lower bound holds.
pub fn lemma_gap<T: Real>(s: &ModeState<T>, led: &CoeffLedger<T>) -> Result<T> {
    let grid = s.grid();
    let l2 = grid.norm_sq(s.comoving()).sqrt();
    let jl2 = grid.norm_sq(&apply_j(s)).sqrt();
    let hm = crate::discretization::hminus1_solve(s)?.norm_sq.sqrt();
    Ok(gap_formula(led.frak_u, s.k(), s.t(), l2, jl2, hm))
}

/// [`lemma_gap`] from a stored record.
pub fn lemma_gap_of<T: Real>(r: &FunctionalRecord<T>, k: u32, frak_u: T) -> T {
    gap_formula(frak_u, k, r.t, r.l2, r.j_l2, r.hminus1)
}

fn gap_formula<T: Real>(frak_u: T, k: u32, t: T, l2: T, jl2: T, hm: T) -> T {
    T::of(2.0) * frak_u * frak_u * (l2 + jl2) - T::of(k as f64) * t * hm
}

/// Both sides of the coercivity sandwiches for `Φ` and `𝒥`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sandwich<T> {
    pub phi_lower: T,
    pub phi: T,
    pub phi_upper: T,
    pub j_lower: T,
    pub jj: T,
    pub j_upper: T,
}

impl<T: Real> Sandwich<T> {
    /// Smallest relative slack of the four inequalities (negative when one fails).
    pub fn slack(&self) -> T {
        let rel = |small: T, big: T| (big - small) / big.abs().max(T::min_positive_value());
        rel(self.phi_lower, self.phi)
            .min(rel(self.phi, self.phi_upper))
            .min(rel(self.j_lower, self.jj))
            .min(rel(self.jj, self.j_upper))
    }
}

/// `¼[2‖g‖² + α‖∂y g‖² + γk²‖u'g‖²] <= Φ <= ¼[2‖g‖² + 3α‖∂y g‖² + 3γk²‖u'g‖²]`
/// and the same with `Jg`.
pub fn sandwich<T: Real>(q: &Quadratics<T>, led: &CoeffLedger<T>) -> Sandwich<T> {
    let k2 = T::of(led.k as f64).powi(2);
    let c = T::of;
    let quarter = c(0.25);
    Sandwich {
        phi_lower: quarter * (c(2.0) * q.g2 + led.alpha * q.dy2 + led.gamma * k2 * q.up_g2),
        phi: phi_of(q, led),
        phi_upper: quarter * (c(2.0) * q.g2 + c(3.0) * led.alpha * q.dy2 + c(3.0) * led.gamma * k2 * q.up_g2),
        j_lower: quarter * (c(2.0) * q.jg2 + led.alpha * q.jdy2 + led.gamma * k2 * q.j_up_g2),
        jj: jfunc_of(q, led),
        j_upper: quarter
            * (c(2.0) * q.jg2 + c(3.0) * led.alpha * q.jdy2 + c(3.0) * led.gamma * k2 * q.j_up_g2),
    }
}

/// Outcome of [`self_test`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfTestReport {
    pub states: usize,
    /// Smallest relative sandwich slack seen.
    pub worst_sandwich: f64,
    /// Largest relative balance defect, per balance name.
    pub worst_balance: Vec<(String, f64)>,
    pub balance_tol: f64,
    pub pass: bool,
}

/// Random smooth state: a few modulated Gaussian bumps well inside the domain.
pub fn random_state<T: Real>(
    rng: &mut ChaCha8Rng,
    field: &std::sync::Arc<ShearField<T>>,
    k: u32,
    model: Model,
    t: T,
) -> Result<ModeState<T>> {
    let l = field.grid().half_width().to_f64_lossy();
    let bumps = rng.gen_range(1..=4);
    let params: Vec<(f64, f64, f64, f64, f64)> = (0..bumps)
        .map(|_| {
            let w = rng.gen_range(0.04..0.1) * l;
            (
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-0.2..0.2) * l,
                w,
                rng.gen_range(-1.0..1.0) / w,
            )
        })
        .collect();
    let g = field
        .grid()
        .y()
        .iter()
        .map(|&y| {
            let y = y.to_f64_lossy();
            let v: Cplx<f64> = params
                .iter()
                .map(|&(re, im, c, w, f)| {
                    Cplx::new(re, im)
                        * Cplx::new(0.0, f * y).exp()
                        * (-(y - c).powi(2) / (2.0 * w * w)).exp()
                })
                .sum();
            Cplx::new(T::of(v.re), T::of(v.im))
        })
        .collect();
    ModeState::from_lab(field.clone(), k, model, t, g)
}

/// Checks the coercivity sandwiches and every balance identity (including
/// the sign of the cross term) on `n` seeded random states.
pub fn self_test<T: Real>(seed: u64, n: usize) -> Result<SelfTestReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let profiles: [(Shear<T>, T, usize); 3] = [
        (Shear::Couette, T::of(8.0), 1601),
        (Shear::SinePerturbed { amplitude: T::of(0.5) }, T::of(8.0), 1601),
        (Shear::Exponential, T::of(3.0), 1601),
    ];
    let fields: Vec<_> = profiles
        .iter()
        .map(|(p, l, pts)| Ok(ShearField::new(Grid::new(*l, *pts)?, *p)))
        .collect::<Result<_>>()?;
    let names = ["energy", "gamma", "energy_j", "gamma_j", "alpha", "cross", "phi"];
    let mut worst_bal = [0.0_f64; 7];
    let mut worst_sw = f64::INFINITY;
    let balance_tol = 1e-4;
    for i in 0..n {
        let field = &fields[i % fields.len()];
        let k = rng.gen_range(1..=3);
        let model = if rng.gen_bool(0.5) {
            Model::Hypoelliptic
        } else {
            Model::FullLaplacian
        };
        // Keep the shear-generated wavenumber k t u' well resolved.
        let reach = field.grid().h() * T::of(k as f64) * field.max_abs_u1();
        let t_max = (T::of(0.1) / reach).min(T::of(2.0));
        let t = t_max * T::of(rng.gen_range(0.0..1.0));
        let nu = T::of(10f64.powf(rng.gen_range(-4.0..-1.0)));
        let led = CoeffLedger::build(T::one(), nu, k)?;
        let s = random_state(&mut rng, field, k, model, t)?;
        let fr = frame(&s);
        let q = quadratics_from(&s, &fr);
        let lab = s.lab();
        let dv = derivs(&s, &lab, nu);
        worst_sw = worst_sw.min(sandwich(&q, &led).slack().to_f64_lossy());
        let b = balances(&s, &fr, &q, &dv, nu);
        let p = phi_balances(&s, &fr, &q, &dv, &led);
        for (slot, bal) in worst_bal.iter_mut().zip(b.iter().chain(p.iter())) {
            *slot = slot.max(bal.relative().to_f64_lossy());
        }
    }
    let pass = worst_sw >= -1e-12 && worst_bal.iter().all(|&r| r <= balance_tol);
    Ok(SelfTestReport {
        states: n,
        worst_sandwich: worst_sw,
        worst_balance: names
            .iter()
            .zip(worst_bal)
            .map(|(n, v)| (n.to_string(), v))
            .collect(),
        balance_tol,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::InitialData;

    fn gaussian_state(profile: Shear<f64>, l: f64, n: usize, center: f64, width: f64) -> ModeState<f64> {
        let field = ShearField::new(Grid::new(l, n).unwrap(), profile);
        let init = InitialData::gaussian(center, width, Cplx::new(1.0, 0.0));
        ModeState::from_initial(field, 1, Model::Hypoelliptic, &init).unwrap()
    }

    #[test]
    fn couette_weighted_norm_is_root_two_l2() {
        let s = gaussian_state(Shear::Couette, 8.0, 401, 0.0, 1.0);
        let l2 = s.grid().norm_sq(&s.lab()).sqrt();
        assert!((weighted_norm(&s) - 2f64.sqrt() * l2).abs() < 1e-14);
        let zero = ModeState::new(s.field().clone(), 1, Model::Hypoelliptic, vec![Cplx::new(0.0, 0.0); 401]).unwrap();
        assert_eq!(weighted_norm(&zero), 0.0);
    }

    #[test]
    fn weighted_norm_on_narrow_bump_sees_local_slope() {
        // u' = 1 + 0.5 cos y equals 3/2 at y = 0.
        let s = gaussian_state(Shear::SinePerturbed { amplitude: 0.5 }, 4.0, 4001, 0.0, 0.01);
        let l2 = s.grid().norm_sq(&s.lab()).sqrt();
        let want = (1.0_f64 + 9.0 / 4.0).sqrt() * l2;
        assert!((weighted_norm(&s) - want).abs() < 1e-4 * want);
    }

    #[test]
    fn real_profile_has_no_cross_term() {
        let s = gaussian_state(Shear::SinePerturbed { amplitude: 0.5 }, 10.0, 1001, 0.3, 1.0);
        let q = quadratics(&s);
        assert!(q.cross.abs() < 1e-15);
    }

    #[test]
    fn inviscid_phi_reduces_to_energy_and_gamma() {
        let s = gaussian_state(Shear::Exponential, 3.0, 601, 0.0, 0.25);
        let led = CoeffLedger::build(1.0, 0.0, 1).unwrap();
        let q = quadratics(&s);
        assert_eq!(phi(&s, &led), 0.5 * (q.g2 + led.gamma * q.up_g2));
        assert_eq!(phi_ode_lhs(&q, &led, Model::Hypoelliptic), 0.0);
    }

    #[test]
    fn jfunc_at_time_zero_is_phi_of_derivative() {
        let s = gaussian_state(Shear::SinePerturbed { amplitude: 0.5 }, 8.0, 801, 0.0, 1.0);
        let led = CoeffLedger::build(2.0, 1e-3, 1).unwrap();
        let d = ModeState::new(s.field().clone(), 1, Model::Hypoelliptic, s.d1()).unwrap();
        let a = jfunc(&s, &led);
        let b = phi(&d, &led);
        assert!((a - b).abs() < 1e-6 * b, "{a} vs {b}");
    }

    #[test]
    fn lemma_gap_at_start_is_positive() {
        let s = gaussian_state(Shear::Couette, 8.0, 801, 0.0, 1.0);
        let led = CoeffLedger::build(1.0, 1e-3, 1).unwrap();
        let g = lemma_gap(&s, &led).unwrap();
        let l2 = s.grid().norm_sq(&s.lab()).sqrt();
        let dl2 = s.grid().norm_sq(&s.d1()).sqrt();
        assert!((g - 2.0 * (l2 + dl2)).abs() < 1e-12);
        let r = record(&s, &led).unwrap();
        assert!((lemma_gap_of(&r, 1, 1.0) - g).abs() < 1e-12);
        assert!(r.batchelor <= 1.0);
        assert!(r.weighted >= r.l2);
    }

    #[test]
    fn self_test_passes() {
        let rep = self_test::<f64>(7, 60).unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn flipped_cross_sign_is_caught() {
        // The cross balance pins the sign: with the opposite sign the
        // transport contribution −k²‖u'g‖² no longer matches.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let field = ShearField::new(Grid::new(8.0, 801).unwrap(), Shear::SinePerturbed { amplitude: 0.5 });
        let led = CoeffLedger::build(1.0, 1e-3, 1).unwrap();
        let s = random_state(&mut rng, &field, 1, Model::Hypoelliptic, 0.5).unwrap();
        let fr = frame(&s);
        let mut q = quadratics_from(&s, &fr);
        let dv = derivs(&s, &s.lab(), led.nu);
        assert!(phi_balances(&s, &fr, &q, &dv, &led)[1].relative() < 1e-6);
        q.cross = -q.cross;
        q.up_g2 = -q.up_g2;
        assert!(phi_balances(&s, &fr, &q, &dv, &led)[1].relative() > 1e-2);
    }
}
