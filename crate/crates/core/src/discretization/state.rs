//! Per-mode state, initial data and the shear sampled on the grid.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::Grid;
use crate::error::{Error, Result};
use crate::scalar::{Cplx, Real};
use crate::shear::Shear;

/// Half-width of the effective support of initial data, in units of `σ`.
pub const SUPPORT_WIDTHS: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    /// `∂t g = -iku g + ν ∂yy g`
    Hypoelliptic,
    /// `∂t g = -iku g + ν (∂yy - k²) g`
    FullLaplacian,
}

impl Model {
    pub fn name(&self) -> &'static str {
        match self {
            Model::Hypoelliptic => "hypoelliptic",
            Model::FullLaplacian => "full_laplacian",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialKind {
    /// `A exp(-(y-y0)²/(2σ²))`
    GaussianBump,
    /// `A ((y-y0)/σ) exp(-(y-y0)²/(2σ²))`
    HermiteBump,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct InitialData<T> {
    pub kind: InitialKind,
    pub center: T,
    pub width: T,
    /// `[re, im]`
    pub amplitude: [T; 2],
}

impl<T: Real> InitialData<T> {
    pub fn gaussian(center: T, width: T, amplitude: Cplx<T>) -> Self {
        InitialData {
            kind: InitialKind::GaussianBump,
            center,
            width,
            amplitude: [amplitude.re, amplitude.im],
        }
    }

    pub fn hermite(center: T, width: T, amplitude: Cplx<T>) -> Self {
        InitialData {
            kind: InitialKind::HermiteBump,
            ..Self::gaussian(center, width, amplitude)
        }
    }

    pub fn amplitude(&self) -> Cplx<T> {
        Cplx::new(self.amplitude[0], self.amplitude[1])
    }

    pub fn validate(&self, grid: &Grid<T>) -> Result<()> {
        if !(self.width > T::zero()) || !self.width.is_finite() {
            return Err(Error::Invalid(format!(
                "initial width must be positive, got {}",
                self.width
            )));
        }
        let reach = T::of(SUPPORT_WIDTHS) * self.width;
        let l = grid.half_width();
        if self.center - reach < -l || self.center + reach > l {
            return Err(Error::Invalid(format!(
                "initial support [{}, {}] leaves the domain [-{l}, {l}]",
                self.center - reach,
                self.center + reach
            )));
        }
        Ok(())
    }

    pub fn eval(&self, y: T) -> Cplx<T> {
        let x = (y - self.center) / self.width;
        let env = (-x * x * T::of(0.5)).exp();
        let shape = match self.kind {
            InitialKind::GaussianBump => env,
            InitialKind::HermiteBump => x * env,
        };
        self.amplitude() * shape
    }

    /// `∂y` of [`InitialData::eval`].
    pub fn eval_dy(&self, y: T) -> Cplx<T> {
        let x = (y - self.center) / self.width;
        let env = (-x * x * T::of(0.5)).exp();
        let shape = match self.kind {
            InitialKind::GaussianBump => -x * env,
            InitialKind::HermiteBump => (T::one() - x * x) * env,
        };
        self.amplitude() * (shape / self.width)
    }

    /// Exact `∫ |g0|² dy` on the line.
    pub fn norm_sq(&self) -> T {
        let base = self.amplitude().norm_sqr() * self.width * T::PI().sqrt();
        match self.kind {
            InitialKind::GaussianBump => base,
            InitialKind::HermiteBump => base * T::of(0.5),
        }
    }

    /// Unitary Fourier transform `(2π)^(-1/2) ∫ g0(y) e^{-iηy} dy`.
    pub fn spectrum(&self, eta: T) -> Cplx<T> {
        let s = self.width;
        let env = (-s * s * eta * eta * T::of(0.5)).exp();
        let shift = Cplx::new(T::zero(), -eta * self.center).exp();
        let shape = match self.kind {
            InitialKind::GaussianBump => Cplx::new(s * env, T::zero()),
            InitialKind::HermiteBump => Cplx::new(T::zero(), -s * s * eta * env),
        };
        self.amplitude() * shape * shift
    }
}

/// A shear profile sampled, with its first three derivatives, on a grid.
#[derive(Debug, Clone)]
pub struct ShearField<T> {
    grid: Grid<T>,
    profile: Shear<T>,
    pub u: Vec<T>,
    pub u1: Vec<T>,
    pub u2: Vec<T>,
    pub u3: Vec<T>,
}

impl<T: Real> ShearField<T> {
    /// Monotonicity is not checked here; see [`crate::shear::certify_hypothesis`].
    pub fn new(grid: Grid<T>, profile: Shear<T>) -> Arc<Self> {
        let jets: Vec<_> = grid.y().iter().map(|&y| profile.jet(y)).collect();
        Arc::new(ShearField {
            u: jets.iter().map(|j| j.u).collect(),
            u1: jets.iter().map(|j| j.u1).collect(),
            u2: jets.iter().map(|j| j.u2).collect(),
            u3: jets.iter().map(|j| j.u3).collect(),
            grid,
            profile,
        })
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn profile(&self) -> &Shear<T> {
        &self.profile
    }

    /// `max |u|` over the nodes.
    pub fn max_abs_u(&self) -> T {
        self.u.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// `max |u'|` over the nodes.
    pub fn max_abs_u1(&self) -> T {
        self.u1.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }
}

/// One x-wavenumber band of the scalar.
///
/// The profile is stored in the frame co-moving with the shear,
/// `w = e^{iktu} g`, so the exact advective phase is carried by `t` alone;
/// [`ModeState::lab`] gives back `g`.
#[derive(Debug, Clone)]
pub struct ModeState<T> {
    k: u32,
    t: T,
    model: Model,
    field: Arc<ShearField<T>>,
    pub(crate) w: Vec<Cplx<T>>,
}

impl<T: Real> ModeState<T> {
    /// State at `t = 0` from nodal values; the two wall values are set to zero.
    pub fn new(field: Arc<ShearField<T>>, k: u32, model: Model, g0: Vec<Cplx<T>>) -> Result<Self> {
        Self::from_lab(field, k, model, T::zero(), g0)
    }

    pub fn from_initial(
        field: Arc<ShearField<T>>,
        k: u32,
        model: Model,
        init: &InitialData<T>,
    ) -> Result<Self> {
        init.validate(field.grid())?;
        let g0 = field.grid().y().iter().map(|&y| init.eval(y)).collect();
        Self::new(field, k, model, g0)
    }

    /// State at time `t` from lab-frame nodal values.
    pub fn from_lab(
        field: Arc<ShearField<T>>,
        k: u32,
        model: Model,
        t: T,
        mut g: Vec<Cplx<T>>,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::Invalid(
                "k = 0 carries no mixing and is rejected".into(),
            ));
        }
        if !(t >= T::zero()) {
            return Err(Error::Invalid(format!("time must be >= 0, got {t}")));
        }
        let n = field.grid().points();
        if g.len() != n {
            return Err(Error::Invalid(format!(
                "state has {} values for a grid of {n} points",
                g.len()
            )));
        }
        if g.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFinite { t: t.to_f64_lossy() });
        }
        g[0] = Cplx::new(T::zero(), T::zero());
        g[n - 1] = g[0];
        let kt = T::of(k as f64) * t;
        for (v, &u) in g.iter_mut().zip(&field.u) {
            *v = *v * Cplx::new(T::zero(), kt * u).exp();
        }
        Ok(ModeState {
            k,
            t,
            model,
            field,
            w: g,
        })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn t(&self) -> T {
        self.t
    }

    pub(crate) fn set_t(&mut self, t: T) {
        self.t = t;
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn field(&self) -> &Arc<ShearField<T>> {
        &self.field
    }

    pub fn grid(&self) -> &Grid<T> {
        self.field.grid()
    }

    /// Co-moving values `e^{iktu} g`.
    pub fn comoving(&self) -> &[Cplx<T>] {
        &self.w
    }

    /// Lab-frame values of the mode profile `g`.
    pub fn lab(&self) -> Vec<Cplx<T>> {
        let mut g = self.w.clone();
        let kt = T::of(self.k as f64) * self.t;
        for (v, &u) in g.iter_mut().zip(&self.field.u) {
            *v = *v * Cplx::new(T::zero(), -kt * u).exp();
        }
        g
    }

    /// Fourth-order `∂y g`, from the lab-frame values.
    pub fn d1(&self) -> Vec<Cplx<T>> {
        self.grid().d1(&self.lab())
    }

    /// Fourth-order `∂yy g`, from the lab-frame values.
    pub fn d2(&self) -> Vec<Cplx<T>> {
        self.grid().d2(&self.lab())
    }

    /// Largest `|g|` on the two outermost nodes at either end, relative to `max |g|`.
    pub fn guard_ratio(&self) -> T {
        let n = self.w.len();
        let peak = self.w.iter().fold(T::zero(), |m, v| m.max(v.norm()));
        if peak == T::zero() {
            return T::zero();
        }
        let edge = [0, 1, n - 2, n - 1]
            .iter()
            .fold(T::zero(), |m, &i| m.max(self.w[i].norm()));
        edge / peak
    }

    pub fn check_guard(&self, tol: T) -> Result<()> {
        let ratio = self.guard_ratio();
        if ratio < tol {
            Ok(())
        } else {
            Err(Error::BoundaryBreach {
                t: self.t.to_f64_lossy(),
                ratio: ratio.to_f64_lossy(),
            })
        }
    }

    pub fn is_finite(&self) -> bool {
        self.w.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }
}
