//! Numerical laboratory for passive scalars advected by monotone shear flows
//! `(u(y), 0)`: hypocoercive Lyapunov functionals, enhanced diffusion on the
//! `ν^{-1/3}` time-scale and inviscid mixing at rate `1/t`.
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix the scalar for the common `f64` case.

pub mod couette;
pub mod discretization;
pub mod error;
pub mod evolve;
pub mod experiments;
pub mod functionals;
pub mod io;
pub mod ledger;
pub mod scalar;
pub mod shear;

pub use discretization::{Grid, InitialData, InitialKind, ModeState, Model, ShearField};
pub use error::{Error, Result};
pub use ledger::{CoeffLedger, Regime};
pub use scalar::{Cplx, Real};
pub use shear::Shear;

pub type Grid64 = Grid<f64>;
pub type ModeState64 = ModeState<f64>;
pub type ShearField64 = ShearField<f64>;
pub type Shear64 = Shear<f64>;
pub type CoeffLedger64 = CoeffLedger<f64>;
pub type InitialData64 = InitialData<f64>;
pub type Grid32 = Grid<f32>;
pub type ModeState32 = ModeState<f32>;
