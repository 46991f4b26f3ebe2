//! Explicit hypocoercivity constants as functions of the (H)-constant `U`,
//! the diffusivity `nu` and the wavenumber `k`.
//!
//! ```text
//! alpha0 = 1/(4·3504·U⁶)   beta0 = 4·alpha0²   gamma0 = 128·alpha0³
//! eps0   = beta0/(32·U²)   delta0 = 1/(4·3504·U⁶)
//! nu0    = (beta0/(4·7008·U⁸))^(3/2)           C0² = 20/(delta0·gamma0)
//! alpha  = alpha0·nu^(2/3)/k^(2/3)   beta = beta0·nu^(1/3)/k^(4/3)   gamma = gamma0/k²
//! ```
//! No constant is "improved": these are the values the estimates are proven with.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Relative slack used for the two equality constraints.
const EQUALITY_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintCheck<T> {
    pub name: &'static str,
    /// Left-hand side value.
    pub value: T,
    /// Bound it is compared against.
    pub bound: T,
    /// `"<="`, `">="` or `"=="`.
    pub relation: &'static str,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoeffLedger<T> {
    pub frak_u: T,
    pub nu: T,
    pub k: u32,
    pub alpha0: T,
    pub beta0: T,
    pub gamma0: T,
    pub eps0: T,
    pub delta0: T,
    pub nu0: T,
    pub c0_sq: T,
    pub c0: T,
    pub alpha: T,
    pub beta: T,
    pub gamma: T,
    /// Constants that underflowed to zero/subnormal or overflowed in this scalar type.
    pub underflow: Vec<&'static str>,
    pub constraints: Vec<ConstraintCheck<T>>,
}

/// Regime classification of `nu/k` against the restrictions of the two
/// differential inequalities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `nu/k <= nu0`: both the `Phi` and `J` inequalities are proven.
    Both,
    /// `nu0 < nu/k <= 1`: only the `Phi` inequality is proven.
    PhiOnly,
    /// `nu/k > 1`.
    Unrestricted,
}

impl<T: Real> CoeffLedger<T> {
    /// Evaluates every constant and every constraint of the chain.
    pub fn build(frak_u: T, nu: T, k: u32) -> Result<Self> {
        if !(frak_u >= T::one()) || !frak_u.is_finite() {
            return Err(Error::Invalid(format!("U must be >= 1, got {frak_u}")));
        }
        if !(nu >= T::zero()) || !nu.is_finite() {
            return Err(Error::Invalid(format!("nu must be >= 0, got {nu}")));
        }
        if k == 0 {
            return Err(Error::Invalid("wavenumber k must be >= 1".into()));
        }
        let c = T::of;
        let u2 = frak_u * frak_u;
        let u6 = u2 * u2 * u2;
        let alpha0 = T::one() / (c(4.0 * 3504.0) * u6);
        let beta0 = c(4.0) * alpha0 * alpha0;
        let gamma0 = c(128.0) * alpha0 * alpha0 * alpha0;
        let eps0 = beta0 / (c(32.0) * u2);
        let delta0 = T::one() / (c(4.0 * 3504.0) * u6);
        let nu0 = (beta0 / (c(4.0 * 7008.0) * u6 * u2)).powf(c(1.5));
        let c0_sq = c(20.0) / (delta0 * gamma0);

        let kf = c(k as f64);
        let third = T::one() / c(3.0);
        let alpha = alpha0 * nu.powf(c(2.0) * third) / kf.powf(c(2.0) * third);
        let beta = beta0 * nu.powf(third) / kf.powf(c(4.0) * third);
        let gamma = gamma0 / (kf * kf);

        let underflow = [
            ("alpha0", alpha0),
            ("beta0", beta0),
            ("gamma0", gamma0),
            ("eps0", eps0),
            ("delta0", delta0),
            ("nu0", nu0),
            ("c0_sq", c0_sq),
        ]
        .into_iter()
        .filter(|(_, v)| !v.is_normal())
        .map(|(n, _)| n)
        .collect();

        let mut ledger = CoeffLedger {
            frak_u,
            nu,
            k,
            alpha0,
            beta0,
            gamma0,
            eps0,
            delta0,
            nu0,
            c0_sq,
            c0: c0_sq.sqrt(),
            alpha,
            beta,
            gamma,
            underflow,
            constraints: Vec::new(),
        };
        ledger.constraints = ledger.evaluate_constraints();
        if let Some(bad) = ledger.constraints.iter().find(|c| !c.holds) {
            return Err(Error::ConstraintViolation {
                name: bad.name,
                detail: format!("{} {} {}", bad.value, bad.relation, bad.bound),
            });
        }
        Ok(ledger)
    }

    fn evaluate_constraints(&self) -> Vec<ConstraintCheck<T>> {
        let c = T::of;
        let u2 = self.frak_u * self.frak_u;
        // Ratios are formed from the per-(nu, k) coefficients when nu > 0 and
        // from their nu-independent equivalents otherwise.
        let (bb_ag, aa_bn) = if self.nu > T::zero() {
            (
                (self.beta / self.alpha) * (self.beta / self.gamma),
                (self.alpha / self.beta) * (self.alpha / self.nu),
            )
        } else {
            (
                (self.beta0 / self.alpha0) * (self.beta0 / self.gamma0),
                (self.alpha0 / self.beta0) * self.alpha0,
            )
        };
        let le = |name, value: T, bound: T| ConstraintCheck {
            name,
            value,
            bound,
            relation: "<=",
            holds: value <= bound,
        };
        let ge = |name, value: T, bound: T| ConstraintCheck {
            name,
            value,
            bound,
            relation: ">=",
            holds: value >= bound,
        };
        let eq = |name, value: T, bound: T| ConstraintCheck {
            name,
            value,
            bound,
            relation: "==",
            holds: ((value - bound) / bound).abs() <= c(EQUALITY_RTOL).max(T::epsilon() * c(8.0)),
        };
        vec![
            le("beta2_over_alpha_gamma", bb_ag, c(0.25)),
            eq("beta2_over_alpha_gamma_exact", bb_ag, c(0.125)),
            le("alpha2_over_beta_nu", aa_bn, c(0.5)),
            eq("alpha2_over_beta_nu_exact", aa_bn, c(0.25)),
            le(
                "gamma0_over_beta0",
                self.gamma0 / self.beta0,
                T::one() / (c(12.0) * u2),
            ),
            ge(
                "two_u2_over_alpha0_beta0",
                c(2.0) * u2 / (self.alpha0 * self.beta0),
                c(3.0),
            ),
            ge("two_u2_over_gamma0", c(2.0) * u2 / self.gamma0, c(3.0)),
            ConstraintCheck {
                name: "beta0_le_alpha0_le_1",
                value: self.alpha0,
                bound: T::one(),
                relation: "<=",
                holds: self.beta0 <= self.alpha0 && self.alpha0 <= T::one(),
            },
        ]
    }

    /// `2 eps0 nu^(1/3) k^(2/3)`, the decay rate of the Lyapunov functionals.
    pub fn decay_rate(&self) -> T {
        let c = T::of;
        c(2.0) * self.eps0 * self.nu.powf(c(1.0 / 3.0)) * c(self.k as f64).powf(c(2.0 / 3.0))
    }

    /// `T_{nu,k} = nu^(-1/3) k^(-2/3)`; infinite when `nu = 0`.
    pub fn transition_time(&self) -> T {
        let c = T::of;
        T::one() / (self.nu.powf(c(1.0 / 3.0)) * c(self.k as f64).powf(c(2.0 / 3.0)))
    }

    pub fn regime(&self) -> Regime {
        check_nu_restriction(self, self.nu, self.k)
    }
}

/// Classifies `nu/k` against `nu0` and `1`.
pub fn check_nu_restriction<T: Real>(ledger: &CoeffLedger<T>, nu: T, k: u32) -> Regime {
    let ratio = nu / T::of(k as f64);
    if ratio <= ledger.nu0 {
        Regime::Both
    } else if ratio <= T::one() {
        Regime::PhiOnly
    } else {
        Regime::Unrestricted
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Values frozen from an independent 30-digit evaluation of the closed forms.
    const ALPHA0_U1: f64 = 7.134703196347032e-5;
    const BETA0_U1: f64 = 2.0361595879985822e-8;
    const EPS0_U1: f64 = 6.3629987124955693e-10;
    const NU0_U1: f64 = 6.1906548854952773e-19;
    const C0SQ_U1: f64 = 6029987075850240.0;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn unit_frak_u_constants() {
        let l = CoeffLedger::build(1.0_f64, 0.0, 1).unwrap();
        assert!(rel(l.alpha0, ALPHA0_U1) < 1e-14);
        assert!(rel(l.beta0, BETA0_U1) < 1e-14);
        assert!(rel(l.eps0, EPS0_U1) < 1e-14);
        assert!(rel(l.nu0, NU0_U1) < 1e-13);
        assert!(rel(l.c0_sq, C0SQ_U1) < 1e-13);
        assert_eq!(l.delta0, l.alpha0);
        assert!(l.underflow.is_empty());
    }

    #[test]
    fn inviscid_coefficients() {
        for k in 1..5 {
            let l = CoeffLedger::build(1.0_f64, 0.0, k).unwrap();
            assert_eq!(l.alpha, 0.0);
            assert_eq!(l.beta, 0.0);
            assert_eq!(l.gamma, l.gamma0 / (k * k) as f64);
        }
    }

    #[test]
    fn viscous_coefficients_and_scaling() {
        let l = CoeffLedger::build(1.0_f64, 1e-3, 1).unwrap();
        assert!(rel(l.alpha, l.alpha0 * 1e-2) < 1e-14);
        assert!(rel(l.beta, l.beta0 * 1e-1) < 1e-14);
        for k in [2u32, 3, 7] {
            let lk = CoeffLedger::build(1.0_f64, 1e-3, k).unwrap();
            let kf = k as f64;
            assert!(rel(lk.alpha, l.alpha * kf.powf(-2.0 / 3.0)) < 1e-14);
            assert!(rel(lk.beta, l.beta * kf.powf(-4.0 / 3.0)) < 1e-14);
            assert!(rel(lk.gamma, l.gamma / (kf * kf)) < 1e-15);
        }
    }

    #[test]
    fn constraints_hold_across_frak_u() {
        for i in 0..=40 {
            let u = 10f64.powf(i as f64 * 2.0 / 40.0);
            for &nu in &[0.0, 1e-6, 1e-2, 0.5] {
                let l = CoeffLedger::build(u, nu, 3).unwrap();
                assert_eq!(l.constraints.len(), 8);
                assert!(l.constraints.iter().all(|c| c.holds), "U={u}, nu={nu}");
            }
        }
    }

    #[test]
    fn regimes() {
        let l = CoeffLedger::build(1.0_f64, 1e-3, 1).unwrap();
        assert_eq!(check_nu_restriction(&l, 1e-3, 1), Regime::PhiOnly);
        assert_eq!(check_nu_restriction(&l, 0.0, 1), Regime::Both);
        assert_eq!(check_nu_restriction(&l, 2.0, 1), Regime::Unrestricted);
        assert_eq!(l.regime(), Regime::PhiOnly);
    }

    #[test]
    fn underflow_is_reported_not_hidden() {
        let l = CoeffLedger::build(10.0_f32, 0.0, 1).unwrap();
        assert!(l.underflow.contains(&"nu0"));
        let d = CoeffLedger::build(100.0_f64, 0.0, 1).unwrap();
        assert!(d.underflow.is_empty());
    }

    #[test]
    fn invalid_inputs() {
        assert!(CoeffLedger::build(0.5_f64, 0.0, 1).is_err());
        assert!(CoeffLedger::build(1.0_f64, -1.0, 1).is_err());
        assert!(CoeffLedger::build(1.0_f64, 0.0, 0).is_err());
    }
}
