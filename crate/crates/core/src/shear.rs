//! Library of monotone shear flows with closed-form derivatives, and the
//! sampled certificate for hypothesis (H):
//! `1/U <= u'`, `|u''|/u' <= U`, `|u'''|/u' <= U`.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Relative tolerance of the adaptive quadrature behind the oscillatory profile.
pub const FRESNEL_TOL: f64 = 1e-10;

/// Default certificate sampling density (points per unit length).
pub const DEFAULT_DENSITY: f64 = 1e4;

/// A code-registered shear profile `u(y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shear<T> {
    /// `u(y) = y`.
    Couette,
    /// `u(y) = y + a sin y`, monotone for `|a| < 1`.
    SinePerturbed { amplitude: T },
    /// `u(y) = y + e^y`.
    Exponential,
    /// `u(y) = y (1 + |y|^(n-1))` for odd `n >= 3`.
    Polynomial { n: u32 },
    /// `u(y) = y + a ∫_0^y sin(z²) dz`. Monotone, but `u''` grows linearly,
    /// so (H) fails on the whole line.
    Oscillatory { amplitude: T },
    /// `u ≡ c`. Degenerate test profile: not monotone, never certified.
    Constant { value: T },
}

/// Value and first three derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet<T> {
    pub u: T,
    pub u1: T,
    pub u2: T,
    pub u3: T,
}

impl<T: Real> Shear<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Shear::Couette => "couette",
            Shear::SinePerturbed { .. } => "sine_perturbed",
            Shear::Exponential => "exponential",
            Shear::Polynomial { .. } => "polynomial",
            Shear::Oscillatory { .. } => "oscillatory",
            Shear::Constant { .. } => "constant",
        }
    }

    /// Flat parameter map, as written in run configs.
    pub fn params(&self) -> BTreeMap<String, f64> {
        let mut m = BTreeMap::new();
        match *self {
            Shear::SinePerturbed { amplitude } | Shear::Oscillatory { amplitude } => {
                m.insert("amplitude".into(), amplitude.to_f64_lossy());
            }
            Shear::Polynomial { n } => {
                m.insert("n".into(), n as f64);
            }
            Shear::Constant { value } => {
                m.insert("value".into(), value.to_f64_lossy());
            }
            Shear::Couette | Shear::Exponential => {}
        }
        m
    }

    /// Builds a profile from its identifier and parameter map. Missing
    /// parameters take the catalog defaults.
    pub fn from_name(name: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        let known: &[&str] = match name {
            "couette" | "exponential" => &[],
            "sine_perturbed" | "oscillatory" => &["amplitude"],
            "polynomial" => &["n"],
            "constant" => &["value"],
            other => return Err(Error::Invalid(format!("unknown shear profile `{other}`"))),
        };
        if let Some(bad) = params.keys().find(|k| !known.contains(&k.as_str())) {
            return Err(Error::Invalid(format!(
                "profile `{name}` has no parameter `{bad}`"
            )));
        }
        let amplitude = || {
            let a = params.get("amplitude").copied().unwrap_or(0.5);
            if a.abs() >= 1.0 || !a.is_finite() {
                return Err(Error::Invalid(format!(
                    "amplitude must satisfy |a| < 1 for a monotone profile, got {a}"
                )));
            }
            Ok(T::of(a))
        };
        Ok(match name {
            "couette" => Shear::Couette,
            "exponential" => Shear::Exponential,
            "sine_perturbed" => Shear::SinePerturbed {
                amplitude: amplitude()?,
            },
            "oscillatory" => Shear::Oscillatory {
                amplitude: amplitude()?,
            },
            "polynomial" => {
                let n = params.get("n").copied().unwrap_or(3.0);
                if n.fract() != 0.0 || n < 3.0 || (n as u32) % 2 == 0 {
                    return Err(Error::Invalid(format!(
                        "polynomial profile needs an odd integer n >= 3, got {n}"
                    )));
                }
                Shear::Polynomial { n: n as u32 }
            }
            "constant" => Shear::Constant {
                value: T::of(params.get("value").copied().unwrap_or(1.0)),
            },
            _ => unreachable!(),
        })
    }

    /// Whether the profile satisfies (H) on the whole real line for some
    /// finite constant. Only the oscillatory counterexample and the
    /// degenerate constant profile do not.
    pub fn admissible_on_line(&self) -> bool {
        !matches!(self, Shear::Oscillatory { .. } | Shear::Constant { .. })
    }

    pub fn u(&self, y: T) -> T {
        match *self {
            Shear::Couette => y,
            Shear::SinePerturbed { amplitude } => y + amplitude * y.sin(),
            Shear::Exponential => y + y.exp(),
            Shear::Polynomial { n } => y + y.powi(n as i32),
            Shear::Oscillatory { amplitude } => y + amplitude * fresnel_sin(y),
            Shear::Constant { value } => value,
        }
    }

    pub fn u1(&self, y: T) -> T {
        match *self {
            Shear::Couette => T::one(),
            Shear::SinePerturbed { amplitude } => T::one() + amplitude * y.cos(),
            Shear::Exponential => T::one() + y.exp(),
            Shear::Polynomial { n } => T::one() + T::of(n as f64) * y.powi(n as i32 - 1),
            Shear::Oscillatory { amplitude } => T::one() + amplitude * (y * y).sin(),
            Shear::Constant { .. } => T::zero(),
        }
    }

    pub fn u2(&self, y: T) -> T {
        match *self {
            Shear::Couette | Shear::Constant { .. } => T::zero(),
            Shear::SinePerturbed { amplitude } => -amplitude * y.sin(),
            Shear::Exponential => y.exp(),
            Shear::Polynomial { n } => {
                let n = n as i32;
                T::of((n * (n - 1)) as f64) * y.powi(n - 2)
            }
            Shear::Oscillatory { amplitude } => T::of(2.0) * amplitude * y * (y * y).cos(),
        }
    }

    pub fn u3(&self, y: T) -> T {
        match *self {
            Shear::Couette | Shear::Constant { .. } => T::zero(),
            Shear::SinePerturbed { amplitude } => -amplitude * y.cos(),
            Shear::Exponential => y.exp(),
            Shear::Polynomial { n } => {
                let n = n as i32;
                T::of((n * (n - 1) * (n - 2)) as f64) * y.powi(n - 3)
            }
            Shear::Oscillatory { amplitude } => {
                let y2 = y * y;
                T::of(2.0) * amplitude * (y2.cos() - T::of(2.0) * y2 * y2.sin())
            }
        }
    }

    pub fn jet(&self, y: T) -> Jet<T> {
        Jet {
            u: self.u(y),
            u1: self.u1(y),
            u2: self.u2(y),
            u3: self.u3(y),
        }
    }
}

impl<T: Real> fmt::Display for Shear<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())?;
        for (k, v) in self.params() {
            write!(f, " {k}={v}")?;
        }
        Ok(())
    }
}

/// The shipped profiles with their default parameters.
pub fn catalog<T: Real>() -> Vec<Shear<T>> {
    vec![
        Shear::Couette,
        Shear::SinePerturbed {
            amplitude: T::of(0.5),
        },
        Shear::Exponential,
        Shear::Polynomial { n: 3 },
        Shear::Oscillatory {
            amplitude: T::of(0.5),
        },
    ]
}

/// `∫_0^y sin(z²) dz` by adaptive Simpson quadrature.
pub fn fresnel_sin<T: Real>(y: T) -> T {
    if y == T::zero() {
        return T::zero();
    }
    let f = |z: T| (z * z).sin();
    // Split into unit panels so the recursion sees at most a few oscillations.
    let a = y.abs();
    let panels = a.ceil().to_usize().unwrap_or(1).max(1);
    let width = a / T::of(panels as f64);
    let tol = T::of(FRESNEL_TOL) / T::of(panels as f64);
    let mut total = T::zero();
    for p in 0..panels {
        let lo = width * T::of(p as f64);
        let hi = if p + 1 == panels { a } else { lo + width };
        total = total + adaptive_simpson(&f, lo, hi, tol);
    }
    if y < T::zero() {
        -total
    } else {
        total
    }
}

fn adaptive_simpson<T: Real>(f: &impl Fn(T) -> T, a: T, b: T, tol: T) -> T {
    let two = T::of(2.0);
    let m = (a + b) / two;
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / T::of(6.0) * (fa + T::of(4.0) * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 48)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<T: Real>(
    f: &impl Fn(T) -> T,
    a: T,
    b: T,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
    tol: T,
    depth: u32,
) -> T {
    let two = T::of(2.0);
    let m = (a + b) / two;
    let (lm, rm) = ((a + m) / two, (m + b) / two);
    let (flm, frm) = (f(lm), f(rm));
    let six = T::of(6.0);
    let four = T::of(4.0);
    let left = (m - a) / six * (fa + four * flm + fm);
    let right = (b - m) / six * (fm + four * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= T::of(15.0) * tol {
        return left + right + delta / T::of(15.0);
    }
    simpson_step(f, a, m, fa, flm, fm, left, tol / two, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, tol / two, depth - 1)
}

/// Which inequality of (H) a sample point is binding for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HConstraint {
    /// `1/u'`
    InverseSlope,
    /// `|u''|/u'`
    Curvature,
    /// `|u'''|/u'`
    ThirdDerivative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WorstPoint<T> {
    pub y: T,
    pub constraint: HConstraint,
    pub ratio: T,
    /// `U - ratio`, never negative.
    pub margin: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisCertificate<T> {
    pub profile: String,
    pub frak_u: T,
    pub half_width: T,
    pub samples: usize,
    pub satisfied: bool,
    pub worst_points: Vec<WorstPoint<T>>,
}

/// How [`certify_hypothesis`] places its samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sampling {
    /// `n` uniform points on `[-L, L]`, endpoints included. `n >= 1000`.
    Count(usize),
    /// The lattice `j / density` restricted to `[-L, L]`. Enlarging `L` only
    /// adds samples, so the certified constant is monotone in `L`.
    Density(f64),
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling::Density(DEFAULT_DENSITY)
    }
}

/// Certifies (H) on `[-L, L]` by dense sampling.
pub fn certify_hypothesis<T: Real>(
    profile: &Shear<T>,
    half_width: T,
    sampling: Sampling,
) -> Result<HypothesisCertificate<T>> {
    if !(half_width > T::zero()) {
        return Err(Error::Invalid("certificate half-width must be positive".into()));
    }
    let points: Vec<T> = match sampling {
        Sampling::Count(n) => {
            if n < 1000 {
                return Err(Error::Invalid(format!(
                    "certificate needs at least 1000 samples, got {n}"
                )));
            }
            let step = T::of(2.0) * half_width / T::of((n - 1) as f64);
            (0..n).map(|i| -half_width + step * T::of(i as f64)).collect()
        }
        Sampling::Density(d) => {
            if !(d > 0.0) {
                return Err(Error::Invalid("sampling density must be positive".into()));
            }
            let jmax = (half_width.to_f64_lossy() * d).floor() as i64;
            let step = T::one() / T::of(d);
            (-jmax..=jmax).map(|j| step * T::of(j as f64)).collect()
        }
    };

    let mut worst = [(T::zero(), T::neg_infinity()); 3];
    for &y in &points {
        // Only derivatives enter (H); skipping `u` avoids the Fresnel quadrature.
        let jet = Jet {
            u: T::zero(),
            u1: profile.u1(y),
            u2: profile.u2(y),
            u3: profile.u3(y),
        };
        if !(jet.u1 > T::zero()) {
            return Err(Error::NonMonotone {
                y: y.to_f64_lossy(),
                slope: jet.u1.to_f64_lossy(),
            });
        }
        let ratios = [
            T::one() / jet.u1,
            jet.u2.abs() / jet.u1,
            jet.u3.abs() / jet.u1,
        ];
        for (slot, r) in worst.iter_mut().zip(ratios) {
            if r > slot.1 {
                *slot = (y, r);
            }
        }
    }
    let frak_u = worst
        .iter()
        .fold(T::one(), |acc, &(_, r)| if r > acc { r } else { acc });
    let kinds = [
        HConstraint::InverseSlope,
        HConstraint::Curvature,
        HConstraint::ThirdDerivative,
    ];
    let worst_points = worst
        .iter()
        .zip(kinds)
        .map(|(&(y, ratio), constraint)| WorstPoint {
            y,
            constraint,
            ratio,
            margin: frak_u - ratio,
        })
        .collect();
    Ok(HypothesisCertificate {
        profile: profile.to_string(),
        frak_u,
        half_width,
        samples: points.len(),
        satisfied: true,
        worst_points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fd4(p: &Shear<f64>, y: f64, h: f64, f: impl Fn(&Shear<f64>, f64) -> f64) -> f64 {
        (f(p, y - 2.0 * h) - 8.0 * f(p, y - h) + 8.0 * f(p, y + h) - f(p, y + 2.0 * h))
            / (12.0 * h)
    }

    #[test]
    fn catalog_examples() {
        let c = Shear::<f64>::Couette;
        assert_eq!((c.u(1.0), c.u1(1.0), c.u2(1.0)), (1.0, 1.0, 0.0));

        let s = Shear::SinePerturbed { amplitude: 0.5 };
        for i in 0..1000 {
            let y = -20.0 + 0.04 * i as f64;
            let d = s.u1(y);
            assert!((0.5..=1.5).contains(&d));
        }

        let p = Shear::<f64>::Polynomial { n: 3 };
        assert_eq!(p.u(2.0), 10.0);
        assert_eq!(p.u1(2.0), 13.0);

        let names: Vec<_> = catalog::<f64>().iter().map(|p| p.name()).collect();
        assert_eq!(
            names,
            ["couette", "sine_perturbed", "exponential", "polynomial", "oscillatory"]
        );
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-3;
        for p in catalog::<f64>() {
            for i in 0..=100 {
                let y = -5.0 + 0.1 * i as f64;
                let pairs: [(f64, f64); 3] = [
                    (p.u1(y), fd4(&p, y, h, |p, y| p.u(y))),
                    (p.u2(y), fd4(&p, y, h, |p, y| p.u1(y))),
                    (p.u3(y), fd4(&p, y, h, |p, y| p.u2(y))),
                ];
                for (exact, fd) in pairs {
                    let scale = exact.abs().max(1.0);
                    assert!(
                        (exact - fd).abs() / scale < 1e-6,
                        "{p} at y={y}: {exact} vs {fd}"
                    );
                }
            }
        }
    }

    #[test]
    fn fresnel_matches_series() {
        // ∫_0^y sin z² dz = Σ (-1)^n y^(4n+3) / ((2n+1)! (4n+3))
        for &y in &[0.3_f64, 1.0, 2.0, -1.5] {
            let mut sum = 0.0;
            let mut fact = 1.0; // (2n+1)!
            for n in 0..40 {
                if n > 0 {
                    fact *= (2 * n) as f64 * (2 * n + 1) as f64;
                }
                let term = y.powi(4 * n + 3) / (fact * (4 * n + 3) as f64);
                sum += if n % 2 == 0 { term } else { -term };
            }
            assert!((fresnel_sin(y) - sum).abs() < 1e-10, "y={y}");
        }
        // Limit sqrt(pi/8) reached slowly; checks the oscillatory tail integrates stably.
        let tail = fresnel_sin(40.0_f64);
        assert!((tail - (std::f64::consts::PI / 8.0).sqrt()).abs() < 0.02);
    }

    #[test]
    fn certificates() {
        let c = certify_hypothesis(&Shear::<f64>::Couette, 10.0, Sampling::default()).unwrap();
        assert_eq!(c.frak_u, 1.0);
        assert!(c.satisfied);

        let s = certify_hypothesis(
            &Shear::SinePerturbed { amplitude: 0.5_f64 },
            10.0,
            Sampling::default(),
        )
        .unwrap();
        assert!((s.frak_u - 2.0).abs() < 1e-8);
        let binding = s
            .worst_points
            .iter()
            .find(|w| w.constraint == HConstraint::InverseSlope)
            .unwrap();
        assert!(binding.margin.abs() < 1e-8);

        let o = certify_hypothesis(
            &Shear::Oscillatory { amplitude: 0.5 },
            20.0,
            Sampling::default(),
        )
        .unwrap();
        // |u'''|/u' reaches roughly 2·a·2y²/(1-a) near y = 20.
        assert!(o.frak_u > 1000.0, "{}", o.frak_u);
        let small = certify_hypothesis(
            &Shear::Oscillatory { amplitude: 0.5 },
            5.0,
            Sampling::default(),
        )
        .unwrap();
        assert!(small.frak_u < o.frak_u);

        let err = certify_hypothesis(&Shear::Constant { value: 1.0 }, 1.0, Sampling::Count(1000));
        assert!(matches!(err, Err(Error::NonMonotone { .. })));
        assert!(certify_hypothesis(&Shear::<f64>::Couette, 1.0, Sampling::Count(10)).is_err());
    }

    #[test]
    fn polynomial_and_exponential_constants() {
        let p = certify_hypothesis(&Shear::<f64>::Polynomial { n: 3 }, 3.0, Sampling::default())
            .unwrap();
        // u'''/u' = 6/(1+3y²) peaks at y = 0.
        assert!((p.frak_u - 6.0).abs() < 1e-12);
        let e = certify_hypothesis(&Shear::<f64>::Exponential, 3.0, Sampling::default()).unwrap();
        assert_eq!(e.frak_u, 1.0);
    }

    #[test]
    fn from_name_round_trips() {
        for p in catalog::<f64>() {
            let q = Shear::<f64>::from_name(p.name(), &p.params()).unwrap();
            assert_eq!(p, q);
        }
        let mut bad = BTreeMap::new();
        bad.insert("n".to_string(), 2.0);
        assert!(Shear::<f64>::from_name("polynomial", &bad).is_err());
        assert!(Shear::<f64>::from_name("vortex", &BTreeMap::new()).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn certificate_monotone_in_half_width(l1 in 0.5f64..8.0, extra in 0.0f64..6.0, which in 0usize..5) {
            let p = catalog::<f64>()[which];
            let s = Sampling::Density(2000.0);
            let a = certify_hypothesis(&p, l1, s).unwrap();
            let b = certify_hypothesis(&p, l1 + extra, s).unwrap();
            prop_assert!(b.frak_u >= a.frak_u);
        }
    }
}
