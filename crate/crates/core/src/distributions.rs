//! Lifetime distributions, their age-conditional (minimal repair) forms, and
//! exact samplers.
//!
//! Parameterizations:
//! - `gamma`: shape `κ`, scale `θ` (mean `κθ`)
//! - `rayleigh`: survival `exp(-(λt)²)` (mean `√π / 2λ`)
//! - `weibull`: scale `λ`, shape `ν`, survival `exp(-(t/λ)^ν)`
//! - `gamma-process-passage`: first time a homogeneous gamma degradation
//!   process with shape rate `κ` and rate `θ` reaches level `D`, so
//!   `F(t) = Q(κt, θD)` (regularized upper incomplete gamma)
//! - `never-fails`: survival identically one

use rand::Rng;
use rand_distr::{Distribution, Gamma as GammaDist};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics;
use crate::special;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LifetimeModel {
    Exponential { rate: f64 },
    Gamma { shape: f64, scale: f64 },
    Weibull { scale: f64, shape: f64 },
    Rayleigh { lambda: f64 },
    GammaProcessPassage { kappa: f64, theta: f64, level: f64 },
    NeverFails,
}

/// Which function of a lifetime model to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Pdf,
    Cdf,
    Survival,
    Hazard,
    CumHazard,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")))
    }
}

impl LifetimeModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Exponential { rate } => positive("rate", rate),
            Self::Gamma { shape, scale } => positive("shape", shape).and(positive("scale", scale)),
            Self::Weibull { scale, shape } => positive("scale", scale).and(positive("shape", shape)),
            Self::Rayleigh { lambda } => positive("lambda", lambda),
            Self::GammaProcessPassage { kappa, theta, level } => {
                positive("kappa", kappa)?;
                positive("theta", theta)?;
                positive("level", level)?;
                if theta * level > 600.0 {
                    return Err(Error::InvalidParameter(format!(
                        "theta * level = {} is outside the supported range (<= 600)",
                        theta * level
                    )));
                }
                Ok(())
            }
            Self::NeverFails => Ok(()),
        }
    }

    pub fn is_never_fails(&self) -> bool {
        matches!(self, Self::NeverFails)
    }

    pub fn is_exponential(&self) -> bool {
        matches!(self, Self::Exponential { .. })
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::Exponential { .. } => "exponential",
            Self::Gamma { .. } => "gamma",
            Self::Weibull { .. } => "weibull",
            Self::Rayleigh { .. } => "rayleigh",
            Self::GammaProcessPassage { .. } => "gamma-process-passage",
            Self::NeverFails => "never-fails",
        }
    }

    /// Checked evaluation; rejects negative times.
    pub fn eval(&self, which: Quantity, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("time must be nonnegative, got {t}")));
        }
        self.validate()?;
        Ok(match which {
            Quantity::Pdf => self.pdf(t),
            Quantity::Cdf => self.cdf(t),
            Quantity::Survival => self.survival(t),
            Quantity::Hazard => self.hazard(t),
            Quantity::CumHazard => self.cumulative_hazard(t),
        })
    }

    /// `ln F̄(t)`; finite for all `t` unless the survival is exactly zero.
    pub fn ln_survival(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match *self {
            Self::Exponential { rate } => -rate * t,
            Self::Gamma { shape, scale } => special::ln_gamma_pq(shape, t / scale).1,
            Self::Weibull { scale, shape } => -(t / scale).powf(shape),
            Self::Rayleigh { lambda } => -(lambda * t) * (lambda * t),
            Self::GammaProcessPassage { kappa, theta, level } => {
                special::ln_gamma_pq(kappa * t, theta * level).0
            }
            Self::NeverFails => 0.0,
        }
    }

    pub fn cumulative_hazard(&self, t: f64) -> f64 {
        -self.ln_survival(t)
    }

    pub fn survival(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 1.0;
        }
        match *self {
            Self::Gamma { shape, scale } => special::gamma_q(shape, t / scale),
            Self::GammaProcessPassage { kappa, theta, level } => special::gamma_p(kappa * t, theta * level),
            _ => self.ln_survival(t).exp(),
        }
    }

    pub fn cdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match *self {
            Self::Gamma { shape, scale } => special::gamma_p(shape, t / scale),
            Self::GammaProcessPassage { kappa, theta, level } => special::gamma_q(kappa * t, theta * level),
            Self::NeverFails => 0.0,
            _ => -self.ln_survival(t).exp_m1(),
        }
    }

    pub fn pdf(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        match *self {
            Self::Exponential { rate } => rate * (-rate * t).exp(),
            Self::Gamma { shape, scale } => {
                if t == 0.0 {
                    return match shape {
                        s if s < 1.0 => f64::INFINITY,
                        s if s == 1.0 => 1.0 / scale,
                        _ => 0.0,
                    };
                }
                let x = t / scale;
                ((shape - 1.0) * x.ln() - x - special::ln_gamma(shape)).exp() / scale
            }
            Self::Weibull { .. } | Self::Rayleigh { .. } => {
                let h = self.hazard(t);
                if h == 0.0 {
                    0.0
                } else {
                    h * self.survival(t)
                }
            }
            Self::GammaProcessPassage { kappa, theta, level } => {
                let s = special::lower_gamma_shape_series(kappa * t, theta * level);
                (-kappa * s.dsum * s.ln_pref.exp()).max(0.0)
            }
            Self::NeverFails => 0.0,
        }
    }

    /// Hazard rate `f / F̄`; `+∞` where the survival is zero.
    pub fn hazard(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        match *self {
            Self::Exponential { rate } => rate,
            Self::Gamma { shape, scale } => {
                if t == 0.0 {
                    return self.pdf(0.0);
                }
                let x = t / scale;
                let ln_pdf = (shape - 1.0) * x.ln() - x - special::ln_gamma(shape) - scale.ln();
                let ln_s = self.ln_survival(t);
                if ln_s == f64::NEG_INFINITY {
                    f64::INFINITY
                } else {
                    (ln_pdf - ln_s).exp()
                }
            }
            Self::Weibull { scale, shape } => {
                if t == 0.0 {
                    return match shape {
                        s if s < 1.0 => f64::INFINITY,
                        s if s == 1.0 => 1.0 / scale,
                        _ => 0.0,
                    };
                }
                shape / scale * (t / scale).powf(shape - 1.0)
            }
            Self::Rayleigh { lambda } => 2.0 * lambda * lambda * t,
            Self::GammaProcessPassage { kappa, theta, level } => {
                let s = special::lower_gamma_shape_series(kappa * t, theta * level);
                (-kappa * s.dsum / s.sum).max(0.0)
            }
            Self::NeverFails => 0.0,
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Self::Exponential { rate } => 1.0 / rate,
            Self::Gamma { shape, scale } => shape * scale,
            Self::Weibull { scale, shape } => scale * special::gamma(1.0 + 1.0 / shape),
            Self::Rayleigh { lambda } => std::f64::consts::PI.sqrt() / (2.0 * lambda),
            Self::GammaProcessPassage { .. } => {
                let guess = self.scale_hint();
                numerics::integrate_to_infinity(|t| self.survival(t), 0.0, guess, 1e-10 * guess)
                    .unwrap_or(guess)
            }
            Self::NeverFails => f64::INFINITY,
        }
    }

    /// Cheap time scale of the model (the mean, or a closed-form stand-in).
    pub fn scale_hint(&self) -> f64 {
        match *self {
            Self::GammaProcessPassage { kappa, theta, level } => (theta * level + 0.5) / kappa,
            Self::NeverFails => 1.0,
            _ => self.mean(),
        }
    }

    /// Smallest `t` with `H(t) >= target`, starting the search at `from`.
    pub fn inverse_cumulative_hazard(&self, target: f64, from: f64) -> f64 {
        if target <= 0.0 {
            return 0.0;
        }
        match *self {
            Self::Exponential { rate } => target / rate,
            Self::Weibull { scale, shape } => scale * target.powf(1.0 / shape),
            Self::Rayleigh { lambda } => target.sqrt() / lambda,
            Self::NeverFails => f64::INFINITY,
            _ => {
                let mut lo = from.max(0.0);
                let mut hi = lo + self.scale_hint();
                while self.cumulative_hazard(hi) < target {
                    lo = hi;
                    hi *= 2.0;
                    if !hi.is_finite() {
                        return f64::INFINITY;
                    }
                }
                // Newton on H with the hazard as derivative, kept inside the bracket
                let slack = 1e-13 * target.max(1.0);
                let mut x = 0.5 * (lo + hi);
                for _ in 0..200 {
                    let gap = self.cumulative_hazard(x) - target;
                    if gap.abs() <= slack {
                        break;
                    }
                    if gap < 0.0 {
                        lo = x;
                    } else {
                        hi = x;
                    }
                    if hi - lo <= 1e-15 * hi {
                        break;
                    }
                    let step = x - gap / self.hazard(x);
                    x = if step > lo && step < hi { step } else { 0.5 * (lo + hi) };
                }
                x
            }
        }
    }

    /// Exact draw of a lifetime; never-fails returns `+∞`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::NeverFails => f64::INFINITY,
            Self::Gamma { shape, scale } => GammaDist::new(shape, scale)
                .expect("validated gamma parameters")
                .sample(rng),
            _ => {
                let e = standard_exponential(rng);
                self.inverse_cumulative_hazard(e, 0.0)
            }
        }
    }

    pub fn at_age(self, age: f64) -> Result<ConditionalLifetime> {
        ConditionalLifetime::new(self, age)
    }
}

fn standard_exponential<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // 1 - U lies in (0, 1]
    -(1.0 - rng.random::<f64>()).ln()
}

/// Residual lifetime of a unit that has already survived to `age`
/// (minimal repair, "as bad as old").
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalLifetime {
    base: LifetimeModel,
    age: f64,
    ln_survival_at_age: f64,
}

impl ConditionalLifetime {
    pub fn new(base: LifetimeModel, age: f64) -> Result<Self> {
        if !(age >= 0.0) {
            return Err(Error::Domain(format!("age must be nonnegative, got {age}")));
        }
        let ln_s = base.ln_survival(age);
        if ln_s == f64::NEG_INFINITY || ln_s.is_nan() {
            return Err(Error::ImpossibleCondition { age });
        }
        Ok(Self {
            base,
            age,
            ln_survival_at_age: ln_s,
        })
    }

    pub fn base(&self) -> &LifetimeModel {
        &self.base
    }

    pub fn age(&self) -> f64 {
        self.age
    }

    pub fn eval(&self, which: Quantity, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::Domain(format!("time must be nonnegative, got {x}")));
        }
        Ok(match which {
            Quantity::Pdf => self.pdf(x),
            Quantity::Cdf => self.cdf(x),
            Quantity::Survival => self.survival(x),
            Quantity::Hazard => self.base.hazard(x + self.age),
            Quantity::CumHazard => self.base.cumulative_hazard(x + self.age) + self.ln_survival_at_age,
        })
    }

    fn ln_survival(&self, x: f64) -> f64 {
        if self.age == 0.0 {
            return self.base.ln_survival(x);
        }
        self.base.ln_survival(x + self.age) - self.ln_survival_at_age
    }

    /// `F̄(x + y) / F̄(y)`
    pub fn survival(&self, x: f64) -> f64 {
        if self.age == 0.0 {
            return self.base.survival(x);
        }
        self.ln_survival(x).exp()
    }

    /// `(F(x + y) - F(y)) / F̄(y)`
    pub fn cdf(&self, x: f64) -> f64 {
        if self.age == 0.0 {
            return self.base.cdf(x);
        }
        -self.ln_survival(x).exp_m1()
    }

    /// `f(x + y) / F̄(y)`
    pub fn pdf(&self, x: f64) -> f64 {
        if self.age == 0.0 {
            return self.base.pdf(x);
        }
        let h = self.base.hazard(x + self.age);
        if h == 0.0 {
            0.0
        } else {
            h * self.survival(x)
        }
    }

    /// Mean residual life `∫_0^∞ F̄(x | y) dx`.
    pub fn mean(&self, tol: f64) -> Result<f64> {
        if self.age == 0.0 {
            return Ok(self.base.mean());
        }
        match self.base {
            LifetimeModel::Exponential { rate } => Ok(1.0 / rate),
            LifetimeModel::NeverFails => Ok(f64::INFINITY),
            _ => {
                // width of the first window: hazard-based residual scale
                let h = self.base.hazard(self.age);
                let scale = if h.is_finite() && h > 0.0 {
                    (1.0 / h).min(self.base.mean())
                } else {
                    self.base.mean()
                };
                numerics::integrate_to_infinity(|x| self.survival(x), 0.0, scale, tol)
            }
        }
    }

    /// Residual lifetime beyond the current age, by inversion of the
    /// conditional survival.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.age == 0.0 {
            return self.base.sample(rng);
        }
        match self.base {
            LifetimeModel::NeverFails => f64::INFINITY,
            LifetimeModel::Exponential { rate } => standard_exponential(rng) / rate,
            _ => {
                let e = standard_exponential(rng);
                let target = -self.ln_survival_at_age + e;
                (self.base.inverse_cumulative_hazard(target, self.age) - self.age).max(0.0)
            }
        }
    }
}
