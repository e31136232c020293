//! Catalog of completely monotone jump densities.
//!
//! Entries are evaluate-and-classify only: the analytic solver handles the
//! exponential-mixture case through [`super::JumpMixtureSpec`] and rejects
//! everything else.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use super::JumpMixtureSpec;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Up,
    Down,
}

/// Parametric density on `(0, inf)`.
#[derive(Debug, Clone, PartialEq)]
pub enum CatalogDensity {
    /// `lambda x^(-1-alpha)`
    Stable { lambda: f64, alpha: f64 },
    /// `lambda x^(-1-alpha) exp(-beta x)`
    TemperedStable { lambda: f64, alpha: f64, beta: f64 },
    /// `lambda1 x^(-1-alpha) exp(-beta x) + lambda2 x^(-2-alpha) exp(-beta x)`
    Parent { lambda1: f64, lambda2: f64, alpha: f64, beta: f64 },
    /// `c r x^(r-1) exp(-c x^r)`
    Weibull { c: f64, r: f64 },
    /// `alpha (1 + x)^(-alpha-1)`
    Pareto { alpha: f64 },
    /// `x^(shape-1) exp(-x/scale) / (Gamma(shape) scale^shape)`
    Gamma { shape: f64, scale: f64 },
    /// `sum_i w_i r_i exp(-r_i x)`
    ExponentialMixture { weights: Vec<f64>, rates: Vec<f64> },
}

impl CatalogDensity {
    pub fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match *self {
            Self::Stable { lambda, alpha } => lambda * x.powf(-1.0 - alpha),
            Self::TemperedStable { lambda, alpha, beta } => lambda * x.powf(-1.0 - alpha) * (-beta * x).exp(),
            Self::Parent { lambda1, lambda2, alpha, beta } => {
                (lambda1 * x.powf(-1.0 - alpha) + lambda2 * x.powf(-2.0 - alpha)) * (-beta * x).exp()
            }
            Self::Weibull { c, r } => c * r * x.powf(r - 1.0) * (-c * x.powf(r)).exp(),
            Self::Pareto { alpha } => alpha * (1.0 + x).powf(-alpha - 1.0),
            Self::Gamma { shape, scale } => {
                x.powf(shape - 1.0) * (-x / scale).exp() / (gamma(shape) * scale.powf(shape))
            }
            Self::ExponentialMixture { ref weights, ref rates } => {
                weights.iter().zip(rates).map(|(w, r)| w * r * (-r * x).exp()).sum()
            }
        }
    }

    /// Whether `int_0^inf f(x) dx < inf`.
    pub fn is_finite_activity(&self) -> bool {
        match *self {
            Self::Stable { .. } => false,
            Self::TemperedStable { alpha, .. } => alpha < 0.0,
            Self::Parent { alpha, .. } => alpha < -1.0,
            _ => true,
        }
    }

    fn completely_monotone(&self) -> bool {
        match *self {
            Self::Stable { .. } | Self::Pareto { .. } => true,
            Self::TemperedStable { alpha, .. } | Self::Parent { alpha, .. } => alpha >= -1.0,
            Self::Weibull { r, .. } => r <= 1.0,
            Self::Gamma { shape, .. } => shape <= 1.0,
            Self::ExponentialMixture { ref weights, .. } => weights.iter().all(|&w| w >= 0.0),
        }
    }
}

/// A named catalog density attached to one side of the jump measure.
#[derive(Debug, Clone, PartialEq)]
pub struct CmDensityEntry {
    name: String,
    parameters: BTreeMap<String, f64>,
    side: Side,
    density: CatalogDensity,
}

impl CmDensityEntry {
    /// Look up a catalog density by name and validate its parameters.
    ///
    /// Known names: `stable`, `tempered_stable`, `parent`, `weibull`,
    /// `pareto`, `gamma`, `exponential_mixture` (parameters `weight_<i>`,
    /// `rate_<i>` for `i = 1..`).
    pub fn from_name(name: &str, parameters: &BTreeMap<String, f64>, side: Side) -> Result<Self> {
        let get = |key: &str| -> Result<f64> {
            parameters
                .get(key)
                .copied()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::InvalidArgument(format!("{name}: missing or non-finite parameter '{key}'")))
        };
        let positive = |key: &str| -> Result<f64> {
            let v = get(key)?;
            if v > 0.0 {
                Ok(v)
            } else {
                Err(Error::InvalidArgument(format!("{name}: parameter '{key}' must be > 0, got {v}")))
            }
        };
        let bad = |msg: String| Err(Error::InvalidArgument(format!("{name}: {msg}")));

        let density = match name {
            "stable" => {
                let (lambda, alpha) = (positive("lambda")?, get("alpha")?);
                if !(alpha > 0.0 && alpha < 2.0) {
                    return bad(format!("alpha must lie in (0, 2), got {alpha}"));
                }
                CatalogDensity::Stable { lambda, alpha }
            }
            "tempered_stable" => {
                let (lambda, alpha, beta) = (positive("lambda")?, get("alpha")?, positive("beta")?);
                if alpha >= 2.0 {
                    return bad(format!("alpha must be < 2, got {alpha}"));
                }
                CatalogDensity::TemperedStable { lambda, alpha, beta }
            }
            "parent" => {
                let (lambda1, lambda2) = (positive("lambda1")?, positive("lambda2")?);
                let (alpha, beta) = (get("alpha")?, positive("beta")?);
                if alpha >= 1.0 {
                    return bad(format!("alpha must be < 1, got {alpha}"));
                }
                CatalogDensity::Parent { lambda1, lambda2, alpha, beta }
            }
            "weibull" => CatalogDensity::Weibull { c: positive("c")?, r: positive("r")? },
            "pareto" => CatalogDensity::Pareto { alpha: positive("alpha")? },
            "gamma" => CatalogDensity::Gamma { shape: positive("shape")?, scale: positive("scale")? },
            "exponential_mixture" => {
                let (mut weights, mut rates) = (Vec::new(), Vec::new());
                for i in 1.. {
                    let key = format!("weight_{i}");
                    if !parameters.contains_key(&key) {
                        break;
                    }
                    weights.push(get(&key)?);
                    rates.push(positive(&format!("rate_{i}"))?);
                }
                if weights.is_empty() {
                    return bad("needs at least weight_1 and rate_1".into());
                }
                CatalogDensity::ExponentialMixture { weights, rates }
            }
            other => return Err(Error::UnknownCatalog(other.to_string())),
        };
        Ok(Self { name: name.to_string(), parameters: parameters.clone(), side, density })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn parameters(&self) -> &BTreeMap<String, f64> {
        &self.parameters
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn kind(&self) -> &CatalogDensity {
        &self.density
    }

    /// Density at distance `x > 0` from the origin on this entry's side.
    pub fn density(&self, x: f64) -> f64 {
        self.density.eval(x)
    }

    pub fn is_finite_activity(&self) -> bool {
        self.density.is_finite_activity()
    }
}

/// Types whose jump density can be classified as completely monotone.
pub trait CompletelyMonotone {
    fn is_completely_monotone(&self) -> bool;
}

impl CompletelyMonotone for CmDensityEntry {
    fn is_completely_monotone(&self) -> bool {
        self.density.completely_monotone()
    }
}

impl CompletelyMonotone for JumpMixtureSpec {
    fn is_completely_monotone(&self) -> bool {
        // nonnegative weights are enforced at construction
        self.up().iter().chain(self.down()).all(|ph| ph.weight >= 0.0 && ph.rate > 0.0)
    }
}

pub fn classify_cm<T: CompletelyMonotone + ?Sized>(entry: &T) -> bool {
    entry.is_completely_monotone()
}
