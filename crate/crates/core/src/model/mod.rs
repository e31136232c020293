//! Parametric Lévy risk models.
//!
//! A model is a drift `c`, a Gaussian volatility `sigma` and an optional
//! finite-activity jump part whose size density is a two-sided mixture of
//! exponentials:
//!
//! ```text
//! f(y) = p * sum_j A_j eta_j exp(-eta_j y)        y > 0
//!        q * sum_j B_j vs_j  exp( vs_j  y)        y < 0
//! ```
//!
//! The drift is stored in natural (non-compensated) form, so the Laplace
//! exponent is
//!
//! ```text
//! Psi(theta) = c theta + sigma^2 theta^2 / 2
//!            + lambda [ p sum A_j eta_j/(eta_j - theta) + q sum B_j vs_j/(vs_j + theta) - 1 ]
//! ```
//!
//! which is a rational function of `theta` with simple poles at `eta_j` and
//! `-vs_j`. [`LevyModel::triplet_drift`] converts to the compensated
//! `(a, sigma^2, Pi)` view.

mod catalog;
mod config;
pub mod presets;

pub use catalog::{classify_cm, CatalogDensity, CmDensityEntry, CompletelyMonotone, Side};
pub use config::{ConfigError, JumpsConfig, ModelConfig, PhaseConfig};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance on mixture weight sums at construction.
const WEIGHT_SUM_TOL: f64 = 1e-9;

/// One exponential phase of a jump-size mixture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Phase {
    pub weight: f64,
    pub rate: f64,
}

impl Phase {
    pub fn new(weight: f64, rate: f64) -> Self {
        Self { weight, rate }
    }
}

/// Compound-Poisson jump part with mixed-exponential jump sizes on both sides.
///
/// Phases are sorted by rate, have strictly distinct rates (duplicates are
/// merged by adding weights) and strictly positive weights summing to one on
/// each side that carries probability mass.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpMixtureSpec {
    lambda: f64,
    p: f64,
    up: Vec<Phase>,
    down: Vec<Phase>,
}

impl JumpMixtureSpec {
    /// `p` is the probability of an upward jump; downward jumps get `1 - p`.
    pub fn new(lambda: f64, p: f64, up: Vec<Phase>, down: Vec<Phase>) -> Result<Self> {
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(Error::InvalidModel(format!("jump intensity must be finite and >= 0, got {lambda}")));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidModel(format!("up-jump probability must lie in [0, 1], got {p}")));
        }
        let q = 1.0 - p;
        let up = normalize_side("up", up, p)?;
        let down = normalize_side("down", down, q)?;
        Ok(Self { lambda, p, up, down })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        1.0 - self.p
    }

    pub fn up(&self) -> &[Phase] {
        &self.up
    }

    pub fn down(&self) -> &[Phase] {
        &self.down
    }

    /// `(rate, lambda * p * A_j)` for every upward phase.
    pub fn up_intensities(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let scale = self.lambda * self.p;
        self.up.iter().map(move |ph| (ph.rate, scale * ph.weight))
    }

    /// `(rate, lambda * q * B_j)` for every downward phase.
    pub fn down_intensities(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let scale = self.lambda * self.q();
        self.down.iter().map(move |ph| (ph.rate, scale * ph.weight))
    }

    /// Probability density of a single jump at `y` (zero at `y = 0`).
    pub fn density(&self, y: f64) -> f64 {
        if y > 0.0 {
            self.side_density(Side::Up, y, 0)
        } else if y < 0.0 {
            self.side_density(Side::Down, -y, 0)
        } else {
            0.0
        }
    }

    /// `order`-th derivative in `x > 0` of the one-sided density
    /// `x -> f(x)` (up) or `x -> f(-x)` (down).
    pub fn side_density(&self, side: Side, x: f64, order: u32) -> f64 {
        let (phases, mass) = match side {
            Side::Up => (&self.up, self.p),
            Side::Down => (&self.down, self.q()),
        };
        let sign = if order % 2 == 0 { 1.0 } else { -1.0 };
        mass * phases
            .iter()
            .map(|ph| ph.weight * ph.rate.powi(order as i32 + 1) * (-ph.rate * x).exp())
            .sum::<f64>()
            * sign
    }

    /// Expected upward jump size times `p` (mean positive part of a jump).
    pub fn mean_up_jump(&self) -> f64 {
        self.p * self.up.iter().map(|ph| ph.weight / ph.rate).sum::<f64>()
    }

    fn from_intensities(up: &[(f64, f64)], down: &[(f64, f64)]) -> Result<Option<Self>> {
        let up_total: f64 = up.iter().map(|&(_, m)| m).sum();
        let down_total: f64 = down.iter().map(|&(_, m)| m).sum();
        let lambda = up_total + down_total;
        if lambda == 0.0 {
            return Ok(None);
        }
        let to_phases = |list: &[(f64, f64)], total: f64| -> Vec<Phase> {
            if total == 0.0 {
                Vec::new()
            } else {
                list.iter().map(|&(rate, m)| Phase::new(m / total, rate)).collect()
            }
        };
        Self::new(lambda, up_total / lambda, to_phases(up, up_total), to_phases(down, down_total)).map(Some)
    }
}

fn normalize_side(label: &str, phases: Vec<Phase>, mass: f64) -> Result<Vec<Phase>> {
    for ph in &phases {
        if !ph.weight.is_finite() || ph.weight < 0.0 {
            return Err(Error::InvalidModel(format!("{label} weight must be finite and >= 0, got {}", ph.weight)));
        }
        if !ph.rate.is_finite() || ph.rate <= 0.0 {
            return Err(Error::InvalidModel(format!("{label} rate must be finite and > 0, got {}", ph.rate)));
        }
    }
    if mass == 0.0 {
        return Ok(Vec::new());
    }
    let total: f64 = phases.iter().map(|ph| ph.weight).sum();
    if phases.is_empty() || (total - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(Error::InvalidModel(format!(
            "{label} weights must sum to 1 when the side has positive probability, got {total}"
        )));
    }

    let mut sorted: Vec<Phase> = phases.into_iter().filter(|ph| ph.weight > 0.0).collect();
    sorted.sort_by(|a, b| a.rate.total_cmp(&b.rate));
    let mut merged: Vec<Phase> = Vec::with_capacity(sorted.len());
    for ph in sorted {
        match merged.last_mut() {
            Some(last) if last.rate == ph.rate => last.weight += ph.weight,
            _ => merged.push(ph),
        }
    }
    for ph in &mut merged {
        ph.weight /= total;
    }
    Ok(merged)
}

/// Lévy risk model in natural-drift form.
#[derive(Debug, Clone, PartialEq)]
pub struct LevyModel {
    drift: f64,
    sigma: f64,
    jumps: Option<JumpMixtureSpec>,
}

impl LevyModel {
    pub fn new(drift: f64, sigma: f64, jumps: Option<JumpMixtureSpec>) -> Result<Self> {
        if !drift.is_finite() {
            return Err(Error::InvalidModel(format!("drift must be finite, got {drift}")));
        }
        if !sigma.is_finite() || sigma < 0.0 {
            return Err(Error::InvalidModel(format!("sigma must be finite and >= 0, got {sigma}")));
        }
        let jumps = jumps.filter(|j| j.lambda > 0.0 && (!j.up.is_empty() || !j.down.is_empty()));
        Ok(Self { drift, sigma, jumps })
    }

    /// Brownian motion with drift.
    pub fn brownian(drift: f64, sigma: f64) -> Result<Self> {
        Self::new(drift, sigma, None)
    }

    /// Build from the compensated triplet drift `a` (truncation `|y| < 1`).
    pub fn from_triplet(a: f64, sigma: f64, jumps: Option<JumpMixtureSpec>) -> Result<Self> {
        let shift = jumps.as_ref().map_or(0.0, small_jump_mean);
        Self::new(a - shift, sigma, jumps)
    }

    pub fn drift(&self) -> f64 {
        self.drift
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn jumps(&self) -> Option<&JumpMixtureSpec> {
        self.jumps.as_ref()
    }

    pub fn lambda(&self) -> f64 {
        self.jumps.as_ref().map_or(0.0, |j| j.lambda)
    }

    pub fn up_intensities(&self) -> Vec<(f64, f64)> {
        self.jumps.as_ref().map_or_else(Vec::new, |j| j.up_intensities().collect())
    }

    pub fn down_intensities(&self) -> Vec<(f64, f64)> {
        self.jumps.as_ref().map_or_else(Vec::new, |j| j.down_intensities().collect())
    }

    pub fn up_rates(&self) -> Vec<f64> {
        self.jumps.as_ref().map_or_else(Vec::new, |j| j.up.iter().map(|ph| ph.rate).collect())
    }

    pub fn down_rates(&self) -> Vec<f64> {
        self.jumps.as_ref().map_or_else(Vec::new, |j| j.down.iter().map(|ph| ph.rate).collect())
    }

    pub fn is_spectrally_negative(&self) -> bool {
        self.jumps.as_ref().map_or(true, |j| j.up.is_empty())
    }

    /// True when the process can reach a lower level continuously.
    pub fn creeps_down(&self) -> bool {
        self.sigma > 0.0 || self.drift < 0.0
    }

    /// True when the process can reach an upper level continuously.
    pub fn creeps_up(&self) -> bool {
        self.sigma > 0.0 || self.drift > 0.0
    }

    /// Open interval on which `E exp(theta X_1)` is finite.
    pub fn domain(&self) -> (f64, f64) {
        let lo = self.down_rates().first().map_or(f64::NEG_INFINITY, |&r| -r);
        let hi = self.up_rates().first().copied().unwrap_or(f64::INFINITY);
        (lo, hi)
    }

    /// All poles of the rational continuation of `Psi`, ascending.
    pub fn poles(&self) -> Vec<f64> {
        let mut poles: Vec<f64> = self.down_rates().iter().rev().map(|r| -r).collect();
        poles.extend(self.up_rates());
        poles
    }

    fn check_domain(&self, theta: f64) -> Result<()> {
        let (lo, hi) = self.domain();
        if theta.is_nan() || theta >= hi {
            return Err(Error::Domain { theta, pole: hi, rate: hi });
        }
        if theta <= lo {
            return Err(Error::Domain { theta, pole: lo, rate: -lo });
        }
        Ok(())
    }

    /// Laplace exponent `Psi(theta) = log E exp(theta X_1)`.
    pub fn laplace_exponent(&self, theta: f64) -> Result<f64> {
        self.check_domain(theta)?;
        Ok(self.exponent_extended(theta))
    }

    /// Exact `order`-th derivative of `Psi` at `theta` (`order >= 1`).
    pub fn laplace_exponent_deriv(&self, theta: f64, order: u32) -> Result<f64> {
        if order == 0 {
            return Err(Error::InvalidArgument("derivative order must be >= 1".into()));
        }
        self.check_domain(theta)?;
        Ok(self.exponent_extended_deriv(theta, order))
    }

    /// Rational continuation of `Psi` to the whole real line minus the poles.
    ///
    /// Outside the domain this is no longer a cumulant generating function,
    /// but its level sets drive every partial-fraction construction.
    pub fn exponent_extended(&self, theta: f64) -> f64 {
        let mut value = self.drift * theta + 0.5 * self.sigma * self.sigma * theta * theta;
        for (rate, m) in self.up_intensities() {
            value += m * theta / (rate - theta);
        }
        for (rate, m) in self.down_intensities() {
            value -= m * theta / (rate + theta);
        }
        value
    }

    /// Derivatives of [`Self::exponent_extended`]; `order = 0` is the value.
    pub fn exponent_extended_deriv(&self, theta: f64, order: u32) -> f64 {
        match order {
            0 => self.exponent_extended(theta),
            _ => {
                let k = order as i32;
                let fact: f64 = (1..=order).map(f64::from).product();
                let mut value = match order {
                    1 => self.drift + self.sigma * self.sigma * theta,
                    2 => self.sigma * self.sigma,
                    _ => 0.0,
                };
                for (rate, m) in self.up_intensities() {
                    value += m * fact * rate / (rate - theta).powi(k + 1);
                }
                let sign = if order % 2 == 0 { 1.0 } else { -1.0 };
                for (rate, m) in self.down_intensities() {
                    value += sign * m * fact * rate / (rate + theta).powi(k + 1);
                }
                value
            }
        }
    }

    /// `E X_1 = Psi'(0)`.
    pub fn mean(&self) -> f64 {
        self.exponent_extended_deriv(0.0, 1)
    }

    /// Drift `a` of the compensated triplet with truncation `|y| < 1`.
    pub fn triplet_drift(&self) -> f64 {
        self.drift + self.jumps.as_ref().map_or(0.0, small_jump_mean)
    }

    /// Exponentially tilted model with `Psi_rho(eta) = Psi(eta + rho) - Psi(rho)`.
    pub fn tilt(&self, rho: f64) -> Result<LevyModel> {
        self.check_domain(rho)?;
        let up: Vec<(f64, f64)> = self
            .up_intensities()
            .into_iter()
            .map(|(rate, m)| (rate - rho, m * rate / (rate - rho)))
            .collect();
        let down: Vec<(f64, f64)> = self
            .down_intensities()
            .into_iter()
            .map(|(rate, m)| (rate + rho, m * rate / (rate + rho)))
            .collect();
        let jumps = JumpMixtureSpec::from_intensities(&up, &down)?;
        LevyModel::new(self.drift + self.sigma * self.sigma * rho, self.sigma, jumps)
    }

    /// Mean of the tilted process, `Psi'(rho)`.
    pub fn tilted_mean(&self, rho: f64) -> Result<f64> {
        self.laplace_exponent_deriv(rho, 1)
    }
}

/// `lambda * int_{|y|<1} y f(y) dy` for a mixed-exponential jump part.
fn small_jump_mean(jumps: &JumpMixtureSpec) -> f64 {
    let up: f64 = jumps.up_intensities().map(|(r, m)| m * truncated_exp_mean(r)).sum();
    let down: f64 = jumps.down_intensities().map(|(r, m)| m * truncated_exp_mean(r)).sum();
    up - down
}

/// `int_0^1 y r exp(-r y) dy = (1 - exp(-r)(1 + r)) / r`.
fn truncated_exp_mean(rate: f64) -> f64 {
    if rate < 1e-3 {
        // series of the cancelling numerator
        rate / 2.0 - rate * rate / 3.0 + rate.powi(3) / 8.0
    } else {
        (-(-rate).exp_m1() - rate * (-rate).exp()) / rate
    }
}
